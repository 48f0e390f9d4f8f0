//! Finite-difference velocities and trapezoidal integration on arbitrary
//! (possibly non-uniform) parameter grids.

use crate::error::{Error, Result};

/// Checks that `grid` is strictly increasing, starts at 0 and ends at 1.
pub fn validate_unit_grid(grid: &[f64], samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::Grid(format!("need at least 2 samples, got {samples}")));
    }
    if grid.len() != samples {
        return Err(Error::Grid(format!(
            "grid has {} points but path has {samples} samples",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid("grid is not strictly increasing".into()));
    }
    let (first, last) = (grid[0], grid[grid.len() - 1]);
    if first.abs() > 1e-15 || (last - 1.0).abs() > 1e-15 {
        return Err(Error::Grid(format!("grid must span [0, 1], got [{first}, {last}]")));
    }
    Ok(())
}

/// Second-order derivative of each sampled vector with respect to the grid
/// parameter: three-point centered weights inside, one-sided three-point
/// weights at the ends. Two-sample paths fall back to a forward difference.
pub fn centered_velocities(grid: &[f64], values: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = values.len();
    let dim = values.first().map_or(0, Vec::len);
    if m == 2 {
        let h = grid[1] - grid[0];
        let v: Vec<f64> = (0..dim).map(|i| (values[1][i] - values[0][i]) / h).collect();
        return vec![v.clone(), v];
    }

    let combine = |w: [f64; 3], idx: [usize; 3]| -> Vec<f64> {
        (0..dim)
            .map(|i| w[0] * values[idx[0]][i] + w[1] * values[idx[1]][i] + w[2] * values[idx[2]][i])
            .collect()
    };

    let mut out = Vec::with_capacity(m);
    {
        let h0 = grid[1] - grid[0];
        let h1 = grid[2] - grid[1];
        let w = [
            -(2.0 * h0 + h1) / (h0 * (h0 + h1)),
            (h0 + h1) / (h0 * h1),
            -h0 / (h1 * (h0 + h1)),
        ];
        out.push(combine(w, [0, 1, 2]));
    }
    for k in 1..m - 1 {
        let h0 = grid[k] - grid[k - 1];
        let h1 = grid[k + 1] - grid[k];
        let w = [-h1 / (h0 * (h0 + h1)), (h1 - h0) / (h0 * h1), h0 / (h1 * (h0 + h1))];
        out.push(combine(w, [k - 1, k, k + 1]));
    }
    {
        let h0 = grid[m - 2] - grid[m - 3];
        let h1 = grid[m - 1] - grid[m - 2];
        let w = [
            h1 / (h0 * (h0 + h1)),
            -(h0 + h1) / (h0 * h1),
            (2.0 * h1 + h0) / (h1 * (h0 + h1)),
        ];
        out.push(combine(w, [m - 3, m - 2, m - 1]));
    }
    out
}

/// Composite trapezoidal rule for node values `f` on `grid`.
pub fn trapezoid(grid: &[f64], f: &[f64]) -> f64 {
    grid.windows(2)
        .zip(f.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}
