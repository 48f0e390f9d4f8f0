//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use qgeokit::config::GeometryConfig;
use qgeokit::dynamics::{
    evolve_exact, evolve_symplectic, evolve_symplectic_with_reference, gauge_spanning_states, max_gauge_variance,
    unitarity_check, QuadraticHamiltonian, GAUGE_PROBE_ANGLES,
};
use qgeokit::kahler::{
    build_kahler_family, flat_metric_field, kahler_residuals, mixed_block_norm, phase_chart_steps, pullback_check,
    random_admissible_extension, riemann_curvature_with_steps, riemann_tensor, round_sphere, spherical_line_element,
    SphericalMetricSpec,
};
use qgeokit::quantum::{
    dirac_product_direct, dirac_product_kahler, inverse_madelung, madelung, quantum_statistical_distance, WaveVector,
};
use qgeokit::sampling::{
    random_complex_symmetric, random_hermitian, random_interior_probability, random_phases, random_probability,
    random_wave, seeded, SeededRng,
};
use qgeokit::simplex::{curve_length, statistical_distance, GeodesicOracle, ProbabilityVector, SimplexPath};
use qgeokit::symplectic::{canonical_residuals, canonical_residuals_analytic, PhasePoint};

type C = Complex64;

struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            details: Vec::new(),
        }
    }

    /// Records a sub-check and folds it into the verdict.
    fn check(&mut self, label: &str, ok: bool, measured: String) {
        self.passed &= ok;
        self.details
            .push(format!("{} {label}: {measured}", if ok { "ok  " } else { "FAIL" }));
    }
}

fn cfg(alpha: f64, n: usize) -> GeometryConfig {
    GeometryConfig::new(alpha, n).unwrap()
}

fn random_point(n: usize, floor: f64, rng: &mut SeededRng) -> PhasePoint {
    let p = random_interior_probability(n, floor, rng);
    PhasePoint::new(p, random_phases(n, 3.0, rng)).unwrap()
}

fn distance_closure() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = seeded(101);
    let sizes = [3, 5, 8];
    let alphas = [0.5, 1.0, 2.0];
    let (mut worst, mut lowest) = (0.0f64, f64::INFINITY);
    let mut failures = 0;
    for k in 0..50 {
        let (n, alpha) = (sizes[k % 3], alphas[(k / 3) % 3]);
        let c = cfg(alpha, n);
        let a = random_interior_probability(n, 1e-3, &mut rng);
        let b = random_interior_probability(n, 1e-3, &mut rng);
        let exact = statistical_distance(&a, &b, &c).unwrap();
        match GeodesicOracle::new(64, 4000, rng.random()).unwrap().run(&a, &b, &c) {
            Ok(o) => {
                worst = worst.max((o.length - exact).abs());
                lowest = lowest.min(o.length - exact);
            }
            Err(_) => failures += 1,
        }
    }
    out.check(
        "oracle vs closed form, 50 pairs (|gap| < 5e-2)",
        failures == 0 && worst < 5e-2,
        format!("max |gap| = {worst:.3e}, min gap = {lowest:.3e}, failures = {failures}"),
    );

    let mut worst = 0.0f64;
    for alpha in alphas {
        let c = cfg(alpha, 2);
        for (i, j) in [(0, 1), (1, 0)] {
            let a = ProbabilityVector::nudged_basis(2, i, 1e-6);
            let b = ProbabilityVector::nudged_basis(2, j, 1e-6);
            let o = GeodesicOracle::new(64, 4000, 5).unwrap().run(&a, &b, &c).unwrap();
            worst = worst.max((o.length - statistical_distance(&a, &b, &c).unwrap()).abs());
        }
    }
    out.check(
        "n = 2 antipodal pairs (|gap| < 1e-3)",
        worst < 1e-3,
        format!("max |gap| = {worst:.3e}"),
    );

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = 4;
        let a = random_interior_probability(n, 1e-3, &mut rng);
        let b = random_interior_probability(n, 1e-3, &mut rng);
        let path = SimplexPath::from_fn((0..=64).map(|k| k as f64 / 64.0).collect(), |t| {
            ProbabilityVector::new(
                a.as_slice()
                    .iter()
                    .zip(b.as_slice())
                    .map(|(x, y)| (1.0 - t) * x + t * y)
                    .collect(),
            )
        })
        .unwrap();
        let base_d = statistical_distance(&a, &b, &cfg(0.5, n)).unwrap();
        let base_l = curve_length(&path, &cfg(0.5, n)).unwrap();
        for alpha in [1.0, 2.0, 7.3] {
            let s = (alpha / 0.5f64).sqrt();
            let d = statistical_distance(&a, &b, &cfg(alpha, n)).unwrap();
            let l = curve_length(&path, &cfg(alpha, n)).unwrap();
            worst = worst.max((d / base_d - s).abs()).max((l / base_l - s).abs());
        }
    }
    out.check(
        "sqrt(alpha) scaling of distances (< 1e-12)",
        worst < 1e-12,
        format!("max ratio error = {worst:.3e}"),
    );
    out
}

fn kahler_family() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = seeded(202);
    let (mut residual, mut admissibility, mut faulted) = (0.0f64, 0.0f64, f64::INFINITY);
    for n in [2, 4, 8, 16] {
        let c = cfg(0.5, n);
        for _ in 0..25 {
            let p = random_probability(n, &mut rng);
            let scale = rng.random_range(0.1..1.0);
            let a = random_admissible_extension(&p, &c, rng.random(), scale).unwrap();
            admissibility = admissibility.max(a.admissibility_residual(&p, &c).unwrap());
            let mut t = build_kahler_family(&p, &a, &c).unwrap();
            residual = residual.max(kahler_residuals(&t).unwrap().max());
            t.j.view_mut((n, 0), (n, n)).neg_mut();
            faulted = faulted.min(kahler_residuals(&t).unwrap().max());
        }
    }
    out.check(
        "residuals over 100 samples, n in {2,4,8,16} (< 1e-10)",
        residual < 1e-10,
        format!("max = {residual:.3e}"),
    );
    out.check(
        "admissibility G A G^-1 = A^T (< 1e-12)",
        admissibility < 1e-12,
        format!("max = {admissibility:.3e}"),
    );
    out.check(
        "corrupted J is rejected (> 0.1)",
        faulted > 0.1,
        format!("min = {faulted:.3e}"),
    );
    out
}

fn flatness_and_symmetry() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = seeded(303);
    let mut worst = 0.0f64;
    for n in [2, 3] {
        let c = cfg(0.5, n);
        let field = flat_metric_field(&c);
        for _ in 0..10 {
            let pt = random_point(n, 1e-2, &mut rng);
            let z = pt.coordinates();
            worst = worst.max(riemann_curvature_with_steps(&field, &z, &phase_chart_steps(&z, &c)).unwrap());
        }
    }
    out.check(
        "Riemann tensor of the A = 0 metric, 20 points (< 1e-5)",
        worst < 1e-5,
        format!("max = {worst:.3e}"),
    );

    let mut worst = 0.0f64;
    let step = GeometryConfig::default().curvature_step;
    for radius in [0.5, 1.0, 2.0, 3.0] {
        let field = round_sphere(radius);
        let center = [1.1, 0.4];
        let tensor = riemann_tensor(&field, &center, &[step; 2]).unwrap();
        let k = tensor.sectional(&field(&center).unwrap(), 0, 1);
        worst = worst.max((k - 1.0 / (radius * radius)).abs());
    }
    out.check(
        "sphere fixture curvature 1/r^2 (< 1e-4)",
        worst < 1e-4,
        format!("max error = {worst:.3e}"),
    );

    let c = cfg(0.5, 3);
    let mut mixed = 0.0f64;
    for spec in [
        SphericalMetricSpec::euclidean(),
        SphericalMetricSpec::new(|r| 2.0 + r.sin(), |r| r * r),
    ] {
        for _ in 0..10 {
            mixed = mixed.max(
                spherical_line_element(&spec, &random_point(3, 1e-3, &mut rng), &c)
                    .unwrap()
                    .1,
            );
        }
    }
    out.check(
        "dP dS block of spherical metrics (exactly 0)",
        mixed == 0.0,
        format!("max = {mixed:e}"),
    );

    let mut smallest = f64::INFINITY;
    for n in [2, 3, 5, 8] {
        let c = cfg(0.5, n);
        for _ in 0..25 {
            let p = random_probability(n, &mut rng);
            let scale = rng.random_range(0.1..2.0);
            let a = random_admissible_extension(&p, &c, rng.random(), scale).unwrap();
            smallest = smallest.min(mixed_block_norm(&build_kahler_family(&p, &a, &c).unwrap().g));
        }
    }
    out.check(
        "dP dS block for A != 0 of scale >= 0.1 (> 1e-3)",
        smallest > 1e-3,
        format!("min = {smallest:.3e}"),
    );
    out
}

fn madelung_pullback() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = seeded(404);
    let (mut deviation, mut roundtrip) = (0.0f64, 0.0f64);
    for k in 0..50 {
        let n = 2 + k % 7;
        let c = cfg([0.5, 1.0, 2.0][k % 3], n);
        let pt = random_point(n, 1e-3, &mut rng);
        deviation = deviation.max(pullback_check(&pt, &c).unwrap().deviation);
        let psi = random_wave(n, &mut rng);
        let back = madelung(&inverse_madelung(&psi, &c).unwrap(), &c);
        roundtrip = roundtrip.max(
            psi.as_slice()
                .iter()
                .zip(back.as_slice())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        );
    }
    out.check(
        "pullback of complex-chart tensors, 50 points (< 1e-10)",
        deviation < 1e-10,
        format!("max = {deviation:.3e}"),
    );
    out.check(
        "Madelung roundtrip (< 1e-12)",
        roundtrip < 1e-12,
        format!("max = {roundtrip:.3e}"),
    );

    let (mut fd, mut analytic) = (0.0f64, 0.0f64);
    for n in [2, 3, 5] {
        let c = cfg(0.7, n);
        let points: Vec<PhasePoint> = (0..10).map(|_| random_point(n, 1e-2, &mut rng)).collect();
        fd = fd.max(canonical_residuals(&points, &c).unwrap());
        analytic = analytic.max(canonical_residuals_analytic(&points, &c).unwrap());
    }
    out.check(
        "canonical (x, y) brackets, finite differences (< 1e-6)",
        fd < 1e-6,
        format!("max = {fd:.3e}"),
    );
    out.check(
        "canonical (x, y) brackets, analytic (< 1e-12)",
        analytic < 1e-12,
        format!("max = {analytic:.3e}"),
    );
    out
}

fn max_diff(a: &WaveVector, b: &WaveVector) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn unitary_dynamics() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = seeded(505);
    let c8 = cfg(0.5, 8);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let m = random_hermitian(8, &mut rng);
        worst = worst.max(unitarity_check(&m, rng.random_range(0.1..10.0), &c8).unwrap());
    }
    out.check(
        "U^H U = I for random Hermitian M, n = 8 (< 1e-12)",
        worst < 1e-12,
        format!("max = {worst:.3e}"),
    );

    let exchange = DMatrix::from_row_slice(
        2,
        2,
        &[C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0)],
    );
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let psi = evolve_exact(&exchange, &WaveVector::basis(2, 0), PI * alpha / 2.0, &cfg(alpha, 2)).unwrap();
        let p = psi.probabilities();
        worst = worst.max(p[0].abs()).max((p[1] - 1.0).abs());
    }
    out.check(
        "exchange reaches P = (0, 1) at t = pi alpha / 2 (< 1e-9)",
        worst < 1e-9,
        format!("max = {worst:.3e}"),
    );

    let c2 = cfg(0.5, 2);
    let h = QuadraticHamiltonian::hermitian(exchange.clone()).unwrap();
    let start = PhasePoint::new(ProbabilityVector::new(vec![0.8, 0.2]).unwrap(), vec![0.0, 0.3]).unwrap();
    let t_end = 1.0;
    let exact = evolve_exact(&exchange, &madelung(&start, &c2), t_end, &c2).unwrap();
    let error = |steps: usize| {
        let traj = evolve_symplectic(&h, &start, t_end / steps as f64, steps, &c2).unwrap();
        max_diff(traj.last().unwrap(), &exact)
    };
    let (e1, e2, e3) = (error(50), error(100), error(200));
    let (r1, r2) = (e1 / e2, e2 / e3);
    out.check(
        "midpoint order 2 under dt halving (ratio 4 +- 0.2)",
        (r1 - 4.0).abs() < 0.2 && (r2 - 4.0).abs() < 0.2,
        format!("errors {e1:.3e}, {e2:.3e}, {e3:.3e}; ratios {r1:.4}, {r2:.4}"),
    );

    let c4 = cfg(0.5, 4);
    let h = QuadraticHamiltonian::hermitian(random_hermitian(4, &mut rng)).unwrap();
    let start = random_point(4, 1e-3, &mut rng);
    let reference = random_wave(4, &mut rng);
    let traj = evolve_symplectic_with_reference(&h, &start, Some(&reference), 1e-3, 10_000, &c4).unwrap();
    let drift = traj
        .states
        .iter()
        .map(|s| (s.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
    out.check(
        "midpoint norm drift over 1e4 steps (< 1e-10)",
        drift < 1e-10,
        format!("max = {drift:.3e}"),
    );
    let refs = traj.reference.as_ref().unwrap();
    let d0 = quantum_statistical_distance(&refs[0], &traj.states[0], &c4).unwrap();
    let mut worst = 0.0f64;
    for (r, s) in refs.iter().zip(&traj.states) {
        worst = worst.max((quantum_statistical_distance(r, s, &c4).unwrap() - d0).abs());
    }
    out.check(
        "co-evolved wave distance constant (< 1e-10)",
        worst < 1e-10,
        format!("max drift = {worst:.3e}"),
    );
    out
}

fn pairing_must_vanish() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = seeded(606);
    let zero = |n: usize| DMatrix::from_element(n, n, C::new(0.0, 0.0));
    let mut hermitian_worst = 0.0f64;
    let mut pairing_smallest = f64::INFINITY;
    for n in [2, 3, 5, 8] {
        let mut states = gauge_spanning_states(n);
        states.extend((0..10).map(|_| random_wave(n, &mut rng)));
        let m = random_hermitian(n, &mut rng);
        let h = QuadraticHamiltonian::new(m.clone(), zero(n))
            .unwrap()
            .with_energy(|t| 5.0 * t);
        hermitian_worst = hermitian_worst.max(max_gauge_variance(&h, &states, &GAUGE_PROBE_ANGLES, 0.4).unwrap());
        for size in [1e-10, 1e-6, 1e-2, 1.0] {
            let mut nmat = random_complex_symmetric(n, &mut rng);
            let norm = nmat.iter().map(|z| z.norm()).fold(0.0, f64::max);
            nmat *= C::new(size / norm, 0.0);
            let h = QuadraticHamiltonian::new(m.clone(), nmat).unwrap();
            pairing_smallest = pairing_smallest.min(max_gauge_variance(&h, &states, &GAUGE_PROBE_ANGLES, 0.4).unwrap());
        }
    }
    out.check(
        "N = 0: gauge variance on all states (< 1e-13)",
        hermitian_worst < 1e-13,
        format!("max = {hermitian_worst:.3e}"),
    );
    out.check(
        "N != 0 (|N| >= 1e-10): some state has gauge variance >= 1e-13",
        pairing_smallest >= 1e-13,
        format!("min over Hamiltonians of max variance = {pairing_smallest:.3e}"),
    );

    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let n = 3;
        let c = cfg(alpha, n);
        let identity = DMatrix::<C>::identity(n, n);
        let h = QuadraticHamiltonian::new(random_hermitian(n, &mut rng), identity).unwrap();
        let start = random_point(n, 1e-2, &mut rng);
        let psi = madelung(&start, &c);
        let q: C = psi.as_slice().iter().map(|z| z * z).sum();
        let predicted = -4.0 / alpha * q.im;
        let (dt, steps) = (1e-5, 10);
        let traj = evolve_symplectic(&h, &start, dt, steps, &c).unwrap();
        let observed = (traj.last().unwrap().norm_sqr() - 1.0) / (dt * steps as f64);
        worst = worst.max(((observed - predicted) / predicted).abs());
    }
    out.check(
        "N = I norm drift rate -(4/alpha) Im Q (within 5%)",
        worst < 0.05,
        format!("max relative error = {worst:.3e}"),
    );
    out
}

fn dirac_product() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = seeded(707);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let n = 2 + k % 15;
        let c = cfg([0.5, 1.0, 3.0][k % 3], n);
        let (a, b) = (random_wave(n, &mut rng), random_wave(n, &mut rng));
        let diff = dirac_product_kahler(&a, &b, &c).unwrap() - dirac_product_direct(&a, &b).unwrap();
        worst = worst.max(diff.norm());
    }
    out.check(
        "(g + i Omega)/2 product vs sum conj(phi) phi', 100 pairs (< 1e-14)",
        worst < 1e-14,
        format!("max = {worst:.3e}"),
    );
    out
}

fn distance_reduction() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = seeded(808);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let n = 2 + k % 9;
        let c = cfg([0.5, 1.0, 2.0][k % 3], n);
        let (a, b) = (random_probability(n, &mut rng), random_probability(n, &mut rng));
        let phases = random_phases(n, 3.0, &mut rng);
        let lift = |p: &ProbabilityVector| madelung(&PhasePoint::new(p.clone(), phases.clone()).unwrap(), &c);
        let q = quantum_statistical_distance(&lift(&a), &lift(&b), &c).unwrap();
        worst = worst.max((q - statistical_distance(&a, &b, &c).unwrap()).abs());
    }
    out.check(
        "equal-phase wave distance = statistical distance, 50 pairs (< 1e-12)",
        worst < 1e-12,
        format!("max = {worst:.3e}"),
    );
    out
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("statistical-distance closure", distance_closure),
        ("Kahler family", kahler_family),
        ("flatness and symmetry", flatness_and_symmetry),
        ("Madelung map and pullback", madelung_pullback),
        ("unitary dynamics", unitary_dynamics),
        ("pairing block must vanish", pairing_must_vanish),
        ("Dirac product", dirac_product),
        ("distance reduction", distance_reduction),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{status} [{}] {name} ({:.2}s)", k + 1, start.elapsed().as_secs_f64());
        for line in &outcome.details {
            println!("       {line}");
        }
        failed += usize::from(!outcome.passed);
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
