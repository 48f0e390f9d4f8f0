//! The four batch commands. Each returns a report; files go to `out`.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::config::{complex_matrix, probability_vector, wave_vector, ComplexPair, EvolveMethod, RunConfig};
use super::report::{full_precision, Criterion, Record, Report};
use super::CliError;
use crate::config::GeometryConfig;
use crate::dynamics::{
    conservation_report, evolve_exact_trajectory, evolve_symplectic_with_reference, hamiltonian_value, unitarity_check,
    QuadraticHamiltonian, Trajectory,
};
use crate::error::Error;
use crate::kahler::{
    build_kahler_family, flat_metric_field, kahler_residuals, min_eigenvalue, mixed_block_norm, phase_chart_steps,
    pullback_check, random_admissible_extension, riemann_curvature_with_steps, riemann_tensor, round_sphere,
    spherical_line_element, SphericalMetricSpec,
};
use crate::quantum::{inverse_madelung, quantum_statistical_distance, WaveVector};
use crate::sampling::{random_interior_probability, random_phases, seeded};
use crate::simplex::{statistical_distance, GeodesicOracle, ProbabilityVector};
use crate::symplectic::PhasePoint;

fn geometry(alpha: f64, n: usize) -> Result<GeometryConfig, CliError> {
    GeometryConfig::new(alpha, n).map_err(|e| CliError::Config(e.to_string()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))
}

fn write_row(w: &mut csv::Writer<std::fs::File>, path: &Path, row: &[String]) -> Result<(), CliError> {
    w.write_record(row).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<String, CliError> {
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(path.display().to_string())
}

fn lift(p: &ProbabilityVector) -> WaveVector {
    WaveVector::from_parts(
        &p.as_slice().iter().map(|v| v.sqrt()).collect::<Vec<_>>(),
        &vec![0.0; p.len()],
    )
}

pub fn cmd_distance(run: &RunConfig, seed: u64, out: &Path) -> Result<Report, CliError> {
    let d = &run.distance;
    let tol = d.tolerance;
    let mut rng = seeded(seed);

    let mut pairs: Vec<(String, ProbabilityVector, ProbabilityVector)> = Vec::new();
    for (k, pair) in d.pairs.iter().enumerate() {
        let id = pair.id.clone().unwrap_or_else(|| format!("pair-{k:02}"));
        pairs.push((
            id.clone(),
            probability_vector(&id, &pair.a)?,
            probability_vector(&id, &pair.b)?,
        ));
    }
    let floor = GeometryConfig::default().boundary_floor;
    for k in 0..d.random_pairs {
        let a = random_interior_probability(d.n, floor, &mut rng);
        let b = random_interior_probability(d.n, floor, &mut rng);
        pairs.push((format!("random-{k:02}"), a, b));
    }

    let path = out.join("distances.csv");
    let mut w = csv_writer(&path)?;
    write_row(
        &mut w,
        &path,
        &["pair", "kind", "n", "alpha", "classical", "quantum"].map(String::from),
    )?;
    let mut records = Vec::new();

    for (id, a, b) in &pairs {
        if a.len() != b.len() {
            return Err(CliError::Config(format!("{id}: endpoints of different length")));
        }
        let cfg = geometry(run.alpha, a.len())?;
        let classical = statistical_distance(a, b, &cfg).map_err(CliError::from_lib)?;
        let reverse = statistical_distance(b, a, &cfg).map_err(CliError::from_lib)?;
        let quantum = quantum_statistical_distance(&lift(a), &lift(b), &cfg).map_err(CliError::from_lib)?;
        records.push(Record::below(
            format!("distance/{id}/reduction"),
            "equal-phase wave distance = statistical distance",
            quantum - classical,
            tol,
        ));
        records.push(Record::below(
            format!("distance/{id}/symmetry"),
            "d(a, b) = d(b, a)",
            classical - reverse,
            tol,
        ));
        write_row(
            &mut w,
            &path,
            &[
                id.clone(),
                "probability".into(),
                a.len().to_string(),
                full_precision(run.alpha),
                full_precision(classical),
                full_precision(quantum),
            ],
        )?;
    }

    for (k, pair) in d.wave_pairs.iter().enumerate() {
        let id = pair.id.clone().unwrap_or_else(|| format!("wave-{k:02}"));
        let a = wave_vector(&id, &pair.a)?;
        let b = wave_vector(&id, &pair.b)?;
        if a.len() != b.len() {
            return Err(CliError::Config(format!("{id}: states of different length")));
        }
        let cfg = geometry(run.alpha, a.len())?;
        let quantum = quantum_statistical_distance(&a, &b, &cfg).map_err(CliError::from_lib)?;
        let pa = ProbabilityVector::new(a.probabilities()).map_err(CliError::from_lib)?;
        let pb = ProbabilityVector::new(b.probabilities()).map_err(CliError::from_lib)?;
        let classical = statistical_distance(&pa, &pb, &cfg).map_err(CliError::from_lib)?;
        records.push(Record::below(
            format!("distance/{id}/phase-bound"),
            "wave distance >= statistical distance of |psi|^2",
            (classical - quantum).max(0.0),
            tol,
        ));
        write_row(
            &mut w,
            &path,
            &[
                id,
                "wave".into(),
                a.len().to_string(),
                full_precision(run.alpha),
                full_precision(classical),
                full_precision(quantum),
            ],
        )?;
    }
    let outputs = vec![finish(w, &path)?];
    Ok(Report::new("distance", seed, run.alpha, records, outputs))
}

fn max_of(v: &[f64]) -> f64 {
    v.iter()
        .copied()
        .fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

pub fn cmd_kahler_check(run: &RunConfig, seed: u64, _out: &Path) -> Result<Report, CliError> {
    let k = &run.kahler_check;
    let mut rng = seeded(seed);
    let mut records = Vec::new();

    for &n in &k.sizes {
        let cfg = geometry(run.alpha, n)?;
        let (mut adm, mut compat, mut herm, mut cs, mut flat, mut pull) =
            (vec![], vec![], vec![], vec![], vec![], vec![]);
        let mut min_mixed = f64::INFINITY;
        let mut min_eig = f64::INFINITY;
        for _ in 0..k.samples_per_size {
            let p = random_interior_probability(n, k.probability_floor, &mut rng);
            let a =
                random_admissible_extension(&p, &cfg, rng.random(), k.extension_scale).map_err(CliError::from_lib)?;
            adm.push(a.admissibility_residual(&p, &cfg).map_err(CliError::from_lib)?);
            let mut triple = build_kahler_family(&p, &a, &cfg).map_err(CliError::from_lib)?;
            if k.inject_j_fault {
                let mut lower = triple.j.view_mut((n, 0), (n, n));
                lower.neg_mut();
            }
            let r = kahler_residuals(&triple).map_err(CliError::from_lib)?;
            compat.push(r.compatibility);
            herm.push(r.hermiticity);
            cs.push(r.complex_structure);
            min_mixed = min_mixed.min(mixed_block_norm(&triple.g));
            min_eig = min_eig.min(min_eigenvalue(&triple.g));

            let flat_triple = crate::kahler::flat_triple(&p, &cfg).map_err(CliError::from_lib)?;
            flat.push(kahler_residuals(&flat_triple).map_err(CliError::from_lib)?.max());

            let pt = PhasePoint::new(p, random_phases(n, 2.0, &mut rng)).map_err(CliError::from_lib)?;
            pull.push(pullback_check(&pt, &cfg).map_err(CliError::from_lib)?.deviation);
        }
        let tag = format!("n={n:02}");
        records.push(Record::below(
            format!("kahler/{tag}/admissibility"),
            "G A G^-1 = A^T",
            max_of(&adm),
            k.admissibility_tolerance,
        ));
        records.push(Record::below(
            format!("kahler/{tag}/compatibility"),
            "Omega = g J",
            max_of(&compat),
            k.tolerance,
        ));
        records.push(Record::below(
            format!("kahler/{tag}/hermiticity"),
            "J^T g J = g",
            max_of(&herm),
            k.tolerance,
        ));
        records.push(Record::below(
            format!("kahler/{tag}/complex-structure"),
            "J^2 = -I",
            max_of(&cs),
            k.tolerance,
        ));
        records.push(Record::below(
            format!("kahler/{tag}/flat-triple"),
            "Kahler conditions at A = 0",
            max_of(&flat),
            k.tolerance,
        ));
        if k.samples_per_size > 0 {
            records.push(Record::above(
                format!("kahler/{tag}/mixed-block"),
                "dP dS block of g nonzero for A != 0",
                min_mixed,
                k.mixed_block_threshold,
            ));
            records.push(Record::above(
                format!("kahler/{tag}/positive-definite"),
                "smallest eigenvalue of g positive",
                min_eig,
                0.0,
            ));
        }
        records.push(Record::below(
            format!("pullback/{tag}"),
            "Madelung pullback of flat complex tensors",
            max_of(&pull),
            k.tolerance,
        ));
    }

    for &n in &k.curvature_sizes {
        let cfg = geometry(run.alpha, n)?;
        let field = flat_metric_field(&cfg);
        let mut worst = Vec::new();
        for _ in 0..k.curvature_points {
            let p = random_interior_probability(n, 0.05, &mut rng);
            let z: Vec<f64> = p
                .as_slice()
                .iter()
                .copied()
                .chain(random_phases(n, 2.0, &mut rng))
                .collect();
            worst.push(
                riemann_curvature_with_steps(&field, &z, &phase_chart_steps(&z, &cfg)).map_err(CliError::from_lib)?,
            );
        }
        records.push(Record::below(
            format!("curvature/flat/n={n:02}"),
            "zero curvature of the flat extension",
            max_of(&worst),
            k.curvature_tolerance,
        ));
    }

    let base = GeometryConfig::default();
    for radius in [0.5, 1.0, 3.0] {
        let field = round_sphere(radius);
        let center = [1.1, 0.4];
        let tensor = riemann_tensor(&field, &center, &[base.curvature_step; 2]).map_err(CliError::from_lib)?;
        let g = field(&center).map_err(CliError::from_lib)?;
        let err = tensor.sectional(&g, 0, 1) - 1.0 / (radius * radius);
        records.push(Record::below(
            format!("curvature/sphere/r={radius}"),
            "sectional curvature 1/r^2",
            err,
            k.sphere_tolerance,
        ));
    }

    let cfg = geometry(run.alpha, 3)?;
    let specs = [
        ("euclidean", SphericalMetricSpec::euclidean()),
        ("warped", SphericalMetricSpec::new(|r| 1.0 + r * r, |r| 0.5 * r.cos())),
    ];
    for (name, spec) in specs {
        let mut worst: f64 = 0.0;
        for _ in 0..5 {
            let p = random_interior_probability(3, k.probability_floor, &mut rng);
            let pt = PhasePoint::new(p, random_phases(3, 2.0, &mut rng)).map_err(CliError::from_lib)?;
            worst = worst.max(spherical_line_element(&spec, &pt, &cfg).map_err(CliError::from_lib)?.1);
        }
        records.push(Record::new(
            format!("spherical/{name}/mixed-block"),
            "dP dS block vanishes for spherical metrics",
            worst,
            0.0,
            Criterion::Within { lower: 0.0 },
        ));
    }

    Ok(Report::new("kahler-check", seed, run.alpha, records, Vec::new()))
}

fn state_from(name: &str, v: &[ComplexPair]) -> Result<WaveVector, CliError> {
    let psi = wave_vector(name, v)?;
    psi.require_normalized()
        .map_err(|e| CliError::Config(format!("{name}: {e}")))?;
    Ok(psi)
}

pub fn cmd_evolve(run: &RunConfig, seed: u64, out: &Path) -> Result<Report, CliError> {
    let e = &run.evolve;
    let m = complex_matrix("evolve.m", e.m.as_ref().expect("validated"))?;
    let n = m.nrows();
    let cfg = geometry(run.alpha, n)?;
    let nmat = match &e.nmat {
        Some(rows) => complex_matrix("evolve.nmat", rows)?,
        None => DMatrix::from_element(n, n, Complex64::new(0.0, 0.0)),
    };
    if nmat.nrows() != n {
        return Err(CliError::Config(format!("evolve.nmat must be {n}x{n}")));
    }
    let psi0 = match &e.psi0 {
        Some(v) => state_from("evolve.psi0", v)?,
        None => WaveVector::basis(n, 0),
    };
    let reference = e
        .reference
        .as_deref()
        .map(|v| state_from("evolve.reference", v))
        .transpose()?;
    for (name, v) in [("evolve.psi0", Some(&psi0)), ("evolve.reference", reference.as_ref())] {
        if let Some(v) = v {
            if v.len() != n {
                return Err(CliError::Config(format!("{name} has length {}, expected {n}", v.len())));
            }
        }
    }

    let energy = e.energy;
    let h = match QuadraticHamiltonian::new(m.clone(), nmat.clone()) {
        Ok(h) => h.with_energy(move |_| energy),
        Err(err @ (Error::Hermitian(_) | Error::Symmetric(_))) => {
            let record = Record::failed(
                "hamiltonian/structure",
                "M Hermitian, N symmetric",
                1e-14,
                err.to_string(),
            );
            return Ok(Report::new("evolve", seed, run.alpha, vec![record], Vec::new()));
        }
        Err(err) => return Err(CliError::from_lib(err)),
    };
    let has_pairing = nmat.iter().any(|z| z.norm() != 0.0);
    let dt = e.t_final / e.steps as f64;

    let mut records = Vec::new();
    let traj = match e.method {
        EvolveMethod::Exact => {
            if has_pairing {
                return Err(CliError::Config(
                    "the exact propagator needs nmat = 0; use the symplectic method".into(),
                ));
            }
            let defect = unitarity_check(&m, e.t_final, &cfg).map_err(CliError::from_lib)?;
            records.push(Record::below("unitarity", "U^H U = I", defect, 1e-12));
            evolve_exact_trajectory(&m, &psi0, reference.as_ref(), dt, e.steps, &cfg).map_err(CliError::from_lib)?
        }
        EvolveMethod::Symplectic => {
            let pt0 = inverse_madelung(&psi0, &cfg).map_err(CliError::from_lib)?;
            match evolve_symplectic_with_reference(&h, &pt0, reference.as_ref(), dt, e.steps, &cfg) {
                Ok(traj) => traj,
                Err(err @ Error::Nonconvergence { .. }) => {
                    records.push(Record::failed(
                        "integrator/convergence",
                        "implicit midpoint solve",
                        1e-13,
                        err.to_string(),
                    ));
                    return Ok(Report::new("evolve", seed, run.alpha, records, Vec::new()));
                }
                Err(err) => return Err(CliError::from_lib(err)),
            }
        }
    };

    let report = conservation_report(&traj, &h).map_err(CliError::from_lib)?;
    records.push(Record::below(
        "conservation/norm",
        "sum |psi|^2 = 1",
        report.norm_drift,
        e.tolerance,
    ));
    records.push(Record::below(
        "conservation/energy",
        "H constant along the flow",
        report.energy_drift,
        e.tolerance,
    ));
    if let Some(drift) = report.dirac_drift {
        records.push(Record::below(
            "conservation/dirac-product",
            "<ref|psi> constant",
            drift,
            e.tolerance,
        ));
    }
    if let Some(refs) = &traj.reference {
        records.push(distance_drift_record(&traj, refs, &cfg, e.tolerance));
    }

    let path = out.join("trajectory.csv");
    write_trajectory(&traj, &h, &cfg, &path)?;
    Ok(Report::new(
        "evolve",
        seed,
        run.alpha,
        records,
        vec![path.display().to_string()],
    ))
}

fn distance_drift_record(traj: &Trajectory, refs: &[WaveVector], cfg: &GeometryConfig, tol: f64) -> Record {
    let name = "conservation/wave-distance";
    let relation = "wave distance between co-evolved states constant";
    let distances: Result<Vec<f64>, Error> = refs
        .iter()
        .zip(&traj.states)
        .map(|(r, psi)| quantum_statistical_distance(r, psi, cfg))
        .collect();
    match distances {
        Ok(d) => Record::below(
            name,
            relation,
            d.iter().fold(0.0f64, |m, x| m.max((x - d[0]).abs())),
            tol,
        ),
        Err(err) => Record::failed(name, relation, tol, err.to_string()),
    }
}

fn write_trajectory(
    traj: &Trajectory,
    h: &QuadraticHamiltonian,
    cfg: &GeometryConfig,
    path: &Path,
) -> Result<(), CliError> {
    let n = h.dim();
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    for prefix in ["P", "S", "re_psi", "im_psi"] {
        header.extend((1..=n).map(|i| format!("{prefix}{i}")));
    }
    header.extend(["norm".to_string(), "energy".to_string()]);
    write_row(&mut w, path, &header)?;
    for (k, (&t, psi)) in traj.times.iter().zip(&traj.states).enumerate() {
        let (p, s) = traj.raw_phase(k, cfg);
        let mut row = vec![full_precision(t)];
        row.extend(p.iter().chain(&s).map(|v| full_precision(*v)));
        row.extend(psi.as_slice().iter().map(|z| full_precision(z.re)));
        row.extend(psi.as_slice().iter().map(|z| full_precision(z.im)));
        row.push(full_precision(psi.norm_sqr()));
        row.push(full_precision(
            hamiltonian_value(h, psi, t).map_err(CliError::from_lib)?,
        ));
        write_row(&mut w, path, &row)?;
    }
    finish(w, path).map(|_| ())
}

pub fn cmd_oracle(run: &RunConfig, seed: u64, out: &Path) -> Result<Report, CliError> {
    let o = &run.oracle;
    let cfg = geometry(run.alpha, o.n)?;
    let mut rng = seeded(seed);
    let mut cases: Vec<(String, ProbabilityVector, ProbabilityVector)> = Vec::new();
    for k in 0..o.pairs {
        let a = random_interior_probability(o.n, o.probability_floor, &mut rng);
        let b = random_interior_probability(o.n, o.probability_floor, &mut rng);
        cases.push((format!("random-{k:02}"), a, b));
    }
    if o.include_fixtures {
        let nudge = 1e-6;
        cases.push((
            "antipodal".into(),
            ProbabilityVector::nudged_basis(o.n, 0, nudge),
            ProbabilityVector::nudged_basis(o.n, 1, nudge),
        ));
        let p = random_interior_probability(o.n, o.probability_floor, &mut rng);
        cases.push(("identical".into(), p.clone(), p));
    }

    let path = out.join("oracle.csv");
    let mut w = csv_writer(&path)?;
    write_row(
        &mut w,
        &path,
        &["pair", "n", "alpha", "closed_form", "oracle", "gap", "iterations"].map(String::from),
    )?;
    let mut records = Vec::new();
    let relation = "minimized path length = closed-form statistical distance";
    for (id, a, b) in cases {
        let name = format!("oracle/{id}");
        let exact = statistical_distance(&a, &b, &cfg).map_err(CliError::from_lib)?;
        let oracle = GeodesicOracle::new(o.segments, o.iterations, rng.random()).map_err(CliError::from_lib)?;
        match oracle.run(&a, &b, &cfg) {
            Ok(outcome) => {
                let gap = outcome.length - exact;
                records.push(Record::new(
                    name,
                    relation,
                    gap,
                    o.gap_upper,
                    Criterion::Within { lower: o.gap_lower },
                ));
                write_row(
                    &mut w,
                    &path,
                    &[
                        id,
                        o.n.to_string(),
                        full_precision(run.alpha),
                        full_precision(exact),
                        full_precision(outcome.length),
                        full_precision(gap),
                        outcome.iterations.to_string(),
                    ],
                )?;
            }
            Err(err) => records.push(Record::failed(name, relation, o.gap_upper, err.to_string())),
        }
    }
    let outputs = vec![finish(w, &path)?];
    Ok(Report::new("oracle", seed, run.alpha, records, outputs))
}
