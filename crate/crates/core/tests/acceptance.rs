//! Acceptance suite. Prints one PASS/FAIL line per criterion, with indented
//! detail lines for the individual gates, and exits nonzero if any fails.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::time::Instant;

use heatforms::estimators::{run_batch, EstimatorKind, EstimatorRequest, QueryOutcome, RunOptions};
use heatforms::forms::lookup;
use heatforms::record::EstimateRecord;
use heatforms::stats::combined_std_error;
use heatforms::transport::IntegratorConfig;
use heatforms::validation::{self, Check, ValidationOptions, SPHERE_POINT};
use heatforms::{ManifoldModel, MultiVector, Result};

const SEED: u64 = 0;
const STEP: f64 = 1e-3;
const N: usize = 200_000;
const N_LAPLACIAN: usize = 500_000;
const N_EXACT: usize = 10_000;
const N_BOUNDS: usize = 20_000;

struct Verdict {
    pass: bool,
    summary: String,
}

fn detail(line: String) {
    println!("    {line}");
    std::io::stdout().flush().ok();
}

fn request(
    kind: EstimatorKind,
    model: ManifoldModel,
    form: &str,
    angles: &[f64],
    v0: MultiVector,
    t: f64,
    n_paths: usize,
    window: Option<(f64, f64)>,
) -> EstimatorRequest {
    EstimatorRequest {
        kind,
        model,
        form: lookup(&model, form).expect("catalog form"),
        x0: model.embed(angles).expect("valid chart point"),
        v0,
        t,
        config: IntegratorConfig {
            step: STEP,
            ..Default::default()
        },
        n_paths,
        seed: SEED,
        window,
    }
}

/// Runs requests that share one path stream.
fn batch(requests: &[EstimatorRequest], threads: Option<usize>, retain: bool) -> Result<Vec<QueryOutcome>> {
    let queries: Vec<_> = requests.iter().map(|r| r.query()).collect();
    run_batch(
        &requests[0].path_spec(),
        &queries,
        &RunOptions {
            threads,
            retain_samples: retain,
        },
    )
}

fn e(n: usize, idx: &[usize]) -> MultiVector {
    MultiVector::basis(n, idx).expect("basis index")
}

fn oracle_gate(label: &str, req: &EstimatorRequest, out: &QueryOutcome) -> bool {
    let oracle = req.oracle().expect("oracle available");
    let (mean, se) = (out.estimate.mean, out.estimate.std_error);
    let pass = (mean - oracle).abs() <= 3.0 * se;
    detail(format!(
        "{} {label}: mean={mean:.6} oracle={oracle:.6} se={se:.2e} z={:+.2} N={}",
        if pass { "ok  " } else { "MISS" },
        (mean - oracle) / se,
        out.estimate.n_paths
    ));
    pass
}

fn check_line(c: &Check) -> bool {
    detail(format!(
        "{} {}: estimate={:.6e} reference={} se={} z={}",
        if c.pass { "ok  " } else { "MISS" },
        c.name,
        c.estimate,
        c.oracle.map_or("-".into(), |o| format!("{o:.6e}")),
        c.std_error.map_or("-".into(), |s| format!("{s:.2e}")),
        c.z_score.map_or("-".into(), |z| format!("{z:+.2}")),
    ));
    c.pass
}

fn max_path_gap(a: &QueryOutcome, b: &QueryOutcome) -> f64 {
    let (a, b) = (a.samples.as_ref().unwrap(), b.samples.as_ref().unwrap());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1.0))
        .fold(0.0, f64::max)
}

struct TorusBatches {
    a_requests: Vec<EstimatorRequest>,
    a: Vec<QueryOutcome>,
    b_requests: Vec<EstimatorRequest>,
    b: Vec<QueryOutcome>,
}

fn torus_batches() -> Result<TorusBatches> {
    let torus = ManifoldModel::FlatTorus2;
    let at_a = [FRAC_PI_2, 0.0];
    let at_b = [0.0, 0.0];
    let a_requests = vec![
        request(EstimatorKind::D, torus, "cos1", &at_a, e(2, &[0]), 1.0, N, None),
        request(EstimatorKind::Laplacian, torus, "sin1_d1", &at_a, e(2, &[0]), 1.0, N_LAPLACIAN, None),
        request(EstimatorKind::D, torus, "cos1", &at_a, e(2, &[0]), 1.0, N, Some((0.5, 0.5))),
    ];
    let b_requests = vec![
        request(EstimatorKind::D, torus, "sin2_d1", &at_b, e(2, &[0, 1]), 1.0, N, None),
        request(EstimatorKind::Dstar, torus, "sin1_d1", &at_b, MultiVector::scalar(2, 1.0), 1.0, N, None),
        request(EstimatorKind::Pt, torus, "cos1", &at_b, MultiVector::scalar(2, 1.0), 1.0, N, None),
        request(EstimatorKind::D, torus, "sin2_d1", &at_b, e(2, &[0, 1]), 1.0, N, Some((0.5, 0.5))),
    ];
    let a = batch(&a_requests, None, false)?;
    let b = batch(&b_requests, None, false)?;
    Ok(TorusBatches {
        a_requests,
        a,
        b_requests,
        b,
    })
}

fn criterion_1() -> Result<Verdict> {
    let checks = validation::algebra(&ValidationOptions {
        cases: 1000,
        seed: SEED,
        ..Default::default()
    });
    let worst = checks.iter().map(|c| c.estimate).fold(0.0, f64::max);
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    for c in &failed {
        check_line(c);
    }
    Ok(Verdict {
        pass: failed.is_empty(),
        summary: format!("{} algebra checks for n=2..6, worst error {worst:.1e} (tolerance 1e-12)", checks.len()),
    })
}

fn criterion_2() -> Result<Verdict> {
    let checks = validation::transport(&ValidationOptions {
        seed: SEED,
        ..Default::default()
    })?;
    let mut pass = true;
    for c in &checks {
        pass &= check_line(c);
    }
    Ok(Verdict {
        pass,
        summary: format!("{} transport checks (isometry, damping order, flat triviality)", checks.len()),
    })
}

fn criterion_3(t: &TorusBatches) -> Verdict {
    let mut pass = true;
    pass &= oracle_gate("d cos1 at (pi/2,0), V0=e1", &t.a_requests[0], &t.a[0]);
    pass &= oracle_gate("d sin2_d1 at (0,0), V0=e12", &t.b_requests[0], &t.b[0]);
    pass &= oracle_gate("dstar sin1_d1 at (0,0), V0=1", &t.b_requests[1], &t.b[1]);
    pass &= oracle_gate("laplacian sin1_d1 at (pi/2,0), V0=e1", &t.a_requests[1], &t.a[1]);
    pass &= oracle_gate("pt cos1 at (0,0)", &t.b_requests[2], &t.b[2]);
    Verdict {
        pass,
        summary: "five flat-torus oracle gates at 3 SE".into(),
    }
}

fn criterion_4_and_5a() -> Result<(Verdict, Check)> {
    let checks = validation::commutation(&ValidationOptions {
        n_paths: N,
        step: STEP,
        seed: SEED,
        ..Default::default()
    })?;
    let mut pass = true;
    for c in &checks[..4] {
        pass &= check_line(c);
    }
    Ok((
        Verdict {
            pass,
            summary: "sphere2 commutation pairs for z dx at 3 combined SE".into(),
        },
        checks[4].clone(),
    ))
}

fn criterion_5(sphere: &Check) -> Result<Verdict> {
    let mut pass = check_line(sphere);
    let torus = ManifoldModel::FlatTorus2;
    for (form, angles, v0) in [("cos1", [FRAC_PI_2, 0.0], e(2, &[0])), ("sin2_d1", [0.0, 0.0], e(2, &[0, 1]))] {
        let reqs = [
            request(EstimatorKind::D, torus, form, &angles, v0.clone(), 1.0, N_EXACT, None),
            request(EstimatorKind::FlowD, torus, form, &angles, v0, 1.0, N_EXACT, None),
        ];
        let out = batch(&reqs, None, true)?;
        let gap = max_path_gap(&out[0], &out[1]);
        let exact = gap <= 1e-12;
        let se = combined_std_error(out[0].estimate.std_error, out[1].estimate.std_error);
        detail(format!(
            "{} torus {form} flow-d vs d path by path: max relative gap {gap:.3e} (tolerance 1e-12); means {:.6} vs {:.6}, combined se {se:.2e}",
            if exact { "ok  " } else { "MISS" },
            out[1].estimate.mean,
            out[0].estimate.mean,
        ));
        pass &= exact;
    }
    Ok(Verdict {
        pass,
        summary: "flow-d vs d: sphere2 at 3 combined SE, flat torus path by path".into(),
    })
}

fn criterion_6(t: &TorusBatches) -> Verdict {
    let a = Check::paired("window", "d cos1 window (t/2,t/2) vs full", &t.a[2], &t.a[0], 3.0);
    let b = Check::paired("window", "d sin2_d1 window (t/2,t/2) vs full", &t.b[3], &t.b[0], 3.0);
    let pass = check_line(&a) & check_line(&b);
    Verdict {
        pass,
        summary: "windowed vs full-interval d on the torus d gates".into(),
    }
}

fn criterion_7() -> Result<Verdict> {
    let v0 = MultiVector::vector(&[0.6, -0.8])?;
    let mut pass = true;
    for (model, form, angles) in [
        (ManifoldModel::FlatTorus2, "cos1", vec![FRAC_PI_2, 0.0]),
        (ManifoldModel::Sphere { n: 2 }, "z", SPHERE_POINT.to_vec()),
    ] {
        let reqs = [
            request(EstimatorKind::D, model, form, &angles, v0.clone(), 1.0, N_EXACT, None),
            request(EstimatorKind::BismutFunction, model, form, &angles, v0.clone(), 1.0, N_EXACT, None),
        ];
        let out = batch(&reqs, None, true)?;
        let gap = max_path_gap(&out[0], &out[1]);
        let ok = gap <= 1e-12;
        detail(format!(
            "{} {} {form}: max relative gap {gap:.3e} over {N_EXACT} paths",
            if ok { "ok  " } else { "MISS" },
            model.name()
        ));
        pass &= ok;
    }
    Ok(Verdict {
        pass,
        summary: "d at q=0 equals the function formula path by path".into(),
    })
}

fn criterion_8() -> Result<Verdict> {
    let mut pass = true;
    for (model, form, angles, v0) in [
        (ManifoldModel::FlatTorus2, "cos1", vec![FRAC_PI_2, 0.0], e(2, &[0])),
        (ManifoldModel::Sphere { n: 2 }, "z_dx", SPHERE_POINT.to_vec(), e(2, &[0, 1])),
    ] {
        let n = model.intrinsic_dim() as f64;
        // Both shipped models have nonnegative Weitzenbock curvature, so the
        // exponential factor of the ansatz is 1.
        let rho = 0.0f64;
        let mut constants = Vec::new();
        for t in [0.5, 1.0, 2.0] {
            let req = request(EstimatorKind::D, model, form, &angles, v0.clone(), t, N_BOUNDS, None);
            let out = batch(std::slice::from_ref(&req), None, false)?.remove(0);
            let b = &out.bound;
            let c = b.mean_bound / (b.sup_norm * (n / t).sqrt() * (rho * t / 2.0).exp());
            let ok = b.violations == 0 && out.estimate.mean.abs() <= b.mean_bound;
            detail(format!(
                "{} {} {form} t={t}: |mean|={:.4} bound={:.4} per-sample violations={} c(t)={c:.4}",
                if ok { "ok  " } else { "MISS" },
                model.name(),
                out.estimate.mean.abs(),
                b.mean_bound,
                b.violations
            ));
            pass &= ok;
            constants.push(c);
        }
        let spread = constants.iter().cloned().fold(0.0, f64::max) / constants.iter().cloned().fold(f64::INFINITY, f64::min);
        let ok = spread < 2.0;
        detail(format!(
            "{} {} {form}: scaling constant spread {spread:.3} (must be < 2)",
            if ok { "ok  " } else { "MISS" },
            model.name()
        ));
        pass &= ok;
    }
    Ok(Verdict {
        pass,
        summary: "Cauchy-Schwarz bounds and sqrt(n/t) scaling for t in {0.5, 1, 2}".into(),
    })
}

fn records(requests: &[EstimatorRequest], outcomes: &[QueryOutcome]) -> Vec<String> {
    requests
        .iter()
        .zip(outcomes)
        .map(|(r, o)| EstimateRecord::new(r, &o.estimate, false).to_json())
        .collect()
}

fn criterion_9(t: &TorusBatches) -> Result<Verdict> {
    let first = records(&t.b_requests, &t.b);
    let rerun = batch(&t.b_requests, Some(3), false)?;
    let second = records(&t.b_requests, &rerun);
    let pass = first == second;
    detail(format!(
        "{} torus (0,0) gates re-run on 3 threads: {} of {} JSON records byte-identical",
        if pass { "ok  " } else { "MISS" },
        first.iter().zip(&second).filter(|(a, b)| a == b).count(),
        first.len()
    ));
    Ok(Verdict {
        pass,
        summary: "same seed gives byte-identical JSON independent of thread count".into(),
    })
}

fn report(id: &str, started: Instant, verdict: Result<Verdict>) -> bool {
    let (pass, summary) = match verdict {
        Ok(v) => (v.pass, v.summary),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "{} criterion {id}: {summary} [{:.0}s]",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    std::io::stdout().flush().ok();
    pass
}

fn main() {
    let mut results = Vec::new();
    let clock = Instant::now();
    results.push(report("1", clock, criterion_1()));
    let clock = Instant::now();
    results.push(report("2", clock, criterion_2()));

    let clock = Instant::now();
    match torus_batches() {
        Ok(torus) => {
            results.push(report("3", clock, Ok(criterion_3(&torus))));
            let clock = Instant::now();
            let sphere = criterion_4_and_5a();
            let sphere_filter = sphere.as_ref().ok().map(|(_, c)| c.clone());
            results.push(report("4", clock, sphere.map(|(v, _)| v)));
            let clock = Instant::now();
            results.push(report(
                "5",
                clock,
                match sphere_filter {
                    Some(c) => criterion_5(&c),
                    None => Err(heatforms::Error::Internal("sphere batch failed".into())),
                },
            ));
            results.push(report("6", Instant::now(), Ok(criterion_6(&torus))));
            let clock = Instant::now();
            results.push(report("7", clock, criterion_7()));
            let clock = Instant::now();
            results.push(report("8", clock, criterion_8()));
            let clock = Instant::now();
            results.push(report("9", clock, criterion_9(&torus)));
        }
        Err(e) => {
            for id in ["3", "4", "5", "6", "7", "8", "9"] {
                results.push(report(id, clock, Err(heatforms::Error::Internal(format!("torus batch failed: {e}")))));
            }
        }
    }
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
