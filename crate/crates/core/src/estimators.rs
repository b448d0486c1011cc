//! Monte Carlo estimators of `P_t φ`, `dP_t φ`, `d*P_t φ` and `ΔP_t φ`.
//!
//! Several queries can share one path stream ([`run_batch`]), which gives
//! common random numbers for cross-estimator comparisons. Paths are processed
//! in fixed chunks whose statistics are merged in chunk order, so results do
//! not depend on the number of threads.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{binomial, minor_matrix, tables, MultiVector, Tables};
use crate::forms::FormField;
use crate::geometry::ManifoldModel;
use crate::oracles::{reference_value, Quantity};
use crate::stats::Welford;
use crate::transport::{path_rng, IntegratorConfig, PathObserver, PathSimulator, PathView};

/// Paths per work unit.
pub const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EstimatorKind {
    /// `E φ(W_t V0)`.
    Pt,
    /// Damped-transport formula for `dP_t φ`, optionally windowed.
    D,
    /// Formula for `d*P_t φ`.
    Dstar,
    /// Two-half formula for `ΔP_t φ`.
    Laplacian,
    /// Derivative-flow formula for `dP_t φ`.
    FlowD,
    /// `(1/t) E f(x_t) ∫⟨W_s v0, dB̆_s⟩` for functions.
    BismutFunction,
}

impl EstimatorKind {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "pt" => EstimatorKind::Pt,
            "d" => EstimatorKind::D,
            "dstar" => EstimatorKind::Dstar,
            "laplacian" => EstimatorKind::Laplacian,
            "flow-d" => EstimatorKind::FlowD,
            "bismut-fn" => EstimatorKind::BismutFunction,
            other => return Err(Error::invalid(format!("unknown estimator '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Pt => "pt",
            EstimatorKind::D => "d",
            EstimatorKind::Dstar => "dstar",
            EstimatorKind::Laplacian => "laplacian",
            EstimatorKind::FlowD => "flow-d",
            EstimatorKind::BismutFunction => "bismut-fn",
        }
    }

    /// Degree of the test multivector for a form of degree `q`.
    pub fn v0_degree(&self, q: i32) -> i32 {
        match self {
            EstimatorKind::Pt | EstimatorKind::Laplacian => q,
            EstimatorKind::D | EstimatorKind::FlowD | EstimatorKind::BismutFunction => q + 1,
            EstimatorKind::Dstar => q - 1,
        }
    }

    pub fn quantity(&self) -> Quantity {
        match self {
            EstimatorKind::Pt => Quantity::Heat,
            EstimatorKind::D | EstimatorKind::FlowD | EstimatorKind::BismutFunction => Quantity::Derivative,
            EstimatorKind::Dstar => Quantity::Codifferential,
            EstimatorKind::Laplacian => Quantity::Laplacian,
        }
    }

    pub fn allows_window(&self) -> bool {
        matches!(self, EstimatorKind::D | EstimatorKind::FlowD)
    }
}

/// One estimator evaluated on a shared path stream.
#[derive(Debug, Clone)]
pub struct Query {
    pub kind: EstimatorKind,
    pub form: Arc<dyn FormField>,
    /// Test multivector in initial-frame coordinates.
    pub v0: MultiVector,
    /// `(δ, h′)`; `None` means the full interval.
    pub window: Option<(f64, f64)>,
    /// Uses the first `n_paths` paths of the stream.
    pub n_paths: usize,
}

/// Path stream shared by a batch of queries.
#[derive(Debug, Clone)]
pub struct PathSpec {
    pub model: ManifoldModel,
    pub x0: Vec<f64>,
    pub t: f64,
    pub config: IntegratorConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Keep every per-path sample.
    pub retain_samples: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub step: f64,
    pub t: f64,
    pub window: Option<(f64, f64)>,
    pub seed: u64,
    pub wall_time_s: f64,
}

/// Cauchy–Schwarz bound data: for every sample,
/// `|sample| ≤ prefactor · sup|φ| · |W_t S|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSummary {
    pub sup_norm: f64,
    /// Mean of `prefactor · sup|φ| · |W_t S|`.
    pub mean_bound: f64,
    /// Mean of `|sample|`.
    pub mean_abs: f64,
    /// Samples exceeding their own bound (beyond rounding).
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub estimate: Estimate,
    pub bound: BoundSummary,
    pub samples: Option<Vec<f64>>,
}

/// Per-query, per-path accumulator.
struct QueryState {
    kind: EstimatorKind,
    form: Arc<dyn FormField>,
    q: i32,
    v0: Vec<f64>,
    window: (usize, usize),
    half: usize,
    t: f64,
    window_len: f64,
    sup: f64,
    active: bool,
    s: Vec<f64>,
    a: Vec<f64>,
    c: Vec<f64>,
    flow_a: Vec<f64>,
    scratch: [Vec<f64>; 6],
    value: f64,
    bound: f64,
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl QueryState {
    fn new(query: &Query, n: usize, steps: usize, h: f64, t: f64) -> Self {
        let q = query.form.degree();
        let size = |d: i32| binomial(n, d);
        let widest = (0..=n as i32).map(size).max().unwrap_or(1);
        let (k0, k1) = match query.window {
            None => (0, steps),
            Some((delta, len)) => ((delta / h).round() as usize, ((delta + len) / h).round() as usize),
        };
        let s_degree = match query.kind {
            EstimatorKind::BismutFunction => 0,
            _ => q,
        };
        QueryState {
            kind: query.kind,
            form: query.form.clone(),
            q,
            v0: query.v0.coeffs().to_vec(),
            window: (k0, k1),
            half: steps / 2,
            t,
            window_len: (k1 - k0) as f64 * h,
            sup: query.form.sup_norm(),
            active: true,
            s: vec![0.0; size(s_degree)],
            a: vec![0.0; size(q + 1)],
            c: vec![0.0; size(q - 1)],
            flow_a: vec![0.0; n],
            scratch: std::array::from_fn(|_| vec![0.0; widest]),
            value: 0.0,
            bound: 0.0,
        }
    }

    fn reset(&mut self) {
        self.s.iter_mut().for_each(|v| *v = 0.0);
        self.a.iter_mut().for_each(|v| *v = 0.0);
        self.c.iter_mut().for_each(|v| *v = 0.0);
        self.flow_a.iter_mut().for_each(|v| *v = 0.0);
    }

    fn step(&mut self, view: &PathView<'_>, tb: &Tables) {
        let q = self.q;
        let b = view.increment;
        let k = view.k;
        let n = tb.dim();
        let sz = |d: i32| binomial(n, d);
        let [t1, t2, t3, t4, t5, t6] = &mut self.scratch;
        match self.kind {
            EstimatorKind::Pt => {}
            EstimatorKind::D => {
                if k >= self.window.0 && k < self.window.1 {
                    let (t1, t2, t3) = (&mut t1[..sz(q + 1)], &mut t2[..sz(q)], &mut t3[..sz(q)]);
                    view.damp(q + 1, &self.v0, t1);
                    tb.interior_into(b, t1, q + 1, t2);
                    view.undamp(q, t2, t3);
                    add_into(&mut self.s, t3);
                }
            }
            EstimatorKind::Dstar => {
                let (t1, t2, t3) = (&mut t1[..sz(q - 1)], &mut t2[..sz(q)], &mut t3[..sz(q)]);
                view.damp(q - 1, &self.v0, t1);
                tb.wedge_vector_into(b, t1, q - 1, t2);
                view.undamp(q, t2, t3);
                add_into(&mut self.s, t3);
            }
            EstimatorKind::Laplacian => {
                if k < self.half {
                    let t1 = &mut t1[..sz(q)];
                    view.damp(q, &self.v0, t1);
                    let (t2, t3) = (&mut t2[..sz(q + 1)], &mut t3[..sz(q + 1)]);
                    tb.wedge_vector_into(b, t1, q, t2);
                    view.undamp(q + 1, t2, t3);
                    add_into(&mut self.a, t3);
                    let (t4, t5) = (&mut t4[..sz(q - 1)], &mut t5[..sz(q - 1)]);
                    tb.interior_into(b, t1, q, t4);
                    view.undamp(q - 1, t4, t5);
                    add_into(&mut self.c, t5);
                } else {
                    let (t1, t2) = (&mut t1[..sz(q + 1)], &mut t2[..sz(q)]);
                    view.damp(q + 1, &self.a, t1);
                    tb.interior_into(b, t1, q + 1, t2);
                    let (t3, t4) = (&mut t3[..sz(q - 1)], &mut t4[..sz(q)]);
                    view.damp(q - 1, &self.c, t3);
                    tb.wedge_vector_into(b, t3, q - 1, t4);
                    add_into(t2, t4);
                    let t6 = &mut t6[..sz(q)];
                    view.undamp(q, t2, t6);
                    add_into(&mut self.s, t6);
                }
            }
            EstimatorKind::FlowD => {
                if k >= self.window.0 && k < self.window.1 {
                    let flow = view.flow.expect("flow tracked");
                    let m = view.x.len();
                    for (j, a) in self.flow_a.iter_mut().enumerate() {
                        *a += dot(&flow[j * m..(j + 1) * m], view.tangent);
                    }
                }
            }
            EstimatorKind::BismutFunction => {
                let t1 = &mut t1[..n];
                view.damp(1, &self.v0, t1);
                self.s[0] += dot(b, t1);
            }
        }
    }

    fn finish(&mut self, view: &PathView<'_>, tb: &Tables) -> Result<()> {
        let q = self.q;
        let n = tb.dim();
        let frame = view.frame();
        let sz = binomial(n, q);
        let (prefactor, vector): (f64, Vec<f64>) = match self.kind {
            EstimatorKind::Pt => {
                let mut v = vec![0.0; sz];
                view.damp(q, &self.v0, &mut v);
                (1.0, v)
            }
            EstimatorKind::D => {
                let mut v = vec![0.0; sz];
                view.damp(q, &self.s, &mut v);
                (1.0 / self.window_len, v)
            }
            EstimatorKind::Dstar => {
                let mut v = vec![0.0; sz];
                view.damp(q, &self.s, &mut v);
                (-1.0 / self.t, v)
            }
            EstimatorKind::Laplacian => {
                let mut v = vec![0.0; sz];
                view.damp(q, &self.s, &mut v);
                (4.0 / (self.t * self.t), v)
            }
            EstimatorKind::FlowD => {
                let mut inner = vec![0.0; sz];
                tb.interior_into(&self.flow_a, &self.v0, q + 1, &mut inner);
                let flow = view.flow_in_frame().expect("flow tracked");
                let lambda = minor_matrix(&flow, q)?;
                let v = (&lambda * nalgebra::DVector::from_column_slice(&inner)).as_slice().to_vec();
                (1.0 / self.window_len, v)
            }
            EstimatorKind::BismutFunction => (self.s[0] / self.t, vec![1.0]),
        };
        let mv = MultiVector::from_coeffs(n, q, vector)?;
        self.value = prefactor * self.form.evaluate(view.x, &frame, &mv);
        self.bound = prefactor.abs() * self.sup * mv.norm();
        Ok(())
    }
}

struct BatchObserver<'a> {
    tables: &'a Tables,
    states: Vec<QueryState>,
    error: Option<Error>,
}

impl PathObserver for BatchObserver<'_> {
    fn step(&mut self, view: &PathView<'_>) {
        for s in self.states.iter_mut().filter(|s| s.active) {
            s.step(view, self.tables);
        }
    }

    fn finish(&mut self, view: &PathView<'_>) {
        for s in self.states.iter_mut().filter(|s| s.active) {
            if let Err(e) = s.finish(view, self.tables) {
                self.error.get_or_insert(e);
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
struct QueryTotals {
    values: Welford,
    bounds: Welford,
    abs: Welford,
    violations: u64,
    samples: Vec<f64>,
}

impl QueryTotals {
    fn merge(&mut self, other: QueryTotals) {
        self.values.merge(&other.values);
        self.bounds.merge(&other.bounds);
        self.abs.merge(&other.abs);
        self.violations += other.violations;
        self.samples.extend(other.samples);
    }
}

fn grid_index(value: f64, h: f64, what: &str) -> Result<usize> {
    let k = (value / h).round();
    if (k * h - value).abs() > 1e-9 * value.abs().max(1.0) {
        return Err(Error::invalid(format!("{what} {value} is not a multiple of the step {h}")));
    }
    Ok(k as usize)
}

fn validate(spec: &PathSpec, queries: &[Query]) -> Result<usize> {
    spec.model.check_point(&spec.x0)?;
    spec.config.validate(&spec.model)?;
    let steps = spec.config.steps_for(spec.t)?;
    let n = spec.model.intrinsic_dim();
    for query in queries {
        let q = query.form.degree();
        let kind = query.kind.name();
        if query.form.model() != spec.model {
            return Err(Error::invalid(format!(
                "form '{}' belongs to {}, not {}",
                query.form.name(),
                query.form.model().name(),
                spec.model.name()
            )));
        }
        if q < 0 || q as usize > n {
            return Err(Error::invalid(format!("form degree {q} outside 0..={n}")));
        }
        let expected = query.kind.v0_degree(q);
        if query.v0.dim() != n || query.v0.degree() != expected {
            return Err(Error::invalid(format!(
                "{kind} on a {q}-form needs V0 in Λ^{expected} of dimension {n}, got Λ^{} of dimension {}",
                query.v0.degree(),
                query.v0.dim()
            )));
        }
        if expected < 0 || expected as usize > n {
            return Err(Error::invalid(format!("{kind} is undefined on {q}-forms in dimension {n}")));
        }
        match query.kind {
            EstimatorKind::Dstar if q == 0 => {
                return Err(Error::invalid("dstar needs a form of degree at least 1"))
            }
            EstimatorKind::BismutFunction if q != 0 => {
                return Err(Error::invalid("bismut-fn applies to functions only"))
            }
            EstimatorKind::Laplacian if steps % 2 != 0 => {
                return Err(Error::invalid("laplacian needs an even number of steps"))
            }
            _ => {}
        }
        if query.n_paths == 0 {
            return Err(Error::invalid("n_paths must be positive"));
        }
        if let Some((delta, len)) = query.window {
            if !query.kind.allows_window() {
                return Err(Error::invalid(format!("{kind} does not take a window")));
            }
            if !(delta >= 0.0) || !(len > 0.0) || delta + len > spec.t * (1.0 + 1e-12) {
                return Err(Error::invalid(format!(
                    "window ({delta}, {len}) must satisfy 0 ≤ δ < δ + h′ ≤ t = {}",
                    spec.t
                )));
            }
            let h = spec.config.step;
            let k0 = grid_index(delta, h, "window start")?;
            let k1 = grid_index(delta + len, h, "window end")?;
            if k1 <= k0 || k1 > steps {
                return Err(Error::invalid("window covers no steps"));
            }
        }
    }
    Ok(steps)
}

/// Runs every query on the same stream of paths.
pub fn run_batch(spec: &PathSpec, queries: &[Query], options: &RunOptions) -> Result<Vec<QueryOutcome>> {
    let started = Instant::now();
    let steps = validate(spec, queries)?;
    if queries.is_empty() {
        return Ok(Vec::new());
    }
    let n = spec.model.intrinsic_dim();
    let tb = tables(n)?;
    let mut config = spec.config.clone();
    config.track_flow |= queries.iter().any(|q| q.kind == EstimatorKind::FlowD);
    let total = queries.iter().map(|q| q.n_paths).max().unwrap_or(0);
    let chunks = total.div_ceil(CHUNK);
    let h = config.step;

    let work = |chunk: usize| -> Result<Vec<QueryTotals>> {
        let mut sim = PathSimulator::new(spec.model, &spec.x0, spec.t, config.clone())?;
        let mut observer = BatchObserver {
            tables: tb,
            states: queries.iter().map(|q| QueryState::new(q, n, steps, h, spec.t)).collect(),
            error: None,
        };
        let mut totals = vec![QueryTotals::default(); queries.len()];
        let end = ((chunk + 1) * CHUNK).min(total);
        for path in chunk * CHUNK..end {
            for (state, query) in observer.states.iter_mut().zip(queries) {
                state.active = path < query.n_paths;
                state.reset();
            }
            let mut rng = path_rng(spec.seed, config.stream, path as u64);
            sim.run(&mut rng, &mut observer)?;
            if let Some(e) = observer.error.take() {
                return Err(e);
            }
            for (state, acc) in observer.states.iter().zip(totals.iter_mut()) {
                if !state.active {
                    continue;
                }
                if !state.value.is_finite() {
                    return Err(Error::Internal(format!("non-finite sample on path {path}")));
                }
                acc.values.push(state.value);
                acc.bounds.push(state.bound);
                acc.abs.push(state.value.abs());
                if state.value.abs() > state.bound * (1.0 + 1e-12) + 1e-300 {
                    acc.violations += 1;
                }
                if options.retain_samples {
                    acc.samples.push(state.value);
                }
            }
        }
        Ok(totals)
    };

    let per_chunk: Vec<Result<Vec<QueryTotals>>> = match options.threads {
        Some(1) => (0..chunks).map(work).collect(),
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(|| (0..chunks).into_par_iter().map(work).collect()),
        None => (0..chunks).into_par_iter().map(work).collect(),
    };
    let mut merged = vec![QueryTotals::default(); queries.len()];
    for chunk in per_chunk {
        for (acc, part) in merged.iter_mut().zip(chunk?) {
            acc.merge(part);
        }
    }
    let wall = started.elapsed().as_secs_f64();
    Ok(queries
        .iter()
        .zip(merged)
        .map(|(query, acc)| QueryOutcome {
            estimate: Estimate {
                mean: acc.values.mean(),
                std_error: acc.values.std_error(),
                n_paths: acc.values.count() as usize,
                step: h,
                t: spec.t,
                window: query.window,
                seed: spec.seed,
                wall_time_s: wall,
            },
            bound: BoundSummary {
                sup_norm: query.form.sup_norm(),
                mean_bound: acc.bounds.mean(),
                mean_abs: acc.abs.mean(),
                violations: acc.violations,
            },
            samples: options.retain_samples.then_some(acc.samples),
        })
        .collect())
}

/// A single estimator run.
#[derive(Debug, Clone)]
pub struct EstimatorRequest {
    pub kind: EstimatorKind,
    pub model: ManifoldModel,
    pub form: Arc<dyn FormField>,
    pub x0: Vec<f64>,
    pub v0: MultiVector,
    pub t: f64,
    pub config: IntegratorConfig,
    pub n_paths: usize,
    pub seed: u64,
    pub window: Option<(f64, f64)>,
}

impl EstimatorRequest {
    pub fn path_spec(&self) -> PathSpec {
        PathSpec {
            model: self.model,
            x0: self.x0.clone(),
            t: self.t,
            config: self.config.clone(),
            seed: self.seed,
        }
    }

    pub fn query(&self) -> Query {
        Query {
            kind: self.kind,
            form: self.form.clone(),
            v0: self.v0.clone(),
            window: self.window,
            n_paths: self.n_paths,
        }
    }

    /// Reference value from the oracle module, when available.
    pub fn oracle(&self) -> Option<f64> {
        let frame = self.model.initial_frame(&self.x0).ok()?;
        let columns: Vec<Vec<f64>> = (0..frame.dim()).map(|j| frame.vector(j).to_vec()).collect();
        reference_value(
            &self.model,
            self.form.name(),
            self.kind.quantity(),
            self.t,
            &self.x0,
            &columns,
            self.v0.degree() as usize,
            self.v0.coeffs(),
        )
    }
}

pub fn estimate(req: &EstimatorRequest, options: &RunOptions) -> Result<QueryOutcome> {
    let mut out = run_batch(&req.path_spec(), &[req.query()], options)?;
    Ok(out.remove(0))
}

fn estimate_as(req: &EstimatorRequest, kind: EstimatorKind) -> Result<Estimate> {
    let req = EstimatorRequest {
        kind,
        ..req.clone()
    };
    Ok(estimate(&req, &RunOptions::default())?.estimate)
}

/// `P_t φ(V0) = E φ(W_t V0)`.
pub fn feynman_kac_pt(req: &EstimatorRequest) -> Result<Estimate> {
    estimate_as(req, EstimatorKind::Pt)
}

/// `dP_t φ(V0)` via damped transport, optionally over a window `(δ, h′)`.
pub fn bismut_d(req: &EstimatorRequest) -> Result<Estimate> {
    estimate_as(req, EstimatorKind::D)
}

/// `d*P_t φ(V0)`.
pub fn bismut_dstar(req: &EstimatorRequest) -> Result<Estimate> {
    estimate_as(req, EstimatorKind::Dstar)
}

/// `ΔP_t φ(V0)`.
pub fn bismut_laplacian(req: &EstimatorRequest) -> Result<Estimate> {
    estimate_as(req, EstimatorKind::Laplacian)
}

/// `dP_t φ(V0)` via the derivative flow.
pub fn flow_d(req: &EstimatorRequest) -> Result<Estimate> {
    estimate_as(req, EstimatorKind::FlowD)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub estimator: &'static str,
    pub manifold: String,
    pub form: String,
    pub q: i32,
    pub t: f64,
    pub estimate: Estimate,
    pub oracle: Option<f64>,
    pub z_score: Option<f64>,
    /// `|mean − oracle| ≤ 3 SE` when an oracle exists.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass != Some(false))
    }
}

/// Gap to the oracle in standard errors; zero-variance estimates that hit
/// the oracle give zero.
pub fn z_score(mean: f64, std_error: f64, oracle: f64) -> Option<f64> {
    let gap = mean - oracle;
    if std_error > 0.0 {
        Some(gap / std_error)
    } else if gap.abs() <= 1e-12 * oracle.abs().max(1.0) {
        Some(0.0)
    } else {
        None
    }
}

/// Runs requests, sharing path streams between requests with the same path
/// configuration, and attaches oracle comparisons.
pub fn run_suite(requests: &[EstimatorRequest], options: &RunOptions) -> Result<SuiteReport> {
    let mut groups: Vec<(PathSpec, Vec<usize>)> = Vec::new();
    for (i, req) in requests.iter().enumerate() {
        let mut spec = req.path_spec();
        spec.config.track_flow = false;
        match groups.iter_mut().find(|(g, _)| {
            g.model == spec.model
                && g.x0 == spec.x0
                && g.t == spec.t
                && g.config == spec.config
                && g.seed == spec.seed
        }) {
            Some((_, members)) => members.push(i),
            None => groups.push((spec, vec![i])),
        }
    }
    let mut results: Vec<Option<Estimate>> = vec![None; requests.len()];
    for (spec, members) in &groups {
        let queries: Vec<Query> = members.iter().map(|&i| requests[i].query()).collect();
        let outcomes = run_batch(spec, &queries, options)?;
        for (&i, outcome) in members.iter().zip(outcomes) {
            results[i] = Some(outcome.estimate);
        }
    }
    let entries = requests
        .iter()
        .zip(results)
        .map(|(req, est)| {
            let est = est.expect("every request ran");
            let oracle = req.oracle();
            let z = oracle.and_then(|o| z_score(est.mean, est.std_error, o));
            let pass = oracle.map(|o| (est.mean - o).abs() <= 3.0 * est.std_error + 1e-12 * o.abs().max(1.0));
            SuiteEntry {
                estimator: req.kind.name(),
                manifold: req.model.name(),
                form: req.form.name().to_string(),
                q: req.form.degree(),
                t: req.t,
                estimate: est,
                oracle,
                z_score: z,
                pass,
            }
        })
        .collect();
    Ok(SuiteReport { entries })
}
