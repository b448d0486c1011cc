//! Path simulation for the gradient Brownian system `dx = X(x)∘dB`.
//!
//! Tangent data is carried in coordinates of the frame transported along the
//! path, so parallel transport is the identity in that gauge. The streaming
//! [`PathSimulator`] hands every step to a [`PathObserver`] with left-point
//! values, then advances the point, frame, damped transports and (optionally)
//! the derivative flow.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{binomial, DegreeMap, MAX_DIM};
use crate::geometry::{torus_coordinate_fields, Frame, ManifoldModel};

/// One-step map used to advance the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// `x' = retract(x, X(x)√h ξ)`.
    ProjectedEuler,
    /// `x' = exp_x(X(x)√h ξ)`.
    Geodesic,
}

impl Scheme {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "projected-euler" | "euler" => Ok(Scheme::ProjectedEuler),
            "geodesic" => Ok(Scheme::Geodesic),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ProjectedEuler => "projected-euler",
            Scheme::Geodesic => "geodesic",
        }
    }
}

/// How damped transports are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DampingMode {
    /// Exact scalar exponential when the Weitzenbock operator is a constant
    /// multiple of the identity (all shipped models).
    Auto,
    /// Generic first-order implicit ODE step with the operator re-evaluated at
    /// every left point.
    Ode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub scheme: Scheme,
    /// Degrees whose damped transport is tracked in `Ode` mode; empty means all.
    pub degrees: Vec<i32>,
    pub track_flow: bool,
    pub stream: u64,
    pub damping: DampingMode,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            step: 1e-3,
            scheme: Scheme::ProjectedEuler,
            degrees: Vec::new(),
            track_flow: false,
            stream: 0,
            damping: DampingMode::Auto,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self, model: &ManifoldModel) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::invalid(format!("step must be positive, got {}", self.step)));
        }
        if self.step > model.max_time_step() {
            return Err(Error::invalid(format!(
                "step {} exceeds the cap {} for {}",
                self.step,
                model.max_time_step(),
                model.name()
            )));
        }
        let n = model.intrinsic_dim() as i32;
        if let Some(q) = self.degrees.iter().find(|&&q| q < 0 || q > n) {
            return Err(Error::invalid(format!("degree {q} outside 0..={n}")));
        }
        Ok(())
    }

    /// Number of steps covering `[0, t]`; `t` must be a multiple of the step.
    pub fn steps_for(&self, t: f64) -> Result<usize> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("horizon must be positive, got {t}")));
        }
        let k = (t / self.step).round();
        if k < 1.0 || (k * self.step - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::invalid(format!(
                "horizon {t} is not a multiple of the step {}",
                self.step
            )));
        }
        Ok(k as usize)
    }

    fn tracks(&self, q: i32) -> bool {
        self.degrees.is_empty() || self.degrees.contains(&q)
    }
}

/// Random stream of one path: ChaCha8 keyed by `(seed, stream)` with the
/// path index as the cipher stream id.
pub fn path_rng(seed: u64, stream: u64, path: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(path);
    rng
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projects each column onto `T_x M` and replaces the result by its polar
/// factor (third-order Newton–Schulz iteration).
fn reorthonormalize(model: &ManifoldModel, x: &[f64], src: &[f64], dst: &mut [f64], n: usize) -> Result<()> {
    if let ManifoldModel::FlatTorus2 = model {
        // Transport is trivial in the coordinate frame.
        let fields = torus_coordinate_fields(x);
        dst[..4].copy_from_slice(&fields[0]);
        dst[4..8].copy_from_slice(&fields[1]);
        return Ok(());
    }
    let m = x.len();
    for j in 0..n {
        model.project_into(x, &src[j * m..(j + 1) * m], &mut dst[j * m..(j + 1) * m]);
        let len = dot(&dst[j * m..(j + 1) * m], &dst[j * m..(j + 1) * m]).sqrt();
        if !(len > 0.5) {
            return Err(Error::StepTooLarge(format!(
                "transported frame collapsed (column norm {len:.3e})"
            )));
        }
    }
    let mut e = [0.0; MAX_DIM * MAX_DIM];
    let mut c = [0.0; MAX_DIM * MAX_DIM];
    let mut next = [0.0; MAX_DIM * MAX_DIM];
    for _ in 0..30 {
        let mut err: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let g = dot(&dst[a * m..(a + 1) * m], &dst[b * m..(b + 1) * m]) - if a == b { 1.0 } else { 0.0 };
                e[a * n + b] = g;
                e[b * n + a] = g;
                err = err.max(g.abs());
            }
        }
        if err < 1e-15 {
            return Ok(());
        }
        let last = err < 1e-5;
        // Y ← Y (I − E/2 + 3E²/8), E = YᵀY − I
        for a in 0..n {
            for b in 0..n {
                let mut sq = 0.0;
                for l in 0..n {
                    sq += e[a * n + l] * e[l * n + b];
                }
                c[a * n + b] = if a == b { 1.0 } else { 0.0 } - 0.5 * e[a * n + b] + 0.375 * sq;
            }
        }
        for j in 0..n {
            let col = &mut next[j * m..(j + 1) * m];
            col.iter_mut().for_each(|v| *v = 0.0);
            for l in 0..n {
                let w = c[l * n + j];
                for (v, y) in col.iter_mut().zip(&dst[l * m..(l + 1) * m]) {
                    *v += y * w;
                }
            }
        }
        dst[..m * n].copy_from_slice(&next[..m * n]);
        if last {
            break;
        }
    }
    let mut err: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let g = dot(&dst[a * m..(a + 1) * m], &dst[b * m..(b + 1) * m]);
            err = err.max((g - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    if err > 1e-12 {
        return Err(Error::StepTooLarge(format!(
            "frame orthonormalisation did not converge (error {err:.3e})"
        )));
    }
    Ok(())
}

/// Damped transports `W_k^q` and their inverses in transported-frame
/// coordinates.
#[derive(Debug, Clone)]
pub struct DampingState {
    n: usize,
    k: usize,
    /// `Auto` mode: `[q][k] = exp(−c_q s_k / 2)`.
    factors: Vec<Vec<f64>>,
    /// `Ode` mode: per degree `(W, W⁻¹)`.
    matrices: Vec<Option<(DMatrix<f64>, DMatrix<f64>)>>,
}

impl DampingState {
    fn new(model: &ManifoldModel, config: &IntegratorConfig, steps: usize) -> Self {
        let n = model.intrinsic_dim();
        match config.damping {
            DampingMode::Auto => {
                let factors = (0..=n as i32)
                    .map(|q| {
                        let c = model.weitzenbock_eigenvalue(q);
                        (0..=steps)
                            .map(|k| (-0.5 * c * k as f64 * config.step).exp())
                            .collect()
                    })
                    .collect();
                DampingState {
                    n,
                    k: 0,
                    factors,
                    matrices: Vec::new(),
                }
            }
            DampingMode::Ode => {
                let matrices = (0..=n as i32)
                    .map(|q| {
                        config.tracks(q).then(|| {
                            let d = binomial(n, q);
                            (DMatrix::identity(d, d), DMatrix::identity(d, d))
                        })
                    })
                    .collect();
                DampingState {
                    n,
                    k: 0,
                    factors: Vec::new(),
                    matrices,
                }
            }
        }
    }

    fn reset(&mut self) {
        self.k = 0;
        for (w, wi) in self.matrices.iter_mut().flatten() {
            w.fill_with_identity();
            wi.fill_with_identity();
        }
    }

    fn advance(&mut self, model: &ManifoldModel, x: &[f64], frame: &Frame, h: f64) -> Result<()> {
        self.k += 1;
        for (q, slot) in self.matrices.iter_mut().enumerate() {
            if let Some((w, wi)) = slot {
                let r = model.weitzenbock_operator(x, q as i32, frame)?;
                let d = w.nrows();
                let a = DMatrix::identity(d, d) + r.matrix() * (0.5 * h);
                let a_inv = a.clone().try_inverse().ok_or(Error::NumericalSingularity {
                    condition: f64::INFINITY,
                })?;
                *w = &a_inv * &*w;
                *wi = &*wi * &a;
            }
        }
        Ok(())
    }

    fn apply(&self, q: i32, input: &[f64], out: &mut [f64], inverse: bool) {
        if q < 0 || q as usize > self.n {
            return;
        }
        if !self.factors.is_empty() {
            let f = self.factors[q as usize][self.k];
            let f = if inverse { 1.0 / f } else { f };
            for (o, i) in out.iter_mut().zip(input) {
                *o = f * i;
            }
            return;
        }
        let (w, wi) = self.matrices[q as usize]
            .as_ref()
            .unwrap_or_else(|| panic!("damped transport of degree {q} is not tracked"));
        let mat = if inverse { wi } else { w };
        let d = mat.nrows();
        for r in 0..d {
            let mut acc = 0.0;
            for c in 0..d {
                acc += mat[(r, c)] * input[c];
            }
            out[r] = acc;
        }
    }

    /// Current `W^q` as a map on `Λ^q R^n`.
    pub fn matrix(&self, q: i32) -> DegreeMap {
        if !self.factors.is_empty() {
            return DegreeMap::scaled_identity(self.n, q, self.factors[q as usize][self.k]);
        }
        match &self.matrices[q as usize] {
            Some((w, _)) => DegreeMap::new(self.n, q, q, w.clone()).expect("shape"),
            None => panic!("damped transport of degree {q} is not tracked"),
        }
    }
}

/// Left-point state of a path at step `k` (or the endpoint when `k = K`).
pub struct PathView<'a> {
    pub k: usize,
    pub time: f64,
    pub x: &'a [f64],
    /// Transported frame, `m × n` column-major.
    pub frame: &'a [f64],
    /// Ambient Gaussian increment `√h ξ_k` (empty at the endpoint).
    pub noise: &'a [f64],
    /// Tangent step `X(x_k) √h ξ_k` (empty at the endpoint).
    pub tangent: &'a [f64],
    /// Antidevelopment increment `ΔB̆_k` in frame coordinates (empty at the
    /// endpoint).
    pub increment: &'a [f64],
    /// Derivative flow applied to the initial frame, `m × n` column-major.
    pub flow: Option<&'a [f64]>,
    damping: &'a DampingState,
}

impl PathView<'_> {
    /// `out = W^q input`.
    pub fn damp(&self, q: i32, input: &[f64], out: &mut [f64]) {
        self.damping.apply(q, input, out, false);
    }

    /// `out = (W^q)⁻¹ input`.
    pub fn undamp(&self, q: i32, input: &[f64], out: &mut [f64]) {
        self.damping.apply(q, input, out, true);
    }

    pub fn damped_transport(&self, q: i32) -> DegreeMap {
        self.damping.matrix(q)
    }

    pub fn frame(&self) -> Frame {
        let n = self.frame.len() / self.x.len();
        Frame::from_raw(self.x.to_vec(), self.frame.to_vec(), n)
    }

    /// Derivative flow in frame coordinates, `F_kᵀ V_k` (`n × n`).
    pub fn flow_in_frame(&self) -> Option<DMatrix<f64>> {
        let flow = self.flow?;
        let m = self.x.len();
        let n = self.frame.len() / m;
        Some(DMatrix::from_fn(n, n, |i, j| {
            dot(&self.frame[i * m..(i + 1) * m], &flow[j * m..(j + 1) * m])
        }))
    }
}

pub trait PathObserver {
    fn step(&mut self, view: &PathView<'_>);
    fn finish(&mut self, view: &PathView<'_>);
}

/// Reusable path integrator with preallocated scratch space.
pub struct PathSimulator {
    model: ManifoldModel,
    config: IntegratorConfig,
    steps: usize,
    x0: Vec<f64>,
    frame0: Frame,
    x: Vec<f64>,
    x_next: Vec<f64>,
    frame: Vec<f64>,
    frame_next: Vec<f64>,
    noise: Vec<f64>,
    tangent: Vec<f64>,
    increment: Vec<f64>,
    flow: Vec<f64>,
    flow_next: Vec<f64>,
    damping: DampingState,
}

impl PathSimulator {
    pub fn new(model: ManifoldModel, x0: &[f64], t: f64, config: IntegratorConfig) -> Result<Self> {
        model.check_point(x0)?;
        config.validate(&model)?;
        let steps = config.steps_for(t)?;
        let frame0 = model.initial_frame(x0)?;
        let (m, n) = (model.ambient_dim(), model.intrinsic_dim());
        let damping = DampingState::new(&model, &config, steps);
        Ok(PathSimulator {
            steps,
            x0: x0.to_vec(),
            x: x0.to_vec(),
            x_next: vec![0.0; m],
            frame: frame0.columns().to_vec(),
            frame_next: vec![0.0; m * n],
            noise: vec![0.0; m],
            tangent: vec![0.0; m],
            increment: vec![0.0; n],
            flow: frame0.columns().to_vec(),
            flow_next: vec![0.0; m * n],
            frame0,
            damping,
            model,
            config,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn initial_frame(&self) -> &Frame {
        &self.frame0
    }

    pub fn run<R: Rng + ?Sized, O: PathObserver + ?Sized>(&mut self, rng: &mut R, observer: &mut O) -> Result<()> {
        let (m, n) = (self.model.ambient_dim(), self.model.intrinsic_dim());
        let h = self.config.step;
        let sqrt_h = h.sqrt();
        let geodesic = self.config.scheme == Scheme::Geodesic;
        let track_flow = self.config.track_flow;
        self.x.copy_from_slice(&self.x0);
        self.frame.copy_from_slice(self.frame0.columns());
        self.flow.copy_from_slice(self.frame0.columns());
        self.damping.reset();

        for k in 0..self.steps {
            for v in self.noise.iter_mut() {
                *v = sqrt_h * rng.sample::<f64, _>(StandardNormal);
            }
            self.model.project_into(&self.x, &self.noise, &mut self.tangent);
            for j in 0..n {
                self.increment[j] = dot(&self.frame[j * m..(j + 1) * m], &self.noise);
            }
            observer.step(&PathView {
                k,
                time: k as f64 * h,
                x: &self.x,
                frame: &self.frame,
                noise: &self.noise,
                tangent: &self.tangent,
                increment: &self.increment,
                flow: track_flow.then_some(&self.flow[..]),
                damping: &self.damping,
            });

            if geodesic {
                self.model.exp_into(&self.x, &self.tangent, &mut self.x_next)?;
            } else {
                self.model.retract_into(&self.x, &self.tangent, &mut self.x_next)?;
            }
            if track_flow {
                for j in 0..n {
                    self.model.step_jacobian_into(
                        geodesic,
                        &self.x,
                        &self.noise,
                        &self.x_next,
                        &self.flow[j * m..(j + 1) * m],
                        &mut self.flow_next[j * m..(j + 1) * m],
                    );
                }
                std::mem::swap(&mut self.flow, &mut self.flow_next);
            }
            reorthonormalize(&self.model, &self.x_next, &self.frame, &mut self.frame_next, n)?;
            if self.config.damping == DampingMode::Ode {
                let frame = Frame::from_raw(self.x.clone(), self.frame.clone(), n);
                self.damping.advance(&self.model, &self.x, &frame, h)?;
            } else {
                self.damping.k += 1;
            }
            std::mem::swap(&mut self.x, &mut self.x_next);
            std::mem::swap(&mut self.frame, &mut self.frame_next);
        }
        observer.finish(&PathView {
            k: self.steps,
            time: self.steps as f64 * h,
            x: &self.x,
            frame: &self.frame,
            noise: &[],
            tangent: &[],
            increment: &[],
            flow: track_flow.then_some(&self.flow[..]),
            damping: &self.damping,
        });
        Ok(())
    }
}

/// Fully materialised path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub step: f64,
    pub horizon: f64,
    pub points: Vec<Vec<f64>>,
    pub frames: Vec<Frame>,
    /// Ambient Gaussian increments `√h ξ_k`, replayed by the derivative flow.
    pub noise: Vec<Vec<f64>>,
    /// `ΔB̆_k` in transported-frame coordinates.
    pub increments: Vec<Vec<f64>>,
    /// `damped[q][k] = W_k^q`.
    pub damped: Vec<Vec<DegreeMap>>,
    /// `Tξ_k` in frame coordinates, when tracked.
    pub flow: Option<Vec<DMatrix<f64>>>,
}

#[derive(Default)]
struct Recorder {
    points: Vec<Vec<f64>>,
    frames: Vec<Frame>,
    noise: Vec<Vec<f64>>,
    increments: Vec<Vec<f64>>,
    damped: Vec<Vec<DegreeMap>>,
    flow: Vec<DMatrix<f64>>,
    degrees: Vec<i32>,
    n: usize,
}

impl Recorder {
    fn record(&mut self, view: &PathView<'_>) {
        self.points.push(view.x.to_vec());
        self.frames.push(view.frame());
        if self.damped.is_empty() {
            self.damped = vec![Vec::new(); self.n + 1];
        }
        for &q in &self.degrees {
            self.damped[q as usize].push(view.damped_transport(q));
        }
        if let Some(f) = view.flow_in_frame() {
            self.flow.push(f);
        }
    }
}

impl PathObserver for Recorder {
    fn step(&mut self, view: &PathView<'_>) {
        self.record(view);
        self.noise.push(view.noise.to_vec());
        self.increments.push(view.increment.to_vec());
    }

    fn finish(&mut self, view: &PathView<'_>) {
        self.record(view);
    }
}

/// Simulates one path on `[0, t]` and records everything.
pub fn simulate_path<R: Rng + ?Sized>(
    model: &ManifoldModel,
    x0: &[f64],
    t: f64,
    config: &IntegratorConfig,
    rng: &mut R,
) -> Result<PathSample> {
    let mut sim = PathSimulator::new(*model, x0, t, config.clone())?;
    let n = model.intrinsic_dim();
    let degrees = (0..=n as i32).filter(|&q| config.damping == DampingMode::Auto || config.tracks(q)).collect();
    let mut rec = Recorder {
        degrees,
        n,
        ..Default::default()
    };
    sim.run(rng, &mut rec)?;
    Ok(PathSample {
        step: config.step,
        horizon: t,
        points: rec.points,
        frames: rec.frames,
        noise: rec.noise,
        increments: rec.increments,
        damped: rec.damped,
        flow: config.track_flow.then_some(rec.flow),
    })
}

/// Transports `frame` from `x_k` to the nearby point `x_next`.
pub fn parallel_transport_step(model: &ManifoldModel, frame: &Frame, x_next: &[f64]) -> Result<Frame> {
    model.check_point(x_next)?;
    let n = frame.dim();
    let mut out = vec![0.0; frame.columns().len()];
    reorthonormalize(model, x_next, frame.columns(), &mut out, n)?;
    Ok(Frame::from_raw(x_next.to_vec(), out, n))
}

/// Frame coordinates of the tangent step that carries `x_k` to `x_next`
/// under `scheme`.
pub fn antidevelopment_increment(
    model: &ManifoldModel,
    scheme: Scheme,
    frame: &Frame,
    x_next: &[f64],
) -> Result<Vec<f64>> {
    let x = frame.point();
    model.check_point(x)?;
    model.check_point(x_next)?;
    let v: Vec<f64> = match model {
        ManifoldModel::FlatTorus2 => {
            let a = model.log_chart(x);
            let b = model.log_chart(x_next);
            let du = (b[0] - a[0] + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            let dv = (b[1] - a[1] + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
            vec![-x[1] * du, x[0] * du, -x[3] * dv, x[2] * dv]
        }
        ManifoldModel::Sphere { .. } => {
            let c = dot(x, x_next);
            if !(c > 0.0) {
                return Err(Error::StepTooLarge("points are not in a common hemisphere".into()));
            }
            match scheme {
                Scheme::ProjectedEuler => x_next.iter().zip(x).map(|(y, xi)| y / c - xi).collect(),
                Scheme::Geodesic => {
                    let w: Vec<f64> = x_next.iter().zip(x).map(|(y, xi)| y - c * xi).collect();
                    let s = dot(&w, &w).sqrt();
                    if s < 1e-300 {
                        vec![0.0; x.len()]
                    } else {
                        let theta = s.atan2(c);
                        w.iter().map(|wi| theta * wi / s).collect()
                    }
                }
            }
        }
    };
    Ok(frame.coordinates(&v))
}

/// Recomputes `W_k^q` along a recorded path.
pub fn damped_transport(model: &ManifoldModel, path: &PathSample, q: i32, mode: DampingMode) -> Result<Vec<DegreeMap>> {
    let n = model.intrinsic_dim();
    if q < 0 || q as usize > n {
        return Err(Error::invalid(format!("degree {q} outside 0..={n}")));
    }
    let h = path.step;
    let mut out = Vec::with_capacity(path.points.len());
    match mode {
        DampingMode::Auto => {
            let c = model.weitzenbock_eigenvalue(q);
            for k in 0..path.points.len() {
                out.push(DegreeMap::scaled_identity(n, q, (-0.5 * c * k as f64 * h).exp()));
            }
        }
        DampingMode::Ode => {
            let mut w = DegreeMap::identity(n, q);
            out.push(w.clone());
            for k in 0..path.points.len() - 1 {
                let r = model.weitzenbock_operator(&path.points[k], q, &path.frames[k])?;
                let a = DegreeMap::identity(n, q).matrix() + r.matrix() * (0.5 * h);
                let a = DegreeMap::new(n, q, q, a)?;
                w = a.inverse()?.compose(&w)?;
                out.push(w.clone());
            }
        }
    }
    Ok(out)
}

/// Replays the recorded noise through the one-step Jacobians and returns
/// `Tξ_k` in frame coordinates.
pub fn derivative_flow(model: &ManifoldModel, path: &PathSample, scheme: Scheme) -> Result<Vec<DMatrix<f64>>> {
    let (m, n) = (model.ambient_dim(), model.intrinsic_dim());
    let geodesic = scheme == Scheme::Geodesic;
    let mut v = path.frames[0].columns().to_vec();
    let mut next = vec![0.0; m * n];
    let mut out = Vec::with_capacity(path.points.len());
    let to_frame = |frame: &Frame, v: &[f64]| {
        DMatrix::from_fn(n, n, |i, j| dot(frame.vector(i), &v[j * m..(j + 1) * m]))
    };
    out.push(to_frame(&path.frames[0], &v));
    for k in 0..path.noise.len() {
        for j in 0..n {
            model.step_jacobian_into(
                geodesic,
                &path.points[k],
                &path.noise[k],
                &path.points[k + 1],
                &v[j * m..(j + 1) * m],
                &mut next[j * m..(j + 1) * m],
            );
        }
        std::mem::swap(&mut v, &mut next);
        out.push(to_frame(&path.frames[k + 1], &v));
    }
    Ok(out)
}
