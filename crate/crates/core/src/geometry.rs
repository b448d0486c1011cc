//! Embedded compact Riemannian manifolds.
//!
//! Points are stored in ambient coordinates and tangent vectors are ambient
//! vectors lying in the image of the orthogonal projection `X(x)`. Two models
//! ship: the flat torus `S¹ × S¹ ⊂ R⁴` embedded as
//! `(u, v) ↦ (cos u, sin u, cos v, sin v)` and the unit sphere `Sⁿ ⊂ R^{n+1}`.
//! Both have constant curvature, so their Weitzenbock operators are multiples
//! of the identity on every `Λ^q`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exterior::{DegreeMap, MAX_DIM};

/// Distance from the manifold accepted for an input point.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

/// Largest ambient norm accepted for a single tangent step.
const MAX_STEP_NORM: f64 = 1.0;

/// Largest time step accepted by the integrators.
const MAX_TIME_STEP: f64 = 0.05;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of a tangent space, stored as the columns of an
/// `m × n` matrix in column-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    point: Vec<f64>,
    columns: Vec<f64>,
    dim: usize,
}

impl Frame {
    pub fn new(point: Vec<f64>, vectors: &DMatrix<f64>) -> Result<Self> {
        if vectors.nrows() != point.len() {
            return Err(Error::invalid("frame vectors must live in the ambient space"));
        }
        Ok(Frame {
            dim: vectors.ncols(),
            columns: vectors.as_slice().to_vec(),
            point,
        })
    }

    pub(crate) fn from_raw(point: Vec<f64>, columns: Vec<f64>, dim: usize) -> Self {
        debug_assert_eq!(columns.len(), point.len() * dim);
        Frame {
            point,
            columns,
            dim,
        }
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.point.len()
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        let m = self.point.len();
        &self.columns[j * m..(j + 1) * m]
    }

    pub fn columns(&self) -> &[f64] {
        &self.columns
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.point.len(), self.dim, &self.columns)
    }

    /// Frame coordinates `Fᵀ v` of an ambient vector.
    pub fn coordinates(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|j| dot(self.vector(j), v)).collect()
    }

    /// Ambient vector `F c` with frame coordinates `c`.
    pub fn ambient(&self, c: &[f64]) -> Vec<f64> {
        let m = self.point.len();
        let mut out = vec![0.0; m];
        for (j, &cj) in c.iter().enumerate() {
            for (o, f) in out.iter_mut().zip(self.vector(j)) {
                *o += cj * f;
            }
        }
        out
    }

    /// `max |FᵀF − I|`.
    pub fn gram_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(self.vector(i), self.vector(j)) - target).abs());
            }
        }
        worst
    }
}

/// Shipped manifold models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldModel {
    /// Flat torus in `R⁴` via two unit circles.
    FlatTorus2,
    /// Unit sphere `Sⁿ ⊂ R^{n+1}`.
    Sphere { n: usize },
}

impl ManifoldModel {
    /// Parses `torus2`, `sphere2` or `sphereN:<n>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let model = match name {
            "torus2" => ManifoldModel::FlatTorus2,
            "sphere2" => ManifoldModel::Sphere { n: 2 },
            other => {
                let n = other
                    .strip_prefix("sphereN:")
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| Error::invalid(format!("unknown manifold '{other}'")))?;
                ManifoldModel::Sphere { n }
            }
        };
        if let ManifoldModel::Sphere { n } = model {
            if n == 0 || n + 1 > MAX_DIM {
                return Err(Error::invalid(format!(
                    "sphere dimension {n} outside 1..={}",
                    MAX_DIM - 1
                )));
            }
        }
        Ok(model)
    }

    pub fn name(&self) -> String {
        match self {
            ManifoldModel::FlatTorus2 => "torus2".into(),
            ManifoldModel::Sphere { n: 2 } => "sphere2".into(),
            ManifoldModel::Sphere { n } => format!("sphereN:{n}"),
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            ManifoldModel::FlatTorus2 => 2,
            ManifoldModel::Sphere { n } => *n,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            ManifoldModel::FlatTorus2 => 4,
            ManifoldModel::Sphere { n } => n + 1,
        }
    }

    /// Sectional curvature.
    pub fn curvature(&self) -> f64 {
        match self {
            ManifoldModel::FlatTorus2 => 0.0,
            ManifoldModel::Sphere { .. } => 1.0,
        }
    }

    pub fn max_step_norm(&self) -> f64 {
        MAX_STEP_NORM
    }

    pub fn max_time_step(&self) -> f64 {
        MAX_TIME_STEP
    }

    pub fn distance_to_manifold(&self, x: &[f64]) -> f64 {
        if x.len() != self.ambient_dim() {
            return f64::INFINITY;
        }
        match self {
            ManifoldModel::FlatTorus2 => {
                let a = (x[0].hypot(x[1]) - 1.0).abs();
                let b = (x[2].hypot(x[3]) - 1.0).abs();
                a.max(b)
            }
            ManifoldModel::Sphere { .. } => (norm(x) - 1.0).abs(),
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        let distance = self.distance_to_manifold(x);
        if distance > ON_MANIFOLD_TOL {
            return Err(Error::OffManifold {
                distance,
                tolerance: ON_MANIFOLD_TOL,
            });
        }
        Ok(())
    }

    fn check_vector(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.ambient_dim() {
            return Err(Error::invalid(format!(
                "ambient vector of length {} for {}",
                v.len(),
                self.name()
            )));
        }
        Ok(())
    }

    /// Orthogonal projection `X(x) e` onto `T_x M`.
    pub fn tangent_project(&self, x: &[f64], e: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_vector(e)?;
        let mut out = vec![0.0; e.len()];
        self.project_into(x, e, &mut out);
        Ok(out)
    }

    pub(crate) fn project_into(&self, x: &[f64], e: &[f64], out: &mut [f64]) {
        match self {
            ManifoldModel::FlatTorus2 => {
                for b in 0..2 {
                    let (c, s) = (x[2 * b], x[2 * b + 1]);
                    let r2 = c * c + s * s;
                    let along = (-s * e[2 * b] + c * e[2 * b + 1]) / r2;
                    out[2 * b] = -s * along;
                    out[2 * b + 1] = c * along;
                }
            }
            ManifoldModel::Sphere { .. } => {
                let xe = dot(x, e) / dot(x, x);
                for ((o, &ei), &xi) in out.iter_mut().zip(e).zip(x) {
                    *o = ei - xe * xi;
                }
            }
        }
    }

    pub fn projection_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let m = self.ambient_dim();
        let mut p = DMatrix::zeros(m, m);
        let mut e = vec![0.0; m];
        let mut col = vec![0.0; m];
        for j in 0..m {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.project_into(x, &e, &mut col);
            p.column_mut(j).copy_from_slice(&col);
        }
        Ok(p)
    }

    /// Directional derivative of the projection field, `(D_v X)(x) e`.
    pub fn projection_derivative(&self, x: &[f64], v: &[f64], e: &[f64]) -> Vec<f64> {
        match self {
            ManifoldModel::FlatTorus2 => {
                let mut out = vec![0.0; 4];
                for b in 0..2 {
                    let t = [-x[2 * b + 1], x[2 * b]];
                    let dt = [-v[2 * b + 1], v[2 * b]];
                    let eb = [e[2 * b], e[2 * b + 1]];
                    let te = dot(&t, &eb);
                    let dte = dot(&dt, &eb);
                    out[2 * b] = dt[0] * te + t[0] * dte;
                    out[2 * b + 1] = dt[1] * te + t[1] * dte;
                }
                out
            }
            ManifoldModel::Sphere { .. } => {
                let (ve, xe) = (dot(v, e), dot(x, e));
                x.iter().zip(v).map(|(&xi, &vi)| -ve * xi - xe * vi).collect()
            }
        }
    }

    /// Eigenvalue of the Weitzenbock operator on `Λ^q` for the shipped
    /// constant-curvature models: `q (n - q) κ`.
    pub fn weitzenbock_eigenvalue(&self, q: i32) -> f64 {
        let n = self.intrinsic_dim() as i32;
        if q < 0 || q > n {
            return 0.0;
        }
        (q * (n - q)) as f64 * self.curvature()
    }

    /// Weitzenbock operator `ℛ^q` at `x` in the basis of `Λ^q T_x M` induced by
    /// `frame`.
    pub fn weitzenbock_operator(&self, x: &[f64], q: i32, frame: &Frame) -> Result<DegreeMap> {
        self.check_point(x)?;
        if frame.dim() != self.intrinsic_dim() || frame.ambient_dim() != self.ambient_dim() {
            return Err(Error::invalid("frame does not belong to this manifold"));
        }
        Ok(DegreeMap::scaled_identity(
            self.intrinsic_dim(),
            q,
            self.weitzenbock_eigenvalue(q),
        ))
    }

    /// Retraction used by the projected Euler scheme.
    pub fn retract(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_vector(v)?;
        let mut out = vec![0.0; x.len()];
        self.retract_into(x, v, &mut out)?;
        Ok(out)
    }

    fn step_cap(&self, v: &[f64]) -> Result<()> {
        let len = norm(v);
        if !(len <= MAX_STEP_NORM) {
            return Err(Error::StepTooLarge(format!(
                "tangent step of norm {len:.3} exceeds cap {MAX_STEP_NORM}"
            )));
        }
        Ok(())
    }

    pub(crate) fn retract_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        self.step_cap(v)?;
        match self {
            ManifoldModel::FlatTorus2 => torus_translate(x, v, out),
            ManifoldModel::Sphere { .. } if v.iter().all(|&c| c == 0.0) => out.copy_from_slice(x),
            ManifoldModel::Sphere { .. } => {
                for ((o, &xi), &vi) in out.iter_mut().zip(x).zip(v) {
                    *o = xi + vi;
                }
                let r = norm(out);
                out.iter_mut().for_each(|o| *o /= r);
            }
        }
        Ok(())
    }

    /// Riemannian exponential map.
    pub fn exp_map(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.check_vector(v)?;
        let mut out = vec![0.0; x.len()];
        self.exp_into(x, v, &mut out)?;
        Ok(out)
    }

    pub(crate) fn exp_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        self.step_cap(v)?;
        match self {
            ManifoldModel::FlatTorus2 => torus_translate(x, v, out),
            ManifoldModel::Sphere { .. } => {
                let r = norm(v);
                if r < 1e-300 {
                    out.copy_from_slice(x);
                    return Ok(());
                }
                let (s, c) = r.sin_cos();
                for ((o, &xi), &vi) in out.iter_mut().zip(x).zip(v) {
                    *o = c * xi + s * vi / r;
                }
                // Keep the point exactly normalised against rounding drift.
                let len = norm(out);
                out.iter_mut().for_each(|o| *o /= len);
            }
        }
        Ok(())
    }

    /// Derivative in the starting point of the one-step map
    /// `x ↦ step(x, X(x) d)` applied to the tangent vector `w`, where `step`
    /// is the retraction (`geodesic == false`) or the exponential map.
    /// `x_next` must be the image of `x`.
    pub(crate) fn step_jacobian_into(
        &self,
        geodesic: bool,
        x: &[f64],
        d: &[f64],
        x_next: &[f64],
        w: &[f64],
        out: &mut [f64],
    ) {
        match self {
            ManifoldModel::FlatTorus2 => {
                for b in 0..2 {
                    let (c, s) = (x[2 * b], x[2 * b + 1]);
                    let along = -s * w[2 * b] + c * w[2 * b + 1];
                    let stretch = 1.0 - (c * d[2 * b] + s * d[2 * b + 1]);
                    out[2 * b] = -x_next[2 * b + 1] * along * stretch;
                    out[2 * b + 1] = x_next[2 * b] * along * stretch;
                }
            }
            ManifoldModel::Sphere { .. } => {
                let m = x.len();
                let xd = dot(x, d);
                let wd = dot(w, d);
                // dv = D_w[X(x) d]
                let mut dv = [0.0; MAX_DIM];
                for i in 0..m {
                    dv[i] = -wd * x[i] - xd * w[i];
                }
                let dv = &dv[..m];
                if !geodesic {
                    let mut y_len = 0.0;
                    for i in 0..m {
                        let y = x[i] + d[i] - xd * x[i];
                        y_len += y * y;
                    }
                    let y_len = y_len.sqrt();
                    let mut dy = [0.0; MAX_DIM];
                    for i in 0..m {
                        dy[i] = w[i] + dv[i];
                    }
                    let proj = dot(x_next, &dy[..m]);
                    for i in 0..m {
                        out[i] = (dy[i] - proj * x_next[i]) / y_len;
                    }
                } else {
                    let mut v = [0.0; MAX_DIM];
                    for i in 0..m {
                        v[i] = d[i] - xd * x[i];
                    }
                    let r = norm(&v[..m]);
                    if r < 1e-12 {
                        for i in 0..m {
                            out[i] = w[i] + dv[i];
                        }
                    } else {
                        let (s, c) = r.sin_cos();
                        let dr = dot(&v[..m], dv) / r;
                        for i in 0..m {
                            let u = v[i] / r;
                            let du = (dv[i] - u * dr) / r;
                            out[i] = -s * dr * x[i] + c * w[i] + c * dr * u + s * du;
                        }
                    }
                    let proj = dot(x_next, &out[..m]);
                    for i in 0..m {
                        out[i] -= proj * x_next[i];
                    }
                }
            }
        }
    }

    /// Deterministic oriented orthonormal frame of `T_x M`: Gram–Schmidt over
    /// the model's reference directions in a fixed order. The sphere uses the
    /// projected ambient axes; the torus uses the coordinate fields `∂u, ∂v`.
    pub fn initial_frame(&self, x: &[f64]) -> Result<Frame> {
        self.check_point(x)?;
        let m = self.ambient_dim();
        let n = self.intrinsic_dim();
        let candidates: Vec<Vec<f64>> = match self {
            ManifoldModel::FlatTorus2 => {
                let t = torus_coordinate_fields(x);
                vec![t[0].to_vec(), t[1].to_vec()]
            }
            ManifoldModel::Sphere { .. } => (0..m)
                .map(|j| {
                    let mut e = vec![0.0; m];
                    e[j] = 1.0;
                    let mut p = vec![0.0; m];
                    self.project_into(x, &e, &mut p);
                    p
                })
                .collect(),
        };
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
        for mut c in candidates {
            if basis.len() == n {
                break;
            }
            for b in &basis {
                let k = dot(b, &c);
                c.iter_mut().zip(b).for_each(|(ci, bi)| *ci -= k * bi);
            }
            let len = norm(&c);
            if len > 1e-6 {
                c.iter_mut().for_each(|ci| *ci /= len);
                basis.push(c);
            }
        }
        if basis.len() != n {
            return Err(Error::Internal("degenerate tangent projection".into()));
        }
        let mut columns: Vec<f64> = basis.concat();
        if self.orientation_sign(x, &columns) < 0.0 {
            columns[(n - 1) * m..].iter_mut().for_each(|c| *c = -*c);
        }
        Ok(Frame::from_raw(x.to_vec(), columns, n))
    }

    /// Sign of the orientation of a tangent basis (columns, column-major).
    pub(crate) fn orientation_sign(&self, x: &[f64], columns: &[f64]) -> f64 {
        let m = self.ambient_dim();
        match self {
            ManifoldModel::FlatTorus2 => {
                let t = torus_coordinate_fields(x);
                let g = |j: usize, k: usize| dot(&columns[j * m..(j + 1) * m], &t[k]);
                (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).signum()
            }
            ManifoldModel::Sphere { .. } => {
                let mut full = DMatrix::zeros(m, m);
                full.column_mut(0).copy_from_slice(x);
                for j in 0..m - 1 {
                    full.column_mut(j + 1)
                        .copy_from_slice(&columns[j * m..(j + 1) * m]);
                }
                full.determinant().signum()
            }
        }
    }

    /// Sample from the normalised Riemannian volume.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            ManifoldModel::FlatTorus2 => {
                let u: f64 = rng.gen_range(0.0..TAU);
                let v: f64 = rng.gen_range(0.0..TAU);
                vec![u.cos(), u.sin(), v.cos(), v.sin()]
            }
            ManifoldModel::Sphere { n } => loop {
                let g: Vec<f64> = (0..n + 1).map(|_| rng.sample(StandardNormal)).collect();
                let r = norm(&g);
                if r > 1e-12 {
                    break g.into_iter().map(|c| c / r).collect();
                }
            },
        }
    }

    /// Intrinsic coordinates: torus angles in `[0, 2π)`; for the sphere the
    /// polar angle from the last axis followed by the angles of the remaining
    /// sphere `S^{n-1}`.
    pub fn log_chart(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ManifoldModel::FlatTorus2 => vec![
                x[1].atan2(x[0]).rem_euclid(TAU),
                x[3].atan2(x[2]).rem_euclid(TAU),
            ],
            ManifoldModel::Sphere { .. } => sphere_angles(x),
        }
    }

    /// Inverse of [`log_chart`](Self::log_chart).
    pub fn embed(&self, coords: &[f64]) -> Result<Vec<f64>> {
        if coords.len() != self.intrinsic_dim() {
            return Err(Error::invalid(format!(
                "{} needs {} intrinsic coordinates, got {}",
                self.name(),
                self.intrinsic_dim(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
        Ok(match self {
            ManifoldModel::FlatTorus2 => vec![
                coords[0].cos(),
                coords[0].sin(),
                coords[1].cos(),
                coords[1].sin(),
            ],
            ManifoldModel::Sphere { .. } => sphere_embed(coords),
        })
    }
}

pub(crate) fn torus_coordinate_fields(x: &[f64]) -> [[f64; 4]; 2] {
    let r0 = x[0].hypot(x[1]);
    let r1 = x[2].hypot(x[3]);
    [
        [-x[1] / r0, x[0] / r0, 0.0, 0.0],
        [0.0, 0.0, -x[3] / r1, x[2] / r1],
    ]
}

/// Flat-torus step: translate each angle by the tangent component and re-embed.
fn torus_translate(x: &[f64], v: &[f64], out: &mut [f64]) {
    for b in 0..2 {
        let (c, s) = (x[2 * b], x[2 * b + 1]);
        let r = c.hypot(s);
        let du = (-s * v[2 * b] + c * v[2 * b + 1]) / r;
        let angle = s.atan2(c) + du;
        let (sn, cs) = angle.sin_cos();
        out[2 * b] = cs;
        out[2 * b + 1] = sn;
    }
}

fn sphere_embed(a: &[f64]) -> Vec<f64> {
    if a.len() == 1 {
        return vec![a[0].cos(), a[0].sin()];
    }
    let (s, c) = a[0].sin_cos();
    let mut x: Vec<f64> = sphere_embed(&a[1..]).into_iter().map(|v| s * v).collect();
    x.push(c);
    x
}

fn sphere_angles(x: &[f64]) -> Vec<f64> {
    let m = x.len();
    if m == 2 {
        return vec![x[1].atan2(x[0]).rem_euclid(TAU)];
    }
    let last = x[m - 1].clamp(-1.0, 1.0);
    let polar = last.acos();
    let rest = norm(&x[..m - 1]);
    let mut out = vec![polar];
    if rest < 1e-300 {
        out.extend(std::iter::repeat(0.0).take(m - 2));
    } else {
        let scaled: Vec<f64> = x[..m - 1].iter().map(|v| v / rest).collect();
        out.extend(sphere_angles(&scaled));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{induced_power, MultiVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn models() -> Vec<ManifoldModel> {
        vec![
            ManifoldModel::FlatTorus2,
            ManifoldModel::Sphere { n: 2 },
            ManifoldModel::Sphere { n: 4 },
        ]
    }

    #[test]
    fn names_round_trip() {
        for name in ["torus2", "sphere2", "sphereN:3"] {
            assert_eq!(ManifoldModel::from_name(name).unwrap().name(), name);
        }
        assert_eq!(
            ManifoldModel::from_name("sphereN:2").unwrap(),
            ManifoldModel::Sphere { n: 2 }
        );
        assert!(ManifoldModel::from_name("klein").is_err());
        assert!(ManifoldModel::from_name("sphereN:0").is_err());
        assert!(ManifoldModel::from_name("sphereN:40").is_err());
    }

    #[test]
    fn projection_is_rank_n_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for model in models() {
            for _ in 0..50 {
                let x = model.random_point(&mut rng);
                let p = model.projection_matrix(&x).unwrap();
                assert!((&p * &p - &p).amax() < 1e-12);
                assert!((&p - p.transpose()).amax() < 1e-12);
                assert!((p.trace() - model.intrinsic_dim() as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sphere_projection_kills_normal() {
        let s = ManifoldModel::Sphere { n: 2 };
        let x = s.embed(&[0.7, 2.0]).unwrap();
        let p = s.tangent_project(&x, &x).unwrap();
        assert!(norm(&p) < 1e-14);
        let e = [0.3, -0.2, 1.1];
        let expect: Vec<f64> = e.iter().zip(&x).map(|(ei, xi)| ei - dot(&x, &e) * xi).collect();
        let got = s.tangent_project(&x, &e).unwrap();
        assert!(got.iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn torus_projection_kills_radial_directions() {
        let t = ManifoldModel::FlatTorus2;
        let x = t.embed(&[0.4, 2.5]).unwrap();
        let radial0 = [x[0], x[1], 0.0, 0.0];
        let radial1 = [0.0, 0.0, x[2], x[3]];
        assert!(norm(&t.tangent_project(&x, &radial0).unwrap()) < 1e-14);
        assert!(norm(&t.tangent_project(&x, &radial1).unwrap()) < 1e-14);
        // ∂u is fixed.
        let du = [-x[1], x[0], 0.0, 0.0];
        let p = t.tangent_project(&x, &du).unwrap();
        assert!(p.iter().zip(&du).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn off_manifold_is_rejected() {
        let s = ManifoldModel::Sphere { n: 2 };
        let err = s.tangent_project(&[0.0, 0.0, 1.1], &[1.0, 0.0, 0.0]).unwrap_err();
        match err {
            Error::OffManifold { distance, .. } => assert!((distance - 0.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(s.tangent_project(&[0.0, 1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn weitzenbock_values() {
        let t = ManifoldModel::FlatTorus2;
        let x = t.embed(&[0.1, 0.2]).unwrap();
        let f = t.initial_frame(&x).unwrap();
        for q in 0..=2 {
            assert_eq!(t.weitzenbock_operator(&x, q, &f).unwrap().matrix().amax(), 0.0);
        }
        let s = ManifoldModel::Sphere { n: 2 };
        let x = s.embed(&[0.3, 1.0]).unwrap();
        let f = s.initial_frame(&x).unwrap();
        assert_eq!(
            s.weitzenbock_operator(&x, 1, &f).unwrap(),
            DegreeMap::identity(2, 1)
        );
        let s5 = ManifoldModel::Sphere { n: 5 };
        for q in 0..=5 {
            assert_eq!(s5.weitzenbock_eigenvalue(q), (q * (5 - q)) as f64);
        }
    }

    #[test]
    fn surface_duality_of_weitzenbock() {
        for model in [ManifoldModel::FlatTorus2, ManifoldModel::Sphere { n: 2 }] {
            let x = model.embed(&[0.9, 0.4]).unwrap();
            let f = model.initial_frame(&x).unwrap();
            let r0 = model.weitzenbock_operator(&x, 0, &f).unwrap();
            let r1 = model.weitzenbock_operator(&x, 1, &f).unwrap();
            let r2 = model.weitzenbock_operator(&x, 2, &f).unwrap();
            // star: Λ^0 → Λ^2 is multiplication by the volume element.
            let star0 = DegreeMap::new(2, 0, 2, DMatrix::from_element(1, 1, 1.0)).unwrap();
            let conj = star0.compose(&r0).unwrap().compose(&star0.transpose()).unwrap();
            assert!(conj.max_abs_diff(&r2) < 1e-14);
            // Complex structure on Λ^1: the star, rotation by 90 degrees.
            let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
            let r = r1.matrix();
            assert!((r * &j - &j * r).amax() < 1e-14);
        }
    }

    #[test]
    fn retraction_properties() {
        let s = ManifoldModel::Sphere { n: 2 };
        let x = s.embed(&[1.2, 0.3]).unwrap();
        assert_eq!(s.retract(&x, &[0.0; 3]).unwrap(), x);
        let e = [0.4, 0.1, -0.3];
        let v = s.tangent_project(&x, &e).unwrap();
        let mut prev = f64::NAN;
        for k in 1..6 {
            let eps = 0.1 / (1 << k) as f64;
            let w: Vec<f64> = v.iter().map(|c| c * eps).collect();
            let y = s.retract(&x, &w).unwrap();
            assert!(s.distance_to_manifold(&y) < 1e-15);
            let gap = norm(&y.iter().zip(&x).zip(&w).map(|((a, b), c)| a - b - c).collect::<Vec<_>>());
            if k > 1 {
                let ratio = prev / gap;
                assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
            }
            prev = gap;
        }
        let far: Vec<f64> = v.iter().map(|c| 3.0 * c / norm(&v)).collect();
        assert!(matches!(s.retract(&x, &far), Err(Error::StepTooLarge(_))));
    }

    #[test]
    fn torus_retraction_is_exact_geodesic() {
        let t = ManifoldModel::FlatTorus2;
        let x = t.embed(&[0.3, 5.9]).unwrap();
        let f = t.initial_frame(&x).unwrap();
        let v = f.ambient(&[0.25, -0.4]);
        let y = t.retract(&x, &v).unwrap();
        let angles = t.log_chart(&y);
        assert!((angles[0] - 0.55).abs() < 1e-14);
        assert!((angles[1] - 5.5).abs() < 1e-14);
        assert_eq!(t.exp_map(&x, &v).unwrap(), y);
    }

    #[test]
    fn sphere_exp_map_moves_along_great_circle() {
        let s = ManifoldModel::Sphere { n: 2 };
        let x = [0.0, 0.0, 1.0];
        let y = s.exp_map(&x, &[0.5, 0.0, 0.0]).unwrap();
        assert!((y[0] - 0.5f64.sin()).abs() < 1e-15);
        assert!((y[2] - 0.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn north_pole_frame() {
        let s = ManifoldModel::Sphere { n: 2 };
        let f = s.initial_frame(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.vector(0), &[1.0, 0.0, 0.0]);
        assert_eq!(f.vector(1), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn torus_frame_is_coordinate_frame() {
        let t = ManifoldModel::FlatTorus2;
        for angles in [[0.0, 0.0], [std::f64::consts::FRAC_PI_2, 0.0], [4.0, 2.0]] {
            let x = t.embed(&angles).unwrap();
            let f = t.initial_frame(&x).unwrap();
            let du = [-angles[0].sin(), angles[0].cos(), 0.0, 0.0];
            let dv = [0.0, 0.0, -angles[1].sin(), angles[1].cos()];
            assert!(f.vector(0).iter().zip(&du).all(|(a, b)| (a - b).abs() < 1e-15));
            assert!(f.vector(1).iter().zip(&dv).all(|(a, b)| (a - b).abs() < 1e-15));
        }
    }

    #[test]
    fn frames_are_orthonormal_oriented_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for model in models() {
            for _ in 0..1000 {
                let x = model.random_point(&mut rng);
                let f = model.initial_frame(&x).unwrap();
                assert!(f.gram_error() < 1e-12);
                for j in 0..f.dim() {
                    let p = model.tangent_project(&x, f.vector(j)).unwrap();
                    assert!(p.iter().zip(f.vector(j)).all(|(a, b)| (a - b).abs() < 1e-12));
                }
                assert_eq!(model.orientation_sign(&x, f.columns()), 1.0);
                assert_eq!(model.initial_frame(&x).unwrap(), f);
            }
        }
    }

    #[test]
    fn chart_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for model in models() {
            for _ in 0..200 {
                let x = model.random_point(&mut rng);
                let back = model.embed(&model.log_chart(&x)).unwrap();
                assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-12));
            }
        }
        assert!(ManifoldModel::FlatTorus2.embed(&[1.0]).is_err());
    }

    #[test]
    fn uniform_sphere_moments() {
        // E x_i = 0 and E x_i x_j = δ_ij / (n + 1) under the uniform measure.
        let s = ManifoldModel::Sphere { n: 2 };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let count = 200_000;
        let mut first = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for _ in 0..count {
            let x = s.random_point(&mut rng);
            for i in 0..3 {
                first[i] += x[i];
                for j in 0..3 {
                    second[i][j] += x[i] * x[j];
                }
            }
        }
        let c = count as f64;
        for i in 0..3 {
            assert!((first[i] / c).abs() < 4.0 * (1.0 / 3.0 / c).sqrt());
            for j in 0..3 {
                let target = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((second[i][j] / c - target).abs() < 0.005);
            }
        }
    }

    #[test]
    fn torus_angles_uniform() {
        let t = ManifoldModel::FlatTorus2;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut bins = [0usize; 8];
        for _ in 0..80_000 {
            let a = t.log_chart(&t.random_point(&mut rng));
            assert!(a.iter().all(|v| (0.0..TAU).contains(v)));
            bins[(a[0] / TAU * 8.0) as usize] += 1;
        }
        assert!(bins.iter().all(|&b| (9_500..10_500).contains(&b)), "{bins:?}");
    }

    #[test]
    fn projection_continuity_under_retraction() {
        let s = ManifoldModel::Sphere { n: 2 };
        let x = s.embed(&[0.8, 0.1]).unwrap();
        let p0 = s.projection_matrix(&x).unwrap();
        let v = s.tangent_project(&x, &[0.3, 0.5, -0.2]).unwrap();
        let mut prev = f64::NAN;
        for k in 0..5 {
            let eps = 0.05 / (1 << k) as f64;
            let w: Vec<f64> = v.iter().map(|c| c * eps).collect();
            let p1 = s.projection_matrix(&s.retract(&x, &w).unwrap()).unwrap();
            let gap = (&p1 - &p0).amax();
            if k > 0 {
                assert!((1.8..2.2).contains(&(prev / gap)));
            }
            prev = gap;
        }
    }

    fn finite_difference_jacobian(model: ManifoldModel, geodesic: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = model.ambient_dim();
        for _ in 0..20 {
            let x = model.random_point(&mut rng);
            let d: Vec<f64> = (0..m).map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
            let f = model.initial_frame(&x).unwrap();
            let w = f.ambient(&[0.6, -0.8]);
            let step = |p: &[f64]| {
                let v = model.tangent_project(p, &d).unwrap();
                if geodesic {
                    model.exp_map(p, &v).unwrap()
                } else {
                    model.retract(p, &v).unwrap()
                }
            };
            let x_next = step(&x);
            let mut jw = vec![0.0; m];
            model.step_jacobian_into(geodesic, &x, &d, &x_next, &w, &mut jw);
            // Central difference along the geodesic through x with velocity w.
            let h = 1e-6;
            let plus = step(&model.exp_map(&x, &w.iter().map(|c| c * h).collect::<Vec<_>>()).unwrap());
            let minus = step(&model.exp_map(&x, &w.iter().map(|c| -c * h).collect::<Vec<_>>()).unwrap());
            for i in 0..m {
                let fd = (plus[i] - minus[i]) / (2.0 * h);
                assert!((fd - jw[i]).abs() < 1e-7, "{model:?} {i}: {fd} vs {}", jw[i]);
            }
        }
    }

    #[test]
    fn step_jacobians_match_finite_differences() {
        finite_difference_jacobian(ManifoldModel::FlatTorus2, false);
        finite_difference_jacobian(ManifoldModel::Sphere { n: 2 }, false);
        finite_difference_jacobian(ManifoldModel::Sphere { n: 2 }, true);
    }

    #[test]
    fn projection_derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for model in [ManifoldModel::FlatTorus2, ManifoldModel::Sphere { n: 2 }] {
            let m = model.ambient_dim();
            let x = model.random_point(&mut rng);
            let f = model.initial_frame(&x).unwrap();
            let v = f.ambient(&[0.3, 0.9]);
            let e: Vec<f64> = (0..m).map(|i| 0.5 - i as f64 * 0.3).collect();
            let h = 1e-6;
            let xp = model.exp_map(&x, &v.iter().map(|c| c * h).collect::<Vec<_>>()).unwrap();
            let xm = model.exp_map(&x, &v.iter().map(|c| -c * h).collect::<Vec<_>>()).unwrap();
            let pp = model.tangent_project(&xp, &e).unwrap();
            let pm = model.tangent_project(&xm, &e).unwrap();
            let an = model.projection_derivative(&x, &v, &e);
            for i in 0..m {
                assert!(((pp[i] - pm[i]) / (2.0 * h) - an[i]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn frame_induced_basis_is_orthonormal_on_forms() {
        let s = ManifoldModel::Sphere { n: 3 };
        let x = s.embed(&[0.4, 1.1, 2.0]).unwrap();
        let f = s.initial_frame(&x).unwrap();
        let g = f.matrix().transpose() * f.matrix();
        let lg = induced_power(&g, 2).unwrap();
        assert!(lg.max_abs_diff(&DegreeMap::identity(3, 2)) < 1e-12);
        let _ = MultiVector::zero(3, 2);
    }
}
