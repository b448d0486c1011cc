//! Closed-form reference values.
//!
//! Everything here except the star identity suite works on plain arrays and
//! shares no code with the exterior algebra used by the estimators.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::exterior::{induced_power, MultiVector};
use crate::geometry::ManifoldModel;
use crate::transport::path_rng;

/// Quantity evaluated at `(x0, V0)` after time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `P_t φ(V0)`
    Heat,
    /// `d P_t φ(V0)`
    Derivative,
    /// `d* P_t φ(V0)`
    Codifferential,
    /// `Δ P_t φ(V0)`
    Laplacian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// `amplitude · trig(k·θ) dθ^I`, with `I` a bitmask over `{θ₁, θ₂}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub k: [i32; 2],
    pub trig: Trig,
    pub component: u8,
    pub amplitude: f64,
}

/// Finite Fourier expansion of a form on the flat torus.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierForm {
    pub degree: u32,
    pub modes: Vec<FourierMode>,
}

fn parity(bits: u32) -> f64 {
    if bits % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl FourierMode {
    fn phase(&self, theta: [f64; 2]) -> f64 {
        self.k[0] as f64 * theta[0] + self.k[1] as f64 * theta[1]
    }

    fn value(&self, theta: [f64; 2]) -> f64 {
        let p = self.phase(theta);
        self.amplitude
            * match self.trig {
                Trig::Cos => p.cos(),
                Trig::Sin => p.sin(),
            }
    }

    /// `∂_j` of the coefficient, as a mode.
    fn partial(&self, j: usize) -> FourierMode {
        let kj = self.k[j] as f64;
        let (trig, amplitude) = match self.trig {
            Trig::Cos => (Trig::Sin, -kj * self.amplitude),
            Trig::Sin => (Trig::Cos, kj * self.amplitude),
        };
        FourierMode {
            trig,
            amplitude,
            ..*self
        }
    }

    fn k_squared(&self) -> f64 {
        (self.k[0] * self.k[0] + self.k[1] * self.k[1]) as f64
    }
}

impl FourierForm {
    fn map_modes(&self, degree: u32, f: impl Fn(&FourierMode) -> Vec<FourierMode>) -> FourierForm {
        FourierForm {
            degree,
            modes: self
                .modes
                .iter()
                .flat_map(|m| f(m))
                .filter(|m| m.amplitude != 0.0)
                .collect(),
        }
    }

    /// `P_t`: each mode decays by `e^{−|k|² t / 2}`.
    pub fn heat(&self, t: f64) -> FourierForm {
        self.map_modes(self.degree, |m| {
            vec![FourierMode {
                amplitude: m.amplitude * (-0.5 * m.k_squared() * t).exp(),
                ..*m
            }]
        })
    }

    pub fn d(&self) -> FourierForm {
        self.map_modes(self.degree + 1, |m| {
            (0..2)
                .filter(|&j| m.component & (1 << j) == 0)
                .map(|j| {
                    // dθ^j ∧ dθ^I
                    let below = (m.component & ((1 << j) - 1)).count_ones();
                    let p = m.partial(j);
                    FourierMode {
                        component: m.component | (1 << j),
                        amplitude: parity(below) * p.amplitude,
                        ..p
                    }
                })
                .collect()
        })
    }

    pub fn codifferential(&self) -> FourierForm {
        self.map_modes(self.degree.saturating_sub(1), |m| {
            (0..2)
                .filter(|&j| m.component & (1 << j) != 0)
                .map(|j| {
                    // −∂_j g · ι_{∂j} dθ^I
                    let below = (m.component & ((1 << j) - 1)).count_ones();
                    let p = m.partial(j);
                    FourierMode {
                        component: m.component & !(1 << j),
                        amplitude: -parity(below) * p.amplitude,
                        ..p
                    }
                })
                .collect()
        })
    }

    /// `Δ = −|k|²` mode-wise on the flat torus.
    pub fn laplacian(&self) -> FourierForm {
        self.map_modes(self.degree, |m| {
            vec![FourierMode {
                amplitude: -m.k_squared() * m.amplitude,
                ..*m
            }]
        })
    }

    /// Value on a multivector given by its `∂θ` coefficients in lexicographic
    /// order.
    pub fn evaluate(&self, theta: [f64; 2], v: &[f64]) -> f64 {
        let index = |mask: u8| match mask {
            0 | 1 | 3 => 0,
            _ => 1,
        };
        self.modes
            .iter()
            .filter(|m| m.component.count_ones() == self.degree)
            .map(|m| m.value(theta) * v[index(m.component)])
            .sum()
    }
}

/// Fourier expansion of a shipped torus form.
pub fn torus_form(name: &str) -> Option<FourierForm> {
    let mode = |k, trig, component| FourierMode {
        k,
        trig,
        component,
        amplitude: 1.0,
    };
    let (degree, m) = match name {
        "const1" => (0, mode([0, 0], Trig::Cos, 0)),
        "cos1" => (0, mode([1, 0], Trig::Cos, 0)),
        "sin1" => (0, mode([1, 0], Trig::Sin, 0)),
        "cos2" => (0, mode([0, 1], Trig::Cos, 0)),
        "d1" => (1, mode([0, 0], Trig::Cos, 1)),
        "sin1_d1" => (1, mode([1, 0], Trig::Sin, 1)),
        "sin2_d1" => (1, mode([0, 1], Trig::Sin, 1)),
        "cos2_d2" => (1, mode([0, 1], Trig::Cos, 2)),
        "cos1_d12" => (2, mode([1, 0], Trig::Cos, 3)),
        _ => return None,
    };
    Some(FourierForm {
        degree,
        modes: vec![m],
    })
}

/// Exact `P_t φ`, `dP_t φ`, `d*P_t φ` or `ΔP_t φ` at angles `theta` on `V`
/// (coefficients on `∂θ^I`).
pub fn torus_heat(form: &FourierForm, quantity: Quantity, t: f64, theta: [f64; 2], v: &[f64]) -> Option<f64> {
    let evolved = form.heat(t);
    let target = match quantity {
        Quantity::Heat => evolved,
        Quantity::Derivative if form.degree < 2 => evolved.d(),
        Quantity::Codifferential if form.degree > 0 => evolved.codifferential(),
        Quantity::Laplacian => evolved.laplacian(),
        _ => return None,
    };
    let expected = match target.degree {
        0 | 2 => 1,
        _ => 2,
    };
    (v.len() == expected).then(|| target.evaluate(theta, v))
}

/// Linear-coordinate forms on the unit sphere `Sⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereForm {
    Constant,
    /// Last ambient coordinate, eigenfunction with `Δ z = −n z`.
    Height,
    /// `dz`, eigenform with `Δ dz = −n dz` and `d* dz = n z`.
    HeightDifferential,
}

pub fn sphere_form(name: &str) -> Option<SphereForm> {
    match name {
        "const1" => Some(SphereForm::Constant),
        "z" => Some(SphereForm::Height),
        "dz" => Some(SphereForm::HeightDifferential),
        _ => None,
    }
}

/// Exact values for the linear-coordinate forms on `Sⁿ`. `frame` holds the
/// ambient frame vectors at `x0`; `v` are frame coordinates of `V0`.
pub fn sphere_heat(
    form: SphereForm,
    quantity: Quantity,
    n: usize,
    t: f64,
    x0: &[f64],
    frame: &[Vec<f64>],
    v: &[f64],
) -> Option<f64> {
    let last = x0.len() - 1;
    let decay = (-0.5 * n as f64 * t).exp();
    let nf = n as f64;
    let dz_of = |v: &[f64]| -> f64 { v.iter().zip(frame).map(|(c, f)| c * f[last]).sum() };
    let deg = |d: usize| -> usize {
        match d {
            0 => 1,
            1 => n,
            _ => n * (n - 1) / 2,
        }
    };
    let (value, degree) = match (form, quantity) {
        (SphereForm::Constant, Quantity::Heat) => (v[0], 0),
        (SphereForm::Constant, Quantity::Derivative) => (0.0, 1),
        (SphereForm::Constant, Quantity::Laplacian) => (0.0, 0),
        (SphereForm::Height, Quantity::Heat) => (decay * x0[last] * v[0], 0),
        (SphereForm::Height, Quantity::Derivative) => (decay * dz_of(v), 1),
        (SphereForm::Height, Quantity::Laplacian) => (-nf * decay * x0[last] * v[0], 0),
        (SphereForm::HeightDifferential, Quantity::Heat) => (decay * dz_of(v), 1),
        (SphereForm::HeightDifferential, Quantity::Derivative) => (0.0, 2),
        (SphereForm::HeightDifferential, Quantity::Codifferential) => (nf * decay * x0[last] * v[0], 0),
        (SphereForm::HeightDifferential, Quantity::Laplacian) => (-nf * decay * dz_of(v), 1),
        _ => return None,
    };
    (v.len() == deg(degree)).then_some(value)
}

/// Reference value for a shipped form, if one exists. `v` holds the frame
/// coordinates of a multivector of degree `v_degree`.
#[allow(clippy::too_many_arguments)]
pub fn reference_value(
    model: &ManifoldModel,
    form: &str,
    quantity: Quantity,
    t: f64,
    x0: &[f64],
    frame: &[Vec<f64>],
    v_degree: usize,
    v: &[f64],
) -> Option<f64> {
    match model {
        ManifoldModel::FlatTorus2 => {
            let theta = [x0[1].atan2(x0[0]), x0[3].atan2(x0[2])];
            // Components of the frame vectors along ∂θ₁, ∂θ₂.
            let du = [-x0[1], x0[0], 0.0, 0.0];
            let dv = [0.0, 0.0, -x0[3], x0[2]];
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let g = [
                [dot(&frame[0], &du), dot(&frame[0], &dv)],
                [dot(&frame[1], &du), dot(&frame[1], &dv)],
            ];
            let coords: Vec<f64> = match v_degree {
                0 => v.to_vec(),
                1 => vec![v[0] * g[0][0] + v[1] * g[1][0], v[0] * g[0][1] + v[1] * g[1][1]],
                _ => vec![v[0] * (g[0][0] * g[1][1] - g[0][1] * g[1][0])],
            };
            torus_heat(&torus_form(form)?, quantity, t, theta, &coords)
        }
        ManifoldModel::Sphere { n } => sphere_heat(sphere_form(form)?, quantity, *n, t, x0, frame, v),
    }
}

/// `q (n − q) κ`, the Weitzenbock eigenvalue on `Λ^q` of a space of constant
/// curvature `κ`.
pub fn constant_curvature_weitzenbock(n: usize, q: usize, kappa: f64) -> f64 {
    if q > n {
        return 0.0;
    }
    (q * (n - q)) as f64 * kappa
}

/// `e^{−q(n−q)κ t / 2}`.
pub fn damping_closed_form(n: usize, q: usize, kappa: f64, t: f64) -> f64 {
    (-0.5 * constant_curvature_weitzenbock(n, q, kappa) * t).exp()
}

fn combinations(n: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, q, &mut Vec::new(), &mut out);
    out
}

fn permutations(items: &[usize]) -> Vec<(Vec<usize>, f64)> {
    if items.is_empty() {
        return vec![(Vec::new(), 1.0)];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        let sign = parity(i as u32);
        for (mut p, s) in permutations(&rest) {
            p.insert(0, head);
            out.push((p, sign * s));
        }
    }
    out
}

/// Dense rank-`q` tensor over `R^n`.
#[derive(Clone)]
struct Tensor {
    n: usize,
    rank: usize,
    data: Vec<f64>,
}

impl Tensor {
    fn zeros(n: usize, rank: usize) -> Self {
        Tensor {
            n,
            rank,
            data: vec![0.0; n.pow(rank as u32)],
        }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    fn indices(&self) -> Vec<Vec<usize>> {
        (0..self.data.len())
            .map(|mut flat| {
                let mut idx = vec![0; self.rank];
                for slot in (0..self.rank).rev() {
                    idx[slot] = flat % self.n;
                    flat /= self.n;
                }
                idx
            })
            .collect()
    }

    /// `e_{i_1} ∧ … ∧ e_{i_q}` as an alternating tensor.
    fn basis(n: usize, set: &[usize]) -> Self {
        let mut t = Tensor::zeros(n, set.len());
        for (p, s) in permutations(set) {
            let o = t.offset(&p);
            t.data[o] = s;
        }
        t
    }

    /// Derivation action of the endomorphism `a` (row-major `n × n`).
    fn derive(&self, a: &[f64]) -> Tensor {
        let mut out = Tensor::zeros(self.n, self.rank);
        for idx in self.indices() {
            let mut acc = 0.0;
            for k in 0..self.rank {
                let mut j = idx.clone();
                for b in 0..self.n {
                    j[k] = b;
                    acc += a[idx[k] * self.n + b] * self.data[self.offset(&j)];
                }
            }
            let o = out.offset(&idx);
            out.data[o] = acc;
        }
        out
    }

    /// Contraction of `u` into the first slot.
    fn interior(&self, u: &[f64]) -> Tensor {
        let mut out = Tensor::zeros(self.n, self.rank - 1);
        for idx in out.indices() {
            let mut acc = 0.0;
            for (b, &ub) in u.iter().enumerate() {
                let mut full = vec![b];
                full.extend(&idx);
                acc += ub * self.data[self.offset(&full)];
            }
            let o = out.offset(&idx);
            out.data[o] = acc;
        }
        out
    }

    /// `u ∧ T`, `(u∧T)[a_0..a_q] = Σ_k (−1)^k u_{a_k} T[.. â_k ..]`.
    fn wedge(&self, u: &[f64]) -> Tensor {
        let mut out = Tensor::zeros(self.n, self.rank + 1);
        for idx in out.indices() {
            let mut acc = 0.0;
            for k in 0..idx.len() {
                let mut rest = idx.clone();
                rest.remove(k);
                acc += parity(k as u32) * u[idx[k]] * self.data[self.offset(&rest)];
            }
            let o = out.offset(&idx);
            out.data[o] = acc;
        }
        out
    }

    fn add_assign(&mut self, other: &Tensor) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// Brute-force Weitzenbock operator `Σ_{i,j} e_j ∧ ι_{e_i} R(e_i, e_j)` on
/// `Λ^q R^n` for `R(X,Y)Z = κ(⟨Y,Z⟩X − ⟨X,Z⟩Y)`, acting on multivectors by
/// derivation. Rows and columns follow the lexicographic basis of `Λ^q`.
pub fn weitzenbock_brute_force(n: usize, q: usize, kappa: f64) -> Vec<Vec<f64>> {
    let basis = combinations(n, q);
    let unit = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    let curvature = |i: usize, j: usize| {
        // Matrix of Z ↦ κ(⟨e_j, Z⟩ e_i − ⟨e_i, Z⟩ e_j), row-major.
        let mut a = vec![0.0; n * n];
        a[i * n + j] += kappa;
        a[j * n + i] -= kappa;
        a
    };
    let mut out = vec![vec![0.0; basis.len()]; basis.len()];
    for (col, set) in basis.iter().enumerate() {
        let t = Tensor::basis(n, set);
        let mut acc = Tensor::zeros(n, q);
        if q > 0 {
            for i in 0..n {
                for j in 0..n {
                    let term = t.derive(&curvature(i, j)).interior(&unit(i)).wedge(&unit(j));
                    acc.add_assign(&term);
                }
            }
        }
        for (row, target) in basis.iter().enumerate() {
            out[row][col] = acc.data[acc.offset(target)];
        }
    }
    out
}

/// Largest deviation of each checked identity over randomized inputs.
#[derive(Debug, Clone, Serialize)]
pub struct StarReport {
    pub dim: usize,
    pub cases: usize,
    pub wedge_star_pairing: f64,
    pub vector_star_pairing: f64,
    pub star_evaluation: f64,
    pub double_star: f64,
    pub star_interior: f64,
    pub star_commutes_with_rotations: f64,
}

impl StarReport {
    pub fn worst(&self) -> f64 {
        [
            self.wedge_star_pairing,
            self.vector_star_pairing,
            self.star_evaluation,
            self.double_star,
            self.star_interior,
            self.star_commutes_with_rotations,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

fn random_multivector<R: Rng>(rng: &mut R, n: usize, q: i32) -> MultiVector {
    let d = crate::exterior::binomial(n, q);
    let c = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    MultiVector::from_coeffs(n, q, c).expect("shape")
}

/// Uniformly random rotation in `SO(n)`.
pub fn random_rotation<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col *= -1.0;
        }
    }
    if q.determinant() < 0.0 {
        let mut col = q.column_mut(0);
        col *= -1.0;
    }
    q
}

/// Checks the star identities on `Λ R^n` for random inputs:
/// `α ∧ *β = ⟨α, β⟩ vol` (for forms and vectors alike), `*φ(V) =
/// (−1)^{q(n−q)} φ(*V)`, `** = (−1)^{q(n−q)}`, `* ι_u V = (−1)^{q−1} u ∧ *V`
/// and `* Λ^q R = Λ^{n−q} R *` for rotations `R`.
pub fn star_identity_suite(n: usize, cases: usize, seed: u64) -> StarReport {
    let mut rng = path_rng(seed, 0x57a5, n as u64);
    let vol = MultiVector::volume(n);
    let mut report = StarReport {
        dim: n,
        cases,
        wedge_star_pairing: 0.0,
        vector_star_pairing: 0.0,
        star_evaluation: 0.0,
        double_star: 0.0,
        star_interior: 0.0,
        star_commutes_with_rotations: 0.0,
    };
    for case in 0..cases {
        let q = (case % (n + 1)) as i32;
        let sign = if (q as usize * (n - q as usize)) % 2 == 0 { 1.0 } else { -1.0 };
        let a = random_multivector(&mut rng, n, q);
        let b = random_multivector(&mut rng, n, q);
        let pairing = a.wedge(&b.hodge_star()).unwrap();
        let expect = vol.clone().scale(a.inner(&b).unwrap());
        report.wedge_star_pairing = report.wedge_star_pairing.max(pairing.max_abs_diff(&expect));
        if q == 1 {
            report.vector_star_pairing = report.vector_star_pairing.max(pairing.max_abs_diff(&expect));
        }

        let v = random_multivector(&mut rng, n, n as i32 - q);
        let lhs = a.hodge_star().inner(&v).unwrap();
        let rhs = sign * a.inner(&v.hodge_star()).unwrap();
        report.star_evaluation = report.star_evaluation.max((lhs - rhs).abs());

        let twice = a.hodge_star().hodge_star();
        report.double_star = report.double_star.max(twice.max_abs_diff(&a.clone().scale(sign)));

        if q >= 1 {
            let u: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let lhs = a.interior(&u).unwrap().hodge_star();
            let uv = MultiVector::vector(&u).unwrap();
            let rhs = uv.wedge(&a.hodge_star()).unwrap().scale(parity(q as u32 - 1));
            report.star_interior = report.star_interior.max(lhs.max_abs_diff(&rhs));
        }

        let r = random_rotation(&mut rng, n);
        let lq = induced_power(&r, q).unwrap();
        let lnq = induced_power(&r, n as i32 - q).unwrap();
        let lhs = lq.apply(&a).unwrap().hodge_star();
        let rhs = lnq.apply(&a.hodge_star()).unwrap();
        report.star_commutes_with_rotations = report.star_commutes_with_rotations.max(lhs.max_abs_diff(&rhs));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn e_half() -> f64 {
        (-0.5f64).exp()
    }

    #[test]
    fn torus_reference_values() {
        let cos1 = torus_form("cos1").unwrap();
        assert!((torus_heat(&cos1, Quantity::Heat, 1.0, [0.0, 0.0], &[1.0]).unwrap() - e_half()).abs() < 1e-15);
        let d = torus_heat(&cos1, Quantity::Derivative, 1.0, [FRAC_PI_2, 0.0], &[1.0, 0.0]).unwrap();
        assert!((d + e_half()).abs() < 1e-15);
        let lap = torus_heat(&cos1, Quantity::Laplacian, 1.0, [0.0, 0.0], &[1.0]).unwrap();
        assert!((lap + e_half()).abs() < 1e-15);

        let sin1_d1 = torus_form("sin1_d1").unwrap();
        let lap = torus_heat(&sin1_d1, Quantity::Laplacian, 1.0, [FRAC_PI_2, 0.0], &[1.0, 0.0]).unwrap();
        assert!((lap + e_half()).abs() < 1e-15);
        let ds = torus_heat(&sin1_d1, Quantity::Codifferential, 1.0, [0.0, 0.0], &[1.0]).unwrap();
        assert!((ds + e_half()).abs() < 1e-15);

        let sin2_d1 = torus_form("sin2_d1").unwrap();
        let pt = torus_heat(&sin2_d1, Quantity::Heat, 1.0, [0.0, FRAC_PI_2], &[1.0, 0.0]).unwrap();
        assert!((pt - e_half()).abs() < 1e-15);
        let d = torus_heat(&sin2_d1, Quantity::Derivative, 1.0, [0.0, 0.0], &[1.0]).unwrap();
        assert!((d + e_half()).abs() < 1e-15);

        let d1 = torus_form("d1").unwrap();
        assert_eq!(torus_heat(&d1, Quantity::Codifferential, 1.0, [0.3, 0.2], &[1.0]).unwrap(), 0.0);
        assert!(torus_heat(&cos1, Quantity::Codifferential, 1.0, [0.0, 0.0], &[1.0]).is_none());
        assert!(torus_heat(&cos1, Quantity::Heat, 1.0, [0.0, 0.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn torus_laplacian_is_minus_k_squared() {
        for name in ["cos1", "sin1", "sin1_d1", "sin2_d1", "cos2_d2", "cos1_d12", "d1", "const1"] {
            let f = torus_form(name).unwrap();
            let via_d = {
                let a = f.d().codifferential();
                let b = f.codifferential().d();
                let mut modes = a.modes;
                modes.extend(b.modes);
                FourierForm { degree: f.degree, modes }
            };
            let v: Vec<f64> = if f.degree == 1 { vec![0.3, -0.7] } else { vec![1.3] };
            for t in [0.0, 0.5, 1.0] {
                for theta in [[0.1, 0.2], [2.0, -1.0]] {
                    let mode = &f.modes[0];
                    let k2 = mode.k_squared();
                    let expect = -k2 * (-0.5 * k2 * t).exp() * f.evaluate(theta, &v);
                    let lap = torus_heat(&f, Quantity::Laplacian, t, theta, &v).unwrap();
                    assert!((lap - expect).abs() < 1e-14, "{name}");
                    // Δ = −(dd* + d*d)
                    assert!((via_d.evaluate(theta, &v) + f.laplacian().evaluate(theta, &v)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn sphere_reference_values() {
        let x0 = [0.0, 0.0, 1.0];
        let frame = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let z = SphereForm::Height;
        assert!((sphere_heat(z, Quantity::Heat, 2, 1.0, &x0, &frame, &[1.0]).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(sphere_heat(z, Quantity::Derivative, 2, 1.0, &x0, &frame, &[1.0, 0.0]).unwrap(), 0.0);
        let tilted = [0.6, 0.0, 0.8];
        let f2 = vec![vec![0.8, 0.0, -0.6], vec![0.0, 1.0, 0.0]];
        let d = sphere_heat(z, Quantity::Derivative, 2, 1.0, &tilted, &f2, &[1.0, 0.0]).unwrap();
        assert!((d + 0.6 * (-1.0f64).exp()).abs() < 1e-15);
        let dz = SphereForm::HeightDifferential;
        let ds = sphere_heat(dz, Quantity::Codifferential, 2, 1.0, &tilted, &f2, &[1.0]).unwrap();
        assert!((ds - 2.0 * 0.8 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(sphere_heat(z, Quantity::Codifferential, 2, 1.0, &x0, &frame, &[1.0]).is_none());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(constant_curvature_weitzenbock(2, 1, 1.0), 1.0);
        assert_eq!(constant_curvature_weitzenbock(5, 0, 3.0), 0.0);
        assert_eq!(constant_curvature_weitzenbock(2, 2, 1.0), 0.0);
        assert!((damping_closed_form(2, 1, 1.0, 1.0) - e_half()).abs() < 1e-16);
        assert_eq!(damping_closed_form(2, 1, 0.0, 3.0), 1.0);
        assert!((damping_closed_form(3, 1, 1.0, 2.0) - (-2.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn brute_force_weitzenbock_is_scalar() {
        for n in 1..=5 {
            for q in 0..=n {
                for kappa in [1.0, -0.5] {
                    let m = weitzenbock_brute_force(n, q, kappa);
                    let c = constant_curvature_weitzenbock(n, q, kappa);
                    for (i, row) in m.iter().enumerate() {
                        for (j, &v) in row.iter().enumerate() {
                            let target = if i == j { c } else { 0.0 };
                            assert!((v - target).abs() < 1e-12, "n={n} q={q} ({i},{j}): {v}");
                        }
                    }
                }
            }
        }
        // Ricci anchor: ℛ¹ = (n − 1)κ.
        assert_eq!(weitzenbock_brute_force(3, 1, 1.0)[0][0], 2.0);
    }

    #[test]
    fn star_identities_hold() {
        for n in [2, 3, 5] {
            let report = star_identity_suite(n, 300, 1);
            assert!(report.passed(1e-12), "{report:?}");
        }
    }

    #[test]
    fn rotations_are_special_orthogonal() {
        let mut rng = path_rng(0, 0, 0);
        for n in 1..6 {
            let r = random_rotation(&mut rng, n);
            assert!((r.transpose() * &r - DMatrix::identity(n, n)).amax() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }
}
