//! Test forms: restrictions of ambient polynomial forms, a catalog of named
//! forms per model, and their analytic `d`, `d*` and `Δ` companions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exterior::{binomial, pushforward, tables, MultiVector, MAX_DIM};
use crate::geometry::{Frame, ManifoldModel};
use crate::transport::path_rng;

/// A q-form on a manifold model, evaluated on multivectors given in the
/// coordinates of an orthonormal frame at `x`.
pub trait FormField: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn degree(&self) -> i32;
    fn model(&self) -> ManifoldModel;
    fn evaluate(&self, x: &[f64], frame: &Frame, v: &MultiVector) -> f64;
    /// Upper bound on `|φ_x(V)|` over points and unit multivectors.
    fn sup_norm(&self) -> f64;
    fn d(&self) -> Option<Arc<dyn FormField>> {
        None
    }
    fn dstar(&self) -> Option<Arc<dyn FormField>> {
        None
    }
    fn laplacian(&self) -> Option<Arc<dyn FormField>> {
        None
    }
}

type Exponents = [u8; MAX_DIM];

/// Polynomial in the ambient coordinates.
#[derive(Clone, PartialEq)]
pub struct Poly {
    vars: usize,
    terms: BTreeMap<Exponents, f64>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: String = e[..self.vars]
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0)
                    .map(|(i, &p)| if p == 1 { format!("y{}", i + 1) } else { format!("y{}^{p}", i + 1) })
                    .collect::<Vec<_>>()
                    .join("·");
                if mono.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c}·{mono}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Poly {
    pub fn zero(vars: usize) -> Self {
        Poly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: f64) -> Self {
        let mut p = Poly::zero(vars);
        p.add_term([0; MAX_DIM], c);
        p
    }

    /// The coordinate `y_i` (zero-based).
    pub fn var(vars: usize, i: usize) -> Self {
        let mut e = [0; MAX_DIM];
        e[i] = 1;
        let mut p = Poly::zero(vars);
        p.add_term(e, 1.0);
        p
    }

    fn add_term(&mut self, e: Exponents, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(e).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(*e, s * c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let mut e = [0; MAX_DIM];
                for i in 0..MAX_DIM {
                    e[i] = ea[i] + eb[i];
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.vars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut d = *e;
                d[i] -= 1;
                out.add_term(d, c * e[i] as f64);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e[..self.vars]
                    .iter()
                    .zip(x)
                    .fold(*c, |acc, (&p, &xi)| acc * xi.powi(p as i32))
            })
            .sum()
    }
}

/// Restriction to a manifold of an ambient polynomial form
/// `Σ_I p_I(y) dy^I`, components in lexicographic order of `I`.
#[derive(Clone)]
pub struct PolyForm {
    name: String,
    model: ManifoldModel,
    degree: i32,
    comps: Vec<Poly>,
    sup: Option<f64>,
}

impl fmt::Debug for PolyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolyForm")
            .field("name", &self.name)
            .field("model", &self.model)
            .field("degree", &self.degree)
            .field("comps", &self.comps)
            .finish()
    }
}

impl PolyForm {
    pub fn new(name: &str, model: ManifoldModel, degree: i32, comps: Vec<Poly>) -> Result<Self> {
        let m = model.ambient_dim();
        if degree < 0 || comps.len() != binomial(m, degree) {
            return Err(Error::invalid(format!(
                "ambient {degree}-form on R^{m} needs {} components",
                binomial(m, degree)
            )));
        }
        Ok(PolyForm {
            name: name.to_string(),
            model,
            degree,
            comps,
            sup: None,
        })
    }

    pub fn function(name: &str, model: ManifoldModel, p: Poly) -> Self {
        PolyForm::new(name, model, 0, vec![p]).expect("one component")
    }

    /// Exterior product of polynomial covectors.
    pub fn wedge_covectors(name: &str, model: ManifoldModel, covectors: &[Vec<Poly>]) -> Result<Self> {
        let m = model.ambient_dim();
        let mut form = PolyForm::function(name, model, Poly::constant(m, 1.0));
        for a in covectors {
            form = form.wedge_covector(a);
        }
        form.name = name.to_string();
        Ok(form)
    }

    fn zero(name: &str, model: ManifoldModel, degree: i32) -> Self {
        let m = model.ambient_dim();
        PolyForm {
            name: name.to_string(),
            model,
            degree,
            comps: vec![Poly::zero(m); binomial(m, degree)],
            sup: None,
        }
    }

    pub fn with_sup_norm(mut self, sup: f64) -> Self {
        self.sup = Some(sup);
        self
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    fn renamed(mut self, name: String) -> Self {
        self.name = name;
        self
    }

    pub fn scale(&self, s: f64) -> PolyForm {
        let mut out = self.clone();
        out.comps = out.comps.iter().map(|p| p.scale(s)).collect();
        out.sup = None;
        out
    }

    pub fn add(&self, other: &PolyForm) -> PolyForm {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        out.comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect();
        out.sup = None;
        out
    }

    pub fn multiply(&self, f: &Poly) -> PolyForm {
        let mut out = self.clone();
        out.comps = out.comps.iter().map(|p| p.mul(f)).collect();
        out.sup = None;
        out
    }

    /// `self ∧ a` for a polynomial covector `a`.
    fn wedge_covector(&self, a: &[Poly]) -> PolyForm {
        let m = self.model.ambient_dim();
        let t = tables(m).expect("ambient dimension");
        let mut out = PolyForm::zero(&self.name, self.model, self.degree + 1);
        for (i, &mask) in t.subsets(self.degree).iter().enumerate() {
            for (j, aj) in a.iter().enumerate() {
                if mask & (1 << j) != 0 || aj.is_zero() {
                    continue;
                }
                // dy^I ∧ dy^j = (−1)^{#{i ∈ I : i > j}} dy^{I ∪ j}
                let sign = if (mask >> (j + 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let target = t.position(mask | (1 << j));
                out.comps[target] = out.comps[target].add(&self.comps[i].mul(aj).scale(sign));
            }
        }
        out
    }

    /// Ambient exterior derivative; commutes with restriction.
    pub fn exterior_derivative(&self) -> PolyForm {
        let m = self.model.ambient_dim();
        let t = tables(m).expect("ambient dimension");
        let mut out = PolyForm::zero(&format!("d({})", self.name), self.model, self.degree + 1);
        for (i, &mask) in t.subsets(self.degree).iter().enumerate() {
            for j in 0..m {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let dp = self.comps[i].derivative(j);
                if dp.is_zero() {
                    continue;
                }
                // dy^j ∧ dy^I = (−1)^{#{i ∈ I : i < j}} dy^{I ∪ j}
                let below = (mask & ((1u32 << j) - 1)).count_ones();
                let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
                let target = t.position(mask | (1 << j));
                out.comps[target] = out.comps[target].add(&dp.scale(sign));
            }
        }
        out
    }

    /// Polynomial representative of the intrinsic Hodge star, valid on the
    /// manifold. Available on the torus and the 2-sphere.
    pub fn hodge_star(&self) -> Result<PolyForm> {
        let model = self.model;
        let m = model.ambient_dim();
        let n = model.intrinsic_dim() as i32;
        let name = format!("*({})", self.name);
        if self.degree > n {
            return Err(Error::invalid("star of a form above the top degree"));
        }
        let (e1, e2): (Vec<Poly>, Vec<Poly>) = match model {
            ManifoldModel::FlatTorus2 => {
                let y = |i| Poly::var(4, i);
                let z = || Poly::zero(4);
                (
                    vec![y(1).scale(-1.0), y(0), z(), z()],
                    vec![z(), z(), y(3).scale(-1.0), y(2)],
                )
            }
            ManifoldModel::Sphere { n: 2 } => {
                // Columns of the oriented frame are not polynomial; the
                // sphere cases below use the normal field instead.
                (Vec::new(), Vec::new())
            }
            ManifoldModel::Sphere { n } => {
                return Err(Error::NotImplemented(format!("polynomial Hodge star on S^{n}")))
            }
        };
        let out = match (model, self.degree) {
            (ManifoldModel::FlatTorus2, 0) => {
                PolyForm::wedge_covectors(&name, model, &[e1, e2])?.multiply(&self.comps[0])
            }
            (ManifoldModel::FlatTorus2, 1) => {
                let pair = |e: &[Poly]| {
                    self.comps.iter().zip(e).fold(Poly::zero(m), |acc, (a, b)| acc.add(&a.mul(b)))
                };
                let (a1, a2) = (pair(&e1), pair(&e2));
                let comps = (0..m).map(|i| a1.mul(&e2[i]).sub(&a2.mul(&e1[i]))).collect();
                PolyForm::new(&name, model, 1, comps)?
            }
            (ManifoldModel::FlatTorus2, 2) => {
                let vol = PolyForm::wedge_covectors(&name, model, &[e1, e2])?;
                let s = self
                    .comps
                    .iter()
                    .zip(&vol.comps)
                    .fold(Poly::zero(m), |acc, (a, b)| acc.add(&a.mul(b)));
                PolyForm::function(&name, model, s)
            }
            (_, 0) => {
                // vol = y1 dy2∧dy3 − y2 dy1∧dy3 + y3 dy1∧dy2; order (12, 13, 23)
                let y = |i| Poly::var(3, i);
                let comps = vec![y(2), y(1).scale(-1.0), y(0)];
                PolyForm::new(&name, model, 2, comps)?.multiply(&self.comps[0])
            }
            (_, 1) => {
                // Covector y × a.
                let y = |i| Poly::var(3, i);
                let a = &self.comps;
                let comps = vec![
                    y(1).mul(&a[2]).sub(&y(2).mul(&a[1])),
                    y(2).mul(&a[0]).sub(&y(0).mul(&a[2])),
                    y(0).mul(&a[1]).sub(&y(1).mul(&a[0])),
                ];
                PolyForm::new(&name, model, 1, comps)?
            }
            (_, _) => {
                let y = |i| Poly::var(3, i);
                let w = &self.comps;
                let s = w[2].mul(&y(0)).sub(&w[1].mul(&y(1))).add(&w[0].mul(&y(2)));
                PolyForm::function(&name, model, s)
            }
        };
        Ok(out.renamed(name))
    }

    /// `d* = (−1)^{n(q−1)+1} * d *`.
    pub fn codifferential(&self) -> Result<PolyForm> {
        let n = self.model.intrinsic_dim() as i32;
        let q = self.degree;
        if q == 0 {
            return Err(Error::invalid("codifferential of a function"));
        }
        let sign = if (n * (q - 1) + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let out = self.hodge_star()?.exterior_derivative().hodge_star()?.scale(sign);
        Ok(out.renamed(format!("d*({})", self.name)))
    }

    /// `Δ = −(d d* + d* d)`.
    pub fn hodge_laplacian(&self) -> Result<PolyForm> {
        let n = self.model.intrinsic_dim() as i32;
        let q = self.degree;
        let mut acc = PolyForm::zero("", self.model, q);
        if q >= 1 {
            acc = acc.add(&self.codifferential()?.exterior_derivative());
        }
        if q < n {
            acc = acc.add(&self.exterior_derivative().codifferential()?);
        }
        Ok(acc.scale(-1.0).renamed(format!("Δ({})", self.name)))
    }

    /// Largest value of `|φ_x|` over a fixed sample of points.
    pub fn sampled_sup_norm(&self, samples: usize) -> f64 {
        let mut rng = path_rng(0x5eed, 0xf0f0, 0);
        let n = self.model.intrinsic_dim();
        let basis = match MultiVector::basis_labels(n, self.degree) {
            Ok(b) => b,
            Err(_) => return 0.0,
        };
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = self.model.random_point(&mut rng);
            let frame = match self.model.initial_frame(&x) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let sq: f64 = basis
                .iter()
                .map(|idx| {
                    let e = MultiVector::basis(n, idx).expect("basis");
                    self.evaluate(&x, &frame, &e).powi(2)
                })
                .sum();
            worst = worst.max(sq.sqrt());
        }
        worst
    }
}

impl FormField for PolyForm {
    fn name(&self) -> &str {
        &self.name
    }

    fn degree(&self) -> i32 {
        self.degree
    }

    fn model(&self) -> ManifoldModel {
        self.model
    }

    fn evaluate(&self, x: &[f64], frame: &Frame, v: &MultiVector) -> f64 {
        if v.degree() != self.degree || v.is_degenerate() {
            return 0.0;
        }
        let ambient = pushforward(&frame.matrix(), v).expect("frame matches form");
        self.comps
            .iter()
            .zip(ambient.coeffs())
            .filter(|(_, &c)| c != 0.0)
            .map(|(p, c)| p.eval(x) * c)
            .sum()
    }

    fn sup_norm(&self) -> f64 {
        self.sup.unwrap_or_else(|| self.sampled_sup_norm(20_000))
    }

    fn d(&self) -> Option<Arc<dyn FormField>> {
        let n = self.model.intrinsic_dim() as i32;
        (self.degree < n).then(|| Arc::new(self.exterior_derivative()) as Arc<dyn FormField>)
    }

    fn dstar(&self) -> Option<Arc<dyn FormField>> {
        self.codifferential().ok().map(|f| Arc::new(f) as Arc<dyn FormField>)
    }

    fn laplacian(&self) -> Option<Arc<dyn FormField>> {
        self.hodge_laplacian().ok().map(|f| Arc::new(f) as Arc<dyn FormField>)
    }
}

/// `*φ`, evaluated through the star on multivectors:
/// `(*φ)(V) = (−1)^{q(n−q)} φ(*V)`.
#[derive(Debug, Clone)]
pub struct HodgeDual {
    inner: Arc<dyn FormField>,
    name: String,
}

impl HodgeDual {
    pub fn new(inner: Arc<dyn FormField>) -> Self {
        let name = format!("*({})", inner.name());
        HodgeDual { inner, name }
    }
}

impl FormField for HodgeDual {
    fn name(&self) -> &str {
        &self.name
    }

    fn degree(&self) -> i32 {
        self.inner.model().intrinsic_dim() as i32 - self.inner.degree()
    }

    fn model(&self) -> ManifoldModel {
        self.inner.model()
    }

    fn evaluate(&self, x: &[f64], frame: &Frame, v: &MultiVector) -> f64 {
        let (n, q) = (self.inner.model().intrinsic_dim() as i32, self.inner.degree());
        let sign = if (q * (n - q)) % 2 == 0 { 1.0 } else { -1.0 };
        sign * self.inner.evaluate(x, frame, &v.hodge_star())
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }
}

/// Names of the shipped forms for a model.
pub fn catalog(model: &ManifoldModel) -> Vec<&'static str> {
    match model {
        ManifoldModel::FlatTorus2 => vec![
            "const1", "cos1", "sin1", "cos2", "d1", "sin1_d1", "sin2_d1", "cos2_d2", "cos1_d12",
        ],
        ManifoldModel::Sphere { .. } => vec!["const1", "z", "dz", "z_dx"],
    }
}

/// Looks up a shipped form by name.
pub fn lookup(model: &ManifoldModel, name: &str) -> Result<Arc<dyn FormField>> {
    Ok(Arc::new(lookup_poly(model, name)?))
}

/// Shipped form as a concrete polynomial form.
pub fn lookup_poly(model: &ManifoldModel, name: &str) -> Result<PolyForm> {
    let m = model.ambient_dim();
    let y = |i| Poly::var(m, i);
    let form = match (model, name) {
        (_, "const1") => PolyForm::function(name, *model, Poly::constant(m, 1.0)),
        (ManifoldModel::FlatTorus2, _) => {
            let dtheta1 = vec![y(1).scale(-1.0), y(0), Poly::zero(4), Poly::zero(4)];
            let dtheta2 = vec![Poly::zero(4), Poly::zero(4), y(3).scale(-1.0), y(2)];
            let one_form = |f: Poly, d: &[Poly]| {
                PolyForm::wedge_covectors(name, *model, &[d.to_vec()])
                    .expect("covector")
                    .multiply(&f)
            };
            match name {
                "cos1" => PolyForm::function(name, *model, y(0)),
                "sin1" => PolyForm::function(name, *model, y(1)),
                "cos2" => PolyForm::function(name, *model, y(2)),
                "d1" => one_form(Poly::constant(4, 1.0), &dtheta1),
                "sin1_d1" => one_form(y(1), &dtheta1),
                "sin2_d1" => one_form(y(3), &dtheta1),
                "cos2_d2" => one_form(y(2), &dtheta2),
                "cos1_d12" => PolyForm::wedge_covectors(name, *model, &[dtheta1, dtheta2])?.multiply(&y(0)),
                _ => return Err(unknown(model, name)),
            }
        }
        (ManifoldModel::Sphere { .. }, _) => {
            let last = m - 1;
            let dy = |i: usize| {
                let mut a = vec![Poly::zero(m); m];
                a[i] = Poly::constant(m, 1.0);
                a
            };
            match name {
                "z" => PolyForm::function(name, *model, y(last)),
                "dz" => PolyForm::wedge_covectors(name, *model, &[dy(last)])?,
                "z_dx" => PolyForm::wedge_covectors(name, *model, &[dy(0)])?.multiply(&y(last)),
                _ => return Err(unknown(model, name)),
            }
        }
    };
    Ok(form.renamed(name.to_string()).with_sup_norm(1.0))
}

fn unknown(model: &ManifoldModel, name: &str) -> Error {
    Error::invalid(format!(
        "unknown form '{name}' for {} (available: {})",
        model.name(),
        catalog(model).join(", ")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn torus_eval(form: &dyn FormField, angles: [f64; 2], v: &MultiVector) -> f64 {
        let t = ManifoldModel::FlatTorus2;
        let x = t.embed(&angles).unwrap();
        form.evaluate(&x, &t.initial_frame(&x).unwrap(), v)
    }

    #[test]
    fn polynomial_arithmetic() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let p = x.mul(&x).add(&x.mul(&y).scale(3.0)).sub(&Poly::constant(2, 1.0));
        assert_eq!(p.eval(&[2.0, 5.0]), 4.0 + 30.0 - 1.0);
        assert_eq!(p.derivative(0).eval(&[2.0, 5.0]), 4.0 + 15.0);
        assert_eq!(p.derivative(1).eval(&[2.0, 5.0]), 6.0);
        assert!(x.sub(&x).is_zero());
        assert_eq!(format!("{:?}", Poly::zero(2)), "0");
    }

    #[test]
    fn torus_catalog_values() {
        let e1 = MultiVector::basis(2, &[0]).unwrap();
        let e2 = MultiVector::basis(2, &[1]).unwrap();
        let e12 = MultiVector::basis(2, &[0, 1]).unwrap();
        let one = MultiVector::scalar(2, 1.0);
        let t = ManifoldModel::FlatTorus2;
        let a = [0.7, 1.9];
        let f = |name| lookup(&t, name).unwrap();
        assert!((torus_eval(&*f("cos1"), a, &one) - 0.7f64.cos()).abs() < 1e-15);
        assert!((torus_eval(&*f("sin1_d1"), a, &e1) - 0.7f64.sin()).abs() < 1e-15);
        assert!(torus_eval(&*f("sin1_d1"), a, &e2).abs() < 1e-15);
        assert!((torus_eval(&*f("sin2_d1"), a, &e1) - 1.9f64.sin()).abs() < 1e-15);
        assert!((torus_eval(&*f("cos2_d2"), a, &e2) - 1.9f64.cos()).abs() < 1e-15);
        assert!((torus_eval(&*f("cos1_d12"), a, &e12) - 0.7f64.cos()).abs() < 1e-15);
        assert!(lookup(&t, "nope").is_err());
        assert!(lookup(&t, "z").is_err());
    }

    #[test]
    fn torus_companions_match_fourier_calculus() {
        let t = ManifoldModel::FlatTorus2;
        let e1 = MultiVector::basis(2, &[0]).unwrap();
        let e12 = MultiVector::basis(2, &[0, 1]).unwrap();
        let one = MultiVector::scalar(2, 1.0);
        for a in [[0.0, 0.0], [FRAC_PI_2, 0.3], [2.2, 4.1]] {
            // d cosθ₁ = −sinθ₁ dθ₁
            let d = lookup(&t, "cos1").unwrap().d().unwrap();
            assert!((torus_eval(&*d, a, &e1) + a[0].sin()).abs() < 1e-14);
            // d(sinθ₂ dθ₁) = −cosθ₂ dθ₁∧dθ₂
            let d = lookup(&t, "sin2_d1").unwrap().d().unwrap();
            assert!((torus_eval(&*d, a, &e12) + a[1].cos()).abs() < 1e-14);
            // d*(sinθ₁ dθ₁) = −cosθ₁
            let ds = lookup(&t, "sin1_d1").unwrap().dstar().unwrap();
            assert!((torus_eval(&*ds, a, &one) + a[0].cos()).abs() < 1e-14);
            // Δ(sinθ₁ dθ₁) = −sinθ₁ dθ₁
            let lap = lookup(&t, "sin1_d1").unwrap().laplacian().unwrap();
            assert!((torus_eval(&*lap, a, &e1) + a[0].sin()).abs() < 1e-14);
            // Δ cosθ₁ = −cosθ₁
            let lap = lookup(&t, "cos1").unwrap().laplacian().unwrap();
            assert!((torus_eval(&*lap, a, &one) + a[0].cos()).abs() < 1e-14);
            // dθ₁ is harmonic.
            let d1 = lookup(&t, "d1").unwrap();
            assert!(torus_eval(&*d1.dstar().unwrap(), a, &one).abs() < 1e-14);
            assert!(torus_eval(&*d1.d().unwrap(), a, &e12).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_coordinate_functions_are_eigenfunctions() {
        for n in [2usize] {
            let s = ManifoldModel::Sphere { n };
            let z = lookup(&s, "z").unwrap();
            let dz = lookup(&s, "dz").unwrap();
            let lap_z = z.laplacian().unwrap();
            let lap_dz = dz.laplacian().unwrap();
            let dstar_dz = dz.dstar().unwrap();
            let mut rng = path_rng(1, 1, 1);
            for _ in 0..20 {
                let x = s.random_point(&mut rng);
                let f = s.initial_frame(&x).unwrap();
                let one = MultiVector::scalar(n, 1.0);
                let zx = x[n];
                assert!((lap_z.evaluate(&x, &f, &one) + n as f64 * zx).abs() < 1e-12);
                assert!((dstar_dz.evaluate(&x, &f, &one) - n as f64 * zx).abs() < 1e-12);
                for j in 0..n {
                    let e = MultiVector::basis(n, &[j]).unwrap();
                    let val = dz.evaluate(&x, &f, &e);
                    assert!((val - f.vector(j)[n]).abs() < 1e-14);
                    assert!((lap_dz.evaluate(&x, &f, &e) + n as f64 * val).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn polynomial_star_matches_multivector_star() {
        // (*φ)(V) from the polynomial representative equals (−1)^{q(n−q)} φ(*V).
        let mut rng = path_rng(2, 2, 2);
        for model in [ManifoldModel::FlatTorus2, ManifoldModel::Sphere { n: 2 }] {
            for name in catalog(&model) {
                let phi = lookup_poly(&model, name).unwrap();
                let star = phi.hodge_star().unwrap();
                let dual = HodgeDual::new(Arc::new(phi.clone()));
                assert_eq!(dual.degree(), star.degree());
                for _ in 0..5 {
                    let x = model.random_point(&mut rng);
                    let f = model.initial_frame(&x).unwrap();
                    for idx in MultiVector::basis_labels(2, 2 - phi.degree()).unwrap() {
                        let v = MultiVector::basis(2, &idx).unwrap();
                        let a = dual.evaluate(&x, &f, &v);
                        let b = star.evaluate(&x, &f, &v);
                        assert!((a - b).abs() < 1e-13, "{model:?} {name}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn double_star_sign() {
        let s = ManifoldModel::Sphere { n: 2 };
        let phi = lookup_poly(&s, "z_dx").unwrap();
        let twice = phi.hodge_star().unwrap().hodge_star().unwrap();
        let mut rng = path_rng(3, 3, 3);
        for _ in 0..10 {
            let x = s.random_point(&mut rng);
            let f = s.initial_frame(&x).unwrap();
            for j in 0..2 {
                let e = MultiVector::basis(2, &[j]).unwrap();
                assert!((twice.evaluate(&x, &f, &e) + phi.evaluate(&x, &f, &e)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sphere_d_of_z_dx() {
        // d(z dx) = dz∧dx = y·vol on S².
        let s = ManifoldModel::Sphere { n: 2 };
        let d = lookup(&s, "z_dx").unwrap().d().unwrap();
        let mut rng = path_rng(4, 4, 4);
        let e12 = MultiVector::basis(2, &[0, 1]).unwrap();
        for _ in 0..10 {
            let x = s.random_point(&mut rng);
            let f = s.initial_frame(&x).unwrap();
            assert!((d.evaluate(&x, &f, &e12) - x[1]).abs() < 1e-13);
        }
    }

    #[test]
    fn sup_norms() {
        for model in [ManifoldModel::FlatTorus2, ManifoldModel::Sphere { n: 2 }] {
            for name in catalog(&model) {
                let f = lookup(&model, name).unwrap();
                let sampled = lookup_poly(&model, name).unwrap().sampled_sup_norm(2000);
                assert!(sampled <= f.sup_norm() + 1e-12, "{name}: {sampled}");
                assert!(sampled > 0.9, "{name}: {sampled}");
            }
        }
    }

    #[test]
    fn sphere_n_has_d_but_no_star() {
        let s = ManifoldModel::Sphere { n: 3 };
        let z = lookup(&s, "z").unwrap();
        assert!(z.d().is_some());
        assert!(z.laplacian().is_none());
        assert!(lookup(&s, "dz").unwrap().dstar().is_none());
    }
}
