//! Exterior algebra of an oriented `n`-dimensional inner-product space.
//!
//! A basis q-vector `e_I` is labelled by a strictly increasing subset `I` of
//! `{0, .., n-1}`; the basis of `Λ^q` is listed in lexicographic order of those
//! subsets. Coefficients are taken with respect to an orthonormal basis, so the
//! induced inner product on `Λ^q` is the plain dot product of coefficient
//! arrays and `e_0 ∧ .. ∧ e_{n-1}` is the positive volume element.
//!
//! Degrees outside `[0, n]` are legal and denote the zero space: such a
//! multivector has an empty coefficient array.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest supported dimension. Sign tables are dense in `2^n`.
pub const MAX_DIM: usize = 8;

/// `binomial(n, k)`, zero when `k` is outside `[0, n]`.
pub fn binomial(n: usize, k: i32) -> usize {
    if k < 0 || k as usize > n {
        return 0;
    }
    let k = (k as usize).min(n - k as usize);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Sign of `e_A ∧ e_B = sign · e_{A ∪ B}` for disjoint masks.
fn wedge_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let y = rest.trailing_zeros();
        swaps += (a >> (y + 1)).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    pub target: u32,
    /// `0.0` marks a vanishing product.
    pub sign: f64,
}

/// Precomputed index and sign tables for one dimension.
#[derive(Debug)]
pub(crate) struct Tables {
    dim: usize,
    subsets: Vec<Vec<u32>>,
    position: Vec<u32>,
    /// `wedge_vec[q][i * dim + a]`: `e_a ∧ (basis i of Λ^q)`.
    wedge_vec: Vec<Vec<Entry>>,
    /// `interior[q][i * dim + a]`: `ι_{e_a}(basis i of Λ^q)`.
    interior: Vec<Vec<Entry>>,
    /// `star[q][i]`: Hodge star of basis `i` of `Λ^q`.
    star: Vec<Vec<Entry>>,
}

impl Tables {
    fn build(dim: usize) -> Self {
        let full = (1u32 << dim) - 1;
        let mut subsets: Vec<Vec<u32>> = vec![Vec::new(); dim + 1];
        // Lexicographic order of sorted index tuples.
        fn extend(start: usize, dim: usize, mask: u32, depth: usize, out: &mut Vec<Vec<u32>>) {
            out[depth].push(mask);
            for next in start..dim {
                extend(next + 1, dim, mask | (1 << next), depth + 1, out);
            }
        }
        extend(0, dim, 0, 0, &mut subsets);
        for (q, list) in subsets.iter_mut().enumerate() {
            list.sort_by(|&a, &b| lex_key(a, dim).cmp(&lex_key(b, dim)));
            debug_assert_eq!(list.len(), binomial(dim, q as i32));
        }
        let mut position = vec![0u32; 1 << dim];
        for list in &subsets {
            for (i, &mask) in list.iter().enumerate() {
                position[mask as usize] = i as u32;
            }
        }

        let none = Entry { target: 0, sign: 0.0 };
        let mut wedge_vec = Vec::with_capacity(dim + 1);
        let mut interior = Vec::with_capacity(dim + 1);
        let mut star = Vec::with_capacity(dim + 1);
        for list in &subsets {
            let mut w = vec![none; list.len() * dim];
            let mut ins = vec![none; list.len() * dim];
            let mut st = Vec::with_capacity(list.len());
            for (i, &mask) in list.iter().enumerate() {
                for a in 0..dim {
                    let bit = 1u32 << a;
                    if mask & bit == 0 {
                        w[i * dim + a] = Entry {
                            target: position[(mask | bit) as usize],
                            sign: wedge_sign(bit, mask),
                        };
                    } else {
                        let below = (mask & (bit - 1)).count_ones();
                        ins[i * dim + a] = Entry {
                            target: position[(mask & !bit) as usize],
                            sign: if below % 2 == 0 { 1.0 } else { -1.0 },
                        };
                    }
                }
                let complement = full & !mask;
                st.push(Entry {
                    target: position[complement as usize],
                    sign: wedge_sign(mask, complement),
                });
            }
            wedge_vec.push(w);
            interior.push(ins);
            star.push(st);
        }
        Tables {
            dim,
            subsets,
            position,
            wedge_vec,
            interior,
            star,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn subsets(&self, q: i32) -> &[u32] {
        if q < 0 || q as usize > self.dim {
            &[]
        } else {
            &self.subsets[q as usize]
        }
    }

    pub fn position(&self, mask: u32) -> usize {
        self.position[mask as usize] as usize
    }

    /// `out = u ∧ v` for `u ∈ Λ^1`, `v ∈ Λ^q`.
    pub fn wedge_vector_into(&self, u: &[f64], v: &[f64], q: i32, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        if q < 0 || q as usize >= self.dim {
            return;
        }
        let n = self.dim;
        let table = &self.wedge_vec[q as usize];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (a, &ua) in u.iter().enumerate() {
                let e = table[i * n + a];
                if e.sign != 0.0 {
                    out[e.target as usize] += e.sign * ua * vi;
                }
            }
        }
    }

    /// `out = ι_u v` for `v ∈ Λ^q`.
    pub fn interior_into(&self, u: &[f64], v: &[f64], q: i32, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        if q < 1 || q as usize > self.dim {
            return;
        }
        let n = self.dim;
        let table = &self.interior[q as usize];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (a, &ua) in u.iter().enumerate() {
                let e = table[i * n + a];
                if e.sign != 0.0 {
                    out[e.target as usize] += e.sign * ua * vi;
                }
            }
        }
    }

    pub fn star_entry(&self, q: usize, i: usize) -> Entry {
        self.star[q][i]
    }
}

fn lex_key(mask: u32, dim: usize) -> Vec<u32> {
    (0..dim as u32).filter(|b| mask & (1 << b) != 0).collect()
}

static TABLES: [OnceLock<Tables>; MAX_DIM + 1] = [const { OnceLock::new() }; MAX_DIM + 1];

pub(crate) fn tables(dim: usize) -> Result<&'static Tables> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::invalid(format!(
            "dimension {dim} outside supported range 1..={MAX_DIM}"
        )));
    }
    Ok(TABLES[dim].get_or_init(|| Tables::build(dim)))
}

fn tables_or_panic(dim: usize) -> &'static Tables {
    tables(dim).unwrap_or_else(|e| panic!("{e}"))
}

/// Element of `Λ^q R^n`.
#[derive(Clone, PartialEq)]
pub struct MultiVector {
    dim: usize,
    degree: i32,
    coeffs: Vec<f64>,
}

impl fmt::Debug for MultiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ^{}(R^{}){:?}", self.degree, self.dim, self.coeffs)
    }
}

impl MultiVector {
    /// Zero element. Panics if `dim` is outside `1..=MAX_DIM`.
    pub fn zero(dim: usize, degree: i32) -> Self {
        tables_or_panic(dim);
        MultiVector {
            dim,
            degree,
            coeffs: vec![0.0; binomial(dim, degree)],
        }
    }

    pub fn from_coeffs(dim: usize, degree: i32, coeffs: Vec<f64>) -> Result<Self> {
        tables(dim)?;
        let expected = binomial(dim, degree);
        if coeffs.len() != expected {
            return Err(Error::invalid(format!(
                "Λ^{degree}(R^{dim}) needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(MultiVector {
            dim,
            degree,
            coeffs,
        })
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut v = Self::zero(dim, 0);
        v.coeffs[0] = value;
        v
    }

    pub fn vector(components: &[f64]) -> Result<Self> {
        Self::from_coeffs(components.len(), 1, components.to_vec())
    }

    /// `e_{i_1} ∧ .. ∧ e_{i_q}` for distinct zero-based indices in any order.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        let t = tables(dim)?;
        let mut v = MultiVector::scalar(dim, 1.0);
        for &i in indices.iter().rev() {
            if i >= dim {
                return Err(Error::invalid(format!("basis index {i} >= dimension {dim}")));
            }
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            let mut out = vec![0.0; binomial(dim, v.degree + 1)];
            t.wedge_vector_into(&e, &v.coeffs, v.degree, &mut out);
            v = MultiVector {
                dim,
                degree: v.degree + 1,
                coeffs: out,
            };
        }
        if v.norm_sq() == 0.0 {
            return Err(Error::invalid(format!("repeated basis index in {indices:?}")));
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// True when the degree lies outside `[0, n]`.
    pub fn is_degenerate(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of the basis element on the (sorted) index set.
    pub fn component(&self, indices: &[usize]) -> f64 {
        let mask = indices.iter().fold(0u32, |m, &i| m | (1 << i));
        if mask.count_ones() as usize != indices.len() || indices.len() as i32 != self.degree {
            return 0.0;
        }
        self.coeffs[tables_or_panic(self.dim).position(mask)]
    }

    /// Index sets of the basis elements of this degree, in storage order.
    pub fn basis_labels(dim: usize, degree: i32) -> Result<Vec<Vec<usize>>> {
        let t = tables(dim)?;
        Ok(t.subsets(degree)
            .iter()
            .map(|&m| (0..dim).filter(|b| m & (1 << b) != 0).collect())
            .collect())
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn same_dim(&self, other: &MultiVector) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// Induced inner product on `Λ^q`.
    pub fn inner(&self, other: &MultiVector) -> Result<f64> {
        self.same_dim(other)?;
        if self.degree != other.degree {
            return Err(Error::invalid(format!(
                "inner product of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn wedge(&self, other: &MultiVector) -> Result<MultiVector> {
        self.same_dim(other)?;
        let n = self.dim;
        let degree = self.degree + other.degree;
        let mut out = MultiVector::zero(n, degree);
        if out.is_degenerate() || self.is_degenerate() || other.is_degenerate() {
            return Ok(out);
        }
        let t = tables_or_panic(n);
        let left = t.subsets(self.degree);
        let right = t.subsets(other.degree);
        for (i, &a) in left.iter().enumerate() {
            let ai = self.coeffs[i];
            if ai == 0.0 {
                continue;
            }
            for (j, &b) in right.iter().enumerate() {
                if a & b != 0 {
                    continue;
                }
                out.coeffs[t.position(a | b)] += wedge_sign(a, b) * ai * other.coeffs[j];
            }
        }
        Ok(out)
    }

    /// Interior product `ι_u V`, lowering the degree by one.
    pub fn interior(&self, u: &[f64]) -> Result<MultiVector> {
        if u.len() != self.dim {
            return Err(Error::invalid(format!(
                "vector of length {} against dimension {}",
                u.len(),
                self.dim
            )));
        }
        let mut out = MultiVector::zero(self.dim, self.degree - 1);
        tables_or_panic(self.dim).interior_into(u, &self.coeffs, self.degree, &mut out.coeffs);
        Ok(out)
    }

    /// Hodge star `Λ^q → Λ^{n-q}`, characterised by `a ∧ *b = <a, b> vol`.
    pub fn hodge_star(&self) -> MultiVector {
        let n = self.dim;
        let mut out = MultiVector::zero(n, n as i32 - self.degree);
        if self.is_degenerate() {
            return out;
        }
        let t = tables_or_panic(n);
        for (i, &c) in self.coeffs.iter().enumerate() {
            let e = t.star_entry(self.degree as usize, i);
            out.coeffs[e.target as usize] += e.sign * c;
        }
        out
    }

    /// Positive volume element `e_0 ∧ .. ∧ e_{n-1}`.
    pub fn volume(dim: usize) -> MultiVector {
        let mut v = MultiVector::zero(dim, dim as i32);
        v.coeffs[0] = 1.0;
        v
    }

    pub fn scale(mut self, s: f64) -> MultiVector {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
        self
    }

    pub fn max_abs_diff(&self, other: &MultiVector) -> f64 {
        assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for &MultiVector {
    type Output = MultiVector;

    /// Panics on a dimension or degree mismatch.
    fn add(self, rhs: &MultiVector) -> MultiVector {
        assert_eq!(
            (self.dim, self.degree),
            (rhs.dim, rhs.degree),
            "adding multivectors of different spaces"
        );
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        MultiVector { coeffs, ..*self }
    }
}

impl Sub for &MultiVector {
    type Output = MultiVector;

    fn sub(self, rhs: &MultiVector) -> MultiVector {
        self + &(-rhs)
    }
}

impl Neg for &MultiVector {
    type Output = MultiVector;

    fn neg(self) -> MultiVector {
        self.clone().scale(-1.0)
    }
}

impl Mul<&MultiVector> for f64 {
    type Output = MultiVector;

    fn mul(self, rhs: &MultiVector) -> MultiVector {
        rhs.clone().scale(self)
    }
}

/// Linear map `Λ^p R^n → Λ^r R^n` as a dense matrix over the lexicographic
/// bases (shape `C(n, r) × C(n, p)`).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeMap {
    dim: usize,
    source: i32,
    target: i32,
    matrix: DMatrix<f64>,
}

impl DegreeMap {
    pub fn new(dim: usize, source: i32, target: i32, matrix: DMatrix<f64>) -> Result<Self> {
        tables(dim)?;
        let shape = (binomial(dim, target), binomial(dim, source));
        if matrix.shape() != shape {
            return Err(Error::invalid(format!(
                "map Λ^{source} → Λ^{target} on R^{dim} needs shape {shape:?}, got {:?}",
                matrix.shape()
            )));
        }
        Ok(DegreeMap {
            dim,
            source,
            target,
            matrix,
        })
    }

    pub fn identity(dim: usize, degree: i32) -> Self {
        Self::scaled_identity(dim, degree, 1.0)
    }

    pub fn scaled_identity(dim: usize, degree: i32, s: f64) -> Self {
        tables_or_panic(dim);
        let d = binomial(dim, degree);
        DegreeMap {
            dim,
            source: degree,
            target: degree,
            matrix: DMatrix::from_diagonal_element(d, d, s),
        }
    }

    pub fn zero(dim: usize, source: i32, target: i32) -> Self {
        tables_or_panic(dim);
        DegreeMap {
            dim,
            source,
            target,
            matrix: DMatrix::zeros(binomial(dim, target), binomial(dim, source)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> i32 {
        self.source
    }

    pub fn target(&self) -> i32 {
        self.target
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: &MultiVector) -> Result<MultiVector> {
        if v.dim != self.dim || v.degree != self.source {
            return Err(Error::invalid(format!(
                "map Λ^{}(R^{}) cannot act on Λ^{}(R^{})",
                self.source, self.dim, v.degree, v.dim
            )));
        }
        let coeffs = if v.coeffs.is_empty() {
            vec![0.0; self.matrix.nrows()]
        } else {
            (&self.matrix * nalgebra::DVector::from_column_slice(&v.coeffs))
                .as_slice()
                .to_vec()
        };
        Ok(MultiVector {
            dim: self.dim,
            degree: self.target,
            coeffs,
        })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &DegreeMap) -> Result<DegreeMap> {
        if inner.dim != self.dim || inner.target != self.source {
            return Err(Error::invalid("incompatible maps in composition"));
        }
        Ok(DegreeMap {
            dim: self.dim,
            source: inner.source,
            target: self.target,
            matrix: &self.matrix * &inner.matrix,
        })
    }

    pub fn transpose(&self) -> DegreeMap {
        DegreeMap {
            dim: self.dim,
            source: self.target,
            target: self.source,
            matrix: self.matrix.transpose(),
        }
    }

    /// Inverse of a square map; fails with a condition estimate when the
    /// matrix is numerically singular.
    pub fn inverse(&self) -> Result<DegreeMap> {
        if self.source != self.target {
            return Err(Error::invalid("only maps Λ^q → Λ^q can be inverted"));
        }
        if self.matrix.is_empty() {
            return Ok(self.clone());
        }
        let sv = self.matrix.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition < 1e14) {
            return Err(Error::NumericalSingularity { condition });
        }
        let matrix = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or(Error::NumericalSingularity { condition })?;
        Ok(DegreeMap { matrix, ..*self })
    }

    pub fn max_abs_diff(&self, other: &DegreeMap) -> f64 {
        assert_eq!(self.matrix.shape(), other.matrix.shape());
        (&self.matrix - &other.matrix).amax()
    }
}

/// Matrix of `q × q` minors of `a`: entry `(I, J)` is `det a[I, J]`. For a
/// linear map `A: R^c → R^r` this is `Λ^q A : Λ^q R^c → Λ^q R^r`.
pub fn minor_matrix(a: &DMatrix<f64>, q: i32) -> Result<DMatrix<f64>> {
    let (rows, cols) = a.shape();
    let (tr, tc) = (tables(rows)?, tables(cols)?);
    let (ri, ci) = (tr.subsets(q), tc.subsets(q));
    let mut out = DMatrix::zeros(ri.len(), ci.len());
    if q == 0 {
        out[(0, 0)] = 1.0;
        return Ok(out);
    }
    let qs = q as usize;
    let mut sub = DMatrix::zeros(qs, qs);
    for (i, &rmask) in ri.iter().enumerate() {
        let rows_idx: Vec<usize> = (0..rows).filter(|b| rmask & (1 << b) != 0).collect();
        for (j, &cmask) in ci.iter().enumerate() {
            let mut c = 0;
            for col in (0..cols).filter(|b| cmask & (1 << b) != 0) {
                for (r, &row) in rows_idx.iter().enumerate() {
                    sub[(r, c)] = a[(row, col)];
                }
                c += 1;
            }
            out[(i, j)] = sub.determinant();
        }
    }
    Ok(out)
}

/// `Λ^q A` for a linear map `A` on `R^n`.
pub fn induced_power(a: &DMatrix<f64>, q: i32) -> Result<DegreeMap> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid("induced_power needs a square matrix"));
    }
    if q < 0 || q as usize > n {
        return Ok(DegreeMap::zero(n, q, q));
    }
    DegreeMap::new(n, q, q, minor_matrix(a, q)?)
}

/// Pushes a multivector on `R^n` forward through the columns of an `m × n`
/// matrix, giving an element of `Λ^q R^m`.
pub fn pushforward(columns: &DMatrix<f64>, v: &MultiVector) -> Result<MultiVector> {
    if columns.ncols() != v.dim() {
        return Err(Error::invalid("pushforward: column count differs from dimension"));
    }
    let m = columns.nrows();
    if v.is_degenerate() {
        return Ok(MultiVector::zero(m, v.degree()));
    }
    let minors = minor_matrix(columns, v.degree())?;
    let coeffs = (&minors * nalgebra::DVector::from_column_slice(v.coeffs()))
        .as_slice()
        .to_vec();
    MultiVector::from_coeffs(m, v.degree(), coeffs)
}
