//! Small dense matrix kernel.
//!
//! Operator norms, singular values, exterior powers and eigenvalue moduli
//! for the k×k matrices (k ≤ 6 or so) that generate a cocycle, plus
//! [`ScaledProduct`] for long products accumulated in the log domain.

use std::fmt;
use std::ops::Mul;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};

/// Relative tolerance under which two eigenvalue moduli are flagged as
/// possibly equal.
pub const SIMPLICITY_TOL: f64 = 1e-6;

#[derive(Clone, PartialEq)]
pub struct Matrix(DMatrix<f64>);

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::invalid("matrix must have at least one row"));
        }
        let mut problems = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                problems.push(format!("row {i} has {} entries, expected {k}", r.len()));
            }
            if r.iter().any(|v| !v.is_finite()) {
                problems.push(format!("row {i} has a non-finite entry"));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Invalid(problems));
        }
        Ok(Matrix(DMatrix::from_fn(k, k, |i, j| rows[i][j])))
    }

    /// Row-major square matrix. Panics if `data.len() != k*k`.
    pub fn from_row_slice(k: usize, data: &[f64]) -> Self {
        Matrix(DMatrix::from_row_slice(k, k, data))
    }

    pub fn identity(k: usize) -> Self {
        Matrix(DMatrix::identity(k, k))
    }

    pub fn diag(entries: &[f64]) -> Self {
        Matrix(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// Planar rotation by `theta` radians.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Matrix::from_row_slice(2, &[c, -s, s, c])
    }

    pub fn from_nalgebra(m: DMatrix<f64>) -> Self {
        assert!(m.is_square(), "matrix must be square");
        Matrix(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix(self.0.transpose())
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix(&self.0 * c)
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn inverse(&self) -> Option<Matrix> {
        self.0.clone().try_inverse().map(Matrix)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.0 * DVector::from_column_slice(v)).iter().copied().collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        (&self.0 - &other.0).amax()
    }

    /// Principal submatrix determinant on rows `rows` and columns `cols`.
    fn minor(&self, rows: &[usize], cols: &[usize]) -> f64 {
        let l = rows.len();
        DMatrix::from_fn(l, l, |i, j| self.0[(rows[i], cols[j])]).determinant()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{:?}", self.rows())
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        Matrix(&self.0 * &rhs.0)
    }
}

impl Mul for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: Matrix) -> Matrix {
        Matrix(self.0 * rhs.0)
    }
}

impl std::ops::Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        Matrix(&self.0 + &rhs.0)
    }
}

/// Closed-form singular values of a 2×2 matrix.
fn singular_values_2x2(m: &DMatrix<f64>) -> [f64; 2] {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let fro2 = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    let disc = ((fro2 - 2.0 * det) * (fro2 + 2.0 * det)).max(0.0);
    let s1 = ((fro2 + disc.sqrt()) * 0.5).sqrt();
    let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
    [s1, s2]
}

/// Largest singular value (Euclidean operator norm).
pub fn op_norm(m: &Matrix) -> f64 {
    match m.dim() {
        1 => m.0[(0, 0)].abs(),
        2 => singular_values_2x2(&m.0)[0],
        _ => singular_values(m)[0],
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    match m.dim() {
        1 => vec![m.0[(0, 0)].abs()],
        2 => singular_values_2x2(&m.0).to_vec(),
        _ => {
            let mut s: Vec<f64> = m.0.clone().svd(false, false).singular_values.iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        }
    }
}

/// Number of `l`-subsets of `k` elements.
pub fn binomial(k: usize, l: usize) -> usize {
    if l > k {
        return 0;
    }
    (0..l).fold(1usize, |acc, i| acc * (k - i) / (i + 1))
}

/// Sorted `l`-subsets of `0..k` in lexicographic order; the index basis of
/// the `l`-th exterior power.
pub fn subsets(k: usize, l: usize) -> Vec<Vec<usize>> {
    (0..k).combinations(l).collect()
}

/// The `l`-th exterior power (compound matrix): entry `(I, J)` is the minor
/// on rows `I` and columns `J`, subsets ordered lexicographically.
pub fn exterior_power(m: &Matrix, l: usize) -> Result<Matrix> {
    let k = m.dim();
    if l == 0 || l > k {
        return Err(Error::invalid(format!("exterior index {l} out of range 1..={k}")));
    }
    if l == 1 {
        return Ok(m.clone());
    }
    let idx = subsets(k, l);
    let n = idx.len();
    let mut out = DMatrix::zeros(n, n);
    for (a, rows) in idx.iter().enumerate() {
        for (b, cols) in idx.iter().enumerate() {
            out[(a, b)] = m.minor(rows, cols);
        }
    }
    Ok(Matrix(out))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenModulus {
    pub modulus: f64,
    /// False when another modulus lies within relative [`SIMPLICITY_TOL`].
    pub simple: bool,
}

/// Eigenvalues as `(re, im)` pairs, from the real Schur form.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<(f64, f64)>> {
    let k = m.dim();
    if !m.is_finite() {
        return Err(Error::Numerical("eigenvalues of a non-finite matrix".into()));
    }
    if k == 1 {
        return Ok(vec![(m.0[(0, 0)], 0.0)]);
    }
    let scale = m.0.amax();
    if scale == 0.0 {
        return Ok(vec![(0.0, 0.0); k]);
    }
    let schur = Schur::try_new(m.0.clone(), 1e-15 * scale, 10_000).ok_or_else(|| {
        Error::Numerical(format!("real Schur iteration did not converge for {m:?}"))
    })?;
    Ok(schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect())
}

/// Eigenvalue moduli in descending order, each flagged simple or possibly
/// repeated. A complex-conjugate pair always yields two equal moduli.
pub fn eigen_moduli(m: &Matrix) -> Result<Vec<EigenModulus>> {
    let mut mods: Vec<f64> = eigenvalues(m)?.iter().map(|&(re, im)| re.hypot(im)).collect();
    mods.sort_by(|a, b| b.total_cmp(a));
    let close = |a: f64, b: f64| (a - b).abs() <= SIMPLICITY_TOL * a.abs().max(b.abs());
    Ok(mods
        .iter()
        .enumerate()
        .map(|(i, &x)| EigenModulus {
            modulus: x,
            simple: mods.iter().enumerate().all(|(j, &y)| i == j || !close(x, y)),
        })
        .collect())
}

pub fn spectral_radius(m: &Matrix) -> Result<f64> {
    Ok(eigen_moduli(m)?.first().map_or(0.0, |e| e.modulus))
}

/// Unit null vector of `m − λI` (right singular vector of the smallest
/// singular value). Sign fixed so the largest-magnitude entry is positive.
pub fn real_eigenvector(m: &Matrix, lambda: f64) -> Vec<f64> {
    let k = m.dim();
    let shifted = &m.0 - DMatrix::identity(k, k) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let mut v: Vec<f64> = v_t.row(imin).iter().copied().collect();
    let (_, &pivot) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("nonempty");
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// A matrix product kept as `2^exponent · matrix` with `‖matrix‖` in
/// `[1/2, 2]`, so arbitrarily long products neither overflow nor
/// underflow. Rescaling is by exact powers of two.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledProduct {
    matrix: Matrix,
    exponent: i64,
}

impl ScaledProduct {
    pub fn identity(k: usize) -> Self {
        ScaledProduct {
            matrix: Matrix::identity(k),
            exponent: 0,
        }
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        let mut p = ScaledProduct {
            matrix: m.clone(),
            exponent: 0,
        };
        p.renormalize()?;
        Ok(p)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Natural log of the factored-out scale.
    pub fn log_scale(&self) -> f64 {
        self.exponent as f64 * std::f64::consts::LN_2
    }

    /// `log ‖product‖`.
    pub fn log_norm(&self) -> f64 {
        self.log_scale() + op_norm(&self.matrix).ln()
    }

    /// `log σ_i(product)` in descending order.
    pub fn log_singular_values(&self) -> Vec<f64> {
        let ls = self.log_scale();
        singular_values(&self.matrix).into_iter().map(|s| ls + s.ln()).collect()
    }

    /// `log ρ(product)`.
    pub fn log_spectral_radius(&self) -> Result<f64> {
        Ok(self.log_scale() + spectral_radius(&self.matrix)?.ln())
    }

    /// The true product; may overflow for long products.
    pub fn to_matrix(&self) -> Matrix {
        self.matrix.scale((self.exponent as f64).exp2())
    }

    /// `left · self`.
    pub fn left_multiply(&self, left: &Matrix) -> Result<Self> {
        let mut p = ScaledProduct {
            matrix: left * &self.matrix,
            exponent: self.exponent,
        };
        p.renormalize()?;
        Ok(p)
    }

    /// `self · right` for another scaled product.
    pub fn then_right(&self, right: &ScaledProduct) -> Result<Self> {
        let mut p = ScaledProduct {
            matrix: &self.matrix * &right.matrix,
            exponent: self.exponent + right.exponent,
        };
        p.renormalize()?;
        Ok(p)
    }

    fn renormalize(&mut self) -> Result<()> {
        let k = self.matrix.dim();
        // op norm lies in [fro/√k, fro]; only k ≤ 4 keeps that inside [1/2, 2]
        let measure = if k <= 4 { self.matrix.frobenius() } else { op_norm(&self.matrix) };
        if !measure.is_finite() {
            return Err(Error::Numerical("matrix product overflowed".into()));
        }
        if measure < 1e-300 {
            return Err(Error::Numerical("matrix product is numerically singular".into()));
        }
        let low = if k <= 4 { (k as f64).sqrt() * 0.5 } else { 0.5 };
        if measure >= low && measure <= 2.0 {
            return Ok(());
        }
        // scale into [1, 2)
        let e = measure.log2().floor() as i64;
        self.matrix = self.matrix.scale((-e as f64).exp2());
        self.exponent += e;
        Ok(())
    }
}

/// `M · P`: appends one factor on the left of a scaled product.
pub fn scaled_multiply(p: &ScaledProduct, m: &Matrix) -> Result<ScaledProduct> {
    p.left_multiply(m)
}
