//! Dense complex and real matrix helpers built on nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigh(m).0
}

/// `(m + m†) / 2`
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn min_singular_value(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let (values, vectors) = hermitian_eigh(m);
    let diag = DVector::from_iterator(values.len(), values.iter().map(|&x| f(x)));
    &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint()
}

/// `exp(i h)` for Hermitian `h`.
pub fn expi_hermitian(h: &CMatrix) -> CMatrix {
    hermitian_function(h, |x| Complex64::from_polar(1.0, x))
}

/// `exp(h)` for Hermitian `h`.
pub fn exp_hermitian(h: &CMatrix) -> CMatrix {
    hermitian_function(h, |x| Complex64::new(x.exp(), 0.0))
}

/// Inverse square root of a positive-definite Hermitian matrix.
pub fn inv_sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let values = hermitian_eigenvalues(m);
    let min = values.first().copied().unwrap_or(0.0);
    let max = values.last().copied().unwrap_or(0.0);
    if min <= 1e-14 * max.max(1e-300) {
        return Err(Error::Singular {
            condition: if min > 0.0 { max / min } else { f64::INFINITY },
        });
    }
    Ok(hermitian_function(m, |x| Complex64::new(x.powf(-0.5), 0.0)))
}

/// Symmetric eigenvalues of a real matrix (symmetrized first), ascending.
pub fn symmetric_eigenvalues(m: &RMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let s = symmetrize(m);
    let mut values: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn min_symmetric_eigenvalue(m: &RMatrix) -> f64 {
    symmetric_eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn symmetrize(m: &RMatrix) -> RMatrix {
    (m + m.transpose()).scale(0.5)
}

/// Condition number `|λ|max / |λ|min` of a symmetric matrix.
pub fn symmetric_condition(m: &RMatrix) -> f64 {
    let values = symmetric_eigenvalues(m);
    let abs_min = values.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let abs_max = values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if abs_min == 0.0 {
        f64::INFINITY
    } else {
        abs_max / abs_min
    }
}

/// Inverse of a symmetric matrix, refusing condition numbers above `max_condition`.
pub fn symmetric_inverse(m: &RMatrix, max_condition: f64) -> Result<RMatrix> {
    let condition = symmetric_condition(m);
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::Singular { condition });
    }
    let inv = symmetrize(m)
        .try_inverse()
        .ok_or(Error::Singular { condition })?;
    Ok(symmetrize(&inv))
}

/// `ξᵀ M ξ`
pub fn quadratic_form(m: &RMatrix, xi: &[f64]) -> f64 {
    let v = DVector::from_column_slice(xi);
    (v.transpose() * m * &v)[(0, 0)]
}

pub fn frobenius(m: &RMatrix) -> f64 {
    m.norm()
}

pub fn rows(m: &RMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}
