//! Finite-dimensional C*-algebras in block-diagonal form.
//!
//! An algebra is a direct sum of full complex matrix blocks `M_{n_1} ⊕ … ⊕ M_{n_B}`.
//! The abelian algebra `C_n` is the special case of `n` blocks of size one, so classical
//! probability and quantum mechanics share every code path below.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, I, ONE, ZERO};

/// Default absolute tolerance on eigenvalues for positivity tests.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Block sizes `[n_1, …, n_B]` of a direct sum of full matrix algebras.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AlgebraSpec {
    block_dims: Vec<usize>,
}

impl AlgebraSpec {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::InvalidSpec("no blocks".into()));
        }
        if let Some(k) = block_dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidSpec(format!("block {k} has dimension 0")));
        }
        Ok(Self { block_dims })
    }

    /// The full matrix algebra `M_n`.
    pub fn matrix(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// The abelian algebra `C_n` of functions on `n` points.
    pub fn abelian(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("abelian algebra needs n >= 1".into()));
        }
        Self::new(vec![1; n])
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Complex dimension `Σ n_k²`, also the real dimension of the self-adjoint part.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    pub fn is_abelian(&self) -> bool {
        self.block_dims.iter().all(|&n| n == 1)
    }

    pub fn is_single_block(&self) -> bool {
        self.block_dims.len() == 1
    }

    /// Largest block dimension.
    pub fn max_block(&self) -> usize {
        self.block_dims.iter().copied().max().unwrap_or(0)
    }

    /// Spec of the tensor product, blocks ordered lexicographically `(k_1, k_2)`.
    pub fn tensor(&self, other: &AlgebraSpec) -> AlgebraSpec {
        let block_dims = self
            .block_dims
            .iter()
            .flat_map(|&a| other.block_dims.iter().map(move |&b| a * b))
            .collect();
        AlgebraSpec { block_dims }
    }

    pub fn check_same(&self, other: &AlgebraSpec) -> Result<()> {
        if self != other {
            return Err(Error::SpecMismatch {
                left: self.block_dims.clone(),
                right: other.block_dims.clone(),
            });
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for AlgebraSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            block_dims: Vec<usize>,
        }
        let raw = Raw::deserialize(deserializer)?;
        AlgebraSpec::new(raw.block_dims).map_err(D::Error::custom)
    }
}

/// `spec^{⊗N}`.
pub fn tensor_power(spec: &AlgebraSpec, n: usize) -> Result<AlgebraSpec> {
    if n < 1 {
        return Err(Error::InvalidArgument("tensor power needs N >= 1".into()));
    }
    let mut out = spec.clone();
    for _ in 1..n {
        out = out.tensor(spec);
    }
    Ok(out)
}

/// A member of an algebra: one complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    spec: AlgebraSpec,
    blocks: Vec<CMatrix>,
}

impl Element {
    pub fn from_blocks(spec: AlgebraSpec, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != spec.num_blocks() {
            return Err(Error::LengthMismatch {
                expected: spec.num_blocks(),
                got: blocks.len(),
            });
        }
        for (k, (b, &n)) in blocks.iter().zip(spec.block_dims()).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::BlockShape {
                    block: k,
                    rows: b.nrows(),
                    cols: b.ncols(),
                    expected: n,
                });
            }
        }
        Ok(Self { spec, blocks })
    }

    /// Builds an element whose spec is read off the (square) block shapes.
    pub fn from_matrices(blocks: Vec<CMatrix>) -> Result<Self> {
        let dims = blocks.iter().map(|b| b.nrows()).collect();
        Self::from_blocks(AlgebraSpec::new(dims)?, blocks)
    }

    /// Single-block element from a square matrix.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::from_matrices(vec![m])
    }

    pub fn zeros(spec: &AlgebraSpec) -> Self {
        let blocks = spec
            .block_dims()
            .iter()
            .map(|&n| CMatrix::zeros(n, n))
            .collect();
        Self {
            spec: spec.clone(),
            blocks,
        }
    }

    pub fn identity(spec: &AlgebraSpec) -> Self {
        let blocks = spec
            .block_dims()
            .iter()
            .map(|&n| CMatrix::identity(n, n))
            .collect();
        Self {
            spec: spec.clone(),
            blocks,
        }
    }

    /// Element of `C_n` with the given real values.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let spec = AlgebraSpec::abelian(values.len())?;
        let blocks = values
            .iter()
            .map(|&v| CMatrix::from_element(1, 1, Complex64::new(v, 0.0)))
            .collect();
        Ok(Self { spec, blocks })
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    /// Applies `f` block by block, keeping the spec.
    pub(crate) fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Element {
        Element {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip_blocks(
        &self,
        other: &Element,
        f: impl Fn(&CMatrix, &CMatrix) -> CMatrix,
    ) -> Result<Element> {
        self.spec.check_same(&other.spec)?;
        Ok(Element {
            spec: self.spec.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.zip_blocks(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.zip_blocks(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Element {
        self.map_blocks(|b| b.scale(s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Element {
        self.map_blocks(|b| b * s)
    }

    pub fn adjoint(&self) -> Element {
        self.map_blocks(|b| b.adjoint())
    }

    pub fn multiply(&self, other: &Element) -> Result<Element> {
        self.zip_blocks(other, |a, b| a * b)
    }

    /// Jordan product `{x, y} = (xy + yx) / 2`.
    pub fn jordan(&self, other: &Element) -> Result<Element> {
        self.zip_blocks(other, |a, b| (a * b + b * a).scale(0.5))
    }

    /// Lie product `[[x, y]] = (xy − yx) / 2i`.
    pub fn lie(&self, other: &Element) -> Result<Element> {
        let factor = ONE / (I * 2.0);
        self.zip_blocks(other, |a, b| (a * b - b * a) * factor)
    }

    /// Sum of the block traces.
    pub fn trace(&self) -> Complex64 {
        self.blocks.iter().map(linalg::trace).sum()
    }

    /// `Σ_k Tr(x_k y_k)`.
    pub fn trace_pairing(&self, other: &Element) -> Result<Complex64> {
        self.spec.check_same(&other.spec)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.component_mul(&b.transpose()).sum())
            .sum())
    }

    /// Max block-wise entry deviation `|x_k − x_k†|`.
    pub fn self_adjoint_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| linalg::max_abs(&(b - b.adjoint())))
            .fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_deviation() <= tol
    }

    pub(crate) fn require_self_adjoint(&self, tol: f64) -> Result<()> {
        let dev = self.self_adjoint_deviation();
        if dev > tol {
            return Err(Error::NotSelfAdjoint(dev));
        }
        Ok(())
    }

    /// `(x + x†) / 2`
    pub fn hermitian_part(&self) -> Element {
        self.map_blocks(linalg::hermitian_part)
    }

    /// Eigenvalues of each block (the element is assumed self-adjoint).
    pub fn block_eigenvalues(&self) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(linalg::hermitian_eigenvalues)
            .collect()
    }

    /// Positivity test: returns whether every eigenvalue is `>= -tol`, and the global
    /// minimum eigenvalue.
    pub fn is_positive(&self, tol: f64) -> Result<(bool, f64)> {
        self.require_self_adjoint(tol.max(1e-12))?;
        let min = self
            .block_eigenvalues()
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        Ok((min >= -tol, min))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.block_eigenvalues()
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Max over blocks of the spectral norm of `xy − yx`.
    pub fn commutator_norm(&self, other: &Element) -> Result<f64> {
        let c = self.zip_blocks(other, |a, b| a * b - b * a)?;
        Ok(c.spectral_norm())
    }

    /// Max block spectral norm, used as the C*-norm.
    pub fn spectral_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::spectral_norm)
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Max entry-wise distance to another element.
    pub fn max_abs_diff(&self, other: &Element) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// Smallest singular value across blocks.
    pub fn min_singular_value(&self) -> f64 {
        self.blocks
            .iter()
            .map(linalg::min_singular_value)
            .fold(f64::INFINITY, f64::min)
    }

    /// Tensor product, blocks ordered lexicographically.
    pub fn tensor(&self, other: &Element) -> Element {
        let blocks = self
            .blocks
            .iter()
            .flat_map(|a| other.blocks.iter().map(move |b| linalg::kron(a, b)))
            .collect();
        Element {
            spec: self.spec.tensor(&other.spec),
            blocks,
        }
    }

    /// Real coordinates of the diagonal of an abelian element.
    pub fn abelian_values(&self) -> Option<Vec<f64>> {
        self.spec
            .is_abelian()
            .then(|| self.blocks.iter().map(|b| b[(0, 0)].re).collect())
    }
}

/// `x_1 ⊗ … ⊗ x_N`.
pub fn tensor_elements(xs: &[Element]) -> Result<Element> {
    let (first, rest) = xs
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, x| acc.tensor(x)))
}

/// Pauli basis on `M_2`: `σ^0 = I`, then `σ^1, σ^2, σ^3`.
pub fn pauli(k: usize) -> Element {
    let m = match k {
        0 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        3 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("Pauli index {k} out of range 0..=3"),
    };
    Element {
        spec: AlgebraSpec {
            block_dims: vec![2],
        },
        blocks: vec![m],
    }
}

/// `c_0 σ^0 + c_1 σ^1 + c_2 σ^2 + c_3 σ^3`.
pub fn pauli_combination(c: [f64; 4]) -> Element {
    let m = (0..4).fold(CMatrix::zeros(2, 2), |acc, k| {
        acc + pauli(k).blocks[0].scale(c[k])
    });
    Element {
        spec: AlgebraSpec {
            block_dims: vec![2],
        },
        blocks: vec![m],
    }
}

/// Coordinates `(Tr(x σ^k)/2)_k` of a qubit element.
pub fn pauli_coordinates(x: &Element) -> Result<[Complex64; 4]> {
    let mut out = [ZERO; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = x.trace_pairing(&pauli(k))? * 0.5;
    }
    Ok(out)
}

/// The delta-function basis `e^j` of `C_n`.
pub fn delta_basis(n: usize) -> Result<Vec<Element>> {
    (0..n)
        .map(|j| {
            let mut v = vec![0.0; n];
            v[j] = 1.0;
            Element::diagonal(&v)
        })
        .collect()
}

/// Structure constants of a self-adjoint basis:
/// `{e^j, e^k} = d[j][k][l] e^l` and `[[e^j, e^k]] = c[j][k][l] e^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    pub jordan: Vec<Vec<Vec<f64>>>,
    pub lie: Vec<Vec<Vec<f64>>>,
}

impl StructureConstants {
    pub fn len(&self) -> usize {
        self.jordan.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jordan.is_empty()
    }
}

/// Solves for the structure constants by least squares in the trace pairing.
pub fn structure_constants(basis: &[Element]) -> Result<StructureConstants> {
    let first = basis
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
    let spec = first.spec().clone();
    for e in basis {
        spec.check_same(e.spec())?;
        e.require_self_adjoint(1e-10)?;
    }
    let n = basis.len();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            gram[(a, b)] = basis[a].trace_pairing(&basis[b])?.re;
        }
    }
    let values = linalg::symmetric_eigenvalues(&gram);
    let max = values.last().copied().unwrap_or(0.0).abs();
    let rank = values.iter().filter(|&&v| v.abs() > 1e-10 * max).count();
    if rank < spec.dim() || rank < n {
        return Err(Error::RankDeficient {
            rank,
            needed: spec.dim().max(n),
        });
    }
    let chol = gram.clone().cholesky().ok_or(Error::RankDeficient {
        rank,
        needed: spec.dim(),
    })?;

    let solve = |target: &Element| -> Result<Vec<f64>> {
        let rhs = nalgebra::DVector::from_iterator(
            n,
            basis
                .iter()
                .map(|e| e.trace_pairing(target).map(|z| z.re))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok(chol.solve(&rhs).iter().copied().collect())
    };

    let mut jordan = vec![vec![Vec::new(); n]; n];
    let mut lie = vec![vec![Vec::new(); n]; n];
    for j in 0..n {
        for k in 0..n {
            jordan[j][k] = solve(&basis[j].jordan(&basis[k])?)?;
            lie[j][k] = solve(&basis[j].lie(&basis[k])?)?;
        }
    }
    Ok(StructureConstants { jordan, lie })
}

/// Reconstructs `Σ_l coeffs[l] e^l`.
pub fn combine(basis: &[Element], coeffs: &[f64]) -> Result<Element> {
    let first = basis
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
    basis
        .iter()
        .zip(coeffs)
        .try_fold(Element::zeros(first.spec()), |acc, (e, &c)| {
            acc.add(&e.scale(c))
        })
}

// Serialization: a matrix is a row-major list of rows of [re, im] pairs. A flat
// row-major list of n² pairs is also accepted on input.

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawMatrix {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

impl RawMatrix {
    fn into_matrix(self) -> std::result::Result<CMatrix, String> {
        match self {
            RawMatrix::Rows(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(format!("matrix with {n} rows is not square"));
                }
                Ok(CMatrix::from_fn(n, n, |r, c| {
                    Complex64::new(rows[r][c][0], rows[r][c][1])
                }))
            }
            RawMatrix::Flat(entries) => {
                let n = (entries.len() as f64).sqrt().round() as usize;
                if n * n != entries.len() {
                    return Err(format!("{} entries do not form a square", entries.len()));
                }
                Ok(CMatrix::from_fn(n, n, |r, c| {
                    let [re, im] = entries[r * n + c];
                    Complex64::new(re, im)
                }))
            }
        }
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            blocks: Vec<Vec<Vec<[f64; 2]>>>,
        }
        Raw {
            blocks: self.blocks.iter().map(matrix_to_rows).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            blocks: Vec<RawMatrix>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let blocks = raw
            .blocks
            .into_iter()
            .map(RawMatrix::into_matrix)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Element::from_matrices(blocks).map_err(D::Error::custom)
    }
}
