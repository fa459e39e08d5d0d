//! Discrete measurement procedures (POVMs) and the classical statistics they induce.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::algebra::{tensor_power, AlgebraSpec, Element, POSITIVITY_TOL};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::ParametricModel;
use crate::state_space::State;

/// Default margin on probabilities for regularity.
pub const REGULARITY_TOL: f64 = 1e-9;

/// Max number of effects produced by [`Povm::tensor_power`].
pub const MAX_TENSOR_OUTCOMES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Povm {
    spec: AlgebraSpec,
    effects: Vec<Element>,
    labels: Vec<String>,
}

/// Outcome of [`Povm::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PovmDiagnostics {
    pub min_eigenvalue: f64,
    pub unitality_error: f64,
    pub passed: bool,
}

impl Povm {
    /// Builds a POVM from self-adjoint effects on a common spec. Positivity and unitality
    /// are not enforced here; see [`Povm::checked`] and [`Povm::validate`].
    pub fn new(effects: Vec<Element>) -> Result<Self> {
        let labels = (1..=effects.len()).map(|j| format!("x{j}")).collect();
        Self::with_labels(effects, labels)
    }

    pub fn with_labels(effects: Vec<Element>, labels: Vec<String>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidArgument("POVM needs at least one effect".into()))?;
        let spec = first.spec().clone();
        for e in &effects {
            spec.check_same(e.spec())?;
            e.require_self_adjoint(1e-9)?;
        }
        if labels.len() != effects.len() {
            return Err(Error::LengthMismatch {
                expected: effects.len(),
                got: labels.len(),
            });
        }
        let effects = effects.iter().map(Element::hermitian_part).collect();
        Ok(Self {
            spec,
            effects,
            labels,
        })
    }

    /// Like [`Povm::new`] but fails unless [`Povm::validate`] passes at `tol`.
    pub fn checked(effects: Vec<Element>, tol: f64) -> Result<Self> {
        let povm = Self::new(effects)?;
        povm.require_valid(tol)?;
        Ok(povm)
    }

    pub(crate) fn require_valid(&self, tol: f64) -> Result<()> {
        let diag = self.validate(tol);
        if !diag.passed {
            return Err(Error::InvalidArgument(format!(
                "not a POVM: min effect eigenvalue {:.3e}, unitality error {:.3e}",
                diag.min_eigenvalue, diag.unitality_error
            )));
        }
        Ok(())
    }

    /// The trivial POVM `{𝕀}`.
    pub fn trivial(spec: &AlgebraSpec) -> Self {
        Self {
            spec: spec.clone(),
            effects: vec![Element::identity(spec)],
            labels: vec!["x1".into()],
        }
    }

    /// The delta functions of `C_n`: the identity measurement of a classical system.
    pub fn identity_abelian(n: usize) -> Result<Self> {
        Self::new(crate::algebra::delta_basis(n)?)
    }

    /// Rank-one projectors onto the eigenvectors of a self-adjoint single-block element.
    pub fn projective_eigenbasis(a: &Element) -> Result<Self> {
        a.require_self_adjoint(1e-9)?;
        let mut effects = Vec::new();
        for (k, block) in a.blocks().iter().enumerate() {
            let (_, vectors) = linalg::hermitian_eigh(block);
            for c in 0..vectors.ncols() {
                let col = vectors.column(c);
                let proj = col * col.adjoint();
                let mut blocks: Vec<_> = a
                    .spec()
                    .block_dims()
                    .iter()
                    .map(|&n| linalg::CMatrix::zeros(n, n))
                    .collect();
                blocks[k] = proj;
                effects.push(Element::from_blocks(a.spec().clone(), blocks)?);
            }
        }
        Self::new(effects)
    }

    /// Two-outcome projective qubit measurement along the Bloch direction `n`:
    /// `{½(σ⁰ + n·σ), ½(σ⁰ − n·σ)}`.
    pub fn qubit_axis(n: [f64; 3]) -> Result<Self> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero measurement axis".into()));
        }
        let [x, y, z] = n.map(|c| 0.5 * c / norm);
        Self::new(vec![
            crate::algebra::pauli_combination([0.5, x, y, z]),
            crate::algebra::pauli_combination([0.5, -x, -y, -z]),
        ])
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn effects(&self) -> &[Element] {
        &self.effects
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Reports the minimum effect eigenvalue and `max |Σ m^j − 𝕀|`.
    pub fn validate(&self, tol: f64) -> PovmDiagnostics {
        let min_eigenvalue = self
            .effects
            .iter()
            .map(Element::min_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        let sum = self
            .effects
            .iter()
            .skip(1)
            .fold(self.effects[0].clone(), |acc, e| {
                acc.add(e).expect("effects share a spec")
            });
        let unitality_error = sum
            .max_abs_diff(&Element::identity(&self.spec))
            .expect("same spec");
        PovmDiagnostics {
            min_eigenvalue,
            unitality_error,
            passed: min_eigenvalue >= -tol && unitality_error <= tol,
        }
    }

    /// `p^j = ρ(m^j)`.
    pub fn push_forward(&self, s: &State) -> Result<ProbabilityVector> {
        self.spec.check_same(s.spec())?;
        let p = self
            .effects
            .iter()
            .map(|m| s.expect(m))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProbabilityVector(p))
    }

    /// `m(f) = Σ_j f_j m^j`.
    pub fn lift(&self, f: &[f64]) -> Result<Element> {
        if f.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        self.effects
            .iter()
            .zip(f)
            .try_fold(Element::zeros(&self.spec), |acc, (m, &fj)| {
                acc.add(&m.scale(fj))
            })
    }

    /// Minimum eigenvalue of `m(f²) − m(f)²`, nonnegative by Kadison's inequality.
    pub fn kadison_defect(&self, f: &[f64]) -> Result<f64> {
        let squares: Vec<f64> = f.iter().map(|x| x * x).collect();
        let lifted = self.lift(f)?;
        let defect = self
            .lift(&squares)?
            .sub(&lifted.multiply(&lifted)?)?
            .hermitian_part();
        Ok(defect.min_eigenvalue())
    }

    /// `m^{⊗N}` with effects `m^{j_1} ⊗ … ⊗ m^{j_N}` in lexicographic outcome order.
    pub fn tensor_power(&self, rounds: usize) -> Result<Povm> {
        if rounds < 1 {
            return Err(Error::InvalidArgument("tensor power needs N >= 1".into()));
        }
        let count = (self.len() as f64).powi(rounds as i32);
        if count > MAX_TENSOR_OUTCOMES as f64 {
            return Err(Error::TooLarge(format!(
                "{}^{rounds} outcomes exceed {MAX_TENSOR_OUTCOMES}",
                self.len()
            )));
        }
        let mut effects = self.effects.clone();
        let mut labels = self.labels.clone();
        for _ in 1..rounds {
            let mut next_effects = Vec::with_capacity(effects.len() * self.len());
            let mut next_labels = Vec::with_capacity(effects.len() * self.len());
            for (e, l) in effects.iter().zip(&labels) {
                for (m, ml) in self.effects.iter().zip(&self.labels) {
                    next_effects.push(e.tensor(m));
                    next_labels.push(format!("{l},{ml}"));
                }
            }
            effects = next_effects;
            labels = next_labels;
        }
        Ok(Povm {
            spec: tensor_power(&self.spec, rounds)?,
            effects,
            labels,
        })
    }

    /// Checks that every outcome has probability above `tol` at every grid point.
    pub fn is_regular(
        &self,
        model: &ParametricModel,
        grid: &[Vec<f64>],
        tol: f64,
    ) -> Result<RegularityReport> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        let mut worst_point = grid[0].clone();
        let mut min_prob = f64::INFINITY;
        for theta in grid {
            let p = self.push_forward(&model.state_at(theta)?)?;
            let m = p.min();
            if m < min_prob {
                min_prob = m;
                worst_point = theta.clone();
            }
        }
        Ok(RegularityReport {
            regular: min_prob > tol,
            worst_point,
            min_prob,
        })
    }
}

impl<'de> Deserialize<'de> for Povm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            spec: Option<AlgebraSpec>,
            effects: Vec<Element>,
            labels: Option<Vec<String>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let povm = match raw.labels {
            Some(labels) => Povm::with_labels(raw.effects, labels),
            None => Povm::new(raw.effects),
        }
        .map_err(D::Error::custom)?;
        if let Some(spec) = raw.spec {
            spec.check_same(povm.spec()).map_err(D::Error::custom)?;
        }
        Ok(povm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub regular: bool,
    pub worst_point: Vec<f64>,
    pub min_prob: f64,
}

/// A point of the simplex `Δ_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>, tol: f64) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidProbability("empty".into()));
        }
        if let Some(x) = p.iter().find(|&&x| x < -tol || !x.is_finite()) {
            return Err(Error::InvalidProbability(format!("entry {x}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidProbability(format!("sum is {sum}")));
        }
        Ok(Self(p))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_interior(&self, tol: f64) -> bool {
        self.min() > tol
    }
}

/// Fisher-Rao metric `Σ_j u_j v_j / p_j` on the open simplex.
pub fn fisher_rao(p: &ProbabilityVector, u: &[f64], v: &[f64], tol: f64) -> Result<f64> {
    for x in [u, v] {
        if x.len() != p.len() {
            return Err(Error::LengthMismatch {
                expected: p.len(),
                got: x.len(),
            });
        }
        let sum: f64 = x.iter().sum();
        if sum.abs() > 1e-9 * x.iter().map(|c| c.abs()).sum::<f64>().max(1.0) {
            return Err(Error::NotTangent(sum));
        }
    }
    if !p.is_interior(tol) {
        return Err(Error::InvalidProbability(format!(
            "boundary point, min entry {:.3e}",
            p.min()
        )));
    }
    Ok(p.0
        .iter()
        .zip(u.iter().zip(v))
        .map(|(pj, (uj, vj))| uj * vj / pj)
        .sum())
}

/// Default tolerance used by [`Povm::checked`] in the CLI and config loaders.
pub const POVM_TOL: f64 = POSITIVITY_TOL;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pauli, pauli_combination};

    fn sigma2_povm() -> Povm {
        Povm::qubit_axis([0.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(sigma2_povm().validate(POVM_TOL).passed);
        let spec = AlgebraSpec::matrix(2).unwrap();
        assert!(Povm::trivial(&spec).validate(POVM_TOL).passed);
        let bad = Povm::new(vec![pauli(1), pauli(0).sub(&pauli(1)).unwrap()]).unwrap();
        let diag = bad.validate(POVM_TOL);
        assert!(!diag.passed);
        assert!((diag.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!(diag.unitality_error < 1e-15);
        assert!(Povm::checked(bad.effects().to_vec(), POVM_TOL).is_err());
    }

    #[test]
    fn push_forward_examples() {
        let spec = AlgebraSpec::matrix(2).unwrap();
        let s = State::new(pauli_combination([0.5, 0.5, 0.0, 0.0]), POSITIVITY_TOL).unwrap();
        assert_eq!(
            Povm::trivial(&spec).push_forward(&s).unwrap().values(),
            &[1.0]
        );
        let p = sigma2_povm().push_forward(&s).unwrap();
        assert!((p.values()[0] - 0.5).abs() < 1e-15 && (p.values()[1] - 0.5).abs() < 1e-15);
        let up = State::new(pauli_combination([0.5, 0.0, 0.0, 0.5]), POSITIVITY_TOL).unwrap();
        let p = Povm::qubit_axis([0.0, 0.0, 1.0])
            .unwrap()
            .push_forward(&up)
            .unwrap();
        assert!((p.values()[0] - 1.0).abs() < 1e-15 && p.values()[1].abs() < 1e-15);
    }

    #[test]
    fn lift_examples() {
        let z = Povm::qubit_axis([0.0, 0.0, 1.0]).unwrap();
        assert!(
            z.lift(&[1.0, 1.0])
                .unwrap()
                .max_abs_diff(&pauli(0))
                .unwrap()
                < 1e-15
        );
        assert!(
            z.lift(&[1.0, 0.0])
                .unwrap()
                .max_abs_diff(&z.effects()[0])
                .unwrap()
                < 1e-15
        );
        assert!(
            z.lift(&[1.0, -1.0])
                .unwrap()
                .max_abs_diff(&pauli(3))
                .unwrap()
                < 1e-15
        );
        assert!(matches!(z.lift(&[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn fisher_rao_examples() {
        let half = ProbabilityVector::new(vec![0.5, 0.5], 1e-12).unwrap();
        assert!((fisher_rao(&half, &[1.0, -1.0], &[1.0, -1.0], 1e-9).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(
            fisher_rao(&half, &[1.0, -1.0], &[0.0, 0.0], 1e-9).unwrap(),
            0.0
        );
        let q = ProbabilityVector::new(vec![0.25, 0.75], 1e-12).unwrap();
        let g = fisher_rao(&q, &[1.0, -1.0], &[1.0, -1.0], 1e-9).unwrap();
        assert!((g - 16.0 / 3.0).abs() < 1e-13);
        let edge = ProbabilityVector::new(vec![1.0, 0.0], 1e-12).unwrap();
        assert!(fisher_rao(&edge, &[1.0, -1.0], &[1.0, -1.0], 1e-9).is_err());
        assert!(matches!(
            fisher_rao(&half, &[1.0, 1.0], &[1.0, -1.0], 1e-9),
            Err(Error::NotTangent(_))
        ));
    }

    #[test]
    fn kadison_examples() {
        let z = Povm::qubit_axis([0.3, -0.2, 1.0]).unwrap();
        assert!(z.kadison_defect(&[2.5, -1.0]).unwrap().abs() < 1e-12);
        let noisy = Povm::new(vec![
            pauli_combination([0.5, 0.0, 0.0, 0.2]),
            pauli_combination([0.5, 0.0, 0.0, -0.2]),
        ])
        .unwrap();
        assert!(noisy.kadison_defect(&[3.0, 3.0]).unwrap().abs() < 1e-12);
        assert!(noisy.kadison_defect(&[1.0, -1.0]).unwrap() > 0.1);
    }

    #[test]
    fn tensor_power_examples() {
        let p = sigma2_povm();
        let p1 = p.tensor_power(1).unwrap();
        assert_eq!(p1, p);
        let p2 = p.tensor_power(2).unwrap();
        assert_eq!(p2.len(), 4);
        assert_eq!(p2.spec().block_dims(), &[4]);
        assert!(p2.validate(POVM_TOL).passed);
        assert_eq!(p2.labels()[1], "x1,x2");
        assert!(p.tensor_power(0).is_err());
    }

    #[test]
    fn probability_vector_validation() {
        assert!(ProbabilityVector::new(vec![0.5, 0.6], 1e-9).is_err());
        assert!(ProbabilityVector::new(vec![1.1, -0.1], 1e-9).is_err());
        assert!(ProbabilityVector::new(vec![], 1e-9).is_err());
        let p = ProbabilityVector::new(vec![0.2, 0.8], 1e-9).unwrap();
        assert!(p.is_interior(1e-9));
    }

    #[test]
    fn povm_json() {
        let text = serde_json::to_string(&sigma2_povm()).unwrap();
        let back: Povm = serde_json::from_str(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.labels(), &["x1", "x2"]);
    }
}
