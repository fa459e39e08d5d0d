//! Cost functions, estimators, the loss functional and the Cramer-Rao / Helstrom chain.
//!
//! For a model `j`, a POVM `m` and an estimator `𝓔` (one parameter value per outcome), the
//! loss is `L(m₁, m₂) = Σ_j C(m₁, 𝓔_j) p^j(m₂)`. At a stationary point `θ⋆` of
//! `L⋆ = L(·, θ⋆)` the Hessian `H⋆` and the score matrix `𝒞` give the covariance
//! `Cov = H⋆⁻¹ 𝒞 H⋆⁻¹`, which dominates `(G^Mc)⁻¹`, which in turn dominates `(G^M)⁻¹`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::linalg::{self, RMatrix};
use crate::measurement::{Povm, ProbabilityVector, REGULARITY_TOL};
use crate::model::ParametricModel;

/// `‖residual‖∞` above this means the estimator is not stationary at the point.
pub const STATIONARITY_TOL: f64 = 1e-6;

/// Slack allowed on every bound inequality.
pub const BOUND_TOL: f64 = 1e-8;

/// Largest Hessian condition number accepted by [`EstimationProblem::covariance`].
pub const MAX_HESSIAN_CONDITION: f64 = 1e8;

/// Largest metric condition number accepted when inverting `G^M` or `G^Mc`.
pub const MAX_METRIC_CONDITION: f64 = 1e10;

/// Step for first-slot derivatives of non-Euclidean costs.
pub const COST_FD_STEP: f64 = 1e-5;

/// Step for the second differences of `L⋆` in [`EstimationProblem::hessian_by_differences`].
pub const HESSIAN_FD_STEP: f64 = 1e-4;

/// A smooth cost `C(m₁, m₂) ≥ 0` vanishing on the diagonal. Derivatives are taken in the
/// first slot; the defaults use central differences.
pub trait Cost: fmt::Debug + Send + Sync {
    fn value(&self, m1: &[f64], m2: &[f64]) -> f64;

    fn gradient(&self, m1: &[f64], m2: &[f64]) -> Vec<f64> {
        let mut x = m1.to_vec();
        (0..m1.len())
            .map(|r| {
                let h = COST_FD_STEP * m1[r].abs().max(1.0);
                x[r] = m1[r] + h;
                let hi = self.value(&x, m2);
                x[r] = m1[r] - h;
                let lo = self.value(&x, m2);
                x[r] = m1[r];
                (hi - lo) / (2.0 * h)
            })
            .collect()
    }

    fn hessian(&self, m1: &[f64], m2: &[f64]) -> RMatrix {
        let d = m1.len();
        let mut x = m1.to_vec();
        let mut h_mat = RMatrix::zeros(d, d);
        for r in 0..d {
            let h = COST_FD_STEP * m1[r].abs().max(1.0);
            x[r] = m1[r] + h;
            let hi = self.gradient(&x, m2);
            x[r] = m1[r] - h;
            let lo = self.gradient(&x, m2);
            x[r] = m1[r];
            for s in 0..d {
                h_mat[(r, s)] = (hi[s] - lo[s]) / (2.0 * h);
            }
        }
        linalg::symmetrize(&h_mat)
    }
}

#[derive(Debug, Clone)]
pub enum CostFunction {
    /// `(λ/2) (m₁ − m₂)ᵀ W (m₁ − m₂)` in chart coordinates, `W = 𝕀` when absent.
    Euclidean {
        weight: Option<RMatrix>,
        factor: f64,
    },
    Custom(Arc<dyn Cost>),
}

#[derive(Debug)]
struct ScaledCost {
    inner: Arc<dyn Cost>,
    factor: f64,
}

impl Cost for ScaledCost {
    fn value(&self, m1: &[f64], m2: &[f64]) -> f64 {
        self.factor * self.inner.value(m1, m2)
    }

    fn gradient(&self, m1: &[f64], m2: &[f64]) -> Vec<f64> {
        self.inner
            .gradient(m1, m2)
            .into_iter()
            .map(|g| self.factor * g)
            .collect()
    }

    fn hessian(&self, m1: &[f64], m2: &[f64]) -> RMatrix {
        self.inner.hessian(m1, m2).scale(self.factor)
    }
}

impl CostFunction {
    pub fn euclidean() -> Self {
        CostFunction::Euclidean {
            weight: None,
            factor: 1.0,
        }
    }

    /// Weighted Euclidean cost; `weight` must be symmetric positive definite.
    pub fn weighted(weight: RMatrix) -> Result<Self> {
        if !weight.is_square() {
            return Err(Error::InvalidArgument("weight must be square".into()));
        }
        if (&weight - weight.transpose()).amax() > 1e-12 * weight.amax().max(1.0) {
            return Err(Error::InvalidArgument("weight must be symmetric".into()));
        }
        if linalg::min_symmetric_eigenvalue(&weight) <= 0.0 {
            return Err(Error::InvalidArgument(
                "weight must be positive definite".into(),
            ));
        }
        Ok(CostFunction::Euclidean {
            weight: Some(weight),
            factor: 1.0,
        })
    }

    pub fn custom(cost: impl Cost + 'static) -> Self {
        CostFunction::Custom(Arc::new(cost))
    }

    /// `λ C` for `λ > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cost scale must be positive, got {factor}"
            )));
        }
        Ok(match self {
            CostFunction::Euclidean { weight, factor: f } => CostFunction::Euclidean {
                weight: weight.clone(),
                factor: f * factor,
            },
            CostFunction::Custom(inner) => CostFunction::Custom(Arc::new(ScaledCost {
                inner: inner.clone(),
                factor,
            })),
        })
    }

    fn weight(&self, d: usize) -> Option<RMatrix> {
        match self {
            CostFunction::Euclidean { weight, factor } => Some(
                weight
                    .clone()
                    .unwrap_or_else(|| RMatrix::identity(d, d))
                    .scale(*factor),
            ),
            CostFunction::Custom(_) => None,
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if let CostFunction::Euclidean {
            weight: Some(w), ..
        } = self
        {
            if w.nrows() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: w.nrows(),
                });
            }
        }
        Ok(())
    }

    pub fn value(&self, m1: &[f64], m2: &[f64]) -> f64 {
        match self {
            CostFunction::Custom(c) => c.value(m1, m2),
            _ => {
                let w = self.weight(m1.len()).expect("euclidean");
                let diff: Vec<f64> = m1.iter().zip(m2).map(|(a, b)| a - b).collect();
                0.5 * linalg::quadratic_form(&w, &diff)
            }
        }
    }

    pub fn gradient(&self, m1: &[f64], m2: &[f64]) -> Vec<f64> {
        match self {
            CostFunction::Custom(c) => c.gradient(m1, m2),
            _ => {
                let w = self.weight(m1.len()).expect("euclidean");
                let diff = DVector::from_iterator(m1.len(), m1.iter().zip(m2).map(|(a, b)| a - b));
                (w * diff).iter().copied().collect()
            }
        }
    }

    pub fn hessian(&self, m1: &[f64], m2: &[f64]) -> RMatrix {
        match self {
            CostFunction::Custom(c) => c.hessian(m1, m2),
            _ => self.weight(m1.len()).expect("euclidean"),
        }
    }
}

/// Cost description in configuration files: `{"kind": "euclidean", "weight": [[…]]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    pub kind: CostKind,
    #[serde(default)]
    pub weight: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    Euclidean,
}

impl CostConfig {
    pub fn build(&self) -> Result<CostFunction> {
        match (&self.kind, &self.weight) {
            (CostKind::Euclidean, None) => Ok(CostFunction::euclidean()),
            (CostKind::Euclidean, Some(rows)) => {
                let d = rows.len();
                if rows.iter().any(|r| r.len() != d) {
                    return Err(Error::InvalidArgument("weight must be square".into()));
                }
                CostFunction::weighted(RMatrix::from_fn(d, d, |r, c| rows[r][c]))
            }
        }
    }
}

/// Outcome-to-parameter map: value `𝓔_j ∈ ℝ^d` for outcome `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimator {
    values: Vec<Vec<f64>>,
}

impl Estimator {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let d = values
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("estimator has no values".into()))?;
        if d == 0 {
            return Err(Error::InvalidArgument("estimator values are empty".into()));
        }
        if let Some(v) = values.iter().find(|v| v.len() != d) {
            return Err(Error::LengthMismatch {
                expected: d,
                got: v.len(),
            });
        }
        if values.iter().all(|v| v == &values[0]) {
            return Err(Error::ConstantEstimator);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample-mean estimator on `N` rounds, outcomes in lexicographic order.
    pub fn sample_mean(&self, rounds: usize) -> Result<Estimator> {
        if rounds < 1 {
            return Err(Error::InvalidArgument("rounds must be >= 1".into()));
        }
        let n = self.len();
        let total = n
            .checked_pow(rounds as u32)
            .ok_or_else(|| Error::TooLarge(format!("{n}^{rounds} outcomes")))?;
        let d = self.dim();
        let values = (0..total)
            .map(|mut idx| {
                let mut acc = vec![0.0; d];
                for _ in 0..rounds {
                    let j = idx % n;
                    idx /= n;
                    for (a, v) in acc.iter_mut().zip(&self.values[j]) {
                        *a += v / rounds as f64;
                    }
                }
                acc
            })
            .collect();
        Estimator::new(values)
    }
}

impl<'de> Deserialize<'de> for Estimator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            values: Vec<Vec<f64>>,
        }
        Estimator::new(Raw::deserialize(deserializer)?.values).map_err(D::Error::custom)
    }
}

fn ser_matrix<S: Serializer>(m: &RMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    linalg::rows(m).serialize(s)
}

fn ser_opt_matrix<S: Serializer>(
    m: &Option<RMatrix>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    m.as_ref().map(linalg::rows).serialize(s)
}

/// Gaps for one test covector `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovectorGaps {
    pub covector: Vec<f64>,
    /// `ξᵀ Cov ξ − ξᵀ (G^Mc)⁻¹ ξ`
    pub cramer_rao: Option<f64>,
    /// `ξᵀ (G^Mc)⁻¹ ξ − ξᵀ (G^M)⁻¹ ξ`
    pub helstrom: Option<f64>,
    /// `ξᵀ (G^M − G^Mc) ξ`, defined even when `G^Mc` is singular.
    pub metric_gap: f64,
    /// `ξᵀ (G^M)⁻¹ ξ`
    pub quantum_floor: f64,
    /// `(1/N) ξᵀ (G^M_base)⁻¹ ξ` for an `N`-round model.
    pub round_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub point: Vec<f64>,
    pub rounds: usize,
    pub stationarity_residual: Option<Vec<f64>>,
    #[serde(serialize_with = "ser_opt_matrix")]
    pub hessian: Option<RMatrix>,
    #[serde(serialize_with = "ser_opt_matrix")]
    pub covariance: Option<RMatrix>,
    #[serde(serialize_with = "ser_matrix")]
    pub classical_metric: RMatrix,
    #[serde(serialize_with = "ser_matrix")]
    pub quantum_metric: RMatrix,
    pub covectors: Vec<CovectorGaps>,
    /// Min eigenvalue of `Cov − (G^Mc)⁻¹`.
    pub cramer_rao_min_eigenvalue: Option<f64>,
    /// Min eigenvalue of `(G^Mc)⁻¹ − (G^M)⁻¹`; absent when `G^Mc` is singular.
    pub helstrom_min_eigenvalue: Option<f64>,
    /// Min eigenvalue of `G^M − G^Mc`.
    pub majorization_min_eigenvalue: f64,
    /// Max eigenvalue of `G^M − G^Mc`; positive when no gap closes in some direction.
    pub majorization_max_eigenvalue: f64,
    pub cramer_rao_pass: Option<bool>,
    pub helstrom_pass: bool,
    pub pass: bool,
}

impl BoundReport {
    fn check_symmetric(&self) -> bool {
        let sym = |m: &RMatrix| (m - m.transpose()).amax() <= 1e-10;
        sym(&self.classical_metric)
            && sym(&self.quantum_metric)
            && self.hessian.as_ref().is_none_or(sym)
            && self.covariance.as_ref().is_none_or(sym)
    }
}

/// The `G^Mc` versus `G^M` part of the bound chain, without any estimator.
pub fn metric_chain(
    model: &ParametricModel,
    povm: &Povm,
    theta: &[f64],
    covectors: &[Vec<f64>],
    tol: f64,
) -> Result<BoundReport> {
    let classical = model.classical_metric(povm, theta, tol)?;
    let quantum = model.quantum_metric(theta)?;
    let quantum_inv = linalg::symmetric_inverse(&quantum, MAX_METRIC_CONDITION)?;
    let classical_inv = linalg::symmetric_inverse(&classical, MAX_METRIC_CONDITION).ok();
    let round_floor_inv = if model.rounds() > 1 {
        let base = model.base_model().quantum_metric(theta)?;
        Some(
            linalg::symmetric_inverse(&base, MAX_METRIC_CONDITION)?
                .scale(1.0 / model.rounds() as f64),
        )
    } else {
        None
    };
    let d = model.dim();
    let mut gaps = Vec::with_capacity(covectors.len());
    for xi in covectors {
        if xi.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: xi.len(),
            });
        }
        let quantum_floor = linalg::quadratic_form(&quantum_inv, xi);
        gaps.push(CovectorGaps {
            metric_gap: linalg::quadratic_form(&(&quantum - &classical), xi),
            covector: xi.clone(),
            cramer_rao: None,
            helstrom: classical_inv
                .as_ref()
                .map(|ci| linalg::quadratic_form(ci, xi) - quantum_floor),
            quantum_floor,
            round_floor: round_floor_inv
                .as_ref()
                .map(|fi| linalg::quadratic_form(fi, xi)),
        });
    }
    let majorization = linalg::symmetric_eigenvalues(&(&quantum - &classical));
    let majorization_min = majorization.first().copied().unwrap_or(0.0);
    let majorization_max = majorization.last().copied().unwrap_or(0.0);
    let helstrom_min = classical_inv
        .as_ref()
        .map(|ci| linalg::min_symmetric_eigenvalue(&(ci - &quantum_inv)));
    let helstrom_pass = majorization_min >= -BOUND_TOL
        && helstrom_min.is_none_or(|m| m >= -BOUND_TOL)
        && gaps
            .iter()
            .all(|g| g.helstrom.is_none_or(|h| h >= -BOUND_TOL));
    Ok(BoundReport {
        point: theta.to_vec(),
        rounds: model.rounds(),
        stationarity_residual: None,
        hessian: None,
        covariance: None,
        classical_metric: classical,
        quantum_metric: quantum,
        covectors: gaps,
        cramer_rao_min_eigenvalue: None,
        helstrom_min_eigenvalue: helstrom_min,
        majorization_min_eigenvalue: majorization_min,
        majorization_max_eigenvalue: majorization_max,
        cramer_rao_pass: None,
        helstrom_pass,
        pass: helstrom_pass,
    })
}

/// A model, a measurement, a cost and an estimator: everything the loss depends on.
#[derive(Debug, Clone, Copy)]
pub struct EstimationProblem<'a> {
    pub model: &'a ParametricModel,
    pub povm: &'a Povm,
    pub cost: &'a CostFunction,
    pub estimator: &'a Estimator,
    /// Regularity margin on probabilities.
    pub tol: f64,
}

impl<'a> EstimationProblem<'a> {
    pub fn new(
        model: &'a ParametricModel,
        povm: &'a Povm,
        cost: &'a CostFunction,
        estimator: &'a Estimator,
    ) -> Result<Self> {
        model.spec().check_same(povm.spec())?;
        if estimator.len() != povm.len() {
            return Err(Error::LengthMismatch {
                expected: povm.len(),
                got: estimator.len(),
            });
        }
        if estimator.dim() != model.dim() {
            return Err(Error::LengthMismatch {
                expected: model.dim(),
                got: estimator.dim(),
            });
        }
        cost.check_dim(model.dim())?;
        Ok(Self {
            model,
            povm,
            cost,
            estimator,
            tol: REGULARITY_TOL,
        })
    }

    /// Probabilities at `θ`, failing when an outcome has probability `≤ tol`.
    pub fn probabilities(&self, theta: &[f64]) -> Result<ProbabilityVector> {
        let p = self.povm.push_forward(&self.model.state_at(theta)?)?;
        if !p.is_interior(self.tol) {
            return Err(Error::NotRegular {
                point: theta.to_vec(),
                min_prob: p.min(),
            });
        }
        Ok(p)
    }

    fn costs_at(&self, m1: &[f64]) -> Vec<f64> {
        self.estimator
            .values()
            .iter()
            .map(|e| self.cost.value(m1, e))
            .collect()
    }

    /// `L(m₁, m₂) = Σ_j C(m₁, 𝓔_j) p^j(m₂)`.
    pub fn loss(&self, m1: &[f64], m2: &[f64]) -> Result<f64> {
        let p = self.probabilities(m2)?;
        Ok(self
            .costs_at(m1)
            .iter()
            .zip(p.values())
            .map(|(c, pj)| c * pj)
            .sum())
    }

    /// `𝓜_{m₁} = Σ_j C(m₁, 𝓔_j) m^j`, so that `L(m₁, m₂) = ρ_{m₂}(𝓜_{m₁})`.
    pub fn cost_element(&self, m1: &[f64]) -> Result<Element> {
        self.povm.lift(&self.costs_at(m1))
    }

    /// Gradient of `L⋆(m) = L(m, θ⋆)` at `m = θ⋆`; zero iff the estimator is stationary.
    pub fn stationarity_residual(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let p = self.probabilities(theta)?;
        let d = self.model.dim();
        let mut grad = vec![0.0; d];
        for (e, pj) in self.estimator.values().iter().zip(p.values()) {
            for (g, c) in grad.iter_mut().zip(self.cost.gradient(theta, e)) {
                *g += pj * c;
            }
        }
        Ok(grad)
    }

    fn require_stationary(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let residual = self.stationarity_residual(theta)?;
        if residual.iter().any(|r| r.abs() > STATIONARITY_TOL) {
            return Err(Error::NonStationary { residual });
        }
        Ok(residual)
    }

    /// Hessian `H⋆ = Σ_j p^j(θ⋆) ∇²₁C(θ⋆, 𝓔_j)` of `L⋆` at a stationary point.
    pub fn hessian(&self, theta: &[f64]) -> Result<RMatrix> {
        self.require_stationary(theta)?;
        let p = self.probabilities(theta)?;
        let d = self.model.dim();
        let h = self
            .estimator
            .values()
            .iter()
            .zip(p.values())
            .fold(RMatrix::zeros(d, d), |acc, (e, pj)| {
                acc + self.cost.hessian(theta, e).scale(*pj)
            });
        Ok(linalg::symmetrize(&h))
    }

    /// Central second differences of `L⋆` at `θ⋆`, symmetrized.
    pub fn hessian_by_differences(&self, theta: &[f64]) -> Result<RMatrix> {
        self.require_stationary(theta)?;
        let p = self.probabilities(theta)?;
        let l_star = |m: &[f64]| -> f64 {
            self.costs_at(m)
                .iter()
                .zip(p.values())
                .map(|(c, pj)| c * pj)
                .sum()
        };
        let d = self.model.dim();
        let steps: Vec<f64> = theta
            .iter()
            .map(|t| HESSIAN_FD_STEP * t.abs().max(1.0))
            .collect();
        let shifted = |r: usize, sr: f64, s: usize, ss: f64| -> f64 {
            let mut m = theta.to_vec();
            m[r] += sr * steps[r];
            m[s] += ss * steps[s];
            l_star(&m)
        };
        let mut h = RMatrix::zeros(d, d);
        for r in 0..d {
            for s in 0..d {
                h[(r, s)] = if r == s {
                    let mut plus = theta.to_vec();
                    let mut minus = theta.to_vec();
                    plus[r] += steps[r];
                    minus[r] -= steps[r];
                    (l_star(&plus) - 2.0 * l_star(theta) + l_star(&minus)) / (steps[r] * steps[r])
                } else {
                    (shifted(r, 1.0, s, 1.0) - shifted(r, 1.0, s, -1.0) - shifted(r, -1.0, s, 1.0)
                        + shifted(r, -1.0, s, -1.0))
                        / (4.0 * steps[r] * steps[s])
                };
            }
        }
        Ok(linalg::symmetrize(&h))
    }

    /// Score second moment `𝒞_{rs} = Σ_j ∂_r C_j ∂_s C_j p^j(θ⋆)`.
    pub fn score_matrix(&self, theta: &[f64]) -> Result<RMatrix> {
        let p = self.probabilities(theta)?;
        let d = self.model.dim();
        let c = self.estimator.values().iter().zip(p.values()).fold(
            RMatrix::zeros(d, d),
            |acc, (e, pj)| {
                let g = DVector::from_vec(self.cost.gradient(theta, e));
                acc + (&g * g.transpose()).scale(*pj)
            },
        );
        Ok(linalg::symmetrize(&c))
    }

    /// Covariance bivector `H⋆⁻¹ 𝒞 H⋆⁻¹`.
    pub fn covariance(&self, theta: &[f64]) -> Result<RMatrix> {
        let h = self.hessian(theta)?;
        let h_inv = linalg::symmetric_inverse(&h, MAX_HESSIAN_CONDITION)?;
        let c = self.score_matrix(theta)?;
        Ok(linalg::symmetrize(&(&h_inv * c * &h_inv)))
    }

    /// Cramer-Rao check: `Cov ⪰ (G^Mc)⁻¹`, per covector and as a matrix inequality.
    pub fn cr_check(&self, theta: &[f64], covectors: &[Vec<f64>]) -> Result<BoundReport> {
        let residual = self.require_stationary(theta)?;
        let hessian = self.hessian(theta)?;
        let covariance = self.covariance(theta)?;
        let classical = self.model.classical_metric(self.povm, theta, self.tol)?;
        let classical_inv = linalg::symmetric_inverse(&classical, MAX_METRIC_CONDITION)?;
        let mut report = metric_chain(self.model, self.povm, theta, covectors, self.tol)?;
        for gap in &mut report.covectors {
            gap.cramer_rao = Some(
                linalg::quadratic_form(&covariance, &gap.covector)
                    - linalg::quadratic_form(&classical_inv, &gap.covector),
            );
        }
        let cr_min = linalg::min_symmetric_eigenvalue(&(&covariance - &classical_inv));
        let cr_pass = cr_min >= -BOUND_TOL
            && report
                .covectors
                .iter()
                .all(|g| g.cramer_rao.is_none_or(|c| c >= -BOUND_TOL));
        report.stationarity_residual = Some(residual);
        report.hessian = Some(hessian);
        report.covariance = Some(covariance);
        report.cramer_rao_min_eigenvalue = Some(cr_min);
        report.cramer_rao_pass = Some(cr_pass);
        report.pass = cr_pass && report.helstrom_pass;
        debug_assert!(report.check_symmetric());
        Ok(report)
    }

    /// Full chain `Cov ⪰ (G^Mc)⁻¹ ⪰ (G^M)⁻¹`; requires both metrics invertible.
    pub fn helstrom_check(&self, theta: &[f64], covectors: &[Vec<f64>]) -> Result<BoundReport> {
        let report = self.cr_check(theta, covectors)?;
        if report.helstrom_min_eigenvalue.is_none() {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::Povm;

    fn bernoulli() -> (ParametricModel, Povm) {
        (
            ParametricModel::simplex_affine(2).unwrap(),
            Povm::identity_abelian(2).unwrap(),
        )
    }

    #[test]
    fn estimator_validation() {
        assert!(matches!(
            Estimator::new(vec![vec![0.3], vec![0.3]]),
            Err(Error::ConstantEstimator)
        ));
        assert!(Estimator::new(vec![]).is_err());
        assert!(matches!(
            Estimator::new(vec![vec![0.3], vec![0.3, 1.0]]),
            Err(Error::LengthMismatch { .. })
        ));
        let e: Estimator = serde_json::from_str(r#"{"values": [[1.0], [0.0]]}"#).unwrap();
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn loss_examples() {
        let (model, povm) = bernoulli();
        let cost = CostFunction::euclidean();
        let est = Estimator::new(vec![vec![1.0], vec![0.0]]).unwrap();
        let prob = EstimationProblem::new(&model, &povm, &cost, &est).unwrap();
        for &t in &[0.2, 0.5, 0.9] {
            let l = prob.loss(&[t], &[t]).unwrap();
            assert!((l - 0.5 * t * (1.0 - t)).abs() < 1e-15);
        }

        let pure = ParametricModel::qubit_pure();
        let y = Povm::qubit_axis([0.0, 1.0, 0.0]).unwrap();
        let half_pi = std::f64::consts::FRAC_PI_2;
        let est = Estimator::new(vec![vec![half_pi], vec![-half_pi]]).unwrap();
        let prob = EstimationProblem::new(&pure, &y, &cost, &est).unwrap();
        let l = prob.loss(&[0.0], &[0.0]).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((l - pi2 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn cost_element_examples() {
        let (model, povm) = bernoulli();
        let cost = CostFunction::euclidean();
        let est = Estimator::new(vec![vec![1.0], vec![0.0]]).unwrap();
        let prob = EstimationProblem::new(&model, &povm, &cost, &est).unwrap();
        let t = 0.3;
        let m = prob.cost_element(&[t]).unwrap();
        let vals = m.abelian_values().unwrap();
        assert!((vals[0] - 0.5 * (t - 1.0f64).powi(2)).abs() < 1e-15);
        assert!((vals[1] - 0.5 * t * t).abs() < 1e-15);
        let l = prob.loss(&[t], &[0.6]).unwrap();
        let s = model.state_at(&[0.6]).unwrap();
        assert!((s.expect(&m).unwrap() - l).abs() < 1e-15);

        let trivial = Povm::trivial(model.spec());
        let est1 = Estimator::new(vec![vec![0.7]]);
        assert!(matches!(est1, Err(Error::ConstantEstimator)));
        let _ = trivial;
    }

    #[test]
    fn stationarity_examples() {
        let (model, povm) = bernoulli();
        let cost = CostFunction::euclidean();
        let est = Estimator::new(vec![vec![1.0], vec![0.0]]).unwrap();
        let prob = EstimationProblem::new(&model, &povm, &cost, &est).unwrap();
        for &t in &[0.1, 0.5, 0.77] {
            assert!(prob.stationarity_residual(&[t]).unwrap()[0].abs() < 1e-15);
        }
        let est = Estimator::new(vec![vec![1.0], vec![0.1]]).unwrap();
        let prob = EstimationProblem::new(&model, &povm, &cost, &est).unwrap();
        let r = prob.stationarity_residual(&[0.5]).unwrap()[0];
        assert!((r + 0.05).abs() < 1e-15);
        assert!(matches!(
            prob.hessian(&[0.5]),
            Err(Error::NonStationary { .. })
        ));
    }

    #[test]
    fn hessian_examples() {
        let (model, povm) = bernoulli();
        let est = Estimator::new(vec![vec![1.0], vec![0.0]]).unwrap();
        let cost = CostFunction::euclidean();
        let prob = EstimationProblem::new(&model, &povm, &cost, &est).unwrap();
        let h = prob.hessian(&[0.3]).unwrap();
        assert!((h[(0, 0)] - 1.0).abs() < 1e-15);
        let hd = prob.hessian_by_differences(&[0.3]).unwrap();
        assert!((hd[(0, 0)] - 1.0).abs() < 1e-6);

        let w = CostFunction::weighted(RMatrix::from_element(1, 1, 2.5)).unwrap();
        let prob = EstimationProblem::new(&model, &povm, &w, &est).unwrap();
        assert!((prob.hessian(&[0.3]).unwrap()[(0, 0)] - 2.5).abs() < 1e-15);
    }

    #[test]
    fn covariance_examples() {
        let (model, povm) = bernoulli();
        let est = Estimator::new(vec![vec![1.0], vec![0.0]]).unwrap();
        let cost = CostFunction::euclidean();
        let prob = EstimationProblem::new(&model, &povm, &cost, &est).unwrap();
        for &t in &[0.2, 0.5, 0.8] {
            let c = prob.covariance(&[t]).unwrap();
            assert!((c[(0, 0)] - t * (1.0 - t)).abs() < 1e-15);
        }
        for factor in [0.1, 10.0] {
            let scaled = cost.scaled(factor).unwrap();
            let prob_s = EstimationProblem::new(&model, &povm, &scaled, &est).unwrap();
            let a = prob_s.covariance(&[0.35]).unwrap();
            let b = prob.covariance(&[0.35]).unwrap();
            assert!((a - b).amax() < 1e-12);
        }
    }

    #[test]
    fn degenerate_covariance_is_zero() {
        // Outcome 1 certain at θ; estimator returns θ⋆ there.
        let model = ParametricModel::qubit_pure();
        let z = Povm::qubit_axis([0.0, 0.0, 1.0]).unwrap();
        let cost = CostFunction::euclidean();
        let est = Estimator::new(vec![vec![0.4], vec![2.0]]).unwrap();
        let mut prob = EstimationProblem::new(&model, &z, &cost, &est).unwrap();
        // p = (½, ½) on this model; use a tiny regularity margin only to reach score_matrix.
        prob.tol = 0.0;
        let c = prob.score_matrix(&[0.4]).unwrap();
        assert!(c[(0, 0)] > 0.0);

        let trivial = Povm::new(vec![
            Element::identity(model.spec()),
            Element::zeros(model.spec()),
        ])
        .unwrap();
        let est = Estimator::new(vec![vec![0.4], vec![9.0]]).unwrap();
        let mut prob = EstimationProblem::new(&model, &trivial, &cost, &est).unwrap();
        prob.tol = -1.0;
        let cov = prob.covariance(&[0.4]).unwrap();
        assert_eq!(cov[(0, 0)], 0.0);
    }

    #[test]
    fn cramer_rao_examples() {
        let (model, povm) = bernoulli();
        let cost = CostFunction::euclidean();
        let est = Estimator::new(vec![vec![1.0], vec![0.0]]).unwrap();
        let prob = EstimationProblem::new(&model, &povm, &cost, &est).unwrap();
        let r = prob.cr_check(&[0.3], &[vec![1.0], vec![0.0]]).unwrap();
        assert!(r.covectors[0].cramer_rao.unwrap().abs() < 1e-12);
        assert_eq!(r.covectors[1].cramer_rao.unwrap(), 0.0);
        assert!(r.pass);

        // Outcome x1 split in two halves; 𝓔 = (2, 0, 0) is stationary with inflated variance.
        let split = Povm::new(vec![
            Element::diagonal(&[0.5, 0.0]).unwrap(),
            Element::diagonal(&[0.5, 0.0]).unwrap(),
            Element::diagonal(&[0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let est = Estimator::new(vec![vec![2.0], vec![0.0], vec![0.0]]).unwrap();
        let prob = EstimationProblem::new(&model, &split, &cost, &est).unwrap();
        let t = 0.3;
        let r = prob.cr_check(&[t], &[vec![1.0]]).unwrap();
        assert!((r.covectors[0].cramer_rao.unwrap() - t).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn helstrom_examples() {
        let model = ParametricModel::qubit_pure();
        let y = Povm::qubit_axis([0.0, 1.0, 0.0]).unwrap();
        // p^± = ½(1 ∓ sin γ): 𝓔 = ∓1 has mean −sin γ; at γ = 0 the estimator 𝓔 = (−1, 1)
        // is stationary because E[𝓔] = −sin 0 = 0 = γ.
        let cost = CostFunction::euclidean();
        let est = Estimator::new(vec![vec![-1.0], vec![1.0]]).unwrap();
        let prob = EstimationProblem::new(&model, &y, &cost, &est).unwrap();
        let r = prob.helstrom_check(&[0.0], &[vec![1.0]]).unwrap();
        assert!(r.covectors[0].cramer_rao.unwrap().abs() < 1e-8);
        assert!(r.covectors[0].helstrom.unwrap().abs() < 1e-8);

        let three = model.multi_round(3).unwrap();
        let y3 = y.tensor_power(3).unwrap();
        let chain = metric_chain(&three, &y3, &[0.0], &[vec![1.0]], 1e-9).unwrap();
        assert!((chain.covectors[0].round_floor.unwrap() - 1.0 / 3.0).abs() < 1e-10);
        assert!((chain.covectors[0].quantum_floor - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn singular_classical_metric() {
        let model = ParametricModel::qubit_dephasing();
        let z = Povm::qubit_axis([0.0, 0.0, 1.0]).unwrap();
        let r = metric_chain(&model, &z, &[1.0, 1.0], &[vec![1.0, 0.0]], 1e-9).unwrap();
        assert!(r.helstrom_min_eigenvalue.is_none());
        assert!(r.covectors[0].helstrom.is_none());
        assert!(r.majorization_max_eigenvalue > 0.0);
        assert!(r.covectors[0].metric_gap > 0.0);
        assert!(r.helstrom_pass);
    }

    #[derive(Debug)]
    struct CosineCost;

    impl Cost for CosineCost {
        fn value(&self, m1: &[f64], m2: &[f64]) -> f64 {
            m1.iter().zip(m2).map(|(a, b)| 1.0 - (a - b).cos()).sum()
        }
    }

    #[test]
    fn custom_cost_derivatives() {
        let cost = CostFunction::custom(CosineCost);
        let g = cost.gradient(&[0.3], &[1.0]);
        assert!((g[0] - (0.3f64 - 1.0).sin()).abs() < 1e-9);
        let h = cost.hessian(&[0.3], &[1.0]);
        assert!((h[(0, 0)] - (0.3f64 - 1.0).cos()).abs() < 1e-6);
        let scaled = cost.scaled(3.0).unwrap();
        assert!((scaled.value(&[0.3], &[1.0]) - 3.0 * cost.value(&[0.3], &[1.0])).abs() < 1e-15);
        assert_eq!(cost.value(&[0.4], &[0.4]), 0.0);
    }

    #[test]
    fn sample_mean_estimator() {
        let est = Estimator::new(vec![vec![1.0], vec![0.0]]).unwrap();
        let two = est.sample_mean(2).unwrap();
        let vals: Vec<f64> = two.values().iter().map(|v| v[0]).collect();
        assert_eq!(vals, vec![1.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn cost_config() {
        let c: CostConfig = serde_json::from_str(r#"{"kind": "euclidean"}"#).unwrap();
        assert!(matches!(
            c.build().unwrap(),
            CostFunction::Euclidean { weight: None, .. }
        ));
        let c: CostConfig =
            serde_json::from_str(r#"{"kind": "euclidean", "weight": [[2, 0], [0, 1]]}"#).unwrap();
        assert!(c.build().is_ok());
        let c: CostConfig =
            serde_json::from_str(r#"{"kind": "euclidean", "weight": [[-1]]}"#).unwrap();
        assert!(c.build().is_err());
    }
}
