//! Parametric models of states and their pullback metrics.
//!
//! A model maps points `θ` of an open box (the chart domain) into a single orbit of
//! states. Tangents are pushed forward analytically for the built-in models and by
//! central differences otherwise; the quantum metric `G^M` and the classical
//! Fisher-Rao metric `G^Mc` of a POVM are pulled back through those tangents.

use serde::{Deserialize, Serialize};

use crate::algebra::{tensor_power, AlgebraSpec, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, RMatrix};
use crate::measurement::Povm;
use crate::state_space::{self, group_action, Sld, State, TangentVector};

/// Relative central-difference step: `h = FD_STEP · max(1, |θ|∞)`.
pub const FD_STEP: f64 = 1e-5;

/// Multi-round models must satisfy `2 · dim ≤ MAX_ROUND_DIM`.
pub const MAX_ROUND_DIM: usize = 4096;

/// An open interval; infinite ends are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Option<f64>; 2]", into = "[Option<f64>; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REALS: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

impl From<[Option<f64>; 2]> for Interval {
    fn from([lo, hi]: [Option<f64>; 2]) -> Self {
        Interval {
            lo: lo.unwrap_or(f64::NEG_INFINITY),
            hi: hi.unwrap_or(f64::INFINITY),
        }
    }
}

impl From<Interval> for [Option<f64>; 2] {
    fn from(i: Interval) -> Self {
        [
            i.lo.is_finite().then_some(i.lo),
            i.hi.is_finite().then_some(i.hi),
        ]
    }
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    /// `ρ_γ = ½(σ⁰ + cos γ σ¹ − sin γ σ²)`, `γ ∈ ℝ`.
    QubitPure,
    /// `ρ_{γ,ζ} = ½(σ⁰ + e^{−ζγ}(cos γ σ¹ − sin γ σ²))`, `γ, ζ > 0`.
    QubitDephasing,
    /// Diagonal states `(p¹, …, p^{n−1}, 1 − Σ p)` of `C_n`.
    SimplexAffine { n: usize },
    /// `θ ↦ Φ(exp(Σ θ_r g_r'), ρ₀)` with `g_r' = i g_r` when `skew`.
    LieGroup {
        generators: Vec<Element>,
        rho0: State,
        skew: bool,
    },
    /// `θ ↦ ρ_θ^{⊗N}`.
    MultiRound {
        base: Box<ParametricModel>,
        rounds: usize,
    },
}

#[derive(Debug, Clone)]
pub struct ParametricModel {
    spec: AlgebraSpec,
    domain: Vec<Interval>,
    kind: ModelKind,
}

impl ParametricModel {
    pub fn qubit_pure() -> Self {
        Self {
            spec: AlgebraSpec::matrix(2).expect("valid"),
            domain: vec![Interval::REALS],
            kind: ModelKind::QubitPure,
        }
    }

    pub fn qubit_dephasing() -> Self {
        Self {
            spec: AlgebraSpec::matrix(2).expect("valid"),
            domain: vec![Interval::POSITIVE, Interval::POSITIVE],
            kind: ModelKind::QubitDephasing,
        }
    }

    /// Full model of the open simplex `Δ_n^+`; for `n = 2` this is the Bernoulli model.
    pub fn simplex_affine(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("simplex model needs n >= 2".into()));
        }
        Ok(Self {
            spec: AlgebraSpec::abelian(n)?,
            domain: vec![Interval::UNIT; n - 1],
            kind: ModelKind::SimplexAffine { n },
        })
    }

    pub fn lie_group(generators: Vec<Element>, rho0: State, skew: bool) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidArgument("no generators".into()));
        }
        for g in &generators {
            rho0.spec().check_same(g.spec())?;
            g.require_self_adjoint(1e-9)?;
        }
        let generators: Vec<Element> = generators.iter().map(Element::hermitian_part).collect();
        Ok(Self {
            spec: rho0.spec().clone(),
            domain: vec![Interval::REALS; generators.len()],
            kind: ModelKind::LieGroup {
                generators,
                rho0,
                skew,
            },
        })
    }

    /// The `N`-round model `θ ↦ ρ_θ^{⊗N}`.
    pub fn multi_round(&self, rounds: usize) -> Result<Self> {
        if rounds < 1 {
            return Err(Error::InvalidArgument("rounds must be >= 1".into()));
        }
        if !(self.spec.is_single_block() || self.spec.is_abelian()) {
            return Err(Error::InvalidArgument(
                "multi-round models need a single-block or abelian algebra".into(),
            ));
        }
        let width: usize = self.spec.block_dims().iter().sum();
        let total = (width as f64).powi(rounds as i32);
        if 2.0 * total > MAX_ROUND_DIM as f64 {
            return Err(Error::TooLarge(format!(
                "{width}^{rounds} exceeds the multi-round dimension guard"
            )));
        }
        Ok(Self {
            spec: tensor_power(&self.spec, rounds)?,
            domain: self.domain.clone(),
            kind: ModelKind::MultiRound {
                base: Box::new(self.clone()),
                rounds,
            },
        })
    }

    /// Replaces the chart domain (same number of coordinates).
    pub fn with_domain(mut self, domain: Vec<Interval>) -> Result<Self> {
        if domain.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: domain.len(),
            });
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Number of rounds for multi-round wrappers, 1 otherwise.
    pub fn rounds(&self) -> usize {
        match &self.kind {
            ModelKind::MultiRound { rounds, .. } => *rounds,
            _ => 1,
        }
    }

    /// The single-round model beneath any multi-round wrapper.
    pub fn base_model(&self) -> &ParametricModel {
        match &self.kind {
            ModelKind::MultiRound { base, .. } => base.base_model(),
            _ => self,
        }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        if theta.len() != self.dim() {
            return false;
        }
        let in_box = theta
            .iter()
            .zip(&self.domain)
            .all(|(&x, i)| x.is_finite() && i.contains(x));
        in_box && self.extra_constraint(theta)
    }

    fn extra_constraint(&self, theta: &[f64]) -> bool {
        match &self.kind {
            ModelKind::SimplexAffine { .. } => theta.iter().sum::<f64>() < 1.0,
            ModelKind::MultiRound { base, .. } => base.extra_constraint(theta),
            _ => true,
        }
    }

    fn check_point(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        if !self.contains(theta) {
            return Err(Error::OutOfDomain(format!("{theta:?}")));
        }
        Ok(())
    }

    /// The state `j(θ)`.
    pub fn state_at(&self, theta: &[f64]) -> Result<State> {
        self.check_point(theta)?;
        self.state_unchecked(theta)
    }

    fn state_unchecked(&self, theta: &[f64]) -> Result<State> {
        match &self.kind {
            ModelKind::QubitPure => Ok(State::from_density_unchecked(qubit_bloch(1.0, theta[0]))),
            ModelKind::QubitDephasing => {
                let (gamma, zeta) = (theta[0], theta[1]);
                Ok(State::from_density_unchecked(qubit_bloch(
                    (-zeta * gamma).exp(),
                    gamma,
                )))
            }
            ModelKind::SimplexAffine { .. } => {
                let mut p = theta.to_vec();
                p.push(1.0 - theta.iter().sum::<f64>());
                Ok(State::from_density_unchecked(Element::diagonal(&p)?))
            }
            ModelKind::LieGroup {
                generators,
                rho0,
                skew,
            } => {
                let g = lie_exponential(generators, theta, *skew)?;
                group_action(&g, rho0)
            }
            ModelKind::MultiRound { base, rounds } => {
                let rho = base.state_unchecked(theta)?;
                let copies = vec![rho.density().clone(); *rounds];
                Ok(State::from_density_unchecked(
                    crate::algebra::tensor_elements(&copies)?,
                ))
            }
        }
    }

    /// Analytic derivative of the density along `dir`, where the model provides one.
    fn analytic_derivative(&self, theta: &[f64], dir: &[f64]) -> Option<Result<Element>> {
        match &self.kind {
            ModelKind::QubitPure => {
                let g = theta[0];
                Some(Ok(crate::algebra::pauli_combination([
                    0.0,
                    -0.5 * g.sin() * dir[0],
                    -0.5 * g.cos() * dir[0],
                    0.0,
                ])))
            }
            ModelKind::QubitDephasing => {
                let (g, z) = (theta[0], theta[1]);
                let r = (-z * g).exp();
                let (s, c) = g.sin_cos();
                // ∂γ and ∂ζ of ½ r (cos γ σ¹ − sin γ σ²)
                let d_gamma = [0.5 * r * (-z * c - s), 0.5 * r * (z * s - c)];
                let d_zeta = [-0.5 * g * r * c, 0.5 * g * r * s];
                Some(Ok(crate::algebra::pauli_combination([
                    0.0,
                    d_gamma[0] * dir[0] + d_zeta[0] * dir[1],
                    d_gamma[1] * dir[0] + d_zeta[1] * dir[1],
                    0.0,
                ])))
            }
            ModelKind::SimplexAffine { .. } => {
                let mut u = dir.to_vec();
                u.push(-dir.iter().sum::<f64>());
                Some(Element::diagonal(&u))
            }
            ModelKind::LieGroup { .. } => None,
            ModelKind::MultiRound { base, rounds } => {
                Some(base.density_derivative(theta, dir).and_then(|xi| {
                    let rho = base.state_unchecked(theta)?.density().clone();
                    product_rule(&rho, &xi, *rounds)
                }))
            }
        }
    }

    fn density_derivative(&self, theta: &[f64], dir: &[f64]) -> Result<Element> {
        match self.analytic_derivative(theta, dir) {
            Some(d) => d,
            None => self.finite_difference(theta, dir),
        }
    }

    /// Central difference `(ρ̂(θ + h·dir) − ρ̂(θ − h·dir)) / 2h`.
    pub fn finite_difference(&self, theta: &[f64], dir: &[f64]) -> Result<Element> {
        let h = fd_step(theta);
        let plus: Vec<f64> = theta.iter().zip(dir).map(|(t, d)| t + h * d).collect();
        let minus: Vec<f64> = theta.iter().zip(dir).map(|(t, d)| t - h * d).collect();
        if !self.contains(&plus) || !self.contains(&minus) {
            return Err(Error::OutOfDomain(format!(
                "finite-difference stencil around {theta:?} leaves the domain"
            )));
        }
        let hi = self.state_unchecked(&plus)?;
        let lo = self.state_unchecked(&minus)?;
        Ok(hi
            .density()
            .sub(lo.density())?
            .scale(1.0 / (2.0 * h))
            .hermitian_part())
    }

    /// Pushforward `T_θ j(dir)` as a tangent vector at `j(θ)`.
    pub fn tangent_push(&self, theta: &[f64], dir: &[f64]) -> Result<TangentVector> {
        let state = self.state_at(theta)?;
        if dir.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: dir.len(),
            });
        }
        if dir.iter().all(|&d| d == 0.0) {
            return Ok(TangentVector::zero(&state));
        }
        let rep = self.density_derivative(theta, dir)?;
        TangentVector::new(state, rep)
    }

    /// Pushforward by central differences even where an analytic derivative exists.
    pub fn tangent_push_fd(&self, theta: &[f64], dir: &[f64]) -> Result<TangentVector> {
        let state = self.state_at(theta)?;
        let rep = self.finite_difference(theta, dir)?;
        TangentVector::new(state, rep)
    }

    /// Coordinate tangents `T_θ j(e_r)`.
    pub fn coordinate_tangents(&self, theta: &[f64]) -> Result<Vec<TangentVector>> {
        (0..self.dim())
            .map(|r| self.tangent_push(theta, &unit(self.dim(), r)))
            .collect()
    }

    /// SLD of the pushed-forward direction.
    pub fn sld(&self, theta: &[f64], dir: &[f64]) -> Result<Sld> {
        state_space::sld_at_state(&self.tangent_push(theta, dir)?)
    }

    /// Pullback `G^M_{rs} = G(T j(e_r), T j(e_s))` of the Jordan metric.
    pub fn quantum_metric(&self, theta: &[f64]) -> Result<RMatrix> {
        let tangents = self.coordinate_tangents(theta)?;
        let slds = tangents
            .iter()
            .map(|t| state_space::sld_at_state(t).map(|s| s.element))
            .collect::<Result<Vec<_>>>()?;
        let d = self.dim();
        let mut g = RMatrix::zeros(d, d);
        for r in 0..d {
            for s in 0..d {
                g[(r, s)] = tangents[r].pair(&slds[s])?;
            }
        }
        Ok(linalg::symmetrize(&g))
    }

    /// Pullback `G^Mc_{rs} = Σ_j ∂_r p^j ∂_s p^j / p^j` of the Fisher-Rao metric.
    pub fn classical_metric(&self, povm: &Povm, theta: &[f64], tol: f64) -> Result<RMatrix> {
        self.spec.check_same(povm.spec())?;
        let state = self.state_at(theta)?;
        let p = povm.push_forward(&state)?;
        if !p.is_interior(tol) {
            return Err(Error::NotRegular {
                point: theta.to_vec(),
                min_prob: p.min(),
            });
        }
        let tangents = self.coordinate_tangents(theta)?;
        let dp = tangents
            .iter()
            .map(|t| {
                povm.effects()
                    .iter()
                    .map(|m| t.pair(m))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let d = self.dim();
        let mut g = RMatrix::zeros(d, d);
        for r in 0..d {
            for s in 0..d {
                g[(r, s)] = p
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(j, pj)| dp[r][j] * dp[s][j] / pj)
                    .sum();
            }
        }
        Ok(linalg::symmetrize(&g))
    }
}

fn unit(d: usize, r: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[r] = 1.0;
    e
}

pub(crate) fn fd_step(theta: &[f64]) -> f64 {
    FD_STEP * theta.iter().fold(1.0f64, |m, x| m.max(x.abs()))
}

/// `½(σ⁰ + r(cos γ σ¹ − sin γ σ²))`
fn qubit_bloch(r: f64, gamma: f64) -> Element {
    let (s, c) = gamma.sin_cos();
    crate::algebra::pauli_combination([0.5, 0.5 * r * c, -0.5 * r * s, 0.0])
}

/// `exp(Σ θ_r g_r')` block by block, with `g_r' = i g_r` when `skew`.
pub fn lie_exponential(generators: &[Element], theta: &[f64], skew: bool) -> Result<Element> {
    let first = generators
        .first()
        .ok_or_else(|| Error::InvalidArgument("no generators".into()))?;
    if theta.len() != generators.len() {
        return Err(Error::LengthMismatch {
            expected: generators.len(),
            got: theta.len(),
        });
    }
    let exponent = generators
        .iter()
        .zip(theta)
        .try_fold(Element::zeros(first.spec()), |acc, (g, &t)| {
            acc.add(&g.scale(t))
        })?;
    Ok(exponent.map_blocks(|h| {
        if skew {
            linalg::expi_hermitian(h)
        } else {
            linalg::exp_hermitian(h)
        }
    }))
}

/// `d/dθ ρ^{⊗N} = Σ_i ρ ⊗ … ⊗ ξ ⊗ … ⊗ ρ` (ξ in slot i).
fn product_rule(rho: &Element, xi: &Element, rounds: usize) -> Result<Element> {
    let spec = tensor_power(rho.spec(), rounds)?;
    (0..rounds).try_fold(Element::zeros(&spec), |acc, slot| {
        let factors: Vec<Element> = (0..rounds)
            .map(|i| if i == slot { xi.clone() } else { rho.clone() })
            .collect();
        acc.add(&crate::algebra::tensor_elements(&factors)?)
    })
}

/// Model description as read from configuration files.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "type")]
    pub kind: ModelType,
    #[serde(default)]
    pub spec: Option<AlgebraSpec>,
    #[serde(default)]
    pub generators: Option<Vec<Element>>,
    #[serde(default)]
    pub skew: Option<bool>,
    #[serde(default)]
    pub rho0: Option<State>,
    #[serde(default)]
    pub domain: Option<Vec<Interval>>,
    /// Number of outcomes for `simplex_affine` when no spec is given.
    #[serde(default)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelType {
    QubitPure,
    QubitDephasing,
    SimplexAffine,
    LieGroup,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ParametricModel> {
        let model = match self.kind {
            ModelType::QubitPure => ParametricModel::qubit_pure(),
            ModelType::QubitDephasing => ParametricModel::qubit_dephasing(),
            ModelType::SimplexAffine => {
                let n = match (&self.spec, self.n) {
                    (_, Some(n)) => n,
                    (Some(spec), None) if spec.is_abelian() => spec.num_blocks(),
                    (Some(_), None) => {
                        return Err(Error::InvalidArgument(
                            "simplex_affine needs an abelian spec".into(),
                        ))
                    }
                    (None, None) => {
                        return Err(Error::InvalidArgument(
                            "simplex_affine needs `n` or an abelian `spec`".into(),
                        ))
                    }
                };
                ParametricModel::simplex_affine(n)?
            }
            ModelType::LieGroup => {
                let generators = self
                    .generators
                    .clone()
                    .ok_or_else(|| Error::InvalidArgument("lie_group needs `generators`".into()))?;
                let rho0 = self
                    .rho0
                    .clone()
                    .ok_or_else(|| Error::InvalidArgument("lie_group needs `rho0`".into()))?;
                ParametricModel::lie_group(generators, rho0, self.skew.unwrap_or(true))?
            }
        };
        if let Some(spec) = &self.spec {
            spec.check_same(model.spec())?;
        }
        match &self.domain {
            Some(domain) => model.with_domain(domain.clone()),
            None => Ok(model),
        }
    }
}
