//! States, the invertible-group action on them, gradient/Hamiltonian vector fields,
//! the Jordan metric, its geodesics and the symmetric logarithmic derivative.
//!
//! A state `ρ` is stored through its density element `ρ̂`, with `ρ(a) = Σ_k Tr(ρ̂_k a_k)`.
//! Tangent vectors are trace-free self-adjoint functionals, stored the same way.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::algebra::{AlgebraSpec, Element, POSITIVITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};

/// Tolerance on `|Tr ρ̂ − 1|` when validating states.
pub const TRACE_TOL: f64 = 1e-9;

/// Relative cutoff on `λ_i + λ_j` (times the largest eigenvalue of `ρ̂`) below which an
/// SLD entry lies on the gauge (kernel) part.
pub const SLD_EPSILON: f64 = 1e-12;

/// Tangent components on the kernel larger than this (relative to `max(1, |ξ̂|)`) make the
/// SLD equation inconsistent.
pub const SLD_CONSISTENCY_TOL: f64 = 1e-7;

/// Below this speed a geodesic is the constant curve.
pub const GEODESIC_MIN_SPEED: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct State {
    spec: AlgebraSpec,
    density: Element,
}

impl State {
    /// Validates positivity (eigenvalues `>= -tol`) and unit trace.
    pub fn new(density: Element, tol: f64) -> Result<Self> {
        let dev = density.self_adjoint_deviation();
        if dev > tol.max(1e-12) {
            return Err(Error::NotSelfAdjoint(dev));
        }
        let density = density.hermitian_part();
        let min = density.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidState(format!(
                "density has eigenvalue {min:.3e}"
            )));
        }
        let tr = density.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL.max(tol) {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        Ok(Self::from_density_unchecked(density))
    }

    pub(crate) fn from_density_unchecked(density: Element) -> Self {
        Self {
            spec: density.spec().clone(),
            density,
        }
    }

    /// Normalizes a positive element to unit trace.
    pub fn from_positive(positive: Element) -> Result<Self> {
        let tr = positive.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        Self::new(positive.scale(1.0 / tr), POSITIVITY_TOL)
    }

    /// The maximally mixed state `𝕀 / Tr 𝕀`.
    pub fn maximally_mixed(spec: &AlgebraSpec) -> Self {
        let id = Element::identity(spec);
        let tr = id.trace().re;
        Self::from_density_unchecked(id.scale(1.0 / tr))
    }

    /// Probability vector on `C_n`.
    pub fn from_probabilities(p: &[f64]) -> Result<Self> {
        Self::new(Element::diagonal(p)?, POSITIVITY_TOL)
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn density(&self) -> &Element {
        &self.density
    }

    /// `ρ(a) = Σ_k Tr(ρ̂_k a_k)`.
    pub fn evaluate(&self, a: &Element) -> Result<Complex64> {
        self.density.trace_pairing(a)
    }

    /// Real part of `ρ(a)`, for self-adjoint `a`.
    pub fn expect(&self, a: &Element) -> Result<f64> {
        Ok(self.evaluate(a)?.re)
    }

    /// Per-block numerical rank of the density.
    pub fn orbit_signature(&self, tol: f64) -> Vec<usize> {
        self.density
            .block_eigenvalues()
            .iter()
            .map(|vals| vals.iter().filter(|&&v| v > tol).count())
            .collect()
    }

    pub fn is_faithful(&self, tol: f64) -> bool {
        self.orbit_signature(tol)
            .iter()
            .zip(self.spec.block_dims())
            .all(|(r, n)| r == n)
    }

    /// Max entry distance between densities.
    pub fn distance(&self, other: &State) -> Result<f64> {
        self.density.max_abs_diff(&other.density)
    }

    fn same_base(&self, other: &State) -> bool {
        self.spec == other.spec
            && self
                .density
                .max_abs_diff(&other.density)
                .is_ok_and(|d| d <= 1e-12)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            spec: Option<AlgebraSpec>,
            density: Element,
        }
        let raw = Raw::deserialize(deserializer)?;
        if let Some(spec) = &raw.spec {
            spec.check_same(raw.density.spec())
                .map_err(D::Error::custom)?;
        }
        State::new(raw.density, POSITIVITY_TOL).map_err(D::Error::custom)
    }
}

/// A tangent vector at a state: a trace-free self-adjoint functional `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentVector {
    base: State,
    rep: Element,
}

impl TangentVector {
    pub fn new(base: State, rep: Element) -> Result<Self> {
        base.spec.check_same(rep.spec())?;
        rep.require_self_adjoint(1e-9)?;
        let tr = rep.trace().re;
        if tr.abs() > 1e-9 * rep.max_abs().max(1.0) {
            return Err(Error::NotTangent(tr));
        }
        Ok(Self {
            base,
            rep: rep.hermitian_part(),
        })
    }

    pub fn zero(base: &State) -> Self {
        Self {
            rep: Element::zeros(base.spec()),
            base: base.clone(),
        }
    }

    pub fn base(&self) -> &State {
        &self.base
    }

    pub fn rep(&self) -> &Element {
        &self.rep
    }

    /// `⟨ξ, b⟩ = ξ(b)` for self-adjoint `b`.
    pub fn pair(&self, b: &Element) -> Result<f64> {
        Ok(self.rep.trace_pairing(b)?.re)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            base: self.base.clone(),
            rep: self.rep.scale(s),
        }
    }

    pub fn add(&self, other: &TangentVector) -> Result<Self> {
        if !self.base.same_base(&other.base) {
            return Err(Error::BaseMismatch);
        }
        Ok(Self {
            base: self.base.clone(),
            rep: self.rep.add(&other.rep)?,
        })
    }
}

impl<'de> Deserialize<'de> for TangentVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            base: State,
            rep: Element,
        }
        let raw = Raw::deserialize(deserializer)?;
        TangentVector::new(raw.base, raw.rep).map_err(D::Error::custom)
    }
}

/// `Φ(g, ρ)(c) = ρ(g† c g) / ρ(g† g)`, i.e. density `g ρ̂ g† / Tr(g ρ̂ g†)`.
///
/// This is a left action: `Φ(g₁, Φ(g₂, ρ)) = Φ(g₁ g₂, ρ)`.
pub fn group_action(g: &Element, s: &State) -> Result<State> {
    s.spec.check_same(g.spec())?;
    let smin = g.min_singular_value();
    let scale = g.spectral_norm().max(1.0);
    if smin <= 1e-12 * scale {
        return Err(Error::NotInvertible(smin));
    }
    let conj = g.multiply(s.density())?.multiply(&g.adjoint())?;
    let norm = conj.trace().re;
    if norm <= 1e-14 * scale * scale {
        return Err(Error::VanishingNormalization(norm));
    }
    Ok(State::from_density_unchecked(
        conj.scale(1.0 / norm).hermitian_part(),
    ))
}

/// Pushes a tangent at `s` forward through `Φ_g` for unitary `g`: `ξ̂ ↦ g ξ̂ g†`.
pub fn push_tangent_unitary(u: &Element, v: &TangentVector) -> Result<TangentVector> {
    let base = group_action(u, v.base())?;
    let rep = u.multiply(v.rep())?.multiply(&u.adjoint())?;
    TangentVector::new(base, rep)
}

/// Gradient vector `Y_a(ρ)`: `c ↦ ρ({a, c}) − ρ(a) ρ(c)`, density `{ρ̂, a} − ρ(a) ρ̂`.
pub fn gradient_vector(s: &State, a: &Element) -> Result<TangentVector> {
    a.require_self_adjoint(1e-9)?;
    let rho_a = s.expect(a)?;
    let rep = s.density().jordan(a)?.sub(&s.density().scale(rho_a))?;
    Ok(TangentVector {
        base: s.clone(),
        rep: rep.hermitian_part(),
    })
}

/// Hamiltonian vector `X_b(ρ)`: `c ↦ ρ([[b, c]])`, density `(ρ̂ b − b ρ̂) / 2i`.
pub fn hamiltonian_vector(s: &State, b: &Element) -> Result<TangentVector> {
    b.require_self_adjoint(1e-9)?;
    // ρ([[b,c]]) = Tr(ρ̂ (bc − cb))/2i = Tr((ρ̂b − bρ̂) c)/2i = Tr([[ρ̂, b]] c)
    let rep = s.density().lie(b)?;
    Ok(TangentVector {
        base: s.clone(),
        rep: rep.hermitian_part(),
    })
}

/// Fundamental vector `Γ_ab(ρ) = Y_a(ρ) + X_b(ρ)` of the generator `(a + i b) / 2`.
pub fn fundamental_vector(s: &State, a: &Element, b: &Element) -> Result<TangentVector> {
    let y = gradient_vector(s, a)?;
    let x = hamiltonian_vector(s, b)?;
    y.add(&x)
}

/// A solution of the SLD equation `{ρ̂, a} − ρ(a) ρ̂ = ξ̂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sld {
    pub element: Element,
    /// Free directions of the solution space: kernel pairs plus the identity direction.
    pub gauge_dim: usize,
}

/// Solves for the minimum-norm SLD of `v` with `ρ(a) = 0`.
///
/// Per block, in the eigenbasis of `ρ̂`: `a_ij = 2 ξ_ij / (λ_i + λ_j)` where the sum exceeds
/// the cutoff, zero otherwise. A nonzero `ξ_ij` on a cut-off pair means the tangent is not
/// tangent to the orbit and the solve fails.
pub fn sld_at_state(v: &TangentVector) -> Result<Sld> {
    let s = v.base();
    let lambda_max = s
        .density()
        .block_eigenvalues()
        .iter()
        .flatten()
        .copied()
        .fold(0.0, f64::max);
    let eps = SLD_EPSILON * lambda_max;
    let forbidden_tol = SLD_CONSISTENCY_TOL * v.rep().max_abs().max(1.0);

    let mut gauge = 0usize;
    let mut worst_forbidden = 0.0f64;
    let mut blocks = Vec::with_capacity(s.spec().num_blocks());
    for (rho, xi) in s.density().blocks().iter().zip(v.rep().blocks()) {
        let (lambda, u) = linalg::hermitian_eigh(rho);
        let xi_eig = u.adjoint() * xi * &u;
        let n = lambda.len();
        let mut a_eig = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let denom = lambda[i] + lambda[j];
                if denom > eps {
                    a_eig[(i, j)] = xi_eig[(i, j)] * (2.0 / denom);
                } else {
                    gauge += 1;
                    worst_forbidden = worst_forbidden.max(xi_eig[(i, j)].norm());
                    a_eig[(i, j)] = ZERO;
                }
            }
        }
        blocks.push(linalg::hermitian_part(&(&u * a_eig * u.adjoint())));
    }
    if worst_forbidden > forbidden_tol {
        return Err(Error::UnsolvableSld {
            residual: worst_forbidden,
        });
    }
    Ok(Sld {
        element: Element::from_blocks(s.spec().clone(), blocks)?,
        gauge_dim: gauge + 1,
    })
}

/// Round-trip residual `max |Y_a(ρ) − v|` of an SLD solution.
pub fn sld_residual(v: &TangentVector, a: &Element) -> Result<f64> {
    let back = gradient_vector(v.base(), a)?;
    back.rep().max_abs_diff(v.rep())
}

/// Jordan metric `G_ρ(v, w)`.
///
/// Evaluated as the pairing `v(b)` with `b` the SLD of `w`, which does not depend on the
/// gauge chosen for `b`. Both tangents must be tangent to the orbit of `s`.
pub fn metric(s: &State, v: &TangentVector, w: &TangentVector) -> Result<f64> {
    if !s.same_base(v.base()) || !s.same_base(w.base()) {
        return Err(Error::BaseMismatch);
    }
    sld_at_state(v)?;
    let b = sld_at_state(w)?.element;
    v.pair(&b)
}

/// Squared speed `|v|² = G(v, v)`.
pub fn speed_squared(v: &TangentVector) -> Result<f64> {
    metric(v.base(), v, v)
}

/// Geodesic of the Jordan metric through `v.base()` with initial velocity `v`.
///
/// With `a` the SLD of `v` (`ρ(a) = 0`) and `|v|² = ρ(a²)`, the density at time `t` is
/// `cos²(|v|t) ρ̂ + sin²(|v|t)/|v|² a ρ̂ a + sin(2|v|t)/(2|v|) {a, ρ̂}`.
pub fn geodesic(v: &TangentVector, t: f64) -> Result<State> {
    let s = v.base();
    let a = sld_at_state(v)?.element;
    let a_sq = a.multiply(&a)?;
    let speed = s.expect(&a_sq)?.max(0.0).sqrt();
    if speed < GEODESIC_MIN_SPEED {
        return Ok(s.clone());
    }
    let (sin, cos) = (speed * t).sin_cos();
    let sandwich = a.multiply(s.density())?.multiply(&a)?.hermitian_part();
    let jordan = a.jordan(s.density())?.hermitian_part();
    let density = s
        .density()
        .scale(cos * cos)
        .add(&sandwich.scale(sin * sin / (speed * speed)))?
        .add(&jordan.scale((2.0 * speed * t).sin() / (2.0 * speed)))?;
    Ok(State::from_density_unchecked(density))
}
