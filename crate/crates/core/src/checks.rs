//! Seeded invariant suites: each reports its trial count and the worst slack, where a
//! slack is `bound − observed` (non-negative means the invariant holds).

use rand::Rng;
use serde::Serialize;

use crate::algebra::{AlgebraSpec, Element, POSITIVITY_TOL};
use crate::error::Result;
use crate::measurement::{fisher_rao, Povm, REGULARITY_TOL};
use crate::model::ParametricModel;
use crate::random::{self, SeededRng};
use crate::state_space::{self, State, TangentVector};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub worst_slack: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn from_slacks(name: &str, slacks: &[f64]) -> Self {
        let failures = slacks.iter().filter(|s| s.is_nan() || **s < 0.0).count();
        let worst_slack = slacks.iter().copied().fold(f64::INFINITY, |m, s| {
            if s.is_nan() {
                f64::NEG_INFINITY
            } else {
                m.min(s)
            }
        });
        Self {
            name: name.to_string(),
            trials: slacks.len(),
            failures,
            worst_slack,
            passed: failures == 0 && !slacks.is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<CheckOutcome>,
    pub passed: bool,
}

impl CheckReport {
    pub fn failed_names(&self) -> Vec<&str> {
        self.suites
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.name.as_str())
            .collect()
    }

    pub fn push(&mut self, outcome: CheckOutcome) {
        self.passed &= outcome.passed;
        self.suites.push(outcome);
    }
}

fn qubit_or_qutrit(rng: &mut SeededRng) -> AlgebraSpec {
    AlgebraSpec::matrix(if rng.random_bool(0.5) { 2 } else { 3 }).expect("valid size")
}

fn random_lie_model(rng: &mut SeededRng, spec: &AlgebraSpec) -> Result<ParametricModel> {
    let d = rng.random_range(1..=2);
    let generators = (0..d)
        .map(|_| random::random_hermitian(rng, spec).scale(0.5))
        .collect();
    let rho0 = random::random_density(rng, spec);
    ParametricModel::lie_group(generators, rho0, rng.random_bool(0.5))
}

/// `m(f²) − m(f)² ⪰ 0` on random POVMs and random `f`.
pub fn kadison(rng: &mut SeededRng, trials: usize) -> Result<CheckOutcome> {
    let mut slacks = Vec::with_capacity(trials);
    for _ in 0..trials {
        let spec = qubit_or_qutrit(rng);
        let outcomes = rng.random_range(2..=6);
        let povm = random::random_povm(rng, &spec, outcomes)?;
        let f: Vec<f64> = (0..outcomes).map(|_| rng.random_range(-3.0..3.0)).collect();
        slacks.push(povm.kadison_defect(&f)? + POSITIVITY_TOL);
    }
    Ok(CheckOutcome::from_slacks("kadison", &slacks))
}

/// `G^M − G^Mc ⪰ 0` for random POVMs on random Lie-group models.
pub fn majorization(rng: &mut SeededRng, trials: usize) -> Result<CheckOutcome> {
    let mut slacks = Vec::with_capacity(trials);
    for _ in 0..trials {
        let spec = qubit_or_qutrit(rng);
        let model = random_lie_model(rng, &spec)?;
        let outcomes = rng.random_range(2..=6);
        let povm = random::random_povm(rng, &spec, outcomes)?;
        let theta = random::random_point(rng, -1.0, 1.0, model.dim(), 0.0);
        let quantum = model.quantum_metric(&theta)?;
        let classical = model.classical_metric(&povm, &theta, REGULARITY_TOL)?;
        let gap = crate::linalg::min_symmetric_eigenvalue(&(quantum - classical));
        slacks.push(gap + 1e-8);
    }
    Ok(CheckOutcome::from_slacks("majorization", &slacks))
}

/// `‖G^{M,N} − N·G^M‖_F ≤ 1e-6` on the built-in qubit models for `N ∈ {2, 3}`.
pub fn n_round_scaling(rng: &mut SeededRng, points: usize) -> Result<CheckOutcome> {
    let mut slacks = Vec::new();
    let models = [
        ParametricModel::qubit_pure(),
        ParametricModel::qubit_dephasing(),
    ];
    for model in &models {
        for _ in 0..points {
            let theta: Vec<f64> = model
                .domain()
                .iter()
                .map(|iv| {
                    let lo = iv.lo.max(-3.0) + 0.1;
                    let hi = iv.hi.min(3.0) - 0.1;
                    rng.random_range(lo..hi)
                })
                .collect();
            let base = model.quantum_metric(&theta)?;
            for rounds in [2, 3] {
                let g = model.multi_round(rounds)?.quantum_metric(&theta)?;
                let err = (g - base.scale(rounds as f64)).norm();
                slacks.push(1e-6 - err);
            }
        }
    }
    Ok(CheckOutcome::from_slacks("n_round_scaling", &slacks))
}

fn random_gradient_tangent(rng: &mut SeededRng, s: &State) -> Result<TangentVector> {
    let a = random::random_hermitian(rng, s.spec());
    state_space::gradient_vector(s, &a)
}

/// `G_{Φ(u,ρ)}(u·v, u·w) = G_ρ(v, w)` for random unitaries.
pub fn unitary_invariance(rng: &mut SeededRng, trials: usize) -> Result<CheckOutcome> {
    let mut slacks = Vec::with_capacity(trials);
    for _ in 0..trials {
        let spec = qubit_or_qutrit(rng);
        let s = random::random_density(rng, &spec);
        let v = random_gradient_tangent(rng, &s)?;
        let w = random_gradient_tangent(rng, &s)?;
        let u = random::random_unitary(rng, &spec);
        let moved = state_space::group_action(&u, &s)?;
        let uv = state_space::push_tangent_unitary(&u, &v)?;
        let uw = state_space::push_tangent_unitary(&u, &w)?;
        let before = state_space::metric(&s, &v, &w)?;
        let after = state_space::metric(&moved, &uv, &uw)?;
        slacks.push(1e-8 - (before - after).abs());
    }
    Ok(CheckOutcome::from_slacks("unitary_invariance", &slacks))
}

/// Geodesics stay in the state space for `t ∈ [−3, 3]`.
pub fn geodesic_validity(rng: &mut SeededRng, trials: usize) -> Result<CheckOutcome> {
    let mut slacks = Vec::with_capacity(trials);
    for _ in 0..trials {
        let spec = qubit_or_qutrit(rng);
        let s = if rng.random_bool(0.5) {
            random::random_density(rng, &spec)
        } else {
            random::random_pure(rng, &spec)
        };
        let v = random_gradient_tangent(rng, &s)?;
        let mut worst = f64::INFINITY;
        for k in -30..=30 {
            let nu = state_space::geodesic(&v, k as f64 * 0.1)?;
            let density = nu.density();
            let positivity = density.min_eigenvalue() + 1e-9;
            let trace = 1e-12 - (density.trace().re - 1.0).abs();
            worst = worst.min(positivity).min(trace);
        }
        slacks.push(worst);
    }
    Ok(CheckOutcome::from_slacks("geodesic_validity", &slacks))
}

/// On `C_n` the Jordan metric equals `Σ u_j v_j / p_j`.
pub fn abelian_reduction(rng: &mut SeededRng, trials: usize) -> Result<CheckOutcome> {
    let mut slacks = Vec::with_capacity(trials);
    for _ in 0..trials {
        let n = rng.random_range(2..=5);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let tangent = |rng: &mut SeededRng| -> Vec<f64> {
            let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = u.iter().sum::<f64>() / n as f64;
            u.iter_mut().for_each(|x| *x -= mean);
            u
        };
        let u = tangent(rng);
        let v = tangent(rng);
        let s = State::from_probabilities(&p)?;
        let tu = TangentVector::new(s.clone(), Element::diagonal(&u)?)?;
        let tv = TangentVector::new(s.clone(), Element::diagonal(&v)?)?;
        let g = state_space::metric(&s, &tu, &tv)?;
        let fr = fisher_rao(
            &crate::measurement::ProbabilityVector::new(p, 1e-9)?,
            &u,
            &v,
            0.0,
        )?;
        slacks.push(1e-10 * fr.abs().max(1.0) - (g - fr).abs());
    }
    Ok(CheckOutcome::from_slacks("abelian_reduction", &slacks))
}

/// Positivity and unitality of a supplied POVM.
pub fn povm_validity(povm: &Povm, tol: f64) -> CheckOutcome {
    let diag = povm.validate(tol);
    CheckOutcome::from_slacks(
        "povm_validity",
        &[diag.min_eigenvalue + tol, 1e-9 - diag.unitality_error],
    )
}

/// Runs every suite from one seed; `trials` scales the randomized suites.
pub fn run_all(seed: u64, trials: usize) -> Result<CheckReport> {
    let mut rng = random::rng(seed);
    let mut report = CheckReport {
        seed,
        trials,
        suites: Vec::new(),
        passed: true,
    };
    report.push(kadison(&mut rng, trials)?);
    report.push(majorization(&mut rng, trials)?);
    report.push(n_round_scaling(&mut rng, 3)?);
    report.push(unitary_invariance(&mut rng, trials.div_ceil(4))?);
    report.push(geodesic_validity(&mut rng, trials.div_ceil(4))?);
    report.push(abelian_reduction(&mut rng, trials.div_ceil(2))?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_deterministic_and_passes() {
        let a = run_all(42, 20).unwrap();
        let b = run_all(42, 20).unwrap();
        assert_eq!(a, b);
        assert!(a.passed, "{:?}", a.failed_names());
    }

    #[test]
    fn faulty_povm_fails() {
        let povm = Povm::new(vec![
            Element::diagonal(&[1.2, 0.0]).unwrap(),
            Element::diagonal(&[-0.2, 1.0]).unwrap(),
        ])
        .unwrap();
        let outcome = povm_validity(&povm, POSITIVITY_TOL);
        assert!(!outcome.passed);
        assert_eq!(outcome.name, "povm_validity");
    }
}
