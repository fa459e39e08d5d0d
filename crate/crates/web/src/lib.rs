//! Browser bindings: the dephasing-qubit metric over a parameter grid, geodesics inside the
//! Bloch ball, and classical versus quantum Fisher information for a qubit measurement.
//!
//! Each binding wraps a plain Rust function so the numerics are testable natively.

use wasm_bindgen::prelude::*;

use cstar_estimation::algebra::{pauli_combination, pauli_coordinates};
use cstar_estimation::measurement::{Povm, REGULARITY_TOL};
use cstar_estimation::model::ParametricModel;
use cstar_estimation::state_space::{self, State};
use cstar_estimation::{Error, Result};

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Rows `[γ, ζ, G_γγ, G_γζ, G_ζζ]` over an `n × n` grid, `γ` outermost.
pub fn dephasing_metric_field(
    gamma_lo: f64,
    gamma_hi: f64,
    zeta_lo: f64,
    zeta_hi: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let model = ParametricModel::qubit_dephasing();
    let zetas = axis(zeta_lo, zeta_hi, n);
    let mut out = Vec::with_capacity(5 * n * n);
    for gamma in axis(gamma_lo, gamma_hi, n) {
        for &zeta in &zetas {
            let g = model.quantum_metric(&[gamma, zeta])?;
            out.extend([gamma, zeta, g[(0, 0)], g[(0, 1)], g[(1, 1)]]);
        }
    }
    Ok(out)
}

/// Bloch vectors `[x, y, z]` of the geodesic from the state with Bloch vector `r` along the
/// gradient direction generated by `a = a₁σ¹ + a₂σ² + a₃σ³`, for `steps` times in `[−t_max, t_max]`.
pub fn bloch_geodesic(r: [f64; 3], a: [f64; 3], t_max: f64, steps: usize) -> Result<Vec<f64>> {
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1.0 + 1e-12 {
        return Err(Error::InvalidState(format!(
            "Bloch vector of length {norm} is outside the ball"
        )));
    }
    let scale = if norm > 1.0 { 1.0 / norm } else { 1.0 };
    let density = pauli_combination([
        0.5,
        0.5 * r[0] * scale,
        0.5 * r[1] * scale,
        0.5 * r[2] * scale,
    ]);
    let state = State::new(density, 1e-9)?;
    let v = state_space::gradient_vector(&state, &pauli_combination([0.0, a[0], a[1], a[2]]))?;
    let mut out = Vec::with_capacity(3 * steps);
    for t in axis(-t_max, t_max, steps) {
        let nu = state_space::geodesic(&v, t)?;
        let c = pauli_coordinates(nu.density())?;
        out.extend([2.0 * c[1].re, 2.0 * c[2].re, 2.0 * c[3].re]);
    }
    Ok(out)
}

/// `[G^Mc, G^M]` for the pure qubit model at `γ`, measured along the axis at angle `φ` in the
/// σ¹–σ² plane. The classical entry is NaN where the measurement is not regular.
pub fn pure_qubit_fisher(gamma: f64, phi: f64) -> Result<[f64; 2]> {
    let model = ParametricModel::qubit_pure();
    let povm = Povm::qubit_axis([phi.cos(), phi.sin(), 0.0])?;
    let quantum = model.quantum_metric(&[gamma])?[(0, 0)];
    let classical = match model.classical_metric(&povm, &[gamma], REGULARITY_TOL) {
        Ok(g) => g[(0, 0)],
        Err(Error::NotRegular { .. }) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok([classical, quantum])
}

#[wasm_bindgen(js_name = dephasingMetricField)]
pub fn dephasing_metric_field_js(
    gamma_lo: f64,
    gamma_hi: f64,
    zeta_lo: f64,
    zeta_hi: f64,
    n: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    Ok(dephasing_metric_field(
        gamma_lo, gamma_hi, zeta_lo, zeta_hi, n,
    )?)
}

#[wasm_bindgen(js_name = blochGeodesic)]
#[allow(clippy::too_many_arguments)]
pub fn bloch_geodesic_js(
    rx: f64,
    ry: f64,
    rz: f64,
    a1: f64,
    a2: f64,
    a3: f64,
    t_max: f64,
    steps: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    Ok(bloch_geodesic([rx, ry, rz], [a1, a2, a3], t_max, steps)?)
}

#[wasm_bindgen(js_name = pureQubitFisher)]
pub fn pure_qubit_fisher_js(gamma: f64, phi: f64) -> std::result::Result<Vec<f64>, JsError> {
    Ok(pure_qubit_fisher(gamma, phi)?.to_vec())
}
