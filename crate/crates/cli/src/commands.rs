use serde_json::{json, Value};

use cstar_estimation::checks;
use cstar_estimation::estimation::{metric_chain, CostFunction, EstimationProblem};
use cstar_estimation::measurement::{Povm, POVM_TOL, REGULARITY_TOL};
use cstar_estimation::model::ParametricModel;
use cstar_estimation::state_space::{self, TangentVector};

use crate::config::{grid_points, parse_grid};
use crate::failure::Failure;
use crate::{MetricKind, Run};

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value, Failure> {
    serde_json::to_value(x).map_err(|e| Failure::Schema(e.to_string()))
}

fn rows(m: &cstar_estimation::linalg::RMatrix) -> Vec<Vec<f64>> {
    cstar_estimation::linalg::rows(m)
}

/// The configured model, wrapped in `N` rounds when requested.
fn model(run: &Run) -> Result<ParametricModel, Failure> {
    let cfg = run
        .config
        .model
        .as_ref()
        .ok_or_else(|| Failure::Schema("config has no `model`".into()))?;
    let base = cfg.build()?;
    match run.config.rounds {
        Some(n) if n > 1 => Ok(base.multi_round(n)?),
        _ => Ok(base),
    }
}

/// The configured POVM after validity checks, as a tensor power when rounds are requested.
fn povm(run: &Run, model: &ParametricModel) -> Result<Povm, Failure> {
    let povm = run
        .config
        .povm
        .as_ref()
        .ok_or_else(|| Failure::Schema("config has no `povm`".into()))?;
    let diag = povm.validate(POVM_TOL);
    if !diag.passed {
        return Err(Failure::Schema(format!(
            "povm is not positive and unital (min eigenvalue {:.3e}, unitality error {:.3e})",
            diag.min_eigenvalue, diag.unitality_error
        )));
    }
    let povm = match run.config.rounds {
        Some(n) if n > 1 => povm.tensor_power(n)?,
        _ => povm.clone(),
    };
    model.spec().check_same(povm.spec())?;
    Ok(povm)
}

fn check_dim(what: &str, v: &[f64], d: usize) -> Result<(), Failure> {
    if v.len() != d {
        return Err(Failure::Schema(format!(
            "{what} has {} coordinates, model has {d}",
            v.len()
        )));
    }
    Ok(())
}

fn point(run: &Run, model: &ParametricModel) -> Result<Vec<f64>, Failure> {
    let p = run
        .config
        .point
        .clone()
        .ok_or_else(|| Failure::Schema("no point given (--point or config `point`)".into()))?;
    check_dim("point", &p, model.dim())?;
    Ok(p)
}

fn points(run: &Run, model: &ParametricModel) -> Result<Vec<Vec<f64>>, Failure> {
    let pts = match (&run.config.grid, &run.config.point) {
        (Some(grid), _) => grid_points(&parse_grid(grid)?),
        (None, Some(p)) => vec![p.clone()],
        (None, None) => {
            return Err(Failure::Schema(
                "no points given (--point, --grid or config `point`)".into(),
            ))
        }
    };
    for p in &pts {
        check_dim("point", p, model.dim())?;
    }
    Ok(pts)
}

fn regularity_tol(run: &Run) -> f64 {
    run.config.tol.unwrap_or(REGULARITY_TOL)
}

/// Tangent at `point`: the explicit config `tangent` if present, else the pushed direction.
fn tangent(run: &Run, model: &ParametricModel, theta: &[f64]) -> Result<TangentVector, Failure> {
    if let Some(rep) = &run.config.tangent {
        return Ok(TangentVector::new(model.state_at(theta)?, rep.clone())?);
    }
    let dir = run.config.direction.clone().ok_or_else(|| {
        Failure::Schema("no direction given (--direction or config `direction`)".into())
    })?;
    check_dim("direction", &dir, model.dim())?;
    Ok(model.tangent_push(theta, &dir)?)
}

pub fn metric(run: &Run) -> Result<Value, Failure> {
    let model = model(run)?;
    let povm = match run.kind {
        MetricKind::Classical => Some(povm(run, &model)?),
        MetricKind::Quantum => None,
    };
    let pts = points(run, &model)?;
    let results = pts
        .iter()
        .map(|theta| {
            let g = match &povm {
                Some(p) => model.classical_metric(p, theta, regularity_tol(run))?,
                None => model.quantum_metric(theta)?,
            };
            Ok(json!({"point": theta, "metric": rows(&g)}))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(json!({
        "command": "metric",
        "kind": match run.kind { MetricKind::Quantum => "quantum", MetricKind::Classical => "classical" },
        "rounds": model.rounds(),
        "results": results,
    }))
}

pub fn sld(run: &Run) -> Result<Value, Failure> {
    let model = model(run)?;
    let theta = point(run, &model)?;
    let v = tangent(run, &model, &theta)?;
    let zero = v.rep().max_abs() == 0.0;
    let sld = state_space::sld_at_state(&v).inspect_err(|e| {
        if let cstar_estimation::Error::UnsolvableSld { residual } = e {
            eprintln!("sld residual: forbidden component {residual:.6e}");
        }
    })?;
    let residual = state_space::sld_residual(&v, &sld.element)?;
    let mut report = json!({
        "command": "sld",
        "point": theta,
        "sld": to_value(&sld.element)?,
        "gauge_dim": sld.gauge_dim,
        "residual": residual,
    });
    if let Some(d) = &run.config.direction {
        report["direction"] = json!(d);
    }
    if zero {
        report["note"] = json!("zero tangent");
    }
    Ok(report)
}

pub fn geodesic(run: &Run) -> Result<Value, Failure> {
    let model = model(run)?;
    let theta = point(run, &model)?;
    let v = tangent(run, &model, &theta)?;
    let axes = parse_grid(run.config.grid.as_deref().unwrap_or("-3:3:61"))?;
    let [times] = &axes[..] else {
        return Err(Failure::Schema(
            "geodesic takes a single time axis lo:hi:n".into(),
        ));
    };
    let samples = times
        .iter()
        .map(|&t| {
            let nu = state_space::geodesic(&v, t)?;
            Ok(json!({
                "t": t,
                "density": to_value(nu.density())?,
                "min_eigenvalue": nu.density().min_eigenvalue(),
                "trace": nu.density().trace().re,
                "orbit_signature": nu.orbit_signature(1e-9),
            }))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(json!({
        "command": "geodesic",
        "point": theta,
        "speed": state_space::speed_squared(&v)?.sqrt(),
        "samples": samples,
    }))
}

pub fn bounds(run: &Run) -> Result<Value, Failure> {
    let model = model(run)?;
    let povm = povm(run, &model)?;
    let theta = point(run, &model)?;
    let d = model.dim();
    let covectors = run.config.covectors.clone().unwrap_or_else(|| {
        (0..d)
            .map(|r| (0..d).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
            .collect()
    });
    for xi in &covectors {
        check_dim("covector", xi, d)?;
    }
    let tol = regularity_tol(run);
    let report = match &run.config.estimator {
        Some(est) => {
            let estimator = match run.config.rounds {
                Some(n) if n > 1 => est.sample_mean(n)?,
                _ => est.clone(),
            };
            let cost = match &run.config.cost {
                Some(c) => c.build()?,
                None => CostFunction::euclidean(),
            };
            let mut problem = EstimationProblem::new(&model, &povm, &cost, &estimator)?;
            problem.tol = tol;
            problem.cr_check(&theta, &covectors)?
        }
        None => metric_chain(&model, &povm, &theta, &covectors, tol)?,
    };
    eprintln!("bounds: {}", if report.pass { "pass" } else { "FAIL" });
    let mut value = to_value(&report)?;
    value["command"] = json!("bounds");
    Ok(value)
}

pub fn check(run: &Run) -> Result<(Value, Result<(), Failure>), Failure> {
    let seed = run.config.seed.unwrap_or(42);
    let trials = run.config.trials.unwrap_or(200);
    let mut report = checks::run_all(seed, trials)?;
    if let Some(p) = &run.config.povm {
        report.push(checks::povm_validity(p, POVM_TOL));
    }
    let failed: Vec<String> = report
        .failed_names()
        .iter()
        .map(|s| s.to_string())
        .collect();
    for s in &report.suites {
        eprintln!(
            "{} {}: {} trials, worst slack {:.3e}",
            if s.passed { "pass" } else { "FAIL" },
            s.name,
            s.trials,
            s.worst_slack
        );
    }
    let mut value = to_value(&report)?;
    value["command"] = json!("check");
    let outcome = if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::CheckFailed(failed))
    };
    Ok((value, outcome))
}
