use std::path::Path;

use serde::Deserialize;

use cstar_estimation::{CostConfig, Element, Estimator, ModelConfig, Povm};

use crate::failure::Failure;

/// One run, as read from `--config`. Command-line flags override the matching fields.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelConfig>,
    pub povm: Option<Povm>,
    pub estimator: Option<Estimator>,
    pub cost: Option<CostConfig>,
    pub point: Option<Vec<f64>>,
    pub grid: Option<String>,
    pub direction: Option<Vec<f64>>,
    /// Explicit tangent representative at `point`, used instead of `direction`.
    pub tangent: Option<Element>,
    pub covectors: Option<Vec<Vec<f64>>>,
    pub rounds: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Schema(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Schema(format!("{}: {e}", path.display())))
    }
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Schema(format!("not a number: {s:?}")))
        })
        .collect()
}

/// `lo:hi:n` per coordinate, coordinates separated by `;`. Returns the per-axis samples.
pub fn parse_grid(text: &str) -> Result<Vec<Vec<f64>>, Failure> {
    text.split(';')
        .map(|axis| {
            let parts: Vec<&str> = axis.trim().split(':').collect();
            let [lo, hi, n] = parts[..] else {
                return Err(Failure::Schema(format!(
                    "grid axis {axis:?} is not lo:hi:n"
                )));
            };
            let lo: f64 = lo
                .parse()
                .map_err(|_| Failure::Schema(format!("bad grid bound {lo:?}")))?;
            let hi: f64 = hi
                .parse()
                .map_err(|_| Failure::Schema(format!("bad grid bound {hi:?}")))?;
            let n: usize = n
                .parse()
                .map_err(|_| Failure::Schema(format!("bad grid count {n:?}")))?;
            if n == 0 {
                return Err(Failure::Schema("grid count must be positive".into()));
            }
            Ok((0..n)
                .map(|k| {
                    if n == 1 {
                        lo
                    } else {
                        lo + (hi - lo) * k as f64 / (n - 1) as f64
                    }
                })
                .collect())
        })
        .collect()
}

/// Cartesian product of grid axes, first axis outermost.
pub fn grid_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect()
    })
}
