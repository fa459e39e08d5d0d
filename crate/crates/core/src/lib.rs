//! Estimation theory on finite-dimensional C*-algebras.
//!
//! Algebras are direct sums of full matrix blocks. States carry the Jordan metric
//! `G(Y_a, Y_b) = ρ({a,b}) − ρ(a)ρ(b)`, which pulls back along parametric models to the
//! quantum Fisher information and through measurements to the classical Fisher-Rao metric.

pub mod algebra;
pub mod checks;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod measurement;
pub mod model;
pub mod random;
pub mod state_space;

pub use algebra::{AlgebraSpec, Element};
pub use error::{Error, Result};
pub use estimation::{
    metric_chain, BoundReport, Cost, CostConfig, CostFunction, EstimationProblem, Estimator,
};
pub use measurement::{Povm, ProbabilityVector};
pub use model::{ModelConfig, ParametricModel};
pub use state_space::{State, TangentVector};
