//! Optimal (s, S) inventory control on integer grids: discounted and
//! average-cost dynamic programming, exact policy evaluation, discount
//! sweeps, lead-time reduction and two classical counterexamples.
//!
//! Every solver is generic over the floating-point type ([`Scalar`]); the
//! aliases at the crate root fix it to `f64`.

// `!(x > 0)` style guards are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterexamples;
pub mod dp;
pub mod error;
pub mod instances;
pub mod lab;
pub mod leadtime;
pub mod model;
pub mod policy;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use dp::Terminal;
pub use model::{Grid, LeftLimit};
pub use policy::SsPolicy;

pub type DemandPmf = model::DemandPmf<f64>;
pub type HoldingCost = model::HoldingCost<f64>;
pub type ProblemSpec = model::ProblemSpec<f64>;
pub type TransformedCostView = model::TransformedCostView<f64>;
pub type AssumptionReport = model::AssumptionReport<f64>;
pub type ValueTable = dp::ValueTable<f64>;
pub type GTable = dp::GTable<f64>;
pub type BellmanSolution = dp::BellmanSolution<f64>;
pub type AverageSolution = dp::AverageSolution<f64>;
pub type EvalResult = policy::EvalResult<f64>;
pub type SimStats = policy::SimStats;
pub type SweepRecord = lab::SweepRecord<f64>;
pub type LeadTimeSpec = leadtime::LeadTimeSpec<f64>;

pub type DemandPmf32 = model::DemandPmf<f32>;
pub type ProblemSpec32 = model::ProblemSpec<f32>;
pub type BellmanSolution32 = dp::BellmanSolution<f32>;
pub type AverageSolution32 = dp::AverageSolution<f32>;
