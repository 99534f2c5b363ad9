//! Stochastic rising rested bandits: environments whose arm means grow with
//! the arm's own pull count, their complexity analytics, Thompson-sampling
//! policies with forced exploration and sliding windows, and a seeded
//! parallel experiment harness.

pub mod analysis;
pub mod catalog;
pub mod curve;
pub mod dist;
pub mod error;
pub mod harness;
pub mod instance;
pub mod law;
pub mod policy;
pub mod regret;
pub mod verify;

pub use analysis::{analyze, AnalysisReport, AnalysisRequest, BoundFlavor, Sigma};
pub use curve::{eval_mu, RewardCurve};
pub use error::{Error, Result};
pub use instance::{Arm, Instance, InstanceSpec};
pub use law::RewardLaw;
pub use policy::{Agent, Policy, PolicyConfig, PolicyKind};
pub use regret::{pseudo_regret, wald_upper_estimate};
