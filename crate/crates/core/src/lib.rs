//! Referral-driven labor market: equilibrium computation, two-group homophily
//! dynamics, inequality and productivity analytics, policy counterfactuals,
//! the firing extension, and a large-scale agent-based cross-check.
//!
//! The model: a unit mass of firms hires a mass `n >= 1` of workers either
//! through referrals (the firm observes the referred worker's value) or from
//! an anonymous pool (only the pool's mean value is known). Hiring follows a
//! threshold rule whose unique fixed point is computed exactly by regime
//! enumeration over the discrete value distribution.

pub mod abm;
pub mod dist;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod firing;
pub mod metrics;
pub mod policy;
pub mod report;
pub mod tol;

pub use dist::{FamilyKind, FosdVerdict, ReferralFamily, ReferralPmf, ValueDistribution};
pub use dynamics::{GroupOutcome, GroupParams, GroupSide, GroupState};
pub use equilibrium::{Equilibrium, MarketPrimitives, PoolHiring};
pub use error::Error;
pub use tol::Tolerances;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
