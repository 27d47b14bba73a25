//! Toy growth economies for studying how wealth inequality evolves.
//!
//! Two families of dynasties (overlapping generations with bequests, and
//! infinitely lived Ramsey households) run under a capital market or under
//! autarky, with either exogenous Cobb-Douglas technology or an AK spillover.
//! [`value`] holds a separate Leontief labor-value toolkit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod metrics;
pub mod olg;
pub mod production;
pub mod ramsey;
pub mod value;

pub use domain::{
    validate_params, EconomyParams, Family, Market, Regime, SteadyState, Technology, Trajectory,
    TrajectoryPoint, WealthDistribution,
};
pub use error::{Error, Result};
pub use metrics::MetricsRow;
