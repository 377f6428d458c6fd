//! Risk-adjusted go/no-go analysis for active network energy control.
//!
//! Given a device inventory, a tariff, and per-option outcome lotteries, the
//! engine decides whether deploying control at some time-domain depth beats
//! doing nothing: outcome values combine energy savings and reputation
//! deltas exactly in cents, pass through an exponential u-transform, and the
//! decision tree rolls back to certain equivalents. A black-swan overlay
//! answers "how likely would the catastrophe have to be before we walk
//! away".

pub mod catalog;
pub mod energy;
pub mod fixtures;
pub mod money;
pub mod report;
pub mod scenario;
pub mod sensitivity;
pub mod tree;
pub mod utility;
pub mod value;

pub use money::{Fraction, Money};
pub use report::{evaluate, Report};
pub use scenario::{parse_scenario, serialize_scenario, Scenario};
pub use utility::RiskPreference;
