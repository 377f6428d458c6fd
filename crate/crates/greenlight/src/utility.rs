//! Exponential utility and its inverse, the certain equivalent.
//!
//! U(V) = 1 - e^(-V/rho). A u-value alone loses precision long before the
//! contract's working range runs out (it saturates at 1.0 once V/rho passes
//! ~36), so [`Utility`] also carries the scaled coordinate x = V/rho, which
//! is exact wherever f64 is. Certain equivalents invert from x, never from
//! u, which is what makes CE(U(V)) = V hold to the cent across
//! V in [-$100M, +$100M] and rho in [$1k, $1B]. Expected utilities combine
//! in x-space through a max-shifted log-sum-exp for the same reason.
//!
//! Risk-neutral mode routes through the same plumbing with a fixed value
//! scale of 1e18 dollars: x stays tiny, u equals x, and expectation
//! degenerates to the probability-weighted mean.

use serde::Serialize;
use thiserror::Error;

use crate::money::{Money, MoneyError};

/// Dollar scale used in risk-neutral mode; keeps |x| well under 1 for any
/// representable Money.
pub const NEUTRAL_VALUE_SCALE: f64 = 1e18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UtilityError {
    #[error("risk tolerance must be positive, got {0}")]
    NonPositiveTolerance(Money),
    #[error("u-value {0} is unreachable: utilities lie strictly below 1")]
    UnreachableUtility(f64),
    #[error("lottery stake must be positive, got {0}")]
    NonPositiveStake(Money),
    #[error(transparent)]
    Money(#[from] MoneyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RiskPreference {
    Exponential { rho: Money },
    Neutral,
}

impl RiskPreference {
    pub fn exponential(rho: Money) -> Result<RiskPreference, UtilityError> {
        if rho.is_positive() {
            Ok(RiskPreference::Exponential { rho })
        } else {
            Err(UtilityError::NonPositiveTolerance(rho))
        }
    }

    /// Dollars per unit of the scaled coordinate.
    pub fn value_scale(&self) -> f64 {
        match self {
            RiskPreference::Exponential { rho } => rho.to_dollars(),
            RiskPreference::Neutral => NEUTRAL_VALUE_SCALE,
        }
    }

    pub fn is_neutral(&self) -> bool {
        matches!(self, RiskPreference::Neutral)
    }
}

/// A u-value plus the scaled coordinate it came from.
///
/// Ordering is derived on (u, scaled); since u is nondecreasing in scaled,
/// that ordering is exactly the preference ordering, and stays strict even
/// where u itself has saturated to 1.0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Utility {
    u: f64,
    scaled: f64,
}

impl Utility {
    pub const ZERO: Utility = Utility { u: 0.0, scaled: 0.0 };

    /// The dimensionless u-value. May round to exactly 1.0 for values far
    /// beyond the risk tolerance; `scaled()` stays authoritative there.
    pub fn value(self) -> f64 {
        self.u
    }

    pub fn scaled(self) -> f64 {
        self.scaled
    }

    /// Admits an externally supplied u-value. u must be < 1.
    pub fn from_value(u: f64, pref: &RiskPreference) -> Result<Utility, UtilityError> {
        // Rejects NaN along with u >= 1.
        if u.partial_cmp(&1.0) != Some(std::cmp::Ordering::Less) {
            return Err(UtilityError::UnreachableUtility(u));
        }
        let scaled = match pref {
            // ln_1p(-u) = ln(1 - u), accurate for small u.
            RiskPreference::Exponential { .. } => -(-u).ln_1p(),
            RiskPreference::Neutral => u,
        };
        Ok(Utility { u, scaled })
    }

    fn from_scaled(scaled: f64, pref: &RiskPreference) -> Utility {
        let u = match pref {
            RiskPreference::Exponential { .. } => -(-scaled).exp_m1(),
            RiskPreference::Neutral => scaled,
        };
        Utility { u, scaled }
    }

    /// Raw certain equivalent in f64 dollars, before cent rounding.
    pub fn ce_dollars(self, pref: &RiskPreference) -> f64 {
        self.scaled * pref.value_scale()
    }
}

/// U(V): the u-transform of a dollar value.
pub fn u_transform(v: Money, pref: &RiskPreference) -> Utility {
    Utility::from_scaled(v.to_dollars() / pref.value_scale(), pref)
}

/// CE: the guaranteed amount with the same utility. Inverse of
/// [`u_transform`] to within a cent over the contract range.
pub fn certain_equivalent(u: Utility, pref: &RiskPreference) -> Result<Money, UtilityError> {
    if !u.scaled.is_finite() {
        return Err(UtilityError::UnreachableUtility(u.u));
    }
    Ok(Money::from_dollars(u.ce_dollars(pref))?)
}

/// Probability-weighted aggregate utility of already-transformed branches.
///
/// Exponential mode: x_EU = m - ln(sum_i p_i e^-(x_i - m)) with
/// m = min x over p > 0, so the sum's terms live in (0, 1] and nothing
/// overflows regardless of branch magnitudes. Zero-probability branches
/// contribute nothing, exactly.
pub fn expected_utility(branches: &[(f64, Utility)], pref: &RiskPreference) -> Utility {
    if pref.is_neutral() {
        let scaled = branches.iter().map(|(p, u)| p * u.scaled).sum();
        return Utility::from_scaled(scaled, pref);
    }
    let m = branches
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(_, u)| u.scaled)
        .fold(f64::INFINITY, f64::min);
    if m == f64::INFINITY {
        return Utility::ZERO;
    }
    let sum: f64 = branches
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, u)| p * (-(u.scaled - m)).exp())
        .sum();
    Utility::from_scaled(m - sum.ln(), pref)
}

const LN_3: f64 = 1.0986122886681098;

/// Converts the 3:1 win/loss elicitation stake into the exponential
/// parameter: rho = stake / ln 3, the tolerance at which
/// 0.75 U(stake) + 0.25 U(-stake) = 0.
pub fn stake_to_rho(stake: Money) -> Result<Money, UtilityError> {
    if !stake.is_positive() {
        return Err(UtilityError::NonPositiveStake(stake));
    }
    Ok(Money::from_dollars(stake.to_dollars() / LN_3)?)
}
