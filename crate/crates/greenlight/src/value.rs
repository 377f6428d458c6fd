//! The additive two-attribute value function: V = f1(energy) + f2(reputation).
//!
//! f2 is a step catalog keyed by control technology, one entry per rung of
//! the time-domain ladder. No interpolation between rungs: the published
//! data quantifies only discrete time scales.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::money::{Money, MoneyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValueError {
    #[error("reputation profile must have at least one entry")]
    EmptyProfile,
    #[error("time scale must be a positive finite number of seconds, got {0}")]
    InvalidTimeScale(f64),
    #[error("profile entries must be strictly increasing in time scale: {earlier} ({earlier_seconds} s) is not before {later} ({later_seconds} s)")]
    UnorderedTimeScales {
        earlier: String,
        earlier_seconds: f64,
        later: String,
        later_seconds: f64,
    },
    #[error("first profile entry {0:?} must carry zero value in every case: organic response earns no reputation")]
    NonZeroAnchor(String),
    #[error("unknown technology {0:?}")]
    UnknownTechnology(String),
    #[error(transparent)]
    Money(#[from] MoneyError),
}

/// The time-domain parameter t, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct TimeScale(f64);

impl TimeScale {
    pub fn new(seconds: f64) -> Result<TimeScale, ValueError> {
        if seconds.is_finite() && seconds > 0.0 {
            Ok(TimeScale(seconds))
        } else {
            Err(ValueError::InvalidTimeScale(seconds))
        }
    }

    pub fn seconds(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeCase {
    Best,
    Average,
    Worst,
}

impl OutcomeCase {
    pub const ALL: [OutcomeCase; 3] = [OutcomeCase::Best, OutcomeCase::Average, OutcomeCase::Worst];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeCase::Best => "best",
            OutcomeCase::Average => "average",
            OutcomeCase::Worst => "worst",
        }
    }

    pub fn parse(s: &str) -> Option<OutcomeCase> {
        match s {
            "best" => Some(OutcomeCase::Best),
            "average" => Some(OutcomeCase::Average),
            "worst" => Some(OutcomeCase::Worst),
            _ => None,
        }
    }
}

impl fmt::Display for OutcomeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One rung of the ladder: a technology with its best/average/worst
/// reputation deltas at time scale t.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReputationEntry {
    pub technology: String,
    pub time_scale: TimeScale,
    pub best: Money,
    pub average: Money,
    pub worst: Money,
}

impl ReputationEntry {
    pub fn value_for(&self, case: OutcomeCase) -> Money {
        match case {
            OutcomeCase::Best => self.best,
            OutcomeCase::Average => self.average,
            OutcomeCase::Worst => self.worst,
        }
    }

    fn is_zero(&self) -> bool {
        self.best.is_zero() && self.average.is_zero() && self.worst.is_zero()
    }
}

/// The f2 catalog, ordered by ascending time scale. The first entry is the
/// realtime anchor and must be all-zero. Case ordering (worst <= average <=
/// best) is deliberately NOT enforced here: the published catalog itself
/// breaks it on one row, so it surfaces through [`case_ordering_warnings`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReputationProfile {
    entries: Vec<ReputationEntry>,
}

impl ReputationProfile {
    pub fn new(entries: Vec<ReputationEntry>) -> Result<ReputationProfile, ValueError> {
        if entries.is_empty() {
            return Err(ValueError::EmptyProfile);
        }
        for pair in entries.windows(2) {
            if pair[1].time_scale.seconds() <= pair[0].time_scale.seconds() {
                return Err(ValueError::UnorderedTimeScales {
                    earlier: pair[0].technology.clone(),
                    earlier_seconds: pair[0].time_scale.seconds(),
                    later: pair[1].technology.clone(),
                    later_seconds: pair[1].time_scale.seconds(),
                });
            }
        }
        if !entries[0].is_zero() {
            return Err(ValueError::NonZeroAnchor(entries[0].technology.clone()));
        }
        Ok(ReputationProfile { entries })
    }

    pub fn entries(&self) -> &[ReputationEntry] {
        &self.entries
    }

    pub fn entry(&self, technology: &str) -> Option<&ReputationEntry> {
        self.entries.iter().find(|e| e.technology == technology)
    }
}

/// f2 lookup: the catalog triple entry for the named case.
pub fn reputation_value(
    profile: &ReputationProfile,
    technology: &str,
    case: OutcomeCase,
) -> Result<Money, ValueError> {
    profile
        .entry(technology)
        .map(|e| e.value_for(case))
        .ok_or_else(|| ValueError::UnknownTechnology(technology.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueBreakdown {
    pub energy_component: Money,
    pub reputation_component: Money,
    pub extra_costs: Money,
    pub total: Money,
}

/// V = f1 + f2 - extra costs, exact in integer cents.
pub fn total_value(
    energy_savings: Money,
    reputation: Money,
    extra_costs: Money,
) -> Result<ValueBreakdown, MoneyError> {
    let total = energy_savings
        .checked_add(reputation)?
        .checked_sub(extra_costs)?;
    Ok(ValueBreakdown {
        energy_component: energy_savings,
        reputation_component: reputation,
        extra_costs,
        total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileWarning {
    /// f2 is expected to be non-increasing over ascending t; this pair rises.
    ReputationRise {
        case: OutcomeCase,
        from_technology: String,
        to_technology: String,
        earlier: Money,
        later: Money,
    },
    /// Entry breaks worst <= average <= best.
    CaseOrdering {
        technology: String,
        best: Money,
        average: Money,
        worst: Money,
    },
}

impl fmt::Display for ProfileWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileWarning::ReputationRise {
                case,
                from_technology,
                to_technology,
                earlier,
                later,
            } => write!(
                f,
                "{case} case rises from {earlier} ({from_technology}) to {later} ({to_technology}); reputation value should not improve at longer time scales"
            ),
            ProfileWarning::CaseOrdering {
                technology,
                best,
                average,
                worst,
            } => write!(
                f,
                "{technology}: cases out of order (worst {worst}, average {average}, best {best}); expected worst <= average <= best"
            ),
        }
    }
}

/// Warns on every adjacent pair where a case column rises over ascending t.
///
/// The pair anchored at the all-zero realtime entry is skipped: the jump to
/// the first active-control rung is the initial momentum gain, expected by
/// construction, so flagging it would only produce noise.
pub fn validate_reputation_profile(profile: &ReputationProfile) -> Vec<ProfileWarning> {
    let mut warnings = Vec::new();
    for case in OutcomeCase::ALL {
        for pair in profile.entries().windows(2).skip(1) {
            let earlier = pair[0].value_for(case);
            let later = pair[1].value_for(case);
            if later > earlier {
                warnings.push(ProfileWarning::ReputationRise {
                    case,
                    from_technology: pair[0].technology.clone(),
                    to_technology: pair[1].technology.clone(),
                    earlier,
                    later,
                });
            }
        }
    }
    warnings
}

/// Flags entries whose case triple is out of order.
pub fn case_ordering_warnings(profile: &ReputationProfile) -> Vec<ProfileWarning> {
    profile
        .entries()
        .iter()
        .filter(|e| !(e.worst <= e.average && e.average <= e.best))
        .map(|e| ProfileWarning::CaseOrdering {
            technology: e.technology.clone(),
            best: e.best,
            average: e.average,
            worst: e.worst,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(tech: &str, t: f64, best: i64, average: i64, worst: i64) -> ReputationEntry {
        ReputationEntry {
            technology: tech.to_string(),
            time_scale: TimeScale::new(t).unwrap(),
            best: Money::dollars(best),
            average: Money::dollars(average),
            worst: Money::dollars(worst),
        }
    }

    fn anchor() -> ReputationEntry {
        entry("realtime", 1e-6, 0, 0, 0)
    }

    #[test]
    fn total_value_matches_published_rows() {
        let best = total_value(Money::dollars(17_532), Money::dollars(10_000), Money::ZERO).unwrap();
        assert_eq!(best.total, Money::dollars(27_532));
        let worst = total_value(Money::dollars(8_766), Money::dollars(-200_000), Money::ZERO).unwrap();
        assert_eq!(worst.total, Money::dollars(-191_234));
        let zero = total_value(Money::ZERO, Money::ZERO, Money::ZERO).unwrap();
        assert_eq!(zero.total, Money::ZERO);
    }

    #[test]
    fn total_value_subtracts_extra_costs() {
        let v = total_value(Money::dollars(100), Money::dollars(50), Money::dollars(30)).unwrap();
        assert_eq!(v.total, Money::dollars(120));
    }

    #[test]
    fn total_value_overflow_is_explicit() {
        let huge = Money::from_cents(i64::MAX);
        assert_eq!(
            total_value(huge, Money::from_cents(1), Money::ZERO),
            Err(MoneyError::Overflow)
        );
    }

    #[test]
    fn profile_rejects_bad_shapes() {
        assert_eq!(ReputationProfile::new(vec![]), Err(ValueError::EmptyProfile));
        let unordered = ReputationProfile::new(vec![anchor(), entry("b", 1e-6, 1, 1, 1)]);
        assert!(matches!(unordered, Err(ValueError::UnorderedTimeScales { .. })));
        let bad_anchor = ReputationProfile::new(vec![entry("first", 1e-6, 1, 0, 0)]);
        assert!(matches!(bad_anchor, Err(ValueError::NonZeroAnchor(_))));
        assert!(TimeScale::new(0.0).is_err());
        assert!(TimeScale::new(-1.0).is_err());
        assert!(TimeScale::new(f64::NAN).is_err());
    }

    #[test]
    fn lookup_errors_name_the_missing_key() {
        let profile = ReputationProfile::new(vec![anchor()]).unwrap();
        match reputation_value(&profile, "nosuch", OutcomeCase::Average) {
            Err(ValueError::UnknownTechnology(name)) => assert_eq!(name, "nosuch"),
            other => panic!("expected unknown-technology error, got {other:?}"),
        }
        assert_eq!(
            reputation_value(&profile, "realtime", OutcomeCase::Best).unwrap(),
            Money::ZERO
        );
    }

    #[test]
    fn single_entry_profile_validates_clean() {
        let profile = ReputationProfile::new(vec![anchor()]).unwrap();
        assert!(validate_reputation_profile(&profile).is_empty());
    }

    #[test]
    fn decreasing_profile_validates_clean() {
        let profile = ReputationProfile::new(vec![
            anchor(),
            entry("mid", 1e-3, 50, 40, 30),
            entry("slow", 1.0, 20, 10, 0),
        ])
        .unwrap();
        assert!(validate_reputation_profile(&profile).is_empty());
    }

    #[test]
    fn single_injected_rise_yields_one_warning() {
        let profile = ReputationProfile::new(vec![
            anchor(),
            entry("a", 1e-3, 50, 40, 30),
            entry("b", 1e-2, 60, 30, 20),
        ])
        .unwrap();
        let warnings = validate_reputation_profile(&profile);
        assert_eq!(warnings.len(), 1);
        match &warnings[0] {
            ProfileWarning::ReputationRise {
                case,
                from_technology,
                to_technology,
                earlier,
                later,
            } => {
                assert_eq!(*case, OutcomeCase::Best);
                assert_eq!(from_technology, "a");
                assert_eq!(to_technology, "b");
                assert_eq!(*earlier, Money::dollars(50));
                assert_eq!(*later, Money::dollars(60));
            }
            other => panic!("unexpected warning {other:?}"),
        }
    }

    #[test]
    fn momentum_jump_off_the_anchor_is_not_flagged() {
        let profile = ReputationProfile::new(vec![anchor(), entry("a", 1e-3, 50, 50, 50)]).unwrap();
        assert!(validate_reputation_profile(&profile).is_empty());
    }

    #[test]
    fn case_ordering_flags_inverted_entries() {
        let profile = ReputationProfile::new(vec![
            anchor(),
            entry("ok", 1e-3, 50, 40, 30),
            entry("inverted", 1e-2, 30, 20, 25),
        ])
        .unwrap();
        let warnings = case_ordering_warnings(&profile);
        assert_eq!(warnings.len(), 1);
        assert!(matches!(
            &warnings[0],
            ProfileWarning::CaseOrdering { technology, .. } if technology == "inverted"
        ));
    }
}
