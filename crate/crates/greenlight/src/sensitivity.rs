//! Black-swan breakeven analysis and one-way parameter sweeps.
//!
//! A black swan composes onto a base lottery as an overlay branch: with
//! probability p the catastrophe occurs, otherwise the base plays out, so
//! base branch probabilities scale by (1 - p). Expected utility is then
//! linear in p, which gives the closed forms
//!   p*  = EU0 / (EU0 - U_cat)            (CE crosses zero)
//!   px  = (EU0 - EU_rival) / (EU0 - U_cat)  (option crossover)
//! The solver still runs bisection over the full evaluation pipeline; the
//! closed form is a cross-check, because bisection keeps working on trees
//! where no closed form exists.

use serde::Serialize;
use thiserror::Error;

use crate::money::{Money, MoneyError};
use crate::report::{evaluate, ReportError};
use crate::scenario::{OptionBody, Scenario};
use crate::tree::{LotteryBranch, OutcomeLottery, TreeError};
use crate::utility::{u_transform, RiskPreference, Utility, UtilityError};
use crate::value::OutcomeCase;

/// Bisection interval shrinks below this before the solver reports a root.
pub const BISECTION_TOLERANCE: f64 = 1e-13;

/// Required agreement between the solver and the closed form.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensitivityError {
    #[error("black swan probability must lie in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("no breakeven in [0, 1]: the certain equivalent stays {side} at every probability")]
    NoBreakeven { side: &'static str },
    #[error("rival e-value {rival} outside the achievable range [{low}, {high}]")]
    NoCrossover { rival: f64, low: f64, high: f64 },
    #[error("bisection ({bisection}) and closed form ({closed_form}) disagree beyond {CLOSED_FORM_TOLERANCE}")]
    SolverDisagreement { bisection: f64, closed_form: f64 },
    #[error("invalid sweep range: {0}")]
    BadRange(String),
    #[error("sweep parameter not found: {0}")]
    ParameterPath(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Utility(#[from] UtilityError),
    #[error(transparent)]
    Money(#[from] MoneyError),
    #[error(transparent)]
    Evaluate(#[from] ReportError),
}

/// A base lottery with a catastrophe outcome riding on probability p.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackSwanSpec {
    pub base: OutcomeLottery,
    pub catastrophe_value: Money,
}

impl BlackSwanSpec {
    /// The overlay mixture at a specific p.
    pub fn composed_lottery(&self, p: f64) -> Result<OutcomeLottery, SensitivityError> {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(SensitivityError::BadProbability(p));
        }
        let mut branches: Vec<LotteryBranch> = self
            .base
            .branches
            .iter()
            .map(|b| LotteryBranch {
                label: b.label.clone(),
                probability: (1.0 - p) * b.probability,
                value: b.value,
            })
            .collect();
        branches.push(LotteryBranch {
            label: "catastrophe".to_string(),
            probability: p,
            value: self.catastrophe_value,
        });
        Ok(OutcomeLottery::new(branches))
    }

    fn composed_e_value(&self, p: f64, pref: &RiskPreference) -> Result<Utility, SensitivityError> {
        Ok(crate::tree::e_value(&self.composed_lottery(p)?, pref)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakevenSolution {
    /// Bisection result, the authoritative answer.
    pub probability: f64,
    /// Closed-form cross-check; within [`CLOSED_FORM_TOLERANCE`] of
    /// `probability`.
    pub closed_form: f64,
    pub base_e_value: f64,
    pub catastrophe_utility: f64,
}

fn bisect(mut f: impl FnMut(f64) -> Result<f64, SensitivityError>) -> Result<f64, SensitivityError> {
    // Assumes f(0) >= 0 >= f(1), f decreasing.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn checked_solution(
    bisection: f64,
    closed_form: f64,
    eu0: Utility,
    ucat: Utility,
) -> Result<BreakevenSolution, SensitivityError> {
    if (bisection - closed_form).abs() > CLOSED_FORM_TOLERANCE {
        return Err(SensitivityError::SolverDisagreement {
            bisection,
            closed_form,
        });
    }
    Ok(BreakevenSolution {
        probability: bisection,
        closed_form,
        base_e_value: eu0.value(),
        catastrophe_utility: ucat.value(),
    })
}

/// Largest catastrophe probability at which the option still breaks even:
/// the p with CE(p) = 0.
pub fn breakeven_probability(
    spec: &BlackSwanSpec,
    pref: &RiskPreference,
) -> Result<BreakevenSolution, SensitivityError> {
    let eu0 = spec.composed_e_value(0.0, pref)?;
    let ucat = u_transform(spec.catastrophe_value, pref);
    if eu0.value() == 0.0 {
        return checked_solution(0.0, 0.0, eu0, ucat);
    }
    if eu0.value() < 0.0 {
        return Err(SensitivityError::NoBreakeven { side: "negative" });
    }
    if ucat.value() >= 0.0 {
        return Err(SensitivityError::NoBreakeven { side: "non-negative" });
    }
    let root = bisect(|p| Ok(spec.composed_e_value(p, pref)?.scaled()))?;
    let closed = eu0.value() / (eu0.value() - ucat.value());
    checked_solution(root, closed, eu0, ucat)
}

/// The p at which the option's e-value drops to the rival's: beyond it the
/// rival is preferred.
pub fn crossover_probability(
    spec: &BlackSwanSpec,
    rival: Utility,
    pref: &RiskPreference,
) -> Result<BreakevenSolution, SensitivityError> {
    let eu0 = spec.composed_e_value(0.0, pref)?;
    let ucat = u_transform(spec.catastrophe_value, pref);
    if !(ucat.value() <= rival.value() && rival.value() <= eu0.value()) {
        return Err(SensitivityError::NoCrossover {
            rival: rival.value(),
            low: ucat.value(),
            high: eu0.value(),
        });
    }
    if rival.value() == eu0.value() {
        return checked_solution(0.0, 0.0, eu0, ucat);
    }
    if rival.value() == ucat.value() {
        return checked_solution(1.0, 1.0, eu0, ucat);
    }
    let root = bisect(|p| Ok(spec.composed_e_value(p, pref)?.value() - rival.value()))?;
    let closed = (eu0.value() - rival.value()) / (eu0.value() - ucat.value());
    checked_solution(root, closed, eu0, ucat)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepParameter {
    RiskTolerance,
    EnergyRate,
    Reputation { option: String, case: OutcomeCase },
    BlackSwanProbability,
}

impl SweepParameter {
    /// Grammar: `rho`, `rate_per_kwh`, `reputation:<option>:<case>`,
    /// `probability`.
    pub fn parse(s: &str) -> Result<SweepParameter, SensitivityError> {
        match s {
            "rho" => return Ok(SweepParameter::RiskTolerance),
            "rate_per_kwh" => return Ok(SweepParameter::EnergyRate),
            "probability" => return Ok(SweepParameter::BlackSwanProbability),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("reputation:") {
            if let Some((option, case)) = rest.rsplit_once(':') {
                if option.is_empty() {
                    return Err(SensitivityError::ParameterPath(s.to_string()));
                }
                if let Some(case) = OutcomeCase::parse(case) {
                    return Ok(SweepParameter::Reputation {
                        option: option.to_string(),
                        case,
                    });
                }
            }
        }
        Err(SensitivityError::ParameterPath(s.to_string()))
    }

    pub fn label(&self) -> String {
        match self {
            SweepParameter::RiskTolerance => "rho".to_string(),
            SweepParameter::EnergyRate => "rate_per_kwh".to_string(),
            SweepParameter::Reputation { option, case } => {
                format!("reputation:{option}:{case}")
            }
            SweepParameter::BlackSwanProbability => "probability".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSample {
    pub value: f64,
    pub certain_equivalent: Money,
    pub chosen: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub parameter: String,
    pub samples: Vec<SweepSample>,
}

fn apply_parameter(
    scenario: &Scenario,
    param: &SweepParameter,
    v: f64,
) -> Result<Scenario, SensitivityError> {
    let mut s = scenario.clone();
    match param {
        SweepParameter::RiskTolerance => {
            s.risk = RiskPreference::exponential(Money::from_dollars(v)?)?;
        }
        SweepParameter::EnergyRate => {
            s.tariff = crate::energy::Tariff::new(Money::from_dollars(v)?, s.tariff.hours_per_year())
                .map_err(|e| SensitivityError::BadRange(e.to_string()))?;
        }
        SweepParameter::Reputation { option, case } => {
            let opt = s
                .options
                .iter_mut()
                .find(|o| &o.name == option)
                .ok_or_else(|| {
                    SensitivityError::ParameterPath(format!("no option named {option:?}"))
                })?;
            let technology = opt.technology.clone();
            let cases = match &mut opt.body {
                OptionBody::Cases(c) => c,
                OptionBody::Lottery(_) => {
                    return Err(SensitivityError::ParameterPath(format!(
                        "option {option:?} is an inline lottery and has no reputation cases"
                    )))
                }
            };
            let idx = OutcomeCase::ALL
                .iter()
                .position(|c| c == case)
                .expect("all cases enumerated");
            if idx >= cases.savings.len() {
                return Err(SensitivityError::ParameterPath(format!(
                    "option {option:?} has no {case} case"
                )));
            }
            if cases.reputation.is_none() {
                // Materialize the catalog triple so one case can be bent.
                let tech = technology.as_deref().ok_or_else(|| {
                    SensitivityError::ParameterPath(format!(
                        "option {option:?} has neither reputation values nor a technology"
                    ))
                })?;
                let profile = crate::catalog::builtin_profile();
                let mut resolved = Vec::with_capacity(cases.savings.len());
                for c in &OutcomeCase::ALL[..cases.savings.len()] {
                    resolved.push(
                        crate::value::reputation_value(profile, tech, *c)
                            .map_err(|e| SensitivityError::ParameterPath(e.to_string()))?,
                    );
                }
                cases.reputation = Some(resolved);
            }
            cases.reputation.as_mut().expect("just materialized")[idx] = Money::from_dollars(v)?;
        }
        SweepParameter::BlackSwanProbability => {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(SensitivityError::BadProbability(v));
            }
            s.black_swan
                .as_mut()
                .ok_or_else(|| {
                    SensitivityError::ParameterPath("scenario has no [blackswan] section".to_string())
                })?
                .probability = v;
        }
    }
    Ok(s)
}

/// Re-evaluates the scenario at each of `steps` parameter values and
/// records the root CE and chosen option.
pub fn sweep(
    scenario: &Scenario,
    param: &SweepParameter,
    lo: f64,
    hi: f64,
    steps: usize,
    log_spacing: bool,
) -> Result<SweepResult, SensitivityError> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(SensitivityError::BadRange("bounds must be finite".to_string()));
    }
    if lo >= hi {
        return Err(SensitivityError::BadRange(format!(
            "need lo < hi, got [{lo}, {hi}]"
        )));
    }
    if steps < 2 {
        return Err(SensitivityError::BadRange(format!(
            "need at least 2 steps, got {steps}"
        )));
    }
    if log_spacing && lo <= 0.0 {
        return Err(SensitivityError::BadRange(
            "log spacing needs a positive lower bound".to_string(),
        ));
    }
    let mut samples = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        let v = if log_spacing {
            (lo.ln() + (hi.ln() - lo.ln()) * t).exp()
        } else {
            lo + (hi - lo) * t
        };
        // Keep the endpoints exact against spacing round-off.
        let v = if i == 0 {
            lo
        } else if i == steps - 1 {
            hi
        } else {
            v
        };
        let modified = apply_parameter(scenario, param, v)?;
        let report = evaluate(&modified)?;
        samples.push(SweepSample {
            value: v,
            certain_equivalent: report.decision.certain_equivalent,
            chosen: report.decision.chosen.clone(),
        });
    }
    Ok(SweepResult {
        parameter: param.label(),
        samples,
    })
}
