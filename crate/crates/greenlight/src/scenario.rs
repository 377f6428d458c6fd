//! Scenario files: a line-oriented section format describing one deployment
//! decision, plus the canonical serializer that round-trips it.
//!
//! ```text
//! name = enterprise
//!
//! [inventory]
//! group = 100 x 300 W, access switches
//!
//! [tariff]
//! rate_per_kwh = 0.10
//! hours_per_year = 8766
//!
//! [risk]
//! tolerance = 250000        # dollars; or "neutral", or stake = <dollars>
//!
//! [option deploy]
//! technology = TE /node
//! savings = 2/3, 1/3, 1/3
//! reputation = 10000, 10000, -200000
//! probabilities = 0.25, 0.7, 0.05
//!
//! [blackswan]
//! option = deploy
//! catastrophe = -5000000
//! probability = 0
//! solve = true
//! ```
//!
//! `#` starts a full-line comment. Case rows run best, average, worst; two
//! entries mean best and average only. An option is either case-based
//! (savings as exact fractions of the annual bill, or `savings_dollars` as
//! literal rows) or a raw `lottery = p: value, ...`. Money literals inside
//! comma-separated lists must not use digit grouping.

use std::fmt::Write as _;

use thiserror::Error;

use crate::catalog::builtin_profile;
use crate::energy::{DeviceGroup, DeviceInventory, Tariff, HOURS_PER_YEAR_DEFAULT};
use crate::money::{Fraction, Money};
use crate::tree::PROBABILITY_TOLERANCE;
use crate::utility::{stake_to_rho, RiskPreference};

/// Option name reserved for the do-nothing branch of the decision.
pub const BASELINE_NAME: &str = "no-ennms";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ScenarioError {
    fn syntax(line: usize, column: usize, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn invalid(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub inventory: DeviceInventory,
    pub tariff: Tariff,
    pub risk: RiskPreference,
    pub options: Vec<PolicyOption>,
    pub black_swan: Option<BlackSwan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOption {
    pub name: String,
    pub technology: Option<String>,
    pub body: OptionBody,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OptionBody {
    Cases(CaseSpec),
    Lottery(Vec<LotteryOutcome>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub savings: SavingsSpec,
    pub probabilities: Vec<f64>,
    /// Per-case override; resolved from the technology's catalog row when
    /// absent.
    pub reputation: Option<Vec<Money>>,
    /// Addressable annual energy base; defaults to the inventory's bill.
    pub energy_base: Option<Money>,
    pub extra_costs: Money,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SavingsSpec {
    Fractions(Vec<Fraction>),
    Dollars(Vec<Money>),
}

impl SavingsSpec {
    pub fn len(&self) -> usize {
        match self {
            SavingsSpec::Fractions(v) => v.len(),
            SavingsSpec::Dollars(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LotteryOutcome {
    pub probability: f64,
    pub value: Money,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlackSwan {
    pub option: String,
    pub catastrophe: Money,
    pub probability: f64,
    pub solve: bool,
}

// Raw single-pass collection; cross-field validation happens in build().

#[derive(Default)]
struct RawOption {
    name: String,
    technology: Option<String>,
    savings: Option<Vec<Fraction>>,
    savings_dollars: Option<Vec<Money>>,
    reputation: Option<Vec<Money>>,
    probabilities: Option<Vec<f64>>,
    energy_base: Option<Money>,
    extra_costs: Option<Money>,
    lottery: Option<Vec<LotteryOutcome>>,
}

#[derive(Default)]
struct RawScenario {
    name: Option<String>,
    groups: Vec<DeviceGroup>,
    saw_inventory: bool,
    rate_per_kwh: Option<Money>,
    hours_per_year: Option<f64>,
    saw_tariff: bool,
    tolerance: Option<RiskPreference>,
    stake: Option<Money>,
    saw_risk: bool,
    options: Vec<RawOption>,
    swan_option: Option<String>,
    catastrophe: Option<Money>,
    swan_probability: Option<f64>,
    solve: Option<bool>,
    saw_swan: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Inventory,
    Tariff,
    Risk,
    Option(usize),
    BlackSwan,
}

pub fn parse_scenario(document: &str) -> Result<Scenario, ScenarioError> {
    let mut raw = RawScenario::default();
    let mut section = Section::Preamble;
    let mut saw_content = false;

    for (idx, line) in document.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        saw_content = true;
        let col = line.len() - line.trim_start().len() + 1;

        if let Some(header) = trimmed.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| ScenarioError::syntax(line_no, col, "unterminated section header"))?
                .trim();
            section = match header {
                "inventory" => {
                    if raw.saw_inventory {
                        return Err(ScenarioError::syntax(line_no, col, "duplicate [inventory] section"));
                    }
                    raw.saw_inventory = true;
                    Section::Inventory
                }
                "tariff" => {
                    if raw.saw_tariff {
                        return Err(ScenarioError::syntax(line_no, col, "duplicate [tariff] section"));
                    }
                    raw.saw_tariff = true;
                    Section::Tariff
                }
                "risk" => {
                    if raw.saw_risk {
                        return Err(ScenarioError::syntax(line_no, col, "duplicate [risk] section"));
                    }
                    raw.saw_risk = true;
                    Section::Risk
                }
                "blackswan" => {
                    if raw.saw_swan {
                        return Err(ScenarioError::syntax(line_no, col, "duplicate [blackswan] section"));
                    }
                    raw.saw_swan = true;
                    Section::BlackSwan
                }
                other => match other.strip_prefix("option") {
                    Some(name) if name.starts_with(char::is_whitespace) => {
                        let name = name.trim();
                        if name.is_empty() {
                            return Err(ScenarioError::syntax(line_no, col, "option section needs a name"));
                        }
                        if raw.options.iter().any(|o| o.name == name) {
                            return Err(ScenarioError::syntax(
                                line_no,
                                col,
                                format!("duplicate option name {name:?}"),
                            ));
                        }
                        raw.options.push(RawOption {
                            name: name.to_string(),
                            ..RawOption::default()
                        });
                        Section::Option(raw.options.len() - 1)
                    }
                    _ => {
                        return Err(ScenarioError::syntax(
                            line_no,
                            col,
                            format!("unknown section [{other}]"),
                        ))
                    }
                },
            };
            continue;
        }

        let Some((key_part, value_part)) = trimmed.split_once('=') else {
            return Err(ScenarioError::syntax(
                line_no,
                col,
                "expected `key = value` or a [section] header",
            ));
        };
        let key = key_part.trim();
        let value = value_part.trim();
        let value_col = col + key_part.len() + 1 + (value_part.len() - value_part.trim_start().len());
        let at = |message: String| ScenarioError::syntax(line_no, value_col, message);

        match section {
            Section::Preamble => match key {
                "name" => raw.name = Some(value.to_string()),
                _ => {
                    return Err(ScenarioError::syntax(
                        line_no,
                        col,
                        format!("key {key:?} before any section (only `name` may appear here)"),
                    ))
                }
            },
            Section::Inventory => match key {
                "group" => raw.groups.push(parse_group(value).map_err(at)?),
                _ => return Err(unknown_key(line_no, col, key, "inventory")),
            },
            Section::Tariff => match key {
                "rate_per_kwh" => raw.rate_per_kwh = Some(parse_money(value).map_err(at)?),
                "hours_per_year" => raw.hours_per_year = Some(parse_f64(value).map_err(at)?),
                _ => return Err(unknown_key(line_no, col, key, "tariff")),
            },
            Section::Risk => match key {
                "tolerance" => {
                    raw.tolerance = Some(if value == "neutral" {
                        RiskPreference::Neutral
                    } else {
                        let rho = parse_money(value).map_err(at)?;
                        RiskPreference::exponential(rho).map_err(|e| at(e.to_string()))?
                    })
                }
                "stake" => raw.stake = Some(parse_money(value).map_err(at)?),
                _ => return Err(unknown_key(line_no, col, key, "risk")),
            },
            Section::Option(i) => {
                let opt = &mut raw.options[i];
                match key {
                    "technology" => opt.technology = Some(value.to_string()),
                    "savings" => opt.savings = Some(parse_list(value, parse_fraction).map_err(at)?),
                    "savings_dollars" => {
                        opt.savings_dollars = Some(parse_list(value, parse_money).map_err(at)?)
                    }
                    "reputation" => {
                        opt.reputation = Some(parse_list(value, parse_money).map_err(at)?)
                    }
                    "probabilities" => {
                        opt.probabilities = Some(parse_list(value, parse_f64).map_err(at)?)
                    }
                    "energy_base" => opt.energy_base = Some(parse_money(value).map_err(at)?),
                    "extra_costs" => opt.extra_costs = Some(parse_money(value).map_err(at)?),
                    "lottery" => opt.lottery = Some(parse_lottery(value).map_err(at)?),
                    _ => return Err(unknown_key(line_no, col, key, "option")),
                }
            }
            Section::BlackSwan => match key {
                "option" => raw.swan_option = Some(value.to_string()),
                "catastrophe" => raw.catastrophe = Some(parse_money(value).map_err(at)?),
                "probability" => raw.swan_probability = Some(parse_f64(value).map_err(at)?),
                "solve" => {
                    raw.solve = Some(match value {
                        "true" => true,
                        "false" => false,
                        _ => return Err(at(format!("expected true or false, got {value:?}"))),
                    })
                }
                _ => return Err(unknown_key(line_no, col, key, "blackswan")),
            },
        }
    }

    if !saw_content {
        return Err(ScenarioError::syntax(1, 1, "empty document"));
    }
    build(raw)
}

fn unknown_key(line: usize, column: usize, key: &str, section: &str) -> ScenarioError {
    ScenarioError::syntax(line, column, format!("unknown key {key:?} in [{section}]"))
}

fn parse_money(s: &str) -> Result<Money, String> {
    s.parse::<Money>().map_err(|e| e.to_string())
}

fn parse_fraction(s: &str) -> Result<Fraction, String> {
    let f = s.parse::<Fraction>().map_err(|e| e.to_string())?;
    if !f.is_proper() {
        return Err(format!("savings fraction {f} exceeds 1"));
    }
    Ok(f)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("expected a finite number, got {s:?}"));
    }
    Ok(v)
}

fn parse_list<T>(s: &str, item: fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    s.split(',').map(|part| item(part.trim())).collect()
}

/// `COUNT x DRAW [W|kW][, LABEL]`, e.g. `100 x 300 W, access switches`.
fn parse_group(s: &str) -> Result<DeviceGroup, String> {
    let (spec, label) = match s.split_once(',') {
        Some((spec, label)) => (spec.trim(), label.trim()),
        None => (s.trim(), ""),
    };
    let (count_part, draw_part) = spec
        .split_once('x')
        .ok_or_else(|| format!("expected `count x watts`, got {spec:?}"))?;
    let count: u32 = count_part
        .trim()
        .parse()
        .map_err(|_| format!("bad device count {:?}", count_part.trim()))?;
    let draw_part = draw_part.trim();
    let (number, unit) = match draw_part.split_once(char::is_whitespace) {
        Some((n, u)) => (n.trim(), u.trim()),
        None => (draw_part, "W"),
    };
    let mut draw: f64 = number
        .parse()
        .map_err(|_| format!("bad power draw {number:?}"))?;
    match unit {
        "W" | "" => {}
        "kW" => draw *= 1000.0,
        other => return Err(format!("unknown power unit {other:?} (use W or kW)")),
    }
    DeviceGroup::new(count, draw, label).map_err(|e| e.to_string())
}

/// `p: value, p: value, ...`
fn parse_lottery(s: &str) -> Result<Vec<LotteryOutcome>, String> {
    s.split(',')
        .map(|part| {
            let (p, v) = part
                .split_once(':')
                .ok_or_else(|| format!("expected `probability: value`, got {:?}", part.trim()))?;
            Ok(LotteryOutcome {
                probability: parse_f64(p.trim())?,
                value: parse_money(v.trim())?,
            })
        })
        .collect()
}

const CASE_LABELS: [&str; 3] = ["best", "average", "worst"];

fn check_probabilities(path: &str, probabilities: &[f64]) -> Result<(), ScenarioError> {
    for &p in probabilities {
        if !(0.0..=1.0).contains(&p) {
            return Err(ScenarioError::invalid(
                path,
                format!("probability {p} outside [0, 1]"),
            ));
        }
    }
    let sum: f64 = probabilities.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(ScenarioError::invalid(
            path,
            format!("probabilities sum to {sum} (residual {:e})", sum - 1.0),
        ));
    }
    Ok(())
}

fn build(raw: RawScenario) -> Result<Scenario, ScenarioError> {
    let tariff = {
        if !raw.saw_tariff {
            return Err(ScenarioError::invalid("tariff", "missing [tariff] section"));
        }
        let rate = raw
            .rate_per_kwh
            .ok_or_else(|| ScenarioError::invalid("tariff", "missing rate_per_kwh"))?;
        Tariff::new(rate, raw.hours_per_year.unwrap_or(HOURS_PER_YEAR_DEFAULT))
            .map_err(|e| ScenarioError::invalid("tariff", e.to_string()))?
    };

    let risk = {
        if !raw.saw_risk {
            return Err(ScenarioError::invalid("risk", "missing [risk] section"));
        }
        match (raw.tolerance, raw.stake) {
            (Some(_), Some(_)) => {
                return Err(ScenarioError::invalid(
                    "risk",
                    "tolerance and stake are mutually exclusive",
                ))
            }
            (Some(pref), None) => pref,
            (None, Some(stake)) => {
                let rho = stake_to_rho(stake)
                    .map_err(|e| ScenarioError::invalid("risk", e.to_string()))?;
                RiskPreference::exponential(rho)
                    .map_err(|e| ScenarioError::invalid("risk", e.to_string()))?
            }
            (None, None) => {
                return Err(ScenarioError::invalid(
                    "risk",
                    "need either tolerance or stake",
                ))
            }
        }
    };

    if raw.options.is_empty() {
        return Err(ScenarioError::invalid(
            "options",
            "scenario needs at least one [option] section",
        ));
    }

    let mut options = Vec::with_capacity(raw.options.len());
    for opt in raw.options {
        let path = format!("option {}", opt.name);
        if opt.name == BASELINE_NAME {
            return Err(ScenarioError::invalid(
                &path,
                format!("{BASELINE_NAME:?} is reserved for the do-nothing baseline"),
            ));
        }
        if let Some(tech) = &opt.technology {
            if builtin_profile().entry(tech).is_none() {
                return Err(ScenarioError::invalid(
                    &path,
                    format!("unknown technology {tech:?}"),
                ));
            }
        }
        let body = if let Some(lottery) = opt.lottery {
            let case_keys = [
                opt.savings.is_some(),
                opt.savings_dollars.is_some(),
                opt.reputation.is_some(),
                opt.probabilities.is_some(),
                opt.energy_base.is_some(),
                opt.extra_costs.is_some(),
            ];
            if case_keys.iter().any(|&k| k) {
                return Err(ScenarioError::invalid(
                    &path,
                    "lottery cannot be combined with case keys",
                ));
            }
            if lottery.is_empty() {
                return Err(ScenarioError::invalid(&path, "lottery needs at least one outcome"));
            }
            check_probabilities(&path, &lottery.iter().map(|o| o.probability).collect::<Vec<_>>())?;
            OptionBody::Lottery(lottery)
        } else {
            let savings = match (opt.savings, opt.savings_dollars) {
                (Some(_), Some(_)) => {
                    return Err(ScenarioError::invalid(
                        &path,
                        "savings and savings_dollars are mutually exclusive",
                    ))
                }
                (Some(f), None) => SavingsSpec::Fractions(f),
                (None, Some(d)) => SavingsSpec::Dollars(d),
                (None, None) => {
                    return Err(ScenarioError::invalid(
                        &path,
                        "need savings, savings_dollars, or lottery",
                    ))
                }
            };
            let n = savings.len();
            if n == 0 || n > CASE_LABELS.len() {
                return Err(ScenarioError::invalid(
                    &path,
                    format!("need 1 to 3 cases (best, average, worst), got {n}"),
                ));
            }
            let probabilities = opt.probabilities.ok_or_else(|| {
                ScenarioError::invalid(&path, "case-based option needs probabilities")
            })?;
            if probabilities.len() != n {
                return Err(ScenarioError::invalid(
                    &path,
                    format!(
                        "probabilities has {} entries but savings has {n}",
                        probabilities.len()
                    ),
                ));
            }
            check_probabilities(&path, &probabilities)?;
            if let Some(rep) = &opt.reputation {
                if rep.len() != n {
                    return Err(ScenarioError::invalid(
                        &path,
                        format!("reputation has {} entries but savings has {n}", rep.len()),
                    ));
                }
            }
            if opt.reputation.is_none() && opt.technology.is_none() {
                return Err(ScenarioError::invalid(
                    &path,
                    "need reputation values or a technology to resolve them from",
                ));
            }
            if let Some(base) = opt.energy_base {
                if !base.is_positive() {
                    return Err(ScenarioError::invalid(
                        &path,
                        format!("energy_base must be positive, got {base}"),
                    ));
                }
            }
            OptionBody::Cases(CaseSpec {
                savings,
                probabilities,
                reputation: opt.reputation,
                energy_base: opt.energy_base,
                extra_costs: opt.extra_costs.unwrap_or(Money::ZERO),
            })
        };
        options.push(PolicyOption {
            name: opt.name,
            technology: opt.technology,
            body,
        });
    }

    let black_swan = if raw.saw_swan {
        let option = raw
            .swan_option
            .ok_or_else(|| ScenarioError::invalid("blackswan", "missing option reference"))?;
        if !options.iter().any(|o| o.name == option) {
            return Err(ScenarioError::invalid(
                "blackswan",
                format!("references unknown option {option:?}"),
            ));
        }
        let catastrophe = raw
            .catastrophe
            .ok_or_else(|| ScenarioError::invalid("blackswan", "missing catastrophe value"))?;
        let probability = raw.swan_probability.unwrap_or(0.0);
        if !(0.0..=1.0).contains(&probability) {
            return Err(ScenarioError::invalid(
                "blackswan",
                format!("probability {probability} outside [0, 1]"),
            ));
        }
        Some(BlackSwan {
            option,
            catastrophe,
            probability,
            solve: raw.solve.unwrap_or(false),
        })
    } else {
        None
    };

    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| "unnamed".to_string()),
        inventory: DeviceInventory::new(raw.groups),
        tariff,
        risk,
        options,
        black_swan,
    })
}

/// Canonical rendering; `parse_scenario(serialize_scenario(s)) == s`.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name = {}", scenario.name);

    if !scenario.inventory.groups().is_empty() {
        let _ = writeln!(out, "\n[inventory]");
        for g in scenario.inventory.groups() {
            let _ = write!(out, "group = {} x {} W", g.count(), g.draw_watts());
            if g.label().is_empty() {
                out.push('\n');
            } else {
                let _ = writeln!(out, ", {}", g.label());
            }
        }
    }

    let _ = writeln!(out, "\n[tariff]");
    let _ = writeln!(out, "rate_per_kwh = {}", scenario.tariff.rate_per_kwh().to_plain_string());
    let _ = writeln!(out, "hours_per_year = {}", scenario.tariff.hours_per_year());

    let _ = writeln!(out, "\n[risk]");
    match scenario.risk {
        RiskPreference::Exponential { rho } => {
            let _ = writeln!(out, "tolerance = {}", rho.to_plain_string());
        }
        RiskPreference::Neutral => {
            let _ = writeln!(out, "tolerance = neutral");
        }
    }

    for opt in &scenario.options {
        let _ = writeln!(out, "\n[option {}]", opt.name);
        if let Some(tech) = &opt.technology {
            let _ = writeln!(out, "technology = {tech}");
        }
        match &opt.body {
            OptionBody::Cases(c) => {
                match &c.savings {
                    SavingsSpec::Fractions(fs) => {
                        let _ = writeln!(out, "savings = {}", join(fs.iter().map(|f| f.to_string())));
                    }
                    SavingsSpec::Dollars(ds) => {
                        let _ = writeln!(
                            out,
                            "savings_dollars = {}",
                            join(ds.iter().map(|m| m.to_plain_string()))
                        );
                    }
                }
                let _ = writeln!(
                    out,
                    "probabilities = {}",
                    join(c.probabilities.iter().map(|p| p.to_string()))
                );
                if let Some(rep) = &c.reputation {
                    let _ = writeln!(
                        out,
                        "reputation = {}",
                        join(rep.iter().map(|m| m.to_plain_string()))
                    );
                }
                if let Some(base) = c.energy_base {
                    let _ = writeln!(out, "energy_base = {}", base.to_plain_string());
                }
                if !c.extra_costs.is_zero() {
                    let _ = writeln!(out, "extra_costs = {}", c.extra_costs.to_plain_string());
                }
            }
            OptionBody::Lottery(outcomes) => {
                let _ = writeln!(
                    out,
                    "lottery = {}",
                    join(outcomes
                        .iter()
                        .map(|o| format!("{}: {}", o.probability, o.value.to_plain_string())))
                );
            }
        }
    }

    if let Some(swan) = &scenario.black_swan {
        let _ = writeln!(out, "\n[blackswan]");
        let _ = writeln!(out, "option = {}", swan.option);
        let _ = writeln!(out, "catastrophe = {}", swan.catastrophe.to_plain_string());
        let _ = writeln!(out, "probability = {}", swan.probability);
        let _ = writeln!(out, "solve = {}", swan.solve);
    }

    out
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}
