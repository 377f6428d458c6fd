//! Scenario evaluation: builds the per-option outcome tables, rolls the
//! decision tree back, and renders the result as text, JSON, or CSV.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::catalog::builtin_profile;
use crate::energy::annual_energy_cost;
use crate::money::Money;
use crate::scenario::{OptionBody, Scenario, SavingsSpec, BASELINE_NAME};
use crate::sensitivity::{breakeven_probability, BlackSwanSpec, BreakevenSolution, SensitivityError};
use crate::tree::{
    e_value, rollback, DecisionTree, LotteryBranch, OutcomeLottery, RollbackReport,
};
use crate::utility::{certain_equivalent, u_transform, RiskPreference};
use crate::value::{
    reputation_value, total_value, validate_reputation_profile, OutcomeCase, ProfileWarning,
};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{path}: {message}")]
pub struct ReportError {
    pub path: String,
    pub message: String,
}

impl ReportError {
    fn new(path: impl Into<String>, error: impl ToString) -> ReportError {
        ReportError {
            path: path.into(),
            message: error.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub risk: RiskPreference,
    pub annual_energy_cost: Money,
    pub baseline: BaselineSummary,
    pub options: Vec<OptionReport>,
    pub decision: DecisionSummary,
    pub rollback: RollbackReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineSummary {
    pub name: String,
    pub value: Money,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionSummary {
    pub chosen: String,
    pub expected_utility: f64,
    pub certain_equivalent: Money,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionReport {
    pub name: String,
    pub technology: Option<String>,
    pub time_scale_seconds: Option<f64>,
    /// Annual bill the savings fractions apply to; None for inline lotteries.
    pub energy_base: Option<Money>,
    pub extra_costs: Option<Money>,
    pub rows: Vec<CaseRow>,
    pub expected_utility: f64,
    pub certain_equivalent: Money,
    pub black_swan: Option<BlackSwanReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRow {
    pub label: String,
    pub probability: f64,
    pub energy: Option<Money>,
    pub reputation: Option<Money>,
    pub value: Money,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlackSwanReport {
    pub catastrophe: Money,
    pub catastrophe_utility: f64,
    pub probability: f64,
    pub breakeven: Option<BreakevenSolution>,
}

/// Full pipeline: table rows per option, black-swan overlay where attached,
/// then tree rollback against the do-nothing baseline.
pub fn evaluate(scenario: &Scenario) -> Result<Report, ReportError> {
    let annual = annual_energy_cost(&scenario.inventory, &scenario.tariff)
        .map_err(|e| ReportError::new("inventory", e))?;
    let profile = builtin_profile();
    let pref = &scenario.risk;
    let mut warnings = scenario_warnings(scenario);

    let mut options = Vec::with_capacity(scenario.options.len());
    let mut arms = vec![(
        BASELINE_NAME.to_string(),
        DecisionTree::Terminal(Money::ZERO),
    )];

    for opt in &scenario.options {
        let path = format!("option {}", opt.name);
        let entry = opt.technology.as_deref().and_then(|t| profile.entry(t));
        let time_scale_seconds = entry.map(|e| e.time_scale.seconds());

        let (rows, base_lottery, energy_base, extra_costs) = match &opt.body {
            OptionBody::Cases(c) => {
                let base = c.energy_base.unwrap_or(annual);
                let n = c.savings.len();
                let mut rows = Vec::with_capacity(n);
                let mut branches = Vec::with_capacity(n);
                for (i, case) in OutcomeCase::ALL[..n].iter().enumerate() {
                    let energy = match &c.savings {
                        SavingsSpec::Fractions(fs) => base
                            .mul_fraction(fs[i])
                            .map_err(|e| ReportError::new(&path, e))?,
                        SavingsSpec::Dollars(ds) => ds[i],
                    };
                    let reputation = match &c.reputation {
                        Some(rep) => rep[i],
                        None => {
                            let tech = opt.technology.as_deref().ok_or_else(|| {
                                ReportError::new(&path, "no reputation values and no technology")
                            })?;
                            reputation_value(profile, tech, *case)
                                .map_err(|e| ReportError::new(&path, e))?
                        }
                    };
                    let breakdown = total_value(energy, reputation, c.extra_costs)
                        .map_err(|e| ReportError::new(&path, e))?;
                    let u = u_transform(breakdown.total, pref);
                    rows.push(CaseRow {
                        label: case.as_str().to_string(),
                        probability: c.probabilities[i],
                        energy: Some(energy),
                        reputation: Some(reputation),
                        value: breakdown.total,
                        utility: u.value(),
                    });
                    branches.push(LotteryBranch {
                        label: case.as_str().to_string(),
                        probability: c.probabilities[i],
                        value: breakdown.total,
                    });
                }
                (
                    rows,
                    OutcomeLottery::new(branches),
                    Some(base),
                    Some(c.extra_costs),
                )
            }
            OptionBody::Lottery(outcomes) => {
                let rows = outcomes
                    .iter()
                    .enumerate()
                    .map(|(i, o)| CaseRow {
                        label: format!("outcome {}", i + 1),
                        probability: o.probability,
                        energy: None,
                        reputation: None,
                        value: o.value,
                        utility: u_transform(o.value, pref).value(),
                    })
                    .collect::<Vec<_>>();
                let branches = rows
                    .iter()
                    .map(|r| LotteryBranch {
                        label: r.label.clone(),
                        probability: r.probability,
                        value: r.value,
                    })
                    .collect();
                (rows, OutcomeLottery::new(branches), None, None)
            }
        };

        let swan = scenario
            .black_swan
            .as_ref()
            .filter(|sw| sw.option == opt.name);
        let (effective, black_swan) = match swan {
            Some(sw) => {
                let spec = BlackSwanSpec {
                    base: base_lottery,
                    catastrophe_value: sw.catastrophe,
                };
                let composed = spec
                    .composed_lottery(sw.probability)
                    .map_err(|e| ReportError::new(&path, e))?;
                let breakeven = if sw.solve {
                    match breakeven_probability(&spec, pref) {
                        Ok(solution) => Some(solution),
                        Err(e @ SensitivityError::NoBreakeven { .. }) => {
                            warnings.push(format!("{path}: {e}"));
                            None
                        }
                        Err(e) => return Err(ReportError::new(&path, e)),
                    }
                } else {
                    None
                };
                let swan_report = BlackSwanReport {
                    catastrophe: sw.catastrophe,
                    catastrophe_utility: u_transform(sw.catastrophe, pref).value(),
                    probability: sw.probability,
                    breakeven,
                };
                (composed, Some(swan_report))
            }
            None => (base_lottery, None),
        };

        let eu = e_value(&effective, pref).map_err(|e| ReportError::new(&path, e))?;
        let ce = certain_equivalent(eu, pref).map_err(|e| ReportError::new(&path, e))?;
        options.push(OptionReport {
            name: opt.name.clone(),
            technology: opt.technology.clone(),
            time_scale_seconds,
            energy_base,
            extra_costs,
            rows,
            expected_utility: eu.value(),
            certain_equivalent: ce,
            black_swan,
        });
        arms.push((opt.name.clone(), DecisionTree::from_lottery(&effective)));
    }

    let tree = DecisionTree::Decision(arms);
    let annotated = rollback(&tree, pref).map_err(|e| ReportError::new("tree", e))?;
    let chosen = annotated
        .chosen()
        .expect("root is a decision node")
        .to_string();
    let decision = DecisionSummary {
        chosen,
        expected_utility: annotated.root_utility(),
        certain_equivalent: annotated.root_ce(),
    };

    Ok(Report {
        scenario: scenario.name.clone(),
        risk: scenario.risk,
        annual_energy_cost: annual,
        baseline: BaselineSummary {
            name: BASELINE_NAME.to_string(),
            value: Money::ZERO,
            utility: 0.0,
        },
        options,
        decision,
        rollback: annotated,
        warnings,
    })
}

/// Static warnings: catalog anomalies on referenced technologies, plus
/// out-of-order user reputation triples. Deterministic order (option order,
/// rises before orderings).
pub fn scenario_warnings(scenario: &Scenario) -> Vec<String> {
    let profile = builtin_profile();
    let rises = validate_reputation_profile(profile);
    let orderings = crate::value::case_ordering_warnings(profile);
    let mut out = Vec::new();
    for opt in &scenario.options {
        let path = format!("option {}", opt.name);
        if let Some(tech) = &opt.technology {
            for w in &rises {
                if matches!(w, ProfileWarning::ReputationRise { to_technology, .. } if to_technology == tech)
                {
                    out.push(format!("{path}: {w}"));
                }
            }
            for w in &orderings {
                if matches!(w, ProfileWarning::CaseOrdering { technology, .. } if technology == tech)
                {
                    out.push(format!("{path}: {w}"));
                }
            }
        }
        if let OptionBody::Cases(c) = &opt.body {
            if let Some(rep) = &c.reputation {
                let ordered = match rep.len() {
                    3 => rep[2] <= rep[1] && rep[1] <= rep[0],
                    2 => rep[1] <= rep[0],
                    _ => true,
                };
                if !ordered {
                    let listed = rep
                        .iter()
                        .zip(OutcomeCase::ALL)
                        .map(|(m, c)| format!("{c} {m}"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    out.push(format!(
                        "{path}: reputation cases out of order ({listed}); expected worst <= average <= best"
                    ));
                }
            }
        }
    }
    out
}

/// Two-space indented columns: first left-aligned, the rest right-aligned.
pub fn aligned_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; cols];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        out.push_str("  ");
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            if i == 0 {
                let _ = write!(out, "{cell:<width$}", width = widths[i]);
            } else {
                let _ = write!(out, "{cell:>width$}", width = widths[i]);
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    out
}

fn maybe(m: Option<Money>) -> String {
    m.map(|m| m.to_string()).unwrap_or_default()
}

pub fn render_text(report: &Report, bold: bool) -> String {
    let emph = |s: String| {
        if bold {
            format!("\x1b[1m{s}\x1b[0m")
        } else {
            s
        }
    };
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", report.scenario);
    match report.risk {
        RiskPreference::Exponential { rho } => {
            let _ = writeln!(out, "risk tolerance: {rho}");
        }
        RiskPreference::Neutral => {
            let _ = writeln!(out, "risk preference: neutral (expected value)");
        }
    }
    let _ = writeln!(out, "annual energy cost: {}", report.annual_energy_cost);

    for opt in &report.options {
        out.push('\n');
        let mut header = format!("option {}", opt.name);
        if let Some(tech) = &opt.technology {
            let _ = write!(header, "  ({tech}");
            if let Some(t) = opt.time_scale_seconds {
                let _ = write!(header, ", t = {t} s");
            }
            header.push(')');
        }
        let _ = writeln!(out, "{header}");
        let mut rows = vec![vec![
            "case".to_string(),
            "p".to_string(),
            "energy".to_string(),
            "reputation".to_string(),
            "value".to_string(),
            "utility".to_string(),
        ]];
        for r in &opt.rows {
            rows.push(vec![
                r.label.clone(),
                r.probability.to_string(),
                maybe(r.energy),
                maybe(r.reputation),
                r.value.to_string(),
                format!("{:.8}", r.utility),
            ]);
        }
        out.push_str(&aligned_table(&rows));
        let _ = writeln!(
            out,
            "  e-value {:.8}, certain equivalent {}",
            opt.expected_utility, opt.certain_equivalent
        );
        if let Some(swan) = &opt.black_swan {
            let _ = writeln!(
                out,
                "  black swan: catastrophe {} (utility {:.8}) at p = {}",
                swan.catastrophe, swan.catastrophe_utility, swan.probability
            );
            if let Some(sol) = &swan.breakeven {
                let _ = writeln!(
                    out,
                    "  breakeven p* = {:.4e} (closed form {:.4e})",
                    sol.probability, sol.closed_form
                );
            }
        }
    }

    out.push('\n');
    let _ = writeln!(out, "{}", emph(format!("decision: {}", report.decision.chosen)));
    let _ = writeln!(
        out,
        "  root certain equivalent {} (e-value {:.8})",
        report.decision.certain_equivalent, report.decision.expected_utility
    );
    let _ = writeln!(
        out,
        "  baseline {}: value {}",
        report.baseline.name, report.baseline.value
    );

    if !report.warnings.is_empty() {
        out.push('\n');
        let _ = writeln!(out, "warnings:");
        for w in &report.warnings {
            let _ = writeln!(out, "  - {w}");
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per outcome; money in plain decimal, utilities full precision.
pub fn render_csv(report: &Report) -> String {
    let mut out = String::from("option,case,probability,energy,reputation,value,utility\n");
    for opt in &report.options {
        for r in &opt.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                csv_field(&opt.name),
                csv_field(&r.label),
                r.probability,
                r.energy.map(|m| m.to_plain_string()).unwrap_or_default(),
                r.reputation.map(|m| m.to_plain_string()).unwrap_or_default(),
                r.value.to_plain_string(),
                r.utility
            );
        }
    }
    out
}
