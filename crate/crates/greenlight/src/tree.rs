//! Decision trees and rollback: e-values at chance nodes, max-CE choices at
//! decision nodes, certain equivalents annotated throughout.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::money::Money;
use crate::utility::{
    certain_equivalent, expected_utility, u_transform, RiskPreference, Utility, UtilityError,
};

/// Probability sums must land within this of 1. Inputs are never
/// renormalized silently.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Two certain equivalents within half a cent count as a tie; the
/// first-listed option wins.
pub const TIE_WINDOW_DOLLARS: f64 = 0.005;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("invalid decision tree: {}", issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid { issues: Vec<TreeIssue> },
    #[error(transparent)]
    Utility(#[from] UtilityError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeIssue {
    pub path: String,
    pub kind: TreeIssueKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeIssueKind {
    ProbabilitySum { sum: f64, residual: f64 },
    BadProbability { probability: f64 },
    EmptyDecision,
    EmptyChance,
}

impl fmt::Display for TreeIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TreeIssueKind::ProbabilitySum { sum, residual } => write!(
                f,
                "{}: probabilities sum to {sum} (residual {residual:e})",
                self.path
            ),
            TreeIssueKind::BadProbability { probability } => {
                write!(f, "{}: probability {probability} outside [0, 1]", self.path)
            }
            TreeIssueKind::EmptyDecision => write!(f, "{}: decision node has no options", self.path),
            TreeIssueKind::EmptyChance => write!(f, "{}: chance node has no branches", self.path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LotteryBranch {
    pub label: String,
    pub probability: f64,
    pub value: Money,
}

/// A flat set of probability-weighted outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeLottery {
    pub branches: Vec<LotteryBranch>,
}

impl OutcomeLottery {
    pub fn new(branches: Vec<LotteryBranch>) -> OutcomeLottery {
        OutcomeLottery { branches }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        let probabilities: Vec<f64> = self.branches.iter().map(|b| b.probability).collect();
        let issues = probability_issues("lottery", &probabilities, self.branches.is_empty());
        if issues.is_empty() {
            Ok(())
        } else {
            Err(TreeError::Invalid { issues })
        }
    }

    pub fn expected_value_dollars(&self) -> f64 {
        self.branches
            .iter()
            .map(|b| b.probability * b.value.to_dollars())
            .sum()
    }
}

fn probability_issues(path: &str, probabilities: &[f64], empty: bool) -> Vec<TreeIssue> {
    let mut issues = Vec::new();
    if empty {
        issues.push(TreeIssue {
            path: path.to_string(),
            kind: TreeIssueKind::EmptyChance,
        });
        return issues;
    }
    let mut all_sane = true;
    for &p in probabilities {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            all_sane = false;
            issues.push(TreeIssue {
                path: path.to_string(),
                kind: TreeIssueKind::BadProbability { probability: p },
            });
        }
    }
    if all_sane {
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            issues.push(TreeIssue {
                path: path.to_string(),
                kind: TreeIssueKind::ProbabilitySum {
                    sum,
                    residual: sum - 1.0,
                },
            });
        }
    }
    issues
}

/// The e-value: probability-weighted utility of the lottery's outcomes.
pub fn e_value(lottery: &OutcomeLottery, pref: &RiskPreference) -> Result<Utility, TreeError> {
    lottery.validate()?;
    let branches: Vec<(f64, Utility)> = lottery
        .branches
        .iter()
        .map(|b| (b.probability, u_transform(b.value, pref)))
        .collect();
    Ok(expected_utility(&branches, pref))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecisionTree {
    Decision(Vec<(String, DecisionTree)>),
    Chance(Vec<(f64, DecisionTree)>),
    Terminal(Money),
}

impl DecisionTree {
    pub fn from_lottery(lottery: &OutcomeLottery) -> DecisionTree {
        DecisionTree::Chance(
            lottery
                .branches
                .iter()
                .map(|b| (b.probability, DecisionTree::Terminal(b.value)))
                .collect(),
        )
    }

    /// Reports every structural problem with its node path; empty iff
    /// well-formed.
    pub fn validate(&self) -> Vec<TreeIssue> {
        let mut issues = Vec::new();
        self.collect_issues("root", &mut issues);
        issues
    }

    fn collect_issues(&self, path: &str, issues: &mut Vec<TreeIssue>) {
        match self {
            DecisionTree::Terminal(_) => {}
            DecisionTree::Decision(options) => {
                if options.is_empty() {
                    issues.push(TreeIssue {
                        path: path.to_string(),
                        kind: TreeIssueKind::EmptyDecision,
                    });
                }
                for (name, child) in options {
                    child.collect_issues(&format!("{path}/{name}"), issues);
                }
            }
            DecisionTree::Chance(branches) => {
                let probabilities: Vec<f64> = branches.iter().map(|(p, _)| *p).collect();
                issues.extend(probability_issues(path, &probabilities, branches.is_empty()));
                for (i, (_, child)) in branches.iter().enumerate() {
                    child.collect_issues(&format!("{path}/{i}"), issues);
                }
            }
        }
    }
}

/// Every node annotated with its expected utility and certain equivalent.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum AnnotatedNode {
    Terminal {
        value: Money,
        utility: f64,
        ce: Money,
    },
    Chance {
        utility: f64,
        ce: Money,
        branches: Vec<AnnotatedBranch>,
    },
    Decision {
        utility: f64,
        ce: Money,
        chosen: String,
        options: Vec<AnnotatedOption>,
    },
}

impl AnnotatedNode {
    pub fn utility(&self) -> f64 {
        match self {
            AnnotatedNode::Terminal { utility, .. }
            | AnnotatedNode::Chance { utility, .. }
            | AnnotatedNode::Decision { utility, .. } => *utility,
        }
    }

    pub fn ce(&self) -> Money {
        match self {
            AnnotatedNode::Terminal { ce, .. }
            | AnnotatedNode::Chance { ce, .. }
            | AnnotatedNode::Decision { ce, .. } => *ce,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatedBranch {
    pub probability: f64,
    #[serde(flatten)]
    pub node: AnnotatedNode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatedOption {
    pub name: String,
    #[serde(flatten)]
    pub node: AnnotatedNode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollbackReport {
    pub root: AnnotatedNode,
}

impl RollbackReport {
    pub fn root_ce(&self) -> Money {
        self.root.ce()
    }

    pub fn root_utility(&self) -> f64 {
        self.root.utility()
    }

    pub fn chosen(&self) -> Option<&str> {
        match &self.root {
            AnnotatedNode::Decision { chosen, .. } => Some(chosen),
            _ => None,
        }
    }
}

/// Rolls the tree back to the root: terminals transform, chance nodes take
/// e-values, decision nodes keep the max-CE child.
pub fn rollback(tree: &DecisionTree, pref: &RiskPreference) -> Result<RollbackReport, TreeError> {
    let issues = tree.validate();
    if !issues.is_empty() {
        return Err(TreeError::Invalid { issues });
    }
    let (root, _) = annotate(tree, pref)?;
    Ok(RollbackReport { root })
}

fn annotate(
    tree: &DecisionTree,
    pref: &RiskPreference,
) -> Result<(AnnotatedNode, Utility), TreeError> {
    match tree {
        DecisionTree::Terminal(value) => {
            let u = u_transform(*value, pref);
            let node = AnnotatedNode::Terminal {
                value: *value,
                utility: u.value(),
                ce: certain_equivalent(u, pref)?,
            };
            Ok((node, u))
        }
        DecisionTree::Chance(branches) => {
            let mut annotated = Vec::with_capacity(branches.len());
            let mut weighted = Vec::with_capacity(branches.len());
            for (p, child) in branches {
                let (node, u) = annotate(child, pref)?;
                weighted.push((*p, u));
                annotated.push(AnnotatedBranch {
                    probability: *p,
                    node,
                });
            }
            let u = expected_utility(&weighted, pref);
            let node = AnnotatedNode::Chance {
                utility: u.value(),
                ce: certain_equivalent(u, pref)?,
                branches: annotated,
            };
            Ok((node, u))
        }
        DecisionTree::Decision(options) => {
            let mut annotated = Vec::with_capacity(options.len());
            let mut utilities = Vec::with_capacity(options.len());
            for (name, child) in options {
                let (node, u) = annotate(child, pref)?;
                utilities.push(u);
                annotated.push(AnnotatedOption {
                    name: name.clone(),
                    node,
                });
            }
            let raw_ces: Vec<f64> = utilities.iter().map(|u| u.ce_dollars(pref)).collect();
            let best = raw_ces.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let chosen_index = raw_ces
                .iter()
                .position(|&ce| ce >= best - TIE_WINDOW_DOLLARS)
                .expect("decision node has at least one option");
            let u = utilities[chosen_index];
            let node = AnnotatedNode::Decision {
                utility: u.value(),
                ce: certain_equivalent(u, pref)?,
                chosen: annotated[chosen_index].name.clone(),
                options: annotated,
            };
            Ok((node, u))
        }
    }
}
