//! Acceptance gate: one test per shipping criterion, each printing a
//! PASS line (visible with `cargo test --test acceptance -- --nocapture`).

use std::process::Command;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use greenlight::catalog::builtin_profile;
use greenlight::fixtures;
use greenlight::money::Money;
use greenlight::report::evaluate;
use greenlight::scenario::{parse_scenario, serialize_scenario};
use greenlight::sensitivity::{
    breakeven_probability, crossover_probability, BlackSwanSpec, CLOSED_FORM_TOLERANCE,
};
use greenlight::tree::{e_value, rollback, DecisionTree, LotteryBranch, OutcomeLottery};
use greenlight::utility::{certain_equivalent, u_transform, RiskPreference};
use greenlight::value::{validate_reputation_profile, OutcomeCase, ProfileWarning};

const BIN: &str = env!("CARGO_BIN_EXE_greenlight");
const ENTERPRISE_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/enterprise.scn");
const CARRIER_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/carrier.scn");

fn pass(n: usize, what: &str) {
    println!("PASS criterion {n}: {what}");
}

fn rho(dollars: i64) -> RiskPreference {
    RiskPreference::exponential(Money::dollars(dollars)).unwrap()
}

fn lottery(branches: &[(f64, Money)]) -> OutcomeLottery {
    OutcomeLottery::new(
        branches
            .iter()
            .enumerate()
            .map(|(i, &(p, v))| LotteryBranch {
                label: format!("b{i}"),
                probability: p,
                value: v,
            })
            .collect(),
    )
}

/// Carrier line-card option with its catastrophe, straight from the fixture
/// evaluation.
fn carrier_swan() -> (BlackSwanSpec, RiskPreference, OutcomeLottery) {
    let scenario = fixtures::carrier();
    let report = evaluate(&scenario).unwrap();
    let to_lottery = |idx: usize| {
        OutcomeLottery::new(
            report.options[idx]
                .rows
                .iter()
                .map(|r| LotteryBranch {
                    label: r.label.clone(),
                    probability: r.probability,
                    value: r.value,
                })
                .collect(),
        )
    };
    let spec = BlackSwanSpec {
        base: to_lottery(1),
        catastrophe_value: scenario.black_swan.as_ref().unwrap().catastrophe,
    };
    (spec, scenario.risk, to_lottery(0))
}

#[test]
fn c1_enterprise_u_values_within_1e6_and_under_a_second() {
    let started = Instant::now();
    let report = evaluate(&fixtures::enterprise()).unwrap();
    let elapsed = started.elapsed();

    let expected = [0.10428052, 0.07231589, -1.1488568];
    let rows = &report.options[0].rows;
    assert_eq!(rows.len(), 3);
    for (row, want) in rows.iter().zip(expected) {
        assert!(
            (row.utility - want).abs() <= 1e-6,
            "{}: computed {} vs published {}",
            row.label,
            row.utility,
            want
        );
    }
    assert!(elapsed.as_secs_f64() < 1.0, "evaluation took {elapsed:?}");
    pass(1, "enterprise outcome u-values match published table to 1e-6, well under 1 s");
}

#[test]
fn c2_carrier_u_values_within_1e6_and_tolerance_conflict_documented() {
    let report = evaluate(&fixtures::carrier()).unwrap();
    let ms = &report.options[0];
    let card = &report.options[1];
    let got = [
        ms.rows[0].utility,
        ms.rows[1].utility,
        ms.rows[2].utility,
        card.rows[0].utility,
        card.rows[1].utility,
        card.black_swan.as_ref().unwrap().catastrophe_utility,
    ];
    let published = [
        0.01015843,
        0.01005431,
        0.01010637,
        0.01133685,
        0.01041261,
        -1.7182818,
    ];
    for (g, w) in got.iter().zip(published) {
        assert!((g - w).abs() <= 1e-6, "computed {g} vs published {w}");
    }
    // The published caption says one tolerance, the figures another; the
    // fixture documents the conflict and encodes the value the figures need.
    assert!(fixtures::CARRIER_SCN.contains("$500,000"));
    assert!(fixtures::CARRIER_SCN.contains("$5,000,000"));
    assert_eq!(
        fixtures::carrier().risk,
        RiskPreference::Exponential {
            rho: Money::dollars(5_000_000)
        }
    );
    pass(2, "carrier u-values match published table to 1e-6; tolerance conflict documented");
}

#[test]
fn c3_enterprise_deploys_with_positive_certain_equivalent() {
    let report = evaluate(&fixtures::enterprise()).unwrap();
    let ce = report.decision.certain_equivalent;
    assert!(ce.is_positive());
    assert!(
        (ce.to_dollars() - 4_859.01).abs() <= 0.05,
        "certain equivalent {ce}"
    );
    assert_eq!(report.decision.chosen, "deploy");
    pass(3, "enterprise certain equivalent $4,859.01 +/- $0.05, deploy chosen over baseline");
}

#[test]
fn c4_annual_energy_costs_exact_to_the_cent() {
    let enterprise = evaluate(&fixtures::enterprise()).unwrap();
    assert_eq!(enterprise.annual_energy_cost, Money::dollars(26_298));
    let carrier = evaluate(&fixtures::carrier()).unwrap();
    assert_eq!(carrier.annual_energy_cost, Money::dollars(70_080));
    pass(4, "annual energy costs $26,298 and $70,080 reproduced exactly");
}

#[test]
fn c5_breakeven_and_crossover_match_oracles_and_brute_force() {
    let (spec, pref, rival_lottery) = carrier_swan();

    let breakeven = breakeven_probability(&spec, &pref).unwrap();
    assert!(
        (breakeven.probability - 6.1562e-3).abs() <= 1e-7,
        "p* = {}",
        breakeven.probability
    );
    assert!((breakeven.probability - breakeven.closed_form).abs() <= CLOSED_FORM_TOLERANCE);

    let rival = e_value(&rival_lottery, &pref).unwrap();
    let crossover = crossover_probability(&spec, rival, &pref).unwrap();
    assert!(
        (crossover.probability - 3.2432e-4).abs() <= 1e-7,
        "px = {}",
        crossover.probability
    );
    assert!((crossover.probability - crossover.closed_form).abs() <= CLOSED_FORM_TOLERANCE);

    // The published sample quotes 4.6e-6 and 2.3e-7 for these two solutions.
    // Neither follows from the published outcome tables; both derivable
    // answers sit orders of magnitude higher, and the fixture says so.
    assert!(breakeven.probability > 100.0 * 4.6e-6);
    assert!(crossover.probability > 100.0 * 2.3e-7);
    assert!(fixtures::CARRIER_SCN.contains("4.6e-6"));
    assert!(fixtures::CARRIER_SCN.contains("2.3e-7"));

    // Brute force: a million-point grid over p must bracket both roots in
    // the same place the solver found them, with no other sign change.
    let n = 1_000_000u32;
    let mut prev_ce = e_value(&spec.composed_lottery(0.0).unwrap(), &pref)
        .unwrap()
        .scaled();
    let mut prev_gap = prev_ce - rival.scaled();
    let mut ce_bracket = None;
    let mut gap_bracket = None;
    for i in 1..=n {
        let p = f64::from(i) / f64::from(n);
        let eu = e_value(&spec.composed_lottery(p).unwrap(), &pref).unwrap();
        let ce = eu.scaled();
        let gap = ce - rival.scaled();
        if prev_ce >= 0.0 && ce < 0.0 {
            assert!(ce_bracket.is_none(), "second certain-equivalent sign change at p = {p}");
            ce_bracket = Some((f64::from(i - 1) / f64::from(n), p));
        }
        if prev_gap >= 0.0 && gap < 0.0 {
            assert!(gap_bracket.is_none(), "second crossover sign change at p = {p}");
            gap_bracket = Some((f64::from(i - 1) / f64::from(n), p));
        }
        prev_ce = ce;
        prev_gap = gap;
    }
    let (lo, hi) = ce_bracket.expect("grid scan found the breakeven bracket");
    assert!(
        lo <= breakeven.probability && breakeven.probability <= hi,
        "p* = {} outside grid bracket [{lo}, {hi}]",
        breakeven.probability
    );
    let (lo, hi) = gap_bracket.expect("grid scan found the crossover bracket");
    assert!(
        lo <= crossover.probability && crossover.probability <= hi,
        "px = {} outside grid bracket [{lo}, {hi}]",
        crossover.probability
    );
    pass(5, "breakeven 6.1562e-3 and crossover 3.2432e-4 confirmed by closed form and 1e6-point scan");
}

#[test]
fn c6_utility_property_suite() {
    let mut rng = StdRng::seed_from_u64(0x6e5e_ed01);

    let random_lottery = |rng: &mut StdRng, lo_cents: i64, hi_cents: i64| {
        let n = rng.gen_range(1..=4);
        let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0f64)).collect();
        let total: f64 = weights.iter().sum();
        lottery(
            &weights
                .iter()
                .map(|w| (w / total, Money::from_cents(rng.gen_range(lo_cents..=hi_cents))))
                .collect::<Vec<_>>(),
        )
    };
    let random_rho = |rng: &mut StdRng| {
        // Log-uniform over [$1k, $1B].
        let exp = rng.gen_range(3.0..9.0f64);
        RiskPreference::exponential(Money::from_dollars(10f64.powf(exp)).unwrap()).unwrap()
    };

    // Delta property: shifting every outcome by a constant shifts the
    // certain equivalent by the same constant, within a cent.
    for _ in 0..1_000 {
        let pref = random_rho(&mut rng);
        let base = random_lottery(&mut rng, -100_000_000, 100_000_000);
        let delta = Money::from_cents(rng.gen_range(-10_000_000i64..=10_000_000));
        let shifted = OutcomeLottery::new(
            base.branches
                .iter()
                .map(|b| LotteryBranch {
                    label: b.label.clone(),
                    probability: b.probability,
                    value: b.value.checked_add(delta).unwrap(),
                })
                .collect(),
        );
        let ce = certain_equivalent(e_value(&base, &pref).unwrap(), &pref).unwrap();
        let ce_shifted = certain_equivalent(e_value(&shifted, &pref).unwrap(), &pref).unwrap();
        let drift = ce_shifted
            .checked_sub(ce)
            .unwrap()
            .checked_sub(delta)
            .unwrap();
        assert!(drift.cents().abs() <= 1, "delta drift {drift} ({pref:?})");
    }

    // u/CE round-trip within a cent across the contract range.
    for _ in 0..1_000 {
        let pref = random_rho(&mut rng);
        let v = Money::from_cents(rng.gen_range(-10_000_000_000i64..=10_000_000_000));
        let back = certain_equivalent(u_transform(v, &pref), &pref).unwrap();
        let err = back.checked_sub(v).unwrap();
        assert!(err.cents().abs() <= 1, "round-trip {v} -> {back} ({pref:?})");
    }

    // Risk-neutral limit: at rho = 1e12 the enterprise deploy option's CE is
    // the published expected value.
    let mut neutralish = fixtures::enterprise();
    neutralish.risk =
        RiskPreference::exponential(Money::dollars(1_000_000_000_000)).unwrap();
    let report = evaluate(&neutralish).unwrap();
    let ce = report.options[0].certain_equivalent.to_dollars();
    assert!((ce - 10_457.50).abs() <= 0.01, "near-neutral CE {ce}");
    let mut neutral = fixtures::enterprise();
    neutral.risk = RiskPreference::Neutral;
    let ev = evaluate(&neutral).unwrap().options[0]
        .certain_equivalent
        .to_dollars();
    assert!((ev - 10_457.50).abs() <= 0.01, "neutral EV {ev}");

    // Certain equivalent is nondecreasing in rho.
    for _ in 0..200 {
        let base = random_lottery(&mut rng, -20_000_000, 20_000_000);
        let mut exps: Vec<f64> = (0..6).map(|_| rng.gen_range(3.0..9.0f64)).collect();
        exps.sort_by(f64::total_cmp);
        let mut prev = None;
        for exp in exps {
            let pref =
                RiskPreference::exponential(Money::from_dollars(10f64.powf(exp)).unwrap()).unwrap();
            let ce = certain_equivalent(e_value(&base, &pref).unwrap(), &pref).unwrap();
            if let Some(prev) = prev {
                assert!(
                    ce.cents() >= prev - 1,
                    "CE fell from {prev} to {} cents as rho rose",
                    ce.cents()
                );
            }
            prev = Some(ce.cents());
        }
    }

    // Collapsing a chance node of chance nodes into one lottery leaves the
    // e-value unchanged to 1e-12.
    let pref = rho(250_000);
    for _ in 0..200 {
        let outer_n = rng.gen_range(2..=3);
        let outer_weights: Vec<f64> = (0..outer_n).map(|_| rng.gen_range(0.01..1.0f64)).collect();
        let outer_total: f64 = outer_weights.iter().sum();
        let mut nested = Vec::new();
        let mut flat = Vec::new();
        for w in &outer_weights {
            let p = w / outer_total;
            let inner = random_lottery(&mut rng, -20_000_000, 20_000_000);
            nested.push((p, DecisionTree::from_lottery(&inner)));
            for b in &inner.branches {
                flat.push((p * b.probability, b.value));
            }
        }
        let nested_u = rollback(&DecisionTree::Chance(nested), &pref)
            .unwrap()
            .root_utility();
        let flat_u = e_value(&lottery(&flat), &pref).unwrap().value();
        assert!(
            (nested_u - flat_u).abs() <= 1e-12,
            "collapse changed e-value by {}",
            (nested_u - flat_u).abs()
        );
    }

    // Positive scaling of every u-value never changes the argmax.
    let argmax = |xs: &[f64]| {
        let mut best = 0;
        for (i, x) in xs.iter().enumerate() {
            if *x > xs[best] {
                best = i;
            }
        }
        best
    };
    for _ in 0..200 {
        let pref = random_rho(&mut rng);
        let k = rng.gen_range(2..=5);
        let us: Vec<f64> = (0..k)
            .map(|_| {
                e_value(&random_lottery(&mut rng, -20_000_000, 20_000_000), &pref)
                    .unwrap()
                    .value()
            })
            .collect();
        let baseline = argmax(&us);
        for c in [1e-9, 0.5, 1.0, 3.0, 1e9] {
            let scaled: Vec<f64> = us.iter().map(|u| c * u).collect();
            assert_eq!(argmax(&scaled), baseline, "argmax moved under scale {c}");
        }
    }

    pass(6, "delta, round-trip, risk-neutral limit, rho monotonicity, chance collapse, argmax invariance");
}

#[test]
fn c7_builtin_catalog_verbatim_with_exactly_two_warnings() {
    let expected: [(&str, f64, i64, i64, i64); 8] = [
        ("realtime", 1e-6, 0, 0, 0),
        ("802.3az", 1e-3, 50_000, 50_000, 50_000),
        ("Energy TE", 1e-1, 50_000, 40_000, 50_000),
        ("TE /link", 1e0, 40_000, 10_000, 0),
        ("TE /plane", 1e1, 20_000, -10_000, -50_000),
        ("TE /PIC", 5e1, 30_000, -10_000, -100_000),
        ("TE /card", 5e2, 50_000, -20_000, -10_000_000),
        ("TE /node", 1e3, -100_000, -100_000, -50_000_000),
    ];
    let profile = builtin_profile();
    assert_eq!(profile.entries().len(), expected.len());
    for (entry, (tech, t, best, average, worst)) in profile.entries().iter().zip(expected) {
        assert_eq!(entry.technology, tech);
        assert_eq!(entry.time_scale.seconds(), t);
        assert_eq!(entry.best, Money::dollars(best), "{tech} best");
        assert_eq!(entry.average, Money::dollars(average), "{tech} average");
        assert_eq!(entry.worst, Money::dollars(worst), "{tech} worst");
    }

    let warnings = validate_reputation_profile(profile);
    assert_eq!(warnings.len(), 2, "{warnings:?}");
    let details: Vec<(OutcomeCase, &str, &str)> = warnings
        .iter()
        .map(|w| match w {
            ProfileWarning::ReputationRise {
                case,
                from_technology,
                to_technology,
                ..
            } => (*case, from_technology.as_str(), to_technology.as_str()),
            other => panic!("unexpected warning {other:?}"),
        })
        .collect();
    assert_eq!(
        details,
        [
            (OutcomeCase::Best, "TE /plane", "TE /PIC"),
            (OutcomeCase::Best, "TE /PIC", "TE /card"),
        ]
    );
    pass(7, "catalog loads verbatim; exactly two rise warnings, both in the best column");
}

#[test]
fn c8_cli_contract() {
    let run = |args: &[&str]| {
        Command::new(BIN)
            .args(args)
            .env("NO_COLOR", "1")
            .output()
            .expect("binary runs")
    };

    let ok = run(&["evaluate", ENTERPRISE_PATH]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("decision: deploy"));

    let missing = run(&["evaluate", "missing.scn"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.scn"));

    let usage = run(&["evaluate", ENTERPRISE_PATH, "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(2));

    // JSON output is byte-identical run to run.
    let a = run(&["evaluate", CARRIER_PATH, "--format", "json"]);
    let b = run(&["evaluate", CARRIER_PATH, "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);

    // Scenario round-trip: parse -> serialize -> parse is the identity.
    for text in [fixtures::ENTERPRISE_SCN, fixtures::CARRIER_SCN] {
        let first = parse_scenario(text).unwrap();
        let second = parse_scenario(&serialize_scenario(&first)).unwrap();
        assert_eq!(first, second);
    }
    pass(8, "exit codes 0/1/2, byte-identical JSON, scenario round-trip identity");
}
