use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use greenlight::catalog::builtin_profile;
use greenlight::money::Money;
use greenlight::report::{
    aligned_table, evaluate, render_csv, render_text, scenario_warnings, Report,
};
use greenlight::scenario::{parse_scenario, Scenario, BASELINE_NAME};
use greenlight::sensitivity::{
    breakeven_probability, crossover_probability, sweep, BlackSwanSpec, BreakevenSolution,
    SweepParameter, SweepResult,
};
use greenlight::tree::{e_value, LotteryBranch, OutcomeLottery};
use greenlight::utility::Utility;
use greenlight::value::{case_ordering_warnings, validate_reputation_profile};

#[derive(Parser)]
#[command(
    name = "greenlight",
    version,
    about = "Risk-adjusted go/no-go analysis for active network energy control"
)]
struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario: outcome tables, e-values, and the decision
    Evaluate { scenario: PathBuf },
    /// Solve the catastrophe probability at which an option stops paying
    Breakeven {
        scenario: PathBuf,
        /// Option under analysis; defaults to the [blackswan] target
        #[arg(long)]
        option: Option<String>,
    },
    /// Solve the catastrophe probability at which a rival takes over
    Crossover {
        scenario: PathBuf,
        /// Option under analysis; defaults to the [blackswan] target
        #[arg(long)]
        option: Option<String>,
        /// Rival option name, or "no-ennms" for the do-nothing baseline
        #[arg(long)]
        rival: String,
    },
    /// Re-evaluate the scenario across a parameter range
    Sweep {
        scenario: PathBuf,
        /// rho | rate_per_kwh | probability | reputation:<option>:<case>
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Logarithmic spacing (requires a positive range)
        #[arg(long)]
        log: bool,
    },
    /// Print the built-in reputation catalog and its anomalies
    Catalog,
    /// Parse and validate a scenario without evaluating it
    Check { scenario: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Exits 0 for --help/--version, 2 for usage errors.
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<String, String> {
    match cli.command {
        Command::Evaluate { scenario } => {
            let report = evaluate(&load(&scenario)?).map_err(|e| e.to_string())?;
            Ok(match cli.format {
                Format::Text => render_text(&report, use_bold()),
                Format::Json => to_json(&report),
                Format::Csv => render_csv(&report),
            })
        }
        Command::Breakeven { scenario, option } => {
            let scenario = load(&scenario)?;
            let report = evaluate(&scenario).map_err(|e| e.to_string())?;
            let (name, spec) = swan_spec(&scenario, &report, option.as_deref())?;
            let solution = breakeven_probability(&spec, &scenario.risk).map_err(|e| e.to_string())?;
            render_solution(cli.format, &scenario, &name, None, spec.catastrophe_value, solution)
        }
        Command::Crossover {
            scenario,
            option,
            rival,
        } => {
            let scenario = load(&scenario)?;
            let report = evaluate(&scenario).map_err(|e| e.to_string())?;
            let (name, spec) = swan_spec(&scenario, &report, option.as_deref())?;
            if rival == name {
                return Err(format!("rival must differ from the option under analysis ({name})"));
            }
            let rival_eu = if rival == BASELINE_NAME {
                Utility::ZERO
            } else {
                e_value(&rows_lottery(&report, &rival)?, &scenario.risk)
                    .map_err(|e| e.to_string())?
            };
            let solution = crossover_probability(&spec, rival_eu, &scenario.risk)
                .map_err(|e| e.to_string())?;
            render_solution(
                cli.format,
                &scenario,
                &name,
                Some(&rival),
                spec.catastrophe_value,
                solution,
            )
        }
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            steps,
            log,
        } => {
            let scenario = load(&scenario)?;
            let param = SweepParameter::parse(&param).map_err(|e| e.to_string())?;
            let result = sweep(&scenario, &param, from, to, steps, log).map_err(|e| e.to_string())?;
            Ok(match cli.format {
                Format::Text => render_sweep_text(&result, log),
                Format::Json => to_json(&result),
                Format::Csv => render_sweep_csv(&result),
            })
        }
        Command::Catalog => Ok(render_catalog(cli.format)),
        Command::Check { scenario: path } => {
            let scenario = load(&path)?;
            let warnings = scenario_warnings(&scenario);
            Ok(render_check(cli.format, &scenario, &warnings))
        }
    }
}

fn load(path: &Path) -> Result<Scenario, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_scenario(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn use_bold() -> bool {
    std::io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    s
}

/// The option's outcome lottery as evaluated: row values already include
/// energy, reputation, and extra costs.
fn rows_lottery(report: &Report, name: &str) -> Result<OutcomeLottery, String> {
    let opt = report
        .options
        .iter()
        .find(|o| o.name == name)
        .ok_or_else(|| format!("no option named {name:?}"))?;
    Ok(OutcomeLottery::new(
        opt.rows
            .iter()
            .map(|r| LotteryBranch {
                label: r.label.clone(),
                probability: r.probability,
                value: r.value,
            })
            .collect(),
    ))
}

fn swan_spec(
    scenario: &Scenario,
    report: &Report,
    option: Option<&str>,
) -> Result<(String, BlackSwanSpec), String> {
    let swan = scenario
        .black_swan
        .as_ref()
        .ok_or("scenario has no [blackswan] section")?;
    let name = option.unwrap_or(&swan.option).to_string();
    let base = rows_lottery(report, &name)?;
    Ok((
        name,
        BlackSwanSpec {
            base,
            catastrophe_value: swan.catastrophe,
        },
    ))
}

#[derive(Serialize)]
struct SolutionDoc<'a> {
    command: &'static str,
    scenario: &'a str,
    option: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    rival: Option<&'a str>,
    catastrophe: Money,
    solution: BreakevenSolution,
}

fn render_solution(
    format: Format,
    scenario: &Scenario,
    option: &str,
    rival: Option<&str>,
    catastrophe: Money,
    solution: BreakevenSolution,
) -> Result<String, String> {
    let symbol = if rival.is_some() { "px" } else { "p*" };
    Ok(match format {
        Format::Text => {
            let mut out = format!("option: {option}\n");
            if let Some(r) = rival {
                out.push_str(&format!("rival: {r}\n"));
            }
            out.push_str(&format!(
                "catastrophe: {catastrophe} (utility {:.8})\n",
                solution.catastrophe_utility
            ));
            out.push_str(&format!("base e-value: {:.8}\n", solution.base_e_value));
            out.push_str(&format!(
                "{symbol} = {:.4e} (closed form {:.4e})\n",
                solution.probability, solution.closed_form
            ));
            out
        }
        Format::Json => to_json(&SolutionDoc {
            command: if rival.is_some() { "crossover" } else { "breakeven" },
            scenario: &scenario.name,
            option,
            rival,
            catastrophe,
            solution,
        }),
        Format::Csv => format!(
            "probability,closed_form,base_e_value,catastrophe_utility\n{},{},{},{}\n",
            solution.probability,
            solution.closed_form,
            solution.base_e_value,
            solution.catastrophe_utility
        ),
    })
}

fn render_sweep_text(result: &SweepResult, log: bool) -> String {
    let mut rows = vec![vec![
        "value".to_string(),
        "certain equivalent".to_string(),
        "chosen".to_string(),
    ]];
    for s in &result.samples {
        rows.push(vec![
            s.value.to_string(),
            s.certain_equivalent.to_string(),
            s.chosen.clone(),
        ]);
    }
    format!(
        "sweep {} in {} steps{}\n{}",
        result.parameter,
        result.samples.len(),
        if log { " (log spacing)" } else { "" },
        aligned_table(&rows)
    )
}

fn render_sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("value,certain_equivalent,chosen\n");
    for s in &result.samples {
        out.push_str(&format!(
            "{},{},{}\n",
            s.value,
            s.certain_equivalent.to_plain_string(),
            s.chosen
        ));
    }
    out
}

fn render_catalog(format: Format) -> String {
    let profile = builtin_profile();
    let mut warnings: Vec<String> = validate_reputation_profile(profile)
        .iter()
        .map(ToString::to_string)
        .collect();
    warnings.extend(case_ordering_warnings(profile).iter().map(ToString::to_string));
    match format {
        Format::Text => {
            let mut rows = vec![vec![
                "technology".to_string(),
                "t (s)".to_string(),
                "best".to_string(),
                "average".to_string(),
                "worst".to_string(),
            ]];
            for e in profile.entries() {
                rows.push(vec![
                    e.technology.clone(),
                    e.time_scale.seconds().to_string(),
                    e.best.to_string(),
                    e.average.to_string(),
                    e.worst.to_string(),
                ]);
            }
            let mut out = aligned_table(&rows);
            if !warnings.is_empty() {
                out.push_str("\nwarnings:\n");
                for w in &warnings {
                    out.push_str(&format!("  - {w}\n"));
                }
            }
            out
        }
        Format::Json => {
            #[derive(Serialize)]
            struct CatalogDoc<'a> {
                entries: &'a [greenlight::value::ReputationEntry],
                warnings: Vec<String>,
            }
            to_json(&CatalogDoc {
                entries: profile.entries(),
                warnings,
            })
        }
        Format::Csv => {
            let mut out = String::from("technology,time_scale_seconds,best,average,worst\n");
            for e in profile.entries() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    if e.technology.contains(',') {
                        format!("\"{}\"", e.technology)
                    } else {
                        e.technology.clone()
                    },
                    e.time_scale.seconds(),
                    e.best.to_plain_string(),
                    e.average.to_plain_string(),
                    e.worst.to_plain_string()
                ));
            }
            out
        }
    }
}

fn render_check(format: Format, scenario: &Scenario, warnings: &[String]) -> String {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct CheckDoc<'a> {
                scenario: &'a str,
                options: usize,
                warnings: &'a [String],
            }
            to_json(&CheckDoc {
                scenario: &scenario.name,
                options: scenario.options.len(),
                warnings,
            })
        }
        Format::Csv => {
            let mut out = String::from("scenario,warning\n");
            for w in warnings {
                out.push_str(&format!(
                    "{},\"{}\"\n",
                    scenario.name,
                    w.replace('"', "\"\"")
                ));
            }
            out
        }
        Format::Text => {
            let mut out = format!("ok: {} ({} options)\n", scenario.name, scenario.options.len());
            if !warnings.is_empty() {
                out.push_str("warnings:\n");
                for w in warnings {
                    out.push_str(&format!("  - {w}\n"));
                }
            }
            out
        }
    }
}
