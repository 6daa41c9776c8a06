//! Command-line front end: named unitaries, experiment sweeps, and report
//! rendering. All verdict math lives in the core crate; this crate only
//! wires arguments, config files, and output formats together.
//!
//! Exit codes: 0 on success, 1 when an experiment ran but an assertion or
//! runtime step failed, 2 for configuration errors (bad flags, bad config
//! keys, preconditions violated before any computation starts).

pub mod experiments;
pub mod registry;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use scramblab_core::analysis;
use scramblab_core::oto;

use experiments::EXPERIMENTS;
use registry::{build_unitary, config_err, run_err, CliError, UnitaryParams, OTO_CAP, UNITARIES};
use report::{sig12, Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "scramblab", version, about = "scrambling analysis for bipartite and multi-wire unitaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base seed for stochastic runs; per-trial streams are derived from it
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the report to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format; defaults to json for analyze/oto and csv for experiments
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// File of key=value lines that override command-line parameters
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Lift the built-in dimension caps
    #[arg(long, global = true)]
    unsafe_large: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a named unitary by its tripartite information
    Analyze(AnalyzeArgs),
    /// Run a named experiment sweep (see `list`)
    Experiment(ExperimentArgs),
    /// Out-of-time-order correlator report for a named unitary
    Oto(UnitaryArgs),
    /// List registered unitaries and experiments
    List,
}

#[derive(Args, Debug)]
struct UnitaryArgs {
    /// Registered unitary name
    #[arg(long)]
    unitary: String,

    /// Register dimension
    #[arg(long)]
    d: Option<usize>,

    /// Scrambler block size
    #[arg(long)]
    ds: Option<usize>,

    /// Straddling block size
    #[arg(long)]
    d0: Option<usize>,

    /// Number of wires
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    unitary: UnitaryArgs,

    /// Also extract the wire normal form when the verdict allows it
    #[arg(long)]
    extract: bool,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Experiment name (see `list`)
    name: String,

    /// Scrambler block size (prop2)
    #[arg(long)]
    ds: Option<usize>,

    /// Pass-through block size (prop4)
    #[arg(long)]
    d0: Option<usize>,

    /// Smallest register dimension in the sweep
    #[arg(long)]
    d_min: Option<usize>,

    /// Largest register dimension in the sweep
    #[arg(long)]
    d_max: Option<usize>,

    /// Register dimension (typicality)
    #[arg(long)]
    d: Option<usize>,

    /// Number of wires (typicality)
    #[arg(long)]
    n: Option<usize>,

    /// Number of random trials (typicality)
    #[arg(long)]
    trials: Option<usize>,

    /// Trace-distance threshold (typicality)
    #[arg(long)]
    epsilon: Option<f64>,

    /// Registered unitary name (redistribution)
    #[arg(long)]
    unitary: Option<String>,
}

/// Parse and run; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    if let Some(path) = cli.config.clone() {
        if let Err(e) = apply_config(&path, &mut cli) {
            eprintln!("{e}");
            return 2;
        }
    }
    let format = cli.format.unwrap_or(match cli.command {
        Command::Experiment(_) => Format::Csv,
        _ => Format::Json,
    });
    let result = match &cli.command {
        Command::Analyze(args) => run_analyze(args, cli.seed, cli.unsafe_large, format),
        Command::Experiment(args) => run_experiment(args, cli.seed, cli.unsafe_large, format),
        Command::Oto(args) => run_oto(args, cli.seed, cli.unsafe_large, format),
        Command::List => Ok((render_list(), Vec::new())),
    };
    match result {
        Ok((text, failures)) => {
            if let Err(e) = emit(&text, &cli.out) {
                eprintln!("{e}");
                return 1;
            }
            for f in &failures {
                eprintln!("assertion failed: {f}");
            }
            if failures.is_empty() {
                0
            } else {
                1
            }
        }
        Err(e @ CliError::Config(_)) => {
            eprintln!("{e}");
            2
        }
        Err(e @ CliError::Run(_)) => {
            eprintln!("{e}");
            1
        }
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            // SCRAMBLAB_OUT_DIR redirects relative output paths; absolute
            // paths are taken as given
            let path = match std::env::var_os("SCRAMBLAB_OUT_DIR") {
                Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
                _ => path.clone(),
            };
            std::fs::write(&path, text)
                .map_err(|e| CliError::Run(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(table: &Table, format: Format) -> (String, bool) {
    match format {
        Format::Csv => (table.to_csv(), !table.summary.is_empty()),
        Format::Json => (table.to_json(), false),
    }
}

fn run_experiment(
    args: &ExperimentArgs,
    seed: Option<u64>,
    unsafe_large: bool,
    format: Format,
) -> Result<(String, Vec<String>), CliError> {
    reject_stray_experiment_params(args)?;
    let (table, failures) = match args.name.as_str() {
        "prop2" => {
            let ds = args.ds.unwrap_or(3);
            let d_min = args.d_min.unwrap_or(ds.max(4));
            let d_max = args.d_max.unwrap_or(24);
            experiments::run_prop2(d_min, d_max, ds, unsafe_large)?
        }
        "prop4" => {
            let d0 = args.d0.unwrap_or(1);
            let d_min = args.d_min.unwrap_or(4);
            let d_max = args.d_max.unwrap_or(12);
            experiments::run_prop4(d_min, d_max, d0, unsafe_large)?
        }
        "renyi-gap" => {
            let d_min = args.d_min.unwrap_or(8);
            let d_max = args.d_max.unwrap_or(24);
            experiments::run_renyi_gap(d_min, d_max, unsafe_large)?
        }
        "typicality" => {
            let n = args.n.unwrap_or(4);
            let d = args.d.unwrap_or(5);
            let trials = args.trials.unwrap_or(200);
            let epsilon = args.epsilon.unwrap_or(1.0);
            experiments::run_typicality(n, d, trials, epsilon, seed, unsafe_large)?
        }
        "redistribution" => {
            let name = args
                .unitary
                .as_deref()
                .ok_or_else(|| config_err("redistribution requires --unitary"))?;
            let params = UnitaryParams {
                d: args.d,
                ds: args.ds,
                d0: args.d0,
                n: args.n,
                seed,
            };
            experiments::run_redistribution(name, &params, unsafe_large)?
        }
        other => {
            let names: Vec<&str> = EXPERIMENTS.iter().map(|(n, _, _)| *n).collect();
            return Err(config_err(format!(
                "unknown experiment {other}; available: {}",
                names.join(", ")
            )));
        }
    };
    let (text, echo_summary) = render(&table, format);
    if echo_summary {
        for (key, value) in &table.summary {
            eprintln!("summary {key} = {}", sig12(*value));
        }
    }
    Ok((text, failures))
}

fn reject_stray_experiment_params(args: &ExperimentArgs) -> Result<(), CliError> {
    let allowed: &[&str] = match args.name.as_str() {
        "prop2" => &["ds", "d-min", "d-max"],
        "prop4" => &["d0", "d-min", "d-max"],
        "renyi-gap" => &["d-min", "d-max"],
        "typicality" => &["n", "d", "trials", "epsilon"],
        "redistribution" => &["unitary", "d", "ds", "d0", "n"],
        _ => return Ok(()), // unknown name is reported by the dispatcher
    };
    let given: &[(&str, bool)] = &[
        ("ds", args.ds.is_some()),
        ("d0", args.d0.is_some()),
        ("d-min", args.d_min.is_some()),
        ("d-max", args.d_max.is_some()),
        ("d", args.d.is_some()),
        ("n", args.n.is_some()),
        ("trials", args.trials.is_some()),
        ("epsilon", args.epsilon.is_some()),
        ("unitary", args.unitary.is_some()),
    ];
    for (key, present) in given {
        if *present && !allowed.contains(key) {
            return Err(config_err(format!(
                "parameter {key} does not apply to {}",
                args.name
            )));
        }
    }
    Ok(())
}

fn run_analyze(
    args: &AnalyzeArgs,
    seed: Option<u64>,
    unsafe_large: bool,
    format: Format,
) -> Result<(String, Vec<String>), CliError> {
    let params = UnitaryParams {
        d: args.unitary.d,
        ds: args.unitary.ds,
        d0: args.unitary.d0,
        n: args.unitary.n,
        seed,
    };
    let u = build_unitary(&args.unitary.unitary, &params, unsafe_large)?;
    let bipartite = u.input().len() == 2 && u.output().len() == 2;
    let mut form_json = serde_json::Value::Null;
    let mut form_note: Option<String> = None;
    let verdict_json;
    let mut rows: Vec<(String, Cell)> = Vec::new();
    if bipartite {
        let verdict = analysis::classify(&u).map_err(run_err)?;
        if args.extract {
            match analysis::extract_crisscross(&u) {
                Ok(form) => {
                    form_json = serde_json::to_value(form.dump()).map_err(json_err)?;
                    form_note = Some("extracted".to_string());
                }
                Err(e) => form_note = Some(format!("error: {e}")),
            }
        }
        rows.push(("classification".into(), Cell::Text(format!("{:?}", verdict.classification).to_lowercase())));
        rows.push(("i3".into(), Cell::Num(verdict.i3)));
        for (key, value) in verdict.witnesses.values() {
            rows.push((key.clone(), Cell::Num(*value)));
        }
        verdict_json = serde_json::to_value(&verdict).map_err(json_err)?;
    } else {
        let verdict = analysis::classify_mimo(&u).map_err(run_err)?;
        if args.extract {
            match analysis::extract_mimo_factors(&u) {
                Ok(form) => {
                    form_json = serde_json::to_value(form.dump()).map_err(json_err)?;
                    form_note = Some("extracted".to_string());
                }
                Err(e) => form_note = Some(format!("error: {e}")),
            }
        }
        rows.push(("classification".into(), Cell::Text(format!("{:?}", verdict.global).to_lowercase())));
        for (i, row) in verdict.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                rows.push((format!("i3_A{}_C{}", i + 1, j + 1), Cell::Num(*v)));
            }
        }
        verdict_json = serde_json::to_value(&verdict).map_err(json_err)?;
    }
    let text = match format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("unitary".into(), serde_json::Value::String(args.unitary.unitary.clone()));
            obj.insert("verdict".into(), verdict_json);
            if args.extract {
                obj.insert("normal_form".into(), form_json);
                if let Some(note) = &form_note {
                    obj.insert("normal_form_status".into(), serde_json::Value::String(note.clone()));
                }
            }
            serde_json::to_string_pretty(&serde_json::Value::Object(obj)).map_err(json_err)? + "\n"
        }
        Format::Csv => {
            let mut table = Table::new("analyze", &["quantity", "value"]);
            for (key, cell) in rows {
                table.push(vec![Cell::Text(key), cell]);
            }
            if let Some(note) = &form_note {
                table.push(vec![Cell::Text("normal_form".into()), Cell::Text(note.clone())]);
            }
            table.to_csv()
        }
    };
    Ok((text, Vec::new()))
}

fn run_oto(
    args: &UnitaryArgs,
    seed: Option<u64>,
    unsafe_large: bool,
    format: Format,
) -> Result<(String, Vec<String>), CliError> {
    let params = UnitaryParams {
        d: args.d,
        ds: args.ds,
        d0: args.d0,
        n: args.n,
        seed,
    };
    let u = build_unitary(&args.unitary, &params, unsafe_large)?;
    if u.input().len() != 2 || u.output().len() != 2 {
        return Err(config_err("oto needs a two-register unitary"));
    }
    let widest = u.input().parts().iter().map(|p| p.dim).max().unwrap_or(1);
    if widest > OTO_CAP && !unsafe_large {
        return Err(config_err(format!(
            "oto register dimension {widest} exceeds the cap {OTO_CAP}; pass --unsafe-large to override"
        )));
    }
    let report = oto::oto_report(&u).map_err(run_err)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(json_err)? + "\n",
        Format::Csv => {
            let mut table =
                Table::new("oto", &["avg_ac", "avg_ad", "product", "i3_renyi2", "ratio"]);
            table.push(vec![
                Cell::Num(report.avg_ac),
                Cell::Num(report.avg_ad),
                Cell::Num(report.product),
                Cell::Num(report.i3_renyi2),
                Cell::Num(report.ratio),
            ]);
            table.to_csv()
        }
    };
    Ok((text, Vec::new()))
}

fn render_list() -> String {
    let mut out = String::from("unitaries:\n");
    for (name, params, desc) in UNITARIES {
        out.push_str(&format!("  {name:<14} {params:<24} {desc}\n"));
    }
    out.push_str("experiments:\n");
    for (name, params, desc) in EXPERIMENTS {
        out.push_str(&format!("  {name:<14} {params:<24} {desc}\n"));
    }
    out
}

fn json_err(e: serde_json::Error) -> CliError {
    CliError::Run(format!("report rendering failed: {e}"))
}

/// Apply `key=value` lines from `path` on top of the parsed arguments.
/// Blank lines and lines starting with `#` are skipped. Keys use the flag
/// spelling without the leading dashes; values win over the command line.
fn apply_config(path: &Path, cli: &mut Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(config_err(format!(
                "{}:{}: expected key=value",
                path.display(),
                lineno + 1
            )));
        };
        apply_key(cli, key.trim(), value.trim())?;
    }
    Ok(())
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| config_err(format!("invalid value {value:?} for config key {key}")))
}

fn apply_key(cli: &mut Cli, key: &str, value: &str) -> Result<(), CliError> {
    // global keys first, then the keys of the active subcommand
    match key {
        "seed" => {
            cli.seed = Some(parse_value(key, value)?);
            return Ok(());
        }
        "out" => {
            cli.out = Some(PathBuf::from(value));
            return Ok(());
        }
        "format" => {
            cli.format = Some(match value {
                "csv" => Format::Csv,
                "json" => Format::Json,
                _ => return Err(config_err(format!("invalid value {value:?} for config key format"))),
            });
            return Ok(());
        }
        "unsafe-large" => {
            cli.unsafe_large = parse_value(key, value)?;
            return Ok(());
        }
        _ => {}
    }
    let known = match &mut cli.command {
        Command::Analyze(args) => match key {
            "unitary" => {
                args.unitary.unitary = value.to_string();
                true
            }
            "d" => {
                args.unitary.d = Some(parse_value(key, value)?);
                true
            }
            "ds" => {
                args.unitary.ds = Some(parse_value(key, value)?);
                true
            }
            "d0" => {
                args.unitary.d0 = Some(parse_value(key, value)?);
                true
            }
            "n" => {
                args.unitary.n = Some(parse_value(key, value)?);
                true
            }
            "extract" => {
                args.extract = parse_value(key, value)?;
                true
            }
            _ => false,
        },
        Command::Oto(args) => match key {
            "unitary" => {
                args.unitary = value.to_string();
                true
            }
            "d" => {
                args.d = Some(parse_value(key, value)?);
                true
            }
            "ds" => {
                args.ds = Some(parse_value(key, value)?);
                true
            }
            "d0" => {
                args.d0 = Some(parse_value(key, value)?);
                true
            }
            "n" => {
                args.n = Some(parse_value(key, value)?);
                true
            }
            _ => false,
        },
        Command::Experiment(args) => match key {
            "ds" => {
                args.ds = Some(parse_value(key, value)?);
                true
            }
            "d0" => {
                args.d0 = Some(parse_value(key, value)?);
                true
            }
            "d-min" => {
                args.d_min = Some(parse_value(key, value)?);
                true
            }
            "d-max" => {
                args.d_max = Some(parse_value(key, value)?);
                true
            }
            "d" => {
                args.d = Some(parse_value(key, value)?);
                true
            }
            "n" => {
                args.n = Some(parse_value(key, value)?);
                true
            }
            "trials" => {
                args.trials = Some(parse_value(key, value)?);
                true
            }
            "epsilon" => {
                args.epsilon = Some(parse_value(key, value)?);
                true
            }
            "unitary" => {
                args.unitary = Some(value.to_string());
                true
            }
            _ => false,
        },
        Command::List => false,
    };
    if known {
        Ok(())
    } else {
        Err(config_err(format!(
            "config key {key} is unknown or does not apply to this subcommand"
        )))
    }
}
