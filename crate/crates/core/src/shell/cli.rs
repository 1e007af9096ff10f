use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::{parse_config, parse_list};
use super::io::write_outputs;
use super::plot::plot_file;
use super::sweep::{run_sweep, SweepParam, SweepSpec, SUMMARY_FILE};
use crate::model::Scenario;
use crate::par::Execution;
use crate::propagator::{
    convergence_probe, run_simulation, run_with, MagneticMode, RunOptions, SimulationRecord,
};
use crate::{Error, Result};

const AFTER_HELP: &str = "\
Config files are `key = value` lines; `#` starts a comment. Times are in 1/Gamma,
rates and amplitudes in Gamma, phases and delta in radians. Defaults: sample_length_cm = 1,
gamma_mhz = 2.632 (Gamma = 4e-10 a.u.), zeeman levels of 87Rb
(a = F2 M0, b = F2 M-1, c = F2 M1 with g = 1/2; d = F1 M1 with g = -1/2),
rise = phase = 0, no magnetic stage, no release segment, no extra snapshots.
Set TRIPODSIM_THREADS to cap the number of worker threads of a sweep.";

#[derive(Debug, Parser)]
#[command(name = "tripodsim", version, about = "Light storage and release in a medium of tripod atoms", after_help = AFTER_HELP)]
pub struct Cli {
    /// Suppress the progress summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write boundary.csv, snapshots.ndjson and metrics.json.
    Run(RunArgs),
    /// Run a scenario for a list of parameter values and write summary.csv.
    Sweep(SweepArgs),
    /// Grid-convergence probe and invariant checks for one scenario.
    Check(CheckArgs),
    /// Render output files to SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// delta [rad], b_field [T] or control3_lead [us].
    #[arg(long)]
    pub param: SweepParam,
    /// Comma-separated parameter values.
    #[arg(long)]
    pub values: String,
    #[arg(long, default_value = "sweep")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Grid refinement factor of the convergence probe (1, 2 or 4).
    #[arg(long, default_value_t = 2)]
    pub refine: usize,
    /// Also write check.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Files written by `run` or `sweep`.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Directory for the SVG files (default: next to each input).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

fn item(name: &str, value: f64, limit: f64, pass: bool) -> CheckItem {
    CheckItem {
        name: name.into(),
        value,
        limit,
        pass,
    }
}

/// Largest deviation between the two magnetic-stage treatments, relative to
/// the exit peak and the stored coherence scale.
pub fn magnetic_mode_gap(full: &SimulationRecord, scenario: &Scenario) -> Result<f64> {
    let opts = RunOptions {
        execution: Execution::default(),
        magnetic: MagneticMode::PhaseKick,
    };
    let kick = run_with(scenario, opts, &|t| scenario.signal.evaluate(t))?;
    let peak = full.metrics.released_peak.max(f64::MIN_POSITIVE);
    let field = full
        .boundary_series
        .iter()
        .zip(&kick.boundary_series)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / peak;
    let scale = full.metrics.coherence_scale.max(f64::MIN_POSITIVE);
    let coh = match (full.snapshot("final"), kick.snapshot("final")) {
        (Some(a), Some(b)) => a
            .sigma
            .iter()
            .zip(&b.sigma)
            .map(|(x, y)| {
                (x.coh_bc - y.coh_bc)
                    .norm()
                    .max((x.coh_bd - y.coh_bd).norm())
            })
            .fold(0.0, f64::max),
        _ => 0.0,
    } / scale;
    Ok(field.max(coh))
}

/// Invariants of one scenario plus the convergence probe.
pub fn check_scenario(scenario: &Scenario, refine: usize) -> Result<Vec<CheckItem>> {
    let rec = run_simulation(scenario)?;
    let d = &rec.diagnostics;
    let mut items = vec![
        item(
            "trace drift",
            d.max_trace_drift,
            1e-6,
            d.max_trace_drift <= 1e-6,
        ),
        item(
            "min population",
            d.min_population,
            -1e-9,
            d.min_population >= -1e-9,
        ),
        item(
            "purity excess",
            d.max_purity - 1.0,
            1e-6,
            d.max_purity - 1.0 <= 1e-6,
        ),
        item(
            "coupling residual",
            d.max_coupling_residual,
            1e-9,
            d.max_coupling_residual <= 1e-9,
        ),
    ];
    if scenario.magnetic.is_some() {
        let gap = magnetic_mode_gap(&rec, scenario)?;
        items.push(item("magnetic full vs kick", gap, 1e-6, gap <= 1e-6));
    }
    let change = convergence_probe(scenario, refine)?;
    items.push(item(
        &format!("convergence x{refine}"),
        change,
        0.01,
        change <= 0.01,
    ));
    Ok(items)
}

fn print(quiet: bool, text: &str) {
    if !quiet {
        println!("{text}");
    }
}

fn run_summary(rec: &SimulationRecord) -> String {
    let m = &rec.metrics;
    let mut s = format!(
        "stored_fraction {:.4}  released_peak {:.6e} at tau {:.2}  group_delay {:.2}  z_peak {:.4e}",
        m.stored_fraction, m.released_peak, m.release_time, m.group_delay, m.z_peak
    );
    for w in &rec.warnings {
        let _ = write!(s, "\nwarning: {w}");
    }
    s
}

/// Executes a parsed command line. Returns whether all checks passed.
pub fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(a) => {
            let scenario = load(&a.config)?;
            let rec = run_simulation(&scenario)?;
            write_outputs(&rec, &a.out)?;
            print(cli.quiet, &run_summary(&rec));
            Ok(true)
        }
        Command::Sweep(a) => {
            let base = load(&a.config)?;
            let values = parse_list(&a.values).map_err(|v| Error::Malformed {
                key: "values".into(),
                value: v,
                expected: "a comma-separated list of numbers",
            })?;
            let spec = SweepSpec {
                parameter: a.param,
                values,
                base,
                outputs_dir: Some(a.out.clone()),
            };
            let summary = run_sweep(&spec, Execution::default())?;
            if !cli.quiet {
                println!("{} released_ratio z_ratio predicted", spec.parameter);
                for r in &summary.rows {
                    println!(
                        "{} {:.4} {:.4} {}",
                        r.value,
                        r.released_peak_ratio,
                        r.z_peak_ratio,
                        r.predicted_ratio.map_or("-".into(), |p| format!("{p:.4}"))
                    );
                }
                println!("wrote {}", a.out.join(SUMMARY_FILE).display());
            }
            Ok(true)
        }
        Command::Check(a) => {
            let scenario = load(&a.config)?;
            let items = check_scenario(&scenario, a.refine)?;
            for i in &items {
                print(
                    cli.quiet,
                    &format!(
                        "{} {}: {:e} (limit {:e})",
                        if i.pass { "PASS" } else { "FAIL" },
                        i.name,
                        i.value,
                        i.limit
                    ),
                );
            }
            if let Some(dir) = &a.out {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                let path = dir.join("check.json");
                std::fs::write(&path, serde_json::to_string_pretty(&items)? + "\n")
                    .map_err(|e| Error::io(&path, e))?;
            }
            Ok(items.iter().all(|i| i.pass))
        }
        Command::Plot(a) => {
            for f in &a.files {
                for p in plot_file(f, a.out.as_deref())? {
                    print(cli.quiet, &format!("wrote {}", p.display()));
                }
            }
            Ok(true)
        }
    }
}
