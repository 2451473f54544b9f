//! `loraplan` - plan LoRaWAN gateway placements and validate them with a
//! packet-level uplink simulation.
//!
//! Subcommands: `plan` (solve one threshold), `sweep` (solve a threshold
//! range), `simulate` (packet delivery for a plan), `ingest-rt` (coverage
//! maps to a received-power CSV), `report` (CDF and summary tables).
//!
//! Exit codes: 0 success, 2 infeasible placement, 1 error.

// `!(x > 0.0)` validations are NaN-rejecting on purpose; `x <= 0.0` is not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use loraplan_core::channel::{ChannelConfig, ModelKind};
use loraplan_core::coverage::{build_alpha, threshold, GainMatrix};
use loraplan_core::placement::{
    avg_ed_best_power, solve_exact, solve_greedy, sweep_rho, PlacementSolution, PlanFile,
    SolverKind,
};
use loraplan_core::report::{cdf, write_cdf_csv, write_summary_csv, SummaryRow};
use loraplan_core::rt_ingest::build_alpha_from_maps;
use loraplan_core::scenario::{load_scenario, Scenario};
use loraplan_core::sim::{run_sim, PdrReport, TrafficConfig};

const EXIT_INFEASIBLE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "loraplan",
    version,
    about = "LoRaWAN gateway placement planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the minimum-gateway placement at one power threshold.
    Plan(PlanArgs),
    /// Solve the placement across a threshold range and tabulate it.
    Sweep(SweepArgs),
    /// Run the packet-level uplink simulation for a plan.
    Simulate(SimulateArgs),
    /// Convert a directory of coverage maps into a received-power CSV.
    IngestRt(IngestArgs),
    /// Emit received-power CDFs and a per-channel summary table.
    Report(ReportArgs),
}

/// Flags shared by the commands that build a received-power matrix.
#[derive(Args, Debug)]
struct SourceArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Channel model: log_distance, okumura_hata, cost231 or uma_3gpp.
    /// Mutually exclusive with --rt-dir.
    #[arg(long)]
    channel: Option<String>,
    /// Directory of per-candidate gain maps (gw_1.csv .. gw_P.csv).
    #[arg(long)]
    rt_dir: Option<PathBuf>,
    /// Transmit power in dBm embedded into the matrix.
    #[arg(long, allow_negative_numbers = true)]
    tx_power: Option<f64>,
    /// JSON config file; command-line flags win over its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Coverage threshold in dBm.
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Solver: exact or greedy.
    #[arg(long)]
    solver: Option<String>,
    /// Also write the received-power matrix as CSV (for `report`).
    #[arg(long)]
    alpha_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// First threshold of the sweep in dBm.
    #[arg(long, allow_negative_numbers = true)]
    rho_start: Option<f64>,
    /// Last threshold of the sweep in dBm (inclusive).
    #[arg(long, allow_negative_numbers = true)]
    rho_end: Option<f64>,
    /// Threshold increment in dB.
    #[arg(long, allow_negative_numbers = true)]
    rho_step: Option<f64>,
    /// Solver: exact or greedy.
    #[arg(long)]
    solver: Option<String>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Plan JSON produced by `plan`.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Received-power CSV to use instead of --channel/--rt-dir.
    #[arg(long)]
    alpha: Option<PathBuf>,
    /// Packets transmitted per end device.
    #[arg(long)]
    packets: Option<u64>,
    /// Spreading factor (7-12).
    #[arg(long)]
    sf: Option<u8>,
    /// Simulated duration in seconds.
    #[arg(long, allow_negative_numbers = true)]
    duration: Option<f64>,
    /// Traffic seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[command(flatten)]
    source: SourceArgs,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Received-power CSV; repeat once per evaluated channel.
    #[arg(long)]
    alpha: Vec<PathBuf>,
    /// Plan JSON paired positionally with --alpha.
    #[arg(long)]
    plan: Vec<PathBuf>,
    /// Simulation report JSON paired positionally with --alpha (optional).
    #[arg(long)]
    pdr: Vec<PathBuf>,
    /// Output directory for summary.csv and the CDF files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; command-line flags win over its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Config-file counterpart of the command line. Every entry is optional and
/// any flag given on the command line takes precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    scenario: Option<PathBuf>,
    channel: Option<ChannelConfig>,
    rt_dir: Option<PathBuf>,
    rho_dbm: Option<f64>,
    rho_start_dbm: Option<f64>,
    rho_end_dbm: Option<f64>,
    rho_step_db: Option<f64>,
    solver: Option<SolverKind>,
    tx_power_dbm: Option<f64>,
    traffic: Option<TrafficConfig>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))
            }
        }
    }
}

/// Where the received-power matrix comes from.
enum AlphaSource {
    Channel(ChannelConfig),
    RtDir(PathBuf),
    AlphaCsv(PathBuf),
}

impl AlphaSource {
    /// Applies the CLI-wins merge rule: when the command line names any
    /// source the config file's source entries are ignored entirely.
    fn resolve(
        cli_channel: Option<&str>,
        cli_rt_dir: Option<&Path>,
        cli_alpha: Option<&Path>,
        file: &FileConfig,
    ) -> Result<Self> {
        let cli_given = [
            cli_channel.is_some(),
            cli_rt_dir.is_some(),
            cli_alpha.is_some(),
        ];
        match cli_given.iter().filter(|g| **g).count() {
            0 => match (&file.channel, &file.rt_dir) {
                (Some(_), Some(_)) => {
                    bail!("config file sets both channel and rt_dir; they are mutually exclusive")
                }
                (Some(cfg), None) => Ok(AlphaSource::Channel(cfg.clone())),
                (None, Some(dir)) => Ok(AlphaSource::RtDir(dir.clone())),
                (None, None) => {
                    bail!("no channel source: give --channel, --rt-dir or a config file")
                }
            },
            1 => {
                if let Some(name) = cli_channel {
                    Ok(AlphaSource::Channel(ChannelConfig::new(
                        ModelKind::from_str(name)?,
                    )))
                } else if let Some(dir) = cli_rt_dir {
                    Ok(AlphaSource::RtDir(dir.to_path_buf()))
                } else {
                    Ok(AlphaSource::AlphaCsv(cli_alpha.unwrap().to_path_buf()))
                }
            }
            _ => bail!("--channel, --rt-dir and --alpha are mutually exclusive"),
        }
    }

    fn build(&self, scenario: &Scenario, tx_power_dbm: f64) -> Result<GainMatrix> {
        match self {
            AlphaSource::Channel(cfg) => Ok(build_alpha(scenario, cfg, tx_power_dbm)?),
            AlphaSource::RtDir(dir) => Ok(build_alpha_from_maps(dir, scenario, tx_power_dbm)?),
            AlphaSource::AlphaCsv(path) => Ok(GainMatrix::from_csv(path)?),
        }
    }
}

fn load_scenario_arg(cli: Option<&Path>, file: &FileConfig) -> Result<Scenario> {
    let path = cli
        .map(Path::to_path_buf)
        .or_else(|| file.scenario.clone())
        .ok_or_else(|| anyhow!("missing --scenario"))?;
    Ok(load_scenario(&path)?)
}

fn out_path(cli: Option<&Path>, file: &FileConfig) -> Result<PathBuf> {
    cli.map(Path::to_path_buf)
        .or_else(|| file.out.clone())
        .ok_or_else(|| anyhow!("missing --out"))
}

fn solver_arg(cli: Option<&str>, file: &FileConfig) -> Result<SolverKind> {
    match cli {
        Some(s) => Ok(SolverKind::from_str(s)?),
        None => Ok(file.solver.unwrap_or(SolverKind::Exact)),
    }
}

fn solve_with(solver: SolverKind, beta: &loraplan_core::CoverageMatrix) -> PlacementSolution {
    match solver {
        SolverKind::Exact => solve_exact(beta),
        SolverKind::Greedy => solve_greedy(beta),
    }
}

fn traffic_from(args: &SimulateArgs, file: &FileConfig) -> TrafficConfig {
    let mut traffic = file.traffic.clone().unwrap_or_default();
    if let Some(p) = args.packets {
        traffic.packets_per_ed = p;
    }
    if let Some(sf) = args.sf {
        traffic.sf = sf;
    }
    if let Some(d) = args.duration {
        traffic.duration_s = d;
    }
    if let Some(s) = args.seed.or(file.seed) {
        traffic.seed = s;
    }
    traffic
}

fn cmd_plan(args: &PlanArgs) -> Result<u8> {
    let file = FileConfig::load(args.source.config.as_deref())?;
    let scenario = load_scenario_arg(args.source.scenario.as_deref(), &file)?;
    let source = AlphaSource::resolve(
        args.source.channel.as_deref(),
        args.source.rt_dir.as_deref(),
        None,
        &file,
    )?;
    let tx_power = args.source.tx_power.or(file.tx_power_dbm).unwrap_or(0.0);
    let rho = args.rho.or(file.rho_dbm).unwrap_or(-90.0);
    let solver = solver_arg(args.solver.as_deref(), &file)?;
    let out = out_path(args.source.out.as_deref(), &file)?;

    let alpha = source.build(&scenario, tx_power)?;
    if let Some(alpha_out) = &args.alpha_out {
        alpha.to_csv(alpha_out)?;
    }
    let beta = threshold(&alpha, rho);
    let solution = solve_with(solver, &beta);
    let plan = PlanFile::new(rho, alpha.source.clone(), &solution);
    plan.write(&out)?;
    println!(
        "plan: status={} objective={} -> {}",
        solution.status.as_str(),
        solution.objective,
        out.display()
    );
    if solution.status.is_feasible() {
        Ok(0)
    } else {
        eprintln!(
            "infeasible at rho {} dBm: {} uncovered device(s)",
            rho,
            solution.uncovered.len()
        );
        Ok(EXIT_INFEASIBLE)
    }
}

fn cmd_sweep(args: &SweepArgs) -> Result<u8> {
    let file = FileConfig::load(args.source.config.as_deref())?;
    let scenario = load_scenario_arg(args.source.scenario.as_deref(), &file)?;
    let source = AlphaSource::resolve(
        args.source.channel.as_deref(),
        args.source.rt_dir.as_deref(),
        None,
        &file,
    )?;
    let tx_power = args.source.tx_power.or(file.tx_power_dbm).unwrap_or(0.0);
    let start = args.rho_start.or(file.rho_start_dbm).unwrap_or(-120.0);
    let end = args.rho_end.or(file.rho_end_dbm).unwrap_or(-80.0);
    let step = args.rho_step.or(file.rho_step_db).unwrap_or(5.0);
    if !(step > 0.0) {
        bail!("--rho-step must be > 0, got {step}");
    }
    if start > end {
        bail!("--rho-start {start} must not exceed --rho-end {end}");
    }
    let solver = solver_arg(args.solver.as_deref(), &file)?;
    let out = out_path(args.source.out.as_deref(), &file)?;

    let mut rhos = Vec::new();
    let mut k = 0u32;
    loop {
        let rho = start + step * k as f64;
        if rho > end + 1e-9 {
            break;
        }
        rhos.push(rho);
        k += 1;
    }
    let alpha = source.build(&scenario, tx_power)?;
    let report = sweep_rho(&alpha, &rhos, solver)?;
    report.to_csv(&out)?;
    println!(
        "sweep: {} thresholds -> {}",
        report.entries.len(),
        out.display()
    );
    Ok(0)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8> {
    let file = FileConfig::load(args.source.config.as_deref())?;
    let scenario = load_scenario_arg(args.source.scenario.as_deref(), &file)?;
    let plan_path = args
        .plan
        .as_ref()
        .ok_or_else(|| anyhow!("missing --plan"))?;
    let plan = PlanFile::read(plan_path)?;
    if !plan.status.is_feasible() {
        eprintln!(
            "plan {} is infeasible; nothing to simulate",
            plan_path.display()
        );
        return Ok(EXIT_INFEASIBLE);
    }
    let source = AlphaSource::resolve(
        args.source.channel.as_deref(),
        args.source.rt_dir.as_deref(),
        args.alpha.as_deref(),
        &file,
    )?;
    let tx_power = args.source.tx_power.or(file.tx_power_dbm).unwrap_or(0.0);
    let out = out_path(args.source.out.as_deref(), &file)?;
    let traffic = traffic_from(args, &file);

    let alpha = source.build(&scenario, tx_power)?;
    let report = run_sim(&scenario, &plan.to_solution(), &alpha, &traffic)?;
    report.write_json(&out)?;
    println!("simulate: pdr={} -> {}", report.pdr_overall, out.display());
    Ok(0)
}

fn cmd_ingest_rt(args: &IngestArgs) -> Result<u8> {
    let file = FileConfig::load(args.source.config.as_deref())?;
    let scenario = load_scenario_arg(args.source.scenario.as_deref(), &file)?;
    let dir = args
        .source
        .rt_dir
        .clone()
        .or_else(|| file.rt_dir.clone())
        .ok_or_else(|| anyhow!("missing --rt-dir"))?;
    if args.source.channel.is_some() {
        bail!("--channel and --rt-dir are mutually exclusive; ingest-rt reads maps only");
    }
    let tx_power = args.source.tx_power.or(file.tx_power_dbm).unwrap_or(0.0);
    let out = out_path(args.source.out.as_deref(), &file)?;

    let alpha = build_alpha_from_maps(&dir, &scenario, tx_power)?;
    alpha.to_csv(&out)?;
    println!(
        "ingest-rt: {}x{} matrix -> {}",
        alpha.num_eds(),
        alpha.num_candidates(),
        out.display()
    );
    Ok(0)
}

fn sanitize_label(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn cmd_report(args: &ReportArgs) -> Result<u8> {
    let file = FileConfig::load(args.config.as_deref())?;
    if args.alpha.is_empty() {
        bail!("report needs at least one --alpha/--plan pair");
    }
    if args.alpha.len() != args.plan.len() {
        bail!(
            "got {} --alpha but {} --plan; they pair positionally",
            args.alpha.len(),
            args.plan.len()
        );
    }
    if !args.pdr.is_empty() && args.pdr.len() != args.alpha.len() {
        bail!(
            "got {} --pdr for {} --alpha; give none or one per pair",
            args.pdr.len(),
            args.alpha.len()
        );
    }
    let out_dir = out_path(args.out.as_deref(), &file)?;
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let mut rows = Vec::new();
    for (i, (alpha_path, plan_path)) in args.alpha.iter().zip(&args.plan).enumerate() {
        let alpha = GainMatrix::from_csv(alpha_path)?;
        let plan = PlanFile::read(plan_path)?;
        if !plan.status.is_feasible() {
            bail!(
                "plan {} is infeasible; report needs feasible plans",
                plan_path.display()
            );
        }
        let solution = plan.to_solution();
        let best_powers: Vec<f64> = (0..alpha.num_eds())
            .map(|d| {
                solution
                    .selected
                    .iter()
                    .map(|&p| alpha.get(d, p - 1))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let points = cdf(&best_powers)?;
        let cdf_path = out_dir.join(format!(
            "cdf_{}_{}.csv",
            i + 1,
            sanitize_label(&plan.channel_source)
        ));
        write_cdf_csv(&points, &cdf_path)?;

        let avg_pdr = if args.pdr.is_empty() {
            None
        } else {
            Some(PdrReport::read_json(&args.pdr[i])?.pdr_overall)
        };
        rows.push(SummaryRow {
            channel: plan.channel_source.clone(),
            objective: plan.objective,
            avg_ed_best_power_dbm: avg_ed_best_power(&alpha, &solution)?,
            avg_pdr,
        });
    }
    let summary_path = out_dir.join("summary.csv");
    write_summary_csv(&rows, &summary_path)?;
    println!("report: {} rows -> {}", rows.len(), out_dir.display());
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::IngestRt(args) => cmd_ingest_rt(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
