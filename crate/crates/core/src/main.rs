//! Command-line front end: validate scenarios, pin workloads, run single
//! cells, and drive full policy sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use edgesim::engine::{self, PoraMode};
use edgesim::error::{Error, Result};
use edgesim::metrics::{compute_tcr, csv_header, csv_row, CellKey, SweepRow};
use edgesim::scenario::{load_scenario, Scenario};
use edgesim::sweep::{run_sweep, write_outputs, SweepOptions};
use edgesim::workload::{generate, write_tasks_csv};

#[derive(Parser)]
#[command(name = "edgesim", version, about = "Edge offloading simulator and policy sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a scenario file.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Generate the scenario workload and write it as a CSV task set.
    GenWorkload {
        /// Scenario file; defaults apply when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one policy cell and print its completion rate.
    Run(RunArgs),
    /// Run the full policy sweep and write metrics.csv + summary.txt.
    Sweep {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Number of consecutive seeds (default from the scenario).
        #[arg(long)]
        seeds: Option<u32>,
        #[arg(long)]
        out: PathBuf,
        /// Enable per-tick assertions and report verification.
        #[arg(long)]
        debug: bool,
        /// Also write one event trace per run.
        #[arg(long)]
        traces: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory for metrics.csv (and trace.csv with --trace).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "edf")]
    tsp: String,
    #[arg(long, default_value = "sars")]
    rsp: String,
    /// on|off: reserve standby units and escalate to them.
    #[arg(long, default_value = "off")]
    pora: String,
    #[arg(long)]
    pora_k: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// plus|minus sign on the load term.
    #[arg(long)]
    beta_sign: Option<String>,
    #[arg(long)]
    covert_k: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-tick assertions plus report verification.
    #[arg(long)]
    debug: bool,
    /// Write the event trace.
    #[arg(long)]
    trace: bool,
}

fn load_or_default(path: &Option<PathBuf>) -> Result<Scenario> {
    match path {
        Some(p) => load_scenario(p),
        None => {
            let scenario = Scenario::default();
            scenario.validate()?;
            Ok(scenario)
        }
    }
}

fn parse_on_off(value: &str) -> Result<bool> {
    match value {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(Error::parse("pora", format!("expected on|off, got `{other}`"))),
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut scenario = load_or_default(&args.scenario)?;
    if let Some(beta) = args.beta {
        scenario.sweep.beta = beta;
    }
    if let Some(sign) = &args.beta_sign {
        scenario.sweep.beta_sign = sign.parse()?;
    }
    if let Some(k) = args.pora_k {
        scenario.sweep.pora_k = k;
    }
    if let Some(k) = args.covert_k {
        scenario.sweep.covert_k = k;
    }
    scenario.validate()?;

    let tsp = args.tsp.parse()?;
    let rsp = args.rsp.parse()?;
    let pora = parse_on_off(&args.pora)?;
    let alpha = args.alpha.unwrap_or_else(|| scenario.sweep.alpha[0]);
    let seed = args.seed.unwrap_or(scenario.seed);

    let mut config = scenario.engine_config(seed, tsp, rsp, pora, alpha)?;
    config.debug_checks = args.debug;
    let report = engine::run(config)?;
    let metrics = compute_tcr(&report);

    println!(
        "tsp={tsp} rsp={rsp} pora={} alpha={alpha} seed={seed} n_pt={}/{} tcr={:.4}",
        if pora { "on" } else { "off" },
        metrics.n_pt,
        metrics.total,
        metrics.tcr
    );
    for g in &metrics.groups {
        println!("  group {}: {}/{} tcr={:.4}", g.group, g.processed, g.total, g.tcr);
    }
    if report.pora.mode == PoraMode::On {
        let reserved: Vec<String> = report.reserved.iter().map(|p| p.to_string()).collect();
        println!("reserved units: {}", reserved.join(" "));
    }

    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        let row = SweepRow {
            cell: CellKey {
                tsp,
                rsp,
                pora,
                alpha,
                beta: scenario.sweep.beta,
                beta_sign: scenario.sweep.beta_sign,
            },
            seed,
            metrics,
            reserved: report.reserved.clone(),
        };
        std::fs::write(
            out.join("metrics.csv"),
            format!("{}\n{}\n", csv_header(), csv_row(&row)),
        )?;
        if args.trace {
            std::fs::write(out.join("trace.csv"), engine::trace_to_string(&report.events))?;
        }
    }
    Ok(())
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { scenario } => {
            let s = load_scenario(&scenario)?;
            println!(
                "ok: scenario `{}` ({} vehicles, {} servers, {} tasks, {} sweep cells)",
                s.name,
                s.vehicles,
                s.servers,
                s.plan(s.seed).total_tasks(),
                edgesim::sweep::enumerate_cells(&s).len(),
            );
            Ok(())
        }
        Command::GenWorkload { scenario, seed, out } => {
            let s = load_or_default(&scenario)?;
            let seed = seed.unwrap_or(s.seed);
            let generated = generate(&s.plan(seed))?;
            let file = std::fs::File::create(&out)?;
            write_tasks_csv(&generated.tasks, file)?;
            println!("wrote {} tasks to {}", generated.tasks.len(), out.display());
            Ok(())
        }
        Command::Run(args) => cmd_run(args),
        Command::Sweep {
            scenario,
            seeds,
            out,
            debug,
            traces,
        } => {
            let s = load_or_default(&scenario)?;
            let opts = SweepOptions {
                seeds,
                debug_checks: debug,
                trace_dir: traces.then(|| out.join("traces")),
            };
            let result = run_sweep(&s, &opts)?;
            write_outputs(&result, &out)?;
            print!("{}", result.summary_text);
            println!("wrote {} rows to {}", result.rows.len(), out.join("metrics.csv").display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
