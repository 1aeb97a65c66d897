//! The experiment controller: policy sweeps over paired seeds.
//!
//! Every (task policy × resource policy × reservation × alpha × seed) cell is
//! one independent engine run; for a given seed the workload and topology are
//! identical across cells, so TCR differences isolate the policies. Cells run
//! in parallel (worker count overridable via `EDGESIM_WORKERS`) but results
//! are assembled in deterministic cell order, so rerunning a sweep reproduces
//! its outputs byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::engine;
use crate::error::{Error, Result};
use crate::metrics::{aggregate, compute_tcr, csv_header, csv_row, CellKey, CellSummary, SweepRow};
use crate::rsp::RspKind;
use crate::scenario::Scenario;
use crate::tsp::TspKind;

pub const WORKERS_ENV: &str = "EDGESIM_WORKERS";

/// One policy pairing to run.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub tsp: TspKind,
    pub rsp: RspKind,
    pub pora: bool,
    pub alpha: f64,
}

/// Expands the scenario's sweep lists. Baseline resource policies get a
/// single cell each (reservation and alpha only vary on sars cells).
pub fn enumerate_cells(scenario: &Scenario) -> Vec<Cell> {
    let sweep = &scenario.sweep;
    let default_alpha = sweep.alpha.first().copied().unwrap_or(1.0);
    let mut cells = Vec::new();
    for &tsp in &sweep.tsp {
        for &rsp in &sweep.rsp {
            if rsp == RspKind::Sars {
                for &pora in &sweep.pora {
                    for &alpha in &sweep.alpha {
                        cells.push(Cell { tsp, rsp, pora, alpha });
                    }
                }
            } else {
                cells.push(Cell {
                    tsp,
                    rsp,
                    pora: false,
                    alpha: default_alpha,
                });
            }
        }
    }
    cells
}

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    /// Override the scenario's seed count.
    pub seeds: Option<u32>,
    /// Run every engine with per-tick assertions and report verification.
    pub debug_checks: bool,
    /// Write one trace file per run into this directory.
    pub trace_dir: Option<PathBuf>,
}

pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<CellSummary>,
    pub csv: String,
    pub summary_text: String,
}

fn run_one(scenario: &Scenario, cell: &Cell, seed: u64, opts: &SweepOptions) -> Result<SweepRow> {
    let mut config = scenario.engine_config(seed, cell.tsp, cell.rsp, cell.pora, cell.alpha)?;
    config.debug_checks = opts.debug_checks;
    let report = engine::run(config)?;
    if let Some(dir) = &opts.trace_dir {
        let name = format!(
            "trace_{}_{}_{}_{}_{}.csv",
            cell.tsp,
            cell.rsp,
            if cell.pora { "on" } else { "off" },
            cell.alpha,
            seed
        );
        std::fs::write(dir.join(name), engine::trace_to_string(&report.events))?;
    }
    let metrics = compute_tcr(&report);
    Ok(SweepRow {
        cell: CellKey {
            tsp: cell.tsp,
            rsp: cell.rsp,
            pora: cell.pora,
            alpha: cell.alpha,
            beta: scenario.sweep.beta,
            beta_sign: scenario.sweep.beta_sign,
        },
        seed,
        metrics,
        reserved: report.reserved,
    })
}

/// Runs the full sweep. A failing cell aborts everything with the cell named.
pub fn run_sweep(scenario: &Scenario, opts: &SweepOptions) -> Result<SweepResult> {
    scenario.validate()?;
    if let Some(dir) = &opts.trace_dir {
        std::fs::create_dir_all(dir)?;
    }
    let seeds: Vec<u64> = {
        let n = opts.seeds.unwrap_or(scenario.seeds);
        (scenario.seed..scenario.seed + n as u64).collect()
    };
    let cells = enumerate_cells(scenario);
    let jobs: Vec<(Cell, u64)> = cells
        .iter()
        .flat_map(|c| seeds.iter().map(move |&s| (c.clone(), s)))
        .collect();

    let execute = || -> Result<Vec<SweepRow>> {
        jobs.par_iter()
            .map(|(cell, seed)| {
                run_one(scenario, cell, *seed, opts).map_err(|e| {
                    Error::configuration(
                        format!("cell {}/{} seed {seed}", cell.tsp, cell.rsp),
                        e.to_string(),
                    )
                })
            })
            .collect()
    };
    let rows = match workers_from_env() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::configuration("workers", e.to_string()))?
            .install(execute),
        None => execute(),
    }?;

    let mut csv = csv_header();
    csv.push('\n');
    for row in &rows {
        csv.push_str(&csv_row(row));
        csv.push('\n');
    }

    let summaries = aggregate(&rows);
    let summary_text = render_summary(scenario, &seeds, &summaries);
    Ok(SweepResult {
        rows,
        summaries,
        csv,
        summary_text,
    })
}

fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.parse().ok()
}

fn render_summary(scenario: &Scenario, seeds: &[u64], summaries: &[CellSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario {} | {} seeds from {} | tcr percent, population sd, delta = sars(off) mean - cell mean",
        scenario.name,
        seeds.len(),
        seeds.first().copied().unwrap_or(0),
    );
    let _ = writeln!(
        out,
        "{:<6} {:<19} {:<4} {:<6} {:>9} {:>8} {:>9} {:>9} {:>11}",
        "tsp", "rsp", "pora", "alpha", "mean_tcr", "sd", "min", "max", "sars_delta"
    );
    for s in summaries {
        let delta = s
            .delta_vs_sars
            .map(|d| format!("{d:+.4}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{:<6} {:<19} {:<4} {:<6} {:>9.4} {:>8.4} {:>9.4} {:>9.4} {:>11}",
            s.cell.tsp.to_string(),
            s.cell.rsp.to_string(),
            if s.cell.pora { "on" } else { "off" },
            s.cell.alpha,
            s.mean_tcr,
            s.sd_tcr,
            s.min_tcr,
            s.max_tcr,
            delta,
        );
    }
    out
}

/// Writes `metrics.csv` and `summary.txt` into `out_dir`.
pub fn write_outputs(result: &SweepResult, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("metrics.csv"), &result.csv)?;
    std::fs::write(out_dir.join("summary.txt"), &result.summary_text)?;
    Ok(())
}
