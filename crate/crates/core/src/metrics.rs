//! Task-completion-rate metrics and cross-run aggregation.

use serde::Serialize;

use crate::domain::{task_is_processed, InvalidReason, TaskState};
use crate::engine::SimulationReport;
use crate::rsp::{BetaSign, RspKind};
use crate::tsp::TspKind;

#[derive(Clone, Debug, Serialize)]
pub struct GroupMetrics {
    pub group: u8,
    pub total: u32,
    pub processed: u32,
    pub tcr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanDelays {
    pub transmission: f64,
    pub broker_queue: f64,
    pub processing: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct InvalidCounts {
    pub no_feasible_pu: u32,
    pub no_reserved_pu: u32,
    pub arrival_infeasible: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunMetrics {
    pub total: u32,
    /// Number of processed tasks: completed within their deadlines.
    pub n_pt: u32,
    /// Percent of tasks processed.
    pub tcr: f64,
    pub groups: Vec<GroupMetrics>,
    /// Averages over completed tasks (zeros when none completed).
    pub mean_delays: MeanDelays,
    pub invalid: InvalidCounts,
}

fn percent(part: u32, whole: u32) -> f64 {
    if whole == 0 {
        0.0
    } else {
        part as f64 / whole as f64 * 100.0
    }
}

/// Pure recount over a terminal report; idempotent.
pub fn compute_tcr(report: &SimulationReport) -> RunMetrics {
    let total = report.tasks.len() as u32;
    let n_pt = report.tasks.iter().filter(|t| task_is_processed(t)).count() as u32;

    let mut group_ids: Vec<u8> = report.tasks.iter().map(|t| t.group).collect();
    group_ids.sort_unstable();
    group_ids.dedup();
    let groups = group_ids
        .into_iter()
        .map(|g| {
            let members = report.tasks.iter().filter(|t| t.group == g);
            let total = members.clone().count() as u32;
            let processed = members.filter(|t| task_is_processed(t)).count() as u32;
            GroupMetrics {
                group: g,
                total,
                processed,
                tcr: percent(processed, total),
            }
        })
        .collect();

    let mut invalid = InvalidCounts::default();
    for t in &report.tasks {
        if t.state == TaskState::Invalid {
            match t.invalid_reason {
                Some(InvalidReason::NoFeasiblePu) => invalid.no_feasible_pu += 1,
                Some(InvalidReason::NoReservedPu) => invalid.no_reserved_pu += 1,
                Some(InvalidReason::ArrivalInfeasible) | None => invalid.arrival_infeasible += 1,
            }
        }
    }

    let completed: Vec<_> = report
        .tasks
        .iter()
        .filter(|t| t.state == TaskState::Completed)
        .collect();
    let mean = |f: &dyn Fn(&crate::domain::Task) -> f64| {
        if completed.is_empty() {
            0.0
        } else {
            completed.iter().map(|t| f(t)).sum::<f64>() / completed.len() as f64
        }
    };
    let mean_delays = MeanDelays {
        transmission: mean(&|t| t.transmission.unwrap().as_f64()),
        broker_queue: mean(&|t| (t.start.unwrap() - t.broker_arrival.unwrap()).as_f64()),
        processing: mean(&|t| t.processing.unwrap().as_f64()),
    };

    RunMetrics {
        total,
        n_pt,
        tcr: percent(n_pt, total),
        groups,
        mean_delays,
        invalid,
    }
}

// ── Sweep aggregation ───────────────────────────────────────────────────────

/// One experimental cell: a policy pairing with its weights.
#[derive(Clone, Debug, PartialEq)]
pub struct CellKey {
    pub tsp: TspKind,
    pub rsp: RspKind,
    pub pora: bool,
    pub alpha: f64,
    pub beta: f64,
    pub beta_sign: BetaSign,
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub cell: CellKey,
    pub seed: u64,
    pub metrics: RunMetrics,
    /// Units that spent this run on standby (empty with reservation off).
    pub reserved: Vec<crate::domain::PuId>,
}

/// Per-cell statistics across seeds. Standard deviation is the population
/// form (the seed set is fixed and finite, not a sample).
#[derive(Clone, Debug)]
pub struct CellSummary {
    pub cell: CellKey,
    pub runs: u32,
    pub mean_tcr: f64,
    pub sd_tcr: f64,
    pub min_tcr: f64,
    pub max_tcr: f64,
    /// Mean TCR of the matching-TSP sars cell (reservation off) minus this
    /// cell's mean; `None` for that reference cell itself or when absent.
    pub delta_vs_sars: Option<f64>,
}

pub fn population_sd(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Groups rows by cell (first-appearance order) and attaches the
/// sars-vs-baseline deltas.
pub fn aggregate(rows: &[SweepRow]) -> Vec<CellSummary> {
    let mut cells: Vec<(CellKey, Vec<f64>)> = Vec::new();
    for row in rows {
        match cells.iter_mut().find(|(key, _)| *key == row.cell) {
            Some((_, tcrs)) => tcrs.push(row.metrics.tcr),
            None => cells.push((row.cell.clone(), vec![row.metrics.tcr])),
        }
    }

    let mean_of = |values: &[f64]| values.iter().sum::<f64>() / values.len() as f64;
    let sars_reference = |tsp: TspKind| -> Option<f64> {
        cells
            .iter()
            .find(|(key, _)| key.tsp == tsp && key.rsp == RspKind::Sars && !key.pora)
            .map(|(_, tcrs)| mean_of(tcrs))
    };

    cells
        .iter()
        .map(|(key, tcrs)| {
            let mean_tcr = mean_of(tcrs);
            let is_reference = key.rsp == RspKind::Sars && !key.pora;
            CellSummary {
                cell: key.clone(),
                runs: tcrs.len() as u32,
                mean_tcr,
                sd_tcr: population_sd(tcrs),
                min_tcr: tcrs.iter().copied().fold(f64::INFINITY, f64::min),
                max_tcr: tcrs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                delta_vs_sars: if is_reference {
                    None
                } else {
                    sars_reference(key.tsp).map(|s| s - mean_tcr)
                },
            }
        })
        .collect()
}

/// Stable CSV column order for sweep exports.
pub const CSV_COLUMNS: [&str; 21] = [
    "tsp",
    "rsp",
    "pora",
    "alpha",
    "beta",
    "beta_sign",
    "seed",
    "total",
    "n_pt",
    "tcr",
    "tcr_g1",
    "tcr_g2",
    "tcr_g3",
    "tcr_g4",
    "invalid_no_feasible_pu",
    "invalid_no_reserved_pu",
    "invalid_arrival_infeasible",
    "mean_transmission",
    "mean_broker_queue",
    "mean_processing",
    "reserved_pus",
];

pub fn csv_header() -> String {
    CSV_COLUMNS.join(",")
}

pub fn csv_row(row: &SweepRow) -> String {
    let m = &row.metrics;
    let group_tcr = |g: u8| {
        m.groups
            .iter()
            .find(|gm| gm.group == g)
            .map(|gm| format!("{:.4}", gm.tcr))
            .unwrap_or_else(|| "".into())
    };
    let reserved = row
        .reserved
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "{},{},{},{},{},{},{},{},{},{:.4},{},{},{},{},{},{},{},{:.4},{:.4},{:.4},{}",
        row.cell.tsp,
        row.cell.rsp,
        if row.cell.pora { "on" } else { "off" },
        row.cell.alpha,
        row.cell.beta,
        row.cell.beta_sign,
        row.seed,
        m.total,
        m.n_pt,
        m.tcr,
        group_tcr(1),
        group_tcr(2),
        group_tcr(3),
        group_tcr(4),
        m.invalid.no_feasible_pu,
        m.invalid.no_reserved_pu,
        m.invalid.arrival_infeasible,
        m.mean_delays.transmission,
        m.mean_delays.broker_queue,
        m.mean_delays.processing,
        reserved,
    )
}
