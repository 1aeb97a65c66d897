//! Task-selection policies: orderings of the broker's waiting queue.
//!
//! Each policy is a pure ordering over a queue snapshot. Keys:
//!
//! * `fcfs` — broker arrival time.
//! * `edf` — deadline, re-sorted every tick.
//! * `edd` — deadline frozen the first time a task is seen in the queue
//!   (the static counterpart of `edf`; the freeze memo is the one piece of
//!   policy state, owned by the engine).
//! * `efdf` — `edf` over the tasks whose best case still meets the deadline;
//!   infeasible tasks go last and are flagged.
//! * `cr` — critical ratio `(deadline − now) / best_case_processing`,
//!   ascending.
//! * `covert` — cost-over-time index, descending:
//!   `(1/p)·max(0, 1 − max(0, d − now − p) / (k·p))` with `p` the best-case
//!   processing time and `k` the look-ahead factor.
//! * `era` — three urgency buckets split on `slack / p` thresholds, FCFS
//!   inside a bucket.
//! * `pqm` — two classes; tasks with `slack ≤ factor·p` are critical and
//!   always precede non-critical ones (queue-position preemption only).
//!
//! Best-case processing assumes the fastest unit in the system and an empty
//! queue, so no feasibility screen rejects a task a fast unit could still
//! save. All ties break on (broker arrival, id) ascending, which makes every
//! ordering a deterministic function of the snapshot.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::TaskId;
use crate::error::{Error, Result};
use crate::time::Time;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TspKind {
    Fcfs,
    Edf,
    Edd,
    Efdf,
    Cr,
    Covert,
    Era,
    Pqm,
}

impl TspKind {
    pub const ALL: [TspKind; 8] = [
        TspKind::Fcfs,
        TspKind::Edf,
        TspKind::Edd,
        TspKind::Efdf,
        TspKind::Cr,
        TspKind::Covert,
        TspKind::Era,
        TspKind::Pqm,
    ];

    /// The six classical dispatching rules, excluding the two adapted
    /// priority-based schemes.
    pub const CLASSICAL: [TspKind; 6] = [
        TspKind::Fcfs,
        TspKind::Edf,
        TspKind::Edd,
        TspKind::Efdf,
        TspKind::Cr,
        TspKind::Covert,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TspKind::Fcfs => "fcfs",
            TspKind::Edf => "edf",
            TspKind::Edd => "edd",
            TspKind::Efdf => "efdf",
            TspKind::Cr => "cr",
            TspKind::Covert => "covert",
            TspKind::Era => "era",
            TspKind::Pqm => "pqm",
        }
    }
}

impl fmt::Display for TspKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TspKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<TspKind> {
        TspKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::parse("tsp policy", format!("unknown kind `{s}`")))
    }
}

/// A task-selection policy with its validated parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TspPolicy {
    pub kind: TspKind,
    /// COVERT look-ahead factor.
    pub covert_k: f64,
    /// ERA bucket thresholds on slack/processing: high below the first,
    /// medium below the second, low otherwise.
    pub era_thresholds: (f64, f64),
    /// PQM critical threshold: slack ≤ factor · best-case processing.
    pub pqm_factor: f64,
}

impl TspPolicy {
    pub fn new(kind: TspKind) -> TspPolicy {
        TspPolicy {
            kind,
            covert_k: 2.0,
            era_thresholds: (1.5, 3.0),
            pqm_factor: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.covert_k > 0.0) {
            return Err(Error::configuration("tsp", "covert look-ahead must be > 0"));
        }
        let (high, medium) = self.era_thresholds;
        if !(high > 0.0 && medium >= high) {
            return Err(Error::configuration("tsp", "era thresholds must satisfy 0 < high <= medium"));
        }
        if !(self.pqm_factor >= 0.0) {
            return Err(Error::configuration("tsp", "pqm factor must be >= 0"));
        }
        Ok(())
    }
}

/// What a policy sees of one queued task.
#[derive(Copy, Clone, Debug)]
pub struct QueuedTask {
    pub id: TaskId,
    pub broker_arrival: Time,
    pub deadline: Time,
    pub workload: f64,
}

/// Immutable snapshot of the waiting queue at one tick.
#[derive(Clone, Debug)]
pub struct QueueView {
    pub now: Time,
    pub tasks: Vec<QueuedTask>,
    /// Fastest unit rate in the system, for best-case feasibility.
    pub max_rate: f64,
}

impl QueueView {
    fn best_case_processing(&self, task: &QueuedTask) -> f64 {
        task.workload / self.max_rate
    }

    fn slack(&self, task: &QueuedTask) -> f64 {
        (task.deadline - self.now).as_f64()
    }
}

/// Per-run policy state. Only EDD keeps any: the deadline each task carried
/// when first enqueued.
#[derive(Clone, Debug, Default)]
pub struct TspRuntime {
    edd_frozen: HashMap<TaskId, Time>,
}

/// Result of one ordering pass: a permutation of the queued ids, plus the
/// EFDF infeasibility flags (always a suffix of `ids`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueueOrder {
    pub ids: Vec<TaskId>,
    pub infeasible: Vec<TaskId>,
}

fn tie_break(a: &QueuedTask, b: &QueuedTask) -> std::cmp::Ordering {
    (a.broker_arrival, a.id).cmp(&(b.broker_arrival, b.id))
}

fn sort_by_f64_key(tasks: &mut [&QueuedTask], key: impl Fn(&QueuedTask) -> f64) {
    tasks.sort_by(|a, b| key(a).total_cmp(&key(b)).then_with(|| tie_break(a, b)));
}

/// Orders the queue snapshot under `policy`. Identical `(policy, view)`
/// inputs always yield identical output.
pub fn order_queue(policy: &TspPolicy, runtime: &mut TspRuntime, view: &QueueView) -> QueueOrder {
    let mut tasks: Vec<&QueuedTask> = view.tasks.iter().collect();
    let mut infeasible = Vec::new();

    match policy.kind {
        TspKind::Fcfs => tasks.sort_by(|a, b| tie_break(a, b)),
        TspKind::Edf => {
            tasks.sort_by(|a, b| a.deadline.cmp(&b.deadline).then_with(|| tie_break(a, b)));
        }
        TspKind::Edd => {
            for t in &view.tasks {
                runtime.edd_frozen.entry(t.id).or_insert(t.deadline);
            }
            let frozen = &runtime.edd_frozen;
            tasks.sort_by(|a, b| frozen[&a.id].cmp(&frozen[&b.id]).then_with(|| tie_break(a, b)));
        }
        TspKind::Efdf => {
            let feasible = |t: &QueuedTask| {
                view.now.as_f64() + view.best_case_processing(t) <= t.deadline.as_f64()
            };
            let (mut ok, mut late): (Vec<&QueuedTask>, Vec<&QueuedTask>) =
                tasks.into_iter().partition(|t| feasible(t));
            ok.sort_by(|a, b| a.deadline.cmp(&b.deadline).then_with(|| tie_break(a, b)));
            late.sort_by(|a, b| a.deadline.cmp(&b.deadline).then_with(|| tie_break(a, b)));
            infeasible = late.iter().map(|t| t.id).collect();
            ok.extend(late);
            tasks = ok;
        }
        TspKind::Cr => {
            sort_by_f64_key(&mut tasks, |t| view.slack(t) / view.best_case_processing(t));
        }
        TspKind::Covert => {
            let k = policy.covert_k;
            let index = |t: &QueuedTask| {
                let p = view.best_case_processing(t);
                (1.0 / p) * f64::max(0.0, 1.0 - f64::max(0.0, view.slack(t) - p) / (k * p))
            };
            // Descending index; ties still ascend on (arrival, id).
            tasks.sort_by(|a, b| index(b).total_cmp(&index(a)).then_with(|| tie_break(a, b)));
        }
        TspKind::Era => {
            let (high, medium) = policy.era_thresholds;
            let bucket = |t: &QueuedTask| {
                let ratio = view.slack(t) / view.best_case_processing(t);
                if ratio < high {
                    0u8
                } else if ratio < medium {
                    1
                } else {
                    2
                }
            };
            tasks.sort_by(|a, b| bucket(a).cmp(&bucket(b)).then_with(|| tie_break(a, b)));
        }
        TspKind::Pqm => {
            let critical = |t: &QueuedTask| {
                let threshold = policy.pqm_factor * view.best_case_processing(t);
                view.slack(t) <= threshold
            };
            // Critical class first; FCFS inside each class.
            tasks.sort_by(|a, b| critical(b).cmp(&critical(a)).then_with(|| tie_break(a, b)));
        }
    }

    QueueOrder {
        ids: tasks.iter().map(|t| t.id).collect(),
        infeasible,
    }
}
