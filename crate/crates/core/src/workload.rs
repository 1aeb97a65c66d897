//! Seeded workload generation.
//!
//! Four task groups with distinct release/deadline tightness are drawn from a
//! ChaCha8 stream cipher RNG. Reproducibility contract:
//!
//! * group `g` draws from stream `g` (streams 1–4) of the scenario seed, so
//!   adding or resizing one group never perturbs another;
//! * per task the draw order is fixed: release, workload, size, deadline
//!   slack, each `gen_range` over the inclusive f64 range;
//! * release and slack are quantized to the 0.001 grid, workload is rounded
//!   to 0.1 MI, file size is kept as drawn.
//!
//! Deadlines are `release + workload + slack`, computed on the grid so the
//! identity holds exactly in every export.

use std::io::{Read, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Task, TaskId};
use crate::error::{Error, Result};
use crate::time::Time;

/// RNG stream ids reserved per purpose; keep in sync with `scenario`.
pub const STREAM_TOPOLOGY: u64 = 0;
pub const STREAM_GROUP_BASE: u64 = 0; // group g uses stream g (1..=4)
pub const STREAM_RESERVATION: u64 = 5;
pub const STREAM_RANDOM_POLICY: u64 = 6;

/// One row of the task-attribute table: inclusive ranges for each drawn
/// attribute plus the number of tasks in the group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub group: u8,
    /// Release time range, time units.
    pub release: (f64, f64),
    /// Deadline slack range, time units; deadline = release + workload + slack.
    pub slack: (f64, f64),
    /// Workload range, million instructions.
    pub workload: (f64, f64),
    /// File size range, kilobytes.
    pub size: (f64, f64),
    pub count: u32,
}

impl GroupSpec {
    fn validate(&self) -> Result<()> {
        let entity = format!("group {}", self.group);
        for (name, (lo, hi)) in [
            ("release", self.release),
            ("slack", self.slack),
            ("workload", self.workload),
            ("size", self.size),
        ] {
            if !(lo >= 0.0 && hi >= lo) {
                return Err(Error::configuration(&entity, format!("bad {name} range")));
            }
        }
        if !(self.workload.0 > 0.0) {
            return Err(Error::configuration(&entity, "workload range must be positive"));
        }
        if !(self.size.0 > 0.0) {
            return Err(Error::configuration(&entity, "size range must be positive"));
        }
        if self.count == 0 {
            return Err(Error::configuration(&entity, "count must be > 0"));
        }
        Ok(())
    }
}

/// A full generation plan: the group table, the seed, and how many vehicles
/// tasks are spread over (round-robin by task id).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorkloadPlan {
    pub groups: Vec<GroupSpec>,
    pub seed: u64,
    pub vehicles: u32,
}

impl WorkloadPlan {
    /// The default four-group plan: 200 tasks per group, tight/loose release
    /// windows of 40/70 units crossed with tight/loose slack of 10/20 units,
    /// workloads 1–10 MI and sizes 1–5 KB everywhere.
    pub fn default_plan(seed: u64, vehicles: u32) -> Self {
        let row = |group, release_hi, slack_hi| GroupSpec {
            group,
            release: (0.0, release_hi),
            slack: (1.0, slack_hi),
            workload: (1.0, 10.0),
            size: (1.0, 5.0),
            count: 200,
        };
        WorkloadPlan {
            groups: vec![
                row(1, 40.0, 10.0),
                row(2, 70.0, 10.0),
                row(3, 40.0, 20.0),
                row(4, 70.0, 20.0),
            ],
            seed,
            vehicles,
        }
    }

    pub fn total_tasks(&self) -> u32 {
        self.groups.iter().map(|g| g.count).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.vehicles == 0 {
            return Err(Error::configuration("plan", "vehicle count must be > 0"));
        }
        if self.groups.is_empty() {
            return Err(Error::configuration("plan", "no task groups"));
        }
        for g in &self.groups {
            g.validate()?;
        }
        Ok(())
    }
}

/// Generation output: tasks sorted by (release, id), plus the drawn slack per
/// task (indexed by task id) so the deadline identity can be audited.
#[derive(Clone, Debug)]
pub struct GeneratedWorkload {
    pub tasks: Vec<Task>,
    pub slacks: Vec<Time>,
}

/// Round `workload` MI to one decimal.
fn round_workload(w: f64) -> f64 {
    (w * 10.0).round() / 10.0
}

fn draw_in(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Draws every group of the plan. Task ids are dense, assigned in group
/// order; vehicles are assigned round-robin by id. The returned task list is
/// sorted by release with ids breaking ties.
pub fn generate(plan: &WorkloadPlan) -> Result<GeneratedWorkload> {
    plan.validate()?;
    let total = plan.total_tasks() as usize;
    let mut tasks = Vec::with_capacity(total);
    let mut slacks = vec![Time::ZERO; total];
    let mut next_id: TaskId = 0;

    for spec in &plan.groups {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        rng.set_stream(STREAM_GROUP_BASE + spec.group as u64);
        for _ in 0..spec.count {
            let release = Time::from_f64(draw_in(&mut rng, spec.release));
            let workload = round_workload(draw_in(&mut rng, spec.workload));
            let size = draw_in(&mut rng, spec.size);
            let slack = Time::from_f64(draw_in(&mut rng, spec.slack));
            let deadline = release + Time::from_f64(workload) + slack;
            let id = next_id;
            next_id += 1;
            slacks[id as usize] = slack;
            tasks.push(Task::new(
                id,
                id % plan.vehicles,
                spec.group,
                release,
                deadline,
                workload,
                size,
            )?);
        }
    }

    tasks.sort_by_key(|t| (t.release, t.id));
    Ok(GeneratedWorkload { tasks, slacks })
}

/// Streams `(release, task)` pairs from a release-sorted task list; each task
/// appears exactly once, at its release instant.
pub fn release_events(tasks: &[Task]) -> impl Iterator<Item = (Time, &Task)> + '_ {
    debug_assert!(tasks.windows(2).all(|w| w[0].release <= w[1].release));
    tasks.iter().map(|t| (t.release, t))
}

// ── CSV pinning ─────────────────────────────────────────────────────────────
//
// A generated task set can be exported and re-imported bit-exactly so two
// implementations can run the identical workload. Times use the canonical
// 3-decimal form; workload and size use shortest-round-trip float formatting.

const CSV_HEADER: [&str; 7] = ["id", "vehicle", "group", "release", "deadline", "workload", "size"];

pub fn write_tasks_csv<W: Write>(tasks: &[Task], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_io)?;
    for t in tasks {
        w.write_record([
            t.id.to_string(),
            t.vehicle.to_string(),
            t.group.to_string(),
            t.release.to_string(),
            t.deadline.to_string(),
            t.workload.to_string(),
            t.file_size.to_string(),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tasks_csv<R: Read>(input: R) -> Result<Vec<Task>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| Error::parse("tasks csv", e.to_string()))?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::parse("tasks csv", "unexpected header row"));
    }
    let mut tasks = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::parse("tasks csv", e.to_string()))?;
        let ctx = format!("tasks csv row {}", line + 2);
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::parse(&ctx, "missing field"))
        };
        let parse_num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::parse(&ctx, format!("bad number `{s}`")))
        };
        let parse_time = |s: &str| -> Result<Time> {
            s.parse().map_err(|e| Error::parse(&ctx, e))
        };
        tasks.push(Task::new(
            field(0)?.parse().map_err(|_| Error::parse(&ctx, "bad id"))?,
            field(1)?.parse().map_err(|_| Error::parse(&ctx, "bad vehicle"))?,
            field(2)?.parse().map_err(|_| Error::parse(&ctx, "bad group"))?,
            parse_time(field(3)?)?,
            parse_time(field(4)?)?,
            parse_num(field(5)?)?,
            parse_num(field(6)?)?,
        )?);
    }
    Ok(tasks)
}

fn csv_io(e: csv::Error) -> Error {
    Error::parse("csv", e.to_string())
}
