//! The deterministic discrete-event loop.
//!
//! One engine owns one run: it releases tasks, lets transmission delays
//! elapse, maintains the broker queue, and on every tick orders the queue
//! with the task-selection policy and walks it in that order through the
//! resource-selection policy. A selected task is committed to its unit's
//! FIFO schedule immediately (non-preemptive; commitments never move), so a
//! later task in the same tick already sees the earlier commitments in its
//! completion estimates. Tasks that no unit can save are marked invalid the
//! moment that becomes true — estimates only ever grow, so waiting cannot
//! help them.
//!
//! Determinism: all timestamps live on the fixed-point grid, every iteration
//! order is id-ordered or insertion-ordered, and the only randomness (the
//! `random` baseline policy) draws from a dedicated seeded stream. Two runs
//! of the same configuration produce byte-identical traces.
//!
//! Intra-tick sequence: unit advancement (starts/completions due by now,
//! standby units returning), then releases, broker arrivals, queue ordering,
//! the assignment pass, and finally the best-case screen over whatever is
//! still queued. Completions are advanced first so the trace stays
//! time-ordered and a standby unit freed mid-tick can serve a new escalation
//! in the same tick's pass.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    validate_topology, InvalidReason, PuId, Task, TaskId, TaskState, Topology,
};
use crate::error::{Error, Result};
use crate::pora::{reserve, ReservationState};
use crate::rsp::{select_pu, RspKind, RspPolicy, Selection};
use crate::time::Time;
use crate::timing::{quantized_processing_delay, transmission_delay, LinkSpec};
use crate::tsp::{order_queue, QueueView, QueuedTask, TspPolicy, TspRuntime};
use crate::workload::{STREAM_RANDOM_POLICY, STREAM_RESERVATION};

// ── Events ──────────────────────────────────────────────────────────────────

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    TaskReleased,
    BrokerArrival,
    Assigned,
    PoraDispatched,
    Started,
    Completed,
    PoraReleased,
    MarkedInvalid,
}

impl EventKind {
    /// Sort rank for events sharing a timestamp; follows the task lifecycle.
    fn rank(self) -> u8 {
        match self {
            EventKind::TaskReleased => 0,
            EventKind::BrokerArrival => 1,
            EventKind::Assigned => 2,
            EventKind::PoraDispatched => 3,
            EventKind::Started => 4,
            EventKind::Completed => 5,
            EventKind::PoraReleased => 6,
            EventKind::MarkedInvalid => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::TaskReleased => "TaskReleased",
            EventKind::BrokerArrival => "BrokerArrival",
            EventKind::Assigned => "Assigned",
            EventKind::PoraDispatched => "PoraDispatched",
            EventKind::Started => "Started",
            EventKind::Completed => "Completed",
            EventKind::PoraReleased => "PoraReleased",
            EventKind::MarkedInvalid => "MarkedInvalid",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub time: Time,
    pub kind: EventKind,
    pub task: TaskId,
    pub pu: Option<PuId>,
}

/// Newline-delimited `time,kind,task,pu` records.
pub fn trace_to_string(events: &[Event]) -> String {
    let mut out = String::new();
    for e in events {
        let pu = e.pu.map(|p| p.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", e.time, e.kind, e.task, pu));
    }
    out
}

// ── Configuration ───────────────────────────────────────────────────────────

/// Reservation behavior for a run.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoraMode {
    /// No units reserved; the full pool serves the selection policy.
    Off,
    /// Units reserved and hidden from selection but never dispatched.
    /// Exists to show reservation alone changes nothing but capacity.
    ReserveOnly,
    /// Reserved units serve escalations.
    On,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoraConfig {
    pub mode: PoraMode,
    /// Candidate-pool size per server.
    pub k: u32,
}

impl Default for PoraConfig {
    fn default() -> Self {
        PoraConfig {
            mode: PoraMode::Off,
            k: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub topology: Topology,
    /// Pre-generated tasks, all in `Generated` state. Order does not matter;
    /// ids must be unique.
    pub tasks: Vec<Task>,
    pub tsp: TspPolicy,
    pub rsp: RspPolicy,
    pub pora: PoraConfig,
    pub seed: u64,
    /// Broker decision cadence; the default one-unit tick.
    pub tick: Time,
    /// Per-tick best-case invalidation of still-queued tasks.
    pub screen_queued: bool,
    /// Run invariant assertions every tick and verify the report at the end.
    pub debug_checks: bool,
}

impl EngineConfig {
    pub fn new(topology: Topology, tasks: Vec<Task>, tsp: TspPolicy, rsp: RspPolicy, seed: u64) -> Self {
        EngineConfig {
            topology,
            tasks,
            tsp,
            rsp,
            pora: PoraConfig::default(),
            seed,
            tick: Time::TICK,
            screen_queued: true,
            debug_checks: false,
        }
    }
}

// ── Policy-facing state view ────────────────────────────────────────────────

/// One unit as a policy sees it.
#[derive(Copy, Clone, Debug)]
pub struct PuSnapshot {
    pub id: PuId,
    pub rate: f64,
    /// Earliest instant the unit is free of committed work.
    pub busy_until: Time,
    /// Remaining committed processing as of the snapshot instant.
    pub committed_load: Time,
    pub reserved: bool,
}

/// Immutable view of the resource state mid-tick. Policies never see the
/// engine's mutable internals.
#[derive(Clone, Debug)]
pub struct ResourceSnapshot {
    pub now: Time,
    /// All units in id order, reserved ones included (flagged).
    pub pus: Vec<PuSnapshot>,
}

impl ResourceSnapshot {
    pub fn pu(&self, id: PuId) -> Option<&PuSnapshot> {
        self.pus.iter().find(|p| p.id == id)
    }

    /// Largest committed load among non-reserved units; the normalizer for
    /// load factors.
    pub fn max_committed_load(&self) -> Time {
        self.pus
            .iter()
            .filter(|p| !p.reserved)
            .map(|p| p.committed_load)
            .max()
            .unwrap_or(Time::ZERO)
    }
}

// ── Report ──────────────────────────────────────────────────────────────────

#[derive(Clone, Debug)]
pub struct SimulationReport {
    /// Time-ordered event trace.
    pub events: Vec<Event>,
    /// Terminal tasks, sorted by id.
    pub tasks: Vec<Task>,
    /// Units that spent the run on standby, if any.
    pub reserved: Vec<PuId>,
    pub seed: u64,
    pub tsp: TspPolicy,
    pub rsp: RspPolicy,
    pub pora: PoraConfig,
}

// ── Engine internals ────────────────────────────────────────────────────────

#[derive(Copy, Clone, Debug)]
struct Commitment {
    task: usize,
    start: Time,
    end: Time,
    started: bool,
}

#[derive(Clone, Debug)]
struct PuState {
    id: PuId,
    rate: f64,
    busy_until: Time,
    reserved: bool,
    committed: VecDeque<Commitment>,
}

pub struct Engine {
    tsp: TspPolicy,
    rsp: RspPolicy,
    tsp_runtime: TspRuntime,
    reservation: ReservationState,
    pora: PoraConfig,
    tick: Time,
    screen_queued: bool,
    debug_checks: bool,
    seed: u64,
    max_rate: f64,

    tasks: Vec<Task>,
    index_by_id: HashMap<TaskId, usize>,
    /// Task indices sorted by (release, id); `next_release` walks it.
    release_order: Vec<usize>,
    /// Task indices sorted by (broker arrival instant, id).
    arrival_order: Vec<usize>,
    arrival_instant: Vec<Time>,
    transit_delay: Vec<Time>,
    next_release: usize,
    next_arrival: usize,

    pus: Vec<PuState>,
    pu_index: HashMap<PuId, usize>,

    /// Indices of currently queued tasks in arrival order.
    queue: Vec<usize>,
    events: Vec<Event>,
    rng_random: ChaCha8Rng,
    now: Time,
    ticks_run: u64,
    terminal: usize,
}

/// Hard cap on ticks; hitting it means the loop stalled, which the task
/// lifecycle makes impossible short of a bug.
const MAX_TICKS: u64 = 10_000_000;

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Engine> {
        let EngineConfig {
            topology,
            tasks,
            tsp,
            rsp,
            pora,
            seed,
            tick,
            screen_queued,
            debug_checks,
        } = config;

        validate_topology(&topology)?;
        tsp.validate()?;
        rsp.validate()?;
        if tick <= Time::ZERO {
            return Err(Error::configuration("engine", "tick must be positive"));
        }
        let escalation = pora.mode == PoraMode::On;
        if escalation != rsp.pora_enabled {
            return Err(Error::configuration(
                "engine",
                "rsp pora_enabled must match the reservation mode",
            ));
        }
        if escalation && rsp.kind != RspKind::Sars {
            return Err(Error::configuration(
                "engine",
                "reservation escalation requires the sars policy",
            ));
        }

        let reservation = if pora.mode == PoraMode::Off {
            ReservationState::disabled()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(STREAM_RESERVATION);
            reserve(&topology.servers, pora.k as usize, &mut rng)?
        };

        let mut index_by_id = HashMap::with_capacity(tasks.len());
        for (i, t) in tasks.iter().enumerate() {
            if t.state != TaskState::Generated {
                return Err(Error::configuration(
                    format!("task {}", t.id),
                    "engine input tasks must be freshly generated",
                ));
            }
            if index_by_id.insert(t.id, i).is_some() {
                return Err(Error::configuration(format!("task {}", t.id), "duplicate task id"));
            }
        }

        // Transmission is charged up front: the vehicle's RSU link plus the
        // broker link of the task's transit server, assigned round-robin by
        // task id.
        let mut arrival_instant = Vec::with_capacity(tasks.len());
        let mut transit_delay = Vec::with_capacity(tasks.len());
        for t in &tasks {
            let vlink = topology.link_for_vehicle(t.vehicle).ok_or_else(|| {
                Error::configuration(format!("task {}", t.id), "vehicle has no RSU link")
            })?;
            let server = &topology.servers[t.id as usize % topology.servers.len()];
            let delay = transmission_delay(
                t.file_size,
                LinkSpec {
                    distance: vlink.distance,
                    bandwidth: vlink.bandwidth,
                },
                LinkSpec {
                    distance: server.broker_distance,
                    bandwidth: server.broker_bandwidth,
                },
            )?;
            let delay = Time::from_f64(delay);
            transit_delay.push(delay);
            arrival_instant.push(t.release + delay);
        }

        let mut release_order: Vec<usize> = (0..tasks.len()).collect();
        release_order.sort_by_key(|&i| (tasks[i].release, tasks[i].id));
        let mut arrival_order: Vec<usize> = (0..tasks.len()).collect();
        arrival_order.sort_by_key(|&i| (arrival_instant[i], tasks[i].id));

        let mut pus = Vec::with_capacity(topology.total_pus());
        for server in &topology.servers {
            for pu in &server.pus {
                pus.push(PuState {
                    id: pu.id,
                    rate: pu.rate,
                    busy_until: Time::ZERO,
                    reserved: reservation.is_reserved(pu.id),
                    committed: VecDeque::new(),
                });
            }
        }
        pus.sort_by_key(|p| p.id);
        let pu_index = pus.iter().enumerate().map(|(i, p)| (p.id, i)).collect();

        let mut rng_random = ChaCha8Rng::seed_from_u64(seed);
        rng_random.set_stream(STREAM_RANDOM_POLICY);

        let max_rate = topology.max_rate();
        Ok(Engine {
            tsp,
            rsp,
            tsp_runtime: TspRuntime::default(),
            reservation,
            pora,
            tick,
            screen_queued,
            debug_checks,
            seed,
            max_rate,
            tasks,
            index_by_id,
            release_order,
            arrival_order,
            arrival_instant,
            transit_delay,
            next_release: 0,
            next_arrival: 0,
            pus,
            pu_index,
            queue: Vec::new(),
            events: Vec::new(),
            rng_random,
            now: Time::ZERO,
            ticks_run: 0,
            terminal: 0,
        })
    }

    pub fn now(&self) -> Time {
        self.now
    }

    pub fn is_finished(&self) -> bool {
        self.terminal == self.tasks.len()
    }

    /// Mid-run task states, in engine order (useful for introspection).
    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    /// Immutable view of the resource state at the current instant.
    pub fn snapshot(&self) -> ResourceSnapshot {
        ResourceSnapshot {
            now: self.now,
            pus: self
                .pus
                .iter()
                .map(|p| PuSnapshot {
                    id: p.id,
                    rate: p.rate,
                    busy_until: p.busy_until,
                    committed_load: if p.busy_until > self.now {
                        p.busy_until - self.now
                    } else {
                        Time::ZERO
                    },
                    reserved: p.reserved,
                })
                .collect(),
        }
    }

    /// Runs one broker tick at the current instant.
    pub fn step(&mut self) {
        let now = self.now;
        let mut batch: Vec<Event> = Vec::new();

        self.advance_units(now, &mut batch);
        self.process_releases(now, &mut batch);
        self.process_arrivals(now, &mut batch);
        self.assignment_pass(now, &mut batch);
        if self.screen_queued {
            self.screen_queue(now, &mut batch);
        }

        if self.debug_checks {
            self.assert_tick_invariants(now);
        }

        batch.sort_by_key(|e| (e.time, e.kind.rank()));
        self.events.extend(batch);
        self.now = now + self.tick;
        self.ticks_run += 1;
    }

    /// Runs to completion and produces the report.
    pub fn run(mut self) -> Result<SimulationReport> {
        while !self.is_finished() {
            assert!(self.ticks_run < MAX_TICKS, "engine stalled");
            self.step();
        }
        let Engine {
            mut tasks,
            events,
            reservation,
            seed,
            tsp,
            rsp,
            pora,
            debug_checks,
            ..
        } = self;
        tasks.sort_by_key(|t| t.id);
        let report = SimulationReport {
            events,
            tasks,
            reserved: reservation.reserved_pus(),
            seed,
            tsp,
            rsp,
            pora,
        };
        if debug_checks {
            let violations = verify_report(&report);
            if !violations.is_empty() {
                panic!("engine invariant violations: {violations:#?}");
            }
        }
        Ok(report)
    }

    // Starts and completions whose instants have passed. Standby units
    // return to the pool the moment their urgent task finishes.
    fn advance_units(&mut self, now: Time, batch: &mut Vec<Event>) {
        for pu_idx in 0..self.pus.len() {
            loop {
                let Some(&front) = self.pus[pu_idx].committed.front() else {
                    break;
                };
                if !front.started && front.start <= now {
                    self.pus[pu_idx].committed.front_mut().unwrap().started = true;
                    let task = &mut self.tasks[front.task];
                    task.set_state(TaskState::Running);
                    task.start = Some(front.start);
                    batch.push(Event {
                        time: front.start,
                        kind: EventKind::Started,
                        task: task.id,
                        pu: Some(self.pus[pu_idx].id),
                    });
                }
                if front.end <= now {
                    let pu_id = self.pus[pu_idx].id;
                    let task = &mut self.tasks[front.task];
                    task.set_state(TaskState::Completed);
                    task.completion = Some(front.end);
                    self.terminal += 1;
                    batch.push(Event {
                        time: front.end,
                        kind: EventKind::Completed,
                        task: task.id,
                        pu: Some(pu_id),
                    });
                    if self.pus[pu_idx].reserved {
                        self.reservation.release(pu_id);
                        batch.push(Event {
                            time: front.end,
                            kind: EventKind::PoraReleased,
                            task: self.tasks[front.task].id,
                            pu: Some(pu_id),
                        });
                    }
                    self.pus[pu_idx].committed.pop_front();
                } else {
                    break;
                }
            }
        }
    }

    fn process_releases(&mut self, now: Time, batch: &mut Vec<Event>) {
        while self.next_release < self.release_order.len() {
            let idx = self.release_order[self.next_release];
            if self.tasks[idx].release > now {
                break;
            }
            let task = &mut self.tasks[idx];
            task.set_state(TaskState::InTransit);
            batch.push(Event {
                time: task.release,
                kind: EventKind::TaskReleased,
                task: task.id,
                pu: None,
            });
            self.next_release += 1;
        }
    }

    fn process_arrivals(&mut self, now: Time, batch: &mut Vec<Event>) {
        while self.next_arrival < self.arrival_order.len() {
            let idx = self.arrival_order[self.next_arrival];
            let arrival = self.arrival_instant[idx];
            if arrival > now {
                break;
            }
            let task = &mut self.tasks[idx];
            task.set_state(TaskState::Queued);
            task.broker_arrival = Some(arrival);
            task.transmission = Some(self.transit_delay[idx]);
            batch.push(Event {
                time: arrival,
                kind: EventKind::BrokerArrival,
                task: task.id,
                pu: None,
            });
            if task.deadline < arrival {
                // Expired in transit: never ordered, never assigned.
                let id = task.id;
                self.mark_invalid(idx, InvalidReason::ArrivalInfeasible, now, batch);
                debug_assert!(self.tasks[idx].id == id);
            } else {
                self.queue.push(idx);
            }
            self.next_arrival += 1;
        }
    }

    fn assignment_pass(&mut self, now: Time, batch: &mut Vec<Event>) {
        if self.queue.is_empty() {
            return;
        }
        let view = QueueView {
            now,
            tasks: self
                .queue
                .iter()
                .map(|&idx| {
                    let t = &self.tasks[idx];
                    QueuedTask {
                        id: t.id,
                        broker_arrival: t.broker_arrival.expect("queued task has arrival"),
                        deadline: t.deadline,
                        workload: t.workload,
                    }
                })
                .collect(),
            max_rate: self.max_rate,
        };
        let order = order_queue(&self.tsp, &mut self.tsp_runtime, &view);

        for id in order.ids {
            let idx = self.index_by_id[&id];
            if self.tasks[idx].state != TaskState::Queued {
                continue;
            }
            let snapshot = self.snapshot_at(now);
            match select_pu(&self.rsp, &self.tasks[idx], &snapshot, &mut self.rng_random) {
                Selection::Pu(pu_id) => self.commit(idx, pu_id, now, batch, EventKind::Assigned),
                Selection::EscalateToPora => {
                    match self.reservation.dispatch_urgent(&self.tasks[idx], &snapshot, now) {
                        Some(pu_id) => {
                            self.commit(idx, pu_id, now, batch, EventKind::PoraDispatched)
                        }
                        None => self.mark_invalid(idx, InvalidReason::NoReservedPu, now, batch),
                    }
                }
                Selection::Invalid => {
                    self.mark_invalid(idx, InvalidReason::NoFeasiblePu, now, batch)
                }
            }
        }
        self.queue.retain(|&idx| self.tasks[idx].state == TaskState::Queued);
    }

    // Best-case screen: a queued task the fastest unit cannot finish in time
    // can never recover; drop it now rather than churn it forever.
    fn screen_queue(&mut self, now: Time, batch: &mut Vec<Event>) {
        for i in 0..self.queue.len() {
            let idx = self.queue[i];
            if self.tasks[idx].state != TaskState::Queued {
                continue;
            }
            let best_case = quantized_processing_delay(self.tasks[idx].workload, self.max_rate);
            if now + best_case > self.tasks[idx].deadline {
                self.mark_invalid(idx, InvalidReason::ArrivalInfeasible, now, batch);
            }
        }
        self.queue.retain(|&idx| self.tasks[idx].state == TaskState::Queued);
    }

    fn snapshot_at(&self, now: Time) -> ResourceSnapshot {
        debug_assert!(now == self.now);
        self.snapshot()
    }

    fn commit(&mut self, idx: usize, pu_id: PuId, now: Time, batch: &mut Vec<Event>, kind: EventKind) {
        let pu = &mut self.pus[self.pu_index[&pu_id]];
        let task = &mut self.tasks[idx];
        let pro = quantized_processing_delay(task.workload, pu.rate);
        let start = now.max(pu.busy_until);
        let end = start + pro;
        pu.busy_until = end;
        pu.committed.push_back(Commitment {
            task: idx,
            start,
            end,
            started: false,
        });
        task.set_state(TaskState::Assigned);
        task.assignment = Some(now);
        task.assigned_pu = Some(pu_id);
        task.processing = Some(pro);
        batch.push(Event {
            time: now,
            kind,
            task: task.id,
            pu: Some(pu_id),
        });
        if start == now {
            pu.committed.back_mut().unwrap().started = true;
            task.set_state(TaskState::Running);
            task.start = Some(start);
            batch.push(Event {
                time: start,
                kind: EventKind::Started,
                task: task.id,
                pu: Some(pu_id),
            });
        }
    }

    fn mark_invalid(&mut self, idx: usize, reason: InvalidReason, now: Time, batch: &mut Vec<Event>) {
        let task = &mut self.tasks[idx];
        task.set_state(TaskState::Invalid);
        task.invalid_reason = Some(reason);
        self.terminal += 1;
        batch.push(Event {
            time: now,
            kind: EventKind::MarkedInvalid,
            task: task.id,
            pu: None,
        });
    }

    fn assert_tick_invariants(&self, now: Time) {
        // The assignment pass settles every queued task one way or another.
        assert!(
            self.queue.is_empty(),
            "tick {now}: queue not drained ({} left)",
            self.queue.len()
        );
        for pu in &self.pus {
            let mut prev_end: Option<Time> = None;
            for c in &pu.committed {
                assert!(c.end > now, "tick {now}: stale commitment on {}", pu.id);
                if let Some(end) = prev_end {
                    assert!(c.start == end, "tick {now}: gap in {} schedule", pu.id);
                }
                prev_end = Some(c.end);
            }
            if let Some(end) = prev_end {
                assert!(end == pu.busy_until, "tick {now}: busy_until drift on {}", pu.id);
            }
            if pu.reserved {
                assert!(pu.committed.len() <= 1, "tick {now}: standby {} overcommitted", pu.id);
            }
        }
    }
}

/// Builds and runs an engine in one call.
pub fn run(config: EngineConfig) -> Result<SimulationReport> {
    Engine::new(config)?.run()
}

// ── Post-run verification ───────────────────────────────────────────────────

/// Replays the report against the model invariants; returns one line per
/// violation. Independent of the engine's own bookkeeping: everything is
/// recomputed from the terminal tasks and the trace.
pub fn verify_report(report: &SimulationReport) -> Vec<String> {
    let mut violations = Vec::new();
    let mut complain = |msg: String| violations.push(msg);

    let total = report.tasks.len();
    let completed = report
        .tasks
        .iter()
        .filter(|t| t.state == TaskState::Completed)
        .count();
    let invalid = report
        .tasks
        .iter()
        .filter(|t| t.state == TaskState::Invalid)
        .count();
    if completed + invalid != total {
        complain(format!(
            "conservation: {completed} completed + {invalid} invalid != {total} total"
        ));
    }

    for t in &report.tasks {
        match t.state {
            TaskState::Completed => {
                let (Some(arrival), Some(start), Some(completion), Some(td), Some(pro)) = (
                    t.broker_arrival,
                    t.start,
                    t.completion,
                    t.transmission,
                    t.processing,
                ) else {
                    complain(format!("task {}: completed with missing trace fields", t.id));
                    continue;
                };
                if completion > t.deadline {
                    complain(format!("task {}: completed after deadline", t.id));
                }
                if start < arrival {
                    complain(format!("task {}: negative broker queue delay", t.id));
                }
                if t.assignment.map(|a| a < arrival).unwrap_or(true) {
                    complain(format!("task {}: assignment precedes broker arrival", t.id));
                }
                let queue_delay = start - arrival;
                let recomputed = t.release + td + queue_delay + pro;
                if recomputed != completion {
                    complain(format!(
                        "task {}: completion {} != recomposed {}",
                        t.id, completion, recomputed
                    ));
                }
            }
            TaskState::Invalid => {
                if t.invalid_reason.is_none() {
                    complain(format!("task {}: invalid without a reason", t.id));
                }
                if t.completion.is_some() {
                    complain(format!("task {}: invalid but has a completion", t.id));
                }
            }
            other => complain(format!("task {}: non-terminal state {other:?}", t.id)),
        }
    }

    // Non-preemption: per unit, execution intervals are disjoint and exactly
    // as long as the processing delay.
    let mut by_pu: HashMap<PuId, Vec<(Time, Time, TaskId, Time)>> = HashMap::new();
    for t in &report.tasks {
        if let (Some(pu), Some(start), Some(end), Some(pro)) =
            (t.assigned_pu, t.start, t.completion, t.processing)
        {
            by_pu.entry(pu).or_default().push((start, end, t.id, pro));
        }
    }
    for (pu, mut intervals) in by_pu {
        intervals.sort();
        for w in intervals.windows(2) {
            if w[1].0 < w[0].1 {
                complain(format!(
                    "unit {pu}: tasks {} and {} overlap",
                    w[0].2, w[1].2
                ));
            }
        }
        for (start, end, id, pro) in intervals {
            if end - start != pro {
                complain(format!("unit {pu}: task {id} interval != processing delay"));
            }
        }
    }

    // Trace shape: time-ordered, exactly one terminal event per task,
    // standby dispatches only on reserved units.
    for w in report.events.windows(2) {
        if w[1].time < w[0].time {
            complain(format!("trace out of order at {} -> {}", w[0].time, w[1].time));
            break;
        }
    }
    let mut terminal_events: HashMap<TaskId, u32> = HashMap::new();
    for e in &report.events {
        match e.kind {
            EventKind::Completed | EventKind::MarkedInvalid => {
                *terminal_events.entry(e.task).or_insert(0) += 1;
            }
            EventKind::PoraDispatched => {
                if !report.reserved.contains(&e.pu.expect("dispatch has a unit")) {
                    complain(format!("task {}: dispatched to a non-reserved unit", e.task));
                }
            }
            EventKind::Assigned => {
                if report.reserved.contains(&e.pu.expect("assignment has a unit")) {
                    complain(format!("task {}: normally assigned to a standby unit", e.task));
                }
            }
            _ => {}
        }
    }
    for t in &report.tasks {
        let n = terminal_events.get(&t.id).copied().unwrap_or(0);
        if n != 1 {
            complain(format!("task {}: {} terminal events", t.id, n));
        }
    }

    violations
}
