//! Entities of the two-layer offloading architecture: tasks released by
//! vehicles, the broker, and edge servers holding heterogeneous processing
//! units. Everything here is plain data owned by the single-threaded engine;
//! copies are safe to ship across threads.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Time;

pub type TaskId = u32;
pub type VehicleId = u32;
pub type EcsId = u32;

/// Identity of one processing unit: (edge server index, core index).
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PuId {
    pub ecs: EcsId,
    pub pu: u32,
}

impl PuId {
    pub fn new(ecs: EcsId, pu: u32) -> Self {
        PuId { ecs, pu }
    }
}

impl fmt::Display for PuId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.ecs, self.pu)
    }
}

impl fmt::Debug for PuId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Task lifecycle. Transitions only ever move rightwards:
/// `Generated → InTransit → Queued → Assigned → Running → Completed`, with
/// `Invalid` reachable from `Queued` or `Assigned` (and from `InTransit` for
/// tasks whose deadline expires before they even reach the broker).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskState {
    Generated,
    InTransit,
    Queued,
    Assigned,
    Running,
    Completed,
    Invalid,
}

impl TaskState {
    pub fn is_terminal(self) -> bool {
        matches!(self, TaskState::Completed | TaskState::Invalid)
    }

    /// Whether `self → next` is a legal lifecycle step.
    pub fn can_transition_to(self, next: TaskState) -> bool {
        use TaskState::*;
        matches!(
            (self, next),
            (Generated, InTransit)
                | (InTransit, Queued)
                | (Queued, Assigned)
                | (Assigned, Running)
                | (Running, Completed)
                | (InTransit, Invalid)
                | (Queued, Invalid)
                | (Assigned, Invalid)
        )
    }
}

/// Why a task ended up `Invalid`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvalidReason {
    /// The resource-selection policy found no unit that meets the deadline.
    NoFeasiblePu,
    /// Escalation found every reserved unit busy or too slow.
    NoReservedPu,
    /// The deadline cannot be met even before resource selection runs
    /// (expired in transit, or hopeless under the best-case screen).
    ArrivalInfeasible,
}

/// A real-time unit of work plus its lifecycle bookkeeping.
///
/// The descriptor quadruple is (release, deadline, workload, file_size);
/// the remaining fields are stamped by the engine as the task moves through
/// the pipeline and stay `None` until then.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub vehicle: VehicleId,
    /// Workload group 1–4.
    pub group: u8,
    pub release: Time,
    pub deadline: Time,
    /// Million instructions.
    pub workload: f64,
    /// Kilobytes.
    pub file_size: f64,
    pub state: TaskState,
    /// Instant the task entered the broker queue.
    pub broker_arrival: Option<Time>,
    /// Tick at which the broker committed the task to a unit.
    pub assignment: Option<Time>,
    /// Instant execution began on the unit.
    pub start: Option<Time>,
    pub completion: Option<Time>,
    pub assigned_pu: Option<PuId>,
    /// Quantized transmission delay charged before broker entry.
    pub transmission: Option<Time>,
    /// Quantized processing delay on the assigned unit.
    pub processing: Option<Time>,
    pub invalid_reason: Option<InvalidReason>,
}

impl Task {
    pub fn new(
        id: TaskId,
        vehicle: VehicleId,
        group: u8,
        release: Time,
        deadline: Time,
        workload: f64,
        file_size: f64,
    ) -> Result<Task> {
        if release < Time::ZERO {
            return Err(Error::configuration(format!("task {id}"), "release < 0"));
        }
        if deadline <= release {
            return Err(Error::configuration(
                format!("task {id}"),
                "deadline must exceed release",
            ));
        }
        if !(workload > 0.0) {
            return Err(Error::configuration(format!("task {id}"), "workload must be > 0"));
        }
        if !(file_size > 0.0) {
            return Err(Error::configuration(
                format!("task {id}"),
                "file size must be > 0",
            ));
        }
        Ok(Task {
            id,
            vehicle,
            group,
            release,
            deadline,
            workload,
            file_size,
            state: TaskState::Generated,
            broker_arrival: None,
            assignment: None,
            start: None,
            completion: None,
            assigned_pu: None,
            transmission: None,
            processing: None,
            invalid_reason: None,
        })
    }

    /// Advance the lifecycle, panicking on an illegal step. Transitions are
    /// driven solely by the engine, so a violation is a simulator bug.
    pub fn set_state(&mut self, next: TaskState) {
        assert!(
            self.state.can_transition_to(next),
            "task {}: illegal transition {:?} -> {:?}",
            self.id,
            self.state,
            next
        );
        self.state = next;
    }
}

/// A task counts as processed when it completed no later than its deadline.
/// Boundary is inclusive; `Invalid` never counts.
pub fn task_is_processed(task: &Task) -> bool {
    task.state == TaskState::Completed
        && task.completion.map(|ct| ct <= task.deadline).unwrap_or(false)
}

/// One heterogeneous core inside an edge server.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProcessingUnit {
    pub id: PuId,
    /// Million instructions per time unit.
    pub rate: f64,
}

/// An edge computing server: a bank of parallel units plus its broker link.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeServer {
    pub id: EcsId,
    pub pus: Vec<ProcessingUnit>,
    /// Meters between broker and this server.
    pub broker_distance: f64,
    /// Kilobytes per time unit on the broker link.
    pub broker_bandwidth: f64,
}

/// The single link a vehicle uses to reach its roadside unit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VehicleLink {
    pub vehicle: VehicleId,
    pub rsu: u32,
    /// Meters.
    pub distance: f64,
    /// Kilobytes per time unit.
    pub bandwidth: f64,
}

/// Static layout of one scenario. Positions never move during a run; link
/// distances are sampled once at scenario construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Topology {
    pub rsu_count: u32,
    pub vehicle_links: Vec<VehicleLink>,
    pub servers: Vec<EdgeServer>,
    /// Inclusive distance range every link must respect, in meters.
    pub distance_range: (f64, f64),
}

impl Topology {
    pub fn vehicle_count(&self) -> u32 {
        self.vehicle_links.len() as u32
    }

    pub fn link_for_vehicle(&self, vehicle: VehicleId) -> Option<&VehicleLink> {
        self.vehicle_links.iter().find(|l| l.vehicle == vehicle)
    }

    /// Fastest unit rate anywhere in the system. Zero when there are no units.
    pub fn max_rate(&self) -> f64 {
        self.servers
            .iter()
            .flat_map(|s| s.pus.iter())
            .map(|p| p.rate)
            .fold(0.0, f64::max)
    }

    pub fn total_pus(&self) -> usize {
        self.servers.iter().map(|s| s.pus.len()).sum()
    }
}

/// Checks every structural invariant, reporting the first violation with the
/// offending entity.
pub fn validate_topology(topology: &Topology) -> Result<()> {
    let (lo, hi) = topology.distance_range;
    if !(lo >= 0.0 && hi >= lo) {
        return Err(Error::configuration("topology", "bad distance range"));
    }
    if topology.vehicle_links.is_empty() {
        return Err(Error::configuration("topology", "no vehicles"));
    }
    if topology.rsu_count == 0 {
        return Err(Error::configuration("topology", "no RSUs"));
    }
    if topology.servers.is_empty() {
        return Err(Error::configuration("topology", "no edge servers"));
    }

    let mut seen_vehicles = std::collections::HashSet::new();
    for link in &topology.vehicle_links {
        let entity = format!("vehicle {}", link.vehicle);
        if !seen_vehicles.insert(link.vehicle) {
            return Err(Error::configuration(entity, "more than one RSU link"));
        }
        if link.rsu >= topology.rsu_count {
            return Err(Error::configuration(entity, "links to unknown RSU"));
        }
        if !(link.bandwidth > 0.0) {
            return Err(Error::configuration(entity, "link bandwidth must be > 0"));
        }
        if link.distance < lo || link.distance > hi {
            return Err(Error::configuration(entity, "link distance out of range"));
        }
    }

    let mut seen_servers = std::collections::HashSet::new();
    for server in &topology.servers {
        let entity = format!("ecs {}", server.id);
        if !seen_servers.insert(server.id) {
            return Err(Error::configuration(entity, "duplicate server id"));
        }
        if server.pus.is_empty() {
            return Err(Error::configuration(entity, "server has no processing units"));
        }
        if !(server.broker_bandwidth > 0.0) {
            return Err(Error::configuration(entity, "broker bandwidth must be > 0"));
        }
        if server.broker_distance < lo || server.broker_distance > hi {
            return Err(Error::configuration(entity, "broker distance out of range"));
        }
        let mut seen_pus = std::collections::HashSet::new();
        for pu in &server.pus {
            let entity = format!("pu {}", pu.id);
            if pu.id.ecs != server.id {
                return Err(Error::configuration(entity, "unit id does not match its server"));
            }
            if !seen_pus.insert(pu.id) {
                return Err(Error::configuration(entity, "duplicate unit id"));
            }
            if !(pu.rate > 0.0) {
                return Err(Error::configuration(entity, "processing rate must be > 0"));
            }
        }
    }
    Ok(())
}
