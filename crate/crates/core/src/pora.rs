//! Proactive on-demand resource allocation: standby units for urgent tasks.
//!
//! At scenario start, one unit per edge server is put on standby: the units
//! whose processing rate sits closest to the server's mean rate form a pool
//! of size `k`, and one of them is drawn at random. Standby units are
//! invisible to the normal selection path; they serve only tasks the
//! selection policy could not place anywhere, one urgent task at a time,
//! returning to standby as soon as it completes. The reserved set is fixed
//! for the whole run.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::domain::{EcsId, EdgeServer, PuId, Task};
use crate::engine::ResourceSnapshot;
use crate::error::{Error, Result};
use crate::time::Time;
use crate::timing::quantized_processing_delay;

/// Mean processing rate of a server's units.
pub fn mean_rate(rates: &[f64]) -> f64 {
    rates.iter().sum::<f64>() / rates.len() as f64
}

/// Distance of one unit's rate from the server mean.
pub fn rate_deviation(rate: f64, mean: f64) -> f64 {
    (rate - mean).abs()
}

/// The `k` units of `server` whose rates sit closest to the server mean,
/// ties broken by lower unit id. Returned in (deviation, id) order.
pub fn candidate_pool(server: &EdgeServer, k: usize) -> Vec<PuId> {
    let mean = mean_rate(&server.pus.iter().map(|p| p.rate).collect::<Vec<_>>());
    let mut ranked: Vec<(f64, PuId)> = server
        .pus
        .iter()
        .map(|p| (rate_deviation(p.rate, mean), p.id))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    ranked.truncate(k);
    ranked.into_iter().map(|(_, id)| id).collect()
}

/// The standby bookkeeping for one run.
#[derive(Clone, Debug)]
pub struct ReservationState {
    reserved: BTreeMap<EcsId, PuId>,
    in_use: BTreeSet<PuId>,
    pub top_k: usize,
}

impl ReservationState {
    /// No reservations at all; every unit stays in the normal pool.
    pub fn disabled() -> ReservationState {
        ReservationState {
            reserved: BTreeMap::new(),
            in_use: BTreeSet::new(),
            top_k: 0,
        }
    }

    pub fn is_reserved(&self, pu: PuId) -> bool {
        self.reserved.get(&pu.ecs) == Some(&pu)
    }

    pub fn is_in_use(&self, pu: PuId) -> bool {
        self.in_use.contains(&pu)
    }

    /// Reserved unit ids in server order.
    pub fn reserved_pus(&self) -> Vec<PuId> {
        self.reserved.values().copied().collect()
    }

    pub fn in_use_count(&self) -> usize {
        self.in_use.len()
    }

    /// Picks a standby unit for a task the normal pool rejected: among the
    /// free reserved units whose (idle) completion estimate meets the
    /// deadline, the earliest finisher wins, ties to the lower server id.
    /// The unit is held until [`ReservationState::release`].
    pub fn dispatch_urgent(&mut self, task: &Task, snapshot: &ResourceSnapshot, now: Time) -> Option<PuId> {
        let mut best: Option<(Time, PuId)> = None;
        for &pu_id in self.reserved.values() {
            if self.in_use.contains(&pu_id) {
                continue;
            }
            let pu = snapshot.pu(pu_id).expect("reserved unit present in snapshot");
            debug_assert!(pu.busy_until <= now, "standby unit must be idle");
            let est = now + quantized_processing_delay(task.workload, pu.rate);
            if est > task.deadline {
                continue;
            }
            // BTreeMap iteration is server-ordered, so strict `<` keeps the
            // lower server id on ties.
            if best.map(|(b, _)| est < b).unwrap_or(true) {
                best = Some((est, pu_id));
            }
        }
        if let Some((_, pu_id)) = best {
            self.in_use.insert(pu_id);
        }
        best.map(|(_, id)| id)
    }

    /// Returns a dispatched unit to standby. The unit must be in use.
    pub fn release(&mut self, pu: PuId) {
        assert!(self.in_use.remove(&pu), "unit {pu} released without being in use");
    }
}

/// Builds the reservation for a run: per server, compute the rate mean and
/// each unit's deviation from it, pool the `k` closest, and draw one
/// uniformly. Every server must keep at least one unreserved unit.
pub fn reserve(servers: &[EdgeServer], k: usize, rng: &mut ChaCha8Rng) -> Result<ReservationState> {
    if k == 0 {
        return Err(Error::configuration("reservation", "k must be >= 1"));
    }
    let mut reserved = BTreeMap::new();
    for server in servers {
        if server.pus.len() <= k {
            return Err(Error::configuration(
                format!("ecs {}", server.id),
                format!("needs more than k={k} units to reserve one"),
            ));
        }
        let pool = candidate_pool(server, k);
        let pick = pool[rng.gen_range(0..pool.len())];
        reserved.insert(server.id, pick);
    }
    Ok(ReservationState {
        reserved,
        in_use: BTreeSet::new(),
        top_k: k,
    })
}
