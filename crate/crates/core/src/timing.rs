//! Delay and completion-time arithmetic.
//!
//! The formula functions are pure `f64` so they can be checked against
//! independent re-evaluations to floating-point accuracy. The engine
//! quantizes their results onto the [`Time`] grid exactly once, at the moment
//! a delay enters the event calendar; [`estimate_completion_on`] works on the
//! quantized side so a policy's estimate and the eventual recorded completion
//! are the same number.

use crate::error::{Error, Result};
use crate::time::Time;

/// One side of a transmission path: distance in meters, bandwidth in
/// kilobytes per time unit.
#[derive(Copy, Clone, Debug)]
pub struct LinkSpec {
    pub distance: f64,
    pub bandwidth: f64,
}

/// The three delay components a task accumulates between release and
/// completion, on the quantized grid.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct DelayBreakdown {
    pub transmission: Time,
    pub broker_queue: Time,
    pub processing: Time,
}

/// Transmission delay for a file of `file_size` kilobytes crossing the
/// vehicle→RSU link and the broker→server link:
/// `size/bw₁ · dis₁ + size/bw₂ · dis₂`.
pub fn transmission_delay(file_size: f64, vehicle_link: LinkSpec, broker_link: LinkSpec) -> Result<f64> {
    if !(vehicle_link.bandwidth > 0.0) || !(broker_link.bandwidth > 0.0) {
        return Err(Error::Domain(format!(
            "nonpositive link bandwidth ({}, {})",
            vehicle_link.bandwidth, broker_link.bandwidth
        )));
    }
    Ok(file_size / vehicle_link.bandwidth * vehicle_link.distance
        + file_size / broker_link.bandwidth * broker_link.distance)
}

/// Processing delay of `workload` million instructions on a unit running at
/// `rate` MI per time unit.
pub fn processing_delay(workload: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::Domain(format!("nonpositive processing rate {rate}")));
    }
    Ok(workload / rate)
}

/// Completion instant: release plus the three delay components. Exact on the
/// grid.
pub fn completion_time(release: Time, delays: &DelayBreakdown) -> Time {
    release + delays.transmission + delays.broker_queue + delays.processing
}

/// Quantized processing delay, for committing work to a unit's schedule.
///
/// Panics on a nonpositive rate; unit rates are validated at scenario load.
pub fn quantized_processing_delay(workload: f64, rate: f64) -> Time {
    Time::from_f64(processing_delay(workload, rate).expect("unit rate validated > 0"))
}

/// Estimated completion of a task on one unit under non-preemptive FIFO
/// commitment: execution starts once both the clock and the unit's committed
/// schedule allow it, then runs for the full processing delay.
///
/// Because commitments only ever append, this estimate is exact: it equals
/// the completion the engine will record if the task is committed now.
pub fn estimate_completion_on(workload: f64, rate: f64, busy_until: Time, now: Time) -> Time {
    now.max(busy_until) + quantized_processing_delay(workload, rate)
}
