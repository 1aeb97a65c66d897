//! Scenario files: the experiment's single source of configuration.
//!
//! A scenario is one JSON document with every field optional; omitted fields
//! take the default environment (a 0.7 km square with four vehicles, two
//! RSUs, four heterogeneous servers of 8–12 units at rates 0.5–1.2, link
//! distances 50–250 m, 100 KB/unit bandwidths, and the standard four-group
//! workload). Unknown keys are rejected so typos fail loudly.
//!
//! Topology randomness draws from stream 0 of the run seed, in a fixed
//! order: per server its unit count then each unit's rate, then one RSU-link
//! distance per vehicle, then one broker-link distance per server.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{EdgeServer, ProcessingUnit, PuId, Topology, VehicleLink};
use crate::engine::{EngineConfig, PoraConfig, PoraMode};
use crate::error::{Error, Result};
use crate::rsp::{BetaSign, RspKind, RspPolicy};
use crate::tsp::{TspKind, TspPolicy};
use crate::workload::{GroupSpec, WorkloadPlan, STREAM_TOPOLOGY};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: String,
    /// Base seed; sweeps use `seed .. seed + seeds`.
    pub seed: u64,
    pub seeds: u32,
    /// Side of the square deployment area, km (descriptive).
    pub area_km: f64,
    pub vehicles: u32,
    pub rsus: u32,
    pub servers: u32,
    /// Inclusive range of units per server.
    pub pu_count: (u32, u32),
    /// Inclusive range of unit rates, MI per time unit.
    pub pu_rate: (f64, f64),
    /// Inclusive range of link distances, meters.
    pub distance_m: (f64, f64),
    /// Vehicle→RSU bandwidth, KB per time unit.
    pub vehicle_bandwidth: f64,
    /// Broker→server bandwidth, KB per time unit.
    pub broker_bandwidth: f64,
    /// Admissible range for the alpha weight.
    pub alpha_range: (f64, f64),
    pub groups: Vec<GroupSpec>,
    pub sweep: SweepSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub tsp: Vec<TspKind>,
    pub rsp: Vec<RspKind>,
    /// Reservation on/off variants (applied to sars cells only).
    pub pora: Vec<bool>,
    /// Alpha values for sars cells.
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub beta_sign: BetaSign,
    pub pora_k: u32,
    pub covert_k: f64,
    pub era_thresholds: (f64, f64),
    pub pqm_factor: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            tsp: TspKind::ALL.to_vec(),
            rsp: RspKind::ALL.to_vec(),
            pora: vec![false, true],
            alpha: vec![0.9],
            beta: 0.5,
            beta_sign: BetaSign::Minus,
            pora_k: 3,
            covert_k: 2.0,
            era_thresholds: (1.5, 3.0),
            pqm_factor: 2.0,
        }
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "default".into(),
            seed: 1,
            seeds: 30,
            area_km: 0.7,
            vehicles: 4,
            rsus: 2,
            servers: 4,
            pu_count: (8, 12),
            pu_rate: (0.5, 1.2),
            distance_m: (50.0, 250.0),
            vehicle_bandwidth: 100.0,
            broker_bandwidth: 100.0,
            alpha_range: (0.5, 1.5),
            groups: WorkloadPlan::default_plan(0, 4).groups,
            sweep: SweepSpec::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.vehicles == 0 || self.rsus == 0 || self.servers == 0 {
            return Err(Error::configuration("scenario", "counts must be positive"));
        }
        if !(self.area_km > 0.0) {
            return Err(Error::configuration("scenario", "area must be positive"));
        }
        if !(self.pu_count.0 >= 1 && self.pu_count.1 >= self.pu_count.0) {
            return Err(Error::configuration("scenario", "bad pu_count range"));
        }
        if !(self.pu_rate.0 > 0.0 && self.pu_rate.1 >= self.pu_rate.0) {
            return Err(Error::configuration("scenario", "unit rates must be positive"));
        }
        if !(self.distance_m.0 >= 0.0 && self.distance_m.1 >= self.distance_m.0) {
            return Err(Error::configuration("scenario", "bad distance range"));
        }
        if !(self.vehicle_bandwidth > 0.0 && self.broker_bandwidth > 0.0) {
            return Err(Error::configuration("scenario", "bandwidths must be positive"));
        }
        if !(self.alpha_range.0 <= self.alpha_range.1) {
            return Err(Error::configuration("scenario", "bad alpha range"));
        }
        self.plan(self.seed).validate()?;
        if self.seeds == 0 {
            return Err(Error::configuration("scenario", "seeds must be >= 1"));
        }

        let s = &self.sweep;
        if s.tsp.is_empty() || s.rsp.is_empty() || s.pora.is_empty() || s.alpha.is_empty() {
            return Err(Error::configuration("sweep", "empty policy list"));
        }
        for &a in &s.alpha {
            if !(a >= self.alpha_range.0 && a <= self.alpha_range.1) {
                return Err(Error::configuration(
                    "sweep",
                    format!("alpha {a} outside configured range"),
                ));
            }
        }
        if s.pora_k == 0 {
            return Err(Error::configuration("sweep", "pora_k must be >= 1"));
        }
        // Reservation must leave every server at least one open unit.
        if s.pora.contains(&true) && s.pora_k >= self.pu_count.0 {
            return Err(Error::configuration(
                "sweep",
                "pora_k must be below the minimum units per server",
            ));
        }
        self.tsp_policy(TspKind::Covert).validate()?;
        self.rsp_policy(RspKind::Sars, false, s.alpha[0])?.validate()?;
        Ok(())
    }

    pub fn plan(&self, seed: u64) -> WorkloadPlan {
        WorkloadPlan {
            groups: self.groups.clone(),
            seed,
            vehicles: self.vehicles,
        }
    }

    /// Samples the static layout for one seed.
    pub fn build_topology(&self, seed: u64) -> Topology {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(STREAM_TOPOLOGY);
        let draw = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
            if lo == hi {
                lo
            } else {
                rng.gen_range(lo..=hi)
            }
        };

        let mut servers = Vec::with_capacity(self.servers as usize);
        for k in 0..self.servers {
            let count = if self.pu_count.0 == self.pu_count.1 {
                self.pu_count.0
            } else {
                rng.gen_range(self.pu_count.0..=self.pu_count.1)
            };
            let pus = (0..count)
                .map(|j| ProcessingUnit {
                    id: PuId::new(k, j),
                    rate: draw(&mut rng, self.pu_rate),
                })
                .collect();
            servers.push(EdgeServer {
                id: k,
                pus,
                broker_distance: 0.0, // drawn below, after vehicle links
                broker_bandwidth: self.broker_bandwidth,
            });
        }

        let vehicle_links = (0..self.vehicles)
            .map(|v| VehicleLink {
                vehicle: v,
                rsu: v % self.rsus,
                distance: draw(&mut rng, self.distance_m),
                bandwidth: self.vehicle_bandwidth,
            })
            .collect();

        for server in &mut servers {
            server.broker_distance = draw(&mut rng, self.distance_m);
        }

        Topology {
            rsu_count: self.rsus,
            vehicle_links,
            servers,
            distance_range: self.distance_m,
        }
    }

    pub fn tsp_policy(&self, kind: TspKind) -> TspPolicy {
        TspPolicy {
            kind,
            covert_k: self.sweep.covert_k,
            era_thresholds: self.sweep.era_thresholds,
            pqm_factor: self.sweep.pqm_factor,
        }
    }

    pub fn rsp_policy(&self, kind: RspKind, pora: bool, alpha: f64) -> Result<RspPolicy> {
        if pora && kind != RspKind::Sars {
            return Err(Error::configuration(
                "sweep",
                "reservation applies to the sars policy only",
            ));
        }
        Ok(RspPolicy {
            kind,
            alpha,
            beta: self.sweep.beta,
            beta_sign: self.sweep.beta_sign,
            pora_enabled: pora,
        })
    }

    /// Full engine configuration for one (policy pairing, seed) cell. The
    /// same seed always reproduces the same workload and topology no matter
    /// which policies run on them.
    pub fn engine_config(
        &self,
        seed: u64,
        tsp: TspKind,
        rsp: RspKind,
        pora: bool,
        alpha: f64,
    ) -> Result<EngineConfig> {
        let generated = crate::workload::generate(&self.plan(seed))?;
        let mut config = EngineConfig::new(
            self.build_topology(seed),
            generated.tasks,
            self.tsp_policy(tsp),
            self.rsp_policy(rsp, pora, alpha)?,
            seed,
        );
        config.pora = PoraConfig {
            mode: if pora { PoraMode::On } else { PoraMode::Off },
            k: self.sweep.pora_k,
        };
        Ok(config)
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
        other => other,
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario =
        serde_json::from_str(text).map_err(|e| Error::parse("scenario", e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(scenario)
        .map_err(|e| Error::parse("scenario", e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_topology;

    #[test]
    fn empty_config_is_the_default_scenario() {
        let scenario = parse_scenario("{}").unwrap();
        assert_eq!(scenario, Scenario::default());
        assert_eq!(scenario.vehicles, 4);
        assert_eq!(scenario.servers, 4);
        assert_eq!(scenario.groups.len(), 4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_scenario(r#"{"vehciles": 4}"#).is_err());
    }

    #[test]
    fn bad_rate_range_is_rejected() {
        let err = parse_scenario(r#"{"pu_rate": [0.0, 1.0]}"#).unwrap_err();
        assert!(err.to_string().contains("rate"));
    }

    #[test]
    fn round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        let mut scenario = Scenario::default();
        scenario.name = "roundtrip".into();
        scenario.sweep.alpha = vec![0.5, 1.0, 1.5];
        save_scenario(&scenario, &path).unwrap();
        let back = load_scenario(&path).unwrap();
        assert_eq!(back, scenario);
    }

    #[test]
    fn topology_is_valid_and_seed_stable() {
        let scenario = Scenario::default();
        let a = scenario.build_topology(5);
        let b = scenario.build_topology(5);
        validate_topology(&a).unwrap();
        assert_eq!(a.servers.len(), 4);
        for (sa, sb) in a.servers.iter().zip(&b.servers) {
            assert_eq!(sa.pus.len(), sb.pus.len());
            for (pa, pb) in sa.pus.iter().zip(&sb.pus) {
                assert!(pa.rate == pb.rate);
            }
            assert!(sa.broker_distance == sb.broker_distance);
        }
        for s in &a.servers {
            assert!(s.pus.len() >= 8 && s.pus.len() <= 12);
            for p in &s.pus {
                assert!(p.rate >= 0.5 && p.rate <= 1.2);
            }
        }
    }

    #[test]
    fn engine_config_builds_for_default_cell() {
        let scenario = Scenario::default();
        let config = scenario
            .engine_config(scenario.seed, TspKind::Edf, RspKind::Sars, false, 1.0)
            .unwrap();
        assert_eq!(config.tasks.len(), 800);
    }
}
