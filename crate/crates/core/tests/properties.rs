//! Property tests for the policy and engine invariants.

use proptest::prelude::*;

use edgesim::domain::{PuId, Task};
use edgesim::engine::{PuSnapshot, ResourceSnapshot};
use edgesim::rsp::{
    load_factor, select_pu, suitability_rows, BetaSign, RspKind, RspPolicy, Selection,
};
use edgesim::scenario::Scenario;
use edgesim::time::Time;
use edgesim::tsp::{order_queue, QueueView, QueuedTask, TspKind, TspPolicy, TspRuntime};
use edgesim::workload::GroupSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ── Strategies ──────────────────────────────────────────────────────────────

fn queued_tasks(max: usize) -> impl Strategy<Value = Vec<QueuedTask>> {
    prop::collection::vec(
        (0..100_000i64, 0..100_000i64, 1u32..200_000, 0.1f64..12.0),
        1..=max,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (arrival, slack, _, workload))| QueuedTask {
                id: i as u32,
                broker_arrival: Time::from_subunits(arrival),
                deadline: Time::from_subunits(arrival + slack),
                workload,
            })
            .collect()
    })
}

fn any_view() -> impl Strategy<Value = QueueView> {
    (queued_tasks(24), 0..120i64, 0.5f64..1.2).prop_map(|(tasks, now, max_rate)| QueueView {
        now: Time::from_units(now),
        tasks,
        max_rate,
    })
}

fn any_tsp() -> impl Strategy<Value = TspKind> {
    prop::sample::select(TspKind::ALL.to_vec())
}

fn pu_snapshots(max_ecs: usize, max_pu: usize) -> impl Strategy<Value = Vec<PuSnapshot>> {
    (1..=max_ecs, 1..=max_pu).prop_flat_map(move |(ecs_count, pu_count)| {
        prop::collection::vec((0.5f64..1.2, 0..60_000i64, prop::bool::weighted(0.15)), ecs_count * pu_count)
            .prop_map(move |raw| {
                raw.into_iter()
                    .enumerate()
                    .map(|(i, (rate, busy, reserved))| PuSnapshot {
                        id: PuId::new((i / pu_count) as u32, (i % pu_count) as u32),
                        rate,
                        busy_until: Time::from_subunits(busy),
                        committed_load: Time::from_subunits(busy),
                        reserved,
                    })
                    .collect()
            })
    })
}

fn any_task() -> impl Strategy<Value = Task> {
    (1.0f64..10.0, 1i64..90_000).prop_map(|(workload, deadline)| {
        Task::new(0, 0, 1, Time::ZERO, Time::from_subunits(deadline), workload, 1.0).unwrap()
    })
}

// ── Queue-ordering properties ───────────────────────────────────────────────

proptest! {
    #[test]
    fn ordering_is_a_permutation(kind in any_tsp(), view in any_view()) {
        let policy = TspPolicy::new(kind);
        let order = order_queue(&policy, &mut TspRuntime::default(), &view);
        let mut got: Vec<_> = order.ids.clone();
        got.sort_unstable();
        let mut want: Vec<_> = view.tasks.iter().map(|t| t.id).collect();
        want.sort_unstable();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn ordering_is_deterministic(kind in any_tsp(), view in any_view()) {
        let policy = TspPolicy::new(kind);
        let a = order_queue(&policy, &mut TspRuntime::default(), &view);
        let b = order_queue(&policy, &mut TspRuntime::default(), &view);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn edf_is_sorted_by_deadline(view in any_view()) {
        let policy = TspPolicy::new(TspKind::Edf);
        let order = order_queue(&policy, &mut TspRuntime::default(), &view);
        let deadline = |id: u32| view.tasks.iter().find(|t| t.id == id).unwrap().deadline;
        prop_assert!(order.ids.windows(2).all(|w| deadline(w[0]) <= deadline(w[1])));
    }

    #[test]
    fn fcfs_is_sorted_by_arrival(view in any_view()) {
        let policy = TspPolicy::new(TspKind::Fcfs);
        let order = order_queue(&policy, &mut TspRuntime::default(), &view);
        let arrival = |id: u32| view.tasks.iter().find(|t| t.id == id).unwrap().broker_arrival;
        prop_assert!(order.ids.windows(2).all(|w| arrival(w[0]) <= arrival(w[1])));
    }

    #[test]
    fn cr_is_sorted_by_critical_ratio(view in any_view()) {
        let policy = TspPolicy::new(TspKind::Cr);
        let order = order_queue(&policy, &mut TspRuntime::default(), &view);
        let ratio = |id: u32| {
            let t = view.tasks.iter().find(|t| t.id == id).unwrap();
            (t.deadline - view.now).as_f64() / (t.workload / view.max_rate)
        };
        prop_assert!(order.ids.windows(2).all(|w| ratio(w[0]) <= ratio(w[1])));
    }

    #[test]
    fn efdf_prefix_is_exactly_the_feasible_set(view in any_view()) {
        let policy = TspPolicy::new(TspKind::Efdf);
        let order = order_queue(&policy, &mut TspRuntime::default(), &view);
        let feasible = |id: u32| {
            let t = view.tasks.iter().find(|t| t.id == id).unwrap();
            view.now.as_f64() + t.workload / view.max_rate <= t.deadline.as_f64()
        };
        let suffix = order.infeasible.len();
        let prefix = order.ids.len() - suffix;
        prop_assert!(order.ids[..prefix].iter().all(|&id| feasible(id)));
        prop_assert!(order.ids[prefix..].iter().all(|&id| !feasible(id)));
        prop_assert_eq!(&order.ids[prefix..], &order.infeasible[..]);
    }

    #[test]
    fn era_and_pqm_respect_bucket_order(view in any_view()) {
        for kind in [TspKind::Era, TspKind::Pqm] {
            let policy = TspPolicy::new(kind);
            let order = order_queue(&policy, &mut TspRuntime::default(), &view);
            let bucket = |id: u32| {
                let t = view.tasks.iter().find(|t| t.id == id).unwrap();
                let p = t.workload / view.max_rate;
                let slack = (t.deadline - view.now).as_f64();
                match kind {
                    TspKind::Era => {
                        if slack / p < policy.era_thresholds.0 {
                            0
                        } else if slack / p < policy.era_thresholds.1 {
                            1
                        } else {
                            2
                        }
                    }
                    _ => {
                        if slack <= policy.pqm_factor * p {
                            0
                        } else {
                            1
                        }
                    }
                }
            };
            prop_assert!(order.ids.windows(2).all(|w| bucket(w[0]) <= bucket(w[1])));
        }
    }
}

// ── Resource-selection properties ───────────────────────────────────────────

proptest! {
    #[test]
    fn sars_pick_is_the_score_argmax(
        pus in pu_snapshots(4, 12),
        task in any_task(),
        now in 0..60_000i64,
        alpha in 0.5f64..1.5,
        sign in prop::bool::ANY,
    ) {
        let snapshot = ResourceSnapshot { now: Time::from_subunits(now), pus };
        let mut policy = RspPolicy::new(RspKind::Sars);
        policy.alpha = alpha;
        policy.beta_sign = if sign { BetaSign::Plus } else { BetaSign::Minus };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rows = suitability_rows(&task, &snapshot, &policy);
        match select_pu(&policy, &task, &snapshot, &mut rng) {
            Selection::Pu(picked) => {
                let row = rows.iter().find(|r| r.pu == picked).unwrap();
                prop_assert!(row.feasible);
                for q in rows.iter().filter(|r| r.feasible) {
                    prop_assert!(row.score >= q.score);
                }
            }
            _ => prop_assert!(rows.iter().all(|r| !r.feasible)),
        }
    }

    #[test]
    fn reserved_units_never_surface(
        pus in pu_snapshots(4, 12),
        task in any_task(),
        now in 0..60_000i64,
    ) {
        let snapshot = ResourceSnapshot { now: Time::from_subunits(now), pus };
        let policy = RspPolicy::new(RspKind::Sars);
        let rows = suitability_rows(&task, &snapshot, &policy);
        for pu in snapshot.pus.iter().filter(|p| p.reserved) {
            prop_assert!(rows.iter().all(|r| r.pu != pu.id));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in RspKind::ALL {
            let mut p = RspPolicy::new(kind);
            p.alpha = 0.9;
            if let Selection::Pu(picked) = select_pu(&p, &task, &snapshot, &mut rng) {
                prop_assert!(!snapshot.pu(picked).unwrap().reserved);
            }
        }
    }

    #[test]
    fn any_returned_unit_meets_the_deadline(
        pus in pu_snapshots(4, 12),
        task in any_task(),
        now in 0..60_000i64,
    ) {
        let snapshot = ResourceSnapshot { now: Time::from_subunits(now), pus };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for kind in RspKind::ALL {
            let policy = RspPolicy::new(kind);
            if let Selection::Pu(picked) = select_pu(&policy, &task, &snapshot, &mut rng) {
                let pu = snapshot.pu(picked).unwrap();
                let est = edgesim::timing::estimate_completion_on(
                    task.workload, pu.rate, pu.busy_until, snapshot.now,
                );
                prop_assert!(est <= task.deadline);
            }
        }
    }

    #[test]
    fn load_factor_is_scale_invariant(
        loads in prop::collection::vec(0i64..1_000_000, 1..40),
        scale in 1i64..50,
    ) {
        let max = *loads.iter().max().unwrap();
        for &load in &loads {
            let base = load_factor(Time::from_subunits(load), Time::from_subunits(max));
            let scaled = load_factor(
                Time::from_subunits(load * scale),
                Time::from_subunits(max * scale),
            );
            prop_assert!((base - scaled).abs() <= 1e-12);
        }
    }

    // Shifting every busy_until by the same amount shifts every score by
    // (1 - alpha) * shift; when the feasible set survives, the argmax does too.
    #[test]
    fn uniform_est_shift_preserves_the_argmax(
        pus in pu_snapshots(3, 8),
        task in any_task(),
        alpha in 0.5f64..1.5,
        shift in 1i64..5_000,
    ) {
        let now = Time::from_subunits(70_000);
        // Put every unit behind `now` so busy_until, not now, decides starts.
        let base: Vec<PuSnapshot> = pus
            .iter()
            .map(|p| PuSnapshot {
                busy_until: now + Time::from_subunits(p.busy_until.subunits()),
                reserved: false,
                ..*p
            })
            .collect();
        let shifted: Vec<PuSnapshot> = base
            .iter()
            .map(|p| PuSnapshot {
                busy_until: p.busy_until + Time::from_subunits(shift),
                ..*p
            })
            .collect();
        let mut policy = RspPolicy::new(RspKind::Sars);
        policy.alpha = alpha;
        // Deadline far enough out that the shifted rows stay feasible.
        let mut task = task;
        task.deadline = Time::from_subunits(400_000);

        let snap_a = ResourceSnapshot { now, pus: base };
        let snap_b = ResourceSnapshot { now, pus: shifted };
        let rows_a = suitability_rows(&task, &snap_a, &policy);
        let rows_b = suitability_rows(&task, &snap_b, &policy);
        let delta = (1.0 - alpha) * Time::from_subunits(shift).as_f64();
        for (a, b) in rows_a.iter().zip(&rows_b) {
            prop_assert!((b.score - (a.score + delta)).abs() < 1e-6);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pick_a = select_pu(&policy, &task, &snap_a, &mut rng);
        let pick_b = select_pu(&policy, &task, &snap_b, &mut rng);
        prop_assert_eq!(pick_a, pick_b);
    }
}

// ── Direct-formula sorter oracles ───────────────────────────────────────────
//
// A second, independently coded sorter for the formula-driven policies:
// compute each key straight from the definition, sort with the documented
// tie-break, and demand the identical permutation on 1000 random queues.

#[test]
fn formula_policies_match_a_naive_sorter() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for case in 0..1000 {
        let n = rng.gen_range(1..=16usize);
        let max_rate = rng.gen_range(0.5..1.2);
        let now = Time::from_units(rng.gen_range(0..80));
        let tasks: Vec<QueuedTask> = (0..n)
            .map(|i| {
                let arrival = rng.gen_range(0..80_000i64);
                QueuedTask {
                    id: i as u32,
                    broker_arrival: Time::from_subunits(arrival),
                    deadline: Time::from_subunits(arrival + rng.gen_range(0..50_000i64)),
                    workload: rng.gen_range(0.5..12.0),
                }
            })
            .collect();
        let view = QueueView { now, tasks, max_rate };

        let naive = |key: &dyn Fn(&QueuedTask) -> f64, ascending: bool| -> Vec<u32> {
            let mut order: Vec<&QueuedTask> = view.tasks.iter().collect();
            order.sort_by(|a, b| {
                let k = if ascending {
                    key(a).total_cmp(&key(b))
                } else {
                    key(b).total_cmp(&key(a))
                };
                k.then((a.broker_arrival, a.id).cmp(&(b.broker_arrival, b.id)))
            });
            order.into_iter().map(|t| t.id).collect()
        };
        let p = |t: &QueuedTask| t.workload / max_rate;
        let slack = |t: &QueuedTask| (t.deadline - now).as_f64();

        let cr = naive(&|t| slack(t) / p(t), true);
        let covert = naive(
            &|t| (1.0 / p(t)) * f64::max(0.0, 1.0 - f64::max(0.0, slack(t) - p(t)) / (2.0 * p(t))),
            false,
        );
        // EFDF: feasible in edf order, then infeasible in edf order.
        let efdf = {
            let mut feasible: Vec<&QueuedTask> = Vec::new();
            let mut late: Vec<&QueuedTask> = Vec::new();
            for t in &view.tasks {
                if now.as_f64() + p(t) <= t.deadline.as_f64() {
                    feasible.push(t);
                } else {
                    late.push(t);
                }
            }
            let by_deadline = |a: &&QueuedTask, b: &&QueuedTask| {
                (a.deadline, a.broker_arrival, a.id).cmp(&(b.deadline, b.broker_arrival, b.id))
            };
            feasible.sort_by(by_deadline);
            late.sort_by(by_deadline);
            feasible
                .into_iter()
                .chain(late)
                .map(|t| t.id)
                .collect::<Vec<_>>()
        };

        for (kind, want) in [
            (TspKind::Cr, cr),
            (TspKind::Covert, covert),
            (TspKind::Efdf, efdf),
        ] {
            let got = order_queue(&TspPolicy::new(kind), &mut TspRuntime::default(), &view);
            assert_eq!(got.ids, want, "case {case}: {kind} disagreed with the naive sorter");
        }
    }
}

// Brute-force earliest start from a replayed commitment list: committing a
// sequence of jobs and then estimating must equal walking the schedule.
#[test]
fn completion_estimate_matches_schedule_walk() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(0xCAFE);
    for _ in 0..1000 {
        let rate = rng.gen_range(0.5..1.2);
        let mut schedule: Vec<(Time, Time)> = Vec::new();
        let mut busy_until = Time::ZERO;
        let mut clock = Time::ZERO;
        for _ in 0..rng.gen_range(0..8usize) {
            clock = clock + Time::from_subunits(rng.gen_range(0..5_000));
            let pro = Time::from_f64(rng.gen_range(0.5..9.0) / rate);
            let start = clock.max(busy_until);
            schedule.push((start, start + pro));
            busy_until = start + pro;
        }
        let now = clock + Time::from_subunits(rng.gen_range(0..5_000));
        let workload = rng.gen_range(0.5..9.0);

        // Oracle: earliest start is after the last committed interval (or
        // now), walked from the schedule itself rather than busy_until.
        let walk_start = schedule.iter().fold(now, |acc, &(_, end)| acc.max(end));
        let want = walk_start + Time::from_f64(workload / rate);

        let got = edgesim::timing::estimate_completion_on(workload, rate, busy_until, now);
        assert_eq!(got, want);
    }
}

// ── End-to-end engine properties ────────────────────────────────────────────

fn small_scenario(vehicles: u32, servers: u32, pus: (u32, u32), tasks_per_group: u32) -> Scenario {
    let mut s = Scenario::default();
    s.vehicles = vehicles;
    s.rsus = 1 + vehicles / 2;
    s.servers = servers;
    s.pu_count = pus;
    s.groups = s
        .groups
        .into_iter()
        .map(|g| GroupSpec {
            count: tasks_per_group,
            ..g
        })
        .collect();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_run_conserves_tasks_and_passes_verification(
        seed in 0u64..10_000,
        vehicles in 1u32..=4,
        servers in 1u32..=4,
        pu_lo in 2u32..=4,
        pu_extra in 0u32..=4,
        tasks_per_group in 1u32..=25,
        tsp in any_tsp(),
        rsp_pick in 0usize..4,
        pora in prop::bool::ANY,
    ) {
        let mut scenario = small_scenario(vehicles, servers, (pu_lo, pu_lo + pu_extra), tasks_per_group);
        scenario.seed = seed;
        scenario.sweep.pora_k = 1;
        let rsp = RspKind::ALL[rsp_pick];
        let pora = pora && rsp == RspKind::Sars;
        let mut config = scenario
            .engine_config(seed, tsp, rsp, pora, 0.9)
            .unwrap();
        config.debug_checks = true; // run() panics on any violation
        let report = edgesim::engine::run(config).unwrap();
        let total = report.tasks.len();
        prop_assert_eq!(total as u32, tasks_per_group * 4);
        let metrics = edgesim::metrics::compute_tcr(&report);
        let terminal_invalid = metrics.invalid.no_feasible_pu
            + metrics.invalid.no_reserved_pu
            + metrics.invalid.arrival_infeasible;
        prop_assert_eq!(metrics.n_pt + terminal_invalid, total as u32);
    }

    #[test]
    fn verify_report_recount_matches_metrics(seed in 0u64..1_000) {
        let mut scenario = small_scenario(2, 2, (2, 3), 10);
        scenario.seed = seed;
        let config = scenario
            .engine_config(seed, TspKind::Edf, RspKind::LatestFeasible, false, 0.9)
            .unwrap();
        let report = edgesim::engine::run(config).unwrap();
        prop_assert!(edgesim::engine::verify_report(&report).is_empty());
        let m = edgesim::metrics::compute_tcr(&report);
        // Completed implies processed here: the verifier enforces
        // completion <= deadline for every completed task.
        let completed = report
            .tasks
            .iter()
            .filter(|t| t.state == edgesim::domain::TaskState::Completed)
            .count() as u32;
        prop_assert_eq!(m.n_pt, completed);
    }
}
