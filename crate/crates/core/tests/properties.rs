//! Property tests: algebraic invariants of the duration program and the
//! accounting, plus seeded structural checks of every pipeline stage.

use proptest::prelude::*;

use espeed_core::dedicated2::{self, schedule_dedicated2};
use espeed_core::duropt::{budget_residual, solve_weighted, solve_weighted_numeric, WeightedProgram};
use espeed_core::gadgets::{gen_random, WorkMode};
use espeed_core::listsched::{self, busy_at_events, verify_schedule, VerifyOptions};
use espeed_core::model::{energy_of, total_completion, Piece, Schedule};
use espeed_core::oracle;
use espeed_core::sequencing;
use espeed_core::{Alpha, Instance, JobId, JobKind};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn alpha_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5), Just(2.0), Just(3.0)]
}

fn program_strategy() -> impl Strategy<Value = WeightedProgram> {
    (
        prop::collection::vec((0.1f64..10.0, 0.1f64..10.0), 1..12),
        0.5f64..50.0,
        alpha_strategy(),
    )
        .prop_map(|(rows, budget, a)| {
            let (weights, coeffs) = rows.into_iter().unzip();
            WeightedProgram::new(weights, coeffs, budget, Alpha::new_unchecked(a)).unwrap()
        })
}

proptest! {
    #[test]
    fn duropt_constraint_is_tight(prog in program_strategy()) {
        let sol = solve_weighted(&prog).unwrap();
        prop_assert!(budget_residual(&prog, &sol.durations).abs() <= 1e-9 * prog.budget);
    }

    #[test]
    fn duropt_closed_form_matches_bisection(prog in program_strategy()) {
        let closed = solve_weighted(&prog).unwrap();
        let numeric = solve_weighted_numeric(&prog).unwrap();
        prop_assert!(rel(closed.objective, numeric.objective) <= 1e-8);
        for (a, b) in closed.durations.iter().zip(&numeric.durations) {
            prop_assert!(rel(*a, *b) <= 1e-8);
        }
    }

    #[test]
    fn duropt_budget_scaling(prog in program_strategy(), t in 0.2f64..5.0) {
        let base = solve_weighted(&prog).unwrap();
        let scaled_prog = WeightedProgram::new(
            prog.weights.clone(),
            prog.energy_coeffs.clone(),
            prog.budget * t,
            prog.alpha,
        )
        .unwrap();
        let scaled = solve_weighted(&scaled_prog).unwrap();
        let factor = t.powf(1.0 / (1.0 - prog.alpha.get()));
        prop_assert!(rel(scaled.objective, base.objective * factor) <= 1e-9);
        for (p, q) in base.durations.iter().zip(&scaled.durations) {
            prop_assert!(rel(*q, p * factor) <= 1e-9);
        }
    }

    #[test]
    fn duropt_raising_a_weight_shrinks_its_duration(prog in program_strategy(), bump in 1.1f64..4.0) {
        let base = solve_weighted(&prog).unwrap();
        let i = prog.weights.len() / 2;
        let mut weights = prog.weights.clone();
        weights[i] *= bump;
        let bumped = solve_weighted(
            &WeightedProgram::new(weights, prog.energy_coeffs.clone(), prog.budget, prog.alpha).unwrap(),
        )
        .unwrap();
        if prog.len() == 1 {
            // the tight constraint pins a lone duration regardless of weight
            prop_assert!(rel(bumped.durations[0], base.durations[0]) <= 1e-12);
        } else {
            prop_assert!(bumped.durations[i] < base.durations[i]);
        }
    }
}

fn scale_schedule(sched: &Schedule, t: f64) -> Schedule {
    Schedule::from_pieces(
        sched
            .pieces()
            .iter()
            .map(|p| Piece::new(p.job, p.procs.iter().copied(), p.start * t, p.end * t, p.speed / t))
            .collect(),
    )
}

proptest! {
    #[test]
    fn accounting_time_scaling(seed in 0u64..500, t in 1.01f64..5.0) {
        let inst = gen_random(JobKind::Rigid, 5, 6, seed, Alpha::new_unchecked(3.0), WorkMode::Identical);
        let (sched, _) = listsched::schedule_rigid(&inst).unwrap();
        let scaled = scale_schedule(&sched, t);
        let a = inst.alpha.get();
        let e0 = energy_of(&sched, &inst).unwrap();
        let e1 = energy_of(&scaled, &inst).unwrap();
        prop_assert!(rel(e1, e0 * t.powf(1.0 - a)) <= 1e-9);
        prop_assert!(rel(total_completion(&scaled), total_completion(&sched) * t) <= 1e-9);
    }

    #[test]
    fn accounting_storage_order_irrelevant(seed in 0u64..500) {
        let inst = gen_random(JobKind::Rigid, 6, 6, seed, Alpha::new_unchecked(2.0), WorkMode::Identical);
        let (sched, _) = listsched::schedule_rigid(&inst).unwrap();
        let mut pieces = sched.pieces().to_vec();
        pieces.reverse();
        let reordered = Schedule::from_pieces(pieces);
        prop_assert!(rel(total_completion(&reordered), total_completion(&sched)) <= 1e-12);
        prop_assert!(rel(
            energy_of(&reordered, &inst).unwrap(),
            energy_of(&sched, &inst).unwrap()
        ) <= 1e-12);
    }
}

#[test]
fn lb_value_invariant_under_relabeling() {
    for seed in 0..50u64 {
        let inst = gen_random(JobKind::Rigid, 6, 6, seed, Alpha::new_unchecked(2.0), WorkMode::Identical);
        let mut relabeled = inst.clone();
        let max_id = inst.jobs.iter().map(|j| j.id).max().unwrap();
        for job in &mut relabeled.jobs {
            job.id = max_id - job.id;
        }
        let v1 = sequencing::lb_rigid(&sequencing::order_rigid(&inst).unwrap(), &inst)
            .unwrap()
            .value;
        let v2 = sequencing::lb_rigid(&sequencing::order_rigid(&relabeled).unwrap(), &relabeled)
            .unwrap()
            .value;
        assert!(rel(v1, v2) < 1e-9, "seed {seed}");
    }
}

#[test]
fn list_schedule_output_is_feasible_and_work_conserving() {
    for seed in 0..1000u64 {
        let kind = if seed % 2 == 0 { JobKind::Rigid } else { JobKind::Moldable };
        let n = (seed as usize % 9) + 1;
        let m = (seed as usize % 7) + 2;
        let mode = if kind == JobKind::Rigid { WorkMode::Identical } else { WorkMode::Free };
        let inst = gen_random(kind, n, m, seed, Alpha::new_unchecked(3.0), mode);
        let (sched, lb) = match kind {
            JobKind::Rigid => listsched::schedule_rigid(&inst).unwrap(),
            _ => listsched::schedule_moldable(&inst).unwrap(),
        };
        let report = verify_schedule(&sched, &inst, VerifyOptions::default());
        assert!(report.feasible(), "seed {seed}: {:?}", report.violations);
        assert!(report.nonpreemptive, "seed {seed}");

        let ratio = report.total_completion / lb.value;
        assert!(
            (1.0 - 1e-9..=2.0 * (1.0 + 1e-9)).contains(&ratio),
            "seed {seed}: ratio {ratio}"
        );

        // whenever some job has not started yet, strictly more than m/2
        // processors are busy
        let starts: Vec<(JobId, f64)> = inst
            .jobs
            .iter()
            .map(|j| {
                let s = sched
                    .pieces()
                    .iter()
                    .filter(|p| p.job == j.id)
                    .map(|p| p.start)
                    .fold(f64::INFINITY, f64::min);
                (j.id, s)
            })
            .collect();
        for (t, busy) in busy_at_events(&sched) {
            let waiting = starts.iter().any(|&(_, s)| s > t + 1e-9);
            if waiting {
                assert!(
                    busy as f64 > inst.m as f64 / 2.0,
                    "seed {seed}: {busy} busy of {} at t={t} while a job waits",
                    inst.m
                );
            }
        }
    }
}

#[test]
fn dedicated_pipeline_structure_and_bounds() {
    for seed in 0..1000u64 {
        let n = (seed as usize % 9) + 1;
        let alpha_val = [1.5, 2.0, 3.0][seed as usize % 3];
        let alpha = Alpha::new_unchecked(alpha_val);
        let inst = gen_random(JobKind::Dedicated, n, 2, seed, alpha, WorkMode::Free);
        let run = schedule_dedicated2(&inst, false).unwrap();
        let (j1, j2, j12) = dedicated2::split_sets(&inst).unwrap();

        // the two-processor subsequences of both chains agree
        let sub1_common: Vec<JobId> = run.sub1.order.iter().filter(|id| j12.contains(id)).collect();
        let sub2_common: Vec<JobId> = run.sub2.order.iter().filter(|id| j12.contains(id)).collect();
        assert_eq!(sub1_common, sub2_common, "seed {seed}");

        // merged completions: equality for two-processor jobs, never later
        // for single-processor jobs
        for &id in &j12 {
            let expect = run.sub1.completion_of(id).unwrap().max(run.sub2.completion_of(id).unwrap());
            assert!(rel(run.merged.completion(id).unwrap(), expect) < 1e-9, "seed {seed}");
        }
        for (own, sub) in [(&j1, &run.sub1), (&j2, &run.sub2)] {
            for &id in own.iter() {
                let merged_c = run.merged.completion(id).unwrap();
                assert!(merged_c <= sub.completion_of(id).unwrap() + 1e-9, "seed {seed} job {id}");
            }
        }

        // two-processor pieces are whole and pairwise disjoint
        let mut blocker_spans: Vec<(f64, f64)> = run
            .merged
            .pieces()
            .iter()
            .filter(|p| p.procs.len() == 2)
            .map(|p| (p.start, p.end))
            .collect();
        blocker_spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in blocker_spans.windows(2) {
            assert!(w[1].0 >= w[0].1 - 1e-9, "seed {seed}: blocker intervals overlap");
        }

        // normalization: sum of completions never increases, and afterwards
        // no blocker preempts two jobs
        let merged_sumc = total_completion(&run.merged);
        let norm_sumc = total_completion(&run.normalized);
        assert!(norm_sumc <= merged_sumc * (1.0 + 1e-12) + 1e-12, "seed {seed}");
        let preemptions = dedicated2::preemptions(&run.normalized);
        let mut blockers_seen = std::collections::BTreeSet::new();
        for p in &preemptions {
            assert!(p.g > 0.0 && p.h >= 1, "seed {seed}");
            assert!(blockers_seen.insert(p.blocker), "seed {seed}: blocker {} has two victims", p.blocker);
        }

        // idle-insertion accounting is exact and below the doubling bound
        let npr = run.nonpreemptive.as_ref().unwrap();
        let npr_sumc = total_completion(npr);
        let charge = dedicated2::idle_insertion_charge(&run.normalized);
        assert!(rel(npr_sumc, norm_sumc + charge) < 1e-9, "seed {seed}");
        assert!(npr_sumc < 2.0 * norm_sumc, "seed {seed}");

        // proven ratio bounds at full budget
        let lb = run.lb.value;
        let a = alpha_val;
        assert!(merged_sumc / lb <= 2.0_f64.powf(a / (a - 1.0)) * (1.0 + 1e-9), "seed {seed}");
        assert!(npr_sumc / lb <= 2.0_f64.powf((2.0 * a - 1.0) / (a - 1.0)) * (1.0 + 1e-9), "seed {seed}");
        assert!(norm_sumc / lb >= 1.0 - 1e-9, "seed {seed}");

        // the final schedule is feasible, non-preemptive and within budget
        let report = verify_schedule(npr, &inst, VerifyOptions::default());
        assert!(report.feasible(), "seed {seed}: {:?}", report.violations);
        assert!(report.nonpreemptive, "seed {seed}");
        assert!(report.energy_used <= inst.energy * (1.0 + 1e-9), "seed {seed}");
    }
}

#[test]
fn moldable_rule_matches_exhaustive_minimum_on_identical_works() {
    for seed in 0..60u64 {
        let n = (seed as usize % 6) + 1;
        let inst = gen_random(JobKind::Moldable, n, 5, seed, Alpha::new_unchecked(2.0), WorkMode::Identical);
        let rule = sequencing::order_moldable(&inst).unwrap();
        let rule_value = sequencing::lb_moldable(&rule, &inst).unwrap().value;
        let (_, min_value) =
            oracle::min_lb_over_permutations(&inst, sequencing::moldable_program).unwrap();
        assert!(rule_value >= min_value * (1.0 - 1e-9), "seed {seed}");
        assert!(rel(rule_value, min_value) < 1e-9, "seed {seed}");
    }
}

#[test]
fn moldable_lb_direct_evaluation_agrees() {
    for seed in 0..100u64 {
        let inst = gen_random(JobKind::Moldable, 7, 6, seed, Alpha::new_unchecked(3.0), WorkMode::Free);
        let pi = sequencing::order_moldable(&inst).unwrap();
        let lb = sequencing::lb_moldable(&pi, &inst).unwrap();
        let direct = oracle::lb_moldable_direct(&pi, &inst).unwrap();
        assert!(rel(lb.value, direct) < 1e-12, "seed {seed}");
    }
}

#[test]
fn dedicated_chain_formulas_agree() {
    for seed in 0..100u64 {
        let inst = gen_random(JobKind::Dedicated, 6, 2, seed, Alpha::new_unchecked(1.5), WorkMode::Free);
        let lb = sequencing::lb_dedicated2(&inst, inst.energy).unwrap();
        for side in [&lb.side1, &lb.side2] {
            if side.permutation.is_empty() {
                continue;
            }
            let jobs: Vec<&espeed_core::Job> =
                side.permutation.iter().map(|id| inst.job(id).unwrap()).collect();
            let direct = oracle::sumc_dedicated_direct(&jobs, inst.energy, inst.alpha);
            assert!(rel(side.value, direct) < 1e-12, "seed {seed}");
        }
    }
}

/// The subproblem solutions under half budget keep the same order and
/// scale durations by 2^(1/(alpha-1)).
#[test]
fn half_budget_scaling_preserves_order() {
    for seed in 0..50u64 {
        let inst = gen_random(JobKind::Dedicated, 7, 2, seed, Alpha::new_unchecked(3.0), WorkMode::Free);
        let (f1, f2) = dedicated2::solve_subproblems(&inst, inst.energy).unwrap();
        let (h1, h2) = dedicated2::solve_subproblems(&inst, inst.energy / 2.0).unwrap();
        let factor = 2.0_f64.powf(1.0 / (3.0 - 1.0));
        for (full, half) in [(&f1, &h1), (&f2, &h2)] {
            assert_eq!(full.order, half.order, "seed {seed}");
            for (a, b) in full.durations.iter().zip(&half.durations) {
                assert!(rel(*b, a * factor) < 1e-9, "seed {seed}");
            }
        }
    }
}

#[test]
fn instance_round_trip_through_json() {
    for seed in 0..30u64 {
        for kind in [JobKind::Rigid, JobKind::Moldable, JobKind::Dedicated] {
            let m = if kind == JobKind::Dedicated { 2 } else { 5 };
            let inst = gen_random(kind, 6, m, seed, Alpha::new_unchecked(1.5), WorkMode::Free);
            let parsed = Instance::from_json_str(&inst.to_json_string()).unwrap();
            assert_eq!(inst, parsed);
        }
    }
}
