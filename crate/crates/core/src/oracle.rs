//! Independent brute-force and numerical cross-checks: exhaustive
//! permutation minima, direct evaluations of the closed-form bounds, and
//! seeded ratio sweeps against the proven guarantees.
//!
//! Ratios are certified against the lower bound, not the unknown optimum;
//! a pass against LB is strictly stronger. A ratio below 1 would mean the
//! bound or the schedule accounting is wrong.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dedicated2;
use crate::duropt::{self, WeightedProgram};
use crate::gadgets::{self, WorkMode};
use crate::listsched;
use crate::model::{total_completion, Alpha, Demand, Instance, Job, JobId, JobKind};
use crate::sequencing::{self, Permutation};
use crate::{Error, Result};

/// Factorial guard for exhaustive enumeration.
pub const MAX_EXHAUSTIVE_N: usize = 8;

/// Exact minimum of an objective over all permutations of `ids`, by
/// iterative lexicographic enumeration (O(n) memory).
pub fn min_over_permutations<F>(ids: &[JobId], mut eval: F) -> Result<(Permutation, f64)>
where
    F: FnMut(&[JobId]) -> Result<f64>,
{
    if ids.len() > MAX_EXHAUSTIVE_N {
        return Err(Error::TooLarge { n: ids.len(), max: MAX_EXHAUSTIVE_N });
    }
    if ids.is_empty() {
        return Err(Error::BadPermutation("no jobs to order".to_string()));
    }
    let mut current: Vec<JobId> = ids.to_vec();
    current.sort_unstable();
    let mut best: Option<(Vec<JobId>, f64)> = None;
    loop {
        let value = eval(&current)?;
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((current.clone(), value));
        }
        if !next_permutation(&mut current) {
            break;
        }
    }
    let (order, value) = best.expect("at least one permutation");
    Ok((Permutation::from_ids(order), value))
}

fn next_permutation(v: &mut [JobId]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Exact `min over pi of LB(pi)` for a kind-specific program builder,
/// each candidate evaluated through the closed-form solver.
pub fn min_lb_over_permutations<F>(inst: &Instance, mut program: F) -> Result<(Permutation, f64)>
where
    F: FnMut(&Permutation, &Instance) -> Result<WeightedProgram>,
{
    let ids = inst.job_ids();
    if ids.len() > MAX_EXHAUSTIVE_N {
        return Err(Error::TooLarge { n: ids.len(), max: MAX_EXHAUSTIVE_N });
    }
    let mut best: Option<(Permutation, f64)> = None;
    let mut current = ids.clone();
    current.sort_unstable();
    loop {
        let pi = Permutation::new(current.clone(), inst)?;
        let value = duropt::solve_weighted(&program(&pi, inst)?)?.objective;
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((pi, value));
        }
        if !next_permutation(&mut current) {
            break;
        }
    }
    best.ok_or_else(|| Error::BadPermutation("no jobs to order".to_string()))
}

/// Direct evaluation of the rigid bound for a fixed sequence, independent
/// of the duration-program solver:
/// `E^(1/(1-a))/m * (sum_i W_i size_i^(1/a) (size_i (n-i+0.5) + 0.5 m)^((a-1)/a))^(a/(a-1))`.
pub fn lb_rigid_direct(pi: &Permutation, inst: &Instance) -> Result<f64> {
    let a = inst.alpha.get();
    let n = pi.len() as f64;
    let m = inst.m as f64;
    let mut sum = 0.0;
    for (i, id) in pi.iter().enumerate() {
        let job = inst.job(id).ok_or_else(|| Error::BadPermutation(format!("unknown job {id}")))?;
        let Demand::Rigid { size } = job.demand else {
            return Err(Error::KindMismatch { expected: "rigid" });
        };
        let size = size as f64;
        let w = job.total_work / size;
        let pos = (i + 1) as f64;
        sum += w * size.powf(1.0 / a) * (size * (n - pos + 0.5) + 0.5 * m).powf((a - 1.0) / a);
    }
    Ok(inst.energy.powf(1.0 / (1.0 - a)) / m * sum.powf(a / (a - 1.0)))
}

/// Direct evaluation of the moldable bound for a fixed sequence:
/// `E^(1/(1-a))/m * (sum_j V_j (n-j+0.5 + 0.5 m/delta_j)^((a-1)/a))^(a/(a-1))`.
pub fn lb_moldable_direct(pi: &Permutation, inst: &Instance) -> Result<f64> {
    let a = inst.alpha.get();
    let n = pi.len() as f64;
    let m = inst.m as f64;
    let mut sum = 0.0;
    for (i, id) in pi.iter().enumerate() {
        let job = inst.job(id).ok_or_else(|| Error::BadPermutation(format!("unknown job {id}")))?;
        let Demand::Moldable { delta } = job.demand else {
            return Err(Error::KindMismatch { expected: "moldable" });
        };
        let pos = (i + 1) as f64;
        sum += job.total_work * (n - pos + 0.5 + 0.5 * m / delta as f64).powf((a - 1.0) / a);
    }
    Ok(inst.energy.powf(1.0 / (1.0 - a)) / m * sum.powf(a / (a - 1.0)))
}

/// Direct evaluation of one dedicated subproblem's optimum for a fixed
/// sequence: `E^(1/(1-a)) * (sum_j W_j |fix_j|^(1/a) (n'-j+1)^((a-1)/a))^(a/(a-1))`.
pub fn sumc_dedicated_direct(jobs_in_order: &[&Job], budget: f64, alpha: Alpha) -> f64 {
    let a = alpha.get();
    let n = jobs_in_order.len() as f64;
    let sum: f64 = jobs_in_order
        .iter()
        .enumerate()
        .map(|(i, job)| {
            let f = match &job.demand {
                Demand::Dedicated { fix } => fix.len() as f64,
                _ => 1.0,
            };
            let w = job.total_work / f;
            w * f.powf(1.0 / a) * (n - (i + 1) as f64 + 1.0).powf((a - 1.0) / a)
        })
        .sum();
    budget.powf(1.0 / (1.0 - a)) * sum.powf(a / (a - 1.0))
}

/// The pipelines whose ratios the sweeps certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Rigid,
    Moldable,
    /// Two-processor dedicated, stopping at the normalized preemptive stage.
    Dedicated2Preemptive,
    /// Two-processor dedicated, including the idle-insertion stage.
    Dedicated2,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Rigid => "rigid",
            Algo::Moldable => "moldable",
            Algo::Dedicated2Preemptive => "dedicated2-preemptive",
            Algo::Dedicated2 => "dedicated2",
        }
    }

    /// The proven approximation guarantee for this pipeline.
    pub fn bound(self, alpha: Alpha) -> f64 {
        let a = alpha.get();
        match self {
            Algo::Rigid | Algo::Moldable => 2.0,
            Algo::Dedicated2Preemptive => 2.0_f64.powf(a / (a - 1.0)),
            Algo::Dedicated2 => 2.0_f64.powf((2.0 * a - 1.0) / (a - 1.0)),
        }
    }
}

/// One row of a ratio sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RatioRecord {
    pub instance_id: u64,
    pub algorithm: &'static str,
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
    pub lb: f64,
    pub sumc: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Runs the pipeline on one instance and records the achieved ratio
/// against the proven bound. `pass` holds iff `ratio <= bound * (1+1e-9)`.
pub fn check_ratio(inst: &Instance, algo: Algo, instance_id: u64) -> Result<RatioRecord> {
    let (sumc, lb) = match algo {
        Algo::Rigid => {
            let (sched, lb) = listsched::schedule_rigid(inst)?;
            (total_completion(&sched), lb.value)
        }
        Algo::Moldable => {
            let (sched, lb) = listsched::schedule_moldable(inst)?;
            (total_completion(&sched), lb.value)
        }
        Algo::Dedicated2Preemptive => {
            let run = dedicated2::schedule_dedicated2(inst, true)?;
            (total_completion(&run.normalized), run.lb.value)
        }
        Algo::Dedicated2 => {
            let run = dedicated2::schedule_dedicated2(inst, false)?;
            (total_completion(run.result()), run.lb.value)
        }
    };
    let ratio = sumc / lb;
    let bound = algo.bound(inst.alpha);
    Ok(RatioRecord {
        instance_id,
        algorithm: algo.name(),
        n: inst.n(),
        m: inst.m,
        alpha: inst.alpha.get(),
        lb,
        sumc,
        ratio,
        bound,
        pass: ratio <= bound * (1.0 + 1e-9),
    })
}

/// Deterministic instance stream for a sweep: instance `i` of a seed is
/// always the same, independent of how many are drawn.
pub fn sweep_instance(algo: Algo, seed: u64, index: u64, alpha: Alpha) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(index + 1)));
    let n = rng.random_range(1..=10);
    let child_seed: u64 = rng.random();
    match algo {
        Algo::Rigid => {
            let m = rng.random_range(2..=8);
            gadgets::gen_random(JobKind::Rigid, n, m, child_seed, alpha, WorkMode::Identical)
        }
        Algo::Moldable => {
            let m = rng.random_range(2..=8);
            gadgets::gen_random(JobKind::Moldable, n, m, child_seed, alpha, WorkMode::Free)
        }
        Algo::Dedicated2Preemptive | Algo::Dedicated2 => {
            gadgets::gen_random(JobKind::Dedicated, n, 2, child_seed, alpha, WorkMode::Free)
        }
    }
}

/// Seeded ratio sweep of `count` instances.
pub fn run_sweep(algo: Algo, count: u64, seed: u64, alpha: Alpha) -> Result<Vec<RatioRecord>> {
    (0..count)
        .map(|i| check_ratio(&sweep_instance(algo, seed, i, alpha), algo, i))
        .collect()
}

fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Renders sweep records as CSV, sorted by instance id.
pub fn ratio_table_csv(records: &[RatioRecord]) -> String {
    let mut rows: Vec<&RatioRecord> = records.iter().collect();
    rows.sort_by_key(|r| r.instance_id);
    let mut out = String::from("id,n,m,alpha,lb,sumc,ratio,bound,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.instance_id,
            r.n,
            r.m,
            sig9(r.alpha),
            sig9(r.lb),
            sig9(r.sumc),
            sig9(r.ratio),
            sig9(r.bound),
            r.pass
        ));
    }
    out
}

/// One-line sweep summary: count, worst ratio, bound, overall verdict.
pub fn sweep_summary(records: &[RatioRecord]) -> String {
    let worst = records.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let bound = records.first().map_or(f64::NAN, |r| r.bound);
    let all_pass = records.iter().all(|r| r.pass);
    format!(
        "instances={} max_ratio={} bound={} all_pass={}",
        records.len(),
        sig9(worst),
        sig9(bound),
        all_pass
    )
}

/// A random weighted program (`n <= max_n`, entries log-uniform) for the
/// closed-form/numeric agreement checks.
pub fn random_program<R: Rng>(rng: &mut R, max_n: usize, alpha: Alpha) -> WeightedProgram {
    let n = rng.random_range(1..=max_n);
    let weights = (0..n).map(|_| gadgets::log_uniform(rng, 0.1, 10.0)).collect();
    let coeffs = (0..n).map(|_| gadgets::log_uniform(rng, 0.1, 10.0)).collect();
    let budget = gadgets::log_uniform(rng, 0.5 * n as f64, 5.0 * n as f64);
    WeightedProgram::new(weights, coeffs, budget, alpha).expect("positive entries")
}

/// Cross-check report: failures are rows, not panics.
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// For `count` seeded random programs, checks that the closed form and the
/// bisection oracle agree (1e-8), and that the rigid bound equals its
/// direct evaluation (1e-12) on seeded rigid instances.
pub fn crosscheck_closed_forms(seed: u64, count: usize) -> CrosscheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphas = [1.5, 2.0, 3.0];
    let mut failures = Vec::new();
    for i in 0..count {
        let alpha = Alpha::new_unchecked(alphas[i % alphas.len()]);
        let prog = random_program(&mut rng, 50, alpha);
        match (duropt::solve_weighted(&prog), duropt::solve_weighted_numeric(&prog)) {
            (Ok(closed), Ok(numeric)) => {
                if rel_err(closed.objective, numeric.objective) > 1e-8 {
                    failures.push(format!("program {i}: objectives disagree"));
                }
                for (k, (a, b)) in closed.durations.iter().zip(&numeric.durations).enumerate() {
                    if rel_err(*a, *b) > 1e-8 {
                        failures.push(format!("program {i}: duration {k} disagrees"));
                        break;
                    }
                }
            }
            (c, n) => failures.push(format!("program {i}: solver error {c:?} / {n:?}")),
        }

        let inst_seed: u64 = rng.random();
        let n_jobs = rng.random_range(1..=10);
        let inst =
            gadgets::gen_random(JobKind::Rigid, n_jobs, rng.random_range(2..=8), inst_seed, alpha, WorkMode::Free);
        let pi = Permutation::identity(&inst);
        match (sequencing::lb_rigid(&pi, &inst), lb_rigid_direct(&pi, &inst)) {
            (Ok(lb), Ok(direct)) => {
                if rel_err(lb.value, direct) > 1e-12 {
                    failures.push(format!("rigid instance {i}: LB routes disagree"));
                }
            }
            (l, d) => failures.push(format!("rigid instance {i}: LB error {l:?} / {d:?}")),
        }
    }
    CrosscheckReport { checked: count, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn next_permutation_enumerates_all() {
        let mut v = vec![0 as JobId, 1, 2];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 6);
        assert_eq!(v, vec![2, 1, 0]);
    }

    #[test]
    fn min_over_permutations_guards_size() {
        let ids: Vec<JobId> = (0..9).collect();
        assert!(matches!(
            min_over_permutations(&ids, |_| Ok(0.0)),
            Err(Error::TooLarge { n: 9, .. })
        ));
    }

    #[test]
    fn single_job_minimum_is_identity() {
        let inst = gadgets::gen_random(
            JobKind::Rigid,
            1,
            2,
            5,
            Alpha::new_unchecked(2.0),
            WorkMode::Identical,
        );
        let (pi, value) = min_lb_over_permutations(&inst, sequencing::rigid_program).unwrap();
        assert_eq!(pi.as_slice(), inst.job_ids().as_slice());
        let direct = sequencing::lb_rigid(&pi, &inst).unwrap();
        assert!(rel(value, direct.value) < 1e-12);
    }

    #[test]
    fn rigid_rule_matches_exhaustive_minimum() {
        for seed in 0..40 {
            let inst = gadgets::gen_random(
                JobKind::Rigid,
                (seed as usize % 6) + 1,
                4,
                seed,
                Alpha::new_unchecked(3.0),
                WorkMode::Identical,
            );
            let rule = sequencing::order_rigid(&inst).unwrap();
            let rule_value = sequencing::lb_rigid(&rule, &inst).unwrap().value;
            let (_, min_value) = min_lb_over_permutations(&inst, sequencing::rigid_program).unwrap();
            assert!(rule_value >= min_value - 1e-9 * min_value);
            assert!(rel(rule_value, min_value) < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn dedicated_rule_matches_exhaustive_minimum() {
        for seed in 0..40 {
            let inst = gadgets::gen_random(
                JobKind::Dedicated,
                (seed as usize % 6) + 1,
                2,
                seed,
                Alpha::new_unchecked(2.0),
                WorkMode::Free,
            );
            let lb = sequencing::lb_dedicated2(&inst, inst.energy).unwrap();
            let (j1, _, j12) = dedicated2::split_sets(&inst).unwrap();
            let side: Vec<JobId> = j1.iter().chain(j12.iter()).copied().collect();
            if side.is_empty() {
                continue;
            }
            let (_, min_value) = min_over_permutations(&side, |ids| {
                let jobs: Vec<&Job> = ids.iter().map(|&id| inst.job(id).unwrap()).collect();
                Ok(sumc_dedicated_direct(&jobs, inst.energy, inst.alpha))
            })
            .unwrap();
            assert!(rel(lb.side1.value, min_value) < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn ratio_records_pass_on_anchor_instances() {
        // a single job filling the whole machine: LB weight is 1, so the
        // bound is tight and the ratio exactly 1
        let inst = Instance::new(
            JobKind::Rigid,
            1,
            2.5,
            Alpha::new_unchecked(2.0),
            vec![Job::rigid(0, 1.0, 1)],
        );
        let rec = check_ratio(&inst, Algo::Rigid, 0).unwrap();
        assert!(rel(rec.ratio, 1.0) < 1e-9);
        assert!(rec.pass);

        // a narrow single job: the ratio stays within the sandwich
        let inst = gadgets::gen_random(
            JobKind::Rigid,
            1,
            4,
            11,
            Alpha::new_unchecked(2.0),
            WorkMode::Identical,
        );
        let rec = check_ratio(&inst, Algo::Rigid, 1).unwrap();
        assert!(rec.ratio >= 1.0 - 1e-9 && rec.ratio <= 2.0 + 1e-9);
        assert!(rec.pass);
    }

    #[test]
    fn sweeps_pass_their_bounds() {
        for algo in [Algo::Rigid, Algo::Moldable, Algo::Dedicated2Preemptive, Algo::Dedicated2] {
            let records = run_sweep(algo, 60, 42, Alpha::new_unchecked(3.0)).unwrap();
            assert_eq!(records.len(), 60);
            for r in &records {
                assert!(r.pass, "{algo:?} instance {} ratio {} > {}", r.instance_id, r.ratio, r.bound);
                assert!(r.ratio >= 1.0 - 1e-9, "{algo:?} instance {} ratio {}", r.instance_id, r.ratio);
            }
        }
    }

    #[test]
    fn csv_is_deterministic_and_ordered() {
        let records = run_sweep(Algo::Rigid, 10, 7, Alpha::new_unchecked(2.0)).unwrap();
        let a = ratio_table_csv(&records);
        let b = ratio_table_csv(&records);
        assert_eq!(a, b);
        assert!(a.starts_with("id,n,m,alpha,lb,sumc,ratio,bound,pass\n"));
        assert_eq!(a.lines().count(), 11);
    }

    #[test]
    fn crosscheck_reports_no_failures() {
        let report = crosscheck_closed_forms(42, 50);
        assert_eq!(report.checked, 50);
        assert!(report.failures.is_empty(), "{:?}", report.failures);
    }

    #[test]
    fn bounds_formulae() {
        let a2 = Alpha::new_unchecked(2.0);
        assert!(rel(Algo::Dedicated2Preemptive.bound(a2), 4.0) < 1e-12);
        assert!(rel(Algo::Dedicated2.bound(a2), 8.0) < 1e-12);
        let a3 = Alpha::new_unchecked(3.0);
        assert!(rel(Algo::Dedicated2Preemptive.bound(a3), 2.0_f64.powf(1.5)) < 1e-12);
        assert!(rel(Algo::Dedicated2.bound(a3), 2.0_f64.powf(2.5)) < 1e-12);
    }
}
