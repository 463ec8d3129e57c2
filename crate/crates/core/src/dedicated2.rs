//! The two-processor dedicated pipeline: half-budget subschedules, a
//! preemptive merge, preemption normalization, and the idle-insertion
//! transformation to a non-preemptive schedule.
//!
//! Two-processor jobs are pinned to the interval
//! `(max{C', C''} - min{p', p''}, max{C', C''}]` on both processors; these
//! intervals never intersect because both chains schedule the two-processor
//! jobs in the same relative order. Single-processor jobs then fill all
//! remaining time in chain order with no idling, splitting around the
//! pinned intervals where necessary.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{Instance, JobId, JobKind, Demand, Piece, Schedule, TIME_TOL};
use crate::sequencing::{self, Dedicated2Lb, Permutation};
use crate::{Error, Result};

/// Work below this threshold is packing dust and is dropped.
const EPS_WORK: f64 = 1e-12;

/// One chain of a dedicated subproblem: jobs back to back with no idling,
/// so completions are prefix sums of the durations.
#[derive(Debug, Clone, Serialize)]
pub struct SubSchedule {
    pub order: Permutation,
    pub durations: Vec<f64>,
    pub completions: Vec<f64>,
}

impl SubSchedule {
    pub fn from_durations(order: Permutation, durations: Vec<f64>) -> SubSchedule {
        let mut completions = Vec::with_capacity(durations.len());
        let mut t = 0.0;
        for d in &durations {
            t += d;
            completions.push(t);
        }
        SubSchedule { order, durations, completions }
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn completion_of(&self, job: JobId) -> Option<f64> {
        self.order.iter().position(|id| id == job).map(|i| self.completions[i])
    }

    pub fn duration_of(&self, job: JobId) -> Option<f64> {
        self.order.iter().position(|id| id == job).map(|i| self.durations[i])
    }

    pub fn total_completion(&self) -> f64 {
        self.completions.iter().sum()
    }
}

/// Partitions a two-processor dedicated instance into the jobs using only
/// processor 0, only processor 1, and both.
pub fn split_sets(inst: &Instance) -> Result<(Vec<JobId>, Vec<JobId>, Vec<JobId>)> {
    if inst.kind != JobKind::Dedicated {
        return Err(Error::KindMismatch { expected: "dedicated" });
    }
    if inst.m != 2 {
        return Err(Error::NotTwoProcessor(format!("m = {}", inst.m)));
    }
    let mut j1 = Vec::new();
    let mut j2 = Vec::new();
    let mut j12 = Vec::new();
    for job in &inst.jobs {
        let Demand::Dedicated { fix } = &job.demand else {
            return Err(Error::KindMismatch { expected: "dedicated" });
        };
        let procs: Vec<usize> = fix.iter().copied().collect();
        match procs.as_slice() {
            [0] => j1.push(job.id),
            [1] => j2.push(job.id),
            [0, 1] => j12.push(job.id),
            _ => {
                return Err(Error::NotTwoProcessor(format!(
                    "job {} uses processors outside {{0, 1}}",
                    job.id
                )))
            }
        }
    }
    Ok((j1, j2, j12))
}

/// Solves both subproblems under the given budget (callers pass `E/2`) and
/// turns each optimum into a chain.
pub fn solve_subproblems(inst: &Instance, budget: f64) -> Result<(SubSchedule, SubSchedule)> {
    let lb = sequencing::lb_dedicated2(inst, budget)?;
    Ok((
        SubSchedule::from_durations(lb.side1.permutation, lb.side1.durations),
        SubSchedule::from_durations(lb.side2.permutation, lb.side2.durations),
    ))
}

#[derive(Debug, Clone)]
struct Blocker {
    job: JobId,
    start: f64,
    len: f64,
    speed: f64,
}

impl Blocker {
    fn end(&self) -> f64 {
        self.start + self.len
    }
}

#[derive(Debug, Clone)]
struct Single {
    job: JobId,
    dur: f64,
    speed: f64,
}

/// Pinned two-processor intervals plus per-processor single-job chains.
/// The packed schedule is fully determined by this data.
#[derive(Debug, Clone)]
struct Timeline {
    blockers: Vec<Blocker>,
    singles: [Vec<Single>; 2],
}

/// Packs the single-job chains greedily around the blocker intervals:
/// no idling between single-processor pieces, splits where a blocker cuts in.
fn pack(tl: &Timeline) -> Schedule {
    let mut pieces = Vec::new();
    for b in &tl.blockers {
        pieces.push(Piece::new(b.job, [0, 1], b.start, b.end(), b.speed));
    }
    for (proc, singles) in tl.singles.iter().enumerate() {
        let mut t = 0.0_f64;
        let mut idx = 0;
        for s in singles {
            let mut rem = s.dur;
            while rem > EPS_WORK {
                if idx < tl.blockers.len() && tl.blockers[idx].start - t <= EPS_WORK {
                    t = t.max(tl.blockers[idx].end());
                    idx += 1;
                    continue;
                }
                let window = if idx < tl.blockers.len() {
                    tl.blockers[idx].start - t
                } else {
                    f64::INFINITY
                };
                let chunk = rem.min(window);
                if chunk > EPS_WORK {
                    pieces.push(Piece::new(s.job, [proc], t, t + chunk, s.speed));
                }
                t += chunk;
                rem -= chunk;
            }
        }
    }
    Schedule::from_pieces(pieces)
}

/// Rebuilds the timeline view from a packed schedule.
fn timeline_of(sched: &Schedule) -> Timeline {
    let mut by_job: BTreeMap<JobId, Vec<&Piece>> = BTreeMap::new();
    for p in sched.pieces() {
        by_job.entry(p.job).or_default().push(p);
    }
    let mut blockers = Vec::new();
    let mut singles: [Vec<(f64, Single)>; 2] = [Vec::new(), Vec::new()];
    for (&id, pieces) in &by_job {
        if pieces[0].procs.len() == 2 {
            assert_eq!(pieces.len(), 1, "two-processor job {id} must not be preempted");
            let p = pieces[0];
            blockers.push(Blocker { job: id, start: p.start, len: p.len(), speed: p.speed });
        } else {
            let proc = *pieces[0].procs.first().expect("non-empty piece");
            let first = pieces.iter().map(|p| p.start).fold(f64::INFINITY, f64::min);
            let dur = pieces.iter().map(|p| p.len()).sum();
            singles[proc].push((first, Single { job: id, dur, speed: pieces[0].speed }));
        }
    }
    blockers.sort_by(|a, b| a.start.total_cmp(&b.start));
    let strip = |mut v: Vec<(f64, Single)>| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.into_iter().map(|(_, s)| s).collect()
    };
    let [s0, s1] = singles;
    Timeline { blockers, singles: [strip(s0), strip(s1)] }
}

/// Merges the half-budget chains into one feasible preemptive schedule.
///
/// Each two-processor job runs without preemption in
/// `(max{C', C''} - min{p', p''}, max{C', C''}]` at speed
/// `W_j / min{p', p''}`; single-processor jobs keep their chain order and
/// durations and fill all remaining time.
pub fn build_preemptive(inst: &Instance, s1: &SubSchedule, s2: &SubSchedule) -> Result<Schedule> {
    let (j1, j2, j12) = split_sets(inst)?;

    let common1: Vec<JobId> = s1.order.iter().filter(|id| j12.contains(id)).collect();
    let common2: Vec<JobId> = s2.order.iter().filter(|id| j12.contains(id)).collect();
    assert_eq!(common1, common2, "two-processor subsequences of S' and S'' must agree");

    let mut blockers = Vec::with_capacity(j12.len());
    for &id in &j12 {
        let job = inst.job(id).expect("split ids exist");
        let c1 = s1.completion_of(id).expect("two-processor job in S'");
        let c2 = s2.completion_of(id).expect("two-processor job in S''");
        let p1 = s1.duration_of(id).expect("duration in S'");
        let p2 = s2.duration_of(id).expect("duration in S''");
        let end = c1.max(c2);
        let len = p1.min(p2);
        blockers.push(Blocker { job: id, start: end - len, len, speed: job.work_per_proc(2) / len });
    }
    blockers.sort_by(|a, b| a.start.total_cmp(&b.start));
    for w in blockers.windows(2) {
        assert!(
            w[1].start >= w[0].end() - TIME_TOL,
            "two-processor intervals overlap: jobs {} and {}",
            w[0].job,
            w[1].job
        );
    }

    let singles_of = |sub: &SubSchedule, own: &[JobId]| -> Vec<Single> {
        sub.order
            .iter()
            .enumerate()
            .filter(|(_, id)| own.contains(id))
            .map(|(i, id)| {
                let job = inst.job(id).expect("split ids exist");
                Single { job: id, dur: sub.durations[i], speed: job.total_work / sub.durations[i] }
            })
            .collect()
    };
    let tl = Timeline {
        blockers,
        singles: [singles_of(s1, &j1), singles_of(s2, &j2)],
    };
    Ok(pack(&tl))
}

/// Per-processor victim of a blocker: the single-processor job running
/// right up to the blocker's start whose completion lies beyond its end.
/// Returns the job and its amount of work done before the blocker.
fn blocker_victims(packed: &Schedule, b: &Blocker) -> [Option<(JobId, f64)>; 2] {
    let mut out = [None, None];
    for (proc, slot) in out.iter_mut().enumerate() {
        let candidate = packed.pieces().iter().find(|p| {
            p.procs.len() == 1 && p.procs.contains(&proc) && (p.end - b.start).abs() <= TIME_TOL
        });
        if let Some(p) = candidate {
            let completion = packed.completion(p.job).expect("job has pieces");
            if completion > b.end() + TIME_TOL {
                let g: f64 = packed
                    .pieces()
                    .iter()
                    .filter(|q| q.job == p.job && q.end <= b.start + TIME_TOL)
                    .map(|q| q.len())
                    .sum();
                if g > TIME_TOL {
                    *slot = Some((p.job, g));
                }
            }
        }
    }
    out
}

/// Shifts two-victim blockers earlier until every two-processor job
/// preempts at most one single-processor job.
///
/// A blocker with victims on both processors moves left by the smaller of
/// the two pre-blocker works, which aligns its start with that victim's
/// start: the blocker's own completion drops and nobody else's changes.
/// One left-to-right pass suffices; earlier blockers never regress.
pub fn normalize_preemptions(sched: &Schedule) -> Schedule {
    let mut tl = timeline_of(sched);
    for i in 0..tl.blockers.len() {
        let packed = pack(&tl);
        let victims = blocker_victims(&packed, &tl.blockers[i]);
        if let [Some((_, g0)), Some((_, g1))] = victims {
            let shift = g0.min(g1);
            let prev_end = if i > 0 { tl.blockers[i - 1].end() } else { 0.0 };
            debug_assert!(
                tl.blockers[i].start - shift >= prev_end - TIME_TOL,
                "normalization shift collides with the previous two-processor job"
            );
            let _ = prev_end;
            tl.blockers[i].start -= shift;
        }
    }
    pack(&tl)
}

/// A preempted single-processor job in a normalized preemptive schedule:
/// its last blocker `F(j)`, the work `g` done before that blocker's start,
/// and the number `h` of jobs completing after the blocker.
#[derive(Debug, Clone, Serialize)]
pub struct PreemptionInfo {
    pub preempted_job: JobId,
    pub blocker: JobId,
    pub g: f64,
    pub h: usize,
}

struct VictimPlan {
    info: PreemptionInfo,
    proc: usize,
    first_start: f64,
    blocker_end: f64,
    dur: f64,
    speed: f64,
}

fn victim_plans(tl: &Timeline, packed: &Schedule) -> Vec<VictimPlan> {
    let mut by_job: BTreeMap<JobId, Vec<&Piece>> = BTreeMap::new();
    for p in packed.pieces() {
        by_job.entry(p.job).or_default().push(p);
    }
    let completions: Vec<f64> = by_job
        .keys()
        .map(|&id| packed.completion(id).expect("job has pieces"))
        .collect();

    let mut plans: Vec<VictimPlan> = Vec::new();
    for (&id, pieces) in &by_job {
        if pieces[0].procs.len() != 1 || pieces.len() < 2 {
            continue;
        }
        let last = pieces
            .iter()
            .max_by(|a, b| a.start.total_cmp(&b.start))
            .expect("non-empty");
        let blocker = tl
            .blockers
            .iter()
            .find(|b| (b.end() - last.start).abs() <= TIME_TOL)
            .expect("a preempted job resumes at a blocker end");
        let dur: f64 = pieces.iter().map(|p| p.len()).sum();
        let g = dur - last.len();
        let h = completions.iter().filter(|&&c| c > blocker.end() + TIME_TOL).count();
        plans.push(VictimPlan {
            info: PreemptionInfo { preempted_job: id, blocker: blocker.job, g, h },
            proc: *pieces[0].procs.first().expect("non-empty procs"),
            first_start: pieces.iter().map(|p| p.start).fold(f64::INFINITY, f64::min),
            blocker_end: blocker.end(),
            dur,
            speed: pieces[0].speed,
        });
    }
    plans.sort_by(|a, b| a.first_start.total_cmp(&b.first_start));
    plans
}

/// The preemptions of a (normalized) preemptive schedule, ordered by the
/// victims' start times.
pub fn preemptions(sched: &Schedule) -> Vec<PreemptionInfo> {
    let tl = timeline_of(sched);
    let packed = pack(&tl);
    victim_plans(&tl, &packed).into_iter().map(|p| p.info).collect()
}

/// Total completion-time increase charged by [`to_nonpreemptive`]:
/// `sum_l g(j_l) * h(j_l)`.
pub fn idle_insertion_charge(sched: &Schedule) -> f64 {
    preemptions(sched).iter().map(|p| p.g * p.h as f64).sum()
}

/// Removes the remaining preemptions by inserting idle time.
///
/// For each preempted job, taken in order of increasing start, an idle
/// period equal to its pre-blocker work `g` is inserted on both processors
/// right after the completion of the last blocker preempting it, and the
/// job restarts there as one contiguous piece. Each insertion raises the
/// total completion time by exactly `g * h`.
pub fn to_nonpreemptive(sched: &Schedule) -> Schedule {
    let tl = timeline_of(sched);
    let packed = pack(&tl);
    let plans = victim_plans(&tl, &packed);
    for w in plans.windows(2) {
        // preemption windows (S(j), C(F(j))] must not overlap
        assert!(
            w[1].first_start >= w[0].blocker_end - TIME_TOL,
            "preemption windows of jobs {} and {} overlap",
            w[0].info.preempted_job,
            w[1].info.preempted_job
        );
    }

    let shift_at = |t: f64| -> f64 {
        plans
            .iter()
            .filter(|p| p.blocker_end <= t + TIME_TOL)
            .map(|p| p.info.g)
            .sum()
    };

    let victim_ids: Vec<JobId> = plans.iter().map(|p| p.info.preempted_job).collect();
    let mut out = Vec::new();
    for p in packed.pieces() {
        if victim_ids.contains(&p.job) {
            continue;
        }
        let s = shift_at(p.start);
        out.push(Piece::new(p.job, p.procs.iter().copied(), p.start + s, p.end + s, p.speed));
    }
    let mut prior = 0.0;
    for plan in &plans {
        let start = plan.blocker_end + prior;
        out.push(Piece::new(plan.info.preempted_job, [plan.proc], start, start + plan.dur, plan.speed));
        prior += plan.info.g;
    }
    Schedule::from_pieces(out)
}

/// Every stage of the two-processor pipeline, for tracing and ratio checks.
#[derive(Debug, Clone)]
pub struct Dedicated2Run {
    /// Subproblem lower bounds at the full budget.
    pub lb: Dedicated2Lb,
    /// Half-budget chains.
    pub sub1: SubSchedule,
    pub sub2: SubSchedule,
    pub merged: Schedule,
    pub normalized: Schedule,
    pub nonpreemptive: Option<Schedule>,
}

impl Dedicated2Run {
    /// The schedule the pipeline delivers.
    pub fn result(&self) -> &Schedule {
        self.nonpreemptive.as_ref().unwrap_or(&self.normalized)
    }
}

/// Runs the whole pipeline. With `preemptive` set the idle-insertion stage
/// is skipped and the normalized preemptive schedule is the result.
pub fn schedule_dedicated2(inst: &Instance, preemptive: bool) -> Result<Dedicated2Run> {
    let lb = sequencing::lb_dedicated2(inst, inst.energy)?;
    let (sub1, sub2) = solve_subproblems(inst, inst.energy / 2.0)?;
    let merged = build_preemptive(inst, &sub1, &sub2)?;
    let normalized = normalize_preemptions(&merged);
    let nonpreemptive = if preemptive { None } else { Some(to_nonpreemptive(&normalized)) };
    Ok(Dedicated2Run { lb, sub1, sub2, merged, normalized, nonpreemptive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{total_completion, Alpha, Instance, Job, JobKind};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn dedicated_inst(jobs: Vec<Job>, energy: f64, alpha: f64) -> Instance {
        Instance::new(JobKind::Dedicated, 2, energy, Alpha::new_unchecked(alpha), jobs)
    }

    #[test]
    fn split_sets_partitions_by_fix() {
        let inst = dedicated_inst(
            vec![
                Job::dedicated(0, 1.0, [0]),
                Job::dedicated(1, 1.0, [1]),
                Job::dedicated(2, 2.0, [0, 1]),
            ],
            1.0,
            2.0,
        );
        let (j1, j2, j12) = split_sets(&inst).unwrap();
        assert_eq!(j1, vec![0]);
        assert_eq!(j2, vec![1]);
        assert_eq!(j12, vec![2]);

        let all12 = dedicated_inst(
            vec![Job::dedicated(0, 2.0, [0, 1]), Job::dedicated(1, 2.0, [0, 1])],
            1.0,
            2.0,
        );
        let (j1, j2, j12) = split_sets(&all12).unwrap();
        assert!(j1.is_empty() && j2.is_empty());
        assert_eq!(j12, vec![0, 1]);
    }

    #[test]
    fn split_sets_rejects_foreign_processors() {
        let inst = Instance::new(
            JobKind::Dedicated,
            2,
            1.0,
            Alpha::new_unchecked(2.0),
            vec![Job::dedicated(0, 1.0, [2])],
        );
        assert!(matches!(split_sets(&inst), Err(Error::NotTwoProcessor(_))));
    }

    #[test]
    fn half_budget_doubles_durations_at_alpha_two() {
        let jobs = vec![
            Job::dedicated(0, 1.0, [0]),
            Job::dedicated(1, 1.0, [0]),
            Job::dedicated(2, 1.0, [0]),
        ];
        let inst = dedicated_inst(jobs, 3.0, 2.0);
        let (full, _) = solve_subproblems(&inst, 3.0).unwrap();
        let (half, empty) = solve_subproblems(&inst, 1.5).unwrap();
        assert!(empty.is_empty());
        for (a, b) in full.durations.iter().zip(&half.durations) {
            assert!(rel(*b, 2.0 * a) < 1e-12);
        }
        let s = 3.0_f64.sqrt() + 2.0_f64.sqrt() + 1.0;
        assert!(rel(half.total_completion(), 2.0 * s * s / 3.0) < 1e-12);
    }

    #[test]
    fn lone_two_processor_job_is_nonpreemptive() {
        let inst = dedicated_inst(vec![Job::dedicated(0, 2.0, [0, 1])], 2.0, 2.0);
        let (s1, s2) = solve_subproblems(&inst, 1.0).unwrap();
        let merged = build_preemptive(&inst, &s1, &s2).unwrap();
        assert!(merged.is_nonpreemptive());
        let p = &merged.pieces()[0];
        // E/2 = 1: 2/p = 1 -> p = 2, interval (0, 2]
        assert!(rel(p.end, 2.0) < 1e-12 && p.start.abs() < 1e-12);
    }

    #[test]
    fn single_before_blocker_in_chain_never_splits() {
        // a precedes b in S': b's interval starts no earlier than a's chain
        // completion, so a stays whole.
        let inst = dedicated_inst(
            vec![Job::dedicated(0, 2.0, [0]), Job::dedicated(1, 2.0, [0, 1])],
            100.0,
            2.0,
        );
        let s1 = SubSchedule::from_durations(Permutation::new(vec![0, 1], &inst).unwrap(), vec![2.0, 1.0]);
        let s2 = SubSchedule::from_durations(
            Permutation::new(vec![1], &dedicated_inst(vec![Job::dedicated(1, 2.0, [0, 1])], 1.0, 2.0))
                .unwrap(),
            vec![10.0],
        );
        let merged = build_preemptive(&inst, &s1, &s2).unwrap();
        let a_pieces: Vec<_> = merged.pieces().iter().filter(|p| p.job == 0).collect();
        assert_eq!(a_pieces.len(), 1);
        assert!(rel(merged.completion(0).unwrap(), 2.0) < 1e-12);
        // b ends at max{3, 10} = 10 with length min{1, 10} = 1
        assert!(rel(merged.completion(1).unwrap(), 10.0) < 1e-12);
    }

    /// Fixture with one blocker preempting singles on both processors:
    /// S' = [b, a1] with durations [1, 6]; S'' = [c1, b, c2] with [3, 2, 4].
    fn two_victim_fixture() -> (Instance, SubSchedule, SubSchedule) {
        let jobs = vec![
            Job::dedicated(0, 2.0, [0, 1]), // b
            Job::dedicated(1, 6.0, [0]),    // a1
            Job::dedicated(2, 3.0, [1]),    // c1
            Job::dedicated(3, 4.0, [1]),    // c2
        ];
        let inst = dedicated_inst(jobs, 1000.0, 2.0);
        let s1 = SubSchedule::from_durations(Permutation::from_ids(vec![0, 1]), vec![1.0, 6.0]);
        let s2 = SubSchedule::from_durations(Permutation::from_ids(vec![2, 0, 3]), vec![3.0, 2.0, 4.0]);
        (inst, s1, s2)
    }

    #[test]
    fn merge_splits_singles_around_the_blocker() {
        let (inst, s1, s2) = two_victim_fixture();
        let merged = build_preemptive(&inst, &s1, &s2).unwrap();
        // b ends at max{1, 5} = 5 with length min{1, 2} = 1: interval (4, 5]
        let b = merged.pieces().iter().find(|p| p.job == 0).unwrap();
        assert!(rel(b.start, 4.0) < 1e-12 && rel(b.end, 5.0) < 1e-12);
        // a1 runs [0,4) and (5,7]; c2 runs [3,4) and (5,8]
        assert_eq!(merged.pieces().iter().filter(|p| p.job == 1).count(), 2);
        assert!(rel(merged.completion(1).unwrap(), 7.0) < 1e-12);
        assert_eq!(merged.pieces().iter().filter(|p| p.job == 3).count(), 2);
        assert!(rel(merged.completion(3).unwrap(), 8.0) < 1e-12);
        // single completions never exceed their chain completions
        assert!(merged.completion(1).unwrap() <= s1.completion_of(1).unwrap() + 1e-12);
        assert!(merged.completion(2).unwrap() <= s2.completion_of(2).unwrap() + 1e-12);
        assert!(merged.completion(3).unwrap() <= s2.completion_of(3).unwrap() + 1e-12);
    }

    #[test]
    fn normalization_moves_the_blocker_onto_one_victim() {
        let (inst, s1, s2) = two_victim_fixture();
        let merged = build_preemptive(&inst, &s1, &s2).unwrap();
        let before = total_completion(&merged);
        let norm = normalize_preemptions(&merged);
        // blocker slides from (4,5] to (3,4]: c2's pre-blocker work was 1
        let b = norm.pieces().iter().find(|p| p.job == 0).unwrap();
        assert!(rel(b.start, 3.0) < 1e-12 && rel(b.end, 4.0) < 1e-12);
        // only the blocker's completion changed, and it dropped
        assert!(rel(norm.completion(0).unwrap(), 4.0) < 1e-12);
        for id in [1, 2, 3] {
            assert!(rel(norm.completion(id).unwrap(), merged.completion(id).unwrap()) < 1e-12);
        }
        assert!(total_completion(&norm) < before);
        // c2 is whole now; a1 is the single remaining victim
        assert_eq!(norm.pieces().iter().filter(|p| p.job == 3).count(), 1);
        assert_eq!(norm.pieces().iter().filter(|p| p.job == 1).count(), 2);
    }

    #[test]
    fn normalization_is_a_fixpoint() {
        let (inst, s1, s2) = two_victim_fixture();
        let norm = normalize_preemptions(&build_preemptive(&inst, &s1, &s2).unwrap());
        let again = normalize_preemptions(&norm);
        assert_eq!(norm, again);
    }

    #[test]
    fn idle_insertion_bookkeeping_is_exact() {
        let (inst, s1, s2) = two_victim_fixture();
        let norm = normalize_preemptions(&build_preemptive(&inst, &s1, &s2).unwrap());
        let pre = total_completion(&norm);
        // remaining victim: a1 with g = 3, and h = 2 jobs (a1, c2) finish
        // after the blocker's completion at t = 4
        assert!(rel(idle_insertion_charge(&norm), 6.0) < 1e-12);
        let npr = to_nonpreemptive(&norm);
        assert!(npr.is_nonpreemptive());
        let post = total_completion(&npr);
        assert!(rel(post, pre + 6.0) < 1e-12);
        assert!(post < 2.0 * pre);
        // a1 restarts at the blocker's completion and runs contiguously
        assert!(rel(npr.completion(1).unwrap(), 4.0 + 6.0) < 1e-12);
        // c2 is pushed right by the idle period
        assert!(rel(npr.completion(3).unwrap(), 8.0 + 3.0) < 1e-12);
        // untouched jobs keep their completions
        assert!(rel(npr.completion(0).unwrap(), 4.0) < 1e-12);
        assert!(rel(npr.completion(2).unwrap(), 3.0) < 1e-12);
    }

    #[test]
    fn idle_insertion_scaled_fixture() {
        // the same shape scaled by 0.1: g = 0.3, h = 2, charge 0.6
        let jobs = vec![
            Job::dedicated(0, 0.2, [0, 1]),
            Job::dedicated(1, 0.6, [0]),
            Job::dedicated(2, 0.3, [1]),
            Job::dedicated(3, 0.4, [1]),
        ];
        let inst = dedicated_inst(jobs, 1000.0, 2.0);
        let s1 = SubSchedule::from_durations(Permutation::from_ids(vec![0, 1]), vec![0.1, 0.6]);
        let s2 = SubSchedule::from_durations(Permutation::from_ids(vec![2, 0, 3]), vec![0.3, 0.2, 0.4]);
        let norm = normalize_preemptions(&build_preemptive(&inst, &s1, &s2).unwrap());
        let pre = total_completion(&norm);
        let npr = to_nonpreemptive(&norm);
        assert!(rel(idle_insertion_charge(&norm), 0.6) < 1e-9);
        assert!(rel(total_completion(&npr), pre + 0.6) < 1e-9);
    }

    #[test]
    fn no_preemption_means_no_change() {
        let inst = dedicated_inst(vec![Job::dedicated(0, 2.0, [0, 1])], 2.0, 2.0);
        let run = schedule_dedicated2(&inst, false).unwrap();
        let npr = run.nonpreemptive.as_ref().unwrap();
        assert_eq!(npr, &run.normalized);
        assert!(rel(total_completion(npr), run.lb.value * 2.0_f64.powf(1.0)) < 1e-12);
    }

    #[test]
    fn pipeline_respects_energy_budget() {
        let jobs = vec![
            Job::dedicated(0, 1.0, [0]),
            Job::dedicated(1, 3.0, [1]),
            Job::dedicated(2, 2.0, [0, 1]),
            Job::dedicated(3, 4.0, [0, 1]),
            Job::dedicated(4, 0.5, [0]),
        ];
        let inst = dedicated_inst(jobs, 4.0, 3.0);
        let run = schedule_dedicated2(&inst, false).unwrap();
        let report = crate::listsched::verify_schedule(
            run.result(),
            &inst,
            crate::listsched::VerifyOptions::default(),
        );
        assert!(report.feasible(), "{:?}", report.violations);
        assert!(report.nonpreemptive);
        assert!(report.energy_used <= inst.energy * (1.0 + 1e-9));
    }
}
