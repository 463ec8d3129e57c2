//! Job ordering rules and closed-form lower bounds `LB(pi)` for all three
//! job kinds, built on the weighted duration program.
//!
//! Every sort key breaks ties by ascending job id, so each rule yields one
//! deterministic order.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::duropt::{self, WeightedProgram};
use crate::model::{Alpha, Demand, Instance, Job, JobId, JobKind};
use crate::{Error, Result};

/// A job ordering: the i-th entry is the id of the i-th job to start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(Vec<JobId>);

impl Permutation {
    /// Checks that `order` is a bijection on the instance's job ids.
    pub fn new(order: Vec<JobId>, inst: &Instance) -> Result<Permutation> {
        if order.len() != inst.n() {
            return Err(Error::BadPermutation(format!(
                "expected {} entries, got {}",
                inst.n(),
                order.len()
            )));
        }
        let ids: BTreeSet<JobId> = inst.jobs.iter().map(|j| j.id).collect();
        let given: BTreeSet<JobId> = order.iter().copied().collect();
        if ids != given {
            return Err(Error::BadPermutation(
                "entries are not a permutation of the instance's job ids".to_string(),
            ));
        }
        Ok(Permutation(order))
    }

    /// Jobs in the order they appear in the instance.
    pub fn identity(inst: &Instance) -> Permutation {
        Permutation(inst.job_ids())
    }

    pub(crate) fn from_ids(order: Vec<JobId>) -> Permutation {
        Permutation(order)
    }

    pub fn as_slice(&self) -> &[JobId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = JobId> + '_ {
        self.0.iter().copied()
    }
}

/// Sort key realizing a sequencing rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OrderKey {
    pub primary: f64,
    pub tiebreak: JobId,
}

impl OrderKey {
    fn cmp(&self, other: &OrderKey) -> Ordering {
        self.primary
            .total_cmp(&other.primary)
            .then(self.tiebreak.cmp(&other.tiebreak))
    }
}

pub(crate) fn sort_by_keys(mut keyed: Vec<(OrderKey, JobId)>) -> Vec<JobId> {
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    keyed.into_iter().map(|(_, id)| id).collect()
}

/// Closed-form lower bound on the total completion time for a fixed
/// sequence, together with the optimal one-shot durations.
#[derive(Debug, Clone, Serialize)]
pub struct LbReport {
    pub permutation: Permutation,
    /// Durations aligned with the permutation order.
    pub durations: Vec<f64>,
    pub value: f64,
}

impl LbReport {
    fn empty() -> LbReport {
        LbReport { permutation: Permutation(Vec::new()), durations: Vec::new(), value: 0.0 }
    }

    pub fn duration_of(&self, job: JobId) -> Option<f64> {
        self.permutation
            .iter()
            .position(|id| id == job)
            .map(|i| self.durations[i])
    }
}

fn require_kind(inst: &Instance, kind: JobKind, expected: &'static str) -> Result<()> {
    if inst.kind != kind {
        return Err(Error::KindMismatch { expected });
    }
    Ok(())
}

fn rigid_size(job: &Job) -> usize {
    match job.demand {
        Demand::Rigid { size } => size,
        _ => 1,
    }
}

fn moldable_cap(job: &Job) -> usize {
    match job.demand {
        Demand::Moldable { delta } => delta,
        _ => 1,
    }
}

fn fix_len(job: &Job) -> usize {
    match &job.demand {
        Demand::Dedicated { fix } => fix.len(),
        _ => 1,
    }
}

/// Rigid ordering rule: non-decreasing `size_j`, valid when the
/// per-processor works `W_j = V_j / size_j` are all identical.
pub fn order_rigid(inst: &Instance) -> Result<Permutation> {
    require_kind(inst, JobKind::Rigid, "rigid")?;
    let reference = inst.jobs[0].work_per_proc(rigid_size(&inst.jobs[0]));
    for job in &inst.jobs {
        let w = job.work_per_proc(rigid_size(job));
        if (w - reference).abs() > 1e-9 * reference.abs().max(1.0) {
            return Err(Error::NonIdenticalWorks { job: job.id, got: w, want: reference });
        }
    }
    let keyed = inst
        .jobs
        .iter()
        .map(|j| (OrderKey { primary: rigid_size(j) as f64, tiebreak: j.id }, j.id))
        .collect();
    Ok(Permutation(sort_by_keys(keyed)))
}

/// Per-sequence weighted program for rigid jobs:
/// `w_i = (size_i (n-i+0.5) + 0.5 m)/m`, `c_i = W_i^alpha size_i`.
pub fn rigid_program(pi: &Permutation, inst: &Instance) -> Result<WeightedProgram> {
    require_kind(inst, JobKind::Rigid, "rigid")?;
    let n = pi.len() as f64;
    let m = inst.m as f64;
    let a = inst.alpha.get();
    let mut weights = Vec::with_capacity(pi.len());
    let mut coeffs = Vec::with_capacity(pi.len());
    for (i, id) in pi.iter().enumerate() {
        let job = inst.job(id).ok_or_else(|| Error::BadPermutation(format!("unknown job {id}")))?;
        let size = rigid_size(job) as f64;
        let pos = (i + 1) as f64;
        let w = job.work_per_proc(rigid_size(job));
        weights.push((size * (n - pos + 0.5) + 0.5 * m) / m);
        coeffs.push(w.powf(a) * size);
    }
    WeightedProgram::new(weights, coeffs, inst.energy, inst.alpha)
}

/// Lower bound on the total completion time of a rigid instance for a
/// fixed sequence.
pub fn lb_rigid(pi: &Permutation, inst: &Instance) -> Result<LbReport> {
    let prog = rigid_program(pi, inst)?;
    let sol = duropt::solve_weighted(&prog)?;
    Ok(LbReport { permutation: pi.clone(), durations: sol.durations, value: sol.objective })
}

/// Moldable ordering rule: non-decreasing `delta_j`, ties by work then id.
///
/// Requires the instance to be agreeable (`V_i < V_j` implies
/// `delta_i <= delta_j`); with no agreeable coupling the rule has no
/// optimality support and an error is returned instead of a guess.
pub fn order_moldable(inst: &Instance) -> Result<Permutation> {
    require_kind(inst, JobKind::Moldable, "moldable")?;
    // agreeability scan over jobs sorted by (V, delta)
    let mut by_work: Vec<&Job> = inst.jobs.iter().collect();
    by_work.sort_by(|a, b| {
        a.total_work
            .total_cmp(&b.total_work)
            .then(moldable_cap(a).cmp(&moldable_cap(b)))
    });
    let mut max_cap_below: Option<(&Job, usize)> = None;
    let mut i = 0;
    while i < by_work.len() {
        let mut j = i;
        while j < by_work.len() && by_work[j].total_work == by_work[i].total_work {
            j += 1;
        }
        if let Some((witness, cap)) = max_cap_below {
            for job in &by_work[i..j] {
                if moldable_cap(job) < cap {
                    return Err(Error::NonAgreeable { smaller: witness.id, larger: job.id });
                }
            }
        }
        for job in &by_work[i..j] {
            let cap = moldable_cap(job);
            if max_cap_below.is_none_or(|(_, c)| cap > c) {
                max_cap_below = Some((job, cap));
            }
        }
        i = j;
    }
    let mut jobs: Vec<&Job> = inst.jobs.iter().collect();
    jobs.sort_by(|a, b| {
        moldable_cap(a)
            .cmp(&moldable_cap(b))
            .then(a.total_work.total_cmp(&b.total_work))
            .then(a.id.cmp(&b.id))
    });
    Ok(Permutation(jobs.into_iter().map(|j| j.id).collect()))
}

/// Per-sequence weighted program for moldable jobs:
/// `w_i = (n-i+0.5 + 0.5 m/delta_i)/m`, `c_i = V_i^alpha`.
///
/// Durations are one-processor times; the wall-clock time at width `m_j`
/// is `p_i / m_j`.
pub fn moldable_program(pi: &Permutation, inst: &Instance) -> Result<WeightedProgram> {
    require_kind(inst, JobKind::Moldable, "moldable")?;
    let n = pi.len() as f64;
    let m = inst.m as f64;
    let a = inst.alpha.get();
    let mut weights = Vec::with_capacity(pi.len());
    let mut coeffs = Vec::with_capacity(pi.len());
    for (i, id) in pi.iter().enumerate() {
        let job = inst.job(id).ok_or_else(|| Error::BadPermutation(format!("unknown job {id}")))?;
        let delta = moldable_cap(job) as f64;
        let pos = (i + 1) as f64;
        weights.push((n - pos + 0.5 + 0.5 * m / delta) / m);
        coeffs.push(job.total_work.powf(a));
    }
    WeightedProgram::new(weights, coeffs, inst.energy, inst.alpha)
}

/// Lower bound on the total completion time of a moldable instance for a
/// fixed sequence. Durations are one-processor times.
pub fn lb_moldable(pi: &Permutation, inst: &Instance) -> Result<LbReport> {
    let prog = moldable_program(pi, inst)?;
    let sol = duropt::solve_weighted(&prog)?;
    Ok(LbReport { permutation: pi.clone(), durations: sol.durations, value: sol.objective })
}

/// Dedicated-subproblem ordering rule: non-decreasing `W_i |fix_i|^(1/alpha)`.
pub fn order_dedicated(jobs: &[&Job], alpha: Alpha) -> Permutation {
    let a = alpha.get();
    let keyed = jobs
        .iter()
        .map(|j| {
            let f = fix_len(j);
            let w = j.work_per_proc(f);
            (OrderKey { primary: w * (f as f64).powf(1.0 / a), tiebreak: j.id }, j.id)
        })
        .collect();
    Permutation(sort_by_keys(keyed))
}

/// Chain program of one dedicated subproblem for a fixed sequence:
/// `w_i = n' - i + 1`, `c_i = |fix_i| W_i^alpha`.
pub fn dedicated_program(
    jobs_in_order: &[&Job],
    budget: f64,
    alpha: Alpha,
) -> Result<WeightedProgram> {
    let n = jobs_in_order.len() as f64;
    let a = alpha.get();
    let mut weights = Vec::with_capacity(jobs_in_order.len());
    let mut coeffs = Vec::with_capacity(jobs_in_order.len());
    for (i, job) in jobs_in_order.iter().enumerate() {
        let f = fix_len(job);
        let w = job.work_per_proc(f);
        weights.push(n - (i + 1) as f64 + 1.0);
        coeffs.push(f as f64 * w.powf(a));
    }
    WeightedProgram::new(weights, coeffs, budget, alpha)
}

/// Lower bound for a two-processor dedicated instance: the larger of the
/// two per-processor subproblem optima.
#[derive(Debug, Clone, Serialize)]
pub struct Dedicated2Lb {
    /// Subproblem over the jobs touching processor 0.
    pub side1: LbReport,
    /// Subproblem over the jobs touching processor 1.
    pub side2: LbReport,
    pub value: f64,
}

/// Solves both dedicated subproblems under the given budget and returns
/// their reports plus the max of the two optima.
///
/// Callers pass the full budget `E` for the lower bound and `E/2` when
/// constructing the half-budget subschedules.
pub fn lb_dedicated2(inst: &Instance, budget: f64) -> Result<Dedicated2Lb> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::BadProgram("budget must be strictly positive".to_string()));
    }
    let (j1, j2, j12) = crate::dedicated2::split_sets(inst)?;
    let solve_side = |own: &[JobId]| -> Result<LbReport> {
        let ids: Vec<JobId> = own.iter().chain(j12.iter()).copied().collect();
        if ids.is_empty() {
            return Ok(LbReport::empty());
        }
        let jobs: Vec<&Job> = ids.iter().map(|&id| inst.job(id).expect("split ids exist")).collect();
        let pi = order_dedicated(&jobs, inst.alpha);
        let ordered: Vec<&Job> = pi.iter().map(|id| inst.job(id).expect("ordered ids exist")).collect();
        let prog = dedicated_program(&ordered, budget, inst.alpha)?;
        let sol = duropt::solve_weighted(&prog)?;
        Ok(LbReport { permutation: pi, durations: sol.durations, value: sol.objective })
    };
    let side1 = solve_side(&j1)?;
    let side2 = solve_side(&j2)?;
    let value = side1.value.max(side2.value);
    Ok(Dedicated2Lb { side1, side2, value })
}
