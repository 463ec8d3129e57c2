//! List scheduling for rigid and moldable jobs with precomputed durations,
//! plus the universal schedule verifier.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{
    energy_of, total_completion, Demand, Instance, JobId, Piece, Schedule, ENERGY_REL_TOL,
    TIME_TOL,
};
use crate::sequencing::{self, LbReport};
use crate::{Error, Result};

/// Everything list scheduling needs: a priority order plus per-job
/// wall-clock durations, widths and per-processor works (all aligned with
/// the order). The works set the piece speeds `W_j / p_j`.
#[derive(Debug, Clone)]
pub struct ScheduleRequest {
    pub order: Vec<JobId>,
    pub durations: Vec<f64>,
    pub widths: Vec<usize>,
    pub works: Vec<f64>,
    pub m: usize,
}

/// Greedy list scheduling: each job in order starts at the earliest time at
/// which at least `width` processors stay free for its whole duration, on
/// the lowest-indexed free processors.
///
/// Candidate start times are 0 and the ends of already placed pieces;
/// availability only changes there.
pub fn list_schedule(req: &ScheduleRequest) -> Result<Schedule> {
    if let Some(&width) = req.widths.iter().find(|&&w| w > req.m) {
        return Err(Error::WidthExceedsM { width, m: req.m });
    }
    let mut pieces: Vec<Piece> = Vec::with_capacity(req.order.len());
    for (((&job, &dur), &width), &work) in req
        .order
        .iter()
        .zip(&req.durations)
        .zip(&req.widths)
        .zip(&req.works)
    {
        let mut candidates: Vec<f64> = Vec::with_capacity(pieces.len() + 1);
        candidates.push(0.0);
        candidates.extend(pieces.iter().map(|p| p.end));
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();

        let mut placed = false;
        for &t in &candidates {
            let free: Vec<usize> = (0..req.m)
                .filter(|proc| {
                    pieces.iter().all(|p| {
                        !p.procs.contains(proc)
                            || p.end <= t + TIME_TOL
                            || p.start >= t + dur - TIME_TOL
                    })
                })
                .collect();
            if free.len() >= width {
                let procs = free.into_iter().take(width);
                pieces.push(Piece::new(job, procs, t, t + dur, work / dur));
                placed = true;
                break;
            }
        }
        debug_assert!(placed, "the all-pieces-ended candidate always fits");
    }
    Ok(Schedule::from_pieces(pieces))
}

/// Width rule for moldable jobs: use the cap, clamped to `ceil(m/2)`.
pub fn assign_moldable_width(delta: usize, m: usize) -> usize {
    let half = m.div_ceil(2);
    if delta < half {
        delta
    } else {
        half
    }
}

/// Full rigid pipeline: size ordering, lower-bound durations, list
/// scheduling. Returns the schedule and the bound it is measured against.
pub fn schedule_rigid(inst: &Instance) -> Result<(Schedule, LbReport)> {
    let pi = sequencing::order_rigid(inst)?;
    let lb = sequencing::lb_rigid(&pi, inst)?;
    let mut widths = Vec::with_capacity(pi.len());
    let mut works = Vec::with_capacity(pi.len());
    for id in pi.iter() {
        let job = inst.job(id).expect("ordered ids exist");
        let size = match job.demand {
            Demand::Rigid { size } => size,
            _ => return Err(Error::KindMismatch { expected: "rigid" }),
        };
        widths.push(size);
        works.push(job.work_per_proc(size));
    }
    let req = ScheduleRequest {
        order: pi.iter().collect(),
        durations: lb.durations.clone(),
        widths,
        works,
        m: inst.m,
    };
    Ok((list_schedule(&req)?, lb))
}

/// Full moldable pipeline: cap ordering, lower-bound durations, the width
/// rule, list scheduling. The lower bound's durations are one-processor
/// times; the wall-clock duration at width `m_j` is `p_j / m_j`.
pub fn schedule_moldable(inst: &Instance) -> Result<(Schedule, LbReport)> {
    let pi = sequencing::order_moldable(inst)?;
    let lb = sequencing::lb_moldable(&pi, inst)?;
    let mut durations = Vec::with_capacity(pi.len());
    let mut widths = Vec::with_capacity(pi.len());
    let mut works = Vec::with_capacity(pi.len());
    for (id, &p) in pi.iter().zip(&lb.durations) {
        let job = inst.job(id).expect("ordered ids exist");
        let delta = match job.demand {
            Demand::Moldable { delta } => delta,
            _ => return Err(Error::KindMismatch { expected: "moldable" }),
        };
        let width = assign_moldable_width(delta, inst.m);
        durations.push(p / width as f64);
        widths.push(width);
        works.push(job.work_per_proc(width));
    }
    let req = ScheduleRequest { order: pi.iter().collect(), durations, widths, works, m: inst.m };
    Ok((list_schedule(&req)?, lb))
}

/// Tolerances used by [`verify_schedule`].
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub time_tol: f64,
    pub energy_rel_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { time_tol: TIME_TOL, energy_rel_tol: ENERGY_REL_TOL }
    }
}

/// Feasibility findings for a schedule against its instance.
///
/// All findings are report entries, never failures.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    /// No processor is over-committed at any time.
    pub capacity_ok: bool,
    /// Every job's processor set matches its demand.
    pub demand_ok: bool,
    /// Every job's pieces carry one speed and deliver its work.
    pub work_ok: bool,
    /// Every instance job has at least one piece.
    pub complete: bool,
    pub energy_ok: bool,
    pub energy_used: f64,
    pub nonpreemptive: bool,
    pub total_completion: f64,
    pub violations: Vec<String>,
}

impl VerifyReport {
    /// True when the schedule is feasible (ignores the preemption flag).
    pub fn feasible(&self) -> bool {
        self.capacity_ok && self.demand_ok && self.work_ok && self.complete && self.energy_ok
    }
}

/// Checks capacity, demand, work delivery, completeness and the energy
/// budget at the piece event points.
pub fn verify_schedule(sched: &Schedule, inst: &Instance, opts: VerifyOptions) -> VerifyReport {
    let mut violations = Vec::new();
    let mut capacity_ok = true;
    let mut demand_ok = true;
    let mut work_ok = true;
    let tol = opts.time_tol;

    for (i, p) in sched.pieces().iter().enumerate() {
        // NaN-safe: anything but a strictly increasing span is a violation
        if p.start.partial_cmp(&p.end) != Some(std::cmp::Ordering::Less) {
            capacity_ok = false;
            violations.push(format!("piece {i} of job {} has non-positive length", p.job));
        }
        if p.procs.is_empty() {
            capacity_ok = false;
            violations.push(format!("piece {i} of job {} uses no processors", p.job));
        }
        if p.speed.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            work_ok = false;
            violations.push(format!("piece {i} of job {} has non-positive speed", p.job));
        }
        if p.procs.iter().any(|&q| q >= inst.m) {
            capacity_ok = false;
            violations.push(format!("piece {i} of job {} uses a processor outside [0, m)", p.job));
        }
        if inst.job(p.job).is_none() {
            demand_ok = false;
            violations.push(format!("piece {i} references unknown job {}", p.job));
        }
    }

    // per-processor disjointness at the piece event points
    for proc in 0..inst.m {
        let mut spans: Vec<(f64, f64, JobId)> = sched
            .pieces()
            .iter()
            .filter(|p| p.procs.contains(&proc))
            .map(|p| (p.start, p.end, p.job))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for w in spans.windows(2) {
            if w[1].0 < w[0].1 - tol {
                capacity_ok = false;
                violations.push(format!(
                    "processor {proc} over-committed at t={}: jobs {} and {}",
                    w[1].0, w[0].2, w[1].2
                ));
            }
        }
    }

    // per-job demand, speed uniformity and work delivery
    let mut by_job: BTreeMap<JobId, Vec<&Piece>> = BTreeMap::new();
    for p in sched.pieces() {
        by_job.entry(p.job).or_default().push(p);
    }
    for (&id, pieces) in &by_job {
        let Some(job) = inst.job(id) else { continue };
        let procs = &pieces[0].procs;
        if pieces.iter().any(|p| p.procs != *procs) {
            demand_ok = false;
            violations.push(format!("job {id} changes processor set between pieces"));
        }
        let width = procs.len();
        match &job.demand {
            Demand::Rigid { size } => {
                if width != *size {
                    demand_ok = false;
                    violations.push(format!("job {id} runs on {width} processors, size is {size}"));
                }
            }
            Demand::Moldable { delta } => {
                if width > *delta {
                    demand_ok = false;
                    violations.push(format!("job {id} runs on {width} processors, cap is {delta}"));
                }
            }
            Demand::Dedicated { fix } => {
                if procs != fix {
                    demand_ok = false;
                    violations.push(format!("job {id} does not run on its dedicated set"));
                }
            }
        }
        let speed = pieces[0].speed;
        if pieces
            .iter()
            .any(|p| (p.speed - speed).abs() > 1e-9 * speed.abs().max(1.0))
        {
            work_ok = false;
            violations.push(format!("job {id} changes speed between pieces"));
        }
        let delivered: f64 = pieces.iter().map(|p| p.len() * p.speed).sum();
        let expect = job.work_per_proc(width);
        if (delivered - expect).abs() > 1e-9 * expect.abs().max(1.0) {
            work_ok = false;
            violations.push(format!(
                "job {id} delivers per-processor work {delivered}, expected {expect}"
            ));
        }
    }

    let mut complete = true;
    for job in &inst.jobs {
        if !by_job.contains_key(&job.id) {
            complete = false;
            violations.push(format!("job {} has no pieces", job.id));
        }
    }

    let energy_used = sched
        .pieces()
        .iter()
        .map(|p| p.procs.len() as f64 * p.len() * p.speed.powf(inst.alpha.get()))
        .sum::<f64>();
    let energy_ok = energy_used <= inst.energy * (1.0 + opts.energy_rel_tol);
    if !energy_ok {
        violations.push(format!(
            "energy {energy_used} exceeds budget {}",
            inst.energy
        ));
    }
    debug_assert!(
        !complete || {
            let direct = energy_of(sched, inst).expect("complete schedule");
            (direct - energy_used).abs() <= 1e-9 * direct.abs().max(1.0)
        }
    );

    VerifyReport {
        capacity_ok,
        demand_ok,
        work_ok,
        complete,
        energy_ok,
        energy_used,
        nonpreemptive: sched.is_nonpreemptive(),
        total_completion: total_completion(sched),
        violations,
    }
}

/// Busy-processor counts right after every piece start, paired with the
/// start time. Under the `size <= m/2` hypothesis, strictly more than
/// `m/2` processors are busy whenever a job is still waiting.
pub fn busy_at_events(sched: &Schedule) -> Vec<(f64, usize)> {
    let mut events: Vec<f64> = sched.pieces().iter().map(|p| p.start).collect();
    events.sort_by(f64::total_cmp);
    events.dedup();
    events
        .into_iter()
        .map(|t| {
            let busy = sched
                .pieces()
                .iter()
                .filter(|p| p.start <= t + TIME_TOL && p.end > t + TIME_TOL)
                .flat_map(|p| p.procs.iter())
                .collect::<std::collections::BTreeSet<_>>()
                .len();
            (t, busy)
        })
        .collect()
}
