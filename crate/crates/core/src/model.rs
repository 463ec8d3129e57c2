//! Domain types, instance validation and energy/objective accounting.
//!
//! All types are immutable values after construction and every operation is
//! a pure function, so everything here is safe to share across threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Job identifier as it appears in instance files.
pub type JobId = u64;

/// Absolute tolerance used when comparing schedule times.
pub const TIME_TOL: f64 = 1e-9;
/// Relative tolerance used when comparing energies.
pub const ENERGY_REL_TOL: f64 = 1e-9;

/// Power-law exponent: a processor running at speed `s` draws power `s^alpha`.
///
/// Valid exponents are strictly greater than 1 (a typical value is 3).
/// Deserialization accepts any float so that [`validate_instance`] can report
/// the breach instead of failing to parse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        let a = Alpha(value);
        if a.is_valid() {
            Ok(a)
        } else {
            Err(Error::BadAlpha(value))
        }
    }

    /// Wraps a raw value without the `> 1` check.
    pub fn new_unchecked(value: f64) -> Self {
        Alpha(value)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_valid(self) -> bool {
        self.0.is_finite() && self.0 > 1.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Processor requirement of a job, one variant per job kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Demand {
    /// Runs on any processor subset of exactly this cardinality.
    Rigid { size: usize },
    /// Runs on any processor count up to this cap, fixed at start.
    Moldable { delta: usize },
    /// Runs on exactly this prespecified processor set.
    Dedicated { fix: BTreeSet<usize> },
}

/// A job: total processing volume plus its processor demand.
///
/// Only the total work `V_j` is stored; the per-processor share
/// `W_j = V_j / m_j` is always derived so the two can never disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    #[serde(rename = "work")]
    pub total_work: f64,
    #[serde(flatten)]
    pub demand: Demand,
}

impl Job {
    pub fn rigid(id: JobId, total_work: f64, size: usize) -> Job {
        Job { id, total_work, demand: Demand::Rigid { size } }
    }

    pub fn moldable(id: JobId, total_work: f64, delta: usize) -> Job {
        Job { id, total_work, demand: Demand::Moldable { delta } }
    }

    pub fn dedicated(id: JobId, total_work: f64, procs: impl IntoIterator<Item = usize>) -> Job {
        Job { id, total_work, demand: Demand::Dedicated { fix: procs.into_iter().collect() } }
    }

    /// Number of processors a rigid or dedicated job occupies.
    ///
    /// For moldable jobs this is the cap `delta_j`; the realized width is
    /// chosen at scheduling time.
    pub fn demand_size(&self) -> usize {
        match &self.demand {
            Demand::Rigid { size } => *size,
            Demand::Moldable { delta } => *delta,
            Demand::Dedicated { fix } => fix.len(),
        }
    }

    /// Per-processor work `W_j = V_j / m_j` when run at width `m_j`.
    pub fn work_per_proc(&self, width: usize) -> f64 {
        self.total_work / width as f64
    }
}

/// Which demand variant every job of an instance carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Rigid,
    Moldable,
    Dedicated,
}

impl fmt::Display for JobKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JobKind::Rigid => write!(f, "rigid"),
            JobKind::Moldable => write!(f, "moldable"),
            JobKind::Dedicated => write!(f, "dedicated"),
        }
    }
}

/// A scheduling instance: processors, energy budget, exponent and jobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub kind: JobKind,
    pub m: usize,
    pub energy: f64,
    pub alpha: Alpha,
    pub jobs: Vec<Job>,
    /// Set by the gadget generators for traceability.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reduction: Option<String>,
}

impl Instance {
    pub fn new(kind: JobKind, m: usize, energy: f64, alpha: Alpha, jobs: Vec<Job>) -> Instance {
        Instance { kind, m, energy, alpha, jobs, reduction: None }
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn job(&self, id: JobId) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    pub fn job_ids(&self) -> Vec<JobId> {
        self.jobs.iter().map(|j| j.id).collect()
    }

    pub fn from_json_str(s: &str) -> Result<Instance> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInstance(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }
}

/// A single invariant breach found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub job: Option<JobId>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.job {
            Some(id) => write!(f, "{} (job {}): {}", self.field, id, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

fn violation(field: &str, job: Option<JobId>, message: impl Into<String>) -> Violation {
    Violation { field: field.to_string(), job, message: message.into() }
}

/// Checks every instance and job invariant; violations are data, not failures.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if inst.m < 1 {
        out.push(violation("m", None, "processor count must be at least 1"));
    }
    if !(inst.energy.is_finite() && inst.energy > 0.0) {
        out.push(violation("energy", None, "energy budget must be positive"));
    }
    if !inst.alpha.is_valid() {
        out.push(violation("alpha", None, "alpha must exceed 1"));
    }
    if inst.jobs.is_empty() {
        out.push(violation("jobs", None, "instance has no jobs"));
    }
    let mut seen = BTreeSet::new();
    for job in &inst.jobs {
        if !seen.insert(job.id) {
            out.push(violation("id", Some(job.id), "duplicate job id"));
        }
        if !(job.total_work.is_finite() && job.total_work > 0.0) {
            out.push(violation("work", Some(job.id), "total work must be positive"));
        }
        match (&job.demand, inst.kind) {
            (Demand::Rigid { size }, JobKind::Rigid) => {
                if *size < 1 {
                    out.push(violation("size", Some(job.id), "size must be at least 1"));
                } else if *size > inst.m {
                    out.push(violation("size", Some(job.id), "size exceeds m"));
                }
            }
            (Demand::Moldable { delta }, JobKind::Moldable) => {
                if *delta < 1 {
                    out.push(violation("delta", Some(job.id), "delta must be at least 1"));
                } else if *delta > inst.m {
                    out.push(violation("delta", Some(job.id), "delta exceeds m"));
                }
            }
            (Demand::Dedicated { fix }, JobKind::Dedicated) => {
                if fix.is_empty() {
                    out.push(violation("fix", Some(job.id), "fix must be non-empty"));
                }
                if fix.iter().any(|&p| p >= inst.m) {
                    out.push(violation("fix", Some(job.id), "fix contains a processor id outside [0, m)"));
                }
            }
            (_, kind) => {
                out.push(violation(
                    "demand",
                    Some(job.id),
                    format!("demand variant does not match instance kind {kind}"),
                ));
            }
        }
    }
    out
}

/// One execution piece: a job running on a processor set at constant speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub job: JobId,
    pub procs: BTreeSet<usize>,
    pub start: f64,
    pub end: f64,
    pub speed: f64,
}

impl Piece {
    pub fn new(
        job: JobId,
        procs: impl IntoIterator<Item = usize>,
        start: f64,
        end: f64,
        speed: f64,
    ) -> Piece {
        Piece { job, procs: procs.into_iter().collect(), start, end, speed }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0.0
    }
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    pieces: Vec<Piece>,
}

/// A set of execution pieces together with per-job widths and durations.
///
/// Widths and durations are derived from the pieces on construction: a job's
/// width is the cardinality of its processor set and its duration the sum of
/// its piece lengths. Files store only the pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pieces: Vec<Piece>,
    widths: BTreeMap<JobId, usize>,
    durations: BTreeMap<JobId, f64>,
}

impl Schedule {
    pub fn from_pieces(pieces: Vec<Piece>) -> Schedule {
        let mut widths = BTreeMap::new();
        let mut durations = BTreeMap::new();
        for p in &pieces {
            widths.entry(p.job).or_insert_with(|| p.procs.len());
            *durations.entry(p.job).or_insert(0.0) += p.len();
        }
        Schedule { pieces, widths, durations }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn jobs(&self) -> impl Iterator<Item = JobId> + '_ {
        self.durations.keys().copied()
    }

    pub fn width(&self, job: JobId) -> Option<usize> {
        self.widths.get(&job).copied()
    }

    pub fn duration(&self, job: JobId) -> Option<f64> {
        self.durations.get(&job).copied()
    }

    /// Completion time: the latest end among the job's pieces.
    pub fn completion(&self, job: JobId) -> Option<f64> {
        self.pieces
            .iter()
            .filter(|p| p.job == job)
            .map(|p| p.end)
            .reduce(f64::max)
    }

    pub fn makespan(&self) -> f64 {
        self.pieces.iter().map(|p| p.end).fold(0.0, f64::max)
    }

    /// True when every job runs as a single piece.
    pub fn is_nonpreemptive(&self) -> bool {
        let mut count: BTreeMap<JobId, usize> = BTreeMap::new();
        for p in &self.pieces {
            *count.entry(p.job).or_insert(0) += 1;
        }
        count.values().all(|&c| c == 1)
    }

    pub fn from_json_str(s: &str) -> Result<Schedule> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInstance(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schedule serializes");
        s.push('\n');
        s
    }
}

impl Serialize for Schedule {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ScheduleFile { pieces: self.pieces.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Schedule {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = ScheduleFile::deserialize(deserializer)?;
        Ok(Schedule::from_pieces(file.pieces))
    }
}

/// Total energy drawn by a schedule: the integral of the active speeds
/// raised to `alpha` over time, `sum over pieces of |procs| * len * speed^alpha`.
///
/// For a schedule satisfying the invariants this equals
/// `sum_j m_j * W_j^alpha * p_j^(1-alpha)`.
pub fn energy_of(sched: &Schedule, inst: &Instance) -> Result<f64> {
    for job in &inst.jobs {
        if sched.duration(job.id).is_none() {
            return Err(Error::MissingPieces(job.id));
        }
    }
    let a = inst.alpha.get();
    Ok(sched
        .pieces()
        .iter()
        .map(|p| p.procs.len() as f64 * p.len() * p.speed.powf(a))
        .sum())
}

/// Sum of completion times over all jobs present in the schedule.
pub fn total_completion(sched: &Schedule) -> f64 {
    sched.jobs().map(|j| sched.completion(j).unwrap_or(0.0)).sum()
}
