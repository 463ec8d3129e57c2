//! Instance generators: the two hardness-reduction gadgets with their
//! decision thresholds, and the seeded random generator used by sweeps.
//!
//! The gadgets never decide the underlying NP-hard question; a witness
//! schedule is built only when the caller supplies a certificate (a
//! partition, or a proper 3-edge-coloring).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::duropt::{self, WeightedProgram};
use crate::model::{Alpha, Instance, Job, JobId, JobKind, Piece, Schedule};
use crate::{Error, Result};

/// A generated hardness instance with its decision threshold and, when a
/// certificate was supplied, the schedule realizing it.
#[derive(Debug, Clone)]
pub struct GadgetOutput {
    pub instance: Instance,
    pub threshold: f64,
    pub witness_sumc: Option<f64>,
    pub witness: Option<Schedule>,
}

/// Builds the round-structured witness: round `r` runs its jobs in parallel
/// for `durations[r]`, each on the given processor block.
fn rounds_schedule(rounds: &[Vec<(JobId, Vec<usize>, f64)>], durations: &[f64]) -> Schedule {
    let mut pieces = Vec::new();
    let mut t = 0.0;
    for (round, &dur) in rounds.iter().zip(durations) {
        for (job, procs, work_per_proc) in round {
            pieces.push(Piece::new(*job, procs.iter().copied(), t, t + dur, work_per_proc / dur));
        }
        t += dur;
    }
    Schedule::from_pieces(pieces)
}

/// 3-PARTITION gadget: `3q` rigid jobs with unit per-processor work on
/// `m = B` processors and budget `E = Bq`.
///
/// The threshold is `T = 3 * sumc_star` where `sumc_star` is the optimum of
/// the per-processor chain of `q` unit jobs under per-processor budget `q`;
/// at most 3 rigid jobs ever run in parallel. A supplied `partition` (as
/// `q` index triples into `a`) yields the witness schedule that meets `T`
/// with energy exactly `E`.
pub fn gen_3partition(
    a: &[u64],
    b: u64,
    q: u64,
    alpha: Alpha,
    partition: Option<&[Vec<usize>]>,
) -> Result<GadgetOutput> {
    if !alpha.is_valid() {
        return Err(Error::BadAlpha(alpha.get()));
    }
    if q == 0 || a.len() != 3 * q as usize {
        return Err(Error::Gadget(format!("expected 3q = {} weights, got {}", 3 * q, a.len())));
    }
    let total: u64 = a.iter().sum();
    if total != b * q {
        return Err(Error::Gadget(format!("weights sum to {total}, expected Bq = {}", b * q)));
    }
    if let Some(bad) = a.iter().find(|&&x| 4 * x < b || 2 * x > b) {
        return Err(Error::Gadget(format!("weight {bad} outside [B/4, B/2]")));
    }

    let jobs: Vec<Job> = a
        .iter()
        .enumerate()
        .map(|(i, &w)| Job::rigid(i as JobId, w as f64, w as usize))
        .collect();
    let mut instance =
        Instance::new(JobKind::Rigid, b as usize, (b * q) as f64, alpha, jobs);
    instance.reduction = Some("3partition".to_string());

    let al = alpha.get();
    let qf = q as f64;
    let s: f64 = (1..=q).map(|j| ((q - j + 1) as f64).powf((al - 1.0) / al)).sum();
    let sumc_star = s.powf(al / (al - 1.0)) * qf.powf(1.0 / (1.0 - al));
    let threshold = 3.0 * sumc_star;

    let (witness, witness_sumc) = match partition {
        None => (None, None),
        Some(triples) => {
            check_partition(a, b, q, triples)?;
            let durations = per_processor_durations(q as usize, qf, alpha)?;
            let mut rounds = Vec::with_capacity(triples.len());
            for triple in triples {
                let mut next_proc = 0usize;
                let mut round = Vec::with_capacity(3);
                for &idx in triple {
                    let size = a[idx] as usize;
                    let procs: Vec<usize> = (next_proc..next_proc + size).collect();
                    next_proc += size;
                    round.push((idx as JobId, procs, 1.0));
                }
                rounds.push(round);
            }
            let sched = rounds_schedule(&rounds, &durations);
            let sumc = crate::model::total_completion(&sched);
            (Some(sched), Some(sumc))
        }
    };
    Ok(GadgetOutput { instance, threshold, witness_sumc, witness })
}

fn check_partition(a: &[u64], b: u64, q: u64, triples: &[Vec<usize>]) -> Result<()> {
    if triples.len() != q as usize {
        return Err(Error::Gadget(format!("expected {q} triples, got {}", triples.len())));
    }
    let mut used = vec![false; a.len()];
    for triple in triples {
        if triple.len() != 3 {
            return Err(Error::Gadget("every certificate set must have 3 elements".to_string()));
        }
        let mut sum = 0u64;
        for &idx in triple {
            if idx >= a.len() || used[idx] {
                return Err(Error::Gadget(format!("certificate reuses or exceeds index {idx}")));
            }
            used[idx] = true;
            sum += a[idx];
        }
        if sum != b {
            return Err(Error::Gadget(format!("certificate set sums to {sum}, expected {b}")));
        }
    }
    Ok(())
}

/// Optimal durations of `k` unit jobs in a chain under budget `e`:
/// the program `sum p_j (k-j+1) -> min` s.t. `sum p_j^(1-alpha) = e`.
fn per_processor_durations(k: usize, e: f64, alpha: Alpha) -> Result<Vec<f64>> {
    let weights: Vec<f64> = (1..=k).map(|j| (k - j + 1) as f64).collect();
    let coeffs = vec![1.0; k];
    let sol = duropt::solve_weighted(&WeightedProgram::new(weights, coeffs, e, alpha)?)?;
    Ok(sol.durations)
}

/// Chromatic-index gadget: one two-processor job per edge of a cubic graph,
/// `m = |V|` processors, unit per-processor works, budget `E = 2|A| = 3|V|`.
///
/// The threshold is `T = (m/2) * sumc_star` with `sumc_star` the optimum of
/// the three-job chain under per-processor budget 3; at most `m/2`
/// two-processor jobs ever run in parallel. A supplied proper 3-edge
/// `coloring` (one color in `{0,1,2}` per edge) yields the witness.
pub fn gen_chromatic(
    edges: &[(usize, usize)],
    vertex_count: usize,
    alpha: Alpha,
    coloring: Option<&[usize]>,
) -> Result<GadgetOutput> {
    if !alpha.is_valid() {
        return Err(Error::BadAlpha(alpha.get()));
    }
    if vertex_count == 0 || !vertex_count.is_multiple_of(2) {
        return Err(Error::Gadget("odd vertex count".to_string()));
    }
    let mut degree = vec![0usize; vertex_count];
    let mut seen = std::collections::BTreeSet::new();
    for &(u, v) in edges {
        if u >= vertex_count || v >= vertex_count || u == v {
            return Err(Error::Gadget(format!("invalid edge {u}-{v}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::Gadget(format!("duplicate edge {u}-{v}")));
        }
        degree[u] += 1;
        degree[v] += 1;
    }
    if degree.iter().any(|&d| d != 3) {
        return Err(Error::Gadget("graph not cubic".to_string()));
    }

    let jobs: Vec<Job> = edges
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| Job::dedicated(i as JobId, 2.0, [u, v]))
        .collect();
    let n = jobs.len();
    let mut instance =
        Instance::new(JobKind::Dedicated, vertex_count, 2.0 * n as f64, alpha, jobs);
    instance.reduction = Some("chromatic-index".to_string());

    let al = alpha.get();
    let bracket = 3.0_f64.powf((al - 1.0) / al) + 2.0_f64.powf((al - 1.0) / al) + 1.0;
    let sumc_star = (bracket.powf(al) / 3.0).powf(1.0 / (al - 1.0));
    let threshold = vertex_count as f64 / 2.0 * sumc_star;

    let (witness, witness_sumc) = match coloring {
        None => (None, None),
        Some(colors) => {
            check_coloring(edges, vertex_count, colors)?;
            let durations = per_processor_durations(3, 3.0, alpha)?;
            let mut rounds = vec![Vec::new(), Vec::new(), Vec::new()];
            for (i, (&(u, v), &c)) in edges.iter().zip(colors).enumerate() {
                rounds[c].push((i as JobId, vec![u, v], 1.0));
            }
            let sched = rounds_schedule(&rounds, &durations);
            let sumc = crate::model::total_completion(&sched);
            (Some(sched), Some(sumc))
        }
    };
    Ok(GadgetOutput { instance, threshold, witness_sumc, witness })
}

fn check_coloring(edges: &[(usize, usize)], vertex_count: usize, colors: &[usize]) -> Result<()> {
    if colors.len() != edges.len() {
        return Err(Error::Gadget("coloring must assign one color per edge".to_string()));
    }
    if colors.iter().any(|&c| c > 2) {
        return Err(Error::Gadget("colors must lie in {0, 1, 2}".to_string()));
    }
    let mut seen = vec![[false; 3]; vertex_count];
    for (&(u, v), &c) in edges.iter().zip(colors) {
        for w in [u, v] {
            if seen[w][c] {
                return Err(Error::Gadget(format!("color {c} repeats at vertex {w}")));
            }
            seen[w][c] = true;
        }
    }
    let mut class_sizes = [0usize; 3];
    for &c in colors {
        class_sizes[c] += 1;
    }
    if class_sizes.iter().any(|&s| s != vertex_count / 2) {
        return Err(Error::Gadget("color classes are not perfect matchings".to_string()));
    }
    Ok(())
}

/// Controls whether random instances share one per-processor work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkMode {
    Identical,
    Free,
}

pub(crate) fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Deterministic seeded instance generator.
///
/// Sizes and caps are uniform, per-processor works log-uniform in
/// `[0.1, 10]` (shared in [`WorkMode::Identical`]), the budget log-uniform
/// in `[0.5 n, 5 n]`. Moldable instances are generated agreeable by
/// sort-coupling works with caps.
pub fn gen_random(
    kind: JobKind,
    n: usize,
    m: usize,
    seed: u64,
    alpha: Alpha,
    work_mode: WorkMode,
) -> Instance {
    assert!(n >= 1 && m >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let energy = log_uniform(&mut rng, 0.5 * n as f64, 5.0 * n as f64);
    let shared_work = log_uniform(&mut rng, 0.1, 10.0);
    let draw_work = |rng: &mut ChaCha8Rng| match work_mode {
        WorkMode::Identical => shared_work,
        WorkMode::Free => log_uniform(rng, 0.1, 10.0),
    };

    let jobs: Vec<Job> = match kind {
        JobKind::Rigid => {
            let max_size = (m / 2).max(1);
            (0..n)
                .map(|i| {
                    let size = rng.random_range(1..=max_size);
                    let w = draw_work(&mut rng);
                    Job::rigid(i as JobId, w * size as f64, size)
                })
                .collect()
        }
        JobKind::Moldable => {
            let mut works: Vec<f64> = (0..n).map(|_| draw_work(&mut rng)).collect();
            let mut caps: Vec<usize> = (0..n).map(|_| rng.random_range(1..=m)).collect();
            works.sort_by(f64::total_cmp);
            caps.sort_unstable();
            let mut pairs: Vec<(f64, usize)> = works.into_iter().zip(caps).collect();
            pairs.shuffle(&mut rng);
            pairs
                .into_iter()
                .enumerate()
                .map(|(i, (v, d))| Job::moldable(i as JobId, v, d))
                .collect()
        }
        JobKind::Dedicated => (0..n)
            .map(|i| {
                let fix: Vec<usize> = if m == 2 {
                    match rng.random_range(0..3) {
                        0 => vec![0],
                        1 => vec![1],
                        _ => vec![0, 1],
                    }
                } else {
                    loop {
                        let set: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
                        if !set.is_empty() {
                            break set;
                        }
                    }
                };
                let w = draw_work(&mut rng);
                Job::dedicated(i as JobId, w * fix.len() as f64, fix)
            })
            .collect(),
    };
    Instance::new(kind, m, energy, alpha, jobs)
}
