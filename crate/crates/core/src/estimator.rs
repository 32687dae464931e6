//! The importance-sampling estimator driven by measured shot counts.
//!
//! Shots are drawn from the proposal, the measured cells are completed to a
//! partition of the domain by [`crate::tiling`], and every group receives as
//! many quasi-random samples as its anchor has shots. A sample in group `k`
//! carries weight `|group_k| * N / N_k`.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::sobol::{ShiftedSobol, MAX_DIMS};
use crate::statevector::{sample, StateVector, PMF_TOLERANCE};
use crate::stats::{derive_seed, mean_std, CompensatedSum};
use crate::target::Integrand;
use crate::tiling::{classify_regions, full_coverage, MeasuredSet, RegionCounts, TileCoverage, TileGroup};

const STREAM_SHOTS: u64 = 0;
const STREAM_ALLOCATION: u64 = 1;
const STREAM_PLACEMENT: u64 = 2;

/// A sample whose weight exceeds this fraction of `|Omega|` raises the
/// heavy-weight flag.
pub const HEAVY_WEIGHT_FRACTION: f64 = 0.05;

/// Defensive mixture `p' = (1 - beta) p + beta * uniform`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MixtureConfig {
    pub beta: f64,
}

impl MixtureConfig {
    pub fn new(beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::Config(format!("defensive fraction must lie in [0, 1), got {beta}")));
        }
        Ok(MixtureConfig { beta })
    }

    pub fn apply(&self, pmf: &[f64]) -> Vec<f64> {
        if self.beta == 0.0 {
            return pmf.to_vec();
        }
        let u = self.beta / pmf.len() as f64;
        pmf.iter().map(|p| (1.0 - self.beta) * p + u).collect()
    }
}

/// Splits `n_k` samples over rects holding `rect_cells` cells each, in
/// proportion to volume. Integer parts are assigned directly; the remaining
/// units go out by systematic sampling with offset `u` in `[0,1)`, so rect
/// `r` receives `n_k * c_r / C` samples in expectation.
pub fn allocate_samples(rect_cells: &[u64], n_k: u64, u: f64) -> Vec<u64> {
    let total: u128 = rect_cells.iter().map(|&c| c as u128).sum();
    let mut out = Vec::with_capacity(rect_cells.len());
    let mut rems = Vec::with_capacity(rect_cells.len());
    for &c in rect_cells {
        let exact = n_k as u128 * c as u128;
        out.push((exact / total) as u64);
        rems.push(exact % total);
    }
    let step = total as f64;
    let mut next = u * step;
    let mut cum = 0u128;
    for (slot, rem) in out.iter_mut().zip(rems) {
        cum += rem;
        while next < cum as f64 {
            *slot += 1;
            next += step;
        }
    }
    out
}

/// Visits the quasi-random sample points of group `k`, rect by rect.
fn place_group<F: FnMut(&[f64])>(spec: &GridSpec, group: &TileGroup, k: usize, seed: u64, mut visit: F) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_ALLOCATION));
    rng.set_stream(k as u64);
    let cells: Vec<u64> = group.rects.iter().map(|r| r.cell_count()).collect();
    let alloc = allocate_samples(&cells, group.count, rng.random());
    let mut sobol = ShiftedSobol::seeded(spec.dims(), derive_seed(seed, STREAM_PLACEMENT), k as u64)?;
    let mut x = vec![0.0; spec.dims()];
    for (rect, &m) in group.rects.iter().zip(&alloc) {
        let bounds = spec.rect_bounds(rect);
        for _ in 0..m {
            sobol.next_in(&bounds, &mut x);
            visit(&x);
        }
    }
    Ok(())
}

/// Shots, measured set and coverage for one estimator run.
#[derive(Debug, Clone)]
pub struct ShotPlan {
    pub shots: u64,
    pub measured: MeasuredSet,
    pub coverage: TileCoverage,
}

impl ShotPlan {
    pub fn draw(spec: &GridSpec, proposal: &[f64], shots: u64, mix: MixtureConfig, seed: u64) -> Result<Self> {
        check_inputs(spec, proposal, shots)?;
        let pmf = mix.apply(proposal);
        let counts = sample(&pmf, shots, derive_seed(seed, STREAM_SHOTS))?;
        let measured = MeasuredSet::from_counts(&counts)?;
        let coverage = full_coverage(spec, &measured)?;
        Ok(ShotPlan {
            shots,
            measured,
            coverage,
        })
    }

    /// Weight `|group_k| * N / N_k` of every sample in group `k`.
    pub fn weight(&self, k: usize) -> f64 {
        let g = &self.coverage.groups[k];
        g.volume * self.shots as f64 / g.count as f64
    }
}

fn check_inputs(spec: &GridSpec, proposal: &[f64], shots: u64) -> Result<()> {
    if spec.dims() > MAX_DIMS {
        return Err(Error::SobolDims {
            got: spec.dims(),
            max: MAX_DIMS,
        });
    }
    if proposal.len() as u64 != spec.num_cells() {
        return Err(Error::PmfLength {
            got: proposal.len(),
            expected: spec.num_cells() as usize,
        });
    }
    let sum: f64 = proposal.iter().sum();
    if (sum - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::Unnormalized { sum });
    }
    if shots < 2 {
        return Err(Error::Config("the estimator needs at least 2 shots".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub estimate: f64,
    pub std: f64,
    pub shots: u64,
    /// Distinct states observed.
    pub states: usize,
    pub hilbert_fraction: f64,
    pub regions: RegionCounts,
    pub beta: f64,
    pub seed: u64,
    /// Some sample carried more than [`HEAVY_WEIGHT_FRACTION`] of `|Omega|`.
    pub heavy_weight: bool,
}

/// Integrates `f` with shots drawn from `proposal` (a PMF over the grid).
pub fn qais_estimate_pmf(
    spec: &GridSpec,
    f: &Integrand,
    proposal: &[f64],
    shots: u64,
    mix: MixtureConfig,
    seed: u64,
) -> Result<EstimateResult> {
    if f.dims() != spec.dims() {
        return Err(Error::DimensionMismatch {
            expected: spec.dims(),
            got: f.dims(),
        });
    }
    let plan = ShotPlan::draw(spec, proposal, shots, mix, seed)?;
    let groups = &plan.coverage.groups;
    // Per-group sums of f and f^2, reduced below in group order.
    let sums: Vec<(f64, f64)> = (0..groups.len())
        .into_par_iter()
        .map(|k| -> Result<(f64, f64)> {
            let mut s1 = CompensatedSum::new();
            let mut s2 = CompensatedSum::new();
            let mut bad = None;
            place_group(spec, &groups[k], k, seed, |x| {
                let v = f.eval(x);
                if !v.is_finite() && bad.is_none() {
                    bad = Some((v, x.to_vec()));
                }
                s1.add(v);
                s2.add(v * v);
            })?;
            if let Some((value, point)) = bad {
                return Err(Error::NonFinite { value, point });
            }
            Ok((s1.value(), s2.value()))
        })
        .collect::<Result<_>>()?;

    let n = shots as f64;
    let mut est = CompensatedSum::new();
    let mut sq = CompensatedSum::new();
    let mut heavy = false;
    let limit = HEAVY_WEIGHT_FRACTION * spec.domain_volume();
    for (k, &(s1, s2)) in sums.iter().enumerate() {
        let w = plan.weight(k);
        est.add(w * s1);
        sq.add(w * w * s2);
        heavy |= w / n > limit;
    }
    let estimate = est.value() / n;
    let var = ((sq.value() / n - estimate * estimate) / (n - 1.0)).max(0.0);
    let labels = classify_regions(spec, &plan.measured, 1.0)?;
    let states = plan.measured.len();
    Ok(EstimateResult {
        estimate,
        std: var.sqrt(),
        shots,
        states,
        hilbert_fraction: states as f64 / spec.num_cells() as f64,
        regions: RegionCounts::from_labels(&labels),
        beta: mix.beta,
        seed,
        heavy_weight: heavy,
    })
}

pub fn qais_estimate(
    spec: &GridSpec,
    f: &Integrand,
    proposal: &StateVector,
    shots: u64,
    mix: MixtureConfig,
    seed: u64,
) -> Result<EstimateResult> {
    if proposal.num_qubits() != spec.total_qubits() {
        return Err(Error::DimensionMismatch {
            expected: spec.total_qubits() as usize,
            got: proposal.num_qubits() as usize,
        });
    }
    qais_estimate_pmf(spec, f, &proposal.probabilities(), shots, mix, seed)
}

/// Sample points and weights of one run, flattened row-major.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub dims: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dims..(i + 1) * self.dims]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dims)
    }
}

/// The points the estimator would evaluate for this seed, without evaluating.
pub fn sample_batch(spec: &GridSpec, proposal: &[f64], shots: u64, mix: MixtureConfig, seed: u64) -> Result<SampleBatch> {
    let plan = ShotPlan::draw(spec, proposal, shots, mix, seed)?;
    let mut batch = SampleBatch {
        dims: spec.dims(),
        points: Vec::with_capacity(shots as usize * spec.dims()),
        weights: Vec::with_capacity(shots as usize),
    };
    for (k, g) in plan.coverage.groups.iter().enumerate() {
        let w = plan.weight(k);
        place_group(spec, g, k, seed, |x| {
            batch.points.extend_from_slice(x);
            batch.weights.push(w);
        })?;
    }
    Ok(batch)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatSummary {
    pub runs: Vec<EstimateResult>,
    pub mean: f64,
    /// Standard deviation of the estimates across runs.
    pub spread: f64,
    pub mean_std: f64,
}

/// `replicates` independent runs with seeds derived from `seed`.
pub fn repeat_runs(
    spec: &GridSpec,
    f: &Integrand,
    proposal: &[f64],
    shots: u64,
    mix: MixtureConfig,
    replicates: usize,
    seed: u64,
) -> Result<RepeatSummary> {
    if replicates < 2 {
        return Err(Error::Config("replicate studies need at least 2 runs".into()));
    }
    let runs = (0..replicates)
        .into_par_iter()
        .map(|r| qais_estimate_pmf(spec, f, proposal, shots, mix, derive_seed(seed, r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let est: Vec<f64> = runs.iter().map(|r| r.estimate).collect();
    let stds: Vec<f64> = runs.iter().map(|r| r.std).collect();
    let (mean, spread) = mean_std(&est);
    let (mean_std, _) = mean_std(&stds);
    Ok(RepeatSummary {
        runs,
        mean,
        spread,
        mean_std,
    })
}

#[derive(Debug, Serialize)]
struct EstimateRow {
    run_id: usize,
    #[serde(rename = "N")]
    n: u64,
    estimate: f64,
    std: f64,
    #[serde(rename = "M")]
    m: usize,
    hilbert_fraction: f64,
    beta: f64,
    seed: u64,
}

/// Writes `(run_id, result)` rows with the columns
/// `run_id,N,estimate,std,M,hilbert_fraction,beta,seed`.
pub fn write_results_csv<'a, W, I>(rows: I, out: W, header: bool) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (usize, &'a EstimateResult)>,
{
    let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(out);
    for (run_id, r) in rows {
        w.serialize(EstimateRow {
            run_id,
            n: r.shots,
            estimate: r.estimate,
            std: r.std,
            m: r.states,
            hilbert_fraction: r.hilbert_fraction,
            beta: r.beta,
            seed: r.seed,
        })?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Appends rows to `path`, writing the header only when the file is new.
pub fn append_results_csv<'a, I>(path: &Path, rows: I) -> Result<()>
where
    I: IntoIterator<Item = (usize, &'a EstimateResult)>,
{
    let fresh = !path.exists() || std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    write_results_csv(rows, std::io::BufWriter::new(file), fresh)
}
