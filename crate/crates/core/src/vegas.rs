//! Classic importance-sampling VEGAS: a separable adaptive grid, refined
//! between iterations, with inverse-variance combination of the iterations.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{derive_seed, CompensatedSum};
use crate::target::Integrand;

/// Samples per parallel work unit; fixed so results do not depend on the
/// number of workers.
const CHUNK: usize = 8192;

/// Per-axis bin boundaries `a = x_0 < x_1 < .. < x_{N_g} = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct VegasGrid {
    edges: Vec<Vec<f64>>,
}

impl VegasGrid {
    pub fn uniform(domain: &[(f64, f64)], bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::Config(format!("VEGAS needs at least 2 bins, got {bins}")));
        }
        if let Some((a, b)) = domain.iter().find(|(a, b)| !(b > a)) {
            return Err(Error::InvalidGrid(format!("empty interval [{a}, {b}]")));
        }
        Ok(VegasGrid {
            edges: domain
                .iter()
                .map(|&(a, b)| (0..=bins).map(|i| a + (b - a) * i as f64 / bins as f64).collect())
                .collect(),
        })
    }

    /// Grid from explicit boundary lists; each must be strictly increasing
    /// and all must have the same number of bins.
    pub fn from_edges(edges: Vec<Vec<f64>>) -> Result<Self> {
        let bins = edges.first().map_or(0, |e| e.len().saturating_sub(1));
        if bins < 2 {
            return Err(Error::Config("VEGAS needs at least 2 bins".into()));
        }
        for e in &edges {
            if e.len() != bins + 1 {
                return Err(Error::InvalidGrid("axes have different bin counts".into()));
            }
            if e.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidGrid("boundaries must be strictly increasing".into()));
            }
        }
        Ok(VegasGrid { edges })
    }

    pub fn dims(&self) -> usize {
        self.edges.len()
    }

    pub fn bins(&self) -> usize {
        self.edges[0].len() - 1
    }

    pub fn edges(&self, axis: usize) -> &[f64] {
        &self.edges[axis]
    }

    /// Maps `y` in `[0,1)^d` to `x`, writes each axis' bin, and returns the
    /// Jacobian `prod N_g dx_i`.
    pub fn map_point(&self, y: &[f64], x: &mut [f64], bins: &mut [usize]) -> f64 {
        let ng = self.bins();
        let mut jac = 1.0;
        for a in 0..self.dims() {
            let e = &self.edges[a];
            let t = y[a] * ng as f64;
            let i = (t as usize).min(ng - 1);
            let w = e[i + 1] - e[i];
            x[a] = e[i] + w * (t - i as f64);
            bins[a] = i;
            jac *= ng as f64 * w;
        }
        jac
    }

    /// `dim,bin,lo,hi` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["dim", "bin", "lo", "hi"])?;
        for (a, e) in self.edges.iter().enumerate() {
            for (i, p) in e.windows(2).enumerate() {
                w.write_record([(a + 1).to_string(), i.to_string(), p[0].to_string(), p[1].to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Per-axis, per-bin mean of `(J f)^2` over the samples landing in the bin;
/// empty bins get 0. `bins[s]` holds the bin of sample `s` on every axis.
pub fn accumulate_d(grid: &VegasGrid, bins: &[Vec<usize>], jf: &[f64]) -> Vec<Vec<f64>> {
    let (mut sums, counts) = bin_sums(grid, bins, jf);
    for (s, c) in sums.iter_mut().zip(&counts) {
        for (v, &n) in s.iter_mut().zip(c) {
            *v = if n > 0 { *v / n as f64 } else { 0.0 };
        }
    }
    sums
}

fn bin_sums(grid: &VegasGrid, bins: &[Vec<usize>], jf: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<u64>>) {
    let (d, ng) = (grid.dims(), grid.bins());
    let mut sums = vec![vec![0.0; ng]; d];
    let mut counts = vec![vec![0u64; ng]; d];
    for (b, v) in bins.iter().zip(jf) {
        for a in 0..d {
            sums[a][b[a]] += v * v;
            counts[a][b[a]] += 1;
        }
    }
    (sums, counts)
}

/// Three-point smoothing, normalization and the damping
/// `m_i = ((r_i - 1) / ln r_i)^alpha`.
pub fn smooth_compress(d: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let n = d.len();
    if n < 2 || d.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Config("D must have at least 2 non-negative entries".into()));
    }
    let mut s = vec![0.0; n];
    s[0] = 0.5 * (d[0] + d[1]);
    s[n - 1] = 0.5 * (d[n - 2] + d[n - 1]);
    for i in 1..n - 1 {
        s[i] = (d[i - 1] + d[i] + d[i + 1]) / 3.0;
    }
    let total: f64 = s.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Config("D is all zero or not finite".into()));
    }
    Ok(s.iter()
        .map(|&v| {
            let r = v / total;
            let base = if r <= 0.0 {
                0.0
            } else if (r - 1.0).abs() < 1e-12 {
                1.0
            } else {
                (r - 1.0) / r.ln()
            };
            base.powf(alpha)
        })
        .collect())
}

/// New boundaries giving every bin an equal share of `m`, interpolating
/// linearly inside the old bins.
pub fn rebalance(edges: &[f64], m: &[f64]) -> Vec<f64> {
    let ng = m.len();
    assert_eq!(edges.len(), ng + 1);
    let (a, b) = (edges[0], edges[ng]);
    let total: f64 = m.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return edges.to_vec();
    }
    let target = total / ng as f64;
    let mut out = Vec::with_capacity(ng + 1);
    out.push(a);
    let mut j = 0;
    let mut before = 0.0;
    for k in 1..ng {
        let need = k as f64 * target;
        while j < ng - 1 && before + m[j] < need {
            before += m[j];
            j += 1;
        }
        let frac = if m[j] > 0.0 { ((need - before) / m[j]).clamp(0.0, 1.0) } else { 1.0 };
        out.push(edges[j] + frac * (edges[j + 1] - edges[j]));
    }
    out.push(b);
    let eps = 1e-12 * (b - a);
    for k in 1..ng {
        out[k] = out[k].max(out[k - 1] + eps);
    }
    for k in (1..ng).rev() {
        out[k] = out[k].min(out[k + 1] - eps);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VegasConfig {
    pub bins: usize,
    pub samples_per_iteration: usize,
    pub iterations: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Keep the mapped points of the last iteration for diagnostics.
    pub keep_final_samples: bool,
}

impl Default for VegasConfig {
    fn default() -> Self {
        VegasConfig {
            bins: 50,
            samples_per_iteration: 100_000,
            iterations: 10,
            alpha: 1.5,
            seed: 0,
            keep_final_samples: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationResult {
    pub estimate: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct VegasResult {
    pub iterations: Vec<IterationResult>,
    pub combined: f64,
    pub combined_sigma: f64,
    /// Iteration with the smallest sigma.
    pub best_iteration: usize,
    pub grid: VegasGrid,
    /// Flattened `x` points of the last iteration, when requested.
    pub final_samples: Option<Vec<f64>>,
}

impl VegasResult {
    pub fn best(&self) -> IterationResult {
        self.iterations[self.best_iteration]
    }

    /// `iter,estimate,sigma,combined_estimate,combined_sigma,best` rows; the
    /// combined columns use iterations up to and including the row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iter", "estimate", "sigma", "combined_estimate", "combined_sigma", "best"])?;
        for j in 0..self.iterations.len() {
            let (ce, cs) = combine(&self.iterations[..=j]);
            let it = self.iterations[j];
            w.write_record([
                j.to_string(),
                it.estimate.to_string(),
                it.sigma.to_string(),
                ce.to_string(),
                cs.to_string(),
                u8::from(j == self.best_iteration).to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Inverse-variance combination. Iterations with zero sigma, if any, are
/// averaged with equal weight and the combined sigma is zero.
pub fn combine(its: &[IterationResult]) -> (f64, f64) {
    let exact: Vec<f64> = its.iter().filter(|i| i.sigma == 0.0).map(|i| i.estimate).collect();
    if !exact.is_empty() {
        return (exact.iter().sum::<f64>() / exact.len() as f64, 0.0);
    }
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for i in its {
        let w = 1.0 / (i.sigma * i.sigma);
        num.add(w * i.estimate);
        den.add(w);
    }
    (num.value() / den.value(), den.value().sqrt().recip())
}

struct ChunkStats {
    sum: f64,
    n: f64,
    mean: f64,
    m2: f64,
    d_sums: Vec<Vec<f64>>,
    d_counts: Vec<Vec<u64>>,
    points: Vec<f64>,
    bad: Option<(f64, Vec<f64>)>,
}

fn run_chunk(grid: &VegasGrid, f: &Integrand, n: usize, seed: u64, chunk: u64, keep: bool) -> ChunkStats {
    let d = grid.dims();
    let ng = grid.bins();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut st = ChunkStats {
        sum: 0.0,
        n: n as f64,
        mean: 0.0,
        m2: 0.0,
        d_sums: vec![vec![0.0; ng]; d],
        d_counts: vec![vec![0; ng]; d],
        points: Vec::with_capacity(if keep { n * d } else { 0 }),
        bad: None,
    };
    let mut s1 = CompensatedSum::new();
    let (mut y, mut x, mut b) = (vec![0.0; d], vec![0.0; d], vec![0usize; d]);
    for k in 0..n {
        for v in y.iter_mut() {
            *v = rng.random();
        }
        let jac = grid.map_point(&y, &mut x, &mut b);
        let fx = f.eval(&x);
        if !fx.is_finite() && st.bad.is_none() {
            st.bad = Some((fx, x.clone()));
        }
        let v = jac * fx;
        s1.add(v);
        // Welford update; avoids the cancellation in E[v^2] - E[v]^2.
        let delta = v - st.mean;
        st.mean += delta / (k + 1) as f64;
        st.m2 += delta * (v - st.mean);
        for a in 0..d {
            st.d_sums[a][b[a]] += v * v;
            st.d_counts[a][b[a]] += 1;
        }
        if keep {
            st.points.extend_from_slice(&x);
        }
    }
    st.sum = s1.value();
    st
}

/// Chan's pairwise merge of `(count, mean, M2)`.
fn merge_moments(a: (f64, f64, f64), b: (f64, f64, f64)) -> (f64, f64, f64) {
    let n = a.0 + b.0;
    if n == 0.0 {
        return a;
    }
    let delta = b.1 - a.1;
    (n, a.1 + delta * b.0 / n, a.2 + b.2 + delta * delta * a.0 * b.0 / n)
}

pub fn vegas_integrate(f: &Integrand, cfg: &VegasConfig) -> Result<VegasResult> {
    if cfg.iterations == 0 || cfg.samples_per_iteration < 2 {
        return Err(Error::Config("VEGAS needs at least 1 iteration of 2 samples".into()));
    }
    if !(cfg.alpha >= 0.0) {
        return Err(Error::Config(format!("alpha must be non-negative, got {}", cfg.alpha)));
    }
    let mut grid = VegasGrid::uniform(f.domain(), cfg.bins)?;
    let n = cfg.samples_per_iteration;
    let chunks = n.div_ceil(CHUNK);
    let mut its = Vec::with_capacity(cfg.iterations);
    let mut final_samples = None;
    for j in 0..cfg.iterations {
        let last = j + 1 == cfg.iterations;
        let keep = last && cfg.keep_final_samples;
        let seed = derive_seed(cfg.seed, j as u64);
        let stats: Vec<ChunkStats> = (0..chunks)
            .into_par_iter()
            .map(|c| run_chunk(&grid, f, CHUNK.min(n - c * CHUNK), seed, c as u64, keep))
            .collect();
        if let Some((value, point)) = stats.iter().find_map(|s| s.bad.clone()) {
            return Err(Error::NonFinite { value, point });
        }
        let mut s1 = CompensatedSum::new();
        let mut moments = (0.0, 0.0, 0.0);
        for s in &stats {
            s1.add(s.sum);
            moments = merge_moments(moments, (s.n, s.mean, s.m2));
        }
        let nf = n as f64;
        let est = s1.value() / nf;
        let var = (moments.2 / nf / (nf - 1.0)).max(0.0);
        its.push(IterationResult {
            estimate: est,
            sigma: var.sqrt(),
        });
        if keep {
            final_samples = Some(stats.iter().flat_map(|s| s.points.iter().copied()).collect());
        }
        if last {
            break;
        }
        for a in 0..grid.dims() {
            let mut sums = vec![0.0; grid.bins()];
            let mut counts = vec![0u64; grid.bins()];
            for s in &stats {
                for i in 0..grid.bins() {
                    sums[i] += s.d_sums[a][i];
                    counts[i] += s.d_counts[a][i];
                }
            }
            let dvals: Vec<f64> = sums
                .iter()
                .zip(&counts)
                .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
                .collect();
            // An all-zero D carries no information; keep the axis as it is.
            if let Ok(m) = smooth_compress(&dvals, cfg.alpha) {
                grid.edges[a] = rebalance(&grid.edges[a], &m);
            }
        }
    }
    let (combined, combined_sigma) = combine(&its);
    let best_iteration = its
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.sigma.total_cmp(&b.1.sigma))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(VegasResult {
        iterations: its,
        combined,
        combined_sigma,
        best_iteration,
        grid,
        final_samples,
    })
}

/// Sample fractions near the `p^d` product sites of diagonal peaks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhantomReport {
    pub samples: usize,
    /// Fraction of all samples near one of the `p` true peaks.
    pub true_fraction: f64,
    /// Fraction of all samples near one of the `p^d - p` phantom sites.
    pub phantom_fraction: f64,
    pub phantom_sites: usize,
}

impl PhantomReport {
    /// True-site share among samples near any site.
    pub fn true_share(&self) -> f64 {
        let near = self.true_fraction + self.phantom_fraction;
        if near > 0.0 {
            self.true_fraction / near
        } else {
            f64::NAN
        }
    }
}

/// Counts points (flattened, `dims` per point) within L-inf distance
/// `radius` of each product site built from the diagonal coordinates `peaks`.
pub fn phantom_diagnostic(points: &[f64], dims: usize, peaks: &[f64], radius: f64) -> PhantomReport {
    let samples = points.len() / dims;
    let mut hits_true = 0usize;
    let mut hits_phantom = 0usize;
    let mut site = vec![0usize; dims];
    'points: for x in points.chunks_exact(dims) {
        for (a, &v) in x.iter().enumerate() {
            match peaks.iter().position(|&c| (v - c).abs() < radius) {
                Some(p) => site[a] = p,
                None => continue 'points,
            }
        }
        if site.iter().all(|&p| p == site[0]) {
            hits_true += 1;
        } else {
            hits_phantom += 1;
        }
    }
    let n = samples.max(1) as f64;
    PhantomReport {
        samples,
        true_fraction: hits_true as f64 / n,
        phantom_fraction: hits_phantom as f64 / n,
        phantom_sites: peaks.len().pow(dims as u32) - peaks.len(),
    }
}

/// Fraction of 2-D points with `| |x - c| - radius | < half_width`.
pub fn annulus_fraction(points: &[f64], center: [f64; 2], radius: f64, half_width: f64) -> f64 {
    let n = points.len() / 2;
    let inside = points
        .chunks_exact(2)
        .filter(|x| (((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt() - radius).abs() < half_width)
        .count();
    inside as f64 / n.max(1) as f64
}
