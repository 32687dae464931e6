//! Born-machine training: fit the ansatz output distribution to a target PMF
//! by derivative-free minimization of the discretized KL divergence.

use std::cell::RefCell;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{run_ansatz, AnsatzSpec, ParamVector, StateVector, PMF_TOLERANCE};
use crate::target::TargetPmf;

/// Probabilities below this count as zero in the KL divergence.
pub const Q_FLOOR: f64 = 1e-300;

/// Half-width of the uniform parameter initialization.
pub const INIT_SPREAD: f64 = 0.1;

fn check_pmf(p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::Unnormalized { sum });
    }
    Ok(())
}

/// `sum_i P_i ln(P_i / Q_i)` over cells with `P_i > 0`; `+inf` when such a
/// cell has `Q_i < Q_FLOOR`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::PmfLength {
            got: q.len(),
            expected: p.len(),
        });
    }
    check_pmf(p)?;
    check_pmf(q)?;
    Ok(kl_unchecked(p, q))
}

fn kl_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi < Q_FLOOR {
                return f64::INFINITY;
            }
            total += pi * (pi / qi).ln();
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    #[default]
    Cobyla,
    NelderMead,
}

impl std::str::FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "cobyla" => Ok(Optimizer::Cobyla),
            "nelder-mead" | "neldermead" | "nm" => Ok(Optimizer::NelderMead),
            other => Err(Error::Config(format!(
                "unknown optimizer '{other}', expected cobyla or nelder-mead"
            ))),
        }
    }
}

/// Iterations count cost evaluations for both optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub max_iterations: usize,
    pub initial_step: f64,
    /// Absolute cost change below which the optimizer stops; a starting cost
    /// at or below it ends training immediately.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: Optimizer::Cobyla,
            max_iterations: 5000,
            initial_step: 0.5,
            tolerance: 1e-10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if !(self.initial_step > 0.0) {
            return Err(Error::Config("initial_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub best_params: ParamVector,
    /// `(evaluation, KL)` for every cost evaluation; entry 0 is the uniform
    /// state at zero parameters.
    pub history: Vec<(usize, f64)>,
    pub final_kl: f64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl TrainReport {
    pub fn initial_kl(&self) -> f64 {
        self.history[0].1
    }

    pub fn running_min(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.history
            .iter()
            .map(|&(_, c)| {
                best = best.min(c);
                best
            })
            .collect()
    }

    /// `iteration,kl` rows.
    pub fn write_history_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "kl"])?;
        for (i, c) in &self.history {
            w.write_record([i.to_string(), c.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_history_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_history_csv(std::io::BufWriter::new(f))
    }
}

struct Tracker<'a> {
    ansatz: &'a AnsatzSpec,
    n: u32,
    target: &'a [f64],
    history: Vec<(usize, f64)>,
    best: (f64, Vec<f64>),
}

impl Tracker<'_> {
    fn cost(&mut self, x: &[f64]) -> f64 {
        let c = match run_ansatz(self.ansatz, self.n, x) {
            Ok(state) => kl_unchecked(self.target, &state.probabilities()),
            Err(_) => f64::INFINITY,
        };
        self.history.push((self.history.len(), c));
        if c < self.best.0 {
            self.best = (c, x.to_vec());
        }
        c
    }
}

/// Trains `ansatz` on `n` qubits against `target` with exact probabilities.
pub fn train_qcbm(ansatz: &AnsatzSpec, n: u32, target: &TargetPmf, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    let start = Instant::now();
    let p = target.probabilities();
    if p.len() != 1usize << n {
        return Err(Error::PmfLength {
            got: p.len(),
            expected: 1usize << n,
        });
    }
    check_pmf(p)?;
    let dim = ansatz.num_params(n);
    let tracker = RefCell::new(Tracker {
        ansatz,
        n,
        target: p,
        history: Vec::new(),
        best: (f64::INFINITY, vec![0.0; dim]),
    });
    let initial = tracker.borrow_mut().cost(&vec![0.0; dim]);
    if initial > cfg.tolerance && cfg.max_iterations > 1 && dim > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(-INIT_SPREAD..=INIT_SPREAD)).collect();
        let budget = cfg.max_iterations - 1;
        let f = |x: &[f64]| tracker.borrow_mut().cost(x);
        match cfg.optimizer {
            Optimizer::Cobyla => run_cobyla(f, &x0, budget, cfg),
            Optimizer::NelderMead => {
                nelder_mead(f, &x0, cfg.initial_step, budget, cfg.tolerance);
            }
        }
    }
    let t = tracker.into_inner();
    Ok(TrainReport {
        best_params: ParamVector(t.best.1),
        final_kl: t.best.0,
        history: t.history,
        wall_time: start.elapsed(),
    })
}

fn run_cobyla<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], budget: usize, cfg: &TrainConfig) {
    use cobyla::{minimize, Func, RhoBeg, StopTols};
    let bounds = vec![(-4.0 * std::f64::consts::PI, 4.0 * std::f64::consts::PI); x0.len()];
    let cons: Vec<&dyn Func<()>> = Vec::new();
    let tols = StopTols {
        ftol_abs: cfg.tolerance,
        ..StopTols::default()
    };
    // The outcome is read back from the tracker, which also holds the best
    // point when the evaluation budget runs out.
    let _ = minimize(
        |x: &[f64], _: &mut ()| f(x),
        x0,
        &bounds,
        &cons,
        (),
        budget,
        RhoBeg::All(cfg.initial_step),
        Some(tols),
    );
}

/// Nelder-Mead simplex search with standard coefficients. Stops after
/// `budget` evaluations or when the simplex cost spread drops below `ftol`.
/// Returns the best point and its cost.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], step: f64, budget: usize, ftol: f64) -> (Vec<f64>, f64) {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let c0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), c0));
    for i in 0..n {
        if evals >= budget {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let c = eval(&x, &mut evals);
        simplex.push((x, c));
    }
    if simplex.len() < n + 1 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        return simplex.swap_remove(0);
    }
    let point = |c: &[f64], x: &[f64], t: f64| -> Vec<f64> { c.iter().zip(x).map(|(ci, xi)| ci + t * (xi - ci)).collect() };
    while evals < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 < ftol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let xr = point(&centroid, &worst, -ALPHA);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            if evals >= budget {
                simplex[n] = (xr, fr);
                break;
            }
            let xe = point(&centroid, &worst, -GAMMA);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        if evals >= budget {
            break;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = point(&centroid, &xr, RHO);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = point(&centroid, &worst, RHO);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(simplex[n].1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            if evals >= budget {
                break;
            }
            v.0 = point(&best, &v.0, SIGMA);
            v.1 = eval(&v.0, &mut evals);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// State whose amplitudes are `sqrt(P_k)`; reproduces the target exactly.
pub fn oracle_proposal(target: &TargetPmf, n: u32) -> Result<StateVector> {
    let p = target.probabilities();
    if p.len() != 1usize << n {
        return Err(Error::PmfLength {
            got: p.len(),
            expected: 1usize << n,
        });
    }
    StateVector::from_amplitudes(p.iter().map(|&v| Complex64::new(v.sqrt(), 0.0)).collect())
}
