//! `qais`: train proposal circuits, integrate with them, and run the VEGAS
//! baseline. All artifacts are CSV (plus a TOML parameter file).

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use qais_core::estimator::{qais_estimate_pmf, repeat_runs, write_results_csv, EstimateResult, MixtureConfig};
use qais_core::statevector::ParamsFile;
use qais_core::stats::{derive_seed, mean_std};
use qais_core::target::{
    build_target_pmf, by_name, constant, LtdForm, PentagonKinematics, TargetOptions, TargetPmf, INTEGRAND_NAMES,
    MULTIPEAK_CENTERS, RING_CENTER, RING_RADIUS,
};
use qais_core::tiling::{fuzz_check, gap_tiles, FuzzConfig};
use qais_core::train::{train_qcbm, Optimizer, TrainConfig};
use qais_core::vegas::{annulus_fraction, phantom_diagnostic, vegas_integrate, VegasConfig, VegasResult};
use qais_core::{AnsatzSpec, GridSpec, Integrand};

use config::{check_schedule, count_from_f64, parse_count, FileConfig};

#[derive(Parser)]
#[command(name = "qais", version, about = "Quantum adaptive importance sampling toolkit")]
struct Cli {
    /// TOML config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a circuit to the cell-averaged target distribution.
    Train(TrainArgs),
    /// QAIS estimates over a shot schedule.
    Integrate(IntegrateArgs),
    /// VEGAS baseline run.
    Vegas(VegasArgs),
    /// QAIS versus VEGAS relative uncertainty per budget.
    Compare(CompareArgs),
    /// Fuzz the tiling partition and gap bounds.
    TileCheck(TileCheckArgs),
}

#[derive(Args, Clone, Default)]
struct TargetArgs {
    /// One of gauss2, ring, multipeak, pentagon, constant.
    #[arg(long)]
    integrand: Option<String>,
    /// Pentagon kinematics file (defaults to the built-in P11 point).
    #[arg(long)]
    kinematics: Option<PathBuf>,
    /// residue or divided-difference.
    #[arg(long)]
    form: Option<String>,
    /// Value of the constant integrand.
    #[arg(long)]
    value: Option<f64>,
    #[arg(long)]
    dims: Option<usize>,
    /// Qubits per axis, e.g. 8,4,4.
    #[arg(long, value_delimiter = ',')]
    qubits: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lower: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    upper: Option<Vec<f64>>,
    /// Evaluation points per cell for the target distribution.
    #[arg(long)]
    samples_per_cell: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// Layer list such as EZ,U3,EX,U3.
    #[arg(long)]
    layers: Option<String>,
    #[arg(long)]
    optimizer: Option<String>,
    /// Cost-evaluation budget.
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    initial_step: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// Trained parameter file.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Use the target distribution itself as the proposal.
    #[arg(long, alias = "oracle-proposal")]
    oracle: bool,
    /// Shot schedule, e.g. 1e3,1e4,1e5.
    #[arg(long, value_delimiter = ',')]
    shots: Option<Vec<String>>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Weight of the uniform defensive component.
    #[arg(long)]
    beta: Option<f64>,
    /// Append to an existing integrate.csv instead of replacing it.
    #[arg(long)]
    append: bool,
}

#[derive(Args, Clone, Default)]
struct VegasOpts {
    #[arg(long)]
    bins: Option<usize>,
    /// Samples per iteration.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct VegasArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    vegas: VegasOpts,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long)]
    params: Option<PathBuf>,
    /// Shot schedule; VEGAS gets the same total budget per entry.
    #[arg(long, value_delimiter = ',')]
    shots: Option<Vec<String>>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct TileCheckArgs {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    min_dims: Option<usize>,
    #[arg(long)]
    max_dims: Option<usize>,
    #[arg(long)]
    max_qubits: Option<u32>,
    #[arg(long)]
    max_measured: Option<usize>,
}

struct Ctx {
    file: FileConfig,
    seed: u64,
    out: PathBuf,
}

fn main() -> std::process::ExitCode {
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    if let Some(t) = cli.threads.or(file.threads) {
        ensure!(t > 0, "--threads must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let ctx = Ctx {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        out: cli.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from(".")),
        file,
    };
    std::fs::create_dir_all(&ctx.out).with_context(|| format!("creating {}", ctx.out.display()))?;
    match cli.command {
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Integrate(a) => cmd_integrate(&ctx, a),
        Command::Vegas(a) => cmd_vegas(&ctx, a),
        Command::Compare(a) => cmd_compare(&ctx, a),
        Command::TileCheck(a) => cmd_tile_check(&ctx, a),
    }
}

struct Problem {
    name: String,
    f: Integrand,
    spec: GridSpec,
    samples_per_cell: usize,
    use_abs: bool,
}

impl Problem {
    fn target(&self, seed: u64) -> Result<TargetPmf> {
        let opts = TargetOptions {
            samples_per_cell: self.samples_per_cell,
            seed,
            use_abs: self.use_abs,
            ..Default::default()
        };
        Ok(build_target_pmf(&self.spec, &self.f, &opts)?)
    }
}

fn default_qubits(name: &str, dims: usize) -> Vec<u32> {
    match name {
        "pentagon" => vec![8, 4, 4],
        "multipeak" => vec![if dims <= 3 { 5 } else { 4 }; dims],
        "constant" => vec![3; dims],
        _ => vec![5, 5],
    }
}

fn resolve_problem(ctx: &Ctx, a: &TargetArgs) -> Result<Problem> {
    let (fg, ft) = (&ctx.file.grid, &ctx.file.target);
    let name = a
        .integrand
        .clone()
        .or(ft.integrand.clone())
        .ok_or_else(|| anyhow!("no integrand given; choose one of: {}", INTEGRAND_NAMES.join(", ")))?;
    let qubits = a.qubits.clone().or(fg.qubits.clone());
    let dims = a
        .dims
        .or(fg.dims)
        .or(qubits.as_ref().map(Vec::len))
        .unwrap_or(match name.as_str() {
            "pentagon" => 3,
            _ => 2,
        });
    let form = match a.form.as_deref().or(ft.form.as_deref()).unwrap_or("residue") {
        "residue" => LtdForm::Residue,
        "divided-difference" => LtdForm::DividedDifference,
        other => bail!("unknown form '{other}', expected residue or divided-difference"),
    };
    let kin = match a.kinematics.as_ref().or(ft.kinematics.as_ref()) {
        Some(p) => {
            ensure!(p.exists(), "kinematics file {} does not exist", p.display());
            Some(PentagonKinematics::read(p)?)
        }
        None => None,
    };
    let mut f = by_name(&name, dims, kin.as_ref(), form)?;
    let qubits = qubits.unwrap_or_else(|| default_qubits(&name, f.dims()));
    ensure!(
        qubits.len() == f.dims(),
        "{} is {}-dimensional but {} qubit counts were given",
        name,
        f.dims(),
        qubits.len()
    );
    let lower = a
        .lower
        .clone()
        .or(fg.lower.clone())
        .unwrap_or_else(|| f.domain().iter().map(|d| d.0).collect());
    let upper = a
        .upper
        .clone()
        .or(fg.upper.clone())
        .unwrap_or_else(|| f.domain().iter().map(|d| d.1).collect());
    let spec = GridSpec::new(qubits, lower, upper)?;
    if name == "constant" {
        let value = a.value.or(ft.value).unwrap_or(1.0);
        f = constant(value, spec.lower().iter().copied().zip(spec.upper().iter().copied()).collect());
    }
    Ok(Problem {
        name,
        f,
        spec,
        samples_per_cell: a.samples_per_cell.or(ft.samples_per_cell).unwrap_or(1),
        use_abs: ft.use_abs.unwrap_or(true),
    })
}

/// Opens a CSV output whose first line is a timestamped comment.
fn csv_out(ctx: &Ctx, name: &str, command: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = ctx.out.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    write_stamp(&mut w, command)?;
    Ok((path, w))
}

fn write_stamp<W: Write>(w: &mut W, command: &str) -> Result<()> {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    writeln!(w, "# qais {command} unix_time={secs}")?;
    Ok(())
}

fn shot_schedule(flag: &Option<Vec<String>>, file: &Option<Vec<f64>>) -> Result<Vec<u64>> {
    let shots = match (flag, file) {
        (Some(v), _) => v
            .iter()
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_count(s))
            .collect::<Result<Vec<_>>>()?,
        (None, Some(v)) => v.iter().map(|&x| count_from_f64(x)).collect::<Result<Vec<_>>>()?,
        (None, None) => vec![1000, 10_000, 100_000],
    };
    check_schedule(&shots)?;
    Ok(shots)
}

/// Proposal PMF from a parameter file, or the target itself.
fn proposal(ctx: &Ctx, p: &Problem, params: Option<&Path>, oracle: bool) -> Result<Vec<f64>> {
    if oracle {
        return Ok(p.target(ctx.seed)?.probabilities().to_vec());
    }
    let path = params.ok_or_else(|| anyhow!("give --params FILE or --oracle"))?;
    ensure!(path.exists(), "parameter file {} does not exist", path.display());
    let pf = ParamsFile::read(path)?;
    ensure!(
        pf.qubits == p.spec.qubits(),
        "parameter file is for qubits {:?}, grid has {:?}",
        pf.qubits,
        p.spec.qubits()
    );
    Ok(pf.state()?.probabilities())
}

fn cmd_train(ctx: &Ctx, a: TrainArgs) -> Result<()> {
    let p = resolve_problem(ctx, &a.target)?;
    let ft = &ctx.file.train;
    let layers = a
        .layers
        .or(ctx.file.ansatz.layers.clone())
        .unwrap_or_else(|| "EZ,U3,EX,U3".to_string());
    let ansatz = AnsatzSpec::parse(&layers)?;
    let defaults = TrainConfig::default();
    let optimizer: Optimizer = match a.optimizer.as_deref().or(ft.optimizer.as_deref()) {
        Some(s) => s.parse()?,
        None => defaults.optimizer,
    };
    let cfg = TrainConfig {
        optimizer,
        max_iterations: a.max_iterations.or(ft.max_iterations).unwrap_or(defaults.max_iterations),
        initial_step: a.initial_step.or(ft.initial_step).unwrap_or(defaults.initial_step),
        tolerance: a.tolerance.or(ft.tolerance).unwrap_or(defaults.tolerance),
        seed: ctx.seed,
    };
    cfg.validate()?;
    let target = p.target(ctx.seed)?;
    let n = p.spec.total_qubits();
    let report = train_qcbm(&ansatz, n, &target, &cfg)?;

    let params = ParamsFile {
        n,
        qubits: p.spec.qubits().to_vec(),
        layers: ansatz,
        seed: ctx.seed,
        final_kl: report.final_kl,
        params: report.best_params.0.clone(),
    };
    let params_path = ctx.out.join("params.toml");
    params.write(&params_path)?;
    let (hist_path, mut w) = csv_out(ctx, "train_history.csv", "train")?;
    report.write_history_csv(&mut w)?;
    w.flush()?;
    println!(
        "{}: initial KL {:.6}, final KL {:.6} after {} evaluations ({:.1?})",
        p.name,
        report.initial_kl(),
        report.final_kl,
        report.history.len(),
        report.wall_time
    );
    println!("wrote {} and {}", params_path.display(), hist_path.display());
    Ok(())
}

fn cmd_integrate(ctx: &Ctx, a: IntegrateArgs) -> Result<()> {
    let p = resolve_problem(ctx, &a.target)?;
    let fi = &ctx.file.integrate;
    let shots = shot_schedule(&a.shots, &fi.shots)?;
    let oracle = a.oracle || fi.oracle.unwrap_or(false);
    let params = a.params.clone().or(fi.params.clone());
    let q = proposal(ctx, &p, params.as_deref(), oracle)?;
    let mix = MixtureConfig::new(a.beta.or(fi.beta).unwrap_or(0.0))?;
    let replicates = a.replicates.or(fi.replicates).unwrap_or(1);
    ensure!(replicates >= 1, "--replicates must be at least 1");

    let path = ctx.out.join("integrate.csv");
    let appending = a.append && path.exists();
    let file = std::fs::OpenOptions::new()
        .create(true)
        .write(true)
        .append(appending)
        .truncate(!appending)
        .open(&path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut w = BufWriter::new(file);
    if !appending {
        write_stamp(&mut w, "integrate")?;
    }
    let mut summary = Vec::new();
    let mut header = !appending;
    for (i, &n) in shots.iter().enumerate() {
        let seed = derive_seed(ctx.seed, i as u64);
        let runs: Vec<EstimateResult> = if replicates > 1 {
            let s = repeat_runs(&p.spec, &p.f, &q, n, mix, replicates, seed)?;
            println!(
                "N={n}: mean {:e}, spread {:e}, mean std {:e} over {replicates} runs",
                s.mean, s.spread, s.mean_std
            );
            summary.push((n, s.mean, s.spread, s.mean_std));
            s.runs
        } else {
            let r = qais_estimate_pmf(&p.spec, &p.f, &q, n, mix, seed)?;
            println!("N={n}: {:e} +- {:e}, {} states", r.estimate, r.std, r.states);
            vec![r]
        };
        write_results_csv(runs.iter().enumerate(), &mut w, header)?;
        header = false;
    }
    w.flush()?;
    if !summary.is_empty() {
        let (_, mut w) = csv_out(ctx, "integrate_summary.csv", "integrate")?;
        let mut c = csv::Writer::from_writer(&mut w);
        c.write_record(["N", "replicates", "mean", "spread", "mean_std"])?;
        for (n, mean, spread, ms) in summary {
            c.write_record([n.to_string(), replicates.to_string(), mean.to_string(), spread.to_string(), ms.to_string()])?;
        }
        c.flush()?;
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn vegas_config(ctx: &Ctx, v: &VegasOpts) -> Result<VegasConfig> {
    let fv = &ctx.file.vegas;
    let d = VegasConfig::default();
    let samples = match (&v.samples, fv.samples) {
        (Some(s), _) => parse_count(s)? as usize,
        (None, Some(x)) => count_from_f64(x)? as usize,
        (None, None) => d.samples_per_iteration,
    };
    Ok(VegasConfig {
        bins: v.bins.or(fv.bins).unwrap_or(d.bins),
        samples_per_iteration: samples,
        iterations: v.iterations.or(fv.iterations).unwrap_or(d.iterations),
        alpha: v.alpha.or(fv.alpha).unwrap_or(d.alpha),
        seed: ctx.seed,
        keep_final_samples: false,
    })
}

fn cmd_vegas(ctx: &Ctx, a: VegasArgs) -> Result<()> {
    let p = resolve_problem(ctx, &a.target)?;
    let mut cfg = vegas_config(ctx, &a.vegas)?;
    let diagnose = matches!(p.name.as_str(), "multipeak" | "ring");
    cfg.keep_final_samples = diagnose;
    let r = vegas_integrate(&p.f, &cfg)?;
    let (path, mut w) = csv_out(ctx, "vegas.csv", "vegas")?;
    r.write_csv(&mut w)?;
    w.flush()?;
    let (_, mut w) = csv_out(ctx, "vegas_grid.csv", "vegas")?;
    r.grid.write_csv(&mut w)?;
    w.flush()?;
    println!(
        "combined {:e} +- {:e}; best iteration {} gives {:e} +- {:e}",
        r.combined,
        r.combined_sigma,
        r.best_iteration,
        r.best().estimate,
        r.best().sigma
    );
    if diagnose {
        write_diagnostics(ctx, &p, &r)?;
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn write_diagnostics(ctx: &Ctx, p: &Problem, r: &VegasResult) -> Result<()> {
    let pts = r.final_samples.as_deref().unwrap_or_default();
    let (_, mut w) = csv_out(ctx, "vegas_diagnostics.csv", "vegas")?;
    let mut c = csv::Writer::from_writer(&mut w);
    c.write_record(["metric", "value"])?;
    if p.name == "multipeak" {
        let rep = phantom_diagnostic(pts, p.f.dims(), &MULTIPEAK_CENTERS, 0.05);
        println!(
            "phantom diagnostic: true-site fraction {:.4}, phantom fraction {:.4} over {} phantom sites",
            rep.true_fraction, rep.phantom_fraction, rep.phantom_sites
        );
        c.write_record(["samples", &rep.samples.to_string()])?;
        c.write_record(["true_fraction", &rep.true_fraction.to_string()])?;
        c.write_record(["phantom_fraction", &rep.phantom_fraction.to_string()])?;
        c.write_record(["phantom_sites", &rep.phantom_sites.to_string()])?;
        c.write_record(["true_share", &rep.true_share().to_string()])?;
    } else {
        let inside = annulus_fraction(pts, [RING_CENTER; 2], RING_RADIUS, 0.1);
        println!("annulus diagnostic: {:.4} of samples inside the band", inside);
        c.write_record(["samples", &(pts.len() / 2).to_string()])?;
        c.write_record(["annulus_inside_fraction", &inside.to_string()])?;
    }
    c.flush()?;
    Ok(())
}

fn cmd_compare(ctx: &Ctx, a: CompareArgs) -> Result<()> {
    let p = resolve_problem(ctx, &a.target)?;
    let fi = &ctx.file.integrate;
    let shots = shot_schedule(&a.shots, &fi.shots)?;
    let params = a.params.clone().or(fi.params.clone());
    let oracle = params.is_none();
    let q = proposal(ctx, &p, params.as_deref(), oracle)?;
    let mix = MixtureConfig::new(a.beta.or(fi.beta).unwrap_or(0.0))?;
    let replicates = a.replicates.or(fi.replicates).unwrap_or(10);
    ensure!(replicates >= 2, "compare needs at least 2 replicates");
    let base = vegas_config(
        ctx,
        &VegasOpts {
            bins: a.bins,
            iterations: a.iterations,
            alpha: a.alpha,
            samples: None,
        },
    )?;

    let (path, mut w) = csv_out(ctx, "compare.csv", "compare")?;
    let mut c = csv::Writer::from_writer(&mut w);
    c.write_record([
        "N",
        "qais_mean_rel_unc",
        "qais_spread",
        "qais_mean_states",
        "hilbert_fraction",
        "vegas_best_rel_unc",
        "vegas_iterations",
    ])?;
    for (i, &n) in shots.iter().enumerate() {
        let s = repeat_runs(&p.spec, &p.f, &q, n, mix, replicates, derive_seed(ctx.seed, i as u64))?;
        let rel: Vec<f64> = s.runs.iter().map(|r| r.std / r.estimate.abs()).collect();
        let (rel_mean, rel_spread) = mean_std(&rel);
        let states = s.runs.iter().map(|r| r.states as f64).sum::<f64>() / s.runs.len() as f64;
        // VEGAS spends the same total budget, split evenly across iterations.
        let iters = base.iterations.min((n / 2) as usize).max(1);
        let cfg = VegasConfig {
            samples_per_iteration: (n as usize / iters).max(2),
            iterations: iters,
            seed: derive_seed(ctx.seed, 1 << 32 | i as u64),
            ..base.clone()
        };
        let v = vegas_integrate(&p.f, &cfg)?;
        let best = v.best();
        let vegas_rel = best.sigma / best.estimate.abs();
        println!("N={n}: QAIS rel unc {rel_mean:.3e} (spread {rel_spread:.1e}), VEGAS best {vegas_rel:.3e}");
        c.write_record([
            n.to_string(),
            rel_mean.to_string(),
            rel_spread.to_string(),
            states.to_string(),
            (states / p.spec.num_cells() as f64).to_string(),
            vegas_rel.to_string(),
            iters.to_string(),
        ])?;
    }
    c.flush()?;
    drop(c);
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_tile_check(ctx: &Ctx, a: TileCheckArgs) -> Result<()> {
    let ft = &ctx.file.tile_check;
    let d = FuzzConfig::default();
    let cfg = FuzzConfig {
        trials: a.trials.or(ft.trials).unwrap_or(d.trials),
        min_dims: a.min_dims.or(ft.min_dims).unwrap_or(d.min_dims),
        max_dims: a.max_dims.or(ft.max_dims).unwrap_or(d.max_dims),
        max_qubits: a.max_qubits.or(ft.max_qubits).unwrap_or(d.max_qubits),
        max_measured: a.max_measured.or(ft.max_measured).unwrap_or(d.max_measured),
        seed: ctx.seed,
    };
    ensure!(
        cfg.min_dims >= 1 && cfg.min_dims <= cfg.max_dims,
        "dimension range {}..={} is empty",
        cfg.min_dims,
        cfg.max_dims
    );
    ensure!(cfg.max_qubits >= cfg.max_dims as u32, "need at least one qubit per axis");
    let report = fuzz_check(&cfg, gap_tiles);
    let (path, mut w) = csv_out(ctx, "tile_check.csv", "tile-check")?;
    let mut c = csv::Writer::from_writer(&mut w);
    c.write_record(["dims", "bound", "max_gap_rects"])?;
    for (i, &m) in report.max_gap_rects.iter().enumerate() {
        let dims = i + 1;
        c.write_record([dims.to_string(), (2 * (dims - 1) + 1).to_string(), m.to_string()])?;
    }
    c.flush()?;
    drop(c);
    w.flush()?;
    for f in &report.failures {
        eprintln!(
            "trial {} (reproduce with trial seed {}): qubits {:?}, {} measured: {}",
            f.trial,
            f.trial_seed,
            f.qubits,
            f.measured.len(),
            f.violation
        );
    }
    if !report.passed() {
        bail!("{} of {} trials failed", report.failures.len(), report.trials);
    }
    println!("PASS: {} trials, gap rect maxima by dimension {:?}", report.trials, report.max_gap_rects);
    println!("wrote {}", path.display());
    Ok(())
}
