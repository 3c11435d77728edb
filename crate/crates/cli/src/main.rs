//! `slelab` command-line driver.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 configuration error, 3 failed
//! statistical guard.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use slelab::drivers::{brownian_driver, theta_process_with, ThetaStationary};
use slelab::estimators::{
    box_counting_dimension, default_meshes, ims_bulk_estimates, mf_spectrum_estimate, ImsSettings,
};
use slelab::exponents::{a_bounds, rho_opt, tabulate, Kappa};
use slelab::gff::{covariance_mc, default_modes};
use slelab::io::{csv_document, json_document, write_atomic, Table};
use slelab::loewner::{trace_with, CoordinateFrame, TraceOptions, DEFAULT_TRACE_OFFSET};
use slelab::martingale::{check_martingale, MartingaleParams, PathSettings, TailSettings};
use slelab::numeric::{ks_distance, parse_grid};
use slelab::par::Mode;
use slelab::rng::{parse_seed, stream};

#[derive(Debug, Parser)]
#[command(name = "slelab", version, args_override_self = true, about = "SLE multifractal-spectrum verification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Tabulate the closed-form exponents over an s-grid.
    Exponents(ExponentsArgs),
    /// Simulate an SLE_κ trace and write its samples (t, re, im).
    Trace(TraceArgs),
    /// Estimate α(s) by importance-sampled one-point slopes and compare with the formula.
    MfVerify(MfArgs),
    /// Estimate bulk integral-means slopes over an a-grid.
    ImsVerify(ImsArgs),
    /// Simulate the θ-process and compare its histogram with C·sin^β θ.
    ThetaStationary(ThetaArgs),
    /// Check that the reverse-flow martingale has mean ratio 1.
    MartingaleCheck(MartingaleArgs),
    /// Monte Carlo covariance of the harmonic GFF part against −2 log|1 − z w̄|.
    GffCov(GffArgs),
    /// Box-counting dimension of a fresh SLE_κ trace.
    Dimension(DimensionArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Frame {
    HalfPlane,
    Disk,
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// Master seed (decimal or 0x-prefixed hex).
    #[arg(long, default_value = "0", value_parser = seed_parser)]
    seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, default_value_t = default_threads(), value_parser = clap::value_parser!(u32).range(1..))]
    #[serde(skip)]
    threads: u32,
    /// Result file, written atomically; omit to print summaries only.
    #[arg(long, short)]
    #[serde(skip)]
    output: Option<PathBuf>,
    /// Result file format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Optional config file (key=value lines or a JSON object) merged under the flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Suppress progress messages on stderr.
    #[arg(long)]
    #[serde(skip)]
    quiet: bool,
}

#[derive(Debug, Args, Serialize)]
struct ExponentsArgs {
    /// SLE parameter κ (> 0).
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Exponent grid, start:stop:step (inclusive) or comma list; dimensionless, s > −1.
    #[arg(long, default_value = "-0.4:0.9:0.05", allow_hyphen_values = true)]
    s_grid: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct TraceArgs {
    /// SLE parameter κ (> 0).
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Capacity time horizon t (half-plane capacity 2t).
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Number of driver steps (= trace points − 1).
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Height above the driver at which the tip is sampled, in capacity-normalised units.
    #[arg(long, default_value_t = DEFAULT_TRACE_OFFSET)]
    offset: f64,
    /// Use block Laurent acceleration (faster for long traces).
    #[arg(long)]
    accelerate: bool,
    /// Coordinate frame of the written points.
    #[arg(long, value_enum, default_value_t = Frame::HalfPlane)]
    frame: Frame,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct MfArgs {
    /// SLE parameter κ (0 < κ ≤ 4).
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Derivative exponents s, inside (s−, s+).
    #[arg(long, default_value = "0.2,0.4", allow_hyphen_values = true)]
    s_grid: String,
    /// Heights ε = Im z of the tracked point (max/min ≥ 8).
    #[arg(long, default_value = "0.1,0.05,0.025,0.0125")]
    eps_grid: String,
    /// Real part of the tracked point z = x + iε.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    re_z: f64,
    /// Capacity time of the reverse flow.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Multiplicative slack c of the derivative window (dimensionless).
    #[arg(long, default_value_t = 4.0)]
    c: f64,
    /// Exponent half-width u of the window; default 0.4/log(1/ε).
    #[arg(long)]
    u: Option<f64>,
    /// Paths per ε.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Reverse-flow steps per unit horizon (largest step t/steps).
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Step refinement near the driver: step ≤ (eta·|Z|)².
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    /// Stop each path when Im g_t(z) first reaches this height.
    #[arg(long)]
    stop_at_height: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct ImsArgs {
    /// SLE parameter κ (0 < κ ≤ 4).
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Integral-means exponents a.
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    a_grid: String,
    /// Allow a outside [a− + 0.1, min(a+, (4+κ)²/(8κ)) − 0.1].
    #[arg(long)]
    allow_any_a: bool,
    /// Capacity time of the curve.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Circle distances ε from the unit circle (disk units, ≥ 1.5 decades).
    #[arg(long)]
    eps_grid: Option<String>,
    /// Exclusion distance around tip, base and ∂D (disk units).
    #[arg(long, default_value_t = 0.2)]
    zeta: f64,
    /// Driver steps per realization.
    #[arg(long, default_value_t = 1 << 16)]
    steps: usize,
    /// Quadrature nodes per circle.
    #[arg(long, default_value_t = 2048)]
    nodes: usize,
    /// Independent curves.
    #[arg(long, default_value_t = 20)]
    realizations: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct ThetaArgs {
    /// SLE parameter κ (> 0).
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Force-point weight ρ (needs β = (8−2ρ)/κ > −1).
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    rho: f64,
    /// Initial angle θ₀ in radians, inside (0, π).
    #[arg(long, default_value_t = PI / 2.0)]
    theta0: f64,
    /// Horizon in log-time units.
    #[arg(long, default_value_t = 12_500.0)]
    horizon: f64,
    /// Recorded samples.
    #[arg(long, default_value_t = 1_250_000)]
    steps: usize,
    /// Euler substeps between recorded samples.
    #[arg(long, default_value_t = 8)]
    substeps: usize,
    /// Fraction of the recorded samples discarded as burn-in.
    #[arg(long, default_value_t = 0.2)]
    burn_in: f64,
    /// Histogram bins over (0, π).
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct MartingaleArgs {
    /// SLE parameter κ (> 0).
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Martingale weight ρ; default ρ_opt(κ, 0.5).
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Tracked point, e.g. 0.5+0.2i (Im z > 0).
    #[arg(long, default_value = "0.5+0.2i", allow_hyphen_values = true)]
    z: String,
    /// Capacity time of the reverse flow.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Paths.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Reverse-flow steps (largest step t/steps).
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
    /// Step refinement near the driver: step ≤ (eta·|Z|)².
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct GffArgs {
    /// First point, |z| < 1, e.g. 0.5 or 0.7i.
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    z: String,
    /// Second point, |w| < 1.
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    w: String,
    /// Series modes N; default keeps the truncation bound below 1e-6.
    #[arg(long)]
    modes: Option<usize>,
    /// Field samples.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct DimensionArgs {
    /// SLE parameter κ (> 0).
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Capacity time of the curve.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Driver steps (= trace points − 1).
    #[arg(long, default_value_t = 200_000)]
    steps: usize,
    /// Box sizes in half-plane units; default 8 meshes over 1.75 decades below a quarter of the trace extent.
    #[arg(long)]
    meshes: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn default_threads() -> u32 {
    std::thread::available_parallelism().map(|n| n.get() as u32).unwrap_or(1)
}

fn seed_parser(s: &str) -> Result<u64, String> {
    parse_seed(s).ok_or_else(|| format!("invalid seed {s:?}"))
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Guard(String),
    Other(anyhow::Error),
}

impl From<slelab::Error> for Failure {
    fn from(e: slelab::Error) -> Self {
        match e {
            slelab::Error::Domain(_) | slelab::Error::Driver(_) => Failure::Config(e.to_string()),
            slelab::Error::Guard(_) => Failure::Guard(e.to_string()),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn config_err<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Config(msg.into()))
}

fn kappa(k: f64) -> Outcome<Kappa> {
    Ok(Kappa::new(k)?)
}

fn grid(text: &str) -> Outcome<Vec<f64>> {
    Ok(parse_grid(text)?)
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
fn parse_complex(text: &str) -> Outcome<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Failure::Config(format!("cannot parse complex number {text:?}"));
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| Complex64::new(x, 0.0)).map_err(|_| bad());
    };
    let split = body.char_indices().skip(1).filter(|(i, c)| (*c == '+' || *c == '-') && !body[..*i].ends_with(['e', 'E'])).last();
    let (re, im) = match split {
        Some((i, _)) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        s => s,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}

struct Ctx<'a> {
    common: &'a Common,
}

impl Ctx<'_> {
    fn progress(&self, msg: impl AsRef<str>) {
        if !self.common.quiet {
            eprintln!("[slelab] {}", msg.as_ref());
        }
    }

    fn emit<C: Serialize>(&self, config: &C, table: &Table) -> Outcome<()> {
        let Some(path) = &self.common.output else {
            return Ok(());
        };
        let text = match self.common.format {
            Format::Csv => csv_document(config, table)?,
            Format::Json => json_document(config, table)?,
        };
        write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))?;
        self.progress(format!("wrote {}", path.display()));
        Ok(())
    }
}

fn run_exponents(cmd: &Command, a: &ExponentsArgs, ctx: &Ctx) -> Outcome<()> {
    let k = kappa(a.kappa)?;
    let rows = tabulate(k, &grid(&a.s_grid)?)?;
    let mut table = Table::new(&["s", "tilde_xi", "xi", "alpha", "alpha0", "gamma", "gamma0", "rho_opt"]);
    for r in &rows {
        let xi = r.xi.unwrap_or(f64::NAN);
        println!(
            "s={} tilde_xi={} xi={} alpha={} alpha0={} gamma={} gamma0={} rho_opt={}",
            r.s, r.tilde_xi, xi, r.alpha, r.alpha0, r.gamma, r.gamma0, r.rho_opt
        );
        table.push(vec![r.s, r.tilde_xi, xi, r.alpha, r.alpha0, r.gamma, r.gamma0, r.rho_opt]);
    }
    ctx.emit(cmd, &table)
}

fn run_trace(cmd: &Command, a: &TraceArgs, ctx: &Ctx) -> Outcome<()> {
    let k = kappa(a.kappa)?;
    if !(a.offset > 0.0) {
        return config_err(format!("offset must be positive, got {}", a.offset));
    }
    let driver = brownian_driver(k, a.t, a.steps, a.common.seed)?;
    ctx.progress(format!("tracing {} steps", a.steps));
    let opts = TraceOptions { offset: a.offset, accelerate: a.accelerate, mode: Mode::Parallel };
    let mut trace = trace_with(&driver, &opts)?;
    if a.frame == Frame::Disk {
        trace = trace.to_disk();
    }
    let mut table = Table::new(&["t", "re", "im"]);
    for (t, p) in trace.capacity_times.iter().zip(&trace.points) {
        table.push(vec![*t, p.re, p.im]);
    }
    let tip = trace.points.last().copied().unwrap_or_default();
    let frame = if trace.coordinate_frame == CoordinateFrame::Disk { "disk" } else { "half-plane" };
    println!("points={} frame={frame} tip_re={} tip_im={}", trace.points.len(), tip.re, tip.im);
    ctx.emit(cmd, &table)
}

fn run_mf(cmd: &Command, a: &MfArgs, ctx: &Ctx) -> Outcome<()> {
    let k = kappa(a.kappa)?.require_simple()?;
    let settings = TailSettings {
        t: a.t,
        c: a.c,
        u: a.u,
        path: PathSettings { steps: a.steps, eta: a.eta },
        stop_height: a.stop_at_height,
        min_height: None,
        n_samples: a.samples,
        seed: a.common.seed,
    };
    let s_grid = grid(&a.s_grid)?;
    let eps_grid = grid(&a.eps_grid)?;
    ctx.progress(format!("{} s values × {} ε values × {} paths", s_grid.len(), eps_grid.len(), a.samples));
    let spectrum = mf_spectrum_estimate(k, &s_grid, &eps_grid, a.re_z, &settings, Mode::Parallel)?;
    let mut table =
        Table::new(&["s", "alpha_hat", "alpha_stderr", "alpha_pred", "xi_tilde_hat", "xi_tilde_pred"]);
    let mut clipped = 0;
    let mut total = 0;
    for (i, fit) in spectrum.fits.iter().enumerate() {
        clipped += fit.points.iter().map(|p| p.n_clipped).sum::<usize>();
        total += fit.points.iter().map(|p| p.n_samples).sum::<usize>();
        let row = vec![
            spectrum.alpha.grid[i],
            spectrum.alpha.estimated[i],
            spectrum.alpha.stderr[i],
            spectrum.alpha.predicted[i],
            spectrum.xi_tilde.estimated[i],
            spectrum.xi_tilde.predicted[i],
        ];
        println!(
            "s={} alpha_hat={} alpha_stderr={} alpha_pred={} xi_tilde_hat={} xi_tilde_pred={}",
            row[0], row[1], row[2], row[3], row[4], row[5]
        );
        table.push(row);
    }
    ctx.emit(cmd, &table)?;
    let rate = clipped as f64 / total.max(1) as f64;
    if rate > 0.05 {
        return Err(Failure::Guard(format!("clipping rate {rate:.3} exceeds 5%")));
    }
    Ok(())
}

fn run_ims(cmd: &Command, a: &ImsArgs, ctx: &Ctx) -> Outcome<()> {
    let k = kappa(a.kappa)?.require_simple()?;
    let a_grid = grid(&a.a_grid)?;
    let (am, ap) = a_bounds(k);
    let (lo, hi) = (am + 0.1, ap.min((4.0 + a.kappa).powi(2) / (8.0 * a.kappa)) - 0.1);
    if !a.allow_any_a {
        if let Some(bad) = a_grid.iter().find(|x| !(**x >= lo && **x <= hi)) {
            return config_err(format!("a = {bad} outside [{lo:.4}, {hi:.4}]; pass --allow-any-a to override"));
        }
    }
    let mut settings = ImsSettings {
        t: a.t,
        zeta: a.zeta,
        steps: a.steps,
        nodes: a.nodes,
        n_realizations: a.realizations,
        seed: a.common.seed,
        ..ImsSettings::default()
    };
    if let Some(e) = &a.eps_grid {
        settings.eps_grid = grid(e)?;
    }
    ctx.progress(format!("{} realizations of {} steps", a.realizations, a.steps));
    let (curve, _) = ims_bulk_estimates(k, &a_grid, &settings, Mode::Parallel)?;
    let mut table = Table::new(&["a", "slope", "stderr", "ims_pred"]);
    for i in 0..curve.len() {
        let row = vec![curve.grid[i], curve.estimated[i], curve.stderr[i], curve.predicted[i]];
        println!("a={} slope={} stderr={} ims_pred={}", row[0], row[1], row[2], row[3]);
        table.push(row);
    }
    ctx.emit(cmd, &table)
}

fn run_theta(cmd: &Command, a: &ThetaArgs, ctx: &Ctx) -> Outcome<()> {
    let k = kappa(a.kappa)?;
    if !(a.burn_in >= 0.0 && a.burn_in < 1.0) || a.bins == 0 {
        return config_err("burn-in must lie in [0, 1) and bins must be positive");
    }
    let law = ThetaStationary::new(k, a.rho)?;
    ctx.progress(format!("simulating {} samples", a.steps));
    let path = theta_process_with(k, a.rho, a.theta0, a.horizon, a.steps, a.substeps, &mut stream(a.common.seed, 0))?;
    let start = ((a.steps as f64 * a.burn_in).floor() as usize + 1).min(path.theta.len());
    let mut samples = path.theta[start..].to_vec();
    if samples.is_empty() {
        return config_err("no samples left after burn-in");
    }
    let width = PI / a.bins as f64;
    let mut counts = vec![0usize; a.bins];
    for &th in &samples {
        counts[((th / width) as usize).min(a.bins - 1)] += 1;
    }
    let n = samples.len() as f64;
    let ks = ks_distance(&mut samples, |t| law.cdf(t));
    let mut table = Table::new(&["theta_bin", "empirical", "analytic"]);
    for (b, &cnt) in counts.iter().enumerate() {
        let (l, r) = (b as f64 * width, (b + 1) as f64 * width);
        let row = vec![0.5 * (l + r), cnt as f64 / (n * width), (law.cdf(r) - law.cdf(l)) / width];
        table.push(row);
    }
    println!("ks={ks} samples={} beta={}", samples.len(), law.beta());
    ctx.emit(cmd, &table.with_footer(&["ks", "samples", "beta"], vec![ks, n, law.beta()]))
}

fn run_martingale(cmd: &Command, a: &MartingaleArgs, ctx: &Ctx) -> Outcome<()> {
    let k = kappa(a.kappa)?;
    let rho = match a.rho {
        Some(r) => r,
        None => rho_opt(k, 0.5)?,
    };
    let z = parse_complex(&a.z)?;
    let params = MartingaleParams::new(k, rho, z)?;
    ctx.progress(format!("{} reverse paths", a.samples));
    let settings = PathSettings { steps: a.steps, eta: a.eta };
    let m = check_martingale(&params, a.t, &settings, a.samples, a.common.seed, Mode::Parallel)?;
    println!("mean_ratio={} stderr={} samples={} rho={rho}", m.mean_ratio, m.stderr, m.n_samples);
    let mut table = Table::new(&["mean_ratio", "stderr", "samples", "rho"]);
    table.push(vec![m.mean_ratio, m.stderr, m.n_samples as f64, rho]);
    ctx.emit(cmd, &table)?;
    if (m.mean_ratio - 1.0).abs() > 4.0 * m.stderr {
        return Err(Failure::Guard(format!("mean ratio {} is more than 4 stderr from 1", m.mean_ratio)));
    }
    Ok(())
}

fn run_gff(cmd: &Command, a: &GffArgs, ctx: &Ctx) -> Outcome<()> {
    let z = parse_complex(&a.z)?;
    let w = parse_complex(&a.w)?;
    let r = z.norm().max(w.norm());
    let n = match a.modes {
        Some(n) => n,
        None => default_modes(r)?,
    };
    ctx.progress(format!("{} fields with {n} modes", a.samples));
    let est = covariance_mc(n, a.samples, z, w, a.common.seed, Mode::Parallel)?;
    println!(
        "estimate={} stderr={} exact={} truncation_bound={} modes={n}",
        est.estimate, est.stderr, est.exact, est.truncation_bound
    );
    let mut table = Table::new(&["estimate", "stderr", "exact", "truncation_bound", "modes"]);
    table.push(vec![est.estimate, est.stderr, est.exact, est.truncation_bound, n as f64]);
    ctx.emit(cmd, &table)?;
    if (est.estimate - est.exact).abs() > 4.0 * est.stderr + est.truncation_bound {
        return Err(Failure::Guard("Monte Carlo covariance misses the exact value".into()));
    }
    Ok(())
}

fn run_dimension(cmd: &Command, a: &DimensionArgs, ctx: &Ctx) -> Outcome<()> {
    let k = kappa(a.kappa)?;
    let driver = brownian_driver(k, a.t, a.steps, a.common.seed)?;
    ctx.progress(format!("tracing {} steps", a.steps));
    let trace = trace_with(&driver, &TraceOptions { accelerate: true, ..TraceOptions::default() })?;
    let meshes = match &a.meshes {
        Some(m) => grid(m)?,
        None => default_meshes(&trace.points, 1.75, 8),
    };
    let r = box_counting_dimension(&trace, &meshes)?;
    let mut table = Table::new(&["mesh", "count"]);
    for (m, c) in r.meshes.iter().zip(&r.counts) {
        println!("mesh={m} count={c}");
        table.push(vec![*m, *c as f64]);
    }
    let predicted = 1.0 + a.kappa.min(8.0) / 8.0;
    println!("dimension={} stderr={} predicted={predicted}", r.dimension, r.stderr);
    ctx.emit(cmd, &table.with_footer(&["dimension", "stderr", "predicted"], vec![r.dimension, r.stderr, predicted]))
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Exponents(a) => &a.common,
        Command::Trace(a) => &a.common,
        Command::MfVerify(a) => &a.common,
        Command::ImsVerify(a) => &a.common,
        Command::ThetaStationary(a) => &a.common,
        Command::MartingaleCheck(a) => &a.common,
        Command::GffCov(a) => &a.common,
        Command::Dimension(a) => &a.common,
    }
}

fn run(cmd: &Command) -> Outcome<()> {
    let ctx = Ctx { common: common(cmd) };
    rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.common.threads as usize)
        .build_global()
        .context("configuring the thread pool")?;
    match cmd {
        Command::Exponents(a) => run_exponents(cmd, a, &ctx),
        Command::Trace(a) => run_trace(cmd, a, &ctx),
        Command::MfVerify(a) => run_mf(cmd, a, &ctx),
        Command::ImsVerify(a) => run_ims(cmd, a, &ctx),
        Command::ThetaStationary(a) => run_theta(cmd, a, &ctx),
        Command::MartingaleCheck(a) => run_martingale(cmd, a, &ctx),
        Command::GffCov(a) => run_gff(cmd, a, &ctx),
        Command::Dimension(a) => run_dimension(cmd, a, &ctx),
    }
}

fn main() -> ExitCode {
    let args = match config::merge_config_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Guard(msg)) => {
            eprintln!("guard failed: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
