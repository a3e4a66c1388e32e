//! The `gek` command line: kernel and density grids, check suites and
//! Monte Carlo sampling, all emitted as CSV or JSON records.

pub mod checks;
pub mod output;

use checks::{run_suite, Suite};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gek_core::finite_n::*;
use gek_core::limits::*;
use gek_core::quad::QuadratureSpec;
use gek_core::sampler::*;
use gek_core::specfun::airy_ai;
use gek_core::{Complex64 as C64, GekError, Result};
use output::{Cell, CurveRecord, Format};
use std::path::PathBuf;
use std::str::FromStr;

const REGIMES: &str = "\
Regimes and the flags they take:
  finite     --n and --tau; coordinates are eigenvalue-plane z = x + iy
  limit      --sigma; microscopic edge coordinates Z = X + iY
  hermitian  no --tau/--sigma; real axis only, ridge-integrated densities
  strong     no --tau/--sigma; coordinates Z/sigma
  bulk       --sigma; beta = 2 only
The real channel exists only for beta = 1.
GEK_QUAD_RTOL overrides the quadrature relative tolerance.

Exit codes: 0 success, 2 usage error, 3 numeric or statistical failure.";

#[derive(Parser, Debug)]
#[command(name = "gek", version, about = "Elliptic Ginibre edge kernels, checks and sampling", after_help = REGIMES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Density on a grid.
    Density(EvalArgs),
    /// Kernel K(z, z2) on a grid in z.
    Kernel(KernelArgs),
    /// Run a named check suite.
    Check(CheckArgs),
    /// Sample eigenvalues and histogram them at the right edge.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Finite,
    Limit,
    Hermitian,
    Strong,
    Bulk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Complex,
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CompareArg {
    None,
    Limit,
    Finite,
}

/// `MIN:MAX:STEPS` with `STEPS ≥ 2` uniformly spaced points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("grid must be MIN:MAX:STEPS, got {s}"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number {t} in grid {s}"));
        let (min, max) = (num(a)?, num(b)?);
        let steps = n.trim().parse::<usize>().map_err(|_| format!("bad step count {n} in grid {s}"))?;
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(format!("grid needs finite MAX > MIN, got {s}"));
        }
        if steps < 2 {
            return Err(format!("grid needs at least 2 steps, got {s}"));
        }
        Ok(Self { min, max, steps })
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.max } else { self.min + h * i as f64 }).collect()
    }

    /// Histogram axis whose bin edges are the grid points.
    pub fn axis(&self) -> Result<Axis> {
        Axis::new(self.min, self.max, self.steps - 1)
    }
}

fn parse_beta(s: &str) -> std::result::Result<Beta, String> {
    match s {
        "1" => Ok(Beta::One),
        "2" => Ok(Beta::Two),
        "4" => Ok(Beta::Four),
        _ => Err(format!("beta must be 1, 2 or 4, got {s}")),
    }
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[arg(long, value_parser = parse_beta)]
    pub beta: Beta,
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// Real-part grid MIN:MAX:STEPS.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: GridSpec,
    /// Imaginary-part grid MIN:MAX:STEPS.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "y")]
    pub ygrid: Option<GridSpec>,
    /// Fixed imaginary part, 0 when neither this nor --ygrid is given.
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long, value_enum, default_value = "complex")]
    pub channel: ChannelArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct KernelArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub x2: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub y2: f64,
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct SampleArgs {
    #[arg(long, value_parser = parse_beta)]
    pub beta: Beta,
    /// Number of complex eigenvalues; for beta = 4 the quaternion size is n/2.
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "sigma", required_unless_present = "sigma")]
    pub tau: Option<f64>,
    /// Sets tau = 1 - sigma^2 n^(-1/3).
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Histogram bin edges along X.
    #[arg(long, allow_hyphen_values = true, default_value = "-4:2:13")]
    pub grid: GridSpec,
    /// Histogram bin edges along Y, complex channel only.
    #[arg(long, allow_hyphen_values = true)]
    pub ygrid: Option<GridSpec>,
    #[arg(long, value_enum, default_value = "complex")]
    pub channel: ChannelArg,
    #[arg(long, value_enum, default_value = "none")]
    pub compare: CompareArg,
    /// Fit a Gumbel law to the largest real part per trial (tau = 0).
    #[arg(long)]
    pub gumbel: bool,
    /// Raw eigenvalues: trial, re, im, channel.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Histogram file; stdout when absent.
    #[arg(long)]
    pub hist_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

const DEFAULT_YGRID: GridSpec = GridSpec { min: -1.5, max: 1.5, steps: 7 };

fn usage(msg: impl Into<String>) -> GekError {
    GekError::Usage(msg.into())
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Validated evaluation parameters.
#[derive(Debug)]
struct Eval {
    beta: Beta,
    regime: RegimeArg,
    spec: Option<EnsembleSpec>,
    sigma: f64,
    real: bool,
    q: QuadratureSpec,
}

impl Eval {
    fn new(a: &EvalArgs, q: QuadratureSpec) -> Result<Self> {
        let real = a.channel == ChannelArg::Real;
        if real && a.beta != Beta::One {
            return Err(usage("the real channel exists only for beta = 1"));
        }
        if real && (a.ygrid.is_some() || a.y.is_some_and(|y| y != 0.0)) {
            return Err(usage("the real channel takes no --ygrid and no nonzero --y"));
        }
        let name = format!("{:?}", a.regime).to_lowercase();
        let (mut spec, mut sigma) = (None, 0.0);
        match a.regime {
            RegimeArg::Finite => {
                if a.sigma.is_some() {
                    return Err(usage("the finite regime takes --tau, not --sigma"));
                }
                let tau = a.tau.ok_or_else(|| usage("the finite regime requires --tau"))?;
                let n = a.n.ok_or_else(|| usage("the finite regime requires --n"))?;
                spec = Some(EnsembleSpec::new(a.beta, n, tau)?);
            }
            RegimeArg::Limit | RegimeArg::Bulk => {
                if a.tau.is_some() || a.n.is_some() {
                    return Err(usage(format!("the {name} regime takes --sigma, not --tau or --n")));
                }
                sigma = a.sigma.ok_or_else(|| usage(format!("the {name} regime requires --sigma")))?;
                MicroscopicPoint::new(c(0.0, 0.0), sigma)?;
                if sigma == 0.0 {
                    return Err(usage("--sigma must be positive"));
                }
            }
            RegimeArg::Hermitian | RegimeArg::Strong => {
                if a.tau.is_some() || a.sigma.is_some() || a.n.is_some() {
                    return Err(usage(format!("the {name} regime takes no --n, --tau or --sigma")));
                }
            }
        }
        if a.regime == RegimeArg::Hermitian && (a.ygrid.is_some() || a.y.is_some_and(|y| y != 0.0)) {
            return Err(usage("the hermitian regime lives on the real axis"));
        }
        if a.regime == RegimeArg::Bulk && a.beta != Beta::Two {
            return Err(usage("the bulk regime is available for beta = 2 only"));
        }
        Ok(Self { beta: a.beta, regime: a.regime, spec, sigma, real, q })
    }

    fn spec(&self) -> &EnsembleSpec {
        self.spec.as_ref().expect("finite regime has a spec")
    }

    fn density(&self, z: C64) -> Result<f64> {
        let (s, q) = (self.sigma, &self.q);
        match (self.regime, self.beta) {
            (RegimeArg::Finite, Beta::Two) => density_b2(z, self.spec()),
            (RegimeArg::Finite, Beta::Four) => density_b4(z, self.spec()),
            (RegimeArg::Finite, Beta::One) if self.real => density_b1_real(z.re, self.spec()),
            (RegimeArg::Finite, Beta::One) => density_b1_complex(z, self.spec()),
            (RegimeArg::Limit, Beta::Two) => density_ai_b2(z, s, q),
            (RegimeArg::Limit, Beta::Four) => density_ai_b4(z, s, q),
            (RegimeArg::Limit, Beta::One) if self.real => density_ai_b1_real(z.re, s, q),
            (RegimeArg::Limit, Beta::One) => density_ai_b1_complex(z, s, q),
            (RegimeArg::Hermitian, beta) => {
                let x = z.re;
                let kh = hermitian_airy_kernel(x, x)?;
                match beta {
                    Beta::Two => Ok(kh),
                    Beta::Four => Ok(0.5 * kh - 0.25 * airy_ai(c(x, 0.0))?.re * airy_tail_integral(x, q)?),
                    Beta::One if self.real => Ok(kh + 0.5 * airy_ai(c(x, 0.0))?.re * (1.0 - airy_tail_integral(x, q)?)),
                    Beta::One => Ok(0.0),
                }
            }
            (RegimeArg::Strong, Beta::Two) => Ok(strong_edge_kernel_b2(z, z.conj())?.re),
            (RegimeArg::Strong, Beta::Four) => strong_edge_density_b4(z, q),
            (RegimeArg::Strong, Beta::One) if self.real => Ok(strong_edge_density_b1_real(z.re)),
            (RegimeArg::Strong, Beta::One) => Ok(strong_edge_density_b1_complex(z)),
            (RegimeArg::Bulk, _) => Ok(bulk_sine_kernel(z, z.conj(), s, q)?.re),
        }
    }

    fn kernel(&self, z1: C64, z2: C64) -> Result<C64> {
        let (s, q) = (self.sigma, &self.q);
        if self.real && z2.im != 0.0 {
            return Err(usage("the real channel needs --y2 0"));
        }
        match (self.regime, self.beta) {
            (RegimeArg::Finite, Beta::Two) => kernel_b2(z1, z2, self.spec()),
            (RegimeArg::Finite, Beta::Four) => kernel_b4(z1, z2, self.spec()),
            (RegimeArg::Finite, Beta::One) if self.real => g_real_b1(z1, z2.re, self.spec()),
            (RegimeArg::Finite, Beta::One) => prekernel_b1(z1, z2, self.spec()),
            (RegimeArg::Limit, Beta::Two) => kernel_ai_b2(z1, z2, s, q),
            (RegimeArg::Limit, Beta::Four) => kernel_ai_b4(z1, z2, s, q),
            (RegimeArg::Limit, Beta::One) if self.real => g_ai_real_b1(z1, z2.re, s, q),
            (RegimeArg::Limit, Beta::One) => prekernel_ai_b1(z1, z2, s, q),
            (RegimeArg::Hermitian, Beta::Two) => Ok(c(hermitian_airy_kernel(z1.re, z2.re)?, 0.0)),
            (RegimeArg::Hermitian, _) => Err(usage("the hermitian kernel is available for beta = 2; see `check hermitian`")),
            (RegimeArg::Strong, Beta::Two) => strong_edge_kernel_b2(z1, z2),
            (RegimeArg::Strong, Beta::Four) => strong_edge_kernel_b4(z1, z2, q),
            (RegimeArg::Strong, Beta::One) if self.real => strong_edge_g_real_b1(z1, z2.re),
            (RegimeArg::Strong, Beta::One) => strong_edge_prekernel_b1(z1, z2),
            (RegimeArg::Bulk, _) => bulk_sine_kernel(z1, z2, s, q),
        }
    }
}

fn regime_name(r: RegimeArg) -> &'static str {
    match r {
        RegimeArg::Finite => "finite",
        RegimeArg::Limit => "limit",
        RegimeArg::Hermitian => "hermitian",
        RegimeArg::Strong => "strong",
        RegimeArg::Bulk => "bulk",
    }
}

fn channel_name(ch: ChannelArg) -> &'static str {
    match ch {
        ChannelArg::Complex => "complex",
        ChannelArg::Real => "real",
    }
}

fn eval_meta(rec: &mut CurveRecord, a: &EvalArgs, command: &str) {
    rec.set("command", command);
    rec.set("version", env!("CARGO_PKG_VERSION"));
    rec.set("beta", a.beta.index());
    rec.set("regime", regime_name(a.regime));
    match a.n {
        Some(n) => rec.set("n", n),
        None => rec.set("n", "limit"),
    }
    if let Some(t) = a.tau {
        rec.set("tau", t);
    }
    if let Some(s) = a.sigma {
        rec.set("sigma", s);
    }
    rec.set("channel", channel_name(a.channel));
}

fn y_points(a: &EvalArgs) -> Vec<f64> {
    match (a.ygrid, a.y) {
        (Some(g), _) => g.points(),
        (None, y) => vec![y.unwrap_or(0.0)],
    }
}

fn emit(rec: &CurveRecord, out: Option<&PathBuf>, format: Format) -> Result<()> {
    let text = rec.render(format);
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_density(a: &EvalArgs, q: QuadratureSpec, command: &str) -> Result<i32> {
    let ev = Eval::new(a, q)?;
    let mut rec = CurveRecord::new(&["x", "y", "density"]);
    eval_meta(&mut rec, a, command);
    let ys = y_points(a);
    for x in a.grid.points() {
        for &y in &ys {
            rec.push(vec![x.into(), y.into(), ev.density(c(x, y))?.into()]);
        }
    }
    emit(&rec, a.out.as_ref(), a.format)?;
    Ok(0)
}

fn cmd_kernel(k: &KernelArgs, q: QuadratureSpec, command: &str) -> Result<i32> {
    let a = &k.eval;
    let ev = Eval::new(a, q)?;
    let z2 = c(k.x2, k.y2);
    let mut rec = CurveRecord::new(&["x", "y", "x2", "y2", "re", "im"]);
    eval_meta(&mut rec, a, command);
    let ys = y_points(a);
    for x in a.grid.points() {
        for &y in &ys {
            let v = ev.kernel(c(x, y), z2)?;
            rec.push(vec![x.into(), y.into(), k.x2.into(), k.y2.into(), v.re.into(), v.im.into()]);
        }
    }
    emit(&rec, a.out.as_ref(), a.format)?;
    Ok(0)
}

fn cmd_check(a: &CheckArgs, q: QuadratureSpec, command: &str) -> Result<i32> {
    let results = run_suite(a.suite, &q)?;
    let mut rec = CurveRecord::new(&["suite", "check", "value", "tolerance", "pass"]);
    rec.set("command", command);
    rec.set("version", env!("CARGO_PKG_VERSION"));
    rec.set("regime", a.suite.name());
    let mut all = true;
    for r in &results {
        all &= r.pass;
        rec.push(vec![r.suite.into(), r.name.as_str().into(), r.value.into(), r.tolerance.into(), Cell::Text(r.pass.to_string())]);
    }
    emit(&rec, a.out.as_ref(), a.format)?;
    let failed = results.iter().filter(|r| !r.pass).count();
    eprintln!("{}: {} checks, {} failed", a.suite.name(), results.len(), failed);
    Ok(if all { 0 } else { 3 })
}

fn cmd_sample(a: &SampleArgs, q: QuadratureSpec, command: &str) -> Result<i32> {
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let spec = match (a.tau, a.sigma) {
        (Some(t), None) => EnsembleSpec::new(a.beta, a.n, t)?,
        (None, Some(s)) => EnsembleSpec::weak(a.beta, a.n, s)?,
        _ => return Err(usage("sample takes exactly one of --tau and --sigma")),
    };
    let meta = |rec: &mut CurveRecord| {
        rec.set("command", command);
        rec.set("version", env!("CARGO_PKG_VERSION"));
        rec.set("beta", a.beta.index());
        rec.set("regime", "sample");
        rec.set("n", a.n);
        rec.set("tau", spec.tau);
        if let Some(s) = a.sigma {
            rec.set("sigma", s);
        }
        rec.set("seed", a.seed);
        rec.set("channel", channel_name(a.channel));
    };

    if a.gumbel {
        let r = gumbel_experiment(&spec, a.trials, a.seed)?;
        let mut rec = CurveRecord::new(&["location", "scale", "ks_statistic", "p_value", "samples"]);
        meta(&mut rec);
        rec.push(vec![r.location.into(), r.scale.into(), r.ks_statistic.into(), r.p_value.into(), (r.maxima.len() as f64).into()]);
        emit(&rec, a.out.as_ref(), a.format)?;
        eprintln!("{r}");
        return Ok(0);
    }

    let channel = match a.channel {
        ChannelArg::Complex => HistChannel::ComplexPlane,
        ChannelArg::Real => HistChannel::RealAxis,
    };
    let y = match channel {
        HistChannel::ComplexPlane => Some(a.ygrid.unwrap_or(DEFAULT_YGRID).axis()?),
        HistChannel::RealAxis if a.ygrid.is_some() => return Err(usage("the real channel takes no --ygrid")),
        HistChannel::RealAxis => None,
    };
    // Fail on a bad grid or channel before spending time on sampling.
    EdgeHistogram::empty(&spec, Side::Right, channel, a.grid.axis()?, y)?;

    let batch = SampleBatch::generate(&spec, a.seed, a.trials)?;
    if let Some(path) = &a.out {
        let mut rec = CurveRecord::new(&["trial", "re", "im", "channel"]);
        meta(&mut rec);
        for (t, re, im, ch) in batch.rows() {
            rec.push(vec![(t as f64).into(), re.into(), im.into(), ch.as_str().into()]);
        }
        emit(&rec, Some(path), a.format)?;
    }

    let hist = accumulate_density(std::slice::from_ref(&batch), &spec, Side::Right, channel, a.grid.axis()?, y)?;
    let cmp = match a.compare {
        CompareArg::None => None,
        CompareArg::Limit => Some(compare_histogram(&hist, Reference::Limit, 5.0, &q)?),
        CompareArg::Finite => Some(compare_histogram(&hist, Reference::Finite, 5.0, &q)?),
    };
    let mut cols = vec!["x"];
    if y.is_some() {
        cols.push("y");
    }
    cols.extend(["count", "density", "error"]);
    if cmp.is_some() {
        cols.extend(["expected", "z", "tested"]);
    }
    let mut rec = CurveRecord::new(&cols);
    meta(&mut rec);
    for k in 0..hist.len() {
        let zc = hist.center(k);
        let mut row: Vec<Cell> = vec![zc.re.into()];
        if y.is_some() {
            row.push(zc.im.into());
        }
        row.extend([(hist.counts[k] as f64).into(), hist.density(k).into(), hist.error(k).into()]);
        if let Some(cm) = &cmp {
            row.extend([cm.expected[k].into(), cm.z_scores[k].into(), Cell::Text(cm.tested[k].to_string())]);
        }
        rec.push(row);
    }
    emit(&rec, a.hist_out.as_ref(), a.format)?;
    match cmp {
        Some(cm) => {
            eprintln!("{:.1}% of tested bins within 3 sigma", 100.0 * cm.fraction_within_3);
            Ok(if cm.fraction_within_3 >= 0.9 { 0 } else { 3 })
        }
        None => Ok(0),
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let command = std::iter::once("gek").chain(args.iter().skip(1).map(String::as_str)).collect::<Vec<_>>().join(" ");
    let outcome = QuadratureSpec::from_env().and_then(|q| match &cli.command {
        Command::Density(a) => cmd_density(a, q, &command),
        Command::Kernel(a) => cmd_kernel(a, q, &command),
        Command::Check(a) => cmd_check(a, q, &command),
        Command::Sample(a) => cmd_sample(a, q, &command),
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gek: {e}");
            if e.is_usage() {
                2
            } else {
                3
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: GridSpec = "-6:2:81".parse().unwrap();
        assert_eq!((g.min, g.max, g.steps), (-6.0, 2.0, 81));
        let p = g.points();
        assert_eq!(p.len(), 81);
        assert_eq!(p[0], -6.0);
        assert_eq!(p[80], 2.0);
        assert!((p[1] - (-5.9)).abs() < 1e-15);
        assert_eq!(g.axis().unwrap().bins, 80);
        for bad in ["1:0:5", "0:1:1", "0:1", "a:1:3", "0:1:3:4", "0:inf:3"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }

    fn eval(args: &[&str]) -> Result<Eval> {
        let mut v = vec!["gek", "density"];
        v.extend_from_slice(args);
        let Command::Density(a) = Cli::try_parse_from(v).unwrap().command else { unreachable!() };
        Eval::new(&a, QuadratureSpec::default())
    }

    #[test]
    fn regime_flag_matrix() {
        assert!(eval(&["--beta", "2", "--regime", "finite", "--n", "8", "--tau", "0.5", "--grid", "0:1:3"]).is_ok());
        assert!(eval(&["--beta", "2", "--regime", "finite", "--n", "8", "--grid", "0:1:3"]).unwrap_err().is_usage());
        assert!(eval(&["--beta", "2", "--regime", "finite", "--tau", "0.5", "--grid", "0:1:3"]).unwrap_err().is_usage());
        assert!(eval(&["--beta", "2", "--regime", "limit", "--tau", "0.5", "--sigma", "1", "--grid", "0:1:3"]).is_err());
        assert!(eval(&["--beta", "2", "--regime", "limit", "--grid", "0:1:3"]).is_err());
        assert!(eval(&["--beta", "2", "--regime", "strong", "--sigma", "1", "--grid", "0:1:3"]).is_err());
        assert!(eval(&["--beta", "2", "--regime", "hermitian", "--grid", "0:1:3", "--y", "0.5"]).is_err());
        assert!(eval(&["--beta", "4", "--regime", "bulk", "--sigma", "1", "--grid", "0:1:3"]).is_err());
        assert!(eval(&["--beta", "2", "--regime", "limit", "--sigma", "1", "--channel", "real", "--grid", "0:1:3"]).is_err());
        assert!(eval(&["--beta", "1", "--regime", "limit", "--sigma", "1", "--channel", "real", "--grid", "0:1:3"]).is_ok());
    }

    #[test]
    fn hermitian_density_is_sigma_to_zero_limit() {
        let h = eval(&["--beta", "2", "--regime", "hermitian", "--grid", "0:1:3"]).unwrap();
        let v = h.density(c(-0.5, 0.0)).unwrap();
        assert!((v - hermitian_airy_kernel(-0.5, -0.5).unwrap()).abs() < 1e-15);
    }
}
