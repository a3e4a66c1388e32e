//! Monte Carlo sampling of the elliptic Ginibre ensembles, edge histograms
//! and the largest-real-part experiment.

use crate::error::{GekError, Result};
use crate::finite_n::{density_b1_complex, density_b1_real, density_b2, density_b4, Beta, EnsembleSpec};
use crate::limits::{density_ai_b1_complex, density_ai_b1_real, density_ai_b2, density_ai_b4};
use crate::quad::QuadratureSpec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Largest matrix size for β = 1, 2.
pub const MAX_N: usize = 512;
/// Largest quaternion size for β = 4 (complex size is twice this).
pub const MAX_QUATERNION_N: usize = 256;
/// Default half-width of the microscopic window kept by [`edge_rescale`].
pub const DEFAULT_WINDOW: f64 = 10.0;

/// A sampled matrix in its natural field.
#[derive(Clone, Debug)]
pub enum SampledMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

impl SampledMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SampledMatrix::Real(m) => m.nrows(),
            SampledMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn to_complex(&self) -> DMatrix<C64> {
        match self {
            SampledMatrix::Real(m) => m.map(|v| C64::new(v, 0.0)),
            SampledMatrix::Complex(m) => m.clone(),
        }
    }
}

/// Independent stream for one trial. Streams are keyed by `(seed, trial)`,
/// so results do not depend on scheduling.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn check_capacity(spec: &EnsembleSpec) -> Result<()> {
    spec.validate()?;
    let (size, cap) = match spec.beta {
        Beta::Four => (spec.n / 2, MAX_QUATERNION_N),
        _ => (spec.n, MAX_N),
    };
    if size > cap {
        return Err(GekError::Capacity(format!(
            "matrix size {size} exceeds the limit {cap} for beta = {}",
            spec.beta.index()
        )));
    }
    Ok(())
}

fn cnormal<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex representation of a quaternion Ginibre matrix: each entry is the
/// block `(a, b; −b̄, ā)` with `E|a|² = E|b|² = 1`.
fn quaternion_ginibre<R: Rng>(m: usize, rng: &mut R) -> DMatrix<C64> {
    let mut g = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let (a, b) = (cnormal(rng), cnormal(rng));
            g[(2 * i, 2 * j)] = a;
            g[(2 * i, 2 * j + 1)] = b;
            g[(2 * i + 1, 2 * j)] = -b.conj();
            g[(2 * i + 1, 2 * j + 1)] = a.conj();
        }
    }
    g
}

/// Draws `J = H + A` with `⟨|J_ij|²⟩ = 1` and `⟨J_ij J_ji⟩ = τ`. For β = 4
/// the result is the `n × n` complex form of an `n/2 × n/2` quaternion matrix.
pub fn sample_matrix_with<R: Rng>(spec: &EnsembleSpec, rng: &mut R) -> Result<SampledMatrix> {
    check_capacity(spec)?;
    let n = spec.n;
    let (h, a) = ((1.0 + spec.tau).sqrt() / 2.0, (1.0 - spec.tau).sqrt() / 2.0);
    Ok(match spec.beta {
        Beta::One => {
            let mut draw = || DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
            let (g1, g2) = (draw(), draw());
            SampledMatrix::Real((&g1 + g1.transpose()) * h + (&g2 - g2.transpose()) * a)
        }
        Beta::Two => {
            let mut draw = || DMatrix::<C64>::from_fn(n, n, |_, _| cnormal(rng));
            let (g1, g2) = (draw(), draw());
            let hm = (&g1 + g1.adjoint()) * C64::new(h, 0.0);
            SampledMatrix::Complex(hm + (&g2 - g2.adjoint()) * C64::new(a, 0.0))
        }
        Beta::Four => {
            let (g1, g2) = (quaternion_ginibre(n / 2, rng), quaternion_ginibre(n / 2, rng));
            let hm = (&g1 + g1.adjoint()) * C64::new(h, 0.0);
            SampledMatrix::Complex(hm + (&g2 - g2.adjoint()) * C64::new(a, 0.0))
        }
    })
}

/// One matrix from stream `(seed, 0)`.
pub fn sample_matrix(spec: &EnsembleSpec, seed: u64) -> Result<SampledMatrix> {
    sample_matrix_with(spec, &mut trial_rng(seed, 0))
}

fn dump(m: &DMatrix<C64>) -> String {
    if m.nrows() <= 12 {
        format!("{m}")
    } else {
        format!("{}x{} matrix, Frobenius norm {:e}", m.nrows(), m.ncols(), m.norm())
    }
}

fn geev_real(a: &DMatrix<f64>) -> Option<Vec<C64>> {
    let n = a.nrows() as i32;
    let mut m = a.as_slice().to_vec();
    let (mut wr, mut wi) = (vec![0.0; a.nrows()], vec![0.0; a.nrows()]);
    let (mut vl, mut vr) = ([0.0], [0.0]);
    let mut info = 0;
    let mut query = [0.0];
    unsafe { lapack::dgeev(b'N', b'N', n, &mut m, n, &mut wr, &mut wi, &mut vl, 1, &mut vr, 1, &mut query, -1, &mut info) };
    let mut work = vec![0.0; (query[0] as usize).max(1)];
    let lwork = work.len() as i32;
    unsafe { lapack::dgeev(b'N', b'N', n, &mut m, n, &mut wr, &mut wi, &mut vl, 1, &mut vr, 1, &mut work, lwork, &mut info) };
    (info == 0).then(|| wr.iter().zip(&wi).map(|(&re, &im)| C64::new(re, im)).collect())
}

fn geev_complex(a: &DMatrix<C64>) -> Option<Vec<C64>> {
    let n = a.nrows() as i32;
    let mut m = a.as_slice().to_vec();
    let mut w = vec![C64::default(); a.nrows()];
    let (mut vl, mut vr) = ([C64::default()], [C64::default()]);
    let mut rwork = vec![0.0; 2 * a.nrows()];
    let mut info = 0;
    let mut query = [C64::default()];
    unsafe { lapack::zgeev(b'N', b'N', n, &mut m, n, &mut w, &mut vl, 1, &mut vr, 1, &mut query, -1, &mut rwork, &mut info) };
    let mut work = vec![C64::default(); (query[0].re as usize).max(1)];
    let lwork = work.len() as i32;
    unsafe { lapack::zgeev(b'N', b'N', n, &mut m, n, &mut w, &mut vl, 1, &mut vr, 1, &mut work, lwork, &mut rwork, &mut info) };
    (info == 0).then_some(w)
}

/// All eigenvalues of a square matrix: balancing, Hessenberg reduction and
/// shifted QR through LAPACK `?geev`.
pub fn spectrum(m: &SampledMatrix) -> Result<Vec<C64>> {
    let finite = match m {
        SampledMatrix::Real(r) => r.iter().all(|v| v.is_finite()) && r.is_square(),
        SampledMatrix::Complex(c) => c.iter().all(|v| v.re.is_finite() && v.im.is_finite()) && c.is_square(),
    };
    if !finite {
        return Err(GekError::Domain("spectrum needs a square matrix with finite entries".into()));
    }
    if m.dim() == 0 {
        return Ok(Vec::new());
    }
    let eigs = match m {
        SampledMatrix::Real(r) => geev_real(r),
        SampledMatrix::Complex(c) => geev_complex(c),
    };
    eigs.ok_or_else(|| GekError::Numeric(format!("QR iteration did not converge: {}", dump(&m.to_complex()))))
}

/// Largest `‖Jv − λv‖ / ‖J‖` over `count` eigenvalues spread through `eigs`,
/// with `v` found by inverse iteration.
pub fn spectrum_residual(m: &SampledMatrix, eigs: &[C64], count: usize) -> Result<f64> {
    let j = m.to_complex();
    let n = j.nrows();
    let norm = j.norm();
    if n == 0 || eigs.is_empty() || norm == 0.0 {
        return Ok(0.0);
    }
    let step = (eigs.len() / count.max(1)).max(1);
    let mut worst: f64 = 0.0;
    for &lam in eigs.iter().step_by(step).take(count.max(1)) {
        let shift = lam + C64::new(1e-12 * norm, 1e-12 * norm);
        let lu = (&j - DMatrix::<C64>::identity(n, n) * shift).lu();
        let mut v = DVector::<C64>::from_fn(n, |i, _| C64::new(1.0, 0.1 * i as f64));
        for _ in 0..3 {
            match lu.solve(&v) {
                Some(w) if w.norm() > 0.0 => v = &w / C64::new(w.norm(), 0.0),
                _ => break,
            }
        }
        v /= C64::new(v.norm(), 0.0);
        let r = (&j * &v - &v * lam).norm() / norm;
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Imaginary-part cut below which a β = 1 eigenvalue counts as real.
pub fn real_threshold(n: usize) -> f64 {
    1e-8 * (n as f64).sqrt()
}

/// Eigenvalues of many independent trials.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub spec: EnsembleSpec,
    pub seed: u64,
    pub first_trial: u64,
    pub eigenvalues: Vec<Vec<C64>>,
}

/// Which channel an eigenvalue belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenChannel {
    Real,
    Complex,
}

impl EigenChannel {
    pub fn as_str(self) -> &'static str {
        match self {
            EigenChannel::Real => "real",
            EigenChannel::Complex => "complex",
        }
    }
}

impl SampleBatch {
    /// Trials `first_trial .. first_trial + trials`, run in parallel.
    pub fn generate_range(spec: &EnsembleSpec, seed: u64, first_trial: u64, trials: u64) -> Result<Self> {
        check_capacity(spec)?;
        let eigenvalues = (first_trial..first_trial + trials)
            .into_par_iter()
            .map(|t| spectrum(&sample_matrix_with(spec, &mut trial_rng(seed, t))?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec: *spec, seed, first_trial, eigenvalues })
    }

    pub fn generate(spec: &EnsembleSpec, seed: u64, trials: u64) -> Result<Self> {
        Self::generate_range(spec, seed, 0, trials)
    }

    pub fn trials(&self) -> u64 {
        self.eigenvalues.len() as u64
    }

    pub fn channel(&self, z: C64) -> EigenChannel {
        if self.spec.beta == Beta::One && z.im.abs() <= real_threshold(self.spec.n) {
            EigenChannel::Real
        } else {
            EigenChannel::Complex
        }
    }

    /// Largest distance between an eigenvalue's conjugate and its nearest
    /// partner in the same trial, over non-real eigenvalues.
    pub fn pairing_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for eigs in &self.eigenvalues {
            for &z in eigs {
                if self.channel(z) == EigenChannel::Real {
                    continue;
                }
                let d = eigs.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        worst
    }

    /// One row per eigenvalue: `(trial, re, im, channel)`.
    pub fn rows(&self) -> impl Iterator<Item = (u64, f64, f64, EigenChannel)> + '_ {
        self.eigenvalues.iter().enumerate().flat_map(move |(t, eigs)| {
            eigs.iter().map(move |&z| (self.first_trial + t as u64, z.re, z.im, self.channel(z)))
        })
    }
}

/// Which end of the spectrum to magnify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

impl FromStr for Side {
    type Err = GekError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" => Ok(Side::Right),
            "left" => Ok(Side::Left),
            _ => Err(GekError::Usage(format!("side must be right or left, got {s}"))),
        }
    }
}

/// Maps an eigenvalue to the microscopic coordinate at the chosen edge.
pub fn edge_coordinate(z: C64, spec: &EnsembleSpec, side: Side) -> C64 {
    let scale = (spec.n as f64).powf(1.0 / 6.0);
    match side {
        Side::Right => (z - spec.edge()) * scale,
        Side::Left => -(z + spec.edge()) * scale,
    }
}

/// Microscopic coordinates of the eigenvalues with `|Z| ≤ window`.
pub fn edge_rescale(eigs: &[C64], spec: &EnsembleSpec, side: Side, window: f64) -> Vec<C64> {
    eigs.iter().map(|&z| edge_coordinate(z, spec, side)).filter(|z| z.norm() <= window).collect()
}

/// Histogram axis with `bins` equal cells on `[min, max)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub bins: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, bins: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) || bins == 0 {
            return Err(GekError::Usage(format!("bad histogram axis {min}:{max} with {bins} bins")));
        }
        Ok(Self { min, max, bins })
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.bins as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.width()
    }

    pub fn index(&self, v: f64) -> Option<usize> {
        if !(v >= self.min && v < self.max) {
            return None;
        }
        Some((((v - self.min) / self.width()) as usize).min(self.bins - 1))
    }
}

/// Histogram channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HistChannel {
    ComplexPlane,
    RealAxis,
}

impl FromStr for HistChannel {
    type Err = GekError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" | "complex_plane" => Ok(HistChannel::ComplexPlane),
            "real" | "real_axis" => Ok(HistChannel::RealAxis),
            _ => Err(GekError::Usage(format!("channel must be complex or real, got {s}"))),
        }
    }
}

/// Counts of microscopic edge coordinates. Densities are
/// `count / (trials × bin measure)` and estimate `R₁` in microscopic units.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeHistogram {
    pub spec: EnsembleSpec,
    pub side: Side,
    pub channel: HistChannel,
    pub x: Axis,
    pub y: Option<Axis>,
    pub trials: u64,
    /// Row-major over `(x, y)`.
    pub counts: Vec<u64>,
}

impl EdgeHistogram {
    pub fn empty(spec: &EnsembleSpec, side: Side, channel: HistChannel, x: Axis, y: Option<Axis>) -> Result<Self> {
        match (channel, y) {
            (HistChannel::ComplexPlane, None) => {
                return Err(GekError::Usage("complex-plane histogram needs a y axis".into()));
            }
            (HistChannel::RealAxis, Some(_)) => {
                return Err(GekError::Usage("real-axis histogram takes no y axis".into()));
            }
            (HistChannel::RealAxis, None) if spec.beta == Beta::Two => {
                return Err(GekError::Usage("beta = 2 has no real-axis channel".into()));
            }
            _ => {}
        }
        let len = x.bins * y.map_or(1, |a| a.bins);
        Ok(Self { spec: *spec, side, channel, x, y, trials: 0, counts: vec![0; len] })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.x.width() * self.y.map_or(1.0, |a| a.width())
    }

    /// Bin center as a microscopic point.
    pub fn center(&self, k: usize) -> C64 {
        match self.y {
            Some(y) => C64::new(self.x.center(k / y.bins), y.center(k % y.bins)),
            None => C64::new(self.x.center(k), 0.0),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn density(&self, k: usize) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        self.counts[k] as f64 / (self.trials as f64 * self.measure())
    }

    /// Poisson error of [`density`](Self::density).
    pub fn error(&self, k: usize) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (self.counts[k] as f64).sqrt() / (self.trials as f64 * self.measure())
    }

    fn add(&mut self, zm: C64) {
        let k = match self.y {
            Some(y) => match (self.x.index(zm.re), y.index(zm.im)) {
                (Some(i), Some(j)) => i * y.bins + j,
                _ => return,
            },
            None => match self.x.index(zm.re) {
                Some(i) => i,
                None => return,
            },
        };
        self.counts[k] += 1;
    }

    fn add_batch(&mut self, batch: &SampleBatch) {
        self.trials += batch.trials();
        for eigs in &batch.eigenvalues {
            for &z in eigs {
                let keep = match (self.channel, self.spec.beta) {
                    (HistChannel::RealAxis, Beta::One) => batch.channel(z) == EigenChannel::Real,
                    (HistChannel::RealAxis, _) => false,
                    (HistChannel::ComplexPlane, Beta::One) => batch.channel(z) == EigenChannel::Complex,
                    (HistChannel::ComplexPlane, Beta::Two) => true,
                    (HistChannel::ComplexPlane, Beta::Four) => z.im > 0.0,
                };
                if keep {
                    let zm = edge_coordinate(z, &self.spec, self.side);
                    self.add(if self.channel == HistChannel::RealAxis { C64::new(zm.re, 0.0) } else { zm });
                }
            }
        }
    }

    /// Sum of two histograms over the same grid and ensemble.
    pub fn merge(&mut self, other: &EdgeHistogram) -> Result<()> {
        if self.spec != other.spec || self.side != other.side || self.channel != other.channel || self.x != other.x || self.y != other.y {
            return Err(GekError::Usage("cannot merge histograms with different grids or ensembles".into()));
        }
        self.trials += other.trials;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }
}

/// Histogram of the microscopic edge coordinates of all batches. For β = 4
/// only the upper-half representative of each conjugate pair is counted.
pub fn accumulate_density(
    batches: &[SampleBatch],
    spec: &EnsembleSpec,
    side: Side,
    channel: HistChannel,
    x: Axis,
    y: Option<Axis>,
) -> Result<EdgeHistogram> {
    let mut hist = EdgeHistogram::empty(spec, side, channel, x, y)?;
    let parts = batches
        .par_iter()
        .map(|b| {
            if b.spec != *spec {
                return Err(GekError::Usage("batches were drawn from different ensembles".into()));
            }
            let mut h = EdgeHistogram::empty(spec, side, channel, x, y)?;
            h.add_batch(b);
            Ok(h)
        })
        .collect::<Result<Vec<_>>>()?;
    for p in &parts {
        hist.merge(p)?;
    }
    Ok(hist)
}

/// Reference density a histogram is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    Limit,
    Finite,
}

impl FromStr for Reference {
    type Err = GekError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "limit" => Ok(Reference::Limit),
            "finite" => Ok(Reference::Finite),
            _ => Err(GekError::Usage(format!("comparison must be limit or finite, got {s}"))),
        }
    }
}

/// Density the histogram estimates at microscopic point `zm`, in the same
/// units. For β = 4 this is `2R₁` on the upper half plane and zero below.
pub fn expected_density(
    spec: &EnsembleSpec,
    channel: HistChannel,
    zm: C64,
    reference: Reference,
    q: &QuadratureSpec,
) -> Result<f64> {
    let n = spec.n as f64;
    match reference {
        Reference::Limit => {
            let sigma = ((1.0 - spec.tau) * n.cbrt()).sqrt();
            match (spec.beta, channel) {
                (Beta::Two, HistChannel::ComplexPlane) => density_ai_b2(zm, sigma, q),
                (Beta::Four, HistChannel::ComplexPlane) if zm.im > 0.0 => Ok(2.0 * density_ai_b4(zm, sigma, q)?),
                (Beta::Four, _) => Ok(0.0),
                (Beta::One, HistChannel::ComplexPlane) => density_ai_b1_complex(zm, sigma, q),
                (Beta::One, HistChannel::RealAxis) => density_ai_b1_real(zm.re, sigma, q),
                (Beta::Two, HistChannel::RealAxis) => Err(GekError::Usage("beta = 2 has no real-axis channel".into())),
            }
        }
        Reference::Finite => {
            let z = spec.edge_point(zm);
            let area = n.powf(-1.0 / 3.0);
            match (spec.beta, channel) {
                (Beta::Two, HistChannel::ComplexPlane) => Ok(area * density_b2(z, spec)?),
                (Beta::Four, HistChannel::ComplexPlane) if zm.im > 0.0 => Ok(2.0 * area * density_b4(z, spec)?),
                (Beta::Four, _) => Ok(0.0),
                (Beta::One, HistChannel::ComplexPlane) => Ok(area * density_b1_complex(z, spec)?),
                (Beta::One, HistChannel::RealAxis) => Ok(n.powf(-1.0 / 6.0) * density_b1_real(z.re, spec)?),
                (Beta::Two, HistChannel::RealAxis) => Err(GekError::Usage("beta = 2 has no real-axis channel".into())),
            }
        }
    }
}

/// Bin-by-bin comparison of a histogram with a reference density.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramComparison {
    /// Bin-averaged reference density.
    pub expected: Vec<f64>,
    /// `(count − μ)/√μ` with `μ` the expected count.
    pub z_scores: Vec<f64>,
    /// Bins whose expected or observed count is at least `min_count`.
    pub tested: Vec<bool>,
    pub fraction_within_3: f64,
}

const GAUSS3: [(f64, f64); 3] = [(-0.774_596_669_241_483_4, 5.0 / 18.0), (0.0, 8.0 / 18.0), (0.774_596_669_241_483_4, 5.0 / 18.0)];

/// Compares each bin with the reference averaged over the bin by a
/// three-point Gauss rule per axis.
pub fn compare_histogram(
    hist: &EdgeHistogram,
    reference: Reference,
    min_count: f64,
    q: &QuadratureSpec,
) -> Result<HistogramComparison> {
    let (hx, hy) = (hist.x.width() / 2.0, hist.y.map_or(0.0, |a| a.width() / 2.0));
    let ynodes: &[(f64, f64)] = if hist.y.is_some() { &GAUSS3 } else { &[(0.0, 1.0)] };
    let expected = (0..hist.len())
        .into_par_iter()
        .map(|k| {
            let c = hist.center(k);
            let mut acc = 0.0;
            for &(u, wu) in &GAUSS3 {
                for &(v, wv) in ynodes {
                    acc += wu * wv * expected_density(&hist.spec, hist.channel, c + C64::new(u * hx, v * hy), reference, q)?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    let scale = hist.trials as f64 * hist.measure();
    let mut z_scores = Vec::with_capacity(hist.len());
    let mut tested = Vec::with_capacity(hist.len());
    let (mut inside, mut used) = (0usize, 0usize);
    for (k, &e) in expected.iter().enumerate() {
        let mu = e * scale;
        let count = hist.counts[k] as f64;
        let z = if mu > 0.0 {
            (count - mu) / mu.sqrt()
        } else if count == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let t = mu >= min_count || count >= min_count;
        if t {
            used += 1;
            if z.abs() < 3.0 {
                inside += 1;
            }
        }
        z_scores.push(z);
        tested.push(t);
    }
    let fraction_within_3 = if used == 0 { 1.0 } else { inside as f64 / used as f64 };
    Ok(HistogramComparison { expected, z_scores, tested, fraction_within_3 })
}

/// Maximum-likelihood Gumbel fit of the largest real part per trial.
#[derive(Clone, Debug, PartialEq)]
pub struct GumbelReport {
    pub location: f64,
    pub scale: f64,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub maxima: Vec<f64>,
}

impl fmt::Display for GumbelReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gumbel fit: location={} scale={} ks={} p={} samples={}",
            self.location,
            self.scale,
            self.ks_statistic,
            self.p_value,
            self.maxima.len()
        )
    }
}

/// Gumbel (maximum) distribution function.
pub fn gumbel_cdf(x: f64, location: f64, scale: f64) -> f64 {
    (-(-(x - location) / scale).exp()).exp()
}

/// Maximum-likelihood location and scale.
pub fn fit_gumbel(xs: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len();
    if n < 2 {
        return Err(GekError::Usage("Gumbel fit needs at least two samples".into()));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(GekError::Numeric("Gumbel fit of a degenerate sample".into()));
    }
    let lo_x = xs.iter().copied().fold(f64::INFINITY, f64::min);
    // Weighted mean with weights e^{−x/β}, shifted to avoid overflow.
    let wmean = |b: f64| {
        let (mut s, mut sx) = (0.0, 0.0);
        for &x in xs {
            let w = (-(x - lo_x) / b).exp();
            s += w;
            sx += w * x;
        }
        (s, sx / s)
    };
    // Score equation β = x̄ − Σx e^{−x/β}/Σe^{−x/β}, increasing in β.
    let g = |b: f64| mean - b - wmean(b).1;
    let b0 = var.sqrt() * 6f64.sqrt() / std::f64::consts::PI;
    let (mut lo, mut hi) = (b0 * 1e-3, b0 * 10.0);
    if g(lo) * g(hi) > 0.0 {
        return Err(GekError::Numeric("Gumbel likelihood has no bracketed maximum".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    let b = 0.5 * (lo + hi);
    let (s, _) = wmean(b);
    let location = lo_x - b * (s / n as f64).ln();
    Ok((location, b))
}

/// Two-sided Kolmogorov–Smirnov statistic of a sample against `cdf`.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the KS statistic, with the Stephens small-sample
/// correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    if lam < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lam * lam).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Largest real part per trial at `τ = 0`, fitted by a Gumbel law.
pub fn gumbel_experiment(spec: &EnsembleSpec, trials: u64, seed: u64) -> Result<GumbelReport> {
    if spec.tau != 0.0 {
        return Err(GekError::Usage(format!("Gumbel experiment needs tau = 0, got {}", spec.tau)));
    }
    if trials < 10 {
        return Err(GekError::Usage(format!("Gumbel experiment needs at least 10 trials, got {trials}")));
    }
    check_capacity(spec)?;
    let maxima = (0..trials)
        .into_par_iter()
        .map(|t| {
            let eigs = spectrum(&sample_matrix_with(spec, &mut trial_rng(seed, t))?)?;
            Ok(eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (location, scale) = fit_gumbel(&maxima)?;
    let ks = ks_statistic(&maxima, |x| gumbel_cdf(x, location, scale));
    Ok(GumbelReport { location, scale, ks_statistic: ks, p_value: ks_p_value(ks, maxima.len()), maxima })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Gumbel};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn spec(beta: Beta, n: usize, tau: f64) -> EnsembleSpec {
        EnsembleSpec::new(beta, n, tau).unwrap()
    }

    fn complex(m: SampledMatrix) -> DMatrix<C64> {
        match m {
            SampledMatrix::Complex(c) => c,
            SampledMatrix::Real(_) => panic!("expected complex matrix"),
        }
    }

    /// Mean and standard error of `J_01 J_10` and `|J_01|²` over many draws.
    fn moments(beta: Beta, tau: f64, draws: u64) -> [(f64, f64); 2] {
        let s = spec(beta, 2, tau);
        let mut rng = trial_rng(3, 0);
        let (mut a, mut a2, mut b, mut b2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..draws {
            let m = sample_matrix_with(&s, &mut rng).unwrap().to_complex();
            let (p, q) = ((m[(0, 1)] * m[(1, 0)]).re, m[(0, 1)].norm_sqr());
            a += p;
            a2 += p * p;
            b += q;
            b2 += q * q;
        }
        let d = draws as f64;
        let se = |s: f64, s2: f64| ((s2 / d - (s / d).powi(2)) / d).sqrt();
        [(a / d, se(a, a2)), (b / d, se(b, b2))]
    }

    #[test]
    fn entry_moments() {
        for &(beta, tau) in &[(Beta::Two, 0.0), (Beta::Two, 0.5), (Beta::One, 0.0), (Beta::One, 0.5)] {
            let [(cov, se_c), (var, se_v)] = moments(beta, tau, 100_000);
            assert!((cov - tau).abs() < 3.0 * se_c, "{beta:?} {tau}: {cov} ± {se_c}");
            assert!((var - 1.0).abs() < 3.0 * se_v, "{beta:?} {tau}: {var} ± {se_v}");
        }
    }

    #[test]
    fn quaternion_block_symmetry() {
        let m = complex(sample_matrix(&spec(Beta::Four, 8, 0.3), 1).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                let (a, b) = (m[(2 * i, 2 * j)], m[(2 * i, 2 * j + 1)]);
                assert_eq!(m[(2 * i + 1, 2 * j + 1)], a.conj());
                assert_eq!(m[(2 * i + 1, 2 * j)], -b.conj());
            }
        }
    }

    #[test]
    fn capacity_limits() {
        assert!(matches!(sample_matrix(&spec(Beta::Two, 513, 0.5), 0), Err(GekError::Capacity(_))));
        assert!(matches!(sample_matrix(&spec(Beta::Four, 514, 0.5), 0), Err(GekError::Capacity(_))));
        assert!(sample_matrix(&spec(Beta::Four, 512, 0.5), 0).is_ok());
    }

    #[test]
    fn spectrum_small_cases() {
        let d = SampledMatrix::Real(DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 0.5])));
        let mut e: Vec<f64> = spectrum(&d).unwrap().iter().map(|z| z.re).collect();
        e.sort_by(f64::total_cmp);
        assert_eq!(e, vec![-1.0, 0.5, 3.0]);
        let comp = SampledMatrix::Real(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let mut e: Vec<f64> = spectrum(&comp).unwrap().iter().map(|z| z.re).collect();
        e.sort_by(f64::total_cmp);
        assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
        assert!(spectrum(&SampledMatrix::Real(DMatrix::from_element(2, 2, f64::NAN))).is_err());
    }

    #[test]
    fn spectrum_trace_and_residual() {
        for beta in [Beta::One, Beta::Two] {
            let m = sample_matrix(&spec(beta, 50, 0.3), 9).unwrap();
            let e = spectrum(&m).unwrap();
            let tr = m.to_complex().trace();
            let sum: C64 = e.iter().sum();
            assert!((sum - tr).norm() <= 1e-8 * tr.norm().max(1.0), "{sum} {tr}");
            assert!(spectrum_residual(&m, &e, 8).unwrap() <= 1e-8);
        }
    }

    // Matrices on which plain Wilkinson-shifted QR stalls.
    #[test]
    fn spectrum_hard_cases() {
        for (s, seed, trial) in [(spec(Beta::One, 64, 0.0), 77, 10339), (EnsembleSpec::weak(Beta::One, 100, 1.0).unwrap(), 2025, 4605)] {
            let m = sample_matrix_with(&s, &mut trial_rng(seed, trial)).unwrap();
            let e = spectrum(&m).unwrap();
            assert_eq!(e.len(), s.n);
            assert!(spectrum_residual(&m, &e, 10).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn conjugate_pairs_and_axis_repulsion() {
        let b4 = SampleBatch::generate(&spec(Beta::Four, 32, 0.4), 2, 50).unwrap();
        assert!(b4.pairing_residual() <= 1e-8 * 32f64.sqrt());
        assert!(b4.eigenvalues.iter().flatten().all(|z| z.im.abs() >= 1e-10));
        let b1 = SampleBatch::generate(&spec(Beta::One, 32, 0.4), 2, 50).unwrap();
        assert!(b1.pairing_residual() <= 1e-8 * 32f64.sqrt());
        assert!(b1.rows().any(|r| r.3 == EigenChannel::Real));
    }

    #[test]
    fn seed_determinism_and_merge() {
        let s = spec(Beta::Two, 12, 0.5);
        let a = SampleBatch::generate(&s, 7, 20).unwrap();
        let b = SampleBatch::generate(&s, 7, 20).unwrap();
        assert_eq!(a, b);
        let first = SampleBatch::generate_range(&s, 7, 0, 8).unwrap();
        let rest = SampleBatch::generate_range(&s, 7, 8, 12).unwrap();
        assert_eq!([first.eigenvalues.clone(), rest.eigenvalues.clone()].concat(), a.eigenvalues);
        let (x, y) = (Axis::new(-6.0, 3.0, 9).unwrap(), Some(Axis::new(-2.0, 2.0, 4).unwrap()));
        let whole = accumulate_density(&[a], &s, Side::Right, HistChannel::ComplexPlane, x, y).unwrap();
        let mut h1 = accumulate_density(&[first], &s, Side::Right, HistChannel::ComplexPlane, x, y).unwrap();
        let h2 = accumulate_density(&[rest], &s, Side::Right, HistChannel::ComplexPlane, x, y).unwrap();
        h1.merge(&h2).unwrap();
        assert_eq!(h1, whole);
    }

    #[test]
    fn histogram_plumbing() {
        let s = spec(Beta::Two, 10, 0.5);
        let x = Axis::new(-1.0, 1.0, 4).unwrap();
        let h = accumulate_density(&[], &s, Side::Right, HistChannel::ComplexPlane, x, Some(x)).unwrap();
        assert!(h.counts.iter().all(|&c| c == 0) && h.density(0) == 0.0);
        assert!(matches!(
            accumulate_density(&[], &s, Side::Right, HistChannel::RealAxis, x, None),
            Err(GekError::Usage(_))
        ));
        let s4 = spec(Beta::Four, 8, 0.5);
        let b = SampleBatch::generate(&s4, 1, 10).unwrap();
        let h = accumulate_density(&[b.clone()], &s4, Side::Right, HistChannel::RealAxis, Axis::new(-50.0, 50.0, 10).unwrap(), None).unwrap();
        assert_eq!(h.total(), 0);
        let wide = Axis::new(-1e3, 1e3, 5).unwrap();
        let h = accumulate_density(&[b], &s4, Side::Right, HistChannel::ComplexPlane, wide, Some(wide)).unwrap();
        assert_eq!(h.total(), 10 * 4);
        assert!(Axis::new(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn edge_rescale_cases() {
        let s = spec(Beta::Two, 16, 0.5);
        let z = edge_rescale(&[c(s.edge(), 0.0)], &s, Side::Right, DEFAULT_WINDOW);
        assert_eq!(z, vec![c(0.0, 0.0)]);
        let m = complex(sample_matrix(&s, 4).unwrap());
        let e = spectrum(&SampledMatrix::Complex(m.clone())).unwrap();
        let en = spectrum(&SampledMatrix::Complex(-m)).unwrap();
        let mut r: Vec<C64> = edge_rescale(&e, &s, Side::Right, 50.0);
        let mut l: Vec<C64> = edge_rescale(&en, &s, Side::Left, 50.0);
        let key = |a: &C64, b: &C64| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
        r.sort_by(key);
        l.sort_by(key);
        assert_eq!(r.len(), l.len());
        for (a, b) in r.iter().zip(&l) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn retained_fraction_matches_semicircle_tip() {
        let s = EnsembleSpec::weak(Beta::Two, 100, 1.0).unwrap();
        let b = SampleBatch::generate(&s, 5, 100).unwrap();
        let kept: usize = b.eigenvalues.iter().map(|e| edge_rescale(e, &s, Side::Right, DEFAULT_WINDOW).len()).sum();
        let frac = kept as f64 / (100.0 * 100.0);
        // Semicircle mass within δ = window·N^{−1/6} of the edge R.
        let r = s.edge();
        let phi = (1.0 - DEFAULT_WINDOW * 100f64.powf(-1.0 / 6.0) / r).acos();
        let oracle = (phi - phi.sin() * phi.cos()) / std::f64::consts::PI;
        assert!((frac / oracle - 1.0).abs() < 0.25, "{frac} vs {oracle}");
    }

    #[test]
    fn macroscopic_ellipse_support() {
        let s = spec(Beta::Two, 256, 0.5);
        let e = spectrum(&sample_matrix(&s, 12).unwrap()).unwrap();
        let sq = 256f64.sqrt();
        let inside = e
            .iter()
            .filter(|z| (z.re / sq / 1.6).powi(2) + (z.im / sq / 0.6).powi(2) <= 1.0)
            .count();
        assert!(inside as f64 >= 0.99 * 256.0, "{inside}");
    }

    #[test]
    fn gumbel_fit_recovers_parameters() {
        let mut rng = trial_rng(21, 0);
        let g = Gumbel::new(2.0, 0.7).unwrap();
        let xs: Vec<f64> = (0..20_000).map(|_| g.sample(&mut rng)).collect();
        let (mu, beta) = fit_gumbel(&xs).unwrap();
        assert!((mu - 2.0).abs() < 0.03 && (beta - 0.7).abs() < 0.02, "{mu} {beta}");
        let d = ks_statistic(&xs, |x| gumbel_cdf(x, mu, beta));
        assert!(ks_p_value(d, xs.len()) > 0.01);
        let unif: Vec<f64> = (0..2000).map(|i| i as f64 / 2000.0).collect();
        assert!(ks_p_value(ks_statistic(&unif, |x| gumbel_cdf(x, mu, beta)), 2000) < 1e-6);
    }

    #[test]
    fn gumbel_location_grows_with_n() {
        assert!(gumbel_experiment(&spec(Beta::One, 16, 0.5), 100, 0).is_err());
        let loc: Vec<f64> = [16, 64, 256]
            .iter()
            .map(|&n| gumbel_experiment(&spec(Beta::One, n, 0.0), 200, 3).unwrap().location)
            .collect();
        assert!(loc[0] < loc[1] && loc[1] < loc[2], "{loc:?}");
    }

    #[test]
    fn finite_reference_matches_library() {
        let s = spec(Beta::One, 6, 0.5);
        let q = QuadratureSpec::default();
        let zm = c(-0.5, 0.0);
        let v = expected_density(&s, HistChannel::RealAxis, zm, Reference::Finite, &q).unwrap();
        let want = 6f64.powf(-1.0 / 6.0) * density_b1_real(s.edge_point(zm).re, &s).unwrap();
        assert_eq!(v, want);
        let s4 = spec(Beta::Four, 8, 0.5);
        assert_eq!(expected_density(&s4, HistChannel::ComplexPlane, c(0.2, -0.4), Reference::Finite, &q).unwrap(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn histogram_counts_every_kept_point(seed in 0u64..1000, n in 2usize..10) {
            let s = spec(Beta::Two, n, 0.5);
            let b = SampleBatch::generate(&s, seed, 3).unwrap();
            let wide = Axis::new(-1e4, 1e4, 7).unwrap();
            let h = accumulate_density(&[b], &s, Side::Left, HistChannel::ComplexPlane, wide, Some(wide)).unwrap();
            prop_assert_eq!(h.total(), 3 * n as u64);
        }

        #[test]
        fn ks_is_a_distance(xs in proptest::collection::vec(-5.0..5.0f64, 1..50)) {
            let d = ks_statistic(&xs, |x| gumbel_cdf(x, 0.0, 1.0));
            prop_assert!((0.0..=1.0).contains(&d));
            let p = ks_p_value(d, xs.len());
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
