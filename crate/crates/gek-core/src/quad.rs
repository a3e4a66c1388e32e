//! Adaptive composite Gauss–Legendre quadrature for the semi-infinite and
//! nested integrals of exponentially weighted Airy products.

use crate::error::{GekError, Result};
use crate::specfun::{airy_pair, deformed_airy_unchecked, ln_airy_right, ln_deformed_airy};
use num_complex::Complex64 as C64;
use std::sync::OnceLock;

const NODES: usize = 16;
const INITIAL_PANELS: usize = 8;
/// Log-magnitude drop below the peak at which an integrand is cut off.
const CUTOFF_DROP: f64 = 46.0;
const MAX_CUTOFF: f64 = 1e5;

/// Tolerances and truncation for semi-infinite integrals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub truncation_point: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_panels: 4000, truncation_point: 40.0 }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_panels: usize, truncation_point: f64) -> Result<Self> {
        let s = Self { rel_tol, abs_tol, max_panels, truncation_point };
        s.validate()?;
        Ok(s)
    }

    /// Looser tolerances used inside Monte Carlo comparisons.
    pub fn monte_carlo() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-10, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(GekError::Domain("quadrature tolerances must be positive".into()));
        }
        if self.max_panels < 4 {
            return Err(GekError::Domain("max_panels must be at least 4".into()));
        }
        if !(self.truncation_point > 0.0) || !self.truncation_point.is_finite() {
            return Err(GekError::Domain("truncation_point must be positive and finite".into()));
        }
        Ok(())
    }

    /// Default spec with `rel_tol` overridden by `GEK_QUAD_RTOL` when set.
    pub fn from_env() -> Result<Self> {
        let mut s = Self::default();
        if let Ok(v) = std::env::var("GEK_QUAD_RTOL") {
            s.rel_tol = v
                .trim()
                .parse::<f64>()
                .map_err(|_| GekError::Usage(format!("GEK_QUAD_RTOL={v} is not a number")))?;
        }
        s.validate()?;
        Ok(s)
    }
}

struct Rule {
    x: [f64; NODES],
    w: [f64; NODES],
    /// `q[k][m] = ∫_{-1}^{x_k} ℓ_m(x) dx` for the Lagrange basis on the nodes.
    q: [[f64; NODES]; NODES],
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = NODES;
        let mut x = [0.0; NODES];
        let mut w = [0.0; NODES];
        for i in 0..n {
            let mut r = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, r);
                let dr = p / d;
                r -= dr;
                if dr.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, r);
            x[i] = r;
            w[i] = 2.0 / ((1.0 - r * r) * d * d);
        }
        let mut pl = vec![[0.0; NODES + 1]; n];
        for (i, row) in pl.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = legendre(j, x[i]).0;
            }
        }
        let mut q = [[0.0; NODES]; NODES];
        for k in 0..n {
            for m in 0..n {
                let mut s = 0.5 * (x[k] + 1.0);
                for j in 1..n {
                    s += 0.5 * pl[m][j] * (pl[k][j + 1] - pl[k][j - 1]);
                }
                q[k][m] = w[m] * s;
            }
        }
        Rule { x, w, q }
    })
}

struct Panel {
    a: f64,
    b: f64,
    vals: Vec<C64>,
}

impl Panel {
    fn integral(&self, ch: usize) -> C64 {
        let r = rule();
        let half = 0.5 * (self.b - self.a);
        let v = &self.vals[ch * NODES..(ch + 1) * NODES];
        v.iter().zip(r.w.iter()).map(|(f, w)| f * *w).sum::<C64>() * half
    }

    fn abs_integral(&self, ch: usize) -> f64 {
        let r = rule();
        let half = 0.5 * (self.b - self.a);
        let v = &self.vals[ch * NODES..(ch + 1) * NODES];
        v.iter().zip(r.w.iter()).map(|(f, w)| f.norm() * w).sum::<f64>() * half
    }
}

fn eval_panel<F>(f: &F, nch: usize, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64, &mut [C64]) -> Result<()>,
{
    let r = rule();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut vals = vec![C64::new(0.0, 0.0); nch * NODES];
    let mut buf = vec![C64::new(0.0, 0.0); nch];
    for i in 0..NODES {
        f(mid + half * r.x[i], &mut buf)?;
        for c in 0..nch {
            let v = buf[c];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(GekError::Numeric(format!("integrand is not finite at t = {}", mid + half * r.x[i])));
            }
            vals[c * NODES + i] = v;
        }
    }
    Ok(Panel { a, b, vals })
}

/// Result of an adaptive pass: accepted panels in order plus an error bound.
struct Partition {
    panels: Vec<Panel>,
    error: Vec<f64>,
}

fn adaptive<F>(f: &F, nch: usize, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Partition>
where
    F: Fn(f64, &mut [C64]) -> Result<()>,
{
    let total = b - a;
    let mut stack = Vec::with_capacity(64);
    for i in (0..INITIAL_PANELS).rev() {
        let pa = a + total * i as f64 / INITIAL_PANELS as f64;
        let pb = a + total * (i + 1) as f64 / INITIAL_PANELS as f64;
        stack.push(eval_panel(f, nch, pa, pb)?);
    }
    let tol: Vec<f64> = (0..nch)
        .map(|c| {
            let l1: f64 = stack.iter().map(|p| p.abs_integral(c)).sum();
            spec.abs_tol.max(spec.rel_tol * l1)
        })
        .collect();
    let mut done = Vec::new();
    let mut error = vec![0.0; nch];
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let left = eval_panel(f, nch, p.a, m)?;
        let right = eval_panel(f, nch, m, p.b)?;
        let frac = (p.b - p.a) / total;
        let diffs: Vec<f64> = (0..nch).map(|c| (p.integral(c) - left.integral(c) - right.integral(c)).norm()).collect();
        // Differences at the rounding level of the panel itself count as converged.
        let ok = (0..nch).all(|c| diffs[c] <= tol[c] * frac || diffs[c] <= 256.0 * f64::EPSILON * p.abs_integral(c));
        if ok || (p.b - p.a) < 1e-12 * total.max(1.0) {
            for c in 0..nch {
                error[c] += diffs[c];
            }
            done.push(left);
            done.push(right);
        } else {
            stack.push(right);
            stack.push(left);
        }
        if done.len() + stack.len() > spec.max_panels {
            return Err(GekError::Convergence(format!(
                "adaptive quadrature on [{a}, {b}] exceeded {} panels",
                spec.max_panels
            )));
        }
    }
    done.sort_by(|x, y| x.a.partial_cmp(&y.a).expect("finite panel bounds"));
    Ok(Partition { panels: done, error })
}

/// Integrals of `nch` channels over `[a, b]` on one shared adaptive grid;
/// `f(t, out)` fills `out[c]` for every channel.
pub(crate) fn integrate_channels<F>(f: F, nch: usize, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Vec<C64>>
where
    F: Fn(f64, &mut [C64]) -> Result<()>,
{
    spec.validate()?;
    if a == b {
        return Ok(vec![C64::new(0.0, 0.0); nch]);
    }
    let part = adaptive(&f, nch, a, b, spec)?;
    Ok((0..nch).map(|c| part.panels.iter().map(|p| p.integral(c)).sum()).collect())
}

/// Integral over `[a, b]` with an error estimate.
pub fn integrate_interval_with_error<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<(C64, f64)> {
    spec.validate()?;
    if a == b {
        return Ok((C64::new(0.0, 0.0), 0.0));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let g = |t: f64, out: &mut [C64]| {
        out[0] = f(t);
        Ok(())
    };
    let part = adaptive(&g, 1, lo, hi, spec)?;
    let v: C64 = part.panels.iter().map(|p| p.integral(0)).sum();
    Ok((v * sign, part.error[0]))
}

/// Integral over `[a, b]`.
pub fn integrate_interval<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<C64> {
    integrate_interval_with_error(f, a, b, spec).map(|r| r.0)
}

/// `∫₀^∞ f(t) dt`: adaptive Gauss–Legendre on `[0, T]`, then doubling `T`
/// until a sampled bound on the remaining tail is below tolerance.
pub fn semiinfinite_integral<F: Fn(f64) -> C64>(f: F, spec: &QuadratureSpec) -> Result<C64> {
    spec.validate()?;
    let mut t = spec.truncation_point;
    let mut value = integrate_interval(&f, 0.0, t, spec)?;
    loop {
        let samples = 32;
        let mut peak = 0.0_f64;
        for k in 0..=samples {
            peak = peak.max(f(t * (1.0 + k as f64 / samples as f64)).norm());
        }
        // Tail beyond 2T is bounded by the same window for decaying integrands.
        let bound = 2.0 * t * peak;
        if bound <= 0.1 * spec.abs_tol.max(spec.rel_tol * value.norm()) {
            return Ok(value);
        }
        if t > MAX_CUTOFF {
            return Err(GekError::Convergence(format!("tail of semi-infinite integral not below tolerance at T = {t}")));
        }
        value += integrate_interval(&f, t, 2.0 * t, spec)?;
        t *= 2.0;
    }
}

/// `∫₀^upper ds outer(s) ∫₀^s inner(t) dt` on a shared panel grid; the inner
/// cumulative integral reuses the outer nodes through a spectral integration matrix.
pub fn nested_integral<F, G>(outer: F, inner: G, upper: f64, spec: &QuadratureSpec) -> Result<C64>
where
    F: Fn(f64) -> Result<C64>,
    G: Fn(f64) -> Result<C64>,
{
    spec.validate()?;
    let both = |t: f64, out: &mut [C64]| {
        out[0] = outer(t)?;
        out[1] = inner(t)?;
        Ok(())
    };
    let part = adaptive(&both, 2, 0.0, upper, spec)?;
    Ok(nested_from_partition(&part))
}

fn nested_from_partition(part: &Partition) -> C64 {
    let r = rule();
    let mut cumulative = C64::new(0.0, 0.0);
    let mut total = C64::new(0.0, 0.0);
    for p in &part.panels {
        let half = 0.5 * (p.b - p.a);
        let f = &p.vals[0..NODES];
        let g = &p.vals[NODES..2 * NODES];
        for k in 0..NODES {
            let partial: C64 = (0..NODES).map(|m| g[m] * r.q[k][m]).sum::<C64>() * half;
            total += f[k] * (cumulative + partial) * (r.w[k] * half);
        }
        cumulative += p.integral(1);
    }
    total
}

/// First point past the peak of `ln|f|` where it has dropped by `CUTOFF_DROP`
/// and is still decreasing.
fn scan_cutoff<L: Fn(f64) -> f64>(logmag: L, step: f64, min_t: f64) -> Result<f64> {
    let mut t = 0.0;
    let mut prev = logmag(0.0);
    let mut peak = prev;
    loop {
        t += step;
        let cur = logmag(t);
        if cur.is_finite() {
            peak = peak.max(cur);
        }
        let dropped = cur < peak - CUTOFF_DROP || cur == f64::NEG_INFINITY;
        if t >= min_t && dropped && cur <= prev {
            return Ok(t);
        }
        if t > MAX_CUTOFF {
            return Err(GekError::Convergence("integrand tail does not decay".into()));
        }
        prev = cur;
    }
}

fn ln_abs_airy(w: C64) -> f64 {
    if w.re >= 0.0 {
        ln_airy_right(w).re
    } else {
        airy_pair(w).map(|p| p.0.norm().ln()).unwrap_or(f64::NEG_INFINITY)
    }
}

/// `ln|Aid(Z,σ)|`, finite far into the decaying tail.
fn ln_abs_deformed(z: C64, sigma: f64) -> f64 {
    if (z + sigma.powi(4) / 4.0).re >= 0.0 {
        ln_deformed_airy(z, sigma).re
    } else {
        deformed_airy_unchecked(z, sigma).map(|v| v.norm().ln()).unwrap_or(f64::NEG_INFINITY)
    }
}

fn min_start(xs: &[f64], shift: f64) -> f64 {
    xs.iter().map(|x| (-(x + shift)).max(0.0)).fold(0.0, f64::max) + 1.0
}

fn airy_step(rate: f64) -> f64 {
    (rate.abs().sqrt() / 8.0).max(0.25)
}

/// Certified truncation point for `e^{rate t} Ai(Z1+shift+t) Ai(Z2+shift+t)`.
pub fn airy_product_cutoff(z1: C64, z2: C64, shift: f64, rate: f64) -> Result<f64> {
    let lm = |t: f64| rate * t + ln_abs_airy(z1 + shift + t) + ln_abs_airy(z2 + shift + t);
    scan_cutoff(lm, airy_step(rate), min_start(&[z1.re, z2.re], shift))
}

/// `∫₀^∞ dt e^{rate t} Ai(Z1+shift+t) Ai(Z2+shift+t)`.
pub fn exp_airy_product_integral(z1: C64, z2: C64, shift: f64, rate: f64, spec: &QuadratureSpec) -> Result<C64> {
    spec.validate()?;
    let t_max = airy_product_cutoff(z1, z2, shift, rate)?;
    let f = |t: f64| {
        let a1 = airy_pair(z1 + shift + t).map(|p| p.0).unwrap_or_default();
        let a2 = airy_pair(z2 + shift + t).map(|p| p.0).unwrap_or_default();
        a1 * a2 * (rate * t).exp()
    };
    integrate_interval(f, 0.0, t_max, spec)
}

/// `∫₀^∞ ds e^{rate s} Ai(Z2+shift+s) ∫₀^s dt e^{rate t} Ai(Z1+shift+t)`.
pub fn nested_exp_airy_integral(z1: C64, z2: C64, shift: f64, rate: f64, spec: &QuadratureSpec) -> Result<C64> {
    spec.validate()?;
    let lm = |z: C64| move |t: f64| rate * t + ln_abs_airy(z + shift + t);
    let start = min_start(&[z1.re, z2.re], shift);
    let t_max = scan_cutoff(lm(z1), airy_step(rate), start)?.max(scan_cutoff(lm(z2), airy_step(rate), start)?);
    let g = |z: C64| move |t: f64| airy_pair(z + shift + t).map(|p| p.0 * (rate * t).exp());
    nested_integral(g(z2), g(z1), t_max, spec)
}

// ---------------------------------------------------------------------------
// Deformed-Airy forms used by the limit kernels: the huge exponential
// prefactors are folded into each factor so nothing overflows.

fn deformed_cutoff(zs: &[C64], sigma: f64) -> Result<f64> {
    let start = min_start(&zs.iter().map(|z| z.re).collect::<Vec<_>>(), sigma.powi(4) / 4.0);
    let step = (sigma / 8.0).max(0.25);
    let mut t = 0.0_f64;
    for &z in zs {
        t = t.max(scan_cutoff(|s| ln_abs_deformed(z + s, sigma), step, start)?);
    }
    Ok(t)
}

/// `∫₀^∞ Aid(Z1+t) Aid(Z2+t) w(t) dt` with `w = 1` or `w = 1 − e^{−σ²t}`.
pub(crate) fn deformed_product_integral(z1: C64, z2: C64, sigma: f64, damped: bool, spec: &QuadratureSpec) -> Result<C64> {
    spec.validate()?;
    let t_max = deformed_cutoff(&[z1, z2], sigma)?;
    let s2 = sigma * sigma;
    let f = |t: f64, out: &mut [C64]| {
        let v = deformed_airy_unchecked(z1 + t, sigma)? * deformed_airy_unchecked(z2 + t, sigma)?;
        out[0] = if damped { v * (-(-s2 * t).exp_m1()) } else { v };
        Ok(())
    };
    let part = adaptive(&f, 1, 0.0, t_max, spec)?;
    Ok(part.panels.iter().map(|p| p.integral(0)).sum())
}

/// `∫₀^∞ Aid(Z+t) dt`.
pub(crate) fn deformed_single_integral(z: C64, sigma: f64, spec: &QuadratureSpec) -> Result<C64> {
    spec.validate()?;
    let t_max = deformed_cutoff(&[z], sigma)?;
    let f = |t: f64, out: &mut [C64]| {
        out[0] = deformed_airy_unchecked(z + t, sigma)?;
        Ok(())
    };
    let part = adaptive(&f, 1, 0.0, t_max, spec)?;
    Ok(part.panels.iter().map(|p| p.integral(0)).sum())
}

/// `∫₀^∞ ds Aid(Z2+s) ∫₀^s dt Aid(Z1+t)`.
pub(crate) fn deformed_nested_integral(z1: C64, z2: C64, sigma: f64, spec: &QuadratureSpec) -> Result<C64> {
    spec.validate()?;
    let t_max = deformed_cutoff(&[z1, z2], sigma)?;
    nested_integral(
        |s| deformed_airy_unchecked(z2 + s, sigma),
        |t| deformed_airy_unchecked(z1 + t, sigma),
        t_max,
        spec,
    )
}
