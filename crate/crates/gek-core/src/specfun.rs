//! Special functions for complex arguments: Airy, erfc, Hermite, deformed
//! Airy, Pfaffians and factorial helpers.

use crate::error::{GekError, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

pub const SQRT_PI: f64 = 1.772_453_850_905_516;
const AI0: f64 = 0.355_028_053_887_817_2;
const NEG_AIP0: f64 = 0.258_819_403_792_806_8;
const MACLAURIN_RADIUS: f64 = 2.5;
const ASYMPTOTIC_RADIUS: f64 = 9.0;
const TAYLOR_STEP: f64 = 0.8;

fn check_finite(z: C64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(GekError::Domain(format!("{what}: non-finite argument {z}")))
    }
}

// ---------------------------------------------------------------------------
// Log-scaled values

/// A complex number stored as `exp(log_magnitude) * phase`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogScaledValue {
    pub log_magnitude: f64,
    pub phase: C64,
    pub zero_flag: bool,
}

impl LogScaledValue {
    pub const ZERO: Self = Self { log_magnitude: f64::NEG_INFINITY, phase: C64 { re: 1.0, im: 0.0 }, zero_flag: true };
    pub const ONE: Self = Self { log_magnitude: 0.0, phase: C64 { re: 1.0, im: 0.0 }, zero_flag: false };

    pub fn from_complex(v: C64) -> Self {
        let m = v.norm();
        if m == 0.0 {
            Self::ZERO
        } else {
            Self { log_magnitude: m.ln(), phase: v / m, zero_flag: false }
        }
    }

    /// Builds `exp(log)` for a complex logarithm.
    pub fn from_log(log: C64) -> Self {
        Self { log_magnitude: log.re, phase: C64::from_polar(1.0, log.im), zero_flag: false }
    }

    pub fn value(&self) -> C64 {
        if self.zero_flag {
            C64::new(0.0, 0.0)
        } else {
            self.phase * self.log_magnitude.exp()
        }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.zero_flag || other.zero_flag {
            return Self::ZERO;
        }
        Self {
            log_magnitude: self.log_magnitude + other.log_magnitude,
            phase: renormalize(self.phase * other.phase),
            zero_flag: false,
        }
    }

    /// Multiplies by `exp(ln_factor)`.
    pub fn scale_ln(self, ln_factor: f64) -> Self {
        if self.zero_flag {
            return self;
        }
        Self { log_magnitude: self.log_magnitude + ln_factor, ..self }
    }

    pub fn mul_complex(self, c: C64) -> Self {
        self.mul(Self::from_complex(c))
    }

    pub fn neg(self) -> Self {
        Self { phase: -self.phase, ..self }
    }
}

fn renormalize(p: C64) -> C64 {
    let m = p.norm();
    if m == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        p / m
    }
}

/// Sum of log-scaled terms with a running common exponent.
#[derive(Clone, Copy, Debug)]
pub struct ScaledSum {
    mantissa: C64,
    log_scale: f64,
}

impl Default for ScaledSum {
    fn default() -> Self {
        Self::new()
    }
}

impl ScaledSum {
    pub fn new() -> Self {
        Self { mantissa: C64::new(0.0, 0.0), log_scale: f64::NEG_INFINITY }
    }

    pub fn add(&mut self, v: LogScaledValue) {
        if v.zero_flag {
            return;
        }
        if self.log_scale == f64::NEG_INFINITY {
            self.mantissa = v.phase;
            self.log_scale = v.log_magnitude;
        } else if v.log_magnitude > self.log_scale {
            self.mantissa = self.mantissa * (self.log_scale - v.log_magnitude).exp() + v.phase;
            self.log_scale = v.log_magnitude;
        } else {
            self.mantissa += v.phase * (v.log_magnitude - self.log_scale).exp();
        }
    }

    pub fn add_sum(&mut self, other: &ScaledSum) {
        self.add(other.get());
    }

    pub fn get(&self) -> LogScaledValue {
        if self.log_scale == f64::NEG_INFINITY {
            return LogScaledValue::ZERO;
        }
        LogScaledValue::from_complex(self.mantissa).scale_ln(self.log_scale)
    }

    pub fn value(&self) -> C64 {
        self.get().value()
    }
}

// ---------------------------------------------------------------------------
// Airy functions

fn airy_maclaurin(z: C64) -> (C64, C64) {
    let z3 = z * z * z;
    let one = C64::new(1.0, 0.0);
    let (mut f, mut fp, mut g, mut gp) = (one, C64::new(0.0, 0.0), z, one);
    let (mut tf, mut tg, mut tfp, mut tgp) = (one, z, z * z * 0.5, one);
    fp += tfp;
    for k in 1..400 {
        let k3 = 3.0 * k as f64;
        tf = tf * z3 / ((k3 - 1.0) * k3);
        tg = tg * z3 / (k3 * (k3 + 1.0));
        tgp = tgp * z3 / ((k3 - 2.0) * k3);
        if k >= 2 {
            tfp = tfp * z3 / ((k3 - 1.0) * (k3 - 3.0));
            fp += tfp;
        }
        f += tf;
        g += tg;
        gp += tgp;
        let small = tf.norm() + tg.norm() + tfp.norm() + tgp.norm();
        if small <= 1e-18 * (f.norm() + g.norm() + fp.norm() + gp.norm()) {
            break;
        }
    }
    (f * AI0 - g * NEG_AIP0, fp * AI0 - gp * NEG_AIP0)
}

/// Returns `(Ai e^ζ, Ai' e^ζ, ζ)` from the large-argument expansion.
fn airy_asymptotic_scaled(z: C64) -> (C64, C64, C64) {
    let sz = z.sqrt();
    let zeta = z * sz * (2.0 / 3.0);
    let z14 = sz.sqrt();
    let inv = C64::new(1.0, 0.0) / zeta;
    let (mut su, mut sv) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    let mut pw = C64::new(1.0, 0.0);
    let mut uk = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let kf = k as f64;
        uk *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / (216.0 * kf * (2.0 * kf - 1.0));
        let vk = -uk * (6.0 * kf + 1.0) / (6.0 * kf - 1.0);
        pw = -pw * inv;
        let tu = pw * uk;
        let mag = tu.norm();
        if mag >= last {
            break;
        }
        su += tu;
        sv += pw * vk;
        last = mag;
        if mag < 1e-17 {
            break;
        }
    }
    let c = 0.5 / SQRT_PI;
    (su * c / z14, -sv * c * z14, zeta)
}

fn airy_connection(z: C64) -> (C64, C64) {
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let w2 = w * w;
    let (a1, d1, z1) = airy_asymptotic_scaled(w * z);
    let (a2, d2, z2) = airy_asymptotic_scaled(w2 * z);
    let (e1, e2) = ((-z1).exp(), (-z2).exp());
    let ai = -(w * a1 * e1) - w2 * a2 * e2;
    let aip = -(w2 * d1 * e1) - w * d2 * e2;
    (ai, aip)
}

fn airy_taylor_path(z: C64) -> (C64, C64) {
    let r2 = ASYMPTOTIC_RADIUS * ASYMPTOTIC_RADIUS;
    let d = (r2 - z.im * z.im).sqrt() - z.re;
    let start = z + d;
    let (s, sp, zeta) = airy_asymptotic_scaled(start);
    let e = (-zeta).exp();
    let (mut y, mut yp) = (s * e, sp * e);
    let steps = (d / TAYLOR_STEP).ceil().max(1.0) as usize;
    let h = -d / steps as f64;
    let mut z0 = start;
    for _ in 0..steps {
        let (ny, nyp) = taylor_step(z0, y, yp, h);
        y = ny;
        yp = nyp;
        z0 += h;
    }
    (y, yp)
}

/// One Taylor step of `y'' = z y` from `z0` by the real increment `h`.
fn taylor_step(z0: C64, y: C64, yp: C64, h: f64) -> (C64, C64) {
    let (mut am1, mut a0, mut a1) = (C64::new(0.0, 0.0), y, yp);
    let mut hk = h;
    let mut val = y + yp * h;
    let mut der = yp;
    let scale = y.norm() + yp.norm();
    for k in 0..120usize {
        let kf = k as f64;
        let a2 = (z0 * a0 + am1) / ((kf + 2.0) * (kf + 1.0));
        let hk1 = hk * h;
        let term = a2 * hk1;
        val += term;
        der += a2 * (kf + 2.0) * hk;
        am1 = a0;
        a0 = a1;
        a1 = a2;
        hk = hk1;
        if k > 4 && term.norm() < 1e-18 * scale && (a0 * hk).norm() < 1e-18 * scale {
            break;
        }
    }
    (val, der)
}

fn airy_pair_unchecked(z: C64) -> (C64, C64) {
    let r = z.norm();
    if r <= MACLAURIN_RADIUS {
        return airy_maclaurin(z);
    }
    let theta = z.arg();
    if r >= ASYMPTOTIC_RADIUS {
        if theta.abs() <= 2.0 * PI / 3.0 {
            let (s, sp, zeta) = airy_asymptotic_scaled(z);
            let e = (-zeta).exp();
            return (s * e, sp * e);
        }
        return airy_connection(z);
    }
    let loss = (2.0 / 3.0) * r.powf(1.5) * (1.0 + (1.5 * theta).cos());
    if loss < 3.5 {
        airy_maclaurin(z)
    } else {
        airy_taylor_path(z)
    }
}

fn realify(z: C64, v: C64) -> C64 {
    if z.im == 0.0 {
        C64::new(v.re, 0.0)
    } else {
        v
    }
}

/// Ai and Ai' together.
pub fn airy_pair(z: C64) -> Result<(C64, C64)> {
    check_finite(z, "airy")?;
    if z.norm() > 1e4 {
        return Err(GekError::Domain(format!("airy: |z| = {} exceeds 1e4", z.norm())));
    }
    let (a, d) = airy_pair_unchecked(z);
    Ok((realify(z, a), realify(z, d)))
}

/// Airy function Ai(z).
pub fn airy_ai(z: C64) -> Result<C64> {
    airy_pair(z).map(|p| p.0)
}

/// Derivative Ai'(z).
pub fn airy_ai_prime(z: C64) -> Result<C64> {
    airy_pair(z).map(|p| p.1)
}

/// `(Ai(w) e^{ζ(w)}, ζ(w))` for `Re w >= 0`, free of overflow for any `|w|`.
pub(crate) fn airy_scaled_right(w: C64) -> (C64, C64) {
    if w.norm() >= ASYMPTOTIC_RADIUS {
        let (s, _, zeta) = airy_asymptotic_scaled(w);
        (s, zeta)
    } else {
        let zeta = w * w.sqrt() * (2.0 / 3.0);
        (airy_pair_unchecked(w).0 * zeta.exp(), zeta)
    }
}

/// Complex logarithm of `Ai(w)` valid for `Re w >= 0` (no zeros there).
pub fn ln_airy_right(w: C64) -> C64 {
    let (s, zeta) = airy_scaled_right(w);
    s.ln() - zeta
}

/// `(1+ε)^{3/2} − 1 − 3ε/2` without cancellation.
fn three_halves_remainder(eps: C64) -> C64 {
    let u = (C64::new(1.0, 0.0) + eps).sqrt();
    let um1 = eps / (u + 1.0);
    um1 * um1 * (u + 0.5)
}

/// Complex logarithm of the deformed Airy function for `Re(Z + σ⁴/4) >= 0`.
pub fn ln_deformed_airy(z: C64, sigma: f64) -> C64 {
    let a = sigma.powi(4) / 4.0;
    let w = z + a;
    let (s, zeta) = airy_scaled_right(w);
    let e = if a >= 1.0 {
        -three_halves_remainder(z / a) * (2.0 / 3.0 * a.powf(1.5))
    } else {
        z * (sigma * sigma / 2.0) + sigma.powi(6) / 12.0 - zeta
    };
    e + s.ln()
}

/// Deformed Airy function `exp[σ⁶/12 + σ²Z/2] Ai(Z + σ⁴/4)`.
pub fn deformed_airy(z: C64, sigma: f64) -> Result<C64> {
    check_finite(z, "deformed_airy")?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(GekError::Domain(format!("deformed_airy: sigma = {sigma}")));
    }
    deformed_airy_unchecked(z, sigma)
}

pub(crate) fn deformed_airy_unchecked(z: C64, sigma: f64) -> Result<C64> {
    let a = sigma.powi(4) / 4.0;
    let w = z + a;
    if w.re >= 0.0 {
        let (s, zeta) = airy_scaled_right(w);
        let e = if a >= 1.0 {
            -three_halves_remainder(z / a) * (2.0 / 3.0 * a.powf(1.5))
        } else {
            z * (sigma * sigma / 2.0) + sigma.powi(6) / 12.0 - zeta
        };
        if e.re > 700.0 {
            return Err(GekError::Range(format!("deformed_airy: exponent {} overflows at Z={z}, sigma={sigma}", e.re)));
        }
        return Ok(s * e.exp());
    }
    let e = z * (sigma * sigma / 2.0) + sigma.powi(6) / 12.0;
    if e.re > 700.0 {
        return Err(GekError::Range(format!("deformed_airy: exponent {} overflows at Z={z}, sigma={sigma}", e.re)));
    }
    if w.norm() > 1e4 {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(airy_pair_unchecked(w).0 * e.exp())
}

// ---------------------------------------------------------------------------
// Error functions

fn erf_series(z: C64) -> C64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..5000 {
        let nf = n as f64;
        term = -term * z2 / nf;
        let contrib = term / (2.0 * nf + 1.0);
        sum += contrib;
        if contrib.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum * (2.0 / SQRT_PI)
}

/// Scaled complement `e^{z²} erfc(z)` by a Jacobi continued fraction, `Re z > 0`.
fn erfcx_cf(z: C64) -> C64 {
    let z2 = z * z;
    let tiny = 1e-300;
    // 1/(2z²+1 − 1·2/(2z²+5 − 3·4/(2z²+9 − …)))
    let mut f = z2 * 2.0 + 1.0;
    if f.norm() < tiny {
        f = C64::new(tiny, 0.0);
    }
    let mut c = f;
    let mut d = C64::new(0.0, 0.0);
    for k in 1..20000 {
        let kf = k as f64;
        let a = -(2.0 * kf - 1.0) * (2.0 * kf);
        let b = z2 * 2.0 + (4.0 * kf + 1.0);
        d = b + d * a;
        if d.norm() < tiny {
            d = C64::new(tiny, 0.0);
        }
        c = b + a / c;
        if c.norm() < tiny {
            c = C64::new(tiny, 0.0);
        }
        d = C64::new(1.0, 0.0) / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    z * (2.0 / SQRT_PI) / f
}

fn use_series(z: C64) -> bool {
    z.re.abs() < 1.8 && z.norm() < 6.0
}

fn erfc_unchecked(z: C64) -> C64 {
    if z.re < 0.0 {
        return C64::new(2.0, 0.0) - erfc_unchecked(-z);
    }
    if use_series(z) {
        C64::new(1.0, 0.0) - erf_series(z)
    } else {
        erfcx_cf(z) * (-(z * z)).exp()
    }
}

/// Complementary error function.
pub fn erfc(z: C64) -> Result<C64> {
    check_finite(z, "erfc")?;
    Ok(realify(z, erfc_unchecked(z)))
}

/// Error function.
pub fn erf(z: C64) -> Result<C64> {
    check_finite(z, "erf")?;
    let v = if use_series(z) { erf_series(z) } else { C64::new(1.0, 0.0) - erfc_unchecked(z) };
    Ok(realify(z, v))
}

/// Real erfc.
pub fn erfc_real(x: f64) -> f64 {
    erfc_unchecked(C64::new(x, 0.0)).re
}

/// Real erf.
pub fn erf_real(x: f64) -> f64 {
    if x.abs() < 1.8 {
        erf_series(C64::new(x, 0.0)).re
    } else {
        x.signum() * (1.0 - erfc_real(x.abs()))
    }
}

/// `ln erfc(x)` for real x, finite far into the tail.
pub fn ln_erfc_real(x: f64) -> f64 {
    if x >= 1.8 {
        erfcx_cf(C64::new(x, 0.0)).re.ln() - x * x
    } else {
        erfc_real(x).ln()
    }
}

/// `e^{x²} erfc(x)` for real x.
pub fn erfcx_real(x: f64) -> f64 {
    if x >= 1.8 {
        erfcx_cf(C64::new(x, 0.0)).re
    } else {
        erfc_real(x) * (x * x).exp()
    }
}

// ---------------------------------------------------------------------------
// Hermite polynomials

/// Runs `p_{j+1} = α z p_j − β(j) p_{j−1}` with rescaling, returning `p_0..=p_nmax`.
fn scaled_three_term(nmax: usize, z: C64, lead: f64, beta: impl Fn(usize) -> f64) -> Vec<LogScaledValue> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(LogScaledValue::ONE);
    if nmax == 0 {
        return out;
    }
    let mut prev = C64::new(1.0, 0.0);
    let mut cur = z * lead;
    let mut scale = 0.0_f64;
    out.push(LogScaledValue::from_complex(cur));
    for j in 1..nmax {
        let next = z * lead * cur - prev * beta(j);
        prev = cur;
        cur = next;
        let m = cur.norm().max(prev.norm());
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            prev /= m;
            cur /= m;
            scale += m.ln();
        }
        out.push(LogScaledValue::from_complex(cur).scale_ln(scale));
    }
    out
}

/// Physicists' Hermite polynomial in log-scaled form.
pub fn hermite_h(n: usize, z: C64) -> Result<LogScaledValue> {
    check_finite(z, "hermite_h")?;
    if n > 1_000_000 {
        return Err(GekError::Domain(format!("hermite_h: degree {n} exceeds 1e6")));
    }
    Ok(*hermite_sequence(n, z).last().expect("non-empty"))
}

/// `H_0(z), …, H_nmax(z)` in log-scaled form.
pub fn hermite_sequence(nmax: usize, z: C64) -> Vec<LogScaledValue> {
    scaled_three_term(nmax, z, 2.0, |j| 2.0 * j as f64)
}

/// `p_j(z) = (τ/2)^{j/2} H_j(z/√(2τ))` for `j = 0..=nmax`; monic, and `z^j` at τ = 0.
pub fn monic_hermite_sequence(nmax: usize, z: C64, tau: f64) -> Vec<LogScaledValue> {
    scaled_three_term(nmax, z, 1.0, |j| j as f64 * tau)
}

// ---------------------------------------------------------------------------
// Factorials

const EXACT_FACTORIALS: usize = 171;

fn factorial_table() -> &'static [f64; EXACT_FACTORIALS] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[f64; EXACT_FACTORIALS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0; EXACT_FACTORIALS];
        for i in 1..EXACT_FACTORIALS {
            t[i] = t[i - 1] * i as f64;
        }
        t
    })
}

/// n! as a float (infinite beyond 170).
pub fn factorial(n: usize) -> f64 {
    if n < EXACT_FACTORIALS {
        factorial_table()[n]
    } else {
        f64::INFINITY
    }
}

/// ln n!.
pub fn ln_factorial(n: usize) -> f64 {
    if n < EXACT_FACTORIALS {
        return factorial_table()[n].ln();
    }
    let x = n as f64;
    let x2 = x * x;
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2)
}

/// ln n!! with the convention (−1)!! = 0!! = 1 (pass `n = -1` as `None`).
pub fn ln_double_factorial(n: usize) -> f64 {
    let k = n / 2;
    if n % 2 == 0 {
        k as f64 * std::f64::consts::LN_2 + ln_factorial(k)
    } else {
        ln_factorial(n) - k as f64 * std::f64::consts::LN_2 - ln_factorial(k)
    }
}

/// n!! as a float.
pub fn double_factorial(n: usize) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

// ---------------------------------------------------------------------------
// Pfaffian

/// Pfaffian by recursive cofactor expansion along the first row.
pub fn pfaffian(a: &DMatrix<C64>) -> Result<C64> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(GekError::Structure(format!("pfaffian: {}x{} matrix is not square", n, a.ncols())));
    }
    if n % 2 == 1 {
        return Err(GekError::Structure(format!("pfaffian: odd dimension {n}")));
    }
    if n > 12 {
        return Err(GekError::Structure(format!("pfaffian: dimension {n} exceeds 12")));
    }
    let amax = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut skew = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            skew = skew.max((a[(i, j)] + a[(j, i)]).norm());
        }
    }
    if skew > 1e-10 * amax {
        return Err(GekError::Structure(format!("pfaffian: antisymmetry residual {skew:e}")));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(pf_rec(a, &idx))
}

fn pf_rec(a: &DMatrix<C64>, idx: &[usize]) -> C64 {
    if idx.is_empty() {
        return C64::new(1.0, 0.0);
    }
    let i = idx[0];
    let mut sum = C64::new(0.0, 0.0);
    let mut rest: Vec<usize> = Vec::with_capacity(idx.len() - 2);
    for p in 1..idx.len() {
        let aij = a[(i, idx[p])];
        if aij == C64::new(0.0, 0.0) {
            continue;
        }
        rest.clear();
        rest.extend(idx[1..].iter().enumerate().filter(|(q, _)| q + 1 != p).map(|(_, &v)| v));
        let sign = if p % 2 == 1 { 1.0 } else { -1.0 };
        sum += aij * pf_rec(a, &rest) * sign;
    }
    sum
}
