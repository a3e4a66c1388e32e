//! Exact finite-N kernels of the elliptic Ginibre ensembles.
//!
//! All Hermite sums run over `p_j(z) = (τ/2)^{j/2} H_j(z/√(2τ))`, which obey
//! `p_{j+1} = z p_j − jτ p_{j−1}` and stay finite at τ = 0. Terms are carried
//! as [`LogScaledValue`]s so large N at the spectral edge does not overflow.

use crate::error::{GekError, Result};
use crate::quad::{integrate_channels, QuadratureSpec};
use crate::specfun::{
    erf_real, ln_double_factorial, ln_erfc_real, ln_factorial, monic_hermite_sequence, pfaffian, LogScaledValue as L,
    ScaledSum,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Dyson index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Beta {
    One,
    Two,
    Four,
}

impl Beta {
    pub fn from_index(b: u32) -> Result<Self> {
        match b {
            1 => Ok(Beta::One),
            2 => Ok(Beta::Two),
            4 => Ok(Beta::Four),
            _ => Err(GekError::Domain(format!("beta must be 1, 2 or 4, got {b}"))),
        }
    }

    pub fn index(self) -> u32 {
        match self {
            Beta::One => 1,
            Beta::Two => 2,
            Beta::Four => 4,
        }
    }
}

/// Ensemble parameters. `n` counts complex eigenvalues, so for β = 4 it is
/// twice the quaternion matrix size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub beta: Beta,
    pub n: usize,
    pub tau: f64,
}

impl EnsembleSpec {
    pub fn new(beta: Beta, n: usize, tau: f64) -> Result<Self> {
        let s = Self { beta, n, tau };
        s.validate()?;
        Ok(s)
    }

    /// Spec at weak non-Hermiticity: `τ = 1 − σ² N^{−1/3}`.
    pub fn weak(beta: Beta, n: usize, sigma: f64) -> Result<Self> {
        Self::new(beta, n, weak_tau(n, sigma)?)
    }

    pub fn validate(&self) -> Result<()> {
        check_tau(self.tau)?;
        if self.n == 0 {
            return Err(GekError::Domain("n must be positive".into()));
        }
        if self.beta != Beta::Two && self.n % 2 == 1 {
            return Err(GekError::Domain(format!("n must be even for beta = {}, got {}", self.beta.index(), self.n)));
        }
        Ok(())
    }

    /// Rightmost point `(1+τ)√N` of the support ellipse.
    pub fn edge(&self) -> f64 {
        (1.0 + self.tau) * (self.n as f64).sqrt()
    }

    /// Maps a microscopic edge coordinate to the eigenvalue plane.
    pub fn edge_point(&self, zm: C64) -> C64 {
        zm * (self.n as f64).powf(-1.0 / 6.0) + self.edge()
    }

    fn require(&self, beta: Beta) -> Result<()> {
        self.validate()?;
        if self.beta != beta {
            return Err(GekError::Usage(format!(
                "operation needs beta = {}, spec has beta = {}",
                beta.index(),
                self.beta.index()
            )));
        }
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..1.0).contains(&tau) {
        return Err(GekError::Domain(format!("tau must lie in [0, 1), got {tau}")));
    }
    Ok(())
}

pub(crate) fn check_point(z: C64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(GekError::Domain(format!("non-finite point {z}")));
    }
    Ok(())
}

pub(crate) fn finite(v: C64, what: &str) -> Result<C64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(GekError::Range(format!("{what} overflows double precision")))
    }
}

/// `1 − σ² N^{−1/3}`.
pub fn weak_tau(n: usize, sigma: f64) -> Result<f64> {
    let tau = 1.0 - sigma * sigma * (n as f64).powf(-1.0 / 3.0);
    if !(sigma > 0.0) || !(0.0..1.0).contains(&tau) {
        return Err(GekError::Domain(format!("sigma = {sigma} gives tau = {tau} outside [0, 1) for N = {n}")));
    }
    Ok(tau)
}

// ---------------------------------------------------------------------------
// Weights

/// `ln w(z)` for the given Dyson index.
pub fn ln_weight(beta: Beta, z: C64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    check_point(z)?;
    Ok(ln_weight_unchecked(beta, z, tau))
}

fn ln_weight_unchecked(beta: Beta, z: C64, tau: f64) -> f64 {
    let (x, y) = (z.re, z.im);
    match beta {
        Beta::Two | Beta::Four => -x * x / (1.0 + tau) - y * y / (1.0 - tau),
        Beta::One => {
            (y * y - x * x) / (2.0 * (1.0 + tau)) + 0.5 * ln_erfc_real((2.0 / (1.0 - tau * tau)).sqrt() * y.abs())
        }
    }
}

/// Weight function `w^{(β)}(z)`.
pub fn weight(beta: Beta, z: C64, tau: f64) -> Result<f64> {
    ln_weight(beta, z, tau).map(f64::exp)
}

// ---------------------------------------------------------------------------
// Pre-kernel sums

fn polys(z: C64, tau: f64, nmax: usize) -> Vec<L> {
    monic_hermite_sequence(nmax, z, tau)
}

fn prekernel_b2_scaled(z1: C64, z2: C64, n: usize, tau: f64) -> L {
    let (p1, p2) = (polys(z1, tau, n - 1), polys(z2, tau, n - 1));
    let mut s = ScaledSum::new();
    for j in 0..n {
        s.add(p1[j].mul(p2[j]).scale_ln(-ln_factorial(j)));
    }
    s.get().scale_ln(-(PI * (1.0 - tau * tau).sqrt()).ln())
}

fn kernel_b2_scaled(z1: C64, z2: C64, spec: &EnsembleSpec) -> L {
    let lw = 0.5 * (ln_weight_unchecked(Beta::Two, z1, spec.tau) + ln_weight_unchecked(Beta::Two, z2, spec.tau));
    prekernel_b2_scaled(z1, z2, spec.n, spec.tau).scale_ln(lw)
}

/// Pre-kernel `Σ_{j<N} p_j(z₁)p_j(z₂)/c_j` without weights.
pub fn prekernel_b2(z1: C64, z2: C64, spec: &EnsembleSpec) -> Result<C64> {
    spec.require(Beta::Two)?;
    check_point(z1)?;
    check_point(z2)?;
    finite(prekernel_b2_scaled(z1, z2, spec.n, spec.tau).value(), "prekernel_b2")
}

/// Kernel `K_N(z₁,z₂)`; the density is `K_N(z, z*)`.
pub fn kernel_b2(z1: C64, z2: C64, spec: &EnsembleSpec) -> Result<C64> {
    spec.require(Beta::Two)?;
    check_point(z1)?;
    check_point(z2)?;
    Ok(kernel_b2_scaled(z1, z2, spec).value())
}

pub fn density_b2(z: C64, spec: &EnsembleSpec) -> Result<f64> {
    kernel_b2(z, z.conj(), spec).map(|v| v.re)
}

/// `N^{−1/3} e^{−iN^{1/3}(Y₁+Y₂)} K_N(z₁,z₂)` at edge coordinates `Z₁, Z₂`.
pub fn edge_scaled_kernel_b2(zm1: C64, zm2: C64, spec: &EnsembleSpec) -> Result<C64> {
    let n3 = (spec.n as f64).cbrt();
    let k = kernel_b2(spec.edge_point(zm1), spec.edge_point(zm2), spec)?;
    Ok(k * C64::from_polar(1.0 / n3, -n3 * (zm1.im + zm2.im)))
}

fn ln_c4(tau: f64) -> f64 {
    (2.0 * PI).ln() + 1.5 * (1.0 - tau).ln() + 0.5 * (1.0 + tau).ln()
}

fn prekernel_b4_scaled(z1: C64, z2: C64, n: usize, tau: f64) -> L {
    if z1 == z2 {
        return L::ZERO;
    }
    let (p1, p2) = (polys(z1, tau, n - 1), polys(z2, tau, n - 1));
    let (mut c1, mut c2) = (ScaledSum::new(), ScaledSum::new());
    let mut acc = ScaledSum::new();
    for k in (1..n).step_by(2) {
        let lm = -ln_double_factorial(k - 1);
        c1.add(p1[k - 1].scale_ln(lm));
        c2.add(p2[k - 1].scale_ln(lm));
        let lk = -ln_double_factorial(k);
        acc.add(p1[k].scale_ln(lk).mul(c2.get()));
        acc.add(p2[k].scale_ln(lk).mul(c1.get()).neg());
    }
    acc.get().scale_ln(-ln_c4(tau))
}

/// Antisymmetric pre-kernel `K̂_N^{(4)}` with `N = spec.n`.
pub fn prekernel_b4(z1: C64, z2: C64, spec: &EnsembleSpec) -> Result<C64> {
    spec.require(Beta::Four)?;
    check_point(z1)?;
    check_point(z2)?;
    finite(prekernel_b4_scaled(z1, z2, spec.n, spec.tau).value(), "prekernel_b4")
}

fn b4_prefactor_ln(z1: C64, z2: C64, tau: f64) -> f64 {
    0.5 * ((z1.im * z2.im).abs().ln() + ln_weight_unchecked(Beta::Four, z1, tau) + ln_weight_unchecked(Beta::Four, z2, tau))
}

fn kernel_b4_scaled(z1: C64, z2: C64, spec: &EnsembleSpec) -> L {
    if z1.im == 0.0 || z2.im == 0.0 {
        return L::ZERO;
    }
    prekernel_b4_scaled(z1, z2, spec.n, spec.tau)
        .scale_ln(b4_prefactor_ln(z1, z2, spec.tau))
        .mul_complex(C64::new(0.0, -2.0))
}

/// `(−2i)√(|y₁y₂| w(z₁)w(z₂)) K̂^{(4)}(z₁,z₂)`; pass `z₂ = z*` for the density.
pub fn kernel_b4(z1: C64, z2: C64, spec: &EnsembleSpec) -> Result<C64> {
    spec.require(Beta::Four)?;
    check_point(z1)?;
    check_point(z2)?;
    Ok(kernel_b4_scaled(z1, z2, spec).value())
}

/// Density of complex eigenvalues, evaluated on the upper-half representative.
pub fn density_b4(z: C64, spec: &EnsembleSpec) -> Result<f64> {
    let u = upper(z);
    kernel_b4(u, u.conj(), spec).map(|v| v.re)
}

pub(crate) fn upper(z: C64) -> C64 {
    if z.im < 0.0 {
        z.conj()
    } else {
        z
    }
}

fn ln_d1(tau: f64) -> f64 {
    -(2.0 * (2.0 * PI).sqrt() * (1.0 + tau)).ln()
}

fn prekernel_b1_scaled(z1: C64, z2: C64, n: usize, tau: f64) -> L {
    if z1 == z2 {
        return L::ZERO;
    }
    let (p1, p2) = (polys(z1, tau, n - 1), polys(z2, tau, n - 1));
    let mut acc = ScaledSum::new();
    for j in 0..n - 1 {
        let lf = -ln_factorial(j);
        acc.add(p1[j + 1].mul(p2[j]).scale_ln(lf));
        acc.add(p1[j].mul(p2[j + 1]).scale_ln(lf).neg());
    }
    acc.get().scale_ln(ln_d1(tau))
}

/// Antisymmetric pre-kernel `K̂_N^{(1)}` (even N).
pub fn prekernel_b1(z1: C64, z2: C64, spec: &EnsembleSpec) -> Result<C64> {
    spec.require(Beta::One)?;
    check_point(z1)?;
    check_point(z2)?;
    finite(prekernel_b1_scaled(z1, z2, spec.n, spec.tau).value(), "prekernel_b1")
}

// ---------------------------------------------------------------------------
// Sign-weighted Hermite integrals

/// `Ĩ_j(x) = (τ/2)^{j/2} I_j(x;τ)` for `j = 0..=jmax`.
///
/// Odd j use the closed form `−2(1+τ)(j−1)!! w(x) Σ_k p_{2k}(x)/(2k)!!`, a
/// forward recurrence for the dominant tail integral. Even j equal
/// `2 sgn(x) ∫₀^{|x|} w p_j`, which is small where the closed form cancels, so
/// those are integrated directly.
fn i_tilde_sequence(x: f64, tau: f64, jmax: usize) -> Vec<L> {
    let p = polys(C64::new(x, 0.0), tau, jmax);
    let ln_c = (2.0 * (1.0 + tau)).ln() - x * x / (2.0 * (1.0 + tau));
    let mut even_sum = ScaledSum::new();
    let mut out = vec![L::ZERO; jmax + 1];
    for j in (1..=jmax).step_by(2) {
        let ldf = ln_double_factorial(j - 1);
        even_sum.add(p[j - 1].scale_ln(-ldf));
        out[j] = even_sum.get().scale_ln(ln_c + ldf).neg();
    }
    let half = even_half_integrals(x.abs(), tau, jmax / 2);
    for (k, v) in half.into_iter().enumerate() {
        out[2 * k] = if x < 0.0 { v.scale_ln(std::f64::consts::LN_2).neg() } else { v.scale_ln(std::f64::consts::LN_2) };
    }
    out
}

/// `∫₀^x e^{−t²/2(1+τ)} p_{2k}(t) dt` for `k = 0..=kmax`, `x ≥ 0`.
fn even_half_integrals(x: f64, tau: f64, kmax: usize) -> Vec<L> {
    let s = 1.0 + tau;
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(L::from_complex(C64::new((PI * s / 2.0).sqrt() * erf_real(x / (2.0 * s).sqrt()), 0.0)));
    if kmax == 0 {
        return out;
    }
    if x == 0.0 {
        out.resize(kmax + 1, L::ZERO);
        return out;
    }
    // |p_j(t)| ≲ (t² + jτ + 1)^{j/2} on [0, x]; dividing by it keeps every channel O(1).
    let ln_scale: Vec<f64> = (1..=kmax).map(|k| k as f64 * (x * x + 2.0 * k as f64 * tau + 1.0).ln()).collect();
    let spec = QuadratureSpec { rel_tol: 1e-13, abs_tol: 1e-300, max_panels: 20000, truncation_point: 1.0 };
    let f = |t: f64, buf: &mut [C64]| {
        let p = polys(C64::new(t, 0.0), tau, 2 * kmax);
        let lw = -t * t / (2.0 * s);
        for k in 1..=kmax {
            buf[k - 1] = p[2 * k].scale_ln(lw - ln_scale[k - 1]).value();
        }
        Ok(())
    };
    let vals = integrate_channels(f, kmax, 0.0, x, &spec).expect("polynomial-Gaussian integrand on a finite interval");
    for (k, v) in vals.into_iter().enumerate() {
        out.push(L::from_complex(v).scale_ln(ln_scale[k]));
    }
    out
}

/// `I_j(x;τ) = ∫ dt sgn(x−t) w^{(1)}(t) H_j(t/√(2τ))`.
pub fn i_j(x: f64, tau: f64, j: usize) -> Result<f64> {
    check_tau(tau)?;
    if !x.is_finite() {
        return Err(GekError::Domain(format!("i_j: non-finite x = {x}")));
    }
    if j > 2000 {
        return Err(GekError::Domain(format!("i_j: j = {j} exceeds 2000")));
    }
    if j > 0 && tau == 0.0 {
        return Err(GekError::Domain("i_j: tau = 0 is singular for j > 0".into()));
    }
    let v = i_tilde_sequence(x, tau, j)[j].scale_ln(-(j as f64 / 2.0) * (tau / 2.0).ln());
    finite(v.value(), "i_j").map(|c| c.re)
}

// ---------------------------------------------------------------------------
// β = 1 matrix-kernel elements

fn ln_w1_real(x: f64, tau: f64) -> f64 {
    -x * x / (2.0 * (1.0 + tau))
}

/// `G^R(z₁,x₂)` by the direct sign-weighted sum.
fn g_real_direct(z1: C64, x2: f64, n: usize, tau: f64) -> L {
    let p = polys(z1, tau, n - 1);
    let it = i_tilde_sequence(x2, tau, n - 1);
    let mut acc = ScaledSum::new();
    for j in 0..n - 1 {
        let lf = -ln_factorial(j);
        acc.add(p[j + 1].mul(it[j]).scale_ln(lf));
        acc.add(p[j].mul(it[j + 1]).scale_ln(lf).neg());
    }
    acc.get().scale_ln(ln_d1(tau) + ln_w1_real(x2, tau)).neg()
}

/// `G^R(z₁,x₂)` through the β = 2 kernel plus a single boundary term.
fn g_real_via_b2(z1: C64, x2: f64, spec2: &EnsembleSpec) -> L {
    let (n, tau) = (spec2.n, spec2.tau);
    let ln_pref = 0.5 * (PI * (1.0 - tau * tau) / 2.0).ln()
        + z1.im * z1.im / (1.0 - tau * tau)
        + 0.5 * ln_erfc_real((2.0 / (1.0 - tau * tau)).sqrt() * z1.im.abs());
    let first = kernel_b2_scaled(z1, C64::new(x2, 0.0), spec2).scale_ln(ln_pref);
    let lw1 = ln_weight_unchecked(Beta::One, z1, tau);
    let p = polys(z1, tau, n - 1);
    let it = i_tilde_sequence(x2, tau, n);
    let second = p[n - 1].mul(it[n]).scale_ln(ln_d1(tau) - ln_factorial(n - 1) + lw1);
    let mut s = ScaledSum::new();
    s.add(first);
    s.add(second);
    s.get().scale_ln(ln_w1_real(x2, tau) - lw1).neg()
}

/// `G^R(z₁,x₂)` (coefficient of δ(y₂)) from the direct sum.
pub fn g_real_b1(z1: C64, x2: f64, spec: &EnsembleSpec) -> Result<C64> {
    spec.require(Beta::One)?;
    check_point(z1)?;
    check_point(C64::new(x2, 0.0))?;
    finite(g_real_direct(z1, x2, spec.n, spec.tau).value(), "g_real_b1")
}

/// `G^R(z₁,x₂)` evaluated from `kernel_b2` (cross-check path).
pub fn g_real_b1_via_b2(z1: C64, x2: f64, spec: &EnsembleSpec) -> Result<C64> {
    spec.require(Beta::One)?;
    check_point(z1)?;
    check_point(C64::new(x2, 0.0))?;
    let spec2 = EnsembleSpec { beta: Beta::Two, ..*spec };
    finite(g_real_via_b2(z1, x2, &spec2).value(), "g_real_b1")
}

/// Density of real eigenvalues `−G^R(x,x)`.
pub fn density_b1_real(x: f64, spec: &EnsembleSpec) -> Result<f64> {
    g_real_b1(C64::new(x, 0.0), x, spec).map(|g| -g.re)
}

fn w_rr_scaled(x1: f64, x2: f64, n: usize, tau: f64) -> L {
    if x1 == x2 {
        return L::ZERO;
    }
    let i1 = i_tilde_sequence(x1, tau, n);
    let i2 = i_tilde_sequence(x2, tau, n);
    let p2 = polys(C64::new(x2, 0.0), tau, n - 1);
    let mut s = ScaledSum::new();
    for j in 0..n {
        s.add(i1[j].mul(p2[j]).scale_ln(-ln_factorial(j) + ln_w1_real(x2, tau)));
    }
    s.add(i1[n - 1].mul(i2[n]).scale_ln(-(2.0 * (1.0 + tau)).ln() - ln_factorial(n - 1)));
    s.get().scale_ln(ln_w1_real(x1, tau) + ln_w1_real(x2, tau) - 0.5 * (2.0 * PI).ln()).neg()
}

pub(crate) fn sgn(y: f64) -> f64 {
    if y > 0.0 {
        1.0
    } else if y < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn g_complex_scaled(z1: C64, z2: C64, n: usize, tau: f64) -> L {
    let s = sgn(z2.im);
    if s == 0.0 {
        return L::ZERO;
    }
    prekernel_b1_scaled(z1, z2.conj(), n, tau)
        .scale_ln(2.0 * ln_weight_unchecked(Beta::One, z2, tau))
        .mul_complex(C64::new(0.0, 2.0 * s))
}

fn w_rc_scaled(x1: f64, z2: C64, n: usize, tau: f64) -> L {
    let s = sgn(z2.im);
    if s == 0.0 {
        return L::ZERO;
    }
    g_real_direct(z2.conj(), x1, n, tau)
        .scale_ln(2.0 * ln_weight_unchecked(Beta::One, z2, tau))
        .mul_complex(C64::new(0.0, -2.0 * s))
}

fn w_cc_scaled(z1: C64, z2: C64, n: usize, tau: f64) -> L {
    let s = sgn(z1.im) * sgn(z2.im);
    if s == 0.0 {
        return L::ZERO;
    }
    prekernel_b1_scaled(z1.conj(), z2.conj(), n, tau)
        .scale_ln(2.0 * (ln_weight_unchecked(Beta::One, z1, tau) + ln_weight_unchecked(Beta::One, z2, tau)))
        .mul_complex(C64::new(4.0 * s, 0.0))
}

/// Distributional factor multiplying a matrix-kernel term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaFactor {
    None,
    /// δ(y₁)
    Y1,
    /// δ(y₂)
    Y2,
    /// δ(y₁)δ(y₂)
    Y1Y2,
    /// δ²(z₁ − z₂*)
    Conjugate,
}

/// Numeric coefficient of a term that multiplies a delta distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaTerm {
    pub value: C64,
    pub delta: DeltaFactor,
}

/// Every β = 1 matrix-kernel piece at `(z₁, z₂)`, with the delta factors kept
/// symbolic. `contact` holds the two parts of the bivariate weight, which are
/// excluded from all correlation functions here.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct B1Elements {
    pub khat: C64,
    pub g_real: DeltaTerm,
    pub g_complex: C64,
    pub w_rr: DeltaTerm,
    /// Coefficient of δ(y₁) in W, equal to `−W^{RC}(x₁,z₂)`.
    pub w_real_complex: DeltaTerm,
    /// Coefficient of δ(y₂) in W, equal to `W^{RC}(x₂,z₁)`.
    pub w_complex_real: DeltaTerm,
    pub w_cc: C64,
    pub contact: [DeltaTerm; 2],
}

/// `W^{RR}(x₁,x₂)`.
pub fn w_rr_b1(x1: f64, x2: f64, spec: &EnsembleSpec) -> Result<f64> {
    spec.require(Beta::One)?;
    check_point(C64::new(x1, x2))?;
    finite(w_rr_scaled(x1, x2, spec.n, spec.tau).value(), "w_rr_b1").map(|v| v.re)
}

/// `W^{RC}(x₁,z₂) = −2i sgn(y₂) w(z₂)² G^R(z₂*,x₁)`.
pub fn w_rc_b1(x1: f64, z2: C64, spec: &EnsembleSpec) -> Result<C64> {
    spec.require(Beta::One)?;
    check_point(z2)?;
    check_point(C64::new(x1, 0.0))?;
    finite(w_rc_scaled(x1, z2, spec.n, spec.tau).value(), "w_rc_b1")
}

/// `G^C(z₁,z₂)`.
pub fn g_complex_b1(z1: C64, z2: C64, spec: &EnsembleSpec) -> Result<C64> {
    spec.require(Beta::One)?;
    check_point(z1)?;
    check_point(z2)?;
    finite(g_complex_scaled(z1, z2, spec.n, spec.tau).value(), "g_complex_b1")
}

/// Density of complex eigenvalues `−G^C(z,z)`.
pub fn density_b1_complex(z: C64, spec: &EnsembleSpec) -> Result<f64> {
    g_complex_b1(z, z, spec).map(|g| -g.re)
}

pub fn matrix_kernel_b1(z1: C64, z2: C64, spec: &EnsembleSpec) -> Result<B1Elements> {
    spec.require(Beta::One)?;
    check_point(z1)?;
    check_point(z2)?;
    let (n, tau) = (spec.n, spec.tau);
    let f = |v: L, what| finite(v.value(), what);
    let ww = (ln_weight_unchecked(Beta::One, z1, tau) + ln_weight_unchecked(Beta::One, z2, tau)).exp();
    Ok(B1Elements {
        khat: f(prekernel_b1_scaled(z1, z2, n, tau), "prekernel")?,
        g_real: DeltaTerm { value: f(g_real_direct(z1, z2.re, n, tau), "G^R")?, delta: DeltaFactor::Y2 },
        g_complex: f(g_complex_scaled(z1, z2, n, tau), "G^C")?,
        w_rr: DeltaTerm { value: f(w_rr_scaled(z1.re, z2.re, n, tau), "W^RR")?, delta: DeltaFactor::Y1Y2 },
        w_real_complex: DeltaTerm { value: -f(w_rc_scaled(z1.re, z2, n, tau), "W^RC")?, delta: DeltaFactor::Y1 },
        w_complex_real: DeltaTerm { value: f(w_rc_scaled(z2.re, z1, n, tau), "W^RC")?, delta: DeltaFactor::Y2 },
        w_cc: f(w_cc_scaled(z1, z2, n, tau), "W^CC")?,
        contact: [
            DeltaTerm { value: C64::new(0.0, 2.0 * sgn(z1.im) * ww), delta: DeltaFactor::Conjugate },
            DeltaTerm { value: C64::new(sgn(z2.re - z1.re) * ww, 0.0), delta: DeltaFactor::Y1Y2 },
        ],
    })
}

// ---------------------------------------------------------------------------
// Matrix-kernel blocks and correlation functions

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    FiniteN,
    Limit,
}

/// The 2×2 block `[[K̂, −G], [G(z₂,z₁), −W]]` for one argument pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixKernelBlocks {
    pub khat: C64,
    pub g: C64,
    pub g_swapped: C64,
    pub w: C64,
    pub regime: Regime,
}

impl MatrixKernelBlocks {
    pub fn as_matrix(&self) -> [[C64; 2]; 2] {
        [[self.khat, -self.g], [self.g_swapped, -self.w]]
    }
}

/// β = 4 block in the symmetric form; both points must satisfy `Im z ≥ 0`.
pub fn matrix_kernel_b4(z1: C64, z2: C64, spec: &EnsembleSpec) -> Result<MatrixKernelBlocks> {
    spec.require(Beta::Four)?;
    check_point(z1)?;
    check_point(z2)?;
    if z1.im < 0.0 || z2.im < 0.0 {
        return Err(GekError::Domain("matrix_kernel_b4 needs Im z >= 0 for both points".into()));
    }
    Ok(b4_blocks(z1, z2, spec))
}

fn b4_blocks(z1: C64, z2: C64, spec: &EnsembleSpec) -> MatrixKernelBlocks {
    let k = |a: C64, b: C64| {
        if z1.im == 0.0 || z2.im == 0.0 {
            return C64::new(0.0, 0.0);
        }
        prekernel_b4_scaled(a, b, spec.n, spec.tau)
            .scale_ln(b4_prefactor_ln(z1, z2, spec.tau))
            .mul_complex(C64::new(0.0, -2.0))
            .value()
    };
    MatrixKernelBlocks {
        khat: k(z1, z2),
        g: -k(z1, z2.conj()),
        g_swapped: k(z1.conj(), z2),
        w: -k(z1.conj(), z2.conj()),
        regime: Regime::FiniteN,
    }
}

/// β = 1 block with rows and columns rescaled by `w(z₁)^{±1}, w(z₂)^{±1}`;
/// Pfaffians of these blocks equal those of the unscaled ones. Points with
/// `Im z = 0` are treated as real eigenvalues.
fn b1_blocks(z1: C64, z2: C64, spec: &EnsembleSpec) -> MatrixKernelBlocks {
    let (n, tau) = (spec.n, spec.tau);
    let (l1, l2) = (ln_weight_unchecked(Beta::One, z1, tau), ln_weight_unchecked(Beta::One, z2, tau));
    let g = |a: C64, b: C64| {
        if b.im == 0.0 {
            g_real_direct(a, b.re, n, tau)
        } else {
            g_complex_scaled(a, b, n, tau)
        }
    };
    let w = match (z1.im == 0.0, z2.im == 0.0) {
        (true, true) => w_rr_scaled(z1.re, z2.re, n, tau),
        (true, false) => w_rc_scaled(z1.re, z2, n, tau).neg(),
        (false, true) => w_rc_scaled(z2.re, z1, n, tau),
        (false, false) => w_cc_scaled(z1, z2, n, tau),
    };
    MatrixKernelBlocks {
        khat: prekernel_b1_scaled(z1, z2, n, tau).scale_ln(l1 + l2).value(),
        g: g(z1, z2).scale_ln(l1 - l2).value(),
        g_swapped: g(z2, z1).scale_ln(l2 - l1).value(),
        w: w.scale_ln(-l1 - l2).value(),
        regime: Regime::FiniteN,
    }
}

/// Assembles the `2k × 2k` antisymmetric matrix from pairwise blocks.
pub fn block_matrix<F>(k: usize, mut blocks: F) -> DMatrix<C64>
where
    F: FnMut(usize, usize) -> MatrixKernelBlocks,
{
    let mut m = DMatrix::from_element(2 * k, 2 * k, C64::new(0.0, 0.0));
    for i in 0..k {
        for j in 0..k {
            let b = blocks(i, j).as_matrix();
            for a in 0..2 {
                for c in 0..2 {
                    m[(2 * i + a, 2 * j + c)] = b[a][c];
                }
            }
        }
    }
    m
}

const MAX_ORDER: usize = 6;

/// k-point correlation function `R_k` (contact terms excluded). For β = 1,
/// points on the real axis give the density with respect to `dx` there.
pub fn correlations(points: &[C64], spec: &EnsembleSpec) -> Result<f64> {
    spec.validate()?;
    let k = points.len();
    if k == 0 || k > MAX_ORDER {
        return Err(GekError::Structure(format!("correlation order must be 1..={MAX_ORDER}, got {k}")));
    }
    for z in points {
        check_point(*z)?;
    }
    let v = match spec.beta {
        Beta::Two => {
            let m = DMatrix::from_fn(k, k, |i, j| kernel_b2_scaled(points[i], points[j].conj(), spec).value());
            m.determinant()
        }
        Beta::Four => {
            let u: Vec<C64> = points.iter().map(|z| upper(*z)).collect();
            pfaffian(&block_matrix(k, |i, j| b4_blocks(u[i], u[j], spec)))?
        }
        Beta::One => pfaffian(&block_matrix(k, |i, j| b1_blocks(points[i], points[j], spec)))?,
    };
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_interval;
    use crate::specfun::{double_factorial, factorial, hermite_h};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn spec(beta: Beta, n: usize, tau: f64) -> EnsembleSpec {
        EnsembleSpec::new(beta, n, tau).unwrap()
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    /// `(τ/2)^{j/2} H_j(z/√(2τ))` straight from the physicists' polynomial.
    fn p_direct(j: usize, z: C64, tau: f64) -> C64 {
        hermite_h(j, z / (2.0 * tau).sqrt()).unwrap().value() * (tau / 2.0).powf(j as f64 / 2.0)
    }

    fn rand_point(rng: &mut ChaCha8Rng, r: f64) -> C64 {
        c(rng.random_range(-r..r), rng.random_range(-r..r))
    }

    fn area_integral(f: impl Fn(C64) -> f64, xr: f64, y0: f64, y1: f64) -> f64 {
        let s = QuadratureSpec { rel_tol: 1e-9, abs_tol: 1e-13, ..Default::default() };
        integrate_interval(
            |y| integrate_interval(|x| c(f(c(x, y)), 0.0), -xr, xr, &s).unwrap(),
            y0,
            y1,
            &s,
        )
        .unwrap()
        .re
    }

    #[test]
    fn weights() {
        assert_eq!(weight(Beta::Two, c(0.0, 0.0), 0.3).unwrap(), 1.0);
        let w = weight(Beta::Two, c(1.0, 1.0), 0.5).unwrap();
        assert!((w - (-8.0f64 / 3.0).exp()).abs() < 1e-15);
        for &x in &[-2.0, 0.3, 1.7] {
            let w1 = weight(Beta::One, c(x, 0.0), 0.4).unwrap();
            assert!((w1 - (-x * x / 2.8f64).exp()).abs() < 1e-15);
            assert!((w1 - weight(Beta::Two, c(x, 0.0), 0.4).unwrap().sqrt()).abs() < 1e-15);
        }
        assert!(weight(Beta::Two, c(0.0, 0.0), 1.0).is_err());
        assert!(weight(Beta::One, c(0.2, 7.0), 0.5).unwrap() > 0.0);
    }

    #[test]
    fn kernel_b2_single_term_and_hermite_oracle() {
        let s = spec(Beta::Two, 1, 0.3);
        let (z1, z2) = (c(0.4, -0.2), c(-0.1, 0.7));
        let want = (weight(Beta::Two, z1, 0.3).unwrap() * weight(Beta::Two, z2, 0.3).unwrap()).sqrt()
            / (PI * (1.0f64 - 0.09).sqrt());
        assert!(rel(kernel_b2(z1, z2, &s).unwrap(), c(want, 0.0)) < 1e-14);
        let s = spec(Beta::Two, 7, 0.6);
        let direct: C64 = (0..7).map(|j| p_direct(j, z1, 0.6) * p_direct(j, z2, 0.6) / factorial(j)).sum::<C64>()
            / (PI * (1.0f64 - 0.36).sqrt());
        assert!(rel(prekernel_b2(z1, z2, &s).unwrap(), direct) < 1e-12);
    }

    #[test]
    fn kernel_b2_integrates_to_n() {
        let s = spec(Beta::Two, 3, 0.5);
        let total = area_integral(|z| density_b2(z, &s).unwrap(), 10.0, -5.0, 5.0);
        assert!((total - 3.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn edge_values_do_not_overflow() {
        let s = EnsembleSpec::weak(Beta::Two, 400, 1.0).unwrap();
        let d = density_b2(s.edge_point(c(0.0, 0.3)), &s).unwrap();
        assert!(d.is_finite() && d > 0.0);
    }

    #[test]
    fn prekernel_b4_small_n_and_skew_oracle() {
        let tau = 0.35;
        let s = spec(Beta::Four, 2, tau);
        let r0 = (2.0 * PI) * (1.0f64 - tau).powf(1.5) * (1.0f64 + tau).sqrt();
        let (z1, z2) = (c(0.3, 0.8), c(-1.1, 0.2));
        assert!(rel(prekernel_b4(z1, z2, &s).unwrap(), (z1 - z2) / r0) < 1e-13);
        assert_eq!(prekernel_b4(z1, z1, &s).unwrap(), c(0.0, 0.0));
        // Skew-orthogonal polynomial form at N = 8.
        let n = 8;
        let q = |k: usize, z: C64| -> C64 {
            if k % 2 == 1 {
                p_direct(k, z, tau)
            } else {
                let h = k / 2;
                let inner: C64 = (0..=h).map(|m| p_direct(2 * m, z, tau) / double_factorial(2 * m)).sum();
                inner * (2f64.powi(h as i32) * factorial(h))
            }
        };
        let oracle: C64 = (0..n / 2)
            .map(|k| (q(2 * k + 1, z1) * q(2 * k, z2) - q(2 * k, z1) * q(2 * k + 1, z2)) / (r0 * factorial(2 * k + 1)))
            .sum();
        let v = prekernel_b4(z1, z2, &spec(Beta::Four, n, tau)).unwrap();
        assert!(rel(v, oracle) < 1e-12, "{v} vs {oracle}");
    }

    #[test]
    fn kernel_b4_small_n_and_axis() {
        let tau = 0.3;
        let s = spec(Beta::Four, 2, tau);
        let r0 = (2.0 * PI) * (1.0f64 - tau).powf(1.5) * (1.0f64 + tau).sqrt();
        let w = (-1.0 / (1.0 - tau)).exp();
        let v = kernel_b4(c(0.0, 1.0), c(0.0, -1.0), &s).unwrap();
        assert!(rel(v, c(4.0 * w / r0, 0.0)) < 1e-12);
        let s = spec(Beta::Four, 6, 0.5);
        assert_eq!(kernel_b4(c(0.7, 0.0), c(0.7, 0.0), &s).unwrap(), c(0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let z = c(rng.random_range(-3.0..3.0), rng.random_range(0.0..2.0));
            let k = kernel_b4(z, z.conj(), &s).unwrap();
            assert!(k.re >= 0.0 && k.im.abs() <= 1e-12 * (k.re + 1e-300));
        }
    }

    #[test]
    fn density_b4_integrates_to_pair_count() {
        // One point per conjugate pair: the plane integral is n/2.
        let s = spec(Beta::Four, 4, 0.3);
        let total = 2.0 * area_integral(|z| density_b4(z, &s).unwrap(), 10.0, 0.0, 5.0);
        assert!((total - 2.0).abs() < 1e-6, "{total}");
    }

    fn q1(k: usize, z: C64, tau: f64) -> C64 {
        if k % 2 == 0 {
            p_direct(k, z, tau)
        } else if k == 1 {
            p_direct(1, z, tau)
        } else {
            p_direct(k, z, tau) - p_direct(k - 2, z, tau) * (k - 1) as f64
        }
    }

    #[test]
    fn prekernel_b1_small_n_and_skew_oracle() {
        let tau = 0.45;
        let (z1, z2) = (c(0.9, -0.3), c(-0.4, 1.2));
        let d = 1.0 / (2.0 * (2.0 * PI).sqrt() * (1.0 + tau));
        assert!(rel(prekernel_b1(z1, z2, &spec(Beta::One, 2, tau)).unwrap(), (z1 - z2) * d) < 1e-13);
        let n = 10;
        let oracle: C64 = (0..n / 2)
            .map(|k| {
                (q1(2 * k + 1, z1, tau) * q1(2 * k, z2, tau) - q1(2 * k, z1, tau) * q1(2 * k + 1, z2, tau)) * d
                    / factorial(2 * k)
            })
            .sum();
        let v = prekernel_b1(z1, z2, &spec(Beta::One, n, tau)).unwrap();
        assert!(rel(v, oracle) < 1e-12, "{v} vs {oracle}");
    }

    /// Residual of `(1−τ)·K̂₁·(norm) = (z₁−z₂)K̂₂,_{N−1}·(norm) − boundary`.
    fn b1_b2_identity_residual(z1: C64, z2: C64, n: usize, tau: f64) -> f64 {
        let lhs = prekernel_b1(z1, z2, &spec(Beta::One, n, tau)).unwrap() * (2.0 * (2.0 * PI).sqrt() * (1.0 - tau * tau));
        let k2 = prekernel_b2(z1, z2, &spec(Beta::Two, n - 1, tau)).unwrap();
        let p = |j, z| p_direct(j, z, tau);
        let boundary = (p(n - 1, z1) * p(n - 2, z2) - p(n - 1, z2) * p(n - 2, z1)) * (tau / factorial(n - 2));
        let rhs = k2 * (z1 - z2) * (PI * (1.0 - tau * tau).sqrt()) - boundary;
        (lhs - rhs).norm() / lhs.norm().max(rhs.norm())
    }

    #[test]
    fn b1_b2_prekernel_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[4, 6, 8, 10] {
            for &tau in &[0.1, 0.5, 0.9] {
                for _ in 0..20 {
                    let r = (n as f64).sqrt();
                    let (z1, z2) = (rand_point(&mut rng, r), rand_point(&mut rng, r));
                    let res = b1_b2_identity_residual(z1, z2, n, tau);
                    assert!(res < 1e-10, "N={n} tau={tau}: {res}");
                }
            }
        }
    }

    #[test]
    fn i_j_closed_forms_and_quadrature() {
        let tau = 0.4;
        for &x in &[-1.3, 0.0, 0.7, 2.5] {
            let i0 = (2.0 * PI * (1.0 + tau)).sqrt() * erf_real(x / (2.0 * (1.0 + tau)).sqrt());
            assert!((i_j(x, tau, 0).unwrap() - i0).abs() < 1e-14);
            let i1 = -(2.0 * 2f64.sqrt() * (1.0 + tau) / tau.sqrt()) * (-x * x / (2.0 * (1.0 + tau))).exp();
            assert!((i_j(x, tau, 1).unwrap() - i1).abs() < 1e-13 * i1.abs());
        }
        let quad = |x: f64, tau: f64, j: usize| {
            let s = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
            let f = |t: f64| {
                let h = hermite_h(j, c(t / (2.0 * tau).sqrt(), 0.0)).unwrap().value();
                h * (-t * t / (2.0 * (1.0 + tau))).exp()
            };
            let l = 40.0;
            (integrate_interval(f, -l, x, &s).unwrap() - integrate_interval(f, x, l, &s).unwrap()).re
        };
        for &(x, tau) in &[(0.7, 0.4), (-1.3, 0.1), (2.9, 0.5), (0.05, 0.9), (-4.0, 0.25)] {
            for j in 0..=12usize {
                let v = i_j(x, tau, j).unwrap();
                let o = quad(x, tau, j);
                assert!((v - o).abs() <= 1e-8 * o.abs().max(1.0), "x={x} tau={tau} j={j}: {v} vs {o}");
            }
        }
    }

    #[test]
    fn i_j_recurrence_and_parity() {
        for &(x, tau) in &[(0.3, 0.5), (-1.7, 0.2), (2.2, 0.8)] {
            for j in 0..=30usize {
                let ij = i_j(x, tau, j).unwrap();
                let h = hermite_h(j + 1, c(x / (2.0f64 * tau).sqrt(), 0.0)).unwrap().value().re;
                let w = (-x * x / (2.0 * (1.0 + tau))).exp();
                let r = ij
                    - (2.0f64 * tau).sqrt() * (1.0 + tau) / (j + 1) as f64 * h * w
                    - tau / (2.0 * (j + 1) as f64) * i_j(x, tau, j + 2).unwrap();
                assert!(r.abs() <= 1e-10 * ij.abs().max(1e-300), "x={x} tau={tau} j={j}: {r} vs {ij}");
            }
            for j in 0..=12usize {
                let a = i_j(-x, tau, j).unwrap();
                let b = i_j(x, tau, j).unwrap() * if j % 2 == 0 { -1.0 } else { 1.0 };
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn g_real_paths_agree_and_match_definition() {
        let s = spec(Beta::One, 6, 0.5);
        let (z1, x2) = (c(0.3, 0.2), -0.1);
        let a = g_real_b1(z1, x2, &s).unwrap();
        let b = g_real_b1_via_b2(z1, x2, &s).unwrap();
        assert!(rel(a, b) < 1e-10);
        // −w(x₂)∫ sgn(x₂−t) w(t) K̂(z₁,t) dt
        let q = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-15, ..Default::default() };
        let f = |t: f64| prekernel_b1(z1, c(t, 0.0), &s).unwrap() * (-t * t / 3.0).exp();
        let def = -(integrate_interval(f, -30.0, x2, &q).unwrap() - integrate_interval(f, x2, 30.0, &q).unwrap())
            * (-x2 * x2 / 3.0).exp();
        assert!(rel(a, def) < 1e-9, "{a} vs {def}");
        for &tau in &[0.0, 0.3, 0.8] {
            let v = density_b1_real(0.0, &spec(Beta::One, 2, tau)).unwrap();
            assert!((v - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-14);
        }
        let s = spec(Beta::One, 8, 0.3);
        for i in 0..=40 {
            assert!(density_b1_real(-8.0 + 0.4 * i as f64, &s).unwrap() >= 0.0);
        }
    }

    #[test]
    fn w_rr_antisymmetric_and_matches_definition() {
        let s = spec(Beta::One, 6, 0.4);
        let (x1, x2) = (0.8, -0.5);
        let a = w_rr_b1(x1, x2, &s).unwrap();
        let b = w_rr_b1(x2, x1, &s).unwrap();
        assert!((a + b).abs() < 1e-12 * a.abs());
        let q = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-15, ..Default::default() };
        let w = |t: f64| (-t * t / 2.8).exp();
        let f = |t: f64| g_real_b1(c(t, 0.0), x2, &s).unwrap() * w(t);
        let def = (integrate_interval(f, -30.0, x1, &q).unwrap() - integrate_interval(f, x1, 30.0, &q).unwrap()) * w(x1);
        assert!((a - def.re).abs() < 1e-9 * a.abs(), "{a} vs {def}");
    }

    #[test]
    fn real_complex_coefficient_matches_definition() {
        // δ(y₁) part of W: −w(x₁)∫ dx sgn(x−x₁) w(x) G^C(x,z₂)
        let s = spec(Beta::One, 6, 0.4);
        let (x1, z2) = (0.3, c(-0.4, 0.6));
        let e = matrix_kernel_b1(c(x1, 0.0), z2, &s).unwrap();
        let q = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-15, ..Default::default() };
        let w = |t: f64| (-t * t / 2.8).exp();
        let f = |t: f64| g_complex_b1(c(t, 0.0), z2, &s).unwrap() * w(t);
        let def = -(integrate_interval(f, x1, 30.0, &q).unwrap() - integrate_interval(f, -30.0, x1, &q).unwrap()) * w(x1);
        assert!(rel(e.w_real_complex.value, def) < 1e-9, "{} vs {def}", e.w_real_complex.value);
        assert!(rel(e.w_real_complex.value, -w_rc_b1(x1, z2, &s).unwrap()) < 1e-14);
    }

    #[test]
    fn complex_elements_vanish_on_axis() {
        let s = spec(Beta::One, 6, 0.4);
        assert_eq!(g_complex_b1(c(0.3, 0.5), c(1.2, 0.0), &s).unwrap(), c(0.0, 0.0));
        let e = matrix_kernel_b1(c(0.7, 0.0), c(0.7, 0.0), &s).unwrap();
        assert_eq!(e.w_cc, c(0.0, 0.0));
        assert_eq!(e.g_real.delta, DeltaFactor::Y2);
        assert_eq!(e.w_rr.delta, DeltaFactor::Y1Y2);
    }

    #[test]
    fn b1_densities_integrate_to_n() {
        let s = spec(Beta::One, 4, 0.5);
        let q = QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-13, ..Default::default() };
        let real = integrate_interval(|x| c(density_b1_real(x, &s).unwrap(), 0.0), -12.0, 12.0, &q).unwrap().re;
        let complex = 2.0 * area_integral(|z| density_b1_complex(z, &s).unwrap(), 12.0, 0.0, 6.0);
        assert!((real + complex - 4.0).abs() < 1e-6, "{real} + {complex}");
    }

    #[test]
    fn correlations_basic() {
        let s = spec(Beta::Two, 8, 0.4);
        let (z1, z2) = (c(0.5, 0.3), c(-0.2, 0.6));
        let r1 = correlations(&[z1], &s).unwrap();
        assert!((r1 - density_b2(z1, &s).unwrap()).abs() < 1e-14);
        let r2 = correlations(&[z1, z2], &s).unwrap();
        assert!(r2 <= r1 * correlations(&[z2], &s).unwrap());
        assert!(correlations(&[z1, z1], &s).unwrap().abs() < 1e-15);
        let s4 = spec(Beta::Four, 6, 0.4);
        assert!((correlations(&[z1], &s4).unwrap() - density_b4(z1, &s4).unwrap()).abs() < 1e-14);
        assert!((correlations(&[z1.conj()], &s4).unwrap() - density_b4(z1, &s4).unwrap()).abs() < 1e-14);
        let s1 = spec(Beta::One, 6, 0.4);
        assert!((correlations(&[z1], &s1).unwrap() - density_b1_complex(z1, &s1).unwrap()).abs() < 1e-14);
        assert!((correlations(&[c(0.4, 0.0)], &s1).unwrap() - density_b1_real(0.4, &s1).unwrap()).abs() < 1e-14);
        assert!(correlations(&[], &s).is_err());
    }

    #[test]
    fn correlations_are_real_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for beta in [Beta::One, Beta::Four] {
            let s = spec(beta, 6, 0.5);
            for _ in 0..10 {
                let pts: Vec<C64> = (0..3).map(|_| rand_point(&mut rng, 2.0)).collect();
                let u = if beta == Beta::Four { pts.iter().map(|z| upper(*z)).collect() } else { pts.clone() };
                let m = if beta == Beta::Four {
                    block_matrix(3, |i, j| b4_blocks(u[i], u[j], &s))
                } else {
                    block_matrix(3, |i, j| b1_blocks(pts[i], pts[j], &s))
                };
                let pf = pfaffian(&m).unwrap();
                assert!(pf.im.abs() <= 1e-10 * pf.norm().max(1e-300), "{beta:?}: {pf}");
            }
        }
        // A real/complex mixed pair is still real.
        let s = spec(Beta::One, 6, 0.5);
        let m = block_matrix(2, |i, j| {
            let p = [c(0.3, 0.0), c(-0.5, 0.8)];
            b1_blocks(p[i], p[j], &s)
        });
        let pf = pfaffian(&m).unwrap();
        assert!(pf.im.abs() <= 1e-10 * pf.norm());
    }

    #[test]
    fn b4_blocks_pfaffian_and_conjugation() {
        let s = spec(Beta::Four, 6, 0.4);
        let z = c(0.4, 0.7);
        let b = matrix_kernel_b4(z, z, &s).unwrap();
        assert_eq!(b.khat, c(0.0, 0.0));
        let m = block_matrix(1, |_, _| b);
        assert!(rel(pfaffian(&m).unwrap(), kernel_b4(z, z.conj(), &s).unwrap()) < 1e-14);
        let (z1, z2) = (c(0.2, 0.5), c(-0.6, 1.1));
        let a = matrix_kernel_b4(z1, z2, &s).unwrap();
        let conj = b4_blocks(z1.conj(), z2.conj(), &s);
        assert!(rel(a.khat, -conj.w) < 1e-14);
        assert!(matrix_kernel_b4(z1.conj(), z2, &s).is_err());
    }

    #[test]
    fn phase_extraction_leaves_r2_invariant() {
        let s = spec(Beta::Two, 10, 0.6);
        let pts = [c(0.5, 0.3), c(-0.2, 0.6)];
        let phases = [0.7, -1.9];
        let m = DMatrix::from_fn(2, 2, |i, j| kernel_b2(pts[i], pts[j].conj(), &s).unwrap());
        let mp = DMatrix::from_fn(2, 2, |i, j| m[(i, j)] * C64::from_polar(1.0, phases[i] - phases[j]));
        let (a, b) = (m.determinant(), mp.determinant());
        assert!((a - b).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn spec_validation() {
        assert!(EnsembleSpec::new(Beta::One, 5, 0.3).is_err());
        assert!(EnsembleSpec::new(Beta::Two, 5, 0.3).is_ok());
        assert!(EnsembleSpec::new(Beta::Four, 4, 1.0).is_err());
        assert!(prekernel_b1(c(0.0, 0.0), c(1.0, 0.0), &spec(Beta::Two, 4, 0.3)).is_err());
        assert!(Beta::from_index(3).is_err());
        assert!((weak_tau(1000, 1.0).unwrap() - 0.9).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn prekernels_antisymmetric(x1 in -3.0f64..3.0, y1 in -2.0f64..2.0, x2 in -3.0f64..3.0, y2 in -2.0f64..2.0, tau in 0.0f64..0.95) {
            let (z1, z2) = (c(x1, y1), c(x2, y2));
            for (beta, f) in [(Beta::One, prekernel_b1 as fn(C64, C64, &EnsembleSpec) -> Result<C64>), (Beta::Four, prekernel_b4)] {
                let s = spec(beta, 8, tau);
                let a = f(z1, z2, &s).unwrap();
                let b = f(z2, z1, &s).unwrap();
                prop_assert!((a + b).norm() <= 1e-12 * a.norm().max(1e-300));
                let m = f(-z1, -z2, &s).unwrap();
                prop_assert!((m + a).norm() <= 1e-12 * a.norm().max(1e-300));
            }
        }

        #[test]
        fn kernel_b2_symmetries(x1 in -3.0f64..3.0, y1 in -2.0f64..2.0, x2 in -3.0f64..3.0, y2 in -2.0f64..2.0, tau in 0.0f64..0.95) {
            let s = spec(Beta::Two, 9, tau);
            let (z1, z2) = (c(x1, y1), c(x2, y2));
            let k = kernel_b2(z1, z2, &s).unwrap();
            prop_assert!(rel(kernel_b2(z2, z1, &s).unwrap(), k) < 1e-13);
            prop_assert!(rel(kernel_b2(-z1, -z2, &s).unwrap(), k) < 1e-12);
            prop_assert!(rel(kernel_b2(z1.conj(), z2.conj(), &s).unwrap(), k.conj()) < 1e-13);
        }

        #[test]
        fn g_real_paths_agree(x1 in -3.0f64..3.0, y1 in -1.5f64..1.5, x2 in -3.0f64..3.0, tau in 0.05f64..0.9, half in 2usize..6) {
            let s = spec(Beta::One, 2 * half, tau);
            let a = g_real_b1(c(x1, y1), x2, &s).unwrap();
            let b = g_real_b1_via_b2(c(x1, y1), x2, &s).unwrap();
            prop_assert!(rel(a, b) < 1e-10, "{} vs {}", a, b);
        }
    }
}
