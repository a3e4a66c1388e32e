//! Named check suites with measured residuals.

use gek_core::finite_n::*;
use gek_core::limits::*;
use gek_core::quad::{integrate_interval, QuadratureSpec};
use gek_core::specfun::{airy_ai, hermite_h, monic_hermite_sequence, pfaffian};
use gek_core::{Complex64 as C64, Result};
use nalgebra::DMatrix;
use std::cell::RefCell;
use std::f64::consts::PI;

/// Check suite names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Identities,
    Hermitian,
    Strong,
    Bulk,
    Poisson,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Hermitian => "hermitian",
            Suite::Strong => "strong",
            Suite::Bulk => "bulk",
            Suite::Poisson => "poisson",
            Suite::All => "all",
        }
    }
}

/// One measured check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn below(suite: &'static str, name: impl Into<String>, value: f64, tolerance: f64) -> CheckResult {
    CheckResult { suite, name: name.into(), value, tolerance, pass: value <= tolerance }
}

/// Deterministic pseudo-random points on `[-r, r]²`.
fn probe_points(count: usize, r: f64, salt: u64) -> Vec<C64> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64 ^ salt;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    (0..count).map(|_| c(r * next(), r * next())).collect()
}

fn identities() -> Result<Vec<CheckResult>> {
    const S: &str = "identities";
    let mut out = Vec::new();
    for &n in &[4usize, 6, 8, 10] {
        for &tau in &[0.1, 0.5, 0.9] {
            let s1 = EnsembleSpec::new(Beta::One, n, tau)?;
            let s2 = EnsembleSpec::new(Beta::Two, n - 1, tau)?;
            let pts = probe_points(10, (n as f64).sqrt(), (n as u64) * 31 + (tau * 10.0) as u64);
            let (mut pre, mut g): (f64, f64) = (0.0, 0.0);
            for w in pts.windows(2) {
                let (z1, z2) = (w[0], w[1]);
                let p1 = monic_hermite_sequence(n, z1, tau);
                let p2 = monic_hermite_sequence(n, z2, tau);
                let fact: f64 = (1..=n - 2).map(|k| k as f64).product();
                let boundary = (p1[n - 1].value() * p2[n - 2].value() - p2[n - 1].value() * p1[n - 2].value()) * (tau / fact);
                let lhs = prekernel_b1(z1, z2, &s1)? * (2.0 * (2.0 * PI).sqrt() * (1.0 - tau * tau));
                let rhs = prekernel_b2(z1, z2, &s2)? * (z1 - z2) * (PI * (1.0 - tau * tau).sqrt()) - boundary;
                pre = pre.max(rel(lhs, rhs));
                g = g.max(rel(g_real_b1(z1, z2.re, &s1)?, g_real_b1_via_b2(z1, z2.re, &s1)?));
            }
            out.push(below(S, format!("prekernel_b1_vs_b2 N={n} tau={tau}"), pre, 1e-10));
            out.push(below(S, format!("g_real_vs_kernel_b2 N={n} tau={tau}"), g, 1e-10));
        }
    }
    for &(x, tau) in &[(-1.3, 0.4), (0.7, 0.5), (2.5, 0.9)] {
        let w1 = weight(Beta::One, c(x, 0.0), tau)?;
        let mut worst: f64 = 0.0;
        for j in 0..=30 {
            let h = hermite_h(j + 1, c(x / (2.0 * tau).sqrt(), 0.0))?.value().re;
            let rhs = (2.0 * tau).sqrt() * (1.0 + tau) / (j + 1) as f64 * h * w1 + tau / (2.0 * (j + 1) as f64) * i_j(x, tau, j + 2)?;
            let lhs = i_j(x, tau, j)?;
            worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300));
        }
        out.push(below(S, format!("i_j_recurrence x={x} tau={tau}"), worst, 1e-10));
    }
    let mut pf: f64 = 0.0;
    for (k, n) in (2..=12).step_by(2).enumerate() {
        let vals = probe_points(n * n, 1.0, 700 + k as u64);
        let mut m = DMatrix::from_element(n, n, c(0.0, 0.0));
        for i in 0..n {
            for j in i + 1..n {
                m[(i, j)] = vals[i * n + j];
                m[(j, i)] = -vals[i * n + j];
            }
        }
        let p = pfaffian(&m)?;
        pf = pf.max(rel(p * p, m.determinant()));
    }
    out.push(below(S, "pfaffian_squared_vs_det", pf, 1e-10));
    Ok(out)
}

fn ridge(x: f64, s: f64, f: &dyn Fn(C64) -> Result<f64>, q: &QuadratureSpec) -> Result<f64> {
    let half = |sign: f64| -> Result<f64> {
        let err = RefCell::new(None);
        let g = |y: f64| {
            f(c(x, sign * y)).map(|v| c(v, 0.0)).unwrap_or_else(|e| {
                err.borrow_mut().get_or_insert(e);
                c(0.0, 0.0)
            })
        };
        let v = integrate_interval(g, 0.0, 12.0 * s, q)?;
        err.into_inner().map_or(Ok(v.re), Err)
    };
    Ok(half(1.0)? + half(-1.0)?)
}

/// Adds σ-sweep rows; each row passes if its error is below the previous
/// one, and the last must also be under `final_tol`.
fn sweep(out: &mut Vec<CheckResult>, suite: &'static str, name: &str, sigmas: &[f64], errs: &[f64], final_tol: f64) {
    for (k, (&s, &e)) in sigmas.iter().zip(errs).enumerate() {
        let monotone = k == 0 || e < errs[k - 1];
        let last = k + 1 == errs.len();
        let tol = if last { final_tol } else { f64::INFINITY };
        out.push(CheckResult { suite, name: format!("{name} sigma={s}"), value: e, tolerance: tol, pass: monotone && e <= tol });
    }
}

fn hermitian(q: &QuadratureSpec) -> Result<Vec<CheckResult>> {
    const S: &str = "hermitian";
    let mut out = Vec::new();
    let sigmas = [0.4, 0.2, 0.1, 0.05];
    let xs = [-1.0, 0.0, 1.0];
    let (mut e1, mut e2, mut e4) = (Vec::new(), Vec::new(), Vec::new());
    for &s in &sigmas {
        let (mut a, mut b, mut d): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for &x in &xs {
            let kh = hermitian_airy_kernel(x, x)?;
            let tail = airy_tail_integral(x, q)?;
            let ai = airy_ai(c(x, 0.0))?.re;
            a = a.max((density_ai_b1_real(x, s, q)? / (kh + 0.5 * ai * (1.0 - tail)) - 1.0).abs());
            b = b.max((ridge(x, s, &|z| density_ai_b2(z, s, q), q)? / kh - 1.0).abs());
            d = d.max((ridge(x, s, &|z| density_ai_b4(z, s, q), q)? / (0.5 * kh - 0.25 * ai * tail) - 1.0).abs());
        }
        e1.push(a);
        e2.push(b);
        e4.push(d);
    }
    sweep(&mut out, S, "beta1_real_density", &sigmas, &e1, 0.01);
    sweep(&mut out, S, "beta2_ridge_density", &sigmas, &e2, 0.01);
    sweep(&mut out, S, "beta4_ridge_density", &sigmas, &e4, 0.01);
    let (mut swap, mut deriv): (f64, f64) = (0.0, 0.0);
    let mut zero: f64 = 0.0;
    for &(x1, x2) in &[(-1.0, 0.5), (0.3, -0.8), (1.2, 0.0)] {
        let t = hermitian_elements_b4(x1, x2, q)?;
        swap = swap.max((t.t2 - hermitian_elements_b4(x2, x1, q)?.t3).abs());
        let h = 1e-4;
        let fd = (hermitian_elements_b4(x1, x2 + h, q)?.t2 - hermitian_elements_b4(x1, x2 - h, q)?.t2) / (2.0 * h);
        deriv = deriv.max((t.t4 - fd).abs());
        let e = hermitian_elements_b1(x1, x2, q)?;
        zero = zero.max(e.g_complex.abs()).max(e.w_real_complex.abs()).max(e.w_cc.abs());
    }
    out.push(below(S, "t2_swap_equals_t3", swap, 1e-6));
    out.push(below(S, "t4_is_x2_derivative_of_t2", deriv, 1e-6));
    out.push(below(S, "complex_elements_vanish", zero, 0.0));
    Ok(out)
}

fn strong(q: &QuadratureSpec) -> Result<Vec<CheckResult>> {
    const S: &str = "strong";
    let mut out = Vec::new();
    let sigmas = [3.0, 6.0, 12.0];
    let pts = [c(0.3, 0.2), c(-0.3, 0.25), c(0.1, -0.2), c(-0.4, -0.3)];
    for beta in [Beta::Two, Beta::Four, Beta::One] {
        let mut errs = Vec::new();
        for &s in &sigmas {
            let mut worst: f64 = 0.0;
            for &a in &pts {
                for &b in &pts {
                    let (num, want) = match beta {
                        Beta::Two => (kernel_ai_b2(a * s, b * s, s, q)?, strong_edge_kernel_b2(a, b)?),
                        Beta::Four => (kernel_ai_b4(a * s, b * s, s, q)?, strong_edge_kernel_b4(a, b, q)?),
                        Beta::One => (prekernel_ai_b1(a * s, b * s, s, q)?, strong_edge_prekernel_b1(a, b)?),
                    };
                    if want.norm() > 0.0 {
                        worst = worst.max((num * (2.0 * s * s) - want).norm() / want.norm());
                    }
                }
            }
            errs.push(worst);
        }
        sweep(&mut out, S, &format!("beta{}_kernel", beta.index()), &sigmas, &errs, 0.02);
    }
    let mut uni: f64 = 0.0;
    for &x in &[-1.0, -0.5, 0.0, 0.3, 0.8] {
        let (z1, z2) = (c(x, 5.0), c(x, -5.0));
        let ratio = strong_edge_kernel_b4(z1, z2, q)? * (4.0 * 5.0 / 10.0) / strong_edge_kernel_b2(z1, z2)?;
        uni = uni.max((ratio - 1.0).norm());
    }
    out.push(below(S, "beta4_universality_at_Y=5", uni, 0.05));
    Ok(out)
}

fn bulk(q: &QuadratureSpec) -> Result<Vec<CheckResult>> {
    const S: &str = "bulk";
    let mut out = Vec::new();
    let s = 0.1;
    let k = bulk_sine_kernel(c(0.2, 0.0), c(0.2, 0.0), s, q)?;
    out.push(below(S, "hermitian_normalization_sigma=0.1", (k.re * s * PI.powf(1.5) - 1.0).abs(), 0.01));
    let (a, b, shift) = (c(0.3, 0.1), c(-0.5, 0.2), c(1.7, 0.0));
    let t = rel(bulk_sine_kernel(a, b, 1.0, q)?, bulk_sine_kernel(a + shift, b + shift, 1.0, q)?);
    out.push(below(S, "translation_invariance", t, 1e-12));
    out.push(below(S, "real_on_axis", bulk_sine_kernel(c(0.4, 0.0), c(-1.0, 0.0), 0.7, q)?.im.abs(), 0.0));
    let mut closed: f64 = 0.0;
    for &(w, s) in &[(c(0.8, 0.0), 0.7), (c(3.0, 0.5), 1.3)] {
        let tight = QuadratureSpec { rel_tol: 1e-13, abs_tol: 1e-15, ..*q };
        let i = integrate_interval(|u| (u * w).cos() * (2.0 * (-s * s * u * u).exp()), 0.0, 1.0, &tight)?;
        closed = closed.max(rel(bulk_sine_integral_closed(w, s)?, i));
    }
    out.push(below(S, "closed_form_vs_quadrature", closed, 1e-10));
    Ok(out)
}

fn poisson() -> Result<Vec<CheckResult>> {
    const S: &str = "poisson";
    let mut out = Vec::new();
    let off = poisson_kernel(Beta::Two, c(0.3, 0.7), c(-0.4, -0.6))?;
    out.push(below(S, "zero_when_y1_ne_minus_y2", off.norm(), 0.0));
    let (z1, z2) = (c(0.3, 0.7), c(-0.4, -0.7));
    let m2 = poisson_kernel(Beta::Two, z1, z2)?;
    let f = |z: C64| (-(z.re + z.im * z.im) / 2.0).exp();
    out.push(below(S, "factorization", rel(m2, c(f(z1) * f(z2) / PI.sqrt(), 0.0)), 1e-14));
    out.push(below(S, "beta4_is_half_beta2", rel(poisson_kernel(Beta::Four, z1, z2)?, m2 * 0.5), 1e-14));
    out.push(below(S, "beta1_is_i_sgn_half_beta2", rel(poisson_kernel(Beta::One, z1, z2)?, m2 * c(0.0, 0.5)), 1e-14));
    Ok(out)
}

pub fn run_suite(suite: Suite, q: &QuadratureSpec) -> Result<Vec<CheckResult>> {
    Ok(match suite {
        Suite::Identities => identities()?,
        Suite::Hermitian => hermitian(q)?,
        Suite::Strong => strong(q)?,
        Suite::Bulk => bulk(q)?,
        Suite::Poisson => poisson()?,
        Suite::All => {
            let mut v = identities()?;
            v.extend(hermitian(q)?);
            v.extend(strong(q)?);
            v.extend(bulk(q)?);
            v.extend(poisson()?);
            v
        }
    })
}
