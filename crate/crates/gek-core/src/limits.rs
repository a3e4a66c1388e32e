//! Edge-scaling limits: the interpolating Airy (matrix-)kernels, their
//! Hermitian σ→0 reductions, the strongly non-Hermitian erfc kernels, the
//! Poisson kernels near the largest real part, and the bulk sine kernel.
//!
//! Every interpolating kernel is evaluated through the deformed Airy function
//! `Aid(Z,σ) = e^{σ⁶/12+σ²Z/2} Ai(Z+σ⁴/4)`, which absorbs the huge exponential
//! prefactors so the integrands stay in range up to [`SIGMA_MAX`].

use crate::error::{GekError, Result};
use crate::finite_n::{
    block_matrix, check_point, finite, sgn, upper, B1Elements, Beta, DeltaFactor, DeltaTerm, MatrixKernelBlocks,
    Regime,
};
use crate::quad::{
    deformed_nested_integral, deformed_product_integral, deformed_single_integral, integrate_interval,
    semiinfinite_integral, QuadratureSpec,
};
use crate::specfun::{airy_pair, deformed_airy, erf, erfc, erfc_real, pfaffian};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::{PI, SQRT_2};
use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

/// Largest σ accepted by the interpolating kernels.
pub const SIGMA_MAX: f64 = 16.0;

const CONFLUENT_GAP: f64 = 1e-3;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Which limiting regime a kernel evaluation belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LimitRegime {
    Interpolating,
    Hermitian,
    StrongEdge,
    Poisson,
    Bulk,
}

impl LimitRegime {
    pub const ALL: [LimitRegime; 5] =
        [Self::Interpolating, Self::Hermitian, Self::StrongEdge, Self::Poisson, Self::Bulk];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Interpolating => "interpolating",
            Self::Hermitian => "hermitian",
            Self::StrongEdge => "strong_edge",
            Self::Poisson => "poisson",
            Self::Bulk => "bulk",
        }
    }
}

impl fmt::Display for LimitRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LimitRegime {
    type Err = GekError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interpolating" | "limit" => Ok(Self::Interpolating),
            "hermitian" => Ok(Self::Hermitian),
            "strong_edge" | "strong" => Ok(Self::StrongEdge),
            "poisson" => Ok(Self::Poisson),
            "bulk" => Ok(Self::Bulk),
            _ => Err(GekError::Usage(format!("unknown limit regime '{s}'"))),
        }
    }
}

/// Edge coordinate `Z = X + iY` together with the weak non-Hermiticity σ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MicroscopicPoint {
    pub z: C64,
    pub sigma: f64,
}

impl MicroscopicPoint {
    /// `sigma = 0` is allowed and marks a Hermitian-limit point.
    pub fn new(z: C64, sigma: f64) -> Result<Self> {
        check_point(z)?;
        if !(0.0..=SIGMA_MAX).contains(&sigma) {
            return Err(GekError::Domain(format!("sigma must lie in [0, {SIGMA_MAX}], got {sigma}")));
        }
        Ok(Self { z, sigma })
    }

    pub fn x(&self) -> f64 {
        self.z.re
    }

    pub fn y(&self) -> f64 {
        self.z.im
    }

    pub fn is_hermitian(&self) -> bool {
        self.sigma == 0.0
    }
}

/// Runs a quadrature over a fallible integrand, surfacing the first error.
fn fallible<F, Q>(f: F, quad: Q) -> Result<C64>
where
    F: Fn(f64) -> Result<C64>,
    Q: FnOnce(&dyn Fn(f64) -> C64) -> Result<C64>,
{
    let err = RefCell::new(None);
    let g = |t: f64| {
        f(t).unwrap_or_else(|e| {
            err.borrow_mut().get_or_insert(e);
            C64::default()
        })
    };
    let v = quad(&g)?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma <= SIGMA_MAX {
        Ok(())
    } else {
        Err(GekError::Domain(format!("sigma must lie in (0, {SIGMA_MAX}], got {sigma}")))
    }
}

fn check_all(zs: &[C64], sigma: f64) -> Result<()> {
    check_sigma(sigma)?;
    zs.iter().try_for_each(|z| check_point(*z))
}

fn gauss_y(y1: f64, y2: f64, sigma: f64) -> f64 {
    (-(y1 * y1 + y2 * y2) / (2.0 * sigma * sigma)).exp()
}

fn sqrt_erfc_y(y: f64, sigma: f64) -> f64 {
    erfc_real(y.abs() / sigma).sqrt()
}

// ---------------------------------------------------------------------------
// β = 2

/// Interpolating Airy kernel `K_Ai^{(2)}(Z₁,Z₂)`.
pub fn kernel_ai_b2(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    check_all(&[z1, z2], sigma)?;
    let i = deformed_product_integral(z1, z2, sigma, false, q)?;
    finite(i * (gauss_y(z1.im, z2.im, sigma) / (sigma * PI.sqrt())), "kernel_ai_b2")
}

/// Microscopic density `K_Ai^{(2)}(Z,Z*)`.
pub fn density_ai_b2(z: C64, sigma: f64, q: &QuadratureSpec) -> Result<f64> {
    kernel_ai_b2(z, z.conj(), sigma, q).map(|v| v.re)
}

// ---------------------------------------------------------------------------
// β = 4

/// Interpolating kernel `K_Ai^{(4)}(Z₁,Z₂)`; antisymmetric, zero on the axis.
pub fn kernel_ai_b4(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    check_all(&[z1, z2], sigma)?;
    kernel_ai_b4_unchecked(z1, z2, sigma, q)
}

fn kernel_ai_b4_unchecked(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    let amp = (z1.im * z2.im).abs().sqrt();
    if amp == 0.0 || z1 == z2 {
        return Ok(c(0.0, 0.0));
    }
    let d = deformed_nested_integral(z1, z2, sigma, q)? - deformed_nested_integral(z2, z1, sigma, q)?;
    let pre = amp * gauss_y(z1.im, z2.im, sigma) / (4.0 * PI.sqrt() * sigma.powi(3));
    finite(d * c(0.0, -pre), "kernel_ai_b4")
}

/// Density `K_Ai^{(4)}(Z,Z*)` taken at the upper-half representative, so it
/// is even in `Y`.
pub fn density_ai_b4(z: C64, sigma: f64, q: &QuadratureSpec) -> Result<f64> {
    let u = upper(z);
    kernel_ai_b4(u, u.conj(), sigma, q).map(|v| v.re)
}

/// Blocks `[[K(z₁,z₂), K(z₁,z₂*)], [K(z₁*,z₂), K(z₁*,z₂*)]]` in the shared
/// `[[K̂, −G], [G, −W]]` layout. Both points must have `Im ≥ 0`.
pub fn matrix_kernel_ai_b4(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<MatrixKernelBlocks> {
    check_all(&[z1, z2], sigma)?;
    if z1.im < 0.0 || z2.im < 0.0 {
        return Err(GekError::Domain("matrix_kernel_ai_b4 needs Im Z >= 0 for both points".into()));
    }
    let k = |a, b| kernel_ai_b4_unchecked(a, b, sigma, q);
    Ok(MatrixKernelBlocks {
        khat: k(z1, z2)?,
        g: -k(z1, z2.conj())?,
        g_swapped: k(z1.conj(), z2)?,
        w: -k(z1.conj(), z2.conj())?,
        regime: Regime::Limit,
    })
}

// ---------------------------------------------------------------------------
// β = 1

/// Weight-adjusted pre-kernel `K̂_Ai^{(1)}(Z₁,Z₂)`.
pub fn prekernel_ai_b1(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    check_all(&[z1, z2], sigma)?;
    prekernel_ai_b1_unchecked(z1, z2, sigma, q)
}

fn prekernel_ai_b1_unchecked(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    let e = sqrt_erfc_y(z1.im, sigma) * sqrt_erfc_y(z2.im, sigma);
    if z1 == z2 || e == 0.0 {
        return Ok(c(0.0, 0.0));
    }
    let i = deformed_product_integral(z1, z2, sigma, true, q)?;
    finite((z1 - z2) * i * (e / (4.0 * sigma * sigma)), "prekernel_ai_b1")
}

/// The three pieces with `−G_Ai^R(Z₁,X₂) = U₁ + U₂ + U₃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UTerms {
    pub u1: C64,
    /// Depends on `Z₁` only.
    pub u2: C64,
    pub u3: C64,
}

impl UTerms {
    pub fn sum(&self) -> C64 {
        self.u1 + self.u2 + self.u3
    }
}

/// `∫₀^∞ Aid(X+t,σ) dt`, written `B(X)` below.
fn b_term(x: f64, sigma: f64, q: &QuadratureSpec) -> Result<f64> {
    deformed_single_integral(c(x, 0.0), sigma, q).map(|v| v.re)
}

/// `A(X₁,X₂) = ∫₀^∞ds Aid(X₁+s) ∫₀^s dt Aid(X₂+t)`.
fn a_term(x1: f64, x2: f64, sigma: f64, q: &QuadratureSpec) -> Result<f64> {
    deformed_nested_integral(c(x2, 0.0), c(x1, 0.0), sigma, q).map(|v| v.re)
}

pub fn g_ai_real_parts(z1: C64, x2: f64, sigma: f64, q: &QuadratureSpec) -> Result<UTerms> {
    check_all(&[z1, c(x2, 0.0)], sigma)?;
    g_parts_unchecked(z1, x2, sigma, q)
}

fn g_parts_unchecked(z1: C64, x2: f64, sigma: f64, q: &QuadratureSpec) -> Result<UTerms> {
    let e = sqrt_erfc_y(z1.im, sigma);
    if e == 0.0 {
        let zero = c(0.0, 0.0);
        return Ok(UTerms { u1: zero, u2: zero, u3: zero });
    }
    let u1 = deformed_product_integral(z1, c(x2, 0.0), sigma, false, q)? * e;
    let u2 = deformed_airy(z1, sigma)? * (0.5 * e);
    let u3 = -u2 * b_term(x2, sigma, q)?;
    Ok(UTerms { u1, u2, u3 })
}

/// `G_Ai^R(Z₁,X₂)`, the coefficient of `δ(Y₂)` in `G_Ai`.
pub fn g_ai_real_b1(z1: C64, x2: f64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    g_ai_real_parts(z1, x2, sigma, q).map(|u| -u.sum())
}

/// Density of real eigenvalues `−G_Ai^R(X,X)`, per unit length.
pub fn density_ai_b1_real(x: f64, sigma: f64, q: &QuadratureSpec) -> Result<f64> {
    g_ai_real_parts(c(x, 0.0), x, sigma, q).map(|u| u.sum().re)
}

/// `G_Ai^C(Z₁,Z₂) = 2i sgn(Y₂) K̂_Ai(Z₁,Z₂*)`.
pub fn g_ai_complex_b1(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    check_all(&[z1, z2], sigma)?;
    g_complex_unchecked(z1, z2, sigma, q)
}

fn g_complex_unchecked(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    let s = sgn(z2.im);
    if s == 0.0 {
        return Ok(c(0.0, 0.0));
    }
    Ok(prekernel_ai_b1_unchecked(z1, z2.conj(), sigma, q)? * c(0.0, 2.0 * s))
}

/// Density of complex eigenvalues `−2i sgn(Y) K̂_Ai(Z,Z*)`; zero on the axis.
pub fn density_ai_b1_complex(z: C64, sigma: f64, q: &QuadratureSpec) -> Result<f64> {
    g_ai_complex_b1(z, z, sigma, q).map(|g| -g.re)
}

/// `W_Ai^{RR}(X₁,X₂) = A(X₁,X₂) − A(X₂,X₁) + B(X₁) − B(X₂)`.
pub fn w_ai_rr_b1(x1: f64, x2: f64, sigma: f64, q: &QuadratureSpec) -> Result<f64> {
    check_all(&[c(x1, 0.0), c(x2, 0.0)], sigma)?;
    w_rr_unchecked(x1, x2, sigma, q)
}

fn w_rr_unchecked(x1: f64, x2: f64, sigma: f64, q: &QuadratureSpec) -> Result<f64> {
    if x1 == x2 {
        return Ok(0.0);
    }
    Ok(a_term(x1, x2, sigma, q)? - a_term(x2, x1, sigma, q)? + b_term(x1, sigma, q)? - b_term(x2, sigma, q)?)
}

/// `W_Ai^{RC}(X₁,Z₂) = 2i sgn(Y₂) G_Ai^R(Z₂*,X₁)`, the coefficient of `δ(Y₁)` in `W_Ai`.
pub fn w_ai_rc_b1(x1: f64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    check_all(&[c(x1, 0.0), z2], sigma)?;
    w_rc_unchecked(x1, z2, sigma, q)
}

fn w_rc_unchecked(x1: f64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    let s = sgn(z2.im);
    if s == 0.0 {
        return Ok(c(0.0, 0.0));
    }
    Ok(-g_parts_unchecked(z2.conj(), x1, sigma, q)?.sum() * c(0.0, 2.0 * s))
}

/// `W_Ai^{CC}(Z₁,Z₂) = 4 sgn(Y₁) sgn(Y₂) K̂_Ai(Z₁*,Z₂*)`.
pub fn w_ai_cc_b1(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    check_all(&[z1, z2], sigma)?;
    w_cc_unchecked(z1, z2, sigma, q)
}

fn w_cc_unchecked(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    let s = sgn(z1.im) * sgn(z2.im);
    if s == 0.0 {
        return Ok(c(0.0, 0.0));
    }
    Ok(prekernel_ai_b1_unchecked(z1.conj(), z2.conj(), sigma, q)? * (4.0 * s))
}

fn contact_terms(z1: C64, z2: C64) -> [DeltaTerm; 2] {
    [
        DeltaTerm { value: c(0.0, 2.0 * sgn(z1.im)), delta: DeltaFactor::Conjugate },
        DeltaTerm { value: c(sgn(z2.re - z1.re), 0.0), delta: DeltaFactor::Y1Y2 },
    ]
}

/// All weight-adjusted β = 1 limit elements at `(Z₁, Z₂)`.
pub fn matrix_kernel_ai_b1(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<B1Elements> {
    check_all(&[z1, z2], sigma)?;
    Ok(B1Elements {
        khat: prekernel_ai_b1_unchecked(z1, z2, sigma, q)?,
        g_real: DeltaTerm { value: -g_parts_unchecked(z1, z2.re, sigma, q)?.sum(), delta: DeltaFactor::Y2 },
        g_complex: g_complex_unchecked(z1, z2, sigma, q)?,
        w_rr: DeltaTerm { value: c(w_rr_unchecked(z1.re, z2.re, sigma, q)?, 0.0), delta: DeltaFactor::Y1Y2 },
        w_real_complex: DeltaTerm { value: w_rc_unchecked(z1.re, z2, sigma, q)?, delta: DeltaFactor::Y1 },
        w_complex_real: DeltaTerm { value: -w_rc_unchecked(z2.re, z1, sigma, q)?, delta: DeltaFactor::Y2 },
        w_cc: w_cc_unchecked(z1, z2, sigma, q)?,
        contact: contact_terms(z1, z2),
    })
}

/// Pfaffian block for one point pair: real points (`Y = 0`) pick the
/// `δ`-coefficients, complex points the smooth parts.
pub(crate) fn b1_blocks_from(e: &B1Elements, e_swapped: &B1Elements, z1: C64, z2: C64, regime: Regime) -> MatrixKernelBlocks {
    let g = |el: &B1Elements, b: C64| if b.im == 0.0 { el.g_real.value } else { el.g_complex };
    let w = match (z1.im == 0.0, z2.im == 0.0) {
        (true, true) => e.w_rr.value,
        (true, false) => e.w_real_complex.value,
        (false, true) => e.w_complex_real.value,
        (false, false) => e.w_cc,
    };
    MatrixKernelBlocks { khat: e.khat, g: g(e, z2), g_swapped: g(e_swapped, z1), w, regime }
}

const MAX_ORDER: usize = 6;

/// Limiting k-point correlation `R_{k,Ai}` at σ (contact terms excluded).
pub fn correlations_ai(beta: Beta, points: &[C64], sigma: f64, q: &QuadratureSpec) -> Result<f64> {
    check_all(points, sigma)?;
    let k = points.len();
    if k == 0 || k > MAX_ORDER {
        return Err(GekError::Structure(format!("correlation order must be 1..={MAX_ORDER}, got {k}")));
    }
    let mut err = None;
    let mut record = |r: Result<MatrixKernelBlocks>| {
        r.unwrap_or_else(|e| {
            err.get_or_insert(e);
            MatrixKernelBlocks { khat: c(0.0, 0.0), g: c(0.0, 0.0), g_swapped: c(0.0, 0.0), w: c(0.0, 0.0), regime: Regime::Limit }
        })
    };
    let v = match beta {
        Beta::Two => {
            let mut m = DMatrix::from_element(k, k, c(0.0, 0.0));
            for i in 0..k {
                for j in 0..k {
                    m[(i, j)] = kernel_ai_b2(points[i], points[j].conj(), sigma, q)?;
                }
            }
            m.determinant()
        }
        Beta::Four => {
            let u: Vec<C64> = points.iter().map(|z| upper(*z)).collect();
            let m = block_matrix(k, |i, j| record(matrix_kernel_ai_b4(u[i], u[j], sigma, q)));
            if let Some(e) = err {
                return Err(e);
            }
            pfaffian(&m)?
        }
        Beta::One => {
            let m = block_matrix(k, |i, j| {
                let (a, b) = (points[i], points[j]);
                record(matrix_kernel_ai_b1(a, b, sigma, q).and_then(|e| {
                    let es = matrix_kernel_ai_b1(b, a, sigma, q)?;
                    Ok(b1_blocks_from(&e, &es, a, b, Regime::Limit))
                }))
            });
            if let Some(e) = err {
                return Err(e);
            }
            pfaffian(&m)?
        }
    };
    Ok(v.re)
}

// ---------------------------------------------------------------------------
// Hermitian limit σ → 0

fn ai(x: f64) -> Result<(f64, f64)> {
    let (a, d) = airy_pair(c(x, 0.0))?;
    Ok((a.re, d.re))
}

/// Airy kernel `(Ai(X₁)Ai'(X₂) − Ai'(X₁)Ai(X₂))/(X₁−X₂)`. Near the diagonal it
/// switches to the second-order expansion about the midpoint.
pub fn hermitian_airy_kernel(x1: f64, x2: f64) -> Result<f64> {
    check_point(c(x1, x2))?;
    let h = 0.5 * (x1 - x2);
    if h.abs() < 0.5 * CONFLUENT_GAP {
        let m = 0.5 * (x1 + x2);
        let (a, d) = ai(m)?;
        let k0 = d * d - m * a * a;
        let k2 = -(2.0 / 3.0) * (2.0 * m * m * a * a - 2.0 * m * d * d - a * d);
        return Ok(k0 + 0.5 * h * h * k2);
    }
    let ((a1, d1), (a2, d2)) = (ai(x1)?, ai(x2)?);
    Ok((a1 * d2 - d1 * a2) / (x1 - x2))
}

/// `∫_X^∞ Ai(s) ds`.
pub fn airy_tail_integral(x: f64, q: &QuadratureSpec) -> Result<f64> {
    check_point(c(x, 0.0))?;
    deformed_single_integral(c(x, 0.0), 0.0, q).map(|v| v.re)
}

/// `∫_{X₂}^{X₁} K_Ai,Herm(t,X₂) dt`.
fn kernel_column_integral(x1: f64, x2: f64, q: &QuadratureSpec) -> Result<f64> {
    if x1 == x2 {
        return Ok(0.0);
    }
    let (lo, hi, s) = if x1 > x2 { (x2, x1, 1.0) } else { (x1, x2, -1.0) };
    let v = fallible(|t| hermitian_airy_kernel(t, x2).map(|k| c(k, 0.0)), |g| integrate_interval(g, lo, hi, q))?;
    Ok(s * v.re)
}

/// The four functions of the β = 4 Hermitian matrix-kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianB4 {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

pub fn hermitian_elements_b4(x1: f64, x2: f64, q: &QuadratureSpec) -> Result<HermitianB4> {
    check_point(c(x1, x2))?;
    let k = hermitian_airy_kernel(x1, x2)?;
    let (b1, b2) = (airy_tail_integral(x1, q)?, airy_tail_integral(x2, q)?);
    let ((a1, _), (a2, _)) = (ai(x1)?, ai(x2)?);
    let t4 = fallible(
        |s| {
            let ((p, dp), (r, dr)) = (ai(x1 + s)?, ai(x2 + s)?);
            Ok(c(p * dr - r * dp, 0.0))
        },
        |g| semiinfinite_integral(g, q),
    )?
    .re;
    Ok(HermitianB4 {
        t1: 2.0 * kernel_column_integral(x1, x2, q)? - (b2 - b1) * b2,
        t2: 2.0 * k - a1 * b2,
        t3: 2.0 * k - a2 * b1,
        t4,
    })
}

/// σ → 0 limits of the β = 1 elements at real arguments. The complex-part
/// elements vanish identically in this limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianB1 {
    pub khat: f64,
    /// `−G^R`
    pub neg_g_real: f64,
    /// `−W^{RR}`
    pub neg_w_rr: f64,
    pub g_complex: f64,
    pub w_real_complex: f64,
    pub w_cc: f64,
}

pub fn hermitian_elements_b1(x1: f64, x2: f64, q: &QuadratureSpec) -> Result<HermitianB1> {
    check_point(c(x1, x2))?;
    let (a1, _) = ai(x1)?;
    let (a2, _) = ai(x2)?;
    let (b1, b2) = (airy_tail_integral(x1, q)?, airy_tail_integral(x2, q)?);
    let dk = fallible(
        |t| {
            let ((p, _), (_, dr)) = (ai(x1 + t)?, ai(x2 + t)?);
            Ok(c(p * dr, 0.0))
        },
        |g| semiinfinite_integral(g, q),
    )?
    .re;
    let span = b2 - b1;
    Ok(HermitianB1 {
        khat: 0.5 * (dk + 0.5 * a1 * a2),
        neg_g_real: hermitian_airy_kernel(x1, x2)? + 0.5 * a1 * (1.0 - b2),
        neg_w_rr: 2.0 * (kernel_column_integral(x1, x2, q)? + 0.5 * span * (1.0 - b2)),
        g_complex: 0.0,
        w_real_complex: 0.0,
        w_cc: 0.0,
    })
}

// ---------------------------------------------------------------------------
// Strongly non-Hermitian edge, σ → ∞ at fixed Ẑ = Z/σ

/// `K_edge^{(2)}(Ẑ₁,Ẑ₂)`.
pub fn strong_edge_kernel_b2(z1: C64, z2: C64) -> Result<C64> {
    check_point(z1)?;
    check_point(z2)?;
    let d = z1 - z2;
    let e = (-(z1.im * z1.im + z2.im * z2.im) / 2.0 - d * d / 4.0).exp();
    finite(e * erfc((z1 + z2) / 2.0)? / (2.0 * PI), "strong_edge_kernel_b2")
}

/// `∫₀^∞ du e^{−(u+a)²/2} erfc((u+b)/√2)`.
fn gauss_erfc_integral(a: C64, b: C64, q: &QuadratureSpec) -> Result<C64> {
    fallible(|u| Ok((-(u + a) * (u + a) / 2.0).exp() * erfc((u + b) / SQRT_2)?), |g| semiinfinite_integral(g, q))
}

/// `K_edge^{(4)}(Ẑ₁,Ẑ₂)`.
pub fn strong_edge_kernel_b4(z1: C64, z2: C64, q: &QuadratureSpec) -> Result<C64> {
    check_point(z1)?;
    check_point(z2)?;
    let amp = (z1.im * z2.im).abs().sqrt();
    if amp == 0.0 || z1 == z2 {
        return Ok(c(0.0, 0.0));
    }
    let d = gauss_erfc_integral(z1, z2, q)? - gauss_erfc_integral(z2, z1, q)?;
    let pre = amp * (-(z1.im * z1.im + z2.im * z2.im) / 2.0).exp() / (4.0 * SQRT_2 * PI);
    finite(d * c(0.0, -pre), "strong_edge_kernel_b4")
}

/// Upper-representative density `K_edge^{(4)}(Ẑ,Ẑ*)`.
pub fn strong_edge_density_b4(z: C64, q: &QuadratureSpec) -> Result<f64> {
    let u = upper(z);
    strong_edge_kernel_b4(u, u.conj(), q).map(|v| v.re)
}

/// `K̂_edge^{(1)}(Ẑ₁,Ẑ₂)`.
pub fn strong_edge_prekernel_b1(z1: C64, z2: C64) -> Result<C64> {
    check_point(z1)?;
    check_point(z2)?;
    let e = (erfc_real(z1.im.abs()) * erfc_real(z2.im.abs())).sqrt();
    let d = z1 - z2;
    finite(d * e * (-d * d / 4.0).exp() * erfc((z1 + z2) / 2.0)? / (8.0 * PI.sqrt()), "strong_edge_prekernel_b1")
}

/// `G_edge^R(Ẑ₁,X̂₂)`.
pub fn strong_edge_g_real_b1(z1: C64, x2: f64) -> Result<C64> {
    check_point(z1)?;
    check_point(c(x2, 0.0))?;
    let e = erfc_real(z1.im.abs()).sqrt();
    let d = z1 - x2;
    let t1 = (-d * d / 4.0).exp() * erfc((z1 + x2) / 2.0)? / (2.0 * PI.sqrt());
    let t2 = (-z1 * z1 / 2.0).exp() * (1.0 - 0.5 * erfc_real(x2 / SQRT_2)) / (2.0 * PI).sqrt();
    finite(-(t1 + t2) * e, "strong_edge_g_real_b1")
}

/// `P(X̂₁,X̂₂) = (2π)^{−1/2} ∫₀^∞ ds e^{−(X̂₂+s)²/2} erf((X̂₁+s)/√2)`.
fn p_term(x1: f64, x2: f64, q: &QuadratureSpec) -> Result<f64> {
    let v = semiinfinite_integral(|s| c((-(x2 + s) * (x2 + s) / 2.0).exp() * (1.0 - erfc_real((x1 + s) / SQRT_2)), 0.0), q)?;
    Ok(v.re / (2.0 * PI).sqrt())
}

/// `W_edge^{RR}(X̂₁,X̂₂)`.
pub fn strong_edge_w_rr_b1(x1: f64, x2: f64, q: &QuadratureSpec) -> Result<f64> {
    check_point(c(x1, x2))?;
    if x1 == x2 {
        return Ok(0.0);
    }
    let qf = |x: f64| 0.5 * erfc_real(x / SQRT_2);
    Ok(-(p_term(x1, x2, q)? - p_term(x2, x1, q)? + qf(x2) - qf(x1)))
}

/// All strong-limit β = 1 elements, each scaled as its δ-structure requires:
/// `2σ²` for smooth parts, `2σ` for single-δ parts, `2` for `W^{RR}`.
pub fn strong_edge_elements_b1(z1: C64, z2: C64, q: &QuadratureSpec) -> Result<B1Elements> {
    let k = strong_edge_prekernel_b1;
    let (s1, s2) = (sgn(z1.im), sgn(z2.im));
    let g_c = if s2 == 0.0 { c(0.0, 0.0) } else { k(z1, z2.conj())? * c(0.0, 2.0 * s2) };
    let w_rc = |x: f64, z: C64| -> Result<C64> {
        let s = sgn(z.im);
        Ok(if s == 0.0 { c(0.0, 0.0) } else { strong_edge_g_real_b1(z.conj(), x)? * c(0.0, 2.0 * s) })
    };
    let w_cc = if s1 * s2 == 0.0 { c(0.0, 0.0) } else { k(z1.conj(), z2.conj())? * (4.0 * s1 * s2) };
    Ok(B1Elements {
        khat: k(z1, z2)?,
        g_real: DeltaTerm { value: strong_edge_g_real_b1(z1, z2.re)?, delta: DeltaFactor::Y2 },
        g_complex: g_c,
        w_rr: DeltaTerm { value: c(strong_edge_w_rr_b1(z1.re, z2.re, q)?, 0.0), delta: DeltaFactor::Y1Y2 },
        w_real_complex: DeltaTerm { value: w_rc(z1.re, z2)?, delta: DeltaFactor::Y1 },
        w_complex_real: DeltaTerm { value: -w_rc(z2.re, z1)?, delta: DeltaFactor::Y2 },
        w_cc,
        contact: contact_terms(z1, z2),
    })
}

/// `R_edge^{R(1)}(X̂)`, density of real eigenvalues.
pub fn strong_edge_density_b1_real(x: f64) -> f64 {
    (erfc_real(x) + (-x * x / 2.0).exp() * erfc_real(-x / SQRT_2) / SQRT_2) / (2.0 * PI.sqrt())
}

/// `R_edge^{C(1)}(Ẑ)`, density of complex eigenvalues.
pub fn strong_edge_density_b1_complex(z: C64) -> f64 {
    let y = z.im.abs();
    if y == 0.0 {
        return 0.0;
    }
    y * crate::specfun::erfcx_real(y) * erfc_real(z.re) / (2.0 * PI.sqrt())
}

/// Strong-limit kernel for any β; β = 1 yields the element family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StrongEdge {
    Kernel(C64),
    Elements(B1Elements),
}

pub fn strong_edge_kernel(beta: Beta, z1: C64, z2: C64, q: &QuadratureSpec) -> Result<StrongEdge> {
    Ok(match beta {
        Beta::Two => StrongEdge::Kernel(strong_edge_kernel_b2(z1, z2)?),
        Beta::Four => StrongEdge::Kernel(strong_edge_kernel_b4(z1, z2, q)?),
        Beta::One => StrongEdge::Elements(strong_edge_elements_b1(z1, z2, q)?),
    })
}

// ---------------------------------------------------------------------------
// Poisson and bulk

/// Poisson kernel `M^{(β)}` near the eigenvalue of largest real part. The
/// Kronecker delta compares `y₁` and `−y₂` exactly.
pub fn poisson_kernel(beta: Beta, z1: C64, z2: C64) -> Result<C64> {
    check_point(z1)?;
    check_point(z2)?;
    #[allow(clippy::float_cmp)]
    if z1.im != -z2.im {
        return Ok(c(0.0, 0.0));
    }
    let m2 = (-(z1.re + z2.re + z1.im * z1.im + z2.im * z2.im) / 2.0).exp() / PI.sqrt();
    Ok(match beta {
        Beta::Two => c(m2, 0.0),
        Beta::Four => c(0.5 * m2, 0.0),
        Beta::One => c(0.0, 0.5 * sgn(z1.im) * m2),
    })
}

/// Interpolating bulk sine kernel. The `1/√s` endpoint is removed by `s = u²`.
pub fn bulk_sine_kernel(z1: C64, z2: C64, sigma: f64, q: &QuadratureSpec) -> Result<C64> {
    check_point(z1)?;
    check_point(z2)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(GekError::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let d = z1 - z2;
    let s2 = sigma * sigma;
    let i = integrate_interval(|u| (u * d).cos() * (2.0 * (-s2 * u * u).exp()), 0.0, 1.0, q)?;
    let pre = gauss_y(z1.im, z2.im, sigma) / (2.0 * sigma * PI.powf(1.5));
    finite(i * pre, "bulk_sine_kernel")
}

/// Closed form of `∫₀¹ ds e^{−sσ²} cos(√s w)/√s` through complex erf.
pub fn bulk_sine_integral_closed(w: C64, sigma: f64) -> Result<C64> {
    let a = c(sigma, 0.0);
    let b = w * c(0.0, 1.0 / (2.0 * sigma));
    let s = erf(a + b)? + erf(a - b)?;
    Ok(s * (-w * w / (4.0 * sigma * sigma)).exp() * (PI.sqrt() / (2.0 * sigma)))
}
