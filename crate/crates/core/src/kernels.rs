//! Spectral-projection kernels of the sublaplacian and their Abel means.
//!
//! Fourier convention: `f(z, t) = ∫_{R^m} e^{-i<a,t>} f^a(z) da` with Lebesgue `da`.
//! Radial integrals in `a` reduce to one-dimensional Bessel integrals through
//! `∫_{S^{m-1}} e^{-iλ<u,t>} dσ(u) = b_m(λ|t|)`, and those reduce to derivatives of the
//! Poisson integral
//!
//! `I_m(τ) = ∫_0^∞ J_ν(λ) λ^{-ν} e^{-τλ} λ^{m-1} dλ`, `ν = m/2 - 1`.
//!
//! All kernels here are homogeneous of degree `-Q` under `δ_s`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::norm;
use crate::quadrature::{integrate_panels, uniform_breaks, QuadratureRule, RuleKind};
use crate::special::{binomial, gamma, normalized_unchecked, phi, poisson_derivative};
use crate::transforms::sphere_area;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Component { j: usize, n: usize, m: usize },
    Series { k: usize, n: usize, m: usize },
    ClosedForm { k: usize, n: usize, m: usize },
    Abel { r: f64, n: usize, m: usize },
    RieszAbel { r: f64, j: usize, n: usize, m: usize },
}

impl KernelSpec {
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            KernelSpec::Component { n, m, .. }
            | KernelSpec::Series { n, m, .. }
            | KernelSpec::ClosedForm { n, m, .. }
            | KernelSpec::Abel { n, m, .. }
            | KernelSpec::RieszAbel { n, m, .. } => (n, m),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = self.dims();
        check_nm(n, m)?;
        match *self {
            KernelSpec::Abel { r, .. } => check_r(r),
            KernelSpec::RieszAbel { r, j, m, .. } => {
                check_r(r)?;
                if j >= m {
                    return Err(invalid(format!("Riesz component {j} out of range for m = {m}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn check_nm(n: usize, m: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if m < 2 {
        return Err(invalid(format!("kernels need a centre of dimension m >= 2, got {m}")));
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid(format!("Abel parameter must lie in (0, 1), got {r}")));
    }
    Ok(())
}

fn check_origin(rz: f64, rt: f64) -> Result<()> {
    if !(rz.is_finite() && rt.is_finite()) || rz < 0.0 || rt < 0.0 {
        return Err(invalid(format!("radii must be finite and non-negative, got ({rz}, {rt})")));
    }
    if rz == 0.0 && rt == 0.0 {
        return Err(invalid("kernels are singular at the origin"));
    }
    Ok(())
}

fn two_pi_m(m: usize) -> f64 {
    (2.0 * PI).powf(0.5 * m as f64)
}

/// `A^j(z, t) = |z|^{2j} ∫ e^{-i<a,t>} e^{-|a||z|²/4} |a|^{n+j} da`
/// `= (2π)^{m/2} (-1)^{n+j} |z|^{2j} |t|^{-(n+m+j)} I_m^{(n+j)}(|z|²/(4|t|))`.
pub fn ak_component_radial(j: usize, n: usize, m: usize, rz: f64, rt: f64) -> Result<f64> {
    check_nm(n, m)?;
    check_origin(rz, rt)?;
    let p = n + j;
    let z2j = rz.powi(2 * j as i32);
    if rt == 0.0 {
        // ∫ λ^{n+j+m-1} e^{-λ|z|²/4} dλ over R^m in polar form
        let q = (n + j + m) as i32;
        return Ok(z2j * sphere_area(m) * gamma(q as f64) * (4.0 / (rz * rz)).powi(q));
    }
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    let tau = rz * rz / (4.0 * rt);
    Ok(two_pi_m(m) * sign * z2j * rt.powi(-((n + m + j) as i32)) * poisson_derivative(m, p, tau)?)
}

fn radii(n: usize, m: usize, z: &[f64], t: &[f64]) -> Result<(f64, f64)> {
    if z.len() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: z.len() });
    }
    if t.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: t.len() });
    }
    Ok((norm(z), norm(t)))
}

pub fn ak_component(j: usize, n: usize, m: usize, z: &[f64], t: &[f64]) -> Result<f64> {
    let (rz, rt) = radii(n, m, z, t)?;
    ak_component_radial(j, n, m, rz, rt)
}

/// Coefficient of `x^j` in `L_k^{n-1}(x)` times `2^{-j}`:
/// `(-1)^j C(k+n-1, k-j) 2^{-j} / j!`.
pub fn series_coeff(k: usize, n: usize, j: usize) -> f64 {
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    sign * binomial(k + n - 1, k - j) / (2f64.powi(j as i32) * gamma(j as f64 + 1.0))
}

/// `A_k = ∫ e^{-i<a,t>} φ_k^{|a|}(z) |a|^n da` as a combination of components.
pub fn ak_series_radial(k: usize, n: usize, m: usize, rz: f64, rt: f64) -> Result<f64> {
    let mut sum = 0.0;
    for j in 0..=k {
        sum += series_coeff(k, n, j) * ak_component_radial(j, n, m, rz, rt)?;
    }
    Ok(sum)
}

pub fn ak_series(k: usize, n: usize, m: usize, z: &[f64], t: &[f64]) -> Result<f64> {
    let (rz, rt) = radii(n, m, z, t)?;
    ak_series_radial(k, n, m, rz, rt)
}

/// `∫_0^∞ f(λ) dλ` for `f` with envelope `λ^q e^{-c λ}` oscillating at frequency
/// `freq`, on composite Gauss–Legendre panels cut where the envelope falls below
/// `1e-18` of its peak.
pub fn oscillatory_halfline<F>(f: F, decay: f64, freq: f64, q: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(decay > 0.0) {
        return Err(invalid(format!("decay rate must be positive, got {decay}")));
    }
    let q = q.max(0.0);
    let peak = (q / decay).max(1e-300);
    let log_env = |x: f64| if x > 0.0 { q * x.ln() - decay * x } else { f64::NEG_INFINITY };
    let log_max = if q > 0.0 { log_env(peak) } else { 0.0 };
    let mut upper = peak.max(1.0 / decay);
    while log_env(upper) > log_max - 41.5 {
        upper *= 1.25;
    }
    let mut width = upper / 24.0;
    if freq > 0.0 {
        width = width.min(PI / freq);
    }
    let panels = (upper / width).ceil().max(1.0) as usize;
    if panels > 200_000 {
        return Err(Error::Unsupported(format!("oscillatory integral needs {panels} panels")));
    }
    let v = integrate_panels(&uniform_breaks(0.0, upper, panels), 16, |x| Complex64::new(f(x), 0.0))?;
    Ok(v.re)
}

/// `(2π)^{m/2} ∫_0^∞ j_ν(λ|t|) g(λ) λ^{m-1} dλ` with `j_ν(x) = J_ν(x)/x^ν`:
/// the Fourier integral of a radial function of `a`.
fn radial_fourier<G>(m: usize, rt: f64, g: G, decay: f64, q: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let nu = 0.5 * m as f64 - 1.0;
    let integral = oscillatory_halfline(
        |l| normalized_unchecked(nu, l * rt) * g(l) * l.powi(m as i32 - 1),
        decay,
        rt,
        q + m as f64 - 1.0,
    )?;
    Ok(two_pi_m(m) * integral)
}

/// Direct Bessel-integral quadrature of `A^j`.
pub fn ak_component_direct(j: usize, n: usize, m: usize, rz: f64, rt: f64) -> Result<f64> {
    check_nm(n, m)?;
    check_origin(rz, rt)?;
    if rz == 0.0 {
        return Err(invalid("the defining integral diverges at z = 0"));
    }
    let c = 0.25 * rz * rz;
    let p = (n + j) as i32;
    let v = radial_fourier(m, rt, |l| (-c * l).exp() * l.powi(p), c, p as f64)?;
    Ok(rz.powi(2 * j as i32) * v)
}

/// Direct Bessel-integral quadrature of `A_k` from `φ_k^{|a|}`.
pub fn ak_direct(k: usize, n: usize, m: usize, rz: f64, rt: f64) -> Result<f64> {
    check_nm(n, m)?;
    check_origin(rz, rt)?;
    if rz == 0.0 {
        return Err(invalid("the defining integral diverges at z = 0"));
    }
    let c = 0.25 * rz * rz;
    radial_fourier(m, rt, |l| phi(k, n, l, rz) * l.powi(n as i32), c, (n + k) as f64)
}

/// Explicit form of `A_k` up to a constant depending on `(n, m)`:
/// `(-1)^k ∫_{-1}^{1} (1-s²)^{(m-3)/2} Σ_{ℓ ≤ min(k, m-1)} C(m-1, ℓ) P_{k-ℓ}(s) ds` with
/// `P_j = (N-1+j)!/j! A^j/B^{N+j} + (N-2+j)!/(j-1)! A^{j-1}/B^{N+j-1}`,
/// `N = n + m`, `A = |z|² - 4is|t|`, `B = |z|² + 4is|t|`.
pub fn ak_closed_form_raw(k: usize, n: usize, m: usize, rz: f64, rt: f64, points: usize) -> Result<Complex64> {
    check_nm(n, m)?;
    check_origin(rz, rt)?;
    if rz == 0.0 {
        return Err(invalid("the explicit form needs z != 0"));
    }
    let big_n = (n + m) as i32;
    let fact = |x: i32| gamma(x as f64 + 1.0);
    let p_term = |j: usize, a: Complex64, b: Complex64| -> Complex64 {
        let ji = j as i32;
        let mut v = a.powi(ji) / b.powi(big_n + ji) * (fact(big_n - 1 + ji) / fact(ji));
        if j > 0 {
            v += a.powi(ji - 1) / b.powi(big_n + ji - 1) * (fact(big_n - 2 + ji) / fact(ji - 1));
        }
        v
    };
    let w = 0.5 * (m as f64 - 3.0);
    let rule = QuadratureRule::cached(RuleKind::Jacobi { n: points, alpha: w, beta: w })?;
    let z2 = rz * rz;
    let v = rule.integrate(|s| {
        let x = 4.0 * s[0] * rt;
        let a = Complex64::new(z2, -x);
        let b = Complex64::new(z2, x);
        (0..=k.min(m - 1)).map(|l| p_term(k - l, a, b) * binomial(m - 1, l)).sum()
    });
    Ok(if k % 2 == 0 { v } else { -v })
}

/// Gauss–Jacobi size for the explicit form; poles sit at distance `|z|²/(4|t|)` from
/// the real `s` axis.
pub fn closed_form_points(rz: f64, rt: f64) -> usize {
    if rt == 0.0 {
        return 16;
    }
    let tau = rz * rz / (4.0 * rt);
    ((48.0 / tau.min(1.0)).ceil() as usize).clamp(32, 512)
}

/// Reference point used to fit the explicit-form constant.
pub const FIT_POINT: (f64, f64) = (1.0, 1.0);

/// The explicit form with its constant fitted once against the series at [`FIT_POINT`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormKernel {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    /// `series / raw` at the fit point.
    pub constant: Complex64,
}

impl ClosedFormKernel {
    pub fn fit(k: usize, n: usize, m: usize) -> Result<Self> {
        let (rz, rt) = FIT_POINT;
        let raw = ak_closed_form_raw(k, n, m, rz, rt, closed_form_points(rz, rt))?;
        let series = ak_series_radial(k, n, m, rz, rt)?;
        if raw.norm() == 0.0 {
            return Err(invalid("explicit form vanishes at the fit point"));
        }
        Ok(Self { k, n, m, constant: Complex64::new(series, 0.0) / raw })
    }

    /// Shared fitted instance, frozen after the first fit.
    pub fn cached(k: usize, n: usize, m: usize) -> Result<Self> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize, usize), ClosedFormKernel>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(c) = cache.lock().unwrap().get(&(k, n, m)) {
            return Ok(*c);
        }
        let c = Self::fit(k, n, m)?;
        cache.lock().unwrap().insert((k, n, m), c);
        Ok(c)
    }

    pub fn evaluate_radial(&self, rz: f64, rt: f64) -> Result<Complex64> {
        let raw = ak_closed_form_raw(self.k, self.n, self.m, rz, rt, closed_form_points(rz, rt))?;
        Ok(raw * self.constant)
    }
}

pub fn ak_closed_form(k: usize, n: usize, m: usize, z: &[f64], t: &[f64]) -> Result<Complex64> {
    let (rz, rt) = radii(n, m, z, t)?;
    ClosedFormKernel::cached(k, n, m)?.evaluate_radial(rz, rt)
}

/// `|∫_0^∞ I_m^{(p)}(b) b^{p-1} db| / ∫_0^∞ |I_m^{(p)}(b)| b^{p-1} db`, `p = n + j`,
/// on `b = u/(1-u)` with composite Gauss–Legendre in `u`.
pub fn cancellation_integral(n: usize, j: usize, m: usize) -> Result<f64> {
    check_nm(n, m)?;
    let p = n + j;
    let mut signed = 0.0;
    let mut absolute = 0.0;
    let rule = QuadratureRule::cached(RuleKind::Interval { a: -1.0, b: 1.0, n: 32 })?;
    let breaks = uniform_breaks(0.0, 1.0, 64);
    for pair in breaks.windows(2) {
        let h = 0.5 * (pair[1] - pair[0]);
        for (x, w) in rule.iter() {
            let u = pair[0] + h * (x[0] + 1.0);
            let b = u / (1.0 - u);
            let jac = 1.0 / ((1.0 - u) * (1.0 - u));
            let v = poisson_derivative(m, p, b)? * b.powi(p as i32 - 1) * jac * w * h;
            signed += v;
            absolute += v.abs();
        }
    }
    Ok(signed.abs() / absolute)
}

/// Boundary term `b^p Ψ^{(p-1)}(b)` whose vanishing at `0` and `∞` gives the cancellation.
pub fn cancellation_boundary(m: usize, p: usize, b: f64) -> Result<f64> {
    if p == 0 {
        return Err(invalid("boundary term needs p >= 1"));
    }
    Ok(b.powi(p as i32) * crate::special::psi_derivative(m, p - 1, b)?)
}

fn abel_c(r: f64) -> f64 {
    0.25 * (1.0 + r) / (1.0 - r)
}

/// `Σ_k r^k A_k = (1-r)^{-n} ∫ e^{-i<a,t>} e^{-c_r|a||z|²} |a|^n da`, `c_r = ¼(1+r)/(1-r)`.
pub fn abel_kernel_radial(r: f64, n: usize, m: usize, rz: f64, rt: f64) -> Result<f64> {
    check_nm(n, m)?;
    check_r(r)?;
    check_origin(rz, rt)?;
    let c = abel_c(r);
    let pre = (1.0 - r).powi(-(n as i32));
    if rt == 0.0 {
        let q = (n + m) as i32;
        return Ok(pre * sphere_area(m) * gamma(q as f64) * (c * rz * rz).powi(-q));
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let tau = c * rz * rz / rt;
    Ok(pre * two_pi_m(m) * sign * rt.powi(-((n + m) as i32)) * poisson_derivative(m, n, tau)?)
}

pub fn abel_kernel(r: f64, n: usize, m: usize, z: &[f64], t: &[f64]) -> Result<f64> {
    let (rz, rt) = radii(n, m, z, t)?;
    abel_kernel_radial(r, n, m, rz, rt)
}

/// `Σ_{k ≤ K} r^k A_k`.
pub fn abel_partial_sum(r: f64, n: usize, m: usize, rz: f64, rt: f64, terms: usize) -> Result<f64> {
    let mut sum = 0.0;
    for k in 0..=terms {
        sum += r.powi(k as i32) * ak_series_radial(k, n, m, rz, rt)?;
    }
    Ok(sum)
}

/// `(1-r)^{-n} ∫ e^{-i<a,t>} e^{-c_r|a||z|²} (a_j/|a|) |a|^n da`
/// `= -i (-1)^{n-1} (2π)^{m/2} (1-r)^{-n} t_j |t|^{-(n+m+1)} I_{m+2}^{(n-1)}(c_r|z|²/|t|)`.
pub fn riesz_abel_kernel(r: f64, j: usize, n: usize, m: usize, z: &[f64], t: &[f64]) -> Result<Complex64> {
    KernelSpec::RieszAbel { r, j, n, m }.validate()?;
    let (rz, rt) = radii(n, m, z, t)?;
    check_origin(rz, rt)?;
    if t[j] == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let c = abel_c(r);
    let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let tau = c * rz * rz / rt;
    let v = sign
        * two_pi_m(m)
        * (1.0 - r).powi(-(n as i32))
        * t[j]
        * rt.powi(-((n + m + 1) as i32))
        * poisson_derivative(m + 2, n - 1, tau)?;
    Ok(Complex64::new(0.0, -v))
}

/// Direct quadrature of the vector integral defining the Riesz–Abel kernel: sphere rules
/// over directions `u ∈ S^{m-1}` inside composite panels in `λ = |a|`.
pub fn riesz_abel_direct(r: f64, j: usize, n: usize, m: usize, z: &[f64], t: &[f64]) -> Result<Complex64> {
    KernelSpec::RieszAbel { r, j, n, m }.validate()?;
    let (rz, rt) = radii(n, m, z, t)?;
    if rz == 0.0 {
        return Err(invalid("the defining integral diverges at z = 0"));
    }
    let c = abel_c(r) * rz * rz;
    let q = (n + m - 1) as f64;
    let peak = q / c;
    let mut upper = peak.max(1.0 / c);
    let log_env = |x: f64| q * x.ln() - c * x;
    while log_env(upper) > log_env(peak) - 41.5 {
        upper *= 1.25;
    }
    let area = sphere_area(m);
    let failure = std::cell::RefCell::new(None);
    let panels = ((upper * rt.max(1e-3) / PI).ceil() as usize).max(24);
    let v = integrate_panels(&uniform_breaks(0.0, upper, panels), 16, |l| {
        // degree needed to resolve e^{-iλ<u,t>} on the sphere
        let level = (((0.5 * l * rt + 12.0) / 8.0).ceil() as usize * 8).max(8);
        let sphere = match QuadratureRule::cached(RuleKind::Sphere { dim: m, level }) {
            Ok(s) => s,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                return Complex64::new(0.0, 0.0);
            }
        };
        let ang = sphere.integrate(|u| {
            let dot: f64 = u.iter().zip(t).map(|(a, b)| a * b).sum();
            Complex64::from_polar(u[j], -l * dot)
        });
        ang * (area * (-c * l).exp() * l.powi((n + m - 1) as i32))
    });
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(v? * (1.0 - r).powi(-(n as i32)))
}

/// `∫_B^∞ |I_{m}^{(p)}(a)| a^{n-1} da / ∫_0^∞ |I_{m}^{(p)}(a)| a^{n-1} da`.
pub fn profile_tail_ratio(m: usize, p: usize, n: usize, cutoff: f64) -> Result<f64> {
    if !(cutoff > 0.0) {
        return Err(invalid("cutoff must be positive"));
    }
    let rule = QuadratureRule::cached(RuleKind::Interval { a: -1.0, b: 1.0, n: 32 })?;
    let mut head = 0.0;
    let mut tail = 0.0;
    // a = u/(1-u) on [0, 1); split at the cutoff image
    let uc = cutoff / (1.0 + cutoff);
    for (lo, hi, acc) in [(0.0, uc, &mut head), (uc, 1.0, &mut tail)] {
        for pair in uniform_breaks(lo, hi, 64).windows(2) {
            let h = 0.5 * (pair[1] - pair[0]);
            for (x, w) in rule.iter() {
                let u = pair[0] + h * (x[0] + 1.0);
                let a = u / (1.0 - u);
                let v = poisson_derivative(m, p, a)?.abs() * a.powi(n as i32 - 1) / ((1.0 - u) * (1.0 - u));
                *acc += v * w * h;
            }
        }
    }
    Ok(tail / (head + tail))
}

/// Integral of a biradial kernel over the Korányi annulus `a < |(z,t)| < b` in the polar
/// coordinates `|z| = R √cos θ`, `|t| = R² sin θ`, with its absolute-value counterpart.
pub fn annulus_integral<K>(n: usize, m: usize, a: f64, b: f64, kernel: K) -> Result<(f64, f64)>
where
    K: Fn(f64, f64) -> Result<f64>,
{
    if !(0.0 < a && a < b) {
        return Err(invalid(format!("annulus needs 0 < a < b, got ({a}, {b})")));
    }
    let theta = QuadratureRule::cached(RuleKind::Interval { a: 0.0, b: 0.5 * PI, n: 96 })?;
    let radial = QuadratureRule::cached(RuleKind::Interval { a, b, n: 24 })?;
    let q = (2 * n + 2 * m) as i32;
    let area = sphere_area(2 * n) * sphere_area(m);
    let mut signed = 0.0;
    let mut absolute = 0.0;
    for (rr, wr) in radial.iter() {
        let big_r = rr[0];
        for (th, wt) in theta.iter() {
            let (sn, cs) = th[0].sin_cos();
            let k = kernel(big_r * cs.sqrt(), big_r * big_r * sn)?;
            let jac = big_r.powi(q - 1) * cs.powi(n as i32 - 1) * sn.powi(m as i32 - 1);
            let v = k * jac * wr * wt * area;
            signed += v;
            absolute += v.abs();
        }
    }
    Ok((signed, absolute))
}

/// Evaluate a kernel at `(z, t)`; `ClosedForm` uses the frozen fitted constant.
pub fn evaluate(spec: &KernelSpec, z: &[f64], t: &[f64]) -> Result<Complex64> {
    spec.validate()?;
    let re = |v: f64| Complex64::new(v, 0.0);
    match *spec {
        KernelSpec::Component { j, n, m } => ak_component(j, n, m, z, t).map(re),
        KernelSpec::Series { k, n, m } => ak_series(k, n, m, z, t).map(re),
        KernelSpec::ClosedForm { k, n, m } => ak_closed_form(k, n, m, z, t),
        KernelSpec::Abel { r, n, m } => abel_kernel(r, n, m, z, t).map(re),
        KernelSpec::RieszAbel { r, j, n, m } => riesz_abel_kernel(r, j, n, m, z, t),
    }
}

/// Evaluate at `z = (rz, 0, …)`, `t = (rt, 0, …)`.
pub fn evaluate_radial(spec: &KernelSpec, rz: f64, rt: f64) -> Result<Complex64> {
    let (n, m) = spec.dims();
    let mut z = vec![0.0; 2 * n];
    let mut t = vec![0.0; m];
    z[0] = rz;
    t[0] = rt;
    evaluate(spec, &z, &t)
}
