//! Bessel, Laguerre and Poisson-kernel special functions.
//!
//! Bessel functions of the first kind are evaluated by their power series for
//! `x <= max(14, 2 nu)`, by closed trigonometric forms for half-integer orders, and by
//! the Hankel asymptotic expansion beyond that. The orders that occur in this crate are
//! `m/2 - 1` and `m/2` for small `m`, so only orders up to [`MAX_BESSEL_ORDER`] are
//! supported.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{QuadratureRule, RuleKind};

pub const MAX_BESSEL_ORDER: f64 = 15.0;
pub const MAX_LAGUERRE_DEGREE: usize = 60;
pub const MAX_POISSON_ORDER: usize = 64;

const SERIES_LIMIT: f64 = 14.0;

/// Gamma function. Exact products for integer and half-integer arguments,
/// Lanczos (via `statrs`) otherwise.
pub fn gamma(x: f64) -> f64 {
    let twice = 2.0 * x;
    if x > 0.0 && twice == twice.round() && twice <= 340.0 {
        let mut acc;
        let mut y;
        if (twice as i64) % 2 == 0 {
            acc = 1.0;
            y = 1.0;
        } else {
            acc = PI.sqrt();
            y = 0.5;
        }
        while y < x {
            acc *= y;
            y += 1.0;
        }
        return acc;
    }
    statrs::function::gamma::gamma(x)
}

fn is_half_integer(nu: f64) -> bool {
    let f = nu - nu.floor();
    (f - 0.5).abs() < 1e-15
}

fn check_order(order: f64) -> Result<()> {
    if !order.is_finite() || order <= -1.0 || order > MAX_BESSEL_ORDER {
        return Err(invalid(format!(
            "Bessel order {order} outside supported range (-1, {MAX_BESSEL_ORDER}]"
        )));
    }
    Ok(())
}

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(invalid(format!("Bessel argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// `J_nu(x) / x^nu` by its power series.
fn series_normalized(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0));
    let mut sum = term;
    let mut comp = 0.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + nu));
        // Neumaier summation
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 0.5 * x {
            break;
        }
        k += 1.0;
        if k > 400.0 {
            break;
        }
    }
    sum + comp
}

fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        if a.abs() > prev && kf > nu {
            break;
        }
        prev = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let phase = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cw = cx * cp + sx * sp;
    let sw = sx * cp - cx * sp;
    (2.0 / (PI * x)).sqrt() * (p * cw - q * sw)
}

/// Upward recurrence from `(J_{nu0}, J_{nu0+1})`; stable for `x > nu`.
fn upward(nu: f64, x: f64, j0: f64, j1: f64, nu0: f64) -> f64 {
    let mut a = j0;
    let mut b = j1;
    let mut order = nu0 + 1.0;
    while order < nu - 1e-12 {
        let c = 2.0 * order / x * b - a;
        a = b;
        b = c;
        order += 1.0;
    }
    if (nu - nu0).abs() < 1e-12 {
        a
    } else {
        b
    }
}

fn half_integer_closed(nu: f64, x: f64) -> f64 {
    let s = (2.0 / (PI * x)).sqrt();
    let jm = s * x.cos();
    let jp = s * x.sin();
    if nu < 0.0 {
        return jm;
    }
    upward(nu, x, jp, jp / x - jm, 0.5)
}

fn bessel_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT.max(2.0 * nu) {
        return series_normalized(nu, x) * x.powf(nu);
    }
    if is_half_integer(nu) {
        return half_integer_closed(nu, x);
    }
    if nu <= 4.5 {
        return hankel(nu, x);
    }
    let nu0 = nu - nu.floor();
    upward(nu, x, hankel(nu0, x), hankel(nu0 + 1.0, x), nu0)
}

/// Bessel function of the first kind `J_order(x)` for `x >= 0`.
pub fn bessel_j(order: f64, x: f64) -> Result<f64> {
    check_order(order)?;
    check_arg(x)?;
    Ok(bessel_unchecked(order, x))
}

/// `J_order(x) / x^order`, continuous at `x = 0` with value `1 / (2^order Γ(order+1))`.
pub fn normalized_bessel(order: f64, x: f64) -> Result<f64> {
    check_order(order)?;
    check_arg(x)?;
    Ok(normalized_unchecked(order, x))
}

pub(crate) fn normalized_unchecked(nu: f64, x: f64) -> f64 {
    if x <= SERIES_LIMIT.max(2.0 * nu) {
        series_normalized(nu, x)
    } else {
        bessel_unchecked(nu, x) / x.powf(nu)
    }
}

/// Average of `exp(i x <u, e>)` over the unit sphere `S^{m-1}` of `R^m`:
/// `b_m(x) = 2^{m/2-1} Γ(m/2) J_{m/2-1}(x) / x^{m/2-1}`, with `b_1 = cos` and `b_m(0) = 1`.
pub fn sphere_fourier(m: usize, x: f64) -> f64 {
    let x = x.abs();
    if m == 1 {
        return x.cos();
    }
    let nu = 0.5 * m as f64 - 1.0;
    2f64.powf(nu) * gamma(nu + 1.0) * normalized_unchecked(nu, x)
}

// ---------------------------------------------------------------------------
// Laguerre polynomials

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn from_sum(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }
    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = (self.hi - p - e + self.lo) / d;
        let (hi, lo) = two_sum(q1, r);
        Dd { hi, lo }
    }
}

/// Generalized Laguerre polynomial `L_k^alpha(x)` by the three-term recurrence.
/// Degrees above 30 run the recurrence in double-double arithmetic.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let first = 1.0 + alpha - x;
    if k == 1 {
        return first;
    }
    if k <= 30 {
        let mut prev = 1.0;
        let mut cur = first;
        for j in 1..k {
            let jf = j as f64;
            let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
            prev = cur;
            cur = next;
        }
        return cur;
    }
    let mut prev = Dd { hi: 1.0, lo: 0.0 };
    let mut cur = Dd::from_sum(1.0 + alpha, -x);
    for j in 1..k {
        let jf = j as f64;
        let c1 = Dd::from_sum(2.0 * jf + 1.0 + alpha, -x);
        let c2 = Dd::from_sum(jf, alpha);
        let next = c1.mul(cur).add(c2.mul(prev).neg()).div_f64(jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur.hi + cur.lo
}

/// Scaled Laguerre function `φ_k^λ(ρ) = L_k^{n-1}(λρ²/2) exp(-λρ²/4)`.
pub fn phi(k: usize, n: usize, lambda: f64, rho: f64) -> f64 {
    let x = 0.5 * lambda * rho * rho;
    laguerre(k, n as f64 - 1.0, x) * (-0.5 * x).exp()
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `c_{k,n} = k!(n-1)!/(k+n-1)!` as an exact rational.
pub fn eigen_coeff(k: usize, n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    // k!(n-1)!/(k+n-1)! = prod_{i=1}^{k} i / (n-1+i)
    for i in 1..=k {
        num *= BigInt::from(i);
        den *= BigInt::from(n - 1 + i);
    }
    Ok(BigRational::new(num, den))
}

pub fn eigen_coeff_f64(k: usize, n: usize) -> f64 {
    1.0 / binomial(k + n - 1, k)
}

// ---------------------------------------------------------------------------
// Poisson integral I_m and its derivatives

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoissonMode {
    Closed,
    Quadrature,
}

/// Constant in `I_m(τ) = c_m τ (1+τ²)^{-(m+1)/2}` for
/// `I_m(τ) = ∫_0^∞ J_{m/2-1}(λ) λ^{1-m/2} e^{-τλ} λ^{m-1} dλ`:
/// `c_m = 2^{m/2} Γ((m+1)/2) / √π`.
pub fn poisson_constant(m: usize) -> f64 {
    2f64.powf(0.5 * m as f64) * gamma(0.5 * (m as f64 + 1.0)) / PI.sqrt()
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(invalid(format!("centre dimension m must be >= 2, got {m}")));
    }
    Ok(())
}

/// The Poisson integral `I_m(τ)`.
pub fn poisson_i(m: usize, tau: f64, mode: PoissonMode) -> Result<f64> {
    check_m(m)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    match mode {
        PoissonMode::Closed => {
            Ok(poisson_constant(m) * tau * (1.0 + tau * tau).powf(-0.5 * (m as f64 + 1.0)))
        }
        PoissonMode::Quadrature => {
            let rule = QuadratureRule::cached(RuleKind::HalfLine {
                n: 128,
                alpha: m as f64 - 1.0,
            })?;
            // x = τλ:  τ^{-m} ∫ x^{m-1} e^{-x} j(x/τ) dx
            let nu = 0.5 * m as f64 - 1.0;
            let res = rule.integrate_halfline_weighted(|x| normalized_unchecked(nu, x / tau).into())?;
            Ok(res.value.re * tau.powi(-(m as i32)))
        }
    }
}

/// Exact polynomial `R_p` with `Ψ^{(p)}(b) = R_p(b) (1+b²)^{-(m+1)/2-p}` for
/// `Ψ(b) = (1+b²)^{-(m+1)/2}`.
#[derive(Clone, Debug)]
pub struct PoissonDerivative {
    pub m: usize,
    pub p: usize,
    /// Coefficients of `R_p`, lowest degree first.
    pub poly_coeffs: Vec<BigRational>,
    float_coeffs: Vec<f64>,
}

fn poly_derivative(c: &[BigRational]) -> Vec<BigRational> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| a * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

impl PoissonDerivative {
    pub fn new(m: usize, p: usize) -> Result<Self> {
        check_m(m)?;
        if p > MAX_POISSON_ORDER {
            return Err(invalid(format!("derivative order {p} exceeds {MAX_POISSON_ORDER}")));
        }
        let mut r: Vec<BigRational> = vec![BigRational::one()];
        for q in 0..p {
            // R_{q+1} = R_q' (1+b²) - (m+1+2q) b R_q
            let d = poly_derivative(&r);
            let mut next = vec![BigRational::zero(); r.len() + 1];
            for (i, a) in d.iter().enumerate() {
                next[i] += a;
                next[i + 2] += a;
            }
            let c = BigRational::from_integer(BigInt::from(m + 1 + 2 * q));
            for (i, a) in r.iter().enumerate() {
                next[i + 1] -= &c * a;
            }
            while next.len() > 1 && next.last().is_some_and(|x| x.is_zero()) {
                next.pop();
            }
            r = next;
        }
        let float_coeffs = r.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        Ok(Self { m, p, poly_coeffs: r, float_coeffs })
    }

    /// Shared instance for `(m, p)`.
    pub fn cached(m: usize, p: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<PoissonDerivative>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(d) = cache.lock().unwrap().get(&(m, p)) {
            return Ok(d.clone());
        }
        let d = Arc::new(Self::new(m, p)?);
        cache.lock().unwrap().insert((m, p), d.clone());
        Ok(d)
    }

    pub fn degree(&self) -> usize {
        self.poly_coeffs.len() - 1
    }

    /// `R_p(b)`; falls back to exact rational evaluation when Horner's rule would
    /// lose more than six digits to cancellation.
    pub fn eval_poly(&self, b: f64) -> f64 {
        let mut v = 0.0;
        let mut mag = 0.0;
        for c in self.float_coeffs.iter().rev() {
            v = v * b + c;
            mag = mag * b.abs() + c.abs();
        }
        if mag <= 1e6 * v.abs() || mag == 0.0 {
            return v;
        }
        let Some(x) = BigRational::from_float(b) else {
            return v;
        };
        let mut acc = BigRational::zero();
        for c in self.poly_coeffs.iter().rev() {
            acc = acc * &x + c;
        }
        acc.to_f64().unwrap_or(v)
    }

    /// `Ψ^{(p)}(b)`.
    pub fn psi(&self, b: f64) -> f64 {
        let e = -0.5 * (self.m as f64 + 1.0) - self.p as f64;
        self.eval_poly(b) * (1.0 + b * b).powf(e)
    }

    /// Largest absolute coefficient, used by the recurrence consistency checks.
    pub fn max_coeff(&self) -> BigRational {
        self.poly_coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(BigRational::zero)
    }
}

/// `Ψ^{(p)}(b)` for `Ψ(b) = (1+b²)^{-(m+1)/2}`.
pub fn psi_derivative(m: usize, p: usize, b: f64) -> Result<f64> {
    Ok(PoissonDerivative::cached(m, p)?.psi(b))
}

/// `I_m^{(p)}(b) = c_m (b Ψ^{(p)}(b) + p Ψ^{(p-1)}(b))`, from exact polynomial data.
pub fn poisson_derivative(m: usize, p: usize, b: f64) -> Result<f64> {
    if !b.is_finite() || b < 0.0 {
        return Err(invalid(format!("argument must be >= 0, got {b}")));
    }
    let cm = poisson_constant(m);
    let hi = psi_derivative(m, p, b)?;
    if p == 0 {
        return Ok(cm * b * hi);
    }
    let lo = psi_derivative(m, p - 1, b)?;
    Ok(cm * (b * hi + p as f64 * lo))
}

// ---------------------------------------------------------------------------
// Zeros

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroFamily {
    Bessel { order: f64 },
    Laguerre { k: usize, alpha: f64 },
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if b - a < 1e-14 * mid.abs().max(1.0) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// The `index`-th positive zero (1-based) by scanning for a sign change and bisecting.
pub fn find_zero(family: ZeroFamily, index: usize) -> Result<f64> {
    if index == 0 || index > 50 {
        return Err(invalid(format!("zero index must be in 1..=50, got {index}")));
    }
    match family {
        ZeroFamily::Bessel { order } => {
            check_order(order)?;
            // J_ν / x^ν has the same positive zeros and no zero at the origin.
            let f = move |x: f64| normalized_unchecked(order, x);
            let step = 0.05;
            let mut a = 0.0;
            let mut fa = f(a);
            let mut count = 0;
            loop {
                let b = a + step;
                let fb = f(b);
                if fb == 0.0 || (fa > 0.0) != (fb > 0.0) {
                    count += 1;
                    if count == index {
                        return Ok(if fb == 0.0 { b } else { bisect(&f, a, b) });
                    }
                }
                a = b;
                fa = fb;
                if a > 400.0 {
                    return Err(invalid("Bessel zero scan exceeded x = 400"));
                }
            }
        }
        ZeroFamily::Laguerre { k, alpha } => {
            if k == 0 {
                return Err(invalid("L_0 has no positive zero"));
            }
            if k > MAX_LAGUERRE_DEGREE {
                return Err(invalid(format!("Laguerre degree {k} exceeds {MAX_LAGUERRE_DEGREE}")));
            }
            if index > k {
                return Err(invalid(format!("L_{k} has only {k} zeros")));
            }
            let f = move |x: f64| laguerre(k, alpha, x);
            let upper = 4.0 * k as f64 + 2.0 * alpha.abs() + 10.0;
            let steps = 20_000 * k.max(1);
            let h = upper / steps as f64;
            let mut a = 0.0;
            let mut fa = f(a);
            let mut count = 0;
            for i in 1..=steps {
                let b = i as f64 * h;
                let fb = f(b);
                if fb == 0.0 || (fa > 0.0) != (fb > 0.0) {
                    count += 1;
                    if count == index {
                        return Ok(if fb == 0.0 { b } else { bisect(&f, a, b) });
                    }
                }
                a = b;
                fa = fb;
            }
            Err(Error::Unsupported(format!("zero {index} of L_{k}^{alpha} not bracketed")))
        }
    }
}

/// First `count` positive zeros of `J_order`.
pub fn bessel_zeros(order: f64, count: usize) -> Result<Vec<f64>> {
    (1..=count).map(|i| find_zero(ZeroFamily::Bessel { order }, i)).collect()
}
