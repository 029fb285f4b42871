//! Deterministic quadrature rules.
//!
//! Gauss rules are generated from three-term recurrence coefficients: eigenvalues of
//! the Jacobi matrix by implicit QL, a Newton polish on the orthonormal recurrence,
//! then Christoffel weights. Sphere rules are hyperspherical products: Gauss–Jacobi
//! in the polar cosine times the rule on the next lower sphere, ending with uniform
//! angles on the circle. A sphere rule at level `L` is exact for polynomials of
//! degree `2L - 1` and is antipodally symmetric.
//!
//! Sums are pairwise over the node index, so results are bit-reproducible.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::gamma;

pub const MAX_GAUSS_NODES: usize = 512;
pub const MAX_SPHERE_NODES: usize = 4_000_000;
pub const TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RuleKind {
    /// Normalized surface measure on `S^{dim-1} ⊂ R^dim`.
    Sphere { dim: usize, level: usize },
    /// Gauss–Legendre on `[a, b]`.
    Interval { a: f64, b: f64, n: usize },
    /// Gauss–Laguerre for the weight `x^alpha e^{-x}` on `[0, ∞)`.
    HalfLine { n: usize, alpha: f64 },
    /// Gauss–Jacobi for the weight `(1-x)^alpha (1+x)^beta` on `[-1, 1]`.
    Jacobi { n: usize, alpha: f64, beta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    /// Coordinates per node.
    pub dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `ln w_i`, kept for half-line rules whose weights underflow.
    log_weights: Vec<f64>,
}

/// Result of a half-line integration with its last-node tail estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfLineIntegral {
    pub value: Complex64,
    /// `|last node contribution| / |total|`.
    pub tail: f64,
}

/// Sum in a fixed pairwise tree over the index.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 16 {
        return v.iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b);
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn pairwise_sum_real(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_real(&v[..mid]) + pairwise_sum_real(&v[mid..])
}

// ---------------------------------------------------------------------------
// Gauss rules from recurrences

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i+1`).
fn tridiagonal_eigenvalues(mut d: Vec<f64>, off: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::Unsupported("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

/// Gauss nodes and log-weights for the orthonormal recurrence
/// `x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}` with total mass `mu0`.
fn gauss_from_recurrence(a: &[f64], b: &[f64], mu0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.len();
    let mut x = tridiagonal_eigenvalues(a.to_vec(), &b[1..])?;
    let eval = |t: f64| -> (f64, f64, f64, f64) {
        // returns (p_n, p_n', sum_{k<n} p_k^2, log scale)
        let (mut p0, mut p1) = (0.0f64, 1.0f64);
        let (mut d0, mut d1) = (0.0f64, 0.0f64);
        let mut sum = 1.0;
        let mut log_scale = 0.0;
        for k in 0..n {
            let p2 = ((t - a[k]) * p1 - b[k] * p0) / b[k + 1];
            let d2 = (p1 + (t - a[k]) * d1 - b[k] * d0) / b[k + 1];
            p0 = p1;
            p1 = p2;
            d0 = d1;
            d1 = d2;
            if k + 1 < n {
                sum += p1 * p1;
            }
            let big = p1.abs().max(d1.abs());
            if big > 1e150 {
                let f = big;
                p0 /= f;
                p1 /= f;
                d0 /= f;
                d1 /= f;
                sum /= f * f;
                log_scale += f.ln();
            }
        }
        (p1, d1, sum, log_scale)
    };
    for xi in x.iter_mut() {
        for _ in 0..6 {
            let (p, dp, _, _) = eval(*xi);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            *xi -= step;
            if step.abs() <= 4.0 * f64::EPSILON * xi.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
    }
    let log_mu0 = mu0.ln();
    let logw = x
        .iter()
        .map(|&t| {
            let (_, _, sum, ls) = eval(t);
            log_mu0 - sum.ln() - 2.0 * ls
        })
        .collect();
    Ok((x, logw))
}

fn jacobi_recurrence(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>, f64) {
    let ab = alpha + beta;
    let mut a = Vec::with_capacity(n);
    let mut b = vec![0.0; n + 1];
    for k in 0..n {
        let kf = k as f64;
        if k == 0 {
            a.push((beta - alpha) / (ab + 2.0));
        } else {
            let s = 2.0 * kf + ab;
            a.push((beta * beta - alpha * alpha) / (s * (s + 2.0)));
        }
    }
    for (k, bk) in b.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        let b2 = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            let s = 2.0 * kf + ab;
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        *bk = b2.sqrt();
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma(alpha + 1.0) * gamma(beta + 1.0) / gamma(ab + 2.0);
    (a, b, mu0)
}

fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if alpha == -0.5 && beta == -0.5 {
        // Chebyshev: closed form
        let x = (0..n)
            .map(|i| -(PI * (2 * i + 1) as f64 / (2 * n) as f64).cos())
            .collect();
        let lw = vec![(PI / n as f64).ln(); n];
        return Ok((x, lw));
    }
    let (a, b, mu0) = jacobi_recurrence(n, alpha, beta);
    let (mut x, lw) = gauss_from_recurrence(&a, &b, mu0)?;
    if alpha == beta {
        // exact symmetry
        for i in 0..n / 2 {
            let v = 0.5 * (x[n - 1 - i] - x[i]);
            x[i] = -v;
            x[n - 1 - i] = v;
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        let lw2: Vec<f64> = (0..n).map(|i| 0.5 * (lw[i] + lw[n - 1 - i])).collect();
        return Ok((x, lw2));
    }
    Ok((x, lw))
}

fn gauss_laguerre(n: usize, alpha: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let a: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let b: Vec<f64> = (0..=n).map(|k| (k as f64 * (k as f64 + alpha)).sqrt()).collect();
    gauss_from_recurrence(&a, &b, gamma(alpha + 1.0))
}

fn check_gauss_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_GAUSS_NODES {
        return Err(invalid(format!("rule size must be in 1..={MAX_GAUSS_NODES}, got {n}")));
    }
    Ok(())
}

fn sphere_rule(dim: usize, level: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    match dim {
        1 => Ok((vec![1.0, -1.0], vec![0.5, 0.5])),
        2 => {
            let count = 2 * level;
            let mut nodes = Vec::with_capacity(2 * count);
            for j in 0..count {
                let th = PI * j as f64 / level as f64;
                let (s, c) = th.sin_cos();
                nodes.push(c);
                nodes.push(s);
            }
            Ok((nodes, vec![1.0 / count as f64; count]))
        }
        _ => {
            let g = 0.5 * (dim as f64 - 3.0);
            let (s, lw) = gauss_jacobi(level, g, g)?;
            let total: f64 = lw.iter().map(|l| l.exp()).sum();
            let (sub_nodes, sub_w) = sphere_rule(dim - 1, level)?;
            let sub_count = sub_w.len();
            let mut nodes = Vec::with_capacity(level * sub_count * dim);
            let mut weights = Vec::with_capacity(level * sub_count);
            for (si, li) in s.iter().zip(&lw) {
                let wi = li.exp() / total;
                let rho = (1.0 - si * si).max(0.0).sqrt();
                for j in 0..sub_count {
                    nodes.push(*si);
                    nodes.extend(sub_nodes[j * (dim - 1)..(j + 1) * (dim - 1)].iter().map(|v| rho * v));
                    weights.push(wi * sub_w[j]);
                }
            }
            Ok((nodes, weights))
        }
    }
}

/// Build a rule. Sphere dimensions start at 1 (`S^0 = {±1}`).
pub fn make_rule(kind: RuleKind) -> Result<QuadratureRule> {
    let (dim, nodes, log_weights, weights) = match kind {
        RuleKind::Sphere { dim, level } => {
            if dim == 0 || level == 0 {
                return Err(invalid("sphere rule needs dim >= 1 and level >= 1"));
            }
            let count = if dim == 1 {
                2usize
            } else {
                (2 * level).saturating_mul(level.saturating_pow(dim as u32 - 2))
            };
            if count > MAX_SPHERE_NODES {
                return Err(invalid(format!("sphere rule with {count} nodes exceeds {MAX_SPHERE_NODES}")));
            }
            let (nodes, w) = sphere_rule(dim, level)?;
            (dim, nodes, w.iter().map(|v| v.ln()).collect(), w)
        }
        RuleKind::Interval { a, b, n } => {
            check_gauss_size(n)?;
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(invalid(format!("interval [{a}, {b}] is empty or unbounded")));
            }
            let (x, lw) = gauss_jacobi(n, 0.0, 0.0)?;
            let h = 0.5 * (b - a);
            let nodes = x.iter().map(|t| a + h * (t + 1.0)).collect();
            let lw: Vec<f64> = lw.iter().map(|l| l + h.ln()).collect();
            let w = lw.iter().map(|l| l.exp()).collect();
            (1, nodes, lw, w)
        }
        RuleKind::HalfLine { n, alpha } => {
            check_gauss_size(n)?;
            if !(alpha > -1.0) || !alpha.is_finite() {
                return Err(invalid(format!("Laguerre alpha must exceed -1, got {alpha}")));
            }
            let (x, lw) = gauss_laguerre(n, alpha)?;
            let w = lw.iter().map(|l| l.exp()).collect();
            (1, x, lw, w)
        }
        RuleKind::Jacobi { n, alpha, beta } => {
            check_gauss_size(n)?;
            if !(alpha > -1.0 && beta > -1.0) || !(alpha.is_finite() && beta.is_finite()) {
                return Err(invalid(format!("Jacobi exponents must exceed -1, got ({alpha}, {beta})")));
            }
            let (x, lw) = gauss_jacobi(n, alpha, beta)?;
            let w = lw.iter().map(|l| l.exp()).collect();
            (1, x, lw, w)
        }
    };
    Ok(QuadratureRule { kind, dim, nodes, weights, log_weights })
}

impl QuadratureRule {
    /// Shared immutable instance of `make_rule(kind)`.
    pub fn cached(kind: RuleKind) -> Result<Arc<QuadratureRule>> {
        static CACHE: OnceLock<Mutex<HashMap<String, Arc<QuadratureRule>>>> = OnceLock::new();
        let key = format!("{kind:?}");
        let cache = CACHE.get_or_init(Default::default);
        if let Some(r) = cache.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let rule = Arc::new(make_rule(kind)?);
        cache.lock().unwrap().insert(key, rule.clone());
        Ok(rule)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    /// Scalar node for one-dimensional rules.
    pub fn x(&self, i: usize) -> f64 {
        self.nodes[i * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    /// `Σ w_i f(x_i)` for any rule kind.
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let terms: Vec<Complex64> = self.iter().map(|(x, w)| f(x) * w).collect();
        pairwise_sum(&terms)
    }

    pub fn integrate_real<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64,
    {
        let terms: Vec<f64> = self.iter().map(|(x, w)| f(x) * w).collect();
        pairwise_sum_real(&terms)
    }

    fn require_halfline(&self) -> Result<f64> {
        match self.kind {
            RuleKind::HalfLine { alpha, .. } => Ok(alpha),
            other => Err(invalid(format!("half-line integration needs a half-line rule, got {other:?}"))),
        }
    }

    fn tail_checked(&self, terms: Vec<Complex64>) -> Result<HalfLineIntegral> {
        let value = pairwise_sum(&terms);
        let last = terms.last().map(|t| t.norm()).unwrap_or(0.0);
        let total = value.norm();
        let tail = if total > 0.0 { last / total } else if last == 0.0 { 0.0 } else { f64::INFINITY };
        if tail > TAIL_TOLERANCE {
            return Err(Error::TailTooLarge { ratio: tail });
        }
        Ok(HalfLineIntegral { value, tail })
    }

    /// `∫_0^∞ x^alpha e^{-x} g(x) dx`.
    pub fn integrate_halfline_weighted<F>(&self, g: F) -> Result<HalfLineIntegral>
    where
        F: Fn(f64) -> Complex64,
    {
        self.require_halfline()?;
        let terms = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| g(x) * w).collect();
        self.tail_checked(terms)
    }

    /// `∫_0^∞ f(x) dx` with the Laguerre weight divided out of `f`.
    pub fn integrate_halfline<F>(&self, f: F) -> Result<HalfLineIntegral>
    where
        F: Fn(f64) -> Complex64,
    {
        self.integrate_halfline_scaled(f, 1.0)
    }

    /// `∫_0^∞ f(x) dx = s ∫_0^∞ f(s y) dy`; `s` matches the decay rate of `f`.
    pub fn integrate_halfline_scaled<F>(&self, f: F, scale: f64) -> Result<HalfLineIntegral>
    where
        F: Fn(f64) -> Complex64,
    {
        let alpha = self.require_halfline()?;
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(invalid(format!("half-line scale must be positive, got {scale}")));
        }
        let terms = self
            .nodes
            .iter()
            .zip(&self.log_weights)
            .map(|(&y, &lw)| {
                let ext = (lw + y - alpha * y.ln()).exp();
                f(scale * y) * (ext * scale)
            })
            .collect();
        self.tail_checked(terms)
    }
}

/// `Σ w_i f(x_i)` over a sphere rule.
pub fn integrate_sphere<F>(rule: &QuadratureRule, f: F) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64,
{
    match rule.kind {
        RuleKind::Sphere { .. } => Ok(rule.integrate(f)),
        other => Err(invalid(format!("expected a sphere rule, got {other:?}"))),
    }
}

/// `∫_0^∞ f` with a half-line rule.
pub fn integrate_halfline<F>(rule: &QuadratureRule, f: F) -> Result<HalfLineIntegral>
where
    F: Fn(f64) -> Complex64,
{
    rule.integrate_halfline(f)
}

/// Composite Gauss–Legendre over `breaks[0] < breaks[1] < ...` with `order` nodes per panel.
pub fn integrate_panels<F>(breaks: &[f64], order: usize, f: F) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let base = QuadratureRule::cached(RuleKind::Interval { a: -1.0, b: 1.0, n: order })?;
    let mut terms = Vec::with_capacity(breaks.len().saturating_sub(1) * order);
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if !(b > a) {
            return Err(invalid(format!("panel breaks must increase, got {a} then {b}")));
        }
        let h = 0.5 * (b - a);
        for (x, w) in base.iter() {
            terms.push(f(a + h * (x[0] + 1.0)) * (w * h));
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Uniform panel breaks on `[a, b]`.
pub fn uniform_breaks(a: f64, b: f64, panels: usize) -> Vec<f64> {
    let h = (b - a) / panels as f64;
    (0..=panels).map(|i| if i == panels { b } else { a + h * i as f64 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::sphere_fourier;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn circle_rule_is_uniform() {
        let r = make_rule(RuleKind::Sphere { dim: 2, level: 5 }).unwrap();
        assert_eq!(r.len(), 10);
        for &w in r.weights() {
            assert_eq!(w, 0.1);
        }
        for (x, _) in r.iter() {
            assert_relative_eq!(x[0].hypot(x[1]), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sphere_weights_sum_to_one_and_are_positive() {
        for dim in 1..=5 {
            for level in [1, 3, 8] {
                let r = make_rule(RuleKind::Sphere { dim, level }).unwrap();
                let s: f64 = r.weights().iter().sum();
                assert!((s - 1.0).abs() < 1e-13, "dim={dim} level={level} sum={s}");
                assert!(r.weights().iter().all(|&w| w > 0.0));
                for (x, _) in r.iter() {
                    let n: f64 = x.iter().map(|v| v * v).sum();
                    assert!((n - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn interval_exactness() {
        let r = make_rule(RuleKind::Interval { a: -1.0, b: 1.0, n: 2 }).unwrap();
        let v = r.integrate_real(|x| x[0] * x[0]);
        assert_relative_eq!(v, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(r.x(0), -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        let r = make_rule(RuleKind::Interval { a: 0.0, b: 3.0, n: 64 }).unwrap();
        assert_relative_eq!(r.integrate_real(|x| x[0].powi(127)), 3f64.powi(128) / 128.0, max_relative = 1e-12);
    }

    #[test]
    fn sphere_moments() {
        // E[u_1^{2j}] on S^{d-1} = Γ(d/2) Γ(j+1/2) / (Γ(1/2) Γ(j+d/2))
        let moment = |d: usize, j: i32| {
            let df = d as f64;
            gamma(0.5 * df) * gamma(j as f64 + 0.5) / (gamma(0.5) * gamma(j as f64 + 0.5 * df))
        };
        for d in 2..=5 {
            let r = make_rule(RuleKind::Sphere { dim: d, level: 6 }).unwrap();
            for j in 0..=5 {
                for axis in 0..d {
                    let v = integrate_sphere(&r, |x| c(x[axis].powi(2 * j))).unwrap().re;
                    assert!((v - moment(d, j)).abs() < 1e-13, "d={d} j={j} axis={axis}");
                }
            }
        }
        let r = make_rule(RuleKind::Sphere { dim: 4, level: 4 }).unwrap();
        assert_relative_eq!(integrate_sphere(&r, |x| c(x[0] * x[0])).unwrap().re, 0.25, epsilon = 1e-14);
        assert_relative_eq!(integrate_sphere(&r, |x| c(x[0].powi(4))).unwrap().re, 0.125, epsilon = 1e-14);
        assert_relative_eq!(integrate_sphere(&r, |_| c(1.0)).unwrap().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn odd_functions_vanish() {
        for d in 1..=4 {
            let r = make_rule(RuleKind::Sphere { dim: d, level: 7 }).unwrap();
            let v = integrate_sphere(&r, |x| c(x[0].powi(3) + x[d - 1] * 0.3 + x[0] * x[d - 1] * x[d - 1]))
                .unwrap();
            assert!(v.norm() < 1e-13);
        }
    }

    #[test]
    fn oscillatory_sphere_integrals_converge_on_doubling() {
        for d in 2..=4 {
            let lo = make_rule(RuleKind::Sphere { dim: d, level: 12 }).unwrap();
            let hi = make_rule(RuleKind::Sphere { dim: d, level: 24 }).unwrap();
            for &(a0, a1) in &[(4.0, 0.0), (1.7, -2.9), (-2.0, 3.4)] {
                let a: Vec<f64> = (0..d).map(|i| if i == 0 { a0 } else if i == d - 1 { a1 } else { 0.5 }).collect();
                let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                let f = |x: &[f64]| {
                    let p: f64 = x.iter().zip(&a).map(|(u, v)| u * v).sum();
                    Complex64::new(0.0, p).exp()
                };
                let v1 = lo.integrate(f);
                let v2 = hi.integrate(f);
                assert!((v1 - v2).norm() < 1e-9);
                assert!((v2.re - sphere_fourier(d, norm)).abs() < 1e-12 && v2.im.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn halfline_examples() {
        let r = make_rule(RuleKind::HalfLine { n: 64, alpha: 0.0 }).unwrap();
        let v = r.integrate_halfline(|x| c((-x).exp())).unwrap();
        assert_relative_eq!(v.value.re, 1.0, epsilon = 1e-13);
        let v = r.integrate_halfline(|x| c(x.powi(3) * (-x).exp())).unwrap();
        assert_relative_eq!(v.value.re, 6.0, max_relative = 1e-13);
        let v = r.integrate_halfline_weighted(|x| c(x.powi(3))).unwrap();
        assert_relative_eq!(v.value.re, 6.0, max_relative = 1e-13);
        assert!(v.tail <= TAIL_TOLERANCE);
    }

    #[test]
    fn halfline_scaling_and_tail_error() {
        let r = make_rule(RuleKind::HalfLine { n: 128, alpha: 0.0 }).unwrap();
        let v = r.integrate_halfline_scaled(|x| c((-3.0 * x).exp()), 1.0 / 3.0).unwrap();
        assert_relative_eq!(v.value.re, 1.0 / 3.0, max_relative = 1e-13);
        // algebraic decay cannot be resolved
        let e = r.integrate_halfline(|x| c(1.0 / (1.0 + x * x))).unwrap_err();
        assert!(matches!(e, Error::TailTooLarge { .. }));
        let s = make_rule(RuleKind::Sphere { dim: 2, level: 3 }).unwrap();
        assert!(s.integrate_halfline(|_| c(1.0)).is_err());
    }

    #[test]
    fn large_laguerre_rules_have_accurate_small_nodes() {
        let r = make_rule(RuleKind::HalfLine { n: 512, alpha: 1.0 }).unwrap();
        // Γ(2) moment and a Laplace transform: ∫ x e^{-x} e^{-x/2} = 1/(1.5)^2
        let v = r.integrate_halfline_weighted(|_| c(1.0)).unwrap().value.re;
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        let v = r.integrate_halfline_weighted(|x| c((-0.5 * x).exp())).unwrap().value.re;
        assert_relative_eq!(v, 1.0 / 2.25, max_relative = 1e-12);
    }

    #[test]
    fn chebyshev_and_jacobi_moments() {
        let r = make_rule(RuleKind::Jacobi { n: 8, alpha: -0.5, beta: -0.5 }).unwrap();
        // ∫ x^2 / sqrt(1-x^2) = π/2
        assert_relative_eq!(r.integrate_real(|x| x[0] * x[0]), PI / 2.0, max_relative = 1e-14);
        let r = make_rule(RuleKind::Jacobi { n: 10, alpha: 1.5, beta: 0.0 }).unwrap();
        // ∫ (1-x)^{3/2} dx = 2^{5/2}/(5/2)
        assert_relative_eq!(r.integrate_real(|_| 1.0), 2f64.powf(2.5) / 2.5, max_relative = 1e-14);
    }

    #[test]
    fn rules_are_deterministic() {
        let k = RuleKind::Sphere { dim: 3, level: 9 };
        let a = make_rule(k).unwrap();
        let b = make_rule(k).unwrap();
        assert!(a.nodes.iter().zip(&b.nodes).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.weights.iter().zip(&b.weights).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn rejects_bad_kinds() {
        assert!(make_rule(RuleKind::Interval { a: 0.0, b: 1.0, n: 513 }).is_err());
        assert!(make_rule(RuleKind::Interval { a: 1.0, b: 1.0, n: 3 }).is_err());
        assert!(make_rule(RuleKind::HalfLine { n: 4, alpha: -1.0 }).is_err());
        assert!(make_rule(RuleKind::Sphere { dim: 0, level: 3 }).is_err());
        assert!(make_rule(RuleKind::Sphere { dim: 9, level: 30 }).is_err());
    }

    #[test]
    fn panels_integrate_oscillation() {
        let v = integrate_panels(&uniform_breaks(0.0, 40.0, 20), 16, |x| c(x.cos())).unwrap();
        assert_relative_eq!(v.re, 40f64.sin(), epsilon = 1e-13);
    }

    proptest! {
        #[test]
        fn symmetric_jacobi_even_moments(n in 2usize..40, g in -0.9f64..3.0, j in 0usize..10) {
            prop_assume!(2 * j < 2 * n);
            let r = make_rule(RuleKind::Jacobi { n, alpha: g, beta: g }).unwrap();
            let v = r.integrate_real(|x| x[0].powi(2 * j as i32));
            // B(j + 1/2, g + 1)
            let want = gamma(j as f64 + 0.5) * gamma(g + 1.0) / gamma(j as f64 + g + 1.5);
            prop_assert!((v - want).abs() <= 1e-12 * want.max(1.0));
        }

        #[test]
        fn laguerre_moments(n in 40usize..200, alpha in -0.5f64..4.0, j in 0usize..8) {
            let r = make_rule(RuleKind::HalfLine { n, alpha }).unwrap();
            let v = r.integrate_halfline_weighted(|x| c(x.powi(j as i32)));
            let want = gamma(alpha + j as f64 + 1.0);
            let got = v.map(|h| h.value.re).unwrap_or(f64::NAN);
            prop_assert!((got - want).abs() <= 1e-11 * want);
        }

        #[test]
        fn legendre_polynomial_exactness(n in 1usize..60, coeffs in proptest::collection::vec(-1.0f64..1.0, 1..8)) {
            let deg = coeffs.len() - 1;
            prop_assume!(deg < 2 * n);
            let r = make_rule(RuleKind::Interval { a: -1.0, b: 1.0, n }).unwrap();
            let got = r.integrate_real(|x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x[0] + c));
            let want: f64 = coeffs.iter().enumerate()
                .map(|(k, c)| if k % 2 == 0 { 2.0 * c / (k as f64 + 1.0) } else { 0.0 }).sum();
            prop_assert!((got - want).abs() < 1e-12);
        }
    }
}
