//! The three spherical-mean operators and their eigenvalues on `e_k^a`.
//!
//! All measures are probability measures. `f * μ` is evaluated at `p` as
//! `∫ f(p · y⁻¹) dμ(y)`; for `y = (r w, s u)` this is
//! `f(z - r w, t - s u - (r/2)[z, w])`.
//!
//! The Korányi-sphere measure is the radial superposition of bi-sphere measures
//! `μ_{sρ, s²√(1-ρ⁴)}` with weight `ρ^{2n-1}(1-ρ⁴)^{(m-2)/2}`. In `v = ρ²` the weight
//! becomes `½ v^{n-1}(1-v)^{(m-2)/2}(1+v)^{(m-2)/2}`, integrated by Gauss–Jacobi on
//! `[0, 1]`; bi-sphere averages are even in both radii, so the remaining integrand is
//! analytic in `v`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{GroupPoint, HTypeGroup};
use crate::quadrature::{integrate_panels, pairwise_sum, uniform_breaks, QuadratureRule, RuleKind};
use crate::special::{eigen_coeff_f64, gamma, phi, sphere_fourier};
use crate::transforms::{sphere_area, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeasureSpec {
    /// Normalized surface measure of radius `r` in the complement of the centre.
    VSphere { r: f64 },
    /// Product of the `r`-sphere in `𝔳` and the `s`-sphere in the centre.
    BiSphere { r: f64, s: f64 },
    /// Normalized measure on the Korányi sphere of radius `s`.
    Homogeneous { s: f64 },
}

impl MeasureSpec {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MeasureSpec::VSphere { r } => r > 0.0 && r.is_finite(),
            MeasureSpec::BiSphere { r, s } => r > 0.0 && s > 0.0 && r.is_finite() && s.is_finite(),
            MeasureSpec::Homogeneous { s } => s > 0.0 && s.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("measure radii must be positive and finite: {self:?}")))
        }
    }
}

/// Quadrature levels for the spherical means.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanRules {
    /// Sphere level on `S^{2n-1}`.
    pub z_level: usize,
    /// Sphere level on `S^{m-1}`.
    pub t_level: usize,
    /// Gauss–Jacobi points for the Korányi radial variable.
    pub radial_points: usize,
}

impl Default for MeanRules {
    fn default() -> Self {
        Self { z_level: 12, t_level: 10, radial_points: 16 }
    }
}

fn check_point(g: &HTypeGroup, p: &GroupPoint) -> Result<()> {
    if p.z.len() != 2 * g.n {
        return Err(Error::DimensionMismatch { expected: 2 * g.n, got: p.z.len() });
    }
    if p.t.len() != g.m {
        return Err(Error::DimensionMismatch { expected: g.m, got: p.t.len() });
    }
    Ok(())
}

/// `f * μ_{r,s}` at `p`; `s = 0` gives the `𝔳`-sphere mean.
fn bisphere_unchecked(
    g: &HTypeGroup,
    f: &ScalarField,
    r: f64,
    s: f64,
    p: &GroupPoint,
    zrule: &QuadratureRule,
    trule: Option<&QuadratureRule>,
) -> Complex64 {
    let mut q = p.clone();
    let mut inner = Vec::with_capacity(trule.map_or(1, |t| t.len()));
    let mut outer = Vec::with_capacity(zrule.len());
    for (w, ww) in zrule.iter() {
        for (qz, (pz, wz)) in q.z.iter_mut().zip(p.z.iter().zip(w)) {
            *qz = pz - r * wz;
        }
        let br = g.bracket_unchecked(&p.z, w);
        let base: Vec<f64> = p.t.iter().zip(&br).map(|(t, b)| t - 0.5 * r * b).collect();
        let val = match trule {
            None => {
                q.t.copy_from_slice(&base);
                f.evaluate(&q)
            }
            Some(tr) => {
                inner.clear();
                for (u, wu) in tr.iter() {
                    for (qt, (b, uu)) in q.t.iter_mut().zip(base.iter().zip(u)) {
                        *qt = b - s * uu;
                    }
                    inner.push(f.evaluate(&q) * wu);
                }
                pairwise_sum(&inner)
            }
        };
        outer.push(val * ww);
    }
    pairwise_sum(&outer)
}

fn z_rule(g: &HTypeGroup, rules: &MeanRules) -> Result<std::sync::Arc<QuadratureRule>> {
    QuadratureRule::cached(RuleKind::Sphere { dim: 2 * g.n, level: rules.z_level })
}

fn t_rule(g: &HTypeGroup, rules: &MeanRules) -> Result<std::sync::Arc<QuadratureRule>> {
    QuadratureRule::cached(RuleKind::Sphere { dim: g.m, level: rules.t_level })
}

/// Gauss–Jacobi nodes `v` and weights for `½ v^{n-1}(1-v²)^{(m-2)/2}` on `[0, 1]`,
/// normalized to total mass 1.
fn korany_radial_rule(n: usize, m: usize, points: usize) -> Result<Vec<(f64, f64)>> {
    let alpha = 0.5 * (m as f64 - 2.0);
    let rule = QuadratureRule::cached(RuleKind::Jacobi { n: points, alpha, beta: n as f64 - 1.0 })?;
    // x = 2v - 1: (1-x)^α (1+x)^β = 2^{α+β} (1-v)^α v^β; the constant cancels on normalizing.
    let raw: Vec<(f64, f64)> = rule
        .iter()
        .map(|(x, w)| {
            let v = 0.5 * (x[0] + 1.0);
            (v, w * (1.0 + v).powf(alpha))
        })
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    Ok(raw.into_iter().map(|(v, w)| (v, w / total)).collect())
}

/// Korányi-sphere mean through the radial decomposition in `v = ρ²`; valid for every `m`.
pub fn homogeneous_mean_radial(
    g: &HTypeGroup,
    f: &ScalarField,
    s: f64,
    p: &GroupPoint,
    rules: &MeanRules,
) -> Result<Complex64> {
    MeasureSpec::Homogeneous { s }.validate()?;
    check_point(g, p)?;
    let zr = z_rule(g, rules)?;
    let tr = t_rule(g, rules)?;
    let radial = korany_radial_rule(g.n, g.m, rules.radial_points)?;
    let terms: Vec<Complex64> = radial
        .iter()
        .map(|&(v, w)| {
            let rho = s * v.sqrt();
            let tau = s * s * (1.0 - v * v).max(0.0).sqrt();
            bisphere_unchecked(g, f, rho, tau, p, &zr, Some(&tr)) * w
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Heisenberg-group (`m = 1`) Korányi mean from the angular form
/// `∝ ∫_{-π/2}^{π/2} (f * μ_{s√cos θ})(z, t - s² sin θ) cos^{n-1}θ dθ`, Gauss–Legendre in `θ`.
pub fn homogeneous_mean_angular(
    g: &HTypeGroup,
    f: &ScalarField,
    s: f64,
    p: &GroupPoint,
    rules: &MeanRules,
) -> Result<Complex64> {
    MeasureSpec::Homogeneous { s }.validate()?;
    check_point(g, p)?;
    if g.m != 1 {
        return Err(invalid(format!("the angular form needs a one-dimensional centre, got m = {}", g.m)));
    }
    let zr = z_rule(g, rules)?;
    let theta = QuadratureRule::cached(RuleKind::Interval { a: -0.5 * PI, b: 0.5 * PI, n: 2 * rules.radial_points })?;
    let mut norm = 0.0;
    let mut terms = Vec::with_capacity(theta.len());
    let mut q = p.clone();
    for (th, w) in theta.iter() {
        let (sn, cs) = th[0].sin_cos();
        let wt = w * cs.powi(g.n as i32 - 1);
        norm += wt;
        q.t[0] = p.t[0] - s * s * sn;
        terms.push(bisphere_unchecked(g, f, s * cs.sqrt(), 0.0, &q, &zr, None) * wt);
    }
    Ok(pairwise_sum(&terms) / norm)
}

/// `f * μ` at `p` for any of the three measures.
pub fn spherical_mean(
    g: &HTypeGroup,
    f: &ScalarField,
    spec: MeasureSpec,
    p: &GroupPoint,
    rules: &MeanRules,
) -> Result<Complex64> {
    spec.validate()?;
    check_point(g, p)?;
    match spec {
        MeasureSpec::VSphere { r } => {
            let zr = z_rule(g, rules)?;
            Ok(bisphere_unchecked(g, f, r, 0.0, p, &zr, None))
        }
        MeasureSpec::BiSphere { r, s } => {
            let zr = z_rule(g, rules)?;
            let tr = t_rule(g, rules)?;
            Ok(bisphere_unchecked(g, f, r, s, p, &zr, Some(&tr)))
        }
        MeasureSpec::Homogeneous { s } if g.m == 1 => homogeneous_mean_angular(g, f, s, p, rules),
        MeasureSpec::Homogeneous { s } => homogeneous_mean_radial(g, f, s, p, rules),
    }
}

/// Gauss–Jacobi points used by [`eigenvalue`] for the Korányi radial integral.
pub const EIGEN_RADIAL_POINTS: usize = 64;

/// Scalar `e(λ)` with `e_k^a * μ = e(|a|) e_k^a`.
///
/// The Korányi case evaluates the radial integral with the Laguerre factor at
/// radius `s ρ`.
pub fn eigenvalue(g: &HTypeGroup, k: usize, spec: MeasureSpec, lambda: f64) -> Result<f64> {
    spec.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let (n, m) = (g.n, g.m);
    let c = eigen_coeff_f64(k, n);
    Ok(match spec {
        MeasureSpec::VSphere { r } => c * phi(k, n, lambda, r),
        MeasureSpec::BiSphere { r, s } => c * phi(k, n, lambda, r) * sphere_fourier(m, s * lambda),
        MeasureSpec::Homogeneous { s } => {
            let radial = korany_radial_rule(n, m, EIGEN_RADIAL_POINTS)?;
            let sum: f64 = radial
                .iter()
                .map(|&(v, w)| {
                    let tau = s * s * (1.0 - v * v).max(0.0).sqrt();
                    w * sphere_fourier(m, tau * lambda) * phi(k, n, lambda, s * v.sqrt())
                })
                .sum();
            c * sum
        }
    })
}

/// `κ = |S^{2n-1}| |S^{m-1}| B(n/2, m/2) / 2`, so that
/// `∫_G f = κ ∫_0^∞ σ_R(f) R^{Q-1} dR` with `σ_R` normalized.
pub fn polar_constant_exact(n: usize, m: usize) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let beta = gamma(0.5 * nf) * gamma(0.5 * mf) / gamma(0.5 * (nf + mf));
    sphere_area(2 * n) * sphere_area(m) * beta / 2.0
}

/// `∫_0^{R_max} σ_R(f) R^{Q-1} dR` on composite Gauss–Legendre panels, with `σ_R(f)`
/// the Korányi mean of `f` at the identity.
pub fn polar_profile_integral(
    g: &HTypeGroup,
    f: &ScalarField,
    r_max: f64,
    panels: usize,
    rules: &MeanRules,
) -> Result<Complex64> {
    if !(r_max > 0.0) || panels == 0 {
        return Err(invalid("polar integral needs r_max > 0 and at least one panel"));
    }
    let e = g.identity();
    let q = g.homogeneous_dim() as i32;
    let failure = RefCell::new(None);
    let v = integrate_panels(&uniform_breaks(0.0, r_max, panels), 16, |r| {
        match spherical_mean(g, f, MeasureSpec::Homogeneous { s: r }, &e, rules) {
            Ok(mass) => mass * r.powi(q - 1),
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                Complex64::new(0.0, 0.0)
            }
        }
    })?;
    match failure.into_inner() {
        Some(err) => Err(err),
        None => Ok(v),
    }
}

/// Fit `κ` from a field with known total integral.
pub fn calibrate_polar_constant(
    g: &HTypeGroup,
    f: &ScalarField,
    total_integral: f64,
    r_max: f64,
    rules: &MeanRules,
) -> Result<f64> {
    let profile = polar_profile_integral(g, f, r_max, 12, rules)?;
    if profile.re.abs() < f64::MIN_POSITIVE {
        return Err(invalid("test field has vanishing polar profile"));
    }
    Ok(total_integral / profile.re)
}

/// `∫_G exp(-(|z|² + |t|²)/σ²) = (π σ²)^{(2n+m)/2}`.
pub fn gaussian_integral(n: usize, m: usize, sigma: f64) -> f64 {
    (PI * sigma * sigma).powf(0.5 * (2 * n + m) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::build_htype;
    use crate::transforms::{e_field, DecayHint, FieldDescriptor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one() -> ScalarField {
        ScalarField::new(FieldDescriptor::Custom { label: "one".into() }, DecayHint::None, |_| Complex64::new(1.0, 0.0))
    }

    fn test_field() -> ScalarField {
        ScalarField::new(FieldDescriptor::Custom { label: "mixed".into() }, DecayHint::Exponential, |p| {
            let z2: f64 = p.z.iter().map(|v| v * v).sum();
            let lin: f64 = p.z.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v).sum::<f64>()
                + p.t.iter().map(|v| 0.7 * v).sum::<f64>();
            Complex64::new((1.0 + 0.3 * lin) * (-0.5 * z2 - 0.3 * p.t.iter().map(|v| v * v).sum::<f64>()).exp(), 0.2 * lin)
        })
    }

    #[test]
    fn means_of_constants_are_one() {
        let rules = MeanRules { z_level: 6, t_level: 6, radial_points: 8 };
        for (n, m) in [(1, 1), (2, 2), (2, 3)] {
            let g = build_htype(n, m).unwrap();
            let p = g.random_point(&mut ChaCha8Rng::seed_from_u64(1), 1.0);
            for spec in [MeasureSpec::VSphere { r: 0.7 }, MeasureSpec::BiSphere { r: 0.7, s: 1.2 }, MeasureSpec::Homogeneous { s: 1.1 }] {
                let v = spherical_mean(&g, &one(), spec, &p, &rules).unwrap();
                assert!((v - 1.0).norm() < 1e-13, "({n},{m}) {spec:?}");
            }
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let g = build_htype(2, 2).unwrap();
        let v = eigenvalue(&g, 0, MeasureSpec::VSphere { r: 0.9 }, 1.7).unwrap();
        assert!((v - (-1.7f64 * 0.81 / 4.0).exp()).abs() < 1e-15);
        for spec in [MeasureSpec::VSphere { r: 0.9 }, MeasureSpec::BiSphere { r: 0.9, s: 2.0 }, MeasureSpec::Homogeneous { s: 1.5 }] {
            assert!((eigenvalue(&g, 0, spec, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        }
        let h = build_htype(1, 1).unwrap();
        assert!(eigenvalue(&h, 1, MeasureSpec::VSphere { r: 1.0 }, 2.0).unwrap().abs() < 1e-15);
        assert!(eigenvalue(&h, 1, MeasureSpec::VSphere { r: 0.0 }, 2.0).is_err());
    }

    #[test]
    fn vsphere_and_bisphere_eigenrelations() {
        let rules = MeanRules::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (n, m) in [(1, 1), (2, 3)] {
            let g = build_htype(n, m).unwrap();
            for k in 0..=3 {
                let a: Vec<f64> = (0..m).map(|i| if i == 0 { 1.3 } else { 0.0 }).collect();
                let e = e_field(&g, k, &a).unwrap();
                let p = g.random_point(&mut rng, 1.0);
                for spec in [MeasureSpec::VSphere { r: 0.8 }, MeasureSpec::BiSphere { r: 1.1, s: 0.6 }] {
                    let got = spherical_mean(&g, &e, spec, &p, &rules).unwrap();
                    let want = e.evaluate(&p) * eigenvalue(&g, k, spec, 1.3).unwrap();
                    assert!((got - want).norm() <= 1e-6 * e.evaluate(&p).norm() + 1e-9, "({n},{m}) k={k} {spec:?}");
                }
            }
        }
    }

    #[test]
    fn homogeneous_eigenrelation_uses_scaled_radius() {
        let rules = MeanRules { z_level: 10, t_level: 8, radial_points: 14 };
        let g = build_htype(2, 2).unwrap();
        let a = [0.5, -0.5];
        let lam = (0.5f64).sqrt();
        let p = g.random_point(&mut ChaCha8Rng::seed_from_u64(4), 0.8);
        for k in 0..=2 {
            let e = e_field(&g, k, &a).unwrap();
            let got = spherical_mean(&g, &e, MeasureSpec::Homogeneous { s: 1.4 }, &p, &rules).unwrap();
            let want = e.evaluate(&p) * eigenvalue(&g, k, MeasureSpec::Homogeneous { s: 1.4 }, lam).unwrap();
            assert!((got - want).norm() <= 1e-5 * e.evaluate(&p).norm() + 1e-9, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn heisenberg_angular_and_radial_forms_agree() {
        let rules = MeanRules { z_level: 16, t_level: 4, radial_points: 24 };
        let g = build_htype(2, 1).unwrap();
        let f = test_field();
        let p = g.random_point(&mut ChaCha8Rng::seed_from_u64(2), 0.6);
        for &s in &[0.5, 1.0, 1.7] {
            let a = homogeneous_mean_angular(&g, &f, s, &p, &rules).unwrap();
            let r = homogeneous_mean_radial(&g, &f, s, &p, &rules).unwrap();
            assert!((a - r).norm() < 1e-6 * a.norm().max(1e-3), "s={s}: {a} vs {r}");
        }
    }

    #[test]
    fn translation_equivariance() {
        let rules = MeanRules { z_level: 8, t_level: 6, radial_points: 8 };
        let g = build_htype(2, 3).unwrap();
        let f = test_field();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let q = g.random_point(&mut rng, 0.5);
        let p = g.random_point(&mut rng, 0.5);
        let fq = f.left_translate(&g, &q);
        let qp = g.multiply(&q, &p).unwrap();
        for spec in [MeasureSpec::VSphere { r: 0.8 }, MeasureSpec::BiSphere { r: 0.5, s: 0.9 }, MeasureSpec::Homogeneous { s: 0.9 }] {
            let lhs = spherical_mean(&g, &fq, spec, &p, &rules).unwrap();
            let rhs = spherical_mean(&g, &f, spec, &qp, &rules).unwrap();
            assert!((lhs - rhs).norm() < 1e-9);
        }
    }

    #[test]
    fn polar_constant_heisenberg() {
        assert!((polar_constant_exact(1, 1) - 2.0 * PI * PI).abs() < 1e-12);
        let rules = MeanRules { z_level: 16, t_level: 4, radial_points: 40 };
        let g = build_htype(1, 1).unwrap();
        let k1 = calibrate_polar_constant(&g, &ScalarField::gaussian(1.0).unwrap(), gaussian_integral(1, 1, 1.0), 7.0, &rules).unwrap();
        let k2 = calibrate_polar_constant(&g, &ScalarField::gaussian(0.6).unwrap(), gaussian_integral(1, 1, 0.6), 4.5, &rules).unwrap();
        assert!((k1 - polar_constant_exact(1, 1)).abs() < 1e-6 * k1);
        assert!((k1 - k2).abs() < 1e-6 * k1);
    }
}
