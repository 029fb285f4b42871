//! Bi-radial fields annihilated by a single spherical mean, and the `L^p` threshold
//! `2m/(m-1)` they sit on.
//!
//! Every field here has the form `C φ_k^λ(|z|) b_m(λ|t|)` with `C = 1/C(k+n-1, k)`, so
//! its value at the identity is 1 and its sup-norm is 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{norm, GroupPoint, HTypeGroup};
use crate::means::{eigenvalue, spherical_mean, MeanRules, MeasureSpec};
use crate::quadrature::{integrate_panels, uniform_breaks, QuadratureRule, RuleKind};
use crate::special::{bessel_zeros, binomial, find_zero, phi, sphere_fourier, ZeroFamily};
use crate::transforms::{sphere_area, DecayHint, FieldDescriptor, ScalarField};

/// Which factor of the bi-spherical eigenvalue is forced to vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroChoice {
    /// `φ_k^λ(r) = 0`.
    Laguerre,
    /// `b_m(λ s) = 0`.
    Bessel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Variant {
    VSphere { k: usize, r: f64 },
    BiSphere { k: usize, r: f64, s: f64, zero: ZeroChoice },
}

/// A nonzero bounded field killed by one spherical mean.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub field: ScalarField,
    pub spec: MeasureSpec,
    pub variant: Variant,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Spectral radius `λ` (the `s*` of the one-sphere case).
    pub lambda: f64,
    /// `1/C(k+n-1, k)`.
    pub normalization: f64,
    /// The mean's eigenvalue on `field`; zero up to rounding.
    pub predicted_eigenvalue: f64,
}

/// `C φ_k^λ(|z|) b_m(λ|t|)`.
pub fn biradial_field(n: usize, m: usize, k: usize, lambda: f64, params: Vec<f64>, family: &str) -> ScalarField {
    let c = 1.0 / binomial(k + n - 1, k);
    ScalarField::new(
        FieldDescriptor::Counterexample { family: family.to_string(), params },
        DecayHint::Polynomial { rate: 0.5 * (m as f64 - 1.0) },
        move |p| Complex64::new(c * phi(k, n, lambda, norm(&p.z)) * sphere_fourier(m, lambda * norm(&p.t)), 0.0),
    )
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn make_counterexample(g: &HTypeGroup, variant: Variant) -> Result<Counterexample> {
    let (n, m) = (g.n, g.m);
    let (k, spec, lambda, family) = match variant {
        Variant::VSphere { k, r } => {
            positive("r", r)?;
            if k == 0 {
                return Err(invalid("the one-sphere construction needs k >= 1"));
            }
            let x = find_zero(ZeroFamily::Laguerre { k, alpha: n as f64 - 1.0 }, 1)?;
            (k, MeasureSpec::VSphere { r }, 2.0 * x / (r * r), "v_sphere")
        }
        Variant::BiSphere { k, r, s, zero } => {
            positive("r", r)?;
            positive("s", s)?;
            let lambda = match zero {
                ZeroChoice::Laguerre => {
                    if k == 0 {
                        return Err(invalid("a Laguerre zero needs k >= 1"));
                    }
                    2.0 * find_zero(ZeroFamily::Laguerre { k, alpha: n as f64 - 1.0 }, 1)? / (r * r)
                }
                ZeroChoice::Bessel => find_zero(ZeroFamily::Bessel { order: 0.5 * m as f64 - 1.0 }, 1)? / s,
            };
            (k, MeasureSpec::BiSphere { r, s }, lambda, "bi_sphere")
        }
    };
    build(g, variant, k, spec, lambda, family)
}

fn build(g: &HTypeGroup, variant: Variant, k: usize, spec: MeasureSpec, lambda: f64, family: &str) -> Result<Counterexample> {
    let (n, m) = (g.n, g.m);
    let field = biradial_field(n, m, k, lambda, vec![k as f64, lambda], family);
    Ok(Counterexample {
        field,
        spec,
        variant,
        n,
        m,
        k,
        lambda,
        normalization: 1.0 / binomial(k + n - 1, k),
        predicted_eigenvalue: eigenvalue(g, k, spec, lambda)?,
    })
}

impl Counterexample {
    /// Same construction with `λ` multiplied by `factor`; no longer annihilated in general.
    pub fn perturbed(&self, g: &HTypeGroup, factor: f64) -> Result<Counterexample> {
        positive("factor", factor)?;
        build(g, self.variant, self.k, self.spec, self.lambda * factor, "perturbed")
    }

    /// The same field under a different measure.
    pub fn with_spec(&self, g: &HTypeGroup, spec: MeasureSpec) -> Result<Counterexample> {
        Ok(Counterexample { spec, predicted_eigenvalue: eigenvalue(g, self.k, spec, self.lambda)?, ..self.clone() })
    }
}

/// `max_p |(F * μ)(p)|`; `F` has sup-norm 1.
pub fn annihilation_residual(g: &HTypeGroup, c: &Counterexample, points: &[GroupPoint], rules: &MeanRules) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        worst = worst.max(spherical_mean(g, &c.field, c.spec, p, rules)?.norm());
    }
    Ok(worst)
}

/// `Π f(z, t)`: the average of `f` over `S^{2n-1}|z| × S^{m-1}|t|`.
pub fn biradial_average(g: &HTypeGroup, f: &ScalarField, p: &GroupPoint, rules: &MeanRules) -> Result<Complex64> {
    if p.z.len() != 2 * g.n || p.t.len() != g.m {
        return Err(Error::DimensionMismatch { expected: 2 * g.n + g.m, got: p.z.len() + p.t.len() });
    }
    let zr = QuadratureRule::cached(RuleKind::Sphere { dim: 2 * g.n, level: rules.z_level })?;
    let tr = QuadratureRule::cached(RuleKind::Sphere { dim: g.m, level: rules.t_level })?;
    let (rz, rt) = (norm(&p.z), norm(&p.t));
    let mut q = p.clone();
    Ok(zr
        .iter()
        .map(|(w, ww)| {
            for (qz, wz) in q.z.iter_mut().zip(w) {
                *qz = rz * wz;
            }
            let inner: Complex64 = tr
                .iter()
                .map(|(u, wu)| {
                    for (qt, ut) in q.t.iter_mut().zip(u) {
                        *qt = rt * ut;
                    }
                    f.evaluate(&q) * wu
                })
                .sum();
            inner * ww
        })
        .sum())
}

/// `Π(x ↦ Φ(q·x))` at `p`, which equals `Φ(q) Φ(p)` for bi-spherical `Φ`.
pub fn translated_average(g: &HTypeGroup, f: &ScalarField, q: &GroupPoint, p: &GroupPoint, rules: &MeanRules) -> Result<Complex64> {
    biradial_average(g, &f.left_translate(g, q), p, rules)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProbe {
    pub p: f64,
    /// `∫_{2^i ≤ |t| ≤ 2^{i+1}} ∫ |F|^p dz dt`.
    pub masses: Vec<f64>,
    /// Fitted ratio of consecutive annulus masses.
    pub rate: f64,
    /// Radial density exponent `β` with annulus mass `~ R^{β+1}`.
    pub fitted_exponent: f64,
    /// `m - 1 - p(m-1)/2` from `|b_m(x)| ~ x^{-(m-1)/2}`.
    pub predicted_exponent: f64,
    pub verdict: Verdict,
}

/// `p* = 2m/(m-1)`; infinite for `m = 1`.
pub fn lp_threshold(m: usize) -> f64 {
    if m <= 1 {
        f64::INFINITY
    } else {
        2.0 * m as f64 / (m as f64 - 1.0)
    }
}

/// Relative band around rate 1 in which the probe declines to decide.
pub const RATE_BAND: f64 = 0.03;

/// Annulus masses of `|F|^p` in the central variable, fitted to a geometric rate over the
/// outer half of the annuli. The `z` integral factors out and is computed once.
pub fn lp_decay_probe(c: &Counterexample, p: f64, annuli: usize) -> Result<LpProbe> {
    if !(1.0..=10.0).contains(&p) {
        return Err(invalid(format!("exponent p must lie in [1, 10], got {p}")));
    }
    if !(4..=12).contains(&annuli) {
        return Err(invalid(format!("annulus count must lie in 4..=12, got {annuli}")));
    }
    let (n, m, k, lam) = (c.n, c.m, c.k, c.lambda);
    let abs_pow = |v: f64| Complex64::new(v.abs().powf(p), 0.0);

    // |φ_k^λ|^p decays like exp(-pλρ²/4): cut where the exponent reaches 80
    let z_cut = (320.0 / (p * lam)).sqrt() + 1.0;
    let z_mass = integrate_panels(&uniform_breaks(0.0, z_cut, 64), 16, |rho| {
        abs_pow(c.normalization * phi(k, n, lam, rho)) * rho.powi(2 * n as i32 - 1)
    })?
    .re * sphere_area(2 * n);

    let t_area = sphere_area(m);
    let mut masses = Vec::with_capacity(annuli);
    for i in 0..annuli {
        let (a, b) = (2f64.powi(i as i32), 2f64.powi(i as i32 + 1));
        let panels = (((b - a) * 4.0 * lam / PI).ceil() as usize).max(8);
        let v = integrate_panels(&uniform_breaks(a, b, panels), 16, |rho| {
            abs_pow(sphere_fourier(m, lam * rho)) * rho.powi(m as i32 - 1)
        })?;
        masses.push(v.re * t_area * z_mass);
    }

    let start = annuli / 2;
    let xs: Vec<f64> = (start..annuli).map(|i| i as f64).collect();
    let ys: Vec<f64> = masses[start..].iter().map(|v| v.log2()).collect();
    let slope = least_squares_slope(&xs, &ys);
    let rate = 2f64.powf(slope);
    let verdict = if rate < 1.0 - RATE_BAND {
        Verdict::Converges
    } else if rate > 1.0 + RATE_BAND {
        Verdict::Diverges
    } else {
        Verdict::Inconclusive
    };
    let mf = m as f64;
    Ok(LpProbe {
        p,
        masses,
        rate,
        fitted_exponent: slope - 1.0,
        predicted_exponent: mf - 1.0 - p * (mf - 1.0) / 2.0,
        verdict,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let nf = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// True iff `r/s` differs by more than `1e-9` from every quotient `z_i/z_j` of the first
/// `count` positive zeros of `J_order`.
pub fn bessel_quotient_condition(order: f64, r: f64, s: f64, count: usize) -> Result<bool> {
    positive("r", r)?;
    positive("s", s)?;
    if count == 0 || count > 50 {
        return Err(invalid(format!("zero count must lie in 1..=50, got {count}")));
    }
    let zeros = bessel_zeros(order, count)?;
    let q = r / s;
    Ok(zeros.iter().all(|zi| zeros.iter().all(|zj| (q - zi / zj).abs() > 1e-9)))
}

/// Sign changes of `λ ↦ eigenvalue(k, Homogeneous{s}, λ)` on `(0, lambda_max]`, refined by
/// bisection. Reports candidates only.
pub fn eigenvalue_zero_scan(g: &HTypeGroup, k: usize, s: f64, lambda_max: f64, steps: usize) -> Result<Vec<f64>> {
    positive("lambda_max", lambda_max)?;
    if steps < 2 {
        return Err(invalid("zero scan needs at least two steps"));
    }
    let spec = MeasureSpec::Homogeneous { s };
    let f = |l: f64| eigenvalue(g, k, spec, l);
    let h = lambda_max / steps as f64;
    let mut out = Vec::new();
    let mut a = h;
    let mut fa = f(a)?;
    for i in 2..=steps {
        let b = i as f64 * h;
        let fb = f(b)?;
        if fa == 0.0 {
            out.push(a);
        } else if (fa > 0.0) != (fb > 0.0) && fb != 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid)?;
                if (fm > 0.0) == (flo > 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::build_htype;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn points(g: &HTypeGroup, seed: u64, count: usize) -> Vec<GroupPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| g.random_point(&mut rng, 1.0)).collect()
    }

    #[test]
    fn construction_examples() {
        let g = build_htype(1, 1).unwrap();
        let c = make_counterexample(&g, Variant::VSphere { k: 1, r: 1.0 }).unwrap();
        assert!((c.lambda - 2.0).abs() < 1e-12);
        assert!(c.predicted_eigenvalue.abs() < 1e-10);
        assert!(make_counterexample(&g, Variant::VSphere { k: 0, r: 1.0 }).is_err());
        let h = build_htype(2, 3).unwrap();
        let b = make_counterexample(&h, Variant::BiSphere { k: 1, r: 1.0, s: 0.5, zero: ZeroChoice::Bessel }).unwrap();
        assert!((b.lambda - 2.0 * PI).abs() < 1e-12);
        assert!((b.field.evaluate(&h.identity()).re - 1.0).abs() < 1e-15);
        assert!(b.predicted_eigenvalue.abs() < 1e-10);
    }

    #[test]
    fn annihilation_and_sanity() {
        let rules = MeanRules { z_level: 12, t_level: 8, radial_points: 8 };
        for (n, m) in [(1, 1), (2, 2), (2, 3)] {
            let g = build_htype(n, m).unwrap();
            let pts = points(&g, 9, 6);
            for k in [1, 2] {
                let c = make_counterexample(&g, Variant::VSphere { k, r: 1.0 }).unwrap();
                let res = annihilation_residual(&g, &c, &pts, &rules).unwrap();
                assert!(res <= 1e-8, "({n},{m}) k={k}: {res}");
                let bad = annihilation_residual(&g, &c.perturbed(&g, 1.1).unwrap(), &pts, &rules).unwrap();
                assert!(bad > 1e-3, "({n},{m}) k={k}: {bad}");
            }
            for zero in [ZeroChoice::Laguerre, ZeroChoice::Bessel] {
                let c = make_counterexample(&g, Variant::BiSphere { k: 1, r: 0.9, s: 0.8, zero }).unwrap();
                let res = annihilation_residual(&g, &c, &pts, &rules).unwrap();
                assert!(res <= 1e-8, "({n},{m}) {zero:?}: {res}");
            }
        }
    }

    #[test]
    fn mean_is_diagonal_off_the_zero_set() {
        let rules = MeanRules { z_level: 12, t_level: 8, radial_points: 8 };
        let g = build_htype(2, 2).unwrap();
        let c = make_counterexample(&g, Variant::VSphere { k: 1, r: 1.0 }).unwrap();
        let moved = c.with_spec(&g, MeasureSpec::VSphere { r: 0.6 }).unwrap();
        for p in points(&g, 4, 5) {
            let got = spherical_mean(&g, &moved.field, moved.spec, &p, &rules).unwrap().norm();
            let want = moved.predicted_eigenvalue.abs() * moved.field.evaluate(&p).norm();
            assert!((got - want).abs() <= 0.1 * want + 1e-9);
        }
    }

    #[test]
    fn projector_properties() {
        let rules = MeanRules { z_level: 6, t_level: 6, radial_points: 8 };
        let g = build_htype(2, 2).unwrap();
        let gauss = ScalarField::gaussian(1.0).unwrap();
        let skew = gauss.left_translate(&g, &points(&g, 1, 1)[0]);
        let pi_skew = {
            let (gg, s, r) = (g.clone(), skew.clone(), rules);
            ScalarField::new(FieldDescriptor::Custom { label: "pi".into() }, DecayHint::Exponential, move |p| {
                biradial_average(&gg, &s, p, &r).unwrap()
            })
        };
        for p in points(&g, 2, 4) {
            assert!((biradial_average(&g, &gauss, &p, &rules).unwrap() - gauss.evaluate(&p)).norm() < 1e-12);
            let once = biradial_average(&g, &skew, &p, &rules).unwrap();
            let twice = biradial_average(&g, &pi_skew, &p, &rules).unwrap();
            assert!((once - twice).norm() < 1e-9);
            assert!(once.re >= 0.0);
        }
    }

    #[test]
    fn product_formula() {
        let rules = MeanRules { z_level: 16, t_level: 12, radial_points: 8 };
        let g = build_htype(2, 2).unwrap();
        let c = make_counterexample(&g, Variant::BiSphere { k: 1, r: 1.0, s: 1.0, zero: ZeroChoice::Laguerre }).unwrap();
        let pts = points(&g, 8, 6);
        for pair in pts.chunks(2) {
            let lhs = translated_average(&g, &c.field, &pair[0], &pair[1], &rules).unwrap();
            let rhs = c.field.evaluate(&pair[0]) * c.field.evaluate(&pair[1]);
            assert!((lhs - rhs).norm() <= 1e-6 * rhs.norm().max(1e-3), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn lp_probe_examples() {
        let g = build_htype(2, 3).unwrap();
        let c = make_counterexample(&g, Variant::VSphere { k: 1, r: 1.0 }).unwrap();
        let hi = lp_decay_probe(&c, 3.5, 12).unwrap();
        assert_eq!(hi.verdict, Verdict::Converges);
        let lo = lp_decay_probe(&c, 2.5, 12).unwrap();
        assert_eq!(lo.verdict, Verdict::Diverges);
        for probe in [hi, lo] {
            let err = (probe.fitted_exponent - probe.predicted_exponent).abs();
            assert!(err <= 0.05 * probe.predicted_exponent.abs(), "{probe:?}");
        }
        assert!(lp_decay_probe(&c, 0.5, 12).is_err());
        assert!(lp_decay_probe(&c, 3.0, 13).is_err());
    }

    #[test]
    fn quotient_condition() {
        assert!(!bessel_quotient_condition(0.0, 1.3, 1.3, 10).unwrap());
        let z = bessel_zeros(0.0, 2).unwrap();
        assert!(!bessel_quotient_condition(0.0, z[0], z[1], 5).unwrap());
        assert!(bessel_quotient_condition(0.0, 2f64.sqrt(), 1.0, 50).unwrap());
    }

    #[test]
    fn zero_scan_runs() {
        let g = build_htype(1, 1).unwrap();
        let zeros = eigenvalue_zero_scan(&g, 1, 1.0, 50.0, 200).unwrap();
        for z in zeros {
            let e = eigenvalue(&g, 1, MeasureSpec::Homogeneous { s: 1.0 }, z).unwrap();
            assert!(e.abs() < 1e-8, "{z}: {e}");
        }
    }
}
