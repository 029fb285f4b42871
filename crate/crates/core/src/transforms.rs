//! Evaluable fields on the group, twisted convolution on ℂⁿ, and finite-difference
//! application of the sublaplacian along left-invariant directions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{build_htype, norm, GroupPoint, HTypeGroup};
use crate::quadrature::{QuadratureRule, RuleKind};
use crate::special::{gamma, phi};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FieldDescriptor {
    /// `e^{-i<a,t>} φ_k^{|a|}(|z|)`.
    Eigenfunction { k: usize, a: Vec<f64> },
    /// `exp(-(|z|² + |t|²) / σ²)`.
    Gaussian { sigma: f64 },
    Counterexample { family: String, params: Vec<f64> },
    LeftTranslate { base: Box<FieldDescriptor>, by: GroupPoint },
    Custom { label: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DecayHint {
    Exponential,
    Polynomial { rate: f64 },
    None,
}

type FieldFn = dyn Fn(&GroupPoint) -> Complex64 + Send + Sync;

/// A closed-form complex field on the group.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<FieldFn>,
    pub descriptor: FieldDescriptor,
    pub decay: DecayHint,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("descriptor", &self.descriptor)
            .field("decay", &self.decay)
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(descriptor: FieldDescriptor, decay: DecayHint, f: F) -> Self
    where
        F: Fn(&GroupPoint) -> Complex64 + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), descriptor, decay }
    }

    pub fn evaluate(&self, p: &GroupPoint) -> Complex64 {
        (self.eval)(p)
    }

    /// `x ↦ f(q · x)`.
    pub fn left_translate(&self, g: &HTypeGroup, q: &GroupPoint) -> ScalarField {
        let base = self.clone();
        let g = g.clone();
        let q2 = q.clone();
        ScalarField::new(
            FieldDescriptor::LeftTranslate { base: Box::new(self.descriptor.clone()), by: q.clone() },
            self.decay,
            move |x| base.evaluate(&g.multiply_unchecked(&q2, x)),
        )
    }

    pub fn gaussian(sigma: f64) -> Result<ScalarField> {
        if !(sigma > 0.0) {
            return Err(invalid(format!("Gaussian width must be positive, got {sigma}")));
        }
        let s2 = sigma * sigma;
        Ok(ScalarField::new(FieldDescriptor::Gaussian { sigma }, DecayHint::Exponential, move |p| {
            let r2: f64 = p.z.iter().chain(&p.t).map(|v| v * v).sum();
            Complex64::new((-r2 / s2).exp(), 0.0)
        }))
    }
}

/// `e_k^a(z, t) = e^{-i<a,t>} φ_k^{|a|}(|z|)`.
pub fn e_field(g: &HTypeGroup, k: usize, a: &[f64]) -> Result<ScalarField> {
    if a.len() != g.m {
        return Err(Error::DimensionMismatch { expected: g.m, got: a.len() });
    }
    let lam = norm(a);
    if lam == 0.0 {
        return Err(invalid("e_k^a needs a nonzero spectral vector a"));
    }
    let n = g.n;
    let av = a.to_vec();
    Ok(ScalarField::new(
        FieldDescriptor::Eigenfunction { k, a: av.clone() },
        DecayHint::Exponential,
        move |p| {
            let phase: f64 = av.iter().zip(&p.t).map(|(x, y)| x * y).sum();
            Complex64::from_polar(phi(k, n, lam, norm(&p.z)), -phase)
        },
    ))
}

/// Quadrature sizes for integrals over ℂⁿ in polar form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistRules {
    pub sphere_level: usize,
    pub halfline_points: usize,
    /// Decay rate `c` of the integrand in `u = |w|²`, `~ e^{-c u}`.
    pub decay_rate: f64,
}

impl TwistRules {
    pub fn for_lambda(lambda: f64) -> Self {
        Self { sphere_level: 24, halfline_points: 128, decay_rate: 0.5 * lambda }
    }
}

/// `|S^{d-1}| = 2 π^{d/2} / Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(0.5 * d as f64) / gamma(0.5 * d as f64)
}

/// `(f1 ×_λ f2)(z) = ∫_{ℂⁿ} f1(z - w) f2(w) e^{(i/2) λ Im z·w̄} dw` for `n ∈ {1, 2}`.
///
/// `w = √u ω` with `u` on a Gauss–Laguerre rule and `ω` on a sphere rule;
/// `Im z·w̄` is the bracket of the canonical `(n, 1)` group.
pub fn twisted_convolution<F1, F2>(
    f1: F1,
    f2: F2,
    lambda: f64,
    z: &[f64],
    rules: TwistRules,
) -> Result<Complex64>
where
    F1: Fn(&[f64]) -> Complex64,
    F2: Fn(&[f64]) -> Complex64,
{
    if z.len() != 2 && z.len() != 4 {
        return Err(Error::Unsupported(format!(
            "twisted convolution is implemented on C^1 and C^2, got real dimension {}",
            z.len()
        )));
    }
    if !(lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let n = z.len() / 2;
    let heis = build_htype(n, 1)?;
    let sphere = QuadratureRule::cached(RuleKind::Sphere { dim: 2 * n, level: rules.sphere_level })?;
    let radial = QuadratureRule::cached(RuleKind::HalfLine { n: rules.halfline_points, alpha: n as f64 - 1.0 })?;
    let area = sphere_area(2 * n);
    let res = radial.integrate_halfline_scaled(
        |u| {
            let rho = u.sqrt();
            let shell = sphere.integrate(|om| {
                let w: Vec<f64> = om.iter().map(|x| rho * x).collect();
                let zw: Vec<f64> = z.iter().zip(&w).map(|(a, b)| a - b).collect();
                let im = heis.bracket_unchecked(z, &w)[0];
                f1(&zw) * f2(&w) * Complex64::from_polar(1.0, 0.5 * lambda * im)
            });
            shell * (0.5 * area * u.powi(n as i32 - 1))
        },
        1.0 / rules.decay_rate,
    )?;
    Ok(res.value)
}

fn check_step(h: f64) -> Result<()> {
    if !(1e-4..=1e-1).contains(&h) {
        return Err(invalid(format!("finite-difference step must lie in [1e-4, 1e-1], got {h}")));
    }
    Ok(())
}

fn axis_point(g: &HTypeGroup, j: usize, s: f64) -> GroupPoint {
    let mut q = g.identity();
    q.z[j] = s;
    q
}

/// Second central difference of `s ↦ f(p · (s e_j, 0))`.
fn second_difference(g: &HTypeGroup, f: &ScalarField, p: &GroupPoint, j: usize, h: f64, f0: Complex64) -> Complex64 {
    let fp = f.evaluate(&g.multiply_unchecked(p, &axis_point(g, j, h)));
    let fm = f.evaluate(&g.multiply_unchecked(p, &axis_point(g, j, -h)));
    (fp - 2.0 * f0 + fm) / (h * h)
}

/// `-Σ_j (X_j² + Y_j²) f(p)` with each square a second central difference along the
/// left-invariant one-parameter subgroup `s ↦ p · (s e_j, 0)`.
pub fn sublaplacian_fd(g: &HTypeGroup, f: &ScalarField, p: &GroupPoint, h: f64) -> Result<Complex64> {
    check_step(h)?;
    if p.z.len() != 2 * g.n || p.t.len() != g.m {
        return Err(Error::DimensionMismatch { expected: 2 * g.n + g.m, got: p.z.len() + p.t.len() });
    }
    let f0 = f.evaluate(p);
    let sum: Complex64 = (0..2 * g.n).map(|j| second_difference(g, f, p, j, h, f0)).sum();
    Ok(-sum)
}

/// `V f(p)` for `V` the left-invariant field generated by `(v, 0)`, by central difference
/// along the group route.
pub fn vector_field_fd(g: &HTypeGroup, f: &ScalarField, p: &GroupPoint, v: &[f64], h: f64) -> Result<Complex64> {
    check_step(h)?;
    let step = |s: f64| GroupPoint::new(v.iter().map(|x| s * x).collect(), vec![0.0; g.m]);
    let fp = f.evaluate(&g.multiply(p, &step(h))?);
    let fm = f.evaluate(&g.multiply(p, &step(-h))?);
    Ok((fp - fm) / (2.0 * h))
}

/// The same field through its coordinate form `∂_v + ½ Σ_k [z, v]_k ∂_{t_k}`.
pub fn vector_field_coordinate_fd(
    g: &HTypeGroup,
    f: &ScalarField,
    p: &GroupPoint,
    v: &[f64],
    h: f64,
) -> Result<Complex64> {
    check_step(h)?;
    let br = g.bracket(&p.z, v)?;
    let shift = |dz: &[f64], dt: &[f64], s: f64| {
        GroupPoint::new(
            p.z.iter().zip(dz).map(|(a, b)| a + s * b).collect(),
            p.t.iter().zip(dt).map(|(a, b)| a + s * b).collect(),
        )
    };
    let zero_t = vec![0.0; g.m];
    let zero_z = vec![0.0; 2 * g.n];
    let dz = (f.evaluate(&shift(v, &zero_t, h)) - f.evaluate(&shift(v, &zero_t, -h))) / (2.0 * h);
    let mut dt = Complex64::new(0.0, 0.0);
    for (k, bk) in br.iter().enumerate() {
        let mut e = vec![0.0; g.m];
        e[k] = 1.0;
        let d = (f.evaluate(&shift(&zero_z, &e, h)) - f.evaluate(&shift(&zero_z, &e, -h))) / (2.0 * h);
        dt += d * (0.5 * bk);
    }
    Ok(dz + dt)
}

/// Twisted Laplacian `-Δφ + ¼|a|²|z|² φ + i <J_a z, ∇φ>` by central differences;
/// the operator that `L` induces on `e^{-i<a,t>} φ(z)`.
pub fn twisted_laplacian_fd<F>(g: &HTypeGroup, a: &[f64], phi_fn: F, z: &[f64], h: f64) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64,
{
    check_step(h)?;
    let j = g.jmap(a)?;
    if z.len() != 2 * g.n {
        return Err(Error::DimensionMismatch { expected: 2 * g.n, got: z.len() });
    }
    let jz = &j * nalgebra::DVector::from_column_slice(z);
    let a2: f64 = a.iter().map(|x| x * x).sum();
    let f0 = phi_fn(z);
    let mut lap = Complex64::new(0.0, 0.0);
    let mut drift = Complex64::new(0.0, 0.0);
    let mut zp = z.to_vec();
    for i in 0..z.len() {
        zp[i] = z[i] + h;
        let fp = phi_fn(&zp);
        zp[i] = z[i] - h;
        let fm = phi_fn(&zp);
        zp[i] = z[i];
        lap += (fp - 2.0 * f0 + fm) / (h * h);
        drift += (fp - fm) / (2.0 * h) * jz[i];
    }
    let z2: f64 = z.iter().map(|x| x * x).sum();
    Ok(-lap + f0 * (0.25 * a2 * z2) + Complex64::i() * drift)
}
