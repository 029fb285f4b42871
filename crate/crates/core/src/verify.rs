//! Named verification suites producing [`VerificationReport`]s.
//!
//! Every suite is a pure function of its [`SuiteConfig`]; identical configs give
//! identical reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{build_htype, norm, GroupPoint, HTypeGroup};
use crate::kernels::{
    abel_kernel_radial, abel_partial_sum, ak_direct, ak_series_radial, annulus_integral, cancellation_integral,
    evaluate, profile_tail_ratio, riesz_abel_direct, riesz_abel_kernel, ClosedFormKernel, KernelSpec,
};
use crate::lab::{
    annihilation_residual, biradial_average, lp_decay_probe, lp_threshold, make_counterexample, translated_average,
    Variant, Verdict, ZeroChoice,
};
use crate::means::{
    calibrate_polar_constant, eigenvalue, gaussian_integral, polar_profile_integral, spherical_mean, MeanRules,
    MeasureSpec,
};
use crate::report::{Check, VerificationReport};
use crate::special::{
    binomial, bessel_j, bessel_zeros, laguerre, phi, poisson_i, PoissonMode,
};
use crate::transforms::{e_field, sublaplacian_fd, twisted_convolution, ScalarField, TwistRules};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Structure,
    Special,
    Cancellation,
    Eigen,
    Kernels,
    Abel,
    Counterexample,
    LpThreshold,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Structure,
        Suite::Special,
        Suite::Cancellation,
        Suite::Eigen,
        Suite::Kernels,
        Suite::Abel,
        Suite::Counterexample,
        Suite::LpThreshold,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Structure => "structure",
            Suite::Special => "special",
            Suite::Cancellation => "cancellation",
            Suite::Eigen => "eigen",
            Suite::Kernels => "kernels",
            Suite::Abel => "abel",
            Suite::Counterexample => "counterexample",
            Suite::LpThreshold => "lp-threshold",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| invalid(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    /// Sphere-rule level for spherical means.
    pub sphere_level: usize,
    /// Gauss–Laguerre size for twisted convolutions.
    pub halfline_points: usize,
    /// Gauss points for the Korányi radial variable.
    pub interval_points: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { sphere_level: 12, halfline_points: 128, interval_points: 16 }
    }
}

impl QuadConfig {
    pub fn mean_rules(&self) -> MeanRules {
        MeanRules { z_level: self.sphere_level, t_level: self.sphere_level, radial_points: self.interval_points }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub quad: QuadConfig,
    /// Overrides of default tolerances by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m, quad: QuadConfig::default(), tolerances: BTreeMap::new(), seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(invalid("n and m must be positive"));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(invalid(format!("tolerance {k:?} must be positive, got {v}")));
        }
        if self.quad.sphere_level == 0 || self.quad.halfline_points == 0 || self.quad.interval_points == 0 {
            return Err(invalid("quadrature sizes must be positive"));
        }
        Ok(())
    }

    fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Run one suite. Group construction failures and unsupported dimensions are errors,
/// not failed checks.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut report = match suite {
        Suite::Structure => structure(cfg)?,
        Suite::Special => special(cfg)?,
        Suite::Cancellation => cancellation(cfg)?,
        Suite::Eigen => eigen(cfg)?,
        Suite::Kernels => kernels(cfg)?,
        Suite::Abel => abel(cfg)?,
        Suite::Counterexample => counterexample(cfg)?,
        Suite::LpThreshold => lp_threshold_suite(cfg)?,
    };
    report.suite = suite.name().to_string();
    report.config_echo = serde_json::to_value(cfg).map_err(|e| invalid(e.to_string()))?;
    Ok(report)
}

fn need_centre(cfg: &SuiteConfig, what: &str) -> Result<()> {
    if cfg.m < 2 {
        return Err(Error::Unsupported(format!("{what} needs m >= 2, got m = {}", cfg.m)));
    }
    Ok(())
}

fn structure(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let g = build_htype(cfg.n, cfg.m)?;
    let mut report = VerificationReport::new("structure");
    for c in g.verify_structure_seeded(1e-12, cfg.seed).checks {
        let tol = cfg.tol(&c.name, c.tol);
        report.push(Check::absolute(c.name, c.max_abs_err, 1.0, tol));
    }
    // group law: identity, inverse and associativity on random points
    let mut rng = cfg.rng();
    let mut law: f64 = 0.0;
    for _ in 0..20 {
        let p = g.random_point(&mut rng, 1.0);
        let q = g.random_point(&mut rng, 1.0);
        let r = g.random_point(&mut rng, 1.0);
        let lhs = g.multiply(&g.multiply(&p, &q)?, &r)?;
        let rhs = g.multiply(&p, &g.multiply(&q, &r)?)?;
        law = law.max(lhs.distance(&rhs));
        law = law.max(g.multiply(&p, &p.inverse())?.distance(&g.identity()));
    }
    report.push(Check::absolute("group_law", law, 1.0, cfg.tol("group_law", 1e-12)));
    Ok(report)
}

/// `max |Σ_{k ≤ K} L_k^α(x) r^k - (1-r)^{-α-1} e^{-xr/(1-r)}| / |rhs|` over a fixed grid.
pub fn laguerre_generating_error(alpha: f64, r: f64, terms: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for &x in &[0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let lhs: f64 = (0..=terms).map(|k| laguerre(k, alpha, x) * r.powi(k as i32)).sum();
        let rhs = (1.0 - r).powf(-alpha - 1.0) * (-x * r / (1.0 - r)).exp();
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
    }
    worst
}

fn special(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("special");
    let mut worst: f64 = 0.0;
    for m in 2..=4 {
        for &tau in &[0.5, 1.0, 2.0] {
            let c = poisson_i(m, tau, PoissonMode::Closed)?;
            let q = poisson_i(m, tau, PoissonMode::Quadrature)?;
            worst = worst.max((c - q).abs() / c.abs());
        }
    }
    report.push(Check::relative("poisson_identity", worst, 1.0, cfg.tol("poisson_identity", 1e-8)));

    let order = 0.5 * cfg.m as f64 - 1.0;
    let mut zres: f64 = 0.0;
    for z in bessel_zeros(order, 10)? {
        zres = zres.max(bessel_j(order, z)?.abs());
    }
    report.push(Check::absolute("bessel_zero_residual", zres, 1.0, cfg.tol("bessel_zero_residual", 1e-12)));

    // φ_k^λ(0) = C(k+n-1, k): normalization used by the eigen coefficients
    let mut ph: f64 = 0.0;
    for k in 0..=6 {
        ph = ph.max((phi(k, cfg.n, 1.3, 0.0) - binomial(k + cfg.n - 1, k)).abs());
    }
    report.push(Check::absolute("laguerre_at_origin", ph, 1.0, cfg.tol("laguerre_at_origin", 1e-12)));
    Ok(report)
}

fn cancellation(cfg: &SuiteConfig) -> Result<VerificationReport> {
    need_centre(cfg, "the cancellation suite")?;
    let mut report = VerificationReport::new("cancellation");
    for j in 0..=2 {
        let name = format!("cancellation_j{j}");
        let v = cancellation_integral(cfg.n, j, cfg.m)?;
        report.push(Check::absolute(name.clone(), v, 1.0, cfg.tol(&name, 1e-8)));
    }
    let mut worst: f64 = 0.0;
    for k in 0..=2 {
        let (s, a) = annulus_integral(cfg.n, cfg.m, 0.5, 2.0, |rz, rt| ak_series_radial(k, cfg.n, cfg.m, rz, rt))?;
        worst = worst.max(s.abs() / a);
    }
    report.push(Check::absolute("annulus_cancellation", worst, 1.0, cfg.tol("annulus_cancellation", 1e-6)));
    Ok(report)
}

fn unit_direction(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let a: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&a);
        if r > 0.1 {
            return a.into_iter().map(|x| x / r).collect();
        }
    }
}

/// `max |e * μ - e(λ) e| / sup|e|` over `k ≤ k_max`, the given `|a|` values and points.
pub fn eigenrelation_error(
    g: &HTypeGroup,
    spec: MeasureSpec,
    k_max: usize,
    radii: &[f64],
    points: &[GroupPoint],
    rules: &MeanRules,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=k_max {
        for &lam in radii {
            let a: Vec<f64> = unit_direction(rng, g.m).into_iter().map(|x| x * lam).collect();
            let e = e_field(g, k, &a)?;
            let ev = eigenvalue(g, k, spec, lam)?;
            let sup = binomial(k + g.n - 1, k);
            for p in points {
                let got = spherical_mean(g, &e, spec, p, rules)?;
                worst = worst.max((got - e.evaluate(p) * ev).norm() / sup);
            }
        }
    }
    Ok(worst)
}

/// Observed order of `h ↦ |L_h e - (2k+n)|a| e|` under halving, minimised over `k ≤ k_max`
/// and points; also returns the largest relative residual at the finer step.
pub fn sublaplacian_order(g: &HTypeGroup, k_max: usize, points: &[GroupPoint], rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    let mut order = f64::INFINITY;
    let mut resid: f64 = 0.0;
    for k in 0..=k_max {
        let lam = rng.gen_range(0.5..2.0);
        let a: Vec<f64> = unit_direction(rng, g.m).into_iter().map(|x| x * lam).collect();
        let e = e_field(g, k, &a)?;
        let target = (2 * k + g.n) as f64 * lam;
        let sup = binomial(k + g.n - 1, k);
        for p in points {
            let r = |h: f64| -> Result<f64> { Ok((sublaplacian_fd(g, &e, p, h)? - e.evaluate(p) * target).norm()) };
            let (r1, r2) = (r(2e-2)?, r(1e-2)?);
            resid = resid.max(r2 / (sup * target));
            if r2 > 0.0 {
                order = order.min((r1 / r2).log2());
            }
        }
    }
    Ok((order, resid))
}

/// `κ` fitted on a centred Gaussian, then used to integrate a translated Gaussian of
/// another width; returns the relative error of that integral.
pub fn polar_calibration_error(g: &HTypeGroup, rules: &MeanRules, seed: u64) -> Result<f64> {
    let (n, m) = (g.n, g.m);
    let kappa = calibrate_polar_constant(g, &ScalarField::gaussian(1.0)?, gaussian_integral(n, m, 1.0), 7.0, rules)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = g.random_point(&mut rng, 0.5);
    let f = ScalarField::gaussian(0.7)?.left_translate(g, &q);
    let want = gaussian_integral(n, m, 0.7);
    let got = kappa * polar_profile_integral(g, &f, 7.0, 16, rules)?.re;
    Ok((got - want).abs() / want)
}

/// `max |φ_k ×_λ φ_j - (2π/λ)^n δ_{jk} φ_k|` relative to `(2π/λ)^n`, for `n ≤ 2`.
pub fn twisted_projection_error(n: usize, lam: f64, halfline_points: usize) -> Result<f64> {
    let rules = TwistRules { halfline_points, ..TwistRules::for_lambda(lam) };
    let radial = move |k: usize| move |w: &[f64]| Complex64::new(phi(k, n, lam, norm(w)), 0.0);
    let mut z = vec![0.0; 2 * n];
    z[0] = 0.8;
    z[2 * n - 1] = -0.5;
    let scale = (2.0 * PI / lam).powi(n as i32);
    let mut worst: f64 = 0.0;
    for k in 0..3 {
        for j in 0..3 {
            let v = twisted_convolution(radial(k), radial(j), lam, &z, rules)?;
            let want = if k == j { scale * phi(k, n, lam, norm(&z)) } else { 0.0 };
            worst = worst.max((v - want).norm() / scale);
        }
    }
    Ok(worst)
}

fn eigen(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let g = build_htype(cfg.n, cfg.m)?;
    let rules = cfg.quad.mean_rules();
    let mut rng = cfg.rng();
    let mut report = VerificationReport::new("eigen");
    let points: Vec<GroupPoint> = (0..10).map(|_| g.random_point(&mut rng, 1.0)).collect();
    let radii = [0.8, 1.6];

    let v = eigenrelation_error(&g, MeasureSpec::VSphere { r: 0.9 }, 3, &radii, &points, &rules, &mut rng)?;
    report.push(Check::relative("vsphere_eigen", v, 1.0, cfg.tol("vsphere_eigen", 1e-6)));
    let b = eigenrelation_error(&g, MeasureSpec::BiSphere { r: 0.9, s: 0.7 }, 3, &radii, &points, &rules, &mut rng)?;
    report.push(Check::relative("bisphere_eigen", b, 1.0, cfg.tol("bisphere_eigen", 1e-6)));
    let h = eigenrelation_error(&g, MeasureSpec::Homogeneous { s: 1.2 }, 2, &radii[..1], &points[..3], &rules, &mut rng)?;
    report.push(Check::relative("homogeneous_eigen", h, 1.0, cfg.tol("homogeneous_eigen", 1e-5)));

    let (order, resid) = sublaplacian_order(&g, 3, &points[..4], &mut rng)?;
    report.push(Check::at_least("sublaplacian_order", order, cfg.tol("sublaplacian_order", 1.8)));
    report.push(Check::relative("sublaplacian_eigen", resid, 1.0, cfg.tol("sublaplacian_eigen", 1e-3)));

    if cfg.n <= 2 {
        let t = twisted_projection_error(cfg.n, 0.9, cfg.quad.halfline_points)?;
        report.push(Check::absolute("twisted_projection", t, 1.0, cfg.tol("twisted_projection", 1e-7)));
    }
    Ok(report)
}

/// Kernel evaluation points with `|z|²/(4|t|)` in `[0.1, 2]`, where all three routes are
/// well conditioned.
pub fn kernel_points(rng: &mut ChaCha8Rng, count: usize) -> Vec<(f64, f64)> {
    (0..count).map(|_| (rng.gen_range(0.7..1.5), rng.gen_range(0.3..1.2))).collect()
}

/// Pairwise relative disagreement of series, fitted explicit form and direct quadrature.
pub fn triple_agreement(k: usize, n: usize, m: usize, points: &[(f64, f64)]) -> Result<[f64; 3]> {
    let closed = ClosedFormKernel::cached(k, n, m)?;
    let mut worst = [0.0f64; 3];
    for &(rz, rt) in points {
        let s = ak_series_radial(k, n, m, rz, rt)?;
        let c = closed.evaluate_radial(rz, rt)?;
        let d = ak_direct(k, n, m, rz, rt)?;
        // A_k can vanish; compare against the k = 0 scale at the same point
        let scale = s.abs().max(ak_series_radial(0, n, m, rz, rt)?.abs());
        worst[0] = worst[0].max((c - s).norm() / scale);
        worst[1] = worst[1].max((d - s).abs() / scale);
        worst[2] = worst[2].max((c - d).norm() / scale);
    }
    Ok(worst)
}

/// `max |K(δ_s x) s^Q - K(x)| / |K(x)|` over `s ∈ {0.5, 2, 3.7}` and random points whose
/// radii come from [`kernel_points`].
pub fn homogeneity_error(spec: &KernelSpec, rng: &mut ChaCha8Rng, count: usize) -> Result<f64> {
    let (n, m) = spec.dims();
    let q = (2 * n + 2 * m) as i32;
    let mut worst: f64 = 0.0;
    for (rz, rt) in kernel_points(rng, count) {
        let z: Vec<f64> = unit_direction(rng, 2 * n).into_iter().map(|x| x * rz).collect();
        let t: Vec<f64> = unit_direction(rng, m).into_iter().map(|x| x * rt).collect();
        let v = evaluate(spec, &z, &t)?;
        for s in [0.5, 2.0, 3.7] {
            let zs: Vec<f64> = z.iter().map(|x| s * x).collect();
            let ts: Vec<f64> = t.iter().map(|x| s * s * x).collect();
            let vs = evaluate(spec, &zs, &ts)? * s.powi(q);
            worst = worst.max((vs - v).norm() / v.norm());
        }
    }
    Ok(worst)
}

fn kernels(cfg: &SuiteConfig) -> Result<VerificationReport> {
    need_centre(cfg, "the kernel suite")?;
    let (n, m) = (cfg.n, cfg.m);
    let mut rng = cfg.rng();
    let points = kernel_points(&mut rng, 20);
    let mut worst = [0.0f64; 3];
    for k in 0..=3 {
        let w = triple_agreement(k, n, m, &points)?;
        for (a, b) in worst.iter_mut().zip(w) {
            *a = a.max(b);
        }
    }
    let mut report = VerificationReport::new("kernels");
    for (name, v) in ["series_vs_closed", "series_vs_direct", "closed_vs_direct"].iter().zip(worst) {
        report.push(Check::relative(*name, v, 1.0, cfg.tol(name, 1e-6)));
    }
    let mut hom: f64 = 0.0;
    for k in 0..=3 {
        for spec in [KernelSpec::Series { k, n, m }, KernelSpec::ClosedForm { k, n, m }] {
            hom = hom.max(homogeneity_error(&spec, &mut rng, 5)?);
        }
    }
    report.push(Check::relative("homogeneity", hom, 1.0, cfg.tol("homogeneity", 1e-10)));
    Ok(report)
}

fn abel(cfg: &SuiteConfig) -> Result<VerificationReport> {
    need_centre(cfg, "the Abel suite")?;
    let (n, m) = (cfg.n, cfg.m);
    let mut rng = cfg.rng();
    let mut report = VerificationReport::new("abel");

    let r = 0.3;
    let mut worst: f64 = 0.0;
    for (rz, rt) in kernel_points(&mut rng, 10) {
        let closed = abel_kernel_radial(r, n, m, rz, rt)?;
        let sum = abel_partial_sum(r, n, m, rz, rt, 40)?;
        worst = worst.max((sum - closed).abs() / closed.abs());
    }
    report.push(Check::relative("abel_series", worst, 1.0, cfg.tol("abel_series", 1e-6)));

    let lg = laguerre_generating_error(n as f64 - 1.0, r, 60);
    report.push(Check::relative("laguerre_generating", lg, 1.0, cfg.tol("laguerre_generating", 1e-8)));

    let mut riesz: f64 = 0.0;
    for _ in 0..3 {
        let mut z: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let zn = norm(&z);
        z.iter_mut().for_each(|x| *x *= rng.gen_range(0.8..1.2) / zn);
        let tdir = unit_direction(&mut rng, m);
        let tn = rng.gen_range(0.8..1.2);
        let t: Vec<f64> = tdir.iter().map(|x| x * tn).collect();
        let closed: Vec<Complex64> = (0..m).map(|j| riesz_abel_kernel(0.2, j, n, m, &z, &t)).collect::<Result<_>>()?;
        let scale = closed.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for (j, c) in closed.iter().enumerate() {
            riesz = riesz.max((c - riesz_abel_direct(0.2, j, n, m, &z, &t)?).norm() / scale);
        }
    }
    report.push(Check::relative("riesz_abel_direct", riesz, 1.0, cfg.tol("riesz_abel_direct", 1e-6)));

    let tail = profile_tail_ratio(m + 2, n - 1, n, 1e3)?;
    report.push(Check::relative("riesz_profile_tail", tail, 1.0, cfg.tol("riesz_profile_tail", 1e-6)));
    if n >= 2 {
        let tail = profile_tail_ratio(m + 2, n - 2, n, 1e3)?;
        report.push(Check::relative("riesz_profile_tail_lower", tail, 1.0, cfg.tol("riesz_profile_tail_lower", 1e-6)));
    }
    Ok(report)
}

/// `max |Π(Φ(q·))(p) - Φ(q)Φ(p)| / max(|Φ(q)Φ(p)|, 1e-3)` over consecutive point pairs.
pub fn product_formula_error(g: &HTypeGroup, field: &ScalarField, points: &[GroupPoint], rules: &MeanRules) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for pair in points.chunks_exact(2) {
        let lhs = translated_average(g, field, &pair[0], &pair[1], rules)?;
        let rhs = field.evaluate(&pair[0]) * field.evaluate(&pair[1]);
        worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1e-3));
    }
    Ok(worst)
}

fn counterexample(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let g = build_htype(cfg.n, cfg.m)?;
    let rules = cfg.quad.mean_rules();
    let mut rng = cfg.rng();
    let points: Vec<GroupPoint> = (0..10).map(|_| g.random_point(&mut rng, 1.0)).collect();
    let mut report = VerificationReport::new("counterexample");

    let mut variants = vec![Variant::VSphere { k: 1, r: 1.0 }, Variant::VSphere { k: 2, r: 1.0 }];
    for zero in [ZeroChoice::Laguerre, ZeroChoice::Bessel] {
        variants.push(Variant::BiSphere { k: 1, r: 0.9, s: 0.8, zero });
    }
    let mut res: f64 = 0.0;
    let mut predicted: f64 = 0.0;
    let mut perturbed = f64::INFINITY;
    for v in variants {
        let c = make_counterexample(&g, v)?;
        predicted = predicted.max(c.predicted_eigenvalue.abs());
        res = res.max(annihilation_residual(&g, &c, &points, &rules)?);
        if let Variant::VSphere { .. } = v {
            perturbed = perturbed.min(annihilation_residual(&g, &c.perturbed(&g, 1.1)?, &points, &rules)?);
        }
    }
    report.push(Check::absolute("predicted_eigenvalue", predicted, 1.0, cfg.tol("predicted_eigenvalue", 1e-10)));
    report.push(Check::absolute("annihilation", res, 1.0, cfg.tol("annihilation", 1e-8)));
    report.push(Check::at_least("perturbed_residual", perturbed, cfg.tol("perturbed_residual", 1e-3)));

    let phi_field = make_counterexample(&g, Variant::BiSphere { k: 1, r: 1.0, s: 1.0, zero: ZeroChoice::Laguerre })?.field;
    let pairs: Vec<GroupPoint> = (0..20).map(|_| g.random_point(&mut rng, 1.0)).collect();
    let prod = product_formula_error(&g, &phi_field, &pairs, &rules)?;
    report.push(Check::relative("product_formula", prod, 1.0, cfg.tol("product_formula", 1e-6)));

    let one = ScalarField::new(
        crate::transforms::FieldDescriptor::Custom { label: "one".into() },
        crate::transforms::DecayHint::None,
        |_| Complex64::new(1.0, 0.0),
    );
    let mut unital: f64 = 0.0;
    for p in &points[..3] {
        unital = unital.max((biradial_average(&g, &one, p, &rules)? - 1.0).norm());
    }
    report.push(Check::absolute("projector_unital", unital, 1.0, cfg.tol("projector_unital", 1e-10)));
    Ok(report)
}

/// Exponents scanned by the threshold suite.
pub const LP_SCAN: [f64; 7] = [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];

/// Whether a verdict sequence, ordered by increasing `p`, diverges strictly below `p*`,
/// converges strictly above it and never flips back.
pub fn flips_at_threshold(scan: &[(f64, Verdict)], threshold: f64) -> bool {
    scan.iter().all(|&(p, v)| {
        if p < threshold {
            v == Verdict::Diverges
        } else if p > threshold {
            v == Verdict::Converges
        } else {
            v == Verdict::Inconclusive
        }
    })
}

/// Fitted-versus-predicted exponent error: relative where the prediction is nonzero,
/// absolute where it vanishes.
pub fn exponent_error(fitted: f64, predicted: f64) -> f64 {
    let d = (fitted - predicted).abs();
    if predicted == 0.0 {
        d
    } else {
        d / predicted.abs()
    }
}

fn lp_threshold_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    need_centre(cfg, "the threshold suite")?;
    let g = build_htype(cfg.n, cfg.m)?;
    let c = make_counterexample(&g, Variant::VSphere { k: 1, r: 1.0 })?;
    let mut scan = Vec::with_capacity(LP_SCAN.len());
    let mut fit: f64 = 0.0;
    for &p in &LP_SCAN {
        let probe = lp_decay_probe(&c, p, 12)?;
        fit = fit.max(exponent_error(probe.fitted_exponent, probe.predicted_exponent));
        scan.push((p, probe.verdict));
    }
    let mut report = VerificationReport::new("lp-threshold");
    report.push(Check::condition("verdict_flip", flips_at_threshold(&scan, lp_threshold(cfg.m))));
    report.push(Check::absolute("fitted_exponent", fit, 1.0, cfg.tol("fitted_exponent", 0.05)));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn structure_suite_and_inadmissible_pairs() {
        let r = run_suite(Suite::Structure, &SuiteConfig::new(1, 1)).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(matches!(run_suite(Suite::Structure, &SuiteConfig::new(1, 2)), Err(Error::InadmissiblePair { .. })));
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = SuiteConfig { seed: 42, ..SuiteConfig::new(2, 2) };
        let a = serde_json::to_string(&run_suite(Suite::Structure, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite(Suite::Structure, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tolerance_overrides_apply() {
        let mut cfg = SuiteConfig::new(1, 2);
        cfg.tolerances.insert("cancellation_j0".into(), 1e-30);
        let r = run_suite(Suite::Cancellation, &cfg).unwrap();
        assert_eq!(r.check("cancellation_j0").unwrap().tol, 1e-30);
        cfg.tolerances.insert("x".into(), -1.0);
        assert!(run_suite(Suite::Cancellation, &cfg).is_err());
    }

    #[test]
    fn threshold_sequence_logic() {
        use Verdict::*;
        assert!(flips_at_threshold(&[(2.0, Diverges), (3.0, Inconclusive), (3.5, Converges)], 3.0));
        assert!(!flips_at_threshold(&[(2.0, Diverges), (2.5, Converges), (3.5, Converges)], 3.0));
        assert!(!flips_at_threshold(&[(2.0, Diverges), (3.5, Diverges)], 3.0));
    }

    #[test]
    fn generating_function_identity() {
        assert!(laguerre_generating_error(0.0, 0.3, 60) < 1e-12);
        assert!(laguerre_generating_error(2.0, 0.3, 60) < 1e-12);
        assert!(laguerre_generating_error(1.0, 0.3, 3) > 1e-4);
    }
}
