//! H-type group structures and their arithmetic.
//!
//! An irreducible skew Clifford module is built from left multiplication by imaginary
//! units of ℂ, ℍ or 𝕆 (`m <= 7`), a doubling for `m = 8`, and the period-8 step
//! `A_i ⊗ ω, I ⊗ B_j` beyond. The module is replicated to dimension `2n` and put in
//! an adapted basis `(x_1..x_n, y_1..y_n)` with `y_l = U^1 x_l`, so that
//! `U^1 = [[0, -I], [I, 0]]` and `[z, w]_1 = Im(z · w̄)`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::report::{Check, VerificationReport};

/// Irreducible skew Clifford-module dimension for `m` anticommuting complex structures.
pub fn clifford_dim(m: usize) -> usize {
    const TABLE: [usize; 8] = [2, 4, 4, 8, 8, 8, 8, 16];
    assert!(m >= 1, "m must be positive");
    if m <= 8 {
        TABLE[m - 1]
    } else {
        16 * clifford_dim(m - 8)
    }
}

pub fn is_admissible(n: usize, m: usize) -> bool {
    n >= 1 && m >= 1 && (2 * n) % clifford_dim(m) == 0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub z: Vec<f64>,
    pub t: Vec<f64>,
}

impl GroupPoint {
    pub fn new(z: Vec<f64>, t: Vec<f64>) -> Self {
        Self { z, t }
    }

    pub fn identity(n: usize, m: usize) -> Self {
        Self { z: vec![0.0; 2 * n], t: vec![0.0; m] }
    }

    pub fn inverse(&self) -> Self {
        Self { z: self.z.iter().map(|v| -v).collect(), t: self.t.iter().map(|v| -v).collect() }
    }

    /// `δ_r(z, t) = (r z, r² t)`.
    pub fn dilate(&self, r: f64) -> Self {
        Self { z: self.z.iter().map(|v| r * v).collect(), t: self.t.iter().map(|v| r * r * v).collect() }
    }

    pub fn z_norm(&self) -> f64 {
        norm(&self.z)
    }

    pub fn t_norm(&self) -> f64 {
        norm(&self.t)
    }

    /// `(|z|⁴ + |t|²)^{1/4}`.
    pub fn koranyi_norm(&self) -> f64 {
        let z2 = self.z.iter().map(|v| v * v).sum::<f64>();
        (z2 * z2 + self.t.iter().map(|v| v * v).sum::<f64>()).sqrt().sqrt()
    }

    pub fn distance(&self, other: &GroupPoint) -> f64 {
        let d: f64 = self
            .z
            .iter()
            .zip(&other.z)
            .chain(self.t.iter().zip(&other.t))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d.sqrt()
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dilate(r: f64, p: &GroupPoint) -> Result<GroupPoint> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("dilation factor must be positive, got {r}")));
    }
    Ok(p.dilate(r))
}

pub fn koranyi_norm(p: &GroupPoint) -> f64 {
    p.koranyi_norm()
}

#[derive(Clone, Debug, PartialEq)]
pub struct HTypeGroup {
    pub n: usize,
    pub m: usize,
    u: Vec<DMatrix<f64>>,
    /// Nonzero entries `(row, col, value)` of each `U^j`.
    entries: Vec<Vec<(usize, usize, f64)>>,
}

/// Multiplication in the Cayley–Dickson algebra of dimension `a.len()` (a power of two):
/// `(a, b)(c, d) = (ac - d̄ b, d a + b c̄)`.
fn cd_mul(x: &[f64], y: &[f64]) -> Vec<f64> {
    let len = x.len();
    if len == 1 {
        return vec![x[0] * y[0]];
    }
    let h = len / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let conj = |v: &[f64]| -> Vec<f64> {
        let mut w: Vec<f64> = v.iter().map(|e| -e).collect();
        w[0] = v[0];
        w
    };
    let ac = cd_mul(a, c);
    let dbar_b = cd_mul(&conj(d), b);
    let da = cd_mul(d, a);
    let b_cbar = cd_mul(b, &conj(c));
    let mut out = Vec::with_capacity(len);
    out.extend(ac.iter().zip(&dbar_b).map(|(p, q)| p - q));
    out.extend(da.iter().zip(&b_cbar).map(|(p, q)| p + q));
    out
}

/// Left multiplication by the `i`-th imaginary unit in the algebra of dimension `dim`.
fn left_mult(dim: usize, i: usize) -> DMatrix<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    DMatrix::from_fn(dim, dim, |r, c| {
        let mut basis = vec![0.0; dim];
        basis[c] = 1.0;
        cd_mul(&e, &basis)[r]
    })
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// `m` mutually anticommuting skew orthogonal matrices of size `clifford_dim(m)`.
fn irreducible_module(m: usize) -> Vec<DMatrix<f64>> {
    match m {
        1 => vec![left_mult(2, 1)],
        2 | 3 => (1..=m).map(|i| left_mult(4, i)).collect(),
        4..=7 => (1..=m).map(|i| left_mult(8, i)).collect(),
        8 => {
            let sz = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
            let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
            let mut v: Vec<DMatrix<f64>> = (1..=7).map(|i| kron(&left_mult(8, i), &sz)).collect();
            v.push(kron(&DMatrix::identity(8, 8), &j));
            v
        }
        _ => {
            let b = irreducible_module(8);
            let omega = b.iter().skip(1).fold(b[0].clone(), |acc, x| acc * x);
            let a = irreducible_module(m - 8);
            let da = a[0].nrows();
            let mut v: Vec<DMatrix<f64>> = a.iter().map(|ai| kron(ai, &omega)).collect();
            v.extend(b.iter().map(|bj| kron(&DMatrix::identity(da, da), bj)));
            v
        }
    }
}

/// Orthonormal basis `(x_1..x_h, V x_1..V x_h)` of `R^{2h}` for a complex structure `V`.
fn adapted_basis(v: &DMatrix<f64>) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = v.nrows();
    let mut span: Vec<Vec<f64>> = Vec::new();
    let mut pairs = Vec::new();
    for k in 0..d {
        if pairs.len() * 2 == d {
            break;
        }
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        for s in &span {
            let dot: f64 = e.iter().zip(s).map(|(a, b)| a * b).sum();
            e.iter_mut().zip(s).for_each(|(a, b)| *a -= dot * b);
        }
        let nrm = norm(&e);
        if nrm < 1e-8 {
            continue;
        }
        e.iter_mut().for_each(|a| *a /= nrm);
        let y: Vec<f64> = (v * nalgebra::DVector::from_vec(e.clone())).iter().copied().collect();
        span.push(e.clone());
        span.push(y.clone());
        pairs.push((e, y));
    }
    pairs
}

pub fn build_htype(n: usize, m: usize) -> Result<HTypeGroup> {
    if n == 0 || m == 0 {
        return Err(invalid(format!("n and m must be positive, got ({n}, {m})")));
    }
    let d = clifford_dim(m);
    if (2 * n) % d != 0 {
        return Err(Error::InadmissiblePair { n, m, d });
    }
    let module = irreducible_module(m);
    let pairs = adapted_basis(&module[0]);
    let blocks = 2 * n / d;
    let h = d / 2;
    // Columns: all x vectors (block-major), then all y vectors.
    let mut basis = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for b in 0..blocks {
        for (l, (x, y)) in pairs.iter().enumerate() {
            let col_x = b * h + l;
            let col_y = n + b * h + l;
            for r in 0..d {
                basis[(b * d + r, col_x)] = x[r];
                basis[(b * d + r, col_y)] = y[r];
            }
        }
    }
    let u: Vec<DMatrix<f64>> = module
        .iter()
        .map(|vj| {
            let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
            for b in 0..blocks {
                big.view_mut((b * d, b * d), (d, d)).copy_from(vj);
            }
            let mut uj = basis.transpose() * big * &basis;
            uj.iter_mut().for_each(|x| {
                if x.abs() < 1e-15 {
                    *x = 0.0
                }
            });
            uj
        })
        .collect();
    HTypeGroup::from_matrices(n, u)
}

impl HTypeGroup {
    /// Wrap arbitrary `2n × 2n` matrices without validating the H-type relations;
    /// see [`HTypeGroup::verify_structure`].
    pub fn from_matrices(n: usize, u: Vec<DMatrix<f64>>) -> Result<Self> {
        if u.is_empty() {
            return Err(invalid("at least one structure matrix is required"));
        }
        for mat in &u {
            if mat.nrows() != 2 * n || mat.ncols() != 2 * n {
                return Err(Error::DimensionMismatch { expected: 2 * n, got: mat.nrows().max(mat.ncols()) });
            }
        }
        let entries = u
            .iter()
            .map(|mat| {
                let mut e = Vec::new();
                for c in 0..mat.ncols() {
                    for r in 0..mat.nrows() {
                        if mat[(r, c)] != 0.0 {
                            e.push((r, c, mat[(r, c)]));
                        }
                    }
                }
                e
            })
            .collect();
        Ok(Self { n, m: u.len(), u, entries })
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.u
    }

    /// Homogeneous dimension `2n + 2m`.
    pub fn homogeneous_dim(&self) -> usize {
        2 * self.n + 2 * self.m
    }

    pub fn identity(&self) -> GroupPoint {
        GroupPoint::identity(self.n, self.m)
    }

    fn check_z(&self, v: &[f64]) -> Result<()> {
        if v.len() != 2 * self.n {
            return Err(Error::DimensionMismatch { expected: 2 * self.n, got: v.len() });
        }
        Ok(())
    }

    fn check_point(&self, p: &GroupPoint) -> Result<()> {
        self.check_z(&p.z)?;
        if p.t.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: p.t.len() });
        }
        Ok(())
    }

    /// `[z, w]_j = <z, U^j w>`.
    pub fn bracket(&self, z: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        self.check_z(z)?;
        self.check_z(w)?;
        Ok(self.bracket_unchecked(z, w))
    }

    pub(crate) fn bracket_unchecked(&self, z: &[f64], w: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.iter().map(|&(r, c, v)| z[r] * v * w[c]).sum())
            .collect()
    }

    /// `J_a = Σ a_j (U^j)ᵀ`, so that `<J_a v, v'> = <a, [v, v']>`.
    pub fn jmap(&self, a: &[f64]) -> Result<DMatrix<f64>> {
        if a.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: a.len() });
        }
        let dim = 2 * self.n;
        Ok(self
            .u
            .iter()
            .zip(a)
            .fold(DMatrix::zeros(dim, dim), |acc, (uj, &aj)| acc + uj.transpose() * aj))
    }

    /// `(z, t)(z', t') = (z + z', t + t' + ½[z, z'])`.
    pub fn multiply(&self, p: &GroupPoint, q: &GroupPoint) -> Result<GroupPoint> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.multiply_unchecked(p, q))
    }

    pub(crate) fn multiply_unchecked(&self, p: &GroupPoint, q: &GroupPoint) -> GroupPoint {
        let br = self.bracket_unchecked(&p.z, &q.z);
        GroupPoint {
            z: p.z.iter().zip(&q.z).map(|(a, b)| a + b).collect(),
            t: p.t.iter().zip(&q.t).zip(&br).map(|((a, b), c)| a + b + 0.5 * c).collect(),
        }
    }

    /// Deterministic random point with coordinates in `[-scale, scale]`.
    pub fn random_point<R: Rng>(&self, rng: &mut R, scale: f64) -> GroupPoint {
        GroupPoint {
            z: (0..2 * self.n).map(|_| rng.gen_range(-scale..scale)).collect(),
            t: (0..self.m).map(|_| rng.gen_range(-scale..scale)).collect(),
        }
    }

    /// Maximum deviations from the H-type relations, with `J_a² = -|a|² I`
    /// sampled at 100 seeded random unit vectors `a`.
    pub fn verify_structure(&self, tol: f64) -> VerificationReport {
        self.verify_structure_seeded(tol, 0)
    }

    pub fn verify_structure_seeded(&self, tol: f64, seed: u64) -> VerificationReport {
        let dim = 2 * self.n;
        let id = DMatrix::<f64>::identity(dim, dim);
        let max_abs = |m: &DMatrix<f64>| m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut skew = 0.0f64;
        let mut orth = 0.0f64;
        let mut anti = 0.0f64;
        for (i, ui) in self.u.iter().enumerate() {
            skew = skew.max(max_abs(&(ui + ui.transpose())));
            orth = orth.max(max_abs(&(ui.transpose() * ui - &id)));
            for uj in &self.u[i + 1..] {
                anti = anti.max(max_abs(&(ui * uj + uj * ui)));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut jsq = 0.0f64;
        for _ in 0..100 {
            let mut a: Vec<f64> = (0..self.m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nrm = norm(&a).max(1e-300);
            a.iter_mut().for_each(|x| *x /= nrm);
            if let Ok(j) = self.jmap(&a) {
                jsq = jsq.max(max_abs(&(&j * &j + &id)));
            }
        }
        let mut report = VerificationReport::new("structure");
        report.config_echo = serde_json::json!({ "n": self.n, "m": self.m });
        report.push(Check::absolute("skew", skew, 1.0, tol));
        report.push(Check::absolute("orthogonal", orth, 1.0, tol));
        report.push(Check::absolute("anticommute", anti, 1.0, tol));
        report.push(Check::absolute("j_squared", jsq, 1.0, tol));
        report
    }
}
