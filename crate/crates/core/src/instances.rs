//! Seeded benchmark instances.
//!
//! All draws come from one Xoshiro256++ stream seeded with
//! `Xoshiro256PlusPlus::seed_from_u64(seed)`. `U[p, q]` is
//! `p + (q − p)·u` with `u` the generator's standard `f64` in `[0, 1)`.
//!
//! Knapsack families draw the recipe's vectors one after the other over all
//! indices (in the order listed below), then the `(l, u)` pairs index by
//! index, then `r`:
//!
//! | family | draws |
//! |---|---|
//! | uncorrelated | `d, a, b ~ U[10, 25]` |
//! | weakly correlated | `b ~ U[10, 25]`, `d ~ U[b−5, b+5]`, `a ~ U[b−5, b+5]` |
//! | correlated | `b ~ U[10, 25]`, `d = a = b + 5` |
//!
//! Bounds are the min and max of two `U[10, 25]` draws and
//! `r ~ U[bᵀl, bᵀu]`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{domain, CqkError, Field, Result};
use crate::problem::{CqkInstance, SimplexInstance};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    CqkUncorrelated,
    CqkWeaklyCorrelated,
    CqkCorrelated,
    /// `yᵢ ~ U(0, 1)`
    SimplexU01,
    /// `yᵢ ~ N(0, 1)`
    SimplexN01,
    /// `yᵢ ~ N(0, 10⁻³)`, variance `10⁻³`.
    SimplexN0m3,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::CqkUncorrelated,
        Family::CqkWeaklyCorrelated,
        Family::CqkCorrelated,
        Family::SimplexU01,
        Family::SimplexN01,
        Family::SimplexN0m3,
    ];
    pub const CQK: [Family; 3] = [
        Family::CqkUncorrelated,
        Family::CqkWeaklyCorrelated,
        Family::CqkCorrelated,
    ];
    pub const SIMPLEX: [Family; 3] = [Family::SimplexU01, Family::SimplexN01, Family::SimplexN0m3];

    pub fn name(self) -> &'static str {
        match self {
            Family::CqkUncorrelated => "cqk-uncorrelated",
            Family::CqkWeaklyCorrelated => "cqk-weak",
            Family::CqkCorrelated => "cqk-correlated",
            Family::SimplexU01 => "simplex-u01",
            Family::SimplexN01 => "simplex-n01",
            Family::SimplexN0m3 => "simplex-n0m3",
        }
    }

    pub fn is_cqk(self) -> bool {
        Family::CQK.contains(&self)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
                format!("unknown family `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        GeneratorSpec { family, n, seed }
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(domain(Field::Dimension, 0, "n must be at least 1"));
        }
        Ok(())
    }
}

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn uniform(g: &mut impl Rng, p: f64, q: f64) -> f64 {
    p + (q - p) * g.gen::<f64>()
}

/// Draws a knapsack instance of one of the three knapsack families.
pub fn gen_cqk(spec: &GeneratorSpec) -> Result<CqkInstance<f64>> {
    spec.check()?;
    let n = spec.n;
    let mut g = rng(spec.seed);
    let draw = |g: &mut Xoshiro256PlusPlus| uniform(g, 10.0, 25.0);
    let (d, a, b) = match spec.family {
        Family::CqkUncorrelated => {
            let d: Vec<f64> = (0..n).map(|_| draw(&mut g)).collect();
            let a: Vec<f64> = (0..n).map(|_| draw(&mut g)).collect();
            let b: Vec<f64> = (0..n).map(|_| draw(&mut g)).collect();
            (d, a, b)
        }
        Family::CqkWeaklyCorrelated => {
            let b: Vec<f64> = (0..n).map(|_| draw(&mut g)).collect();
            let d: Vec<f64> = b.iter().map(|&bi| uniform(&mut g, bi - 5.0, bi + 5.0)).collect();
            let a: Vec<f64> = b.iter().map(|&bi| uniform(&mut g, bi - 5.0, bi + 5.0)).collect();
            (d, a, b)
        }
        Family::CqkCorrelated => {
            let b: Vec<f64> = (0..n).map(|_| draw(&mut g)).collect();
            let d: Vec<f64> = b.iter().map(|&bi| bi + 5.0).collect();
            (d.clone(), d, b)
        }
        _ => return Err(CqkError::FamilyMismatch(spec.family.name())),
    };
    let mut l = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        let (p, q) = (draw(&mut g), draw(&mut g));
        l.push(p.min(q));
        u.push(p.max(q));
    }
    let btl: f64 = b.iter().zip(&l).map(|(b, l)| b * l).sum();
    let btu: f64 = b.iter().zip(&u).map(|(b, u)| b * u).sum();
    let r = uniform(&mut g, btl, btu).max(btl).min(btu);
    CqkInstance::new(d, a, b, l, u, r)
}

/// Draws the point to project for one of the simplex families. A vector
/// with an exact zero is discarded and drawn again from the same stream.
pub fn gen_simplex_y(spec: &GeneratorSpec) -> Result<Vec<f64>> {
    spec.check()?;
    let mut g = rng(spec.seed);
    let sample: fn(&mut Xoshiro256PlusPlus) -> f64 = match spec.family {
        Family::SimplexU01 => |g| g.gen::<f64>(),
        Family::SimplexN01 => |g| g.sample(StandardNormal),
        Family::SimplexN0m3 => |g| 1e-3f64.sqrt() * g.sample::<f64, _>(StandardNormal),
        _ => return Err(CqkError::FamilyMismatch(spec.family.name())),
    };
    loop {
        let y: Vec<f64> = (0..spec.n).map(|_| sample(&mut g)).collect();
        if y.iter().all(|&v| v != 0.0) {
            return Ok(y);
        }
    }
}

/// Simplex instance with the drawn point and level `r`.
pub fn gen_simplex(spec: &GeneratorSpec, r: f64) -> Result<SimplexInstance<f64>> {
    SimplexInstance::new(gen_simplex_y(spec)?, r)
}

/// Two Gaussian clouds with unit covariance whose means are `separation`
/// apart along the diagonal. Returns row-major points and `±1` labels,
/// alternating so that the classes are balanced.
pub fn gen_blobs(n: usize, dim: usize, separation: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || dim == 0 {
        return Err(domain(Field::Dimension, 0, "n and dim must be at least 1"));
    }
    let mut g = rng(seed);
    let shift = 0.5 * separation / (dim as f64).sqrt();
    let mut points = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        labels.push(label);
        for _ in 0..dim {
            let z: f64 = g.sample(StandardNormal);
            points.push(z + label * shift);
        }
    }
    Ok((points, labels))
}

/// Sparse least-squares data `b = A x_true`.
#[derive(Debug, Clone)]
pub struct SparseLs {
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub x_true: Vec<f64>,
}

/// Random `m × n` matrix where each entry is nonzero with probability
/// `density` and distributed as `N(0, 1/(m·density))`, and a `k`-sparse
/// `x_true` with standard normal entries.
pub fn gen_sparse_ls(m: usize, n: usize, density: f64, k: usize, seed: u64) -> Result<SparseLs> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(domain(Field::Dimension, 0, "density must lie in (0, 1]"));
    }
    if m == 0 || n == 0 || k > n {
        return Err(domain(Field::Dimension, 0, "need m, n ≥ 1 and k ≤ n"));
    }
    let mut g = rng(seed);
    let scale = 1.0 / (m as f64 * density).sqrt();
    let mut triplets = Vec::new();
    for r in 0..m {
        for c in 0..n {
            if g.gen::<f64>() < density {
                let v: f64 = g.sample(StandardNormal);
                triplets.push((r, c, v * scale));
            }
        }
    }
    let a = CsrMatrix::from_triplets(m, n, triplets)?;
    let mut x_true = vec![0.0; n];
    for i in rand::seq::index::sample(&mut g, n, k) {
        let mut v: f64 = g.sample(StandardNormal);
        while v == 0.0 {
            v = g.sample(StandardNormal);
        }
        x_true[i] = v;
    }
    let mut b = vec![0.0; m];
    a.matvec(&x_true, &mut b);
    Ok(SparseLs { a, b, x_true })
}
