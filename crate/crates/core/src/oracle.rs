//! Slow reference solvers for tests.
//!
//! They share no code with the Newton solvers: `φ` is piecewise linear, so
//! sorting its breakpoints and evaluating it at each with compensated sums
//! pins down the crossing segment, where the root is one division away.

use crate::problem::CqkInstance;

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Solved,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub status: OracleStatus,
    pub lambda: f64,
    /// Empty when infeasible.
    pub x: Vec<f64>,
}

fn lower_bp(inst: &CqkInstance<f64>, i: usize) -> f64 {
    (inst.d()[i] * inst.l()[i] - inst.a()[i]) / inst.b()[i]
}

fn upper_bp(inst: &CqkInstance<f64>, i: usize) -> f64 {
    (inst.d()[i] * inst.u()[i] - inst.a()[i]) / inst.b()[i]
}

fn x_at(inst: &CqkInstance<f64>, i: usize, t: f64) -> f64 {
    let v = (inst.b()[i] * t + inst.a()[i]) / inst.d()[i];
    v.min(inst.u()[i]).max(inst.l()[i])
}

fn phi(inst: &CqkInstance<f64>, t: f64) -> f64 {
    (0..inst.len())
        .map(|i| inst.b()[i] * x_at(inst, i, t))
        .collect::<CompensatedSum>()
        .value()
}

fn bound_sum(inst: &CqkInstance<f64>, bounds: &[f64]) -> f64 {
    if bounds.iter().any(|v| v.is_infinite()) {
        return bounds.iter().copied().find(|v| v.is_infinite()).unwrap();
    }
    (0..inst.len())
        .map(|i| inst.b()[i] * bounds[i])
        .collect::<CompensatedSum>()
        .value()
}

/// Exact multiplier of a knapsack instance (64-bit only).
pub fn oracle_lambda(inst: &CqkInstance<f64>) -> OracleSolution {
    let n = inst.len();
    let r = inst.r();
    let infeasible = OracleSolution {
        status: OracleStatus::Infeasible,
        lambda: f64::NAN,
        x: Vec::new(),
    };
    if r < bound_sum(inst, inst.l()) || r > bound_sum(inst, inst.u()) {
        return infeasible;
    }

    let mut bps: Vec<f64> = Vec::with_capacity(2 * n);
    for i in 0..n {
        for v in [lower_bp(inst, i), upper_bp(inst, i)] {
            if v.is_finite() {
                bps.push(v);
            }
        }
    }
    bps.sort_by(f64::total_cmp);
    bps.dedup();

    // first breakpoint where φ reaches r
    let k = bps.partition_point(|&t| phi(inst, t) < r);
    if k < bps.len() && phi(inst, bps[k]) == r {
        return solved(inst, bps[k]);
    }
    let left = if k == 0 { f64::NEG_INFINITY } else { bps[k - 1] };
    let right = if k == bps.len() { f64::INFINITY } else { bps[k] };

    // on (left, right) every variable is at l, at u, or free
    let mut alpha = CompensatedSum::default();
    let mut beta = CompensatedSum::default();
    for i in 0..n {
        let (lo, hi) = (lower_bp(inst, i), upper_bp(inst, i));
        let b = inst.b()[i];
        if lo >= right {
            alpha.add(b * inst.l()[i]);
        } else if hi <= left {
            alpha.add(b * inst.u()[i]);
        } else {
            alpha.add(b * inst.a()[i] / inst.d()[i]);
            beta.add(b * b / inst.d()[i]);
        }
    }
    let beta = beta.value();
    if beta <= 0.0 {
        return infeasible;
    }
    let lambda = ((r - alpha.value()) / beta).max(left).min(right);
    solved(inst, lambda)
}

fn solved(inst: &CqkInstance<f64>, lambda: f64) -> OracleSolution {
    OracleSolution {
        status: OracleStatus::Solved,
        lambda,
        x: (0..inst.len()).map(|i| x_at(inst, i, lambda)).collect(),
    }
}

/// Sort-based projection onto `{x ≥ 0, Σx = r}`. Returns `(λ, x)`.
pub fn oracle_simplex(y: &[f64], r: f64) -> (f64, Vec<f64>) {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&i, &j| y[j].total_cmp(&y[i]));
    let mut prefix = CompensatedSum::default();
    let mut k = 0;
    for (pos, &i) in order.iter().enumerate() {
        prefix.add(y[i]);
        let count = (pos + 1) as f64;
        if y[i] + (r - prefix.value()) / count > 0.0 {
            k = pos + 1;
        }
    }
    let mut free = order[..k].to_vec();
    free.sort_unstable();
    let sum: CompensatedSum = free.iter().map(|&i| y[i]).collect();
    let lambda = (r - sum.value()) / k as f64;
    let x = y.iter().map(|&v| (v + lambda).max(0.0)).collect();
    (lambda, x)
}
