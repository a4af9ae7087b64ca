//! Spectral projected gradient with a nonmonotone line search.
//!
//! Search direction `dᵏ = P(xᵏ − αₖ∇f(xᵏ)) − xᵏ`, step `tₖ` halved until
//! `f(xᵏ + tₖdᵏ) ≤ max_{j<M} f(xᵏ⁻ʲ) + γ tₖ ∇f(xᵏ)ᵀdᵏ`, and `αₖ₊₁ = sᵀs/sᵀy`
//! clamped to `[α_min, α_max]`. Stops when `‖P(x − ∇f(x)) − x‖∞ < tol`.

use crate::error::{domain, CqkError, Field, Result};
use crate::instances::SparseLs;
use crate::newton::{solve_cqk, SolverOptions};
use crate::parallel::par_solve_cqk;
use crate::problem::CqkInstance;
use crate::simplex::project_l1_warm;
use crate::sparse::CsrMatrix;

pub const MEMORY: usize = 10;
pub const SUFFICIENT_DECREASE: f64 = 1e-4;
pub const STEP_MIN: f64 = 1e-10;
pub const STEP_MAX: f64 = 1e10;

/// Projection result with the inner solver's iteration count.
#[derive(Debug, Clone)]
pub struct Projected {
    pub x: Vec<f64>,
    pub iterations: usize,
}

type ValueGrad<'a> = Box<dyn FnMut(&[f64], &mut [f64]) -> f64 + 'a>;
type Value<'a> = Box<dyn FnMut(&[f64]) -> f64 + 'a>;
type Project<'a> = Box<dyn FnMut(&[f64], Option<&[f64]>) -> Result<Projected> + 'a>;

/// Smooth objective over a closed convex set given by its projector.
///
/// The projector receives the point to project and, when warm starting is
/// on, the current iterate as an estimate of the answer.
pub struct SpgProblem<'a> {
    pub n: usize,
    value_grad: ValueGrad<'a>,
    value: Value<'a>,
    project: Project<'a>,
    pub warm_start: bool,
}

impl<'a> SpgProblem<'a> {
    pub fn new(
        n: usize,
        value_grad: impl FnMut(&[f64], &mut [f64]) -> f64 + 'a,
        value: impl FnMut(&[f64]) -> f64 + 'a,
        project: impl FnMut(&[f64], Option<&[f64]>) -> Result<Projected> + 'a,
    ) -> Self {
        SpgProblem {
            n,
            value_grad: Box::new(value_grad),
            value: Box::new(value),
            project: Box::new(project),
            warm_start: false,
        }
    }

    pub fn with_warm_start(mut self, on: bool) -> Self {
        self.warm_start = on;
        self
    }

    pub fn value(&mut self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn value_grad(&mut self, x: &[f64], g: &mut [f64]) -> f64 {
        (self.value_grad)(x, g)
    }

    pub fn project(&mut self, z: &[f64], estimate: Option<&[f64]>) -> Result<Projected> {
        (self.project)(z, estimate)
    }
}

/// Per-iteration record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpgIteration {
    /// Inner iterations of the projection that produced the search direction.
    pub inner_iterations: usize,
    pub warm: bool,
    pub objective: f64,
    /// Reference value of the line search (max over the memory window).
    pub reference: f64,
    pub step: f64,
    pub pg_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SpgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖P(x − ∇f(x)) − x‖∞` at the returned point.
    pub pg_norm: f64,
    pub history: Vec<SpgIteration>,
}

fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs SPG from the feasible point `x0`.
pub fn spg_solve(prob: &mut SpgProblem<'_>, x0: &[f64], tol: f64, max_iter: usize) -> Result<SpgResult> {
    if x0.len() != prob.n {
        return Err(CqkError::DimensionMismatch {
            expected: prob.n,
            found: x0.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(CqkError::ContractViolation("tol must be positive"));
    }
    let n = prob.n;
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = prob.value_grad(&x, &mut g);
    let mut recent = std::collections::VecDeque::with_capacity(MEMORY);
    recent.push_back(f);

    let ginf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut alpha = if ginf > 0.0 { (1.0 / ginf).clamp(STEP_MIN, STEP_MAX) } else { 1.0 };
    let mut history = Vec::new();
    let mut z = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    for k in 0.. {
        let warm = prob.warm_start;
        for i in 0..n {
            z[i] = x[i] - g[i];
        }
        let pg = prob.project(&z, warm.then_some(&x[..]))?;
        let pg_norm = inf_norm_diff(&pg.x, &x);
        if pg_norm < tol || k >= max_iter {
            return Ok(SpgResult {
                x,
                iterations: k,
                converged: pg_norm < tol,
                pg_norm,
                history,
            });
        }

        for i in 0..n {
            z[i] = x[i] - alpha * g[i];
        }
        let proj = prob.project(&z, warm.then_some(&x[..]))?;
        let d: Vec<f64> = proj.x.iter().zip(&x).map(|(p, xi)| p - xi).collect();
        let gtd: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let reference = recent.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let mut t = 1.0;
        let f_trial = loop {
            for i in 0..n {
                trial[i] = x[i] + t * d[i];
            }
            let ft = prob.value(&trial);
            if ft <= reference + SUFFICIENT_DECREASE * t * gtd || t < 1e-20 {
                break ft;
            }
            t *= 0.5;
        };
        let f_new = prob.value_grad(&trial, &mut g_new);
        debug_assert!((f_new - f_trial).abs() <= 1e-8 * f_trial.abs().max(1.0));

        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..n {
            let s = trial[i] - x[i];
            ss += s * s;
            sy += s * (g_new[i] - g[i]);
        }
        alpha = if sy > 0.0 { (ss / sy).clamp(STEP_MIN, STEP_MAX) } else { STEP_MAX };

        history.push(SpgIteration {
            inner_iterations: proj.iterations,
            warm,
            objective: f_new,
            reference,
            step: t,
            pg_norm,
        });

        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        if recent.len() == MEMORY {
            recent.pop_front();
        }
        recent.push_back(f);
    }
    unreachable!()
}

/// Dense kernel matrix `Hᵢⱼ = yᵢyⱼ exp(−γ‖pᵢ − pⱼ‖²)` for row-major points.
pub fn svm_hessian(points: &[f64], labels: &[f64], gamma: f64) -> Vec<f64> {
    let n = labels.len();
    let dim = points.len() / n;
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        let pi = &points[i * dim..(i + 1) * dim];
        h[i * n + i] = 1.0;
        for j in 0..i {
            let pj = &points[j * dim..(j + 1) * dim];
            let d2: f64 = pi.iter().zip(pj).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = labels[i] * labels[j] * (-gamma * d2).exp();
            h[i * n + j] = v;
            h[j * n + i] = v;
        }
    }
    h
}

fn dense_matvec(h: &[f64], x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = h[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// Projector onto `{yᵀx = 0, 0 ≤ x ≤ C}` through the knapsack solver, after
/// flipping the sign of the variables with label `−1`.
pub struct SvmProjector {
    labels: Vec<f64>,
    c: f64,
    pub workers: usize,
    pub opts: SolverOptions<f64>,
}

impl SvmProjector {
    pub fn new(labels: Vec<f64>, c: f64) -> Self {
        SvmProjector {
            labels,
            c,
            workers: 1,
            opts: SolverOptions::default(),
        }
    }

    pub fn project(&self, z: &[f64], estimate: Option<&[f64]>) -> Result<Projected> {
        let n = z.len();
        let y = &self.labels;
        let (l, u): (Vec<f64>, Vec<f64>) = y
            .iter()
            .map(|&s| if s > 0.0 { (0.0, self.c) } else { (-self.c, 0.0) })
            .unzip();
        let a: Vec<f64> = z.iter().zip(y).map(|(zi, s)| zi * s).collect();
        let inst = CqkInstance::new(vec![1.0; n], a, vec![1.0; n], l, u, 0.0)?;
        let xbar: Option<Vec<f64>> = estimate.map(|e| e.iter().zip(y).map(|(v, s)| v * s).collect());
        let out = if self.workers > 1 {
            par_solve_cqk(&inst, &self.opts, self.workers, xbar.as_deref())?
        } else {
            solve_cqk(&inst, &self.opts, xbar.as_deref())?
        };
        let w = out
            .x
            .ok_or(CqkError::ContractViolation("SVM projection subproblem is always feasible"))?
            .into_dense();
        Ok(Projected {
            x: w.iter().zip(y).map(|(v, s)| v * s).collect(),
            iterations: out.iterations,
        })
    }
}

/// SVM dual `min ½xᵀHx − eᵀx` over `{yᵀx = 0, 0 ≤ x ≤ C}` with a Gaussian kernel.
pub fn build_svm_dual<'a>(
    points: &[f64],
    labels: &[f64],
    gamma: f64,
    c: f64,
) -> Result<SpgProblem<'a>> {
    let n = labels.len();
    if n < 2 || points.is_empty() || !points.len().is_multiple_of(n) {
        return Err(domain(Field::Dimension, 0, "need n ≥ 2 points with a common dimension"));
    }
    if let Some(i) = labels.iter().position(|&s| s != 1.0 && s != -1.0) {
        return Err(domain(Field::Labels, i, "labels must be ±1"));
    }
    if labels.iter().all(|&s| s == labels[0]) {
        return Err(domain(Field::Labels, 0, "both classes must be present"));
    }
    if !(gamma > 0.0 && c > 0.0) {
        return Err(domain(Field::Rhs, 0, "gamma and C must be positive"));
    }
    let h = std::rc::Rc::new(svm_hessian(points, labels, gamma));
    let h2 = h.clone();
    let projector = SvmProjector::new(labels.to_vec(), c);
    let mut hx = vec![0.0; n];
    let mut hx2 = vec![0.0; n];
    Ok(SpgProblem::new(
        n,
        move |x, g| {
            dense_matvec(&h, x, &mut hx);
            let mut f = 0.0;
            for i in 0..n {
                g[i] = hx[i] - 1.0;
                f += 0.5 * x[i] * hx[i] - x[i];
            }
            f
        },
        move |x| {
            dense_matvec(&h2, x, &mut hx2);
            x.iter().zip(&hx2).map(|(xi, hi)| 0.5 * xi * hi - xi).sum()
        },
        move |z, e| projector.project(z, e),
    ))
}

/// SVM dual with a caller-supplied projector configuration.
pub fn build_svm_dual_with<'a>(
    points: &[f64],
    labels: &[f64],
    gamma: f64,
    projector: SvmProjector,
) -> Result<SpgProblem<'a>> {
    let c = projector.c;
    let mut p = build_svm_dual(points, labels, gamma, c)?;
    p.project = Box::new(move |z, e| projector.project(z, e));
    Ok(p)
}

/// Basis pursuit `min ½‖Ax − b‖²` over `{‖x‖₁ ≤ r}`.
pub fn build_basis_pursuit<'a>(a: &'a CsrMatrix, b: &'a [f64], r: f64) -> Result<SpgProblem<'a>> {
    if a.rows() != b.len() {
        return Err(CqkError::DimensionMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    if a.nnz() == 0 {
        return Err(domain(Field::D, 0, "matrix must be nonzero"));
    }
    if !(r > 0.0) {
        return Err(domain(Field::Rhs, 0, "radius must be positive"));
    }
    let opts = SolverOptions::default();
    let residual = std::cell::RefCell::new(vec![0.0; a.rows()]);
    let n = a.cols();
    let value = move |x: &[f64], res: &mut Vec<f64>| {
        a.matvec(x, res);
        let mut f = 0.0;
        for (ri, bi) in res.iter_mut().zip(b) {
            *ri -= bi;
            f += 0.5 * *ri * *ri;
        }
        f
    };
    let residual2 = std::cell::RefCell::new(vec![0.0; a.rows()]);
    Ok(SpgProblem::new(
        n,
        move |x, g| {
            let mut res = residual.borrow_mut();
            let f = value(x, &mut res);
            a.tmatvec(&res, g);
            f
        },
        move |x| value(x, &mut residual2.borrow_mut()),
        move |z, e| {
            let p = project_l1_warm(z, r, &opts, e)?;
            Ok(Projected {
                x: p.x,
                iterations: p.iterations,
            })
        },
    ))
}

/// Basis pursuit from generated sparse data.
pub fn build_basis_pursuit_from(ls: &SparseLs, r: f64) -> Result<SpgProblem<'_>> {
    build_basis_pursuit(&ls.a, &ls.b, r)
}
