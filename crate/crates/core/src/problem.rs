//! Problem data, the dual map `x(λ)` and the dual residual `φ(λ)`.
//!
//! The knapsack problem is
//!
//! ```text
//! min ½ xᵀDx − aᵀx   s.t.  bᵀx = r,  l ≤ x ≤ u
//! ```
//!
//! with `D = diag(d)`, `d > 0` and `b > 0`. Dualizing the equality gives the
//! primal map `x(λ)ᵢ = clamp((bᵢλ + aᵢ)/dᵢ, lᵢ, uᵢ)` and the scalar equation
//! `φ(λ) = bᵀx(λ) = r`, where `φ` is piecewise linear and non-decreasing.

use crate::error::{domain, CqkError, Field, Result};
use crate::kernel::{DualElements, PhiSums};
use crate::real::Real;

/// Data of a continuous quadratic knapsack instance.
///
/// Infinite bounds are stored as floating-point infinities. Instances are
/// validated on construction and immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct CqkInstance<T> {
    d: Vec<T>,
    a: Vec<T>,
    b: Vec<T>,
    l: Vec<T>,
    u: Vec<T>,
    r: T,
}

impl<T: Real> CqkInstance<T> {
    pub fn new(d: Vec<T>, a: Vec<T>, b: Vec<T>, l: Vec<T>, u: Vec<T>, r: T) -> Result<Self> {
        validate_parts(&d, &a, &b, &l, &u, r)?;
        Ok(Self { d, a, b, l, u, r })
    }

    /// Re-checks every invariant. Always succeeds for a constructed instance.
    pub fn validate(&self) -> Result<()> {
        validate_parts(&self.d, &self.a, &self.b, &self.l, &self.u, self.r)
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn d(&self) -> &[T] {
        &self.d
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn l(&self) -> &[T] {
        &self.l
    }

    pub fn u(&self) -> &[T] {
        &self.u
    }

    pub fn r(&self) -> T {
        self.r
    }

    /// Same instance with a different right-hand side.
    pub fn with_rhs(&self, r: T) -> Result<Self> {
        if !r.is_finite() {
            return Err(domain(Field::Rhs, 0, "right-hand side must be finite"));
        }
        Ok(Self { r, ..self.clone() })
    }

    /// Converts the data to another precision.
    pub fn cast<U: Real>(&self) -> Result<CqkInstance<U>> {
        let c = |v: &[T]| v.iter().map(|&x| U::lit(x.to_f64_lossy())).collect::<Vec<_>>();
        CqkInstance::new(
            c(&self.d),
            c(&self.a),
            c(&self.b),
            c(&self.l),
            c(&self.u),
            U::lit(self.r.to_f64_lossy()),
        )
    }

    /// `x(λ)`, always inside `[l, u]`.
    pub fn eval_x(&self, lambda: T) -> Vec<T> {
        (0..self.len()).map(|i| self.primal(i, lambda)).collect()
    }

    /// `φ(λ)` and both lateral derivatives in a single pass.
    pub fn eval_phi(&self, lambda: T) -> PhiEval<T> {
        let mut sums = PhiSums::default();
        for i in 0..self.len() {
            self.accumulate(i, lambda, &mut sums);
        }
        sums.into()
    }

    /// Multiplier that solves the problem with every bound dropped, restricted to
    /// the variables a primal estimate puts strictly inside their box.
    ///
    /// Without an estimate, or when the estimate has no interior component, all
    /// variables take part.
    pub fn initial_multiplier(&self, xbar: Option<&[T]>) -> Result<T> {
        if let Some(xb) = xbar {
            if xb.len() != self.len() {
                return Err(CqkError::DimensionMismatch {
                    expected: self.len(),
                    found: xb.len(),
                });
            }
        }
        let (s, q) = self.multiplier_sums(0..self.len(), xbar);
        if q > T::zero() {
            return Ok((self.r - s) / q);
        }
        let (s, q) = self.multiplier_sums(0..self.len(), None);
        Ok((self.r - s) / q)
    }

    /// Partial sums `(Σ bᵢaᵢ/dᵢ, Σ bᵢ²/dᵢ)` over the interior set of `xbar`
    /// (or every index when `xbar` is `None`). Variables `xbar` puts at or
    /// beyond a bound add `bᵢ·boundᵢ` to the first sum.
    pub(crate) fn multiplier_sums(
        &self,
        range: std::ops::Range<usize>,
        xbar: Option<&[T]>,
    ) -> (T, T) {
        let mut s = T::zero();
        let mut q = T::zero();
        for i in range {
            if let Some(xb) = xbar {
                if xb[i] <= self.l[i] {
                    s = s + self.b[i] * self.l[i];
                    continue;
                }
                if xb[i] >= self.u[i] {
                    s = s + self.b[i] * self.u[i];
                    continue;
                }
            }
            let bd = self.b[i] / self.d[i];
            s = s + bd * self.a[i];
            q = q + bd * self.b[i];
        }
        (s, q)
    }

    /// Finite breakpoints of `φ`, tagged with their variable index.
    pub fn breakpoints(&self) -> Breakpoints<T> {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for i in 0..self.len() {
            if self.l[i].is_finite() {
                lower.push((i, (self.d[i] * self.l[i] - self.a[i]) / self.b[i]));
            }
            if self.u[i].is_finite() {
                upper.push((i, (self.d[i] * self.u[i] - self.a[i]) / self.b[i]));
            }
        }
        Breakpoints { lower, upper }
    }
}

fn validate_parts<T: Real>(d: &[T], a: &[T], b: &[T], l: &[T], u: &[T], r: T) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Err(CqkError::EmptyIndexSet);
    }
    for v in [a, b, l, u] {
        if v.len() != n {
            return Err(CqkError::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }
    if let Some(i) = d.iter().position(|&x| !(x > T::zero() && x.is_finite())) {
        return Err(domain(Field::D, i, "must be positive and finite"));
    }
    if let Some(i) = a.iter().position(|&x| !x.is_finite()) {
        return Err(domain(Field::A, i, "must be finite"));
    }
    if let Some(i) = b.iter().position(|&x| !(x > T::zero() && x.is_finite())) {
        return Err(domain(Field::B, i, "must be positive and finite"));
    }
    for i in 0..n {
        let (lo, hi) = (l[i], u[i]);
        if lo.is_nan() || hi.is_nan() {
            return Err(domain(Field::Bounds, i, "bound is NaN"));
        }
        if lo == T::infinity() || hi == T::neg_infinity() {
            return Err(domain(Field::Bounds, i, "empty box"));
        }
        if lo > hi {
            return Err(domain(Field::Bounds, i, "lower bound exceeds upper bound"));
        }
    }
    if !r.is_finite() {
        return Err(domain(Field::Rhs, 0, "right-hand side must be finite"));
    }
    Ok(())
}

/// Projection of `y` onto `{x ≥ 0, Σx = r}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexInstance<T> {
    y: Vec<T>,
    r: T,
}

impl<T: Real> SimplexInstance<T> {
    pub fn new(y: Vec<T>, r: T) -> Result<Self> {
        check_simplex(&y, r)?;
        Ok(Self { y, r })
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn into_parts(self) -> (Vec<T>, T) {
        (self.y, self.r)
    }

    /// The same problem as a general knapsack: `d = b = 1`, `a = y`, `l = 0`, `u = ∞`.
    pub fn to_cqk(&self) -> CqkInstance<T> {
        let n = self.len();
        CqkInstance {
            d: vec![T::one(); n],
            a: self.y.clone(),
            b: vec![T::one(); n],
            l: vec![T::zero(); n],
            u: vec![T::infinity(); n],
            r: self.r,
        }
    }

    pub fn cast<U: Real>(&self) -> Result<SimplexInstance<U>> {
        SimplexInstance::new(
            self.y.iter().map(|&v| U::lit(v.to_f64_lossy())).collect(),
            U::lit(self.r.to_f64_lossy()),
        )
    }
}

pub(crate) fn check_simplex<T: Real>(y: &[T], r: T) -> Result<()> {
    if y.is_empty() {
        return Err(CqkError::EmptyIndexSet);
    }
    if !(r > T::zero() && r.is_finite()) {
        return Err(domain(Field::Rhs, 0, "radius must be positive and finite"));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(domain(Field::Y, i, "must be finite"));
    }
    Ok(())
}

/// One evaluation of `φ(λ)` with its left and right derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEval<T> {
    pub value: T,
    pub dminus: T,
    pub dplus: T,
}

impl<T: Real> From<PhiSums<T>> for PhiEval<T> {
    fn from(s: PhiSums<T>) -> Self {
        PhiEval {
            value: s.value,
            dminus: s.dminus,
            dplus: s.dplus,
        }
    }
}

/// Points where `φ` may change slope. Infinite bounds produce no entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoints<T> {
    /// `(i, (dᵢlᵢ − aᵢ)/bᵢ)` for every finite `lᵢ`.
    pub lower: Vec<(usize, T)>,
    /// `(i, (dᵢuᵢ − aᵢ)/bᵢ)` for every finite `uᵢ`.
    pub upper: Vec<(usize, T)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn box_pair() -> CqkInstance<f64> {
        CqkInstance::new(
            vec![1.0, 2.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            1.0,
        )
        .unwrap()
    }

    fn simplex123() -> CqkInstance<f64> {
        SimplexInstance::new(vec![1.0, 2.0, 3.0], 1.0).unwrap().to_cqk()
    }

    #[test]
    fn validate_accepts_unit_box() {
        let inst = CqkInstance::new(
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            1.0,
        );
        assert!(inst.unwrap().validate().is_ok());
    }

    #[test]
    fn validate_reports_negative_d() {
        let err = CqkInstance::new(
            vec![1.0, -1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            1.0,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            CqkError::Domain {
                field: Field::D,
                index: 1,
                ..
            }
        ));
    }

    #[test]
    fn validate_reports_crossed_bounds() {
        let err =
            CqkInstance::new(vec![1.0], vec![0.0], vec![1.0], vec![2.0], vec![1.0], 1.0).unwrap_err();
        assert!(matches!(
            err,
            CqkError::Domain {
                field: Field::Bounds,
                index: 0,
                ..
            }
        ));
    }

    #[test]
    fn validate_rejects_nan_and_empty_box() {
        assert!(CqkInstance::new(vec![1.0], vec![f64::NAN], vec![1.0], vec![0.0], vec![1.0], 1.0)
            .is_err());
        assert!(CqkInstance::new(
            vec![1.0],
            vec![0.0],
            vec![1.0],
            vec![f64::INFINITY],
            vec![f64::INFINITY],
            1.0
        )
        .is_err());
        assert!(CqkInstance::<f64>::new(vec![], vec![], vec![], vec![], vec![], 1.0).is_err());
    }

    #[test]
    fn eval_x_interior_point() {
        let x = box_pair().eval_x(2.0 / 3.0);
        assert_relative_eq!(x[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(x[1], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn eval_x_saturates_at_upper_bounds() {
        assert_eq!(box_pair().eval_x(1e6), vec![1.0, 1.0]);
    }

    #[test]
    fn eval_x_simplex_case() {
        assert_eq!(simplex123().eval_x(-2.0), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn eval_phi_simplex_at_breakpoint() {
        let p = simplex123().eval_phi(-2.0);
        assert_eq!(p.value, 1.0);
        assert_eq!(p.dplus, 2.0);
        assert_eq!(p.dminus, 1.0);
    }

    #[test]
    fn eval_phi_below_all_breakpoints() {
        let p = box_pair().eval_phi(-5.0);
        assert_eq!(p.value, 0.0);
        assert_eq!(p.dplus, 0.0);
        assert_eq!(p.dminus, 0.0);
    }

    #[test]
    fn eval_phi_interior() {
        let p = box_pair().eval_phi(2.0 / 3.0);
        assert_relative_eq!(p.value, 1.0, epsilon = 1e-15);
        assert_eq!(p.dplus, 1.5);
        assert_eq!(p.dminus, 1.5);
    }

    #[test]
    fn initial_multiplier_formula() {
        let lam = simplex123().initial_multiplier(None).unwrap();
        assert_relative_eq!(lam, -5.0 / 3.0, epsilon = 1e-15);

        let n = 4;
        let inst = CqkInstance::new(
            vec![1.0; n],
            vec![0.0; n],
            vec![1.0; n],
            vec![0.0; n],
            vec![10.0; n],
            n as f64,
        )
        .unwrap();
        assert_eq!(inst.initial_multiplier(None).unwrap(), 1.0);
        // every estimate component at a bound: the estimate is discarded
        let xbar = vec![0.0, 10.0, 0.0, 10.0];
        assert_eq!(inst.initial_multiplier(Some(&xbar)).unwrap(), 1.0);
    }

    #[test]
    fn initial_multiplier_uses_interior_set() {
        // J = {0}: λ₀ = (r − a₀)/1
        let inst = simplex123().with_rhs(1.0).unwrap();
        let lam = inst.initial_multiplier(Some(&[0.5, 0.0, 0.0])).unwrap();
        assert_eq!(lam, 0.0);
        assert!(inst.initial_multiplier(Some(&[0.5])).is_err());
    }

    #[test]
    fn breakpoints_examples() {
        let bp = box_pair().breakpoints();
        assert_eq!(bp.lower, vec![(0, 0.0), (1, 0.0)]);
        assert_eq!(bp.upper, vec![(0, 1.0), (1, 2.0)]);

        let bp = simplex123().breakpoints();
        assert_eq!(bp.lower, vec![(0, -1.0), (1, -2.0), (2, -3.0)]);
        assert!(bp.upper.is_empty());

        let degenerate =
            CqkInstance::new(vec![1.0; 3], vec![0.0; 3], vec![1.0; 3], vec![0.0; 3], vec![0.0; 3], 0.0)
                .unwrap();
        let bp = degenerate.breakpoints();
        assert!(bp.lower.iter().chain(&bp.upper).all(|&(_, v)| v == 0.0));
    }

    #[test]
    fn cast_to_f32() {
        let inst = box_pair().cast::<f32>().unwrap();
        assert_eq!(inst.d(), &[1.0f32, 2.0]);
    }
}
