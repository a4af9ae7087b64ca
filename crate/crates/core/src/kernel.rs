//! Per-element work shared by every solver.
//!
//! Each element contributes to `φ(λ)` through a function of `λ` and its own
//! data only. Sequential, chunked and fixing-free drivers all reduce the same
//! [`PhiSums`] produced here.

use crate::problem::CqkInstance;
use crate::real::Real;

/// Partial sums of one sweep over a set of elements.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhiSums<T> {
    /// `Σ bᵢ x(λ)ᵢ`
    pub value: T,
    /// `Σ |bᵢ x(λ)ᵢ|`
    pub abs: T,
    pub dplus: T,
    pub dminus: T,
}

impl<T: Real> PhiSums<T> {
    #[inline]
    pub fn merge(self, o: Self) -> Self {
        PhiSums {
            value: self.value + o.value,
            abs: self.abs + o.abs,
            dplus: self.dplus + o.dplus,
            dminus: self.dminus + o.dminus,
        }
    }
}

/// Side at which a variable is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Data layout seen by the solvers.
///
/// Breakpoints of infinite bounds are reported as `∓∞`, so comparisons with a
/// finite `λ` never select them.
pub trait DualElements<T: Real>: Sync {
    fn len(&self) -> usize;

    /// `(ℓ̲ᵢ, ūᵢ)`.
    fn breakpoints_at(&self, i: usize) -> (T, T);

    /// `x(λ)ᵢ`.
    fn primal(&self, i: usize, lambda: T) -> T;

    /// Adds element `i`'s contribution at `lambda` to `sums`.
    fn accumulate(&self, i: usize, lambda: T, sums: &mut PhiSums<T>);

    /// `(boundᵢ, bᵢ·boundᵢ)` for the requested side.
    fn bound(&self, i: usize, side: Side) -> (T, T);
}

impl<T: Real> DualElements<T> for CqkInstance<T> {
    #[inline]
    fn len(&self) -> usize {
        CqkInstance::len(self)
    }

    #[inline(always)]
    fn breakpoints_at(&self, i: usize) -> (T, T) {
        let (d, a, b) = (self.d()[i], self.a()[i], self.b()[i]);
        ((d * self.l()[i] - a) / b, (d * self.u()[i] - a) / b)
    }

    #[inline(always)]
    fn primal(&self, i: usize, lambda: T) -> T {
        let (lo, hi) = self.breakpoints_at(i);
        let (l, u) = (self.l()[i], self.u()[i]);
        if lambda <= lo {
            l
        } else if lambda >= hi {
            u
        } else {
            ((self.b()[i] * lambda + self.a()[i]) / self.d()[i])
                .max(l)
                .min(u)
        }
    }

    #[inline(always)]
    fn accumulate(&self, i: usize, lambda: T, s: &mut PhiSums<T>) {
        let (d, a, b) = (self.d()[i], self.a()[i], self.b()[i]);
        let (l, u) = (self.l()[i], self.u()[i]);
        let lo = (d * l - a) / b;
        let hi = (d * u - a) / b;
        let x = if lambda <= lo {
            l
        } else if lambda >= hi {
            u
        } else {
            ((b * lambda + a) / d).max(l).min(u)
        };
        let bx = b * x;
        s.value = s.value + bx;
        s.abs = s.abs + bx.abs();
        if lo <= lambda && lambda <= hi {
            let w = b * b / d;
            if lambda < hi {
                s.dplus = s.dplus + w;
            }
            if lo < lambda {
                s.dminus = s.dminus + w;
            }
        }
    }

    #[inline(always)]
    fn bound(&self, i: usize, side: Side) -> (T, T) {
        let v = match side {
            Side::Lower => self.l()[i],
            Side::Upper => self.u()[i],
        };
        (v, self.b()[i] * v)
    }
}

/// Simplex data `y` seen as a knapsack with `d = b = 1`, `l = 0`, `u = ∞`.
#[derive(Debug, Clone, Copy)]
pub struct SimplexView<'a, T> {
    pub y: &'a [T],
}

impl<T: Real> DualElements<T> for SimplexView<'_, T> {
    #[inline]
    fn len(&self) -> usize {
        self.y.len()
    }

    #[inline(always)]
    fn breakpoints_at(&self, i: usize) -> (T, T) {
        (-self.y[i], T::infinity())
    }

    #[inline(always)]
    fn primal(&self, i: usize, lambda: T) -> T {
        let y = self.y[i];
        if lambda <= -y {
            T::zero()
        } else {
            (y + lambda).max(T::zero())
        }
    }

    #[inline(always)]
    fn accumulate(&self, i: usize, lambda: T, s: &mut PhiSums<T>) {
        let y = self.y[i];
        if -y < lambda {
            let x = (y + lambda).max(T::zero());
            s.value = s.value + x;
            s.abs = s.abs + x;
            s.dplus = s.dplus + T::one();
            s.dminus = s.dminus + T::one();
        } else if -y == lambda {
            s.dplus = s.dplus + T::one();
        }
    }

    #[inline(always)]
    fn bound(&self, _i: usize, side: Side) -> (T, T) {
        match side {
            Side::Lower => (T::zero(), T::zero()),
            Side::Upper => (T::infinity(), T::infinity()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::SimplexInstance;

    #[test]
    fn simplex_view_matches_general_kernel() {
        let y = [0.3, -1.2, 2.5, 0.0, -0.4];
        let inst = SimplexInstance::new(y.to_vec(), 1.0).unwrap().to_cqk();
        let view = SimplexView { y: &y };
        for &lam in &[-3.0, -2.5, -0.3, 0.0, 0.4, 1.2, 5.0] {
            let mut a = PhiSums::default();
            let mut b = PhiSums::default();
            for i in 0..y.len() {
                inst.accumulate(i, lam, &mut a);
                view.accumulate(i, lam, &mut b);
                assert_eq!(inst.primal(i, lam), view.primal(i, lam));
            }
            assert_eq!(a, b, "lambda = {lam}");
        }
    }
}
