//! Chunk-owned solver state and the sweep engines built on it.
//!
//! A sweep is the map phase of one Newton iteration: every owner of a set of
//! elements applies the fixing decided at the previous iterate and then adds
//! its elements' contributions at the new multiplier. The driver reduces the
//! partial results and performs the scalar multiplier update.

use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::kernel::{DualElements, PhiSums, Side};
use crate::real::Real;

/// Chunks with fewer active variables than this are coalesced between
/// iterations.
pub const MERGE_THRESHOLD: usize = 1024;

/// Fixing decision taken at `lambda`: when `φ(λ) > r` every variable whose
/// lower breakpoint is at or above `λ` sits at its lower bound in the
/// solution, and symmetrically for the upper side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixing<T> {
    pub lambda: T,
    pub side: Side,
}

impl<T: Real> Fixing<T> {
    #[inline(always)]
    pub(crate) fn applies<E: DualElements<T>>(&self, e: &E, i: usize) -> bool {
        let (lo, hi) = e.breakpoints_at(i);
        match self.side {
            Side::Lower => self.lambda <= lo,
            Side::Upper => self.lambda >= hi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    Left,
    Right,
}

/// Result of one chunk sweep.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepResult<T> {
    pub sums: PhiSums<T>,
    /// `Σ bᵢ·boundᵢ` over variables fixed during this sweep.
    pub fixed_value: T,
    pub fixed_abs: T,
    pub newly_fixed: usize,
}

impl<T: Real> SweepResult<T> {
    pub fn merge(self, o: Self) -> Self {
        SweepResult {
            sums: self.sums.merge(o.sums),
            fixed_value: self.fixed_value + o.fixed_value,
            fixed_abs: self.fixed_abs + o.fixed_abs,
            newly_fixed: self.newly_fixed + o.newly_fixed,
        }
    }
}

/// Reduces partial results pairwise in a fixed tree order, so the outcome
/// depends only on the chunk layout.
pub fn tree_reduce<T: Real>(mut parts: Vec<SweepResult<T>>) -> SweepResult<T> {
    if parts.is_empty() {
        return SweepResult::default();
    }
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|p| if p.len() == 2 { p[0].merge(p[1]) } else { p[0] })
            .collect();
    }
    parts[0]
}

/// Variables owned by one worker.
#[derive(Debug, Clone, Default)]
pub struct ChunkState<T> {
    pub(crate) active: Vec<usize>,
    pub(crate) fixed: Vec<(usize, T)>,
}

impl<T: Real> ChunkState<T> {
    pub fn new(active: Vec<usize>) -> Self {
        ChunkState {
            active,
            fixed: Vec::new(),
        }
    }

    pub fn from_range(range: Range<usize>) -> Self {
        Self::new(range.collect())
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn fixed(&self) -> &[(usize, T)] {
        &self.fixed
    }

    /// Applies `pending` and accumulates the remaining active elements at `lambda`.
    /// Fixed elements are swap-removed from the active list.
    pub fn sweep<E: DualElements<T>>(
        &mut self,
        e: &E,
        pending: Option<Fixing<T>>,
        lambda: T,
        record: bool,
    ) -> SweepResult<T> {
        let mut out = SweepResult::default();
        match pending {
            None => {
                for &i in &self.active {
                    e.accumulate(i, lambda, &mut out.sums);
                }
            }
            Some(f) => {
                // in-place compaction keeps the active list sorted, so later
                // sweeps read the data arrays in order
                let mut kept = 0;
                for k in 0..self.active.len() {
                    let i = self.active[k];
                    if f.applies(e, i) {
                        let (v, bv) = e.bound(i, f.side);
                        out.fixed_value = out.fixed_value + bv;
                        out.fixed_abs = out.fixed_abs + bv.abs();
                        out.newly_fixed += 1;
                        if record {
                            self.fixed.push((i, v));
                        }
                    } else {
                        e.accumulate(i, lambda, &mut out.sums);
                        self.active[kept] = i;
                        kept += 1;
                    }
                }
                self.active.truncate(kept);
            }
        }
        out
    }

    /// Fixing pass without evaluation.
    pub fn apply_fixing<E: DualElements<T>>(
        &mut self,
        e: &E,
        f: Fixing<T>,
        record: bool,
    ) -> SweepResult<T> {
        let mut out = SweepResult::default();
        let mut kept = 0;
        for k in 0..self.active.len() {
            let i = self.active[k];
            if f.applies(e, i) {
                let (v, bv) = e.bound(i, f.side);
                out.fixed_value = out.fixed_value + bv;
                out.fixed_abs = out.fixed_abs + bv.abs();
                out.newly_fixed += 1;
                if record {
                    self.fixed.push((i, v));
                }
            } else {
                self.active[kept] = i;
                kept += 1;
            }
        }
        self.active.truncate(kept);
        out
    }

    /// Closest active breakpoint strictly to the right (or left) of `from`.
    pub fn nearest_breakpoint<E: DualElements<T>>(
        &self,
        e: &E,
        from: T,
        dir: Direction,
    ) -> Option<T> {
        let mut best: Option<T> = None;
        for &i in &self.active {
            let (lo, hi) = e.breakpoints_at(i);
            for bp in [lo, hi] {
                if !bp.is_finite() {
                    continue;
                }
                best = match dir {
                    Direction::Right if bp > from => Some(best.map_or(bp, |b| b.min(bp))),
                    Direction::Left if bp < from => Some(best.map_or(bp, |b| b.max(bp))),
                    _ => best,
                };
            }
        }
        best
    }
}

fn combine<T: Real>(parts: Vec<Option<T>>, dir: Direction) -> Option<T> {
    parts.into_iter().flatten().reduce(|x, y| match dir {
        Direction::Right => x.min(y),
        Direction::Left => x.max(y),
    })
}

/// Engine interface the Newton drivers run against.
pub trait Sweeper<T: Real> {
    fn sweep(&mut self, pending: Option<Fixing<T>>, lambda: T) -> SweepResult<T>;

    /// Applies `pending`, then searches active breakpoints. Returns the fixing
    /// totals together with the breakpoint.
    fn nearest_breakpoint(
        &mut self,
        pending: Option<Fixing<T>>,
        from: T,
        dir: Direction,
    ) -> (SweepResult<T>, Option<T>);

    fn fixed_count(&self) -> usize;
}

/// Contiguous equal-size ranges covering `0..n`.
pub fn split_ranges(n: usize, parts: usize) -> Vec<Range<usize>> {
    let parts = parts.max(1).min(n.max(1));
    let base = n / parts;
    let extra = n % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for p in 0..parts {
        let len = base + usize::from(p < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Owns one [`ChunkState`] per worker; fixing is local to each chunk.
pub struct ChunkedSweeper<'e, T, E> {
    pub(crate) elems: &'e E,
    pub(crate) chunks: Vec<ChunkState<T>>,
    pool: Option<Arc<ThreadPool>>,
    record: bool,
    fixed_count: usize,
}

impl<'e, T: Real, E: DualElements<T>> ChunkedSweeper<'e, T, E> {
    pub fn new(
        elems: &'e E,
        chunks: Vec<ChunkState<T>>,
        pool: Option<Arc<ThreadPool>>,
        record: bool,
    ) -> Self {
        ChunkedSweeper {
            elems,
            chunks,
            pool,
            record,
            fixed_count: 0,
        }
    }

    pub fn chunks(&self) -> &[ChunkState<T>] {
        &self.chunks
    }

    fn map<R: Send>(&mut self, f: impl Fn(&mut ChunkState<T>) -> R + Sync + Send) -> Vec<R> {
        match &self.pool {
            Some(pool) if self.chunks.len() > 1 => {
                let chunks = &mut self.chunks;
                pool.install(|| chunks.par_iter_mut().map(&f).collect())
            }
            _ => self.chunks.iter_mut().map(f).collect(),
        }
    }

    /// Coalesces chunks that fell below [`MERGE_THRESHOLD`] active variables
    /// into one residual chunk.
    fn merge_small(&mut self) {
        if self.chunks.len() < 2 {
            return;
        }
        let small = self
            .chunks
            .iter()
            .filter(|c| c.active.len() < MERGE_THRESHOLD)
            .count();
        if small < 2 {
            return;
        }
        let mut kept = Vec::with_capacity(self.chunks.len() - small + 1);
        let mut residual: Option<ChunkState<T>> = None;
        for c in self.chunks.drain(..) {
            if c.active.len() < MERGE_THRESHOLD {
                match residual.as_mut() {
                    None => residual = Some(c),
                    Some(r) => {
                        r.active.extend_from_slice(&c.active);
                        r.fixed.extend_from_slice(&c.fixed);
                    }
                }
            } else {
                kept.push(c);
            }
        }
        kept.extend(residual);
        self.chunks = kept;
    }
}

impl<T: Real, E: DualElements<T>> Sweeper<T> for ChunkedSweeper<'_, T, E> {
    fn sweep(&mut self, pending: Option<Fixing<T>>, lambda: T) -> SweepResult<T> {
        let elems = self.elems;
        let record = self.record;
        let parts = self.map(|c| c.sweep(elems, pending, lambda, record));
        let res = tree_reduce(parts);
        self.fixed_count += res.newly_fixed;
        if res.newly_fixed > 0 {
            self.merge_small();
        }
        res
    }

    fn nearest_breakpoint(
        &mut self,
        pending: Option<Fixing<T>>,
        from: T,
        dir: Direction,
    ) -> (SweepResult<T>, Option<T>) {
        let elems = self.elems;
        let record = self.record;
        let parts = self.map(|c| {
            let fixed = match pending {
                Some(f) => c.apply_fixing(elems, f, record),
                None => SweepResult::default(),
            };
            (fixed, c.nearest_breakpoint(elems, from, dir))
        });
        let (fixed, bps): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
        let fixed = tree_reduce(fixed);
        self.fixed_count += fixed.newly_fixed;
        (fixed, combine(bps, dir))
    }

    fn fixed_count(&self) -> usize {
        self.fixed_count
    }
}

/// Stateless sweeps over fixed contiguous ranges: every element is visited at
/// every iteration and its work depends only on the multiplier and its own
/// data.
pub struct JacobiSweeper<'e, E> {
    pub(crate) elems: &'e E,
    pub(crate) ranges: Vec<Range<usize>>,
    pub(crate) pool: Option<Arc<ThreadPool>>,
}

impl<'e, E> JacobiSweeper<'e, E> {
    pub fn new(elems: &'e E, ranges: Vec<Range<usize>>, pool: Option<Arc<ThreadPool>>) -> Self {
        JacobiSweeper {
            elems,
            ranges,
            pool,
        }
    }

    pub(crate) fn map<R: Send>(&self, f: impl Fn(Range<usize>) -> R + Sync + Send) -> Vec<R> {
        match &self.pool {
            Some(pool) if self.ranges.len() > 1 => {
                let ranges = &self.ranges;
                pool.install(|| ranges.par_iter().cloned().map(&f).collect())
            }
            _ => self.ranges.iter().cloned().map(f).collect(),
        }
    }
}

impl<T: Real, E: DualElements<T>> Sweeper<T> for JacobiSweeper<'_, E> {
    fn sweep(&mut self, _pending: Option<Fixing<T>>, lambda: T) -> SweepResult<T> {
        let elems = self.elems;
        let parts = self.map(|r| {
            let mut s = SweepResult::default();
            for i in r {
                elems.accumulate(i, lambda, &mut s.sums);
            }
            s
        });
        tree_reduce(parts)
    }

    fn nearest_breakpoint(
        &mut self,
        _pending: Option<Fixing<T>>,
        from: T,
        dir: Direction,
    ) -> (SweepResult<T>, Option<T>) {
        let elems = self.elems;
        let parts = self.map(|r| {
            let mut best: Option<T> = None;
            for i in r {
                let (lo, hi) = elems.breakpoints_at(i);
                for bp in [lo, hi] {
                    if !bp.is_finite() {
                        continue;
                    }
                    best = match dir {
                        Direction::Right if bp > from => Some(best.map_or(bp, |b| b.min(bp))),
                        Direction::Left if bp < from => Some(best.map_or(bp, |b| b.max(bp))),
                        _ => best,
                    };
                }
            }
            best
        });
        (SweepResult::default(), combine(parts, dir))
    }

    fn fixed_count(&self) -> usize {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::CqkInstance;

    fn inst() -> CqkInstance<f64> {
        CqkInstance::new(
            vec![1.0; 3],
            vec![0.0, -1.0, -2.0],
            vec![1.0; 3],
            vec![0.0; 3],
            vec![f64::INFINITY; 3],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn nearest_breakpoint_is_strict() {
        // breakpoints {0, 1, 2}
        let e = inst();
        let c = ChunkState::<f64>::from_range(0..3);
        assert_eq!(c.nearest_breakpoint(&e, 0.5, Direction::Right), Some(1.0));
        assert_eq!(c.nearest_breakpoint(&e, 0.0, Direction::Left), None);
        assert_eq!(c.nearest_breakpoint(&e, 0.0, Direction::Right), Some(1.0));
        assert_eq!(c.nearest_breakpoint(&e, 2.0, Direction::Right), None);
    }

    #[test]
    fn split_ranges_cover_everything() {
        let r = split_ranges(10, 3);
        assert_eq!(r, vec![0..4, 4..7, 7..10]);
        assert_eq!(split_ranges(2, 8), vec![0..1, 1..2]);
        assert_eq!(split_ranges(0, 4), vec![0..0]);
    }

    #[test]
    fn tree_reduce_is_order_fixed() {
        let parts: Vec<SweepResult<f64>> = (0..5)
            .map(|k| SweepResult {
                sums: PhiSums {
                    value: k as f64,
                    abs: 1.0,
                    dplus: 0.0,
                    dminus: 0.0,
                },
                ..Default::default()
            })
            .collect();
        let r = tree_reduce(parts);
        assert_eq!(r.sums.value, 10.0);
        assert_eq!(r.sums.abs, 5.0);
    }

    #[test]
    fn sweep_fixes_and_keeps_order() {
        let e = inst();
        let mut c = ChunkState::from_range(0..3);
        // at λ = 1.5 with φ > r: indices with ℓ̲ ≥ 1.5 → index 2 (ℓ̲ = 2)
        let f = Fixing {
            lambda: 1.5,
            side: Side::Lower,
        };
        let res = c.sweep(&e, Some(f), 1.0, true);
        assert_eq!(res.newly_fixed, 1);
        assert_eq!(c.fixed(), &[(2, 0.0)]);
        assert_eq!(c.active(), &[0, 1]);
        // φ over {0,1} at λ=1: 1 + 0
        assert_eq!(res.sums.value, 1.0);
    }
}
