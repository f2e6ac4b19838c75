//! Finitely supported complex sequences on ℤ.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::{cabs, cz, Real};

/// Contiguous integer range `start .. start + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRange {
    pub start: i64,
    pub len: usize,
}

impl IndexRange {
    pub fn new(start: i64, len: usize) -> Self {
        Self { start, len }
    }

    /// Inclusive bounds; an empty range is returned when `last < first`.
    pub fn inclusive(first: i64, last: i64) -> Self {
        if last < first {
            Self { start: first, len: 0 }
        } else {
            Self { start: first, len: (last - first + 1) as usize }
        }
    }

    #[inline]
    pub fn end(&self) -> i64 {
        self.start + self.len as i64
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, k: i64) -> bool {
        k >= self.start && k < self.end()
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.start..self.end()
    }

    /// Smallest range covering both (empty ranges are ignored).
    pub fn union(&self, other: &Self) -> Self {
        match (self.is_empty(), other.is_empty()) {
            (true, _) => *other,
            (_, true) => *self,
            _ => Self::inclusive(self.start.min(other.start), (self.end() - 1).max(other.end() - 1)),
        }
    }
}

/// Complex sequence `k ↦ value(k)` that vanishes outside a finite window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence<T> {
    pub start: i64,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> Sequence<T> {
    pub fn new(start: i64, values: Vec<Complex<T>>) -> Self {
        Self { start, values }
    }

    pub fn zero() -> Self {
        Self { start: 0, values: Vec::new() }
    }

    /// Kronecker delta at `k`.
    pub fn delta(k: i64) -> Self {
        Self { start: k, values: vec![Complex::new(T::one(), T::zero())] }
    }

    /// Collects `(index, value)` pairs; repeated indices accumulate.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, Complex<T>)>) -> Self {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let Some(lo) = pairs.iter().map(|p| p.0).min() else {
            return Self::zero();
        };
        let hi = pairs.iter().map(|p| p.0).max().unwrap_or(lo);
        let mut values = vec![cz(); (hi - lo + 1) as usize];
        for (k, v) in pairs {
            values[(k - lo) as usize] += v;
        }
        Self { start: lo, values }
    }

    pub fn range(&self) -> IndexRange {
        IndexRange::new(self.start, self.values.len())
    }

    #[inline]
    pub fn get(&self, k: i64) -> Complex<T> {
        let offset = k - self.start;
        if offset >= 0 && (offset as usize) < self.values.len() {
            self.values[offset as usize]
        } else {
            cz()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| (self.start + i as i64, *v))
    }

    /// `k ↦ value(k - by)`.
    pub fn shifted(&self, by: i64) -> Self {
        Self { start: self.start + by, values: self.values.clone() }
    }

    /// `k ↦ value(-k)`.
    pub fn reversed(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        let start = if values.is_empty() { 0 } else { -(self.start + values.len() as i64 - 1) };
        Self { start, values }
    }

    pub fn conj(&self) -> Self {
        Self { start: self.start, values: self.values.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self { start: self.start, values: self.values.iter().map(|z| *z * factor).collect() }
    }

    /// Drops exactly-zero entries at both ends.
    pub fn trimmed(&self) -> Self {
        let zero = cz::<T>();
        let Some(first) = self.values.iter().position(|z| *z != zero) else {
            return Self::zero();
        };
        let last = self.values.iter().rposition(|z| *z != zero).unwrap_or(first);
        Self { start: self.start + first as i64, values: self.values[first..=last].to_vec() }
    }

    /// Inclusive `(min, max)` of the stored window, `None` when empty.
    pub fn bounds(&self) -> Option<(i64, i64)> {
        (!self.values.is_empty()).then(|| (self.start, self.start + self.values.len() as i64 - 1))
    }

    pub fn norm_sqr(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
    }

    /// Largest `|self(k) - other(k)|` over the union of both windows.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.range().union(&other.range()).iter().fold(T::zero(), |acc, k| acc.max(cabs(self.get(k) - other.get(k))))
    }

    /// Discrete correlation sampled on a lattice:
    /// `out(n) = Σ_k self(k) · kernel(k - stride·n)`.
    pub fn correlate(&self, kernel: &Self, stride: usize, window: IndexRange) -> Vec<Complex<T>> {
        let stride = stride as i64;
        window.iter().map(|n| self.iter().fold(cz(), |acc, (k, v)| acc + v * kernel.get(k - stride * n))).collect()
    }

    /// Lattice indices `n` where `correlate(kernel, stride, ·)` can be
    /// nonzero: `stride·n ∈ [min(self) - max(kernel), max(self) - min(kernel)]`.
    pub fn correlation_window(&self, kernel: &Self, stride: usize) -> IndexRange {
        match (self.bounds(), kernel.bounds()) {
            (Some((a0, a1)), Some((k0, k1))) => {
                let s = stride as i64;
                IndexRange::inclusive(div_ceil(a0 - k1, s), (a1 - k0).div_euclid(s))
            }
            _ => IndexRange::new(0, 0),
        }
    }
}

#[inline]
pub(crate) fn div_ceil(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(start: i64, re: &[f64]) -> Sequence<f64> {
        Sequence::new(start, re.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    #[test]
    fn get_outside_window_is_zero() {
        let s = seq(-1, &[1.0, 2.0, 3.0]);
        assert_eq!(s.get(-2), Complex::new(0.0, 0.0));
        assert_eq!(s.get(0), Complex::new(2.0, 0.0));
        assert_eq!(s.get(2), Complex::new(0.0, 0.0));
    }

    #[test]
    fn reverse_and_shift() {
        let s = seq(-1, &[1.0, 2.0, 3.0]);
        let r = s.reversed();
        for k in -3..=3 {
            assert_eq!(r.get(k), s.get(-k));
            assert_eq!(s.shifted(2).get(k), s.get(k - 2));
        }
    }

    #[test]
    fn trimmed_drops_zero_ends() {
        let s = seq(-2, &[0.0, 1.0, 0.0, 2.0, 0.0]);
        let t = s.trimmed();
        assert_eq!(t.start, -1);
        assert_eq!(t.values.len(), 3);
        assert_eq!(seq(0, &[0.0, 0.0]).trimmed().values.len(), 0);
    }

    #[test]
    fn correlation_window_covers_support() {
        let x = seq(-3, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let kern = seq(-1, &[1.0, 1.0, 1.0]);
        for stride in 1..4 {
            let w = x.correlation_window(&kern, stride);
            let wide = IndexRange::inclusive(-20, 20);
            let all = x.correlate(&kern, stride, wide);
            for (n, v) in wide.iter().zip(all) {
                if v.norm() > 0.0 {
                    assert!(w.contains(n), "stride {stride} n {n}");
                }
            }
        }
    }

    #[test]
    fn div_ceil_rounds_up() {
        assert_eq!(div_ceil(5, 2), 3);
        assert_eq!(div_ceil(-5, 2), -2);
        assert_eq!(div_ceil(4, 2), 2);
    }
}
