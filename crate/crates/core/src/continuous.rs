//! An infinite factor: `A_a = span{U^n a : n ∈ ℤ}` with `{U^n a}` a Riesz
//! sequence, sampled by `s` systems at period `r`.
//!
//! Every quantity is expressed through the cross-covariances
//! `R_j(k) = ⟨U^k a, h_j⟩`. The symbol `g_j(x) = Σ_k ⟨a, U^k h_j⟩ e^{2πikx}`
//! therefore has Fourier coefficient `R_j(-k)` at `k`. Symbols are trig
//! polynomials, evaluated on the uniform grid `x_t = t/L`.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_extremes, pseudo_inverse, ComplexMatrix, PINV_TOL};
use crate::scalar::{cabs, cis_turns, cone, cz, scaled_tol, Real};
use crate::sequence::{IndexRange, Sequence};

/// `α` at or below this value means the system is not a frame.
pub const ALPHA_TOL: f64 = 1e-10;
/// Tolerance of the grid identity `[h(x_t)] G(x_t) = e_1`.
pub const IDENTITY_TOL: f64 = 1e-9;
pub const DEFAULT_GRID: usize = 256;

/// Trig polynomial `x ↦ Σ_k coeff(k) e^{2πikx}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSymbol<T> {
    pub coeffs: Sequence<T>,
}

impl<T: Real> FourierSymbol<T> {
    pub fn new(coeffs: Sequence<T>) -> Self {
        Self { coeffs }
    }

    pub fn constant(value: Complex<T>) -> Self {
        Self { coeffs: Sequence::new(0, vec![value]) }
    }

    /// Symbol of the cross-covariance `k ↦ ⟨U^k a, h⟩`.
    pub fn from_crosscov(crosscov: &Sequence<T>) -> Self {
        Self { coeffs: crosscov.reversed() }
    }

    /// Back to `k ↦ ⟨U^k a, h⟩`.
    pub fn crosscov(&self) -> Sequence<T> {
        self.coeffs.reversed()
    }

    pub fn eval(&self, x: T) -> Complex<T> {
        self.coeffs.iter().fold(cz(), |acc, (k, c)| acc + c * cis_turns(x * T::lit(k as f64)))
    }

    /// Largest `|k|` with a stored coefficient.
    pub fn degree(&self) -> u64 {
        self.coeffs.bounds().map_or(0, |(lo, hi)| lo.unsigned_abs().max(hi.unsigned_abs()))
    }
}

/// Extremes of `λ(G*G)` over the grid of `(0, 1/r)`; the optimal frame
/// bounds of the sampling vectors are `alpha / r` and `beta / r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConstants<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> FrameConstants<T> {
    pub fn is_frame(&self) -> bool {
        self.alpha > T::lit(ALPHA_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousScheme<T> {
    r: usize,
    symbols: Vec<FourierSymbol<T>>,
    grid_size: usize,
}

impl<T: Real> ContinuousScheme<T> {
    pub fn new(r: usize, symbols: Vec<FourierSymbol<T>>, grid_size: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidScheme("sampling period r must be >= 1".into()));
        }
        if symbols.len() < r {
            return Err(Error::InvalidScheme(format!("need s >= r sampling systems (s = {}, r = {r})", symbols.len())));
        }
        if grid_size == 0 || !grid_size.is_multiple_of(r) {
            return Err(Error::InvalidScheme(format!(
                "grid size L = {grid_size} must be a positive multiple of r = {r}"
            )));
        }
        let degree = symbols.iter().map(FourierSymbol::degree).max().unwrap_or(0);
        if (grid_size as u64) < 2 * degree + 1 {
            return Err(Error::InvalidScheme(format!(
                "grid size L = {grid_size} does not resolve symbols of degree {degree} (need L >= {})",
                2 * degree + 1
            )));
        }
        Ok(Self { r, symbols, grid_size })
    }

    /// Scheme from the cross-covariances `⟨U^k a, h_j⟩`.
    pub fn from_crosscov(r: usize, crosscov: &[Sequence<T>], grid_size: usize) -> Result<Self> {
        Self::new(r, crosscov.iter().map(FourierSymbol::from_crosscov).collect(), grid_size)
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.r
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.symbols.len()
    }

    #[inline]
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn symbols(&self) -> &[FourierSymbol<T>] {
        &self.symbols
    }

    pub fn crosscovs(&self) -> Vec<Sequence<T>> {
        self.symbols.iter().map(FourierSymbol::crosscov).collect()
    }

    /// Same symbols on another grid.
    pub fn with_grid(&self, grid_size: usize) -> Result<Self> {
        Self::new(self.r, self.symbols.clone(), grid_size)
    }

    fn grid_point(&self, t: usize) -> T {
        T::count(t) / T::count(self.grid_size)
    }

    /// `s × r` matrix with entry `(j, k) = g_j(x + k/r)`.
    pub fn evaluate_g(&self, x: T) -> ComplexMatrix<T> {
        let r = T::count(self.r);
        ComplexMatrix::from_fn(self.channels(), self.r, |j, k| self.symbols[j].eval(x + T::count(k) / r))
    }

    /// `G(x_t)` from exact grid values: `g_j(x_t + k/r) = g_j(x_{t + kL/r})`.
    fn grid_matrices(&self) -> Vec<ComplexMatrix<T>> {
        let values: Vec<Vec<Complex<T>>> =
            self.symbols.iter().map(|g| (0..self.grid_size).map(|t| g.eval(self.grid_point(t))).collect()).collect();
        let step = self.grid_size / self.r;
        (0..self.grid_size)
            .map(|t| ComplexMatrix::from_fn(self.channels(), self.r, |j, k| values[j][(t + k * step) % self.grid_size]))
            .collect()
    }

    pub fn frame_constants(&self) -> FrameConstants<T> {
        let extremes: Vec<_> = (0..self.grid_size / self.r)
            .into_par_iter()
            .map(|t| gram_extremes(&self.evaluate_g(self.grid_point(t))))
            .collect();
        let alpha = extremes.iter().map(|e| e.lambda_min).fold(T::max_value().unwrap(), |a, b| a.min(b));
        let beta = extremes.iter().map(|e| e.lambda_max).fold(T::zero(), |a, b| a.max(b));
        FrameConstants { alpha, beta }
    }

    /// Dual symbols `h_j` satisfying `Σ_j h_j(x) g_j(x + k/r) = δ_{k,0}`.
    ///
    /// At every grid point the row `h(x_t)` is the first row of
    /// `G†(x_t) + U(x_t)[I - G(x_t)G†(x_t)]`; the coefficients are the DFT of
    /// these samples, truncated to the `K` largest in magnitude.
    pub fn dual_symbols(&self, options: &DualOptions<T>) -> Result<DualSymbols<T>> {
        let constants = self.frame_constants();
        if !constants.is_frame() && !options.force {
            return Err(Error::NotAFrame(format!("alpha_G = {:e} is not positive", constants.alpha.as_f64())));
        }
        if let FreeSymbol::Grid(per_point) = &options.free_u {
            if per_point.len() != self.grid_size {
                return Err(Error::ShapeMismatch(format!(
                    "free matrix needs one entry per grid point ({}), got {}",
                    self.grid_size,
                    per_point.len()
                )));
            }
        }
        let (s, r) = (self.channels(), self.r);
        let matrices = self.grid_matrices();
        let rows: Vec<Result<Vec<Complex<T>>>> = matrices
            .par_iter()
            .enumerate()
            .map(|(t, g)| {
                let pinv = pseudo_inverse(g, T::lit(PINV_TOL));
                let first = match options.free_u.at(t) {
                    None => pinv.row(0),
                    Some(u) => {
                        if (u.rows(), u.cols()) != (r, s) {
                            return Err(Error::ShapeMismatch(format!("free matrix must be {r} x {s}")));
                        }
                        let proj = ComplexMatrix::identity(s).sub(&g.matmul(&pinv)?)?;
                        pinv.add(&u.matmul(&proj)?)?.row(0)
                    }
                };
                Ok(first)
            })
            .collect();
        let grid = rows.into_iter().collect::<Result<Vec<_>>>()?;

        let mut max_error = T::zero();
        for (row, g) in grid.iter().zip(&matrices) {
            for k in 0..r {
                let dot = (0..s).fold(cz::<T>(), |acc, j| acc + row[j] * g.get(j, k));
                let target = if k == 0 { cone() } else { cz() };
                max_error = max_error.max(cabs(dot - target));
            }
        }
        if max_error > scaled_tol(IDENTITY_TOL) && !options.force {
            return Err(Error::IdentityViolated { max_error: max_error.as_f64() });
        }

        let keep = options.keep.unwrap_or(self.grid_size).min(self.grid_size);
        let coefficients = (0..s)
            .map(|j| {
                let samples: Vec<Complex<T>> = grid.iter().map(|row| row[j]).collect();
                truncate(&dft_coefficients(&samples), keep)
            })
            .collect();
        Ok(DualSymbols { grid, coefficients, grid_size: self.grid_size, max_identity_error: max_error })
    }

    /// `c_j = r · ĥ_j`, the coordinates of the reconstruction vectors in `{U^n a}`.
    pub fn reconstruction_coeffs(&self, duals: &DualSymbols<T>) -> Vec<Sequence<T>> {
        let r = Complex::new(T::count(self.r), T::zero());
        duals.coefficients.iter().map(|h| h.scale(r)).collect()
    }

    /// Lattice indices `n` where some channel can produce a nonzero sample of `coeffs`.
    pub fn sample_window(&self, coeffs: &Sequence<T>) -> IndexRange {
        self.crosscovs()
            .iter()
            .map(|r| coeffs.correlation_window(r, self.r))
            .fold(IndexRange::new(0, 0), |acc, w| acc.union(&w))
    }

    /// `samples[j][n - window.start] = Σ_k coeffs(k) R_j(k - rn)`.
    pub fn sample(&self, coeffs: &Sequence<T>, window: IndexRange) -> Result<Vec<Vec<Complex<T>>>> {
        sample_continuous(&self.crosscovs(), self.r, coeffs, window)
    }
}

/// `samples[j][n - window.start] = Σ_k coeffs(k) crosscov_j(k - rn)`.
pub fn sample_continuous<T: Real>(
    crosscov: &[Sequence<T>],
    r: usize,
    coeffs: &Sequence<T>,
    window: IndexRange,
) -> Result<Vec<Vec<Complex<T>>>> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    Ok(crosscov.iter().map(|kernel| coeffs.correlate(kernel, r, window)).collect())
}

/// `out(k) = Σ_j Σ_n samples[j][n] c_j(k - rn)` over the sample window.
pub fn reconstruct_continuous<T: Real>(
    samples: &[Vec<Complex<T>>],
    window: IndexRange,
    c: &[Sequence<T>],
    r: usize,
) -> Result<Sequence<T>> {
    if samples.len() != c.len() || samples.iter().any(|row| row.len() != window.len) {
        return Err(Error::ShapeMismatch(format!("samples must be {} x {}", c.len(), window.len)));
    }
    let r = r as i64;
    let mut pairs = Vec::new();
    for (row, cj) in samples.iter().zip(c) {
        for (n, s) in window.iter().zip(row) {
            if *s == cz() {
                continue;
            }
            pairs.extend(cj.iter().map(|(k, v)| (k + r * n, *s * v)));
        }
    }
    Ok(Sequence::from_pairs(pairs))
}

/// Free term `U(x)` of the left-inverse family.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FreeSymbol<T: Real> {
    #[default]
    Zero,
    /// The same `r × s` matrix at every grid point.
    Constant(ComplexMatrix<T>),
    /// One `r × s` matrix per grid point `x_t`, `t = 0..L`.
    Grid(Vec<ComplexMatrix<T>>),
}

impl<T: Real> FreeSymbol<T> {
    fn at(&self, t: usize) -> Option<&ComplexMatrix<T>> {
        match self {
            Self::Zero => None,
            Self::Constant(u) => Some(u),
            Self::Grid(v) => Some(&v[t]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DualOptions<T: Real> {
    pub free_u: FreeSymbol<T>,
    /// Number of Fourier coefficients kept (`K`); `None` keeps all `L`.
    pub keep: Option<usize>,
    /// Build duals even when the frame test or the grid identity fails.
    pub force: bool,
}

/// Dual symbols as grid samples and truncated Fourier coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSymbols<T> {
    /// `grid[t][j] = h_j(t / L)`.
    pub grid: Vec<Vec<Complex<T>>>,
    /// `ĥ_j` after truncation.
    pub coefficients: Vec<Sequence<T>>,
    pub grid_size: usize,
    pub max_identity_error: T,
}

/// Fourier coefficients of the trig polynomial interpolating `samples` at
/// `t / L`; bin `t` maps to frequency `t` for `t <= (L-1)/2`, else `t - L`.
pub fn dft_coefficients<T: Real>(samples: &[Complex<T>]) -> Sequence<T> {
    let l = samples.len();
    if l == 0 {
        return Sequence::zero();
    }
    let mut buffer = samples.to_vec();
    FftPlanner::new().plan_fft_forward(l).process(&mut buffer);
    let inv = T::one() / T::count(l);
    let half = (l - 1) / 2;
    let pairs =
        buffer.into_iter().enumerate().map(|(t, v)| (if t <= half { t as i64 } else { t as i64 - l as i64 }, v * inv));
    Sequence::from_pairs(pairs)
}

/// Keeps the `keep` largest-magnitude entries; ties go to the smaller `|k|`.
fn truncate<T: Real>(coeffs: &Sequence<T>, keep: usize) -> Sequence<T> {
    let mut entries: Vec<(i64, Complex<T>)> = coeffs.iter().collect();
    if keep < entries.len() {
        entries.sort_by(|a, b| {
            cabs(b.1)
                .partial_cmp(&cabs(a.1))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.abs().cmp(&b.0.abs()))
                .then(a.0.cmp(&b.0))
        });
        entries.truncate(keep);
    }
    Sequence::from_pairs(entries).trimmed()
}
