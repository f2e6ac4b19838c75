//! Tensor products of two factors and separable sampling.
//!
//! A signal `x = Σ X(k, p) U^k a ⊗ V^p b` is stored as its coefficient
//! array `X`. Channel `(j, j')` produces
//! `L_{jj'}x(n, m) = Σ_{k,p} X(k, p) R1_j(k - rn) R2_{j'}(p - r̄m)`,
//! i.e. `A1_j X A2_{j'}^T` with one analysis matrix per factor channel.
//! Reconstruction is the separable synthesis
//! `Σ_{j,j'} B1_j S_{jj'} B2_{j'}^T` with `B(k, n) = c(k - rn)`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuous::{ContinuousScheme, DualOptions, FrameConstants, FreeSymbol};
use crate::error::{Error, Result};
use crate::linalg::{gram_extremes, ComplexMatrix, SpectralExtremes};
use crate::periodic::{FrameTest, PeriodicScheme, PeriodicSequence};
use crate::scalar::{cabs, cz, wrap, Real};
use crate::sequence::{IndexRange, Sequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    InfiniteFinite,
    InfiniteInfinite,
    FiniteFinite,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Self::InfiniteFinite => "infinite-finite",
            Self::InfiniteInfinite => "infinite-infinite",
            Self::FiniteFinite => "finite-finite",
        }
    }

    /// Whether factor 1 and factor 2 are periodic.
    fn periodic(self) -> [bool; 2] {
        match self {
            Self::InfiniteFinite => [false, true],
            Self::InfiniteInfinite => [false, false],
            Self::FiniteFinite => [true, true],
        }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Factor<T: Real> {
    Continuous(ContinuousScheme<T>),
    Periodic(PeriodicScheme<T>),
}

/// One index axis of a coefficient array or sample grid. Periodic axes
/// start at 0, have length `period` and wrap on access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub range: IndexRange,
    pub period: Option<usize>,
}

impl Axis {
    pub fn infinite(range: IndexRange) -> Self {
        Self { range, period: None }
    }

    pub fn periodic(period: usize) -> Self {
        Self { range: IndexRange::new(0, period), period: Some(period) }
    }

    /// Storage offset of index `i`, `None` when outside a non-periodic range.
    #[inline]
    fn offset(&self, i: i64) -> Option<usize> {
        match self.period {
            Some(p) => Some(wrap(i, p)),
            None => self.range.contains(i).then(|| (i - self.range.start) as usize),
        }
    }

    fn shifted(&self, by: i64) -> Self {
        match self.period {
            Some(_) => *self,
            None => Self { range: IndexRange::new(self.range.start + by, self.range.len), period: None },
        }
    }
}

/// Coordinates of one factor vector: finitely supported or periodic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisVector<T> {
    Infinite { coeffs: Sequence<T> },
    Periodic { coeffs: PeriodicSequence<T> },
}

impl<T: Real> AxisVector<T> {
    pub fn axis(&self) -> Axis {
        match self {
            Self::Infinite { coeffs } => Axis::infinite(coeffs.range()),
            Self::Periodic { coeffs } => Axis::periodic(coeffs.period()),
        }
    }

    #[inline]
    pub fn get(&self, i: i64) -> Complex<T> {
        match self {
            Self::Infinite { coeffs } => coeffs.get(i),
            Self::Periodic { coeffs } => coeffs.at(i),
        }
    }
}

/// Coefficient array `X(k, p)` of a signal in the tensor space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorCoefficients<T> {
    pub axes: [Axis; 2],
    /// Row-major over `(axes[0], axes[1])`.
    pub values: Vec<Complex<T>>,
}

impl<T: Real> TensorCoefficients<T> {
    pub fn zeros(axes: [Axis; 2]) -> Self {
        Self { axes, values: vec![cz(); axes[0].range.len * axes[1].range.len] }
    }

    pub fn from_fn(axes: [Axis; 2], mut f: impl FnMut(i64, i64) -> Complex<T>) -> Self {
        let values = axes[0]
            .range
            .iter()
            .flat_map(|k| axes[1].range.iter().map(move |p| (k, p)))
            .map(|(k, p)| f(k, p))
            .collect();
        Self { axes, values }
    }

    /// `u ⊗ v`.
    pub fn outer(u: &AxisVector<T>, v: &AxisVector<T>) -> Self {
        Self::from_fn([u.axis(), v.axis()], |k, p| u.get(k) * v.get(p))
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.axes[0].range.len, self.axes[1].range.len)
    }

    #[inline]
    pub fn get(&self, k: i64, p: i64) -> Complex<T> {
        match (self.axes[0].offset(k), self.axes[1].offset(p)) {
            (Some(a), Some(b)) => self.values[a * self.axes[1].range.len + b],
            _ => cz(),
        }
    }

    pub fn set(&mut self, k: i64, p: i64, value: Complex<T>) {
        let (a, b) =
            (self.axes[0].offset(k).expect("index inside axis"), self.axes[1].offset(p).expect("index inside axis"));
        let cols = self.axes[1].range.len;
        self.values[a * cols + b] = value;
    }

    /// `(k, p) ↦ X(k - d0, p - d1)`; periodic axes rotate.
    pub fn shifted(&self, d0: i64, d1: i64) -> Self {
        let axes = [self.axes[0].shifted(d0), self.axes[1].shifted(d1)];
        Self::from_fn(axes, |k, p| self.get(k - d0, p - d1))
    }

    fn as_matrix(&self) -> ComplexMatrix<T> {
        let (rows, cols) = self.shape();
        ComplexMatrix::from_fn(rows, cols, |i, j| self.values[i * cols + j])
    }

    fn from_matrix(axes: [Axis; 2], m: &ComplexMatrix<T>) -> Self {
        let values = (0..m.rows()).flat_map(|i| (0..m.cols()).map(move |j| (i, j))).map(|(i, j)| m.get(i, j)).collect();
        Self { axes, values }
    }

    fn union_axis(a: &Axis, b: &Axis) -> Axis {
        match a.period {
            Some(_) => *a,
            None => Axis::infinite(a.range.union(&b.range)),
        }
    }

    /// Largest entrywise difference over the union of both supports.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let axes = [Self::union_axis(&self.axes[0], &other.axes[0]), Self::union_axis(&self.axes[1], &other.axes[1])];
        let mut worst = T::zero();
        for k in axes[0].range.iter() {
            for p in axes[1].range.iter() {
                worst = worst.max(cabs(self.get(k, p) - other.get(k, p)));
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
    }
}

/// Samples `L_{jj'}x(rn, r̄m)` for `j < s`, `j' < s'`, `(n, m)` over the axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid<T> {
    pub channels: [usize; 2],
    pub axes: [Axis; 2],
    /// Index `((j s' + j') |n| + n) |m| + m`, offsets taken within each axis.
    pub values: Vec<Complex<T>>,
}

impl<T: Real> SampleGrid<T> {
    fn plane_len(&self) -> usize {
        self.axes[0].range.len * self.axes[1].range.len
    }

    pub fn get(&self, j: usize, jp: usize, n: i64, m: i64) -> Complex<T> {
        match (self.axes[0].offset(n), self.axes[1].offset(m)) {
            (Some(a), Some(b)) => {
                self.values[(j * self.channels[1] + jp) * self.plane_len() + a * self.axes[1].range.len + b]
            }
            _ => cz(),
        }
    }

    /// Every cell as `(j, j', n, m, value)` in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, i64, i64, Complex<T>)> + '_ {
        self.indices().zip(&self.values).map(|((j, jp, n, m), v)| (j, jp, n, m, *v))
    }

    /// `(n, m) ↦ grid(n - dn, m - dm)`.
    pub fn shifted(&self, dn: i64, dm: i64) -> Self {
        let axes = [self.axes[0].shifted(dn), self.axes[1].shifted(dm)];
        let probe = Self { channels: self.channels, axes, values: Vec::new() };
        let values = probe.indices().map(|(j, jp, n, m)| self.get(j, jp, n - dn, m - dm)).collect();
        Self { channels: self.channels, axes, values }
    }

    fn indices(&self) -> impl Iterator<Item = (usize, usize, i64, i64)> + '_ {
        let [s, sp] = self.channels;
        let [a0, a1] = self.axes;
        (0..s).flat_map(move |j| {
            (0..sp).flat_map(move |jp| a0.range.iter().flat_map(move |n| a1.range.iter().map(move |m| (j, jp, n, m))))
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.channels != other.channels {
            return Err(Error::ShapeMismatch("sample grids have different channel counts".into()));
        }
        let axes = [
            TensorCoefficients::<T>::union_axis(&self.axes[0], &other.axes[0]),
            TensorCoefficients::<T>::union_axis(&self.axes[1], &other.axes[1]),
        ];
        let probe = Self { channels: self.channels, axes, values: Vec::new() };
        Ok(probe
            .indices()
            .fold(T::zero(), |acc, (j, jp, n, m)| acc.max(cabs(self.get(j, jp, n, m) - other.get(j, jp, n, m)))))
    }
}

/// Reconstruction vectors `c_j` (factor 1) and `d_{j'}` (factor 2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionKit<T> {
    pub case: Case,
    pub strides: [usize; 2],
    pub c: Vec<AxisVector<T>>,
    pub d: Vec<AxisVector<T>>,
    /// How the free term was chosen for each factor.
    pub provenance: [String; 2],
}

impl<T: Real> ReconstructionKit<T> {
    fn factor(&self, i: usize) -> &[AxisVector<T>] {
        if i == 0 {
            &self.c
        } else {
            &self.d
        }
    }
}

/// Per-factor choices for [`TensorScheme::design_kit`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FactorOptions<T: Real> {
    /// Periodic factors accept `Zero` or `Constant`.
    pub free_u: FreeSymbol<T>,
    /// Kept Fourier coefficients for a continuous factor (default `L`).
    pub keep: Option<usize>,
    /// Design even when the factor fails its frame test.
    pub force: bool,
}

impl<T: Real> FactorOptions<T> {
    fn describe(&self) -> String {
        let mut text = match &self.free_u {
            FreeSymbol::Zero => "free term zero (pseudo-inverse)".to_string(),
            FreeSymbol::Constant(_) => "constant free term".to_string(),
            FreeSymbol::Grid(_) => "free term per grid point".to_string(),
        };
        if let Some(k) = self.keep {
            text.push_str(&format!(", K = {k}"));
        }
        if self.force {
            text.push_str(", forced");
        }
        text
    }
}

/// Frame test result for one factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorVerdict<T> {
    Continuous { r: usize, constants: FrameConstants<T> },
    Periodic { n: usize, test: FrameTest<T> },
}

impl<T: Real> FactorVerdict<T> {
    pub fn is_frame(&self) -> bool {
        match self {
            Self::Continuous { constants, .. } => constants.is_frame(),
            Self::Periodic { test, .. } => test.is_frame,
        }
    }

    /// Optimal frame bounds of the factor's sampling vectors.
    pub fn bounds(&self) -> SpectralExtremes<T> {
        match self {
            Self::Continuous { r, constants } => {
                let r = T::count(*r);
                SpectralExtremes { lambda_min: constants.alpha / r, lambda_max: constants.beta / r }
            }
            Self::Periodic { test, .. } => test.bounds,
        }
    }

    /// The frame condition and its measured value.
    pub fn condition(&self) -> String {
        match self {
            Self::Continuous { constants, .. } => {
                format!("alpha_G > 0 (alpha_G = {:e})", constants.alpha.as_f64())
            }
            Self::Periodic { n, test } => format!("rank R = N (rank = {}, N = {n})", test.rank),
        }
    }
}

/// Frame verdicts for both factors and the tensor bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis<T> {
    pub verdicts: [FactorVerdict<T>; 2],
    /// Products of the factor bounds.
    pub tensor_bounds: SpectralExtremes<T>,
}

impl<T: Real> Analysis<T> {
    pub fn is_frame(&self) -> bool {
        self.verdicts.iter().all(FactorVerdict::is_frame)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationReport<T> {
    pub max_deviation: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceReport<T> {
    pub max_error: T,
    pub frame_bounds: SpectralExtremes<T>,
    pub factor_bounds: [SpectralExtremes<T>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorScheme<T: Real> {
    case: Case,
    factors: [Factor<T>; 2],
}

impl<T: Real> TensorScheme<T> {
    pub fn new(case: Case, factor1: Factor<T>, factor2: Factor<T>) -> Result<Self> {
        let kinds = [matches!(factor1, Factor::Periodic(_)), matches!(factor2, Factor::Periodic(_))];
        if kinds != case.periodic() {
            let name = |p: bool| if p { "periodic" } else { "continuous" };
            return Err(Error::CaseMismatch(format!(
                "case {case} needs factors ({}, {}), got ({}, {})",
                name(case.periodic()[0]),
                name(case.periodic()[1]),
                name(kinds[0]),
                name(kinds[1])
            )));
        }
        if let (Factor::Periodic(a), Factor::Periodic(b)) = (&factor1, &factor2) {
            let rows = a.channels() * a.ell() * b.channels() * b.ell();
            if rows < a.n() * b.n() {
                return Err(Error::InvalidScheme(format!(
                    "s s' l l' = {rows} samples cannot determine N M = {} coefficients",
                    a.n() * b.n()
                )));
            }
        }
        Ok(Self { case, factors: [factor1, factor2] })
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn factor(&self, i: usize) -> &Factor<T> {
        &self.factors[i]
    }

    pub fn channels(&self) -> [usize; 2] {
        [self.factors[0].channels(), self.factors[1].channels()]
    }

    pub fn strides(&self) -> [usize; 2] {
        [self.factors[0].stride(), self.factors[1].stride()]
    }

    /// Square (Riesz) case: `s = r` and `s' = r̄`.
    pub fn is_square(&self) -> bool {
        self.channels() == self.strides()
    }

    pub fn analyze(&self) -> Analysis<T> {
        let verdicts = [self.factors[0].verdict(), self.factors[1].verdict()];
        let (b1, b2) = (verdicts[0].bounds(), verdicts[1].bounds());
        Analysis { verdicts, tensor_bounds: b1.product(&b2) }
    }

    /// Axes a coefficient array must use: periodic factors fix theirs.
    pub fn coefficient_axes(&self, infinite: [IndexRange; 2]) -> [Axis; 2] {
        [self.factors[0].coefficient_axis(infinite[0]), self.factors[1].coefficient_axis(infinite[1])]
    }

    fn check_coefficients(&self, x: &TensorCoefficients<T>) -> Result<()> {
        for (i, (axis, factor)) in x.axes.iter().zip(&self.factors).enumerate() {
            let expected = factor.coefficient_axis(axis.range);
            if *axis != expected {
                return Err(Error::CaseMismatch(format!(
                    "axis {} of the coefficients does not match the {} factor",
                    i + 1,
                    factor.kind()
                )));
            }
        }
        Ok(())
    }

    pub fn sample(&self, x: &TensorCoefficients<T>) -> Result<SampleGrid<T>> {
        self.check_coefficients(x)?;
        let windows = [self.factors[0].sample_axis(&x.axes[0]), self.factors[1].sample_axis(&x.axes[1])];
        let a1: Vec<_> =
            (0..self.factors[0].channels()).map(|j| self.factors[0].analysis(j, &x.axes[0], &windows[0])).collect();
        let a2t: Vec<_> = (0..self.factors[1].channels())
            .map(|j| transpose(&self.factors[1].analysis(j, &x.axes[1], &windows[1])))
            .collect();
        let xm = x.as_matrix();
        let [s, sp] = self.channels();
        let planes: Vec<Result<ComplexMatrix<T>>> =
            (0..s * sp).into_par_iter().map(|idx| a1[idx / sp].matmul(&xm)?.matmul(&a2t[idx % sp])).collect();
        let mut values = Vec::with_capacity(s * sp * windows[0].range.len * windows[1].range.len);
        for plane in planes {
            let plane = plane?;
            for i in 0..plane.rows() {
                for k in 0..plane.cols() {
                    values.push(plane.get(i, k));
                }
            }
        }
        Ok(SampleGrid { channels: [s, sp], axes: windows, values })
    }

    pub fn design_kit(&self, options1: &FactorOptions<T>, options2: &FactorOptions<T>) -> Result<ReconstructionKit<T>> {
        let c = self.factors[0].design(0, options1)?;
        let d = self.factors[1].design(1, options2)?;
        Ok(ReconstructionKit {
            case: self.case,
            strides: self.strides(),
            c,
            d,
            provenance: [options1.describe(), options2.describe()],
        })
    }

    fn check_kit(&self, kit: &ReconstructionKit<T>) -> Result<()> {
        if kit.case != self.case || kit.strides != self.strides() {
            return Err(Error::CaseMismatch("reconstruction kit was designed for another scheme".into()));
        }
        if [kit.c.len(), kit.d.len()] != self.channels() {
            return Err(Error::ShapeMismatch("kit vector counts do not match the channel counts".into()));
        }
        for (i, factor) in self.factors.iter().enumerate() {
            for v in kit.factor(i) {
                let ok = match (factor, v) {
                    (Factor::Continuous(_), AxisVector::Infinite { .. }) => true,
                    (Factor::Periodic(p), AxisVector::Periodic { coeffs }) => coeffs.period() == p.n(),
                    _ => false,
                };
                if !ok {
                    return Err(Error::ShapeMismatch(format!("kit vectors of factor {} have the wrong shape", i + 1)));
                }
            }
        }
        Ok(())
    }

    /// `Σ samples(j, j', n, m) c_j(k - rn) d_{j'}(p - r̄m)`.
    pub fn reconstruct(&self, samples: &SampleGrid<T>, kit: &ReconstructionKit<T>) -> Result<TensorCoefficients<T>> {
        self.check_kit(kit)?;
        if samples.channels != self.channels()
            || samples.values.len() != samples.channels[0] * samples.channels[1] * samples.plane_len()
        {
            return Err(Error::ShapeMismatch("sample grid does not match the channel counts".into()));
        }
        for (i, factor) in self.factors.iter().enumerate() {
            if let Factor::Periodic(p) = factor {
                if samples.axes[i] != Axis::periodic(p.ell()) {
                    return Err(Error::ShapeMismatch(format!("sample axis {} must cover 0..{}", i + 1, p.ell())));
                }
            } else if samples.axes[i].period.is_some() {
                return Err(Error::ShapeMismatch(format!("sample axis {} must be non-periodic", i + 1)));
            }
        }
        let out_axes = [
            self.factors[0].synthesis_axis(&kit.c, &samples.axes[0]),
            self.factors[1].synthesis_axis(&kit.d, &samples.axes[1]),
        ];
        let b1: Vec<_> = kit.c.iter().map(|v| self.factors[0].synthesis(v, &samples.axes[0], &out_axes[0])).collect();
        let b2t: Vec<_> =
            kit.d.iter().map(|v| transpose(&self.factors[1].synthesis(v, &samples.axes[1], &out_axes[1]))).collect();
        let [s, sp] = self.channels();
        let (rows, cols) = (samples.axes[0].range.len, samples.axes[1].range.len);
        let partial: Vec<Result<ComplexMatrix<T>>> = (0..s)
            .into_par_iter()
            .map(|j| {
                let mut acc = ComplexMatrix::zeros(rows, out_axes[1].range.len);
                for (jp, b) in b2t.iter().enumerate() {
                    let offset = (j * sp + jp) * rows * cols;
                    let plane =
                        ComplexMatrix::from_row_slice(rows, cols, &samples.values[offset..offset + rows * cols])?;
                    acc = acc.add(&plane.matmul(b)?)?;
                }
                b1[j].matmul(&acc)
            })
            .collect();
        let mut total = ComplexMatrix::zeros(out_axes[0].range.len, out_axes[1].range.len);
        for p in partial {
            total = total.add(&p?)?;
        }
        Ok(TensorCoefficients::from_matrix(out_axes, &total))
    }

    /// Samples each `c_j ⊗ d_{j'}` and reports the largest deviation from
    /// `δ_{jk} δ_{j'k'} δ_{n0} δ_{m0}`.
    pub fn verify_interpolation(&self, kit: &ReconstructionKit<T>) -> Result<InterpolationReport<T>> {
        if !self.is_square() {
            return Err(Error::NotSquareCase(format!(
                "interpolation needs s = r and s' = r-bar, got channels {:?} and strides {:?}",
                self.channels(),
                self.strides()
            )));
        }
        self.check_kit(kit)?;
        let mut worst = T::zero();
        for (j, c) in kit.c.iter().enumerate() {
            for (jp, d) in kit.d.iter().enumerate() {
                let grid = self.sample(&TensorCoefficients::outer(c, d))?;
                if !grid.axes[0].range.contains(0) || !grid.axes[1].range.contains(0) {
                    worst = worst.max(T::one());
                }
                for (k, kp, n, m, v) in grid.cells() {
                    let target = if (k, kp, n, m) == (j, jp, 0, 0) { T::one() } else { T::zero() };
                    worst = worst.max(cabs(v - Complex::new(target, T::zero())));
                }
            }
        }
        Ok(InterpolationReport { max_deviation: worst })
    }

    /// Flattened `(s s' ℓ ℓ̄) × (N M)` sampling matrix; row
    /// `(j s' + j') ℓℓ̄ + n ℓ̄ + m`, column `p M + q`.
    pub fn sampling_matrix(&self) -> Result<ComplexMatrix<T>> {
        let (Factor::Periodic(f1), Factor::Periodic(f2)) = (&self.factors[0], &self.factors[1]) else {
            return Err(Error::CaseMismatch(format!(
                "flattened matrices need the finite-finite case, not {}",
                self.case
            )));
        };
        let (r1, r2) = (f1.covariance_matrix(), f2.covariance_matrix());
        let (l1, l2, sp, m) = (f1.ell(), f2.ell(), f2.channels(), f2.n());
        Ok(ComplexMatrix::from_fn(r1.rows() * r2.rows(), f1.n() * m, |row, col| {
            let (jj, rest) = (row / (l1 * l2), row % (l1 * l2));
            let (j, jp) = (jj / sp, jj % sp);
            let (n, mm) = (rest / l2, rest % l2);
            r1.get(j * l1 + n, col / m) * r2.get(jp * l2 + mm, col % m)
        }))
    }

    pub fn brute_force_check(&self, kit: &ReconstructionKit<T>) -> Result<BruteForceReport<T>> {
        let samp = self.sampling_matrix()?;
        self.check_kit(kit)?;
        let (Factor::Periodic(f1), Factor::Periodic(f2)) = (&self.factors[0], &self.factors[1]) else {
            unreachable!("sampling_matrix checked the case");
        };
        let h1 = periodic_synthesis_matrix(f1, &kit.c);
        let h2 = periodic_synthesis_matrix(f2, &kit.d);
        let (l1, l2, sp, m) = (f1.ell(), f2.ell(), f2.channels(), f2.n());
        let recon = ComplexMatrix::from_fn(f1.n() * m, samp.rows(), |row, col| {
            let (jj, rest) = (col / (l1 * l2), col % (l1 * l2));
            let (j, jp) = (jj / sp, jj % sp);
            let (n, mm) = (rest / l2, rest % l2);
            h1.get(row / m, j * l1 + n) * h2.get(row % m, jp * l2 + mm)
        });
        let max_error = recon.matmul(&samp)?.max_abs_diff(&ComplexMatrix::identity(f1.n() * m))?;
        Ok(BruteForceReport {
            max_error,
            frame_bounds: gram_extremes(&samp),
            factor_bounds: [f1.frame_test().bounds, f2.frame_test().bounds],
        })
    }

    /// Largest deviation between sampling `x` shifted by `(r, r̄)` and the
    /// sample grid of `x` shifted by `(1, 1)`.
    pub fn shift_deviation(&self, x: &TensorCoefficients<T>) -> Result<T> {
        let [r1, r2] = self.strides();
        let moved = self.sample(&x.shifted(r1 as i64, r2 as i64))?;
        let expected = self.sample(x)?.shifted(1, 1);
        moved.max_abs_diff(&expected)
    }
}

/// `N × s'ℓ` matrix with column `(j, m)` equal to `d_j(· - r̄m)`.
fn periodic_synthesis_matrix<T: Real>(scheme: &PeriodicScheme<T>, vectors: &[AxisVector<T>]) -> ComplexMatrix<T> {
    let (ell, rbar) = (scheme.ell(), scheme.rbar() as i64);
    ComplexMatrix::from_fn(scheme.n(), vectors.len() * ell, |p, col| {
        vectors[col / ell].get(p as i64 - rbar * (col % ell) as i64)
    })
}

fn transpose<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(m.cols(), m.rows(), |i, j| m.get(j, i))
}

impl<T: Real> Factor<T> {
    pub fn channels(&self) -> usize {
        match self {
            Self::Continuous(c) => c.channels(),
            Self::Periodic(p) => p.channels(),
        }
    }

    /// `r` or `r̄`.
    pub fn stride(&self) -> usize {
        match self {
            Self::Continuous(c) => c.r(),
            Self::Periodic(p) => p.rbar(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Continuous(_) => "continuous",
            Self::Periodic(_) => "periodic",
        }
    }

    pub fn verdict(&self) -> FactorVerdict<T> {
        match self {
            Self::Continuous(c) => FactorVerdict::Continuous { r: c.r(), constants: c.frame_constants() },
            Self::Periodic(p) => FactorVerdict::Periodic { n: p.n(), test: p.frame_test() },
        }
    }

    fn coefficient_axis(&self, range: IndexRange) -> Axis {
        match self {
            Self::Continuous(_) => Axis::infinite(range),
            Self::Periodic(p) => Axis::periodic(p.n()),
        }
    }

    /// Sample indices that can be nonzero for coefficients on `axis`.
    fn sample_axis(&self, axis: &Axis) -> Axis {
        match self {
            Self::Continuous(c) => {
                if axis.range.is_empty() {
                    return Axis::infinite(IndexRange::new(0, 0));
                }
                let r = c.r() as i64;
                let (k0, k1) = (axis.range.start, axis.range.end() - 1);
                let window = c
                    .crosscovs()
                    .iter()
                    .filter_map(Sequence::bounds)
                    .map(|(a, b)| IndexRange::inclusive(crate::sequence::div_ceil(k0 - b, r), (k1 - a).div_euclid(r)))
                    .fold(IndexRange::new(0, 0), |acc, w| acc.union(&w));
                Axis::infinite(window)
            }
            Self::Periodic(p) => Axis::periodic(p.ell()),
        }
    }

    /// `|window| × |axis|` matrix with entry `(n, k) = R_j(k - stride·n)`.
    fn analysis(&self, j: usize, axis: &Axis, window: &Axis) -> ComplexMatrix<T> {
        let (rows, cols) = (window.range.len, axis.range.len);
        match self {
            Self::Continuous(c) => {
                let kernel = c.symbols()[j].crosscov();
                let r = c.r() as i64;
                ComplexMatrix::from_fn(rows, cols, |n, k| {
                    kernel.get(axis.range.start + k as i64 - r * (window.range.start + n as i64))
                })
            }
            Self::Periodic(p) => {
                let kernel = &p.cross_covariances()[j];
                let rbar = p.rbar() as i64;
                ComplexMatrix::from_fn(rows, cols, |m, q| kernel.at(q as i64 - rbar * m as i64))
            }
        }
    }

    fn synthesis_axis(&self, vectors: &[AxisVector<T>], window: &Axis) -> Axis {
        match self {
            Self::Continuous(c) => {
                if window.range.is_empty() {
                    return Axis::infinite(IndexRange::new(0, 0));
                }
                let r = c.r() as i64;
                let (n0, n1) = (window.range.start, window.range.end() - 1);
                let range = vectors
                    .iter()
                    .filter_map(|v| match v {
                        AxisVector::Infinite { coeffs } => coeffs.bounds(),
                        AxisVector::Periodic { .. } => None,
                    })
                    .map(|(a, b)| IndexRange::inclusive(r * n0 + a, r * n1 + b))
                    .fold(IndexRange::new(0, 0), |acc, w| acc.union(&w));
                Axis::infinite(range)
            }
            Self::Periodic(p) => Axis::periodic(p.n()),
        }
    }

    /// `|out| × |window|` matrix with entry `(k, n) = v(k - stride·n)`.
    fn synthesis(&self, v: &AxisVector<T>, window: &Axis, out: &Axis) -> ComplexMatrix<T> {
        let stride = self.stride() as i64;
        ComplexMatrix::from_fn(out.range.len, window.range.len, |k, n| {
            v.get(out.range.start + k as i64 - stride * (window.range.start + n as i64))
        })
    }

    fn design(&self, index: usize, options: &FactorOptions<T>) -> Result<Vec<AxisVector<T>>> {
        let verdict = self.verdict();
        if !verdict.is_frame() && !options.force {
            return Err(Error::FactorNotAFrame { factor: index + 1, condition: verdict.condition() });
        }
        match self {
            Self::Continuous(c) => {
                let duals = c.dual_symbols(&DualOptions {
                    free_u: options.free_u.clone(),
                    keep: options.keep,
                    force: options.force,
                })?;
                Ok(c.reconstruction_coeffs(&duals).into_iter().map(|coeffs| AxisVector::Infinite { coeffs }).collect())
            }
            Self::Periodic(p) => {
                let free = match &options.free_u {
                    FreeSymbol::Zero => None,
                    FreeSymbol::Constant(u) => Some(u),
                    FreeSymbol::Grid(_) => {
                        return Err(Error::ShapeMismatch("a periodic factor takes a single free matrix".into()))
                    }
                };
                let duals = if options.force { p.dual_columns_unchecked(free)? } else { p.dual_columns(free)? };
                Ok(duals.generators().into_iter().map(|coeffs| AxisVector::Periodic { coeffs }).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::FourierSymbol;
    use crate::random::{random_gaussian_integers, random_matrix, random_vector, rng};
    use crate::scenario::generators::exact_case_crosscov;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn circular(seed: u64, n: usize, rbar: usize, s: usize) -> PeriodicScheme<f64> {
        let mut g = rng(seed);
        PeriodicScheme::circular(n, rbar, (0..s).map(|_| random_vector(&mut g, n)).collect()).unwrap()
    }

    fn identity_like(n: usize) -> PeriodicScheme<f64> {
        let mut e0 = vec![c(0.0, 0.0); n];
        e0[0] = c(1.0, 0.0);
        PeriodicScheme::circular(n, 1, vec![e0]).unwrap()
    }

    fn ff(f1: PeriodicScheme<f64>, f2: PeriodicScheme<f64>) -> TensorScheme<f64> {
        TensorScheme::new(Case::FiniteFinite, Factor::Periodic(f1), Factor::Periodic(f2)).unwrap()
    }

    fn random_x(seed: u64, axes: [Axis; 2]) -> TensorCoefficients<f64> {
        let mut g = rng(seed);
        TensorCoefficients::from_fn(axes, |_, _| crate::random::random_complex(&mut g))
    }

    #[test]
    fn case_consistency_is_enforced() {
        let p = Factor::Periodic(identity_like(2));
        let cont = Factor::Continuous(ContinuousScheme::new(1, vec![FourierSymbol::constant(c(1.0, 0.0))], 4).unwrap());
        assert!(matches!(TensorScheme::new(Case::FiniteFinite, cont.clone(), p.clone()), Err(Error::CaseMismatch(_))));
        assert!(TensorScheme::new(Case::InfiniteFinite, cont.clone(), p.clone()).is_ok());
        assert!(TensorScheme::new(Case::InfiniteInfinite, cont.clone(), cont).is_ok());
        let thin = Factor::Periodic(circular(1, 4, 4, 1));
        assert!(matches!(TensorScheme::new(Case::FiniteFinite, thin, p), Err(Error::InvalidScheme(_))));
    }

    #[test]
    fn identity_scheme_samples_are_deltas() {
        let scheme = ff(identity_like(2), identity_like(2));
        let x = TensorCoefficients::outer(
            &AxisVector::Periodic { coeffs: PeriodicSequence::basis(2, 0) },
            &AxisVector::Periodic { coeffs: PeriodicSequence::basis(2, 0) },
        );
        let grid = scheme.sample(&x).unwrap();
        for (_, _, n, m, v) in grid.cells() {
            assert_eq!(v, c(if (n, m) == (0, 0) { 1.0 } else { 0.0 }, 0.0));
        }
        let kit = scheme.design_kit(&FactorOptions::default(), &FactorOptions::default()).unwrap();
        assert_eq!(kit.c[0].get(0), c(1.0, 0.0));
        assert_eq!(kit.c[0].get(1), c(0.0, 0.0));
        let report = scheme.brute_force_check(&kit).unwrap();
        assert_eq!(report.max_error, 0.0);
        assert_eq!((report.frame_bounds.lambda_min, report.frame_bounds.lambda_max), (1.0, 1.0));
        assert_eq!(scheme.verify_interpolation(&kit).unwrap().max_deviation, 0.0);
    }

    #[test]
    fn separable_signal_factorizes() {
        let (f1, f2) = (circular(2, 6, 2, 3), circular(3, 4, 2, 2));
        let scheme = ff(f1.clone(), f2.clone());
        let mut g = rng(20);
        let u = PeriodicSequence::new(random_vector(&mut g, 6)).unwrap();
        let v = PeriodicSequence::new(random_vector(&mut g, 4)).unwrap();
        let x = TensorCoefficients::outer(
            &AxisVector::Periodic { coeffs: u.clone() },
            &AxisVector::Periodic { coeffs: v.clone() },
        );
        let grid = scheme.sample(&x).unwrap();
        let (su, sv) = (f1.sample(&u).unwrap(), f2.sample(&v).unwrap());
        for (j, jp, n, m, val) in grid.cells() {
            assert!((val - su[j][n as usize] * sv[jp][m as usize]).norm() < 1e-12);
        }
    }

    #[test]
    fn sampling_matches_flattened_matrix() {
        let scheme = ff(circular(4, 4, 2, 2), circular(5, 6, 3, 4));
        let x = random_x(40, scheme.coefficient_axes([IndexRange::new(0, 0); 2]));
        let grid = scheme.sample(&x).unwrap();
        let flat = scheme.sampling_matrix().unwrap().apply(&x.values).unwrap();
        assert_eq!(flat.len(), grid.values.len());
        for (a, b) in flat.iter().zip(&grid.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn square_finite_round_trip_and_interpolation() {
        let scheme = ff(circular(6, 6, 2, 2), circular(7, 4, 4, 4));
        assert!(scheme.is_square());
        let kit = scheme.design_kit(&FactorOptions::default(), &FactorOptions::default()).unwrap();
        let x = random_x(60, scheme.coefficient_axes([IndexRange::new(0, 0); 2]));
        let back = scheme.reconstruct(&scheme.sample(&x).unwrap(), &kit).unwrap();
        assert!(back.max_abs_diff(&x) < 1e-10);
        assert!(scheme.verify_interpolation(&kit).unwrap().max_deviation < 1e-10);
        let report = scheme.brute_force_check(&kit).unwrap();
        assert!(report.max_error < 1e-10);
        let product = report.factor_bounds[0].product(&report.factor_bounds[1]);
        assert!((product.lambda_min - report.frame_bounds.lambda_min).abs() < 1e-9);
        assert!((product.lambda_max - report.frame_bounds.lambda_max).abs() < 1e-9 * product.lambda_max.max(1.0));
        let mut g = rng(61);
        let options = FactorOptions { free_u: FreeSymbol::Constant(random_matrix(&mut g, 6, 6)), ..Default::default() };
        let other = scheme.design_kit(&options, &FactorOptions::default()).unwrap();
        for (a, b) in kit.c.iter().zip(&other.c) {
            for p in 0..6 {
                assert!((a.get(p) - b.get(p)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn oversampled_scheme_refuses_interpolation() {
        let scheme = ff(circular(8, 4, 2, 3), identity_like(2));
        let kit = scheme.design_kit(&FactorOptions::default(), &FactorOptions::default()).unwrap();
        assert!(matches!(scheme.verify_interpolation(&kit), Err(Error::NotSquareCase(_))));
    }

    #[test]
    fn zero_samples_give_zero() {
        let scheme = ff(circular(9, 4, 2, 2), identity_like(3));
        let kit = scheme.design_kit(&FactorOptions::default(), &FactorOptions::default()).unwrap();
        let zero = TensorCoefficients::zeros(scheme.coefficient_axes([IndexRange::new(0, 0); 2]));
        let back = scheme.reconstruct(&scheme.sample(&zero).unwrap(), &kit).unwrap();
        assert_eq!(back.max_abs(), 0.0);
    }

    #[test]
    fn infinite_finite_exact_round_trip() {
        let mut g = rng(10);
        let cont = ContinuousScheme::from_crosscov(2, &exact_case_crosscov(&mut g, 2, 3), 64).unwrap();
        let scheme =
            TensorScheme::new(Case::InfiniteFinite, Factor::Continuous(cont), Factor::Periodic(circular(11, 4, 2, 3)))
                .unwrap();
        let kit = scheme.design_kit(&FactorOptions::default(), &FactorOptions::default()).unwrap();
        let x = random_x(12, scheme.coefficient_axes([IndexRange::new(-3, 7), IndexRange::new(0, 0)]));
        let back = scheme.reconstruct(&scheme.sample(&x).unwrap(), &kit).unwrap();
        assert!(back.max_abs_diff(&x) < 1e-9);
    }

    #[test]
    fn infinite_infinite_exact_round_trip() {
        let mut g = rng(13);
        let c1 = ContinuousScheme::from_crosscov(2, &exact_case_crosscov(&mut g, 2, 2), 32).unwrap();
        let c2 = ContinuousScheme::from_crosscov(1, &exact_case_crosscov(&mut g, 1, 1), 32).unwrap();
        let scheme = TensorScheme::new(Case::InfiniteInfinite, Factor::Continuous(c1), Factor::Continuous(c2)).unwrap();
        let kit = scheme.design_kit(&FactorOptions::default(), &FactorOptions::default()).unwrap();
        let x = random_x(14, scheme.coefficient_axes([IndexRange::new(-2, 5), IndexRange::new(1, 4)]));
        let back = scheme.reconstruct(&scheme.sample(&x).unwrap(), &kit).unwrap();
        assert!(back.max_abs_diff(&x) < 1e-9);
        assert!(scheme.verify_interpolation(&kit).unwrap().max_deviation < 1e-9);
    }

    #[test]
    fn shift_is_exact_on_integer_data() {
        let mut g = rng(15);
        let systems = (0..3).map(|_| random_gaussian_integers(&mut g, 6, 3)).collect();
        let f1 = PeriodicScheme::circular(6, 3, systems).unwrap();
        let f2 = circular(16, 4, 2, 2);
        let scheme = ff(f1, f2);
        let ints = random_gaussian_integers(&mut g, 24, 4);
        let x = TensorCoefficients { axes: scheme.coefficient_axes([IndexRange::new(0, 0); 2]), values: ints.clone() };
        // Factor 2 has non-integer data, so only factor-1 arithmetic is exact here.
        assert!(scheme.shift_deviation(&x).unwrap() < 1e-12);

        let kernel: Vec<Sequence<f64>> =
            (0..3).map(|_| Sequence::new(-2, random_gaussian_integers(&mut g, 4, 2))).collect();
        let cont = ContinuousScheme::from_crosscov(2, &kernel, 16).unwrap();
        let scheme =
            TensorScheme::new(Case::InfiniteInfinite, Factor::Continuous(cont.clone()), Factor::Continuous(cont))
                .unwrap();
        let axes = scheme.coefficient_axes([IndexRange::new(-3, 6), IndexRange::new(2, 4)]);
        let x = TensorCoefficients { axes, values: ints };
        assert_eq!(scheme.shift_deviation(&x).unwrap(), 0.0);
    }

    #[test]
    fn rank_deficient_factor_is_named() {
        let dup = vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let bad = PeriodicScheme::circular(4, 2, vec![dup.clone(), dup]).unwrap();
        let scheme = ff(identity_like(2), bad);
        let err = scheme.design_kit(&FactorOptions::default(), &FactorOptions::default()).unwrap_err();
        assert!(matches!(err, Error::FactorNotAFrame { factor: 2, ref condition } if condition.contains("rank")));
        let forced = FactorOptions { force: true, ..Default::default() };
        let kit = scheme.design_kit(&FactorOptions::default(), &forced).unwrap();
        let report = scheme.brute_force_check(&kit).unwrap();
        assert!(report.max_error >= 0.1);
    }

    #[test]
    fn kit_from_other_scheme_is_rejected() {
        let a = ff(identity_like(2), identity_like(2));
        let b = ff(identity_like(2), circular(3, 4, 2, 2));
        let kit = a.design_kit(&FactorOptions::default(), &FactorOptions::default()).unwrap();
        let x = TensorCoefficients::zeros(b.coefficient_axes([IndexRange::new(0, 0); 2]));
        assert!(b.reconstruct(&b.sample(&x).unwrap(), &kit).is_err());
    }
}
