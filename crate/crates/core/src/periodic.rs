//! A finite factor: `A_b = span{b, Vb, …, V^{N-1} b}` with `V^N b = b`.
//!
//! An element `x = Σ_p c(p) V^p b` is identified with its coefficient
//! sequence `c ∈ ℓ²_N`. Sampling with systems `h'_{j'}` at period `r̄`
//! gives `⟨x, V^{r̄m} h'_{j'}⟩ = Σ_p c(p)·R_{j'}(p - r̄m)` where
//! `R_{j'}(q) = ⟨V^q b, h'_{j'}⟩` is the `N`-periodic cross-covariance.
//! Stacking these rows gives the `s'ℓ × N` matrix returned by
//! [`PeriodicScheme::covariance_matrix`], so samples are `R·c`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    gram_extremes, left_inverse_family, pseudo_inverse, rank_of, ComplexMatrix, SpectralExtremes, PINV_TOL, RANK_TOL,
};
use crate::scalar::{cabs, cz, wrap, Real};

/// Tolerance for unitarity and period checks on explicit models.
pub const MODEL_TOL: f64 = 1e-10;

/// `N`-periodic complex sequence; `at(p)` reads `values[p mod N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSequence<T> {
    values: Vec<Complex<T>>,
}

impl<T: Real> PeriodicSequence<T> {
    pub fn new(values: Vec<Complex<T>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidScheme("periodic sequence needs period >= 1".into()));
        }
        Ok(Self { values })
    }

    /// Canonical basis vector `e_p` of `ℓ²_N`.
    pub fn basis(n: usize, p: usize) -> Self {
        let mut values = vec![cz(); n];
        values[p % n] = Complex::new(T::one(), T::zero());
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![cz(); n] }
    }

    #[inline]
    pub fn period(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn at(&self, p: i64) -> Complex<T> {
        self.values[wrap(p, self.values.len())]
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    /// `p ↦ self(p - q)`, i.e. the sequence `(T(N-q), T(N-q+1), …)`.
    pub fn shifted(&self, q: i64) -> Self {
        let n = self.period() as i64;
        Self { values: (0..n).map(|p| self.at(p - q)).collect() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).fold(T::zero(), |acc, (a, b)| acc.max(cabs(*a - *b)))
    }
}

/// Unitary operator on `ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum FiniteUnitaryModel<T: Real> {
    /// `(Wx)(p) = x(p - 1 mod d)`.
    CircularShift { dim: usize },
    /// Explicit unitary matrix.
    Explicit { matrix: ComplexMatrix<T> },
}

impl<T: Real> FiniteUnitaryModel<T> {
    pub fn circular_shift(dim: usize) -> Self {
        Self::CircularShift { dim }
    }

    /// Wraps an explicit matrix, checking `max |W*W - I| <= 1e-10`.
    pub fn explicit(matrix: ComplexMatrix<T>) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        let deviation = matrix.adjoint().matmul(&matrix)?.max_abs_diff(&ComplexMatrix::identity(matrix.rows()))?;
        if deviation > T::lit(MODEL_TOL) {
            return Err(Error::NotUnitary { deviation: deviation.as_f64() });
        }
        Ok(Self::Explicit { matrix })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::CircularShift { dim } => *dim,
            Self::Explicit { matrix } => matrix.rows(),
        }
    }

    /// `W v`.
    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        match self {
            Self::CircularShift { dim } => (0..*dim as i64).map(|p| v[wrap(p - 1, *dim)]).collect(),
            Self::Explicit { matrix } => matrix.apply(v).expect("dimension checked by caller"),
        }
    }

    /// `W^q v` for any integer `q` (negative powers use `W*`).
    pub fn power_apply(&self, v: &[Complex<T>], q: i64) -> Vec<Complex<T>> {
        match self {
            Self::CircularShift { dim } => (0..*dim as i64).map(|p| v[wrap(p - q, *dim)]).collect(),
            Self::Explicit { matrix } => {
                let step = if q >= 0 { matrix.clone() } else { matrix.adjoint() };
                let mut out = v.to_vec();
                for _ in 0..q.unsigned_abs() {
                    out = step.apply(&out).expect("dimension checked by caller");
                }
                out
            }
        }
    }
}

/// `⟨x, y⟩ = Σ x_i conj(y_i)`: linear in the first argument.
pub fn inner<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    x.iter().zip(y).fold(cz(), |acc, (a, b)| acc + *a * b.conj())
}

/// `q ↦ ⟨W^q v, h⟩` for `q = 0..period`.
pub fn cross_covariance<T: Real>(
    model: &FiniteUnitaryModel<T>,
    period: usize,
    v: &[Complex<T>],
    h: &[Complex<T>],
) -> Result<PeriodicSequence<T>> {
    let d = model.dim();
    for len in [v.len(), h.len()] {
        if len != d {
            return Err(Error::DimensionMismatch { expected: d, found: len });
        }
    }
    let mut iterate = v.to_vec();
    let mut values = Vec::with_capacity(period);
    for _ in 0..period {
        values.push(inner(&iterate, h));
        iterate = model.apply(&iterate);
    }
    PeriodicSequence::new(values)
}

/// Verdict of the periodic frame test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTest<T> {
    pub is_frame: bool,
    pub rank: usize,
    /// Extremes of `R*R`: the optimal frame bounds of the analysis vectors.
    pub bounds: SpectralExtremes<T>,
}

/// Dual vectors `ℍ_{j',m}` and the matrix `H_S` whose columns they are.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicDuals<T: Real> {
    /// `columns[j'][m]`; `columns[j'][m]` is `columns[j'][0]` shifted by `r̄m`.
    pub columns: Vec<Vec<PeriodicSequence<T>>>,
    pub h_s: ComplexMatrix<T>,
}

impl<T: Real> PeriodicDuals<T> {
    /// Reconstruction generators `d_{j'}` (coefficients of `ℍ_{j',0}`).
    pub fn generators(&self) -> Vec<PeriodicSequence<T>> {
        self.columns.iter().map(|c| c[0].clone()).collect()
    }
}

/// Finite factor together with its sampling systems.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicScheme<T: Real> {
    model: FiniteUnitaryModel<T>,
    generator: Vec<Complex<T>>,
    n: usize,
    rbar: usize,
    systems: Vec<Vec<Complex<T>>>,
    crosscov: Vec<PeriodicSequence<T>>,
    iterates: Vec<Vec<Complex<T>>>,
    rank_tol: T,
}

impl<T: Real> PeriodicScheme<T> {
    /// Validates `r̄ | N`, `W^N b = b` and linear independence of the
    /// iterates `b, Wb, …, W^{N-1} b`.
    pub fn new(
        model: FiniteUnitaryModel<T>,
        generator: Vec<Complex<T>>,
        n: usize,
        rbar: usize,
        systems: Vec<Vec<Complex<T>>>,
    ) -> Result<Self> {
        if n == 0 || rbar == 0 {
            return Err(Error::InvalidScheme("N and rbar must be positive".into()));
        }
        if !n.is_multiple_of(rbar) {
            return Err(Error::InvalidScheme(format!("rbar = {rbar} must divide N = {n}")));
        }
        if systems.is_empty() {
            return Err(Error::InvalidScheme("at least one sampling system is required".into()));
        }
        let d = model.dim();
        if generator.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: generator.len() });
        }
        let mut iterates = Vec::with_capacity(n);
        let mut current = generator.clone();
        for _ in 0..n {
            iterates.push(current.clone());
            current = model.apply(&current);
        }
        let scale = generator.iter().fold(T::one(), |acc, z| acc.max(cabs(*z)));
        let period_err = current.iter().zip(&generator).fold(T::zero(), |acc, (a, b)| acc.max(cabs(*a - *b)));
        if period_err > T::lit(MODEL_TOL) * scale {
            return Err(Error::InvalidScheme(format!(
                "generator is not N-periodic: max |W^N b - b| = {:e}",
                period_err.as_f64()
            )));
        }
        let basis = ComplexMatrix::from_fn(d, n, |i, p| iterates[p][i]);
        let rank = rank_of(&basis, T::lit(RANK_TOL));
        if rank < n {
            return Err(Error::InvalidScheme(format!(
                "iterates b, Wb, ..., W^(N-1)b are linearly dependent (rank {rank} < N = {n})"
            )));
        }
        let crosscov =
            systems.iter().map(|h| cross_covariance(&model, n, &generator, h)).collect::<Result<Vec<_>>>()?;
        Ok(Self { model, generator, n, rbar, systems, crosscov, iterates, rank_tol: T::lit(RANK_TOL) })
    }

    /// Circular shift on `ℂ^N` with generator `e_0`; here `R_{j'}(q) = conj(h'_{j'}(q))`.
    pub fn circular(n: usize, rbar: usize, systems: Vec<Vec<Complex<T>>>) -> Result<Self> {
        Self::new(FiniteUnitaryModel::circular_shift(n), PeriodicSequence::basis(n, 0).values, n, rbar, systems)
    }

    /// Relative singular-value cutoff used by [`Self::frame_test`] (default `1e-10`).
    pub fn with_rank_tol(mut self, rank_tol: T) -> Self {
        self.rank_tol = rank_tol;
        self
    }

    pub fn model(&self) -> &FiniteUnitaryModel<T> {
        &self.model
    }

    pub fn generator(&self) -> &[Complex<T>] {
        &self.generator
    }

    pub fn systems(&self) -> &[Vec<Complex<T>>] {
        &self.systems
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn rbar(&self) -> usize {
        self.rbar
    }

    /// `ℓ = N / r̄`.
    #[inline]
    pub fn ell(&self) -> usize {
        self.n / self.rbar
    }

    /// Number of sampling systems `s'`.
    #[inline]
    pub fn channels(&self) -> usize {
        self.systems.len()
    }

    pub fn cross_covariances(&self) -> &[PeriodicSequence<T>] {
        &self.crosscov
    }

    /// The `s'ℓ × N` matrix with entry `((j', m), p) = R_{j'}(N - r̄m + p)`.
    pub fn covariance_matrix(&self) -> ComplexMatrix<T> {
        let (ell, rbar) = (self.ell(), self.rbar as i64);
        ComplexMatrix::from_fn(self.channels() * ell, self.n, |row, p| {
            let (j, m) = (row / ell, (row % ell) as i64);
            self.crosscov[j].at(self.n as i64 - rbar * m + p as i64)
        })
    }

    pub fn frame_test(&self) -> FrameTest<T> {
        let r = self.covariance_matrix();
        let rank = rank_of(&r, self.rank_tol);
        FrameTest { is_frame: rank == self.n, rank, bounds: gram_extremes(&r) }
    }

    /// Dual vectors from the left inverse `R† + U(I - R R†)`; `free_u` is
    /// `N × s'ℓ` and `None` selects the pseudo-inverse.
    pub fn dual_columns(&self, free_u: Option<&ComplexMatrix<T>>) -> Result<PeriodicDuals<T>> {
        let test = self.frame_test();
        if !test.is_frame {
            return Err(Error::NotAFrame(format!("rank of the covariance matrix is {} < N = {}", test.rank, self.n)));
        }
        let h = left_inverse_family(&self.covariance_matrix(), free_u)?;
        Ok(self.assemble_duals(&h))
    }

    /// Same construction without the rank check; on a non-frame the result
    /// does not reconstruct. Used to demonstrate failure modes.
    pub fn dual_columns_unchecked(&self, free_u: Option<&ComplexMatrix<T>>) -> Result<PeriodicDuals<T>> {
        let r = self.covariance_matrix();
        let pinv = pseudo_inverse(&r, T::lit(PINV_TOL));
        let h = match free_u {
            None => pinv,
            Some(u) => {
                let projector = ComplexMatrix::identity(r.rows()).sub(&r.matmul(&pinv)?)?;
                pinv.add(&u.matmul(&projector)?)?
            }
        };
        Ok(self.assemble_duals(&h))
    }

    /// Builds `H_S` from the first `r̄` rows `S` of a left inverse `h`.
    ///
    /// Every `t ∈ ℤ_N` is uniquely `t ≡ p - r̄m` with `p < r̄`, `m < ℓ`;
    /// setting `ℍ_{j',0}(t) = S(p, (j', m))` and `ℍ_{j',m} = ℍ_{j',0}(· - r̄m)`
    /// turns `S R = (I_r̄, 0)` into `H_S R = I_N`.
    fn assemble_duals(&self, h: &ComplexMatrix<T>) -> PeriodicDuals<T> {
        let (n, rbar, ell) = (self.n, self.rbar, self.ell());
        let s = h.top_rows(rbar);
        let columns: Vec<Vec<PeriodicSequence<T>>> = (0..self.channels())
            .map(|j| {
                let base: Vec<Complex<T>> = (0..n)
                    .map(|t| {
                        let (p, k) = (t % rbar, t / rbar);
                        let m = (ell - k % ell) % ell;
                        s.get(p, j * ell + m)
                    })
                    .collect();
                let base = PeriodicSequence { values: base };
                (0..ell).map(|m| base.shifted((rbar * m) as i64)).collect()
            })
            .collect();
        let h_s = ComplexMatrix::from_fn(n, self.channels() * ell, |t, col| columns[col / ell][col % ell].values[t]);
        PeriodicDuals { columns, h_s }
    }

    /// `samples[j'][m] = ⟨x, V^{r̄m} h'_{j'}⟩ = Σ_p c(p) R_{j'}(p - r̄m)`.
    pub fn sample(&self, coeffs: &PeriodicSequence<T>) -> Result<Vec<Vec<Complex<T>>>> {
        self.check_period(coeffs)?;
        let rbar = self.rbar as i64;
        Ok(self
            .crosscov
            .iter()
            .map(|r| {
                (0..self.ell() as i64)
                    .map(|m| (0..self.n as i64).fold(cz(), |acc, p| acc + coeffs.at(p) * r.at(p - rbar * m)))
                    .collect()
            })
            .collect())
    }

    /// `Σ_{j',m} samples[j'][m] · d_{j'}(· - r̄m)`.
    pub fn reconstruct(&self, samples: &[Vec<Complex<T>>], duals: &PeriodicDuals<T>) -> Result<PeriodicSequence<T>> {
        let ell = self.ell();
        if samples.len() != self.channels() || samples.iter().any(|row| row.len() != ell) {
            return Err(Error::ShapeMismatch(format!("samples must be {} x {}", self.channels(), ell)));
        }
        if duals.columns.len() != self.channels() {
            return Err(Error::ShapeMismatch("dual set does not match the scheme".into()));
        }
        let rbar = self.rbar as i64;
        let mut out = vec![cz(); self.n];
        for (row, dual) in samples.iter().zip(&duals.columns) {
            let d = &dual[0];
            for (m, sample) in row.iter().enumerate() {
                for (t, slot) in out.iter_mut().enumerate() {
                    *slot += *sample * d.at(t as i64 - rbar * m as i64);
                }
            }
        }
        Ok(PeriodicSequence { values: out })
    }

    /// `x = Σ_p c(p) W^p b` in the model space.
    pub fn expand(&self, coeffs: &PeriodicSequence<T>) -> Result<Vec<Complex<T>>> {
        self.check_period(coeffs)?;
        let mut out = vec![cz(); self.model.dim()];
        for (c, v) in coeffs.values.iter().zip(&self.iterates) {
            for (slot, vi) in out.iter_mut().zip(v) {
                *slot += *c * *vi;
            }
        }
        Ok(out)
    }

    /// Checks that expanding the shifted sequence `(T(N-q), …)` equals
    /// `W^q` applied to the expansion of `T`, to `1e-10`.
    pub fn shift_property_check(&self, t0: &PeriodicSequence<T>, q: i64) -> Result<bool> {
        let lhs = self.expand(&t0.shifted(q))?;
        let rhs = self.model.power_apply(&self.expand(t0)?, q);
        let scale = lhs.iter().fold(T::one(), |acc, z| acc.max(cabs(*z)));
        let err = lhs.iter().zip(&rhs).fold(T::zero(), |acc, (a, b)| acc.max(cabs(*a - *b)));
        Ok(err <= T::lit(1e-10) * scale)
    }

    fn check_period(&self, coeffs: &PeriodicSequence<T>) -> Result<()> {
        if coeffs.period() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: coeffs.period() });
        }
        Ok(())
    }
}
