//! Dense complex linear algebra: rank, Moore-Penrose pseudo-inverse, the
//! left-inverse family `m† + U(I - m m†)` and Hermitian spectral extremes.
//!
//! Singular values come from a one-sided Jacobi SVD (nalgebra's SVD loses
//! accuracy near 1e-10 on small complex inputs); Hermitian eigenvalues come
//! from `nalgebra`. This module fixes the truncation conventions used
//! everywhere else in the crate.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, cone, cz, is_finite, Real};

/// Default relative tolerance for [`rank_of`].
pub const RANK_TOL: f64 = 1e-10;
/// Default relative tolerance for [`pseudo_inverse`].
pub const PINV_TOL: f64 = 1e-12;
/// Hermitian check tolerance, relative to `max(1, max|m_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 80;

/// Dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Real> {
    inner: DMatrix<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    /// Wraps a matrix after checking every entry is finite.
    pub fn new(inner: DMatrix<Complex<T>>) -> Result<Self> {
        if inner.iter().all(|z| is_finite(*z)) {
            Ok(Self { inner })
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: DMatrix::from_element(rows, cols, cz()) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: DMatrix::from_fn(n, n, |i, j| if i == j { cone() } else { cz() }) }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        Self { inner: DMatrix::from_fn(rows, cols, f) }
    }

    /// Builds from row-major data; fails on length mismatch or non-finite data.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[Complex<T>]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    /// Builds from a list of equally long rows.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
        }
        let flat: Vec<_> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(rows.len(), cols, &flat)
    }

    /// Real diagonal matrix.
    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex::new(values[i], T::zero()) } else { cz() })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.inner[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex<T>) {
        self.inner[(i, j)] = value;
    }

    pub fn as_inner(&self) -> &DMatrix<Complex<T>> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<Complex<T>> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self { inner: &self.inner * &rhs.inner })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self { inner: &self.inner - &rhs.inner })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self { inner: &self.inner + &rhs.inner })
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self { inner: self.inner.map(|z| z * factor) }
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch { expected: self.cols(), found: x.len() });
        }
        Ok((0..self.rows()).map(|i| (0..self.cols()).fold(cz(), |acc, j| acc + self.inner[(i, j)] * x[j])).collect())
    }

    pub fn row(&self, i: usize) -> Vec<Complex<T>> {
        (0..self.cols()).map(|j| self.inner[(i, j)]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows()).map(|i| self.inner[(i, j)]).collect()
    }

    /// First `n` rows as a new matrix.
    pub fn top_rows(&self, n: usize) -> Self {
        Self { inner: self.inner.rows(0, n.min(self.rows())).into_owned() }
    }

    /// Largest entrywise modulus (0 for empty matrices).
    pub fn max_abs(&self) -> T {
        self.inner.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<T> {
        Ok(self.sub(rhs)?.max_abs())
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self { inner: self.inner.kronecker(&rhs.inner) }
    }

    fn same_shape(&self, rhs: &Self) -> Result<()> {
        if self.rows() == rhs.rows() && self.cols() == rhs.cols() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!("{}x{} vs {}x{}", self.rows(), self.cols(), rhs.rows(), rhs.cols())))
        }
    }
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralExtremes<T> {
    pub lambda_min: T,
    pub lambda_max: T,
}

impl<T: Real> SpectralExtremes<T> {
    /// Extremes of a product of two positive semidefinite spectra.
    pub fn product(&self, other: &Self) -> Self {
        Self { lambda_min: self.lambda_min * other.lambda_min, lambda_max: self.lambda_max * other.lambda_max }
    }
}

/// Thin SVD `m = Σ_k a_k v_k*` with orthogonal columns `a_k = σ_k u_k`.
struct JacobiSvd<T: Real> {
    /// `cols` columns of length `rows`.
    a: Vec<Vec<Complex<T>>>,
    /// `cols` columns of length `cols`; unitary.
    v: Vec<Vec<Complex<T>>>,
    sigma: Vec<T>,
}

fn column_dot<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    x.iter().zip(y).fold(cz(), |acc, (a, b)| acc + a.conj() * b)
}

/// One-sided Jacobi on the columns of `m` (rows >= cols is not required).
fn jacobi_svd<T: Real>(m: &ComplexMatrix<T>) -> JacobiSvd<T> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<Complex<T>>> = (0..cols).map(|j| (0..rows).map(|i| m.inner[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<Complex<T>>> =
        (0..cols).map(|j| (0..cols).map(|i| if i == j { cone() } else { cz() }).collect()).collect();
    let eps = T::default_epsilon();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = column_dot(&a[p], &a[p]).re;
                let beta = column_dot(&a[q], &a[q]).re;
                let gamma = column_dot(&a[p], &a[q]);
                let g = cabs(gamma);
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / Complex::new(g, T::zero());
                let zeta = (beta - alpha) / (T::lit(2.0) * g);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (cc, sc) = (Complex::new(c, T::zero()), Complex::new(s, T::zero()));
                let rot = |x: &mut Vec<Vec<Complex<T>>>| {
                    for i in 0..x[p].len() {
                        let (xp, xq) = (x[p][i], x[q][i] * phase.conj());
                        x[p][i] = cc * xp - sc * xq;
                        x[q][i] = sc * xp + cc * xq;
                    }
                };
                rot(&mut a);
                rot(&mut v);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = a.iter().map(|col| column_dot(col, col).re.sqrt()).collect();
    JacobiSvd { a, v, sigma }
}

fn singular_values<T: Real>(m: &ComplexMatrix<T>) -> Vec<T> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    if m.rows() < m.cols() {
        return jacobi_svd(&m.adjoint()).sigma;
    }
    jacobi_svd(m).sigma
}

fn sigma_max<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, s| acc.max(*s))
}

/// Eigenvalue extremes of a square Hermitian matrix.
pub fn hermitian_extremes<T: Real>(m: &ComplexMatrix<T>) -> Result<SpectralExtremes<T>> {
    if m.rows() != m.cols() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.rows() == 0 {
        return Ok(SpectralExtremes { lambda_min: T::zero(), lambda_max: T::zero() });
    }
    let deviation = m.max_abs_diff(&m.adjoint())?;
    let scale = T::one().max(m.max_abs());
    if deviation > T::lit(HERMITIAN_TOL) * scale {
        return Err(Error::NotHermitian { deviation: deviation.as_f64() });
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let half = T::lit(0.5);
    let herm = m.inner.zip_map(&m.inner.adjoint(), |a, b| (a + b) * Complex::new(half, T::zero()));
    let eig = herm.symmetric_eigenvalues();
    let (mut lo, mut hi) = (eig[0], eig[0]);
    for &v in eig.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok(SpectralExtremes { lambda_min: lo, lambda_max: hi })
}

/// Extremes of `m* m`, clamped at zero (the Gram matrix is positive semidefinite).
pub fn gram_extremes<T: Real>(m: &ComplexMatrix<T>) -> SpectralExtremes<T> {
    let gram = m.adjoint().matmul(m).expect("adjoint product shapes agree");
    let ext = hermitian_extremes(&gram).expect("Gram matrices are Hermitian");
    SpectralExtremes { lambda_min: ext.lambda_min.max(T::zero()), lambda_max: ext.lambda_max.max(T::zero()) }
}

/// Number of singular values `>= rel_tol · σ_max`; 0 for the zero matrix.
pub fn rank_of<T: Real>(m: &ComplexMatrix<T>, rel_tol: T) -> usize {
    let sv = singular_values(m);
    let smax = sigma_max(&sv);
    if smax <= T::zero() {
        return 0;
    }
    let cut = rel_tol * smax;
    sv.iter().filter(|s| **s >= cut).count()
}

/// Moore-Penrose pseudo-inverse by truncated SVD.
///
/// Singular values below `rel_tol · σ_max` are treated as zero; the zero
/// matrix maps to the zero matrix of transposed shape.
pub fn pseudo_inverse<T: Real>(m: &ComplexMatrix<T>, rel_tol: T) -> ComplexMatrix<T> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows == 0 || cols == 0 {
        return ComplexMatrix::zeros(cols, rows);
    }
    // For wide inputs work on m* and take the adjoint at the end.
    let wide = rows < cols;
    let tall = if wide { m.adjoint() } else { m.clone() };
    let svd = jacobi_svd(&tall);
    let smax = sigma_max(&svd.sigma);
    if smax <= T::zero() {
        return ComplexMatrix::zeros(cols, rows);
    }
    let cut = rel_tol * smax;
    // tall† = Σ_k v_k a_k* / σ_k²
    let (tr, tc) = (tall.rows(), tall.cols());
    let mut out = DMatrix::from_element(tc, tr, cz::<T>());
    for ((a, v), &s) in svd.a.iter().zip(&svd.v).zip(&svd.sigma) {
        if s < cut {
            continue;
        }
        let inv = Complex::new(T::one() / (s * s), T::zero());
        for i in 0..tc {
            let vi = v[i] * inv;
            for j in 0..tr {
                out[(i, j)] += vi * a[j].conj();
            }
        }
    }
    if wide {
        out = out.adjoint();
    }
    ComplexMatrix { inner: out }
}

/// A member of the left-inverse family `m† + U(I - m m†)` of a tall
/// full-column-rank matrix. `free_u = None` selects the pseudo-inverse.
pub fn left_inverse_family<T: Real>(
    m: &ComplexMatrix<T>,
    free_u: Option<&ComplexMatrix<T>>,
) -> Result<ComplexMatrix<T>> {
    let rank = rank_of(m, T::lit(RANK_TOL));
    if rank < m.cols() {
        return Err(Error::RankDeficient { rank, required: m.cols() });
    }
    let pinv = pseudo_inverse(m, T::lit(PINV_TOL));
    match free_u {
        None => Ok(pinv),
        Some(u) => {
            if u.rows() != m.cols() || u.cols() != m.rows() {
                return Err(Error::ShapeMismatch(format!(
                    "free matrix must be {}x{}, got {}x{}",
                    m.cols(),
                    m.rows(),
                    u.rows(),
                    u.cols()
                )));
            }
            let projector = ComplexMatrix::identity(m.rows()).sub(&m.matmul(&pinv)?)?;
            pinv.add(&u.matmul(&projector)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_matrix, rng};

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn extremes_of_identity_and_diagonal() {
        let e = hermitian_extremes(&M::identity(3)).unwrap();
        assert_eq!((e.lambda_min, e.lambda_max), (1.0, 1.0));
        let e = hermitian_extremes(&M::diagonal(&[0.0, 2.0])).unwrap();
        assert!((e.lambda_min - 0.0).abs() < 1e-15 && (e.lambda_max - 2.0).abs() < 1e-15);
    }

    #[test]
    fn extremes_reject_bad_input() {
        assert!(matches!(hermitian_extremes(&M::zeros(2, 3)), Err(Error::NotSquare { .. })));
        let m = M::from_rows(&[vec![c(1.0, 0.0), c(1.0, 1.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        assert!(matches!(hermitian_extremes(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn non_finite_entries_rejected() {
        let err = M::from_row_slice(1, 1, &[c(f64::NAN, 0.0)]).unwrap_err();
        assert_eq!(err, Error::NonFinite);
    }

    /// Independent oracle: power iteration with Hotelling deflation on a
    /// shifted positive definite matrix.
    fn power_extremes(m: &M) -> (f64, f64) {
        let n = m.rows();
        let bound: f64 = (0..n).map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
        let shifted = |shift: f64, sign: f64| {
            M::from_fn(n, n, |i, j| {
                let d = if i == j { c(shift, 0.0) } else { c(0.0, 0.0) };
                d + m.get(i, j) * sign
            })
        };
        let top = |a: &M| {
            let mut v: Vec<Complex<f64>> = (0..n).map(|i| c(1.0 + i as f64 * 0.37, 0.1 * i as f64)).collect();
            let mut lambda = 0.0;
            for _ in 0..20000 {
                let w = a.apply(&v).unwrap();
                let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let rayleigh: f64 = v.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum::<f64>()
                    / v.iter().map(|z| z.norm_sqr()).sum::<f64>();
                v = w.into_iter().map(|z| z / norm).collect();
                if (rayleigh - lambda).abs() < 1e-15 * rayleigh.abs().max(1.0) {
                    lambda = rayleigh;
                    break;
                }
                lambda = rayleigh;
            }
            lambda
        };
        let max = top(&shifted(bound, 1.0)) - bound;
        let min = bound - top(&shifted(bound, -1.0));
        (min, max)
    }

    #[test]
    fn extremes_match_power_iteration_oracle() {
        let mut r = rng(11);
        for _ in 0..5 {
            let m = random_hermitian(&mut r, 6);
            let e = hermitian_extremes(&m).unwrap();
            let (lo, hi) = power_extremes(&m);
            assert!((e.lambda_min - lo).abs() < 1e-9, "{} vs {}", e.lambda_min, lo);
            assert!((e.lambda_max - hi).abs() < 1e-9, "{} vs {}", e.lambda_max, hi);
        }
    }

    #[test]
    fn pinv_trivial_cases() {
        let id = M::identity(4);
        assert!(pseudo_inverse(&id, 1e-12).max_abs_diff(&id).unwrap() < 1e-15);
        let p = M::diagonal(&[1.0, 0.0]);
        assert!(pseudo_inverse(&p, 1e-12).max_abs_diff(&p).unwrap() < 1e-15);
        let z = M::zeros(3, 2);
        assert_eq!(pseudo_inverse(&z, 1e-12), M::zeros(2, 3));
        assert_eq!(rank_of(&M::zeros(4, 4), 1e-10), 0);
    }

    /// Solves `a x = b` for square `a` by Gaussian elimination with partial pivoting.
    fn gauss_solve(a: &M, b: &M) -> M {
        let n = a.rows();
        let mut aug: Vec<Vec<Complex<f64>>> = (0..n).map(|i| a.row(i).into_iter().chain(b.row(i)).collect()).collect();
        let w = aug[0].len();
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| aug[x][col].norm().total_cmp(&aug[y][col].norm())).unwrap();
            aug.swap(col, piv);
            let p = aug[col][col];
            for k in col..w {
                aug[col][k] /= p;
            }
            for row in 0..n {
                if row != col {
                    let f = aug[row][col];
                    for k in col..w {
                        let sub = f * aug[col][k];
                        aug[row][k] -= sub;
                    }
                }
            }
        }
        M::from_fn(n, b.cols(), |i, j| aug[i][n + j])
    }

    #[test]
    fn pinv_matches_normal_equations_oracle() {
        let mut r = rng(5);
        for _ in 0..10 {
            let m = random_matrix(&mut r, 5, 3);
            let mstar = m.adjoint();
            let oracle = gauss_solve(&mstar.matmul(&m).unwrap(), &mstar);
            let pinv = pseudo_inverse(&m, 1e-12);
            assert!(pinv.max_abs_diff(&oracle).unwrap() < 1e-10);
        }
    }

    #[test]
    fn penrose_identities_to_roundoff_on_rank_deficient_input() {
        let mut r = rng(21);
        for (rows, inner, cols) in [(7, 2, 5), (4, 3, 9), (9, 3, 3), (6, 1, 6)] {
            let m = random_matrix(&mut r, rows, inner).matmul(&random_matrix(&mut r, inner, cols)).unwrap();
            let p = pseudo_inverse(&m, 1e-12);
            let (mp, pm) = (m.matmul(&p).unwrap(), p.matmul(&m).unwrap());
            assert!(mp.matmul(&m).unwrap().max_abs_diff(&m).unwrap() < 1e-13);
            assert!(pm.matmul(&p).unwrap().max_abs_diff(&p).unwrap() < 1e-13);
            assert!(mp.max_abs_diff(&mp.adjoint()).unwrap() < 1e-13);
            assert!(pm.max_abs_diff(&pm.adjoint()).unwrap() < 1e-13);
            assert_eq!(rank_of(&m, 1e-10), inner);
        }
    }

    #[test]
    fn wide_pinv_is_adjoint_of_tall_pinv() {
        let mut r = rng(22);
        let m = random_matrix(&mut r, 3, 8);
        let direct = pseudo_inverse(&m, 1e-12);
        let via = pseudo_inverse(&m.adjoint(), 1e-12).adjoint();
        assert!(direct.max_abs_diff(&via).unwrap() < 1e-14);
    }

    #[test]
    fn rank_of_identity_and_outer_product() {
        assert_eq!(rank_of(&M::identity(5), 1e-10), 5);
        let mut r = rng(3);
        let u = random_matrix(&mut r, 6, 1);
        let v = random_matrix(&mut r, 1, 4);
        assert_eq!(rank_of(&u.matmul(&v).unwrap(), 1e-10), 1);
    }

    #[test]
    fn left_inverse_trivial_and_random() {
        let id = M::identity(3);
        assert!(left_inverse_family(&id, None).unwrap().max_abs_diff(&id).unwrap() < 1e-15);
        let mut r = rng(9);
        let m = random_matrix(&mut r, 6, 3);
        let zero = M::zeros(3, 6);
        let with_zero = left_inverse_family(&m, Some(&zero)).unwrap();
        assert!(with_zero.max_abs_diff(&pseudo_inverse(&m, 1e-12)).unwrap() < 1e-12);
        let u = random_matrix(&mut r, 3, 6);
        let h = left_inverse_family(&m, Some(&u)).unwrap();
        assert!(h.matmul(&m).unwrap().max_abs_diff(&id).unwrap() < 1e-10);
    }

    #[test]
    fn left_inverse_errors() {
        let mut r = rng(1);
        let u = random_matrix(&mut r, 5, 1);
        let v = random_matrix(&mut r, 1, 3);
        let deficient = u.matmul(&v).unwrap();
        assert!(matches!(left_inverse_family(&deficient, None), Err(Error::RankDeficient { rank: 1, required: 3 })));
        let m = random_matrix(&mut r, 5, 3);
        let wrong = M::zeros(5, 3);
        assert!(matches!(left_inverse_family(&m, Some(&wrong)), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn single_precision_pinv() {
        let m = ComplexMatrix::<f32>::from_rows(&[
            vec![Complex::new(2.0, 0.0), Complex::new(0.0, 1.0)],
            vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
            vec![Complex::new(1.0, -1.0), Complex::new(0.5, 0.0)],
        ])
        .unwrap();
        let h = pseudo_inverse(&m, 1e-6);
        let prod = h.matmul(&m).unwrap();
        assert!(prod.max_abs_diff(&ComplexMatrix::identity(2)).unwrap() < 1e-5);
    }
}
