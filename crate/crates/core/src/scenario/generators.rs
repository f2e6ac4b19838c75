//! Seeded generator models for both factor kinds.

use num_complex::Complex;

use crate::linalg::ComplexMatrix;
use crate::periodic::FiniteUnitaryModel;
use crate::random::{random_complex, random_unitary, random_vector, SeededRng};
use crate::sequence::Sequence;
use rand::Rng;

/// Cross-covariances whose symbol matrix has constant `G*G`.
///
/// `g_j(z) = Σ_{k<r} q_{jk} z^{k + r e_k}` with orthogonal columns of `Q`
/// and integer offsets `e_k` shared by every `j`: then `G(x) = Q D(x) F`
/// with `D` diagonal unimodular and `F` the `r`-point Fourier matrix, so
/// `G*G = F* diag(|q_k|²) F` does not depend on `x` and the dual symbols
/// are trig polynomials.
pub fn exact_case_crosscov(rng: &mut SeededRng, r: usize, s: usize) -> Vec<Sequence<f64>> {
    assert!(s >= r && r >= 1, "exact case needs s >= r >= 1");
    let q = random_unitary(rng, s);
    let scales: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..2.0)).collect();
    let offsets: Vec<i64> = (0..r).map(|_| rng.random_range(-2..=2)).collect();
    (0..s)
        .map(|j| {
            let pairs = (0..r).map(|k| (k as i64 + r as i64 * offsets[k], q.get(j, k) * scales[k]));
            crate::continuous::FourierSymbol::new(Sequence::from_pairs(pairs)).crosscov()
        })
        .collect()
}

/// `s` cross-covariances with random coefficients on `-degree..=degree`.
pub fn random_trig_crosscov(rng: &mut SeededRng, s: usize, degree: usize) -> Vec<Sequence<f64>> {
    (0..s).map(|_| Sequence::new(-(degree as i64), random_vector(rng, 2 * degree + 1))).collect()
}

/// Random unitary `W` on `ℂ^dim` with generator `b` of period exactly `n`.
///
/// `W = Q diag(λ) Q*` where the first `n` eigenvalues are the `n`-th roots
/// of unity and the rest are generic; `b` lives on the root-of-unity
/// eigenvectors with nonzero weights, so `b, …, W^{n-1} b` are independent.
pub fn random_unitary_model(rng: &mut SeededRng, dim: usize, n: usize) -> (FiniteUnitaryModel<f64>, Vec<Complex<f64>>) {
    assert!(n >= 1 && dim >= n, "need dim >= n >= 1");
    let q = random_unitary(rng, dim);
    let phases: Vec<Complex<f64>> = (0..dim)
        .map(|k| {
            let turns = if k < n { k as f64 / n as f64 } else { rng.random_range(0.0..1.0) };
            Complex::from_polar(1.0, std::f64::consts::TAU * turns)
        })
        .collect();
    let w =
        ComplexMatrix::from_fn(dim, dim, |i, j| (0..dim).map(|k| q.get(i, k) * phases[k] * q.get(j, k).conj()).sum());
    let weights: Vec<Complex<f64>> = (0..dim)
        .map(|k| {
            if k < n {
                let z = random_complex(rng);
                z / z.norm() * rng.random_range(0.5..1.5)
            } else {
                Complex::new(0.0, 0.0)
            }
        })
        .collect();
    let b = q.apply(&weights).expect("square");
    (FiniteUnitaryModel::explicit(w).expect("unitary by construction"), b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuous::ContinuousScheme;
    use crate::periodic::PeriodicScheme;
    use crate::random::rng;

    #[test]
    fn exact_case_has_constant_gram() {
        let mut g = rng(1);
        for (r, s) in [(1, 1), (2, 2), (2, 3), (3, 4)] {
            let scheme = ContinuousScheme::from_crosscov(r, &exact_case_crosscov(&mut g, r, s), 60).unwrap();
            let first = scheme.evaluate_g(0.0);
            let gram0 = first.adjoint().matmul(&first).unwrap();
            for x in [0.1, 0.37, 0.8] {
                let m = scheme.evaluate_g(x);
                let gram = m.adjoint().matmul(&m).unwrap();
                assert!(gram.max_abs_diff(&gram0).unwrap() < 1e-12);
            }
            assert!(scheme.frame_constants().alpha > 0.1);
        }
    }

    #[test]
    fn random_unitary_model_has_period_n() {
        let mut g = rng(2);
        let (model, b) = random_unitary_model(&mut g, 7, 5);
        assert_eq!(model.dim(), 7);
        let back = model.power_apply(&b, 5);
        assert!(back.iter().zip(&b).all(|(x, y)| (x - y).norm() < 1e-12));
        assert!(PeriodicScheme::new(model, b.clone(), 5, 5, vec![b]).is_ok());
    }
}
