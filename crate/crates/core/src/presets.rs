//! Ready-made cocycles used throughout the documentation, tests and demos.

use crate::cocycle::CocycleSpec;
use crate::matkernel::Matrix;
use crate::subshift::TransitionMatrix;

/// The diagonal pair `A_0 = diag(σ, 1/σ)`, `A_1 = diag(1/σ, σ)` on the full
/// 2-shift, with `ω = 1/2` and `r = 1`.
pub fn butler(sigma: f64) -> CocycleSpec {
    CocycleSpec::full_shift(vec![
        Matrix::diag(&[sigma, 1.0 / sigma]),
        Matrix::diag(&[1.0 / sigma, sigma]),
    ])
    .expect("valid for sigma > 0")
}

/// Identity generators of dimension `k` over `shift`.
pub fn identity(shift: TransitionMatrix, k: usize) -> CocycleSpec {
    let q = shift.alphabet_size();
    CocycleSpec::new(shift, vec![Matrix::identity(k); q], 0.5, 1.0).expect("valid")
}

/// `c·Id` on every symbol.
pub fn scalar(shift: TransitionMatrix, k: usize, c: f64) -> CocycleSpec {
    let q = shift.alphabet_size();
    CocycleSpec::new(shift, vec![Matrix::identity(k).scale(c); q], 0.5, 1.0).expect("valid")
}

/// `A_0 = diag(2, 1/2)` and `A_1` the rotation by `theta`, full 2-shift.
pub fn diag_rotation(theta: f64) -> CocycleSpec {
    CocycleSpec::full_shift(vec![Matrix::diag(&[2.0, 0.5]), Matrix::rotation(theta)]).expect("valid")
}

/// The positive pair `[[2,1],[1,1]]`, `[[1,1],[1,2]]` on the full 2-shift.
pub fn positive_pair() -> CocycleSpec {
    CocycleSpec::full_shift(vec![
        Matrix::from_row_slice(2, &[2.0, 1.0, 1.0, 1.0]),
        Matrix::from_row_slice(2, &[1.0, 1.0, 1.0, 2.0]),
    ])
    .expect("valid")
}

/// A one-symbol cocycle: the powers of a single matrix.
pub fn single(m: Matrix) -> CocycleSpec {
    CocycleSpec::full_shift(vec![m]).expect("valid")
}

#[cfg(test)]
pub(crate) fn random_full_shift(q: usize, k: usize, seed: u64) -> CocycleSpec {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let gens = (0..q)
        .map(|_| {
            let data: Vec<f64> = (0..k * k).map(|_| rng.random_range(-1.0..1.0)).collect();
            &Matrix::from_row_slice(k, &data) + &Matrix::identity(k).scale(1.5)
        })
        .collect();
    CocycleSpec::full_shift(gens).expect("diagonally dominated, invertible")
}
