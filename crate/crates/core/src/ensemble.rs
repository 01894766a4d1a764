//! Seeded generators for test pairs `(H₀, V)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::operator::{CMatrix, HermitianOperator};

/// A perturbation problem `H₀ → H₀ + V`.
#[derive(Debug, Clone)]
pub struct Pair {
    pub h0: HermitianOperator,
    pub v: HermitianOperator,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hermitian matrix with entries uniform in the unit square, symmetrized.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize) -> HermitianOperator {
    let a = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = (&a + a.adjoint()).scale(0.5);
    HermitianOperator::new(h).expect("symmetrized matrix is Hermitian")
}

/// Random Hermitian `V` rescaled so that `‖V‖₂ = norm`.
pub fn random_perturbation<R: Rng>(rng: &mut R, dim: usize, norm: f64) -> HermitianOperator {
    let v = random_hermitian(rng, dim);
    let n = v.spectral_norm();
    if n == 0.0 {
        return v;
    }
    v.scale(norm / n)
}

pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    a.qr().q()
}

/// `count` pairs with dimensions drawn from `dims`, `H₀` from
/// [`random_hermitian`] and `‖V‖₂` uniform in `[0.3, 1]`.
pub fn random_pairs(seed: u64, count: usize, dims: std::ops::RangeInclusive<usize>) -> Vec<Pair> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let dim = rng.gen_range(dims.clone());
            let h0 = random_hermitian(&mut rng, dim);
            let norm = rng.gen_range(0.3..=1.0);
            let v = random_perturbation(&mut rng, dim, norm);
            Pair { h0, v }
        })
        .collect()
}

/// `H₀ = U diag(λ) U*` with `λ` containing `±scale` and the remaining
/// eigenvalues at log-uniform magnitudes in `[0.1, scale]` with random signs.
/// `‖V‖₂` is uniform in `[0.3, 1]`.
pub fn wide_spectrum_pair<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Pair {
    let dim = dim.max(2);
    let mut lambda = vec![-scale, scale];
    let (lo, hi) = (0.1f64.ln(), scale.max(0.2).ln());
    while lambda.len() < dim {
        let mag = rng.gen_range(lo..hi).exp();
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        lambda.push(sign * mag);
    }
    let u = random_unitary(rng, dim);
    let d = CMatrix::from_fn(dim, dim, |i, j| if i == j { Complex64::new(lambda[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    let m = &u * d * u.adjoint();
    let m = (&m + m.adjoint()).scale(0.5);
    let h0 = HermitianOperator::new(m).expect("conjugated diagonal is Hermitian");
    let norm = rng.gen_range(0.3..=1.0);
    let v = random_perturbation(rng, dim, norm);
    Pair { h0, v }
}

pub fn wide_spectrum_pairs(seed: u64, count: usize, dims: std::ops::RangeInclusive<usize>, scale: f64) -> Vec<Pair> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let dim = rng.gen_range(dims.clone());
            wide_spectrum_pair(&mut rng, dim, scale)
        })
        .collect()
}
