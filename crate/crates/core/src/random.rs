//! Seeded random matrices shared by the instance generators, the examples and
//! the test suites.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::CMat;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Ginibre matrix: independent standard normal real and imaginary parts.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_real_matrix<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fix-up.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let qr = random_matrix(rng, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian PSD matrix of the given rank, normalized to unit trace.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize) -> CMat {
    let g = CMat::from_fn(n, rank.max(1), |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let p = &g * g.adjoint();
    let t = p.trace().re;
    let p = p.unscale(t);
    (&p + p.adjoint()).scale(0.5)
}

/// Full-rank PSD matrix with eigenvalues drawn uniformly from `[lo, hi]` in a
/// Haar-random eigenbasis.
pub fn random_pd_with_spectrum<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> CMat {
    let u = random_unitary(rng, n);
    let d = nalgebra::DVector::from_fn(n, |_, _| Complex64::new(rng.random_range(lo..=hi), 0.0));
    let p = &u * CMat::from_diagonal(&d) * u.adjoint();
    (&p + p.adjoint()).scale(0.5)
}

/// Random real matrix with singular values bounded away from zero: a product
/// of two random orthogonal-ish factors around a diagonal in `[0.5, 2]`.
pub fn random_invertible_real<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    loop {
        let m = random_real_matrix(rng, n);
        let svd = m.clone().svd(false, false);
        let s = &svd.singular_values;
        let (max, min) = (s.max(), s.min());
        if min > 0.0 && max / min < 50.0 {
            return m;
        }
    }
}
