//! Spectral functions of Hermitian positive semidefinite operators.

use nalgebra::{DVector, SymmetricEigen};
use super::operator::LabeledOperator;
use super::raw::{self, CMat};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Eigendecomposition of a PSD matrix with tiny negative eigenvalues clamped.
#[derive(Debug, Clone)]
pub struct PsdSpectrum {
    pub values: DVector<f64>,
    pub vectors: CMat,
}

impl PsdSpectrum {
    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let w = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        let out = scaled * self.vectors.adjoint();
        hermitize(&out)
    }

    /// Eigenvalue cutoff separating the support from the kernel.
    pub fn support_cutoff(&self, tol: &Tolerances) -> f64 {
        self.values.len() as f64 * tol.rank * self.max()
    }
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Relative Frobenius distance between `m` and its conjugate transpose.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    let norm = raw::frobenius(m);
    if norm == 0.0 {
        return 0.0;
    }
    raw::frobenius(&(m - m.adjoint())) / norm
}

/// Eigendecomposition of a Hermitian matrix, Hermitized first.
pub fn hermitian_eigen(m: &CMat, tol: &Tolerances) -> Result<(DVector<f64>, CMat)> {
    let res = hermiticity_residual(m);
    if res > tol.identity {
        return Err(Error::NotHermitian(res));
    }
    let eig = SymmetricEigen::new(hermitize(m));
    Ok((eig.eigenvalues, eig.eigenvectors))
}

/// Validates positive semidefiniteness and clamps eigenvalues in
/// `[-psd·λ_max, 0)` to zero.
pub fn psd_spectrum(m: &CMat, tol: &Tolerances) -> Result<PsdSpectrum> {
    let (values, vectors) = hermitian_eigen(m, tol)?;
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = max.abs().max(min.abs());
    if min < -tol.psd * scale.max(max) || (max <= 0.0 && min < 0.0) {
        return Err(Error::NotPsd { min, max });
    }
    let values = values.map(|x| x.max(0.0));
    Ok(PsdSpectrum { values, vectors })
}

/// Checks that an operator is Hermitian PSD within tolerance.
pub fn check_psd(op: &LabeledOperator, tol: &Tolerances) -> Result<()> {
    psd_spectrum(op.matrix(), tol).map(|_| ())
}

/// Smallest eigenvalue divided by the largest absolute eigenvalue.
pub fn min_eigenvalue_ratio(m: &CMat) -> f64 {
    let eig = SymmetricEigen::new(hermitize(m));
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let min = eig.eigenvalues.min();
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// `P^{1/n}` for PSD `P`.
pub fn frac_power(p: &LabeledOperator, n: u32) -> Result<LabeledOperator> {
    frac_power_with(p, n, &Tolerances::default())
}

pub fn frac_power_with(p: &LabeledOperator, n: u32, tol: &Tolerances) -> Result<LabeledOperator> {
    if n == 0 {
        return Err(Error::Dimension("root order must be positive".into()));
    }
    let spec = psd_spectrum(p.matrix(), tol)?;
    let e = 1.0 / n as f64;
    p.with_matrix(spec.map(|x| if x > 0.0 { x.powf(e) } else { 0.0 }))
}

/// Real power of a PSD matrix; zero eigenvalues stay zero.
pub fn psd_power(m: &CMat, exponent: f64, tol: &Tolerances) -> Result<CMat> {
    let spec = psd_spectrum(m, tol)?;
    Ok(spec.map(|x| if x > 0.0 { x.powf(exponent) } else { 0.0 }))
}

/// Orthogonal projector onto the span of eigenvectors whose eigenvalue
/// exceeds the rank cutoff.
pub fn support_projector(p: &LabeledOperator) -> Result<LabeledOperator> {
    support_projector_with(p, &Tolerances::default())
}

pub fn support_projector_with(p: &LabeledOperator, tol: &Tolerances) -> Result<LabeledOperator> {
    p.with_matrix(support_projector_matrix(p.matrix(), tol)?)
}

pub fn support_projector_matrix(m: &CMat, tol: &Tolerances) -> Result<CMat> {
    let spec = psd_spectrum(m, tol)?;
    let cut = spec.support_cutoff(tol);
    Ok(spec.map(|x| if x > cut && x > 0.0 { 1.0 } else { 0.0 }))
}

/// Exponential of a Hermitian matrix.
pub fn hermitian_exp(m: &CMat) -> CMat {
    let eig = SymmetricEigen::new(hermitize(m));
    PsdSpectrum {
        values: eig.eigenvalues,
        vectors: eig.eigenvectors,
    }
    .map(f64::exp)
}

/// Logarithm of a positive definite matrix.
pub fn pd_log(m: &CMat, tol: &Tolerances) -> Result<CMat> {
    let spec = psd_spectrum(m, tol)?;
    if let Some(&bad) = spec.values.iter().find(|&&x| x <= 0.0) {
        return Err(Error::NotPsd {
            min: bad,
            max: spec.max(),
        });
    }
    Ok(spec.map(f64::ln))
}

/// `‖AB − BA‖_F / max(1, ‖A‖_F ‖B‖_F)` after extending both to their label union.
pub fn commutation_residual(a: &LabeledOperator, b: &LabeledOperator) -> Result<f64> {
    let (a, b) = a.aligned(b)?;
    Ok(matrix_commutation_residual(a.matrix(), b.matrix()))
}

pub fn matrix_commutation_residual(a: &CMat, b: &CMat) -> f64 {
    let comm = a * b - b * a;
    raw::frobenius(&comm) / (raw::frobenius(a) * raw::frobenius(b)).max(1.0)
}

/// Integer power by repeated squaring.
pub fn matrix_power(m: &CMat, mut n: u32) -> CMat {
    let mut result = CMat::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}
