use nalgebra::DMatrix;
use num_complex::Complex64;

use super::SensingMatrix;
use crate::error::{Error, Result};
use crate::fft;

/// Eigenvalues `G_0..G_{n-1}` of a circulant matrix: the DFT of its first column.
#[derive(Debug, Clone)]
pub struct DiagonalSpectrum {
    pub coefficients: Vec<Complex64>,
    pub n: usize,
}

pub fn dft_diagonalize(generator: &[f64]) -> Result<DiagonalSpectrum> {
    if generator.is_empty() {
        return Err(Error::Dimension("empty circulant generator".into()));
    }
    Ok(DiagonalSpectrum {
        coefficients: fft::forward_real(generator, generator.len()),
        n: generator.len(),
    })
}

impl DiagonalSpectrum {
    /// Dense `F^{-1} diag(G) F` built from explicit DFT matrices (`O(n^3)`).
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.n;
        let omega = |e: usize| Complex64::from_polar(1.0, -std::f64::consts::TAU * (e % n) as f64 / n as f64);
        let f = DMatrix::from_fn(n, n, |k, t| omega(k * t));
        let f_inv = DMatrix::from_fn(n, n, |t, k| omega(k * t).conj() / n as f64);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.coefficients.clone()));
        f_inv * d * f
    }

    /// Largest deviation from conjugate symmetry `G_{n-k} = conj(G_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        (1..self.n)
            .map(|k| (self.coefficients[self.n - k] - self.coefficients[k].conj()).norm())
            .fold(self.coefficients[0].im.abs(), f64::max)
    }
}

fn require_full_circulant(phi: &SensingMatrix, z: &[f64]) -> Result<DiagonalSpectrum> {
    if !phi.is_fully_circulant() {
        return Err(Error::Parameter(
            "frequency-scaling check needs a fully circulant matrix".into(),
        ));
    }
    if z.len() != phi.n() {
        return Err(Error::Dimension(format!(
            "signal length {} does not match n = {}",
            z.len(),
            phi.n()
        )));
    }
    let mut spec = dft_diagonalize(phi.generator())?;
    spec.coefficients.iter_mut().for_each(|g| *g *= phi.scale());
    Ok(spec)
}

/// `max_k |Y'(f_k) - G_k Z(f_k)|` for `k < m`, where `Y'` is the `m`-point
/// DFT of the compressed vector `phi z` and `Z` is the `n`-point DFT of `z`,
/// compared bin-for-bin on the first `m` bins of the `n`-point grid.
///
/// Truncating to `m` rows and re-transforming on the `m`-point grid does not
/// reproduce the `n`-point products in general; the returned value measures
/// by how much. [`circular_spectrum_check`] tests the untruncated identity.
pub fn scaled_spectrum_check(phi: &SensingMatrix, z: &[f64]) -> Result<f64> {
    let spec = require_full_circulant(phi, z)?;
    let y = phi.apply(z)?;
    let y_spec = fft::forward_real(&y, phi.m());
    let z_spec = fft::forward_real(z, phi.n());
    Ok((0..phi.m())
        .map(|k| (y_spec[k] - spec.coefficients[k] * z_spec[k]).norm())
        .fold(0.0, f64::max))
}

/// `max_k |Y(f_k) - G_k Z(f_k)|` over all `n` bins, with `Y` the DFT of the
/// full circulant product `C z` before row selection.
pub fn circular_spectrum_check(phi: &SensingMatrix, z: &[f64]) -> Result<f64> {
    let spec = require_full_circulant(phi, z)?;
    let full = SensingMatrix::circulant_from_generator(phi.generator().to_vec(), phi.n())?
        .with_scale(phi.scale());
    let y = full.apply(z)?;
    let y_spec = fft::forward_real(&y, phi.n());
    let z_spec = fft::forward_real(z, phi.n());
    Ok(y_spec
        .iter()
        .zip(&z_spec)
        .zip(&spec.coefficients)
        .map(|((y, z), g)| (y - g * z).norm())
        .fold(0.0, f64::max))
}
