//! Spontaneous Raman scattering spectra and the power-scaling decomposition
//! separating Raman (linear in pump power) from cascaded-SPDC (quadratic)
//! contributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One Raman-active vibrational line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanLine {
    /// Vibrational shift, cm⁻¹.
    pub shift_per_cm: f64,
    /// Relative peak amplitude (dimensionless; the absolute scale is
    /// spectrometer-dependent and left to calibration).
    pub amplitude: f64,
    /// FWHM linewidth, cm⁻¹.
    pub linewidth_per_cm: f64,
    /// Vibrational-mode label.
    pub label: String,
}

impl RamanLine {
    pub fn validate(&self) -> Result<()> {
        if self.shift_per_cm == 0.0 {
            return Err(Error::invalid("Raman shift must be nonzero"));
        }
        if !(self.amplitude > 0.0) {
            return Err(Error::invalid("Raman amplitude must be positive"));
        }
        if !(self.linewidth_per_cm > 0.0) {
            return Err(Error::invalid("Raman linewidth must be positive"));
        }
        Ok(())
    }
}

/// Least-squares fit of detected counts to a·P² + b·P (no constant term):
/// the quadratic term is the cascaded-SPDC contribution, the linear term
/// the Raman contribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerScalingFit {
    /// Quadratic coefficient, counts/mW².
    pub quadratic: f64,
    /// Linear coefficient, counts/mW.
    pub linear: f64,
    /// Euclidean norm of the fit residuals.
    pub residual_norm: f64,
    /// Wavelength the dataset was recorded at, when known.
    pub wavelength_nm: Option<f64>,
}

/// Stokes and anti-Stokes wavelengths of `lines` for a pump at `pump_nm`:
/// 1/λ_S = 1/λ_p − shift, 1/λ_AS = 1/λ_p + shift (shifts in cm⁻¹, consistent
/// cm⁻¹ ↔ nm conversion).
pub fn raman_shifted_wavelengths(pump_nm: f64, lines: &[RamanLine]) -> Vec<(f64, f64)> {
    let nu_pump = 1e7 / pump_nm; // cm⁻¹
    lines
        .iter()
        .map(|line| {
            let stokes = 1e7 / (nu_pump - line.shift_per_cm);
            let anti_stokes = 1e7 / (nu_pump + line.shift_per_cm);
            (stokes, anti_stokes)
        })
        .collect()
}

/// Spontaneous Raman spectrum on `lambda_grid_nm`: a sum of Lorentzians (in
/// wavenumber) at the Stokes and anti-Stokes positions of every line, with
/// equal Stokes/anti-Stokes amplitudes, scaled linearly by the pump power.
/// The residual pump line itself is not modeled.
pub fn raman_spectrum(
    pump_nm: f64,
    pump_power_mw: f64,
    lines: &[RamanLine],
    lambda_grid_nm: &[f64],
) -> Vec<(f64, f64)> {
    lambda_grid_nm
        .iter()
        .map(|&lam| (lam, raman_amplitude(pump_nm, pump_power_mw, lines, lam)))
        .collect()
}

/// Spectrum value at a single wavelength; see [`raman_spectrum`].
pub fn raman_amplitude(pump_nm: f64, pump_power_mw: f64, lines: &[RamanLine], lambda_nm: f64) -> f64 {
    let nu_pump = 1e7 / pump_nm;
    let nu = 1e7 / lambda_nm;
    let mut total = 0.0;
    for line in lines {
        let half_width = line.linewidth_per_cm / 2.0;
        for center in [nu_pump - line.shift_per_cm, nu_pump + line.shift_per_cm] {
            let d = nu - center;
            total += line.amplitude * half_width * half_width / (d * d + half_width * half_width);
        }
    }
    total * pump_power_mw
}

/// Least-squares fit of (power mW, counts) data to a·P² + b·P via the 2×2
/// normal equations.
pub fn fit_power_scaling(data: &[(f64, f64)]) -> Result<PowerScalingFit> {
    let distinct = {
        let mut powers: Vec<f64> = data.iter().map(|d| d.0).collect();
        powers.sort_by(|a, b| a.total_cmp(b));
        powers.dedup();
        powers.len()
    };
    if distinct < 3 {
        return Err(Error::RankDeficientFit);
    }
    if data.iter().any(|&(p, c)| !(p >= 0.0) || !(c >= 0.0)) {
        return Err(Error::invalid("powers and counts must be non-negative"));
    }

    let (mut s2, mut s3, mut s4, mut sy1, mut sy2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(p, y) in data {
        let p2 = p * p;
        s2 += p2;
        s3 += p2 * p;
        s4 += p2 * p2;
        sy1 += p * y;
        sy2 += p2 * y;
    }
    let det = s4 * s2 - s3 * s3;
    if det.abs() <= f64::EPSILON * s4 * s2 {
        return Err(Error::RankDeficientFit);
    }
    let a = (sy2 * s2 - s3 * sy1) / det;
    let b = (s4 * sy1 - s3 * sy2) / det;
    let residual_norm = data
        .iter()
        .map(|&(p, y)| {
            let r = y - (a * p * p + b * p);
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(PowerScalingFit { quadratic: a, linear: b, residual_norm, wavelength_nm: None })
}

/// Pump power where the quadratic and linear contributions are equal,
/// P* = b/a: the transition between the Raman-dominated and SPDC-dominated
/// regimes.
pub fn crossover_power_mw(fit: &PowerScalingFit) -> Result<f64> {
    if !(fit.quadratic > 0.0) || !(fit.linear > 0.0) {
        return Err(Error::invalid("crossover needs positive quadratic and linear coefficients"));
    }
    Ok(fit.linear / fit.quadratic)
}
