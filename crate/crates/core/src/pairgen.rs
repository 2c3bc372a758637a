//! Quantum figures of merit of the cascaded pair source: joint spectral
//! amplitude, pair-generation rates, brightness, single-pump parasitic
//! rates, and the analytic coincidence-to-accidental model.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{from_db, to_db, wavelength_nm, CAR_SENTINEL};
use crate::dispersion::{delta_k_sfg, DispersionModel, ProcessModes, WaveguideSpec};
use crate::error::{Error, Result};
use crate::phasematch::sinc;

/// Spectral envelope of the SPDC pump (the sum-frequency wave).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PumpEnvelope {
    /// Continuous-wave pump: energy conservation confines the amplitude to
    /// the anti-diagonal ω₁ + ω₂ = ω_SF within one grid cell.
    Cw { sum_wavelength_nm: f64 },
    /// Pulsed pump with a Gaussian spectral ridge of the given standard
    /// deviation around ω₁ + ω₂ = ω_SF.
    GaussianPulse { sum_wavelength_nm: f64, sigma_rad_s: f64 },
}

impl PumpEnvelope {
    pub fn sum_wavelength_nm(&self) -> f64 {
        match *self {
            PumpEnvelope::Cw { sum_wavelength_nm } => sum_wavelength_nm,
            PumpEnvelope::GaussianPulse { sum_wavelength_nm, .. } => sum_wavelength_nm,
        }
    }
}

/// Uniform angular-frequency grid, ascending, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start_rad_s: f64,
    pub stop_rad_s: f64,
    pub n: usize,
}

impl UniformGrid {
    /// Build from a vacuum-wavelength interval (nm); the grid is uniform in
    /// angular frequency.
    pub fn from_wavelength_range_nm(lo_nm: f64, hi_nm: f64, n: usize) -> Self {
        let a = crate::constants::angular_frequency_rad_s(hi_nm);
        let b = crate::constants::angular_frequency_rad_s(lo_nm);
        Self { start_rad_s: a.min(b), stop_rad_s: a.max(b), n }
    }

    pub fn step(&self) -> f64 {
        (self.stop_rad_s - self.start_rad_s) / (self.n - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.n).map(|i| self.start_rad_s + i as f64 * step).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("grid needs at least 2 points per axis"));
        }
        if !(self.stop_rad_s > self.start_rad_s) || !(self.start_rad_s > 0.0) {
            return Err(Error::invalid("grid must be ascending and positive"));
        }
        Ok(())
    }
}

/// Normalized joint spectral amplitude f(ω₁, ω₂) on a uniform grid,
/// row-major over (ω₁, ω₂).
#[derive(Debug, Clone, PartialEq)]
pub struct JsaGrid {
    pub omega1_rad_s: Vec<f64>,
    pub omega2_rad_s: Vec<f64>,
    pub amplitude: Vec<Complex64>,
    pub envelope: PumpEnvelope,
}

impl JsaGrid {
    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.amplitude[i * self.omega2_rad_s.len() + j]
    }

    /// ∬|f|² dω₁ dω₂ by Riemann sum (1 after normalization).
    pub fn norm(&self) -> f64 {
        let d1 = self.omega1_rad_s[1] - self.omega1_rad_s[0];
        let d2 = self.omega2_rad_s[1] - self.omega2_rad_s[0];
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * d1 * d2
    }
}

/// Joint spectral amplitude f = α·φ of the biphoton state, normalized so
/// ∬|f|² dω₁ dω₂ = 1.
///
/// φ(ω₁, ω₂) = sinc(Δk·L/2)·e^(iΔk·L/2) carries the dispersion of the
/// down-conversion (the SFG mismatch read with the sum-frequency wave as the
/// pump); α is the pump envelope enforcing energy conservation.
pub fn jsa(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    modes: &ProcessModes,
    envelope: PumpEnvelope,
    grid1: &UniformGrid,
    grid2: &UniformGrid,
) -> Result<JsaGrid> {
    grid1.validate()?;
    grid2.validate()?;
    let omega1 = grid1.points();
    let omega2 = grid2.points();
    let omega_sf = crate::constants::angular_frequency_rad_s(envelope.sum_wavelength_nm());
    let half_l_um = spec.length_um() / 2.0;
    // "Within one grid cell" of the anti-diagonal, measured along the sum
    // axis; shrink slightly so cells exactly one step off stay excluded.
    let cw_halfwidth = 0.5 * (grid1.step() + grid2.step()) * (1.0 - 1e-9);

    let rows: Vec<Vec<Complex64>> = omega1
        .par_iter()
        .map(|&w1| -> Result<Vec<Complex64>> {
            let l1 = wavelength_nm(w1);
            let mut row = Vec::with_capacity(omega2.len());
            for &w2 in &omega2 {
                let detune = w1 + w2 - omega_sf;
                let alpha = match envelope {
                    PumpEnvelope::Cw { .. } => {
                        if detune.abs() < cw_halfwidth {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    PumpEnvelope::GaussianPulse { sigma_rad_s, .. } => {
                        (-detune * detune / (2.0 * sigma_rad_s * sigma_rad_s)).exp()
                    }
                };
                if alpha == 0.0 {
                    row.push(Complex64::new(0.0, 0.0));
                    continue;
                }
                let l2 = wavelength_nm(w2);
                let dk = delta_k_sfg(model, spec, modes.pump, modes.pump, modes.sum_freq, l1, l2)?;
                let x = dk * half_l_um;
                let phi = sinc(x) * Complex64::from_polar(1.0, x);
                row.push(alpha * phi);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut amplitude: Vec<Complex64> = rows.into_iter().flatten().collect();
    let d1 = grid1.step();
    let d2 = grid2.step();
    let total: f64 = amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * d1 * d2;
    if !(total > 0.0) {
        return Err(Error::invalid(
            "joint spectral amplitude vanishes on the grid; no cell meets the pump envelope",
        ));
    }
    let scale = total.sqrt().recip();
    for a in &mut amplitude {
        *a *= scale;
    }
    Ok(JsaGrid { omega1_rad_s: omega1, omega2_rad_s: omega2, amplitude, envelope })
}

/// Pair-generation rates of the dual-pump source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRates {
    /// Pairs generated on chip within the detection bandwidth, Hz.
    pub pgr_onchip_hz: f64,
    /// Pairs with both photons surviving the detection chain, Hz.
    pub pgr_detected_hz: f64,
    /// On-chip brightness B = PGR/(4·Δλ·P₁·P₂), Hz/nm/mW².
    pub brightness_hz_per_nm_mw2: f64,
    /// Detection bandwidth Δλ, nm.
    pub bandwidth_nm: f64,
    pub p1_mw: f64,
    pub p2_mw: f64,
}

/// Dual-pump pair rate from the brightness definition:
/// PGR = 4·B·Δλ·P₁·P₂, with `eta_pair` the product of the two per-photon
/// detection-chain efficiencies.
pub fn pgr_dual_pump(
    brightness_hz_per_nm_mw2: f64,
    p1_mw: f64,
    p2_mw: f64,
    bandwidth_nm: f64,
    eta_pair: f64,
) -> PairRates {
    let pgr_onchip_hz = 4.0 * brightness_hz_per_nm_mw2 * bandwidth_nm * p1_mw * p2_mw;
    PairRates {
        pgr_onchip_hz,
        pgr_detected_hz: pgr_onchip_hz * eta_pair,
        brightness_hz_per_nm_mw2,
        bandwidth_nm,
        p1_mw,
        p2_mw,
    }
}

/// Invert the brightness definition: B = PGR/(4·Δλ·P₁·P₂).
pub fn brightness_from_pgr(pgr_onchip_hz: f64, p1_mw: f64, p2_mw: f64, bandwidth_nm: f64) -> f64 {
    pgr_onchip_hz / (4.0 * bandwidth_nm * p1_mw * p2_mw)
}

/// Single-pump cascaded-SHG/SPDC rate into the degenerate detection band,
/// modeled as the equal-power dual-pump rate attenuated by the supplied
/// suppression (sinc² detuning plus any splitting penalty the caller
/// includes), Hz.
pub fn sp_parasitic_pgr(
    brightness_hz_per_nm_mw2: f64,
    pump_power_mw: f64,
    bandwidth_nm: f64,
    suppression_db: f64,
) -> f64 {
    pgr_dual_pump(brightness_hz_per_nm_mw2, pump_power_mw, pump_power_mw, bandwidth_nm, 1.0)
        .pgr_onchip_hz
        * from_db(-suppression_db)
}

/// Suppression of the single-pump rate relative to the dual-pump rate,
/// 10·log₁₀(PGR_DP / PGR_SP) dB.
pub fn suppression_db(pgr_dp_hz: f64, pgr_sp_hz: f64) -> Result<f64> {
    if !(pgr_dp_hz > 0.0) || !(pgr_sp_hz > 0.0) {
        return Err(Error::invalid("suppression needs two positive rates"));
    }
    Ok(to_db(pgr_dp_hz / pgr_sp_hz))
}

/// Analytic coincidence model of a degenerate pair source behind a splitter
/// and two noisy detectors. Mirrors the Monte Carlo detection chain exactly:
/// each photon survives the common chain with probability `transmission`,
/// routes to arm 0 with probability `splitter_ratio`, and is detected with
/// its arm's detector efficiency; Raman and dark counts are per-arm Poisson
/// processes at the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceModel {
    /// Pair rate inside the detection bandwidth, on chip, Hz.
    pub pair_rate_hz: f64,
    /// Per-photon transmission of facet plus filters (before the splitter).
    pub transmission: f64,
    /// Fraction routed to arm 0.
    pub splitter_ratio: f64,
    pub detector_efficiency: [f64; 2],
    /// Detected Raman rate per arm, Hz.
    pub raman_rate_hz: [f64; 2],
    pub dark_rate_hz: [f64; 2],
    /// Coincidence window τ_w, s.
    pub coincidence_window_s: f64,
}

impl CoincidenceModel {
    /// Singles rate per arm: two chances per pair to land a photon there,
    /// plus the noise processes.
    pub fn singles_hz(&self) -> [f64; 2] {
        let route = [self.splitter_ratio, 1.0 - self.splitter_ratio];
        [0, 1].map(|arm| {
            2.0 * self.pair_rate_hz
                * self.transmission
                * route[arm]
                * self.detector_efficiency[arm]
                + self.raman_rate_hz[arm]
                + self.dark_rate_hz[arm]
        })
    }

    /// Rate of pairs detected on opposite arms, Hz.
    pub fn true_coincidence_rate_hz(&self) -> f64 {
        2.0 * self.pair_rate_hz
            * self.transmission.powi(2)
            * self.splitter_ratio
            * (1.0 - self.splitter_ratio)
            * self.detector_efficiency[0]
            * self.detector_efficiency[1]
    }

    /// Accidental coincidence rate within the window, Hz.
    pub fn accidental_rate_hz(&self) -> f64 {
        let [s1, s2] = self.singles_hz();
        s1 * s2 * self.coincidence_window_s
    }

    /// CAR = 1 + R_true/(S₁·S₂·τ_w); the leading 1 is the accidental floor
    /// inside the peak window itself.
    pub fn car(&self) -> f64 {
        let accidental = self.accidental_rate_hz();
        if accidental <= 0.0 {
            return CAR_SENTINEL;
        }
        1.0 + self.true_coincidence_rate_hz() / accidental
    }
}

/// Analytic CAR for a symmetric chain described only by detected rates:
/// `pgr_detected_hz` is the rate of pairs that clear the chain (each such
/// pair contributes one photon per arm on average and a cross-arm
/// coincidence half the time), and the noise rates are per arm as seen at
/// the detectors.
pub fn car_model(
    pgr_detected_hz: f64,
    raman_rate_hz: f64,
    dark_rate_hz: f64,
    coincidence_window_s: f64,
) -> f64 {
    let singles = pgr_detected_hz + raman_rate_hz + dark_rate_hz;
    let accidental = singles * singles * coincidence_window_s;
    if accidental <= 0.0 {
        return CAR_SENTINEL;
    }
    1.0 + 0.5 * pgr_detected_hz / accidental
}
