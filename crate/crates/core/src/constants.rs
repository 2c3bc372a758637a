//! Physical constants and shared model parameters.

/// Speed of light in vacuum, nm/s. Wavelengths are vacuum wavelengths in nm
/// throughout the crate, so frequencies derived from this constant are Hz.
pub const SPEED_OF_LIGHT_NM_S: f64 = 2.997_924_58e17;

/// Positive argument where sinc²(x) = 1/2, used for half-power bandwidths.
pub const HALF_POWER_SINC_ARG: f64 = 1.391_557_378_251_511_5;

/// Penalty for splitting one pump of power P into two lines of P/2 each:
/// the single-pump SHG then sits 10·log10(4) dB below the dual-pump SFG
/// peak at equal per-line powers.
pub const PUMP_SPLITTING_PENALTY_DB: f64 = 6.020_599_913_279_624;

/// Saturating cap for suppression values that would otherwise diverge
/// (a pump sitting exactly on a sinc null). Measured floors are tens of dB,
/// so unbounded values carry no information.
pub const DEFAULT_SUPPRESSION_CAP_DB: f64 = 200.0;

/// Saturating sentinel returned by the analytic CAR model when the
/// accidental rate is exactly zero.
pub const CAR_SENTINEL: f64 = 1e12;

/// Measured efficiency advantage of the classical cascaded χ⁽²⁾ process
/// (cSHG/DFG, detuned 20 nm from phase matching) over stimulated four-wave
/// mixing in comparable waveguides, in dB. Documented reference value only;
/// the toolkit does not model χ⁽³⁾ processes.
pub const CSHG_DFG_OVER_FWM_DB: f64 = 60.0;

/// Convert an optical vacuum wavelength in nm to angular frequency in rad/s.
pub fn angular_frequency_rad_s(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_NM_S / wavelength_nm
}

/// Convert an angular frequency in rad/s to a vacuum wavelength in nm.
pub fn wavelength_nm(angular_frequency_rad_s: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_NM_S / angular_frequency_rad_s
}

/// Convert a power ratio to decibels.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Convert decibels to a power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
