//! Calibrated fixtures for the characterized 4.45 mm layer-poled X-cut TFLN
//! waveguide and its measurement chain.
//!
//! The effective-index curves are linear calibration fits, not mode-solver
//! output: they are chosen so that the second-harmonic process phase-matches
//! at 1534.0 nm with a ~340 GHz FWHM bandwidth, and so that pumps placed at
//! 1513.56 / 1555.05 nm see the measured ~34 dB of sinc² suppression. Any
//! curve with these properties reproduces the same phase-matching physics.

use std::collections::BTreeMap;

use crate::cwe::{PumpConfig, PumpLine};
use crate::dispersion::{
    DispersionModel, IndexCurve, ModeId, Poling, ProcessModes, WaveguideSpec,
};
use crate::mcsim::{DetectionChain, FilterStage};
use crate::raman::RamanLine;

/// Telecom-mode index slope, 1/nm.
const TE00_SLOPE: f64 = -1.0e-4;
/// Near-visible-mode index slope, 1/nm. The difference
/// `TE00_SLOPE − TE01_SLOPE/2 = 5.6923e-5` sets the SHG bandwidth and the
/// suppression seen at the reference pump detunings.
const TE01_SLOPE: f64 = -3.13846e-4;
/// Shared effective index at the degenerate pair (1534 nm ↔ 767 nm); equal
/// values phase-match the modal process exactly at 1534.0 nm.
const N_EFF_ANCHOR: f64 = 1.90;

/// Measured conversion efficiency η_SHG, %/W/cm².
pub const ETA_SHG_PERCENT_W_CM2: f64 = 250.0;
/// Waveguide length, cm.
pub const LENGTH_CM: f64 = 0.445;
/// On-chip brightness of the dual-pump source, Hz/nm/mW².
pub const BRIGHTNESS_HZ_PER_NM_MW2: f64 = 1.0e5;
/// Detected spontaneous-Raman rate per detector arm per nm of collection
/// bandwidth at the reference pump powers, Hz/nm. Calibrated so the analytic
/// CAR-versus-bandwidth curve reproduces the measured CAR ≈ 388/Δλ.
pub const RAMAN_RATE_PER_NM_HZ: f64 = 1.69e5;
/// Reference pump wavelengths, nm.
pub const PUMP1_NM: f64 = 1513.56;
pub const PUMP2_NM: f64 = 1555.05;
/// Reference on-chip pump powers, mW.
pub const PUMP1_MW: f64 = 0.9;
pub const PUMP2_MW: f64 = 1.7;

/// Mode assignment of the layer-poled modal process: pumps in the
/// fundamental telecom mode, sum frequency in the higher-order mode.
pub fn calibrated_modes() -> ProcessModes {
    ProcessModes { pump: ModeId::Te00, sum_freq: ModeId::Te01 }
}

/// Calibrated effective-index curves (linear in wavelength, which makes the
/// phase mismatch exactly linear in optical frequency).
pub fn calibrated_dispersion() -> DispersionModel {
    let mut model = DispersionModel::new();
    model
        .insert(
            ModeId::Te00,
            IndexCurve::new(vec![N_EFF_ANCHOR, TE00_SLOPE], 1534.0, (1400.0, 1700.0)).unwrap(),
        )
        .unwrap();
    model
        .insert(
            ModeId::Te01,
            IndexCurve::new(vec![N_EFF_ANCHOR, TE01_SLOPE], 767.0, (690.0, 860.0)).unwrap(),
        )
        .unwrap();
    model
}

/// A variant of the calibrated curves with a small quadratic term on the
/// telecom mode. Useful for exercising the curvature-driven difference
/// between dual-pump SFG and single-pump SHG detuning.
pub fn quadratic_dispersion() -> DispersionModel {
    let mut model = calibrated_dispersion();
    model
        .insert(
            ModeId::Te00,
            IndexCurve::new(
                vec![N_EFF_ANCHOR, TE00_SLOPE, 2.0e-8],
                1534.0,
                (1400.0, 1700.0),
            )
            .unwrap(),
        )
        .unwrap();
    model
}

/// Calibrated waveguide: 4.45 mm, η_SHG = 250 %/W/cm², layer-poled, 5 dB per
/// facet, low propagation loss.
pub fn calibrated_waveguide() -> WaveguideSpec {
    let mut spec =
        WaveguideSpec::from_eta_shg(LENGTH_CM, ETA_SHG_PERCENT_W_CM2, Poling::LayerPoledMpm)
            .unwrap();
    spec.facet_loss_db = 5.0;
    spec.loss_db_per_cm = BTreeMap::from([(ModeId::Te00, 0.3), (ModeId::Te01, 1.0)]);
    spec
}

/// Reference dual-pump configuration.
pub fn reference_pumps() -> PumpConfig {
    PumpConfig::Dual(
        PumpLine { wavelength_nm: PUMP1_NM, power_mw: PUMP1_MW },
        PumpLine { wavelength_nm: PUMP2_NM, power_mw: PUMP2_MW },
    )
}

/// Detection chain of the coincidence setup: 5 dB output facet, notch
/// waveshaper plus three CWDM stages (2 dB total insertion), two SNSPDs with
/// 80% efficiency, 100 Hz dark counts and 50 ps FWHM jitter behind a 50/50
/// splitter.
pub fn reference_detection_chain() -> DetectionChain {
    DetectionChain {
        facet_loss_db: 5.0,
        filter_stages: vec![
            FilterStage {
                center_nm: 1534.0,
                bandwidth_nm: 1.0,
                extinction_db: 35.0,
                insertion_db: 0.8,
            },
            FilterStage {
                center_nm: 1530.0,
                bandwidth_nm: 13.0,
                extinction_db: 12.0,
                insertion_db: 0.4,
            },
            FilterStage {
                center_nm: 1530.0,
                bandwidth_nm: 13.0,
                extinction_db: 12.0,
                insertion_db: 0.4,
            },
            FilterStage {
                center_nm: 1530.0,
                bandwidth_nm: 13.0,
                extinction_db: 12.0,
                insertion_db: 0.4,
            },
        ],
        splitter_ratio: 0.5,
        detector_efficiency: [0.8, 0.8],
        dark_rate_hz: [100.0, 100.0],
        jitter_fwhm_s: 50e-12,
        bin_width_s: 50e-12,
        correlation_half_span_s: 10e-9,
        integration_time_s: 10.0,
    }
}

/// X(ZZ,ZY) Raman lines of lithium niobate relevant to telecom-band pumping.
/// Shifts and the 7:1 peak-to-1502 nm amplitude ratio are calibrated to probe
/// spectroscopy; linewidths are a 10 cm⁻¹ default.
pub fn reference_raman_lines() -> Vec<RamanLine> {
    vec![
        RamanLine { shift_per_cm: 251.0, amplitude: 1.0, linewidth_per_cm: 10.0, label: "1A1 TO".into() },
        RamanLine { shift_per_cm: 238.0, amplitude: 0.35, linewidth_per_cm: 10.0, label: "2E TO".into() },
        RamanLine { shift_per_cm: 151.0, amplitude: 1.0, linewidth_per_cm: 10.0, label: "1E TO".into() },
    ]
}
