//! Unit-annotated TOML experiment configuration.
//!
//! Every physical quantity in the file carries its unit in the key name
//! (`length_cm`, `jitter_fwhm_ps`, …) and unknown keys are rejected, so a
//! mistyped or mis-scaled field fails loudly instead of silently producing
//! wrong physics. Parsing and semantic validation are separate stages: the
//! semantic stage accumulates every problem into a machine-readable report
//! rather than stopping at the first.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cwe::{PumpConfig, PumpLine};
use crate::dispersion::{
    DispersionModel, IndexCurve, ModeId, Poling, ProcessModes, WaveguideSpec,
};
use crate::mcsim::{DetectionChain, FilterStage};
use crate::raman::RamanLine;

/// One semantic problem, on a named field.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

/// Machine-readable validation outcome.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ConfigIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue { field: field.into(), message: message.into() });
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{}: {}", issue.field, issue.message)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config:\n{0}")]
    Invalid(ValidationReport),
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub waveguide: WaveguideSpec,
    pub dispersion: DispersionModel,
    pub process: ProcessModes,
    /// Bracket for phase-matching root searches, nm.
    pub pm_bracket_nm: (f64, f64),
    pub pumps: PumpConfig,
    pub detection: DetectionChain,
    pub raman_lines: Vec<RamanLine>,
    pub source: SourceParams,
    pub scenarios: ScenarioParams,
    pub seed: u64,
}

/// Source-level calibration numbers used by the rate scenarios.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SourceParams {
    pub brightness_hz_per_nm_mw2: f64,
    pub bandwidth_nm: f64,
    /// Detected Raman rate per arm per nm of collection bandwidth, Hz/nm.
    pub raman_rate_per_nm_hz: f64,
    /// Documented efficiency ratio of the classical cascaded process over
    /// stimulated four-wave mixing, dB. Reference value only, not computed.
    pub fwm_comparison_db: f64,
}

/// Tunables of the individual scenarios, all optional in the file.
#[derive(Debug, Clone)]
pub struct ScenarioParams {
    pub shg_spectrum: ShgSpectrumParams,
    pub raman_fit: RamanFitParams,
    pub dp_power_sweep: DpPowerSweepParams,
    pub car_vs_bandwidth: CarVsBandwidthParams,
    pub sp_vs_dp: SpVsDpParams,
    pub pump_optimize: PumpOptimizeParams,
    pub cwe_trajectory: CweTrajectoryParams,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShgSpectrumParams {
    #[serde(default = "default_spectrum_range")]
    pub lambda_range_nm: (f64, f64),
    #[serde(default = "default_spectrum_samples")]
    pub samples: usize,
    #[serde(default = "default_one")]
    pub pump_power_mw: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamanFitParams {
    #[serde(default = "default_raman_range")]
    pub lambda_range_nm: (f64, f64),
    #[serde(default = "default_raman_samples")]
    pub samples: usize,
    #[serde(default = "default_fit_powers")]
    pub powers_mw: Vec<f64>,
    /// Cascaded-SPDC (quadratic) response of the synthetic spectrometer,
    /// counts/mW².
    #[serde(default = "default_quadratic_counts")]
    pub quadratic_counts_per_mw2: f64,
    /// Raman (linear) response scale, counts/mW per unit spectrum amplitude.
    #[serde(default = "default_linear_counts")]
    pub linear_counts_per_mw: f64,
    /// Relative multiplicative noise applied to the synthetic counts.
    #[serde(default = "default_noise_fraction")]
    pub noise_fraction: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpPowerSweepParams {
    /// Swept power of the second pump, mW.
    #[serde(default = "default_sweep_powers")]
    pub powers_mw: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarVsBandwidthParams {
    #[serde(default = "default_bandwidths")]
    pub bandwidths_nm: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpVsDpParams {
    #[serde(default = "default_sp_vs_dp_powers")]
    pub powers_mw: Vec<f64>,
    /// Monte Carlo brightness scale for desk-size runs.
    #[serde(default = "default_mc_scale")]
    pub mc_brightness_scale: f64,
    #[serde(default = "default_dp_integration")]
    pub dp_integration_s: f64,
    #[serde(default = "default_sp_integration")]
    pub sp_integration_s: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpOptimizeParams {
    #[serde(default = "default_min_detuning")]
    pub min_detuning_nm: f64,
    #[serde(default = "default_max_detuning")]
    pub max_detuning_nm: f64,
    #[serde(default = "default_raman_margin")]
    pub raman_margin_nm: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CweTrajectoryParams {
    #[serde(default = "default_z_steps")]
    pub z_steps: usize,
}

fn default_spectrum_range() -> (f64, f64) {
    (1500.0, 1570.0)
}
fn default_spectrum_samples() -> usize {
    1401
}
fn default_one() -> f64 {
    1.0
}
fn default_raman_range() -> (f64, f64) {
    (1450.0, 1620.0)
}
fn default_raman_samples() -> usize {
    1024
}
fn default_fit_powers() -> Vec<f64> {
    (1..=12).map(|i| 0.25 * i as f64).collect()
}
fn default_quadratic_counts() -> f64 {
    40.0
}
fn default_linear_counts() -> f64 {
    1000.0
}
fn default_noise_fraction() -> f64 {
    0.01
}
fn default_sweep_powers() -> Vec<f64> {
    (0..12).map(|i| 0.1 * (3.0f64 / 0.1).powf(i as f64 / 11.0)).collect()
}
fn default_bandwidths() -> Vec<f64> {
    (0..13).map(|i| 0.1 * (2.0f64 / 0.1).powf(i as f64 / 12.0)).collect()
}
fn default_sp_vs_dp_powers() -> Vec<f64> {
    vec![1.0, 1.5, 2.2, 3.0]
}
fn default_mc_scale() -> f64 {
    1.0
}
fn default_dp_integration() -> f64 {
    2.0
}
fn default_sp_integration() -> f64 {
    400.0
}
fn default_min_detuning() -> f64 {
    5.0
}
fn default_max_detuning() -> f64 {
    50.0
}
fn default_raman_margin() -> f64 {
    5.0
}
fn default_z_steps() -> usize {
    512
}
fn default_seed() -> u64 {
    42
}
fn default_pm_bracket() -> (f64, f64) {
    (1500.0, 1570.0)
}
fn default_fwm_db() -> f64 {
    crate::constants::CSHG_DFG_OVER_FWM_DB
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_seed")]
    seed: u64,
    waveguide: RawWaveguide,
    dispersion: BTreeMap<String, RawCurve>,
    process: RawProcess,
    pumps: RawPumps,
    detection: RawDetection,
    raman: RawRaman,
    source: RawSource,
    #[serde(default)]
    scenarios: RawScenarios,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaveguide {
    length_cm: f64,
    /// Either κ directly or the η_SHG figure; exactly one must be given.
    kappa_shg_per_sqrt_w_cm: Option<f64>,
    eta_shg_percent_per_w_cm2: Option<f64>,
    kappa_sfg_per_sqrt_w_cm: Option<f64>,
    facet_loss_db: f64,
    #[serde(default)]
    loss_db_per_cm: BTreeMap<String, f64>,
    poling: RawPoling,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawPoling {
    None,
    Qpm { period_um: Option<f64>, order: Option<i32> },
    LayerPoledMpm,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    coefficients: Vec<f64>,
    #[serde(default)]
    lambda_ref_nm: f64,
    valid_range_nm: (f64, f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProcess {
    pump_mode: String,
    sum_freq_mode: String,
    #[serde(default = "default_pm_bracket")]
    pm_bracket_nm: (f64, f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPumps {
    lines: Vec<RawPumpLine>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPumpLine {
    wavelength_nm: f64,
    power_mw: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetection {
    facet_loss_db: f64,
    #[serde(default)]
    filter_stages: Vec<RawFilterStage>,
    splitter_ratio: f64,
    detector_efficiency: [f64; 2],
    dark_rate_hz: [f64; 2],
    jitter_fwhm_ps: f64,
    bin_width_ps: f64,
    correlation_half_span_ns: f64,
    integration_time_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilterStage {
    center_nm: f64,
    bandwidth_nm: f64,
    extinction_db: f64,
    insertion_db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRaman {
    lines: Vec<RawRamanLine>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRamanLine {
    shift_per_cm: f64,
    amplitude: f64,
    linewidth_per_cm: f64,
    label: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    brightness_hz_per_nm_mw2: f64,
    bandwidth_nm: f64,
    #[serde(default)]
    raman_rate_per_nm_hz: f64,
    #[serde(default = "default_fwm_db")]
    fwm_comparison_db: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenarios {
    shg_spectrum: Option<ShgSpectrumParams>,
    raman_fit: Option<RamanFitParams>,
    dp_power_sweep: Option<DpPowerSweepParams>,
    car_vs_bandwidth: Option<CarVsBandwidthParams>,
    sp_vs_dp: Option<SpVsDpParams>,
    pump_optimize: Option<PumpOptimizeParams>,
    cwe_trajectory: Option<CweTrajectoryParams>,
}

fn parse_mode(name: &str) -> Option<ModeId> {
    match name {
        "TE00" => Some(ModeId::Te00),
        "TE01" => Some(ModeId::Te01),
        _ => None,
    }
}

impl ExperimentConfig {
    /// Load and fully validate a TOML config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let mut report = ValidationReport::default();
        let config = build(raw, &mut report);
        match config {
            Some(c) if report.is_ok() => Ok(c),
            _ => Err(ConfigError::Invalid(report)),
        }
    }

    /// Validate a file, returning the issue report instead of failing.
    /// Parse errors (with line/column) appear as a single issue.
    pub fn validate_file(path: &Path) -> ValidationReport {
        let mut report = ValidationReport::default();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                report.push("(io)", e.to_string());
                return report;
            }
        };
        match toml::from_str::<RawConfig>(&text) {
            Ok(raw) => {
                build(raw, &mut report);
            }
            Err(e) => report.push("(parse)", e.to_string()),
        }
        report
    }
}

fn build(raw: RawConfig, report: &mut ValidationReport) -> Option<ExperimentConfig> {
    // Waveguide.
    let kappa = match (raw.waveguide.kappa_shg_per_sqrt_w_cm, raw.waveguide.eta_shg_percent_per_w_cm2)
    {
        (Some(k), None) => k,
        (None, Some(eta)) if eta > 0.0 => (eta / 100.0).sqrt(),
        (None, Some(_)) => {
            report.push("waveguide.eta_shg_percent_per_w_cm2", "must be positive");
            0.0
        }
        (Some(_), Some(_)) => {
            report.push(
                "waveguide",
                "give either kappa_shg_per_sqrt_w_cm or eta_shg_percent_per_w_cm2, not both",
            );
            0.0
        }
        (None, None) => {
            report.push(
                "waveguide",
                "one of kappa_shg_per_sqrt_w_cm or eta_shg_percent_per_w_cm2 is required",
            );
            0.0
        }
    };
    let poling = match raw.waveguide.poling {
        RawPoling::None => Poling::None,
        RawPoling::LayerPoledMpm => Poling::LayerPoledMpm,
        RawPoling::Qpm { period_um, order } => match period_um {
            Some(p) if p > 0.0 => Poling::Qpm { period_um: p, order: order.unwrap_or(1) },
            Some(_) => {
                report.push("waveguide.poling.period_um", "QPM period must be positive");
                Poling::None
            }
            None => {
                report.push("waveguide.poling.period_um", "QPM poling requires a period");
                Poling::None
            }
        },
    };
    let mut losses = BTreeMap::new();
    for (name, value) in &raw.waveguide.loss_db_per_cm {
        match parse_mode(name) {
            Some(mode) if *value >= 0.0 => {
                losses.insert(mode, *value);
            }
            Some(_) => report.push(
                format!("waveguide.loss_db_per_cm.{name}"),
                "loss must be non-negative",
            ),
            None => report.push(
                format!("waveguide.loss_db_per_cm.{name}"),
                "unknown mode (expected TE00 or TE01)",
            ),
        }
    }
    if !(raw.waveguide.length_cm > 0.0) {
        report.push("waveguide.length_cm", "length must be positive");
    }
    if !(raw.waveguide.facet_loss_db >= 0.0) {
        report.push("waveguide.facet_loss_db", "facet loss must be non-negative");
    }
    let waveguide = WaveguideSpec {
        length_cm: raw.waveguide.length_cm,
        loss_db_per_cm: losses,
        kappa_shg: kappa,
        kappa_sfg: raw.waveguide.kappa_sfg_per_sqrt_w_cm,
        poling,
        facet_loss_db: raw.waveguide.facet_loss_db,
    };

    // Dispersion curves.
    let mut dispersion = DispersionModel::new();
    for (name, curve) in &raw.dispersion {
        let Some(mode) = parse_mode(name) else {
            report.push(format!("dispersion.{name}"), "unknown mode (expected TE00 or TE01)");
            continue;
        };
        match IndexCurve::new(curve.coefficients.clone(), curve.lambda_ref_nm, curve.valid_range_nm)
            .and_then(|c| dispersion.insert(mode, c))
        {
            Ok(()) => {}
            Err(e) => report.push(format!("dispersion.{name}"), e.to_string()),
        }
    }

    // Process modes must resolve to registered curves.
    let mut resolve_mode = |field: &str, name: &str| -> Option<ModeId> {
        let Some(mode) = parse_mode(name) else {
            report.push(field.to_string(), format!("unknown mode `{name}`"));
            return None;
        };
        if dispersion.curve(mode).is_err() {
            report.push(field.to_string(), format!("mode {name} has no dispersion curve"));
            return None;
        }
        Some(mode)
    };
    let pump_mode = resolve_mode("process.pump_mode", &raw.process.pump_mode);
    let sf_mode = resolve_mode("process.sum_freq_mode", &raw.process.sum_freq_mode);
    if !(raw.process.pm_bracket_nm.1 > raw.process.pm_bracket_nm.0) {
        report.push("process.pm_bracket_nm", "bracket must be ascending");
    }

    // Pumps.
    if raw.pumps.lines.is_empty() || raw.pumps.lines.len() > 2 {
        report.push("pumps.lines", "expect one or two pump lines");
    }
    for (i, line) in raw.pumps.lines.iter().enumerate() {
        if !(line.wavelength_nm > 0.0) {
            report.push(format!("pumps.lines[{i}].wavelength_nm"), "must be positive");
        }
        if !(line.power_mw >= 0.0) {
            report.push(format!("pumps.lines[{i}].power_mw"), "must be non-negative");
        }
        if let Some(mode) = pump_mode {
            if line.wavelength_nm > 0.0 && dispersion.n_eff(mode, line.wavelength_nm).is_err() {
                report.push(
                    format!("pumps.lines[{i}].wavelength_nm"),
                    "outside the pump mode's dispersion validity interval",
                );
            }
        }
    }
    let to_line = |l: &RawPumpLine| PumpLine { wavelength_nm: l.wavelength_nm, power_mw: l.power_mw };
    let pumps = match raw.pumps.lines.as_slice() {
        [a] => PumpConfig::Single(to_line(a)),
        [a, b] => PumpConfig::Dual(to_line(a), to_line(b)),
        _ => PumpConfig::Single(PumpLine { wavelength_nm: 1534.0, power_mw: 0.0 }),
    };

    // Detection chain.
    let detection = DetectionChain {
        facet_loss_db: raw.detection.facet_loss_db,
        filter_stages: raw
            .detection
            .filter_stages
            .iter()
            .map(|f| FilterStage {
                center_nm: f.center_nm,
                bandwidth_nm: f.bandwidth_nm,
                extinction_db: f.extinction_db,
                insertion_db: f.insertion_db,
            })
            .collect(),
        splitter_ratio: raw.detection.splitter_ratio,
        detector_efficiency: raw.detection.detector_efficiency,
        dark_rate_hz: raw.detection.dark_rate_hz,
        jitter_fwhm_s: raw.detection.jitter_fwhm_ps * 1e-12,
        bin_width_s: raw.detection.bin_width_ps * 1e-12,
        correlation_half_span_s: raw.detection.correlation_half_span_ns * 1e-9,
        integration_time_s: raw.detection.integration_time_s,
    };
    if let Err(e) = detection.validate() {
        report.push("detection", e.to_string());
    }

    // Raman lines.
    let mut raman_lines = Vec::new();
    for (i, line) in raw.raman.lines.iter().enumerate() {
        let domain = RamanLine {
            shift_per_cm: line.shift_per_cm,
            amplitude: line.amplitude,
            linewidth_per_cm: line.linewidth_per_cm,
            label: line.label.clone(),
        };
        if let Err(e) = domain.validate() {
            report.push(format!("raman.lines[{i}]"), e.to_string());
        }
        raman_lines.push(domain);
    }

    // Source.
    if !(raw.source.brightness_hz_per_nm_mw2 > 0.0) {
        report.push("source.brightness_hz_per_nm_mw2", "must be positive");
    }
    if !(raw.source.bandwidth_nm > 0.0) {
        report.push("source.bandwidth_nm", "must be positive");
    }
    if !(raw.source.raman_rate_per_nm_hz >= 0.0) {
        report.push("source.raman_rate_per_nm_hz", "must be non-negative");
    }
    let source = SourceParams {
        brightness_hz_per_nm_mw2: raw.source.brightness_hz_per_nm_mw2,
        bandwidth_nm: raw.source.bandwidth_nm,
        raman_rate_per_nm_hz: raw.source.raman_rate_per_nm_hz,
        fwm_comparison_db: raw.source.fwm_comparison_db,
    };

    // Scenario parameters.
    let scenarios = ScenarioParams {
        shg_spectrum: raw.scenarios.shg_spectrum.unwrap_or_else(|| ShgSpectrumParams {
            lambda_range_nm: default_spectrum_range(),
            samples: default_spectrum_samples(),
            pump_power_mw: default_one(),
        }),
        raman_fit: raw.scenarios.raman_fit.unwrap_or_else(|| RamanFitParams {
            lambda_range_nm: default_raman_range(),
            samples: default_raman_samples(),
            powers_mw: default_fit_powers(),
            quadratic_counts_per_mw2: default_quadratic_counts(),
            linear_counts_per_mw: default_linear_counts(),
            noise_fraction: default_noise_fraction(),
        }),
        dp_power_sweep: raw
            .scenarios
            .dp_power_sweep
            .unwrap_or_else(|| DpPowerSweepParams { powers_mw: default_sweep_powers() }),
        car_vs_bandwidth: raw
            .scenarios
            .car_vs_bandwidth
            .unwrap_or_else(|| CarVsBandwidthParams { bandwidths_nm: default_bandwidths() }),
        sp_vs_dp: raw.scenarios.sp_vs_dp.unwrap_or_else(|| SpVsDpParams {
            powers_mw: default_sp_vs_dp_powers(),
            mc_brightness_scale: default_mc_scale(),
            dp_integration_s: default_dp_integration(),
            sp_integration_s: default_sp_integration(),
        }),
        pump_optimize: raw.scenarios.pump_optimize.unwrap_or_else(|| PumpOptimizeParams {
            min_detuning_nm: default_min_detuning(),
            max_detuning_nm: default_max_detuning(),
            raman_margin_nm: default_raman_margin(),
        }),
        cwe_trajectory: raw
            .scenarios
            .cwe_trajectory
            .unwrap_or_else(|| CweTrajectoryParams { z_steps: default_z_steps() }),
    };
    validate_scenarios(&scenarios, report);

    if let Err(e) = waveguide.validate() {
        report.push("waveguide", e.to_string());
    }

    let process = ProcessModes { pump: pump_mode?, sum_freq: sf_mode? };
    Some(ExperimentConfig {
        waveguide,
        dispersion,
        process,
        pm_bracket_nm: raw.process.pm_bracket_nm,
        pumps,
        detection,
        raman_lines,
        source,
        scenarios,
        seed: raw.seed,
    })
}

fn validate_scenarios(s: &ScenarioParams, report: &mut ValidationReport) {
    if !(s.shg_spectrum.lambda_range_nm.1 > s.shg_spectrum.lambda_range_nm.0) {
        report.push("scenarios.shg_spectrum.lambda_range_nm", "range must be ascending");
    }
    if s.shg_spectrum.samples < 2 {
        report.push("scenarios.shg_spectrum.samples", "need at least 2 samples");
    }
    if s.raman_fit.powers_mw.len() < 3 {
        report.push("scenarios.raman_fit.powers_mw", "need at least 3 power points");
    }
    if !(s.raman_fit.noise_fraction >= 0.0 && s.raman_fit.noise_fraction < 1.0) {
        report.push("scenarios.raman_fit.noise_fraction", "must be in [0, 1)");
    }
    if s.dp_power_sweep.powers_mw.is_empty() {
        report.push("scenarios.dp_power_sweep.powers_mw", "sweep must be non-empty");
    }
    if s.car_vs_bandwidth.bandwidths_nm.iter().any(|&b| !(b > 0.0)) {
        report.push("scenarios.car_vs_bandwidth.bandwidths_nm", "bandwidths must be positive");
    }
    if s.sp_vs_dp.powers_mw.is_empty() {
        report.push("scenarios.sp_vs_dp.powers_mw", "sweep must be non-empty");
    }
    if !(s.sp_vs_dp.mc_brightness_scale > 0.0) {
        report.push("scenarios.sp_vs_dp.mc_brightness_scale", "must be positive");
    }
    if !(s.pump_optimize.max_detuning_nm > s.pump_optimize.min_detuning_nm)
        || !(s.pump_optimize.min_detuning_nm >= 0.0)
    {
        report.push("scenarios.pump_optimize", "detuning bounds must satisfy 0 ≤ min < max");
    }
    if s.cwe_trajectory.z_steps < 16 {
        report.push("scenarios.cwe_trajectory.z_steps", "need at least 16 z steps");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
        seed = 42

        [waveguide]
        length_cm = 0.445
        eta_shg_percent_per_w_cm2 = 250.0
        facet_loss_db = 5.0
        poling = { kind = "layer-poled-mpm" }
        [waveguide.loss_db_per_cm]
        TE00 = 0.3
        TE01 = 1.0

        [dispersion.TE00]
        coefficients = [1.90, -1.0e-4]
        lambda_ref_nm = 1534.0
        valid_range_nm = [1400.0, 1700.0]

        [dispersion.TE01]
        coefficients = [1.90, -3.13846e-4]
        lambda_ref_nm = 767.0
        valid_range_nm = [690.0, 860.0]

        [process]
        pump_mode = "TE00"
        sum_freq_mode = "TE01"

        [pumps]
        lines = [
            { wavelength_nm = 1513.56, power_mw = 0.9 },
            { wavelength_nm = 1555.05, power_mw = 1.7 },
        ]

        [detection]
        facet_loss_db = 5.0
        splitter_ratio = 0.5
        detector_efficiency = [0.8, 0.8]
        dark_rate_hz = [100.0, 100.0]
        jitter_fwhm_ps = 50.0
        bin_width_ps = 50.0
        correlation_half_span_ns = 10.0
        integration_time_s = 10.0
        filter_stages = [
            { center_nm = 1534.0, bandwidth_nm = 1.0, extinction_db = 35.0, insertion_db = 0.8 },
        ]

        [raman]
        lines = [
            { shift_per_cm = 251.0, amplitude = 1.0, linewidth_per_cm = 10.0, label = "1A1 TO" },
        ]

        [source]
        brightness_hz_per_nm_mw2 = 1.0e5
        bandwidth_nm = 1.0
        raman_rate_per_nm_hz = 1.69e5
    "#;

    #[test]
    fn well_formed_config_loads_cleanly() {
        let config = ExperimentConfig::from_toml_str(GOOD).unwrap();
        assert_eq!(config.seed, 42);
        assert_eq!(config.process.pump, ModeId::Te00);
        assert!((config.waveguide.kappa_shg - 2.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(config.detection.jitter_fwhm_s, 50e-12);
        assert_eq!(config.pumps.lines().len(), 2);
    }

    #[test]
    fn missing_section_is_a_parse_error_naming_the_key() {
        let broken = GOOD.replace("[dispersion.TE00]", "[dispersion_typo.TE00]");
        let err = ExperimentConfig::from_toml_str(&broken).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("dispersion"), "message: {msg}");
    }

    #[test]
    fn negative_loss_is_a_semantic_error_naming_the_field() {
        let broken = GOOD.replace("TE00 = 0.3", "TE00 = -0.3");
        let err = ExperimentConfig::from_toml_str(&broken).unwrap_err();
        let ConfigError::Invalid(report) = err else { panic!("expected semantic report") };
        assert!(report
            .issues
            .iter()
            .any(|i| i.field.contains("loss_db_per_cm.TE00")));
    }

    #[test]
    fn qpm_without_period_is_a_semantic_error() {
        let broken =
            GOOD.replace("poling = { kind = \"layer-poled-mpm\" }", "poling = { kind = \"qpm\" }");
        let err = ExperimentConfig::from_toml_str(&broken).unwrap_err();
        let ConfigError::Invalid(report) = err else { panic!("expected semantic report") };
        assert!(report.issues.iter().any(|i| i.field.contains("poling.period_um")));
    }

    #[test]
    fn pump_outside_dispersion_range_is_flagged() {
        let broken = GOOD.replace("wavelength_nm = 1513.56", "wavelength_nm = 1300.0");
        let err = ExperimentConfig::from_toml_str(&broken).unwrap_err();
        let ConfigError::Invalid(report) = err else { panic!("expected semantic report") };
        assert!(report.issues.iter().any(|i| i.field.contains("pumps.lines[0]")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let broken = GOOD.replace("length_cm = 0.445", "length_cm = 0.445\nlength_mm = 4.45");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&broken),
            Err(ConfigError::Parse(_))
        ));
    }
}
