//! The scenario runners behind `biphoton run <scenario>`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use biphoton_core::config::ExperimentConfig;
use biphoton_core::constants::angular_frequency_rad_s;
use biphoton_core::cwe::{integrate_sfg, integrate_shg, PumpConfig, PumpLine};
use biphoton_core::dispersion::delta_k_shg;
use biphoton_core::mcsim::{
    dp_vs_sp_experiment, simulate, CorrelationHistogram, SimSource, SweepSource,
};
use biphoton_core::numeric::linear_fit;
use biphoton_core::pairgen::{
    jsa, pgr_dual_pump, sp_parasitic_pgr, suppression_db, CoincidenceModel, PumpEnvelope,
    UniformGrid,
};
use biphoton_core::phasematch::{
    find_pm_wavelength, optimize_pump_placement, shg_bandwidth_fwhm_ghz, shg_spectrum,
    suppression_budget, PlacementConstraints,
};
use biphoton_core::raman::{
    crossover_power_mw, fit_power_scaling, raman_amplitude, raman_shifted_wavelengths,
    raman_spectrum,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::output::{cell, write_json, write_jsa_csv, CsvFile};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Physics(#[from] biphoton_core::Error),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Unsupported(String),
}

/// The characterizations the toolkit can reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    ShgSpectrum,
    RamanFit,
    DpPowerSweep,
    CarVsBandwidth,
    SpVsDp,
    PumpOptimize,
    CweTrajectory,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::ShgSpectrum => "shg-spectrum",
            Scenario::RamanFit => "raman-fit",
            Scenario::DpPowerSweep => "dp-power-sweep",
            Scenario::CarVsBandwidth => "car-vs-bandwidth",
            Scenario::SpVsDp => "sp-vs-dp",
            Scenario::PumpOptimize => "pump-optimize",
            Scenario::CweTrajectory => "cwe-trajectory",
        }
    }
}

/// Everything a scenario needs besides the physics inputs.
pub struct RunContext<'a> {
    pub config: &'a ExperimentConfig,
    pub config_sha256: String,
    pub out_dir: &'a Path,
    pub seed: u64,
}

impl RunContext<'_> {
    fn comments(&self) -> Vec<(&'static str, String)> {
        vec![
            ("config_sha256", self.config_sha256.clone()),
            ("toolkit_version", env!("CARGO_PKG_VERSION").to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Run one scenario, returning the emitted files (manifest last).
pub fn run_scenario(scenario: Scenario, ctx: &RunContext) -> Result<Vec<PathBuf>, ScenarioError> {
    std::fs::create_dir_all(ctx.out_dir)?;
    let mut outputs = match scenario {
        Scenario::ShgSpectrum => shg_spectrum_scenario(ctx)?,
        Scenario::RamanFit => raman_fit_scenario(ctx)?,
        Scenario::DpPowerSweep => dp_power_sweep_scenario(ctx)?,
        Scenario::CarVsBandwidth => car_vs_bandwidth_scenario(ctx)?,
        Scenario::SpVsDp => sp_vs_dp_scenario(ctx)?,
        Scenario::PumpOptimize => pump_optimize_scenario(ctx)?,
        Scenario::CweTrajectory => cwe_trajectory_scenario(ctx)?,
    };
    outputs.push(write_manifest(scenario, ctx, &outputs)?);
    Ok(outputs)
}

fn write_manifest(
    scenario: Scenario,
    ctx: &RunContext,
    outputs: &[PathBuf],
) -> Result<PathBuf, ScenarioError> {
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let names: Vec<String> = outputs
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    let manifest = json!({
        "scenario": scenario.name(),
        "toolkit_version": env!("CARGO_PKG_VERSION"),
        "config_sha256": ctx.config_sha256,
        "seed": ctx.seed,
        "created_unix_s": created,
        "outputs": names,
    });
    Ok(write_json(&ctx.path("manifest.json"), &manifest)?)
}

fn dual_pumps(config: &ExperimentConfig) -> Result<(PumpLine, PumpLine), ScenarioError> {
    match config.pumps {
        PumpConfig::Dual(a, b) => Ok((a, b)),
        PumpConfig::Single(_) => Err(ScenarioError::Unsupported(
            "this scenario needs two pump lines in [pumps]".to_string(),
        )),
    }
}

/// Theoretical SHG spectrum, phase-matching root, bandwidth and the
/// suppression budget at the configured pump pair.
fn shg_spectrum_scenario(ctx: &RunContext) -> Result<Vec<PathBuf>, ScenarioError> {
    let c = ctx.config;
    let params = &c.scenarios.shg_spectrum;
    let root = find_pm_wavelength(&c.dispersion, &c.waveguide, &c.process, c.pm_bracket_nm)?;
    let spectrum = shg_spectrum(
        &c.dispersion,
        &c.waveguide,
        &c.process,
        params.pump_power_mw,
        params.lambda_range_nm,
        params.samples,
    )?;
    let normalized = spectrum.clone().normalize();
    let bandwidth_ghz =
        shg_bandwidth_fwhm_ghz(&c.dispersion, &c.waveguide, &c.process, c.pm_bracket_nm)?;

    let mut comments = ctx.comments();
    comments.push(("normalized", "mixed; see columns".to_string()));
    comments.push(("pump_power_mw", cell(params.pump_power_mw)));
    let mut csv = CsvFile::create(
        &ctx.path("shg_spectrum.csv"),
        &comments,
        &["lambda_nm", "p_sh_w", "relative_efficiency"],
    )?;
    for (s, n) in spectrum.samples.iter().zip(&normalized.samples) {
        csv.row(&[cell(s.0), cell(s.1), cell(n.1)])?;
    }
    let csv_path = csv.finish()?;

    let mut summary = json!({
        "lambda_pm_nm": root,
        "fwhm_ghz": bandwidth_ghz,
        "peak_p_sh_w": spectrum.peak().1,
    });
    if let Ok((p1, p2)) = dual_pumps(c) {
        let budget = suppression_budget(
            &c.dispersion,
            &c.waveguide,
            &c.process,
            p1.wavelength_nm,
            p2.wavelength_nm,
        )?;
        summary["suppression_budget"] = serde_json::to_value(budget).unwrap();
    }
    let json_path = write_json(&ctx.path("summary.json"), &summary)?;
    Ok(vec![csv_path, json_path])
}

#[derive(Serialize)]
struct ProbeFit {
    wavelength_nm: f64,
    quadratic_counts_per_mw2: f64,
    linear_counts_per_mw: f64,
    residual_norm: f64,
    crossover_mw: f64,
}

/// Raman spectrum around the pump plus synthetic power-scaling fits at the
/// anti-Stokes probes and a flat-background reference.
fn raman_fit_scenario(ctx: &RunContext) -> Result<Vec<PathBuf>, ScenarioError> {
    let c = ctx.config;
    let params = &c.scenarios.raman_fit;
    let pump_nm = find_pm_wavelength(&c.dispersion, &c.waveguide, &c.process, c.pm_bracket_nm)
        .unwrap_or(1534.0);

    let (lo, hi) = params.lambda_range_nm;
    let grid: Vec<f64> = (0..params.samples)
        .map(|i| lo + (hi - lo) * i as f64 / (params.samples - 1) as f64)
        .collect();
    let spectrum = raman_spectrum(pump_nm, 1.0, &c.raman_lines, &grid);
    let mut csv = CsvFile::create(
        &ctx.path("raman_spectrum.csv"),
        &ctx.comments(),
        &["lambda_nm", "amplitude_per_mw"],
    )?;
    for (lam, v) in &spectrum {
        csv.row(&[cell(*lam), cell(*v)])?;
    }
    let spectrum_path = csv.finish()?;

    // Probes: every anti-Stokes line plus a flat-background reference a
    // fixed 139 cm⁻¹ above the pump (between the low-shift anti-Stokes line
    // and the pump).
    let mut probes: Vec<f64> =
        raman_shifted_wavelengths(pump_nm, &c.raman_lines).iter().map(|p| p.1).collect();
    probes.push(1e7 / (1e7 / pump_nm + 139.0));

    let mut rng = ChaCha12Rng::seed_from_u64(ctx.seed);
    let mut data_csv = CsvFile::create(
        &ctx.path("power_scaling.csv"),
        &ctx.comments(),
        &["wavelength_nm", "power_mw", "counts"],
    )?;
    let mut fits = Vec::new();
    for &probe in &probes {
        let linear = params.linear_counts_per_mw * raman_amplitude(pump_nm, 1.0, &c.raman_lines, probe);
        let data: Vec<(f64, f64)> = params
            .powers_mw
            .iter()
            .map(|&p| {
                let clean = params.quadratic_counts_per_mw2 * p * p + linear * p;
                let noise = 1.0 + params.noise_fraction * (2.0 * rng.gen::<f64>() - 1.0);
                (p, clean * noise)
            })
            .collect();
        for (p, counts) in &data {
            data_csv.row(&[cell(probe), cell(*p), cell(*counts)])?;
        }
        let mut fit = fit_power_scaling(&data)?;
        fit.wavelength_nm = Some(probe);
        fits.push(ProbeFit {
            wavelength_nm: probe,
            quadratic_counts_per_mw2: fit.quadratic,
            linear_counts_per_mw: fit.linear,
            residual_norm: fit.residual_norm,
            crossover_mw: crossover_power_mw(&fit).unwrap_or(f64::NAN),
        });
    }
    let data_path = data_csv.finish()?;

    let b_ratio = fits[0].linear_counts_per_mw / fits.last().unwrap().linear_counts_per_mw;
    let summary = json!({
        "pump_nm": pump_nm,
        "fits": fits,
        "linear_ratio_peak_over_reference": b_ratio,
    });
    let json_path = write_json(&ctx.path("raman_fit.json"), &summary)?;
    Ok(vec![spectrum_path, data_path, json_path])
}

/// Pair rate and analytic CAR while sweeping the second pump power, plus the
/// joint spectral amplitude of the degenerate source.
fn dp_power_sweep_scenario(ctx: &RunContext) -> Result<Vec<PathBuf>, ScenarioError> {
    let c = ctx.config;
    let (p1, _) = dual_pumps(c)?;
    let src = &c.source;
    let chain = &c.detection;

    let mut csv = CsvFile::create(
        &ctx.path("dp_power_sweep.csv"),
        &ctx.comments(),
        &["p2_mw", "pgr_onchip_hz", "pgr_detected_hz", "car"],
    )?;
    let mut last_rates = None;
    for &p2 in &c.scenarios.dp_power_sweep.powers_mw {
        let rates = pgr_dual_pump(
            src.brightness_hz_per_nm_mw2,
            p1.power_mw,
            p2,
            src.bandwidth_nm,
            chain.pair_efficiency(),
        );
        let model = CoincidenceModel {
            pair_rate_hz: rates.pgr_onchip_hz,
            transmission: chain.transmission(),
            splitter_ratio: chain.splitter_ratio,
            detector_efficiency: chain.detector_efficiency,
            raman_rate_hz: [src.raman_rate_per_nm_hz * src.bandwidth_nm; 2],
            dark_rate_hz: chain.dark_rate_hz,
            coincidence_window_s: chain.default_peak_window_s(),
        };
        csv.row(&[
            cell(p2),
            cell(rates.pgr_onchip_hz),
            cell(rates.pgr_detected_hz),
            cell(model.car()),
        ])?;
        last_rates = Some(rates);
    }
    let csv_path = csv.finish()?;
    let rates_path = write_json(&ctx.path("pair_rates.json"), &last_rates)?;

    // Joint spectral amplitude over the collection band, CW dual pump.
    let root = find_pm_wavelength(&c.dispersion, &c.waveguide, &c.process, c.pm_bracket_nm)?;
    let w_d = angular_frequency_rad_s(root);
    let half_span = angular_frequency_rad_s(root - 2.0) - w_d;
    let grid = UniformGrid { start_rad_s: w_d - half_span, stop_rad_s: w_d + half_span, n: 65 };
    let envelope = PumpEnvelope::Cw { sum_wavelength_nm: root / 2.0 };
    let jsa_grid = jsa(&c.dispersion, &c.waveguide, &c.process, envelope, &grid, &grid)?;
    let jsa_path = write_jsa_csv(&ctx.path("jsa.csv"), &jsa_grid, &ctx.config_sha256)?;
    Ok(vec![csv_path, rates_path, jsa_path])
}

/// Analytic CAR and PGR versus detection bandwidth with the inverse-law fit.
fn car_vs_bandwidth_scenario(ctx: &RunContext) -> Result<Vec<PathBuf>, ScenarioError> {
    let c = ctx.config;
    let (p1, p2) = dual_pumps(c)?;
    let src = &c.source;
    let chain = &c.detection;

    let mut csv = CsvFile::create(
        &ctx.path("car_vs_bandwidth.csv"),
        &ctx.comments(),
        &["bandwidth_nm", "car", "pgr_onchip_hz"],
    )?;
    let mut points = Vec::new();
    for &dl in &c.scenarios.car_vs_bandwidth.bandwidths_nm {
        let rates = pgr_dual_pump(src.brightness_hz_per_nm_mw2, p1.power_mw, p2.power_mw, dl, 1.0);
        let model = CoincidenceModel {
            pair_rate_hz: rates.pgr_onchip_hz,
            transmission: chain.transmission(),
            splitter_ratio: chain.splitter_ratio,
            detector_efficiency: chain.detector_efficiency,
            raman_rate_hz: [src.raman_rate_per_nm_hz * dl; 2],
            dark_rate_hz: chain.dark_rate_hz,
            coincidence_window_s: chain.default_peak_window_s(),
        };
        let car = model.car();
        csv.row(&[cell(dl), cell(car), cell(rates.pgr_onchip_hz)])?;
        points.push((dl.ln(), car.ln()));
    }
    let csv_path = csv.finish()?;

    let (slope, intercept) = linear_fit(&points);
    let summary = json!({
        "log_log_slope": slope,
        "inverse_law_coefficient": intercept.exp(),
    });
    let json_path = write_json(&ctx.path("car_fit.json"), &summary)?;
    Ok(vec![csv_path, json_path])
}

fn histogram_csv(
    ctx: &RunContext,
    name: &str,
    hist: &CorrelationHistogram,
) -> Result<PathBuf, ScenarioError> {
    let mut comments = ctx.comments();
    comments.push(("singles_arm0", hist.singles[0].to_string()));
    comments.push(("singles_arm1", hist.singles[1].to_string()));
    comments.push(("peak_coincidences", hist.peak_coincidences.to_string()));
    comments.push(("integration_time_s", cell(hist.integration_time_s)));
    let mut csv = CsvFile::create(&ctx.path(name), &comments, &["delay_s", "counts"])?;
    for (center, count) in hist.bin_centers_s().iter().zip(&hist.counts) {
        csv.row(&[cell(*center), count.to_string()])?;
    }
    Ok(csv.finish()?)
}

/// Dual-pump versus single-pump comparison: analytic budget, Monte Carlo
/// histograms at the configured powers, and the power-sweep gap.
fn sp_vs_dp_scenario(ctx: &RunContext) -> Result<Vec<PathBuf>, ScenarioError> {
    let c = ctx.config;
    let (p1, p2) = dual_pumps(c)?;
    let src = &c.source;
    let params = &c.scenarios.sp_vs_dp;
    let chain = &c.detection;

    let budget = suppression_budget(
        &c.dispersion,
        &c.waveguide,
        &c.process,
        p1.wavelength_nm,
        p2.wavelength_nm,
    )?;
    // Single-pump channel: the second (long-wavelength) pump alone, carrying
    // its sinc² suppression plus the splitting penalty.
    let sp_total_db = budget.shg2_db + budget.splitting_db;
    let dp_rates = pgr_dual_pump(
        src.brightness_hz_per_nm_mw2,
        p1.power_mw,
        p2.power_mw,
        src.bandwidth_nm,
        chain.pair_efficiency(),
    );
    let sp_rate =
        sp_parasitic_pgr(src.brightness_hz_per_nm_mw2, p2.power_mw, src.bandwidth_nm, sp_total_db);
    let analytic_gap_db = suppression_db(
        pgr_dual_pump(src.brightness_hz_per_nm_mw2, p2.power_mw, p2.power_mw, src.bandwidth_nm, 1.0)
            .pgr_onchip_hz,
        sp_rate,
    )?;

    // Desk-scale Monte Carlo of both channels.
    let mc_brightness = src.brightness_hz_per_nm_mw2 * params.mc_brightness_scale;
    let dp_source = SweepSource {
        brightness_hz_per_nm_mw2: mc_brightness,
        bandwidth_nm: src.bandwidth_nm,
        sinc_suppression_db: 0.0,
        integration_time_s: Some(params.dp_integration_s),
    };
    let sp_source = SweepSource {
        brightness_hz_per_nm_mw2: mc_brightness,
        bandwidth_nm: src.bandwidth_nm,
        sinc_suppression_db: budget.shg2_db,
        integration_time_s: Some(params.sp_integration_s),
    };
    let table = dp_vs_sp_experiment(chain, &dp_source, &sp_source, &params.powers_mw, ctx.seed)?;

    let mut sweep_csv = CsvFile::create(
        &ctx.path("dp_vs_sp_sweep.csv"),
        &ctx.comments(),
        &["power_mw", "pgr_dp_hz", "pgr_sp_hz", "gap_db"],
    )?;
    for p in &table.points {
        sweep_csv.row(&[cell(p.power_mw), cell(p.pgr_dp_hz), cell(p.pgr_sp_hz), cell(p.gap_db)])?;
    }
    let sweep_path = sweep_csv.finish()?;

    // Reference histograms at the configured pump powers.
    let mut dp_chain = chain.clone();
    dp_chain.integration_time_s = params.dp_integration_s;
    let dp_hist = simulate(
        &dp_chain,
        &SimSource {
            pgr_onchip_hz: dp_rates.pgr_onchip_hz * params.mc_brightness_scale,
            raman_rate_per_arm_hz: 0.0,
        },
        ctx.seed,
    )?;
    let mut sp_chain = chain.clone();
    sp_chain.integration_time_s = params.sp_integration_s;
    let sp_hist = simulate(
        &sp_chain,
        &SimSource {
            pgr_onchip_hz: sp_rate * params.mc_brightness_scale,
            raman_rate_per_arm_hz: 0.0,
        },
        ctx.seed.wrapping_add(1),
    )?;
    let dp_hist_path = histogram_csv(ctx, "dp_histogram.csv", &dp_hist)?;
    let sp_hist_path = histogram_csv(ctx, "sp_histogram.csv", &sp_hist)?;

    let summary = json!({
        "suppression_budget": budget,
        "sp_total_suppression_db": sp_total_db,
        "analytic": {
            "pgr_dp_onchip_hz": dp_rates.pgr_onchip_hz,
            "pgr_sp_onchip_hz": sp_rate,
            "gap_db": analytic_gap_db,
        },
        "monte_carlo": {
            "dp_fit": table.dp_fit,
            "sp_fit": table.sp_fit,
            "mean_gap_db": table.mean_gap_db,
            "brightness_scale": params.mc_brightness_scale,
        },
        "fwm_comparison_db": src.fwm_comparison_db,
    });
    let json_path = write_json(&ctx.path("sp_vs_dp_summary.json"), &summary)?;
    Ok(vec![sweep_path, dp_hist_path, sp_hist_path, json_path])
}

/// Optimize the symmetric pump placement and emit the suppression scan.
fn pump_optimize_scenario(ctx: &RunContext) -> Result<Vec<PathBuf>, ScenarioError> {
    let c = ctx.config;
    let params = &c.scenarios.pump_optimize;
    let constraints = PlacementConstraints {
        min_detuning_nm: params.min_detuning_nm,
        max_detuning_nm: params.max_detuning_nm,
        raman_shifts_per_cm: c.raman_lines.iter().map(|l| l.shift_per_cm).collect(),
        raman_margin_nm: params.raman_margin_nm,
    };
    let placement = optimize_pump_placement(
        &c.dispersion,
        &c.waveguide,
        &c.process,
        c.pm_bracket_nm,
        &constraints,
    )?;
    let placement_path = write_json(&ctx.path("pump_placement.json"), &placement)?;

    // Scan of the objective over symmetric detunings for plotting.
    let lambda_d = placement.lambda_d_nm;
    let d_hi = params.max_detuning_nm / (lambda_d * (lambda_d - params.max_detuning_nm));
    let mut csv = CsvFile::create(
        &ctx.path("placement_scan.csv"),
        &ctx.comments(),
        &["detuning_nm", "lambda1_nm", "lambda2_nm", "suppression_db"],
    )?;
    for i in 1..=500 {
        let d = d_hi * i as f64 / 500.0;
        let l1 = 1.0 / (1.0 / lambda_d + d);
        let l2 = 1.0 / (1.0 / lambda_d - d);
        let budget =
            suppression_budget(&c.dispersion, &c.waveguide, &c.process, l1, l2)?;
        csv.row(&[
            cell(l2 - lambda_d),
            cell(l1),
            cell(l2),
            cell(budget.total_min_suppression_db),
        ])?;
    }
    let scan_path = csv.finish()?;
    Ok(vec![placement_path, scan_path])
}

/// Classical coupled-wave trajectories for the configured pumps.
fn cwe_trajectory_scenario(ctx: &RunContext) -> Result<Vec<PathBuf>, ScenarioError> {
    let c = ctx.config;
    let steps = c.scenarios.cwe_trajectory.z_steps;
    match c.pumps {
        PumpConfig::Dual(p1, p2) => {
            let traj =
                integrate_sfg(&c.dispersion, &c.waveguide, &c.process, &p1, &p2, steps)?;
            let mut csv = CsvFile::create(
                &ctx.path("sfg_trajectory.csv"),
                &ctx.comments(),
                &["z_cm", "p1_w", "p2_w", "psf_w", "phase1_rad", "phase2_rad", "phase_sf_rad"],
            )?;
            for s in &traj {
                csv.row(&[
                    cell(s.z_cm),
                    cell(s.p1_w()),
                    cell(s.p2_w()),
                    cell(s.p_sf_w()),
                    cell(s.a1.arg()),
                    cell(s.a2.arg()),
                    cell(s.a_sf.arg()),
                ])?;
            }
            Ok(vec![csv.finish()?])
        }
        PumpConfig::Single(p) => {
            let traj = integrate_shg(&c.dispersion, &c.waveguide, &c.process, &p, steps)?;
            let dk = delta_k_shg(
                &c.dispersion,
                &c.waveguide,
                c.process.pump,
                c.process.sum_freq,
                p.wavelength_nm,
            )?;
            let mut comments = ctx.comments();
            comments.push(("delta_k_rad_per_um", cell(dk)));
            let mut csv = CsvFile::create(
                &ctx.path("shg_trajectory.csv"),
                &comments,
                &["z_cm", "p_pump_w", "p_sh_w", "phase_pump_rad", "phase_sh_rad"],
            )?;
            for s in &traj {
                csv.row(&[
                    cell(s.z_cm),
                    cell(s.p_pump_w()),
                    cell(s.p_sh_w()),
                    cell(s.a_pump.arg()),
                    cell(s.a_sh.arg()),
                ])?;
            }
            Ok(vec![csv.finish()?])
        }
    }
}
