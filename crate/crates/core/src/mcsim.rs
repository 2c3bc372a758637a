//! Monte Carlo simulation of the detection chain: pair emission, filtering,
//! splitting, detection with jitter and dark counts, time tagging, and the
//! correlation analysis extracting CAR and PGR from histograms.
//!
//! Events are generated as Poisson processes with exponential inter-arrival
//! sampling. The integration time is partitioned into a fixed number of
//! slices, each driven by its own counter-based RNG stream derived from
//! (seed, slice, component), so results are bit-identical for a given seed
//! regardless of how slices are scheduled across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{from_db, to_db, CAR_SENTINEL, PUMP_SPLITTING_PENALTY_DB};
use crate::error::{Error, Result};
use crate::numeric::linear_fit;
use crate::pairgen::{sp_parasitic_pgr, CoincidenceModel};

/// Number of independently seeded time slices. Fixed so the event stream is
/// independent of thread count.
const N_SLICES: u64 = 64;

/// Default cap on the expected number of generated events per run.
pub const DEFAULT_EVENT_CAP: f64 = 2e8;

/// FWHM/σ of a Gaussian.
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

/// One spectral filter stage. Insertion loss applies in band; the extinction
/// figure documents out-of-band (residual pump) rejection and is checked by
/// config validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterStage {
    pub center_nm: f64,
    pub bandwidth_nm: f64,
    pub extinction_db: f64,
    pub insertion_db: f64,
}

/// Everything between the chip facet and the time tagger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    pub facet_loss_db: f64,
    pub filter_stages: Vec<FilterStage>,
    /// Fraction of the 50/50 (by default) splitter routed to arm 0.
    pub splitter_ratio: f64,
    pub detector_efficiency: [f64; 2],
    pub dark_rate_hz: [f64; 2],
    /// Detector timing jitter, FWHM in seconds.
    pub jitter_fwhm_s: f64,
    /// Time-tagger histogram bin width, s.
    pub bin_width_s: f64,
    /// Correlation histogram half span, s.
    pub correlation_half_span_s: f64,
    pub integration_time_s: f64,
}

impl DetectionChain {
    pub fn validate(&self) -> Result<()> {
        if !(self.facet_loss_db >= 0.0) {
            return Err(Error::invalid("facet loss must be non-negative"));
        }
        for f in &self.filter_stages {
            if !(f.insertion_db >= 0.0 && f.extinction_db >= 0.0) {
                return Err(Error::invalid("filter losses must be non-negative"));
            }
            if !(f.bandwidth_nm > 0.0 && f.center_nm > 0.0) {
                return Err(Error::invalid("filter band must be positive"));
            }
        }
        if !(self.splitter_ratio > 0.0 && self.splitter_ratio < 1.0) {
            return Err(Error::invalid("splitter ratio must be inside (0, 1)"));
        }
        for eta in self.detector_efficiency {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::invalid("detector efficiency must be in [0, 1]"));
            }
        }
        if self.dark_rate_hz.iter().any(|&d| !(d >= 0.0)) {
            return Err(Error::invalid("dark rates must be non-negative"));
        }
        if !(self.jitter_fwhm_s >= 0.0) {
            return Err(Error::invalid("jitter must be non-negative"));
        }
        if !(self.bin_width_s > 0.0) {
            return Err(Error::invalid("bin width must be positive"));
        }
        if !(self.correlation_half_span_s >= self.bin_width_s) {
            return Err(Error::invalid("correlation span must cover at least one bin"));
        }
        if !(self.integration_time_s > 0.0) {
            return Err(Error::invalid("integration time must be positive"));
        }
        Ok(())
    }

    /// In-band power transmission of facet plus filter insertion losses.
    pub fn transmission(&self) -> f64 {
        let total_db =
            self.facet_loss_db + self.filter_stages.iter().map(|f| f.insertion_db).sum::<f64>();
        from_db(-total_db)
    }

    /// Per-photon detection probability on `arm`, given the photon was
    /// routed there: chain transmission times detector efficiency.
    pub fn photon_efficiency(&self, arm: usize) -> f64 {
        self.transmission() * self.detector_efficiency[arm]
    }

    /// Product of the two per-photon efficiencies (probability that both
    /// photons of a pair clear the chain, before splitter routing).
    pub fn pair_efficiency(&self) -> f64 {
        self.photon_efficiency(0) * self.photon_efficiency(1)
    }

    /// Default coincidence window: 4× the combined two-detector jitter FWHM
    /// (√2·jitter), floored at one histogram bin.
    pub fn default_peak_window_s(&self) -> f64 {
        (4.0 * std::f64::consts::SQRT_2 * self.jitter_fwhm_s).max(self.bin_width_s)
    }

    /// Analytic coincidence model with the same photon bookkeeping as
    /// [`simulate`], using the effective (bin-quantized) peak window.
    pub fn coincidence_model(&self, source: &SimSource) -> CoincidenceModel {
        let nw = window_bins(self.default_peak_window_s(), self.bin_width_s);
        CoincidenceModel {
            pair_rate_hz: source.pgr_onchip_hz,
            transmission: self.transmission(),
            splitter_ratio: self.splitter_ratio,
            detector_efficiency: self.detector_efficiency,
            raman_rate_hz: [source.raman_rate_per_arm_hz; 2],
            dark_rate_hz: self.dark_rate_hz,
            coincidence_window_s: nw as f64 * self.bin_width_s,
        }
    }
}

/// Photon source feeding the chain: degenerate pairs plus per-arm
/// uncorrelated Raman noise (rates as detected, i.e. after any filtering).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSource {
    pub pgr_onchip_hz: f64,
    pub raman_rate_per_arm_hz: f64,
}

impl SimSource {
    pub fn validate(&self) -> Result<()> {
        if !(self.pgr_onchip_hz >= 0.0) || !(self.raman_rate_per_arm_hz >= 0.0) {
            return Err(Error::invalid("source rates must be non-negative"));
        }
        Ok(())
    }
}

/// Cross-correlation histogram of detection times on the two arms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationHistogram {
    /// Bin edges in seconds of relative delay (arm 1 minus arm 0),
    /// `counts.len() + 1` entries, centered on zero delay.
    pub bin_edges_s: Vec<f64>,
    pub counts: Vec<u64>,
    /// Total singles per arm.
    pub singles: [u64; 2],
    /// Coincidences inside the peak window.
    pub peak_coincidences: u64,
    /// Effective peak window (odd number of bins × bin width), s.
    pub peak_window_s: f64,
    pub bin_width_s: f64,
    pub integration_time_s: f64,
    pub seed: u64,
}

impl CorrelationHistogram {
    pub fn bin_centers_s(&self) -> Vec<f64> {
        self.bin_edges_s.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    fn center_index(&self) -> usize {
        self.counts.len() / 2
    }

    /// Sum of counts over the `nw` bins centered at zero delay.
    fn peak_sum(&self, nw: usize) -> u64 {
        let c = self.center_index();
        let h = nw / 2;
        self.counts[c - h..=c + h].iter().sum()
    }

    /// FWHM of the coincidence peak above the accidental baseline,
    /// estimated by linear interpolation of the half-maximum crossings.
    pub fn peak_fwhm_s(&self) -> Option<f64> {
        let centers = self.bin_centers_s();
        let n = self.counts.len();
        let baseline: f64 =
            self.counts[..n / 8].iter().chain(&self.counts[n - n / 8..]).sum::<u64>() as f64
                / (2 * (n / 8)) as f64;
        let (i_max, &max) = self.counts.iter().enumerate().max_by_key(|(_, &c)| c)?;
        let peak = max as f64 - baseline;
        if peak <= 0.0 {
            return None;
        }
        let half = baseline + peak / 2.0;
        let level = |i: usize| self.counts[i] as f64;
        let mut left = None;
        for i in (1..=i_max).rev() {
            if level(i - 1) < half && level(i) >= half {
                let frac = (half - level(i - 1)) / (level(i) - level(i - 1));
                left = Some(centers[i - 1] + frac * (centers[i] - centers[i - 1]));
                break;
            }
        }
        let mut right = None;
        for i in i_max..n - 1 {
            if level(i) >= half && level(i + 1) < half {
                let frac = (level(i) - half) / (level(i) - level(i + 1));
                right = Some(centers[i] + frac * (centers[i + 1] - centers[i]));
                break;
            }
        }
        Some(right? - left?)
    }
}

/// Odd number of bins covering `window_s` at `bin_s` resolution.
fn window_bins(window_s: f64, bin_s: f64) -> usize {
    let nw = (window_s / bin_s).round().max(1.0) as usize;
    if nw % 2 == 0 {
        nw + 1
    } else {
        nw
    }
}

/// Run the detection-chain Monte Carlo with the default event cap.
pub fn simulate(chain: &DetectionChain, source: &SimSource, seed: u64) -> Result<CorrelationHistogram> {
    simulate_capped(chain, source, seed, DEFAULT_EVENT_CAP)
}

/// Run the detection-chain Monte Carlo. Deterministic for a fixed seed,
/// independent of thread count.
pub fn simulate_capped(
    chain: &DetectionChain,
    source: &SimSource,
    seed: u64,
    event_cap: f64,
) -> Result<CorrelationHistogram> {
    chain.validate()?;
    source.validate()?;

    let t_total = chain.integration_time_s;
    let noise_rate = [
        source.raman_rate_per_arm_hz + chain.dark_rate_hz[0],
        source.raman_rate_per_arm_hz + chain.dark_rate_hz[1],
    ];
    let expected =
        t_total * (source.pgr_onchip_hz + noise_rate[0] + noise_rate[1]);
    if expected > event_cap {
        return Err(Error::EventCapExceeded { expected, cap: event_cap });
    }

    let sigma = chain.jitter_fwhm_s / FWHM_PER_SIGMA;
    let p_det = [chain.photon_efficiency(0), chain.photon_efficiency(1)];
    let slice_dt = t_total / N_SLICES as f64;

    let slices: Vec<(Vec<f64>, Vec<f64>)> = (0..N_SLICES)
        .into_par_iter()
        .map(|slice| {
            let t0 = slice as f64 * slice_dt;
            let t1 = t0 + slice_dt;
            let mut arm0 = Vec::new();
            let mut arm1 = Vec::new();

            // Pair photons.
            let mut rng = stream_rng(seed, slice, 0);
            let emit = |rng: &mut ChaCha12Rng, t: f64, arm0: &mut Vec<f64>, arm1: &mut Vec<f64>| {
                for _ in 0..2 {
                    let arm = if rng.gen::<f64>() < chain.splitter_ratio { 0 } else { 1 };
                    if rng.gen::<f64>() < p_det[arm] {
                        let jitter: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
                        if arm == 0 {
                            arm0.push(t + jitter);
                        } else {
                            arm1.push(t + jitter);
                        }
                    }
                }
            };
            if source.pgr_onchip_hz > 0.0 {
                let mut t = t0;
                loop {
                    t += rng.sample::<f64, _>(Exp1) / source.pgr_onchip_hz;
                    if t >= t1 {
                        break;
                    }
                    emit(&mut rng, t, &mut arm0, &mut arm1);
                }
            }

            // Per-arm noise (Raman plus darks), independent streams.
            for arm in 0..2 {
                if noise_rate[arm] <= 0.0 {
                    continue;
                }
                let mut rng = stream_rng(seed, slice, 1 + arm as u64);
                let out = if arm == 0 { &mut arm0 } else { &mut arm1 };
                let mut t = t0;
                loop {
                    t += rng.sample::<f64, _>(Exp1) / noise_rate[arm];
                    if t >= t1 {
                        break;
                    }
                    let jitter: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
                    out.push(t + jitter);
                }
            }
            (arm0, arm1)
        })
        .collect();

    let mut arm0 = Vec::new();
    let mut arm1 = Vec::new();
    for (a, b) in slices {
        arm0.extend(a);
        arm1.extend(b);
    }
    arm0.sort_by(|a, b| a.total_cmp(b));
    arm1.sort_by(|a, b| a.total_cmp(b));

    let counts = correlate(&arm0, &arm1, chain.bin_width_s, chain.correlation_half_span_s);
    let n_half = (counts.len() - 1) / 2;
    let bin_edges_s = (0..=counts.len())
        .map(|k| (k as f64 - n_half as f64 - 0.5) * chain.bin_width_s)
        .collect();

    let nw = window_bins(chain.default_peak_window_s(), chain.bin_width_s);
    let mut hist = CorrelationHistogram {
        bin_edges_s,
        counts,
        singles: [arm0.len() as u64, arm1.len() as u64],
        peak_coincidences: 0,
        peak_window_s: nw as f64 * chain.bin_width_s,
        bin_width_s: chain.bin_width_s,
        integration_time_s: t_total,
        seed,
    };
    hist.peak_coincidences = hist.peak_sum(nw);
    Ok(hist)
}

fn stream_rng(seed: u64, slice: u64, component: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(slice * 4 + component);
    rng
}

/// Cross-arm delay histogram (t₁ − t₀) over ±half span, two-pointer sweep
/// over the sorted detection-time arrays.
fn correlate(arm0: &[f64], arm1: &[f64], bin_s: f64, half_span_s: f64) -> Vec<u64> {
    let n_half = (half_span_s / bin_s).round().max(1.0) as i64;
    let mut counts = vec![0u64; (2 * n_half + 1) as usize];
    let edge = (n_half as f64 + 0.5) * bin_s;
    let mut lo = 0usize;
    for &ta in arm0 {
        while lo < arm1.len() && arm1[lo] < ta - edge {
            lo += 1;
        }
        for &tb in &arm1[lo..] {
            if tb >= ta + edge {
                break;
            }
            let k = ((tb - ta) / bin_s).round() as i64;
            if k.abs() <= n_half {
                counts[(k + n_half) as usize] += 1;
            }
        }
    }
    counts
}

/// CAR = (peak-window counts) / (mean counts per off-peak window of the same
/// width), with propagated Poisson uncertainty. Returns the saturating
/// sentinel with a one-sided 95% lower bound when no accidentals were
/// recorded.
pub fn car_from_histogram(
    hist: &CorrelationHistogram,
    peak_window_s: f64,
) -> Result<(f64, f64)> {
    let nw = window_bins(peak_window_s, hist.bin_width_s);
    let center = hist.counts.len() / 2;
    let h = nw / 2;
    if center < h + nw {
        return Err(Error::InsufficientSpan { available: 0, required: 10 });
    }
    let peak: u64 = hist.counts[center - h..=center + h].iter().sum();

    let (total_acc, groups) = offpeak_windows(hist, nw);
    if groups < 10 {
        return Err(Error::InsufficientSpan { available: groups, required: 10 });
    }
    let n_groups = groups as f64;
    if total_acc == 0 {
        // One-sided: with zero observed accidentals, the 95% upper limit on
        // the per-window mean is ~3/n_groups, bounding CAR from below.
        let lower_bound = peak as f64 * n_groups / 3.0;
        return Ok((CAR_SENTINEL, lower_bound));
    }
    let mean_acc = total_acc as f64 / n_groups;
    let car = peak as f64 / mean_acc;
    let rel = (1.0 / peak.max(1) as f64 + 1.0 / total_acc as f64).sqrt();
    Ok((car, car * rel))
}

/// Klyshko-style on-chip rate estimate R = S₁·S₂/(2·C·T) for a degenerate
/// source behind a 50/50 splitter: loss-independent because efficiencies
/// cancel between singles and coincidences.
pub fn pgr_from_singles(hist: &CorrelationHistogram) -> Result<f64> {
    if hist.peak_coincidences == 0 {
        return Err(Error::NoCoincidences);
    }
    let s1 = hist.singles[0] as f64;
    let s2 = hist.singles[1] as f64;
    Ok(s1 * s2 / (2.0 * hist.peak_coincidences as f64 * hist.integration_time_s))
}

/// Background-corrected Klyshko estimate: known per-arm noise rates are
/// subtracted from the singles and the off-peak accidental level from the
/// peak counts before applying R = S₁·S₂/(2·C·T). Without the correction,
/// uncorrelated noise biases the estimate upward — severely so when noise
/// dominates the singles.
pub fn pgr_from_singles_corrected(
    hist: &CorrelationHistogram,
    noise_rate_hz: [f64; 2],
) -> Result<f64> {
    let t = hist.integration_time_s;
    let mut singles = [0.0; 2];
    for arm in 0..2 {
        singles[arm] = hist.singles[arm] as f64 - noise_rate_hz[arm] * t;
        if singles[arm] <= 0.0 {
            return Err(Error::invalid(format!(
                "noise correction exceeds the recorded singles on arm {arm}"
            )));
        }
    }
    let nw = window_bins(hist.peak_window_s, hist.bin_width_s);
    let accidental = offpeak_window_mean(hist, nw).unwrap_or(0.0);
    let coincidences = hist.peak_coincidences as f64 - accidental;
    if coincidences <= 0.0 {
        return Err(Error::NoCoincidences);
    }
    Ok(singles[0] * singles[1] / (2.0 * coincidences * t))
}

/// Mean counts per `nw`-bin window over the off-peak region, if at least
/// two complete windows fit.
fn offpeak_window_mean(hist: &CorrelationHistogram, nw: usize) -> Option<f64> {
    let center = hist.counts.len() / 2;
    if center < nw / 2 + nw {
        return None;
    }
    let (total, groups) = offpeak_windows(hist, nw);
    if groups < 2 {
        return None;
    }
    Some(total as f64 / groups as f64)
}

/// Total counts and number of complete `nw`-bin windows tiling the region
/// outside the central peak window.
fn offpeak_windows(hist: &CorrelationHistogram, nw: usize) -> (u64, usize) {
    let n = hist.counts.len();
    let center = n / 2;
    let h = nw / 2;
    let mut total = 0u64;
    let mut groups = 0usize;
    let mut i = 0;
    while i + nw <= center - h {
        total += hist.counts[i..i + nw].iter().sum::<u64>();
        groups += 1;
        i += nw;
    }
    let mut i = center + h + 1;
    while i + nw <= n {
        total += hist.counts[i..i + nw].iter().sum::<u64>();
        groups += 1;
        i += nw;
    }
    (total, groups)
}

/// Source description for one channel of the dual-pump versus single-pump
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSource {
    pub brightness_hz_per_nm_mw2: f64,
    pub bandwidth_nm: f64,
    /// sinc² suppression of this channel (0 for the dual-pump source; the
    /// pump-splitting penalty is added internally for the single-pump one).
    pub sinc_suppression_db: f64,
    /// Override of the chain integration time, e.g. to give the strongly
    /// suppressed channel enough statistics.
    pub integration_time_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpVsSpPoint {
    pub power_mw: f64,
    pub pgr_dp_hz: f64,
    pub pgr_sp_hz: f64,
    pub gap_db: f64,
}

/// log10(PGR) = slope·log10(P) + offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpVsSpTable {
    pub points: Vec<DpVsSpPoint>,
    pub dp_fit: LogLogFit,
    pub sp_fit: LogLogFit,
    pub mean_gap_db: f64,
}

/// Sweep per-line pump power, simulating the dual-pump source and the
/// single-pump parasitic channel at each point, and report
/// background-corrected Klyshko rate estimates, log-log fits, and the
/// suppression gap. Detector dark counts stay in the simulation and are
/// subtracted in the analysis, as in a real coincidence measurement.
pub fn dp_vs_sp_experiment(
    chain: &DetectionChain,
    dp: &SweepSource,
    sp: &SweepSource,
    powers_mw: &[f64],
    seed: u64,
) -> Result<DpVsSpTable> {
    if powers_mw.is_empty() {
        return Err(Error::invalid("power sweep must be non-empty"));
    }
    let mut points = Vec::with_capacity(powers_mw.len());
    for (i, &p_mw) in powers_mw.iter().enumerate() {
        let run = |src: &SweepSource, suppression_db: f64, channel: u64| -> Result<f64> {
            let pgr = sp_parasitic_pgr(src.brightness_hz_per_nm_mw2, p_mw, src.bandwidth_nm, suppression_db);
            let mut ch = chain.clone();
            if let Some(t) = src.integration_time_s {
                ch.integration_time_s = t;
            }
            let hist = simulate(
                &ch,
                &SimSource { pgr_onchip_hz: pgr, raman_rate_per_arm_hz: 0.0 },
                point_seed(seed, i as u64, channel),
            )?;
            pgr_from_singles_corrected(&hist, ch.dark_rate_hz)
        };
        let pgr_dp = run(dp, dp.sinc_suppression_db, 0)?;
        let pgr_sp = run(sp, sp.sinc_suppression_db + PUMP_SPLITTING_PENALTY_DB, 1)?;
        points.push(DpVsSpPoint {
            power_mw: p_mw,
            pgr_dp_hz: pgr_dp,
            pgr_sp_hz: pgr_sp,
            gap_db: to_db(pgr_dp / pgr_sp),
        });
    }
    let fit = |sel: fn(&DpVsSpPoint) -> f64| {
        let pts: Vec<(f64, f64)> =
            points.iter().map(|p| (p.power_mw.log10(), sel(p).log10())).collect();
        let (slope, offset) = linear_fit(&pts);
        LogLogFit { slope, offset }
    };
    let dp_fit = fit(|p| p.pgr_dp_hz);
    let sp_fit = fit(|p| p.pgr_sp_hz);
    let mean_gap_db = points.iter().map(|p| p.gap_db).sum::<f64>() / points.len() as f64;
    Ok(DpVsSpTable { points, dp_fit, sp_fit, mean_gap_db })
}

fn point_seed(seed: u64, point: u64, channel: u64) -> u64 {
    seed ^ (2 * point + channel + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn quiet_chain() -> DetectionChain {
        DetectionChain {
            facet_loss_db: 0.0,
            filter_stages: vec![],
            splitter_ratio: 0.5,
            detector_efficiency: [1.0, 1.0],
            dark_rate_hz: [0.0, 0.0],
            jitter_fwhm_s: 0.0,
            bin_width_s: 50e-12,
            correlation_half_span_s: 10e-9,
            integration_time_s: 100.0,
        }
    }

    #[test]
    fn dark_counts_alone_leave_a_flat_histogram() {
        let mut chain = quiet_chain();
        chain.dark_rate_hz = [50_000.0, 50_000.0];
        chain.jitter_fwhm_s = 50e-12;
        chain.integration_time_s = 50.0;
        let hist = simulate(&chain, &SimSource { pgr_onchip_hz: 0.0, raman_rate_per_arm_hz: 0.0 }, 7)
            .unwrap();
        let (car, sigma) = car_from_histogram(&hist, hist.peak_window_s).unwrap();
        assert!((car - 1.0).abs() < 3.0 * sigma, "CAR = {car} ± {sigma}");
    }

    #[test]
    fn ideal_chain_concentrates_all_coincidences_at_zero_delay() {
        let mut chain = quiet_chain();
        chain.integration_time_s = 1_000.0;
        let source = SimSource { pgr_onchip_hz: 10.0, raman_rate_per_arm_hz: 0.0 };
        let hist = simulate(&chain, &source, 11).unwrap();
        let center = hist.counts.len() / 2;
        for (i, &c) in hist.counts.iter().enumerate() {
            if i != center {
                assert_eq!(c, 0, "count in off-peak bin {i}");
            }
        }
        // Lossless: every photon detected; split pairs all coincide.
        let n_pairs = (hist.singles[0] + hist.singles[1]) / 2;
        let split = hist.counts[center];
        // Splitting is Bernoulli(1/2) per pair.
        let expect = n_pairs as f64 / 2.0;
        let sd = (n_pairs as f64 * 0.25).sqrt();
        assert!((split as f64 - expect).abs() < 4.0 * sd, "split = {split}, pairs = {n_pairs}");
        assert_eq!(hist.peak_coincidences, split);
    }

    #[test]
    fn mc_car_matches_the_analytic_model() {
        // Oracle: the analytic coincidence model on identical parameters.
        let mut chain = presets::reference_detection_chain();
        chain.integration_time_s = 20.0;
        chain.correlation_half_span_s = 50e-9;
        let source = SimSource { pgr_onchip_hz: 1.0e5, raman_rate_per_arm_hz: 5.0e3 };
        let hist = simulate(&chain, &source, 99).unwrap();
        let (car_mc, sigma) = car_from_histogram(&hist, chain.default_peak_window_s()).unwrap();
        let car_th = chain.coincidence_model(&source).car();
        assert!(
            (car_mc - car_th).abs() < 3.0 * sigma,
            "MC {car_mc} ± {sigma} vs analytic {car_th}"
        );
    }

    #[test]
    fn klyshko_estimate_is_loss_independent() {
        // Oracle: the injected ground truth across a loss sweep.
        let injected = 5.0e4;
        for loss_db in [0.0, 5.0, 10.0] {
            let mut chain = quiet_chain();
            chain.facet_loss_db = loss_db;
            chain.integration_time_s = 60.0;
            chain.detector_efficiency = [0.8, 0.7];
            let hist = simulate(
                &chain,
                &SimSource { pgr_onchip_hz: injected, raman_rate_per_arm_hz: 0.0 },
                123,
            )
            .unwrap();
            let est = pgr_from_singles(&hist).unwrap();
            let sigma = injected / (hist.peak_coincidences as f64).sqrt();
            assert!(
                (est - injected).abs() < 3.0 * sigma,
                "loss {loss_db} dB: estimate {est} vs {injected} (σ = {sigma})"
            );
        }
    }

    #[test]
    fn corrected_klyshko_estimate_survives_dominant_dark_counts() {
        // Raw Klyshko is badly biased when noise dominates the singles;
        // the background-corrected variant recovers the injected rate.
        let injected = 100.0;
        let mut chain = presets::reference_detection_chain();
        chain.integration_time_s = 400.0;
        let hist = simulate(
            &chain,
            &SimSource { pgr_onchip_hz: injected, raman_rate_per_arm_hz: 0.0 },
            321,
        )
        .unwrap();
        let raw = pgr_from_singles(&hist).unwrap();
        assert!(raw > 10.0 * injected, "darks should bias the raw estimate, got {raw}");
        let corrected = pgr_from_singles_corrected(&hist, chain.dark_rate_hz).unwrap();
        // Variance comes from both the coincidence count and the dark-count
        // fluctuation left in the corrected singles.
        let t = chain.integration_time_s;
        let sig = injected * chain.photon_efficiency(0) * t;
        let rel = (2.0 * (hist.singles[0] as f64) / (sig * sig)
            + 1.0 / hist.peak_coincidences as f64)
            .sqrt();
        assert!(
            (corrected - injected).abs() < 3.0 * rel * injected,
            "corrected {corrected} vs injected {injected} (rel σ = {rel})"
        );
    }

    #[test]
    fn rates_scale_linearly_with_pair_rate() {
        let mut chain = quiet_chain();
        chain.facet_loss_db = 3.0;
        chain.integration_time_s = 30.0;
        let mut singles_pts = Vec::new();
        let mut coinc_pts = Vec::new();
        for (k, pgr) in [1.0e4, 2.154e4, 4.642e4, 1.0e5].iter().enumerate() {
            let hist = simulate(
                &chain,
                &SimSource { pgr_onchip_hz: *pgr, raman_rate_per_arm_hz: 0.0 },
                200 + k as u64,
            )
            .unwrap();
            singles_pts.push((pgr.log10(), (hist.singles[0] as f64).log10()));
            coinc_pts.push((pgr.log10(), (hist.peak_coincidences as f64).log10()));
        }
        let (s_slope, _) = linear_fit(&singles_pts);
        let (c_slope, _) = linear_fit(&coinc_pts);
        assert!((s_slope - 1.0).abs() < 0.02, "singles slope {s_slope}");
        assert!((c_slope - 1.0).abs() < 0.02, "coincidence slope {c_slope}");
    }

    #[test]
    fn jitter_broadens_the_peak_by_sqrt_two() {
        let mut chain = quiet_chain();
        chain.jitter_fwhm_s = 50e-12;
        chain.bin_width_s = 5e-12;
        chain.correlation_half_span_s = 2e-9;
        chain.integration_time_s = 400.0;
        let source = SimSource { pgr_onchip_hz: 2.0e3, raman_rate_per_arm_hz: 0.0 };
        let hist = simulate(&chain, &source, 31).unwrap();
        let fwhm = hist.peak_fwhm_s().expect("peak present");
        let expected = std::f64::consts::SQRT_2 * chain.jitter_fwhm_s;
        assert!(
            (fwhm - expected).abs() / expected < 0.05,
            "FWHM {fwhm} vs √2·jitter {expected}"
        );
    }

    #[test]
    fn fixed_seed_reproduces_bit_identical_histograms_across_pools() {
        let mut chain = presets::reference_detection_chain();
        chain.integration_time_s = 5.0;
        let source = SimSource { pgr_onchip_hz: 2.0e5, raman_rate_per_arm_hz: 1.0e4 };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| simulate(&chain, &source, 4242).unwrap())
        };
        let a = run(1);
        let b = run(4);
        let c = run(7);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn event_cap_is_enforced() {
        let mut chain = quiet_chain();
        chain.integration_time_s = 10.0;
        let source = SimSource { pgr_onchip_hz: 1e9, raman_rate_per_arm_hz: 0.0 };
        assert!(matches!(
            simulate(&chain, &source, 1),
            Err(Error::EventCapExceeded { .. })
        ));
    }

    #[test]
    fn synthetic_peak_gives_the_expected_car() {
        // Hand-built histogram: accidental mean 2 per bin, peak bin 744
        // extra counts in a one-bin window → CAR = 746/2 = 373.
        let n = 101;
        let mut counts = vec![2u64; n];
        counts[n / 2] = 746;
        let hist = CorrelationHistogram {
            bin_edges_s: (0..=n).map(|k| (k as f64 - 50.5) * 50e-12).collect(),
            counts,
            singles: [0, 0],
            peak_coincidences: 746,
            peak_window_s: 50e-12,
            bin_width_s: 50e-12,
            integration_time_s: 1.0,
            seed: 0,
        };
        let (car, sigma) = car_from_histogram(&hist, 50e-12).unwrap();
        assert_eq!(car, 373.0);
        assert!(sigma > 0.0);

        // Uniform histogram → CAR = 1; doubled peak → CAR = 2.
        let mut uniform = hist.clone();
        uniform.counts = vec![4u64; n];
        let (car, _) = car_from_histogram(&uniform, 50e-12).unwrap();
        assert_eq!(car, 1.0);
        let mut doubled = hist.clone();
        doubled.counts = vec![3u64; n];
        doubled.counts[n / 2] = 6;
        let (car, _) = car_from_histogram(&doubled, 50e-12).unwrap();
        assert_eq!(car, 2.0);
    }

    #[test]
    fn insufficient_span_is_an_error() {
        // 9 bins leave only 8 complete off-peak windows, below the 10 needed.
        let n = 9;
        let hist = CorrelationHistogram {
            bin_edges_s: (0..=n).map(|k| (k as f64 - 4.5) * 50e-12).collect(),
            counts: vec![1; n],
            singles: [0, 0],
            peak_coincidences: 1,
            peak_window_s: 50e-12,
            bin_width_s: 50e-12,
            integration_time_s: 1.0,
            seed: 0,
        };
        assert!(matches!(
            car_from_histogram(&hist, 50e-12),
            Err(Error::InsufficientSpan { .. })
        ));
    }

    #[test]
    fn dp_vs_sp_recovers_injected_gap_and_quadratic_slopes() {
        let mut chain = quiet_chain();
        chain.integration_time_s = 2.0;
        chain.correlation_half_span_s = 5e-9;
        let dp = SweepSource {
            brightness_hz_per_nm_mw2: 2.5e4,
            bandwidth_nm: 2.0,
            sinc_suppression_db: 0.0,
            integration_time_s: None,
        };
        let sp = SweepSource {
            brightness_hz_per_nm_mw2: 2.5e4,
            bandwidth_nm: 2.0,
            // Total injected gap: 33.98 + 6.02 (splitting) = 40 dB.
            sinc_suppression_db: 40.0 - PUMP_SPLITTING_PENALTY_DB,
            integration_time_s: Some(400.0),
        };
        let table =
            dp_vs_sp_experiment(&chain, &dp, &sp, &[1.0, 1.5, 2.2, 3.0], 77).unwrap();
        assert!((table.mean_gap_db - 40.0).abs() < 1.0, "gap = {}", table.mean_gap_db);
        assert!((table.dp_fit.slope - 2.0).abs() < 0.15, "DP slope {}", table.dp_fit.slope);
        assert!((table.sp_fit.slope - 2.0).abs() < 0.25, "SP slope {}", table.sp_fit.slope);
    }

    #[test]
    fn zero_sinc_suppression_leaves_the_splitting_gap() {
        let mut chain = quiet_chain();
        chain.integration_time_s = 4.0;
        chain.correlation_half_span_s = 5e-9;
        let src = SweepSource {
            brightness_hz_per_nm_mw2: 2.5e4,
            bandwidth_nm: 2.0,
            sinc_suppression_db: 0.0,
            integration_time_s: None,
        };
        let table = dp_vs_sp_experiment(&chain, &src, &src, &[1.0, 2.0, 3.0], 5).unwrap();
        assert!(
            (table.mean_gap_db - PUMP_SPLITTING_PENALTY_DB).abs() < 0.3,
            "gap = {}",
            table.mean_gap_db
        );
    }

    #[test]
    fn log_log_fit_recovers_reference_line_coefficients() {
        // The fitted-line machinery reproduces injected slopes/offsets like
        // the characterization fits (1.95x − 2 and 1.8x − 43) exactly.
        let dp: Vec<(f64, f64)> = (0..6).map(|i| {
            let x = 0.1 * i as f64;
            (x, 1.95 * x - 2.0)
        }).collect();
        let sp: Vec<(f64, f64)> = (0..6).map(|i| {
            let x = 0.1 * i as f64;
            (x, 1.8 * x - 43.0)
        }).collect();
        let (s1, o1) = linear_fit(&dp);
        let (s2, o2) = linear_fit(&sp);
        assert!((s1 - 1.95).abs() < 1e-12 && (o1 + 2.0).abs() < 1e-12);
        assert!((s2 - 1.8).abs() < 1e-12 && (o2 + 43.0).abs() < 1e-12);
    }
}
