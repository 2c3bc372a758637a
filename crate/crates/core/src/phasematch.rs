//! Phase-matching wavelengths, SHG/SFG spectra, suppression budgets and
//! optimized pump placement.

use serde::{Deserialize, Serialize};

use crate::constants::{
    DEFAULT_SUPPRESSION_CAP_DB, HALF_POWER_SINC_ARG, PUMP_SPLITTING_PENALTY_DB,
    SPEED_OF_LIGHT_NM_S,
};
use crate::dispersion::{delta_k_sfg, delta_k_shg, DispersionModel, ProcessModes, WaveguideSpec};
use crate::error::{Error, Result};

/// sin(x)/x with a series expansion below |x| < 1e-4 so the removable
/// singularity stays branch-free for optimizers.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Second-harmonic spectrum sampled on a strictly increasing wavelength grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShgSpectrum {
    /// (pump wavelength nm, value) pairs; value is W, or peak-relative when
    /// `normalized`.
    pub samples: Vec<(f64, f64)>,
    pub normalized: bool,
}

impl ShgSpectrum {
    /// Peak (wavelength, value).
    pub fn peak(&self) -> (f64, f64) {
        self.samples
            .iter()
            .copied()
            .fold((f64::NAN, f64::NEG_INFINITY), |best, s| {
                if s.1 > best.1 {
                    s
                } else {
                    best
                }
            })
    }

    /// Rescale so the peak value is 1.
    pub fn normalize(mut self) -> Self {
        let (_, peak) = self.peak();
        if peak > 0.0 {
            for s in &mut self.samples {
                s.1 /= peak;
            }
        }
        self.normalized = true;
        self
    }

    /// Clamp samples from below at `floor` × peak, emulating a measured
    /// suppression floor.
    pub fn with_floor(mut self, floor: f64) -> Self {
        let (_, peak) = self.peak();
        let level = peak * floor;
        for s in &mut self.samples {
            if s.1 < level {
                s.1 = level;
            }
        }
        self
    }
}

/// Suppression of single-pump SHG relative to the dual-pump SFG peak at
/// equal per-line pump powers. All entries are positive dB of suppression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuppressionBudget {
    /// How far the SFG of the pump pair itself sits below the ideal
    /// phase-matched peak (≈ 0 for symmetric placement).
    pub sfg_peak_db_rel: f64,
    /// sinc² suppression of SHG from pump 1 alone.
    pub shg1_db: f64,
    /// sinc² suppression of SHG from pump 2 alone.
    pub shg2_db: f64,
    /// Pump-splitting penalty included in the totals, 10·log10(4).
    pub splitting_db: f64,
    /// min(shg1, shg2) + splitting penalty.
    pub total_min_suppression_db: f64,
}

/// Symmetric dual-pump placement around the degenerate point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpPlacement {
    pub lambda1_nm: f64,
    pub lambda2_nm: f64,
    /// Degenerate point λ_D = 2/(1/λ₁ + 1/λ₂).
    pub lambda_d_nm: f64,
    /// Total minimum suppression of the budget at (λ₁, λ₂).
    pub suppression_db: f64,
    /// Distance from λ_D to the nearest Raman-shifted line of either pump.
    pub raman_clearance_nm: f64,
}

/// Constraints for [`optimize_pump_placement`]. Detunings are |λ_pump − λ_D|
/// bounds applying to both pumps; Raman shifts are line positions in cm⁻¹
/// whose Stokes/anti-Stokes images of either pump must stay `raman_margin_nm`
/// away from λ_D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementConstraints {
    pub min_detuning_nm: f64,
    pub max_detuning_nm: f64,
    pub raman_shifts_per_cm: Vec<f64>,
    pub raman_margin_nm: f64,
}

/// Find the SHG phase-matching wavelength by bracketed root finding on
/// Δk_SH. The returned root satisfies |Δk| < 1e-9 rad/µm.
///
/// The bracket is first scanned on a grid; zero sign changes or an
/// identically vanishing mismatch are errors, and multiple roots are
/// reported with all refined candidates.
pub fn find_pm_wavelength(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    modes: &ProcessModes,
    bracket_nm: (f64, f64),
) -> Result<f64> {
    const SCAN: usize = 512;
    const DK_TOL: f64 = 1e-9;

    let (lo, hi) = bracket_nm;
    if !(hi > lo) {
        return Err(Error::invalid("bracket must satisfy lo < hi"));
    }
    let dk = |lam: f64| delta_k_shg(model, spec, modes.pump, modes.sum_freq, lam);

    let mut grid = Vec::with_capacity(SCAN + 1);
    for i in 0..=SCAN {
        let lam = lo + (hi - lo) * i as f64 / SCAN as f64;
        grid.push((lam, dk(lam)?));
    }
    if grid.iter().all(|&(_, d)| d.abs() < DK_TOL) {
        return Err(Error::DegenerateMismatch);
    }

    let mut roots = Vec::new();
    for pair in grid.windows(2) {
        let (l0, d0) = pair[0];
        let (l1, d1) = pair[1];
        if d0 == 0.0 {
            roots.push(l0);
        } else if d0 * d1 < 0.0 {
            roots.push(bisect_root(&dk, l0, l1, DK_TOL)?);
        }
    }
    if grid.last().map(|&(_, d)| d == 0.0).unwrap_or(false) {
        roots.push(hi);
    }

    match roots.len() {
        0 => Err(Error::NoRootInBracket { lo_nm: lo, hi_nm: hi }),
        1 => Ok(roots[0]),
        _ => Err(Error::MultipleRoots { roots_nm: roots }),
    }
}

fn bisect_root(
    dk: &dyn Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let mut d_lo = dk(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let d_mid = dk(mid)?;
        if d_mid.abs() < tol || (hi - lo) < f64::EPSILON * lo.abs() {
            return Ok(mid);
        }
        if d_lo * d_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            d_lo = d_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Single-pump SHG power, W: P_SH = κ²_SHG·P_p²·L²·sinc²(Δk_SH·L/2).
pub fn shg_power_w(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    modes: &ProcessModes,
    pump_power_mw: f64,
    lambda_nm: f64,
) -> Result<f64> {
    let dk = delta_k_shg(model, spec, modes.pump, modes.sum_freq, lambda_nm)?;
    let p_w = pump_power_mw * 1e-3;
    let s = sinc(dk * spec.length_um() / 2.0);
    Ok(spec.kappa_shg.powi(2) * p_w * p_w * spec.length_cm.powi(2) * s * s)
}

/// Sample the SHG spectrum over `lambda_range_nm` with `n_samples` points.
pub fn shg_spectrum(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    modes: &ProcessModes,
    pump_power_mw: f64,
    lambda_range_nm: (f64, f64),
    n_samples: usize,
) -> Result<ShgSpectrum> {
    if n_samples < 2 {
        return Err(Error::invalid("spectrum needs at least 2 samples"));
    }
    let (lo, hi) = lambda_range_nm;
    if !(hi > lo) {
        return Err(Error::invalid("wavelength range must satisfy lo < hi"));
    }
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let lam = lo + (hi - lo) * i as f64 / (n_samples - 1) as f64;
        samples.push((lam, shg_power_w(model, spec, modes, pump_power_mw, lam)?));
    }
    Ok(ShgSpectrum { samples, normalized: false })
}

/// Full width at half maximum of the sinc² SHG spectrum in GHz of optical
/// frequency, solving sinc²(Δk·L/2) = 1/2 on either side of the
/// phase-matching root.
pub fn shg_bandwidth_fwhm_ghz(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    modes: &ProcessModes,
    bracket_nm: (f64, f64),
) -> Result<f64> {
    let root = find_pm_wavelength(model, spec, modes, bracket_nm)?;
    let half_arg = |lam: f64| -> Result<f64> {
        let dk = delta_k_shg(model, spec, modes.pump, modes.sum_freq, lam)?;
        Ok((dk * spec.length_um() / 2.0).abs() - HALF_POWER_SINC_ARG)
    };
    let lo = scan_half_power(&half_arg, root, bracket_nm.0)?;
    let hi = scan_half_power(&half_arg, root, bracket_nm.1)?;
    let nu = |lam: f64| SPEED_OF_LIGHT_NM_S / lam;
    Ok((nu(lo.min(hi)) - nu(lo.max(hi))).abs() / 1e9)
}

/// Walk from the root towards `limit` until |Δk·L/2| crosses the half-power
/// argument, then bisect the crossing.
fn scan_half_power(
    half_arg: &dyn Fn(f64) -> Result<f64>,
    root: f64,
    limit: f64,
) -> Result<f64> {
    const STEPS: usize = 4096;
    let mut prev = root;
    let mut f_prev = half_arg(prev)?;
    for i in 1..=STEPS {
        let lam = root + (limit - root) * i as f64 / STEPS as f64;
        let f = half_arg(lam)?;
        if f_prev < 0.0 && f >= 0.0 {
            let mut lo = prev;
            let mut hi = lam;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if half_arg(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        prev = lam;
        f_prev = f;
    }
    Err(Error::NoRootInBracket { lo_nm: root.min(limit), hi_nm: root.max(limit) })
}

fn sinc_suppression_db(x: f64, cap_db: f64) -> f64 {
    let s2 = sinc(x) * sinc(x);
    if s2 <= 0.0 {
        return cap_db;
    }
    (-10.0 * s2.log10()).min(cap_db)
}

/// Suppression budget of single-pump SHG against the dual-pump SFG peak at
/// equal total power, with the default saturation cap.
pub fn suppression_budget(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    modes: &ProcessModes,
    lambda1_nm: f64,
    lambda2_nm: f64,
) -> Result<SuppressionBudget> {
    suppression_budget_capped(
        model,
        spec,
        modes,
        lambda1_nm,
        lambda2_nm,
        DEFAULT_SUPPRESSION_CAP_DB,
    )
}

/// As [`suppression_budget`] with an explicit saturation cap for pumps
/// landing on sinc nulls.
pub fn suppression_budget_capped(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    modes: &ProcessModes,
    lambda1_nm: f64,
    lambda2_nm: f64,
    cap_db: f64,
) -> Result<SuppressionBudget> {
    let half_l = spec.length_um() / 2.0;
    let x1 = delta_k_shg(model, spec, modes.pump, modes.sum_freq, lambda1_nm)? * half_l;
    let x2 = delta_k_shg(model, spec, modes.pump, modes.sum_freq, lambda2_nm)? * half_l;
    let x_sf = delta_k_sfg(
        model,
        spec,
        modes.pump,
        modes.pump,
        modes.sum_freq,
        lambda1_nm,
        lambda2_nm,
    )? * half_l;

    let shg1_db = sinc_suppression_db(x1, cap_db);
    let shg2_db = sinc_suppression_db(x2, cap_db);
    Ok(SuppressionBudget {
        sfg_peak_db_rel: sinc_suppression_db(x_sf, cap_db),
        shg1_db,
        shg2_db,
        splitting_db: PUMP_SPLITTING_PENALTY_DB,
        total_min_suppression_db: shg1_db.min(shg2_db) + PUMP_SPLITTING_PENALTY_DB,
    })
}

/// Maximize the suppression budget over symmetric frequency detunings of a
/// pump pair around the phase-matching point, subject to detuning bounds and
/// Raman-line clearance. Deterministic grid search with local golden-section
/// refinement.
pub fn optimize_pump_placement(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    modes: &ProcessModes,
    bracket_nm: (f64, f64),
    constraints: &PlacementConstraints,
) -> Result<PumpPlacement> {
    const GRID: usize = 2000;

    if !(constraints.min_detuning_nm >= 0.0
        && constraints.max_detuning_nm > constraints.min_detuning_nm)
    {
        return Err(Error::invalid("detuning bounds must satisfy 0 ≤ min < max"));
    }
    let lambda_d = find_pm_wavelength(model, spec, modes, bracket_nm)?;

    // Frequency-symmetric pumps: 1/λ₁ = 1/λ_D + d, 1/λ₂ = 1/λ_D − d.
    let pumps_at = |d: f64| {
        let inv = 1.0 / lambda_d;
        (1.0 / (inv + d), 1.0 / (inv - d))
    };
    // Wavelength detunings of both pumps within bounds?
    let detuning_ok = |d: f64| {
        let (l1, l2) = pumps_at(d);
        [l1, l2].iter().all(|&l| {
            let det = (l - lambda_d).abs();
            det >= constraints.min_detuning_nm && det <= constraints.max_detuning_nm
        })
    };
    let clearance = |d: f64| {
        let (l1, l2) = pumps_at(d);
        raman_clearance_nm(lambda_d, &[l1, l2], &constraints.raman_shifts_per_cm)
    };
    let objective = |d: f64| -> Result<f64> {
        let (l1, l2) = pumps_at(d);
        Ok(suppression_budget(model, spec, modes, l1, l2)?.total_min_suppression_db)
    };

    // The max wavelength detuning bound maps to an inverse-wavelength bound;
    // pad a little and let `detuning_ok` arbitrate exactly.
    let d_hi = constraints.max_detuning_nm / (lambda_d * (lambda_d - constraints.max_detuning_nm));
    let mut best: Option<(f64, f64)> = None;
    let mut feasible = 0usize;
    for i in 0..=GRID {
        let d = d_hi * i as f64 / GRID as f64;
        if !detuning_ok(d) || clearance(d) < constraints.raman_margin_nm {
            continue;
        }
        feasible += 1;
        let s = objective(d)?;
        if best.map(|(_, b)| s > b).unwrap_or(true) {
            best = Some((d, s));
        }
    }
    let (d_best, s_grid) = best.ok_or_else(|| {
        Error::InfeasibleConstraints(format!(
            "no symmetric detuning in [{}, {}] nm clears every Raman line by {} nm",
            constraints.min_detuning_nm, constraints.max_detuning_nm, constraints.raman_margin_nm
        ))
    })?;
    if feasible < 2 {
        // Single feasible grid point: nothing to refine against.
        return Ok(placement_at(model, spec, modes, lambda_d, pumps_at(d_best), constraints)?);
    }

    // Golden-section refinement on the continuous objective within one grid
    // step of the best point; fall back to the grid point if the refined
    // detuning violates a constraint or does not improve.
    let h = d_hi / GRID as f64;
    let (mut a, mut b) = ((d_best - h).max(0.0), (d_best + h).min(d_hi));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = objective(d)?;
        }
    }
    let d_ref = 0.5 * (a + b);
    let refined_ok = detuning_ok(d_ref) && clearance(d_ref) >= constraints.raman_margin_nm;
    let d_final = if refined_ok && objective(d_ref)? > s_grid {
        d_ref
    } else {
        d_best
    };
    placement_at(model, spec, modes, lambda_d, pumps_at(d_final), constraints)
}

fn placement_at(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    modes: &ProcessModes,
    lambda_d: f64,
    pumps: (f64, f64),
    constraints: &PlacementConstraints,
) -> Result<PumpPlacement> {
    let (l1, l2) = pumps;
    let budget = suppression_budget(model, spec, modes, l1, l2)?;
    Ok(PumpPlacement {
        lambda1_nm: l1,
        lambda2_nm: l2,
        lambda_d_nm: lambda_d,
        suppression_db: budget.total_min_suppression_db,
        raman_clearance_nm: raman_clearance_nm(lambda_d, &[l1, l2], &constraints.raman_shifts_per_cm),
    })
}

/// Distance in nm from `lambda_d` to the nearest Stokes/anti-Stokes image of
/// any pump under the given Raman shifts. Infinite when no shifts are given.
fn raman_clearance_nm(lambda_d: f64, pumps_nm: &[f64], shifts_per_cm: &[f64]) -> f64 {
    let mut clearance = f64::INFINITY;
    for &pump in pumps_nm {
        let nu_pump = 1e7 / pump; // cm⁻¹
        for &shift in shifts_per_cm {
            for nu in [nu_pump - shift, nu_pump + shift] {
                if nu > 0.0 {
                    clearance = clearance.min((1e7 / nu - lambda_d).abs());
                }
            }
        }
    }
    clearance
}
