//! Effective-index curves, wavenumbers and phase-mismatch primitives.
//!
//! All nonlinear processes in the toolkit reduce their momentum bookkeeping
//! to the two functions [`delta_k_shg`] and [`delta_k_sfg`]. Wavelengths are
//! vacuum wavelengths in nm everywhere; wavenumbers are rad/µm.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of a guided optical mode with a registered dispersion curve.
///
/// The pump waves of the reference device propagate in the fundamental
/// telecom-band mode while the sum-frequency wave occupies a higher-order
/// near-visible mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModeId {
    /// Fundamental telecom-band mode.
    #[serde(rename = "TE00")]
    Te00,
    /// Higher-order near-visible mode.
    #[serde(rename = "TE01")]
    Te01,
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeId::Te00 => write!(f, "TE00"),
            ModeId::Te01 => write!(f, "TE01"),
        }
    }
}

/// Pairing of mode identities for one χ⁽²⁾ process: pumps in `pump`, the
/// sum-frequency/second-harmonic wave in `sum_freq`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessModes {
    pub pump: ModeId,
    pub sum_freq: ModeId,
}

/// Effective-index polynomial n_eff(λ) = Σ cᵢ (λ − λ_ref)ⁱ over a declared
/// validity interval. Evaluation outside the interval is a hard error;
/// extrapolated polynomial fits produce unphysical indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexCurve {
    /// Polynomial coefficients, ascending power.
    pub coefficients: Vec<f64>,
    /// Expansion point of the polynomial, nm.
    pub lambda_ref_nm: f64,
    /// Inclusive validity interval, nm.
    pub valid_range_nm: (f64, f64),
}

impl IndexCurve {
    pub fn new(
        coefficients: Vec<f64>,
        lambda_ref_nm: f64,
        valid_range_nm: (f64, f64),
    ) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::invalid("index curve needs at least one coefficient"));
        }
        let (lo, hi) = valid_range_nm;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::invalid(format!(
                "validity interval [{lo}, {hi}] nm must satisfy 0 < min < max"
            )));
        }
        Ok(Self {
            coefficients,
            lambda_ref_nm,
            valid_range_nm,
        })
    }

    fn contains(&self, lambda_nm: f64) -> bool {
        lambda_nm >= self.valid_range_nm.0 && lambda_nm <= self.valid_range_nm.1
    }

    /// Horner evaluation at `lambda_nm`, without range checking.
    fn eval(&self, lambda_nm: f64) -> f64 {
        let x = lambda_nm - self.lambda_ref_nm;
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Map from mode identifiers to effective-index curves.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DispersionModel {
    curves: BTreeMap<ModeId, IndexCurve>,
}

impl DispersionModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register a curve, checking n_eff > 1 on a dense sample of the
    /// validity interval.
    pub fn insert(&mut self, mode: ModeId, curve: IndexCurve) -> Result<()> {
        const SAMPLES: usize = 257;
        let (lo, hi) = curve.valid_range_nm;
        for i in 0..SAMPLES {
            let lam = lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64;
            let n = curve.eval(lam);
            if !(n > 1.0) {
                return Err(Error::NonPhysicalIndex {
                    mode,
                    wavelength_nm: lam,
                    value: n,
                });
            }
        }
        self.curves.insert(mode, curve);
        Ok(())
    }

    pub fn curve(&self, mode: ModeId) -> Result<&IndexCurve> {
        self.curves.get(&mode).ok_or(Error::UnknownMode(mode))
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeId> + '_ {
        self.curves.keys().copied()
    }

    /// Effective refractive index of `mode` at `lambda_nm`.
    pub fn n_eff(&self, mode: ModeId, lambda_nm: f64) -> Result<f64> {
        let curve = self.curve(mode)?;
        if !curve.contains(lambda_nm) {
            return Err(Error::WavelengthOutOfRange {
                mode,
                wavelength_nm: lambda_nm,
                min_nm: curve.valid_range_nm.0,
                max_nm: curve.valid_range_nm.1,
            });
        }
        let n = curve.eval(lambda_nm);
        if !(n > 1.0) {
            return Err(Error::NonPhysicalIndex {
                mode,
                wavelength_nm: lambda_nm,
                value: n,
            });
        }
        Ok(n)
    }

    /// Wavenumber k = 2π n_eff/λ in rad/µm.
    pub fn wavenumber(&self, mode: ModeId, lambda_nm: f64) -> Result<f64> {
        let n = self.n_eff(mode, lambda_nm)?;
        Ok(2.0e3 * std::f64::consts::PI * n / lambda_nm)
    }
}

/// Ferroelectric poling scheme of the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Poling {
    /// Unpoled: phase matching must come from the mode structure alone.
    None,
    /// Quasi-phase matching with domain period Λ (µm) and grating order.
    Qpm { period_um: f64, order: i32 },
    /// Layer-poled modal phase matching: domains inverted vertically so the
    /// fundamental↔higher-order mode overlap is nonzero. No grating vector.
    LayerPoledMpm,
}

/// Physical device under simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    /// Interaction length, cm.
    pub length_cm: f64,
    /// Propagation loss per mode, dB/cm. Modes without an entry are lossless.
    pub loss_db_per_cm: BTreeMap<ModeId, f64>,
    /// SHG nonlinear coupling κ_SHG, W^(−1/2)·cm^(−1). η_SHG = κ².
    pub kappa_shg: f64,
    /// SFG coupling override, same units. When `None` the SFG coupling is
    /// taken equal to κ_SHG; the exact ratio depends on mode-overlap
    /// integrals and is left configurable.
    pub kappa_sfg: Option<f64>,
    /// Poling scheme.
    pub poling: Poling,
    /// Insertion loss per chip facet, dB.
    pub facet_loss_db: f64,
}

impl WaveguideSpec {
    pub fn new(length_cm: f64, kappa_shg: f64, poling: Poling) -> Result<Self> {
        let spec = Self {
            length_cm,
            loss_db_per_cm: BTreeMap::new(),
            kappa_shg,
            kappa_sfg: None,
            poling,
            facet_loss_db: 0.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Build from a conversion efficiency η_SHG stated in %/W/cm², the unit
    /// used in device characterization: κ = √(η/100).
    pub fn from_eta_shg(length_cm: f64, eta_shg_percent_w_cm2: f64, poling: Poling) -> Result<Self> {
        if eta_shg_percent_w_cm2 <= 0.0 {
            return Err(Error::invalid("η_SHG must be positive"));
        }
        Self::new(length_cm, (eta_shg_percent_w_cm2 / 100.0).sqrt(), poling)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_cm > 0.0) {
            return Err(Error::invalid("waveguide length must be positive"));
        }
        if !(self.kappa_shg >= 0.0) {
            return Err(Error::invalid("κ_SHG must be non-negative"));
        }
        if let Some(k) = self.kappa_sfg {
            if !(k >= 0.0) {
                return Err(Error::invalid("κ_SFG must be non-negative"));
            }
        }
        if self.loss_db_per_cm.values().any(|&a| !(a >= 0.0)) {
            return Err(Error::invalid("propagation losses must be non-negative"));
        }
        if !(self.facet_loss_db >= 0.0) {
            return Err(Error::invalid("facet loss must be non-negative"));
        }
        if let Poling::Qpm { period_um, .. } = self.poling {
            if !(period_um > 0.0) {
                return Err(Error::invalid("QPM period Λ must be positive"));
            }
        }
        Ok(())
    }

    /// Conversion efficiency η_SHG = κ² in %/W/cm².
    pub fn eta_shg_percent_w_cm2(&self) -> f64 {
        self.kappa_shg * self.kappa_shg * 100.0
    }

    /// SFG coupling: the configured override, or κ_SHG.
    pub fn kappa_sfg(&self) -> f64 {
        self.kappa_sfg.unwrap_or(self.kappa_shg)
    }

    /// Propagation loss of `mode`, dB/cm (0 if unset).
    pub fn loss_db_per_cm(&self, mode: ModeId) -> f64 {
        self.loss_db_per_cm.get(&mode).copied().unwrap_or(0.0)
    }

    /// Length in µm, matching the rad/µm wavenumber unit.
    pub fn length_um(&self) -> f64 {
        self.length_cm * 1.0e4
    }

    /// First-order grating vector contribution 2π·order/Λ in rad/µm
    /// (0 unless QPM poled).
    pub fn grating_vector_um(&self) -> f64 {
        match self.poling {
            Poling::Qpm { period_um, order } => {
                2.0 * std::f64::consts::PI * order as f64 / period_um
            }
            _ => 0.0,
        }
    }
}

/// SFG phase mismatch Δk_SF = k₁(λ₁) + k₂(λ₂) − k_SF(λ_SF) − 2π·order/Λ in
/// rad/µm, with λ_SF = (1/λ₁ + 1/λ₂)⁻¹ from energy conservation.
pub fn delta_k_sfg(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    pump1_mode: ModeId,
    pump2_mode: ModeId,
    sf_mode: ModeId,
    lambda1_nm: f64,
    lambda2_nm: f64,
) -> Result<f64> {
    let lambda_sf = 1.0 / (1.0 / lambda1_nm + 1.0 / lambda2_nm);
    let k1 = model.wavenumber(pump1_mode, lambda1_nm)?;
    let k2 = model.wavenumber(pump2_mode, lambda2_nm)?;
    let k_sf = model.wavenumber(sf_mode, lambda_sf)?;
    Ok(k1 + k2 - k_sf - spec.grating_vector_um())
}

/// SHG phase mismatch Δk_SH = 2k_p(λ_p) − k_SH(λ_p/2) − 2π·order/Λ in rad/µm.
///
/// SHG is degenerate SFG; this shares the [`delta_k_sfg`] code path so the
/// two agree to floating-point identity at λ₁ = λ₂.
pub fn delta_k_shg(
    model: &DispersionModel,
    spec: &WaveguideSpec,
    pump_mode: ModeId,
    sh_mode: ModeId,
    lambda_p_nm: f64,
) -> Result<f64> {
    delta_k_sfg(
        model,
        spec,
        pump_mode,
        pump_mode,
        sh_mode,
        lambda_p_nm,
        lambda_p_nm,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn constant_model(n00: f64, n01: f64) -> DispersionModel {
        let mut m = DispersionModel::new();
        m.insert(ModeId::Te00, IndexCurve::new(vec![n00], 0.0, (500.0, 2000.0)).unwrap())
            .unwrap();
        m.insert(ModeId::Te01, IndexCurve::new(vec![n01], 0.0, (500.0, 2000.0)).unwrap())
            .unwrap();
        m
    }

    fn plain_spec() -> WaveguideSpec {
        WaveguideSpec::new(0.445, 2.5f64.sqrt(), Poling::LayerPoledMpm).unwrap()
    }

    #[test]
    fn constant_curve_evaluates_to_constant() {
        let m = constant_model(2.0, 2.0);
        for lam in [600.0, 1000.0, 1534.0, 1999.0] {
            assert_eq!(m.n_eff(ModeId::Te00, lam).unwrap(), 2.0);
        }
    }

    #[test]
    fn linear_curve_hits_anchor() {
        let mut m = DispersionModel::new();
        m.insert(
            ModeId::Te00,
            IndexCurve::new(vec![2.2, -1e-4], 1534.0, (1400.0, 1700.0)).unwrap(),
        )
        .unwrap();
        assert_eq!(m.n_eff(ModeId::Te00, 1534.0).unwrap(), 2.2);
        assert_relative_eq!(m.n_eff(ModeId::Te00, 1634.0).unwrap(), 2.2 - 1e-2, max_relative = 1e-14);
    }

    #[test]
    fn calibrated_curve_matches_independent_horner() {
        // Oracle: direct power-sum evaluation of the fixture coefficients.
        let m = presets::calibrated_dispersion();
        let curve = m.curve(ModeId::Te00).unwrap().clone();
        let lam = 1550.0;
        let x = lam - curve.lambda_ref_nm;
        let expected: f64 = curve
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * x.powi(i as i32))
            .sum();
        assert_relative_eq!(m.n_eff(ModeId::Te00, lam).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn wavenumber_formula_and_units() {
        let m = constant_model(2.0, 2.0);
        // n = 2, λ = 1000 nm → 2π·2/1.0 rad/µm
        assert_relative_eq!(
            m.wavenumber(ModeId::Te00, 1000.0).unwrap(),
            4.0 * std::f64::consts::PI,
            max_relative = 1e-14
        );
        // n = 1+ε, λ = 2π µm → ~1 rad/µm
        let mut m = DispersionModel::new();
        m.insert(ModeId::Te00, IndexCurve::new(vec![1.0 + 1e-12], 0.0, (500.0, 10000.0)).unwrap())
            .unwrap();
        assert_relative_eq!(
            m.wavenumber(ModeId::Te00, 2.0e3 * std::f64::consts::PI).unwrap(),
            1.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn wavenumber_on_fixture_matches_oracle() {
        let m = presets::calibrated_dispersion();
        let n = m.n_eff(ModeId::Te00, 1534.0).unwrap();
        let expected = 2.0e3 * std::f64::consts::PI * n / 1534.0;
        assert_eq!(m.wavenumber(ModeId::Te00, 1534.0).unwrap(), expected);
    }

    #[test]
    fn out_of_range_is_error() {
        let m = presets::calibrated_dispersion();
        assert!(matches!(
            m.n_eff(ModeId::Te00, 1399.0),
            Err(Error::WavelengthOutOfRange { .. })
        ));
        assert!(matches!(
            m.n_eff(ModeId::Te00, 1701.0),
            Err(Error::WavelengthOutOfRange { .. })
        ));
    }

    #[test]
    fn unknown_mode_is_error() {
        let mut m = DispersionModel::new();
        m.insert(ModeId::Te00, IndexCurve::new(vec![2.0], 0.0, (500.0, 2000.0)).unwrap())
            .unwrap();
        assert!(matches!(m.n_eff(ModeId::Te01, 800.0), Err(Error::UnknownMode(ModeId::Te01))));
    }

    #[test]
    fn unphysical_index_rejected_at_insert() {
        let mut m = DispersionModel::new();
        let err = m.insert(
            ModeId::Te00,
            IndexCurve::new(vec![1.05, -1e-3], 1500.0, (1400.0, 1700.0)).unwrap(),
        );
        assert!(matches!(err, Err(Error::NonPhysicalIndex { .. })));
    }

    #[test]
    fn calibrated_fixture_phase_matches_at_1534() {
        let (m, spec) = (presets::calibrated_dispersion(), presets::calibrated_waveguide());
        let modes = presets::calibrated_modes();
        let dk = delta_k_shg(&m, &spec, modes.pump, modes.sum_freq, 1534.0).unwrap();
        assert!(dk.abs() < 1e-9, "Δk(1534) = {dk}");
    }

    #[test]
    fn dispersionless_model_has_zero_mismatch_everywhere() {
        let m = constant_model(2.0, 2.0);
        let spec = plain_spec();
        for lam in [1450.0, 1534.0, 1600.0] {
            let dk = delta_k_shg(&m, &spec, ModeId::Te00, ModeId::Te01, lam).unwrap();
            assert!(dk.abs() < 1e-12, "Δk({lam}) = {dk}");
        }
    }

    #[test]
    fn qpm_period_from_closed_form_inversion_zeroes_mismatch() {
        // Oracle: Λ solved analytically from the constant indices.
        let m = constant_model(2.0, 1.9);
        let unpoled = plain_spec();
        let dk0 =
            delta_k_shg(&m, &unpoled, ModeId::Te00, ModeId::Te01, 1534.0).unwrap();
        assert!(dk0 > 0.0);
        let period = 2.0 * std::f64::consts::PI / dk0;
        assert_relative_eq!(period, 7.67, max_relative = 1e-12);
        let mut poled = unpoled;
        poled.poling = Poling::Qpm { period_um: period, order: 1 };
        let dk = delta_k_shg(&m, &poled, ModeId::Te00, ModeId::Te01, 1534.0).unwrap();
        assert!(dk.abs() < 1e-12, "QPM Δk(1534) = {dk}");
    }

    #[test]
    fn sfg_stays_phase_matched_while_shg_detunes() {
        // Oracle: direct evaluation over a detuning grid on a fixture with
        // curvature, comparing |Δk_SF| of symmetric pump pairs against
        // |Δk_SH| of either pump alone.
        let m = presets::quadratic_dispersion();
        let spec = presets::calibrated_waveguide();
        let modes = presets::calibrated_modes();
        let inv_d = 1.0 / 1534.0;
        for detune in [2.0e-6, 5.0e-6, 1.0e-5] {
            let l1 = 1.0 / (inv_d - detune);
            let l2 = 1.0 / (inv_d + detune);
            let dk_sf =
                delta_k_sfg(&m, &spec, modes.pump, modes.pump, modes.sum_freq, l1, l2).unwrap();
            let dk_sh = delta_k_shg(&m, &spec, modes.pump, modes.sum_freq, l1).unwrap();
            assert!(
                dk_sf.abs() < dk_sh.abs(),
                "Δ={detune}: |Δk_SF| = {} ≥ |Δk_SH| = {}",
                dk_sf.abs(),
                dk_sh.abs()
            );
        }
    }

    #[test]
    fn paper_pump_pair_is_nearly_phase_matched() {
        // Oracle: grid evaluation; consistency with the published pump
        // placement (1513.56 / 1555.05 nm).
        let (m, spec) = (presets::calibrated_dispersion(), presets::calibrated_waveguide());
        let modes = presets::calibrated_modes();
        let dk = delta_k_sfg(
            &m, &spec, modes.pump, modes.pump, modes.sum_freq, 1513.56, 1555.05,
        )
        .unwrap();
        let x = dk.abs() * spec.length_um() / 2.0;
        assert!(x < std::f64::consts::PI / 10.0, "|Δk_SF|·L/2 = {x}");
    }

    proptest! {
        #[test]
        fn shg_equals_degenerate_sfg_bitwise(lam in 1450.0f64..1650.0) {
            let (m, spec) = (presets::calibrated_dispersion(), presets::calibrated_waveguide());
            let modes = presets::calibrated_modes();
            let shg = delta_k_shg(&m, &spec, modes.pump, modes.sum_freq, lam).unwrap();
            let sfg = delta_k_sfg(&m, &spec, modes.pump, modes.pump, modes.sum_freq, lam, lam).unwrap();
            prop_assert_eq!(shg, sfg);
        }

        #[test]
        fn sfg_is_symmetric_in_pumps(l1 in 1450.0f64..1650.0, l2 in 1450.0f64..1650.0) {
            let (m, spec) = (presets::calibrated_dispersion(), presets::calibrated_waveguide());
            let modes = presets::calibrated_modes();
            let lsf = 1.0 / (1.0 / l1 + 1.0 / l2);
            prop_assume!(lsf >= 690.0 && lsf <= 860.0);
            let a = delta_k_sfg(&m, &spec, modes.pump, modes.pump, modes.sum_freq, l1, l2).unwrap();
            let b = delta_k_sfg(&m, &spec, modes.pump, modes.pump, modes.sum_freq, l2, l1).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn wavenumber_is_strictly_positive(lam in 1400.0f64..1700.0) {
            let m = presets::calibrated_dispersion();
            prop_assert!(m.wavenumber(ModeId::Te00, lam).unwrap() > 0.0);
        }

        #[test]
        fn sfg_mismatch_is_even_in_frequency_detuning(detune in 0.0f64..2.4e-5) {
            // Pumps at 1/λ_D ∓ Δ with Δk_SH(λ_D) = 0: Δk_SF even in Δ, zero at Δ = 0.
            let (m, spec) = (presets::calibrated_dispersion(), presets::calibrated_waveguide());
            let modes = presets::calibrated_modes();
            let inv_d = 1.0 / 1534.0;
            let (l1, l2) = (1.0 / (inv_d - detune), 1.0 / (inv_d + detune));
            let plus = delta_k_sfg(&m, &spec, modes.pump, modes.pump, modes.sum_freq, l1, l2).unwrap();
            let minus = delta_k_sfg(&m, &spec, modes.pump, modes.pump, modes.sum_freq, l2, l1).unwrap();
            prop_assert_eq!(plus, minus);
            let at_zero = delta_k_sfg(&m, &spec, modes.pump, modes.pump, modes.sum_freq, 1534.0, 1534.0).unwrap();
            prop_assert!(at_zero.abs() < 1e-9);
        }
    }
}
