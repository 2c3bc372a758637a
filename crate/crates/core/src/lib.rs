//! Core physics for cascaded SFG/SPDC photon-pair sources in χ⁽²⁾ waveguides.
//!
//! The crate models the full chain from waveguide dispersion to detected
//! coincidence statistics:
//!
//! * [`dispersion`] — effective-index curves, wavenumbers, phase mismatches
//! * [`phasematch`] — phase-matching roots, SHG/SFG spectra, suppression
//!   budgets, pump-placement optimization
//! * [`cwe`] — coupled-wave integration of classical SFG/SHG with loss and
//!   pump depletion
//! * [`pairgen`] — joint spectral amplitude, pair-generation rates,
//!   brightness, and the analytic coincidence-to-accidental model
//! * [`raman`] — spontaneous Raman spectra and power-scaling decomposition
//! * [`mcsim`] — Monte Carlo detection-chain simulation producing
//!   correlation histograms
//! * [`config`] — unit-annotated TOML experiment configuration
//! * [`presets`] — calibrated device fixtures reproducing the reference
//!   measurements

pub mod config;
pub mod constants;
pub mod cwe;
pub mod dispersion;
pub mod error;
pub mod mcsim;
pub mod numeric;
pub mod pairgen;
pub mod phasematch;
pub mod presets;
pub mod raman;

pub use config::ExperimentConfig;
pub use cwe::{FieldState, PumpConfig, PumpLine, ShgFieldState};
pub use dispersion::{DispersionModel, IndexCurve, ModeId, Poling, ProcessModes, WaveguideSpec};
pub use error::{Error, Result};
pub use mcsim::{CorrelationHistogram, DetectionChain, FilterStage, SimSource};
pub use pairgen::{CoincidenceModel, JsaGrid, PairRates, PumpEnvelope};
pub use phasematch::{PumpPlacement, ShgSpectrum, SuppressionBudget};
pub use raman::{PowerScalingFit, RamanLine};
