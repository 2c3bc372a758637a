//! Shared fixtures for the criterion benchmarks.

use biphoton_core::dispersion::{DispersionModel, ProcessModes, WaveguideSpec};
use biphoton_core::presets;

pub fn fixture() -> (DispersionModel, WaveguideSpec, ProcessModes) {
    (
        presets::calibrated_dispersion(),
        presets::calibrated_waveguide(),
        presets::calibrated_modes(),
    )
}
