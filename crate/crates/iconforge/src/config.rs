//! TOML generation config. Every field is optional in the file and falls
//! back to the built-in default; command-line flags override the file.

use crate::error::{CliError, CliResult};
use iconforge_core::synthgen::AugmentParams;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub icons_per_window: u32,
    pub icon_size_min: u32,
    pub icon_size_max: u32,
    pub entropy_threshold: f64,
    pub contrast_threshold: f64,
    pub max_patch_tries: u32,
    pub max_icon_redraws: u32,
    pub window_size: u32,
    pub canny_low: f32,
    pub canny_high: f32,
    pub sigma_frac: f64,
    pub rng_seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig::from(&AugmentParams::default())
    }
}

impl From<&AugmentParams> for GenConfig {
    fn from(p: &AugmentParams) -> Self {
        GenConfig {
            icons_per_window: p.icons_per_window,
            icon_size_min: p.icon_size_min,
            icon_size_max: p.icon_size_max,
            entropy_threshold: p.entropy_threshold,
            contrast_threshold: p.contrast_threshold,
            max_patch_tries: p.max_patch_tries,
            max_icon_redraws: p.max_icon_redraws,
            window_size: p.window_size,
            canny_low: p.canny_low,
            canny_high: p.canny_high,
            sigma_frac: p.sigma_frac,
            rng_seed: p.rng_seed,
        }
    }
}

impl GenConfig {
    pub fn to_params(&self) -> AugmentParams {
        AugmentParams {
            icons_per_window: self.icons_per_window,
            icon_size_min: self.icon_size_min,
            icon_size_max: self.icon_size_max,
            entropy_threshold: self.entropy_threshold,
            contrast_threshold: self.contrast_threshold,
            max_patch_tries: self.max_patch_tries,
            max_icon_redraws: self.max_icon_redraws,
            window_size: self.window_size,
            canny_low: self.canny_low,
            canny_high: self.canny_high,
            sigma_frac: self.sigma_frac,
            rng_seed: self.rng_seed,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::in_file(path, e))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("plain struct always serializes")
    }
}
