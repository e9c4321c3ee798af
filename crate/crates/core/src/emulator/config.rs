use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Calibration, EvalContext, Method, MethodProfile, WordParams, DEFAULT_LEVEL_BITS};

/// Environment variable naming a TOML config file.
pub const CONFIG_ENV: &str = "FHEGEN_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileOverride {
    pub depth_budget: Option<u32>,
    pub level_bits: Option<u32>,
}

/// Input generator. Only ChaCha8 is available; naming it keeps reports
/// replayable across platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RngName {
    #[default]
    #[serde(rename = "chacha8")]
    ChaCha8,
}

/// Overrides for method profiles and calibration constants.
///
/// ```toml
/// rng = "chacha8"
///
/// [calibration]
/// gate_ms = 15.0
/// switch_unit_s = 0.66
///
/// [profile.encoding]
/// depth_budget = 12
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextConfig {
    #[serde(default)]
    pub rng: RngName,
    #[serde(default)]
    pub calibration: Calibration,
    #[serde(default)]
    pub profile: BTreeMap<Method, ProfileOverride>,
}

impl Default for ContextConfig {
    fn default() -> Self {
        Self { rng: RngName::ChaCha8, calibration: Calibration::default(), profile: BTreeMap::new() }
    }
}

impl ContextConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if cfg.calibration.gate_ms < 0.0 || cfg.calibration.switch_unit_s < 0.0 {
            return Err(Error::InvalidParameter("calibration constants must be non-negative".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Loads the file named by `FHEGEN_CONFIG`, or the defaults when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn profile_for(&self, method: Method, bits: u32) -> Result<MethodProfile> {
        let mut prof = MethodProfile::default_for(method, bits)?;
        prof.calibration = self.calibration;
        if let Some(o) = self.profile.get(&method) {
            if let Some(lb) = o.level_bits {
                if method.word_wise() {
                    prof.depth_budget = WordParams::for_bits(bits)?.default_depth_budget(lb);
                }
            }
            if let Some(d) = o.depth_budget {
                prof.depth_budget = d;
            }
        }
        Ok(prof)
    }

    pub fn context(&self, method: Method, bits: u32, slot_count: usize) -> Result<EvalContext> {
        let profile = self.profile_for(method, bits)?;
        let params = if method.word_wise() { Some(WordParams::for_bits(bits)?) } else { None };
        EvalContext::with_profile(profile, bits, slot_count, params)
    }

    pub fn level_bits(&self, method: Method) -> u32 {
        self.profile.get(&method).and_then(|o| o.level_bits).unwrap_or(DEFAULT_LEVEL_BITS)
    }
}
