//! TOML pipeline configuration. Every section and key is optional; missing
//! keys take the documented defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureParams;
use crate::fusion::FusionOptions;
use crate::rulepipe::RuleConfig;
use crate::segment::{GroundParams, SmoothParams};

/// Per-stage enable flags for the annotation pipeline.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct StageFlags {
    /// Majority-vote label smoothing after annotation.
    pub smooth: bool,
    /// Color-proximity building cleanup after smoothing.
    pub clean: bool,
    /// Connected-component filtering of extracted ground.
    pub ground_postprocess: bool,
}

impl Default for StageFlags {
    fn default() -> Self {
        StageFlags {
            smooth: true,
            clean: true,
            ground_postprocess: true,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub rules: RuleConfig,
    pub features: FeatureParams,
    pub ground: GroundParams,
    pub smoothing: SmoothParams,
    pub fusion: FusionOptions,
    pub stages: StageFlags,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.rules.validate()?;
        self.features.validate()?;
        self.ground.validate()?;
        self.smoothing.validate()?;
        self.fusion.icp_pass1.validate()?;
        self.fusion.icp_pass2.validate()?;
        if self.fusion.boundary_buffer < 0.0
            || self.fusion.footprint_cell <= 0.0
            || self.fusion.border_width <= 0.0
        {
            return Err(Error::Config("fusion geometry params out of range".into()));
        }
        Ok(())
    }

    /// Renders the effective configuration, defaults filled in, as TOML.
    pub fn dump(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
