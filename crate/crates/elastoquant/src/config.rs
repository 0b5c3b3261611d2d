//! Run configuration, read from and echoed as TOML.

use std::fs;
use std::path::{Path, PathBuf};

use elastoquant_core::calibration::{BarOrientation, ColorbarRoi};
use elastoquant_core::gradients::GradientParams;
use elastoquant_core::model::{AnteriorAt, ColorScale, Conventions};
use elastoquant_core::phantom::PhantomScene;
use elastoquant_core::pipeline::AnalysisParams;
use elastoquant_core::quantify::QuantifyParams;
use elastoquant_core::segmentation::SegmentationParams;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};

/// File name of the config echo written into every output directory.
pub const CONFIG_ECHO: &str = "config.toml";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColorbarConfig {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub orientation: BarOrientation,
    pub max_match_distance: f64,
    /// Calibrate once from the first manifest frame and reuse the scale.
    pub cache_scale: bool,
}

impl Default for ColorbarConfig {
    /// The bar position of a default 640x480 phantom frame.
    fn default() -> Self {
        ColorbarConfig::from_roi(&PhantomScene::homogeneous(50.0).colorbar_roi())
    }
}

impl ColorbarConfig {
    pub fn from_roi(roi: &ColorbarRoi) -> Self {
        ColorbarConfig {
            x: roi.x,
            y: roi.y,
            width: roi.width,
            height: roi.height,
            orientation: roi.orientation,
            max_match_distance: ColorScale::DEFAULT_MAX_MATCH_DISTANCE,
            cache_scale: false,
        }
    }

    pub fn roi(&self) -> ColorbarRoi {
        ColorbarRoi {
            x: self.x,
            y: self.y,
            width: self.width,
            height: self.height,
            orientation: self.orientation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    /// Welch's unequal-variance test instead of the pooled Student test.
    pub welch: bool,
    /// Negate directional gradients so positive means stiffening.
    pub report_as_stiffness: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// RS and oblique-gradient heatmaps per frame.
    pub heatmaps: bool,
    /// Row-mean and column-mean strips per frame, as PNG and CSV.
    pub strips: bool,
    /// Per-metric group bar charts for cohort runs.
    pub charts: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            heatmaps: true,
            strips: true,
            charts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Parallel frame workers; 0 uses every available core.
    pub workers: usize,
    pub anterior_at: AnteriorAt,
    pub colorbar: ColorbarConfig,
    pub segmentation: SegmentationParams,
    pub quantify: QuantifyParams,
    pub gradients: GradientParams,
    pub stats: StatsConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("elastoquant-out"),
            workers: 0,
            anterior_at: AnteriorAt::ImageLeft,
            colorbar: ColorbarConfig::default(),
            segmentation: SegmentationParams::default(),
            quantify: QuantifyParams::default(),
            gradients: GradientParams::default(),
            stats: StatsConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        RunConfig::from_toml(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config always serializes")
    }

    /// Writes the exact config used into `dir`.
    pub fn write_echo(&self, dir: &Path) -> Result<()> {
        let path = dir.join(CONFIG_ECHO);
        fs::write(&path, self.to_toml()).map_err(io_err(path))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::InvalidConfig(m.to_string()));
        if self.colorbar.width == 0 || self.colorbar.height == 0 {
            return bad("colorbar.width and colorbar.height must be positive");
        }
        let mmd = self.colorbar.max_match_distance;
        if !(mmd.is_finite() && mmd >= 0.0) {
            return bad("colorbar.max_match_distance must be a non-negative number");
        }
        self.segmentation.validate()?;
        if self.quantify.ref_min_pixels == 0 {
            return bad("quantify.ref_min_pixels must be at least 1");
        }
        if !(self.quantify.ref_floor.is_finite() && self.quantify.ref_floor >= 0.0) {
            return bad("quantify.ref_floor must be a non-negative number");
        }
        let g = &self.gradients;
        if !(g.spacing_x.is_finite() && g.spacing_x > 0.0 && g.spacing_y.is_finite() && g.spacing_y > 0.0) {
            return bad("gradients.spacing_x and gradients.spacing_y must be positive");
        }
        if g.agg_min_count == 0 {
            return bad("gradients.agg_min_count must be at least 1");
        }
        Ok(())
    }

    pub fn analysis_params(&self) -> AnalysisParams {
        AnalysisParams {
            colorbar: self.colorbar.roi(),
            max_match_distance: self.colorbar.max_match_distance,
            segmentation: self.segmentation,
            quantify: self.quantify,
            gradients: self.gradients,
        }
    }

    pub fn conventions(&self) -> Conventions {
        Conventions {
            anterior_at: self.anterior_at,
            report_as_stiffness: self.stats.report_as_stiffness,
        }
    }
}
