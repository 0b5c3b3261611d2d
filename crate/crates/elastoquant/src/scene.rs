//! Phantom scene and cohort recipe files (TOML).

use std::fs;
use std::path::Path;

use elastoquant_core::phantom::{
    BoneRendering, CohortRecipe, Colormap, Ellipse, LoadProfile, PhantomScene, TissueLayer,
};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};

/// A [`PhantomScene`] as written in a scene file. The colormap is always
/// the built-in elastography map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneFile {
    pub width: usize,
    pub height: usize,
    pub top_margin: usize,
    pub standoff_thickness: usize,
    pub skin_gap_thickness: usize,
    pub standoff_strainability: f64,
    pub tissue_layers: Vec<TissueLayer>,
    pub bone: Option<Ellipse>,
    pub bone_rendering: BoneRendering,
    pub load_profile: LoadProfile,
    pub color_noise_sigma: f64,
    pub seed: u64,
    pub allow_clipping: bool,
    pub colorbar_width: usize,
    pub emit_bmode: bool,
}

impl Default for SceneFile {
    fn default() -> Self {
        SceneFile::from(&PhantomScene::homogeneous(50.0))
    }
}

impl From<&PhantomScene> for SceneFile {
    fn from(s: &PhantomScene) -> Self {
        SceneFile {
            width: s.width,
            height: s.height,
            top_margin: s.top_margin,
            standoff_thickness: s.standoff_thickness,
            skin_gap_thickness: s.skin_gap_thickness,
            standoff_strainability: s.standoff_strainability,
            tissue_layers: s.tissue_layers.clone(),
            bone: s.bone,
            bone_rendering: s.bone_rendering,
            load_profile: s.load_profile,
            color_noise_sigma: s.color_noise_sigma,
            seed: s.seed,
            allow_clipping: s.allow_clipping,
            colorbar_width: s.colorbar_width,
            emit_bmode: s.emit_bmode,
        }
    }
}

impl SceneFile {
    pub fn scene(&self) -> PhantomScene {
        PhantomScene {
            width: self.width,
            height: self.height,
            top_margin: self.top_margin,
            standoff_thickness: self.standoff_thickness,
            skin_gap_thickness: self.skin_gap_thickness,
            standoff_strainability: self.standoff_strainability,
            tissue_layers: self.tissue_layers.clone(),
            bone: self.bone,
            bone_rendering: self.bone_rendering,
            load_profile: self.load_profile,
            color_noise_sigma: self.color_noise_sigma,
            colormap: Colormap::elastography(),
            seed: self.seed,
            allow_clipping: self.allow_clipping,
            colorbar_width: self.colorbar_width,
            emit_bmode: self.emit_bmode,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        load_toml(path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scene always serializes")
    }
}

pub fn load_recipe(path: &Path) -> Result<CohortRecipe> {
    load_toml(path)
}

pub fn recipe_to_toml(recipe: &CohortRecipe) -> String {
    toml::to_string_pretty(recipe).expect("recipe always serializes")
}

fn load_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    toml::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
