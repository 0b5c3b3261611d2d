//! Synthetic elastograms with exact ground truth.
//!
//! A scene is a stack of horizontal bands: a gray margin, the standoff pad,
//! a thin uncoloured skin gap, then layered tissue down to the bottom edge.
//! An optional elliptical bone sits inside the tissue. A colour bar is
//! drawn down the right edge so the same frame can be calibrated.
//!
//! Uneven probe pressure is modelled as a per-column multiplier applied to
//! both standoff and tissue strainability before rendering. Standoff
//! normalization should cancel it exactly, which is what the ground-truth
//! RS field encodes.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::calibration::{bar_bin, bin_qs, BarOrientation, ColorbarRoi};
use crate::error::{Error, Result};
use crate::model::{
    ColorScale, ElastogramFrame, FrameMeta, Grid, Group, Region, Rgb, ScaleEntry, Site, QS_MAX,
};
use crate::segmentation::GapSpan;

/// A 100-entry rendering colormap, indexed by QS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Colormap {
    colors: Vec<Rgb>,
}

impl Colormap {
    /// Red (QS 1, stiff) through yellow, green and cyan to blue (QS 100,
    /// soft). Injective; neighbouring entries are 8 to 11 RGB units apart.
    pub fn elastography() -> Self {
        let colors = (1..=QS_MAX)
            .map(|q| {
                let p = 4.0 * (q - 1) as f64 / (QS_MAX - 1) as f64;
                let ch = |v: f64| libm::round(255.0 * v.clamp(0.0, 1.0)) as u8;
                match p {
                    p if p < 1.0 => Rgb::new(255, ch(p), 0),
                    p if p < 2.0 => Rgb::new(ch(2.0 - p), 255, 0),
                    p if p < 3.0 => Rgb::new(0, 255, ch(p - 2.0)),
                    p => Rgb::new(0, ch(4.0 - p), 255),
                }
            })
            .collect();
        Colormap { colors }
    }

    /// `colors[0]` is QS 1. Exactly 100 colours are required.
    pub fn from_colors(colors: Vec<Rgb>) -> Result<Self> {
        if colors.len() != QS_MAX as usize {
            return Err(Error::InvalidParameter {
                name: "colormap",
                reason: "needs exactly 100 colours",
            });
        }
        Ok(Colormap { colors })
    }

    pub fn color(&self, qs: u8) -> Rgb {
        self.colors[(qs.clamp(1, QS_MAX) - 1) as usize]
    }

    pub fn colors(&self) -> &[Rgb] {
        &self.colors
    }

    /// The exact lookup table this colormap renders with.
    pub fn scale(&self, max_match_distance: f64) -> ColorScale {
        let entries = self
            .colors
            .iter()
            .enumerate()
            .map(|(i, &color)| ScaleEntry {
                qs: i as u8 + 1,
                color,
            })
            .collect();
        ColorScale::new(entries, max_match_distance).expect("colormap has distinct colours")
    }
}

impl Default for Colormap {
    fn default() -> Self {
        Colormap::elastography()
    }
}

/// Per-column pressure multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LoadProfile {
    Uniform,
    /// 1.0 at the centre column, falling parabolically to `edge_factor` at
    /// both edges.
    Parabolic { edge_factor: f64 },
}

impl LoadProfile {
    pub fn factor(&self, x: usize, columns: usize) -> f64 {
        match *self {
            LoadProfile::Uniform => 1.0,
            LoadProfile::Parabolic { edge_factor } => {
                if columns < 2 {
                    return 1.0;
                }
                let c = (columns - 1) as f64 / 2.0;
                let u = (x as f64 - c) / c;
                edge_factor + (1.0 - edge_factor) * (1.0 - u * u)
            }
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            LoadProfile::Uniform => true,
            LoadProfile::Parabolic { edge_factor } => edge_factor.is_finite() && edge_factor > 0.0,
        }
    }
}

/// Tissue band spanning `[depth_start, depth_end)` of the tissue depth.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TissueLayer {
    pub depth_start: f64,
    pub depth_end: f64,
    pub strainability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

impl Ellipse {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let dx = (x as f64 - self.cx) / self.rx;
        let dy = (y as f64 - self.cy) / self.ry;
        dx * dx + dy * dy <= 1.0
    }
}

/// How bone pixels are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BoneRendering {
    /// Stiffest colormap entry (QS 1).
    #[default]
    Stiff,
    /// Plain B-mode gray, no overlay colour.
    Grayscale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomScene {
    pub width: usize,
    pub height: usize,
    /// Gray rows above the standoff.
    pub top_margin: usize,
    pub standoff_thickness: usize,
    pub skin_gap_thickness: usize,
    pub standoff_strainability: f64,
    pub tissue_layers: Vec<TissueLayer>,
    pub bone: Option<Ellipse>,
    pub bone_rendering: BoneRendering,
    pub load_profile: LoadProfile,
    pub color_noise_sigma: f64,
    pub colormap: Colormap,
    pub seed: u64,
    pub allow_clipping: bool,
    pub colorbar_width: usize,
    pub emit_bmode: bool,
}

/// Gray columns between the imaging area and the colour bar.
const BAR_SEPARATOR: usize = 2;
/// Gray rows above and below the colour bar.
const BAR_MARGIN: usize = 4;

impl PhantomScene {
    /// A 640x480 homogeneous scene: standoff and tissue both at 60.
    pub fn homogeneous(strainability: f64) -> Self {
        PhantomScene {
            width: 640,
            height: 480,
            top_margin: 8,
            standoff_thickness: 60,
            skin_gap_thickness: 4,
            standoff_strainability: strainability,
            tissue_layers: alloc::vec![TissueLayer {
                depth_start: 0.0,
                depth_end: 1.0,
                strainability,
            }],
            bone: None,
            bone_rendering: BoneRendering::Stiff,
            load_profile: LoadProfile::Uniform,
            color_noise_sigma: 0.0,
            colormap: Colormap::elastography(),
            seed: 0,
            allow_clipping: false,
            colorbar_width: 8,
            emit_bmode: false,
        }
    }

    /// Columns `[0, n)` that carry the elastography image.
    pub fn image_columns(&self) -> usize {
        self.width.saturating_sub(self.colorbar_width + BAR_SEPARATOR)
    }

    pub fn skin_gap(&self) -> GapSpan {
        let start = self.top_margin + self.standoff_thickness;
        GapSpan {
            start,
            end: start + self.skin_gap_thickness,
        }
    }

    pub fn tissue_top(&self) -> usize {
        self.skin_gap().end
    }

    pub fn tissue_rows(&self) -> usize {
        self.height.saturating_sub(self.tissue_top())
    }

    pub fn colorbar_roi(&self) -> ColorbarRoi {
        ColorbarRoi {
            x: self.width - self.colorbar_width,
            y: BAR_MARGIN,
            width: self.colorbar_width,
            height: self.height - 2 * BAR_MARGIN,
            orientation: BarOrientation::SoftAtTop,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.standoff_thickness == 0 {
            return Err(Error::DegenerateScene("standoff has zero thickness"));
        }
        if self.skin_gap_thickness == 0 {
            return Err(Error::DegenerateScene("skin gap has zero thickness"));
        }
        if self.tissue_top() >= self.height {
            return Err(Error::DegenerateScene("no rows left for tissue"));
        }
        if self.colorbar_width == 0 || self.image_columns() == 0 {
            return Err(Error::DegenerateScene("no columns left for the image"));
        }
        if self.height <= 2 * BAR_MARGIN {
            return Err(Error::DegenerateScene("frame too short for a colour bar"));
        }
        if self.tissue_layers.is_empty() {
            return Err(Error::DegenerateScene("no tissue layers"));
        }
        let mut edge = 0.0;
        for layer in &self.tissue_layers {
            if (layer.depth_start - edge).abs() > 1e-9 || layer.depth_end <= layer.depth_start {
                return Err(Error::DegenerateScene("tissue layers must partition [0, 1] in order"));
            }
            edge = layer.depth_end;
        }
        if (edge - 1.0).abs() > 1e-9 {
            return Err(Error::DegenerateScene("tissue layers must partition [0, 1] in order"));
        }
        if !self.load_profile.is_valid() {
            return Err(Error::InvalidParameter {
                name: "load_profile",
                reason: "edge factor must be positive",
            });
        }
        if !(self.color_noise_sigma >= 0.0 && self.color_noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "color_noise_sigma",
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    /// Base strainability of the tissue layer at a tissue row.
    fn layer_value(&self, tissue_row: usize) -> f64 {
        let f = (tissue_row as f64 + 0.5) / self.tissue_rows() as f64;
        self.tissue_layers
            .iter()
            .find(|l| f >= l.depth_start && f < l.depth_end)
            .or(self.tissue_layers.last())
            .map(|l| l.strainability)
            .unwrap_or(0.0)
    }
}

/// Everything the renderer knows about a scene, pixel by pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Loaded strainability of standoff and tissue pixels.
    pub strainability: Grid<Option<f64>>,
    /// Rendered QS level (0 where nothing was rendered from the scene).
    pub qs: Grid<u8>,
    pub labels: Grid<Region>,
    /// Pixels drawn in overlay colour, colour bar included.
    pub overlay: Grid<bool>,
    /// Tissue strainability over standoff strainability.
    pub rs: Grid<Option<f64>>,
    pub colorbar: ColorbarRoi,
    pub skin_gap: GapSpan,
}

pub fn render(scene: &PhantomScene) -> Result<(ElastogramFrame, GroundTruth)> {
    scene.validate()?;
    let (w, h) = (scene.width, scene.height);
    let cols = scene.image_columns();
    let gap = scene.skin_gap();
    let tissue_top = scene.tissue_top();
    let roi = scene.colorbar_roi();

    let level = |v: f64| -> Result<u8> {
        if !(1.0..=QS_MAX as f64).contains(&v) && !scene.allow_clipping {
            return Err(Error::ClippingRejected { value: v });
        }
        Ok(libm::round(v).clamp(1.0, QS_MAX as f64) as u8)
    };

    let mut strainability = Grid::filled(w, h, None);
    let mut qs = Grid::filled(w, h, 0u8);
    let mut labels = Grid::filled(w, h, Region::NoData);
    let mut overlay = Grid::filled(w, h, false);
    let mut rs = Grid::filled(w, h, None);
    let mut color: Grid<Option<Rgb>> = Grid::filled(w, h, None);

    for x in 0..cols {
        let load = scene.load_profile.factor(x, cols);
        for y in scene.top_margin..h {
            if y < gap.start {
                let v = scene.standoff_strainability * load;
                let q = level(v)?;
                strainability.set(x, y, Some(v));
                qs.set(x, y, q);
                labels.set(x, y, Region::Standoff);
                overlay.set(x, y, true);
                color.set(x, y, Some(scene.colormap.color(q)));
            } else if y < gap.end {
                labels.set(x, y, Region::SkinGap);
            } else if scene.bone.is_some_and(|b| b.contains(x, y)) {
                labels.set(x, y, Region::Bone);
                if scene.bone_rendering == BoneRendering::Stiff {
                    overlay.set(x, y, true);
                    color.set(x, y, Some(scene.colormap.color(1)));
                }
            } else {
                let base = scene.layer_value(y - tissue_top);
                let v = base * load;
                let q = level(v)?;
                strainability.set(x, y, Some(v));
                qs.set(x, y, q);
                labels.set(x, y, Region::Tissue);
                overlay.set(x, y, true);
                color.set(x, y, Some(scene.colormap.color(q)));
                rs.set(x, y, Some(base / scene.standoff_strainability));
            }
        }
    }

    for y in roi.y..roi.y + roi.height {
        let q = bin_qs(bar_bin(y - roi.y, roi.height), roi.orientation);
        for x in roi.x..roi.x + roi.width {
            overlay.set(x, y, true);
            color.set(x, y, Some(scene.colormap.color(q)));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    let bmode = Grid::from_fn(w, h, |_, _| rng.random_range(20u8..=120));
    let noise = (scene.color_noise_sigma > 0.0)
        .then(|| Normal::new(0.0, scene.color_noise_sigma).expect("sigma checked"));
    let pixels = Grid::from_fn(w, h, |x, y| match *color.get(x, y) {
        None => Rgb::gray(*bmode.get(x, y)),
        Some(Rgb(c)) => match &noise {
            None => Rgb(c),
            Some(n) => Rgb(c.map(|v| {
                let noisy = v as f64 + n.sample(&mut rng);
                libm::round(noisy).clamp(0.0, 255.0) as u8
            })),
        },
    });

    let frame = ElastogramFrame::new(pixels, scene.emit_bmode.then_some(bmode), None)?;
    Ok((
        frame,
        GroundTruth {
            strainability,
            qs,
            labels,
            overlay,
            rs,
            colorbar: roi,
            skin_gap: gap,
        },
    ))
}

/// Distribution of the target superior-inferior RS gradient for one group
/// at one site: `mean + subject effect + frame effect`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GradientDistribution {
    pub mean_gy: f64,
    pub subject_sd: f64,
    pub frame_sd: f64,
}

impl Default for GradientDistribution {
    fn default() -> Self {
        GradientDistribution {
            mean_gy: 0.0,
            subject_sd: 0.08,
            frame_sd: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SiteEffect {
    pub site: Site,
    pub non_ulcerated: GradientDistribution,
    pub ulcerated: GradientDistribution,
}

/// Recipe for a labelled synthetic cohort.
///
/// Each frame's tissue is a vertical RS ramp centred on `mean_rs` whose
/// slope (RS per `spacing_y` unit) is drawn from the group's
/// [`GradientDistribution`]. Analyse the frames with the same `spacing_y`
/// to recover the drawn slopes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CohortRecipe {
    pub non_ulcerated_subjects: usize,
    pub ulcerated_subjects: usize,
    pub frames_per_site: usize,
    pub sites: Vec<Site>,
    /// Sites not listed use `default_effect` for both groups.
    pub site_effects: Vec<SiteEffect>,
    pub default_effect: GradientDistribution,
    pub width: usize,
    pub height: usize,
    pub standoff_thickness: usize,
    pub skin_gap_thickness: usize,
    pub standoff_strainability: f64,
    pub mean_rs: f64,
    pub spacing_y: f64,
    /// Per-frame parabolic edge factor is drawn uniformly from this range.
    pub load_edge_range: (f64, f64),
    pub color_noise_sigma: f64,
    pub seed: u64,
}

impl Default for CohortRecipe {
    fn default() -> Self {
        CohortRecipe {
            non_ulcerated_subjects: 30,
            ulcerated_subjects: 9,
            frames_per_site: 3,
            sites: Site::ALL.to_vec(),
            site_effects: Vec::new(),
            default_effect: GradientDistribution::default(),
            width: 96,
            height: 128,
            standoff_thickness: 20,
            skin_gap_thickness: 3,
            standoff_strainability: 40.0,
            mean_rs: 1.2,
            spacing_y: 0.01,
            load_edge_range: (0.6, 1.0),
            color_noise_sigma: 2.0,
            seed: 0,
        }
    }
}

impl CohortRecipe {
    fn effect(&self, site: Site, group: Group) -> GradientDistribution {
        self.site_effects
            .iter()
            .find(|e| e.site == site)
            .map(|e| match group {
                Group::NonUlcerated => e.non_ulcerated,
                Group::Ulcerated => e.ulcerated,
            })
            .unwrap_or(self.default_effect)
    }
}

/// One frame of a synthetic cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFrame {
    pub meta: FrameMeta,
    pub frame: ElastogramFrame,
    /// Slope that was rendered, after clamping to the renderable range.
    pub target_gy: f64,
}

const TOP_MARGIN: usize = 4;

/// Generates a labelled cohort: every subject contributes
/// `frames_per_site` frames at each site in `recipe.sites`.
pub fn synth_cohort(recipe: &CohortRecipe) -> Result<Vec<SyntheticFrame>> {
    let (edge_lo, edge_hi) = recipe.load_edge_range;
    if !(edge_lo > 0.0 && edge_lo <= edge_hi && edge_hi <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "load_edge_range",
            reason: "must satisfy 0 < lo <= hi <= 1",
        });
    }
    if !(recipe.spacing_y > 0.0) {
        return Err(Error::InvalidSpacing);
    }
    let s = recipe.standoff_strainability;
    let tissue_rows = recipe
        .height
        .checked_sub(TOP_MARGIN + recipe.standoff_thickness + recipe.skin_gap_thickness)
        .filter(|&d| d >= 2)
        .ok_or(Error::DegenerateScene("no rows left for tissue"))?;
    let span = (tissue_rows - 1) as f64 * recipe.spacing_y;
    // Keep every rendered value inside [1, 100] under the weakest load.
    let rs_lo = 1.0 / (s * edge_lo) + 1e-9;
    let rs_hi = QS_MAX as f64 / s - 1e-9;
    let half_range = (recipe.mean_rs - rs_lo).min(rs_hi - recipe.mean_rs);
    if half_range <= 0.0 {
        return Err(Error::ClippingRejected {
            value: recipe.mean_rs * s,
        });
    }
    let max_slope = 2.0 * half_range / span;

    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = Vec::new();
    for (group, count, prefix) in [
        (Group::NonUlcerated, recipe.non_ulcerated_subjects, "NU"),
        (Group::Ulcerated, recipe.ulcerated_subjects, "U"),
    ] {
        for subject in 0..count {
            let subject_id: String = format!("{prefix}-{:03}", subject + 1);
            for &site in &recipe.sites {
                let dist = recipe.effect(site, group);
                let subject_effect = dist.subject_sd * unit.sample(&mut rng);
                for frame_index in 0..recipe.frames_per_site {
                    let g = dist.mean_gy + subject_effect + dist.frame_sd * unit.sample(&mut rng);
                    let g = g.clamp(-max_slope, max_slope);
                    let edge = if edge_hi > edge_lo {
                        rng.random_range(edge_lo..=edge_hi)
                    } else {
                        edge_lo
                    };
                    let delta = g * span;
                    let layers = (0..tissue_rows)
                        .map(|i| {
                            let f = i as f64 / (tissue_rows - 1) as f64;
                            TissueLayer {
                                depth_start: i as f64 / tissue_rows as f64,
                                depth_end: if i + 1 == tissue_rows {
                                    1.0
                                } else {
                                    (i + 1) as f64 / tissue_rows as f64
                                },
                                strainability: s * (recipe.mean_rs + delta * (f - 0.5)),
                            }
                        })
                        .collect();
                    let scene = PhantomScene {
                        width: recipe.width,
                        height: recipe.height,
                        top_margin: TOP_MARGIN,
                        standoff_thickness: recipe.standoff_thickness,
                        skin_gap_thickness: recipe.skin_gap_thickness,
                        standoff_strainability: s,
                        tissue_layers: layers,
                        bone: None,
                        bone_rendering: BoneRendering::Stiff,
                        load_profile: LoadProfile::Parabolic { edge_factor: edge },
                        color_noise_sigma: recipe.color_noise_sigma,
                        colormap: Colormap::elastography(),
                        seed: rng.next_u64(),
                        allow_clipping: false,
                        colorbar_width: 8,
                        emit_bmode: false,
                    };
                    let meta = FrameMeta {
                        subject_id: subject_id.clone(),
                        site,
                        group,
                        frame_index: frame_index as u32,
                    };
                    let (mut frame, _) = render(&scene)?;
                    frame.meta = Some(meta.clone());
                    out.push(SyntheticFrame {
                        meta,
                        frame,
                        target_gy: g,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The colour bar ROI used by every [`synth_cohort`] frame.
pub fn cohort_colorbar_roi(recipe: &CohortRecipe) -> ColorbarRoi {
    ColorbarRoi {
        x: recipe.width - 8,
        y: BAR_MARGIN,
        width: 8,
        height: recipe.height - 2 * BAR_MARGIN,
        orientation: BarOrientation::SoftAtTop,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn colormap_is_injective() {
        let m = Colormap::elastography();
        for i in 0..100 {
            for j in i + 1..100 {
                assert_ne!(m.colors()[i], m.colors()[j]);
            }
        }
        assert_eq!(m.color(1), Rgb::new(255, 0, 0));
        assert_eq!(m.color(100), Rgb::new(0, 0, 255));
    }

    #[test]
    fn uniform_equal_strainability_gives_unit_rs() {
        let (_, gt) = render(&PhantomScene::homogeneous(60.0)).unwrap();
        let vals: Vec<f64> = gt.rs.as_slice().iter().flatten().copied().collect();
        assert!(!vals.is_empty());
        assert!(vals.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn two_layers_step_at_mid_depth() {
        let mut scene = PhantomScene::homogeneous(80.0);
        scene.tissue_layers = vec![
            TissueLayer {
                depth_start: 0.0,
                depth_end: 0.5,
                strainability: 40.0,
            },
            TissueLayer {
                depth_start: 0.5,
                depth_end: 1.0,
                strainability: 80.0,
            },
        ];
        let (_, gt) = render(&scene).unwrap();
        let top = scene.tissue_top();
        let mid = top + scene.tissue_rows() / 2;
        assert_eq!(*gt.rs.get(10, mid - 1), Some(0.5));
        assert_eq!(*gt.rs.get(10, mid), Some(1.0));
        assert_eq!(*gt.rs.get(10, top), Some(0.5));
        assert_eq!(*gt.rs.get(10, scene.height - 1), Some(1.0));
    }

    #[test]
    fn parabolic_load_cancels_in_truth() {
        let mut scene = PhantomScene::homogeneous(60.0);
        scene.load_profile = LoadProfile::Parabolic { edge_factor: 0.6 };
        let (_, gt) = render(&scene).unwrap();
        let y = scene.tissue_top() + 10;
        assert_ne!(gt.qs.get(0, y), gt.qs.get(scene.image_columns() / 2, y));
        assert!(gt.rs.as_slice().iter().flatten().all(|&v| v == 1.0));
        assert_eq!(*gt.qs.get(0, y), 36);
    }

    #[test]
    fn clipping_is_rejected() {
        let mut scene = PhantomScene::homogeneous(60.0);
        scene.tissue_layers[0].strainability = 120.0;
        assert!(matches!(render(&scene), Err(Error::ClippingRejected { .. })));
        scene.allow_clipping = true;
        assert!(render(&scene).is_ok());
    }

    #[test]
    fn degenerate_scenes() {
        let mut scene = PhantomScene::homogeneous(60.0);
        scene.skin_gap_thickness = 0;
        assert!(matches!(render(&scene), Err(Error::DegenerateScene(_))));
        let mut scene = PhantomScene::homogeneous(60.0);
        scene.tissue_layers[0].depth_end = 0.9;
        assert!(matches!(render(&scene), Err(Error::DegenerateScene(_))));
    }

    #[test]
    fn rendering_is_deterministic() {
        let mut scene = PhantomScene::homogeneous(50.0);
        scene.color_noise_sigma = 5.0;
        scene.emit_bmode = true;
        scene.seed = 17;
        let a = render(&scene).unwrap();
        let b = render(&scene).unwrap();
        assert_eq!(a, b);
        scene.seed = 18;
        let c = render(&scene).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn cohort_counts() {
        let recipe = CohortRecipe::default();
        let frames = synth_cohort(&recipe).unwrap();
        assert_eq!(frames.len(), 468);
        let nu = frames.iter().filter(|f| f.meta.group == Group::NonUlcerated).count();
        assert_eq!(nu, 30 * 4 * 3);
        for site in Site::ALL {
            assert_eq!(frames.iter().filter(|f| f.meta.site == site).count(), 39 * 3);
        }
        assert_eq!(frames[0].meta.subject_id, "NU-001");
        assert_eq!(frames.last().unwrap().meta.subject_id, "U-009");
    }
}
