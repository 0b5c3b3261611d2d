//! Single-frame analysis: calibration, segmentation, quantification and
//! gradients in order.

use crate::calibration::{extract_color_scale, ColorbarRoi};
use crate::error::Result;
use crate::gradients::{self, GradientParams};
use crate::model::{ColorScale, ElastogramFrame, GradientField, Grid, QsMap, Region, RsMap};
use crate::quantify::{column_reference, compute_qs, compute_rs, QuantifyParams};
use crate::segmentation::{
    find_skin_line, remove_bone, split_standoff_tissue, suppress_bmode, SegmentationParams, SkinLine,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisParams {
    pub colorbar: ColorbarRoi,
    pub max_match_distance: f64,
    pub segmentation: SegmentationParams,
    pub quantify: QuantifyParams,
    pub gradients: GradientParams,
}

/// Every intermediate product of [`analyze_frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAnalysis {
    pub scale: ColorScale,
    pub overlay: Grid<bool>,
    pub skin_line: SkinLine,
    pub qs: QsMap,
    pub rs: RsMap,
    pub field: GradientField,
    pub n_valid_pixels: usize,
    /// Columns holding tissue whose standoff reference was rejected.
    pub column_exclusion_count: usize,
}

/// Runs the full per-frame chain. A precomputed `scale` skips calibration.
pub fn analyze_frame(
    frame: &ElastogramFrame,
    params: &AnalysisParams,
    scale: Option<&ColorScale>,
) -> Result<FrameAnalysis> {
    let scale = match scale {
        Some(s) => s.clone(),
        None => extract_color_scale(frame, &params.colorbar, params.max_match_distance)?,
    };
    let overlay = suppress_bmode(frame, &params.segmentation);
    let skin_line = find_skin_line(&overlay, &params.segmentation)?;
    let labels = split_standoff_tissue(&overlay, &skin_line);
    let qs = compute_qs(frame, &labels, &scale)?;
    let qs = remove_bone(qs, &params.segmentation);
    let reference = column_reference(&qs, &params.quantify)?;
    let rs = compute_rs(&qs, &reference);
    let field = gradients::compute(&rs, &params.gradients)?;

    let column_exclusion_count = (0..qs.width())
        .filter(|&x| {
            reference[x] == 0.0 && (0..qs.height()).any(|y| *qs.labels().get(x, y) == Region::Tissue)
        })
        .count();
    let n_valid_pixels = rs.valid_count();
    Ok(FrameAnalysis {
        scale,
        overlay,
        skin_line,
        qs,
        rs,
        field,
        n_valid_pixels,
        column_exclusion_count,
    })
}
