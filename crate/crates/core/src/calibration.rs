//! Colour bar calibration and colour-to-QS inversion.
//!
//! The bar is sampled along its long axis and split into 100 equal bins.
//! QS is assigned linearly along the bar: the soft end is 100 and the stiff
//! end is 1. The display scale is assumed linear in strain.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{ColorScale, ElastogramFrame, Rgb, ScaleEntry, QS_MAX};

/// Which end of the colour bar shows soft (high-strainability) tissue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BarOrientation {
    #[default]
    SoftAtTop,
    StiffAtTop,
}

/// Location of the on-screen colour bar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ColorbarRoi {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    pub orientation: BarOrientation,
}

impl ColorbarRoi {
    /// Rows below this leave some QS levels without a sample row of their own.
    pub const RECOMMENDED_MIN_HEIGHT: usize = 100;

    pub fn is_undersampled(&self) -> bool {
        self.height < Self::RECOMMENDED_MIN_HEIGHT
    }

    fn fits(&self, width: usize, height: usize) -> bool {
        self.width > 0
            && self.height > 0
            && self.x.checked_add(self.width).is_some_and(|r| r <= width)
            && self.y.checked_add(self.height).is_some_and(|b| b <= height)
    }
}

/// Level index (0 = first sampled row's end) for row `r` of an `h`-row bar.
#[inline]
pub(crate) fn bar_bin(r: usize, h: usize) -> usize {
    r * QS_MAX as usize / h
}

/// QS for level index `bin` given the bar orientation.
#[inline]
pub(crate) fn bin_qs(bin: usize, orientation: BarOrientation) -> u8 {
    match orientation {
        BarOrientation::SoftAtTop => QS_MAX - bin as u8,
        BarOrientation::StiffAtTop => bin as u8 + 1,
    }
}

/// Builds a 100-entry [`ColorScale`] from the colour bar inside `roi`.
///
/// Each row's colour is the mean over the middle third of the ROI columns.
/// Rows are grouped into 100 bins along the bar and averaged; bars shorter
/// than 100 rows are linearly interpolated.
pub fn extract_color_scale(
    frame: &ElastogramFrame,
    roi: &ColorbarRoi,
    max_match_distance: f64,
) -> Result<ColorScale> {
    let px = frame.pixels();
    if !roi.fits(px.width(), px.height()) {
        return Err(Error::RoiOutOfBounds);
    }

    let c0 = roi.x + roi.width / 3;
    let c1 = (roi.x + 2 * roi.width / 3).max(c0 + 1);
    let rows: Vec<[f64; 3]> = (roi.y..roi.y + roi.height)
        .map(|y| {
            let mut acc = [0.0; 3];
            for x in c0..c1 {
                let Rgb(c) = *px.get(x, y);
                for k in 0..3 {
                    acc[k] += c[k] as f64;
                }
            }
            let n = (c1 - c0) as f64;
            acc.map(|v| v / n)
        })
        .collect();

    let h = rows.len();
    let levels = QS_MAX as usize;
    let mut sums = alloc::vec![[0.0f64; 3]; levels];
    let mut counts = alloc::vec![0usize; levels];
    for (r, c) in rows.iter().enumerate() {
        let b = bar_bin(r, h);
        for k in 0..3 {
            sums[b][k] += c[k];
        }
        counts[b] += 1;
    }

    let mut entries = Vec::with_capacity(levels);
    for bin in 0..levels {
        let mean = if counts[bin] > 0 {
            sums[bin].map(|s| s / counts[bin] as f64)
        } else {
            interpolate_rows(&rows, (bin as f64 + 0.5) * h as f64 / levels as f64 - 0.5)
        };
        let color = Rgb(mean.map(|v| libm::round(v).clamp(0.0, 255.0) as u8));
        entries.push(ScaleEntry {
            qs: bin_qs(bin, roi.orientation),
            color,
        });
    }

    let first = entries[0].color;
    if entries.iter().all(|e| e.color == first) {
        return Err(Error::DegenerateColorbar);
    }
    ColorScale::new(entries, max_match_distance)
}

fn interpolate_rows(rows: &[[f64; 3]], pos: f64) -> [f64; 3] {
    let last = rows.len() - 1;
    let pos = pos.clamp(0.0, last as f64);
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(last);
    let t = pos - lo as f64;
    core::array::from_fn(|k| rows[lo][k] * (1.0 - t) + rows[hi][k] * t)
}

/// QS of the nearest scale entry, or 0 when the nearest entry is farther
/// than `max_match_distance`. Ties go to the lower QS.
pub fn invert_color(scale: &ColorScale, color: Rgb) -> u8 {
    let mut best_qs = 0u8;
    let mut best_d = u32::MAX;
    for e in scale.entries() {
        let d = e.color.distance_sq(color);
        if d < best_d {
            best_d = d;
            best_qs = e.qs;
        }
    }
    accept(scale, best_d, best_qs)
}

fn accept(scale: &ColorScale, best_d: u32, best_qs: u8) -> u8 {
    if best_d as f64 > scale.max_match_distance * scale.max_match_distance {
        0
    } else {
        best_qs
    }
}

const CELL_SHIFT: u32 = 5;
const CELLS: usize = 256 >> CELL_SHIFT;

/// Bucketed form of [`invert_color`] with identical results.
///
/// RGB space is cut into cubes. A cube keeps only the entries whose
/// nearest point in the cube is no farther than the smallest worst-case
/// distance of any entry; every other entry is strictly farther than the
/// true nearest for all colours in the cube, so neither the winner nor the
/// tie-break changes.
#[derive(Debug, Clone)]
pub struct ColorInverter<'a> {
    scale: &'a ColorScale,
    /// Candidate entry indices per cube, in QS order.
    candidates: Vec<Vec<u16>>,
}

impl<'a> ColorInverter<'a> {
    pub fn new(scale: &'a ColorScale) -> Self {
        let side = 1u32 << CELL_SHIFT;
        let axis = |v: u8, lo: u32| {
            let (v, hi) = (v as u32, lo + side - 1);
            let near = if v < lo { lo - v } else { v.saturating_sub(hi) };
            let far = v.abs_diff(lo).max(v.abs_diff(hi));
            (near * near, far * far)
        };
        let mut candidates = Vec::with_capacity(CELLS * CELLS * CELLS);
        let mut near = Vec::with_capacity(scale.entries().len());
        for cr in 0..CELLS as u32 {
            for cg in 0..CELLS as u32 {
                for cb in 0..CELLS as u32 {
                    near.clear();
                    let mut bound = u32::MAX;
                    for e in scale.entries() {
                        let [r, g, b] = e.color.0;
                        let (nr, fr) = axis(r, cr * side);
                        let (ng, fg) = axis(g, cg * side);
                        let (nb, fb) = axis(b, cb * side);
                        near.push(nr + ng + nb);
                        bound = bound.min(fr + fg + fb);
                    }
                    let keep = near
                        .iter()
                        .enumerate()
                        .filter(|&(_, &d)| d <= bound)
                        .map(|(i, _)| i as u16)
                        .collect();
                    candidates.push(keep);
                }
            }
        }
        ColorInverter { scale, candidates }
    }

    pub fn invert(&self, color: Rgb) -> u8 {
        let [r, g, b] = color.0.map(|c| (c >> CELL_SHIFT) as usize);
        let entries = self.scale.entries();
        let mut best_qs = 0u8;
        let mut best_d = u32::MAX;
        for &i in &self.candidates[(r * CELLS + g) * CELLS + b] {
            let e = &entries[i as usize];
            let d = e.color.distance_sq(color);
            if d < best_d {
                best_d = d;
                best_qs = e.qs;
            }
        }
        accept(self.scale, best_d, best_qs)
    }
}
