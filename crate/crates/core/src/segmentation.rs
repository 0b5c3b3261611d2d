//! Region segmentation.
//!
//! The chain runs in four steps:
//!
//! 1. [`suppress_bmode`] keeps only pixels that carry elastography colour.
//! 2. [`find_skin_line`] looks, per column, for the thin uncoloured band
//!    that separates the standoff pad from the skin.
//! 3. [`split_standoff_tissue`] labels everything above that band as
//!    standoff and everything below as tissue.
//! 4. [`remove_bone`] relabels deep, stiff tissue as bone once QS is known.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{ElastogramFrame, Grid, QsMap, Region};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SegmentationParams {
    /// Minimum `max - min` channel spread for a pixel to count as overlay
    /// colour when no B-mode raster is available.
    pub saturation_threshold: u8,
    /// Minimum per-channel difference from the B-mode raster.
    pub residual_threshold: u8,
    /// Minimum skin gap height in rows.
    pub gap_min: usize,
    /// Fraction of columns that must yield a skin line.
    pub min_valid_columns: f64,
    /// Bone candidates must lie below this fraction of the column's tissue depth.
    pub bone_depth_fraction: f64,
    /// Bone candidates must have QS at or below this percentile of tissue QS.
    pub bone_qs_percentile: f64,
    /// Bone candidates must also have QS at or below this fraction of the
    /// median tissue QS. Keeps homogeneous tissue from being read as bone.
    pub bone_max_qs_ratio: f64,
    /// Bone components smaller than this revert to tissue.
    pub bone_min_area: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            saturation_threshold: 25,
            residual_threshold: 20,
            gap_min: 3,
            min_valid_columns: 0.5,
            bone_depth_fraction: 0.6,
            bone_qs_percentile: 10.0,
            bone_max_qs_ratio: 0.5,
            bone_min_area: 25,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<()> {
        if self.gap_min == 0 {
            return Err(Error::InvalidParameter {
                name: "gap_min",
                reason: "must be at least 1",
            });
        }
        if !(0.0..=1.0).contains(&self.min_valid_columns) {
            return Err(Error::InvalidParameter {
                name: "min_valid_columns",
                reason: "must be a fraction in [0, 1]",
            });
        }
        if !(0.0..1.0).contains(&self.bone_depth_fraction) {
            return Err(Error::InvalidParameter {
                name: "bone_depth_fraction",
                reason: "must be in [0, 1)",
            });
        }
        if !(self.bone_qs_percentile > 0.0 && self.bone_qs_percentile <= 100.0) {
            return Err(Error::InvalidParameter {
                name: "bone_qs_percentile",
                reason: "must be in (0, 100]",
            });
        }
        if !(self.bone_max_qs_ratio > 0.0) {
            return Err(Error::InvalidParameter {
                name: "bone_max_qs_ratio",
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

/// Marks pixels that carry elastography colour.
///
/// With a B-mode raster the mark is `max_c |rgb_c - bmode| > residual_threshold`;
/// without one it is `max(rgb) - min(rgb) > saturation_threshold`.
pub fn suppress_bmode(frame: &ElastogramFrame, params: &SegmentationParams) -> Grid<bool> {
    let px = frame.pixels();
    match frame.bmode() {
        Some(bmode) => Grid::from_fn(px.width(), px.height(), |x, y| {
            let g = *bmode.get(x, y) as i16;
            let residual = px
                .get(x, y)
                .0
                .iter()
                .map(|&c| (c as i16 - g).unsigned_abs())
                .max()
                .unwrap_or(0);
            residual > params.residual_threshold as u16
        }),
        None => px.map(|c| c.saturation() > params.saturation_threshold),
    }
}

/// Rows `[start, end)` of the skin gap in one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapSpan {
    pub start: usize,
    pub end: usize,
}

/// Per-column skin gap; `None` marks a column without a usable gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkinLine {
    pub columns: Vec<Option<GapSpan>>,
}

impl SkinLine {
    pub fn valid_count(&self) -> usize {
        self.columns.iter().filter(|c| c.is_some()).count()
    }

    /// Skin line row per column (first gap row).
    pub fn rows(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        self.columns.iter().map(|c| c.map(|g| g.start))
    }
}

fn column_gap(mask: &Grid<bool>, x: usize, gap_min: usize) -> Option<GapSpan> {
    let h = mask.height();
    let first = (0..h).find(|&y| *mask.get(x, y))?;
    let mut y = first;
    while y < h {
        if *mask.get(x, y) {
            y += 1;
            continue;
        }
        let start = y;
        while y < h && !*mask.get(x, y) {
            y += 1;
        }
        if y == h {
            return None;
        }
        if y - start >= gap_min {
            return Some(GapSpan { start, end: y });
        }
    }
    None
}

/// Finds the skin gap in every column of the overlay mask.
pub fn find_skin_line(mask: &Grid<bool>, params: &SegmentationParams) -> Result<SkinLine> {
    let columns: Vec<_> = (0..mask.width())
        .map(|x| column_gap(mask, x, params.gap_min))
        .collect();
    let line = SkinLine { columns };
    let required = required_columns(mask.width(), params.min_valid_columns);
    let found = line.valid_count();
    if found < required || found == 0 {
        return Err(Error::NoSkinLineFound {
            found,
            required: required.max(1),
        });
    }
    Ok(line)
}

fn required_columns(width: usize, fraction: f64) -> usize {
    libm::ceil(width as f64 * fraction) as usize
}

/// Labels standoff, skin gap and tissue from the overlay mask and skin line.
/// Columns without a skin line are entirely `NoData`.
pub fn split_standoff_tissue(mask: &Grid<bool>, skin: &SkinLine) -> Grid<Region> {
    Grid::from_fn(mask.width(), mask.height(), |x, y| {
        let Some(gap) = skin.columns[x] else {
            return Region::NoData;
        };
        if y >= gap.start && y < gap.end {
            Region::SkinGap
        } else if !*mask.get(x, y) {
            Region::NoData
        } else if y < gap.start {
            Region::Standoff
        } else {
            Region::Tissue
        }
    })
}

/// Nearest-rank percentile of an ascending slice.
fn nearest_rank(sorted: &[u8], percentile: f64) -> u8 {
    let n = sorted.len();
    let k = libm::ceil(percentile / 100.0 * n as f64) as usize;
    sorted[k.clamp(1, n) - 1]
}

/// Relabels deep, stiff tissue as bone and zeroes its QS.
///
/// Candidates are tissue pixels deeper than `bone_depth_fraction` of the
/// column's tissue span whose QS is at or below both the
/// `bone_qs_percentile` of tissue QS and `bone_max_qs_ratio` times the
/// median. Candidates are dilated by one pixel into neighbouring tissue
/// and 8-connected components (merged with any existing bone) smaller than
/// `bone_min_area` revert to tissue. Low QS is stiff under the
/// strainability-increasing scale.
///
/// Existing bone pixels count as QS 0 in the percentile, which makes the
/// operation idempotent.
pub fn remove_bone(qs: QsMap, params: &SegmentationParams) -> QsMap {
    let (mut values, mut labels) = qs.into_parts();
    let (w, h) = (values.width(), values.height());

    let mut dist: Vec<u8> = labels
        .iter()
        .filter_map(|(x, y, &l)| match l {
            Region::Bone => Some(0),
            Region::Tissue if *values.get(x, y) > 0 => Some(*values.get(x, y)),
            _ => None,
        })
        .collect();
    if dist.is_empty() {
        return QsMap::new(values, labels).expect("labels unchanged");
    }
    dist.sort_unstable();
    let pct = nearest_rank(&dist, params.bone_qs_percentile) as f64;
    let cap = params.bone_max_qs_ratio * nearest_rank(&dist, 50.0) as f64;
    let threshold = pct.min(cap);

    let mut candidate = Grid::filled(w, h, false);
    let mut any = false;
    for x in 0..w {
        let span = (0..h).filter(|&y| matches!(labels.get(x, y), Region::Tissue | Region::Bone));
        let (Some(top), Some(bottom)) = (span.clone().min(), span.max()) else {
            continue;
        };
        let depth = (bottom - top + 1) as f64;
        for y in top..=bottom {
            let v = *values.get(x, y);
            if *labels.get(x, y) == Region::Tissue
                && v > 0
                && (v as f64) <= threshold
                && (y - top) as f64 >= params.bone_depth_fraction * depth
            {
                candidate.set(x, y, true);
                any = true;
            }
        }
    }
    if !any {
        return QsMap::new(values, labels).expect("labels unchanged");
    }

    // One-pixel dilation into tissue.
    let mut grown = candidate.clone();
    for (x, y, &c) in candidate.iter() {
        if !c {
            continue;
        }
        for (nx, ny) in neighbours8(x, y, w, h) {
            if *labels.get(nx, ny) == Region::Tissue {
                grown.set(nx, ny, true);
            }
        }
    }

    let member = Grid::from_fn(w, h, |x, y| *grown.get(x, y) || *labels.get(x, y) == Region::Bone);
    let mut seen = Grid::filled(w, h, false);
    let mut stack = Vec::new();
    let mut component = Vec::new();
    for y0 in 0..h {
        for x0 in 0..w {
            if !*member.get(x0, y0) || *seen.get(x0, y0) {
                continue;
            }
            component.clear();
            seen.set(x0, y0, true);
            stack.push((x0, y0));
            while let Some((x, y)) = stack.pop() {
                component.push((x, y));
                for (nx, ny) in neighbours8(x, y, w, h) {
                    if *member.get(nx, ny) && !*seen.get(nx, ny) {
                        seen.set(nx, ny, true);
                        stack.push((nx, ny));
                    }
                }
            }
            if component.len() >= params.bone_min_area {
                for &(x, y) in &component {
                    labels.set(x, y, Region::Bone);
                    values.set(x, y, 0);
                }
            }
        }
    }

    QsMap::new(values, labels).expect("bone pixels are zeroed")
}

fn neighbours8(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    let mut out: [(usize, usize); 8] = [(0, 0); 8];
    let mut n = 0;
    for dy in [-1i64, 0, 1] {
        for dx in [-1i64, 0, 1] {
            if dx == 0 && dy == 0 {
                continue;
            }
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                out[n] = (nx as usize, ny as usize);
                n += 1;
            }
        }
    }
    out.into_iter().take(n)
}

/// Checks the vertical ordering Standoff < SkinGap < Tissue in every column.
pub fn column_order_holds(labels: &Grid<Region>) -> bool {
    (0..labels.width()).all(|x| {
        let rows = |r: Region| (0..labels.height()).filter(move |&y| *labels.get(x, y) == r);
        let standoff_max = rows(Region::Standoff).max();
        let gap_min = rows(Region::SkinGap).min();
        let gap_max = rows(Region::SkinGap).max();
        let tissue_min = rows(Region::Tissue).chain(rows(Region::Bone)).min();
        let ok_sg = match (standoff_max, gap_min) {
            (Some(s), Some(g)) => s < g,
            _ => true,
        };
        let ok_gt = match (gap_max, tissue_min) {
            (Some(g), Some(t)) => g < t,
            _ => true,
        };
        let ok_st = match (standoff_max, tissue_min) {
            (Some(s), Some(t)) => s < t,
            _ => true,
        };
        ok_sg && ok_gt && ok_st
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Rgb;

    fn column_mask(h: usize, marked: impl Fn(usize) -> bool) -> Grid<bool> {
        Grid::from_fn(1, h, |_, y| marked(y))
    }

    #[test]
    fn gray_pixel_unmarked_red_marked() {
        let mut px = Grid::filled(64, 64, Rgb::gray(90));
        px.set(3, 3, Rgb::new(200, 30, 30));
        let frame = ElastogramFrame::new(px, None, None).unwrap();
        let m = suppress_bmode(&frame, &SegmentationParams::default());
        assert!(*m.get(3, 3));
        assert!(!*m.get(0, 0));
        assert_eq!(m.as_slice().iter().filter(|&&b| b).count(), 1);
    }

    #[test]
    fn bmode_equal_to_gray_frame_marks_nothing() {
        let px = Grid::from_fn(64, 64, |x, y| Rgb::gray(((x * 7 + y * 13) % 256) as u8));
        let bm = px.map(|c| c.0[0]);
        let frame = ElastogramFrame::new(px, Some(bm), None).unwrap();
        let m = suppress_bmode(&frame, &SegmentationParams::default());
        assert!(m.as_slice().iter().all(|&b| !b));
    }

    #[test]
    fn fully_marked_column_has_no_gap() {
        let m = column_mask(200, |_| true);
        assert_eq!(column_gap(&m, 0, 3), None);
    }

    #[test]
    fn gap_at_row_forty() {
        let m = column_mask(200, |y| !(40..44).contains(&y));
        assert_eq!(column_gap(&m, 0, 3), Some(GapSpan { start: 40, end: 44 }));
    }

    #[test]
    fn short_dropout_is_skipped() {
        let m = column_mask(100, |y| !(10..12).contains(&y) && !(30..35).contains(&y));
        assert_eq!(column_gap(&m, 0, 3), Some(GapSpan { start: 30, end: 35 }));
    }

    #[test]
    fn gap_must_be_followed_by_colour() {
        let m = column_mask(100, |y| y < 50);
        assert_eq!(column_gap(&m, 0, 3), None);
    }

    #[test]
    fn leading_unmarked_rows_are_not_a_gap() {
        let m = column_mask(100, |y| y >= 10 && !(40..44).contains(&y));
        assert_eq!(column_gap(&m, 0, 3), Some(GapSpan { start: 40, end: 44 }));
    }

    #[test]
    fn too_few_columns_errors() {
        let m = Grid::from_fn(10, 100, |x, y| x < 4 || !(40..44).contains(&y));
        // columns 0..4 fully marked, 4..10 have a gap: 6 of 10
        let p = SegmentationParams::default();
        assert_eq!(find_skin_line(&m, &p).unwrap().valid_count(), 6);
        let m = Grid::from_fn(10, 100, |x, y| x < 6 || !(40..44).contains(&y));
        assert_eq!(
            find_skin_line(&m, &p),
            Err(Error::NoSkinLineFound {
                found: 4,
                required: 5
            })
        );
    }

    #[test]
    fn split_labels_column() {
        let mask = Grid::from_fn(2, 100, |_, y| !(40..44).contains(&y));
        let skin = SkinLine {
            columns: alloc::vec![Some(GapSpan { start: 40, end: 44 }), None],
        };
        let labels = split_standoff_tissue(&mask, &skin);
        assert_eq!(*labels.get(0, 39), Region::Standoff);
        assert_eq!(*labels.get(0, 40), Region::SkinGap);
        assert_eq!(*labels.get(0, 43), Region::SkinGap);
        assert_eq!(*labels.get(0, 44), Region::Tissue);
        assert!((0..100).all(|y| *labels.get(1, y) == Region::NoData));
        assert!(column_order_holds(&labels));
    }

    fn tissue_map(w: usize, h: usize, qs: impl Fn(usize, usize) -> u8) -> QsMap {
        let labels = Grid::filled(w, h, Region::Tissue);
        QsMap::new(Grid::from_fn(w, h, qs), labels).unwrap()
    }

    #[test]
    fn homogeneous_tissue_has_no_bone() {
        let m = tissue_map(20, 40, |_, _| 60);
        let out = remove_bone(m.clone(), &SegmentationParams::default());
        assert_eq!(out, m);
    }

    #[test]
    fn isolated_stiff_pixel_reverts() {
        let m = tissue_map(20, 40, |x, y| if (x, y) == (10, 35) { 2 } else { 60 });
        let out = remove_bone(m.clone(), &SegmentationParams::default());
        assert_eq!(out, m);
    }

    #[test]
    fn deep_stiff_block_becomes_bone() {
        let m = tissue_map(30, 40, |x, y| if (10..20).contains(&x) && y >= 32 { 1 } else { 60 });
        let out = remove_bone(m, &SegmentationParams::default());
        let bone = out
            .labels()
            .iter()
            .filter(|(_, _, &l)| l == Region::Bone)
            .count();
        // 10x8 block plus a one-pixel ring on the sides and top.
        assert_eq!(bone, 12 * 9);
        assert_eq!(*out.values().get(15, 35), 0);
        assert_eq!(*out.labels().get(15, 35), Region::Bone);
        assert_eq!(*out.labels().get(5, 35), Region::Tissue);
        let again = remove_bone(out.clone(), &SegmentationParams::default());
        assert_eq!(again, out);
    }

    #[test]
    fn shallow_stiff_block_is_kept() {
        let m = tissue_map(30, 40, |x, y| if (10..20).contains(&x) && y < 8 { 1 } else { 60 });
        let out = remove_bone(m.clone(), &SegmentationParams::default());
        assert_eq!(out, m);
    }
}
