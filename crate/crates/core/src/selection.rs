//! Picks maximum-compression frames from a loading sequence.
//!
//! The standoff pad thins as the probe presses down, so the thinnest
//! standoff marks the most compressed frame. The sequence is split into
//! `k` stretches around evenly spaced anchors (first, ..., last) and the
//! thinnest frame of each stretch is taken. Thicknesses within half a row
//! count as tied; ties go to the frame nearest the anchor.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{ElastogramFrame, Region};
use crate::segmentation::{find_skin_line, split_standoff_tissue, suppress_bmode, SegmentationParams};

const TIE_ROWS: f64 = 0.5;

/// Mean standoff thickness in rows over columns that have a skin line.
pub fn standoff_thickness(frame: &ElastogramFrame, params: &SegmentationParams) -> Result<f64> {
    let mask = suppress_bmode(frame, params);
    let skin = find_skin_line(&mask, params)?;
    let labels = split_standoff_tissue(&mask, &skin);
    let mut total = 0usize;
    let mut columns = 0usize;
    for (x, gap) in skin.columns.iter().enumerate() {
        if gap.is_none() {
            continue;
        }
        columns += 1;
        total += (0..labels.height())
            .filter(|&y| *labels.get(x, y) == Region::Standoff)
            .count();
    }
    if total == 0 {
        return Err(Error::NoStandoffFound);
    }
    Ok(total as f64 / columns as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSuggestion {
    /// Ascending frame indices, at most `k`.
    pub indices: Vec<usize>,
    /// Frames that could not be segmented, with the reason.
    pub skipped: Vec<(usize, Error)>,
}

pub fn suggest_frames(
    frames: &[ElastogramFrame],
    k: usize,
    params: &SegmentationParams,
) -> Result<FrameSuggestion> {
    let mut skipped = Vec::new();
    let thickness: Vec<Option<f64>> = frames
        .iter()
        .enumerate()
        .map(|(i, f)| match standoff_thickness(f, params) {
            Ok(t) => Some(t),
            Err(e) => {
                skipped.push((i, e));
                None
            }
        })
        .collect();
    let indices = pick_spread_minima(&thickness, k)?;
    Ok(FrameSuggestion { indices, skipped })
}

/// Core of [`suggest_frames`] over precomputed thicknesses (`None` = unusable).
pub fn pick_spread_minima(thickness: &[Option<f64>], k: usize) -> Result<Vec<usize>> {
    let n = thickness.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if n < k {
        return Err(Error::SequenceTooShort { len: n, requested: k });
    }
    let anchors: Vec<f64> = (0..k)
        .map(|j| {
            if k == 1 {
                (n - 1) as f64 / 2.0
            } else {
                j as f64 * (n - 1) as f64 / (k - 1) as f64
            }
        })
        .collect();
    let segment_of = |i: usize| -> usize {
        let mut best = 0;
        for (j, a) in anchors.iter().enumerate() {
            if (i as f64 - a).abs() < (i as f64 - anchors[best]).abs() {
                best = j;
            }
        }
        best
    };

    let better = |i: usize, cur: usize, anchor: f64| -> bool {
        let (ti, tc) = (thickness[i].unwrap(), thickness[cur].unwrap());
        if ti < tc - TIE_ROWS {
            return true;
        }
        if ti > tc + TIE_ROWS {
            return false;
        }
        (i as f64 - anchor).abs() < (cur as f64 - anchor).abs()
    };

    let mut picked: Vec<usize> = Vec::new();
    for (j, &anchor) in anchors.iter().enumerate() {
        let mut best: Option<usize> = None;
        for i in (0..n).filter(|&i| segment_of(i) == j && thickness[i].is_some()) {
            best = match best {
                Some(cur) if !better(i, cur, anchor) => Some(cur),
                _ => Some(i),
            };
        }
        if let Some(b) = best {
            picked.push(b);
        }
    }

    // Stretches with nothing usable are filled from the thinnest leftovers.
    while picked.len() < k {
        let next = (0..n)
            .filter(|i| thickness[*i].is_some() && !picked.contains(i))
            .min_by(|&a, &b| thickness[a].unwrap().total_cmp(&thickness[b].unwrap()));
        match next {
            Some(i) => picked.push(i),
            None => break,
        }
    }
    picked.sort_unstable();
    Ok(picked)
}
