//! QS and RS maps.
//!
//! Each tissue pixel is divided by the mean QS of the standoff column
//! directly above it. Columns are treated as pure vertical compression, so
//! tissue column `x` pairs with standoff column `x` and nothing else.
//! Tissue pixels whose colour matched no scale entry (QS 0) are treated as
//! missing rather than as extreme values.

use alloc::vec::Vec;

use crate::calibration::ColorInverter;
use crate::error::{Error, Result};
use crate::model::{ColorScale, ElastogramFrame, Grid, QsMap, Region, RsMap};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct QuantifyParams {
    /// Minimum nonzero standoff pixels for a column to serve as reference.
    pub ref_min_pixels: usize,
    /// Columns whose standoff mean falls below this are excluded.
    pub ref_floor: f64,
}

impl Default for QuantifyParams {
    fn default() -> Self {
        QuantifyParams {
            ref_min_pixels: 3,
            ref_floor: 5.0,
        }
    }
}

/// Inverts the colour of every standoff and tissue pixel. All other
/// regions get QS 0.
pub fn compute_qs(frame: &ElastogramFrame, labels: &Grid<Region>, scale: &ColorScale) -> Result<QsMap> {
    let px = frame.pixels();
    if !px.same_shape(labels) {
        return Err(Error::RasterShape {
            width: px.width(),
            height: px.height(),
            len: labels.as_slice().len(),
        });
    }
    let inverter = ColorInverter::new(scale);
    let values = Grid::from_fn(px.width(), px.height(), |x, y| match labels.get(x, y) {
        Region::Standoff | Region::Tissue => inverter.invert(*px.get(x, y)),
        _ => 0,
    });
    QsMap::new(values, labels.clone())
}

/// Mean nonzero standoff QS per column; 0 for excluded columns.
pub fn column_reference(qs: &QsMap, params: &QuantifyParams) -> Result<Vec<f64>> {
    let (values, labels) = (qs.values(), qs.labels());
    let reference: Vec<f64> = (0..qs.width())
        .map(|x| {
            let (sum, n) = (0..qs.height())
                .filter(|&y| *labels.get(x, y) == Region::Standoff)
                .map(|y| *values.get(x, y))
                .filter(|&v| v > 0)
                .fold((0u64, 0usize), |(s, n), v| (s + v as u64, n + 1));
            if n == 0 || n < params.ref_min_pixels {
                return 0.0;
            }
            let mean = sum as f64 / n as f64;
            if mean < params.ref_floor {
                0.0
            } else {
                mean
            }
        })
        .collect();
    if reference.iter().all(|&r| r == 0.0) {
        return Err(Error::NoStandoffFound);
    }
    Ok(reference)
}

/// RS = QS / column reference for tissue pixels with QS > 0 in columns
/// with a positive reference. Everything else is invalid.
pub fn compute_rs(qs: &QsMap, reference: &[f64]) -> RsMap {
    let (values, labels) = (qs.values(), qs.labels());
    let rs = Grid::from_fn(qs.width(), qs.height(), |x, y| {
        let v = *values.get(x, y);
        let r = reference[x];
        (*labels.get(x, y) == Region::Tissue && v > 0 && r > 0.0).then(|| v as f64 / r)
    });
    RsMap {
        values: rs,
        column_reference: reference.to_vec(),
    }
}
