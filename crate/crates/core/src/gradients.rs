//! Homogeneity gradients of the RS field.
//!
//! Differences are taken against the left and upper neighbour
//! (`G = (RS_i - RS_{i-1}) / spacing`), so the first column has no `gx` and
//! the first row has no `gy`. The oblique gradient is the Euclidean
//! magnitude of the two.
//!
//! Aggregation averages `gx` along each row and `gy` down each column, then
//! averages those means into a total per direction. The total oblique
//! gradient is the magnitude of the two totals, which is not the same as the
//! mean of the per-pixel oblique field.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{GradientField, Grid, RsMap};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GradientParams {
    pub spacing_x: f64,
    pub spacing_y: f64,
    /// Rows or columns with fewer valid cells are left out of the totals.
    pub agg_min_count: usize,
}

impl Default for GradientParams {
    fn default() -> Self {
        GradientParams {
            spacing_x: 1.0,
            spacing_y: 1.0,
            agg_min_count: 5,
        }
    }
}

fn valid_spacing(s: f64) -> bool {
    s.is_finite() && s > 0.0
}

pub fn gradient_field(rs: &RsMap, spacing_x: f64, spacing_y: f64) -> Result<GradientField> {
    if !valid_spacing(spacing_x) || !valid_spacing(spacing_y) {
        return Err(Error::InvalidSpacing);
    }
    if rs.valid_count() == 0 {
        return Err(Error::EmptyField);
    }
    let v = &rs.values;
    let (w, h) = (v.width(), v.height());
    let gx = Grid::from_fn(w, h, |x, y| match (x, *v.get(x, y)) {
        (0, _) | (_, None) => None,
        (_, Some(c)) => v.get(x - 1, y).map(|l| (c - l) / spacing_x),
    });
    let gy = Grid::from_fn(w, h, |x, y| match (y, *v.get(x, y)) {
        (0, _) | (_, None) => None,
        (_, Some(c)) => v.get(x, y - 1).map(|u| (c - u) / spacing_y),
    });
    let gr = Grid::from_fn(w, h, |x, y| match (*gx.get(x, y), *gy.get(x, y)) {
        (Some(a), Some(b)) => Some(libm::hypot(a, b)),
        _ => None,
    });
    Ok(GradientField {
        gx,
        gy,
        gr,
        spacing_x,
        spacing_y,
        row_mean_gx: Vec::new(),
        col_mean_gy: Vec::new(),
        total_gx: None,
        total_gy: None,
        total_gr: None,
    })
}

fn mean_if_supported(values: impl Iterator<Item = f64>, min_count: usize) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0 && n >= min_count).then(|| sum / n as f64)
}

fn mean_defined(values: &[Option<f64>]) -> Option<f64> {
    mean_if_supported(values.iter().flatten().copied(), 1)
}

/// Fills the row/column means and totals.
///
/// Fails with [`Error::NoAggregableData`] when neither direction has a
/// single supported row or column.
pub fn aggregate(mut field: GradientField, agg_min_count: usize) -> Result<GradientField> {
    let (w, h) = (field.gx.width(), field.gx.height());
    field.row_mean_gx = (0..h)
        .map(|y| mean_if_supported(field.gx.row(y).iter().flatten().copied(), agg_min_count))
        .collect();
    field.col_mean_gy = (0..w)
        .map(|x| mean_if_supported((0..h).filter_map(|y| *field.gy.get(x, y)), agg_min_count))
        .collect();
    field.total_gx = mean_defined(&field.row_mean_gx);
    field.total_gy = mean_defined(&field.col_mean_gy);
    field.total_gr = match (field.total_gx, field.total_gy) {
        (Some(a), Some(b)) => Some(libm::hypot(a, b)),
        _ => None,
    };
    if field.total_gx.is_none() && field.total_gy.is_none() {
        return Err(Error::NoAggregableData);
    }
    Ok(field)
}

/// [`gradient_field`] followed by [`aggregate`].
pub fn compute(rs: &RsMap, params: &GradientParams) -> Result<GradientField> {
    aggregate(
        gradient_field(rs, params.spacing_x, params.spacing_y)?,
        params.agg_min_count,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn rows(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> RsMap {
        let r: Vec<Vec<f64>> = (0..h).map(|y| (0..w).map(|x| f(x, y)).collect()).collect();
        RsMap::from_rows(&r).unwrap()
    }

    #[test]
    fn constant_field_is_flat() {
        let f = gradient_field(&rows(10, 10, |_, _| 0.8), 1.0, 1.0).unwrap();
        for g in [&f.gx, &f.gy, &f.gr] {
            assert!(g.as_slice().iter().flatten().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn linear_ramp_in_rows() {
        let f = compute(&rows(12, 12, |_, y| 0.01 * y as f64), &GradientParams::default()).unwrap();
        for v in f.gy.as_slice().iter().flatten() {
            assert!((v - 0.01).abs() < 1e-12);
        }
        assert!(f.gx.as_slice().iter().flatten().all(|&v| v == 0.0));
        for v in f.gr.as_slice().iter().flatten() {
            assert!((v - 0.01).abs() < 1e-12);
        }
        for m in &f.col_mean_gy {
            assert!((m.unwrap() - 0.01).abs() < 1e-12);
        }
        assert!((f.total_gy.unwrap() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_by_hand() {
        let rs = RsMap::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let f = aggregate(gradient_field(&rs, 1.0, 1.0).unwrap(), 1).unwrap();
        assert_eq!(f.gx.as_slice(), &[None, Some(1.0), None, Some(1.0)]);
        assert_eq!(f.gy.as_slice(), &[None, None, Some(2.0), Some(2.0)]);
        assert_eq!(f.gr.as_slice(), &[None, None, None, Some(libm::sqrt(5.0))]);
        assert_eq!(f.row_mean_gx, [Some(1.0), Some(1.0)]);
        assert_eq!(f.col_mean_gy, [Some(2.0), Some(2.0)]);
        assert_eq!(f.total_gx, Some(1.0));
        assert_eq!(f.total_gy, Some(2.0));
        assert_eq!(f.total_gr, Some(libm::sqrt(5.0)));
    }

    #[test]
    fn spacing_rescales() {
        let rs = RsMap::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let f = aggregate(gradient_field(&rs, 0.5, 2.0).unwrap(), 1).unwrap();
        assert_eq!(f.total_gx, Some(2.0));
        assert_eq!(f.total_gy, Some(1.0));
    }

    #[test]
    fn under_supported_row_is_dropped() {
        let mut rs = rows(8, 2, |x, y| (x + 10 * y) as f64);
        // row 1 keeps only three valid cells -> two gx cells
        for x in 3..8 {
            rs.values.set(x, 1, None);
        }
        let f = aggregate(gradient_field(&rs, 1.0, 1.0).unwrap(), 5).unwrap();
        assert_eq!(f.row_mean_gx[0], Some(1.0));
        assert_eq!(f.row_mean_gx[1], None);
        assert_eq!(f.total_gx, Some(1.0));
    }

    #[test]
    fn empty_field_errors() {
        let mut rs = rows(3, 3, |_, _| 1.0);
        for y in 0..3 {
            for x in 0..3 {
                rs.values.set(x, y, None);
            }
        }
        assert_eq!(gradient_field(&rs, 1.0, 1.0), Err(Error::EmptyField));
        assert_eq!(
            gradient_field(&rows(2, 2, |_, _| 1.0), 0.0, 1.0),
            Err(Error::InvalidSpacing)
        );
    }

    #[test]
    fn nothing_to_aggregate_errors() {
        let f = gradient_field(&rows(1, 1, |_, _| 1.0), 1.0, 1.0).unwrap();
        assert_eq!(aggregate(f, 1), Err(Error::NoAggregableData));
    }

    #[test]
    fn row_vector_has_no_vertical_total() {
        let f = aggregate(gradient_field(&rows(6, 1, |x, _| x as f64), 1.0, 1.0).unwrap(), 1).unwrap();
        assert_eq!(f.total_gy, None);
        assert_eq!(f.total_gr, None);
        assert_eq!(f.total_gx, Some(1.0));
    }
}
