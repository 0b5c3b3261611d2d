//! Brute-force gradient aggregates for verification.
//!
//! A literal loop-nest evaluation on a dense, fully valid matrix with no
//! masking. It shares no code with [`crate::gradients`].

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleAggregates {
    pub row_mean_gx: Vec<Option<f64>>,
    pub col_mean_gy: Vec<Option<f64>>,
    pub total_gx: Option<f64>,
    pub total_gy: Option<f64>,
    pub total_gr: Option<f64>,
}

/// `rs[row][col]`, rows top to bottom.
pub fn brute_force_oracle(rs: &[Vec<f64>], spacing_x: f64, spacing_y: f64) -> OracleAggregates {
    let h = rs.len();
    let w = if h > 0 { rs[0].len() } else { 0 };

    let mut row_mean_gx = Vec::new();
    for i in 0..h {
        if w < 2 {
            row_mean_gx.push(None);
            continue;
        }
        let mut sum = 0.0;
        for j in 1..w {
            sum += (rs[i][j] - rs[i][j - 1]) / spacing_x;
        }
        row_mean_gx.push(Some(sum / (w - 1) as f64));
    }

    let mut col_mean_gy = Vec::new();
    for j in 0..w {
        if h < 2 {
            col_mean_gy.push(None);
            continue;
        }
        let mut sum = 0.0;
        for i in 1..h {
            sum += (rs[i][j] - rs[i - 1][j]) / spacing_y;
        }
        col_mean_gy.push(Some(sum / (h - 1) as f64));
    }

    let total = |means: &[Option<f64>]| {
        let defined: Vec<f64> = means.iter().flatten().copied().collect();
        if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        }
    };
    let total_gx = total(&row_mean_gx);
    let total_gy = total(&col_mean_gy);
    let total_gr = match (total_gx, total_gy) {
        (Some(a), Some(b)) => Some(libm::sqrt(a * a + b * b)),
        _ => None,
    };
    OracleAggregates {
        row_mean_gx,
        col_mean_gy,
        total_gx,
        total_gy,
        total_gr,
    }
}
