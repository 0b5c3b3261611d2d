//! Per-frame CSV, cohort JSON and cohort CSV.
//!
//! Column order and field names are part of the output schema and are
//! versioned by [`SCHEMA_VERSION`].

use std::fs;
use std::path::Path;

use elastoquant_core::model::{FrameMeta, GradientTotals, GroupComparison, Metric, Site};
use elastoquant_core::stats::CohortReport;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Result};

pub const SCHEMA_VERSION: u32 = 1;
/// Significance level for the `*` marker.
pub const ALPHA: f64 = 0.05;

pub const FRAME_COLUMNS: [&str; 12] = [
    "subject_id",
    "site",
    "group",
    "total_gx",
    "total_gy",
    "total_gr",
    "n_valid_pixels",
    "column_exclusion_count",
    "frame_index",
    "frame_path",
    "status",
    "error",
];

pub const COHORT_COLUMNS: [&str; 15] = [
    "site",
    "metric",
    "n_a",
    "n_b",
    "mean_a",
    "ci95_a",
    "mean_b",
    "ci95_b",
    "t",
    "df",
    "p_two_tailed",
    "eta_squared",
    "degenerate",
    "significant",
    "error",
];

/// Metrics of one successfully analysed frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMetrics {
    /// Totals in reporting orientation.
    pub totals: GradientTotals,
    pub n_valid_pixels: usize,
    pub column_exclusion_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutcome {
    pub meta: FrameMeta,
    pub frame_path: String,
    pub result: std::result::Result<FrameMetrics, String>,
}

fn num(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_frames_csv(path: &Path, frames: &[FrameOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(FRAME_COLUMNS)?;
    for f in frames {
        let m = &f.meta;
        let (totals, n_valid, excluded, status, error) = match &f.result {
            Ok(r) => (
                r.totals,
                r.n_valid_pixels.to_string(),
                r.column_exclusion_count.to_string(),
                "ok",
                String::new(),
            ),
            Err(e) => (GradientTotals::default(), String::new(), String::new(), "failed", e.clone()),
        };
        w.write_record([
            m.subject_id.clone(),
            m.site.to_string(),
            m.group.to_string(),
            num(totals.gx),
            num(totals.gy),
            num(totals.gr),
            n_valid,
            excluded,
            m.frame_index.to_string(),
            f.frame_path.clone(),
            status.to_string(),
            error,
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortRowJson {
    pub site: Site,
    pub metric: Metric,
    pub n_a: usize,
    pub n_b: usize,
    /// `p < alpha` on a non-degenerate comparison.
    pub significant: bool,
    /// `"*"` when significant, otherwise empty.
    pub marker: String,
    pub comparison: Option<GroupComparison>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortJson {
    pub schema_version: u32,
    pub alpha: f64,
    /// `"student"` or `"welch"`.
    pub test: String,
    pub group_a: String,
    pub group_b: String,
    pub frames_total: usize,
    pub frames_failed: usize,
    pub skipped_sites: Vec<Site>,
    pub rows: Vec<CohortRowJson>,
}

pub fn is_significant(c: &GroupComparison) -> bool {
    !c.degenerate && c.p_two_tailed < ALPHA
}

impl CohortJson {
    pub fn build(report: &CohortReport, welch: bool, frames_total: usize, frames_failed: usize) -> Self {
        let rows = report
            .rows
            .iter()
            .map(|r| {
                let significant = r.outcome.as_ref().map(is_significant).unwrap_or(false);
                CohortRowJson {
                    site: r.site,
                    metric: r.metric,
                    n_a: r.n_a,
                    n_b: r.n_b,
                    significant,
                    marker: if significant { "*".into() } else { String::new() },
                    comparison: r.outcome.as_ref().ok().cloned(),
                    error: r.outcome.as_ref().err().map(|e| e.to_string()),
                }
            })
            .collect();
        CohortJson {
            schema_version: SCHEMA_VERSION,
            alpha: ALPHA,
            test: if welch { "welch" } else { "student" }.into(),
            group_a: "NonUlcerated".into(),
            group_b: "Ulcerated".into(),
            frames_total,
            frames_failed,
            skipped_sites: report.skipped_sites.clone(),
            rows,
        }
    }

    pub fn row(&self, site: Site, metric: Metric) -> Option<&CohortRowJson> {
        self.rows.iter().find(|r| r.site == site && r.metric == metric)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(COHORT_COLUMNS)?;
        for r in &self.rows {
            let c = r.comparison.as_ref();
            let f = |g: fn(&GroupComparison) -> f64| num(c.map(g));
            w.write_record([
                r.site.to_string(),
                r.metric.as_str().to_string(),
                r.n_a.to_string(),
                r.n_b.to_string(),
                f(|c| c.mean_a),
                f(|c| c.ci95_a),
                f(|c| c.mean_b),
                f(|c| c.ci95_b),
                f(|c| c.t),
                f(|c| c.df),
                f(|c| c.p_two_tailed),
                f(|c| c.eta_squared),
                c.map(|c| c.degenerate.to_string()).unwrap_or_default(),
                r.marker.clone(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(io_err(path))?;
        Ok(())
    }
}

/// Row means of `gx` and column means of `gy` as two-column CSV files.
pub fn write_profile_csv(path: &Path, index_name: &str, values: &[Option<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([index_name, "mean"])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([i.to_string(), num(*v)])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
