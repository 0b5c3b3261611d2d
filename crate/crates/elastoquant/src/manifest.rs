//! Cohort manifests: delimited text with a header row.
//!
//! Required columns are `subject_id`, `group`, `site`, `frame_path` and
//! `frame_index`; `bmode_path` is optional. Comma or tab delimiters are
//! detected from the header. Relative paths resolve against the manifest's
//! directory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use elastoquant_core::model::{FrameMeta, Group, Site};

use crate::error::{io_err, CliError, Result};

const REQUIRED: [&str; 5] = ["subject_id", "group", "site", "frame_path", "frame_index"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub meta: FrameMeta,
    /// The path as written in the manifest, used in reports.
    pub frame_path: String,
    /// `frame_path` resolved against the manifest directory.
    pub resolved_frame: PathBuf,
    pub resolved_bmode: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohortManifest {
    pub rows: Vec<ManifestRow>,
}

fn sniff_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

impl CohortManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        CohortManifest::parse(&text, base).map_err(|message| CliError::Manifest {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Parses manifest text. Paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> std::result::Result<Self, String> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(sniff_delimiter(text))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| e.to_string())?.clone();
        let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let mut idx = [0usize; 5];
        for (slot, name) in idx.iter_mut().zip(REQUIRED) {
            *slot = col(name).ok_or_else(|| format!("missing column `{name}`"))?;
        }
        let bmode_col = col("bmode_path");

        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| format!("line {line}: {e}"))?;
            let field = |c: usize| record.get(c).unwrap_or("");
            let subject_id = field(idx[0]).to_string();
            if subject_id.is_empty() {
                return Err(format!("line {line}: empty subject_id"));
            }
            let group = Group::parse(field(idx[1]))
                .ok_or_else(|| format!("line {line}: unknown group `{}`", field(idx[1])))?;
            let site = Site::parse(field(idx[2]))
                .ok_or_else(|| format!("line {line}: unknown site `{}`", field(idx[2])))?;
            let frame_path = field(idx[3]).to_string();
            if frame_path.is_empty() {
                return Err(format!("line {line}: empty frame_path"));
            }
            let frame_index: u32 = field(idx[4])
                .parse()
                .map_err(|_| format!("line {line}: frame_index `{}` is not a non-negative integer", field(idx[4])))?;
            if !seen.insert((subject_id.clone(), site, frame_index)) {
                return Err(format!(
                    "line {line}: duplicate (subject_id, site, frame_index) = ({subject_id}, {site}, {frame_index})"
                ));
            }
            let resolved_bmode = bmode_col
                .map(field)
                .filter(|p| !p.is_empty())
                .map(|p| base.join(p));
            rows.push(ManifestRow {
                meta: FrameMeta {
                    subject_id,
                    site,
                    group,
                    frame_index,
                },
                resolved_frame: base.join(&frame_path),
                frame_path,
                resolved_bmode,
            });
        }
        Ok(CohortManifest { rows })
    }

    /// Writes a comma-separated manifest with paths as given.
    pub fn write(path: &Path, rows: &[(FrameMeta, String)]) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(REQUIRED)?;
        for (meta, frame_path) in rows {
            w.write_record([
                meta.subject_id.as_str(),
                meta.group.as_str(),
                meta.site.as_str(),
                frame_path.as_str(),
                &meta.frame_index.to_string(),
            ])?;
        }
        w.flush().map_err(io_err(path))?;
        Ok(())
    }
}
