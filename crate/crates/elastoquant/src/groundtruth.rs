//! Phantom ground truth as flat binary arrays plus a JSON manifest.
//!
//! Each array file starts with a 16-byte little-endian header:
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 4    | magic `EQGT`                   |
//! | 4      | 2    | format version (1)             |
//! | 6      | 1    | dtype: 1 = u8, 2 = f64         |
//! | 7      | 1    | reserved, 0                    |
//! | 8      | 4    | width                          |
//! | 12     | 4    | height                         |
//!
//! followed by `width * height` row-major little-endian values. Undefined
//! `f64` cells are NaN.

use std::fs;
use std::path::Path;

use elastoquant_core::calibration::ColorbarRoi;
use elastoquant_core::model::{Grid, Region};
use elastoquant_core::phantom::GroundTruth;
use elastoquant_core::segmentation::GapSpan;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};

pub const MAGIC: [u8; 4] = *b"EQGT";
pub const FORMAT_VERSION: u16 = 1;
pub const MANIFEST_NAME: &str = "ground_truth.json";
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    U8,
    F64,
}

impl Dtype {
    fn code(self) -> u8 {
        match self {
            Dtype::U8 => 1,
            Dtype::F64 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArrayData {
    U8(Vec<u8>),
    F64(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    pub width: usize,
    pub height: usize,
    pub data: ArrayData,
}

impl Array {
    pub fn from_u8(g: &Grid<u8>) -> Self {
        Array {
            width: g.width(),
            height: g.height(),
            data: ArrayData::U8(g.as_slice().to_vec()),
        }
    }

    pub fn from_optional(g: &Grid<Option<f64>>) -> Self {
        Array {
            width: g.width(),
            height: g.height(),
            data: ArrayData::F64(g.as_slice().iter().map(|v| v.unwrap_or(f64::NAN)).collect()),
        }
    }

    pub fn dtype(&self) -> Dtype {
        match self.data {
            ArrayData::U8(_) => Dtype::U8,
            ArrayData::F64(_) => Dtype::F64,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.width * self.height * 8);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(self.dtype().code());
        out.push(0);
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        match &self.data {
            ArrayData::U8(v) => out.extend_from_slice(v),
            ArrayData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
            return Err("not a ground-truth array".into());
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(format!("unsupported format version {version}"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let (width, height) = (u32_at(8), u32_at(12));
        let n = width * height;
        let body = &bytes[HEADER_LEN..];
        let data = match bytes[6] {
            1 if body.len() == n => ArrayData::U8(body.to_vec()),
            2 if body.len() == n * 8 => ArrayData::F64(
                body.chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
            1 | 2 => return Err("payload length does not match the header".into()),
            d => return Err(format!("unknown dtype {d}")),
        };
        Ok(Array { width, height, data })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(io_err(path))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        Array::from_bytes(&bytes).map_err(|message| CliError::GroundTruth {
            path: path.to_path_buf(),
            message,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayEntry {
    pub name: String,
    pub file: String,
    pub dtype: Dtype,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthManifest {
    pub schema_version: u32,
    pub width: usize,
    pub height: usize,
    pub frame: String,
    pub bmode: Option<String>,
    pub colorbar: ColorbarRoi,
    pub skin_gap: GapSpan,
    /// Region label codes used in `labels.bin`.
    pub label_codes: Vec<(String, u8)>,
    pub arrays: Vec<ArrayEntry>,
}

/// Writes every ground-truth array and the manifest into `dir`.
pub fn write(dir: &Path, truth: &GroundTruth, frame: &str, bmode: Option<&str>) -> Result<GroundTruthManifest> {
    let overlay = truth.overlay.map(|&b| b as u8);
    let labels = truth.labels.map(|r| r.code());
    let arrays = [
        ("strainability", Array::from_optional(&truth.strainability), "loaded ground-truth strainability, NaN outside standoff and tissue"),
        ("qs", Array::from_u8(&truth.qs), "rendered QS level, 0 where no overlay colour"),
        ("labels", Array::from_u8(&labels), "region label codes"),
        ("overlay", Array::from_u8(&overlay), "1 where the overlay colour was drawn"),
        ("rs", Array::from_optional(&truth.rs), "analytic RS, NaN outside tissue"),
    ];
    let mut entries = Vec::new();
    for (name, array, description) in arrays {
        let file = format!("{name}.bin");
        array.write(&dir.join(&file))?;
        entries.push(ArrayEntry {
            name: name.into(),
            file,
            dtype: array.dtype(),
            description: description.into(),
        });
    }
    let manifest = GroundTruthManifest {
        schema_version: 1,
        width: truth.labels.width(),
        height: truth.labels.height(),
        frame: frame.into(),
        bmode: bmode.map(str::to_string),
        colorbar: truth.colorbar,
        skin_gap: truth.skin_gap,
        label_codes: [Region::NoData, Region::Standoff, Region::SkinGap, Region::Tissue, Region::Bone]
            .into_iter()
            .map(|r| (format!("{r:?}"), r.code()))
            .collect(),
        arrays: entries,
    };
    let path = dir.join(MANIFEST_NAME);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(io_err(path))?;
    Ok(manifest)
}
