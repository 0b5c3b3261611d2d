//! Shared domain types.
//!
//! All rasters are row-major with the origin at the top-left. Row index
//! grows from the probe and standoff (top) toward bone (bottom); column
//! index grows left to right. See [`coordinate_conventions`].

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Smallest usable frame edge, in pixels.
pub const MIN_FRAME_DIM: usize = 64;

/// Largest QS level; 0 means "no data".
pub const QS_MAX: u8 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const BLACK: Rgb = Rgb([0, 0, 0]);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb([r, g, b])
    }

    pub const fn gray(v: u8) -> Self {
        Rgb([v, v, v])
    }

    /// Squared Euclidean distance in 8-bit RGB space.
    pub fn distance_sq(self, other: Rgb) -> u32 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(&a, &b)| {
                let d = a as i32 - b as i32;
                (d * d) as u32
            })
            .sum()
    }

    /// `max - min` over the three channels.
    pub fn saturation(self) -> u8 {
        let [r, g, b] = self.0;
        r.max(g).max(b) - r.min(g).min(b)
    }
}

/// A dense `width x height` raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Grid {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::RasterShape {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Grid {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        &mut self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Iterates `(x, y, &value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (i % w, i / w, v))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(&mut f).collect(),
        }
    }

    pub fn same_shape<U>(&self, other: &Grid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Site {
    LeftForefoot,
    LeftHeel,
    RightForefoot,
    RightHeel,
}

impl Site {
    pub const ALL: [Site; 4] = [
        Site::LeftForefoot,
        Site::LeftHeel,
        Site::RightForefoot,
        Site::RightHeel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Site::LeftForefoot => "LeftForefoot",
            Site::LeftHeel => "LeftHeel",
            Site::RightForefoot => "RightForefoot",
            Site::RightHeel => "RightHeel",
        }
    }

    pub fn parse(s: &str) -> Option<Site> {
        Site::ALL
            .into_iter()
            .find(|site| site.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Group {
    Ulcerated,
    NonUlcerated,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Ulcerated => "Ulcerated",
            Group::NonUlcerated => "NonUlcerated",
        }
    }

    pub fn parse(s: &str) -> Option<Group> {
        [Group::Ulcerated, Group::NonUlcerated]
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameMeta {
    pub subject_id: String,
    pub site: Site,
    pub group: Group,
    pub frame_index: u32,
}

/// One still frame of an elastography video.
#[derive(Debug, Clone, PartialEq)]
pub struct ElastogramFrame {
    pixels: Grid<Rgb>,
    bmode: Option<Grid<u8>>,
    pub meta: Option<FrameMeta>,
}

impl ElastogramFrame {
    pub fn new(pixels: Grid<Rgb>, bmode: Option<Grid<u8>>, meta: Option<FrameMeta>) -> Result<Self> {
        if pixels.width() < MIN_FRAME_DIM || pixels.height() < MIN_FRAME_DIM {
            return Err(Error::FrameTooSmall {
                width: pixels.width(),
                height: pixels.height(),
            });
        }
        if let Some(b) = &bmode {
            if !b.same_shape(&pixels) {
                return Err(Error::BmodeDimensionMismatch {
                    width: pixels.width(),
                    height: pixels.height(),
                    bmode_width: b.width(),
                    bmode_height: b.height(),
                });
            }
        }
        Ok(ElastogramFrame {
            pixels,
            bmode,
            meta,
        })
    }

    pub fn pixels(&self) -> &Grid<Rgb> {
        &self.pixels
    }

    pub fn bmode(&self) -> Option<&Grid<u8>> {
        self.bmode.as_ref()
    }

    pub fn width(&self) -> usize {
        self.pixels.width()
    }

    pub fn height(&self) -> usize {
        self.pixels.height()
    }
}

/// One calibrated colour and the QS level it stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaleEntry {
    pub qs: u8,
    pub color: Rgb,
}

/// Lookup table from display colour to QS.
///
/// QS grows with strainability: the soft (blue) end of the bar is 100 and
/// the stiff (red) end is 1. Some vendor documentation phrases the scale the
/// other way round ("high QS ... high stiffness"); this crate treats the
/// strainability reading as authoritative.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ColorScale {
    entries: Vec<ScaleEntry>,
    pub max_match_distance: f64,
}

impl ColorScale {
    pub const DEFAULT_MAX_MATCH_DISTANCE: f64 = 40.0;

    /// Entries are sorted by QS. At least two distinct colours are required
    /// and every QS must lie in `1..=100`.
    pub fn new(mut entries: Vec<ScaleEntry>, max_match_distance: f64) -> Result<Self> {
        if entries.iter().any(|e| e.qs == 0 || e.qs > QS_MAX) {
            return Err(Error::InvalidColorScale);
        }
        if !(max_match_distance >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "max_match_distance",
                reason: "must be non-negative",
            });
        }
        entries.sort_by_key(|e| e.qs);
        let first = entries.first().map(|e| e.color);
        if !entries.iter().any(|e| Some(e.color) != first) {
            return Err(Error::InvalidColorScale);
        }
        Ok(ColorScale {
            entries,
            max_match_distance,
        })
    }

    pub fn entries(&self) -> &[ScaleEntry] {
        &self.entries
    }

    /// Colour of a given QS level, if the scale has it.
    pub fn color_of(&self, qs: u8) -> Option<Rgb> {
        self.entries.iter().find(|e| e.qs == qs).map(|e| e.color)
    }
}

/// Per-pixel anatomical region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[repr(u8)]
pub enum Region {
    #[default]
    NoData = 0,
    Standoff = 1,
    SkinGap = 2,
    Tissue = 3,
    Bone = 4,
}

impl Region {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Region> {
        match code {
            0 => Some(Region::NoData),
            1 => Some(Region::Standoff),
            2 => Some(Region::SkinGap),
            3 => Some(Region::Tissue),
            4 => Some(Region::Bone),
            _ => None,
        }
    }

    /// Regions whose QS is always 0.
    pub fn carries_no_data(self) -> bool {
        matches!(self, Region::SkinGap | Region::NoData | Region::Bone)
    }
}

/// Integer QS field plus region labels.
#[derive(Debug, Clone, PartialEq)]
pub struct QsMap {
    values: Grid<u8>,
    labels: Grid<Region>,
}

impl QsMap {
    pub fn new(values: Grid<u8>, labels: Grid<Region>) -> Result<Self> {
        if !values.same_shape(&labels) {
            return Err(Error::RasterShape {
                width: values.width(),
                height: values.height(),
                len: labels.as_slice().len(),
            });
        }
        for (x, y, &v) in values.iter() {
            if v > QS_MAX {
                return Err(Error::QsOutOfRange { x, y, value: v });
            }
            if v != 0 && labels.get(x, y).carries_no_data() {
                return Err(Error::QsLabelMismatch { x, y, value: v });
            }
        }
        Ok(QsMap { values, labels })
    }

    pub fn values(&self) -> &Grid<u8> {
        &self.values
    }

    pub fn labels(&self) -> &Grid<Region> {
        &self.labels
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn into_parts(self) -> (Grid<u8>, Grid<Region>) {
        (self.values, self.labels)
    }
}

/// Standoff-normalized strainability. `None` marks pixels without a valid RS.
#[derive(Debug, Clone, PartialEq)]
pub struct RsMap {
    pub values: Grid<Option<f64>>,
    /// Mean standoff QS per column; 0 where the column is excluded.
    pub column_reference: Vec<f64>,
}

impl RsMap {
    /// Wraps an already-normalized dense matrix (rows top to bottom), every
    /// cell valid. Column references are set to 1.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::RasterShape {
                width,
                height,
                len: rows.iter().map(Vec::len).sum(),
            });
        }
        let values = Grid::from_fn(width, height, |x, y| Some(rows[y][x]));
        Ok(RsMap {
            values,
            column_reference: vec![1.0; width],
        })
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn valid_count(&self) -> usize {
        self.values.as_slice().iter().filter(|v| v.is_some()).count()
    }
}

/// Gradient fields and their aggregates.
///
/// Aggregate members are `None` until [`crate::gradients::aggregate`] runs,
/// and stay `None` where there was not enough support.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub gx: Grid<Option<f64>>,
    pub gy: Grid<Option<f64>>,
    pub gr: Grid<Option<f64>>,
    pub spacing_x: f64,
    pub spacing_y: f64,
    pub row_mean_gx: Vec<Option<f64>>,
    pub col_mean_gy: Vec<Option<f64>>,
    pub total_gx: Option<f64>,
    pub total_gy: Option<f64>,
    pub total_gr: Option<f64>,
}

impl GradientField {
    pub fn totals(&self) -> GradientTotals {
        GradientTotals {
            gx: self.total_gx,
            gy: self.total_gy,
            gr: self.total_gr,
        }
    }
}

/// Frame-level summary used for cohort statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GradientTotals {
    pub gx: Option<f64>,
    pub gy: Option<f64>,
    pub gr: Option<f64>,
}

impl GradientTotals {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::TotalGx => self.gx,
            Metric::TotalGy => self.gy,
            Metric::TotalGr => self.gr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Metric {
    TotalGx,
    TotalGy,
    TotalGr,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::TotalGx, Metric::TotalGy, Metric::TotalGr];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::TotalGx => "TotalGx",
            Metric::TotalGy => "TotalGy",
            Metric::TotalGr => "TotalGr",
        }
    }
}

/// Two-sample comparison of one metric at one site.
///
/// Group `a` is NonUlcerated and group `b` is Ulcerated when produced by
/// [`crate::stats::cohort_analysis`], so a positive `t` means the
/// non-ulcerated mean is higher.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupComparison {
    pub site: Site,
    pub metric: Metric,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub ci95_a: f64,
    pub ci95_b: f64,
    pub t: f64,
    pub df: f64,
    pub p_two_tailed: f64,
    pub eta_squared: f64,
    /// Both groups constant and equal; `t` was forced to 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AnteriorAt {
    #[default]
    ImageLeft,
    ImageRight,
}

/// Fixed frame orientation and reporting sign conventions.
///
/// Gradients are computed on RS (strainability). A positive RS gradient
/// along rows means tissue gets softer toward the bone. Setting
/// `report_as_stiffness` negates both directional gradients so that a
/// positive value means stiffening toward posterior (x) or toward bone (y).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Conventions {
    pub anterior_at: AnteriorAt,
    pub report_as_stiffness: bool,
}

/// Where anatomical directions fall in the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageSide {
    Left,
    Right,
    Top,
    Bottom,
}

impl Conventions {
    pub fn anterior(&self) -> ImageSide {
        match self.anterior_at {
            AnteriorAt::ImageLeft => ImageSide::Left,
            AnteriorAt::ImageRight => ImageSide::Right,
        }
    }

    pub fn bone(&self) -> ImageSide {
        ImageSide::Bottom
    }

    pub fn probe(&self) -> ImageSide {
        ImageSide::Top
    }

    /// Anterior-posterior gradient (positive toward posterior) from an RS `gx`.
    pub fn anterior_posterior(&self, gx: f64) -> f64 {
        let mirrored = match self.anterior_at {
            AnteriorAt::ImageLeft => gx,
            AnteriorAt::ImageRight => -gx,
        };
        self.polarity(mirrored)
    }

    /// Superior-inferior gradient (positive toward bone) from an RS `gy`.
    pub fn superior_inferior(&self, gy: f64) -> f64 {
        self.polarity(gy)
    }

    fn polarity(&self, v: f64) -> f64 {
        if self.report_as_stiffness {
            -v
        } else {
            v
        }
    }

    /// Totals in reporting orientation. `gr` is a magnitude and never flips.
    pub fn report(&self, totals: GradientTotals) -> GradientTotals {
        GradientTotals {
            gx: totals.gx.map(|v| self.anterior_posterior(v)),
            gy: totals.gy.map(|v| self.superior_inferior(v)),
            gr: totals.gr,
        }
    }
}

/// The default frame conventions: anterior at image-left, bone at the
/// bottom, gradients reported on RS.
pub fn coordinate_conventions() -> Conventions {
    Conventions::default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_conventions() {
        let c = coordinate_conventions();
        assert_eq!(c.anterior(), ImageSide::Left);
        assert_eq!(c.bone(), ImageSide::Bottom);
        assert_eq!(c.probe(), ImageSide::Top);
    }

    #[test]
    fn flipped_probe_mirrors_anterior() {
        let c = Conventions {
            anterior_at: AnteriorAt::ImageRight,
            ..Default::default()
        };
        assert_eq!(c.anterior(), ImageSide::Right);
        assert_eq!(c.anterior_posterior(0.3), -0.3);
    }

    #[test]
    fn stiffness_reporting_negates() {
        let c = Conventions {
            report_as_stiffness: true,
            ..Default::default()
        };
        assert_eq!(c.superior_inferior(0.2), -0.2);
        let t = c.report(GradientTotals {
            gx: Some(0.1),
            gy: Some(0.2),
            gr: Some(0.5),
        });
        assert_eq!(t.gy, Some(-0.2));
        assert_eq!(t.gr, Some(0.5));
    }

    #[test]
    fn frame_minimum_size() {
        let small = Grid::filled(63, 64, Rgb::BLACK);
        assert!(matches!(
            ElastogramFrame::new(small, None, None),
            Err(Error::FrameTooSmall { .. })
        ));
        let px = Grid::filled(64, 64, Rgb::BLACK);
        let bm = Grid::filled(64, 65, 0u8);
        assert!(matches!(
            ElastogramFrame::new(px, Some(bm), None),
            Err(Error::BmodeDimensionMismatch { .. })
        ));
    }

    #[test]
    fn qs_map_rejects_out_of_range() {
        let mut v = Grid::filled(2, 2, 0u8);
        let l = Grid::filled(2, 2, Region::Tissue);
        v.set(1, 1, 101);
        assert!(matches!(
            QsMap::new(v, l),
            Err(Error::QsOutOfRange { x: 1, y: 1, value: 101 })
        ));
    }

    #[test]
    fn qs_map_rejects_data_in_gap() {
        let v = Grid::filled(2, 2, 5u8);
        let mut l = Grid::filled(2, 2, Region::Tissue);
        l.set(0, 1, Region::SkinGap);
        assert!(matches!(QsMap::new(v, l), Err(Error::QsLabelMismatch { .. })));
    }

    #[test]
    fn saturation_of_gray_is_zero() {
        assert_eq!(Rgb::gray(137).saturation(), 0);
        assert_eq!(Rgb::new(200, 30, 30).saturation(), 170);
    }

    #[test]
    fn site_round_trip() {
        for s in Site::ALL {
            assert_eq!(Site::parse(s.as_str()), Some(s));
        }
        assert_eq!(Site::parse("leftheel"), Some(Site::LeftHeel));
        assert_eq!(Site::parse("toe"), None);
    }
}
