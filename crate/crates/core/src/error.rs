use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Error {
    #[error("frame is {width}x{height}; at least 64x64 is required")]
    FrameTooSmall { width: usize, height: usize },
    #[error("B-mode raster is {bmode_width}x{bmode_height} but the colour raster is {width}x{height}")]
    BmodeDimensionMismatch {
        width: usize,
        height: usize,
        bmode_width: usize,
        bmode_height: usize,
    },
    #[error("raster data length {len} does not match {width}x{height}")]
    RasterShape { width: usize, height: usize, len: usize },
    #[error("QS value {value} at ({x}, {y}) is outside {{0}} and 1..=100")]
    QsOutOfRange { x: usize, y: usize, value: u8 },
    #[error("pixel ({x}, {y}) has QS {value} but its region carries no data")]
    QsLabelMismatch { x: usize, y: usize, value: u8 },
    #[error("colour bar region lies outside the frame")]
    RoiOutOfBounds,
    #[error("colour bar has fewer than two distinct colours")]
    DegenerateColorbar,
    #[error("colour scale needs at least two distinct entries")]
    InvalidColorScale,
    #[error("skin line found in {found} columns; {required} required")]
    NoSkinLineFound { found: usize, required: usize },
    #[error("no standoff column has usable reference data")]
    NoStandoffFound,
    #[error("no valid RS pixels to differentiate")]
    EmptyField,
    #[error("no row or column has enough valid gradient cells to aggregate")]
    NoAggregableData,
    #[error("spacing must be positive and finite")]
    InvalidSpacing,
    #[error("need at least two observations per group")]
    InsufficientData,
    #[error("both groups are constant with different means; t is undefined")]
    ZeroVariance,
    #[error("scene ground truth leaves the 1..=100 range (value {value:.3})")]
    ClippingRejected { value: f64 },
    #[error("degenerate scene: {0}")]
    DegenerateScene(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("sequence has {len} frames; {requested} requested")]
    SequenceTooShort { len: usize, requested: usize },
}
