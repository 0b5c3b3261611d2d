//! Quantitative strain elastography.
//!
//! Turns the colour overlay of a strain-elastography frame into per-pixel
//! strainability scores, normalizes tissue against the standoff pad above
//! it, and measures tissue homogeneity through directional gradients of the
//! normalized field. Group-level statistics and a synthetic phantom
//! generator (used as ground truth) round out the crate.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, image
//! decoding and the command line live in the `elastoquant` crate.
//!
//! Pipeline order:
//!
//! 1. [`calibration`]: build a [`ColorScale`](model::ColorScale) from the on-screen colour bar.
//! 2. [`segmentation`]: separate overlay from B-mode, find the skin gap,
//!    split standoff from tissue, and excise bone.
//! 3. [`quantify`]: invert colours into QS and divide tissue QS by the
//!    standoff column mean to get RS.
//! 4. [`gradients`]: backward-difference gradient fields and their
//!    row/column/total aggregates.
//! 5. [`stats`]: two-sample comparisons across a cohort.
//!
//! [`pipeline::analyze_frame`] runs steps 1 to 4 for one frame.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod calibration;
pub mod error;
pub mod gradients;
pub mod model;
pub mod phantom;
pub mod pipeline;
pub mod quantify;
pub mod segmentation;
pub mod selection;
pub mod stats;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use error::{Error, Result};
