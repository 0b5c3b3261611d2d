//! Frame rasters on disk. PNG and BMP are decoded; PNG is written.

use std::path::Path;

use elastoquant_core::model::{ElastogramFrame, FrameMeta, Grid, Rgb};
use image::{GrayImage, RgbImage};

use crate::error::{CliError, Result};

fn open(path: &Path) -> Result<image::DynamicImage> {
    image::open(path).map_err(|source| match source {
        image::ImageError::IoError(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        source => CliError::Image {
            path: path.to_path_buf(),
            source,
        },
    })
}

pub fn read_rgb(path: &Path) -> Result<Grid<Rgb>> {
    let img = open(path)?.into_rgb8();
    let (w, h) = img.dimensions();
    let data = img.pixels().map(|p| Rgb(p.0)).collect();
    Ok(Grid::from_vec(w as usize, h as usize, data)?)
}

pub fn read_gray(path: &Path) -> Result<Grid<u8>> {
    let img = open(path)?.into_luma8();
    let (w, h) = img.dimensions();
    Ok(Grid::from_vec(w as usize, h as usize, img.into_raw())?)
}

/// Loads a frame and its optional B-mode raster.
pub fn load_frame(path: &Path, bmode: Option<&Path>, meta: Option<FrameMeta>) -> Result<ElastogramFrame> {
    let pixels = read_rgb(path)?;
    let bmode = bmode.map(read_gray).transpose()?;
    ElastogramFrame::new(pixels, bmode, meta).map_err(|source| CliError::Frame {
        path: path.to_path_buf(),
        source,
    })
}

pub fn rgb_image(grid: &Grid<Rgb>) -> RgbImage {
    let raw = grid.as_slice().iter().flat_map(|p| p.0).collect();
    RgbImage::from_raw(grid.width() as u32, grid.height() as u32, raw).expect("grid dimensions match")
}

pub fn save_rgb(grid: &Grid<Rgb>, path: &Path) -> Result<()> {
    save(&rgb_image(grid), path)
}

pub fn save_gray(grid: &Grid<u8>, path: &Path) -> Result<()> {
    let img = GrayImage::from_raw(grid.width() as u32, grid.height() as u32, grid.as_slice().to_vec())
        .expect("grid dimensions match");
    save(&img, path)
}

pub(crate) fn save<P>(img: &image::ImageBuffer<P, Vec<u8>>, path: &Path) -> Result<()>
where
    P: image::Pixel<Subpixel = u8> + image::PixelWithColorType,
{
    img.save(path).map_err(|source| CliError::Image {
        path: path.to_path_buf(),
        source,
    })
}
