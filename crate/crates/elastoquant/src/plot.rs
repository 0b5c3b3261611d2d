//! Raster plots: field heatmaps, profile strips and per-metric group charts.
//!
//! Plots carry no text. Colour ramps and layout are fixed so identical
//! inputs give byte-identical PNGs.

use std::path::Path;

use elastoquant_core::model::{Grid, Metric, Site};
use image::{Rgb, RgbImage};

use crate::error::Result;
use crate::imageio::save;
use crate::report::CohortRowJson;

const UNDEFINED: Rgb<u8> = Rgb([0, 0, 0]);
const SEQUENTIAL: [[u8; 3]; 5] = [[68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37]];
const DIVERGING: [[u8; 3]; 3] = [[33, 102, 172], [247, 247, 247], [178, 24, 43]];

fn ramp(stops: &[[u8; 3]], t: f64) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0) * (stops.len() - 1) as f64;
    let i = (t.floor() as usize).min(stops.len() - 2);
    let f = t - i as f64;
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * f).round() as u8;
    let (a, b) = (stops[i], stops[i + 1]);
    Rgb([mix(a[0], b[0]), mix(a[1], b[1]), mix(a[2], b[2])])
}

fn finite_range<'a>(values: impl Iterator<Item = &'a Option<f64>>) -> Option<(f64, f64)> {
    values.flatten().filter(|v| v.is_finite()).fold(None, |acc, &v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Sequential heatmap scaled to the field's own range.
pub fn heatmap(field: &Grid<Option<f64>>) -> RgbImage {
    let (lo, hi) = finite_range(field.as_slice().iter()).unwrap_or((0.0, 1.0));
    let span = if hi > lo { hi - lo } else { 1.0 };
    RgbImage::from_fn(field.width() as u32, field.height() as u32, |x, y| {
        match field.get(x as usize, y as usize) {
            Some(v) if v.is_finite() => ramp(&SEQUENTIAL, (v - lo) / span),
            _ => UNDEFINED,
        }
    })
}

fn diverging(v: Option<f64>, scale: f64) -> Rgb<u8> {
    match v {
        Some(v) if v.is_finite() => ramp(&DIVERGING, 0.5 + 0.5 * v / scale),
        _ => UNDEFINED,
    }
}

fn symmetric_scale(values: &[Option<f64>]) -> f64 {
    let m = values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// One row per value, `thickness` pixels wide, zero-centred colours.
pub fn row_strip(values: &[Option<f64>], thickness: u32) -> RgbImage {
    let s = symmetric_scale(values);
    RgbImage::from_fn(thickness, values.len() as u32, |_, y| diverging(values[y as usize], s))
}

/// One column per value, `thickness` pixels tall, zero-centred colours.
pub fn column_strip(values: &[Option<f64>], thickness: u32) -> RgbImage {
    let s = symmetric_scale(values);
    RgbImage::from_fn(values.len() as u32, thickness, |x, _| diverging(values[x as usize], s))
}

const CHART_W: u32 = 480;
const CHART_H: u32 = 320;
const MARGIN: u32 = 32;
const BG: Rgb<u8> = Rgb([255, 255, 255]);
const AXIS: Rgb<u8> = Rgb([40, 40, 40]);
const INK: Rgb<u8> = Rgb([0, 0, 0]);
const BAR_A: Rgb<u8> = Rgb([70, 130, 180]);
const BAR_B: Rgb<u8> = Rgb([214, 96, 77]);

fn fill_rect(img: &mut RgbImage, x0: i64, y0: i64, x1: i64, y1: i64, c: Rgb<u8>) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    for y in y0.min(y1).max(0)..=y0.max(y1).min(h - 1) {
        for x in x0.min(x1).max(0)..=x0.max(x1).min(w - 1) {
            img.put_pixel(x as u32, y as u32, c);
        }
    }
}

fn line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb<u8>) {
    let steps = (x1 - x0).abs().max((y1 - y0).abs()).max(1);
    for i in 0..=steps {
        let x = x0 + (x1 - x0) * i / steps;
        let y = y0 + (y1 - y0) * i / steps;
        if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, c);
        }
    }
}

fn star(img: &mut RgbImage, cx: i64, cy: i64, r: i64) {
    line(img, (cx - r, cy), (cx + r, cy), INK);
    line(img, (cx - r / 2, cy - r), (cx + r / 2, cy + r), INK);
    line(img, (cx + r / 2, cy - r), (cx - r / 2, cy + r), INK);
}

/// Group means with 95% CI whiskers at each site, `*` over significant
/// sites. Left bar is NonUlcerated, right bar is Ulcerated.
pub fn group_chart(rows: &[CohortRowJson], metric: Metric) -> RgbImage {
    let mut img = RgbImage::from_pixel(CHART_W, CHART_H, BG);
    let entries: Vec<_> = Site::ALL
        .iter()
        .map(|&s| rows.iter().find(|r| r.site == s && r.metric == metric))
        .collect();
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    for c in entries.iter().flatten().filter_map(|r| r.comparison.as_ref()) {
        for (m, h) in [(c.mean_a, c.ci95_a), (c.mean_b, c.ci95_b)] {
            if m.is_finite() && h.is_finite() {
                lo = lo.min(m - h);
                hi = hi.max(m + h);
            }
        }
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let top = MARGIN as f64;
    let bottom = (CHART_H - MARGIN) as f64;
    let to_y = |v: f64| (bottom - (v - lo) / (hi - lo) * (bottom - top)).round() as i64;

    let left = MARGIN as i64;
    let right = (CHART_W - MARGIN / 2) as i64;
    line(&mut img, (left, top as i64 - 8), (left, bottom as i64), AXIS);
    line(&mut img, (left, to_y(0.0)), (right, to_y(0.0)), AXIS);

    let slot = (right - left) / Site::ALL.len() as i64;
    let bar_w = slot / 4;
    for (i, entry) in entries.iter().enumerate() {
        let Some(c) = entry.and_then(|r| r.comparison.as_ref()) else {
            continue;
        };
        let x0 = left + i as i64 * slot + slot / 2 - bar_w;
        for (k, (m, h, colour)) in [(c.mean_a, c.ci95_a, BAR_A), (c.mean_b, c.ci95_b, BAR_B)]
            .into_iter()
            .enumerate()
        {
            if !m.is_finite() {
                continue;
            }
            let bx = x0 + k as i64 * bar_w;
            fill_rect(&mut img, bx + 1, to_y(0.0), bx + bar_w - 2, to_y(m), colour);
            if h.is_finite() {
                let cx = bx + bar_w / 2;
                line(&mut img, (cx, to_y(m - h)), (cx, to_y(m + h)), INK);
                line(&mut img, (cx - 4, to_y(m - h)), (cx + 4, to_y(m - h)), INK);
                line(&mut img, (cx - 4, to_y(m + h)), (cx + 4, to_y(m + h)), INK);
            }
        }
        if entry.is_some_and(|r| r.significant) {
            star(&mut img, x0 + bar_w, top as i64 - 16, 6);
        }
    }
    img
}

pub fn save_png(img: &RgbImage, path: &Path) -> Result<()> {
    save(img, path)
}
