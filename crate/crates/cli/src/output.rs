//! Deterministic writers: cloud CSV, pretty JSON, PNG rasters.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use minvset::Complex64;
use serde::Serialize;

/// `re,im` rows with 17 significant digits, in the cloud's canonical order.
pub fn write_csv(path: &Path, points: &[Complex64]) -> anyhow::Result<()> {
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(w, "re,im")?;
    for p in points {
        writeln!(w, "{:.16e},{:.16e}", p.re, p.im)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    std::fs::write(path, to_json(value)?).with_context(|| format!("writing {}", path.display()))
}

/// White points on black. The bounding box plus a 5% margin is fitted into
/// the canvas with a uniform scale and centered; every point also lights
/// its 8 neighbours.
pub fn render(points: &[Complex64], width: u32, height: u32) -> Vec<u8> {
    let (w, h) = (width as usize, height as usize);
    let mut pixels = vec![0u8; w * h];
    if points.is_empty() {
        return pixels;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in points {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let margin = 0.05 * span;
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let half_w = (x1 - x0) / 2.0 + margin;
    let half_h = (y1 - y0) / 2.0 + margin;
    let scale = (w as f64 / (2.0 * half_w)).min(h as f64 / (2.0 * half_h));
    for p in points {
        let col = ((p.re - cx) * scale + w as f64 / 2.0).floor();
        let row = ((cy - p.im) * scale + h as f64 / 2.0).floor();
        if !(col.is_finite() && row.is_finite()) {
            continue;
        }
        let (col, row) = (col as i64, row as i64);
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (r, c) = (row + dr, col + dc);
                if r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w {
                    pixels[r as usize * w + c as usize] = 255;
                }
            }
        }
    }
    pixels
}

pub fn write_png(path: &Path, points: &[Complex64], size: [u32; 2]) -> anyhow::Result<()> {
    let [width, height] = size;
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width, height);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(&render(points, width, height))?;
    writer.finish()?;
    Ok(())
}
