//! Per-layer SVG rendering of a report.
//!
//! Floorplan micrometers map to pixels by `px = origin_x + x·scale` and
//! `py = origin_y + (extent_y − y)·scale`, so y grows upward as in the
//! floorplan. The scale and origin are written on the root element.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::report::Report;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub scale: f64,
    pub origin_x: f64,
    pub origin_y: f64,
    pub extent_y: f64,
}

impl Transform {
    pub fn for_report(r: &Report) -> Self {
        let span = r.floorplan.extent_x.max(r.floorplan.extent_y).max(f64::MIN_POSITIVE);
        Transform {
            scale: (CANVAS - 2.0 * MARGIN) / span,
            origin_x: MARGIN,
            origin_y: MARGIN,
            extent_y: r.floorplan.extent_y,
        }
    }

    /// Pixel rectangle (left, top, width, height) of a floorplan box.
    pub fn rect(&self, x: f64, y: f64, w: f64, h: f64) -> (f64, f64, f64, f64) {
        (
            self.origin_x + x * self.scale,
            self.origin_y + (self.extent_y - y - h) * self.scale,
            w * self.scale,
            h * self.scale,
        )
    }

    /// Inverse of [`Transform::rect`].
    pub fn unrect(&self, left: f64, top: f64, w: f64, h: f64) -> (f64, f64, f64, f64) {
        let (w, h) = (w / self.scale, h / self.scale);
        let x = (left - self.origin_x) / self.scale;
        let y = self.extent_y - h - (top - self.origin_y) / self.scale;
        (x, y, w, h)
    }
}

fn heat_color(t: f64, lo: f64, hi: f64) -> String {
    let f = if hi > lo { ((t - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
    let r = (255.0 * f).round() as u8;
    let b = (255.0 * (1.0 - f)).round() as u8;
    format!("rgb({r},64,{b})")
}

/// One SVG document per layer, in layer order.
pub fn render_layers(report: &Report, heat: bool) -> Vec<String> {
    let tf = Transform::for_report(report);
    let width = CANVAS;
    let height = 2.0 * MARGIN + report.floorplan.extent_y * tf.scale;
    let layers = report.floorplan.extent_z.max(1);
    let map = &report.thermal.map;
    let (tmin, tmax) = map
        .tiles
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    let mut out = Vec::with_capacity(layers as usize);
    for layer in 0..layers {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.4}" height="{height:.4}" data-layer="{layer}" data-scale="{:.12}" data-origin-x="{:.4}" data-origin-y="{:.4}" data-extent-y="{:.6}">"#,
            tf.scale, tf.origin_x, tf.origin_y, tf.extent_y
        );
        let (ox, oy, ow, oh) = tf.rect(0.0, 0.0, report.floorplan.extent_x, report.floorplan.extent_y);
        let _ = writeln!(
            s,
            r#"  <rect class="outline" x="{ox:.4}" y="{oy:.4}" width="{ow:.4}" height="{oh:.4}" fill="white" stroke="black"/>"#
        );
        if heat && (layer as usize) < map.layers {
            let g = map.grid;
            let dx = report.floorplan.extent_x / g as f64;
            let dy = report.floorplan.extent_y / g as f64;
            for r in 0..g {
                for c in 0..g {
                    let t = map.tile(layer as usize, r, c);
                    let (px, py, pw, ph) = tf.rect(c as f64 * dx, r as f64 * dy, dx, dy);
                    let _ = writeln!(
                        s,
                        r#"  <rect class="heat" x="{px:.4}" y="{py:.4}" width="{pw:.4}" height="{ph:.4}" fill="{}" fill-opacity="0.6" data-temp="{t:.3}"/>"#,
                        heat_color(t, tmin, tmax)
                    );
                }
            }
        }
        for b in &report.blocks {
            if !(b.z <= layer && layer < b.z + b.layers) {
                continue;
            }
            let (px, py, pw, ph) = tf.rect(b.x, b.y, b.width, b.height);
            let fill = if heat { "none" } else { "#cfe0f5" };
            let _ = writeln!(
                s,
                r##"  <rect class="block" data-id="{}" x="{px:.4}" y="{py:.4}" width="{pw:.4}" height="{ph:.4}" fill="{fill}" stroke="#1f3b5c"/>"##,
                escape(&b.id)
            );
            let _ = writeln!(
                s,
                r#"  <text class="label" x="{:.4}" y="{:.4}" font-size="10" text-anchor="middle">{}</text>"#,
                px + pw / 2.0,
                py + ph / 2.0,
                escape(&b.id)
            );
            if b.layers > 1 {
                let _ = writeln!(
                    s,
                    r#"  <text class="span" x="{:.4}" y="{:.4}" font-size="8">L{}-{}</text>"#,
                    px + 2.0,
                    py + 9.0,
                    b.z,
                    b.z + b.layers - 1
                );
            }
        }
        s.push_str("</svg>\n");
        out.push(s);
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Writes `layer_<k>.svg` for every layer and returns the paths.
pub fn write_layers(report: &Report, dir: &Path, heat: bool) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (k, svg) in render_layers(report, heat).into_iter().enumerate() {
        let path = dir.join(format!("layer_{k}.svg"));
        std::fs::write(&path, svg)?;
        paths.push(path);
    }
    Ok(paths)
}
