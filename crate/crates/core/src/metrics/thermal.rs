//! Resistive-column temperature estimate.
//!
//! Every layer is cut into `grid × grid` tiles over the footprint. Heat from a
//! tile flows straight down to the sink under layer 0, so the rise at layer `l`
//! sums, over each interface below it, the resistance times the power crossing
//! that interface. A few Jacobi passes of lateral relaxation then spread the
//! rise between neighbouring tiles. Thermal vias scale the rise uniformly.

use serde::{Deserialize, Serialize};

use crate::decode::Floorplan;
use crate::error::MetricsError;
use crate::model::ThermalConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalMap {
    pub grid: usize,
    pub layers: usize,
    pub ambient: f64,
    /// °C, indexed `[layer][row][column]` flattened; row follows y.
    pub tiles: Vec<f64>,
    pub peak: f64,
}

impl ThermalMap {
    pub fn tile(&self, layer: usize, row: usize, col: usize) -> f64 {
        self.tiles[(layer * self.grid + row) * self.grid + col]
    }

    pub fn peak_rise(&self) -> f64 {
        self.peak - self.ambient
    }
}

/// `powers[b]` is block `b`'s power in mW; a block spanning `k` layers puts
/// `1/k` of it on each. `vias` applies the thermal-via mitigation.
pub fn thermal_map(
    fp: &Floorplan,
    powers: &[f64],
    th: &ThermalConfig,
    vias: bool,
) -> Result<ThermalMap, MetricsError> {
    if fp.placed.is_empty() {
        return Err(MetricsError::EmptyFloorplan);
    }
    if !(fp.extent_x > 0.0 && fp.extent_y > 0.0) {
        return Err(MetricsError::ZeroArea);
    }
    let g = th.grid.max(1) as usize;
    let layers = fp.extent_z.max(1) as usize;
    let dx = fp.extent_x / g as f64;
    let dy = fp.extent_y / g as f64;
    let tile_mm2 = dx * dy * 1e-6;
    let per_layer = g * g;

    // tile power in W
    let mut power = vec![0.0; layers * per_layer];
    for p in &fp.placed {
        let watts = powers[p.block] * 1e-3;
        if watts == 0.0 {
            continue;
        }
        let density = watts / p.layers as f64 / (p.width * p.height);
        let (x0, x1) = (p.x, p.x + p.width);
        let (y0, y1) = (p.y, p.y + p.height);
        let c0 = ((x0 / dx).floor() as usize).min(g - 1);
        let c1 = ((x1 / dx).ceil() as usize).clamp(c0 + 1, g);
        let r0 = ((y0 / dy).floor() as usize).min(g - 1);
        let r1 = ((y1 / dy).ceil() as usize).clamp(r0 + 1, g);
        for r in r0..r1 {
            let oy = (y1.min((r + 1) as f64 * dy) - y0.max(r as f64 * dy)).max(0.0);
            if oy == 0.0 {
                continue;
            }
            for c in c0..c1 {
                let ox = (x1.min((c + 1) as f64 * dx) - x0.max(c as f64 * dx)).max(0.0);
                let share = density * ox * oy;
                for l in p.z as usize..(p.z + p.layers) as usize {
                    power[l * per_layer + r * g + c] += share;
                }
            }
        }
    }

    let mut rise = vec![0.0; layers * per_layer];
    for t in 0..per_layer {
        let mut above = 0.0;
        let mut crossing = vec![0.0; layers];
        for l in (0..layers).rev() {
            above += power[l * per_layer + t];
            crossing[l] = above;
        }
        let mut acc = 0.0;
        for l in 0..layers {
            acc += th.layer_resistance * crossing[l] / tile_mm2;
            rise[l * per_layer + t] = acc;
        }
    }

    let alpha = th.smoothing_alpha;
    if alpha > 0.0 && g > 1 {
        let mut next = rise.clone();
        for _ in 0..th.smoothing_passes {
            for l in 0..layers {
                let base = l * per_layer;
                for r in 0..g {
                    for c in 0..g {
                        let mut sum = 0.0;
                        let mut count = 0.0;
                        let mut add = |rr: usize, cc: usize| {
                            sum += rise[base + rr * g + cc];
                            count += 1.0;
                        };
                        if r > 0 {
                            add(r - 1, c);
                        }
                        if r + 1 < g {
                            add(r + 1, c);
                        }
                        if c > 0 {
                            add(r, c - 1);
                        }
                        if c + 1 < g {
                            add(r, c + 1);
                        }
                        let i = base + r * g + c;
                        next[i] = (1.0 - alpha) * rise[i] + alpha * (sum / count);
                    }
                }
            }
            std::mem::swap(&mut rise, &mut next);
        }
    }

    let scale = if vias { 1.0 - th.via_mitigation } else { 1.0 };
    let mut peak_rise: f64 = 0.0;
    for r in &mut rise {
        *r *= scale;
        peak_rise = peak_rise.max(*r);
    }
    let tiles = rise.iter().map(|r| th.ambient + r).collect();
    Ok(ThermalMap {
        grid: g,
        layers,
        ambient: th.ambient,
        tiles,
        peak: th.ambient + peak_rise,
    })
}
