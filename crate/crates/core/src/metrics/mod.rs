//! Floorplan evaluation.

mod cost;
mod thermal;
mod timing;

pub use cost::{cost, CostBreakdown, CostRefs, LoopReport};
pub use thermal::{thermal_map, ThermalMap};
pub use timing::{bips, cycles_for_latency, loop_cycles, loop_latency, Performance};

use crate::decode::Floorplan;
use crate::model::ResolvedNet;

/// Footprint in mm².
pub fn footprint_area(fp: &Floorplan) -> f64 {
    fp.extent_x * fp.extent_y * 1e-6
}

/// Weighted 3D half-perimeter wirelength over block centers, in mm.
/// `via_z` is the length charged per layer of vertical span, in µm.
pub fn wirelength(fp: &Floorplan, nets: &[ResolvedNet], via_z: f64) -> f64 {
    let mut total = 0.0;
    for net in nets {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &pin in &net.pins {
            let p = &fp.placed[pin];
            let (cx, cy) = p.center();
            for (a, v) in [cx, cy, p.center_layer()].into_iter().enumerate() {
                lo[a] = lo[a].min(v);
                hi[a] = hi[a].max(v);
            }
        }
        total += net.weight * ((hi[0] - lo[0]) + (hi[1] - lo[1]) + via_z * (hi[2] - lo[2]));
    }
    total * 1e-3
}
