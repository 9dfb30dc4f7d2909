use serde::{Deserialize, Serialize};

use super::thermal::thermal_map;
use super::timing::{bips, cycles_for_latency, loop_latency};
use super::{footprint_area, wirelength};
use crate::decode::Floorplan;
use crate::error::MetricsError;
use crate::model::Design;

/// Scale of the area, temperature and wire terms, taken from the first
/// solution of a run so the weights act on comparable magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRefs {
    /// mm²
    pub area: f64,
    /// Peak rise above ambient, K.
    pub temp_rise: f64,
    /// mm
    pub wire: f64,
}

impl CostRefs {
    pub fn from_breakdown(b: &CostBreakdown, ambient: f64) -> Self {
        CostRefs {
            area: b.area,
            temp_rise: b.temp - ambient,
            wire: b.wire,
        }
    }
}

fn normalized(value: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        value / reference
    } else {
        value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopReport {
    pub name: String,
    pub latency_ps: f64,
    pub cycles: u32,
    pub base_cycles: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub bips: f64,
    pub ipc: f64,
    /// Footprint, mm².
    pub area: f64,
    /// Peak temperature, °C.
    pub temp: f64,
    /// Weighted wirelength, mm.
    pub wire: f64,
    pub total: f64,
    pub loop_cycles: Vec<u32>,
    pub loop_latency_ps: Vec<f64>,
}

/// Evaluates every cost term. Without `refs` the floorplan is its own
/// reference and each normalized term equals one.
pub fn cost(
    fp: &Floorplan,
    design: &Design,
    refs: Option<&CostRefs>,
) -> Result<CostBreakdown, MetricsError> {
    let cfg = design.config();
    let mut delays = vec![0.0; design.len()];
    let mut powers = vec![0.0; design.len()];
    for p in &fp.placed {
        let c = design.candidate(p.block, p.candidate);
        delays[p.block] = c.delay;
        powers[p.block] = c.power;
    }

    let mut loop_cycles = Vec::with_capacity(design.loops().len());
    let mut loop_latency_ps = Vec::with_capacity(design.loops().len());
    for lp in design.loops() {
        let d = loop_latency(fp, lp, cfg, &delays);
        loop_cycles.push(cycles_for_latency(d, cfg)?);
        loop_latency_ps.push(d);
    }
    let perf = bips(design.loops(), &loop_cycles, cfg);
    let area = footprint_area(fp);
    let wire = wirelength(fp, design.nets(), cfg.via_z_wirelength);
    let temp = thermal_map(fp, &powers, &cfg.thermal, cfg.thermal.thermal_vias)?.peak;

    let ambient = cfg.thermal.ambient;
    let refs = refs.copied().unwrap_or(CostRefs {
        area,
        temp_rise: temp - ambient,
        wire,
    });
    let w = cfg.weights;
    let total = w.w1 / perf.bips
        + w.w2 * normalized(area, refs.area)
        + w.w3 * normalized(temp - ambient, refs.temp_rise)
        + w.w4 * normalized(wire, refs.wire);

    Ok(CostBreakdown {
        bips: perf.bips,
        ipc: perf.ipc,
        area,
        temp,
        wire,
        total,
        loop_cycles,
        loop_latency_ps,
    })
}
