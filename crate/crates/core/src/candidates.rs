//! Turns a planar block into multi-layer implementation candidates.
//!
//! Two strategies are modelled. Wordline folding splits the array across `k`
//! layers along one planar axis, so only the height shrinks and the width pays
//! for duplicated wordline drivers. Port partitioning moves ports onto separate
//! layers, shrinking both planar axes, and is only meaningful while `k` does not
//! exceed the port count. Delay and power are scaled by per-layer-count factor
//! tables; explicit candidate tables in the design file remain the primary
//! source of candidate data.

use serde::{Deserialize, Serialize};

use crate::model::{ImplementationCandidate, Strategy};

/// Side of the square reserved for one inter-layer via, in micrometers.
pub const VIA_PITCH_UM: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseBlock {
    pub width: f64,
    pub height: f64,
    pub delay: f64,
    pub power: f64,
    pub ports: u32,
}

/// Factor tables indexed by layer count starting at 2; counts past the end of
/// a table reuse its last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyScaling {
    pub fold_delay: Vec<f64>,
    pub fold_power: Vec<f64>,
    pub partition_delay: Vec<f64>,
    pub partition_power: Vec<f64>,
    /// Width overhead of the duplicated wordline drivers.
    pub driver_dup_overhead: f64,
    /// Vias added per extra layer by port partitioning; each takes
    /// `VIA_PITCH_UM²` of silicon.
    pub partition_vias: u32,
}

impl Default for StrategyScaling {
    fn default() -> Self {
        StrategyScaling {
            fold_delay: vec![0.70, 0.62, 0.58],
            fold_power: vec![1.0],
            partition_delay: vec![0.77, 0.72, 0.70],
            partition_power: vec![1.0],
            driver_dup_overhead: 0.05,
            partition_vias: 0,
        }
    }
}

fn factor(table: &[f64], layers: u32) -> f64 {
    match table {
        [] => 1.0,
        _ => table[(layers as usize - 2).min(table.len() - 1)],
    }
}

/// Base candidate first, then for each `k` in `2..=max_layers` a wordline-fold
/// candidate and, when `k ≤ ports`, a port-partition candidate.
pub fn generate_candidates(
    base: &BaseBlock,
    max_layers: u32,
    scaling: &StrategyScaling,
) -> Vec<ImplementationCandidate> {
    assert!(max_layers >= 1, "max_layers must be at least 1");
    assert!(
        base.width > 0.0 && base.height > 0.0,
        "base dimensions must be positive"
    );
    let mut out = vec![ImplementationCandidate {
        width: base.width,
        height: base.height,
        layers: 1,
        delay: base.delay,
        power: base.power,
        strategy: Strategy::Base2D,
    }];
    for k in 2..=max_layers {
        let kf = k as f64;
        out.push(ImplementationCandidate {
            width: base.width * (1.0 + scaling.driver_dup_overhead),
            height: base.height / kf,
            layers: k,
            delay: base.delay * factor(&scaling.fold_delay, k),
            power: base.power * factor(&scaling.fold_power, k),
            strategy: Strategy::WordlineFold,
        });
        if k <= base.ports {
            let split = k.min(base.ports) as f64;
            let (mut w, mut h) = (base.width / split, base.height / split);
            let via_area = scaling.partition_vias as f64 * (k - 1) as f64 * VIA_PITCH_UM * VIA_PITCH_UM;
            if via_area > 0.0 {
                let grow = ((w * h + via_area) / (w * h)).sqrt();
                w *= grow;
                h *= grow;
            }
            out.push(ImplementationCandidate {
                width: w,
                height: h,
                layers: k,
                delay: base.delay * factor(&scaling.partition_delay, k),
                power: base.power * factor(&scaling.partition_power, k),
                strategy: Strategy::PortPartition,
            });
        }
    }
    out
}
