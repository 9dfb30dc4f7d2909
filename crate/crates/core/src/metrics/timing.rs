use serde::{Deserialize, Serialize};

use crate::decode::Floorplan;
use crate::error::MetricsError;
use crate::model::{DesignConfig, ResolvedLoop};

/// Lowest IPC the penalty model will report.
pub const IPC_FLOOR: f64 = 1e-6;

/// Total latency around a loop in ps: chosen-candidate delays of every block on
/// the path plus the wire and via delay of every edge, including the closing
/// edge. Wire delay is linear in Manhattan center distance.
pub fn loop_latency(fp: &Floorplan, lp: &ResolvedLoop, cfg: &DesignConfig, delays: &[f64]) -> f64 {
    let n = lp.path.len();
    let mut total: f64 = lp.path.iter().map(|&b| delays[b]).sum();
    for i in 0..n {
        let a = &fp.placed[lp.path[i]];
        let b = &fp.placed[lp.path[(i + 1) % n]];
        let (ax, ay) = a.center();
        let (bx, by) = b.center();
        let mm = ((ax - bx).abs() + (ay - by).abs()) * 1e-3;
        let dz = (a.center_layer() - b.center_layer()).abs();
        total += cfg.wire_delay_per_mm * mm + cfg.via_delay_per_layer * dz;
    }
    total
}

/// Cycles needed to cover `latency_ps` with the useful part of each cycle.
pub fn cycles_for_latency(latency_ps: f64, cfg: &DesignConfig) -> Result<u32, MetricsError> {
    let useful = cfg.useful_cycle_time();
    if useful.is_nan() || useful <= 0.0 {
        return Err(MetricsError::NoUsefulTime {
            cycle: cfg.target_cycle_time,
            overhead: cfg.clock_overhead,
        });
    }
    Ok((latency_ps / useful).ceil().max(0.0) as u32)
}

pub fn loop_cycles(
    fp: &Floorplan,
    lp: &ResolvedLoop,
    cfg: &DesignConfig,
    delays: &[f64],
) -> Result<u32, MetricsError> {
    cycles_for_latency(loop_latency(fp, lp, cfg, delays), cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Performance {
    pub ipc: f64,
    pub bips: f64,
}

/// IPC after the per-loop multiplicative penalty `(1 - s)^extra_cycles`.
/// `cycles[i]` belongs to `loops[i]`.
pub fn bips(loops: &[ResolvedLoop], cycles: &[u32], cfg: &DesignConfig) -> Performance {
    let mut ipc = cfg.base_ipc;
    for (lp, &c) in loops.iter().zip(cycles) {
        let extra = c.saturating_sub(lp.base_cycles);
        if extra > 0 {
            ipc *= (1.0 - lp.sensitivity).powi(extra as i32);
        }
    }
    let ipc = ipc.max(IPC_FLOOR);
    Performance {
        ipc,
        bips: ipc * cfg.frequency_ghz(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_ghz() -> DesignConfig {
        DesignConfig {
            target_cycle_time: 250.0,
            clock_overhead: 46.0,
            ..DesignConfig::default()
        }
    }

    #[test]
    fn useful_time_at_four_ghz() {
        assert_eq!(four_ghz().useful_cycle_time(), 204.0);
        assert_eq!(four_ghz().frequency_ghz(), 4.0);
    }

    #[test]
    fn stage_counts() {
        let cfg = four_ghz();
        assert_eq!(cycles_for_latency(4200.0, &cfg).unwrap(), 21);
        assert_eq!(cycles_for_latency(204.0, &cfg).unwrap(), 1);
        assert_eq!(cycles_for_latency(204.1, &cfg).unwrap(), 2);
    }

    #[test]
    fn overhead_consuming_whole_cycle_is_an_error() {
        let cfg = DesignConfig {
            clock_overhead: 250.0,
            ..four_ghz()
        };
        assert!(cycles_for_latency(10.0, &cfg).is_err());
    }

    fn lp(base: u32, s: f64) -> ResolvedLoop {
        ResolvedLoop {
            name: "l".into(),
            path: vec![0],
            base_cycles: base,
            sensitivity: s,
        }
    }

    #[test]
    fn no_extra_cycles_keeps_base_ipc() {
        let cfg = four_ghz();
        let p = bips(&[lp(10, 0.05)], &[9], &cfg);
        assert_eq!(p.ipc, 1.0);
        assert_eq!(p.bips, 4.0);
    }

    #[test]
    fn two_extra_cycles() {
        let cfg = four_ghz();
        let p = bips(&[lp(10, 0.05)], &[12], &cfg);
        assert!((p.ipc - 0.9025).abs() < 1e-12);
        assert!((p.bips - 3.61).abs() < 1e-12);
    }

    #[test]
    fn ipc_is_floored() {
        let cfg = four_ghz();
        let p = bips(&[lp(1, 0.99)], &[500], &cfg);
        assert_eq!(p.ipc, IPC_FLOOR);
    }
}
