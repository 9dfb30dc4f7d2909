//! Self-contained JSON run report and its re-verification.

use serde::{Deserialize, Serialize};

use crate::cbl::{Cbl3, Selection};
use crate::decode::{DecodeStats, Floorplan, PlacedBlock};
use crate::metrics::{cost, thermal_map, CostBreakdown, CostRefs, LoopReport, ThermalMap};
use crate::model::{CostWeights, Design, DesignDoc, Strategy};

/// Command-line adjustments applied to a design file before validation.
/// Stored in the report so the same design can be rebuilt for re-evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub layers: Option<u32>,
    pub frequency_ghz: Option<f64>,
    pub weights: Option<CostWeights>,
    pub thermal_vias: Option<bool>,
    #[serde(default)]
    pub planar_only: bool,
    pub max_evaluations: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, doc: &mut DesignDoc) {
        if let Some(z) = self.layers {
            doc.set_layer_limit(z);
        }
        if self.planar_only {
            doc.restrict_to_planar();
        }
        if let Some(f) = self.frequency_ghz {
            doc.set_frequency_ghz(f);
        }
        if let Some(w) = self.weights {
            doc.config.weights = w;
        }
        if let Some(v) = self.thermal_vias {
            doc.config.thermal.thermal_vias = v;
        }
        if let Some(m) = self.max_evaluations {
            doc.config.anneal.max_evaluations = m;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDigest {
    pub blocks: usize,
    pub nets: usize,
    pub loops: usize,
    pub layer_limit: u32,
    pub frequency_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub id: String,
    pub candidate_index: usize,
    pub strategy: Strategy,
    pub layers: u32,
    pub x: f64,
    pub y: f64,
    pub z: u32,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extents {
    pub extent_x: f64,
    pub extent_y: f64,
    pub extent_z: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSummary {
    pub peak_without_vias: f64,
    pub peak_with_vias: f64,
    /// Map used by the cost (with vias only when they are enabled).
    pub map: ThermalMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub runs: usize,
    pub best_run: usize,
    pub evaluations: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub design: DesignDigest,
    pub overrides: Overrides,
    pub blocks: Vec<BlockReport>,
    pub floorplan: Extents,
    pub cbl: String,
    pub selection: Vec<usize>,
    pub refs: CostRefs,
    pub cost: CostBreakdown,
    pub loops: Vec<LoopReport>,
    pub thermal: ThermalSummary,
    pub decode: DecodeStats,
    pub run: RunMeta,
}

fn powers(design: &Design, fp: &Floorplan) -> Vec<f64> {
    let mut p = vec![0.0; design.len()];
    for b in &fp.placed {
        p[b.block] = design.candidate(b.block, b.candidate).power;
    }
    p
}

/// Everything in a report that is recomputed from the floorplan.
struct Evaluation {
    cost: CostBreakdown,
    loops: Vec<LoopReport>,
    thermal: ThermalSummary,
}

fn evaluate(design: &Design, fp: &Floorplan, refs: &CostRefs) -> Evaluation {
    let cost = cost(fp, design, Some(refs)).expect("validated designs always evaluate");
    let loops = design
        .loops()
        .iter()
        .zip(cost.loop_cycles.iter().zip(&cost.loop_latency_ps))
        .map(|(lp, (&cycles, &latency_ps))| LoopReport {
            name: lp.name.clone(),
            latency_ps,
            cycles,
            base_cycles: lp.base_cycles,
        })
        .collect();
    let th = &design.config().thermal;
    let p = powers(design, fp);
    let plain = thermal_map(fp, &p, th, false).expect("non-empty floorplan");
    let vias = thermal_map(fp, &p, th, true).expect("non-empty floorplan");
    let thermal = ThermalSummary {
        peak_without_vias: plain.peak,
        peak_with_vias: vias.peak,
        map: if th.thermal_vias { vias } else { plain },
    };
    Evaluation {
        cost,
        loops,
        thermal,
    }
}

impl Report {
    #[allow(clippy::too_many_arguments)]
    pub fn build(
        design: &Design,
        overrides: &Overrides,
        fp: &Floorplan,
        cbl: &Cbl3,
        selection: &Selection,
        stats: DecodeStats,
        refs: CostRefs,
        run: RunMeta,
    ) -> Report {
        let ev = evaluate(design, fp, &refs);
        let blocks = fp
            .placed
            .iter()
            .map(|p| {
                let spec = design.block(p.block);
                BlockReport {
                    id: spec.id.clone(),
                    candidate_index: p.candidate,
                    strategy: spec.candidates[p.candidate].strategy,
                    layers: p.layers,
                    x: p.x,
                    y: p.y,
                    z: p.z,
                    width: p.width,
                    height: p.height,
                }
            })
            .collect();
        Report {
            design: DesignDigest {
                blocks: design.len(),
                nets: design.nets().len(),
                loops: design.loops().len(),
                layer_limit: design.layer_limit(),
                frequency_ghz: design.config().frequency_ghz(),
            },
            overrides: overrides.clone(),
            blocks,
            floorplan: Extents {
                extent_x: fp.extent_x,
                extent_y: fp.extent_y,
                extent_z: fp.extent_z,
            },
            cbl: cbl.to_text(design),
            selection: selection.0.clone(),
            refs,
            cost: ev.cost,
            loops: ev.loops,
            thermal: ev.thermal,
            decode: stats,
            run,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Placement recorded in the report, resolved against `design`.
    pub fn floorplan(&self, design: &Design) -> Result<Floorplan, Vec<String>> {
        let mut errors = Vec::new();
        let mut placed = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let Some(block) = design.block_index(&b.id) else {
                errors.push(format!("unknown block `{}`", b.id));
                continue;
            };
            if b.candidate_index >= design.block(block).candidates.len() {
                errors.push(format!("block `{}`: no candidate {}", b.id, b.candidate_index));
                continue;
            }
            placed.push(PlacedBlock {
                block,
                candidate: b.candidate_index,
                x: b.x,
                y: b.y,
                z: b.z,
                width: b.width,
                height: b.height,
                layers: b.layers,
            });
        }
        if placed.len() != design.len() && errors.is_empty() {
            errors.push(format!(
                "report places {} blocks, design has {}",
                placed.len(),
                design.len()
            ));
        }
        if errors.is_empty() {
            Ok(Floorplan::from_placed(placed))
        } else {
            Err(errors)
        }
    }

    /// Recomputes every derived field from the stored placement. Returns the
    /// fresh breakdown and the list of fields that differ from the report.
    pub fn verify(&self, design: &Design) -> (Option<CostBreakdown>, Vec<String>) {
        let fp = match self.floorplan(design) {
            Ok(fp) => fp,
            Err(e) => return (None, e),
        };
        let mut diffs = Vec::new();
        for p in &fp.placed {
            let c = design.candidate(p.block, p.candidate);
            let id = &design.block(p.block).id;
            if c.width != p.width || c.height != p.height || c.layers != p.layers {
                diffs.push(format!("blocks.{id}: dimensions do not match candidate"));
            }
        }
        if let Some((a, b)) = fp.find_overlap() {
            diffs.push(format!(
                "blocks: `{}` overlaps `{}`",
                design.block(a).id,
                design.block(b).id
            ));
        }
        if fp.extent_z > design.layer_limit() {
            diffs.push("floorplan.extent_z: exceeds layer limit".into());
        }
        let ext = Extents {
            extent_x: fp.extent_x,
            extent_y: fp.extent_y,
            extent_z: fp.extent_z,
        };
        if ext != self.floorplan {
            diffs.push("floorplan: extents differ".into());
        }
        let ev = evaluate(design, &fp, &self.refs);
        let (a, b) = (&ev.cost, &self.cost);
        for (name, x, y) in [
            ("bips", a.bips, b.bips),
            ("ipc", a.ipc, b.ipc),
            ("area", a.area, b.area),
            ("temp", a.temp, b.temp),
            ("wire", a.wire, b.wire),
            ("total", a.total, b.total),
        ] {
            if x.to_bits() != y.to_bits() {
                diffs.push(format!("cost.{name}: stored {y}, recomputed {x}"));
            }
        }
        if a.loop_cycles != b.loop_cycles {
            diffs.push("cost.loop_cycles".into());
        }
        if a.loop_latency_ps != b.loop_latency_ps {
            diffs.push("cost.loop_latency_ps".into());
        }
        if ev.loops != self.loops {
            diffs.push("loops".into());
        }
        if ev.thermal != self.thermal {
            diffs.push("thermal".into());
        }
        (Some(ev.cost), diffs)
    }

    /// Report JSON with the wall-clock field zeroed, for reproducibility checks.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.run.wall_time_s = 0.0;
        r.to_json()
    }
}
