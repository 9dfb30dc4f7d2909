//! Design description: blocks with alternative implementations, nets, critical
//! loops and the run configuration.
//!
//! A [`DesignDoc`] is the serialized form read from a JSON design file. It is
//! turned into a validated, immutable [`Design`] by [`Design::from_doc`], which
//! resolves every id to an index and inflates each candidate by the whitespace
//! reserve. The original document is kept alongside so that a loaded design can
//! be written back out unchanged.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ModelError;

/// How a candidate was derived from the planar block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Strategy {
    #[default]
    #[serde(rename = "base_2d")]
    Base2D,
    #[serde(rename = "wordline_fold")]
    WordlineFold,
    #[serde(rename = "port_partition")]
    PortPartition,
}

/// One implementation option for a block. Dimensions in micrometers, delay in
/// picoseconds, power in milliwatts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplementationCandidate {
    pub width: f64,
    pub height: f64,
    pub layers: u32,
    pub delay: f64,
    pub power: f64,
    #[serde(default)]
    pub strategy: Strategy,
}

impl ImplementationCandidate {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub candidates: Vec<ImplementationCandidate>,
    #[serde(default = "default_ports")]
    pub ports: u32,
}

fn default_ports() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub pins: Vec<String>,
    #[serde(default = "default_net_weight")]
    pub weight: f64,
}

fn default_net_weight() -> f64 {
    1.0
}

/// A cyclic microarchitectural dependence path. Consecutive path entries are
/// edges and the last entry connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalLoop {
    pub name: String,
    pub path: Vec<String>,
    pub base_cycles: u32,
    pub sensitivity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            w1: 1.0,
            w2: 0.3,
            w3: 0.05,
            w4: 0.1,
        }
    }
}

impl CostWeights {
    pub fn as_array(&self) -> [f64; 4] {
        [self.w1, self.w2, self.w3, self.w4]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThermalConfig {
    /// Degrees Celsius.
    pub ambient: f64,
    /// Tiles per side on every layer.
    pub grid: u32,
    /// K·mm²/W across each layer interface (and into the sink below layer 0).
    pub layer_resistance: f64,
    pub smoothing_passes: u32,
    pub smoothing_alpha: f64,
    /// Fraction of the rise above ambient removed by thermal vias.
    pub via_mitigation: f64,
    pub thermal_vias: bool,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            ambient: 27.0,
            grid: 16,
            layer_resistance: 4.0,
            smoothing_passes: 2,
            smoothing_alpha: 0.5,
            via_mitigation: 0.6,
            thermal_vias: false,
        }
    }
}

/// Starting temperature of the annealing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InitialTemperature {
    /// Calibrated from a sample of random moves so that roughly half of the
    /// uphill moves would be accepted.
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for InitialTemperature {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            InitialTemperature::Auto => s.serialize_str("auto"),
            InitialTemperature::Fixed(t) => s.serialize_f64(*t),
        }
    }
}

impl<'de> Deserialize<'de> for InitialTemperature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(t) => Ok(InitialTemperature::Fixed(t)),
            Raw::Text(s) if s == "auto" => Ok(InitialTemperature::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"auto\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealConfig {
    pub initial_temperature: InitialTemperature,
    pub cooling_ratio: f64,
    pub moves_per_temperature: u32,
    pub min_temperature: f64,
    pub max_evaluations: u64,
    /// Relative frequency of: sequence swap, direction change, cover-bit flip,
    /// alternative selection.
    pub move_weights: [f64; 4],
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            initial_temperature: InitialTemperature::Auto,
            cooling_ratio: 0.95,
            moves_per_temperature: 200,
            min_temperature: 1e-7,
            max_evaluations: 20_000,
            move_weights: [1.0; 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignConfig {
    /// Picoseconds.
    pub target_cycle_time: f64,
    /// Picoseconds of each cycle lost to latching and skew.
    pub clock_overhead: f64,
    pub layer_limit: u32,
    /// GHz. Derived from the cycle time when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    pub base_ipc: f64,
    pub weights: CostWeights,
    pub wire_delay_per_mm: f64,
    pub via_delay_per_layer: f64,
    /// Wirelength charged per layer crossing, in micrometers.
    pub via_z_wirelength: f64,
    pub whitespace_fraction: f64,
    pub thermal: ThermalConfig,
    pub anneal: AnnealConfig,
    pub seed: u64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            target_cycle_time: 250.0,
            clock_overhead: 46.0,
            layer_limit: 1,
            frequency: None,
            base_ipc: 1.0,
            weights: CostWeights::default(),
            wire_delay_per_mm: 60.0,
            via_delay_per_layer: 2.0,
            via_z_wirelength: 50.0,
            whitespace_fraction: 0.10,
            thermal: ThermalConfig::default(),
            anneal: AnnealConfig::default(),
            seed: 1,
        }
    }
}

impl DesignConfig {
    /// Clock frequency in GHz.
    pub fn frequency_ghz(&self) -> f64 {
        self.frequency.unwrap_or(1000.0 / self.target_cycle_time)
    }

    /// Part of the cycle available for logic and wires, in picoseconds.
    pub fn useful_cycle_time(&self) -> f64 {
        self.target_cycle_time - self.clock_overhead
    }
}

/// Serialized design file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDoc {
    pub blocks: Vec<BlockSpec>,
    #[serde(default)]
    pub nets: Vec<Net>,
    #[serde(default)]
    pub loops: Vec<CriticalLoop>,
    #[serde(default)]
    pub config: DesignConfig,
}

impl DesignDoc {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("design document serializes")
    }

    /// Changes the layer limit, dropping candidates that no longer fit.
    pub fn set_layer_limit(&mut self, layers: u32) {
        self.config.layer_limit = layers;
        for block in &mut self.blocks {
            block.candidates.retain(|c| c.layers <= layers);
        }
    }

    /// Keeps only single-layer candidates.
    pub fn restrict_to_planar(&mut self) {
        for block in &mut self.blocks {
            block.candidates.retain(|c| c.layers == 1);
        }
    }

    /// A design with one fixed candidate per block, ids `b0`, `b1`, … and no
    /// whitespace reserve. Each entry is (width, height, layers).
    pub fn boxes(dims: &[(f64, f64, u32)], layer_limit: u32) -> Self {
        let blocks = dims
            .iter()
            .enumerate()
            .map(|(i, &(width, height, layers))| BlockSpec {
                id: format!("b{i}"),
                name: String::new(),
                candidates: vec![ImplementationCandidate {
                    width,
                    height,
                    layers,
                    delay: 0.0,
                    power: 0.0,
                    strategy: Strategy::Base2D,
                }],
                ports: 1,
            })
            .collect();
        DesignDoc {
            blocks,
            nets: Vec::new(),
            loops: Vec::new(),
            config: DesignConfig {
                layer_limit,
                whitespace_fraction: 0.0,
                ..DesignConfig::default()
            },
        }
    }

    pub fn set_frequency_ghz(&mut self, ghz: f64) {
        self.config.frequency = Some(ghz);
        self.config.target_cycle_time = 1000.0 / ghz;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedNet {
    pub pins: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedLoop {
    pub name: String,
    pub path: Vec<usize>,
    pub base_cycles: u32,
    pub sensitivity: f64,
}

/// A validated design. Candidate dimensions include the whitespace reserve.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    blocks: Vec<BlockSpec>,
    nets: Vec<ResolvedNet>,
    loops: Vec<ResolvedLoop>,
    config: DesignConfig,
    index: HashMap<String, usize>,
    doc: DesignDoc,
}

pub fn load_design(path: impl AsRef<Path>) -> Result<Design, ModelError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
        ModelError::invalid(path.as_ref().display().to_string(), e.to_string())
    })?;
    Design::from_json(&text)
}

impl Design {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Design::from_doc(DesignDoc::from_json(text)?)
    }

    pub fn from_doc(doc: DesignDoc) -> Result<Self, ModelError> {
        validate_config(&doc.config)?;
        let z_con = doc.config.layer_limit;
        let mut index = HashMap::with_capacity(doc.blocks.len());
        if doc.blocks.is_empty() {
            return Err(ModelError::invalid("blocks", "design has no blocks"));
        }
        for (i, block) in doc.blocks.iter().enumerate() {
            let field = format!("blocks[{i}]");
            if block.id.is_empty() {
                return Err(ModelError::invalid(format!("{field}.id"), "empty id"));
            }
            if index.insert(block.id.clone(), i).is_some() {
                return Err(ModelError::invalid(
                    format!("{field}.id"),
                    format!("duplicate block id `{}`", block.id),
                ));
            }
            if block.candidates.is_empty() {
                return Err(ModelError::invalid(
                    format!("{field}.candidates"),
                    format!("block `{}` has no candidates", block.id),
                ));
            }
            if block.ports == 0 {
                return Err(ModelError::invalid(format!("{field}.ports"), "must be ≥ 1"));
            }
            for (j, c) in block.candidates.iter().enumerate() {
                let cf = format!("{field}.candidates[{j}]");
                let ok = |v: f64| v.is_finite() && v > 0.0;
                if !ok(c.width) || !ok(c.height) {
                    return Err(ModelError::invalid(cf, "width and height must be positive"));
                }
                if !(c.delay.is_finite() && c.delay >= 0.0) {
                    return Err(ModelError::invalid(format!("{cf}.delay"), "must be ≥ 0"));
                }
                if !(c.power.is_finite() && c.power >= 0.0) {
                    return Err(ModelError::invalid(format!("{cf}.power"), "must be ≥ 0"));
                }
                if c.layers == 0 {
                    return Err(ModelError::invalid(format!("{cf}.layers"), "must be ≥ 1"));
                }
                if c.layers > z_con {
                    return Err(ModelError::invalid(
                        format!("{cf}.layers"),
                        format!(
                            "block `{}` candidate {j} spans {} layers, layer limit is {z_con}",
                            block.id, c.layers
                        ),
                    ));
                }
            }
        }

        let resolve = |field: &str, id: &str| {
            index.get(id).copied().ok_or_else(|| {
                ModelError::invalid(field.to_string(), format!("unknown block id `{id}`"))
            })
        };

        let mut nets = Vec::with_capacity(doc.nets.len());
        for (i, net) in doc.nets.iter().enumerate() {
            let field = format!("nets[{i}]");
            if net.pins.len() < 2 {
                return Err(ModelError::invalid(format!("{field}.pins"), "needs at least 2 pins"));
            }
            if !(net.weight.is_finite() && net.weight >= 0.0) {
                return Err(ModelError::invalid(format!("{field}.weight"), "must be ≥ 0"));
            }
            let mut pins = Vec::with_capacity(net.pins.len());
            for (j, pin) in net.pins.iter().enumerate() {
                let b = resolve(&format!("{field}.pins[{j}]"), pin)?;
                if pins.contains(&b) {
                    return Err(ModelError::invalid(
                        format!("{field}.pins[{j}]"),
                        format!("duplicate pin `{pin}`"),
                    ));
                }
                pins.push(b);
            }
            nets.push(ResolvedNet {
                pins,
                weight: net.weight,
            });
        }

        let mut loops = Vec::with_capacity(doc.loops.len());
        for (i, lp) in doc.loops.iter().enumerate() {
            let field = format!("loops[{i}]");
            if lp.path.is_empty() {
                return Err(ModelError::invalid(format!("{field}.path"), "empty path"));
            }
            if lp.base_cycles == 0 {
                return Err(ModelError::invalid(format!("{field}.base_cycles"), "must be ≥ 1"));
            }
            if !(0.0..1.0).contains(&lp.sensitivity) {
                return Err(ModelError::invalid(
                    format!("{field}.sensitivity"),
                    "must lie in [0, 1)",
                ));
            }
            let path = lp
                .path
                .iter()
                .enumerate()
                .map(|(j, id)| resolve(&format!("{field}.path[{j}]"), id))
                .collect::<Result<Vec<_>, _>>()?;
            loops.push(ResolvedLoop {
                name: lp.name.clone(),
                path,
                base_cycles: lp.base_cycles,
                sensitivity: lp.sensitivity,
            });
        }

        let inflate = (1.0 + doc.config.whitespace_fraction).sqrt();
        let blocks = doc
            .blocks
            .iter()
            .map(|b| {
                let mut b = b.clone();
                if b.name.is_empty() {
                    b.name = b.id.clone();
                }
                for c in &mut b.candidates {
                    c.width *= inflate;
                    c.height *= inflate;
                }
                b
            })
            .collect();

        Ok(Design {
            blocks,
            nets,
            loops,
            config: doc.config.clone(),
            index,
            doc,
        })
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn block(&self, index: usize) -> &BlockSpec {
        &self.blocks[index]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn nets(&self) -> &[ResolvedNet] {
        &self.nets
    }

    pub fn loops(&self) -> &[ResolvedLoop] {
        &self.loops
    }

    pub fn config(&self) -> &DesignConfig {
        &self.config
    }

    pub fn layer_limit(&self) -> u32 {
        self.config.layer_limit
    }

    pub fn block_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn candidate(&self, block: usize, choice: usize) -> &ImplementationCandidate {
        &self.blocks[block].candidates[choice]
    }

    /// The document this design was built from, without whitespace inflation.
    pub fn doc(&self) -> &DesignDoc {
        &self.doc
    }

    pub fn to_json(&self) -> String {
        self.doc.to_json()
    }
}

fn validate_config(cfg: &DesignConfig) -> Result<(), ModelError> {
    let err = |f: &str, r: &str| Err(ModelError::invalid(format!("config.{f}"), r));
    if !(cfg.target_cycle_time.is_finite() && cfg.target_cycle_time > 0.0) {
        return err("target_cycle_time", "must be positive");
    }
    if !(cfg.clock_overhead >= 0.0 && cfg.clock_overhead < cfg.target_cycle_time) {
        return err("clock_overhead", "must be non-negative and below the cycle time");
    }
    if cfg.layer_limit == 0 {
        return err("layer_limit", "must be ≥ 1");
    }
    if let Some(f) = cfg.frequency {
        if !(f.is_finite() && f > 0.0) || ((f * cfg.target_cycle_time) / 1000.0 - 1.0).abs() > 1e-3
        {
            return err(
                "frequency",
                "frequency × target_cycle_time must equal 1000 within 0.1%",
            );
        }
    }
    if !(cfg.base_ipc.is_finite() && cfg.base_ipc > 0.0) {
        return err("base_ipc", "must be positive");
    }
    let w = cfg.weights.as_array();
    if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().all(|v| *v == 0.0) {
        return err("weights", "weights must be non-negative with at least one positive");
    }
    for (name, v) in [
        ("wire_delay_per_mm", cfg.wire_delay_per_mm),
        ("via_delay_per_layer", cfg.via_delay_per_layer),
        ("via_z_wirelength", cfg.via_z_wirelength),
        ("whitespace_fraction", cfg.whitespace_fraction),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return err(name, "must be ≥ 0");
        }
    }
    let th = &cfg.thermal;
    if th.grid == 0 {
        return err("thermal.grid", "must be ≥ 1");
    }
    if !(0.0..1.0).contains(&th.via_mitigation) {
        return err("thermal.via_mitigation", "must lie in [0, 1)");
    }
    if !(0.0..=1.0).contains(&th.smoothing_alpha) {
        return err("thermal.smoothing_alpha", "must lie in [0, 1]");
    }
    if !(th.layer_resistance.is_finite() && th.layer_resistance >= 0.0) {
        return err("thermal.layer_resistance", "must be ≥ 0");
    }
    if !th.ambient.is_finite() {
        return err("thermal.ambient", "must be finite");
    }
    let an = &cfg.anneal;
    if !(an.cooling_ratio > 0.0 && an.cooling_ratio < 1.0) {
        return err("anneal.cooling_ratio", "must lie in (0, 1)");
    }
    if let InitialTemperature::Fixed(t) = an.initial_temperature {
        if !(t.is_finite() && t > 0.0) {
            return err("anneal.initial_temperature", "must be positive");
        }
    }
    if an.moves_per_temperature == 0 || an.max_evaluations == 0 {
        return err("anneal", "moves_per_temperature and max_evaluations must be positive");
    }
    if !(an.min_temperature.is_finite() && an.min_temperature > 0.0) {
        return err("anneal.min_temperature", "must be positive");
    }
    if an.move_weights.iter().any(|v| !(v.is_finite() && *v >= 0.0))
        || an.move_weights.iter().all(|v| *v == 0.0)
    {
        return err("anneal.move_weights", "must be non-negative with at least one positive");
    }
    Ok(())
}
