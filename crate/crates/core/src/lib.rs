//! Multi-layer floorplanning of microarchitecture blocks.
//!
//! Blocks may span several silicon layers and come with alternative
//! implementations. Placements are encoded as 3D corner block lists, decoded
//! with inline layer-limit repair, scored on performance, footprint,
//! temperature and wirelength, and searched with simulated annealing.

pub mod anneal;
pub mod candidates;
pub mod cbl;
pub mod decode;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod repair;
pub mod report;
pub mod svg;

#[cfg(test)]
mod testutil;

pub use anneal::{anneal, anneal_seeded, multi_start, AnnealOutcome, Solution};
pub use cbl::{random_cbl, Cbl3, Direction, Selection};
pub use decode::{bounding_box, decode, Decoded, Floorplan, PlacedBlock};
pub use error::{CblError, MetricsError, ModelError, OracleError};
pub use exec::Execution;
pub use model::{load_design, Design, DesignDoc};
pub use report::{Overrides, Report};
