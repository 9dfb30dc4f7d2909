//! Corner-block packing: turns an (S, L, T) list plus a candidate selection
//! into a concrete, overlap-free 3D placement.
//!
//! Blocks are inserted in sequence order at the upper-right-rear corner of the
//! partial packing. Each insertion reads a unary run from `T` giving how many
//! blocks at the tail of the uncovered list in its direction it covers. The
//! inserted block takes its two off-axis coordinates from the first covered
//! block. Along the covering axis it is pushed past every covered block and
//! every earlier block whose off-axis projection overlaps its own, which keeps
//! arbitrary hard boxes disjoint. Decoding is total: any bit string is accepted.
//!
//! Run interpretation:
//! - a run longer than the uncovered list is clamped to the list length and the
//!   remaining 1s start the next run (an implied terminating 0);
//! - an empty run covers one block;
//! - once `T` is exhausted every remaining block covers one block.

use serde::{Deserialize, Serialize};

use crate::cbl::{Cbl3, Direction, Selection};
use crate::error::{CblError, MetricsError};
use crate::model::Design;
use crate::repair;

/// Tolerance on planar (x/y) interval comparisons, in micrometers.
pub const PLANAR_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedBlock {
    pub block: usize,
    pub candidate: usize,
    pub x: f64,
    pub y: f64,
    /// Lowest occupied layer.
    pub z: u32,
    pub width: f64,
    pub height: f64,
    pub layers: u32,
}

impl PlacedBlock {
    pub fn lo(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z as f64,
        }
    }

    pub fn size(&self, axis: usize) -> f64 {
        match axis {
            0 => self.width,
            1 => self.height,
            _ => self.layers as f64,
        }
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.lo(axis) + self.size(axis)
    }

    pub fn top_layer(&self) -> u32 {
        self.z + self.layers
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    /// Middle of the occupied layer span; equals `z` for a single-layer block.
    pub fn center_layer(&self) -> f64 {
        self.z as f64 + (self.layers as f64 - 1.0) / 2.0
    }

    pub fn overlaps(&self, other: &PlacedBlock) -> bool {
        (0..3).all(|a| intervals_overlap(a, self.lo(a), self.hi(a), other.lo(a), other.hi(a)))
    }
}

/// Open-interval overlap test; exact on the layer axis, `PLANAR_EPS` on x/y.
pub fn intervals_overlap(axis: usize, a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> bool {
    if axis == 2 {
        a_lo < b_hi && b_lo < a_hi
    } else {
        a_lo < b_hi - PLANAR_EPS && b_lo < a_hi - PLANAR_EPS
    }
}

/// A complete placement. `placed` is indexed by block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Floorplan {
    pub placed: Vec<PlacedBlock>,
    pub extent_x: f64,
    pub extent_y: f64,
    pub extent_z: u32,
}

impl Floorplan {
    pub fn from_placed(mut placed: Vec<PlacedBlock>) -> Self {
        placed.sort_by_key(|p| p.block);
        let extent_x = placed.iter().map(|p| p.x + p.width).fold(0.0, f64::max);
        let extent_y = placed.iter().map(|p| p.y + p.height).fold(0.0, f64::max);
        let extent_z = placed.iter().map(PlacedBlock::top_layer).max().unwrap_or(0);
        Floorplan {
            placed,
            extent_x,
            extent_y,
            extent_z,
        }
    }

    pub fn volume(&self) -> f64 {
        self.extent_x * self.extent_y * self.extent_z as f64
    }

    pub fn footprint(&self) -> f64 {
        self.extent_x * self.extent_y
    }

    /// First pair of overlapping blocks, if any.
    pub fn find_overlap(&self) -> Option<(usize, usize)> {
        for (i, a) in self.placed.iter().enumerate() {
            for b in &self.placed[i + 1..] {
                if a.overlaps(b) {
                    return Some((a.block, b.block));
                }
            }
        }
        None
    }
}

pub fn bounding_box(fp: &Floorplan) -> Result<(f64, f64, u32), MetricsError> {
    if fp.placed.is_empty() {
        return Err(MetricsError::EmptyFloorplan);
    }
    let f = Floorplan::from_placed(fp.placed.clone());
    Ok((f.extent_x, f.extent_y, f.extent_z))
}

/// Counts of the automatic corrections applied while decoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeStats {
    /// Runs longer than the uncovered list.
    pub clamped_runs: usize,
    /// Runs of length zero, read as one.
    pub zero_runs: usize,
    /// Blocks decoded after `T` ran out.
    pub exhausted_runs: usize,
    /// Blocks that violated the layer limit and went through repair.
    pub layer_repairs: usize,
    pub candidate_swaps: usize,
    pub direction_changes: usize,
    pub cover_extensions: usize,
}

impl DecodeStats {
    pub fn run_repairs(&self) -> usize {
        self.clamped_runs + self.zero_runs + self.exhausted_runs
    }
}

/// Result of decoding. `cbl` and `selection` include any layer repairs, so
/// decoding them again reproduces `floorplan` without further repair.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub floorplan: Floorplan,
    pub cbl: Cbl3,
    pub selection: Selection,
    pub stats: DecodeStats,
}

/// State after one insertion, for inspection and testing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeStep {
    pub block: usize,
    pub direction: Option<Direction>,
    pub covered: usize,
    /// Uncovered lists (block indices) in X, Y, Z order after the insertion.
    pub uncovered: [Vec<usize>; 3],
}

pub fn decode(
    cbl: &Cbl3,
    design: &Design,
    sel: &Selection,
    enforce_layers: bool,
) -> Result<Decoded, CblError> {
    decode_inner(cbl, design, sel, enforce_layers, None)
}

pub fn decode_traced(
    cbl: &Cbl3,
    design: &Design,
    sel: &Selection,
    enforce_layers: bool,
) -> Result<(Decoded, Vec<DecodeStep>), CblError> {
    let mut steps = Vec::with_capacity(design.len());
    let out = decode_inner(cbl, design, sel, enforce_layers, Some(&mut steps))?;
    Ok((out, steps))
}

/// A block's position and orientation while it is being inserted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Tentative {
    pub candidate: usize,
    pub direction: Direction,
    pub cover: usize,
    pub pos: [f64; 3],
}

/// Partial packing in sequence order.
pub(crate) struct Packer<'a> {
    pub design: &'a Design,
    pub placed: Vec<PlacedBlock>,
    /// Per-direction uncovered lists, as positions in `placed`.
    pub uncovered: [Vec<usize>; 3],
    pub extent: [f64; 3],
}

impl<'a> Packer<'a> {
    fn new(design: &'a Design) -> Self {
        Packer {
            design,
            placed: Vec::with_capacity(design.len()),
            uncovered: [Vec::new(), Vec::new(), Vec::new()],
            extent: [0.0; 3],
        }
    }

    pub fn list_len(&self, dir: Direction) -> usize {
        self.uncovered[dir.axis()].len()
    }

    pub fn dims(&self, block: usize, candidate: usize) -> [f64; 3] {
        let c = self.design.candidate(block, candidate);
        [c.width, c.height, c.layers as f64]
    }

    /// Position of `block` covering the last `cover` entries of the uncovered
    /// list in `dir`.
    pub fn locate(&self, block: usize, candidate: usize, dir: Direction, cover: usize) -> [f64; 3] {
        let list = &self.uncovered[dir.axis()];
        let k = list.len();
        let cover = cover.clamp(1, k);
        let covered = &list[k - cover..];
        let first = &self.placed[covered[0]];
        let mut pos = [first.x, first.y, first.z as f64];
        let size = self.dims(block, candidate);
        let axis = dir.axis();
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut along = covered
            .iter()
            .map(|&p| self.placed[p].hi(axis))
            .fold(0.0, f64::max);
        for p in &self.placed {
            if intervals_overlap(a, pos[a], pos[a] + size[a], p.lo(a), p.hi(a))
                && intervals_overlap(b, pos[b], pos[b] + size[b], p.lo(b), p.hi(b))
            {
                along = along.max(p.hi(axis));
            }
        }
        pos[axis] = along;
        pos
    }

    pub fn tentative(&self, block: usize, candidate: usize, dir: Direction, cover: usize) -> Tentative {
        let cover = cover.clamp(1, self.list_len(dir));
        Tentative {
            candidate,
            direction: dir,
            cover,
            pos: self.locate(block, candidate, dir, cover),
        }
    }

    /// Footprint of the partial packing once `t` is added.
    pub fn footprint_with(&self, block: usize, t: &Tentative) -> f64 {
        let size = self.dims(block, t.candidate);
        (self.extent[0].max(t.pos[0] + size[0])) * (self.extent[1].max(t.pos[1] + size[1]))
    }

    pub fn violates(&self, block: usize, t: &Tentative) -> bool {
        let layers = self.design.candidate(block, t.candidate).layers;
        t.pos[2] as u32 + layers > self.design.layer_limit()
    }

    fn commit(&mut self, block: usize, t: Option<&Tentative>, candidate: usize) {
        let c = self.design.candidate(block, candidate);
        let pos = t.map_or([0.0; 3], |t| t.pos);
        let idx = self.placed.len();
        self.placed.push(PlacedBlock {
            block,
            candidate,
            x: pos[0],
            y: pos[1],
            z: pos[2] as u32,
            width: c.width,
            height: c.height,
            layers: c.layers,
        });
        let p = &self.placed[idx];
        for a in 0..3 {
            self.extent[a] = self.extent[a].max(p.hi(a));
        }
        if let Some(t) = t {
            let list = &mut self.uncovered[t.direction.axis()];
            let keep = list.len() - t.cover;
            list.truncate(keep);
        }
        for list in &mut self.uncovered {
            list.push(idx);
        }
    }

    fn snapshot(&self) -> [Vec<usize>; 3] {
        let ids = |l: &Vec<usize>| l.iter().map(|&p| self.placed[p].block).collect();
        [
            ids(&self.uncovered[0]),
            ids(&self.uncovered[1]),
            ids(&self.uncovered[2]),
        ]
    }
}

/// Bits of `T` consumed by one block and how the run ended.
#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    end: usize,
    /// The run ended on a real 0 or on the clamp; copying its bits verbatim
    /// reproduces it.
    self_delimited: bool,
}

fn read_run(bits: &[bool], ptr: &mut usize, k: usize, stats: &mut DecodeStats) -> (usize, Run) {
    let start = *ptr;
    if start >= bits.len() {
        stats.exhausted_runs += 1;
        return (
            1,
            Run {
                start,
                end: start,
                self_delimited: false,
            },
        );
    }
    let mut c = 0;
    while *ptr < bits.len() && bits[*ptr] && c < k {
        c += 1;
        *ptr += 1;
    }
    let self_delimited = if *ptr >= bits.len() {
        false
    } else if !bits[*ptr] {
        *ptr += 1;
        true
    } else {
        stats.clamped_runs += 1;
        true
    };
    if c == 0 {
        stats.zero_runs += 1;
        c = 1;
    }
    (
        c,
        Run {
            start,
            end: *ptr,
            self_delimited,
        },
    )
}

fn decode_inner(
    cbl: &Cbl3,
    design: &Design,
    sel: &Selection,
    enforce_layers: bool,
    mut steps: Option<&mut Vec<DecodeStep>>,
) -> Result<Decoded, CblError> {
    let n = design.len();
    cbl.check(n)?;
    sel.check(design)?;

    let mut stats = DecodeStats::default();
    let mut packer = Packer::new(design);
    let mut selection = sel.clone();
    let mut directions = cbl.directions.clone();
    let mut runs = Vec::with_capacity(n.saturating_sub(1));
    let mut repaired = vec![false; n.saturating_sub(1)];
    let mut counts = Vec::with_capacity(n.saturating_sub(1));
    let bits = &cbl.covers;
    let mut ptr = 0;

    let first = cbl.sequence[0];
    let mut first_choice = selection.get(first);
    if enforce_layers && design.candidate(first, first_choice).layers > design.layer_limit() {
        // unreachable for validated designs; pick the shortest candidate anyway
        first_choice = repair::lowest_candidate(design, first);
        selection.0[first] = first_choice;
    }
    packer.commit(first, None, first_choice);
    if let Some(s) = steps.as_deref_mut() {
        s.push(DecodeStep {
            block: first,
            direction: None,
            covered: 0,
            uncovered: packer.snapshot(),
        });
    }

    for i in 1..n {
        let block = cbl.sequence[i];
        let dir = directions[i - 1];
        let k = packer.list_len(dir);
        let (cover, run) = read_run(bits, &mut ptr, k, &mut stats);
        runs.push(run);
        let mut t = packer.tentative(block, selection.get(block), dir, cover);
        if enforce_layers && packer.violates(block, &t) {
            t = repair::fix_violation(&packer, block, t, &mut stats);
            repaired[i - 1] = true;
            selection.0[block] = t.candidate;
            directions[i - 1] = t.direction;
        }
        counts.push(t.cover);
        packer.commit(block, Some(&t), t.candidate);
        if let Some(s) = steps.as_deref_mut() {
            s.push(DecodeStep {
                block,
                direction: Some(t.direction),
                covered: t.cover,
                uncovered: packer.snapshot(),
            });
        }
    }

    let covers = if repaired.iter().any(|&r| r) {
        rebuild_covers(bits, &runs, &repaired, &counts, ptr)
    } else {
        bits.clone()
    };

    Ok(Decoded {
        floorplan: Floorplan::from_placed(packer.placed),
        cbl: Cbl3 {
            sequence: cbl.sequence.clone(),
            directions,
            covers,
        },
        selection,
        stats,
    })
}

/// Rewrites `T` after layer repair: repaired runs and runs that were not
/// self-delimiting are re-encoded canonically, all others copied verbatim.
fn rebuild_covers(
    bits: &[bool],
    runs: &[Run],
    repaired: &[bool],
    counts: &[usize],
    consumed: usize,
) -> Vec<bool> {
    let mut out = Vec::with_capacity(bits.len() + 8);
    for ((run, &fixed), &c) in runs.iter().zip(repaired).zip(counts) {
        if fixed || !run.self_delimited {
            out.extend(std::iter::repeat_n(true, c));
            out.push(false);
        } else {
            out.extend_from_slice(&bits[run.start..run.end]);
        }
    }
    if consumed < bits.len() {
        out.extend_from_slice(&bits[consumed..]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbl::encode_runs;
    use crate::testutil::{boxes, unit_cubes};
    use Direction::*;

    fn at(fp: &Floorplan, b: usize) -> (f64, f64, u32) {
        let p = &fp.placed[b];
        (p.x, p.y, p.z)
    }

    #[test]
    fn single_block_at_origin() {
        let d = boxes(&[(2.0, 3.0, 1)], 1);
        let cbl = Cbl3::from_counts(vec![0], vec![], &[]);
        let out = decode(&cbl, &d, &Selection::first(&d), true).unwrap();
        assert_eq!(at(&out.floorplan, 0), (0.0, 0.0, 0));
        assert_eq!(bounding_box(&out.floorplan).unwrap(), (2.0, 3.0, 1));
    }

    #[test]
    fn z_cover_stacks() {
        let d = unit_cubes(2, 2);
        let cbl = Cbl3 {
            sequence: vec![0, 1],
            directions: vec![Z],
            covers: vec![true, false],
        };
        let out = decode(&cbl, &d, &Selection::first(&d), false).unwrap();
        assert_eq!(at(&out.floorplan, 1), (0.0, 0.0, 1));
        assert_eq!(bounding_box(&out.floorplan).unwrap(), (1.0, 1.0, 2));
    }

    #[test]
    fn three_cubes_cover_tail_of_y_list() {
        let d = unit_cubes(3, 1);
        let cbl = Cbl3 {
            sequence: vec![0, 1, 2],
            directions: vec![X, Y],
            covers: vec![true, false, true, false],
        };
        let (out, steps) = decode_traced(&cbl, &d, &Selection::first(&d), true).unwrap();
        assert_eq!(at(&out.floorplan, 0), (0.0, 0.0, 0));
        assert_eq!(at(&out.floorplan, 1), (1.0, 0.0, 0));
        assert_eq!(at(&out.floorplan, 2), (1.0, 1.0, 0));
        assert_eq!(bounding_box(&out.floorplan).unwrap(), (2.0, 2.0, 1));
        // before C is inserted the Y list is {A, B}
        assert_eq!(steps[1].uncovered[1], vec![0, 1]);
        assert_eq!(steps[2].uncovered, [vec![1, 2], vec![0, 2], vec![0, 1, 2]]);
    }

    #[test]
    fn eight_cubes_fill_a_cube() {
        let d = unit_cubes(8, 2);
        let cbl = Cbl3::from_counts(
            (0..8).collect(),
            vec![X, Y, X, Z, X, Y, X],
            &[1, 2, 1, 4, 1, 2, 1],
        );
        let out = decode(&cbl, &d, &Selection::first(&d), true).unwrap();
        assert_eq!(out.stats, DecodeStats::default());
        let fp = &out.floorplan;
        assert_eq!((fp.extent_x, fp.extent_y, fp.extent_z), (2.0, 2.0, 2));
        assert_eq!(fp.volume(), 8.0);
        assert!(fp.find_overlap().is_none());
    }

    #[test]
    fn overlong_run_is_clamped_and_spills() {
        let d = unit_cubes(3, 1);
        // B's run "111" is clamped to 1; the spare 1s start C's run.
        let cbl = Cbl3 {
            sequence: vec![0, 1, 2],
            directions: vec![X, X],
            covers: vec![true, true, true, false],
        };
        let out = decode(&cbl, &d, &Selection::first(&d), true).unwrap();
        assert_eq!(out.stats.clamped_runs, 2);
        assert_eq!(at(&out.floorplan, 2), (2.0, 0.0, 0));
    }

    #[test]
    fn empty_cover_string_means_one_each() {
        let d = unit_cubes(4, 1);
        let empty = Cbl3 {
            sequence: vec![0, 1, 2, 3],
            directions: vec![X, Y, X],
            covers: vec![],
        };
        let explicit = Cbl3 {
            covers: encode_runs(&[1, 1, 1]),
            ..empty.clone()
        };
        let a = decode(&empty, &d, &Selection::first(&d), true).unwrap();
        let b = decode(&explicit, &d, &Selection::first(&d), true).unwrap();
        assert_eq!(a.floorplan, b.floorplan);
        assert_eq!(a.stats.exhausted_runs, 3);
    }

    #[test]
    fn zero_run_reads_as_one() {
        let d = unit_cubes(2, 1);
        let cbl = Cbl3 {
            sequence: vec![0, 1],
            directions: vec![Y],
            covers: vec![false],
        };
        let out = decode(&cbl, &d, &Selection::first(&d), true).unwrap();
        assert_eq!(out.stats.zero_runs, 1);
        assert_eq!(at(&out.floorplan, 1), (0.0, 1.0, 0));
    }

    #[test]
    fn wide_block_stays_clear_of_neighbours() {
        // C covers B from Y and its footprint runs past A.
        let d = boxes(&[(1.0, 3.0, 1), (1.0, 1.0, 1), (5.0, 1.0, 1)], 1);
        let cbl = Cbl3::from_counts(vec![0, 1, 2], vec![X, Y], &[1, 1]);
        let out = decode(&cbl, &d, &Selection::first(&d), true).unwrap();
        assert!(out.floorplan.find_overlap().is_none());
        assert_eq!(at(&out.floorplan, 2), (1.0, 1.0, 0));
    }

    #[test]
    fn structural_mismatch_is_an_error() {
        let d = unit_cubes(2, 1);
        let cbl = Cbl3::from_counts(vec![0], vec![], &[]);
        assert!(matches!(
            decode(&cbl, &d, &Selection::first(&d), true),
            Err(CblError::SequenceLength { .. })
        ));
        let cbl = Cbl3::from_counts(vec![0, 1], vec![X], &[1]);
        assert!(matches!(
            decode(&cbl, &d, &Selection(vec![0, 3]), true),
            Err(CblError::CandidateIndex { .. })
        ));
    }

    #[test]
    fn bounding_box_of_empty_floorplan_fails() {
        let fp = Floorplan::from_placed(vec![]);
        assert!(bounding_box(&fp).is_err());
    }
}
