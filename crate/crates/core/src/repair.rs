//! Layer-limit repair applied inline while decoding.
//!
//! When a block would poke above the layer limit it is fixed in three stages:
//! swap to a candidate that fits at its current layer, turn a Z cover into an X
//! or Y cover, then cover more of the uncovered list until the block fits.
//! Covering the whole X or Y list puts the block on layer 0, and every candidate
//! of a validated design fits there, so the last stage always terminates with a
//! feasible placement.

use crate::cbl::Direction;
use crate::decode::{DecodeStats, Packer, Tentative};
use crate::model::Design;

/// Candidate with the fewest layers; earliest in list order on ties.
pub fn lowest_candidate(design: &Design, block: usize) -> usize {
    let cands = &design.block(block).candidates;
    (0..cands.len())
        .min_by_key(|&j| cands[j].layers)
        .expect("validated blocks have candidates")
}

pub(crate) fn fix_violation(
    packer: &Packer<'_>,
    block: usize,
    mut t: Tentative,
    stats: &mut DecodeStats,
) -> Tentative {
    let design = packer.design;
    let z_con = design.layer_limit();
    stats.layer_repairs += 1;
    let original = t.candidate;

    let z = t.pos[2] as u32;
    if z < z_con {
        let cands = &design.block(block).candidates;
        if let Some(j) = cands.iter().position(|c| z + c.layers <= z_con) {
            t = packer.tentative(block, j, t.direction, t.cover);
            if !packer.violates(block, &t) {
                if t.candidate != original {
                    stats.candidate_swaps += 1;
                }
                return t;
            }
        }
        let j = lowest_candidate(design, block);
        t = packer.tentative(block, j, t.direction, t.cover);
    }
    if t.candidate != original {
        stats.candidate_swaps += 1;
    }
    if !packer.violates(block, &t) {
        return t;
    }

    if t.direction == Direction::Z {
        stats.direction_changes += 1;
        let x = packer.tentative(block, t.candidate, Direction::X, t.cover);
        let y = packer.tentative(block, t.candidate, Direction::Y, t.cover);
        let key = |c: &Tentative| (packer.violates(block, c), packer.footprint_with(block, c));
        let (kx, ky) = (key(&x), key(&y));
        t = if (ky.0, ky.1) < (kx.0, kx.1) { y } else { x };
    }

    let k = packer.list_len(t.direction);
    while packer.violates(block, &t) && t.cover < k {
        stats.cover_extensions += 1;
        t = packer.tentative(block, t.candidate, t.direction, t.cover + 1);
    }
    debug_assert!(
        !packer.violates(block, &t),
        "covering the full planar list must land on layer 0"
    );
    t
}

#[cfg(test)]
mod tests {
    use crate::cbl::{Cbl3, Direction::*, Selection};
    use crate::decode::decode;
    use crate::model::{Design, DesignDoc, ImplementationCandidate, Strategy};
    use crate::testutil::unit_cubes;

    fn cand(side: f64, layers: u32) -> ImplementationCandidate {
        ImplementationCandidate {
            width: side,
            height: side,
            layers,
            delay: 0.0,
            power: 0.0,
            strategy: Strategy::Base2D,
        }
    }

    #[test]
    fn feasible_block_is_untouched() {
        let d = unit_cubes(2, 2);
        let cbl = Cbl3::from_counts(vec![0, 1], vec![Z], &[1]);
        let out = decode(&cbl, &d, &Selection::first(&d), true).unwrap();
        assert_eq!(out.stats.layer_repairs, 0);
        assert_eq!(out.cbl, cbl);
    }

    #[test]
    fn swaps_to_a_candidate_that_fits() {
        let mut doc = DesignDoc::boxes(&[(1.0, 1.0, 1), (1.0, 1.0, 1)], 2);
        doc.blocks[1].candidates = vec![cand(1.0, 2), cand(1.0, 1)];
        let d = Design::from_doc(doc).unwrap();
        // B stacks on A at z = 1 with its 2-layer candidate: 1 + 2 > 2
        let cbl = Cbl3::from_counts(vec![0, 1], vec![Z], &[1]);
        let out = decode(&cbl, &d, &Selection::first(&d), true).unwrap();
        assert_eq!(out.selection, Selection(vec![0, 1]));
        assert_eq!(out.stats.candidate_swaps, 1);
        assert_eq!(out.stats.direction_changes, 0);
        let b = &out.floorplan.placed[1];
        assert_eq!((b.x, b.y, b.z, b.layers), (0.0, 0.0, 1, 1));
        assert_eq!(out.cbl.directions, vec![Z]);
    }

    #[test]
    fn z_cover_over_full_stack_turns_planar() {
        let mut doc = DesignDoc::boxes(&[(1.0, 1.0, 2), (1.0, 1.0, 2)], 2);
        doc.blocks[1].candidates = vec![cand(1.0, 2)];
        let d = Design::from_doc(doc).unwrap();
        let cbl = Cbl3::from_counts(vec![0, 1], vec![Z], &[1]);
        let out = decode(&cbl, &d, &Selection::first(&d), true).unwrap();
        let b = &out.floorplan.placed[1];
        assert_eq!(b.z, 0);
        assert_eq!(out.cbl.directions, vec![X]);
        assert_eq!(out.floorplan.extent_z, 2);
        assert_eq!(out.stats.direction_changes, 1);
    }

    #[test]
    fn coverage_grows_until_block_reaches_the_floor() {
        // A (1 layer), B stacked on A, C covers B from X and inherits z = 1,
        // but C spans 2 layers with Z_con = 2: must cover A as well.
        let mut doc = DesignDoc::boxes(&[(1.0, 1.0, 1), (1.0, 1.0, 1), (1.0, 1.0, 2)], 2);
        doc.blocks[2].candidates = vec![cand(1.0, 2)];
        let d = Design::from_doc(doc).unwrap();
        let cbl = Cbl3::from_counts(vec![0, 1, 2], vec![Z, X], &[1, 1]);
        let raw = decode(&cbl, &d, &Selection::first(&d), false).unwrap();
        assert_eq!(raw.floorplan.placed[2].z, 1);
        assert_eq!(raw.floorplan.extent_z, 3);

        let out = decode(&cbl, &d, &Selection::first(&d), true).unwrap();
        assert_eq!(out.floorplan.placed[2].z, 0);
        assert_eq!(out.floorplan.extent_z, 2);
        assert_eq!(out.stats.cover_extensions, 1);
        // sequence untouched, other blocks untouched
        assert_eq!(out.cbl.sequence, cbl.sequence);
        assert_eq!(out.floorplan.placed[..2], raw.floorplan.placed[..2]);
        // repaired lists decode to the same floorplan with no further repair
        let again = decode(&out.cbl, &d, &out.selection, true).unwrap();
        assert_eq!(again.floorplan, out.floorplan);
        assert_eq!(again.stats.layer_repairs, 0);
    }
}
