//! Exhaustive packers for small instances, used to check the decoder and the
//! annealer.
//!
//! [`extreme_point_pack`] does not touch the corner-block code at all. It
//! places blocks one at a time, trying every insertion order and every point
//! whose coordinates are each 0 or the far face of an already placed block, and
//! keeps the best bounding box. Any corner-block decode is itself such a
//! sequence, so the oracle is never worse than [`enumerate_cbl`].

use serde::{Deserialize, Serialize};

use crate::cbl::{Cbl3, Direction, Selection};
use crate::decode::{decode, intervals_overlap, Floorplan, PlacedBlock};
use crate::error::OracleError;
use crate::exec::{self, Execution};
use crate::model::Design;

pub const MAX_EXTREME_POINT_BLOCKS: usize = 8;
pub const MAX_ENUMERATE_BLOCKS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Bounding-box volume (footprint × layers).
    Volume,
    Footprint,
}

impl Objective {
    pub fn of(self, fp: &Floorplan) -> f64 {
        match self {
            Objective::Volume => fp.volume(),
            Objective::Footprint => fp.footprint(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDims {
    pub width: f64,
    pub height: f64,
    pub layers: u32,
}

impl BoxDims {
    fn volume(&self) -> f64 {
        self.width * self.height * self.layers as f64
    }
}

/// The fixed-candidate boxes of a design under a selection.
pub fn boxes_of(design: &Design, sel: &Selection) -> Vec<BoxDims> {
    (0..design.len())
        .map(|b| {
            let c = design.candidate(b, sel.get(b));
            BoxDims {
                width: c.width,
                height: c.height,
                layers: c.layers,
            }
        })
        .collect()
}

struct Search<'a> {
    boxes: &'a [BoxDims],
    z_con: Option<u32>,
    objective: Objective,
    lower_bound: f64,
    best: f64,
    best_plan: Option<Vec<PlacedBlock>>,
    placed: Vec<PlacedBlock>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn extent_with(&self, p: &PlacedBlock) -> [f64; 3] {
        let mut e = [p.hi(0), p.hi(1), p.hi(2)];
        for q in &self.placed {
            for (a, v) in e.iter_mut().enumerate() {
                *v = v.max(q.hi(a));
            }
        }
        e
    }

    fn score(&self, e: [f64; 3]) -> f64 {
        match self.objective {
            Objective::Volume => e[0] * e[1] * e[2],
            Objective::Footprint => e[0] * e[1],
        }
    }

    fn done(&self) -> bool {
        self.best <= self.lower_bound * (1.0 + 1e-12)
    }

    fn dfs(&mut self) {
        if self.placed.len() == self.boxes.len() {
            let e = self.extent_with(&self.placed[0].clone());
            let s = self.score(e);
            if s < self.best {
                self.best = s;
                self.best_plan = Some(self.placed.clone());
            }
            return;
        }
        let mut coords: [Vec<f64>; 3] = [vec![0.0], vec![0.0], vec![0.0]];
        for q in &self.placed {
            for (a, c) in coords.iter_mut().enumerate() {
                c.push(q.hi(a));
            }
        }
        for c in &mut coords {
            c.sort_by(f64::total_cmp);
            c.dedup();
        }
        for i in 0..self.boxes.len() {
            if self.used[i] {
                continue;
            }
            // identical unplaced boxes are interchangeable
            if (0..i).any(|j| !self.used[j] && self.boxes[j] == self.boxes[i]) {
                continue;
            }
            let bx = self.boxes[i];
            self.used[i] = true;
            for &z in &coords[2] {
                if let Some(limit) = self.z_con {
                    if z as u32 + bx.layers > limit {
                        continue;
                    }
                }
                for &y in &coords[1] {
                    for &x in &coords[0] {
                        let cand = PlacedBlock {
                            block: i,
                            candidate: 0,
                            x,
                            y,
                            z: z as u32,
                            width: bx.width,
                            height: bx.height,
                            layers: bx.layers,
                        };
                        if self.score(self.extent_with(&cand)) >= self.best {
                            continue;
                        }
                        if self.placed.iter().any(|q| {
                            (0..3).all(|a| {
                                intervals_overlap(a, cand.lo(a), cand.hi(a), q.lo(a), q.hi(a))
                            })
                        }) {
                            continue;
                        }
                        self.placed.push(cand);
                        self.dfs();
                        self.placed.pop();
                        if self.done() {
                            self.used[i] = false;
                            return;
                        }
                    }
                }
            }
            self.used[i] = false;
        }
    }
}

/// Optimal packing of `boxes` over all insertion orders and extreme points.
/// `z_con = None` leaves the layer count unbounded.
pub fn extreme_point_pack(
    boxes: &[BoxDims],
    z_con: Option<u32>,
    objective: Objective,
) -> Result<Floorplan, OracleError> {
    if boxes.is_empty() {
        return Err(OracleError::Empty);
    }
    if boxes.len() > MAX_EXTREME_POINT_BLOCKS {
        return Err(OracleError::TooLarge {
            found: boxes.len(),
            limit: MAX_EXTREME_POINT_BLOCKS,
        });
    }
    if let Some(limit) = z_con {
        if let Some(i) = boxes.iter().position(|b| b.layers > limit) {
            return Err(OracleError::Infeasible(i));
        }
    }
    let total: f64 = boxes.iter().map(BoxDims::volume).sum();
    let lower_bound = match (objective, z_con) {
        (Objective::Volume, _) => total,
        (Objective::Footprint, Some(limit)) => total / limit as f64,
        (Objective::Footprint, None) => boxes
            .iter()
            .map(|b| b.width * b.height)
            .fold(0.0, f64::max),
    };
    let mut search = Search {
        boxes,
        z_con,
        objective,
        lower_bound,
        best: f64::INFINITY,
        best_plan: None,
        placed: Vec::with_capacity(boxes.len()),
        used: vec![false; boxes.len()],
    };
    search.dfs();
    let plan = search.best_plan.expect("stacking on the floor is always feasible");
    Ok(Floorplan::from_placed(plan))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumerated {
    pub floorplan: Floorplan,
    pub cbl: Cbl3,
    pub objective: f64,
    pub decoded: u64,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

fn best_for_sequence(
    design: &Design,
    sel: &Selection,
    objective: Objective,
    sequence: Vec<usize>,
) -> (Option<Enumerated>, u64) {
    let n = sequence.len();
    let m = n - 1;
    let dir_combos = 3usize.pow(m as u32);
    let count_combos: usize = (1..=m).product::<usize>().max(1);
    let mut best: Option<Enumerated> = None;
    let mut decoded = 0;
    let mut directions = vec![Direction::X; m];
    let mut counts = vec![1usize; m];
    for dc in 0..dir_combos {
        let mut code = dc;
        for d in directions.iter_mut() {
            *d = Direction::ALL[code % 3];
            code /= 3;
        }
        for cc in 0..count_combos {
            // position i (0-based after the first block) covers 1..=i+1 blocks
            let mut code = cc;
            for (i, c) in counts.iter_mut().enumerate() {
                *c = code % (i + 1) + 1;
                code /= i + 1;
            }
            let cbl = Cbl3::from_counts(sequence.clone(), directions.clone(), &counts);
            let out = decode(&cbl, design, sel, true).expect("enumerated lists are well formed");
            decoded += 1;
            let score = objective.of(&out.floorplan);
            if best.as_ref().is_none_or(|b| score < b.objective) {
                best = Some(Enumerated {
                    floorplan: out.floorplan,
                    cbl,
                    objective: score,
                    decoded: 0,
                });
            }
        }
    }
    (best, decoded)
}

/// Best decode over every (S, L, T) of a small design under a fixed
/// selection. The design's layer limit is enforced through repair. Ties keep
/// the lexicographically smallest sequence.
pub fn enumerate_cbl(
    design: &Design,
    sel: &Selection,
    objective: Objective,
    exec: Execution,
) -> Result<Enumerated, OracleError> {
    let n = design.len();
    if n == 0 {
        return Err(OracleError::Empty);
    }
    if n > MAX_ENUMERATE_BLOCKS {
        return Err(OracleError::TooLarge {
            found: n,
            limit: MAX_ENUMERATE_BLOCKS,
        });
    }
    if n == 1 {
        let cbl = Cbl3::from_counts(vec![0], vec![], &[]);
        let out = decode(&cbl, design, sel, true).expect("single block decodes");
        return Ok(Enumerated {
            objective: objective.of(&out.floorplan),
            floorplan: out.floorplan,
            cbl,
            decoded: 1,
        });
    }
    let results = exec::map(permutations(n), exec, |s| {
        best_for_sequence(design, sel, objective, s)
    });
    let total: u64 = results.iter().map(|r| r.1).sum();
    let mut best: Option<Enumerated> = None;
    for r in results.into_iter().filter_map(|r| r.0) {
        if best.as_ref().is_none_or(|b| r.objective < b.objective) {
            best = Some(r);
        }
    }
    let mut best = best.expect("at least one sequence");
    best.decoded = total;
    Ok(best)
}
