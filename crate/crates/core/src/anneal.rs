//! Simulated annealing over (corner block list, candidate selection).
//!
//! Each step applies one of four moves, decodes with layer repair and scores
//! the result. Acceptance is Metropolis with geometric cooling. A run is a
//! single sequential chain driven by a ChaCha8 generator seeded from the run
//! seed, so results are reproducible bit for bit.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cbl::{random_cbl, Cbl3, Direction, Selection};
use crate::decode::{decode, DecodeStats, Floorplan};
use crate::exec::{self, Execution};
use crate::metrics::{cost, CostBreakdown, CostRefs};
use crate::model::{Design, InitialTemperature};

/// Random moves sampled to calibrate an automatic starting temperature.
const CALIBRATION_MOVES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    SwapSequence,
    ChangeDirection,
    FlipCover,
    AlternativeSelection,
}

const MOVES: [Move; 4] = [
    Move::SwapSequence,
    Move::ChangeDirection,
    Move::FlipCover,
    Move::AlternativeSelection,
];

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub cbl: Cbl3,
    pub selection: Selection,
    pub floorplan: Floorplan,
    pub cost: CostBreakdown,
    pub stats: DecodeStats,
}

impl Solution {
    /// Decodes with layer repair and scores. The stored lists are the repaired ones.
    pub fn evaluate(
        design: &Design,
        cbl: &Cbl3,
        selection: &Selection,
        refs: Option<&CostRefs>,
    ) -> Solution {
        let decoded = decode(cbl, design, selection, true)
            .expect("annealer only builds lists that match the design");
        let cost = cost(&decoded.floorplan, design, refs)
            .expect("validated designs always evaluate");
        Solution {
            cbl: decoded.cbl,
            selection: decoded.selection,
            floorplan: decoded.floorplan,
            cost,
            stats: decoded.stats,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u64,
    pub temperature: f64,
    pub cost: f64,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    pub seed: u64,
    pub best: Solution,
    pub refs: CostRefs,
    pub evaluations: u64,
    pub trace: Vec<TraceRecord>,
}

fn multi_candidate_blocks(design: &Design) -> Vec<usize> {
    (0..design.len())
        .filter(|&b| design.block(b).candidates.len() >= 2)
        .collect()
}

fn move_applicable(m: Move, cbl: &Cbl3, alternatives: &[usize]) -> bool {
    match m {
        Move::SwapSequence | Move::ChangeDirection => cbl.len() >= 2,
        Move::FlipCover => !cbl.covers.is_empty(),
        Move::AlternativeSelection => !alternatives.is_empty(),
    }
}

/// Applies one randomly chosen move to copies of `cbl` and `sel`. Returns
/// `None` when no move can change anything (a single block with a single
/// candidate).
pub fn propose_move<R: Rng + ?Sized>(
    design: &Design,
    cbl: &Cbl3,
    sel: &Selection,
    weights: &[f64; 4],
    rng: &mut R,
) -> Option<(Cbl3, Selection, Move)> {
    let alternatives = multi_candidate_blocks(design);
    propose_with(design, cbl, sel, weights, &alternatives, rng)
}

fn propose_with<R: Rng + ?Sized>(
    design: &Design,
    cbl: &Cbl3,
    sel: &Selection,
    weights: &[f64; 4],
    alternatives: &[usize],
    rng: &mut R,
) -> Option<(Cbl3, Selection, Move)> {
    let masked: Vec<f64> = MOVES
        .iter()
        .zip(weights)
        .map(|(&m, &w)| if move_applicable(m, cbl, alternatives) { w } else { 0.0 })
        .collect();
    let pick = WeightedIndex::new(&masked).ok()?;
    let mv = MOVES[pick.sample(rng)];
    let mut cbl = cbl.clone();
    let mut sel = sel.clone();
    match mv {
        Move::SwapSequence => {
            let n = cbl.len();
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            cbl.sequence.swap(i, j);
        }
        Move::ChangeDirection => {
            let i = rng.gen_range(0..cbl.directions.len());
            let current = cbl.directions[i];
            let allowed: &[Direction] = if design.layer_limit() == 1 {
                &Direction::ALL[..2]
            } else {
                &Direction::ALL
            };
            let options: Vec<Direction> = allowed.iter().copied().filter(|&d| d != current).collect();
            cbl.directions[i] = *options.choose(rng).expect("at least one other direction");
        }
        Move::FlipCover => {
            let i = rng.gen_range(0..cbl.covers.len());
            cbl.covers[i] = !cbl.covers[i];
        }
        Move::AlternativeSelection => {
            let b = *alternatives.choose(rng).expect("non-empty");
            let count = design.block(b).candidates.len();
            let current = sel.0[b];
            let mut j = rng.gen_range(0..count - 1);
            if j >= current {
                j += 1;
            }
            sel.0[b] = j;
        }
    }
    Some((cbl, sel, mv))
}

/// One annealing run seeded from the design's configured seed.
pub fn anneal(design: &Design) -> AnnealOutcome {
    anneal_seeded(design, design.config().seed)
}

pub fn anneal_seeded(design: &Design, seed: u64) -> AnnealOutcome {
    let cfg = &design.config().anneal;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alternatives = multi_candidate_blocks(design);

    let start = random_cbl(design, &mut rng);
    let first = Solution::evaluate(design, &start, &Selection::first(design), None);
    let refs = CostRefs::from_breakdown(&first.cost, design.config().thermal.ambient);
    let mut current = Solution::evaluate(design, &first.cbl, &first.selection, Some(&refs));
    let mut best = current.clone();
    let mut evaluations = 1u64;
    let mut trace = vec![TraceRecord {
        iteration: 0,
        temperature: 0.0,
        cost: current.cost.total,
        best: best.cost.total,
    }];

    let max = cfg.max_evaluations;
    let mut temperature = match cfg.initial_temperature {
        InitialTemperature::Fixed(t) => t,
        InitialTemperature::Auto => {
            let samples = CALIBRATION_MOVES.min(max / 10);
            let mut uphill = Vec::new();
            for _ in 0..samples {
                let Some((c, s, _)) = propose_with(
                    design,
                    &current.cbl,
                    &current.selection,
                    &cfg.move_weights,
                    &alternatives,
                    &mut rng,
                ) else {
                    break;
                };
                let cand = Solution::evaluate(design, &c, &s, Some(&refs));
                evaluations += 1;
                let delta = cand.cost.total - current.cost.total;
                if delta > 0.0 {
                    uphill.push(delta);
                }
            }
            if uphill.is_empty() {
                current.cost.total.abs().max(1e-9) * 1e-3
            } else {
                let mean = uphill.iter().sum::<f64>() / uphill.len() as f64;
                mean / std::f64::consts::LN_2
            }
        }
    };

    'outer: while evaluations < max && temperature >= cfg.min_temperature {
        for _ in 0..cfg.moves_per_temperature {
            if evaluations >= max {
                break 'outer;
            }
            let Some((c, s, _)) = propose_with(
                design,
                &current.cbl,
                &current.selection,
                &cfg.move_weights,
                &alternatives,
                &mut rng,
            ) else {
                break 'outer;
            };
            let cand = Solution::evaluate(design, &c, &s, Some(&refs));
            evaluations += 1;
            let delta = cand.cost.total - current.cost.total;
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
                current = cand;
                if current.cost.total < best.cost.total {
                    best = current.clone();
                }
            }
            trace.push(TraceRecord {
                iteration: evaluations - 1,
                temperature,
                cost: current.cost.total,
                best: best.cost.total,
            });
        }
        temperature *= cfg.cooling_ratio;
    }

    AnnealOutcome {
        seed,
        best,
        refs,
        evaluations,
        trace,
    }
}

/// Independent runs, one per seed. Output order follows `seeds`.
pub fn multi_start(design: &Design, seeds: &[u64], exec: Execution) -> Vec<AnnealOutcome> {
    exec::map(seeds.to_vec(), exec, |seed| anneal_seeded(design, seed))
}

/// Seeds for `runs` runs derived from a base seed.
pub fn run_seeds(base: u64, runs: usize) -> Vec<u64> {
    (0..runs as u64).map(|r| base.wrapping_add(r)).collect()
}

/// Index of the best run. Runs normalize against their own first solution, so
/// every best is rescored against the first run's references before comparing;
/// ties go to the earlier run.
pub fn best_run(design: &Design, outcomes: &[AnnealOutcome]) -> Option<usize> {
    let refs = outcomes.first()?.refs;
    let scores: Vec<f64> = outcomes
        .iter()
        .map(|o| {
            cost(&o.best.floorplan, design, Some(&refs))
                .expect("validated designs always evaluate")
                .total
        })
        .collect();
    (0..scores.len()).min_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)))
}
