//! The (S, L, T) corner block list and the per-block candidate selection.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::CblError;
use crate::model::Design;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    X,
    Y,
    Z,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::X, Direction::Y, Direction::Z];

    pub fn axis(self) -> usize {
        self as usize
    }

    fn letter(self) -> char {
        match self {
            Direction::X => 'X',
            Direction::Y => 'Y',
            Direction::Z => 'Z',
        }
    }
}

/// Corner block list.
///
/// `sequence` is the packing order (block indices). `directions[j]` is the
/// covering direction of `sequence[j + 1]`. `covers` holds the concatenated
/// unary runs: run `j` is a string of 1s ended by a 0 and gives how many
/// uncovered blocks `sequence[j + 1]` covers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cbl3 {
    pub sequence: Vec<usize>,
    pub directions: Vec<Direction>,
    pub covers: Vec<bool>,
}

impl Cbl3 {
    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Builds a list from explicit cover counts, one per block after the first.
    pub fn from_counts(sequence: Vec<usize>, directions: Vec<Direction>, counts: &[usize]) -> Self {
        Cbl3 {
            sequence,
            directions,
            covers: encode_runs(counts),
        }
    }

    pub fn check(&self, n: usize) -> Result<(), CblError> {
        if self.sequence.len() != n {
            return Err(CblError::SequenceLength {
                expected: n,
                found: self.sequence.len(),
            });
        }
        let mut seen = vec![false; n];
        for &b in &self.sequence {
            if b >= n || seen[b] {
                return Err(CblError::NotPermutation(b));
            }
            seen[b] = true;
        }
        let expected = n.saturating_sub(1);
        if self.directions.len() != expected {
            return Err(CblError::DirectionLength {
                expected,
                found: self.directions.len(),
            });
        }
        Ok(())
    }

    /// Compact text form `S:a,b,c;L:X,Z;T:10110` using block ids.
    pub fn to_text(&self, design: &Design) -> String {
        let ids: Vec<&str> = self
            .sequence
            .iter()
            .map(|&b| design.block(b).id.as_str())
            .collect();
        let dirs: Vec<String> = self.directions.iter().map(|d| d.to_string()).collect();
        let bits: String = self.covers.iter().map(|&b| if b { '1' } else { '0' }).collect();
        format!("S:{};L:{};T:{}", ids.join(","), dirs.join(","), bits)
    }

    pub fn parse(text: &str, design: &Design) -> Result<Self, CblError> {
        let mut sequence = None;
        let mut directions = Vec::new();
        let mut covers = Vec::new();
        for part in text.trim().split(';').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part
                .split_once(':')
                .ok_or_else(|| CblError::Syntax(format!("missing ':' in `{part}`")))?;
            let value = value.trim();
            match key.trim() {
                "S" => {
                    let ids = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|id| {
                            design
                                .block_index(id)
                                .ok_or_else(|| CblError::UnknownBlock(id.to_string()))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    sequence = Some(ids);
                }
                "L" => {
                    directions = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|d| match d {
                            "X" | "x" => Ok(Direction::X),
                            "Y" | "y" => Ok(Direction::Y),
                            "Z" | "z" => Ok(Direction::Z),
                            other => Err(CblError::Syntax(format!("bad direction `{other}`"))),
                        })
                        .collect::<Result<_, _>>()?;
                }
                "T" => {
                    covers = value
                        .chars()
                        .filter(|c| !c.is_whitespace())
                        .map(|c| match c {
                            '1' => Ok(true),
                            '0' => Ok(false),
                            other => Err(CblError::Syntax(format!("bad cover bit `{other}`"))),
                        })
                        .collect::<Result<_, _>>()?;
                }
                other => return Err(CblError::Syntax(format!("unknown section `{other}`"))),
            }
        }
        let sequence = sequence.ok_or_else(|| CblError::Syntax("missing S section".into()))?;
        let cbl = Cbl3 {
            sequence,
            directions,
            covers,
        };
        cbl.check(design.len())?;
        Ok(cbl)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

pub fn encode_runs(counts: &[usize]) -> Vec<bool> {
    let mut bits = Vec::with_capacity(counts.iter().sum::<usize>() + counts.len());
    for &c in counts {
        bits.extend(std::iter::repeat_n(true, c));
        bits.push(false);
    }
    bits
}

/// Chosen candidate index per block, indexed by block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Selection(pub Vec<usize>);

impl Selection {
    /// First candidate of every block.
    pub fn first(design: &Design) -> Self {
        Selection(vec![0; design.len()])
    }

    pub fn get(&self, block: usize) -> usize {
        self.0[block]
    }

    pub fn check(&self, design: &Design) -> Result<(), CblError> {
        if self.0.len() != design.len() {
            return Err(CblError::SelectionLength {
                expected: design.len(),
                found: self.0.len(),
            });
        }
        for (block, &index) in self.0.iter().enumerate() {
            let available = design.block(block).candidates.len();
            if index >= available {
                return Err(CblError::CandidateIndex {
                    block,
                    index,
                    available,
                });
            }
        }
        Ok(())
    }
}

/// Largest cover count drawn by [`random_cbl`].
pub const MAX_RANDOM_COVER: usize = 3;

/// Uniform permutation, uniform directions (planar only when the layer limit is
/// one) and cover counts drawn from `1..=MAX_RANDOM_COVER`.
pub fn random_cbl<R: Rng + ?Sized>(design: &Design, rng: &mut R) -> Cbl3 {
    let n = design.len();
    let mut sequence: Vec<usize> = (0..n).collect();
    sequence.shuffle(rng);
    let dirs: &[Direction] = if design.layer_limit() == 1 {
        &Direction::ALL[..2]
    } else {
        &Direction::ALL
    };
    let m = n.saturating_sub(1);
    let directions = (0..m).map(|_| dirs[rng.gen_range(0..dirs.len())]).collect();
    let counts: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=MAX_RANDOM_COVER)).collect();
    Cbl3::from_counts(sequence, directions, &counts)
}
