#![allow(dead_code)]

use cube3d::cbl::{Cbl3, Direction, Selection};
use cube3d::model::{
    BlockSpec, CriticalLoop, Design, DesignConfig, DesignDoc, ImplementationCandidate, Net, Strategy,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn driver_doc() -> DesignDoc {
    let text = include_str!("../../fixtures/driver.json");
    DesignDoc::from_json(text).expect("bundled fixture parses")
}

/// A design with `n` blocks of 1–3 candidates each, no whitespace reserve, and
/// every candidate within `z_con` layers. Nets and loops are sprinkled in so
/// the cost can be evaluated.
pub fn random_doc<R: Rng>(rng: &mut R, n: usize, z_con: u32) -> DesignDoc {
    let blocks = (0..n)
        .map(|i| {
            let k = rng.gen_range(1..=3);
            let candidates = (0..k)
                .map(|_| ImplementationCandidate {
                    width: rng.gen_range(1.0..100.0),
                    height: rng.gen_range(1.0..100.0),
                    layers: rng.gen_range(1..=z_con),
                    delay: rng.gen_range(0.0..300.0),
                    power: rng.gen_range(0.0..500.0),
                    strategy: Strategy::Base2D,
                })
                .collect();
            BlockSpec {
                id: format!("b{i}"),
                name: String::new(),
                candidates,
                ports: 1,
            }
        })
        .collect();
    let mut nets = Vec::new();
    let mut loops = Vec::new();
    if n >= 2 {
        for _ in 0..n.min(10) {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n);
            if a == b {
                b = (a + 1) % n;
            }
            nets.push(Net {
                pins: vec![format!("b{a}"), format!("b{b}")],
                weight: rng.gen_range(0.5..2.0),
            });
        }
        loops.push(CriticalLoop {
            name: "l0".into(),
            path: (0..n.min(4)).map(|i| format!("b{i}")).collect(),
            base_cycles: 2,
            sensitivity: 0.05,
        });
    }
    DesignDoc {
        blocks,
        nets,
        loops,
        config: DesignConfig {
            layer_limit: z_con,
            whitespace_fraction: 0.0,
            ..DesignConfig::default()
        },
    }
}

pub fn random_design<R: Rng>(rng: &mut R, n: usize, z_con: u32) -> Design {
    Design::from_doc(random_doc(rng, n, z_con)).expect("random design is valid")
}

/// Any structurally valid list triple: directions over all three axes, an
/// arbitrary bit string for `T`.
pub fn random_lists<R: Rng>(rng: &mut R, design: &Design) -> (Cbl3, Selection) {
    let n = design.len();
    let mut sequence: Vec<usize> = (0..n).collect();
    sequence.shuffle(rng);
    let directions = (1..n).map(|_| Direction::ALL[rng.gen_range(0..3)]).collect();
    let bits = rng.gen_range(0..=3 * n);
    let covers = (0..bits).map(|_| rng.gen_bool(0.6)).collect();
    let sel = Selection(
        (0..n)
            .map(|b| rng.gen_range(0..design.block(b).candidates.len()))
            .collect(),
    );
    (
        Cbl3 {
            sequence,
            directions,
            covers,
        },
        sel,
    )
}
