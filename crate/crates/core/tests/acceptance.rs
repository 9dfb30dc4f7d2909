//! Release gate. Runs every acceptance criterion, prints one PASS/FAIL line
//! for each and exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{random_design, random_lists};
use cube3d::anneal::{anneal_seeded, best_run, multi_start, run_seeds, AnnealOutcome};
use cube3d::cbl::{Cbl3, Direction, Selection};
use cube3d::decode::{decode, Floorplan};
use cube3d::metrics::{bips, cycles_for_latency, thermal_map};
use cube3d::model::{CostWeights, CriticalLoop, Design, DesignDoc};
use cube3d::oracle::{enumerate_cbl, extreme_point_pack, BoxDims, Objective};
use cube3d::report::{Report, RunMeta};
use cube3d::{Execution, Overrides};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn disjoint(fp: &Floorplan) -> bool {
    fp.find_overlap().is_none()
}

fn decoder_totality() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let (mut decodes, mut failures, mut overlaps) = (0u64, 0u64, 0u64);
    while decodes < 100_000 {
        let n = rng.gen_range(1..=50);
        let z_con = rng.gen_range(1..=4);
        let design = random_design(&mut rng, n, z_con);
        for _ in 0..100 {
            let (cbl, sel) = random_lists(&mut rng, &design);
            match decode(&cbl, &design, &sel, decodes % 2 == 0) {
                Ok(out) => overlaps += u64::from(!disjoint(&out.floorplan)),
                Err(_) => failures += 1,
            }
            decodes += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        failures == 0 && overlaps == 0 && secs < 60.0,
        format!("{decodes} decodes, {failures} failures, {overlaps} overlapping plans, {secs:.1} s"),
    )
}

fn layer_feasibility() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF00D);
    let mut violations = 0;
    let mut repaired = 0;
    let total = 10_000;
    for i in 0..total {
        let z_con = 1 + (i % 4) as u32;
        let n = rng.gen_range(1..=40);
        let design = random_design(&mut rng, n, z_con);
        let (cbl, sel) = random_lists(&mut rng, &design);
        let out = decode(&cbl, &design, &sel, true).expect("decode is total");
        repaired += usize::from(out.stats.layer_repairs > 0);
        if out.floorplan.extent_z > z_con || !disjoint(&out.floorplan) {
            violations += 1;
        }
    }
    verdict(
        violations == 0,
        format!("{total} decodes over Z_con 1..4, {violations} violations ({repaired} needed repair)"),
    )
}

fn oracle_soundness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut below = 0;
    let mut gaps = Vec::new();
    let mut within_25 = [0usize; 2];
    for (slot, (n, count)) in [(3usize, 100usize), (4, 50)].into_iter().enumerate() {
        for _ in 0..count {
            let z_con = rng.gen_range(1..=3);
            let dims: Vec<(f64, f64, u32)> = (0..n)
                .map(|_| (rng.gen_range(1.0..10.0), rng.gen_range(1.0..10.0), rng.gen_range(1..=z_con)))
                .collect();
            let design = Design::from_doc(DesignDoc::boxes(&dims, z_con)).unwrap();
            let sel = Selection::first(&design);
            let e = enumerate_cbl(&design, &sel, Objective::Volume, Execution::Parallel).unwrap();
            let boxes: Vec<BoxDims> = dims
                .iter()
                .map(|&(width, height, layers)| BoxDims { width, height, layers })
                .collect();
            let o = extreme_point_pack(&boxes, Some(z_con), Objective::Volume).unwrap();
            let gap = e.objective / o.volume() - 1.0;
            if gap < -1e-12 {
                below += 1;
            }
            if gap <= 0.25 {
                within_25[slot] += 1;
            }
            gaps.push(gap);
        }
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let max = gaps.iter().cloned().fold(0.0, f64::max);
    let cubes = vec![
        BoxDims {
            width: 1.0,
            height: 1.0,
            layers: 1,
        };
        8
    ];
    let cube_volume = extreme_point_pack(&cubes, Some(2), Objective::Volume).unwrap().volume();
    let cube_design = Design::from_doc(DesignDoc::boxes(&[(1.0, 1.0, 1); 8], 2)).unwrap();
    use Direction::*;
    let grid = Cbl3::from_counts((0..8).collect(), vec![X, Y, X, Z, X, Y, X], &[1, 2, 1, 4, 1, 2, 1]);
    let grid_volume = decode(&grid, &cube_design, &Selection::first(&cube_design), true)
        .unwrap()
        .floorplan
        .volume();
    verdict(
        below == 0 && cube_volume == 8.0 && grid_volume == 8.0,
        format!(
            "150 instances, {below} below oracle, mean gap {:.2}%, max gap {:.2}%, within 25%: {}/100 (n=3) {}/50 (n=4); 8 cubes: oracle {cube_volume}, list {grid_volume}",
            mean * 100.0,
            max * 100.0,
            within_25[0],
            within_25[1]
        ),
    )
}

fn timing_arithmetic() -> Verdict {
    let mut doc = DesignDoc::boxes(&[(1.0, 1.0, 1)], 1);
    doc.set_frequency_ghz(4.0);
    let design = Design::from_doc(doc).unwrap();
    let cfg = design.config();
    let useful = cfg.useful_cycle_time();
    let c = |d: f64| cycles_for_latency(d, cfg).unwrap();
    let checks = [
        (useful == 204.0, "useful time"),
        (c(4200.0) == 21, "4200 ps"),
        (c(204.0) == 1, "204 ps"),
        (c(204.1) == 2, "204.1 ps"),
        (c(408.0) == 2, "408 ps"),
        (c(408.0001) == 3, "408.0001 ps"),
        (c(0.0) == 0, "0 ps"),
    ];
    let mut penalty = design.config().clone();
    penalty.base_ipc = 1.0;
    let lp = cube3d::model::ResolvedLoop {
        name: "l".into(),
        path: vec![0],
        base_cycles: 3,
        sensitivity: 0.05,
    };
    let perf = bips(&[lp], &[5], &penalty);
    let ipc_ok = (perf.ipc - 0.9025).abs() < 1e-12 && (perf.bips - 3.61).abs() < 1e-12;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.0).map(|c| c.1).collect();
    verdict(
        failed.is_empty() && ipc_ok,
        format!(
            "useful {useful} ps, 4200 ps -> {} cycles, ipc {:.4} bips {:.4}{}",
            c(4200.0),
            perf.ipc,
            perf.bips,
            if failed.is_empty() { String::new() } else { format!(", failed: {failed:?}") }
        ),
    )
}

fn driver(layers: u32, planar: bool) -> Design {
    let mut doc = common::driver_doc();
    Overrides {
        layers: Some(layers),
        frequency_ghz: Some(4.0),
        planar_only: planar,
        ..Overrides::default()
    }
    .apply(&mut doc);
    Design::from_doc(doc).unwrap()
}

fn trend_reproduction() -> Verdict {
    let start = Instant::now();
    let seeds = run_seeds(1, 10);
    let configs = [("1L", driver(1, true)), ("2D2L", driver(2, true)), ("3D2L", driver(2, false))];
    let runs: Vec<Vec<AnnealOutcome>> = configs
        .iter()
        .map(|(_, d)| multi_start(d, &seeds, Execution::Parallel))
        .collect();
    let mut ordered = 0;
    for i in 0..seeds.len() {
        let b: Vec<f64> = runs.iter().map(|r| r[i].best.cost.bips).collect();
        let ok = b[2] > b[1] && b[1] > b[0];
        ordered += usize::from(ok);
        println!(
            "    seed {:>2}: bips 1L {:.3}  2D2L {:.3}  3D2L {:.3}  {}",
            seeds[i],
            b[0],
            b[1],
            b[2],
            if ok { "ordered" } else { "not ordered" }
        );
    }
    let best: Vec<&AnnealOutcome> = configs
        .iter()
        .zip(&runs)
        .map(|((_, d), r)| &r[best_run(d, r).unwrap()])
        .collect();
    for ((name, _), o) in configs.iter().zip(&best) {
        println!(
            "    best {name:<4}: footprint {:.2} mm2, bips {:.3}, cycles {:?}",
            o.best.cost.area, o.best.cost.bips, o.best.cost.loop_cycles
        );
    }
    let ratio = best[2].best.cost.area / best[0].best.cost.area;
    let ratio_2d = best[1].best.cost.area / best[0].best.cost.area;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        ordered >= 8 && ratio <= 0.65 && secs < 600.0,
        format!(
            "{ordered}/10 seeds with 3D2L > 2D2L > 1L; footprint ratio 3D2L/1L {ratio:.3} (2D2L/1L {ratio_2d:.3}); {secs:.1} s"
        ),
    )
}

fn thermal_properties() -> Verdict {
    let th = cube3d::model::ThermalConfig::default();
    let pair = Design::from_doc(DesignDoc::boxes(&[(1000.0, 1000.0, 1); 2], 2)).unwrap();
    let sel = Selection::first(&pair);
    use Direction::*;
    let plan = |d| {
        decode(&Cbl3::from_counts(vec![0, 1], vec![d], &[1]), &pair, &sel, true)
            .unwrap()
            .floorplan
    };
    let (stacked, flat) = (plan(Z), plan(X));
    let zero = thermal_map(&stacked, &[0.0, 0.0], &th, false).unwrap();
    let zero_ok = zero.tiles.iter().all(|&t| t == 27.0) && zero.peak == 27.0;
    let hot = [3000.0, 3000.0];
    let s = thermal_map(&stacked, &hot, &th, false).unwrap();
    let f = thermal_map(&flat, &hot, &th, false).unwrap();
    let v = thermal_map(&stacked, &hot, &th, true).unwrap();
    let ratio = v.peak_rise() / s.peak_rise();
    verdict(
        zero_ok && s.peak >= f.peak && (ratio - 0.4).abs() < 1e-12,
        format!(
            "zero power all 27.0 C: {zero_ok}; stacked peak {:.2} C vs side by side {:.2} C; via rise ratio {ratio:.12}",
            s.peak, f.peak
        ),
    )
}

fn report_for(design: &Design, outcomes: &[AnnealOutcome]) -> String {
    let i = best_run(design, outcomes).unwrap();
    let o = &outcomes[i];
    Report::build(
        design,
        &Overrides::default(),
        &o.best.floorplan,
        &o.best.cbl,
        &o.best.selection,
        o.best.stats,
        o.refs,
        RunMeta {
            seed: o.seed,
            runs: outcomes.len(),
            best_run: i,
            evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
            wall_time_s: 0.0,
        },
    )
    .canonical_json()
}

fn determinism() -> Verdict {
    let design = driver(2, false);
    let seeds = run_seeds(7, 4);
    let a = report_for(&design, &[anneal_seeded(&design, 7)]);
    let b = report_for(&design, &[anneal_seeded(&design, 7)]);
    let seq = report_for(&design, &multi_start(&design, &seeds, Execution::Sequential));
    let par = parallel_report(&design, &seeds);
    verdict(
        a == b && seq == par,
        format!(
            "repeat run identical: {}; sequential vs {}-thread multi-start identical: {}",
            a == b,
            THREADS,
            seq == par
        ),
    )
}

const THREADS: usize = 4;

#[cfg(feature = "parallel")]
fn parallel_report(design: &Design, seeds: &[u64]) -> String {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(THREADS)
        .build()
        .unwrap();
    pool.install(|| report_for(design, &multi_start(design, seeds, Execution::Parallel)))
}

#[cfg(not(feature = "parallel"))]
fn parallel_report(design: &Design, seeds: &[u64]) -> String {
    report_for(design, &multi_start(design, seeds, Execution::Parallel))
}

fn annealer_sanity() -> Verdict {
    let mut doc = DesignDoc::boxes(&[(1.0, 1.0, 1); 8], 2);
    doc.config.weights = CostWeights {
        w1: 0.0,
        w2: 1.0,
        w3: 0.0,
        w4: 0.0,
    };
    doc.config.anneal.max_evaluations = 50_000;
    doc.loops.push(CriticalLoop {
        name: "none".into(),
        path: vec!["b0".into()],
        base_cycles: 1,
        sensitivity: 0.0,
    });
    let design = Design::from_doc(doc).unwrap();
    let outs = multi_start(&design, &run_seeds(1, 10), Execution::Parallel);
    let hits = outs
        .iter()
        .filter(|o| o.best.floorplan.footprint() == 4.0 && o.best.floorplan.extent_z <= 2)
        .count();
    let max_evals = outs.iter().map(|o| o.evaluations).max().unwrap();
    verdict(
        hits >= 1 && max_evals <= 50_000,
        format!("{hits}/10 runs reached the 2x2 footprint; at most {max_evals} evaluations per run"),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("decoder totality and non-overlap", decoder_totality),
        ("layer feasibility", layer_feasibility),
        ("oracle soundness", oracle_soundness),
        ("timing arithmetic", timing_arithmetic),
        ("trend reproduction on the driver", trend_reproduction),
        ("thermal properties", thermal_properties),
        ("determinism", determinism),
        ("annealer sanity", annealer_sanity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run();
        failed += usize::from(!v.pass);
        println!(
            "criterion {}: {} {name}: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
