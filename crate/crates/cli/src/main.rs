use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cube3d::anneal::{best_run, multi_start, run_seeds, Solution};
use cube3d::metrics::CostRefs;
use cube3d::model::CostWeights;
use cube3d::oracle::{boxes_of, enumerate_cbl, extreme_point_pack, Objective};
use cube3d::report::RunMeta;
use cube3d::{svg, Cbl3, Design, DesignDoc, Execution, Overrides, Report, Selection};

#[derive(Parser)]
#[command(name = "cube3d", version, about = "Multi-layer block floorplanner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Anneal a design and write a report.
    Pack(PackArgs),
    /// Decode one corner block list without searching.
    Decode(DecodeArgs),
    /// Re-evaluate a stored report against its design.
    Eval { design: PathBuf, report: PathBuf },
    /// Draw one SVG per layer from a report.
    Render {
        report: PathBuf,
        out_dir: PathBuf,
        #[arg(long)]
        heat: bool,
    },
    /// Exhaustive packing of a small design.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct DesignOverrides {
    /// Layer limit; candidates spanning more layers are dropped.
    #[arg(long)]
    layers: Option<u32>,
    #[arg(long)]
    freq_ghz: Option<f64>,
    /// w1,w2,w3,w4 for performance, area, temperature and wire.
    #[arg(long, value_parser = parse_weights)]
    weights: Option<CostWeights>,
    #[arg(long, value_enum)]
    thermal_vias: Option<OnOff>,
    /// Keep only single-layer candidates.
    #[arg(long)]
    planar_only: bool,
    #[arg(long)]
    max_evals: Option<u64>,
}

impl DesignOverrides {
    fn to_overrides(&self) -> Overrides {
        Overrides {
            layers: self.layers,
            frequency_ghz: self.freq_ghz,
            weights: self.weights,
            thermal_vias: self.thermal_vias.map(|v| matches!(v, OnOff::On)),
            planar_only: self.planar_only,
            max_evaluations: self.max_evals,
        }
    }
}

#[derive(Args)]
struct PackArgs {
    design: PathBuf,
    #[command(flatten)]
    overrides: DesignOverrides,
    /// Base seed; run r uses seed + r. Defaults to the design's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Write the annealing trace as line-delimited JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Shade SVG layers with the thermal map.
    #[arg(long)]
    heat: bool,
    /// Run multi-start runs one after another.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct DecodeArgs {
    design: PathBuf,
    /// Lists as `S:a,b,c;L:X,Z;T:1010`.
    #[arg(long)]
    cbl: String,
    /// Candidate index per block, comma separated. Defaults to the first.
    #[arg(long)]
    selection: Option<String>,
    #[command(flatten)]
    overrides: DesignOverrides,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    heat: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleMethod {
    ExtremePoint,
    Enumerate,
}

#[derive(Args)]
struct OracleArgs {
    design: PathBuf,
    #[arg(long, value_enum, default_value = "extreme-point")]
    method: OracleMethod,
    #[arg(long, value_enum, default_value = "volume")]
    objective: ObjectiveArg,
    #[arg(long)]
    selection: Option<String>,
    #[arg(long)]
    layers: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Volume,
    Footprint,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Volume => Objective::Volume,
            ObjectiveArg::Footprint => Objective::Footprint,
        }
    }
}

fn parse_weights(s: &str) -> Result<CostWeights, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [w1, w2, w3, w4] => Ok(CostWeights { w1, w2, w3, w4 }),
        _ => Err(format!("expected 4 weights, got {}", v.len())),
    }
}

enum Failure {
    /// Bad input: unreadable or invalid design, report or lists.
    Input(anyhow::Error),
    Runtime(anyhow::Error),
    Mismatch(Vec<String>),
}

type Outcome<T> = Result<T, Failure>;

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn load(path: &Path, overrides: &Overrides) -> Outcome<Design> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)?;
    let mut doc = DesignDoc::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(input)?;
    overrides.apply(&mut doc);
    Design::from_doc(doc)
        .with_context(|| format!("validating {}", path.display()))
        .map_err(input)
}

fn parse_selection(text: Option<&str>, design: &Design) -> Outcome<Selection> {
    let sel = match text {
        None => Selection::first(design),
        Some(t) => Selection(
            t.split(',')
                .map(|p| p.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .context("selection must be comma-separated candidate indices")
                .map_err(input)?,
        ),
    };
    sel.check(design).map_err(input)?;
    Ok(sel)
}

fn write_report(report: &Report, out: &Path, svg_dir: Option<&Path>, heat: bool) -> Outcome<()> {
    fs::write(out, report.to_json())
        .with_context(|| format!("writing {}", out.display()))
        .map_err(runtime)?;
    if let Some(dir) = svg_dir {
        svg::write_layers(report, dir, heat)
            .with_context(|| format!("writing SVG files to {}", dir.display()))
            .map_err(runtime)?;
    }
    Ok(())
}

fn cmd_pack(args: PackArgs) -> Outcome<()> {
    let overrides = args.overrides.to_overrides();
    let design = load(&args.design, &overrides)?;
    if args.runs == 0 {
        return Err(input(anyhow!("--runs must be at least 1")));
    }
    let base = args.seed.unwrap_or(design.config().seed);
    let seeds = run_seeds(base, args.runs);
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let started = Instant::now();
    let outcomes = multi_start(&design, &seeds, exec);
    let wall = started.elapsed().as_secs_f64();
    let best = best_run(&design, &outcomes).ok_or_else(|| runtime(anyhow!("no runs")))?;
    let o = &outcomes[best];

    if let Some(path) = &args.trace {
        let file = fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(runtime)?;
        let mut w = BufWriter::new(file);
        for (run, out) in outcomes.iter().enumerate() {
            for rec in &out.trace {
                let line = serde_json::json!({
                    "run": run,
                    "iteration": rec.iteration,
                    "temperature": rec.temperature,
                    "cost": rec.cost,
                    "best": rec.best,
                });
                writeln!(w, "{line}").map_err(runtime)?;
            }
        }
        w.flush().map_err(runtime)?;
    }

    let report = Report::build(
        &design,
        &overrides,
        &o.best.floorplan,
        &o.best.cbl,
        &o.best.selection,
        o.best.stats,
        o.refs,
        RunMeta {
            seed: o.seed,
            runs: args.runs,
            best_run: best,
            evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
            wall_time_s: wall,
        },
    );
    write_report(&report, &args.out, args.svg.as_deref(), args.heat)?;
    print_summary(&report);
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> Outcome<()> {
    let overrides = args.overrides.to_overrides();
    let design = load(&args.design, &overrides)?;
    let cbl = Cbl3::parse(&args.cbl, &design).map_err(input)?;
    let sel = parse_selection(args.selection.as_deref(), &design)?;
    let started = Instant::now();
    let sol = Solution::evaluate(&design, &cbl, &sel, None);
    let refs = CostRefs::from_breakdown(&sol.cost, design.config().thermal.ambient);
    let wall = started.elapsed().as_secs_f64();
    let report = Report::build(
        &design,
        &overrides,
        &sol.floorplan,
        &sol.cbl,
        &sol.selection,
        sol.stats,
        refs,
        RunMeta {
            seed: design.config().seed,
            runs: 0,
            best_run: 0,
            evaluations: 1,
            wall_time_s: wall,
        },
    );
    write_report(&report, &args.out, args.svg.as_deref(), args.heat)?;
    print_summary(&report);
    let repairs = report.decode.run_repairs()
        + report.decode.layer_repairs;
    if repairs > 0 {
        println!("repairs applied: {repairs}");
    }
    Ok(())
}

fn cmd_eval(design_path: &Path, report_path: &Path) -> Outcome<()> {
    let text = fs::read_to_string(report_path)
        .with_context(|| format!("reading {}", report_path.display()))
        .map_err(input)?;
    let report = Report::from_json(&text)
        .with_context(|| format!("parsing {}", report_path.display()))
        .map_err(input)?;
    let design = load(design_path, &report.overrides)?;
    let (fresh, diffs) = report.verify(&design);
    if let Some(c) = fresh {
        println!(
            "bips {:.6}  ipc {:.6}  area {:.6} mm2  temp {:.3} C  wire {:.6} mm  total {:.9}",
            c.bips, c.ipc, c.area, c.temp, c.wire, c.total
        );
    }
    if diffs.is_empty() {
        println!("report matches");
        Ok(())
    } else {
        Err(Failure::Mismatch(diffs))
    }
}

fn cmd_render(report_path: &Path, out_dir: &Path, heat: bool) -> Outcome<()> {
    let text = fs::read_to_string(report_path)
        .with_context(|| format!("reading {}", report_path.display()))
        .map_err(input)?;
    let report = Report::from_json(&text)
        .with_context(|| format!("parsing {}", report_path.display()))
        .map_err(input)?;
    let paths = svg::write_layers(&report, out_dir, heat)
        .with_context(|| format!("writing SVG files to {}", out_dir.display()))
        .map_err(runtime)?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Outcome<()> {
    let overrides = Overrides {
        layers: args.layers,
        ..Overrides::default()
    };
    let design = load(&args.design, &overrides)?;
    let sel = parse_selection(args.selection.as_deref(), &design)?;
    let objective = Objective::from(args.objective);
    let (fp, extra) = match args.method {
        OracleMethod::ExtremePoint => {
            let fp = extreme_point_pack(&boxes_of(&design, &sel), Some(design.layer_limit()), objective)
                .map_err(input)?;
            (fp, serde_json::Value::Null)
        }
        OracleMethod::Enumerate => {
            let e = enumerate_cbl(&design, &sel, objective, Execution::Parallel).map_err(input)?;
            let extra = serde_json::json!({
                "cbl": e.cbl.to_text(&design),
                "decoded": e.decoded,
            });
            (e.floorplan, extra)
        }
    };
    let blocks: Vec<_> = fp
        .placed
        .iter()
        .map(|p| {
            serde_json::json!({
                "id": design.block(p.block).id,
                "x": p.x, "y": p.y, "z": p.z,
                "width": p.width, "height": p.height, "layers": p.layers,
            })
        })
        .collect();
    let out = serde_json::json!({
        "objective": objective,
        "value": objective.of(&fp),
        "volume": fp.volume(),
        "footprint": fp.footprint(),
        "extent_x": fp.extent_x,
        "extent_y": fp.extent_y,
        "extent_z": fp.extent_z,
        "blocks": blocks,
        "enumeration": extra,
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(runtime)?);
    Ok(())
}

fn print_summary(r: &Report) {
    println!(
        "layers {}  footprint {:.3} x {:.3} mm  bips {:.4}  temp {:.2} C  wire {:.3} mm",
        r.floorplan.extent_z,
        r.floorplan.extent_x / 1000.0,
        r.floorplan.extent_y / 1000.0,
        r.cost.bips,
        r.cost.temp,
        r.cost.wire
    );
    for l in &r.loops {
        println!("  {:<24} {:>4} cycles  {:>9.1} ps", l.name, l.cycles, l.latency_ps);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pack(a) => cmd_pack(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Eval { design, report } => cmd_eval(&design, &report),
        Command::Render {
            report,
            out_dir,
            heat,
        } => cmd_render(&report, &out_dir, heat),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Mismatch(diffs)) => {
            eprintln!("report does not match its design:");
            for d in diffs {
                eprintln!("  {d}");
            }
            ExitCode::from(3)
        }
    }
}
