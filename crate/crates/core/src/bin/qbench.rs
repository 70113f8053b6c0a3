//! Command-line front end.
//!
//! Exit status: 0 on success, 2 when some circuits failed, 1 on fatal errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qbench::analysis::layer_convergence;
use qbench::compile::rebase;
use qbench::device::{graph_properties, published_properties, DeviceModel};
use qbench::gen::CircuitClass;
use qbench::harness::{
    self, circuit_seed, emit_plot_data, export_qasm, read_rows, run_experiment, summarize, ExperimentConfig, PlotData,
};
use qbench::{BenchRng, GateTag, Result};

#[derive(Parser)]
#[command(name = "qbench", version, about = "Full-stack quantum benchmarking")]
struct Cli {
    /// Experiment seed (overrides the config file for `run`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Box,
    Scatter,
}

#[derive(Subcommand)]
enum Command {
    /// Write a QASM corpus of generated circuits.
    Generate {
        #[arg(long)]
        class: CircuitClass,
        /// Widths, e.g. `2,3,5` or `2-6`.
        #[arg(long, value_parser = parse_list)]
        widths: List,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        layers: Option<usize>,
    },
    /// Run the experiment described by a JSON config file.
    Run { config: PathBuf },
    /// Box statistics per (class, width, strategy, backend) as CSV.
    Summarize { results: PathBuf },
    /// Plot data (CSV, optionally SVG) from a results file.
    Plot {
        results: PathBuf,
        #[arg(long, value_enum, default_value = "box")]
        kind: PlotKind,
        #[arg(long)]
        svg: bool,
    },
    /// Exponential-fit distance against layer count.
    Fit {
        #[arg(long)]
        class: CircuitClass,
        #[arg(long)]
        width: usize,
        /// Layer counts, e.g. `1-8`.
        #[arg(long, value_parser = parse_list)]
        layers: List,
        #[arg(long, default_value_t = 100)]
        circuits: usize,
    },
    /// List device files with their graph properties and check bundled maps
    /// against their published values.
    Devices { files: Vec<PathBuf> },
}

#[derive(Clone)]
struct List(Vec<usize>);

fn parse_list(s: &str) -> std::result::Result<List, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once('-') {
            let bad = || format!("bad range {part}");
            let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            if a > b {
                return Err(format!("empty range {part}"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad number {part}"))?);
        }
    }
    Ok(List(out))
}

fn generate(cli: &Cli, class: CircuitClass, widths: &[usize], count: usize, layers: Option<usize>) -> Result<()> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("qasm"));
    fs::create_dir_all(&dir)?;
    let seed = cli.seed.unwrap_or(0);
    for &w in widths {
        for i in 0..count {
            let mut rng = BenchRng::from_seed(circuit_seed(seed, class, w, i));
            let mut c = class.generate(w, layers, &mut rng)?;
            if c.gate_count(Some(GateTag::Su4)) > 0 {
                c = rebase(&c)?;
            }
            fs::write(dir.join(format!("{class}_n{w}_{i:04}.qasm")), export_qasm(&c)?)?;
        }
    }
    println!("wrote {} files to {}", widths.len() * count, dir.display());
    Ok(())
}

fn run(cli: &Cli, config: &PathBuf) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = cli.seed {
        cfg.experiment_seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    let outcome = run_experiment(&cfg, cli.jobs)?;
    println!(
        "{} rows in {} ({} new, {} failed)",
        outcome.rows.len(),
        cfg.results_path().display(),
        outcome.new_rows,
        outcome.failures
    );
    if let Ok(summary) = summarize(&outcome.rows) {
        for g in summary {
            println!(
                "{} n={} {} {}: mean hog {:.4}, ced {:.4}, l1 {:.4} over {}",
                g.class, g.width, g.strategy, g.backend, g.hog.mean, g.ced.mean, g.l1.mean, g.count
            );
        }
    }
    Ok(if outcome.failures > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn devices(files: &[PathBuf]) -> Result<ExitCode> {
    let models: Vec<DeviceModel> = if files.is_empty() {
        DeviceModel::builtins()
    } else {
        files.iter().map(DeviceModel::load).collect::<Result<_>>()?
    };
    let mut mismatch = false;
    println!("name,vertices,average_degree,radius,min_cycle_length,check");
    for d in &models {
        let p = graph_properties(&d.coupling)?;
        let check = match published_properties(&d.name) {
            Some(want) if want == p => "ok",
            Some(_) => {
                mismatch = true;
                "MISMATCH"
            }
            None => "-",
        };
        let girth = p.min_cycle_length.map_or("none".to_string(), |g| g.to_string());
        println!(
            "{},{},{},{},{},{}",
            d.name, p.vertices, p.average_degree, p.radius, girth, check
        );
    }
    Ok(if mismatch { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn main_inner(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Generate {
            class,
            widths,
            count,
            layers,
        } => {
            generate(cli, *class, &widths.0, *count, *layers)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config } => run(cli, config),
        Command::Summarize { results } => {
            let csv = harness::summary_csv(&summarize(&read_rows(results)?)?);
            match &cli.out {
                Some(p) => fs::write(p, csv)?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { results, kind, svg } => {
            let rows = read_rows(results)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("plots"));
            let written = match kind {
                PlotKind::Box => emit_plot_data(&dir, &PlotData::Box(&summarize(&rows)?), *svg)?,
                PlotKind::Scatter => emit_plot_data(&dir, &PlotData::Scatter(&rows), *svg)?,
            };
            for p in written {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Fit {
            class,
            width,
            layers,
            circuits,
        } => {
            let curve = layer_convergence(*class, *width, &layers.0, *circuits, cli.seed.unwrap_or(0))?;
            for (l, d) in curve.layer_counts.iter().zip(&curve.distances) {
                println!("layers {l:>3}  distance {d:.4}");
            }
            if let Some(dir) = &cli.out {
                emit_plot_data(dir, &PlotData::Convergence(&[curve]), false)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Devices { files } => devices(files),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
