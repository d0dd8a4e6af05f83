//! Benchmark CLI for the four-operator splitting solver.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use four_split::bench::{
    grid_csv_string, run_benchmark, sweep_stepsize_bounds, table_string, BenchmarkPlan,
    BoundSelector, Cell, GridAxes, GridSpec, KyFanSource, ProblemSelector,
};
use four_split::data::parse_sparse_dataset;
use four_split::presets::Preset;

#[derive(Parser)]
#[command(name = "four-split", version, about = "Four-operator splitting benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run preset/τ sweeps on a built-in problem and emit a CSV table.
    Bench(BenchArgs),
    /// Tabulate stepsize upper bounds over a normalized parameter grid.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    Mc,
    Kyfan,
    Feas,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetKind {
    Dys,
    DysBz,
    Pg,
    Pdc,
    Gpp,
}

#[derive(Args)]
struct BenchArgs {
    /// Problem family.
    #[arg(long, value_enum)]
    problem: ProblemKind,
    /// Side length (mc), feature count (synthetic kyfan), or dimension (feas).
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Row count for synthetic kyfan designs.
    #[arg(long, default_value_t = 500)]
    m: usize,
    /// Rank (mc) or number of nonconvex sets (feas).
    #[arg(long, default_value_t = 10)]
    r: usize,
    /// Number of observed entries (mc).
    #[arg(long, default_value_t = 1000)]
    s: usize,
    /// Cardinality budget (kyfan); defaults to ⌊n/10⌋.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 5.0)]
    lambda2: f64,
    /// Relaxation values for the splitting method (repeatable).
    #[arg(long = "tau")]
    tau: Vec<f64>,
    /// Baseline presets to include (repeatable).
    #[arg(long = "preset", value_enum)]
    preset: Vec<PresetKind>,
    /// Stationarity tolerance.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Iteration cap; defaults to 30000 (mc, feas) or 100000 (kyfan).
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sparse dataset file (kyfan): `label index:value ...` per line.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Scale dataset columns to unit max absolute value before use.
    #[arg(long, default_value_t = false)]
    scale_columns: bool,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fraction of the certified bound used as the stepsize.
    #[arg(long, default_value_t = 0.99)]
    safety: f64,
    /// Evaluate the stopping measure every STRIDE iterations.
    #[arg(long, default_value_t = 1)]
    stride: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxesKind {
    /// x = L_h/L_f, y = ρ_f/L_f
    LhRhof,
    /// x = σ_f/L_f, y = L_h/L_f
    SigmafLh,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    Ours,
    BianZhang,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum, default_value_t = AxesKind::LhRhof)]
    axes: AxesKind,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, value_enum, default_value_t = BoundKind::Ours)]
    bound: BoundKind,
    #[arg(long, default_value_t = 0.0)]
    x_min: f64,
    #[arg(long, default_value_t = 2.0)]
    x_max: f64,
    #[arg(long, default_value_t = 41)]
    x_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    y_min: f64,
    #[arg(long, default_value_t = 1.0)]
    y_max: f64,
    #[arg(long, default_value_t = 21)]
    y_steps: usize,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn bench(args: BenchArgs) -> Result<(), String> {
    let problem = match args.problem {
        ProblemKind::Mc => ProblemSelector::MatrixCompletion {
            n: args.n,
            r: args.r,
            s: args.s,
            lambda1: args.lambda1,
            lambda2: args.lambda2,
        },
        ProblemKind::Kyfan => {
            let source = match &args.data {
                Some(path) => {
                    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
                    let mut ds = parse_sparse_dataset::<f64>(BufReader::new(file))
                        .map_err(|e| e.to_string())?;
                    if args.scale_columns {
                        ds.scale_columns();
                    }
                    KyFanSource::Dataset(ds)
                }
                None => KyFanSource::Synthetic { m: args.m, n: args.n },
            };
            ProblemSelector::KyFan {
                source,
                lambda1: args.lambda1,
                lambda2: args.lambda2,
                k: args.k,
            }
        }
        ProblemKind::Feas => ProblemSelector::Feasibility { dim: args.n, r: args.r },
    };

    let mut cells: Vec<Cell<f64>> = Vec::new();
    for kind in &args.preset {
        let preset = match kind {
            PresetKind::Dys => Preset::dys(args.safety),
            PresetKind::DysBz => Preset::dys_bian_zhang(args.safety),
            PresetKind::Pg => Preset::pg(args.safety),
            PresetKind::Pdc => Preset::pdc(args.safety),
            PresetKind::Gpp => Preset::gpp(args.safety),
        };
        cells.push(Cell::auto(preset));
    }
    for &tau in &args.tau {
        cells.push(Cell::auto(Preset::four_split(tau, args.safety)));
    }
    if cells.is_empty() {
        cells.push(Cell::auto(Preset::four_split(1.0, args.safety)));
    }

    let max_iter = args.max_iter.unwrap_or(match args.problem {
        ProblemKind::Kyfan => 100_000,
        _ => 30_000,
    });

    let plan = BenchmarkPlan {
        problem,
        cells,
        eps: args.eps,
        max_iter,
        seed: args.seed,
        safety: args.safety,
        measure_stride: args.stride,
        out: args.out.clone(),
    };
    let rows = run_benchmark(&plan).map_err(|e| e.to_string())?;
    print!("{}", table_string(&rows));
    if let Some(path) = &args.out {
        eprintln!("csv written to {}", path.display());
    }
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<(), String> {
    let grid = GridSpec {
        axes: match args.axes {
            AxesKind::LhRhof => GridAxes::LhRhoF,
            AxesKind::SigmafLh => GridAxes::SigmaFLh,
        },
        x: (args.x_min, args.x_max, args.x_steps),
        y: (args.y_min, args.y_max, args.y_steps),
    };
    let selector = match args.bound {
        BoundKind::Ours => BoundSelector::Ours,
        BoundKind::BianZhang => BoundSelector::BianZhang,
    };
    let rows = sweep_stepsize_bounds::<f64>(&grid, args.tau, selector);
    let csv = grid_csv_string(&rows);
    match &args.out {
        Some(path) => {
            let mut file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            file.write_all(csv.as_bytes()).map_err(|e| e.to_string())?;
            eprintln!("csv written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(args) => bench(args),
        Command::Bounds(args) => bounds(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
