//! Benchmark harness: builds problems, runs preset/τ sweeps under the
//! shared stopping measure, and emits CSV tables and stepsize-bound
//! grids.

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::data::{gen_gaussian_ls, gen_lowrank_instance, GenError, SparseDataset};
use crate::presets::{instantiate, Preset, PresetError, PresetName, StepsizePolicy};
use crate::problem::{ObjectiveError, ParamsError, ProblemSpec};
use crate::problems::{
    build_feasibility_spec, default_k, kyfan_spec, matrix_completion_spec, synthetic_feasibility,
};
use crate::scalar::Scalar;
use crate::solver::{run, RunOptions, SolverError, StoppingCriterion, Termination};
use crate::stepsize::{bian_zhang_alpha, compute_alpha_bar, make_step_config, StepsizeError};

// ── plans ───────────────────────────────────────────────────────────

/// Where the Ky Fan design matrix comes from.
#[derive(Debug, Clone)]
pub enum KyFanSource<T> {
    Synthetic { m: usize, n: usize },
    Dataset(SparseDataset<T>),
}

/// Which problem a plan benchmarks, with its parameters.
#[derive(Debug, Clone)]
pub enum ProblemSelector<T> {
    MatrixCompletion { n: usize, r: usize, s: usize, lambda1: T, lambda2: T },
    KyFan { source: KyFanSource<T>, lambda1: T, lambda2: T, k: Option<usize> },
    Feasibility { dim: usize, r: usize },
}

/// One benchmark cell: a preset (possibly a `FOUR_SPLIT` at some τ)
/// with a stable identifier used in reports.
#[derive(Debug, Clone)]
pub struct Cell<T> {
    pub id: String,
    pub preset: Preset<T>,
}

impl<T: Scalar> Cell<T> {
    /// Derives the conventional identifier from the preset.
    pub fn auto(preset: Preset<T>) -> Self {
        let id = match (preset.name, &preset.policy) {
            (PresetName::FourSplit, _) => format!("tau={}", preset.tau),
            (PresetName::Dys, StepsizePolicy::BianZhang { .. }) => "DYS-BZ".to_string(),
            (name, _) => name.to_string(),
        };
        Self { id, preset }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkPlan<T> {
    pub problem: ProblemSelector<T>,
    pub cells: Vec<Cell<T>>,
    pub eps: T,
    pub max_iter: usize,
    pub seed: u64,
    pub safety: T,
    pub measure_stride: usize,
    /// CSV destination; `None` keeps the rows in memory only.
    pub out: Option<PathBuf>,
}

// ── results ─────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunFlag {
    Converged,
    /// Iteration cap reached (starred entries in the tables).
    Capped,
    /// Preset or τ not applicable to this problem; cell skipped.
    Inapplicable,
}

impl RunFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            RunFlag::Converged => "converged",
            RunFlag::Capped => "capped",
            RunFlag::Inapplicable => "inapplicable",
        }
    }
}

/// One row of the benchmark table.  `measure` is recomputed at the
/// stored final iterate, independently of the run's own trace.
#[derive(Debug, Clone)]
pub struct ResultRow<T> {
    pub cell: String,
    pub iterations: Option<usize>,
    pub time_s: Option<f64>,
    pub objective: Option<T>,
    pub measure: Option<T>,
    pub flag: RunFlag,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Stepsize(#[from] StepsizeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Materializes the plan's problem.
pub fn build_problem<T: Scalar>(plan: &BenchmarkPlan<T>) -> Result<ProblemSpec<T>, BenchError> {
    match &plan.problem {
        ProblemSelector::MatrixCompletion { n, r, s, lambda1, lambda2 } => {
            let inst = gen_lowrank_instance::<T>(*n, *n, *r, *s, plan.seed)?;
            Ok(matrix_completion_spec(&inst, *lambda1, *lambda2)?)
        }
        ProblemSelector::KyFan { source, lambda1, lambda2, k } => {
            let (a, b) = match source {
                KyFanSource::Synthetic { m, n } => gen_gaussian_ls::<T>(*m, *n, plan.seed),
                KyFanSource::Dataset(ds) => {
                    if ds.rows == 0 || ds.cols == 0 {
                        return Err(BenchError::EmptyDataset);
                    }
                    ds.to_dense()
                }
            };
            let k = k.unwrap_or_else(|| default_k(a.cols()));
            Ok(kyfan_spec(&a, &b, *lambda1, *lambda2, k)?)
        }
        ProblemSelector::Feasibility { dim, r } => {
            Ok(build_feasibility_spec(synthetic_feasibility::<T>(*dim, *r), *dim)?)
        }
    }
}

/// Runs every cell under the shared stationarity measure (reference
/// configuration built at `τ = 1` from the original problem constants).
/// Inapplicable cells are marked skipped, not fatal.  Writes the CSV to
/// `plan.out` when set.
pub fn run_benchmark<T: Scalar>(plan: &BenchmarkPlan<T>) -> Result<Vec<ResultRow<T>>, BenchError> {
    let spec = build_problem(plan)?;
    let reference = make_step_config(spec.params(), T::one(), plan.safety)?;
    let mut rows = Vec::with_capacity(plan.cells.len());
    for cell in &plan.cells {
        let (rewired, cfg) = match instantiate(&cell.preset, &spec) {
            Ok(pair) => pair,
            Err(PresetError::Inapplicable { .. })
            | Err(PresetError::Stepsize(StepsizeError::InfeasibleTau { .. })) => {
                rows.push(ResultRow {
                    cell: cell.id.clone(),
                    iterations: None,
                    time_s: None,
                    objective: None,
                    measure: None,
                    flag: RunFlag::Inapplicable,
                });
                continue;
            }
            Err(PresetError::Stepsize(e)) => return Err(e.into()),
            Err(PresetError::Params(e)) => return Err(e.into()),
        };
        let monitor = compute_alpha_bar(rewired.params(), cfg.tau)?.c(cfg.alpha);
        let opts = RunOptions::new(StoppingCriterion {
            eps: plan.eps,
            max_iter: plan.max_iter,
            reference,
        })
        .with_monitor(monitor)
        .with_stride(plan.measure_stride);
        let report = run(&rewired, &cfg, &opts, None)?;
        // independent re-evaluation at the stored final iterate, against
        // the original (un-rewired) oracles
        let measure =
            crate::solver::stationarity_measure(&spec, &reference, &report.final_state.y)?;
        let objective = spec.evaluate_objective(&report.final_state.y)?.total;
        rows.push(ResultRow {
            cell: cell.id.clone(),
            iterations: Some(report.iterations),
            time_s: Some(report.loop_seconds),
            objective: Some(objective),
            measure: Some(measure),
            flag: match report.termination {
                Termination::Converged => RunFlag::Converged,
                Termination::IterationCap => RunFlag::Capped,
            },
        });
    }
    if let Some(path) = &plan.out {
        emit_report(&rows, path)?;
    }
    Ok(rows)
}

// ── reporting ───────────────────────────────────────────────────────

fn fmt_opt<T: Scalar>(v: Option<T>) -> String {
    v.map(|x| format!("{:e}", x.as_f64())).unwrap_or_default()
}

/// CSV with the fixed column order `cell,iter,time_s,objective,measure,flag`.
/// Everything except `time_s` is deterministic for a fixed plan and seed.
pub fn csv_string<T: Scalar>(rows: &[ResultRow<T>]) -> String {
    let mut out = String::from("cell,iter,time_s,objective,measure,flag\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.cell,
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            r.time_s.map(|t| format!("{t:.6}")).unwrap_or_default(),
            fmt_opt(r.objective),
            fmt_opt(r.measure),
            r.flag.as_str(),
        ));
    }
    out
}

/// Fixed-width table for terminals.
pub fn table_string<T: Scalar>(rows: &[ResultRow<T>]) -> String {
    let mut out = format!(
        "{:<12} {:>9} {:>10} {:>14} {:>12} {:>13}\n",
        "cell", "iter", "time_s", "objective", "measure", "flag"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<12} {:>9} {:>10} {:>14} {:>12} {:>13}\n",
            r.cell,
            r.iterations.map(|i| i.to_string()).unwrap_or_else(|| "-".into()),
            r.time_s.map(|t| format!("{t:.3}")).unwrap_or_else(|| "-".into()),
            r.objective.map(|v| format!("{:.6e}", v.as_f64())).unwrap_or_else(|| "-".into()),
            r.measure.map(|v| format!("{:.3e}", v.as_f64())).unwrap_or_else(|| "-".into()),
            r.flag.as_str(),
        ));
    }
    out
}

/// Writes the CSV to `dest`.
pub fn emit_report<T: Scalar>(rows: &[ResultRow<T>], dest: &Path) -> std::io::Result<()> {
    let mut file = std::fs::File::create(dest)?;
    file.write_all(csv_string(rows).as_bytes())
}

// ── stepsize-bound grids ────────────────────────────────────────────

/// Grid axes for the bound sweeps (all normalized by `L_f = 1`):
/// either `(L_h/L_f, ρ_f/L_f)` or `(σ_f/L_f, L_h/L_f)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAxes {
    LhRhoF,
    SigmaFLh,
}

#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub axes: GridAxes,
    pub x: (f64, f64, usize),
    pub y: (f64, f64, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSelector {
    Ours,
    BianZhang,
}

#[derive(Debug, Clone, Copy)]
pub struct GridRow<T> {
    pub x: T,
    pub y: T,
    /// `ᾱ·L_f` at the node; `None` where the bound is not applicable.
    pub value: Option<T>,
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

/// Evaluates a bound selector over the grid, emitting `ᾱ·L_f` per node
/// (`L_f = 1` by normalization).
pub fn sweep_stepsize_bounds<T: Scalar>(
    grid: &GridSpec,
    tau: T,
    selector: BoundSelector,
) -> Vec<GridRow<T>> {
    let mut rows = Vec::new();
    for &x in &linspace(grid.x.0, grid.x.1, grid.x.2) {
        for &y in &linspace(grid.y.0, grid.y.1, grid.y.2) {
            let params = match grid.axes {
                GridAxes::LhRhoF => crate::problem::CurvatureParams::convex_smooth(T::one(), T::of(x))
                    .with_rho_f(T::of(y).min(T::one())),
                GridAxes::SigmaFLh => crate::problem::CurvatureParams::convex_smooth(T::one(), T::of(y))
                    .with_sigma_f(T::of(x).min(T::one())),
            };
            let value = match selector {
                BoundSelector::Ours => compute_alpha_bar(&params, tau).ok().map(|b| b.alpha_bar),
                BoundSelector::BianZhang => bian_zhang_alpha(&params).ok(),
            };
            rows.push(GridRow { x: T::of(x), y: T::of(y), value });
        }
    }
    rows
}

/// CSV for grid rows: `x,y,alpha_bar_times_lf` (empty where inapplicable).
pub fn grid_csv_string<T: Scalar>(rows: &[GridRow<T>]) -> String {
    let mut out = String::from("x,y,alpha_bar_times_lf\n");
    for r in rows {
        out.push_str(&format!(
            "{:e},{:e},{}\n",
            r.x.as_f64(),
            r.y.as_f64(),
            fmt_opt(r.value)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_mc_plan() -> BenchmarkPlan<f64> {
        BenchmarkPlan {
            problem: ProblemSelector::MatrixCompletion {
                n: 12,
                r: 2,
                s: 60,
                lambda1: 10.0,
                lambda2: 5.0,
            },
            cells: vec![
                Cell::auto(Preset::dys(0.99)),
                Cell::auto(Preset::four_split(1.5, 0.99)),
            ],
            eps: 1e-5,
            max_iter: 4000,
            seed: 11,
            safety: 0.99,
            measure_stride: 1,
            out: None,
        }
    }

    #[test]
    fn benchmark_rows_converge_and_reverify() {
        let plan = tiny_mc_plan();
        let rows = run_benchmark(&plan).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert_eq!(row.flag, RunFlag::Converged, "{}", row.cell);
            assert!(row.measure.unwrap() <= plan.eps);
            assert!(row.iterations.unwrap() > 0);
        }
    }

    #[test]
    fn csv_deterministic_except_time() {
        let plan = tiny_mc_plan();
        let strip_time = |csv: &str| {
            csv.lines()
                .map(|line| {
                    let mut cols: Vec<&str> = line.split(',').collect();
                    if cols.len() > 2 {
                        cols[2] = "";
                    }
                    cols.join(",")
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        let a = csv_string(&run_benchmark(&plan).unwrap());
        let b = csv_string(&run_benchmark(&plan).unwrap());
        assert_eq!(strip_time(&a), strip_time(&b));
        assert!(a.starts_with("cell,iter,time_s,objective,measure,flag\n"));
    }

    #[test]
    fn inapplicable_cells_are_skipped_not_fatal() {
        let mut plan = BenchmarkPlan {
            problem: ProblemSelector::KyFan {
                // m < n makes AᵀA singular, so σ_f = 0 and τ = 2 is infeasible
                source: KyFanSource::Synthetic { m: 10, n: 16 },
                lambda1: 5.0,
                lambda2: 10.0,
                k: Some(2),
            },
            cells: vec![
                Cell::auto(Preset::pg(0.99)),
                Cell::auto(Preset::four_split(2.0, 0.99)),
                Cell::auto(Preset::pdc(0.99)),
            ],
            eps: 1e-4,
            max_iter: 2000,
            seed: 3,
            safety: 0.99,
            measure_stride: 1,
            out: None,
        };
        let rows = run_benchmark(&plan).unwrap();
        assert_eq!(rows[0].flag, RunFlag::Inapplicable, "PG needs p = 0");
        assert_eq!(rows[1].flag, RunFlag::Inapplicable, "tau = 2 needs sigma_f margin");
        assert_ne!(rows[2].flag, RunFlag::Inapplicable);
        // flags render as the star/dash semantics
        let csv = csv_string(&rows);
        assert!(csv.contains("PG,,,,,inapplicable"));
        // capped runs are starred via the flag column
        plan.max_iter = 3;
        plan.cells = vec![Cell::auto(Preset::pdc(0.99))];
        let rows = run_benchmark(&plan).unwrap();
        assert_eq!(rows[0].flag, RunFlag::Capped);
    }

    #[test]
    fn emit_report_writes_and_fails_cleanly() {
        let rows: Vec<ResultRow<f64>> = vec![ResultRow {
            cell: "tau=1".into(),
            iterations: Some(12),
            time_s: Some(0.5),
            objective: Some(1.25),
            measure: Some(1e-7),
            flag: RunFlag::Converged,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        emit_report(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, csv_string(&rows));
        assert!(text.contains("tau=1,12,"));
        // a directory is not a writable destination
        assert!(emit_report(&rows, dir.path()).is_err());
    }

    #[test]
    fn grid_sweep_closed_form_region() {
        let grid = GridSpec { axes: GridAxes::LhRhoF, x: (0.0, 2.0, 5), y: (0.0, 0.5, 3) };
        let rows = sweep_stepsize_bounds::<f64>(&grid, 1.0, BoundSelector::Ours);
        assert_eq!(rows.len(), 15);
        for row in &rows {
            let (lh, rf) = (row.x, row.y);
            let v = row.value.unwrap();
            if lh + 2.0 * rf <= 1.0 {
                assert!((v - 1.0 / (1.0 + lh)).abs() < 1e-12, "node ({lh},{rf})");
            }
            assert!(v <= 1.0 / (1.0 + lh) + 1e-12);
        }
        // node (0.5, 0): ᾱ·L_f = 1/1.5
        let node = rows.iter().find(|r| (r.x - 0.5).abs() < 1e-12 && r.y == 0.0).unwrap();
        assert!((node.value.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        // dominance over the comparison bound at every node
        let bz = sweep_stepsize_bounds::<f64>(&grid, 1.0, BoundSelector::BianZhang);
        for (ours, other) in rows.iter().zip(&bz) {
            assert!(ours.value.unwrap() > other.value.unwrap());
        }
        let csv = grid_csv_string(&rows);
        assert!(csv.starts_with("x,y,alpha_bar_times_lf\n"));
    }

    #[test]
    fn grid_sweep_high_tau_marks_infeasible() {
        let grid = GridSpec { axes: GridAxes::SigmaFLh, x: (0.0, 1.0, 3), y: (0.0, 1.0, 3) };
        let rows = sweep_stepsize_bounds::<f64>(&grid, 2.0, BoundSelector::Ours);
        // σ_f = 0 nodes are infeasible at τ = 2; σ_f = 1, L_h = 0 is feasible
        assert!(rows.iter().any(|r| r.value.is_none()));
        let good = rows
            .iter()
            .find(|r| (r.x - 1.0).abs() < 1e-12 && r.y == 0.0)
            .unwrap();
        assert!(good.value.is_some());
    }
}
