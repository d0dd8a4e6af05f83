//! State-level solver invariants that need access to full iterates:
//! prox optimality along runs, merit bounds against the objective,
//! strict decrease away from termination, the smooth-free (`α = ∞`)
//! branch, and concurrent use of a shared problem.

use std::sync::Arc;

use four_split::data::{gen_gaussian_ls, gen_lowrank_instance};
use four_split::linalg::{dist2, norm2};
use four_split::problem::{CurvatureParams, ProblemSpec, ProxPoint};
use four_split::problems::{
    build_feasibility_spec, kyfan_spec, matrix_completion_spec, synthetic_feasibility, BoxSet,
    FeasibilityProblem, ProjectableSet, SetIndicator, SphereSet,
};
use four_split::solver::{
    merit_value, residual, run, split_step, stationarity_measure, RunOptions, SolverState,
    StoppingCriterion, Termination,
};
use four_split::stepsize::{compute_alpha_bar, make_step_config, StepConfig};

fn small_mc() -> ProblemSpec<f64> {
    let inst = gen_lowrank_instance::<f64>(20, 20, 3, 120, 13).unwrap();
    matrix_completion_spec(&inst, 10.0, 5.0).unwrap()
}

fn small_kyfan() -> ProblemSpec<f64> {
    let (a, b) = gen_gaussian_ls::<f64>(60, 12, 13);
    kyfan_spec(&a, &b, 5.0, 10.0, 2).unwrap()
}

/// Runs `iters` steps checking the state invariant `z = x + α∇f(x)`
/// and the merit-vs-objective lower bound each iteration.
fn check_state_and_merit_bound(spec: &ProblemSpec<f64>, tau: f64, iters: usize) {
    let bound = compute_alpha_bar(spec.params(), tau).unwrap();
    let cfg = make_step_config(spec.params(), tau, 0.99).unwrap();
    assert!(bound.c(cfg.alpha) < 0.0);

    let lsum = spec.params().lf + spec.params().lh;
    let mut state = SolverState::at(
        spec,
        &cfg,
        vec![0.0; spec.dim()],
        spec.f().grad(&vec![0.0; spec.dim()]).iter().map(|g| cfg.alpha * g).collect(),
    )
    .unwrap();
    for _ in 0..iters {
        // prox optimality of the x-step at the current state
        let gx = spec.f().grad(&state.x);
        let mut viol: f64 = 0.0;
        for i in 0..spec.dim() {
            let d = state.z[i] - state.x[i] - cfg.alpha * gx[i];
            viol += d * d;
        }
        assert!(viol.sqrt() <= 1e-9 * (1.0 + norm2(&state.z)));

        let next = split_step(spec, &cfg, &state).unwrap();
        let v_prev = merit_value(spec, &cfg, &state, &next.state.y);
        let psi = spec.evaluate_objective(&next.state.y).unwrap().total;
        let dyx = dist2(&next.state.y, &state.x);
        let quad = (1.0 - cfg.alpha * lsum) / (2.0 * cfg.alpha) * dyx * dyx;
        assert!(
            v_prev >= psi + quad - 1e-8 * (1.0 + v_prev.abs()),
            "merit {v_prev} under-approximates objective {psi} + {quad}"
        );
        state = next.state;
    }
}

#[test]
fn state_invariant_and_merit_bound_matrix_completion() {
    check_state_and_merit_bound(&small_mc(), 1.3, 250);
}

#[test]
fn state_invariant_and_merit_bound_kyfan() {
    check_state_and_merit_bound(&small_kyfan(), 1.0, 250);
    check_state_and_merit_bound(&small_kyfan(), 1.9, 250);
}

#[test]
fn kyfan_tau_two_branch_runs_monotone() {
    // tall Gaussian designs are strongly convex, so τ = 2 is feasible
    let spec = small_kyfan();
    assert!(spec.params().sigma_f > spec.params().lh, "needs the σ_f margin");
    let cfg = make_step_config(spec.params(), 2.0, 0.99).unwrap();
    let c_alpha = compute_alpha_bar(spec.params(), 2.0).unwrap().c(cfg.alpha);
    assert!(c_alpha < 0.0);
    let stopping = StoppingCriterion {
        eps: 1e-6,
        max_iter: 5_000,
        reference: make_step_config(spec.params(), 1.0, 0.99).unwrap(),
    };
    let report =
        run(&spec, &cfg, &RunOptions::new(stopping).with_monitor(c_alpha), None).unwrap();
    assert_eq!(report.termination, Termination::Converged);
    assert!(report.decrease_violations.is_empty());
    for w in report.records.windows(2) {
        assert!(w[1].merit <= w[0].merit + 1e-12 * (1.0 + w[0].merit.abs()));
    }
}

#[test]
fn strict_decrease_until_near_termination() {
    let spec = small_mc();
    let cfg = make_step_config(spec.params(), 1.0, 0.99).unwrap();
    let stopping = StoppingCriterion {
        eps: 1e-6,
        max_iter: 30_000,
        reference: make_step_config(spec.params(), 1.0, 0.99).unwrap(),
    };
    let report = run(&spec, &cfg, &RunOptions::new(stopping), None).unwrap();
    assert_eq!(report.termination, Termination::Converged);
    for w in report.records.windows(2) {
        let far = w[1].measure.map_or(true, |m| m > 10.0 * 1e-6);
        if far {
            let dec = w[0].merit - w[1].merit;
            assert!(
                dec >= f64::EPSILON * (1.0 + w[0].merit.abs()),
                "stalled at k={}: decrease {dec:e}",
                w[1].k
            );
        }
    }
}

#[test]
fn feasibility_run_with_finite_beta() {
    let r = 2;
    let spec = build_feasibility_spec(synthetic_feasibility::<f64>(6, r), 6).unwrap();
    assert_eq!(spec.params().rho_p, r as f64);
    let cfg = make_step_config(spec.params(), 1.0, 0.99).unwrap();
    assert!((cfg.beta - 1.0 / r as f64).abs() < 1e-15);
    let stopping = StoppingCriterion {
        eps: 1e-8,
        max_iter: 20_000,
        reference: make_step_config(spec.params(), 1.0, 0.99).unwrap(),
    };
    let c_alpha = compute_alpha_bar(spec.params(), 1.0).unwrap().c(cfg.alpha);
    // start off-center so the sphere projection is well-defined
    let y0 = vec![0.3; 6];
    let z0: Vec<f64> = {
        let g = spec.f().grad(&y0);
        (0..6).map(|i| y0[i] + cfg.alpha * g[i]).collect()
    };
    let report = run(
        &spec,
        &cfg,
        &RunOptions::new(stopping).with_monitor(c_alpha),
        Some((y0, z0)),
    )
    .unwrap();
    assert_eq!(report.termination, Termination::Converged);
    assert!(report.decrease_violations.is_empty());
    // the final iterate is (nearly) in every set: Ψ sums the half
    // squared distances and the indicator
    let v = spec.evaluate_objective(&report.final_state.y).unwrap();
    assert!(v.total.is_finite());
    assert!(v.total <= 1e-8, "residual infeasibility {:.3e}", v.total);
}

#[test]
fn smooth_free_prox_subgradient_branch() {
    // f ≡ 0, h ≡ 0, g = box indicator, p = ½d²_sphere: α = ∞, γ = β = 1
    struct NoSmooth;
    impl four_split::problem::Smooth<f64> for NoSmooth {
        fn value(&self, _x: &[f64]) -> f64 {
            0.0
        }
        fn grad(&self, x: &[f64]) -> Vec<f64> {
            vec![0.0; x.len()]
        }
    }
    impl four_split::problem::SmoothProx<f64> for NoSmooth {
        fn prox(&self, z: &[f64], _s: f64) -> Result<Vec<f64>, four_split::problem::OracleError> {
            Ok(z.to_vec())
        }
    }
    struct SphereDistSq {
        set: SphereSet<f64>,
    }
    impl four_split::problem::WeaklyConcave<f64> for SphereDistSq {
        fn value(&self, y: &[f64]) -> f64 {
            let p = self.set.project(y);
            let d = dist2(y, &p);
            0.5 * d * d
        }
        fn subgrad(&self, y: &[f64]) -> Vec<f64> {
            let p = self.set.project(y);
            y.iter().zip(&p).map(|(a, b)| a - b).collect()
        }
    }

    let dim = 2;
    let spec = ProblemSpec::from_parts(
        dim,
        CurvatureParams::convex_smooth(0.0, 0.0).with_rho_p(1.0),
        Arc::new(NoSmooth),
        Arc::new(SetIndicator::<f64> { set: Arc::new(BoxSet::cube(dim, -0.6, 0.6)) }),
        Arc::new(NoSmooth),
        Arc::new(SphereDistSq { set: SphereSet { center: vec![0.0; dim], radius: 0.5 } }),
        false,
    )
    .unwrap();

    let cfg = make_step_config(spec.params(), 1.0, 0.99).unwrap();
    assert!(cfg.alpha.is_infinite());
    assert_eq!(cfg.beta, 1.0);
    assert_eq!(cfg.gamma, 1.0);

    let stopping = StoppingCriterion { eps: 1e-9, max_iter: 2_000, reference: cfg };
    let y0 = vec![0.3, 0.1];
    let report = run(
        &spec,
        &cfg,
        &RunOptions::new(stopping).with_monitor(-1.0),
        Some((y0.clone(), y0.clone())),
    )
    .unwrap();
    assert_eq!(report.termination, Termination::Converged);
    assert!(report.decrease_violations.is_empty());
    // converged onto the sphere, inside the box
    let yf = &report.final_state.y;
    assert!((norm2(yf) - 0.5).abs() <= 1e-4, "‖y‖ = {}", norm2(yf));
    assert!(yf.iter().all(|v| v.abs() <= 0.6 + 1e-12));
    // the α = ∞ residual uses only the y-row and vanishes here
    let r = residual(&spec, &cfg, yf, &report.final_state.z).unwrap();
    assert!(r <= 1e-7, "residual {r:e}");
}

#[test]
fn measure_matches_spelled_out_reference_form() {
    // the implementation folds (γ̂/α̂ + γ̂/β̂)y into y; check against the
    // unfolded expression
    let spec = small_kyfan();
    let reference = make_step_config(spec.params(), 1.0, 0.99).unwrap();
    let y: Vec<f64> = (0..spec.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
    let got = stationarity_measure(&spec, &reference, &y).unwrap();

    let gf = spec.f().grad(&y);
    let gh = spec.h().grad(&y);
    let xi = spec.p().subgrad(&y);
    let goa = reference.gamma_over_alpha();
    let gob = reference.gamma_over_beta();
    let u: Vec<f64> = (0..y.len())
        .map(|i| {
            goa * (y[i] - reference.alpha * gf[i] - reference.alpha * gh[i]) + gob * y[i]
                - reference.gamma * xi[i]
        })
        .collect();
    let ProxPoint { point, .. } = spec.g().prox(&u, reference.gamma).unwrap();
    let want = dist2(&y, &point);
    assert!((got - want).abs() <= 1e-12 * (1.0 + want));
}

#[test]
fn concurrent_runs_share_a_problem() {
    let spec = small_kyfan();
    let cfg = make_step_config(spec.params(), 1.5, 0.99).unwrap();
    let stopping = StoppingCriterion {
        eps: 1e-6,
        max_iter: 10_000,
        reference: make_step_config(spec.params(), 1.0, 0.99).unwrap(),
    };
    let sequential = run(&spec, &cfg, &RunOptions::new(stopping.clone()), None).unwrap();

    let spec = Arc::new(spec);
    let mut handles = Vec::new();
    for _ in 0..2 {
        let spec = Arc::clone(&spec);
        let cfg = cfg;
        let stopping = stopping.clone();
        handles.push(std::thread::spawn(move || {
            run(&spec, &cfg, &RunOptions::new(stopping), None).unwrap()
        }));
    }
    for h in handles {
        let report = h.join().unwrap();
        assert_eq!(report.iterations, sequential.iterations);
        assert_eq!(report.final_state.y, sequential.final_state.y);
    }
}

#[test]
fn feasibility_whole_space_converges_immediately() {
    struct WholeSpace;
    impl ProjectableSet<f64> for WholeSpace {
        fn project(&self, x: &[f64]) -> Vec<f64> {
            x.to_vec()
        }
    }
    let sets = FeasibilityProblem::<f64> {
        a: Arc::new(WholeSpace),
        b: Arc::new(WholeSpace),
        c: Arc::new(WholeSpace),
        d: vec![Arc::new(WholeSpace)],
    };
    let spec = build_feasibility_spec(sets, 3).unwrap();
    let cfg = make_step_config(spec.params(), 1.0, 0.99).unwrap();
    let stopping = StoppingCriterion { eps: 1e-10, max_iter: 10, reference: cfg };
    let report = run(
        &spec,
        &cfg,
        &RunOptions::new(stopping),
        Some((vec![0.4, -0.7, 2.0], vec![0.4, -0.7, 2.0])),
    )
    .unwrap();
    assert_eq!(report.termination, Termination::Converged);
    assert_eq!(report.iterations, 0);
}

#[test]
fn custom_step_config_validation() {
    assert!(StepConfig::<f64>::new(1.0, f64::INFINITY, f64::INFINITY).is_err());
    assert!(StepConfig::<f64>::new(0.0, 1.0, 1.0).is_err());
    assert!(StepConfig::<f64>::new(1.0, -1.0, 1.0).is_err());
    let cfg = StepConfig::<f64>::new(1.5, 0.5, 0.5).unwrap();
    assert!((cfg.gamma - 0.25).abs() < 1e-15);
}
