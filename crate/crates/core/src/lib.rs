//! Four-operator splitting for nonsmooth nonconvex optimization.
//!
//! This crate minimizes objectives of the form
//!
//! ```text
//! Ψ(x) = f(x) + g(x) + h(x) + p(x)
//! ```
//!
//! where `f` is smooth and proximable, `g` is proper/closed/proximable,
//! `h` is smooth, and `p` is continuous with `-p` weakly convex.  The
//! iteration generalizes Davis–Yin splitting with a relaxation parameter
//! `τ` and stepsizes `(α, β, γ)` tied by `1/γ = 1/α + 1/β`:
//!
//! ```text
//! x^k     = prox_{αf}(z^k)
//! y^{k+1} = prox_{γg}( (γ/α)(2x^k − z^k − α∇h(x^k)) + (γ/β)(y^k − βξ^k) )
//! z^{k+1} = z^k + τ(y^{k+1} − x^k)
//! ```
//!
//! The [`stepsize`] module computes certified upper bounds `ᾱ` for every
//! `τ` regime (and the smaller comparison bound from the earlier
//! three-operator analysis), [`solver`] runs the iteration with merit
//! monitoring and residual-based termination, [`problems`] ships the
//! built-in problem families (nonnegative low-rank matrix completion,
//! cardinality-penalized least squares via the Ky Fan k-norm, and set
//! feasibility), and [`bench`] drives preset/τ sweeps into CSV tables.
//!
//! All numeric code is generic over the scalar type via [`scalar::Scalar`]
//! (implemented for `f32` and `f64`); the aliases below pin the `f64`
//! instantiations used by the CLI and the test suite.

pub mod bench;
pub mod data;
pub mod linalg;
pub mod presets;
pub mod problem;
pub mod problems;
pub mod scalar;
pub mod solver;
pub mod stepsize;

pub use scalar::Scalar;

/// `f64` dense matrix.
pub type Mat64 = linalg::Mat<f64>;
/// `f64` problem bundle.
pub type ProblemSpec64 = problem::ProblemSpec<f64>;
/// `f64` curvature constants.
pub type CurvatureParams64 = problem::CurvatureParams<f64>;
/// `f64` stepsize tuple.
pub type StepConfig64 = stepsize::StepConfig<f64>;
/// `f64` run trace.
pub type RunReport64 = solver::RunReport<f64>;
