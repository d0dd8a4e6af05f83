//! The four-function problem abstraction.
//!
//! A [`ProblemSpec`] bundles oracles for `Ψ = f + g + h + p`:
//!
//! * `f` — smooth, proximable: value, gradient, and `prox_{αf}`;
//! * `g` — proper and closed: value (possibly `+∞`) and `prox_{γg}`;
//! * `h` — smooth: value and gradient;
//! * `p` — continuous, weakly concave: value and a deterministic
//!   subgradient selector returning one element of `∂p`.
//!
//! Stepsizes may be `+∞`: `prox_{∞f}` is the identity (valid when `∇f`
//! is constant) and the `p` model with `β = ∞` keeps only its linear
//! part.  All oracles must be safe for concurrent read-only use; any
//! cached factorizations are built lazily behind locks.

use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{self, LinalgError};
use crate::scalar::Scalar;
use crate::stepsize::StepConfig;

/// Which of the four terms an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    F,
    G,
    H,
    P,
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Component::F => "f",
            Component::G => "g",
            Component::H => "h",
            Component::P => "p",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("oracle produced a non-finite value")]
    NonFinite,
}

/// Output of a nonsmooth prox: the point together with the function
/// value there (often a free byproduct, e.g. thresholded singular values).
#[derive(Debug, Clone)]
pub struct ProxPoint<T> {
    pub point: Vec<T>,
    pub value: T,
}

/// Smooth term: value and gradient.
pub trait Smooth<T: Scalar>: Send + Sync {
    fn value(&self, x: &[T]) -> T;
    fn grad(&self, x: &[T]) -> Vec<T>;
}

/// Smooth and proximable term (`f`).
pub trait SmoothProx<T: Scalar>: Smooth<T> {
    /// `prox_{step·f}(z)`; `step = ∞` means the identity (affine `f`) or
    /// the global minimizer when one exists.
    fn prox(&self, z: &[T], step: T) -> Result<Vec<T>, OracleError>;
}

/// Proper closed proximable term (`g`).
pub trait Proximable<T: Scalar>: Send + Sync {
    /// May return `+∞` outside the domain.
    fn value(&self, x: &[T]) -> T;
    fn prox(&self, v: &[T], step: T) -> Result<ProxPoint<T>, OracleError>;
}

/// Weakly concave term (`p`): `-p` is `ρ_p`-weakly convex.
pub trait WeaklyConcave<T: Scalar>: Send + Sync {
    fn value(&self, y: &[T]) -> T;
    /// Deterministic selector returning one element of `∂p(y)`.
    fn subgrad(&self, y: &[T]) -> Vec<T>;
}

// ── curvature constants ─────────────────────────────────────────────

/// The curvature constants the stepsize bounds consume.
///
/// `lf`/`lh` are Lipschitz constants of `∇f`/`∇h`; `rho_f` makes
/// `f + ρ_f/2‖·‖²` convex; `rho_h` makes `h + ρ_h/2‖·‖²` convex;
/// `rho_p` makes `ρ_p/2‖·‖² − p` convex; `sigma_f` is the strong
/// convexity modulus of `f` (0 when absent); `sigma_h` makes
/// `h − σ_h/2‖·‖²` convex (`−L_h` is always valid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureParams<T> {
    pub lf: T,
    pub lh: T,
    pub rho_f: T,
    pub rho_h: T,
    pub rho_p: T,
    pub sigma_f: T,
    pub sigma_h: T,
}

impl<T: Scalar> CurvatureParams<T> {
    /// Constants for convex smooth `f` and `h` (`ρ_f = ρ_h = σ_f = σ_h
    /// = ρ_p = 0`).
    pub fn convex_smooth(lf: T, lh: T) -> Self {
        Self {
            lf,
            lh,
            rho_f: T::zero(),
            rho_h: T::zero(),
            rho_p: T::zero(),
            sigma_f: T::zero(),
            sigma_h: T::zero(),
        }
    }

    pub fn with_rho_f(mut self, rho_f: T) -> Self {
        self.rho_f = rho_f;
        self
    }

    pub fn with_rho_h(mut self, rho_h: T) -> Self {
        self.rho_h = rho_h;
        self
    }

    pub fn with_rho_p(mut self, rho_p: T) -> Self {
        self.rho_p = rho_p;
        self
    }

    pub fn with_sigma_f(mut self, sigma_f: T) -> Self {
        self.sigma_f = sigma_f;
        self
    }

    pub fn with_sigma_h(mut self, sigma_h: T) -> Self {
        self.sigma_h = sigma_h;
        self
    }

    /// Checks the mutual constraints: `0 ≤ ρ_f ≤ L_f`, `0 ≤ ρ_h ≤ L_h`,
    /// `−L_h ≤ σ_h ≤ L_h`, `σ_f ≤ L_f`, `ρ_p ≥ 0`.
    pub fn validate(&self) -> Result<(), ParamsError> {
        let bad = |what: &'static str| Err(ParamsError(what));
        if !(self.lf >= T::zero() && self.lh >= T::zero()) {
            return bad("L_f and L_h must be nonnegative");
        }
        if !(self.rho_f >= T::zero() && self.rho_f <= self.lf) {
            return bad("rho_f must lie in [0, L_f]");
        }
        if !(self.rho_h >= T::zero() && self.rho_h <= self.lh) {
            return bad("rho_h must lie in [0, L_h]");
        }
        if !(self.sigma_h >= -self.lh && self.sigma_h <= self.lh) {
            return bad("sigma_h must lie in [-L_h, L_h]");
        }
        if !(self.sigma_f <= self.lf) {
            return bad("sigma_f must not exceed L_f");
        }
        if !(self.rho_p >= T::zero()) {
            return bad("rho_p must be nonnegative");
        }
        if [self.lf, self.lh, self.rho_f, self.rho_h, self.rho_p, self.sigma_f, self.sigma_h]
            .iter()
            .any(|v| !v.is_finite())
        {
            return bad("curvature constants must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("invalid curvature parameters: {0}")]
pub struct ParamsError(pub &'static str);

// ── objective evaluation ────────────────────────────────────────────

/// Value of `Ψ` split by component; `total` is exactly the sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue<T> {
    pub f: T,
    pub g: T,
    pub h: T,
    pub p: T,
    pub total: T,
}

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("{component} oracle returned NaN")]
    NanFrom { component: Component },
}

// ── the bundle ──────────────────────────────────────────────────────

/// Immutable bundle of the four oracles plus curvature constants.
#[derive(Clone)]
pub struct ProblemSpec<T: Scalar> {
    dim: usize,
    params: CurvatureParams<T>,
    f: Arc<dyn SmoothProx<T>>,
    g: Arc<dyn Proximable<T>>,
    h: Arc<dyn Smooth<T>>,
    p: Arc<dyn WeaklyConcave<T>>,
    p_zero: bool,
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn from_parts(
        dim: usize,
        params: CurvatureParams<T>,
        f: Arc<dyn SmoothProx<T>>,
        g: Arc<dyn Proximable<T>>,
        h: Arc<dyn Smooth<T>>,
        p: Arc<dyn WeaklyConcave<T>>,
        p_zero: bool,
    ) -> Result<Self, ParamsError> {
        params.validate()?;
        Ok(Self { dim, params, f, g, h, p, p_zero })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &CurvatureParams<T> {
        &self.params
    }

    pub fn f(&self) -> &dyn SmoothProx<T> {
        &*self.f
    }

    pub fn g(&self) -> &dyn Proximable<T> {
        &*self.g
    }

    pub fn h(&self) -> &dyn Smooth<T> {
        &*self.h
    }

    pub fn p(&self) -> &dyn WeaklyConcave<T> {
        &*self.p
    }

    pub fn f_arc(&self) -> Arc<dyn SmoothProx<T>> {
        Arc::clone(&self.f)
    }

    pub fn g_arc(&self) -> Arc<dyn Proximable<T>> {
        Arc::clone(&self.g)
    }

    pub fn h_arc(&self) -> Arc<dyn Smooth<T>> {
        Arc::clone(&self.h)
    }

    pub fn p_arc(&self) -> Arc<dyn WeaklyConcave<T>> {
        Arc::clone(&self.p)
    }

    pub fn p_is_zero(&self) -> bool {
        self.p_zero
    }

    /// Same oracles with different constants/terms (used by preset rewiring).
    pub fn rewired(
        &self,
        params: CurvatureParams<T>,
        f: Arc<dyn SmoothProx<T>>,
        h: Arc<dyn Smooth<T>>,
        p: Arc<dyn WeaklyConcave<T>>,
        p_zero: bool,
    ) -> Result<Self, ParamsError> {
        params.validate()?;
        Ok(Self { dim: self.dim, params, f, g: Arc::clone(&self.g), h, p, p_zero })
    }

    /// Evaluates `Ψ(x)` componentwise.  `+∞` from `g` is a legitimate
    /// outcome (point outside the domain); NaN from any oracle is not.
    pub fn evaluate_objective(&self, x: &[T]) -> Result<ObjectiveValue<T>, ObjectiveError> {
        let fv = self.f.value(x);
        if fv.is_nan() {
            return Err(ObjectiveError::NanFrom { component: Component::F });
        }
        let gv = self.g.value(x);
        if gv.is_nan() {
            return Err(ObjectiveError::NanFrom { component: Component::G });
        }
        let hv = self.h.value(x);
        if hv.is_nan() {
            return Err(ObjectiveError::NanFrom { component: Component::H });
        }
        let pv = self.p.value(x);
        if pv.is_nan() {
            return Err(ObjectiveError::NanFrom { component: Component::P });
        }
        let total = fv + gv + hv + pv;
        Ok(ObjectiveValue { f: fv, g: gv, h: hv, p: pv, total })
    }

    /// Builds lazy caches (e.g. SPD factorizations) for the stepsizes a
    /// run will use, so the timed loop excludes factorization cost.
    pub fn prepare(&self, cfg: &StepConfig<T>) -> Result<(), OracleError> {
        let z = vec![T::zero(); self.dim];
        if cfg.alpha.is_finite() {
            self.f.prox(&z, cfg.alpha)?;
        }
        self.g.prox(&z, cfg.gamma)?;
        Ok(())
    }
}

// ── oracle self-audit ───────────────────────────────────────────────

/// Maximum deviations seen by [`ProblemSpec::audit_oracles`].
#[derive(Debug, Clone, Copy)]
pub struct AuditReport<T> {
    pub samples: usize,
    /// max over samples of `‖fd − ∇f‖ / (1 + ‖∇f‖)`
    pub grad_f_deviation: T,
    pub grad_h_deviation: T,
    /// max over samples of `‖z − x − α∇f(x)‖ / (1 + ‖z‖)` with `x = prox_{αf}(z)`
    pub prox_f_residual: T,
}

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("{component} gradient deviates from central differences by {deviation:.3e}")]
    GradientDeviation { component: Component, deviation: f64 },
    #[error("f-prox optimality residual {residual:.3e} exceeds tolerance")]
    ProxResidual { residual: f64 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

const GRAD_AUDIT_TOL: f64 = 1e-4;
const PROX_AUDIT_TOL: f64 = 1e-9;

impl<T: Scalar> ProblemSpec<T> {
    /// Cross-checks the smooth oracles against central finite
    /// differences at seeded Gaussian points, and the `f`-prox against
    /// its optimality condition `z − x = α∇f(x)`.
    pub fn audit_oracles(&self, samples: usize, seed: u64) -> Result<AuditReport<T>, AuditError> {
        let mut gauss = crate::data::GaussianSource::new(seed);
        let mut report = AuditReport {
            samples,
            grad_f_deviation: T::zero(),
            grad_h_deviation: T::zero(),
            prox_f_residual: T::zero(),
        };
        let lsum = self.params.lf + self.params.lh;
        let alpha = if lsum > T::zero() { T::of(0.5) / lsum } else { T::infinity() };
        for _ in 0..samples {
            let x: Vec<T> = (0..self.dim).map(|_| T::of(gauss.sample())).collect();
            let dev_f = grad_fd_deviation(&*self.f, &x);
            let dev_h = grad_fd_deviation(&*self.h, &x);
            report.grad_f_deviation = report.grad_f_deviation.max(dev_f);
            report.grad_h_deviation = report.grad_h_deviation.max(dev_h);
            if alpha.is_finite() {
                let z: Vec<T> = (0..self.dim).map(|_| T::of(gauss.sample())).collect();
                let px = self.f.prox(&z, alpha)?;
                let gpx = self.f.grad(&px);
                let mut r = T::zero();
                for i in 0..self.dim {
                    let d = z[i] - px[i] - alpha * gpx[i];
                    r += d * d;
                }
                let rel = r.sqrt() / (T::one() + linalg::norm2(&z));
                report.prox_f_residual = report.prox_f_residual.max(rel);
            }
        }
        if report.grad_f_deviation > T::of(GRAD_AUDIT_TOL) {
            return Err(AuditError::GradientDeviation {
                component: Component::F,
                deviation: report.grad_f_deviation.as_f64(),
            });
        }
        if report.grad_h_deviation > T::of(GRAD_AUDIT_TOL) {
            return Err(AuditError::GradientDeviation {
                component: Component::H,
                deviation: report.grad_h_deviation.as_f64(),
            });
        }
        if report.prox_f_residual > T::of(PROX_AUDIT_TOL) {
            return Err(AuditError::ProxResidual { residual: report.prox_f_residual.as_f64() });
        }
        Ok(report)
    }
}

/// `‖fd − ∇φ(x)‖ / (1 + ‖∇φ(x)‖)` with central differences of step
/// `1e-6·(1+‖x‖)`.
fn grad_fd_deviation<T: Scalar>(oracle: &dyn Smooth<T>, x: &[T]) -> T {
    let g = oracle.grad(x);
    let h = T::of(1e-6) * (T::one() + linalg::norm2(x));
    let mut xp = x.to_vec();
    let mut err = T::zero();
    for i in 0..x.len() {
        let xi = x[i];
        xp[i] = xi + h;
        let fp = oracle.value(&xp);
        xp[i] = xi - h;
        let fm = oracle.value(&xp);
        xp[i] = xi;
        let fd = (fp - fm) / (T::of(2.0) * h);
        let d = fd - g[i];
        err += d * d;
    }
    err.sqrt() / (T::one() + linalg::norm2(&g))
}

// ── building blocks ─────────────────────────────────────────────────

/// Reusable oracle pieces: zero terms, quadratics, affine terms, the
/// ℓ₁ norm, and smooth sums (for preset rewiring).
pub mod blocks {
    use super::*;

    /// The zero function; prox is the identity for any stepsize.
    pub struct ZeroSmooth;

    impl<T: Scalar> Smooth<T> for ZeroSmooth {
        fn value(&self, _x: &[T]) -> T {
            T::zero()
        }
        fn grad(&self, x: &[T]) -> Vec<T> {
            vec![T::zero(); x.len()]
        }
    }

    impl<T: Scalar> SmoothProx<T> for ZeroSmooth {
        fn prox(&self, z: &[T], _step: T) -> Result<Vec<T>, OracleError> {
            Ok(z.to_vec())
        }
    }

    impl<T: Scalar> Proximable<T> for ZeroSmooth {
        fn value(&self, _x: &[T]) -> T {
            T::zero()
        }
        fn prox(&self, v: &[T], _step: T) -> Result<ProxPoint<T>, OracleError> {
            Ok(ProxPoint { point: v.to_vec(), value: T::zero() })
        }
    }

    impl<T: Scalar> WeaklyConcave<T> for ZeroSmooth {
        fn value(&self, _y: &[T]) -> T {
            T::zero()
        }
        fn subgrad(&self, y: &[T]) -> Vec<T> {
            vec![T::zero(); y.len()]
        }
    }

    /// `(w/2)‖x − c‖²` with `c = 0` unless given.
    pub struct ScaledSqNorm<T> {
        pub weight: T,
        pub center: Option<Vec<T>>,
    }

    impl<T: Scalar> ScaledSqNorm<T> {
        pub fn new(weight: T) -> Self {
            Self { weight, center: None }
        }

        pub fn centered(weight: T, center: Vec<T>) -> Self {
            Self { weight, center: Some(center) }
        }

        fn centered_at(&self, i: usize) -> T {
            self.center.as_ref().map_or_else(T::zero, |c| c[i])
        }
    }

    impl<T: Scalar> Smooth<T> for ScaledSqNorm<T> {
        fn value(&self, x: &[T]) -> T {
            let mut s = T::zero();
            for (i, &xi) in x.iter().enumerate() {
                let d = xi - self.centered_at(i);
                s += d * d;
            }
            self.weight * T::of(0.5) * s
        }
        fn grad(&self, x: &[T]) -> Vec<T> {
            x.iter().enumerate().map(|(i, &xi)| self.weight * (xi - self.centered_at(i))).collect()
        }
    }

    impl<T: Scalar> SmoothProx<T> for ScaledSqNorm<T> {
        fn prox(&self, z: &[T], step: T) -> Result<Vec<T>, OracleError> {
            if !step.is_finite() {
                // global minimizer
                return Ok((0..z.len()).map(|i| self.centered_at(i)).collect());
            }
            let denom = T::one() + step * self.weight;
            Ok(z.iter()
                .enumerate()
                .map(|(i, &zi)| (zi + step * self.weight * self.centered_at(i)) / denom)
                .collect())
        }
    }

    /// `⟨slope, x⟩ + offset`; `prox_{∞}` is the identity by convention.
    pub struct AffineSmooth<T> {
        pub slope: Vec<T>,
        pub offset: T,
    }

    impl<T: Scalar> Smooth<T> for AffineSmooth<T> {
        fn value(&self, x: &[T]) -> T {
            linalg::dot(&self.slope, x) + self.offset
        }
        fn grad(&self, _x: &[T]) -> Vec<T> {
            self.slope.clone()
        }
    }

    impl<T: Scalar> SmoothProx<T> for AffineSmooth<T> {
        fn prox(&self, z: &[T], step: T) -> Result<Vec<T>, OracleError> {
            if !step.is_finite() {
                return Ok(z.to_vec());
            }
            Ok(z.iter().zip(&self.slope).map(|(&zi, &ai)| zi - step * ai).collect())
        }
    }

    /// `weight·‖x‖₁` with the soft-threshold prox.
    pub struct L1Norm<T> {
        pub weight: T,
    }

    impl<T: Scalar> Proximable<T> for L1Norm<T> {
        fn value(&self, x: &[T]) -> T {
            self.weight * x.iter().fold(T::zero(), |acc, &v| acc + v.abs())
        }
        fn prox(&self, v: &[T], step: T) -> Result<ProxPoint<T>, OracleError> {
            let t = step * self.weight;
            let point = crate::problems::prox_l1(v, t);
            let value = <Self as Proximable<T>>::value(self, &point);
            Ok(ProxPoint { point, value })
        }
    }

    /// Sum of a proximable-smooth and a smooth term, exposed as plain
    /// smooth (preset rewiring folds `f` into `h` this way).
    pub struct SumSmooth<T: Scalar> {
        pub a: Arc<dyn SmoothProx<T>>,
        pub b: Arc<dyn Smooth<T>>,
    }

    impl<T: Scalar> Smooth<T> for SumSmooth<T> {
        fn value(&self, x: &[T]) -> T {
            self.a.value(x) + self.b.value(x)
        }
        fn grad(&self, x: &[T]) -> Vec<T> {
            let ga = self.a.grad(x);
            let gb = self.b.grad(x);
            ga.iter().zip(&gb).map(|(&u, &v)| u + v).collect()
        }
    }
}
