//! Certified stepsize upper bounds for the splitting iteration.
//!
//! For each relaxation parameter `τ` there is a largest `ᾱ` (or, for
//! `τ ≥ 2`, an admissible interval) such that running with `α ≤ ᾱ` and
//! `β ≤ 1/ρ_p` makes the merit sequence nonincreasing, with the
//! per-iteration decrease controlled by a quadratic `c(α) ≤ 0`:
//!
//! ```text
//! V_{k−1} − V_k ≥ −c(α)/(2τα)·‖x^k−x^{k−1}‖² + (1−βρ_p)/(2β)·‖y^k−y^{k−1}‖²
//! ```
//!
//! [`compute_alpha_bar`] evaluates the bound for any `τ > 0`,
//! [`bian_zhang_alpha`] the earlier (strictly smaller) three-operator
//! bound used for comparison, and [`make_step_config`] assembles a full
//! `(τ, α, β, γ)` tuple with `1/γ = 1/α + 1/β`.

use thiserror::Error;

use crate::problem::{CurvatureParams, ParamsError};
use crate::scalar::Scalar;

/// Stepsize tuple for the iteration.  `α` or `β` may be `+∞` (at most
/// one of them); `γ` is always finite with `1/γ = 1/α + 1/β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig<T> {
    pub tau: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Scalar> StepConfig<T> {
    /// Builds the tuple from `(τ, α, β)`, deriving `γ`.
    pub fn new(tau: T, alpha: T, beta: T) -> Result<Self, StepsizeError> {
        if !(tau > T::zero()) || tau.is_infinite() {
            return Err(StepsizeError::NonPositiveTau { tau: tau.as_f64() });
        }
        if !(alpha > T::zero()) || !(beta > T::zero()) {
            return Err(StepsizeError::InvalidConfig("alpha and beta must be positive"));
        }
        if alpha.is_infinite() && beta.is_infinite() {
            return Err(StepsizeError::InvalidConfig("alpha and beta cannot both be infinite"));
        }
        let gamma = if alpha.is_infinite() {
            beta
        } else if beta.is_infinite() {
            alpha
        } else {
            T::one() / (T::one() / alpha + T::one() / beta)
        };
        Ok(Self { tau, alpha, beta, gamma })
    }

    /// `γ/α` with the `1/∞ = 0` convention.
    pub fn gamma_over_alpha(&self) -> T {
        if self.alpha.is_infinite() {
            T::zero()
        } else {
            self.gamma / self.alpha
        }
    }

    /// `γ/β` with the `1/∞ = 0` convention.
    pub fn gamma_over_beta(&self) -> T {
        if self.beta.is_infinite() {
            T::zero()
        } else {
            self.gamma / self.beta
        }
    }
}

/// Which derivation branch produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `τ ≤ 1`, `(2−τ)L_f − 2ρ_f ≥ τL_h`: closed form `1/(L_f+L_h)`.
    LowTauCaseOne,
    /// `τ ≤ 1`, complementary case: `τ/(2η*)` from the quadratic `q`.
    LowTauCaseTwo,
    /// `τ ∈ (1,2)`, `τ ≤ 2ᾱ₁(L_f−ρ_f)`: `ᾱ₁`, the positive root of `c`.
    MidTauCaseOne,
    /// `τ ∈ (1,2)`, complementary case: `τ/(2η*)`.
    MidTauCaseTwo,
    /// `τ ≥ 2`: an admissible interval for strongly convex `f`.
    HighTauInterval,
    /// `L_f + L_h = 0`: any `τ`, `α = ∞`; decrease holds unconditionally.
    SmoothFree,
}

/// Intermediates of the bound evaluation, exposed for diagnostics and
/// tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundDetail<T> {
    pub eta_star: Option<T>,
    pub alpha_one: Option<T>,
    /// `η* + ρ_f` (case-two branches)
    pub l_star: Option<T>,
    pub nu: Option<T>,
    pub theta0: Option<T>,
    pub theta1: Option<T>,
    pub theta2: Option<T>,
    pub delta: Option<T>,
    pub mu: Option<(T, T)>,
}

/// A certified stepsize bound: the maximum `ᾱ` (for `τ < 2`) or the
/// admissible interval (for `τ ≥ 2`), the branch that produced it, and
/// the decrease quadratic `c`.
#[derive(Debug, Clone, Copy)]
pub struct StepsizeBound<T> {
    pub alpha_bar: T,
    pub regime: Regime,
    /// For `τ ≥ 2`: the open admissible interval for `α`, already
    /// intersected with `(0, 1/(L_f+L_h))`.
    pub interval: Option<(T, T)>,
    /// Coefficients `(c₂, c₁, c₀)` of `c(α) = c₂α² + c₁α + c₀`.
    pub c_coeffs: (T, T, T),
    pub detail: BoundDetail<T>,
}

impl<T: Scalar> StepsizeBound<T> {
    /// Evaluates the decrease quadratic at a stepsize.  With `α = ∞`
    /// (smooth-free regime) `c` is the constant −1.
    pub fn c(&self, alpha: T) -> T {
        if alpha.is_infinite() {
            return -T::one();
        }
        let (c2, c1, c0) = self.c_coeffs;
        (c2 * alpha + c1) * alpha + c0
    }

    /// `c(ᾱ)` — zero at a boundary root, negative when the bound was
    /// clamped strictly inside the admissible region.
    pub fn c_at_bound(&self) -> T {
        self.c(self.alpha_bar)
    }
}

#[derive(Debug, Error)]
pub enum StepsizeError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("tau must be a positive finite real, got {tau}")]
    NonPositiveTau { tau: f64 },
    #[error("tau = {tau} is infeasible: {reason}")]
    InfeasibleTau { tau: f64, reason: &'static str },
    #[error("invalid step configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("Bian–Zhang bound needs L_f + L_h > 0")]
    AllZeroCurvature,
    #[error("safety factor must lie in (0, 1], got {0}")]
    BadSafety(f64),
}

/// Largest positive root of `Aη² − Bη − C` with `A > 0`, `B, C ≥ 0`,
/// not both zero.
fn positive_quadratic_root<T: Scalar>(a: T, b: T, c: T) -> Option<T> {
    let disc = b * b + T::of(4.0) * a * c;
    let root = (b + disc.sqrt()) / (T::of(2.0) * a);
    if root > T::zero() {
        Some(root)
    } else {
        None
    }
}

/// Evaluates the certified stepsize bound for `(params, τ)`.
pub fn compute_alpha_bar<T: Scalar>(
    params: &CurvatureParams<T>,
    tau: T,
) -> Result<StepsizeBound<T>, StepsizeError> {
    params.validate()?;
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(StepsizeError::NonPositiveTau { tau: tau.as_f64() });
    }
    let (lf, lh) = (params.lf, params.lh);
    let s = lf + lh;
    let two = T::of(2.0);

    if s == T::zero() {
        // Smooth terms are affine; the x/z half of the iteration is inert
        // and the decrease inequality holds with any negative constant.
        return Ok(StepsizeBound {
            alpha_bar: T::infinity(),
            regime: Regime::SmoothFree,
            interval: None,
            c_coeffs: (T::zero(), T::zero(), -T::one()),
            detail: BoundDetail::default(),
        });
    }

    if tau <= T::one() {
        low_mid_tau(params, tau, (two - tau) * lh)
    } else if tau < two {
        // the σ_h-aware linear coefficient replaces (2−τ)L_h
        low_mid_tau(params, tau, tau * lh - two * (tau - T::one()) * params.sigma_h)
    } else {
        high_tau(params, tau)
    }
}

/// Shared evaluation for `τ ∈ (0,2)`.  `m` is the branch-dependent
/// coefficient: `(2−τ)L_h` for `τ ≤ 1` and `τL_h − 2(τ−1)σ_h` for
/// `τ ∈ (1,2)`; with `σ_h = L_h` the two coincide.
fn low_mid_tau<T: Scalar>(
    params: &CurvatureParams<T>,
    tau: T,
    m: T,
) -> Result<StepsizeBound<T>, StepsizeError> {
    let (lf, lh, rho_f) = (params.lf, params.lh, params.rho_f);
    let s = lf + lh;
    let two = T::of(2.0);
    let low = tau <= T::one();
    let mut detail = BoundDetail::default();

    // Case-one c(α) = 2L_f·S·α² + (m − τL_f)α − (2−τ); its positive root.
    let case_one_c = (two * lf * s, m - tau * lf, -(two - tau));
    let alpha_one = if lf > T::zero() {
        positive_quadratic_root(case_one_c.0, -(case_one_c.1), two - tau)
    } else if case_one_c.1 > T::zero() {
        Some((two - tau) / case_one_c.1)
    } else {
        None
    };
    detail.alpha_one = alpha_one;

    // Case selection.  For τ ≤ 1 the closed-form condition
    // (2−τ)L_f − 2ρ_f ≥ τL_h is equivalent to τ ≤ 2ᾱ₁(L_f−ρ_f) with
    // ᾱ₁ = 1/S; for τ ∈ (1,2) the τ ≤ 2ᾱ₁(L_f−ρ_f) test is primitive.
    let case_one = if low {
        (two - tau) * lf - two * rho_f >= tau * lh
    } else {
        match alpha_one {
            Some(a1) => tau <= two * a1 * (lf - rho_f),
            None => false,
        }
    };

    if case_one {
        let alpha_bar = if low {
            T::one() / s
        } else {
            alpha_one.expect("case-one requires a positive root")
        };
        return Ok(StepsizeBound {
            alpha_bar,
            regime: if low { Regime::LowTauCaseOne } else { Regime::MidTauCaseOne },
            interval: None,
            c_coeffs: case_one_c,
            detail,
        });
    }

    // Case two: ᾱ = τ/(2η*) with η* the positive root of
    //   q(η) = 2(2−τ)η² − τ(m + ρ_f τ)η − τ²(ρ_f² + L_f L_h).
    let qa = two * (two - tau);
    let qb = tau * (m + rho_f * tau);
    let qc = tau * tau * (rho_f * rho_f + lf * lh);
    let eta_star = positive_quadratic_root(qa, qb, qc).ok_or(StepsizeError::InfeasibleTau {
        tau: tau.as_f64(),
        reason: "case-two quadratic has no positive root",
    })?;
    detail.eta_star = Some(eta_star);
    detail.l_star = Some(eta_star + rho_f);
    let alpha_bar = tau / (two * eta_star);
    let c_coeffs = (
        two * lf * lh,
        m + rho_f * tau * (eta_star + rho_f) / eta_star,
        -(two - tau),
    );
    Ok(StepsizeBound {
        alpha_bar,
        regime: if low { Regime::LowTauCaseTwo } else { Regime::MidTauCaseTwo },
        interval: None,
        c_coeffs,
        detail,
    })
}

/// `τ ≥ 2`: needs `f` strongly convex; the bound is an interval
/// `α = τμ/(2S)` for `μ` between the roots of `r(μ)`.
fn high_tau<T: Scalar>(
    params: &CurvatureParams<T>,
    tau: T,
) -> Result<StepsizeBound<T>, StepsizeError> {
    let (lf, lh, rho_h, sigma_f) = (params.lf, params.lh, params.rho_h, params.sigma_f);
    let s = lf + lh;
    let two = T::of(2.0);
    if !(sigma_f > T::zero()) {
        return Err(StepsizeError::InfeasibleTau {
            tau: tau.as_f64(),
            reason: "tau >= 2 requires sigma_f > 0 (strongly convex f)",
        });
    }
    let nu = sigma_f / s;
    let theta0 = lh * (lf * lf - sigma_f * sigma_f) / (lf * s * s);
    let theta1 = lh / s;
    let theta2 = rho_h / s;
    let lin = tau * nu - tau * theta1 - two * (tau - T::one()) * theta2;
    if !(lin > T::zero()) {
        return Err(StepsizeError::InfeasibleTau {
            tau: tau.as_f64(),
            reason: "tau*nu - tau*theta1 - 2(tau-1)*theta2 must be positive",
        });
    }
    let delta = lin * lin - T::of(8.0) * (theta0 + nu) * (tau - two);
    if !(delta > T::zero()) {
        return Err(StepsizeError::InfeasibleTau {
            tau: tau.as_f64(),
            reason: "discriminant delta(tau) is not positive",
        });
    }
    let denom = two * tau * (theta0 + nu);
    let mu_lo = (lin - delta.sqrt()) / denom;
    let mu_hi = (lin + delta.sqrt()) / denom;

    let scale = tau / (two * s);
    let lo = (mu_lo * scale).max(T::zero());
    let hi = (mu_hi * scale).min(T::one() / s);
    if !(hi > lo) {
        return Err(StepsizeError::InfeasibleTau {
            tau: tau.as_f64(),
            reason: "admissible interval is empty after intersecting with (0, 1/(L_f+L_h))",
        });
    }

    // c(α) = r(2Sα/τ)/2 expanded in α.
    let c_coeffs = (two * s * s * (theta0 + nu), -s * lin, tau - two);
    Ok(StepsizeBound {
        alpha_bar: hi,
        regime: Regime::HighTauInterval,
        interval: Some((lo, hi)),
        c_coeffs,
        detail: BoundDetail {
            nu: Some(nu),
            theta0: Some(theta0),
            theta1: Some(theta1),
            theta2: Some(theta2),
            delta: Some(delta),
            mu: Some((mu_lo, mu_hi)),
            ..BoundDetail::default()
        },
    })
}

/// The three-operator comparison bound: the unique positive root of
///
/// ```text
/// d(α) = L_f²L_h·α³ + 2(L_f² + L_hL_f + ρ_fL_h)·α² + (5ρ_f + 2L_h + 4L_f)·α − 1
/// ```
///
/// solved by bracketed bisection refined with Newton steps, to absolute
/// tolerance 1e−10.
pub fn bian_zhang_alpha<T: Scalar>(params: &CurvatureParams<T>) -> Result<T, StepsizeError> {
    params.validate()?;
    let (lf, lh, rho_f) = (params.lf, params.lh, params.rho_f);
    if lf + lh <= T::zero() {
        return Err(StepsizeError::AllZeroCurvature);
    }
    let a3 = lf * lf * lh;
    let a2 = T::of(2.0) * (lf * lf + lh * lf + rho_f * lh);
    let a1 = T::of(5.0) * rho_f + T::of(2.0) * lh + T::of(4.0) * lf;
    let d = |x: T| ((a3 * x + a2) * x + a1) * x - T::one();
    let dprime = |x: T| (T::of(3.0) * a3 * x + T::of(2.0) * a2) * x + a1;

    // d(0) = −1 and every coefficient of α is nonnegative, so d is
    // increasing on (0,∞) and the root is unique; 1/(L_f+L_h) brackets
    // it (the certified bound dominates), but double defensively.
    let mut hi = T::one() / (lf + lh);
    let mut grow = 0;
    while d(hi) <= T::zero() && grow < 200 {
        hi = hi * T::of(2.0);
        grow += 1;
    }
    let mut lo = T::zero();
    for _ in 0..200 {
        let mid = (lo + hi) * T::of(0.5);
        if d(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= T::of(1e-12) {
            break;
        }
    }
    let mut x = (lo + hi) * T::of(0.5);
    for _ in 0..8 {
        let fx = d(x);
        let fpx = dprime(x);
        if fpx == T::zero() {
            break;
        }
        let next = x - fx / fpx;
        if next > lo && next < hi {
            x = next;
        }
        if fx.abs() <= T::of(1e-14) {
            break;
        }
    }
    Ok(x)
}

/// Assembles a `(τ, α, β, γ)` configuration from the certified bound.
///
/// * `τ < 2`: `α = safety·ᾱ`;
/// * `τ ≥ 2`: `α` interpolated inside the admissible interval,
///   `α = mid + (safety−1)·half_width` (the midpoint at `safety = 1`);
/// * `β = 1/ρ_p` when `ρ_p > 0`, else `∞`;
/// * `L_f + L_h = 0`: `α = ∞` and `γ = β`.
pub fn make_step_config<T: Scalar>(
    params: &CurvatureParams<T>,
    tau: T,
    safety: T,
) -> Result<StepConfig<T>, StepsizeError> {
    if !(safety > T::zero() && safety <= T::one()) {
        return Err(StepsizeError::BadSafety(safety.as_f64()));
    }
    let bound = compute_alpha_bar(params, tau)?;
    let beta = if params.rho_p > T::zero() { T::one() / params.rho_p } else { T::infinity() };
    let alpha = match bound.regime {
        Regime::SmoothFree => {
            if beta.is_infinite() {
                return Err(StepsizeError::InvalidConfig(
                    "L_f + L_h = 0 with rho_p = 0 leaves every stepsize infinite; \
                     supply a problem with rho_p > 0 or a finite manual config",
                ));
            }
            T::infinity()
        }
        Regime::HighTauInterval => {
            let (lo, hi) = bound.interval.expect("interval regime carries an interval");
            let mid = (lo + hi) * T::of(0.5);
            let half = (hi - lo) * T::of(0.5);
            mid + (safety - T::one()) * half
        }
        _ => safety * bound.alpha_bar,
    };
    StepConfig::new(tau, alpha, beta)
}
