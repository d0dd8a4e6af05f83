//! Named algorithm presets: baseline methods realized as special
//! parameterizations of the splitting iteration.
//!
//! * `DYS` — three-operator splitting: requires `p ≡ 0`; `τ = 1`,
//!   `β = ∞`, `α` from the certified bound (or the smaller comparison
//!   bound, for stepsize studies);
//! * `PG` — proximal gradient: folds `f` into `h` (so the x-step is
//!   inert) and requires `p ≡ 0`; fixed `γ = safety/(L_f+L_h)`;
//! * `PDC`/`GPP` — proximal difference-of-convex a.k.a. generalized
//!   proximal point: folds `f` into `h`, keeps `p`;
//!   `γ = safety·ᾱ(f′≡0)`, which reduces to `safety/(L_f+L_h)`;
//! * `FOUR_SPLIT` — the full iteration at a chosen `τ`.
//!
//! Rewiring recomputes curvature constants mechanically
//! (`L_h′ = L_f + L_h`, `σ_h′ = σ_f + σ_h`, …); the original spec is
//! untouched and shared oracles are reused.

use std::sync::Arc;

use thiserror::Error;

use crate::problem::{
    blocks::{SumSmooth, ZeroSmooth},
    CurvatureParams, ParamsError, ProblemSpec,
};
use crate::scalar::Scalar;
use crate::stepsize::{bian_zhang_alpha, make_step_config, StepConfig, StepsizeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    Dys,
    Pg,
    Pdc,
    Gpp,
    FourSplit,
}

impl std::fmt::Display for PresetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PresetName::Dys => "DYS",
            PresetName::Pg => "PG",
            PresetName::Pdc => "PDC",
            PresetName::Gpp => "GPP",
            PresetName::FourSplit => "FOUR_SPLIT",
        };
        f.write_str(s)
    }
}

/// How a preset picks its stepsize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepsizePolicy<T> {
    /// `safety × ᾱ` from the certified bound at the preset's `τ`.
    CertifiedBound { safety: T },
    /// `safety ×` the comparison (three-operator) bound.
    BianZhang { safety: T },
    /// A fixed `γ` (= `α` when `β = ∞`).
    Fixed(T),
}

/// How a preset reshapes the problem before running.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rewiring {
    Identity,
    /// `f′ ≡ 0`, `h′ = f + h` (the prox-capable structure of `f` is
    /// deliberately ignored).
    FoldFIntoH,
    /// `p′ ≡ 0` (drops the weakly concave term).
    DropP,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset<T> {
    pub name: PresetName,
    pub tau: T,
    pub policy: StepsizePolicy<T>,
    pub rewiring: Rewiring,
}

impl<T: Scalar> Preset<T> {
    pub fn dys(safety: T) -> Self {
        Self {
            name: PresetName::Dys,
            tau: T::one(),
            policy: StepsizePolicy::CertifiedBound { safety },
            rewiring: Rewiring::Identity,
        }
    }

    /// DYS driven by the smaller comparison bound instead of ours.
    pub fn dys_bian_zhang(safety: T) -> Self {
        Self { policy: StepsizePolicy::BianZhang { safety }, ..Self::dys(safety) }
    }

    pub fn pg(safety: T) -> Self {
        Self {
            name: PresetName::Pg,
            tau: T::one(),
            policy: StepsizePolicy::CertifiedBound { safety },
            rewiring: Rewiring::FoldFIntoH,
        }
    }

    pub fn pdc(safety: T) -> Self {
        Self {
            name: PresetName::Pdc,
            tau: T::one(),
            policy: StepsizePolicy::CertifiedBound { safety },
            rewiring: Rewiring::FoldFIntoH,
        }
    }

    /// Same iteration as [`Preset::pdc`]; the name applies when `g` is
    /// not convex.
    pub fn gpp(safety: T) -> Self {
        Self { name: PresetName::Gpp, ..Self::pdc(safety) }
    }

    pub fn four_split(tau: T, safety: T) -> Self {
        Self {
            name: PresetName::FourSplit,
            tau,
            policy: StepsizePolicy::CertifiedBound { safety },
            rewiring: Rewiring::Identity,
        }
    }
}

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("{preset} is not applicable: {reason}")]
    Inapplicable { preset: &'static str, reason: &'static str },
    #[error(transparent)]
    Stepsize(#[from] StepsizeError),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// Rewires the problem per the preset and derives its `StepConfig`.
/// The returned spec shares the original oracles.
pub fn instantiate<T: Scalar>(
    preset: &Preset<T>,
    spec: &ProblemSpec<T>,
) -> Result<(ProblemSpec<T>, StepConfig<T>), PresetError> {
    let requires_zero_p = matches!(preset.name, PresetName::Dys | PresetName::Pg);
    let effective_p_zero = spec.p_is_zero() || preset.rewiring == Rewiring::DropP;
    if requires_zero_p && !effective_p_zero {
        return Err(PresetError::Inapplicable {
            preset: match preset.name {
                PresetName::Dys => "DYS",
                _ => "PG",
            },
            reason: "requires p = 0 in the (possibly rewired) problem",
        });
    }

    let rewired = match preset.rewiring {
        Rewiring::Identity => spec.clone(),
        Rewiring::FoldFIntoH => {
            let p0 = spec.params();
            let params = CurvatureParams {
                lf: T::zero(),
                lh: p0.lf + p0.lh,
                rho_f: T::zero(),
                rho_h: (p0.rho_f + p0.rho_h).min(p0.lf + p0.lh),
                rho_p: p0.rho_p,
                sigma_f: T::zero(),
                sigma_h: p0.sigma_f + p0.sigma_h,
            };
            let folded = SumSmooth { a: spec.f_arc(), b: spec.h_arc() };
            spec.rewired(params, Arc::new(ZeroSmooth), Arc::new(folded), spec.p_arc(), spec.p_is_zero())?
        }
        Rewiring::DropP => {
            let mut params = *spec.params();
            params.rho_p = T::zero();
            spec.rewired(params, spec.f_arc(), spec.h_arc(), Arc::new(ZeroSmooth), true)?
        }
    };

    let cfg = match preset.policy {
        StepsizePolicy::CertifiedBound { safety } => {
            make_step_config(rewired.params(), preset.tau, safety)?
        }
        StepsizePolicy::BianZhang { safety } => {
            let alpha = safety * bian_zhang_alpha(rewired.params())?;
            let beta = if rewired.params().rho_p > T::zero() {
                T::one() / rewired.params().rho_p
            } else {
                T::infinity()
            };
            StepConfig::new(preset.tau, alpha, beta)?
        }
        StepsizePolicy::Fixed(gamma) => StepConfig::new(preset.tau, gamma, T::infinity())?,
    };
    Ok((rewired, cfg))
}
