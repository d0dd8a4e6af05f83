//! Built-in problem families and their proximal/subgradient kernels.
//!
//! * [`matrix_completion`] — nonnegative low-rank matrix completion
//!   `f = (λ₁/2)·dist²(·, ℝ₊) , g = λ₂‖·‖_* , h = ½‖P_Ω(·−M)‖²_F , p ≡ 0`;
//! * [`kyfan`] — cardinality-penalized least squares
//!   `f = ½‖Ax−b‖² , g = λ₂‖x‖₁ , h = (λ₁/2)‖x‖² , p = −λ₂‖x‖_(k)`;
//! * [`feasibility`] — set intersection via half-squared distances,
//!   with nonconvex sets carried by `p` (`ρ_p` = number of such sets).

pub mod feasibility;
pub mod kyfan;
pub mod matrix_completion;

pub use feasibility::{
    build_feasibility_spec, synthetic_feasibility, BallSet, BoxSet, BoxUnion, FeasibilityProblem,
    ProjectableSet, SetIndicator, SphereSet,
};
pub use kyfan::{default_k, kyfan_spec, prox_least_squares, subgrad_kyfan_negative};
pub use matrix_completion::{
    grad_masked_residual, matrix_completion_spec, prox_nonneg_deviation, prox_nuclear,
};

use crate::scalar::Scalar;

/// Entrywise soft-threshold `sign(vᵢ)·max(|vᵢ|−t, 0)`, the prox of
/// `t·‖·‖₁` at unit stepsize.
pub fn prox_l1<T: Scalar>(v: &[T], threshold: T) -> Vec<T> {
    v.iter()
        .map(|&x| {
            let m = x.abs() - threshold;
            if m > T::zero() {
                x.signum() * m
            } else {
                T::zero()
            }
        })
        .collect()
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_l1_examples() {
        assert_eq!(prox_l1(&[3.0, -0.5, 0.0], 1.0), vec![2.0, 0.0, 0.0]);
        assert_eq!(prox_l1(&[1.5, -2.0], 0.0), vec![1.5, -2.0]);
        assert_eq!(prox_l1(&[0.0, 0.0], 0.7), vec![0.0, 0.0]);
    }

    #[test]
    fn prox_l1_matches_grid_oracle() {
        for &(z, w, s) in &[(1.7, 1.0, 1.0), (-2.3, 0.5, 0.8), (0.4, 2.0, 0.25), (-0.05, 0.3, 1.5)] {
            let got = prox_l1(&[z], w * s)[0];
            let want = test_util::grid_prox(|x| w * x.abs(), z, s, -5.0, 5.0);
            assert!((got - want).abs() <= 1e-4, "z={z} w={w} s={s}: {got} vs {want}");
        }
    }
}
