//! Nonnegative low-rank matrix completion.
//!
//! Matrices live in the solver as row-major flattened vectors of length
//! `m·n`.  The term constants are `L_f = λ₁`, `L_h = 1`,
//! `ρ_f = ρ_h = ρ_p = σ_f = σ_h = 0`.

use std::sync::{Arc, RwLock};

use crate::data::CompletionInstance;
use crate::linalg::{svd, svd_warm, LinalgError, Mat, SvdFactors};
use crate::problem::{
    blocks::ZeroSmooth, CurvatureParams, OracleError, ParamsError, ProblemSpec, ProxPoint,
    Proximable, Smooth, SmoothProx,
};
use crate::scalar::Scalar;

/// Entrywise prox of `step·(λ₁/2)·dist²(·, ℝ₊)` with `a = step·λ₁`:
/// nonnegative entries pass through, negative ones shrink by `1/(1+a)`.
pub fn prox_nonneg_deviation<T: Scalar>(z: &[T], a: T) -> Vec<T> {
    z.iter().map(|&v| if v >= T::zero() { v } else { v / (T::one() + a) }).collect()
}

/// Singular value thresholding: `U·max(Σ−t, 0)·Vᵀ`.
pub fn prox_nuclear<T: Scalar>(z: &Mat<T>, threshold: T) -> Result<Mat<T>, LinalgError> {
    let f = svd(z)?;
    Ok(svt_from_factors(&f, z.rows(), z.cols(), threshold).0)
}

/// Thresholded reconstruction plus the nuclear norm of the result.
fn svt_from_factors<T: Scalar>(
    f: &SvdFactors<T>,
    rows: usize,
    cols: usize,
    threshold: T,
) -> (Mat<T>, T) {
    let thresholded: Vec<T> =
        f.sigma.iter().map(|&s| (s - threshold).max(T::zero())).collect();
    let nuclear = thresholded.iter().fold(T::zero(), |acc, &s| acc + s);
    let mut out = Mat::zeros(rows, cols);
    for (l, &s) in thresholded.iter().enumerate() {
        if s == T::zero() {
            continue;
        }
        for i in 0..rows {
            let us = f.u[(i, l)] * s;
            for j in 0..cols {
                out[(i, j)] += us * f.v[(j, l)];
            }
        }
    }
    (out, nuclear)
}

/// `P_Ω(X − M)`: the masked residual, which is also `∇h` with Lipschitz
/// constant 1.
pub fn grad_masked_residual<T: Scalar>(x: &[T], target: &[T], mask: &[bool]) -> Vec<T> {
    debug_assert_eq!(x.len(), target.len());
    debug_assert_eq!(x.len(), mask.len());
    (0..x.len()).map(|i| if mask[i] { x[i] - target[i] } else { T::zero() }).collect()
}

struct NonnegDeviation<T> {
    lambda1: T,
}

impl<T: Scalar> Smooth<T> for NonnegDeviation<T> {
    fn value(&self, x: &[T]) -> T {
        let s = x
            .iter()
            .fold(T::zero(), |acc, &v| if v < T::zero() { acc + v * v } else { acc });
        self.lambda1 * T::of(0.5) * s
    }
    fn grad(&self, x: &[T]) -> Vec<T> {
        x.iter().map(|&v| if v < T::zero() { self.lambda1 * v } else { T::zero() }).collect()
    }
}

impl<T: Scalar> SmoothProx<T> for NonnegDeviation<T> {
    fn prox(&self, z: &[T], step: T) -> Result<Vec<T>, OracleError> {
        if step.is_finite() {
            Ok(prox_nonneg_deviation(z, step * self.lambda1))
        } else {
            // minimizer set is the orthant; project as the selector
            Ok(z.iter().map(|&v| v.max(T::zero())).collect())
        }
    }
}

struct NuclearNorm<T> {
    rows: usize,
    cols: usize,
    weight: T,
    /// Right-factor of the last factorization, reused as a Jacobi
    /// warm start (consecutive solver iterates are nearby matrices).
    basis: RwLock<Option<Mat<T>>>,
}

impl<T: Scalar> NuclearNorm<T> {
    fn new(rows: usize, cols: usize, weight: T) -> Self {
        Self { rows, cols, weight, basis: RwLock::new(None) }
    }

    fn as_mat(&self, x: &[T]) -> Result<Mat<T>, LinalgError> {
        Mat::new(self.rows, self.cols, x.to_vec())
    }

    fn factor(&self, m: &Mat<T>) -> Result<SvdFactors<T>, LinalgError> {
        let warm = self.basis.read().expect("basis lock").clone();
        let f = svd_warm(m, warm.as_ref())?;
        let keep = if self.rows >= self.cols { f.v.clone() } else { f.u.clone() };
        *self.basis.write().expect("basis lock") = Some(keep);
        Ok(f)
    }
}

impl<T: Scalar> Proximable<T> for NuclearNorm<T> {
    fn value(&self, x: &[T]) -> T {
        match self.as_mat(x).and_then(|m| self.factor(&m)) {
            Ok(f) => self.weight * f.sigma.iter().fold(T::zero(), |acc, &s| acc + s),
            Err(_) => T::nan(),
        }
    }
    fn prox(&self, v: &[T], step: T) -> Result<ProxPoint<T>, OracleError> {
        let m = self.as_mat(v)?;
        let f = self.factor(&m)?;
        let (out, nuclear) = svt_from_factors(&f, self.rows, self.cols, step * self.weight);
        Ok(ProxPoint { point: out.into_vec(), value: self.weight * nuclear })
    }
}

struct MaskedResidual<T> {
    target: Vec<T>,
    mask: Vec<bool>,
}

impl<T: Scalar> Smooth<T> for MaskedResidual<T> {
    fn value(&self, x: &[T]) -> T {
        let mut s = T::zero();
        for i in 0..x.len() {
            if self.mask[i] {
                let d = x[i] - self.target[i];
                s += d * d;
            }
        }
        s * T::of(0.5)
    }
    fn grad(&self, x: &[T]) -> Vec<T> {
        grad_masked_residual(x, &self.target, &self.mask)
    }
}

/// Assembles the full problem from a generated instance and the term
/// weights (`λ₁` nonnegativity, `λ₂` nuclear norm).
pub fn matrix_completion_spec<T: Scalar>(
    instance: &CompletionInstance<T>,
    lambda1: T,
    lambda2: T,
) -> Result<ProblemSpec<T>, ParamsError> {
    let (rows, cols) = (instance.matrix.rows(), instance.matrix.cols());
    let mut mask = vec![false; rows * cols];
    for &(i, j) in &instance.omega {
        mask[i * cols + j] = true;
    }
    let params = CurvatureParams::convex_smooth(lambda1, T::one());
    ProblemSpec::from_parts(
        rows * cols,
        params,
        Arc::new(NonnegDeviation { lambda1 }),
        Arc::new(NuclearNorm::new(rows, cols, lambda2)),
        Arc::new(MaskedResidual { target: instance.matrix.as_slice().to_vec(), mask }),
        Arc::new(ZeroSmooth),
        true,
    )
}
