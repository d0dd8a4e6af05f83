//! Cardinality-penalized least squares via the Ky Fan k-norm.
//!
//! `‖x‖₀ ≤ k` is relaxed to the exact penalty `‖x‖₁ − ‖x‖_(k)` where
//! `‖x‖_(k)` sums the k largest absolute entries; the `−‖x‖_(k)` part is
//! the weakly concave term `p`.  Constants: `L_f = ‖AᵀA‖₂`,
//! `σ_f = λ_min(AᵀA)`, `L_h = σ_h = λ₁`, `ρ_f = ρ_h = ρ_p = 0`.

use std::sync::{Arc, RwLock};

use crate::linalg::{
    min_eigenvalue_sym, solve_spd, spectral_norm_sym, top_k_indices, Cholesky, LinalgError, Mat,
};
use crate::problem::{
    blocks::{L1Norm, ScaledSqNorm},
    CurvatureParams, OracleError, ParamsError, ProblemSpec, Smooth, SmoothProx, WeaklyConcave,
};
use crate::scalar::Scalar;

/// The cardinality budget used in the experiments: `⌊n/10⌋`, at least 1.
pub fn default_k(n: usize) -> usize {
    (n / 10).max(1)
}

/// Solves `(I + αAᵀA)x = z + αAᵀb` with a fresh factorization; the
/// problem oracle caches the factorization per `α` instead.
pub fn prox_least_squares<T: Scalar>(
    z: &[T],
    alpha: T,
    ata: &Mat<T>,
    atb: &[T],
) -> Result<Vec<T>, LinalgError> {
    let n = z.len();
    let mut s = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = alpha * ata[(i, j)];
        }
        s[(i, i)] += T::one();
    }
    let rhs: Vec<T> = (0..n).map(|i| z[i] + alpha * atb[i]).collect();
    solve_spd(&s, &rhs)
}

/// Deterministic selector for `∂(−λ₂‖·‖_(k))`: `−λ₂·sign(yᵢ)` on the
/// top-k magnitude indices (lowest-index tie-break, `sign(0) = +1`),
/// zero elsewhere.
pub fn subgrad_kyfan_negative<T: Scalar>(
    y: &[T],
    k: usize,
    lambda2: T,
) -> Result<Vec<T>, LinalgError> {
    let idx = top_k_indices(y, k)?;
    let mut out = vec![T::zero(); y.len()];
    for i in idx {
        let sign = if y[i] >= T::zero() { T::one() } else { -T::one() };
        out[i] = -lambda2 * sign;
    }
    Ok(out)
}

struct LeastSquares<T> {
    ata: Mat<T>,
    atb: Vec<T>,
    btb: T,
    // factorizations of (I + αAᵀA), keyed by α
    cache: RwLock<Vec<(T, Arc<Cholesky<T>>)>>,
}

impl<T: Scalar> LeastSquares<T> {
    fn factor_for(&self, alpha: T) -> Result<Arc<Cholesky<T>>, LinalgError> {
        if let Some(hit) = self
            .cache
            .read()
            .expect("cache lock")
            .iter()
            .find(|(a, _)| *a == alpha)
            .map(|(_, c)| Arc::clone(c))
        {
            return Ok(hit);
        }
        let n = self.ata.rows();
        let mut s = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] = alpha * self.ata[(i, j)];
            }
            s[(i, i)] += T::one();
        }
        let chol = Arc::new(Cholesky::new(&s)?);
        let mut cache = self.cache.write().expect("cache lock");
        if !cache.iter().any(|(a, _)| *a == alpha) {
            cache.push((alpha, Arc::clone(&chol)));
        }
        Ok(chol)
    }
}

impl<T: Scalar> Smooth<T> for LeastSquares<T> {
    fn value(&self, x: &[T]) -> T {
        // ½‖Ax−b‖² = ½xᵀAᵀAx − ⟨Aᵀb, x⟩ + ½‖b‖²
        let ax = self.ata.matvec(x);
        let quad = crate::linalg::dot(x, &ax);
        let lin = crate::linalg::dot(&self.atb, x);
        T::of(0.5) * quad - lin + T::of(0.5) * self.btb
    }
    fn grad(&self, x: &[T]) -> Vec<T> {
        let ax = self.ata.matvec(x);
        (0..x.len()).map(|i| ax[i] - self.atb[i]).collect()
    }
}

impl<T: Scalar> SmoothProx<T> for LeastSquares<T> {
    fn prox(&self, z: &[T], step: T) -> Result<Vec<T>, OracleError> {
        if step.is_finite() {
            let chol = self.factor_for(step)?;
            let rhs: Vec<T> = (0..z.len()).map(|i| z[i] + step * self.atb[i]).collect();
            Ok(chol.solve(&rhs))
        } else {
            // global minimizer of ½‖Ax−b‖², defined when AᵀA is PD
            Ok(Cholesky::new(&self.ata)?.solve(&self.atb))
        }
    }
}

struct KyFanNegative<T> {
    k: usize,
    weight: T,
}

impl<T: Scalar> WeaklyConcave<T> for KyFanNegative<T> {
    fn value(&self, y: &[T]) -> T {
        match top_k_indices(y, self.k) {
            Ok(idx) => {
                let top = idx.iter().fold(T::zero(), |acc, &i| acc + y[i].abs());
                -self.weight * top
            }
            Err(_) => T::nan(),
        }
    }
    fn subgrad(&self, y: &[T]) -> Vec<T> {
        subgrad_kyfan_negative(y, self.k, self.weight)
            .unwrap_or_else(|_| vec![T::nan(); y.len()])
    }
}

/// Assembles the problem from a design matrix and targets.
///
/// `‖AᵀA‖₂` and `λ_min(AᵀA)` are estimated at construction by
/// power/inverse-power iteration to 1e-8 relative tolerance.
pub fn kyfan_spec<T: Scalar>(
    a: &Mat<T>,
    b: &[T],
    lambda1: T,
    lambda2: T,
    k: usize,
) -> Result<ProblemSpec<T>, ParamsError> {
    assert_eq!(b.len(), a.rows(), "one target per row");
    let n = a.cols();
    assert!(k >= 1 && k <= n, "cardinality budget must lie in [1, n]");
    let ata = a.transpose().matmul(a).expect("shape checked");
    let atb = a.matvec_t(b);
    let btb = crate::linalg::dot(b, b);
    let lf = spectral_norm_sym(&ata);
    let sigma_f = min_eigenvalue_sym(&ata).min(lf);
    let params = CurvatureParams::convex_smooth(lf, lambda1)
        .with_sigma_f(sigma_f)
        .with_sigma_h(lambda1);
    ProblemSpec::from_parts(
        n,
        params,
        Arc::new(LeastSquares { ata, atb, btb, cache: RwLock::new(Vec::new()) }),
        Arc::new(L1Norm { weight: lambda2 }),
        Arc::new(ScaledSqNorm::new(lambda1)),
        Arc::new(KyFanNegative { k, weight: lambda2 }),
        false,
    )
}
