//! Minimal dense linear algebra for the proximal kernels.
//!
//! Everything here targets desk-scale problems (matrices up to a few
//! hundred rows/columns), favouring robustness over speed: the SVD is
//! one-sided Jacobi, SPD systems go through Cholesky.

use thiserror::Error;

use crate::scalar::Scalar;

/// Errors from the dense kernels.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("SVD did not converge after {sweeps} Jacobi sweeps")]
    SvdNoConvergence { sweeps: usize },
    #[error("matrix is not symmetric positive definite (pivot {pivot})")]
    NotSpd { pivot: usize },
    #[error("matrix is not symmetric (entry ({0},{1}))")]
    NotSymmetric(usize, usize),
    #[error("argument out of range: {0}")]
    Argument(String),
}

// ── vectors ─────────────────────────────────────────────────────────

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

/// `out = a + s * b`
pub fn axpy<T: Scalar>(a: &[T], s: T, b: &[T]) -> Vec<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
}

// ── dense matrices ──────────────────────────────────────────────────

/// Dense matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    /// Builds a matrix from row-major entries, checking shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{}x{} needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.cols);
        let mut out = vec![T::zero(); self.rows];
        for i in 0..self.rows {
            out[i] = dot(&self.data[i * self.cols..(i + 1) * self.cols], v);
        }
        out
    }

    /// `Aᵀ v`
    pub fn matvec_t(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            let s = v[i];
            for j in 0..self.cols {
                out[j] += self[(i, j)] * s;
            }
        }
        out
    }

    pub fn frob_norm(&self) -> T {
        norm2(&self.data)
    }

    fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl<T: Scalar> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

// ── singular value decomposition ────────────────────────────────────

/// Thin SVD `A = U Σ Vᵀ` with `Σ` nonincreasing and `U`, `V` having
/// orthonormal columns.
#[derive(Debug, Clone)]
pub struct SvdFactors<T> {
    pub u: Mat<T>,
    pub sigma: Vec<T>,
    pub v: Mat<T>,
}

impl<T: Scalar> SvdFactors<T> {
    /// `‖UΣVᵀ − A‖_F`, the reconstruction error against `a`.
    pub fn reconstruction_error(&self, a: &Mat<T>) -> T {
        let k = self.sigma.len();
        let mut err = T::zero();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let mut s = T::zero();
                for l in 0..k {
                    s += self.u[(i, l)] * self.sigma[l] * self.v[(j, l)];
                }
                let d = s - a[(i, j)];
                err += d * d;
            }
        }
        err.sqrt()
    }
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// One-sided Jacobi SVD.
///
/// Rotates column pairs of `A` until they are mutually orthogonal; the
/// column norms are the singular values.  Columns belonging to zero
/// singular values are completed to an orthonormal basis so `U` always
/// has orthonormal columns.
pub fn svd<T: Scalar>(a: &Mat<T>) -> Result<SvdFactors<T>, LinalgError> {
    svd_warm(a, None)
}

/// [`svd`] with an optional warm-start basis: an orthonormal matrix
/// close to the right singular vectors (of `A` when `rows ≥ cols`, of
/// `Aᵀ` otherwise — i.e. the factor a previous call on a nearby matrix
/// returned in that slot).  The sweep then starts from nearly
/// orthogonal columns and converges in a couple of passes.  Any
/// orthonormal seed yields the same factorization up to roundoff.
pub fn svd_warm<T: Scalar>(a: &Mat<T>, warm: Option<&Mat<T>>) -> Result<SvdFactors<T>, LinalgError> {
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    if a.rows() >= a.cols() {
        svd_tall(a, warm)
    } else {
        let f = svd_tall(&a.transpose(), warm)?;
        Ok(SvdFactors { u: f.v, sigma: f.sigma, v: f.u })
    }
}

/// Applies the rotation `(x, y) ← (c·x − s·y, s·x + c·y)` to two
/// contiguous columns.
#[inline]
fn rotate_pair<T: Scalar>(x: &mut [T], y: &mut [T], c: T, s: T) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Dot product with independent accumulators so the reduction is not
/// latency-bound (this is the inner loop of the Jacobi sweep).
#[inline]
fn dot_unrolled<T: Scalar>(x: &[T], y: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let chunks = x.len() / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += x[j] * y[j];
        acc[1] += x[j + 1] * y[j + 1];
        acc[2] += x[j + 2] * y[j + 2];
        acc[3] += x[j + 3] * y[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in 4 * chunks..x.len() {
        s += x[j] * y[j];
    }
    s
}

fn svd_tall<T: Scalar>(a: &Mat<T>, warm: Option<&Mat<T>>) -> Result<SvdFactors<T>, LinalgError> {
    let (m, n) = (a.rows(), a.cols());
    // Contiguous column storage keeps the pair sweeps cache-friendly.
    let usable_warm = warm.filter(|w| w.rows() == n && w.cols() == n);
    let (mut b, mut v): (Vec<Vec<T>>, Vec<Vec<T>>) = match usable_warm {
        Some(w) => {
            // B = A·W, V = W: rotations refine the warm basis.
            let b = (0..n).map(|j| a.matvec(&w.col(j))).collect();
            let v = (0..n).map(|j| w.col(j)).collect();
            (b, v)
        }
        None => {
            let b = (0..n).map(|j| a.col(j)).collect();
            let v = (0..n)
                .map(|j| {
                    let mut e = vec![T::zero(); n];
                    e[j] = T::one();
                    e
                })
                .collect();
            (b, v)
        }
    };
    let tol = T::epsilon() * T::of(64.0);

    let mut converged = false;
    // Column norms² are cached per sweep and kept current through the
    // closed-form rotation updates; the exact norms are recomputed for
    // the final singular values.
    let mut d = vec![T::zero(); n];
    let dim_scale = T::of(m.max(n) as f64);
    for _ in 0..MAX_JACOBI_SWEEPS {
        for j in 0..n {
            d[j] = dot_unrolled(&b[j], &b[j]);
        }
        // Columns at roundoff level below the largest are numerically
        // zero: they are zeroed and basis-completed after the sweeps,
        // and rotating them against noise would never settle.
        let d_max = d.iter().fold(T::zero(), |a, &x| a.max(x));
        let zeta_eps = T::epsilon() * dim_scale;
        let floor = d_max * zeta_eps * zeta_eps;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                if d[p] <= floor || d[q] <= floor {
                    continue;
                }
                let (lo, hi) = b.split_at_mut(q);
                let bp = &mut lo[p];
                let bq = &mut hi[0];
                let apq = dot_unrolled(bp, bq);
                if apq * apq <= tol * tol * d[p] * d[q] {
                    continue;
                }
                rotated = true;
                let zeta = (d[q] - d[p]) / (T::of(2.0) * apq);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_pair(bp, bq, c, s);
                let (vlo, vhi) = v.split_at_mut(q);
                rotate_pair(&mut vlo[p], &mut vhi[0], c, s);
                // the rotation zeroes the (p,q) coupling exactly
                d[p] = d[p] - t * apq;
                d[q] = d[q] + t * apq;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::SvdNoConvergence { sweeps: MAX_JACOBI_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<T> = (0..n).map(|j| dot_unrolled(&b[j], &b[j]).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let sigma: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let sigma_max = sigma.first().copied().unwrap_or_else(T::zero);
    let tiny = sigma_max * T::epsilon() * T::of((m.max(n)) as f64);

    let mut u = Mat::<T>::zeros(m, n);
    let mut vs = Mat::<T>::zeros(n, n);
    for (col, &j) in order.iter().enumerate() {
        for i in 0..n {
            vs[(i, col)] = v[j][i];
        }
        if sigma[col] > tiny {
            let inv = T::one() / sigma[col];
            for i in 0..m {
                u[(i, col)] = b[j][i] * inv;
            }
        }
    }
    // Replace numerically-zero columns with an orthonormal completion so
    // UᵀU = I even for rank-deficient inputs.
    let rank = sigma.iter().take_while(|&&s| s > tiny).count();
    let mut sigma = sigma;
    for s in sigma.iter_mut().skip(rank) {
        *s = T::zero();
    }
    if rank < n {
        complete_basis(&mut u, rank)?;
    }
    Ok(SvdFactors { u, sigma, v: vs })
}

/// Fills columns `from..` of `u` with unit vectors orthogonal to all
/// earlier columns: greedily picks the standard basis vector with the
/// largest residual against the current span, with a second
/// Gram–Schmidt pass for orthogonality at roundoff level.
fn complete_basis<T: Scalar>(u: &mut Mat<T>, from: usize) -> Result<(), LinalgError> {
    let (m, n) = (u.rows(), u.cols());
    for slot in from..n {
        // residual norm of e_i is 1 − Σ_c u[i,c]² for orthonormal columns
        let mut best_e = 0;
        let mut best_res = -T::one();
        for e in 0..m {
            let overlap = (0..slot).fold(T::zero(), |acc, c| acc + u[(e, c)] * u[(e, c)]);
            let res = T::one() - overlap;
            if res > best_res {
                best_res = res;
                best_e = e;
            }
        }
        let mut w = vec![T::zero(); m];
        w[best_e] = T::one();
        for _ in 0..2 {
            for c in 0..slot {
                let proj = (0..m).fold(T::zero(), |acc, i| acc + u[(i, c)] * w[i]);
                for i in 0..m {
                    w[i] = w[i] - proj * u[(i, c)];
                }
            }
        }
        let nw = norm2(&w);
        if nw <= T::of(1e-6) {
            return Err(LinalgError::Shape("could not complete orthonormal basis".into()));
        }
        let inv = T::one() / nw;
        for i in 0..m {
            u[(i, slot)] = w[i] * inv;
        }
    }
    Ok(())
}

// ── SPD solves ──────────────────────────────────────────────────────

/// Cholesky factor `L` with `S = L Lᵀ`, reusable across solves.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Mat<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn new(s: &Mat<T>) -> Result<Self, LinalgError> {
        let n = s.rows();
        if s.cols() != n {
            return Err(LinalgError::Shape(format!("{}x{} is not square", s.rows(), s.cols())));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (s[(i, j)] - s[(j, i)]).abs();
                let scale = T::one() + s[(i, j)].abs() + s[(j, i)].abs();
                if d > T::of(1e-8) * scale {
                    return Err(LinalgError::NotSymmetric(i, j));
                }
            }
        }
        let mut l = Mat::<T>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = s[(i, j)];
                for k in 0..j {
                    sum -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if sum <= T::zero() || !sum.is_finite() {
                        return Err(LinalgError::NotSpd { pivot: i });
                    }
                    l[(i, j)] = sum.sqrt();
                } else {
                    l[(i, j)] = sum / l[(j, j)];
                }
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.rows();
        debug_assert_eq!(b.len(), n);
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= self.l[(i, k)] * y[k];
            }
            y[i] = sum / self.l[(i, i)];
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in (i + 1)..n {
                sum -= self.l[(k, i)] * x[k];
            }
            x[i] = sum / self.l[(i, i)];
        }
        x
    }
}

/// Solves `S x = b` for symmetric positive-definite `S`.
pub fn solve_spd<T: Scalar>(s: &Mat<T>, b: &[T]) -> Result<Vec<T>, LinalgError> {
    if b.len() != s.rows() {
        return Err(LinalgError::Shape(format!(
            "rhs length {} vs {} rows",
            b.len(),
            s.rows()
        )));
    }
    Ok(Cholesky::new(s)?.solve(b))
}

// ── top-k selection ─────────────────────────────────────────────────

/// Indices of the `k` entries of largest absolute value, ties broken by
/// lowest index; returned sorted ascending.
pub fn top_k_indices<T: Scalar>(v: &[T], k: usize) -> Result<Vec<usize>, LinalgError> {
    if k == 0 || k > v.len() {
        return Err(LinalgError::Argument(format!("k = {} with length {}", k, v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].abs().partial_cmp(&v[i].abs()).unwrap().then(i.cmp(&j)));
    let mut out = idx[..k].to_vec();
    out.sort_unstable();
    Ok(out)
}

// ── eigenvalue extremes (for problem constructors) ──────────────────

/// Largest eigenvalue of a symmetric PSD matrix by power iteration,
/// to 1e-8 relative tolerance.
pub fn spectral_norm_sym<T: Scalar>(s: &Mat<T>) -> T {
    let n = s.rows();
    if n == 0 {
        return T::zero();
    }
    // Fixed pseudo-random start so the estimate is deterministic and not
    // orthogonal to the leading eigenvector for structured matrices.
    let mut v: Vec<T> = (0..n)
        .map(|i| T::of(0.5 + ((i * 2654435761 + 1013904223) % 1000) as f64 / 1000.0))
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x = *x / nv);
    let mut lambda = T::zero();
    for _ in 0..100_000 {
        let w = s.matvec(&v);
        let nw = norm2(&w);
        if nw == T::zero() {
            return T::zero();
        }
        let next = dot(&v, &w);
        v = w.iter().map(|&x| x / nw).collect();
        if (next - lambda).abs() <= T::of(1e-8) * (T::one() + next.abs()) {
            return next.max(T::zero());
        }
        lambda = next;
    }
    lambda.max(T::zero())
}

/// Smallest eigenvalue of a symmetric PSD matrix by inverse power
/// iteration; returns 0 when the matrix is not positive definite.
pub fn min_eigenvalue_sym<T: Scalar>(s: &Mat<T>) -> T {
    let n = s.rows();
    if n == 0 {
        return T::zero();
    }
    let chol = match Cholesky::new(s) {
        Ok(c) => c,
        Err(_) => return T::zero(),
    };
    let mut v: Vec<T> = (0..n)
        .map(|i| T::of(1.0 - ((i * 40503 + 12345) % 997) as f64 / 1994.0))
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x = *x / nv);
    let mut lambda = T::zero();
    for _ in 0..100_000 {
        let w = chol.solve(&v);
        let nw = norm2(&w);
        if nw == T::zero() {
            return T::zero();
        }
        let v_next: Vec<T> = w.iter().map(|&x| x / nw).collect();
        let next = dot(&v_next, &s.matvec(&v_next));
        v = v_next;
        if (next - lambda).abs() <= T::of(1e-8) * (T::one() + next.abs()) {
            return next.max(T::zero());
        }
        lambda = next;
    }
    lambda.max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn svd_identity() {
        let a = Mat::<f64>::identity(2);
        let f = svd(&a).unwrap();
        assert_close(f.sigma[0], 1.0, 1e-12);
        assert_close(f.sigma[1], 1.0, 1e-12);
    }

    #[test]
    fn svd_diagonal() {
        let a = Mat::new(2, 2, vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let f = svd(&a).unwrap();
        assert_close(f.sigma[0], 3.0, 1e-12);
        assert_close(f.sigma[1], 1.0, 1e-12);
        // U and V are signed permutations of the identity here.
        for j in 0..2 {
            assert_close(f.u[(j, j)].abs(), 1.0, 1e-12);
            assert_close(f.v[(j, j)].abs(), 1.0, 1e-12);
        }
    }

    fn check_factors(a: &Mat<f64>) {
        let f = svd(a).unwrap();
        let tol = 1e-10 * (1.0 + a.frob_norm());
        assert!(f.reconstruction_error(a) <= tol);
        for w in f.sigma.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(f.sigma.iter().all(|&s| s >= 0.0));
        let k = f.sigma.len();
        for c1 in 0..k {
            for c2 in 0..k {
                let want = if c1 == c2 { 1.0 } else { 0.0 };
                let du: f64 = (0..a.rows()).map(|i| f.u[(i, c1)] * f.u[(i, c2)]).sum();
                let dv: f64 = (0..a.cols()).map(|i| f.v[(i, c1)] * f.v[(i, c2)]).sum();
                assert_close(du, want, 1e-10);
                assert_close(dv, want, 1e-10);
            }
        }
    }

    #[test]
    fn svd_random_shapes() {
        // LCG-generated deterministic "random" matrices of several shapes,
        // including wide and rank-deficient ones.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for &(m, n) in &[(5usize, 3usize), (3, 5), (20, 7), (16, 16), (40, 11)] {
            let a = Mat::from_fn(m, n, |_, _| next());
            check_factors(&a);
        }
        // rank-1 and zero matrices exercise the basis completion
        let u: Vec<f64> = (0..5).map(|i| (i as f64 + 1.0) / 10.0).collect();
        let v: Vec<f64> = (0..4).map(|i| (i as f64 - 1.5) / 3.0).collect();
        let rank1 = Mat::from_fn(5, 4, |i, j| 5.0 * u[i] * v[j]);
        check_factors(&rank1);
        check_factors(&Mat::<f64>::zeros(4, 3));
    }

    #[test]
    fn svd_warm_start_on_low_rank_sequence() {
        // Alternating near-low-rank matrices factored with the previous
        // call's right factor as the seed: exercises the numerically-zero
        // column skip that keeps warm-started sweeps from cycling.
        let mut state = 41u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let (m, n, r) = (30usize, 24usize, 3usize);
        let u0 = Mat::from_fn(m, r, |_, _| next());
        let v0 = Mat::from_fn(r, n, |_, _| next());
        let base = u0.matmul(&v0).unwrap();
        let mut warm: Option<Mat<f64>> = None;
        for step in 0..6 {
            // exactly low rank on even steps, tiny dense perturbation on odd
            let noise = if step % 2 == 1 { 1e-13 } else { 0.0 };
            let a = Mat::from_fn(m, n, |i, j| base[(i, j)] + noise * next());
            let f = svd_warm(&a, warm.as_ref()).unwrap();
            assert!(f.reconstruction_error(&a) <= 1e-10 * (1.0 + a.frob_norm()));
            for c1 in 0..n {
                for c2 in 0..n {
                    let want = if c1 == c2 { 1.0 } else { 0.0 };
                    let du: f64 = (0..m).map(|i| f.u[(i, c1)] * f.u[(i, c2)]).sum();
                    assert!((du - want).abs() <= 1e-10, "UᵀU at ({c1},{c2})");
                }
            }
            warm = Some(f.v);
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let a = Mat { rows: 1, cols: 2, data: vec![1.0, f64::NAN] };
        assert!(matches!(svd(&a), Err(LinalgError::NonFinite)));
    }

    #[test]
    fn solve_spd_examples() {
        let s = Mat::<f64>::identity(2);
        assert_eq!(solve_spd(&s, &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);

        let s = Mat::new(2, 2, vec![2.0, 0.0, 0.0, 4.0]).unwrap();
        let x = solve_spd(&s, &[2.0, 4.0]).unwrap();
        assert_close(x[0], 1.0, 1e-12);
        assert_close(x[1], 1.0, 1e-12);

        let s = Mat::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let x = solve_spd(&s, &[3.0, 3.0]).unwrap();
        let back = s.matvec(&x);
        assert_close(back[0], 3.0, 1e-12);
        assert_close(back[1], 3.0, 1e-12);
        assert_close(x[0], 1.0, 1e-12);
        assert_close(x[1], 1.0, 1e-12);
    }

    #[test]
    fn solve_spd_rejects_indefinite() {
        let s = Mat::new(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(solve_spd(&s, &[1.0, 1.0]), Err(LinalgError::NotSpd { .. })));
    }

    #[test]
    fn solve_spd_roundtrip_random() {
        let mut state = 7u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for n in [3usize, 8, 17] {
            let b = Mat::from_fn(n, n, |_, _| next());
            // S = BᵀB + I is SPD
            let mut s = b.transpose().matmul(&b).unwrap();
            for i in 0..n {
                s[(i, i)] += 1.0;
            }
            let rhs: Vec<f64> = (0..n).map(|i| i as f64 - 1.0).collect();
            let x = solve_spd(&s, &rhs).unwrap();
            let back = s.matvec(&x);
            let err = dist2(&back, &rhs);
            assert!(err <= 1e-10 * (1.0 + norm2(&rhs)));
        }
    }

    #[test]
    fn top_k_examples() {
        assert_eq!(top_k_indices(&[3.0, -1.0, 2.0], 2).unwrap(), vec![0, 2]);
        assert_eq!(top_k_indices(&[1.0, 1.0, 1.0], 1).unwrap(), vec![0]);
        assert_eq!(top_k_indices(&[1.0, -5.0, 2.0], 3).unwrap(), vec![0, 1, 2]);
        assert!(top_k_indices(&[1.0, 2.0], 0).is_err());
        assert!(top_k_indices(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn eigen_extremes() {
        let s = Mat::new(2, 2, vec![2.0, 0.0, 0.0, 0.5]).unwrap();
        assert_close(spectral_norm_sym(&s), 2.0, 1e-7);
        assert_close(min_eigenvalue_sym(&s), 0.5, 1e-7);
        // singular matrix -> min eigenvalue reported as 0
        let s = Mat::new(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(min_eigenvalue_sym(&s), 0.0);
    }

    proptest! {
        #[test]
        fn top_k_matches_sort_oracle(v in prop::collection::vec(-100.0f64..100.0, 1..40), k in 1usize..40) {
            prop_assume!(k <= v.len());
            let got = top_k_indices(&v, k).unwrap();
            // brute-force oracle: stable sort by |v| descending
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&i, &j| v[j].abs().partial_cmp(&v[i].abs()).unwrap().then(i.cmp(&j)));
            let mut want = idx[..k].to_vec();
            want.sort_unstable();
            prop_assert_eq!(&got, &want);
            // determinism
            prop_assert_eq!(got, top_k_indices(&v, k).unwrap());
        }
    }
}
