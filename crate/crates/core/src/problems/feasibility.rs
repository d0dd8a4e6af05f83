//! Set-intersection feasibility as a four-term problem.
//!
//! Find `x ∈ A ∩ B ∩ C ∩ D₁ ∩ … ∩ D_r` via
//!
//! ```text
//! f = ½d²_A ,  g = δ_B ,  h = ½d²_C ,  p = Σᵢ ½d²_{D_i}
//! ```
//!
//! with `A`, `C` convex and `B`, `D_i` arbitrary closed sets.  Constants:
//! `L_f = L_h = 1`, `ρ_f = ρ_h = σ_f = σ_h = 0`, `ρ_p = r` (each
//! half-squared distance to a set satisfies the weak-concavity model
//! with modulus 1).

use std::sync::Arc;

use crate::linalg::{dist2, norm2};
use crate::problem::{
    CurvatureParams, OracleError, ParamsError, ProblemSpec, ProxPoint, Proximable, Smooth,
    SmoothProx, WeaklyConcave,
};
use crate::scalar::Scalar;

/// A closed set given by a (deterministic) nearest-point selector.
pub trait ProjectableSet<T>: Send + Sync {
    fn project(&self, x: &[T]) -> Vec<T>;
}

/// Axis-aligned box `[lo, hi]ⁿ`.
pub struct BoxSet<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Scalar> BoxSet<T> {
    pub fn cube(dim: usize, lo: T, hi: T) -> Self {
        Self { lo: vec![lo; dim], hi: vec![hi; dim] }
    }
}

impl<T: Scalar> ProjectableSet<T> for BoxSet<T> {
    fn project(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| v.max(self.lo[i]).min(self.hi[i]))
            .collect()
    }
}

/// Euclidean ball.
pub struct BallSet<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> ProjectableSet<T> for BallSet<T> {
    fn project(&self, x: &[T]) -> Vec<T> {
        let d: Vec<T> = x.iter().zip(&self.center).map(|(&a, &c)| a - c).collect();
        let n = norm2(&d);
        if n <= self.radius {
            x.to_vec()
        } else {
            let s = self.radius / n;
            d.iter().zip(&self.center).map(|(&v, &c)| c + s * v).collect()
        }
    }
}

/// Sphere surface (nonconvex).  At the center the selector picks
/// `center + radius·e₀`.
pub struct SphereSet<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> ProjectableSet<T> for SphereSet<T> {
    fn project(&self, x: &[T]) -> Vec<T> {
        let d: Vec<T> = x.iter().zip(&self.center).map(|(&a, &c)| a - c).collect();
        let n = norm2(&d);
        if n == T::zero() {
            let mut out = self.center.clone();
            out[0] += self.radius;
            return out;
        }
        let s = self.radius / n;
        d.iter().zip(&self.center).map(|(&v, &c)| c + s * v).collect()
    }
}

/// Finite union of boxes (nonconvex); nearest box wins, ties to the
/// earliest box in the list.
pub struct BoxUnion<T> {
    pub boxes: Vec<BoxSet<T>>,
}

impl<T: Scalar> ProjectableSet<T> for BoxUnion<T> {
    fn project(&self, x: &[T]) -> Vec<T> {
        assert!(!self.boxes.is_empty(), "union of no boxes");
        let mut best: Option<(T, Vec<T>)> = None;
        for b in &self.boxes {
            let p = b.project(x);
            let d = dist2(x, &p);
            match &best {
                Some((bd, _)) if *bd <= d => {}
                _ => best = Some((d, p)),
            }
        }
        best.expect("nonempty union").1
    }
}

/// The set bundle of the feasibility formulation.
pub struct FeasibilityProblem<T> {
    pub a: Arc<dyn ProjectableSet<T>>,
    pub b: Arc<dyn ProjectableSet<T>>,
    pub c: Arc<dyn ProjectableSet<T>>,
    pub d: Vec<Arc<dyn ProjectableSet<T>>>,
}

/// `½d²_S`: smooth for convex `S` with gradient `x − Π_S(x)` and prox
/// `(z + αΠ_S(z))/(1+α)`.
struct HalfSqDist<T> {
    set: Arc<dyn ProjectableSet<T>>,
}

impl<T: Scalar> Smooth<T> for HalfSqDist<T> {
    fn value(&self, x: &[T]) -> T {
        let p = self.set.project(x);
        let d = dist2(x, &p);
        T::of(0.5) * d * d
    }
    fn grad(&self, x: &[T]) -> Vec<T> {
        let p = self.set.project(x);
        x.iter().zip(&p).map(|(&a, &b)| a - b).collect()
    }
}

impl<T: Scalar> SmoothProx<T> for HalfSqDist<T> {
    fn prox(&self, z: &[T], step: T) -> Result<Vec<T>, OracleError> {
        let p = self.set.project(z);
        if step.is_finite() {
            let w = step / (T::one() + step);
            Ok(z.iter().zip(&p).map(|(&zi, &pi)| zi + w * (pi - zi)).collect())
        } else {
            Ok(p)
        }
    }
}

/// Indicator of a set, with the projection as (selector) prox.
/// Membership for the standalone value uses a `1e−9·(1+‖x‖)` distance
/// tolerance; prox outputs are members exactly.
pub struct SetIndicator<T> {
    pub set: Arc<dyn ProjectableSet<T>>,
}

impl<T: Scalar> Proximable<T> for SetIndicator<T> {
    fn value(&self, x: &[T]) -> T {
        let p = self.set.project(x);
        if dist2(x, &p) <= T::of(1e-9) * (T::one() + norm2(x)) {
            T::zero()
        } else {
            T::infinity()
        }
    }
    fn prox(&self, v: &[T], _step: T) -> Result<ProxPoint<T>, OracleError> {
        Ok(ProxPoint { point: self.set.project(v), value: T::zero() })
    }
}

/// `p = Σᵢ ½d²_{D_i}` with selector `ξ = Σᵢ (y − Π_{D_i}(y))`.
struct SumHalfSqDist<T> {
    sets: Vec<Arc<dyn ProjectableSet<T>>>,
}

impl<T: Scalar> WeaklyConcave<T> for SumHalfSqDist<T> {
    fn value(&self, y: &[T]) -> T {
        self.sets.iter().fold(T::zero(), |acc, s| {
            let d = dist2(y, &s.project(y));
            acc + T::of(0.5) * d * d
        })
    }
    fn subgrad(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); y.len()];
        for s in &self.sets {
            let p = s.project(y);
            for i in 0..y.len() {
                out[i] += y[i] - p[i];
            }
        }
        out
    }
}

/// Builds the problem bundle; `ρ_p` equals the number of sets in `d`.
pub fn build_feasibility_spec<T: Scalar>(
    sets: FeasibilityProblem<T>,
    dim: usize,
) -> Result<ProblemSpec<T>, ParamsError> {
    let r = sets.d.len();
    let params = CurvatureParams::convex_smooth(T::one(), T::one()).with_rho_p(T::of(r as f64));
    ProblemSpec::from_parts(
        dim,
        params,
        Arc::new(HalfSqDist { set: sets.a }),
        Arc::new(SetIndicator { set: sets.b }),
        Arc::new(HalfSqDist { set: sets.c }),
        Arc::new(SumHalfSqDist { sets: sets.d }),
        r == 0,
    )
}

/// A small consistent instance used by the CLI and tests: two balls, a
/// box, and `r` copies of a sphere, with a nonempty intersection on the
/// sphere `‖x‖ = 0.5`.
pub fn synthetic_feasibility<T: Scalar>(dim: usize, r: usize) -> FeasibilityProblem<T> {
    assert!(dim >= 1);
    let mut c_center = vec![T::zero(); dim];
    c_center[0] = T::of(0.2);
    FeasibilityProblem {
        a: Arc::new(BallSet { center: vec![T::zero(); dim], radius: T::of(0.75) }),
        b: Arc::new(BoxSet::cube(dim, T::of(-0.6), T::of(0.6))),
        c: Arc::new(BallSet { center: c_center, radius: T::of(0.9) }),
        d: (0..r)
            .map(|_| {
                Arc::new(SphereSet { center: vec![T::zero(); dim], radius: T::of(0.5) })
                    as Arc<dyn ProjectableSet<T>>
            })
            .collect(),
    }
}
