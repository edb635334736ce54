//! Total-degree homotopy continuation for square polynomial systems.
//!
//! `H(x, t) = (1 - t) γ G(x) + t F(x)` with start system
//! `G_j(x) = x_j^{d_j} - r_j`, tracked from `t = 0` to `t = 1` by an Euler
//! predictor and a Newton corrector with adaptive steps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// A square polynomial system `F: ℂ^d → ℂ^d`.
pub trait PolySystem: Sync {
    fn dim(&self) -> usize;

    /// Total degree of each equation.
    fn degrees(&self) -> Vec<u32>;

    fn eval(&self, x: &[Complex64]) -> Vec<Complex64>;

    fn jacobian(&self, x: &[Complex64]) -> DMatrix<Complex64>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub step_initial: f64,
    pub step_min: f64,
    pub step_max: f64,
    /// Relative size of the last Newton update that counts as converged.
    pub corrector_tol: f64,
    pub max_corrector_iterations: usize,
    pub divergence_bound: f64,
    /// Past this `t` a stalled path switches to Newton on the target system.
    pub endgame_threshold: f64,
    pub polish_iterations: usize,
    /// Scaled residual below which an endpoint is accepted.
    pub residual_tol: f64,
    /// Scaled smallest singular value below which an endpoint is singular.
    pub singular_tol: f64,
    /// Unconverged endpoints beyond this norm are counted as diverging.
    /// Paths at infinity grow like a fractional power of `1/(1 - t)`, so
    /// this sits far below `divergence_bound`.
    pub escape_bound: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            step_initial: 0.01,
            step_min: 1e-7,
            step_max: 0.1,
            corrector_tol: 1e-12,
            max_corrector_iterations: 10,
            divergence_bound: 1e8,
            endgame_threshold: 0.99,
            polish_iterations: 200,
            residual_tol: 1e-9,
            singular_tol: 1e-8,
            escape_bound: 1e2,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("step_initial", self.step_initial),
            ("step_min", self.step_min),
            ("step_max", self.step_max),
            ("corrector_tol", self.corrector_tol),
            ("divergence_bound", self.divergence_bound),
            ("residual_tol", self.residual_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive and finite"));
            }
        }
        if self.step_min > self.step_max || self.step_initial > self.step_max {
            return Err("step bounds are inconsistent".into());
        }
        if !(0.0..1.0).contains(&self.endgame_threshold) {
            return Err("endgame_threshold must lie in [0, 1)".into());
        }
        if self.max_corrector_iterations == 0 {
            return Err("max_corrector_iterations must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Converged,
    Diverged,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub endpoint: Vec<Complex64>,
    pub status: PathStatus,
    pub residual: f64,
    /// Endpoint where the Jacobian of the target system is numerically singular.
    pub singular: bool,
    pub steps: usize,
    /// `t` reached by the tracker before any endgame.
    pub t_reached: f64,
}

/// Randomized start data shared by all paths of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct StartSystem {
    pub gamma: Complex64,
    pub r: Vec<Complex64>,
    pub degrees: Vec<u32>,
}

impl StartSystem {
    pub fn random(degrees: Vec<u32>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = Complex64::from_polar(1.0, rng.gen_range(0.0..TAU));
        let r = degrees.iter().map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU))).collect();
        Self { gamma, r, degrees }
    }

    pub fn path_count(&self) -> usize {
        self.degrees.iter().map(|&d| d as usize).product()
    }

    /// Start point number `index`, read in mixed radix over the degrees.
    pub fn start_point(&self, mut index: usize) -> Vec<Complex64> {
        self.degrees
            .iter()
            .zip(&self.r)
            .map(|(&d, r)| {
                let k = index % d as usize;
                index /= d as usize;
                let (m, a) = r.to_polar();
                Complex64::from_polar(m.powf(1.0 / d as f64), (a + TAU * k as f64) / d as f64)
            })
            .collect()
    }

    fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.iter().zip(&self.degrees).zip(&self.r).map(|((xj, &d), r)| xj.powu(d) - r).collect()
    }

    fn jacobian_diag(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.iter().zip(&self.degrees).map(|(xj, &d)| xj.powu(d - 1) * d as f64).collect()
    }
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn solve(a: DMatrix<Complex64>, b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let x = a.lu().solve(&DVector::from_vec(b))?;
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then(|| x.iter().copied().collect())
}

/// Residual of `F` at `x`, scaled by the size of the monomials involved.
pub fn scaled_residual<S: PolySystem + ?Sized>(sys: &S, x: &[Complex64]) -> f64 {
    let d = sys.degrees().into_iter().max().unwrap_or(1) as i32;
    inf_norm(&sys.eval(x)) / (1.0 + inf_norm(x)).powi(d)
}

/// Smallest singular value of the Jacobian at `x`, divided by the size
/// `d (1 + |x|)^{d-1}` of its entries.
pub fn scaled_sigma_min<S: PolySystem + ?Sized>(sys: &S, x: &[Complex64]) -> f64 {
    if sys.dim() == 0 {
        return 1.0;
    }
    let d = sys.degrees().into_iter().max().unwrap_or(1) as i32;
    sys.jacobian(x).singular_values().min() / (d as f64 * (1.0 + inf_norm(x)).powi(d - 1))
}

struct Homotopy<'a, S: ?Sized> {
    target: &'a S,
    start: &'a StartSystem,
}

impl<S: PolySystem + ?Sized> Homotopy<'_, S> {
    fn h(&self, x: &[Complex64], t: f64) -> Vec<Complex64> {
        let f = self.target.eval(x);
        let g = self.start.eval(x);
        let a = self.start.gamma * (1.0 - t);
        f.iter().zip(&g).map(|(fi, gi)| a * gi + fi * t).collect()
    }

    fn hx(&self, x: &[Complex64], t: f64) -> DMatrix<Complex64> {
        let mut j = self.target.jacobian(x) * Complex64::new(t, 0.0);
        let a = self.start.gamma * (1.0 - t);
        for (i, g) in self.start.jacobian_diag(x).into_iter().enumerate() {
            j[(i, i)] += a * g;
        }
        j
    }

    fn ht(&self, x: &[Complex64]) -> Vec<Complex64> {
        let f = self.target.eval(x);
        let g = self.start.eval(x);
        f.iter().zip(&g).map(|(fi, gi)| fi - self.start.gamma * gi).collect()
    }

    /// Newton on `H(·, t)`. Requires steady contraction; a first update
    /// comparable to the predictor step is taken as a sign of path jumping.
    fn correct(&self, mut x: Vec<Complex64>, t: f64, predicted: f64, cfg: &TrackerConfig) -> Option<Vec<Complex64>> {
        let mut prev = f64::INFINITY;
        for k in 0..cfg.max_corrector_iterations {
            let rhs: Vec<_> = self.h(&x, t).into_iter().map(|v| -v).collect();
            let dx = solve(self.hx(&x, t), rhs)?;
            let size = inf_norm(&dx);
            let scale = 1.0 + inf_norm(&x);
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi += d;
            }
            if size <= cfg.corrector_tol * scale {
                return Some(x);
            }
            if k == 0 && size > 0.25 * predicted + cfg.corrector_tol * scale {
                return None;
            }
            if size > 0.5 * prev {
                // stagnation at the rounding floor still counts as converged
                return (size <= 1e-9 * scale).then_some(x);
            }
            prev = size;
        }
        None
    }
}

/// Outcome of [`polish`].
#[derive(Clone, Debug, PartialEq)]
pub struct Polished {
    pub x: Vec<Complex64>,
    /// Relative size of the final Newton update.
    pub last_step: f64,
}

/// Newton on the target system, keeping the iterate with the smallest
/// residual. Converges linearly at singular roots, hence the long budget.
pub fn polish<S: PolySystem + ?Sized>(sys: &S, x: &[Complex64], iterations: usize, tol: f64) -> Polished {
    let mut x = x.to_vec();
    // (residual, iterate, size of the Newton update computed at it)
    let mut best = (f64::INFINITY, x.clone(), f64::INFINITY);
    for _ in 0..=iterations {
        let r = scaled_residual(sys, &x);
        if !r.is_finite() {
            break;
        }
        let is_best = r <= best.0;
        if is_best {
            best = (r, x.clone(), f64::INFINITY);
        }
        let rhs: Vec<_> = sys.eval(&x).into_iter().map(|v| -v).collect();
        let Some(dx) = solve(sys.jacobian(&x), rhs) else {
            // exactly singular: only a root can make the update vanish
            if is_best && r == 0.0 {
                best.2 = 0.0;
            }
            break;
        };
        let step = inf_norm(&dx) / (1.0 + inf_norm(&x));
        if is_best {
            best.2 = step;
        }
        if step <= tol {
            break;
        }
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    Polished { x: best.1, last_step: best.2 }
}

/// Track a single path from its start point.
pub fn track_path<S: PolySystem + ?Sized>(
    sys: &S,
    start: &StartSystem,
    index: usize,
    cfg: &TrackerConfig,
) -> PathResult {
    let hom = Homotopy { target: sys, start };
    let mut x = start.start_point(index);
    let mut t = 0.0_f64;
    let mut h = cfg.step_initial;
    let mut streak = 0;
    let mut steps = 0;
    let diverged = |x: &[Complex64], t: f64, steps: usize| PathResult {
        endpoint: x.to_vec(),
        status: PathStatus::Diverged,
        residual: f64::INFINITY,
        singular: false,
        steps,
        t_reached: t,
    };

    while t < 1.0 {
        steps += 1;
        let dt = h.min(1.0 - t);
        let rhs: Vec<_> = hom.ht(&x).into_iter().map(|v| -v).collect();
        let accepted = solve(hom.hx(&x, t), rhs).and_then(|v| {
            let pred: Vec<_> = x.iter().zip(&v).map(|(xi, vi)| xi + vi * dt).collect();
            hom.correct(pred, t + dt, inf_norm(&v) * dt, cfg)
        });
        match accepted {
            Some(next) => {
                x = next;
                t = if dt == 1.0 - t { 1.0 } else { t + dt };
                streak += 1;
                if streak >= 5 {
                    h = (h * 2.0).min(cfg.step_max);
                    streak = 0;
                }
                if inf_norm(&x) > cfg.divergence_bound {
                    return diverged(&x, t, steps);
                }
            }
            None => {
                h /= 2.0;
                streak = 0;
                if h < cfg.step_min {
                    if t > cfg.endgame_threshold {
                        break;
                    }
                    return PathResult {
                        endpoint: x,
                        status: PathStatus::Failed,
                        residual: f64::INFINITY,
                        singular: false,
                        steps,
                        t_reached: t,
                    };
                }
            }
        }
    }

    let t_reached = t;
    let Polished { x: end, last_step } = polish(sys, &x, cfg.polish_iterations, 1e-15);
    let residual = scaled_residual(sys, &end);
    // Newton from a stalled point may land on an unrelated root
    let moved: Vec<_> = end.iter().zip(&x).map(|(a, b)| a - b).collect();
    let stayed = inf_norm(&moved) <= 0.5 * (1.0 + inf_norm(&x));
    let status = if residual <= cfg.residual_tol && last_step <= 1e-8 && stayed {
        PathStatus::Converged
    } else if inf_norm(&x) > cfg.escape_bound {
        PathStatus::Diverged
    } else {
        PathStatus::Failed
    };
    let singular = status == PathStatus::Converged && scaled_sigma_min(sys, &end) < cfg.singular_tol;
    PathResult { endpoint: end, status, residual, singular, steps, t_reached }
}

/// Track every path of the total-degree homotopy. Paths run in parallel;
/// the result is indexed by start point, independent of scheduling.
pub fn track_all<S: PolySystem + ?Sized>(sys: &S, seed: u64, cfg: &TrackerConfig) -> Vec<PathResult> {
    let start = StartSystem::random(sys.degrees(), seed);
    let all: Vec<usize> = (0..start.path_count()).collect();
    track_indices(sys, &start, &all, cfg)
}

pub fn track_indices<S: PolySystem + ?Sized>(
    sys: &S,
    start: &StartSystem,
    indices: &[usize],
    cfg: &TrackerConfig,
) -> Vec<PathResult> {
    indices.par_iter().map(|&i| track_path(sys, start, i, cfg)).collect()
}
