//! The maps `Υ_II`, `Υ_III` sending critical points `κ` to critical values
//! of `Q_κ` (normalized by `σ_n = 1`), and their fibers.
//!
//! `Q_κ(t) = t^n + Σ_ℓ (-1)^ℓ n/(n-ℓ) σ_ℓ(κ) t^{n-ℓ} + (-1)^n` is the monic
//! polynomial with critical points `κ`. Because `Q_κ'(κ_j) = 0`,
//! `∂/∂κ_i [Q_κ(κ_j)] = Σ_ℓ (-1)^ℓ n/(n-ℓ) σ_{ℓ-1}(κ without κ_i) κ_j^{n-ℓ}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homotopy::{scaled_residual, track_indices, PathResult, PathStatus, PolySystem, StartSystem, TrackerConfig};
use crate::hp::hp_invariant;
use crate::moduli::{self, center, equivalent, kappa_of_lambda, lambda_of_kappa, unit_product, Configuration};
use crate::poly::{cluster_labels, elementary_symmetric, ComplexPoly, RootConfig};
use crate::qhfunc::{q_of_f, GermType, QHFunction, Weights};
use crate::tol::{self, multiset_eq, ComplexTol, GRID};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UpsilonError {
    #[error("fibers are defined for type II and III only")]
    Unsupported,
    #[error("n must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("type {germ_type} with n = {n} needs {expected} target values, got {got}")]
    TargetLength { germ_type: GermType, n: usize, expected: usize, got: usize },
    #[error("target value {0} is not finite")]
    NotFinite(usize),
    #[error("the fiber is degenerate")]
    DegenerateFiber,
    #[error("cannot normalize: {0}")]
    Normalization(String),
    #[error("invalid solver configuration: {0}")]
    Config(String),
}

/// Target values `ρ_1..ρ_{n-2}` (type II) or `ρ_1..ρ_{n-1}` (type III),
/// each tied to the unknown with the same index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TargetRecord", into = "TargetRecord")]
pub struct FiberTarget {
    germ_type: GermType,
    n: usize,
    targets: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetRecord {
    #[serde(rename = "type")]
    germ_type: GermType,
    n: usize,
    targets: Vec<Complex64>,
}

impl From<FiberTarget> for TargetRecord {
    fn from(t: FiberTarget) -> Self {
        TargetRecord { germ_type: t.germ_type, n: t.n, targets: t.targets }
    }
}

impl TryFrom<TargetRecord> for FiberTarget {
    type Error = UpsilonError;

    fn try_from(r: TargetRecord) -> Result<Self, UpsilonError> {
        FiberTarget::new(r.germ_type, r.n, r.targets)
    }
}

/// Number of unknowns (and equations) of the system for `germ_type`.
pub fn unknowns(germ_type: GermType, n: usize) -> usize {
    match germ_type {
        GermType::II => n.saturating_sub(2),
        _ => n.saturating_sub(1),
    }
}

impl FiberTarget {
    pub fn new(germ_type: GermType, n: usize, targets: Vec<Complex64>) -> Result<Self, UpsilonError> {
        if germ_type == GermType::I {
            return Err(UpsilonError::Unsupported);
        }
        if n < 2 {
            return Err(UpsilonError::TooSmall(n));
        }
        let expected = unknowns(germ_type, n);
        if targets.len() != expected {
            return Err(UpsilonError::TargetLength { germ_type, n, expected, got: targets.len() });
        }
        if let Some(i) = targets.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(UpsilonError::NotFinite(i));
        }
        Ok(Self { germ_type, n, targets })
    }

    pub fn germ_type(&self) -> GermType {
        self.germ_type
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn targets(&self) -> &[Complex64] {
        &self.targets
    }

    /// `n^{n-2}` (II) or `n^{n-1}` (III).
    pub fn bezout(&self) -> usize {
        self.n.pow(unknowns(self.germ_type, self.n) as u32)
    }

    /// Upper bound on the number of classes: `n^{n-3}` (II), `n^{n-2}` (III).
    pub fn class_bound(&self) -> usize {
        (self.bezout() / self.n).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub seed: u64,
    #[serde(flatten)]
    pub tracker: TrackerConfig,
    /// Endpoints closer than this (times `max(1, |κ|)`) are one solution.
    pub cluster_radius: f64,
    /// Target entries below this are treated as zero.
    pub zero_tol: f64,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl Default for SolverConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, tracker: TrackerConfig::default(), cluster_radius: 1e-6, zero_tol: 1e-8 }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), UpsilonError> {
        self.tracker.validate().map_err(UpsilonError::Config)?;
        if !(self.cluster_radius > 0.0) || !(self.zero_tol > 0.0) {
            return Err(UpsilonError::Config("cluster_radius and zero_tol must be positive".into()));
        }
        Ok(())
    }
}

/// `Q_κ` with constant term `(-1)^n σ_n`.
fn q_kappa(kappa: &[Complex64], sigma_n: Complex64) -> ComplexPoly {
    lambda_of_kappa(kappa, kappa.len() + 1, sigma_n).expect("n = |κ| + 1")
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `Υ_III(κ)_j = Q_κ(κ_j)` for all `n - 1` coordinates.
pub fn upsilon_iii(kappa: &[Complex64]) -> Vec<Complex64> {
    let q = q_kappa(kappa, one());
    kappa.iter().map(|&k| q.eval(k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpsilonII {
    /// `ρ_1..ρ_{n-2}`
    pub values: Vec<Complex64>,
    /// `ρ_{n-1} = Q_κ(κ_{n-1})`, determined by the others.
    pub auxiliary: Complex64,
    /// The full centered configuration, `κ_{n-1} = -Σ κ_free`.
    pub kappa: Vec<Complex64>,
}

/// `Υ_II` on the free coordinates `κ_1..κ_{n-2}`.
pub fn upsilon_ii(kappa_free: &[Complex64]) -> UpsilonII {
    let kappa = complete_centered(kappa_free);
    let q = q_kappa(&kappa, one());
    let mut values: Vec<_> = kappa.iter().map(|&k| q.eval(k)).collect();
    let auxiliary = values.pop().expect("at least one critical point");
    UpsilonII { values, auxiliary, kappa }
}

fn complete_centered(free: &[Complex64]) -> Vec<Complex64> {
    let mut kappa = free.to_vec();
    kappa.push(-free.iter().sum::<Complex64>());
    kappa
}

/// Matrix `D_{j,i} = ∂ Q_κ(κ_j) / ∂κ_i` over the full configuration.
fn full_jacobian(kappa: &[Complex64]) -> DMatrix<Complex64> {
    let m = kappa.len();
    let n = m + 1;
    let weights: Vec<f64> = (1..n).map(|l| if l % 2 == 0 { 1.0 } else { -1.0 } * n as f64 / (n - l) as f64).collect();
    let mut d = DMatrix::zeros(m, m);
    let mut rest = Vec::with_capacity(m);
    for i in 0..m {
        rest.clear();
        rest.extend(kappa.iter().enumerate().filter(|&(l, _)| l != i).map(|(_, &k)| k));
        let e = elementary_symmetric(&rest);
        for j in 0..m {
            // Σ_l w_l e_{l-1} κ_j^{n-l}, by Horner in κ_j
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 1..n {
                acc = acc * kappa[j] + e[l - 1] * weights[l - 1];
            }
            d[(j, i)] = acc * kappa[j];
        }
    }
    d
}

/// The square system `Υ(κ) - ρ = 0` in the free unknowns.
#[derive(Clone, Debug)]
pub struct UpsilonSystem {
    germ_type: GermType,
    n: usize,
    target: Vec<Complex64>,
}

impl UpsilonSystem {
    pub fn new(target: &FiberTarget) -> Self {
        Self { germ_type: target.germ_type, n: target.n, target: target.targets.clone() }
    }

    /// The full configuration of `n - 1` critical points.
    pub fn full_kappa(&self, x: &[Complex64]) -> Vec<Complex64> {
        match self.germ_type {
            GermType::II => complete_centered(x),
            _ => x.to_vec(),
        }
    }
}

impl PolySystem for UpsilonSystem {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn degrees(&self) -> Vec<u32> {
        vec![self.n as u32; self.dim()]
    }

    fn eval(&self, x: &[Complex64]) -> Vec<Complex64> {
        let kappa = self.full_kappa(x);
        let q = q_kappa(&kappa, one());
        self.target.iter().zip(&kappa).map(|(r, &k)| q.eval(k) - r).collect()
    }

    fn jacobian(&self, x: &[Complex64]) -> DMatrix<Complex64> {
        let kappa = self.full_kappa(x);
        let d = full_jacobian(&kappa);
        let m = self.dim();
        match self.germ_type {
            GermType::II => {
                let last = kappa.len() - 1;
                DMatrix::from_fn(m, m, |j, i| d[(j, i)] - d[(j, last)])
            }
            _ => d,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSolution {
    /// All `n - 1` critical points (type II includes the dependent one).
    pub kappa: Vec<Complex64>,
    pub residual: f64,
    pub multiplicity: usize,
    pub diverged: bool,
    /// Endpoint with a numerically singular Jacobian.
    #[serde(default)]
    pub singular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Degeneracy {
    ZeroTarget { index: usize },
    MultipleSolution { index: usize, multiplicity: usize },
    SingularSolution { index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub target: FiberTarget,
    /// Finite solutions in canonical order, then diverged paths.
    pub solutions: Vec<FiberSolution>,
    pub bezout: usize,
    /// Indices of finite solutions grouped by `ℤ_n` orbit.
    pub orbit_partition: Vec<Vec<usize>>,
    pub degenerate: bool,
    pub degeneracy: Vec<Degeneracy>,
    pub failed_paths: usize,
    pub incomplete: bool,
    pub seed: u64,
}

impl Fiber {
    pub fn finite(&self) -> impl Iterator<Item = &FiberSolution> {
        self.solutions.iter().filter(|s| !s.diverged)
    }

    pub fn finite_mass(&self) -> usize {
        self.finite().map(|s| s.multiplicity).sum()
    }

    pub fn diverged_paths(&self) -> usize {
        self.solutions.iter().filter(|s| s.diverged).count()
    }
}

fn vec_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn vec_cmp(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    let ka: Vec<_> = a.iter().map(|&z| tol::snap(z, GRID)).collect();
    let kb: Vec<_> = b.iter().map(|&z| tol::snap(z, GRID)).collect();
    ka.cmp(&kb)
}

/// Orbit tolerance for comparing two solutions.
fn orbit_tol(cfg: &SolverConfig) -> ComplexTol {
    ComplexTol::new(10.0 * cfg.cluster_radius, 10.0 * cfg.cluster_radius)
}

/// Solve `Υ(κ) = ρ` by tracking all total-degree paths.
pub fn solve_fiber(target: &FiberTarget, cfg: &SolverConfig) -> Result<Fiber, UpsilonError> {
    cfg.validate()?;
    let sys = UpsilonSystem::new(target);
    let n = target.n;

    let (mut finite, mut diverged, failed_paths) = if sys.dim() == 0 {
        (vec![(sys.full_kappa(&[]), false)], vec![], 0)
    } else {
        let paths = track_with_retries(&sys, cfg);
        let mut finite = vec![];
        let mut diverged = vec![];
        let mut failed = 0;
        for p in paths {
            match p.status {
                PathStatus::Converged => finite.push((sys.full_kappa(&p.endpoint), p.singular)),
                PathStatus::Diverged => diverged.push(sys.full_kappa(&p.endpoint)),
                PathStatus::Failed => failed += 1,
            }
        }
        (finite, diverged, failed)
    };

    // a singular root of a degree n system is only resolved to about eps^{1/n}
    let singular_radius = cfg.cluster_radius.max(10.0 * f64::EPSILON.powf(1.0 / n as f64));
    let idx: Vec<usize> = (0..finite.len()).collect();
    let labels = cluster_labels(&idx, |a, b| {
        let ((ka, sa), (kb, sb)) = (&finite[a], &finite[b]);
        let radius = if *sa && *sb { singular_radius } else { cfg.cluster_radius };
        vec_dist(ka, kb) <= radius * (1.0 + tol::max_norm(ka).max(tol::max_norm(kb)))
    });
    let groups = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut solutions: Vec<FiberSolution> = (0..groups)
        .map(|g| {
            let members: Vec<usize> = idx.iter().copied().filter(|&i| labels[i] == g).collect();
            let mut mean = vec![Complex64::new(0.0, 0.0); n - 1];
            for &i in &members {
                for (m, k) in mean.iter_mut().zip(&finite[i].0) {
                    *m += k;
                }
            }
            for m in mean.iter_mut() {
                *m /= members.len() as f64;
            }
            let free = &mean[..sys.dim()];
            FiberSolution {
                residual: scaled_residual(&sys, free),
                kappa: mean,
                multiplicity: members.len(),
                diverged: false,
                singular: members.iter().any(|&i| finite[i].1),
            }
        })
        .collect();
    finite.clear();
    solutions.sort_by(|a, b| vec_cmp(&a.kappa, &b.kappa));

    diverged.sort_by(|a, b| vec_cmp(a, b));
    for kappa in diverged.drain(..) {
        let free = &kappa[..sys.dim()];
        let r = scaled_residual(&sys, free);
        solutions.push(FiberSolution {
            residual: if r.is_finite() { r } else { f64::MAX },
            kappa,
            multiplicity: 1,
            diverged: true,
            singular: false,
        });
    }

    let orbit_partition = zn_partition(&solutions, n, orbit_tol(cfg));
    let degeneracy = degeneracy_reasons(target, &solutions, cfg.zero_tol);
    Ok(Fiber {
        target: target.clone(),
        degenerate: !degeneracy.is_empty(),
        degeneracy,
        bezout: target.bezout(),
        orbit_partition,
        solutions,
        failed_paths,
        incomplete: failed_paths > 0,
        seed: cfg.seed,
    })
}

const RETRIES: usize = 3;

/// Track all paths, then re-track with smaller steps any paths that met at
/// a nonsingular endpoint. A regular root is hit by exactly one path, so a
/// collision there means a path jumped.
fn track_with_retries(sys: &UpsilonSystem, cfg: &SolverConfig) -> Vec<PathResult> {
    let start = StartSystem::random(sys.degrees(), cfg.seed);
    let all: Vec<usize> = (0..start.path_count()).collect();
    let mut paths = track_indices(sys, &start, &all, &cfg.tracker);
    let mut tracker = cfg.tracker.clone();
    for _ in 0..RETRIES {
        let suspects = colliding_paths(&paths, cfg.cluster_radius);
        if suspects.is_empty() {
            break;
        }
        tracker.step_max = (tracker.step_max / 10.0).max(tracker.step_min);
        tracker.step_initial = tracker.step_initial.min(tracker.step_max);
        for (&i, r) in suspects.iter().zip(track_indices(sys, &start, &suspects, &tracker)) {
            paths[i] = r;
        }
    }
    paths
}

fn colliding_paths(paths: &[PathResult], radius: f64) -> Vec<usize> {
    let regular: Vec<usize> =
        (0..paths.len()).filter(|&i| paths[i].status == PathStatus::Converged && !paths[i].singular).collect();
    let labels = cluster_labels(&regular, |a, b| {
        let (xa, xb) = (&paths[a].endpoint, &paths[b].endpoint);
        vec_dist(xa, xb) <= radius * (1.0 + tol::max_norm(xa).max(tol::max_norm(xb)))
    });
    let mut sizes = vec![0usize; regular.len()];
    for &l in &labels {
        sizes[l] += 1;
    }
    regular.iter().zip(&labels).filter(|(_, &l)| sizes[l] > 1).map(|(&i, _)| i).collect()
}

fn zn_partition(solutions: &[FiberSolution], n: usize, tol: ComplexTol) -> Vec<Vec<usize>> {
    let finite: Vec<usize> = (0..solutions.len()).filter(|&i| !solutions[i].diverged).collect();
    let labels = cluster_labels(&finite, |a, b| {
        moduli::zn_orbit_shift(&solutions[a].kappa, &solutions[b].kappa, n, tol).is_some()
    });
    let groups = labels.iter().copied().max().map_or(0, |m| m + 1);
    (0..groups).map(|g| (0..finite.len()).filter(|&k| labels[k] == g).map(|k| finite[k]).collect()).collect()
}

fn degeneracy_reasons(target: &FiberTarget, solutions: &[FiberSolution], zero_tol: f64) -> Vec<Degeneracy> {
    let mut out: Vec<Degeneracy> = target
        .targets
        .iter()
        .enumerate()
        .filter(|(_, r)| r.norm() <= zero_tol)
        .map(|(index, _)| Degeneracy::ZeroTarget { index })
        .collect();
    for (index, s) in solutions.iter().enumerate().filter(|(_, s)| !s.diverged) {
        if s.multiplicity > 1 {
            out.push(Degeneracy::MultipleSolution { index, multiplicity: s.multiplicity });
        } else if s.singular {
            out.push(Degeneracy::SingularSolution { index });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub degenerate: bool,
    pub reasons: Vec<Degeneracy>,
}

/// Degeneracy of a fiber: a zero target entry or a non-simple solution.
pub fn is_degenerate_target(target: &FiberTarget, fiber: &Fiber, zero_tol: f64) -> DegeneracyReport {
    let reasons = degeneracy_reasons(target, &fiber.solutions, zero_tol);
    DegeneracyReport { degenerate: !reasons.is_empty(), reasons }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    /// Preferred member of the orbit.
    pub kappa: Vec<Complex64>,
    /// Indices into `Fiber::solutions`.
    pub orbit: Vec<usize>,
    pub q: ComplexPoly,
    pub lambdas: Vec<Complex64>,
    /// False when the reconstructed `Q` has a repeated or zero root.
    pub reduced: bool,
    /// The invariant of the reconstructed germ reproduces the target.
    pub hp_verified: bool,
}

/// Weights used for germs rebuilt from a fiber. The invariant does not
/// depend on the choice within a type.
pub fn representative_weights(germ_type: GermType) -> Weights {
    match germ_type {
        GermType::II => Weights::new(1, 2),
        _ => Weights::new(2, 3),
    }
    .expect("valid weights")
}

/// One record per `ℤ_n` orbit, with `Q` rebuilt from the orbit
/// representative and constant term `(-1)^n sigma_n`.
pub fn classes_from_fiber(fiber: &Fiber, sigma_n: Complex64) -> Result<Vec<ClassRecord>, UpsilonError> {
    if fiber.degenerate {
        return Err(UpsilonError::DegenerateFiber);
    }
    let target = &fiber.target;
    let n = target.n;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let shift = (sigma_n - 1.0) * sign;
    Ok(fiber
        .orbit_partition
        .iter()
        .map(|orbit| {
            let (_, kappa) = moduli::zn_orbit_representative(&fiber.solutions[orbit[0]].kappa, n);
            let q = q_kappa(&kappa, sigma_n);
            let roots = q.roots(&RootConfig::default()).expect("degree n >= 2");
            let reduced = !roots.has_multiple() && roots.iter().all(|z| z.norm() > 1e-9);
            let lambdas = roots.into_vec();
            let mut expected: Vec<Complex64> = kappa.iter().map(|&k| q.eval(k)).collect();
            let targets_ok =
                expected.iter().zip(&target.targets).all(|(e, t)| (e - (t + shift)).norm() <= 1e-7 * (1.0 + t.norm()));
            let hp_verified = reduced
                && targets_ok
                && QHFunction::commode(representative_weights(target.germ_type), lambdas.clone())
                    .ok()
                    .and_then(|f| hp_invariant(&f).ok())
                    .is_some_and(|h| {
                        if target.germ_type == GermType::III {
                            let scale = tol::max_norm(&kappa).max(1.0);
                            expected = kappa
                                .iter()
                                .zip(&expected)
                                .filter(|(k, _)| k.norm() > 1e-9 * scale)
                                .map(|(_, e)| *e)
                                .collect();
                        }
                        multiset_eq(h.rhos(), &expected, ComplexTol::uniform(1e-7))
                            && h.rho0().map_or(true, |r0| (r0 - sigma_n * sign).norm() <= 1e-7)
                    });
            ClassRecord { kappa, orbit: orbit.clone(), q, lambdas, reduced, hp_verified }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub classes: usize,
    pub solutions: usize,
    pub bound: usize,
    pub within_bound: bool,
    pub attains_bound: bool,
    pub degenerate: bool,
    pub incomplete: bool,
    pub warning: Option<String>,
}

pub fn count_classes(target: &FiberTarget, cfg: &SolverConfig) -> Result<(ClassCount, Fiber), UpsilonError> {
    let fiber = solve_fiber(target, cfg)?;
    let classes = fiber.orbit_partition.len();
    let bound = target.class_bound();
    let warning = if fiber.degenerate {
        Some("degenerate fiber: the bound assumes a nondegenerate target".to_string())
    } else if fiber.incomplete {
        Some(format!("{} paths failed; retry with another seed", fiber.failed_paths))
    } else {
        None
    };
    let count = ClassCount {
        classes,
        solutions: fiber.finite().count(),
        bound,
        within_bound: classes <= bound,
        attains_bound: classes == bound,
        degenerate: fiber.degenerate,
        incomplete: fiber.incomplete,
        warning,
    };
    Ok((count, fiber))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardImage {
    pub target: FiberTarget,
    /// Critical points of the normalized `Q_λ`, in the order tied to `target`.
    pub kappa: Vec<Complex64>,
    /// `λ` after centering (type II) and rescaling to unit product.
    pub lambdas: Vec<Complex64>,
}

/// Normalize the roots of `f` into the slice used by the systems and push
/// the critical points forward.
pub fn forward_target(f: &QHFunction) -> Result<ForwardImage, UpsilonError> {
    let germ_type = f.germ_type();
    let norm_err = |e: moduli::ModuliError| UpsilonError::Normalization(e.to_string());
    let lambdas = match germ_type {
        GermType::I => return Err(UpsilonError::Unsupported),
        GermType::II => {
            let c = center(&Configuration::plane(f.lambdas().to_vec()).map_err(norm_err)?).map_err(norm_err)?;
            unit_product(&c).map_err(norm_err)?
        }
        GermType::III => {
            unit_product(&Configuration::punctured(f.lambdas().to_vec()).map_err(norm_err)?).map_err(norm_err)?
        }
    };
    let g = f.with_lambdas(lambdas.points().to_vec()).map_err(|e| UpsilonError::Normalization(e.to_string()))?;
    let q = q_of_f(&g);
    let mut kappa = kappa_of_lambda(&lambdas).into_vec();
    if germ_type == GermType::II {
        // put the dependent coordinate last, where the system expects it
        let free: Vec<_> = kappa[..kappa.len() - 1].to_vec();
        kappa = complete_centered(&free);
    }
    let targets = kappa.iter().take(unknowns(germ_type, f.n())).map(|&k| q.eval(k)).collect();
    Ok(ForwardImage { target: FiberTarget::new(germ_type, f.n(), targets)?, kappa, lambdas: lambdas.points().to_vec() })
}

/// Target for the configuration `κ = (0, …, 0)`, the image of `n`-th
/// roots of unity (every entry is `(-1)^n`).
pub fn roots_of_unity_target(germ_type: GermType, n: usize) -> Result<FiberTarget, UpsilonError> {
    let zeros = vec![Complex64::new(0.0, 0.0); unknowns(germ_type, n)];
    let values = match germ_type {
        GermType::II => upsilon_ii(&zeros).values,
        _ => upsilon_iii(&zeros),
    };
    FiberTarget::new(germ_type, n, values)
}

/// Classes for an unordered collection of target values: the union over
/// distinct orderings of the target, deduplicated by analytic equivalence.
pub fn classes_unordered(target: &FiberTarget, cfg: &SolverConfig) -> Result<Vec<ClassRecord>, UpsilonError> {
    let tol = ComplexTol::uniform(1e-9);
    let mut orders: Vec<Vec<Complex64>> = vec![];
    for perm in permutations(target.targets.len()) {
        let cand: Vec<_> = perm.iter().map(|&i| target.targets[i]).collect();
        if !orders.iter().any(|o| o.iter().zip(&cand).all(|(a, b)| tol.eq(*a, *b))) {
            orders.push(cand);
        }
    }
    let mut out: Vec<ClassRecord> = vec![];
    for order in orders {
        let t = FiberTarget::new(target.germ_type, target.n, order)?;
        let fiber = solve_fiber(&t, cfg)?;
        for class in classes_from_fiber(&fiber, one())? {
            let cfg_of = |l: &[Complex64]| match target.germ_type {
                GermType::II => Configuration::plane(l.to_vec()),
                _ => Configuration::punctured(l.to_vec()),
            };
            let Ok(a) = cfg_of(&class.lambdas) else {
                out.push(class);
                continue;
            };
            let dup = out.iter().any(|c| {
                cfg_of(&c.lambdas)
                    .ok()
                    .and_then(|b| equivalent(&a, &b, target.germ_type).ok())
                    .is_some_and(|e| e.equivalent)
            });
            if !dup {
                out.push(class);
            }
        }
    }
    Ok(out)
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur: Vec<usize> = (0..m).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}
