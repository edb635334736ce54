//! Membership in the bifurcation sets of the polynomial `Q`.
//!
//! The local set collects polynomials whose derivative has a multiple root;
//! the semi-local set collects those where two distinct critical points
//! share a critical value. Both tests are numerical: each measures a scaled
//! defect and compares it with a tolerance, flagging results close to the
//! threshold as borderline.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::poly::{resultant, ComplexPoly, RootConfig};
use crate::qhfunc::{q_of_f, QHFunction};

/// Default threshold for the scaled defects.
pub const BIFURCATION_TOL: f64 = 1e-8;

/// Defects within this factor of the threshold are borderline.
pub const BORDERLINE_BAND: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationTol {
    pub tol: f64,
    /// Critical points closer than this (relative to `max(1, |t|)`) count as
    /// one point.
    pub cluster_radius: f64,
}

impl Default for BifurcationTol {
    fn default() -> Self {
        Self { tol: BIFURCATION_TOL, cluster_radius: RootConfig::default().cluster_radius }
    }
}

impl BifurcationTol {
    fn borderline(&self, defect: f64) -> bool {
        defect > self.tol / BORDERLINE_BAND && defect <= self.tol * BORDERLINE_BAND
    }
}

/// A root `t0` of `Q''` with the values of `Q'` and `Q''` there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalWitness {
    pub t0: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTest {
    pub member: bool,
    pub borderline: bool,
    /// `min |Q'(t0)|` over roots of `Q''`, relative to the coefficient scale.
    pub defect: f64,
    /// `|res(Q', Q'')|` divided by the product of coefficient norms raised to
    /// the Sylvester degrees.
    pub normalized_resultant: f64,
    pub witness: Option<LocalWitness>,
}

/// Two distinct critical points with their critical values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemilocalWitness {
    pub t1: Complex64,
    pub t2: Complex64,
    pub value1: Complex64,
    pub value2: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemilocalTest {
    pub member: bool,
    pub borderline: bool,
    /// `min |Q(t1) - Q(t2)|` over pairs of distinct critical points, relative
    /// to the coefficient scale.
    pub defect: f64,
    pub witness: Option<SemilocalWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationReport {
    pub in_bl: bool,
    pub in_bg: bool,
    pub borderline: bool,
    pub local: LocalTest,
    pub semilocal: SemilocalTest,
    pub tolerances: BifurcationTol,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Genericity {
    pub generic: bool,
    pub report: BifurcationReport,
}

fn coeff_scale(p: &ComplexPoly, points: &[Complex64]) -> f64 {
    let r = points.iter().fold(1.0_f64, |acc, t| acc.max(t.norm()));
    p.coeff_norm() * r.powi(p.degree() as i32)
}

fn l2_norm(p: &ComplexPoly) -> f64 {
    p.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn normalized_resultant(a: &ComplexPoly, b: &ComplexPoly) -> f64 {
    let scale = l2_norm(a).powi(b.degree() as i32) * l2_norm(b).powi(a.degree() as i32);
    resultant(a, b).norm() / scale
}

fn root_config(tol: &BifurcationTol) -> RootConfig {
    RootConfig { cluster_radius: tol.cluster_radius, ..RootConfig::default() }
}

pub fn in_local_bifurcation(q: &ComplexPoly) -> LocalTest {
    in_local_bifurcation_with(q, &BifurcationTol::default())
}

pub fn in_local_bifurcation_with(q: &ComplexPoly, tol: &BifurcationTol) -> LocalTest {
    let d1 = q.derivative();
    let d2 = d1.derivative();
    let none =
        LocalTest { member: false, borderline: false, defect: f64::INFINITY, normalized_resultant: 1.0, witness: None };
    if q.degree() < 3 {
        return none;
    }
    let Ok(roots) = d2.roots(&root_config(tol)) else { return none };
    let best = roots
        .clusters()
        .into_iter()
        .map(|(t0, _)| (t0, d1.eval(t0).norm() / coeff_scale(&d1, &[t0])))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let Some((t0, defect)) = best else { return none };
    LocalTest {
        member: defect <= tol.tol,
        borderline: tol.borderline(defect),
        defect,
        normalized_resultant: normalized_resultant(&d1, &d2),
        witness: Some(LocalWitness { t0, d1: d1.eval(t0), d2: d2.eval(t0) }),
    }
}

pub fn in_semilocal_bifurcation(q: &ComplexPoly) -> SemilocalTest {
    in_semilocal_bifurcation_with(q, &BifurcationTol::default())
}

pub fn in_semilocal_bifurcation_with(q: &ComplexPoly, tol: &BifurcationTol) -> SemilocalTest {
    let none = SemilocalTest { member: false, borderline: false, defect: f64::INFINITY, witness: None };
    if q.degree() < 3 {
        return none;
    }
    let Ok(roots) = q.derivative().roots(&root_config(tol)) else { return none };
    let kappa: Vec<Complex64> = roots.clusters().into_iter().map(|(t, _)| t).collect();
    let mut best: Option<(f64, SemilocalWitness)> = None;
    for (i, &t1) in kappa.iter().enumerate() {
        for &t2 in &kappa[i + 1..] {
            if (t1 - t2).norm() <= tol.cluster_radius * t1.norm().max(t2.norm()).max(1.0) {
                continue;
            }
            let (value1, value2) = (q.eval(t1), q.eval(t2));
            let defect = (value1 - value2).norm() / coeff_scale(q, &[t1, t2]);
            if best.as_ref().map_or(true, |(d, _)| defect < *d) {
                best = Some((defect, SemilocalWitness { t1, t2, value1, value2 }));
            }
        }
    }
    match best {
        None => none,
        Some((defect, witness)) => SemilocalTest {
            member: defect <= tol.tol,
            borderline: tol.borderline(defect),
            defect,
            witness: Some(witness),
        },
    }
}

pub fn bifurcation_report(q: &ComplexPoly, tol: &BifurcationTol) -> BifurcationReport {
    let local = in_local_bifurcation_with(q, tol);
    let semilocal = in_semilocal_bifurcation_with(q, tol);
    BifurcationReport {
        in_bl: local.member,
        in_bg: semilocal.member,
        borderline: local.borderline || semilocal.borderline,
        local,
        semilocal,
        tolerances: *tol,
    }
}

/// Generic means outside both bifurcation sets: the critical points of `Q`
/// are simple and their critical values pairwise distinct.
pub fn is_generic(f: &QHFunction) -> Genericity {
    is_generic_with(f, &BifurcationTol::default())
}

pub fn is_generic_with(f: &QHFunction, tol: &BifurcationTol) -> Genericity {
    let report = bifurcation_report(&q_of_f(f), tol);
    Genericity { generic: !report.in_bl && !report.in_bg, report }
}
