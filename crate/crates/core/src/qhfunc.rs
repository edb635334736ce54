//! Normal forms `x^m y^k prod (y^p - λ_j x^q)` of reduced quasi-homogeneous
//! germs, their stratification into types I/II/III, and the dictionary
//! between a germ and the one-variable polynomial `Q_λ(t) = prod (t - λ_j)`
//! obtained by substituting `t = y^p / x^q`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{ComplexPoly, PolyError, RootConfig, RootMultiset};
use crate::tol::ComplexTol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GermError {
    #[error("weights must satisfy 1 <= p <= q and gcd(p, q) = 1, got ({p}, {q})")]
    BadWeights { p: u32, q: u32 },
    #[error("flag {name} must be 0 or 1, got {value}")]
    BadFlag { name: &'static str, value: u8 },
    #[error("k = 1 is only allowed for type III germs (1 < p < q)")]
    YFactorNotAllowed,
    #[error("a germ needs at least one root")]
    Empty,
    #[error("root {index} is zero")]
    ZeroRoot { index: usize },
    #[error("roots {i} and {j} coincide: the germ is not reduced")]
    RepeatedRoot { i: usize, j: usize },
    #[error("Q(0) = 0: zero is not an admissible root")]
    ZeroConstantTerm,
    #[error("Q must be monic")]
    NotMonic,
    #[error("Q has a multiple root: the germ is not reduced")]
    MultipleRoot,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(u32, u32)", into = "(u32, u32)")]
pub struct Weights {
    p: u32,
    q: u32,
}

impl Weights {
    pub fn new(p: u32, q: u32) -> Result<Self, GermError> {
        if p == 0 || p > q || gcd(p, q) != 1 {
            return Err(GermError::BadWeights { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn germ_type(&self) -> GermType {
        match (self.p, self.q) {
            (1, 1) => GermType::I,
            (1, _) => GermType::II,
            _ => GermType::III,
        }
    }
}

impl TryFrom<(u32, u32)> for Weights {
    type Error = GermError;

    fn try_from((p, q): (u32, u32)) -> Result<Self, Self::Error> {
        Self::new(p, q)
    }
}

impl From<Weights> for (u32, u32) {
    fn from(w: Weights) -> Self {
        (w.p, w.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GermType {
    I,
    II,
    III,
}

impl fmt::Display for GermType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GermType::I => "I",
            GermType::II => "II",
            GermType::III => "III",
        })
    }
}

/// Wire form of a germ: `{p, q, m, k, lambdas: [[re, im], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermRecord {
    pub p: u32,
    pub q: u32,
    #[serde(default)]
    pub m: u8,
    #[serde(default)]
    pub k: u8,
    pub lambdas: Vec<Complex64>,
}

/// A reduced quasi-homogeneous germ stored by its root data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GermRecord", into = "GermRecord")]
pub struct QHFunction {
    weights: Weights,
    m: u8,
    k: u8,
    lambdas: Vec<Complex64>,
}

impl TryFrom<GermRecord> for QHFunction {
    type Error = GermError;

    fn try_from(r: GermRecord) -> Result<Self, Self::Error> {
        Self::new(Weights::new(r.p, r.q)?, r.m, r.k, r.lambdas)
    }
}

impl From<QHFunction> for GermRecord {
    fn from(f: QHFunction) -> Self {
        GermRecord { p: f.weights.p, q: f.weights.q, m: f.m, k: f.k, lambdas: f.lambdas }
    }
}

/// Minimum separation for two roots to count as distinct.
const DISTINCT: ComplexTol = ComplexTol::new(1e-9, 1e-9);

impl QHFunction {
    pub fn new(weights: Weights, m: u8, k: u8, lambdas: Vec<Complex64>) -> Result<Self, GermError> {
        if m > 1 {
            return Err(GermError::BadFlag { name: "m", value: m });
        }
        if k > 1 {
            return Err(GermError::BadFlag { name: "k", value: k });
        }
        if k == 1 && weights.p == 1 {
            return Err(GermError::YFactorNotAllowed);
        }
        if lambdas.is_empty() {
            return Err(GermError::Empty);
        }
        for (i, l) in lambdas.iter().enumerate() {
            if l.norm() == 0.0 || !l.is_finite() {
                return Err(GermError::ZeroRoot { index: i });
            }
        }
        for i in 0..lambdas.len() {
            for j in i + 1..lambdas.len() {
                if DISTINCT.eq(lambdas[i], lambdas[j]) {
                    return Err(GermError::RepeatedRoot { i, j });
                }
            }
        }
        Ok(Self { weights, m, k, lambdas })
    }

    /// Commode germ `prod (y^p - λ_j x^q)`.
    pub fn commode(weights: Weights, lambdas: Vec<Complex64>) -> Result<Self, GermError> {
        Self::new(weights, 0, 0, lambdas)
    }

    pub fn weights(&self) -> Weights {
        self.weights
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambdas
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    pub fn germ_type(&self) -> GermType {
        self.weights.germ_type()
    }

    pub fn is_commode(&self) -> bool {
        self.m == 0 && self.k == 0
    }

    /// Weighted degree `n p q` of the commode part.
    pub fn weighted_degree(&self) -> u64 {
        self.n() as u64 * self.weights.p as u64 * self.weights.q as u64
    }

    /// Same germ with its `λ` replaced; flags and weights are kept.
    pub fn with_lambdas(&self, lambdas: Vec<Complex64>) -> Result<Self, GermError> {
        Self::new(self.weights, self.m, self.k, lambdas)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub germ_type: GermType,
    pub commode: bool,
}

pub fn classify(f: &QHFunction) -> Classification {
    Classification { germ_type: f.germ_type(), commode: f.is_commode() }
}

pub fn commode_reduce(f: &QHFunction) -> QHFunction {
    QHFunction { m: 0, k: 0, ..f.clone() }
}

/// `Q_λ(t) = prod (t - λ_j)`. The flags `m`, `k` play no role.
pub fn q_of_f(f: &QHFunction) -> ComplexPoly {
    ComplexPoly::from_roots(&f.lambdas, Complex64::new(1.0, 0.0)).expect("leading coefficient 1 is nonzero")
}

/// Commode germ with weights `w` whose polynomial is `q`.
pub fn f_of_q(q: &ComplexPoly, w: Weights) -> Result<QHFunction, GermError> {
    if q.degree() == 0 {
        return Err(PolyError::DegreeTooLow { needed: 1, got: 0 }.into());
    }
    if (q.leading() - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(GermError::NotMonic);
    }
    if q.coeff(0).norm() <= 1e-14 * q.coeff_norm() {
        return Err(GermError::ZeroConstantTerm);
    }
    let roots = q.roots(&RootConfig::default())?;
    if roots.has_multiple() {
        return Err(GermError::MultipleRoot);
    }
    QHFunction::commode(w, roots.into_vec()).map_err(|e| match e {
        GermError::RepeatedRoot { .. } => GermError::MultipleRoot,
        other => other,
    })
}

/// A branch `y^p = κ x^q` of the polar curve with `κ ≠ 0`, parametrized by
/// `s ↦ (s^p, α s^q)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarBranch {
    pub kappa: Complex64,
    /// Principal `p`-th root of `kappa`.
    pub alpha: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarCurve {
    pub kappas: RootMultiset,
    /// The extra branch `y = 0`, present when `p > 1`.
    pub has_y_branch: bool,
    pub branches: Vec<PolarBranch>,
}

impl PolarCurve {
    /// Number of branches with `κ ≠ 0`.
    pub fn r(&self) -> usize {
        self.branches.len()
    }
}

/// Principal `p`-th root, argument in `(-π/p, π/p]`.
pub fn principal_root(z: Complex64, p: u32) -> Complex64 {
    if p == 1 {
        return z;
    }
    let (r, theta) = z.to_polar();
    Complex64::from_polar(r.powf(1.0 / p as f64), theta / p as f64)
}

/// `κ` below this (times `max(1, max |λ|)`) counts as the zero critical point.
pub const ZERO_KAPPA: f64 = 1e-9;

pub(crate) fn is_zero_kappa(kappa: Complex64, scale: f64) -> bool {
    kappa.norm() <= ZERO_KAPPA * scale.max(1.0)
}

pub fn polar_curve(f: &QHFunction) -> PolarCurve {
    let q = q_of_f(f);
    let kappas = if f.n() >= 2 {
        q.derivative().roots(&RootConfig::default()).expect("derivative of a degree >= 2 polynomial is nonconstant")
    } else {
        RootMultiset::from_values(vec![], RootConfig::default().cluster_radius)
    };
    let scale = crate::tol::max_norm(f.lambdas());
    let p = f.weights.p;
    let branches = kappas
        .iter()
        .filter(|k| !is_zero_kappa(**k, scale))
        .map(|&kappa| PolarBranch { kappa, alpha: principal_root(kappa, p) })
        .collect();
    PolarCurve { kappas, has_y_branch: p > 1, branches }
}

/// Bivariate polynomial as a sparse map `(i, j) ↦ coefficient of x^i y^j`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BivariatePoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl BivariatePoly {
    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), Complex64)>) -> Self {
        let mut p = Self::default();
        for (mono, c) in terms {
            p.add_term(mono, c);
        }
        p
    }

    pub fn add_term(&mut self, mono: (u32, u32), c: Complex64) {
        *self.terms.entry(mono).or_default() += c;
    }

    /// Nonzero terms only.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().filter(|(_, c)| c.norm() != 0.0).map(|(&m, &c)| (m, c))
    }

    pub fn coeff(&self, i: u32, j: u32) -> Complex64 {
        self.terms.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.terms().map(|((i, j), c)| c * x.powu(i) * y.powu(j)).sum()
    }

    pub fn d_dy(&self) -> Self {
        Self::from_terms(self.terms().filter(|((_, j), _)| *j > 0).map(|((i, j), c)| ((i, j - 1), c * j as f64)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for ((i, j), a) in self.terms() {
            for ((k, l), b) in other.terms() {
                out.add_term((i + k, j + l), a * b);
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.terms().map(|(m, c)| (m, c * s)))
    }
}

/// Coefficient table of `x^m y^k prod (y^p - λ_j x^q)`.
pub fn expand(f: &QHFunction) -> BivariatePoly {
    let (p, q) = (f.weights.p, f.weights.q);
    let n = f.n() as u32;
    let qpoly = q_of_f(f);
    // x^{nq} Q(y^p / x^q) = sum_l c_l y^{pl} x^{q(n-l)}
    BivariatePoly::from_terms((0..=n).map(|l| {
        let c = qpoly.coeff(l as usize);
        ((q * (n - l) + f.m as u32, p * l + f.k as u32), c)
    }))
}

/// `p n y^{p-1} prod (y^p - κ_j x^q)` built from the polar data.
pub fn expand_polar(f: &QHFunction, polar: &PolarCurve) -> BivariatePoly {
    let (p, q) = (f.weights.p, f.weights.q);
    let mut acc = BivariatePoly::from_terms([((0, p - 1), Complex64::new((p as usize * f.n()) as f64, 0.0))]);
    for &kappa in polar.kappas.iter() {
        let factor = BivariatePoly::from_terms([((0, p), Complex64::new(1.0, 0.0)), ((q, 0), -kappa)]);
        acc = acc.mul(&factor);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedDegree {
    pub quasi_homogeneous: bool,
    pub degree: Option<u64>,
}

/// Checks that every nonzero monomial `x^i y^j` has the same weighted
/// degree `p i + q j`.
pub fn weighted_degree_check(poly: &BivariatePoly, w: Weights) -> WeightedDegree {
    let mut degree = None;
    for ((i, j), _) in poly.terms() {
        let d = w.p as u64 * i as u64 + w.q as u64 * j as u64;
        match degree {
            None => degree = Some(d),
            Some(d0) if d0 != d => return WeightedDegree { quasi_homogeneous: false, degree: None },
            _ => {}
        }
    }
    WeightedDegree { quasi_homogeneous: degree.is_some(), degree }
}

/// `x = 0` is not a line of the tangent cone: the lowest total-degree part
/// of the polynomial contains a pure power of `y`.
pub fn is_miniregular(poly: &BivariatePoly) -> bool {
    let Some(low) = poly.terms().map(|((i, j), _)| i + j).min() else {
        return false;
    };
    poly.coeff(0, low).norm() != 0.0
}
