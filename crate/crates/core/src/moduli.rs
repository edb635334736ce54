//! Root configurations and the group actions that define analytic
//! equivalence: Möbius maps on `P¹` (type I), affine maps on `ℂ` (type II)
//! and scalings on `ℂ*` (type III). Also the normalizations used to reach a
//! slice of each quotient (centering, unit product) and the passage between
//! roots `λ` and critical points `κ`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{elementary_symmetric, ComplexPoly, RootConfig, RootMultiset};
use crate::qhfunc::{GermType, QHFunction};
use crate::tol::{self, multiset_eq, CanonicalKey, ComplexTol, GRID};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuliError {
    #[error("points {i} and {j} coincide")]
    NotDistinct { i: usize, j: usize },
    #[error("configuration in C* contains zero (point {index})")]
    ContainsZero { index: usize },
    #[error("operation needs a configuration in {expected:?}, got {got:?}")]
    WrongSpace { expected: Space, got: Space },
    #[error("configurations have different sizes ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("expected {expected} critical points, got {got}")]
    KappaCount { expected: usize, got: usize },
    #[error("no canonical form is defined for type {0} configurations")]
    Unsupported(GermType),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// `ℂ`
    Plane,
    /// `ℂ*`
    Punctured,
    /// `P¹`
    Sphere,
}

/// A point of `P¹`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum P1Point {
    Finite(Complex64),
    Infinity,
}

impl P1Point {
    /// Chordal distance on the Riemann sphere.
    pub fn chordal(self, other: P1Point) -> f64 {
        match (self, other) {
            (P1Point::Infinity, P1Point::Infinity) => 0.0,
            (P1Point::Finite(z), P1Point::Infinity) | (P1Point::Infinity, P1Point::Finite(z)) => {
                2.0 / (1.0 + z.norm_sqr()).sqrt()
            }
            (P1Point::Finite(z), P1Point::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
            }
        }
    }
}

/// An unordered configuration of distinct points. On the sphere, the point
/// at infinity is carried by a flag next to the finite points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<Complex64>,
    space: Space,
    #[serde(default)]
    at_infinity: bool,
}

const DISTINCT: ComplexTol = ComplexTol::new(1e-9, 1e-9);

fn check_distinct(points: &[Complex64]) -> Result<(), ModuliError> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if DISTINCT.eq(points[i], points[j]) {
                return Err(ModuliError::NotDistinct { i, j });
            }
        }
    }
    Ok(())
}

impl Configuration {
    pub fn plane(points: Vec<Complex64>) -> Result<Self, ModuliError> {
        check_distinct(&points)?;
        Ok(Self { points, space: Space::Plane, at_infinity: false })
    }

    pub fn punctured(points: Vec<Complex64>) -> Result<Self, ModuliError> {
        if let Some(index) = points.iter().position(|z| z.norm() == 0.0) {
            return Err(ModuliError::ContainsZero { index });
        }
        check_distinct(&points)?;
        Ok(Self { points, space: Space::Punctured, at_infinity: false })
    }

    pub fn sphere(points: Vec<Complex64>, at_infinity: bool) -> Result<Self, ModuliError> {
        check_distinct(&points)?;
        Ok(Self { points, space: Space::Sphere, at_infinity })
    }

    /// The configuration whose class is the analytic type of `f`: slopes in
    /// `P¹` for type I (with `∞` for the line `x = 0` when `m = 1`), roots
    /// in `ℂ` for type II and in `ℂ*` for type III.
    pub fn of_germ(f: &QHFunction) -> Self {
        let points = f.lambdas().to_vec();
        let space = match f.germ_type() {
            GermType::I => Space::Sphere,
            GermType::II => Space::Plane,
            GermType::III => Space::Punctured,
        };
        let at_infinity = space == Space::Sphere && f.m() == 1;
        Self { points, space, at_infinity }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn at_infinity(&self) -> bool {
        self.at_infinity
    }

    pub fn n(&self) -> usize {
        self.points.len() + self.at_infinity as usize
    }

    pub fn p1_points(&self) -> Vec<P1Point> {
        let mut out: Vec<P1Point> = self.points.iter().map(|&z| P1Point::Finite(z)).collect();
        if self.at_infinity {
            out.push(P1Point::Infinity);
        }
        out
    }

    pub fn sum(&self) -> Complex64 {
        self.points.iter().sum()
    }

    pub fn product(&self) -> Complex64 {
        self.points.iter().product()
    }

    /// Membership in `W_0`: the points sum to zero.
    pub fn is_centered(&self, tol: f64) -> bool {
        self.sum().norm() <= tol * tol::max_norm(&self.points).max(1.0)
    }

    /// Membership in `V`: the points multiply to one.
    pub fn has_unit_product(&self, tol: f64) -> bool {
        (self.product() - 1.0).norm() <= tol
    }

    fn map_points(&self, f: impl Fn(Complex64) -> Complex64, space: Space) -> Self {
        Self { points: self.points.iter().map(|&z| f(z)).collect(), space, at_infinity: self.at_infinity }
    }
}

/// Group elements acting on configurations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Transformation {
    /// `z ↦ a z + b`, `a ≠ 0`
    Affine { a: Complex64, b: Complex64 },
    /// `z ↦ a z`, `a ≠ 0`
    Scaling { a: Complex64 },
    /// `z ↦ (m00 z + m01) / (m10 z + m11)`, nonzero determinant
    Mobius { m: [[Complex64; 2]; 2] },
    /// `z ↦ exp(2πi s / n) z`
    RootOfUnity { n: usize, s: usize },
}

impl Transformation {
    pub fn apply(&self, z: Complex64) -> P1Point {
        match *self {
            Transformation::Affine { a, b } => P1Point::Finite(a * z + b),
            Transformation::Scaling { a } => P1Point::Finite(a * z),
            Transformation::RootOfUnity { n, s } => P1Point::Finite(root_of_unity(n, s) * z),
            Transformation::Mobius { m } => mobius_apply(&m, P1Point::Finite(z)),
        }
    }

    /// Image of a finite point under a map that fixes `∞`.
    pub fn apply_finite(&self, z: Complex64) -> Complex64 {
        match self.apply(z) {
            P1Point::Finite(w) => w,
            P1Point::Infinity => Complex64::new(f64::INFINITY, f64::INFINITY),
        }
    }

    pub fn inverse(&self) -> Self {
        match *self {
            Transformation::Affine { a, b } => Transformation::Affine { a: a.inv(), b: -b / a },
            Transformation::Scaling { a } => Transformation::Scaling { a: a.inv() },
            Transformation::RootOfUnity { n, s } => Transformation::RootOfUnity { n, s: (n - s % n) % n },
            Transformation::Mobius { m } => Transformation::Mobius { m: mobius_inverse(&m) },
        }
    }
}

pub fn root_of_unity(n: usize, s: usize) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (s % n) as f64 / n as f64)
}

type Mat2 = [[Complex64; 2]; 2];

fn mobius_apply(m: &Mat2, z: P1Point) -> P1Point {
    let (num, den) = match z {
        P1Point::Finite(z) => (m[0][0] * z + m[0][1], m[1][0] * z + m[1][1]),
        P1Point::Infinity => (m[0][0], m[1][0]),
    };
    if den.norm() <= 1e-300 || den.norm() <= f64::EPSILON * 1e-3 * num.norm() {
        P1Point::Infinity
    } else {
        P1Point::Finite(num / den)
    }
}

fn mobius_inverse(m: &Mat2) -> Mat2 {
    [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]
}

fn mobius_compose(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Möbius map sending `z1, z2, z3` to `0, 1, ∞`.
fn to_standard_triple(z1: P1Point, z2: P1Point, z3: P1Point) -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match (z1, z2, z3) {
        (P1Point::Infinity, P1Point::Finite(b), P1Point::Finite(c)) => [[zero, b - c], [one, -c]],
        (P1Point::Finite(a), P1Point::Infinity, P1Point::Finite(c)) => [[one, -a], [one, -c]],
        (P1Point::Finite(a), P1Point::Finite(b), P1Point::Infinity) => [[one, -a], [zero, b - a]],
        (P1Point::Finite(a), P1Point::Finite(b), P1Point::Finite(c)) => [[b - c, -a * (b - c)], [b - a, -c * (b - a)]],
        _ => unreachable!("triple points are distinct"),
    }
}

/// `Φ`: translate so the points sum to zero.
pub fn center(c: &Configuration) -> Result<Configuration, ModuliError> {
    if c.space == Space::Sphere {
        return Err(ModuliError::WrongSpace { expected: Space::Plane, got: c.space });
    }
    let mean = if c.points.is_empty() { Complex64::new(0.0, 0.0) } else { c.sum() / c.points.len() as f64 };
    Ok(c.map_points(|z| z - mean, Space::Plane))
}

/// `Ψ`: rescale by the principal `n`-th root of the product so the points
/// multiply to one.
pub fn unit_product(c: &Configuration) -> Result<Configuration, ModuliError> {
    if c.space == Space::Sphere {
        return Err(ModuliError::WrongSpace { expected: Space::Punctured, got: c.space });
    }
    if let Some(index) = c.points.iter().position(|z| z.norm() == 0.0) {
        return Err(ModuliError::ContainsZero { index });
    }
    let n = c.points.len() as f64;
    // product of the principal roots of each point avoids overflow; fix the
    // branch by comparing with the principal root of the full product
    let (r, theta) = c.product().to_polar();
    let root = Complex64::from_polar(r.powf(1.0 / n), theta / n);
    Ok(c.map_points(|z| z / root, c.space))
}

/// `Ξ`: the `n - 1` critical points of `Q_λ`. For centered, unit-product
/// input the output is centered as well.
pub fn kappa_of_lambda(c: &Configuration) -> RootMultiset {
    let q = ComplexPoly::from_roots(&c.points, Complex64::new(1.0, 0.0)).expect("monic");
    if q.degree() < 2 {
        return RootMultiset::from_values(vec![], RootConfig::default().cluster_radius);
    }
    q.derivative().roots(&RootConfig::default()).expect("degree >= 1")
}

/// The monic degree-`n` polynomial with critical points `kappa` and
/// `Q(0) = (-1)^n sigma_n`:
/// `t^n + sum_l (-1)^l n/(n-l) σ_l(κ) t^{n-l} + (-1)^n sigma_n`.
pub fn lambda_of_kappa(kappa: &[Complex64], n: usize, sigma_n: Complex64) -> Result<ComplexPoly, ModuliError> {
    if n < 1 || kappa.len() + 1 != n {
        return Err(ModuliError::KappaCount { expected: n.saturating_sub(1), got: kappa.len() });
    }
    let sigma = elementary_symmetric(kappa);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    for l in 1..n {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[n - l] = sigma[l] * (sign * n as f64 / (n - l) as f64);
    }
    coeffs[0] = sigma_n * if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(ComplexPoly::new(coeffs))
}

/// Default tolerance for deciding equality of configurations.
pub const EQUIV_TOL: ComplexTol = ComplexTol::new(1e-8, 1e-8);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equivalent: bool,
    /// Maps the first configuration onto the second.
    pub witness: Option<Transformation>,
}

impl Equivalence {
    fn yes(t: Transformation) -> Self {
        Self { equivalent: true, witness: Some(t) }
    }

    fn no() -> Self {
        Self { equivalent: false, witness: None }
    }
}

/// Decide whether `b` is in the orbit of `a` under the group of `germ_type`.
pub fn equivalent(a: &Configuration, b: &Configuration, germ_type: GermType) -> Result<Equivalence, ModuliError> {
    equivalent_with(a, b, germ_type, EQUIV_TOL)
}

pub fn equivalent_with(
    a: &Configuration,
    b: &Configuration,
    germ_type: GermType,
    tol: ComplexTol,
) -> Result<Equivalence, ModuliError> {
    if a.n() != b.n() {
        return Err(ModuliError::SizeMismatch(a.n(), b.n()));
    }
    if a.space != b.space {
        return Err(ModuliError::WrongSpace { expected: a.space, got: b.space });
    }
    match germ_type {
        GermType::III => Ok(scaling_match(&a.points, &b.points, tol)
            .map_or_else(Equivalence::no, |s| Equivalence::yes(Transformation::Scaling { a: s }))),
        GermType::II => {
            let n = a.points.len() as f64;
            let (ma, mb) = (a.sum() / n, b.sum() / n);
            let ca: Vec<_> = a.points.iter().map(|z| z - ma).collect();
            let cb: Vec<_> = b.points.iter().map(|z| z - mb).collect();
            // comparisons after centering are against the original scale
            let scale = tol::max_norm(&a.points).max(tol::max_norm(&b.points)).max(1.0);
            let ctol = ComplexTol::new(tol.atol * scale, tol.rtol);
            Ok(scaling_match(&ca, &cb, ctol)
                .map_or_else(Equivalence::no, |s| Equivalence::yes(Transformation::Affine { a: s, b: mb - s * ma })))
        }
        GermType::I => Ok(mobius_match(&a.p1_points(), &b.p1_points(), tol.atol + tol.rtol)),
    }
}

/// Some `s ≠ 0` with `b = s a` as multisets.
fn scaling_match(a: &[Complex64], b: &[Complex64], tol: ComplexTol) -> Option<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let amax = tol::max_norm(a);
    let bmax = tol::max_norm(b);
    if amax <= tol.atol || bmax <= tol.atol {
        // only the all-zero configuration (n = 1 after centering)
        return (amax <= tol.atol && bmax <= tol.atol).then_some(one);
    }
    let pivot = b[tol::max_order_index(b, 0.0).expect("nonempty")];
    a.iter().filter(|z| z.norm() > tol.atol).map(|&z| pivot / z).find(|&s| {
        let scaled: Vec<_> = a.iter().map(|z| z * s).collect();
        multiset_eq(&scaled, b, tol)
    })
}

fn mobius_match(a: &[P1Point], b: &[P1Point], tol: f64) -> Equivalence {
    let n = a.len();
    if n == 0 {
        return Equivalence::yes(Transformation::Mobius { m: identity() });
    }
    if n < 3 {
        // sharply 3-transitive: pad both sides with auxiliary points
        let (pa, pb) = (pad_to_three(a), pad_to_three(b));
        let ma = to_standard_triple(pa[0], pa[1], pa[2]);
        let mb = to_standard_triple(pb[0], pb[1], pb[2]);
        let m = mobius_compose(&mobius_inverse(&mb), &ma);
        return Equivalence::yes(Transformation::Mobius { m });
    }
    let mb = to_standard_triple(b[0], b[1], b[2]);
    let target: Vec<P1Point> = b.iter().map(|&z| mobius_apply(&mb, z)).collect();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k {
                    continue;
                }
                let ma = to_standard_triple(a[i], a[j], a[k]);
                let image: Vec<P1Point> = a.iter().map(|&z| mobius_apply(&ma, z)).collect();
                if tol::multiset_match_by(&image, &target, |x, y| x.chordal(y) <= tol) {
                    let m = mobius_compose(&mobius_inverse(&mb), &ma);
                    return Equivalence::yes(Transformation::Mobius { m });
                }
            }
        }
    }
    Equivalence::no()
}

fn identity() -> Mat2 {
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    [[one, zero], [zero, one]]
}

fn pad_to_three(points: &[P1Point]) -> Vec<P1Point> {
    let mut out = points.to_vec();
    let mut candidates =
        std::iter::once(P1Point::Infinity).chain((0..).map(|k| P1Point::Finite(Complex64::new(k as f64, 0.0))));
    while out.len() < 3 {
        let c = candidates.next().expect("infinite candidate stream");
        if out.iter().all(|p| p.chordal(c) > 1e-6) {
            out.push(c);
        }
    }
    out
}

/// True when `v = ω^s u` as multisets for some `n`-th root of unity `ω^s`.
pub fn zn_orbit_equal(u: &[Complex64], v: &[Complex64], n: usize, tol: ComplexTol) -> bool {
    u.len() == v.len()
        && (0..n).any(|s| {
            let w = root_of_unity(n, s);
            let rotated: Vec<_> = u.iter().map(|z| z * w).collect();
            multiset_eq(&rotated, v, tol)
        })
}

/// The exponent `s` with `v = ω^s u` entrywise, if any.
pub fn zn_orbit_shift(u: &[Complex64], v: &[Complex64], n: usize, tol: ComplexTol) -> Option<usize> {
    if u.len() != v.len() {
        return None;
    }
    (0..n).find(|&s| {
        let w = root_of_unity(n, s);
        u.iter().zip(v).all(|(a, b)| tol.eq(a * w, *b))
    })
}

/// Preferred member of the ordered `ℤ_n` orbit of `u`: the one with the
/// smallest total imaginary part, ties broken towards the larger real part
/// of the first coordinate that differs.
pub fn zn_orbit_representative(u: &[Complex64], n: usize) -> (usize, Vec<Complex64>) {
    let scale = tol::max_norm(u).max(1.0);
    let unit = GRID * scale;
    (0..n)
        .map(|s| {
            let w = root_of_unity(n, s);
            (s, u.iter().map(|z| z * w).collect::<Vec<_>>())
        })
        .min_by(|(_, a), (_, b)| {
            let ia: f64 = a.iter().map(|z| z.im.abs()).sum();
            let ib: f64 = b.iter().map(|z| z.im.abs()).sum();
            ((ia / unit).round() as i64).cmp(&((ib / unit).round() as i64)).then_with(|| {
                let ka: Vec<_> = a.iter().map(|&z| tol::snap(z, unit)).collect();
                let kb: Vec<_> = b.iter().map(|&z| tol::snap(z, unit)).collect();
                kb.cmp(&ka)
            })
        })
        .expect("n >= 1")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub points: Vec<Complex64>,
    pub key: CanonicalKey,
}

/// Representative invariant under the group of `germ_type` and under
/// relabelling. Type III: scale the maximal point (modulus, then argument)
/// to 1 and sort. Type II: center first.
pub fn canonical_form(c: &Configuration, germ_type: GermType) -> Result<CanonicalForm, ModuliError> {
    let base = match germ_type {
        GermType::I => return Err(ModuliError::Unsupported(GermType::I)),
        GermType::II => center(c)?.points,
        GermType::III => c.points.clone(),
    };
    let mut points = match tol::max_order_index(&base, 1e-9) {
        Some(i) if base[i].norm() > 0.0 => {
            let pivot = base[i];
            base.iter().map(|z| z / pivot).collect()
        }
        _ => base,
    };
    tol::sort_canonical(&mut points, GRID);
    let key = CanonicalKey::new(format!("config/{germ_type}/{}", points.len()), &points, GRID);
    Ok(CanonicalForm { points, key })
}
