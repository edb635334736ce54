//! Dense univariate polynomials over `Complex64`.
//!
//! Coefficients are stored in ascending order, index `l` holding the
//! coefficient of `t^l`. Root finding uses simultaneous Aberth–Ehrlich
//! iteration followed by clustering of near-coincident roots.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tol::{self, GRID};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("leading coefficient must be nonzero")]
    ZeroLeading,
    #[error("polynomial of degree {got} given, at least {needed} required")]
    DegreeTooLow { needed: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl TryFrom<Vec<Complex64>> for ComplexPoly {
    type Error = std::convert::Infallible;

    fn try_from(coeffs: Vec<Complex64>) -> Result<Self, Self::Error> {
        Ok(Self::new(coeffs))
    }
}

impl From<ComplexPoly> for Vec<Complex64> {
    fn from(p: ComplexPoly) -> Self {
        p.coeffs
    }
}

impl ComplexPoly {
    /// Builds a polynomial from ascending coefficients, dropping exact zero
    /// leading terms.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![])
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `c * t^k`
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// Vieta expansion of `leading * prod (t - r)`.
    pub fn from_roots(roots: &[Complex64], leading: Complex64) -> Result<Self, PolyError> {
        if leading == Complex64::new(0.0, 0.0) {
            return Err(PolyError::ZeroLeading);
        }
        let sigma = elementary_symmetric(roots);
        let n = roots.len();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        for (j, s) in sigma.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[n - j] = leading * s * sign;
        }
        Ok(Self::new(coeffs))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex64::new(0.0, 0.0)
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().expect("coefficient vector is never empty")
    }

    /// Coefficient of `t^k`, zero past the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Complex64::new(1.0, 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, t: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::zero();
        }
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(l, &c)| c * l as f64).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Divide through by the leading coefficient.
    pub fn monic(&self) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroLeading);
        }
        Ok(self.scale(self.leading().inv()))
    }

    /// Largest coefficient modulus.
    pub fn coeff_norm(&self) -> f64 {
        tol::max_norm(&self.coeffs)
    }

    /// Replace coefficients below `rel * coeff_norm()` by exact zeros.
    pub fn cleaned(&self, rel: f64) -> Self {
        let floor = rel * self.coeff_norm();
        Self::new(self.coeffs.iter().map(|&c| if c.norm() <= floor { Complex64::new(0.0, 0.0) } else { c }).collect())
    }

    /// `sum |a_l| |t|^l`, the natural scale of `|p(t)|` rounding errors.
    pub fn abs_eval(&self, t: Complex64) -> f64 {
        let r = t.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn roots(&self, cfg: &RootConfig) -> Result<RootMultiset, PolyError> {
        if self.degree() == 0 {
            return Err(PolyError::DegreeTooLow { needed: 1, got: 0 });
        }
        Ok(aberth_roots(self, cfg))
    }
}

impl fmt::Display for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (l, c) in self.coeffs.iter().enumerate().rev() {
            if *c == Complex64::new(0.0, 0.0) && self.degree() > 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match l {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})t")?,
                _ => write!(f, "({c})t^{l}")?,
            }
        }
        Ok(())
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;

    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..n).map(|l| self.coeff(l) + rhs.coeff(l)).collect())
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;

    fn neg(self) -> ComplexPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;

    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        self + &(-rhs)
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;

    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

/// `(σ_0, σ_1, …, σ_n)` of the given points, built by multiplying in one
/// linear factor at a time.
pub fn elementary_symmetric(points: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); points.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (i, &x) in points.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            let prev = e[k - 1];
            e[k] += x * prev;
        }
    }
    e
}

/// Determinant of the Sylvester matrix of `p` and `q`.
pub fn resultant(p: &ComplexPoly, q: &ComplexPoly) -> Complex64 {
    if p.is_zero() || q.is_zero() {
        return Complex64::new(0.0, 0.0);
    }
    let (m, n) = (p.degree(), q.degree());
    if m == 0 {
        return p.coeff(0).powu(n as u32);
    }
    if n == 0 {
        return q.coeff(0).powu(m as u32);
    }
    sylvester_matrix(p, q).determinant()
}

/// Rows `0..n` carry the shifted coefficients of `p` (descending), rows
/// `n..n+m` those of `q`.
pub fn sylvester_matrix(p: &ComplexPoly, q: &ComplexPoly) -> DMatrix<Complex64> {
    let (m, n) = (p.degree(), q.degree());
    let size = m + n;
    let mut s = DMatrix::from_element(size, size, Complex64::new(0.0, 0.0));
    for row in 0..n {
        for k in 0..=m {
            s[(row, row + k)] = p.coeff(m - k);
        }
    }
    for row in 0..m {
        for k in 0..=n {
            s[(n + row, row + k)] = q.coeff(n - k);
        }
    }
    s
}

/// Settings for [`ComplexPoly::roots`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootConfig {
    pub max_iterations: usize,
    /// Relative Aberth correction below which a root counts as converged.
    pub epsilon: f64,
    /// Roots closer than this (times `max(1, max |root|)`) are merged.
    pub cluster_radius: f64,
    /// Coefficients below this fraction of the largest one are treated as
    /// rounding noise and set to zero before solving.
    pub coeff_floor: f64,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self { max_iterations: 500, epsilon: 1e-14, cluster_radius: 1e-6, coeff_floor: 1e-14 }
    }
}

/// Roots with multiplicity. Clustered roots are replaced by their centroid
/// and repeated once per member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootMultiset {
    roots: Vec<Complex64>,
    pub tolerance: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl RootMultiset {
    pub fn from_values(mut roots: Vec<Complex64>, tolerance: f64) -> Self {
        tol::sort_canonical(&mut roots, GRID);
        Self { roots, tolerance, converged: true, iterations: 0 }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.roots.iter()
    }

    /// Distinct roots with multiplicities, in canonical order.
    pub fn clusters(&self) -> Vec<(Complex64, usize)> {
        let mut out: Vec<(Complex64, usize)> = Vec::new();
        for &r in &self.roots {
            match out.iter_mut().find(|(c, _)| *c == r) {
                Some((_, m)) => *m += 1,
                None => out.push((r, 1)),
            }
        }
        out
    }

    pub fn has_multiple(&self) -> bool {
        self.clusters().iter().any(|&(_, m)| m > 1)
    }
}

fn fujiwara_bound(coeffs: &[Complex64]) -> f64 {
    let d = coeffs.len() - 1;
    let lead = coeffs[d].norm();
    (1..=d)
        .map(|k| {
            let mut a = coeffs[d - k].norm() / lead;
            if k == d {
                a /= 2.0;
            }
            a.powf(1.0 / k as f64)
        })
        .fold(0.0, f64::max)
        * 2.0
}

fn aberth_roots(p: &ComplexPoly, cfg: &RootConfig) -> RootMultiset {
    let zero = Complex64::new(0.0, 0.0);
    let cleaned = p.cleaned(cfg.coeff_floor);
    // exact zero roots are split off first
    let shift = cleaned.coeffs.iter().take_while(|c| **c == zero).count();
    let reduced = ComplexPoly::new(cleaned.coeffs[shift..].to_vec());
    let mut roots = vec![zero; shift];
    let mut iterations = 0;
    let mut converged = true;

    let d = reduced.degree();
    if d == 1 {
        roots.push(-reduced.coeff(0) / reduced.coeff(1));
    } else if d > 1 {
        let dp = reduced.derivative();
        let radius = fujiwara_bound(&reduced.coeffs).max(f64::MIN_POSITIVE);
        let centre = -reduced.coeff(d - 1) / (reduced.leading() * d as f64);
        let mut z: Vec<Complex64> = (0..d)
            .map(|j| {
                let theta = std::f64::consts::TAU * j as f64 / d as f64 + 0.4;
                centre + Complex64::from_polar(radius * 0.5, theta)
            })
            .collect();
        let mut done = vec![false; d];
        converged = false;
        while iterations < cfg.max_iterations {
            iterations += 1;
            for k in 0..d {
                if done[k] {
                    continue;
                }
                let pz = reduced.eval(z[k]);
                if pz == zero {
                    done[k] = true;
                    continue;
                }
                let ratio = pz / dp.eval(z[k]);
                let repulsion: Complex64 = (0..d).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
                let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
                if !w.is_finite() {
                    continue;
                }
                z[k] -= w;
                if w.norm() <= cfg.epsilon * (1.0 + z[k].norm()) {
                    done[k] = true;
                }
            }
            if done.iter().all(|&x| x) {
                converged = true;
                break;
            }
        }
        if !converged {
            // stalled at rounding level: accept when every residual is
            // within the evaluation error bound
            let bound = 64.0 * d as f64 * f64::EPSILON;
            converged = z.iter().all(|&r| r.is_finite() && reduced.eval(r).norm() <= bound * reduced.abs_eval(r));
        }
        roots.extend(z);
    }

    let scale = tol::max_norm(&roots).max(1.0);
    let merged = cluster_mean(&roots, cfg.cluster_radius * scale);
    let mut out = RootMultiset::from_values(merged, cfg.cluster_radius);
    out.converged = converged;
    out.iterations = iterations;
    out
}

/// Single-linkage clustering; each member is replaced by its cluster mean.
pub(crate) fn cluster_mean(points: &[Complex64], radius: f64) -> Vec<Complex64> {
    let labels = cluster_labels(points, |a, b| (a - b).norm() <= radius);
    let mut out = points.to_vec();
    let groups = labels.iter().copied().max().map_or(0, |m| m + 1);
    for g in 0..groups {
        let members: Vec<usize> = (0..points.len()).filter(|&i| labels[i] == g).collect();
        if members.len() > 1 {
            let mean = members.iter().map(|&i| points[i]).sum::<Complex64>() / members.len() as f64;
            for i in members {
                out[i] = mean;
            }
        }
    }
    out
}

/// Connected components of the "close" relation, labelled in order of first
/// appearance.
pub(crate) fn cluster_labels<T: Copy>(points: &[T], close: impl Fn(T, T) -> bool) -> Vec<usize> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if close(points[i], points[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    let mut root_label = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_label[r] == usize::MAX {
            root_label[r] = next;
            next += 1;
        }
        labels[i] = root_label[r];
    }
    labels
}
