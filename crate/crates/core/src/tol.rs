//! Scale-aware comparisons and the deterministic ordering used for
//! canonical output.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default grid spacing for canonical keys (applied to normalized data).
pub const GRID: f64 = 1e-7;

/// Mixed absolute/relative tolerance for complex equality.
///
/// Two scalars are equal when `|a - b| <= atol + rtol * max(|a|, |b|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexTol {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for ComplexTol {
    fn default() -> Self {
        Self { atol: 1e-9, rtol: 1e-9 }
    }
}

impl ComplexTol {
    pub const fn new(atol: f64, rtol: f64) -> Self {
        Self { atol, rtol }
    }

    /// Same value for both components.
    pub const fn uniform(tol: f64) -> Self {
        Self { atol: tol, rtol: tol }
    }

    pub fn eq(&self, a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= self.atol + self.rtol * a.norm().max(b.norm())
    }

    pub fn is_zero(&self, a: Complex64) -> bool {
        a.norm() <= self.atol
    }
}

/// Snap a scalar to the grid of spacing `unit`.
pub fn snap(z: Complex64, unit: f64) -> (i64, i64) {
    ((z.re / unit).round() as i64, (z.im / unit).round() as i64)
}

/// Snap a nonzero scalar on a relative grid: `(ln |z|, arg z)` in units of
/// `unit`, with the argument taken modulo a full turn. Zero maps to
/// `(i64::MIN, 0)`.
pub fn snap_log_polar(z: Complex64, unit: f64) -> (i64, i64) {
    if z.norm() == 0.0 {
        return (i64::MIN, 0);
    }
    let turn = (std::f64::consts::TAU / unit).round() as i64;
    ((z.norm().ln() / unit).round() as i64, ((arg_positive(z) / unit).round() as i64).rem_euclid(turn))
}

/// Lexicographic (Re, Im) order after snapping both values to the grid.
pub fn grid_cmp(a: Complex64, b: Complex64, unit: f64) -> Ordering {
    snap(a, unit).cmp(&snap(b, unit))
}

/// Sort scalars in place by [`grid_cmp`], falling back to the raw values so
/// the order is total.
pub fn sort_canonical(values: &mut [Complex64], unit: f64) {
    values
        .sort_by(|a, b| grid_cmp(*a, *b, unit).then_with(|| a.re.total_cmp(&b.re)).then_with(|| a.im.total_cmp(&b.im)));
}

/// Argument in `[0, 2π)`.
pub fn arg_positive(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Index of the element that is maximal under (modulus, then argument in
/// `[0, 2π)`) order. Moduli within `rel` of each other count as ties and
/// the smaller argument wins.
pub fn max_order_index(values: &[Complex64], rel: f64) -> Option<usize> {
    let max_mod = values.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() >= max_mod * (1.0 - rel))
        .min_by(|(_, a), (_, b)| arg_positive(**a).total_cmp(&arg_positive(**b)))
        .map(|(i, _)| i)
}

/// Greedy tolerance matching of two multisets. Returns true when every
/// element of `a` pairs with a distinct element of `b`.
pub fn multiset_eq(a: &[Complex64], b: &[Complex64], tol: ComplexTol) -> bool {
    multiset_match_by(a, b, |x, y| tol.eq(x, y))
}

pub(crate) fn multiset_match_by<T: Copy>(a: &[T], b: &[T], mut same: impl FnMut(T, T) -> bool) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for &x in a {
        for (j, &y) in b.iter().enumerate() {
            if !used[j] && same(x, y) {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Largest modulus in a slice, or zero when empty.
pub fn max_norm(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Grid-snapped canonical representative, usable as a hash key. The label
/// records what was canonicalized (space, type, weights) so keys of
/// incomparable objects never collide.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalKey {
    pub label: String,
    pub grid: Vec<(i64, i64)>,
}

impl CanonicalKey {
    pub fn new(label: impl Into<String>, values: &[Complex64], unit: f64) -> Self {
        Self { label: label.into(), grid: values.iter().map(|&z| snap(z, unit)).collect() }
    }

    /// Key on the relative grid of [`snap_log_polar`]; entries are sorted so
    /// the key does not depend on the order of `values`.
    pub fn log_polar(label: impl Into<String>, values: &[Complex64], unit: f64) -> Self {
        let mut grid: Vec<_> = values.iter().map(|&z| snap_log_polar(z, unit)).collect();
        grid.sort();
        Self { label: label.into(), grid }
    }

    /// Stable hex digest of the key.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.label.as_bytes());
        for (a, b) in &self.grid {
            h.update(a.to_le_bytes());
            h.update(b.to_le_bytes());
        }
        hex::encode(&h.finalize()[..16])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tolerance_is_scale_aware() {
        let tol = ComplexTol::default();
        assert!(tol.eq(c(1e6, 0.0), c(1e6 + 1e-4, 0.0)));
        assert!(!tol.eq(c(1.0, 0.0), c(1.0 + 1e-6, 0.0)));
        assert!(tol.is_zero(c(1e-10, 0.0)));
    }

    #[test]
    fn multiset_respects_multiplicity() {
        let tol = ComplexTol::default();
        let a = [c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        let b = [c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        let d = [c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)];
        assert!(multiset_eq(&a, &b, tol));
        assert!(!multiset_eq(&a, &d, tol));
    }

    #[test]
    fn max_order_breaks_ties_by_argument() {
        let v = [c(0.0, 1.0), c(1.0, 0.0), c(0.5, 0.0)];
        assert_eq!(max_order_index(&v, 1e-12), Some(1));
        assert_eq!(max_order_index(&[], 1e-12), None);
    }

    #[test]
    fn log_polar_snap_wraps_the_argument() {
        let above = Complex64::from_polar(2.0, 1e-12);
        let below = Complex64::from_polar(2.0, -1e-12);
        assert_eq!(snap_log_polar(above, GRID), snap_log_polar(below, GRID));
        assert_ne!(snap_log_polar(c(1.0, 0.0), GRID), snap_log_polar(c(1.0 + 1e-6, 0.0), GRID));
        assert_eq!(snap_log_polar(c(0.0, 0.0), GRID), (i64::MIN, 0));
    }

    #[test]
    fn negative_zero_snaps_to_zero() {
        assert_eq!(snap(c(-0.0, -1e-12), GRID), (0, 0));
    }
}
