//! The Henry–Parusiński invariant of type II and III germs: the values of
//! `Q_λ` at its critical points (and at 0 for type III), taken modulo the
//! weighted scaling action.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qhfunc::{commode_reduce, is_zero_kappa, polar_curve, q_of_f, GermType, QHFunction, Weights};
use crate::tol::{self, multiset_eq, CanonicalKey, ComplexTol, GRID};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HpError {
    #[error("the invariant is not defined for reduced homogeneous germs")]
    Unsupported,
    #[error("invariants of {a} and {b} are not comparable")]
    Incomparable { a: String, b: String },
}

/// Tolerance used by [`hp_equal`]. Entries are compared relatively; the
/// absolute part is scaled by the largest entry of the multiset.
pub const HP_TOL: ComplexTol = ComplexTol::new(1e-12, 1e-8);

fn scaled_tol(tol: ComplexTol, a: &[Complex64], b: &[Complex64]) -> ComplexTol {
    ComplexTol::new(tol.atol * tol::max_norm(a).max(tol::max_norm(b)), tol.rtol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HpRecord", into = "HpRecord")]
pub struct HPInvariant {
    germ_type: GermType,
    weights: Weights,
    n: usize,
    rho0: Option<Complex64>,
    rhos: Vec<Complex64>,
    zero_branches: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HpRecord {
    #[serde(rename = "type")]
    germ_type: GermType,
    p: u32,
    q: u32,
    n: usize,
    rho0: Option<Complex64>,
    rhos: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    zero_branches: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl From<HPInvariant> for HpRecord {
    fn from(h: HPInvariant) -> Self {
        HpRecord {
            germ_type: h.germ_type,
            p: h.weights.p(),
            q: h.weights.q(),
            n: h.n,
            rho0: h.rho0,
            rhos: h.rhos,
            zero_branches: h.zero_branches,
        }
    }
}

impl TryFrom<HpRecord> for HPInvariant {
    type Error = String;

    fn try_from(r: HpRecord) -> Result<Self, String> {
        let weights = Weights::new(r.p, r.q).map_err(|e| e.to_string())?;
        HPInvariant::from_parts(weights, r.n, r.rho0, r.rhos, r.zero_branches).map_err(|e| e.to_string())
    }
}

impl HPInvariant {
    /// Build an invariant from raw data. Type III requires `rho0`, type II
    /// forbids it.
    pub fn from_parts(
        weights: Weights,
        n: usize,
        rho0: Option<Complex64>,
        mut rhos: Vec<Complex64>,
        zero_branches: usize,
    ) -> Result<Self, HpError> {
        let germ_type = weights.germ_type();
        let shape_ok = match germ_type {
            GermType::I => return Err(HpError::Unsupported),
            GermType::II => rho0.is_none() && zero_branches == 0 && rhos.len() + 1 == n,
            GermType::III => rho0.is_some() && rhos.len() + zero_branches + 1 == n,
        };
        if !shape_ok {
            return Err(HpError::Incomparable {
                a: format!("type {germ_type} with n = {n}"),
                b: format!("{} critical values", rhos.len()),
            });
        }
        tol::sort_canonical(&mut rhos, GRID);
        Ok(Self { germ_type, weights, n, rho0, rhos, zero_branches })
    }

    pub fn germ_type(&self) -> GermType {
        self.germ_type
    }

    pub fn weights(&self) -> Weights {
        self.weights
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho0(&self) -> Option<Complex64> {
        self.rho0
    }

    /// Critical values, sorted canonically.
    pub fn rhos(&self) -> &[Complex64] {
        &self.rhos
    }

    /// Critical points at 0 merged into the `y = 0` branch (type III only).
    pub fn zero_branches(&self) -> usize {
        self.zero_branches
    }

    /// A critical point at 0 (type III) or a vanishing critical value,
    /// judged after the scaling is removed.
    pub fn is_degenerate(&self) -> bool {
        if self.zero_branches > 0 || self.rho0.is_some_and(|r| r.norm() == 0.0) {
            return true;
        }
        let values = self.normalized_rhos();
        let scale = tol::max_norm(&values);
        values.iter().any(|r| r.norm() <= DEGENERATE_REL * scale)
    }

    /// Contact exponents: `qn` for the `y = 0` branch, `pqn` for the others.
    pub fn h_exponents(&self) -> Vec<u64> {
        let (p, q, n) = (self.weights.p() as u64, self.weights.q() as u64, self.n as u64);
        let y_branch = self.rho0.map(|_| q * n);
        y_branch.into_iter().chain(std::iter::repeat(p * q * n).take(self.rhos.len())).collect()
    }

    /// `c_ℓ = ρ_ℓ / ρ_0`, type III only.
    pub fn c_ratios(&self) -> Option<Vec<Complex64>> {
        self.rho0.map(|r0| self.rhos.iter().map(|r| r / r0).collect())
    }

    /// Image under `ξ`: `ρ_0 ↦ ξ^{qn} ρ_0`, `ρ_ℓ ↦ ξ^{pqn} ρ_ℓ`.
    pub fn scaled(&self, xi: Complex64) -> Self {
        let (p, q, n) = (self.weights.p() as i32, self.weights.q() as i32, self.n as i32);
        let s0 = xi.powi(q * n);
        let s = s0.powi(p);
        Self {
            rho0: self.rho0.map(|r| r * s0),
            rhos: {
                let mut v: Vec<_> = self.rhos.iter().map(|r| r * s).collect();
                tol::sort_canonical(&mut v, GRID);
                v
            },
            ..self.clone()
        }
    }

    fn describe(&self) -> String {
        format!("type {} (p, q, n) = ({}, {}, {})", self.germ_type, self.weights.p(), self.weights.q(), self.n)
    }

    /// Critical values with the scaling removed (type III), or as stored.
    fn normalized_rhos(&self) -> Vec<Complex64> {
        match self.rho0 {
            Some(r0) => {
                let d = r0.powi(self.weights.p() as i32);
                self.rhos.iter().map(|r| r / d).collect()
            }
            None => self.rhos.clone(),
        }
    }
}

/// Critical values below this fraction of the largest count as zero.
const DEGENERATE_REL: f64 = 1e-10;

/// Invariant of a type II or III germ. The flags `m`, `k` are dropped first.
pub fn hp_invariant(f: &QHFunction) -> Result<HPInvariant, HpError> {
    let f = commode_reduce(f);
    let germ_type = f.germ_type();
    if germ_type == GermType::I {
        return Err(HpError::Unsupported);
    }
    let q = q_of_f(&f);
    let polar = polar_curve(&f);
    let scale = tol::max_norm(f.lambdas());
    let (rho0, keep): (_, Vec<Complex64>) = match germ_type {
        // p = 1: the branch κ = 0 is an ordinary polar branch
        GermType::II => (None, polar.kappas.iter().copied().collect()),
        _ => (
            Some(q.eval(Complex64::new(0.0, 0.0))),
            polar.kappas.iter().copied().filter(|k| !is_zero_kappa(*k, scale)).collect(),
        ),
    };
    let zero_branches = polar.kappas.len() - keep.len();
    let rhos = keep.iter().map(|&k| q.eval(k)).collect();
    HPInvariant::from_parts(f.weights(), f.n(), rho0, rhos, zero_branches)
}

/// `ρ_ℓ` as the product `prod_j (κ_ℓ - λ_j)`, an independent evaluation of
/// the same quantity.
pub fn rho_by_product(f: &QHFunction, kappa: Complex64) -> Complex64 {
    f.lambdas().iter().map(|l| kappa - l).product()
}

fn check_comparable(a: &HPInvariant, b: &HPInvariant) -> Result<(), HpError> {
    if a.germ_type != b.germ_type || a.weights != b.weights || a.n != b.n {
        return Err(HpError::Incomparable { a: a.describe(), b: b.describe() });
    }
    Ok(())
}

/// Equality modulo the scaling action.
pub fn hp_equal(a: &HPInvariant, b: &HPInvariant) -> Result<bool, HpError> {
    hp_equal_with(a, b, HP_TOL)
}

pub fn hp_equal_with(a: &HPInvariant, b: &HPInvariant, tol: ComplexTol) -> Result<bool, HpError> {
    check_comparable(a, b)?;
    if a.zero_branches != b.zero_branches {
        return Ok(false);
    }
    Ok(match a.germ_type {
        GermType::III => {
            let (na, nb) = (a.normalized_rhos(), b.normalized_rhos());
            multiset_eq(&na, &nb, scaled_tol(tol, &na, &nb))
        }
        _ => scale_between(&a.rhos, &b.rhos, tol).is_some(),
    })
}

/// Some `s ≠ 0` with `b = s a` as multisets.
pub fn scale_between(a: &[Complex64], b: &[Complex64], tol: ComplexTol) -> Option<Complex64> {
    if a.len() != b.len() {
        return None;
    }
    let Some(ib) = tol::max_order_index(b, 0.0) else {
        return Some(Complex64::new(1.0, 0.0));
    };
    let pivot = b[ib];
    let tol = ComplexTol::new(tol.atol * pivot.norm(), tol.rtol);
    a.iter().filter(|z| z.norm() > 0.0).map(|&z| pivot / z).find(|&s| {
        let scaled: Vec<_> = a.iter().map(|z| z * s).collect();
        multiset_eq(&scaled, b, tol)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HpCanonical {
    /// `(1, ρ_ℓ/ρ_0^p)` for type III, `ρ_ℓ / max-order element` for type II.
    pub values: Vec<Complex64>,
    pub key: CanonicalKey,
    pub degenerate: bool,
}

/// Representative of the scaling class. Degenerate invariants get a key
/// whose label records the zero pattern.
pub fn hp_canonical(a: &HPInvariant) -> HpCanonical {
    let mut values = match a.germ_type {
        GermType::III => a.normalized_rhos(),
        _ => match tol::max_order_index(&a.rhos, 1e-9) {
            Some(i) if a.rhos[i].norm() > 0.0 => {
                let pivot = a.rhos[i];
                a.rhos.iter().map(|r| r / pivot).collect()
            }
            _ => a.rhos.clone(),
        },
    };
    tol::sort_canonical(&mut values, GRID);
    let degenerate = a.is_degenerate();
    let scale = tol::max_norm(&values);
    let zero_pattern: String =
        values.iter().map(|v| if v.norm() <= DEGENERATE_REL * scale { '0' } else { '*' }).collect();
    let mut label = format!("hp/{}/{}/{}/{}", a.germ_type, a.weights.p(), a.weights.q(), a.n);
    if degenerate {
        label.push_str(&format!("/degenerate:{}:{zero_pattern}", a.zero_branches));
    }
    if a.germ_type == GermType::III {
        values.insert(0, Complex64::new(1.0, 0.0));
    }
    let key = CanonicalKey::log_polar(label, &values, GRID);
    HpCanonical { values, key, degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{ComplexPoly, RootConfig};
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn germ(q: &[f64], p: u32, qq: u32) -> QHFunction {
        let lambdas = ComplexPoly::from_real(q).roots(&RootConfig::default()).unwrap().into_vec();
        QHFunction::commode(Weights::new(p, qq).unwrap(), lambdas).unwrap()
    }

    fn f1(p: u32, q: u32) -> QHFunction {
        germ(&[-1.0, 24.0 / 9.0, -33.0 / 9.0, 1.0], p, q)
    }

    fn f2() -> QHFunction {
        germ(&[-1.0, -15.0 / 9.0, -6.0 / 9.0, 1.0], 2, 3)
    }

    fn f3() -> QHFunction {
        germ(&[-1.0, 40.0 / 9.0, 39.0 / 9.0, 1.0], 2, 3)
    }

    fn expected() -> Vec<Complex64> {
        vec![r(-21.0 / 9.0), r(-329.0 / 729.0)]
    }

    #[test]
    fn cubic_example_values() {
        for (p, q) in [(2, 3), (2, 5), (3, 4), (3, 7)] {
            let h = hp_invariant(&f1(p, q)).unwrap();
            assert!(multiset_eq(h.rhos(), &expected(), ComplexTol::new(1e-12, 0.0)));
            assert!((h.rho0().unwrap() - r(-1.0)).norm() < 1e-12);
            assert_eq!(h.h_exponents(), vec![3 * q as u64, 3 * (p * q) as u64, 3 * (p * q) as u64]);
        }
        let a = hp_invariant(&f1(2, 3)).unwrap();
        for g in [f2(), f3()] {
            let b = hp_invariant(&g).unwrap();
            assert!(multiset_eq(b.rhos(), &expected(), ComplexTol::new(1e-12, 0.0)));
            assert!(hp_equal(&a, &b).unwrap());
            assert_eq!(hp_canonical(&a).key, hp_canonical(&b).key);
        }
    }

    #[test]
    fn canonical_cubic_example() {
        let c = hp_canonical(&hp_invariant(&f1(2, 3)).unwrap());
        assert!(!c.degenerate);
        assert!(multiset_eq(&c.values[1..], &expected(), ComplexTol::new(1e-12, 0.0)));
        assert_eq!(c.values[0], r(1.0));
    }

    #[test]
    fn evaluation_matches_product() {
        let f = f1(2, 3);
        for k in polar_curve(&f).kappas.iter() {
            let a = q_of_f(&f).eval(*k);
            let b = rho_by_product(&f, *k);
            assert!((a - b).norm() <= 1e-9 * a.norm());
        }
    }

    #[test]
    fn zero_critical_point_is_flagged() {
        let f = QHFunction::commode(Weights::new(2, 3).unwrap(), vec![r(1.0), r(-1.0)]).unwrap();
        let h = hp_invariant(&f).unwrap();
        assert!(h.rhos().is_empty());
        assert_eq!(h.zero_branches(), 1);
        assert_eq!(h.rho0(), Some(r(-1.0)));
        let c = hp_canonical(&h);
        assert!(c.degenerate && c.key.label.contains("degenerate"));
    }

    #[test]
    fn type_one_is_unsupported() {
        let f = QHFunction::commode(Weights::new(1, 1).unwrap(), vec![r(1.0), r(2.0)]).unwrap();
        assert_eq!(hp_invariant(&f), Err(HpError::Unsupported));
    }

    fn type_ii(rhos: &[f64]) -> HPInvariant {
        let rhos: Vec<_> = rhos.iter().map(|&x| r(x)).collect();
        HPInvariant::from_parts(Weights::new(1, 2).unwrap(), rhos.len() + 1, None, rhos, 0).unwrap()
    }

    #[test]
    fn type_ii_scaling() {
        assert!(hp_equal(&type_ii(&[1.0, 2.0]), &type_ii(&[3.0, 6.0])).unwrap());
        let s = scale_between(&[r(1.0), r(2.0)], &[r(3.0), r(6.0)], HP_TOL).unwrap();
        assert!((s - r(3.0)).norm() < 1e-12);
        assert!(!hp_equal(&type_ii(&[1.0, 2.0]), &type_ii(&[1.0, 3.0])).unwrap());
        let c = hp_canonical(&type_ii(&[2.0, 4.0]));
        assert!(multiset_eq(&c.values, &[r(0.5), r(1.0)], ComplexTol::uniform(1e-15)));
    }

    #[test]
    fn mismatched_invariants_are_incomparable() {
        let a = hp_invariant(&f1(2, 3)).unwrap();
        let b = hp_invariant(&f1(2, 5)).unwrap();
        assert!(matches!(hp_equal(&a, &b), Err(HpError::Incomparable { .. })));
    }

    #[test]
    fn type_ii_sum_relation_for_cubics() {
        // centered, unit product λ: ρ_2 = -ρ_1 - 2
        let cube = |c: Complex64| {
            // λ roots of t^3 + a t - 1
            let q = ComplexPoly::new(vec![r(-1.0), c, r(0.0), r(1.0)]);
            q.roots(&RootConfig::default()).unwrap().into_vec()
        };
        for a in [r(0.3), Complex64::new(-1.2, 0.7), r(5.0)] {
            let f = QHFunction::commode(Weights::new(1, 4).unwrap(), cube(a)).unwrap();
            let h = hp_invariant(&f).unwrap();
            let (r1, r2) = (h.rhos()[0], h.rhos()[1]);
            assert!((r2 + r1 + 2.0).norm() < 1e-10);
        }
    }

    #[test]
    fn serialization_round_trip() {
        let h = hp_invariant(&f1(2, 3)).unwrap();
        let json = serde_json::to_value(&h).unwrap();
        assert_eq!(json["type"], "III");
        assert_eq!(json["p"], 2);
        assert!((json["rho0"][0].as_f64().unwrap() + 1.0).abs() < 1e-12);
        let back: HPInvariant = serde_json::from_value(json).unwrap();
        assert_eq!(back, h);
    }

    fn lambda_strategy(max: usize) -> impl Strategy<Value = Vec<Complex64>> {
        proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 2..=max)
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect::<Vec<_>>())
            .prop_filter("separated, nonzero", |l: &Vec<Complex64>| {
                l.iter().all(|z| z.norm() > 0.1)
                    && (0..l.len()).all(|i| (i + 1..l.len()).all(|j| (l[i] - l[j]).norm() > 0.1))
            })
    }

    fn weights_strategy() -> impl Strategy<Value = Weights> {
        prop_oneof![Just((1, 2)), Just((1, 3)), Just((2, 3)), Just((2, 5)), Just((3, 4))]
            .prop_map(|(p, q)| Weights::new(p, q).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn keys_coincide_with_equality(l in lambda_strategy(5), w in weights_strategy(), m in 0.3..2.0f64, a in 0.0..TAU, perturb in any::<bool>()) {
            let f = QHFunction::commode(w, l).unwrap();
            let h = hp_invariant(&f).unwrap();
            prop_assume!(!h.is_degenerate());
            // a single critical value is always a rescaling of any other
            prop_assume!(h.germ_type() == GermType::III || h.rhos().len() >= 2);
            let mut g = h.scaled(Complex64::from_polar(m, a));
            if perturb {
                g.rhos[0] *= 1.0 + 1e-3;
            }
            let eq = hp_equal(&h, &g).unwrap();
            prop_assert_eq!(eq, !perturb);
            prop_assert_eq!(hp_canonical(&h).key == hp_canonical(&g).key, eq);
            prop_assert!(hp_equal(&g, &h).unwrap() == eq);
            prop_assert!(hp_equal(&h, &h).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn evaluation_identity(l in lambda_strategy(8), w in weights_strategy()) {
            let f = QHFunction::commode(w, l).unwrap();
            let q = q_of_f(&f);
            for k in polar_curve(&f).kappas.iter() {
                let a = q.eval(*k);
                let b = rho_by_product(&f, *k);
                prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-300));
            }
        }

        #[test]
        fn unit_product_rescaling_preserves_the_invariant(l in lambda_strategy(5), w in weights_strategy(), m in 0.3..2.0f64, a in 0.0..TAU) {
            use crate::moduli::{unit_product, Configuration};
            let xi = Complex64::from_polar(m, a);
            let f = QHFunction::commode(w, l.clone()).unwrap();
            let norm = |lam: Vec<Complex64>| unit_product(&Configuration::punctured(lam).unwrap()).unwrap().points().to_vec();
            let f0 = f.with_lambdas(norm(l.clone())).unwrap();
            let f1 = f.with_lambdas(norm(l.iter().map(|z| z * xi).collect())).unwrap();
            let (h0, h1) = (hp_invariant(&f0).unwrap(), hp_invariant(&f1).unwrap());
            prop_assume!(!h0.is_degenerate());
            prop_assert!(hp_equal(&h0, &h1).unwrap());
        }
    }
}
