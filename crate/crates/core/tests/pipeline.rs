//! End-to-end runs through the public API: germ, invariant, fiber, classes.

use proptest::prelude::*;
use qhm_core::qhfunc::f_of_q;
use qhm_core::upsilon::classes_unordered;
use qhm_core::{
    classes_from_fiber, equivalent, forward_target, hp_equal, hp_invariant, is_generic, solve_fiber, Complex64,
    ComplexPoly, Configuration, FiberTarget, GermType, QHFunction, SolverConfig, Weights,
};

fn r(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn cubic(w: Weights) -> QHFunction {
    f_of_q(&ComplexPoly::from_real(&[-1.0, 24.0 / 9.0, -33.0 / 9.0, 1.0]), w).unwrap()
}

#[test]
fn cubic_invariant_has_three_classes() {
    let f = cubic(Weights::new(2, 3).unwrap());
    let image = forward_target(&f).unwrap();
    let fiber = solve_fiber(&image.target, &SolverConfig::default()).unwrap();
    assert_eq!(fiber.finite().count(), 9);
    let classes = classes_from_fiber(&fiber, r(1.0)).unwrap();
    assert_eq!(classes.len(), 3);

    let h = hp_invariant(&f).unwrap();
    let germs: Vec<QHFunction> =
        classes.iter().map(|c| QHFunction::commode(f.weights(), c.lambdas.clone()).unwrap()).collect();
    for g in &germs {
        assert!(hp_equal(&h, &hp_invariant(g).unwrap()).unwrap());
    }
    let original = Configuration::of_germ(&f);
    let hits = germs
        .iter()
        .filter(|g| equivalent(&original, &Configuration::of_germ(g), GermType::III).unwrap().equivalent)
        .count();
    assert_eq!(hits, 1);
}

#[test]
fn other_weights_give_the_same_fiber() {
    // the fiber depends on Q only, so any type III weights agree
    let a = forward_target(&cubic(Weights::new(2, 3).unwrap())).unwrap();
    let b = forward_target(&cubic(Weights::new(3, 7).unwrap())).unwrap();
    assert_eq!(a.target, b.target);
}

#[test]
fn unordered_classes_contain_the_ordered_ones() {
    let target = FiberTarget::new(GermType::III, 3, vec![r(-21.0 / 9.0), r(-329.0 / 729.0)]).unwrap();
    let cfg = SolverConfig::default();
    let ordered = classes_from_fiber(&solve_fiber(&target, &cfg).unwrap(), r(1.0)).unwrap();
    let unordered = classes_unordered(&target, &cfg).unwrap();
    assert!(unordered.len() >= ordered.len());
    for c in &ordered {
        let a = Configuration::punctured(c.lambdas.clone()).unwrap();
        assert!(unordered.iter().any(|u| {
            let b = Configuration::punctured(u.lambdas.clone()).unwrap();
            equivalent(&a, &b, GermType::III).unwrap().equivalent
        }));
    }
}

fn lambdas(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64).prop_map(|(a, b)| Complex64::new(a, b)), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generic_germs_have_simple_fibers(l in lambdas(3..=4), type_iii in any::<bool>()) {
        let w = if type_iii { Weights::new(2, 3).unwrap() } else { Weights::new(1, 2).unwrap() };
        let f = QHFunction::commode(w, l);
        prop_assume!(f.is_ok());
        let f = f.unwrap();
        let g = is_generic(&f);
        prop_assume!(g.generic && !g.report.borderline);
        let image = forward_target(&f).unwrap();
        let fiber = solve_fiber(&image.target, &SolverConfig::default()).unwrap();
        prop_assert!(!fiber.degenerate, "{:?}", fiber.degeneracy);
        prop_assert!(fiber.finite().all(|s| s.multiplicity == 1 && !s.singular));
        prop_assert_eq!(fiber.finite().count(), image.target.bezout());
    }
}
