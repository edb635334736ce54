//! Quasi-homogeneous function germs in two variables: analytic types,
//! the bi-Lipschitz invariant built from the polar curve, and the fibers
//! of the map from critical points to that invariant.

pub mod genericity;
pub mod homotopy;
pub mod hp;
pub mod moduli;
pub mod poly;
pub mod qhfunc;
pub mod tol;
pub mod upsilon;

pub use num_complex::Complex64;

pub use genericity::{
    bifurcation_report, in_local_bifurcation, in_semilocal_bifurcation, is_generic, BifurcationReport, BifurcationTol,
    Genericity,
};
pub use homotopy::{PathStatus, TrackerConfig};
pub use hp::{hp_canonical, hp_equal, hp_invariant, HPInvariant, HpError};
pub use moduli::{
    canonical_form, center, equivalent, kappa_of_lambda, lambda_of_kappa, unit_product, CanonicalForm, Configuration,
    Equivalence, ModuliError, P1Point, Space, Transformation,
};
pub use poly::{ComplexPoly, PolyError, RootConfig, RootMultiset};
pub use qhfunc::{classify, GermError, GermType, QHFunction, Weights};
pub use tol::{CanonicalKey, ComplexTol};
pub use upsilon::{
    classes_from_fiber, count_classes, forward_target, solve_fiber, ClassCount, ClassRecord, Fiber, FiberSolution,
    FiberTarget, SolverConfig, UpsilonError,
};
