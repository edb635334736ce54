//! Sampled families of germs: does a family with constant invariant stay
//! inside one analytic class?
//!
//! Samples are first moved to the normalized slice used by the fiber
//! systems (centered for type II, unit product for type III), so that the
//! scalings which act trivially on analytic types also act trivially on
//! the compared invariants.

use qhm_core::hp::{hp_equal_with, HpError};
use qhm_core::moduli::{equivalent_with, ModuliError};
use qhm_core::{center, hp_canonical, hp_invariant, unit_product, Configuration, GermType, HPInvariant, QHFunction};
use serde::Serialize;
use thiserror::Error;

use crate::RunConfig;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("a family needs at least one sample")]
    Empty,
    #[error("families of type I germs have no invariant to compare")]
    Unsupported,
    #[error("sample {index} has type {got_type} and n = {got_n}, expected type {expected_type} and n = {expected_n}")]
    Mixed { index: usize, expected_type: GermType, expected_n: usize, got_type: GermType, got_n: usize },
    #[error("sample {index} has weights ({p}, {q}), expected ({ep}, {eq})")]
    Weights { index: usize, p: u32, q: u32, ep: u32, eq: u32 },
    #[error(transparent)]
    Hp(#[from] HpError),
    #[error(transparent)]
    Moduli(#[from] ModuliError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyVerdict {
    /// Constant invariant and a single analytic class.
    Trivial,
    NonConstantInvariant,
    /// Constant invariant but several analytic classes among the samples.
    Inconsistent,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub germ_type: GermType,
    pub n: usize,
    pub parameters: Vec<f64>,
    pub invariant_constant: bool,
    /// Samples grouped by equal invariant.
    pub hp_partition: Vec<Vec<usize>>,
    /// Samples grouped by analytic class.
    pub analytic_partition: Vec<Vec<usize>>,
    /// Key of each sample's invariant.
    pub keys: Vec<String>,
    pub verdict: FamilyVerdict,
    pub message: String,
}

fn normalized(f: &QHFunction) -> Result<QHFunction, FamilyError> {
    let c = match f.germ_type() {
        GermType::II => center(&Configuration::plane(f.lambdas().to_vec())?)?,
        _ => Configuration::punctured(f.lambdas().to_vec())?,
    };
    let c = unit_product(&c)?;
    Ok(f.with_lambdas(c.points().to_vec()).expect("a normalization of distinct roots keeps them distinct"))
}

/// Greedy grouping under `same`; each group is represented by its first
/// member.
fn partition(
    len: usize,
    mut same: impl FnMut(usize, usize) -> Result<bool, FamilyError>,
) -> Result<Vec<Vec<usize>>, FamilyError> {
    let mut groups: Vec<Vec<usize>> = vec![];
    'outer: for i in 0..len {
        for g in groups.iter_mut() {
            if same(g[0], i)? {
                g.push(i);
                continue 'outer;
            }
        }
        groups.push(vec![i]);
    }
    Ok(groups)
}

/// Compare invariants and analytic classes along a sampled family.
pub fn family_scan(samples: &[(f64, QHFunction)], cfg: &RunConfig) -> Result<FamilyReport, FamilyError> {
    let Some((_, first)) = samples.first() else { return Err(FamilyError::Empty) };
    let (germ_type, n, w) = (first.germ_type(), first.n(), first.weights());
    if germ_type == GermType::I {
        return Err(FamilyError::Unsupported);
    }
    for (index, (_, f)) in samples.iter().enumerate() {
        if f.germ_type() != germ_type || f.n() != n {
            return Err(FamilyError::Mixed {
                index,
                expected_type: germ_type,
                expected_n: n,
                got_type: f.germ_type(),
                got_n: f.n(),
            });
        }
        if f.weights() != w {
            let (p, q) = (f.weights().p(), f.weights().q());
            return Err(FamilyError::Weights { index, p, q, ep: w.p(), eq: w.q() });
        }
    }
    let germs: Vec<QHFunction> = samples.iter().map(|(_, f)| normalized(f)).collect::<Result<_, _>>()?;
    let invariants: Vec<HPInvariant> = germs.iter().map(hp_invariant).collect::<Result<_, _>>()?;
    let hp_tol = cfg.hp_tol();
    let hp_partition = partition(germs.len(), |a, b| Ok(hp_equal_with(&invariants[a], &invariants[b], hp_tol)?))?;
    let configs: Vec<Configuration> = germs.iter().map(Configuration::of_germ).collect();
    let eq_tol = cfg.equiv_tol();
    let analytic_partition =
        partition(germs.len(), |a, b| Ok(equivalent_with(&configs[a], &configs[b], germ_type, eq_tol)?.equivalent))?;
    let invariant_constant = hp_partition.len() == 1;
    let (verdict, message) = match (invariant_constant, analytic_partition.len()) {
        (true, 1) => (FamilyVerdict::Trivial, "trivial family: consistent with Theorem".to_string()),
        (true, k) => {
            (FamilyVerdict::Inconsistent, format!("constant invariant but {k} analytic classes among the samples"))
        }
        (false, _) => (
            FamilyVerdict::NonConstantInvariant,
            format!("invariant not constant: {} classes among {} samples", hp_partition.len(), germs.len()),
        ),
    };
    Ok(FamilyReport {
        germ_type,
        n,
        parameters: samples.iter().map(|(t, _)| *t).collect(),
        invariant_constant,
        hp_partition,
        analytic_partition,
        keys: invariants.iter().map(|h| hp_canonical(h).key.fingerprint()).collect(),
        verdict,
        message,
    })
}
