//! Wire formats for verb payloads. Complex scalars are `[re, im]` pairs.

use qhm_core::qhfunc::f_of_q;
use qhm_core::{Complex64, ComplexPoly, GermError, QHFunction, Weights};
use serde::{Deserialize, Serialize};

/// A germ given either by its roots `lambdas` or by the monic polynomial
/// `poly` (ascending coefficients) whose roots they are.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermInput {
    pub p: u32,
    pub q: u32,
    #[serde(default)]
    pub m: u8,
    #[serde(default)]
    pub k: u8,
    #[serde(default)]
    pub lambdas: Option<Vec<Complex64>>,
    #[serde(default)]
    pub poly: Option<ComplexPoly>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(try_from = "GermInput")]
pub struct Germ(pub QHFunction);

#[derive(Debug, thiserror::Error)]
pub enum GermInputError {
    #[error("give exactly one of `lambdas` and `poly`")]
    Ambiguous,
    #[error(transparent)]
    Germ(#[from] GermError),
}

impl TryFrom<GermInput> for Germ {
    type Error = GermInputError;

    fn try_from(g: GermInput) -> Result<Self, Self::Error> {
        let w = Weights::new(g.p, g.q)?;
        let lambdas = match (g.lambdas, g.poly) {
            (Some(l), None) => l,
            (None, Some(poly)) => f_of_q(&poly, w)?.lambdas().to_vec(),
            _ => return Err(GermInputError::Ambiguous),
        };
        Ok(Germ(QHFunction::new(w, g.m, g.k, lambdas)?))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermPayload {
    pub germ: Germ,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairPayload {
    pub a: Germ,
    pub b: Germ,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetPayload {
    pub target: qhm_core::FiberTarget,
    /// Constant term of the rebuilt `Q` is `(-1)^n sigma_n`.
    #[serde(default = "one")]
    pub sigma_n: Complex64,
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySample {
    pub t: f64,
    pub germ: Germ,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyPayload {
    pub samples: Vec<FamilySample>,
}

/// Per-job overrides in batch mode.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub permute_targets: Option<bool>,
}

/// One line of a batch file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobRecord {
    pub verb: String,
    #[serde(default)]
    pub payload: serde_json::Value,
    #[serde(default)]
    pub config: ConfigOverrides,
    #[serde(default)]
    pub out: Option<String>,
}
