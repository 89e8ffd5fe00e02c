use thiserror::Error;

use crate::kempf_ness::Solution;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid dimension vector: {0}")]
    InvalidDimensions(String),
    #[error("gauge block {node} violates the {tag} constraint (defect {defect:.3e})")]
    SubgroupViolation {
        node: usize,
        tag: &'static str,
        defect: f64,
    },
    #[error("flavor element does not preserve the bilinear form (defect {0:.3e})")]
    FormViolation(f64),
    #[error("wrong quiver mode: {0}")]
    ModeError(String),
    #[error("quaternion is not a unit (norm {0})")]
    NonUnit(f64),
    #[error("skew form requires even size, got {0}")]
    OddSymplectic(usize),
    #[error("no bilinear form for type A")]
    NoForm,
    #[error("map is not isotropic (defect {0:.3e})")]
    NotIsotropic(f64),
    #[error("map is rank deficient")]
    RankDeficient,
    #[error("isotropic image lies in the anti-self-dual component")]
    WrongComponent,
    #[error("image is not a maximal isotropic subspace")]
    NotMaximalIsotropic,
    #[error("singular value {value:.3e} lies inside the ambiguity band around threshold {threshold:.3e}")]
    AmbiguousRank { value: f64, threshold: f64 },
    #[error("quiver is not polystable")]
    NotPolystable,
    #[error("dimension sequence is not ordered: {0:?}")]
    NotOrdered(Vec<usize>),
    #[error("levels outside the Weyl chamber: partial sum for (i={i}, j={j}) is {value}")]
    OutsideChamber { i: usize, j: usize, value: f64 },
    #[error("hypertoric point has a vanishing coordinate at index {0}")]
    BoundaryPoint(usize),
    #[error("quiver is not hyperkähler-stable in the current complex structure")]
    NotStableHere,
    #[error("quiver is not in beta normal form: {0}")]
    NotNormalForm(String),
    #[error("no sampled complex structure made every alpha injective and every beta surjective ({0} samples)")]
    GenericityFailure(usize),
    #[error("solver precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("solver hit the iteration limit (residual {:.3e})", .0.report.final_residual)]
    MaxIters(Box<Solution>),
    #[error("solver failed: {0}")]
    SolverFailed(String),
    #[error("schema error at {}: {message}", if pointer.is_empty() { "document root" } else { pointer.as_str() })]
    SchemaError { pointer: String, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
