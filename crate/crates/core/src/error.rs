use thiserror::Error;

/// Which algebraic curvature identity a tensor failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    Antisymmetry,
    PairSymmetry,
    FirstBianchi,
}

impl std::fmt::Display for Identity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Identity::Antisymmetry => "antisymmetry",
            Identity::PairSymmetry => "pair symmetry",
            Identity::FirstBianchi => "first Bianchi",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("symmetry violation ({identity}) at 1-based index {index:?}: magnitude {magnitude:e}")]
    SymmetryViolation {
        identity: Identity,
        index: [usize; 4],
        magnitude: f64,
    },
    #[error("non-finite tensor entry at 1-based index {0:?}")]
    NonFinite([usize; 4]),
    #[error("frame is not orthonormal (Gram deviation {0:e})")]
    NonOrthonormalFrame(f64),
    #[error("tensor is not pair-symmetric (deviation {0:e})")]
    NotPairSymmetric(f64),
    #[error("tensor is not Einstein: traceless Ricci norm {residual:e} exceeds {tolerance:e}")]
    NotEinstein { residual: f64, tolerance: f64 },
    #[error("Berger frame recovery failed: block residual {residual:e} exceeds {tolerance:e}")]
    FrameRecoveryFailure { residual: f64, tolerance: f64 },
    #[error("vectors span a degenerate plane")]
    DegeneratePlane,
    #[error("k = {k} out of range 1..={dim}")]
    BadK { k: usize, dim: usize },
    #[error("triple {0:?} does not sum to zero")]
    NotTraceFree([f64; 3]),
    #[error("bad model spec: {0}")]
    BadSpec(String),
    #[error("stencil point {0:?} leaves the chart domain")]
    StencilOutOfDomain([f64; 4]),
    #[error("metric is singular or indefinite at {0:?}")]
    SingularMetric([f64; 4]),
    #[error("chart is not Einstein at {point:?}: traceless Ricci {residual:e}")]
    NotEinsteinChart { point: [f64; 4], residual: f64 },
    #[error("structure invariant fails at {point:?}: residual {residual:e}")]
    InvalidStructure { point: [f64; 4], residual: f64 },
    #[error("traceless residual {residual:e} too large at {point:?}; conformal convention error")]
    TracelessResidualTooLarge { point: [f64; 4], residual: f64 },
    #[error("expression error: {0}")]
    Expr(String),
    #[error("tensor input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SymmetryViolation { .. } => "symmetry_violation",
            Error::NonFinite(_) => "non_finite",
            Error::NonOrthonormalFrame(_) => "non_orthonormal_frame",
            Error::NotPairSymmetric(_) => "not_pair_symmetric",
            Error::NotEinstein { .. } => "not_einstein",
            Error::FrameRecoveryFailure { .. } => "frame_recovery_failure",
            Error::DegeneratePlane => "degenerate_plane",
            Error::BadK { .. } => "bad_k",
            Error::NotTraceFree(_) => "not_trace_free",
            Error::BadSpec(_) => "bad_spec",
            Error::StencilOutOfDomain(_) => "stencil_out_of_domain",
            Error::SingularMetric(_) => "singular_metric",
            Error::NotEinsteinChart { .. } => "not_einstein_chart",
            Error::InvalidStructure { .. } => "invalid_structure",
            Error::TracelessResidualTooLarge { .. } => "traceless_residual_too_large",
            Error::Expr(_) => "expr",
            Error::Input(_) => "input",
        }
    }
}
