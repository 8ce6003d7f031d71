use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular matrix: determinant below epsilon")]
    SingularMatrix,
    #[error("division by a quantity below epsilon")]
    DivisionByZero,
    #[error("square root evaluated at zero with nonzero tangent")]
    BranchPoint,
    #[error("negative radicand in real mode{}", site_suffix(*.site))]
    NegativeRadicand { site: Option<i64> },
    #[error("group element does not belong to the {expected} action")]
    KindMismatch { expected: &'static str },
    #[error("projective pole: c*x + d vanishes")]
    ProjectivePole,
    #[error("not a unimodular element: det - 1 = {0:e}")]
    NotUnimodular(f64),
    #[error("degenerate window at site {site}")]
    DegenerateWindow { site: i64 },
    #[error("degenerate invariants at site {site}: {reason}")]
    DegenerateInvariants { site: i64, reason: &'static str },
    #[error("site {site} is outside the available window")]
    WindowOutOfRange { site: i64 },
    #[error("boundary form needs nonnegative shifts, found shift {shift}")]
    SupportViolation { shift: i64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("path has no velocities")]
    MissingVelocities,
    #[error("{0}")]
    DegenerateConstants(&'static str),
    #[error("V2 vanishes at site {site}")]
    ZeroV2 { site: i64 },
    #[error("V4*V5 vanishes at site {site}")]
    ZeroV45 { site: i64 },
    #[error("2a - c vanishes at site {site}")]
    ZeroDenominator { site: i64 },
    #[error("first integral of V at site {site} differs from that of k by {deviation:e}")]
    InconsistentConstants { site: i64, deviation: f64 },
    #[error("reconstructed point at site {site} has imaginary part {imag:e}")]
    ComplexResidue { site: i64, imag: f64 },
    #[error("Newton iteration diverged at site {site}")]
    NewtonDivergence { site: i64 },
    #[error("singular Newton Jacobian at site {site}")]
    SingularJacobian { site: i64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("unknown action {0:?}")]
    UnknownAction(String),
    #[error("{0}")]
    InvalidInput(String),
}

fn site_suffix(site: Option<i64>) -> String {
    site.map(|s| format!(" at site {s}")).unwrap_or_default()
}

impl Error {
    /// Attach a lattice site to errors raised by site-agnostic arithmetic.
    pub(crate) fn at_window(self, site: i64) -> Self {
        match self {
            Error::DivisionByZero | Error::SingularMatrix | Error::BranchPoint => Error::DegenerateWindow { site },
            Error::NegativeRadicand { site: None } => Error::NegativeRadicand { site: Some(site) },
            other => other,
        }
    }

    pub(crate) fn at_invariants(self, site: i64, reason: &'static str) -> Self {
        match self {
            Error::DivisionByZero | Error::SingularMatrix | Error::BranchPoint | Error::NegativeRadicand { .. } => {
                Error::DegenerateInvariants { site, reason }
            }
            other => other,
        }
    }
}
