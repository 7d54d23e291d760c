use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library reports. Variant names double as stable error
/// identifiers on the command line.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("ZeroPolynomial: operation needs a nonzero polynomial")]
    ZeroPolynomial,
    #[error("DegreeTooLow: need degree >= {need}, got {got}")]
    DegreeTooLow { need: usize, got: usize },
    #[error("InvalidTolerance: tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("RootsNotConverged: {iterations} iterations, worst residual {residual:.3e}")]
    RootsNotConverged {
        iterations: usize,
        residual: f64,
        best: Vec<Complex64>,
    },
    #[error("OnSupport: point {z} is within guard distance of atom {atom}")]
    OnSupport { z: Complex64, atom: Complex64 },
    #[error("PointAtPole: z = {0} is a pole")]
    PointAtPole(Complex64),
    #[error("GridAtPole: grid point {0} lies at +-1")]
    GridAtPole(Complex64),
    #[error("DegreeOutOfRange: {0}")]
    DegreeOutOfRange(String),
    #[error("DegenerateParameters: {0}")]
    DegenerateParameters(String),
    #[error("HigherOrderPole: root {0} of P is not simple")]
    HigherOrderPole(Complex64),
    #[error("InvalidEquation: {0}")]
    InvalidEquation(String),
    #[error("NotTwoStrip: {0}")]
    NotTwoStrip(String),
    #[error("NotApplicable: {0}")]
    NotApplicable(String),
    #[error("BranchInconsistency: finite-difference mismatch {0:.3e}")]
    BranchInconsistency(f64),
    #[error("PathTooClose: path passes within {distance:.3e} of critical point {point}")]
    PathTooClose { point: Complex64, distance: f64 },
    #[error("QuadratureFailed: estimated error {0:.3e}")]
    QuadratureFailed(f64),
    #[error("CriticalPoint: direction undefined at {0}")]
    CriticalPoint(Complex64),
    #[error("EmptyGraph: critical graph has no arcs")]
    EmptyGraph,
    #[error("InvalidPencil: {0}")]
    InvalidPencil(String),
    #[error("ResonantIndex: diagonal entry c_jj vanishes at j = {0}")]
    ResonantIndex(usize),
    #[error("NonGenericPencil: generic type required (rho = {0:?})")]
    NonGenericPencil(Option<Complex64>),
    #[error("Io: {0}")]
    Io(String),
}

impl Error {
    /// Short identifier, the variant name.
    pub fn name(&self) -> &'static str {
        match self {
            Error::ZeroPolynomial => "ZeroPolynomial",
            Error::DegreeTooLow { .. } => "DegreeTooLow",
            Error::InvalidTolerance(_) => "InvalidTolerance",
            Error::RootsNotConverged { .. } => "RootsNotConverged",
            Error::OnSupport { .. } => "OnSupport",
            Error::PointAtPole(_) => "PointAtPole",
            Error::GridAtPole(_) => "GridAtPole",
            Error::DegreeOutOfRange(_) => "DegreeOutOfRange",
            Error::DegenerateParameters(_) => "DegenerateParameters",
            Error::HigherOrderPole(_) => "HigherOrderPole",
            Error::InvalidEquation(_) => "InvalidEquation",
            Error::NotTwoStrip(_) => "NotTwoStrip",
            Error::NotApplicable(_) => "NotApplicable",
            Error::BranchInconsistency(_) => "BranchInconsistency",
            Error::PathTooClose { .. } => "PathTooClose",
            Error::QuadratureFailed(_) => "QuadratureFailed",
            Error::CriticalPoint(_) => "CriticalPoint",
            Error::EmptyGraph => "EmptyGraph",
            Error::InvalidPencil(_) => "InvalidPencil",
            Error::ResonantIndex(_) => "ResonantIndex",
            Error::NonGenericPencil(_) => "NonGenericPencil",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
