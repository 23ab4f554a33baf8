use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("profile argument {s} outside integrated range [{lo}, {hi}]")]
    OutOfRange { s: String, lo: f64, hi: f64 },
    #[error("branch violation: {0}")]
    BranchViolation(String),
    #[error("degenerate cubic at ({x}, {y}): all coefficients vanish")]
    DegenerateCubic { x: String, y: String },
    #[error("leading coefficient vanishes at point; the cubic is not monic there")]
    NotMonicAtPoint,
    #[error("jacobian of the coordinate change is singular")]
    JacobianSingular,
    #[error("point lies on the discriminant curve (|D| = {0:e})")]
    OnDiscriminant(f64),
    #[error("path crosses the discriminant curve")]
    PathCrossesDiscriminant,
    #[error("web is not flat along the path (curvature {0:e})")]
    NotFlat(f64),
    #[error("denominator vanishes: {0}")]
    DenominatorZero(String),
    #[error("unknown normal form `{0}`")]
    UnknownForm(String),
    #[error("normal form `{0}` is not available in closed form")]
    UnsupportedForm(String),
    #[error("sampled invariant sequence has no projective limit")]
    NoLimit,
    #[error("symmetry direction coincides with a web direction")]
    CoincidentDirection,
    #[error("third derivatives are not integrable: {0}")]
    NotIntegrable(String),
    #[error("potential is not weighted homogeneous")]
    NotHomogeneous,
    #[error("leading field f_yyy vanishes identically")]
    DivisionByZeroField,
    #[error("no rational shear parameter solves the first WDVV0 equation")]
    NoSolution,
    #[error("shear parameter {0} leaves the remaining WDVV0 equations unsatisfied")]
    RemainingEquationsFail(String),
    #[error("integration blew up at {reached}")]
    BlowUp { reached: f64 },
    #[error("integration range crosses a pole of tan at x = {0}")]
    PoleCrossing(f64),
    #[error("idempotent basis is singular")]
    SingularBasis,
    #[error("verification grid point ({x}, {y}) is within the finite-difference margin of the discriminant")]
    GridTouchesDiscriminant { x: String, y: String },
    #[error("operation needs a polynomial-backed web: {0}")]
    NotPolynomial(String),
    #[error("web has no symmetry weights attached")]
    MissingWeights,
    #[error("non-finite value produced: {0}")]
    NonFinite(String),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable name used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "OutOfRange",
            Error::BranchViolation(_) => "BranchViolation",
            Error::DegenerateCubic { .. } => "DegenerateCubic",
            Error::NotMonicAtPoint => "NotMonicAtPoint",
            Error::JacobianSingular => "JacobianSingular",
            Error::OnDiscriminant(_) => "OnDiscriminant",
            Error::PathCrossesDiscriminant => "PathCrossesDiscriminant",
            Error::NotFlat(_) => "NotFlat",
            Error::DenominatorZero(_) => "DenominatorZero",
            Error::UnknownForm(_) => "UnknownForm",
            Error::UnsupportedForm(_) => "UnsupportedForm",
            Error::NoLimit => "NoLimit",
            Error::CoincidentDirection => "CoincidentDirection",
            Error::NotIntegrable(_) => "NotIntegrable",
            Error::NotHomogeneous => "NotHomogeneous",
            Error::DivisionByZeroField => "DivisionByZeroField",
            Error::NoSolution => "NoSolution",
            Error::RemainingEquationsFail(_) => "RemainingEquationsFail",
            Error::BlowUp { .. } => "BlowUp",
            Error::PoleCrossing(_) => "PoleCrossing",
            Error::SingularBasis => "SingularBasis",
            Error::GridTouchesDiscriminant { .. } => "GridTouchesDiscriminant",
            Error::NotPolynomial(_) => "NotPolynomial",
            Error::MissingWeights => "MissingWeights",
            Error::NonFinite(_) => "NonFinite",
            Error::ParseError(_) => "ParseError",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// Input problems map to exit code 2, analysis failures to 1.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::ParseError(_)
                | Error::InvalidInput(_)
                | Error::UnknownForm(_)
                | Error::UnsupportedForm(_)
        )
    }
}
