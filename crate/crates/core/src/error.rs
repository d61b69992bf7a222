use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dual norm maximizer did not converge for covector ({0}, {1}); increase the circle resolution")]
    DualNormNonConvergence(f64, f64),
    #[error("vector ({0}, {1}) is not on the unit circle (norm {2})")]
    NotUnitVector(f64, f64, f64),
    #[error("momentum {p1} outside the section domain ({lo}, {hi})")]
    OutsideSection { p1: f64, lo: f64, hi: f64 },
    #[error("failed to bracket the section root at p1 = {0}; is the norm normalized?")]
    SectionBracket(f64),
    #[error("grid point {0} touches the boundary of the section domain")]
    GridTouchesBoundary(f64),
    #[error("segment has {0} entries, at least 2 are required")]
    SegmentTooShort(usize),
    #[error("y = {y} is outside the range of -h_x(x, .) at x = {x}")]
    OutsideBand { x: f64, y: f64 },
    #[error("orbit left the band at step {step} (y = {y})")]
    OrbitLeftBand { step: usize, y: f64 },
    #[error("minimization did not converge: residual {residual:e} after {sweeps} sweeps")]
    NonConvergence { residual: f64, sweeps: usize },
    #[error("p/q = {p}/{q} is not in lowest terms")]
    NotReduced { p: i64, q: i64 },
    #[error("q must be positive, got {0}")]
    NonPositiveDenominator(i64),
    #[error("window {window} is too small for q = {q} (need at least {min})")]
    WindowTooSmall { window: usize, q: i64, min: usize },
    #[error("rotation symbol comparison is not uniform on the window")]
    NonUniformComparison,
    #[error("configurations live on different index windows")]
    MismatchedWindows,
    #[error("requested {requested} convergents but only {available} partial quotients exist")]
    InsufficientQuotients { requested: usize, available: usize },
    #[error("at least {needed} points are required, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("smoothness order r = {0} outside the supported range 1..=8")]
    UnsupportedOrder(u32),
    #[error("bump certification failed: {0}")]
    Certification(String),
    #[error("v support precondition violated: plateau length {len} exceeds 2/q = {max}")]
    SupportTooLong { len: f64, max: f64 },
    #[error("perturbation support length {0} is at least 1, integer translates would overlap")]
    OverlappingTranslates(f64),
    #[error("no admissible gap interval of length >= 1/q = {min} (widest found {found})")]
    NoAdmissibleGap { min: f64, found: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
