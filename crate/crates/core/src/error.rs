use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty signal")]
    EmptySignal,
    #[error("signal length {len} is not a multiple of {factor}")]
    LengthNotMultiple { len: usize, factor: usize },
    #[error("fractional delay {0} outside (-1, 1); compose with an integer shift")]
    DelayOutOfRange(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("sub-noise variance: output variance {var_output} does not exceed noise variance {noise_variance}")]
    SubNoiseVariance { var_output: f64, noise_variance: f64 },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("ratio out of range for order p = {p}: requested {gamma}, achievable ({min}, {max}]")]
    RatioOutOfRange { gamma: f64, p: usize, min: f64, max: f64 },
    #[error("root finding did not converge for polynomial of degree {degree}")]
    RootFinding { degree: usize },
    #[error("side distortion infeasible: {ds} is below the floor {floor}")]
    SideDistortionInfeasible { ds: f64, floor: f64 },
    #[error("degenerate region: Pi = {pi} < Delta = {delta}")]
    DegenerateRegion { pi: f64, delta: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("missing packet for description {0}")]
    MissingPacket(usize),
    #[error("unknown description id {id} for {descriptions} descriptions")]
    UnknownDescription { id: usize, descriptions: usize },
    #[error("non-uniform subset unsupported: {0:?}")]
    NonUniformSubset(Vec<usize>),
    #[error("inconsistent packets: {0}")]
    InconsistentPackets(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
