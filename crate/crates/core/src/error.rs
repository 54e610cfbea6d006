use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("parameter sequence is empty")]
    Empty,
    #[error("{radii} radii but {degrees} degrees")]
    LengthMismatch { radii: usize, degrees: usize },
    #[error("radius r_{k} = {value} must be finite and positive")]
    BadRadius { k: usize, value: f64 },
    #[error("radii must be strictly increasing (violated at k = {k})")]
    NotIncreasing { k: usize },
    #[error("degree n_{k} = {n} must satisfy k <= n_k < 2^63")]
    DegreeTooSmall { k: usize, n: u64 },
    #[error("prefix of length {len} requested from {available} factors")]
    BadPrefix { len: usize, available: usize },
    #[error("unknown profile `{0}` (expected doubling, steep or paper2)")]
    UnknownProfile(String),
    #[error("index k = {k} outside 1..={len}")]
    IndexOutOfRange { k: usize, len: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid parameter JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("nu = {nu} outside 0..{n}")]
    NuOutOfRange { nu: u64, n: u64 },
    #[error("index k = {k} requires 2 <= k <= {len}")]
    IndexOutOfRange { k: usize, len: usize },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("adaptive quadrature exceeded depth {depth}")]
    NonConvergence { depth: usize },
    #[error("integrand exp(-h) is not representable at {at}")]
    NonFiniteIntegrand { at: num_complex::Complex64 },
    #[error("|g'| = {0:e} is too small to divide by")]
    DegenerateDerivative(f64),
    #[error("probe value p = {re} + {im}i is not a positive real")]
    ProbeNotPositive { re: f64, im: f64 },
}

#[derive(Debug, Error)]
pub enum HypError {
    #[error("point {z} lies outside the domain")]
    PointOutsideDomain { z: num_complex::Complex64 },
    #[error("expected a positive value, got {0}")]
    NonPositive(f64),
    #[error("point {z} coincides with the omitted point")]
    CoincidesWithOmitted { z: num_complex::Complex64 },
    #[error("unknown map `{0}` (expected square, mobius:RE,IM or scale:RE,IM)")]
    UnknownMap(String),
    #[error("unknown check `{0}` (expected metric, lemma1, lemma2, schwarz or monotone)")]
    UnknownCheck(String),
}

#[derive(Debug, Error)]
pub enum DynError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("max_steps must be at least 1")]
    NoSteps,
    #[error("escape radius {radius} must exceed r_K = {r_k}")]
    EscapeRadiusTooSmall { radius: f64, r_k: f64 },
    #[error("grid dimensions must be at least 1x1, got {nx}x{ny}")]
    EmptyGrid { nx: usize, ny: usize },
    #[error("malformed rectangle `{0}` (expected X0,Y0,X1,Y1)")]
    BadRect(String),
    #[error("malformed grid file: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("check requires 2 <= k <= {len}, got k = {k}")]
    IndexOutOfRange { k: usize, len: usize },
    #[error("t_k = {0} must lie in [0, 1)")]
    BadAngle(f64),
    #[error("sample count must be positive")]
    NoSamples,
}
