use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} out of range for {n_spins} spins")]
    InvalidSite { site: usize, n_spins: usize },
    #[error("pair coupling needs two distinct sites (got {0} twice)")]
    SameSite(usize),
    #[error("unsupported number of spins: {0}")]
    UnsupportedSize(usize),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("vector has an irreducibly complex ray (imaginary residue {0:.3e})")]
    ComplexRay(f64),
    #[error("grid too coarse: overlap {overlap:.6} between R = {from} and R = {to}")]
    GridTooCoarse { overlap: f64, from: f64, to: f64 },
    #[error("ambiguous degeneracy at R = {0}")]
    AmbiguousDegeneracy(f64),
    #[error("degeneracy unresolved at first order at R = {0}")]
    UnresolvedDegeneracy(f64),
    #[error("initial state has no weight in the requested sector")]
    EmptySector,
    #[error("ansatz insufficient: core-equation residual {0:.3e}")]
    AnsatzInsufficient(f64),
    #[error("singular point at R = {0}: closed form undefined")]
    Singular(f64),
    #[error("component form denominator vanishes (C1 = {0}); use solve_core")]
    ComponentFormSingular(f64),
    #[error("time {t} outside [0, {t_ff}]")]
    TimeOutOfRange { t: f64, t_ff: f64 },
    #[error("R = {r} outside tabulated range [{lo}, {hi}]")]
    OutOfTable { r: f64, lo: f64, hi: f64 },
    #[error("norm drift {0:.3e} exceeds 1e-6; increase the step count")]
    NormDrift(f64),
    #[error("input state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
