use thiserror::Error;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("quadrature did not converge: estimate {value:e}, error {abs_err:e}, requested {requested:e}")]
    QuadratureNotConverged {
        value: f64,
        abs_err: f64,
        requested: f64,
    },

    #[error("principal value did not converge across excision levels: estimate {value:e}, error {abs_err:e}")]
    PrincipalValueNotConverged { value: f64, abs_err: f64 },

    #[error("Fock truncation keeps only {captured} of the drive distribution")]
    TruncationInadequate { captured: f64 },

    #[error("steady state undefined: both transition rates vanish")]
    UndefinedSteadyState,

    #[error("environment is not a cooling bath (up = {up:e}, down = {down:e})")]
    NonPositiveTemperature { up: f64, down: f64 },

    #[error("search did not converge")]
    SearchNotConverged,

    #[error("spectral grid does not cover [{required_lo:e}, {required_hi:e}] rad/s")]
    GridCoverage { required_lo: f64, required_hi: f64 },

    #[error("pole {pole:e} lies outside the integration range")]
    PoleOutsideRange { pole: f64 },

    #[error("ladder truncation leaked {population:e} into the top Fock level")]
    Leakage { population: f64 },

    #[error("integrator step size underflow at t = {t:e} s")]
    StepSizeFailure { t: f64 },

    #[error("degenerate fit: {0}")]
    FitDegenerate(&'static str),

    #[error("least-squares design matrix is rank deficient")]
    RankDeficient,

    #[error("nonlinear fit did not converge after {iterations} iterations")]
    FitNotConverged { iterations: usize },

    #[error("resonance linewidth is not resolved by the frequency grid")]
    LinewidthUnresolved,

    #[error("no root in the search box")]
    NoRootInBox,

    #[error("root is not bracketed")]
    BracketingFailure,

    #[error("outside the model domain: {0}")]
    Domain(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, name: &'static str, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason })
    }
}
