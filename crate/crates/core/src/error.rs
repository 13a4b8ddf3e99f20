use thiserror::Error;

/// Errors raised by the simulator and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} samples, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mollifier width {width} is below three grid cells (h = {h})")]
    Resolution { width: f64, h: f64 },

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("non-finite values at {location}")]
    Divergence { location: String },

    #[error("Newton iteration stalled after {iterations} iterations, residual {residual:e}")]
    Convergence { iterations: usize, residual: f64 },

    #[error("time step {dt} violates CFL: max speed {max_speed}, admissible dt <= {dt_max}")]
    StepSize { dt: f64, max_speed: f64, dt_max: f64 },

    #[error("horizon error: {0}")]
    Horizon(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("perturbation reached the boundary at t = {t}: |u| = {magnitude:e}")]
    Containment { t: f64, magnitude: f64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("at t = {t} (step {step}): {source}")]
    AtStep {
        t: f64,
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at(self, t: f64, step: usize) -> Error {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep {
                t,
                step,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, skipping step annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }

    /// Process exit code used by the command line front end: 2 for bad
    /// input, 3 for numerical breakdown. Code 1 is reserved for failed
    /// acceptance criteria, which are not errors.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Divergence { .. } | Error::Convergence { .. } | Error::Containment { .. } => 3,
            _ => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_root_cause() {
        let div = Error::Divergence { location: "u".into() }.at(0.5, 10);
        assert_eq!(div.exit_code(), 3);
        assert!(matches!(div.root(), Error::Divergence { .. }));
        assert_eq!(Error::Config("x".into()).at(0.0, 1).exit_code(), 2);
        let io = Error::Io {
            path: "/nope".into(),
            source: std::io::Error::from(std::io::ErrorKind::NotFound),
        };
        assert_eq!(io.exit_code(), 2);
        assert!(io.to_string().starts_with("/nope"));
    }
}
