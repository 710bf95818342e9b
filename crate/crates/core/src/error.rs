use crate::thermo::TruncationReport;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("series not converged after {} terms (tail bound ln = {:.3e}); partial value {partial:e}", report.n_used, report.tail_bound_log)]
    NotConverged { report: TruncationReport, partial: f64 },

    #[error("construction failed: {0}")]
    Construction(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
