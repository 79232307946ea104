use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid graph at {location}: {message}")]
    InvalidGraph { location: String, message: String },

    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),

    #[error("total measure must be positive")]
    ZeroTotalMeasure,

    #[error("graph must be connected for {0}")]
    Disconnected(&'static str),

    #[error("measure must have full support: vertex {0} has measure zero")]
    NotFullSupport(usize),

    #[error("invalid conductance: {0}")]
    InvalidConductance(String),

    #[error("exact mode infeasible: {n} vertices exceeds the enumeration cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("no feasible subset: no A with 0 < m(A) <= m(V)/2")]
    NoFeasibleSubset,

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
