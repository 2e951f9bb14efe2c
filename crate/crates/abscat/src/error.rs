use thiserror::Error;

/// Error type shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("field: {0}")]
    Field(String),

    #[error("gauge: {0}")]
    Gauge(String),

    #[error("transform: {0}")]
    Transform(String),

    #[error("scattering: {0}")]
    Scattering(String),

    #[error("inverse: {0}")]
    Inverse(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }
    pub fn quadrature(msg: impl Into<String>) -> Self {
        Error::Quadrature(msg.into())
    }
    pub fn field(msg: impl Into<String>) -> Self {
        Error::Field(msg.into())
    }
    pub fn gauge(msg: impl Into<String>) -> Self {
        Error::Gauge(msg.into())
    }
    pub fn transform(msg: impl Into<String>) -> Self {
        Error::Transform(msg.into())
    }
    pub fn scattering(msg: impl Into<String>) -> Self {
        Error::Scattering(msg.into())
    }
    pub fn inverse(msg: impl Into<String>) -> Self {
        Error::Inverse(msg.into())
    }
    pub fn scenario(msg: impl Into<String>) -> Self {
        Error::Scenario(msg.into())
    }
}
