use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("distillation success probability is zero")]
    DegenerateDistillation,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("structural error: {0}")]
    Structure(String),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
