use thiserror::Error;

/// Error taxonomy shared by every module. The CLI maps these onto process
/// exit codes, so the split between usage, domain, and resource failures is
/// part of the public contract:
///
/// * `Usage`: the caller passed arguments that can never work (bad dimensions,
///   malformed JSON, unknown mode). Exit code 2.
/// * `Domain`: inputs are well-formed but violate a documented precondition
///   (subspace not canonical, family fails a genericness check, filter
///   violation). Exit code 1.
/// * `Resource`: the request is legitimate but exceeds an enumeration or
///   retry cap. Exit code 3.
/// * `Logic`: an internal invariant that theory guarantees was observed to
///   fail; always a bug, never silently swallowed. Exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("internal invariant violated: {0}")]
    Logic(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
    pub fn logic(msg: impl Into<String>) -> Self {
        Error::Logic(msg.into())
    }
}
