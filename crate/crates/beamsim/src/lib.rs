//! Simulation library for data-selective LCMV adaptive beamforming on a
//! uniform linear array.
//!
//! The crate provides:
//!
//! - [`signal`]: ULA steering vectors, BPSK snapshot synthesis and exact
//!   covariance / optimal-beamformer oracles,
//! - [`smcg`]: the set-membership conjugate-gradient (SM-CG) beamformer with
//!   a parameter-dependent bound and one CG iteration per triggered update,
//! - [`baselines`]: Frost constrained SG, constrained RLS and a
//!   set-membership SG variant,
//! - [`harness`]: seeded Monte-Carlo trials, ensemble SINR curves, update
//!   rates and per-update operation counts,
//! - [`config`]: a flat key=value scenario file format,
//! - [`flops`]: the instrumented complex-arithmetic layer used in the
//!   algorithm hot paths.

pub mod baselines;
pub mod config;
pub mod flops;
pub mod harness;
pub mod signal;
pub mod smcg;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
