//! Partitioned finite elements for port-Hamiltonian systems of two
//! conservation laws.
//!
//! The library discretizes systems like the shallow water equations and
//! the Euler-Bernoulli beam by integrating exactly one of the two
//! conservation laws by parts. The resulting semi-discrete system keeps
//! the port-Hamiltonian structure of the PDE: a skew-symmetric
//! interconnection between the two fields, boundary ports that carry
//! exactly the energy flow, and a discrete power balance that holds to
//! rounding for every state and input.
//!
//! The pipeline is: build a mesh and finite-element spaces ([`mesh`]),
//! assemble the mass/interconnection/boundary operators ([`assembly`]),
//! attach an energy law ([`constitutive`]), reduce to an explicit ODE
//! with identity mass ([`phcore`]), then simulate ([`sim`]) or study the
//! spectrum ([`spectra`]). [`scenario`] wires complete models from a
//! [`config::ScenarioConfig`]; [`verify`] runs the cross-cutting
//! invariant suite; the `pfem` binary exposes all of it on the command
//! line.
//!
//! The `book/` directory of the repository contains a guide whose code
//! listings compile and run as this crate's doc-tests (see [`guide`]).

pub mod assembly;
pub mod basis;
pub mod config;
pub mod constitutive;
pub mod guide;
pub mod mesh;
pub mod phcore;
pub mod scenario;
pub mod sim;
pub mod sparse;
pub mod spectra;
pub mod verify;

pub use basis::{eval_basis, gauss_rule, BasisFamily, QuadratureRule};
pub use mesh::{annulus_mesh, build_space, interval_mesh, rect_mesh, Continuity, FeSpace, Mesh};

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("time step failed at t = {t}: {detail}")]
    StepFailure { t: f64, detail: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
