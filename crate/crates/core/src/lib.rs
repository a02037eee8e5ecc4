//! Thermodynamic quench protocols for closed quantum systems.
//!
//! Three equilibration models are provided (time average / diagonal ensemble,
//! Gibbs ensemble, generalised Gibbs ensemble) together with work and entropy
//! accounting over sequences of quenches, optimal work-extraction protocols,
//! and two interchangeable back ends:
//!
//! * [`fermion`]: quadratic fermionic Hamiltonians and Gaussian states,
//!   handled entirely through `n × n` correlation matrices;
//! * [`dense`]: exact `d × d` density matrices, used for small systems and as
//!   a brute-force oracle for the fermion back end.

pub mod dense;
pub mod error;
pub mod fermion;
pub mod linalg;
pub mod protocols;
mod roots;

pub use error::{Error, Result};
pub use roots::BetaSolution;
pub use linalg::{
    cluster_degenerate, conjugate, eigh, CMatrix, DegeneracyPartition, EigenSystem,
    HermitianMatrix, C64,
};
