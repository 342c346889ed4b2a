//! Multiplicative estimation of ferromagnetic Ising spin covariances with the
//! weighted worm process, exact enumeration oracles for small instances, and
//! an exact demonstration of the antiferromagnetic sign-to-counting reduction.

pub mod error;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod seed;
pub mod worm;
pub mod learner;
pub mod fpras;
pub mod gadget;
pub mod cli;

pub use error::{Error, Result};
