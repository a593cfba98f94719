pub mod circuit;
pub mod clifford;
pub mod compiler;
pub mod error;
pub mod gluing;
pub mod graphs;
pub mod mixing;
pub mod rng;
pub mod routing;
pub mod verify;

pub use error::{Error, Result};
