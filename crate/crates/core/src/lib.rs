pub mod ambient;
pub mod cli;
pub mod error;
pub mod flow;
pub mod immersion;
pub mod oracles;
pub mod pinching;
pub mod tensor;
pub mod tolerances;

pub use error::{Error, Result};
