pub mod cj;
pub mod classical;
pub mod cli;
mod enumerate;
pub mod error;
pub mod io;
pub mod linalg;
pub mod qholo;
pub mod quantum;
pub mod random;
pub mod report;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
