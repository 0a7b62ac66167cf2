pub mod arnoldi;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod gmres;
pub mod harmonic;
pub mod instances;
pub mod io;
pub mod numeric;
pub mod operator;
pub mod pipeline;
pub mod verify;

pub use error::{Error, Result};
