pub mod cli;
pub mod error;
pub mod forms;
pub mod io;
pub mod kempf_ness;
pub mod linalg;
pub mod moment;
pub mod quiver;
pub mod stability;
pub mod strata;
pub mod toric;
pub mod verify;

pub use error::{Error, Result};
