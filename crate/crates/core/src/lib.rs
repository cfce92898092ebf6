pub mod analysis;
pub mod censored;
pub mod cli;
pub mod error;
pub mod info;
pub mod io;
pub mod esn;
pub mod linalg;
pub mod mixture;
pub mod mvn;
pub mod quad;
pub mod special;
pub mod truncated;

pub use error::{Error, Result};
