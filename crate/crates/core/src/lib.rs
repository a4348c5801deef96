pub mod error;
pub mod poly;
pub mod nilalg;
pub mod profile;
pub mod totalspace;
pub mod quotient;
pub mod oracle;
pub mod chartop;

pub use error::{Error, Result};
