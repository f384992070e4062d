pub mod circlemap;
pub mod error;
pub mod operator;
pub mod spectrum;
pub mod stability;
pub mod sturmian;
pub mod symbolic;

pub use error::{Error, Result};
