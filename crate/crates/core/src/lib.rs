pub mod bounds;
pub mod constructions;
pub mod counting;
pub mod error;
pub mod family;
pub mod flat;
pub mod generic;
pub mod harness;
pub mod legendrian;
pub mod linalg;
pub mod scalar;
pub mod space3;

pub use error::{Error, Result};
pub use family::{LayeredFamily, Level};
pub use flat::{Flat, Point};
pub use scalar::Scalar;
