//! Loneliness of polynomial speeds over finite fields, the kernel-covering
//! engine that computes it, sunflower structure of covering families, and
//! verification suites for the combinatorial bounds around them.

pub mod bits;
pub mod cli;
pub mod covering;
pub mod error;
pub mod gf;
pub mod laurent;
pub mod linalg;
pub mod poly;
pub mod sunflower;
pub mod verify;

pub use covering::{covers, covers_with, loneliness, CoverageOptions, CoverageResult};
pub use error::{Error, Result};
pub use gf::{Elem, FieldCtx};
pub use laurent::{LaurentTail, Loneliness};
pub use poly::Poly;
