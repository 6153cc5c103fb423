#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod dsl;
pub mod equivalence;
pub mod error;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod invariants;
pub mod jet;
pub mod linalg;
pub mod report;
pub mod solution;
pub mod symmetry;

pub use error::{Error, Result};
pub use expr::Expr;
