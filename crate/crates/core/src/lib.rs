pub mod aniso;
pub mod diagnostics;
pub mod domain;
pub mod error;
pub mod fields;
pub mod harness;
pub mod hydro;
pub mod linsolve;
pub mod model;
pub mod operators;
pub mod sources;

pub use error::{Error, Result};

/// The book's chapters, compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    pub struct Model;
    #[doc = include_str!("../../../book/src/grid.md")]
    pub struct GridChapter;
    #[doc = include_str!("../../../book/src/operators.md")]
    pub struct Operators;
    #[doc = include_str!("../../../book/src/sources.md")]
    pub struct Sources;
    #[doc = include_str!("../../../book/src/solvers.md")]
    pub struct Solvers;
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    pub struct Diagnostics;
    #[doc = include_str!("../../../book/src/harness.md")]
    pub struct Harness;
}
