//! Symbolic classification of zero-dimensional compact spaces as Banach
//! ultrafractals, with explicit normed height trees, height morphisms and
//! contracting function systems checked in exact rational arithmetic.

pub mod error;
pub mod export;
pub mod glued;
pub mod ifs;
pub mod metric;
pub mod morphism;
pub mod ordinal;
pub mod par;
pub mod report;
pub mod space;
pub mod tree;

pub use error::{Error, Result};
