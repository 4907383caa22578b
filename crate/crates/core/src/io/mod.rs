//! Serialization and rendering.

pub mod json;
pub mod svg;
