//! Reference object-language bindings.

pub mod exprlang;
pub mod json;
