//! Concrete syntax patterns over black-box parsers.
//!
//! Patterns are written in an object language's own syntax with typed holes
//! (`{<Prop* _>, name: <JSON v>, <Prop* _>}`), handed to an unmodified
//! external parser after the holes are replaced by parseable placeholders,
//! and lifted back into abstract [`pattern::Pattern`]s over a [`term::Signature`].
//! The [`tympanic`] module maps a foreign AST class hierarchy onto such a
//! signature and marshals foreign values into terms.

pub mod term;

pub mod bindings;
pub mod concretely;
mod json_text;
pub mod pattern;
pub mod tympanic;
