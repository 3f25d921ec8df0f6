//! Mapping foreign AST class hierarchies onto algebraic signatures.
//!
//! A mapping spec names, for each concrete foreign class, a list of rules.
//! A rule picks members of the class (optionally guarded, cast, marked
//! optional or skipped) and passes them positionally to a constructor.
//! From a spec and a [`ForeignSchema`] describing the class hierarchy,
//! [`infer_signature`] derives the signature and [`Marshaller`] converts
//! foreign values into terms of it. Rules of a class are tried in textual
//! order and the first whose guards all hold fires.

mod infer;
mod marshal;
mod schema;
mod syntax;

pub use infer::{check_spec, infer_signature, Diagnostic, Inferred};
pub use marshal::{marshal, MarshalError, Marshaller};
pub use schema::{
    ForeignSchema, ForeignType, ForeignValue, Member, SchemaError, TypeDecl, ValueError, OBJECT, PRIMITIVES,
};
pub use syntax::{
    parse_tympanic, ArgTemplate, ClassMapping, ConstructorTemplate, FieldKind, FieldSpec, JavaValue, RascalValue,
    Rule, SpecSyntaxError, TympanicSpec, TypeMapping,
};
