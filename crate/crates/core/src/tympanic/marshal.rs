//! The second compilation step, run as an interpreter: foreign values in,
//! terms of the inferred signature out.

use thiserror::Error;

use super::infer::{infer_signature, CompiledArg, CompiledRule, Diagnostic, Inferred};
use super::schema::{ForeignSchema, ForeignType, ForeignValue, Step, ValueError, ValuePath, OBJECT};
use super::syntax::{FieldKind, JavaValue, TympanicSpec};
use crate::term::{check_term, ArgType, PrimType, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarshalError {
    #[error("mapping does not compile: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("value does not conform to the schema: {0}")]
    Value(ValueError),
    #[error("{path}: no rule applies to this {tag}")]
    NoApplicableRule { tag: String, path: String },
    #[error("{path}: {member} is null but not optional")]
    NullNotOptional { member: String, path: String },
    #[error("{path}: {member}: {message}")]
    CastFailure { member: String, path: String, message: String },
    #[error("marshalled term is not well-typed: {0}")]
    IllTyped(String),
}

/// Whether a guard literal equals a foreign value. Enum literals match on
/// the constant name and, when qualified, on the enum's name.
pub(crate) fn literal_equals(lit: &JavaValue, v: &ForeignValue) -> bool {
    match (lit, v) {
        (JavaValue::Null, ForeignValue::Null) => true,
        (JavaValue::Bool(a), ForeignValue::Bool(b)) => a == b,
        (JavaValue::Int(a), ForeignValue::Int(b)) => a == b,
        (JavaValue::Path(p), ForeignValue::Enum { ty, constant }) => {
            p.last() == Some(constant) && (p.len() == 1 || &p[p.len() - 2] == ty)
        }
        _ => false,
    }
}

fn instance_of(schema: &ForeignSchema, v: &ForeignValue, target: &str) -> bool {
    match v {
        ForeignValue::Null => false,
        ForeignValue::Arr(_) => target == OBJECT,
        v => v
            .runtime_type()
            .is_some_and(|r| schema.is_subtype(&r, target)),
    }
}

/// Whether a field guard holds for a member's value.
pub(crate) fn guard_holds(schema: &ForeignSchema, kind: &FieldKind, v: &ForeignValue) -> bool {
    match kind {
        FieldKind::Plain(_) | FieldKind::Optional(_) => true,
        FieldKind::Eq(_, lit) => literal_equals(lit, v),
        FieldKind::Neq(_, lit) => !literal_equals(lit, v),
        FieldKind::Cast { target, .. } => instance_of(schema, v, target),
        FieldKind::CastArray { elem, .. } => match v {
            ForeignValue::Arr(items) => items
                .iter()
                .all(|i| matches!(i, ForeignValue::Null) || instance_of(schema, i, elem)),
            _ => false,
        },
    }
}

/// A compiled mapping ready to convert values.
#[derive(Clone, Debug)]
pub struct Marshaller {
    schema: ForeignSchema,
    inferred: Inferred,
}

impl Marshaller {
    pub fn new(spec: &TympanicSpec, schema: &ForeignSchema) -> Result<Marshaller, Vec<Diagnostic>> {
        Ok(Marshaller {
            schema: schema.clone(),
            inferred: infer_signature(spec, schema)?,
        })
    }

    pub fn inferred(&self) -> &Inferred {
        &self.inferred
    }

    /// Rules for the nearest class (the tag itself, then its supertypes by
    /// distance) that has any.
    fn rules_for(&self, tag: &str) -> Vec<&CompiledRule> {
        let levels = std::iter::once(vec![tag.to_string()]).chain(self.schema.ancestor_levels(tag));
        for level in levels {
            let rules: Vec<&CompiledRule> = self
                .inferred
                .rules
                .iter()
                .filter(|r| level.contains(&r.class))
                .collect();
            if !rules.is_empty() {
                return rules;
            }
        }
        Vec::new()
    }

    /// The first rule (in textual order) whose guards all hold, if any.
    pub(crate) fn select(&self, tag: &str, fields: &std::collections::BTreeMap<String, ForeignValue>) -> Option<&CompiledRule> {
        self.rules_for(tag).into_iter().find(|r| {
            r.fields.iter().all(|f| {
                let v = fields.get(f.kind.member()).unwrap_or(&ForeignValue::Null);
                guard_holds(&self.schema, &f.kind, v)
            })
        })
    }

    /// Converts an object of the foreign AST. The value is checked against
    /// the schema first and the result against the inferred signature.
    pub fn marshal(&self, v: &ForeignValue) -> Result<Term, MarshalError> {
        let ForeignValue::Obj { tag, .. } = v else {
            return Err(MarshalError::Value(ValueError {
                path: "$".into(),
                message: "expected an object".into(),
            }));
        };
        self.schema
            .check_value(v, &ForeignType::named(tag.clone()))
            .map_err(MarshalError::Value)?;
        let mut path = ValuePath::root();
        let t = self.object(v, &mut path)?;
        let Term::Con { ty, .. } = &t else { unreachable!("rules build constructors") };
        match check_term(&self.inferred.signature, &t, &ArgType::adt(ty.clone())).first() {
            None => Ok(t),
            Some(e) => Err(MarshalError::IllTyped(e.to_string())),
        }
    }

    fn object(&self, v: &ForeignValue, path: &mut ValuePath) -> Result<Term, MarshalError> {
        let ForeignValue::Obj { tag, fields } = v else { unreachable!("callers pass objects") };
        let rule = self.select(tag, fields).ok_or_else(|| MarshalError::NoApplicableRule {
            tag: tag.clone(),
            path: path.to_string(),
        })?;
        let mut args = Vec::with_capacity(rule.args.len());
        for arg in &rule.args {
            match arg {
                CompiledArg::Fixed(t) => args.push(t.clone()),
                CompiledArg::Field { member, ty } => {
                    path.push(Step::Member(member.clone()));
                    let value = fields.get(member).unwrap_or(&ForeignValue::Null);
                    args.push(self.value(value, ty, path)?);
                    path.pop();
                }
            }
        }
        Ok(Term::con(rule.constructor.clone(), rule.adt.clone(), args))
    }

    fn value(&self, v: &ForeignValue, ty: &ArgType, path: &mut ValuePath) -> Result<Term, MarshalError> {
        let member = path.last_member().unwrap_or("$").to_string();
        if let ArgType::Maybe(inner) = ty {
            return match v {
                ForeignValue::Null => Ok(Term::nothing()),
                v => Ok(Term::just(self.value(v, inner, path)?)),
            };
        }
        let mismatch = |path: &ValuePath, message: String| MarshalError::CastFailure {
            member: member.clone(),
            path: path.to_string(),
            message,
        };
        match (ty, v) {
            (_, ForeignValue::Null) => Err(MarshalError::NullNotOptional {
                member: member.clone(),
                path: path.to_string(),
            }),
            (ArgType::Prim(PrimType::Int), ForeignValue::Int(n)) => Ok(Term::int(*n)),
            (ArgType::Prim(PrimType::Bool), ForeignValue::Bool(b)) => Ok(Term::bool(*b)),
            (ArgType::Prim(PrimType::Str), ForeignValue::Str(s)) => Ok(Term::str(s.clone())),
            (ArgType::Prim(PrimType::Real), ForeignValue::Real(x)) => Ok(Term::real(*x)),
            (ArgType::List(elem), ForeignValue::Arr(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    path.push(Step::Index(i));
                    out.push(self.value(item, elem, path)?);
                    path.pop();
                }
                Ok(Term::list(out, (**elem).clone()))
            }
            (ArgType::Adt(expected), ForeignValue::Obj { .. }) => {
                let t = self.object(v, path)?;
                match &t {
                    Term::Con { ty, .. } if ty == expected => Ok(t),
                    Term::Con { ty, .. } => Err(mismatch(path, format!("maps to {ty}, expected {expected}"))),
                    _ => unreachable!("rules build constructors"),
                }
            }
            (ArgType::Adt(_), v @ ForeignValue::Enum { .. }) => Err(MarshalError::NoApplicableRule {
                tag: v.runtime_type().expect("enums have a type"),
                path: path.to_string(),
            }),
            (ty, v) => Err(mismatch(
                path,
                format!(
                    "a {} value cannot become {ty}",
                    v.runtime_type().unwrap_or_else(|| "array".into())
                ),
            )),
        }
    }
}

/// Compiles `spec` and converts `v` in one go.
pub fn marshal(spec: &TympanicSpec, schema: &ForeignSchema, v: &ForeignValue) -> Result<Term, MarshalError> {
    Marshaller::new(spec, schema)
        .map_err(MarshalError::Invalid)?
        .marshal(v)
}
