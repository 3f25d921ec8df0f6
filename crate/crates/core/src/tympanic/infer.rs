//! Signature inference and static checks.

use std::collections::BTreeMap;
use std::fmt;

use super::schema::{ForeignSchema, ForeignType, TypeDecl, OBJECT};
use super::syntax::{ArgTemplate, FieldKind, FieldSpec, JavaValue, RascalValue, TympanicSpec};
use crate::term::{ArgSpec, ArgType, Constructor, PrimType, Signature, Term};

/// A finding of [`check_spec`] or a reason [`infer_signature`] failed. Rule
/// numbers count from 1 within their class mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    UnknownForeignType { line: usize, name: String },
    NotAClass { line: usize, class: String },
    UnknownMember { line: usize, class: String, member: String },
    ArityMismatch { line: usize, class: String, rule: usize, fields: usize, args: usize },
    UnmappedForeignType { line: usize, class: String, rule: usize, ty: String },
    NoAdtForClass { line: usize, class: String },
    AmbiguousAdt { line: usize, class: String, candidates: Vec<String> },
    UnsupportedInlineValue { line: usize, value: String },
    ConflictingConstructor { line: usize, adt: String, name: String },
    InvalidSignature { message: String },
    IncompatibleGuard { line: usize, member: String, value: String },
    ImpossibleCast { line: usize, member: String, target: String },
    UnreachableRule { line: usize, class: String, rule: usize, shadowed_by: usize },
    AbstractWithoutConcrete { name: String },
}

impl Diagnostic {
    /// Errors prevent inference; the rest are warnings about rules that can
    /// never fire or types that can never be produced.
    pub fn is_error(&self) -> bool {
        !matches!(
            self,
            Diagnostic::IncompatibleGuard { .. }
                | Diagnostic::ImpossibleCast { .. }
                | Diagnostic::UnreachableRule { .. }
                | Diagnostic::AbstractWithoutConcrete { .. }
        )
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = if self.is_error() { "error" } else { "warning" };
        match self {
            Diagnostic::UnknownForeignType { line, name } => {
                write!(f, "{level}: line {line}: unknown foreign type {name}")
            }
            Diagnostic::NotAClass { line, class } => {
                write!(f, "{level}: line {line}: {class} is not a class")
            }
            Diagnostic::UnknownMember { line, class, member } => {
                write!(f, "{level}: line {line}: {class} has no member {member}")
            }
            Diagnostic::ArityMismatch { line, class, rule, fields, args } => write!(
                f,
                "{level}: line {line}: {class} rule {rule} maps {fields} fields onto {args} arguments"
            ),
            Diagnostic::UnmappedForeignType { line, class, rule, ty } => write!(
                f,
                "{level}: line {line}: {class} rule {rule}: foreign type {ty} is not mapped to any data type"
            ),
            Diagnostic::NoAdtForClass { line, class } => write!(
                f,
                "{level}: line {line}: neither {class} nor any supertype is mapped to a data type"
            ),
            Diagnostic::AmbiguousAdt { line, class, candidates } => write!(
                f,
                "{level}: line {line}: {class} inherits several data types: {}",
                candidates.join(", ")
            ),
            Diagnostic::UnsupportedInlineValue { line, value } => {
                write!(f, "{level}: line {line}: unsupported inline value {value}")
            }
            Diagnostic::ConflictingConstructor { line, adt, name } => write!(
                f,
                "{level}: line {line}: constructor {name} of {adt} is declared with different arguments"
            ),
            Diagnostic::InvalidSignature { message } => write!(f, "{level}: {message}"),
            Diagnostic::IncompatibleGuard { line, member, value } => write!(
                f,
                "{level}: line {line}: {member} can never equal {value}"
            ),
            Diagnostic::ImpossibleCast { line, member, target } => write!(
                f,
                "{level}: line {line}: {member} can never hold a {target}"
            ),
            Diagnostic::UnreachableRule { line, class, rule, shadowed_by } => write!(
                f,
                "{level}: line {line}: {class} rule {rule} is unreachable, rule {shadowed_by} always applies first"
            ),
            Diagnostic::AbstractWithoutConcrete { name } => write!(
                f,
                "{level}: abstract type {name} has no mapped concrete subtype"
            ),
        }
    }
}

/// An argument of a compiled rule: a field marshalled at a type, or a fixed
/// term.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum CompiledArg {
    Field { member: String, ty: ArgType },
    Fixed(Term),
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct CompiledRule {
    pub class: String,
    pub number: usize,
    pub fields: Vec<FieldSpec>,
    pub constructor: String,
    pub adt: String,
    pub args: Vec<CompiledArg>,
}

/// The result of the first compilation step.
#[derive(Clone, Debug)]
pub struct Inferred {
    pub signature: Signature,
    /// The signature as a module under the spec's export path, one line
    /// of constructors per class mapping.
    pub module_text: String,
    pub(crate) rules: Vec<CompiledRule>,
}

impl Inferred {
    /// The data type produced by rules on `class`.
    pub fn adt_of(&self, class: &str) -> Option<&str> {
        self.rules.iter().find(|r| r.class == class).map(|r| r.adt.as_str())
    }
}

pub(crate) struct Resolver<'a> {
    pub spec: &'a TympanicSpec,
    pub schema: &'a ForeignSchema,
}

pub(crate) enum AdtLookup {
    Found(String),
    Missing,
    Ambiguous(Vec<String>),
}

impl Resolver<'_> {
    fn mapped(&self, foreign: &str) -> Option<&str> {
        self.spec
            .types
            .iter()
            .find(|t| t.foreign == foreign)
            .map(|t| t.adt.as_str())
    }

    /// The data type of `name`: its own mapping, else the mapping of its
    /// nearest mapped supertypes (which must agree), else `Object`'s.
    pub fn adt_for(&self, name: &str) -> AdtLookup {
        if let Some(a) = self.mapped(name) {
            return AdtLookup::Found(a.to_string());
        }
        for level in self.schema.ancestor_levels(name) {
            let mut found: Vec<String> = Vec::new();
            for t in &level {
                if let Some(a) = self.mapped(t) {
                    if !found.iter().any(|f| f == a) {
                        found.push(a.to_string());
                    }
                }
            }
            match found.len() {
                0 => continue,
                1 => return AdtLookup::Found(found.remove(0)),
                _ => return AdtLookup::Ambiguous(found),
            }
        }
        match self.mapped(OBJECT) {
            Some(a) if name != OBJECT => AdtLookup::Found(a.to_string()),
            _ => AdtLookup::Missing,
        }
    }

    /// The argument type for values of foreign type `ty`; the error names
    /// the foreign type that maps nowhere.
    pub fn map_type(&self, ty: &ForeignType) -> Result<ArgType, String> {
        match ty {
            ForeignType::Named(n) => match n.as_str() {
                "Integer" => Ok(ArgType::Prim(PrimType::Int)),
                "Boolean" => Ok(ArgType::Prim(PrimType::Bool)),
                "String" => Ok(ArgType::Prim(PrimType::Str)),
                "Double" => Ok(ArgType::Prim(PrimType::Real)),
                _ => match self.adt_for(n) {
                    AdtLookup::Found(a) => Ok(ArgType::adt(a)),
                    _ => Err(n.clone()),
                },
            },
            ForeignType::Array(e) | ForeignType::Iterable(e) => Ok(ArgType::list(self.map_type(e)?)),
        }
    }
}

struct Builder {
    types: Vec<String>,
    /// Constructors with the index of the class mapping that introduced them.
    constructors: Vec<(Constructor, usize, usize)>,
    rules: Vec<CompiledRule>,
    diags: Vec<Diagnostic>,
}

impl Builder {
    fn add_type(&mut self, t: &str) {
        if !self.types.iter().any(|x| x == t) {
            self.types.push(t.to_string());
        }
    }

    fn add_constructor(&mut self, c: Constructor, mapping: usize, line: usize) {
        match self
            .constructors
            .iter()
            .find(|(d, _, _)| d.ty == c.ty && d.name == c.name)
        {
            Some((d, _, _)) if *d == c => {}
            Some(_) => self.diags.push(Diagnostic::ConflictingConstructor {
                line,
                adt: c.ty.clone(),
                name: c.name.clone(),
            }),
            None => self.constructors.push((c, mapping, line)),
        }
    }
}

fn inline_value(ty: &str, value: &RascalValue) -> Option<(ArgType, Term)> {
    match (ty, value) {
        ("bool", RascalValue::Bool(b)) => Some((ArgType::Prim(PrimType::Bool), Term::bool(*b))),
        ("int", RascalValue::Int(n)) => Some((ArgType::Prim(PrimType::Int), Term::int(*n))),
        (t, RascalValue::Con(name, args)) if args.is_empty() && PrimType::from_name(t).is_none() => {
            Some((ArgType::adt(t), Term::con(name.clone(), t, vec![])))
        }
        _ => None,
    }
}

/// Everything [`infer_signature`] and [`check_spec`] have to say.
fn analyse(spec: &TympanicSpec, schema: &ForeignSchema) -> (Builder, Vec<Diagnostic>) {
    let r = Resolver { spec, schema };
    let mut b = Builder {
        types: Vec::new(),
        constructors: Vec::new(),
        rules: Vec::new(),
        diags: Vec::new(),
    };
    let mut warnings = Vec::new();
    for t in &spec.types {
        if !schema.is_known(&t.foreign) {
            b.diags.push(Diagnostic::UnknownForeignType {
                line: t.line,
                name: t.foreign.clone(),
            });
        }
        b.add_type(&t.adt);
    }
    for (mi, m) in spec.mappings.iter().enumerate() {
        match schema.get(&m.class) {
            None => {
                b.diags.push(Diagnostic::UnknownForeignType {
                    line: m.line,
                    name: m.class.clone(),
                });
                continue;
            }
            Some(TypeDecl::Enum { .. }) => {
                b.diags.push(Diagnostic::NotAClass {
                    line: m.line,
                    class: m.class.clone(),
                });
                continue;
            }
            Some(_) => {}
        }
        let adt = match r.adt_for(&m.class) {
            AdtLookup::Found(a) => a,
            AdtLookup::Missing => {
                b.diags.push(Diagnostic::NoAdtForClass {
                    line: m.line,
                    class: m.class.clone(),
                });
                continue;
            }
            AdtLookup::Ambiguous(candidates) => {
                b.diags.push(Diagnostic::AmbiguousAdt {
                    line: m.line,
                    class: m.class.clone(),
                    candidates,
                });
                continue;
            }
        };
        b.add_type(&adt);
        'rules: for (ri, rule) in m.rules.iter().enumerate() {
            let number = ri + 1;
            let before = b.diags.len();
            // Member types, checked for every field including skipped ones.
            let mut member_types = Vec::new();
            for f in &rule.fields {
                let member = f.kind.member();
                match schema.member(&m.class, member) {
                    Some(mem) => member_types.push(mem.ty.clone()),
                    None => {
                        b.diags.push(Diagnostic::UnknownMember {
                            line: rule.line,
                            class: m.class.clone(),
                            member: member.to_string(),
                        });
                        member_types.push(ForeignType::named(OBJECT));
                    }
                }
                check_guard(schema, &f.kind, member_types.last().expect("pushed"), rule.line, &mut b.diags, &mut warnings);
            }
            if b.diags.len() > before {
                continue;
            }
            let kept: Vec<(&FieldSpec, &ForeignType)> = rule
                .fields
                .iter()
                .zip(&member_types)
                .filter(|(f, _)| !f.skip)
                .collect();
            if kept.len() != rule.constructor.args.len() {
                b.diags.push(Diagnostic::ArityMismatch {
                    line: rule.line,
                    class: m.class.clone(),
                    rule: number,
                    fields: kept.len(),
                    args: rule.constructor.args.len(),
                });
                continue;
            }
            let mut specs = Vec::new();
            let mut args = Vec::new();
            for ((field, mty), arg) in kept.into_iter().zip(&rule.constructor.args) {
                let ty = match arg {
                    ArgTemplate::Inline { ty, value, .. } => match inline_value(ty, value) {
                        Some((aty, term)) => {
                            if let Term::Con { name, .. } = &term {
                                b.add_type(ty);
                                b.add_constructor(Constructor::new(name.clone(), ty.clone(), vec![]), mi, rule.line);
                            }
                            args.push(CompiledArg::Fixed(term));
                            aty
                        }
                        None => {
                            b.diags.push(Diagnostic::UnsupportedInlineValue {
                                line: rule.line,
                                value: arg.to_string(),
                            });
                            continue 'rules;
                        }
                    },
                    ArgTemplate::Name(_) => {
                        let mapped = match &field.kind {
                            FieldKind::Plain(_) | FieldKind::Eq(..) | FieldKind::Neq(..) => r.map_type(mty),
                            FieldKind::Optional(_) => r.map_type(mty).map(ArgType::maybe),
                            FieldKind::Cast { target, .. } => r.map_type(&ForeignType::named(target.clone())),
                            FieldKind::CastArray { elem, .. } => {
                                r.map_type(&ForeignType::named(elem.clone())).map(ArgType::list)
                            }
                        };
                        match mapped {
                            Ok(t) if t.is_valid() => {
                                args.push(CompiledArg::Field {
                                    member: field.kind.member().to_string(),
                                    ty: t.clone(),
                                });
                                t
                            }
                            Ok(t) => {
                                b.diags.push(Diagnostic::UnsupportedInlineValue {
                                    line: rule.line,
                                    value: format!("{t}"),
                                });
                                continue 'rules;
                            }
                            Err(ty) => {
                                b.diags.push(Diagnostic::UnmappedForeignType {
                                    line: rule.line,
                                    class: m.class.clone(),
                                    rule: number,
                                    ty,
                                });
                                continue 'rules;
                            }
                        }
                    }
                };
                specs.push(ArgSpec::new(arg.name(), ty));
            }
            b.add_constructor(
                Constructor::new(rule.constructor.name.clone(), adt.clone(), specs),
                mi,
                rule.line,
            );
            b.rules.push(CompiledRule {
                class: m.class.clone(),
                number,
                fields: rule.fields.clone(),
                constructor: rule.constructor.name.clone(),
                adt: adt.clone(),
                args,
            });
        }
    }
    warnings.extend(unreachable_rules(spec, schema));
    warnings.extend(abstract_without_concrete(spec, schema));
    (b, warnings)
}

fn check_guard(
    schema: &ForeignSchema,
    kind: &FieldKind,
    member_ty: &ForeignType,
    line: usize,
    errors: &mut Vec<Diagnostic>,
    warnings: &mut Vec<Diagnostic>,
) {
    let member = kind.member().to_string();
    match kind {
        FieldKind::Eq(_, v) | FieldKind::Neq(_, v) => {
            if !literal_fits(schema, v, member_ty) {
                warnings.push(Diagnostic::IncompatibleGuard {
                    line,
                    member,
                    value: v.to_string(),
                });
            }
        }
        FieldKind::Cast { target, .. } | FieldKind::CastArray { elem: target, .. } => {
            if !schema.is_known(target) {
                errors.push(Diagnostic::UnknownForeignType {
                    line,
                    name: target.clone(),
                });
                return;
            }
            let possible = match (kind, member_ty) {
                (FieldKind::Cast { .. }, ForeignType::Named(n)) => {
                    schema.is_subtype(target, n) || schema.is_subtype(n, target)
                }
                (FieldKind::Cast { .. }, _) => target == OBJECT,
                (FieldKind::CastArray { .. }, ForeignType::Named(n)) => n == OBJECT,
                (FieldKind::CastArray { .. }, ForeignType::Array(e) | ForeignType::Iterable(e)) => match &**e {
                    ForeignType::Named(n) => schema.is_subtype(target, n) || schema.is_subtype(n, target),
                    _ => false,
                },
                _ => true,
            };
            if !possible {
                let shown = match kind {
                    FieldKind::CastArray { .. } => format!("{target}[]"),
                    _ => target.clone(),
                };
                warnings.push(Diagnostic::ImpossibleCast { line, member, target: shown });
            }
        }
        FieldKind::Plain(_) | FieldKind::Optional(_) => {}
    }
}

/// Whether a guard literal can ever equal a value of the member's type.
fn literal_fits(schema: &ForeignSchema, v: &JavaValue, ty: &ForeignType) -> bool {
    let ForeignType::Named(n) = ty else {
        return matches!(v, JavaValue::Null);
    };
    match v {
        JavaValue::Null => true,
        _ if n == OBJECT => true,
        JavaValue::Bool(_) => n == "Boolean",
        JavaValue::Int(_) => n == "Integer",
        JavaValue::Path(p) => match schema.get(n) {
            Some(TypeDecl::Enum { name, constants }) => {
                let (constant, qualifier) = (p.last().expect("non-empty path"), p.len().checked_sub(2).map(|i| &p[i]));
                constants.contains(constant) && qualifier.is_none_or(|q| q == name)
            }
            _ => false,
        },
    }
}

/// Whether guard `a` holds whenever guard `b` does, judged syntactically.
fn implied_by(schema: &ForeignSchema, a: &FieldKind, b: &FieldKind) -> bool {
    if a.member() != b.member() {
        return false;
    }
    match (a, b) {
        (FieldKind::Eq(_, x), FieldKind::Eq(_, y)) => x == y,
        (FieldKind::Neq(_, x), FieldKind::Neq(_, y)) => x == y,
        (FieldKind::Neq(_, x), FieldKind::Eq(_, y)) => x != y && !matches!((x, y), (JavaValue::Path(_), JavaValue::Path(_))),
        (FieldKind::Neq(_, JavaValue::Null), FieldKind::Cast { .. } | FieldKind::CastArray { .. }) => true,
        (FieldKind::Cast { target: t1, .. }, FieldKind::Cast { target: t2, .. }) => schema.is_subtype(t2, t1),
        (FieldKind::CastArray { elem: t1, .. }, FieldKind::CastArray { elem: t2, .. }) => schema.is_subtype(t2, t1),
        _ => false,
    }
}

fn unreachable_rules(spec: &TympanicSpec, schema: &ForeignSchema) -> Vec<Diagnostic> {
    let mut by_class: BTreeMap<&str, Vec<(usize, &super::syntax::Rule)>> = BTreeMap::new();
    for m in &spec.mappings {
        let rules = by_class.entry(m.class.as_str()).or_default();
        let offset = rules.len();
        rules.extend(m.rules.iter().enumerate().map(|(i, r)| (offset + i + 1, r)));
    }
    let mut out = Vec::new();
    for m in &spec.mappings {
        let rules = &by_class[m.class.as_str()];
        for (j, (nj, rj)) in rules.iter().enumerate() {
            if !m.rules.iter().any(|r| std::ptr::eq(r, *rj)) {
                continue;
            }
            let guards_j: Vec<&FieldKind> = rj.fields.iter().map(|f| &f.kind).filter(|k| k.is_guard()).collect();
            let shadow = rules[..j].iter().find(|(_, ri)| {
                ri.fields
                    .iter()
                    .map(|f| &f.kind)
                    .filter(|k| k.is_guard())
                    .all(|gi| guards_j.iter().any(|gj| implied_by(schema, gi, gj)))
            });
            if let Some((ni, _)) = shadow {
                out.push(Diagnostic::UnreachableRule {
                    line: rj.line,
                    class: m.class.clone(),
                    rule: *nj,
                    shadowed_by: *ni,
                });
            }
        }
    }
    out
}

fn abstract_without_concrete(spec: &TympanicSpec, schema: &ForeignSchema) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for t in &spec.types {
        if !matches!(schema.get(&t.foreign), Some(TypeDecl::Abstract { .. })) {
            continue;
        }
        let covered = schema.concrete_subtypes(&t.foreign).iter().any(|c| {
            spec.mappings
                .iter()
                .any(|m| schema.is_subtype(c, &m.class))
        });
        if !covered {
            out.push(Diagnostic::AbstractWithoutConcrete { name: t.foreign.clone() });
        }
    }
    out
}

/// Derives the data types and constructors a spec describes, plus the
/// module text for them. Fails with the error diagnostics.
pub fn infer_signature(spec: &TympanicSpec, schema: &ForeignSchema) -> Result<Inferred, Vec<Diagnostic>> {
    let (b, _) = analyse(spec, schema);
    if !b.diags.is_empty() {
        return Err(b.diags);
    }
    let signature = Signature::new(
        b.types.iter().cloned(),
        b.constructors.iter().map(|(c, _, _)| c.clone()).collect(),
    )
    .map_err(|e| vec![Diagnostic::InvalidSignature { message: e.to_string() }])?;
    let module_text = module_text(spec, &b);
    Ok(Inferred {
        signature,
        module_text,
        rules: b.rules,
    })
}

fn module_text(spec: &TympanicSpec, b: &Builder) -> String {
    let mut out = format!("module {}\n", spec.export.join("::"));
    for ty in &b.types {
        let mut lines: Vec<(usize, Vec<String>)> = Vec::new();
        for (c, mapping, _) in b.constructors.iter().filter(|(c, _, _)| &c.ty == ty) {
            match lines.iter_mut().find(|(m, _)| m == mapping) {
                Some((_, l)) => l.push(c.to_string()),
                None => lines.push((*mapping, vec![c.to_string()])),
            }
        }
        out.push('\n');
        match lines.as_slice() {
            [] => out.push_str(&format!("data {ty};\n")),
            [(_, one)] => out.push_str(&format!("data {ty} = {};\n", one.join(" | "))),
            many => {
                out.push_str(&format!("data {ty}\n"));
                for (i, (_, l)) in many.iter().enumerate() {
                    let lead = if i == 0 { "=" } else { "|" };
                    out.push_str(&format!("  {lead} {}", l.join(" | ")));
                    out.push_str(if i + 1 == many.len() { ";\n" } else { "\n" });
                }
            }
        }
    }
    out
}

/// All diagnostics for a spec: errors that block inference and warnings
/// about unreachable rules, impossible guards and uncovered abstract types.
pub fn check_spec(spec: &TympanicSpec, schema: &ForeignSchema) -> Vec<Diagnostic> {
    let (b, warnings) = analyse(spec, schema);
    let mut out = b.diags;
    out.extend(warnings);
    out
}
