//! Declarative description of a foreign AST class hierarchy, and values of
//! that hierarchy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::Value as Json;
use thiserror::Error;

/// Built-in foreign types. `Object` is the supertype of everything.
pub const PRIMITIVES: &[&str] = &["Integer", "Boolean", "String", "Double", "Object"];
pub const OBJECT: &str = "Object";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForeignType {
    Named(String),
    Array(Box<ForeignType>),
    Iterable(Box<ForeignType>),
}

impl ForeignType {
    pub fn named(name: impl Into<String>) -> ForeignType {
        ForeignType::Named(name.into())
    }
}

impl fmt::Display for ForeignType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForeignType::Named(n) => f.write_str(n),
            ForeignType::Array(e) => write!(f, "{e}[]"),
            ForeignType::Iterable(e) => write!(f, "Iterable<{e}>"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Member {
    pub name: String,
    pub ty: ForeignType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeDecl {
    Abstract {
        name: String,
        supertypes: Vec<String>,
        members: Vec<Member>,
    },
    Concrete {
        name: String,
        supertypes: Vec<String>,
        members: Vec<Member>,
    },
    Enum {
        name: String,
        constants: Vec<String>,
    },
}

impl TypeDecl {
    pub fn name(&self) -> &str {
        match self {
            TypeDecl::Abstract { name, .. } | TypeDecl::Concrete { name, .. } | TypeDecl::Enum { name, .. } => name,
        }
    }

    pub fn supertypes(&self) -> &[String] {
        match self {
            TypeDecl::Abstract { supertypes, .. } | TypeDecl::Concrete { supertypes, .. } => supertypes,
            TypeDecl::Enum { .. } => &[],
        }
    }

    pub fn members(&self) -> &[Member] {
        match self {
            TypeDecl::Abstract { members, .. } | TypeDecl::Concrete { members, .. } => members,
            TypeDecl::Enum { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("schema is not valid JSON: {0}")]
    Json(String),
    #[error("schema entry {index}: {message}")]
    Malformed { index: usize, message: String },
    #[error("type {0} is declared twice")]
    DuplicateType(String),
    #[error("type {0} is built in and cannot be declared")]
    BuiltinRedeclared(String),
    #[error("type {ty} refers to undeclared type {missing}")]
    UnresolvedType { ty: String, missing: String },
    #[error("type {ty} cannot extend {supertype}")]
    BadSupertype { ty: String, supertype: String },
    #[error("subtype cycle through {0}")]
    Cycle(String),
    #[error("enum {ty} declares {constant} twice")]
    DuplicateConstant { ty: String, constant: String },
    #[error("type {ty} declares member {member} twice")]
    DuplicateMember { ty: String, member: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForeignSchema {
    decls: Vec<TypeDecl>,
    index: BTreeMap<String, usize>,
}

impl ForeignSchema {
    pub fn new(decls: Vec<TypeDecl>) -> Result<ForeignSchema, SchemaError> {
        let mut index = BTreeMap::new();
        for (i, d) in decls.iter().enumerate() {
            if PRIMITIVES.contains(&d.name()) {
                return Err(SchemaError::BuiltinRedeclared(d.name().to_string()));
            }
            if index.insert(d.name().to_string(), i).is_some() {
                return Err(SchemaError::DuplicateType(d.name().to_string()));
            }
        }
        let schema = ForeignSchema { decls, index };
        for d in &schema.decls {
            for s in d.supertypes() {
                match schema.get(s) {
                    None if !PRIMITIVES.contains(&s.as_str()) => {
                        return Err(SchemaError::UnresolvedType {
                            ty: d.name().to_string(),
                            missing: s.clone(),
                        })
                    }
                    Some(TypeDecl::Enum { .. }) | None => {
                        return Err(SchemaError::BadSupertype {
                            ty: d.name().to_string(),
                            supertype: s.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
            let mut seen = BTreeSet::new();
            for m in d.members() {
                if !seen.insert(&m.name) {
                    return Err(SchemaError::DuplicateMember {
                        ty: d.name().to_string(),
                        member: m.name.clone(),
                    });
                }
                if let Some(missing) = schema.unresolved(&m.ty) {
                    return Err(SchemaError::UnresolvedType {
                        ty: d.name().to_string(),
                        missing: missing.to_string(),
                    });
                }
            }
            if let TypeDecl::Enum { name, constants } = d {
                let mut seen = BTreeSet::new();
                for c in constants {
                    if !seen.insert(c) {
                        return Err(SchemaError::DuplicateConstant {
                            ty: name.clone(),
                            constant: c.clone(),
                        });
                    }
                }
            }
        }
        schema.check_acyclic()?;
        Ok(schema)
    }

    fn unresolved<'a>(&self, ty: &'a ForeignType) -> Option<&'a str> {
        match ty {
            ForeignType::Named(n) if self.is_known(n) => None,
            ForeignType::Named(n) => Some(n),
            ForeignType::Array(e) | ForeignType::Iterable(e) => self.unresolved(e),
        }
    }

    fn check_acyclic(&self) -> Result<(), SchemaError> {
        // 0 = unvisited, 1 = on stack, 2 = done
        fn visit(s: &ForeignSchema, i: usize, state: &mut [u8]) -> Result<(), SchemaError> {
            match state[i] {
                1 => return Err(SchemaError::Cycle(s.decls[i].name().to_string())),
                2 => return Ok(()),
                _ => {}
            }
            state[i] = 1;
            for sup in s.decls[i].supertypes() {
                if let Some(&j) = s.index.get(sup) {
                    visit(s, j, state)?;
                }
            }
            state[i] = 2;
            Ok(())
        }
        let mut state = vec![0u8; self.decls.len()];
        for i in 0..self.decls.len() {
            visit(self, i, &mut state)?;
        }
        Ok(())
    }

    /// Reads `{"types": [...]}` (or a bare array) of
    /// `{"abstract": name}`, `{"concrete": name, "implements": [...], "members": [...]}`
    /// and `{"enum": name, "constants": [...]}` entries.
    pub fn from_json(text: &str) -> Result<ForeignSchema, SchemaError> {
        let doc: Json = serde_json::from_str(text).map_err(|e| SchemaError::Json(e.to_string()))?;
        let entries = match &doc {
            Json::Array(a) => a,
            Json::Object(o) => match o.get("types") {
                Some(Json::Array(a)) => a,
                _ => return Err(SchemaError::Json("expected an object with a `types` array".into())),
            },
            _ => return Err(SchemaError::Json("expected an object with a `types` array".into())),
        };
        let decls = entries
            .iter()
            .enumerate()
            .map(|(index, e)| {
                decl_from_json(e).map_err(|message| SchemaError::Malformed { index, message })
            })
            .collect::<Result<Vec<_>, _>>()?;
        ForeignSchema::new(decls)
    }

    pub fn decls(&self) -> &[TypeDecl] {
        &self.decls
    }

    pub fn get(&self, name: &str) -> Option<&TypeDecl> {
        self.index.get(name).map(|&i| &self.decls[i])
    }

    pub fn is_primitive(name: &str) -> bool {
        PRIMITIVES.contains(&name)
    }

    pub fn is_known(&self, name: &str) -> bool {
        Self::is_primitive(name) || self.index.contains_key(name)
    }

    /// Supertypes of `name` grouped by distance, nearest first, excluding
    /// `name` itself and the implicit `Object`.
    pub fn ancestor_levels(&self, name: &str) -> Vec<Vec<String>> {
        let mut levels = Vec::new();
        let mut seen = BTreeSet::from([name.to_string()]);
        let mut frontier = vec![name.to_string()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for t in &frontier {
                for s in self.get(t).map(TypeDecl::supertypes).unwrap_or(&[]) {
                    if seen.insert(s.clone()) {
                        next.push(s.clone());
                    }
                }
            }
            if !next.is_empty() {
                levels.push(next.clone());
            }
            frontier = next;
        }
        levels
    }

    /// Reflexive, transitive subtyping with `Object` on top.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        sub == sup || sup == OBJECT || self.ancestor_levels(sub).iter().flatten().any(|t| t == sup)
    }

    /// A member declared on `class` or inherited from the nearest supertype
    /// declaring it.
    pub fn member(&self, class: &str, member: &str) -> Option<&Member> {
        let find = |t: &str| self.get(t)?.members().iter().find(|m| m.name == member);
        find(class).or_else(|| {
            self.ancestor_levels(class)
                .iter()
                .flatten()
                .find_map(|t| find(t))
        })
    }

    /// All members visible on `class`, own members first.
    pub fn all_members(&self, class: &str) -> Vec<&Member> {
        let mut out: Vec<&Member> = Vec::new();
        let own = std::iter::once(class.to_string());
        for t in own.chain(self.ancestor_levels(class).into_iter().flatten()) {
            for m in self.get(&t).map(TypeDecl::members).unwrap_or(&[]) {
                if !out.iter().any(|o| o.name == m.name) {
                    out.push(m);
                }
            }
        }
        out
    }

    /// Concrete types that are subtypes of `name` (including itself).
    pub fn concrete_subtypes(&self, name: &str) -> Vec<&str> {
        self.decls
            .iter()
            .filter(|d| matches!(d, TypeDecl::Concrete { .. }) && self.is_subtype(d.name(), name))
            .map(TypeDecl::name)
            .collect()
    }

    /// Checks that `v` is a value of `ty`: object tags name concrete
    /// subtypes, every visible member is present with a conforming value,
    /// and `null` is accepted for any type.
    pub fn check_value(&self, v: &ForeignValue, ty: &ForeignType) -> Result<(), ValueError> {
        let mut path = ValuePath::root();
        self.conforms(v, ty, &mut path)
    }

    fn conforms(&self, v: &ForeignValue, ty: &ForeignType, path: &mut ValuePath) -> Result<(), ValueError> {
        let fail = |path: &ValuePath, message: String| Err(ValueError { path: path.to_string(), message });
        match (v, ty) {
            (ForeignValue::Null, _) => Ok(()),
            (ForeignValue::Arr(items), ForeignType::Array(e) | ForeignType::Iterable(e)) => {
                for (i, item) in items.iter().enumerate() {
                    path.push(Step::Index(i));
                    self.conforms(item, e, path)?;
                    path.pop();
                }
                Ok(())
            }
            (_, ForeignType::Array(_) | ForeignType::Iterable(_)) => {
                fail(path, format!("expected an array for {ty}"))
            }
            (v, ForeignType::Named(n)) => {
                let runtime = match v.runtime_type() {
                    Some(r) => r,
                    None if n == OBJECT => return self.conforms_items(v, path),
                    None => return fail(path, format!("an array is not a {n}")),
                };
                if !self.is_subtype(&runtime, n) {
                    return fail(path, format!("a value of type {runtime} is not a {n}"));
                }
                match v {
                    ForeignValue::Obj { tag, fields } => self.conforms_obj(tag, fields, path),
                    ForeignValue::Enum { ty, constant } => match self.get(ty) {
                        Some(TypeDecl::Enum { constants, .. }) if constants.contains(constant) => Ok(()),
                        _ => fail(path, format!("{ty}.{constant} is not a declared enum constant")),
                    },
                    _ => Ok(()),
                }
            }
        }
    }

    fn conforms_items(&self, v: &ForeignValue, path: &mut ValuePath) -> Result<(), ValueError> {
        let ForeignValue::Arr(items) = v else { return Ok(()) };
        for (i, item) in items.iter().enumerate() {
            path.push(Step::Index(i));
            self.conforms(item, &ForeignType::named(OBJECT), path)?;
            path.pop();
        }
        Ok(())
    }

    fn conforms_obj(
        &self,
        tag: &str,
        fields: &BTreeMap<String, ForeignValue>,
        path: &mut ValuePath,
    ) -> Result<(), ValueError> {
        if !matches!(self.get(tag), Some(TypeDecl::Concrete { .. })) {
            return Err(ValueError {
                path: path.to_string(),
                message: format!("{tag} is not a concrete type of the schema"),
            });
        }
        let members = self.all_members(tag);
        for name in fields.keys() {
            if !members.iter().any(|m| &m.name == name) {
                return Err(ValueError {
                    path: path.to_string(),
                    message: format!("{tag} has no member {name}"),
                });
            }
        }
        for m in members {
            path.push(Step::Member(m.name.clone()));
            match fields.get(&m.name) {
                None => {
                    return Err(ValueError {
                        path: path.to_string(),
                        message: format!("missing member {} of {tag}", m.name),
                    })
                }
                Some(v) => self.conforms(v, &m.ty, path)?,
            }
            path.pop();
        }
        Ok(())
    }
}

fn decl_from_json(e: &Json) -> Result<TypeDecl, String> {
    let o = e.as_object().ok_or("expected an object")?;
    let string = |key: &str| -> Result<Option<String>, String> {
        match o.get(key) {
            None => Ok(None),
            Some(Json::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(format!("`{key}` must be a string")),
        }
    };
    let strings = |key: &str| -> Result<Vec<String>, String> {
        match o.get(key) {
            None => Ok(Vec::new()),
            Some(Json::Array(a)) => a
                .iter()
                .map(|s| s.as_str().map(String::from).ok_or(format!("`{key}` must hold strings")))
                .collect(),
            Some(_) => Err(format!("`{key}` must be an array")),
        }
    };
    let members = || -> Result<Vec<Member>, String> {
        match o.get("members") {
            None => Ok(Vec::new()),
            Some(Json::Array(a)) => a.iter().map(member_from_json).collect(),
            Some(_) => Err("`members` must be an array".into()),
        }
    };
    if let Some(name) = string("abstract")? {
        Ok(TypeDecl::Abstract {
            name,
            supertypes: strings("implements")?,
            members: members()?,
        })
    } else if let Some(name) = string("concrete")? {
        Ok(TypeDecl::Concrete {
            name,
            supertypes: strings("implements")?,
            members: members()?,
        })
    } else if let Some(name) = string("enum")? {
        Ok(TypeDecl::Enum {
            name,
            constants: strings("constants")?,
        })
    } else {
        Err("expected one of `abstract`, `concrete` or `enum`".into())
    }
}

fn member_from_json(m: &Json) -> Result<Member, String> {
    let name = m
        .get("name")
        .and_then(Json::as_str)
        .ok_or("member needs a string `name`")?;
    let ty = m.get("type").ok_or(format!("member {name} needs a `type`"))?;
    Ok(Member {
        name: name.to_string(),
        ty: foreign_type_from_json(ty)?,
    })
}

fn foreign_type_from_json(t: &Json) -> Result<ForeignType, String> {
    match t {
        Json::String(s) => Ok(ForeignType::Named(s.clone())),
        Json::Object(o) if o.len() == 1 => match o.iter().next() {
            Some((k, v)) if k == "array" => Ok(ForeignType::Array(Box::new(foreign_type_from_json(v)?))),
            Some((k, v)) if k == "iterable" => Ok(ForeignType::Iterable(Box::new(foreign_type_from_json(v)?))),
            _ => Err(format!("unknown foreign type {t}")),
        },
        _ => Err(format!("unknown foreign type {t}")),
    }
}

/// A value of the foreign AST.
#[derive(Clone, Debug, PartialEq)]
pub enum ForeignValue {
    Obj {
        tag: String,
        fields: BTreeMap<String, ForeignValue>,
    },
    Enum {
        ty: String,
        constant: String,
    },
    Int(i64),
    Bool(bool),
    Str(String),
    Real(f64),
    Arr(Vec<ForeignValue>),
    Null,
}

impl ForeignValue {
    pub fn obj(tag: impl Into<String>, fields: impl IntoIterator<Item = (&'static str, ForeignValue)>) -> ForeignValue {
        ForeignValue::Obj {
            tag: tag.into(),
            fields: fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn enum_const(ty: impl Into<String>, constant: impl Into<String>) -> ForeignValue {
        ForeignValue::Enum {
            ty: ty.into(),
            constant: constant.into(),
        }
    }

    /// The dynamic type a Java `instanceof` would see; `None` for null and
    /// arrays.
    pub fn runtime_type(&self) -> Option<String> {
        match self {
            ForeignValue::Obj { tag, .. } => Some(tag.clone()),
            ForeignValue::Enum { ty, .. } => Some(ty.clone()),
            ForeignValue::Int(_) => Some("Integer".into()),
            ForeignValue::Bool(_) => Some("Boolean".into()),
            ForeignValue::Str(_) => Some("String".into()),
            ForeignValue::Real(_) => Some("Double".into()),
            ForeignValue::Arr(_) | ForeignValue::Null => None,
        }
    }

    /// Reads the wire form: `{"type": tag, "fields": {...}}`,
    /// `{"enum": "Op.PLUS"}`, `{"int": n}`, `{"bool": b}`, `{"str": s}`,
    /// `{"real": x}`, `{"array": [...]}` or `null`.
    pub fn from_json(text: &str) -> Result<ForeignValue, ValueError> {
        let doc: Json = serde_json::from_str(text).map_err(|e| ValueError {
            path: "$".into(),
            message: e.to_string(),
        })?;
        let mut path = ValuePath::root();
        value_from_json(&doc, &mut path)
    }

    pub fn to_json(&self) -> Json {
        match self {
            ForeignValue::Obj { tag, fields } => serde_json::json!({
                "type": tag,
                "fields": fields.iter().map(|(k, v)| (k.clone(), v.to_json())).collect::<serde_json::Map<_, _>>(),
            }),
            ForeignValue::Enum { ty, constant } => serde_json::json!({ "enum": format!("{ty}.{constant}") }),
            ForeignValue::Int(n) => serde_json::json!({ "int": n }),
            ForeignValue::Bool(b) => serde_json::json!({ "bool": b }),
            ForeignValue::Str(s) => serde_json::json!({ "str": s }),
            ForeignValue::Real(x) => serde_json::json!({ "real": x }),
            ForeignValue::Arr(items) => serde_json::json!({ "array": items.iter().map(ForeignValue::to_json).collect::<Vec<_>>() }),
            ForeignValue::Null => Json::Null,
        }
    }
}

fn value_from_json(j: &Json, path: &mut ValuePath) -> Result<ForeignValue, ValueError> {
    let fail = |path: &ValuePath, message: &str| ValueError {
        path: path.to_string(),
        message: message.to_string(),
    };
    let o = match j {
        Json::Null => return Ok(ForeignValue::Null),
        Json::Object(o) => o,
        _ => return Err(fail(path, "expected null or an object")),
    };
    if let Some(tag) = o.get("type") {
        let tag = tag.as_str().ok_or_else(|| fail(path, "`type` must be a string"))?;
        let mut fields = BTreeMap::new();
        match o.get("fields") {
            None => {}
            Some(Json::Object(fs)) => {
                for (k, v) in fs {
                    path.push(Step::Member(k.clone()));
                    fields.insert(k.clone(), value_from_json(v, path)?);
                    path.pop();
                }
            }
            Some(_) => return Err(fail(path, "`fields` must be an object")),
        }
        return Ok(ForeignValue::Obj {
            tag: tag.to_string(),
            fields,
        });
    }
    if o.len() != 1 {
        return Err(fail(path, "expected an object with exactly one of type/enum/int/bool/str/real/array"));
    }
    let (k, v) = o.iter().next().expect("one entry");
    match (k.as_str(), v) {
        ("enum", Json::String(s)) => match s.rsplit_once('.') {
            Some((ty, constant)) if !ty.is_empty() && !constant.is_empty() => Ok(ForeignValue::enum_const(ty, constant)),
            _ => Err(fail(path, "enum constants are written `Type.CONSTANT`")),
        },
        ("int", Json::Number(n)) => n
            .as_i64()
            .map(ForeignValue::Int)
            .ok_or_else(|| fail(path, "`int` must be a 64-bit integer")),
        ("bool", Json::Bool(b)) => Ok(ForeignValue::Bool(*b)),
        ("str", Json::String(s)) => Ok(ForeignValue::Str(s.clone())),
        ("real", Json::Number(n)) => n
            .as_f64()
            .map(ForeignValue::Real)
            .ok_or_else(|| fail(path, "`real` must be a number")),
        ("array", Json::Array(items)) => {
            let mut out = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                path.push(Step::Index(i));
                out.push(value_from_json(item, path)?);
                path.pop();
            }
            Ok(ForeignValue::Arr(out))
        }
        _ => Err(fail(path, &format!("malformed `{k}` value"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct ValueError {
    pub path: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    Member(String),
    Index(usize),
}

/// Location inside a foreign value: `$.getLhs.getBody[2]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct ValuePath(Vec<Step>);

impl ValuePath {
    pub(crate) fn root() -> ValuePath {
        ValuePath(Vec::new())
    }

    pub(crate) fn push(&mut self, s: Step) {
        self.0.push(s);
    }

    pub(crate) fn pop(&mut self) {
        self.0.pop();
    }

    /// The innermost member name on the path.
    pub(crate) fn last_member(&self) -> Option<&str> {
        self.0.iter().rev().find_map(|s| match s {
            Step::Member(m) => Some(m.as_str()),
            Step::Index(_) => None,
        })
    }
}

impl fmt::Display for ValuePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("$")?;
        for s in &self.0 {
            match s {
                Step::Member(m) => write!(f, ".{m}")?,
                Step::Index(i) => write!(f, "[{i}]")?,
            }
        }
        Ok(())
    }
}
