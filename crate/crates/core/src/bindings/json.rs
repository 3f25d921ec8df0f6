//! Built-in JSON binding.
//!
//! The accepted dialect is standard JSON plus bare identifier keys
//! (`{name:"Rodin"}`), which the hole encoding `{_hole:0}` relies on. Every
//! number becomes a `real`. The printer always quotes keys.

use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::concretely::{BlackBoxParser, ParserError, ParserRegistry, RegistryError};
use crate::json_text::{self, Node, Value};
use crate::term::{check_term, render_real, ArgType, Prim, Signature, Term};

pub const JSON_SIGNATURE: &str = "\
data JSON
  = boolean(bool b) | number(real n) | string(str s) | array(list[JSON] elts)
  | null() | object(list[Prop] props);
data Prop = prop(Id name, JSON val);
data Id = id(str name);
";

pub fn json_signature() -> &'static Arc<Signature> {
    static SIG: OnceLock<Arc<Signature>> = OnceLock::new();
    SIG.get_or_init(|| Arc::new(Signature::parse(JSON_SIGNATURE).expect("built-in JSON signature")))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("wrapped property did not parse to an object with one property")]
    WrappedParseNotObject,
}

impl From<json_text::SyntaxError> for JsonError {
    fn from(e: json_text::SyntaxError) -> JsonError {
        JsonError::Syntax {
            line: e.line,
            col: e.col,
            message: e.message,
        }
    }
}

pub fn parse_json(text: &str) -> Result<Term, JsonError> {
    let node = json_text::parse(text, true)?;
    to_term(&node)
}

fn to_term(node: &Node) -> Result<Term, JsonError> {
    let json = |name: &str, args| Term::con(name, "JSON", args);
    Ok(match &node.value {
        Value::Null => json("null", vec![]),
        Value::Bool(b) => json("boolean", vec![Term::bool(*b)]),
        Value::Str(s) => json("string", vec![Term::str(s.clone())]),
        Value::Number(lexeme) => {
            let x: f64 = lexeme.parse().map_err(|_| JsonError::Syntax {
                line: node.pos.line,
                col: node.pos.col,
                message: format!("invalid number `{lexeme}`"),
            })?;
            if !x.is_finite() {
                return Err(JsonError::Syntax {
                    line: node.pos.line,
                    col: node.pos.col,
                    message: format!("number `{lexeme}` is out of range"),
                });
            }
            json("number", vec![Term::real(x)])
        }
        Value::Array(elems) => json(
            "array",
            vec![Term::list(
                elems.iter().map(to_term).collect::<Result<_, _>>()?,
                ArgType::adt("JSON"),
            )],
        ),
        Value::Object(members) => {
            let props = members
                .iter()
                .map(|(k, v)| Ok(prop(k, to_term(v)?)))
                .collect::<Result<_, JsonError>>()?;
            json("object", vec![Term::list(props, ArgType::adt("Prop"))])
        }
    })
}

fn prop(key: &str, val: Term) -> Term {
    Term::con(
        "prop",
        "Prop",
        vec![Term::con("id", "Id", vec![Term::str(key)]), val],
    )
}

/// Parses one property by wrapping it in braces and taking the first
/// property of the resulting object.
pub fn parse_prop(text: &str) -> Result<Term, JsonError> {
    let wrapped = format!("{{{text}}}");
    let t = parse_json(&wrapped).map_err(|e| match e {
        JsonError::Syntax { line, col, message } => JsonError::Syntax {
            line,
            col: if line == 1 { col.saturating_sub(1).max(1) } else { col },
            message,
        },
        e => e,
    })?;
    match t {
        Term::Con { name, mut args, .. } if name == "object" => match args.pop() {
            Some(Term::List { mut elems, .. }) if elems.len() == 1 => Ok(elems.remove(0)),
            _ => Err(JsonError::WrappedParseNotObject),
        },
        _ => Err(JsonError::WrappedParseNotObject),
    }
}

pub fn prop_hole(i: usize) -> String {
    format!("_hole:{i}")
}

/// A JSON hole is an object literal holding one `_hole` property.
pub fn json_hole(i: usize) -> String {
    format!("{{{}}}", prop_hole(i))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrintError {
    #[error("not a well-typed JSON or Prop term: {0}")]
    IllTyped(String),
    #[error("{0} has no JSON representation")]
    NonFinite(String),
}

/// Canonical rendering: quoted keys, no insignificant whitespace, reals
/// with the fewest digits that read back exactly (`29.0`).
pub fn print_json(t: &Term) -> Result<String, PrintError> {
    let ty = match t {
        Term::Con { ty, .. } if ty == "JSON" || ty == "Prop" => ArgType::adt(ty.clone()),
        _ => return Err(PrintError::IllTyped(t.to_string())),
    };
    if let Some(e) = check_term(json_signature(), t, &ty).into_iter().next() {
        return Err(PrintError::IllTyped(e.to_string()));
    }
    let mut out = String::new();
    write_json(&mut out, t)?;
    Ok(out)
}

fn write_json(out: &mut String, t: &Term) -> Result<(), PrintError> {
    let Term::Con { name, args, .. } = t else {
        unreachable!("checked against the JSON signature")
    };
    match (name.as_str(), args.as_slice()) {
        ("null", []) => out.push_str("null"),
        ("boolean", [Term::Prim(Prim::Bool(b))]) => out.push_str(if *b { "true" } else { "false" }),
        ("number", [Term::Prim(Prim::Real(x))]) => {
            if !x.is_finite() {
                return Err(PrintError::NonFinite(render_real(*x)));
            }
            out.push_str(&render_real(*x));
        }
        ("string", [Term::Prim(Prim::Str(s))]) => json_text::write_string(out, s),
        ("array", [Term::List { elems, .. }]) => {
            out.push('[');
            for (i, e) in elems.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(out, e)?;
            }
            out.push(']');
        }
        ("object", [Term::List { elems, .. }]) => {
            out.push('{');
            for (i, e) in elems.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(out, e)?;
            }
            out.push('}');
        }
        ("prop", [key, val]) => {
            let Term::Con { args: k, .. } = key else { unreachable!() };
            let [Term::Prim(Prim::Str(k))] = k.as_slice() else { unreachable!() };
            json_text::write_string(out, k);
            out.push(':');
            write_json(out, val)?;
        }
        _ => unreachable!("checked against the JSON signature"),
    }
    Ok(())
}

/// The JSON binding as a black-box parser serving `JSON` and `Prop`.
#[derive(Clone, Copy, Debug, Default)]
pub struct JsonParser;

impl BlackBoxParser for JsonParser {
    fn parse(&self, nonterminal: &str, text: &str) -> Result<Term, ParserError> {
        let r = match nonterminal {
            "JSON" => parse_json(text),
            "Prop" => parse_prop(text),
            other => return Err(ParserError::Unsupported(other.to_string())),
        };
        r.map_err(|e| match e {
            JsonError::Syntax { line, col, message } => ParserError::Syntax { line, col, message },
            e => ParserError::Projection(e.to_string()),
        })
    }
}

/// Registers `JSON` and `Prop` with their parse functions and hole encoders.
pub fn register_json(reg: &mut ParserRegistry) -> Result<(), RegistryError> {
    let sig = json_signature().clone();
    reg.register("JSON", sig.clone(), Arc::new(JsonParser))?;
    reg.register_hole("JSON", Arc::new(json_hole))?;
    reg.register("Prop", sig, Arc::new(JsonParser))?;
    reg.register_hole("Prop", Arc::new(prop_hole))?;
    Ok(())
}
