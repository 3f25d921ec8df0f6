//! Canonical JSON wire form for terms.
//!
//! ```text
//! term    := {"con": s, "type": s, "args": [term*]}
//!          | {"int": n} | {"real": x} | {"bool": b} | {"str": s}
//!          | {"list": [term*], "elem": argtype}
//! argtype := {"adt": s} | {"list": argtype} | {"maybe": argtype} | {"prim": "int"|"real"|"bool"|"str"}
//! ```
//!
//! Encoding is deterministic: keys are written in the order shown, no
//! whitespace, reals always carry a fractional part. Non-finite reals are
//! written as the strings `"NaN"`, `"Infinity"` and `"-Infinity"`.

use thiserror::Error;

use super::{ArgType, Prim, PrimType, Term};
use crate::json_text::{self, Node, Pos, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct WireError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl WireError {
    fn at(pos: Pos, message: impl Into<String>) -> WireError {
        WireError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

impl From<json_text::SyntaxError> for WireError {
    fn from(e: json_text::SyntaxError) -> WireError {
        WireError {
            line: e.line,
            col: e.col,
            message: e.message,
        }
    }
}

/// Shortest decimal that reads back to the same `f64`, never in exponent
/// form, always with a decimal point: `29.0`, `0.1`, `-3.25`.
pub fn render_real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Infinity" } else { "-Infinity" }.into();
    }
    let mut s = x.to_string();
    if !s.contains('.') {
        s.push_str(".0");
    }
    s
}

pub fn encode_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t);
    out
}

pub fn encode_argtype(ty: &ArgType) -> String {
    let mut out = String::new();
    write_argtype(&mut out, ty);
    out
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Con { name, ty, args } => {
            out.push_str("{\"con\":");
            json_text::write_string(out, name);
            out.push_str(",\"type\":");
            json_text::write_string(out, ty);
            out.push_str(",\"args\":[");
            write_seq(out, args);
            out.push_str("]}");
        }
        Term::Prim(Prim::Int(i)) => {
            out.push_str("{\"int\":");
            out.push_str(&i.to_string());
            out.push('}');
        }
        Term::Prim(Prim::Real(x)) => {
            out.push_str("{\"real\":");
            if x.is_finite() {
                out.push_str(&render_real(*x));
            } else {
                json_text::write_string(out, &render_real(*x));
            }
            out.push('}');
        }
        Term::Prim(Prim::Bool(b)) => {
            out.push_str(if *b { "{\"bool\":true}" } else { "{\"bool\":false}" });
        }
        Term::Prim(Prim::Str(s)) => {
            out.push_str("{\"str\":");
            json_text::write_string(out, s);
            out.push('}');
        }
        Term::List { elems, elem } => {
            out.push_str("{\"list\":[");
            write_seq(out, elems);
            out.push_str("],\"elem\":");
            write_argtype(out, elem);
            out.push('}');
        }
    }
}

fn write_seq(out: &mut String, ts: &[Term]) {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_term(out, t);
    }
}

fn write_argtype(out: &mut String, ty: &ArgType) {
    match ty {
        ArgType::Adt(n) => {
            out.push_str("{\"adt\":");
            json_text::write_string(out, n);
            out.push('}');
        }
        ArgType::List(e) => {
            out.push_str("{\"list\":");
            write_argtype(out, e);
            out.push('}');
        }
        ArgType::Maybe(e) => {
            out.push_str("{\"maybe\":");
            write_argtype(out, e);
            out.push('}');
        }
        ArgType::Prim(p) => {
            out.push_str("{\"prim\":\"");
            out.push_str(p.name());
            out.push_str("\"}");
        }
    }
}

pub fn decode_term(text: &str) -> Result<Term, WireError> {
    let node = json_text::parse(text, false)?;
    term_from_node(&node)
}

/// Decodes an already-parsed JSON node (used by the subprocess protocol,
/// where the term is embedded in a response envelope).
pub(crate) fn term_from_node(node: &Node) -> Result<Term, WireError> {
    let members = object(node, "term")?;
    let keys: Vec<&str> = members.iter().map(|(k, _)| k.as_str()).collect();
    let get = |k: &str| members.iter().find(|(m, _)| m == k).map(|(_, v)| v);
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    match sorted.as_slice() {
        ["args", "con", "type"] => {
            let name = string(get("con").unwrap())?;
            let ty = string(get("type").unwrap())?;
            let args = array(get("args").unwrap())?
                .iter()
                .map(term_from_node)
                .collect::<Result<_, _>>()?;
            Ok(Term::Con { name, ty, args })
        }
        ["elem", "list"] => {
            let elems = array(get("list").unwrap())?
                .iter()
                .map(term_from_node)
                .collect::<Result<_, _>>()?;
            let elem = argtype_from_node(get("elem").unwrap())?;
            Ok(Term::List { elems, elem })
        }
        ["int"] => {
            let v = get("int").unwrap();
            match &v.value {
                Value::Number(n) => n
                    .parse::<i64>()
                    .map(Term::int)
                    .map_err(|_| WireError::at(v.pos, format!("`{n}` is not a 64-bit integer"))),
                _ => Err(WireError::at(v.pos, "expected integer")),
            }
        }
        ["real"] => {
            let v = get("real").unwrap();
            match &v.value {
                Value::Number(n) => n
                    .parse::<f64>()
                    .map(Term::real)
                    .map_err(|_| WireError::at(v.pos, format!("`{n}` is not a real"))),
                Value::Str(s) => match s.as_str() {
                    "NaN" => Ok(Term::real(f64::NAN)),
                    "Infinity" => Ok(Term::real(f64::INFINITY)),
                    "-Infinity" => Ok(Term::real(f64::NEG_INFINITY)),
                    _ => Err(WireError::at(v.pos, "expected number")),
                },
                _ => Err(WireError::at(v.pos, "expected number")),
            }
        }
        ["bool"] => {
            let v = get("bool").unwrap();
            match v.value {
                Value::Bool(b) => Ok(Term::bool(b)),
                _ => Err(WireError::at(v.pos, "expected true or false")),
            }
        }
        ["str"] => Ok(Term::str(string(get("str").unwrap())?)),
        _ => Err(WireError::at(
            node.pos,
            format!("unrecognised term keys {keys:?}"),
        )),
    }
}

pub(crate) fn argtype_from_node(node: &Node) -> Result<ArgType, WireError> {
    let members = object(node, "argtype")?;
    let [(key, v)] = members else {
        return Err(WireError::at(node.pos, "argtype must have exactly one key"));
    };
    let ty = match key.as_str() {
        "adt" => ArgType::Adt(string(v)?),
        "list" => ArgType::list(argtype_from_node(v)?),
        "maybe" => ArgType::maybe(argtype_from_node(v)?),
        "prim" => {
            let p = string(v)?;
            ArgType::Prim(
                PrimType::from_name(&p)
                    .ok_or_else(|| WireError::at(v.pos, format!("unknown primitive `{p}`")))?,
            )
        }
        other => return Err(WireError::at(node.pos, format!("unknown argtype key `{other}`"))),
    };
    if !ty.is_valid() {
        return Err(WireError::at(node.pos, "Maybe nested directly inside Maybe"));
    }
    Ok(ty)
}

fn object<'a>(node: &'a Node, what: &str) -> Result<&'a [(String, Node)], WireError> {
    match &node.value {
        Value::Object(m) => Ok(m),
        _ => Err(WireError::at(node.pos, format!("expected {what} object"))),
    }
}

fn array(node: &Node) -> Result<&[Node], WireError> {
    match &node.value {
        Value::Array(a) => Ok(a),
        _ => Err(WireError::at(node.pos, "expected array")),
    }
}

fn string(node: &Node) -> Result<String, WireError> {
    match &node.value {
        Value::Str(s) => Ok(s.clone()),
        _ => Err(WireError::at(node.pos, "expected string")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_nullary_constructor() {
        assert_eq!(
            encode_term(&Term::con("null", "JSON", vec![])),
            r#"{"con":"null","type":"JSON","args":[]}"#
        );
    }

    #[test]
    fn encodes_reals_with_fraction() {
        assert_eq!(
            encode_term(&Term::con("number", "JSON", vec![Term::real(29.0)])),
            r#"{"con":"number","type":"JSON","args":[{"real":29.0}]}"#
        );
        assert_eq!(render_real(1e21), "1000000000000000000000.0");
        assert_eq!(render_real(-0.5), "-0.5");
        assert_eq!(render_real(-0.0), "-0.0");
        assert_eq!(render_real(1e-7), "0.0000001");
    }

    #[test]
    fn encodes_lists_and_argtypes() {
        let t = Term::list(vec![Term::int(1)], ArgType::maybe(ArgType::Prim(PrimType::Int)));
        assert_eq!(
            encode_term(&t),
            r#"{"list":[{"int":1}],"elem":{"maybe":{"prim":"int"}}}"#
        );
    }

    #[test]
    fn decode_accepts_any_key_order() {
        let t = decode_term(r#"{ "args": [ {"bool": true} ], "type": "JSON", "con": "boolean" }"#).unwrap();
        assert_eq!(t, Term::con("boolean", "JSON", vec![Term::bool(true)]));
        assert_eq!(decode_term(r#"{"real": 29}"#).unwrap(), Term::real(29.0));
    }

    #[test]
    fn non_finite_reals_round_trip() {
        for x in [f64::NAN, f64::INFINITY, f64::NEG_INFINITY] {
            let t = Term::real(x);
            assert_eq!(decode_term(&encode_term(&t)).unwrap(), t);
        }
    }

    #[test]
    fn decode_errors_carry_positions() {
        let e = decode_term("{\"int\": 1.5}").unwrap_err();
        assert_eq!((e.line, e.col), (1, 9));
        let e = decode_term("{\"con\": \"a\",\n \"type\": \"T\"}").unwrap_err();
        assert_eq!((e.line, e.col), (1, 1));
        let e = decode_term("{\"list\": [], \"elem\": {\"prim\": \"float\"}}").unwrap_err();
        assert!(e.message.contains("float"));
        assert!(decode_term("{\"con\": \"a\"").is_err());
        assert!(decode_term("{\"list\":[],\"elem\":{\"maybe\":{\"maybe\":{\"adt\":\"A\"}}}}").is_err());
    }
}
