//! From concrete fragments with typed holes to abstract patterns.
//!
//! The pipeline for a fragment such as `{<Prop p>}` of nonterminal `JSON`:
//!
//! 1. [`split_fragment`] separates literal text from holes and numbers the
//!    holes left to right from 0.
//! 2. [`lower`] replaces hole *i* of type τ with the registered placeholder
//!    text `hole_τ(i)` and records the placeholder's parsed image
//!    `parse_τ(hole_τ(i))`.
//! 3. The flattened text is handed to the black-box parser for the
//!    fragment's nonterminal.
//! 4. [`lift`] replaces every image in the parse result with the hole it
//!    stands for, turning the term into a [`Pattern`].
//!
//! By default each image must occur exactly once in the parse result. If
//! user text happens to spell a placeholder, the image occurs twice and
//! lifting fails with [`ConcretelyError::HoleCaptured`] instead of silently
//! producing a non-linear pattern. [`CaptureMode::Lenient`] allows it.

mod registry;
mod subprocess;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::pattern::{check_pattern, Pattern, ANONYMOUS};
use crate::term::{ArgType, Term};

pub use registry::{
    hole_template, BlackBoxParser, ContextWrap, HoleEncoder, ParserError, ParserRegistry,
    RegistryError,
};
pub use subprocess::{SubprocessConfig, SubprocessParser};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConcretelyError {
    #[error("unterminated hole starting at offset {offset}")]
    UnterminatedHole { offset: usize },
    #[error("hole at offset {offset} has no type")]
    EmptyHoleType { offset: usize },
    #[error("malformed hole at offset {offset}: expected `<Type name>` or `<Type* name>`")]
    MalformedHole { offset: usize },
    #[error("hole variable {name} is used with different types")]
    ConflictingHoleTypes { name: String },
    #[error("no parser registered for {0}")]
    NoParser(String),
    #[error("no hole encoder registered for {0}")]
    NoHoleEncoder(String),
    #[error("placeholder for hole {index} does not parse: {source}")]
    EncoderImageUnparseable { index: usize, source: ParserError },
    #[error("holes {first} and {second} have identical placeholder images")]
    DuplicateHoleImage { first: usize, second: usize },
    #[error("{0}")]
    Parser(ParserError),
    #[error("hole {0} disappeared during parsing")]
    HoleNotFound(usize),
    #[error("hole {0} captured: its placeholder also occurs as ordinary content")]
    HoleCaptured(usize),
    #[error("sequence hole {0} is not a list element")]
    StarHoleNotInList(usize),
    #[error("holes are not allowed here")]
    HolesNotAllowed,
    #[error("lifted pattern is not well-typed: {0}")]
    IllTypedPattern(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hole {
    pub index: usize,
    pub name: String,
    /// The hole's type; for sequence holes, the element type.
    pub ty: String,
    pub star: bool,
}

impl Hole {
    fn to_pattern(&self) -> Pattern {
        let ty = ArgType::adt(self.ty.clone());
        match (self.star, self.name == ANONYMOUS) {
            (false, true) => Pattern::Wild(ty),
            (false, false) => Pattern::var(self.name.clone(), ty),
            (true, true) => Pattern::SeqWild(ty),
            (true, false) => Pattern::seq_var(self.name.clone(), ty),
        }
    }
}

impl fmt::Display for Hole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let star = if self.star { "*" } else { "" };
        write!(f, "<{}{star} {}>", self.ty, self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Part {
    Text(String),
    Hole(Hole),
}

/// A concrete fragment as alternating literal chunks and typed holes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcretePattern {
    pub nonterminal: String,
    pub parts: Vec<Part>,
}

impl ConcretePattern {
    pub fn holes(&self) -> impl Iterator<Item = &Hole> {
        self.parts.iter().filter_map(|p| match p {
            Part::Hole(h) => Some(h),
            Part::Text(_) => None,
        })
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_')
}

/// Splits `text` into literal chunks and holes. Holes are written
/// `<Type name>` or `<Type* name>`; `_` is the anonymous name and `\<`
/// stands for a literal `<`.
pub fn split_fragment(nonterminal: &str, text: &str) -> Result<ConcretePattern, ConcretelyError> {
    let chars: Vec<char> = text.chars().collect();
    let mut parts = Vec::new();
    let mut chunk = String::new();
    let mut types: BTreeMap<String, (String, bool)> = BTreeMap::new();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '\\' if chars.get(i + 1) == Some(&'<') => {
                chunk.push('<');
                i += 2;
            }
            '<' => {
                let offset = i;
                let Some(len) = chars[i + 1..].iter().position(|&c| c == '>') else {
                    return Err(ConcretelyError::UnterminatedHole { offset });
                };
                let inner: String = chars[i + 1..i + 1 + len].iter().collect();
                i += len + 2;
                let words: Vec<&str> = inner.split_whitespace().collect();
                let (ty, name) = match words.as_slice() {
                    [] => return Err(ConcretelyError::EmptyHoleType { offset }),
                    [ty, name] => (*ty, *name),
                    _ => return Err(ConcretelyError::MalformedHole { offset }),
                };
                let (ty, star) = match ty.strip_suffix('*') {
                    Some(t) => (t, true),
                    None => (ty, false),
                };
                if ty.is_empty() {
                    return Err(ConcretelyError::EmptyHoleType { offset });
                }
                if !is_ident(ty) || !is_ident(name) {
                    return Err(ConcretelyError::MalformedHole { offset });
                }
                if name != ANONYMOUS {
                    let prev = types
                        .entry(name.to_string())
                        .or_insert_with(|| (ty.to_string(), star));
                    if *prev != (ty.to_string(), star) {
                        return Err(ConcretelyError::ConflictingHoleTypes {
                            name: name.to_string(),
                        });
                    }
                }
                if !chunk.is_empty() {
                    parts.push(Part::Text(std::mem::take(&mut chunk)));
                }
                let index = parts.iter().filter(|p| matches!(p, Part::Hole(_))).count();
                parts.push(Part::Hole(Hole {
                    index,
                    name: name.to_string(),
                    ty: ty.to_string(),
                    star,
                }));
            }
            c => {
                chunk.push(c);
                i += 1;
            }
        }
    }
    if !chunk.is_empty() {
        parts.push(Part::Text(chunk));
    }
    Ok(ConcretePattern {
        nonterminal: nonterminal.to_string(),
        parts,
    })
}

/// A lowered hole: its placeholder text and the placeholder's parse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoleEntry {
    pub hole: Hole,
    pub encoded: String,
    pub image: Term,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HoleTable {
    entries: Vec<HoleEntry>,
}

impl HoleTable {
    pub fn entries(&self) -> &[HoleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn find(&self, t: &Term) -> Option<&HoleEntry> {
        self.entries.iter().find(|e| &e.image == t)
    }
}

/// Replaces every hole with its placeholder text and computes each
/// placeholder's image right away, so a broken encoder fails here rather
/// than during lifting.
pub fn lower(cp: &ConcretePattern, reg: &ParserRegistry) -> Result<(String, HoleTable), ConcretelyError> {
    let mut flat = String::new();
    let mut table = HoleTable::default();
    for part in &cp.parts {
        match part {
            Part::Text(s) => flat.push_str(s),
            Part::Hole(h) => {
                let encoded = reg
                    .hole(&h.ty, h.index)
                    .ok_or_else(|| ConcretelyError::NoHoleEncoder(h.ty.clone()))?;
                let image = match reg.parse(&h.ty, &encoded) {
                    Some(Ok(t)) => t,
                    Some(Err(source)) => {
                        return Err(ConcretelyError::EncoderImageUnparseable {
                            index: h.index,
                            source,
                        })
                    }
                    None => return Err(ConcretelyError::NoParser(h.ty.clone())),
                };
                if let Some(prev) = table.find(&image) {
                    return Err(ConcretelyError::DuplicateHoleImage {
                        first: prev.hole.index,
                        second: h.index,
                    });
                }
                flat.push_str(&encoded);
                table.entries.push(HoleEntry {
                    hole: h.clone(),
                    encoded,
                    image,
                });
            }
        }
    }
    Ok((flat, table))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CaptureMode {
    /// Every placeholder image must occur exactly once.
    #[default]
    Strict,
    /// Repeated images become repeated (non-linear) variables.
    Lenient,
}

/// Turns the parse of a lowered fragment back into a pattern: subtrees equal
/// to a hole's image become that hole's variable (sequence holes must be
/// list elements); hole-free subtrees become literals.
pub fn lift(t: &Term, table: &HoleTable, mode: CaptureMode) -> Result<Pattern, ConcretelyError> {
    if table.is_empty() {
        return Ok(Pattern::Lit(t.clone()));
    }
    let mut counts = vec![0usize; table.len()];
    let p = build(t, table, &mut counts, false)?;
    for (i, &n) in counts.iter().enumerate() {
        if n == 0 {
            return Err(ConcretelyError::HoleNotFound(table.entries[i].hole.index));
        }
        if n > 1 && mode == CaptureMode::Strict {
            return Err(ConcretelyError::HoleCaptured(table.entries[i].hole.index));
        }
    }
    Ok(p)
}

fn build(t: &Term, table: &HoleTable, counts: &mut [usize], list_elem: bool) -> Result<Pattern, ConcretelyError> {
    if let Some(pos) = table.entries.iter().position(|e| &e.image == t) {
        counts[pos] += 1;
        let hole = &table.entries[pos].hole;
        if hole.star && !list_elem {
            return Err(ConcretelyError::StarHoleNotInList(hole.index));
        }
        return Ok(hole.to_pattern());
    }
    match t {
        Term::Prim(_) => Ok(Pattern::Lit(t.clone())),
        Term::Con { name, ty, args } => {
            let ps = args
                .iter()
                .map(|a| build(a, table, counts, false))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(if ps.iter().all(|p| matches!(p, Pattern::Lit(_))) {
                Pattern::Lit(t.clone())
            } else {
                Pattern::con(name.clone(), ty.clone(), ps)
            })
        }
        Term::List { elems, elem } => {
            let ps = elems
                .iter()
                .map(|e| build(e, table, counts, true))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(if ps.iter().all(|p| matches!(p, Pattern::Lit(_))) {
                Pattern::Lit(t.clone())
            } else {
                Pattern::list(ps, elem.clone())
            })
        }
    }
}

/// The whole pipeline with strict capture checking.
pub fn to_pattern(nonterminal: &str, text: &str, reg: &ParserRegistry) -> Result<Pattern, ConcretelyError> {
    to_pattern_with(nonterminal, text, reg, CaptureMode::Strict)
}

pub fn to_pattern_with(
    nonterminal: &str,
    text: &str,
    reg: &ParserRegistry,
    mode: CaptureMode,
) -> Result<Pattern, ConcretelyError> {
    let sig = reg
        .signature(nonterminal)
        .ok_or_else(|| ConcretelyError::NoParser(nonterminal.to_string()))?
        .clone();
    let cp = split_fragment(nonterminal, text)?;
    let (flat, table) = lower(&cp, reg)?;
    let t = parse_checked(reg, nonterminal, &flat)?;
    let p = lift(&t, &table, mode)?;
    if let Some(e) = check_pattern(&sig, &p, &ArgType::adt(nonterminal)).first() {
        return Err(ConcretelyError::IllTypedPattern(e.to_string()));
    }
    Ok(p)
}

/// Parses hole-free concrete text into a well-typed term.
pub fn parse_term(nonterminal: &str, text: &str, reg: &ParserRegistry) -> Result<Term, ConcretelyError> {
    if !reg.has_parser(nonterminal) {
        return Err(ConcretelyError::NoParser(nonterminal.to_string()));
    }
    let cp = split_fragment(nonterminal, text)?;
    if cp.holes().next().is_some() {
        return Err(ConcretelyError::HolesNotAllowed);
    }
    let flat: String = cp
        .parts
        .iter()
        .map(|p| match p {
            Part::Text(s) => s.as_str(),
            Part::Hole(_) => unreachable!(),
        })
        .collect();
    parse_checked(reg, nonterminal, &flat)
}

fn parse_checked(reg: &ParserRegistry, nonterminal: &str, text: &str) -> Result<Term, ConcretelyError> {
    match reg.parse(nonterminal, text) {
        Some(r) => r.map_err(ConcretelyError::Parser),
        None => Err(ConcretelyError::NoParser(nonterminal.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bindings::json::parse_json;
    use crate::pattern::{match_all, Binding};

    fn hole(index: usize, name: &str, ty: &str, star: bool) -> Part {
        Part::Hole(Hole {
            index,
            name: name.into(),
            ty: ty.into(),
            star,
        })
    }

    fn text(s: &str) -> Part {
        Part::Text(s.into())
    }

    fn prop_t(k: &str, v: Term) -> Term {
        Term::con("prop", "Prop", vec![Term::con("id", "Id", vec![Term::str(k)]), v])
    }

    fn num(x: f64) -> Term {
        Term::con("number", "JSON", vec![Term::real(x)])
    }

    #[test]
    fn splits_holes_and_text() {
        let cp = split_fragment("JSON", "{<Prop p>}").unwrap();
        assert_eq!(cp.parts, vec![text("{"), hole(0, "p", "Prop", false), text("}")]);
        let cp = split_fragment("JSON", "29").unwrap();
        assert_eq!(cp.parts, vec![text("29")]);
        let cp = split_fragment("JSON", "\\<literal").unwrap();
        assert_eq!(cp.parts, vec![text("<literal")]);
        let cp = split_fragment("JSON", "{<Prop* _>, name: <JSON _>, <Prop* _>}").unwrap();
        assert_eq!(
            cp.parts,
            vec![
                text("{"),
                hole(0, "_", "Prop", true),
                text(", name: "),
                hole(1, "_", "JSON", false),
                text(", "),
                hole(2, "_", "Prop", true),
                text("}"),
            ]
        );
    }

    #[test]
    fn split_errors() {
        assert_eq!(
            split_fragment("JSON", "[<JSON x]"),
            Err(ConcretelyError::UnterminatedHole { offset: 1 })
        );
        assert_eq!(
            split_fragment("JSON", "[< >]"),
            Err(ConcretelyError::EmptyHoleType { offset: 1 })
        );
        assert_eq!(
            split_fragment("JSON", "[<* x>]"),
            Err(ConcretelyError::EmptyHoleType { offset: 1 })
        );
        assert_eq!(
            split_fragment("JSON", "[<JSON>]"),
            Err(ConcretelyError::MalformedHole { offset: 1 })
        );
        assert_eq!(
            split_fragment("JSON", "[<JSON x>, <Prop x>]"),
            Err(ConcretelyError::ConflictingHoleTypes { name: "x".into() })
        );
        assert!(split_fragment("JSON", "[<JSON _>, <Prop* _>]").is_ok());
    }

    #[test]
    fn lowers_prop_hole() {
        let reg = ParserRegistry::with_json();
        let cp = split_fragment("JSON", "{<Prop p>}").unwrap();
        let (flat, table) = lower(&cp, &reg).unwrap();
        assert_eq!(flat, "{_hole:0}");
        assert_eq!(table.len(), 1);
        assert_eq!(table.entries()[0].image, prop_t("_hole", num(0.0)));
        assert_eq!(table.entries()[0].hole.name, "p");
    }

    #[test]
    fn lowers_without_holes_and_with_json_holes() {
        let reg = ParserRegistry::with_json();
        let (flat, table) = lower(&split_fragment("JSON", "[1, 2]").unwrap(), &reg).unwrap();
        assert_eq!(flat, "[1, 2]");
        assert!(table.is_empty());
        let (flat, _) = lower(&split_fragment("JSON", "[<JSON x>]").unwrap(), &reg).unwrap();
        assert_eq!(flat, "[{_hole:0}]");
    }

    #[test]
    fn lower_reports_missing_or_broken_encoders() {
        let reg = ParserRegistry::with_json();
        assert_eq!(
            lower(&split_fragment("JSON", "[<Id i>]").unwrap(), &reg),
            Err(ConcretelyError::NoHoleEncoder("Id".into()))
        );
        let mut reg = ParserRegistry::with_json();
        reg.register_hole("JSON", hole_template("{_hole {id}}")).unwrap();
        assert!(matches!(
            lower(&split_fragment("JSON", "[<JSON x>]").unwrap(), &reg),
            Err(ConcretelyError::EncoderImageUnparseable { index: 0, .. })
        ));
        let mut reg = ParserRegistry::with_json();
        reg.register_hole("JSON", hole_template("null")).unwrap();
        assert_eq!(
            lower(&split_fragment("JSON", "[<JSON x>, <JSON y>]").unwrap(), &reg),
            Err(ConcretelyError::DuplicateHoleImage { first: 0, second: 1 })
        );
    }

    #[test]
    fn lifts_prop_hole() {
        let reg = ParserRegistry::with_json();
        let (flat, table) = lower(&split_fragment("JSON", "{<Prop p>}").unwrap(), &reg).unwrap();
        let t = parse_json(&flat).unwrap();
        let p = lift(&t, &table, CaptureMode::Strict).unwrap();
        assert_eq!(
            p,
            Pattern::con(
                "object",
                "JSON",
                vec![Pattern::list(
                    vec![Pattern::var("p", ArgType::adt("Prop"))],
                    ArgType::adt("Prop")
                )]
            )
        );
    }

    #[test]
    fn lift_without_holes_is_literal() {
        let t = num(3.0);
        assert_eq!(lift(&t, &HoleTable::default(), CaptureMode::Strict).unwrap(), Pattern::Lit(t));
    }

    #[test]
    fn capture_is_detected() {
        let reg = ParserRegistry::with_json();
        assert_eq!(
            to_pattern("JSON", "[<JSON x>, {_hole: 0}]", &reg),
            Err(ConcretelyError::HoleCaptured(0))
        );
        let p = to_pattern_with("JSON", "[<JSON x>, {_hole: 0}]", &reg, CaptureMode::Lenient).unwrap();
        let arr = |a, b| Term::con("array", "JSON", vec![Term::list(vec![a, b], ArgType::adt("JSON"))]);
        assert_eq!(match_all(&p, &arr(num(1.0), num(1.0))).unwrap().len(), 1);
        assert!(match_all(&p, &arr(num(1.0), num(2.0))).unwrap().is_empty());
        // Without holes the placeholder text is ordinary content.
        assert!(matches!(to_pattern("JSON", "{_hole: 0}", &reg), Ok(Pattern::Lit(_))));
    }

    #[test]
    fn swallowed_and_misplaced_holes() {
        // A parser that ignores its input swallows every placeholder.
        let mut reg = ParserRegistry::with_json();
        let sig = crate::bindings::json::json_signature().clone();
        let p: std::sync::Arc<dyn BlackBoxParser> = std::sync::Arc::new(|s: &str| {
            if s.contains("_hole") && s.starts_with('[') {
                Ok(Term::con("null", "JSON", vec![]))
            } else {
                parse_json(s).map_err(|e| ParserError::Protocol(e.to_string()))
            }
        });
        reg.register("JSON", sig, p).unwrap();
        reg.register_hole("JSON", std::sync::Arc::new(crate::bindings::json::json_hole)).unwrap();
        assert_eq!(to_pattern("JSON", "[<JSON x>]", &reg), Err(ConcretelyError::HoleNotFound(0)));

        let reg = ParserRegistry::with_json();
        assert_eq!(
            to_pattern("JSON", "<JSON* xs>", &reg),
            Err(ConcretelyError::StarHoleNotInList(0))
        );
    }

    #[test]
    fn prop_fragment_with_json_hole() {
        let reg = ParserRegistry::with_json();
        let p = to_pattern("Prop", "name: <JSON v>", &reg).unwrap();
        assert_eq!(
            p,
            Pattern::con(
                "prop",
                "Prop",
                vec![
                    Pattern::Lit(Term::con("id", "Id", vec![Term::str("name")])),
                    Pattern::var("v", ArgType::adt("JSON")),
                ]
            )
        );
    }

    #[test]
    fn ill_typed_hole_placement_is_rejected() {
        let reg = ParserRegistry::with_json();
        // A Prop hole where a JSON value is expected.
        assert!(matches!(
            to_pattern("JSON", "[<Prop p>]", &reg),
            Err(ConcretelyError::EncoderImageUnparseable { .. }) | Err(ConcretelyError::Parser(_)) | Err(ConcretelyError::IllTypedPattern(_))
        ));
    }

    #[test]
    fn parse_term_paths() {
        let reg = ParserRegistry::with_json();
        assert_eq!(parse_term("JSON", "29", &reg).unwrap(), num(29.0));
        assert_eq!(parse_term("JSON", "null", &reg).unwrap().to_string(), "null()");
        assert_eq!(parse_term("Prop", "age: 29", &reg).unwrap(), prop_t("age", num(29.0)));
        assert_eq!(parse_term("JSON", "[<JSON x>]", &reg), Err(ConcretelyError::HolesNotAllowed));
        assert!(matches!(parse_term("JSON", "[1,", &reg), Err(ConcretelyError::Parser(ParserError::Syntax { .. }))));
        assert_eq!(parse_term("Stm", "x", &reg), Err(ConcretelyError::NoParser("Stm".into())));
    }

    #[test]
    fn star_hole_binds_sequences() {
        let reg = ParserRegistry::with_json();
        let p = to_pattern("JSON", "{<Prop* before>, name: <JSON v>, <Prop* after>}", &reg).unwrap();
        let t = parse_json("{a: 1, name: 2, b: 3, c: 4}").unwrap();
        let envs = match_all(&p, &t).unwrap();
        assert_eq!(envs.len(), 1);
        let Some(Binding::Seq(after)) = envs[0].get("after") else { panic!() };
        assert_eq!(after.len(), 2);
        assert_eq!(envs[0].get("v"), Some(&Binding::One(num(2.0))));
    }
}
