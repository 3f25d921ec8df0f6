use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{check_term, ArgType, Path, Signature, Term};

/// Failure reported by a black-box parser or its adapter.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParserError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("could not start parser process: {0}")]
    ChildSpawn(String),
    #[error("parser protocol error: {0}")]
    Protocol(String),
    #[error("parser output is not well-typed: {0}")]
    IllTypedOutput(String),
    #[error("context projection failed: {0}")]
    Projection(String),
    #[error("parser does not serve nonterminal {0}")]
    Unsupported(String),
}

/// An external parser, used unmodified: text in, term out.
pub trait BlackBoxParser: Send + Sync {
    fn parse(&self, nonterminal: &str, text: &str) -> Result<Term, ParserError>;
}

impl<F> BlackBoxParser for F
where
    F: Fn(&str) -> Result<Term, ParserError> + Send + Sync,
{
    fn parse(&self, _nonterminal: &str, text: &str) -> Result<Term, ParserError> {
        self(text)
    }
}

/// Produces the object-language placeholder text for hole number `i`.
pub type HoleEncoder = Arc<dyn Fn(usize) -> String + Send + Sync>;

/// A hole encoder from a template where `{id}` stands for the hole index,
/// e.g. `"_hole_{id};"`.
pub fn hole_template(template: impl Into<String>) -> HoleEncoder {
    let template = template.into();
    Arc::new(move |i| template.replace("{id}", &i.to_string()))
}

/// Parses a fragment by embedding it in a larger context (where the
/// fragment replaces `{body}`), parsing that with the inner parser, and
/// projecting the fragment's image back out along a child-index path.
pub struct ContextWrap {
    inner: Arc<dyn BlackBoxParser>,
    inner_nonterminal: String,
    template: String,
    projection: Path,
}

impl ContextWrap {
    pub fn new(
        inner: Arc<dyn BlackBoxParser>,
        inner_nonterminal: impl Into<String>,
        template: impl Into<String>,
        projection: Path,
    ) -> ContextWrap {
        ContextWrap {
            inner,
            inner_nonterminal: inner_nonterminal.into(),
            template: template.into(),
            projection,
        }
    }

    /// Maps a position in the wrapped text back into the fragment.
    fn unwrap_position(&self, line: usize, col: usize, body: &str) -> (usize, usize) {
        let prefix = self.template.split("{body}").next().unwrap_or("");
        let prefix_lines = prefix.matches('\n').count();
        let prefix_cols = prefix.rsplit('\n').next().unwrap_or("").chars().count();
        let (l, c) = if line <= prefix_lines {
            (1, 1)
        } else if line == prefix_lines + 1 {
            (1, col.saturating_sub(prefix_cols).max(1))
        } else {
            (line - prefix_lines, col)
        };
        let end_line = body.matches('\n').count() + 1;
        let end_col = body.rsplit('\n').next().unwrap_or("").chars().count() + 1;
        if (l, c) > (end_line, end_col) {
            (end_line, end_col)
        } else {
            (l, c)
        }
    }
}

impl fmt::Debug for ContextWrap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContextWrap")
            .field("inner_nonterminal", &self.inner_nonterminal)
            .field("template", &self.template)
            .field("projection", &self.projection)
            .finish()
    }
}

impl BlackBoxParser for ContextWrap {
    fn parse(&self, _nonterminal: &str, text: &str) -> Result<Term, ParserError> {
        let program = self.template.replace("{body}", text);
        let whole = self
            .inner
            .parse(&self.inner_nonterminal, &program)
            .map_err(|e| match e {
                ParserError::Syntax { line, col, message } => {
                    let (line, col) = self.unwrap_position(line, col, text);
                    ParserError::Syntax { line, col, message }
                }
                e => e,
            })?;
        whole
            .subterm(&self.projection)
            .cloned()
            .ok_or_else(|| {
                ParserError::Projection(format!(
                    "path {:?} does not exist in the parsed context",
                    self.projection
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("nonterminal {0} is not a type of the supplied signature")]
    NotInSignature(String),
    #[error("hole encoder for {0} registered without a parser for {0}")]
    HoleWithoutParser(String),
}

#[derive(Clone)]
struct Entry {
    parser: Arc<dyn BlackBoxParser>,
    hole: Option<HoleEncoder>,
    signature: Arc<Signature>,
}

/// Parse functions and hole encoders per nonterminal. A hole encoder can
/// only be registered for a nonterminal that already has a parser, since
/// hole images are computed by parsing the encoder's output.
#[derive(Clone, Default)]
pub struct ParserRegistry {
    entries: BTreeMap<String, Entry>,
}

impl fmt::Debug for ParserRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(
                self.entries
                    .iter()
                    .map(|(k, e)| (k, if e.hole.is_some() { "parser+hole" } else { "parser" })),
            )
            .finish()
    }
}

impl ParserRegistry {
    pub fn new() -> ParserRegistry {
        ParserRegistry::default()
    }

    /// A registry serving the built-in JSON binding (`JSON`, `Prop`).
    pub fn with_json() -> ParserRegistry {
        let mut reg = ParserRegistry::new();
        crate::bindings::json::register_json(&mut reg).expect("built-in JSON binding");
        reg
    }

    pub fn register(
        &mut self,
        nonterminal: impl Into<String>,
        signature: Arc<Signature>,
        parser: Arc<dyn BlackBoxParser>,
    ) -> Result<(), RegistryError> {
        let nonterminal = nonterminal.into();
        if !signature.has_type(&nonterminal) {
            return Err(RegistryError::NotInSignature(nonterminal));
        }
        let hole = self.entries.get(&nonterminal).and_then(|e| e.hole.clone());
        self.entries.insert(
            nonterminal,
            Entry {
                parser,
                hole,
                signature,
            },
        );
        Ok(())
    }

    pub fn register_hole(&mut self, nonterminal: &str, encoder: HoleEncoder) -> Result<(), RegistryError> {
        match self.entries.get_mut(nonterminal) {
            Some(e) => {
                e.hole = Some(encoder);
                Ok(())
            }
            None => Err(RegistryError::HoleWithoutParser(nonterminal.to_string())),
        }
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn has_parser(&self, nonterminal: &str) -> bool {
        self.entries.contains_key(nonterminal)
    }

    pub fn has_hole(&self, nonterminal: &str) -> bool {
        self.entries.get(nonterminal).is_some_and(|e| e.hole.is_some())
    }

    pub fn signature(&self, nonterminal: &str) -> Option<&Arc<Signature>> {
        self.entries.get(nonterminal).map(|e| &e.signature)
    }

    pub fn hole(&self, nonterminal: &str, index: usize) -> Option<String> {
        self.entries
            .get(nonterminal)
            .and_then(|e| e.hole.as_ref())
            .map(|h| h(index))
    }

    /// Runs the parser for `nonterminal` and checks that its output is a
    /// well-typed term of that nonterminal's type. `Ok(None)` when no parser
    /// is registered.
    pub fn parse(&self, nonterminal: &str, text: &str) -> Option<Result<Term, ParserError>> {
        let e = self.entries.get(nonterminal)?;
        Some(e.parser.parse(nonterminal, text).and_then(|t| {
            match check_term(&e.signature, &t, &ArgType::adt(nonterminal)).first() {
                None => Ok(t),
                Some(err) => Err(ParserError::IllTypedOutput(err.to_string())),
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bindings::json::{json_signature, parse_json};

    #[test]
    fn hole_requires_parser() {
        let mut reg = ParserRegistry::new();
        assert_eq!(
            reg.register_hole("JSON", hole_template("{id}")),
            Err(RegistryError::HoleWithoutParser("JSON".into()))
        );
        let p: Arc<dyn BlackBoxParser> = Arc::new(|s: &str| {
            parse_json(s).map_err(|e| ParserError::Protocol(e.to_string()))
        });
        assert!(reg.register("Nope", json_signature().clone(), p.clone()).is_err());
        reg.register("JSON", json_signature().clone(), p).unwrap();
        reg.register_hole("JSON", hole_template("{_hole:{id}}")).unwrap();
        assert_eq!(reg.hole("JSON", 3).as_deref(), Some("{_hole:3}"));
    }

    #[test]
    fn registry_rejects_ill_typed_output() {
        let mut reg = ParserRegistry::new();
        let p: Arc<dyn BlackBoxParser> = Arc::new(|_: &str| Ok(Term::int(3)));
        reg.register("JSON", json_signature().clone(), p).unwrap();
        assert!(matches!(
            reg.parse("JSON", "x"),
            Some(Err(ParserError::IllTypedOutput(_)))
        ));
        assert!(reg.parse("Prop", "x").is_none());
    }

    #[test]
    fn context_wrap_projects_value() {
        // {dummy: <json>} and take props[0].val
        let inner: Arc<dyn BlackBoxParser> = Arc::new(crate::bindings::json::JsonParser);
        let wrap = ContextWrap::new(inner, "JSON", "{dummy: {body}}", vec![0, 0, 1]);
        assert_eq!(wrap.parse("JSON", "[1]").unwrap().to_string(), "array([number(1.0)])");
        let ParserError::Syntax { line, col, .. } = wrap.parse("JSON", "[1,]").unwrap_err() else {
            panic!()
        };
        assert_eq!((line, col), (1, 4));
        let ParserError::Syntax { line, col, .. } = wrap.parse("JSON", "[").unwrap_err() else {
            panic!()
        };
        assert_eq!((line, col), (1, 2));
        let bad = ContextWrap::new(
            Arc::new(crate::bindings::json::JsonParser),
            "JSON",
            "{body}",
            vec![5],
        );
        assert!(matches!(bad.parse("JSON", "1"), Err(ParserError::Projection(_))));
    }
}
