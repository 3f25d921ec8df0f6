//! ExprLang: a tiny statement language served over the subprocess protocol.
//!
//! ```text
//! program := decl*
//! decl    := "void" ident "(" ")" "{" stm* "}"
//! stm     := "while" "(" expr ")" "{" stm* "}" | "{" stm* "}" | expr ";"
//! expr    := atom ("+" atom)*
//! atom    := int | ident | "(" expr ")"
//! ```
//!
//! The grammar only accepts whole programs. Statements and expressions are
//! parsed by embedding them in `void dummy() { ... }` and projecting the
//! single statement (or the expression of the single expression statement)
//! back out.

use std::io::{self, BufRead, Write};
use std::sync::{Arc, OnceLock};

use crate::json_text::{self, Value};
use crate::term::{encode_term, ArgType, Signature, Term};

pub const EXPRLANG_SIGNATURE: &str = "\
module exprlang
data Program = program(list[Decl] decls);
data Decl = func(str name, list[Stm] body);
data Stm = exprStm(Expr e) | whileStm(Expr cond, list[Stm] body) | block(list[Stm] stms);
data Expr = intLit(int v) | varRef(str name) | add(Expr lhs, Expr rhs);
";

pub fn exprlang_signature() -> &'static Arc<Signature> {
    static SIG: OnceLock<Arc<Signature>> = OnceLock::new();
    SIG.get_or_init(|| Arc::new(Signature::parse(EXPRLANG_SIGNATURE).expect("built-in ExprLang signature")))
}

/// Context used to parse statement and expression fragments.
pub const WRAP_PREFIX: &str = "void dummy() { ";
pub const WRAP_SUFFIX: &str = " }";

/// Placeholder templates for holes, `{id}` being the hole index.
pub const EXPR_HOLE: &str = "_hole_{id}";
pub const STM_HOLE: &str = "_hole_{id};";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    Punct(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("`{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let begin = i;
        if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[begin..i].iter().collect();
            let n = s.parse().map_err(|_| SyntaxError {
                line,
                col,
                message: format!("integer literal {s} is out of range"),
            })?;
            out.push((Tok::Int(n), start.0, start.1));
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[begin..i].iter().collect()), start.0, start.1));
        } else if "(){};+".contains(c) {
            i += 1;
            out.push((Tok::Punct(c), start.0, start.1));
        } else {
            return Err(SyntaxError {
                line,
                col,
                message: format!("unexpected character `{c}`"),
            });
        }
        col += i - begin;
    }
    out.push((Tok::Eof, line, col));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn stm_list(elems: Vec<Term>) -> Term {
    Term::list(elems, ArgType::adt("Stm"))
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn error(&self, expected: &str) -> SyntaxError {
        let (tok, line, col) = &self.toks[self.pos];
        SyntaxError {
            line: *line,
            col: *col,
            message: format!("expected {expected}, found {}", tok.describe()),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::Punct(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("`{c}`")))
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("an identifier")),
        }
    }

    fn program(&mut self) -> Result<Term, SyntaxError> {
        let mut decls = Vec::new();
        while *self.peek() != Tok::Eof {
            if !self.keyword("void") {
                return Err(self.error("`void`"));
            }
            let name = self.ident()?;
            self.punct('(')?;
            self.punct(')')?;
            let body = self.braced_stms()?;
            decls.push(Term::con("func", "Decl", vec![Term::str(name), body]));
        }
        Ok(Term::con("program", "Program", vec![Term::list(decls, ArgType::adt("Decl"))]))
    }

    fn braced_stms(&mut self) -> Result<Term, SyntaxError> {
        self.punct('{')?;
        let mut stms = Vec::new();
        while *self.peek() != Tok::Punct('}') {
            if *self.peek() == Tok::Eof {
                return Err(self.error("`}`"));
            }
            stms.push(self.stm()?);
        }
        self.pos += 1;
        Ok(stm_list(stms))
    }

    fn stm(&mut self) -> Result<Term, SyntaxError> {
        if self.keyword("while") {
            self.punct('(')?;
            let cond = self.expr()?;
            self.punct(')')?;
            let body = self.braced_stms()?;
            return Ok(Term::con("whileStm", "Stm", vec![cond, body]));
        }
        if *self.peek() == Tok::Punct('{') {
            let body = self.braced_stms()?;
            return Ok(Term::con("block", "Stm", vec![body]));
        }
        let e = self.expr()?;
        self.punct(';')?;
        Ok(Term::con("exprStm", "Stm", vec![e]))
    }

    fn expr(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.atom()?;
        while *self.peek() == Tok::Punct('+') {
            self.pos += 1;
            let rhs = self.atom()?;
            lhs = Term::con("add", "Expr", vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(Term::con("intLit", "Expr", vec![Term::int(n)]))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.pos += 1;
                Ok(Term::con("varRef", "Expr", vec![Term::str(s)]))
            }
            Tok::Punct('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.punct(')')?;
                Ok(e)
            }
            _ => Err(self.error("an expression")),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    s == "while" || s == "void"
}

pub fn parse_program(text: &str) -> Result<Term, SyntaxError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    p.program()
}

/// Moves an error position in the wrapped program back into the fragment,
/// clamping positions inside the wrapper to the fragment's bounds.
fn unwrap_error(e: SyntaxError, fragment: &str) -> SyntaxError {
    let prefix = WRAP_PREFIX.chars().count();
    let (line, col) = match e.line {
        1 => (1, e.col.saturating_sub(prefix).max(1)),
        l => (l, e.col),
    };
    let end_line = fragment.matches('\n').count() + 1;
    let end_col = fragment.rsplit('\n').next().unwrap_or("").chars().count() + 1;
    let (line, col) = if (line, col) > (end_line, end_col) {
        (end_line, end_col)
    } else {
        (line, col)
    };
    SyntaxError { line, col, message: e.message }
}

fn the_statement(program: Term, fragment: &str) -> Result<Term, SyntaxError> {
    let body = program.subterm(&[0, 0, 1]).cloned();
    match body {
        Some(Term::List { mut elems, .. }) if elems.len() == 1 => Ok(elems.remove(0)),
        Some(Term::List { elems, .. }) => {
            let end_line = fragment.matches('\n').count() + 1;
            let end_col = fragment.rsplit('\n').next().unwrap_or("").chars().count() + 1;
            Err(SyntaxError {
                line: if elems.is_empty() { end_line } else { 1 },
                col: if elems.is_empty() { end_col } else { 1 },
                message: format!("expected exactly one statement, found {}", elems.len()),
            })
        }
        _ => unreachable!("the wrapper always yields one declaration"),
    }
}

/// Parses one statement via the dummy-function context.
pub fn parse_stm(text: &str) -> Result<Term, SyntaxError> {
    let program = parse_program(&format!("{WRAP_PREFIX}{text}{WRAP_SUFFIX}"))
        .map_err(|e| unwrap_error(e, text))?;
    the_statement(program, text)
}

/// Parses one expression as the body of an expression statement.
pub fn parse_expr(text: &str) -> Result<Term, SyntaxError> {
    let program = parse_program(&format!("{WRAP_PREFIX}{text};{WRAP_SUFFIX}"))
        .map_err(|e| unwrap_error(e, text))?;
    match the_statement(program, text)? {
        Term::Con { name, mut args, .. } if name == "exprStm" => Ok(args.remove(0)),
        _ => Err(SyntaxError {
            line: 1,
            col: 1,
            message: "expected an expression".into(),
        }),
    }
}

pub fn parse_nonterminal(nonterminal: &str, text: &str) -> Result<Term, SyntaxError> {
    match nonterminal {
        "Program" => parse_program(text),
        "Stm" => parse_stm(text),
        "Expr" => parse_expr(text),
        other => Err(SyntaxError {
            line: 1,
            col: 1,
            message: format!("unsupported nonterminal {other}"),
        }),
    }
}

/// Answers one request line with one response line (without newline).
pub fn respond(request: &str) -> String {
    let result = decode_request(request).and_then(|(nt, text)| parse_nonterminal(&nt, &text));
    match result {
        Ok(t) => format!("{{\"ok\":true,\"term\":{}}}", encode_term(&t)),
        Err(e) => {
            let mut out = format!("{{\"ok\":false,\"line\":{},\"col\":{},\"message\":", e.line, e.col);
            json_text::write_string(&mut out, &e.message);
            out.push('}');
            out
        }
    }
}

fn decode_request(line: &str) -> Result<(String, String), SyntaxError> {
    let bad = |message: String| SyntaxError { line: 1, col: 1, message };
    let node = json_text::parse(line, false).map_err(|e| bad(format!("malformed request: {}", e.message)))?;
    let Value::Object(fields) = node.value else {
        return Err(bad("request is not an object".into()));
    };
    let get = |key: &str| {
        fields.iter().find(|(k, _)| k == key).and_then(|(_, v)| match &v.value {
            Value::Str(s) => Some(s.clone()),
            _ => None,
        })
    };
    match (get("nonterminal"), get("text")) {
        (Some(nt), Some(text)) => Ok((nt, text)),
        _ => Err(bad("request needs string fields `nonterminal` and `text`".into())),
    }
}

/// Serves requests until end of input.
pub fn serve(input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(output, "{}", respond(&line))?;
        output.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{check_term, decode_term};

    #[test]
    fn expressions() {
        assert_eq!(parse_expr("1+2").unwrap().to_string(), "add(intLit(1), intLit(2))");
        assert_eq!(
            parse_expr("a + (b + 3)").unwrap().to_string(),
            r#"add(varRef("a"), add(varRef("b"), intLit(3)))"#
        );
        assert_eq!(
            parse_expr("1+2+3").unwrap().to_string(),
            "add(add(intLit(1), intLit(2)), intLit(3))"
        );
    }

    #[test]
    fn statements() {
        assert_eq!(parse_stm("while (x) { }").unwrap().to_string(), r#"whileStm(varRef("x"), [])"#);
        assert_eq!(
            parse_stm("{ x; { } }").unwrap().to_string(),
            r#"block([exprStm(varRef("x")), block([])])"#
        );
        assert_eq!(
            parse_stm("while (x) { _hole_0; }").unwrap().to_string(),
            r#"whileStm(varRef("x"), [exprStm(varRef("_hole_0"))])"#
        );
    }

    #[test]
    fn outputs_are_well_typed() {
        let sig = exprlang_signature();
        for (nt, text) in [("Expr", "1+x"), ("Stm", "while (1) { y; }"), ("Program", "void f() { } void g() { 1; }")] {
            let t = parse_nonterminal(nt, text).unwrap();
            assert!(check_term(sig, &t, &ArgType::adt(nt)).is_empty(), "{nt} {text}");
        }
    }

    #[test]
    fn errors_point_into_the_fragment() {
        let e = parse_expr("1+").unwrap_err();
        assert_eq!((e.line, e.col), (1, 3));
        let e = parse_stm("while x").unwrap_err();
        assert_eq!((e.line, e.col), (1, 7));
        let e = parse_stm("x; y;").unwrap_err();
        assert!(e.message.contains("exactly one"));
        let e = parse_stm("").unwrap_err();
        assert_eq!((e.line, e.col), (1, 1));
        let e = parse_stm("x;\n  $").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        assert!(parse_stm("x; }").is_err());
        assert!(parse_expr("while").is_err());
    }

    #[test]
    fn protocol() {
        let ok = respond(r#"{"nonterminal":"Stm","text":"while (x) { }"}"#);
        let node = json_text::parse(&ok, false).unwrap();
        let Value::Object(fields) = node.value else { panic!() };
        assert_eq!(fields[0].0, "ok");
        let term_text = &ok[ok.find("\"term\":").unwrap() + 7..ok.len() - 1];
        assert_eq!(decode_term(term_text).unwrap().to_string(), r#"whileStm(varRef("x"), [])"#);

        assert_eq!(
            respond(r#"{"nonterminal":"Expr","text":"1+"}"#),
            r#"{"ok":false,"line":1,"col":3,"message":"expected an expression, found `;`"}"#
        );
        assert!(respond("not json").starts_with(r#"{"ok":false"#));
        assert!(respond(r#"{"nonterminal":"JSON","text":"1"}"#).contains("unsupported"));
    }

    #[test]
    fn serve_loop() {
        let input = b"{\"nonterminal\":\"Expr\",\"text\":\"1\"}\n\n{\"nonterminal\":\"Expr\",\"text\":\"x\"}\n";
        let mut out = Vec::new();
        serve(&input[..], &mut out).unwrap();
        let out = String::from_utf8(out).unwrap();
        assert_eq!(out.lines().count(), 2);
        assert!(out.lines().all(|l| l.starts_with(r#"{"ok":true"#)));
    }
}
