//! A small positioned JSON reader shared by the wire decoder and the JSON
//! binding. Numbers are kept as their source lexeme so callers decide how to
//! interpret them; object members keep source order and duplicates.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn at(pos: Pos, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Number(String),
    Str(String),
    Array(Vec<Node>),
    Object(Vec<(String, Node)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub value: Value,
    pub pos: Pos,
}

/// Parses one JSON value spanning the whole input. With
/// `unquoted_keys`, object keys may also be bare identifiers
/// (`[A-Za-z_$][A-Za-z0-9_$]*`).
pub fn parse(text: &str, unquoted_keys: bool) -> Result<Node, SyntaxError> {
    let mut r = Reader {
        chars: text.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
        unquoted_keys,
    };
    r.ws();
    let v = r.value(0)?;
    r.ws();
    if r.i < r.chars.len() {
        return Err(SyntaxError::at(r.pos(), "trailing characters after value"));
    }
    Ok(v)
}

const MAX_DEPTH: usize = 512;

struct Reader {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
    unquoted_keys: bool,
}

impl Reader {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\n' | '\r')) {
            self.bump();
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::at(self.pos(), msg))
    }

    fn expect(&mut self, c: char) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(d) if d == c => {
                self.bump();
                Ok(())
            }
            Some(d) => self.err(format!("expected `{c}`, found `{d}`")),
            None => self.err(format!("expected `{c}`, found end of input")),
        }
    }

    fn value(&mut self, depth: usize) -> Result<Node, SyntaxError> {
        if depth > MAX_DEPTH {
            return self.err("nesting too deep");
        }
        let pos = self.pos();
        let value = match self.peek() {
            None => return self.err("unexpected end of input"),
            Some('{') => self.object(depth)?,
            Some('[') => self.array(depth)?,
            Some('"') => Value::Str(self.string()?),
            Some('-' | '0'..='9') => Value::Number(self.number()?),
            Some(c) if c.is_alphabetic() => {
                let word = self.word();
                match word.as_str() {
                    "null" => Value::Null,
                    "true" => Value::Bool(true),
                    "false" => Value::Bool(false),
                    _ => return Err(SyntaxError::at(pos, format!("unexpected word `{word}`"))),
                }
            }
            Some(c) => return self.err(format!("unexpected character `{c}`")),
        };
        Ok(Node { value, pos })
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '$' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn object(&mut self, depth: usize) -> Result<Value, SyntaxError> {
        self.expect('{')?;
        self.ws();
        let mut members = Vec::new();
        if self.peek() == Some('}') {
            self.bump();
            return Ok(Value::Object(members));
        }
        loop {
            self.ws();
            let key = match self.peek() {
                Some('"') => self.string()?,
                Some(c) if self.unquoted_keys && (c.is_ascii_alphabetic() || c == '_' || c == '$') => {
                    let mut s = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                            s.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    s
                }
                Some(c) => return self.err(format!("expected object key, found `{c}`")),
                None => return self.err("expected object key, found end of input"),
            };
            self.ws();
            self.expect(':')?;
            self.ws();
            let v = self.value(depth + 1)?;
            members.push((key, v));
            self.ws();
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some('}') => {
                    self.bump();
                    return Ok(Value::Object(members));
                }
                Some(c) => return self.err(format!("expected `,` or `}}`, found `{c}`")),
                None => return self.err("unterminated object"),
            }
        }
    }

    fn array(&mut self, depth: usize) -> Result<Value, SyntaxError> {
        self.expect('[')?;
        self.ws();
        let mut elems = Vec::new();
        if self.peek() == Some(']') {
            self.bump();
            return Ok(Value::Array(elems));
        }
        loop {
            self.ws();
            elems.push(self.value(depth + 1)?);
            self.ws();
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some(']') => {
                    self.bump();
                    return Ok(Value::Array(elems));
                }
                Some(c) => return self.err(format!("expected `,` or `]`, found `{c}`")),
                None => return self.err("unterminated array"),
            }
        }
    }

    fn digits(&mut self) -> usize {
        let mut n = 0;
        while matches!(self.peek(), Some('0'..='9')) {
            self.bump();
            n += 1;
        }
        n
    }

    fn number(&mut self) -> Result<String, SyntaxError> {
        let start = self.i;
        if self.peek() == Some('-') {
            self.bump();
        }
        match self.peek() {
            Some('0') => {
                self.bump();
            }
            Some('1'..='9') => {
                self.digits();
            }
            _ => return self.err("expected digit"),
        }
        if self.peek() == Some('.') {
            self.bump();
            if self.digits() == 0 {
                return self.err("expected digit after decimal point");
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            self.bump();
            if matches!(self.peek(), Some('+' | '-')) {
                self.bump();
            }
            if self.digits() == 0 {
                return self.err("expected exponent digits");
            }
        }
        Ok(self.chars[start..self.i].iter().collect())
    }

    fn hex4(&mut self) -> Result<u32, SyntaxError> {
        let mut v = 0;
        for _ in 0..4 {
            let Some(d) = self.peek().and_then(|c| c.to_digit(16)) else {
                return self.err("expected four hex digits");
            };
            self.bump();
            v = v * 16 + d;
        }
        Ok(v)
    }

    fn string(&mut self) -> Result<String, SyntaxError> {
        self.expect('"')?;
        let mut s = String::new();
        loop {
            let pos = self.pos();
            match self.bump() {
                None => return Err(SyntaxError::at(pos, "unterminated string")),
                Some('"') => return Ok(s),
                Some('\\') => {
                    let c = match self.bump() {
                        Some('"') => '"',
                        Some('\\') => '\\',
                        Some('/') => '/',
                        Some('b') => '\u{8}',
                        Some('f') => '\u{c}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('t') => '\t',
                        Some('u') => {
                            let hi = self.hex4()?;
                            let code = if (0xD800..0xDC00).contains(&hi) {
                                if self.bump() != Some('\\') || self.bump() != Some('u') {
                                    return Err(SyntaxError::at(pos, "unpaired surrogate escape"));
                                }
                                let lo = self.hex4()?;
                                if !(0xDC00..0xE000).contains(&lo) {
                                    return Err(SyntaxError::at(pos, "invalid low surrogate"));
                                }
                                0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00)
                            } else {
                                hi
                            };
                            match char::from_u32(code) {
                                Some(c) => c,
                                None => return Err(SyntaxError::at(pos, "invalid unicode escape")),
                            }
                        }
                        _ => return Err(SyntaxError::at(pos, "invalid escape sequence")),
                    };
                    s.push(c);
                }
                Some(c) if (c as u32) < 0x20 => {
                    return Err(SyntaxError::at(pos, "control character in string"))
                }
                Some(c) => s.push(c),
            }
        }
    }
}

/// Writes `s` as a JSON string literal, escaping only what JSON requires.
pub fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unquoted_keys_only_when_enabled() {
        assert!(parse("{a:1}", true).is_ok());
        let e = parse("{a:1}", false).unwrap_err();
        assert_eq!((e.line, e.col), (1, 2));
    }

    #[test]
    fn keeps_number_lexemes_and_order() {
        let n = parse("{\"b\": -1.5e3, a: 0}", true).unwrap();
        let Value::Object(m) = n.value else { panic!() };
        assert_eq!(m[0].0, "b");
        assert_eq!(m[0].1.value, Value::Number("-1.5e3".into()));
        assert_eq!(m[1].1.pos, Pos { line: 1, col: 18 });
    }

    #[test]
    fn string_escapes() {
        let n = parse(r#""a\"é😀\n""#, false).unwrap();
        assert_eq!(n.value, Value::Str("a\"é😀\n".into()));
        let mut out = String::new();
        write_string(&mut out, "a\"é😀\n\u{1}");
        assert_eq!(out, r#""a\"é😀\n\u0001""#);
    }

    #[test]
    fn error_positions() {
        let e = parse("[1,\n  2,]", false).unwrap_err();
        assert_eq!((e.line, e.col), (2, 5));
        assert!(parse("01", false).is_err());
        assert!(parse("1.", false).is_err());
        assert!(parse("\"abc", false).is_err());
        assert!(parse("[1] x", false).is_err());
    }
}
