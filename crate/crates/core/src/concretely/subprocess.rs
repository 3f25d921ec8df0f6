//! A black-box parser running as a child process.
//!
//! One request per line on the child's stdin:
//! `{"nonterminal":"Stm","text":"x;"}`. One response per line on its stdout:
//! `{"ok":true,"term":<wire term>}` or
//! `{"ok":false,"line":1,"col":3,"message":"..."}`.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use super::{BlackBoxParser, ParserError};
use crate::json_text::{self, Node, Value};
use crate::term::{check_term, term_from_node, ArgType, Signature, Term};

#[derive(Clone, Debug)]
pub struct SubprocessConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub signature: Arc<Signature>,
    /// Nonterminals the child serves; others are refused without a request.
    pub nonterminals: Vec<String>,
    pub cwd: Option<PathBuf>,
    pub timeout: Duration,
}

impl SubprocessConfig {
    pub fn new(command: Vec<String>, signature: Arc<Signature>, nonterminals: Vec<String>) -> SubprocessConfig {
        SubprocessConfig {
            command,
            signature,
            nonterminals,
            cwd: None,
            timeout: Duration::from_secs(30),
        }
    }
}

struct Channel {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

pub struct SubprocessParser {
    config: SubprocessConfig,
    channel: Mutex<Channel>,
}

impl std::fmt::Debug for SubprocessParser {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubprocessParser")
            .field("command", &self.config.command)
            .field("nonterminals", &self.config.nonterminals)
            .finish()
    }
}

impl SubprocessParser {
    pub fn spawn(config: SubprocessConfig) -> Result<SubprocessParser, ParserError> {
        let (program, args) = config
            .command
            .split_first()
            .ok_or_else(|| ParserError::ChildSpawn("empty command".into()))?;
        let mut cmd = Command::new(program);
        cmd.args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit());
        if let Some(dir) = &config.cwd {
            cmd.current_dir(dir);
        }
        let mut child = cmd
            .spawn()
            .map_err(|e| ParserError::ChildSpawn(format!("{program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(SubprocessParser {
            config,
            channel: Mutex::new(Channel {
                child,
                stdin,
                lines: rx,
            }),
        })
    }

    fn request(&self, nonterminal: &str, text: &str) -> Result<String, ParserError> {
        let mut req = String::from("{\"nonterminal\":");
        json_text::write_string(&mut req, nonterminal);
        req.push_str(",\"text\":");
        json_text::write_string(&mut req, text);
        req.push_str("}\n");

        let mut ch = self.channel.lock().unwrap_or_else(|e| e.into_inner());
        ch.stdin
            .write_all(req.as_bytes())
            .and_then(|_| ch.stdin.flush())
            .map_err(|e| ParserError::Protocol(format!("writing request: {e}")))?;
        match ch.lines.recv_timeout(self.config.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(ParserError::Protocol(format!("reading response: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                // A late answer would be read as the reply to the next
                // request, so the child is not reused.
                let _ = ch.child.kill();
                Err(ParserError::Protocol(format!(
                    "no response within {:?}",
                    self.config.timeout
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                Err(ParserError::Protocol("parser process closed its output".into()))
            }
        }
    }
}

fn field<'a>(fields: &'a [(String, Node)], key: &str) -> Option<&'a Node> {
    fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

fn usize_field(fields: &[(String, Node)], key: &str) -> Result<usize, ParserError> {
    match field(fields, key).map(|n| &n.value) {
        Some(Value::Number(s)) => s
            .parse()
            .map_err(|_| ParserError::Protocol(format!("`{key}` is not a position: {s}"))),
        _ => Err(ParserError::Protocol(format!("error response lacks `{key}`"))),
    }
}

/// Decodes one response line.
pub(crate) fn decode_response(line: &str) -> Result<Term, ParserError> {
    let node = json_text::parse(line, false)
        .map_err(|e| ParserError::Protocol(format!("malformed response: {e}")))?;
    let Value::Object(fields) = &node.value else {
        return Err(ParserError::Protocol("response is not an object".into()));
    };
    match field(fields, "ok").map(|n| &n.value) {
        Some(Value::Bool(true)) => {
            let term = field(fields, "term")
                .ok_or_else(|| ParserError::Protocol("success response lacks `term`".into()))?;
            term_from_node(term).map_err(|e| ParserError::Protocol(format!("bad term: {e}")))
        }
        Some(Value::Bool(false)) => {
            let message = match field(fields, "message").map(|n| &n.value) {
                Some(Value::Str(s)) => s.clone(),
                _ => return Err(ParserError::Protocol("error response lacks `message`".into())),
            };
            Err(ParserError::Syntax {
                line: usize_field(fields, "line")?,
                col: usize_field(fields, "col")?,
                message,
            })
        }
        _ => Err(ParserError::Protocol("response lacks a boolean `ok`".into())),
    }
}

impl BlackBoxParser for SubprocessParser {
    fn parse(&self, nonterminal: &str, text: &str) -> Result<Term, ParserError> {
        if !self.config.nonterminals.iter().any(|n| n == nonterminal) {
            return Err(ParserError::Unsupported(nonterminal.to_string()));
        }
        let t = decode_response(&self.request(nonterminal, text)?)?;
        match check_term(&self.config.signature, &t, &ArgType::adt(nonterminal)).first() {
            None => Ok(t),
            Some(e) => Err(ParserError::IllTypedOutput(e.to_string())),
        }
    }
}

impl Drop for SubprocessParser {
    fn drop(&mut self) {
        let ch = self.channel.get_mut().unwrap_or_else(|e| e.into_inner());
        let _ = ch.child.kill();
        let _ = ch.child.wait();
    }
}
