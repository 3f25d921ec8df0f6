//! Registry configuration: which parser serves each nonterminal.
//!
//! ```json
//! {"nonterminals": {
//!   "JSON": {"builtin": "json"},
//!   "Stm": {"command": ["./exprlang-parser"], "signature": "exprlang.sig",
//!           "hole": "_hole_{id};",
//!           "wrap": {"nonterminal": "Program",
//!                    "template": "void dummy() { {body} }",
//!                    "project": [0, 0, 1, 0]}}
//! }}
//! ```
//!
//! Relative signature paths, and relative commands containing a path
//! separator, are resolved against the configuration file's directory.
//! Nonterminals sharing a command and signature share one child process,
//! started on first use.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};
use std::time::Duration;

use csbb_core::bindings::json::{json_hole, json_signature, prop_hole, JsonParser};
use csbb_core::concretely::{
    hole_template, BlackBoxParser, ContextWrap, HoleEncoder, ParserError, ParserRegistry, SubprocessConfig,
    SubprocessParser,
};
use csbb_core::term::{Signature, Term};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    nonterminals: BTreeMap<String, Entry>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Builtin(BuiltinEntry),
    Command(CommandEntry),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuiltinEntry {
    builtin: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommandEntry {
    command: Vec<String>,
    signature: PathBuf,
    #[serde(default)]
    hole: Option<String>,
    #[serde(default)]
    wrap: Option<WrapEntry>,
    #[serde(default)]
    timeout_secs: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WrapEntry {
    nonterminal: String,
    template: String,
    project: Vec<usize>,
}

/// A child process that is started on its first request.
struct LazyChild {
    config: SubprocessConfig,
    child: OnceLock<Result<SubprocessParser, ParserError>>,
}

impl BlackBoxParser for LazyChild {
    fn parse(&self, nonterminal: &str, text: &str) -> Result<Term, ParserError> {
        match self.child.get_or_init(|| SubprocessParser::spawn(self.config.clone())) {
            Ok(p) => p.parse(nonterminal, text),
            Err(e) => Err(e.clone()),
        }
    }
}

/// The registry used when no configuration is given: the built-in JSON
/// binding for `JSON` and `Prop`.
pub fn default_registry() -> ParserRegistry {
    ParserRegistry::with_json()
}

pub fn load_registry(path: &Path) -> Result<ParserRegistry, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    registry_from_str(&text, base).map_err(|message| ConfigError::Invalid {
        path: path.to_path_buf(),
        message,
    })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Builds a registry from configuration text; relative paths are taken
/// relative to `base`.
pub fn registry_from_str(text: &str, base: &Path) -> Result<ParserRegistry, String> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| e.to_string())?;

    let mut signatures: BTreeMap<PathBuf, Arc<Signature>> = BTreeMap::new();
    let mut load_sig = |p: &Path| -> Result<Arc<Signature>, String> {
        let p = resolve(base, p);
        if let Some(s) = signatures.get(&p) {
            return Ok(s.clone());
        }
        let text = std::fs::read_to_string(&p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
        let sig = Arc::new(Signature::parse(&text).map_err(|e| format!("{}: {e}", p.display()))?);
        signatures.insert(p, sig.clone());
        Ok(sig)
    };

    // One child per (command, signature); collect what each must serve.
    type ChildKey = (Vec<String>, PathBuf);
    type Served = (Arc<Signature>, Vec<String>, Option<u64>);
    let mut served: BTreeMap<ChildKey, Served> = BTreeMap::new();
    for (nt, entry) in &file.nonterminals {
        if let Entry::Command(c) = entry {
            if c.command.is_empty() {
                return Err(format!("{nt}: empty command"));
            }
            let sig = load_sig(&c.signature)?;
            let key = (command_line(base, &c.command), resolve(base, &c.signature));
            let slot = served.entry(key).or_insert_with(|| (sig, Vec::new(), None));
            let asked = c.wrap.as_ref().map_or(nt, |w| &w.nonterminal);
            if !slot.1.contains(asked) {
                slot.1.push(asked.clone());
            }
            slot.2 = slot.2.max(c.timeout_secs);
        }
    }
    let children: BTreeMap<ChildKey, Arc<LazyChild>> = served
        .into_iter()
        .map(|(key, (sig, nts, timeout))| {
            let mut config = SubprocessConfig::new(key.0.clone(), sig, nts);
            if let Some(secs) = timeout {
                config.timeout = Duration::from_secs(secs);
            }
            (key, Arc::new(LazyChild { config, child: OnceLock::new() }))
        })
        .collect();

    let mut reg = ParserRegistry::new();
    for (nt, entry) in &file.nonterminals {
        match entry {
            Entry::Builtin(b) => {
                if b.builtin != "json" {
                    return Err(format!("{nt}: unknown builtin `{}`", b.builtin));
                }
                let hole: HoleEncoder = match nt.as_str() {
                    "JSON" => Arc::new(json_hole),
                    "Prop" => Arc::new(prop_hole),
                    _ => return Err(format!("{nt}: the json builtin serves only JSON and Prop")),
                };
                reg.register(nt.clone(), json_signature().clone(), Arc::new(JsonParser))
                    .map_err(|e| e.to_string())?;
                reg.register_hole(nt, hole).map_err(|e| e.to_string())?;
            }
            Entry::Command(c) => {
                let sig = load_sig(&c.signature)?;
                let child = children[&(command_line(base, &c.command), resolve(base, &c.signature))].clone();
                let parser: Arc<dyn BlackBoxParser> = match &c.wrap {
                    None => child,
                    Some(w) => {
                        if !w.template.contains("{body}") {
                            return Err(format!("{nt}: wrap template lacks {{body}}"));
                        }
                        if !sig.has_type(&w.nonterminal) {
                            return Err(format!("{nt}: wrap nonterminal {} is not in the signature", w.nonterminal));
                        }
                        Arc::new(ContextWrap::new(child, w.nonterminal.clone(), w.template.clone(), w.project.clone()))
                    }
                };
                reg.register(nt.clone(), sig, parser).map_err(|e| e.to_string())?;
                if let Some(h) = &c.hole {
                    reg.register_hole(nt, hole_template(h.clone())).map_err(|e| e.to_string())?;
                }
            }
        }
    }
    Ok(reg)
}

fn command_line(base: &Path, command: &[String]) -> Vec<String> {
    let mut out = command.to_vec();
    let program = Path::new(&command[0]);
    if program.is_relative() && program.components().count() > 1 {
        out[0] = base.join(program).to_string_lossy().into_owned();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_json() {
        let reg = registry_from_str(r#"{"nonterminals":{"JSON":{"builtin":"json"}}}"#, Path::new(".")).unwrap();
        assert!(reg.has_hole("JSON"));
        assert!(!reg.has_parser("Prop"));
    }

    #[test]
    fn rejects_bad_entries() {
        let bad = |text: &str| registry_from_str(text, Path::new(".")).unwrap_err();
        assert!(bad(r#"{"nonterminals":{"JSON":{"builtin":"yaml"}}}"#).contains("unknown builtin"));
        assert!(bad(r#"{"nonterminals":{"Stm":{"builtin":"json"}}}"#).contains("only JSON and Prop"));
        assert!(bad(r#"{"nonterminals":{"Stm":{"command":["x"],"signature":"/nonexistent.sig"}}}"#)
            .contains("cannot read"));
        assert!(!bad(r#"{"nonterminals":{"JSON":{"builtin":"json","extra":1}}}"#).is_empty());
        assert!(!bad("[]").is_empty());
    }

    #[test]
    fn relative_programs_resolve_against_the_config_directory() {
        let base = Path::new("/etc/csbb");
        assert_eq!(command_line(base, &["./p".into(), "-x".into()])[0], "/etc/csbb/./p");
        assert_eq!(command_line(base, &["p".into()])[0], "p");
        assert_eq!(command_line(base, &["/usr/bin/p".into()])[0], "/usr/bin/p");
    }
}
