//! `csbb`: parse, match and construct with concrete syntax patterns, and
//! run TYMPANIC mappings.
//!
//! Exit codes are stable:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | `match` found no match |
//! | 2 | usage, syntax, parse, pattern or binding error |
//! | 3 | registry configuration error (including unstartable parsers) |
//! | 4 | a hole was captured by ordinary content |
//! | 5 | mapping diagnostics |
//! | 6 | no mapping rule applies to a foreign value |

pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use csbb_core::concretely::{parse_term, to_pattern_with, CaptureMode, ConcretelyError, ParserError, ParserRegistry};
use csbb_core::pattern::{instantiate, match_all, match_first, Binding, Env, Pattern};
use csbb_core::term::{decode_term, encode_term, read_pretty, ArgType, Term};
use csbb_core::tympanic::{
    check_spec, infer_signature, parse_tympanic, ForeignSchema, ForeignValue, MarshalError, Marshaller, TympanicSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_MATCH: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_CAPTURED: i32 = 4;
pub const EXIT_DIAGNOSTICS: i32 = 5;
pub const EXIT_NO_RULE: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "csbb", version, about = "Concrete syntax patterns over black-box parsers")]
pub struct Cli {
    /// Parser registry configuration; without one, the built-in JSON
    /// binding serves `JSON` and `Prop`.
    #[arg(long, global = true, env = "CSBB_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse hole-free text and print the term.
    Parse {
        #[arg(long)]
        lang: String,
        #[command(flatten)]
        source: TextSource,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        out: Format,
    },
    /// Match a concrete pattern against parsed input and print bindings.
    Match {
        #[arg(long)]
        lang: String,
        #[command(flatten)]
        pattern: PatternSource,
        #[command(flatten)]
        input: InputSource,
        /// Print every environment instead of the first.
        #[arg(long)]
        all: bool,
        /// Treat repeated hole placeholders as a non-linear pattern instead
        /// of reporting a capture.
        #[arg(long)]
        lenient: bool,
    },
    /// Instantiate a concrete pattern with bindings read from files.
    Construct {
        #[arg(long)]
        lang: String,
        #[command(flatten)]
        pattern: PatternSource,
        /// `name=file`; the file holds a term in constructor notation or
        /// wire form (a list for sequence holes).
        #[arg(long = "bind", value_name = "NAME=FILE")]
        binds: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        out: Format,
    },
    /// Check a mapping, generate its data types, or marshal a value.
    #[command(subcommand)]
    Tympanic(TympanicCommand),
}

#[derive(Debug, Subcommand)]
pub enum TympanicCommand {
    /// Print diagnostics; exit 5 when there are any.
    Check(SpecArgs),
    /// Print the inferred module.
    GenAdt {
        #[command(flatten)]
        spec: SpecArgs,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a foreign value file into a term.
    Marshal {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        value: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TextSource {
    #[arg(long)]
    text: Option<String>,
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct PatternSource {
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    pattern_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InputSource {
    /// File holding the input text.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    input_text: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Constructor-call notation, e.g. `number(29.0)`.
    Pretty,
    /// The JSON wire form.
    Term,
}

/// A failed command: exit code plus message for standard error.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

type Outcome = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_ERROR, format!("cannot read {}: {e}", path.display())))
}

fn text_of(inline: &Option<String>, file: &Option<PathBuf>) -> Result<String, Failure> {
    match (inline, file) {
        (Some(t), _) => Ok(t.clone()),
        (None, Some(p)) => read(p),
        (None, None) => Err(Failure::new(EXIT_ERROR, "no input given")),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::new(EXIT_ERROR, format!("cannot write output: {e}")))
}

fn concretely_failure(e: ConcretelyError) -> Failure {
    let code = match &e {
        ConcretelyError::HoleCaptured(_) => EXIT_CAPTURED,
        ConcretelyError::NoParser(_) | ConcretelyError::NoHoleEncoder(_) => EXIT_CONFIG,
        ConcretelyError::Parser(ParserError::ChildSpawn(_))
        | ConcretelyError::EncoderImageUnparseable {
            source: ParserError::ChildSpawn(_),
            ..
        } => EXIT_CONFIG,
        _ => EXIT_ERROR,
    };
    Failure::new(code, e.to_string())
}

fn format_term(t: &Term, format: Format) -> String {
    match format {
        Format::Pretty => format!("{t}\n"),
        Format::Term => format!("{}\n", encode_term(t)),
    }
}

/// `name = value` lines, one per bound variable.
pub fn format_env(env: &Env) -> String {
    env.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Runs the command line `args` (program name first), writing results to
/// `out` and messages to `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn registry(cli: &Cli) -> Result<ParserRegistry, Failure> {
    match &cli.config {
        None => Ok(config::default_registry()),
        Some(p) => config::load_registry(p).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string())),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Parse { lang, source, out: format } => {
            let reg = registry(cli)?;
            let text = text_of(&source.text, &source.file)?;
            let t = parse_term(lang, &text, &reg).map_err(concretely_failure)?;
            write_out(out, &format_term(&t, *format))?;
            Ok(EXIT_OK)
        }
        Command::Match { lang, pattern, input, all, lenient } => {
            let reg = registry(cli)?;
            let mode = if *lenient { CaptureMode::Lenient } else { CaptureMode::Strict };
            let ptext = text_of(&pattern.pattern, &pattern.pattern_file)?;
            let p = to_pattern_with(lang, &ptext, &reg, mode).map_err(concretely_failure)?;
            let itext = text_of(&input.input_text, &input.input)?;
            let t = parse_term(lang, &itext, &reg).map_err(concretely_failure)?;
            let envs = if *all {
                match_all(&p, &t)
            } else {
                match_first(&p, &t).map(|e| e.into_iter().collect())
            }
            .map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?;
            if envs.is_empty() {
                return Ok(EXIT_NO_MATCH);
            }
            let text = envs.iter().map(format_env).collect::<Vec<_>>().join("\n");
            write_out(out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Construct { lang, pattern, binds, out: format } => {
            let reg = registry(cli)?;
            let ptext = text_of(&pattern.pattern, &pattern.pattern_file)?;
            let p = to_pattern_with(lang, &ptext, &reg, CaptureMode::Strict).map_err(concretely_failure)?;
            let sig = reg.signature(lang).expect("pattern parsed, so the nonterminal is registered").clone();
            let env = read_bindings(&p, binds, |text, ty| read_term(&sig, text, ty))?;
            let t = instantiate(&p, &env).map_err(|e| Failure::new(EXIT_ERROR, e.to_string()))?;
            write_out(out, &format_term(&t, *format))?;
            Ok(EXIT_OK)
        }
        Command::Tympanic(cmd) => tympanic(cmd, out),
    }
}

/// Reads a term in wire form (a JSON object or array) or constructor
/// notation.
fn read_term(sig: &csbb_core::term::Signature, text: &str, ty: &ArgType) -> Result<Term, String> {
    let trimmed = text.trim();
    let t = if trimmed.starts_with('{') {
        decode_term(trimmed).map_err(|e| e.to_string())?
    } else {
        read_pretty(sig, trimmed, ty).map_err(|e| e.to_string())?
    };
    if !t.conforms(ty) {
        return Err(format!("expected a term of type {ty}"));
    }
    Ok(t)
}

fn read_bindings(
    p: &Pattern,
    binds: &[String],
    parse: impl Fn(&str, &ArgType) -> Result<Term, String>,
) -> Result<Env, Failure> {
    let vars = p.variables();
    let mut env = Env::new();
    for b in binds {
        let (name, file) = b
            .split_once('=')
            .ok_or_else(|| Failure::new(EXIT_ERROR, format!("--bind {b}: expected NAME=FILE")))?;
        let var = vars
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Failure::new(EXIT_ERROR, format!("--bind {name}: the pattern has no such hole")))?;
        let text = read(Path::new(file))?;
        let bad = |e: String| Failure::new(EXIT_ERROR, format!("--bind {name}: {file}: {e}"));
        let binding = if var.sequence {
            match parse(&text, &ArgType::list(var.ty.clone())).map_err(bad)? {
                Term::List { elems, .. } => Binding::Seq(elems),
                _ => unreachable!("conforms to a list type"),
            }
        } else {
            Binding::One(parse(&text, var.ty).map_err(bad)?)
        };
        env.bind(name, binding);
    }
    Ok(env)
}

fn load_spec(args: &SpecArgs) -> Result<(TympanicSpec, ForeignSchema), Failure> {
    let spec = parse_tympanic(&read(&args.spec)?)
        .map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", args.spec.display())))?;
    let schema = ForeignSchema::from_json(&read(&args.schema)?)
        .map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", args.schema.display())))?;
    Ok((spec, schema))
}

fn emit(out: &mut dyn Write, file: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match file {
        None => write_out(out, text),
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::new(EXIT_ERROR, format!("cannot write {}: {e}", p.display()))),
    }
}

fn diagnostics_failure(diags: &[csbb_core::tympanic::Diagnostic]) -> Failure {
    let text = diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n");
    Failure::new(EXIT_DIAGNOSTICS, text)
}

fn tympanic(cmd: &TympanicCommand, out: &mut dyn Write) -> Outcome {
    match cmd {
        TympanicCommand::Check(args) => {
            let (spec, schema) = load_spec(args)?;
            let diags = check_spec(&spec, &schema);
            let text: String = diags.iter().map(|d| format!("{d}\n")).collect();
            write_out(out, &text)?;
            Ok(if diags.is_empty() { EXIT_OK } else { EXIT_DIAGNOSTICS })
        }
        TympanicCommand::GenAdt { spec, out: file } => {
            let (spec, schema) = load_spec(spec)?;
            let inferred = infer_signature(&spec, &schema).map_err(|d| diagnostics_failure(&d))?;
            emit(out, file, &inferred.module_text)?;
            Ok(EXIT_OK)
        }
        TympanicCommand::Marshal { spec, value, out: file, format } => {
            let (spec, schema) = load_spec(spec)?;
            let v = ForeignValue::from_json(&read(value)?)
                .map_err(|e| Failure::new(EXIT_ERROR, format!("{}: {e}", value.display())))?;
            let m = Marshaller::new(&spec, &schema).map_err(|d| diagnostics_failure(&d))?;
            let t = m.marshal(&v).map_err(|e| {
                let code = match &e {
                    MarshalError::NoApplicableRule { .. } => EXIT_NO_RULE,
                    MarshalError::Invalid(_) => EXIT_DIAGNOSTICS,
                    _ => EXIT_ERROR,
                };
                Failure::new(code, e.to_string())
            })?;
            emit(out, file, &format_term(&t, *format))?;
            Ok(EXIT_OK)
        }
    }
}
