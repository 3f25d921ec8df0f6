use csbb_core::pattern::Pattern;
use csbb_core::term::{ArgType, Constructor, PrimType, Signature, Term, JUST, MAYBE_TYPE};
use rand::seq::SliceRandom;
use rand::Rng;

/// Exercises every argument kind: primitives, nested lists, Maybe, and
/// mutual recursion between two types.
pub const TREE_SIGNATURE: &str = "\
module demo::tree
data Tree
  = leaf(int v) | pair(Tree l, Tree r) | named(str n, list[Tree] kids)
  | tagged(Maybe[Tree] t, bool b) | measure(real x) | paint(Color c, Tree t)
  | grid(list[list[int]] cells);
data Color = red() | green() | mix(list[Color] parts);
";

pub fn tree_signature() -> Signature {
    Signature::parse(TREE_SIGNATURE).unwrap()
}

pub fn adt(name: &str) -> ArgType {
    ArgType::adt(name)
}

pub fn random_str(rng: &mut impl Rng) -> String {
    const POOL: &[&str] = &["", "a", "name", "x y", "\"q\"", "back\\slash", "tab\t", "nl\n", "é", "日本", "\u{1}"];
    let n = rng.gen_range(0..3);
    (0..n).map(|_| *POOL.choose(rng).unwrap()).collect()
}

pub fn random_real(rng: &mut impl Rng) -> f64 {
    match rng.gen_range(0..6) {
        0 => rng.gen_range(-100..100) as f64,
        1 => rng.gen_range(-1000..1000) as f64 / 8.0,
        2 => rng.gen::<f64>(),
        3 => rng.gen_range(-1e300..1e300),
        4 => *[0.0, -0.0, 0.1, 1e-7, 5e-324, f64::MAX, f64::MIN_POSITIVE].choose(rng).unwrap(),
        _ => f64::from_bits(rng.gen::<u64>() & !(0x7ff << 52) | (rng.gen_range(1..0x7fe_u64) << 52)),
    }
}

pub fn random_prim(rng: &mut impl Rng, k: PrimType) -> Term {
    match k {
        PrimType::Int => Term::int(if rng.gen_bool(0.8) { rng.gen_range(-5..5) } else { rng.gen() }),
        PrimType::Real => Term::real(random_real(rng)),
        PrimType::Bool => Term::bool(rng.gen()),
        PrimType::Str => Term::str(random_str(rng)),
    }
}

fn recursion_free(c: &Constructor) -> bool {
    c.args.iter().all(|a| !matches!(a.ty, ArgType::Adt(_)))
}

/// A random well-typed term of type `ty`. Below `depth` 0 only
/// constructors without direct ADT arguments are chosen, when the type has
/// any, and lists and Maybe values are empty.
pub fn random_term(sig: &Signature, ty: &ArgType, rng: &mut impl Rng, depth: i32) -> Term {
    match ty {
        ArgType::Prim(k) => random_prim(rng, *k),
        ArgType::List(e) => {
            let n = if depth <= 0 { 0 } else { rng.gen_range(0..4) };
            Term::list((0..n).map(|_| random_term(sig, e, rng, depth - 1)).collect(), (**e).clone())
        }
        ArgType::Maybe(e) => {
            if depth <= 0 || rng.gen_bool(0.4) {
                Term::nothing()
            } else {
                Term::just(random_term(sig, e, rng, depth - 1))
            }
        }
        ArgType::Adt(name) => {
            let all: Vec<&Constructor> = sig.constructors_of(name).collect();
            let leaves: Vec<&Constructor> = all.iter().copied().filter(|c| recursion_free(c)).collect();
            let pool = if depth <= 0 && !leaves.is_empty() { &leaves } else { &all };
            let c = pool.choose(rng).expect("type has constructors");
            let args = c.args.iter().map(|a| random_term(sig, &a.ty, rng, depth - 1)).collect();
            Term::con(c.name.clone(), name.clone(), args)
        }
    }
}

pub fn random_json(rng: &mut impl Rng, depth: i32) -> Term {
    let sig = csbb_core::bindings::json::json_signature();
    random_term(sig, &adt("JSON"), rng, depth)
}

/// A term that is frequently ill-typed: right-ish shapes with random
/// constructor names, owner types, arities and primitive kinds.
pub fn random_loose_term(sig: &Signature, rng: &mut impl Rng, depth: i32) -> Term {
    let kinds = [PrimType::Int, PrimType::Real, PrimType::Bool, PrimType::Str];
    let types: Vec<String> = sig.types().iter().cloned().chain(["Nope".to_string(), MAYBE_TYPE.to_string()]).collect();
    let mut names: Vec<String> = sig.constructors().iter().map(|c| c.name.clone()).collect();
    names.extend(["bogus".to_string(), "nothing".to_string(), JUST.to_string()]);
    let choice = if depth <= 0 { rng.gen_range(0..2) } else { rng.gen_range(0..5) };
    match choice {
        0 => {
            let k = *kinds.choose(rng).unwrap();
            random_prim(rng, k)
        }
        1 | 2 => {
            let arity = if depth <= 0 { 0 } else { rng.gen_range(0..3) };
            let args = (0..arity).map(|_| random_loose_term(sig, rng, depth - 1)).collect();
            Term::con(names.choose(rng).unwrap().clone(), types.choose(rng).unwrap().clone(), args)
        }
        _ => {
            let elem = match rng.gen_range(0..3) {
                0 => ArgType::Prim(*kinds.choose(rng).unwrap()),
                1 => ArgType::adt(types.choose(rng).unwrap().clone()),
                _ => ArgType::list(ArgType::Prim(PrimType::Int)),
            };
            let n = rng.gen_range(0..3);
            Term::list((0..n).map(|_| random_loose_term(sig, rng, depth - 1)).collect(), elem)
        }
    }
}

/// Abstracts `t` (of type `ty`) into a wildcard-free pattern: each
/// subterm is, at random, replaced by a fresh variable, kept as a literal,
/// or rebuilt structurally; runs of list elements may become fresh
/// sequence variables.
pub fn abstract_term(sig: &Signature, t: &Term, ty: &ArgType, rng: &mut impl Rng, fresh: &mut usize) -> Pattern {
    match rng.gen_range(0..10) {
        0..=2 => return Pattern::var(fresh_name(fresh), ty.clone()),
        3 => return Pattern::Lit(t.clone()),
        _ => {}
    }
    match (t, ty) {
        (Term::Prim(_), _) => Pattern::Lit(t.clone()),
        (Term::List { elems, elem }, _) => {
            let mut out = Vec::new();
            let mut i = 0;
            loop {
                if rng.gen_bool(0.25) {
                    // A fresh sequence variable absorbing the next 0..=2 elements.
                    let len = rng.gen_range(0..=(elems.len() - i).min(2));
                    out.push(Pattern::seq_var(fresh_name(fresh), elem.clone()));
                    i += len;
                }
                if i >= elems.len() {
                    break;
                }
                out.push(abstract_term(sig, &elems[i], elem, rng, fresh));
                i += 1;
            }
            Pattern::list(out, elem.clone())
        }
        (Term::Con { name: c, ty: owner, args }, _) => {
            let arg_types: Vec<ArgType> = match ty {
                ArgType::Maybe(e) => args.iter().map(|_| (**e).clone()).collect(),
                _ => sig
                    .constructor(owner, c, args.len())
                    .expect("well-typed input")
                    .args
                    .iter()
                    .map(|a| a.ty.clone())
                    .collect(),
            };
            let ps = args
                .iter()
                .zip(&arg_types)
                .map(|(a, at)| abstract_term(sig, a, at, rng, fresh))
                .collect();
            Pattern::con(c.clone(), owner.clone(), ps)
        }
    }
}

fn fresh_name(fresh: &mut usize) -> String {
    *fresh += 1;
    format!("v{fresh}")
}

pub fn number(x: f64) -> Term {
    Term::con("number", "JSON", vec![Term::real(x)])
}

pub fn string(s: &str) -> Term {
    Term::con("string", "JSON", vec![Term::str(s)])
}

pub fn prop(key: &str, v: Term) -> Term {
    Term::con("prop", "Prop", vec![Term::con("id", "Id", vec![Term::str(key)]), v])
}

pub fn object(props: Vec<Term>) -> Term {
    Term::con("object", "JSON", vec![Term::list(props, adt("Prop"))])
}

pub fn array(elts: Vec<Term>) -> Term {
    Term::con("array", "JSON", vec![Term::list(elts, adt("JSON"))])
}

/// A JSON object with at most `max_props` properties whose keys are drawn
/// from a small pool that includes `name`, so matches and misses both occur.
pub fn random_object(rng: &mut impl Rng, max_props: usize) -> Term {
    const KEYS: &[&str] = &["name", "age", "Name", "names", "_hole", "x"];
    let n = rng.gen_range(0..=max_props);
    let props = (0..n)
        .map(|_| prop(KEYS.choose(rng).unwrap(), random_json(rng, 2)))
        .collect();
    object(props)
}
