//! Backtracking matcher.
//!
//! Results are produced in a fixed order: left to right through the
//! pattern, and each unbound sequence variable tries its shortest binding
//! first, growing by one element on backtrack. A variable that occurs more
//! than once must bind structurally equal values at every occurrence.

use std::ops::ControlFlow;

use super::{Binding, Env, MatchError, Pattern};
use crate::term::Term;

type Cont<'k> = &'k mut dyn FnMut(&mut Env) -> ControlFlow<()>;

/// Calls `f` with every environment under which `p` matches `t`, in match
/// order, until `f` breaks.
pub fn for_each_match(
    p: &Pattern,
    t: &Term,
    mut f: impl FnMut(&Env) -> ControlFlow<()>,
) -> Result<(), MatchError> {
    p.validate()?;
    if !p.accepts_type_of(t) {
        return Err(MatchError::TypeMismatch {
            expected: p
                .root_type()
                .map_or_else(|| p.to_string(), |ty| ty.to_string()),
        });
    }
    let mut env = Env::new();
    let _ = pmatch(p, t, &mut env, &mut |env| f(env));
    Ok(())
}

/// Every environment under which `p` matches `t`, in match order.
pub fn match_all(p: &Pattern, t: &Term) -> Result<Vec<Env>, MatchError> {
    let mut out = Vec::new();
    for_each_match(p, t, |env| {
        out.push(env.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// The first environment [`match_all`] would produce.
pub fn match_first(p: &Pattern, t: &Term) -> Result<Option<Env>, MatchError> {
    let mut out = None;
    for_each_match(p, t, |env| {
        out = Some(env.clone());
        ControlFlow::Break(())
    })?;
    Ok(out)
}

fn pmatch(p: &Pattern, t: &Term, env: &mut Env, k: Cont<'_>) -> ControlFlow<()> {
    match p {
        Pattern::Lit(l) => {
            if l == t {
                return k(env);
            }
        }
        Pattern::Wild(ty) => {
            if t.conforms(ty) {
                return k(env);
            }
        }
        Pattern::Var { name, ty } => {
            if !t.conforms(ty) {
                return ControlFlow::Continue(());
            }
            match env.get(name) {
                Some(Binding::One(b)) => {
                    if b == t {
                        return k(env);
                    }
                }
                Some(Binding::Seq(_)) => {}
                None => {
                    env.bind(name.clone(), Binding::One(t.clone()));
                    let r = k(env);
                    env.unbind(name);
                    return r;
                }
            }
        }
        Pattern::Con { name, ty, args } => {
            if let Term::Con {
                name: tn,
                ty: tt,
                args: ta,
            } = t
            {
                if tn == name && tt == ty && ta.len() == args.len() {
                    return match_args(args, ta, env, k);
                }
            }
        }
        Pattern::List { elems, elem } => {
            if let Term::List {
                elems: te,
                elem: tel,
            } = t
            {
                if tel == elem {
                    return match_list(elems, te, env, k);
                }
            }
        }
        // Rejected by `validate` outside lists.
        Pattern::SeqVar { .. } | Pattern::SeqWild(_) => {}
    }
    ControlFlow::Continue(())
}

fn match_args(ps: &[Pattern], ts: &[Term], env: &mut Env, k: Cont<'_>) -> ControlFlow<()> {
    match ps.split_first() {
        None => k(env),
        Some((p, rest)) => pmatch(p, &ts[0], env, &mut |env| match_args(rest, &ts[1..], env, &mut *k)),
    }
}

/// Number of list elements the remaining patterns need at minimum.
fn min_len(ps: &[Pattern]) -> usize {
    ps.iter()
        .filter(|p| !matches!(p, Pattern::SeqVar { .. } | Pattern::SeqWild(_)))
        .count()
}

fn match_list(ps: &[Pattern], ts: &[Term], env: &mut Env, k: Cont<'_>) -> ControlFlow<()> {
    let Some((p, rest)) = ps.split_first() else {
        return if ts.is_empty() {
            k(env)
        } else {
            ControlFlow::Continue(())
        };
    };
    let Some(max) = ts.len().checked_sub(min_len(rest)) else {
        return ControlFlow::Continue(());
    };
    match p {
        Pattern::SeqWild(elem) => {
            for n in 0..=max {
                if n > 0 && !ts[n - 1].conforms(elem) {
                    break;
                }
                match_list(rest, &ts[n..], env, k)?;
            }
            ControlFlow::Continue(())
        }
        Pattern::SeqVar { name, elem } => match env.get(name) {
            Some(Binding::Seq(bound)) => {
                if ts.starts_with(bound) {
                    let n = bound.len();
                    match_list(rest, &ts[n..], env, k)
                } else {
                    ControlFlow::Continue(())
                }
            }
            Some(Binding::One(_)) => ControlFlow::Continue(()),
            None => {
                for n in 0..=max {
                    if n > 0 && !ts[n - 1].conforms(elem) {
                        break;
                    }
                    env.bind(name.clone(), Binding::Seq(ts[..n].to_vec()));
                    let r = match_list(rest, &ts[n..], env, k);
                    env.unbind(name);
                    r?;
                }
                ControlFlow::Continue(())
            }
        },
        p => {
            if ts.is_empty() {
                return ControlFlow::Continue(());
            }
            pmatch(p, &ts[0], env, &mut |env| match_list(rest, &ts[1..], env, &mut *k))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::ArgType;

    fn json() -> ArgType {
        ArgType::adt("JSON")
    }

    fn num(x: f64) -> Term {
        Term::con("number", "JSON", vec![Term::real(x)])
    }

    fn array(xs: Vec<Term>) -> Term {
        Term::con("array", "JSON", vec![Term::list(xs, json())])
    }

    fn parray(ps: Vec<Pattern>) -> Pattern {
        Pattern::con("array", "JSON", vec![Pattern::list(ps, json())])
    }

    fn seq(ts: &[Term]) -> Binding {
        Binding::Seq(ts.to_vec())
    }

    #[test]
    fn variable_matches_anything_of_its_type() {
        let envs = match_all(&Pattern::var("x", json()), &num(29.0)).unwrap();
        assert_eq!(envs.len(), 1);
        assert_eq!(envs[0].get("x"), Some(&Binding::One(num(29.0))));
    }

    #[test]
    fn two_sequence_variables_split_in_order() {
        // Expected splits enumerated by hand: |a| = 0, 1, 2.
        let (e1, e2) = (num(1.0), num(2.0));
        let p = Pattern::list(
            vec![Pattern::seq_var("a", json()), Pattern::seq_var("b", json())],
            json(),
        );
        let t = Term::list(vec![e1.clone(), e2.clone()], json());
        let envs = match_all(&p, &t).unwrap();
        let splits: Vec<(Binding, Binding)> = envs
            .iter()
            .map(|e| (e.get("a").unwrap().clone(), e.get("b").unwrap().clone()))
            .collect();
        assert_eq!(
            splits,
            vec![
                (seq(&[]), seq(&[e1.clone(), e2.clone()])),
                (seq(std::slice::from_ref(&e1)), seq(std::slice::from_ref(&e2))),
                (seq(&[e1, e2]), seq(&[])),
            ]
        );
    }

    #[test]
    fn non_linear_variables() {
        let p = parray(vec![Pattern::var("x", json()), Pattern::var("x", json())]);
        assert_eq!(match_all(&p, &array(vec![num(1.0), num(1.0)])).unwrap().len(), 1);
        assert!(match_all(&p, &array(vec![num(1.0), num(2.0)])).unwrap().is_empty());
    }

    #[test]
    fn non_linear_sequence_variables() {
        let p = Pattern::list(
            vec![Pattern::seq_var("xs", json()), Pattern::seq_var("xs", json())],
            json(),
        );
        let t = |xs: Vec<Term>| Term::list(xs, json());
        assert_eq!(match_all(&p, &t(vec![num(1.0), num(2.0), num(1.0), num(2.0)])).unwrap().len(), 1);
        assert_eq!(match_all(&p, &t(vec![])).unwrap().len(), 1);
        assert!(match_all(&p, &t(vec![num(1.0)])).unwrap().is_empty());
    }

    #[test]
    fn first_match_and_literals() {
        let null = Term::con("null", "JSON", vec![]);
        let tru = Term::con("boolean", "JSON", vec![Term::bool(true)]);
        assert_eq!(match_first(&Pattern::Lit(null.clone()), &tru).unwrap(), None);
        assert_eq!(match_first(&Pattern::Lit(null.clone()), &null).unwrap(), Some(Env::new()));
    }

    #[test]
    fn wildcards_record_nothing() {
        let p = parray(vec![
            Pattern::SeqWild(json()),
            Pattern::var("x", json()),
            Pattern::SeqWild(json()),
        ]);
        let envs = match_all(&p, &array(vec![num(1.0), num(2.0), num(3.0)])).unwrap();
        let xs: Vec<_> = envs.iter().map(|e| e.get("x").cloned().unwrap()).collect();
        assert_eq!(
            xs,
            vec![Binding::One(num(1.0)), Binding::One(num(2.0)), Binding::One(num(3.0))]
        );
        assert!(envs.iter().all(|e| e.len() == 1));
    }

    #[test]
    fn type_mismatch_is_reported_up_front() {
        let p = Pattern::var("p", ArgType::adt("Prop"));
        assert!(matches!(
            match_all(&p, &num(1.0)),
            Err(MatchError::TypeMismatch { .. })
        ));
        let p = Pattern::seq_var("p", json());
        assert!(matches!(match_all(&p, &num(1.0)), Err(MatchError::InvalidPattern(_))));
    }

    #[test]
    fn for_each_stops_on_break() {
        let p = Pattern::list(
            vec![Pattern::seq_var("a", json()), Pattern::seq_var("b", json())],
            json(),
        );
        let t = Term::list(vec![num(1.0); 10], json());
        let mut n = 0;
        for_each_match(&p, &t, |_| {
            n += 1;
            if n == 3 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .unwrap();
        assert_eq!(n, 3);
    }
}
