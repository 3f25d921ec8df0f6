use thiserror::Error;

use super::{Binding, Env, Pattern};
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("variable {0} is not bound")]
    UnboundVariable(String),
    #[error("binding for {0} does not have the variable's declared type")]
    TypeMismatch(String),
    #[error("wildcards cannot be instantiated")]
    Wildcard,
    #[error("sequence variable {0} outside a list")]
    SequenceOutsideList(String),
}

/// Builds the term described by `p`, splicing in the bindings of `env`.
/// Sequence variables splice their elements in place.
pub fn instantiate(p: &Pattern, env: &Env) -> Result<Term, InstantiateError> {
    match p {
        Pattern::Lit(t) => Ok(t.clone()),
        Pattern::Con { name, ty, args } => Ok(Term::Con {
            name: name.clone(),
            ty: ty.clone(),
            args: args
                .iter()
                .map(|a| instantiate(a, env))
                .collect::<Result<_, _>>()?,
        }),
        Pattern::Var { name, ty } => match env.get(name) {
            None => Err(InstantiateError::UnboundVariable(name.clone())),
            Some(Binding::One(t)) if t.conforms(ty) => Ok(t.clone()),
            Some(_) => Err(InstantiateError::TypeMismatch(name.clone())),
        },
        Pattern::Wild(_) | Pattern::SeqWild(_) => Err(InstantiateError::Wildcard),
        Pattern::SeqVar { name, .. } => Err(InstantiateError::SequenceOutsideList(name.clone())),
        Pattern::List { elems, elem } => {
            let mut out = Vec::with_capacity(elems.len());
            for e in elems {
                match e {
                    Pattern::SeqVar { name, elem: sty } => match env.get(name) {
                        None => return Err(InstantiateError::UnboundVariable(name.clone())),
                        Some(Binding::Seq(ts)) if sty == elem && ts.iter().all(|t| t.conforms(sty)) => {
                            out.extend(ts.iter().cloned())
                        }
                        Some(_) => return Err(InstantiateError::TypeMismatch(name.clone())),
                    },
                    e => out.push(instantiate(e, env)?),
                }
            }
            Ok(Term::List {
                elems: out,
                elem: elem.clone(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::match_all;
    use crate::term::ArgType;

    fn json() -> ArgType {
        ArgType::adt("JSON")
    }

    fn num(x: f64) -> Term {
        Term::con("number", "JSON", vec![Term::real(x)])
    }

    fn prop(k: &str, v: Pattern) -> Pattern {
        Pattern::con(
            "prop",
            "Prop",
            vec![Pattern::Lit(Term::con("id", "Id", vec![Term::str(k)])), v],
        )
    }

    #[test]
    fn interpolates_age() {
        let p = Pattern::con(
            "object",
            "JSON",
            vec![Pattern::list(
                vec![
                    prop("name", Pattern::Lit(Term::con("string", "JSON", vec![Term::str("Rodin")]))),
                    prop("age", Pattern::var("age", json())),
                ],
                ArgType::adt("Prop"),
            )],
        );
        let env: Env = [("age".to_string(), Binding::One(num(29.0)))].into_iter().collect();
        let t = instantiate(&p, &env).unwrap();
        assert_eq!(
            t.to_string(),
            r#"object([prop(id("name"), string("Rodin")), prop(id("age"), number(29.0))])"#
        );
    }

    #[test]
    fn literal_is_identity() {
        assert_eq!(instantiate(&Pattern::Lit(num(1.0)), &Env::new()).unwrap(), num(1.0));
    }

    #[test]
    fn errors() {
        let v = Pattern::var("x", json());
        assert_eq!(
            instantiate(&v, &Env::new()),
            Err(InstantiateError::UnboundVariable("x".into()))
        );
        let env: Env = [("x".to_string(), Binding::One(Term::int(1)))].into_iter().collect();
        assert_eq!(instantiate(&v, &env), Err(InstantiateError::TypeMismatch("x".into())));
        let env: Env = [("x".to_string(), Binding::Seq(vec![]))].into_iter().collect();
        assert_eq!(instantiate(&v, &env), Err(InstantiateError::TypeMismatch("x".into())));
        assert_eq!(instantiate(&Pattern::Wild(json()), &Env::new()), Err(InstantiateError::Wildcard));
    }

    #[test]
    fn splices_sequences_and_inverts_match() {
        let p = Pattern::list(
            vec![
                Pattern::seq_var("a", json()),
                Pattern::Lit(num(2.0)),
                Pattern::seq_var("b", json()),
            ],
            json(),
        );
        let t = Term::list(vec![num(1.0), num(2.0), num(3.0), num(2.0)], json());
        let envs = match_all(&p, &t).unwrap();
        assert_eq!(envs.len(), 2);
        for env in envs {
            assert_eq!(instantiate(&p, &env).unwrap(), t);
        }
    }
}
