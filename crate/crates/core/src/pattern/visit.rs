//! `visit`: bottom-up, left-to-right traversal that tries a pattern at
//! every subtree of a compatible type.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{instantiate, match_first, Env, MatchError, Pattern};
use crate::term::{ArgType, Path, Term};

/// Every subtree (children before parents) that `p` matches, with the
/// subtree's path and the first environment found there.
pub fn visit_collect(t: &Term, p: &Pattern) -> Result<Vec<(Path, Env)>, MatchError> {
    p.validate()?;
    let mut hits = Vec::new();
    for (path, sub) in t.subterms_bottom_up() {
        if !p.accepts_type_of(sub) {
            continue;
        }
        if let Some(env) = match_first(p, sub)? {
            hits.push((path, env));
        }
    }
    Ok(hits)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule {index}: {message}")]
    IllTypedRule { index: usize, message: String },
}

/// Rewrite rules checked once at construction: each right side is
/// wildcard-free, uses only variables bound by its left side (at the same
/// kind and type), and has the left side's type.
#[derive(Clone, Debug)]
pub struct RewriteRules {
    rules: Vec<(Pattern, Pattern)>,
}

impl RewriteRules {
    pub fn new(rules: Vec<(Pattern, Pattern)>) -> Result<RewriteRules, RuleError> {
        for (index, (lhs, rhs)) in rules.iter().enumerate() {
            let bad = |message: String| RuleError::IllTypedRule { index, message };
            lhs.validate().map_err(|e| bad(e.to_string()))?;
            rhs.validate().map_err(|e| bad(e.to_string()))?;
            if rhs.has_wildcards() {
                return Err(bad("right side contains a wildcard".into()));
            }
            let bound: BTreeMap<&str, (&ArgType, bool)> = lhs
                .variables()
                .into_iter()
                .map(|v| (v.name, (v.ty, v.sequence)))
                .collect();
            for v in rhs.variables() {
                match bound.get(v.name) {
                    None => return Err(bad(format!("variable {} is not bound by the left side", v.name))),
                    Some(&(ty, seq)) if ty != v.ty || seq != v.sequence => {
                        return Err(bad(format!("variable {} changes type across the rule", v.name)))
                    }
                    Some(_) => {}
                }
            }
            match (lhs.root_type(), rhs.root_type()) {
                (Some(a), Some(b)) if a != b => {
                    return Err(bad(format!("left side has type {a}, right side {b}")))
                }
                (None, _) | (_, None) if !same_maybe_root(lhs, rhs) => {
                    return Err(bad("cannot determine a common type for both sides".into()))
                }
                _ => {}
            }
        }
        Ok(RewriteRules { rules })
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

fn same_maybe_root(a: &Pattern, b: &Pattern) -> bool {
    a.root_type().is_none() && b.root_type().is_none()
}

/// One bottom-up pass: children are rewritten first, then the first rule
/// whose left side matches the (already rewritten) node replaces it. No
/// fixpoint iteration.
pub fn visit_rewrite(t: &Term, rules: &RewriteRules) -> Term {
    let rebuilt = match t {
        Term::Con { name, ty, args } => Term::Con {
            name: name.clone(),
            ty: ty.clone(),
            args: args.iter().map(|a| visit_rewrite(a, rules)).collect(),
        },
        Term::List { elems, elem } => Term::List {
            elems: elems.iter().map(|e| visit_rewrite(e, rules)).collect(),
            elem: elem.clone(),
        },
        Term::Prim(_) => t.clone(),
    };
    for (lhs, rhs) in &rules.rules {
        if !lhs.accepts_type_of(&rebuilt) {
            continue;
        }
        // Rules were validated in `RewriteRules::new`, so neither step fails.
        if let Ok(Some(env)) = match_first(lhs, &rebuilt) {
            if let Ok(out) = instantiate(rhs, &env) {
                return out;
            }
        }
    }
    rebuilt
}
