use csbb_core::pattern::{instantiate, match_first, Binding, Env, Pattern};
use csbb_core::term::{ArgType, Path, Signature, Term, JUST, MAYBE_TYPE, NOTHING};

/// Well-typedness by exhaustive search over the declared constructors at
/// every node.
pub fn brute_well_typed(sig: &Signature, t: &Term, ty: &ArgType) -> bool {
    match (ty, t) {
        (ArgType::Prim(k), Term::Prim(p)) => p.prim_type() == *k,
        (ArgType::List(e), Term::List { elems, elem }) => {
            elem == &**e && elems.iter().all(|x| brute_well_typed(sig, x, e))
        }
        (ArgType::Maybe(e), Term::Con { name, ty, args }) => {
            ty == MAYBE_TYPE
                && match (name.as_str(), args.as_slice()) {
                    (NOTHING, []) => true,
                    (JUST, [x]) => brute_well_typed(sig, x, e),
                    _ => false,
                }
        }
        (ArgType::Adt(n), Term::Con { name, ty: owner, args }) => {
            owner == n
                && sig.constructors().iter().any(|c| {
                    &c.ty == n
                        && &c.name == name
                        && c.args.len() == args.len()
                        && c.args.iter().zip(args).all(|(a, x)| brute_well_typed(sig, x, &a.ty))
                })
        }
        _ => false,
    }
}

/// All environments of a flat list pattern (elements are literals,
/// variables, wildcards and sequence variables/wildcards) against `elems`,
/// by enumerating every way to cut the list into one segment per pattern
/// element and filtering the consistent cuts.
pub fn brute_list_matches(pats: &[Pattern], elems: &[Term]) -> Vec<Env> {
    let mut cuts = Vec::new();
    enumerate_cuts(pats, elems.len(), 0, &mut Vec::new(), &mut cuts);
    let mut out = Vec::new();
    'cut: for lens in cuts {
        let mut env = Env::new();
        let mut pos = 0;
        for (p, len) in pats.iter().zip(lens) {
            let seg = &elems[pos..pos + len];
            pos += len;
            let fresh = match p {
                Pattern::Lit(l) => {
                    if &seg[0] != l {
                        continue 'cut;
                    }
                    None
                }
                Pattern::Wild(ty) => {
                    if !seg[0].conforms(ty) {
                        continue 'cut;
                    }
                    None
                }
                Pattern::SeqWild(_) => None,
                Pattern::Var { name, ty } => {
                    if !seg[0].conforms(ty) {
                        continue 'cut;
                    }
                    Some((name, Binding::One(seg[0].clone())))
                }
                Pattern::SeqVar { name, .. } => Some((name, Binding::Seq(seg.to_vec()))),
                other => panic!("oracle handles flat list patterns only, got {other}"),
            };
            if let Some((name, b)) = fresh {
                if name == "_" {
                    continue;
                }
                match env.get(name) {
                    Some(prev) if prev != &b => continue 'cut,
                    Some(_) => {}
                    None => {
                        env.bind(name.clone(), b);
                    }
                }
            }
        }
        out.push(env);
    }
    out
}

fn enumerate_cuts(pats: &[Pattern], n: usize, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let used: usize = cur.iter().sum();
    if i == pats.len() {
        if used == n {
            out.push(cur.clone());
        }
        return;
    }
    let lens: Vec<usize> = match pats[i] {
        Pattern::SeqVar { .. } | Pattern::SeqWild(_) => (0..=n - used).collect(),
        _ if used < n => vec![1],
        _ => vec![],
    };
    for len in lens {
        cur.push(len);
        enumerate_cuts(pats, n, i + 1, cur, out);
        cur.pop();
    }
}

/// The subtrees a pattern hits, by enumerating all subtrees and trying the
/// pattern at each compatible one.
pub fn brute_collect(t: &Term, p: &Pattern) -> Vec<(Path, Env)> {
    fn go(t: &Term, p: &Pattern, path: &mut Path, out: &mut Vec<(Path, Env)>) {
        for (i, c) in t.children().iter().enumerate() {
            path.push(i);
            go(c, p, path, out);
            path.pop();
        }
        if p.accepts_type_of(t) {
            if let Ok(Some(env)) = match_first(p, t) {
                out.push((path.clone(), env));
            }
        }
    }
    let mut out = Vec::new();
    go(t, p, &mut Vec::new(), &mut out);
    out
}

/// Straightforward recursive bottom-up rewriter: rewrite children, then
/// apply the first matching rule once.
pub fn brute_rewrite(t: &Term, rules: &[(Pattern, Pattern)]) -> Term {
    let node = match t {
        Term::Con { name, ty, args } => Term::con(name.clone(), ty.clone(), args.iter().map(|a| brute_rewrite(a, rules)).collect()),
        Term::List { elems, elem } => Term::list(elems.iter().map(|a| brute_rewrite(a, rules)).collect(), elem.clone()),
        Term::Prim(_) => t.clone(),
    };
    for (lhs, rhs) in rules {
        if let Ok(Some(env)) = match_first(lhs, &node) {
            return instantiate(rhs, &env).expect("rule right side instantiates");
        }
    }
    node
}

/// The two atoms of the exhaustive list-match space.
pub fn atoms() -> [Term; 2] {
    [
        Term::con("number", "JSON", vec![Term::real(1.0)]),
        Term::con("string", "JSON", vec![Term::str("b")]),
    ]
}

/// Every list over [`atoms`] of length at most `max_len`.
pub fn atom_lists(max_len: usize) -> Vec<Vec<Term>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|l: &Vec<Term>| {
                atoms().into_iter().map(move |a| {
                    let mut l = l.clone();
                    l.push(a);
                    l
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Every flat list pattern with at most `max_seq` sequence elements
/// (`X*`, `Y*` or the sequence wildcard), at most `max_lit` atom literals
/// and at most `max_single` single-element holes (variable `x` or the
/// wildcard). Repeated names make patterns non-linear.
pub fn list_patterns(max_seq: usize, max_lit: usize, max_single: usize) -> Vec<Vec<Pattern>> {
    let json = ArgType::adt("JSON");
    let [a, b] = atoms();
    let seqs = [
        Pattern::seq_var("X", json.clone()),
        Pattern::seq_var("Y", json.clone()),
        Pattern::SeqWild(json.clone()),
    ];
    let lits = [Pattern::Lit(a), Pattern::Lit(b)];
    let singles = [Pattern::var("x", json.clone()), Pattern::Wild(json)];
    let mut out = Vec::new();
    extend_patterns(&mut Vec::new(), [max_seq, max_lit, max_single], [&seqs, &lits, &singles], &mut out);
    out
}

fn extend_patterns(cur: &mut Vec<Pattern>, budget: [usize; 3], pools: [&[Pattern]; 3], out: &mut Vec<Vec<Pattern>>) {
    out.push(cur.clone());
    for k in 0..3 {
        if budget[k] == 0 {
            continue;
        }
        let mut rest = budget;
        rest[k] -= 1;
        for p in pools[k] {
            cur.push(p.clone());
            extend_patterns(cur, rest, pools, out);
            cur.pop();
        }
    }
}
