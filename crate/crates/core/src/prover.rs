//! The small hammer: dependency-aware theorem preselection, fast per-node
//! premise selection, and a budgeted given-clause resolution prover whose
//! successful calls become `hammer_tac [premises]` tactic strings.
//!
//! The refutation setup is standard: premises, assumptions and the negated
//! conclusion are normalized (NNF, standardize apart, Skolemization,
//! distribution) into typed clauses; equality is a predicate with explicit
//! reflexivity, symmetry, transitivity and congruence axioms. Unification
//! respects the monomorphic types, so inferences never mix sorts.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::feature::{features_of_goal, FeatureSet};
use crate::knn::{FeatureDb, ScoringParams};
use crate::meter::{Meter, COST_RESOLUTION_STEP};
use crate::tactic::TacticOutcome;
use crate::term::{is_logical_const_name, Goal, Term, Theorem, Type};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClausifyError {
    #[error("unsupported fragment: {0}")]
    Unsupported(String),
    #[error("clause explosion while distributing")]
    Explosion,
}

/// Hammer parameters: theorems preselected per search, premises per node,
/// and the prover budget per call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HammerConfig {
    pub preselect_n: usize,
    pub final_n: usize,
    pub budget: Duration,
}

impl Default for HammerConfig {
    fn default() -> Self {
        HammerConfig {
            preselect_n: 500,
            final_n: 16,
            budget: Duration::from_millis(100),
        }
    }
}

// -- first-order layer ---------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FoTerm {
    Var(String, Type),
    Fn(String, Vec<FoTerm>, Type),
}

impl FoTerm {
    fn ty(&self) -> &Type {
        match self {
            FoTerm::Var(_, ty) => ty,
            FoTerm::Fn(_, _, ty) => ty,
        }
    }

    fn rename(&self, suffix: &str) -> FoTerm {
        match self {
            FoTerm::Var(n, ty) => FoTerm::Var(format!("{}{}", n, suffix), ty.clone()),
            FoTerm::Fn(n, args, ty) => FoTerm::Fn(
                n.clone(),
                args.iter().map(|a| a.rename(suffix)).collect(),
                ty.clone(),
            ),
        }
    }

    fn key(&self, out: &mut String) {
        match self {
            FoTerm::Var(n, _) => {
                out.push('?');
                out.push_str(n);
            }
            FoTerm::Fn(n, args, _) => {
                out.push_str(n);
                if !args.is_empty() {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        a.key(out);
                    }
                    out.push(')');
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<FoTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub pos: bool,
    pub atom: Atom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseSource {
    Premise(usize),
    Goal,
    EqAxiom,
    Derived,
}

#[derive(Debug, Clone)]
pub struct Clause {
    pub lits: Vec<Literal>,
    pub parents: Vec<usize>,
    pub source: ClauseSource,
}

impl Clause {
    fn is_tautology(&self) -> bool {
        for (i, a) in self.lits.iter().enumerate() {
            for b in &self.lits[i + 1..] {
                if a.pos != b.pos && a.atom == b.atom {
                    return true;
                }
            }
        }
        false
    }

    fn dedup_lits(&mut self) {
        let mut seen: Vec<Literal> = Vec::new();
        self.lits.retain(|l| {
            if seen.contains(l) {
                false
            } else {
                seen.push(l.clone());
                true
            }
        });
    }

    fn key(&self) -> String {
        // Canonical key: variables numbered in first-occurrence order.
        let mut names: Vec<(String, usize)> = Vec::new();
        let mut out = String::new();
        for l in &self.lits {
            out.push(if l.pos { '+' } else { '-' });
            out.push_str(&l.atom.pred);
            out.push('(');
            for a in &l.atom.args {
                let mut raw = String::new();
                a.key(&mut raw);
                out.push_str(&canonicalize_vars(&raw, &mut names));
                out.push(',');
            }
            out.push(')');
        }
        out
    }

    fn size(&self) -> usize {
        self.lits.len()
    }
}

fn canonicalize_vars(raw: &str, names: &mut Vec<(String, usize)>) -> String {
    // Replace `?name` runs by `?K` with K the first-occurrence index.
    let mut out = String::new();
    let mut chars = raw.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '?' {
            let mut name = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' || d == '\'' || d == '$' {
                    name.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            let idx = match names.iter().position(|(n, _)| *n == name) {
                Some(i) => names[i].1,
                None => {
                    let i = names.len();
                    names.push((name.clone(), i));
                    i
                }
            };
            out.push('?');
            out.push_str(&idx.to_string());
        } else {
            out.push(c);
        }
    }
    out
}

// -- clausification ------------------------------------------------------

enum Fof {
    True,
    False,
    Lit(bool, Term),
    And(Vec<Fof>),
    Or(Vec<Fof>),
    Forall(String, Type, Box<Fof>),
    Exists(String, Type, Box<Fof>),
}

fn nnf(t: &Term, pos: bool) -> Result<Fof, ClausifyError> {
    if t.is_const("T") {
        return Ok(if pos { Fof::True } else { Fof::False });
    }
    if t.is_const("F") {
        return Ok(if pos { Fof::False } else { Fof::True });
    }
    if let Some(inner) = t.dest_neg() {
        return nnf(inner, !pos);
    }
    if let Some((l, r)) = t.dest_binop("/\\") {
        let parts = vec![nnf(l, pos)?, nnf(r, pos)?];
        return Ok(if pos { Fof::And(parts) } else { Fof::Or(parts) });
    }
    if let Some((l, r)) = t.dest_binop("\\/") {
        let parts = vec![nnf(l, pos)?, nnf(r, pos)?];
        return Ok(if pos { Fof::Or(parts) } else { Fof::And(parts) });
    }
    if let Some((l, r)) = t.dest_binop("==>") {
        let parts = vec![nnf(l, !pos)?, nnf(r, pos)?];
        return Ok(if pos { Fof::Or(parts) } else { Fof::And(parts) });
    }
    if let Some((l, r)) = t.dest_binop("<=>") {
        return if pos {
            Ok(Fof::And(vec![
                Fof::Or(vec![nnf(l, false)?, nnf(r, true)?]),
                Fof::Or(vec![nnf(r, false)?, nnf(l, true)?]),
            ]))
        } else {
            Ok(Fof::Or(vec![
                Fof::And(vec![nnf(l, true)?, nnf(r, false)?]),
                Fof::And(vec![nnf(r, true)?, nnf(l, false)?]),
            ]))
        };
    }
    if let Some((x, ty, body)) = t.dest_binder("!") {
        let inner = Box::new(nnf(body, pos)?);
        return Ok(if pos {
            Fof::Forall(x.to_string(), ty.clone(), inner)
        } else {
            Fof::Exists(x.to_string(), ty.clone(), inner)
        });
    }
    if let Some((x, ty, body)) = t.dest_binder("?") {
        let inner = Box::new(nnf(body, pos)?);
        return Ok(if pos {
            Fof::Exists(x.to_string(), ty.clone(), inner)
        } else {
            Fof::Forall(x.to_string(), ty.clone(), inner)
        });
    }
    Ok(Fof::Lit(pos, t.clone()))
}

struct SkolemCtx {
    var_counter: usize,
    sk_counter: usize,
}

fn translate_term(
    t: &Term,
    env: &HashMap<(String, Type), FoTerm>,
) -> Result<FoTerm, ClausifyError> {
    match t {
        Term::Var(n, ty) => {
            let key = (n.clone(), ty.clone());
            match env.get(&key) {
                Some(ft) => Ok(ft.clone()),
                // A free variable of the goal is a fixed individual.
                None => Ok(FoTerm::Fn(format!("$v_{}", n), vec![], ty.clone())),
            }
        }
        Term::Const(n, ty) => {
            if is_logical_const_name(n) && n != "T" && n != "F" {
                return Err(ClausifyError::Unsupported(format!(
                    "logical constant `{}` in term position",
                    n
                )));
            }
            Ok(FoTerm::Fn(n.clone(), vec![], ty.clone()))
        }
        Term::App(..) => {
            let (head, args) = t.spine();
            match head {
                Term::Const(n, _) if !is_logical_const_name(n) => {
                    let mut fo_args = Vec::with_capacity(args.len());
                    for a in args {
                        fo_args.push(translate_term(a, env)?);
                    }
                    Ok(FoTerm::Fn(n.clone(), fo_args, t.ty()))
                }
                Term::Var(n, _) => Err(ClausifyError::Unsupported(format!(
                    "variable-headed application of `{}`",
                    n
                ))),
                _ => Err(ClausifyError::Unsupported(
                    "higher-order application in term position".into(),
                )),
            }
        }
        Term::Abs(..) => Err(ClausifyError::Unsupported(
            "abstraction outside a quantifier".into(),
        )),
    }
}

fn translate_atom(
    t: &Term,
    env: &HashMap<(String, Type), FoTerm>,
) -> Result<Atom, ClausifyError> {
    if let Some((l, r)) = t.dest_binop("=") {
        return Ok(Atom {
            pred: "=".into(),
            args: vec![translate_term(l, env)?, translate_term(r, env)?],
        });
    }
    let (head, args) = t.spine();
    match head {
        Term::Const(n, _) if !is_logical_const_name(n) => {
            let mut fo_args = Vec::with_capacity(args.len());
            for a in args {
                fo_args.push(translate_term(a, env)?);
            }
            Ok(Atom {
                pred: n.clone(),
                args: fo_args,
            })
        }
        Term::Var(..) if args.is_empty() => Ok(Atom {
            pred: "$bool".into(),
            args: vec![translate_term(t, env)?],
        }),
        Term::Var(n, _) => Err(ClausifyError::Unsupported(format!(
            "variable-headed atom `{}`",
            n
        ))),
        _ => Err(ClausifyError::Unsupported(
            "unrecognized atom shape".into(),
        )),
    }
}

fn skolemize(
    f: &Fof,
    scope: &mut Vec<FoTerm>,
    env: &mut HashMap<(String, Type), FoTerm>,
    ctx: &mut SkolemCtx,
) -> Result<Cnf, ClausifyError> {
    match f {
        Fof::True => Ok(Cnf(vec![])),
        Fof::False => Ok(Cnf(vec![vec![]])),
        Fof::Lit(pos, t) => {
            let atom = translate_atom(t, env)?;
            Ok(Cnf(vec![vec![Literal { pos: *pos, atom }]]))
        }
        Fof::And(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(skolemize(p, scope, env, ctx)?.0);
            }
            Ok(Cnf(out))
        }
        Fof::Or(parts) => {
            let mut acc: Vec<Vec<Literal>> = vec![vec![]];
            for p in parts {
                let sub = skolemize(p, scope, env, ctx)?;
                let mut next = Vec::new();
                for a in &acc {
                    for b in &sub.0 {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                        if next.len() > 512 {
                            return Err(ClausifyError::Explosion);
                        }
                    }
                }
                acc = next;
            }
            Ok(Cnf(acc))
        }
        Fof::Forall(x, ty, body) => {
            let v = FoTerm::Var(format!("X{}", ctx.var_counter), ty.clone());
            ctx.var_counter += 1;
            let key = (x.clone(), ty.clone());
            let old = env.insert(key.clone(), v.clone());
            scope.push(v);
            let r = skolemize(body, scope, env, ctx);
            scope.pop();
            match old {
                Some(o) => {
                    env.insert(key, o);
                }
                None => {
                    env.remove(&key);
                }
            }
            r
        }
        Fof::Exists(x, ty, body) => {
            let sk = FoTerm::Fn(format!("$sk{}", ctx.sk_counter), scope.clone(), ty.clone());
            ctx.sk_counter += 1;
            let key = (x.clone(), ty.clone());
            let old = env.insert(key.clone(), sk);
            let r = skolemize(body, scope, env, ctx);
            match old {
                Some(o) => {
                    env.insert(key, o);
                }
                None => {
                    env.remove(&key);
                }
            }
            r
        }
    }
}

struct Cnf(Vec<Vec<Literal>>);

/// Checks a formula stays in the supported fragment without translating it.
pub fn check_fragment(t: &Term) -> Result<(), ClausifyError> {
    nnf(t, true).and_then(|f| {
        fn walk(f: &Fof) -> Result<(), ClausifyError> {
            match f {
                Fof::True | Fof::False => Ok(()),
                Fof::Lit(_, t) => {
                    let env = HashMap::new();
                    // Bound variables are not in the env here; fake them as
                    // free individuals for the shape check.
                    fn shape(t: &Term, env: &HashMap<(String, Type), FoTerm>) -> Result<(), ClausifyError> {
                        translate_atom(t, env).map(|_| ())
                    }
                    shape(t, &env)
                }
                Fof::And(ps) | Fof::Or(ps) => ps.iter().try_for_each(walk),
                Fof::Forall(_, _, b) | Fof::Exists(_, _, b) => walk(b),
            }
        }
        walk(&f)
    })
}

/// Clausifies `premises /\ assumptions /\ ~conclusion` and appends the
/// equality axioms for the symbols present.
pub fn clausify(goal: &Goal, premises: &[Theorem]) -> Result<Vec<Clause>, ClausifyError> {
    let mut ctx = SkolemCtx {
        var_counter: 0,
        sk_counter: 0,
    };
    let mut clauses: Vec<Clause> = Vec::new();
    let emit = |cnf: Cnf, source: ClauseSource, clauses: &mut Vec<Clause>| {
        for lits in cnf.0 {
            let mut c = Clause {
                lits,
                parents: vec![],
                source,
            };
            c.dedup_lits();
            if !c.is_tautology() {
                clauses.push(c);
            }
        }
    };
    for (i, thm) in premises.iter().enumerate() {
        let f = nnf(&thm.statement.conclusion, true)?;
        let cnf = skolemize(&f, &mut Vec::new(), &mut HashMap::new(), &mut ctx)?;
        emit(cnf, ClauseSource::Premise(i), &mut clauses);
    }
    for a in &goal.assumptions {
        let f = nnf(a, true)?;
        let cnf = skolemize(&f, &mut Vec::new(), &mut HashMap::new(), &mut ctx)?;
        emit(cnf, ClauseSource::Goal, &mut clauses);
    }
    let f = nnf(&goal.conclusion, false)?;
    let cnf = skolemize(&f, &mut Vec::new(), &mut HashMap::new(), &mut ctx)?;
    emit(cnf, ClauseSource::Goal, &mut clauses);

    append_equality_axioms(&mut clauses);
    Ok(clauses)
}

/// Reflexivity, symmetry, transitivity per equality type, and congruence
/// per function and predicate symbol occurring in the clause set.
fn append_equality_axioms(clauses: &mut Vec<Clause>) {
    let mut eq_types: BTreeSet<Type> = BTreeSet::new();
    let mut fns: BTreeMap<(String, Type), Vec<Type>> = BTreeMap::new();
    let mut preds: BTreeMap<String, Vec<Type>> = BTreeMap::new();

    fn visit_term(t: &FoTerm, fns: &mut BTreeMap<(String, Type), Vec<Type>>) {
        if let FoTerm::Fn(n, args, ty) = t {
            if !args.is_empty() {
                fns.insert(
                    (n.clone(), ty.clone()),
                    args.iter().map(|a| a.ty().clone()).collect(),
                );
            }
            for a in args {
                visit_term(a, fns);
            }
        }
    }

    let mut any_eq = false;
    for c in clauses.iter() {
        for l in &c.lits {
            if l.atom.pred == "=" {
                any_eq = true;
                eq_types.insert(l.atom.args[0].ty().clone());
            } else if !l.atom.args.is_empty() {
                preds.insert(
                    l.atom.pred.clone(),
                    l.atom.args.iter().map(|a| a.ty().clone()).collect(),
                );
            }
            for a in &l.atom.args {
                visit_term(a, &mut fns);
            }
        }
    }
    if !any_eq {
        return;
    }
    // Congruence hypotheses introduce equalities at argument types.
    for tys in fns.values().chain(preds.values()) {
        for ty in tys {
            eq_types.insert(ty.clone());
        }
    }
    for ((_, ret), _) in fns.iter() {
        eq_types.insert(ret.clone());
    }

    let eq = |l: FoTerm, r: FoTerm, pos: bool| Literal {
        pos,
        atom: Atom {
            pred: "=".into(),
            args: vec![l, r],
        },
    };
    let var = |name: &str, ty: &Type| FoTerm::Var(name.to_string(), ty.clone());

    let push = |lits: Vec<Literal>, clauses: &mut Vec<Clause>| {
        clauses.push(Clause {
            lits,
            parents: vec![],
            source: ClauseSource::EqAxiom,
        });
    };

    for ty in &eq_types {
        let x = || var("Ex", ty);
        let y = || var("Ey", ty);
        let z = || var("Ez", ty);
        push(vec![eq(x(), x(), true)], clauses);
        push(vec![eq(x(), y(), false), eq(y(), x(), true)], clauses);
        push(
            vec![
                eq(x(), y(), false),
                eq(y(), z(), false),
                eq(x(), z(), true),
            ],
            clauses,
        );
    }
    for ((name, ret), arg_tys) in &fns {
        let mut lits = Vec::new();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, ty) in arg_tys.iter().enumerate() {
            let x = var(&format!("Cx{}", i), ty);
            let y = var(&format!("Cy{}", i), ty);
            lits.push(eq(x.clone(), y.clone(), false));
            xs.push(x);
            ys.push(y);
        }
        lits.push(eq(
            FoTerm::Fn(name.clone(), xs, ret.clone()),
            FoTerm::Fn(name.clone(), ys, ret.clone()),
            true,
        ));
        push(lits, clauses);
    }
    for (name, arg_tys) in &preds {
        let mut lits = Vec::new();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, ty) in arg_tys.iter().enumerate() {
            let x = var(&format!("Px{}", i), ty);
            let y = var(&format!("Py{}", i), ty);
            lits.push(eq(x.clone(), y.clone(), false));
            xs.push(x);
            ys.push(y);
        }
        lits.push(Literal {
            pos: false,
            atom: Atom {
                pred: name.clone(),
                args: xs,
            },
        });
        lits.push(Literal {
            pos: true,
            atom: Atom {
                pred: name.clone(),
                args: ys,
            },
        });
        push(lits, clauses);
    }
}

// -- unification ---------------------------------------------------------

type FoSubst = HashMap<(String, Type), FoTerm>;

fn walk(t: &FoTerm, s: &FoSubst) -> FoTerm {
    match t {
        FoTerm::Var(n, ty) => match s.get(&(n.clone(), ty.clone())) {
            Some(bound) => walk(bound, s),
            None => t.clone(),
        },
        _ => t.clone(),
    }
}

fn occurs(name: &str, ty: &Type, t: &FoTerm, s: &FoSubst) -> bool {
    match walk(t, s) {
        FoTerm::Var(n, t2) => n == name && t2 == *ty,
        FoTerm::Fn(_, args, _) => args.iter().any(|a| occurs(name, ty, a, s)),
    }
}

fn unify(a: &FoTerm, b: &FoTerm, s: &mut FoSubst) -> bool {
    let a = walk(a, s);
    let b = walk(b, s);
    match (&a, &b) {
        (FoTerm::Var(n1, t1), FoTerm::Var(n2, t2)) if n1 == n2 && t1 == t2 => true,
        (FoTerm::Var(n, ty), other) | (other, FoTerm::Var(n, ty)) => {
            if other.ty() != ty {
                return false;
            }
            if occurs(n, ty, other, s) {
                return false;
            }
            s.insert((n.clone(), ty.clone()), other.clone());
            true
        }
        (FoTerm::Fn(n1, a1, t1), FoTerm::Fn(n2, a2, t2)) => {
            if n1 != n2 || t1 != t2 || a1.len() != a2.len() {
                return false;
            }
            a1.iter().zip(a2).all(|(x, y)| unify(x, y, s))
        }
    }
}

fn unify_atoms(a: &Atom, b: &Atom, s: &mut FoSubst) -> bool {
    if a.pred != b.pred || a.args.len() != b.args.len() {
        return false;
    }
    a.args.iter().zip(&b.args).all(|(x, y)| unify(x, y, s))
}

fn apply_subst_term(t: &FoTerm, s: &FoSubst) -> FoTerm {
    match walk(t, s) {
        FoTerm::Var(n, ty) => FoTerm::Var(n, ty),
        FoTerm::Fn(n, args, ty) => FoTerm::Fn(
            n,
            args.iter().map(|a| apply_subst_term(a, s)).collect(),
            ty,
        ),
    }
}

fn apply_subst_clause(lits: &[Literal], s: &FoSubst) -> Vec<Literal> {
    lits.iter()
        .map(|l| Literal {
            pos: l.pos,
            atom: Atom {
                pred: l.atom.pred.clone(),
                args: l.atom.args.iter().map(|a| apply_subst_term(a, s)).collect(),
            },
        })
        .collect()
}

fn rename_clause(lits: &[Literal], suffix: &str) -> Vec<Literal> {
    lits.iter()
        .map(|l| Literal {
            pos: l.pos,
            atom: Atom {
                pred: l.atom.pred.clone(),
                args: l.atom.args.iter().map(|a| a.rename(suffix)).collect(),
            },
        })
        .collect()
}

// -- given-clause loop ----------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum ResolveResult {
    /// Refutation found; carries the names (input indices resolved to
    /// names by the caller) of the premises used.
    Proof { used_premises: Vec<usize> },
    GaveUp,
    Timeout,
}

const MAX_CLAUSE_LITS: usize = 32;

/// Given-clause saturation with binary resolution and factoring. Clause
/// selection is (size, age) lexicographic; the budget is polled on every
/// inference, so the loop never overruns it by more than one iteration.
pub fn resolve(input: Vec<Clause>, budget: Duration) -> ResolveResult {
    let mut meter = Meter::new(budget);
    resolve_metered(input, &mut meter)
}

pub fn resolve_metered(input: Vec<Clause>, meter: &mut Meter) -> ResolveResult {
    struct Arena {
        clauses: Vec<Clause>,
    }
    impl Arena {
        fn used_premises(&self, id: usize) -> Vec<usize> {
            let mut seen = BTreeSet::new();
            let mut stack = vec![id];
            let mut premises: BTreeMap<usize, usize> = BTreeMap::new();
            while let Some(i) = stack.pop() {
                if !seen.insert(i) {
                    continue;
                }
                if let ClauseSource::Premise(p) = self.clauses[i].source {
                    let slot = premises.entry(p).or_insert(i);
                    *slot = (*slot).min(i);
                }
                stack.extend(self.clauses[i].parents.iter().copied());
            }
            // Order by first clause occurrence (input order).
            let mut v: Vec<(usize, usize)> = premises.into_iter().map(|(p, i)| (i, p)).collect();
            v.sort();
            v.into_iter().map(|(_, p)| p).collect()
        }
    }

    let mut arena = Arena { clauses: Vec::new() };
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = BinaryHeap::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut processed: Vec<usize> = Vec::new();

    let add = |c: Clause,
                   arena: &mut Arena,
                   heap: &mut BinaryHeap<Reverse<(usize, usize)>>,
                   seen: &mut BTreeSet<String>|
     -> Option<usize> {
        let mut c = c;
        c.dedup_lits();
        if c.is_tautology() || c.lits.len() > MAX_CLAUSE_LITS {
            return None;
        }
        if !seen.insert(c.key()) {
            return None;
        }
        let id = arena.clauses.len();
        let empty = c.lits.is_empty();
        let size = c.size();
        arena.clauses.push(c);
        heap.push(Reverse((size, id)));
        if empty {
            Some(id)
        } else {
            None
        }
    };

    for c in input {
        if let Some(id) = add(c, &mut arena, &mut heap, &mut seen) {
            return ResolveResult::Proof {
                used_premises: arena.used_premises(id),
            };
        }
    }

    while let Some(Reverse((_, given_id))) = heap.pop() {
        if meter.charge(COST_RESOLUTION_STEP).is_err() {
            return ResolveResult::Timeout;
        }
        processed.push(given_id);
        let given = arena.clauses[given_id].clone();
        let renamed = rename_clause(&given.lits, "_g");

        // Factoring on the given clause.
        for i in 0..renamed.len() {
            for j in i + 1..renamed.len() {
                if renamed[i].pos != renamed[j].pos {
                    continue;
                }
                if meter.charge(COST_RESOLUTION_STEP).is_err() {
                    return ResolveResult::Timeout;
                }
                let mut s = FoSubst::new();
                if unify_atoms(&renamed[i].atom, &renamed[j].atom, &mut s) {
                    let mut lits = apply_subst_clause(&renamed, &s);
                    lits.remove(j);
                    let c = Clause {
                        lits,
                        parents: vec![given_id],
                        source: ClauseSource::Derived,
                    };
                    if let Some(id) = add(c, &mut arena, &mut heap, &mut seen) {
                        return ResolveResult::Proof {
                            used_premises: arena.used_premises(id),
                        };
                    }
                }
            }
        }

        // Binary resolution of the given clause against every processed
        // clause (including itself).
        for other_idx in 0..processed.len() {
            let other_id = processed[other_idx];
            let other_lits = arena.clauses[other_id].lits.clone();
            for (i, li) in renamed.iter().enumerate() {
                for (j, lj) in other_lits.iter().enumerate() {
                    if li.pos == lj.pos {
                        continue;
                    }
                    if meter.charge(COST_RESOLUTION_STEP).is_err() {
                        return ResolveResult::Timeout;
                    }
                    let mut s = FoSubst::new();
                    if unify_atoms(&li.atom, &lj.atom, &mut s) {
                        let mut lits: Vec<Literal> = Vec::new();
                        for (k, l) in renamed.iter().enumerate() {
                            if k != i {
                                lits.push(l.clone());
                            }
                        }
                        for (k, l) in other_lits.iter().enumerate() {
                            if k != j {
                                lits.push(l.clone());
                            }
                        }
                        let lits = apply_subst_clause(&lits, &s);
                        let c = Clause {
                            lits,
                            parents: vec![given_id, other_id],
                            source: ClauseSource::Derived,
                        };
                        if let Some(id) = add(c, &mut arena, &mut heap, &mut seen) {
                            return ResolveResult::Proof {
                                used_premises: arena.used_premises(id),
                            };
                        }
                    }
                }
            }
        }
    }
    ResolveResult::GaveUp
}

// -- premise selection -----------------------------------------------------

/// k-NN ranking of theorem statements against the conjecture with
/// dependency expansion: each selected theorem grants its dependencies a
/// bonus of its own score divided by its dependency count, then the
/// ranking is recomputed and the top `n` returned.
pub fn preselect_theorems(
    db: &FeatureDb,
    conjecture: &Goal,
    n: usize,
    params: &ScoringParams,
) -> Vec<Theorem> {
    let f_conj = params.classes.filter(&features_of_goal(conjecture));
    let mut thms: Vec<&Theorem> = db.statements().values().collect();
    thms.sort_by_key(|t| t.sequence_index);
    let base: Vec<f64> = thms
        .iter()
        .map(|t| {
            let fs = params
                .classes
                .filter(&crate::feature::features_of_statement(t));
            db.tactic_score_1(params, &f_conj, &fs)
        })
        .collect();
    let mut order: Vec<usize> = (0..thms.len()).collect();
    order.sort_by(|&a, &b| {
        base[b]
            .partial_cmp(&base[a])
            .unwrap()
            .then(thms[a].sequence_index.cmp(&thms[b].sequence_index))
    });
    let mut bonus: HashMap<&str, f64> = HashMap::new();
    for &i in order.iter().take(n) {
        let t = thms[i];
        if t.dependencies.is_empty() {
            continue;
        }
        let share = base[i] / t.dependencies.len() as f64;
        for d in &t.dependencies {
            *bonus.entry(d.as_str()).or_insert(0.0) += share;
        }
    }
    let mut final_order: Vec<usize> = (0..thms.len()).collect();
    let score = |i: usize| base[i] + bonus.get(thms[i].name.as_str()).copied().unwrap_or(0.0);
    final_order.sort_by(|&a, &b| {
        score(b)
            .partial_cmp(&score(a))
            .unwrap()
            .then(thms[a].sequence_index.cmp(&thms[b].sequence_index))
    });
    final_order
        .into_iter()
        .take(n)
        .map(|i| thms[i].clone())
        .collect()
}

/// Final per-node selection: syntactic feature distance only, over the
/// preselected list; ties keep preselection rank.
pub fn select_premises<'a>(
    db: &FeatureDb,
    preselected: &'a [Theorem],
    premise_features: &[FeatureSet],
    goal: &Goal,
    n: usize,
    params: &ScoringParams,
) -> Vec<&'a Theorem> {
    let f_goal = params.classes.filter(&features_of_goal(goal));
    let mut order: Vec<usize> = (0..preselected.len()).collect();
    let scores: Vec<f64> = premise_features
        .iter()
        .map(|fs| db.tactic_score_1(params, &f_goal, fs))
        .collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    order.into_iter().take(n).map(|i| &preselected[i]).collect()
}

// -- the hammer as a tactic -------------------------------------------------

/// Self-contained premise scorer captured by a live hammer: preselected
/// theorems, their feature sets, and a TF-IDF snapshot.
#[derive(Debug)]
pub struct PremiseSelector {
    pub premises: Vec<Theorem>,
    pub features: Vec<FeatureSet>,
    idf: HashMap<crate::feature::Feature, f64>,
    default_idf: f64,
    params: ScoringParams,
}

impl PremiseSelector {
    pub fn new(db: &FeatureDb, preselected: Vec<Theorem>, params: ScoringParams) -> PremiseSelector {
        let features: Vec<FeatureSet> = preselected
            .iter()
            .map(|t| params.classes.filter(&crate::feature::features_of_statement(t)))
            .collect();
        let mut idf = HashMap::new();
        for fs in &features {
            for f in fs {
                idf.entry(f.clone()).or_insert_with(|| db.tfidf(f));
            }
        }
        let default_idf = if db.total_docs() == 0 {
            0.0
        } else {
            (db.total_docs() as f64).ln()
        };
        PremiseSelector {
            premises: preselected,
            features,
            idf,
            default_idf,
            params,
        }
    }

    fn score(&self, goal_features: &FeatureSet, premise: &FeatureSet) -> f64 {
        let mut sum = 0.0;
        for f in premise {
            if goal_features.contains(f) {
                let w = self.idf.get(f).copied().unwrap_or(self.default_idf);
                sum += w.powf(self.params.tau1);
            }
        }
        sum
    }

    pub fn select(&self, goal: &Goal, n: usize) -> Vec<&Theorem> {
        let f_goal = self.params.classes.filter(&features_of_goal(goal));
        let mut order: Vec<usize> = (0..self.premises.len()).collect();
        let scores: Vec<f64> = self
            .features
            .iter()
            .map(|fs| self.score(&f_goal, fs))
            .collect();
        order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
        order.into_iter().take(n).map(|i| &self.premises[i]).collect()
    }
}

/// The hammer call baked into a [`crate::tactic::Tactic`].
#[derive(Clone, Debug)]
pub enum HammerCall {
    /// Per-node selection over the search-wide preselection.
    Live {
        selector: Arc<PremiseSelector>,
        final_n: usize,
        budget: Duration,
    },
    /// Replay of a recorded `hammer_tac [names]` call: resolution
    /// restricted to exactly the listed premises, same budget.
    Replay {
        premises: Arc<Vec<Theorem>>,
        budget: Duration,
    },
}

impl HammerCall {
    pub(crate) fn run(&self, goal: &Goal, meter: &mut Meter) -> (TacticOutcome, Option<String>) {
        match self {
            HammerCall::Live {
                selector,
                final_n,
                budget,
            } => {
                let selected: Vec<Theorem> = selector
                    .select(goal, *final_n)
                    .into_iter()
                    .filter(|t| check_fragment(&t.statement.conclusion).is_ok())
                    .cloned()
                    .collect();
                run_prover(goal, &selected, *budget, meter, true)
            }
            HammerCall::Replay { premises, budget } => {
                run_prover(goal, premises, *budget, meter, false)
            }
        }
    }
}

fn run_prover(
    goal: &Goal,
    premises: &[Theorem],
    budget: Duration,
    meter: &mut Meter,
    report_used: bool,
) -> (TacticOutcome, Option<String>) {
    let clauses = match clausify(goal, premises) {
        Ok(c) => c,
        Err(e) => return (TacticOutcome::Failure(e.to_string()), None),
    };
    let mut sub = Meter::new(budget);
    let result = resolve_metered(clauses, &mut sub);
    let _ = meter.charge(sub.used());
    match result {
        ResolveResult::Proof { used_premises } => {
            let realized = if report_used {
                let names: Vec<&str> = used_premises
                    .iter()
                    .map(|&i| premises[i].name.as_str())
                    .collect();
                Some(format!("hammer_tac [{}]", names.join(", ")))
            } else {
                None
            };
            (TacticOutcome::Subgoals(vec![]), realized)
        }
        ResolveResult::GaveUp => (
            TacticOutcome::Failure("resolution saturated without refutation".into()),
            None,
        ),
        ResolveResult::Timeout => (TacticOutcome::Timeout, None),
    }
}

/// Builds the live hammer tactic for one search: premise preselection is
/// computed once for the whole proof search tree.
pub fn hammer_tactic(db: &FeatureDb, conjecture: &Goal, config: &HammerConfig, params: &ScoringParams) -> crate::tactic::Tactic {
    let preselected = preselect_theorems(db, conjecture, config.preselect_n, params);
    let selector = Arc::new(PremiseSelector::new(db, preselected, *params));
    crate::tactic::make_hammer(
        HammerCall::Live {
            selector,
            final_n: config.final_n,
            budget: config.budget,
        },
        "hammer_tac".to_string(),
    )
}

/// Builds the replay form `hammer_tac [names]` from resolved premises.
pub fn hammer_replay_tactic(premises: Vec<Theorem>, budget: Duration) -> crate::tactic::Tactic {
    let names: Vec<&str> = premises.iter().map(|t| t.name.as_str()).collect();
    let label = format!("hammer_tac [{}]", names.join(", "));
    crate::tactic::make_hammer(
        HammerCall::Replay {
            premises: Arc::new(premises),
            budget,
        },
        label,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_closed_term, parse_term};
    use crate::term::{Goal, Type};
    use std::collections::HashMap;

    fn goal(s: &str) -> Goal {
        Goal::conclusion_only(parse_closed_term(s).unwrap())
    }

    fn thm(name: &str, stmt: &str, seq: usize) -> Theorem {
        Theorem {
            name: name.into(),
            statement: goal(stmt),
            dependencies: vec![],
            sequence_index: seq,
        }
    }

    fn budget() -> Duration {
        Duration::from_millis(100)
    }

    #[test]
    fn unit_contradiction_resolves_in_one_step() {
        // {P}, {~P} with P a ground atom, from two contradictory
        // assumptions; the negated conclusion ~F contributes no clause.
        let g = Goal::new(
            vec![
                parse_closed_term("EVEN 0").unwrap(),
                parse_closed_term("~(EVEN 0)").unwrap(),
            ],
            parse_closed_term("F").unwrap(),
        );
        let clauses = clausify(&g, &[]).unwrap();
        match resolve(clauses, budget()) {
            ResolveResult::Proof { .. } => {}
            other => panic!("expected proof, got {:?}", other),
        }
    }

    #[test]
    fn satisfiable_set_saturates() {
        let g = Goal::new(
            vec![parse_closed_term("EVEN 0").unwrap()],
            parse_closed_term("F").unwrap(),
        );
        let clauses = clausify(&g, &[]).unwrap();
        assert_eq!(resolve(clauses, budget()), ResolveResult::GaveUp);
    }

    #[test]
    fn excluded_middle_is_refutable() {
        // |- A \/ ~A with A an opaque boolean variable.
        let mut env = HashMap::new();
        env.insert("a".to_string(), Type::bool_ty());
        let concl = parse_term("a \\/ ~a", &env).unwrap();
        let clauses = clausify(&Goal::conclusion_only(concl), &[]).unwrap();
        match resolve(clauses, budget()) {
            ResolveResult::Proof { .. } => {}
            other => panic!("expected proof, got {:?}", other),
        }
    }

    #[test]
    fn forall_instantiation_via_skolem_constant() {
        // |- (!x. EVEN x) ==> EVEN 0: refutable with a ground Skolem-free
        // clause from the negated goal.
        let concl = parse_closed_term("(!x:num. EVEN x) ==> EVEN 0").unwrap();
        let clauses = clausify(&Goal::conclusion_only(concl), &[]).unwrap();
        match resolve(clauses, budget()) {
            ResolveResult::Proof { .. } => {}
            other => panic!("expected proof, got {:?}", other),
        }
    }

    #[test]
    fn equational_goal_needs_congruence() {
        // Premises 0 + n = n; goal SUC (0 + 0) = SUC 0.
        let add_zero = thm("ADD_zero", "!n:num. 0 + n = n", 0);
        let concl = parse_closed_term("SUC (0 + 0) = SUC 0").unwrap();
        let clauses = clausify(&Goal::conclusion_only(concl), &[add_zero]).unwrap();
        match resolve(clauses, Duration::from_millis(200)) {
            ResolveResult::Proof { used_premises } => {
                assert_eq!(used_premises, vec![0]);
            }
            other => panic!("expected proof, got {:?}", other),
        }
    }

    #[test]
    fn out_of_fragment_reports_unsupported() {
        // Variable-headed application: !f. f 0 = 0 quantifies a function
        // used in head position.
        let t = parse_closed_term("!f:num -> num. f 0 = 0").unwrap();
        match check_fragment(&t) {
            Err(ClausifyError::Unsupported(_)) => {}
            other => panic!("expected unsupported, got {:?}", other),
        }
    }

    #[test]
    fn resolve_respects_budget() {
        // A hard/satisfiable-looking set under a tiny budget times out
        // rather than hanging.
        let assoc = thm("add_assoc", "!a:num. !b:num. !c:num. (a + b) + c = a + (b + c)", 0);
        let comm = thm("add_comm", "!a:num. !b:num. a + b = b + a", 1);
        let concl = parse_closed_term("!a:num. !b:num. !c:num. a + (b + c) = c + (b + a)").unwrap();
        let clauses = clausify(&Goal::conclusion_only(concl), &[assoc, comm]).unwrap();
        let r = resolve(clauses, Duration::from_micros(200));
        assert_eq!(r, ResolveResult::Timeout);
    }

    #[test]
    fn preselect_plain_similarity_order_without_dependencies() {
        let mut db = FeatureDb::new();
        seed_docs(&mut db);
        db.add_statement(thm("A", "!n:num. n + 0 = n", 10));
        db.add_statement(thm("B", "!l:list(num). REV (REV l) = l", 11));
        db.add_statement(thm("C", "!x:num. MULT x 0 = 0", 12));
        let params = ScoringParams::default();
        let conj = goal("!m:num. m + 0 = m");
        let picked = preselect_theorems(&db, &conj, 3, &params);
        // Plain feature-similarity order: the additive lemma leads.
        assert_eq!(picked[0].name, "A");
        assert_eq!(preselect_theorems(&db, &conj, 10, &params).len(), 3);
    }

    fn seed_docs(db: &mut FeatureDb) {
        // A few goal vectors so tfidf weights are positive.
        let resolve = |name: &str| {
            crate::tactic::reference_tactics()
                .into_iter()
                .find(|t| t.canonical_string == name)
                .ok_or_else(|| "unknown".to_string())
        };
        for (i, src) in ["T", "F ==> F", "T \\/ F"].iter().enumerate() {
            db.record_invocation(
                &goal(src),
                "taut_tac",
                crate::knn::Origin::Human,
                i,
                &resolve,
                None,
            )
            .unwrap();
        }
    }

    #[test]
    fn dependency_bonus_lifts_dependency_over_unrelated() {
        let mut db = FeatureDb::new();
        seed_docs(&mut db);
        // A is similar to the conjecture; B is its sole dependency and
        // otherwise dissimilar; C is mildly related but no dependency.
        let mut a = thm("A", "!n:num. n + 0 = n", 12);
        a.dependencies = vec!["B".into()];
        let b = thm("B", "!l:list(num). REV (REV l) = l", 10);
        let c = thm("C", "!x:num. MULT x 0 = 0", 11);
        db.add_statement(a);
        db.add_statement(b);
        db.add_statement(c);
        let params = ScoringParams::default();
        let conj = goal("!m:num. m + 0 = m");
        let picked = preselect_theorems(&db, &conj, 2, &params);
        let names: Vec<&str> = picked.iter().map(|t| t.name.as_str()).collect();
        assert!(names.contains(&"A"));
        assert!(
            names.contains(&"B") && !names.contains(&"C"),
            "dependency bonus must lift B above unrelated C, got {:?}",
            names
        );
    }

    #[test]
    fn select_premises_prefix_property() {
        let db = FeatureDb::new();
        let params = ScoringParams::default();
        let pres: Vec<Theorem> = (0..10)
            .map(|i| thm(&format!("t{}", i), "!n:num. n + 0 = n", i))
            .collect();
        let feats: Vec<FeatureSet> = pres
            .iter()
            .map(|t| crate::feature::features_of_statement(t))
            .collect();
        let g = goal("!n:num. 0 + n = n");
        let eight: Vec<&str> = select_premises(&db, &pres, &feats, &g, 8, &params)
            .iter()
            .map(|t| t.name.as_str())
            .collect();
        let sixteen: Vec<&str> = select_premises(&db, &pres, &feats, &g, 16, &params)
            .iter()
            .map(|t| t.name.as_str())
            .collect();
        assert_eq!(&sixteen[..8], &eight[..]);
        assert!(select_premises(&db, &pres, &feats, &g, 0, &params).is_empty());
    }

    #[test]
    fn hammer_closes_goal_and_lists_used_premises() {
        let mut db = FeatureDb::new();
        db.add_statement(thm("ADD_zero", "!n:num. 0 + n = n", 0));
        let params = ScoringParams::default();
        let cfg = HammerConfig::default();
        let conj = goal("0 + 0 = 0");
        let tac = hammer_tactic(&db, &conj, &cfg, &params);
        let mut meter = Meter::unlimited();
        let (outcome, realized) = tac.apply_traced(&conj, &mut meter);
        assert_eq!(outcome, TacticOutcome::Subgoals(vec![]));
        assert_eq!(realized.as_str(), "hammer_tac [ADD_zero]");
        // The replay form proves it again from the listed premises alone.
        let replay = hammer_replay_tactic(
            vec![thm("ADD_zero", "!n:num. 0 + n = n", 0)],
            cfg.budget,
        );
        let (outcome2, _) = replay.apply_traced(&conj, &mut Meter::unlimited());
        assert_eq!(outcome2, TacticOutcome::Subgoals(vec![]));
    }

    #[test]
    fn hammer_fails_cleanly_on_non_theorem() {
        let db = FeatureDb::new();
        let params = ScoringParams::default();
        let cfg = HammerConfig::default();
        let conj = goal("EVEN 0");
        let tac = hammer_tactic(&db, &conj, &cfg, &params);
        let (outcome, _) = tac.apply_traced(&conj, &mut Meter::unlimited());
        assert!(matches!(outcome, TacticOutcome::Failure(_) | TacticOutcome::Timeout));
    }

    #[test]
    fn tautological_goal_closes_with_empty_premises() {
        let db = FeatureDb::new();
        let params = ScoringParams::default();
        let cfg = HammerConfig::default();
        let conj = goal("T \\/ F");
        let tac = hammer_tactic(&db, &conj, &cfg, &params);
        let (outcome, realized) = tac.apply_traced(&conj, &mut Meter::unlimited());
        assert_eq!(outcome, TacticOutcome::Subgoals(vec![]));
        assert_eq!(realized.as_str(), "hammer_tac []");
    }
}
