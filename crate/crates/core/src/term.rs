//! Types, terms, goals and named theorems for a small simply-typed
//! higher-order-syntax logic.
//!
//! Terms are curried applications over variables and constants, with
//! abstractions appearing under the quantifier constants `!` and `?`.
//! Alpha-equality is the term equality used everywhere: caching, loop
//! detection and assumption matching all go through [`alpha_equal`] or the
//! alpha-invariant keys produced by [`Term::alpha_key`] / [`Goal::key`].

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("ill-typed application: function type {0}, argument type {1}")]
    AppType(String, String),
    #[error("applied non-function of type {0}")]
    NotAFunction(String),
    #[error("substitution replaces {var}:{expected} by a term of type {found}")]
    SubstType {
        var: String,
        expected: String,
        found: String,
    },
    #[error("{0}")]
    Other(String),
}

/// A first-order type: constructor name applied to argument types.
///
/// The fixed constructors are `bool` and `num` (nullary), `list` (unary)
/// and `fun` (binary).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Type {
    pub name: String,
    pub args: Vec<Type>,
}

impl Type {
    pub fn mk(name: &str, args: Vec<Type>) -> Type {
        Type {
            name: name.to_string(),
            args,
        }
    }

    pub fn bool_ty() -> Type {
        Type::mk("bool", vec![])
    }

    pub fn num() -> Type {
        Type::mk("num", vec![])
    }

    pub fn list(elem: Type) -> Type {
        Type::mk("list", vec![elem])
    }

    pub fn fun(dom: Type, cod: Type) -> Type {
        Type::mk("fun", vec![dom, cod])
    }

    pub fn is_bool(&self) -> bool {
        self.name == "bool" && self.args.is_empty()
    }

    pub fn is_fun(&self) -> bool {
        self.name == "fun"
    }

    /// Domain and codomain of a function type.
    pub fn fun_parts(&self) -> Option<(&Type, &Type)> {
        if self.is_fun() && self.args.len() == 2 {
            Some((&self.args[0], &self.args[1]))
        } else {
            None
        }
    }

    /// Collects every constructor name occurring in this type.
    pub fn constructor_names(&self, out: &mut BTreeSet<String>) {
        out.insert(self.name.clone());
        for a in &self.args {
            a.constructor_names(out);
        }
    }
}

impl fmt::Display for Type {
    /// Canonical type syntax: `bool`, `num`, `list(num)`, `num -> num`.
    /// Function arrows are right-associative; a function type on the left
    /// of an arrow is parenthesized.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((dom, cod)) = self.fun_parts() {
            if dom.is_fun() {
                write!(f, "({}) -> {}", dom, cod)
            } else {
                write!(f, "{} -> {}", dom, cod)
            }
        } else if self.args.is_empty() {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}(", self.name)?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", a)?;
            }
            write!(f, ")")
        }
    }
}

/// Names of the logical constants. `!` and `?` take an abstraction;
/// the binary connectives and `=` are curried.
pub const LOGICAL_CONSTS: [&str; 10] = ["!", "?", "/\\", "\\/", "==>", "<=>", "~", "=", "T", "F"];

/// The connectives forming the top-level logical skeleton of a formula
/// (equality is atomic for skeleton purposes).
pub const SKELETON_CONSTS: [&str; 7] = ["!", "?", "/\\", "\\/", "==>", "~", "<=>"];

pub fn is_logical_const_name(name: &str) -> bool {
    LOGICAL_CONSTS.contains(&name)
}

/// A curried term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String, Type),
    Const(String, Type),
    App(Box<Term>, Box<Term>),
    Abs(String, Type, Box<Term>),
}

impl Term {
    pub fn var(name: &str, ty: Type) -> Term {
        Term::Var(name.to_string(), ty)
    }

    pub fn cnst(name: &str, ty: Type) -> Term {
        Term::Const(name.to_string(), ty)
    }

    /// Type-checked application.
    pub fn app(f: Term, a: Term) -> Result<Term, TermError> {
        let fty = f.ty();
        match fty.fun_parts() {
            Some((dom, _)) if *dom == a.ty() => Ok(Term::App(Box::new(f), Box::new(a))),
            Some((dom, _)) => Err(TermError::AppType(dom.to_string(), a.ty().to_string())),
            None => Err(TermError::NotAFunction(fty.to_string())),
        }
    }

    pub fn abs(var: &str, ty: Type, body: Term) -> Term {
        Term::Abs(var.to_string(), ty, Box::new(body))
    }

    /// The type of the term. Inputs are well-typed by construction, so
    /// application just projects the codomain.
    pub fn ty(&self) -> Type {
        match self {
            Term::Var(_, ty) | Term::Const(_, ty) => ty.clone(),
            Term::App(f, _) => {
                let fty = f.ty();
                match fty.fun_parts() {
                    Some((_, cod)) => cod.clone(),
                    None => fty,
                }
            }
            Term::Abs(_, ty, body) => Type::fun(ty.clone(), body.ty()),
        }
    }

    /// Validates that every application in the term is well-typed.
    pub fn check(&self) -> Result<(), TermError> {
        match self {
            Term::Var(..) | Term::Const(..) => Ok(()),
            Term::App(f, a) => {
                f.check()?;
                a.check()?;
                let fty = f.ty();
                match fty.fun_parts() {
                    Some((dom, _)) if *dom == a.ty() => Ok(()),
                    Some((dom, _)) => Err(TermError::AppType(dom.to_string(), a.ty().to_string())),
                    None => Err(TermError::NotAFunction(fty.to_string())),
                }
            }
            Term::Abs(_, _, body) => body.check(),
        }
    }

    /// Head and argument list of the application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f.as_ref();
        }
        args.reverse();
        (cur, args)
    }

    pub fn const_name(&self) -> Option<&str> {
        match self {
            Term::Const(n, _) => Some(n),
            _ => None,
        }
    }

    /// Destructs a quantified formula `!x. b` / `?x. b`.
    pub fn dest_binder(&self, binder: &str) -> Option<(&str, &Type, &Term)> {
        if let Term::App(f, a) = self {
            if f.const_name() == Some(binder) {
                if let Term::Abs(x, ty, body) = a.as_ref() {
                    return Some((x, ty, body));
                }
            }
        }
        None
    }

    /// Destructs a binary connective application `l op r`.
    pub fn dest_binop(&self, op: &str) -> Option<(&Term, &Term)> {
        if let Term::App(fr, r) = self {
            if let Term::App(f, l) = fr.as_ref() {
                if f.const_name() == Some(op) {
                    return Some((l.as_ref(), r.as_ref()));
                }
            }
        }
        None
    }

    /// Destructs a negation `~t`.
    pub fn dest_neg(&self) -> Option<&Term> {
        if let Term::App(f, a) = self {
            if f.const_name() == Some("~") {
                return Some(a.as_ref());
            }
        }
        None
    }

    pub fn is_const(&self, name: &str) -> bool {
        self.const_name() == Some(name)
    }

    /// Free variables, as (name, type) pairs in first-occurrence order.
    pub fn free_vars(&self) -> Vec<(String, Type)> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.free_vars_into(&mut bound, &mut out);
        out
    }

    fn free_vars_into(&self, bound: &mut Vec<(String, Type)>, out: &mut Vec<(String, Type)>) {
        match self {
            Term::Var(n, ty) => {
                let key = (n.clone(), ty.clone());
                if !bound.contains(&key) && !out.contains(&key) {
                    out.push(key);
                }
            }
            Term::Const(..) => {}
            Term::App(f, a) => {
                f.free_vars_into(bound, out);
                a.free_vars_into(bound, out);
            }
            Term::Abs(x, ty, body) => {
                bound.push((x.clone(), ty.clone()));
                body.free_vars_into(bound, out);
                bound.pop();
            }
        }
    }

    /// All variable names occurring in the term, free or bound.
    pub fn all_var_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(n, _) => {
                out.insert(n.clone());
            }
            Term::Const(..) => {}
            Term::App(f, a) => {
                f.all_var_names(out);
                a.all_var_names(out);
            }
            Term::Abs(x, _, body) => {
                out.insert(x.clone());
                body.all_var_names(out);
            }
        }
    }

    /// Alpha-invariant canonical form: bound variables are renumbered
    /// `%0`, `%1`, ... in binding order. Two terms are alpha-equal iff
    /// their keys are equal.
    pub fn alpha_key(&self) -> String {
        fn go(t: &Term, env: &mut Vec<(String, Type)>, out: &mut String) {
            match t {
                Term::Var(n, ty) => {
                    let hit = env
                        .iter()
                        .rev()
                        .position(|(bn, bt)| bn == n && bt == ty)
                        .map(|i| env.len() - 1 - i);
                    match hit {
                        Some(i) => {
                            out.push('%');
                            out.push_str(&i.to_string());
                        }
                        None => {
                            out.push('v');
                            out.push_str(n);
                            out.push(':');
                            out.push_str(&ty.to_string());
                        }
                    }
                }
                Term::Const(n, ty) => {
                    out.push('c');
                    out.push_str(n);
                    out.push(':');
                    out.push_str(&ty.to_string());
                }
                Term::App(f, a) => {
                    out.push('(');
                    go(f, env, out);
                    out.push(' ');
                    go(a, env, out);
                    out.push(')');
                }
                Term::Abs(x, ty, body) => {
                    out.push('\\');
                    out.push_str(&ty.to_string());
                    out.push('.');
                    env.push((x.clone(), ty.clone()));
                    go(body, env, out);
                    env.pop();
                }
            }
        }
        let mut out = String::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Number of subterm nodes; used as a cheap size measure.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(..) | Term::Const(..) => 1,
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Abs(_, _, body) => 1 + body.size(),
        }
    }
}

/// True iff `a` and `b` are equal up to bound-variable renaming.
pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, env: &mut Vec<((String, Type), (String, Type))>) -> bool {
        match (a, b) {
            (Term::Var(na, ta), Term::Var(nb, tb)) => {
                for ((xa, tya), (xb, tyb)) in env.iter().rev() {
                    let hit_a = xa == na && tya == ta;
                    let hit_b = xb == nb && tyb == tb;
                    if hit_a || hit_b {
                        return hit_a && hit_b;
                    }
                }
                na == nb && ta == tb
            }
            (Term::Const(na, ta), Term::Const(nb, tb)) => na == nb && ta == tb,
            (Term::App(fa, aa), Term::App(fb, ab)) => go(fa, fb, env) && go(aa, ab, env),
            (Term::Abs(xa, ta, ba), Term::Abs(xb, tb, bb)) => {
                if ta != tb {
                    return false;
                }
                env.push(((xa.clone(), ta.clone()), (xb.clone(), tb.clone())));
                let r = go(ba, bb, env);
                env.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

/// Picks a variable name based on `base` that does not occur in `taken`,
/// appending primes as needed.
pub fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// Capture-avoiding simultaneous substitution. Keys are (name, type)
/// pairs; each replacement must have the replaced variable's type.
pub fn subst(term: &Term, binding: &HashMap<(String, Type), Term>) -> Result<Term, TermError> {
    for ((name, ty), repl) in binding {
        if repl.ty() != *ty {
            return Err(TermError::SubstType {
                var: name.clone(),
                expected: ty.to_string(),
                found: repl.ty().to_string(),
            });
        }
    }
    Ok(subst_unchecked(term, binding))
}

fn subst_unchecked(term: &Term, binding: &HashMap<(String, Type), Term>) -> Term {
    if binding.is_empty() {
        return term.clone();
    }
    match term {
        Term::Var(n, ty) => match binding.get(&(n.clone(), ty.clone())) {
            Some(repl) => repl.clone(),
            None => term.clone(),
        },
        Term::Const(..) => term.clone(),
        Term::App(f, a) => Term::App(
            Box::new(subst_unchecked(f, binding)),
            Box::new(subst_unchecked(a, binding)),
        ),
        Term::Abs(x, ty, body) => {
            // Drop bindings shadowed by the binder.
            let key = (x.clone(), ty.clone());
            let inner: HashMap<_, _> = binding
                .iter()
                .filter(|(k, _)| **k != key)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            if inner.is_empty() {
                return term.clone();
            }
            // Only relevant replacements can capture the binder.
            let body_free = body.free_vars();
            let mut captures = false;
            let mut taken: BTreeSet<String> = BTreeSet::new();
            for ((vn, vt), repl) in &inner {
                if body_free.iter().any(|(fn_, ft)| fn_ == vn && ft == vt) {
                    for (rn, _) in repl.free_vars() {
                        if rn == *x {
                            captures = true;
                        }
                        taken.insert(rn);
                    }
                }
            }
            if captures {
                for (fn_, _) in &body_free {
                    taken.insert(fn_.clone());
                }
                taken.insert(x.clone());
                let mut base = x.clone();
                base.push('\'');
                let fresh = fresh_name(&base, &taken);
                let mut rename = HashMap::new();
                rename.insert(key, Term::var(&fresh, ty.clone()));
                let renamed = subst_unchecked(body, &rename);
                Term::Abs(fresh, ty.clone(), Box::new(subst_unchecked(&renamed, &inner)))
            } else {
                Term::Abs(x.clone(), ty.clone(), Box::new(subst_unchecked(body, &inner)))
            }
        }
    }
}

/// Substitution of a single variable.
pub fn subst1(term: &Term, name: &str, ty: &Type, repl: &Term) -> Result<Term, TermError> {
    let mut m = HashMap::new();
    m.insert((name.to_string(), ty.clone()), repl.clone());
    subst(term, &m)
}

/// Subterm enumeration view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubtermView {
    /// Application spines collapsed into head + full argument list;
    /// partial applications are not positions.
    FullyApplied,
    /// Every node of the raw curried tree, including partial applications
    /// and bare heads.
    Curried,
}

/// Every subterm position in deterministic pre-order under the given view.
/// Quantified formulas count as one position and enumeration continues in
/// the abstraction body.
pub fn subterms(term: &Term, view: SubtermView) -> Vec<Term> {
    let mut out = Vec::new();
    collect_subterms(term, view, &mut out);
    out
}

fn collect_subterms(term: &Term, view: SubtermView, out: &mut Vec<Term>) {
    out.push(term.clone());
    if let Some((_, _, body)) = term
        .dest_binder("!")
        .or_else(|| term.dest_binder("?"))
    {
        collect_subterms(body, view, out);
        return;
    }
    match view {
        SubtermView::FullyApplied => match term {
            Term::App(..) => {
                let (_, args) = term.spine();
                for a in args {
                    collect_subterms(a, view, out);
                }
            }
            Term::Abs(_, _, body) => collect_subterms(body, view, out),
            _ => {}
        },
        SubtermView::Curried => match term {
            Term::App(f, a) => {
                collect_subterms(f, view, out);
                collect_subterms(a, view, out);
            }
            Term::Abs(_, _, body) => collect_subterms(body, view, out),
            _ => {}
        },
    }
}

/// A sequent: boolean assumptions and a boolean conclusion.
///
/// Assumption lists are kept duplicate-free under alpha-equality; goal
/// equality treats them as sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub assumptions: Vec<Term>,
    pub conclusion: Term,
}

impl Goal {
    pub fn new(assumptions: Vec<Term>, conclusion: Term) -> Goal {
        let mut deduped: Vec<Term> = Vec::new();
        for a in assumptions {
            if !deduped.iter().any(|b| alpha_equal(b, &a)) {
                deduped.push(a);
            }
        }
        Goal {
            assumptions: deduped,
            conclusion,
        }
    }

    pub fn conclusion_only(conclusion: Term) -> Goal {
        Goal::new(vec![], conclusion)
    }

    /// Adds an assumption unless an alpha-equal one is present.
    pub fn with_assumption(&self, asm: Term) -> Goal {
        let mut asms = self.assumptions.clone();
        if !asms.iter().any(|b| alpha_equal(b, &asm)) {
            asms.push(asm);
        }
        Goal {
            assumptions: asms,
            conclusion: self.conclusion.clone(),
        }
    }

    /// Alpha- and assumption-order-invariant key. Two goals are equal as
    /// goals iff their keys coincide.
    pub fn key(&self) -> String {
        let mut asms: Vec<String> = self.assumptions.iter().map(|a| a.alpha_key()).collect();
        asms.sort();
        asms.dedup();
        let mut out = String::new();
        for a in asms {
            out.push_str(&a);
            out.push('|');
        }
        out.push_str("|-");
        out.push_str(&self.conclusion.alpha_key());
        out
    }

    /// Goal equality: alpha-equal conclusions and assumption lists equal
    /// as sets under alpha-equality.
    pub fn goal_eq(&self, other: &Goal) -> bool {
        self.key() == other.key()
    }

    /// Free variables over assumptions and conclusion.
    pub fn free_vars(&self) -> Vec<(String, Type)> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        for a in &self.assumptions {
            a.free_vars_into(&mut bound, &mut out);
        }
        self.conclusion.free_vars_into(&mut bound, &mut out);
        out
    }

    /// Every variable name occurring anywhere in the goal.
    pub fn all_var_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in &self.assumptions {
            a.all_var_names(&mut out);
        }
        self.conclusion.all_var_names(&mut out);
        out
    }

    pub fn check(&self) -> Result<(), TermError> {
        for a in &self.assumptions {
            a.check()?;
            if !a.ty().is_bool() {
                return Err(TermError::Other(format!(
                    "assumption has type {}, expected bool",
                    a.ty()
                )));
            }
        }
        self.conclusion.check()?;
        if !self.conclusion.ty().is_bool() {
            return Err(TermError::Other(format!(
                "conclusion has type {}, expected bool",
                self.conclusion.ty()
            )));
        }
        Ok(())
    }
}

/// A named theorem in chronological corpus order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem {
    pub name: String,
    pub statement: Goal,
    pub dependencies: Vec<String>,
    pub sequence_index: usize,
}

// -- logical term builders ---------------------------------------------

pub fn mk_truth() -> Term {
    Term::cnst("T", Type::bool_ty())
}

pub fn mk_falsity() -> Term {
    Term::cnst("F", Type::bool_ty())
}

fn binop_const(name: &str) -> Term {
    Term::cnst(
        name,
        Type::fun(Type::bool_ty(), Type::fun(Type::bool_ty(), Type::bool_ty())),
    )
}

pub fn mk_binop(op: &str, l: Term, r: Term) -> Term {
    Term::App(
        Box::new(Term::App(Box::new(binop_const(op)), Box::new(l))),
        Box::new(r),
    )
}

pub fn mk_conj(l: Term, r: Term) -> Term {
    mk_binop("/\\", l, r)
}

pub fn mk_disj(l: Term, r: Term) -> Term {
    mk_binop("\\/", l, r)
}

pub fn mk_imp(l: Term, r: Term) -> Term {
    mk_binop("==>", l, r)
}

pub fn mk_iff(l: Term, r: Term) -> Term {
    mk_binop("<=>", l, r)
}

pub fn mk_neg(t: Term) -> Term {
    Term::App(
        Box::new(Term::cnst("~", Type::fun(Type::bool_ty(), Type::bool_ty()))),
        Box::new(t),
    )
}

pub fn mk_eq(l: Term, r: Term) -> Term {
    let ty = l.ty();
    let eq = Term::cnst(
        "=",
        Type::fun(ty.clone(), Type::fun(ty, Type::bool_ty())),
    );
    Term::App(
        Box::new(Term::App(Box::new(eq), Box::new(l))),
        Box::new(r),
    )
}

pub fn mk_binder(binder: &str, var: &str, ty: Type, body: Term) -> Term {
    let q = Term::cnst(
        binder,
        Type::fun(Type::fun(ty.clone(), Type::bool_ty()), Type::bool_ty()),
    );
    Term::App(Box::new(q), Box::new(Term::abs(var, ty, body)))
}

pub fn mk_forall(var: &str, ty: Type, body: Term) -> Term {
    mk_binder("!", var, ty, body)
}

pub fn mk_exists(var: &str, ty: Type, body: Term) -> Term {
    mk_binder("?", var, ty, body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_closed_term;

    fn t(s: &str) -> Term {
        parse_closed_term(s).unwrap()
    }

    #[test]
    fn subst_renames_on_capture() {
        // subst(!x. x = y, {y -> x}) must rename the binder.
        let x = Term::var("x", Type::num());
        let y = Term::var("y", Type::num());
        let body = mk_eq(x.clone(), y);
        let tm = mk_forall("x", Type::num(), body);
        let out = subst1(&tm, "y", &Type::num(), &x).unwrap();
        let expected = mk_forall(
            "x'",
            Type::num(),
            mk_eq(Term::var("x'", Type::num()), Term::var("x", Type::num())),
        );
        assert!(alpha_equal(&out, &expected));
        // The naive (capturing) reading would be alpha-equal to !x. x = x.
        let capturing = mk_forall(
            "x",
            Type::num(),
            mk_eq(Term::var("x", Type::num()), Term::var("x", Type::num())),
        );
        assert!(!alpha_equal(&out, &capturing));
    }

    #[test]
    fn subst_identity_and_rename() {
        let tm = mk_eq(
            Term::App(
                Box::new(Term::App(
                    Box::new(Term::cnst(
                        "+",
                        Type::fun(Type::num(), Type::fun(Type::num(), Type::num())),
                    )),
                    Box::new(Term::var("x", Type::num())),
                )),
                Box::new(Term::cnst("0", Type::num())),
            ),
            Term::var("x", Type::num()),
        );
        let empty = HashMap::new();
        assert_eq!(subst(&tm, &empty).unwrap(), tm);
        let renamed = subst1(&tm, "x", &Type::num(), &Term::var("y", Type::num())).unwrap();
        let mut names = BTreeSet::new();
        renamed.all_var_names(&mut names);
        assert!(names.contains("y") && !names.contains("x"));
    }

    #[test]
    fn subst_rejects_type_mismatch() {
        let tm = Term::var("x", Type::num());
        let err = subst1(&tm, "x", &Type::num(), &mk_truth()).unwrap_err();
        assert!(matches!(err, TermError::SubstType { .. }));
    }

    #[test]
    fn alpha_equality_cases() {
        assert!(alpha_equal(&t("!x:num. x = x"), &t("!y:num. y = y")));
        assert!(!alpha_equal(&t("!x:num. x = 0"), &t("!y:num. y = SUC 0")));
        let x = Term::var("x", Type::num());
        assert!(alpha_equal(&x, &x));
        // Free variables do not identify.
        assert!(!alpha_equal(
            &Term::var("x", Type::num()),
            &Term::var("y", Type::num())
        ));
    }

    #[test]
    fn subterm_views_match_hand_enumeration() {
        // APPEND l NIL: positions enumerated by hand.
        let append = Term::cnst(
            "APPEND",
            Type::fun(
                Type::list(Type::num()),
                Type::fun(Type::list(Type::num()), Type::list(Type::num())),
            ),
        );
        let l = Term::var("l", Type::list(Type::num()));
        let nil = Term::cnst("NIL", Type::list(Type::num()));
        let tm = Term::app(Term::app(append.clone(), l.clone()).unwrap(), nil.clone()).unwrap();

        let fully = subterms(&tm, SubtermView::FullyApplied);
        assert_eq!(fully, vec![tm.clone(), l.clone(), nil.clone()]);

        let curried = subterms(&tm, SubtermView::Curried);
        let partial = Term::app(append.clone(), l.clone()).unwrap();
        assert_eq!(
            curried,
            vec![tm.clone(), partial, append, l.clone(), nil]
        );

        assert_eq!(subterms(&l, SubtermView::FullyApplied), vec![l.clone()]);
    }

    #[test]
    fn binder_counts_as_one_position() {
        let tm = t("!l:list(num). APPEND l NIL = l");
        let fully = subterms(&tm, SubtermView::FullyApplied);
        // Positions: whole formula, equality, APPEND l NIL, l, NIL, l.
        assert_eq!(fully.len(), 6);
        assert!(alpha_equal(&fully[0], &tm));
    }

    #[test]
    fn goal_equality_is_setwise_on_assumptions() {
        let a = t("T");
        let b = t("F");
        let c = t("T ==> T");
        let g1 = Goal::new(vec![a.clone(), b.clone()], c.clone());
        let g2 = Goal::new(vec![b, a], c);
        assert!(g1.goal_eq(&g2));
        assert_eq!(g1.key(), g2.key());
    }

    #[test]
    fn goal_dedups_alpha_equal_assumptions() {
        let g = Goal::new(
            vec![t("!x:num. x = x"), t("!y:num. y = y")],
            t("T"),
        );
        assert_eq!(g.assumptions.len(), 1);
    }
}
