//! Goal feature extraction.
//!
//! Six feature classes are drawn from a goal, pooled over the conclusion
//! and all assumptions:
//!
//! - `const`: names of constants, including the logical operators;
//! - `tycon`: type constructors in the types of constants and variables;
//! - `fosub`: fully-applied subterms with every variable printed as `V`;
//! - `var`: variable names;
//! - `top`: the top-level logical skeleton down to the first atomic node,
//!   atoms printed as `A`, plus every subtree of that skeleton;
//! - `hosub`: curried subterms including partial applications, variables
//!   printed as `V`.
//!
//! Bare logical constants (and partial applications headed by one) carry
//! no structure beyond their `const` feature and are not subterm features;
//! this keeps the feature set of `T` down to its constant and skeleton.

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::print_term_anon;
use crate::term::{
    is_logical_const_name, subterms, Goal, SubtermView, Term, Theorem, SKELETON_CONSTS,
};

/// Feature class tag. Part of the canonical serialization, so equal
/// payloads in different classes never collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureClass {
    Const,
    Tycon,
    Fosub,
    Var,
    Top,
    Hosub,
}

impl FeatureClass {
    pub fn tag(self) -> &'static str {
        match self {
            FeatureClass::Const => "const",
            FeatureClass::Tycon => "tycon",
            FeatureClass::Fosub => "fosub",
            FeatureClass::Var => "var",
            FeatureClass::Top => "top",
            FeatureClass::Hosub => "hosub",
        }
    }

    pub fn from_tag(tag: &str) -> Option<FeatureClass> {
        Some(match tag {
            "const" => FeatureClass::Const,
            "tycon" => FeatureClass::Tycon,
            "fosub" => FeatureClass::Fosub,
            "var" => FeatureClass::Var,
            "top" => FeatureClass::Top,
            "hosub" => FeatureClass::Hosub,
            _ => return None,
        })
    }
}

/// One feature: class tag plus canonical payload text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Feature {
    pub class: FeatureClass,
    pub payload: String,
}

impl Feature {
    pub fn new(class: FeatureClass, payload: impl Into<String>) -> Feature {
        Feature {
            class,
            payload: payload.into(),
        }
    }

    /// Serialized form `<class>:<payload>`, as stored in the database file.
    pub fn serialize(&self) -> String {
        format!("{}:{}", self.class.tag(), self.payload)
    }

    /// Parses the serialized form (split at the first `:`).
    pub fn parse(s: &str) -> Option<Feature> {
        let (tag, payload) = s.split_once(':')?;
        Some(Feature::new(FeatureClass::from_tag(tag)?, payload))
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.serialize())
    }
}

/// A duplicate-free feature set.
pub type FeatureSet = BTreeSet<Feature>;

/// Which feature classes participate in scoring. Ablations switch off the
/// skeleton and higher-order classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassMask {
    pub use_top: bool,
    pub use_hosub: bool,
}

impl Default for ClassMask {
    fn default() -> Self {
        ClassMask {
            use_top: true,
            use_hosub: true,
        }
    }
}

impl ClassMask {
    pub fn admits(&self, class: FeatureClass) -> bool {
        match class {
            FeatureClass::Top => self.use_top,
            FeatureClass::Hosub => self.use_hosub,
            _ => true,
        }
    }

    pub fn filter(&self, fs: &FeatureSet) -> FeatureSet {
        if self.use_top && self.use_hosub {
            return fs.clone();
        }
        fs.iter().filter(|f| self.admits(f.class)).cloned().collect()
    }
}

fn collect_consts_and_types(t: &Term, out: &mut FeatureSet) {
    match t {
        Term::Var(n, ty) => {
            out.insert(Feature::new(FeatureClass::Var, n.clone()));
            let mut cons = BTreeSet::new();
            ty.constructor_names(&mut cons);
            for c in cons {
                out.insert(Feature::new(FeatureClass::Tycon, c));
            }
        }
        Term::Const(n, ty) => {
            out.insert(Feature::new(FeatureClass::Const, n.clone()));
            let mut cons = BTreeSet::new();
            ty.constructor_names(&mut cons);
            for c in cons {
                out.insert(Feature::new(FeatureClass::Tycon, c));
            }
        }
        Term::App(f, a) => {
            collect_consts_and_types(f, out);
            collect_consts_and_types(a, out);
        }
        Term::Abs(x, ty, body) => {
            out.insert(Feature::new(FeatureClass::Var, x.clone()));
            let mut cons = BTreeSet::new();
            ty.constructor_names(&mut cons);
            for c in cons {
                out.insert(Feature::new(FeatureClass::Tycon, c));
            }
            collect_consts_and_types(body, out);
        }
    }
}

/// A subterm position is structural unless it is a bare logical constant
/// or a partial application headed by one.
fn is_structural_position(t: &Term) -> bool {
    let (head, args) = t.spine();
    match head.const_name() {
        Some(name) if is_logical_const_name(name) => {
            if args.is_empty() {
                return false;
            }
            // Full applications of connectives keep their structure;
            // partial ones do not.
            match name {
                "~" | "!" | "?" => args.len() >= 1,
                "T" | "F" => false,
                _ => args.len() >= 2,
            }
        }
        _ => true,
    }
}

fn collect_subterm_features(t: &Term, view: SubtermView, class: FeatureClass, out: &mut FeatureSet) {
    for sub in subterms(t, view) {
        if is_structural_position(&sub) {
            out.insert(Feature::new(class, print_term_anon(&sub)));
        }
    }
}

// -- top-level logical skeleton ------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Skeleton {
    Atom,
    Neg(Box<Skeleton>),
    Binder(&'static str, Box<Skeleton>),
    Binop(&'static str, Box<Skeleton>, Box<Skeleton>),
}

fn skeleton_of(t: &Term) -> Skeleton {
    for b in ["!", "?"] {
        if let Some((_, _, body)) = t.dest_binder(b) {
            let tag = if b == "!" { "!" } else { "?" };
            return Skeleton::Binder(tag, Box::new(skeleton_of(body)));
        }
    }
    if let Some(inner) = t.dest_neg() {
        return Skeleton::Neg(Box::new(skeleton_of(inner)));
    }
    for op in ["/\\", "\\/", "==>", "<=>"] {
        if let Some((l, r)) = t.dest_binop(op) {
            debug_assert!(SKELETON_CONSTS.contains(&op));
            let tag: &'static str = match op {
                "/\\" => "/\\",
                "\\/" => "\\/",
                "==>" => "==>",
                _ => "<=>",
            };
            return Skeleton::Binop(tag, Box::new(skeleton_of(l)), Box::new(skeleton_of(r)));
        }
    }
    Skeleton::Atom
}

fn print_skeleton(s: &Skeleton, prec: u8) -> String {
    match s {
        Skeleton::Atom => "A".to_string(),
        Skeleton::Neg(inner) => {
            let body = print_skeleton(inner, 8);
            if prec > 8 {
                format!("(~{})", body)
            } else {
                format!("~{}", body)
            }
        }
        Skeleton::Binder(b, body) => {
            let inner = print_skeleton(body, 0);
            if prec > 0 {
                format!("({} {})", b, inner)
            } else {
                format!("{} {}", b, inner)
            }
        }
        Skeleton::Binop(op, l, r) => {
            let level = match *op {
                "<=>" => 1,
                "==>" => 2,
                "\\/" => 3,
                _ => 4,
            };
            let text = format!(
                "{} {} {}",
                print_skeleton(l, level + 1),
                op,
                print_skeleton(r, level)
            );
            if prec > level {
                format!("({})", text)
            } else {
                text
            }
        }
    }
}

fn collect_skeleton_subtrees(s: &Skeleton, out: &mut FeatureSet) {
    out.insert(Feature::new(FeatureClass::Top, print_skeleton(s, 0)));
    match s {
        Skeleton::Atom => {}
        Skeleton::Neg(inner) | Skeleton::Binder(_, inner) => collect_skeleton_subtrees(inner, out),
        Skeleton::Binop(_, l, r) => {
            collect_skeleton_subtrees(l, out);
            collect_skeleton_subtrees(r, out);
        }
    }
}

fn features_of_term(t: &Term, out: &mut FeatureSet) {
    collect_consts_and_types(t, out);
    collect_subterm_features(t, SubtermView::FullyApplied, FeatureClass::Fosub, out);
    collect_subterm_features(t, SubtermView::Curried, FeatureClass::Hosub, out);
    collect_skeleton_subtrees(&skeleton_of(t), out);
}

/// Extracts the pooled feature set of a goal: the union over the
/// conclusion and all assumptions.
pub fn features_of_goal(goal: &Goal) -> FeatureSet {
    let mut out = FeatureSet::new();
    features_of_term(&goal.conclusion, &mut out);
    for a in &goal.assumptions {
        features_of_term(a, &mut out);
    }
    out
}

/// Features of a theorem's statement goal.
pub fn features_of_statement(thm: &Theorem) -> FeatureSet {
    features_of_goal(&thm.statement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_closed_term;
    use crate::term::Goal;

    fn goal(s: &str) -> Goal {
        Goal::conclusion_only(parse_closed_term(s).unwrap())
    }

    fn f(class: FeatureClass, payload: &str) -> Feature {
        Feature::new(class, payload)
    }

    #[test]
    fn append_nil_example_matches_hand_extraction() {
        // Hand-applied extraction rules for |- !l:list(num). APPEND l NIL = l.
        let fs = features_of_goal(&goal("!l:list(num). APPEND l NIL = l"));
        use FeatureClass::*;
        for expect in [
            f(Const, "!"),
            f(Const, "="),
            f(Const, "APPEND"),
            f(Const, "NIL"),
            f(Tycon, "list"),
            f(Tycon, "num"),
            f(Tycon, "fun"),
            f(Tycon, "bool"),
            f(Var, "l"),
            f(Fosub, "APPEND V NIL"),
            f(Fosub, "NIL"),
            f(Fosub, "V"),
            f(Fosub, "APPEND V NIL = V"),
            f(Fosub, "!V. APPEND V NIL = V"),
            f(Top, "! A"),
            f(Top, "A"),
            f(Hosub, "APPEND"),
            f(Hosub, "APPEND V"),
        ] {
            assert!(fs.contains(&expect), "missing {}", expect);
        }
        // No bare logical constant as a subterm feature.
        assert!(!fs.contains(&f(Fosub, "$=")));
        assert!(!fs.contains(&f(Hosub, "$=")));
        // Exact fosub payload set.
        let fosubs: BTreeSet<&str> = fs
            .iter()
            .filter(|x| x.class == Fosub)
            .map(|x| x.payload.as_str())
            .collect();
        let expected: BTreeSet<&str> = [
            "!V. APPEND V NIL = V",
            "APPEND V NIL = V",
            "APPEND V NIL",
            "V",
            "NIL",
        ]
        .into_iter()
        .collect();
        assert_eq!(fosubs, expected);
    }

    #[test]
    fn truth_goal_has_only_const_tycon_top() {
        let fs = features_of_goal(&goal("T"));
        let expected: FeatureSet = [
            f(FeatureClass::Const, "T"),
            f(FeatureClass::Tycon, "bool"),
            f(FeatureClass::Top, "A"),
        ]
        .into_iter()
        .collect();
        assert_eq!(fs, expected);
    }

    #[test]
    fn implication_skeleton() {
        let fs = features_of_goal(&goal("T ==> T"));
        assert!(fs.contains(&f(FeatureClass::Top, "A ==> A")));
        assert!(fs.contains(&f(FeatureClass::Top, "A")));
        assert!(fs.contains(&f(FeatureClass::Const, "==>")));
        let tops: Vec<&Feature> = fs.iter().filter(|x| x.class == FeatureClass::Top).collect();
        assert_eq!(tops.len(), 2);
    }

    #[test]
    fn top_payloads_use_only_connectives_and_a() {
        let fs = features_of_goal(&goal(
            "!a:bool. ~(a /\\ F) \\/ (a ==> T) <=> T",
        ));
        for feat in fs.iter().filter(|x| x.class == FeatureClass::Top) {
            for tok in feat.payload.split_whitespace() {
                let tok = tok.trim_matches(|c| c == '(' || c == ')' || c == '~');
                assert!(
                    tok.is_empty()
                        || tok == "A"
                        || ["!", "?", "/\\", "\\/", "==>", "<=>"].contains(&tok),
                    "unexpected token {} in skeleton {}",
                    tok,
                    feat.payload
                );
            }
        }
    }

    #[test]
    fn fosub_payloads_subset_of_hosub() {
        for src in [
            "!l:list(num). APPEND l NIL = l",
            "!m:num. !n:num. SUC m + n = SUC (m + n)",
            "!x:num. MEM x NIL <=> F",
            "T ==> (F \\/ T)",
        ] {
            let fs = features_of_goal(&goal(src));
            let fo: BTreeSet<&str> = fs
                .iter()
                .filter(|x| x.class == FeatureClass::Fosub)
                .map(|x| x.payload.as_str())
                .collect();
            let ho: BTreeSet<&str> = fs
                .iter()
                .filter(|x| x.class == FeatureClass::Hosub)
                .map(|x| x.payload.as_str())
                .collect();
            assert!(fo.is_subset(&ho), "fosub not within hosub for {}", src);
        }
    }

    #[test]
    fn added_assumption_grows_features_monotonically() {
        let base = goal("!n:num. n + 0 = n");
        let bigger = base.with_assumption(parse_closed_term("EVEN 0").unwrap());
        let fs_base = features_of_goal(&base);
        let fs_bigger = features_of_goal(&bigger);
        assert!(fs_base.is_subset(&fs_bigger));
    }

    #[test]
    fn alpha_renaming_changes_only_var_class() {
        let a = features_of_goal(&goal("!x:num. x + 0 = x"));
        let b = features_of_goal(&goal("!zz:num. zz + 0 = zz"));
        let strip_vars = |fs: &FeatureSet| -> FeatureSet {
            fs.iter()
                .filter(|f| f.class != FeatureClass::Var)
                .cloned()
                .collect()
        };
        assert_eq!(strip_vars(&a), strip_vars(&b));
        assert_ne!(a, b);
    }

    #[test]
    fn serialization_roundtrip_and_class_separation() {
        let x1 = f(FeatureClass::Const, "x");
        let x2 = f(FeatureClass::Var, "x");
        assert_ne!(x1, x2);
        for feat in [x1, x2, f(FeatureClass::Fosub, "V :: V")] {
            assert_eq!(Feature::parse(&feat.serialize()).unwrap(), feat);
        }
    }

    #[test]
    fn statement_features_delegate_to_goal_features() {
        let g = goal("!n:num. n + 0 = n");
        let thm = crate::term::Theorem {
            name: "t".into(),
            statement: g.clone(),
            dependencies: vec![],
            sequence_index: 0,
        };
        assert_eq!(features_of_statement(&thm), features_of_goal(&g));
        // A statement without variables yields no var-class features.
        let closed = crate::term::Theorem {
            name: "c".into(),
            statement: goal("T"),
            dependencies: vec![],
            sequence_index: 1,
        };
        assert!(features_of_statement(&closed)
            .iter()
            .all(|f| f.class != FeatureClass::Var));
    }
}
