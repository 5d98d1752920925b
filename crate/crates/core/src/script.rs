//! Tactic-script DSL and corpus files.
//!
//! Scripts combine atomic tactics with the two tacticals `THEN`
//! (sequence: apply right to every goal the left produced) and `THENL`
//! (one branch script per produced goal). Other tacticals are rejected by
//! name. Corpus files carry named theories of axioms and proved theorems;
//! replaying a corpus with a recorder sink attached is how the feature
//! database gets built.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use thiserror::Error;

use crate::knn::FeatureDb;
use crate::prover::hammer_replay_tactic;
use crate::syntax::{parse_closed_term, print_goal};
use crate::tactic::{
    apply_with_budget, make_cases_list, make_cases_num, make_exists, make_rewrite,
    normalize_arg_text, reference_tactics, Tactic, TacticOutcome,
};
use crate::term::{Goal, Theorem};

/// Per-atomic budget during script replay. Generous relative to the search
/// budget; every tactic is still internally step-capped.
pub const REPLAY_TACTIC_BUDGET: Duration = Duration::from_secs(1);

const UNSUPPORTED_TACTICALS: [&str; 6] = ["ORELSE", "THEN1", "REVERSE", "VALID", "by", "suffices_by"];

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("script parse error at column {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unsupported tactical `{0}`")]
    UnsupportedTactical(String),
    #[error("unknown tactic `{0}`")]
    UnknownTactic(String),
    #[error("{0}")]
    Resolve(String),
    #[error("THENL arity mismatch at branch list: {goals} goals, {branches} branches")]
    Arity { goals: usize, branches: usize },
    #[error("tactic `{tactic}` {kind} on goal `{goal}`: {reason}")]
    TacticFailed {
        tactic: String,
        kind: &'static str,
        goal: String,
        reason: String,
    },
    #[error("corpus error at {file}:{line}: {msg}")]
    Corpus {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("theory requirement cycle involving: {0}")]
    RequireCycle(String),
}

/// Script abstract syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptAst {
    Atomic(String),
    Then(Box<ScriptAst>, Box<ScriptAst>),
    Thenl(Box<ScriptAst>, Vec<ScriptAst>),
}

// -- lexer ----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum STok {
    Ident(String),
    Quoted(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
}

fn lex_script(src: &str) -> Result<Vec<(STok, usize)>, ScriptError> {
    let mut toks = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '[' => {
                toks.push((STok::LBracket, i));
                i += 1;
            }
            ']' => {
                toks.push((STok::RBracket, i));
                i += 1;
            }
            '(' => {
                toks.push((STok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((STok::RParen, i));
                i += 1;
            }
            ',' => {
                toks.push((STok::Comma, i));
                i += 1;
            }
            '"' => {
                let start = i;
                i += 1;
                let mut s = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(ScriptError::Parse {
                            pos: start,
                            msg: "unterminated quoted argument".into(),
                        });
                    }
                    let d = bytes[i] as char;
                    if d == '"' {
                        i += 1;
                        break;
                    }
                    s.push(d);
                    i += 1;
                }
                toks.push((STok::Quoted(s), start));
            }
            _ if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let d = bytes[i] as char;
                    if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                toks.push((STok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ScriptError::Parse {
                    pos: i,
                    msg: format!("unexpected character `{}`", c),
                })
            }
        }
    }
    Ok(toks)
}

// -- parser -----------------------------------------------------------------

struct SParser<'a> {
    toks: &'a [(STok, usize)],
    pos: usize,
    end: usize,
}

impl<'a> SParser<'a> {
    fn peek(&self) -> Option<&STok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn parse_script(&mut self) -> Result<ScriptAst, ScriptError> {
        let mut acc = self.parse_atom()?;
        loop {
            match self.peek() {
                Some(STok::Ident(w)) if w == "THEN" => {
                    self.pos += 1;
                    let rhs = self.parse_atom()?;
                    acc = ScriptAst::Then(Box::new(acc), Box::new(rhs));
                }
                Some(STok::Ident(w)) if w == "THENL" => {
                    self.pos += 1;
                    match self.peek() {
                        Some(STok::LBracket) => self.pos += 1,
                        _ => {
                            return Err(ScriptError::Parse {
                                pos: self.here(),
                                msg: "expected `[` after THENL".into(),
                            })
                        }
                    }
                    let mut branches = Vec::new();
                    if matches!(self.peek(), Some(STok::RBracket)) {
                        self.pos += 1;
                    } else {
                        loop {
                            branches.push(self.parse_script()?);
                            match self.peek() {
                                Some(STok::Comma) => {
                                    self.pos += 1;
                                }
                                Some(STok::RBracket) => {
                                    self.pos += 1;
                                    break;
                                }
                                _ => {
                                    return Err(ScriptError::Parse {
                                        pos: self.here(),
                                        msg: "expected `,` or `]` in THENL branches".into(),
                                    })
                                }
                            }
                        }
                    }
                    acc = ScriptAst::Thenl(Box::new(acc), branches);
                }
                Some(STok::Ident(w)) if UNSUPPORTED_TACTICALS.contains(&w.as_str()) => {
                    return Err(ScriptError::UnsupportedTactical(w.clone()));
                }
                Some(STok::Ident(w)) => {
                    return Err(ScriptError::UnsupportedTactical(w.clone()));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_atom(&mut self) -> Result<ScriptAst, ScriptError> {
        match self.peek().cloned() {
            Some(STok::LParen) => {
                self.pos += 1;
                let inner = self.parse_script()?;
                match self.peek() {
                    Some(STok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(ScriptError::Parse {
                        pos: self.here(),
                        msg: "unbalanced `(`".into(),
                    }),
                }
            }
            Some(STok::Ident(name)) if name != "THEN" && name != "THENL" => {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(STok::LBracket) => {
                        self.pos += 1;
                        let mut names = Vec::new();
                        if matches!(self.peek(), Some(STok::RBracket)) {
                            self.pos += 1;
                        } else {
                            loop {
                                match self.peek().cloned() {
                                    Some(STok::Ident(n)) => {
                                        self.pos += 1;
                                        names.push(n);
                                    }
                                    _ => {
                                        return Err(ScriptError::Parse {
                                            pos: self.here(),
                                            msg: "expected theorem name in argument list".into(),
                                        })
                                    }
                                }
                                match self.peek() {
                                    Some(STok::Comma) => self.pos += 1,
                                    Some(STok::RBracket) => {
                                        self.pos += 1;
                                        break;
                                    }
                                    _ => {
                                        return Err(ScriptError::Parse {
                                            pos: self.here(),
                                            msg: "expected `,` or `]` in argument list".into(),
                                        })
                                    }
                                }
                            }
                        }
                        Ok(ScriptAst::Atomic(format!("{} [{}]", name, names.join(", "))))
                    }
                    Some(STok::Quoted(arg)) => {
                        self.pos += 1;
                        Ok(ScriptAst::Atomic(format!(
                            "{} \"{}\"",
                            name,
                            normalize_arg_text(&arg)
                        )))
                    }
                    _ => Ok(ScriptAst::Atomic(name)),
                }
            }
            _ => Err(ScriptError::Parse {
                pos: self.here(),
                msg: "expected a tactic".into(),
            }),
        }
    }
}

/// Parses a script into its AST. Atom texts are normalized, so
/// `print_script(parse_script(s))` re-parses to a structurally identical
/// AST.
pub fn parse_script(src: &str) -> Result<ScriptAst, ScriptError> {
    let toks = lex_script(src)?;
    let mut p = SParser {
        toks: &toks,
        pos: 0,
        end: src.len(),
    };
    let ast = p.parse_script()?;
    if p.pos != toks.len() {
        return Err(ScriptError::Parse {
            pos: p.here(),
            msg: "trailing input after script".into(),
        });
    }
    Ok(ast)
}

/// Prints a script with minimal parentheses.
pub fn print_script(ast: &ScriptAst) -> String {
    fn pp(ast: &ScriptAst, out: &mut String) {
        match ast {
            ScriptAst::Atomic(s) => out.push_str(s),
            ScriptAst::Then(l, r) => {
                pp(l, out);
                out.push_str(" THEN ");
                match r.as_ref() {
                    ScriptAst::Atomic(s) => out.push_str(s),
                    nested => {
                        out.push('(');
                        pp(nested, out);
                        out.push(')');
                    }
                }
            }
            ScriptAst::Thenl(l, branches) => {
                pp(l, out);
                out.push_str(" THENL [");
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    pp(b, out);
                }
                out.push(']');
            }
        }
    }
    let mut out = String::new();
    pp(ast, &mut out);
    out
}

/// In-order list of every atomic tactic string in the script.
pub fn atomic_tactics(ast: &ScriptAst) -> Vec<String> {
    fn walk(ast: &ScriptAst, out: &mut Vec<String>) {
        match ast {
            ScriptAst::Atomic(s) => out.push(s.clone()),
            ScriptAst::Then(l, r) => {
                walk(l, out);
                walk(r, out);
            }
            ScriptAst::Thenl(l, branches) => {
                walk(l, out);
                for b in branches {
                    walk(b, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(ast, &mut out);
    out
}

// -- tactic resolution --------------------------------------------------------

/// Resolves atomic tactic strings into executable tactics: the reference
/// library plus theorem lookups for `rewrite_tac`/`hammer_tac` arguments.
pub struct TacticLib {
    base: HashMap<String, Tactic>,
    theorems: BTreeMap<String, Theorem>,
    pub hammer_budget: Duration,
}

impl Default for TacticLib {
    fn default() -> Self {
        TacticLib::new()
    }
}

impl TacticLib {
    pub fn new() -> TacticLib {
        let mut base = HashMap::new();
        for t in reference_tactics() {
            base.insert(t.canonical_string.clone(), t);
        }
        TacticLib {
            base,
            theorems: BTreeMap::new(),
            hammer_budget: crate::prover::HammerConfig::default().budget,
        }
    }

    /// A library whose theorem environment mirrors a feature database's
    /// statement table.
    pub fn from_db(db: &FeatureDb) -> TacticLib {
        let mut lib = TacticLib::new();
        for t in db.statements().values() {
            lib.add_theorem(t.clone());
        }
        lib
    }

    pub fn add_theorem(&mut self, thm: Theorem) {
        self.theorems.insert(thm.name.clone(), thm);
    }

    pub fn theorem(&self, name: &str) -> Option<&Theorem> {
        self.theorems.get(name)
    }

    /// Resolves one atomic tactic string.
    pub fn resolve(&self, atom: &str) -> Result<Tactic, String> {
        let (name, args) = split_atom(atom)?;
        match (name.as_str(), args) {
            ("rewrite_tac", AtomArgs::Names(names)) => {
                let mut resolved = Vec::with_capacity(names.len());
                for n in &names {
                    match self.theorems.get(n) {
                        Some(t) => resolved.push((n.clone(), t.statement.conclusion.clone())),
                        None => return Err(format!("unknown theorem `{}`", n)),
                    }
                }
                Ok(make_rewrite(resolved))
            }
            ("hammer_tac", AtomArgs::Names(names)) => {
                let mut resolved = Vec::with_capacity(names.len());
                for n in &names {
                    match self.theorems.get(n) {
                        Some(t) => resolved.push(t.clone()),
                        None => return Err(format!("unknown theorem `{}`", n)),
                    }
                }
                Ok(hammer_replay_tactic(resolved, self.hammer_budget))
            }
            ("cases_num_tac", AtomArgs::Quoted(v)) => Ok(make_cases_num(&v)),
            ("cases_list_tac", AtomArgs::Quoted(v)) => Ok(make_cases_list(&v)),
            ("exists_tac", AtomArgs::Quoted(w)) => Ok(make_exists(&w)),
            (_, AtomArgs::None) => self
                .base
                .get(&name)
                .cloned()
                .ok_or_else(|| format!("unknown tactic `{}`", name)),
            (_, _) => Err(format!("tactic `{}` does not take that argument", name)),
        }
    }
}

enum AtomArgs {
    None,
    Names(Vec<String>),
    Quoted(String),
}

/// Splits an atomic tactic string into name and argument.
fn split_atom(atom: &str) -> Result<(String, AtomArgs), String> {
    let trimmed = atom.trim();
    match trimmed.find(|c: char| c == '[' || c == '"') {
        None => Ok((trimmed.to_string(), AtomArgs::None)),
        Some(idx) => {
            let name = trimmed[..idx].trim().to_string();
            let rest = trimmed[idx..].trim();
            if let Some(list) = rest.strip_prefix('[') {
                let inner = list
                    .strip_suffix(']')
                    .ok_or_else(|| format!("unbalanced `[` in `{}`", atom))?;
                let names: Vec<String> = if inner.trim().is_empty() {
                    vec![]
                } else {
                    inner.split(',').map(|s| s.trim().to_string()).collect()
                };
                Ok((name, AtomArgs::Names(names)))
            } else if let Some(q) = rest.strip_prefix('"') {
                let inner = q
                    .strip_suffix('"')
                    .ok_or_else(|| format!("unterminated quote in `{}`", atom))?;
                Ok((name, AtomArgs::Quoted(inner.to_string())))
            } else {
                Err(format!("bad argument in `{}`", atom))
            }
        }
    }
}

/// Theorem names referenced by a script's bracketed argument lists.
pub fn referenced_theorems(ast: &ScriptAst) -> Vec<String> {
    let mut out = Vec::new();
    for atom in atomic_tactics(ast) {
        if let Ok((_, AtomArgs::Names(names))) = split_atom(&atom) {
            for n in names {
                if !out.contains(&n) {
                    out.push(n);
                }
            }
        }
    }
    out
}

// -- execution ------------------------------------------------------------

/// Executes a script against a goal: `THEN` applies its right side to
/// every produced goal, `THENL` its i-th branch to the i-th goal. Returns
/// the remaining goals; an empty list means the goal is closed.
pub fn run_script(
    ast: &ScriptAst,
    goal: &Goal,
    lib: &TacticLib,
) -> Result<Vec<Goal>, ScriptError> {
    let mut sink = |_: &Goal, _: &str| {};
    exec(ast, goal, lib, &mut sink)
}

/// Like [`run_script`], but emits `(goal, tactic_string)` to the sink
/// before each atomic application.
pub fn run_script_recorded(
    ast: &ScriptAst,
    goal: &Goal,
    lib: &TacticLib,
    sink: &mut dyn FnMut(&Goal, &str),
) -> Result<Vec<Goal>, ScriptError> {
    exec(ast, goal, lib, sink)
}

fn exec(
    ast: &ScriptAst,
    goal: &Goal,
    lib: &TacticLib,
    sink: &mut dyn FnMut(&Goal, &str),
) -> Result<Vec<Goal>, ScriptError> {
    match ast {
        ScriptAst::Atomic(s) => {
            let tac = lib.resolve(s).map_err(ScriptError::Resolve)?;
            sink(goal, &tac.canonical_string);
            match apply_with_budget(&tac, goal, REPLAY_TACTIC_BUDGET) {
                TacticOutcome::Subgoals(gs) => Ok(gs),
                TacticOutcome::Failure(reason) => Err(ScriptError::TacticFailed {
                    tactic: s.clone(),
                    kind: "failed",
                    goal: print_goal(goal),
                    reason,
                }),
                TacticOutcome::Timeout => Err(ScriptError::TacticFailed {
                    tactic: s.clone(),
                    kind: "timed out",
                    goal: print_goal(goal),
                    reason: "budget exhausted".into(),
                }),
            }
        }
        ScriptAst::Then(l, r) => {
            let gs = exec(l, goal, lib, sink)?;
            let mut out = Vec::new();
            for g in gs {
                out.extend(exec(r, &g, lib, sink)?);
            }
            Ok(out)
        }
        ScriptAst::Thenl(l, branches) => {
            let gs = exec(l, goal, lib, sink)?;
            if gs.len() != branches.len() {
                return Err(ScriptError::Arity {
                    goals: gs.len(),
                    branches: branches.len(),
                });
            }
            let mut out = Vec::new();
            for (g, b) in gs.iter().zip(branches) {
                out.extend(exec(b, g, lib, sink)?);
            }
            Ok(out)
        }
    }
}

// -- corpus ---------------------------------------------------------------

/// One corpus entry: an axiom (no proof) or a theorem with its
/// human-written proof script.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub theorem: Theorem,
    pub theory: String,
    pub proof: Option<String>,
}

impl CorpusEntry {
    pub fn is_axiom(&self) -> bool {
        self.proof.is_none()
    }
}

/// A named theory: requirements plus entries in declaration order.
#[derive(Debug, Clone)]
pub struct CorpusTheory {
    pub name: String,
    pub requires: Vec<String>,
    pub entries: Vec<CorpusEntry>,
}

/// Parses a corpus file (or a directory of `*.thy` files), orders theories
/// by their requirements, assigns chronological sequence indices, and
/// validates that every theorem reference in a proof points at an earlier
/// entry. Entry order plus `requires` induces the total chronological
/// order used by the re-proving harness.
pub fn parse_corpus(path: &Path) -> Result<Vec<CorpusTheory>, ScriptError> {
    let mut sources: Vec<(String, String)> = Vec::new();
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)
            .map_err(|e| ScriptError::Corpus {
                file: path.display().to_string(),
                line: 0,
                msg: e.to_string(),
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|x| x == "thy").unwrap_or(false))
            .collect();
        files.sort();
        for f in files {
            let text = fs::read_to_string(&f).map_err(|e| ScriptError::Corpus {
                file: f.display().to_string(),
                line: 0,
                msg: e.to_string(),
            })?;
            sources.push((f.display().to_string(), text));
        }
    } else {
        let text = fs::read_to_string(path).map_err(|e| ScriptError::Corpus {
            file: path.display().to_string(),
            line: 0,
            msg: e.to_string(),
        })?;
        sources.push((path.display().to_string(), text));
    }
    let mut theories = Vec::new();
    for (file, text) in &sources {
        theories.extend(parse_corpus_text(text, file)?);
    }
    order_and_index(theories)
}

/// Parses corpus text containing one or more theory blocks.
pub fn parse_corpus_text(text: &str, file: &str) -> Result<Vec<CorpusTheory>, ScriptError> {
    enum Pending {
        None,
        Proof { name: String, lines: Vec<String> },
    }
    let corpus_err = |line: usize, msg: String| ScriptError::Corpus {
        file: file.to_string(),
        line,
        msg,
    };
    let mut theories: Vec<CorpusTheory> = Vec::new();
    let mut pending_stmt: Option<(String, String, usize)> = None; // name, stmt, line
    let mut pending = Pending::None;

    let flush_proof = |theories: &mut Vec<CorpusTheory>,
                       pending: &mut Pending,
                       pending_stmt: &mut Option<(String, String, usize)>|
     -> Result<(), ScriptError> {
        if let Pending::Proof { name, lines } = std::mem::replace(pending, Pending::None) {
            let (tname, stmt, line) = pending_stmt.take().ok_or_else(|| corpus_err(0, "internal: proof without statement".into()))?;
            debug_assert_eq!(tname, name);
            let script = lines.join(" ");
            let concl = parse_closed_term(&stmt)
                .map_err(|e| corpus_err(line, format!("bad statement for `{}`: {}", name, e)))?;
            let theory = theories
                .last_mut()
                .ok_or_else(|| corpus_err(line, "entry before any `theory` header".into()))?;
            theory.entries.push(CorpusEntry {
                theorem: Theorem {
                    name,
                    statement: Goal::conclusion_only(concl),
                    dependencies: vec![],
                    sequence_index: 0,
                },
                theory: theory.name.clone(),
                proof: Some(script),
            });
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let starts_stanza = line.starts_with("theory ")
            || line.starts_with("requires ")
            || line.starts_with("axiom ")
            || line.starts_with("thm ")
            || line.starts_with("proof:");
        if !starts_stanza {
            match &mut pending {
                Pending::Proof { lines, .. } => {
                    lines.push(line.to_string());
                    continue;
                }
                Pending::None => {
                    return Err(corpus_err(line_no, format!("unexpected line `{}`", line)))
                }
            }
        }
        // A new stanza terminates any proof in progress.
        if let Pending::Proof { .. } = pending {
            if !line.starts_with("proof:") {
                flush_proof(&mut theories, &mut pending, &mut pending_stmt)?;
            }
        }
        if let Some(name) = line.strip_prefix("theory ") {
            if pending_stmt.is_some() {
                return Err(corpus_err(line_no, "thm without proof before theory header".into()));
            }
            theories.push(CorpusTheory {
                name: name.trim().to_string(),
                requires: vec![],
                entries: vec![],
            });
        } else if let Some(reqs) = line.strip_prefix("requires ") {
            let theory = theories
                .last_mut()
                .ok_or_else(|| corpus_err(line_no, "requires before any theory".into()))?;
            for r in reqs.split_whitespace() {
                theory.requires.push(r.to_string());
            }
        } else if let Some(rest) = line.strip_prefix("axiom ") {
            if pending_stmt.is_some() {
                return Err(corpus_err(line_no, "previous thm still lacks a proof".into()));
            }
            let (name, stmt) = parse_named_statement(rest)
                .ok_or_else(|| corpus_err(line_no, format!("malformed axiom line `{}`", line)))?;
            let concl = parse_closed_term(&stmt)
                .map_err(|e| corpus_err(line_no, format!("bad statement for `{}`: {}", name, e)))?;
            let theory = theories
                .last_mut()
                .ok_or_else(|| corpus_err(line_no, "axiom before any theory".into()))?;
            theory.entries.push(CorpusEntry {
                theorem: Theorem {
                    name,
                    statement: Goal::conclusion_only(concl),
                    dependencies: vec![],
                    sequence_index: 0,
                },
                theory: theory.name.clone(),
                proof: None,
            });
        } else if let Some(rest) = line.strip_prefix("thm ") {
            if pending_stmt.is_some() {
                return Err(corpus_err(line_no, "previous thm still lacks a proof".into()));
            }
            let (name, stmt) = parse_named_statement(rest)
                .ok_or_else(|| corpus_err(line_no, format!("malformed thm line `{}`", line)))?;
            pending_stmt = Some((name, stmt, line_no));
        } else if let Some(rest) = line.strip_prefix("proof:") {
            let (name, _, _) = pending_stmt
                .as_ref()
                .ok_or_else(|| corpus_err(line_no, "proof without a preceding thm".into()))?;
            let mut lines = Vec::new();
            if !rest.trim().is_empty() {
                lines.push(rest.trim().to_string());
            }
            pending = Pending::Proof {
                name: name.clone(),
                lines,
            };
        }
    }
    if let Pending::Proof { .. } = pending {
        flush_proof(&mut theories, &mut pending, &mut pending_stmt)?;
    }
    if let Some((name, _, line)) = pending_stmt {
        return Err(corpus_err(line, format!("thm `{}` has no proof", name)));
    }
    Ok(theories)
}

fn parse_named_statement(rest: &str) -> Option<(String, String)> {
    let (name, stmt) = rest.split_once(':')?;
    let stmt = stmt.trim();
    let stmt = stmt.strip_prefix('"')?.strip_suffix('"')?;
    Some((name.trim().to_string(), stmt.to_string()))
}

/// Orders parsed theories and assigns sequence indices; used when theory
/// blocks were parsed from text directly rather than through
/// [`parse_corpus`].
pub fn parse_corpus_ordered(theories: Vec<CorpusTheory>) -> Result<Vec<CorpusTheory>, ScriptError> {
    order_and_index(theories)
}

/// Stable topological order by `requires`, then global sequence indexing
/// and chronological reference validation.
fn order_and_index(theories: Vec<CorpusTheory>) -> Result<Vec<CorpusTheory>, ScriptError> {
    let names: Vec<String> = theories.iter().map(|t| t.name.clone()).collect();
    for t in &theories {
        for r in &t.requires {
            if !names.contains(r) {
                return Err(ScriptError::Corpus {
                    file: t.name.clone(),
                    line: 0,
                    msg: format!("requires unknown theory `{}`", r),
                });
            }
        }
    }
    let mut ordered: Vec<CorpusTheory> = Vec::new();
    let mut remaining: Vec<CorpusTheory> = theories;
    while !remaining.is_empty() {
        let placed: Vec<String> = ordered.iter().map(|t| t.name.clone()).collect();
        let idx = remaining
            .iter()
            .position(|t| t.requires.iter().all(|r| placed.contains(r)));
        match idx {
            Some(i) => ordered.push(remaining.remove(i)),
            None => {
                let cycle: Vec<String> = remaining.iter().map(|t| t.name.clone()).collect();
                return Err(ScriptError::RequireCycle(cycle.join(", ")));
            }
        }
    }
    // Assign sequence indices and resolve dependencies chronologically.
    let mut seq = 0usize;
    let mut known: BTreeMap<String, usize> = BTreeMap::new();
    for theory in &mut ordered {
        let tname = theory.name.clone();
        for entry in &mut theory.entries {
            entry.theorem.sequence_index = seq;
            if let Some(proof) = &entry.proof {
                let ast = parse_script(proof).map_err(|e| ScriptError::Corpus {
                    file: tname.clone(),
                    line: 0,
                    msg: format!("proof of `{}`: {}", entry.theorem.name, e),
                })?;
                let refs = referenced_theorems(&ast);
                for r in &refs {
                    match known.get(r) {
                        Some(_) => {}
                        None => {
                            return Err(ScriptError::Corpus {
                                file: tname.clone(),
                                line: 0,
                                msg: format!(
                                    "proof of `{}` references `{}` which is not an earlier entry",
                                    entry.theorem.name, r
                                ),
                            })
                        }
                    }
                }
                entry.theorem.dependencies = refs;
            }
            known.insert(entry.theorem.name.clone(), seq);
            seq += 1;
        }
    }
    Ok(ordered)
}

/// Flattens ordered theories into the chronological entry list.
pub fn chronological_entries(theories: &[CorpusTheory]) -> Vec<&CorpusEntry> {
    theories.iter().flat_map(|t| t.entries.iter()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_closed_term;

    fn goal(s: &str) -> Goal {
        Goal::conclusion_only(parse_closed_term(s).unwrap())
    }

    #[test]
    fn parse_then_and_thenl_shapes() {
        let ast = parse_script("strip_tac THEN refl_tac").unwrap();
        assert_eq!(
            ast,
            ScriptAst::Then(
                Box::new(ScriptAst::Atomic("strip_tac".into())),
                Box::new(ScriptAst::Atomic("refl_tac".into()))
            )
        );
        let ast = parse_script(
            "induct_list_tac THENL [rewrite_tac [APPEND_nil], rewrite_tac [APPEND_cons]]",
        )
        .unwrap();
        match &ast {
            ScriptAst::Thenl(head, branches) => {
                assert_eq!(**head, ScriptAst::Atomic("induct_list_tac".into()));
                assert_eq!(branches.len(), 2);
                assert_eq!(
                    branches[0],
                    ScriptAst::Atomic("rewrite_tac [APPEND_nil]".into())
                );
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn unsupported_tactical_is_rejected_by_name() {
        match parse_script("strip_tac ORELSE refl_tac") {
            Err(ScriptError::UnsupportedTactical(w)) => assert_eq!(w, "ORELSE"),
            other => panic!("unexpected {:?}", other),
        }
        assert!(matches!(
            parse_script("conj_tac THENL [refl_tac"),
            Err(ScriptError::Parse { .. })
        ));
    }

    #[test]
    fn atomic_tactics_walks_in_order() {
        let ast = parse_script("a_tac THEN b_tac THENL [c_tac, d_tac THEN e_tac]").unwrap();
        assert_eq!(
            atomic_tactics(&ast),
            vec!["a_tac", "b_tac", "c_tac", "d_tac", "e_tac"]
        );
        assert_eq!(
            atomic_tactics(&ScriptAst::Atomic("x".into())),
            vec!["x".to_string()]
        );
    }

    #[test]
    fn print_parse_roundtrip_preserves_structure() {
        for src in [
            "strip_tac",
            "strip_tac THEN refl_tac THEN accept_tac",
            "conj_tac THENL [refl_tac, strip_tac THEN accept_tac]",
            "a THEN (b THENL [c, d]) THEN e",
            "a THENL [b THENL [c], d] THEN f",
        ] {
            let ast = parse_script(src).unwrap();
            let printed = print_script(&ast);
            let reparsed = parse_script(&printed).unwrap();
            assert_eq!(ast, reparsed, "roundtrip broke `{}` -> `{}`", src, printed);
        }
    }

    #[test]
    fn run_script_executes_thenl_branchwise() {
        let lib = TacticLib::new();
        let ast = parse_script("conj_tac THENL [refl_tac, refl_tac]").unwrap();
        let g = goal("(0 = 0) /\\ (NIL = NIL)");
        assert!(run_script(&ast, &g, &lib).unwrap().is_empty());
        // Arity mismatch is reported.
        let bad = parse_script("conj_tac THENL [refl_tac]").unwrap();
        assert!(matches!(
            run_script(&bad, &g, &lib),
            Err(ScriptError::Arity { goals: 2, branches: 1 })
        ));
    }

    #[test]
    fn recorder_emits_one_invocation_per_executed_atomic() {
        let lib = TacticLib::new();
        let ast = parse_script("conj_tac THENL [refl_tac, refl_tac]").unwrap();
        let g = goal("(0 = 0) /\\ (NIL = NIL)");
        let mut seen: Vec<(String, String)> = Vec::new();
        let mut sink = |g: &Goal, t: &str| seen.push((print_goal(g), t.to_string()));
        run_script_recorded(&ast, &g, &lib, &mut sink).unwrap();
        assert_eq!(seen.len(), 3);
        assert_eq!(seen[0].1, "conj_tac");
        // THEN over two goals records the right-hand tactic twice.
        let ast2 = parse_script("conj_tac THEN refl_tac").unwrap();
        seen.clear();
        let mut sink = |g: &Goal, t: &str| seen.push((print_goal(g), t.to_string()));
        run_script_recorded(&ast2, &g, &lib, &mut sink).unwrap();
        assert_eq!(seen.len(), 3);
        assert_eq!(atomic_tactics(&ast2).len(), 2);
    }

    #[test]
    fn resolver_normalizes_labels_and_reports_unknowns() {
        let lib = TacticLib::new();
        assert!(lib.resolve("strip_tac").is_ok());
        assert!(lib.resolve("no_such_tac").is_err());
        assert!(lib.resolve("rewrite_tac [missing_theorem]").is_err());
        let t = lib.resolve("exists_tac \"SUC  0\"").unwrap();
        assert_eq!(t.canonical_string, "exists_tac \"SUC 0\"");
    }

    #[test]
    fn corpus_minimal_file_and_cycle_errors() {
        let text = r#"
# tiny corpus
theory base

axiom truth: "T"

thm truth_again: "T"
proof: taut_tac
"#;
        let theories = parse_corpus_text(text, "mem").unwrap();
        let theories = super::order_and_index(theories).unwrap();
        assert_eq!(theories.len(), 1);
        let entries = chronological_entries(&theories);
        assert_eq!(entries.len(), 2);
        assert!(entries[0].is_axiom());
        assert_eq!(entries[1].theorem.sequence_index, 1);

        let cyc = r#"
theory a
requires b
thm t1: "T"
proof: taut_tac

theory b
requires a
thm t2: "T"
proof: taut_tac
"#;
        let theories = parse_corpus_text(cyc, "mem").unwrap();
        match super::order_and_index(theories) {
            Err(ScriptError::RequireCycle(names)) => {
                assert!(names.contains('a') && names.contains('b'));
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn corpus_rejects_dangling_references() {
        let text = r#"
theory base
thm t1: "0 + 0 = 0"
proof: rewrite_tac [nonexistent]
"#;
        let theories = parse_corpus_text(text, "mem").unwrap();
        match super::order_and_index(theories) {
            Err(ScriptError::Corpus { msg, .. }) => {
                assert!(msg.contains("nonexistent"), "{}", msg);
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn corpus_multiline_proofs() {
        let text = r#"
theory base
axiom ADD_zero: "!n:num. 0 + n = n"
thm add_zero_zero: "0 + 0 = 0"
proof:
  rewrite_tac [ADD_zero]
"#;
        let theories = parse_corpus_text(text, "mem").unwrap();
        let theories = super::order_and_index(theories).unwrap();
        let entries = chronological_entries(&theories);
        assert_eq!(entries[1].proof.as_deref(), Some("rewrite_tac [ADD_zero]"));
        assert_eq!(entries[1].theorem.dependencies, vec!["ADD_zero"]);
    }
}
