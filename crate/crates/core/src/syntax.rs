//! Concrete term syntax: lexer, parser and canonical printer.
//!
//! The grammar, loosest binding first:
//!
//! ```text
//! level 1   <=>   right-associative
//! level 2   ==>   right-associative
//! level 3   \/    right-associative
//! level 4   /\    right-associative
//! level 5   =     non-associative
//! level 6   ::    right-associative
//! level 7   +     left-associative
//! level 8   ~     prefix
//! level 9   application (juxtaposition), left-associative
//! atoms     identifiers, parenthesized terms, binders `!x:ty.` / `?x:ty.`
//! ```
//!
//! A binder's body extends as far right as possible. Types are written
//! `bool`, `num`, `list(num)` and `a -> b` (right-associative arrows).
//! Printing is canonical and bit-exact: `parse(print(t))` is alpha-equal
//! to `t`, and replay of printed scripts depends on this.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::term::{mk_binder, Term, Type};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at column {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        pos,
        msg: msg.into(),
    })
}

// -- signature ----------------------------------------------------------

/// Fixed monomorphic signature of the non-logical constants used by the
/// bundled theories. The logical constants are instantiated per use by
/// the parser.
pub fn signature() -> &'static HashMap<String, Type> {
    static SIG: OnceLock<HashMap<String, Type>> = OnceLock::new();
    SIG.get_or_init(|| {
        let num = Type::num;
        let lnum = || Type::list(Type::num());
        let f = Type::fun;
        let mut m = HashMap::new();
        m.insert("T".to_string(), Type::bool_ty());
        m.insert("F".to_string(), Type::bool_ty());
        m.insert("0".to_string(), num());
        m.insert("SUC".to_string(), f(num(), num()));
        m.insert("+".to_string(), f(num(), f(num(), num())));
        m.insert("MULT".to_string(), f(num(), f(num(), num())));
        m.insert("EVEN".to_string(), f(num(), Type::bool_ty()));
        m.insert("LE".to_string(), f(num(), f(num(), Type::bool_ty())));
        m.insert("NIL".to_string(), lnum());
        m.insert("::".to_string(), f(num(), f(lnum(), lnum())));
        m.insert("APPEND".to_string(), f(lnum(), f(lnum(), lnum())));
        m.insert("SNOC".to_string(), f(num(), f(lnum(), lnum())));
        m.insert("LENGTH".to_string(), f(lnum(), num()));
        m.insert("REV".to_string(), f(lnum(), lnum()));
        m.insert("MEM".to_string(), f(num(), f(lnum(), Type::bool_ty())));
        m.insert("MAP".to_string(), f(f(num(), num()), f(lnum(), lnum())));
        m
    })
}

const INFIX_CONSTS: [&str; 7] = ["<=>", "==>", "\\/", "/\\", "=", "::", "+"];

fn is_infix_const(name: &str) -> bool {
    INFIX_CONSTS.contains(&name)
}

// -- lexer --------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Lexed {
    toks: Vec<(Tok, usize)>,
}

const SYMBOLS: [&str; 14] = [
    "<=>", "==>", "->", "::", "/\\", "\\/", "=", "+", "~", "!", "?", "(", ")", ",",
];

fn lex(src: &str) -> Result<Lexed, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        for sym in SYMBOLS {
            if src[i..].starts_with(sym) {
                toks.push((Tok::Sym(sym), i));
                i += sym.len();
                continue 'outer;
            }
        }
        // `.` and `:` after the multi-char symbols (`::` already matched).
        if c == '.' {
            toks.push((Tok::Sym("."), i));
            i += 1;
            continue;
        }
        if c == ':' {
            toks.push((Tok::Sym(":"), i));
            i += 1;
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < bytes.len() {
                let d = bytes[i] as char;
                if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                    i += 1;
                } else {
                    break;
                }
            }
            toks.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        return err(i, format!("unexpected character `{}`", c));
    }
    Ok(Lexed { toks })
}

// -- parser -------------------------------------------------------------

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    free_env: &'a HashMap<String, Type>,
    bound: Vec<(String, Type)>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == sym => {
                self.pos += 1;
                Ok(())
            }
            _ => err(self.here(), format!("expected `{}`", sym)),
        }
    }

    fn parse_type(&mut self) -> Result<Type, ParseError> {
        let lhs = self.parse_type_atom()?;
        if let Some(Tok::Sym("->")) = self.peek() {
            self.pos += 1;
            let rhs = self.parse_type()?;
            Ok(Type::fun(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn parse_type_atom(&mut self) -> Result<Type, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Sym("(")) => {
                let ty = self.parse_type()?;
                self.expect_sym(")")?;
                Ok(ty)
            }
            Some(Tok::Ident(name)) => {
                let mut args = Vec::new();
                if let Some(Tok::Sym("(")) = self.peek() {
                    self.pos += 1;
                    loop {
                        args.push(self.parse_type()?);
                        match self.bump() {
                            Some(Tok::Sym(",")) => continue,
                            Some(Tok::Sym(")")) => break,
                            _ => return err(self.here(), "expected `,` or `)` in type arguments"),
                        }
                    }
                }
                let arity = match name.as_str() {
                    "bool" | "num" => 0,
                    "list" => 1,
                    "fun" => 2,
                    _ => return err(at, format!("unknown type constructor `{}`", name)),
                };
                if args.len() != arity {
                    return err(
                        at,
                        format!(
                            "type constructor `{}` takes {} argument(s), got {}",
                            name,
                            arity,
                            args.len()
                        ),
                    );
                }
                Ok(Type::mk(&name, args))
            }
            _ => err(at, "expected a type"),
        }
    }

    fn parse_level(&mut self, level: u8) -> Result<Term, ParseError> {
        match level {
            1 => self.parse_rassoc("<=>", 1),
            2 => self.parse_rassoc("==>", 2),
            3 => self.parse_rassoc("\\/", 3),
            4 => self.parse_rassoc("/\\", 4),
            5 => {
                let at = self.here();
                let lhs = self.parse_level(6)?;
                if let Some(Tok::Sym("=")) = self.peek() {
                    self.pos += 1;
                    let rhs = self.parse_level(6)?;
                    let lty = lhs.ty();
                    if rhs.ty() != lty {
                        return err(
                            at,
                            format!("`=` applied to {} and {}", lty, rhs.ty()),
                        );
                    }
                    Ok(crate::term::mk_eq(lhs, rhs))
                } else {
                    Ok(lhs)
                }
            }
            6 => {
                let at = self.here();
                let lhs = self.parse_level(7)?;
                if let Some(Tok::Sym("::")) = self.peek() {
                    self.pos += 1;
                    let rhs = self.parse_level(6)?;
                    self.mk_infix_app(at, "::", lhs, rhs)
                } else {
                    Ok(lhs)
                }
            }
            7 => {
                let mut at = self.here();
                let mut acc = self.parse_level(8)?;
                while let Some(Tok::Sym("+")) = self.peek() {
                    self.pos += 1;
                    let rhs = self.parse_level(8)?;
                    acc = self.mk_infix_app(at, "+", acc, rhs)?;
                    at = self.here();
                }
                Ok(acc)
            }
            8 => {
                if let Some(Tok::Sym("~")) = self.peek() {
                    let at = self.here();
                    self.pos += 1;
                    let operand = self.parse_level(8)?;
                    if !operand.ty().is_bool() {
                        return err(at, format!("`~` applied to {}", operand.ty()));
                    }
                    Ok(crate::term::mk_neg(operand))
                } else {
                    self.parse_level(9)
                }
            }
            9 => {
                let at = self.here();
                let mut acc = self.parse_atom()?;
                loop {
                    match self.peek() {
                        Some(Tok::Ident(_)) | Some(Tok::Sym("(")) | Some(Tok::Sym("!"))
                        | Some(Tok::Sym("?")) | Some(Tok::Sym("~")) => {
                            let arg = if matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::Sym("(")))
                            {
                                self.parse_atom()?
                            } else {
                                return err(self.here(), "binders and `~` must be parenthesized in argument position");
                            };
                            acc = Term::app(acc, arg)
                                .map_err(|e| ParseError { pos: at, msg: e.to_string() })?;
                        }
                        _ => break,
                    }
                }
                Ok(acc)
            }
            _ => unreachable!(),
        }
    }

    fn parse_rassoc(&mut self, op: &'static str, level: u8) -> Result<Term, ParseError> {
        let at = self.here();
        let lhs = self.parse_level(level + 1)?;
        if let Some(Tok::Sym(s)) = self.peek() {
            if *s == op {
                self.pos += 1;
                let rhs = self.parse_level(level)?;
                return self.mk_infix_app(at, op, lhs, rhs);
            }
        }
        Ok(lhs)
    }

    fn mk_infix_app(
        &self,
        at: usize,
        op: &str,
        lhs: Term,
        rhs: Term,
    ) -> Result<Term, ParseError> {
        let cty = match op {
            "::" | "+" => signature().get(op).cloned().unwrap(),
            _ => Type::fun(
                Type::bool_ty(),
                Type::fun(Type::bool_ty(), Type::bool_ty()),
            ),
        };
        let c = Term::cnst(op, cty);
        let t = Term::app(c, lhs)
            .and_then(|f| Term::app(f, rhs))
            .map_err(|e| ParseError { pos: at, msg: e.to_string() })?;
        Ok(t)
    }

    fn parse_atom(&mut self) -> Result<Term, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Sym("(")) => {
                let t = self.parse_level(1)?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Some(Tok::Sym(b @ "!")) | Some(Tok::Sym(b @ "?")) => {
                let var = match self.bump() {
                    Some(Tok::Ident(v)) => v,
                    _ => return err(self.here(), "expected a bound variable name"),
                };
                self.expect_sym(":")?;
                let ty = self.parse_type()?;
                self.expect_sym(".")?;
                self.bound.push((var.clone(), ty.clone()));
                let body = self.parse_level(1)?;
                self.bound.pop();
                if !body.ty().is_bool() {
                    return err(at, format!("binder body has type {}", body.ty()));
                }
                Ok(mk_binder(b, &var, ty, body))
            }
            Some(Tok::Ident(name)) => {
                // Innermost binding wins; then the free-variable environment;
                // then the constant signature.
                for (bn, bt) in self.bound.iter().rev() {
                    if *bn == name {
                        return Ok(Term::var(&name, bt.clone()));
                    }
                }
                if let Some(ty) = self.free_env.get(&name) {
                    return Ok(Term::var(&name, ty.clone()));
                }
                if let Some(ty) = signature().get(&name) {
                    return Ok(Term::cnst(&name, ty.clone()));
                }
                err(at, format!("unknown identifier `{}`", name))
            }
            _ => err(at, "expected a term"),
        }
    }
}

/// Parses a term; free variables are typed by `free_env`.
pub fn parse_term(src: &str, free_env: &HashMap<String, Type>) -> Result<Term, ParseError> {
    let lexed = lex(src)?;
    let mut p = Parser {
        toks: &lexed.toks,
        pos: 0,
        end: src.len(),
        free_env,
        bound: Vec::new(),
    };
    let t = p.parse_level(1)?;
    if p.pos != lexed.toks.len() {
        return err(p.here(), "trailing input after term");
    }
    t.check().map_err(|e| ParseError {
        pos: 0,
        msg: e.to_string(),
    })?;
    Ok(t)
}

/// Parses a term with no free variables.
pub fn parse_closed_term(src: &str) -> Result<Term, ParseError> {
    let env = HashMap::new();
    let t = parse_term(src, &env)?;
    if let Some((n, ty)) = t.free_vars().first() {
        return err(0, format!("unbound variable `{}:{}`", n, ty));
    }
    Ok(t)
}

// -- printer ------------------------------------------------------------

/// Printing mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrintMode {
    /// Canonical concrete syntax; round-trips through the parser.
    Standard,
    /// Feature payload form: every variable prints as `V` and binders
    /// carry no type annotation. Not re-parseable.
    Anon,
}

struct Printer {
    mode: PrintMode,
    out: String,
}

impl Printer {
    fn atom_name(&mut self, name: &str) {
        if is_infix_const(name) {
            self.out.push('$');
        }
        self.out.push_str(name);
    }

    fn term(&mut self, t: &Term, prec: u8) {
        // Binders first: they print bare only in trailing (prec 0) position.
        if let Some((x, ty, body)) = t.dest_binder("!").or_else(|| t.dest_binder("?")) {
            let b = if t.dest_binder("!").is_some() { "!" } else { "?" };
            let paren = prec > 0;
            if paren {
                self.out.push('(');
            }
            self.out.push_str(b);
            match self.mode {
                PrintMode::Standard => {
                    self.out.push_str(x);
                    self.out.push(':');
                    self.out.push_str(&ty.to_string());
                }
                PrintMode::Anon => self.out.push('V'),
            }
            self.out.push_str(". ");
            self.term(body, 0);
            if paren {
                self.out.push(')');
            }
            return;
        }
        if let Some(operand) = t.dest_neg() {
            let paren = prec > 8;
            if paren {
                self.out.push('(');
            }
            self.out.push('~');
            self.term(operand, 8);
            if paren {
                self.out.push(')');
            }
            return;
        }
        for (op, level, right_assoc) in [
            ("<=>", 1u8, true),
            ("==>", 2, true),
            ("\\/", 3, true),
            ("/\\", 4, true),
            ("=", 5, false),
            ("::", 6, true),
            ("+", 7, false),
        ] {
            if let Some((l, r)) = t.dest_binop(op) {
                let paren = prec > level;
                if paren {
                    self.out.push('(');
                }
                let (lp, rp) = if right_assoc {
                    (level + 1, level)
                } else if op == "+" {
                    (level, level + 1)
                } else {
                    (level + 1, level + 1)
                };
                self.term(l, lp);
                self.out.push(' ');
                self.out.push_str(op);
                self.out.push(' ');
                self.term(r, rp);
                if paren {
                    self.out.push(')');
                }
                return;
            }
        }
        match t {
            Term::Var(n, _) => match self.mode {
                PrintMode::Standard => self.out.push_str(n),
                PrintMode::Anon => self.out.push('V'),
            },
            Term::Const(n, _) => self.atom_name(n),
            Term::App(f, a) => {
                let paren = prec > 9;
                if paren {
                    self.out.push('(');
                }
                self.term(f, 9);
                self.out.push(' ');
                self.term(a, 10);
                if paren {
                    self.out.push(')');
                }
            }
            Term::Abs(x, ty, body) => {
                let paren = prec > 0;
                if paren {
                    self.out.push('(');
                }
                self.out.push('\\');
                match self.mode {
                    PrintMode::Standard => {
                        self.out.push_str(x);
                        self.out.push(':');
                        self.out.push_str(&ty.to_string());
                    }
                    PrintMode::Anon => self.out.push('V'),
                }
                self.out.push_str(". ");
                self.term(body, 0);
                if paren {
                    self.out.push(')');
                }
            }
        }
    }
}

/// Canonical, re-parseable term text.
pub fn print_term(t: &Term) -> String {
    let mut p = Printer {
        mode: PrintMode::Standard,
        out: String::new(),
    };
    p.term(t, 0);
    p.out
}

/// Feature payload text: variables anonymized to `V`.
pub fn print_term_anon(t: &Term) -> String {
    let mut p = Printer {
        mode: PrintMode::Anon,
        out: String::new(),
    };
    p.term(t, 0);
    p.out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_term(self))
    }
}

/// Goal text `asm1, asm2 |- concl`; statements print as bare conclusions.
pub fn print_goal(g: &crate::term::Goal) -> String {
    if g.assumptions.is_empty() {
        print_term(&g.conclusion)
    } else {
        let asms: Vec<String> = g.assumptions.iter().map(print_term).collect();
        format!("{} |- {}", asms.join(", "), print_term(&g.conclusion))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::alpha_equal;

    fn roundtrip(s: &str) -> String {
        let t = parse_closed_term(s).unwrap();
        let printed = print_term(&t);
        let t2 = parse_closed_term(&printed).unwrap();
        assert!(alpha_equal(&t, &t2), "roundtrip broke {} -> {}", s, printed);
        printed
    }

    #[test]
    fn parses_and_prints_canonically() {
        assert_eq!(roundtrip("!x:num. x + 0 = x"), "!x:num. x + 0 = x");
        assert_eq!(
            roundtrip("!l:list(num). APPEND l NIL = l"),
            "!l:list(num). APPEND l NIL = l"
        );
        assert_eq!(roundtrip("(T /\\ F) ==> T"), "T /\\ F ==> T");
        assert_eq!(roundtrip("T /\\ (F ==> T)"), "T /\\ (F ==> T)");
        assert_eq!(roundtrip("~(T = F)"), "~(T = F)");
        assert_eq!(roundtrip("~T"), "~T");
        assert_eq!(
            roundtrip("!x:num. ?y:num. SUC x = y"),
            "!x:num. ?y:num. SUC x = y"
        );
        assert_eq!(
            roundtrip("!a:bool. !b:bool. a /\\ b ==> b /\\ a"),
            "!a:bool. !b:bool. a /\\ b ==> b /\\ a"
        );
        assert_eq!(
            roundtrip("!x:num. !l:list(num). x :: l = x :: l"),
            "!x:num. !l:list(num). x :: l = x :: l"
        );
        assert_eq!(roundtrip("0 + SUC 0 = SUC 0"), "0 + SUC 0 = SUC 0");
    }

    #[test]
    fn associativity_and_precedence() {
        // + left, :: right, = between them.
        let t = parse_closed_term("0 + 0 + 0 = 0").unwrap();
        assert_eq!(print_term(&t), "0 + 0 + 0 = 0");
        let u = parse_closed_term("0 :: 0 :: NIL = NIL").unwrap();
        assert_eq!(print_term(&u), "0 :: 0 :: NIL = NIL");
        // Implication right-assoc.
        let v = parse_closed_term("T ==> F ==> T").unwrap();
        assert!(v.dest_binop("==>").unwrap().1.dest_binop("==>").is_some());
        // Binder in operand position must be parenthesized when printed.
        let w = parse_closed_term("(!x:num. x = x) /\\ T").unwrap();
        assert_eq!(print_term(&w), "(!x:num. x = x) /\\ T");
    }

    #[test]
    fn anonymized_printing() {
        let t = parse_closed_term("!l:list(num). APPEND l NIL = l").unwrap();
        assert_eq!(print_term_anon(&t), "!V. APPEND V NIL = V");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_closed_term("x + 0 = x").is_err()); // unbound x
        assert!(parse_closed_term("!x:wibble. x = x").is_err());
        assert!(parse_closed_term("T /\\").is_err());
        assert!(parse_closed_term("SUC T").is_err()); // ill-typed application
    }

    #[test]
    fn free_env_types_free_variables() {
        let mut env = HashMap::new();
        env.insert("n".to_string(), Type::num());
        let t = parse_term("n + 0", &env).unwrap();
        assert_eq!(print_term(&t), "n + 0");
        assert_eq!(t.ty(), Type::num());
    }
}
