//! Expression language: AST, parser, printer and evaluator.
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := atom ("^" factor)? | "-" factor
//! atom   := NUMBER | CONST | IDENT | func "(" args ")" | root(...) | pfq(...)
//!         | bracket(...) | "(" expr ")"
//! ```
//!
//! Numbers are exact rationals (`3`, `0.25`, `1e-6`). Printing is fully
//! parenthesised so that `parse(print(e)) == e`.

use crate::algebra::{self, IntPolynomial, RootSelector};
use crate::error::{Error, Result};
use crate::hyper::{self, BracketSpec, SeriesSpec};
use crate::numerics::{self, constant, ConstantTag, PrecisionContext, C};
use crate::polylog;
use rug::{Float, Rational};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub type Binding = HashMap<String, C>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConstKind {
    Pi,
    I,
    E,
    Catalan,
    Zeta2,
    Zeta3,
    Ln2,
}

impl ConstKind {
    fn name(&self) -> &'static str {
        match self {
            ConstKind::Pi => "pi",
            ConstKind::I => "i",
            ConstKind::E => "e",
            ConstKind::Catalan => "catalan",
            ConstKind::Zeta2 => "zeta2",
            ConstKind::Zeta3 => "zeta3",
            ConstKind::Ln2 => "ln2",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "pi" => ConstKind::Pi,
            "i" => ConstKind::I,
            "e" => ConstKind::E,
            "catalan" => ConstKind::Catalan,
            "zeta2" => ConstKind::Zeta2,
            "zeta3" => ConstKind::Zeta3,
            "ln2" => ConstKind::Ln2,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Li2,
    Cl2,
    Ti2,
    Chi2,
    RogersL,
    RogersLExt,
    BlochWigner,
    Ln,
    Sqrt,
    Exp,
    Arctan,
    Arccot,
    Arcsin,
    Arccosh,
    Arctanh,
    Re,
    Im,
    Arg,
    Abs,
    Conj,
    Sin,
    Cos,
    Tan,
    Sec,
    Gamma,
    Beta,
}

const FUNCS: &[(Func, &str, &[&str])] = &[
    (Func::Li2, "Li2", &["li2"]),
    (Func::Cl2, "Cl2", &["cl2"]),
    (Func::Ti2, "Ti2", &["ti2"]),
    (Func::Chi2, "Chi2", &["chi2"]),
    (Func::RogersL, "RogersL", &["rogersl", "rogers_l"]),
    (Func::RogersLExt, "RogersLExt", &["rogerslext", "rogers_l_ext"]),
    (Func::BlochWigner, "BlochWigner", &["blochwigner", "bloch_wigner"]),
    (Func::Ln, "ln", &["log"]),
    (Func::Sqrt, "sqrt", &[]),
    (Func::Exp, "exp", &[]),
    (Func::Arctan, "arctan", &["atan"]),
    (Func::Arccot, "arccot", &["acot"]),
    (Func::Arcsin, "arcsin", &["asin"]),
    (Func::Arccosh, "arccosh", &["acosh"]),
    (Func::Arctanh, "arctanh", &["atanh"]),
    (Func::Re, "re", &["Re"]),
    (Func::Im, "im", &["Im"]),
    (Func::Arg, "arg", &[]),
    (Func::Abs, "abs", &[]),
    (Func::Conj, "conj", &[]),
    (Func::Sin, "sin", &[]),
    (Func::Cos, "cos", &[]),
    (Func::Tan, "tan", &[]),
    (Func::Sec, "sec", &[]),
    (Func::Gamma, "gamma", &["Gamma"]),
    (Func::Beta, "beta", &["Beta"]),
];

impl Func {
    pub fn name(&self) -> &'static str {
        FUNCS.iter().find(|(f, _, _)| f == self).unwrap().1
    }

    pub fn from_name(s: &str) -> Option<Func> {
        FUNCS
            .iter()
            .find(|(_, n, al)| *n == s || al.contains(&s))
            .map(|(f, _, _)| *f)
    }

    pub fn arity(&self) -> usize {
        if *self == Func::Beta {
            2
        } else {
            1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HyperKind {
    Pfq,
    Bracket,
}

/// Per-subexpression branch adjustments applied by corpus entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverrideAction {
    Negate,
    Conj,
    /// Evaluates a function call with its argument read from below the cut.
    CutBelow,
}

impl OverrideAction {
    fn name(&self) -> &'static str {
        match self {
            OverrideAction::Negate => "branch_negate",
            OverrideAction::Conj => "branch_conj",
            OverrideAction::CutBelow => "cut_below",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "branch_negate" => OverrideAction::Negate,
            "branch_conj" => OverrideAction::Conj,
            "cut_below" => OverrideAction::CutBelow,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Const(ConstKind),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    Root {
        poly: String,
        selector: RootSelector,
    },
    Hyper {
        kind: HyperKind,
        upper: Vec<Rational>,
        lower: Vec<Rational>,
        arg: Box<Expr>,
    },
    Override(OverrideAction, Box<Expr>),
}

fn fmt_rational(q: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if *q.denom() == 1 {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

fn fmt_params(ps: &[Rational], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (k, p) in ps.iter().enumerate() {
        if k > 0 {
            f.write_str(", ")?;
        }
        fmt_rational(p, f)?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => {
                if *q.denom() == 1 && *q.numer() >= 0 {
                    write!(f, "{}", q.numer())
                } else {
                    f.write_str("(")?;
                    fmt_rational(q, f)?;
                    f.write_str(")")
                }
            }
            Expr::Const(c) => f.write_str(c.name()),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Root { poly, selector } => {
                let mut sel = selector.clone();
                let rank = sel.rank.take();
                write!(f, "root(\"{poly}\", {sel}")?;
                if let Some(r) = rank {
                    write!(f, ", {r}")?;
                }
                f.write_str(")")
            }
            Expr::Hyper {
                kind,
                upper,
                lower,
                arg,
            } => {
                f.write_str(match kind {
                    HyperKind::Pfq => "pfq(",
                    HyperKind::Bracket => "bracket(",
                })?;
                fmt_params(upper, f)?;
                f.write_str("; ")?;
                fmt_params(lower, f)?;
                write!(f, "; {arg})")
            }
            Expr::Override(a, e) => write!(f, "{}({e})", a.name()),
        }
    }
}

impl Expr {
    pub fn num(n: i64) -> Expr {
        Expr::Num(Rational::from(n))
    }

    pub fn param(s: &str) -> Expr {
        Expr::Param(s.to_string())
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, vec![a])
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn free_params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(p) => {
                out.insert(p.clone());
            }
            Expr::Neg(e) | Expr::Override(_, e) => e.collect_params(out),
            Expr::Bin(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_params(out)),
            Expr::Hyper { arg, .. } => arg.collect_params(out),
            Expr::Num(_) | Expr::Const(_) | Expr::Root { .. } => {}
        }
    }

    /// Replaces every subtree whose printed form equals `target` by
    /// `Override(action, subtree)`; returns how many were replaced.
    pub fn apply_override(&mut self, target: &Expr, action: OverrideAction) -> usize {
        if self == target {
            let inner = std::mem::replace(self, Expr::num(0));
            *self = Expr::Override(action, Box::new(inner));
            return 1;
        }
        match self {
            Expr::Neg(e) | Expr::Override(_, e) => e.apply_override(target, action),
            Expr::Bin(_, a, b) => a.apply_override(target, action) + b.apply_override(target, action),
            Expr::Call(_, args) => args.iter_mut().map(|a| a.apply_override(target, action)).sum(),
            Expr::Hyper { arg, .. } => arg.apply_override(target, action),
            _ => 0,
        }
    }

    /// Substitutes parameters by expressions.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        match self {
            Expr::Param(p) => map.get(p).cloned().unwrap_or_else(|| self.clone()),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(map))),
            Expr::Override(a, e) => Expr::Override(*a, Box::new(e.substitute(map))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            Expr::Call(f, args) => Expr::Call(*f, args.iter().map(|a| a.substitute(map)).collect()),
            Expr::Hyper {
                kind,
                upper,
                lower,
                arg,
            } => Expr::Hyper {
                kind: *kind,
                upper: upper.clone(),
                lower: lower.clone(),
                arg: Box::new(arg.substitute(map)),
            },
            _ => self.clone(),
        }
    }
}

// ---------------------------------------------------------------- parsing

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b';' => Tok::Semi,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'"' => {
                let end = text[i + 1..].find('"').ok_or(Error::Syntax {
                    pos: i,
                    expected: "closing quote".into(),
                })?;
                let s = text[i + 1..i + 1 + end].to_string();
                i += end + 2;
                out.push((Tok::Str(s), start));
                continue;
            }
            c if c.is_ascii_digit() || c == b'.' => {
                let mut j = i;
                while j < b.len() && (b[j].is_ascii_digit() || b[j] == b'.') {
                    j += 1;
                }
                if j < b.len() && (b[j] == b'e' || b[j] == b'E') {
                    let mut k = j + 1;
                    if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
                        k += 1;
                    }
                    if k < b.len() && b[k].is_ascii_digit() {
                        while k < b.len() && b[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let q = numerics::parse_rational(&text[i..j]).map_err(|_| Error::Syntax {
                    pos: i,
                    expected: "number".into(),
                })?;
                i = j;
                out.push((Tok::Num(q), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_') {
                    j += 1;
                }
                let s = text[i..j].to_string();
                i = j;
                out.push((Tok::Ident(s), start));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: i,
                    expected: "token".into(),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    k: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.k].0
    }

    fn pos(&self) -> usize {
        self.toks[self.k].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.k].0.clone();
        if self.k + 1 < self.toks.len() {
            self.k += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            expected: expected.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(what)
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.term()?;
            acc = Expr::bin(op, acc, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.factor()?;
            acc = match (op, acc, rhs) {
                (BinOp::Div, Expr::Num(a), Expr::Num(b)) if b != 0 => Expr::Num(a / b),
                (op, a, b) => Expr::bin(op, a, b),
            };
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let e = self.factor()?;
            return Ok(match e {
                Expr::Num(q) => Expr::Num(-q),
                e => Expr::Neg(Box::new(e)),
            });
        }
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let e = self.factor()?;
            return Ok(Expr::bin(BinOp::Pow, base, e));
        }
        Ok(base)
    }

    fn signed_rational(&mut self) -> Result<Rational> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            if *self.peek() == Tok::Plus {
                self.bump();
            }
            false
        };
        let mut q = match self.bump() {
            Tok::Num(q) => q,
            _ => {
                self.k -= 1;
                return self.err("rational number");
            }
        };
        if *self.peek() == Tok::Slash {
            self.bump();
            match self.bump() {
                Tok::Num(d) if d != 0 => q /= d,
                _ => {
                    self.k -= 1;
                    return self.err("nonzero denominator");
                }
            }
        }
        Ok(if neg { -q } else { q })
    }

    fn rational_list(&mut self, end: Tok) -> Result<Vec<Rational>> {
        let mut v = Vec::new();
        if *self.peek() == end {
            self.bump();
            return Ok(v);
        }
        loop {
            v.push(self.signed_rational()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                t if *t == end => {
                    self.bump();
                    return Ok(v);
                }
                _ => return self.err("',' or ';'"),
            }
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(q) => Ok(Expr::Num(q)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() != Tok::LParen {
                    if let Some(c) = ConstKind::from_name(&name) {
                        return Ok(Expr::Const(c));
                    }
                    if Func::from_name(&name).is_some() || matches!(name.as_str(), "root" | "pfq" | "bracket") {
                        return self.err("'(' after function name");
                    }
                    return Ok(Expr::Param(name));
                }
                self.bump();
                match name.as_str() {
                    "root" => self.root_args(),
                    "pfq" | "bracket" => {
                        let kind = if name == "pfq" { HyperKind::Pfq } else { HyperKind::Bracket };
                        let upper = self.rational_list(Tok::Semi)?;
                        let lower = self.rational_list(Tok::Semi)?;
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(Expr::Hyper {
                            kind,
                            upper,
                            lower,
                            arg: Box::new(arg),
                        })
                    }
                    _ => {
                        if let Some(a) = OverrideAction::from_name(&name) {
                            let e = self.expr()?;
                            self.expect(Tok::RParen, "')'")?;
                            return Ok(Expr::Override(a, Box::new(e)));
                        }
                        let func = match Func::from_name(&name) {
                            Some(f) => f,
                            None => {
                                return Err(Error::Syntax {
                                    pos,
                                    expected: format!("known function (got {name})"),
                                })
                            }
                        };
                        let mut args = vec![self.expr()?];
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.expr()?);
                        }
                        self.expect(Tok::RParen, "')'")?;
                        if args.len() != func.arity() {
                            return Err(Error::Syntax {
                                pos,
                                expected: format!("{} argument(s) for {}", func.arity(), func.name()),
                            });
                        }
                        Ok(Expr::Call(func, args))
                    }
                }
            }
            _ => Err(Error::Syntax {
                pos,
                expected: "number, name or '('".into(),
            }),
        }
    }

    fn root_args(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let poly = match self.bump() {
            Tok::Str(s) => s,
            _ => {
                return Err(Error::Syntax {
                    pos,
                    expected: "quoted polynomial".into(),
                })
            }
        };
        IntPolynomial::parse(&poly).map_err(|_| Error::Syntax {
            pos,
            expected: "integer polynomial".into(),
        })?;
        self.expect(Tok::Comma, "','")?;
        let spos = self.pos();
        let kind = match self.bump() {
            Tok::Ident(s) => s,
            _ => {
                return Err(Error::Syntax {
                    pos: spos,
                    expected: "interval, rect or index".into(),
                })
            }
        };
        self.expect(Tok::LParen, "'('")?;
        let nums = self.rational_list(Tok::RParen)?;
        let text = format!(
            "{kind}({})",
            nums.iter()
                .map(|q| if *q.denom() == 1 { q.numer().to_string() } else { format!("{}/{}", q.numer(), q.denom()) })
                .collect::<Vec<_>>()
                .join(",")
        );
        let mut selector = RootSelector::parse(&text).map_err(|_| Error::Syntax {
            pos: spos,
            expected: "valid root selector".into(),
        })?;
        if *self.peek() == Tok::Comma {
            self.bump();
            match self.bump() {
                Tok::Num(q) if *q.denom() == 1 && *q.numer() >= 0 => {
                    selector.rank = q.numer().to_usize();
                }
                _ => {
                    self.k -= 1;
                    return self.err("rank");
                }
            }
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(Expr::Root {
            poly: poly.trim().to_string(),
            selector,
        })
    }
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser { toks: lex(text)?, k: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("end of expression");
    }
    Ok(e)
}

pub fn free_params(e: &Expr) -> BTreeSet<String> {
    e.free_params()
}

// -------------------------------------------------------------- evaluation

fn crumb(e: &Expr) -> String {
    let s = e.to_string();
    if s.chars().count() > 60 {
        let t: String = s.chars().take(57).collect();
        format!("{t}...")
    } else {
        s
    }
}

fn real_c(x: Float, ctx: &PrecisionContext) -> C {
    C::with_val(ctx.prec(), (x, 0))
}

fn is_integer_value(z: &C) -> Option<i64> {
    if z.imag().is_zero() && z.real().is_integer() {
        let v = z.real().to_f64();
        if v.abs() < 1e15 {
            return Some(v as i64);
        }
    }
    None
}

pub fn evaluate(e: &Expr, b: &Binding, ctx: &PrecisionContext) -> Result<C> {
    let v = eval_inner(e, b, ctx)?;
    Ok(numerics::canon(v))
}

fn eval_inner(e: &Expr, b: &Binding, ctx: &PrecisionContext) -> Result<C> {
    let prec = ctx.prec();
    match e {
        Expr::Num(q) => Ok(ctx.rational(q)),
        Expr::Const(c) => Ok(match c {
            ConstKind::I => ctx.i(),
            ConstKind::Pi => real_c(constant(ConstantTag::Pi, prec), ctx),
            ConstKind::E => real_c(constant(ConstantTag::EulerE, prec), ctx),
            ConstKind::Catalan => real_c(constant(ConstantTag::Catalan, prec), ctx),
            ConstKind::Zeta2 => real_c(constant(ConstantTag::Zeta2, prec), ctx),
            ConstKind::Zeta3 => real_c(constant(ConstantTag::Zeta3, prec), ctx),
            ConstKind::Ln2 => real_c(constant(ConstantTag::Ln2, prec), ctx),
        }),
        Expr::Param(p) => b
            .get(p)
            .map(|v| C::with_val(prec, v))
            .ok_or_else(|| Error::Unbound(p.clone())),
        Expr::Neg(x) => Ok(-eval_inner(x, b, ctx)?),
        Expr::Bin(op, x, y) => {
            let a = eval_inner(x, b, ctx)?;
            if *op == BinOp::Pow {
                if let Expr::Num(q) = y.as_ref() {
                    if *q.denom() == 1 {
                        if let Some(n) = q.numer().to_i64() {
                            return numerics::powi(&a, n).map_err(|er| er.at(&crumb(e)));
                        }
                    }
                }
                let w = eval_inner(y, b, ctx)?;
                if let Some(n) = is_integer_value(&w) {
                    return numerics::powi(&a, n).map_err(|er| er.at(&crumb(e)));
                }
                return numerics::pow(&a, &w).map_err(|er| er.at(&crumb(e)));
            }
            let c = eval_inner(y, b, ctx)?;
            Ok(match op {
                BinOp::Add => a + c,
                BinOp::Sub => a - c,
                BinOp::Mul => a * c,
                BinOp::Div => {
                    if numerics::is_zero(&c) {
                        return Err(Error::Pole("division by zero".into()).at(&crumb(e)));
                    }
                    a / c
                }
                BinOp::Pow => unreachable!(),
            })
        }
        Expr::Call(f, args) => {
            let vals: Vec<C> = args.iter().map(|a| eval_inner(a, b, ctx)).collect::<Result<_>>()?;
            call(*f, &vals, ctx).map_err(|er| er.at(&crumb(e)))
        }
        Expr::Root { poly, selector } => {
            algebra::select_root_text(poly, &selector.to_string(), ctx).map_err(|er| er.at(&crumb(e)))
        }
        Expr::Hyper {
            kind,
            upper,
            lower,
            arg,
        } => {
            let z = eval_inner(arg, b, ctx)?;
            let r = match kind {
                HyperKind::Pfq => hyper::eval_pfq(
                    &SeriesSpec {
                        upper: upper.clone(),
                        lower: lower.clone(),
                        argument: z,
                    },
                    ctx,
                ),
                HyperKind::Bracket => hyper::eval_bracket(
                    &BracketSpec {
                        upper: upper.clone(),
                        lower: lower.clone(),
                        ratio_argument: z,
                    },
                    &[],
                    ctx,
                ),
            };
            r.map_err(|er| er.at(&crumb(e)))
        }
        Expr::Override(action, inner) => match action {
            OverrideAction::Negate => Ok(-eval_inner(inner, b, ctx)?),
            OverrideAction::Conj => Ok(numerics::conj(&eval_inner(inner, b, ctx)?)),
            OverrideAction::CutBelow => match inner.as_ref() {
                Expr::Call(f, args) => {
                    let vals: Vec<C> = args
                        .iter()
                        .map(|a| eval_inner(a, b, ctx).map(|v| numerics::conj(&v)))
                        .collect::<Result<_>>()?;
                    let v = call(*f, &vals, ctx).map_err(|er| er.at(&crumb(e)))?;
                    Ok(numerics::conj(&v))
                }
                _ => Err(Error::Invalid("cut_below applies to a function call".into()).at(&crumb(e))),
            },
        },
    }
}

fn call(f: Func, v: &[C], ctx: &PrecisionContext) -> Result<C> {
    let prec = ctx.prec();
    let z = &v[0];
    let real_arg = |what: &str| -> Result<Float> {
        let tol = ctx.eps();
        if Float::with_val(prec, z.imag().abs_ref()) > tol {
            return Err(Error::Domain(format!("{what} needs a real argument")));
        }
        Ok(z.real().clone())
    };
    match f {
        Func::Li2 => polylog::li2(z, ctx),
        Func::Cl2 => Ok(real_c(polylog::cl2(&real_arg("Cl2")?, ctx)?, ctx)),
        Func::Ti2 => polylog::ti2(z, ctx),
        Func::Chi2 => polylog::chi2(z, ctx),
        Func::RogersL => polylog::rogers_l_c(z, ctx),
        Func::RogersLExt => polylog::rogers_l_ext_c(z, ctx),
        Func::BlochWigner => Ok(real_c(polylog::bloch_wigner(z, ctx)?, ctx)),
        Func::Ln => numerics::ln(z),
        Func::Sqrt => Ok(numerics::sqrt(z)),
        Func::Exp => numerics::exp(z),
        Func::Arctan => numerics::arctan(z),
        Func::Arccot => {
            if numerics::is_zero(z) {
                return Err(Error::Domain("arccot(0)".into()));
            }
            numerics::arctan(&(C::with_val(prec, 1) / z))
        }
        Func::Arcsin => numerics::arcsin(z),
        Func::Arccosh => numerics::arccosh(z),
        Func::Arctanh => numerics::arctanh(z),
        Func::Re => Ok(real_c(z.real().clone(), ctx)),
        Func::Im => Ok(real_c(z.imag().clone(), ctx)),
        Func::Arg => Ok(real_c(numerics::arg(z)?, ctx)),
        Func::Abs => Ok(real_c(numerics::abs(z), ctx)),
        Func::Conj => Ok(numerics::conj(z)),
        Func::Sin => numerics::sin(z),
        Func::Cos => numerics::cos(z),
        Func::Tan => numerics::tan(z),
        Func::Sec => {
            let c = numerics::cos(z)?;
            if numerics::is_zero(&c) {
                return Err(Error::Pole("sec at a pole".into()));
            }
            Ok(C::with_val(prec, 1) / c)
        }
        Func::Gamma => numerics::gamma(z, ctx),
        Func::Beta => numerics::beta(z, &v[1], ctx),
    }
}

/// Parses and evaluates in one step.
pub fn eval_str(text: &str, b: &Binding, ctx: &PrecisionContext) -> Result<C> {
    evaluate(&parse(text)?, b, ctx)
}
