//! Abstract syntax of the program language.
//!
//! Values are naturals, streams and lists. A program is one statement run
//! against an input stream; it produces output by `emit`ting values and
//! finishing with `halt` or `ask`, whose argument becomes the rest of the
//! output. `ask` is the oracle-request effect: a plain run treats it like
//! `halt`, the diamond interpreter treats it as a question.

use crate::nat::Nat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Lt,
    Le,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 10] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Mod,
        BinOp::Eq,
        BinOp::Lt,
        BinOp::Le,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        BinOp::ALL.into_iter().find(|op| op.symbol() == s)
    }

    pub fn tag(self) -> u8 {
        BinOp::ALL.iter().position(|op| *op == self).unwrap() as u8
    }

    pub fn from_tag(t: u8) -> Option<BinOp> {
        BinOp::ALL.get(t as usize).copied()
    }

    pub fn eval(self, a: &Nat, b: &Nat) -> Nat {
        let truth = |c: bool| if c { Nat::ONE } else { Nat::ZERO };
        match self {
            BinOp::Add => a.add(b),
            BinOp::Sub => a.monus(b),
            BinOp::Mul => a.mul(b),
            BinOp::Div => a.div(b),
            BinOp::Mod => a.rem(b),
            BinOp::Eq => truth(a == b),
            BinOp::Lt => truth(a < b),
            BinOp::Le => truth(a <= b),
            BinOp::And => truth(!a.is_zero() && !b.is_zero()),
            BinOp::Or => truth(!a.is_zero() || !b.is_zero()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Nat),
    Var(String),
    Input,
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    /// `(read s i)`: position `i` of stream `s`.
    Read(Box<Expr>, Box<Expr>),
    /// `(scan s v limit)`: first position below `limit` holding `v`, else `limit`.
    Scan(Box<Expr>, Box<Expr>, Box<Expr>),
    Iota(Box<Expr>),
    /// Stream literal: prefix then a constant tail.
    Lit(Vec<Nat>, Nat),
    Pair(Box<Expr>, Box<Expr>),
    Left(Box<Expr>),
    Right(Box<Expr>),
    Arity(Box<Expr>),
    /// `(tape s j)`: component `j` of a structural tuple.
    Tape(Box<Expr>, Box<Expr>),
    Rehead(Box<Expr>, Box<Expr>),
    /// The universal functional on a stream, as a lazy stream.
    Apply(Box<Expr>),
    /// Runs the universal functional to completion: 1 if it ended in `ask`.
    Probe(Box<Expr>),
    /// `(smn c s len)`: code of `c` specialized to the first `len` values of `s`.
    Smn(Box<Expr>, Box<Expr>, Box<Expr>),
    List,
    Push(Box<Expr>, Box<Expr>),
    Nth(Box<Expr>, Box<Expr>),
    Len(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Seq(Vec<Stmt>),
    Set(String, Expr),
    If(Expr, Box<Stmt>, Box<Stmt>),
    While(Expr, Box<Stmt>),
    Emit(Expr),
    Halt(Option<Expr>),
    Ask(Expr),
    /// Runs the body with `input` rebound to the given stream.
    WithInput(Expr, Box<Stmt>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Program {
    pub body: Stmt,
}

impl Program {
    pub fn new(body: Stmt) -> Self {
        Program { body }
    }
}
