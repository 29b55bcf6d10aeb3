//! The program language, the universal functional, specialization and the
//! recursion-theorem fixed point.
//!
//! The universal functional reads the program number at position 0 of its
//! input (the first value of the innermost component of a left-nested
//! tuple), decodes it and runs the program on the whole input. With several
//! tapes `d1, ..., dr` it runs on `(d1(0), d1, ..., dr)`.

pub mod ast;
pub mod code;
pub mod dsl;
pub mod vm;

use std::sync::OnceLock;

pub use ast::{BinOp, Expr, Program, Stmt};
pub use code::Code;

use crate::baire::{self, FiniteWord, Prefix, Stream, StreamError};
use crate::nat::Nat;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("not a program code: {0}")]
    Decode(String),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// Result of running a program under a fuel budget.
#[derive(Clone, Debug)]
pub enum Outcome {
    /// The run is productive; positions appear as far as the budget reaches.
    Output(Stream),
    /// Nothing was produced within the budget.
    Timeout(FiniteWord),
    /// Malformed input shape or an undecodable program.
    Stuck(String),
}

impl Outcome {
    fn from_stream(s: Stream) -> Outcome {
        match s.get(0) {
            Ok(_) => Outcome::Output(s),
            Err(StreamError::Timeout) => Outcome::Timeout(FiniteWord::default()),
            Err(StreamError::Stuck(r)) => Outcome::Stuck(r.to_string()),
        }
    }

    pub fn stream(&self) -> Option<&Stream> {
        match self {
            Outcome::Output(s) => Some(s),
            _ => None,
        }
    }

    pub fn take(&self, len: usize) -> Prefix {
        match self {
            Outcome::Output(s) => s.take(len),
            Outcome::Timeout(w) => Prefix { values: w.clone(), error: Some(StreamError::Timeout) },
            Outcome::Stuck(r) => Prefix { values: FiniteWord::default(), error: Some(StreamError::stuck(r.clone())) },
        }
    }

    pub fn is_timeout(&self) -> bool {
        matches!(self, Outcome::Timeout(_))
    }

    pub fn is_stuck(&self) -> bool {
        matches!(self, Outcome::Stuck(_))
    }
}

impl Program {
    pub fn code(&self) -> Code {
        code::encode(self)
    }

    pub fn from_code(c: &Code) -> Result<Program, MachineError> {
        code::decode(c)
    }

    pub fn parse(src: &str) -> Result<Program, MachineError> {
        dsl::parse_program(src)
    }

    pub fn to_text(&self) -> String {
        dsl::print_program(self)
    }
}

/// Parses DSL text straight to a code. Panics on malformed text, so only
/// use it for program text that ships with the crate.
pub fn assemble(src: &str) -> Code {
    match Program::parse(src) {
        Ok(p) => p.code(),
        Err(e) => panic!("built-in program failed to assemble: {e}\n{src}"),
    }
}

pub fn disassemble(c: &Code) -> Result<String, MachineError> {
    Ok(Program::from_code(c)?.to_text())
}

/// Runs `prog` on `input` for at most `fuel` steps.
pub fn run(prog: &Program, input: Stream, fuel: u64) -> Outcome {
    let compiled = std::sync::Arc::new(vm::Compiled::compile(prog));
    Outcome::from_stream(vm::run_stream(compiled, input, fuel))
}

/// The universal functional on a single tape.
pub fn phi(z: &Stream, fuel: u64) -> Outcome {
    Outcome::from_stream(vm::phi_stream(z, fuel))
}

/// The universal functional's output as a lazy stream, without forcing it.
pub fn phi_stream(z: &Stream, fuel: u64) -> Stream {
    vm::phi_stream(z, fuel)
}

/// `(d1(0), d1, d2, ..., dr)`: the single-tape view of several tapes.
pub fn multi_tape(tapes: &[Stream]) -> Result<Stream, StreamError> {
    let (first, _) = tapes.split_first().ok_or_else(|| StreamError::stuck("no tapes"))?;
    let head = first.get(0)?;
    Ok(baire::encode_tuple(head, tapes))
}

pub fn phi_multi(tapes: &[Stream], fuel: u64) -> Outcome {
    match multi_tape(tapes) {
        Ok(z) => phi(&z, fuel),
        Err(StreamError::Timeout) => Outcome::Timeout(FiniteWord::default()),
        Err(StreamError::Stuck(r)) => Outcome::Stuck(r.to_string()),
    }
}

/// `Φ(c, x)`: program `c` applied to one argument stream.
pub fn call(c: &Code, x: Stream, fuel: u64) -> Stream {
    vm::phi_stream(&baire::pair(baire::iota(c.0.clone()), x), fuel)
}

/// `Φ(e, y)` where `e` is a stream naming a program by its head.
pub fn call_with(e: &Stream, y: Stream, fuel: u64) -> Stream {
    vm::phi_stream(&baire::pair(e.clone(), y), fuel)
}

/// How a complete run of the universal functional ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Asked,
    Halted,
}

/// Runs the universal functional on `z` to the end and reports whether it
/// finished with an oracle request.
pub fn probe(z: &Stream, fuel: u64) -> Result<Control, StreamError> {
    let mut m = vm::Machine::for_phi(z, fuel)?;
    let (asked, _) = m.run_to_end()?;
    Ok(if asked { Control::Asked } else { Control::Halted })
}

/// The program that runs `c` on `pair([frozen | 0], x)` for input `x`.
pub fn specialize(c: &Code, frozen: &[Nat]) -> Result<Code, MachineError> {
    let inner = Program::from_code(c)?;
    let rebound = Expr::Pair(Box::new(Expr::Lit(frozen.to_vec(), Nat::ZERO)), Box::new(Expr::Input));
    Ok(Program::new(Stmt::WithInput(rebound, Box::new(inner.body))).code())
}

/// s-m-n: freezes the first `prefix_len` values of `frozen` into `c`.
pub fn smn(c: &Code, frozen: &Stream, prefix_len: usize) -> Result<Code, MachineError> {
    let values = frozen.prefix(prefix_len)?;
    specialize(c, values.values())
}

// On input `pair([u | 0], z)`: let c = Φ_u(u) and continue as Φ on z with
// its program number replaced by c.
const DIAGONAL_SRC: &str = "
(set u (read (left input) 0))
(set c (read (apply (pair (iota u) (iota u))) 0))
(halt (apply (rehead (right input) c)))";

fn diagonal() -> &'static Code {
    static CODE: OnceLock<Code> = OnceLock::new();
    CODE.get_or_init(|| assemble(DIAGONAL_SRC))
}

/// Applies a code transformer program: `f` reads `m` from `Φ(f, iota(m))`
/// and answers with `iota(f(m))`.
pub fn transform(f: &Code, m: &Code, fuel: u64) -> Result<Code, StreamError> {
    Ok(Code(call(f, baire::iota(m.0.clone()), fuel).get(0)?))
}

/// A transformer sending `m` to `specialize(template, [m])`.
pub fn specializing_transformer(template: &Code) -> Code {
    assemble(&format!("(halt (iota (smn {template} (iota (read (right input) 0)) 1)))"))
}

/// Kleene's construction: a code `n` with `Φ_n ≅ Φ_{f(n)}`, uniformly in
/// the remaining input.
///
/// With `s(u) = specialize(diagonal, [u])` and `g(w) = f(s(w))` computed by
/// the program `v`, the answer is `n = s(v)`: running `n` computes
/// `Φ_v(v) = f(s(v)) = f(n)` and continues as that program.
pub fn fixed_point(f: &Code) -> Code {
    let w = diagonal();
    let g = assemble(&format!(
        "(set w (read (right input) 0))
         (set s (smn {w} (iota w) 1))
         (halt (iota (read (apply (pair (iota {f}) (iota s))) 0)))"
    ));
    specialize(w, &[g.0]).expect("diagonal program decodes")
}

/// Parses `[a b c | d]` (constant tail), `[a b c]` (zero tail) or
/// `[a b c | prog:<code>]` (tail produced by the universal functional on
/// `iota(code)`).
pub fn parse_stream_literal(text: &str, fuel: u64) -> Result<Stream, MachineError> {
    let bad = |m: &str| MachineError::Parse { line: 1, message: format!("{m}: {text}") };
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| bad("stream literal must be bracketed"))?;
    let (prefix_part, tail_part) = match inner.split_once('|') {
        Some((p, t)) => (p, Some(t.trim())),
        None => (inner, None),
    };
    let prefix = prefix_part
        .split_whitespace()
        .map(|v| v.parse::<Nat>().map_err(|_| bad("bad value")))
        .collect::<Result<Vec<_>, _>>()?;
    match tail_part {
        None => Ok(Stream::literal(prefix, Nat::ZERO)),
        Some(t) => match t.strip_prefix("prog:") {
            Some(c) => {
                let code = c.trim().parse::<Nat>().map_err(|_| bad("bad program code"))?;
                Ok(Stream::prefixed(prefix, phi_stream(&baire::iota(code), fuel)))
            }
            None => Ok(Stream::literal(prefix, t.parse::<Nat>().map_err(|_| bad("bad tail"))?)),
        },
    }
}
