//! Structural serialization of programs to natural numbers.
//!
//! The byte layout is a magic byte, a version byte and a pre-order walk of
//! the syntax tree (one tag byte per node, LEB128 lengths, big-endian
//! magnitudes for numerals). Read as a big-endian number this gives the
//! program's code. Decoding re-encodes and compares, so every program has
//! exactly one code and malformed numbers are rejected.

use std::fmt;

use super::ast::{BinOp, Expr, Program, Stmt};
use super::MachineError;
use crate::nat::Nat;

const MAGIC: u8 = 0x57;
const VERSION: u8 = 1;

/// The Gödel number of a program.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Code(pub Nat);

impl Code {
    pub fn nat(&self) -> &Nat {
        &self.0
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0.to_string();
        if s.len() > 24 {
            write!(f, "Code({}…{} digits)", &s[..12], s.len())
        } else {
            write!(f, "Code({s})")
        }
    }
}

mod tag {
    pub const SEQ: u8 = 0x10;
    pub const SET: u8 = 0x11;
    pub const IF: u8 = 0x12;
    pub const WHILE: u8 = 0x13;
    pub const EMIT: u8 = 0x14;
    pub const HALT: u8 = 0x15;
    pub const HALT_WITH: u8 = 0x16;
    pub const ASK: u8 = 0x17;
    pub const WITH_INPUT: u8 = 0x18;

    pub const NUM: u8 = 0x20;
    pub const VAR: u8 = 0x21;
    pub const INPUT: u8 = 0x22;
    pub const BIN: u8 = 0x23;
    pub const NOT: u8 = 0x24;
    pub const READ: u8 = 0x25;
    pub const SCAN: u8 = 0x26;
    pub const IOTA: u8 = 0x27;
    pub const LIT: u8 = 0x28;
    pub const PAIR: u8 = 0x29;
    pub const LEFT: u8 = 0x2a;
    pub const RIGHT: u8 = 0x2b;
    pub const ARITY: u8 = 0x2c;
    pub const TAPE: u8 = 0x2d;
    pub const REHEAD: u8 = 0x2e;
    pub const APPLY: u8 = 0x2f;
    pub const PROBE: u8 = 0x30;
    pub const SMN: u8 = 0x31;
    pub const LIST: u8 = 0x32;
    pub const PUSH: u8 = 0x33;
    pub const NTH: u8 = 0x34;
    pub const LEN: u8 = 0x35;
}

pub fn encode_bytes(p: &Program) -> Vec<u8> {
    let mut out = vec![MAGIC, VERSION];
    write_stmt(&mut out, &p.body);
    out
}

pub fn encode(p: &Program) -> Code {
    Code(Nat::from_bytes_be(&encode_bytes(p)))
}

pub fn decode(c: &Code) -> Result<Program, MachineError> {
    let bytes = c.0.to_bytes_be();
    let bad = |msg: &str| MachineError::Decode(msg.to_string());
    if bytes.len() < 2 || bytes[0] != MAGIC || bytes[1] != VERSION {
        return Err(bad("not a program code"));
    }
    let mut r = Reader { bytes: &bytes, pos: 2 };
    let body = r.stmt(0)?;
    if r.pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    let p = Program { body };
    if encode_bytes(&p) != bytes {
        return Err(bad("non-canonical encoding"));
    }
    Ok(p)
}

fn write_len(out: &mut Vec<u8>, mut n: usize) {
    loop {
        let byte = (n & 0x7f) as u8;
        n >>= 7;
        if n == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn write_nat(out: &mut Vec<u8>, n: &Nat) {
    let b = n.to_bytes_be();
    write_len(out, b.len());
    out.extend_from_slice(&b);
}

fn write_name(out: &mut Vec<u8>, s: &str) {
    write_len(out, s.len());
    out.extend_from_slice(s.as_bytes());
}

fn write_stmt(out: &mut Vec<u8>, s: &Stmt) {
    match s {
        Stmt::Seq(items) => {
            out.push(tag::SEQ);
            write_len(out, items.len());
            for i in items {
                write_stmt(out, i);
            }
        }
        Stmt::Set(name, e) => {
            out.push(tag::SET);
            write_name(out, name);
            write_expr(out, e);
        }
        Stmt::If(c, a, b) => {
            out.push(tag::IF);
            write_expr(out, c);
            write_stmt(out, a);
            write_stmt(out, b);
        }
        Stmt::While(c, body) => {
            out.push(tag::WHILE);
            write_expr(out, c);
            write_stmt(out, body);
        }
        Stmt::Emit(e) => {
            out.push(tag::EMIT);
            write_expr(out, e);
        }
        Stmt::Halt(None) => out.push(tag::HALT),
        Stmt::Halt(Some(e)) => {
            out.push(tag::HALT_WITH);
            write_expr(out, e);
        }
        Stmt::Ask(e) => {
            out.push(tag::ASK);
            write_expr(out, e);
        }
        Stmt::WithInput(e, body) => {
            out.push(tag::WITH_INPUT);
            write_expr(out, e);
            write_stmt(out, body);
        }
    }
}

fn write_expr(out: &mut Vec<u8>, e: &Expr) {
    let sub = |out: &mut Vec<u8>, t: u8, args: &[&Expr]| {
        out.push(t);
        for a in args {
            write_expr(out, a);
        }
    };
    match e {
        Expr::Num(n) => {
            out.push(tag::NUM);
            write_nat(out, n);
        }
        Expr::Var(name) => {
            out.push(tag::VAR);
            write_name(out, name);
        }
        Expr::Input => out.push(tag::INPUT),
        Expr::Bin(op, a, b) => {
            out.push(tag::BIN);
            out.push(op.tag());
            write_expr(out, a);
            write_expr(out, b);
        }
        Expr::Not(a) => sub(out, tag::NOT, &[a]),
        Expr::Read(s, i) => sub(out, tag::READ, &[s, i]),
        Expr::Scan(s, v, l) => sub(out, tag::SCAN, &[s, v, l]),
        Expr::Iota(n) => sub(out, tag::IOTA, &[n]),
        Expr::Lit(prefix, tail) => {
            out.push(tag::LIT);
            write_len(out, prefix.len());
            for v in prefix {
                write_nat(out, v);
            }
            write_nat(out, tail);
        }
        Expr::Pair(a, b) => sub(out, tag::PAIR, &[a, b]),
        Expr::Left(a) => sub(out, tag::LEFT, &[a]),
        Expr::Right(a) => sub(out, tag::RIGHT, &[a]),
        Expr::Arity(a) => sub(out, tag::ARITY, &[a]),
        Expr::Tape(s, j) => sub(out, tag::TAPE, &[s, j]),
        Expr::Rehead(s, c) => sub(out, tag::REHEAD, &[s, c]),
        Expr::Apply(s) => sub(out, tag::APPLY, &[s]),
        Expr::Probe(s) => sub(out, tag::PROBE, &[s]),
        Expr::Smn(c, s, l) => sub(out, tag::SMN, &[c, s, l]),
        Expr::List => out.push(tag::LIST),
        Expr::Push(l, v) => sub(out, tag::PUSH, &[l, v]),
        Expr::Nth(l, i) => sub(out, tag::NTH, &[l, i]),
        Expr::Len(l) => sub(out, tag::LEN, &[l]),
    }
}

// Deeply nested input is rejected rather than risking the native stack.
const MAX_DEPTH: usize = 2000;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn err(&self, msg: &str) -> MachineError {
        MachineError::Decode(format!("{msg} at byte {}", self.pos))
    }

    fn byte(&mut self) -> Result<u8, MachineError> {
        let b = *self.bytes.get(self.pos).ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        Ok(b)
    }

    fn len(&mut self) -> Result<usize, MachineError> {
        let mut n: usize = 0;
        let mut shift = 0;
        loop {
            let b = self.byte()?;
            if shift >= 63 {
                return Err(self.err("length overflow"));
            }
            n |= ((b & 0x7f) as usize) << shift;
            if b & 0x80 == 0 {
                return Ok(n);
            }
            shift += 7;
        }
    }

    fn raw(&mut self, n: usize) -> Result<&[u8], MachineError> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err("truncated field"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn nat(&mut self) -> Result<Nat, MachineError> {
        let n = self.len()?;
        Ok(Nat::from_bytes_be(self.raw(n)?))
    }

    fn name(&mut self) -> Result<String, MachineError> {
        let n = self.len()?;
        let raw = self.raw(n)?.to_vec();
        String::from_utf8(raw).map_err(|_| self.err("bad name"))
    }

    fn stmt(&mut self, depth: usize) -> Result<Stmt, MachineError> {
        if depth > MAX_DEPTH {
            return Err(self.err("nesting too deep"));
        }
        let d = depth + 1;
        Ok(match self.byte()? {
            tag::SEQ => {
                let n = self.len()?;
                let mut items = Vec::new();
                for _ in 0..n {
                    items.push(self.stmt(d)?);
                }
                Stmt::Seq(items)
            }
            tag::SET => {
                let name = self.name()?;
                Stmt::Set(name, self.expr(d)?)
            }
            tag::IF => {
                let c = self.expr(d)?;
                let a = self.stmt(d)?;
                Stmt::If(c, Box::new(a), Box::new(self.stmt(d)?))
            }
            tag::WHILE => {
                let c = self.expr(d)?;
                Stmt::While(c, Box::new(self.stmt(d)?))
            }
            tag::EMIT => Stmt::Emit(self.expr(d)?),
            tag::HALT => Stmt::Halt(None),
            tag::HALT_WITH => Stmt::Halt(Some(self.expr(d)?)),
            tag::ASK => Stmt::Ask(self.expr(d)?),
            tag::WITH_INPUT => {
                let e = self.expr(d)?;
                Stmt::WithInput(e, Box::new(self.stmt(d)?))
            }
            _ => return Err(self.err("unknown statement tag")),
        })
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, MachineError> {
        if depth > MAX_DEPTH {
            return Err(self.err("nesting too deep"));
        }
        let d = depth + 1;
        let one = |r: &mut Self| r.expr(d).map(Box::new);
        Ok(match self.byte()? {
            tag::NUM => Expr::Num(self.nat()?),
            tag::VAR => Expr::Var(self.name()?),
            tag::INPUT => Expr::Input,
            tag::BIN => {
                let t = self.byte()?;
                let op = BinOp::from_tag(t).ok_or_else(|| self.err("unknown operator"))?;
                let a = one(self)?;
                Expr::Bin(op, a, one(self)?)
            }
            tag::NOT => Expr::Not(one(self)?),
            tag::READ => {
                let s = one(self)?;
                Expr::Read(s, one(self)?)
            }
            tag::SCAN => {
                let s = one(self)?;
                let v = one(self)?;
                Expr::Scan(s, v, one(self)?)
            }
            tag::IOTA => Expr::Iota(one(self)?),
            tag::LIT => {
                let n = self.len()?;
                let mut prefix = Vec::new();
                for _ in 0..n {
                    prefix.push(self.nat()?);
                }
                Expr::Lit(prefix, self.nat()?)
            }
            tag::PAIR => {
                let a = one(self)?;
                Expr::Pair(a, one(self)?)
            }
            tag::LEFT => Expr::Left(one(self)?),
            tag::RIGHT => Expr::Right(one(self)?),
            tag::ARITY => Expr::Arity(one(self)?),
            tag::TAPE => {
                let s = one(self)?;
                Expr::Tape(s, one(self)?)
            }
            tag::REHEAD => {
                let s = one(self)?;
                Expr::Rehead(s, one(self)?)
            }
            tag::APPLY => Expr::Apply(one(self)?),
            tag::PROBE => Expr::Probe(one(self)?),
            tag::SMN => {
                let c = one(self)?;
                let s = one(self)?;
                Expr::Smn(c, s, one(self)?)
            }
            tag::LIST => Expr::List,
            tag::PUSH => {
                let l = one(self)?;
                Expr::Push(l, one(self)?)
            }
            tag::NTH => {
                let l = one(self)?;
                Expr::Nth(l, one(self)?)
            }
            tag::LEN => Expr::Len(one(self)?),
            _ => return Err(self.err("unknown expression tag")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_numbers_are_not_codes() {
        for m in 0u64..600 {
            assert!(decode(&Code(Nat::from(m))).is_err(), "{m}");
        }
    }

    #[test]
    fn encode_decode_identity() {
        let p = Program::new(Stmt::Seq(vec![
            Stmt::Set("x".into(), Expr::Num(Nat::from(300u64))),
            Stmt::Emit(Expr::Bin(BinOp::Add, Box::new(Expr::Var("x".into())), Box::new(Expr::Num(Nat::ONE)))),
            Stmt::Halt(Some(Expr::Lit(vec![Nat::from(1u64)], Nat::ZERO))),
        ]));
        let c = encode(&p);
        assert_eq!(decode(&c).unwrap(), p);
    }

    #[test]
    fn non_canonical_numerals_are_rejected() {
        let p = Program::new(Stmt::Emit(Expr::Num(Nat::from(5u64))));
        let mut bytes = encode_bytes(&p);
        // rewrite the numeral 5 as [0x00, 0x05]
        let n = bytes.len();
        bytes.truncate(n - 2);
        bytes.extend_from_slice(&[2, 0, 5]);
        assert!(decode(&Code(Nat::from_bytes_be(&bytes))).is_err());
    }
}
