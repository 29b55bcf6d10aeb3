//! S-expression text form of programs (assembler and disassembler).
//!
//! ```text
//! ; emit the first two input values, summed, then stop
//! (emit (+ (read input 0) (read input 1)))
//! (halt)
//! ```
//!
//! Several top-level statements form an implicit `seq`.

use std::fmt::Write as _;

use super::ast::{BinOp, Expr, Program, Stmt};
use super::MachineError;
use crate::nat::Nat;

#[derive(Clone, Debug, PartialEq)]
enum Sexp {
    Atom(String, usize),
    Bar(usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn line(&self) -> usize {
        match self {
            Sexp::Atom(_, l) | Sexp::Bar(l) | Sexp::List(_, l) => *l,
        }
    }
}

fn perr(line: usize, message: impl Into<String>) -> MachineError {
    MachineError::Parse { line, message: message.into() }
}

fn read_sexps(src: &str) -> Result<Vec<Sexp>, MachineError> {
    let mut stack: Vec<(Vec<Sexp>, usize)> = vec![(Vec::new(), 1)];
    let mut line = 1;
    let mut chars = src.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            c if c.is_whitespace() => {}
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '(' => stack.push((Vec::new(), line)),
            ')' => {
                let (items, start) = stack.pop().unwrap();
                let parent = stack.last_mut().ok_or_else(|| perr(line, "unbalanced ')'"))?;
                parent.0.push(Sexp::List(items, start));
            }
            '|' => stack.last_mut().unwrap().0.push(Sexp::Bar(line)),
            _ => {
                let mut atom = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' || n == '|' {
                        break;
                    }
                    atom.push(n);
                    chars.next();
                }
                stack.last_mut().unwrap().0.push(Sexp::Atom(atom, line));
            }
        }
    }
    if stack.len() != 1 {
        return Err(perr(stack.last().unwrap().1, "unclosed '('"));
    }
    Ok(stack.pop().unwrap().0)
}

pub fn parse_program(src: &str) -> Result<Program, MachineError> {
    let forms = read_sexps(src)?;
    let mut stmts = forms.iter().map(stmt).collect::<Result<Vec<_>, _>>()?;
    let body = if stmts.len() == 1 { stmts.pop().unwrap() } else { Stmt::Seq(stmts) };
    Ok(Program { body })
}

pub fn parse_expr(src: &str) -> Result<Expr, MachineError> {
    let forms = read_sexps(src)?;
    match forms.as_slice() {
        [one] => expr(one),
        _ => Err(perr(1, "expected exactly one expression")),
    }
}

const KEYWORDS: &[&str] = &["input", "list"];

fn is_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && !KEYWORDS.contains(&s)
}

fn head(items: &[Sexp]) -> Option<&str> {
    match items.first() {
        Some(Sexp::Atom(a, _)) => Some(a.as_str()),
        _ => None,
    }
}

fn stmt(s: &Sexp) -> Result<Stmt, MachineError> {
    let line = s.line();
    let Sexp::List(items, _) = s else {
        return Err(perr(line, "expected a statement form"));
    };
    let args = &items[1.min(items.len())..];
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(perr(line, format!("'{}' expects {n} arguments", head(items).unwrap_or("?"))))
        }
    };
    match head(items) {
        Some("seq") => Ok(Stmt::Seq(args.iter().map(stmt).collect::<Result<_, _>>()?)),
        Some("set") => {
            arity(2)?;
            match &args[0] {
                Sexp::Atom(name, _) if is_name(name) => Ok(Stmt::Set(name.clone(), expr(&args[1])?)),
                _ => Err(perr(line, "'set' needs a variable name")),
            }
        }
        Some("if") => {
            if args.len() != 2 && args.len() != 3 {
                return Err(perr(line, "'if' expects a condition and one or two branches"));
            }
            let other = match args.get(2) {
                Some(e) => stmt(e)?,
                None => Stmt::Seq(Vec::new()),
            };
            Ok(Stmt::If(expr(&args[0])?, Box::new(stmt(&args[1])?), Box::new(other)))
        }
        Some("while") => {
            arity(2)?;
            Ok(Stmt::While(expr(&args[0])?, Box::new(stmt(&args[1])?)))
        }
        Some("emit") => {
            arity(1)?;
            Ok(Stmt::Emit(expr(&args[0])?))
        }
        Some("halt") => match args {
            [] => Ok(Stmt::Halt(None)),
            [e] => Ok(Stmt::Halt(Some(expr(e)?))),
            _ => Err(perr(line, "'halt' expects at most one argument")),
        },
        Some("ask") => {
            arity(1)?;
            Ok(Stmt::Ask(expr(&args[0])?))
        }
        Some("with-input") => {
            arity(2)?;
            Ok(Stmt::WithInput(expr(&args[0])?, Box::new(stmt(&args[1])?)))
        }
        Some(other) => Err(perr(line, format!("unknown statement '{other}'"))),
        None => Err(perr(line, "empty statement")),
    }
}

fn numeral(a: &str, line: usize) -> Result<Nat, MachineError> {
    a.parse::<Nat>().map_err(|_| perr(line, format!("bad numeral '{a}'")))
}

fn expr(s: &Sexp) -> Result<Expr, MachineError> {
    let line = s.line();
    match s {
        Sexp::Bar(_) => Err(perr(line, "unexpected '|'")),
        Sexp::Atom(a, _) => {
            if a.starts_with(|c: char| c.is_ascii_digit()) {
                Ok(Expr::Num(numeral(a, line)?))
            } else if a == "input" {
                Ok(Expr::Input)
            } else if is_name(a) {
                Ok(Expr::Var(a.clone()))
            } else {
                Err(perr(line, format!("bad atom '{a}'")))
            }
        }
        Sexp::List(items, _) => {
            let name = head(items).ok_or_else(|| perr(line, "expected an operator"))?;
            let args = &items[1..];
            if name == "lit" {
                return literal(args, line);
            }
            let sub = args.iter().map(expr).collect::<Result<Vec<_>, _>>()?;
            let want = |n: usize| {
                if sub.len() == n {
                    Ok(())
                } else {
                    Err(perr(line, format!("'{name}' expects {n} arguments")))
                }
            };
            let mut it = sub.clone().into_iter().map(Box::new);
            let mut next = || it.next().unwrap();
            if let Some(op) = BinOp::from_symbol(name) {
                want(2)?;
                let a = next();
                return Ok(Expr::Bin(op, a, next()));
            }
            let e = match name {
                "not" => {
                    want(1)?;
                    Expr::Not(next())
                }
                "read" => {
                    want(2)?;
                    let s = next();
                    Expr::Read(s, next())
                }
                "scan" => {
                    want(3)?;
                    let s = next();
                    let v = next();
                    Expr::Scan(s, v, next())
                }
                "iota" => {
                    want(1)?;
                    Expr::Iota(next())
                }
                "pair" => {
                    want(2)?;
                    let a = next();
                    Expr::Pair(a, next())
                }
                "left" => {
                    want(1)?;
                    Expr::Left(next())
                }
                "right" => {
                    want(1)?;
                    Expr::Right(next())
                }
                "arity" => {
                    want(1)?;
                    Expr::Arity(next())
                }
                "tape" => {
                    want(2)?;
                    let s = next();
                    Expr::Tape(s, next())
                }
                "rehead" => {
                    want(2)?;
                    let s = next();
                    Expr::Rehead(s, next())
                }
                "apply" => {
                    want(1)?;
                    Expr::Apply(next())
                }
                "probe" => {
                    want(1)?;
                    Expr::Probe(next())
                }
                "smn" => {
                    want(3)?;
                    let c = next();
                    let s = next();
                    Expr::Smn(c, s, next())
                }
                "list" => {
                    want(0)?;
                    Expr::List
                }
                "push" => {
                    want(2)?;
                    let l = next();
                    Expr::Push(l, next())
                }
                "nth" => {
                    want(2)?;
                    let l = next();
                    Expr::Nth(l, next())
                }
                "len" => {
                    want(1)?;
                    Expr::Len(next())
                }
                other => return Err(perr(line, format!("unknown operator '{other}'"))),
            };
            Ok(e)
        }
    }
}

fn literal(args: &[Sexp], line: usize) -> Result<Expr, MachineError> {
    let mut prefix = Vec::new();
    let mut tail = None;
    let mut after_bar = false;
    for a in args {
        match a {
            Sexp::Bar(_) if !after_bar => after_bar = true,
            Sexp::Atom(v, l) if !after_bar => prefix.push(numeral(v, *l)?),
            Sexp::Atom(v, l) if tail.is_none() => tail = Some(numeral(v, *l)?),
            _ => return Err(perr(line, "malformed literal, expected (lit v ... | tail)")),
        }
    }
    if after_bar && tail.is_none() {
        return Err(perr(line, "literal is missing its tail value"));
    }
    Ok(Expr::Lit(prefix, tail.unwrap_or(Nat::ZERO)))
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    print_stmt(&mut out, &p.body, 0);
    out.push('\n');
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    let block = |out: &mut String, head: String, body: &[&Stmt]| {
        out.push('(');
        out.push_str(&head);
        for b in body {
            out.push('\n');
            print_stmt(out, b, depth + 1);
        }
        out.push(')');
    };
    match s {
        Stmt::Seq(items) => block(out, "seq".into(), &items.iter().collect::<Vec<_>>()),
        Stmt::Set(n, e) => {
            let _ = write!(out, "(set {n} {})", show(e));
        }
        Stmt::If(c, a, b) => {
            let mut branches = vec![a.as_ref()];
            if !matches!(b.as_ref(), Stmt::Seq(v) if v.is_empty()) {
                branches.push(b.as_ref());
            }
            block(out, format!("if {}", show(c)), &branches)
        }
        Stmt::While(c, body) => block(out, format!("while {}", show(c)), &[body.as_ref()]),
        Stmt::Emit(e) => {
            let _ = write!(out, "(emit {})", show(e));
        }
        Stmt::Halt(None) => out.push_str("(halt)"),
        Stmt::Halt(Some(e)) => {
            let _ = write!(out, "(halt {})", show(e));
        }
        Stmt::Ask(e) => {
            let _ = write!(out, "(ask {})", show(e));
        }
        Stmt::WithInput(e, body) => block(out, format!("with-input {}", show(e)), &[body.as_ref()]),
    }
}

pub fn show(e: &Expr) -> String {
    let call = |name: &str, args: &[&Expr]| {
        let mut s = format!("({name}");
        for a in args {
            s.push(' ');
            s.push_str(&show(a));
        }
        s.push(')');
        s
    };
    match e {
        Expr::Num(n) => n.to_string(),
        Expr::Var(v) => v.clone(),
        Expr::Input => "input".into(),
        Expr::Bin(op, a, b) => call(op.symbol(), &[a, b]),
        Expr::Not(a) => call("not", &[a]),
        Expr::Read(s, i) => call("read", &[s, i]),
        Expr::Scan(s, v, l) => call("scan", &[s, v, l]),
        Expr::Iota(n) => call("iota", &[n]),
        Expr::Lit(prefix, tail) => {
            let mut s = String::from("(lit");
            for v in prefix {
                let _ = write!(s, " {v}");
            }
            let _ = write!(s, " | {tail})");
            s
        }
        Expr::Pair(a, b) => call("pair", &[a, b]),
        Expr::Left(a) => call("left", &[a]),
        Expr::Right(a) => call("right", &[a]),
        Expr::Arity(a) => call("arity", &[a]),
        Expr::Tape(s, j) => call("tape", &[s, j]),
        Expr::Rehead(s, c) => call("rehead", &[s, c]),
        Expr::Apply(s) => call("apply", &[s]),
        Expr::Probe(s) => call("probe", &[s]),
        Expr::Smn(c, s, l) => call("smn", &[c, s, l]),
        Expr::List => "(list)".into(),
        Expr::Push(l, v) => call("push", &[l, v]),
        Expr::Nth(l, i) => call("nth", &[l, i]),
        Expr::Len(l) => call("len", &[l]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints_canonically() {
        let src = "
            ; comment
            (set i 0)
            (while (< i 3)
              (seq (emit (read input i)) (set i (+ i 1))))
            (if (= i 3) (halt (lit 4 5 | 6)))
            (ask (pair (iota 1) input))";
        let p = parse_program(src).unwrap();
        let text = print_program(&p);
        assert_eq!(parse_program(&text).unwrap(), p);
        assert!(text.contains("(lit 4 5 | 6)"));
    }

    #[test]
    fn literal_forms() {
        assert_eq!(parse_expr("(lit 1 2)").unwrap(), Expr::Lit(vec![Nat::ONE, Nat::from(2u64)], Nat::ZERO));
        assert_eq!(parse_expr("(lit | 7)").unwrap(), Expr::Lit(vec![], Nat::from(7u64)));
        assert!(parse_expr("(lit 1 |)").is_err());
    }

    #[test]
    fn errors_carry_lines() {
        match parse_program("(emit 1)\n(frobnicate 2)") {
            Err(MachineError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_program("(emit 1").is_err());
        assert!(parse_program("(emit 1))").is_err());
        assert!(parse_program("(set input 3)").is_err());
        assert!(parse_program("(emit (read input))").is_err());
    }
}
