//! Bytecode compiler and small-step evaluator.
//!
//! Every executed instruction costs one unit of fuel; `scan` additionally
//! pays one unit per position it reads and `probe` pays for the steps of the
//! run it drives. `apply` hands its lazy result the caller's remaining fuel
//! as a separate budget, so the values a run produces never depend on how
//! much fuel it was given, only how many of them appear.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::ast::{BinOp, Expr, Program, Stmt};
use super::code::{self, Code};
use super::MachineError;
use crate::baire::{self, Produced, Producer, Stream, StreamError};
use crate::nat::Nat;

#[derive(Clone, Debug)]
enum Op {
    Num(Nat),
    Load(usize),
    Store(usize),
    Input,
    Bin(BinOp),
    Not,
    Read,
    Scan,
    Iota,
    Lit(Stream),
    Pair,
    Left,
    Right,
    Arity,
    Tape,
    Rehead,
    Apply,
    Probe,
    Smn,
    List,
    Push,
    Nth,
    Len,
    Jump(usize),
    JumpIfZero(usize),
    Emit,
    Halt,
    HaltWith,
    Ask,
    EnterInput,
    LeaveInput,
}

pub struct Compiled {
    ops: Vec<Op>,
    slots: usize,
}

impl Compiled {
    pub fn compile(p: &Program) -> Compiled {
        let mut c = Compiler { ops: Vec::new(), slots: HashMap::new() };
        c.stmt(&p.body);
        c.ops.push(Op::Halt);
        Compiled { ops: c.ops, slots: c.slots.len() }
    }
}

struct Compiler {
    ops: Vec<Op>,
    slots: HashMap<String, usize>,
}

impl Compiler {
    fn slot(&mut self, name: &str) -> usize {
        let next = self.slots.len();
        *self.slots.entry(name.to_string()).or_insert(next)
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::Seq(items) => items.iter().for_each(|i| self.stmt(i)),
            Stmt::Set(name, e) => {
                self.expr(e);
                let slot = self.slot(name);
                self.ops.push(Op::Store(slot));
            }
            Stmt::If(c, a, b) => {
                self.expr(c);
                let jz = self.ops.len();
                self.ops.push(Op::JumpIfZero(0));
                self.stmt(a);
                let jend = self.ops.len();
                self.ops.push(Op::Jump(0));
                let else_at = self.ops.len();
                self.stmt(b);
                let end = self.ops.len();
                self.ops[jz] = Op::JumpIfZero(else_at);
                self.ops[jend] = Op::Jump(end);
            }
            Stmt::While(c, body) => {
                let start = self.ops.len();
                self.expr(c);
                let jz = self.ops.len();
                self.ops.push(Op::JumpIfZero(0));
                self.stmt(body);
                self.ops.push(Op::Jump(start));
                let end = self.ops.len();
                self.ops[jz] = Op::JumpIfZero(end);
            }
            Stmt::Emit(e) => {
                self.expr(e);
                self.ops.push(Op::Emit);
            }
            Stmt::Halt(None) => self.ops.push(Op::Halt),
            Stmt::Halt(Some(e)) => {
                self.expr(e);
                self.ops.push(Op::HaltWith);
            }
            Stmt::Ask(e) => {
                self.expr(e);
                self.ops.push(Op::Ask);
            }
            Stmt::WithInput(e, body) => {
                self.expr(e);
                self.ops.push(Op::EnterInput);
                self.stmt(body);
                self.ops.push(Op::LeaveInput);
            }
        }
    }

    fn expr(&mut self, e: &Expr) {
        let op = match e {
            Expr::Num(n) => Op::Num(n.clone()),
            Expr::Var(name) => Op::Load(self.slot(name)),
            Expr::Input => Op::Input,
            Expr::Bin(op, a, b) => {
                self.expr(a);
                self.expr(b);
                Op::Bin(*op)
            }
            Expr::Not(a) => {
                self.expr(a);
                Op::Not
            }
            Expr::Read(s, i) => {
                self.expr(s);
                self.expr(i);
                Op::Read
            }
            Expr::Scan(s, v, l) => {
                self.expr(s);
                self.expr(v);
                self.expr(l);
                Op::Scan
            }
            Expr::Iota(n) => {
                self.expr(n);
                Op::Iota
            }
            Expr::Lit(prefix, tail) => Op::Lit(Stream::literal(prefix.clone(), tail.clone())),
            Expr::Pair(a, b) => {
                self.expr(a);
                self.expr(b);
                Op::Pair
            }
            Expr::Left(a) => {
                self.expr(a);
                Op::Left
            }
            Expr::Right(a) => {
                self.expr(a);
                Op::Right
            }
            Expr::Arity(a) => {
                self.expr(a);
                Op::Arity
            }
            Expr::Tape(s, j) => {
                self.expr(s);
                self.expr(j);
                Op::Tape
            }
            Expr::Rehead(s, c) => {
                self.expr(s);
                self.expr(c);
                Op::Rehead
            }
            Expr::Apply(s) => {
                self.expr(s);
                Op::Apply
            }
            Expr::Probe(s) => {
                self.expr(s);
                Op::Probe
            }
            Expr::Smn(c, s, l) => {
                self.expr(c);
                self.expr(s);
                self.expr(l);
                Op::Smn
            }
            Expr::List => Op::List,
            Expr::Push(l, v) => {
                self.expr(l);
                self.expr(v);
                Op::Push
            }
            Expr::Nth(l, i) => {
                self.expr(l);
                self.expr(i);
                Op::Nth
            }
            Expr::Len(l) => {
                self.expr(l);
                Op::Len
            }
        };
        self.ops.push(op);
    }
}

fn cache() -> &'static Mutex<HashMap<Nat, Arc<Compiled>>> {
    static CACHE: OnceLock<Mutex<HashMap<Nat, Arc<Compiled>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Decodes and compiles a code, memoized per code number.
pub fn load(n: &Nat) -> Result<Arc<Compiled>, MachineError> {
    if let Some(c) = cache().lock().unwrap_or_else(|e| e.into_inner()).get(n) {
        return Ok(c.clone());
    }
    let program = code::decode(&Code(n.clone()))?;
    let compiled = Arc::new(Compiled::compile(&program));
    cache().lock().unwrap_or_else(|e| e.into_inner()).insert(n.clone(), compiled.clone());
    Ok(compiled)
}

#[derive(Clone)]
enum Value {
    Nat(Nat),
    Stream(Stream),
    List(Arc<Vec<Value>>),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Nat(_) => "number",
            Value::Stream(_) => "stream",
            Value::List(_) => "list",
        }
    }
}

/// What a run reports back to whoever is driving it.
pub enum Event {
    Emit(Nat),
    End { asked: bool, tail: Stream },
    Fail(StreamError),
}

pub struct Machine {
    prog: Arc<Compiled>,
    pc: usize,
    stack: Vec<Value>,
    vars: Vec<Value>,
    input: Stream,
    saved_inputs: Vec<Stream>,
    fuel: u64,
}

type Step<T> = Result<T, StreamError>;

fn stuck<T>(msg: impl Into<String>) -> Step<T> {
    Err(StreamError::stuck(msg))
}

impl Machine {
    pub fn new(prog: Arc<Compiled>, input: Stream, fuel: u64) -> Machine {
        let vars = vec![Value::Nat(Nat::ZERO); prog.slots];
        Machine { prog, pc: 0, stack: Vec::new(), vars, input, saved_inputs: Vec::new(), fuel }
    }

    /// A machine for the universal functional on `z`: the program number is
    /// `z(0)` and the whole of `z` is the input.
    pub fn for_phi(z: &Stream, fuel: u64) -> Step<Machine> {
        let head = baire::tuple_head(z)?;
        let prog = load(&head).map_err(|e| StreamError::stuck(e.to_string()))?;
        Ok(Machine::new(prog, z.clone(), fuel))
    }

    pub fn fuel_left(&self) -> u64 {
        self.fuel
    }

    fn pop(&mut self) -> Step<Value> {
        match self.stack.pop() {
            Some(v) => Ok(v),
            None => stuck("stack underflow"),
        }
    }

    fn pop_nat(&mut self) -> Step<Nat> {
        match self.pop()? {
            Value::Nat(n) => Ok(n),
            other => stuck(format!("expected a number, found a {}", other.kind())),
        }
    }

    fn pop_index(&mut self) -> Step<usize> {
        match self.pop_nat()?.to_usize() {
            Some(i) => Ok(i),
            None => stuck("index out of range"),
        }
    }

    fn pop_stream(&mut self) -> Step<Stream> {
        match self.pop()? {
            Value::Stream(s) => Ok(s),
            other => stuck(format!("expected a stream, found a {}", other.kind())),
        }
    }

    fn pop_list(&mut self) -> Step<Arc<Vec<Value>>> {
        match self.pop()? {
            Value::List(l) => Ok(l),
            other => stuck(format!("expected a list, found a {}", other.kind())),
        }
    }

    fn charge(&mut self, units: u64) -> Step<()> {
        if self.fuel < units {
            self.fuel = 0;
            return Err(StreamError::Timeout);
        }
        self.fuel -= units;
        Ok(())
    }

    /// Runs until the next emitted value, the end of the run, or a failure.
    pub fn next_event(&mut self) -> Event {
        loop {
            match self.step() {
                Ok(None) => {}
                Ok(Some(ev)) => return ev,
                Err(e) => return Event::Fail(e),
            }
        }
    }

    /// Drives the run to its end, discarding emitted values.
    pub fn run_to_end(&mut self) -> Step<(bool, Stream)> {
        loop {
            match self.next_event() {
                Event::Emit(_) => {}
                Event::End { asked, tail } => return Ok((asked, tail)),
                Event::Fail(e) => return Err(e),
            }
        }
    }

    fn step(&mut self) -> Step<Option<Event>> {
        self.charge(1)?;
        let op = match self.prog.ops.get(self.pc) {
            Some(op) => op.clone(),
            None => return stuck("program counter out of range"),
        };
        self.pc += 1;
        match op {
            Op::Num(n) => self.stack.push(Value::Nat(n)),
            Op::Load(slot) => self.stack.push(self.vars[slot].clone()),
            Op::Store(slot) => self.vars[slot] = self.pop()?,
            Op::Input => self.stack.push(Value::Stream(self.input.clone())),
            Op::Bin(op) => {
                let b = self.pop_nat()?;
                let a = self.pop_nat()?;
                self.stack.push(Value::Nat(op.eval(&a, &b)));
            }
            Op::Not => {
                let a = self.pop_nat()?;
                self.stack.push(Value::Nat(if a.is_zero() { Nat::ONE } else { Nat::ZERO }));
            }
            Op::Read => {
                let i = self.pop_index()?;
                let s = self.pop_stream()?;
                self.stack.push(Value::Nat(s.get(i)?));
            }
            Op::Scan => {
                let limit = self.pop_index()?;
                let v = self.pop_nat()?;
                let s = self.pop_stream()?;
                let mut found = limit;
                for p in 0..limit {
                    self.charge(1)?;
                    if s.get(p)? == v {
                        found = p;
                        break;
                    }
                }
                self.stack.push(Value::Nat(Nat::from(found)));
            }
            Op::Iota => {
                let n = self.pop_nat()?;
                self.stack.push(Value::Stream(baire::iota(n)));
            }
            Op::Lit(s) => self.stack.push(Value::Stream(s)),
            Op::Pair => {
                let b = self.pop_stream()?;
                let a = self.pop_stream()?;
                self.stack.push(Value::Stream(baire::pair(a, b)));
            }
            Op::Left => {
                let s = self.pop_stream()?;
                self.stack.push(Value::Stream(baire::left(&s)));
            }
            Op::Right => {
                let s = self.pop_stream()?;
                self.stack.push(Value::Stream(baire::right(&s)));
            }
            Op::Arity => {
                let s = self.pop_stream()?;
                self.stack.push(Value::Nat(Nat::from(baire::arity(&s))));
            }
            Op::Tape => {
                let j = self.pop_index()?;
                let s = self.pop_stream()?;
                match baire::component(&s, j) {
                    Some(c) => self.stack.push(Value::Stream(c)),
                    None => return stuck(format!("tuple has no component {j}")),
                }
            }
            Op::Rehead => {
                let c = self.pop_nat()?;
                let s = self.pop_stream()?;
                self.stack.push(Value::Stream(baire::rehead(&s, &c)));
            }
            Op::Apply => {
                let s = self.pop_stream()?;
                self.stack.push(Value::Stream(phi_stream(&s, self.fuel)));
            }
            Op::Probe => {
                let s = self.pop_stream()?;
                let mut sub = Machine::for_phi(&s, self.fuel)?;
                let result = sub.run_to_end();
                let used = self.fuel - sub.fuel_left();
                self.charge(used)?;
                let (asked, _) = result?;
                self.stack.push(Value::Nat(if asked { Nat::ONE } else { Nat::ZERO }));
            }
            Op::Smn => {
                let len = self.pop_index()?;
                let s = self.pop_stream()?;
                let c = self.pop_nat()?;
                let frozen = s.prefix(len)?;
                match super::specialize(&Code(c), frozen.values()) {
                    Ok(code) => self.stack.push(Value::Nat(code.0)),
                    Err(e) => return stuck(e.to_string()),
                }
            }
            Op::List => self.stack.push(Value::List(Arc::new(Vec::new()))),
            Op::Push => {
                let v = self.pop()?;
                let mut l = self.pop_list()?;
                Arc::make_mut(&mut l).push(v);
                self.stack.push(Value::List(l));
            }
            Op::Nth => {
                let i = self.pop_index()?;
                let l = self.pop_list()?;
                match l.get(i) {
                    Some(v) => self.stack.push(v.clone()),
                    None => return stuck(format!("list index {i} out of range")),
                }
            }
            Op::Len => {
                let l = self.pop_list()?;
                self.stack.push(Value::Nat(Nat::from(l.len())));
            }
            Op::Jump(t) => self.pc = t,
            Op::JumpIfZero(t) => {
                if self.pop_nat()?.is_zero() {
                    self.pc = t;
                }
            }
            Op::Emit => return Ok(Some(Event::Emit(self.pop_nat()?))),
            Op::Halt => return Ok(Some(Event::End { asked: false, tail: Stream::zeros() })),
            Op::HaltWith => {
                let tail = self.pop_stream()?;
                return Ok(Some(Event::End { asked: false, tail }));
            }
            Op::Ask => {
                let tail = self.pop_stream()?;
                return Ok(Some(Event::End { asked: true, tail }));
            }
            Op::EnterInput => {
                let s = self.pop_stream()?;
                let old = std::mem::replace(&mut self.input, s);
                self.saved_inputs.push(old);
            }
            Op::LeaveInput => match self.saved_inputs.pop() {
                Some(old) => self.input = old,
                None => return stuck("input scope underflow"),
            },
        }
        Ok(None)
    }
}

enum RunState {
    PendingPhi(Stream, u64),
    Running(Machine),
    Finished,
}

/// Drives a machine lazily as the source of a stream.
struct RunProducer(RunState);

impl Producer for RunProducer {
    fn advance(&mut self) -> Produced {
        if let RunState::PendingPhi(z, fuel) = &self.0 {
            match Machine::for_phi(z, *fuel) {
                Ok(m) => self.0 = RunState::Running(m),
                Err(e) => {
                    self.0 = RunState::Finished;
                    return Produced::Failed(e);
                }
            }
        }
        let RunState::Running(m) = &mut self.0 else {
            return Produced::Failed(StreamError::stuck("run already finished"));
        };
        match m.next_event() {
            Event::Emit(v) => Produced::Value(v),
            Event::End { tail, .. } => {
                self.0 = RunState::Finished;
                Produced::Tail(tail)
            }
            Event::Fail(e) => {
                self.0 = RunState::Finished;
                Produced::Failed(e)
            }
        }
    }
}

/// The output of the universal functional on `z` as a lazy stream.
pub fn phi_stream(z: &Stream, fuel: u64) -> Stream {
    Stream::lazy(Box::new(RunProducer(RunState::PendingPhi(z.clone(), fuel))))
}

/// The output of `prog` on `input` as a lazy stream.
pub fn run_stream(prog: Arc<Compiled>, input: Stream, fuel: u64) -> Stream {
    Stream::lazy(Box::new(RunProducer(RunState::Running(Machine::new(prog, input, fuel)))))
}
