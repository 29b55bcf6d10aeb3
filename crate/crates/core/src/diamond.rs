//! Oracle machines over a problem: the diamond interpreter.
//!
//! A diamond instance `d` names its program `D` at position 0. With tapes
//! `d, y_1, ..., y_k` the machine state is the tuple `t = (d(0), d, y_1,
//! ..., y_k)`. Running `D` on `t` either ends in `ask`, in which case the
//! next query is `Φ(t)` and its answer becomes a new tape, or halts, in
//! which case the output is `Φ(t)`. Each step replays `D` from the start on
//! the current tapes, so a query depends only on the tapes existing when it
//! is asked.

use std::fmt;
use std::sync::Arc;

use crate::baire::{iota, pair, Stream, StreamError};
use crate::machine::{self, assemble, Code, Control, Outcome};
use crate::problems::{Membership, Problem, ProblemRef, ReductionWitness, Verdict};

const MAX_QUERIES: usize = 256;
const SHOW: usize = 8;

pub trait AnswerPolicy {
    /// The answer to query number `index` (from 0), or `None` to give up.
    fn answer(&mut self, f: &dyn Problem, index: usize, query: &Stream, fuel: u64) -> Option<Stream>;
}

/// Always the first kernel answer.
pub struct Minimal;

/// Kernel answer number `k`, or the last one when the kernel is smaller.
pub struct Indexed(pub usize);

/// Kernel answer `script[i]` for query `i`; 0 after the script ends.
pub struct Scripted(pub Vec<usize>);

/// Fixed answers in order, regardless of the kernel.
pub struct Replay(pub Vec<Stream>);

impl AnswerPolicy for Minimal {
    fn answer(&mut self, f: &dyn Problem, _index: usize, query: &Stream, fuel: u64) -> Option<Stream> {
        f.answers(query, 1, fuel).into_iter().next()
    }
}

impl AnswerPolicy for Indexed {
    fn answer(&mut self, f: &dyn Problem, _index: usize, query: &Stream, fuel: u64) -> Option<Stream> {
        let mut kernel = f.answers(query, self.0 + 1, fuel);
        let pick = self.0.min(kernel.len().checked_sub(1)?);
        Some(kernel.swap_remove(pick))
    }
}

impl AnswerPolicy for Scripted {
    fn answer(&mut self, f: &dyn Problem, index: usize, query: &Stream, fuel: u64) -> Option<Stream> {
        Indexed(self.0.get(index).copied().unwrap_or(0)).answer(f, index, query, fuel)
    }
}

impl AnswerPolicy for Replay {
    fn answer(&mut self, _f: &dyn Problem, index: usize, _query: &Stream, _fuel: u64) -> Option<Stream> {
        self.0.get(index).cloned()
    }
}

impl<P: AnswerPolicy + ?Sized> AnswerPolicy for &mut P {
    fn answer(&mut self, f: &dyn Problem, index: usize, query: &Stream, fuel: u64) -> Option<Stream> {
        (**self).answer(f, index, query, fuel)
    }
}

/// What the program does next on the current tapes.
#[derive(Clone, Debug)]
pub enum Step {
    Ask(Stream),
    Halt(Stream),
}

/// One replay of the program on tapes `d, y_1, ..., y_k`. The query or
/// output must produce its first value within the budget.
pub fn step(tapes: &[Stream], fuel: u64) -> Result<Step, StreamError> {
    let t = machine::multi_tape(tapes)?;
    let control = machine::probe(&t, fuel)?;
    let out = machine::phi_stream(&t, fuel);
    out.get(0)?;
    Ok(match control {
        Control::Asked => Step::Ask(out),
        Control::Halted => Step::Halt(out),
    })
}

#[derive(Clone, Debug)]
pub struct DiamondState {
    /// `d` followed by one tape per answered query.
    pub tapes: Vec<Stream>,
    /// `(query, answer)` in the order asked.
    pub queries: Vec<(Stream, Stream)>,
    /// A query left unanswered when the run stopped.
    pub pending: Option<Stream>,
}

impl DiamondState {
    pub fn new(d: Stream) -> DiamondState {
        DiamondState { tapes: vec![d], queries: Vec::new(), pending: None }
    }

    pub fn answers(&self) -> &[Stream] {
        &self.tapes[1..]
    }

    pub fn record(&mut self, query: Stream, answer: Stream) {
        self.tapes.push(answer.clone());
        self.queries.push((query, answer));
    }

    /// The line log of the run, ending with its outcome.
    pub fn trace(&self, outcome: &Outcome) -> Trace {
        let mut lines = Vec::new();
        for (k, (q, a)) in self.queries.iter().enumerate() {
            lines.push(format!("QUERY {}: {}", k + 1, q.take(SHOW)));
            lines.push(format!("ANSWER {}: {}", k + 1, a.take(SHOW)));
        }
        if let Some(q) = &self.pending {
            lines.push(format!("QUERY {}: {}", self.queries.len() + 1, q.take(SHOW)));
        }
        lines.push(match outcome {
            Outcome::Output(s) => format!("HALT: {}", s.take(SHOW)),
            Outcome::Timeout(_) => "TIMEOUT".to_string(),
            Outcome::Stuck(r) => format!("STUCK: {r}"),
        });
        Trace { lines }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub lines: Vec<String>,
}

impl Trace {
    pub fn query_lines(&self) -> usize {
        self.lines.iter().filter(|l| l.starts_with("QUERY")).count()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

fn failed(e: StreamError) -> Outcome {
    match e {
        StreamError::Timeout => Outcome::Timeout(Default::default()),
        StreamError::Stuck(r) => Outcome::Stuck(r.to_string()),
    }
}

/// Runs `d` with oracle `f`, answering queries through `policy`.
pub fn run_diamond(f: &dyn Problem, d: &Stream, mut policy: impl AnswerPolicy, fuel: u64) -> (Outcome, DiamondState) {
    let mut state = DiamondState::new(d.clone());
    loop {
        match step(&state.tapes, fuel) {
            Err(e) => return (failed(e), state),
            Ok(Step::Halt(out)) => return (Outcome::Output(out), state),
            Ok(Step::Ask(q)) => {
                if state.queries.len() >= MAX_QUERIES {
                    state.pending = Some(q);
                    return (Outcome::Timeout(Default::default()), state);
                }
                match policy.answer(f, state.queries.len(), &q, fuel) {
                    Some(a) => state.record(q, a),
                    None => {
                        state.pending = Some(q);
                        return (Outcome::Stuck("no answer to the query".into()), state);
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum NodeKind {
    Query { query: Stream, children: Vec<QueryTree> },
    Halt(Stream),
    /// A query at the depth limit.
    Cut(Stream),
    Failed(StreamError),
}

/// All runs whose answers come from the kernels of their queries, keyed
/// by the answer tuple.
#[derive(Clone, Debug)]
pub struct QueryTree {
    pub answers: Vec<Stream>,
    pub kind: NodeKind,
    /// The kernel at this node was cut short by the width.
    pub truncated: bool,
}

pub fn build_query_tree(f: &dyn Problem, d: &Stream, width: usize, depth: usize, fuel: u64) -> QueryTree {
    grow(f, vec![d.clone()], width, depth, fuel)
}

fn grow(f: &dyn Problem, tapes: Vec<Stream>, width: usize, depth: usize, fuel: u64) -> QueryTree {
    let answers = tapes[1..].to_vec();
    let (kind, truncated) = match step(&tapes, fuel) {
        Err(e) => (NodeKind::Failed(e), false),
        Ok(Step::Halt(out)) => (NodeKind::Halt(out), false),
        Ok(Step::Ask(q)) if answers.len() >= depth => (NodeKind::Cut(q), false),
        Ok(Step::Ask(q)) => {
            let kernel = f.answers(&q, width, fuel);
            if kernel.is_empty() {
                (NodeKind::Failed(StreamError::stuck("empty answer kernel")), false)
            } else {
                let truncated = kernel.len() == width;
                let children = kernel
                    .into_iter()
                    .map(|a| {
                        let mut next = tapes.clone();
                        next.push(a);
                        grow(f, next, width, depth, fuel)
                    })
                    .collect();
                (NodeKind::Query { query: q, children }, truncated)
            }
        }
    };
    QueryTree { answers, kind, truncated }
}

impl QueryTree {
    pub fn nodes(&self) -> Vec<&QueryTree> {
        let mut out = vec![self];
        if let NodeKind::Query { children, .. } = &self.kind {
            for c in children {
                out.extend(c.nodes());
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.nodes().len()
    }

    pub fn depth(&self) -> usize {
        self.answers.len()
    }

    /// Every explored branch halted.
    pub fn all_halted(&self) -> bool {
        self.nodes().iter().all(|n| matches!(n.kind, NodeKind::Halt(_) | NodeKind::Query { .. }))
    }

    pub fn any_failed(&self) -> bool {
        self.nodes().iter().any(|n| matches!(n.kind, NodeKind::Failed(_)))
    }

    /// Depths of the halting leaves, in tree order.
    pub fn halt_depths(&self) -> Vec<usize> {
        self.nodes().iter().filter(|n| matches!(n.kind, NodeKind::Halt(_))).map(|n| n.depth()).collect()
    }

    pub fn outputs(&self) -> Vec<Stream> {
        self.nodes()
            .iter()
            .filter_map(|n| match &n.kind {
                NodeKind::Halt(o) => Some(o.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        let indent = "  ".repeat(self.depth());
        let path: Vec<String> = self
            .answers
            .iter()
            .map(|a| a.get(0).map_or_else(|_| "?".to_string(), |v| v.to_string()))
            .collect();
        let label = format!("({})", path.join(" "));
        let line = match &self.kind {
            NodeKind::Query { query, .. } => format!("{indent}{label} Query {}", query.take(SHOW)),
            NodeKind::Halt(o) => format!("{indent}{label} Halt {}", o.take(SHOW)),
            NodeKind::Cut(q) => format!("{indent}{label} Cut {}", q.take(SHOW)),
            NodeKind::Failed(e) => format!("{indent}{label} Failed {e}"),
        };
        out.push_str(&line);
        out.push('\n');
        if let NodeKind::Query { children, .. } = &self.kind {
            for c in children {
                c.render_into(out);
            }
        }
    }
}

/// `F^⋄`: instances are diamond programs with data, solutions are the
/// outputs of runs whose every answer is a kernel answer.
pub struct DiamondProblem {
    pub f: ProblemRef,
    pub width: usize,
    pub depth: usize,
    pub match_len: usize,
}

pub fn diamond_problem(f: ProblemRef) -> Arc<DiamondProblem> {
    Arc::new(DiamondProblem { f, width: 8, depth: 8, match_len: 32 })
}

enum Search {
    Found,
    Exhausted,
    Inconclusive,
}

impl DiamondProblem {
    fn search(&self, tapes: Vec<Stream>, out: &Stream, fuel: u64) -> Search {
        match step(&tapes, fuel) {
            Err(_) => Search::Inconclusive,
            Ok(Step::Halt(o)) => match machine_agree(&o, out, self.match_len) {
                Some(true) => Search::Found,
                Some(false) => Search::Exhausted,
                None => Search::Inconclusive,
            },
            Ok(Step::Ask(_)) if tapes.len() > self.depth => Search::Inconclusive,
            Ok(Step::Ask(q)) => {
                let kernel = self.f.answers(&q, self.width, fuel);
                let mut result = if kernel.len() == self.width { Search::Inconclusive } else { Search::Exhausted };
                for a in kernel {
                    let mut next = tapes.clone();
                    next.push(a);
                    match self.search(next, out, fuel) {
                        Search::Found => return Search::Found,
                        Search::Inconclusive => result = Search::Inconclusive,
                        Search::Exhausted => {}
                    }
                }
                result
            }
        }
    }
}

fn machine_agree(a: &Stream, b: &Stream, len: usize) -> Option<bool> {
    for k in 0..len {
        match (a.get(k), b.get(k)) {
            (Ok(x), Ok(y)) if x != y => return Some(false),
            (Ok(_), Ok(_)) => {}
            _ => return None,
        }
    }
    Some(true)
}

impl Problem for DiamondProblem {
    fn name(&self) -> String {
        format!("{}^diamond", self.f.name())
    }

    fn domain_check(&self, d: &Stream, fuel: u64) -> Membership {
        let tree = build_query_tree(self.f.as_ref(), d, self.width, self.depth, fuel);
        if tree.any_failed() {
            Membership::Out
        } else if tree.all_halted() {
            Membership::In
        } else {
            Membership::Unknown
        }
    }

    fn verify(&self, d: &Stream, out: &Stream, fuel: u64) -> Verdict {
        match self.search(vec![d.clone()], out, fuel) {
            Search::Found => Verdict::Accept,
            Search::Exhausted => Verdict::Reject,
            Search::Inconclusive => Verdict::Unknown,
        }
    }

    fn answers(&self, d: &Stream, width: usize, fuel: u64) -> Vec<Stream> {
        let tree = build_query_tree(self.f.as_ref(), d, width, self.depth, fuel);
        tree.outputs().into_iter().take(width).collect()
    }

    fn canonical_instance(&self) -> Code {
        assemble(&format!("(halt (iota {}))", assemble("(halt)")))
    }
}

/// The diamond instance running program `code` on data `x`.
pub fn instance(code: &Code, x: Stream) -> Stream {
    pair(iota(code.0.clone()), x)
}

fn monotone_source(w: &ReductionWitness) -> String {
    format!(
        "; tapes: pair(iota self, d), then one answer per query
(set dd (right (tape input 1)))
(set k (- (arity input) 1))
(set t (pair (iota (read dd 0)) dd))
(set i 0)
(while (< i k)
  (seq
    (set q (apply t))
    (set i (+ i 1))
    (set t (pair t (apply (pair (iota {gamma}) (pair (tape input (+ i 1)) q)))))))
(if (probe t) (ask (apply (pair (iota {delta}) (apply t)))))
(halt (apply t))",
        gamma = w.gamma,
        delta = w.delta
    )
}

/// Turns an `F`-oracle program into a `G`-oracle program given `F ≤_W G`:
/// each query `q` becomes `Φ(delta, q)` and each answer `a` is read back as
/// `Φ(gamma, pair(a, q))`.
pub fn diamond_monotone(w: &ReductionWitness, d: &Stream) -> Stream {
    instance(&assemble(&monotone_source(w)), d.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baire::FiniteWord;
    use crate::corpus::{PY_PROGRAM, TWO_QUERY};
    use crate::problems::{cn_problem, id_problem, py_atoms, py_problem};

    fn prog(src: &str) -> Stream {
        iota(assemble(src).0)
    }

    fn w(v: &[u64]) -> FiniteWord {
        FiniteWord::from_u64s(v)
    }

    #[test]
    fn zero_query_run() {
        let (out, state) = run_diamond(cn_problem(8).as_ref(), &prog("(emit 7)"), Minimal, 10_000);
        assert_eq!(out.take(3).values, w(&[7, 0, 0]));
        assert!(state.queries.is_empty());
        assert_eq!(state.trace(&out).lines, vec!["HALT: [7 0 0 0 0 0 0 0]".to_string()]);
    }

    #[test]
    fn two_query_run_with_minimal_answers() {
        let (out, state) = run_diamond(cn_problem(8).as_ref(), &prog(TWO_QUERY), Minimal, 10_000);
        assert_eq!(state.queries.len(), 2);
        assert_eq!(state.tapes.len(), 3);
        assert_eq!(out.take(4).values, w(&[1, 0, 0, 0]));
        let trace = state.trace(&out);
        assert_eq!(trace.lines[0], "QUERY 1: [1 0 0 0 0 0 0 0]");
        assert_eq!(trace.lines[1], "ANSWER 1: [1 0 0 0 0 0 0 0]");
        assert_eq!(trace.lines[2], "QUERY 2: [2 0 0 0 0 0 0 0]");
        assert_eq!(trace.query_lines(), 2);
    }

    #[test]
    fn truncated_logs_reproduce_queries() {
        let cn = cn_problem(8);
        let (_, state) = run_diamond(cn.as_ref(), &prog(TWO_QUERY), Indexed(1), 10_000);
        for k in 0..state.queries.len() {
            let Ok(Step::Ask(q)) = step(&state.tapes[..=k], 10_000) else { panic!("expected a query") };
            assert_eq!(q.prefix(8).unwrap(), state.queries[k].0.prefix(8).unwrap());
        }
    }

    #[test]
    fn py_queries_grow_with_the_chosen_index() {
        let py = py_problem(py_atoms(6, 3)).unwrap();
        let d = prog(PY_PROGRAM);
        for k in 0..6 {
            let (out, state) = run_diamond(py.as_ref(), &d, Indexed(k), 100_000);
            assert_eq!(state.queries.len(), k + 1);
            assert_eq!(out.take(16).values, py.atoms()[0].prefix(16).unwrap());
        }
    }

    #[test]
    fn tree_shapes() {
        let cn = cn_problem(8);
        let tree = build_query_tree(cn.as_ref(), &prog("(emit 7)"), 2, 3, 10_000);
        assert_eq!(tree.node_count(), 1);
        assert!(matches!(tree.kind, NodeKind::Halt(_)));

        let tree = build_query_tree(cn.as_ref(), &prog(TWO_QUERY), 2, 3, 10_000);
        assert_eq!(tree.node_count(), 7);
        assert_eq!(tree.halt_depths(), vec![2, 2, 2, 2]);
        assert!(tree.all_halted());

        let tree = build_query_tree(cn.as_ref(), &prog(TWO_QUERY), 2, 0, 10_000);
        assert_eq!(tree.node_count(), 1);
        assert!(matches!(tree.kind, NodeKind::Cut(_)));
        assert!(tree.render().contains("Cut"));

        let py = py_problem(py_atoms(4, 3)).unwrap();
        let tree = build_query_tree(py.as_ref(), &prog(PY_PROGRAM), 4, 8, 100_000);
        assert_eq!(tree.halt_depths(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn diamond_problem_examples() {
        let cn = cn_problem(8);
        let dp = diamond_problem(cn);
        let echo = prog("(halt (tape input 1))");
        assert_eq!(dp.verify(&echo, &echo, 10_000), Verdict::Accept);

        let d = prog(TWO_QUERY);
        assert_eq!(dp.verify(&d, &pair(iota(1u64), iota(0u64)), 10_000), Verdict::Accept);
        assert_eq!(dp.verify(&d, &pair(iota(2u64), iota(0u64)), 10_000), Verdict::Accept);
        assert_eq!(dp.verify(&d, &pair(iota(0u64), iota(0u64)), 10_000), Verdict::Unknown);
        assert_eq!(dp.domain_check(&d, 10_000), Membership::In);

        let spinning_query = prog("(emit 1) (while 1 (seq)) (ask (lit | 0))");
        assert_eq!(dp.domain_check(&spinning_query, 10_000), Membership::Out);
        let canonical = crate::problems::canonical_stream(dp.as_ref(), 10_000);
        assert_eq!(dp.domain_check(&canonical, 10_000), Membership::In);
    }

    #[test]
    fn finite_kernels_allow_rejection() {
        let py = py_problem(py_atoms(3, 3)).unwrap();
        let dp = diamond_problem(py.clone());
        let d = prog(PY_PROGRAM);
        assert_eq!(dp.verify(&d, &py.atoms()[0], 100_000), Verdict::Accept);
        assert_eq!(dp.verify(&d, &py.atoms()[1], 100_000), Verdict::Reject);
    }

    #[test]
    fn monotone_with_identity_witness_preserves_behaviour() {
        let cn = cn_problem(8);
        let d = prog(TWO_QUERY);
        let wrapped = diamond_monotone(&ReductionWitness::identity(), &d);
        for k in 0..3 {
            let (a, sa) = run_diamond(cn.as_ref(), &d, Indexed(k), 100_000);
            let (b, sb) = run_diamond(cn.as_ref(), &wrapped, Indexed(k), 100_000);
            assert_eq!(a.take(8), b.take(8));
            assert_eq!(sa.queries.len(), sb.queries.len());
        }
    }

    #[test]
    fn monotone_into_closed_choice() {
        // id ≤_W C_N: forward to the empty enumeration, answer with the instance
        let wit = ReductionWitness { delta: assemble("(halt)"), gamma: assemble("(halt (right (right input)))") };
        let once = prog("(if (= (arity input) 1) (ask (lit 4 5 | 6))) (halt (tape input 2))");
        let (a, sa) = run_diamond(id_problem().as_ref(), &once, Minimal, 100_000);
        assert_eq!(sa.queries.len(), 1);
        let wrapped = diamond_monotone(&wit, &once);
        let (b, sb) = run_diamond(cn_problem(8).as_ref(), &wrapped, Minimal, 100_000);
        assert_eq!(sb.queries.len(), 1);
        assert_eq!(a.take(8), b.take(8));
        assert_eq!(a.take(3).values, w(&[4, 5, 6]));
    }
}
