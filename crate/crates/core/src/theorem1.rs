//! `F^⋄ ≤_W F` for problems with a computable instance and `F ⋆ F ≤_W F`.
//!
//! The forward map sends a diamond instance `d` to `Φ(n, d)`, where `n` is a
//! fixed point of the program transformation below. On `(n, d, y_1, ...,
//! y_k)` the program `n` replays the diamond run of `d` with `y_1, ...,
//! y_k` as answers:
//!
//! 1. if the run halts within those answers it outputs the canonical
//!    instance of `F`;
//! 2. if the run asks a further question `q` it outputs the `F`-instance
//!    `Δ(q, (n, d, y_1, ..., y_k))`.
//!
//! The backward map unfolds a single `F`-answer into the whole run with
//! `Γ`, one simulated query at a time.

use std::fmt;

use crate::baire::{encode_tuple, iota, pair, unpair, Stream, StreamError};
use crate::diamond::{step, DiamondState, Step};
use crate::machine::{self, assemble, fixed_point, specializing_transformer, Code, Outcome};
use crate::problems::{CheckReport, Membership, Problem, ProblemRef, ReductionWitness, Verdict};
use crate::star::star;

const MAX_ROUNDS: usize = 256;

/// Everything the reduction needs, with the self-reference closed.
pub struct Theorem1Context {
    pub f: ProblemRef,
    pub witness: ReductionWitness,
    /// Program of `pair([m | 0], z)`: the body of `n` with `m` standing for `n`.
    pub template: Code,
    /// `m ↦ specialize(template, [m])`.
    pub transformer: Code,
    pub n: Code,
    /// Program of `(d, y_1, ..., y_k)` producing the next query, or diverging.
    pub psi_code: Code,
}

fn template_source(canonical: &Code, delta: &Code) -> String {
    format!(
        "; input: pair([m | 0], (code, d, y1, ..., yk))
(set m (read (left input) 0))
(set z (right input))
(set k (- (arity z) 1))
(set d (tape z 1))
(set t (pair (iota (read d 0)) d))
(set i 0)
(while 1
  (seq
    (if (= (probe t) 0) (halt (apply (iota {canonical}))))
    (if (= i k) (halt (apply (pair (iota {delta}) (pair (apply t) (rehead z m))))))
    (set i (+ i 1))
    (set t (pair t (tape z (+ i 1))))))"
    )
}

const PSI_SOURCE: &str = "; input: (code, d, y1, ..., yk)
(set k (- (arity input) 1))
(set d (tape input 1))
(set t (pair (iota (read d 0)) d))
(set i 0)
(while 1
  (seq
    (if (= (probe t) 0) (while 1 (seq)))
    (if (= i k) (halt (apply t)))
    (set i (+ i 1))
    (set t (pair t (tape input (+ i 1))))))";

/// Builds the program template, closes its self-reference with the
/// recursion theorem and returns the context.
pub fn make_fixed_program(f: ProblemRef, witness: ReductionWitness) -> Theorem1Context {
    let template = assemble(&template_source(&f.canonical_instance(), &witness.delta));
    let transformer = specializing_transformer(&template);
    let n = fixed_point(&transformer);
    Theorem1Context { f, witness, template, transformer, n, psi_code: assemble(PSI_SOURCE) }
}

impl Theorem1Context {
    /// `(n, d, y_1, ..., y_k)`.
    pub fn tuple(&self, d: &Stream, ys: &[Stream]) -> Stream {
        let mut tapes = vec![d.clone()];
        tapes.extend_from_slice(ys);
        encode_tuple(self.n.0.clone(), &tapes)
    }

    /// `Φ(n, d, y_1, ..., y_k)`.
    pub fn instance(&self, d: &Stream, ys: &[Stream], fuel: u64) -> Stream {
        machine::phi_stream(&self.tuple(d, ys), fuel)
    }

    /// The star instance `(q, (n, d, y_1, ..., y_k))` handed to `Δ`.
    pub fn star_instance(&self, q: &Stream, d: &Stream, ys: &[Stream]) -> Stream {
        pair(q.clone(), self.tuple(d, ys))
    }
}

/// `Ψ(d, y_1, ..., y_k)`: the next query of the run, diverging (a Timeout)
/// when the run halts within `k` answers.
pub fn psi(ctx: &Theorem1Context, d: &Stream, ys: &[Stream], fuel: u64) -> Outcome {
    let mut tapes = vec![d.clone()];
    tapes.extend_from_slice(ys);
    machine::phi(&encode_tuple(ctx.psi_code.0.clone(), &tapes), fuel)
}

/// The single `F`-instance `Φ(n, d)`.
pub fn forward(ctx: &Theorem1Context, d: &Stream, fuel: u64) -> Stream {
    ctx.instance(d, &[], fuel)
}

#[derive(Clone, Debug)]
pub struct BackwardLoopState {
    pub ys: Vec<Stream>,
    /// `z_0, ..., z_k`: `z_i` answers `Φ(n, d, y_1, ..., y_i)`.
    pub zs: Vec<Stream>,
    pub sim: DiamondState,
}

impl BackwardLoopState {
    pub fn k(&self) -> usize {
        self.ys.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("fault at simulated query {query}: {detail}")]
pub struct Fault {
    pub query: usize,
    pub detail: String,
}

fn failed(e: StreamError) -> Outcome {
    match e {
        StreamError::Timeout => Outcome::Timeout(Default::default()),
        StreamError::Stuck(r) => Outcome::Stuck(r.to_string()),
    }
}

/// Simulates the diamond run of `d`, deriving each answer from the previous
/// `F`-answer: `(y_{k+1}, z_{k+1}) = Γ(z_k, (q, (n, d, y_1, ..., y_k)))`.
pub fn backward(
    ctx: &Theorem1Context,
    d: &Stream,
    z0: &Stream,
    fuel: u64,
) -> Result<(Outcome, BackwardLoopState), Fault> {
    let mut state = BackwardLoopState { ys: Vec::new(), zs: vec![z0.clone()], sim: DiamondState::new(d.clone()) };
    loop {
        let q = match step(&state.sim.tapes, fuel) {
            Err(e) => return Ok((failed(e), state)),
            Ok(Step::Halt(out)) => return Ok((Outcome::Output(out), state)),
            Ok(Step::Ask(q)) => q,
        };
        let k = state.k();
        if k >= MAX_ROUNDS {
            state.sim.pending = Some(q);
            return Ok((Outcome::Timeout(Default::default()), state));
        }
        let z = state.zs[k].clone();
        let pulled = ctx.witness.backward(&z, &ctx.star_instance(&q, d, &state.ys), fuel);
        let (y, z_next) = unpair(&pulled);
        let fault = |detail: String| Fault { query: k + 1, detail };
        if ctx.f.verify(&q, &y, fuel) == Verdict::Reject {
            return Err(fault(format!("derived answer {} does not solve the query", y.take(6))));
        }
        let mut ys = state.ys.clone();
        ys.push(y.clone());
        if ctx.f.verify(&ctx.instance(d, &ys, fuel), &z_next, fuel) == Verdict::Reject {
            return Err(fault(format!("carried answer {} does not solve the next instance", z_next.take(6))));
        }
        state.sim.record(q, y);
        state.ys = ys;
        state.zs.push(z_next);
    }
}

/// Outcome of checking the claim over explored answer tuples.
#[derive(Clone, Debug, Default)]
pub struct ClaimReport {
    pub checks: CheckReport,
    /// Number of answers along the path of each failing node.
    pub fault_depths: Vec<usize>,
}

impl ClaimReport {
    pub fn nodes(&self) -> usize {
        self.checks.samples_run
    }

    pub fn failures(&self) -> usize {
        self.checks.failures.len()
    }
}

impl fmt::Display for ClaimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "claim nodes checked: {}, failures: {}", self.nodes(), self.failures())
    }
}

/// Walks answer tuples drawn from the kernels of the simulated queries and
/// checks at each node that `Φ(n, d, y_1, ..., y_k)` is not outside
/// `dom F`, and at each internal node that `(q, (n, d, y_1, ..., y_k))`
/// lies in `dom (F ⋆ F)` and that `Γ` turns kernel answers into
/// `F ⋆ F`-solutions.
pub fn verify_claim(ctx: &Theorem1Context, d: &Stream, width: usize, depth: usize, fuel: u64) -> ClaimReport {
    let mut report = ClaimReport::default();
    let ff = star(ctx.f.clone(), ctx.f.clone());
    claim_node(ctx, ff.as_ref(), d, Vec::new(), width, depth, fuel, &mut report);
    report
}

#[allow(clippy::too_many_arguments)]
fn claim_node(
    ctx: &Theorem1Context,
    ff: &dyn Problem,
    d: &Stream,
    ys: Vec<Stream>,
    width: usize,
    depth: usize,
    fuel: u64,
    report: &mut ClaimReport,
) {
    let inst = ctx.instance(d, &ys, fuel);
    let mut tapes = vec![d.clone()];
    tapes.extend_from_slice(&ys);
    let mut verdict = Verdict::Accept;
    let mut detail = String::new();
    let mut note = |v: Verdict, what: String, verdict: &mut Verdict| {
        if v != Verdict::Accept && detail.is_empty() {
            detail = format!("depth {}: {what}", ys.len());
        }
        *verdict = verdict.and(v);
    };
    if ctx.f.domain_check(&inst, fuel) == Membership::Out {
        note(Verdict::Reject, "instance outside the domain".into(), &mut verdict);
    }
    let query = match step(&tapes, fuel) {
        Ok(Step::Ask(q)) if ys.len() < depth => Some(q),
        Ok(_) => None,
        Err(e) => {
            note(Verdict::Unknown, format!("simulation failed: {e}"), &mut verdict);
            None
        }
    };
    if let Some(q) = &query {
        let pair_inst = ctx.star_instance(q, d, &ys);
        if ff.domain_check(&pair_inst, fuel) == Membership::Out {
            note(Verdict::Reject, "star instance outside the domain".into(), &mut verdict);
        }
        for z in ctx.f.answers(&inst, width, fuel) {
            let pulled = ctx.witness.backward(&z, &pair_inst, fuel);
            let v = ff.verify(&pair_inst, &pulled, fuel);
            note(v, format!("answer {} pulls back to {}: {v}", z.take(4), pulled.take(4)), &mut verdict);
        }
    }
    if verdict != Verdict::Accept {
        report.fault_depths.push(ys.len());
    }
    report.checks.record(&inst, verdict, || detail);
    if let Some(q) = query {
        for y in ctx.f.answers(&q, width, fuel) {
            let mut next = ys.clone();
            next.push(y);
            claim_node(ctx, ff, d, next, width, depth, fuel, report);
        }
    }
}

/// The instance of `F^⋄` running program `code` with no data.
pub fn diamond_instance(code: &Code) -> Stream {
    iota(code.0.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baire::FiniteWord;
    use crate::corpus::TWO_QUERY;
    use crate::diamond::{run_diamond, Replay};
    use crate::problems::{canonical_stream, cn_problem, cn_star_witness, cn_star_witness_swapped};

    const FUEL: u64 = 100_000;

    fn ctx() -> Theorem1Context {
        make_fixed_program(cn_problem(8), cn_star_witness(8))
    }

    fn two_query() -> Stream {
        diamond_instance(&assemble(TWO_QUERY))
    }

    fn excluding(values: &[u64]) -> FiniteWord {
        let mut v: Vec<u64> = values.iter().map(|k| k + 1).collect();
        v.resize(8, 0);
        FiniteWord::from_u64s(&v)
    }

    #[test]
    fn zero_query_instance_is_canonical() {
        let c = ctx();
        let d = diamond_instance(&assemble("(emit 7)"));
        let canonical = canonical_stream(c.f.as_ref(), FUEL);
        assert_eq!(forward(&c, &d, FUEL).prefix(16).unwrap(), canonical.prefix(16).unwrap());
        assert!(psi(&c, &d, &[], 10_000).is_timeout());
        let (out, st) = backward(&c, &d, &iota(3u64), FUEL).unwrap();
        assert_eq!(out.take(3).values, FiniteWord::from_u64s(&[7, 0, 0]));
        assert_eq!(st.k(), 0);
    }

    #[test]
    fn psi_follows_the_queries() {
        let c = ctx();
        let d = two_query();
        assert_eq!(psi(&c, &d, &[], FUEL).take(8).values, excluding(&[0]));
        assert_eq!(psi(&c, &d, &[iota(1u64)], FUEL).take(8).values, excluding(&[1]));
        assert!(psi(&c, &d, &[iota(1u64), iota(0u64)], 10_000).is_timeout());
    }

    #[test]
    fn forward_is_the_delta_instance_of_the_first_query() {
        let c = ctx();
        let d = two_query();
        let direct = c.witness.forward(&c.star_instance(&Stream::from_u64s(&[1], 0), &d, &[]), FUEL);
        assert_eq!(forward(&c, &d, FUEL).prefix(20).unwrap(), direct.prefix(20).unwrap());
        let second = c.witness.forward(&c.star_instance(&Stream::from_u64s(&[2], 0), &d, &[iota(1u64)]), FUEL);
        assert_eq!(c.instance(&d, &[iota(1u64)], FUEL).prefix(20).unwrap(), second.prefix(20).unwrap());
    }

    #[test]
    fn backward_matches_a_direct_run() {
        let c = ctx();
        let d = two_query();
        let x = forward(&c, &d, FUEL);
        for z0 in c.f.answers(&x, 4, FUEL) {
            let (out, st) = backward(&c, &d, &z0, FUEL).unwrap();
            let got = out.take(4).values;
            let (a, b) = (got.values()[0].to_u64().unwrap(), got.values()[1].to_u64().unwrap());
            assert!(a != 0 && b != a, "output {got}");
            let (direct, ds) = run_diamond(c.f.as_ref(), &d, Replay(st.ys.clone()), FUEL);
            assert_eq!(st.sim.trace(&out), ds.trace(&direct));
        }
    }

    #[test]
    fn claim_holds_and_faults_are_found() {
        let c = ctx();
        let d = two_query();
        let report = verify_claim(&c, &d, 2, 3, FUEL);
        assert_eq!(report.nodes(), 7);
        assert_eq!(report.failures(), 0, "{:?}", report.checks.failures);

        let bad = make_fixed_program(cn_problem(8), cn_star_witness_swapped(8));
        let report = verify_claim(&bad, &d, 2, 3, FUEL);
        assert!(report.failures() > 0);
        assert!(report.fault_depths.iter().any(|k| *k <= 1));
    }
}
