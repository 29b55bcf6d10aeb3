//! Executable multivalued problems.
//!
//! A problem is a verifier plus a finite answer kernel: solution sets are
//! usually infinite, so membership is semi-decided under a fuel budget and
//! a few concrete solutions are enumerated for branching.

mod cn;
mod py;

use std::fmt;
use std::sync::Arc;

pub use cn::{cantor_pair, cantor_unpair, cn_problem, cn_star_witness, cn_star_witness_swapped, ClosedChoice};
pub use py::{py_atoms, py_problem, PyProblem};

use crate::baire::{iota, pair, Stream, StreamError};
use crate::machine::{self, assemble, Code};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Membership {
    In,
    Out,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject,
    Unknown,
}

impl Verdict {
    /// Both must accept; a single rejection is decisive.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Reject, _) | (_, Verdict::Reject) => Verdict::Reject,
            (Verdict::Accept, Verdict::Accept) => Verdict::Accept,
            _ => Verdict::Unknown,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
            Verdict::Unknown => "unknown",
        })
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::In => "in",
            Membership::Out => "out",
            Membership::Unknown => "unknown",
        })
    }
}

pub trait Problem: Send + Sync {
    fn name(&self) -> String;

    fn domain_check(&self, x: &Stream, fuel: u64) -> Membership;

    /// Sound semi-decision of `y ∈ F(x)`: never accepts a refuted `y` and
    /// never rejects a genuine solution.
    fn verify(&self, x: &Stream, y: &Stream, fuel: u64) -> Verdict;

    /// The answer kernel: up to `width` solutions of `x`.
    fn answers(&self, x: &Stream, width: usize, fuel: u64) -> Vec<Stream>;

    /// A program whose output (on its own code) is a computable instance.
    fn canonical_instance(&self) -> Code;
}

pub type ProblemRef = Arc<dyn Problem>;

/// The instance produced by a canonical-instance program.
pub fn canonical_stream(p: &dyn Problem, fuel: u64) -> Stream {
    machine::phi_stream(&iota(p.canonical_instance().0), fuel)
}

/// The program emitting `0^ω`.
pub fn zeros_program() -> Code {
    assemble("(halt)")
}

/// Forward and backward functionals of a reduction. `delta` runs on
/// `pair(iota(delta), x)`, `gamma` on `pair(iota(gamma), pair(y, x))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionWitness {
    pub delta: Code,
    pub gamma: Code,
}

impl ReductionWitness {
    pub fn forward(&self, x: &Stream, fuel: u64) -> Stream {
        machine::call(&self.delta, x.clone(), fuel)
    }

    pub fn backward(&self, y: &Stream, x: &Stream, fuel: u64) -> Stream {
        machine::call(&self.gamma, pair(y.clone(), x.clone()), fuel)
    }

    /// Copies the instance forward and the answer back.
    pub fn identity() -> ReductionWitness {
        ReductionWitness {
            delta: assemble("(halt (right input))"),
            gamma: assemble("(halt (left (right input)))"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub samples_run: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub unknown: usize,
    pub failures: Vec<(Stream, String)>,
}

impl CheckReport {
    pub fn record(&mut self, x: &Stream, verdict: Verdict, detail: impl FnOnce() -> String) {
        self.samples_run += 1;
        match verdict {
            Verdict::Accept => self.accepted += 1,
            Verdict::Reject => self.rejected += 1,
            Verdict::Unknown => self.unknown += 1,
        }
        if verdict != Verdict::Accept {
            self.failures.push((x.clone(), detail()));
        }
    }

    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "samples: {}, accepted: {}, rejected: {}, unknown: {}, failures: {}",
            self.samples_run,
            self.accepted,
            self.rejected,
            self.unknown,
            self.failures.len()
        )
    }
}

/// Checks a reduction `F ≤_W G` on sample instances of `F`: each forward
/// image must not be outside `dom G`, and each kernel answer pulled back
/// through `gamma` must verify as an `F`-solution.
pub fn check_reduction(
    f: &dyn Problem,
    g: &dyn Problem,
    w: &ReductionWitness,
    samples: &[Stream],
    width: usize,
    fuel: u64,
) -> CheckReport {
    let mut report = CheckReport::default();
    for x in samples {
        let image = w.forward(x, fuel);
        if g.domain_check(&image, fuel) == Membership::Out {
            report.record(x, Verdict::Reject, || format!("forward image outside dom {}", g.name()));
            continue;
        }
        let kernel = g.answers(&image, width, fuel);
        if kernel.is_empty() {
            report.record(x, Verdict::Unknown, || "empty answer kernel for the forward image".into());
            continue;
        }
        let mut verdict = Verdict::Accept;
        let mut detail = String::new();
        for y in &kernel {
            let back = w.backward(y, x, fuel);
            let v = f.verify(x, &back, fuel);
            if v != Verdict::Accept && detail.is_empty() {
                detail = format!("answer {} pulled back to {}: {v}", y.take(4), back.take(6));
            }
            verdict = verdict.and(v);
        }
        report.record(x, verdict, || detail);
    }
    report
}

/// The first `len` positions, or `Ok(None)` when that exceeds the budget.
pub(crate) fn read_within(s: &Stream, len: usize, fuel: u64) -> Result<Option<Vec<crate::nat::Nat>>, StreamError> {
    if len as u64 > fuel {
        return Ok(None);
    }
    Ok(Some(s.prefix(len)?.0))
}

/// `F(x) = {x}`, compared on a fixed prefix.
pub struct Identity {
    pub horizon: usize,
}

pub fn id_problem() -> ProblemRef {
    Arc::new(Identity { horizon: 64 })
}

impl Problem for Identity {
    fn name(&self) -> String {
        "id".into()
    }

    fn domain_check(&self, x: &Stream, fuel: u64) -> Membership {
        match read_within(x, self.horizon.min(fuel as usize).max(1), fuel) {
            Ok(Some(_)) => Membership::In,
            Ok(None) | Err(StreamError::Timeout) => Membership::Unknown,
            Err(StreamError::Stuck(_)) => Membership::Out,
        }
    }

    fn verify(&self, x: &Stream, y: &Stream, fuel: u64) -> Verdict {
        let len = self.horizon.min(fuel as usize);
        for k in 0..len {
            match (x.get(k), y.get(k)) {
                (Ok(a), Ok(b)) if a != b => return Verdict::Reject,
                (Ok(_), Ok(_)) => {}
                (_, Err(StreamError::Stuck(_))) => return Verdict::Reject,
                _ => return Verdict::Unknown,
            }
        }
        if len == self.horizon {
            Verdict::Accept
        } else {
            Verdict::Unknown
        }
    }

    fn answers(&self, x: &Stream, _width: usize, _fuel: u64) -> Vec<Stream> {
        vec![x.clone()]
    }

    fn canonical_instance(&self) -> Code {
        zeros_program()
    }
}

/// The limited principle of omniscience on 0/1 streams whose ones, if
/// any, occur below the horizon.
pub struct Lpo {
    pub horizon: usize,
}

pub fn lpo_problem(horizon: usize) -> ProblemRef {
    Arc::new(Lpo { horizon })
}

impl Lpo {
    /// Position of the first 1 within the horizon, `Ok(None)` if there is none.
    fn first_one(&self, x: &Stream, fuel: u64) -> Result<Option<usize>, Option<StreamError>> {
        for k in 0..self.horizon {
            if k as u64 >= fuel {
                return Err(None);
            }
            let v = x.get(k).map_err(Some)?;
            if v == crate::nat::Nat::ONE {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }
}

impl Problem for Lpo {
    fn name(&self) -> String {
        "lpo".into()
    }

    fn domain_check(&self, x: &Stream, fuel: u64) -> Membership {
        for k in 0..self.horizon.min(fuel as usize) {
            match x.get(k) {
                Ok(v) if v > crate::nat::Nat::ONE => return Membership::Out,
                Ok(_) => {}
                Err(StreamError::Stuck(_)) => return Membership::Out,
                Err(StreamError::Timeout) => return Membership::Unknown,
            }
        }
        if fuel as usize >= self.horizon {
            Membership::In
        } else {
            Membership::Unknown
        }
    }

    fn verify(&self, x: &Stream, y: &Stream, fuel: u64) -> Verdict {
        let claim = match y.get(0).map(|v| v.to_u64()) {
            Ok(Some(c @ (0 | 1))) => c,
            Ok(_) | Err(StreamError::Stuck(_)) => return Verdict::Reject,
            Err(StreamError::Timeout) => return Verdict::Unknown,
        };
        match (claim, self.first_one(x, fuel)) {
            (1, Ok(Some(_))) => Verdict::Accept,
            (0, Ok(Some(_))) => Verdict::Reject,
            (0, Ok(None)) => Verdict::Accept,
            _ => Verdict::Unknown,
        }
    }

    fn answers(&self, x: &Stream, _width: usize, fuel: u64) -> Vec<Stream> {
        match self.first_one(x, fuel) {
            Ok(Some(_)) => vec![iota(1u64)],
            Ok(None) => vec![iota(0u64)],
            Err(_) => Vec::new(),
        }
    }

    fn canonical_instance(&self) -> Code {
        zeros_program()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(p: &[u64], t: u64) -> Stream {
        Stream::from_u64s(p, t)
    }

    #[test]
    fn identity_examples() {
        let id = id_problem();
        let x = lit(&[1, 2, 3], 0);
        assert_eq!(id.verify(&x, &x, 1000), Verdict::Accept);
        assert_eq!(id.verify(&lit(&[1], 0), &lit(&[2], 0), 1), Verdict::Reject);
        assert_eq!(id.answers(&x, 3, 100).len(), 1);
        assert_eq!(id.domain_check(&canonical_stream(id.as_ref(), 100), 1000), Membership::In);
    }

    #[test]
    fn lpo_examples() {
        let lpo = lpo_problem(32);
        assert_eq!(lpo.verify(&lit(&[0, 0, 1], 0), &iota(1u64), 10), Verdict::Accept);
        for fuel in [1, 10, 1000] {
            assert_eq!(lpo.verify(&lit(&[0], 0), &iota(1u64), fuel), Verdict::Unknown);
        }
        assert_eq!(lpo.verify(&lit(&[0, 0, 1], 0), &iota(0u64), 10), Verdict::Reject);
        assert_eq!(lpo.verify(&lit(&[0], 0), &iota(0u64), 10), Verdict::Unknown);
        assert_eq!(lpo.verify(&lit(&[0], 0), &iota(0u64), 32), Verdict::Accept);
        assert_eq!(lpo.domain_check(&lit(&[0, 2], 0), 100), Membership::Out);
        assert_eq!(lpo.domain_check(&canonical_stream(lpo.as_ref(), 100), 100), Membership::In);
    }

    #[test]
    fn identity_reduction_checks_out() {
        let id = id_problem();
        let samples: Vec<Stream> = (0..5).map(|k| lit(&[k, k + 1], k)).collect();
        let report = check_reduction(id.as_ref(), id.as_ref(), &ReductionWitness::identity(), &samples, 3, 10_000);
        assert_eq!(report.samples_run, 5);
        assert!(report.is_clean(), "{report}");
    }
}
