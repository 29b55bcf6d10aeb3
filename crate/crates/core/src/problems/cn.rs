//! Closed choice on the naturals.
//!
//! An instance enumerates a set `A`: value `k+1` at some position puts `k`
//! in `A`, value 0 is padding. Solutions are `iota(m)` with `m ∉ A`.
//! Calibrated instances list each excluded `k` before position
//! `max(horizon, k + 1)`, which makes verification exact after that many
//! reads.

use std::collections::HashSet;
use std::sync::Arc;

use super::{zeros_program, Membership, Problem, ProblemRef, ReductionWitness, Verdict};
use crate::baire::{iota, Stream, StreamError};
use crate::machine::{assemble, Code};
use crate::nat::Nat;

pub struct ClosedChoice {
    pub horizon: usize,
}

pub fn cn_problem(horizon: usize) -> ProblemRef {
    Arc::new(ClosedChoice { horizon: horizon.max(1) })
}

/// Cantor pairing `⟨a,b⟩ = (a+b)(a+b+1)/2 + b`.
pub fn cantor_pair(a: u64, b: u64) -> u64 {
    (a + b) * (a + b + 1) / 2 + b
}

pub fn cantor_unpair(c: u64) -> (u64, u64) {
    let mut s = 0;
    while (s + 1) * (s + 2) / 2 <= c {
        s += 1;
    }
    let b = c - s * (s + 1) / 2;
    (s - b, b)
}

const TAIL_CHECK: usize = 8;

impl ClosedChoice {
    /// Positions that must be read to decide whether `m` is excluded.
    pub fn window(&self, m: usize) -> usize {
        self.horizon.max(m + 1)
    }

    /// Scans `x` for the value `m+1` inside its window.
    fn excludes(&self, x: &Stream, m: usize, fuel: u64) -> Option<bool> {
        let target = Nat::from(m).add(&Nat::ONE);
        let need = self.window(m);
        for p in 0..need {
            if p as u64 >= fuel {
                return None;
            }
            match x.get(p) {
                Ok(v) if v == target => return Some(true),
                Ok(_) => {}
                Err(_) => return None,
            }
        }
        Some(false)
    }
}

impl Problem for ClosedChoice {
    fn name(&self) -> String {
        format!("cn[{}]", self.horizon)
    }

    fn domain_check(&self, x: &Stream, fuel: u64) -> Membership {
        let mut excluded: HashSet<Nat> = HashSet::new();
        let mut candidate = 0usize;
        for p in 0..fuel as usize {
            match x.get(p) {
                Ok(v) if !v.is_zero() => {
                    excluded.insert(v.monus(&Nat::ONE));
                }
                Ok(_) => {}
                Err(StreamError::Stuck(_)) => return Membership::Out,
                Err(StreamError::Timeout) => return Membership::Unknown,
            }
            while excluded.contains(&Nat::from(candidate)) {
                candidate += 1;
            }
            if self.window(candidate) <= p + 1 {
                return Membership::In;
            }
        }
        Membership::Unknown
    }

    fn verify(&self, x: &Stream, y: &Stream, fuel: u64) -> Verdict {
        let m = match y.get(0) {
            Ok(m) => m,
            Err(StreamError::Stuck(_)) => return Verdict::Reject,
            Err(StreamError::Timeout) => return Verdict::Unknown,
        };
        for k in 1..TAIL_CHECK {
            match y.get(k) {
                Ok(v) if !v.is_zero() => return Verdict::Reject,
                Ok(_) => {}
                Err(StreamError::Stuck(_)) => return Verdict::Reject,
                Err(StreamError::Timeout) => return Verdict::Unknown,
            }
        }
        let Some(m) = m.to_usize() else {
            return Verdict::Unknown;
        };
        match self.excludes(x, m, fuel) {
            Some(true) => Verdict::Reject,
            Some(false) => Verdict::Accept,
            None => Verdict::Unknown,
        }
    }

    fn answers(&self, x: &Stream, width: usize, fuel: u64) -> Vec<Stream> {
        let mut excluded: HashSet<Nat> = HashSet::new();
        let mut read = 0usize;
        let mut out = Vec::new();
        let mut m = 0usize;
        while out.len() < width {
            while read < self.window(m) {
                if read as u64 >= fuel {
                    return out;
                }
                match x.get(read) {
                    Ok(v) if !v.is_zero() => {
                        excluded.insert(v.monus(&Nat::ONE));
                    }
                    Ok(_) => {}
                    Err(_) => return out,
                }
                read += 1;
            }
            if !excluded.contains(&Nat::from(m)) {
                out.push(iota(m));
            }
            m += 1;
        }
        out
    }

    fn canonical_instance(&self) -> Code {
        zeros_program()
    }
}

fn delta_source(horizon: usize) -> String {
    format!(
        "; input: pair(iota self, pair(x, e))
(set x (left (right input)))
(set e (right (right input)))
(set cache (list))
(set s 0)
(while 1
  (seq
    (set cache (push cache (apply (pair e (iota s)))))
    (set b 0)
    (while (<= b s)
      (seq
        (set a (- s b))
        (set c (+ (/ (* s (+ s 1)) 2) b))
        (set wa (+ a 1))
        (if (< wa {h}) (set wa {h}))
        (set wb (+ b 1))
        (if (< wb {h}) (set wb {h}))
        (if (< (scan x (+ a 1) wa) wa)
          (emit (+ c 1))
          (if (< (scan (nth cache a) (+ b 1) wb) wb)
            (emit (+ c 1))
            (emit 0)))
        (set b (+ b 1))))
    (set s (+ s 1))))",
        h = horizon
    )
}

fn gamma_source(swapped: bool) -> String {
    let out = if swapped { "(pair (iota b) (iota (- s b)))" } else { "(pair (iota (- s b)) (iota b))" };
    format!(
        "; input: pair(iota self, pair(iota c, instance))
(set c (read (left (right input)) 0))
(set s 0)
(while (<= (/ (* (+ s 1) (+ s 2)) 2) c) (set s (+ s 1)))
(set b (- c (/ (* s (+ s 1)) 2)))
(halt {out})"
    )
}

/// `C_N ⋆ C_N ≤_W C_N`: the forward map lists pair code `⟨a,b⟩` as
/// excluded when `a` is excluded by `x` or `b` by `Φ(e, iota(a))`; the
/// backward map decodes `⟨a,b⟩` into `pair(iota(a), iota(b))`.
pub fn cn_star_witness(horizon: usize) -> ReductionWitness {
    ReductionWitness { delta: assemble(&delta_source(horizon)), gamma: assemble(&gamma_source(false)) }
}

/// The same forward map with the components of the backward map swapped.
pub fn cn_star_witness_swapped(horizon: usize) -> ReductionWitness {
    ReductionWitness { delta: assemble(&delta_source(horizon)), gamma: assemble(&gamma_source(true)) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baire::pair;

    fn excluding(set: &[u64]) -> Stream {
        Stream::from_u64s(&set.iter().map(|k| k + 1).collect::<Vec<_>>(), 0)
    }

    #[test]
    fn verify_examples() {
        let cn = cn_problem(8);
        let x = excluding(&[0]);
        assert_eq!(cn.verify(&x, &iota(1u64), 8), Verdict::Accept);
        assert_eq!(cn.verify(&x, &iota(0u64), 1), Verdict::Reject);
        assert_eq!(cn.verify(&x, &iota(1u64), 3), Verdict::Unknown);
        assert_eq!(cn.verify(&x, &Stream::from_u64s(&[1, 5], 0), 100), Verdict::Reject);
    }

    #[test]
    fn kernel_skips_excluded_values() {
        let cn = cn_problem(8);
        let got: Vec<u64> = cn
            .answers(&excluding(&[0, 2]), 3, 1000)
            .iter()
            .map(|s| s.get(0).unwrap().to_u64().unwrap())
            .collect();
        let oracle: Vec<u64> = (0..).filter(|m| ![0, 2].contains(m)).take(3).collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn domain_needs_a_surviving_value() {
        let cn = cn_problem(4);
        assert_eq!(cn.domain_check(&excluding(&[0, 1]), 100), Membership::In);
        assert_eq!(cn.domain_check(&Stream::from_fn(|k| Ok(Nat::from(k + 1))), 100), Membership::Unknown);
        assert_eq!(cn.domain_check(&crate::problems::canonical_stream(cn.as_ref(), 100), 100), Membership::In);
    }

    #[test]
    fn cantor_round_trip() {
        for c in 0..500 {
            let (a, b) = cantor_unpair(c);
            assert_eq!(cantor_pair(a, b), c);
        }
        assert_eq!(cantor_pair(1, 0), 1);
        assert_eq!(cantor_pair(0, 1), 2);
    }

    #[test]
    fn gamma_decodes_pair_codes() {
        let w = cn_star_witness(8);
        let x = pair(Stream::zeros(), Stream::zeros());
        for c in [0u64, 1, 2, 7, 40] {
            let (a, b) = cantor_unpair(c);
            let out = w.backward(&iota(c), &x, 10_000);
            assert_eq!(out.prefix(4).unwrap(), crate::baire::FiniteWord::from_u64s(&[a, b, 0, 0]));
        }
    }
}
