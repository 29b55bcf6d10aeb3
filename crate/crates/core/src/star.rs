//! The compositional product `F ⋆ G` and its `⟨id × F⟩ ∘ Φ_p ∘ G` form.
//!
//! An instance of `F ⋆ G` is `pair(x, e)`: solve `x` with `G` to get `y`,
//! then solve `Φ(e, y)` with `F` to get `z`. The solution is `pair(y, z)`.

use std::sync::{Arc, OnceLock};

use crate::baire::{agree_on, iota, left, pair, right, unpair, Stream};
use crate::machine::{assemble, call_with, Code};
use crate::problems::{Membership, Problem, ProblemRef, Verdict};

const KERNEL: usize = 4;
const AGREE: usize = 64;

#[derive(Clone, Debug)]
pub struct StarInstance {
    pub x: Stream,
    pub e: Stream,
}

impl StarInstance {
    pub fn encode(&self) -> Stream {
        pair(self.x.clone(), self.e.clone())
    }

    pub fn decode(s: &Stream) -> StarInstance {
        let (x, e) = unpair(s);
        StarInstance { x, e }
    }
}

fn merge(a: Membership, b: Membership) -> Membership {
    match (a, b) {
        (Membership::Out, _) | (_, Membership::Out) => Membership::Out,
        (Membership::In, Membership::In) => Membership::In,
        _ => Membership::Unknown,
    }
}

pub struct Star {
    f: ProblemRef,
    g: ProblemRef,
}

/// `F ⋆ G`: use `G` first, then `F`.
pub fn star(f: ProblemRef, g: ProblemRef) -> ProblemRef {
    Arc::new(Star { f, g })
}

impl Problem for Star {
    fn name(&self) -> String {
        format!("({} * {})", self.f.name(), self.g.name())
    }

    /// Checks `x ∈ dom G` and, over `G`'s kernel, `Φ(e, y) ∈ dom F`.
    fn domain_check(&self, inst: &Stream, fuel: u64) -> Membership {
        let StarInstance { x, e } = StarInstance::decode(inst);
        let mut verdict = self.g.domain_check(&x, fuel);
        if verdict == Membership::Out {
            return verdict;
        }
        for y in self.g.answers(&x, KERNEL, fuel) {
            verdict = merge(verdict, self.f.domain_check(&call_with(&e, y, fuel), fuel));
            if verdict == Membership::Out {
                break;
            }
        }
        verdict
    }

    fn verify(&self, inst: &Stream, sol: &Stream, fuel: u64) -> Verdict {
        let StarInstance { x, e } = StarInstance::decode(inst);
        let (y, z) = unpair(sol);
        let first = self.g.verify(&x, &y, fuel);
        if first == Verdict::Reject {
            return first;
        }
        first.and(self.f.verify(&call_with(&e, y, fuel), &z, fuel))
    }

    fn answers(&self, inst: &Stream, width: usize, fuel: u64) -> Vec<Stream> {
        let StarInstance { x, e } = StarInstance::decode(inst);
        let mut out = Vec::new();
        for y in self.g.answers(&x, width, fuel) {
            for z in self.f.answers(&call_with(&e, y.clone(), fuel), width, fuel) {
                if out.len() == width {
                    return out;
                }
                out.push(pair(y.clone(), z));
            }
        }
        out
    }

    fn canonical_instance(&self) -> Code {
        let then = assemble(&format!("(halt (apply (iota {})))", self.f.canonical_instance()));
        assemble(&format!("(halt (pair (apply (iota {})) (iota {then})))", self.g.canonical_instance()))
    }
}

// On pair(pair(iota self, e), y): pair(y, Φ(e, y)).
fn p_program() -> &'static Code {
    static CODE: OnceLock<Code> = OnceLock::new();
    CODE.get_or_init(|| assemble("(halt (pair (right input) (apply (pair (right (left input)) (right input)))))"))
}

// On pair(pair(iota self, p), y): the second component of Φ(p, y).
fn e_program() -> &'static Code {
    static CODE: OnceLock<Code> = OnceLock::new();
    CODE.get_or_init(|| assemble("(halt (right (apply (pair (right (left input)) (right input)))))"))
}

/// `(x, e) ↦ (x, p)` with `Φ(p, y) = pair(y, Φ(e, y))`.
pub fn star_to_bgp(inst: &StarInstance) -> Stream {
    pair(inst.x.clone(), pair(iota(p_program().0.clone()), inst.e.clone()))
}

/// `(x, p) ↦ (x, e)` with `Φ(e, y)` the second component of `Φ(p, y)`.
pub fn bgp_to_star(x: &Stream, p: &Stream) -> StarInstance {
    StarInstance { x: x.clone(), e: pair(iota(e_program().0.clone()), p.clone()) }
}

/// The problem `⟨id × F⟩ ∘ Φ_p ∘ G` on instances `pair(x, p)`: solve `x`
/// with `G`, split `Φ(p, y)` into `(w, v)` and answer `pair(w, z)` with
/// `z ∈ F(v)`.
pub struct BgpForm {
    f: ProblemRef,
    g: ProblemRef,
}

pub fn bgp_problem(f: ProblemRef, g: ProblemRef) -> ProblemRef {
    Arc::new(BgpForm { f, g })
}

impl Problem for BgpForm {
    fn name(&self) -> String {
        format!("(id x {}) . p . {}", self.f.name(), self.g.name())
    }

    fn domain_check(&self, inst: &Stream, fuel: u64) -> Membership {
        let (x, p) = unpair(inst);
        let mut verdict = self.g.domain_check(&x, fuel);
        if verdict == Membership::Out {
            return verdict;
        }
        for y in self.g.answers(&x, KERNEL, fuel) {
            verdict = merge(verdict, self.f.domain_check(&right(&call_with(&p, y, fuel)), fuel));
            if verdict == Membership::Out {
                break;
            }
        }
        verdict
    }

    /// Searches `G`'s kernel for a `y` explaining the solution. Without one
    /// the answer is Unknown, since `y` may lie outside the kernel.
    fn verify(&self, inst: &Stream, sol: &Stream, fuel: u64) -> Verdict {
        let (x, p) = unpair(inst);
        let (w, z) = unpair(sol);
        for y in self.g.answers(&x, KERNEL, fuel) {
            if self.g.verify(&x, &y, fuel) != Verdict::Accept {
                continue;
            }
            let r = call_with(&p, y, fuel);
            if agree_on(&left(&r), &w, AGREE) != Ok(true) {
                continue;
            }
            if self.f.verify(&right(&r), &z, fuel) == Verdict::Accept {
                return Verdict::Accept;
            }
        }
        Verdict::Unknown
    }

    fn answers(&self, inst: &Stream, width: usize, fuel: u64) -> Vec<Stream> {
        let (x, p) = unpair(inst);
        let mut out = Vec::new();
        for y in self.g.answers(&x, width, fuel) {
            let r = call_with(&p, y, fuel);
            for z in self.f.answers(&right(&r), width, fuel) {
                if out.len() == width {
                    return out;
                }
                out.push(pair(left(&r), z));
            }
        }
        out
    }

    fn canonical_instance(&self) -> Code {
        let then = assemble(&format!("(halt (apply (iota {})))", self.f.canonical_instance()));
        assemble(&format!(
            "(halt (pair (apply (iota {})) (pair (iota {}) (iota {then}))))",
            self.g.canonical_instance(),
            p_program()
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baire::FiniteWord;
    use crate::problems::{canonical_stream, cn_problem, id_problem};

    fn copy() -> Stream {
        iota(assemble("(halt (right input))").0)
    }

    fn exclude_first() -> Stream {
        iota(assemble("(emit (+ (read (right input) 0) 1))").0)
    }

    #[test]
    fn identity_composition() {
        let s = star(id_problem(), id_problem());
        let x = Stream::from_u64s(&[4, 5], 6);
        let inst = pair(x.clone(), copy());
        assert_eq!(s.verify(&inst, &pair(x.clone(), x), 10_000), Verdict::Accept);
    }

    #[test]
    fn closed_choice_composition() {
        let cn = cn_problem(8);
        let s = star(cn.clone(), cn);
        let inst = pair(Stream::from_u64s(&[1], 0), exclude_first());
        assert_eq!(s.verify(&inst, &pair(iota(1u64), iota(0u64)), 10_000), Verdict::Accept);
        assert_eq!(s.verify(&inst, &pair(iota(1u64), iota(1u64)), 10_000), Verdict::Reject);
        assert_eq!(s.verify(&inst, &pair(iota(0u64), iota(1u64)), 10_000), Verdict::Reject);
        assert_eq!(s.domain_check(&inst, 10_000), Membership::In);
        for sol in s.answers(&inst, 4, 10_000) {
            assert_eq!(s.verify(&inst, &sol, 10_000), Verdict::Accept);
        }
    }

    #[test]
    fn continuation_outside_the_domain() {
        let cn = cn_problem(4);
        let s = star(cn.clone(), cn);
        let inst = pair(Stream::zeros(), iota(assemble("(emit 0) (halt (lit | 0))").0));
        assert_eq!(s.domain_check(&inst, 1000), Membership::In);
        let stuck = pair(Stream::zeros(), iota(7u64));
        assert_eq!(s.domain_check(&stuck, 1000), Membership::Out);
    }

    #[test]
    fn canonical_instances_are_in_the_domain() {
        let cn = cn_problem(8);
        let s = star(cn.clone(), cn.clone());
        assert_eq!(s.domain_check(&canonical_stream(s.as_ref(), 10_000), 10_000), Membership::In);
        let b = bgp_problem(cn.clone(), cn);
        assert_eq!(b.domain_check(&canonical_stream(b.as_ref(), 10_000), 10_000), Membership::In);
    }

    #[test]
    fn adapters_translate_the_continuation() {
        let inst = StarInstance { x: Stream::zeros(), e: copy() };
        let (_, p) = unpair(&star_to_bgp(&inst));
        let y = Stream::from_u64s(&[1, 2], 0);
        let r = call_with(&p, y.clone(), 10_000);
        assert_eq!(left(&r).prefix(4).unwrap(), FiniteWord::from_u64s(&[1, 2, 0, 0]));
        assert_eq!(right(&r).prefix(4).unwrap(), FiniteWord::from_u64s(&[1, 2, 0, 0]));

        let five = iota(assemble("(halt (pair (right input) (iota 5)))").0);
        let back = bgp_to_star(&Stream::zeros(), &five);
        assert_eq!(call_with(&back.e, y, 10_000).prefix(3).unwrap(), FiniteWord::from_u64s(&[5, 0, 0]));
    }

    #[test]
    fn divergent_continuation_times_out() {
        let spin = iota(assemble("(while 1 (seq))").0);
        let inst = StarInstance { x: Stream::zeros(), e: spin };
        let (_, p) = unpair(&star_to_bgp(&inst));
        let r = call_with(&p, Stream::zeros(), 1000);
        assert_eq!(left(&r).get(0).unwrap(), crate::nat::Nat::ZERO);
        assert!(right(&r).get(0).is_err());
    }
}
