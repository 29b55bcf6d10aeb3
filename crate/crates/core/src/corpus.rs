//! Seeded test material: diamond programs over closed choice, code
//! transformers for the fixed-point construction, and star instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baire::{iota, pair, Stream};
use crate::machine::{assemble, specializing_transformer, Code};
use crate::nat::Nat;

/// Asks to exclude `{0}`, then to exclude the first answer, and outputs
/// both answers as a pair.
pub const TWO_QUERY: &str = "
(set k (- (arity input) 1))
(if (= k 0) (ask (lit 1 | 0)))
(if (= k 1) (ask (iota (+ (read (tape input 2) 0) 1))))
(halt (pair (tape input 2) (tape input 3)))";

/// Outputs its data stream without asking anything.
pub const ECHO: &str = "(halt (right (tape input 1)))";

/// For the chain problem: asks about `0^ω`, reads the index `i` off the
/// first answer, then follows the atoms down for `i` more queries and
/// outputs the last one.
pub const PY_PROGRAM: &str = "
(set k (- (arity input) 1))
(if (= k 0) (ask (lit | 0)))
(set i (read (left (tape input 2)) 0))
(set last (right (tape input 2)))
(if (< 1 k) (set last (tape input (+ k 1))))
(if (< (- k 1) i) (ask last))
(halt last)";

pub const HORIZON: usize = 32;

fn excluded_literal(values: &[u64]) -> String {
    let body: Vec<String> = values.iter().map(|v| (v + 1).to_string()).collect();
    format!("(lit {} | 0)", body.join(" "))
}

fn small_set(rng: &mut ChaCha8Rng, max_len: usize, bound: u64) -> Vec<u64> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(0..bound)).collect()
}

/// Source of a closed-choice diamond program asking `queries` questions.
/// Query `j > 0` also excludes a value computed from answer `j`.
pub fn cn_program_source(rng: &mut ChaCha8Rng, queries: usize) -> String {
    let mut src = String::from("(set k (- (arity input) 1))\n(set p 0)\n(if (< 0 k) (set p (read (tape input (+ k 1)) 0)))\n");
    for j in 0..queries {
        let fixed = excluded_literal(&small_set(rng, 3, 8));
        if j == 0 {
            src.push_str(&format!("(if (= k 0) (ask {fixed}))\n"));
        } else {
            let shift = rng.gen_range(0..4);
            let modulus = rng.gen_range(2..7);
            src.push_str(&format!("(if (= k {j}) (seq (emit (+ (% (+ p {shift}) {modulus}) 1)) (ask {fixed})))\n"));
        }
    }
    for i in 1..=queries {
        src.push_str(&format!("(emit (read (tape input {}) 0))\n", i + 1));
    }
    src.push_str(&format!("(halt (lit {} | 0))\n", rng.gen_range(0..50)));
    src
}

/// `count` diamond programs over closed choice with at most three
/// adaptive queries each.
pub fn cn_programs(count: usize, seed: u64) -> Vec<Code> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let q = rng.gen_range(1..=3);
            assemble(&cn_program_source(&mut rng, q))
        })
        .collect()
}

/// Programs that never query: they emit constants and then echo part of
/// their data stream.
pub fn zero_query_programs(count: usize, seed: u64) -> Vec<Code> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = rng.gen_range(0..100);
            let b = rng.gen_range(0..100);
            assemble(&format!("(emit {a}) (emit (+ (read (right (tape input 1)) 0) {b})) (halt (lit {a} {b} | 1))"))
        })
        .collect()
}

/// Diamond instances: each program applied to its data stream.
pub fn instances(programs: &[Code]) -> Vec<Stream> {
    programs.iter().map(|c| iota(c.0.clone())).collect()
}

fn transformer_template(rng: &mut ChaCha8Rng) -> String {
    let k = rng.gen_range(2..1000);
    let a = rng.gen_range(0..50);
    match rng.gen_range(0..3) {
        0 => format!("(emit (% (read (left input) 0) {k})) (emit {a}) (halt (right (right input)))"),
        1 => format!("(halt (pair (iota (% (read (left input) 0) {k})) (right (right input))))"),
        _ => format!(
            "(set x (right (right input)))
             (set i 0)
             (while (< i {k})
               (seq (emit (+ (read x i) {a})) (set i (+ i 1))))
             (halt (iota (% (read (left input) 0) {k})))"
        ),
    }
}

/// Computable code transformers `m ↦ f(m)`. Most specialize a template
/// to `m`, so the program `f(m)` depends on `m`; the rest are constant.
pub fn transformers(count: usize, seed: u64) -> Vec<Code> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            if rng.gen_bool(0.25) {
                let c = rng.gen_range(0..100);
                let target = assemble(&format!("(emit {c}) (halt (right input))"));
                assemble(&format!("(halt (iota {target}))"))
            } else {
                specializing_transformer(&assemble(&transformer_template(&mut rng)))
            }
        })
        .collect()
}

/// Pseudorandom streams: a 48-value prefix and a constant tail.
pub fn oracle_streams(count: usize, seed: u64) -> Vec<Stream> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let prefix: Vec<u64> = (0..48).map(|_| rng.gen_range(0..100)).collect();
            Stream::from_u64s(&prefix, rng.gen_range(0..5))
        })
        .collect()
}

/// A closed-choice instance excluding a few small values, all listed below
/// the horizon.
pub fn cn_instance(rng: &mut ChaCha8Rng, horizon: usize) -> Stream {
    let mut slots = vec![Nat::ZERO; horizon];
    let mut positions: Vec<usize> = (0..horizon).collect();
    positions.shuffle(rng);
    for (p, v) in positions.into_iter().zip(small_set(rng, 4, 10)) {
        slots[p] = Nat::from(v + 1);
    }
    Stream::literal(slots, Nat::ZERO)
}

/// A continuation for closed choice: on answer `y` it excludes a value
/// computed from `y(0)` and a few constants.
pub fn cn_continuation(rng: &mut ChaCha8Rng) -> Stream {
    let a = rng.gen_range(0..4);
    let b = rng.gen_range(0..6);
    let m = rng.gen_range(2..9);
    let fixed = excluded_literal(&small_set(rng, 3, 10));
    iota(assemble(&format!("(emit (+ (% (+ (* (read (right input) 0) {a}) {b}) {m}) 1)) (halt {fixed})")).0)
}

/// Instances `pair(x, e)` of closed choice composed with itself.
pub fn cn_star_samples(count: usize, seed: u64, horizon: usize) -> Vec<Stream> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = cn_instance(&mut rng, horizon);
            pair(x, cn_continuation(&mut rng))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::Program;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(cn_programs(5, 1), cn_programs(5, 1));
        assert_ne!(cn_programs(5, 1), cn_programs(5, 2));
        assert_eq!(transformers(4, 9), transformers(4, 9));
    }

    #[test]
    fn generated_programs_decode() {
        for c in cn_programs(10, 3).iter().chain(&zero_query_programs(3, 3)).chain(&transformers(6, 3)) {
            Program::from_code(c).unwrap();
        }
    }
}
