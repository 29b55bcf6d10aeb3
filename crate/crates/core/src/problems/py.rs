//! A problem whose diamond needs unboundedly many queries.
//!
//! Given atoms `q_0, ..., q_m`: `F(0^ω) = { pair(iota(i), q_i) : i ≤ m }`
//! and `F(q_{i+1}) = {q_i}`. Reaching `q_0` from `0^ω` along the answer
//! `pair(iota(i), q_i)` takes exactly `i` further applications of `F`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{zeros_program, Membership, Problem, Verdict};
use crate::baire::{iota, left, pair, right, FiniteWord, Stream, StreamError};
use crate::machine::Code;
use crate::nat::Nat;

const COMPARE: usize = 16;
const ATOM_LEN: usize = 64;

pub struct PyProblem {
    atoms: Vec<Stream>,
    keys: Vec<FiniteWord>,
}

/// `count` pseudorandom atoms: 64 nonzero values followed by zeros,
/// pairwise distinct on the compared prefix.
pub fn py_atoms(count: usize, seed: u64) -> Vec<Stream> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keys: Vec<Vec<u64>> = Vec::new();
    let mut atoms = Vec::new();
    while atoms.len() < count {
        let values: Vec<u64> = (0..ATOM_LEN).map(|_| rng.gen_range(1..=1000)).collect();
        if keys.iter().any(|k| k[..] == values[..COMPARE]) {
            continue;
        }
        keys.push(values[..COMPARE].to_vec());
        atoms.push(Stream::from_u64s(&values, 0));
    }
    atoms
}

pub fn py_problem(atoms: Vec<Stream>) -> Result<Arc<PyProblem>, StreamError> {
    if atoms.is_empty() {
        return Err(StreamError::stuck("py problem needs at least one atom"));
    }
    let keys = atoms.iter().map(|a| a.prefix(COMPARE)).collect::<Result<Vec<_>, _>>()?;
    Ok(Arc::new(PyProblem { atoms, keys }))
}

enum Kind {
    Zero,
    Atom(usize),
    Other,
}

impl PyProblem {
    pub fn atoms(&self) -> &[Stream] {
        &self.atoms
    }

    fn classify(&self, x: &Stream, fuel: u64) -> Result<Kind, StreamError> {
        if (fuel as usize) < COMPARE {
            return Err(StreamError::Timeout);
        }
        let key = x.prefix(COMPARE)?;
        if key.values().iter().all(Nat::is_zero) {
            return Ok(Kind::Zero);
        }
        Ok(self.keys.iter().position(|k| *k == key).map_or(Kind::Other, Kind::Atom))
    }

    fn matches(&self, y: &Stream, i: usize) -> Result<bool, StreamError> {
        Ok(y.prefix(COMPARE)? == self.keys[i])
    }
}

impl Problem for PyProblem {
    fn name(&self) -> String {
        format!("py[{}]", self.atoms.len())
    }

    fn domain_check(&self, x: &Stream, fuel: u64) -> Membership {
        match self.classify(x, fuel) {
            Ok(Kind::Zero) => Membership::In,
            Ok(Kind::Atom(i)) if i > 0 => Membership::In,
            Ok(_) | Err(StreamError::Stuck(_)) => Membership::Out,
            Err(StreamError::Timeout) => Membership::Unknown,
        }
    }

    fn verify(&self, x: &Stream, y: &Stream, fuel: u64) -> Verdict {
        if (fuel as usize) < 2 * COMPARE {
            return Verdict::Unknown;
        }
        let judged = match self.classify(x, fuel) {
            Ok(Kind::Zero) => (|| {
                let tag = left(y).prefix(COMPARE)?;
                let Some(i) = tag.values()[0].to_usize().filter(|i| *i < self.atoms.len()) else {
                    return Ok(false);
                };
                Ok(tag.values()[1..].iter().all(Nat::is_zero) && self.matches(&right(y), i)?)
            })(),
            Ok(Kind::Atom(i)) if i > 0 => self.matches(y, i - 1),
            Ok(_) => return Verdict::Unknown,
            Err(e) => Err(e),
        };
        match judged {
            Ok(true) => Verdict::Accept,
            Ok(false) | Err(StreamError::Stuck(_)) => Verdict::Reject,
            Err(StreamError::Timeout) => Verdict::Unknown,
        }
    }

    fn answers(&self, x: &Stream, width: usize, fuel: u64) -> Vec<Stream> {
        match self.classify(x, fuel) {
            Ok(Kind::Zero) => {
                self.atoms.iter().take(width).enumerate().map(|(i, q)| pair(iota(i), q.clone())).collect()
            }
            Ok(Kind::Atom(i)) if i > 0 => vec![self.atoms[i - 1].clone()],
            _ => Vec::new(),
        }
    }

    fn canonical_instance(&self) -> Code {
        zeros_program()
    }
}
