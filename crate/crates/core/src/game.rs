//! The reduction game between Player I, who poses an `F`-instance and
//! answers `G`-questions, and Player II, who asks `G`-questions until it
//! can solve the `F`-instance.
//!
//! A Player II strategy is a program run on the position `(s, X_0, T_1,
//! ..., T_k)` of its own code, the instance and Player I's replies so far.
//! It answers with `pair(iota(0), S)` to play the solution `S`, or with
//! `pair(iota(1), Y)` to ask `Y`. Rounds are numbered from 1.

use std::fmt;
use std::sync::Arc;

use crate::baire::{encode_tuple, right, Stream, StreamError};
use crate::diamond::{diamond_problem, instance, AnswerPolicy, DiamondProblem, Trace};
use crate::machine::{self, assemble, Code};
use crate::problems::{zeros_program, Membership, Problem, ProblemRef, Verdict};

const SHOW: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub program: Code,
}

impl Strategy {
    pub fn new(program: Code) -> Strategy {
        Strategy { program }
    }

    /// Plays the instance itself as the solution.
    pub fn immediate() -> Strategy {
        Strategy::new(assemble("(halt (pair (iota 0) (tape input 1)))"))
    }
}

#[derive(Clone, Debug)]
pub enum Move {
    Solution(Stream),
    Instance(Stream),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Winner {
    PlayerI,
    PlayerII,
}

#[derive(Clone, Debug)]
pub struct Round {
    pub number: usize,
    pub mv: Move,
    /// Player I's reply to an `Instance` move.
    pub reply: Option<Stream>,
}

#[derive(Clone, Debug)]
pub struct Transcript {
    pub x0: Stream,
    pub rounds: Vec<Round>,
}

impl Transcript {
    /// The transcript in the diamond trace format: questions, replies and
    /// the final solution.
    pub fn trace(&self) -> Trace {
        let mut lines = Vec::new();
        let mut k = 0;
        for r in &self.rounds {
            match &r.mv {
                Move::Instance(y) => {
                    k += 1;
                    lines.push(format!("QUERY {k}: {}", y.take(SHOW)));
                    if let Some(t) = &r.reply {
                        lines.push(format!("ANSWER {k}: {}", t.take(SHOW)));
                    }
                }
                Move::Solution(s) => lines.push(format!("HALT: {}", s.take(SHOW))),
            }
        }
        Trace { lines }
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "X0: {}", self.x0.take(SHOW))?;
        for r in &self.rounds {
            match &r.mv {
                Move::Instance(y) => writeln!(f, "round {}: II asks {}", r.number, y.take(SHOW))?,
                Move::Solution(s) => writeln!(f, "round {}: II solves {}", r.number, s.take(SHOW))?,
            }
            if let Some(t) = &r.reply {
                writeln!(f, "round {}: I replies {}", r.number, t.take(SHOW))?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GameResult {
    pub winner: Winner,
    /// The round the game ended in.
    pub round: usize,
    pub transcript: Transcript,
}

impl fmt::Display for GameResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let who = match self.winner {
            Winner::PlayerI => "Player I",
            Winner::PlayerII => "Player II",
        };
        write!(f, "{who} wins, round {}", self.round)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("illegal move in round {round}: {detail}")]
pub struct GameFault {
    pub round: usize,
    pub detail: String,
}

/// The strategy's move at the position `(s, X_0, T_1, ..., T_k)`.
pub fn next_move(s: &Strategy, x0: &Stream, replies: &[Stream], fuel: u64) -> Result<Move, StreamError> {
    let mut tapes = vec![x0.clone()];
    tapes.extend_from_slice(replies);
    let out = machine::phi_stream(&encode_tuple(s.program.0.clone(), &tapes), fuel);
    match out.get(0)?.to_u64() {
        Some(0) => Ok(Move::Solution(right(&out))),
        Some(1) => Ok(Move::Instance(right(&out))),
        _ => Err(StreamError::stuck("move tag must be 0 or 1")),
    }
}

/// Plays `s2` against the replies of `adversary` on the instance `x0`.
pub fn play(
    f: &dyn Problem,
    g: &dyn Problem,
    s2: &Strategy,
    x0: &Stream,
    mut adversary: impl AnswerPolicy,
    max_rounds: usize,
    fuel: u64,
) -> Result<GameResult, GameFault> {
    let mut transcript = Transcript { x0: x0.clone(), rounds: Vec::new() };
    let mut replies: Vec<Stream> = Vec::new();
    for number in 1..=max_rounds {
        let fault = |detail: String| GameFault { round: number, detail };
        let mv = next_move(s2, x0, &replies, fuel).map_err(|e| fault(format!("malformed move: {e}")))?;
        match mv {
            Move::Solution(s) => {
                let verdict = f.verify(x0, &s, fuel);
                transcript.rounds.push(Round { number, mv: Move::Solution(s), reply: None });
                let winner = match verdict {
                    Verdict::Accept => Winner::PlayerII,
                    Verdict::Reject => Winner::PlayerI,
                    Verdict::Unknown => return Err(fault("solution could not be verified".into())),
                };
                return Ok(GameResult { winner, round: number, transcript });
            }
            Move::Instance(y) => {
                let t = adversary
                    .answer(g, number - 1, &y, fuel)
                    .ok_or_else(|| fault("Player I has no reply".into()))?;
                if g.verify(&y, &t, fuel) != Verdict::Accept {
                    return Err(fault("reply does not verify".into()));
                }
                replies.push(t.clone());
                transcript.rounds.push(Round { number, mv: Move::Instance(y), reply: Some(t) });
            }
        }
    }
    Ok(GameResult { winner: Winner::PlayerI, round: max_rounds, transcript })
}

/// A diamond program replaying `s2`: questions become queries, answers
/// become replies and the solution becomes the output. Its instances are
/// `pair(iota(code), X_0)`.
pub fn strategy_to_diamond(s2: &Strategy) -> Code {
    assemble(&format!(
        "; tapes: pair(iota self, X0), then answers
(set pos (pair (iota {s}) (right (tape input 1))))
(set j 2)
(while (<= j (arity input))
  (seq (set pos (pair pos (tape input j))) (set j (+ j 1))))
(set mv (apply pos))
(if (= (read mv 0) 0) (halt (right mv)))
(ask (right mv))",
        s = s2.program
    ))
}

/// A strategy simulating the diamond program `d` on `pair(iota(d), X_0)`.
pub fn diamond_to_strategy(d: &Code) -> Strategy {
    Strategy::new(assemble(&format!(
        "; position: (self, X0, T1, ..., Tk)
(set t (pair (iota {d}) (pair (iota {d}) (tape input 1))))
(set j 2)
(while (<= j (arity input))
  (seq (set t (pair t (tape input j))) (set j (+ j 1))))
(if (probe t) (halt (pair (iota 1) (apply t))))
(halt (pair (iota 0) (apply t)))"
    )))
}

/// The problem a diamond program solves over `G`: `X_0` is solved by the
/// outputs of the program on `pair(iota(d), X_0)` under kernel answers.
pub struct SolvedBy {
    code: Code,
    inner: Arc<DiamondProblem>,
}

pub fn solved_by(code: &Code, g: ProblemRef) -> ProblemRef {
    Arc::new(SolvedBy { code: code.clone(), inner: diamond_problem(g) })
}

impl Problem for SolvedBy {
    fn name(&self) -> String {
        format!("solved-by[{}]", self.inner.name())
    }

    fn domain_check(&self, x: &Stream, fuel: u64) -> Membership {
        self.inner.domain_check(&instance(&self.code, x.clone()), fuel)
    }

    fn verify(&self, x: &Stream, y: &Stream, fuel: u64) -> Verdict {
        self.inner.verify(&instance(&self.code, x.clone()), y, fuel)
    }

    fn answers(&self, x: &Stream, width: usize, fuel: u64) -> Vec<Stream> {
        self.inner.answers(&instance(&self.code, x.clone()), width, fuel)
    }

    fn canonical_instance(&self) -> Code {
        zeros_program()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baire::{iota, pair};
    use crate::corpus::TWO_QUERY;
    use crate::diamond::{run_diamond, Indexed, Minimal};
    use crate::problems::{cn_problem, cn_star_witness, id_problem};
    use crate::star::star;

    const FUEL: u64 = 100_000;

    #[test]
    fn identity_game_is_won_at_once() {
        let id = id_problem();
        let x0 = Stream::from_u64s(&[3, 1], 4);
        let r = play(id.as_ref(), id.as_ref(), &Strategy::immediate(), &x0, Minimal, 5, FUEL).unwrap();
        assert_eq!(r.to_string(), "Player II wins, round 1");
    }

    #[test]
    fn star_needs_two_rounds() {
        // ask the forward image, then pull the reply back
        let cn = cn_problem(8);
        let w = cn_star_witness(8);
        let s2 = Strategy::new(assemble(&format!(
            "(if (= (arity input) 1) (halt (pair (iota 1) (apply (pair (iota {}) (tape input 1))))))
             (halt (pair (iota 0) (apply (pair (iota {}) (pair (tape input 2) (tape input 1))))))",
            w.delta, w.gamma
        )));
        let ff = star(cn.clone(), cn.clone());
        let x0 = pair(Stream::from_u64s(&[1], 0), iota(assemble("(emit (+ (read (right input) 0) 1))").0));
        for k in 0..3 {
            let r = play(ff.as_ref(), cn.as_ref(), &s2, &x0, Indexed(k), 5, FUEL).unwrap();
            assert_eq!((r.winner, r.round), (Winner::PlayerII, 2));
        }
    }

    #[test]
    fn silent_strategy_loses_at_the_horizon() {
        let id = id_problem();
        let s2 = Strategy::new(assemble("(halt (pair (iota 1) (lit | 0)))"));
        let r = play(id.as_ref(), id.as_ref(), &s2, &Stream::zeros(), Minimal, 4, FUEL).unwrap();
        assert_eq!((r.winner, r.round), (Winner::PlayerI, 4));
    }

    #[test]
    fn strategies_and_diamond_programs_correspond() {
        let cn = cn_problem(8);
        let d = assemble(TWO_QUERY);
        let f = solved_by(&d, cn.clone());
        let s2 = diamond_to_strategy(&d);
        let x0 = Stream::zeros();
        for k in 0..3 {
            let r = play(f.as_ref(), cn.as_ref(), &s2, &x0, Indexed(k), 5, FUEL).unwrap();
            assert_eq!((r.winner, r.round), (Winner::PlayerII, 3));
            let (out, st) = run_diamond(cn.as_ref(), &instance(&d, x0.clone()), Indexed(k), FUEL);
            assert_eq!(r.transcript.trace(), st.trace(&out));
            let back = strategy_to_diamond(&s2);
            let (out2, st2) = run_diamond(cn.as_ref(), &instance(&back, x0.clone()), Indexed(k), FUEL);
            assert_eq!(st2.trace(&out2), st.trace(&out));
        }
        let immediate = strategy_to_diamond(&Strategy::immediate());
        let (_, st) = run_diamond(cn.as_ref(), &instance(&immediate, x0), Minimal, FUEL);
        assert!(st.queries.is_empty());
    }
}
