//! Command-line front end. Every command prints the result of one library
//! operation, so identical flags give identical output.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::baire::{iota, Stream};
use crate::corpus::cn_star_samples;
use crate::diamond::{build_query_tree, instance, run_diamond, AnswerPolicy, Indexed, Minimal, Scripted};
use crate::game::{diamond_to_strategy, play, solved_by, Strategy};
use crate::machine::{self, parse_stream_literal, Code, MachineError, Outcome, Program};
use crate::nat::Nat;
use crate::problems::{
    check_reduction, cn_problem, cn_star_witness, cn_star_witness_swapped, id_problem, lpo_problem, py_atoms,
    py_problem, ProblemRef, ReductionWitness,
};
use crate::star::{star, star_to_bgp, StarInstance};
use crate::theorem1::{backward, forward, make_fixed_program, verify_claim};

#[derive(Parser, Debug)]
#[command(name = "weihrauch", version, about = "Run diamond programs, reductions and reduction games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a diamond program with an oracle problem and print its trace.
    Run(RunArgs),
    /// Reduce a diamond instance to a single oracle instance and back.
    Reduce(ReduceArgs),
    /// Print the query tree of a diamond program.
    Tree(TreeArgs),
    /// Play the reduction game.
    Game(GameArgs),
    /// Check a registered reduction on seeded samples.
    Check(CheckArgs),
    /// Build a star instance and its translation.
    Star(StarArgs),
    /// Print the code of a program file.
    Asm { file: PathBuf },
    /// Print the program text of a code.
    Disasm { code: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProblemName {
    Id,
    Lpo,
    Cn,
    Py,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_enum, default_value = "cn")]
    pub problem: ProblemName,
    #[arg(long, default_value_t = 100_000)]
    pub fuel: u64,
    #[arg(long, default_value_t = 32)]
    pub horizon: usize,
    /// Number of atoms for the chain problem.
    #[arg(long, default_value_t = 6)]
    pub atoms: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub program: PathBuf,
    /// Data stream, e.g. `[1 2 | 0]`.
    #[arg(long, default_value = "[]")]
    pub data: String,
    /// `minimal`, `indexed:K` or `script:K,K,...`.
    #[arg(long, default_value = "minimal")]
    pub policy: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WitnessName {
    CnStar,
    CnStarSwapped,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "cn-star")]
    pub witness: WitnessName,
    #[arg(long)]
    pub program: PathBuf,
    #[arg(long, default_value = "[]")]
    pub data: String,
    /// Kernel index of the answer to the forward instance.
    #[arg(long, default_value_t = 0)]
    pub answer: usize,
    #[arg(long, default_value_t = 2)]
    pub width: usize,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
}

#[derive(Args, Debug)]
pub struct TreeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub program: PathBuf,
    #[arg(long, default_value = "[]")]
    pub data: String,
    #[arg(long, default_value_t = 2)]
    pub width: usize,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
}

#[derive(Args, Debug)]
pub struct GameArgs {
    #[command(flatten)]
    pub common: Common,
    /// Diamond program to turn into a strategy; without it Player II
    /// plays the instance itself as the solution.
    #[arg(long)]
    pub program: Option<PathBuf>,
    #[arg(long, default_value = "[]")]
    pub data: String,
    #[arg(long, default_value = "minimal")]
    pub policy: String,
    #[arg(long, default_value_t = 10)]
    pub max_rounds: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    CnStar,
    CnStarSwapped,
    Identity,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "cn-star")]
    pub suite: Suite,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub width: usize,
}

#[derive(Args, Debug)]
pub struct StarArgs {
    #[command(flatten)]
    pub common: Common,
    /// The first instance, e.g. `[1 0 3 | 0]`.
    #[arg(long)]
    pub x: String,
    /// Program computing the second instance from an answer.
    #[arg(long)]
    pub program: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub width: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Parse(#[from] MachineError),
    #[error("timeout")]
    Timeout,
    #[error("fault: {0}")]
    Fault(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Timeout => 3,
            CliError::Fault(_) => 4,
        }
    }
}

type CliResult = Result<(), CliError>;

pub fn problem(c: &Common) -> Result<ProblemRef, CliError> {
    Ok(match c.problem {
        ProblemName::Id => id_problem(),
        ProblemName::Lpo => lpo_problem(c.horizon),
        ProblemName::Cn => cn_problem(c.horizon),
        ProblemName::Py => py_problem(py_atoms(c.atoms, c.seed)).map_err(|e| CliError::Usage(e.to_string()))?,
    })
}

pub fn policy(spec: &str) -> Result<Box<dyn AnswerPolicy>, CliError> {
    let bad = || CliError::Usage(format!("unknown policy '{spec}'"));
    if spec == "minimal" {
        return Ok(Box::new(Minimal));
    }
    if let Some(k) = spec.strip_prefix("indexed:") {
        return Ok(Box::new(Indexed(k.parse().map_err(|_| bad())?)));
    }
    if let Some(ks) = spec.strip_prefix("script:") {
        let script = ks.split(',').map(|k| k.trim().parse()).collect::<Result<Vec<_>, _>>().map_err(|_| bad())?;
        return Ok(Box::new(Scripted(script)));
    }
    Err(bad())
}

fn load(path: &PathBuf) -> Result<Code, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(Program::parse(&text)?.code())
}

fn finish(outcome: &Outcome) -> CliResult {
    match outcome {
        Outcome::Output(_) => Ok(()),
        Outcome::Timeout(_) => Err(CliError::Timeout),
        Outcome::Stuck(r) => Err(CliError::Fault(r.clone())),
    }
}

/// Runs one command, appending its text output to `out`.
pub fn execute(cli: &Cli, out: &mut String) -> CliResult {
    match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Reduce(a) => cmd_reduce(a, out),
        Command::Tree(a) => cmd_tree(a, out),
        Command::Game(a) => cmd_game(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Star(a) => cmd_star(a, out),
        Command::Asm { file } => {
            let _ = writeln!(out, "{}", load(file)?);
            Ok(())
        }
        Command::Disasm { code } => {
            let n: Nat = code.trim().parse().map_err(|_| CliError::Usage(format!("bad code '{code}'")))?;
            let _ = writeln!(out, "{}", machine::disassemble(&Code(n))?);
            Ok(())
        }
    }
}

fn diamond_input(program: &PathBuf, data: &str, fuel: u64) -> Result<(Code, Stream), CliError> {
    let code = load(program)?;
    let data = parse_stream_literal(data, fuel)?;
    Ok((code.clone(), instance(&code, data)))
}

pub fn cmd_run(a: &RunArgs, out: &mut String) -> CliResult {
    let f = problem(&a.common)?;
    let (_, d) = diamond_input(&a.program, &a.data, a.common.fuel)?;
    let mut pol = policy(&a.policy)?;
    let (outcome, state) = run_diamond(f.as_ref(), &d, pol.as_mut(), a.common.fuel);
    out.push_str(&state.trace(&outcome).to_string());
    finish(&outcome)
}

fn witness(name: WitnessName, horizon: usize) -> ReductionWitness {
    match name {
        WitnessName::CnStar => cn_star_witness(horizon),
        WitnessName::CnStarSwapped => cn_star_witness_swapped(horizon),
    }
}

pub fn cmd_reduce(a: &ReduceArgs, out: &mut String) -> CliResult {
    let f = problem(&a.common)?;
    if a.common.problem != ProblemName::Cn {
        return Err(CliError::Usage("no registered witness for this problem".into()));
    }
    let fuel = a.common.fuel;
    let ctx = make_fixed_program(f.clone(), witness(a.witness, a.common.horizon));
    let (_, d) = diamond_input(&a.program, &a.data, fuel)?;
    let x = forward(&ctx, &d, fuel);
    let _ = writeln!(out, "forward: {}", x.take(16));
    let kernel = f.answers(&x, a.answer + 1, fuel);
    let z0 = kernel.get(a.answer).ok_or_else(|| CliError::Usage("answer index outside the kernel".into()))?;
    let _ = writeln!(out, "answer {}: {}", a.answer, z0.take(8));
    let (outcome, state) = backward(&ctx, &d, z0, fuel).map_err(|e| CliError::Fault(e.to_string()))?;
    out.push_str(&state.sim.trace(&outcome).to_string());
    let report = verify_claim(&ctx, &d, a.width, a.depth, fuel);
    let _ = writeln!(out, "{report}");
    for (_, detail) in &report.checks.failures {
        let _ = writeln!(out, "failure: {detail}");
    }
    if report.failures() > 0 {
        return Err(CliError::Fault("claim check failed".into()));
    }
    finish(&outcome)
}

pub fn cmd_tree(a: &TreeArgs, out: &mut String) -> CliResult {
    let f = problem(&a.common)?;
    let (_, d) = diamond_input(&a.program, &a.data, a.common.fuel)?;
    let tree = build_query_tree(f.as_ref(), &d, a.width, a.depth, a.common.fuel);
    out.push_str(&tree.render());
    let _ = writeln!(out, "nodes: {}, all halted: {}", tree.node_count(), tree.all_halted());
    Ok(())
}

pub fn cmd_game(a: &GameArgs, out: &mut String) -> CliResult {
    let g = problem(&a.common)?;
    let fuel = a.common.fuel;
    let x0 = parse_stream_literal(&a.data, fuel)?;
    let (f, s2) = match &a.program {
        Some(p) => {
            let code = load(p)?;
            (solved_by(&code, g.clone()), diamond_to_strategy(&code))
        }
        None => (g.clone(), Strategy::immediate()),
    };
    let mut pol = policy(&a.policy)?;
    let result = play(f.as_ref(), g.as_ref(), &s2, &x0, pol.as_mut(), a.max_rounds, fuel)
        .map_err(|e| CliError::Fault(e.to_string()))?;
    out.push_str(&result.transcript.to_string());
    let _ = writeln!(out, "{result}");
    Ok(())
}

pub fn cmd_check(a: &CheckArgs, out: &mut String) -> CliResult {
    let h = a.common.horizon;
    let fuel = a.common.fuel;
    let report = match a.suite {
        Suite::Identity => {
            let id = id_problem();
            let samples: Vec<Stream> = crate::corpus::oracle_streams(a.samples, a.common.seed);
            check_reduction(id.as_ref(), id.as_ref(), &ReductionWitness::identity(), &samples, a.width, fuel)
        }
        Suite::CnStar | Suite::CnStarSwapped => {
            let cn = cn_problem(h);
            let w = if a.suite == Suite::CnStar { cn_star_witness(h) } else { cn_star_witness_swapped(h) };
            let samples = cn_star_samples(a.samples, a.common.seed, h);
            check_reduction(star(cn.clone(), cn.clone()).as_ref(), cn.as_ref(), &w, &samples, a.width, fuel)
        }
    };
    let _ = writeln!(out, "{report}");
    for (_, detail) in report.failures.iter().take(5) {
        let _ = writeln!(out, "failure: {detail}");
    }
    if report.is_clean() {
        Ok(())
    } else {
        Err(CliError::Fault("reduction check failed".into()))
    }
}

pub fn cmd_star(a: &StarArgs, out: &mut String) -> CliResult {
    let f = problem(&a.common)?;
    let fuel = a.common.fuel;
    let x = parse_stream_literal(&a.x, fuel)?;
    let e = iota(load(&a.program)?.0);
    let inst = StarInstance { x, e };
    let s = star(f.clone(), f);
    let _ = writeln!(out, "star instance: {}", inst.encode().take(16));
    let _ = writeln!(out, "translated instance: {}", star_to_bgp(&inst).take(16));
    for sol in s.answers(&inst.encode(), a.width, fuel) {
        let _ = writeln!(out, "solution {}: {}", sol.take(8), s.verify(&inst.encode(), &sol, fuel));
    }
    Ok(())
}
