use clap::Parser;
use weihrauch::cli::{execute, Cli, CliError};

fn program(name: &str) -> String {
    format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Result<String, CliError> {
    let cli = Cli::try_parse_from(std::iter::once("weihrauch").chain(args.iter().copied())).unwrap();
    let mut out = String::new();
    execute(&cli, &mut out).map(|_| out)
}

#[test]
fn two_queries_then_halt() {
    let out = run(&["run", "--program", &program("two_query.dsl")]).unwrap();
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines.iter().filter(|l| l.starts_with("QUERY")).count(), 2);
    assert!(lines.iter().any(|l| l.starts_with("HALT: [1 0")), "{out}");
}

#[test]
fn malformed_program_is_a_parse_error() {
    let err = run(&["run", "--program", &program("malformed.dsl")]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn unknown_policy_is_a_usage_error() {
    let err = run(&["run", "--program", &program("two_query.dsl"), "--policy", "sideways"]).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn tiny_fuel_times_out() {
    let err = run(&["run", "--program", &program("chain.dsl"), "--fuel", "3"]).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn reduce_checks_the_claim() {
    let out = run(&["reduce", "--program", &program("two_query.dsl")]).unwrap();
    assert!(out.contains("failures: 0"), "{out}");
}

#[test]
fn swapped_witness_faults() {
    let args = ["reduce", "--program", &program("two_query.dsl"), "--witness", "cn-star-swapped"];
    let err = run(&args).unwrap_err();
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn tree_of_depth_zero_is_cut() {
    let out = run(&["tree", "--program", &program("two_query.dsl"), "--depth", "0"]).unwrap();
    assert!(out.contains("Cut"), "{out}");
}

#[test]
fn game_against_the_default_opponent() {
    let out = run(&["game", "--problem", "id"]).unwrap();
    assert!(out.contains("Player II wins, round 1"), "{out}");
}

#[test]
fn check_suites() {
    let out = run(&["check", "--samples", "10"]).unwrap();
    assert!(out.contains("failures: 0"), "{out}");
    assert!(run(&["check", "--samples", "10", "--suite", "cn-star-swapped"]).is_err());
}

#[test]
fn assembly_round_trip() {
    let code = run(&["asm", &program("zero_query.dsl")]).unwrap();
    let text = run(&["disasm", code.trim()]).unwrap();
    assert!(!text.trim().is_empty());
}
