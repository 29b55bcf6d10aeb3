//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use weihrauch::baire::{agree_on, iota, left, pair, unpair, Stream};
use weihrauch::corpus::{cn_programs, cn_star_samples, oracle_streams, transformers, zero_query_programs, PY_PROGRAM};
use weihrauch::diamond::{build_query_tree, diamond_problem, instance, run_diamond, Indexed, Replay};
use weihrauch::game::{diamond_to_strategy, play, solved_by, strategy_to_diamond, Winner};
use weihrauch::machine::{self, assemble, fixed_point, transform};
use weihrauch::problems::{
    canonical_stream, check_reduction, cn_problem, cn_star_witness, cn_star_witness_swapped, py_atoms, py_problem,
    Problem, ProblemRef, Verdict,
};
use weihrauch::star::{bgp_problem, bgp_to_star, star, star_to_bgp, StarInstance};
use weihrauch::theorem1::{backward, forward, make_fixed_program, verify_claim, Theorem1Context};

const FUEL: u64 = 100_000;
const HORIZON: usize = 32;
const SEED: u64 = 20_240_601;

type Check = Result<String, String>;

// Independent reading of a closed-choice instance: the values listed in a prefix.
fn listed(x: &Stream, len: usize) -> Result<HashSet<u64>, String> {
    let p = x.prefix(len).map_err(|e| format!("instance prefix: {e}"))?;
    Ok(p.values().iter().filter(|v| !v.is_zero()).map(|v| v.to_u64().unwrap() - 1).collect())
}

fn head(y: &Stream) -> Result<u64, String> {
    y.get(0).map_err(|e| e.to_string())?.to_u64().ok_or_else(|| "huge answer".to_string())
}

// Counts along the diagonals instead of inverting the pairing formula.
fn decode_pair(c: u64) -> (u64, u64) {
    let mut k = 0;
    for s in 0.. {
        for b in 0..=s {
            if k == c {
                return (s - b, b);
            }
            k += 1;
        }
    }
    unreachable!()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cn() -> ProblemRef {
    cn_problem(HORIZON)
}

fn context() -> Theorem1Context {
    make_fixed_program(cn(), cn_star_witness(HORIZON))
}

fn corpus() -> Vec<Stream> {
    cn_programs(50, SEED).iter().map(|c| iota(c.0.clone())).collect()
}

fn criterion_1(ctx: &Theorem1Context) -> Check {
    let f = cn();
    let dp = diamond_problem(f.clone());
    let mut answers = 0;
    for (i, d) in corpus().iter().enumerate() {
        let x = forward(ctx, d, FUEL);
        let kernel = f.answers(&x, 4, FUEL);
        ensure(kernel.len() == 4, || format!("program {i}: forward kernel has {} answers", kernel.len()))?;
        for z0 in kernel {
            let (out, st) = backward(ctx, d, &z0, FUEL).map_err(|e| format!("program {i}: {e}"))?;
            let stream = out.stream().ok_or_else(|| format!("program {i}: backward gave {out:?}"))?;
            let v = dp.verify(d, stream, FUEL);
            ensure(v == Verdict::Accept, || format!("program {i}: diamond verify {v}"))?;
            for (k, (q, y)) in st.sim.queries.iter().enumerate() {
                let a = head(y)?;
                ensure(!listed(q, HORIZON + a as usize + 1)?.contains(&a), || {
                    format!("program {i}: answer {a} to query {} is excluded", k + 1)
                })?;
            }
            let (direct, ds) = run_diamond(f.as_ref(), d, Replay(st.ys.clone()), FUEL);
            ensure(ds.trace(&direct) == st.sim.trace(&out), || format!("program {i}: traces differ"))?;
            answers += 1;
        }
    }
    Ok(format!("{answers} forward answers unfolded over 50 programs"))
}

fn criterion_2(ctx: &Theorem1Context) -> Check {
    let mut nodes = 0;
    for (i, d) in corpus().iter().enumerate() {
        let r = verify_claim(ctx, d, 4, 4, FUEL);
        ensure(r.failures() == 0, || format!("program {i}: {:?}", r.checks.failures.first().map(|f| &f.1)))?;
        nodes += r.nodes();
    }
    let bad = make_fixed_program(cn(), cn_star_witness_swapped(HORIZON));
    let mut caught = None;
    for d in corpus().iter().take(10) {
        let r = verify_claim(&bad, d, 4, 4, FUEL);
        if let Some(k) = r.fault_depths.iter().min() {
            caught = Some(*k);
            break;
        }
    }
    match caught {
        Some(k) if k <= 2 => Ok(format!("{nodes} nodes clean; swapped witness caught at depth {k}")),
        Some(k) => Err(format!("swapped witness first caught at depth {k}")),
        None => Err("swapped witness not caught".into()),
    }
}

fn criterion_3() -> Check {
    let xs = oracle_streams(20, SEED + 3);
    for (i, f) in transformers(10, SEED + 2).iter().enumerate() {
        let n = fixed_point(f);
        let fnn = transform(f, &n, FUEL).map_err(|e| format!("transformer {i}: {e}"))?;
        ensure(fnn != n, || format!("transformer {i}: f(n) = n"))?;
        for (j, x) in xs.iter().enumerate() {
            let a = machine::phi_stream(&pair(iota(n.0.clone()), x.clone()), FUEL);
            let b = machine::phi_stream(&pair(iota(fnn.0.clone()), x.clone()), FUEL);
            let same = agree_on(&a, &b, 32).map_err(|e| format!("transformer {i}, stream {j}: {e}"))?;
            ensure(same, || format!("transformer {i}, stream {j}: outputs differ"))?;
        }
    }
    Ok("200 agreements on 32 positions".into())
}

fn criterion_4() -> Check {
    let f = cn();
    let s = star(f.clone(), f.clone());
    let b = bgp_problem(f.clone(), f.clone());
    let mut mapped = 0;
    for (i, raw) in cn_star_samples(20, SEED + 4, HORIZON).iter().enumerate() {
        let inst = StarInstance::decode(raw);
        let translated = star_to_bgp(&inst);
        let (_, p) = unpair(&translated);
        for sol in s.answers(raw, 4, FUEL) {
            let (y, z) = unpair(&sol);
            let (a, c) = (head(&y)?, head(&z)?);
            ensure(!listed(&inst.x, 64)?.contains(&a), || format!("sample {i}: kernel y excluded"))?;
            let next = machine::call_with(&inst.e, y.clone(), FUEL);
            ensure(!listed(&next, 64)?.contains(&c), || format!("sample {i}: kernel z excluded"))?;
            ensure(s.verify(raw, &sol, FUEL) == Verdict::Accept, || format!("sample {i}: star verify"))?;
            let w = left(&machine::call_with(&p, y.clone(), FUEL));
            ensure(agree_on(&w, &y, 64) == Ok(true), || format!("sample {i}: first component differs"))?;
            let v = b.verify(&translated, &pair(w, z), FUEL);
            ensure(v == Verdict::Accept, || format!("sample {i}: translated verify {v}"))?;
            mapped += 1;
        }
        let back = bgp_to_star(&inst.x, &p);
        for sol in b.answers(&translated, 4, FUEL) {
            ensure(b.verify(&translated, &sol, FUEL) == Verdict::Accept, || format!("sample {i}: form verify"))?;
            let v = s.verify(&back.encode(), &sol, FUEL);
            ensure(v == Verdict::Accept, || format!("sample {i}: back-translated verify {v}"))?;
            mapped += 1;
        }
    }
    Ok(format!("{mapped} solutions mapped in both directions"))
}

fn criterion_5() -> Check {
    let py = py_problem(py_atoms(6, SEED)).map_err(|e| e.to_string())?;
    let d = iota(assemble(PY_PROGRAM).0);
    let base = py.atoms()[0].prefix(16).map_err(|e| e.to_string())?;
    let mut counts = Vec::new();
    for k in 0..6 {
        let (out, st) = run_diamond(py.as_ref(), &d, Indexed(k), FUEL);
        ensure(st.queries.len() == k + 1, || format!("index {k}: {} queries", st.queries.len()))?;
        ensure(out.take(16).values == base, || format!("index {k}: output is not the base atom"))?;
        counts.push(st.queries.len());
    }
    let tree = build_query_tree(py.as_ref(), &d, 6, 8, FUEL);
    let mut depths = tree.halt_depths();
    depths.sort();
    ensure(depths == vec![1, 2, 3, 4, 5, 6], || format!("branch depths {depths:?}"))?;
    Ok(format!("query counts {counts:?}, branch depths {depths:?}"))
}

fn criterion_6() -> Check {
    let f = cn();
    let s = star(f.clone(), f.clone());
    let w = cn_star_witness(HORIZON);
    let samples = cn_star_samples(50, SEED + 6, HORIZON);
    let report = check_reduction(s.as_ref(), f.as_ref(), &w, &samples, 4, FUEL);
    ensure(report.is_clean() && report.samples_run == 50, || report.to_string())?;
    for (i, raw) in samples.iter().enumerate() {
        let inst = StarInstance::decode(raw);
        let image = w.forward(raw, FUEL);
        let outside = listed(&inst.x, HORIZON)?;
        for c in 0..=100u64 {
            let (a, b) = decode_pair(c);
            let inner = machine::call_with(&inst.e, iota(a), FUEL);
            let survives = !outside.contains(&a) && !listed(&inner, HORIZON)?.contains(&b);
            let brute = s.verify(raw, &pair(iota(a), iota(b)), FUEL);
            ensure(brute == if survives { Verdict::Accept } else { Verdict::Reject }, || {
                format!("sample {i}, code {c}: verifiers say {brute}")
            })?;
            let listed_code = f.verify(&image, &iota(c), FUEL);
            ensure(listed_code == if survives { Verdict::Accept } else { Verdict::Reject }, || {
                format!("sample {i}, code {c}: forward instance says {listed_code}")
            })?;
            let back = w.backward(&iota(c), raw, FUEL);
            let got = back.prefix(4).map_err(|e| e.to_string())?;
            ensure(got == weihrauch::FiniteWord::from_u64s(&[a, b, 0, 0]), || {
                format!("sample {i}, code {c}: backward gave {got}")
            })?;
        }
    }
    Ok(format!("{report}; 50 x 101 pair codes match the brute force"))
}

fn criterion_7() -> Check {
    let g = cn();
    let x0 = Stream::zeros();
    let mut games = 0;
    for (i, code) in cn_programs(10, SEED + 7).iter().enumerate() {
        let f = solved_by(code, g.clone());
        let s2 = diamond_to_strategy(code);
        let back = strategy_to_diamond(&s2);
        for k in 0..3 {
            let (out, st) = run_diamond(g.as_ref(), &instance(code, x0.clone()), Indexed(k), FUEL);
            let direct = st.trace(&out);
            let r = play(f.as_ref(), g.as_ref(), &s2, &x0, Indexed(k), 10, FUEL).map_err(|e| e.to_string())?;
            ensure(r.winner == Winner::PlayerII, || format!("program {i}, adversary {k}: {r}"))?;
            ensure(r.round <= st.queries.len() + 1, || format!("program {i}: won only in round {}", r.round))?;
            ensure(r.transcript.trace() == direct, || format!("program {i}: transcript differs from the run"))?;
            let (out2, st2) = run_diamond(g.as_ref(), &instance(&back, x0.clone()), Indexed(k), FUEL);
            ensure(st2.trace(&out2) == direct, || format!("program {i}: round trip differs"))?;
            games += 1;
        }
    }
    Ok(format!("{games} games won and round-tripped"))
}

fn criterion_8(ctx: &Theorem1Context) -> Check {
    let f = cn();
    let canonical = canonical_stream(f.as_ref(), FUEL).prefix(32).map_err(|e| e.to_string())?;
    let datas = oracle_streams(5, SEED + 8);
    for (i, (code, data)) in zero_query_programs(5, SEED + 8).iter().zip(datas).enumerate() {
        let d = instance(code, data);
        let x = forward(ctx, &d, FUEL);
        ensure(x.prefix(32).ok() == Some(canonical.clone()), || format!("program {i}: forward is not canonical"))?;
        let (own, _) = run_diamond(f.as_ref(), &d, Replay(Vec::new()), FUEL);
        for z0 in f.answers(&x, 2, FUEL) {
            let (out, st) = backward(ctx, &d, &z0, FUEL).map_err(|e| e.to_string())?;
            ensure(st.k() == 0, || format!("program {i}: {} backward steps", st.k()))?;
            ensure(out.take(32) == own.take(32), || format!("program {i}: output changed"))?;
        }
    }
    Ok("5 programs: canonical forward instance, output unchanged".into())
}

fn report(n: usize, title: &str, limit: Option<Duration>, run: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let mut result = run();
    let took = start.elapsed();
    if let (Ok(_), Some(limit)) = (&result, limit) {
        if took > limit {
            result = Err(format!("took {took:.1?}, limit {limit:?}"));
        }
    }
    match &result {
        Ok(msg) => println!("criterion {n} ({title}): PASS [{took:.1?}] {msg}"),
        Err(msg) => println!("criterion {n} ({title}): FAIL [{took:.1?}] {msg}"),
    }
    result.is_ok()
}

fn main() {
    let ctx = context();
    let results = [
        report(1, "reduction end to end", Some(Duration::from_secs(120)), || criterion_1(&ctx)),
        report(2, "claim induction", None, || criterion_2(&ctx)),
        report(3, "recursion theorem", None, criterion_3),
        report(4, "star adapters", None, criterion_4),
        report(5, "unbounded queries", None, criterion_5),
        report(6, "closed choice witness", None, criterion_6),
        report(7, "game correspondence", None, criterion_7),
        report(8, "zero-query case", None, || criterion_8(&ctx)),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
