//! One line per acceptance criterion; the test fails if any line does.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};

use common::*;
use horn_core::analysis::{certify_productive, check_non_overlapping};
use horn_core::frontend::parse_proof;
use horn_core::realizability::{solve_with_proof, ProofOutcome, ProofSearch, ProvedAnswer};
use horn_core::reduction::{FuelKind, StepRef};
use horn_core::typecheck::check_goal_proof;
use horn_core::{solve, Atom, Outcome, Program, SearchConfig, StepKind, Strategy};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn outcomes(p: &Program, q: &Atom, cfg: &SearchConfig) -> Vec<Outcome> {
    solve(p, q, cfg).collect()
}

fn proved(p: &Program, q: &Atom) -> Vec<ProvedAnswer> {
    solve_with_proof(p, q, &SearchConfig::new(Strategy::Unif).with_fuel(100))
        .unwrap()
        .into_iter()
        .filter_map(|o| match o {
            ProofOutcome::Proved(pa) => Some(pa),
            ProofOutcome::Other(_) => None,
        })
        .collect()
}

fn fuel_cause(out: &[Outcome]) -> Option<FuelKind> {
    out.iter().find_map(|o| match o {
        Outcome::FuelExhausted { cause, .. } => Some(*cause),
        _ => None,
    })
}

fn exhausted_path(out: &[Outcome]) -> Option<&[StepRef]> {
    out.iter().find_map(|o| match o {
        Outcome::FuelExhausted { path, .. } => Some(&path[..]),
        _ => None,
    })
}

fn criterion_1() -> Check {
    let out = outcomes(&program(CONNECT), &atom("connect(X, Y)"), &SearchConfig::new(Strategy::Unif).with_fuel(100));
    let found: BTreeSet<String> = out.iter().filter_map(|o| o.answer()).map(|a| a.to_string()).collect();
    let want: BTreeSet<String> = ["[X = node1, Y = node2]", "[X = node2, Y = node3]", "[X = node1, Y = node3]"]
        .into_iter()
        .map(String::from)
        .collect();
    ensure(found == want, || format!("answers {found:?}"))?;
    let n13 = out.iter().find(|o| o.answer().is_some_and(|a| a.to_string() == "[X = node1, Y = node3]")).unwrap();
    let labels: Vec<&str> = n13.trace().iter().map(|r| r.label.as_str()).collect();
    ensure(labels == ["k1", "k2", "k3"], || format!("node1/node3 derivation uses {labels:?}"))?;
    Ok("three answers; node1/node3 via k1 k2 k3".into())
}

fn proof_of(pa: &[ProvedAnswer], answer: &str, witness: &str, proof: &str) -> Result<(), String> {
    let hit = pa.iter().find(|p| p.answer.to_string() == answer).ok_or_else(|| format!("no answer {answer}"))?;
    ensure(hit.witness.to_string() == witness, || format!("witness {}", hit.witness))?;
    let got = hit.proof.as_ref().map(|n| n.to_string()).map_err(|e| e.to_string())?;
    ensure(got == proof, || format!("proof {got}"))?;
    ensure(hit.verdict.is_checked(), || format!("verdict {:?}", hit.verdict))
}

fn criterion_2() -> Check {
    let pa = proved(&program(CONNECT), &atom("connect(X, Y)"));
    proof_of(&pa, "[X = node1, Y = node3]", "pf_k1(pc_k2, pc_k3)", "k1 k2 k3")?;
    Ok("pf_k1(pc_k2, pc_k3) = k1 k2 k3, checked".into())
}

fn criterion_3() -> Check {
    let pa = proved(&program(EQ_LIST), &atom("eq(list(char))"));
    proof_of(&pa, "[]", "pf_k1(pc_k2)", "k1 k2")?;
    Ok("pf_k1(pc_k2) = k1 k2, checked".into())
}

fn stuck(out: &[Outcome]) -> Result<(String, usize), String> {
    match out {
        [Outcome::Stuck { goal, trace }] => Ok((goal.to_string(), trace.len())),
        other => Err(format!("expected a single stuck outcome, got {other:?}")),
    }
}

fn criterion_4() -> Check {
    let tm = SearchConfig::new(Strategy::Tm);
    let (g, n) = stuck(&outcomes(&program(STREAM), &atom("stream(cons(X, Y))"), &tm))?;
    ensure(g == "{stream(Y)}" && n == 1, || format!("stream: {g} after {n} steps"))?;
    let (g, _) = stuck(&outcomes(&program(BLIST), &atom("bList(cons(X, Y))"), &tm))?;
    ensure(g == "{bit(X), bList(Y)}", || format!("blist: {g}"))?;
    let p = program(TM_INCOMPLETE);
    let out = outcomes(&p, &atom("p(c)"), &tm);
    let (g, _) = stuck(&out)?;
    let Outcome::Stuck { goal, .. } = &out[0] else { unreachable!() };
    ensure(goal.len() == 1 && goal.atoms()[0].pred.as_str() == "q" && goal.atoms()[0].args[0].as_var().is_some(), || {
        format!("incompleteness: {g}")
    })?;
    check_goal_proof(&p, &parse_proof("k2 k1").unwrap(), &atom("p(c)")).map_err(|e| e.to_string())?;
    Ok(format!("stream {{stream(Y)}} after 1 step; blist {{bit(X), bList(Y)}}; p(c) stuck at {g}, k2 k1 accepted"))
}

fn criterion_5() -> Check {
    let out = outcomes(&program(BLIST), &atom("bList(cons(X, Y))"), &SearchConfig::new(Strategy::Struct));
    let first = out.iter().find(|o| o.is_success()).ok_or("no blist answer")?;
    let steps: Vec<(StepKind, &str)> = first.trace().iter().map(|r| (r.kind, r.label.as_str())).collect();
    let want = [
        (StepKind::Tm, "k4"),
        (StepKind::Subst, "k1"),
        (StepKind::Tm, "k1"),
        (StepKind::Subst, "k3"),
        (StepKind::Tm, "k3"),
    ];
    ensure(steps == want, || format!("blist steps {steps:?}"))?;
    let answer = first.answer().unwrap().to_string();
    ensure(answer == "[X = 0, Y = nil]", || format!("blist answer {answer}"))?;

    let out = outcomes(&program(CONNECT), &atom("connect(X, Y)"), &SearchConfig::new(Strategy::Struct));
    ensure(out.iter().all(|o| !o.is_success()), || "connect struct succeeded".into())?;
    ensure(fuel_cause(&out) == Some(FuelKind::TmPhase), || format!("connect struct: {:?}", fuel_cause(&out)))?;
    let path = exhausted_path(&out).unwrap();
    ensure(path.iter().all(|s| s.kind == StepKind::Tm && s.label.as_str() == "k1"), || "connect chain is not k1".into())?;

    let p = program(OVERLAP);
    let unif = outcomes(&p, &atom("p(X)"), &SearchConfig::default());
    let answers: Vec<String> = unif.iter().filter_map(|o| o.answer()).map(|a| a.to_string()).collect();
    ensure(answers == ["[X = c]"], || format!("overlap unif {answers:?}"))?;
    let (g, _) = stuck(&outcomes(&p, &atom("p(X)"), &SearchConfig::new(Strategy::Struct)))?;
    ensure(g == "{q(X)}", || format!("overlap struct stuck at {g}"))?;
    Ok("blist alternation to [X = 0, Y = nil]; connect exhausts tm-fuel on k1; overlap [X = c] vs {q(X)}".into())
}

/// Splits a path into maximal runs of term-matching steps.
fn tm_runs(path: &[StepRef]) -> Vec<usize> {
    path.split(|s| s.kind != StepKind::Tm).map(<[StepRef]>::len).filter(|&n| n > 0).collect()
}

fn criterion_6() -> Check {
    let p = program(LIST_MEASURED);
    let (g, n) = stuck(&outcomes(&p, &atom("p(list(int), Z)"), &SearchConfig::default()))?;
    ensure(n == 2 && g == "{p(list(int), 0)}", || format!("measured program: {g} after {n} steps"))?;
    let out = outcomes(&program(LIST_ORIGINAL), &atom("p(list(int))"), &SearchConfig::default());
    ensure(out.iter().all(|o| !o.is_success()) && fuel_cause(&out) == Some(FuelKind::Total), || {
        format!("original list program: {:?}", fuel_cause(&out))
    })?;

    let lp = program(LOOP);
    let q = atom("p(X)");
    let unif = outcomes(&lp, &q, &SearchConfig::default());
    ensure(fuel_cause(&unif) == Some(FuelKind::Total) && !unif.iter().any(Outcome::is_success), || {
        "loop unif did not exhaust fuel".into()
    })?;
    let st = outcomes(&lp, &q, &SearchConfig::new(Strategy::Struct));
    ensure(fuel_cause(&st) == Some(FuelKind::TmPhase), || format!("loop struct: {:?}", fuel_cause(&st)))?;

    let search = ProofSearch::new(&lp, &q).unwrap();
    let unif = outcomes(&search.transformed, &search.lifted, &SearchConfig::default());
    ensure(fuel_cause(&unif) == Some(FuelKind::Total) && !unif.iter().any(Outcome::is_success), || {
        "transformed loop unif did not exhaust fuel".into()
    })?;
    let st = outcomes(&search.transformed, &search.lifted, &SearchConfig::new(Strategy::Struct));
    ensure(fuel_cause(&st) == Some(FuelKind::Total) && !st.iter().any(Outcome::is_success), || {
        format!("transformed loop struct: {:?}", fuel_cause(&st))
    })?;
    let path = exhausted_path(&st).unwrap();
    let alternates = path.iter().enumerate().all(|(i, s)| s.kind == if i % 2 == 0 { StepKind::Subst } else { StepKind::Tm });
    ensure(alternates && path.len() > 2, || format!("transformed loop path is not +> -> alternation: {path:?}"))?;
    Ok(format!(
        "measured list stuck after 2 steps, original exhausts fuel; loop diverges both ways, transformed struct alternates for {} steps",
        path.len()
    ))
}

fn criterion_7() -> Check {
    let suites = [
        ("soundness", gen::soundness(500, 101)),
        ("preservation", gen::preservation(500, 102)),
        ("certification", gen::certification(500, 103)),
        ("equivalence", gen::equivalence(500, 104)),
        ("completeness", gen::completeness(500, 105)),
        ("unification", gen::unification_laws(500, 106)),
    ];
    let mut parts = Vec::new();
    for (name, t) in &suites {
        let summary = t.ok().map_err(|e| format!("{name}: {e}"))?;
        ensure(t.cases >= 500, || format!("{name}: only {} cases", t.cases))?;
        parts.push(format!("{name} {summary}"));
    }
    Ok(parts.join("; "))
}

fn criterion_8() -> Check {
    let p = program(BUSH);
    let q = atom("eq(bush(char))");
    let unif = outcomes(&p, &q, &SearchConfig::default());
    ensure(fuel_cause(&unif).is_some() && !unif.iter().any(Outcome::is_success), || "bush unif did not exhaust fuel".into())?;
    let st = outcomes(&p, &q, &SearchConfig::new(Strategy::Struct));
    ensure(fuel_cause(&st).is_some() && !st.iter().any(Outcome::is_success), || "bush struct did not exhaust fuel".into())?;

    let search = ProofSearch::new(&p, &q).unwrap();
    ensure(check_non_overlapping(&search.transformed).is_certified(), || "transformed bush overlaps".into())?;
    let cert = certify_productive(&search.transformed);
    ensure(cert.is_measure(), || format!("transformed bush: {cert:?}"))?;
    let cfg = SearchConfig::new(Strategy::Struct);
    let out = outcomes(&search.transformed, &search.lifted, &cfg);
    ensure(fuel_cause(&out) == Some(FuelKind::Total), || format!("transformed bush struct: {:?}", fuel_cause(&out)))?;
    let longest = tm_runs(exhausted_path(&out).unwrap()).into_iter().max().unwrap_or(0);
    ensure(longest < cfg.tm_fuel, || format!("a term-matching phase ran {longest} steps"))?;
    Ok(format!(
        "original exhausts fuel under unif ({:?}) and struct ({:?}); transformed is certified, longest tm phase {longest}, total fuel exhausted",
        fuel_cause(&unif).unwrap(),
        fuel_cause(&st).unwrap()
    ))
}

type Criterion = (&'static str, fn() -> Check);

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("connect answers and derivation", criterion_1),
        ("proof extraction on connect", criterion_2),
        ("type-class proof for eq(list(char))", criterion_3),
        ("term-matching stuck goals", criterion_4),
        ("structural resolution traces", criterion_5),
        ("counterexample programs", criterion_6),
        ("property suites", criterion_7),
        ("bush repair by transformation", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", i + 1);
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
