mod common;

use common::gen;
use horn_core::frontend::{
    parse_atom, parse_goal, parse_program, parse_proof, parse_source, proved_doc, replay_document, result_doc,
    ResultDoc, TraceDocument, SCHEMA_VERSION,
};
use horn_core::realizability::{ProofOutcome, ProofSearch};
use horn_core::{solve, SearchConfig, Strategy};

#[test]
fn programs_round_trip_through_text() {
    let mut r = gen::rng(31);
    for _ in 0..500 {
        let p = gen::program(&mut r);
        let text = p.to_string();
        assert_eq!(parse_program(&text).unwrap(), p, "{text}");
    }
}

#[test]
fn proof_terms_round_trip_through_text() {
    let mut r = gen::rng(32);
    for _ in 0..1000 {
        let e = gen::lambda(&mut r, 5);
        let text = e.to_string();
        assert_eq!(parse_proof(&text).unwrap(), e, "{text}");
    }
}

#[test]
fn source_positions() {
    let src = parse_source("% bits\nk1: bit(0).\n\nbit(1).\n").unwrap();
    assert_eq!(src.program.len(), 2);
    assert_eq!((src.spans[1].line, src.spans[1].column), (4, 1));
    let err = parse_program("k1: p(a).\nk2: p(a, b).").unwrap_err();
    assert_eq!(err.pos.line, 2);
    assert!(parse_goal("{p(X), q(Y)}").unwrap().len() == 2);
}

fn documents(seed: u64, cases: usize) -> Vec<(horn_core::Program, TraceDocument)> {
    let mut r = gen::rng(seed);
    let mut out = Vec::new();
    while out.len() < cases {
        let p = gen::program(&mut r);
        let q = gen::query(&mut r, &p);
        if p.check_atom(&q).is_err() {
            continue;
        }
        let strategy = [Strategy::Unif, Strategy::Tm, Strategy::Struct][out.len() % 3];
        let cfg = SearchConfig::new(strategy).with_fuel(60).with_tm_fuel(20);
        let doc = if out.len() % 2 == 0 {
            let results: Vec<ResultDoc> = solve(&p, &q, &cfg).map(|o| result_doc(&o)).collect();
            TraceDocument { schema: SCHEMA_VERSION, strategy, query: q.to_string(), lifted_query: None, results }
        } else {
            let s = ProofSearch::new(&p, &q).unwrap();
            let results = s
                .run(&cfg)
                .map(|o| match o {
                    ProofOutcome::Proved(pa) => proved_doc(&pa),
                    ProofOutcome::Other(o) => result_doc(&o),
                })
                .collect();
            TraceDocument {
                schema: SCHEMA_VERSION,
                strategy,
                query: q.to_string(),
                lifted_query: Some(s.lifted.to_string()),
                results,
            }
        };
        out.push((p, doc));
    }
    out
}

#[test]
fn json_traces_replay_exactly() {
    for (p, doc) in documents(33, 500) {
        let json = serde_json::to_string(&doc).unwrap();
        let back: TraceDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        let replayed = replay_document(&p, &back).unwrap_or_else(|e| panic!("{p} {json}: {e}"));
        assert_eq!(serde_json::to_string(&replayed).unwrap(), json);
    }
}

#[test]
fn tampered_traces_are_rejected() {
    let p = common::program(common::BLIST);
    let q = parse_atom("bList(cons(X, Y))").unwrap();
    let cfg = SearchConfig::new(Strategy::Struct);
    let first = solve(&p, &q, &cfg).find(|o| o.is_success()).unwrap();
    let doc = TraceDocument {
        schema: SCHEMA_VERSION,
        strategy: Strategy::Struct,
        query: q.to_string(),
        lifted_query: None,
        results: vec![result_doc(&first)],
    };
    assert_eq!(replay_document(&p, &doc).unwrap(), doc);

    let mut wrong_label = doc.clone();
    if let ResultDoc::Success { steps, .. } = &mut wrong_label.results[0] {
        steps[1].label = "k2".into();
    }
    assert_ne!(replay_document(&p, &wrong_label).ok(), Some(wrong_label));

    let mut truncated = doc.clone();
    if let ResultDoc::Success { steps, .. } = &mut truncated.results[0] {
        steps.pop();
    }
    assert!(replay_document(&p, &truncated).is_err());

    let mut schema = doc;
    schema.schema = 2;
    assert!(replay_document(&p, &schema).is_err());
}
