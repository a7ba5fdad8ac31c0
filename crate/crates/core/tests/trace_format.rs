mod common;

use gdg_core::trace::{Trace, TraceError};
use serde_json::Value;

#[test]
fn header_then_one_line_per_round() {
    let out = gdg_core::sim::run(&common::oracle_ring(), &common::oracle_placement(), 100).unwrap();
    let text = out.trace.to_jsonl();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 15);

    let header: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(header["n"], 4);
    assert_eq!(header["R"], 4);
    assert_eq!(header["ids"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(header["horizon"], 100);
    assert!(header["class_claim"].is_null());

    let first: Value = serde_json::from_str(lines[1]).unwrap();
    assert_eq!(first["round"], 0);
    assert_eq!(first["edges"], serde_json::json!([1, 1, 1, 1]));
    assert_eq!(first["robots"][1], serde_json::json!({
        "id": 2, "node": 0, "state": "potentialMin", "dir": "right", "rule": "M6", "moved": true
    }));

    let last: Value = serde_json::from_str(lines[15]).unwrap();
    assert_eq!(last["robots"][0]["rule"], "terminated");
    assert_eq!(last["robots"][1]["rule"], "Term1");
}

#[test]
fn round_trips_and_tolerates_blank_lines() {
    let c = common::case(gdg_core::ring::DynClass::Cot, 3);
    let trace = common::execute(&c).trace;
    let spaced = trace.to_jsonl().replace('\n', "\n\n");
    assert_eq!(Trace::read_jsonl(spaced.as_bytes()).unwrap(), trace);
    assert_eq!(trace.header.class_claim, Some(gdg_core::ring::DynClass::Cot));
    assert_eq!(trace.header.seed, Some(3));
}

#[test]
fn reports_bad_lines() {
    assert!(matches!(Trace::read_jsonl(&b""[..]), Err(TraceError::MissingHeader)));
    let c = common::case(gdg_core::ring::DynClass::St, 1);
    let mut text = common::execute(&c).trace.to_jsonl();
    text.push_str("{\"round\": 1}\n");
    let lines = text.lines().count();
    match Trace::read_jsonl(text.as_bytes()) {
        Err(TraceError::Parse { line, .. }) => assert_eq!(line, lines),
        other => panic!("expected a parse error, got {other:?}"),
    }
}
