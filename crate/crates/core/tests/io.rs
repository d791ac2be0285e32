use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zxrl_core::io::{from_json, read_jsonl, to_json, write_jsonl, IoError};
use zxrl_core::iso::isomorphic;
use zxrl_core::sampler::{sample_diagram, SamplerConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_is_isomorphic(seed in any::<u64>()) {
        let d = sample_diagram(&SamplerConfig::default(), &mut ChaCha8Rng::seed_from_u64(seed));
        let back = from_json(&to_json(&d)).unwrap();
        prop_assert!(isomorphic(&back, &d));
        prop_assert_eq!(to_json(&back), to_json(&d));
    }
}

#[test]
fn jsonl_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ds: Vec<_> = (0..5).map(|_| sample_diagram(&SamplerConfig::default(), &mut rng)).collect();
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &ds).unwrap();
    assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 5);
    let back = read_jsonl(&buf[..]).unwrap();
    assert_eq!(back.len(), 5);
    for (a, b) in back.iter().zip(&ds) {
        assert!(isomorphic(a, b));
    }
}

#[test]
fn bad_line_reports_line_number() {
    let text = "{\"version\":1,\"nodes\":[],\"edges\":[],\"inputs\":[],\"outputs\":[]}\nnot json\n";
    match read_jsonl(text.as_bytes()) {
        Err(IoError::Line { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn rejected_documents() {
    let unknown = r#"{"version":1,"nodes":[{"id":0,"kind":"Q"}],"edges":[],"inputs":[],"outputs":[]}"#;
    assert!(matches!(from_json(unknown), Err(IoError::UnknownKind { .. })));
    let dangling = r#"{"version":1,"nodes":[{"id":0,"kind":"Z"}],"edges":[[0,5]],"inputs":[],"outputs":[]}"#;
    assert!(matches!(from_json(dangling), Err(IoError::DanglingEdge(0, 5))));
    let version = r#"{"version":2,"nodes":[],"edges":[],"inputs":[],"outputs":[]}"#;
    assert!(matches!(from_json(version), Err(IoError::Version(2))));
}
