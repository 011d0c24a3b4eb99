use loqe::file::{InterferometerSpec, Request, StateSpec};
use loqe::resolve::Resolver;
use loqe::ScenarioFile;

fn worked_text() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/worked.json")).unwrap()
}

#[test]
fn parse_serialize_parse_is_stable() {
    let first = ScenarioFile::parse(&worked_text()).unwrap();
    let text = first.to_json();
    let second = ScenarioFile::parse(&text).unwrap();
    assert_eq!(first, second);
    assert_eq!(text, second.to_json());
}

#[test]
fn requests_keep_their_order() {
    let f = ScenarioFile::parse(&worked_text()).unwrap();
    assert_eq!(f.requests[0].name(), "psi-d-2");
    assert!(matches!(f.request("identity").unwrap(), Request::Scenario(_)));
    assert!(f.request("nope").is_err());
}

#[test]
fn duplicate_request_names_are_rejected() {
    let text = r#"{"version": 1, "truncation": {"cutoff": 1}, "requests": [
        {"mixture_table": {"name": "a", "values": [0.5]}},
        {"mixture_table": {"name": "a", "values": [0.25]}}]}"#;
    assert!(ScenarioFile::parse(text).unwrap_err().to_string().contains("duplicate"));
}

#[test]
fn unknown_fields_are_rejected_at_every_level() {
    for text in [
        r#"{"version": 1, "truncation": {"cutoff": 1}, "extra": 0}"#,
        r#"{"version": 1, "truncation": {"cutoff": 1}, "tolerances": {"psd": 1e-9}}"#,
        r#"{"version": 1, "truncation": {"cutoff": 1}, "states": {"a": {"squeezed": 0.1}}}"#,
        r#"{"version": 1, "truncation": {"cutoff": 1},
            "interferometers": {"b": {"beamsplitter": {"modes": 2, "i": 0, "j": 1, "angle": 0.1}}}}"#,
    ] {
        assert!(ScenarioFile::parse(text).is_err(), "{text}");
    }
}

#[test]
fn references_resolve_and_cycles_stop() {
    let f = ScenarioFile::parse(&worked_text()).unwrap();
    let r = Resolver::new(&f, None);
    let s = r.state(&StateSpec::Ref("psi_prime".into())).unwrap();
    assert_eq!(s.num_modes(), 2);
    assert!(r.state(&StateSpec::Ref("missing".into())).is_err());

    let looped = r#"{"version": 1, "truncation": {"cutoff": 1},
        "states": {"a": {"ref": "b"}, "b": {"ref": "a"}}}"#;
    let f = ScenarioFile::parse(looped).unwrap();
    let err = Resolver::new(&f, None).state(&StateSpec::Ref("a".into())).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn sequences_apply_first_element_first() {
    let f = ScenarioFile::parse(r#"{"version": 1, "truncation": {"cutoff": 1}}"#).unwrap();
    let r = Resolver::new(&f, None);
    let a = InterferometerSpec::Beamsplitter(loqe::file::Beamsplitter {
        modes: 2,
        i: 0,
        j: 1,
        theta: 0.3,
        phi: 0.0,
    });
    let b = InterferometerSpec::Phase(loqe::file::Phase { modes: 2, mode: 0, phi: 0.7 });
    let seq = r.interferometer(&InterferometerSpec::Sequence(vec![a.clone(), b.clone()])).unwrap();
    let want = r.interferometer(&b).unwrap().matrix() * r.interferometer(&a).unwrap().matrix();
    assert!((seq.matrix() - want).norm() < 1e-15);
}

#[test]
fn cutoff_override_changes_dimension() {
    let f = ScenarioFile::parse(&worked_text()).unwrap();
    let s = Resolver::new(&f, Some(3)).state(&StateSpec::Ref("psi".into())).unwrap();
    assert_eq!(s.matrix().nrows(), 16);
}
