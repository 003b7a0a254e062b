use dynq_web::{preset_graph, preset_spec, Demo};

fn preset(p: &str) -> Demo {
    Demo::new(p, &preset_graph(p).unwrap(), &preset_spec(p).unwrap()).unwrap()
}

#[test]
fn rpq_preset_tracks_edges_and_answers() {
    let mut d = preset("rpq");
    assert_eq!(d.exec("ins a 0 1").unwrap(), "");
    assert_eq!(d.edges(), vec![0, 0, 0, 1]);
    assert_eq!(d.exec("query 0").unwrap(), "(0,0)\n(0,1)");
    // insert-only
    assert!(d.exec("del a 0 1").is_err());
    assert_eq!(d.edges(), vec![0, 0, 0, 1]);
}

#[test]
fn failed_line_leaves_demo_unchanged() {
    let mut d = preset("cfl");
    d.exec("ins a 0 1").unwrap();
    d.exec("ins b 1 0").unwrap_err();
    assert_eq!(d.edges(), vec![0, 0, 0, 1]);
    assert!(d.exec("del a 2 3").is_err());
    assert!(d.exec("jump").is_err());
}

#[test]
fn neps_flip_updates_rules_and_answer() {
    let mut d = preset("neps");
    assert_eq!(d.factors(), 2);
    assert_eq!(d.rules(), vec!["10", "01"]);
    d.exec("ins a 0 1 @0").unwrap();
    d.exec("ins a 0 1 @1").unwrap();
    assert_eq!(d.edges(), vec![0, 0, 0, 1, 1, 0, 0, 1]);
    assert!(d.exec("query 0 0").unwrap().contains("((0,0),(1,1))"));
    d.exec("flip 1 1").unwrap();
    assert_eq!(d.rules(), vec!["10", "00"]);
    assert!(!d.exec("query 0 0").unwrap().contains("((0,0),(1,1))"));
    assert!(d.exec("flip 5 0").is_err());
}

#[test]
fn unsupported_program_is_rejected() {
    assert!(Demo::new("tc", &preset_graph("rpq").unwrap(), "").is_err());
    assert!(preset_graph("tc").is_none());
}
