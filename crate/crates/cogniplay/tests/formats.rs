use cogniplay::formats::{
    checkpoint_name, dataset_line, game_spec, load_weights, read_dataset, save_weights,
    weights_from_json, weights_to_json, AgentFile, SpecJson, StateJson,
};
use cogniplay_core::{
    Action, AgentConfig, Constraint, Feature, FeatureSet, GameSpec, GameState, MoveEntry, Relative,
    Rules,
};
use serde_json::json;

fn ttt() -> GameSpec {
    GameSpec::by_name("ttt").unwrap()
}

fn a(s: &str) -> Action {
    s.parse().unwrap()
}

#[test]
fn weights_round_trip_preserves_everything() {
    let mut fs = FeatureSet::init_atomic(2, 500).unwrap();
    for i in 0..fs.len() {
        fs.set_weight(i, (i as f64 * 0.37).sin());
    }
    let pair = Feature::new(
        vec![
            Constraint::new(0, 1, Relative::Friend),
            Constraint::new(1, 0, Relative::Foe),
        ],
        -0.25,
        3,
        Some((4, 9)),
    );
    let mut features = fs.features().to_vec();
    features.push(pair);
    let fs = FeatureSet::from_features(2, 500, features).unwrap();

    let text = weights_to_json(&fs);
    let back = weights_from_json(&text).unwrap();
    assert_eq!(back.len(), fs.len());
    assert_eq!(back.radius(), 2);
    assert_eq!(back.max_features(), 500);
    for (x, y) in fs.features().iter().zip(back.features()) {
        assert_eq!(x.constraints(), y.constraints());
        assert_eq!(x.weight.to_bits(), y.weight.to_bits());
        assert_eq!(x.generation, y.generation);
        assert_eq!(x.parents, y.parents);
    }
    assert_eq!(weights_to_json(&back), text);

    let state = GameState::from_moves(ttt(), &[a("b2"), a("a1")]).unwrap();
    assert_eq!(
        fs.policy(&state).unwrap().probs,
        back.policy(&state).unwrap().probs
    );
}

#[test]
fn weights_rejects_unknown_requirement() {
    let bad = r#"{"radius":2,"features":[{"constraints":[[0,1,"Q"]],"weight":0,"generation":0}]}"#;
    assert!(weights_from_json(bad).is_err());
}

#[test]
fn save_and_load_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let fs = FeatureSet::init_atomic(2, 100).unwrap();
    let path = dir.path().join(checkpoint_name(3));
    assert!(path.ends_with("weights_0003.json"));
    save_weights(&path, &fs).unwrap();
    assert_eq!(load_weights(&path).unwrap().len(), fs.len());
    assert!(!path.with_extension("tmp").exists());
}

#[test]
fn spec_and_state_json() {
    let gomoku = game_spec("gomoku").unwrap();
    let j = serde_json::to_value(SpecJson::from(gomoku)).unwrap();
    assert_eq!(j, json!({"cols": 15, "rows": 15, "k": 5}));
    let renju = game_spec("renju").unwrap();
    assert_eq!(renju.rules, Rules::Renju);
    let j = serde_json::to_value(SpecJson::from(renju)).unwrap();
    assert_eq!(j["rules"], json!("renju"));
    assert!(game_spec("chess").is_err());

    let s = GameState::from_moves(ttt(), &[a("a1"), a("c3"), a("b2")]).unwrap();
    let sj = StateJson::from_state(&s);
    let text = serde_json::to_string(&sj).unwrap();
    assert_eq!(
        text,
        r#"{"spec":{"cols":3,"rows":3,"k":3},"moves":["a1","c3","b2"]}"#
    );
    let back: StateJson = serde_json::from_str(&text).unwrap();
    assert_eq!(back.replay().unwrap().cells(), s.cells());

    let illegal: StateJson =
        serde_json::from_str(r#"{"spec":{"cols":3,"rows":3,"k":3},"moves":["a1","a1"]}"#).unwrap();
    assert!(illegal.replay().is_err());
}

#[test]
fn agent_file_overrides_only_what_it_names() {
    let f = AgentFile::from_value(
        &json!({"game": "gomoku", "preset": "human", "search": {"iterations": 123}}),
        None,
        None,
    )
    .unwrap();
    let human = AgentConfig::human(&f.spec);
    assert_eq!(f.spec, game_spec("gomoku").unwrap());
    assert_eq!(f.config.search.iterations, 123);
    assert_eq!(f.config.search.node_cap, human.search.node_cap);
    assert_eq!(f.config.search.depth_cap, human.search.depth_cap);
    assert_eq!(f.config.features, human.features);

    let err = AgentFile::from_value(&json!({"serch": {}}), None, None).unwrap_err();
    assert!(err.to_string().contains("serch"));
    assert!(AgentFile::from_value(&json!({"preset": "grandmaster"}), None, None).is_err());
    assert!(
        AgentFile::from_value(&json!({"search": {"iterations": 0}}), None, None).is_err(),
        "zero budget must be rejected"
    );
}

#[test]
fn agent_file_resolves_relative_weights() {
    let dir = tempfile::tempdir().unwrap();
    let fs = FeatureSet::init_atomic(2, 100).unwrap();
    save_weights(&dir.path().join("w.json"), &fs).unwrap();
    let cfg = dir.path().join("agent.json");
    std::fs::write(&cfg, r#"{"game":"ttt","weights":"w.json"}"#).unwrap();
    let f = AgentFile::load(&cfg, None).unwrap();
    assert_eq!(
        f.weights.as_deref(),
        Some(dir.path().join("w.json").as_path())
    );
    assert_eq!(f.features().unwrap().len(), fs.len());
}

#[test]
fn dataset_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let entries = [
        MoveEntry {
            spec: ttt(),
            moves: vec![a("a1")],
            played: a("b2"),
            strength: Some("club".into()),
        },
        MoveEntry {
            spec: ttt(),
            moves: vec![],
            played: a("c3"),
            strength: None,
        },
    ];
    let mut text: String = entries.iter().map(|e| dataset_line(e) + "\n").collect();
    text.push_str("\n{\"moves\":[\"b2\"],\"played\":\"a1\"}\n");
    let path = dir.path().join("d.jsonl");
    std::fs::write(&path, text).unwrap();
    let d = read_dataset(&path, ttt()).unwrap();
    assert_eq!(d.entries.len(), 3);
    assert_eq!(d.entries[..2], entries[..]);
    assert_eq!(d.entries[2].moves, vec![a("b2")]);

    std::fs::write(&path, "{\"moves\":[],\"played\":\"a1\"}\nnot json\n").unwrap();
    let err = format!("{:#}", read_dataset(&path, ttt()).unwrap_err());
    assert!(err.contains(":2"), "{err}");
}
