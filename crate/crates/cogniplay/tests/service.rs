use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use cogniplay::service::{router, AppState, ServiceConfig};
use cogniplay::store::SessionStore;
use cogniplay_core::{aggregate_ratings, Guess, Quality};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

struct Harness {
    _dir: TempDir,
    app: Arc<AppState>,
}

impl Harness {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        let cfg = ServiceConfig {
            seed: 7,
            iterations: Some(200),
            ..Default::default()
        };
        Harness {
            app: AppState::new(store, cfg).unwrap(),
            _dir: dir,
        }
    }

    fn router(&self) -> Router {
        router(self.app.clone())
    }

    async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let req = Request::builder().method(method).uri(uri);
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.router().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let v = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap()
        };
        (status, v)
    }

    async fn create(&self, side: &str, blind: bool) -> Value {
        let (s, v) = self
            .call(
                Method::POST,
                "/api/sessions",
                Some(
                    json!({"game": "ttt", "preset": "vanilla", "human_side": side, "blind": blind}),
                ),
            )
            .await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        v
    }

    async fn play(&self, id: &str, mv: &str) -> (StatusCode, Value) {
        self.call(
            Method::POST,
            &format!("/api/sessions/{id}/moves"),
            Some(json!({"move": mv, "elapsed_ms": 1200})),
        )
        .await
    }

    async fn agent_game(&self, seed: u64) -> String {
        let (s, v) = self
            .call(
                Method::POST,
                "/api/agent-games",
                Some(json!({"game": "ttt", "preset": "vanilla", "seed": seed})),
            )
            .await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        assert_eq!(v["state"]["terminal"], json!(true));
        v["session_id"].as_str().unwrap().to_string()
    }
}

fn full_scores() -> Value {
    json!({"human_likeness": 2, "aggressiveness": 4, "tactical_depth": 5, "traps": 1})
}

fn moves(v: &Value) -> Vec<String> {
    v["moves"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m.as_str().unwrap().to_string())
        .collect()
}

fn free_cell(state: &Value) -> String {
    let taken = moves(state);
    ["b2", "a1", "c3", "a3", "c1", "a2", "b1", "b3", "c2"]
        .iter()
        .find(|c| !taken.iter().any(|t| t == *c))
        .unwrap()
        .to_string()
}

#[tokio::test]
async fn health() {
    let h = Harness::new();
    let (s, v) = h.call(Method::GET, "/api/health", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["ok"], json!(true));
}

#[tokio::test]
async fn human_first_session_starts_empty() {
    let h = Harness::new();
    let v = h.create("P1", false).await;
    assert!(v["session_id"].as_str().unwrap().len() >= 32);
    assert_eq!(v["state"]["moves"], json!([]));
    assert_eq!(v["state"]["to_move"], json!("P1"));
    assert_eq!(v["state"]["spec"], json!({"cols": 3, "rows": 3, "k": 3}));
    assert!(v.get("agent_move").is_none());
}

#[tokio::test]
async fn human_second_session_opens_with_agent_move() {
    let h = Harness::new();
    let v = h.create("P2", false).await;
    assert_eq!(moves(&v["state"]).len(), 1);
    assert_eq!(v["agent_move"], v["state"]["moves"][0]);
    assert_eq!(v["state"]["to_move"], json!("P2"));
    assert!(v["meta"]["good_count"].as_u64().unwrap() >= 1);
}

#[tokio::test]
async fn ordinary_move_gets_a_reply() {
    let h = Harness::new();
    let v = h.create("P1", false).await;
    let id = v["session_id"].as_str().unwrap();
    let (s, r) = h.play(id, "b2").await;
    assert_eq!(s, StatusCode::OK, "{r}");
    let m = moves(&r["state"]);
    assert_eq!(m.len(), 2);
    assert_eq!(m[0], "b2");
    assert_eq!(r["agent_move"].as_str().unwrap(), m[1]);
    assert!(r["meta"]["certain"].is_boolean());

    let (s, g) = h
        .call(Method::GET, &format!("/api/sessions/{id}"), None)
        .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(g["state"], r["state"]);
}

#[tokio::test]
async fn blind_sessions_hide_agent_internals() {
    let h = Harness::new();
    let v = h.create("P2", true).await;
    assert!(v.get("meta").is_none());
    let id = v["session_id"].as_str().unwrap();
    let (s, r) = h.play(id, &free_cell(&v["state"])).await;
    assert_eq!(s, StatusCode::OK);
    assert!(r.get("meta").is_none());
    assert!(r.get("agent_move").is_some());
}

#[tokio::test]
async fn occupied_cell_is_rejected_without_changing_state() {
    let h = Harness::new();
    let v = h.create("P1", false).await;
    let id = v["session_id"].as_str().unwrap();
    let (_, r) = h.play(id, "b2").await;
    let (s, e) = h.play(id, "b2").await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(e["error"].is_string() && e["message"].is_string(), "{e}");
    let (s, e) = h.play(id, "z9").await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{e}");
    let (_, g) = h
        .call(Method::GET, &format!("/api/sessions/{id}"), None)
        .await;
    assert_eq!(g["state"], r["state"]);
}

#[tokio::test]
async fn game_runs_to_completion_and_then_refuses_moves() {
    let h = Harness::new();
    let v = h.create("P1", false).await;
    let id = v["session_id"].as_str().unwrap().to_string();
    let mut state = v["state"].clone();
    while state["terminal"] != json!(true) {
        let (s, r) = h.play(&id, &free_cell(&state)).await;
        assert_eq!(s, StatusCode::OK, "{r}");
        let n = moves(&r["state"]).len();
        if r["state"]["terminal"] == json!(true) && r.get("agent_move").is_none() {
            assert_eq!(n % 2, 1, "game ended on the human's move");
        }
        state = r["state"].clone();
    }
    assert!(state["result"]["value"].is_i64());
    let (s, _) = h.play(&id, "a1").await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test]
async fn winning_human_move_gets_no_reply() {
    let h = Harness::new();
    let v = h.create("P1", false).await;
    let id = v["session_id"].as_str().unwrap().to_string();
    // Write a near-won position straight into the store so the agent's
    // replies cannot interfere; a fresh service reloads it from disk.
    let dir = h.app.store().dir().to_path_buf();
    let path = dir.join(format!("{id}.jsonl"));
    let mut text = std::fs::read_to_string(&path).unwrap();
    for (mv, who) in [("a1", "P1"), ("a3", "P2"), ("b1", "P1"), ("b3", "P2")] {
        text.push_str(
            &json!({"v": 1, "kind": "move", "action": mv, "mover": who, "elapsed_ms": 0})
                .to_string(),
        );
        text.push('\n');
    }
    std::fs::write(&path, text).unwrap();
    let app = AppState::new(SessionStore::open(&dir).unwrap(), ServiceConfig::default()).unwrap();
    let h2 = Harness {
        _dir: tempfile::tempdir().unwrap(),
        app,
    };

    let (s, r) = h2.play(&id, "c1").await;
    assert_eq!(s, StatusCode::OK, "{r}");
    assert!(r.get("agent_move").is_none());
    assert_eq!(r["state"]["terminal"], json!(true));
    assert_eq!(r["state"]["result"]["winner"], json!("P1"));
    assert_eq!(moves(&r["state"]).len(), 5);
}

#[tokio::test]
async fn not_found_and_conflicts() {
    let h = Harness::new();
    let (s, e) = h.play("no-such-session", "a1").await;
    assert_eq!(s, StatusCode::NOT_FOUND, "{e}");
    let (s, _) = h.call(Method::GET, "/api/sessions/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let v = h.create("P2", false).await;
    let id = v["session_id"].as_str().unwrap().to_string();
    let (s, _) = h
        .call(
            Method::POST,
            "/api/sessions",
            Some(json!({"game": "ttt", "preset": "vanilla", "human_side": "P3"})),
        )
        .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = h
        .call(
            Method::POST,
            "/api/sessions",
            Some(json!({"game": "go", "preset": "vanilla"})),
        )
        .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let agent = h.agent_game(1).await;
    let (s, _) = h.play(&agent, "a1").await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = h
        .call(
            Method::POST,
            &format!("/api/review/{id}/rating"),
            Some(json!({"rater_id": "r", "guess": "human", "scores": full_scores()})),
        )
        .await;
    assert_eq!(
        s,
        StatusCode::CONFLICT,
        "unfinished sessions cannot be rated"
    );
}

#[tokio::test]
async fn empty_review_queue_is_no_content() {
    let h = Harness::new();
    let (s, v) = h.call(Method::GET, "/api/review/next", None).await;
    assert_eq!(s, StatusCode::NO_CONTENT);
    assert_eq!(v, Value::Null);
}

#[tokio::test]
async fn review_payload_hides_who_played() {
    let h = Harness::new();
    let id = h.agent_game(3).await;
    let (s, v) = h.call(Method::GET, "/api/review/next?rater=r1", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["record_id"], json!(id));
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["moves", "record_id", "spec"]);
    let text = v.to_string();
    for word in [
        "participant",
        "certain",
        "agent",
        "human",
        "preset",
        "elapsed",
    ] {
        assert!(!text.contains(word), "{word} leaked: {text}");
    }
}

#[tokio::test]
async fn ratings_are_validated_and_aggregated() {
    let h = Harness::new();
    let id = h.agent_game(5).await;
    let url = format!("/api/review/{id}/rating");

    let bad = json!({"rater_id": "r1", "guess": "agent", "scores": {"human_likeness": 6}});
    let (s, e) = h.call(Method::POST, &url, Some(bad)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["error"], json!("invalid-scores"));
    let bad = json!({"rater_id": "r1", "guess": "agent", "scores": {"charm": 3}});
    let (s, _) = h.call(Method::POST, &url, Some(bad)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = h
        .call(
            Method::POST,
            "/api/review/missing/rating",
            Some(json!({"rater_id": "r1", "guess": "agent", "scores": full_scores()})),
        )
        .await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (s, _) = h
        .call(
            Method::POST,
            &url,
            Some(json!({"rater_id": "r1", "guess": "agent", "scores": {"traps": 2}})),
        )
        .await;
    assert_eq!(
        s,
        StatusCode::UNPROCESSABLE_ENTITY,
        "all qualities are required"
    );

    let scores = full_scores();
    for rater in ["r1", "r2"] {
        let ok = json!({"rater_id": rater, "guess": "agent", "scores": scores});
        let (s, _) = h.call(Method::POST, &url, Some(ok.clone())).await;
        assert_eq!(s, StatusCode::NO_CONTENT);
        let (s, _) = h.call(Method::POST, &url, Some(ok)).await;
        assert_eq!(s, StatusCode::NO_CONTENT, "repeat submission is accepted");
    }

    let (s, _) = h.call(Method::GET, "/api/review/next?rater=r1", None).await;
    assert_eq!(
        s,
        StatusCode::NO_CONTENT,
        "r1 already rated the only record"
    );
    let (s, _) = h.call(Method::GET, "/api/review/next?rater=r3", None).await;
    assert_eq!(s, StatusCode::OK);

    let store = h.app.store();
    let rec = store.load(&id).unwrap();
    assert_eq!(rec.ratings.len(), 2, "one rating per rater");
    let ratings: Vec<_> = store
        .load_all()
        .unwrap()
        .into_iter()
        .flat_map(|r| r.ratings)
        .collect();
    let report = aggregate_ratings(&ratings, &store.truth()).unwrap();
    assert_eq!(report.n, 2);
    assert_eq!(report.discrimination_accuracy, 1.0);
    let tactical = &report.stats[&Quality::TacticalDepth][&Guess::Agent];
    assert_eq!((tactical.mean, tactical.n), (5.0, 2));
}

#[tokio::test]
async fn review_draws_from_both_classes() {
    let h = Harness::new();
    for seed in 0..2 {
        h.agent_game(seed).await;
    }
    let v = h.create("P1", false).await;
    let human = v["session_id"].as_str().unwrap().to_string();
    let mut state = v["state"].clone();
    while state["terminal"] != json!(true) {
        let (_, r) = h.play(&human, &free_cell(&state)).await;
        state = r["state"].clone();
    }
    let mut human_picks = 0;
    for i in 0..60 {
        let (s, v) = h
            .call(Method::GET, &format!("/api/review/next?rater=x{i}"), None)
            .await;
        assert_eq!(s, StatusCode::OK);
        if v["record_id"] == json!(human) {
            human_picks += 1;
        }
    }
    // one human record against two agent records, classes drawn 50/50
    assert!((15..=45).contains(&human_picks), "{human_picks}");
}

#[tokio::test]
async fn sessions_are_reloaded_after_restart() {
    let h = Harness::new();
    let v = h.create("P1", false).await;
    let id = v["session_id"].as_str().unwrap().to_string();
    let (_, r) = h.play(&id, "b2").await;
    let dir = h.app.store().dir().to_path_buf();
    let app = AppState::new(
        SessionStore::open(&dir).unwrap(),
        ServiceConfig {
            iterations: Some(200),
            ..Default::default()
        },
    )
    .unwrap();
    let h2 = Harness {
        _dir: tempfile::tempdir().unwrap(),
        app,
    };
    let (s, g) = h2
        .call(Method::GET, &format!("/api/sessions/{id}"), None)
        .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(g["state"], r["state"]);
    let (s, _) = h2.play(&id, &free_cell(&g["state"])).await;
    assert_eq!(s, StatusCode::OK);
}

#[tokio::test]
async fn agent_game_is_stored_with_certainty_flags() {
    let h = Harness::new();
    let id = h.agent_game(9).await;
    let rec = h.app.store().load(&id).unwrap();
    assert!(rec.is_finished());
    assert!(rec.moves.iter().all(|m| m.certain.is_some()));
    assert_eq!(rec.header.human_side, None);
}

#[tokio::test]
async fn cors_headers_present() {
    let h = Harness::new();
    let req = Request::builder()
        .uri("/api/health")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = h.router().oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "*");
}
