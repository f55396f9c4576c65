//! HTTP/JSON game service: live play against the agent, agent-vs-agent
//! records and the blind review queue.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use anyhow::Context;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cogniplay_core::{
    rng, Action, Agent, AgentConfig, FeatureSet, GameSpec, GameState, Guess, Player, Quality,
    RatingRecord,
};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::formats::{game_spec, SpecJson};
use crate::store::{
    new_session_id, now_utc, parse_player, Participant, SessionHeader, SessionRecord, SessionStore,
    StoredMove, StoredResult,
};

#[derive(Clone, Debug, Default)]
pub struct ServiceConfig {
    pub seed: u64,
    /// Overrides the preset's search budget when set.
    pub iterations: Option<u32>,
    /// Weights checkpoint per game name; games without one use fresh
    /// atomic features.
    pub weights: BTreeMap<String, PathBuf>,
    pub static_dir: Option<PathBuf>,
}

struct Weights {
    features: Arc<FeatureSet>,
    id: Option<String>,
}

type SessionLock = Arc<tokio::sync::Mutex<SessionRecord>>;

pub struct AppState {
    store: SessionStore,
    sessions: Mutex<HashMap<String, SessionLock>>,
    weights: HashMap<String, Weights>,
    cfg: ServiceConfig,
    review_rng: Mutex<rng::Rng>,
}

impl AppState {
    pub fn new(store: SessionStore, cfg: ServiceConfig) -> anyhow::Result<Arc<Self>> {
        let mut weights = HashMap::new();
        for (game, path) in &cfg.weights {
            let spec = game_spec(game)?;
            let fs = crate::formats::load_weights(path)?;
            let id = path.file_name().map(|n| n.to_string_lossy().into_owned());
            weights.insert(
                spec.name(),
                Weights {
                    features: Arc::new(fs),
                    id,
                },
            );
        }
        Ok(Arc::new(AppState {
            store,
            sessions: Mutex::new(HashMap::new()),
            weights,
            review_rng: Mutex::new(rng::from_seed(rng::derive(cfg.seed, 1))),
            cfg,
        }))
    }

    pub fn store(&self) -> &SessionStore {
        &self.store
    }

    fn features_for(
        &self,
        spec: &GameSpec,
        preset: &str,
    ) -> Result<(Arc<FeatureSet>, Option<String>), ApiError> {
        if let Some(w) = self.weights.get(&spec.name()) {
            return Ok((w.features.clone(), w.id.clone()));
        }
        let cfg = agent_config(spec, preset, None)?;
        let fs = cfg.initial_features().map_err(ApiError::internal)?;
        Ok((Arc::new(fs), None))
    }

    fn session(&self, id: &str) -> Result<SessionLock, ApiError> {
        let mut map = self.sessions.lock().unwrap();
        if let Some(s) = map.get(id) {
            return Ok(s.clone());
        }
        if !self.store.contains(id) {
            return Err(ApiError::not_found(format!("no session '{id}'")));
        }
        // every writer goes through this cache, so nothing else is
        // appending to the file right now
        let rec = self.store.recover(id).map_err(ApiError::internal)?;
        let lock = Arc::new(tokio::sync::Mutex::new(rec));
        map.insert(id.to_string(), lock.clone());
        Ok(lock)
    }

    fn session_seed(&self, id: &str, ply: usize) -> u64 {
        let h = id.bytes().fold(0u64, |h, b| rng::mix(h ^ b as u64));
        rng::derive(rng::derive(self.cfg.seed, h), ply as u64)
    }
}

fn agent_config(
    spec: &GameSpec,
    preset: &str,
    iterations: Option<u32>,
) -> Result<AgentConfig, ApiError> {
    let mut cfg = AgentConfig::preset(preset, spec)
        .ok_or_else(|| ApiError::bad_request(format!("unknown preset '{preset}'")))?;
    if let Some(b) = iterations {
        cfg.search.iterations = b;
    }
    Ok(cfg)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(m: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad-request", m)
    }

    fn not_found(m: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", m)
    }

    fn conflict(m: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", m)
    }

    fn unprocessable(code: &'static str, m: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, m)
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        log::error!("{e:#}");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": self.code, "message": self.message });
        (self.status, Json(body)).into_response()
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(e: anyhow::Error) -> Self {
        ApiError::internal(format!("{e:#}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub spec: SpecJson,
    pub moves: Vec<Action>,
    pub to_move: Player,
    pub terminal: bool,
    pub result: Option<StoredResult>,
}

impl StateView {
    fn of(state: &GameState) -> Self {
        StateView {
            spec: (*state.spec()).into(),
            moves: state.history().to_vec(),
            to_move: state.to_move(),
            terminal: state.is_terminal(),
            result: state.is_terminal().then(|| state.outcome().into()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveMeta {
    pub certain: bool,
    pub good_count: usize,
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub game: String,
    pub preset: String,
    #[serde(default = "default_side")]
    pub human_side: String,
    #[serde(default)]
    pub blind: bool,
}

fn default_side() -> String {
    "P1".into()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionResponse {
    pub session_id: String,
    pub state: StateView,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_move: Option<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<MoveMeta>,
}

#[derive(Debug, Deserialize)]
pub struct MoveRequest {
    #[serde(rename = "move")]
    pub action: String,
    #[serde(default)]
    pub elapsed_ms: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MoveResponse {
    pub state: StateView,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_move: Option<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<MoveMeta>,
}

#[derive(Debug, Deserialize)]
pub struct CreateAgentGame {
    pub game: String,
    pub preset: String,
    /// Preset of the second player, defaulting to `preset`.
    pub preset_p2: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

/// What a reviewer sees: the game and nothing about who played it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewItem {
    pub record_id: String,
    pub spec: SpecJson,
    pub moves: Vec<Action>,
}

#[derive(Debug, Deserialize)]
pub struct ReviewQuery {
    pub rater: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct RatingRequest {
    #[serde(default)]
    pub rater_id: Option<String>,
    pub scores: BTreeMap<String, i64>,
    pub guess: Guess,
}

const ANONYMOUS: &str = "anonymous";

pub fn router(state: Arc<AppState>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods(Any)
        .allow_headers(Any);
    let static_dir = state.cfg.static_dir.clone();
    let api = Router::new()
        .route(
            "/api/health",
            get(|| async { Json(serde_json::json!({ "ok": true })) }),
        )
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/moves", post(post_move))
        .route("/api/agent-games", post(create_agent_game))
        .route("/api/review/next", get(review_next))
        .route("/api/review/{id}/rating", post(post_rating))
        .with_state(state)
        .layer(cors);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(addr: std::net::SocketAddr, state: Arc<AppState>) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

struct AgentReply {
    action: Action,
    certain: bool,
    good_count: usize,
    elapsed_ms: u64,
}

async fn agent_reply(
    app: &Arc<AppState>,
    rec: &SessionRecord,
    state: &GameState,
) -> Result<AgentReply, ApiError> {
    let spec = *state.spec();
    let cfg = agent_config(&spec, &rec.header.preset, app.cfg.iterations)?;
    let (fs, _) = app.features_for(&spec, &rec.header.preset)?;
    let seed = app.session_seed(rec.id(), state.stone_count());
    let state = state.clone();
    tokio::task::spawn_blocking(move || {
        let start = Instant::now();
        let d = Agent::new(&fs, cfg).decide(&state, seed)?;
        Ok::<_, cogniplay_core::Error>(AgentReply {
            action: d.action,
            certain: d.certain,
            good_count: d.good.len(),
            elapsed_ms: start.elapsed().as_millis() as u64,
        })
    })
    .await
    .map_err(ApiError::internal)?
    .map_err(ApiError::internal)
}

/// Plays the agent's move, stores it and closes the session if it ends the
/// game.
async fn play_agent(
    app: &Arc<AppState>,
    rec: &mut SessionRecord,
    state: &mut GameState,
) -> Result<(Action, MoveMeta), ApiError> {
    let reply = agent_reply(app, rec, state).await?;
    let mover = state.to_move();
    state.play(reply.action).map_err(ApiError::internal)?;
    app.store.append_move(
        rec,
        StoredMove {
            action: reply.action,
            mover,
            certain: Some(reply.certain),
            elapsed_ms: reply.elapsed_ms,
        },
    )?;
    if state.is_terminal() {
        app.store.finish(rec, state.outcome().into())?;
    }
    Ok((
        reply.action,
        MoveMeta {
            certain: reply.certain,
            good_count: reply.good_count,
        },
    ))
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    Json(req): Json<CreateSession>,
) -> Result<(StatusCode, Json<SessionResponse>), ApiError> {
    let spec = game_spec(&req.game).map_err(|e| ApiError::bad_request(e.to_string()))?;
    agent_config(&spec, &req.preset, None)?;
    let human_side =
        parse_player(&req.human_side).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let (_, weights_id) = app.features_for(&spec, &req.preset)?;
    let header = SessionHeader {
        id: new_session_id(),
        created_at: now_utc(),
        spec: spec.into(),
        preset: req.preset,
        weights_id,
        participant: Participant::Human,
        human_side: Some(human_side),
        blind: req.blind,
    };
    let mut rec = app.store.create(header)?;
    let mut state = GameState::new(spec);
    let (mut agent_move, mut meta) = (None, None);
    if human_side == Player::P2 {
        let (a, m) = play_agent(&app, &mut rec, &mut state).await?;
        agent_move = Some(a);
        meta = (!rec.header.blind).then_some(m);
    }
    let id = rec.id().to_string();
    app.sessions
        .lock()
        .unwrap()
        .insert(id.clone(), Arc::new(tokio::sync::Mutex::new(rec)));
    Ok((
        StatusCode::CREATED,
        Json(SessionResponse {
            session_id: id,
            state: StateView::of(&state),
            agent_move,
            meta,
        }),
    ))
}

async fn get_session(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<SessionResponse>, ApiError> {
    let lock = app.session(&id)?;
    let rec = lock.lock().await;
    let state = rec.replay()?;
    Ok(Json(SessionResponse {
        session_id: id,
        state: StateView::of(&state),
        agent_move: None,
        meta: None,
    }))
}

async fn post_move(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<MoveRequest>,
) -> Result<Json<MoveResponse>, ApiError> {
    let lock = app.session(&id)?;
    let mut rec = lock.lock().await;
    if rec.header.participant != Participant::Human {
        return Err(ApiError::conflict("not a human session"));
    }
    if rec.is_finished() {
        return Err(ApiError::conflict("session is finished"));
    }
    let mut state = rec.replay()?;
    if Some(state.to_move()) != rec.header.human_side {
        return Err(ApiError::conflict("not the human's turn"));
    }
    let action: Action = req
        .action
        .parse()
        .map_err(|e: cogniplay_core::Error| ApiError::unprocessable(e.code(), e.to_string()))?;
    let mover = state.to_move();
    state
        .play(action)
        .map_err(|e| ApiError::unprocessable(e.code(), e.to_string()))?;
    app.store.append_move(
        &mut rec,
        StoredMove {
            action,
            mover,
            certain: None,
            elapsed_ms: req.elapsed_ms,
        },
    )?;
    if state.is_terminal() {
        app.store.finish(&mut rec, state.outcome().into())?;
        return Ok(Json(MoveResponse {
            state: StateView::of(&state),
            agent_move: None,
            meta: None,
        }));
    }
    let (a, m) = play_agent(&app, &mut rec, &mut state).await?;
    Ok(Json(MoveResponse {
        state: StateView::of(&state),
        agent_move: Some(a),
        meta: (!rec.header.blind).then_some(m),
    }))
}

async fn create_agent_game(
    State(app): State<Arc<AppState>>,
    Json(req): Json<CreateAgentGame>,
) -> Result<(StatusCode, Json<SessionResponse>), ApiError> {
    let spec = game_spec(&req.game).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let p2 = req.preset_p2.clone().unwrap_or_else(|| req.preset.clone());
    let cfg_1 = agent_config(&spec, &req.preset, app.cfg.iterations)?;
    let cfg_2 = agent_config(&spec, &p2, app.cfg.iterations)?;
    let (fs, weights_id) = app.features_for(&spec, &req.preset)?;
    let header = SessionHeader {
        id: new_session_id(),
        created_at: now_utc(),
        spec: spec.into(),
        preset: req.preset.clone(),
        weights_id,
        participant: Participant::AgentVsAgent,
        human_side: None,
        blind: true,
    };
    let seed = rng::derive(app.cfg.seed, req.seed);
    let rec = app.store.create(header)?;
    let id = rec.id().to_string();
    let lock = Arc::new(tokio::sync::Mutex::new(rec));
    app.sessions
        .lock()
        .unwrap()
        .insert(id.clone(), lock.clone());
    let worker = app.clone();
    let rec = tokio::task::spawn_blocking(move || -> anyhow::Result<SessionRecord> {
        let mut rec = lock.blocking_lock();
        let mut agents = [Agent::new(&fs, cfg_1), Agent::new(&fs, cfg_2)];
        let mut state = GameState::new(spec);
        while !state.is_terminal() {
            let mover = state.to_move();
            let start = Instant::now();
            let d = agents[mover as usize]
                .decide(&state, rng::derive(seed, state.stone_count() as u64))?;
            state.play(d.action)?;
            worker.store.append_move(
                &mut rec,
                StoredMove {
                    action: d.action,
                    mover,
                    certain: Some(d.certain),
                    elapsed_ms: start.elapsed().as_millis() as u64,
                },
            )?;
        }
        worker.store.finish(&mut rec, state.outcome().into())?;
        Ok(rec.clone())
    })
    .await
    .map_err(ApiError::internal)??;
    let state = rec.replay()?;
    Ok((
        StatusCode::CREATED,
        Json(SessionResponse {
            session_id: id,
            state: StateView::of(&state),
            agent_move: None,
            meta: None,
        }),
    ))
}

async fn review_next(
    State(app): State<Arc<AppState>>,
    Query(q): Query<ReviewQuery>,
) -> Result<Response, ApiError> {
    let rater = q.rater.unwrap_or_else(|| ANONYMOUS.into());
    let mut pools: [Vec<SessionRecord>; 2] = [Vec::new(), Vec::new()];
    for entry in app.store.list().into_iter().filter(|e| e.finished) {
        let rec = match app.store.load(&entry.id) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("review queue: skipping {}: {e:#}", entry.id);
                continue;
            }
        };
        if rec.is_finished() && !rec.rated_by(&rater) {
            let k = match rec.header.participant {
                Participant::Human => 0,
                Participant::AgentVsAgent => 1,
            };
            pools[k].push(rec);
        }
    }
    let pick = {
        let mut r = app.review_rng.lock().unwrap();
        let class = match (pools[0].is_empty(), pools[1].is_empty()) {
            (true, true) => return Ok(StatusCode::NO_CONTENT.into_response()),
            (false, true) => 0,
            (true, false) => 1,
            (false, false) => r.gen_range(0..2),
        };
        let i = r.gen_range(0..pools[class].len());
        pools[class].swap_remove(i)
    };
    Ok(Json(ReviewItem {
        record_id: pick.header.id.clone(),
        spec: pick.header.spec,
        moves: pick.actions(),
    })
    .into_response())
}

fn parse_scores(raw: &BTreeMap<String, i64>) -> Result<BTreeMap<Quality, u8>, ApiError> {
    let mut scores = BTreeMap::new();
    for (name, &v) in raw {
        let q = Quality::ALL
            .into_iter()
            .find(|q| q.name() == name)
            .ok_or_else(|| {
                ApiError::unprocessable("invalid-scores", format!("unknown quality '{name}'"))
            })?;
        if !(1..=5).contains(&v) {
            return Err(ApiError::unprocessable(
                "invalid-scores",
                format!("{name} must be between 1 and 5, got {v}"),
            ));
        }
        scores.insert(q, v as u8);
    }
    if scores.len() != Quality::ALL.len() {
        return Err(ApiError::unprocessable(
            "invalid-scores",
            "every quality needs a score",
        ));
    }
    Ok(scores)
}

async fn post_rating(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<RatingRequest>,
) -> Result<StatusCode, ApiError> {
    let scores = parse_scores(&req.scores)?;
    let lock = app.session(&id)?;
    let mut rec = lock.lock().await;
    if !rec.is_finished() {
        return Err(ApiError::conflict("only finished games can be rated"));
    }
    let rater_id = req.rater_id.unwrap_or_else(|| ANONYMOUS.into());
    // one rating per rater; repeats are accepted and ignored
    if rec.rated_by(&rater_id) {
        return Ok(StatusCode::NO_CONTENT);
    }
    let rating = RatingRecord {
        record_id: id,
        rater_id,
        guess: req.guess,
        scores,
    };
    app.store.append_rating(&mut rec, rating)?;
    Ok(StatusCode::NO_CONTENT)
}
