//! Append-only session store: one JSONL file per session plus an index.
//!
//! The first line of a session file is its header; every later line is a
//! move, the result or a rating. Each line carries the schema version `v`.
//! A trailing line that does not parse (a write cut short) is dropped and
//! the file truncated back to the last complete line.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{anyhow, bail, Context, Result};
use cogniplay_core::{Action, GameSpec, GameState, Outcome, Player, RatingRecord};
use serde::{Deserialize, Serialize};

use crate::formats::{write_atomic, SpecJson};

pub const SCHEMA_VERSION: u32 = 1;
const INDEX_FILE: &str = "index.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Participant {
    Human,
    AgentVsAgent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredMove {
    pub action: Action,
    pub mover: Player,
    /// Set for agent moves: whether the pattern policy alone decided.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certain: Option<bool>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredResult {
    /// 1 first player won, -1 second player won, 0 draw.
    pub value: i8,
    pub winner: Option<Player>,
}

impl From<Outcome> for StoredResult {
    fn from(o: Outcome) -> Self {
        StoredResult {
            value: o.value,
            winner: o.winner(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub id: String,
    pub created_at: String,
    pub spec: SpecJson,
    pub preset: String,
    /// Checkpoint the agent played with, if any.
    pub weights_id: Option<String>,
    pub participant: Participant,
    /// Side the human plays in a human session.
    pub human_side: Option<Player>,
    pub blind: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line {
    Header(SessionHeader),
    Move(StoredMove),
    Result(StoredResult),
    Rating(RatingRecord),
}

#[derive(Serialize, Deserialize)]
struct Versioned {
    v: u32,
    #[serde(flatten)]
    line: Line,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionRecord {
    pub header: SessionHeader,
    pub moves: Vec<StoredMove>,
    pub result: Option<StoredResult>,
    pub ratings: Vec<RatingRecord>,
}

impl SessionRecord {
    pub fn new(header: SessionHeader) -> Self {
        SessionRecord {
            header,
            moves: Vec::new(),
            result: None,
            ratings: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.header.id
    }

    pub fn spec(&self) -> Result<GameSpec> {
        self.header.spec.try_into()
    }

    pub fn actions(&self) -> Vec<Action> {
        self.moves.iter().map(|m| m.action).collect()
    }

    /// Rebuilds the position by replaying every stored move.
    pub fn replay(&self) -> Result<GameState> {
        Ok(GameState::from_moves(self.spec()?, &self.actions())?)
    }

    pub fn is_finished(&self) -> bool {
        self.result.is_some()
    }

    pub fn rated_by(&self, rater: &str) -> bool {
        self.ratings.iter().any(|r| r.rater_id == rater)
    }

    /// The record is a legal game and any result matches the replay.
    pub fn validate(&self) -> Result<()> {
        let state = self.replay()?;
        for (m, side) in self
            .moves
            .iter()
            .zip([Player::P1, Player::P2].iter().cycle())
        {
            if m.mover != *side {
                bail!("move {} recorded for the wrong side", m.action);
            }
        }
        match self.result {
            Some(r) if !state.is_terminal() => bail!("result {r:?} stored for an unfinished game"),
            Some(r) if StoredResult::from(state.outcome()) != r => {
                bail!("stored result {r:?} disagrees with the replay")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub created_at: String,
    pub participant: Participant,
    pub finished: bool,
}

/// Directory of session files.
///
/// Appends to one file are serialized by the caller holding that session's
/// lock; the index is guarded here.
#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    index: Mutex<BTreeMap<String, IndexEntry>>,
}

impl SessionStore {
    /// Opens `dir`, creating it if needed. A missing or unreadable index is
    /// rebuilt from the session files.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let store = SessionStore {
            dir,
            index: Mutex::new(BTreeMap::new()),
        };
        let loaded = fs::read_to_string(store.index_path())
            .ok()
            .and_then(|t| serde_json::from_str::<Vec<IndexEntry>>(&t).ok());
        match loaded {
            Some(entries) => {
                *store.index.lock().unwrap() =
                    entries.into_iter().map(|e| (e.id.clone(), e)).collect();
            }
            None => store.rebuild_index()?,
        }
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn index_path(&self) -> PathBuf {
        self.dir.join(INDEX_FILE)
    }

    fn session_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    /// Scans every session file and rewrites the index.
    pub fn rebuild_index(&self) -> Result<()> {
        let mut index = BTreeMap::new();
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            match self.recover(id) {
                Ok(rec) => {
                    index.insert(id.to_string(), index_entry(&rec));
                }
                Err(e) => log::warn!("skipping {}: {e:#}", path.display()),
            }
        }
        let mut guard = self.index.lock().unwrap();
        *guard = index;
        self.write_index(&guard)
    }

    /// Called with the index lock held so concurrent rewrites never race.
    fn write_index(&self, index: &BTreeMap<String, IndexEntry>) -> Result<()> {
        let entries: Vec<&IndexEntry> = index.values().collect();
        let text = serde_json::to_string_pretty(&entries)?;
        write_atomic(&self.index_path(), text.as_bytes())?;
        Ok(())
    }

    fn update_index(&self, rec: &SessionRecord) -> Result<()> {
        let mut guard = self.index.lock().unwrap();
        guard.insert(rec.id().to_string(), index_entry(rec));
        self.write_index(&guard)
    }

    pub fn list(&self) -> Vec<IndexEntry> {
        let mut v: Vec<IndexEntry> = self.index.lock().unwrap().values().cloned().collect();
        v.sort_by(|a, b| a.created_at.cmp(&b.created_at).then(a.id.cmp(&b.id)));
        v
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.lock().unwrap().contains_key(id)
    }

    /// Writes a new session file holding only the header.
    pub fn create(&self, header: SessionHeader) -> Result<SessionRecord> {
        if !is_safe_id(&header.id) {
            bail!("invalid session id '{}'", header.id);
        }
        let path = self.session_path(&header.id);
        if path.exists() {
            bail!("session {} already exists", header.id);
        }
        let rec = SessionRecord::new(header.clone());
        append_line(&path, &Line::Header(header))?;
        self.update_index(&rec)?;
        Ok(rec)
    }

    pub fn append_move(&self, rec: &mut SessionRecord, m: StoredMove) -> Result<()> {
        if rec.is_finished() {
            bail!("session {} is finished", rec.id());
        }
        append_line(&self.session_path(rec.id()), &Line::Move(m.clone()))?;
        rec.moves.push(m);
        Ok(())
    }

    pub fn finish(&self, rec: &mut SessionRecord, result: StoredResult) -> Result<()> {
        if rec.is_finished() {
            bail!("session {} is finished", rec.id());
        }
        append_line(&self.session_path(rec.id()), &Line::Result(result))?;
        rec.result = Some(result);
        self.update_index(rec)
    }

    pub fn append_rating(&self, rec: &mut SessionRecord, rating: RatingRecord) -> Result<()> {
        append_line(&self.session_path(rec.id()), &Line::Rating(rating.clone()))?;
        rec.ratings.push(rating);
        Ok(())
    }

    /// Reads a session back, ignoring a torn trailing line.
    pub fn load(&self, id: &str) -> Result<SessionRecord> {
        self.read(id, false)
    }

    /// Like [`SessionStore::load`], but also truncates a torn trailing line
    /// off the file. Only call this while nothing else writes the session.
    pub fn recover(&self, id: &str) -> Result<SessionRecord> {
        self.read(id, true)
    }

    fn read(&self, id: &str, repair: bool) -> Result<SessionRecord> {
        if !is_safe_id(id) {
            bail!("invalid session id '{id}'");
        }
        let path = self.session_path(id);
        let file = File::open(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut lines = Vec::new();
        let mut good_len = 0u64;
        let mut torn = None;
        let mut reader = BufReader::new(file);
        let mut buf = String::new();
        loop {
            buf.clear();
            let n = reader.read_line(&mut buf)?;
            if n == 0 {
                break;
            }
            if torn.is_some() {
                bail!(
                    "{}: unreadable line before the end of the file",
                    path.display()
                );
            }
            let complete = buf.ends_with('\n');
            match serde_json::from_str::<Versioned>(buf.trim_end()) {
                Ok(v) if complete => {
                    if v.v != SCHEMA_VERSION {
                        bail!("{}: unsupported schema version {}", path.display(), v.v);
                    }
                    lines.push(v.line);
                    good_len += n as u64;
                }
                _ => torn = Some(lines.len() + 1),
            }
        }
        if let (Some(line), true) = (torn, repair) {
            log::warn!(
                "{}: dropping incomplete line {line} and truncating the file",
                path.display()
            );
            OpenOptions::new()
                .write(true)
                .open(&path)?
                .set_len(good_len)?;
        }
        let mut iter = lines.into_iter();
        let Some(Line::Header(header)) = iter.next() else {
            bail!("{}: missing header", path.display());
        };
        if header.id != id {
            bail!("{}: header id {} does not match", path.display(), header.id);
        }
        let mut rec = SessionRecord::new(header);
        for line in iter {
            match line {
                Line::Header(_) => bail!("{}: second header", path.display()),
                Line::Move(_) if rec.is_finished() => {
                    bail!("{}: move after the result", path.display())
                }
                Line::Move(m) => rec.moves.push(m),
                Line::Result(_) if rec.is_finished() => bail!("{}: second result", path.display()),
                Line::Result(r) => rec.result = Some(r),
                Line::Rating(r) => rec.ratings.push(r),
            }
        }
        rec.validate()
            .with_context(|| format!("{}: invalid session", path.display()))?;
        Ok(rec)
    }

    pub fn load_all(&self) -> Result<Vec<SessionRecord>> {
        self.list().iter().map(|e| self.load(&e.id)).collect()
    }

    /// Ground truth for rating aggregation: which records were played by a
    /// human.
    pub fn truth(&self) -> BTreeMap<String, cogniplay_core::Guess> {
        self.index
            .lock()
            .unwrap()
            .values()
            .map(|e| {
                let g = match e.participant {
                    Participant::Human => cogniplay_core::Guess::Human,
                    Participant::AgentVsAgent => cogniplay_core::Guess::Agent,
                };
                (e.id.clone(), g)
            })
            .collect()
    }
}

fn index_entry(rec: &SessionRecord) -> IndexEntry {
    IndexEntry {
        id: rec.header.id.clone(),
        created_at: rec.header.created_at.clone(),
        participant: rec.header.participant,
        finished: rec.is_finished(),
    }
}

/// Ids become file names, so only allow a conservative alphabet.
fn is_safe_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn append_line(path: &Path, line: &Line) -> Result<()> {
    let mut text = serde_json::to_string(&Versioned {
        v: SCHEMA_VERSION,
        line: line.clone(),
    })?;
    text.push('\n');
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    f.write_all(text.as_bytes())?;
    f.sync_data()?;
    Ok(())
}

pub fn new_session_id() -> String {
    uuid::Uuid::new_v4().to_string()
}

pub fn now_utc() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn parse_player(s: &str) -> Result<Player> {
    match s {
        "P1" | "p1" => Ok(Player::P1),
        "P2" | "p2" => Ok(Player::P2),
        _ => Err(anyhow!("side must be P1 or P2, got '{s}'")),
    }
}
