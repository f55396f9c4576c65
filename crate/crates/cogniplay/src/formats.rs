//! JSON and JSONL file formats: game states, weight checkpoints, agent
//! configs and move datasets.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use cogniplay_core::{
    Action, AgentConfig, Constraint, Feature, FeatureSet, GameSpec, GameState, MoveDataset,
    MoveEntry, Relative, Rules,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecJson {
    pub cols: u8,
    pub rows: u8,
    pub k: u8,
    #[serde(default, skip_serializing_if = "is_freestyle")]
    pub rules: Rules,
}

fn is_freestyle(r: &Rules) -> bool {
    *r == Rules::Freestyle
}

impl From<GameSpec> for SpecJson {
    fn from(s: GameSpec) -> Self {
        SpecJson {
            cols: s.columns,
            rows: s.rows,
            k: s.k,
            rules: s.rules,
        }
    }
}

impl TryFrom<SpecJson> for GameSpec {
    type Error = anyhow::Error;

    fn try_from(s: SpecJson) -> Result<Self> {
        Ok(GameSpec::new(s.cols, s.rows, s.k)?.with_rules(s.rules))
    }
}

/// A state stored as its move list; it is always rebuilt by replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateJson {
    pub spec: SpecJson,
    pub moves: Vec<Action>,
}

impl StateJson {
    pub fn from_state(s: &GameState) -> Self {
        StateJson {
            spec: (*s.spec()).into(),
            moves: s.history().to_vec(),
        }
    }

    pub fn replay(&self) -> Result<GameState> {
        Ok(GameState::from_moves(self.spec.try_into()?, &self.moves)?)
    }
}

pub fn game_spec(name: &str) -> Result<GameSpec> {
    GameSpec::by_name(name).ok_or_else(|| anyhow!("unknown game '{name}'"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct FeatureJson {
    constraints: Vec<(i8, i8, String)>,
    weight: f64,
    generation: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parents: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct WeightsJson {
    radius: u8,
    #[serde(default = "default_max_features")]
    max_features: usize,
    features: Vec<FeatureJson>,
}

fn default_max_features() -> usize {
    2000
}

/// Weights checkpoint as pretty JSON, features in id order.
pub fn weights_to_json(fs: &FeatureSet) -> String {
    let doc = WeightsJson {
        radius: fs.radius(),
        max_features: fs.max_features(),
        features: fs
            .features()
            .iter()
            .map(|f| FeatureJson {
                constraints: f
                    .constraints()
                    .iter()
                    .map(|c| (c.dx, c.dy, c.req.tag().to_string()))
                    .collect(),
                weight: f.weight,
                generation: f.generation,
                parents: f.parents,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("weights serialize")
}

pub fn weights_from_json(text: &str) -> Result<FeatureSet> {
    let doc: WeightsJson = serde_json::from_str(text)?;
    let mut features = Vec::with_capacity(doc.features.len());
    for (i, f) in doc.features.into_iter().enumerate() {
        let constraints = f
            .constraints
            .into_iter()
            .map(|(dx, dy, tag)| {
                Relative::from_tag(&tag)
                    .map(|req| Constraint::new(dx, dy, req))
                    .ok_or_else(|| anyhow!("feature {i}: unknown requirement '{tag}'"))
            })
            .collect::<Result<Vec<_>>>()?;
        features.push(Feature::new(constraints, f.weight, f.generation, f.parents));
    }
    Ok(FeatureSet::from_features(
        doc.radius,
        doc.max_features,
        features,
    )?)
}

pub fn save_weights(path: &Path, fs: &FeatureSet) -> Result<()> {
    write_atomic(path, weights_to_json(fs).as_bytes())
        .with_context(|| format!("writing {}", path.display()))
}

pub fn load_weights(path: &Path) -> Result<FeatureSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    weights_from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn checkpoint_name(iteration: u32) -> String {
    format!("weights_{iteration:04}.json")
}

/// Write to a sibling temp file, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

/// An agent config file: a preset name, a game and any overrides.
///
/// `{"game": "gomoku", "preset": "human", "search": {"iterations": 500}}`
/// starts from the human preset for Gomoku and changes the budget only.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentFile {
    pub spec: GameSpec,
    pub config: AgentConfig,
    /// Weights checkpoint, relative paths resolved against the file.
    pub weights: Option<std::path::PathBuf>,
}

impl AgentFile {
    pub fn from_value(
        doc: &Value,
        default_game: Option<&str>,
        base: Option<&Path>,
    ) -> Result<Self> {
        let obj = doc
            .as_object()
            .ok_or_else(|| anyhow!("agent config must be an object"))?;
        for key in obj.keys() {
            if !["game", "preset", "features", "search", "weights"].contains(&key.as_str()) {
                bail!("unknown agent config key '{key}'");
            }
        }
        let game = obj
            .get("game")
            .and_then(Value::as_str)
            .or(default_game)
            .unwrap_or("ttt");
        let spec = game_spec(game)?;
        let preset = obj
            .get("preset")
            .and_then(Value::as_str)
            .unwrap_or("vanilla");
        let base_cfg = AgentConfig::preset(preset, &spec)
            .ok_or_else(|| anyhow!("unknown preset '{preset}'"))?;
        let mut merged = serde_json::to_value(&base_cfg)?;
        for key in ["features", "search"] {
            if let Some(over) = obj.get(key) {
                merge(&mut merged[key], over);
            }
        }
        let config: AgentConfig = serde_json::from_value(merged).context("agent config")?;
        config.validate()?;
        let weights = obj.get("weights").and_then(Value::as_str).map(|w| {
            let p = Path::new(w);
            match base {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p.to_path_buf(),
            }
        });
        Ok(AgentFile {
            spec,
            config,
            weights,
        })
    }

    pub fn load(path: &Path, default_game: Option<&str>) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let doc: Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        AgentFile::from_value(&doc, default_game, path.parent())
            .with_context(|| format!("in {}", path.display()))
    }

    /// The configured weights, or fresh atomic features.
    pub fn features(&self) -> Result<FeatureSet> {
        match &self.weights {
            Some(p) => load_weights(p),
            None => Ok(self.config.initial_features()?),
        }
    }
}

fn merge(into: &mut Value, over: &Value) {
    match (into, over) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, v) in b {
                merge(a.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetLine {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecJson>,
    pub moves: Vec<Action>,
    pub played: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<String>,
}

/// Reads a JSONL move dataset. Lines without a `spec` use `default_spec`;
/// blank lines are skipped.
pub fn read_dataset(path: &Path, default_spec: GameSpec) -> Result<MoveDataset> {
    let file = fs::File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut entries = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let d: DatasetLine =
            serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), n + 1))?;
        entries.push(MoveEntry {
            spec: match d.spec {
                Some(s) => s.try_into()?,
                None => default_spec,
            },
            moves: d.moves,
            played: d.played,
            strength: d.strength,
        });
    }
    Ok(MoveDataset {
        source: path.display().to_string(),
        entries,
    })
}

pub fn dataset_line(entry: &MoveEntry) -> String {
    serde_json::to_string(&DatasetLine {
        spec: Some(entry.spec.into()),
        moves: entry.moves.clone(),
        played: entry.played,
        strength: entry.strength.clone(),
    })
    .expect("dataset line serializes")
}
