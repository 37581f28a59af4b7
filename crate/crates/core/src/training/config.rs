//! Training configuration and its flat `key=value` text form.

use crate::error::{Result, TdamError};

/// Hyperparameter grid; every combination is one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub learning_rates: Vec<f64>,
    pub dropouts: Vec<f64>,
    /// Topic vector sizes; a topic vector lives in the hidden space, so each
    /// value is used as the hidden size `n`.
    pub topic_vector_sizes: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            learning_rates: vec![0.01, 0.1],
            dropouts: vec![0.0, 0.3, 0.6],
            topic_vector_sizes: vec![50, 100, 200],
        }
    }
}

impl GridSpec {
    pub fn cell_count(&self) -> usize {
        self.learning_rates.len() * self.dropouts.len() * self.topic_vector_sizes.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Registered encoder variant (`tdam`, `han`, `bigru`).
    pub encoder: String,
    pub learning_rate: f64,
    pub dropout: f64,
    /// Number of global topics `K`.
    pub topics: usize,
    /// Hidden size `n`, which is also the topic vector size.
    pub hidden_size: usize,
    pub embedding_dim: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Sentiment and domain task weights.
    pub task_weights: [f64; 2],
    /// Train the domain head jointly with the sentiment head.
    pub multitask: bool,
    pub seed: u64,
    /// Epochs without dev improvement before stopping; 0 disables.
    pub patience: usize,
    pub min_count: usize,
    /// Global gradient-norm clip; `None` disables.
    pub grad_clip: Option<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub grid: GridSpec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            encoder: "tdam".into(),
            learning_rate: 0.01,
            dropout: 0.0,
            topics: 10,
            hidden_size: 50,
            embedding_dim: 200,
            batch_size: 64,
            max_epochs: 30,
            task_weights: [1.0, 1.0],
            multitask: false,
            seed: 0,
            patience: 5,
            min_count: 1,
            grad_clip: None,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            grid: GridSpec::default(),
        }
    }
}

pub const DEFAULT_GRAD_CLIP: f64 = 5.0;

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| TdamError::invalid(format!("bad value '{value}' for {key}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(TdamError::invalid(format!("bad boolean '{value}' for {key}"))),
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Parses `key=value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| TdamError::Parse {
            location: format!("line {}", i + 1),
            message: format!("expected key=value, got '{line}'"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl TrainConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "encoder" | "model" => self.encoder = value.trim().to_string(),
            "learning_rate" => self.learning_rate = parse_num(key, value)?,
            "dropout" => self.dropout = parse_num(key, value)?,
            "topics" => self.topics = parse_num(key, value)?,
            "hidden_size" | "topic_vector_size" => self.hidden_size = parse_num(key, value)?,
            "embedding_dim" => self.embedding_dim = parse_num(key, value)?,
            "batch_size" => self.batch_size = parse_num(key, value)?,
            "max_epochs" => self.max_epochs = parse_num(key, value)?,
            "task_weights" => {
                let w: Vec<f64> = parse_list(key, value)?;
                let [s, d] = w.as_slice() else {
                    return Err(TdamError::invalid("task_weights needs two values"));
                };
                self.task_weights = [*s, *d];
            }
            "multitask" => self.multitask = parse_bool(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "patience" => self.patience = parse_num(key, value)?,
            "min_count" => self.min_count = parse_num(key, value)?,
            "grad_clip" => {
                self.grad_clip = match value.trim() {
                    "" | "none" | "off" => None,
                    "on" | "default" => Some(DEFAULT_GRAD_CLIP),
                    v => Some(parse_num(key, v)?),
                }
            }
            "beta1" => self.beta1 = parse_num(key, value)?,
            "beta2" => self.beta2 = parse_num(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "grid.learning_rate" => self.grid.learning_rates = parse_list(key, value)?,
            "grid.dropout" => self.grid.dropouts = parse_list(key, value)?,
            "grid.topic_vector_size" => self.grid.topic_vector_sizes = parse_list(key, value)?,
            _ => return Err(TdamError::invalid(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply(&parse_kv(text)?)?;
        c.validate()?;
        Ok(c)
    }

    /// Canonical `key=value` pairs; feeding them back through `apply` rebuilds `self`.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("encoder", self.encoder.clone()),
            ("learning_rate", self.learning_rate.to_string()),
            ("dropout", self.dropout.to_string()),
            ("topics", self.topics.to_string()),
            ("hidden_size", self.hidden_size.to_string()),
            ("embedding_dim", self.embedding_dim.to_string()),
            ("batch_size", self.batch_size.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
            ("task_weights", join(&self.task_weights)),
            ("multitask", self.multitask.to_string()),
            ("seed", self.seed.to_string()),
            ("patience", self.patience.to_string()),
            ("min_count", self.min_count.to_string()),
            ("grad_clip", self.grad_clip.map_or("none".to_string(), |c| c.to_string())),
            ("beta1", self.beta1.to_string()),
            ("beta2", self.beta2.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("grid.learning_rate", join(&self.grid.learning_rates)),
            ("grid.dropout", join(&self.grid.dropouts)),
            ("grid.topic_vector_size", join(&self.grid.topic_vector_sizes)),
        ];
        v.drain(..).map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TdamError::invalid(m));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.learning_rate >= 0.0) {
            return bad(format!("learning_rate must be non-negative, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if self.task_weights.iter().any(|w| !(*w >= 0.0)) {
            return bad("task weights must be non-negative".into());
        }
        if self.topics == 0 || self.embedding_dim == 0 {
            return bad("topics and embedding_dim must be at least 1".into());
        }
        if self.hidden_size == 0 || !self.hidden_size.is_multiple_of(2) {
            return bad(format!("hidden_size must be positive and even, got {}", self.hidden_size));
        }
        if self.grad_clip.is_some_and(|c| !(c > 0.0)) {
            return bad("grad_clip must be positive".into());
        }
        let g = &self.grid;
        if g.learning_rates.is_empty() || g.dropouts.is_empty() || g.topic_vector_sizes.is_empty() {
            return bad("grid ranges must be non-empty".into());
        }
        if g.learning_rates.iter().any(|l| !(*l >= 0.0)) || g.dropouts.iter().any(|d| !(0.0..1.0).contains(d)) {
            return bad("grid values out of range".into());
        }
        if g.topic_vector_sizes.iter().any(|s| *s == 0 || s % 2 != 0) {
            return bad("grid topic vector sizes must be positive and even".into());
        }
        Ok(())
    }
}
