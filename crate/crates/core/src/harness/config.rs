//! Flat `key = value` run configuration.
//!
//! A file picks the task and model, then overrides hyperparameter
//! defaults. Lines starting with `#` and blank lines are skipped.
//! Unknown and duplicate keys are errors: silent typos in a config that
//! drives day-long runs are far worse than a strict parser.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{MultiManetConfig, SingleManetConfig};
use crate::rl::TrainConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvKind {
    Nav,
    Combat,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Nav => "nav",
            EnvKind::Combat => "combat",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Multi-focus attention network (either task).
    Manet,
    /// Single attention layer ablation of the navigation network.
    SingleAttention,
    /// Plain feedforward Q-network on the flattened image.
    Dqn,
    /// Per-agent network without the communication channel.
    NoComm,
    /// One joint network over all agents' concatenated observations.
    Dense,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Manet => "manet",
            ModelKind::SingleAttention => "single",
            ModelKind::Dqn => "dqn",
            ModelKind::NoComm => "nocomm",
            ModelKind::Dense => "dense",
        }
    }

    fn allowed_for(self, env: EnvKind) -> bool {
        match env {
            EnvKind::Nav => {
                matches!(self, ModelKind::Manet | ModelKind::SingleAttention | ModelKind::Dqn)
            }
            EnvKind::Combat => matches!(self, ModelKind::Manet | ModelKind::NoComm | ModelKind::Dense),
        }
    }

    /// Whether forwards expose attention weights to visualize.
    pub fn has_attention(self) -> bool {
        matches!(self, ModelKind::Manet | ModelKind::SingleAttention)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub env: EnvKind,
    pub model: ModelKind,
    pub epochs: u32,
    pub train: TrainConfig,
    /// Combat only: feed raw coordinates instead of the relative window.
    pub raw_observations: bool,
    pub attention_layers: usize,
    pub feature_hidden: usize,
    pub key_width: usize,
    pub value_width: usize,
    pub q_hidden: usize,
    pub lambda_entropy: f64,
    pub lambda_distance: f64,
    pub lambda_logits: f64,
    pub dqn_hidden: Vec<usize>,
    pub dense_hidden: Vec<usize>,
    /// Success bar reported alongside evaluations: mean score for the
    /// navigation task, win rate for combat.
    pub threshold: f64,
}

impl RunConfig {
    pub fn defaults(env: EnvKind, model: ModelKind) -> Result<RunConfig> {
        if !model.allowed_for(env) {
            return Err(Error::Config(format!(
                "model {} is not available for env {}",
                model.name(),
                env.name()
            )));
        }
        let cfg = match env {
            EnvKind::Nav => {
                let m = SingleManetConfig::nav_default();
                RunConfig {
                    env,
                    model,
                    epochs: 300,
                    train: TrainConfig::new(0),
                    raw_observations: false,
                    attention_layers: if model == ModelKind::SingleAttention { 1 } else { m.attention_layers },
                    feature_hidden: m.feature_hidden,
                    key_width: m.key_width,
                    value_width: m.value_width,
                    q_hidden: m.q_hidden,
                    lambda_entropy: m.lambda_entropy,
                    lambda_distance: m.lambda_distance,
                    lambda_logits: 0.0,
                    dqn_hidden: vec![128, 128],
                    dense_hidden: vec![256, 256],
                    threshold: 6.7,
                }
            }
            EnvKind::Combat => {
                let m = MultiManetConfig::combat_default();
                RunConfig {
                    env,
                    model,
                    epochs: 300,
                    train: TrainConfig::new(0),
                    raw_observations: false,
                    attention_layers: 1,
                    feature_hidden: m.feature_hidden,
                    key_width: m.key_width,
                    value_width: m.value_width,
                    q_hidden: m.q_hidden,
                    lambda_entropy: 0.0,
                    lambda_distance: 0.0,
                    lambda_logits: m.lambda_logits,
                    dqn_hidden: vec![128, 128],
                    dense_hidden: vec![256, 256],
                    threshold: 0.9,
                }
            }
        };
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    number + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if pairs.iter().any(|(k, _)| *k == key) {
                return Err(Error::Config(format!("line {}: duplicate key {key}", number + 1)));
            }
            pairs.push((key, value));
        }

        let take = |name: &str| pairs.iter().find(|(k, _)| k == name).map(|(_, v)| v.clone());
        let env = match take("env").as_deref() {
            Some("nav") => EnvKind::Nav,
            Some("combat") => EnvKind::Combat,
            Some(other) => return Err(Error::Config(format!("unknown env {other:?}"))),
            None => return Err(Error::Config("missing required key: env".into())),
        };
        let model = match take("model").as_deref() {
            Some("manet") => ModelKind::Manet,
            Some("single") => ModelKind::SingleAttention,
            Some("dqn") => ModelKind::Dqn,
            Some("nocomm") => ModelKind::NoComm,
            Some("dense") => ModelKind::Dense,
            Some(other) => return Err(Error::Config(format!("unknown model {other:?}"))),
            None => return Err(Error::Config("missing required key: model".into())),
        };

        let mut cfg = RunConfig::defaults(env, model)?;
        for (key, value) in &pairs {
            cfg.apply(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("key {key}: cannot parse {value:?}")))
        }
        fn list(key: &str, value: &str) -> Result<Vec<usize>> {
            value
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("key {key}: cannot parse {value:?}")))
                })
                .collect()
        }
        match key {
            "env" | "model" => {} // consumed before defaults were built
            "epochs" => self.epochs = num(key, value)?,
            "seed" => self.train.seed = num(key, value)?,
            "gamma" => self.train.gamma = num(key, value)?,
            "learning_rate" => self.train.learning_rate = num(key, value)?,
            "batch_size" => self.train.batch_size = num(key, value)?,
            "replay_capacity" => self.train.replay_capacity = num(key, value)?,
            "warmup_steps" => self.train.warmup_steps = num(key, value)?,
            "update_every" => self.train.update_every = num(key, value)?,
            "target_sync_steps" => self.train.target_sync_steps = num(key, value)?,
            "epsilon_start" => self.train.epsilon_start = num(key, value)?,
            "epsilon_end" => self.train.epsilon_end = num(key, value)?,
            "epsilon_decay_steps" => self.train.epsilon_decay_steps = num(key, value)?,
            "eval_epsilon" => self.train.eval_epsilon = num(key, value)?,
            "steps_per_epoch" => self.train.steps_per_epoch = num(key, value)?,
            "eval_episodes" => self.train.eval_episodes = num(key, value)?,
            "raw_observations" => self.raw_observations = num(key, value)?,
            "attention_layers" => self.attention_layers = num(key, value)?,
            "feature_hidden" => self.feature_hidden = num(key, value)?,
            "key_width" => self.key_width = num(key, value)?,
            "value_width" => self.value_width = num(key, value)?,
            "q_hidden" => self.q_hidden = num(key, value)?,
            "lambda_entropy" => self.lambda_entropy = num(key, value)?,
            "lambda_distance" => self.lambda_distance = num(key, value)?,
            "lambda_logits" => self.lambda_logits = num(key, value)?,
            "dqn_hidden" => self.dqn_hidden = list(key, value)?,
            "dense_hidden" => self.dense_hidden = list(key, value)?,
            "threshold" => self.threshold = num(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if self.model == ModelKind::SingleAttention && self.attention_layers != 1 {
            return Err(Error::Config(format!(
                "model single means exactly one attention layer, not {}",
                self.attention_layers
            )));
        }
        if self.env == EnvKind::Nav && self.raw_observations {
            return Err(Error::Config("raw_observations only applies to combat".into()));
        }
        match self.env {
            EnvKind::Nav => self.single_config()?.validate(),
            EnvKind::Combat => self.multi_config()?.validate(),
        }
    }

    /// Serialize so that `parse(dump()) == self`. Keys are emitted in a
    /// fixed order, making the dump usable as a fingerprint.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let kv = |out: &mut String, k: &str, v: &str| writeln!(out, "{k} = {v}").unwrap();
        kv(&mut out, "env", self.env.name());
        kv(&mut out, "model", self.model.name());
        kv(&mut out, "epochs", &self.epochs.to_string());
        kv(&mut out, "seed", &self.train.seed.to_string());
        kv(&mut out, "gamma", &self.train.gamma.to_string());
        kv(&mut out, "learning_rate", &self.train.learning_rate.to_string());
        kv(&mut out, "batch_size", &self.train.batch_size.to_string());
        kv(&mut out, "replay_capacity", &self.train.replay_capacity.to_string());
        kv(&mut out, "warmup_steps", &self.train.warmup_steps.to_string());
        kv(&mut out, "update_every", &self.train.update_every.to_string());
        kv(&mut out, "target_sync_steps", &self.train.target_sync_steps.to_string());
        kv(&mut out, "epsilon_start", &self.train.epsilon_start.to_string());
        kv(&mut out, "epsilon_end", &self.train.epsilon_end.to_string());
        kv(&mut out, "epsilon_decay_steps", &self.train.epsilon_decay_steps.to_string());
        kv(&mut out, "eval_epsilon", &self.train.eval_epsilon.to_string());
        kv(&mut out, "steps_per_epoch", &self.train.steps_per_epoch.to_string());
        kv(&mut out, "eval_episodes", &self.train.eval_episodes.to_string());
        kv(&mut out, "raw_observations", &self.raw_observations.to_string());
        kv(&mut out, "attention_layers", &self.attention_layers.to_string());
        kv(&mut out, "feature_hidden", &self.feature_hidden.to_string());
        kv(&mut out, "key_width", &self.key_width.to_string());
        kv(&mut out, "value_width", &self.value_width.to_string());
        kv(&mut out, "q_hidden", &self.q_hidden.to_string());
        kv(&mut out, "lambda_entropy", &self.lambda_entropy.to_string());
        kv(&mut out, "lambda_distance", &self.lambda_distance.to_string());
        kv(&mut out, "lambda_logits", &self.lambda_logits.to_string());
        kv(&mut out, "dqn_hidden", &join(&self.dqn_hidden));
        kv(&mut out, "dense_hidden", &join(&self.dense_hidden));
        kv(&mut out, "threshold", &self.threshold.to_string());
        out
    }

    pub fn single_config(&self) -> Result<SingleManetConfig> {
        if self.env != EnvKind::Nav {
            return Err(Error::Config("image model requested for a non-image env".into()));
        }
        let mut cfg = SingleManetConfig::nav_default();
        cfg.attention_layers = self.attention_layers;
        cfg.feature_hidden = self.feature_hidden;
        cfg.key_width = self.key_width;
        cfg.value_width = self.value_width;
        cfg.q_hidden = self.q_hidden;
        cfg.lambda_entropy = self.lambda_entropy;
        cfg.lambda_distance = self.lambda_distance;
        Ok(cfg)
    }

    pub fn multi_config(&self) -> Result<MultiManetConfig> {
        if self.env != EnvKind::Combat {
            return Err(Error::Config("team model requested for a non-team env".into()));
        }
        let mut cfg = MultiManetConfig::combat_default();
        cfg.feature_hidden = self.feature_hidden;
        cfg.key_width = self.key_width;
        cfg.value_width = self.value_width;
        cfg.q_hidden = self.q_hidden;
        cfg.lambda_logits = self.lambda_logits;
        Ok(cfg)
    }
}

fn join(values: &[usize]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}
