//! Multi-agent attention Q-network over per-agent observation vectors,
//! plus the no-communication and dense baselines. Every agent embeds its
//! own observation with shared weights, then attends over all agents'
//! (including its own) key features; the attended blend of value features
//! is the communication channel feeding that agent's Q values.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::single::BatchForward;
use crate::model::{attention_rows, logit_penalty};
use crate::nn::tensor::Tensor;
use crate::nn::{Activation, Mlp, ParamId, ParamSet, Tape, Var, LEAKY_SLOPE};

/// A Q-network over a team's stacked observations: each forward maps a
/// [agents, obs_width] matrix to [agents, actions] Q values.
pub trait TeamQNet: Clone {
    fn agents(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;
    /// `observations` holds one [agents, obs_width] matrix per batch item;
    /// the result's `q_all` is [batch * agents, actions], agents fastest.
    fn forward_batch(&self, tape: &mut Tape, observations: &[Tensor]) -> Result<BatchForward>;
    fn regularizer(&self, tape: &mut Tape, fwd: &BatchForward) -> Option<Var>;

    fn forward_one(&self, tape: &mut Tape, observations: &Tensor) -> Result<(Var, Option<Var>)> {
        let fwd = self.forward_batch(tape, std::slice::from_ref(observations))?;
        Ok((fwd.q_all, fwd.attention.into_iter().next()))
    }
}

#[derive(Clone, Debug)]
pub struct MultiManetConfig {
    pub agents: usize,
    pub obs_width: usize,
    pub feature_hidden: usize,
    pub key_width: usize,
    pub value_width: usize,
    pub q_hidden: usize,
    pub num_actions: usize,
    pub lambda_logits: f64,
}

impl MultiManetConfig {
    /// Combat-task defaults: 5 agents with 150-wide observations.
    pub fn combat_default() -> MultiManetConfig {
        MultiManetConfig {
            agents: 5,
            obs_width: 150,
            feature_hidden: 128,
            key_width: 16,
            value_width: 64,
            q_hidden: 128,
            num_actions: 10,
            lambda_logits: 1e-3,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.agents == 0 {
            return Err(Error::Config("agents must be at least 1".into()));
        }
        if self.num_actions == 0 {
            return Err(Error::Config("num_actions must be positive".into()));
        }
        if self.lambda_logits < 0.0 {
            return Err(Error::Config("lambda_logits must be non-negative".into()));
        }
        Ok(())
    }

    fn check_observations(&self, obs: &Tensor) -> Result<()> {
        if obs.shape() != [self.agents, self.obs_width] {
            return Err(Error::Config(format!(
                "observation shape {:?} does not match [{}, {}]",
                obs.shape(),
                self.agents,
                self.obs_width
            )));
        }
        Ok(())
    }
}

/// The multi-agent multi-focus attention network: per-agent selector
/// against all agents' keys, self included.
#[derive(Clone, Debug)]
pub struct MultiManet {
    cfg: MultiManetConfig,
    params: ParamSet,
    feature_net: Mlp,
    w_key: ParamId,
    w_sel: ParamId,
    w_val: ParamId,
    q_net: Mlp,
}

impl MultiManet {
    pub fn new(cfg: MultiManetConfig, rng: &mut ChaCha8Rng) -> Result<MultiManet> {
        cfg.validate()?;
        let mut params = ParamSet::new();
        let feature_net = Mlp::new(
            &mut params,
            "ff",
            &[cfg.obs_width, cfg.feature_hidden, cfg.feature_hidden],
            &[Activation::LeakyRelu, Activation::LeakyRelu],
            rng,
        )?;
        let fw = cfg.feature_hidden;
        let w_key = params.add_uniform("w_key", &[fw, cfg.key_width], fw, rng);
        let w_sel = params.add_uniform("w_sel", &[fw, cfg.key_width], fw, rng);
        let w_val = params.add_uniform("w_val", &[fw, cfg.value_width], fw, rng);
        let q_net = Mlp::new(
            &mut params,
            "q",
            &[2 * cfg.value_width, cfg.q_hidden, cfg.num_actions],
            &[Activation::LeakyRelu, Activation::Identity],
            rng,
        )?;
        Ok(MultiManet { cfg, params, feature_net, w_key, w_sel, w_val, q_net })
    }

    pub fn config(&self) -> &MultiManetConfig {
        &self.cfg
    }

    /// Keys, selectors, and values for every agent of every batch item,
    /// stacked as [batch * agents, width] matrices.
    fn stacked_features(&self, tape: &mut Tape, observations: &[Tensor]) -> Result<(Var, Var, Var)> {
        let mut stacked = Vec::with_capacity(observations.len() * self.cfg.agents * self.cfg.obs_width);
        for obs in observations {
            self.cfg.check_observations(obs)?;
            stacked.extend_from_slice(obs.data());
        }
        let x = tape.constant(Tensor::new(
            &[observations.len() * self.cfg.agents, self.cfg.obs_width],
            stacked,
        ));
        let c = self.feature_net.forward(tape, &self.params, x)?;
        let wk = tape.param(&self.params, self.w_key);
        let keys = tape.matmul(c, wk);
        let ws = tape.param(&self.params, self.w_sel);
        let selectors = tape.matmul(c, ws);
        let wv = tape.param(&self.params, self.w_val);
        let val_lin = tape.matmul(c, wv);
        let values = tape.leaky_relu(val_lin, LEAKY_SLOPE);
        Ok((keys, selectors, values))
    }

    /// Per-agent features for one team observation, for inspection/tests.
    pub fn agent_features(&self, tape: &mut Tape, observations: &Tensor) -> Result<(Var, Var, Var)> {
        self.stacked_features(tape, std::slice::from_ref(observations))
    }
}

impl TeamQNet for MultiManet {
    fn agents(&self) -> usize {
        self.cfg.agents
    }

    fn num_actions(&self) -> usize {
        self.cfg.num_actions
    }

    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn forward_batch(&self, tape: &mut Tape, observations: &[Tensor]) -> Result<BatchForward> {
        assert!(!observations.is_empty(), "forward_batch on an empty batch");
        let b = observations.len();
        let k = self.cfg.agents;
        let (keys_all, selectors_all, values_all) = self.stacked_features(tape, observations)?;
        let mut joined = Vec::with_capacity(b);
        let mut attention = Vec::with_capacity(b);
        let mut logits_per_item = Vec::with_capacity(b);
        for i in 0..b {
            let keys = tape.rows(keys_all, i * k, k);
            let selectors = tape.rows(selectors_all, i * k, k);
            let values = tape.rows(values_all, i * k, k);
            let (logits, weights) = attention_rows(tape, selectors, keys);
            let h = tape.matmul(weights, values);
            let g = tape.concat_cols(&[values, h]);
            joined.push(g);
            attention.push(weights);
            logits_per_item.push(logits);
        }
        let g_all = if b == 1 { joined[0] } else { tape.concat_rows(&joined) };
        let q_all = self.q_net.forward(tape, &self.params, g_all)?;
        Ok(BatchForward { q_all, attention, logits: logits_per_item })
    }

    fn regularizer(&self, tape: &mut Tape, fwd: &BatchForward) -> Option<Var> {
        if self.cfg.lambda_logits == 0.0 || fwd.logits.is_empty() {
            return None;
        }
        let scale = 1.0 / fwd.logits.len() as f64;
        let mut total: Option<Var> = None;
        for &logits in &fwd.logits {
            let r = logit_penalty(tape, logits, self.cfg.lambda_logits);
            total = Some(match total {
                Some(acc) => tape.add(acc, r),
                None => r,
            });
        }
        total.map(|t| tape.scale(t, scale))
    }
}

/// No-communication baseline: each agent maps its own value feature to Q
/// values with no cross-agent term.
#[derive(Clone, Debug)]
pub struct NoCommBaseline {
    cfg: MultiManetConfig,
    params: ParamSet,
    feature_net: Mlp,
    w_val: ParamId,
    q_net: Mlp,
}

impl NoCommBaseline {
    pub fn new(cfg: MultiManetConfig, rng: &mut ChaCha8Rng) -> Result<NoCommBaseline> {
        cfg.validate()?;
        let mut params = ParamSet::new();
        let feature_net = Mlp::new(
            &mut params,
            "ff",
            &[cfg.obs_width, cfg.feature_hidden, cfg.feature_hidden],
            &[Activation::LeakyRelu, Activation::LeakyRelu],
            rng,
        )?;
        let fw = cfg.feature_hidden;
        let w_val = params.add_uniform("w_val", &[fw, cfg.value_width], fw, rng);
        let q_net = Mlp::new(
            &mut params,
            "q",
            &[cfg.value_width, cfg.q_hidden, cfg.num_actions],
            &[Activation::LeakyRelu, Activation::Identity],
            rng,
        )?;
        Ok(NoCommBaseline { cfg, params, feature_net, w_val, q_net })
    }
}

impl TeamQNet for NoCommBaseline {
    fn agents(&self) -> usize {
        self.cfg.agents
    }

    fn num_actions(&self) -> usize {
        self.cfg.num_actions
    }

    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn forward_batch(&self, tape: &mut Tape, observations: &[Tensor]) -> Result<BatchForward> {
        assert!(!observations.is_empty(), "forward_batch on an empty batch");
        let mut stacked = Vec::with_capacity(observations.len() * self.cfg.agents * self.cfg.obs_width);
        for obs in observations {
            self.cfg.check_observations(obs)?;
            stacked.extend_from_slice(obs.data());
        }
        let x = tape.constant(Tensor::new(
            &[observations.len() * self.cfg.agents, self.cfg.obs_width],
            stacked,
        ));
        let c = self.feature_net.forward(tape, &self.params, x)?;
        let wv = tape.param(&self.params, self.w_val);
        let val_lin = tape.matmul(c, wv);
        let values = tape.leaky_relu(val_lin, LEAKY_SLOPE);
        let q_all = self.q_net.forward(tape, &self.params, values)?;
        Ok(BatchForward { q_all, attention: Vec::new(), logits: Vec::new() })
    }

    fn regularizer(&self, _tape: &mut Tape, _fwd: &BatchForward) -> Option<Var> {
        None
    }
}

/// Dense baseline: one network from the concatenation of all agents'
/// observations to all agents' Q values.
#[derive(Clone, Debug)]
pub struct DenseBaseline {
    agents: usize,
    obs_width: usize,
    num_actions: usize,
    params: ParamSet,
    net: Mlp,
}

impl DenseBaseline {
    pub fn new(
        agents: usize,
        obs_width: usize,
        hidden: &[usize],
        num_actions: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<DenseBaseline> {
        if agents == 0 || obs_width == 0 || num_actions == 0 {
            return Err(Error::Config("agents, obs_width, num_actions must be positive".into()));
        }
        let mut widths = vec![agents * obs_width];
        widths.extend_from_slice(hidden);
        widths.push(agents * num_actions);
        let mut acts = vec![Activation::LeakyRelu; hidden.len()];
        acts.push(Activation::Identity);
        let mut params = ParamSet::new();
        let net = Mlp::new(&mut params, "dense", &widths, &acts, rng)?;
        Ok(DenseBaseline { agents, obs_width, num_actions, params, net })
    }
}

impl TeamQNet for DenseBaseline {
    fn agents(&self) -> usize {
        self.agents
    }

    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn forward_batch(&self, tape: &mut Tape, observations: &[Tensor]) -> Result<BatchForward> {
        assert!(!observations.is_empty(), "forward_batch on an empty batch");
        let b = observations.len();
        let joint = self.agents * self.obs_width;
        let mut stacked = Vec::with_capacity(b * joint);
        for obs in observations {
            if obs.shape() != [self.agents, self.obs_width] {
                return Err(Error::Config(format!(
                    "observation shape {:?} does not match [{}, {}]",
                    obs.shape(),
                    self.agents,
                    self.obs_width
                )));
            }
            stacked.extend_from_slice(obs.data());
        }
        let x = tape.constant(Tensor::new(&[b, joint], stacked));
        let wide = self.net.forward(tape, &self.params, x)?; // [b, agents * actions]
        let q_all = tape.reshape(wide, &[b * self.agents, self.num_actions]);
        Ok(BatchForward { q_all, attention: Vec::new(), logits: Vec::new() })
    }

    fn regularizer(&self, _tape: &mut Tape, _fwd: &BatchForward) -> Option<Var> {
        None
    }
}
