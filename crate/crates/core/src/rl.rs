//! TD3 building blocks: replay buffer, twin critics with target copies, and
//! the greedy actor trained against the first critic.

use std::cell::RefCell;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuro::{AdamState, MlpSpec, ParamVector, Trace};

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Fixed-capacity FIFO ring of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, transition: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(transition);
        } else {
            self.items[self.cursor] = transition;
            self.cursor = (self.cursor + 1) % self.capacity;
        }
    }

    pub fn extend(&mut self, transitions: impl IntoIterator<Item = Transition>) {
        for t in transitions {
            self.push(t);
        }
    }

    /// Contents from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let (newer, older) = self.items.split_at(self.cursor);
        older.iter().chain(newer)
    }

    /// `n` transitions drawn uniformly with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        if self.items.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        Ok((0..n)
            .map(|_| &self.items[rng.random_range(0..self.items.len())])
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Td3Config {
    pub gamma: f64,
    pub tau: f64,
    pub policy_delay: u64,
    pub smoothing_sigma: f64,
    pub smoothing_clip: f64,
    pub exploration_sigma: f64,
    pub batch_size: usize,
    pub lr_critic: f64,
    pub lr_actor: f64,
    pub buffer_capacity: usize,
    pub critic_hidden: Vec<usize>,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            policy_delay: 2,
            smoothing_sigma: 0.2,
            smoothing_clip: 0.5,
            exploration_sigma: 0.2,
            batch_size: 256,
            lr_critic: 3e-4,
            lr_actor: 3e-4,
            buffer_capacity: 1_000_000,
            critic_hidden: vec![256, 256],
        }
    }
}

impl Td3Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if self.smoothing_clip <= 0.0 {
            return bad("smoothing_clip must be positive");
        }
        if self.smoothing_sigma < 0.0 || self.exploration_sigma < 0.0 {
            return bad("noise scales must be non-negative");
        }
        if self.policy_delay == 0 || self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("policy_delay, batch_size and buffer_capacity must be positive");
        }
        if self.lr_critic <= 0.0 || self.lr_actor <= 0.0 {
            return bad("learning rates must be positive");
        }
        Ok(())
    }
}

/// `target <- (1 - tau) * target + tau * online`, componentwise.
pub fn soft_update(target: &mut [f64], online: &[f64], tau: f64) -> Result<()> {
    if target.len() != online.len() {
        return Err(Error::DimensionMismatch {
            context: "soft update",
            expected: target.len(),
            actual: online.len(),
        });
    }
    for (t, &o) in target.iter_mut().zip(online) {
        *t = (1.0 - tau) * *t + tau * o;
    }
    Ok(())
}

/// An action-value function that also exposes `dQ/da`.
pub trait ActionValue {
    fn value_and_action_grad(&self, state: &[f64], action: &[f64], action_grad: &mut [f64]) -> Result<f64>;
}

/// Critic network bound to a parameter vector.
pub struct NetCritic<'a> {
    spec: &'a MlpSpec,
    params: &'a [f64],
    scratch: RefCell<CriticScratch>,
}

struct CriticScratch {
    trace: Trace,
    input: Vec<f64>,
    input_grad: Vec<f64>,
}

impl<'a> NetCritic<'a> {
    pub fn new(spec: &'a MlpSpec, params: &'a [f64]) -> Self {
        Self {
            spec,
            params,
            scratch: RefCell::new(CriticScratch {
                trace: Trace::new(spec),
                input: Vec::with_capacity(spec.input_size()),
                input_grad: vec![0.0; spec.input_size()],
            }),
        }
    }

    pub fn value(&self, state: &[f64], action: &[f64]) -> Result<f64> {
        let s = &mut *self.scratch.borrow_mut();
        s.input.clear();
        s.input.extend_from_slice(state);
        s.input.extend_from_slice(action);
        self.spec.forward_trace(self.params, &s.input, &mut s.trace)?;
        Ok(s.trace.output()[0])
    }
}

impl ActionValue for NetCritic<'_> {
    fn value_and_action_grad(&self, state: &[f64], action: &[f64], action_grad: &mut [f64]) -> Result<f64> {
        let q = self.value(state, action)?;
        let s = &mut *self.scratch.borrow_mut();
        self.spec
            .backward_trace(self.params, &mut s.trace, &[1.0], None, Some(&mut s.input_grad))?;
        action_grad.copy_from_slice(&s.input_grad[state.len()..]);
        Ok(q)
    }
}

/// One Adam ascent step on `mean_s Q(s, actor(s))`. Returns the mean value
/// before the step.
pub fn policy_ascent_step<C: ActionValue + ?Sized>(
    actor_spec: &MlpSpec,
    actor: &mut ParamVector,
    adam: &mut AdamState,
    critic: &C,
    states: &[&[f64]],
    lr: f64,
) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    let n = states.len() as f64;
    let act_dim = actor_spec.output_size();
    let mut trace = Trace::new(actor_spec);
    let mut grad = vec![0.0; actor.len()];
    let mut dq_da = vec![0.0; act_dim];
    let mut action = vec![0.0; act_dim];
    let mut mean_q = 0.0;
    for s in states {
        actor_spec.forward_trace(actor, s, &mut trace)?;
        action.copy_from_slice(trace.output());
        mean_q += critic.value_and_action_grad(s, &action, &mut dq_da)? / n;
        // Descend on -J.
        for g in dq_da.iter_mut() {
            *g = -*g / n;
        }
        actor_spec.backward_trace(actor, &mut trace, &dq_da, Some(&mut grad), None)?;
    }
    adam.step(actor, &grad, lr)?;
    Ok(mean_q)
}

/// Twin critics, their targets, and the greedy actor with its target.
#[derive(Debug, Clone)]
pub struct CriticEnsemble {
    pub actor_spec: MlpSpec,
    pub critic_spec: MlpSpec,
    pub q1: ParamVector,
    pub q2: ParamVector,
    pub q1_target: ParamVector,
    pub q2_target: ParamVector,
    pub greedy: ParamVector,
    pub greedy_target: ParamVector,
    q1_adam: AdamState,
    q2_adam: AdamState,
    greedy_adam: AdamState,
    steps: u64,
}

impl CriticEnsemble {
    pub fn new<R: Rng + ?Sized>(actor_spec: MlpSpec, critic_spec: MlpSpec, rng: &mut R) -> Self {
        let q1 = critic_spec.init_params(rng);
        let q2 = critic_spec.init_params(rng);
        let greedy = actor_spec.init_params(rng);
        Self::from_params(actor_spec, critic_spec, q1, q2, greedy)
    }

    pub fn from_params(
        actor_spec: MlpSpec,
        critic_spec: MlpSpec,
        q1: ParamVector,
        q2: ParamVector,
        greedy: ParamVector,
    ) -> Self {
        Self {
            q1_adam: AdamState::new(q1.len()),
            q2_adam: AdamState::new(q2.len()),
            greedy_adam: AdamState::new(greedy.len()),
            q1_target: q1.clone(),
            q2_target: q2.clone(),
            greedy_target: greedy.clone(),
            actor_spec,
            critic_spec,
            q1,
            q2,
            greedy,
            steps: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn q1_critic(&self) -> NetCritic<'_> {
        NetCritic::new(&self.critic_spec, &self.q1)
    }

    /// Clipped double-Q targets with target-policy smoothing.
    pub fn compute_target<R: Rng + ?Sized>(&self, batch: &[&Transition], cfg: &Td3Config, rng: &mut R) -> Result<Vec<f64>> {
        let act_dim = self.actor_spec.output_size();
        let q1t = NetCritic::new(&self.critic_spec, &self.q1_target);
        let q2t = NetCritic::new(&self.critic_spec, &self.q2_target);
        let mut trace = Trace::new(&self.actor_spec);
        let mut next_action = vec![0.0; act_dim];
        let mut ys = Vec::with_capacity(batch.len());
        for t in batch {
            for a in next_action.iter_mut() {
                let z: f64 = StandardNormal.sample(rng);
                *a = (cfg.smoothing_sigma * z).clamp(-cfg.smoothing_clip, cfg.smoothing_clip);
            }
            if t.terminal || cfg.gamma == 0.0 {
                ys.push(t.reward);
                continue;
            }
            self.actor_spec.forward_trace(&self.greedy_target, &t.next_state, &mut trace)?;
            for (a, &mu) in next_action.iter_mut().zip(trace.output()) {
                *a = (mu + *a).clamp(-1.0, 1.0);
            }
            let q = q1t.value(&t.next_state, &next_action)?.min(q2t.value(&t.next_state, &next_action)?);
            ys.push(t.reward + cfg.gamma * q);
        }
        Ok(ys)
    }

    /// One Adam step on both critics. Returns the pre-step loss
    /// `mean[(y - Q1)^2 + (y - Q2)^2]`.
    pub fn critic_update<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer, cfg: &Td3Config, rng: &mut R) -> Result<f64> {
        let batch = buffer.sample(cfg.batch_size, rng)?;
        let ys = self.compute_target(&batch, cfg, rng)?;
        let n = batch.len() as f64;
        let spec = &self.critic_spec;
        let mut trace = Trace::new(spec);
        let mut input = Vec::with_capacity(spec.input_size());
        let mut g1 = vec![0.0; self.q1.len()];
        let mut g2 = vec![0.0; self.q2.len()];
        let mut loss = 0.0;
        for (t, &y) in batch.iter().zip(&ys) {
            input.clear();
            input.extend_from_slice(&t.state);
            input.extend_from_slice(&t.action);
            for (params, grad) in [(&self.q1, &mut g1), (&self.q2, &mut g2)] {
                spec.forward_trace(params, &input, &mut trace)?;
                let err = trace.output()[0] - y;
                loss += err * err / n;
                spec.backward_trace(params, &mut trace, &[2.0 * err / n], Some(grad), None)?;
            }
        }
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("critic loss at step {}", self.steps + 1)));
        }
        self.q1_adam.step(&mut self.q1, &g1, cfg.lr_critic)?;
        self.q2_adam.step(&mut self.q2, &g2, cfg.lr_critic)?;
        self.steps += 1;
        Ok(loss)
    }

    /// Delayed greedy-actor step followed by soft target updates; a no-op
    /// unless the critic step counter is a multiple of the policy delay.
    pub fn greedy_actor_update<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer, cfg: &Td3Config, rng: &mut R) -> Result<bool> {
        if self.steps == 0 || !self.steps.is_multiple_of(cfg.policy_delay) {
            return Ok(false);
        }
        let batch = buffer.sample(cfg.batch_size, rng)?;
        let states: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
        let critic = NetCritic::new(&self.critic_spec, &self.q1);
        policy_ascent_step(&self.actor_spec, &mut self.greedy, &mut self.greedy_adam, &critic, &states, cfg.lr_actor)?;
        soft_update(&mut self.q1_target, &self.q1, cfg.tau)?;
        soft_update(&mut self.q2_target, &self.q2, cfg.tau)?;
        soft_update(&mut self.greedy_target, &self.greedy, cfg.tau)?;
        Ok(true)
    }
}
