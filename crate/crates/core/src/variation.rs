//! Offspring generators: directional GA variation, critic-guided PG
//! variation, the greedy-actor copy, and the batch split between them.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuro::{AdamState, MlpSpec, ParamVector};
use crate::rl::{policy_ascent_step, ActionValue, CriticEnsemble, ReplayBuffer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationConfig {
    pub sigma1: f64,
    pub sigma2: f64,
    pub n_act: usize,
    pub lr_pg: f64,
    pub pg_batch: usize,
    /// Share of each batch produced by the GA operator.
    pub proportion_ga: f64,
    pub batch_size: usize,
}

impl Default for VariationConfig {
    fn default() -> Self {
        Self {
            sigma1: 0.005,
            sigma2: 0.05,
            n_act: 50,
            lr_pg: 0.005,
            pg_batch: 256,
            proportion_ga: 0.5,
            batch_size: 100,
        }
    }
}

impl VariationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma1 < 0.0 || self.sigma2 < 0.0 {
            return Err(Error::Config("sigma1 and sigma2 must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.proportion_ga) {
            return Err(Error::Config(format!(
                "proportion_ga = {} is outside [0, 1]",
                self.proportion_ga
            )));
        }
        if self.batch_size == 0 || self.pg_batch == 0 {
            return Err(Error::Config("batch sizes must be positive".into()));
        }
        if self.lr_pg <= 0.0 {
            return Err(Error::Config("lr_pg must be positive".into()));
        }
        Ok(())
    }
}

/// `parent1 + sigma1 * z + sigma2 * (parent2 - parent1) * u` for explicit
/// noise `z` (per component) and `u` (scalar).
pub fn directional_offspring(
    parent1: &[f64],
    parent2: &[f64],
    sigma1: f64,
    sigma2: f64,
    z: &[f64],
    u: f64,
) -> Result<ParamVector> {
    if parent1.len() != parent2.len() || z.len() != parent1.len() {
        return Err(Error::DimensionMismatch {
            context: "directional variation",
            expected: parent1.len(),
            actual: if parent2.len() != parent1.len() { parent2.len() } else { z.len() },
        });
    }
    Ok(parent1
        .iter()
        .zip(parent2)
        .zip(z)
        .map(|((&a, &b), &zi)| a + sigma1 * zi + sigma2 * (b - a) * u)
        .collect::<Vec<_>>()
        .into())
}

/// Directional GA variation. Draws the scalar line factor first, then the
/// isotropic noise.
pub fn ga_directional<R: Rng + ?Sized>(
    parent1: &[f64],
    parent2: &[f64],
    cfg: &VariationConfig,
    rng: &mut R,
) -> Result<ParamVector> {
    let u: f64 = StandardNormal.sample(rng);
    let z: Vec<f64> = (0..parent1.len()).map(|_| StandardNormal.sample(rng)).collect();
    directional_offspring(parent1, parent2, cfg.sigma1, cfg.sigma2, &z, u)
}

/// PG variation against an arbitrary action-value function: `n_act` Adam
/// ascent steps, each on a freshly sampled batch, with a fresh optimizer.
pub fn pg_variation_with<C: ActionValue + ?Sized, R: Rng + ?Sized>(
    parent: &ParamVector,
    actor_spec: &MlpSpec,
    critic: &C,
    buffer: &ReplayBuffer,
    cfg: &VariationConfig,
    rng: &mut R,
) -> Result<ParamVector> {
    if buffer.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    let mut child = parent.clone();
    let mut adam = AdamState::new(child.len());
    for _ in 0..cfg.n_act {
        let batch = buffer.sample(cfg.pg_batch, rng)?;
        let states: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
        policy_ascent_step(actor_spec, &mut child, &mut adam, critic, &states, cfg.lr_pg)?;
    }
    Ok(child)
}

/// PG variation using the ensemble's first critic.
pub fn pg_variation<R: Rng + ?Sized>(
    parent: &ParamVector,
    ensemble: &CriticEnsemble,
    buffer: &ReplayBuffer,
    cfg: &VariationConfig,
    rng: &mut R,
) -> Result<ParamVector> {
    pg_variation_with(parent, &ensemble.actor_spec, &ensemble.q1_critic(), buffer, cfg, rng)
}

/// `(n_ga, n_pg, n_greedy)` for one batch. The greedy copy is part of the
/// PG share and disappears when the batch is pure GA.
pub fn split_batch(cfg: &VariationConfig) -> (usize, usize, usize) {
    let b = cfg.batch_size;
    let n_ga = ((cfg.proportion_ga * b as f64).floor() as usize).min(b);
    let n_greedy = usize::from(cfg.proportion_ga < 1.0 && n_ga < b);
    (n_ga, b - n_ga - n_greedy, n_greedy)
}

pub fn greedy_offspring(ensemble: &CriticEnsemble) -> ParamVector {
    ensemble.greedy.clone()
}
