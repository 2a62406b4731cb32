//! Built-in episodic continuous-control tasks.
//!
//! Dynamics are pure functions of `(state, action)`. The only randomness is
//! the seeded initial-state draw of the uncertain variants.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::archive::BdPoint;
use crate::error::{Error, Result};
use crate::neuro::{MlpSpec, Trace};
use crate::rl::Transition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    /// 2-D point mass rewarded for progress along +x.
    PointNav,
    /// One-step bandit with a known quadratic optimum.
    DiagOneStep,
}

pub const POINTNAV_ARENA: f64 = 5.0;
pub const DIAG_OPTIMUM: [f64; 2] = [0.5, -0.25];

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub horizon: usize,
    pub bd_dim: usize,
    /// Raw `(low, high)` range of every BD dimension before normalisation.
    pub bd_bounds: Vec<(f64, f64)>,
    pub uncertain: bool,
    pub init_noise_sigma: f64,
    /// Lowest reachable fitness; doubles as the QD-score offset.
    pub fitness_floor: f64,
    /// Whether reaching the horizon is a true terminal state (bootstrap
    /// masked) rather than a time-limit truncation.
    pub terminal_at_horizon: bool,
}

pub fn task_pointnav(uncertain: bool) -> TaskSpec {
    TaskSpec {
        kind: TaskKind::PointNav,
        obs_dim: 4,
        act_dim: 2,
        horizon: 50,
        bd_dim: 2,
        bd_bounds: vec![(-POINTNAV_ARENA, POINTNAV_ARENA); 2],
        uncertain,
        init_noise_sigma: if uncertain { 0.05 } else { 0.0 },
        fitness_floor: -10.0,
        terminal_at_horizon: false,
    }
}

pub fn task_diag_onestep() -> TaskSpec {
    TaskSpec {
        kind: TaskKind::DiagOneStep,
        obs_dim: 2,
        act_dim: 2,
        horizon: 1,
        bd_dim: 2,
        bd_bounds: vec![(-1.0, 1.0); 2],
        uncertain: false,
        init_noise_sigma: 0.0,
        fitness_floor: -4.0,
        terminal_at_horizon: true,
    }
}

impl TaskSpec {
    pub fn by_name(name: &str, uncertain: bool) -> Result<Self> {
        match name {
            "pointnav" => Ok(task_pointnav(uncertain)),
            "diag_onestep" if !uncertain => Ok(task_diag_onestep()),
            "diag_onestep" => Err(Error::Config("diag_onestep has no uncertain variant".into())),
            other => Err(Error::Config(format!(
                "unknown task {other:?} (expected \"pointnav\" or \"diag_onestep\")"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            TaskKind::PointNav => "pointnav",
            TaskKind::DiagOneStep => "diag_onestep",
        }
    }

    pub fn normalize_bd(&self, raw: &[f64]) -> BdPoint {
        BdPoint::clamped(
            raw.iter()
                .zip(&self.bd_bounds)
                .map(|(&x, &(lo, hi))| (x - lo) / (hi - lo))
                .collect(),
        )
    }

    /// Fresh episode; `episode_seed` only matters for uncertain variants.
    pub fn reset(&self, episode_seed: u64) -> Episode<'_> {
        let state = match self.kind {
            TaskKind::PointNav => {
                let mut s = vec![0.0; 4];
                if self.uncertain && self.init_noise_sigma > 0.0 {
                    let mut rng = ChaCha8Rng::seed_from_u64(episode_seed);
                    for x in s.iter_mut() {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        *x = self.init_noise_sigma * z;
                    }
                }
                s
            }
            TaskKind::DiagOneStep => vec![0.0; 2],
        };
        Episode {
            task: self,
            state,
            t: 0,
            last_action: vec![0.0; self.act_dim],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: Vec<f64>,
    pub reward: f64,
    /// Episode is over (horizon reached or state diverged).
    pub done: bool,
    /// Value to store in the transition's terminal flag.
    pub terminal: bool,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct Episode<'a> {
    task: &'a TaskSpec,
    state: Vec<f64>,
    t: usize,
    last_action: Vec<f64>,
}

impl Episode<'_> {
    pub fn observation(&self) -> &[f64] {
        &self.state
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn step(&mut self, action: &[f64]) -> StepOutcome {
        let a: Vec<f64> = action.iter().map(|x| x.clamp(-1.0, 1.0)).collect();
        let energy: f64 = a.iter().map(|x| x * x).sum();
        let (next, reward) = match self.task.kind {
            TaskKind::PointNav => {
                let (px, py, vx, vy) = (self.state[0], self.state[1], self.state[2], self.state[3]);
                let nx = (px + 0.1 * vx).clamp(-POINTNAV_ARENA, POINTNAV_ARENA);
                let ny = (py + 0.1 * vy).clamp(-POINTNAV_ARENA, POINTNAV_ARENA);
                let nvx = 0.9 * vx + 0.1 * a[0];
                let nvy = 0.9 * vy + 0.1 * a[1];
                (vec![nx, ny, nvx, nvy], (nx - px) - 0.05 * energy)
            }
            TaskKind::DiagOneStep => {
                let r = -a
                    .iter()
                    .zip(DIAG_OPTIMUM)
                    .map(|(x, o)| (x - o) * (x - o))
                    .sum::<f64>();
                (vec![0.0; 2], r)
            }
        };
        self.t += 1;
        let diverged = !reward.is_finite() || next.iter().any(|x| !x.is_finite());
        let at_horizon = self.t >= self.task.horizon;
        self.last_action = a;
        if !diverged {
            self.state = next.clone();
        }
        StepOutcome {
            next_state: next,
            reward,
            done: at_horizon || diverged,
            terminal: at_horizon && self.task.terminal_at_horizon,
            diverged,
        }
    }

    /// Raw (un-normalised) behaviour descriptor of the trajectory so far.
    pub fn raw_bd(&self) -> Vec<f64> {
        match self.task.kind {
            TaskKind::PointNav => self.state[..2].to_vec(),
            TaskKind::DiagOneStep => self.last_action.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub fitness: f64,
    pub bd: BdPoint,
    pub transitions: Vec<Transition>,
    pub episode_seed: u64,
    pub truncated: bool,
}

/// Rolls out one noiseless episode of the policy.
pub fn evaluate(task: &TaskSpec, policy: &MlpSpec, params: &[f64], episode_seed: u64) -> Result<EvalResult> {
    if policy.input_size() != task.obs_dim || policy.output_size() != task.act_dim {
        return Err(Error::DimensionMismatch {
            context: "policy network vs task",
            expected: task.obs_dim,
            actual: policy.input_size(),
        });
    }
    let mut episode = task.reset(episode_seed);
    let mut trace = Trace::new(policy);
    let mut transitions = Vec::with_capacity(task.horizon);
    let mut fitness = 0.0;
    let mut truncated = false;
    loop {
        policy.forward_trace(params, episode.observation(), &mut trace)?;
        let state = episode.observation().to_vec();
        let action: Vec<f64> = trace.output().to_vec();
        let out = episode.step(&action);
        if out.diverged {
            truncated = true;
            break;
        }
        fitness += out.reward;
        transitions.push(Transition {
            state,
            action: action.iter().map(|x| x.clamp(-1.0, 1.0)).collect(),
            reward: out.reward,
            next_state: out.next_state,
            terminal: out.terminal,
        });
        if out.done {
            break;
        }
    }
    let fitness = if truncated || !fitness.is_finite() {
        task.fitness_floor
    } else {
        fitness.max(task.fitness_floor)
    };
    Ok(EvalResult {
        fitness,
        bd: task.normalize_bd(&episode.raw_bd()),
        transitions,
        episode_seed,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuro::ParamVector;
    use rand::{Rng, SeedableRng};

    fn zero_policy(task: &TaskSpec) -> (MlpSpec, ParamVector) {
        let spec = MlpSpec::actor(task.obs_dim, &[8], task.act_dim).unwrap();
        let p = ParamVector::zeros(spec.param_count());
        (spec, p)
    }

    /// Output layer biases set to atanh of the wanted constant action.
    fn constant_policy(task: &TaskSpec, action: &[f64]) -> (MlpSpec, ParamVector) {
        let (spec, mut p) = zero_policy(task);
        let n = p.len();
        for (i, a) in action.iter().enumerate() {
            p[n - task.act_dim + i] = a.atanh();
        }
        (spec, p)
    }

    #[test]
    fn pointnav_zero_policy_is_stationary() {
        let task = task_pointnav(false);
        let (spec, p) = zero_policy(&task);
        let r = evaluate(&task, &spec, &p, 0).unwrap();
        assert_eq!(r.fitness, 0.0);
        assert_eq!(&r.bd[..], &[0.5, 0.5]);
        assert_eq!(r.transitions.len(), 50);
        assert!(r.transitions.iter().all(|t| !t.terminal));
    }

    #[test]
    fn pointnav_constant_push_matches_closed_form() {
        let task = task_pointnav(false);
        let a = 0.999_999;
        let (spec, p) = constant_policy(&task, &[a, 0.0]);
        let r = evaluate(&task, &spec, &p, 0).unwrap();
        // v_t = a (1 - 0.9^t); x_T = 0.1 sum_{t<T} v_t.
        let x_final: f64 = (0..50).map(|t| 0.1 * a * (1.0 - 0.9f64.powi(t))).sum();
        let expected = x_final - 0.05 * a * a * 50.0;
        assert!((r.fitness - expected).abs() < 1e-9, "{} vs {expected}", r.fitness);
        assert!(r.fitness > 1.5);
        assert!((r.bd[0] - (x_final + 5.0) / 10.0).abs() < 1e-12);
    }

    #[test]
    fn pointnav_bd_stays_in_bounds() {
        let task = task_pointnav(true);
        let spec = MlpSpec::actor(4, &[8], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..20 {
            let p = ParamVector::new((0..spec.param_count()).map(|_| rng.random_range(-3.0..3.0)).collect());
            let r = evaluate(&task, &spec, &p, seed).unwrap();
            assert!(r.bd.iter().all(|x| (0.0..=1.0).contains(x)));
            assert!(r.fitness >= task.fitness_floor);
        }
    }

    #[test]
    fn deterministic_variant_ignores_seed() {
        let task = task_pointnav(false);
        let spec = MlpSpec::actor(4, &[8], 2).unwrap();
        let p = spec.init_params(&mut ChaCha8Rng::seed_from_u64(1));
        let a = evaluate(&task, &spec, &p, 1).unwrap();
        let b = evaluate(&task, &spec, &p, 999).unwrap();
        assert_eq!(a.fitness.to_bits(), b.fitness.to_bits());
        assert_eq!(a.bd, b.bd);
    }

    #[test]
    fn uncertain_variant_is_seeded() {
        let task = task_pointnav(true);
        let spec = MlpSpec::actor(4, &[8], 2).unwrap();
        let p = spec.init_params(&mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(evaluate(&task, &spec, &p, 7).unwrap(), evaluate(&task, &spec, &p, 7).unwrap());

        let bds: Vec<f64> = (0..50).map(|s| evaluate(&task, &spec, &p, s).unwrap().bd[0]).collect();
        let mean = bds.iter().sum::<f64>() / 50.0;
        let var = bds.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 49.0;
        assert!(var > 0.0);
    }

    #[test]
    fn diag_onestep_rewards() {
        let task = task_diag_onestep();
        let (spec, p) = constant_policy(&task, &DIAG_OPTIMUM);
        let r = evaluate(&task, &spec, &p, 0).unwrap();
        assert!(r.fitness.abs() < 1e-20);
        assert_eq!(r.transitions.len(), 1);
        assert!(r.transitions[0].terminal);

        let (spec, p) = zero_policy(&task);
        let r = evaluate(&task, &spec, &p, 0).unwrap();
        assert_eq!(r.fitness, -0.3125);
        assert_eq!(&r.bd[..], &[0.5, 0.5]);
    }

    #[test]
    fn rejects_mismatched_policy() {
        let task = task_pointnav(false);
        let spec = MlpSpec::actor(3, &[4], 2).unwrap();
        let p = ParamVector::zeros(spec.param_count());
        assert!(evaluate(&task, &spec, &p, 0).is_err());
        assert!(TaskSpec::by_name("hopper", false).is_err());
    }
}
