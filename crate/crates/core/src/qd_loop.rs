//! Generational QD loops: PGA-MAP-Elites and the baselines built from the
//! same parts (MAP-Elites, MAP-Elites-sampling, Deep-grid, TD3 with a
//! passive archive).
//!
//! Every run owns independent random streams derived from its seed, so that
//! evaluation noise, variation noise and critic training never share draws:
//!
//! | stream | consumer                                          |
//! |--------|---------------------------------------------------|
//! | 0      | random init genotypes, parent selection, GA noise |
//! | 1      | episode seeds                                     |
//! | 2      | network init, critic training, PG batches         |
//! | 3      | Deep-grid eviction                                |
//! | 4      | TD3 warm-up actions and exploration noise         |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::archive::{build_cvt, AddOutcome, BdPoint, CvtArchive, DeepEntry, DeepGridArchive};
use crate::envs::{evaluate, EvalResult, TaskSpec};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, compute_metrics_deep};
use crate::neuro::{MlpSpec, ParamVector};
use crate::rl::{CriticEnsemble, ReplayBuffer, Td3Config, Transition};
use crate::variation::{ga_directional, greedy_offspring, pg_variation, split_batch, VariationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    PgaMapElites,
    MapElites,
    MapElitesSampling,
    DeepGrid,
    Td3Passive,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::PgaMapElites,
        Algorithm::MapElites,
        Algorithm::MapElitesSampling,
        Algorithm::DeepGrid,
        Algorithm::Td3Passive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::PgaMapElites => "pga_map_elites",
            Algorithm::MapElites => "map_elites",
            Algorithm::MapElitesSampling => "map_elites_sampling",
            Algorithm::DeepGrid => "deep_grid",
            Algorithm::Td3Passive => "td3_passive",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchiveConfig {
    pub n_centroids: usize,
    pub cvt_samples: usize,
    pub cvt_seed: u64,
}

impl Default for ArchiveConfig {
    fn default() -> Self {
        Self {
            n_centroids: 1024,
            cvt_samples: 25_600,
            cvt_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoConfig {
    pub algorithm: Algorithm,
    /// Random-solution evaluations before any variation or training.
    pub n_init_episodes: usize,
    /// Critic (and delayed greedy actor) steps per generation.
    pub n_crit: usize,
    /// Evaluations per offspring for MAP-Elites-sampling.
    pub samples: usize,
    /// Deep-grid cell depth.
    pub depth: usize,
    pub eval_budget: u64,
    pub actor_hidden: Vec<usize>,
    /// Random-action timesteps before TD3 starts learning.
    pub td3_warmup_steps: usize,
    pub variation: VariationConfig,
    pub td3: Td3Config,
    pub archive: ArchiveConfig,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::PgaMapElites,
            n_init_episodes: 500,
            n_crit: 300,
            samples: 10,
            depth: 50,
            eval_budget: 1_000_000,
            actor_hidden: vec![128, 128],
            td3_warmup_steps: 2500,
            variation: VariationConfig::default(),
            td3: Td3Config::default(),
            archive: ArchiveConfig::default(),
        }
    }
}

impl AlgoConfig {
    /// Reduced networks and training schedule that keep a 5·10⁴-evaluation
    /// pointnav run to about a minute on one core. Evolutionary parameters
    /// and TD3 constants keep their default values.
    pub fn desk(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            n_init_episodes: 500,
            n_crit: 25,
            eval_budget: 50_000,
            actor_hidden: vec![16, 16],
            variation: VariationConfig {
                n_act: 5,
                pg_batch: 32,
                batch_size: 50,
                ..VariationConfig::default()
            },
            td3: Td3Config {
                batch_size: 64,
                critic_hidden: vec![32, 32],
                ..Td3Config::default()
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.variation.validate()?;
        self.td3.validate()?;
        let b = self.variation.batch_size as u64;
        if self.eval_budget < b {
            return Err(Error::Config(format!(
                "eval_budget {} is smaller than one batch ({b})",
                self.eval_budget
            )));
        }
        if self.n_init_episodes == 0 || self.samples == 0 || self.depth == 0 {
            return Err(Error::Config("n_init_episodes, samples and depth must be positive".into()));
        }
        if self.archive.n_centroids == 0 || self.archive.cvt_samples < self.archive.n_centroids {
            return Err(Error::Config("need n_centroids >= 1 and cvt_samples >= n_centroids".into()));
        }
        Ok(())
    }

    pub fn actor_spec(&self, task: &TaskSpec) -> Result<MlpSpec> {
        MlpSpec::actor(task.obs_dim, &self.actor_hidden, task.act_dim)
    }

    pub fn critic_spec(&self, task: &TaskSpec) -> Result<MlpSpec> {
        MlpSpec::critic(task.obs_dim, task.act_dim, &self.td3.critic_hidden)
    }

    pub fn build_centroids(&self, task: &TaskSpec) -> Result<Vec<BdPoint>> {
        build_cvt(
            task.bd_dim,
            self.archive.n_centroids,
            self.archive.cvt_samples,
            self.archive.cvt_seed,
        )
    }
}

/// Origin of an offspring, for archive-contribution accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operator {
    Init,
    Ga,
    Pg,
    Greedy,
    Td3,
}

impl Operator {
    pub fn name(self) -> &'static str {
        match self {
            Operator::Init => "Init",
            Operator::Ga => "GA",
            Operator::Pg => "PG",
            Operator::Greedy => "Greedy",
            Operator::Td3 => "TD3",
        }
    }
}

impl FromStr for Operator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Operator::Init, Operator::Ga, Operator::Pg, Operator::Greedy, Operator::Td3]
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown operator {s:?}")))
    }
}

/// One row of `metrics.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub generation: u64,
    /// Cumulative evaluations after this generation.
    pub evaluations: u64,
    pub qd_score: f64,
    pub coverage: f64,
    pub max_fitness: f64,
}

/// One row of `operators.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperatorRecord {
    pub generation: u64,
    pub op: Operator,
    pub additions: u64,
}

/// Per-operator additions (new cell or improvement) for one generation.
/// Every operator that produced offspring appears, even with zero additions.
pub fn record_operator_contribution(generation_log: &[(Operator, AddOutcome)]) -> BTreeMap<Operator, u64> {
    let mut counts = BTreeMap::new();
    for &(op, outcome) in generation_log {
        *counts.entry(op).or_insert(0) += u64::from(outcome.is_addition());
    }
    counts
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub algorithm: Algorithm,
    /// Reported archive (best entry per cell for Deep-grid).
    pub archive: CvtArchive,
    pub deep_archive: Option<DeepGridArchive>,
    pub records: Vec<RunRecord>,
    pub operators: Vec<OperatorRecord>,
    /// `(critic step, loss)` pairs.
    pub critic_log: Vec<(u64, f64)>,
    pub evaluations: u64,
    /// Final critics and greedy actor, for the algorithms that train them.
    pub ensemble: Option<CriticEnsemble>,
}

struct Streams {
    variation: ChaCha8Rng,
    episodes: ChaCha8Rng,
    training: ChaCha8Rng,
    deep: ChaCha8Rng,
    exploration: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        Self {
            variation: stream(0),
            episodes: stream(1),
            training: stream(2),
            deep: stream(3),
            exploration: stream(4),
        }
    }
}

pub fn run(cfg: &AlgoConfig, task: &TaskSpec, seed: u64) -> Result<RunOutput> {
    let centroids = cfg.build_centroids(task)?;
    run_with_centroids(cfg, task, centroids, seed)
}

/// Runs `cfg.algorithm` over a prebuilt tessellation.
pub fn run_with_centroids(cfg: &AlgoConfig, task: &TaskSpec, centroids: Vec<BdPoint>, seed: u64) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::Td3Passive => td3_loop(cfg, task, centroids, seed, true),
        _ => elites_loop(cfg, task, centroids, seed),
    }
}

fn with_algorithm(cfg: &AlgoConfig, algorithm: Algorithm) -> AlgoConfig {
    AlgoConfig {
        algorithm,
        ..cfg.clone()
    }
}

pub fn run_pga(cfg: &AlgoConfig, task: &TaskSpec, seed: u64) -> Result<RunOutput> {
    run(&with_algorithm(cfg, Algorithm::PgaMapElites), task, seed)
}

pub fn run_map_elites(cfg: &AlgoConfig, task: &TaskSpec, seed: u64) -> Result<RunOutput> {
    run(&with_algorithm(cfg, Algorithm::MapElites), task, seed)
}

pub fn run_map_elites_sampling(cfg: &AlgoConfig, task: &TaskSpec, seed: u64) -> Result<RunOutput> {
    run(&with_algorithm(cfg, Algorithm::MapElitesSampling), task, seed)
}

pub fn run_deep_grid(cfg: &AlgoConfig, task: &TaskSpec, seed: u64) -> Result<RunOutput> {
    run(&with_algorithm(cfg, Algorithm::DeepGrid), task, seed)
}

pub fn run_td3_passive(cfg: &AlgoConfig, task: &TaskSpec, seed: u64) -> Result<RunOutput> {
    run(&with_algorithm(cfg, Algorithm::Td3Passive), task, seed)
}

enum Container {
    Single(CvtArchive),
    Deep(DeepGridArchive),
}

impl Container {
    fn select<'a>(&'a self, rng: &mut ChaCha8Rng) -> Result<&'a ParamVector> {
        match self {
            Container::Single(a) => Ok(a.uniform_select(1, rng)?[0]),
            Container::Deep(d) => d.select(rng),
        }
    }
}

/// Shared loop of the MAP-Elites family (PGA, plain, sampling, Deep-grid).
fn elites_loop(cfg: &AlgoConfig, task: &TaskSpec, centroids: Vec<BdPoint>, seed: u64) -> Result<RunOutput> {
    let algorithm = cfg.algorithm;
    let actor_spec = cfg.actor_spec(task)?;
    let mut rng = Streams::new(seed);
    let b = cfg.variation.batch_size;
    let (n_ga, n_pg, n_greedy) = match algorithm {
        Algorithm::PgaMapElites => split_batch(&cfg.variation),
        _ => (b, 0, 0),
    };
    let samples = if algorithm == Algorithm::MapElitesSampling { cfg.samples } else { 1 };
    // Critics only exist when some offspring consume them; PGA with a pure
    // GA split is plain MAP-Elites.
    let mut critics = if n_pg + n_greedy > 0 {
        let critic_spec = cfg.critic_spec(task)?;
        Some((
            CriticEnsemble::new(actor_spec.clone(), critic_spec, &mut rng.training),
            ReplayBuffer::new(cfg.td3.buffer_capacity),
        ))
    } else {
        None
    };
    let mut container = match algorithm {
        Algorithm::DeepGrid => Container::Deep(DeepGridArchive::new(centroids, cfg.depth)),
        _ => Container::Single(CvtArchive::new(centroids)),
    };

    let mut records = Vec::new();
    let mut operators = Vec::new();
    let mut critic_log = Vec::new();
    let mut evaluations = 0u64;
    let mut eval_id = 0u64;
    let mut generation = 0u64;

    while evaluations < cfg.eval_budget {
        let init_phase = generation == 0 || evaluations < cfg.n_init_episodes as u64;
        let mut offspring: Vec<(ParamVector, Operator)> = Vec::with_capacity(b);
        if init_phase {
            for _ in 0..b {
                offspring.push((actor_spec.init_params(&mut rng.variation), Operator::Init));
            }
        } else {
            if let Some((ensemble, buffer)) = critics.as_mut() {
                for _ in 0..cfg.n_crit {
                    let loss = ensemble.critic_update(buffer, &cfg.td3, &mut rng.training)?;
                    critic_log.push((ensemble.steps(), loss));
                    ensemble.greedy_actor_update(buffer, &cfg.td3, &mut rng.training)?;
                }
            }
            for _ in 0..n_ga {
                let p1 = container.select(&mut rng.variation)?;
                let p2 = container.select(&mut rng.variation)?;
                offspring.push((ga_directional(p1, p2, &cfg.variation, &mut rng.variation)?, Operator::Ga));
            }
            if let Some((ensemble, buffer)) = critics.as_ref() {
                for _ in 0..n_pg {
                    let parent = container.select(&mut rng.variation)?;
                    let child = pg_variation(parent, ensemble, buffer, &cfg.variation, &mut rng.training)?;
                    offspring.push((child, Operator::Pg));
                }
                for _ in 0..n_greedy {
                    offspring.push((greedy_offspring(ensemble), Operator::Greedy));
                }
            }
        }

        // Episode seeds are assigned up front in offspring order.
        let seeds: Vec<Vec<u64>> = offspring
            .iter()
            .map(|_| (0..samples).map(|_| rng.episodes.random()).collect())
            .collect();
        let mut log = Vec::with_capacity(offspring.len());
        for ((genotype, op), seeds) in offspring.into_iter().zip(seeds) {
            let results = seeds
                .iter()
                .map(|&s| evaluate(task, &actor_spec, &genotype, s))
                .collect::<Result<Vec<EvalResult>>>()?;
            evaluations += results.len() as u64;
            let (fitness, bd) = aggregate(&results, task);
            if let Some((_, buffer)) = critics.as_mut() {
                for r in results {
                    buffer.extend(r.transitions);
                }
            }
            let outcome = match &mut container {
                Container::Single(a) => a.try_add(genotype, fitness, bd, eval_id),
                Container::Deep(d) => d.add(DeepEntry { genotype, fitness, bd }, &mut rng.deep),
            };
            eval_id += 1;
            log.push((op, outcome));
        }

        for (op, additions) in record_operator_contribution(&log) {
            operators.push(OperatorRecord { generation, op, additions });
        }
        let metrics = match &container {
            Container::Single(a) => compute_metrics(a, task.fitness_floor),
            Container::Deep(d) => compute_metrics_deep(d, task.fitness_floor),
        };
        records.push(RunRecord {
            generation,
            evaluations,
            qd_score: metrics.qd_score,
            coverage: metrics.coverage,
            max_fitness: metrics.max_fitness,
        });
        generation += 1;
    }

    let (archive, deep_archive) = match container {
        Container::Single(a) => (a, None),
        Container::Deep(d) => (d.best_archive(), Some(d)),
    };
    Ok(RunOutput {
        algorithm,
        archive,
        deep_archive,
        records,
        operators,
        critic_log,
        evaluations,
        ensemble: critics.map(|(e, _)| e),
    })
}

/// Mean fitness and mean BD over repeated evaluations (exact for one).
fn aggregate(results: &[EvalResult], task: &TaskSpec) -> (f64, BdPoint) {
    if let [single] = results {
        return (single.fitness, single.bd.clone());
    }
    let n = results.len() as f64;
    let fitness = results.iter().map(|r| r.fitness).sum::<f64>() / n;
    let bd = (0..task.bd_dim)
        .map(|d| results.iter().map(|r| r.bd[d]).sum::<f64>() / n)
        .collect();
    (fitness, BdPoint::clamped(bd))
}

/// Standard TD3 with per-timestep training. After each training episode the
/// current actor is evaluated noiselessly and offered to an archive that
/// never feeds back into training; `use_archive = false` skips the offer.
pub(crate) fn td3_loop(
    cfg: &AlgoConfig,
    task: &TaskSpec,
    centroids: Vec<BdPoint>,
    seed: u64,
    use_archive: bool,
) -> Result<RunOutput> {
    let actor_spec = cfg.actor_spec(task)?;
    let critic_spec = cfg.critic_spec(task)?;
    let mut rng = Streams::new(seed);
    let mut ensemble = CriticEnsemble::new(actor_spec.clone(), critic_spec, &mut rng.training);
    let mut buffer = ReplayBuffer::new(cfg.td3.buffer_capacity);
    let mut archive = CvtArchive::new(centroids);
    let td3 = &cfg.td3;

    let mut records = Vec::new();
    let mut operators = Vec::new();
    let mut critic_log = Vec::new();
    let mut evaluations = 0u64;
    let mut timesteps = 0usize;
    let mut generation = 0u64;
    let mut action = vec![0.0; task.act_dim];

    while evaluations < cfg.eval_budget {
        let mut episode = task.reset(rng.episodes.random());
        loop {
            let state = episode.observation().to_vec();
            if timesteps < cfg.td3_warmup_steps {
                for a in action.iter_mut() {
                    *a = rng.exploration.random_range(-1.0..=1.0);
                }
            } else {
                let mu = actor_spec.forward(&ensemble.greedy, &state)?;
                for (a, m) in action.iter_mut().zip(mu) {
                    let z: f64 = StandardNormal.sample(&mut rng.exploration);
                    *a = (m + td3.exploration_sigma * z).clamp(-1.0, 1.0);
                }
            }
            let out = episode.step(&action);
            if out.diverged {
                break;
            }
            buffer.push(Transition {
                state,
                action: action.clone(),
                reward: out.reward,
                next_state: out.next_state,
                terminal: out.terminal,
            });
            timesteps += 1;
            if timesteps >= cfg.td3_warmup_steps {
                let loss = ensemble.critic_update(&buffer, td3, &mut rng.training)?;
                critic_log.push((ensemble.steps(), loss));
                ensemble.greedy_actor_update(&buffer, td3, &mut rng.training)?;
            }
            if out.done {
                break;
            }
        }
        evaluations += 1;

        let result = evaluate(task, &actor_spec, &ensemble.greedy, rng.episodes.random())?;
        evaluations += 1;
        let outcome = if use_archive {
            archive.try_add(ensemble.greedy.clone(), result.fitness, result.bd, generation)
        } else {
            AddOutcome::Rejected
        };
        operators.push(OperatorRecord {
            generation,
            op: Operator::Td3,
            additions: u64::from(outcome.is_addition()),
        });
        let metrics = compute_metrics(&archive, task.fitness_floor);
        records.push(RunRecord {
            generation,
            evaluations,
            qd_score: metrics.qd_score,
            coverage: metrics.coverage,
            max_fitness: metrics.max_fitness,
        });
        generation += 1;
    }

    Ok(RunOutput {
        algorithm: Algorithm::Td3Passive,
        archive,
        deep_archive: None,
        records,
        operators,
        critic_log,
        evaluations,
        ensemble: Some(ensemble),
    })
}
