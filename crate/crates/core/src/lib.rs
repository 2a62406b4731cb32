//! Policy Gradient Assisted MAP-Elites (PGA-MAP-Elites) and its baselines,
//! with archive-correction metrics for uncertain domains.
//!
//! Modules, bottom-up:
//!
//! - [`neuro`]: flat-parameter MLPs, backprop and Adam.
//! - [`archive`]: CVT tessellation, the elite archive and the Deep-grid variant.
//! - [`rl`]: replay buffer and the TD3 critic ensemble.
//! - [`variation`]: directional GA and critic-driven PG operators.
//! - [`envs`]: built-in tasks and rollouts.
//! - [`qd_loop`]: the generational loops.
//! - [`metrics`]: QD metrics, corrected archives and rank-sum tests.
//! - [`runner`]: configs, replicated experiments, ablations and CSV outputs.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod archive;
pub mod envs;
pub mod error;
pub mod metrics;
pub mod neuro;
pub mod qd_loop;
pub mod rl;
pub mod runner;
pub mod variation;

pub use archive::{AddOutcome, BdPoint, CvtArchive, DeepGridArchive, Elite};
pub use envs::{evaluate, task_diag_onestep, task_pointnav, TaskSpec};
pub use error::{Error, Result};
pub use metrics::{compute_metrics, corrected_report, wilcoxon_rank_sum, MetricSet};
pub use neuro::{MlpSpec, ParamVector};
pub use qd_loop::{run, AlgoConfig, Algorithm, Operator, RunOutput};
