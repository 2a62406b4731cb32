//! Experiment orchestration: TOML configs, seeded replications, ablation
//! sweeps and CSV outputs.
//!
//! Output layout of one experiment directory:
//!
//! ```text
//! rep_000/metrics.csv      generation,evaluations,qd_score,coverage,max_fitness
//! rep_000/operators.csv    generation,op,additions
//! rep_000/archive.csv      cell_id,centroid_*,bd_*,fitness,genotype_offset
//! rep_000/genotypes.bin
//! rep_000/critic_log.csv   step,loss
//! rep_000/run.toml         effective config plus replication seed
//! corrected.csv            run_id,metric,original,corrected,loss
//! summary.csv              per generation: median, q1, q3 of each metric
//! manifest.csv             path,sha256,status
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::archive::CvtArchive;
use crate::envs::TaskSpec;
use crate::error::{Error, Result};
use crate::metrics::{bonferroni, corrected_report, wilcoxon_rank_sum, CorrectedReport};
use crate::qd_loop::{run_with_centroids, AlgoConfig, Algorithm, ArchiveConfig, Operator, OperatorRecord, RunOutput, RunRecord};
use crate::rl::Td3Config;
use crate::variation::VariationConfig;

type RecordField = fn(&RunRecord) -> f64;

pub const METRICS_CSV: &str = "metrics.csv";
pub const OPERATORS_CSV: &str = "operators.csv";
pub const CRITIC_LOG_CSV: &str = "critic_log.csv";
pub const RUN_TOML: &str = "run.toml";
pub const CORRECTED_CSV: &str = "corrected.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const MANIFEST_CSV: &str = "manifest.csv";
pub const ABLATION_SUMMARY_CSV: &str = "ablation_summary.csv";
pub const STATS_CSV: &str = "stats.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: String,
    #[serde(default)]
    pub uncertain: bool,
    pub algorithm: Algorithm,
    #[serde(default, with = "seed_repr")]
    pub master_seed: u64,
    pub n_replications: usize,
    pub eval_budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Re-evaluations per elite for the corrected archive; 0 disables it.
    #[serde(default = "default_n_reeval")]
    pub n_reeval: usize,
}

fn default_n_reeval() -> usize {
    50
}

/// Loop parameters that are not owned by another section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QdConfig {
    pub n_init_episodes: usize,
    pub n_crit: usize,
    pub samples: usize,
    pub depth: usize,
    pub actor_hidden: Vec<usize>,
    pub td3_warmup_steps: usize,
}

impl Default for QdConfig {
    fn default() -> Self {
        Self::from(&AlgoConfig::default())
    }
}

impl From<&AlgoConfig> for QdConfig {
    fn from(c: &AlgoConfig) -> Self {
        Self {
            n_init_episodes: c.n_init_episodes,
            n_crit: c.n_crit,
            samples: c.samples,
            depth: c.depth,
            actor_hidden: c.actor_hidden.clone(),
            td3_warmup_steps: c.td3_warmup_steps,
        }
    }
}

/// Full run configuration, one TOML section per module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub qd: QdConfig,
    #[serde(default)]
    pub archive: ArchiveConfig,
    #[serde(default)]
    pub variation: VariationConfig,
    #[serde(default)]
    pub td3: Td3Config,
}

impl RunConfig {
    pub fn new(task: &str, uncertain: bool, algo: &AlgoConfig, master_seed: u64, n_replications: usize) -> Self {
        Self {
            experiment: ExperimentConfig {
                task: task.to_string(),
                uncertain,
                algorithm: algo.algorithm,
                master_seed,
                n_replications,
                eval_budget: algo.eval_budget,
                output_dir: None,
                n_reeval: default_n_reeval(),
            },
            qd: QdConfig::from(algo),
            archive: algo.archive.clone(),
            variation: algo.variation.clone(),
            td3: algo.td3.clone(),
        }
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn algo_config(&self) -> AlgoConfig {
        AlgoConfig {
            algorithm: self.experiment.algorithm,
            n_init_episodes: self.qd.n_init_episodes,
            n_crit: self.qd.n_crit,
            samples: self.qd.samples,
            depth: self.qd.depth,
            eval_budget: self.experiment.eval_budget,
            actor_hidden: self.qd.actor_hidden.clone(),
            td3_warmup_steps: self.qd.td3_warmup_steps,
            variation: self.variation.clone(),
            td3: self.td3.clone(),
            archive: self.archive.clone(),
        }
    }

    pub fn task(&self) -> Result<TaskSpec> {
        TaskSpec::by_name(&self.experiment.task, self.experiment.uncertain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.n_replications == 0 {
            return Err(Error::Config("n_replications must be at least 1".into()));
        }
        self.task()?;
        self.algo_config().validate()
    }
}

/// Replication record written next to each replication's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationInfo {
    pub index: usize,
    #[serde(with = "seed_repr")]
    pub seed: u64,
}

/// TOML integers are signed 64-bit; seeds above `i64::MAX` are written as
/// decimal strings. Both forms are accepted on input.
mod seed_repr {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        struct SeedVisitor;
        impl Visitor<'_> for SeedVisitor {
            type Value = u64;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative integer or a decimal string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<u64, E> {
                u64::try_from(v).map_err(|_| E::custom("seed must be non-negative"))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<u64, E> {
                Ok(v)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<u64, E> {
                v.parse().map_err(|_| E::custom(format!("invalid seed {v:?}")))
            }
        }
        d.deserialize_any(SeedVisitor)
    }
}

/// Contents of a replication's `run.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplicationToml {
    replication: ReplicationInfo,
    experiment: ExperimentConfig,
    qd: QdConfig,
    archive: ArchiveConfig,
    variation: VariationConfig,
    td3: Td3Config,
}

impl ReplicationToml {
    fn new(info: ReplicationInfo, cfg: &RunConfig) -> Self {
        let cfg = cfg.clone();
        Self {
            replication: info,
            experiment: cfg.experiment,
            qd: cfg.qd,
            archive: cfg.archive,
            variation: cfg.variation,
            td3: cfg.td3,
        }
    }

    fn config(&self) -> RunConfig {
        RunConfig {
            experiment: self.experiment.clone(),
            qd: self.qd.clone(),
            archive: self.archive.clone(),
            variation: self.variation.clone(),
            td3: self.td3.clone(),
        }
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `index`: `splitmix64(master_seed + index)`.
pub fn replication_seed(master_seed: u64, index: usize) -> u64 {
    splitmix64(master_seed.wrapping_add(index as u64))
}

/// Seed of the re-evaluation stream for a replication, disjoint from its
/// optimisation streams.
pub fn reeval_seed(replication_seed: u64) -> u64 {
    splitmix64(replication_seed ^ 0xC0FF_EE00_D15E_A5E5)
}

#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub index: usize,
    pub seed: u64,
    pub records: Vec<RunRecord>,
    pub operators: Vec<OperatorRecord>,
    pub corrected: Option<CorrectedReport>,
}

impl ReplicationResult {
    pub fn final_record(&self) -> &RunRecord {
        self.records.last().expect("runs have at least one generation")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub out_dir: PathBuf,
    pub replications: Vec<ReplicationResult>,
}

pub fn replication_dir(index: usize) -> String {
    format!("rep_{index:03}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(Error::from)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_metrics_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["generation", "evaluations", "qd_score", "coverage", "max_fitness"])?;
    for r in records {
        w.write_record([
            r.generation.to_string(),
            r.evaluations.to_string(),
            r.qd_score.to_string(),
            r.coverage.to_string(),
            r.max_fitness.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_operators_csv(path: &Path, operators: &[OperatorRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["generation", "op", "additions"])?;
    for o in operators {
        w.write_record([o.generation.to_string(), o.op.name().to_string(), o.additions.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_critic_log(path: &Path, log: &[(u64, f64)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["step", "loss"])?;
    for (step, loss) in log {
        w.write_record([step.to_string(), loss.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let parse_err = || Error::Dump(format!("{}: malformed row {:?}", path.display(), row));
        out.push(RunRecord {
            generation: field(0).parse().map_err(|_| parse_err())?,
            evaluations: field(1).parse().map_err(|_| parse_err())?,
            qd_score: field(2).parse().map_err(|_| parse_err())?,
            coverage: field(3).parse().map_err(|_| parse_err())?,
            max_fitness: field(4).parse().map_err(|_| parse_err())?,
        });
    }
    Ok(out)
}

pub fn read_operators_csv(path: &Path) -> Result<Vec<OperatorRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let parse_err = || Error::Dump(format!("{}: malformed row {:?}", path.display(), row));
        out.push(OperatorRecord {
            generation: row.get(0).unwrap_or("").parse().map_err(|_| parse_err())?,
            op: row.get(1).unwrap_or("").parse()?,
            additions: row.get(2).unwrap_or("").parse().map_err(|_| parse_err())?,
        });
    }
    Ok(out)
}

/// Additions per operator in the early and late halves of a run. The split
/// is at `n_generations / 2`: generation `g` is early iff `2g < n`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhaseContributions {
    pub n_generations: u64,
    pub early: BTreeMap<Operator, u64>,
    pub late: BTreeMap<Operator, u64>,
}

impl PhaseContributions {
    pub fn from_records(records: &[OperatorRecord]) -> Self {
        let n_generations = records.iter().map(|r| r.generation + 1).max().unwrap_or(0);
        let mut out = Self {
            n_generations,
            ..Self::default()
        };
        for r in records {
            let phase = if 2 * r.generation < n_generations { &mut out.early } else { &mut out.late };
            *phase.entry(r.op).or_insert(0) += r.additions;
        }
        out
    }

    pub fn total(&self, op: Operator) -> u64 {
        self.early.get(&op).copied().unwrap_or(0) + self.late.get(&op).copied().unwrap_or(0)
    }

    /// Fraction of `op`'s additions made in the early half; `None` if it
    /// never added anything.
    pub fn early_share(&self, op: Operator) -> Option<f64> {
        let total = self.total(op);
        (total > 0).then(|| self.early.get(&op).copied().unwrap_or(0) as f64 / total as f64)
    }
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `(median, q1, q3)` of a sample.
pub fn median_quartiles(values: &[f64]) -> (f64, f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    (quantile(&v, 0.5), quantile(&v, 0.25), quantile(&v, 0.75))
}

pub fn write_summary_csv(path: &Path, runs: &[&[RunRecord]]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["generation".to_string(), "evaluations".to_string()];
    for m in ["qd_score", "coverage", "max_fitness"] {
        for s in ["median", "q1", "q3"] {
            header.push(format!("{m}_{s}"));
        }
    }
    w.write_record(&header)?;
    let n_gen = runs.iter().map(|r| r.len()).min().unwrap_or(0);
    for g in 0..n_gen {
        let mut row = vec![runs[0][g].generation.to_string(), runs[0][g].evaluations.to_string()];
        let columns: [fn(&RunRecord) -> f64; 3] = [|r| r.qd_score, |r| r.coverage, |r| r.max_fitness];
        for get in columns {
            let values: Vec<f64> = runs.iter().map(|r| get(&r[g])).collect();
            let (med, q1, q3) = median_quartiles(&values);
            row.extend([med.to_string(), q1.to_string(), q3.to_string()]);
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_corrected_rows(w: &mut csv::Writer<fs::File>, run_id: &str, report: &CorrectedReport) -> Result<()> {
    let (o, c, l) = (&report.original, &report.corrected, &report.losses);
    for (metric, orig, corr, loss) in [
        ("qd_score", o.qd_score, c.qd_score, l.qd_score),
        ("max_fitness", o.max_fitness, c.max_fitness, l.max_fitness),
        ("coverage", o.coverage, c.coverage, l.coverage),
    ] {
        w.write_record([run_id.to_string(), metric.to_string(), orig.to_string(), corr.to_string(), loss.to_string()])?;
    }
    Ok(())
}

fn corrected_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let mut w = csv_writer(path)?;
    w.write_record(["run_id", "metric", "original", "corrected", "loss"])?;
    Ok(w)
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(dir, e))?;
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else if path != root.join(MANIFEST_CSV) {
            out.push(path);
        }
    }
    Ok(())
}

/// Writes `manifest.csv` listing every file under `dir` (recursively, in
/// sorted path order) with its SHA-256 and the run status.
pub fn write_manifest(dir: &Path, complete: bool) -> Result<()> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    let path = dir.join(MANIFEST_CSV);
    let mut w = csv_writer(&path)?;
    w.write_record(["path", "sha256", "status"])?;
    let status = if complete { "complete" } else { "partial" };
    for f in files {
        let rel = f.strip_prefix(dir).unwrap_or(&f);
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        w.write_record([rel, sha256_file(&f)?, status.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

fn write_replication(dir: &Path, cfg: &RunConfig, info: ReplicationInfo, out: &RunOutput) -> Result<()> {
    create_dir(dir)?;
    write_metrics_csv(&dir.join(METRICS_CSV), &out.records)?;
    write_operators_csv(&dir.join(OPERATORS_CSV), &out.operators)?;
    write_critic_log(&dir.join(CRITIC_LOG_CSV), &out.critic_log)?;
    out.archive.dump(dir)?;
    let text = toml::to_string(&ReplicationToml::new(info, cfg)).map_err(|e| Error::Config(e.to_string()))?;
    let path = dir.join(RUN_TOML);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Runs every replication of `cfg` into `out_dir`. On failure the manifest
/// is still written, with every row marked `partial`.
pub fn run_experiment(cfg: &RunConfig, out_dir: &Path) -> Result<ExperimentResult> {
    cfg.validate()?;
    create_dir(out_dir)?;
    let result = run_replications(cfg, out_dir);
    write_manifest(out_dir, result.is_ok())?;
    result
}

fn run_replications(cfg: &RunConfig, out_dir: &Path) -> Result<ExperimentResult> {
    let task = cfg.task()?;
    let algo = cfg.algo_config();
    let centroids = algo.build_centroids(&task)?;
    let policy = algo.actor_spec(&task)?;
    let n_reeval = cfg.experiment.n_reeval;
    let mut corrected = if n_reeval > 0 {
        Some(corrected_writer(&out_dir.join(CORRECTED_CSV))?)
    } else {
        None
    };

    let mut replications = Vec::with_capacity(cfg.experiment.n_replications);
    for index in 0..cfg.experiment.n_replications {
        let seed = replication_seed(cfg.experiment.master_seed, index);
        let out = run_with_centroids(&algo, &task, centroids.clone(), seed)?;
        let name = replication_dir(index);
        write_replication(&out_dir.join(&name), cfg, ReplicationInfo { index, seed }, &out)?;
        let report = match corrected.as_mut() {
            Some(w) => {
                let report = corrected_report(&out.archive, &task, &policy, n_reeval, reeval_seed(seed))?;
                write_corrected_rows(w, &name, &report)?;
                Some(report)
            }
            None => None,
        };
        replications.push(ReplicationResult {
            index,
            seed,
            records: out.records,
            operators: out.operators,
            corrected: report,
        });
    }
    if let Some(mut w) = corrected {
        w.flush().map_err(|e| Error::io(out_dir.join(CORRECTED_CSV), e))?;
    }
    let runs: Vec<&[RunRecord]> = replications.iter().map(|r| r.records.as_slice()).collect();
    write_summary_csv(&out_dir.join(SUMMARY_CSV), &runs)?;
    Ok(ExperimentResult {
        out_dir: out_dir.to_path_buf(),
        replications,
    })
}

/// Loads a config file and runs it. `seed` overrides the master seed and
/// `out` the configured output directory (default `out/`).
pub fn run_experiment_file(path: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<ExperimentResult> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.experiment.master_seed = seed;
    }
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.experiment.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    run_experiment(&cfg, &out_dir)
}

pub fn proportion_dir(p: f64) -> String {
    format!("proportion_{p}")
}

pub fn parse_proportions(text: &str) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|t| {
            let v: f64 = t.trim().parse().map_err(|_| Error::Config(format!("bad proportion {t:?}")))?;
            if (0.0..=1.0).contains(&v) {
                Ok(v)
            } else {
                Err(Error::Config(format!("proportion {v} outside [0, 1]")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::Config("empty proportion list".into()));
    }
    Ok(values)
}

#[derive(Debug, Clone)]
pub struct AblationResult {
    pub proportions: Vec<f64>,
    pub experiments: Vec<ExperimentResult>,
}

/// One PGA-MAP-Elites experiment per GA proportion, all sharing the
/// replication seeds of `cfg`. Writes `ablation_summary.csv` (final metrics
/// per replication) and `stats.csv` (two-sided rank-sum tests between every
/// pair of proportions, Bonferroni-corrected per metric).
pub fn run_ablation(cfg: &RunConfig, proportions: &[f64], out_dir: &Path) -> Result<AblationResult> {
    if proportions.is_empty() || proportions.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Config("proportions must be a non-empty list in [0, 1]".into()));
    }
    create_dir(out_dir)?;
    let mut experiments = Vec::with_capacity(proportions.len());
    for &p in proportions {
        let mut sub = cfg.clone();
        sub.experiment.algorithm = Algorithm::PgaMapElites;
        sub.variation.proportion_ga = p;
        match run_experiment(&sub, &out_dir.join(proportion_dir(p))) {
            Ok(r) => experiments.push(r),
            Err(e) => {
                write_manifest(out_dir, false)?;
                return Err(e);
            }
        }
    }

    let summary_path = out_dir.join(ABLATION_SUMMARY_CSV);
    let mut w = csv_writer(&summary_path)?;
    w.write_record(["proportion", "replication", "seed", "qd_score", "coverage", "max_fitness", "qd_score_loss"])?;
    for (p, exp) in proportions.iter().zip(&experiments) {
        for r in &exp.replications {
            let last = r.final_record();
            let loss = r.corrected.as_ref().map(|c| c.losses.qd_score.to_string()).unwrap_or_default();
            w.write_record([
                p.to_string(),
                r.index.to_string(),
                r.seed.to_string(),
                last.qd_score.to_string(),
                last.coverage.to_string(),
                last.max_fitness.to_string(),
                loss,
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&summary_path, e))?;

    let stats_path = out_dir.join(STATS_CSV);
    let mut w = csv_writer(&stats_path)?;
    w.write_record(["pairing", "metric", "raw_p", "bonferroni_p"])?;
    let finals = |exp: &ExperimentResult, get: RecordField| -> Vec<f64> {
        exp.replications.iter().map(|r| get(r.final_record())).collect()
    };
    let metrics: [(&str, RecordField); 3] = [
        ("qd_score", |r| r.qd_score),
        ("coverage", |r| r.coverage),
        ("max_fitness", |r| r.max_fitness),
    ];
    for (name, get) in metrics {
        let mut pairings = Vec::new();
        let mut raw = Vec::new();
        for i in 0..experiments.len() {
            for j in i + 1..experiments.len() {
                pairings.push(format!("{}_vs_{}", proportions[i], proportions[j]));
                raw.push(wilcoxon_rank_sum(&finals(&experiments[i], get), &finals(&experiments[j], get)));
            }
        }
        if raw.is_empty() {
            continue;
        }
        let adjusted = bonferroni(&raw, raw.len());
        for ((pairing, raw_p), adj) in pairings.into_iter().zip(&raw).zip(adjusted) {
            w.write_record([pairing, name.to_string(), raw_p.to_string(), adj.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(&stats_path, e))?;
    write_manifest(out_dir, true)?;

    Ok(AblationResult {
        proportions: proportions.to_vec(),
        experiments,
    })
}

/// Re-evaluates a dumped replication archive (a `rep_*` directory with its
/// `run.toml`) and writes `corrected.csv` into that directory. Without
/// `seed`, the re-evaluation seed matches the one `run_experiment` used.
pub fn correct_archive_dir(dir: &Path, n_reeval: usize, seed: Option<u64>) -> Result<CorrectedReport> {
    if n_reeval == 0 {
        return Err(Error::Config("reevals must be positive".into()));
    }
    let toml_path = dir.join(RUN_TOML);
    let text = fs::read_to_string(&toml_path).map_err(|e| Error::io(&toml_path, e))?;
    let rep: ReplicationToml = toml::from_str(&text).map_err(|e| Error::ConfigParse {
        path: toml_path.clone(),
        message: e.to_string(),
    })?;
    let cfg = rep.config();
    let task = cfg.task()?;
    let policy = cfg.algo_config().actor_spec(&task)?;
    let archive = CvtArchive::load(dir)?;
    let seed = seed.unwrap_or_else(|| reeval_seed(rep.replication.seed));
    let report = corrected_report(&archive, &task, &policy, n_reeval, seed)?;
    let run_id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| replication_dir(rep.replication.index));
    let path = dir.join(CORRECTED_CSV);
    let mut w = corrected_writer(&path)?;
    write_corrected_rows(&mut w, &run_id, &report)?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(report)
}
