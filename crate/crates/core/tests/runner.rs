use std::fs;
use std::path::Path;
use std::process::Command;

use pga_map_elites::qd_loop::{AlgoConfig, Algorithm, ArchiveConfig};
use pga_map_elites::rl::Td3Config;
use pga_map_elites::runner::{
    correct_archive_dir, proportion_dir, read_metrics_csv, replication_dir, run_ablation, run_experiment, RunConfig,
    CORRECTED_CSV, MANIFEST_CSV, RUN_TOML,
};
use pga_map_elites::variation::VariationConfig;
use sha2::{Digest, Sha256};

fn tiny(algorithm: Algorithm) -> RunConfig {
    let algo = AlgoConfig {
        algorithm,
        n_init_episodes: 40,
        n_crit: 5,
        eval_budget: 400,
        actor_hidden: vec![4],
        td3_warmup_steps: 100,
        variation: VariationConfig {
            n_act: 2,
            pg_batch: 8,
            batch_size: 20,
            ..VariationConfig::default()
        },
        td3: Td3Config {
            batch_size: 16,
            critic_hidden: vec![8],
            buffer_capacity: 20_000,
            ..Td3Config::default()
        },
        archive: ArchiveConfig {
            n_centroids: 64,
            cvt_samples: 1600,
            cvt_seed: 0,
        },
        ..AlgoConfig::default()
    };
    let mut cfg = RunConfig::new("pointnav", true, &algo, 11, 2);
    cfg.experiment.n_reeval = 5;
    cfg
}

fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn rerun_produces_identical_tree() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny(Algorithm::PgaMapElites);
    cfg.experiment.n_replications = 1;
    run_experiment(&cfg, &tmp.path().join("a")).unwrap();
    run_experiment(&cfg, &tmp.path().join("b")).unwrap();
    let (a, b) = (tree(&tmp.path().join("a")), tree(&tmp.path().join("b")));
    assert_eq!(a.len(), 9);
    assert_eq!(a, b);
}

#[test]
fn manifest_hashes_every_file() {
    let tmp = tempfile::tempdir().unwrap();
    run_experiment(&tiny(Algorithm::DeepGrid), tmp.path()).unwrap();
    let manifest = fs::read_to_string(tmp.path().join(MANIFEST_CSV)).unwrap();
    let rows: Vec<&str> = manifest.lines().skip(1).collect();
    let files = tree(tmp.path());
    assert_eq!(rows.len(), files.len() - 1);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[2], "complete");
        let bytes = fs::read(tmp.path().join(cols[0])).unwrap();
        assert_eq!(cols[1], hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn failed_run_leaves_partial_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    // A file where the second replication directory should go.
    fs::write(tmp.path().join(replication_dir(1)), b"occupied").unwrap();
    let err = run_experiment(&tiny(Algorithm::MapElites), tmp.path());
    assert!(err.is_err());
    let manifest = fs::read_to_string(tmp.path().join(MANIFEST_CSV)).unwrap();
    assert!(manifest.lines().skip(1).all(|l| l.ends_with(",partial")));
    assert!(manifest.contains("rep_000/metrics.csv"));
}

#[test]
fn summary_reports_median_and_quartiles() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny(Algorithm::MapElites);
    cfg.experiment.n_replications = 3;
    let result = run_experiment(&cfg, tmp.path()).unwrap();
    let text = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    let last = text.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    let mut finals: Vec<f64> = result.replications.iter().map(|r| r.final_record().qd_score).collect();
    finals.sort_by(f64::total_cmp);
    assert_eq!(cols[2], finals[1]);
    assert_eq!(cols[3], 0.5 * (finals[0] + finals[1]));
    assert_eq!(cols[4], 0.5 * (finals[1] + finals[2]));
    let rep0 = read_metrics_csv(&tmp.path().join("rep_000/metrics.csv")).unwrap();
    assert_eq!(rep0, result.replications[0].records);
}

#[test]
fn ablation_at_proportion_one_matches_map_elites() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny(Algorithm::PgaMapElites);
    run_ablation(&cfg, &[1.0], &tmp.path().join("abl")).unwrap();
    run_experiment(&tiny(Algorithm::MapElites), &tmp.path().join("me")).unwrap();
    let abl = tree(&tmp.path().join("abl").join(proportion_dir(1.0)));
    let me = tree(&tmp.path().join("me"));
    // Only the recorded config (algorithm, proportion) and its hash differ.
    let strip = |t: Vec<(String, Vec<u8>)>| -> Vec<(String, Vec<u8>)> {
        t.into_iter().filter(|(p, _)| !p.ends_with(RUN_TOML) && p != MANIFEST_CSV).collect()
    };
    assert_eq!(strip(abl), strip(me));
}

#[test]
fn ablation_sweep_shares_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny(Algorithm::PgaMapElites);
    let props = [0.0, 0.25, 0.5, 0.75, 1.0];
    let result = run_ablation(&cfg, &props, tmp.path()).unwrap();
    let dirs = fs::read_dir(tmp.path()).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(dirs, 5);
    for exp in &result.experiments {
        let seeds: Vec<u64> = exp.replications.iter().map(|r| r.seed).collect();
        let base: Vec<u64> = result.experiments[0].replications.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, base);
    }
    let stats = fs::read_to_string(tmp.path().join("stats.csv")).unwrap();
    // 10 pairings x 3 metrics.
    assert_eq!(stats.lines().count(), 1 + 30);
    let summary = fs::read_to_string(tmp.path().join("ablation_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 5 * 2);
    assert!(run_ablation(&cfg, &[1.5], &tmp.path().join("bad")).is_err());
}

#[test]
fn correct_reproduces_experiment_report() {
    let tmp = tempfile::tempdir().unwrap();
    let result = run_experiment(&tiny(Algorithm::PgaMapElites), tmp.path()).unwrap();
    let rep = tmp.path().join(replication_dir(1));
    let report = correct_archive_dir(&rep, 5, None).unwrap();
    assert_eq!(Some(&report), result.replications[1].corrected.as_ref());
    let top = fs::read_to_string(tmp.path().join(CORRECTED_CSV)).unwrap();
    let local = fs::read_to_string(rep.join(CORRECTED_CSV)).unwrap();
    for line in local.lines().skip(1) {
        assert!(top.contains(line), "{line}");
    }
}

fn pgame() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pgame"))
}

#[test]
fn cli_run_correct_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("cfg.toml");
    fs::write(&config, tiny(Algorithm::MapElites).to_toml_string().unwrap()).unwrap();
    let out = tmp.path().join("out");
    let status = pgame()
        .args(["run", "--config", config.to_str().unwrap(), "--seed", "5", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(out.join("rep_001/archive.csv").exists());
    let run_toml = fs::read_to_string(out.join("rep_000").join(RUN_TOML)).unwrap();
    assert!(run_toml.contains("master_seed = 5"));

    let corrected = pgame()
        .args(["correct", "--archive", out.join("rep_000").to_str().unwrap(), "--reevals", "3"])
        .output()
        .unwrap();
    assert!(corrected.status.success());
    assert!(String::from_utf8_lossy(&corrected.stdout).starts_with("metric,original,corrected,loss"));

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[experiment]\ntask = \"pointnav\"\nalgorithm = \"map_elites\"\nn_replications = 1\n").unwrap();
    let failed = pgame().args(["run", "--config", bad.to_str().unwrap()]).output().unwrap();
    assert!(!failed.status.success());
    let msg = String::from_utf8_lossy(&failed.stderr);
    assert!(msg.contains("eval_budget") && msg.contains("line 1"), "{msg}");
}

#[test]
fn cli_ablate() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("cfg.toml");
    let mut cfg = tiny(Algorithm::PgaMapElites);
    cfg.experiment.n_replications = 1;
    fs::write(&config, cfg.to_toml_string().unwrap()).unwrap();
    let out = tmp.path().join("abl");
    let status = pgame()
        .args(["ablate", "--config", config.to_str().unwrap(), "--proportions", "0,1", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(out.join("proportion_0").is_dir() && out.join("proportion_1").is_dir());
    assert!(out.join("stats.csv").exists());
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate().unwrap();
            cfg.task().unwrap();
            n += 1;
        }
    }
    assert!(n >= 5);
}
