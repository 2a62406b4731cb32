use pga_map_elites::envs::task_pointnav;
use pga_map_elites::qd_loop::{run, AlgoConfig, Algorithm, ArchiveConfig, Operator};
use pga_map_elites::variation::VariationConfig;

fn small(algorithm: Algorithm) -> AlgoConfig {
    AlgoConfig {
        algorithm,
        n_init_episodes: 60,
        n_crit: 5,
        samples: 4,
        depth: 4,
        eval_budget: if algorithm == Algorithm::Td3Passive { 80 } else { 600 },
        actor_hidden: vec![6],
        td3_warmup_steps: 500,
        variation: VariationConfig {
            n_act: 3,
            pg_batch: 16,
            batch_size: 30,
            ..VariationConfig::default()
        },
        archive: ArchiveConfig {
            n_centroids: 100,
            cvt_samples: 2000,
            cvt_seed: 4,
        },
        ..AlgoConfig::desk(algorithm)
    }
}

#[test]
fn every_algorithm_is_deterministic() {
    let task = task_pointnav(true);
    for algorithm in Algorithm::ALL {
        let cfg = small(algorithm);
        let a = run(&cfg, &task, 21).unwrap();
        let b = run(&cfg, &task, 21).unwrap();
        assert_eq!(a.records, b.records, "{algorithm}");
        assert_eq!(a.archive, b.archive, "{algorithm}");
        assert_eq!(a.operators, b.operators, "{algorithm}");
        assert_eq!(a.critic_log, b.critic_log, "{algorithm}");
        let c = run(&cfg, &task, 22).unwrap();
        assert_ne!(a.records, c.records, "{algorithm} ignores its seed");
    }
}

#[test]
fn budget_accounting() {
    let task = task_pointnav(true);
    for algorithm in Algorithm::ALL {
        let cfg = small(algorithm);
        let out = run(&cfg, &task, 1).unwrap();
        let per_generation = match algorithm {
            Algorithm::MapElitesSampling => (cfg.variation.batch_size * cfg.samples) as u64,
            Algorithm::Td3Passive => 2,
            _ => cfg.variation.batch_size as u64,
        };
        assert!(out.evaluations >= cfg.eval_budget);
        assert!(out.evaluations < cfg.eval_budget + per_generation);
        for (g, r) in out.records.iter().enumerate() {
            assert_eq!(r.generation, g as u64);
            assert_eq!(r.evaluations, (g as u64 + 1) * per_generation);
        }
    }
}

#[test]
fn pga_offspring_mix_follows_split() {
    let task = task_pointnav(true);
    let cfg = small(Algorithm::PgaMapElites);
    let out = run(&cfg, &task, 2).unwrap();
    let init_generations = cfg.n_init_episodes.div_ceil(cfg.variation.batch_size) as u64;
    for o in &out.operators {
        let expected_init = o.generation < init_generations;
        assert_eq!(o.op == Operator::Init, expected_init, "{o:?}");
        assert!(o.additions <= cfg.variation.batch_size as u64);
    }
    let trained_generations = out.records.len() as u64 - init_generations;
    assert_eq!(out.critic_log.len() as u64, trained_generations * cfg.n_crit as u64);
}
