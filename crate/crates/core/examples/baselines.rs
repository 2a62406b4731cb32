//! Every algorithm on the same uncertain task and budget: PGA-MAP-Elites,
//! MAP-Elites, MAP-Elites-sampling, Deep-grid and TD3 with a passive archive.
//!
//! `cargo run --release --example baselines -- [budget] [td3_budget]`
//!
//! TD3 updates its critics every environment step, so it gets a separate,
//! smaller default budget.

use std::time::Instant;

use pga_map_elites::metrics::corrected_report;
use pga_map_elites::qd_loop::{run_with_centroids, AlgoConfig, Algorithm};
use pga_map_elites::task_pointnav;

fn main() -> pga_map_elites::Result<()> {
    let budget: u64 = std::env::args().nth(1).map_or(10_000, |a| a.parse().expect("budget"));
    let td3_budget: u64 = std::env::args().nth(2).map_or(1_000, |a| a.parse().expect("td3_budget"));
    let task = task_pointnav(true);
    let centroids = AlgoConfig::desk(Algorithm::MapElites).build_centroids(&task)?;
    println!("{:>20} {:>8} {:>10} {:>9} {:>8} {:>12} {:>8}", "algorithm", "budget", "qd_score", "coverage", "max", "corrected qd", "seconds");
    for algorithm in Algorithm::ALL {
        let cfg = AlgoConfig {
            eval_budget: if algorithm == Algorithm::Td3Passive { td3_budget } else { budget },
            ..AlgoConfig::desk(algorithm)
        };
        let start = Instant::now();
        let out = run_with_centroids(&cfg, &task, centroids.clone(), 0)?;
        let secs = start.elapsed().as_secs_f64();
        let report = corrected_report(&out.archive, &task, &cfg.actor_spec(&task)?, 50, 1)?;
        let last = out.records.last().expect("at least one generation");
        println!(
            "{:>20} {:>8} {:>10.1} {:>9.3} {:>8.3} {:>12.1} {:>8.1}",
            algorithm.name(),
            cfg.eval_budget,
            last.qd_score,
            last.coverage,
            last.max_fitness,
            report.corrected.qd_score,
            secs
        );
    }
    Ok(())
}
