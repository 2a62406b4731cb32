//! PGA-MAP-Elites against plain MAP-Elites on the uncertain pointnav task,
//! paired seeds, with corrected QD-score losses and a one-sided rank-sum test.
//!
//! `cargo run --release --example pga_vs_map_elites -- [n_seeds] [budget]`

use std::time::Instant;

use pga_map_elites::metrics::{corrected_report, wilcoxon_rank_sum_alt, Alternative};
use pga_map_elites::qd_loop::{run_with_centroids, AlgoConfig, Algorithm};
use pga_map_elites::runner::{reeval_seed, replication_seed};
use pga_map_elites::task_pointnav;

fn main() -> pga_map_elites::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_seeds: usize = args.next().map_or(5, |a| a.parse().expect("n_seeds"));
    let budget: u64 = args.next().map_or(50_000, |a| a.parse().expect("budget"));
    let task = task_pointnav(true);

    let mut finals = Vec::new();
    for algorithm in [Algorithm::PgaMapElites, Algorithm::MapElites] {
        let cfg = AlgoConfig {
            eval_budget: budget,
            ..AlgoConfig::desk(algorithm)
        };
        let centroids = cfg.build_centroids(&task)?;
        let policy = cfg.actor_spec(&task)?;
        let mut scores = Vec::new();
        let mut losses = Vec::new();
        for i in 0..n_seeds {
            let seed = replication_seed(0, i);
            let start = Instant::now();
            let out = run_with_centroids(&cfg, &task, centroids.clone(), seed)?;
            let report = corrected_report(&out.archive, &task, &policy, 50, reeval_seed(seed))?;
            let last = out.records.last().unwrap();
            println!(
                "{algorithm:>15} seed {i}: qd {:8.2} cov {:.3} max {:6.3} | corrected qd {:8.2} loss {:.3} | {:.1}s",
                last.qd_score,
                last.coverage,
                last.max_fitness,
                report.corrected.qd_score,
                report.losses.qd_score,
                start.elapsed().as_secs_f64()
            );
            scores.push(last.qd_score);
            losses.push(report.losses.qd_score);
        }
        finals.push((algorithm, scores, losses));
    }
    let (pga, me) = (&finals[0], &finals[1]);
    println!(
        "one-sided rank-sum p (PGA > MAP-Elites, QD-score): {:.4}",
        wilcoxon_rank_sum_alt(&pga.1, &me.1, Alternative::Greater)
    );
    Ok(())
}
