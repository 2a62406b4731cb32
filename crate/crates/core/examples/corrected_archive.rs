//! Illusory archive quality under uncertainty: a MAP-Elites archive grown on
//! pointnav-uncertain is re-evaluated 50 times per elite and rebuilt.
//!
//! `cargo run --release --example corrected_archive`

use pga_map_elites::metrics::corrected_report;
use pga_map_elites::qd_loop::{run, AlgoConfig, Algorithm};
use pga_map_elites::task_pointnav;

fn main() -> pga_map_elites::Result<()> {
    for uncertain in [false, true] {
        let task = task_pointnav(uncertain);
        let cfg = AlgoConfig {
            eval_budget: 10_000,
            ..AlgoConfig::desk(Algorithm::MapElites)
        };
        let out = run(&cfg, &task, 0)?;
        let report = corrected_report(&out.archive, &task, &cfg.actor_spec(&task)?, 50, 1)?;
        let (o, c, l) = (report.original, report.corrected, report.losses);
        println!("uncertain={uncertain}");
        println!("  qd_score    {:9.2} -> {:9.2}  loss {:+.3}", o.qd_score, c.qd_score, l.qd_score);
        println!("  max_fitness {:9.4} -> {:9.4}  loss {:+.3}", o.max_fitness, c.max_fitness, l.max_fitness);
        println!("  coverage    {:9.4} -> {:9.4}  loss {:+.3}", o.coverage, c.coverage, l.coverage);
    }
    Ok(())
}
