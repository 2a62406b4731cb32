//! GA/PG proportion sweep with paired seeds, written as CSVs, followed by
//! the early-versus-late operator contribution read back from them.
//!
//! `cargo run --release --example ablation -- [out_dir]`

use pga_map_elites::qd_loop::{AlgoConfig, Algorithm, Operator};
use pga_map_elites::runner::{proportion_dir, read_operators_csv, replication_dir, run_ablation, PhaseContributions, RunConfig, OPERATORS_CSV};

fn main() -> pga_map_elites::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/ablation".into());
    let algo = AlgoConfig {
        eval_budget: 5_000,
        ..AlgoConfig::desk(Algorithm::PgaMapElites)
    };
    let mut cfg = RunConfig::new("pointnav", true, &algo, 0, 3);
    cfg.experiment.n_reeval = 10;
    let proportions = [0.0, 0.25, 0.5, 0.75, 1.0];
    let result = run_ablation(&cfg, &proportions, out.as_ref())?;
    for (p, exp) in proportions.iter().zip(&result.experiments) {
        let scores: Vec<String> = exp.replications.iter().map(|r| format!("{:.1}", r.final_record().qd_score)).collect();
        let ops = read_operators_csv(
            &std::path::Path::new(&out).join(proportion_dir(*p)).join(replication_dir(0)).join(OPERATORS_CSV),
        )?;
        let phases = PhaseContributions::from_records(&ops);
        let share = phases.early_share(Operator::Pg).map_or("-".to_string(), |s| format!("{s:.2}"));
        println!("proportion_ga {p:<4} final qd [{}]  PG early-half share {share}", scores.join(", "));
    }
    println!("see {out}/stats.csv and {out}/ablation_summary.csv");
    Ok(())
}
