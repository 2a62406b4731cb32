//! Runs a TOML experiment config through the same path as `pgame run`.
//!
//! `cargo run --release --example experiment_from_config -- configs/quick.toml out/quick`

use std::path::PathBuf;

use pga_map_elites::runner::run_experiment_file;

fn main() -> pga_map_elites::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "configs/quick.toml".into()));
    let out = args.next().map(PathBuf::from);
    let result = run_experiment_file(&config, None, out.as_deref())?;
    for r in &result.replications {
        let last = r.final_record();
        let loss = r.corrected.as_ref().map(|c| c.losses.qd_score);
        println!("replication {} (seed {}): qd_score {:.2}, corrected loss {:?}", r.index, r.seed, last.qd_score, loss);
    }
    println!("outputs and manifest in {}", result.out_dir.display());
    Ok(())
}
