use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pga_map_elites::runner::{correct_archive_dir, parse_proportions, run_ablation, run_experiment_file, RunConfig};

#[derive(Parser)]
#[command(name = "pgame", version, about = "PGA-MAP-Elites experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the GA proportion of PGA-MAP-Elites over paired seeds.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "0,0.25,0.5,0.75,1")]
        proportions: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-evaluate a dumped replication archive and report corrected metrics.
    Correct {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long, default_value_t = 50)]
        reevals: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> pga_map_elites::Result<()> {
    match command {
        Command::Run { config, seed, out } => {
            let result = run_experiment_file(&config, seed, out.as_deref())?;
            for r in &result.replications {
                let last = r.final_record();
                println!(
                    "rep {:03} seed {} qd_score {:.3} coverage {:.4} max_fitness {:.4}",
                    r.index, r.seed, last.qd_score, last.coverage, last.max_fitness
                );
            }
            println!("outputs in {}", result.out_dir.display());
        }
        Command::Ablate { config, proportions, out } => {
            let cfg = RunConfig::load(&config)?;
            let proportions = parse_proportions(&proportions)?;
            let out = out
                .or_else(|| cfg.experiment.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let result = run_ablation(&cfg, &proportions, &out)?;
            for (p, exp) in result.proportions.iter().zip(&result.experiments) {
                let scores: Vec<String> = exp
                    .replications
                    .iter()
                    .map(|r| format!("{:.3}", r.final_record().qd_score))
                    .collect();
                println!("proportion {p}: final qd_score [{}]", scores.join(", "));
            }
            println!("outputs in {}", out.display());
        }
        Command::Correct { archive, reevals, seed } => {
            let report = correct_archive_dir(&archive, reevals, seed)?;
            let (o, c, l) = (&report.original, &report.corrected, &report.losses);
            println!("metric,original,corrected,loss");
            println!("qd_score,{},{},{}", o.qd_score, c.qd_score, l.qd_score);
            println!("max_fitness,{},{},{}", o.max_fitness, c.max_fitness, l.max_fitness);
            println!("coverage,{},{},{}", o.coverage, c.coverage, l.coverage);
        }
    }
    Ok(())
}
