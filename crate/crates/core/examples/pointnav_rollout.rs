//! Rolling out one policy on the deterministic and uncertain pointnav
//! variants: the uncertain one spreads fitness and descriptor across seeds.
//!
//! `cargo run --release --example pointnav_rollout`

use pga_map_elites::envs::{evaluate, task_pointnav};
use pga_map_elites::neuro::MlpSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pga_map_elites::Result<()> {
    let spec = MlpSpec::actor(4, &[16, 16], 2)?;
    let params = spec.init_params(&mut ChaCha8Rng::seed_from_u64(8));
    for uncertain in [false, true] {
        let task = task_pointnav(uncertain);
        let results: Vec<_> = (0..20).map(|s| evaluate(&task, &spec, &params, s)).collect::<Result<_, _>>()?;
        let mean = results.iter().map(|r| r.fitness).sum::<f64>() / 20.0;
        let sd = (results.iter().map(|r| (r.fitness - mean).powi(2)).sum::<f64>() / 19.0).sqrt();
        println!(
            "uncertain={uncertain}: fitness mean {mean:+.4} sd {sd:.4}; first BDs {:.3?} {:.3?}; {} transitions per episode",
            &*results[0].bd,
            &*results[1].bd,
            results[0].transitions.len()
        );
    }
    Ok(())
}
