//! The two PGA-MAP-Elites variation operators on pointnav: directional GA
//! and critic-driven PG, plus how a batch is split between them.
//!
//! `cargo run --release --example variation_operators`

use pga_map_elites::envs::{evaluate, task_pointnav};
use pga_map_elites::neuro::MlpSpec;
use pga_map_elites::rl::{CriticEnsemble, ReplayBuffer, Td3Config};
use pga_map_elites::variation::{ga_directional, pg_variation, split_batch, VariationConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pga_map_elites::Result<()> {
    let task = task_pointnav(false);
    let actor = MlpSpec::actor(task.obs_dim, &[16, 16], task.act_dim)?;
    let td3 = Td3Config {
        batch_size: 64,
        critic_hidden: vec![32, 32],
        ..Td3Config::default()
    };
    let critic = MlpSpec::critic(task.obs_dim, task.act_dim, &td3.critic_hidden)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // Fill a buffer with random-policy experience and fit the critics.
    let mut buffer = ReplayBuffer::new(100_000);
    for _ in 0..400 {
        let params = actor.init_params(&mut rng);
        buffer.extend(evaluate(&task, &actor, &params, rng.random())?.transitions);
    }
    let mut ensemble = CriticEnsemble::new(actor.clone(), critic, &mut rng);
    for _ in 0..3000 {
        ensemble.critic_update(&buffer, &td3, &mut rng)?;
        ensemble.greedy_actor_update(&buffer, &td3, &mut rng)?;
    }

    let cfg = VariationConfig {
        n_act: 20,
        pg_batch: 64,
        ..VariationConfig::default()
    };
    let p1 = actor.init_params(&mut rng);
    let p2 = actor.init_params(&mut rng);
    let fit = |p: &[f64]| evaluate(&task, &actor, p, 0).map(|r| r.fitness);
    println!("parents: fitness {:+.3} and {:+.3}", fit(&p1)?, fit(&p2)?);
    for _ in 0..3 {
        let ga = ga_directional(&p1, &p2, &cfg, &mut rng)?;
        let pg = pg_variation(&p1, &ensemble, &buffer, &cfg, &mut rng)?;
        println!("GA child {:+.3}   PG child {:+.3}", fit(&ga)?, fit(&pg)?);
    }
    for p in [0.0, 0.5, 1.0] {
        let (ga, pg, greedy) = split_batch(&VariationConfig { proportion_ga: p, ..cfg.clone() });
        println!("proportion_ga {p}: {ga} GA, {pg} PG, {greedy} greedy");
    }
    Ok(())
}
