//! Twin TD3 critics fitted to the one-step task, where the true action value
//! is the known reward `-|a - a*|^2`, followed by greedy-actor training.
//!
//! `cargo run --release --example td3_critic`

use pga_map_elites::envs::{task_diag_onestep, DIAG_OPTIMUM};
use pga_map_elites::neuro::MlpSpec;
use pga_map_elites::rl::{CriticEnsemble, ReplayBuffer, Td3Config, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pga_map_elites::Result<()> {
    let task = task_diag_onestep();
    let q_star = |a: &[f64]| -(a[0] - DIAG_OPTIMUM[0]).powi(2) - (a[1] - DIAG_OPTIMUM[1]).powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut buffer = ReplayBuffer::new(10_000);
    for _ in 0..10_000 {
        let action = vec![rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        buffer.push(Transition {
            state: vec![0.0; task.obs_dim],
            reward: q_star(&action),
            action,
            next_state: vec![0.0; task.obs_dim],
            terminal: true,
        });
    }

    let cfg = Td3Config {
        critic_hidden: vec![32, 32],
        ..Td3Config::default()
    };
    let actor = MlpSpec::actor(task.obs_dim, &[16, 16], task.act_dim)?;
    let critic = MlpSpec::critic(task.obs_dim, task.act_dim, &cfg.critic_hidden)?;
    let mut ensemble = CriticEnsemble::new(actor.clone(), critic, &mut rng);
    for step in 1..=10_000 {
        let loss = ensemble.critic_update(&buffer, &cfg, &mut rng)?;
        ensemble.greedy_actor_update(&buffer, &cfg, &mut rng)?;
        if step % 1000 == 0 {
            let a = actor.forward(&ensemble.greedy, &[0.0, 0.0])?;
            let q = ensemble.q1_critic().value(&[0.0, 0.0], &[0.0, 0.0])?;
            println!(
                "step {step:>5}: loss {loss:.5}  Q1(0,0) {q:+.4} (true {:+.4})  greedy action ({:+.3}, {:+.3})",
                q_star(&[0.0, 0.0]),
                a[0],
                a[1]
            );
        }
    }
    println!("optimum ({:+.3}, {:+.3})", DIAG_OPTIMUM[0], DIAG_OPTIMUM[1]);
    Ok(())
}
