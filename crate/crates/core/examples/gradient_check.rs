//! Backpropagation against central finite differences on an actor network.
//!
//! `cargo run --release --example gradient_check`

use pga_map_elites::neuro::MlpSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pga_map_elites::Result<()> {
    let spec = MlpSpec::actor(4, &[32, 32], 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let params = spec.init_params(&mut rng);
    let input: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let upstream = [0.7, -1.3];
    let objective = |p: &[f64], x: &[f64]| -> f64 {
        let y = spec.forward(p, x).unwrap();
        y[0] * upstream[0] + y[1] * upstream[1]
    };

    let (param_grad, input_grad) = spec.backward(&params, &input, &upstream)?;
    let h = 1e-5;
    let mut p = params.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + h;
        let up = objective(&p, &input);
        p[i] = orig - h;
        let down = objective(&p, &input);
        p[i] = orig;
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - param_grad[i]).abs() / fd.abs().max(param_grad[i].abs()).max(1e-3));
    }
    println!("{} parameters, max relative error {worst:.2e}", spec.param_count());
    println!("dJ/dinput = {input_grad:.5?}");
    Ok(())
}
