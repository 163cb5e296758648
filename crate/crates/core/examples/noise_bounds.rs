// Noisy training of a small instance against the deviation bound.

use std::error::Error;

use dvqa::analysis::{bound_iid, brute_force, f_sub, NoiseBoundInput};
use dvqa::engine::{EvalMode, NoiseModel};
use dvqa::pauli::Partition;
use dvqa::problems::random_qubo;
use dvqa::trainer::{optimize, TrainConfig};

fn run_example() -> Result<(), Box<dyn Error>> {
    let h = random_qubo(6, 2)?;
    let e_g = brute_force(&h)?.1;
    let noise = NoiseModel::new(0.01, 0.2)?;
    for k in [2, 3, 6] {
        let part = Partition::uniform(6, k, 1)?;
        let config = TrainConfig {
            iterations: 80,
            depth: 2,
            mode: EvalMode::Noisy(noise),
            seed: 3,
            ..TrainConfig::default()
        };
        let result = optimize(&h, &part, &config)?;
        let inp = NoiseBoundInput {
            p1: noise.p1,
            p2: noise.p2,
            depth: 2,
            width: 6 / k,
            r_max: 1,
            locality: h.locality(),
            e_ref: e_g,
            c_b: 1.0,
            eps_c: 0.0,
        };
        let delta = (result.final_loss() - e_g).abs();
        println!(
            "K = {k}: noisy loss {:.4}, dH = {delta:.4}, f_sub = {:.4}, bound = {:.4}",
            result.final_loss(),
            f_sub(&inp),
            bound_iid(&inp)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
