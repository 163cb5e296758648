// Solve a small weighted MaxCut instance and compare with enumeration.

use std::error::Error;

use dvqa::analysis::{approximation_ratio, brute_force};
use dvqa::pauli::Partition;
use dvqa::problems::{maxcut_hamiltonian, Graph};
use dvqa::trainer::{optimize, TrainConfig};

fn run_example() -> Result<(), Box<dyn Error>> {
    let g = Graph::new(
        6,
        [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 2.0), (3, 4, 1.0), (4, 5, 1.0), (5, 0, 0.5), (1, 4, 1.5)],
    )?;
    let h = maxcut_hamiltonian(&g);
    let part = Partition::uniform(6, 2, 2)?;
    let config = TrainConfig {
        iterations: 150,
        depth: 3,
        seed: 7,
        ..TrainConfig::default()
    };
    let result = optimize(&h, &part, &config)?;
    let (opt_bits, opt) = brute_force(&h)?;
    println!("final loss {:.4}", result.final_loss());
    println!("extracted {} with energy {} (cut {})", result.best_bitstring, result.best_energy, g.cut_value(&result.best_bitstring));
    println!("optimum   {opt_bits} with energy {opt}");
    println!("ratio {:.4}", approximation_ratio(opt, result.best_energy)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
