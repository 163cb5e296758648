// Mean-variance asset selection as an Ising problem.

use std::error::Error;

use dvqa::analysis::brute_force;
use dvqa::pauli::Partition;
use dvqa::problems::{portfolio_hamiltonian, synth_portfolio, PortfolioEncoding};
use dvqa::trainer::{optimize, TrainConfig};

fn run_example() -> Result<(), Box<dyn Error>> {
    let inst = synth_portfolio(8, 3)?;
    for encoding in [PortfolioEncoding::Printed, PortfolioEncoding::Exact] {
        let h = portfolio_hamiltonian(&inst, encoding);
        let part = Partition::uniform(8, 2, 1)?;
        let config = TrainConfig {
            iterations: 150,
            depth: 2,
            restarts: 3,
            seed: 1,
            ..TrainConfig::default()
        };
        let result = optimize(&h, &part, &config)?;
        let (best, opt) = brute_force(&h)?;
        println!(
            "{encoding:?}: picked {} (energy {:.4}, objective {:.4}); optimum {best} (energy {opt:.4})",
            result.best_bitstring,
            result.best_energy,
            inst.objective(&result.best_bitstring)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
