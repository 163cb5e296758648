// Simulated annealing against exhaustive search.

use std::error::Error;

use dvqa::analysis::{brute_force, simulated_annealing};
use dvqa::problems::{maxcut_hamiltonian, synth_graph};

fn run_example() -> Result<(), Box<dyn Error>> {
    let h = maxcut_hamiltonian(&synth_graph(16, 0.3, 9)?);
    let (bits, opt) = brute_force(&h)?;
    println!("optimum {bits} energy {opt}");
    for sweeps in [10, 100, 1000] {
        let out = simulated_annealing(&h, sweeps, None, 1)?;
        println!("{sweeps:>5} sweeps: {} energy {} (start {})", out.bitstring, out.energy, out.initial_energy);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
