// Build a Pauli Hamiltonian, split it over subsystems and evaluate
// classical energies.

use std::error::Error;

use dvqa::pauli::{Bitstring, Hamiltonian, Partition};

fn run_example() -> Result<(), Box<dyn Error>> {
    let h = Hamiltonian::from_strs(6, &[(1.0, "ZZIIII"), (-0.5, "IZZIII"), (0.8, "IIIZIZ"), (0.3, "ZIIIIZ")], 0.25)?;
    println!("{} qubits, {} terms, locality {}", h.num_qubits(), h.num_terms(), h.locality());

    let part = Partition::uniform(6, 3, 2)?;
    for (i, t) in h.partition_terms(&part)?.iter().enumerate() {
        let factors: Vec<String> = t.factors.iter().map(|f| f.to_string()).collect();
        let active: Vec<usize> = t.active_subsystems().collect();
        println!("term {i}: w = {:+.2}, factors {:?}, active {:?}", t.weight, factors, active);
    }

    let x: Bitstring = "101100".parse()?;
    println!("E({x}) = {}", h.classical_energy(&x)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
