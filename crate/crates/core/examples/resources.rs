// Circuit and contraction cost estimates next to a counted run.

use std::error::Error;

use dvqa::analysis::resource_estimate;
use dvqa::engine::{CircuitCounter, EvalMode};
use dvqa::pauli::Partition;
use dvqa::problems::random_qubo;
use dvqa::tensor::{CorrelationTensor, Layout};
use dvqa::trainer::{init_theta, Objective};

fn run_example() -> Result<(), Box<dyn Error>> {
    let h = random_qubo(8, 5)?;
    let part = Partition::uniform(8, 4, 2)?;
    let est = resource_estimate(&h, &part, 4)?;
    println!("{est:#?}");

    let obj = Objective::new(&h, &part, 1)?;
    let theta = init_theta(&obj, 0);
    let c = CorrelationTensor::init_random(part.ranks(), Layout::Dense, 0)?;
    let counter = CircuitCounter::new();
    obj.loss_counted(&theta, &c, &EvalMode::Shots(100), 0, Some(&counter))?;
    println!("circuits executed for one loss: {}", counter.count());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
