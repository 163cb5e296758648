// Parameter-shift and tensor gradients checked against finite
// differences.

use std::error::Error;

use dvqa::pauli::Partition;
use dvqa::problems::random_qubo;
use dvqa::tensor::{CorrelationTensor, Layout};
use dvqa::trainer::{finite_difference_check, init_theta, Objective};

fn run_example() -> Result<(), Box<dyn Error>> {
    let h = random_qubo(6, 4)?;
    let part = Partition::uniform(6, 2, 3)?;
    let obj = Objective::new(&h, &part, 2)?;
    let theta = init_theta(&obj, 1);
    for layout in [Layout::Dense, Layout::Train { bond: 2 }] {
        let c = CorrelationTensor::init_random(part.ranks(), layout, 2)?;
        let chk = finite_difference_check(&obj, &theta, &c, 1e-5)?;
        println!("{layout:?}: theta error {:.2e}, C error {:.2e}", chk.theta_error, chk.c_error);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
