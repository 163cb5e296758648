// Hadamard-test estimates: spread versus shots and the shot budget.

use std::error::Error;

use dvqa::analysis::shot_budget;
use dvqa::engine::{pi_exact, pi_hadamard_estimate, AnsatzSpec};
use dvqa::pauli::PauliString;

fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = AnsatzSpec::new(3, 2);
    let theta: Vec<f64> = (0..spec.num_params()).map(|i| 0.3 * i as f64 - 1.0).collect();
    let p: PauliString = "ZIZ".parse()?;
    let exact = pi_exact(&spec, &theta, &p, 1, 2)?;
    println!("exact Pi[1][2] = {exact:.6}");
    for shots in [100u64, 1_000, 10_000] {
        let est: Vec<f64> = (0..200)
            .map(|s| pi_hadamard_estimate(&spec, &theta, &p, 1, 2, shots, s).map(|z| z.re))
            .collect::<Result<_, _>>()?;
        let mean = est.iter().sum::<f64>() / est.len() as f64;
        let sd = (est.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (est.len() - 1) as f64).sqrt();
        println!("{shots:>6} shots: mean {mean:+.4}, std {sd:.4}");
    }
    for eps in [0.1, 0.05, 0.01] {
        println!("shots for eps = {eps}: {}", shot_budget(2.0, 1.5, eps)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
