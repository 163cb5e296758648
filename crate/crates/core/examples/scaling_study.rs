// A reduced scaling study on random MaxCut graphs.

use std::error::Error;

use dvqa::analysis::{run_scaling_study, ScalingConfig};

fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = ScalingConfig {
        sizes: vec![8, 16, 24],
        runs: 4,
        iterations: 60,
        depth: 2,
        width: 4,
        sa_sweeps: 200,
        ..ScalingConfig::default()
    };
    let study = run_scaling_study(&cfg)?;
    print!("{}", study.rows_csv());
    println!("time slope {:.2}", study.time_slope());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
