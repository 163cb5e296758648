// Dense and tensor-train correlation tensors: contraction, sampling and
// checkpoints.

use std::error::Error;

use dvqa::tensor::{read_checkpoint, write_checkpoint, CorrelationTensor, Layout};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn run_example() -> Result<(), Box<dyn Error>> {
    let ranks = [2, 3, 2, 2];
    let train = CorrelationTensor::init_random(&ranks, Layout::Train { bond: 2 }, 11)?;
    let dense = train.to_dense()?;
    println!(
        "train: {} parameters, bonds {:?}; dense: {} entries",
        train.params().len(),
        train.bonds().unwrap_or(&[]),
        dense.num_elements()
    );
    println!("norms: train {:.12}, dense {:.12}", train.norm_sqr(), dense.norm_sqr());
    println!("l1 norm {:.4}", dense.l1_norm()?);

    let sampler = train.sampler()?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        println!("sampled index {:?}", sampler.sample(&mut rng));
    }

    let text = write_checkpoint(&train);
    let back = read_checkpoint(&text, "memory")?;
    println!("checkpoint round trip exact: {}", back.params() == train.params());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
