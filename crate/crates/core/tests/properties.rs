//! Invariants checked over randomly generated inputs.

use dvqa::analysis::{approximation_ratio, shot_budget};
use dvqa::engine::{pi_matrix, AnsatzSpec, EvalMode};
use dvqa::pauli::{Bitstring, PauliString, Partition};
use dvqa::problems::random_qubo;
use dvqa::tensor::{CorrelationTensor, Layout};
use dvqa::trainer::{init_theta, train_from, Objective, TrainConfig};
use proptest::prelude::*;

fn pauli_string(len: usize) -> impl Strategy<Value = PauliString> {
    proptest::collection::vec(prop_oneof![Just('I'), Just('X'), Just('Y'), Just('Z')], len)
        .prop_map(|cs| cs.into_iter().collect::<String>().parse().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pi_tensors_are_hermitian(
        p in (1usize..4).prop_flat_map(pauli_string),
        depth in 0usize..3,
        seed in any::<u64>(),
    ) {
        let width = p.len();
        let spec = AnsatzSpec::new(width, depth);
        let theta: Vec<f64> = (0..spec.num_params()).map(|i| ((seed >> (i % 48)) % 628) as f64 / 100.0 - std::f64::consts::PI).collect();
        let rank = 1usize << width;
        let pi = pi_matrix(&spec, &theta, &p, rank).unwrap();
        prop_assert!(pi.hermiticity_defect() < 1e-12);
        if p.is_identity() {
            for a in 0..rank {
                prop_assert!((pi.value(a, a).re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn loss_is_real_and_bounded(n in 4usize..9, k in 2usize..4, rank in 1usize..4, seed in any::<u64>(), train in any::<bool>()) {
        let part = Partition::blocks(n, n.div_ceil(k), rank).unwrap();
        let h = random_qubo(n, seed).unwrap();
        let obj = Objective::new(&h, &part, 1).unwrap();
        let theta = init_theta(&obj, seed);
        let layout = if train { Layout::Train { bond: 2 } } else { Layout::Dense };
        let c = CorrelationTensor::init_random(part.ranks(), layout, seed).unwrap();
        let l = obj.loss(&theta, &c, &EvalMode::Exact, 0).unwrap();
        prop_assert!(l.imag.abs() < 1e-9);
        let w = h.weight_l1();
        prop_assert!(l.value >= h.offset() - w - 1e-9 && l.value <= h.offset() + w + 1e-9);
    }

    #[test]
    fn training_keeps_unit_norm(n in 4usize..8, rank in 1usize..4, seed in any::<u64>(), train in any::<bool>()) {
        let part = Partition::blocks(n, 2, rank).unwrap();
        let h = random_qubo(n, seed).unwrap();
        let obj = Objective::new(&h, &part, 1).unwrap();
        let layout = if train { Layout::Train { bond: 2 } } else { Layout::Dense };
        let c0 = CorrelationTensor::init_random(part.ranks(), layout, seed).unwrap();
        let config = TrainConfig { iterations: 5, learning_rate: 0.3, ..TrainConfig::default() };
        let run = train_from(&obj, &config, init_theta(&obj, seed), c0, seed, None).unwrap();
        for r in &run.records {
            prop_assert!((r.c_norm_sqr - 1.0).abs() < 1e-8);
            prop_assert!(r.loss_imag.abs() < 1e-9);
        }
    }

    #[test]
    fn train_and_dense_layouts_agree(n in 4usize..8, rank in 1usize..4, seed in any::<u64>()) {
        let part = Partition::blocks(n, 2, rank).unwrap();
        let h = random_qubo(n, seed).unwrap();
        let obj = Objective::new(&h, &part, 1).unwrap();
        let theta = init_theta(&obj, seed);
        let c = CorrelationTensor::init_random(part.ranks(), Layout::Train { bond: 3 }, seed).unwrap();
        let a = obj.loss(&theta, &c, &EvalMode::Exact, 0).unwrap().value;
        let b = obj.loss(&theta, &c.to_dense().unwrap(), &EvalMode::Exact, 0).unwrap().value;
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn partition_factors_reassemble(n in 2usize..10, width in 1usize..5, seed in any::<u64>()) {
        let h = random_qubo(n, seed).unwrap();
        let part = Partition::blocks(n, width, 1).unwrap();
        prop_assert_eq!(part.sizes().iter().sum::<usize>(), n);
        for (t, split) in h.terms().iter().zip(h.partition_terms(&part).unwrap()) {
            prop_assert_eq!(&PauliString::concat(&split.factors), &t.string);
        }
    }

    #[test]
    fn flip_delta_matches_energy_difference(n in 2usize..12, seed in any::<u64>(), x in any::<u64>(), q in 0usize..12) {
        prop_assume!(q < n);
        let h = random_qubo(n, seed).unwrap();
        let d = h.diagonal().unwrap();
        let bits = Bitstring::from_index(x & ((1 << n) - 1), n);
        let mut flipped = bits.clone();
        flipped.bits_mut()[q] ^= true;
        let want = d.energy(flipped.bits()) - d.energy(bits.bits());
        prop_assert!((d.flip_delta(bits.bits(), q) - want).abs() < 1e-12);
        prop_assert!((d.energy(bits.bits()) - h.classical_energy(&bits).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn shot_budget_scales(w in 0.1f64..5.0, c in 0.5f64..3.0, eps in 0.01f64..1.0) {
        let base = shot_budget(w, c, eps).unwrap() as f64;
        let raw = w * w * c.powi(4) / (eps * eps);
        prop_assert!(base >= raw - 1e-6 && base < raw + 1.0);
        let halved = shot_budget(w, c, eps / 2.0).unwrap() as f64;
        prop_assert!((halved - 4.0 * raw).abs() <= 1.0 + 1e-6);
    }

    #[test]
    fn ratio_at_least_one_when_achieved_is_worse(opt in -100.0f64..-0.01, gap in 0.0f64..1.0) {
        let achieved = opt * (1.0 - gap * 0.99);
        prop_assert!(approximation_ratio(opt, achieved).unwrap() >= 1.0);
    }
}
