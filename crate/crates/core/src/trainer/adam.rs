use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::error::{dim, Result};

/// First and second moment estimates of ADAM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }
}

/// One bias-corrected ADAM descent step, in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, config: &TrainConfig) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.len() {
        return Err(dim(format!(
            "adam: {} params, {} grads, state of {}",
            params.len(),
            grads.len(),
            state.len()
        )));
    }
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let mhat = *m / c1;
        let vhat = *v / c2;
        *p -= config.learning_rate * mhat / (vhat.sqrt() + config.adam_eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_keeps_params() {
        let cfg = TrainConfig::default();
        let mut p = vec![0.3, -1.2];
        let mut s = AdamState::new(2);
        adam_step(&mut p, &[0.0, 0.0], &mut s, &cfg).unwrap();
        assert_eq!(p, vec![0.3, -1.2]);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn constant_gradient_moves_by_learning_rate() {
        let cfg = TrainConfig::default();
        let g = [2.5, -0.01, 40.0];
        let mut p = vec![0.0; 3];
        let mut s = AdamState::new(3);
        let mut prev = p.clone();
        for _ in 0..500 {
            adam_step(&mut p, &g, &mut s, &cfg).unwrap();
            for ((a, b), gi) in p.iter().zip(&prev).zip(&g) {
                let step = b - a;
                // m̂ / √v̂ = sign(g) exactly for a constant gradient, minus the eps shift
                let want = cfg.learning_rate * gi.signum() * gi.abs() / (gi.abs() + cfg.adam_eps);
                assert!((step - want).abs() < 1e-9, "{step} vs {want}");
            }
            prev = p.clone();
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let cfg = TrainConfig::default();
        let mut s = AdamState::new(2);
        assert!(adam_step(&mut [0.0; 3], &[0.0; 3], &mut s, &cfg).is_err());
    }
}
