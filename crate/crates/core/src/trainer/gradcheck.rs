//! Central finite-difference comparison of the analytic gradients.

use num_complex::Complex64;
use serde::Serialize;

use super::Objective;
use crate::engine::EvalMode;
use crate::error::{invalid, Result};
use crate::tensor::CorrelationTensor;

/// Norm-wise relative errors `‖g − g_fd‖ / ‖g_fd‖` (absolute when the
/// reference gradient vanishes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradCheck {
    pub theta_error: f64,
    pub c_error: f64,
}

impl GradCheck {
    pub fn max_error(&self) -> f64 {
        self.theta_error.max(self.c_error)
    }
}

fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = numeric.iter().map(|b| b * b).sum::<f64>().sqrt();
    if scale > 1e-12 {
        diff / scale
    } else {
        diff
    }
}

/// Compare exact-mode gradients at `(θ, C)` against central differences
/// with the given step. The `C` check differentiates the loss of the
/// normalized tensor `C/‖C‖`, whose gradient at unit norm is the projected
/// gradient.
pub fn finite_difference_check(
    obj: &Objective,
    theta: &[Vec<f64>],
    c: &CorrelationTensor,
    step: f64,
) -> Result<GradCheck> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("finite-difference step must be positive"));
    }
    let mut c = c.clone();
    c.renormalize()?;
    let mode = EvalMode::Exact;
    let ev = obj.evaluate(theta, &c, &mode, 0, None)?;

    let mut fd_theta = Vec::new();
    let mut shifted = theta.to_vec();
    for k in 0..theta.len() {
        for t in 0..theta[k].len() {
            let orig = shifted[k][t];
            shifted[k][t] = orig + step;
            let plus = obj.loss(&shifted, &c, &mode, 0)?.value;
            shifted[k][t] = orig - step;
            let minus = obj.loss(&shifted, &c, &mode, 0)?.value;
            shifted[k][t] = orig;
            fd_theta.push((plus - minus) / (2.0 * step));
        }
    }
    let analytic_theta: Vec<f64> = ev.grad_theta.iter().flatten().copied().collect();

    let normalized_loss = |t: &CorrelationTensor| -> Result<f64> {
        let raw = obj.loss(theta, t, &mode, 0)?.value;
        Ok(obj.offset + (raw - obj.offset) / t.norm_sqr())
    };
    let mut fd_c = Vec::new();
    let mut probe = c.clone();
    for j in 0..c.params().len() {
        for dir in [Complex64::new(step, 0.0), Complex64::new(0.0, step)] {
            let orig = probe.params()[j];
            probe.params_mut()[j] = orig + dir;
            let plus = normalized_loss(&probe)?;
            probe.params_mut()[j] = orig - dir;
            let minus = normalized_loss(&probe)?;
            probe.params_mut()[j] = orig;
            fd_c.push((plus - minus) / (2.0 * step));
        }
    }
    let analytic_c: Vec<f64> = ev.grad_c.iter().flat_map(|z| [z.re, z.im]).collect();

    Ok(GradCheck {
        theta_error: relative_error(&analytic_theta, &fd_theta),
        c_error: relative_error(&analytic_c, &fd_c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Partition;
    use crate::problems::random_qubo;
    use crate::tensor::Layout;
    use crate::trainer::init_theta;

    #[test]
    fn dense_and_train_gradients_agree_with_differences() {
        let h = random_qubo(6, 1).unwrap();
        let part = Partition::uniform(6, 3, 2).unwrap();
        let obj = Objective::new(&h, &part, 2).unwrap();
        let theta = init_theta(&obj, 5);
        for layout in [Layout::Dense, Layout::Train { bond: 2 }] {
            let c = CorrelationTensor::init_random(&[2, 2, 2], layout, 7).unwrap();
            let chk = finite_difference_check(&obj, &theta, &c, 1e-5).unwrap();
            assert!(chk.max_error() < 1e-6, "{layout:?}: {chk:?}");
        }
    }
}
