use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Gradients, Mlp};
use crate::error::{Error, Result};
use crate::math;

/// Denominator floor for [`relative_error`]; keeps finite-difference noise on
/// near-zero gradients from dominating.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-4;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    math::abs(analytic - numeric) / (math::abs(analytic) + math::abs(numeric)).max(RELATIVE_ERROR_FLOOR)
}

/// Parameters checked exhaustively below this count; above it a seeded random
/// subsample of this size is used.
pub const FULL_CHECK_LIMIT: usize = 10_000;

/// Compares `analytic` against central differences of `loss` over the
/// parameters of `m` and returns the maximum relative error.
pub fn grad_check_with<F>(m: &Mlp, analytic: &Gradients, eps: f64, seed: u64, mut loss: F) -> Result<f64>
where
    F: FnMut(&Mlp) -> Result<f64>,
{
    if !(eps > 0.0) {
        return Err(Error::validation("finite-difference step must be positive"));
    }
    let n = m.parameter_count();
    if analytic.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: analytic.len(),
        });
    }
    let indices: Vec<usize> = if n > FULL_CHECK_LIMIT {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        index::sample(&mut rng, n, FULL_CHECK_LIMIT).into_vec()
    } else {
        (0..n).collect()
    };
    let analytic: Vec<f64> = analytic.values().copied().collect();
    let mut probe = m.clone();
    let mut worst: f64 = 0.0;
    for i in indices {
        let original = probe.param(i).expect("index in range");
        probe.set_param(i, original + eps)?;
        let up = loss(&probe)?;
        probe.set_param(i, original - eps)?;
        let down = loss(&probe)?;
        probe.set_param(i, original)?;
        let numeric = (up - down) / (2.0 * eps);
        worst = worst.max(relative_error(analytic[i], numeric));
    }
    Ok(worst)
}

/// Gradient check for a loss defined on the network output.
///
/// `loss` returns the loss value and its gradient with respect to the output.
pub fn grad_check<F>(m: &Mlp, x: &[f64], loss: F, eps: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let cache = m.forward(x)?;
    let (_, grad_out) = loss(cache.output());
    let mut grads = m.zero_gradients();
    m.backward(&cache, &grad_out, &mut grads)?;
    grad_check_with(m, &grads, eps, 0, |net| Ok(loss(&net.predict(x)?).0))
}

#[cfg(test)]
mod tests {
    use super::super::{Dense, Head};
    use super::*;
    use alloc::vec;
    use rand::Rng;

    fn squared_error(target: f64) -> impl Fn(&[f64]) -> (f64, Vec<f64>) {
        move |y: &[f64]| {
            let d = y[0] - target;
            (d * d, vec![2.0 * d])
        }
    }

    #[test]
    fn random_regression_net_passes() {
        let m = Mlp::new(&[6, 16, 16, 1], Head::Linear, 21).unwrap();
        let x = [0.2, -1.0, 0.7, 1.5, 0.0, -0.3];
        let err = grad_check(&m, &x, squared_error(0.4), 1e-5).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn softmax_head_passes() {
        let m = Mlp::new(&[4, 12, 5], Head::Softmax, 2).unwrap();
        let x = [0.5, -0.5, 1.0, 2.0];
        // cross-entropy against class 3 written on probabilities
        let loss = |p: &[f64]| {
            let mut g = vec![0.0; p.len()];
            g[3] = -1.0 / p[3];
            (-math::ln(p[3]), g)
        };
        let err = grad_check(&m, &x, loss, 1e-5).unwrap();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn linear_model_is_exact() {
        let m = Mlp::from_layers(
            Head::Linear,
            0,
            vec![Dense { inputs: 3, outputs: 1, weights: vec![0.3, -0.2, 0.9], biases: vec![0.1] }],
        )
        .unwrap();
        let err = grad_check(&m, &[1.0, 2.0, 3.0], squared_error(-1.0), 1e-5).unwrap();
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let m = Mlp::new(&[6, 16, 1], Head::Linear, 4).unwrap();
        let x = [0.2, -1.0, 0.7, 1.5, 0.1, -0.3];
        let loss = squared_error(2.0);
        let cache = m.forward(&x).unwrap();
        let (_, g) = loss(cache.output());
        let mut grads = m.zero_gradients();
        m.backward(&cache, &g, &mut grads).unwrap();
        grads.layers[0].weights.iter_mut().for_each(|w| *w *= 1.5);
        let err = grad_check_with(&m, &grads, 1e-5, 0, |net| Ok(loss(&net.predict(&x)?).0)).unwrap();
        assert!(err > 1e-2, "{err}");
    }

    #[test]
    fn large_networks_are_subsampled_deterministically() {
        let m = Mlp::new(&[40, 128, 64, 1], Head::Linear, 9).unwrap();
        assert!(m.parameter_count() > FULL_CHECK_LIMIT);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..40).map(|_| rng.gen_range(0.0..1.0)).collect();
        let loss = squared_error(0.5);
        let cache = m.forward(&x).unwrap();
        let mut grads = m.zero_gradients();
        m.backward(&cache, &loss(cache.output()).1, &mut grads).unwrap();
        let mut calls = 0usize;
        let err = grad_check_with(&m, &grads, 1e-5, 1, |net| {
            calls += 1;
            Ok(loss(&net.predict(&x)?).0)
        })
        .unwrap();
        assert_eq!(calls, 2 * FULL_CHECK_LIMIT);
        assert!(err < 1e-4, "{err}");
    }
}
