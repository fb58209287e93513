use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Gradients, Mlp};
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

/// Optimizer with its per-parameter moment buffers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Result<Self> {
        if !(learning_rate > 0.0) || !learning_rate.is_finite() {
            return Err(Error::config("learning rate must be positive"));
        }
        Ok(Self {
            kind,
            learning_rate,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
            step: 0,
        })
    }

    pub fn sgd(learning_rate: f64) -> Result<Self> {
        Self::new(OptimizerKind::Sgd, learning_rate)
    }

    /// Adam with the usual (0.9, 0.999, 1e-8) constants.
    pub fn adam(learning_rate: f64) -> Result<Self> {
        Self::new(
            OptimizerKind::Adam {
                beta1: 0.9,
                beta2: 0.999,
                epsilon: 1e-8,
            },
            learning_rate,
        )
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Applies one update. Non-finite gradients are rejected before any
    /// parameter is touched.
    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients) -> Result<()> {
        let n = mlp.parameter_count();
        if grads.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: grads.len(),
            });
        }
        if !grads.is_finite() {
            return Err(Error::validation("non-finite gradient; update rejected"));
        }
        self.step += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in mlp.params_mut().zip(grads.values()) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam { beta1, beta2, epsilon } => {
                if self.first_moment.len() != n {
                    self.first_moment = alloc::vec![0.0; n];
                    self.second_moment = alloc::vec![0.0; n];
                }
                let t = self.step as i32;
                let c1 = 1.0 - math::powi(beta1, t);
                let c2 = 1.0 - math::powi(beta2, t);
                let moments = self.first_moment.iter_mut().zip(self.second_moment.iter_mut());
                for ((p, g), (m, v)) in mlp.params_mut().zip(grads.values()).zip(moments) {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= lr * m_hat / (math::sqrt(v_hat) + epsilon);
                }
            }
        }
        Ok(())
    }
}
