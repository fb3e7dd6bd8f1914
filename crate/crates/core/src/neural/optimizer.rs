use serde::{Deserialize, Serialize};

use super::{Gradients, Network, NeuralError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl OptimizerKind {
    pub fn adam(lr: f64) -> Self {
        OptimizerKind::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            OptimizerKind::Sgd { lr } | OptimizerKind::Adam { lr, .. } => lr,
        }
    }
}

/// Optimizer with per-parameter moment accumulators (Adam only).
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    first: Vec<f64>,
    second: Vec<f64>,
    step: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind) -> Result<Self, NeuralError> {
        let lr = kind.lr();
        if !(lr.is_finite() && lr > 0.0) {
            return Err(NeuralError::InvalidRate(lr));
        }
        Ok(Optimizer {
            kind,
            first: Vec::new(),
            second: Vec::new(),
            step: 0,
        })
    }

    pub fn sgd(lr: f64) -> Result<Self, NeuralError> {
        Self::new(OptimizerKind::Sgd { lr })
    }

    pub fn adam(lr: f64) -> Result<Self, NeuralError> {
        Self::new(OptimizerKind::adam(lr))
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One descent step along `grads`.
    pub fn apply(&mut self, net: &mut Network, grads: &Gradients) -> Result<(), NeuralError> {
        let n = net.num_params();
        if grads.values().count() != n {
            return Err(NeuralError::Shape("gradient does not match network".into()));
        }
        self.step += 1;
        match self.kind {
            OptimizerKind::Sgd { lr } => {
                for (p, g) in net.params_mut().zip(grads.values()) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => {
                if self.first.len() != n {
                    self.first = vec![0.0; n];
                    self.second = vec![0.0; n];
                }
                let t = self.step as i32;
                let c1 = 1.0 - beta1.powi(t);
                let c2 = 1.0 - beta2.powi(t);
                for (((p, &g), m), v) in net
                    .params_mut()
                    .zip(grads.values())
                    .zip(self.first.iter_mut())
                    .zip(self.second.iter_mut())
                {
                    *m = beta1 * *m + (1.0 - beta1) * g;
                    *v = beta2 * *v + (1.0 - beta2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}

/// Free-function form of [`Optimizer::apply`].
pub fn apply_update(
    net: &mut Network,
    grads: &Gradients,
    opt: &mut Optimizer,
) -> Result<(), NeuralError> {
    opt.apply(net, grads)
}
