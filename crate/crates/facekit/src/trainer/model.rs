//! Small dense regression networks: tanh hidden layers, identity output.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Layer widths of a regressor, input to output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
}

impl ModelSpec {
    pub fn new(input_dim: usize, hidden: Vec<usize>, output_dim: usize) -> Result<Self> {
        let spec = ModelSpec {
            input_dim,
            hidden,
            output_dim,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Reference teacher shape: two hidden layers of 64.
    pub fn teacher(input_dim: usize, output_dim: usize) -> Self {
        ModelSpec {
            input_dim,
            hidden: vec![64, 64],
            output_dim,
        }
    }

    /// Reference student shape: one hidden layer of 16.
    pub fn student(input_dim: usize, output_dim: usize) -> Self {
        ModelSpec {
            input_dim,
            hidden: vec![16],
            output_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.iter().any(|&w| w == 0) {
            return Err(Error::InvalidConfig {
                msg: "model layer widths must all be positive".into(),
            });
        }
        Ok(())
    }

    /// Successive (fan_in, fan_out) pairs.
    fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut widths = Vec::with_capacity(self.hidden.len() + 2);
        widths.push(self.input_dim);
        widths.extend_from_slice(&self.hidden);
        widths.push(self.output_dim);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .map(|&(fi, fo)| fi * fo + fo)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct DenseLayer {
    /// fan_in x fan_out.
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Parameter gradients aligned with `RegressorModel::layers`.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RegressorModel {
    spec: ModelSpec,
    pub layers: Vec<DenseLayer>,
}

impl RegressorModel {
    /// Xavier-uniform initialization, deterministic in the seed.
    pub fn seeded(spec: &ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = spec
            .layer_dims()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weights = Matrix::from_fn(fan_in, fan_out, |_, _| {
                    (2.0 * rng.random::<f64>() - 1.0) * limit
                });
                DenseLayer {
                    weights,
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        Ok(RegressorModel {
            spec: spec.clone(),
            layers,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Batch forward pass; rows are samples.
    pub fn forward(&self, inputs: &Matrix) -> Result<Matrix> {
        Ok(self.forward_cached(inputs)?.pop().expect("nonempty"))
    }

    /// Forward pass keeping every layer's activation for `backward`.
    /// Returns `layers.len() + 1` matrices, input first, output last.
    pub fn forward_cached(&self, inputs: &Matrix) -> Result<Vec<Matrix>> {
        if inputs.cols() != self.spec.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_dim,
                got: inputs.cols(),
            });
        }
        let last = self.layers.len() - 1;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(inputs.clone());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = activations[l].dot(&layer.weights);
            for r in 0..z.rows() {
                let row = z.row_mut(r);
                for (v, b) in row.iter_mut().zip(&layer.bias) {
                    *v += b;
                    if l != last {
                        *v = v.tanh();
                    }
                }
            }
            activations.push(z);
        }
        Ok(activations)
    }

    /// Backpropagates `output_grad` (dLoss/dOutput, batch scaling already
    /// applied) through the cached activations of one forward pass.
    pub fn backward(&self, activations: &[Matrix], output_grad: &Matrix) -> Gradients {
        debug_assert_eq!(activations.len(), self.layers.len() + 1);
        let mut weights = vec![Matrix::zeros(0, 0); self.layers.len()];
        let mut biases = vec![Vec::new(); self.layers.len()];
        let mut delta = output_grad.clone();

        for l in (0..self.layers.len()).rev() {
            weights[l] = activations[l].t_dot(&delta);
            let mut db = vec![0.0; delta.cols()];
            for r in 0..delta.rows() {
                for (b, d) in db.iter_mut().zip(delta.row(r)) {
                    *b += d;
                }
            }
            biases[l] = db;

            if l > 0 {
                // a = tanh(z) for hidden layers, so dz = da * (1 - a^2).
                let mut prev = delta.dot_t(&self.layers[l].weights);
                for r in 0..prev.rows() {
                    let act = activations[l].row(r);
                    for (p, a) in prev.row_mut(r).iter_mut().zip(act) {
                        *p *= 1.0 - a * a;
                    }
                }
                delta = prev;
            }
        }

        Gradients { weights, biases }
    }
}

/// Mean over samples of the squared error norm, `(1/B) sum ||f(x) - y||^2`.
pub fn mean_squared_error(model: &RegressorModel, inputs: &Matrix, labels: &Matrix) -> Result<f64> {
    let outputs = model.forward(inputs)?;
    if outputs.rows() != labels.rows() || outputs.cols() != labels.cols() {
        return Err(Error::DimensionMismatch {
            expected: labels.rows() * labels.cols(),
            got: outputs.rows() * outputs.cols(),
        });
    }
    let mut total = 0.0;
    for r in 0..outputs.rows() {
        for (o, y) in outputs.row(r).iter().zip(labels.row(r)) {
            let d = o - y;
            total += d * d;
        }
    }
    Ok(total / outputs.rows() as f64)
}
