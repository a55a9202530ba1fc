//! Fully connected binary classifier `d → 8 → 8 → 4 → 1` (tanh hidden units,
//! sigmoid output) and its Gaussian-prior log-posterior.
//!
//! Parameters are one flat vector. Layer by layer, the `out × in` weight matrix
//! is stored row-major and followed by the `out` biases.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data_io::Dataset;
use crate::potentials::Potential;
use crate::rng::stream_rng;
use crate::samplers::ChainRecord;
use crate::{Error, Result};

pub const HIDDEN_LAYERS: [usize; 3] = [8, 8, 4];

/// Flat parameter vector of an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams(pub Vec<f64>);

impl MlpParams {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    sizes: Vec<usize>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Bernoulli log-likelihood `y log σ(z) + (1−y) log(1−σ(z))` from the logit.
pub fn bernoulli_log_likelihood(logit: f64, label: u8) -> f64 {
    f64::from(label) * logit - softplus(logit)
}

impl Mlp {
    pub fn new(input_dim: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::invalid("input_dim", "must be at least 1"));
        }
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(&HIDDEN_LAYERS);
        sizes.push(1);
        Ok(Self { sizes })
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn n_params(&self) -> usize {
        self.sizes.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }

    fn n_units(&self) -> usize {
        self.sizes[1..].iter().sum()
    }

    fn check(&self, params: &[f64], x: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                got: params.len(),
            });
        }
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Fills `acts` (length = total units) with every layer's activations and
    /// returns the output logit. The output unit is linear here.
    fn forward_into(&self, params: &[f64], x: &[f64], acts: &mut [f64]) -> f64 {
        let mut offset = 0;
        let mut unit = 0;
        let last = self.sizes.len() - 2;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &params[offset..offset + n_in * n_out];
            let bias = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let (before, rest) = acts.split_at_mut(unit);
            let input: &[f64] = if l == 0 { x } else { &before[unit - n_in..] };
            for o in 0..n_out {
                let row = &weights[o * n_in..(o + 1) * n_in];
                let z = bias[o] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                rest[o] = if l == last { z } else { z.tanh() };
            }
            offset += n_in * n_out + n_out;
            unit += n_out;
        }
        acts[unit - 1]
    }

    /// Accumulates `scale · ∂logit/∂params` into `grad` given activations from
    /// [`Self::forward_into`].
    fn backprop(&self, params: &[f64], x: &[f64], acts: &[f64], scale: f64, grad: &mut [f64]) {
        let n_layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(n_layers);
        let mut units = Vec::with_capacity(n_layers);
        let (mut offset, mut unit) = (0, 0);
        for w in self.sizes.windows(2) {
            offsets.push(offset);
            units.push(unit);
            offset += w[0] * w[1] + w[1];
            unit += w[1];
        }
        let mut delta = vec![scale];
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let input: &[f64] = if l == 0 {
                x
            } else {
                &acts[units[l - 1]..units[l - 1] + n_in]
            };
            for o in 0..n_out {
                let g = &mut grad[off + o * n_in..off + (o + 1) * n_in];
                for (gi, a) in g.iter_mut().zip(input) {
                    *gi += delta[o] * a;
                }
                grad[off + n_in * n_out + o] += delta[o];
            }
            if l > 0 {
                let weights = &params[off..off + n_in * n_out];
                let mut next = vec![0.0; n_in];
                for (i, d) in next.iter_mut().enumerate() {
                    let back: f64 = (0..n_out).map(|o| weights[o * n_in + i] * delta[o]).sum();
                    let a = input[i];
                    *d = back * (1.0 - a * a);
                }
                delta = next;
            }
        }
    }

    pub fn logit(&self, params: &[f64], x: &[f64]) -> Result<f64> {
        self.check(params, x)?;
        let mut acts = vec![0.0; self.n_units()];
        Ok(self.forward_into(params, x, &mut acts))
    }

    /// Predicted probability of class 1, kept strictly inside `(0, 1)`.
    pub fn forward(&self, params: &[f64], x: &[f64]) -> Result<f64> {
        let p = sigmoid(self.logit(params, x)?);
        Ok(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    /// Bernoulli log-likelihood of `data` and its gradient (added to `grad` if given).
    fn log_likelihood_impl(&self, params: &[f64], data: &Dataset, mut grad: Option<&mut [f64]>) -> f64 {
        let mut acts = vec![0.0; self.n_units()];
        let mut total = 0.0;
        for i in 0..data.len() {
            let x = data.features(i);
            let y = data.label(i);
            let z = self.forward_into(params, x, &mut acts);
            total += bernoulli_log_likelihood(z, y);
            if let Some(g) = grad.as_deref_mut() {
                self.backprop(params, x, &acts, f64::from(y) - sigmoid(z), g);
            }
        }
        total
    }

    /// Small random initialization: weights `N(0, 1/fan_in)`, zero biases.
    pub fn init_params(&self, seed: u64) -> MlpParams {
        let mut rng = stream_rng(seed, 0);
        let mut params = Vec::with_capacity(self.n_params());
        for w in self.sizes.windows(2) {
            let std = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..w[0] * w[1] {
                params.push(std * rng.sample::<f64, _>(StandardNormal));
            }
            params.extend(std::iter::repeat_n(0.0, w[1]));
        }
        MlpParams(params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnnPrior {
    pub center: MlpParams,
    pub std: f64,
}

impl BnnPrior {
    pub fn new(center: MlpParams, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite()) {
            return Err(Error::invalid("prior std", format!("must be positive, got {std}")));
        }
        Ok(Self { center, std })
    }

    fn log_density(&self, params: &[f64]) -> f64 {
        let sq: f64 = params
            .iter()
            .zip(&self.center.0)
            .map(|(p, c)| (p - c) * (p - c))
            .sum();
        -0.5 * sq / (self.std * self.std)
    }

    fn grad(&self, params: &[f64], grad: &mut [f64]) {
        let inv = 1.0 / (self.std * self.std);
        for ((g, p), c) in grad.iter_mut().zip(params).zip(&self.center.0) {
            *g = -(p - c) * inv;
        }
    }
}

fn check_model(mlp: &Mlp, params: &[f64], data: &Dataset, prior: &BnnPrior) -> Result<()> {
    if data.dim() != mlp.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: mlp.input_dim(),
            got: data.dim(),
        });
    }
    for len in [params.len(), prior.center.len()] {
        if len != mlp.n_params() {
            return Err(Error::DimensionMismatch {
                expected: mlp.n_params(),
                got: len,
            });
        }
    }
    Ok(())
}

/// `Σ_i log p(y_i | x_i, θ) − ‖θ − center‖² / (2 std²)`.
pub fn log_posterior(mlp: &Mlp, params: &[f64], data: &Dataset, prior: &BnnPrior) -> Result<f64> {
    check_model(mlp, params, data, prior)?;
    Ok(mlp.log_likelihood_impl(params, data, None) + prior.log_density(params))
}

pub fn grad_log_posterior(mlp: &Mlp, params: &[f64], data: &Dataset, prior: &BnnPrior) -> Result<Vec<f64>> {
    check_model(mlp, params, data, prior)?;
    let mut grad = vec![0.0; params.len()];
    prior.grad(params, &mut grad);
    mlp.log_likelihood_impl(params, data, Some(&mut grad));
    Ok(grad)
}

/// Fraction of examples whose prediction (`forward ≥ threshold` means class 1)
/// matches the label.
pub fn accuracy(mlp: &Mlp, params: &[f64], data: &Dataset, threshold: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("accuracy dataset"));
    }
    let mut correct = 0usize;
    for i in 0..data.len() {
        let p = mlp.forward(params, data.features(i))?;
        correct += usize::from(u8::from(p >= threshold) == data.label(i));
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Accuracy of `n_draws` chain states picked uniformly with replacement.
pub fn accuracy_distribution(
    mlp: &Mlp,
    chain: &ChainRecord,
    data: &Dataset,
    n_draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if chain.is_empty() {
        return Err(Error::Empty("chain"));
    }
    let mut rng = stream_rng(seed, 0);
    (0..n_draws)
        .map(|_| {
            let k = rng.random_range(0..chain.len());
            accuracy(mlp, chain.sample(k), data, 0.5)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Minimum training accuracy; `None` skips the check.
    pub accuracy_floor: Option<f64>,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 0.05,
            batch_size: 16,
            seed: 0,
            accuracy_floor: Some(0.90),
        }
    }
}

/// Mini-batch SGD on the mean negative log-likelihood, starting from
/// [`Mlp::init_params`]. Deterministic per seed.
pub fn sgd_pretrain(mlp: &Mlp, data: &Dataset, config: &PretrainConfig) -> Result<MlpParams> {
    if data.is_empty() {
        return Err(Error::Empty("training data"));
    }
    if data.dim() != mlp.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: mlp.input_dim(),
            got: data.dim(),
        });
    }
    if !(config.learning_rate > 0.0) || config.batch_size == 0 {
        return Err(Error::invalid("pretrain", "learning rate and batch size must be positive"));
    }
    let mut params = mlp.init_params(config.seed);
    let mut rng = stream_rng(config.seed, 1);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut acts = vec![0.0; mlp.n_units()];
    let mut grad = vec![0.0; params.len()];
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grad.fill(0.0);
            for &i in batch {
                let x = data.features(i);
                let z = mlp.forward_into(&params.0, x, &mut acts);
                mlp.backprop(&params.0, x, &acts, f64::from(data.label(i)) - sigmoid(z), &mut grad);
            }
            let step = config.learning_rate / batch.len() as f64;
            for (p, g) in params.0.iter_mut().zip(&grad) {
                *p += step * g;
            }
        }
    }
    if let Some(floor) = config.accuracy_floor {
        let achieved = accuracy(mlp, &params.0, data, 0.5)?;
        if achieved < floor {
            return Err(Error::AccuracyFloor { achieved, floor });
        }
    }
    Ok(params)
}

/// Log-posterior of the network over a training set, as a sampler target.
#[derive(Debug, Clone)]
pub struct BnnPosterior {
    mlp: Mlp,
    data: Dataset,
    prior: BnnPrior,
}

impl BnnPosterior {
    pub fn new(mlp: Mlp, data: Dataset, prior: BnnPrior) -> Result<Self> {
        check_model(&mlp, &prior.center.0, &data, &prior)?;
        Ok(Self { mlp, data, prior })
    }

    pub fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    pub fn prior(&self) -> &BnnPrior {
        &self.prior
    }
}

impl Potential for BnnPosterior {
    fn name(&self) -> &str {
        "bnn_posterior"
    }

    fn dim(&self) -> usize {
        self.mlp.n_params()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.mlp.log_likelihood_impl(x, &self.data, None) + self.prior.log_density(x)
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        self.log_density_and_grad(x, grad);
    }

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.prior.grad(x, grad);
        self.mlp.log_likelihood_impl(x, &self.data, Some(grad)) + self.prior.log_density(x)
    }

    fn n_data(&self) -> usize {
        self.data.len()
    }

    fn grad_log_prior(&self, x: &[f64], grad: &mut [f64]) {
        self.prior.grad(x, grad);
    }

    fn add_grad_log_likelihood(&self, x: &[f64], index: usize, grad: &mut [f64]) {
        let mut acts = vec![0.0; self.mlp.n_units()];
        let features = self.data.features(index);
        let z = self.mlp.forward_into(x, features, &mut acts);
        let resid = f64::from(self.data.label(index)) - sigmoid(z);
        self.mlp.backprop(x, features, &acts, resid, grad);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn empty_data(dim: usize) -> Dataset {
        Dataset::new("empty", dim, vec![], vec![]).unwrap()
    }

    #[test]
    fn parameter_count_for_two_inputs() {
        assert_eq!(Mlp::new(2).unwrap().n_params(), (2 * 8 + 8) + (8 * 8 + 8) + (8 * 4 + 4) + (4 + 1));
        assert_eq!(Mlp::new(2).unwrap().n_params(), 137);
        assert_eq!(Mlp::new(5).unwrap().n_params(), (5 * 8 + 8) + 72 + 36 + 5);
        assert!(Mlp::new(0).is_err());
    }

    #[test]
    fn zero_params_predict_one_half() {
        let mlp = Mlp::new(2).unwrap();
        let params = vec![0.0; 137];
        for x in [[0.0, 0.0], [3.0, -7.0]] {
            assert_eq!(mlp.forward(&params, &x).unwrap(), 0.5);
        }
    }

    #[test]
    fn output_bias_only() {
        let mlp = Mlp::new(2).unwrap();
        let mut params = vec![0.0; 137];
        params[136] = 10.0;
        assert_abs_diff_eq!(mlp.forward(&params, &[1.0, 2.0]).unwrap(), 0.9999546, epsilon = 1e-7);
    }

    #[test]
    fn forward_rejects_wrong_dims() {
        let mlp = Mlp::new(2).unwrap();
        assert!(mlp.forward(&[0.0; 137], &[1.0]).is_err());
        assert!(mlp.forward(&[0.0; 136], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn forward_stays_inside_unit_interval_for_huge_params() {
        let mlp = Mlp::new(2).unwrap();
        let mut rng = stream_rng(5, 0);
        for _ in 0..200 {
            let params: Vec<f64> = (0..137).map(|_| rng.random_range(-100.0..100.0)).collect();
            let x = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let p = mlp.forward(&params, &x).unwrap();
            assert!(p > 0.0 && p < 1.0, "{p}");
        }
    }

    #[test]
    fn log_posterior_simple_cases() {
        let mlp = Mlp::new(2).unwrap();
        let prior = BnnPrior::new(MlpParams(vec![0.0; 137]), 0.5).unwrap();
        let center = prior.center.0.clone();
        assert_eq!(log_posterior(&mlp, &center, &empty_data(2), &prior).unwrap(), 0.0);
        let one = Dataset::new("one", 2, vec![0.3, -0.4], vec![1]).unwrap();
        assert_abs_diff_eq!(
            log_posterior(&mlp, &center, &one, &prior).unwrap(),
            -std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        let g = grad_log_posterior(&mlp, &center, &empty_data(2), &prior).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn prior_gradient_is_linear_pull() {
        let mlp = Mlp::new(2).unwrap();
        let center = mlp.init_params(3);
        let prior = BnnPrior::new(center.clone(), 0.5).unwrap();
        let mut params = center.0.clone();
        params[17] += 0.2;
        let g = grad_log_posterior(&mlp, &params, &empty_data(2), &prior).unwrap();
        for (k, v) in g.iter().enumerate() {
            let expected = if k == 17 { -0.2 / 0.25 } else { 0.0 };
            assert_abs_diff_eq!(*v, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn accuracy_rules() {
        let mlp = Mlp::new(1).unwrap();
        let zero = vec![0.0; mlp.n_params()];
        let data = Dataset::new("d", 1, vec![0.0; 5], vec![1, 1, 0, 1, 0]).unwrap();
        // forward = 0.5 exactly predicts class 1
        assert_abs_diff_eq!(accuracy(&mlp, &zero, &data, 0.5).unwrap(), 0.6);
        let flipped = Dataset::new("f", 1, vec![0.0; 5], vec![0, 0, 1, 0, 1]).unwrap();
        assert_abs_diff_eq!(accuracy(&mlp, &zero, &flipped, 0.5).unwrap(), 0.4);
        assert!(accuracy(&mlp, &zero, &empty_data(1), 0.5).is_err());
    }

    #[test]
    fn perfect_predictor() {
        let mlp = Mlp::new(1).unwrap();
        // route x straight through: first hidden unit copies x, chain scales up
        let mut params = vec![0.0; mlp.n_params()];
        params[0] = 5.0; // layer 1, unit 0 weight on x
        let l2 = 8 + 8;
        params[l2] = 5.0; // layer 2, unit 0 weight on layer-1 unit 0
        let l3 = l2 + 72;
        params[l3] = 5.0; // layer 3, unit 0 weight on layer-2 unit 0
        let l4 = l3 + 36;
        params[l4] = 20.0; // output weight on layer-3 unit 0
        let xs: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let ys: Vec<u8> = (0..10).map(|i| u8::from(i % 2 == 0)).collect();
        let data = Dataset::new("p", 1, xs, ys).unwrap();
        assert_eq!(accuracy(&mlp, &params, &data, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_distribution_edge_cases() {
        let mlp = Mlp::new(2).unwrap();
        let data = crate::data_io::synthetic_fourclass(1);
        let params = mlp.init_params(4);
        let chain = ChainRecord::from_samples(137, params.0.clone()).unwrap();
        let accs = accuracy_distribution(&mlp, &chain, &data, 20, 3).unwrap();
        assert!(accs.windows(2).all(|w| w[0] == w[1]));
        assert!(accuracy_distribution(&mlp, &chain, &data, 0, 3).unwrap().is_empty());
        assert!(accuracy_distribution(&mlp, &ChainRecord::new(137), &data, 5, 3).is_err());
    }

    #[test]
    fn pretrain_zero_epochs_and_determinism() {
        let mlp = Mlp::new(2).unwrap();
        let data = crate::data_io::synthetic_fourclass(1);
        let cfg = PretrainConfig {
            epochs: 0,
            accuracy_floor: None,
            seed: 8,
            ..PretrainConfig::default()
        };
        assert_eq!(sgd_pretrain(&mlp, &data, &cfg).unwrap(), mlp.init_params(8));
        let cfg = PretrainConfig {
            epochs: 3,
            accuracy_floor: None,
            ..cfg
        };
        assert_eq!(sgd_pretrain(&mlp, &data, &cfg).unwrap(), sgd_pretrain(&mlp, &data, &cfg).unwrap());
    }

    #[test]
    fn pretrain_floor_is_enforced() {
        let mlp = Mlp::new(2).unwrap();
        let data = crate::data_io::synthetic_fourclass(1);
        let cfg = PretrainConfig {
            epochs: 1,
            accuracy_floor: Some(1.01),
            ..PretrainConfig::default()
        };
        assert!(matches!(sgd_pretrain(&mlp, &data, &cfg), Err(Error::AccuracyFloor { .. })));
    }

    #[test]
    fn posterior_minibatch_pieces_match_full_gradient() {
        let mlp = Mlp::new(2).unwrap();
        let data = crate::data_io::synthetic_fourclass(2).subset(&(0..12).collect::<Vec<_>>(), "s");
        let prior = BnnPrior::new(mlp.init_params(1), 0.5).unwrap();
        let post = BnnPosterior::new(mlp.clone(), data, prior).unwrap();
        let theta = mlp.init_params(9).0;
        let mut full = vec![0.0; 137];
        post.grad_log_density(&theta, &mut full);
        let mut pieces = vec![0.0; 137];
        post.grad_log_prior(&theta, &mut pieces);
        for i in 0..post.n_data() {
            post.add_grad_log_likelihood(&theta, i, &mut pieces);
        }
        for (a, b) in full.iter().zip(&pieces) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}
