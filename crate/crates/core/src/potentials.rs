//! Target distributions as unnormalized log-densities with analytic gradients.
//!
//! A target with energy `E(x)` is handled as `log p(x) = -E(x)`; normalizing
//! constants are never computed.

use crate::{Error, Result};

/// An unnormalized log-density together with its gradient.
///
/// Implementations are immutable after construction so a single instance can be
/// shared by any number of concurrently running chains.
///
/// Targets built from a dataset can additionally expose their per-datum
/// likelihood terms for mini-batch gradient estimates. The default treats the
/// whole log-density as a prior over an empty dataset, which makes every
/// potential usable by stochastic-gradient samplers.
pub trait Potential: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn log_density(&self, x: &[f64]) -> f64;

    /// Writes `∇ log p(x)` into `grad` (length `dim`).
    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]);

    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.grad_log_density(x, grad);
        self.log_density(x)
    }

    /// Number of data items whose likelihood terms make up the density.
    fn n_data(&self) -> usize {
        0
    }

    /// Gradient of the log-prior part. Defaults to the full gradient.
    fn grad_log_prior(&self, x: &[f64], grad: &mut [f64]) {
        self.grad_log_density(x, grad);
    }

    /// Adds `∇ log p(x_i | θ)` for datum `index` into `grad`.
    fn add_grad_log_likelihood(&self, _x: &[f64], index: usize, _grad: &mut [f64]) {
        panic!(
            "potential `{}` has no per-datum likelihood (index {index})",
            self.name()
        );
    }
}

impl<P: Potential + ?Sized> Potential for &P {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        (**self).grad_log_density(x, grad)
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).log_density_and_grad(x, grad)
    }
    fn n_data(&self) -> usize {
        (**self).n_data()
    }
    fn grad_log_prior(&self, x: &[f64], grad: &mut [f64]) {
        (**self).grad_log_prior(x, grad)
    }
    fn add_grad_log_likelihood(&self, x: &[f64], index: usize, grad: &mut [f64]) {
        (**self).add_grad_log_likelihood(x, index, grad)
    }
}

impl<P: Potential + ?Sized> Potential for Box<P> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        (**self).grad_log_density(x, grad)
    }
    fn log_density_and_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).log_density_and_grad(x, grad)
    }
    fn n_data(&self) -> usize {
        (**self).n_data()
    }
    fn grad_log_prior(&self, x: &[f64], grad: &mut [f64]) {
        (**self).grad_log_prior(x, grad)
    }
    fn add_grad_log_likelihood(&self, x: &[f64], index: usize, grad: &mut [f64]) {
        (**self).add_grad_log_likelihood(x, index, grad)
    }
}

/// `log(e^a + e^b)` without overflow.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {value}")))
    }
}

/// One-dimensional "dunes": `E(x) = x² (sin²(2^α x) + δ)`.
///
/// Wells sit at the zeros of `sin(2^α x)`, spaced `π / 2^α` apart, with the
/// `δ` floor setting how fast well depth decays away from the origin.
#[derive(Debug, Clone)]
pub struct Dunes {
    alpha: i32,
    delta: f64,
    freq: f64,
}

impl Dunes {
    pub fn new(alpha: i32, delta: f64) -> Result<Self> {
        check_positive("delta", delta)?;
        Ok(Self {
            alpha,
            delta,
            freq: 2f64.powi(alpha),
        })
    }

    pub fn alpha(&self) -> i32 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Distance between neighbouring wells.
    pub fn well_spacing(&self) -> f64 {
        std::f64::consts::PI / self.freq
    }
}

impl Potential for Dunes {
    fn name(&self) -> &str {
        "dunes"
    }

    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let x = x[0];
        let s = (self.freq * x).sin();
        -x * x * (s * s + self.delta)
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        let x = x[0];
        let (s, c) = (self.freq * x).sin_cos();
        grad[0] = -(2.0 * x * (s * s + self.delta) + x * x * 2.0 * self.freq * s * c);
    }
}

/// Two-dimensional cross: `E(x, y) = (x² + y²)(sin²(xy) + δ)`.
///
/// Modes follow the axes and the hyperbolas `xy = kπ`.
#[derive(Debug, Clone)]
pub struct Cross {
    delta: f64,
}

impl Cross {
    pub fn new(delta: f64) -> Result<Self> {
        check_positive("delta", delta)?;
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl Potential for Cross {
    fn name(&self) -> &str {
        "cross"
    }

    fn dim(&self) -> usize {
        2
    }

    fn log_density(&self, p: &[f64]) -> f64 {
        let (x, y) = (p[0], p[1]);
        let s = (x * y).sin();
        -(x * x + y * y) * (s * s + self.delta)
    }

    fn grad_log_density(&self, p: &[f64], grad: &mut [f64]) {
        let (x, y) = (p[0], p[1]);
        let r2 = x * x + y * y;
        let (s, c) = (x * y).sin_cos();
        let bump = s * s + self.delta;
        // d/du sin²(xy) = 2 sin cos · ∂(xy)/∂u
        let dsin = 2.0 * s * c;
        grad[0] = -(2.0 * x * bump + r2 * dsin * y);
        grad[1] = -(2.0 * y * bump + r2 * dsin * x);
    }
}

/// Posterior over `(θ0, θ1)` for data drawn from
/// `½ N(θ0², 1) + ½ N((θ0 + θ1)², 1)` under independent `N(0, 1)` priors.
#[derive(Debug, Clone)]
pub struct QuadraticMixture {
    data: Vec<f64>,
}

impl QuadraticMixture {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty("quadratic mixture data"));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("data", format!("non-finite value {bad}")));
        }
        Ok(Self { data })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Log-likelihood of the data alone (no prior).
    pub fn log_likelihood(&self, theta: &[f64]) -> f64 {
        let (m0, m1) = component_means(theta);
        self.data.iter().map(|&x| datum_log_likelihood(x, m0, m1)).sum()
    }

    /// Adds the gradient of one datum's log-likelihood.
    fn add_datum_grad(x: f64, theta: &[f64], grad: &mut [f64]) {
        let (t0, t1) = (theta[0], theta[1]);
        let sum = t0 + t1;
        let (m0, m1) = (t0 * t0, sum * sum);
        let a = -0.5 * (x - m0).powi(2);
        let b = -0.5 * (x - m1).powi(2);
        let norm = log_add_exp(a, b);
        let r0 = (a - norm).exp();
        let r1 = (b - norm).exp();
        // ∂m0/∂θ0 = 2θ0, ∂m1/∂θ0 = ∂m1/∂θ1 = 2(θ0 + θ1)
        let pull1 = r1 * (x - m1) * 2.0 * sum;
        grad[0] += r0 * (x - m0) * 2.0 * t0 + pull1;
        grad[1] += pull1;
    }
}

fn component_means(theta: &[f64]) -> (f64, f64) {
    let sum = theta[0] + theta[1];
    (theta[0] * theta[0], sum * sum)
}

fn datum_log_likelihood(x: f64, m0: f64, m1: f64) -> f64 {
    let a = -0.5 * (x - m0).powi(2);
    let b = -0.5 * (x - m1).powi(2);
    log_add_exp(a, b) - std::f64::consts::LN_2
}

impl Potential for QuadraticMixture {
    fn name(&self) -> &str {
        "quadratic_mixture"
    }

    fn dim(&self) -> usize {
        2
    }

    fn log_density(&self, theta: &[f64]) -> f64 {
        self.log_likelihood(theta) - 0.5 * (theta[0] * theta[0] + theta[1] * theta[1])
    }

    fn grad_log_density(&self, theta: &[f64], grad: &mut [f64]) {
        self.grad_log_prior(theta, grad);
        for &x in &self.data {
            Self::add_datum_grad(x, theta, grad);
        }
    }

    fn n_data(&self) -> usize {
        self.data.len()
    }

    fn grad_log_prior(&self, theta: &[f64], grad: &mut [f64]) {
        grad[0] = -theta[0];
        grad[1] = -theta[1];
    }

    fn add_grad_log_likelihood(&self, theta: &[f64], index: usize, grad: &mut [f64]) {
        Self::add_datum_grad(self.data[index], theta, grad);
    }
}

/// Equal-weight one-dimensional Gaussian mixture with means on a uniform grid
/// centred at zero: `μ_k = (k − (n−1)/2) · spacing`, common std `width`.
#[derive(Debug, Clone)]
pub struct EqualModes {
    means: Vec<f64>,
    width: f64,
    spacing: f64,
}

impl EqualModes {
    pub fn new(n_modes: usize, spacing: f64, width: f64) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("n_modes", "must be at least 1"));
        }
        check_positive("spacing", spacing)?;
        check_positive("width", width)?;
        let centre = (n_modes as f64 - 1.0) / 2.0;
        let means = (0..n_modes)
            .map(|k| (k as f64 - centre) * spacing)
            .collect();
        Ok(Self {
            means,
            width,
            spacing,
        })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    fn component_logs(&self, x: f64) -> impl Iterator<Item = f64> + '_ {
        let inv_var = 1.0 / (self.width * self.width);
        self.means
            .iter()
            .map(move |&m| -0.5 * (x - m) * (x - m) * inv_var)
    }

    fn max_component_log(&self, x: f64) -> f64 {
        self.component_logs(x).fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Potential for EqualModes {
    fn name(&self) -> &str {
        "equal_modes"
    }

    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let x = x[0];
        let m = self.max_component_log(x);
        let s: f64 = self.component_logs(x).map(|l| (l - m).exp()).sum();
        m + s.ln() - (self.means.len() as f64).ln()
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        let x = x[0];
        let m = self.max_component_log(x);
        let mut weight = 0.0;
        let mut pull = 0.0;
        for (l, &mu) in self.component_logs(x).zip(&self.means) {
            let w = (l - m).exp();
            weight += w;
            pull += w * (mu - x);
        }
        grad[0] = pull / (weight * self.width * self.width);
    }
}

/// Isotropic standard Gaussian, `log p(x) = −‖x‖² / 2`.
#[derive(Debug, Clone)]
pub struct StdGaussian {
    dim: usize,
}

impl StdGaussian {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        Ok(Self { dim })
    }
}

impl Potential for StdGaussian {
    fn name(&self) -> &str {
        "std_gaussian"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        -0.5 * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn grad_log_density(&self, x: &[f64], grad: &mut [f64]) {
        for (g, v) in grad.iter_mut().zip(x) {
            *g = -v;
        }
    }
}

/// Largest relative error between the analytic gradient and central finite
/// differences with step `h`, scaled by `max(1, |analytic|)` per coordinate.
pub fn gradient_check<P: Potential + ?Sized>(potential: &P, x: &[f64], h: f64) -> f64 {
    let dim = potential.dim();
    let mut analytic = vec![0.0; dim];
    potential.grad_log_density(x, &mut analytic);
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for k in 0..dim {
        probe[k] = x[k] + h;
        let up = potential.log_density(&probe);
        probe[k] = x[k] - h;
        let down = potential.log_density(&probe);
        probe[k] = x[k];
        let numeric = (up - down) / (2.0 * h);
        let err = (numeric - analytic[k]).abs() / analytic[k].abs().max(1.0);
        worst = worst.max(err);
    }
    worst
}
