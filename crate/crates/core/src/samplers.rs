//! Transition operators and the chain runner.
//!
//! Four samplers share one [`ChainState`]:
//!
//! * [`mh_step`]: independence Metropolis-Hastings with an isotropic Gaussian
//!   proposal that ignores the current state.
//! * [`sgld_step`]: stochastic-gradient Langevin with a decaying step size and
//!   no accept/reject correction.
//! * [`mala_step`]: Metropolis-adjusted Langevin, corrected with the Gaussian
//!   transition-kernel ratio.
//! * [`jdld_step`]: MALA steps interrupted by independence jumps at iterations
//!   `t̃` whose gaps are Poisson distributed.
//!
//! All log-density arithmetic happens in log space. Each step consumes random
//! numbers from the caller's stream only, so a chain is a deterministic function
//! of `(seed, stream, config, potential, init)`.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::potentials::Potential;
use crate::rng::{fill_standard_normal, log_uniform, stream_rng};
use crate::{Error, Result};

/// `next_jump_t` value that disables jumps entirely.
pub const NEVER: u64 = u64::MAX;

/// Cached `(log p, ∇ log p)` at a specific point.
#[derive(Debug, Clone)]
struct Memo {
    theta: Vec<f64>,
    log_p: f64,
    grad: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ChainState {
    pub theta: Vec<f64>,
    pub t: u64,
    /// Iteration at which the next jump is attempted.
    pub next_jump_t: u64,
    memo: Option<Memo>,
}

impl PartialEq for ChainState {
    fn eq(&self, other: &Self) -> bool {
        self.theta == other.theta && self.t == other.t && self.next_jump_t == other.next_jump_t
    }
}

impl ChainState {
    pub fn new(theta: Vec<f64>) -> Self {
        Self::with_next_jump(theta, 0)
    }

    pub fn with_next_jump(theta: Vec<f64>, next_jump_t: u64) -> Self {
        Self {
            theta,
            t: 0,
            next_jump_t,
            memo: None,
        }
    }

    /// `(log p(θ), ∇ log p(θ))` at the current state, reusing the value
    /// computed by the previous step when θ has not changed since.
    fn evaluate<P: Potential + ?Sized>(&mut self, potential: &P) -> (f64, &[f64]) {
        let fresh = match &self.memo {
            Some(m) => m.theta != self.theta,
            None => true,
        };
        if fresh {
            let mut grad = vec![0.0; self.theta.len()];
            let log_p = potential.log_density_and_grad(&self.theta, &mut grad);
            self.memo = Some(Memo {
                theta: self.theta.clone(),
                log_p,
                grad,
            });
        }
        let m = self.memo.as_ref().expect("memo populated above");
        (m.log_p, &m.grad)
    }

    fn current_log_p<P: Potential + ?Sized>(&self, potential: &P) -> f64 {
        match &self.memo {
            Some(m) if m.theta == self.theta => m.log_p,
            _ => potential.log_density(&self.theta),
        }
    }

    fn accept(&mut self, theta: Vec<f64>, memo: Option<Memo>) {
        self.theta = theta;
        self.memo = memo;
    }
}

/// Isotropic Gaussian `N(mean, std² I)` used as the independence proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceProposal {
    mean: Vec<f64>,
    std: f64,
}

impl IndependenceProposal {
    pub fn new(mean: Vec<f64>, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite()) {
            return Err(Error::invalid("proposal std", format!("must be positive, got {std}")));
        }
        if mean.is_empty() {
            return Err(Error::Empty("proposal mean"));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("proposal mean", "must be finite"));
        }
        Ok(Self { mean, std })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Unnormalized log-density; the constant cancels in every ratio.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let sq: f64 = x
            .iter()
            .zip(&self.mean)
            .map(|(a, m)| (a - m) * (a - m))
            .sum();
        -0.5 * sq / (self.std * self.std)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.mean.len()];
        fill_standard_normal(rng, &mut out);
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o = m + self.std * *o;
        }
        out
    }
}

/// Decaying SGLD step size `a (b + t)^(−γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

impl StepSchedule {
    /// `a = 0.2, b = 231, γ = 0.55`: decays from 1e-2 at t = 0 to 1e-4 at t = 1e6.
    pub const SGLD_DEFAULT: StepSchedule = StepSchedule {
        a: 0.2,
        b: 231.0,
        gamma: 0.55,
    };

    pub fn at(&self, t: u64) -> Result<f64> {
        stepsize_schedule(t, self.a, self.b, self.gamma)
    }
}

pub fn stepsize_schedule(t: u64, a: f64, b: f64, gamma: f64) -> Result<f64> {
    let base = b + t as f64;
    if !(base > 0.0) {
        return Err(Error::invalid("schedule", format!("b + t must be positive, got {base}")));
    }
    Ok(a * base.powf(-gamma))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Langevin step size ε (noise variance per coordinate).
    pub epsilon: f64,
    /// Mean Poisson gap between jump attempts.
    pub lambda: f64,
    pub proposal: IndependenceProposal,
    pub schedule: Option<StepSchedule>,
    pub batch_size: usize,
    pub seed: u64,
    /// Stream id within `seed`; distinct chains use distinct streams.
    pub stream: u64,
    /// Use the independence-proposal ratio `q(θ)/q(θ*)` in the Langevin branch
    /// instead of the transition-kernel ratio. Does not correct discretization
    /// bias; kept for comparison runs only.
    pub literal_langevin_ratio: bool,
}

impl SamplerConfig {
    pub fn new(epsilon: f64, lambda: f64, proposal: IndependenceProposal, seed: u64) -> Result<Self> {
        let config = Self {
            epsilon,
            lambda,
            proposal,
            schedule: None,
            batch_size: 1,
            seed,
            stream: 0,
            literal_langevin_ratio: false,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_schedule(mut self, schedule: StepSchedule, batch_size: usize) -> Self {
        self.schedule = Some(schedule);
        self.batch_size = batch_size;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", format!("must be positive, got {}", self.epsilon)));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::invalid("lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        Ok(())
    }
}

/// Which branch produced a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Jump,
    Langevin,
    Sgld,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub branch: Branch,
    pub accepted: bool,
    /// `log p_a` of the proposal; zero for SGLD.
    pub log_accept: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AcceptCount {
    pub accepted: u64,
    pub proposed: u64,
}

impl AcceptCount {
    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Every visited state of a chain, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord {
    dim: usize,
    values: Vec<f64>,
    pub accept_jump: AcceptCount,
    pub accept_langevin: AcceptCount,
}

impl ChainRecord {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            values: Vec::new(),
            accept_jump: AcceptCount::default(),
            accept_langevin: AcceptCount::default(),
        }
    }

    pub fn from_samples(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.len(),
            });
        }
        Ok(Self {
            dim,
            values,
            ..Self::new(dim)
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn push(&mut self, theta: &[f64]) {
        assert_eq!(theta.len(), self.dim, "sample dimension");
        self.values.extend_from_slice(theta);
    }

    /// Values of one coordinate in chain order.
    pub fn coord(&self, c: usize) -> Vec<f64> {
        self.samples().map(|s| s[c]).collect()
    }

    /// Drops the first `k` samples, keeping the acceptance counters.
    pub(crate) fn drop_front(&mut self, k: usize) {
        self.values.drain(..k * self.dim);
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }
}

/// Poisson(λ) variate; λ = 0 always yields 0.
pub fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(lambda).expect("positive finite lambda");
    dist.sample(rng) as u64
}

fn check_dim<P: Potential + ?Sized>(potential: &P, theta: &[f64]) {
    assert_eq!(
        theta.len(),
        potential.dim(),
        "state dimension does not match potential `{}`",
        potential.name()
    );
}

fn accept_test(log_u: f64, log_accept: f64) -> bool {
    log_u < log_accept
}

/// `log p_a` for an independence proposal `θ̄` from the current `θ`.
pub fn independence_log_acceptance(
    log_p_current: f64,
    log_p_proposed: f64,
    log_q_current: f64,
    log_q_proposed: f64,
) -> f64 {
    let log_ratio = (log_p_proposed - log_p_current) + (log_q_current - log_q_proposed);
    if log_ratio.is_nan() {
        f64::NEG_INFINITY
    } else {
        log_ratio.min(0.0)
    }
}

/// One independence Metropolis-Hastings transition.
pub fn mh_step<P: Potential + ?Sized, R: Rng + ?Sized>(
    potential: &P,
    state: &mut ChainState,
    proposal: &IndependenceProposal,
    rng: &mut R,
) -> StepOutcome {
    check_dim(potential, &state.theta);
    let candidate = proposal.sample(rng);
    let log_u = log_uniform(rng);
    let log_p_current = state.current_log_p(potential);
    let log_p_candidate = potential.log_density(&candidate);
    let log_accept = independence_log_acceptance(
        log_p_current,
        log_p_candidate,
        proposal.log_density(&state.theta),
        proposal.log_density(&candidate),
    );
    let accepted = accept_test(log_u, log_accept);
    if accepted {
        state.accept(candidate, None);
    }
    state.t += 1;
    StepOutcome {
        branch: Branch::Jump,
        accepted,
        log_accept,
    }
}

/// `θ + (ε/2) g + noise`.
pub fn langevin_proposal(theta: &[f64], grad: &[f64], epsilon: f64, noise: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .zip(grad)
        .zip(noise)
        .map(|((t, g), n)| t + 0.5 * epsilon * g + n)
        .collect()
}

/// `log q(to | from)` for the Langevin kernel `N(from + (ε/2)∇log p(from), ε I)`,
/// up to the shared normalizing constant.
pub fn langevin_log_kernel(to: &[f64], from: &[f64], grad_from: &[f64], epsilon: f64) -> f64 {
    let sq: f64 = to
        .iter()
        .zip(from)
        .zip(grad_from)
        .map(|((y, x), g)| {
            let d = y - x - 0.5 * epsilon * g;
            d * d
        })
        .sum();
    -0.5 * sq / epsilon
}

/// MALA `log p_a` for moving from `theta` to `candidate`.
pub fn mala_log_acceptance(
    log_p_current: f64,
    theta: &[f64],
    grad_current: &[f64],
    log_p_candidate: f64,
    candidate: &[f64],
    grad_candidate: &[f64],
    epsilon: f64,
) -> f64 {
    let forward = langevin_log_kernel(candidate, theta, grad_current, epsilon);
    let backward = langevin_log_kernel(theta, candidate, grad_candidate, epsilon);
    let log_ratio = (log_p_candidate - log_p_current) + (backward - forward);
    if log_ratio.is_nan() {
        f64::NEG_INFINITY
    } else {
        log_ratio.min(0.0)
    }
}

/// MALA transition with caller-supplied noise (already scaled to variance ε)
/// and log-uniform. [`mala_step`] draws both from the stream.
pub fn mala_step_with<P: Potential + ?Sized>(
    potential: &P,
    state: &mut ChainState,
    epsilon: f64,
    noise: &[f64],
    log_u: f64,
    literal_ratio: Option<&IndependenceProposal>,
) -> StepOutcome {
    check_dim(potential, &state.theta);
    let (log_p_current, grad_current) = state.evaluate(potential);
    let grad_current = grad_current.to_vec();
    let candidate = langevin_proposal(&state.theta, &grad_current, epsilon, noise);
    let mut grad_candidate = vec![0.0; candidate.len()];
    let log_p_candidate = potential.log_density_and_grad(&candidate, &mut grad_candidate);
    let log_accept = match literal_ratio {
        None => mala_log_acceptance(
            log_p_current,
            &state.theta,
            &grad_current,
            log_p_candidate,
            &candidate,
            &grad_candidate,
            epsilon,
        ),
        Some(q) => independence_log_acceptance(
            log_p_current,
            log_p_candidate,
            q.log_density(&state.theta),
            q.log_density(&candidate),
        ),
    };
    let accepted = accept_test(log_u, log_accept);
    if accepted {
        let memo = Memo {
            theta: candidate.clone(),
            log_p: log_p_candidate,
            grad: grad_candidate,
        };
        state.accept(candidate, Some(memo));
    }
    state.t += 1;
    StepOutcome {
        branch: Branch::Langevin,
        accepted,
        log_accept,
    }
}

/// One Metropolis-adjusted Langevin transition with step size `epsilon`.
pub fn mala_step<P: Potential + ?Sized, R: Rng + ?Sized>(
    potential: &P,
    state: &mut ChainState,
    epsilon: f64,
    rng: &mut R,
) -> StepOutcome {
    let (noise, log_u) = langevin_noise(state.theta.len(), epsilon, rng);
    mala_step_with(potential, state, epsilon, &noise, log_u, None)
}

/// `N(0, ε I)` draw.
fn scaled_noise<R: Rng + ?Sized>(dim: usize, epsilon: f64, rng: &mut R) -> Vec<f64> {
    let mut noise = vec![0.0; dim];
    fill_standard_normal(rng, &mut noise);
    let scale = epsilon.sqrt();
    noise.iter_mut().for_each(|n| *n *= scale);
    noise
}

fn langevin_noise<R: Rng + ?Sized>(dim: usize, epsilon: f64, rng: &mut R) -> (Vec<f64>, f64) {
    let noise = scaled_noise(dim, epsilon, rng);
    (noise, log_uniform(rng))
}

/// One jump-diffusion transition: an independence jump when `t` has reached
/// `next_jump_t` (followed by scheduling the next jump `max(1, Pois(λ))`
/// iterations later), otherwise a MALA step with `config.epsilon`.
pub fn jdld_step<P: Potential + ?Sized, R: Rng + ?Sized>(
    potential: &P,
    state: &mut ChainState,
    config: &SamplerConfig,
    rng: &mut R,
) -> StepOutcome {
    debug_assert!(state.next_jump_t >= state.t, "missed a scheduled jump");
    if state.t == state.next_jump_t {
        let outcome = mh_step(potential, state, &config.proposal, rng);
        let gap = poisson_draw(config.lambda, rng).max(1);
        state.next_jump_t = state.next_jump_t.saturating_add(gap);
        outcome
    } else {
        let (noise, log_u) = langevin_noise(state.theta.len(), config.epsilon, rng);
        let literal = config.literal_langevin_ratio.then_some(&config.proposal);
        mala_step_with(potential, state, config.epsilon, &noise, log_u, literal)
    }
}

/// `θ + (ε/2) g + noise` for a stochastic gradient estimate `g`.
pub fn sgld_update(theta: &mut [f64], grad_estimate: &[f64], epsilon: f64, noise: &[f64]) {
    for ((t, g), n) in theta.iter_mut().zip(grad_estimate).zip(noise) {
        *t += 0.5 * epsilon * g + n;
    }
}

/// Prior gradient plus the likelihood gradient over a uniformly drawn
/// mini-batch (without replacement), rescaled by `N / n`.
pub fn minibatch_gradient<P: Potential + ?Sized, R: Rng + ?Sized>(
    potential: &P,
    theta: &[f64],
    batch_size: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut grad = vec![0.0; theta.len()];
    potential.grad_log_prior(theta, &mut grad);
    let n_data = potential.n_data();
    if n_data == 0 {
        return grad;
    }
    let batch = batch_size.min(n_data);
    let mut lik = vec![0.0; theta.len()];
    for i in index::sample(rng, n_data, batch) {
        potential.add_grad_log_likelihood(theta, i, &mut lik);
    }
    let scale = n_data as f64 / batch as f64;
    for (g, l) in grad.iter_mut().zip(&lik) {
        *g += scale * l;
    }
    grad
}

/// One SGLD transition. Requires `config.schedule`.
pub fn sgld_step<P: Potential + ?Sized, R: Rng + ?Sized>(
    potential: &P,
    state: &mut ChainState,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<StepOutcome> {
    check_dim(potential, &state.theta);
    let schedule = config
        .schedule
        .ok_or_else(|| Error::invalid("schedule", "SGLD needs step schedule constants"))?;
    let epsilon = schedule.at(state.t)?;
    let grad = minibatch_gradient(potential, &state.theta, config.batch_size, rng);
    let noise = scaled_noise(state.theta.len(), epsilon, rng);
    sgld_update(&mut state.theta, &grad, epsilon, &noise);
    state.memo = None;
    state.t += 1;
    Ok(StepOutcome {
        branch: Branch::Sgld,
        accepted: true,
        log_accept: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Mh,
    Sgld,
    Mala,
    Jdld,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 4] = [
        SamplerKind::Mh,
        SamplerKind::Sgld,
        SamplerKind::Mala,
        SamplerKind::Jdld,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Mh => "mh",
            SamplerKind::Sgld => "sgld",
            SamplerKind::Mala => "mala",
            SamplerKind::Jdld => "jdld",
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mh" => Ok(SamplerKind::Mh),
            "sgld" => Ok(SamplerKind::Sgld),
            "mala" | "ld" | "langevin" => Ok(SamplerKind::Mala),
            "jdld" | "jump" => Ok(SamplerKind::Jdld),
            other => Err(Error::invalid("sampler", format!("unknown sampler `{other}`"))),
        }
    }
}

/// Runs `n_iters` transitions from `init` and records every visited state.
///
/// Jump-diffusion chains attempt their first jump at iteration 0.
pub fn run_chain<P: Potential + ?Sized>(
    sampler: SamplerKind,
    potential: &P,
    init: &[f64],
    n_iters: u64,
    config: &SamplerConfig,
) -> Result<ChainRecord> {
    config.validate()?;
    let dim = potential.dim();
    if init.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: init.len(),
        });
    }
    if config.proposal.dim() != dim && matches!(sampler, SamplerKind::Mh | SamplerKind::Jdld) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: config.proposal.dim(),
        });
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("init", "must be finite"));
    }
    if sampler == SamplerKind::Sgld && config.schedule.is_none() {
        return Err(Error::invalid("schedule", "SGLD needs step schedule constants"));
    }

    let mut rng = stream_rng(config.seed, config.stream);
    let mut state = ChainState::new(init.to_vec());
    let mut record = ChainRecord::new(dim);
    record.values.reserve(n_iters as usize * dim);
    for iteration in 0..n_iters {
        let outcome = match sampler {
            SamplerKind::Mh => mh_step(potential, &mut state, &config.proposal, &mut rng),
            SamplerKind::Sgld => sgld_step(potential, &mut state, config, &mut rng)?,
            SamplerKind::Mala => mala_step(potential, &mut state, config.epsilon, &mut rng),
            SamplerKind::Jdld => jdld_step(potential, &mut state, config, &mut rng),
        };
        match outcome.branch {
            Branch::Jump => record.accept_jump.record(outcome.accepted),
            Branch::Langevin | Branch::Sgld => record.accept_langevin.record(outcome.accepted),
        }
        if state.theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                sampler: sampler.as_str(),
                iteration,
            });
        }
        record.push(&state.theta);
    }
    Ok(record)
}
