//! Jump-diffusion Langevin sampling.
//!
//! The crate provides a small catalog of unnormalized targets ([`potentials`]),
//! single-step transition operators and a chain runner ([`samplers`]), empirical
//! distribution diagnostics ([`diagnostics`]), a compact Bayesian neural-network
//! posterior ([`bnn`]) and dataset / CSV plumbing ([`data_io`]).
//!
//! The headline sampler interleaves Metropolis-adjusted Langevin steps with
//! independence Metropolis-Hastings jumps whose timing follows Poisson gaps:
//!
//! ```
//! use jdld::potentials::Dunes;
//! use jdld::samplers::{run_chain, IndependenceProposal, SamplerConfig, SamplerKind};
//!
//! let target = Dunes::new(0, 0.02).unwrap();
//! let config = SamplerConfig::new(1e-3, 200.0, IndependenceProposal::new(vec![0.0], 5.0).unwrap(), 7)
//!     .unwrap();
//! let chain = run_chain(SamplerKind::Jdld, &target, &[0.0], 10_000, &config).unwrap();
//! assert_eq!(chain.len(), 10_000);
//! ```

pub mod bnn;
pub mod data_io;
pub mod diagnostics;
mod error;
pub mod potentials;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use potentials::Potential;
