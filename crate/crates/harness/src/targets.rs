//! Serializable descriptions of catalog targets.

use std::fmt;

use anyhow::Result;
use jdld::data_io::generate_quadratic_mixture_data;
use jdld::potentials::{Cross, Dunes, EqualModes, QuadraticMixture, StdGaussian};
use jdld::Potential;

/// Seed and size of the quadratic-mixture dataset; fixed so every run of the
/// experiment sees the same posterior.
pub const QUAD_DATA_SEED: u64 = 42;
pub const QUAD_DATA_SIZE: usize = 100;
pub const QUAD_TRUE_THETA: (f64, f64) = (0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Dunes { alpha: i32, delta: f64 },
    Cross { delta: f64 },
    QuadMixture { theta0: f64, theta1: f64, n: usize, data_seed: u64 },
    EqualModes { n: usize, spacing: f64, width: f64 },
    Gaussian { dim: usize },
}

impl TargetSpec {
    pub fn quad_mixture() -> Self {
        TargetSpec::QuadMixture {
            theta0: QUAD_TRUE_THETA.0,
            theta1: QUAD_TRUE_THETA.1,
            n: QUAD_DATA_SIZE,
            data_seed: QUAD_DATA_SEED,
        }
    }

    pub fn build(&self) -> Result<Box<dyn Potential>> {
        Ok(match *self {
            TargetSpec::Dunes { alpha, delta } => Box::new(Dunes::new(alpha, delta)?),
            TargetSpec::Cross { delta } => Box::new(Cross::new(delta)?),
            TargetSpec::QuadMixture { theta0, theta1, n, data_seed } => Box::new(QuadraticMixture::new(
                generate_quadratic_mixture_data(theta0, theta1, n, data_seed)?,
            )?),
            TargetSpec::EqualModes { n, spacing, width } => Box::new(EqualModes::new(n, spacing, width)?),
            TargetSpec::Gaussian { dim } => Box::new(StdGaussian::new(dim)?),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetSpec::Dunes { .. } | TargetSpec::EqualModes { .. } => 1,
            TargetSpec::Cross { .. } | TargetSpec::QuadMixture { .. } => 2,
            TargetSpec::Gaussian { dim } => *dim,
        }
    }

    /// Short directory-safe label.
    pub fn label(&self) -> String {
        match self {
            TargetSpec::Dunes { alpha, .. } => format!("alpha{alpha}"),
            TargetSpec::Cross { .. } => "cross".into(),
            TargetSpec::QuadMixture { .. } => "quad2d".into(),
            TargetSpec::EqualModes { n, .. } => format!("modes{n}"),
            TargetSpec::Gaussian { dim } => format!("gaussian{dim}"),
        }
    }

    /// Modes used for occupancy counting, with the matching window radius.
    pub fn mode_grid(&self) -> Option<(Vec<f64>, f64)> {
        match *self {
            TargetSpec::Dunes { alpha, .. } => {
                let spacing = std::f64::consts::PI / 2f64.powi(alpha);
                Some(((-12..=12).map(|k| f64::from(k) * spacing).collect(), spacing / 2.0))
            }
            TargetSpec::EqualModes { n, spacing, width } => {
                let modes = EqualModes::new(n, spacing, width).ok()?;
                Some((modes.means().to_vec(), spacing / 2.0))
            }
            _ => None,
        }
    }

    /// Histogram window shared by every coordinate.
    pub fn histogram_range(&self) -> (f64, f64) {
        match *self {
            TargetSpec::Dunes { alpha, .. } => {
                let half = 12.5 * std::f64::consts::PI / 2f64.powi(alpha);
                (-half, half)
            }
            TargetSpec::Cross { .. } => (-25.0, 25.0),
            TargetSpec::QuadMixture { .. } => (-2.5, 2.5),
            TargetSpec::EqualModes { n, spacing, width } => {
                let half = (n as f64 - 1.0) / 2.0 * spacing + spacing.max(4.0 * width);
                (-half, half)
            }
            TargetSpec::Gaussian { .. } => (-5.0, 5.0),
        }
    }

    /// Standard deviation of an equal-weight mode grid, used as a jump scale.
    pub fn natural_proposal_std(&self) -> Option<f64> {
        match *self {
            TargetSpec::EqualModes { n, spacing, width } => {
                let n = n as f64;
                Some((width * width + spacing * spacing * (n * n - 1.0) / 12.0).sqrt())
            }
            TargetSpec::Gaussian { .. } => Some(1.0),
            _ => None,
        }
    }
}

/// Canonical text used for cache keys and stream derivation.
impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSpec::Dunes { alpha, delta } => write!(f, "dunes(alpha={alpha},delta={delta:?})"),
            TargetSpec::Cross { delta } => write!(f, "cross(delta={delta:?})"),
            TargetSpec::QuadMixture { theta0, theta1, n, data_seed } => {
                write!(f, "quad_mixture(theta0={theta0:?},theta1={theta1:?},n={n},data_seed={data_seed})")
            }
            TargetSpec::EqualModes { n, spacing, width } => {
                write!(f, "equal_modes(n={n},spacing={spacing:?},width={width:?})")
            }
            TargetSpec::Gaussian { dim } => write!(f, "std_gaussian(dim={dim})"),
        }
    }
}
