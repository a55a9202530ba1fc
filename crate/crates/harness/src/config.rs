//! Experiment configuration: registry defaults, TOML overrides and scaling.
//!
//! Every value in a registry entry carries a [`Provenance`] tag so the summary
//! can say which numbers come from the original experiments and which are
//! choices made here.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use jdld::diagnostics::log_checkpoints;
use jdld::samplers::{SamplerKind, StepSchedule};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    Dunes,
    Quad2d,
    Cross2d,
    Nmodes,
    Bnn,
    Gradcheck,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Dunes,
        ExperimentId::Quad2d,
        ExperimentId::Cross2d,
        ExperimentId::Nmodes,
        ExperimentId::Bnn,
        ExperimentId::Gradcheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Dunes => "dunes",
            ExperimentId::Quad2d => "quad2d",
            ExperimentId::Cross2d => "cross2d",
            ExperimentId::Nmodes => "nmodes",
            ExperimentId::Bnn => "bnn",
            ExperimentId::Gradcheck => "gradcheck",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .with_context(|| {
                let names: Vec<&str> = ExperimentId::ALL.iter().map(|e| e.as_str()).collect();
                format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Where a configured value comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Stated in the original experiment description.
    Published(&'static str),
    /// Reconstructed from an evidently garbled original value.
    Inferred(&'static str),
    /// Chosen here; the original does not state it.
    Artifact(&'static str),
    /// Set by a config file or command-line flag.
    Override,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Published(note) => write!(f, "published: {note}"),
            Provenance::Inferred(note) => write!(f, "inferred: {note}"),
            Provenance::Artifact(note) => write!(f, "artifact default: {note}"),
            Provenance::Override => f.write_str("override"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub samplers: Vec<SamplerKind>,
    pub n_iters: u64,
    pub reference_iters: u64,
    pub seed: u64,
    /// Step sizes; gradient samplers run once per entry (JDLD per ε × λ pair).
    pub epsilon: Vec<f64>,
    pub lambda: Vec<f64>,
    pub proposal_mean: f64,
    /// `None` means "derive from the target" (mixture spread for N-mode targets).
    pub proposal_std: Option<f64>,
    pub schedule: StepSchedule,
    pub batch_size: usize,
    pub alpha: Vec<i32>,
    pub delta: f64,
    pub n_modes: Vec<usize>,
    pub spacing: f64,
    pub width: f64,
    pub burn_in_fraction: f64,
    /// Explicit W1 checkpoints; `None` gives `1000·2^j` plus 10 % of the length.
    pub checkpoints: Option<Vec<usize>>,
    pub histogram_bins: usize,
    pub max_csv_rows: usize,
    pub prior_std: f64,
    pub n_draws: usize,
    pub train_fraction: f64,
    pub pretrain_epochs: usize,
    pub pretrain_learning_rate: f64,
    pub pretrain_batch_size: usize,
    /// LIBSVM file for the classification experiment; `None` uses the bundled
    /// synthetic stand-in.
    pub data_path: Option<PathBuf>,
    pub gradcheck_points: usize,
    pub gradcheck_bnn_points: usize,
    /// Where artifacts go; `None` leaves the choice to the caller.
    pub output_dir: Option<PathBuf>,
    provenance: BTreeMap<&'static str, Provenance>,
}

/// Keys accepted in a `--config` file. Anything else is rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub samplers: Option<Vec<String>>,
    pub n_iters: Option<u64>,
    pub reference_iters: Option<u64>,
    pub seed: Option<u64>,
    pub epsilon: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub proposal_mean: Option<f64>,
    pub proposal_std: Option<f64>,
    pub schedule_a: Option<f64>,
    pub schedule_b: Option<f64>,
    pub schedule_gamma: Option<f64>,
    pub batch_size: Option<usize>,
    pub alpha: Option<Vec<i32>>,
    pub delta: Option<f64>,
    pub n_modes: Option<Vec<usize>>,
    pub spacing: Option<f64>,
    pub width: Option<f64>,
    pub burn_in_fraction: Option<f64>,
    pub checkpoints: Option<Vec<usize>>,
    pub histogram_bins: Option<usize>,
    pub max_csv_rows: Option<usize>,
    pub prior_std: Option<f64>,
    pub n_draws: Option<usize>,
    pub train_fraction: Option<f64>,
    pub pretrain_epochs: Option<usize>,
    pub pretrain_learning_rate: Option<f64>,
    pub pretrain_batch_size: Option<usize>,
    pub data_path: Option<PathBuf>,
    pub gradcheck_points: Option<usize>,
    pub gradcheck_bnn_points: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid config file")
    }
}

const BURN_IN: Provenance = Provenance::Artifact("10% of each chain; the original leaves the burn-in length open");

impl ExperimentConfig {
    /// Registry defaults at full (original) scale.
    pub fn registry(experiment: ExperimentId) -> Self {
        use Provenance::{Artifact, Inferred, Published};
        let mut c = Self {
            experiment,
            samplers: vec![],
            n_iters: 1,
            reference_iters: 1,
            seed: 0,
            epsilon: vec![],
            lambda: vec![],
            proposal_mean: 0.0,
            proposal_std: Some(1.0),
            schedule: StepSchedule::SGLD_DEFAULT,
            batch_size: 1,
            alpha: vec![],
            delta: 0.0,
            n_modes: vec![],
            spacing: 6.0,
            width: 1.0,
            burn_in_fraction: 0.1,
            checkpoints: None,
            histogram_bins: 1000,
            max_csv_rows: 1_000_000,
            prior_std: 0.5,
            n_draws: 30_000,
            train_fraction: 0.8,
            pretrain_epochs: 200,
            pretrain_learning_rate: 0.05,
            pretrain_batch_size: 16,
            data_path: None,
            gradcheck_points: 100,
            gradcheck_bnn_points: 20,
            output_dir: None,
            provenance: BTreeMap::new(),
        };
        let p = &mut c.provenance;
        p.insert("seed", Artifact("any fixed seed"));
        p.insert("burn_in_fraction", BURN_IN);
        p.insert("max_csv_rows", Artifact("chain CSVs are thinned to at most this many rows"));
        p.insert("histogram_bins", Artifact("plot resolution"));
        p.insert("proposal_mean", Artifact("proposals are centred at the origin"));
        match experiment {
            ExperimentId::Dunes => {
                c.samplers = vec![SamplerKind::Mh, SamplerKind::Mala, SamplerKind::Jdld];
                c.n_iters = 1_000_000;
                c.reference_iters = 1_000_000;
                c.alpha = vec![-2, -1, 0, 1];
                c.delta = 0.02;
                c.epsilon = vec![1e-4];
                c.lambda = vec![200.0];
                c.proposal_std = Some(5.0);
                p.insert("samplers", Published("MH, Langevin and jump-diffusion chains"));
                p.insert("n_iters", Published("1M iterations per method"));
                p.insert("reference_iters", Artifact("long MH chain stands in for the analytic target"));
                p.insert("alpha", Published("alpha in {-2,-1,0,1}"));
                p.insert("delta", Published("delta = 2e-2"));
                p.insert("epsilon", Artifact("step size not stated; small enough that MALA stays near its start"));
                p.insert("lambda", Artifact("not stated for this target; value from the quadratic-mixture grid"));
                p.insert("proposal_std", Artifact("N(0, 5^2) covers the wells that carry mass"));
            }
            ExperimentId::Quad2d => {
                c.samplers = vec![SamplerKind::Mh, SamplerKind::Sgld, SamplerKind::Jdld];
                c.n_iters = 1_000_000;
                c.reference_iters = 1_000_000;
                c.epsilon = vec![5e-5, 1e-5, 5e-6];
                c.lambda = vec![50.0, 100.0, 200.0, 1000.0];
                c.histogram_bins = 200;
                p.insert("samplers", Published("MH, SGLD and jump-diffusion chains"));
                p.insert("n_iters", Published("10000 sweeps, 1M iterations"));
                p.insert("reference_iters", Published("1M-iteration MH chain"));
                p.insert("epsilon", Published("epsilon in {5e-5, 1e-5, 5e-6}"));
                p.insert("lambda", Published("lambda in {50, 100, 200, 1000}"));
                p.insert("schedule", Published("a = 0.2, b = 231, gamma = 0.55"));
                p.insert("batch_size", Published("batch size of 1"));
                p.insert("proposal_std", Artifact("N(0, I) jump proposal"));
            }
            ExperimentId::Cross2d => {
                c.samplers = vec![SamplerKind::Jdld];
                c.n_iters = 50_000_000;
                c.reference_iters = 50_000_000;
                c.delta = 0.01;
                c.epsilon = vec![1e-2];
                c.lambda = vec![1.0];
                c.proposal_std = Some(8.0);
                p.insert("samplers", Published("jump-diffusion chain"));
                p.insert("n_iters", Published("last 50M states of a 50M+ chain"));
                p.insert("reference_iters", Published("50M-state MH chain"));
                p.insert("delta", Published("delta = 1e-2"));
                p.insert("epsilon", Artifact("step size not stated"));
                p.insert("lambda", Artifact("not stated; frequent jumps mix fastest on this target"));
                p.insert(
                    "proposal_std",
                    Artifact("N(0, 8^2) has heavier tails than the target's exp(-0.01 r^2) envelope"),
                );
            }
            ExperimentId::Nmodes => {
                c.samplers = vec![SamplerKind::Mala, SamplerKind::Jdld];
                c.n_iters = 10_000_000;
                c.reference_iters = 10_000_000;
                c.n_modes = vec![2, 8, 16, 32];
                c.epsilon = vec![0.5];
                c.lambda = vec![100.0];
                c.proposal_std = None;
                p.insert("samplers", Published("Langevin and jump-diffusion chains"));
                p.insert("n_iters", Published("10M states per chain"));
                p.insert("reference_iters", Published("10M-state MH chain"));
                p.insert("n_modes", Published("2, 8, 16, 32 modes"));
                p.insert("spacing", Artifact("equal Gaussian modes 6 widths apart"));
                p.insert("width", Artifact("unit-width modes"));
                p.insert("epsilon", Artifact("step size not stated"));
                p.insert("lambda", Artifact("not stated; value from the quadratic-mixture grid"));
                p.insert("proposal_std", Artifact("standard deviation of the mixture itself"));
            }
            ExperimentId::Bnn => {
                c.samplers = vec![SamplerKind::Mh, SamplerKind::Mala, SamplerKind::Jdld];
                c.n_iters = 3_000_000;
                c.epsilon = vec![3e-6];
                c.lambda = vec![500.0];
                c.max_csv_rows = 10_000;
                p.insert("samplers", Published("MH, Langevin and jump-diffusion chains"));
                p.insert("n_iters", Published("3e6 iterations"));
                p.insert("epsilon", Inferred("printed as 3*10^6, a likely typo for 3e-6"));
                p.insert("lambda", Published("lambda = 500"));
                p.insert("prior_std", Published("priors centred on the pretrained optimum with std 0.5"));
                p.insert("n_draws", Published("30k accuracy draws"));
                p.insert("train_fraction", Artifact("stratified 80/20 split"));
                p.insert("pretrain_epochs", Artifact("SGD pretraining length"));
                p.insert("pretrain_learning_rate", Artifact("SGD pretraining rate"));
                p.insert("pretrain_batch_size", Artifact("SGD pretraining batch"));
                p.insert("proposal_std", Artifact("standard Gaussian jump proposal"));
                p.insert("max_csv_rows", Artifact("137-column chains are thinned hard"));
                p.insert("data_path", Artifact("synthetic four-disc stand-in unless a LIBSVM file is given"));
            }
            ExperimentId::Gradcheck => {
                p.insert("gradcheck_points", Artifact("random points per catalog target"));
                p.insert("gradcheck_bnn_points", Artifact("random points for the network posterior"));
            }
        }
        c
    }

    pub fn provenance(&self, key: &str) -> Option<&Provenance> {
        self.provenance.get(key)
    }

    /// `(key, rendered value, provenance)` for every key this experiment uses.
    pub fn describe(&self) -> Vec<(&'static str, String, Provenance)> {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ");
        let mut rows: Vec<(&'static str, String)> = vec![("seed", self.seed.to_string())];
        let samplers = self.samplers.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ");
        let std = self
            .proposal_std
            .map_or_else(|| "from target".to_owned(), |s| s.to_string());
        match self.experiment {
            ExperimentId::Gradcheck => {
                rows.push(("gradcheck_points", self.gradcheck_points.to_string()));
                rows.push(("gradcheck_bnn_points", self.gradcheck_bnn_points.to_string()));
            }
            _ => {
                rows.push(("samplers", samplers));
                rows.push(("n_iters", self.n_iters.to_string()));
                if self.experiment != ExperimentId::Bnn {
                    rows.push(("reference_iters", self.reference_iters.to_string()));
                    rows.push(("histogram_bins", self.histogram_bins.to_string()));
                }
                rows.push(("epsilon", list(&self.epsilon)));
                rows.push(("lambda", list(&self.lambda)));
                rows.push(("proposal_mean", self.proposal_mean.to_string()));
                rows.push(("proposal_std", std));
                rows.push(("burn_in_fraction", self.burn_in_fraction.to_string()));
                rows.push(("max_csv_rows", self.max_csv_rows.to_string()));
            }
        }
        match self.experiment {
            ExperimentId::Dunes => {
                rows.push(("alpha", format!("{:?}", self.alpha)));
                rows.push(("delta", self.delta.to_string()));
            }
            ExperimentId::Quad2d => {
                let s = self.schedule;
                rows.push(("schedule", format!("a={} b={} gamma={}", s.a, s.b, s.gamma)));
                rows.push(("batch_size", self.batch_size.to_string()));
            }
            ExperimentId::Cross2d => rows.push(("delta", self.delta.to_string())),
            ExperimentId::Nmodes => {
                rows.push(("n_modes", format!("{:?}", self.n_modes)));
                rows.push(("spacing", self.spacing.to_string()));
                rows.push(("width", self.width.to_string()));
            }
            ExperimentId::Bnn => {
                rows.push(("prior_std", self.prior_std.to_string()));
                rows.push(("n_draws", self.n_draws.to_string()));
                rows.push(("train_fraction", self.train_fraction.to_string()));
                rows.push(("pretrain_epochs", self.pretrain_epochs.to_string()));
                rows.push(("pretrain_learning_rate", self.pretrain_learning_rate.to_string()));
                rows.push(("pretrain_batch_size", self.pretrain_batch_size.to_string()));
                let data = self
                    .data_path
                    .as_ref()
                    .map_or_else(|| "synthetic stand-in".to_owned(), |p| p.display().to_string());
                rows.push(("data_path", data));
            }
            ExperimentId::Gradcheck => {}
        }
        if let Some(cps) = &self.checkpoints {
            rows.push(("checkpoints", format!("{cps:?}")));
        }
        rows.into_iter()
            .map(|(k, v)| {
                let prov = self
                    .provenance
                    .get(k)
                    .cloned()
                    .unwrap_or(Provenance::Artifact("harness default"));
                (k, v, prov)
            })
            .collect()
    }

    /// W1 checkpoints for a chain of `len` states.
    pub fn checkpoints_for(&self, len: usize) -> Vec<usize> {
        if let Some(cps) = &self.checkpoints {
            return cps.iter().copied().filter(|&c| c <= len).collect();
        }
        let mut cps = log_checkpoints(len);
        if len >= 10 {
            cps.push(len / 10);
        }
        cps.sort_unstable();
        cps.dedup();
        cps
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.provenance.insert("seed", Provenance::Override);
        self
    }

    /// Divides every chain length (and explicit checkpoint) by `scale`.
    pub fn scaled(mut self, scale: u64) -> Result<Self> {
        if scale == 0 {
            bail!("scale must be at least 1");
        }
        self.n_iters = (self.n_iters / scale).max(1);
        self.reference_iters = (self.reference_iters / scale).max(1);
        if let Some(cps) = &mut self.checkpoints {
            let mut scaled: Vec<usize> = cps.iter().map(|c| (*c as u64 / scale) as usize).filter(|c| *c > 0).collect();
            scaled.dedup();
            *cps = scaled;
        }
        Ok(self)
    }

    pub fn apply(&mut self, o: Overrides) -> Result<()> {
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = o.$field {
                    self.$field = v;
                    self.provenance.insert(stringify!($field), Provenance::Override);
                }
            };
        }
        if let Some(names) = o.samplers {
            self.samplers = names
                .iter()
                .map(|s| s.parse::<SamplerKind>())
                .collect::<jdld::Result<_>>()
                .context("field `samplers`")?;
            self.provenance.insert("samplers", Provenance::Override);
        }
        set!(n_iters);
        set!(reference_iters);
        set!(seed);
        set!(epsilon);
        set!(lambda);
        set!(proposal_mean);
        if let Some(v) = o.proposal_std {
            self.proposal_std = Some(v);
            self.provenance.insert("proposal_std", Provenance::Override);
        }
        for (v, slot) in [
            (o.schedule_a, &mut self.schedule.a),
            (o.schedule_b, &mut self.schedule.b),
            (o.schedule_gamma, &mut self.schedule.gamma),
        ] {
            if let Some(v) = v {
                *slot = v;
                self.provenance.insert("schedule", Provenance::Override);
            }
        }
        set!(batch_size);
        set!(alpha);
        set!(delta);
        set!(n_modes);
        set!(spacing);
        set!(width);
        set!(burn_in_fraction);
        if let Some(v) = o.checkpoints {
            self.checkpoints = Some(v);
            self.provenance.insert("checkpoints", Provenance::Override);
        }
        set!(histogram_bins);
        set!(max_csv_rows);
        set!(prior_std);
        set!(n_draws);
        set!(train_fraction);
        set!(pretrain_epochs);
        set!(pretrain_learning_rate);
        set!(pretrain_batch_size);
        if let Some(v) = o.data_path {
            self.data_path = Some(v);
            self.provenance.insert("data_path", Provenance::Override);
        }
        set!(gradcheck_points);
        set!(gradcheck_bnn_points);
        if o.output_dir.is_some() {
            self.output_dir = o.output_dir;
        }
        self.validate()
    }

    /// Checks every constant; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if !(v > 0.0 && v.is_finite()) {
                bail!("field `{name}` must be positive and finite, got {v}");
            }
            Ok(())
        }
        let gradcheck = self.experiment == ExperimentId::Gradcheck;
        if !gradcheck {
            if self.samplers.is_empty() {
                bail!("field `samplers` must name at least one sampler");
            }
            if self.n_iters == 0 {
                bail!("field `n_iters` must be at least 1");
            }
            if self.reference_iters == 0 {
                bail!("field `reference_iters` must be at least 1");
            }
            if self.epsilon.is_empty() {
                bail!("field `epsilon` must list at least one step size");
            }
            for &e in &self.epsilon {
                positive("epsilon", e)?;
            }
            if self.lambda.is_empty() {
                bail!("field `lambda` must list at least one jump rate");
            }
            if let Some(l) = self.lambda.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
                bail!("field `lambda` must be non-negative, got {l}");
            }
            if !self.proposal_mean.is_finite() {
                bail!("field `proposal_mean` must be finite");
            }
            if let Some(s) = self.proposal_std {
                positive("proposal_std", s)?;
            }
            if !(0.0..1.0).contains(&self.burn_in_fraction) {
                bail!("field `burn_in_fraction` must lie in [0, 1), got {}", self.burn_in_fraction);
            }
            if self.max_csv_rows == 0 {
                bail!("field `max_csv_rows` must be at least 1");
            }
            if self.histogram_bins == 0 {
                bail!("field `histogram_bins` must be at least 1");
            }
            if let Some(cps) = &self.checkpoints {
                if cps.is_empty() || cps.windows(2).any(|w| w[0] >= w[1]) || cps[0] == 0 {
                    bail!("field `checkpoints` must be positive and strictly increasing");
                }
                if *cps.last().unwrap() as u64 > self.n_iters {
                    bail!("field `checkpoints` exceeds n_iters = {}", self.n_iters);
                }
            }
        }
        if self.samplers.contains(&SamplerKind::Sgld) {
            positive("schedule_a", self.schedule.a)?;
            if !self.schedule.gamma.is_finite() || self.schedule.gamma < 0.0 {
                bail!("field `schedule_gamma` must be non-negative");
            }
            positive("schedule_b", self.schedule.b)?;
            if self.batch_size == 0 {
                bail!("field `batch_size` must be at least 1");
            }
        }
        match self.experiment {
            ExperimentId::Dunes => {
                if self.alpha.is_empty() {
                    bail!("field `alpha` must list at least one value");
                }
                if let Some(a) = self.alpha.iter().find(|a| a.abs() > 30) {
                    bail!("field `alpha` out of range: {a}");
                }
                if !(self.delta >= 0.0 && self.delta.is_finite()) {
                    bail!("field `delta` must be non-negative");
                }
            }
            ExperimentId::Cross2d => {
                if !(self.delta >= 0.0 && self.delta.is_finite()) {
                    bail!("field `delta` must be non-negative");
                }
            }
            ExperimentId::Nmodes => {
                if self.n_modes.is_empty() || self.n_modes.contains(&0) {
                    bail!("field `n_modes` must list positive mode counts");
                }
                positive("spacing", self.spacing)?;
                positive("width", self.width)?;
            }
            ExperimentId::Bnn => {
                positive("prior_std", self.prior_std)?;
                positive("pretrain_learning_rate", self.pretrain_learning_rate)?;
                if self.n_draws == 0 {
                    bail!("field `n_draws` must be at least 1");
                }
                if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
                    bail!("field `train_fraction` must lie in (0, 1)");
                }
                if self.pretrain_batch_size == 0 {
                    bail!("field `pretrain_batch_size` must be at least 1");
                }
            }
            ExperimentId::Gradcheck => {
                if self.gradcheck_points == 0 || self.gradcheck_bnn_points == 0 {
                    bail!("field `gradcheck_points` must be at least 1");
                }
            }
            ExperimentId::Quad2d => {}
        }
        Ok(())
    }
}
