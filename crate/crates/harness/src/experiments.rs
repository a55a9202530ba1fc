//! Experiment pipelines: reference chains, sampler runs, diagnostics and
//! artifacts, all driven by an [`ExperimentConfig`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use jdld::bnn::{accuracy, accuracy_distribution, sgd_pretrain, BnnPosterior, BnnPrior, Mlp, MlpParams, PretrainConfig};
use jdld::data_io::{load_libsvm, synthetic_fourclass, Dataset};
use jdld::diagnostics::{
    burn_in, count_occupied_modes, histogram, quantile_range, w1_curve, wasserstein1, EmpiricalMarginal, Histogram,
    W1Curve,
};
use jdld::potentials::gradient_check;
use jdld::rng::stream_rng;
use jdld::samplers::{run_chain, AcceptCount, ChainRecord, IndependenceProposal, SamplerConfig, SamplerKind};
use jdld::Potential;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cache::{stream_id, ReferenceCache};
use crate::config::{ExperimentConfig, ExperimentId};
use crate::output::{coord_names, write_chain_csv, write_histogram_csv, write_single_column, write_w1_csv};
use crate::targets::TargetSpec;

/// Quantiles bounding the reported support width.
pub const RANGE_QUANTILES: (f64, f64) = (0.01, 0.99);
/// Finite-difference step for gradient checks.
pub const GRADCHECK_STEP: f64 = 1e-5;
/// Occupied-mode threshold on the fraction of histogram mass.
pub const MODE_MASS_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence {
    pub sampler: &'static str,
    pub iteration: u64,
}

#[derive(Debug, Clone, Default)]
pub struct RunMetrics {
    pub n_samples: usize,
    pub accept_jump: AcceptCount,
    pub accept_langevin: AcceptCount,
    pub modes_occupied: Option<usize>,
    /// Per coordinate, over prefixes of the full chain.
    pub w1_curves: Vec<W1Curve>,
    /// Per coordinate, burned-in chain against the burned-in reference.
    pub w1_final: Vec<f64>,
    /// Per coordinate 1%–99% quantile width after burn-in.
    pub quantile_range: Vec<f64>,
    /// Test-set accuracy per posterior draw (network experiment only).
    pub accuracies: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    /// `<group>/<run>`, also the artifact directory relative to the output root.
    pub id: String,
    pub sampler: SamplerKind,
    pub target: String,
    pub epsilon: f64,
    pub lambda: f64,
    pub n_iters: u64,
    pub wall_clock: Duration,
    pub outcome: std::result::Result<RunMetrics, Divergence>,
}

impl RunReport {
    pub fn metrics(&self) -> Option<&RunMetrics> {
        self.outcome.as_ref().ok()
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceReport {
    pub group: String,
    pub target: String,
    pub n_iters: u64,
    pub burn_in: usize,
    pub accept_rate: f64,
    pub quantile_range: Vec<f64>,
    pub modes_occupied: Option<usize>,
    /// W1 between two independent reference chains (cross target only).
    pub baseline_w1: Option<Vec<f64>>,
    pub cached: bool,
}

#[derive(Debug, Clone)]
pub struct GradcheckReport {
    pub target: String,
    pub points: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct BnnSummary {
    pub dataset: String,
    pub n_train: usize,
    pub n_test: usize,
    pub pretrained_train_accuracy: f64,
    pub pretrained_test_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: ExperimentId,
    pub out_dir: PathBuf,
    pub references: Vec<ReferenceReport>,
    pub runs: Vec<RunReport>,
    pub gradcheck: Vec<GradcheckReport>,
    pub bnn: Option<BnnSummary>,
    /// Contents of `summary.txt`.
    pub summary: String,
}

impl ExperimentReport {
    pub fn run(&self, id: &str) -> Option<&RunReport> {
        self.runs.iter().find(|r| r.id == id)
    }

    pub fn reference(&self, group: &str) -> Option<&ReferenceReport> {
        self.references.iter().find(|r| r.group == group)
    }

    pub fn divergences(&self) -> impl Iterator<Item = (&RunReport, Divergence)> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().err().map(|d| (r, *d)))
    }
}

struct RunSpec {
    group: String,
    name: String,
    target: TargetSpec,
    sampler: SamplerKind,
    epsilon: f64,
    lambda: f64,
}

impl RunSpec {
    fn id(&self) -> String {
        format!("{}/{}", self.group, self.name)
    }
}

struct Reference {
    report: ReferenceReport,
    marginals: Vec<EmpiricalMarginal>,
}

/// Runs every chain the configuration asks for and writes artifacts under
/// `out_dir`. Diverging chains are recorded in the report, not raised.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, cache: &ReferenceCache) -> Result<ExperimentReport> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut report = ExperimentReport {
        experiment: cfg.experiment,
        out_dir: out_dir.to_path_buf(),
        references: vec![],
        runs: vec![],
        gradcheck: vec![],
        bnn: None,
        summary: String::new(),
    };
    match cfg.experiment {
        ExperimentId::Gradcheck => report.gradcheck = run_gradcheck(cfg, out_dir)?,
        ExperimentId::Bnn => {
            let (summary, runs) = run_bnn(cfg, out_dir)?;
            report.bnn = Some(summary);
            report.runs = runs;
        }
        _ => {
            let targets = targets_for(cfg);
            let references = targets
                .par_iter()
                .map(|t| build_reference(cfg, t, out_dir, cache))
                .collect::<Result<Vec<_>>>()?;
            let specs: Vec<RunSpec> = targets.iter().flat_map(|t| run_specs(cfg, t)).collect();
            report.runs = specs
                .par_iter()
                .map(|spec| {
                    let reference = &references[targets.iter().position(|t| *t == spec.target).expect("known target")];
                    execute_run(cfg, spec, reference, out_dir)
                })
                .collect::<Result<Vec<_>>>()?;
            report.references = references.into_iter().map(|r| r.report).collect();
        }
    }
    report.summary = render_summary(cfg, &report);
    let path = out_dir.join("summary.txt");
    fs::write(&path, &report.summary).with_context(|| format!("writing {}", path.display()))?;
    Ok(report)
}

fn targets_for(cfg: &ExperimentConfig) -> Vec<TargetSpec> {
    match cfg.experiment {
        ExperimentId::Dunes => cfg.alpha.iter().map(|&alpha| TargetSpec::Dunes { alpha, delta: cfg.delta }).collect(),
        ExperimentId::Quad2d => vec![TargetSpec::quad_mixture()],
        ExperimentId::Cross2d => vec![TargetSpec::Cross { delta: cfg.delta }],
        ExperimentId::Nmodes => cfg
            .n_modes
            .iter()
            .map(|&n| TargetSpec::EqualModes { n, spacing: cfg.spacing, width: cfg.width })
            .collect(),
        ExperimentId::Bnn | ExperimentId::Gradcheck => vec![],
    }
}

/// One entry per sampler; gradient samplers expand over the ε grid and JDLD
/// over ε × λ. Grid suffixes appear only when a grid has several values.
fn sampler_grid(cfg: &ExperimentConfig) -> Vec<(String, SamplerKind, f64, f64)> {
    let eps_tag = |e: f64| if cfg.epsilon.len() > 1 { format!("-eps{e:e}") } else { String::new() };
    let lam_tag = |l: f64| if cfg.lambda.len() > 1 { format!("-lam{l}") } else { String::new() };
    let (eps0, lam0) = (cfg.epsilon[0], cfg.lambda[0]);
    let mut out = vec![];
    for &kind in &cfg.samplers {
        match kind {
            SamplerKind::Mh | SamplerKind::Sgld => out.push((kind.to_string(), kind, eps0, lam0)),
            SamplerKind::Mala => {
                for &e in &cfg.epsilon {
                    out.push((format!("mala{}", eps_tag(e)), kind, e, lam0));
                }
            }
            SamplerKind::Jdld => {
                for &e in &cfg.epsilon {
                    for &l in &cfg.lambda {
                        out.push((format!("jdld{}{}", eps_tag(e), lam_tag(l)), kind, e, l));
                    }
                }
            }
        }
    }
    out
}

fn run_specs(cfg: &ExperimentConfig, target: &TargetSpec) -> Vec<RunSpec> {
    sampler_grid(cfg)
        .into_iter()
        .map(|(name, sampler, epsilon, lambda)| RunSpec {
            group: target.label(),
            name,
            target: target.clone(),
            sampler,
            epsilon,
            lambda,
        })
        .collect()
}

fn proposal_for(cfg: &ExperimentConfig, target: &TargetSpec) -> Result<IndependenceProposal> {
    let std = cfg.proposal_std.or(target.natural_proposal_std()).unwrap_or(1.0);
    Ok(IndependenceProposal::new(vec![cfg.proposal_mean; target.dim()], std)?)
}

fn sampler_config(
    cfg: &ExperimentConfig,
    kind: SamplerKind,
    epsilon: f64,
    lambda: f64,
    proposal: IndependenceProposal,
    stream: u64,
) -> Result<SamplerConfig> {
    let mut sc = SamplerConfig::new(epsilon, lambda, proposal, cfg.seed)?.with_stream(stream);
    if kind == SamplerKind::Sgld {
        sc = sc.with_schedule(cfg.schedule, cfg.batch_size);
    }
    Ok(sc)
}

/// Runs a chain, turning a non-finite state into a recorded divergence.
fn chain_or_divergence<P: Potential + ?Sized>(
    kind: SamplerKind,
    target: &P,
    init: &[f64],
    n_iters: u64,
    sc: &SamplerConfig,
) -> Result<std::result::Result<ChainRecord, Divergence>> {
    match run_chain(kind, target, init, n_iters, sc) {
        Ok(chain) => Ok(Ok(chain)),
        Err(jdld::Error::NonFinite { sampler, iteration }) => Ok(Err(Divergence { sampler, iteration })),
        Err(e) => Err(e.into()),
    }
}

fn burn_len(cfg: &ExperimentConfig, len: usize) -> usize {
    (len as f64 * cfg.burn_in_fraction) as usize
}

fn marginals(chain: &ChainRecord) -> Result<Vec<EmpiricalMarginal>> {
    (0..chain.dim()).map(|c| Ok(EmpiricalMarginal::from_chain(chain, c)?)).collect()
}

fn histograms(chain: &ChainRecord, target: &TargetSpec, bins: usize) -> Result<Vec<Histogram>> {
    let (lo, hi) = target.histogram_range();
    (0..chain.dim()).map(|c| Ok(histogram(&chain.coord(c), lo, hi, bins)?)).collect()
}

fn modes_occupied(h: &Histogram, target: &TargetSpec) -> Option<usize> {
    let (modes, radius) = target.mode_grid()?;
    Some(count_occupied_modes(&h.counts, &h.bin_centers(), &modes, radius, MODE_MASS_FRACTION))
}

fn mh_reference(
    cfg: &ExperimentConfig,
    target: &TargetSpec,
    role: &str,
    cache: &ReferenceCache,
) -> Result<(ChainRecord, bool)> {
    let proposal = proposal_for(cfg, target)?;
    let label = format!("{role}|{target}");
    let key = format!(
        "mh|{target}|proposal={:?},{:?}|seed={}|stream={label}|n={}",
        cfg.proposal_mean,
        proposal.std(),
        cfg.seed,
        cfg.reference_iters
    );
    cache.load_or_build(&key, || {
        let potential = target.build()?;
        let sc = sampler_config(cfg, SamplerKind::Mh, cfg.epsilon[0], 0.0, proposal, stream_id(&label))?;
        let init = vec![cfg.proposal_mean; target.dim()];
        Ok(run_chain(SamplerKind::Mh, &potential, &init, cfg.reference_iters, &sc)?)
    })
}

fn build_reference(cfg: &ExperimentConfig, target: &TargetSpec, out_dir: &Path, cache: &ReferenceCache) -> Result<Reference> {
    let (chain, cached) = mh_reference(cfg, target, "reference", cache)?;
    let burn = burn_len(cfg, chain.len());
    let burned = burn_in(&chain, burn)?;
    let marg = marginals(&burned)?;
    let baseline_w1 = if matches!(target, TargetSpec::Cross { .. }) {
        let (second, _) = mh_reference(cfg, target, "baseline", cache)?;
        let second = burn_in(&second, burn)?;
        let other = marginals(&second)?;
        Some(marg.iter().zip(&other).map(|(a, b)| wasserstein1(a, b)).collect::<jdld::Result<Vec<_>>>()?)
    } else {
        None
    };

    let dir = out_dir.join(target.label()).join("reference");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_chain_csv(&chain, cfg.max_csv_rows, &dir.join("chain.csv"))?;
    let hists = histograms(&chain, target, cfg.histogram_bins)?;
    write_histogram_csv(&coord_names(chain.dim()), &hists, &dir.join("histogram.csv"))?;

    let (lo, hi) = RANGE_QUANTILES;
    Ok(Reference {
        report: ReferenceReport {
            group: target.label(),
            target: target.to_string(),
            n_iters: cfg.reference_iters,
            burn_in: burn,
            accept_rate: chain.accept_jump.rate(),
            quantile_range: marg.iter().map(|m| quantile_range(m, lo, hi)).collect(),
            modes_occupied: modes_occupied(&hists[0], target),
            baseline_w1,
            cached,
        },
        marginals: marg,
    })
}

fn execute_run(cfg: &ExperimentConfig, spec: &RunSpec, reference: &Reference, out_dir: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let potential = spec.target.build()?;
    let proposal = proposal_for(cfg, &spec.target)?;
    let stream = stream_id(&format!("run|{}|{}", spec.target, spec.id()));
    let sc = sampler_config(cfg, spec.sampler, spec.epsilon, spec.lambda, proposal, stream)?;
    let init = vec![0.0; spec.target.dim()];
    let outcome = match chain_or_divergence(spec.sampler, &potential, &init, cfg.n_iters, &sc)? {
        Err(d) => Err(d),
        Ok(chain) => {
            let dir = out_dir.join(spec.id());
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            write_chain_csv(&chain, cfg.max_csv_rows, &dir.join("chain.csv"))?;
            let hists = histograms(&chain, &spec.target, cfg.histogram_bins)?;
            write_histogram_csv(&coord_names(chain.dim()), &hists, &dir.join("histogram.csv"))?;

            let checkpoints = cfg.checkpoints_for(chain.len());
            let w1_curves = reference
                .marginals
                .iter()
                .enumerate()
                .map(|(c, m)| Ok(w1_curve(&chain, m, c, &checkpoints)?))
                .collect::<Result<Vec<_>>>()?;
            write_w1_csv(&w1_curves, &dir.join("w1.csv"))?;

            let burned = burn_in(&chain, burn_len(cfg, chain.len()))?;
            let own = marginals(&burned)?;
            let (lo, hi) = RANGE_QUANTILES;
            Ok(RunMetrics {
                n_samples: chain.len(),
                accept_jump: chain.accept_jump,
                accept_langevin: chain.accept_langevin,
                modes_occupied: modes_occupied(&hists[0], &spec.target),
                w1_curves,
                w1_final: own
                    .iter()
                    .zip(&reference.marginals)
                    .map(|(a, b)| wasserstein1(a, b))
                    .collect::<jdld::Result<_>>()?,
                quantile_range: own.iter().map(|m| quantile_range(m, lo, hi)).collect(),
                accuracies: vec![],
            })
        }
    };
    Ok(RunReport {
        id: spec.id(),
        sampler: spec.sampler,
        target: spec.target.to_string(),
        epsilon: spec.epsilon,
        lambda: spec.lambda,
        n_iters: cfg.n_iters,
        wall_clock: start.elapsed(),
        outcome,
    })
}

/// Dataset for the network experiment, features scaled to `[-1, 1]²`.
pub fn bnn_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let raw = match &cfg.data_path {
        Some(path) => load_libsvm(path, Some(2))?,
        None => synthetic_fourclass(0),
    };
    Ok(raw.scaled_to_unit_box())
}

/// The split and pretraining use fixed seeds so `--seed` only moves the chains.
fn run_bnn(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(BnnSummary, Vec<RunReport>)> {
    let data = bnn_dataset(cfg)?;
    let (train, test) = data.stratified_split(cfg.train_fraction, 0)?;
    let mlp = Mlp::new(2)?;
    let pretrain = PretrainConfig {
        epochs: cfg.pretrain_epochs,
        learning_rate: cfg.pretrain_learning_rate,
        batch_size: cfg.pretrain_batch_size,
        ..PretrainConfig::default()
    };
    let center = sgd_pretrain(&mlp, &train, &pretrain)?;
    let summary = BnnSummary {
        dataset: data.name.clone(),
        n_train: train.len(),
        n_test: test.len(),
        pretrained_train_accuracy: accuracy(&mlp, &center.0, &train, 0.5)?,
        pretrained_test_accuracy: accuracy(&mlp, &center.0, &test, 0.5)?,
    };
    let posterior = BnnPosterior::new(mlp.clone(), train, BnnPrior::new(center, cfg.prior_std)?)?;
    let n_params = mlp.n_params();

    let runs = sampler_grid(cfg)
        .par_iter()
        .map(|(name, kind, eps, lam)| {
            let start = Instant::now();
            let id = format!("bnn/{name}");
            let proposal = IndependenceProposal::new(vec![cfg.proposal_mean; n_params], cfg.proposal_std.unwrap_or(1.0))?;
            let sc = sampler_config(cfg, *kind, *eps, *lam, proposal, stream_id(&format!("run|bnn|{id}")))?;
            let init = MlpParams(vec![0.0; n_params]);
            let outcome = match chain_or_divergence(*kind, &posterior, &init.0, cfg.n_iters, &sc)? {
                Err(d) => Err(d),
                Ok(chain) => {
                    let dir = out_dir.join(name);
                    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                    write_chain_csv(&chain, cfg.max_csv_rows, &dir.join("chain.csv"))?;
                    let burned = burn_in(&chain, burn_len(cfg, chain.len()))?;
                    let seed = cfg.seed.wrapping_add(stream_id(&format!("accuracy|{id}")));
                    let accuracies = accuracy_distribution(&mlp, &burned, &test, cfg.n_draws, seed)?;
                    write_single_column("accuracy", &accuracies, &dir.join("accuracy.csv"))?;
                    // one bin per attainable accuracy k / |test|
                    let half = 0.5 / test.len() as f64;
                    let h = histogram(&accuracies, -half, 1.0 + half, test.len() + 1)?;
                    write_histogram_csv(&["accuracy".to_owned()], &[h], &dir.join("histogram.csv"))?;
                    Ok(RunMetrics {
                        n_samples: chain.len(),
                        accept_jump: chain.accept_jump,
                        accept_langevin: chain.accept_langevin,
                        accuracies,
                        ..RunMetrics::default()
                    })
                }
            };
            Ok(RunReport {
                id,
                sampler: *kind,
                target: "bnn_posterior".into(),
                epsilon: *eps,
                lambda: *lam,
                n_iters: cfg.n_iters,
                wall_clock: start.elapsed(),
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((summary, runs))
}

fn run_gradcheck(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<GradcheckReport>> {
    let dunes = ExperimentConfig::registry(ExperimentId::Dunes);
    let cross = ExperimentConfig::registry(ExperimentId::Cross2d);
    let nmodes = ExperimentConfig::registry(ExperimentId::Nmodes);
    let mut specs: Vec<TargetSpec> = dunes
        .alpha
        .iter()
        .map(|&alpha| TargetSpec::Dunes { alpha, delta: dunes.delta })
        .collect();
    specs.push(TargetSpec::Cross { delta: cross.delta });
    specs.push(TargetSpec::quad_mixture());
    specs.extend(
        nmodes
            .n_modes
            .iter()
            .map(|&n| TargetSpec::EqualModes { n, spacing: nmodes.spacing, width: nmodes.width }),
    );
    specs.push(TargetSpec::Gaussian { dim: 1 });
    specs.push(TargetSpec::Gaussian { dim: 3 });

    let mut jobs: Vec<(String, Box<dyn Potential>, usize, f64)> = vec![];
    for s in &specs {
        jobs.push((s.label(), s.build()?, cfg.gradcheck_points, 5.0));
    }
    let mlp = Mlp::new(2)?;
    let prior = BnnPrior::new(MlpParams(vec![0.0; mlp.n_params()]), cfg.prior_std)?;
    let bnn = BnnPosterior::new(mlp, bnn_dataset(cfg)?, prior)?;
    jobs.push(("bnn".into(), Box::new(bnn), cfg.gradcheck_bnn_points, 0.5));

    jobs.par_iter()
        .map(|(label, potential, points, scale)| {
            let mut rng = stream_rng(cfg.seed, stream_id(&format!("gradcheck|{label}")));
            let errors: Vec<f64> = (0..*points)
                .map(|_| {
                    let x: Vec<f64> = if label == "bnn" {
                        (0..potential.dim()).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
                    } else {
                        (0..potential.dim()).map(|_| rng.random_range(-scale..*scale)).collect()
                    };
                    gradient_check(potential.as_ref(), &x, GRADCHECK_STEP)
                })
                .collect();
            write_single_column("rel_error", &errors, &out_dir.join(format!("{label}.csv")))?;
            Ok(GradcheckReport {
                target: label.clone(),
                points: *points,
                max_rel_error: errors.iter().copied().fold(0.0, f64::max),
            })
        })
        .collect()
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .enumerate()
        .map(|(c, v)| format!("x{c}={v:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn rate_or_dash(count: AcceptCount) -> String {
    if count.proposed == 0 {
        "-".into()
    } else {
        format!("{:.4}", count.rate())
    }
}

/// Plain-text summary. Contains no timings or cache state so that it is a
/// pure function of the configuration.
pub fn render_summary(cfg: &ExperimentConfig, report: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", cfg.experiment);
    let _ = writeln!(s, "\nsettings:");
    for (key, value, prov) in cfg.describe() {
        let _ = writeln!(s, "  {key} = {value}  [{prov}]");
    }
    if !report.references.is_empty() {
        let _ = writeln!(s, "\nreferences (metropolis-hastings):");
        for r in &report.references {
            let _ = write!(
                s,
                "  {}: {} states, burn-in {}, acceptance {:.4}, q01-q99 width {}",
                r.group,
                r.n_iters,
                r.burn_in,
                r.accept_rate,
                join_f64(&r.quantile_range)
            );
            if let Some(m) = r.modes_occupied {
                let _ = write!(s, ", modes occupied {m}");
            }
            if let Some(b) = &r.baseline_w1 {
                let _ = write!(s, ", independent-chain w1 {}", join_f64(b));
            }
            let _ = writeln!(s);
        }
    }
    if let Some(b) = &report.bnn {
        let _ = writeln!(
            s,
            "\ndata: {} ({} train / {} test), pretrained accuracy train {:.4} test {:.4}",
            b.dataset, b.n_train, b.n_test, b.pretrained_train_accuracy, b.pretrained_test_accuracy
        );
    }
    if !report.runs.is_empty() {
        let _ = writeln!(s, "\nruns:");
    }
    for r in &report.runs {
        match &r.outcome {
            Err(d) => {
                let _ = writeln!(
                    s,
                    "  {}: DIVERGED: {} chain produced a non-finite state at iteration {}",
                    r.id, d.sampler, d.iteration
                );
            }
            Ok(m) => {
                let _ = write!(
                    s,
                    "  {}: {} states, jump acceptance {}, langevin acceptance {}",
                    r.id,
                    m.n_samples,
                    rate_or_dash(m.accept_jump),
                    rate_or_dash(m.accept_langevin)
                );
                if let Some(k) = m.modes_occupied {
                    let _ = write!(s, ", modes occupied {k}");
                }
                if !m.w1_final.is_empty() {
                    let _ = write!(s, ", w1 {}", join_f64(&m.w1_final));
                }
                if !m.quantile_range.is_empty() {
                    let _ = write!(s, ", q01-q99 width {}", join_f64(&m.quantile_range));
                }
                if !m.accuracies.is_empty() {
                    let mean = m.accuracies.iter().sum::<f64>() / m.accuracies.len() as f64;
                    let _ = write!(s, ", mean test accuracy {mean:.4} over {} draws", m.accuracies.len());
                }
                let _ = writeln!(s);
            }
        }
    }
    if !report.gradcheck.is_empty() {
        let _ = writeln!(s, "\ngradient check (central differences, h = {GRADCHECK_STEP:e}):");
        for g in &report.gradcheck {
            let verdict = if g.max_rel_error < 1e-5 { "ok" } else { "FAIL" };
            let _ = writeln!(
                s,
                "  {}: {} points, max relative error {:.3e} {verdict}",
                g.target, g.points, g.max_rel_error
            );
        }
    }
    s
}
