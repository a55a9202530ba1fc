use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use jdld::data_io::read_csv;
use jdld::diagnostics::{wasserstein1, EmpiricalMarginal};
use jdld::samplers::{run_chain, IndependenceProposal, SamplerConfig, SamplerKind, StepSchedule};
use jdld_harness::cache::{stream_id, ReferenceCache};
use jdld_harness::config::{ExperimentConfig, ExperimentId, Overrides};
use jdld_harness::experiments::run_experiment;
use jdld_harness::output::write_chain_csv;
use jdld_harness::output_root;
use jdld_harness::targets::TargetSpec;

#[derive(Parser)]
#[command(name = "jdld", version, about = "Jump-diffusion Langevin sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single chain and write it as CSV
    Sample(SampleArgs),
    /// Re-run a registry experiment
    Reproduce {
        /// dunes, quad2d, cross2d, nmodes, bnn or gradcheck
        experiment: ExperimentId,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare analytic gradients with central differences over the catalog
    Gradcheck {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Per-coordinate W1 distance between two chain CSVs
    W1 { a: PathBuf, b: PathBuf },
    /// Pretrain, sample and score the Bayesian network on fourclass data
    Bnn {
        /// LIBSVM file; defaults to the built-in synthetic stand-in
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Divide every chain length by this factor
    #[arg(long, default_value_t = 10)]
    scale: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// TOML file overriding registry values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $JDLD_OUTPUT_ROOT/<experiment>)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// dunes, cross, quad2d, nmodes or gaussian
    #[arg(long)]
    target: String,
    /// mh, sgld, mala or jdld
    #[arg(long)]
    sampler: SamplerKind,
    #[arg(long, default_value_t = 100_000)]
    iters: u64,
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    #[arg(long, default_value_t = 100.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    proposal_mean: f64,
    #[arg(long)]
    proposal_std: Option<f64>,
    #[arg(long, default_value_t = 0)]
    alpha: i32,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 8)]
    modes: usize,
    #[arg(long, default_value_t = 6.0)]
    spacing: f64,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = StepSchedule::SGLD_DEFAULT.a)]
    schedule_a: f64,
    #[arg(long, default_value_t = StepSchedule::SGLD_DEFAULT.b)]
    schedule_b: f64,
    #[arg(long, default_value_t = StepSchedule::SGLD_DEFAULT.gamma)]
    schedule_gamma: f64,
    #[arg(long, default_value_t = 1)]
    batch_size: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (default: $JDLD_OUTPUT_ROOT/sample)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => sample(args),
        Command::Reproduce { experiment, run } => reproduce(experiment, run, None),
        Command::Gradcheck { run } => reproduce(ExperimentId::Gradcheck, run, None),
        Command::Bnn { data, run } => reproduce(ExperimentId::Bnn, run, data),
        Command::W1 { a, b } => w1(&a, &b),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn reproduce(experiment: ExperimentId, args: RunArgs, data: Option<PathBuf>) -> Result<ExitCode> {
    let mut cfg = ExperimentConfig::registry(experiment);
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply(Overrides::from_toml(&text).with_context(|| path.display().to_string())?)?;
    }
    if let Some(path) = data {
        cfg.apply(Overrides { data_path: Some(path), ..Overrides::default() })?;
    }
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    cfg = cfg.scaled(args.scale)?;
    cfg.validate()?;

    let root = output_root();
    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| root.join(experiment.as_str()));
    let report = run_experiment(&cfg, &out, &ReferenceCache::at(root.join("cache")))?;

    print!("{}", report.summary);
    println!("\nwall clock:");
    for r in &report.runs {
        println!("  {}: {:.2}s", r.id, r.wall_clock.as_secs_f64());
    }
    for r in report.references.iter().filter(|r| r.cached) {
        println!("  reference {} loaded from cache", r.group);
    }
    println!("artifacts in {}", out.display());

    let mut failed = false;
    for (run, d) in report.divergences() {
        eprintln!(
            "error: {} chain produced a non-finite state at iteration {} ({})",
            d.sampler, d.iteration, run.id
        );
        failed = true;
    }
    if let Some(g) = report.gradcheck.iter().find(|g| g.max_rel_error >= 1e-5) {
        eprintln!("error: gradient check failed for {} ({:e})", g.target, g.max_rel_error);
        failed = true;
    }
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn sample(a: SampleArgs) -> Result<ExitCode> {
    let target = match a.target.as_str() {
        "dunes" => TargetSpec::Dunes { alpha: a.alpha, delta: a.delta.unwrap_or(0.02) },
        "cross" => TargetSpec::Cross { delta: a.delta.unwrap_or(0.01) },
        "quad2d" => TargetSpec::quad_mixture(),
        "nmodes" => TargetSpec::EqualModes { n: a.modes, spacing: a.spacing, width: a.width },
        "gaussian" => TargetSpec::Gaussian { dim: a.dim },
        other => bail!("unknown target `{other}` (expected dunes, cross, quad2d, nmodes or gaussian)"),
    };
    let potential = target.build()?;
    let std = a.proposal_std.or(target.natural_proposal_std()).unwrap_or(1.0);
    let proposal = IndependenceProposal::new(vec![a.proposal_mean; target.dim()], std)?;
    let schedule = StepSchedule { a: a.schedule_a, b: a.schedule_b, gamma: a.schedule_gamma };
    let mut sc = SamplerConfig::new(a.epsilon, a.lambda, proposal, a.seed)?
        .with_stream(stream_id(&format!("sample|{target}|{}", a.sampler)));
    if a.sampler == SamplerKind::Sgld {
        sc = sc.with_schedule(schedule, a.batch_size);
    }
    let chain = run_chain(a.sampler, &potential, &vec![0.0; target.dim()], a.iters, &sc)?;

    let out = a.out.unwrap_or_else(|| output_root().join("sample"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join("chain.csv");
    write_chain_csv(&chain, a.max_rows, &path)?;
    println!(
        "{} on {target}: {} states, jump acceptance {:.4}, langevin acceptance {:.4}",
        a.sampler,
        chain.len(),
        chain.accept_jump.rate(),
        chain.accept_langevin.rate()
    );
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn w1(a: &Path, b: &Path) -> Result<ExitCode> {
    let (ha, ca) = read_csv(a)?;
    let (hb, cb) = read_csv(b)?;
    if ha != hb {
        bail!("column mismatch: {} has {ha:?}, {} has {hb:?}", a.display(), b.display());
    }
    for (c, name) in ha.iter().enumerate() {
        if name == "t" {
            continue;
        }
        let ma = EmpiricalMarginal::new(c, ca[c].clone())?;
        let mb = EmpiricalMarginal::new(c, cb[c].clone())?;
        println!("{name} {}", wasserstein1(&ma, &mb)?);
    }
    Ok(ExitCode::SUCCESS)
}
