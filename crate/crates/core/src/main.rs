use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use oodbench::datamodel::{load_dataset, write_dataset, SplitTag};
use oodbench::infotheory::{
    analytic_overlap_risk, ln_analytic_overlap_risk, simulate_overlap_risk, verify_label_blindness,
    DiscreteJoint, IbConfig, DEFAULT_BETA, DEFAULT_MAX_CELLS,
};
use oodbench::metrics::MetricResult;
use oodbench::runner::{ingest_external_scores, run_benchmark, threads_from_env, write_scores, RunConfig};
use oodbench::scorers::{score_split, ScorerConfig, ScorerMethod, SplitData};
use oodbench::splitgen::{generate_split_series, make_cross_dataset_split};
use oodbench::synthgen::{blind_projection, generate_two_factor_split, Keep, TwoFactorSpec};

#[derive(Parser)]
#[command(name = "oodbench", version, about = "OOD detection benchmarks and label-blindness checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded adjacent splits and print them as JSON.
    Split {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        ood_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        n_repeats: usize,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate two-factor synthetic train/test datasets.
    Synth {
        /// JSON spec; omitted fields take defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output prefix; writes `<out>_train` and `<out>_test` datasets.
        #[arg(long)]
        out: String,
        #[arg(long, value_enum, default_value_t = KeepArg::Both)]
        keep: KeepArg,
    },
    /// Score one split with one scorer and write the score files.
    Score {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Separate OOD dataset; switches to a cross-dataset split.
        #[arg(long)]
        ood_test: Option<PathBuf>,
        #[arg(long, value_enum)]
        scorer: MethodArg,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        normalize: Option<bool>,
        #[arg(long)]
        shrinkage: Option<f64>,
        #[arg(long, default_value_t = 0.25)]
        ood_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory receiving `id_scores.txt` and `ood_scores.txt`.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run a benchmark configuration and write the report.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check label blindness on a small discrete joint.
    VerifyTheory {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Estimate the chance that a fresh label is missing from the ID draws.
    SimulateOverlap {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        n_id: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated class probabilities; uniform when omitted.
        #[arg(long, value_delimiter = ',')]
        pmf: Option<Vec<f64>>,
    },
    /// Compute metrics from external score files (one float per line).
    IngestScores {
        #[arg(long)]
        id: PathBuf,
        #[arg(long)]
        ood: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KeepArg {
    Factor1Block,
    Factor2Block,
    Both,
}

impl From<KeepArg> for Keep {
    fn from(k: KeepArg) -> Self {
        match k {
            KeepArg::Factor1Block => Keep::Factor1Block,
            KeepArg::Factor2Block => Keep::Factor2Block,
            KeepArg::Both => Keep::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Msp,
    Mahalanobis,
    Knn,
}

impl From<MethodArg> for ScorerMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Msp => ScorerMethod::Msp,
            MethodArg::Mahalanobis => ScorerMethod::Mahalanobis,
            MethodArg::Knn => ScorerMethod::Knn,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TheorySpec {
    pmf: Vec<Vec<f64>>,
    f1: Vec<usize>,
    f2: Vec<usize>,
    #[serde(alias = "Y_in")]
    y_in: Vec<usize>,
    #[serde(default = "default_beta")]
    beta: f64,
    #[serde(default = "default_max_cells")]
    max_cells: usize,
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn default_max_cells() -> usize {
    DEFAULT_MAX_CELLS
}

#[derive(Serialize)]
struct OverlapOutput {
    classes: usize,
    n_id: usize,
    trials: u64,
    seed: u64,
    estimate: f64,
    std_error: f64,
    analytic: f64,
    ln_analytic: f64,
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Split {
            train,
            test,
            ood_fraction,
            seed,
            n_repeats,
            out,
        } => {
            let train = load_dataset(&train).with_context(|| format!("loading {}", train.display()))?;
            let test = load_dataset(&test).with_context(|| format!("loading {}", test.display()))?;
            let splits = generate_split_series(&train, &test, ood_fraction, seed, n_repeats)?;
            match out {
                Some(p) => write_json(&p, &splits)?,
                None => print_json(&splits)?,
            }
        }
        Command::Synth { spec, out, keep } => {
            let spec: TwoFactorSpec = match spec {
                Some(p) => {
                    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
                }
                None => TwoFactorSpec::default(),
            };
            for (tag, name) in [(SplitTag::Train, "train"), (SplitTag::Test, "test")] {
                let sample = generate_two_factor_split(&spec, tag)?;
                let projected = blind_projection(&sample.dataset, keep.into())?;
                let prefix = format!("{out}_{name}");
                let header = write_dataset(&projected, &prefix)?;
                let mut aux = String::from("index,factor1\n");
                for (i, k) in sample.factor1_labels.iter().enumerate() {
                    aux.push_str(&format!("{i},{k}\n"));
                }
                let aux_path = format!("{prefix}.factor1.csv");
                fs::write(&aux_path, aux).with_context(|| format!("writing {aux_path}"))?;
                eprintln!("wrote {prefix} ({} rows, dim {})", header.n_samples, header.dim);
            }
        }
        Command::Score {
            train,
            test,
            ood_test,
            scorer,
            k,
            normalize,
            shrinkage,
            ood_fraction,
            seed,
            out_dir,
        } => {
            let train = load_dataset(&train).with_context(|| format!("loading {}", train.display()))?;
            let test = load_dataset(&test).with_context(|| format!("loading {}", test.display()))?;
            let ood = ood_test
                .map(|p| load_dataset(&p).with_context(|| format!("loading {}", p.display())))
                .transpose()?;
            let split = match &ood {
                Some(o) => make_cross_dataset_split(&train, &test, o)?,
                None => generate_split_series(&train, &test, ood_fraction, seed, 1)?.remove(0),
            };
            let config = ScorerConfig {
                k,
                normalize,
                shrinkage,
                ..ScorerConfig::new(scorer.into())
            };
            let data = SplitData {
                train: &train,
                test: &test,
                ood_test: ood.as_ref(),
            };
            let scores = score_split(&split, &config, data)?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            write_scores(&out_dir.join("id_scores.txt"), &scores.id_scores)?;
            write_scores(&out_dir.join("ood_scores.txt"), &scores.ood_scores)?;
            write_json(&out_dir.join("split.json"), &split)?;
            print_json(&MetricResult::compute(&scores.id_scores, &scores.ood_scores)?)?;
        }
        Command::Eval { config, out_dir } => {
            let cfg = RunConfig::from_file(&config)?;
            let report = run_benchmark(&cfg)?;
            let dir = out_dir
                .or_else(|| cfg.output_dir.clone())
                .context("no output directory: pass --out-dir or set output_dir in the config")?;
            let (json, _) = report.write(&dir)?;
            print!("{}", report.to_table_csv()?);
            eprintln!("wrote {}", json.display());
        }
        Command::VerifyTheory { spec } => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec: TheorySpec =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", spec.display()))?;
            let joint = DiscreteJoint::new(spec.pmf, spec.f1, spec.f2)?;
            let config = IbConfig {
                beta: spec.beta,
                max_code_size: None,
                max_cells: spec.max_cells,
            };
            let report = verify_label_blindness(&joint, &spec.y_in, &config)?;
            print_json(&report)?;
            if !report.consistent {
                eprintln!("independence holds but a minimizer carries information about x2 or y2");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::SimulateOverlap {
            classes,
            n_id,
            trials,
            seed,
            pmf,
        } => {
            let pmf = match pmf {
                Some(p) => {
                    if p.len() != classes {
                        bail!("--pmf has {} entries but --classes is {classes}", p.len());
                    }
                    p
                }
                None => vec![1.0 / classes as f64; classes],
            };
            let est = simulate_overlap_risk(&pmf, n_id, trials, seed)?;
            print_json(&OverlapOutput {
                classes,
                n_id,
                trials,
                seed,
                estimate: est.estimate,
                std_error: est.std_error,
                analytic: analytic_overlap_risk(&pmf, n_id)?,
                ln_analytic: ln_analytic_overlap_risk(&pmf, n_id)?,
            })?;
        }
        Command::IngestScores { id, ood } => {
            print_json(&ingest_external_scores(&id, &ood)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    if let Some(n) = threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    run(cli)
}
