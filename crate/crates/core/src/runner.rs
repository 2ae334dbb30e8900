//! Run configuration, end-to-end evaluation and report output.

use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datamodel::{load_dataset, LabeledDataset};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, AggregateResult, MetricResult};
use crate::scorers::{score_split, ResolvedScorer, ScorerConfig, ScorerMethod, SplitData};
use crate::splitgen::{generate_split_series, make_cross_dataset_split, BenchmarkSplit, SplitKind};
use crate::synthgen::{blind_projection, generate_train_test, Keep, TwoFactorSpec};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "table.csv";
pub const THREADS_ENV: &str = "OODBENCH_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Datamodel files (sidecar prefix, `.oodb.json` header or feature CSV).
    Files {
        train: PathBuf,
        test: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ood_test: Option<PathBuf>,
    },
    /// Two-factor synthetic data generated in memory.
    Synthetic {
        #[serde(default)]
        spec: TwoFactorSpec,
        #[serde(default)]
        keep: Keep,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub kind: SplitKind,
    #[serde(default = "default_ood_fraction")]
    pub ood_fraction: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_repeats")]
    pub n_repeats: usize,
}

fn default_ood_fraction() -> f64 {
    0.25
}

fn default_repeats() -> usize {
    3
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            kind: SplitKind::Adjacent,
            ood_fraction: default_ood_fraction(),
            base_seed: 0,
            n_repeats: default_repeats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub datasets: DatasetSource,
    #[serde(default)]
    pub split: SplitSpec,
    pub scorers: Vec<ScorerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a config; relative paths inside it resolve against the file's
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DatasetSource::Files { train, test, ood_test } = &mut config.datasets {
            resolve(train);
            resolve(test);
            if let Some(o) = ood_test {
                resolve(o);
            }
        }
        if let Some(out) = &mut config.output_dir {
            resolve(out);
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.scorers.is_empty() {
            return Err(Error::Config("at least one scorer is required".into()));
        }
        let mut labels: Vec<String> = self.scorers.iter().map(ScorerConfig::label).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!(
                "scorer name {:?} appears twice; set distinct `name` fields",
                w[0]
            )));
        }
        if self.split.n_repeats == 0 {
            return Err(Error::Config("n_repeats must be at least 1".into()));
        }
        match (&self.datasets, self.split.kind) {
            (DatasetSource::Files { train, test, ood_test }, kind) => {
                for p in [Some(train), Some(test), ood_test.as_ref()].into_iter().flatten() {
                    if !dataset_exists(p) {
                        return Err(Error::Config(format!("dataset {} does not exist", p.display())));
                    }
                }
                if kind == SplitKind::CrossDataset && ood_test.is_none() {
                    return Err(Error::Config("cross_dataset split requires datasets.ood_test".into()));
                }
            }
            (DatasetSource::Synthetic { spec, .. }, kind) => {
                if kind == SplitKind::CrossDataset {
                    return Err(Error::Config("synthetic data supports adjacent splits only".into()));
                }
                spec.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        if self.split.kind == SplitKind::CrossDataset && self.split.n_repeats != 1 {
            return Err(Error::Config(
                "cross_dataset splits are deterministic; set n_repeats to 1".into(),
            ));
        }
        Ok(())
    }

    /// FNV-1a over the config's canonical JSON encoding.
    pub fn hash(&self) -> Result<String> {
        let mut h = FnvHasher::default();
        h.write(&serde_json::to_vec(self)?);
        Ok(format!("{:016x}", h.finish()))
    }
}

fn dataset_exists(p: &Path) -> bool {
    if p.exists() {
        return true;
    }
    let mut header = p.as_os_str().to_owned();
    header.push(crate::datamodel::HEADER_SUFFIX);
    Path::new(&header).exists()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub role: String,
    pub n_samples: usize,
    pub dim: usize,
    pub n_classes: usize,
    pub checksum: String,
}

impl DatasetFingerprint {
    fn of(role: &str, ds: &LabeledDataset) -> Self {
        Self {
            role: role.into(),
            n_samples: ds.n_samples(),
            dim: ds.dim(),
            n_classes: ds.n_classes(),
            checksum: format!("{:016x}", ds.checksum()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub library_version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub datasets: Vec<DatasetFingerprint>,
    pub seeds: Vec<u64>,
    pub scorer_settings: Vec<ScorerSettings>,
    pub conventions: Conventions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerSettings {
    pub scorer: String,
    /// Settings in effect for each seed, in seed order.
    pub resolved: Vec<ResolvedScorer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub score_orientation: String,
    pub auroc: String,
    pub fpr95: String,
    pub std: String,
    pub training_rows: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            score_orientation: "higher score = more OOD".into(),
            auroc: "OOD positive; ties count 1/2".into(),
            fpr95: "ID positive; threshold = smallest ID score t with at least 95% of ID scores <= t; FPR = fraction of OOD scores <= t".into(),
            std: "sample standard deviation (n - 1), 0 for a single seed".into(),
            training_rows: "scorers fit on training rows of ID classes only".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub seed: u64,
    pub id_classes: Vec<usize>,
    pub ood_classes: Vec<usize>,
    pub n_train_id: usize,
    pub n_test_id: usize,
    pub n_test_ood: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub scorer: String,
    pub method: ScorerMethod,
    pub seed: u64,
    pub metrics: MetricResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerAggregate {
    pub scorer: String,
    pub aggregate: AggregateResult,
    pub auroc_display: String,
    pub fpr95_display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub splits: Vec<SplitSummary>,
    /// Scorer-major, seed-minor, both in configuration order.
    pub cells: Vec<CellResult>,
    pub aggregates: Vec<ScorerAggregate>,
}

struct Loaded {
    train: LabeledDataset,
    test: LabeledDataset,
    ood_test: Option<LabeledDataset>,
}

fn load(source: &DatasetSource) -> Result<Loaded> {
    match source {
        DatasetSource::Files { train, test, ood_test } => Ok(Loaded {
            train: load_dataset(train)?,
            test: load_dataset(test)?,
            ood_test: ood_test.as_ref().map(load_dataset).transpose()?,
        }),
        DatasetSource::Synthetic { spec, keep } => {
            let (train, test) = generate_train_test(spec)?;
            Ok(Loaded {
                train: blind_projection(&train.dataset, *keep)?,
                test: blind_projection(&test.dataset, *keep)?,
                ood_test: None,
            })
        }
    }
}

/// Runs every (scorer, seed) cell of `config` and assembles the report.
///
/// The first failing cell aborts the run; no partial report is produced.
pub fn run_benchmark(config: &RunConfig) -> Result<EvalReport> {
    config.validate()?;
    let data = load(&config.datasets)?;
    let splits: Vec<BenchmarkSplit> = match config.split.kind {
        SplitKind::Adjacent => generate_split_series(
            &data.train,
            &data.test,
            config.split.ood_fraction,
            config.split.base_seed,
            config.split.n_repeats,
        )?,
        SplitKind::CrossDataset => {
            let ood = data.ood_test.as_ref().expect("checked by validate");
            let mut s = make_cross_dataset_split(&data.train, &data.test, ood)?;
            s.seed = config.split.base_seed;
            vec![s]
        }
    };
    let split_data = SplitData {
        train: &data.train,
        test: &data.test,
        ood_test: data.ood_test.as_ref(),
    };

    let jobs: Vec<(&ScorerConfig, &BenchmarkSplit)> = config
        .scorers
        .iter()
        .flat_map(|sc| splits.iter().map(move |sp| (sc, sp)))
        .collect();
    let outcomes: Vec<Result<(CellResult, ResolvedScorer)>> = jobs
        .par_iter()
        .map(|&(sc, sp)| {
            let cell_err = |e: Error| Error::Cell {
                scorer: sc.label(),
                seed: sp.seed,
                source: Box::new(e),
            };
            let scores = score_split(sp, sc, split_data).map_err(cell_err)?;
            let metrics = MetricResult::compute(&scores.id_scores, &scores.ood_scores).map_err(cell_err)?;
            Ok((
                CellResult {
                    scorer: sc.label(),
                    method: sc.method,
                    seed: sp.seed,
                    metrics,
                },
                scores.resolved,
            ))
        })
        .collect();
    let outcomes: Vec<(CellResult, ResolvedScorer)> = outcomes.into_iter().collect::<Result<_>>()?;

    let n_seeds = splits.len();
    let mut aggregates = Vec::with_capacity(config.scorers.len());
    let mut scorer_settings = Vec::with_capacity(config.scorers.len());
    for (sc, chunk) in config.scorers.iter().zip(outcomes.chunks(n_seeds)) {
        let results: Vec<MetricResult> = chunk.iter().map(|(c, _)| c.metrics).collect();
        let agg = aggregate(&results)?;
        aggregates.push(ScorerAggregate {
            scorer: sc.label(),
            auroc_display: agg.auroc_cell(),
            fpr95_display: agg.fpr95_cell(),
            aggregate: agg,
        });
        scorer_settings.push(ScorerSettings {
            scorer: sc.label(),
            resolved: chunk.iter().map(|(_, r)| r.clone()).collect(),
        });
    }

    let mut datasets = vec![
        DatasetFingerprint::of("train", &data.train),
        DatasetFingerprint::of("test", &data.test),
    ];
    if let Some(o) = &data.ood_test {
        datasets.push(DatasetFingerprint::of("ood_test", o));
    }
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        provenance: Provenance {
            library_version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config.hash()?,
            config: config.clone(),
            datasets,
            seeds: splits.iter().map(|s| s.seed).collect(),
            scorer_settings,
            conventions: Conventions::default(),
        },
        splits: splits
            .iter()
            .map(|s| SplitSummary {
                seed: s.seed,
                id_classes: s.id_classes.clone(),
                ood_classes: s.ood_classes.clone(),
                n_train_id: s.train_id_idx.len(),
                n_test_id: s.test_id_idx.len(),
                n_test_ood: s.test_ood_idx.len(),
            })
            .collect(),
        cells: outcomes.into_iter().map(|(c, _)| c).collect(),
        aggregates,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per scorer: `scorer,auroc,fpr95,n_seeds` with `mean±std`
    /// cells in percentage points.
    pub fn to_table_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv encoding failed: {e}"));
        w.write_record(["scorer", "auroc", "fpr95", "n_seeds"]).map_err(csv_err)?;
        for a in &self.aggregates {
            w.write_record([
                a.scorer.as_str(),
                a.auroc_display.as_str(),
                a.fpr95_display.as_str(),
                &a.aggregate.n_seeds.to_string(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidArgument(format!("csv encoding failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv input was utf-8"))
    }

    /// Writes `report.json` and `table.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let report = dir.join(REPORT_FILE);
        let table = dir.join(TABLE_FILE);
        fs::write(&report, self.to_json()?).map_err(|e| Error::io(&report, e))?;
        fs::write(&table, self.to_table_csv()?).map_err(|e| Error::io(&table, e))?;
        Ok((report, table))
    }
}

/// Parses one finite float per line. Blank lines are skipped; line numbers
/// in errors are 1-based.
pub fn parse_scores(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|e| Error::Parse {
            line: i + 1,
            col: 1,
            reason: format!("{line:?}: {e}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                col: 1,
                reason: format!("non-finite score {line:?}"),
            });
        }
        out.push(v);
    }
    Ok(out)
}

pub fn read_scores(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores(&text).map_err(|e| match e {
        Error::Parse { line, col, reason } => Error::Parse {
            line,
            col,
            reason: format!("{}: {reason}", path.display()),
        },
        other => other,
    })
}

/// Writes one score per line using the shortest round-trip representation.
pub fn write_scores(path: &Path, scores: &[f64]) -> Result<()> {
    let mut text = String::with_capacity(scores.len() * 20);
    for s in scores {
        text.push_str(&format!("{s}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Metrics for externally produced ID and OOD score files.
pub fn ingest_external_scores(id_scores_file: &Path, ood_scores_file: &Path) -> Result<MetricResult> {
    let id = read_scores(id_scores_file)?;
    let ood = read_scores(ood_scores_file)?;
    MetricResult::compute(&id, &ood)
}

/// Thread count requested through `OODBENCH_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{THREADS_ENV}: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth_config(scorers: Vec<ScorerConfig>) -> RunConfig {
        RunConfig {
            schema_version: 1,
            datasets: DatasetSource::Synthetic {
                spec: TwoFactorSpec {
                    n_samples: 300,
                    d1: 4,
                    d2: 4,
                    ..TwoFactorSpec::default()
                },
                keep: Keep::Factor2Block,
            },
            split: SplitSpec::default(),
            scorers,
            output_dir: None,
        }
    }

    #[test]
    fn score_parsing() {
        assert_eq!(parse_scores("1\n2.5\n\n-3e-2\n").unwrap(), vec![1.0, 2.5, -0.03]);
        match parse_scores("1\n2\nabc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_scores("1\nNaN\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn config_validation() {
        let ok = synth_config(vec![ScorerConfig::new(ScorerMethod::Knn)]);
        ok.validate().unwrap();
        let empty = synth_config(vec![]);
        assert!(matches!(empty.validate(), Err(Error::Config(_))));
        let dup = synth_config(vec![ScorerConfig::new(ScorerMethod::Knn); 2]);
        assert!(dup.validate().is_err());
        let mut zero = ok.clone();
        zero.split.n_repeats = 0;
        assert!(zero.validate().is_err());
        let mut version = ok.clone();
        version.schema_version = 2;
        assert!(version.validate().is_err());
        let missing = RunConfig {
            datasets: DatasetSource::Files {
                train: "/nonexistent/train".into(),
                test: "/nonexistent/test".into(),
                ood_test: None,
            },
            ..ok
        };
        assert!(missing.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{
            "schema_version": 1,
            "datasets": {"source": "synthetic", "spec": {"seed": 4}, "keep": "factor1_block"},
            "split": {"kind": "adjacent", "n_repeats": 2},
            "scorers": [{"method": "knn", "k": 5}, {"method": "mahalanobis"}]
        }"#;
        let c: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.split.ood_fraction, 0.25);
        let again: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash().unwrap(), again.hash().unwrap());
        assert!(serde_json::from_str::<RunConfig>(&text.replace("\"k\"", "\"kk\"")).is_err());
    }

    #[test]
    fn report_shape() {
        let cfg = synth_config(vec![
            ScorerConfig::new(ScorerMethod::Knn),
            ScorerConfig::new(ScorerMethod::Mahalanobis),
        ]);
        let r = run_benchmark(&cfg).unwrap();
        assert_eq!(r.cells.len(), 6);
        assert_eq!(r.aggregates.len(), 2);
        assert_eq!(r.provenance.seeds, vec![0, 1, 2]);
        assert_eq!(r.cells[3].scorer, "mahalanobis");
        assert_eq!(r.cells[3].seed, 0);
        let table = r.to_table_csv().unwrap();
        assert!(table.starts_with("scorer,auroc,fpr95,n_seeds\n"));
        assert_eq!(table.lines().count(), 3);
    }

    #[test]
    fn singular_mahalanobis_names_the_scorer() {
        let mut cfg = synth_config(vec![
            ScorerConfig::new(ScorerMethod::Msp),
            ScorerConfig {
                shrinkage: Some(0.0),
                name: Some("maha-raw".into()),
                ..ScorerConfig::new(ScorerMethod::Mahalanobis)
            },
        ]);
        if let DatasetSource::Synthetic { spec, .. } = &mut cfg.datasets {
            spec.n_samples = 8;
            spec.d2 = 12;
        }
        match run_benchmark(&cfg) {
            Err(Error::Cell { scorer, source, .. }) => {
                assert_eq!(scorer, "maha-raw");
                assert!(matches!(*source, Error::SingularCovariance { .. }));
            }
            other => panic!("expected cell error, got {other:?}"),
        }
    }
}
