//! TOML task configuration with a strict schema: unknown keys are
//! rejected everywhere, options are validated against the chosen task,
//! and the result is a fully resolved run description.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sparsify::EncoderSpec;
use crate::tasks::kmeans::KMeansConfig;
use crate::tasks::logreg::LogRegConfig;
use crate::tasks::power_iteration::PowerIterationConfig;
use crate::tasks::quadratic::QuadraticConfig;
use crate::tasks::TaskDecoder;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    task: String,
    nodes: Option<usize>,
    k: usize,
    rounds: usize,
    seed: Option<u64>,
    encoder: Option<RawEncoder>,
    decoder: Option<RawDecoder>,
    data: Option<RawData>,
    split: Option<RawSplit>,
    params: Option<RawParams>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEncoder {
    kind: String,
    induced_top_fraction: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDecoder {
    kind: String,
    memory: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    source: String,
    rows: Option<usize>,
    features: Option<usize>,
    components: Option<usize>,
    separation: Option<f64>,
    images: Option<PathBuf>,
    labels: Option<PathBuf>,
    path: Option<PathBuf>,
    holdout_fraction: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplit {
    kind: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    eta: Option<f64>,
    batch: Option<usize>,
    classes: Option<usize>,
    clusters: Option<usize>,
    dim: Option<usize>,
    normalize_node_updates: Option<bool>,
}

/// Where the task's rows come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Mixture {
        rows: usize,
        features: usize,
        components: usize,
        separation: f64,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
    },
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Iid,
    NonIid,
}

/// A validated run description ready for execution.
#[derive(Debug, Clone)]
pub enum ResolvedTask {
    PowerIteration {
        cfg: PowerIterationConfig,
        nodes: usize,
        data: DataSpec,
        split: SplitKind,
    },
    KMeans {
        cfg: KMeansConfig,
        nodes: usize,
        data: DataSpec,
        split: SplitKind,
    },
    LogReg {
        cfg: LogRegConfig,
        nodes: usize,
        data: DataSpec,
        split: SplitKind,
        holdout_fraction: Option<f64>,
    },
    Quadratic {
        cfg: QuadraticConfig,
    },
}

impl ResolvedTask {
    pub fn seed(&self) -> u64 {
        match self {
            ResolvedTask::PowerIteration { cfg, .. } => cfg.seed,
            ResolvedTask::KMeans { cfg, .. } => cfg.seed,
            ResolvedTask::LogReg { cfg, .. } => cfg.seed,
            ResolvedTask::Quadratic { cfg } => cfg.seed,
        }
    }
}

fn err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn build_encoder(raw: Option<RawEncoder>, k: usize) -> Result<EncoderSpec> {
    let raw = match raw {
        Some(raw) => raw,
        None => return Ok(EncoderSpec::rand_k(k)),
    };
    if raw.kind != "induced" && raw.induced_top_fraction.is_some() {
        return Err(err(format!(
            "induced_top_fraction only applies to the induced encoder, not {:?}",
            raw.kind
        )));
    }
    match raw.kind.as_str() {
        "rand_k" => Ok(EncoderSpec::rand_k(k)),
        "top_k" => Ok(EncoderSpec::top_k(k)),
        "wangni" => Ok(EncoderSpec::wangni(k)),
        "induced" => EncoderSpec::induced(k, raw.induced_top_fraction.unwrap_or(0.5)),
        other => Err(err(format!(
            "unknown encoder kind {other:?}; expected rand_k, top_k, wangni, or induced"
        ))),
    }
}

fn build_decoder(raw: Option<RawDecoder>) -> Result<TaskDecoder> {
    let raw = match raw {
        Some(raw) => raw,
        None => return Ok(TaskDecoder::RandK),
    };
    if raw.kind != "temporal" && raw.memory.is_some() {
        return Err(err(format!(
            "memory only applies to the temporal decoder, not {:?}",
            raw.kind
        )));
    }
    match raw.kind.as_str() {
        "rand_k" => Ok(TaskDecoder::RandK),
        "prescaled" => Ok(TaskDecoder::Prescaled),
        "spatial_max" => Ok(TaskDecoder::SpatialMax),
        "spatial_avg" => Ok(TaskDecoder::SpatialAvg),
        "spatial_opt" => Ok(TaskDecoder::SpatialOpt),
        "temporal" => match raw.memory.as_deref() {
            None | Some("per_node") => Ok(TaskDecoder::Temporal { shared: false }),
            Some("shared") => Ok(TaskDecoder::Temporal { shared: true }),
            Some(other) => Err(err(format!(
                "unknown memory mode {other:?}; expected per_node or shared"
            ))),
        },
        other => Err(err(format!(
            "unknown decoder kind {other:?}; expected rand_k, prescaled, spatial_max, \
             spatial_avg, spatial_opt, or temporal"
        ))),
    }
}

fn build_data(raw: RawData) -> Result<(DataSpec, Option<f64>)> {
    let holdout = raw.holdout_fraction;
    let spec = match raw.source.as_str() {
        "mixture" => {
            if raw.images.is_some() || raw.labels.is_some() || raw.path.is_some() {
                return Err(err("mixture data takes no file paths"));
            }
            DataSpec::Mixture {
                rows: raw.rows.ok_or_else(|| err("mixture data needs rows"))?,
                features: raw
                    .features
                    .ok_or_else(|| err("mixture data needs features"))?,
                components: raw.components.unwrap_or(4),
                separation: raw.separation.unwrap_or(4.0),
            }
        }
        "idx" => {
            if raw.rows.is_some()
                || raw.features.is_some()
                || raw.components.is_some()
                || raw.separation.is_some()
                || raw.path.is_some()
            {
                return Err(err("idx data takes only images and labels paths"));
            }
            DataSpec::Idx {
                images: raw.images.ok_or_else(|| err("idx data needs images"))?,
                labels: raw.labels.ok_or_else(|| err("idx data needs labels"))?,
            }
        }
        "csv" => {
            if raw.rows.is_some()
                || raw.features.is_some()
                || raw.components.is_some()
                || raw.separation.is_some()
                || raw.images.is_some()
                || raw.labels.is_some()
            {
                return Err(err("csv data takes only a path"));
            }
            DataSpec::Csv {
                path: raw.path.ok_or_else(|| err("csv data needs a path"))?,
            }
        }
        other => {
            return Err(err(format!(
                "unknown data source {other:?}; expected mixture, idx, or csv"
            )))
        }
    };
    Ok((spec, holdout))
}

fn build_split(raw: Option<RawSplit>) -> Result<SplitKind> {
    match raw.map(|s| s.kind) {
        None => Ok(SplitKind::Iid),
        Some(kind) => match kind.as_str() {
            "iid" => Ok(SplitKind::Iid),
            "noniid" => Ok(SplitKind::NonIid),
            other => Err(err(format!(
                "unknown split kind {other:?}; expected iid or noniid"
            ))),
        },
    }
}

/// Rejects params fields that do not belong to the given task.
fn reject_params(params: &RawParams, task: &str, allowed: &[&str]) -> Result<()> {
    let fields: [(&str, bool); 6] = [
        ("eta", params.eta.is_some()),
        ("batch", params.batch.is_some()),
        ("classes", params.classes.is_some()),
        ("clusters", params.clusters.is_some()),
        ("dim", params.dim.is_some()),
        (
            "normalize_node_updates",
            params.normalize_node_updates.is_some(),
        ),
    ];
    for (name, present) in fields {
        if present && !allowed.contains(&name) {
            return Err(err(format!("params.{name} does not apply to {task}")));
        }
    }
    Ok(())
}

fn positive_eta(eta: f64) -> Result<f64> {
    if eta.is_finite() && eta > 0.0 {
        Ok(eta)
    } else {
        Err(err(format!("eta must be positive and finite, got {eta}")))
    }
}

/// Parses and validates a task configuration. A seed given on the
/// command line overrides the config value; with neither, the seed is 0.
pub fn parse_task_config(text: &str, cli_seed: Option<u64>) -> Result<ResolvedTask> {
    let raw: RawConfig = toml::from_str(text)?;
    let seed = cli_seed.or(raw.seed).unwrap_or(0);
    if raw.rounds == 0 {
        return Err(err("rounds must be at least 1"));
    }
    if raw.k == 0 {
        return Err(err("k must be at least 1"));
    }
    let encoder = build_encoder(raw.encoder, raw.k)?;
    let decoder = build_decoder(raw.decoder)?;
    if !decoder.compatible_with(&encoder) {
        return Err(err(format!(
            "{} decoder cannot read {} messages; pair raw-value decoders with rand_k \
             and the prescaled decoder with top_k, wangni, or induced",
            decoder.label(),
            encoder.label()
        )));
    }
    let params = raw.params.unwrap_or(RawParams {
        eta: None,
        batch: None,
        classes: None,
        clusters: None,
        dim: None,
        normalize_node_updates: None,
    });

    let need_nodes = || {
        raw.nodes
            .ok_or_else(|| err(format!("{} needs a node count", raw.task)))
            .and_then(|n| {
                if n == 0 {
                    Err(err("nodes must be at least 1"))
                } else {
                    Ok(n)
                }
            })
    };
    let has_data = raw.data.is_some();
    let has_split = raw.split.is_some();
    let need_data = |task: &str| {
        raw.data
            .ok_or_else(|| err(format!("{task} needs a [data] section")))
            .and_then(build_data)
    };

    match raw.task.as_str() {
        "power_iteration" => {
            reject_params(&params, "power_iteration", &["normalize_node_updates"])?;
            let (data, holdout) = need_data("power_iteration")?;
            if holdout.is_some() {
                return Err(err("holdout_fraction only applies to logreg"));
            }
            Ok(ResolvedTask::PowerIteration {
                cfg: PowerIterationConfig {
                    k: raw.k,
                    rounds: raw.rounds,
                    seed,
                    encoder,
                    decoder,
                    normalize_node_updates: params.normalize_node_updates.unwrap_or(false),
                },
                nodes: need_nodes()?,
                data,
                split: build_split(raw.split)?,
            })
        }
        "kmeans" => {
            reject_params(&params, "kmeans", &["clusters"])?;
            let (data, holdout) = need_data("kmeans")?;
            if holdout.is_some() {
                return Err(err("holdout_fraction only applies to logreg"));
            }
            Ok(ResolvedTask::KMeans {
                cfg: KMeansConfig {
                    k: raw.k,
                    clusters: params.clusters.unwrap_or(4),
                    rounds: raw.rounds,
                    seed,
                    encoder,
                    decoder,
                },
                nodes: need_nodes()?,
                data,
                split: build_split(raw.split)?,
            })
        }
        "logreg" => {
            reject_params(&params, "logreg", &["eta", "batch", "classes"])?;
            let (data, holdout_fraction) = need_data("logreg")?;
            Ok(ResolvedTask::LogReg {
                cfg: LogRegConfig {
                    k: raw.k,
                    rounds: raw.rounds,
                    seed,
                    eta: positive_eta(params.eta.unwrap_or(0.01))?,
                    batch: params.batch.unwrap_or(512),
                    classes: params.classes.unwrap_or(10),
                    encoder,
                    decoder,
                },
                nodes: need_nodes()?,
                data,
                split: build_split(raw.split)?,
                holdout_fraction,
            })
        }
        "quadratic" => {
            reject_params(&params, "quadratic", &["eta", "dim"])?;
            if has_data || has_split {
                return Err(err(
                    "quadratic draws its own targets and takes no [data] or [split]",
                ));
            }
            let dim = params.dim.ok_or_else(|| err("quadratic needs params.dim"))?;
            if raw.k > dim {
                return Err(Error::Budget { k: raw.k, d: dim });
            }
            Ok(ResolvedTask::Quadratic {
                cfg: QuadraticConfig {
                    nodes: need_nodes()?,
                    dim,
                    k: raw.k,
                    rounds: raw.rounds,
                    seed,
                    eta: params.eta.map(positive_eta).transpose()?,
                    encoder,
                    decoder,
                },
            })
        }
        other => Err(err(format!(
            "unknown task {other:?}; expected power_iteration, kmeans, logreg, or quadratic"
        ))),
    }
}

/// Reads and parses a configuration file.
pub fn load_task_config(path: &Path, cli_seed: Option<u64>) -> Result<ResolvedTask> {
    let text = std::fs::read_to_string(path)?;
    parse_task_config(&text, cli_seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    const POWER: &str = r#"
task = "power_iteration"
nodes = 8
k = 4
rounds = 10
seed = 3

[encoder]
kind = "rand_k"

[decoder]
kind = "spatial_avg"

[data]
source = "mixture"
rows = 160
features = 16
"#;

    #[test]
    fn power_iteration_config_round_trips() {
        let resolved = parse_task_config(POWER, None).unwrap();
        match resolved {
            ResolvedTask::PowerIteration {
                cfg,
                nodes,
                data,
                split,
            } => {
                assert_eq!(nodes, 8);
                assert_eq!(cfg.k, 4);
                assert_eq!(cfg.seed, 3);
                assert_eq!(cfg.decoder, TaskDecoder::SpatialAvg);
                assert!(!cfg.normalize_node_updates);
                assert_eq!(split, SplitKind::Iid);
                assert_eq!(
                    data,
                    DataSpec::Mixture {
                        rows: 160,
                        features: 16,
                        components: 4,
                        separation: 4.0,
                    }
                );
            }
            other => panic!("wrong task: {other:?}"),
        }
    }

    #[test]
    fn cli_seed_wins_and_default_is_zero() {
        let resolved = parse_task_config(POWER, Some(99)).unwrap();
        assert_eq!(resolved.seed(), 99);
        let without = POWER.replace("seed = 3\n", "");
        assert_eq!(parse_task_config(&without, None).unwrap().seed(), 0);
    }

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        let top = format!("{POWER}\nextra_key = 1\n");
        assert!(matches!(
            parse_task_config(&top, None),
            Err(Error::Toml(_))
        ));
        let nested = POWER.replace("kind = \"rand_k\"", "kind = \"rand_k\"\ntypo = 2");
        assert!(matches!(
            parse_task_config(&nested, None),
            Err(Error::Toml(_))
        ));
    }

    #[test]
    fn incompatible_encoder_decoder_pairs_are_rejected() {
        let bad = POWER.replace("kind = \"rand_k\"", "kind = \"top_k\"");
        match parse_task_config(&bad, None) {
            Err(Error::Config(msg)) => assert!(msg.contains("spatial_avg")),
            other => panic!("expected config error, got {other:?}"),
        }
        let wangni_plain = POWER
            .replace("kind = \"rand_k\"", "kind = \"wangni\"")
            .replace("kind = \"spatial_avg\"", "kind = \"rand_k\"");
        assert!(parse_task_config(&wangni_plain, None).is_err());
        let wangni_prescaled = POWER
            .replace("kind = \"rand_k\"", "kind = \"wangni\"")
            .replace("kind = \"spatial_avg\"", "kind = \"prescaled\"");
        assert!(parse_task_config(&wangni_prescaled, None).is_ok());
    }

    #[test]
    fn misplaced_options_are_rejected() {
        let memory = POWER.replace(
            "kind = \"spatial_avg\"",
            "kind = \"spatial_avg\"\nmemory = \"shared\"",
        );
        assert!(parse_task_config(&memory, None).is_err());
        let fraction = POWER.replace(
            "kind = \"rand_k\"",
            "kind = \"rand_k\"\ninduced_top_fraction = 0.5",
        );
        assert!(parse_task_config(&fraction, None).is_err());
        let holdout = POWER.replace("features = 16", "features = 16\nholdout_fraction = 0.2");
        assert!(parse_task_config(&holdout, None).is_err());
        let stray = POWER.replace("seed = 3", "seed = 3\n[params]\nclusters = 4");
        assert!(parse_task_config(&stray, None).is_err());
    }

    #[test]
    fn logreg_defaults_apply() {
        let text = r#"
task = "logreg"
nodes = 4
k = 10
rounds = 5

[data]
source = "mixture"
rows = 200
features = 8
components = 10

[split]
kind = "noniid"
"#;
        match parse_task_config(text, None).unwrap() {
            ResolvedTask::LogReg {
                cfg,
                split,
                holdout_fraction,
                ..
            } => {
                assert_eq!(cfg.eta, 0.01);
                assert_eq!(cfg.batch, 512);
                assert_eq!(cfg.classes, 10);
                assert_eq!(split, SplitKind::NonIid);
                assert_eq!(holdout_fraction, None);
            }
            other => panic!("wrong task: {other:?}"),
        }
    }

    #[test]
    fn quadratic_rejects_data_and_requires_dim() {
        let good = r#"
task = "quadratic"
nodes = 15
k = 100
rounds = 500

[decoder]
kind = "temporal"
memory = "per_node"

[params]
dim = 1000
"#;
        match parse_task_config(good, None).unwrap() {
            ResolvedTask::Quadratic { cfg } => {
                assert_eq!(cfg.dim, 1000);
                assert_eq!(cfg.eta, None);
                assert_eq!(cfg.decoder, TaskDecoder::Temporal { shared: false });
            }
            other => panic!("wrong task: {other:?}"),
        }
        let with_data = format!("{good}\n[data]\nsource = \"mixture\"\nrows = 1\nfeatures = 1\n");
        assert!(parse_task_config(&with_data, None).is_err());
        let no_dim = good.replace("dim = 1000", "eta = 0.1");
        assert!(parse_task_config(&no_dim, None).is_err());
        let big_k = good.replace("dim = 1000", "dim = 50");
        assert!(matches!(
            parse_task_config(&big_k, None),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn bad_names_are_rejected() {
        for (from, to) in [
            ("task = \"power_iteration\"", "task = \"powerit\""),
            ("source = \"mixture\"", "source = \"parquet\""),
            ("kind = \"spatial_avg\"", "kind = \"spatial\""),
        ] {
            let text = POWER.replace(from, to);
            assert!(parse_task_config(&text, None).is_err(), "{to} accepted");
        }
    }

    #[test]
    fn idx_and_csv_sources_validate_their_fields() {
        let idx = POWER.replace(
            "source = \"mixture\"\nrows = 160\nfeatures = 16",
            "source = \"idx\"\nimages = \"img.idx\"\nlabels = \"lbl.idx\"",
        );
        assert!(parse_task_config(&idx, None).is_ok());
        let idx_missing = POWER.replace(
            "source = \"mixture\"\nrows = 160\nfeatures = 16",
            "source = \"idx\"\nimages = \"img.idx\"",
        );
        assert!(parse_task_config(&idx_missing, None).is_err());
        let csv_extra = POWER.replace(
            "source = \"mixture\"\nrows = 160\nfeatures = 16",
            "source = \"csv\"\npath = \"rows.csv\"\nrows = 5",
        );
        assert!(parse_task_config(&csv_extra, None).is_err());
    }
}
