//! Experiment configuration: a JSON document with an `experiments` array.

use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer};
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use symlab_core::group::{GroupDescriptor, RepDescriptor};
use symlab_core::kernel::BaseKernel;
use symlab_core::layers::Activation;
use symlab_core::orbit::{CrossSectionKind, Metric};
use symlab_core::stats::InputDistribution;

use crate::error::CliError;

/// Top-level run configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output directory; defaults to the config file's directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub experiments: Vec<ExperimentEntry>,
}

/// One experiment plus its canonical JSON, used for the provenance hash.
#[derive(Debug, Clone)]
pub struct ExperimentEntry {
    pub experiment: Experiment,
    pub canonical: String,
}

impl ExperimentEntry {
    /// First 16 hex digits of the SHA-256 of the canonical JSON.
    pub fn config_hash(&self) -> String {
        hash_hex(&self.canonical)
    }
}

pub fn hash_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl<'de> Deserialize<'de> for ExperimentEntry {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        let canonical = serde_json::to_string(&value).map_err(de::Error::custom)?;
        let experiment = Experiment::deserialize(value).map_err(de::Error::custom)?;
        Ok(Self { experiment, canonical })
    }
}

fn count<'de, D: Deserializer<'de>>(deserializer: D) -> Result<usize, D::Error> {
    let v = f64::deserialize(deserializer)?;
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(de::Error::custom(format!("expected a non-negative integer, got {v}")))
    }
}

fn counts<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<usize>, D::Error> {
    let vs = Vec::<f64>::deserialize(deserializer)?;
    vs.into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(de::Error::custom(format!("expected a non-negative integer, got {v}")))
            }
        })
        .collect()
}

fn one() -> f64 {
    1.0
}

/// A matrix given inline as rows or as a path to a numeric text file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Inline(Vec<Vec<f64>>),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LearnerSpec {
    InvariantLeastSquares,
    AveragedKrr,
    RawLeastSquares,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    /// `|x|^2 + sin |x|`.
    Radial,
    /// Group average of `x_1 x_2 - x_d / 2 + x_1^2`.
    AveragedPolynomial,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    GapLinear {
        group: GroupDescriptor,
        rep: RepDescriptor,
        /// Invariant coefficient vector; defaults to the normalised average of the ones vector.
        #[serde(default)]
        theta: Option<Vec<f64>>,
        #[serde(deserialize_with = "count")]
        n: usize,
        #[serde(default = "one")]
        sigma_x: f64,
        #[serde(default = "one")]
        sigma_xi: f64,
        #[serde(deserialize_with = "count")]
        trials: usize,
        seed: u64,
    },
    GapEquivariant {
        group: GroupDescriptor,
        rep_in: RepDescriptor,
        rep_out: RepDescriptor,
        /// `d x k` rows; defaults to the normalised projection of the ones matrix.
        #[serde(default)]
        theta: Option<Vec<Vec<f64>>>,
        #[serde(deserialize_with = "count")]
        n: usize,
        #[serde(default = "one")]
        sigma_x: f64,
        #[serde(default = "one")]
        sigma_xi: f64,
        #[serde(deserialize_with = "count")]
        trials: usize,
        seed: u64,
    },
    GapKernel {
        group: GroupDescriptor,
        rep: RepDescriptor,
        kernel: BaseKernel,
        /// Defaults to the uniform sphere of radius `sqrt(d)`.
        #[serde(default)]
        distribution: Option<InputDistribution>,
        /// Invariant linear target; defaults to the normalised average of the ones vector.
        #[serde(default)]
        theta: Option<Vec<f64>>,
        #[serde(default)]
        mk: Option<f64>,
        #[serde(deserialize_with = "count")]
        n: usize,
        #[serde(default = "one")]
        sigma: f64,
        rho: f64,
        #[serde(deserialize_with = "count")]
        trials: usize,
        #[serde(default)]
        eval_points: Option<f64>,
        #[serde(default)]
        n_pairs: Option<f64>,
        seed: u64,
    },
    VerifyWishart {
        #[serde(deserialize_with = "count")]
        n: usize,
        #[serde(deserialize_with = "count")]
        d: usize,
        #[serde(deserialize_with = "count")]
        trials: usize,
        seed: u64,
    },
    VerifyProjectionTensor {
        #[serde(deserialize_with = "count")]
        n: usize,
        #[serde(deserialize_with = "count")]
        d: usize,
        #[serde(deserialize_with = "count")]
        trials: usize,
        seed: u64,
    },
    VerifyOperators {
        group: GroupDescriptor,
        rep_in: RepDescriptor,
        /// Defaults to `rep_in`.
        #[serde(default)]
        rep_out: Option<RepDescriptor>,
        #[serde(deserialize_with = "count")]
        samples: usize,
        seed: u64,
    },
    OrbitEquivalence {
        cross_section: CrossSectionKind,
        #[serde(deserialize_with = "count")]
        dim: usize,
        learner: LearnerSpec,
        #[serde(default)]
        bandwidth: Option<f64>,
        #[serde(default)]
        rho: Option<f64>,
        target: TargetSpec,
        #[serde(default)]
        noise: f64,
        #[serde(deserialize_with = "counts")]
        sizes: Vec<usize>,
        #[serde(deserialize_with = "count")]
        test_points: usize,
        #[serde(deserialize_with = "count")]
        trials: usize,
        seed: u64,
    },
    Covering {
        points: MatrixSource,
        #[serde(default)]
        metric: Option<Metric>,
        eps: Vec<f64>,
        seed: u64,
    },
    LayerProject {
        group: GroupDescriptor,
        reps: Vec<RepDescriptor>,
        activation: Activation,
        /// One matrix per layer; random when absent.
        #[serde(default)]
        weights: Option<Vec<MatrixSource>>,
        #[serde(deserialize_with = "count")]
        samples: usize,
        seed: u64,
    },
    VcBound {
        group: GroupDescriptor,
        reps: Vec<RepDescriptor>,
        /// Widths are taken from the representations when absent.
        #[serde(default)]
        widths: Option<Vec<usize>>,
        #[serde(default)]
        expected: Option<f64>,
        seed: u64,
    },
    RegularisationBound {
        group: GroupDescriptor,
        rep_in: RepDescriptor,
        rep_out: RepDescriptor,
        activation: Activation,
        /// Random Gaussian when absent.
        #[serde(default)]
        weights: Option<MatrixSource>,
        #[serde(default)]
        covariance: Option<MatrixSource>,
        #[serde(deserialize_with = "count")]
        samples: usize,
        seed: u64,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::GapLinear { .. } => "gap-linear",
            Self::GapEquivariant { .. } => "gap-equivariant",
            Self::GapKernel { .. } => "gap-kernel",
            Self::VerifyWishart { .. } => "verify-wishart",
            Self::VerifyProjectionTensor { .. } => "verify-projection-tensor",
            Self::VerifyOperators { .. } => "verify-operators",
            Self::OrbitEquivalence { .. } => "orbit-equivalence",
            Self::Covering { .. } => "covering",
            Self::LayerProject { .. } => "layer-project",
            Self::VcBound { .. } => "vc-bound",
            Self::RegularisationBound { .. } => "regularisation-bound",
        }
    }

    pub fn seed(&self) -> u64 {
        match *self {
            Self::GapLinear { seed, .. }
            | Self::GapEquivariant { seed, .. }
            | Self::GapKernel { seed, .. }
            | Self::VerifyWishart { seed, .. }
            | Self::VerifyProjectionTensor { seed, .. }
            | Self::VerifyOperators { seed, .. }
            | Self::OrbitEquivalence { seed, .. }
            | Self::Covering { seed, .. }
            | Self::LayerProject { seed, .. }
            | Self::VcBound { seed, .. }
            | Self::RegularisationBound { seed, .. } => seed,
        }
    }
}

/// Parses `key=value`, with the value read as JSON when possible and as a
/// string otherwise.
pub fn parse_override(text: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = text.split_once('=').ok_or_else(|| CliError::Config(format!("override '{text}' is not of the form key=value")))?;
    if key.is_empty() {
        return Err(CliError::Config(format!("override '{text}' has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    Ok((key.to_owned(), value))
}

/// Sets a dotted path such as `experiments.0.trials`. Array segments must
/// name an existing index; object keys are created as needed.
pub fn apply_override(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match node {
            Value::Array(items) => {
                let idx: usize = seg.parse().map_err(|_| CliError::Config(format!("override '{path}': '{seg}' is not an array index")))?;
                let len = items.len();
                items.get_mut(idx).ok_or_else(|| CliError::Config(format!("override '{path}': index {idx} out of range ({len} items)")))?
            }
            Value::Object(map) => map.entry(seg.to_string()).or_insert(if last { Value::Null } else { Value::Object(Default::default()) }),
            _ => return Err(CliError::Config(format!("override '{path}': '{seg}' does not address an object or array"))),
        };
    }
    *node = value;
    Ok(())
}

/// Reads, overrides and validates a configuration file.
///
/// Without overrides the document is parsed straight from text so that
/// schema errors carry line and column numbers.
pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed = if overrides.is_empty() {
        serde_path_to_error::deserialize::<_, RunConfig>(&mut serde_json::Deserializer::from_str(&text))
    } else {
        let mut value: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for o in overrides {
            let (key, v) = parse_override(o)?;
            apply_override(&mut value, &key, v)?;
        }
        serde_path_to_error::deserialize::<_, RunConfig>(value)
    };
    let mut config = parsed.map_err(|e| schema_error(path, e))?;
    if config.experiments.is_empty() {
        return Err(CliError::Config(format!("{}: 'experiments' is empty", path.display())));
    }
    if config.output.is_none() {
        config.output = Some(path.parent().map(Path::to_path_buf).unwrap_or_default());
    }
    Ok(config)
}

fn schema_error(path: &Path, e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let field = e.path().to_string();
    let inner = e.into_inner();
    let place = if field == "." { String::new() } else { format!("{field}: ") };
    if inner.line() > 0 {
        CliError::Config(format!("{}: {place}{inner}", path.display()))
    } else {
        CliError::Config(format!("{}: {place}{inner} (after overrides)", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, serde_json::Error> {
        serde_json::from_str(text)
    }

    #[test]
    fn parses_wishart_with_float_counts() {
        let cfg = parse(r#"{"experiments": [{"kind": "verify-wishart", "n": 20, "d": 3, "trials": 2e4, "seed": 7}]}"#).unwrap();
        match &cfg.experiments[0].experiment {
            Experiment::VerifyWishart { n, d, trials, seed } => assert_eq!((*n, *d, *trials, *seed), (20, 3, 20_000, 7)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_seed_names_field_and_line() {
        let err = parse("{\"experiments\": [\n{\"kind\": \"verify-wishart\", \"n\": 20, \"d\": 3, \"trials\": 2000}\n]}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("seed"), "{msg}");
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let err = parse(r#"{"experiments": [{"kind": "gap-quadratic", "seed": 1}]}"#).unwrap_err();
        assert!(err.to_string().contains("gap-quadratic"));
    }

    #[test]
    fn non_integral_count_is_rejected() {
        assert!(parse(r#"{"experiments": [{"kind": "verify-wishart", "n": 20.5, "d": 3, "trials": 2000, "seed": 1}]}"#).is_err());
    }

    #[test]
    fn overrides_address_dotted_paths() {
        let mut v: Value = serde_json::from_str(r#"{"experiments": [{"trials": 10, "group": {"cyclic": 3}}]}"#).unwrap();
        let (k, val) = parse_override("experiments.0.trials=500").unwrap();
        apply_override(&mut v, &k, val).unwrap();
        let (k, val) = parse_override("experiments.0.group.cyclic=5").unwrap();
        apply_override(&mut v, &k, val).unwrap();
        assert_eq!(v["experiments"][0]["trials"], 500);
        assert_eq!(v["experiments"][0]["group"]["cyclic"], 5);
        let (k, val) = parse_override("experiments.3.trials=1").unwrap();
        assert!(apply_override(&mut v, &k, val).is_err());
        assert!(parse_override("novalue").is_err());
        assert_eq!(parse_override("a=word").unwrap().1, Value::String("word".into()));
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(hash_hex("abc"), "ba7816bf8f01cfea");
    }
}
