//! Experiment configuration: TOML schema, command-line overrides and
//! validation. Every error raised here maps to exit code 3 and happens
//! before any report file is touched.

use std::path::{Path, PathBuf};

use lfot::curvature::ComparisonParams;
use lfot::geometry::MIN_STEPS;
use lfot::measure::DiscreteMeasure;
use lfot::montecarlo::MIN_SAMPLES;
use lfot::potential::Potential;
use lfot::region::Region;
use lfot::{build_model, FinslerStructure, Model, ModelSpec, Point};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::report::canonical_json;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid config: {0}")]
    Model(#[from] lfot::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Invariants,
    Geodesic,
    Riccati,
    Separation,
    Coupling,
    QGeodesic,
    Mcp,
    Tcd,
    BrunnMinkowski,
    Lorentzianity,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Invariants => "invariants",
            CheckKind::Geodesic => "geodesic",
            CheckKind::Riccati => "riccati",
            CheckKind::Separation => "separation",
            CheckKind::Coupling => "coupling",
            CheckKind::QGeodesic => "q_geodesic",
            CheckKind::Mcp => "mcp",
            CheckKind::Tcd => "tcd",
            CheckKind::BrunnMinkowski => "brunn_minkowski",
            CheckKind::Lorentzianity => "lorentzianity",
        }
    }

    /// Default sample budget: Monte Carlo points for the comparison checks,
    /// random instances for the deterministic ones.
    pub fn default_samples(self) -> usize {
        match self {
            CheckKind::Invariants => 1000,
            CheckKind::Geodesic | CheckKind::Riccati => 20,
            CheckKind::Separation => 200,
            CheckKind::Coupling | CheckKind::QGeodesic => 1,
            CheckKind::Mcp | CheckKind::BrunnMinkowski => 200_000,
            CheckKind::Tcd => 100_000,
            CheckKind::Lorentzianity => 500,
        }
    }

    pub fn is_monte_carlo(self) -> bool {
        matches!(
            self,
            CheckKind::Mcp | CheckKind::Tcd | CheckKind::BrunnMinkowski
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvMeasure {
    /// Relative paths resolve against the config file's directory.
    pub csv: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMeasure {
    pub atoms: Vec<Vec<f64>>,
    /// Uniform when omitted; normalized to unit mass otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Csv(CsvMeasure),
    Inline(InlineMeasure),
}

impl MeasureSpec {
    pub fn resolve(&self, base: &Path) -> lfot::Result<DiscreteMeasure> {
        match self {
            MeasureSpec::Csv(c) => DiscreteMeasure::from_csv_path(&base.join(&c.csv)),
            MeasureSpec::Inline(m) => {
                let atoms: Vec<Point> = m.atoms.iter().map(|a| Point(a.clone())).collect();
                match &m.weights {
                    Some(w) => DiscreteMeasure::normalized(atoms, w.clone()),
                    None => DiscreteMeasure::uniform(atoms),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Measures {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<MeasureSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regions {
    /// Support of the uniform initial measure of `tcd`; must be a box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Region>,
}

impl Regions {
    fn is_empty(&self) -> bool {
        *self == Regions::default()
    }
}

impl Measures {
    fn is_empty(&self) -> bool {
        *self == Measures::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub check: CheckKind,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ComparisonParams>,
    /// Transport exponent for `coupling` and `q_geodesic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Potential>,
    /// Base point of `mcp` and `lorentzianity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Regions::is_empty")]
    pub regions: Regions,
    #[serde(default, skip_serializing_if = "Measures::is_empty")]
    pub measures: Measures,
    /// RK4 steps for `geodesic` and `riccati`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// `(s, t)` pairs for `q_geodesic`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_RICCATI_STEPS: usize = 2000;
pub const DEFAULT_TIMES: [[f64; 2]; 3] = [[0.0, 0.25], [0.25, 0.75], [0.75, 1.0]];

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.samples {
            self.samples = Some(n);
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or_else(|| self.check.default_samples())
    }

    pub fn steps(&self) -> usize {
        self.steps.unwrap_or(match self.check {
            CheckKind::Riccati => DEFAULT_RICCATI_STEPS,
            _ => DEFAULT_STEPS,
        })
    }

    pub fn times(&self) -> Vec<[f64; 2]> {
        self.times.clone().unwrap_or_else(|| DEFAULT_TIMES.to_vec())
    }

    /// SHA-256 of the canonical JSON of the config without `out`, so that
    /// the hash identifies the experiment rather than where it was written.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let v = serde_json::to_value(&c).expect("config serializes");
        hex::encode(Sha256::digest(canonical_json(&v).as_bytes()))
    }
}

/// A validated configuration with its model built and measures loaded.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: Model,
    pub source: Option<DiscreteMeasure>,
    pub target: Option<DiscreteMeasure>,
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn require<'a, T>(v: &'a Option<T>, what: &str, check: CheckKind) -> Result<&'a T, ConfigError> {
    v.as_ref()
        .ok_or_else(|| invalid(format!("check `{}` requires `{what}`", check.name())))
}

impl Experiment {
    /// Reads, overrides and validates the config at `path`.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let mut config = ExperimentConfig::from_toml_str(&text)?;
        config.apply(overrides);
        let base = path.parent().unwrap_or(Path::new("."));
        Self::new(config, base)
    }

    pub fn new(config: ExperimentConfig, base: &Path) -> Result<Self, ConfigError> {
        let model = build_model(&config.model)?;
        let n = model.dim();
        let check = config.check;
        let samples = config.samples();
        if samples == 0 {
            return Err(invalid("samples must be positive"));
        }
        if check.is_monte_carlo() && samples < MIN_SAMPLES {
            return Err(invalid(format!(
                "Monte Carlo checks need at least {MIN_SAMPLES} samples"
            )));
        }
        if config.steps() < MIN_STEPS {
            return Err(invalid(format!("steps must be at least {MIN_STEPS}")));
        }
        if let Some(p) = &config.params {
            p.validate(n)?;
        }
        if let Some(x) = &config.point {
            if x.len() != n {
                return Err(lfot::Error::DimensionMismatch {
                    expected: n,
                    got: x.len(),
                }
                .into());
            }
        }
        if let Some(u) = &config.potential {
            u.validate(n)?;
        }
        let r = &config.regions;
        for region in [&r.initial, &r.a0, &r.a1, &r.b].into_iter().flatten() {
            region.validate(n)?;
        }
        let (mut source, mut target) = (None, None);
        match check {
            CheckKind::Mcp => {
                require(&config.params, "params", check)?;
                require(&config.point, "point", check)?;
                require(&r.b, "regions.b", check)?;
            }
            CheckKind::Tcd => {
                require(&config.params, "params", check)?;
                require(&config.potential, "potential", check)?;
                if !matches!(require(&r.initial, "regions.initial", check)?, Region::Box { .. }) {
                    return Err(invalid("regions.initial must be a box"));
                }
            }
            CheckKind::BrunnMinkowski => {
                require(&config.params, "params", check)?;
                require(&r.a0, "regions.a0", check)?;
                require(&r.a1, "regions.a1", check)?;
            }
            CheckKind::Coupling | CheckKind::QGeodesic => {
                let q = *require(&config.q, "q", check)?;
                if !(q > 0.0 && q < 1.0) {
                    return Err(invalid(format!("q = {q} outside (0, 1)")));
                }
                let mu = require(&config.measures.source, "measures.source", check)?.resolve(base)?;
                let nu = require(&config.measures.target, "measures.target", check)?.resolve(base)?;
                for m in [&mu, &nu] {
                    if m.dim() != n {
                        return Err(lfot::Error::DimensionMismatch {
                            expected: n,
                            got: m.dim(),
                        }
                        .into());
                    }
                }
                for [s, t] in config.times() {
                    if !(0.0 <= s && s < t && t <= 1.0) {
                        return Err(invalid(format!("time pair ({s}, {t}) not ordered in [0, 1]")));
                    }
                }
                source = Some(mu);
                target = Some(nu);
            }
            _ => {}
        }
        Ok(Experiment {
            config,
            model,
            source,
            target,
        })
    }
}
