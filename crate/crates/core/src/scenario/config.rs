//! TOML scenario files.
//!
//! Vectors are written as comma-separated decimal strings (`"10,5,0"`) so
//! that values stay exact through a parse/serialize round trip.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decisions::DecisionRule;
use crate::error::{Error, Result};
use crate::mdp::{RewardlessMdp, SamplerKind};
use crate::outcomes::OutcomeSet;
use crate::perm::{ParameterDomain, ParameterVector, Permutation};

/// Parses `"a,b,c"` (optionally wrapped in parentheses) into a vector.
pub fn parse_vector(text: &str) -> Result<ParameterVector> {
    let trimmed = text.trim();
    let inner = trimmed
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(trimmed);
    if inner.trim().is_empty() {
        return Err(Error::InvalidParameter("empty vector".into()));
    }
    let entries = inner
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("`{s}` is not a finite number")))
        })
        .collect::<Result<Vec<_>>>()?;
    ParameterVector::new(entries)
}

pub fn format_vector(v: &ParameterVector) -> String {
    v.as_slice()
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Orbit,
    Mdp,
    Bandit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetsBlock {
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
    /// Defaults to `A ∪ B`.
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<String>>,
}

fn default_samples() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingBlock {
    /// Parameters checked before the random grid draws.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thetas: Vec<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for SamplingBlock {
    fn default() -> Self {
        Self {
            thetas: Vec::new(),
            samples: default_samples(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateBlock {
    /// Permutation mappings such as `"1,0,2"`.
    pub permutations: Vec<String>,
}

fn default_start() -> String {
    "start".into()
}

fn default_sampler() -> String {
    SamplerKind::IidUniform01.name().into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpBlock {
    /// Fixture path relative to the config file, or `builtin:toy-mdp`.
    pub fixture: String,
    #[serde(default = "default_start")]
    pub start: String,
    /// States whose unit RSDs make up `D′`.
    pub d_prime: Vec<String>,
    /// States whose unit RSDs make up `D`; the remaining RSDs when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<String>>,
    pub n: u64,
    pub orbits: usize,
    pub samples: usize,
    #[serde(default = "default_sampler")]
    pub sampler: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditBlock {
    pub utilities: String,
    pub epsilon: f64,
    pub trials: u32,
    pub runs: usize,
    /// Constant-payoff control whose arm frequencies should be uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub outcomes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<SetsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mdp: Option<MdpBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandit: Option<BanditBlock>,
    /// Directory that relative fixture paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn config_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    /// Parses and validates TOML text. Syntax and type errors carry a line
    /// number; semantic errors name the offending field.
    pub fn parse(text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(config_err("id", "must not be empty"));
        }
        match self.kind {
            ScenarioKind::Orbit => {
                self.resolve_orbit()?;
            }
            ScenarioKind::Mdp => {
                let m = self
                    .mdp
                    .as_ref()
                    .ok_or_else(|| config_err("mdp", "missing section"))?;
                if m.d_prime.is_empty() {
                    return Err(config_err("mdp.d_prime", "must name at least one state"));
                }
                if m.n == 0 {
                    return Err(config_err("mdp.n", "must be positive"));
                }
                if m.samples == 0 {
                    return Err(config_err("mdp.samples", "must be positive"));
                }
                SamplerKind::parse(&m.sampler)
                    .map_err(|e| config_err("mdp.sampler", e.to_string()))?;
            }
            ScenarioKind::Bandit => {
                self.resolve_bandit()?;
            }
        }
        Ok(())
    }

    pub(crate) fn resolve_orbit(&self) -> Result<ResolvedOrbit> {
        let d = self
            .dimension
            .ok_or_else(|| config_err("dimension", "required for orbit scenarios"))?;
        if d == 0 {
            return Err(config_err("dimension", "must be positive"));
        }
        let n = self
            .n
            .ok_or_else(|| config_err("n", "required for orbit scenarios"))?;
        if n == 0 {
            return Err(config_err("n", "must be positive"));
        }
        let domain = ParameterDomain::parse(self.domain.as_deref().unwrap_or("all"))
            .map_err(|e| config_err("domain", e.to_string()))?;
        let mut outcomes = BTreeMap::new();
        for (name, text) in &self.outcomes {
            let field = format!("outcomes.{name}");
            let v = parse_vector(text).map_err(|e| config_err(&field, e.to_string()))?;
            if v.dim() != d {
                return Err(config_err(
                    field,
                    format!("has {} entries, dimension is {d}", v.dim()),
                ));
            }
            outcomes.insert(name.clone(), v);
        }
        let sets = self
            .sets
            .as_ref()
            .ok_or_else(|| config_err("sets", "missing section"))?;
        let build = |field: &str, names: &[String]| -> Result<OutcomeSet> {
            let label = field.trim_start_matches("sets.");
            let elements = names
                .iter()
                .map(|name| {
                    outcomes
                        .get(name)
                        .cloned()
                        .ok_or_else(|| config_err(field, format!("unknown outcome `{name}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            OutcomeSet::with_dim(label, d, elements).map_err(|e| config_err(field, e.to_string()))
        };
        let a = build("sets.A", &sets.a)?;
        let b = build("sets.B", &sets.b)?;
        let c = match &sets.c {
            Some(names) => build("sets.C", names)?,
            None => a.union(&b)?.renamed("C"),
        };
        for (field, set) in [("sets.A", &a), ("sets.B", &b)] {
            if !set.is_subset_of(&c) {
                return Err(config_err(field, "must be a subset of C"));
            }
        }
        if self.rules.is_empty() {
            return Err(config_err("rules", "must list at least one rule"));
        }
        let lookup = |name: &str| -> Option<OutcomeSet> {
            match name {
                "A" => Some(a.clone()),
                "B" => Some(b.clone()),
                "C" => Some(c.clone()),
                other => outcomes
                    .get(other)
                    .and_then(|v| OutcomeSet::new(other, vec![v.clone()]).ok()),
            }
        };
        let rules = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, text)| {
                DecisionRule::parse_with(text, &lookup)
                    .map_err(|e| config_err(format!("rules[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let sampling = self.sampling.clone().unwrap_or_default();
        let thetas = sampling
            .thetas
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let field = format!("sampling.thetas[{i}]");
                let v = parse_vector(text).map_err(|e| config_err(&field, e.to_string()))?;
                if v.dim() != d {
                    return Err(config_err(
                        field,
                        format!("has {} entries, dimension is {d}", v.dim()),
                    ));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        let certificate = match &self.certificate {
            None => None,
            Some(block) => {
                if block.permutations.is_empty() {
                    return Err(config_err("certificate.permutations", "must not be empty"));
                }
                Some(
                    block
                        .permutations
                        .iter()
                        .enumerate()
                        .map(|(i, text)| {
                            let field = format!("certificate.permutations[{i}]");
                            let mapping = text
                                .split(',')
                                .map(|s| s.trim().parse::<usize>())
                                .collect::<std::result::Result<Vec<_>, _>>()
                                .map_err(|e| config_err(&field, e.to_string()))?;
                            if mapping.len() != d {
                                return Err(config_err(field, format!("needs {d} entries")));
                            }
                            Permutation::new(mapping).map_err(|e| config_err(field, e.to_string()))
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            }
        };
        Ok(ResolvedOrbit {
            dim: d,
            n,
            domain,
            a,
            b,
            c,
            rules,
            thetas,
            samples: sampling.samples,
            certificate,
        })
    }

    pub(crate) fn resolve_bandit(&self) -> Result<ResolvedBandit> {
        let block = self
            .bandit
            .as_ref()
            .ok_or_else(|| config_err("bandit", "missing section"))?;
        let utilities = parse_vector(&block.utilities)
            .map_err(|e| config_err("bandit.utilities", e.to_string()))?;
        if utilities.dim() < 2 {
            return Err(config_err("bandit.utilities", "needs at least two arms"));
        }
        if !(block.epsilon > 0.0 && block.epsilon < 1.0) {
            return Err(config_err("bandit.epsilon", "must lie in (0, 1)"));
        }
        if block.trials == 0 {
            return Err(config_err("bandit.trials", "must be positive"));
        }
        if block.runs < 2 {
            return Err(config_err("bandit.runs", "must be at least 2"));
        }
        let control = block
            .control
            .as_deref()
            .map(|text| {
                let v =
                    parse_vector(text).map_err(|e| config_err("bandit.control", e.to_string()))?;
                if v.dim() != utilities.dim() {
                    return Err(config_err("bandit.control", "must have one entry per arm"));
                }
                Ok(v)
            })
            .transpose()?;
        Ok(ResolvedBandit {
            utilities,
            epsilon: block.epsilon,
            trials: block.trials,
            runs: block.runs,
            control,
        })
    }

    /// Loads the MDP named by the `mdp.fixture` field.
    pub(crate) fn load_mdp(&self) -> Result<RewardlessMdp> {
        let block = self
            .mdp
            .as_ref()
            .ok_or_else(|| config_err("mdp", "missing section"))?;
        if let Some(name) = block.fixture.strip_prefix("builtin:") {
            return match name {
                "toy-mdp" => Ok(crate::mdp::toy_mdp()),
                other => Err(config_err(
                    "mdp.fixture",
                    format!("unknown builtin fixture `{other}`"),
                )),
            };
        }
        let path = match &self.base_dir {
            Some(dir) => dir.join(&block.fixture),
            None => PathBuf::from(&block.fixture),
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| config_err("mdp.fixture", format!("{}: {e}", path.display())))?;
        RewardlessMdp::parse(&text)
    }
}

pub(crate) struct ResolvedOrbit {
    pub dim: usize,
    pub n: u64,
    pub domain: ParameterDomain,
    pub a: OutcomeSet,
    pub b: OutcomeSet,
    pub c: OutcomeSet,
    pub rules: Vec<DecisionRule>,
    pub thetas: Vec<ParameterVector>,
    pub samples: usize,
    pub certificate: Option<Vec<Permutation>>,
}

pub(crate) struct ResolvedBandit {
    pub utilities: ParameterVector,
    pub epsilon: f64,
    pub trials: u32,
    pub runs: usize,
    pub control: Option<ParameterVector>,
}
