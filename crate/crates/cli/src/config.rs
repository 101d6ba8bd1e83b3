//! Experiment configuration files. Every field has a default, so an empty
//! file (or no file) is a valid configuration; command-line flags are applied
//! on top and the resolved result is what gets hashed into CSV provenance.

use std::collections::HashSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lgp_core::experiments::Problem;
use lgp_core::{EvolutionConfig, Variant};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Either a seed count (`seeds = 50` means `0..50`) or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn resolve(&self) -> Result<Vec<u64>> {
        let list = match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        };
        if list.is_empty() {
            bail!("seed list is empty");
        }
        let mut seen = HashSet::new();
        if let Some(dup) = list.iter().find(|s| !seen.insert(**s)) {
            bail!("seed {dup} appears more than once");
        }
        let mut sorted = list;
        sorted.sort_unstable();
        Ok(sorted)
    }
}

/// A single value or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSettings {
    pub pop_size: usize,
    pub generations: usize,
    pub add_rate: f64,
    pub remove_rate: f64,
    pub reproduction_rate: f64,
    pub tournament_size: usize,
    pub elitism: usize,
    pub init_len: (usize, usize),
    pub max_len: usize,
}

impl Default for EvolutionSettings {
    fn default() -> Self {
        let d = EvolutionConfig::default();
        EvolutionSettings {
            pop_size: d.pop_size,
            generations: d.generations,
            add_rate: d.add_rate,
            remove_rate: d.remove_rate,
            reproduction_rate: d.reproduction_rate,
            tournament_size: d.tournament_size,
            elitism: d.elitism,
            init_len: d.init_len,
            max_len: d.max_len,
        }
    }
}

impl EvolutionSettings {
    pub fn to_config(&self, step: usize) -> EvolutionConfig {
        EvolutionConfig {
            pop_size: self.pop_size,
            generations: self.generations,
            add_rate: self.add_rate,
            remove_rate: self.remove_rate,
            reproduction_rate: self.reproduction_rate,
            tournament_size: self.tournament_size,
            elitism: self.elitism,
            init_len: self.init_len,
            max_len: self.max_len,
            step,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub tag: String,
    pub problem: String,
    pub variant: String,
    pub seeds: Seeds,
    /// Step sizes; one aggregate is written per value.
    pub u: OneOrMany<usize>,
    pub evolution: EvolutionSettings,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            tag: "evolve".into(),
            problem: "nguyen4".into(),
            variant: "default".into(),
            seeds: Seeds::Count(50),
            u: OneOrMany::One(1),
            evolution: EvolutionSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub tag: String,
    pub problem: String,
    pub seeds: Seeds,
    pub sizes: Vec<usize>,
    /// Random programs drawn per size and seed.
    pub per_seed: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            tag: "sample".into(),
            problem: "nguyen4".into(),
            seeds: Seeds::Count(50),
            sizes: (5..=50).step_by(5).collect(),
            per_seed: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub tag: String,
    pub params: ParamSettings,
    pub u: Vec<usize>,
    pub d: Vec<usize>,
    pub m: Vec<usize>,
    pub epsilon: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            tag: "grid".into(),
            params: ParamSettings::default(),
            u: (1..=35).collect(),
            d: (1..=10).collect(),
            m: (1..=100).collect(),
            epsilon: 1e-4,
        }
    }
}

/// Search-space parameters; defaults describe Nguyen4 with the standard
/// eight-register instruction set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamSettings {
    pub gamma: usize,
    pub gamma_out: usize,
    pub n: u64,
    pub m_star: usize,
    pub max_len: usize,
}

impl Default for ParamSettings {
    fn default() -> Self {
        let p = lgp_core::bounds::SpaceParams::nguyen4();
        ParamSettings {
            gamma: p.gamma,
            gamma_out: p.gamma_out,
            n: p.n,
            m_star: p.m_star,
            max_len: p.max_len,
        }
    }
}

impl ParamSettings {
    pub fn to_params(&self) -> Result<lgp_core::bounds::SpaceParams> {
        Ok(lgp_core::bounds::SpaceParams::new(
            self.gamma,
            self.gamma_out,
            self.n,
            self.m_star,
            self.max_len,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub tag: String,
    pub problems: Vec<String>,
    /// The first variant is the baseline for the rank-sum tests.
    pub variants: Vec<String>,
    pub seeds: Seeds,
    pub u: usize,
    pub evolution: EvolutionSettings,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            tag: "study".into(),
            problems: lgp_core::Benchmark::ALL.iter().map(|b| b.to_string()).collect(),
            variants: Variant::ALL.iter().map(|v| v.to_string()).collect(),
            seeds: Seeds::Count(50),
            u: 1,
            evolution: EvolutionSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub tag: String,
    pub gamma: usize,
    pub gamma_out: usize,
    /// Instructions per destination register.
    pub per_dest: usize,
    pub target_len: usize,
    pub m_max: usize,
    pub seed: u64,
    /// Fitness bucket width for the probability condition.
    pub bucket_width: f64,
    /// Tolerance reported for the size-to-size distance similarity.
    pub similarity_epsilon: f64,
    /// Halve the fitness constant before certifying; expected to fail.
    pub negative_control: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            tag: "oracle".into(),
            gamma: 2,
            gamma_out: 1,
            per_dest: 2,
            target_len: 2,
            m_max: 2,
            seed: 0,
            bucket_width: 0.05,
            similarity_epsilon: 0.1,
            negative_control: false,
        }
    }
}

impl OracleConfig {
    pub fn spec(&self) -> lgp_core::oracle::TinySpec {
        lgp_core::oracle::TinySpec::new(
            self.gamma,
            self.gamma_out,
            self.per_dest,
            self.target_len,
            self.m_max,
            self.seed,
        )
    }
}

/// Read a TOML file, or fall back to defaults when no path is given.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// SHA-256 of the resolved configuration rendered as TOML.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let text = toml::to_string(config).context("serialising resolved config")?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

pub fn parse_problem(s: &str) -> Result<Problem> {
    Ok(s.parse::<Problem>()?)
}

pub fn parse_variant(s: &str) -> Result<Variant> {
    Ok(s.parse::<Variant>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_accept_count_or_list() {
        let c: EvolveConfig = toml::from_str("seeds = 3").unwrap();
        assert_eq!(c.seeds.resolve().unwrap(), vec![0, 1, 2]);
        let c: EvolveConfig = toml::from_str("seeds = [5, 2]").unwrap();
        assert_eq!(c.seeds.resolve().unwrap(), vec![2, 5]);
        assert!(Seeds::List(vec![1, 1]).resolve().is_err());
        assert!(Seeds::Count(0).resolve().is_err());
    }

    #[test]
    fn u_accepts_one_or_many() {
        let c: EvolveConfig = toml::from_str("u = [1, 3]").unwrap();
        assert_eq!(c.u.to_vec(), vec![1, 3]);
        let c: EvolveConfig = toml::from_str("u = 9").unwrap();
        assert_eq!(c.u.to_vec(), vec![9]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<EvolveConfig>("popsize = 3").is_err());
        assert!(toml::from_str::<EvolveConfig>("[evolution]\npopsize = 3").is_err());
    }

    #[test]
    fn defaults_round_trip_and_hash_is_stable() {
        let c = StudyConfig::default();
        let back: StudyConfig = toml::from_str(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(config_hash(&c).unwrap(), config_hash(&back).unwrap());
        let other = StudyConfig { u: 2, ..c };
        assert_ne!(config_hash(&other).unwrap(), config_hash(&back).unwrap());
    }

    #[test]
    fn evolution_defaults_match_the_engine() {
        assert_eq!(EvolutionSettings::default().to_config(1), EvolutionConfig::default());
    }
}
