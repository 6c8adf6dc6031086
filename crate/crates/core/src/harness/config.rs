//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # RiverSwim with ten states
//! env = riverswim states=10
//! horizon = 40
//! episodes = 100000
//! seeds = 1..10
//! record_stride = 100
//! output = riverswim.csv
//! algorithm = eqo-anytime delta=0.05
//! algorithm = eqo-anytime delta=0.05 uniform name=eqo-uniform
//! algorithm = ucbvi-bernstein delta=0.05
//! algorithm = random
//! ```
//!
//! Environments: `riverswim states=N`, `gap depth=N [gap=G]`, `file path=P`,
//! `random states=S actions=A seed=X`, `two-state`. `horizon` is required
//! except for `gap` (horizon = depth) and `file` (taken from the file).
//!
//! Algorithms: `eqo-anytime delta=`, `eqo-fixed delta=` (tuned for `episodes`),
//! `eqo-pac epsilon= delta=`, `eqo-manual c=`, `ucbvi-hoeffding delta= [scale=]`,
//! `ucbvi-bernstein delta= [scale=]`, `psrl`, `random`. Any of them takes
//! `name=`; EQO and UCBVI accept the bare flag `uniform`.
//!
//! PAC runs use `pac_epsilon`, `pac_delta` and `pac_task = bpi | mistake`.

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use crate::baselines::{BaselineConfig, BaselineKind};
use crate::envs::EnvSpec;
use crate::eqo::BonusSchedule;
use crate::error::{Error, Result};

pub const DEFAULT_RECORD_STRIDE: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum AgentSpec {
    Eqo(BonusSchedule<f64>),
    Baseline(BaselineConfig<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub name: String,
    pub agent: AgentSpec,
    pub uniform: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacTask {
    Bpi,
    MistakePac,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacMode {
    pub epsilon: f64,
    pub delta: f64,
    pub task: PacTask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub algorithms: Vec<AlgorithmSpec>,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub record_stride: usize,
    pub output: Option<PathBuf>,
    pub pac: Option<PacMode>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Parser::default().parse(text)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Checkpoint episodes: every multiple of the stride, plus `K` itself.
    pub fn checkpoints(&self) -> Vec<usize> {
        checkpoints(self.episodes, self.record_stride)
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be at least 1".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds given".into()));
        }
        let mut seen = HashSet::new();
        for s in &self.seeds {
            if !seen.insert(*s) {
                return Err(Error::Config(format!("seed {s} is listed twice")));
            }
        }
        let mut names = HashSet::new();
        for alg in &self.algorithms {
            if !names.insert(alg.name.as_str()) {
                return Err(Error::Config(format!(
                    "algorithm name '{}' is used twice",
                    alg.name
                )));
            }
            match &alg.agent {
                AgentSpec::Eqo(schedule) => {
                    if let BonusSchedule::FixedK { episodes, .. } = schedule {
                        if *episodes != self.episodes {
                            return Err(Error::Config(format!(
                                "{}: fixed-K schedule tuned for K = {episodes} but the run has K = {}",
                                alg.name, self.episodes
                            )));
                        }
                    }
                }
                AgentSpec::Baseline(cfg) => {
                    cfg.validate()?;
                    if alg.uniform && matches!(cfg.kind, BaselineKind::Psrl | BaselineKind::Random)
                    {
                        return Err(Error::Config(format!(
                            "{}: the uniform-reward flag only applies to EQO and UCBVI",
                            alg.name
                        )));
                    }
                }
            }
        }
        if let Some(pac) = &self.pac {
            if !(pac.delta > 0.0 && pac.delta <= 1.0) {
                return Err(Error::Config(format!(
                    "pac_delta = {} must lie in (0, 1]",
                    pac.delta
                )));
            }
            if pac.epsilon.is_nan() || pac.epsilon <= 0.0 {
                return Err(Error::Config(format!(
                    "pac_epsilon = {} must be positive",
                    pac.epsilon
                )));
            }
        }
        Ok(())
    }

    /// Same configuration with every seed shifted by `offset`.
    pub fn with_seed_offset(mut self, offset: u64) -> Self {
        for s in &mut self.seeds {
            *s = s.wrapping_add(offset);
        }
        self
    }
}

pub fn checkpoints(episodes: usize, stride: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=episodes / stride).map(|i| i * stride).collect();
    if out.last() != Some(&episodes) {
        out.push(episodes);
    }
    out
}

#[derive(Default)]
struct Parser {
    env: Option<(usize, String)>,
    horizon: Option<usize>,
    episodes: Option<usize>,
    seeds: Option<Vec<u64>>,
    record_stride: Option<usize>,
    output: Option<PathBuf>,
    algorithms: Vec<AlgorithmSpec>,
    pac_epsilon: Option<f64>,
    pac_delta: Option<f64>,
    pac_task: Option<PacTask>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| err(line, format!("{key}: cannot parse '{value}'")))
}

/// Splits `kind k=v k=v flag` into the kind, the key-value pairs and bare flags.
fn split_args(line: usize, value: &str) -> Result<(String, BTreeMap<String, String>, Vec<String>)> {
    let mut parts = value.split_whitespace();
    let kind = parts
        .next()
        .ok_or_else(|| err(line, "missing value"))?
        .to_string();
    let mut args = BTreeMap::new();
    let mut flags = Vec::new();
    for p in parts {
        match p.split_once('=') {
            Some((k, v)) => {
                if args.insert(k.to_string(), v.to_string()).is_some() {
                    return Err(err(line, format!("argument '{k}' given twice")));
                }
            }
            None => flags.push(p.to_string()),
        }
    }
    Ok((kind, args, flags))
}

struct Args<'a> {
    line: usize,
    map: BTreeMap<String, String>,
    context: &'a str,
}

impl Args<'_> {
    fn take<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.map.remove(key) {
            Some(v) => number(self.line, key, &v).map(Some),
            None => Ok(None),
        }
    }

    fn need<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        self.take(key)?
            .ok_or_else(|| err(self.line, format!("{} needs {key}=", self.context)))
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(err(
                self.line,
                format!("unknown argument '{k}' for {}", self.context),
            )),
            None => Ok(()),
        }
    }
}

fn parse_seeds(line: usize, value: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let a: u64 = number(line, "seeds", a.trim())?;
        let b: u64 = number(line, "seeds", b.trim())?;
        if a > b {
            return Err(err(line, format!("empty seed range {value}")));
        }
        return Ok((a..=b).collect());
    }
    value
        .split(',')
        .map(|s| number(line, "seeds", s.trim()))
        .collect()
}

fn parse_algorithm(line: usize, value: &str) -> Result<AlgorithmSpec> {
    let (kind, map, flags) = split_args(line, value)?;
    let mut uniform = false;
    for f in &flags {
        match f.as_str() {
            "uniform" => uniform = true,
            other => return Err(err(line, format!("unknown flag '{other}'"))),
        }
    }
    let mut args = Args {
        line,
        map,
        context: &kind,
    };
    let name = args.map.remove("name").unwrap_or_else(|| kind.clone());
    let baseline = |kind, args: &mut Args<'_>| -> Result<AgentSpec> {
        let mut cfg = BaselineConfig::new(kind, args.take("delta")?.unwrap_or(0.05));
        if let Some(scale) = args.take("scale")? {
            cfg.bonus_scale = scale;
        }
        Ok(AgentSpec::Baseline(cfg))
    };
    let agent = match kind.as_str() {
        "eqo-anytime" => AgentSpec::Eqo(BonusSchedule::Anytime {
            delta: args.need("delta")?,
        }),
        // episodes are filled in from the experiment once it is known
        "eqo-fixed" => AgentSpec::Eqo(BonusSchedule::FixedK {
            episodes: args.take("episodes")?.unwrap_or(0),
            delta: args.need("delta")?,
        }),
        "eqo-pac" => AgentSpec::Eqo(BonusSchedule::Pac {
            epsilon: args.need("epsilon")?,
            delta: args.need("delta")?,
        }),
        "eqo-manual" => AgentSpec::Eqo(BonusSchedule::Manual { c: args.need("c")? }),
        "ucbvi-hoeffding" => baseline(BaselineKind::UcbviHoeffding, &mut args)?,
        "ucbvi-bernstein" => baseline(BaselineKind::UcbviBernstein, &mut args)?,
        "psrl" => AgentSpec::Baseline(BaselineConfig::new(BaselineKind::Psrl, 0.05)),
        "random" => AgentSpec::Baseline(BaselineConfig::new(BaselineKind::Random, 0.05)),
        other => return Err(err(line, format!("unknown algorithm '{other}'"))),
    };
    args.finish()?;
    if name.is_empty() || name.contains(',') || name.contains('"') {
        return Err(err(line, format!("invalid algorithm name '{name}'")));
    }
    Ok(AlgorithmSpec {
        name,
        agent,
        uniform,
    })
}

fn parse_env(line: usize, value: &str, horizon: Option<usize>) -> Result<EnvSpec> {
    let (kind, map, flags) = split_args(line, value)?;
    if let Some(f) = flags.first() {
        return Err(err(line, format!("unknown flag '{f}'")));
    }
    let mut args = Args {
        line,
        map,
        context: &kind,
    };
    let need_horizon =
        || horizon.ok_or_else(|| err(line, format!("environment '{kind}' needs a horizon key")));
    let env = match kind.as_str() {
        "riverswim" => EnvSpec::RiverSwim {
            states: args.need("states")?,
            horizon: need_horizon()?,
        },
        "gap" => EnvSpec::GapMdp {
            depth: args.need("depth")?,
            gap: args.take("gap")?.unwrap_or(0.02),
        },
        "file" => EnvSpec::FromFile {
            path: PathBuf::from(
                args.map
                    .remove("path")
                    .ok_or_else(|| err(line, "file needs path="))?,
            ),
        },
        "random" => EnvSpec::RandomMdp {
            states: args.need("states")?,
            actions: args.need("actions")?,
            horizon: need_horizon()?,
            seed: args.need("seed")?,
        },
        "two-state" => EnvSpec::TwoState {
            horizon: need_horizon()?,
        },
        other => return Err(err(line, format!("unknown environment '{other}'"))),
    };
    args.finish()?;
    Ok(env)
}

impl Parser {
    fn set<T>(slot: &mut Option<T>, line: usize, key: &str, v: T) -> Result<()> {
        if slot.is_some() {
            return Err(err(line, format!("'{key}' given twice")));
        }
        *slot = Some(v);
        Ok(())
    }

    fn parse(mut self, text: &str) -> Result<ExperimentConfig> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected 'key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(line, format!("'{key}' has no value")));
            }
            match key {
                "env" => Self::set(&mut self.env, line, key, (line, value.to_string()))?,
                "horizon" => Self::set(&mut self.horizon, line, key, number(line, key, value)?)?,
                "episodes" => Self::set(&mut self.episodes, line, key, number(line, key, value)?)?,
                "seeds" => Self::set(&mut self.seeds, line, key, parse_seeds(line, value)?)?,
                "record_stride" => Self::set(
                    &mut self.record_stride,
                    line,
                    key,
                    number(line, key, value)?,
                )?,
                "output" => Self::set(&mut self.output, line, key, PathBuf::from(value))?,
                "algorithm" => self.algorithms.push(parse_algorithm(line, value)?),
                "pac_epsilon" => {
                    Self::set(&mut self.pac_epsilon, line, key, number(line, key, value)?)?
                }
                "pac_delta" => {
                    Self::set(&mut self.pac_delta, line, key, number(line, key, value)?)?
                }
                "pac_task" => {
                    let task = match value {
                        "bpi" => PacTask::Bpi,
                        "mistake" => PacTask::MistakePac,
                        other => return Err(err(line, format!("unknown pac_task '{other}'"))),
                    };
                    Self::set(&mut self.pac_task, line, key, task)?
                }
                other => return Err(err(line, format!("unknown key '{other}'"))),
            }
        }
        let (env_line, env_text) = self
            .env
            .ok_or_else(|| Error::Config("missing required key 'env'".into()))?;
        let env = parse_env(env_line, &env_text, self.horizon)?;
        let episodes = self
            .episodes
            .ok_or_else(|| Error::Config("missing required key 'episodes'".into()))?;
        let seeds = self
            .seeds
            .ok_or_else(|| Error::Config("missing required key 'seeds'".into()))?;
        let pac = match (self.pac_epsilon, self.pac_delta, self.pac_task) {
            (None, None, None) => None,
            (Some(epsilon), Some(delta), task) => Some(PacMode {
                epsilon,
                delta,
                task: task.unwrap_or(PacTask::Bpi),
            }),
            _ => {
                return Err(Error::Config(
                    "PAC mode needs both pac_epsilon and pac_delta".into(),
                ))
            }
        };
        let mut algorithms = self.algorithms;
        for alg in &mut algorithms {
            if let AgentSpec::Eqo(BonusSchedule::FixedK { episodes: e, .. }) = &mut alg.agent {
                if *e == 0 {
                    *e = episodes;
                }
            }
        }
        let config = ExperimentConfig {
            env,
            algorithms,
            episodes,
            seeds,
            record_stride: self.record_stride.unwrap_or(DEFAULT_RECORD_STRIDE),
            output: self.output,
            pac,
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
# comment
env = riverswim states=10
horizon = 40
episodes = 1000
seeds = 1..3
algorithm = eqo-anytime delta=0.05
algorithm = eqo-anytime delta=0.05 uniform name=eqo-uniform   # trailing comment
algorithm = eqo-fixed delta=0.1
algorithm = ucbvi-bernstein delta=0.05 scale=0.5
algorithm = random
";

    #[test]
    fn parses_example() {
        let c = ExperimentConfig::parse(EXAMPLE).unwrap();
        assert_eq!(
            c.env,
            EnvSpec::RiverSwim {
                states: 10,
                horizon: 40
            }
        );
        assert_eq!(c.seeds, vec![1, 2, 3]);
        assert_eq!(c.record_stride, DEFAULT_RECORD_STRIDE);
        assert_eq!(c.algorithms.len(), 5);
        assert!(c.algorithms[1].uniform);
        assert_eq!(c.algorithms[1].name, "eqo-uniform");
        assert_eq!(
            c.algorithms[2].agent,
            AgentSpec::Eqo(BonusSchedule::FixedK {
                episodes: 1000,
                delta: 0.1
            })
        );
        match &c.algorithms[3].agent {
            AgentSpec::Baseline(b) => assert_eq!(b.bonus_scale, 0.5),
            other => panic!("{other:?}"),
        }
        assert!(c.pac.is_none());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "env = riverswim states=10\nhorizon = 4\nepisodes = ten\n";
        match ExperimentConfig::parse(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad = "env = riverswim states=10\nhorizon = 4\nalgorithm = eqo-anytime delta=0.1 colour=red\n";
        assert!(matches!(
            ExperimentConfig::parse(bad),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("no equals sign"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn semantic_checks() {
        let base = "env = riverswim states=5\nhorizon = 4\nepisodes = 10\n";
        assert!(ExperimentConfig::parse(&format!("{base}seeds = 1,1\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{base}seeds = 1\nrecord_stride = 0\n")).is_err());
        assert!(
            ExperimentConfig::parse(&format!("{base}seeds = 1\nalgorithm = psrl uniform\n"))
                .is_err()
        );
        assert!(ExperimentConfig::parse(&format!(
            "{base}seeds = 1\nalgorithm = eqo-fixed delta=0.1 episodes=20\n"
        ))
        .is_err());
        assert!(ExperimentConfig::parse(&format!(
            "{base}seeds = 1\nalgorithm = random\nalgorithm = random\n"
        ))
        .is_err());
        assert!(ExperimentConfig::parse("horizon = 3\nepisodes = 1\nseeds = 1\n").is_err());
    }

    #[test]
    fn pac_keys() {
        let text = "env = two-state\nhorizon = 2\nepisodes = 50\nseeds = 4\npac_epsilon = 1\npac_delta = 0.5\npac_task = mistake\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(
            c.pac,
            Some(PacMode {
                epsilon: 1.0,
                delta: 0.5,
                task: PacTask::MistakePac
            })
        );
        assert!(ExperimentConfig::parse(
            "env = two-state\nhorizon = 2\nepisodes = 5\nseeds = 1\npac_epsilon = 1\n"
        )
        .is_err());
    }

    #[test]
    fn checkpoint_grid() {
        assert_eq!(checkpoints(10, 3), vec![3, 6, 9, 10]);
        assert_eq!(checkpoints(9, 3), vec![3, 6, 9]);
        assert_eq!(checkpoints(2, 5), vec![2]);
        assert_eq!(checkpoints(4, 1), vec![1, 2, 3, 4]);
    }

    #[test]
    fn seed_offset_shifts_all_seeds() {
        let c = ExperimentConfig::parse(EXAMPLE)
            .unwrap()
            .with_seed_offset(10);
        assert_eq!(c.seeds, vec![11, 12, 13]);
    }
}
