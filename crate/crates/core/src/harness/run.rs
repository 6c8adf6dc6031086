use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{checkpoints, AgentSpec, AlgorithmSpec, ExperimentConfig, PacMode, PacTask};
use crate::agent::{run_episodes, Agent};
use crate::baselines::{BaselineKind, PsrlAgent, RandomAgent, UcbviAgent};
use crate::eqo::EqoAgent;
use crate::error::{Error, Result};
use crate::mdp::{instant_regret, value_iteration, Policy, TabularMdp, ValueTables};
use crate::pac::run_pac_episodes;

/// Name under which PAC runs are reported.
pub const PAC_ALGORITHM: &str = "eqo-pac";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub episode: usize,
    pub cumulative_regret: f64,
    /// Whether this episode's policy was certified (PAC runs only).
    pub certified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacSummary {
    pub task: PacTask,
    pub episodes_run: usize,
    pub uncertified: usize,
    /// Certified episodes whose exact regret exceeds ε.
    pub unsound: usize,
    pub certified_episode: Option<usize>,
    pub certified_regret: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: String,
    pub seed: u64,
    pub checkpoints: Vec<Checkpoint>,
    pub pac: Option<PacSummary>,
}

impl RunRecord {
    pub fn final_regret(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.cumulative_regret)
    }
}

/// 64-bit FNV-1a, used to give each algorithm its own random streams.
pub fn fnv1a(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Environment rng (stream 0) and agent seed (drawn from stream 1) for one run.
pub fn run_rngs(seed: u64, algorithm: &str) -> (ChaCha8Rng, u64) {
    let key = seed ^ fnv1a(algorithm);
    let env = ChaCha8Rng::seed_from_u64(key);
    let mut agent = ChaCha8Rng::seed_from_u64(key);
    agent.set_stream(1);
    (env, agent.random())
}

/// Exact regret of a sequence of policies, reusing the last evaluation when
/// the policy has not changed.
struct RegretMeter<'a> {
    mdp: &'a TabularMdp<f64>,
    vstar: &'a ValueTables<f64>,
    last: Option<(Policy, f64)>,
}

impl<'a> RegretMeter<'a> {
    fn new(mdp: &'a TabularMdp<f64>, vstar: &'a ValueTables<f64>) -> Self {
        Self {
            mdp,
            vstar,
            last: None,
        }
    }

    fn regret(&mut self, pi: &Policy) -> Result<f64> {
        if let Some((prev, r)) = &self.last {
            if prev == pi {
                return Ok(*r);
            }
        }
        // nonnegative by definition; clamp rounding residue
        let r = instant_regret(self.mdp, pi, self.vstar)?.max(0.0);
        self.last = Some((pi.clone(), r));
        Ok(r)
    }
}

/// Runs any agent for `episodes` episodes and records cumulative exact regret
/// at every multiple of `stride` and at the last episode.
pub fn run_agent<A: Agent<f64> + ?Sized, G: Rng + ?Sized>(
    mdp: &TabularMdp<f64>,
    vstar: &ValueTables<f64>,
    agent: &mut A,
    episodes: usize,
    stride: usize,
    rng: &mut G,
) -> Result<Vec<Checkpoint>> {
    let grid = checkpoints(episodes, stride);
    let mut next = grid.iter().copied().peekable();
    let mut meter = RegretMeter::new(mdp, vstar);
    let mut total = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    let mut failure = None;
    run_episodes(mdp, agent, episodes, rng, |k, pi, _| {
        match meter.regret(pi) {
            Ok(r) => total += r,
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
        if next.peek() == Some(&k) {
            next.next();
            out.push(Checkpoint {
                episode: k,
                cumulative_regret: total,
                certified: None,
            });
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub fn build_agent(
    spec: &AlgorithmSpec,
    mdp: &TabularMdp<f64>,
    episodes: usize,
    agent_seed: u64,
) -> Result<Box<dyn Agent<f64> + Send>> {
    let (s, a, h) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    Ok(match &spec.agent {
        AgentSpec::Eqo(schedule) => Box::new(EqoAgent::for_mdp(mdp, *schedule, spec.uniform)?),
        AgentSpec::Baseline(cfg) => match cfg.kind {
            BaselineKind::UcbviHoeffding | BaselineKind::UcbviBernstein => {
                Box::new(UcbviAgent::new(cfg, s, a, h, Some(episodes), spec.uniform)?)
            }
            BaselineKind::Psrl => Box::new(PsrlAgent::<f64>::new(s, a, h, agent_seed)),
            BaselineKind::Random => Box::new(RandomAgent::new(s, a, h, agent_seed)),
        },
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|x, y| (&x.algorithm, x.seed).cmp(&(&y.algorithm, y.seed)));
}

/// Runs every (algorithm, seed) pair of a regret experiment on `jobs` workers.
/// Records come back sorted by (algorithm, seed) whatever the schedule.
pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<Vec<RunRecord>> {
    config.validate()?;
    if config.algorithms.is_empty() {
        return Err(Error::Config(
            "no algorithm lines in the configuration".into(),
        ));
    }
    let mdp = config.env.build::<f64>()?;
    let vstar = value_iteration(&mdp);
    // surface agent construction errors before any run starts
    for alg in &config.algorithms {
        build_agent(alg, &mdp, config.episodes, 0)?;
    }
    let units: Vec<(&AlgorithmSpec, u64)> = config
        .algorithms
        .iter()
        .flat_map(|alg| config.seeds.iter().map(move |&seed| (alg, seed)))
        .collect();
    let run_unit = |&(alg, seed): &(&AlgorithmSpec, u64)| -> Result<RunRecord> {
        let (mut rng, agent_seed) = run_rngs(seed, &alg.name);
        let mut agent = build_agent(alg, &mdp, config.episodes, agent_seed)?;
        let checkpoints = run_agent(
            &mdp,
            &vstar,
            agent.as_mut(),
            config.episodes,
            config.record_stride,
            &mut rng,
        )?;
        Ok(RunRecord {
            algorithm: alg.name.clone(),
            seed,
            checkpoints,
            pac: None,
        })
    };
    let mut records =
        pool(jobs)?.install(|| units.par_iter().map(run_unit).collect::<Result<Vec<_>>>())?;
    sort_records(&mut records);
    Ok(records)
}

/// One (ε, δ)-EQO run with exact regret and certification bookkeeping.
pub fn run_pac_single(
    mdp: &TabularMdp<f64>,
    vstar: &ValueTables<f64>,
    mode: PacMode,
    episodes: usize,
    stride: usize,
    seed: u64,
) -> Result<RunRecord> {
    let PacMode {
        epsilon,
        delta,
        task,
    } = mode;
    let (mut rng, _) = run_rngs(seed, PAC_ALGORITHM);
    let mut meter = RegretMeter::new(mdp, vstar);
    let mut total = 0.0;
    let mut out = Vec::new();
    let mut summary = PacSummary {
        task,
        episodes_run: 0,
        uncertified: 0,
        unsound: 0,
        certified_episode: None,
        certified_regret: None,
    };
    let mut failure = None;
    let stop = task == PacTask::Bpi;
    run_pac_episodes(mdp, epsilon, delta, episodes, stop, &mut rng, |ep| {
        let r = match meter.regret(ep.policy) {
            Ok(r) => r,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        total += r;
        summary.episodes_run = ep.k;
        if ep.certified {
            if r > epsilon {
                summary.unsound += 1;
            }
            if summary.certified_episode.is_none() {
                summary.certified_episode = Some(ep.k);
                summary.certified_regret = Some(r);
            }
        } else {
            summary.uncertified += 1;
        }
        let last = ep.k == episodes || (stop && ep.certified);
        if ep.k % stride == 0 || last {
            out.push(Checkpoint {
                episode: ep.k,
                cumulative_regret: total,
                certified: Some(ep.certified),
            });
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RunRecord {
        algorithm: PAC_ALGORITHM.to_string(),
        seed,
        checkpoints: out,
        pac: Some(summary),
    })
}

/// Runs the PAC task of `config` for every seed.
pub fn run_pac_experiment(config: &ExperimentConfig, jobs: usize) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let pac = config
        .pac
        .ok_or_else(|| Error::Config("PAC runs need pac_epsilon and pac_delta".into()))?;
    let mdp = config.env.build::<f64>()?;
    let vstar = value_iteration(&mdp);
    let mut records = pool(jobs)?.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| {
                run_pac_single(
                    &mdp,
                    &vstar,
                    pac,
                    config.episodes,
                    config.record_stride,
                    seed,
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;
    sort_records(&mut records);
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub algorithm: String,
    pub episode: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1); 0 for a single seed.
    pub std: f64,
    pub num_seeds: usize,
}

/// Mean and sample standard deviation across seeds, per algorithm and checkpoint.
/// Output is independent of record order.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<AggregateRow>> {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|x, y| (&x.algorithm, x.seed).cmp(&(&y.algorithm, y.seed)));
    let mut rows = Vec::new();
    for group in sorted.chunk_by(|x, y| x.algorithm == y.algorithm) {
        let grid: Vec<usize> = group[0].checkpoints.iter().map(|c| c.episode).collect();
        for r in group {
            if r.checkpoints
                .iter()
                .map(|c| c.episode)
                .ne(grid.iter().copied())
            {
                return Err(Error::Config(format!(
                    "{}: seed {} has a different checkpoint grid than seed {}",
                    r.algorithm, r.seed, group[0].seed
                )));
            }
        }
        let n = group.len();
        for (i, &episode) in grid.iter().enumerate() {
            let values = group.iter().map(|r| r.checkpoints[i].cumulative_regret);
            let mean = values.clone().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            rows.push(AggregateRow {
                algorithm: group[0].algorithm.clone(),
                episode,
                mean,
                std,
                num_seeds: n,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{gap_mdp, riverswim};
    use crate::mdp::Trajectory;

    struct Oracle(Policy);

    impl Agent<f64> for Oracle {
        fn policy(&mut self, _k: usize) -> Policy {
            self.0.clone()
        }
        fn observe(&mut self, _t: &Trajectory<f64>) {}
    }

    fn record(alg: &str, seed: u64, regrets: &[(usize, f64)]) -> RunRecord {
        RunRecord {
            algorithm: alg.into(),
            seed,
            checkpoints: regrets
                .iter()
                .map(|&(episode, r)| Checkpoint {
                    episode,
                    cumulative_regret: r,
                    certified: None,
                })
                .collect(),
            pac: None,
        }
    }

    #[test]
    fn oracle_has_zero_regret() {
        let mdp = riverswim::<f64>(5, 12).unwrap();
        let vstar = value_iteration(&mdp);
        let mut oracle = Oracle(vstar.greedy.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cps = run_agent(&mdp, &vstar, &mut oracle, 250, 100, &mut rng).unwrap();
        assert_eq!(
            cps.iter().map(|c| c.episode).collect::<Vec<_>>(),
            vec![100, 200, 250]
        );
        assert!(cps.iter().all(|c| c.cumulative_regret == 0.0));
    }

    #[test]
    fn random_policy_regret_on_gap_mdp() {
        // a uniformly random policy stays on the optimal path w.p. 2^-(H-1)
        let depth = 6;
        let mdp = gap_mdp::<f64>(depth, 0.02).unwrap();
        let vstar = value_iteration(&mdp);
        let mut agent = RandomAgent::new(mdp.num_states(), 2, depth, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = 2000;
        let cps = run_agent(&mdp, &vstar, &mut agent, k, k, &mut rng).unwrap();
        let per_episode = cps[0].cumulative_regret / k as f64;
        let floor = 0.48 * (1.0 - 0.5f64.powi(depth as i32 - 1));
        assert!(per_episode >= floor * 0.95, "{per_episode} vs {floor}");
    }

    #[test]
    fn stream_derivation_is_per_algorithm() {
        let (mut a, sa) = run_rngs(7, "eqo");
        let (mut b, sb) = run_rngs(7, "eqo");
        let (mut c, _) = run_rngs(7, "psrl");
        assert_eq!(sa, sb);
        let (x, y, z): (u64, u64, u64) = (a.random(), b.random(), c.random());
        assert_eq!(x, y);
        assert_ne!(x, z);
        assert_eq!(fnv1a(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn aggregate_two_seeds() {
        let recs = vec![
            record("x", 2, &[(1, 3.0), (2, 5.0)]),
            record("x", 1, &[(1, 1.0), (2, 1.0)]),
            record("y", 1, &[(1, 4.0)]),
        ];
        let rows = aggregate(&recs).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].mean, 2.0);
        assert!((rows[0].std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(rows[1].mean, 3.0);
        assert_eq!(rows[2].std, 0.0);
        assert_eq!(rows[2].num_seeds, 1);
        let mut rev = recs.clone();
        rev.reverse();
        assert_eq!(aggregate(&rev).unwrap(), rows);
    }

    #[test]
    fn aggregate_rejects_mismatched_grids() {
        let recs = vec![record("x", 1, &[(1, 0.0)]), record("x", 2, &[(2, 0.0)])];
        assert!(aggregate(&recs).is_err());
        assert!(aggregate(&[]).unwrap().is_empty());
    }

    #[test]
    fn experiment_is_sorted_and_reproducible() {
        let cfg = ExperimentConfig::parse(
            "env = riverswim states=4\nhorizon = 6\nepisodes = 30\nseeds = 3,1\nrecord_stride = 10\n\
             algorithm = random\nalgorithm = eqo-anytime delta=0.1\n",
        )
        .unwrap();
        let a = run_experiment(&cfg, 1).unwrap();
        let b = run_experiment(&cfg, 3).unwrap();
        assert_eq!(a, b);
        let keys: Vec<_> = a.iter().map(|r| (r.algorithm.as_str(), r.seed)).collect();
        assert_eq!(
            keys,
            vec![
                ("eqo-anytime", 1),
                ("eqo-anytime", 3),
                ("random", 1),
                ("random", 3)
            ]
        );
        for r in &a {
            assert!(r
                .checkpoints
                .windows(2)
                .all(|w| w[0].cumulative_regret <= w[1].cumulative_regret));
        }
    }

    #[test]
    fn bpi_stops_at_first_certification() {
        let mdp = crate::envs::two_state::<f64>(2).unwrap();
        let vstar = value_iteration(&mdp);
        let rec = run_pac_single(
            &mdp,
            &vstar,
            PacMode {
                epsilon: 2.0,
                delta: 1.0,
                task: PacTask::Bpi,
            },
            20,
            5,
            1,
        )
        .unwrap();
        let s = rec.pac.unwrap();
        // twenty episodes are far too few to certify
        assert_eq!(s.certified_episode, None);
        assert_eq!(s.uncertified, 20);
        assert_eq!(rec.checkpoints.len(), 4);
        assert!(rec.checkpoints.iter().all(|c| c.certified == Some(false)));
    }
}
