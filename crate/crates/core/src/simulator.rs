//! Monte-Carlo engines for the non-elitist EA, the (1,lambda) EA, the
//! (1+1) EA and RLS.
//!
//! Every run owns a ChaCha8 generator seeded with the experiment seed and
//! switched to the stream numbered by the run index, so results do not
//! depend on scheduling or thread count.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{Genotype, MutationKernel};
use crate::levels::PopulationVector;
use crate::problems::ProblemInstance;
use crate::stats::{MeanEstimate, ProportionEstimate, Z95};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Generational EA: `lambda` independent tournament-then-mutate draws.
    Ea { lambda: usize, s: usize },
    /// Best of `lambda` offspring of the single parent, ties uniform.
    OneCommaLambda { lambda: usize },
    /// Offspring replaces the parent only on strict improvement.
    OnePlusOne,
    /// One uniform bit flip per step, accepted on ties.
    Rls,
}

impl Variant {
    pub fn lambda(&self) -> usize {
        match *self {
            Variant::Ea { lambda, .. } | Variant::OneCommaLambda { lambda } => lambda,
            Variant::OnePlusOne | Variant::Rls => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitRule {
    AllZeros,
    /// Each individual drawn uniformly and independently.
    Uniform,
    /// One uniform genotype copied into every slot.
    SharedUniform,
    Fixed(Genotype),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig {
    pub variant: Variant,
    pub kernel: MutationKernel,
    pub problem: ProblemInstance,
    pub init: InitRule,
    pub t_max: u64,
    pub seed: u64,
    /// Record `|X^(t) ∩ H_j|` for every generation (EA only).
    pub record_population: bool,
}

impl AlgorithmConfig {
    pub fn new(variant: Variant, kernel: MutationKernel, problem: ProblemInstance) -> Self {
        Self {
            variant,
            kernel,
            problem,
            init: InitRule::AllZeros,
            t_max: 100,
            seed: 0,
            record_population: false,
        }
    }

    pub fn with_init(mut self, init: InitRule) -> Self {
        self.init = init;
        self
    }

    pub fn with_t_max(mut self, t_max: u64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn recording_population(mut self) -> Self {
        self.record_population = true;
        self
    }

    /// Checks parameters and normalises `s` to 1 when `lambda = 1`, where
    /// tournament selection has no effect.
    pub fn validated(mut self) -> Result<Self> {
        self.kernel.validate()?;
        match &mut self.variant {
            Variant::Ea { lambda, s } => {
                if *lambda < 1 || *s < 1 {
                    return Err(Error::InvalidParameter(format!(
                        "EA needs lambda >= 1 and s >= 1, got lambda = {lambda}, s = {s}"
                    )));
                }
                if *lambda == 1 {
                    *s = 1;
                }
            }
            Variant::OneCommaLambda { lambda } if *lambda < 1 => {
                return Err(Error::InvalidParameter("lambda must be >= 1".into()));
            }
            _ => {}
        }
        if self.variant.lambda() > u16::MAX as usize {
            return Err(Error::InvalidParameter("lambda above 65535".into()));
        }
        if let InitRule::Fixed(g) = &self.init {
            if g.len() != self.problem.n() {
                return Err(Error::Dimension(format!(
                    "initial genotype has {} bits, problem has n = {}",
                    g.len(),
                    self.problem.n()
                )));
            }
        }
        Ok(self)
    }

    fn rng(&self, run: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(run);
        rng
    }
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStatistics {
    pub run: u64,
    pub seed: u64,
    /// Level of the tracked individual for `t = 0..=t_max`: `g_1^(t)` for
    /// the EA, the parent for the other algorithms.
    pub tracked_levels: Vec<u16>,
    /// First iteration whose population (or parent/offspring) holds an
    /// optimum; `None` if not reached within `t_max`.
    pub hit_iteration: Option<u64>,
    pub hit_evaluations: Option<u64>,
    pub lambda: usize,
    /// `[t][j - 1] = |X^(t) ∩ H_j|` when requested.
    pub population_counts: Option<Vec<Vec<u16>>>,
}

impl RunStatistics {
    pub fn indicator(&self, t: u64, j: usize) -> bool {
        self.tracked_levels[t as usize] as usize >= j
    }

    pub fn population_vector(&self, t: u64) -> Option<PopulationVector> {
        let counts = self.population_counts.as_ref()?.get(t as usize)?;
        // turn cumulative counts back into per-level counts
        let m = counts.len();
        let mut per_level = vec![0usize; m + 1];
        per_level[0] = self.lambda - counts.first().copied().unwrap_or(0) as usize;
        for j in 1..=m {
            let next = if j < m { counts[j] as usize } else { 0 };
            per_level[j] = counts[j - 1] as usize - next;
        }
        PopulationVector::from_level_counts(&per_level).ok()
    }
}

struct Tracker<'a> {
    problem: &'a ProblemInstance,
    stats: RunStatistics,
    evaluations: u64,
}

impl<'a> Tracker<'a> {
    fn new(config: &'a AlgorithmConfig, run: u64) -> Self {
        let len = config.t_max as usize + 1;
        Self {
            problem: &config.problem,
            stats: RunStatistics {
                run,
                seed: config.seed,
                tracked_levels: Vec::with_capacity(len),
                hit_iteration: None,
                hit_evaluations: None,
                lambda: config.variant.lambda(),
                population_counts: config.record_population.then(|| Vec::with_capacity(len)),
            },
            evaluations: 0,
        }
    }

    /// Counts one fitness evaluation of `g` generated at iteration `t`.
    fn evaluated(&mut self, g: &Genotype, t: u64) -> f64 {
        self.evaluations += 1;
        if self.stats.hit_iteration.is_none() && self.problem.is_optimal(g) {
            self.stats.hit_iteration = Some(t);
            self.stats.hit_evaluations = Some(self.evaluations);
        }
        self.problem.fitness(g)
    }

    fn track(&mut self, level: usize) {
        self.stats.tracked_levels.push(level as u16);
    }

    fn record_population(&mut self, levels: &[usize]) {
        if let Some(all) = self.stats.population_counts.as_mut() {
            let m = self.problem.m();
            let mut counts = vec![0u16; m + 1];
            for &l in levels {
                counts[l] += 1;
            }
            // suffix sums over j = 1..=m
            let mut cumulative = vec![0u16; m];
            let mut acc = 0u16;
            for j in (1..=m).rev() {
                acc += counts[j];
                cumulative[j - 1] = acc;
            }
            all.push(cumulative);
        }
    }
}

fn initial_population<R: Rng + ?Sized>(
    config: &AlgorithmConfig,
    size: usize,
    rng: &mut R,
) -> Vec<Genotype> {
    let n = config.problem.n();
    match &config.init {
        InitRule::AllZeros => vec![Genotype::zeros(n); size],
        InitRule::Uniform => (0..size).map(|_| Genotype::random(n, rng)).collect(),
        InitRule::SharedUniform => vec![Genotype::random(n, rng); size],
        InitRule::Fixed(g) => vec![g.clone(); size],
    }
}

fn run_ea_inner(config: &AlgorithmConfig, run: u64, lambda: usize, s: usize) -> RunStatistics {
    let mut rng = config.rng(run);
    let problem = &config.problem;
    let fitness = |g: &Genotype| problem.fitness(g);
    let mut tracker = Tracker::new(config, run);

    let mut pop = initial_population(config, lambda, &mut rng);
    let mut fit: Vec<f64> = pop.iter().map(|g| tracker.evaluated(g, 0)).collect();
    let mut levels: Vec<usize> = pop.iter().map(|g| problem.level(g)).collect();
    tracker.track(levels[0]);
    tracker.record_population(&levels);

    let mut next = pop.clone();
    let mut next_fit = fit.clone();
    for t in 1..=config.t_max {
        for k in 0..lambda {
            let mut best = rng.random_range(0..lambda);
            for _ in 1..s {
                let c = rng.random_range(0..lambda);
                if fit[c] > fit[best] {
                    best = c;
                }
            }
            next[k].clone_from(&pop[best]);
            config.kernel.mutate(&mut next[k], fitness, &mut rng);
            next_fit[k] = tracker.evaluated(&next[k], t);
            levels[k] = problem.level(&next[k]);
        }
        std::mem::swap(&mut pop, &mut next);
        std::mem::swap(&mut fit, &mut next_fit);
        tracker.track(levels[0]);
        tracker.record_population(&levels);
    }
    tracker.stats
}

fn run_one_comma_lambda_inner(config: &AlgorithmConfig, run: u64, lambda: usize) -> RunStatistics {
    let mut rng = config.rng(run);
    let problem = &config.problem;
    let fitness = |g: &Genotype| problem.fitness(g);
    let mut tracker = Tracker::new(config, run);

    let mut parent = initial_population(config, 1, &mut rng)
        .pop()
        .expect("one individual");
    tracker.evaluated(&parent, 0);
    tracker.track(problem.level(&parent));
    let mut child = parent.clone();
    let mut best = parent.clone();
    for t in 1..=config.t_max {
        let mut best_fit = f64::NEG_INFINITY;
        let mut ties = 0u32;
        for _ in 0..lambda {
            child.clone_from(&parent);
            config.kernel.mutate(&mut child, fitness, &mut rng);
            let f = tracker.evaluated(&child, t);
            if f > best_fit {
                best_fit = f;
                ties = 1;
                best.clone_from(&child);
            } else if f == best_fit {
                // reservoir sampling keeps each tied offspring with equal chance
                ties += 1;
                if rng.random_range(0..ties) == 0 {
                    best.clone_from(&child);
                }
            }
        }
        std::mem::swap(&mut parent, &mut best);
        tracker.track(problem.level(&parent));
    }
    tracker.stats
}

fn run_elitist_inner(config: &AlgorithmConfig, run: u64, accept_ties: bool) -> RunStatistics {
    let mut rng = config.rng(run);
    let problem = &config.problem;
    let fitness = |g: &Genotype| problem.fitness(g);
    let mut tracker = Tracker::new(config, run);

    let mut x = initial_population(config, 1, &mut rng)
        .pop()
        .expect("one individual");
    let mut fx = tracker.evaluated(&x, 0);
    tracker.track(problem.level(&x));
    let mut y = x.clone();
    let n = x.len();
    for t in 1..=config.t_max {
        y.clone_from(&x);
        if accept_ties {
            if n > 0 {
                y.flip(rng.random_range(0..n));
            }
        } else {
            config.kernel.mutate(&mut y, fitness, &mut rng);
        }
        let fy = tracker.evaluated(&y, t);
        if fy > fx || (accept_ties && fy == fx) {
            std::mem::swap(&mut x, &mut y);
            fx = fy;
        }
        tracker.track(problem.level(&x));
    }
    tracker.stats
}

/// Runs the configured algorithm once, as run number `run`.
pub fn run_single(config: &AlgorithmConfig, run: u64) -> RunStatistics {
    match config.variant {
        Variant::Ea { lambda, s } => {
            run_ea_inner(config, run, lambda, if lambda == 1 { 1 } else { s })
        }
        Variant::OneCommaLambda { lambda } => run_one_comma_lambda_inner(config, run, lambda),
        Variant::OnePlusOne => run_elitist_inner(config, run, false),
        Variant::Rls => run_elitist_inner(config, run, true),
    }
}

fn expect_variant(config: &AlgorithmConfig, ok: bool, name: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} called with variant {:?}",
            config.variant
        )))
    }
}

pub fn run_ea(config: &AlgorithmConfig) -> Result<RunStatistics> {
    expect_variant(
        config,
        matches!(config.variant, Variant::Ea { .. }),
        "run_ea",
    )?;
    Ok(run_single(&config.clone().validated()?, 0))
}

pub fn run_one_comma_lambda(config: &AlgorithmConfig) -> Result<RunStatistics> {
    expect_variant(
        config,
        matches!(config.variant, Variant::OneCommaLambda { .. }),
        "run_one_comma_lambda",
    )?;
    Ok(run_single(&config.clone().validated()?, 0))
}

pub fn run_one_plus_one(config: &AlgorithmConfig) -> Result<RunStatistics> {
    expect_variant(
        config,
        config.variant == Variant::OnePlusOne,
        "run_one_plus_one",
    )?;
    Ok(run_single(&config.clone().validated()?, 0))
}

pub fn run_rls(config: &AlgorithmConfig) -> Result<RunStatistics> {
    expect_variant(config, config.variant == Variant::Rls, "run_rls")?;
    Ok(run_single(&config.clone().validated()?, 0))
}

/// Independent runs `0..runs` in parallel, returned in run order.
pub fn run_many(config: &AlgorithmConfig, runs: u64) -> Result<Ensemble> {
    if runs == 0 {
        return Err(Error::InvalidParameter("run count must be positive".into()));
    }
    let config = config.clone().validated()?;
    let results: Vec<RunStatistics> = (0..runs)
        .into_par_iter()
        .map(|r| run_single(&config, r))
        .collect();
    Ok(Ensemble {
        m: config.problem.m(),
        t_max: config.t_max,
        seed: config.seed,
        runs: results,
    })
}

/// A batch of runs with the estimators built on top of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub m: usize,
    pub t_max: u64,
    pub seed: u64,
    pub runs: Vec<RunStatistics>,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// `Pr{tracked individual in H_j}` at iteration `t`, with a 95% CI.
    pub fn level_probability(&self, j: usize, t: u64) -> ProportionEstimate {
        self.level_probability_z(j, t, Z95)
    }

    pub fn level_probability_z(&self, j: usize, t: u64, z: f64) -> ProportionEstimate {
        let hits = self.runs.iter().filter(|r| r.indicator(t, j)).count() as u64;
        ProportionEstimate::new(hits, self.runs.len() as u64, z)
    }

    /// Empirical `Pr{T > t}` for the first hitting iteration `T`.
    pub fn hit_tail(&self, t: u64) -> ProportionEstimate {
        let late = self
            .runs
            .iter()
            .filter(|r| r.hit_iteration.is_none_or(|h| h > t))
            .count() as u64;
        ProportionEstimate::new(late, self.runs.len() as u64, Z95)
    }

    /// Fraction of runs that hit an optimum by iteration `t`.
    pub fn hit_by(&self, t: u64) -> ProportionEstimate {
        let hit = self
            .runs
            .iter()
            .filter(|r| r.hit_iteration.is_some_and(|h| h <= t))
            .count() as u64;
        ProportionEstimate::new(hit, self.runs.len() as u64, Z95)
    }

    /// `z_j^(t)` of every run; needs recorded populations.
    pub fn proportions(&self, j: usize, t: u64) -> Option<Vec<f64>> {
        self.runs
            .iter()
            .map(|r| {
                let counts = r.population_counts.as_ref()?;
                Some(counts[t as usize][j - 1] as f64 / r.lambda as f64)
            })
            .collect()
    }

    pub fn mean_proportion(&self, j: usize, t: u64) -> Option<MeanEstimate> {
        Some(MeanEstimate::from_samples(self.proportions(j, t)?, Z95))
    }

    pub fn write_csv<W: Write>(&self, mut out: W, level: usize) -> Result<()> {
        writeln!(
            out,
            "# seed={} runs={} level={level}",
            self.seed,
            self.runs.len()
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["run_id", "t", "indicator", "hit_time"])?;
        for r in &self.runs {
            let hit = r
                .hit_iteration
                .map_or_else(|| "NA".to_string(), |h| h.to_string());
            for t in 0..r.tracked_levels.len() as u64 {
                w.write_record([
                    r.run.to_string(),
                    t.to_string(),
                    u8::from(r.indicator(t, level)).to_string(),
                    hit.clone(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Empirical `Pr{tracked individual in H_j}` at each requested iteration.
pub fn estimate_level_probability(
    runs: u64,
    config: &AlgorithmConfig,
    level: usize,
    iterations: &[u64],
) -> Result<Vec<(u64, ProportionEstimate)>> {
    if runs < 30 {
        return Err(Error::InvalidParameter(format!(
            "need at least 30 runs, got {runs}"
        )));
    }
    if level > config.problem.m() {
        return Err(Error::InvalidParameter(format!("level {level} above m")));
    }
    if let Some(&t) = iterations.iter().find(|&&t| t > config.t_max) {
        return Err(Error::InvalidParameter(format!(
            "iteration {t} beyond t_max"
        )));
    }
    let ensemble = run_many(config, runs)?;
    Ok(iterations
        .iter()
        .map(|&t| (t, ensemble.level_probability(level, t)))
        .collect())
}

/// Empirical `Pr{T > t}`.
pub fn estimate_hit_time_tail(
    runs: u64,
    config: &AlgorithmConfig,
    t: u64,
) -> Result<ProportionEstimate> {
    if t > config.t_max {
        return Err(Error::InvalidParameter(format!("t = {t} beyond t_max")));
    }
    Ok(run_many(config, runs)?.hit_tail(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::onemax;

    fn onemax_config(variant: Variant, kernel: MutationKernel) -> AlgorithmConfig {
        AlgorithmConfig::new(variant, kernel, onemax(8).unwrap())
            .with_t_max(40)
            .with_seed(11)
    }

    #[test]
    fn same_seed_same_statistics() {
        let cfg = onemax_config(
            Variant::Ea { lambda: 6, s: 2 },
            MutationKernel::Point { q: 0.2 },
        )
        .recording_population();
        let a = run_many(&cfg, 8).unwrap();
        let b = run_many(&cfg, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.runs[0].tracked_levels, a.runs[1].tracked_levels);
    }

    #[test]
    fn one_plus_one_never_worsens() {
        let cfg = onemax_config(Variant::OnePlusOne, MutationKernel::Bitwise { p_m: 0.125 });
        for r in run_many(&cfg, 20).unwrap().runs {
            assert!(r.tracked_levels.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn population_vectors_lie_on_the_lattice() {
        let cfg = onemax_config(
            Variant::Ea { lambda: 7, s: 3 },
            MutationKernel::Point { q: 0.2 },
        )
        .with_init(InitRule::Uniform)
        .recording_population();
        let e = run_many(&cfg, 4).unwrap();
        for r in &e.runs {
            for t in 0..=40 {
                let z = r.population_vector(t).unwrap();
                assert!(z.validate().is_ok());
            }
        }
    }

    #[test]
    fn lambda_one_forces_s_one() {
        let cfg = onemax_config(
            Variant::Ea { lambda: 1, s: 5 },
            MutationKernel::Point { q: 0.2 },
        );
        let v = cfg.validated().unwrap();
        assert_eq!(v.variant, Variant::Ea { lambda: 1, s: 1 });
    }

    #[test]
    fn too_few_runs_rejected() {
        let cfg = onemax_config(Variant::Rls, MutationKernel::Rls);
        assert!(estimate_level_probability(10, &cfg, 8, &[5]).is_err());
        assert!(run_many(&cfg, 0).is_err());
    }

    #[test]
    fn tail_at_zero_is_one_from_zeros() {
        let cfg = onemax_config(Variant::Rls, MutationKernel::Rls);
        let tail = estimate_hit_time_tail(50, &cfg, 0).unwrap();
        assert_eq!(tail.p_hat, 1.0);
        assert!(tail.degenerate);
    }
}
