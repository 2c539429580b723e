//! Acceptance checks with measured values.
//!
//! Each criterion runs a group of [`Check`]s and reports how long it took.
//! Statistical checks that must hold at every point of a grid use
//! Bonferroni-adjusted normal quantiles so the whole family has 95%
//! coverage; checks that allow a fraction of misses use plain 95% intervals.

use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bounds::{
    balas_grouped_ehrenfest, balas_horizon, balas_lower_bounds, balas_stationary_residual,
    balas_stationary_vector, build_w_and_alpha, infinite_population_recursion, linear_limit,
    lower_bound_chain, lower_bound_linear, markov_tail_bound, matrix_norm_2,
    one_comma_lambda_recursion, rls_exp_tail_bound, rls_w_norm_2, rls_wwt_lambda_max,
    symmetric_tridiagonal_eigenvalues, toeplitz_tridiagonal_spectrum, upper_bound_jensen,
    AssociatedChain, BoundTrajectory,
};
use crate::error::Result;
use crate::kernels::{
    binomial, block_gamma, lower_bounds_for_kernel, planted_two_sat, point_mutation_gamma,
    vcp_block_params, BalasTop, Genotype, LowerBoundPreset, MutationKernel,
};
use crate::levels::{BoundMatrix, PopulationVector};
use crate::linalg::Matrix;
use crate::problems::{
    balas_scp, onemax, two_sat_instance, unimodal_path, vcp_triangles, BalasShape, Preset,
    ProblemInstance,
};
use crate::simulator::{run_many, AlgorithmConfig, Ensemble, InitRule, Variant};
use crate::stats::{MeanEstimate, ProportionEstimate, Z95};

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Deliberate defects for exercising the failure paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Lowers one entry of the OneMax point-mutation matrix so that it is
    /// no longer monotone.
    CorruptGamma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Fewer Monte-Carlo runs; intervals widen by `sqrt(N_full / N_quick)`.
    pub quick: bool,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            quick: false,
            fault: None,
        }
    }
}

const QUICK_DIVISOR: u64 = 10;
const QUICK_FLOOR: u64 = 200;

impl VerifyOptions {
    /// Run count for a check that uses `full` runs normally.
    pub fn runs(&self, full: u64) -> u64 {
        if self.quick {
            (full / QUICK_DIVISOR).max(QUICK_FLOOR).min(full)
        } else {
            full
        }
    }

    /// Factor by which interval half-widths grow in quick mode.
    pub fn tolerance_scale(&self, full: u64) -> f64 {
        (full as f64 / self.runs(full) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub measured: String,
}

impl Check {
    fn new(label: impl Into<String>, passed: bool, measured: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            passed,
            measured: measured.into(),
        }
    }

    fn error(label: impl Into<String>, e: impl fmt::Display) -> Self {
        Self::new(label, false, format!("error: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line: verdict, title, time, and the failing checks if any.
    pub fn summary(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut line = format!(
            "[{verdict}] criterion {:>2}: {} ({}/{} checks, {:.1} s)",
            self.id,
            self.title,
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len(),
            self.elapsed.as_secs_f64()
        );
        let failed: Vec<String> = self
            .failed_checks()
            .map(|c| format!("{} [{}]", c.label, c.measured))
            .collect();
        if !failed.is_empty() {
            line.push_str(" failing: ");
            line.push_str(&failed.join("; "));
        }
        line
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(
            f,
            "[{verdict}] criterion {}: {} ({:.1} s)",
            self.id,
            self.title,
            self.elapsed.as_secs_f64()
        )?;
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "    {mark} {}: {}", c.label, c.measured)?;
        }
        Ok(())
    }
}

/// Two-sided normal quantile giving family-wise 95% coverage over `k`
/// comparisons.
pub fn bonferroni_z(k: usize) -> f64 {
    let k = k.max(1) as f64;
    Normal::standard().inverse_cdf(1.0 - 0.05 / (2.0 * k))
}

fn title(id: u8) -> &'static str {
    match id {
        1 => "exactness at lambda = 1",
        2 => "VCP G(8), s = 2, lambda in {1, 2, 10}",
        3 => "VCP G(8), lambda = 100, s in {1, 2, 10}",
        4 => "tournament size ordering of the infinite-population recursion",
        5 => "spectral identities",
        6 => "RLS tail on the unimodal path",
        7 => "2-SAT walk and gambler's ruin",
        8 => "set-cover family stationary vector and horizon",
        9 => "OneMax upper bound and (1+1) EA dominance",
        _ => "property suite",
    }
}

fn budget(id: u8) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(10)),
        2 => Some(Duration::from_secs(120)),
        3 => Some(Duration::from_secs(300)),
        6 | 10 => Some(Duration::from_secs(60)),
        _ => None,
    }
}

/// Runs criterion `id` (1 to 10).
pub fn run_criterion(id: u8, opts: &VerifyOptions) -> CriterionReport {
    let start = Instant::now();
    let mut checks = match id {
        1 => criterion_exactness(opts),
        2 => criterion_fig2(opts),
        3 => criterion_fig3(opts),
        4 => criterion_tournament_order(),
        5 => criterion_spectral(),
        6 => criterion_rls_tail(opts),
        7 => criterion_two_sat(opts),
        8 => criterion_balas(opts),
        9 => criterion_onemax_upper(opts),
        10 => criterion_properties(opts),
        _ => vec![Check::new(
            "known criterion",
            false,
            format!("no criterion {id}"),
        )],
    };
    let elapsed = start.elapsed();
    if let (Some(limit), false) = (budget(id), opts.quick) {
        checks.push(Check::new(
            format!("runtime < {} s", limit.as_secs()),
            elapsed < limit,
            format!("{:.2} s", elapsed.as_secs_f64()),
        ));
    }
    CriterionReport {
        id,
        title: title(id),
        checks,
        elapsed,
    }
}

pub fn verify_all(opts: &VerifyOptions) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|&id| run_criterion(id, opts)).collect()
}

fn max_gap(a: &BoundTrajectory, b: &BoundTrajectory) -> f64 {
    a.iterations
        .iter()
        .zip(&b.iterations)
        .flat_map(|((_, u), (_, v))| u.iter().zip(v).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn onemax_gamma(n: usize, q: f64, opts: &VerifyOptions) -> Result<BoundMatrix> {
    let mut gamma = point_mutation_gamma(n, q)?;
    if opts.fault == Some(Fault::CorruptGamma) {
        // push gamma_{1,1} below gamma_{0,1}
        let below = gamma.entry(0, 1) - 0.25;
        gamma.set_entry(1, 1, below);
    }
    Ok(gamma)
}

/// `Pr{level of b^(t) >= j}` for the single-individual chain of point
/// mutation on OneMax, computed over all `2^n` genotypes.
fn onemax_point_genotype_chain(n: usize, q: f64, t_max: u64) -> Vec<Vec<f64>> {
    let states = 1usize << n;
    let mut p = vec![0.0; states];
    p[0] = 1.0;
    let flip = (1.0 - q) / n as f64;
    let mut out = Vec::with_capacity(t_max as usize + 1);
    for t in 0..=t_max {
        let mut cumulative = vec![0.0; n];
        for (g, &mass) in p.iter().enumerate() {
            for c in cumulative.iter_mut().take(g.count_ones() as usize) {
                *c += mass;
            }
        }
        out.push(cumulative);
        if t == t_max {
            break;
        }
        let mut next = vec![0.0; states];
        for (g, &mass) in p.iter().enumerate() {
            next[g] += q * mass;
            for k in 0..n {
                next[g ^ (1 << k)] += flip * mass;
            }
        }
        p = next;
    }
    out
}

fn criterion_exactness(opts: &VerifyOptions) -> Vec<Check> {
    const N_FULL: u64 = 10_000;
    const T: u64 = 100;
    let (n, q) = (3, 0.25);
    let mut checks = Vec::new();
    let gamma = match onemax_gamma(n, q, opts) {
        Ok(g) => g,
        Err(e) => return vec![Check::error("build gamma", e)],
    };
    let linear = match lower_bound_linear(&gamma, &PopulationVector::zeros(n), T) {
        Ok(b) => b,
        Err(e) => return vec![Check::error("linear lower bound", e)],
    };
    let closed = linear
        .closed_form
        .as_ref()
        .map_or(f64::NAN, |c| c.max_discrepancy);
    checks.push(Check::new(
        "closed form vs iteration <= 1e-10",
        closed <= 1e-10,
        format!("max |diff| = {closed:.2e}"),
    ));
    let mut p0 = vec![0.0; n + 1];
    p0[0] = 1.0;
    let problem = onemax(n).expect("n >= 1");
    match lower_bound_chain(&gamma, problem.partition(), &p0, T) {
        Ok(chain) => {
            let gap = max_gap(&linear.trajectory, &chain);
            checks.push(Check::new(
                "chain bound vs iteration <= 1e-10",
                gap <= 1e-10,
                format!("max |diff| = {gap:.2e}"),
            ));
        }
        Err(e) => checks.push(Check::error("chain bound", e)),
    }
    let exact = onemax_point_genotype_chain(n, q, T);
    let gap = linear
        .trajectory
        .iterations
        .iter()
        .zip(&exact)
        .flat_map(|((_, u), v)| u.iter().zip(v).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "iteration vs genotype chain marginals <= 1e-10",
        gap <= 1e-10,
        format!("max |diff| = {gap:.2e}"),
    ));

    let runs = opts.runs(N_FULL);
    let config = AlgorithmConfig::new(
        Variant::Ea { lambda: 1, s: 1 },
        MutationKernel::Point { q },
        problem,
    )
    .with_t_max(T)
    .with_seed(opts.seed);
    match run_many(&config, runs) {
        Ok(e) => {
            let z = bonferroni_z((T as usize + 1) * n);
            let mut misses = Vec::new();
            for (t, u) in &linear.trajectory.iterations {
                for j in 1..=n {
                    let est = e.level_probability_z(j, *t, z);
                    if !est.contains(u[j - 1]) {
                        misses.push(format!(
                            "t={t} j={j} p={:.4} bound={:.4}",
                            est.p_hat,
                            u[j - 1]
                        ));
                    }
                }
            }
            checks.push(Check::new(
                format!("Monte-Carlo N={runs} inside family-wise 95% CI"),
                misses.is_empty(),
                if misses.is_empty() {
                    format!("{} points, z = {z:.3}", (T + 1) as usize * n)
                } else {
                    format!("{} misses, first {}", misses.len(), misses[0])
                },
            ));
        }
        Err(e) => checks.push(Check::error("Monte-Carlo", e)),
    }
    checks
}

fn vcp_setup() -> Result<(ProblemInstance, MutationKernel, BoundMatrix)> {
    let (problem, kernel) = vcp_triangles(8, 0.1)?;
    let (gamma, _) = problem.bound_pair(&kernel)?;
    Ok((problem, kernel, gamma))
}

fn ea_ensemble(
    problem: &ProblemInstance,
    kernel: &MutationKernel,
    lambda: usize,
    s: usize,
    t_max: u64,
    runs: u64,
    seed: u64,
) -> Result<Ensemble> {
    let config = AlgorithmConfig::new(Variant::Ea { lambda, s }, kernel.clone(), problem.clone())
        .with_t_max(t_max)
        .with_seed(seed);
    run_many(&config, runs)
}

fn criterion_fig2(opts: &VerifyOptions) -> Vec<Check> {
    const N_FULL: u64 = 1000;
    const T: u64 = 150;
    let (problem, kernel, gamma) = match vcp_setup() {
        Ok(v) => v,
        Err(e) => return vec![Check::error("VCP preset", e)],
    };
    let m = problem.m();
    let z0 = PopulationVector::zeros(m);
    let lower = match lower_bound_linear(&gamma, &z0, T) {
        Ok(b) => b.trajectory,
        Err(e) => return vec![Check::error("linear lower bound", e)],
    };
    let upper = match upper_bound_jensen(&gamma, &z0, 2, T) {
        Ok(b) => b,
        Err(e) => return vec![Check::error("Jensen upper bound", e)],
    };
    let runs = opts.runs(N_FULL);
    let mut ensembles = Vec::new();
    for lambda in [1, 2, 10] {
        match ea_ensemble(&problem, &kernel, lambda, 2, T, runs, opts.seed) {
            Ok(e) => ensembles.push(e),
            Err(e) => return vec![Check::error(format!("simulate lambda={lambda}"), e)],
        }
    }
    let points = T as usize + 1;
    let mut checks = Vec::new();

    let inside = (0..=T)
        .filter(|&t| {
            ensembles[0]
                .level_probability(m, t)
                .contains(lower.at(t).unwrap()[m - 1])
        })
        .count();
    let frac = inside as f64 / points as f64;
    checks.push(Check::new(
        "lambda=1 matches lower bound within 95% CI at >= 95% of t",
        frac >= 0.95,
        format!("{inside}/{points} = {:.1}%", 100.0 * frac),
    ));

    let z = bonferroni_z(points);
    let misses: Vec<String> = (0..=T)
        .filter_map(|t| {
            let est = ensembles[0].level_probability_z(m, t, z);
            let u = lower.at(t).unwrap()[m - 1];
            (!est.contains(u)).then(|| format!("t={t} p={:.4} bound={u:.4}", est.p_hat))
        })
        .collect();
    checks.push(Check::new(
        "lambda=1 matches lower bound within family-wise 95% CI at every t",
        misses.is_empty(),
        format!("{} misses (z = {z:.3}) {}", misses.len(), misses.join(", ")),
    ));

    let worst = (0..=T)
        .map(|t| {
            let est = ensembles[2].level_probability_z(m, t, z);
            (
                est.p_hat - est.half_width() - upper.at(t).unwrap()[m - 1],
                t,
            )
        })
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
    checks.push(Check::new(
        "lambda=10 <= upper bound + CI half-width at every t",
        worst.0 <= 0.0,
        format!("max (p - hw - upper) = {:.4} at t={}", worst.0, worst.1),
    ));

    let z = bonferroni_z(2 * points);
    let mut disorder = Vec::new();
    for t in 0..=T {
        let est: Vec<ProportionEstimate> = ensembles
            .iter()
            .map(|e| e.level_probability_z(m, t, z))
            .collect();
        for k in 0..2 {
            let (a, b) = (&est[k], &est[k + 1]);
            if a.p_hat > b.p_hat + a.half_width() + b.half_width() {
                disorder.push(t);
            }
        }
    }
    checks.push(Check::new(
        "series ordered by lambda (CI-consistent)",
        disorder.is_empty(),
        format!("{} violations over {points} t", disorder.len()),
    ));
    checks
}

fn criterion_fig3(opts: &VerifyOptions) -> Vec<Check> {
    const N_FULL: u64 = 1000;
    const T: u64 = 150;
    let (problem, kernel, gamma) = match vcp_setup() {
        Ok(v) => v,
        Err(e) => return vec![Check::error("VCP preset", e)],
    };
    let m = problem.m();
    let z0 = PopulationVector::zeros(m);
    let runs = opts.runs(N_FULL);
    let sizes = [1usize, 2, 10];
    let points = T as usize + 1;
    let mut ensembles = Vec::new();
    let mut uppers = Vec::new();
    for s in sizes {
        match ea_ensemble(&problem, &kernel, 100, s, T, runs, opts.seed) {
            Ok(e) => ensembles.push(e),
            Err(e) => return vec![Check::error(format!("simulate s={s}"), e)],
        }
        match upper_bound_jensen(&gamma, &z0, s as u32, T) {
            Ok(u) => uppers.push(u),
            Err(e) => return vec![Check::error(format!("upper bound s={s}"), e)],
        }
    }
    let mut checks = Vec::new();
    let z = bonferroni_z(2 * points);
    let mut disorder = Vec::new();
    for t in 0..=T {
        let est: Vec<ProportionEstimate> = ensembles
            .iter()
            .map(|e| e.level_probability_z(m, t, z))
            .collect();
        for k in 0..2 {
            let (a, b) = (&est[k], &est[k + 1]);
            if a.p_hat > b.p_hat + a.half_width() + b.half_width() {
                disorder.push(format!("t={t} s={}", sizes[k]));
            }
        }
    }
    checks.push(Check::new(
        "curves non-decreasing in s (CI-consistent)",
        disorder.is_empty(),
        if disorder.is_empty() {
            format!("{points} t, z = {z:.3}")
        } else {
            format!("{} violations, first {}", disorder.len(), disorder[0])
        },
    ));
    let z = bonferroni_z(sizes.len() * points);
    for (k, s) in sizes.iter().enumerate() {
        let worst = (0..=T)
            .map(|t| {
                let est = ensembles[k].level_probability_z(m, t, z);
                (est.ci_lo - uppers[k].at(t).unwrap()[m - 1], t)
            })
            .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
        checks.push(Check::new(
            format!("s={s} below its upper bound (CI-consistent)"),
            worst.0 <= 0.0,
            format!("max (ci_lo - upper) = {:.4} at t={}", worst.0, worst.1),
        ));
    }
    let final_means: Vec<String> = ensembles
        .iter()
        .zip(sizes)
        .map(|(e, s)| format!("s={s}: {:.3}", e.level_probability(m, T).p_hat))
        .collect();
    checks.push(Check::new(
        format!("proportion at t={T}"),
        true,
        final_means.join(", "),
    ));
    checks
}

/// Initial vector for the tournament comparison: strictly inside `(0, 1)`
/// and non-increasing.
pub fn tournament_u0(m: usize) -> Vec<f64> {
    (1..=m)
        .map(|j| 0.5 * (m + 1 - j) as f64 / (m + 1) as f64)
        .collect()
}

fn criterion_tournament_order() -> Vec<Check> {
    let gamma = match vcp_setup() {
        Ok((_, _, g)) => g,
        Err(e) => return vec![Check::error("VCP preset", e)],
    };
    let m = gamma.m();
    let premise = (1..=m).all(|j| gamma.entry(m, j) > gamma.entry(0, j));
    let u0 = tournament_u0(m);
    let (small, large) = match (
        infinite_population_recursion(&gamma, &u0, 2, 100),
        infinite_population_recursion(&gamma, &u0, 10, 100),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return vec![Check::error("recursion", e)],
    };
    let mut min_gap = f64::INFINITY;
    let mut at = (0, 0);
    for t in 1..=100u64 {
        let (a, b) = (small.at(t).unwrap(), large.at(t).unwrap());
        for j in 0..m {
            if b[j] - a[j] < min_gap {
                min_gap = b[j] - a[j];
                at = (t, j + 1);
            }
        }
    }
    vec![
        Check::new("premise gamma_mj > gamma_0j", premise, format!("m = {m}")),
        Check::new(
            "u(s=10) > u(s=2) componentwise for 1 <= t <= 100",
            min_gap > 0.0,
            format!("min gap {min_gap:.3e} at t={} j={}", at.0, at.1),
        ),
    ]
}

/// The RLS matrix `W` of the unimodal preset.
fn rls_w(n: usize, ell: usize) -> Result<Matrix> {
    let a = lower_bounds_for_kernel(LowerBoundPreset::RlsUnimodal { n, ell })?;
    Ok(build_w_and_alpha(&a).0)
}

fn dense_spectrum(n: usize, delta: f64, sigma: f64, tau: f64) -> Vec<f64> {
    let t = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            delta
        } else if i == j + 1 {
            sigma
        } else if j == i + 1 {
            tau
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = if sigma == tau {
        t.symmetric_eigen().eigenvalues.iter().copied().collect()
    } else {
        t.complex_eigenvalues().iter().map(|c| c.re).collect()
    };
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Parameter sets for the Toeplitz cross-check: `(delta, sigma, tau)`.
pub const TOEPLITZ_CASES: [(f64, f64, f64); 5] = [
    (0.0, 1.0, 1.0),
    (2.0, 1.0, 1.0),
    (-0.5, 0.3, 0.3),
    (1.0, 0.9, 1.1),
    (0.25, 0.5, 0.4),
];

fn criterion_spectral() -> Vec<Check> {
    let (n, ell) = (10, 5);
    let mut checks = Vec::new();
    let w = match rls_w(n, ell) {
        Ok(w) => w,
        Err(e) => return vec![Check::error("RLS W", e)],
    };
    let closed = rls_w_norm_2(n, ell).expect("valid n, ell");
    let power = matrix_norm_2(&w).expect("square");
    checks.push(Check::new(
        "power iteration ||W||_2 equals the closed form within 1e-10",
        (power - closed).abs() <= 1e-10,
        format!(
            "power {power:.10}, closed form {closed:.10}, |diff| {:.2e}",
            (power - closed).abs()
        ),
    ));
    // the closed form is the norm of the Toeplitz matrix that replaces the
    // corner entry of W W^T
    let m = ell - 1;
    let nf = n as f64;
    let diag = vec![(1.0 + (nf - 1.0).powi(2)) / (nf * nf); m];
    let off = vec![(nf - 1.0) / (nf * nf); m - 1];
    let surrogate = symmetric_tridiagonal_eigenvalues(&diag, &off)[0];
    let lambda = rls_wwt_lambda_max(n, ell).expect("valid n, ell");
    checks.push(Check::new(
        "closed form equals the Toeplitz surrogate's top eigenvalue",
        (surrogate - lambda).abs() <= 1e-10,
        format!("|diff| {:.2e}", (surrogate - lambda).abs()),
    ));
    checks.push(Check::new(
        "closed form bounds the true norm from above",
        power <= closed,
        format!("{power:.10} <= {closed:.10}"),
    ));

    let mut worst = (0.0f64, String::new());
    for size in 1..=50 {
        for &(d, s, t) in &TOEPLITZ_CASES {
            let formula = match toeplitz_tridiagonal_spectrum(size, d, s, t) {
                Ok(v) => v,
                Err(e) => return vec![Check::error("toeplitz spectrum", e)],
            };
            let dense = dense_spectrum(size, d, s, t);
            let gap = formula
                .iter()
                .zip(&dense)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if gap > worst.0 {
                worst = (gap, format!("n={size} ({d}, {s}, {t})"));
            }
        }
    }
    checks.push(Check::new(
        "Toeplitz spectrum vs dense eigensolve within 1e-9, n <= 50",
        worst.0 <= 1e-9,
        format!("max |diff| {:.2e} {}", worst.0, worst.1),
    ));
    checks
}

fn criterion_rls_tail(opts: &VerifyOptions) -> Vec<Check> {
    const N_FULL: u64 = 10_000;
    const T: u64 = 3000;
    let (n, ell) = (12, 13);
    let problem = match unimodal_path(n, ell) {
        Ok(p) => p,
        Err(e) => return vec![Check::error("unimodal preset", e)],
    };
    let runs = opts.runs(N_FULL);
    let config = AlgorithmConfig::new(Variant::Rls, MutationKernel::Rls, problem)
        .with_t_max(T)
        .with_seed(opts.seed);
    let e = match run_many(&config, runs) {
        Ok(e) => e,
        Err(e) => return vec![Check::error("simulate", e)],
    };
    let mut tails = vec![0u64; T as usize + 2];
    for r in &e.runs {
        // runs still unfinished count towards every t
        let h = r.hit_iteration.map_or(T as usize + 1, |h| h as usize);
        tails[..h].iter_mut().for_each(|c| *c += 1);
    }
    let tail = |t: u64| tails[t as usize] as f64 / runs as f64;
    let (mut cor_checked, mut cor_worst) = (0usize, (f64::NEG_INFINITY, 0u64));
    let (mut mk_checked, mut mk_worst) = (0usize, (f64::NEG_INFINITY, 0u64));
    let markov_from = (n * (ell - 1)) as u64;
    for t in 0..=T {
        let c = rls_exp_tail_bound(n, ell, t).expect("valid n, ell");
        if c < 1.0 {
            cor_checked += 1;
            if tail(t) - c > cor_worst.0 {
                cor_worst = (tail(t) - c, t);
            }
        }
        if t >= markov_from {
            let mb = markov_tail_bound(n, ell, t).expect("valid n, ell");
            mk_checked += 1;
            if tail(t) - mb > mk_worst.0 {
                mk_worst = (tail(t) - mb, t);
            }
        }
    }
    let mean = MeanEstimate::from_samples(
        e.runs
            .iter()
            .filter_map(|r| r.hit_iteration)
            .map(|h| h as f64),
        Z95,
    );
    vec![
        Check::new(
            "empirical tail <= exponential tail bound where the bound < 1",
            cor_checked > 0 && cor_worst.0 <= 0.0,
            format!(
                "{cor_checked} t, max (tail - bound) = {:.4} at t={}",
                cor_worst.0, cor_worst.1
            ),
        ),
        Check::new(
            "empirical tail <= n(ell-1)/t for t >= n(ell-1)",
            mk_checked > 0 && mk_worst.0 <= 0.0,
            format!(
                "{mk_checked} t, max (tail - bound) = {:.4} at t={}",
                mk_worst.0, mk_worst.1
            ),
        ),
        Check::new(
            "mean hitting time",
            true,
            format!(
                "{:.1} +- {:.1} (N = {runs}, unfinished {})",
                mean.mean,
                mean.half_width(),
                tails[T as usize + 1]
            ),
        ),
    ]
}

/// Exact gambler's-ruin quantities for `m` levels: the first `t` with
/// absorption probability at least `1/2`, and that probability.
pub fn gamblers_ruin_median(m: usize) -> Result<(u64, f64)> {
    let a = lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m })?;
    let chain = AssociatedChain::from_lower_bounds(&a)?;
    let mut p0 = vec![0.0; m + 1];
    p0[0] = 1.0;
    let t = chain
        .first_time_reaching(&p0, m, 0.5, 1_000_000)
        .expect("the walk is absorbed eventually");
    Ok((t, chain.distribution_at(&p0, t)[m]))
}

fn criterion_two_sat(opts: &VerifyOptions) -> Vec<Check> {
    const N_PATHS: u64 = 4000;
    let sizes = [10usize, 20, 40];
    let mut checks = Vec::new();
    let mut medians = Vec::new();
    for &m in &sizes {
        match gamblers_ruin_median(m) {
            Ok(v) => medians.push(v),
            Err(e) => return vec![Check::error("gambler's ruin", e)],
        }
    }
    let ratios: Vec<f64> = sizes
        .iter()
        .zip(&medians)
        .map(|(&m, &(t, _))| t as f64 / (m * m) as f64)
        .collect();
    let c_hat = ratios.iter().copied().fold(0.0, f64::max);
    let c_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (c_hat - c_min) / c_min;
    checks.push(Check::new(
        "median absorption time <= c m^2 with one c, spread <= 25%",
        spread <= 0.25
            && sizes
                .iter()
                .zip(&medians)
                .all(|(&m, &(t, _))| t as f64 <= c_hat * (m * m) as f64),
        format!(
            "t = {:?}, t/m^2 = {:?}, c = {c_hat:.4}, spread {:.1}%",
            medians.iter().map(|p| p.0).collect::<Vec<_>>(),
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>(),
            100.0 * spread
        ),
    ));

    let paths = opts.runs(N_PATHS);
    let z = bonferroni_z(sizes.len());
    let mut misses = Vec::new();
    let mut measured = Vec::new();
    for (k, (&m, &(t, exact))) in sizes.iter().zip(&medians).enumerate() {
        let a = lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m }).expect("m >= 1");
        let chain = AssociatedChain::from_lower_bounds(&a).expect("monotone");
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64);
        let absorbed = (0..paths)
            .filter(|_| chain.sample_path(0, t, &mut rng).last() == Some(&m))
            .count() as u64;
        let est = ProportionEstimate::new(absorbed, paths, z);
        measured.push(format!("m={m}: {:.3} vs {exact:.3}", est.p_hat));
        if !est.contains(exact) {
            misses.push(m);
        }
    }
    checks.push(Check::new(
        "sampled walk agrees with exact powering (family-wise 95% CI)",
        misses.is_empty(),
        measured.join(", "),
    ));

    let n = 20;
    let budget = (c_hat * (n * n) as f64).ceil() as u64;
    let (formula, planted) = match planted_two_sat(n, 3 * n, opts.seed) {
        Ok(v) => v,
        Err(e) => return vec![Check::error("planted formula", e)],
    };
    let start = planted.complement();
    let problem = match two_sat_instance(formula, planted) {
        Ok(p) => p,
        Err(e) => return vec![Check::error("2-SAT instance", e)],
    };
    let kernel = problem.default_kernel();
    let config = AlgorithmConfig::new(Variant::Ea { lambda: 1, s: 1 }, kernel, problem)
        .with_init(InitRule::Fixed(start))
        .with_t_max(budget)
        .with_seed(opts.seed);
    match run_many(&config, paths) {
        Ok(e) => {
            let est = e.hit_by(budget);
            let gr = medians[1].1;
            checks.push(Check::new(
                format!("planted walk n={n} satisfied within c n^2 = {budget} with prob >= 1/2"),
                est.p_hat >= 0.5,
                format!("{:.3} +- {:.3}", est.p_hat, est.half_width()),
            ));
            checks.push(Check::new(
                "planted walk dominates the gambler's-ruin chain",
                est.ci_hi >= gr,
                format!("{:.3} (ci_hi {:.3}) vs chain {gr:.3}", est.p_hat, est.ci_hi),
            ));
        }
        Err(e) => checks.push(Check::error("2-SAT walk", e)),
    }
    checks
}

fn criterion_balas(opts: &VerifyOptions) -> Vec<Check> {
    const N_FULL: u64 = 2000;
    let mut checks = Vec::new();
    for n in [8usize, 12, 16] {
        let v = match balas_stationary_vector(n) {
            Ok(v) => v,
            Err(e) => return vec![Check::error("stationary vector", e)],
        };
        let m = n / 2;
        let q = 1.0 / (n as f64 + 1.0);
        let residual = balas_stationary_residual(n, &v).unwrap_or(f64::INFINITY);
        checks.push(Check::new(
            format!("n={n}: stationary vector satisfies its linear system (<= 1e-10)"),
            residual <= 1e-10,
            format!("residual {residual:.3e}"),
        ));
        let pessimistic = balas_lower_bounds(n, q, BalasTop::Pessimistic).expect("valid n, q");
        let (w, alpha) = build_w_and_alpha(&pessimistic);
        match linear_limit(&w, &alpha) {
            Some(solved) => {
                let gap = v
                    .iter()
                    .zip(&solved)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                checks.push(Check::new(
                    format!("n={n}: stationary vector equals alpha (I - W)^-1 (<= 1e-9)"),
                    gap <= 1e-9,
                    format!("max |diff| {gap:.3e}, v_1 = {:.4}", v[0]),
                ));
                let grouped = balas_grouped_ehrenfest(n).expect("even n");
                let gap = grouped
                    .iter()
                    .zip(&solved)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                checks.push(Check::new(
                    format!("n={n}: grouped Ehrenfest vector equals alpha (I - W)^-1"),
                    gap <= 1e-9,
                    format!("max |diff| {gap:.3e}"),
                ));
            }
            None => checks.push(Check::new(
                format!("n={n}: solve (I - W)"),
                false,
                "singular",
            )),
        }
        let v_m = v[m - 1];
        let exact = binomial(n as u32, m as u32) / 2f64.powi(n as i32 - 1);
        checks.push(Check::new(
            format!("n={n}: v_m = C(n, n/2) / 2^(n-1)"),
            v_m == exact,
            format!("{v_m} vs {exact}"),
        ));

        let (c, t) = balas_horizon(n, v_m).expect("valid n");
        let safe = balas_lower_bounds(n, q, BalasTop::Safe).expect("valid n, q");
        let u_m = match lower_bound_linear(&safe, &PopulationVector::zeros(m), t) {
            Ok(b) => b.trajectory.last().expect("non-empty")[m - 1],
            Err(e) => {
                checks.push(Check::error(format!("n={n}: linear bound"), e));
                continue;
            }
        };
        checks.push(Check::new(
            format!("n={n}: lower bound reaches v_m/2 by t = {t}"),
            u_m >= v_m / 2.0,
            format!("u_m = {u_m:.4}, v_m/2 = {:.4}, c = {c:.4}", v_m / 2.0),
        ));
        let problem = balas_scp(n, BalasShape::Linear, BalasTop::Safe).expect("even n");
        let runs = opts.runs(N_FULL);
        let config = AlgorithmConfig::new(
            Variant::Ea { lambda: 20, s: 2 },
            MutationKernel::Point { q },
            problem,
        )
        .with_t_max(t)
        .with_seed(opts.seed);
        match run_many(&config, runs) {
            Ok(e) => {
                let est = e.hit_by(t);
                checks.push(Check::new(
                    format!("n={n}: hit frequency by t >= bound - CI"),
                    est.p_hat >= u_m - est.half_width(),
                    format!("{:.4} +- {:.4} vs {u_m:.4}", est.p_hat, est.half_width()),
                ));
            }
            Err(e) => checks.push(Check::error(format!("n={n}: simulate"), e)),
        }
    }
    checks
}

fn criterion_onemax_upper(opts: &VerifyOptions) -> Vec<Check> {
    const N_FULL: u64 = 5000;
    const T: u64 = 100;
    let (n, lambda) = (20usize, 10usize);
    let p_m = 1.0 / n as f64;
    let mut checks = Vec::new();
    let gamma = match block_gamma(n, 1.0 - p_m, p_m) {
        Ok(g) => g,
        Err(e) => return vec![Check::error("bitwise gamma", e)],
    };
    let problem = onemax(n).expect("n >= 1");
    let p0 = problem.uniform_level_distribution().expect("closed form");
    let z0 = PopulationVector::from_level_distribution(&p0).expect("distribution");
    let p = match one_comma_lambda_recursion(&gamma, z0.values(), lambda as u32, T) {
        Ok(p) => p,
        Err(e) => return vec![Check::error("(1,lambda) recursion", e)],
    };
    let runs = opts.runs(N_FULL);
    let kernel = MutationKernel::Bitwise { p_m };
    let config = AlgorithmConfig::new(
        Variant::Ea { lambda, s: 2 },
        kernel.clone(),
        problem.clone(),
    )
    .with_init(InitRule::SharedUniform)
    .with_t_max(T + 1)
    .with_seed(opts.seed)
    .recording_population();
    match run_many(&config, runs) {
        Ok(e) => {
            let z = bonferroni_z(T as usize + 1);
            let mut worst = (f64::NEG_INFINITY, 0);
            for t in 0..=T {
                let samples = e.proportions(n, t + 1).expect("populations recorded");
                let est = MeanEstimate::from_samples(samples, z);
                let bound = 0.74 * p.at(t).unwrap()[n - 1] + 5.0 / n as f64;
                let excess = est.mean - est.half_width() - bound;
                if excess > worst.0 {
                    worst = (excess, t);
                }
            }
            checks.push(Check::new(
                "E[z_n(t+1)] <= 0.74 P_n(t) + 5/n + CI half-width",
                worst.0 <= 0.0,
                format!("max (mean - hw - bound) = {:.4} at t={}", worst.0, worst.1),
            ));
        }
        Err(e) => checks.push(Check::error("simulate EA", e)),
    }
    let budget = T * lambda as u64;
    let config = AlgorithmConfig::new(Variant::OnePlusOne, kernel, problem)
        .with_init(InitRule::Uniform)
        .with_t_max(budget)
        .with_seed(opts.seed);
    match run_many(&config, runs) {
        Ok(e) => {
            let z = bonferroni_z(T as usize + 1);
            let mut worst = (f64::NEG_INFINITY, 0);
            for t in 0..=T {
                let q = e.level_probability_z(n, t * lambda as u64, z);
                let deficit = p.at(t).unwrap()[n - 1] - q.ci_hi;
                if deficit > worst.0 {
                    worst = (deficit, t);
                }
            }
            checks.push(Check::new(
                "(1+1) EA at t*lambda dominates (1,lambda) EA at t (CI)",
                worst.0 <= 0.0,
                format!("max (P - ci_hi) = {:.4} at t={}", worst.0, worst.1),
            ));
        }
        Err(e) => checks.push(Check::error("simulate (1+1) EA", e)),
    }
    checks
}

/// The bound matrices the presets ship with, each with whether the
/// parameter conditions promise monotonicity.
fn preset_matrices(opts: &VerifyOptions) -> Result<Vec<(String, BoundMatrix, bool)>> {
    let mut out = Vec::new();
    for n in [4usize, 10] {
        let q = 1.0 / (n as f64 + 1.0);
        out.push((
            format!("onemax point n={n} q=1/(n+1)"),
            onemax_gamma(n, q, opts)?,
            true,
        ));
        out.push((
            format!("onemax point n={n} q=0.5"),
            point_mutation_gamma(n, 0.5)?,
            true,
        ));
        out.push((
            format!("onemax point n={n} q=0.1"),
            point_mutation_gamma(n, 0.1)?,
            n as f64 * 0.1 + 0.1 >= 1.0,
        ));
        for p_m in [1.0 / n as f64, 0.5] {
            out.push((
                format!("onemax bitwise n={n} pm={p_m}"),
                block_gamma(n, 1.0 - p_m, p_m)?,
                true,
            ));
        }
    }
    for p_m in [0.05, 0.1, 0.5, 0.9] {
        let (r, rt) = vcp_block_params(p_m)?;
        out.push((format!("vcp m=8 pm={p_m}"), block_gamma(8, r, rt)?, true));
    }
    out.push((
        "block d=2 r=0.9 r~=0.3".into(),
        block_gamma(2, 0.9, 0.3)?,
        true,
    ));
    out.push((
        "rls unimodal n=10 ell=5".into(),
        lower_bounds_for_kernel(LowerBoundPreset::RlsUnimodal { n: 10, ell: 5 })?,
        true,
    ));
    out.push((
        "sat walk m=10".into(),
        lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m: 10 })?,
        true,
    ));
    for n in [8usize, 12] {
        for (q, label) in [(1.0 / (n as f64 + 1.0), "1/(n+1)"), (0.5, "0.5")] {
            for top in [BalasTop::Pessimistic, BalasTop::Safe] {
                out.push((
                    format!("balas n={n} q={label} {top:?}"),
                    balas_lower_bounds(n, q, top)?,
                    true,
                ));
            }
        }
    }
    Ok(out)
}

/// A random preset for the property suite.
fn random_preset<R: Rng>(rng: &mut R) -> Result<Preset> {
    let text = match rng.random_range(0..6) {
        0 => {
            let n = rng.random_range(2..=10);
            let q = rng.random_range(1.0 / (n as f64 + 1.0)..0.9);
            format!("onemax:n={n},q={q}")
        }
        1 => {
            let n = rng.random_range(2..=10);
            let p_m = rng.random_range(0.01..=0.5);
            format!("onemax:n={n},pm={p_m}")
        }
        2 => {
            let m = rng.random_range(1..=6);
            let p_m = rng.random_range(0.01..=0.5);
            format!("vcp:m={m},pm={p_m}")
        }
        3 => {
            let n = rng.random_range(2..=10);
            let ell = rng.random_range(2..=n + 1);
            format!("unimodal:n={n},ell={ell}")
        }
        4 => {
            let n = 2 * rng.random_range(2..=6);
            let q = rng.random_range(1.0 / (n as f64 + 1.0)..0.9);
            format!("balas:n={n},q={q},top=safe")
        }
        _ => {
            let n = rng.random_range(3..=10);
            let seed = rng.random_range(0..1000);
            format!("2sat:n={n},seed={seed}")
        }
    };
    Preset::parse(&text)
}

/// Failures of the randomized invariants on one preset.
fn preset_properties(preset: &Preset, s: u32, lambda: usize, seed: u64) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let problem = &preset.problem;
    let (lower, upper) = problem.bound_pair(&preset.kernel)?;
    let m = problem.m();
    let start = problem.level(&Genotype::zeros(problem.n()));
    let mut p0 = vec![0.0; m + 1];
    p0[start] = 1.0;
    let z0 = PopulationVector::from_level_distribution(&p0)?;

    let linear = lower_bound_linear(&lower, &z0, 200)?.trajectory;
    let jensen = upper_bound_jensen(&upper, &z0, s, 200)?;
    for ((t, l), (_, u)) in linear.iterations.iter().zip(&jensen.iterations) {
        if let Some(j) = (0..m).find(|&j| l[j] > u[j] + 1e-12) {
            bad.push(format!("sandwich t={t} j={}", j + 1));
            break;
        }
    }
    let partition = problem.scan_empty_levels();
    if partition.all_levels_nonempty() {
        let chain = lower_bound_chain(&lower, &partition, &p0, 200)?;
        let gap = max_gap(&linear, &chain);
        if gap > 1e-10 {
            bad.push(format!("linear vs chain {gap:.2e}"));
        }
    }

    let config = AlgorithmConfig::new(
        Variant::Ea {
            lambda,
            s: s as usize,
        },
        preset.kernel.clone(),
        problem.clone(),
    )
    .with_init(InitRule::Uniform)
    .with_t_max(15)
    .with_seed(seed)
    .recording_population();
    let e = run_many(&config, 20)?;
    let s = if lambda == 1 { 1 } else { s as i32 };
    for t in 0..=15 {
        for r in &e.runs {
            let z = r.population_vector(t).expect("recorded");
            if z.validate().is_err() || !z.is_lattice_point() {
                bad.push(format!("population vector off Z_lambda at t={t}"));
            }
        }
        for j in 1..=m {
            let zs = e.proportions(j, t).expect("recorded");
            let k = zs.len() as f64;
            let lhs = zs.iter().map(|z| (1.0 - z).powi(s)).sum::<f64>() / k;
            let rhs = (1.0 - zs.iter().sum::<f64>() / k).powi(s);
            if lhs < rhs - 1e-12 {
                bad.push(format!("Jensen direction t={t} j={j}"));
            }
        }
    }
    Ok(bad)
}

fn criterion_properties(opts: &VerifyOptions) -> Vec<Check> {
    let mut checks = Vec::new();
    match preset_matrices(opts) {
        Ok(list) => {
            let mut wrong = Vec::new();
            for (name, matrix, promised) in &list {
                if matrix.is_monotone() != *promised {
                    let located = matrix
                        .monotone_violation()
                        .map_or_else(|| "monotone".to_string(), |v| v.to_string());
                    wrong.push(format!("{name}: {located}"));
                }
            }
            checks.push(Check::new(
                "preset matrices monotone exactly when promised",
                wrong.is_empty(),
                if wrong.is_empty() {
                    format!("{} matrices", list.len())
                } else {
                    format!(
                        "{} of {} wrong: {}",
                        wrong.len(),
                        list.len(),
                        wrong.join("; ")
                    )
                },
            ));
        }
        Err(e) => checks.push(Check::error("preset matrices", e)),
    }
    match point_mutation_gamma(4, 0.1) {
        Ok(g) => checks.push(Check::new(
            "point mutation with q < 1/(n+1) is not monotone",
            !g.is_monotone(),
            g.monotone_violation()
                .map_or("monotone".into(), |v| v.to_string()),
        )),
        Err(e) => checks.push(Check::error("point gamma", e)),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut failures = Vec::new();
    let presets = 100;
    for k in 0..presets {
        let s = rng.random_range(1..=5u32);
        let lambda = rng.random_range(1..=8usize);
        let seed = rng.random();
        let outcome = random_preset(&mut rng).and_then(|p| {
            preset_properties(&p, s, lambda, seed).map(|bad| (p.problem.name().to_string(), bad))
        });
        match outcome {
            Ok((_, bad)) if bad.is_empty() => {}
            Ok((name, bad)) => failures.push(format!("#{k} {name}: {}", bad.join(", "))),
            Err(e) => failures.push(format!("#{k}: {e}")),
        }
    }
    checks.push(Check::new(
        format!("sandwich, linear/chain agreement, Jensen direction, Z_lambda on {presets} random presets"),
        failures.is_empty(),
        if failures.is_empty() {
            "all hold".to_string()
        } else {
            format!("{} failing: {}", failures.len(), failures.join("; "))
        },
    ));
    checks
}
