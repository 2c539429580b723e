//! Library results against independent computations: exhaustive
//! enumeration, dense linear algebra from nalgebra, and seeded simulation
//! checked against exact recursions.

use std::cmp::Ordering;

use fitness_levels::bounds::{
    build_w_and_alpha, linear_limit, lower_bound_linear, matrix_norm_2, one_comma_lambda_recursion,
    toeplitz_tridiagonal_spectrum, AssociatedChain,
};
use fitness_levels::kernels::{
    block_gamma, lower_bounds_for_kernel, planted_two_sat, point_mutation_gamma, vcp_block_params,
    BalasTop, Genotype, LowerBoundPreset, MutationKernel,
};
use fitness_levels::linalg::Matrix;
use fitness_levels::problems::{
    balas_ground_fitness, balas_ground_set, balas_scp, onemax, two_sat_instance, unimodal_path,
    vcp_triangles, BalasShape, ProblemInstance,
};
use fitness_levels::simulator::{run_many, AlgorithmConfig, Ensemble, Variant};
use fitness_levels::stats::Z99;
use fitness_levels::verify::bonferroni_z;
use fitness_levels::{BoundMatrix, PopulationVector};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

fn dense(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn all_genotypes(n: usize) -> impl Iterator<Item = Genotype> {
    (0..1u64 << n).map(move |mask| Genotype::from_mask(mask, n))
}

/// `Pr{Mut(g) in H_j}` for `j = 0..=m` from an explicit outcome list.
fn cumulative_from_outcomes(
    problem: &ProblemInstance,
    outcomes: impl IntoIterator<Item = (Genotype, f64)>,
) -> Vec<f64> {
    let mut p = vec![0.0; problem.m() + 1];
    for (h, w) in outcomes {
        p[problem.level(&h)] += w;
    }
    AssociatedChain::cumulative(&p)
}

/// Every genotype's exact transition row must equal the matrix row of its
/// level, which also shows the operator is level-based.
fn assert_exact_gamma(
    problem: &ProblemInstance,
    gamma: &BoundMatrix,
    outcomes: impl Fn(&Genotype) -> Vec<(Genotype, f64)>,
) {
    for g in all_genotypes(problem.n()) {
        let i = problem.level(&g);
        let row = cumulative_from_outcomes(problem, outcomes(&g));
        for (j, &p) in row.iter().enumerate() {
            let expected = gamma.entry(i, j + 1);
            assert!(
                (p - expected).abs() < 1e-12,
                "{problem}: g={:?} level {i} j={}: enumerated {p}, matrix {expected}",
                g.bits(),
                j + 1
            );
        }
    }
}

fn bitwise_outcomes(g: &Genotype, p_m: f64) -> Vec<(Genotype, f64)> {
    let n = g.len();
    (0..1u64 << n)
        .map(|flips| {
            let k = flips.count_ones() as i32;
            let mut h = g.clone();
            (0..n)
                .filter(|b| flips >> b & 1 == 1)
                .for_each(|b| h.flip(b));
            (h, p_m.powi(k) * (1.0 - p_m).powi(n as i32 - k))
        })
        .collect()
}

#[test]
fn point_mutation_matrix_matches_enumeration() {
    for (n, q) in [(1, 0.3), (4, 0.2), (5, 1.0 / 6.0), (6, 0.05), (6, 0.9)] {
        let problem = onemax(n).unwrap();
        let gamma = point_mutation_gamma(n, q).unwrap();
        assert_exact_gamma(&problem, &gamma, |g| {
            let mut out = vec![(g.clone(), q)];
            out.extend((0..n).map(|k| {
                let mut h = g.clone();
                h.flip(k);
                (h, (1.0 - q) / n as f64)
            }));
            out
        });
    }
}

#[test]
fn bitwise_onemax_matrix_matches_enumeration() {
    for (n, p_m) in [(3, 0.1), (5, 0.2), (6, 1.0 / 6.0)] {
        let problem = onemax(n).unwrap();
        let (gamma, _) = problem
            .bound_pair(&MutationKernel::Bitwise { p_m })
            .unwrap();
        assert_exact_gamma(&problem, &gamma, |g| bitwise_outcomes(g, p_m));
    }
}

#[test]
fn triangle_matrix_matches_enumeration() {
    for (m, p_m) in [(1, 0.1), (2, 0.1), (2, 0.35), (3, 0.05)] {
        let (problem, kernel) = vcp_triangles(m, p_m).unwrap();
        let (gamma, _) = problem.bound_pair(&kernel).unwrap();
        let (r, rt) = vcp_block_params(p_m).unwrap();
        assert_eq!(gamma, block_gamma(m, r, rt).unwrap());
        assert_exact_gamma(&problem, &gamma, |g| bitwise_outcomes(g, p_m));
    }
}

#[test]
fn sampled_transitions_match_matrices() {
    // one representative per level; 10^5 draws each, 99% intervals
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let cases: Vec<(ProblemInstance, MutationKernel)> = vec![
        (onemax(6).unwrap(), MutationKernel::Point { q: 1.0 / 7.0 }),
        (onemax(5).unwrap(), MutationKernel::Bitwise { p_m: 0.2 }),
        vcp_triangles(3, 0.1).unwrap(),
    ];
    let draws = 100_000u64;
    for (problem, kernel) in cases {
        let (gamma, _) = problem.bound_pair(&kernel).unwrap();
        let m = problem.m();
        for i in 0..=m {
            let Some(g) = (0..1u64 << problem.n())
                .map(|mask| Genotype::from_mask(mask, problem.n()))
                .find(|g| problem.level(g) == i)
            else {
                continue;
            };
            let mut counts = vec![0u64; m + 1];
            for _ in 0..draws {
                let mut h = g.clone();
                kernel.mutate(&mut h, |x| problem.fitness(x), &mut rng);
                counts[problem.level(&h)] += 1;
            }
            let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / draws as f64).collect();
            for (j, &f) in AssociatedChain::cumulative(&freq).iter().enumerate() {
                let p = gamma.entry(i, j + 1);
                let half = Z99 * (p * (1.0 - p) / draws as f64).sqrt();
                assert!(
                    (f - p).abs() <= half + 1e-12,
                    "{problem} {}: i={i} j={}: {f} vs {p}",
                    kernel.name(),
                    j + 1
                );
            }
        }
    }
}

#[test]
fn unimodal_bounds_hold_for_every_genotype() {
    for (n, ell) in [(6, 4), (8, 6), (8, 9)] {
        let problem = unimodal_path(n, ell).unwrap();
        let (lower, upper) = problem.bound_pair(&MutationKernel::Rls).unwrap();
        for g in all_genotypes(n) {
            let i = problem.level(&g);
            let f = problem.fitness(&g);
            // one uniform flip; the algorithm keeps ties, the operator does not
            for keep_ties in [true, false] {
                let outcomes = (0..n).map(|k| {
                    let mut h = g.clone();
                    h.flip(k);
                    let fh = problem.fitness(&h);
                    let accept = fh > f || (keep_ties && fh == f);
                    (if accept { h } else { g.clone() }, 1.0 / n as f64)
                });
                let row = cumulative_from_outcomes(&problem, outcomes);
                for (j, &p) in row.iter().enumerate() {
                    assert!(
                        lower.entry(i, j + 1) <= p + 1e-12,
                        "n={n} ell={ell} g={:?} j={}",
                        g.bits(),
                        j + 1
                    );
                    assert!(
                        p <= upper.entry(i, j + 1) + 1e-12,
                        "n={n} ell={ell} g={:?} j={}",
                        g.bits(),
                        j + 1
                    );
                }
            }
        }
    }
}

#[test]
fn sat_walk_bounds_hold_for_every_genotype() {
    for (n, seed) in [(6, 1), (8, 2), (10, 3)] {
        let (formula, planted) = planted_two_sat(n, 3 * n, seed).unwrap();
        let problem = two_sat_instance(formula.clone(), planted).unwrap();
        let (lower, _) = problem.bound_pair(&problem.default_kernel()).unwrap();
        for g in all_genotypes(n) {
            let i = problem.level(&g);
            let unsat: Vec<_> = formula.unsatisfied(&g).collect();
            let outcomes: Vec<(Genotype, f64)> = if unsat.is_empty() {
                vec![(g.clone(), 1.0)]
            } else {
                unsat
                    .iter()
                    .flat_map(|c| {
                        let w = 1.0 / (unsat.len() * c.0.len()) as f64;
                        c.0.iter().map(move |lit| (lit.var, w))
                    })
                    .map(|(var, w)| {
                        let mut h = g.clone();
                        h.flip(var);
                        (h, w)
                    })
                    .collect()
            };
            let row = cumulative_from_outcomes(&problem, outcomes);
            for (j, &p) in row.iter().enumerate() {
                assert!(
                    lower.entry(i, j + 1) <= p + 1e-12,
                    "n={n} g={:?} j={}",
                    g.bits(),
                    j + 1
                );
            }
        }
    }
}

#[test]
fn set_cover_unitation_form_orders_like_ground_set() {
    for n in [4, 6, 8] {
        let subsets = balas_ground_set(n).unwrap();
        for shape in [BalasShape::Linear, BalasShape::Curved] {
            let problem = balas_scp(n, shape, BalasTop::Safe).unwrap();
            let genotypes: Vec<Genotype> = all_genotypes(n).collect();
            let explicit: Vec<f64> = genotypes
                .iter()
                .map(|g| balas_ground_fitness(n, &subsets, g))
                .collect();
            let unitation: Vec<f64> = genotypes.iter().map(|g| problem.fitness(g)).collect();
            for a in 0..genotypes.len() {
                for b in 0..genotypes.len() {
                    assert_eq!(
                        explicit[a].partial_cmp(&explicit[b]),
                        unitation[a].partial_cmp(&unitation[b]),
                        "n={n} {shape:?}: {:?} vs {:?}",
                        genotypes[a].bits(),
                        genotypes[b].bits()
                    );
                }
                let best = explicit.iter().copied().fold(f64::MIN, f64::max);
                assert_eq!(explicit[a] == best, problem.is_optimal(&genotypes[a]));
            }
        }
    }
}

#[test]
fn set_cover_point_lower_bounds_hold_off_the_top() {
    // rows below m are exact; the safe top row is exact for the n/2 layer only
    let n = 8;
    let q = 1.0 / (n as f64 + 1.0);
    let problem = balas_scp(n, BalasShape::Linear, BalasTop::Safe).unwrap();
    let (lower, upper) = problem.bound_pair(&MutationKernel::Point { q }).unwrap();
    for g in all_genotypes(n).filter(|g| g.ones_count() <= n / 2) {
        let i = problem.level(&g);
        let mut outcomes = vec![(g.clone(), q)];
        outcomes.extend((0..n).map(|k| {
            let mut h = g.clone();
            h.flip(k);
            (h, (1.0 - q) / n as f64)
        }));
        let row = cumulative_from_outcomes(&problem, outcomes);
        for (j, &p) in row.iter().enumerate() {
            assert!(
                lower.entry(i, j + 1) <= p + 1e-12,
                "g={:?} j={}",
                g.bits(),
                j + 1
            );
            assert!(
                p <= upper.entry(i, j + 1) + 1e-12,
                "g={:?} j={}",
                g.bits(),
                j + 1
            );
        }
    }
}

#[test]
fn chain_powers_match_nalgebra() {
    let a = point_mutation_gamma(7, 0.2).unwrap();
    let chain = AssociatedChain::from_lower_bounds(&a).unwrap();
    let t_dense = dense(chain.transition());
    let mut p0 = vec![0.0; 8];
    p0[0] = 0.6;
    p0[3] = 0.4;
    let row = DMatrix::from_row_slice(1, 8, &p0);
    for t in [0u32, 1, 5, 17, 64] {
        let expected = &row * t_dense.pow(t);
        let got = chain.distribution_at(&p0, t as u64);
        for k in 0..8 {
            assert!((got[k] - expected[(0, k)]).abs() < 1e-13, "t={t} k={k}");
        }
    }
}

#[test]
fn spectral_norm_matches_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1usize, 2, 3, 7, 20] {
        for _ in 0..5 {
            let w = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let svd = dense(&w).singular_values();
            let expected = svd.max();
            let got = matrix_norm_2(&w).unwrap();
            assert!(
                (got - expected).abs() < 1e-9 * expected.max(1.0),
                "n={n}: {got} vs {expected}"
            );
        }
    }
    let a = lower_bounds_for_kernel(LowerBoundPreset::RlsUnimodal { n: 10, ell: 5 }).unwrap();
    let (w, _) = build_w_and_alpha(&a);
    let expected = dense(&w).singular_values().max();
    assert!((matrix_norm_2(&w).unwrap() - expected).abs() < 1e-10);
}

#[test]
fn toeplitz_spectrum_matches_dense_eigensolve() {
    for (delta, sigma, tau) in [
        (2.0f64, 1.0f64, 1.0f64),
        (0.0, 0.3, 1.7),
        (-1.0, 2.0, 0.5),
        (0.9, 0.1, 0.0),
    ] {
        for n in [1usize, 2, 5, 12, 30, 50] {
            // D^-1 M D with D = diag((sigma/tau)^(k/2)) is symmetric with
            // off-diagonal sqrt(sigma tau); when one side is zero M is
            // triangular and its spectrum is the diagonal
            let off = (sigma * tau).sqrt();
            let m = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
                0 => delta,
                1 => off,
                _ => 0.0,
            });
            let mut dense_ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
            dense_ev.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
            let closed = toeplitz_tridiagonal_spectrum(n, delta, sigma, tau).unwrap();
            assert_eq!(closed.len(), n);
            for (a, b) in closed.iter().zip(&dense_ev) {
                assert!(
                    (a - b).abs() < 1e-9,
                    "n={n} ({delta},{sigma},{tau}): {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn linear_limit_matches_lu_solve() {
    for a in [
        point_mutation_gamma(6, 0.3).unwrap(),
        lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m: 9 }).unwrap(),
        lower_bounds_for_kernel(LowerBoundPreset::BalasPoint {
            n: 10,
            q: 0.1,
            top: BalasTop::Safe,
        })
        .unwrap(),
    ] {
        let (w, alpha) = build_w_and_alpha(&a);
        let m = alpha.len();
        let system = (DMatrix::identity(m, m) - dense(&w)).transpose();
        let expected = system
            .lu()
            .solve(&nalgebra::DVector::from_vec(alpha.clone()))
            .unwrap();
        let got = linear_limit(&w, &alpha).unwrap();
        for k in 0..m {
            assert!((got[k] - expected[k]).abs() < 1e-10);
        }
        let far = lower_bound_linear(&a, &PopulationVector::zeros(m), 20_000).unwrap();
        for k in 0..m {
            assert!((far.trajectory.last().unwrap()[k] - expected[k]).abs() < 1e-6);
        }
    }
}

/// Every point of `series` inside a family-wise interval around the
/// empirical estimate at `level`.
fn assert_matches(ens: &Ensemble, level: usize, exact: &[(u64, f64)]) {
    let z = bonferroni_z(exact.len());
    for &(t, p) in exact {
        let est = ens.level_probability_z(level, t, z);
        let half = z * (p * (1.0 - p) / ens.len() as f64).sqrt();
        assert!(
            (est.p_hat - p).abs() <= half.max(3.0 / ens.len() as f64),
            "t={t}: {} vs {p}",
            est.p_hat
        );
    }
}

#[test]
fn single_individual_ea_follows_its_chain() {
    let (n, q) = (3, 0.25);
    let problem = onemax(n).unwrap();
    let gamma = point_mutation_gamma(n, q).unwrap();
    let exact = lower_bound_linear(&gamma, &PopulationVector::zeros(n), 30)
        .unwrap()
        .trajectory;
    let config = AlgorithmConfig::new(
        Variant::Ea { lambda: 1, s: 5 },
        MutationKernel::Point { q },
        problem,
    )
    .with_t_max(30)
    .with_seed(77);
    let ens = run_many(&config, 10_000).unwrap();
    assert_matches(&ens, n, &exact.series(n));
}

#[test]
fn comma_ea_follows_its_recursion() {
    let (n, lambda, q) = (5, 4usize, 1.0 / 6.0);
    let problem = onemax(n).unwrap();
    let gamma = point_mutation_gamma(n, q).unwrap();
    let exact = one_comma_lambda_recursion(&gamma, &vec![0.0; n], lambda as u32, 25).unwrap();
    let config = AlgorithmConfig::new(
        Variant::OneCommaLambda { lambda },
        MutationKernel::Point { q },
        problem,
    )
    .with_t_max(25)
    .with_seed(78);
    let ens = run_many(&config, 10_000).unwrap();
    for j in [1, 3, n] {
        assert_matches(&ens, j, &exact.series(j));
    }
}

#[test]
fn mean_proportion_matches_first_individual() {
    let problem = onemax(6).unwrap();
    let config = AlgorithmConfig::new(
        Variant::Ea { lambda: 10, s: 2 },
        problem.default_kernel(),
        problem,
    )
    .with_t_max(20)
    .with_seed(79)
    .recording_population();
    let ens = run_many(&config, 40_000).unwrap();
    // 99.9% family-wise over the 21 iterations
    let z = Normal::standard().inverse_cdf(1.0 - 0.001 / 42.0);
    for t in 0..=20 {
        let mean = ens.mean_proportion(4, t).unwrap();
        let first = ens.level_probability(4, t);
        let se_first = (first.p_hat * (1.0 - first.p_hat) / ens.len() as f64).sqrt();
        let allowed = z * (mean.std_err.powi(2) + se_first.powi(2)).sqrt();
        assert!(
            (mean.mean - first.p_hat).abs() <= allowed.max(1e-12),
            "t={t}: {} vs {}",
            mean.mean,
            first.p_hat
        );
        // Jensen on the empirical distribution
        let zs = ens.proportions(4, t).unwrap();
        for s in 1..6 {
            let lhs = zs.iter().map(|x| (1.0 - x).powi(s)).sum::<f64>() / zs.len() as f64;
            assert!(lhs >= (1.0 - mean.mean).powi(s) - 1e-12);
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let (problem, kernel) = vcp_triangles(4, 0.1).unwrap();
    let config = AlgorithmConfig::new(Variant::Ea { lambda: 8, s: 2 }, kernel, problem)
        .with_t_max(40)
        .with_seed(80);
    let with = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_many(&config, 300).unwrap())
    };
    let one = with(1);
    assert_eq!(one, with(4));
    let (mut a, mut b) = (Vec::new(), Vec::new());
    one.write_csv(&mut a, 4).unwrap();
    with(3).write_csv(&mut b, 4).unwrap();
    assert_eq!(a, b);
}
