use crate::error::{Error, Result};
use crate::levels::{BoundKind, BoundMatrix, PopulationVector};
use crate::linalg::Matrix;

use super::norms::{certify_convergence, NormCertificate};
use super::{BoundTrajectory, TrajectoryKind};

const CLOSED_FORM_TOL: f64 = 1e-10;
const MAX_CHECKPOINTS: u64 = 256;

/// `W` with `w_ij = a_ij - a_{i-1,j}` for `i, j in 1..=m`, and the first row
/// of `A` as `alpha`.
pub fn build_w_and_alpha(a: &BoundMatrix) -> (Matrix, Vec<f64>) {
    let m = a.m();
    let w = Matrix::from_fn(m, m, |r, c| a.entry(r + 1, c + 1) - a.entry(r, c + 1));
    let alpha = (1..=m).map(|j| a.entry(0, j)).collect();
    (w, alpha)
}

/// `alpha (I - W)^{-1}`, the limit of the linear recursion. `None` when
/// `I - W` is numerically singular.
pub fn linear_limit(w: &Matrix, alpha: &[f64]) -> Option<Vec<f64>> {
    // v (I - W) = alpha  <=>  (I - W)^T v^T = alpha^T
    let system = Matrix::identity(w.rows()).sub(w).transpose();
    system.solve(alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCheck {
    pub checkpoints: usize,
    pub max_discrepancy: f64,
}

/// Result of the linear lower bound: the iterated trajectory plus the data
/// used to certify it.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBound {
    pub trajectory: BoundTrajectory,
    pub certificate: NormCertificate,
    pub limit: Option<Vec<f64>>,
    pub closed_form: Option<ClosedFormCheck>,
    pub warning: Option<String>,
}

fn check_dims(a: &BoundMatrix, m: usize, what: &str) -> Result<()> {
    if a.m() == m {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} has {m} components, matrix has m = {}",
            a.m()
        )))
    }
}

/// Lower bounds on `E[z^(t)]`, valid for any population and tournament size,
/// from `u' = alpha + u W`. The closed form
/// `z0 W^t + alpha (I - W)^{-1} (I - W^t)` is evaluated alongside and must
/// agree with the iteration.
pub fn lower_bound_linear(
    a: &BoundMatrix,
    z0: &PopulationVector,
    t_max: u64,
) -> Result<LinearBound> {
    if a.kind() == BoundKind::Upper {
        return Err(Error::InvalidParameter(
            "the linear lower bound needs a Lower or Exact matrix".into(),
        ));
    }
    a.require_monotone()?;
    check_dims(a, z0.m(), "initial vector")?;
    let (w, alpha) = build_w_and_alpha(a);
    let certificate = certify_convergence(&w)?;

    let mut trajectory = BoundTrajectory::new(TrajectoryKind::LowerLinear);
    let mut u = z0.values().to_vec();
    trajectory.push(0, u.clone());
    for t in 1..=t_max {
        let uw = w.left_mul(&u);
        u = alpha.iter().zip(uw).map(|(a, x)| a + x).collect();
        trajectory.push(t, u.clone());
    }

    let limit = linear_limit(&w, &alpha);
    let (closed_form, warning) = match &limit {
        Some(v) => (
            Some(check_closed_form(&w, v, z0.values(), &trajectory)?),
            None,
        ),
        None => (
            None,
            Some("I - W is numerically singular; closed form skipped".to_string()),
        ),
    };
    Ok(LinearBound {
        trajectory,
        certificate,
        limit,
        closed_form,
        warning,
    })
}

fn checkpoints(t_max: u64) -> Vec<u64> {
    if t_max <= MAX_CHECKPOINTS {
        return (0..=t_max).collect();
    }
    let mut ts: Vec<u64> = (0..=MAX_CHECKPOINTS)
        .map(|k| k * t_max / MAX_CHECKPOINTS)
        .collect();
    ts.dedup();
    ts
}

fn check_closed_form(
    w: &Matrix,
    v: &[f64],
    z0: &[f64],
    trajectory: &BoundTrajectory,
) -> Result<ClosedFormCheck> {
    let t_max = trajectory.iterations.last().map_or(0, |(t, _)| *t);
    let diff: Vec<f64> = z0.iter().zip(v).map(|(a, b)| a - b).collect();
    let ts = checkpoints(t_max);
    let mut power = Matrix::identity(w.rows());
    let mut prev = 0u64;
    let mut max_discrepancy = 0.0f64;
    for &t in &ts {
        power = power.mul(&w.pow(t - prev));
        prev = t;
        let closed: Vec<f64> = power
            .left_mul(&diff)
            .into_iter()
            .zip(v)
            .map(|(a, b)| a + b)
            .collect();
        let iterated = trajectory.at(t).expect("trajectory covers 0..=t_max");
        let gap = closed
            .iter()
            .zip(iterated)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        if gap > CLOSED_FORM_TOL {
            return Err(Error::ClosedFormMismatch {
                t,
                discrepancy: gap,
            });
        }
        max_discrepancy = max_discrepancy.max(gap);
    }
    Ok(ClosedFormCheck {
        checkpoints: ts.len(),
        max_discrepancy,
    })
}

/// Shared map `u_j' = d_mj - sum_i (d_ij - d_{i-1,j}) (1 - u_i)^s`.
fn tournament_step(d: &BoundMatrix, u: &[f64], s: i32) -> Vec<f64> {
    let m = d.m();
    let x: Vec<f64> = u.iter().map(|ui| (1.0 - ui).powi(s)).collect();
    (1..=m)
        .map(|j| {
            let tail: f64 = (1..=m)
                .map(|i| (d.entry(i, j) - d.entry(i - 1, j)) * x[i - 1])
                .sum();
            d.entry(m, j) - tail
        })
        .collect()
}

fn iterate(
    kind: TrajectoryKind,
    u0: Vec<f64>,
    t_max: u64,
    mut step: impl FnMut(&[f64]) -> Vec<f64>,
) -> BoundTrajectory {
    let mut trajectory = BoundTrajectory::new(kind);
    let mut u = u0;
    trajectory.push(0, u.clone());
    for t in 1..=t_max {
        u = step(&u);
        trajectory.push(t, u.clone());
    }
    trajectory
}

fn tournament_size(s: u32) -> Result<i32> {
    if s < 1 {
        return Err(Error::InvalidParameter(
            "tournament size must be >= 1".into(),
        ));
    }
    i32::try_from(s).map_err(|_| Error::InvalidParameter(format!("tournament size {s} too large")))
}

/// Upper bounds on `E[z^(t)]` for tournament size `s`, via Jensen's
/// inequality applied to the selection probabilities.
pub fn upper_bound_jensen(
    b: &BoundMatrix,
    z0: &PopulationVector,
    s: u32,
    t_max: u64,
) -> Result<BoundTrajectory> {
    if b.kind() == BoundKind::Lower {
        return Err(Error::InvalidParameter(
            "the Jensen upper bound needs an Upper or Exact matrix".into(),
        ));
    }
    b.require_monotone()?;
    check_dims(b, z0.m(), "initial vector")?;
    let s = tournament_size(s)?;
    Ok(iterate(
        TrajectoryKind::UpperJensen,
        z0.values().to_vec(),
        t_max,
        |u| tournament_step(b, u, s),
    ))
}

/// The deterministic limit of `E[z^(t)]` as the population grows, for a
/// level-based monotone operator.
pub fn infinite_population_recursion(
    gamma: &BoundMatrix,
    u0: &[f64],
    s: u32,
    t_max: u64,
) -> Result<BoundTrajectory> {
    if gamma.kind() != BoundKind::Exact {
        return Err(Error::NotExact(gamma.kind()));
    }
    gamma.require_monotone()?;
    check_dims(gamma, u0.len(), "initial vector")?;
    let s = tournament_size(s)?;
    Ok(iterate(
        TrajectoryKind::InfinitePopulation,
        u0.to_vec(),
        t_max,
        |u| tournament_step(gamma, u, s),
    ))
}

/// Exact `Pr{b^(t) in H_j}` for the (1,lambda) EA with a level-based
/// monotone operator, where `b^(t)` is the parent of generation `t`.
pub fn one_comma_lambda_recursion(
    gamma: &BoundMatrix,
    p0: &[f64],
    lambda: u32,
    t_max: u64,
) -> Result<BoundTrajectory> {
    if gamma.kind() != BoundKind::Exact {
        return Err(Error::NotExact(gamma.kind()));
    }
    gamma.require_monotone()?;
    check_dims(gamma, p0.len(), "initial vector")?;
    if lambda < 1 {
        return Err(Error::InvalidParameter("lambda must be >= 1".into()));
    }
    let lam = i32::try_from(lambda)
        .map_err(|_| Error::InvalidParameter(format!("lambda {lambda} too large")))?;
    let m = gamma.m();
    // miss[i][j] = (1 - gamma_ij)^lambda
    let miss: Vec<Vec<f64>> = (0..=m)
        .map(|i| {
            (0..=m)
                .map(|j| (1.0 - gamma.entry(i, j)).powi(lam))
                .collect()
        })
        .collect();
    Ok(iterate(
        TrajectoryKind::OneCommaLambdaExact,
        p0.to_vec(),
        t_max,
        |p| {
            (1..=m)
                .map(|j| {
                    let tail: f64 = (1..=m)
                        .map(|i| (miss[i - 1][j] - miss[i][j]) * p[i - 1])
                        .sum();
                    1.0 - miss[0][j] + tail
                })
                .collect()
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{lower_bounds_for_kernel, point_mutation_gamma, LowerBoundPreset};

    #[test]
    fn rls_w_is_upper_bidiagonal() {
        let a = lower_bounds_for_kernel(LowerBoundPreset::RlsUnimodal { n: 10, ell: 5 }).unwrap();
        let (w, alpha) = build_w_and_alpha(&a);
        assert_eq!(alpha, vec![0.1, 0.0, 0.0, 0.0]);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j {
                    0.9
                } else if j == i + 1 {
                    0.1
                } else {
                    0.0
                };
                assert!((w[(i, j)] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_matrix_gives_zero_w() {
        let (w, alpha) = build_w_and_alpha(&BoundMatrix::zeros(3, BoundKind::Lower));
        assert_eq!(w.max_abs(), 0.0);
        assert_eq!(alpha, vec![0.0; 3]);
    }

    #[test]
    fn t_zero_returns_initial_vector() {
        let g = point_mutation_gamma(3, 0.25).unwrap();
        let z0 = PopulationVector::expected(vec![0.5, 0.25, 0.0]).unwrap();
        let bound = lower_bound_linear(&g, &z0, 0).unwrap();
        assert_eq!(bound.trajectory.last().unwrap(), z0.values());
    }

    #[test]
    fn rls_limit_is_all_ones() {
        let a = lower_bounds_for_kernel(LowerBoundPreset::RlsUnimodal { n: 10, ell: 5 }).unwrap();
        let bound = lower_bound_linear(&a, &PopulationVector::zeros(4), 2000).unwrap();
        for v in bound.limit.as_ref().unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!(bound
            .trajectory
            .last()
            .unwrap()
            .iter()
            .all(|v| (v - 1.0).abs() < 1e-9));
        assert!(bound.closed_form.unwrap().max_discrepancy < 1e-10);
    }

    #[test]
    fn non_monotone_input_is_rejected() {
        let g = point_mutation_gamma(4, 0.1).unwrap();
        assert!(matches!(
            lower_bound_linear(&g, &PopulationVector::zeros(4), 5),
            Err(Error::NotMonotone(_))
        ));
    }

    #[test]
    fn all_ones_upper_bound() {
        let b = BoundMatrix::ones(4, BoundKind::Upper);
        let traj = upper_bound_jensen(&b, &PopulationVector::zeros(4), 3, 5).unwrap();
        for (t, v) in &traj.iterations {
            if *t >= 1 {
                assert!(v.iter().all(|&x| x == 1.0));
            }
        }
    }

    #[test]
    fn lambda_one_collapses_to_linear() {
        let g = point_mutation_gamma(5, 0.2).unwrap();
        let p0 = vec![0.6, 0.3, 0.2, 0.1, 0.0];
        let exact = one_comma_lambda_recursion(&g, &p0, 1, 40).unwrap();
        let z0 = PopulationVector::expected(p0).unwrap();
        let linear = lower_bound_linear(&g, &z0, 40).unwrap().trajectory;
        for ((_, a), (_, b)) in exact.iterations.iter().zip(&linear.iterations) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn infinite_population_rejects_lower_kind() {
        let a = BoundMatrix::zeros(2, BoundKind::Lower);
        assert!(matches!(
            infinite_population_recursion(&a, &[0.0, 0.0], 2, 3),
            Err(Error::NotExact(BoundKind::Lower))
        ));
    }
}
