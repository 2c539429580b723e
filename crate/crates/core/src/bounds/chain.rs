use rand::Rng;

use crate::error::{Error, Result};
use crate::levels::{check_distribution, BoundKind, BoundMatrix, LevelPartition};
use crate::linalg::Matrix;

use super::{BoundTrajectory, TrajectoryKind};

const CLAMP_TOL: f64 = 1e-15;

/// The (1,1) EA surrogate whose level moves follow the lower bounds
/// exactly: `t_ij = a_ij - a_{i,j+1}` for `j < m`, `t_im = a_im`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociatedChain {
    transition: Matrix,
    clamped: Vec<(usize, usize, f64)>,
}

impl AssociatedChain {
    pub fn from_lower_bounds(a: &BoundMatrix) -> Result<Self> {
        if a.kind() == BoundKind::Upper {
            return Err(Error::InvalidParameter(
                "the associated chain is built from lower bounds".into(),
            ));
        }
        let m = a.m();
        let mut clamped = Vec::new();
        let mut transition = Matrix::zeros(m + 1, m + 1);
        for i in 0..=m {
            for j in 0..=m {
                let next = if j < m { a.entry(i, j + 1) } else { 0.0 };
                let mut value = a.entry(i, j) - next;
                if value < 0.0 {
                    if value < -CLAMP_TOL {
                        return Err(Error::NegativeTransition {
                            row: i,
                            col: j,
                            value,
                        });
                    }
                    clamped.push((i, j, value));
                    value = 0.0;
                }
                transition[(i, j)] = value;
            }
        }
        Ok(Self {
            transition,
            clamped,
        })
    }

    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    /// Entries that were slightly negative and set to zero.
    pub fn clamped(&self) -> &[(usize, usize, f64)] {
        &self.clamped
    }

    pub fn m(&self) -> usize {
        self.transition.rows() - 1
    }

    /// `p T`.
    pub fn step(&self, p: &[f64]) -> Vec<f64> {
        self.transition.left_mul(p)
    }

    /// `p T^t` by binary exponentiation.
    pub fn distribution_at(&self, p0: &[f64], t: u64) -> Vec<f64> {
        self.transition.pow(t).left_mul(p0)
    }

    /// `p L` without the `j = 0` component: tail sums over `H_1..H_m`.
    pub fn cumulative(p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.len() - 1];
        let mut tail = 0.0;
        for j in (1..p.len()).rev() {
            tail += p[j];
            out[j - 1] = tail;
        }
        out
    }

    /// Smallest `t <= t_cap` with `Pr{level >= j} >= threshold`, stepping
    /// the distribution forward.
    pub fn first_time_reaching(
        &self,
        p0: &[f64],
        j: usize,
        threshold: f64,
        t_cap: u64,
    ) -> Option<u64> {
        let mut p = p0.to_vec();
        for t in 0..=t_cap {
            if p[j..].iter().sum::<f64>() >= threshold {
                return Some(t);
            }
            p = self.step(&p);
        }
        None
    }

    /// One trajectory of the chain from `start`, `steps` transitions long.
    pub fn sample_path<R: Rng + ?Sized>(
        &self,
        start: usize,
        steps: u64,
        rng: &mut R,
    ) -> Vec<usize> {
        let mut path = Vec::with_capacity(steps as usize + 1);
        let mut state = start;
        path.push(state);
        for _ in 0..steps {
            state = self.sample_step(state, rng);
            path.push(state);
        }
        path
    }

    pub fn sample_step<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        let row = self.transition.row(state);
        let mut u: f64 = rng.random();
        for (j, &p) in row.iter().enumerate() {
            if u < p {
                return j;
            }
            u -= p;
        }
        // rounding left a sliver of mass; return the last reachable state
        row.iter().rposition(|&p| p > 0.0).unwrap_or(state)
    }
}

/// Lower bounds `p0 T^t L` on `E[z^(t)]`. Needs every level set non-empty.
pub fn lower_bound_chain(
    a: &BoundMatrix,
    partition: &LevelPartition,
    p0: &[f64],
    t_max: u64,
) -> Result<BoundTrajectory> {
    if partition.m() != a.m() || p0.len() != a.m() + 1 {
        return Err(Error::Dimension(format!(
            "matrix m = {}, partition m = {}, distribution over {} levels",
            a.m(),
            partition.m(),
            p0.len()
        )));
    }
    if !partition.all_levels_nonempty() {
        return Err(Error::EmptyLevels(partition.empty_levels().to_vec()));
    }
    a.require_monotone()?;
    check_distribution("initial level distribution", p0)?;
    let chain = AssociatedChain::from_lower_bounds(a)?;
    let mut trajectory = BoundTrajectory::new(TrajectoryKind::LowerChain);
    let mut p = p0.to_vec();
    trajectory.push(0, AssociatedChain::cumulative(&p));
    for t in 1..=t_max {
        p = chain.step(&p);
        trajectory.push(t, AssociatedChain::cumulative(&p));
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{lower_bounds_for_kernel, LowerBoundPreset};

    #[test]
    fn rows_are_stochastic() {
        let a = lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m: 6 }).unwrap();
        let chain = AssociatedChain::from_lower_bounds(&a).unwrap();
        for i in 0..=6 {
            let s: f64 = chain.transition().row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(chain.clamped().is_empty());
    }

    #[test]
    fn sat_walk_chain_is_gamblers_ruin() {
        let m = 5;
        let a = lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m }).unwrap();
        let t = AssociatedChain::from_lower_bounds(&a).unwrap();
        let t = t.transition();
        assert_eq!(t[(0, 0)], 0.5);
        assert_eq!(t[(0, 1)], 0.5);
        for i in 1..m {
            assert_eq!(t[(i, i - 1)], 0.5);
            assert_eq!(t[(i, i + 1)], 0.5);
            assert_eq!(t[(i, i)], 0.0);
        }
        assert_eq!(t[(m, m)], 1.0);
    }

    #[test]
    fn row_increasing_lower_bounds_are_rejected() {
        let a = BoundMatrix::from_rows(
            &[vec![0.2, 0.5], vec![1.0, 1.0], vec![1.0, 1.0]],
            BoundKind::Lower,
        )
        .unwrap();
        assert!(matches!(
            AssociatedChain::from_lower_bounds(&a),
            Err(Error::NegativeTransition { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn t_zero_is_cumulative_initial_distribution() {
        let a = lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m: 3 }).unwrap();
        let traj =
            lower_bound_chain(&a, &LevelPartition::canonical(3), &[0.1, 0.2, 0.3, 0.4], 0).unwrap();
        let z = traj.last().unwrap();
        let expected = [0.9, 0.7, 0.4];
        for (a, b) in z.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_levels_are_rejected() {
        let a = lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m: 3 }).unwrap();
        let partition = LevelPartition::canonical(3).with_empty_levels(vec![2]);
        assert!(matches!(
            lower_bound_chain(&a, &partition, &[1.0, 0.0, 0.0, 0.0], 4),
            Err(Error::EmptyLevels(v)) if v == vec![2]
        ));
    }
}
