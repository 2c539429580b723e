//! Bound recursions on the expected population vector, the associated
//! Markov chain, matrix norms and closed-form spectral bounds.

mod balas;
mod chain;
mod closed_form;
mod norms;
mod recursions;
mod spectrum;

use std::fmt;
use std::io::Write;

pub use balas::{
    balas_grouped_ehrenfest, balas_horizon, balas_lower_bounds, balas_stationary_residual,
    balas_stationary_vector,
};
pub use chain::{lower_bound_chain, AssociatedChain};
pub use closed_form::{
    closed_form_lower_bound_unimodal, markov_tail_bound, rls_exp_tail_bound,
    rls_steep_tail_estimate, rls_w_norm_2, rls_wwt_lambda_max,
};
pub use norms::{
    certify_convergence, matrix_norm_2, matrix_norm_inf_cols, matrix_norm_inf_rows, NormCertificate,
};
pub use recursions::{
    build_w_and_alpha, infinite_population_recursion, linear_limit, lower_bound_linear,
    one_comma_lambda_recursion, upper_bound_jensen, ClosedFormCheck, LinearBound,
};
pub use spectrum::{symmetric_tridiagonal_eigenvalues, toeplitz_tridiagonal_spectrum};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrajectoryKind {
    LowerLinear,
    LowerChain,
    UpperJensen,
    InfinitePopulation,
    OneCommaLambdaExact,
}

impl TrajectoryKind {
    pub fn label(self) -> &'static str {
        match self {
            TrajectoryKind::LowerLinear => "lower_linear",
            TrajectoryKind::LowerChain => "lower_chain",
            TrajectoryKind::UpperJensen => "upper_jensen",
            TrajectoryKind::InfinitePopulation => "infinite_population",
            TrajectoryKind::OneCommaLambdaExact => "one_comma_lambda",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            TrajectoryKind::LowerLinear,
            TrajectoryKind::LowerChain,
            TrajectoryKind::UpperJensen,
            TrajectoryKind::InfinitePopulation,
            TrajectoryKind::OneCommaLambdaExact,
        ]
        .into_iter()
        .find(|k| k.label() == s)
    }
}

impl fmt::Display for TrajectoryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Vectors over `H_1..H_m` for `t = 0, 1, ..., t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTrajectory {
    pub kind: TrajectoryKind,
    pub iterations: Vec<(u64, Vec<f64>)>,
}

impl BoundTrajectory {
    pub(crate) fn new(kind: TrajectoryKind) -> Self {
        Self {
            kind,
            iterations: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, t: u64, v: Vec<f64>) {
        self.iterations.push((t, v));
    }

    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    pub fn at(&self, t: u64) -> Option<&[f64]> {
        self.iterations
            .binary_search_by_key(&t, |(s, _)| *s)
            .ok()
            .map(|k| self.iterations[k].1.as_slice())
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.iterations.last().map(|(_, v)| v.as_slice())
    }

    /// Component `j` (1-based) across all iterations.
    pub fn series(&self, j: usize) -> Vec<(u64, f64)> {
        self.iterations
            .iter()
            .map(|(t, v)| (*t, v[j - 1]))
            .collect()
    }

    /// Long format: `t,j,value,kind`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "j", "value", "kind"])?;
        for (t, v) in &self.iterations {
            for (k, x) in v.iter().enumerate() {
                w.write_record([
                    t.to_string(),
                    (k + 1).to_string(),
                    x.to_string(),
                    self.kind.label().to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
