//! Mutation operators and their cumulative transition matrices.

use std::fmt;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_probability, Error, Result};
use crate::levels::{BoundKind, BoundMatrix};

/// A bit string.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Genotype(pub Vec<bool>);

impl Genotype {
    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| rng.random::<bool>()).collect())
    }

    /// Bits of `mask` in little-endian order.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self((0..n).map(|k| mask >> k & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn ones_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn flip(&mut self, k: usize) {
        self.0[k] = !self.0[k];
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| !b).collect())
    }

    pub fn hamming(&self, other: &Genotype) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Debug for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self {
            var,
            negated: false,
        }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, negated: true }
    }

    pub fn eval(&self, g: &Genotype) -> bool {
        g.0[self.var] != self.negated
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause(pub Vec<Literal>);

impl Clause {
    pub fn is_satisfied(&self, g: &Genotype) -> bool {
        self.0.iter().any(|l| l.eval(g))
    }
}

/// CNF formula with at most two literals per clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    n: usize,
    clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        for (k, c) in clauses.iter().enumerate() {
            if c.0.is_empty() || c.0.len() > 2 {
                return Err(Error::InvalidParameter(format!(
                    "clause {k} has {} literals; 1 or 2 expected",
                    c.0.len()
                )));
            }
            if let Some(l) = c.0.iter().find(|l| l.var >= n) {
                return Err(Error::InvalidParameter(format!(
                    "clause {k} uses variable {} of {n}",
                    l.var
                )));
            }
        }
        Ok(Self { n, clauses })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn is_satisfied(&self, g: &Genotype) -> bool {
        self.clauses.iter().all(|c| c.is_satisfied(g))
    }

    pub fn unsatisfied<'a>(&'a self, g: &'a Genotype) -> impl Iterator<Item = &'a Clause> + 'a {
        self.clauses.iter().filter(move |c| !c.is_satisfied(g))
    }
}

/// Random 2-CNF with `clauses` distinct-variable clauses, each satisfied by
/// the returned planted assignment.
pub fn planted_two_sat(n: usize, clauses: usize, seed: u64) -> Result<(Formula, Genotype)> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "2-SAT needs at least two variables".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted = Genotype::random(n, &mut rng);
    let mut out = Vec::with_capacity(clauses);
    while out.len() < clauses {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n - 1);
        let b = if b >= a { b + 1 } else { b };
        let clause = Clause(vec![
            Literal {
                var: a,
                negated: rng.random(),
            },
            Literal {
                var: b,
                negated: rng.random(),
            },
        ]);
        if clause.is_satisfied(&planted) {
            out.push(clause);
        }
    }
    Ok((Formula::new(n, out)?, planted))
}

/// Flip each bit independently with probability `p_m`, skipping
/// geometrically between flips.
pub fn bitwise_mutation_sample<R: Rng + ?Sized>(g: &mut Genotype, p_m: f64, rng: &mut R) {
    let n = g.len();
    if p_m <= 0.0 || n == 0 {
        return;
    }
    if p_m >= 1.0 {
        g.0.iter_mut().for_each(|b| *b = !*b);
        return;
    }
    let log_q = (1.0 - p_m).ln();
    let mut k = 0usize;
    loop {
        // number of untouched bits before the next flip
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (n - k) as f64 {
            return;
        }
        k += skip as usize;
        g.flip(k);
        k += 1;
        if k >= n {
            return;
        }
    }
}

/// With probability `q` keep `g`, otherwise flip one uniformly chosen bit.
pub fn point_mutation_sample<R: Rng + ?Sized>(g: &mut Genotype, q: f64, rng: &mut R) {
    if g.is_empty() || rng.random::<f64>() < q {
        return;
    }
    let k = rng.random_range(0..g.len());
    g.flip(k);
}

/// Flip one uniform bit; keep the flip only if fitness strictly improves.
pub fn rls_mutation_sample<R, F>(g: &mut Genotype, fitness: F, rng: &mut R)
where
    R: Rng + ?Sized,
    F: Fn(&Genotype) -> f64,
{
    if g.is_empty() {
        return;
    }
    let before = fitness(g);
    let k = rng.random_range(0..g.len());
    g.flip(k);
    if fitness(g) <= before {
        g.flip(k);
    }
}

/// One step of the 2-SAT random walk. Returns the flipped variable, if any.
pub fn sat_walk_sample<R: Rng + ?Sized>(
    g: &mut Genotype,
    formula: &Formula,
    rng: &mut R,
) -> Option<usize> {
    let var = {
        let unsat: Vec<&Clause> = formula.unsatisfied(g).collect();
        let clause = unsat.choose(rng)?;
        clause.0.choose(rng)?.var
    };
    g.flip(var);
    Some(var)
}

/// Mutation operators with their parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum MutationKernel {
    Point {
        q: f64,
    },
    Bitwise {
        p_m: f64,
    },
    /// Single-bit flip accepted only on strict improvement.
    Rls,
    SatWalk(Arc<Formula>),
}

impl MutationKernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            MutationKernel::Point { q } => check_probability("q", *q),
            MutationKernel::Bitwise { p_m } => check_probability("p_m", *p_m),
            MutationKernel::Rls | MutationKernel::SatWalk(_) => Ok(()),
        }
    }

    /// Mutates `g` in place. `fitness` is consulted only by `Rls`.
    pub fn mutate<R, F>(&self, g: &mut Genotype, fitness: F, rng: &mut R)
    where
        R: Rng + ?Sized,
        F: Fn(&Genotype) -> f64,
    {
        match self {
            MutationKernel::Point { q } => point_mutation_sample(g, *q, rng),
            MutationKernel::Bitwise { p_m } => bitwise_mutation_sample(g, *p_m, rng),
            MutationKernel::Rls => rls_mutation_sample(g, fitness, rng),
            MutationKernel::SatWalk(f) => {
                sat_walk_sample(g, f, rng);
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MutationKernel::Point { .. } => "point",
            MutationKernel::Bitwise { .. } => "bitwise",
            MutationKernel::Rls => "rls",
            MutationKernel::SatWalk(_) => "sat-walk",
        }
    }
}

/// Binomial coefficient; exact integer arithmetic up to `n = 64`.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 64 {
        let mut c: u128 = 1;
        for i in 0..k as u128 {
            c = c * (n as u128 - i) / (i + 1);
        }
        c as f64
    } else {
        (0..k).fold(1.0, |c, i| c * (n - i) as f64 / (i + 1) as f64)
    }
}

/// Cumulative transition matrix of point mutation on OneMax, `m = n`.
pub fn point_mutation_gamma(n: usize, q: f64) -> Result<BoundMatrix> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    check_probability("q", q)?;
    let nf = n as f64;
    BoundMatrix::from_fn(n, BoundKind::Exact, |i, j| {
        let up = (1.0 - q) * (n - i) as f64 / nf;
        if j < i {
            1.0
        } else if j == i {
            if i < n {
                q + up
            } else {
                q
            }
        } else if j == i + 1 {
            up
        } else {
            0.0
        }
    })
}

/// Cumulative transition matrix of a kernel acting independently on `d`
/// blocks: a block with the property keeps it with probability `r`, a block
/// without it gains it with probability `r_tilde`. Level = number of blocks
/// with the property.
pub fn block_gamma(d: usize, r: f64, r_tilde: f64) -> Result<BoundMatrix> {
    if d < 1 {
        return Err(Error::InvalidParameter("block count must be >= 1".into()));
    }
    check_probability("r", r)?;
    check_probability("r_tilde", r_tilde)?;
    let m = d;
    // q_table[i][l] = probability that at least l of i good blocks survive
    let q_table: Vec<Vec<f64>> = (0..=m)
        .map(|i| {
            (0..=m)
                .map(|l| {
                    if l > i {
                        return 0.0;
                    }
                    // nu = blocks lost, at most i - l of them
                    (0..=i - l)
                        .map(|nu| {
                            binomial(i as u32, nu as u32)
                                * (1.0 - r).powi(nu as i32)
                                * r.powi((i - nu) as i32)
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    let entries = crate::linalg::Matrix::from_fn(m + 1, m, |i, col| {
        let j = col + 1;
        let free = m - i;
        let total: f64 = (0..=free)
            .map(|k| {
                let q = if k >= j { 1.0 } else { q_table[i][j - k] };
                binomial(free as u32, k as u32)
                    * r_tilde.powi(k as i32)
                    * (1.0 - r_tilde).powi((free - k) as i32)
                    * q
            })
            .sum();
        total.clamp(0.0, 1.0)
    });
    BoundMatrix::new(entries, BoundKind::Exact)
}

/// Keep and gain probabilities of a triangle block under bitwise mutation
/// with edge-based encoding: `(r, r_tilde)`.
pub fn vcp_block_params(p_m: f64) -> Result<(f64, f64)> {
    check_probability("p_m", p_m)?;
    let p = p_m;
    let r_tilde = 1.0 - p.powi(3) - (1.0 - p).powi(3);
    let r = 1.0 - p * (1.0 - p).powi(2) - p * p * (1.0 - p);
    Ok((r, r_tilde))
}

/// How the top row of the set-cover lower bounds is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BalasTop {
    /// `alpha_mm = q`: matches the Ehrenfest chain, not monotone.
    Pessimistic,
    /// `alpha_mm = q + (1 - q)/2`: the exact staying probability.
    Safe,
}

/// Operator presets with hand-derived lower-bound matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LowerBoundPreset {
    RlsUnimodal { n: usize, ell: usize },
    SatWalk { m: usize },
    BalasPoint { n: usize, q: f64, top: BalasTop },
}

impl LowerBoundPreset {
    /// Parses `rls:n=10,ell=5`, `sat:m=10`, `balas:n=8,q=0.1[,top=safe]`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, args) = text.split_once(':').unwrap_or((text, ""));
        let params = crate::problems::parse_params(args)?;
        let get = |key: &str| -> Result<&str> {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Config(format!("preset `{text}` is missing `{key}`")))
        };
        let int = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|e| Error::Config(format!("`{key}`: {e}")))
        };
        match name.trim() {
            "rls" | "rls-unimodal" => Ok(Self::RlsUnimodal {
                n: int("n")?,
                ell: int("ell")?,
            }),
            "sat" | "sat-walk" => Ok(Self::SatWalk { m: int("m")? }),
            "balas" | "balas-point" => {
                let n = int("n")?;
                let q = match get("q") {
                    Ok(v) => v.parse().map_err(|e| Error::Config(format!("`q`: {e}")))?,
                    Err(_) => 1.0 / (n as f64 + 1.0),
                };
                let top = match get("top") {
                    Ok("safe") => BalasTop::Safe,
                    Ok("pessimistic") | Err(_) => BalasTop::Pessimistic,
                    Ok(other) => return Err(Error::Config(format!("unknown top row `{other}`"))),
                };
                Ok(Self::BalasPoint { n, q, top })
            }
            _ => Err(Error::UnknownPreset(text.to_string())),
        }
    }
}

pub fn lower_bounds_for_kernel(preset: LowerBoundPreset) -> Result<BoundMatrix> {
    match preset {
        LowerBoundPreset::RlsUnimodal { n, ell } => {
            if n < 1 || ell < 2 {
                return Err(Error::InvalidParameter(
                    "RLS preset needs n >= 1, ell >= 2".into(),
                ));
            }
            let m = ell - 1;
            let step = 1.0 / n as f64;
            BoundMatrix::from_fn(m, BoundKind::Lower, |i, j| {
                if j <= i {
                    1.0
                } else if j == i + 1 {
                    step
                } else {
                    0.0
                }
            })
        }
        LowerBoundPreset::SatWalk { m } => {
            if m < 1 {
                return Err(Error::InvalidParameter(
                    "SAT-walk preset needs m >= 1".into(),
                ));
            }
            Ok(BoundMatrix::from_fn(m, BoundKind::Lower, |i, j| {
                if j < i || (i == m && j == m) {
                    1.0
                } else if j == i || j == i + 1 {
                    0.5
                } else {
                    0.0
                }
            })?
            .exact_comparison())
        }
        LowerBoundPreset::BalasPoint { n, q, top } => {
            if n < 4 || n % 2 == 1 {
                return Err(Error::InvalidParameter(format!(
                    "Balas preset needs even n >= 4, got {n}"
                )));
            }
            check_probability("q", q)?;
            let m = n / 2;
            let nf = n as f64;
            BoundMatrix::from_fn(m, BoundKind::Lower, |i, j| {
                let up = (1.0 - q) * (n - i) as f64 / nf;
                if j < i {
                    1.0
                } else if j == i && i < m {
                    q + up
                } else if j == i {
                    match top {
                        BalasTop::Pessimistic => q,
                        BalasTop::Safe => q + 0.5 * (1.0 - q),
                    }
                } else if j == i + 1 {
                    up
                } else {
                    0.0
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn point_gamma_entries() {
        let g = point_mutation_gamma(4, 0.2).unwrap();
        assert!((g.entry(0, 1) - 0.8).abs() < 1e-15);
        assert!((g.entry(4, 4) - 0.2).abs() < 1e-15);
        let g1 = point_mutation_gamma(5, 1.0).unwrap();
        for i in 0..5 {
            assert_eq!(g1.entry(i, i + 1), 0.0);
            assert_eq!(g1.entry(i, i), 1.0);
        }
        assert!(point_mutation_gamma(4, 1.5).is_err());
    }

    #[test]
    fn block_gamma_trivial_and_monotone() {
        let g = block_gamma(1, 1.0, 1.0).unwrap();
        assert_eq!(g.entry(0, 1), 1.0);
        assert_eq!(g.entry(1, 1), 1.0);
        let g = block_gamma(2, 0.9, 0.3).unwrap();
        assert!(g.is_row_monotone());
        assert!(g.is_monotone());
        assert!(block_gamma(2, -0.1, 0.3).is_err());
    }

    #[test]
    fn vcp_params() {
        assert_eq!(vcp_block_params(0.0).unwrap(), (1.0, 0.0));
        let (r, rt) = vcp_block_params(0.1).unwrap();
        assert!((rt - 0.27).abs() < 1e-12);
        assert!((r - 0.91).abs() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534u64 as f64);
        assert_eq!(binomial(5, 7), 0.0);
        assert_eq!(binomial(10, 3), 120.0);
    }

    #[test]
    fn bitwise_extremes() {
        let mut r = rng();
        let g0 = Genotype::from_mask(0b1011_0010, 8);
        let mut g = g0.clone();
        bitwise_mutation_sample(&mut g, 0.0, &mut r);
        assert_eq!(g, g0);
        bitwise_mutation_sample(&mut g, 1.0, &mut r);
        assert_eq!(g, g0.complement());
    }

    #[test]
    fn bitwise_flip_count_is_binomial() {
        let mut r = rng();
        let n_samples = 100_000;
        let g0 = Genotype::zeros(8);
        let total: usize = (0..n_samples)
            .map(|_| {
                let mut g = g0.clone();
                bitwise_mutation_sample(&mut g, 0.5, &mut r);
                g.ones_count()
            })
            .sum();
        let mean = total as f64 / n_samples as f64;
        // sd of the mean = sqrt(2 / 1e5)
        assert!((mean - 4.0).abs() < 4.0 * (2.0f64 / n_samples as f64).sqrt());
    }

    #[test]
    fn sat_walk_single_clause() {
        let f = Formula::new(2, vec![Clause(vec![Literal::pos(0), Literal::pos(1)])]).unwrap();
        let mut r = rng();
        let mut counts = [0usize; 2];
        for _ in 0..10_000 {
            let mut g = Genotype::zeros(2);
            let v = sat_walk_sample(&mut g, &f, &mut r).unwrap();
            assert_eq!(g.ones_count(), 1);
            counts[v] += 1;
        }
        assert!((counts[0] as f64 / 10_000.0 - 0.5).abs() < 0.03);
        let mut sat = Genotype::ones(2);
        assert_eq!(sat_walk_sample(&mut sat, &f, &mut r), None);
        assert_eq!(sat, Genotype::ones(2));
    }

    #[test]
    fn planted_formula_is_satisfied() {
        let (f, g) = planted_two_sat(12, 40, 3).unwrap();
        assert!(f.is_satisfied(&g));
        assert_eq!(f.clauses().len(), 40);
    }

    #[test]
    fn rls_never_worsens() {
        let mut r = rng();
        let onemax = |g: &Genotype| g.ones_count() as f64;
        let mut g = Genotype::zeros(10);
        rls_mutation_sample(&mut g, onemax, &mut r);
        assert_eq!(g.ones_count(), 1);
        let mut top = Genotype::ones(10);
        rls_mutation_sample(&mut top, onemax, &mut r);
        assert_eq!(top, Genotype::ones(10));
    }

    #[test]
    fn sat_walk_preset_entries() {
        let a = lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m: 3 }).unwrap();
        assert_eq!(a.entry(1, 2), 0.5);
        assert_eq!(a.entry(1, 1), 0.5);
        assert_eq!(a.entry(2, 1), 1.0);
        assert_eq!(a.entry(3, 3), 1.0);
        assert!(a.is_monotone());
    }

    #[test]
    fn balas_preset_entries() {
        let a = lower_bounds_for_kernel(LowerBoundPreset::BalasPoint {
            n: 4,
            q: 0.2,
            top: BalasTop::Pessimistic,
        })
        .unwrap();
        assert!((a.entry(0, 1) - 0.8).abs() < 1e-15);
        let safe = lower_bounds_for_kernel(LowerBoundPreset::BalasPoint {
            n: 8,
            q: 1.0 / 9.0,
            top: BalasTop::Safe,
        })
        .unwrap();
        assert!(safe.is_monotone());
    }

    #[test]
    fn preset_parsing() {
        assert_eq!(
            LowerBoundPreset::parse("rls:n=10,ell=5").unwrap(),
            LowerBoundPreset::RlsUnimodal { n: 10, ell: 5 }
        );
        assert!(matches!(
            LowerBoundPreset::parse("balas:n=8,top=safe").unwrap(),
            LowerBoundPreset::BalasPoint {
                n: 8,
                top: BalasTop::Safe,
                ..
            }
        ));
        assert!(matches!(
            LowerBoundPreset::parse("nope:n=1"),
            Err(Error::UnknownPreset(_))
        ));
    }
}
