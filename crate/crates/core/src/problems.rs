//! Benchmark instances wired to their level partitions and bound matrices.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::{
    binomial, block_gamma, lower_bounds_for_kernel, planted_two_sat, point_mutation_gamma,
    vcp_block_params, BalasTop, Formula, Genotype, LowerBoundPreset, MutationKernel,
};
use crate::levels::{BoundKind, BoundMatrix, LevelPartition};

/// Concrete increasing/decreasing pair used for the unitation form of the
/// set-cover family. Only the order they induce matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BalasShape {
    /// `R(x) = n - x`, `L(x) = x - n`.
    Linear,
    /// `R(x) = (n - x)^2 + 1`, `L(x) = -1 / (x + 1)`.
    Curved,
}

impl BalasShape {
    fn right(self, n: usize, x: usize) -> f64 {
        let d = (n - x) as f64;
        match self {
            BalasShape::Linear => d,
            BalasShape::Curved => d * d + 1.0,
        }
    }

    fn left(self, n: usize, x: usize) -> f64 {
        match self {
            BalasShape::Linear => x as f64 - n as f64,
            BalasShape::Curved => -1.0 / (x as f64 + 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    OneMax,
    /// `m` disjoint triangles, one gene per edge choosing an endpoint.
    VertexCoverTriangles {
        triangles: usize,
    },
    /// `min(LeadingOnes(g), ell - 1)`.
    UnimodalPath {
        ell: usize,
    },
    /// Fitness `n` on satisfying assignments, otherwise `n - dist(g, g*)`.
    TwoSat {
        formula: Arc<Formula>,
        planted: Genotype,
    },
    Balas {
        shape: BalasShape,
        top: BalasTop,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    name: String,
    n: usize,
    kind: ProblemKind,
    partition: LevelPartition,
}

pub fn onemax(n: usize) -> Result<ProblemInstance> {
    if n < 1 {
        return Err(Error::InvalidParameter("OneMax needs n >= 1".into()));
    }
    Ok(ProblemInstance {
        name: format!("onemax:n={n}"),
        n,
        kind: ProblemKind::OneMax,
        partition: LevelPartition::canonical(n),
    })
}

/// `G(m)` with edge-based encoding, and bitwise mutation.
pub fn vcp_triangles(triangles: usize, p_m: f64) -> Result<(ProblemInstance, MutationKernel)> {
    if triangles < 1 {
        return Err(Error::InvalidParameter("need at least one triangle".into()));
    }
    let kernel = MutationKernel::Bitwise { p_m };
    kernel.validate()?;
    Ok((
        ProblemInstance {
            name: format!("vcp:m={triangles},pm={p_m}"),
            n: 3 * triangles,
            kind: ProblemKind::VertexCoverTriangles { triangles },
            partition: LevelPartition::canonical(triangles),
        },
        kernel,
    ))
}

pub fn unimodal_path(n: usize, ell: usize) -> Result<ProblemInstance> {
    if ell < 2 || ell > n + 1 {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= ell <= n + 1, got n = {n}, ell = {ell}"
        )));
    }
    Ok(ProblemInstance {
        name: format!("unimodal:n={n},ell={ell}"),
        n,
        kind: ProblemKind::UnimodalPath { ell },
        partition: LevelPartition::canonical(ell - 1),
    })
}

pub fn two_sat_instance(formula: Formula, planted: Genotype) -> Result<ProblemInstance> {
    if formula.n() != planted.len() {
        return Err(Error::Dimension(
            "planted assignment length differs from n".into(),
        ));
    }
    if !formula.is_satisfied(&planted) {
        return Err(Error::InvalidParameter(
            "planted assignment does not satisfy the formula".into(),
        ));
    }
    let n = formula.n();
    Ok(ProblemInstance {
        name: format!("2sat:n={n}"),
        n,
        kind: ProblemKind::TwoSat {
            formula: Arc::new(formula),
            planted,
        },
        partition: LevelPartition::canonical(n),
    })
}

/// Unitation form of the set-cover family `B(n, n/2)`. Level `m = n/2`
/// collects every cover; levels below count the chosen subsets.
pub fn balas_scp(n: usize, shape: BalasShape, top: BalasTop) -> Result<ProblemInstance> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "n must be even and >= 4, got {n}"
        )));
    }
    let m = n / 2;
    let mut thresholds: Vec<f64> = (0..m).map(|x| shape.left(n, x)).collect();
    thresholds.push(shape.right(n, n));
    Ok(ProblemInstance {
        name: format!("balas:n={n}"),
        n,
        kind: ProblemKind::Balas { shape, top },
        partition: LevelPartition::new(thresholds)?,
    })
}

impl ProblemInstance {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.partition.m()
    }

    pub fn kind(&self) -> &ProblemKind {
        &self.kind
    }

    pub fn partition(&self) -> &LevelPartition {
        &self.partition
    }

    pub fn fitness(&self, g: &Genotype) -> f64 {
        debug_assert_eq!(g.len(), self.n);
        match &self.kind {
            ProblemKind::OneMax => g.ones_count() as f64,
            ProblemKind::VertexCoverTriangles { triangles } => {
                (3 * triangles - cover_size(g)) as f64
            }
            ProblemKind::UnimodalPath { ell } => leading_ones(g).min(ell - 1) as f64,
            ProblemKind::TwoSat { formula, planted } => {
                if formula.is_satisfied(g) {
                    self.n as f64
                } else {
                    (self.n - g.hamming(planted)) as f64
                }
            }
            ProblemKind::Balas { shape, .. } => {
                let u = g.ones_count();
                if u >= self.n / 2 {
                    shape.right(self.n, u)
                } else {
                    shape.left(self.n, u)
                }
            }
        }
    }

    /// Level of `g`, avoiding the threshold search where the level is a
    /// direct count.
    pub fn level(&self, g: &Genotype) -> usize {
        match &self.kind {
            ProblemKind::OneMax => g.ones_count(),
            ProblemKind::VertexCoverTriangles { triangles } => 3 * triangles - cover_size(g),
            ProblemKind::UnimodalPath { ell } => leading_ones(g).min(ell - 1),
            ProblemKind::Balas { .. } => g.ones_count().min(self.n / 2),
            ProblemKind::TwoSat { .. } => self.partition.classify(self.fitness(g)),
        }
    }

    /// True on global optima. For the set-cover family these are the covers
    /// of size `n/2`, a subset of level `m`.
    pub fn is_optimal(&self, g: &Genotype) -> bool {
        match &self.kind {
            ProblemKind::TwoSat { formula, .. } => formula.is_satisfied(g),
            ProblemKind::Balas { .. } => g.ones_count() == self.n / 2,
            _ => self.level(g) == self.m(),
        }
    }

    /// The mutation operator the preset is studied with.
    pub fn default_kernel(&self) -> MutationKernel {
        match &self.kind {
            ProblemKind::OneMax | ProblemKind::Balas { .. } => MutationKernel::Point {
                q: 1.0 / (self.n as f64 + 1.0),
            },
            ProblemKind::VertexCoverTriangles { .. } => MutationKernel::Bitwise { p_m: 0.1 },
            ProblemKind::UnimodalPath { .. } => MutationKernel::Rls,
            ProblemKind::TwoSat { formula, .. } => MutationKernel::SatWalk(formula.clone()),
        }
    }

    /// Lower and upper bound matrices for `kernel` on this instance.
    pub fn bound_pair(&self, kernel: &MutationKernel) -> Result<(BoundMatrix, BoundMatrix)> {
        let n = self.n;
        match (&self.kind, kernel) {
            (ProblemKind::OneMax, MutationKernel::Point { q }) => {
                let g = point_mutation_gamma(n, *q)?;
                Ok((g.clone(), g))
            }
            (ProblemKind::OneMax, MutationKernel::Bitwise { p_m }) => {
                let g = block_gamma(n, 1.0 - p_m, *p_m)?;
                Ok((g.clone(), g))
            }
            (ProblemKind::VertexCoverTriangles { triangles }, MutationKernel::Bitwise { p_m }) => {
                let (r, r_tilde) = vcp_block_params(*p_m)?;
                let g = block_gamma(*triangles, r, r_tilde)?;
                Ok((g.clone(), g))
            }
            (ProblemKind::UnimodalPath { ell }, MutationKernel::Rls) => {
                let a = lower_bounds_for_kernel(LowerBoundPreset::RlsUnimodal { n, ell: *ell })?;
                let step = 1.0 / n as f64;
                let b = BoundMatrix::from_fn(ell - 1, BoundKind::Upper, |i, j| {
                    if j <= i {
                        1.0
                    } else {
                        step
                    }
                })?;
                Ok((a, b))
            }
            (ProblemKind::TwoSat { .. }, MutationKernel::SatWalk(_)) => {
                let a = lower_bounds_for_kernel(LowerBoundPreset::SatWalk { m: n })?;
                Ok((a, BoundMatrix::ones(n, BoundKind::Upper)))
            }
            (ProblemKind::Balas { top, .. }, MutationKernel::Point { q }) => {
                let a = lower_bounds_for_kernel(LowerBoundPreset::BalasPoint {
                    n,
                    q: *q,
                    top: *top,
                })?;
                let m = n / 2;
                let nf = n as f64;
                let b = BoundMatrix::from_fn(m, BoundKind::Upper, |i, j| {
                    let up = (1.0 - q) * (n - i) as f64 / nf;
                    if j < i || i == m {
                        1.0
                    } else if j == i {
                        q + up
                    } else if j == i + 1 {
                        up
                    } else {
                        0.0
                    }
                })?;
                Ok((a, b))
            }
            _ => Err(Error::InvalidParameter(format!(
                "no bound matrices for the {} operator on {}",
                kernel.name(),
                self.name
            ))),
        }
    }

    /// Level distribution of a uniformly random genotype, where it has a
    /// closed form or `n` is small enough to enumerate.
    pub fn uniform_level_distribution(&self) -> Option<Vec<f64>> {
        let n = self.n;
        let m = self.m();
        let half_pow = |k: usize| 0.5f64.powi(k as i32);
        match &self.kind {
            ProblemKind::OneMax => Some(
                (0..=n)
                    .map(|k| binomial(n as u32, k as u32) * half_pow(n))
                    .collect(),
            ),
            ProblemKind::VertexCoverTriangles { triangles } => Some(
                (0..=*triangles)
                    .map(|k| {
                        binomial(*triangles as u32, k as u32)
                            * 0.75f64.powi(k as i32)
                            * 0.25f64.powi((triangles - k) as i32)
                    })
                    .collect(),
            ),
            ProblemKind::UnimodalPath { .. } => {
                // Pr{LeadingOnes = k} = 2^-(k+1) for k < n, 2^-n for k = n
                let mut p: Vec<f64> = (0..m).map(|k| half_pow(k + 1)).collect();
                p.push(half_pow(m));
                Some(p)
            }
            ProblemKind::Balas { .. } => {
                let mut p: Vec<f64> = (0..m)
                    .map(|u| binomial(n as u32, u as u32) * half_pow(n))
                    .collect();
                p.push(1.0 - p.iter().sum::<f64>());
                Some(p)
            }
            ProblemKind::TwoSat { .. } if n <= 20 => {
                let mut counts = vec![0u64; m + 1];
                for mask in 0..1u64 << n {
                    counts[self.level(&Genotype::from_mask(mask, n))] += 1;
                }
                let total = (1u64 << n) as f64;
                Some(counts.into_iter().map(|c| c as f64 / total).collect())
            }
            ProblemKind::TwoSat { .. } => None,
        }
    }

    /// Partition with empty level sets marked, found by enumeration for
    /// `n <= 20`; larger instances keep the partition unchanged.
    pub fn scan_empty_levels(&self) -> LevelPartition {
        if self.n > 20 {
            return self.partition.clone();
        }
        let mut seen = vec![false; self.m() + 1];
        for mask in 0..1u64 << self.n {
            seen[self.level(&Genotype::from_mask(mask, self.n))] = true;
        }
        let empty = (0..=self.m()).filter(|&i| !seen[i]).collect();
        self.partition.clone().with_empty_levels(empty)
    }
}

impl fmt::Display for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn leading_ones(g: &Genotype) -> usize {
    g.bits().iter().take_while(|&&b| b).count()
}

/// Vertices used by the edge-based cover of the triangles.
fn cover_size(g: &Genotype) -> usize {
    g.bits()
        .chunks_exact(3)
        .map(|t| if t[0] == t[1] && t[1] == t[2] { 3 } else { 2 })
        .sum()
}

/// Vertex cover induced by the edge-based encoding: edge `(a, b)` of a
/// triangle `(a, b, c)` takes `a` on gene 1 and `b` on gene 0, likewise for
/// `(b, c)` and `(c, a)`.
pub fn triangle_cover(bits: [bool; 3]) -> Vec<usize> {
    let edges = [(0, 1), (1, 2), (2, 0)];
    let mut cover: Vec<usize> = edges
        .iter()
        .zip(bits)
        .map(|(&(u, v), b)| if b { u } else { v })
        .collect();
    cover.sort_unstable();
    cover.dedup();
    cover
}

/// Explicit ground-set form of `B(n, n/2)`: each element is covered by one
/// `(n/2 + 1)`-subset of the `n` columns, returned as bit masks.
pub fn balas_ground_set(n: usize) -> Result<Vec<u64>> {
    if n < 4 || n % 2 == 1 || n > 20 {
        return Err(Error::InvalidParameter(format!(
            "ground-set form needs even 4 <= n <= 20, got {n}"
        )));
    }
    let size = (n / 2 + 1) as u32;
    Ok((0..1u64 << n).filter(|s| s.count_ones() == size).collect())
}

/// Fitness of `g` in the explicit set-cover form: `n - |J|` for covers,
/// minus the number of uncovered elements otherwise.
pub fn balas_ground_fitness(n: usize, subsets: &[u64], g: &Genotype) -> f64 {
    let chosen = g
        .bits()
        .iter()
        .enumerate()
        .fold(0u64, |acc, (k, &b)| if b { acc | 1 << k } else { acc });
    let uncovered = subsets.iter().filter(|&&s| s & chosen == 0).count();
    if uncovered == 0 {
        (n - g.ones_count()) as f64
    } else {
        -(uncovered as f64)
    }
}

/// Splits `key=value,key=value`.
pub fn parse_params(args: &str) -> Result<Vec<(String, String)>> {
    args.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{kv}`")))
        })
        .collect()
}

/// A problem instance together with the operator it runs with.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub problem: ProblemInstance,
    pub kernel: MutationKernel,
}

impl Preset {
    /// Parses `onemax:n=..[,q=..|,pm=..]`, `vcp:m=..,pm=..`,
    /// `unimodal:n=..,ell=..`, `2sat:n=..,seed=..[,clauses=..]` and
    /// `balas:n=..[,q=..][,top=safe|pessimistic][,shape=linear|curved]`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, args) = text.split_once(':').unwrap_or((text, ""));
        let params = parse_params(args)?;
        let known: &[&str] = match name.trim() {
            "onemax" => &["n", "q", "pm"],
            "vcp" => &["m", "pm"],
            "unimodal" => &["n", "ell"],
            "2sat" => &["n", "seed", "clauses"],
            "balas" => &["n", "q", "top", "shape"],
            _ => return Err(Error::UnknownPreset(text.to_string())),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "preset `{text}` has unknown parameter `{k}`"
            )));
        }
        let raw = |key: &str| {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
        };
        let num = |key: &str| -> Result<Option<f64>> {
            raw(key)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::Config(format!("`{key}` = `{v}`: {e}")))
                })
                .transpose()
        };
        let int = |key: &str| -> Result<usize> {
            let v =
                raw(key).ok_or_else(|| Error::Config(format!("preset `{text}` needs `{key}`")))?;
            v.parse()
                .map_err(|e| Error::Config(format!("`{key}` = `{v}`: {e}")))
        };
        let preset = match name.trim() {
            "onemax" => {
                let problem = onemax(int("n")?)?;
                let kernel = match (num("q")?, num("pm")?) {
                    (Some(_), Some(_)) => {
                        return Err(Error::Config("give either `q` or `pm`, not both".into()))
                    }
                    (_, Some(p_m)) => MutationKernel::Bitwise { p_m },
                    (Some(q), None) => MutationKernel::Point { q },
                    (None, None) => problem.default_kernel(),
                };
                Preset { problem, kernel }
            }
            "vcp" => {
                let (problem, kernel) = vcp_triangles(int("m")?, num("pm")?.unwrap_or(0.1))?;
                Preset { problem, kernel }
            }
            "unimodal" => Preset {
                problem: unimodal_path(int("n")?, int("ell")?)?,
                kernel: MutationKernel::Rls,
            },
            "2sat" => {
                let n = int("n")?;
                let clauses = raw("clauses").map_or(Ok(3 * n), |_| int("clauses"))?;
                let seed = raw("seed").map_or(Ok(0), |_| int("seed"))? as u64;
                let (formula, planted) = planted_two_sat(n, clauses, seed)?;
                let problem = two_sat_instance(formula, planted)?;
                let kernel = problem.default_kernel();
                Preset { problem, kernel }
            }
            _ => {
                let shape = match raw("shape") {
                    None | Some("linear") => BalasShape::Linear,
                    Some("curved") => BalasShape::Curved,
                    Some(other) => return Err(Error::Config(format!("unknown shape `{other}`"))),
                };
                let top = match raw("top") {
                    None | Some("safe") => BalasTop::Safe,
                    Some("pessimistic") => BalasTop::Pessimistic,
                    Some(other) => return Err(Error::Config(format!("unknown top row `{other}`"))),
                };
                let problem = balas_scp(int("n")?, shape, top)?;
                let kernel = match num("q")? {
                    Some(q) => MutationKernel::Point { q },
                    None => problem.default_kernel(),
                };
                Preset { problem, kernel }
            }
        };
        preset.kernel.validate()?;
        Ok(preset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn onemax_values() {
        let p = onemax(6).unwrap();
        assert_eq!(p.fitness(&Genotype::zeros(6)), 0.0);
        assert_eq!(p.fitness(&Genotype::ones(6)), 6.0);
        assert_eq!(p.fitness(&Genotype::from_mask(0b001101, 6)), 3.0);
    }

    #[test]
    fn triangle_patterns() {
        for mask in 0..8u64 {
            let g = Genotype::from_mask(mask, 3);
            let cover = triangle_cover([g.0[0], g.0[1], g.0[2]]);
            let constant = mask == 0 || mask == 7;
            assert_eq!(cover.len(), if constant { 3 } else { 2 });
        }
        let (p, _) = vcp_triangles(8, 0.1).unwrap();
        assert_eq!(p.level(&Genotype::zeros(24)), 0);
        assert_eq!(p.level(&Genotype::ones(24)), 0);
    }

    #[test]
    fn unimodal_extremes() {
        let p = unimodal_path(8, 5).unwrap();
        assert_eq!(p.fitness(&Genotype::ones(8)), 4.0);
        assert_eq!(p.fitness(&Genotype::zeros(8)), 0.0);
        assert!(unimodal_path(4, 6).is_err());
    }

    #[test]
    fn balas_levels() {
        let p = balas_scp(8, BalasShape::Linear, BalasTop::Safe).unwrap();
        let g = Genotype::from_mask(0b0000_1111, 8);
        assert!(p.is_optimal(&g));
        assert_eq!(p.level(&g), 4);
        let big = Genotype::from_mask(0b0011_1111, 8);
        assert_eq!(p.level(&big), 4);
        assert!(!p.is_optimal(&big));
        assert_eq!(p.level(&Genotype::from_mask(0b0000_0111, 8)), 3);
        assert!(balas_scp(7, BalasShape::Linear, BalasTop::Safe).is_err());
    }

    #[test]
    fn balas_one_uncovered_element_below_half() {
        let subsets = balas_ground_set(8).unwrap();
        let g = Genotype::from_mask(0b0000_0111, 8);
        assert_eq!(balas_ground_fitness(8, &subsets, &g), -1.0);
    }

    #[test]
    fn preset_parsing() {
        let p = Preset::parse("onemax:n=3,q=0.25").unwrap();
        assert_eq!(p.kernel, MutationKernel::Point { q: 0.25 });
        let p = Preset::parse("vcp:m=8,pm=0.1").unwrap();
        assert_eq!(p.problem.n(), 24);
        assert_eq!(p.problem.m(), 8);
        let p = Preset::parse("2sat:n=10,seed=4").unwrap();
        assert_eq!(p.problem.m(), 10);
        assert!(matches!(
            Preset::parse("knapsack:n=3"),
            Err(Error::UnknownPreset(_))
        ));
        assert!(Preset::parse("onemax:n=3,bogus=1").is_err());
        assert!(Preset::parse("onemax:n=3,q=1.5").is_err());
    }

    #[test]
    fn uniform_distributions_sum_to_one() {
        for text in [
            "onemax:n=7",
            "vcp:m=4,pm=0.1",
            "unimodal:n=9,ell=6",
            "balas:n=8",
            "2sat:n=8,seed=1",
        ] {
            let p = Preset::parse(text).unwrap().problem;
            let d = p.uniform_level_distribution().unwrap();
            assert_eq!(d.len(), p.m() + 1);
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{text}");
        }
    }
}
