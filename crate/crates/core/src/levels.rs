//! Fitness-level partitions, population vectors and transition-bound
//! matrices.
//!
//! Levels are dense indices `0..=m`. Level `i` collects the genotypes whose
//! fitness lies in `[phi_i, phi_{i+1})` (the level set `A_i`); the Lebesgue
//! set `H_j` is the union of levels `j..=m`. Bound matrices are stored in the
//! cumulative form: row `i` is the source level `A_i`, column `j` (1-based,
//! `1..=m`) the target set `H_j`. Column `j = 0` would be `H_0`, the whole
//! search space, and is implicitly 1.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Comparison slack for matrices assembled from floating-point formulas.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPartition {
    thresholds: Vec<f64>,
    #[serde(default)]
    empty_levels: Vec<usize>,
}

impl LevelPartition {
    /// `thresholds` are `phi_0 < phi_1 < ... < phi_m`; at least two are needed.
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.len() < 2 {
            return Err(Error::InvalidParameter(
                "a partition needs at least two thresholds (m >= 1)".into(),
            ));
        }
        if let Some(w) = thresholds
            .windows(2)
            .position(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::InvalidParameter(format!(
                "thresholds must be strictly increasing: phi_{} = {} >= phi_{} = {}",
                w,
                thresholds[w],
                w + 1,
                thresholds[w + 1]
            )));
        }
        Ok(Self {
            thresholds,
            empty_levels: Vec::new(),
        })
    }

    /// Thresholds `0, 1, ..., m`, the canonical partition of any integer
    /// valued fitness with range `0..=m`.
    pub fn canonical(m: usize) -> Self {
        Self {
            thresholds: (0..=m).map(|i| i as f64).collect(),
            empty_levels: Vec::new(),
        }
    }

    /// Marks level sets known to contain no genotype.
    pub fn with_empty_levels(mut self, mut empty: Vec<usize>) -> Self {
        empty.sort_unstable();
        empty.dedup();
        self.empty_levels = empty;
        self
    }

    pub fn m(&self) -> usize {
        self.thresholds.len() - 1
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn empty_levels(&self) -> &[usize] {
        &self.empty_levels
    }

    pub fn all_levels_nonempty(&self) -> bool {
        self.empty_levels.is_empty()
    }

    /// Level index of a fitness value. Values below `phi_0` map to level 0.
    pub fn classify(&self, fitness: f64) -> usize {
        // number of thresholds <= fitness, minus one
        let above = self.thresholds.partition_point(|&phi| phi <= fitness);
        above.saturating_sub(1)
    }

    /// `fitness` belongs to the Lebesgue set `H_j`.
    pub fn in_lebesgue_set(&self, fitness: f64, j: usize) -> bool {
        fitness >= self.thresholds[j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resolution {
    /// Proportions of a population of `lambda` individuals.
    Exact { lambda: usize },
    /// Expectations; any real value in `[0, 1]`.
    Expected,
}

/// Proportions `z_1 >= ... >= z_m` of a population lying in `H_1..H_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationVector {
    values: Vec<f64>,
    resolution: Resolution,
}

impl PopulationVector {
    pub fn expected(values: Vec<f64>) -> Result<Self> {
        let v = Self {
            values,
            resolution: Resolution::Expected,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            values: vec![0.0; m],
            resolution: Resolution::Expected,
        }
    }

    /// Builds the exact vector of a population from per-level counts
    /// `counts[i] = |X ∩ A_i|`, `i = 0..=m`.
    pub fn from_level_counts(counts: &[usize]) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::Dimension(
                "need counts for levels 0..=m, m >= 1".into(),
            ));
        }
        let lambda: usize = counts.iter().sum();
        if lambda == 0 {
            return Err(Error::InvalidParameter("empty population".into()));
        }
        let mut values = vec![0.0; counts.len() - 1];
        let mut tail = 0usize;
        for j in (1..counts.len()).rev() {
            tail += counts[j];
            values[j - 1] = tail as f64 / lambda as f64;
        }
        Ok(Self {
            values,
            resolution: Resolution::Exact { lambda },
        })
    }

    /// Inverse of [`level_distribution`](Self::level_distribution).
    pub fn from_level_distribution(p: &[f64]) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::Dimension(
                "need a distribution over levels 0..=m".into(),
            ));
        }
        let mut values = vec![0.0; p.len() - 1];
        let mut tail = 0.0;
        for j in (1..p.len()).rev() {
            tail += p[j];
            values[j - 1] = tail.clamp(0.0, 1.0);
        }
        Self::expected(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// `z_j` with the conventions `z_0 = 1` and `z_{m+1} = 0`.
    pub fn z(&self, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else if j > self.values.len() {
            0.0
        } else {
            self.values[j - 1]
        }
    }

    /// `p_i = z_i - z_{i+1}` for `i = 0..=m`.
    pub fn level_distribution(&self) -> Vec<f64> {
        (0..=self.m()).map(|i| self.z(i) - self.z(i + 1)).collect()
    }

    /// Checks range and ordering, and membership in `Z_lambda` for exact
    /// vectors.
    pub fn validate(&self) -> Result<()> {
        for (k, &v) in self.values.iter().enumerate() {
            if !(-FLOAT_TOLERANCE..=1.0 + FLOAT_TOLERANCE).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "z_{} = {v} outside [0, 1]",
                    k + 1
                )));
            }
        }
        if let Some(k) = self
            .values
            .windows(2)
            .position(|w| w[1] > w[0] + FLOAT_TOLERANCE)
        {
            return Err(Error::InvalidParameter(format!(
                "population vector increases: z_{} = {} < z_{} = {}",
                k + 1,
                self.values[k],
                k + 2,
                self.values[k + 1]
            )));
        }
        if !self.is_lattice_point() {
            return Err(Error::InvalidParameter(
                "exact population vector is not a multiple of 1/lambda".into(),
            ));
        }
        Ok(())
    }

    /// True when every component is a multiple of `1/lambda` (always true
    /// for expected vectors).
    pub fn is_lattice_point(&self) -> bool {
        match self.resolution {
            Resolution::Expected => true,
            Resolution::Exact { lambda } => self.values.iter().all(|&z| {
                let scaled = z * lambda as f64;
                (scaled - scaled.round()).abs() < 1e-9
            }),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["i\\j".to_string()];
        header.extend((1..=self.m()).map(|j| j.to_string()));
        w.write_record(&header)?;
        let mut row = vec!["z".to_string()];
        row.extend(self.values.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    Lower,
    Upper,
    Exact,
}

/// A failed `delta_{i-1,j} <= delta_{ij}` comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneViolation {
    pub row: usize,
    pub col: usize,
    pub value: f64,
    pub previous: f64,
}

impl fmt::Display for MonotoneViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "entry ({}, {}) = {} is below entry ({}, {}) = {}",
            self.row,
            self.col,
            self.value,
            self.row - 1,
            self.col,
            self.previous
        )
    }
}

/// A failed `delta_{ij} >= delta_{i,j+1}` comparison inside one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowViolation {
    pub row: usize,
    pub col: usize,
    pub value: f64,
    pub next: f64,
}

/// `(m+1) x m` matrix of cumulative transition bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundMatrix {
    entries: Matrix,
    kind: BoundKind,
    tolerance: f64,
}

impl BoundMatrix {
    /// `entries` must be `(m+1) x m` with values in `[0, 1]`; exact matrices
    /// must also be non-increasing along each row.
    pub fn new(entries: Matrix, kind: BoundKind) -> Result<Self> {
        Self::with_tolerance(entries, kind, FLOAT_TOLERANCE)
    }

    pub fn with_tolerance(entries: Matrix, kind: BoundKind, tolerance: f64) -> Result<Self> {
        if entries.cols() == 0 || entries.rows() != entries.cols() + 1 {
            return Err(Error::Dimension(format!(
                "bound matrix must be (m+1) x m, got {} x {}",
                entries.rows(),
                entries.cols()
            )));
        }
        for &v in entries.as_slice() {
            if !(-tolerance..=1.0 + tolerance).contains(&v) || v.is_nan() {
                return Err(Error::Probability {
                    name: "bound matrix entry",
                    value: v,
                });
            }
        }
        let matrix = Self {
            entries,
            kind,
            tolerance,
        };
        if kind == BoundKind::Exact {
            if let Some(v) = matrix.row_violation() {
                return Err(Error::InvalidParameter(format!(
                    "exact matrix row {} increases: entry ({}, {}) = {} < entry ({}, {}) = {}",
                    v.row,
                    v.row,
                    v.col,
                    v.value,
                    v.row,
                    v.col + 1,
                    v.next
                )));
            }
        }
        Ok(matrix)
    }

    pub fn from_rows(rows: &[Vec<f64>], kind: BoundKind) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(Matrix::from_rows(rows), kind)
    }

    pub fn from_fn(m: usize, kind: BoundKind, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut f = f;
        Self::new(Matrix::from_fn(m + 1, m, |i, c| f(i, c + 1)), kind)
    }

    pub fn zeros(m: usize, kind: BoundKind) -> Self {
        Self {
            entries: Matrix::zeros(m + 1, m),
            kind,
            tolerance: FLOAT_TOLERANCE,
        }
    }

    pub fn ones(m: usize, kind: BoundKind) -> Self {
        Self {
            entries: Matrix::filled(m + 1, m, 1.0),
            kind,
            tolerance: FLOAT_TOLERANCE,
        }
    }

    /// Switches to exact comparisons; for matrices built from exactly
    /// representable values.
    pub fn exact_comparison(mut self) -> Self {
        self.tolerance = 0.0;
        self
    }

    pub fn m(&self) -> usize {
        self.entries.cols()
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_kind(mut self, kind: BoundKind) -> Self {
        self.kind = kind;
        self
    }

    /// Entry for source level `i in 0..=m` and target set `H_j`, `j in 0..=m`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            self.entries[(i, j - 1)]
        }
    }

    pub fn set_entry(&mut self, i: usize, j: usize, value: f64) {
        assert!(j >= 1, "column 0 is implicit");
        self.entries[(i, j - 1)] = value;
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..=self.m())
            .map(|i| self.entries.row(i).to_vec())
            .collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone_violation().is_none()
    }

    /// First `(i, j)` with `delta_{i-1,j} > delta_{ij}`, scanning rows then
    /// columns.
    pub fn monotone_violation(&self) -> Option<MonotoneViolation> {
        let m = self.m();
        for i in 1..=m {
            for j in 1..=m {
                let previous = self.entry(i - 1, j);
                let value = self.entry(i, j);
                if previous > value + self.tolerance {
                    return Some(MonotoneViolation {
                        row: i,
                        col: j,
                        value,
                        previous,
                    });
                }
            }
        }
        None
    }

    pub fn require_monotone(&self) -> Result<()> {
        match self.monotone_violation() {
            Some(v) => Err(Error::NotMonotone(v)),
            None => Ok(()),
        }
    }

    pub fn is_row_monotone(&self) -> bool {
        self.row_violation().is_none()
    }

    pub fn row_violation(&self) -> Option<RowViolation> {
        let m = self.m();
        for i in 0..=m {
            for j in 1..m {
                let value = self.entry(i, j);
                let next = self.entry(i, j + 1);
                if next > value + self.tolerance {
                    return Some(RowViolation {
                        row: i,
                        col: j,
                        value,
                        next,
                    });
                }
            }
        }
        None
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["i\\j".to_string()];
        header.extend((1..=self.m()).map(|j| j.to_string()));
        w.write_record(&header)?;
        for i in 0..=self.m() {
            let mut row = vec![i.to_string()];
            row.extend(self.entries.row(i).iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, kind: BoundKind) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .skip(1)
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad matrix entry `{s}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows, kind)
    }
}

/// Portable form used by the structured config format.
#[derive(Serialize, Deserialize)]
struct BoundMatrixRepr {
    kind: BoundKind,
    rows: Vec<Vec<f64>>,
}

impl Serialize for BoundMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BoundMatrixRepr {
            kind: self.kind,
            rows: self.rows(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoundMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = BoundMatrixRepr::deserialize(d)?;
        BoundMatrix::from_rows(&repr.rows, repr.kind).map_err(serde::de::Error::custom)
    }
}

/// Probability that `s`-tournament selection picks a genotype from `H_j`:
/// `1 - (1 - z_j)^s`.
pub fn selection_probability(z: &PopulationVector, s: u32, j: usize) -> Result<f64> {
    if s < 1 {
        return Err(Error::InvalidParameter(
            "tournament size must be >= 1".into(),
        ));
    }
    if j < 1 || j > z.m() {
        return Err(Error::InvalidParameter(format!(
            "level {j} outside 1..={}",
            z.m()
        )));
    }
    Ok(1.0 - (1.0 - z.z(j)).powi(s as i32))
}

/// Probability that `s`-tournament selection picks a genotype from the level
/// set `A_i`: `(1 - z_{i+1})^s - (1 - z_i)^s`.
pub fn selection_probability_level_set(z: &PopulationVector, s: u32, i: usize) -> Result<f64> {
    if s < 1 {
        return Err(Error::InvalidParameter(
            "tournament size must be >= 1".into(),
        ));
    }
    if i > z.m() {
        return Err(Error::InvalidParameter(format!(
            "level {i} outside 0..={}",
            z.m()
        )));
    }
    let s = s as i32;
    Ok((1.0 - z.z(i + 1)).powi(s) - (1.0 - z.z(i)).powi(s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    /// First entry where `lower > upper`, as `(i, j, lower, upper)`.
    pub order_violation: Option<(usize, usize, f64, f64)>,
    pub lower_monotone: bool,
    pub upper_monotone: bool,
    /// `lower == upper` entrywise: the operator is level-based.
    pub level_based: bool,
}

impl PairReport {
    pub fn is_valid(&self) -> bool {
        self.order_violation.is_none()
    }
}

pub fn validate_bound_pair(lower: &BoundMatrix, upper: &BoundMatrix) -> Result<PairReport> {
    if lower.m() != upper.m() {
        return Err(Error::Dimension(format!(
            "lower bounds have m = {}, upper bounds m = {}",
            lower.m(),
            upper.m()
        )));
    }
    let m = lower.m();
    let tol = lower.tolerance().max(upper.tolerance());
    let mut order_violation = None;
    let mut level_based = true;
    'scan: for i in 0..=m {
        for j in 1..=m {
            let (a, b) = (lower.entry(i, j), upper.entry(i, j));
            if a > b + tol {
                order_violation = Some((i, j, a, b));
                level_based = false;
                break 'scan;
            }
            if (a - b).abs() > tol {
                level_based = false;
            }
        }
    }
    Ok(PairReport {
        order_violation,
        lower_monotone: lower.is_monotone(),
        upper_monotone: upper.is_monotone(),
        level_based,
    })
}

/// Checks that a row of probabilities is a distribution (used by chain code).
pub(crate) fn check_distribution(name: &'static str, p: &[f64]) -> Result<()> {
    if let Some(&v) = p
        .iter()
        .find(|&&v| !(-FLOAT_TOLERANCE..=1.0 + FLOAT_TOLERANCE).contains(&v))
    {
        return Err(Error::Probability { name, value: v });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "{name} sums to {total}, not 1"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::point_mutation_gamma;

    #[test]
    fn zero_matrix_is_monotone() {
        assert!(BoundMatrix::zeros(5, BoundKind::Lower).is_monotone());
    }

    #[test]
    fn point_mutation_gamma_monotone_at_threshold() {
        // q = 1/(n+1) makes gamma_ii - gamma_{i-1,i} vanish
        let g = point_mutation_gamma(4, 0.2).unwrap();
        assert!(g.is_monotone());
    }

    #[test]
    fn point_mutation_gamma_not_monotone_below_threshold() {
        let g = point_mutation_gamma(4, 0.1).unwrap();
        let v = g.monotone_violation().unwrap();
        // q + (q - 1)/n = 0.1 - 0.225 on the diagonal
        assert_eq!(v.row, v.col);
        assert!((v.value - v.previous - (0.1 - 0.9 / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn selection_probability_examples() {
        let z = PopulationVector::expected(vec![1.0, 0.5, 0.0]).unwrap();
        for s in 1..5 {
            assert_eq!(selection_probability(&z, s, 3).unwrap(), 0.0);
            assert_eq!(selection_probability(&z, s, 1).unwrap(), 1.0);
        }
        assert_eq!(selection_probability(&z, 2, 2).unwrap(), 0.75);
        assert!(selection_probability(&z, 0, 2).is_err());
    }

    #[test]
    fn level_set_probabilities_sum_to_one() {
        let z = PopulationVector::expected(vec![0.9, 0.6, 0.2]).unwrap();
        for s in 1..6 {
            let total: f64 = (0..=3)
                .map(|i| selection_probability_level_set(&z, s, i).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_pair_is_valid_but_not_level_based() {
        let report = validate_bound_pair(
            &BoundMatrix::zeros(3, BoundKind::Lower),
            &BoundMatrix::ones(3, BoundKind::Upper),
        )
        .unwrap();
        assert!(report.is_valid());
        assert!(!report.level_based);
        assert!(report.lower_monotone && report.upper_monotone);
    }

    #[test]
    fn gamma_pair_is_level_based() {
        let g = point_mutation_gamma(4, 0.2).unwrap();
        let report = validate_bound_pair(&g, &g).unwrap();
        assert!(report.is_valid() && report.level_based && report.lower_monotone);
    }

    #[test]
    fn order_violation_is_located() {
        let upper = BoundMatrix::ones(3, BoundKind::Upper);
        let mut lower = BoundMatrix::zeros(3, BoundKind::Lower);
        lower.set_entry(2, 1, 1.0);
        let mut upper2 = upper.clone();
        upper2.set_entry(2, 1, 0.5);
        let report = validate_bound_pair(&lower, &upper2).unwrap();
        assert_eq!(report.order_violation, Some((2, 1, 1.0, 0.5)));
        assert!(validate_bound_pair(&lower, &BoundMatrix::ones(4, BoundKind::Upper)).is_err());
    }

    #[test]
    fn classify_respects_half_open_levels() {
        let p = LevelPartition::new(vec![-3.0, 0.0, 2.5]).unwrap();
        assert_eq!(p.classify(-3.0), 0);
        assert_eq!(p.classify(-0.1), 0);
        assert_eq!(p.classify(0.0), 1);
        assert_eq!(p.classify(2.4), 1);
        assert_eq!(p.classify(2.5), 2);
        assert_eq!(p.classify(100.0), 2);
        assert!(LevelPartition::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn population_vector_from_counts() {
        let z = PopulationVector::from_level_counts(&[2, 3, 0, 5]).unwrap();
        assert_eq!(z.values(), &[0.8, 0.5, 0.5]);
        assert!(z.is_lattice_point());
        assert_eq!(z.resolution(), Resolution::Exact { lambda: 10 });
        let p = z.level_distribution();
        let back = PopulationVector::from_level_distribution(&p).unwrap();
        for (a, b) in back.values().iter().zip(z.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn increasing_population_vector_rejected() {
        assert!(PopulationVector::expected(vec![0.2, 0.5]).is_err());
        assert!(PopulationVector::expected(vec![1.2]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = point_mutation_gamma(3, 0.25).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i\\j,1,2,3\n0,"));
        let back = BoundMatrix::read_csv(&buf[..], BoundKind::Exact).unwrap();
        assert_eq!(back.rows(), g.rows());
    }

    #[test]
    fn exact_matrix_must_be_row_monotone() {
        let rows = vec![vec![0.1, 0.5], vec![1.0, 0.5], vec![1.0, 1.0]];
        assert!(BoundMatrix::from_rows(&rows, BoundKind::Exact).is_err());
        let lower = BoundMatrix::from_rows(&rows, BoundKind::Lower).unwrap();
        assert!(!lower.is_row_monotone());
    }
}
