//! Config-driven batch runs: bound trajectories, Monte-Carlo grids and the
//! merged long-format table that the plots are drawn from.
//!
//! A config file holds one or more `[[experiment]]` tables:
//!
//! ```toml
//! [[experiment]]
//! name = "fig2"
//! preset = "vcp:m=8,pm=0.1"
//! lambda = [1, 2, 10]
//! s = [2]
//! bounds = ["lower-linear", "upper-jensen"]
//! runs = 1000
//! t_max = 150
//! seed = 42
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bounds::{
    closed_form_lower_bound_unimodal, infinite_population_recursion, lower_bound_chain,
    lower_bound_linear, markov_tail_bound, one_comma_lambda_recursion, rls_exp_tail_bound,
    upper_bound_jensen, BoundTrajectory, TrajectoryKind,
};
use crate::error::{Error, Result};
use crate::levels::PopulationVector;
use crate::problems::{Preset, ProblemKind};
use crate::simulator::{run_many, AlgorithmConfig, InitRule, Variant};
use crate::stats::ProportionEstimate;
use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantName {
    Ea,
    OneCommaLambda,
    OnePlusOne,
    Rls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitName {
    #[default]
    Zeros,
    Uniform,
    Shared,
}

/// What the Monte-Carlo series measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimand {
    /// `Pr{g_1^(t) in H_level}`.
    #[default]
    Level,
    /// `Pr{T > t}` for the first hitting iteration `T`.
    Tail,
}

/// Bound series that can be requested next to the simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundName {
    LowerLinear,
    LowerChain,
    UpperJensen,
    InfinitePopulation,
    OneCommaLambda,
    UnimodalClosedForm,
    ExpTail,
    MarkovTail,
}

impl BoundName {
    pub fn label(self) -> &'static str {
        match self {
            BoundName::LowerLinear => TrajectoryKind::LowerLinear.label(),
            BoundName::LowerChain => TrajectoryKind::LowerChain.label(),
            BoundName::UpperJensen => TrajectoryKind::UpperJensen.label(),
            BoundName::InfinitePopulation => TrajectoryKind::InfinitePopulation.label(),
            BoundName::OneCommaLambda => TrajectoryKind::OneCommaLambdaExact.label(),
            BoundName::UnimodalClosedForm => "unimodal_closed_form",
            BoundName::ExpTail => "exp_tail",
            BoundName::MarkovTail => "markov_tail",
        }
    }
}

/// One experiment: a preset, a `(lambda, s)` grid and the bounds to draw.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub preset: String,
    #[serde(default = "default_variant")]
    pub variant: VariantName,
    #[serde(default = "default_grid")]
    pub lambda: Vec<usize>,
    #[serde(default = "default_grid")]
    pub s: Vec<usize>,
    #[serde(default)]
    pub bounds: Vec<BoundName>,
    pub runs: u64,
    pub t_max: u64,
    #[serde(default = "default_step")]
    pub t_step: u64,
    #[serde(default)]
    pub seed: u64,
    /// Level whose membership is tracked; defaults to `m`.
    #[serde(default)]
    pub level: Option<usize>,
    #[serde(default)]
    pub init: InitName,
    #[serde(default)]
    pub estimand: Estimand,
}

fn default_variant() -> VariantName {
    VariantName::Ea
}

fn default_grid() -> Vec<usize> {
    vec![1]
}

fn default_step() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: Vec<ExperimentSpec>,
}

/// Command-line overrides applied on top of every experiment in a file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<u64>,
}

pub fn parse_config(text: &str) -> Result<Vec<ExperimentSpec>> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if file.experiment.is_empty() {
        return Err(Error::Config("no [[experiment]] tables".into()));
    }
    Ok(file.experiment)
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<Vec<ExperimentSpec>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut specs = parse_config(&text)?;
    for spec in &mut specs {
        if let Some(seed) = overrides.seed {
            spec.seed = seed;
        }
        if let Some(runs) = overrides.runs {
            spec.runs = runs;
        }
    }
    Ok(specs)
}

/// A grid point with everything resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub lambda: usize,
    pub s: usize,
    pub config: AlgorithmConfig,
}

impl ExperimentSpec {
    pub fn resolve_preset(&self) -> Result<Preset> {
        Preset::parse(&self.preset)
    }

    /// Tracked level, `m` unless configured.
    pub fn level(&self, preset: &Preset) -> Result<usize> {
        let m = preset.problem.m();
        match self.level {
            None => Ok(m),
            Some(j) if (1..=m).contains(&j) => Ok(j),
            Some(j) => Err(Error::Config(format!(
                "{}: level {j} outside 1..={m}",
                self.name
            ))),
        }
    }

    fn check(&self) -> Result<()> {
        if self.runs < 30 {
            return Err(Error::Config(format!(
                "{}: runs = {} but confidence intervals need at least 30",
                self.name, self.runs
            )));
        }
        if self.t_step == 0 {
            return Err(Error::Config(format!(
                "{}: t_step must be positive",
                self.name
            )));
        }
        if self.lambda.is_empty() || self.s.is_empty() {
            return Err(Error::Config(format!(
                "{}: empty lambda or s grid",
                self.name
            )));
        }
        if let Some(&bad) = self.lambda.iter().chain(&self.s).find(|&&v| v == 0) {
            return Err(Error::Config(format!(
                "{}: grid value {bad} must be >= 1",
                self.name
            )));
        }
        Ok(())
    }

    /// Iterations written to the merged table.
    pub fn iterations(&self) -> Vec<u64> {
        let mut ts: Vec<u64> = (0..=self.t_max).step_by(self.t_step as usize).collect();
        if ts.last() != Some(&self.t_max) {
            ts.push(self.t_max);
        }
        ts
    }

    fn init_rule(&self) -> InitRule {
        match self.init {
            InitName::Zeros => InitRule::AllZeros,
            InitName::Uniform => InitRule::Uniform,
            InitName::Shared => InitRule::SharedUniform,
        }
    }

    /// Distribution of the level of one initial individual.
    fn initial_distribution(&self, preset: &Preset) -> Result<Vec<f64>> {
        let m = preset.problem.m();
        match self.init {
            InitName::Zeros => {
                let level = preset
                    .problem
                    .level(&crate::kernels::Genotype::zeros(preset.problem.n()));
                let mut p = vec![0.0; m + 1];
                p[level] = 1.0;
                Ok(p)
            }
            InitName::Uniform | InitName::Shared => {
                preset.problem.uniform_level_distribution().ok_or_else(|| {
                    Error::Config(format!(
                        "{}: no level distribution for uniform init on {}",
                        self.name, preset.problem
                    ))
                })
            }
        }
    }

    /// Every `(lambda, s)` combination as a validated configuration. For the
    /// single-individual variants `s` is meaningless and collapses to 1.
    pub fn grid(&self, preset: &Preset) -> Result<Vec<GridPoint>> {
        self.check()?;
        let mut points = Vec::new();
        for &lambda in &self.lambda {
            for &s in &self.s {
                let variant = match self.variant {
                    VariantName::Ea => Variant::Ea { lambda, s },
                    VariantName::OneCommaLambda => Variant::OneCommaLambda { lambda },
                    VariantName::OnePlusOne => Variant::OnePlusOne,
                    VariantName::Rls => Variant::Rls,
                };
                let config =
                    AlgorithmConfig::new(variant, preset.kernel.clone(), preset.problem.clone())
                        .with_init(self.init_rule())
                        .with_t_max(self.t_max)
                        .with_seed(self.seed)
                        .validated()?;
                let (lambda, s) = match config.variant {
                    Variant::Ea { lambda, s } => (lambda, s),
                    other => (other.lambda(), 1),
                };
                if !points
                    .iter()
                    .any(|p: &GridPoint| p.lambda == lambda && p.s == s)
                {
                    points.push(GridPoint { lambda, s, config });
                }
            }
        }
        Ok(points)
    }
}

/// One bound series, keyed by the grid coordinate it depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSeries {
    pub name: BoundName,
    pub lambda: Option<usize>,
    pub s: Option<usize>,
    /// Full trajectory when the bound is vector-valued.
    pub trajectory: Option<BoundTrajectory>,
    /// `(t, value)` at the tracked level.
    pub points: Vec<(u64, f64)>,
}

impl BoundSeries {
    fn from_trajectory(
        name: BoundName,
        lambda: Option<usize>,
        s: Option<usize>,
        trajectory: BoundTrajectory,
        level: usize,
    ) -> Self {
        let points = trajectory.series(level);
        Self {
            name,
            lambda,
            s,
            trajectory: Some(trajectory),
            points,
        }
    }

    fn file_stem(&self, experiment: &str) -> String {
        let mut stem = format!("{experiment}_{}", self.name.label());
        if let Some(l) = self.lambda {
            stem.push_str(&format!("_lambda{l}"));
        }
        if let Some(s) = self.s {
            stem.push_str(&format!("_s{s}"));
        }
        stem
    }
}

fn unimodal_params(preset: &Preset, what: BoundName) -> Result<(usize, usize)> {
    match preset.problem.kind() {
        ProblemKind::UnimodalPath { ell } => Ok((preset.problem.n(), *ell)),
        _ => Err(Error::Config(format!(
            "bound `{}` only applies to unimodal presets",
            what.label()
        ))),
    }
}

fn closed_series(ts: &[u64], f: impl Fn(u64) -> Result<f64>) -> Result<Vec<(u64, f64)>> {
    ts.iter().map(|&t| Ok((t, f(t)?))).collect()
}

fn with_context<T>(spec: &ExperimentSpec, what: BoundName, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(_) => e,
        other => Error::Config(format!(
            "{} ({}), {}: {other}",
            spec.name,
            spec.preset,
            what.label()
        )),
    })
}

/// Computes every requested bound of `spec`.
pub fn compute_bounds(spec: &ExperimentSpec) -> Result<Vec<BoundSeries>> {
    let preset = spec.resolve_preset()?;
    let level = spec.level(&preset)?;
    spec.check()?;
    let (lower, upper) = if spec.bounds.iter().any(|b| {
        matches!(
            b,
            BoundName::LowerLinear
                | BoundName::LowerChain
                | BoundName::UpperJensen
                | BoundName::InfinitePopulation
                | BoundName::OneCommaLambda
        )
    }) {
        let pair = preset.problem.bound_pair(&preset.kernel);
        let pair = with_context(spec, spec.bounds[0], pair)?;
        (Some(pair.0), Some(pair.1))
    } else {
        (None, None)
    };
    let p0 = spec.initial_distribution(&preset)?;
    let z0 = PopulationVector::from_level_distribution(&p0)?;
    let ts = spec.iterations();
    let sorted = |v: &[usize]| {
        let mut v = v.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (svals, lvals) = (sorted(&spec.s), sorted(&spec.lambda));

    let mut out = Vec::new();
    for &name in &spec.bounds {
        let a = lower.as_ref();
        let b = upper.as_ref();
        match name {
            BoundName::LowerLinear => {
                let bound =
                    with_context(spec, name, lower_bound_linear(a.unwrap(), &z0, spec.t_max))?;
                out.push(BoundSeries::from_trajectory(
                    name,
                    None,
                    None,
                    bound.trajectory,
                    level,
                ));
            }
            BoundName::LowerChain => {
                let partition = preset.problem.scan_empty_levels();
                let tr = lower_bound_chain(a.unwrap(), &partition, &p0, spec.t_max);
                let tr = with_context(spec, name, tr)?;
                out.push(BoundSeries::from_trajectory(name, None, None, tr, level));
            }
            BoundName::UpperJensen => {
                for &s in &svals {
                    let tr = upper_bound_jensen(b.unwrap(), &z0, s as u32, spec.t_max);
                    let tr = with_context(spec, name, tr)?;
                    out.push(BoundSeries::from_trajectory(name, None, Some(s), tr, level));
                }
            }
            BoundName::InfinitePopulation => {
                for &s in &svals {
                    let tr = infinite_population_recursion(
                        b.unwrap(),
                        z0.values(),
                        s as u32,
                        spec.t_max,
                    );
                    let tr = with_context(spec, name, tr)?;
                    out.push(BoundSeries::from_trajectory(name, None, Some(s), tr, level));
                }
            }
            BoundName::OneCommaLambda => {
                for &lambda in &lvals {
                    let tr = one_comma_lambda_recursion(
                        b.unwrap(),
                        z0.values(),
                        lambda as u32,
                        spec.t_max,
                    );
                    let tr = with_context(spec, name, tr)?;
                    out.push(BoundSeries::from_trajectory(
                        name,
                        Some(lambda),
                        None,
                        tr,
                        level,
                    ));
                }
            }
            BoundName::UnimodalClosedForm => {
                let (n, ell) = unimodal_params(&preset, name)?;
                let points = closed_series(&ts, |t| closed_form_lower_bound_unimodal(n, ell, t))?;
                out.push(BoundSeries {
                    name,
                    lambda: None,
                    s: None,
                    trajectory: None,
                    points,
                });
            }
            BoundName::ExpTail => {
                let (n, ell) = unimodal_params(&preset, name)?;
                let points = closed_series(&ts, |t| rls_exp_tail_bound(n, ell, t))?;
                out.push(BoundSeries {
                    name,
                    lambda: None,
                    s: None,
                    trajectory: None,
                    points,
                });
            }
            BoundName::MarkovTail => {
                let (n, ell) = unimodal_params(&preset, name)?;
                let points = closed_series(&ts, |t| markov_tail_bound(n, ell, t))?;
                out.push(BoundSeries {
                    name,
                    lambda: None,
                    s: None,
                    trajectory: None,
                    points,
                });
            }
        }
    }
    Ok(out)
}

/// Writes one CSV per bound series and returns the paths written. An empty
/// bound list writes nothing.
pub fn cmd_bounds(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let series = compute_bounds(spec)?;
    if series.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for b in &series {
        let path = out_dir.join(format!("{}.csv", b.file_stem(&spec.name)));
        match &b.trajectory {
            Some(tr) => tr.write_csv(fs::File::create(&path)?)?,
            None => {
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(["t", "value", "kind"])?;
                for (t, v) in &b.points {
                    w.write_record([t.to_string(), v.to_string(), b.name.label().to_string()])?;
                }
                w.flush()?;
            }
        }
        written.push(path);
    }
    Ok(written)
}

/// Runs every grid point and writes the per-run records.
pub fn cmd_simulate(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let preset = spec.resolve_preset()?;
    let level = spec.level(&preset)?;
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for point in spec.grid(&preset)? {
        let ensemble = run_many(&point.config, spec.runs)?;
        let path = out_dir.join(format!(
            "{}_runs_lambda{}_s{}.csv",
            spec.name, point.lambda, point.s
        ));
        ensemble.write_csv(fs::File::create(&path)?, level)?;
        written.push(path);
    }
    Ok(written)
}

/// One row of the merged table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub preset: String,
    pub lambda: Option<usize>,
    pub s: Option<usize>,
    pub t: u64,
    pub series: String,
    pub value: f64,
    pub ci: Option<(f64, f64)>,
}

pub const MERGED_HEADER: [&str; 8] = [
    "preset", "lambda", "s", "t", "series", "value", "ci_lo", "ci_hi",
];

/// Runs the grid, computes the bounds, and returns the merged rows.
pub fn experiment_rows(spec: &ExperimentSpec) -> Result<Vec<Row>> {
    let preset = spec.resolve_preset()?;
    let level = spec.level(&preset)?;
    let ts = spec.iterations();
    let mut rows = Vec::new();
    for point in spec.grid(&preset)? {
        let ensemble = run_many(&point.config, spec.runs)?;
        for &t in &ts {
            let est: ProportionEstimate = match spec.estimand {
                Estimand::Level => ensemble.level_probability(level, t),
                Estimand::Tail => ensemble.hit_tail(t),
            };
            rows.push(Row {
                preset: spec.preset.clone(),
                lambda: Some(point.lambda),
                s: Some(point.s),
                t,
                series: "empirical".into(),
                value: est.p_hat,
                ci: Some((est.ci_lo, est.ci_hi)),
            });
        }
    }
    for b in compute_bounds(spec)? {
        for &(t, value) in b.points.iter().filter(|(t, _)| ts.binary_search(t).is_ok()) {
            rows.push(Row {
                preset: spec.preset.clone(),
                lambda: b.lambda,
                s: b.s,
                t,
                series: b.name.label().into(),
                value,
                ci: None,
            });
        }
    }
    Ok(rows)
}

pub fn write_rows<W: std::io::Write>(rows: &[Row], out: W) -> Result<()> {
    let opt = |v: Option<usize>| v.map_or_else(String::new, |v| v.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MERGED_HEADER)?;
    for r in rows {
        let (lo, hi) = r.ci.map_or((String::new(), String::new()), |(lo, hi)| {
            (lo.to_string(), hi.to_string())
        });
        w.write_record([
            r.preset.clone(),
            opt(r.lambda),
            opt(r.s),
            r.t.to_string(),
            r.series.clone(),
            r.value.to_string(),
            lo,
            hi,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<name>.csv` (merged long format) and `<name>.svg`.
pub fn cmd_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let rows = experiment_rows(spec)?;
    let mut buf = Vec::new();
    write_rows(&rows, &mut buf)?;
    let text = String::from_utf8(buf).expect("csv output is utf-8");
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{}.csv", spec.name));
    let svg_path = out_dir.join(format!("{}.svg", spec.name));
    fs::write(&csv_path, &text)?;
    fs::write(&svg_path, svg::render(&text, &spec.name)?)?;
    Ok((csv_path, svg_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
        [[experiment]]
        name = "small"
        preset = "onemax:n=4,q=0.2"
        lambda = [1, 3]
        s = [2]
        bounds = ["lower-linear", "upper-jensen"]
        runs = 40
        t_max = 10
        seed = 3
    "#;

    #[test]
    fn parses_and_builds_grid() {
        let specs = parse_config(SMALL).unwrap();
        let spec = &specs[0];
        let preset = spec.resolve_preset().unwrap();
        let grid = spec.grid(&preset).unwrap();
        assert_eq!(
            grid.iter().map(|g| (g.lambda, g.s)).collect::<Vec<_>>(),
            [(1, 1), (3, 2)]
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = SMALL.replace("seed = 3", "seed = 3\nfoo = 1");
        assert!(matches!(parse_config(&text), Err(Error::Config(_))));
    }

    #[test]
    fn zero_runs_rejected() {
        let mut spec = parse_config(SMALL).unwrap().remove(0);
        spec.runs = 0;
        let preset = spec.resolve_preset().unwrap();
        assert!(spec.grid(&preset).is_err());
    }

    #[test]
    fn rows_cover_grid_and_bounds() {
        let spec = parse_config(SMALL).unwrap().remove(0);
        let rows = experiment_rows(&spec).unwrap();
        let empirical = rows.iter().filter(|r| r.series == "empirical").count();
        // two grid points, eleven iterations each
        assert_eq!(empirical, 22);
        // bounds follow the configured s grid, not the collapsed lambda = 1 point
        assert!(rows
            .iter()
            .any(|r| r.series == "upper_jensen" && r.s == Some(2)));
        assert!(!rows
            .iter()
            .any(|r| r.series == "upper_jensen" && r.s == Some(1)));
    }

    #[test]
    fn iteration_grid_includes_end() {
        let mut spec = parse_config(SMALL).unwrap().remove(0);
        spec.t_step = 4;
        assert_eq!(spec.iterations(), [0, 4, 8, 10]);
    }
}
