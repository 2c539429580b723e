//! Normal-approximation confidence intervals for Monte-Carlo estimates.

use serde::Serialize;

pub const Z95: f64 = 1.96;
pub const Z99: f64 = 2.576;

/// Binomial proportion with a symmetric normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProportionEstimate {
    pub successes: u64,
    pub runs: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `p_hat` is 0 or 1, where the normal approximation collapses. The
    /// interval then falls back to the rule of three, `3 / runs` wide.
    pub degenerate: bool,
}

impl ProportionEstimate {
    pub fn new(successes: u64, runs: u64, z: f64) -> Self {
        assert!(runs > 0, "no runs");
        assert!(successes <= runs);
        let n = runs as f64;
        let p_hat = successes as f64 / n;
        let degenerate = successes == 0 || successes == runs;
        let (ci_lo, ci_hi) = if degenerate {
            let w = (3.0 / n).min(1.0);
            if successes == 0 {
                (0.0, w)
            } else {
                (1.0 - w, 1.0)
            }
        } else {
            let half = z * (p_hat * (1.0 - p_hat) / n).sqrt();
            (p_hat - half, p_hat + half)
        };
        Self {
            successes,
            runs,
            p_hat,
            ci_lo,
            ci_hi,
            degenerate,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_hi - self.ci_lo)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_lo <= x && x <= self.ci_hi
    }
}

/// Sample mean with a normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl MeanEstimate {
    pub fn from_samples(samples: impl IntoIterator<Item = f64>, z: f64) -> Self {
        let (mut n, mut mean, mut m2) = (0u64, 0.0, 0.0);
        for x in samples {
            n += 1;
            let delta = x - mean;
            mean += delta / n as f64;
            m2 += delta * (x - mean);
        }
        assert!(n > 0, "no samples");
        let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        let std_err = (var / n as f64).sqrt();
        Self {
            mean,
            std_err,
            ci_lo: mean - z * std_err,
            ci_hi: mean + z * std_err,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_hi - self.ci_lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_successes_flagged() {
        let e = ProportionEstimate::new(50, 50, Z95);
        assert_eq!(e.p_hat, 1.0);
        assert!(e.degenerate);
        assert!(e.ci_lo < 1.0);
    }

    #[test]
    fn fair_coin_width() {
        let e = ProportionEstimate::new(5000, 10_000, Z95);
        assert!((2.0 * e.half_width() - 0.0196).abs() < 1e-12);
    }

    #[test]
    fn thousand_runs_half_width_bound() {
        let worst = (1..1000)
            .map(|k| ProportionEstimate::new(k, 1000, Z95).half_width())
            .fold(0.0, f64::max);
        assert!(worst <= 0.031);
    }

    #[test]
    fn mean_of_constant() {
        let e = MeanEstimate::from_samples([0.25; 10], Z95);
        assert_eq!(e.mean, 0.25);
        assert_eq!(e.std_err, 0.0);
    }
}
