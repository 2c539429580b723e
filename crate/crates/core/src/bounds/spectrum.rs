use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Eigenvalues of the `n x n` tridiagonal Toeplitz matrix with diagonal
/// `delta`, subdiagonal `sigma` and superdiagonal `tau`, in descending
/// order. Only the real case `sigma * tau >= 0` is supported.
pub fn toeplitz_tridiagonal_spectrum(
    n: usize,
    delta: f64,
    sigma: f64,
    tau: f64,
) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::InvalidParameter("matrix size must be >= 1".into()));
    }
    let prod = sigma * tau;
    if prod < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma * tau = {prod} < 0 gives a complex spectrum"
        )));
    }
    let r = 2.0 * prod.sqrt();
    let mut out: Vec<f64> = (1..=n)
        .map(|h| delta + r * (h as f64 * PI / (n + 1) as f64).cos())
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// Number of eigenvalues strictly below `x`, from the signs of the pivots
/// of `T - x I`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for k in 0..diag.len() {
        let coupling = if k == 0 {
            0.0
        } else {
            off[k - 1] * off[k - 1] / d
        };
        d = diag[k] - x - coupling;
        if d == 0.0 {
            d = -f64::EPSILON * (diag[k].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of a symmetric tridiagonal matrix by Sturm-sequence
/// bisection, in descending order. `off` holds the `n - 1` off-diagonal
/// entries.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(
        off.len(),
        n.saturating_sub(1),
        "off-diagonal length must be n - 1"
    );
    if n == 0 {
        return Vec::new();
    }
    // Gershgorin interval
    let radius = |k: usize| {
        let left = if k > 0 { off[k - 1].abs() } else { 0.0 };
        let right = if k + 1 < n { off[k].abs() } else { 0.0 };
        left + right
    };
    let lo = (0..n)
        .map(|k| diag[k] - radius(k))
        .fold(f64::INFINITY, f64::min);
    let hi = (0..n)
        .map(|k| diag[k] + radius(k))
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    let mut out: Vec<f64> = (0..n)
        .map(|k| {
            // k-th smallest eigenvalue: count(x) <= k below, count(x) > k above
            let (mut a, mut b) = (lo - 1e-12 * scale, hi + 1e-12 * scale);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(diag, off, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn antidiagonal_two_by_two() {
        let ev = toeplitz_tridiagonal_spectrum(2, 0.0, 1.0, 1.0).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_by_three_matches_characteristic_polynomial() {
        let ev = toeplitz_tridiagonal_spectrum(3, 2.0, 1.0, 1.0).unwrap();
        let s2 = 2f64.sqrt();
        for (a, b) in ev.iter().zip([2.0 + s2, 2.0, 2.0 - s2]) {
            assert!((a - b).abs() < 1e-14);
        }
        let bisected = symmetric_tridiagonal_eigenvalues(&[2.0; 3], &[1.0; 2]);
        for (a, b) in bisected.iter().zip(&ev) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn complex_case_rejected() {
        assert!(toeplitz_tridiagonal_spectrum(4, 0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn bisection_on_nonuniform_matrix() {
        // eigenvalues of [[1, 2], [2, -2]] are 2 and -3
        let ev = symmetric_tridiagonal_eigenvalues(&[1.0, -2.0], &[2.0]);
        assert!((ev[0] - 2.0).abs() < 1e-13);
        assert!((ev[1] + 3.0).abs() < 1e-13);
    }
}
