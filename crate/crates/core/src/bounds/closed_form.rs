//! Closed forms for RLS on functions with `ell` fitness values, each
//! non-optimal point improvable by a single bit flip.

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn check(n: usize, ell: usize) -> Result<()> {
    if n < 2 || ell < 2 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 2 and ell >= 2, got n = {n}, ell = {ell}"
        )));
    }
    Ok(())
}

/// `2 (n - 1) / n^2 * (1 - cos(pi / ell))`.
fn gap(n: usize, ell: usize) -> f64 {
    let nf = n as f64;
    2.0 * (nf - 1.0) / (nf * nf) * (1.0 - (PI / ell as f64).cos())
}

/// Largest eigenvalue of `W W^T` for the RLS lower-bound matrix.
pub fn rls_wwt_lambda_max(n: usize, ell: usize) -> Result<f64> {
    check(n, ell)?;
    let nf = n as f64;
    Ok((1.0 + (nf - 1.0).powi(2)) / (nf * nf)
        + 2.0 * (nf - 1.0) / (nf * nf) * (PI / ell as f64).cos())
}

pub fn rls_w_norm_2(n: usize, ell: usize) -> Result<f64> {
    check(n, ell)?;
    Ok((1.0 - gap(n, ell)).sqrt())
}

/// `1 - sqrt(ell - 1) * ||W||_2^t`: lower bound on the expected proportion
/// of optima after `t` iterations, for any population and tournament size.
pub fn closed_form_lower_bound_unimodal(n: usize, ell: usize, t: u64) -> Result<f64> {
    check(n, ell)?;
    let base = 1.0 - gap(n, ell);
    Ok(1.0 - ((ell - 1) as f64).sqrt() * base.powf(t as f64 / 2.0))
}

/// Tail bound `Pr{T > t} <= exp{(ln(ell - 1) - t (pi^2 - 20/ell) / (ell^2 n)) / 2}`
/// for the first hitting time of the optimum by RLS.
pub fn rls_exp_tail_bound(n: usize, ell: usize, t: u64) -> Result<f64> {
    check(n, ell)?;
    let (nf, lf) = (n as f64, ell as f64);
    let rate = (PI * PI - 20.0 / lf) / (lf * lf * nf);
    Ok((0.5 * ((lf - 1.0).ln() - t as f64 * rate)).exp())
}

/// The steeper variant `exp{ln(ell - 1)/2 - (t pi^2 / (ell^2 n)) (1 - 2/ell)}`.
/// It decays about twice as fast as `sqrt(ell - 1) ||W||_2^t` allows, so it
/// is reported for comparison only and never used as a certified bound.
pub fn rls_steep_tail_estimate(n: usize, ell: usize, t: u64) -> Result<f64> {
    check(n, ell)?;
    let (nf, lf) = (n as f64, ell as f64);
    Ok((0.5 * (lf - 1.0).ln() - t as f64 * PI * PI / (lf * lf * nf) * (1.0 - 2.0 / lf)).exp())
}

/// Markov inequality with `E[T] <= n (ell - 1)`.
pub fn markov_tail_bound(n: usize, ell: usize, t: u64) -> Result<f64> {
    check(n, ell)?;
    if t == 0 {
        return Ok(f64::INFINITY);
    }
    Ok((n * (ell - 1)) as f64 / t as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_zero_is_vacuous() {
        let b = closed_form_lower_bound_unimodal(10, 5, 0).unwrap();
        assert!((b - (1.0 - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn bound_increases_to_one() {
        let mut prev = f64::NEG_INFINITY;
        for t in (0..5000).step_by(50) {
            let b = closed_form_lower_bound_unimodal(10, 5, t).unwrap();
            assert!(b >= prev);
            prev = b;
        }
        assert!(prev > 0.999);
    }

    #[test]
    fn norm_identity() {
        let n = 10.0f64;
        let lam = rls_wwt_lambda_max(10, 5).unwrap();
        let norm = rls_w_norm_2(10, 5).unwrap();
        assert!((norm * norm - lam).abs() < 1e-14);
        let expected = (1.0 - 2.0 * 9.0 / (n * n) * (1.0 - (PI / 5.0).cos())).sqrt();
        assert!((norm - expected).abs() < 1e-15);
    }

    #[test]
    fn exp_tail_relaxes_the_closed_form() {
        for t in (0..20_000).step_by(97) {
            let tail = rls_exp_tail_bound(12, 13, t).unwrap();
            let from_closed_form = 1.0 - closed_form_lower_bound_unimodal(12, 13, t).unwrap();
            assert!(tail >= from_closed_form - 1e-15, "t = {t}");
        }
    }
}
