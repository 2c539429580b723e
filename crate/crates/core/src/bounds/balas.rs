//! Stationary quantities for the set-cover family whose optimal covers are
//! exactly the `n/2`-subsets, under point mutation.

use crate::error::{Error, Result};
use crate::kernels::{binomial, lower_bounds_for_kernel, BalasTop, LowerBoundPreset};
use crate::levels::BoundMatrix;

fn half(n: usize) -> Result<usize> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "n must be even and >= 4, got {n}"
        )));
    }
    Ok(n / 2)
}

/// `v_i = sum_{l = i}^{n/2} C(n, l) / 2^(n-1)` for `i = 1..=n/2`, the
/// Ehrenfest-urn formula with every pair of mirrored states merged.
///
/// The merged state `n/2` has no mirror image, so this doubles its mass;
/// see [`balas_grouped_ehrenfest`] for the stationary vector that does not.
pub fn balas_stationary_vector(n: usize) -> Result<Vec<f64>> {
    let m = half(n)?;
    let scale = 2f64.powi(n as i32 - 1);
    Ok(tail_sums(m, |l| binomial(n as u32, l as u32) / scale))
}

/// Cumulative stationary vector of the level chain built from the
/// pessimistic bounds: mirrored Ehrenfest states merged, with the middle
/// state counted once.
pub fn balas_grouped_ehrenfest(n: usize) -> Result<Vec<f64>> {
    let m = half(n)?;
    let total = 2f64.powi(n as i32);
    Ok(tail_sums(m, |l| {
        let weight = if l == m { 1.0 } else { 2.0 };
        weight * binomial(n as u32, l as u32) / total
    }))
}

fn tail_sums(m: usize, mass: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut v = vec![0.0; m];
    let mut acc = 0.0;
    for i in (1..=m).rev() {
        acc += mass(i);
        v[i - 1] = acc;
    }
    v
}

/// Largest absolute residual of the printed linear system for `v`:
/// interior rows `i = 2..n/2-1` and the two boundary rows.
pub fn balas_stationary_residual(n: usize, v: &[f64]) -> Result<f64> {
    let m = half(n)?;
    if v.len() != m {
        return Err(Error::Dimension(format!(
            "expected {m} components, got {}",
            v.len()
        )));
    }
    let nf = n as f64;
    let vi = |i: usize| v[i - 1];
    let mut worst = (vi(1) * (nf + 1.0) / nf - vi(2) / nf - 1.0).abs();
    worst = worst.max((-vi(m - 1) * (nf + 2.0) / (2.0 * nf) + vi(m) * (nf - 1.0) / nf).abs());
    for i in 2..m {
        let r = -vi(i - 1) * (nf - i as f64 + 1.0) / nf + vi(i) * (nf + 1.0) / nf
            - vi(i + 1) * i as f64 / nf;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

pub fn balas_lower_bounds(n: usize, q: f64, top: BalasTop) -> Result<BoundMatrix> {
    lower_bounds_for_kernel(LowerBoundPreset::BalasPoint { n, q, top })
}

/// `(c, t)` with `c n ln n = ((n + 1) / 2) ln(n / v_m)` and `t = ceil(c n ln n)`.
pub fn balas_horizon(n: usize, v_m: f64) -> Result<(f64, u64)> {
    half(n)?;
    if v_m.is_nan() || v_m <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "v_m must be positive, got {v_m}"
        )));
    }
    let nf = n as f64;
    let x = (nf + 1.0) / 2.0 * (nf / v_m).ln();
    Ok((x / (nf * nf.ln()), x.ceil() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n4_top_component() {
        let v = balas_stationary_vector(4).unwrap();
        assert!((v[1] - 0.75).abs() < 1e-15);
        assert!(balas_stationary_vector(5).is_err());
    }

    #[test]
    fn top_component_is_central_binomial() {
        for n in [4usize, 8, 12, 16] {
            let v = balas_stationary_vector(n).unwrap();
            let expected = binomial(n as u32, n as u32 / 2) / 2f64.powi(n as i32 - 1);
            assert_eq!(v[n / 2 - 1], expected);
        }
    }

    #[test]
    fn grouped_vector_is_a_cumulative_distribution() {
        for n in [4usize, 8, 12, 16, 20] {
            let v = balas_grouped_ehrenfest(n).unwrap();
            // mass of level 0 is 2 / 2^n
            assert!((v[0] - (1.0 - 2.0 / 2f64.powi(n as i32))).abs() < 1e-14);
            assert!(v.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn horizon_matches_definition() {
        let v = balas_stationary_vector(8).unwrap();
        let (c, t) = balas_horizon(8, v[3]).unwrap();
        assert!((c * 8.0 * 8f64.ln() - 4.5 * (8.0 / v[3]).ln()).abs() < 1e-12);
        assert_eq!(t, (4.5 * (8.0 / v[3]).ln()).ceil() as u64);
    }
}
