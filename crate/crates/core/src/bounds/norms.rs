use crate::error::{Error, Result};
use crate::linalg::Matrix;

const POWER_TOL: f64 = 1e-12;

fn require_square(w: &Matrix) -> Result<()> {
    if w.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "norm of a non-square {}x{} matrix",
            w.rows(),
            w.cols()
        )))
    }
}

/// `max_i sum_j |w_ij|`: the operator norm for row vectors times `W` under
/// the 1-norm.
pub fn matrix_norm_inf_rows(w: &Matrix) -> Result<f64> {
    require_square(w)?;
    Ok((0..w.rows())
        .map(|i| w.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

/// `max_j sum_i |w_ij|`.
pub fn matrix_norm_inf_cols(w: &Matrix) -> Result<f64> {
    require_square(w)?;
    Ok((0..w.cols())
        .map(|j| (0..w.rows()).map(|i| w[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

/// Spectral norm: square root of the largest eigenvalue of `W W^T`, found
/// by power iteration.
pub fn matrix_norm_2(w: &Matrix) -> Result<f64> {
    require_square(w)?;
    let gram = w.mul(&w.transpose());
    Ok(power_iteration(&gram).max(0.0).sqrt())
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
fn power_iteration(a: &Matrix) -> f64 {
    let n = a.rows();
    if n == 0 || a.max_abs() == 0.0 {
        return 0.0;
    }
    // deterministic start with no special symmetry
    let mut x: Vec<f64> = (0..n).map(|k| 1.0 + 0.1 * ((k + 1) as f64).sin()).collect();
    normalize(&mut x);
    let mut lambda = 0.0;
    let max_iter = 200_000usize;
    for _ in 0..max_iter {
        let y = a.right_mul(&x);
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let residual = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| (yi - rayleigh * xi).powi(2))
            .sum::<f64>()
            .sqrt();
        lambda = rayleigh;
        if residual <= POWER_TOL * rayleigh.abs().max(1.0) {
            break;
        }
        x = y;
        if normalize(&mut x) == 0.0 {
            return 0.0;
        }
    }
    lambda
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Which norm showed `||W^t|| -> 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormCertificate {
    InfRows(f64),
    InfCols(f64),
    Spectral(f64),
    /// `||W^k||_inf < 1` for the given `k`.
    Power {
        k: u64,
        norm: f64,
    },
}

impl NormCertificate {
    pub fn value(&self) -> f64 {
        match *self {
            NormCertificate::InfRows(v)
            | NormCertificate::InfCols(v)
            | NormCertificate::Spectral(v)
            | NormCertificate::Power { norm: v, .. } => v,
        }
    }
}

/// Tries the row and column infinity norms, the spectral norm, and finally
/// norms of powers `W^(2^k)`. Any value below one implies the spectral
/// radius of `W` is below one.
pub fn certify_convergence(w: &Matrix) -> Result<NormCertificate> {
    let inf_row = matrix_norm_inf_rows(w)?;
    if inf_row < 1.0 {
        return Ok(NormCertificate::InfRows(inf_row));
    }
    let inf_col = matrix_norm_inf_cols(w)?;
    if inf_col < 1.0 {
        return Ok(NormCertificate::InfCols(inf_col));
    }
    let spectral = matrix_norm_2(w)?;
    if spectral < 1.0 - POWER_TOL {
        return Ok(NormCertificate::Spectral(spectral));
    }
    let mut p = w.clone();
    let mut k = 1u64;
    for _ in 0..24 {
        p = p.mul(&p);
        k *= 2;
        let norm = matrix_norm_inf_rows(&p)?;
        if norm < 1.0 {
            return Ok(NormCertificate::Power { k, norm });
        }
        if !norm.is_finite() {
            break;
        }
    }
    Err(Error::NormNotCertified {
        inf_row,
        inf_col,
        spectral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_norms() {
        let z = Matrix::zeros(4, 4);
        assert_eq!(matrix_norm_inf_rows(&z).unwrap(), 0.0);
        assert_eq!(matrix_norm_2(&z).unwrap(), 0.0);
        let i = Matrix::identity(5);
        assert_eq!(matrix_norm_inf_cols(&i).unwrap(), 1.0);
        assert!((matrix_norm_2(&i).unwrap() - 1.0).abs() < 1e-15);
        assert!(matrix_norm_2(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn conventions_differ_on_asymmetric_input() {
        let w = Matrix::from_rows(&[vec![0.5, 0.4], vec![0.0, 0.1]]);
        assert!((matrix_norm_inf_rows(&w).unwrap() - 0.9).abs() < 1e-15);
        assert!((matrix_norm_inf_cols(&w).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn power_certificate_for_nilpotent_like_matrix() {
        // row and column sums reach 1, but the spectral radius is 0.5
        let w = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.0, 0.5]]);
        let cert = certify_convergence(&w).unwrap();
        assert!(cert.value() < 1.0);
        let bad = Matrix::identity(3);
        assert!(matches!(
            certify_convergence(&bad),
            Err(Error::NormNotCertified { .. })
        ));
    }
}
