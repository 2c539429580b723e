//! Spectral norm of the RLS matrix, its Toeplitz closed form, and the
//! eigenvalues of tridiagonal Toeplitz matrices.
//!
//! ```bash
//! cargo run --example spectra
//! ```

use fitness_levels::bounds::{
    build_w_and_alpha, certify_convergence, matrix_norm_2, matrix_norm_inf_cols,
    matrix_norm_inf_rows, rls_w_norm_2, toeplitz_tridiagonal_spectrum,
};
use fitness_levels::kernels::{lower_bounds_for_kernel, LowerBoundPreset};

fn main() -> fitness_levels::Result<()> {
    let (n, ell) = (10, 5);
    let a = lower_bounds_for_kernel(LowerBoundPreset::RlsUnimodal { n, ell })?;
    let (w, _) = build_w_and_alpha(&a);
    println!(
        "||W||_inf rows {:.6}, cols {:.6}",
        matrix_norm_inf_rows(&w)?,
        matrix_norm_inf_cols(&w)?
    );
    println!("||W||_2 power iteration {:.10}", matrix_norm_2(&w)?);
    println!("Toeplitz closed form     {:.10}", rls_w_norm_2(n, ell)?);
    println!("certificate: {:?}", certify_convergence(&w)?);

    for (size, delta, sigma, tau) in [(2, 0.0, 1.0, 1.0), (3, 2.0, 1.0, 1.0), (5, 1.0, 0.5, 2.0)] {
        let ev = toeplitz_tridiagonal_spectrum(size, delta, sigma, tau)?;
        println!("n={size} delta={delta} sigma={sigma} tau={tau}: {ev:.4?}");
    }
    Ok(())
}
