//! Norm-constrained receive vector for one block, interior and boundary cases.

use irs_mec::comm::receiver::{block_objective, kkt_residual, solve_block};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

fn main() -> irs_mec::Result<()> {
    let h1 = DVector::from_vec(vec![
        Complex64::new(1.0, 0.2),
        Complex64::new(-0.3, 0.5),
        Complex64::new(0.1, -0.4),
        Complex64::new(0.7, 0.0),
    ]);
    let h2 = DVector::from_vec(vec![
        Complex64::new(0.2, -0.6),
        Complex64::new(0.9, 0.1),
        Complex64::new(-0.5, 0.3),
        Complex64::new(0.0, 0.4),
    ]);
    let a: DMatrix<Complex64> = &h1 * h1.adjoint() * Complex64::new(4.0, 0.0)
        + &h2 * h2.adjoint() * Complex64::new(4.0, 0.0)
        + DMatrix::identity(4, 4) * Complex64::new(0.1, 0.0);
    for scale in [0.1, 10.0] {
        let v = &h1 * Complex64::new(scale, 0.0);
        let sol = solve_block(&a, &v)?;
        println!(
            "|v| = {:.3}: |u| = {:.6}, lambda = {:.4e}, interior = {}, objective = {:.6}, KKT = {:.1e}",
            v.norm(),
            sol.u.norm(),
            sol.lambda,
            sol.interior,
            block_objective(&a, &v, &sol.u),
            kkt_residual(&a, &v, &sol)
        );
    }
    Ok(())
}
