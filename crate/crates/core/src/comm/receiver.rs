//! Receive-vector update. The quadratic program over all receivers is
//! block-diagonal with one norm constraint per block, so it splits into K*P
//! trust-region problems
//!
//! ```text
//! min_u  u^H a u - 2 Re{u^H v}   s.t. ||u||^2 <= 1
//! ```
//!
//! each solved exactly from an eigendecomposition of the PSD block `a`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{CommProblem, DualState, EffectiveChannels, ReceiveBank};
use crate::error::{Error, Result};

/// Exact minimiser of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSolution {
    pub u: DVector<Complex64>,
    /// Multiplier of the norm constraint; zero for interior solutions.
    pub lambda: f64,
    pub interior: bool,
}

/// `u^H a u - 2 Re{u^H v}`.
pub fn block_objective(a: &DMatrix<Complex64>, v: &DVector<Complex64>, u: &DVector<Complex64>) -> f64 {
    u.dotc(&(a * u)).re - 2.0 * u.dotc(v).re
}

/// Relative stationarity residual `||(a + lambda I) u - v|| / ||v||`.
pub fn kkt_residual(a: &DMatrix<Complex64>, v: &DVector<Complex64>, sol: &BlockSolution) -> f64 {
    let r = a * &sol.u + sol.u.scale(sol.lambda) - v;
    let scale = v.norm();
    if scale > 0.0 {
        r.norm() / scale
    } else {
        r.norm()
    }
}

/// Solves one trust-region block. `a` must be Hermitian PSD.
pub fn solve_block(a: &DMatrix<Complex64>, v: &DVector<Complex64>) -> Result<BlockSolution> {
    let m = v.len();
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::Dimension(format!(
            "block matrix is {}x{}, vector has {m} entries",
            a.nrows(),
            a.ncols()
        )));
    }
    let vnorm = v.norm();
    if vnorm == 0.0 {
        return Ok(BlockSolution {
            u: DVector::zeros(m),
            lambda: 0.0,
            interior: true,
        });
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let q = eig.eigenvectors;
    let lam: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let w = q.adjoint() * v;
    let lam_max = lam.iter().copied().fold(0.0, f64::max);
    let zero_tol = 1e-12 * lam_max;

    let build = |shift: f64| -> DVector<Complex64> {
        let scaled = DVector::from_iterator(
            m,
            w.iter().zip(&lam).map(|(wi, li)| {
                let d = li + shift;
                if d > zero_tol {
                    wi / d
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        );
        &q * scaled
    };
    let norm2 = |shift: f64| -> f64 {
        w.iter()
            .zip(&lam)
            .map(|(wi, li)| {
                let d = li + shift;
                if d > 0.0 {
                    wi.norm_sqr() / (d * d)
                } else if wi.norm_sqr() > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .sum()
    };

    // Interior candidate: pseudo-inverse solution, valid when v has no
    // component in the null space of a.
    let null_mass: f64 = w
        .iter()
        .zip(&lam)
        .filter(|(_, l)| **l <= zero_tol)
        .map(|(wi, _)| wi.norm_sqr())
        .sum();
    if null_mass <= (1e-12 * vnorm).powi(2) {
        let pinv_norm2: f64 = w
            .iter()
            .zip(&lam)
            .filter(|(_, l)| **l > zero_tol)
            .map(|(wi, li)| wi.norm_sqr() / (li * li))
            .sum();
        if pinv_norm2 <= 1.0 {
            return Ok(BlockSolution {
                u: build(0.0),
                lambda: 0.0,
                interior: true,
            });
        }
    }

    // Boundary: ||u(lambda)|| = 1 with ||u(||v||)|| <= 1 guaranteed.
    let mut lo = 0.0;
    let mut hi = vnorm;
    if norm2(hi) > 1.0 + 1e-12 {
        return Err(Error::Numerical(format!(
            "receiver bracket failed: ||u({hi:e})||^2 = {:e}, eigenvalues {lam:?}",
            norm2(hi)
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if norm2(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (norm2(hi).sqrt() - 1.0).abs() <= 1e-12 {
            break;
        }
    }
    let u = build(hi);
    let n = u.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "receiver bisection ended at ||u|| = {n}, lambda in [{lo:e}, {hi:e}], eigenvalues {lam:?}"
        )));
    }
    Ok(BlockSolution {
        u,
        lambda: hi,
        interior: false,
    })
}

/// Block data `(a, v)` of device `k` on subcarrier `p`.
pub fn block_data(
    prob: &CommProblem,
    h: &EffectiveChannels,
    dual: &DualState,
    weights: &[f64],
    k: usize,
    p: usize,
) -> (DMatrix<Complex64>, DVector<Complex64>) {
    let m = prob.antennas();
    let p_tx = prob.cs.p_tx;
    let ups = dual.upsilon[k][p];
    let c = weights[k] * dual.rho[k][p];
    let mut a = DMatrix::zeros(m, m);
    let scale = Complex64::new(c * p_tx * ups.norm_sqr(), 0.0);
    for hj in &h.h {
        a.gerc(scale, &hj[p], &hj[p], Complex64::new(1.0, 0.0));
    }
    let v = h.h[k][p].scale(c * p_tx.sqrt()) * ups.conj();
    (a, v)
}

/// Exact receiver update for every block. Blocks with no weight keep their
/// incumbent vector, since every receiver is then optimal.
pub fn solve_receivers(
    prob: &CommProblem,
    h: &EffectiveChannels,
    dual: &DualState,
    weights: &[f64],
    incumbent: &ReceiveBank,
) -> Result<ReceiveBank> {
    let mut u = incumbent.u.clone();
    for (k, row) in u.iter_mut().enumerate() {
        for (p, slot) in row.iter_mut().enumerate() {
            let (a, v) = block_data(prob, h, dual, weights, k, p);
            if v.norm() == 0.0 {
                continue;
            }
            *slot = solve_block(&a, &v)
                .map_err(|e| Error::Numerical(format!("receiver block ({k}, {p}): {e}")))?
                .u;
        }
    }
    Ok(ReceiveBank { u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn psd(m: usize, rank: usize, entries: &[f64]) -> DMatrix<Complex64> {
        let b = DMatrix::from_fn(m, rank, |i, j| {
            let t = 2 * (i * rank + j);
            Complex64::new(entries[t % entries.len()], entries[(t + 1) % entries.len()])
        });
        &b * b.adjoint()
    }

    #[test]
    fn identity_interior() {
        let a = DMatrix::<Complex64>::identity(3, 3);
        let v = DVector::from_vec(vec![c(0.3), Complex64::new(0.1, -0.4), c(0.0)]);
        let s = solve_block(&a, &v).unwrap();
        assert!(s.interior);
        assert!((s.u - v).norm() <= 1e-14);
    }

    #[test]
    fn identity_boundary() {
        let a = DMatrix::<Complex64>::identity(3, 3);
        let v = DVector::from_vec(vec![c(2.0), c(0.0), c(0.0)]);
        let s = solve_block(&a, &v).unwrap();
        assert!(!s.interior);
        assert_relative_eq!(s.lambda, 1.0, max_relative = 1e-9);
        assert!((s.u - DVector::from_vec(vec![c(1.0), c(0.0), c(0.0)])).norm() <= 1e-9);
    }

    #[test]
    fn zero_matrix_normalises_v() {
        let a = DMatrix::<Complex64>::zeros(2, 2);
        let v = DVector::from_vec(vec![c(3.0), Complex64::new(0.0, 4.0)]);
        let s = solve_block(&a, &v).unwrap();
        assert!((s.u - v.unscale(5.0)).norm() <= 1e-9);
        assert_relative_eq!(s.lambda, 5.0, max_relative = 1e-9);
    }

    #[test]
    fn rank_deficient_with_range_vector() {
        let a = psd(4, 1, &[1.0, 0.5, -0.3, 0.2, 0.7, -0.1, 0.4, 0.9]);
        let v = (&a * DVector::from_element(4, c(0.01))).into_owned();
        let s = solve_block(&a, &v).unwrap();
        assert!(s.interior);
        assert!(kkt_residual(&a, &v, &s) <= 1e-8);
    }

    proptest! {
        #[test]
        fn kkt_holds(
            entries in proptest::collection::vec(-2.0..2.0f64, 16),
            vv in proptest::collection::vec(-3.0..3.0f64, 8),
            rank in 0usize..=4,
        ) {
            let a = if rank == 0 { DMatrix::zeros(4, 4) } else { psd(4, rank, &entries) };
            let v = DVector::from_fn(4, |i, _| Complex64::new(vv[2 * i], vv[2 * i + 1]));
            prop_assume!(v.norm() > 1e-6);
            let s = solve_block(&a, &v).unwrap();
            let n = s.u.norm();
            prop_assert!(s.lambda >= 0.0);
            if s.interior {
                prop_assert!(n <= 1.0 + 1e-9);
            } else {
                prop_assert!((n - 1.0).abs() <= 1e-9);
            }
            prop_assert!(kkt_residual(&a, &v, &s) <= 1e-8, "residual {}", kkt_residual(&a, &v, &s));
        }
    }
}
