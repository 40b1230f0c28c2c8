//! Hand-rolled complex Hermitian eigensolver: cyclic Jacobi rotations.
//! Kept free of the linear-algebra crate the library uses, so the two
//! spectral-propagation routes share no decomposition code.

// Index-style loops mirror the textbook rotation formulas.
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MAX_SWEEPS: usize = 100;

pub struct JacobiEigen {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` pairs with `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<Complex64>>,
}

fn off_diagonal_max(a: &[Vec<Complex64>]) -> f64 {
    let n = a.len();
    let mut worst = 0.0f64;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                worst = worst.max(a[p][q].norm());
            }
        }
    }
    worst
}

/// Diagonalizes a Hermitian matrix by annihilating one off-diagonal element
/// per rotation until all of them sit below 1e-15 of the largest entry.
///
/// A rotation in the (p, q) plane with a[p][q] = r e^{i phi} uses the unitary
/// with columns (c, s e^{-i phi}) and (-s e^{i phi}, c); the angle solving
/// tan(2 theta) = 2r / (a_pp - a_qq) zeroes the target element exactly.
///
/// Panics instead of returning an error: this is a test oracle, and a
/// non-converging run must fail loudly.
pub fn hermitian_eigen(h: &[Vec<Complex64>]) -> JacobiEigen {
    let n = h.len();
    assert!(n > 0, "empty matrix");
    for (i, row) in h.iter().enumerate() {
        assert_eq!(row.len(), n, "matrix must be square");
        for j in 0..n {
            let defect = (h[i][j] - h[j][i].conj()).norm();
            let scale = h[i][j].norm().max(1.0);
            assert!(defect <= 1e-12 * scale, "matrix is not Hermitian at ({i},{j})");
        }
    }

    let mut a: Vec<Vec<Complex64>> = h.to_vec();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|r| (0..n).map(|k| if r == k { ONE } else { ZERO }).collect())
        .collect();
    let scale = a
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_max(&a) <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let target = a[p][q];
                let r = target.norm();
                if r <= 1e-18 * scale {
                    continue;
                }
                let phi = target.arg();
                let theta = 0.5 * (2.0 * r).atan2(a[p][p].re - a[q][q].re);
                let (s, c) = theta.sin_cos();
                let e_pos = Complex64::from_polar(1.0, phi);
                let e_neg = e_pos.conj();

                // Columns p and q of A and V pick up A <- A J, V <- V J.
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp + s * e_neg * akq;
                    a[k][q] = -s * e_pos * akp + c * akq;
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp + s * e_neg * vkq;
                    v[k][q] = -s * e_pos * vkp + c * vkq;
                }
                // Rows p and q pick up A <- J^dagger A.
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk + s * e_pos * aqk;
                    a[q][k] = -s * e_neg * apk + c * aqk;
                }
            }
        }
    }
    assert!(converged, "Jacobi sweeps did not converge in {MAX_SWEEPS} rounds");

    let eigenvalues: Vec<f64> = (0..n)
        .map(|i| {
            assert!(
                a[i][i].im.abs() <= 1e-12 * scale,
                "diagonal stayed complex at {i}"
            );
            a[i][i].re
        })
        .collect();
    let eigenvectors: Vec<Vec<Complex64>> =
        (0..n).map(|k| (0..n).map(|r| v[r][k]).collect()).collect();
    JacobiEigen { eigenvalues, eigenvectors }
}

/// exp(-i H t) psi0 assembled from the decomposition: project onto each
/// eigenvector, rotate its phase, and resum.
pub fn evolve(eig: &JacobiEigen, psi0: &[Complex64], t: f64) -> Vec<Complex64> {
    let n = psi0.len();
    assert_eq!(eig.eigenvalues.len(), n);
    let mut out = vec![ZERO; n];
    for (lambda, vector) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        let overlap: Complex64 = vector
            .iter()
            .zip(psi0)
            .map(|(vk, pk)| vk.conj() * pk)
            .sum();
        let phase = Complex64::from_polar(1.0, -lambda * t);
        for (o, vk) in out.iter_mut().zip(vector) {
            *o += phase * overlap * vk;
        }
    }
    out
}
