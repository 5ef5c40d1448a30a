//! Singular values of complex matrices by one-sided (Hestenes) Jacobi.
//!
//! Only the singular values are needed by the Schmidt decomposition, so no
//! U/V factors are accumulated. Columns are orthogonalized pairwise with a
//! complex rotation: the pair's 2×2 Gram matrix is phase-rotated to a real
//! symmetric one and annihilated with the standard stable Jacobi choice.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative orthogonality threshold below which a column pair counts as done.
const CONVERGENCE_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// Singular values of an `n_rows × n_cols` matrix given in row-major order,
/// sorted descending. Fails on non-finite entries or non-convergence.
pub fn singular_values(data: &[Complex64], n_rows: usize, n_cols: usize) -> Result<Vec<f64>> {
    if data.len() != n_rows * n_cols || n_rows == 0 || n_cols == 0 {
        return Err(Error::invalid("svd: shape does not match data length"));
    }
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("svd: non-finite matrix entry".into()));
    }

    // work on the orientation with fewer columns; singular values are
    // invariant under transposition
    let (m, n, transpose) = if n_rows >= n_cols {
        (n_rows, n_cols, false)
    } else {
        (n_cols, n_rows, true)
    };
    // column-major working copy
    let mut cols: Vec<Complex64> = vec![Complex64::ZERO; m * n];
    for r in 0..n_rows {
        for c in 0..n_cols {
            let v = data[r * n_cols + c];
            let (row, col) = if transpose { (c, r) } else { (r, c) };
            cols[col * m + row] = v;
        }
    }

    let tol2 = CONVERGENCE_TOL * CONVERGENCE_TOL;
    // columns this far below the matrix scale are numerically zero; without
    // the floor a rank-deficient matrix never converges (the residual of an
    // annihilated column stays parallel to its partner)
    let fro2: f64 = cols.iter().map(|z| z.norm_sqr()).sum();
    let zero_floor = fro2 * 1e-28;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        converged = true;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let (a, b, d) = {
                    let (ci, cj) = (&cols[i * m..(i + 1) * m], &cols[j * m..(j + 1) * m]);
                    let mut a = 0.0;
                    let mut b = 0.0;
                    let mut d = Complex64::ZERO;
                    for (x, y) in ci.iter().zip(cj) {
                        a += x.norm_sqr();
                        b += y.norm_sqr();
                        d += x.conj() * y;
                    }
                    (a, b, d)
                };
                let d2 = d.norm_sqr();
                if d2 <= tol2 * a * b || d2 == 0.0 || a <= zero_floor || b <= zero_floor {
                    continue;
                }
                converged = false;

                let dabs = d2.sqrt();
                let phase = d / dabs;
                let zeta = (b - a) / (2.0 * dabs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;

                // x' = c·x − s·conj(phase)·y ; y' = s·phase·x + c·y
                let (head, tail) = cols.split_at_mut(j * m);
                let ci = &mut head[i * m..(i + 1) * m];
                let cj = &mut tail[..m];
                let pc = phase.conj();
                for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
                    let xv = *x;
                    let yv = *y;
                    *x = c * xv - s * (pc * yv);
                    *y = s * (phase * xv) + c * yv;
                }
            }
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "svd: no convergence after {MAX_SWEEPS} sweeps"
        )));
    }

    let mut sigma: Vec<f64> = (0..n)
        .map(|c| {
            cols[c * m..(c + 1) * m]
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    Ok(sigma)
}
