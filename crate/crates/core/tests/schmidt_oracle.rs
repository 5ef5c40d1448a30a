//! Brute-force oracle for the Schmidt decomposition: on small grids the
//! squared Schmidt coefficients must match the eigenvalues of the Gram
//! matrix G = (M·M†) computed by direct summation, where M is the
//! measure-weighted amplitude. The eigensolve here is an independent
//! Hermitian Jacobi iteration, not the production SVD path.

#![allow(clippy::needless_range_loop)]

use ndarray::Array2;
use num_complex::Complex64;

use homspec_core::grid::make_grid;
use homspec_core::jsa::JointSpectralAmplitude;
use homspec_core::schmidt::schmidt_decompose;

/// Eigenvalues of a Hermitian matrix by cyclic two-sided Jacobi rotations.
fn hermitian_eigenvalues(mut g: Vec<Vec<Complex64>>) -> Vec<f64> {
    let n = g.len();
    for _ in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += g[i][j].norm_sqr();
                }
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let gpq = g[p][q];
                if gpq.norm_sqr() < 1e-32 {
                    continue;
                }
                // phase-rotate to a real off-diagonal, then a real rotation
                let phase = gpq / gpq.norm();
                let app = g[p][p].re;
                let aqq = g[q][q].re;
                let apq = gpq.norm();
                let theta = 0.5 * (2.0 * apq).atan2(app - aqq);
                let (c, s) = (theta.cos(), theta.sin());
                // columns: v_p' = c·v_p + s·conj(phase)... apply U† G U with
                // U[p][p]=c, U[q][p]=s·phasē ... built explicitly below
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(-s, 0.0) * phase;
                let u_qp = Complex64::new(s, 0.0) * phase.conj();
                let u_qq = Complex64::new(c, 0.0);
                // G ← U† G U on rows/cols p,q
                for k in 0..n {
                    let (gkp, gkq) = (g[k][p], g[k][q]);
                    g[k][p] = gkp * u_pp + gkq * u_qp;
                    g[k][q] = gkp * u_pq + gkq * u_qq;
                }
                for k in 0..n {
                    let (gpk, gqk) = (g[p][k], g[q][k]);
                    g[p][k] = u_pp.conj() * gpk + u_qp.conj() * gqk;
                    g[q][k] = u_pq.conj() * gpk + u_qq.conj() * gqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| g[i][i].re).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

fn check_against_gram(n: usize, amp: Array2<Complex64>) {
    let grid = make_grid(193.0, 3.0, n).unwrap();
    let jsa = JointSpectralAmplitude::new(grid, amp)
        .unwrap()
        .normalize()
        .unwrap();

    // direct-summation Gram matrix of the measure-weighted amplitude
    let measure = jsa.grid.cell_measure();
    let mut gram = vec![vec![Complex64::ZERO; n]; n];
    #[allow(clippy::needless_range_loop)]
    for r1 in 0..n {
        for r2 in 0..n {
            let mut acc = Complex64::ZERO;
            for k in 0..n {
                acc += jsa.amp[[r1, k]] * jsa.amp[[r2, k]].conj() * measure;
            }
            gram[r1][r2] = acc;
        }
    }
    let eig = hermitian_eigenvalues(gram);

    let schmidt = schmidt_decompose(&jsa).unwrap();
    // compare λ² (padded with zeros where the oracle keeps noise modes)
    for (k, ev) in eig.iter().enumerate() {
        let lam2 = schmidt.coefficients.get(k).map_or(0.0, |l| l * l);
        assert!(
            (lam2 - ev.max(0.0)).abs() < 1e-9,
            "mode {k}: λ² = {lam2} vs Gram eigenvalue {ev}"
        );
    }
}

#[test]
fn schmidt_matches_gram_eigenvalues_random() {
    // deterministic pseudo-random draws on grids up to 8×8
    let mut state = 0x1234_5678_u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for n in [2usize, 3, 5, 8] {
        for _ in 0..4 {
            let amp = Array2::from_shape_fn((n, n), |_| Complex64::new(next(), next()));
            check_against_gram(n, amp);
        }
    }
}

#[test]
fn schmidt_matches_gram_eigenvalues_structured() {
    // near-factorizable and strongly correlated cases
    for corr in [0.0, 0.4, 0.95] {
        let n = 8;
        let amp = Array2::from_shape_fn((n, n), |(i, j)| {
            let x = i as f64 - 3.5;
            let y = j as f64 - 3.5;
            Complex64::from_polar(
                (-(x * x + y * y - 2.0 * corr * x * y) / 8.0).exp(),
                0.1 * x * y * corr,
            )
        });
        check_against_gram(n, amp);
    }
}

#[test]
fn rank_one_iff_unit_schmidt_number() {
    let n = 8;
    // rank one
    let f: Vec<f64> = (0..n)
        .map(|i| (-((i as f64 - 3.0) / 2.0).powi(2)).exp())
        .collect();
    let amp = Array2::from_shape_fn((n, n), |(i, j)| Complex64::new(f[i] * f[j], 0.0));
    let grid = make_grid(193.0, 3.0, n).unwrap();
    let jsa = JointSpectralAmplitude::new(grid.clone(), amp)
        .unwrap()
        .normalize()
        .unwrap();
    let k1 = schmidt_decompose(&jsa).unwrap().schmidt_number;
    assert!((k1 - 1.0).abs() < 1e-9, "rank-1 K = {k1}");

    // rank two: K must exceed 1 by a finite margin
    let amp = Array2::from_shape_fn((n, n), |(i, j)| {
        Complex64::new(f[i] * f[j] + if i == j { 0.2 } else { 0.0 }, 0.0)
    });
    let jsa = JointSpectralAmplitude::new(grid, amp)
        .unwrap()
        .normalize()
        .unwrap();
    let k2 = schmidt_decompose(&jsa).unwrap().schmidt_number;
    assert!(k2 > 1.0 + 1e-6, "correlated K = {k2}");
}
