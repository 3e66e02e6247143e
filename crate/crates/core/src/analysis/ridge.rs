use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::readout::argmax;

/// `W_or = ((XᵀX + βI)⁻¹ XᵀY)ᵀ`, returned as `n_o × n_r`.
///
/// `x` is `T × n_r` and `y` is `T × n_o`. The system is solved by QR on the
/// augmented matrix `[X; √β I]`, which never forms `XᵀX`.
pub fn ridge_readout(x: &DMatrix<f64>, y: &DMatrix<f64>, beta: f64) -> Result<DMatrix<f64>> {
    let (t, n) = x.shape();
    if y.nrows() != t {
        return Err(Error::DimensionMismatch {
            what: "target rows",
            expected: t,
            got: y.nrows(),
        });
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta {beta} must be finite and non-negative")));
    }
    if t < n && beta == 0.0 {
        return Err(Error::Singular);
    }
    let n_o = y.ncols();
    let mut a = DMatrix::zeros(t + n, n);
    a.view_mut((0, 0), (t, n)).copy_from(x);
    let mut b = DMatrix::zeros(t + n, n_o);
    b.view_mut((0, 0), (t, n_o)).copy_from(y);
    let root = beta.sqrt();
    for i in 0..n {
        a[(t + i, i)] = root;
    }
    let qr = a.qr();
    // thin R: the first n rows
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || r.diagonal().iter().any(|v| v.abs() <= 1e-12 * scale) {
        return Err(Error::Singular);
    }
    let mut qtb = b;
    qr.q_tr_mul(&mut qtb);
    let top = qtb.rows(0, n).into_owned();
    let w = r.solve_upper_triangular(&top).ok_or(Error::Singular)?;
    Ok(w.transpose())
}

/// Class decisions of a linear readout: `argmax(W x)` per row of `x`.
pub fn ridge_classify(w: &DMatrix<f64>, x: &DMatrix<f64>) -> Vec<usize> {
    let scores = x * w.transpose();
    (0..scores.nrows())
        .map(|i| argmax(scores.row(i).iter().copied()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(rows: usize, cols: usize, mut s: u64) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
    }

    /// Oracle: explicit normal equations solved by Gauss-Jordan elimination.
    fn normal_equations(x: &DMatrix<f64>, y: &DMatrix<f64>, beta: f64) -> DMatrix<f64> {
        let n = x.ncols();
        let m = y.ncols();
        let mut g = vec![vec![0.0; n + m]; n];
        for i in 0..n {
            for j in 0..n {
                g[i][j] = (0..x.nrows()).map(|t| x[(t, i)] * x[(t, j)]).sum::<f64>();
            }
            g[i][i] += beta;
            for o in 0..m {
                g[i][n + o] = (0..x.nrows()).map(|t| x[(t, i)] * y[(t, o)]).sum::<f64>();
            }
        }
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| g[a][c].abs().total_cmp(&g[b][c].abs())).unwrap();
            g.swap(c, p);
            let piv = g[c][c];
            for v in g[c].iter_mut() {
                *v /= piv;
            }
            for r in 0..n {
                if r != c {
                    let f = g[r][c];
                    let row_c = g[c].clone();
                    for (v, pc) in g[r].iter_mut().zip(&row_c) {
                        *v -= f * pc;
                    }
                }
            }
        }
        DMatrix::from_fn(m, n, |o, i| g[i][n + o])
    }

    #[test]
    fn exact_interpolation() {
        let x = lcg_matrix(4, 4, 7) + DMatrix::identity(4, 4);
        let w_star = lcg_matrix(2, 4, 99);
        let y = &x * w_star.transpose();
        let w = ridge_readout(&x, &y, 0.0).unwrap();
        assert!((&w - &w_star).norm() <= 1e-8 * w_star.norm());
    }

    #[test]
    fn huge_beta_shrinks_to_zero() {
        let x = lcg_matrix(20, 3, 1);
        let y = lcg_matrix(20, 2, 2);
        let w = ridge_readout(&x, &y, 1e12).unwrap();
        assert!(w.norm() < 1e-10);
    }

    #[test]
    fn agrees_with_normal_equations() {
        let x = lcg_matrix(5, 2, 42);
        let y = lcg_matrix(5, 3, 43);
        for beta in [0.0, 1e-3, 0.5] {
            let w = ridge_readout(&x, &y, beta).unwrap();
            let oracle = normal_equations(&x, &y, beta);
            assert!((&w - &oracle).norm() <= 1e-10 * oracle.norm().max(1.0), "beta {beta}");
        }
    }

    #[test]
    fn singular_without_regularization() {
        let mut x = lcg_matrix(6, 3, 5);
        for t in 0..6 {
            x[(t, 2)] = x[(t, 0)];
        }
        let y = lcg_matrix(6, 1, 6);
        assert!(matches!(ridge_readout(&x, &y, 0.0), Err(Error::Singular)));
        assert!(ridge_readout(&x, &y, 1e-3).is_ok());
        assert!(matches!(
            ridge_readout(&lcg_matrix(2, 3, 1), &lcg_matrix(2, 1, 1), 0.0),
            Err(Error::Singular)
        ));
    }
}
