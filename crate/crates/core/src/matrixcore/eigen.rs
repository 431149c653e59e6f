//! Symmetric eigenvalues: Householder reduction to tridiagonal form, then implicit-shift QL.

use crate::error::{Error, Result};
use crate::matrixcore::Matrix;

const MAX_SWEEPS: usize = 64;

/// Reduce a symmetric matrix to tridiagonal form. Returns (diagonal, subdiagonal),
/// where `e[k]` couples `d[k]` and `d[k + 1]` and `e[n - 1] = 0`.
pub(crate) fn tridiagonalize(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut w = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = k + 1;
        let norm = (m..n).map(|r| w[(r, k)] * w[(r, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let x0 = w[(m, k)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for r in m..n {
            v[r] = w[(r, k)];
        }
        v[m] -= alpha;
        let vnorm = (m..n).map(|r| v[r] * v[r]).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            e[k] = x0;
            continue;
        }
        for r in m..n {
            v[r] /= vnorm;
        }
        // A22 <- H A22 H with H = I - 2 v v^T, written as A22 - 2 (v w^T + w v^T).
        for r in m..n {
            p[r] = (m..n).map(|c| w[(r, c)] * v[c]).sum();
        }
        let kk: f64 = (m..n).map(|r| v[r] * p[r]).sum();
        for r in m..n {
            p[r] -= kk * v[r];
        }
        for r in m..n {
            for c in m..n {
                w[(r, c)] -= 2.0 * (v[r] * p[c] + p[r] * v[c]);
            }
        }
        e[k] = alpha;
        for r in m..n {
            w[(r, k)] = 0.0;
            w[(k, r)] = 0.0;
        }
        w[(m, k)] = alpha;
        w[(k, m)] = alpha;
    }
    for k in 0..n {
        d[k] = w[(k, k)];
    }
    if n >= 2 {
        e[n - 2] = w[(n - 1, n - 2)];
    }
    (d, e)
}

/// Eigenvalues of the symmetric tridiagonal matrix (d, e), in place, by implicit QL with
/// Wilkinson-type shifts.
pub(crate) fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::EigenNoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                let r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let r2 = (d[i] - g) * s + 2.0 * c * b;
                p = s * r2;
                d[i + 1] = g + p;
                g = c * r2 - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Ascending eigenvalues of a symmetric matrix given as a dense square matrix.
pub(crate) fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(Error::InvalidMatrix("non-finite entries".into()));
    }
    let (mut d, mut e) = tridiagonalize(a);
    tridiagonal_ql(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(d)
}
