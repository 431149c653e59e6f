#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roesser::lyapunov::{BlockVariables, LyapunovCertificate};
use roesser::matrixcore::{Matrix, SymMatrix};
use roesser::model::DelayBounds;
use roesser::simulator::{GridExtents, StateGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, r: usize, c: usize, scale: f64) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.random_range(-scale..scale))
}

pub fn random_sym(rng: &mut impl Rng, n: usize, scale: f64) -> SymMatrix {
    SymMatrix::symmetrize(&random_matrix(rng, n, n, scale)).unwrap()
}

/// Random SPD matrix with eigenvalues at least `floor`.
pub fn random_spd(rng: &mut impl Rng, n: usize, floor: f64) -> Matrix {
    let r = random_matrix(rng, n, n, 1.0);
    &(&r * &r.transpose()) + &Matrix::identity(n).scale(floor)
}

pub fn to_na(m: &Matrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &nalgebra::DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn lambda_max(m: &Matrix) -> f64 {
    *SymMatrix::symmetrize(m).unwrap().eigvals().unwrap().last().unwrap()
}

pub fn lambda_min(m: &Matrix) -> f64 {
    SymMatrix::symmetrize(m).unwrap().eigvals().unwrap()[0]
}

pub fn spectral_norm(m: &Matrix) -> f64 {
    lambda_max(&(&m.transpose() * m)).max(0.0).sqrt()
}

/// Small two-mode plant: open-loop unstable, time-varying delays in [1, 2], faults and
/// sinusoidal uncertainty. Solves in a fraction of a second.
pub fn two_mode_toy() -> roesser::model::SwitchedModel {
    let mode = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
        serde_json::json!({
            "A": a, "A_d": [[0.05, 0.0], [0.0, 0.05]], "B": b, "H": [[0.1, 0.0], [0.0, 0.1]],
            "E": [[0.1, 0.0], [0.0, 0.1]], "E_d": [[0.05, 0.0], [0.0, 0.05]],
            "fault_bounds": [{"lo": 0.7, "hi": 1.0}, {"lo": 0.8, "hi": 1.0}],
            "uncertainty": {"family": "sinusoidal_diagonal", "frequency": 0.7}
        })
    };
    let doc = serde_json::json!({
        "name": "two-mode toy",
        "dims": {"n1": 1, "n2": 1, "nu": 2, "p": 2, "q": 2},
        "modes": [
            mode([[1.1, 0.2], [0.0, 0.6]], [[1.0, 0.0], [0.0, 0.5]]),
            mode([[0.5, 0.0], [0.3, 1.2]], [[0.5, 0.0], [0.0, 1.0]])
        ],
        "delays": {"horizontal": {"family": "table", "values": [1, 2]}, "vertical": {"family": "table", "values": [2, 1]}},
        "boundary": {"z1": 5, "z2": 5, "horizontal": {"kind": "uniform", "value": [1.0]}, "vertical": {"kind": "uniform", "value": [-1.0]}}
    });
    roesser::model::SwitchedModel::from_json_str(&doc.to_string()).unwrap()
}

pub fn hv_spd(r: &mut impl Rng, n1: usize, n2: usize) -> Matrix {
    Matrix::block_diag(&[&random_spd(r, n1, 0.01), &random_spd(r, n2, 0.01)])
}

pub fn random_certificate(r: &mut impl Rng, n1: usize, n2: usize, bounds: DelayBounds) -> LyapunovCertificate {
    let mut v = BlockVariables::zeros(n1, n2);
    v.p = hv_spd(r, n1, n2);
    v.q1 = hv_spd(r, n1, n2);
    v.q2 = hv_spd(r, n1, n2);
    v.w1 = hv_spd(r, n1, n2);
    v.w2 = hv_spd(r, n1, n2);
    LyapunovCertificate {
        alpha: r.random_range(0.5..1.0),
        bounds,
        modes: vec![v],
    }
}

pub fn random_grid(r: &mut impl Rng, n1: usize, n2: usize, ext: GridExtents, hist: (i64, i64)) -> StateGrid {
    let mut vals: HashMap<(bool, i64, i64), Vec<f64>> = HashMap::new();
    for i in -hist.0..=ext.i_max {
        for j in 0..=ext.j_max {
            vals.insert((true, i, j), (0..n1).map(|_| r.random_range(-2.0..2.0)).collect());
        }
    }
    for i in 0..=ext.i_max {
        for j in -hist.1..=ext.j_max {
            vals.insert((false, i, j), (0..n2).map(|_| r.random_range(-2.0..2.0)).collect());
        }
    }
    StateGrid::from_fn(n1, n2, ext, hist, |i, j| vals[&(true, i, j)].clone(), |i, j| vals[&(false, i, j)].clone(), |_| 0)
}

pub fn quad(m: &Matrix, x: &[f64]) -> f64 {
    let mut s = 0.0;
    for a in 0..x.len() {
        for b in 0..x.len() {
            s += x[a] * m[(a, b)] * x[b];
        }
    }
    s
}

/// Literal double sums, one direction. `x(r)` is the state at index r along the direction.
#[allow(clippy::too_many_arguments)]
pub fn naive_direction(p: &Matrix, q1: &Matrix, q2: &Matrix, w1: &Matrix, w2: &Matrix, alpha: f64, lo: i64, hi: i64, at: i64, x: &dyn Fn(i64) -> Vec<f64>) -> f64 {
    let disc = |r: i64| alpha.powi((at - r - 1) as i32);
    let eta = |r: i64| -> Vec<f64> { x(r + 1).iter().zip(x(r)).map(|(a, b)| a - b).collect() };
    let mut v = quad(p, &x(at));
    for r in at - lo..=at - 1 {
        v += disc(r) * quad(q1, &x(r));
    }
    for r in at - hi..=at - 1 {
        v += disc(r) * quad(q2, &x(r));
    }
    for s in -lo..=-1 {
        for r in at + s..=at - 1 {
            v += disc(r) * quad(w1, &eta(r));
        }
    }
    for s in -hi..=-lo - 1 {
        for r in at + s..=at - 1 {
            v += disc(r) * quad(w2, &eta(r));
        }
    }
    v
}

pub fn naive_functional(cert: &LyapunovCertificate, grid: &StateGrid, i: i64, j: i64) -> f64 {
    let c = &cert.modes[0];
    let (n1, n2) = (grid.n1(), grid.n2());
    let h = |m: &Matrix| m.block(0, 0, n1, n1);
    let v = |m: &Matrix| m.block(n1, n1, n2, n2);
    let b = cert.bounds;
    let vh = naive_direction(&h(&c.p), &h(&c.q1), &h(&c.q2), &h(&c.w1), &h(&c.w2), cert.alpha, b.h_lo, b.h_hi, i, &|r| grid.xh(r, j).to_vec());
    let vv = naive_direction(&v(&c.p), &v(&c.q1), &v(&c.q2), &v(&c.w1), &v(&c.w2), cert.alpha, b.v_lo, b.v_hi, j, &|t| grid.xv(i, t).to_vec());
    vh + vv
}


/// Σ over all grid points with i + j = d of the squared state norms.
pub fn naive_diag_energy(grid: &StateGrid, d: i64) -> f64 {
    let ext = grid.extents();
    let mut want = 0.0;
    for i in 0..=ext.i_max {
        for j in 0..=ext.j_max {
            if i + j == d {
                want += grid.xh(i, j).iter().map(|x| x * x).sum::<f64>();
                want += grid.xv(i, j).iter().map(|x| x * x).sum::<f64>();
            }
        }
    }
    want
}
