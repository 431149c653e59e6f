//! Mode-wise Lyapunov–Krasovskii functionals evaluated on simulated grids, and the
//! trajectory-level decrease, diagonal-sum, jump and chained checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::Matrix;
use crate::model::DelayBounds;
use crate::simulator::StateGrid;

/// Strictness tolerance for the pointwise decrease, absolute on V-scale.
pub const DECREASE_TOL: f64 = 1e-8;

/// One mode's matrix family. Used both for barred decision variables and for
/// un-barred certificates.
///
/// `P`, `Q1`, `Q2`, `W1`, `W2` are n×n with diag{h, v} structure; `Xh`, `Yh` are 2n1×2n1,
/// `Xv`, `Yv` are 2n2×2n2; the slack columns `Mh = [M1h; M2h]` are 2n1×n1 (likewise v, and N, S).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVariables {
    #[serde(rename = "P")]
    pub p: Matrix,
    #[serde(rename = "Q1")]
    pub q1: Matrix,
    #[serde(rename = "Q2")]
    pub q2: Matrix,
    #[serde(rename = "W1")]
    pub w1: Matrix,
    #[serde(rename = "W2")]
    pub w2: Matrix,
    #[serde(rename = "Xh")]
    pub xh: Matrix,
    #[serde(rename = "Xv")]
    pub xv: Matrix,
    #[serde(rename = "Yh")]
    pub yh: Matrix,
    #[serde(rename = "Yv")]
    pub yv: Matrix,
    #[serde(rename = "Mh")]
    pub mh: Matrix,
    #[serde(rename = "Mv")]
    pub mv: Matrix,
    #[serde(rename = "Nh")]
    pub nh: Matrix,
    #[serde(rename = "Nv")]
    pub nv: Matrix,
    #[serde(rename = "Sh")]
    pub sh: Matrix,
    #[serde(rename = "Sv")]
    pub sv: Matrix,
}

/// Which half of a 2x2-block symmetric or slack-column variable.
#[derive(Debug, Clone, Copy)]
enum Part {
    First,
    Second,
}

impl BlockVariables {
    pub fn zeros(n1: usize, n2: usize) -> Self {
        let n = n1 + n2;
        BlockVariables {
            p: Matrix::zeros(n, n),
            q1: Matrix::zeros(n, n),
            q2: Matrix::zeros(n, n),
            w1: Matrix::zeros(n, n),
            w2: Matrix::zeros(n, n),
            xh: Matrix::zeros(2 * n1, 2 * n1),
            xv: Matrix::zeros(2 * n2, 2 * n2),
            yh: Matrix::zeros(2 * n1, 2 * n1),
            yv: Matrix::zeros(2 * n2, 2 * n2),
            mh: Matrix::zeros(2 * n1, n1),
            mv: Matrix::zeros(2 * n2, n2),
            nh: Matrix::zeros(2 * n1, n1),
            nv: Matrix::zeros(2 * n2, n2),
            sh: Matrix::zeros(2 * n1, n1),
            sv: Matrix::zeros(2 * n2, n2),
        }
    }

    pub fn n1(&self) -> usize {
        self.xh.rows() / 2
    }

    pub fn n2(&self) -> usize {
        self.xv.rows() / 2
    }

    pub fn validate(&self, n1: usize, n2: usize, path: &str) -> Result<()> {
        let n = n1 + n2;
        let shapes: [(&str, &Matrix, (usize, usize)); 15] = [
            ("P", &self.p, (n, n)),
            ("Q1", &self.q1, (n, n)),
            ("Q2", &self.q2, (n, n)),
            ("W1", &self.w1, (n, n)),
            ("W2", &self.w2, (n, n)),
            ("Xh", &self.xh, (2 * n1, 2 * n1)),
            ("Xv", &self.xv, (2 * n2, 2 * n2)),
            ("Yh", &self.yh, (2 * n1, 2 * n1)),
            ("Yv", &self.yv, (2 * n2, 2 * n2)),
            ("Mh", &self.mh, (2 * n1, n1)),
            ("Mv", &self.mv, (2 * n2, n2)),
            ("Nh", &self.nh, (2 * n1, n1)),
            ("Nv", &self.nv, (2 * n2, n2)),
            ("Sh", &self.sh, (2 * n1, n1)),
            ("Sv", &self.sv, (2 * n2, n2)),
        ];
        for (name, m, want) in shapes {
            if m.shape() != want {
                return Err(Error::dim(format!("{path}.{name}"), format!("{}x{}", want.0, want.1), format!("{}x{}", m.rows(), m.cols())));
            }
            if !m.is_finite() {
                return Err(Error::config(format!("{path}.{name}"), "non-finite entry"));
            }
        }
        Ok(())
    }

    /// h and v diagonal sub-blocks of an n×n diag-split variable.
    pub fn split(&self, m: &Matrix) -> (Matrix, Matrix) {
        let (n1, n2) = (self.n1(), self.n2());
        (m.block(0, 0, n1, n1), m.block(n1, n1, n2, n2))
    }

    fn sym_part(&self, h: &Matrix, v: &Matrix, r: Part, c: Part) -> Matrix {
        let (n1, n2) = (self.n1(), self.n2());
        let off = |p: Part, k: usize| match p {
            Part::First => 0,
            Part::Second => k,
        };
        Matrix::block_diag(&[&h.block(off(r, n1), off(c, n1), n1, n1), &v.block(off(r, n2), off(c, n2), n2, n2)])
    }

    fn col_part(&self, h: &Matrix, v: &Matrix, r: Part) -> Matrix {
        let (n1, n2) = (self.n1(), self.n2());
        match r {
            Part::First => Matrix::block_diag(&[&h.block(0, 0, n1, n1), &v.block(0, 0, n2, n2)]),
            Part::Second => Matrix::block_diag(&[&h.block(n1, 0, n1, n1), &v.block(n2, 0, n2, n2)]),
        }
    }

    pub fn x11(&self) -> Matrix {
        self.sym_part(&self.xh, &self.xv, Part::First, Part::First)
    }
    pub fn x12(&self) -> Matrix {
        self.sym_part(&self.xh, &self.xv, Part::First, Part::Second)
    }
    pub fn x22(&self) -> Matrix {
        self.sym_part(&self.xh, &self.xv, Part::Second, Part::Second)
    }
    pub fn y11(&self) -> Matrix {
        self.sym_part(&self.yh, &self.yv, Part::First, Part::First)
    }
    pub fn y12(&self) -> Matrix {
        self.sym_part(&self.yh, &self.yv, Part::First, Part::Second)
    }
    pub fn y22(&self) -> Matrix {
        self.sym_part(&self.yh, &self.yv, Part::Second, Part::Second)
    }
    pub fn m1(&self) -> Matrix {
        self.col_part(&self.mh, &self.mv, Part::First)
    }
    pub fn m2(&self) -> Matrix {
        self.col_part(&self.mh, &self.mv, Part::Second)
    }
    pub fn n1_slack(&self) -> Matrix {
        self.col_part(&self.nh, &self.nv, Part::First)
    }
    pub fn n2_slack(&self) -> Matrix {
        self.col_part(&self.nh, &self.nv, Part::Second)
    }
    pub fn s1(&self) -> Matrix {
        self.col_part(&self.sh, &self.sv, Part::First)
    }
    pub fn s2(&self) -> Matrix {
        self.col_part(&self.sh, &self.sv, Part::Second)
    }
}

/// Un-barred per-mode certificate matrices with the decay rate and delay bounds they certify.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCertificate {
    pub alpha: f64,
    pub bounds: DelayBounds,
    pub modes: Vec<BlockVariables>,
}

impl LyapunovCertificate {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        LyapunovCertificate { alpha, ..self.clone() }
    }
}

/// V1..V3 per direction at one lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FunctionalParts {
    pub h: [f64; 3],
    pub v: [f64; 3],
}

impl FunctionalParts {
    pub fn v_h(&self) -> f64 {
        self.h.iter().sum()
    }

    pub fn v_v(&self) -> f64 {
        self.v.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.v_h() + self.v_v()
    }
}

fn quad(m: &Matrix, x: &[f64]) -> f64 {
    let mx = m.mul_vec(x);
    mx.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Discounted window sums for one direction. `state(r)` returns the state at offset r
/// along the direction; `at` is the current index (i for h, j for v).
fn directional_parts(
    p: &Matrix,
    q1: &Matrix,
    q2: &Matrix,
    w1: &Matrix,
    w2: &Matrix,
    alpha: f64,
    lo: i64,
    hi: i64,
    at: i64,
    state: impl Fn(i64) -> Vec<f64>,
) -> [f64; 3] {
    let disc = |r: i64| alpha.powi((at - r - 1) as i32);
    let v1 = quad(p, &state(at));
    let mut v2 = 0.0;
    for r in at - lo..at {
        v2 += quad(q1, &state(r)) * disc(r);
    }
    for r in at - hi..at {
        v2 += quad(q2, &state(r)) * disc(r);
    }
    // Double sums with the order swapped: η(r) enters once for every s with i + s ≤ r.
    let mut v3 = 0.0;
    for r in at - hi..at {
        let eta = diff(&state(r + 1), &state(r));
        let pos = r - at;
        let c1 = if r >= at - lo { pos + lo + 1 } else { 0 };
        let c2 = ((-lo - 1).min(pos) + hi + 1).max(0);
        if c1 > 0 {
            v3 += c1 as f64 * quad(w1, &eta) * disc(r);
        }
        if c2 > 0 {
            v3 += c2 as f64 * quad(w2, &eta) * disc(r);
        }
    }
    [v1, v2, v3]
}

/// V_k at (i, j) over the stored grid.
pub fn eval_mode_functional(cert: &LyapunovCertificate, k: usize, grid: &StateGrid, i: i64, j: i64) -> Result<FunctionalParts> {
    let b = cert.bounds;
    if !grid.has_h(i - b.h_hi, j) || !grid.has_h(i, j) || !grid.has_v(i, j - b.v_hi) || !grid.has_v(i, j) {
        return Err(Error::GridUnderflow(format!("functional window at ({i}, {j}) leaves the grid")));
    }
    let c = cert
        .modes
        .get(k)
        .ok_or_else(|| Error::IncompleteModel(format!("certificate has no mode {}", k + 1)))?;
    let (ph, pv) = c.split(&c.p);
    let (q1h, q1v) = c.split(&c.q1);
    let (q2h, q2v) = c.split(&c.q2);
    let (w1h, w1v) = c.split(&c.w1);
    let (w2h, w2v) = c.split(&c.w2);
    let h = directional_parts(&ph, &q1h, &q2h, &w1h, &w2h, cert.alpha, b.h_lo, b.h_hi, i, |r| grid.xh(r, j).to_vec());
    let v = directional_parts(&pv, &q1v, &q2v, &w1v, &w2v, cert.alpha, b.v_lo, b.v_hi, j, |t| grid.xv(i, t).to_vec());
    Ok(FunctionalParts { h, v })
}

/// Σ_{i+j=D} V_k(i, j).
pub fn diagonal_functional(cert: &LyapunovCertificate, k: usize, grid: &StateGrid, d: i64) -> Result<f64> {
    grid.diagonal(d)
        .map(|(i, j)| eval_mode_functional(cert, k, grid, i, j).map(|p| p.total()))
        .sum()
}

/// Σ_{i+j=D} V_{σ(D)} for each diagonal of the grid.
pub fn lyapunov_series(cert: &LyapunovCertificate, grid: &StateGrid) -> Result<Vec<f64>> {
    (0..=grid.extents().max_diagonal())
        .map(|d| diagonal_functional(cert, grid.mode_at(d), grid, d))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecreaseReport {
    pub passed: bool,
    pub worst_residual: f64,
    pub worst_at: Option<(i64, i64)>,
    pub checked: usize,
    pub violations: usize,
}

/// r(i, j) = V^h(i+1, j) + V^v(i, j+1) − α (V^h(i, j) + V^v(i, j)) with the mode of diagonal
/// m = i + j, skipping points where σ(m + 1) ≠ σ(m).
pub fn check_pointwise_decrease(cert: &LyapunovCertificate, grid: &StateGrid, tol: f64) -> Result<DecreaseReport> {
    let ext = grid.extents();
    let mut report = DecreaseReport {
        passed: true,
        worst_residual: f64::NEG_INFINITY,
        worst_at: None,
        checked: 0,
        violations: 0,
    };
    for i in 0..ext.i_max {
        for j in 0..ext.j_max {
            let m = i + j;
            let k = grid.mode_at(m);
            if grid.mode_at(m + 1) != k {
                continue;
            }
            let now = eval_mode_functional(cert, k, grid, i, j)?;
            let h_next = eval_mode_functional(cert, k, grid, i + 1, j)?.v_h();
            let v_next = eval_mode_functional(cert, k, grid, i, j + 1)?.v_v();
            let r = h_next + v_next - cert.alpha * now.total();
            report.checked += 1;
            if r >= tol {
                report.violations += 1;
            }
            if r > report.worst_residual {
                report.worst_residual = r;
                report.worst_at = Some((i, j));
            }
        }
    }
    report.passed = report.violations == 0;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalReport {
    pub holds: bool,
    /// Σ_D V / Σ_z V (1 when both vanish)
    pub ratio: f64,
    /// α^{D−z}
    pub bound: f64,
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-12 * rhs.abs().max(1.0)
}

/// Σ_{i+j=D} V_k ≤ α^{D−z} Σ_{i+j=z} V_k with k = σ(z); requires no switch in (z, D).
pub fn check_diagonal_inequality(cert: &LyapunovCertificate, grid: &StateGrid, z: i64, d: i64) -> Result<DiagonalReport> {
    if d < z {
        return Err(Error::config("diagonal window", format!("z = {z} exceeds D = {d}")));
    }
    let k = grid.mode_at(z);
    if (z..d).any(|m| grid.mode_at(m) != k) {
        return Err(Error::config("diagonal window", format!("mode switches inside ({z}, {d})")));
    }
    let base = diagonal_functional(cert, k, grid, z)?;
    let top = diagonal_functional(cert, k, grid, d)?;
    let bound = cert.alpha.powi((d - z) as i32);
    let ratio = if base > 0.0 { top / base } else if top > 0.0 { f64::INFINITY } else { 1.0 };
    Ok(DiagonalReport {
        holds: within(top, bound * base),
        ratio,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub holds: bool,
    pub worst_ratio: f64,
    pub instants: Vec<i64>,
}

/// At each switch diagonal m: Σ V_{σ(m)} ≤ μ Σ V_{σ(m−1)}.
pub fn check_switch_jump(cert: &LyapunovCertificate, grid: &StateGrid, mu: f64) -> Result<JumpReport> {
    if !(mu >= 1.0) {
        return Err(Error::config("mu", format!("must be at least 1, got {mu}")));
    }
    let mut report = JumpReport {
        holds: true,
        worst_ratio: 1.0,
        instants: Vec::new(),
    };
    for m in 1..=grid.extents().max_diagonal() {
        let (prev, cur) = (grid.mode_at(m - 1), grid.mode_at(m));
        if prev == cur {
            continue;
        }
        report.instants.push(m);
        let incoming = diagonal_functional(cert, cur, grid, m)?;
        let outgoing = diagonal_functional(cert, prev, grid, m)?;
        if outgoing > 0.0 {
            report.worst_ratio = report.worst_ratio.max(incoming / outgoing);
        } else if incoming > 0.0 {
            report.worst_ratio = f64::INFINITY;
        }
        if !within(incoming, mu * outgoing) {
            report.holds = false;
        }
    }
    Ok(report)
}

/// Σ_D V_{σ(D−1)} ≤ μ^χ α^{D−z} Σ_z V_{σ(z)} with χ the number of switches in (z, D),
/// for every D in (z, D_max]. Returns the worst ratio of left to right side.
pub fn chained_estimate_ratio(cert: &LyapunovCertificate, grid: &StateGrid, mu: f64, z: i64) -> Result<f64> {
    let base = diagonal_functional(cert, grid.mode_at(z), grid, z)?;
    let mut worst: f64 = 0.0;
    let mut chi = 0;
    for d in z + 1..=grid.extents().max_diagonal() {
        if d - 1 > z && grid.mode_at(d - 1) != grid.mode_at(d - 2) {
            chi += 1;
        }
        let lhs = diagonal_functional(cert, grid.mode_at(d - 1), grid, d)?;
        let rhs = mu.powi(chi) * cert.alpha.powi((d - z) as i32) * base;
        if lhs > 0.0 {
            worst = worst.max(if rhs > 0.0 { lhs / rhs } else { f64::INFINITY });
        }
    }
    Ok(worst)
}
