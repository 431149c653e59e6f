//! Wavefront simulation of the switched Roesser recursion, anti-diagonal energies,
//! the boundary C-norm and decay-envelope checks.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::Matrix;
use crate::model::{sample_fault_matrix, SwitchedModel, SwitchingSignal};

/// Component magnitude treated as divergence.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridExtents {
    pub i_max: i64,
    pub j_max: i64,
}

impl Default for GridExtents {
    fn default() -> Self {
        GridExtents { i_max: 40, j_max: 40 }
    }
}

impl GridExtents {
    pub fn new(i_max: i64, j_max: i64) -> Self {
        GridExtents { i_max, j_max }
    }

    pub fn max_diagonal(&self) -> i64 {
        self.i_max + self.j_max
    }
}

/// x^h on {−dh..i_max} × {0..j_max}, x^v on {0..i_max} × {−dv..j_max}, and σ(m) per diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    n1: usize,
    n2: usize,
    ext: GridExtents,
    dh: i64,
    dv: i64,
    xh: Vec<f64>,
    xv: Vec<f64>,
    modes: Vec<usize>,
}

impl StateGrid {
    pub fn zeros(n1: usize, n2: usize, ext: GridExtents, dh: i64, dv: i64) -> Self {
        let hcells = ((ext.i_max + dh + 1) * (ext.j_max + 1)) as usize;
        let vcells = ((ext.i_max + 1) * (ext.j_max + dv + 1)) as usize;
        StateGrid {
            n1,
            n2,
            ext,
            dh,
            dv,
            xh: vec![0.0; hcells * n1],
            xv: vec![0.0; vcells * n2],
            modes: vec![0; (ext.max_diagonal() + 1) as usize],
        }
    }

    /// Grid filled from closures (for hand-built fixtures and oracles).
    pub fn from_fn(
        n1: usize,
        n2: usize,
        ext: GridExtents,
        history: (i64, i64),
        mut fh: impl FnMut(i64, i64) -> Vec<f64>,
        mut fv: impl FnMut(i64, i64) -> Vec<f64>,
        mut mode: impl FnMut(i64) -> usize,
    ) -> Self {
        let (dh, dv) = history;
        let mut g = StateGrid::zeros(n1, n2, ext, dh, dv);
        for i in -dh..=ext.i_max {
            for j in 0..=ext.j_max {
                g.xh_mut(i, j).copy_from_slice(&fh(i, j));
            }
        }
        for i in 0..=ext.i_max {
            for j in -dv..=ext.j_max {
                g.xv_mut(i, j).copy_from_slice(&fv(i, j));
            }
        }
        for m in 0..=ext.max_diagonal() {
            g.modes[m as usize] = mode(m);
        }
        g
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn extents(&self) -> GridExtents {
        self.ext
    }

    /// History depths (d_hH, d_vH).
    pub fn history(&self) -> (i64, i64) {
        (self.dh, self.dv)
    }

    pub fn mode_at(&self, m: i64) -> usize {
        self.modes[m as usize]
    }

    pub fn has_h(&self, i: i64, j: i64) -> bool {
        (-self.dh..=self.ext.i_max).contains(&i) && (0..=self.ext.j_max).contains(&j)
    }

    pub fn has_v(&self, i: i64, j: i64) -> bool {
        (0..=self.ext.i_max).contains(&i) && (-self.dv..=self.ext.j_max).contains(&j)
    }

    fn h_index(&self, i: i64, j: i64) -> usize {
        assert!(self.has_h(i, j), "x^h({i}, {j}) outside grid");
        (((i + self.dh) * (self.ext.j_max + 1) + j) as usize) * self.n1
    }

    fn v_index(&self, i: i64, j: i64) -> usize {
        assert!(self.has_v(i, j), "x^v({i}, {j}) outside grid");
        ((i * (self.ext.j_max + self.dv + 1) + j + self.dv) as usize) * self.n2
    }

    pub fn xh(&self, i: i64, j: i64) -> &[f64] {
        let k = self.h_index(i, j);
        &self.xh[k..k + self.n1]
    }

    pub fn xv(&self, i: i64, j: i64) -> &[f64] {
        let k = self.v_index(i, j);
        &self.xv[k..k + self.n2]
    }

    fn xh_mut(&mut self, i: i64, j: i64) -> &mut [f64] {
        let k = self.h_index(i, j);
        &mut self.xh[k..k + self.n1]
    }

    fn xv_mut(&mut self, i: i64, j: i64) -> &mut [f64] {
        let k = self.v_index(i, j);
        &mut self.xv[k..k + self.n2]
    }

    /// Lattice points (i, j) of the grid interior on diagonal D.
    pub fn diagonal(&self, d: i64) -> impl Iterator<Item = (i64, i64)> {
        let lo = (d - self.ext.j_max).max(0);
        let hi = d.min(self.ext.i_max);
        (lo..=hi).map(move |i| (i, d - i))
    }

    pub fn max_abs(&self) -> f64 {
        self.xh.iter().chain(&self.xv).fold(0.0, |a, v| a.max(v.abs()))
    }

    /// CSV rows `i,j,m,mode,xh_1..,xv_1..` over the interior lattice; modes are 1-based.
    pub fn write_trajectory_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec!["i".to_string(), "j".into(), "m".into(), "mode".into()];
        header.extend((1..=self.n1).map(|k| format!("xh_{k}")));
        header.extend((1..=self.n2).map(|k| format!("xv_{k}")));
        writeln!(w, "{}", header.join(","))?;
        for i in 0..=self.ext.i_max {
            for j in 0..=self.ext.j_max {
                let mut row = vec![i.to_string(), j.to_string(), (i + j).to_string(), (self.mode_at(i + j) + 1).to_string()];
                row.extend(self.xh(i, j).iter().map(|v| format!("{v:e}")));
                row.extend(self.xv(i, j).iter().map(|v| format!("{v:e}")));
                writeln!(w, "{}", row.join(","))?;
            }
        }
        Ok(())
    }
}

/// Evolve the recursion. With `gains` the closed loop u = K^σ x is used.
pub fn simulate(model: &SwitchedModel, switching: &SwitchingSignal, gains: Option<&[Matrix]>, ext: GridExtents) -> Result<StateGrid> {
    let dims = model.dims;
    let (n1, n2, n) = (dims.n1, dims.n2, dims.n());
    let bounds = model.delay_bounds();
    if ext.i_max < 1 || ext.j_max < 1 {
        return Err(Error::config("grid", "extents must be at least 1"));
    }
    if let Some(k) = gains {
        if k.len() != model.n_modes() {
            return Err(Error::dim("gains", model.n_modes(), k.len()));
        }
        for (idx, g) in k.iter().enumerate() {
            if g.shape() != (dims.nu, n) {
                return Err(Error::dim(format!("gains[{idx}]"), format!("{}x{}", dims.nu, n), format!("{}x{}", g.rows(), g.cols())));
            }
        }
    }
    let mut grid = StateGrid::zeros(n1, n2, ext, bounds.h_hi, bounds.v_hi);
    for i in -bounds.h_hi..=0 {
        for j in 0..=ext.j_max {
            let v = model.boundary.horizontal_at(i, j, n1);
            grid.xh_mut(i, j).copy_from_slice(&v);
        }
    }
    for i in 0..=ext.i_max {
        for j in -bounds.v_hi..=0 {
            let v = model.boundary.vertical_at(i, j, n2);
            grid.xv_mut(i, j).copy_from_slice(&v);
        }
    }
    let signals: Vec<_> = model.modes.iter().map(|m| m.fault_signals()).collect();
    let mut x = vec![0.0; n];
    let mut xd = vec![0.0; n];
    for m in 0..=ext.max_diagonal() {
        let k = switching.mode_at(m);
        if k >= model.n_modes() {
            return Err(Error::config("switching", format!("mode {} not in model", k + 1)));
        }
        grid.modes[m as usize] = k;
        let mode = &model.modes[k];
        let points: Vec<(i64, i64)> = grid.diagonal(m).collect();
        for (i, j) in points {
            let f = mode.uncertainty.eval(dims.p, dims.q, i, j)?;
            let (mut a, a_d) = mode.matrices.uncertain(&f);
            if let Some(kk) = gains {
                let s = sample_fault_matrix(&mode.fault_bounds, &signals[k], k, i, j)?;
                a += &(&(&mode.matrices.b * &s.omega) * &kk[k]);
            }
            let dh = model.delays.horizontal.eval(i);
            let dv = model.delays.vertical.eval(j);
            if i - dh < -bounds.h_hi || j - dv < -bounds.v_hi || dh < 0 || dv < 0 {
                return Err(Error::GridUnderflow(format!("delayed read at ({i}, {j}) with d_h = {dh}, d_v = {dv}")));
            }
            x[..n1].copy_from_slice(grid.xh(i, j));
            x[n1..].copy_from_slice(grid.xv(i, j));
            xd[..n1].copy_from_slice(grid.xh(i - dh, j));
            xd[n1..].copy_from_slice(grid.xv(i, j - dv));
            let ax = a.mul_vec(&x);
            let adx = a_d.mul_vec(&xd);
            let next: Vec<f64> = ax.iter().zip(&adx).map(|(p, q)| p + q).collect();
            if let Some(bad) = next.iter().find(|v| !v.is_finite() || v.abs() > BLOWUP_THRESHOLD) {
                return Err(Error::NumericalBlowup { i, j, value: bad.abs() });
            }
            if i < ext.i_max {
                grid.xh_mut(i + 1, j).copy_from_slice(&next[..n1]);
            }
            if j < ext.j_max {
                grid.xv_mut(i, j + 1).copy_from_slice(&next[n1..]);
            }
        }
    }
    Ok(grid)
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Σ_{i+j=D} ‖x^h(i,j)‖² + ‖x^v(i,j)‖² over grid points.
pub fn diag_energy(grid: &StateGrid, d: i64) -> f64 {
    grid.diagonal(d).map(|(i, j)| sq(grid.xh(i, j)) + sq(grid.xv(i, j))).sum()
}

/// Per-diagonal energies, optionally with Lyapunov sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySeries {
    pub d_min: i64,
    pub energy: Vec<f64>,
    pub lyapunov: Option<Vec<f64>>,
}

impl EnergySeries {
    pub fn from_grid(grid: &StateGrid) -> Self {
        let energy = (0..=grid.extents().max_diagonal()).map(|d| diag_energy(grid, d)).collect();
        EnergySeries {
            d_min: 0,
            energy,
            lyapunov: None,
        }
    }

    pub fn d_max(&self) -> i64 {
        self.d_min + self.energy.len() as i64 - 1
    }

    pub fn at(&self, d: i64) -> f64 {
        self.energy[(d - self.d_min) as usize]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        match &self.lyapunov {
            Some(_) => writeln!(w, "D,energy,lyapunov")?,
            None => writeln!(w, "D,energy")?,
        }
        for (k, e) in self.energy.iter().enumerate() {
            let d = self.d_min + k as i64;
            match &self.lyapunov {
                Some(l) => writeln!(w, "{d},{e:e},{:e}", l[k])?,
                None => writeln!(w, "{d},{e:e}")?,
            }
        }
        Ok(())
    }
}

fn h_window_sum(grid: &StateGrid, z: i64, theta: i64) -> f64 {
    let ext = grid.extents();
    let mut s = 0.0;
    for (i, j) in grid.diagonal(z) {
        let r = i - theta;
        if r <= ext.i_max {
            s += sq(grid.xh(r, j));
        }
        if r < ext.i_max {
            let eta: Vec<f64> = grid.xh(r + 1, j).iter().zip(grid.xh(r, j)).map(|(a, b)| a - b).collect();
            s += sq(&eta);
        }
    }
    s
}

fn v_window_sum(grid: &StateGrid, z: i64, theta: i64) -> f64 {
    let ext = grid.extents();
    let mut s = 0.0;
    for (i, j) in grid.diagonal(z) {
        let t = j - theta;
        if t <= ext.j_max {
            s += sq(grid.xv(i, t));
        }
        if t < ext.j_max {
            let eta: Vec<f64> = grid.xv(i, t + 1).iter().zip(grid.xv(i, t)).map(|(a, b)| a - b).collect();
            s += sq(&eta);
        }
    }
    s
}

/// sup over θ_h ∈ {−d_hH+1..0}, θ_v ∈ {−d_vH+1..0} of the four-term diagonal sum.
/// The two directions decouple, so each window is maximized separately.
pub fn c_norm_at(grid: &StateGrid, z: i64) -> Result<f64> {
    let (dh, dv) = grid.history();
    if z < 0 || z > grid.extents().max_diagonal() {
        return Err(Error::GridUnderflow(format!("diagonal {z} outside the grid")));
    }
    let h = (-(dh - 1).max(0)..=0).map(|t| h_window_sum(grid, z, t)).fold(0.0, f64::max);
    let v = (-(dv - 1).max(0)..=0).map(|t| v_window_sum(grid, z, t)).fold(0.0, f64::max);
    Ok(h + v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub holds: bool,
    /// max over D of energy(D) / bound(D); ≤ 1 when the envelope holds
    pub worst_ratio: f64,
    /// min over D of bound(D) − energy(D)
    pub worst_margin: f64,
    /// least-squares decay rate of ln energy over D ≥ z
    pub fitted_rate: Option<f64>,
}

/// energy(D) ≤ η e^{−c (D − z)} C(z) for all D ≥ z in the series, with C(z) supplied.
pub fn decay_envelope_check(series: &EnergySeries, z: i64, c_norm_z: f64, eta: f64, c: f64) -> Result<EnvelopeCheck> {
    if !(eta > 0.0) || !(c > 0.0) {
        return Err(Error::config("envelope", format!("need eta > 0 and c > 0, got {eta}, {c}")));
    }
    let mut worst_ratio: f64 = 0.0;
    let mut worst_margin = f64::INFINITY;
    for d in z.max(series.d_min)..=series.d_max() {
        let e = series.at(d);
        let bound = eta * (-c * (d - z) as f64).exp() * c_norm_z;
        worst_margin = worst_margin.min(bound - e);
        if e > 0.0 {
            worst_ratio = worst_ratio.max(if bound > 0.0 { e / bound } else { f64::INFINITY });
        }
    }
    Ok(EnvelopeCheck {
        holds: worst_ratio <= 1.0,
        worst_ratio,
        worst_margin,
        fitted_rate: fitted_decay_rate(series, z),
    })
}

/// −slope of the least-squares line through (D, ln energy(D)), D ≥ z, skipping zeros.
pub fn fitted_decay_rate(series: &EnergySeries, z: i64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = (z.max(series.d_min)..=series.d_max())
        .filter_map(|d| {
            let e = series.at(d);
            (e > 0.0).then(|| (d as f64, e.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_dwell_switching, SwitchPattern};

    fn paper() -> SwitchedModel {
        SwitchedModel::paper_example()
    }

    #[test]
    fn first_horizontal_step_matches_hand_value() {
        let m = paper();
        let s = SwitchingSignal::constant(0, 10);
        let g = simulate(&m, &s, None, GridExtents::new(5, 5)).unwrap();
        assert_eq!(g.xh(1, 0), &[8.5]);
        assert!((g.xv(0, 1)[0] - (0.6 * 4.0 + 0.5 * 3.0)).abs() < 1e-15);
        assert_eq!(diag_energy(&g, 0), 25.0);
        let e1 = g.xh(1, 0)[0].powi(2) + g.xv(1, 0)[0].powi(2) + g.xh(0, 1)[0].powi(2) + g.xv(0, 1)[0].powi(2);
        assert!((diag_energy(&g, 1) - e1).abs() < 1e-12);
    }

    #[test]
    fn zero_boundary_gives_zero_grid() {
        let mut m = paper();
        m.boundary.horizontal = crate::model::BoundaryValues::Edge { value: vec![0.0] };
        m.boundary.vertical = crate::model::BoundaryValues::Edge { value: vec![0.0] };
        let s = generate_dwell_switching(2, 7.5, 1.0, 80, &SwitchPattern::RoundRobin).unwrap();
        let g = simulate(&m, &s, None, GridExtents::default()).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        assert_eq!(c_norm_at(&g, 3).unwrap(), 0.0);
        let series = EnergySeries::from_grid(&g);
        assert!(decay_envelope_check(&series, 0, 0.0, 1.0, 0.1).unwrap().holds);
    }

    #[test]
    fn replay_is_bit_identical() {
        let m = paper();
        let s = generate_dwell_switching(2, 7.5, 1.0, 40, &SwitchPattern::RoundRobin).unwrap();
        let k = vec![Matrix::zeros(2, 2); 2];
        let a = simulate(&m, &s, Some(&k), GridExtents::new(12, 12)).unwrap();
        let b = simulate(&m, &s, Some(&k), GridExtents::new(12, 12)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn open_loop_blows_up_on_large_grid() {
        let m = paper();
        let s = generate_dwell_switching(2, 7.5, 1.0, 80, &SwitchPattern::RoundRobin).unwrap();
        assert!(matches!(simulate(&m, &s, None, GridExtents::default()), Err(Error::NumericalBlowup { .. })));
    }

    #[test]
    fn constant_grid_c_norm() {
        let ext = GridExtents::new(6, 6);
        let g = StateGrid::from_fn(1, 2, ext, (3, 2), |_, _| vec![2.0], |_, _| vec![1.0, 1.0], |_| 0);
        // z = 4: 5 lattice points, each ‖c_h‖² + ‖c_v‖² = 4 + 2, differences vanish.
        assert!((c_norm_at(&g, 4).unwrap() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn halving_series_rate() {
        let series = EnergySeries {
            d_min: 0,
            energy: (0..20).map(|k| 25.0 * 0.5f64.powi(k)).collect(),
            lyapunov: None,
        };
        let c = fitted_decay_rate(&series, 0).unwrap();
        assert!((c - std::f64::consts::LN_2).abs() < 1e-9);
    }
}
