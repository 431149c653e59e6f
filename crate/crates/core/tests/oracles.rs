//! Functional, energy and simulator outputs against naive reimplementations.

mod common;

use std::collections::HashMap;

use common::*;
use rand::RngExt;
use roesser::lmi::{recover_gains, SynthesisSolution};
use roesser::lyapunov::eval_mode_functional;
use roesser::model::{generate_dwell_switching, DelayBounds, SwitchPattern, SwitchedModel, UncertaintyFamily};
use roesser::simulator::{diag_energy, simulate, GridExtents};

#[test]
fn functional_matches_naive_sums() {
    let mut r = rng(11);
    let ext = GridExtents::new(6, 6);
    for _ in 0..100 {
        let (n1, n2) = (r.random_range(1..=2), r.random_range(1..=2));
        let h_lo = r.random_range(0..=2);
        let v_lo = r.random_range(0..=2);
        let bounds = DelayBounds::new(h_lo, r.random_range(h_lo.max(1)..=3), v_lo, r.random_range(v_lo.max(1)..=3));
        let cert = random_certificate(&mut r, n1, n2, bounds);
        let grid = random_grid(&mut r, n1, n2, ext, (bounds.h_hi, bounds.v_hi));
        for i in 0..=ext.i_max {
            for j in 0..=ext.j_max {
                let ours = eval_mode_functional(&cert, 0, &grid, i, j).unwrap();
                let want = naive_functional(&cert, &grid, i, j);
                assert!((ours.total() - want).abs() <= 1e-12 * want.max(1.0), "({i}, {j}): {} vs {want}", ours.total());
                assert!(ours.h.iter().chain(&ours.v).all(|x| *x >= 0.0));
            }
        }
    }
}

#[test]
fn diag_energy_matches_double_loop() {
    let mut r = rng(12);
    let ext = GridExtents::new(6, 6);
    for _ in 0..100 {
        let (n1, n2) = (r.random_range(1..=3), r.random_range(1..=3));
        let grid = random_grid(&mut r, n1, n2, ext, (2, 2));
        for d in 0..=ext.max_diagonal() {
            let want = naive_diag_energy(&grid, d);
            let got = diag_energy(&grid, d);
            assert!((got - want).abs() <= 1e-12 * want.max(1.0));
        }
    }
}

fn nominal_paper() -> SwitchedModel {
    let m = SwitchedModel::paper_example();
    let modes = m
        .modes
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.uncertainty = UncertaintyFamily::Zero;
            s.fault_realization = None;
            s
        })
        .collect();
    m.with_modes(modes)
}

#[test]
fn nominal_closed_loop_matches_row_major_recursion() {
    let model = nominal_paper();
    let gains = recover_gains(&SynthesisSolution::paper_printed()).unwrap();
    let ext = GridExtents::new(6, 6);
    let sw = generate_dwell_switching(2, 2.0, 1.0, ext.max_diagonal(), &SwitchPattern::RoundRobin).unwrap();
    let grid = simulate(&model, &sw, Some(&gains), ext).unwrap();

    let b = model.delay_bounds();
    let mut xh: HashMap<(i64, i64), f64> = HashMap::new();
    let mut xv: HashMap<(i64, i64), f64> = HashMap::new();
    for i in -b.h_hi..=0 {
        for j in 0..=ext.j_max {
            xh.insert((i, j), model.boundary.horizontal_at(i, j, 1)[0]);
        }
    }
    for i in 0..=ext.i_max {
        for j in -b.v_hi..=0 {
            xv.insert((i, j), model.boundary.vertical_at(i, j, 1)[0]);
        }
    }
    for i in 0..=ext.i_max {
        for j in 0..=ext.j_max {
            let k = sw.mode_at(i + j);
            let mode = &model.modes[k];
            let mm = &mode.matrices;
            let omega0 = mode.fault_stats().unwrap().omega0;
            let a = &mm.a + &(&(&mm.b * &omega0) * &gains[k]);
            let (dh, dv) = (model.delays.horizontal.eval(i), model.delays.vertical.eval(j));
            let x = [xh[&(i, j)], xv[&(i, j)]];
            let xd = [xh[&(i - dh, j)], xv[&(i, j - dv)]];
            let mut next = [0.0; 2];
            for (r, n) in next.iter_mut().enumerate() {
                for c in 0..2 {
                    *n += a[(r, c)] * x[c] + mm.a_d[(r, c)] * xd[c];
                }
            }
            xh.insert((i + 1, j), next[0]);
            xv.insert((i, j + 1), next[1]);
        }
    }
    for i in 0..=ext.i_max {
        for j in 0..=ext.j_max {
            assert!((grid.xh(i, j)[0] - xh[&(i, j)]).abs() < 1e-12, "x^h({i}, {j})");
            assert!((grid.xv(i, j)[0] - xv[&(i, j)]).abs() < 1e-12, "x^v({i}, {j})");
        }
    }
}

#[test]
fn simulation_is_causal_and_replayable() {
    let model = SwitchedModel::paper_example();
    let gains = recover_gains(&SynthesisSolution::paper_printed()).unwrap();
    let big = GridExtents::new(12, 12);
    let small = GridExtents::new(6, 6);
    let sw = generate_dwell_switching(2, 3.0, 1.0, big.max_diagonal(), &SwitchPattern::RoundRobin).unwrap();
    let g1 = simulate(&model, &sw, Some(&gains), big).unwrap();
    let g2 = simulate(&model, &sw, Some(&gains), big).unwrap();
    assert_eq!(g1, g2);
    let gs = simulate(&model, &sw, Some(&gains), small).unwrap();
    for i in 0..=6 {
        for j in 0..=6 {
            assert_eq!(gs.xh(i, j), g1.xh(i, j));
            assert_eq!(gs.xv(i, j), g1.xv(i, j));
        }
    }
}
