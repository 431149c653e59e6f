mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use rand::RngExt;
use roesser::lmi::*;
use roesser::matrixcore::Matrix;
use roesser::model::{DelayFunction, DelaySpec, SwitchedModel};
use roesser::synthesis::VariableLayout;

fn random_solution(seed: u64, formulation: Formulation) -> SynthesisSolution {
    let mut r = rng(seed);
    let l = VariableLayout::new(1, 1, 2, 2, formulation);
    let mut s = l.zero_solution(0.85);
    for m in &mut s.modes {
        m.delta = 0.2;
        m.epsilon = 0.1;
    }
    let x: Vec<f64> = (0..l.len()).map(|_| r.random_range(0.1..1.0)).collect();
    l.decode(&x, &s)
}

fn constant_delay_model(d: i64) -> SwitchedModel {
    let mut m = SwitchedModel::paper_example();
    m.delays = DelaySpec {
        horizontal: DelayFunction::Constant { value: d },
        vertical: DelayFunction::Constant { value: d },
        bounds: None,
    };
    m.validate().unwrap()
}

fn upper(pairs: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
    pairs.iter().copied().collect()
}

/// Filled slots equal `expected`, every filled slot is nonzero, and the result is exactly symmetric.
fn audit(lmi: &AssembledLmi, expected: BTreeSet<(usize, usize)>) {
    let filled: BTreeSet<_> = lmi.layout.filled_slots().into_iter().collect();
    assert_eq!(filled, expected);
    for (r, c) in filled {
        assert!(lmi.layout.get(r, c).unwrap().max_abs() > 0.0, "slot ({r}, {c}) is zero");
    }
    let m = lmi.matrix.matrix();
    assert_eq!(m.max_abs_diff(&m.transpose()), 0.0);
}

#[test]
fn synthesis_slot_coverage() {
    let model = SwitchedModel::paper_example();
    let s = random_solution(1, Formulation::TimeVarying);
    let mut want = vec![(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (3, 3)];
    want.extend([(0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (1, 4), (1, 5), (1, 6), (1, 7)]);
    want.extend([(4, 4), (4, 5), (4, 6), (5, 5), (5, 6), (6, 6), (7, 7), (8, 8)]);
    for k in 0..2 {
        let b = assemble_synthesis(&s, &model, k).unwrap();
        audit(&b.phi, upper(&want));
        assert_eq!(b.psi.len(), 6);
    }
}

#[test]
fn analysis_slot_coverage() {
    let s = random_solution(2, Formulation::TimeVarying);
    let cert = unbar_certificate(&s, &SwitchedModel::paper_example().delay_bounds()).unwrap();
    let a = Matrix::from_rows(&[[0.3, 0.1], [-0.2, 0.4]]).unwrap();
    let ad = Matrix::from_rows(&[[0.05, 0.0], [0.02, 0.1]]).unwrap();
    let b = assemble_closed_loop_analysis(&cert, 0, &a, &ad).unwrap();
    let mut want = vec![(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (3, 3)];
    want.extend([(0, 4), (0, 5), (0, 6), (1, 4), (1, 5), (1, 6), (4, 4), (5, 5), (6, 6)]);
    audit(&b.phi, upper(&want));
}

#[test]
fn constant_delay_slot_coverage() {
    let model = constant_delay_model(2);
    let s = random_solution(3, Formulation::ConstantDelay);
    let b = assemble_for(&s, &model, 1).unwrap();
    let want = [(0, 0), (0, 1), (1, 1), (0, 2), (1, 2), (0, 3), (1, 3), (0, 4), (1, 4), (0, 5), (2, 2), (2, 3), (3, 3), (4, 4), (5, 5)];
    audit(&b.phi, upper(&want));
    assert_eq!(b.psi.len(), 2);
}

/// With d_L = d_H the three delayed-state rows coincide, so merging them by congruence
/// turns the time-varying Φ̄ (with Q̄2, W̄2, Ȳ, N̄, S̄ = 0) into the constant-delay Φ̃.
#[test]
fn constant_delay_form_is_a_congruence_of_the_general_one() {
    let model = constant_delay_model(2);
    for seed in 0..5 {
        let mut s = random_solution(10 + seed, Formulation::TimeVarying);
        for m in &mut s.modes {
            let v = &mut m.vars;
            for x in [&mut v.q2, &mut v.w2, &mut v.yh, &mut v.yv, &mut v.nh, &mut v.nv, &mut v.sh, &mut v.sv] {
                *x = Matrix::zeros(x.rows(), x.cols());
            }
        }
        let mut tilde = s.clone();
        tilde.formulation = Formulation::ConstantDelay;
        let (n, q, nu) = (2, 2, 2);
        for k in 0..2 {
            let general = assemble_synthesis(&s, &model, k).unwrap();
            let special = assemble_theorem2(&tilde, &model, k, 2, 2).unwrap();
            // full-index maps: constant-delay block -> general blocks
            let map: [&[usize]; 4] = [&[0], &[1, 2, 3], &[4], &[6]];
            let rows1 = 7 * n + q + nu;
            let rows2 = 4 * n + q + nu;
            let mut t = Matrix::zeros(rows1, rows2);
            for (b2, targets) in map.iter().enumerate() {
                for &b1 in *targets {
                    for e in 0..n {
                        t[(b1 * n + e, b2 * n + e)] = 1.0;
                    }
                }
            }
            for e in 0..q + nu {
                t[(7 * n + e, 4 * n + e)] = 1.0;
            }
            let t = t.select(&general.phi.kept, &special.phi.kept);
            let merged = &(&t.transpose() * general.phi.matrix.matrix()) * &t;
            assert!(merged.max_abs_diff(special.phi.matrix.matrix()) < 1e-12, "mode {k}");
            assert!(special.psi[0].matrix().max_abs_diff(general.psi[0].matrix()) < 1e-12);
            assert!(special.psi[1].matrix().max_abs_diff(general.psi[3].matrix()) < 1e-12);
        }
    }
}

#[test]
fn printed_solution_diagnostic() {
    let r = feasibility_report(&SynthesisSolution::paper_printed(), &SwitchedModel::paper_example(), 1e-7).unwrap();
    assert!(!r.pass);
    let phi: Vec<f64> = r.modes.iter().map(|m| m.blocks.iter().find(|b| b.name == "-Phi").unwrap().report.lambda_min).collect();
    assert!((phi[0] + 0.163).abs() < 1e-3 && (phi[1] + 0.110).abs() < 1e-3, "{phi:?}");
}

#[test]
fn zeroed_p_fails_report() {
    let mut s = SynthesisSolution::paper_printed();
    s.modes[0].vars.p = Matrix::zeros(2, 2);
    let r = feasibility_report(&s, &SwitchedModel::paper_example(), 1e-7).unwrap();
    let m0 = &r.modes[0];
    assert!(!m0.blocks.iter().find(|b| b.name == "Ph").unwrap().report.holds);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mu_is_monotone_in_mode_scaling(s1 in 1.0f64..5.0, ds in 0.0f64..5.0) {
        let base = SynthesisSolution::paper_printed();
        let scaled = |s: f64| {
            let mut x = base.clone();
            let v = &mut x.modes[1].vars;
            for m in [&mut v.p, &mut v.q1, &mut v.q2, &mut v.w1, &mut v.w2] {
                *m = m.scale(s);
            }
            mu_and_tau(&x, 0.85).unwrap().0
        };
        prop_assert!(scaled(s1) <= scaled(s1 + ds) + 1e-12);
    }

    #[test]
    fn gains_are_linear_in_upsilon(c in -5.0f64..5.0) {
        let s = SynthesisSolution::paper_printed();
        let mut t = s.clone();
        for m in &mut t.modes {
            m.upsilon = m.upsilon.scale(c);
        }
        let (k, kc) = (recover_gains(&s).unwrap(), recover_gains(&t).unwrap());
        for (a, b) in k.iter().zip(&kc) {
            prop_assert!(a.scale(c).max_abs_diff(b) < 1e-12);
        }
    }

    #[test]
    fn bar_unbar_round_trip(seed in any::<u64>()) {
        let s = random_solution(seed, Formulation::TimeVarying);
        let bounds = SwitchedModel::paper_example().delay_bounds();
        let cert = unbar_certificate(&s, &bounds).unwrap();
        let back = bar_certificate(&cert, &s.z, &s).unwrap();
        for (a, b) in back.modes.iter().zip(&s.modes) {
            let (x, y) = (&a.vars, &b.vars);
            for (p, q) in [(&x.p, &y.p), (&x.q1, &y.q1), (&x.w1, &y.w1), (&x.xh, &y.xh), (&x.mv, &y.mv), (&x.sh, &y.sh)] {
                prop_assert!(p.max_abs_diff(q) < 1e-10 * q.max_abs().max(1.0));
            }
        }
    }
}

#[test]
fn dwell_time_formula() {
    assert!((tau_star(3.2292, 0.85) - 7.213).abs() < 1e-3);
    let (mu, _) = mu_and_tau(&SynthesisSolution::paper_printed(), 0.85).unwrap();
    assert!((mu - 1.595).abs() < 1e-3);
}
