//! Feasibility solver for the synthesis inequalities, the δ/ε sweep and the consolidated
//! certificate check.

mod barrier;
mod certify;
mod layout;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, InfeasibleReason, Result};
use crate::lmi::{mode_constraints, mu_and_tau, store_gains, Formulation, SynthesisSolution};
use crate::matrixcore::Matrix;
use crate::model::SwitchedModel;

pub use barrier::{minimize_max_eigenvalue, probe_affine, worst_violation, AffineMap, BarrierOptions, BarrierResult, Termination, TraceRecord};
pub use certify::{analysis_vertices, certify, AnalysisRecord, CertifyReport};
pub use layout::VariableLayout;

/// Candidate values of δ and ε tried when the user does not fix them.
pub const SWEEP_GRID: [f64; 5] = [0.05, 0.1, 0.2, 0.5, 1.0];

/// Default success margin on the worst eigenvalue.
pub const DEFAULT_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    pub model: SwitchedModel,
    pub alpha: f64,
    /// Per-mode δ_k.
    pub delta: Vec<f64>,
    /// Per-mode ε_k.
    pub epsilon: Vec<f64>,
    pub margin: f64,
    pub formulation: Formulation,
    pub max_iters: usize,
}

impl FeasibilityProblem {
    /// Same δ and ε for every mode.
    pub fn new(model: SwitchedModel, alpha: f64, delta: f64, epsilon: f64) -> Result<Self> {
        let n = model.n_modes();
        let p = FeasibilityProblem {
            model,
            alpha,
            delta: vec![delta; n],
            epsilon: vec![epsilon; n],
            margin: DEFAULT_MARGIN,
            formulation: Formulation::TimeVarying,
            max_iters: 500,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_formulation(mut self, f: Formulation) -> Result<Self> {
        self.formulation = f;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::AlphaRange(self.alpha));
        }
        let n = self.model.n_modes();
        if self.delta.len() != n || self.epsilon.len() != n {
            return Err(Error::dim("delta/epsilon per mode", n, self.delta.len().min(self.epsilon.len())));
        }
        if self.delta.iter().chain(&self.epsilon).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::config("delta/epsilon", "must be positive"));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::config("margin", "must be nonnegative"));
        }
        if self.formulation == Formulation::ConstantDelay && !self.model.delay_bounds().is_constant() {
            return Err(Error::DelayOrder("constant-delay synthesis needs d_L = d_H in both directions".into()));
        }
        Ok(())
    }

    pub fn layout(&self) -> VariableLayout {
        let d = &self.model.dims;
        VariableLayout::new(d.n1, d.n2, d.nu, self.model.n_modes(), self.formulation)
    }

    /// Template carrying α, δ_k, ε_k; structured variables zero.
    fn template(&self, layout: &VariableLayout) -> SynthesisSolution {
        let mut s = layout.zero_solution(self.alpha);
        for (k, m) in s.modes.iter_mut().enumerate() {
            m.delta = self.delta[k];
            m.epsilon = self.epsilon[k];
        }
        s
    }

    /// Starting point: P̄, Q̄, W̄ = 0.1 I; Z = I; Υ = 0; slacks 0; X̄, Ȳ = 0.01 I.
    fn initial(&self, layout: &VariableLayout) -> SynthesisSolution {
        let mut s = self.template(layout);
        let d = &self.model.dims;
        let n = d.n();
        s.z = Matrix::identity(n);
        let tv = self.formulation == Formulation::TimeVarying;
        for m in &mut s.modes {
            let v = &mut m.vars;
            v.p = Matrix::identity(n).scale(0.1);
            v.q1 = Matrix::identity(n).scale(0.1);
            v.w1 = Matrix::identity(n).scale(0.1);
            v.xh = Matrix::identity(2 * d.n1).scale(0.01);
            v.xv = Matrix::identity(2 * d.n2).scale(0.01);
            if tv {
                v.q2 = Matrix::identity(n).scale(0.1);
                v.w2 = Matrix::identity(n).scale(0.1);
                v.yh = Matrix::identity(2 * d.n1).scale(0.01);
                v.yv = Matrix::identity(2 * d.n2).scale(0.01);
            }
        }
        s
    }

    /// Every constraint block of every mode as an affine map of the decision vector.
    pub fn affine_maps(&self) -> Result<Vec<AffineMap>> {
        self.validate()?;
        let layout = self.layout();
        let template = self.template(&layout);
        probe_affine(layout.len(), |x| {
            let s = layout.decode(x, &template);
            let mut out = Vec::new();
            for k in 0..s.n_modes() {
                for c in mode_constraints(&s, &self.model, k)? {
                    out.push((format!("mode{}.{}", k + 1, c.name), c.matrix.into_matrix()));
                }
            }
            Ok(out)
        })
    }
}

/// Per-iteration log of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub iterations: usize,
    pub t: Vec<f64>,
    pub step_norm: Vec<f64>,
    /// `None` when the solve succeeded.
    pub infeasible: Option<InfeasibleReason>,
    pub lower_bound: f64,
}

impl SolverTrace {
    fn from_result(r: &BarrierResult) -> Self {
        SolverTrace {
            iterations: r.records.last().map_or(0, |x| x.iter),
            t: r.records.iter().map(|x| x.t).collect(),
            step_norm: r.records.iter().map(|x| x.step_norm).collect(),
            infeasible: match r.termination {
                Termination::Feasible => None,
                Termination::Infeasible(why) => Some(why),
            },
            lower_bound: r.lower_bound,
        }
    }

    pub fn best_t(&self) -> f64 {
        self.t.last().copied().unwrap_or(f64::INFINITY)
    }

    /// `iter,t,step_norm`
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "iter,t,step_norm")?;
        for (k, (t, s)) in self.t.iter().zip(&self.step_norm).enumerate() {
            writeln!(w, "{k},{t:e},{s:e}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(&mut f)?;
        f.flush()?;
        Ok(())
    }
}

/// Result of one solve: the solution on success, the best iterate either way.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Option<SynthesisSolution>,
    pub best: SynthesisSolution,
    pub best_t: f64,
    pub trace: SolverTrace,
}

impl SolveOutcome {
    /// The solution, or `Error::Infeasible` with the best t reached.
    pub fn require(self) -> Result<SynthesisSolution> {
        match self.solution {
            Some(s) => Ok(s),
            None => Err(Error::Infeasible {
                reason: self.trace.infeasible.unwrap_or(InfeasibleReason::Converged),
                best_t: self.best_t,
                iterations: self.trace.iterations,
            }),
        }
    }
}

/// Drive the worst eigenvalue over all blocks below −margin.
pub fn solve(problem: &FeasibilityProblem) -> Result<SolveOutcome> {
    let layout = problem.layout();
    let maps = problem.affine_maps()?;
    let x0 = layout.encode(&problem.initial(&layout));
    let opts = BarrierOptions {
        margin: problem.margin,
        stop_margin: (10.0 * problem.margin).max(problem.margin),
        max_iters: problem.max_iters,
        ..BarrierOptions::default()
    };
    let r = minimize_max_eigenvalue(&maps, &x0, &opts)?;
    let trace = SolverTrace::from_result(&r);
    let mut best = layout.decode(&r.x, &problem.template(&layout));
    best.note = format!("worst eigenvalue {:e} after {} iterations", r.t, trace.iterations);
    log::info!("solve alpha={} delta={:?} eps={:?}: t = {:e} ({:?})", problem.alpha, problem.delta, problem.epsilon, r.t, r.termination);
    let solution = match r.termination {
        Termination::Feasible => {
            let mut s = best.clone();
            store_gains(&mut s)?;
            let (mu, ts) = mu_and_tau(&s, s.alpha)?;
            s.mu = Some(mu);
            s.tau_star = Some(ts);
            Some(s)
        }
        Termination::Infeasible(_) => None,
    };
    Ok(SolveOutcome {
        solution,
        best,
        best_t: r.t,
        trace,
    })
}

/// One point of a δ/ε sweep.
#[derive(Debug)]
pub struct SweepEntry {
    pub delta: f64,
    pub epsilon: f64,
    pub outcome: Result<SolveOutcome>,
}

impl SweepEntry {
    fn success_t(&self) -> Option<f64> {
        match &self.outcome {
            Ok(o) if o.solution.is_some() => Some(o.best_t),
            _ => None,
        }
    }
}

#[derive(Debug)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    /// Index of the deepest success (grid order breaks ties).
    pub best: Option<usize>,
}

impl SweepResult {
    pub fn best_entry(&self) -> Option<&SweepEntry> {
        self.best.map(|k| &self.entries[k])
    }

    /// The chosen solution, moved out.
    pub fn into_best(mut self) -> Option<(f64, f64, SolveOutcome)> {
        let k = self.best?;
        let e = self.entries.swap_remove(k);
        e.outcome.ok().map(|o| (e.delta, e.epsilon, o))
    }

    /// Smallest worst eigenvalue over all entries that ran.
    pub fn best_t(&self) -> f64 {
        self.entries
            .iter()
            .filter_map(|e| e.outcome.as_ref().ok().map(|o| o.best_t))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Solve on every (δ, ε) pair of the grids concurrently, the same pair for all modes.
pub fn sweep(problem: &FeasibilityProblem, delta_grid: &[f64], epsilon_grid: &[f64]) -> SweepResult {
    let pairs: Vec<(f64, f64)> = delta_grid.iter().flat_map(|d| epsilon_grid.iter().map(move |e| (*d, *e))).collect();
    let entries: Vec<SweepEntry> = std::thread::scope(|s| {
        let handles: Vec<_> = pairs
            .iter()
            .map(|&(d, e)| {
                s.spawn(move || {
                    let mut p = problem.clone();
                    p.delta = vec![d; p.delta.len()];
                    p.epsilon = vec![e; p.epsilon.len()];
                    SweepEntry {
                        delta: d,
                        epsilon: e,
                        outcome: solve(&p),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut best: Option<(usize, f64)> = None;
    for (k, e) in entries.iter().enumerate() {
        if let Some(t) = e.success_t() {
            if best.is_none_or(|(_, bt)| t < bt) {
                best = Some((k, t));
            }
        }
    }
    SweepResult {
        entries,
        best: best.map(|(k, _)| k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(a: f64, b: f64, h: f64, fault: (f64, f64)) -> SwitchedModel {
        let doc = serde_json::json!({
            "dims": {"n1": 1, "n2": 1, "nu": 2, "p": 2, "q": 2},
            "modes": [{
                "A": [[a, 0.0], [0.0, a]], "A_d": [[0.0, 0.0], [0.0, 0.0]],
                "B": [[b, 0.0], [0.0, b]], "H": [[h, 0.0], [0.0, h]],
                "E": [[h, 0.0], [0.0, h]], "E_d": [[0.0, 0.0], [0.0, 0.0]],
                "fault_bounds": [{"lo": fault.0, "hi": fault.1}, {"lo": fault.0, "hi": fault.1}]
            }],
            "delays": {"horizontal": {"family": "constant", "value": 1}, "vertical": {"family": "constant", "value": 1}},
            "boundary": {"z1": 2, "z2": 2, "horizontal": {"kind": "edge", "value": [1.0]}, "vertical": {"kind": "edge", "value": [1.0]}}
        });
        SwitchedModel::from_json_str(&doc.to_string()).unwrap()
    }

    #[test]
    fn affine_maps_reproduce_direct_assembly() {
        let p = FeasibilityProblem::new(SwitchedModel::paper_example(), 0.85, 0.2, 0.1).unwrap();
        let layout = p.layout();
        let maps = p.affine_maps().unwrap();
        let s = SynthesisSolution::paper_printed();
        let x = layout.encode(&s);
        let direct: Vec<Matrix> = (0..2).flat_map(|k| mode_constraints(&s, &p.model, k).unwrap()).map(|c| c.matrix.into_matrix()).collect();
        assert_eq!(direct.len(), maps.len());
        for (m, d) in maps.iter().zip(&direct) {
            assert!(m.eval(&x).max_abs_diff(d) < 1e-12, "{}", m.name);
        }
    }

    #[test]
    fn decoupled_stable_toy_is_feasible() {
        let p = FeasibilityProblem::new(toy(0.1, 1.0, 0.0, (1.0, 1.0)), 0.9, 0.2, 0.1).unwrap();
        let o = solve(&p).unwrap();
        let s = o.solution.expect("feasible");
        let r = crate::lmi::feasibility_report(&s, &p.model, crate::matrixcore::SYNTHESIS_MARGIN).unwrap();
        assert!(r.pass);
        assert_eq!(s.mu, Some(1.0));
        assert!(o.trace.t.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn unstabilizable_toy_is_infeasible() {
        let p = FeasibilityProblem::new(toy(2.0, 0.0, 0.0, (1.0, 1.0)), 0.5, 0.2, 0.1).unwrap();
        let o = solve(&p).unwrap();
        assert!(o.solution.is_none());
        assert!(o.best_t > 0.0);
        assert!(matches!(o.require(), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn solve_is_deterministic() {
        let p = FeasibilityProblem::new(toy(0.5, 1.0, 0.1, (0.8, 1.0)), 0.9, 0.2, 0.1).unwrap();
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn trace_csv_header() {
        let p = FeasibilityProblem::new(toy(0.1, 1.0, 0.0, (1.0, 1.0)), 0.9, 0.2, 0.1).unwrap();
        let o = solve(&p).unwrap();
        let mut buf = Vec::new();
        o.trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,t,step_norm\n0,"));
    }
}
