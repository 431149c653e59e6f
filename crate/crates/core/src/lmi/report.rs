use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lmi::assembly::{assemble_for, LmiBlocks};
use crate::lmi::solution::{Formulation, SynthesisSolution};
use crate::matrixcore::{check_definiteness, Definiteness, DefinitenessReport, Matrix, SymMatrix, SINGULAR_CONDITION};
use crate::model::SwitchedModel;

/// A named block that must be positive definite.
#[derive(Debug, Clone)]
pub struct PdBlock {
    pub name: String,
    pub matrix: SymMatrix,
}

/// Names of the Ψ̄ parts, in assembly order.
pub fn psi_names(formulation: Formulation) -> &'static [&'static str] {
    match formulation {
        Formulation::TimeVarying => &["Psi1h", "Psi2h", "Psi3h", "Psi1v", "Psi2v", "Psi3v"],
        Formulation::ConstantDelay => &["Psi1h", "Psi1v"],
    }
}

/// Barred SPD sub-blocks of one mode.
pub fn spd_blocks(solution: &SynthesisSolution, k: usize) -> Result<Vec<PdBlock>> {
    let v = &solution.modes[k].vars;
    let fams: Vec<(&str, &Matrix)> = match solution.formulation {
        Formulation::TimeVarying => vec![("P", &v.p), ("Q1", &v.q1), ("Q2", &v.q2), ("W1", &v.w1), ("W2", &v.w2)],
        Formulation::ConstantDelay => vec![("P", &v.p), ("Q1", &v.q1), ("W1", &v.w1)],
    };
    let mut out = Vec::with_capacity(2 * fams.len());
    for (name, m) in fams {
        let (h, vv) = v.split(m);
        out.push(PdBlock {
            name: format!("{name}h"),
            matrix: SymMatrix::symmetrize(&h)?,
        });
        out.push(PdBlock {
            name: format!("{name}v"),
            matrix: SymMatrix::symmetrize(&vv)?,
        });
    }
    Ok(out)
}

/// Every block of mode k written as "≻ 0": −Φ̄, the Ψ̄ parts and the SPD sub-blocks.
pub fn mode_constraints(solution: &SynthesisSolution, model: &SwitchedModel, k: usize) -> Result<Vec<PdBlock>> {
    let LmiBlocks { phi, psi } = assemble_for(solution, model, k)?;
    let mut out = vec![PdBlock {
        name: "-Phi".into(),
        matrix: SymMatrix::symmetrize(&-phi.matrix.matrix())?,
    }];
    for (name, p) in psi_names(solution.formulation).iter().zip(psi) {
        out.push(PdBlock {
            name: (*name).into(),
            matrix: p,
        });
    }
    out.extend(spd_blocks(solution, k)?);
    Ok(out)
}

/// Eigen-extremes of one inequality and whether it holds at the margin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockRecord {
    pub name: String,
    pub kind: Definiteness,
    pub report: DefinitenessReport,
}

impl BlockRecord {
    pub fn slack(&self) -> f64 {
        self.report.slack(self.kind)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeFeasibility {
    pub mode: usize,
    pub blocks: Vec<BlockRecord>,
    pub pass: bool,
}

impl ModeFeasibility {
    pub fn worst(&self) -> Option<&BlockRecord> {
        self.blocks.iter().min_by(|a, b| a.slack().total_cmp(&b.slack()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub margin: f64,
    pub modes: Vec<ModeFeasibility>,
    /// ‖Z‖₁‖Z⁻¹‖₁, infinite when Z is singular.
    pub z_condition: f64,
    pub z_ok: bool,
    pub pass: bool,
}

impl FeasibilityReport {
    /// Smallest slack over all blocks and modes (negative when something fails).
    pub fn worst_slack(&self) -> f64 {
        self.modes
            .iter()
            .flat_map(|m| m.blocks.iter().map(BlockRecord::slack))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Φ̄ ≺ −margin·I, Ψ̄ ⪰ −margin·I, SPD blocks ≻ margin·I, Z well conditioned.
pub fn feasibility_report(solution: &SynthesisSolution, model: &SwitchedModel, margin: f64) -> Result<FeasibilityReport> {
    let z_condition = match solution.z.inverse() {
        Ok(zi) => solution.z.norm1() * zi.norm1(),
        Err(_) => f64::INFINITY,
    };
    let z_ok = z_condition < SINGULAR_CONDITION;
    let mut modes = Vec::with_capacity(solution.n_modes());
    for k in 0..solution.n_modes() {
        let mut blocks = Vec::new();
        for c in mode_constraints(solution, model, k)? {
            // −Φ̄ ≻ margin is Φ̄ ≺ −margin; Ψ̄ only needs ⪰ −margin.
            let kind = if c.name.starts_with("Psi") { Definiteness::PSD } else { Definiteness::PD };
            let report = check_definiteness(&c.matrix, kind, margin)?;
            blocks.push(BlockRecord { name: c.name, kind, report });
        }
        let pass = blocks.iter().all(|b| b.report.holds);
        modes.push(ModeFeasibility { mode: k + 1, blocks, pass });
    }
    let pass = z_ok && modes.iter().all(|m| m.pass);
    Ok(FeasibilityReport {
        margin,
        modes,
        z_condition,
        z_ok,
        pass,
    })
}
