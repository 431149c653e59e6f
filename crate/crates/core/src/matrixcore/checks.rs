use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{BlockLayout, Matrix, SymMatrix};

/// Default margin for analysis-side definiteness tests.
pub const ANALYSIS_MARGIN: f64 = 1e-9;
/// Default margin for accepting synthesized solutions.
pub const SYNTHESIS_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Definiteness {
    /// λ_min > margin
    PD,
    /// λ_min ≥ −margin
    PSD,
    /// λ_max < −margin
    ND,
    /// λ_max ≤ margin
    NSD,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessReport {
    pub holds: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl DefinitenessReport {
    /// How far inside the requested cone the matrix sits (negative when violated).
    pub fn slack(&self, kind: Definiteness) -> f64 {
        match kind {
            Definiteness::PD | Definiteness::PSD => self.lambda_min,
            Definiteness::ND | Definiteness::NSD => -self.lambda_max,
        }
    }
}

pub fn check_definiteness(s: &SymMatrix, kind: Definiteness, margin: f64) -> Result<DefinitenessReport> {
    if !(margin >= 0.0) {
        return Err(Error::InvalidMatrix(format!("margin must be nonnegative, got {margin}")));
    }
    let ev = s.eigvals()?;
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let holds = match kind {
        Definiteness::PD => lo > margin,
        Definiteness::PSD => lo >= -margin,
        Definiteness::ND => hi < -margin,
        Definiteness::NSD => hi <= margin,
    };
    Ok(DefinitenessReport {
        holds,
        lambda_min: lo,
        lambda_max: hi,
    })
}

/// Outcome of testing the three equivalent negativity conditions of a 2x2 block matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchurReport {
    /// S ≺ 0
    pub full_nd: bool,
    /// S11 ≺ 0 and S22 − S12ᵀ S11⁻¹ S12 ≺ 0
    pub cond_ii: bool,
    /// S22 ≺ 0 and S11 − S12 S22⁻¹ S12ᵀ ≺ 0
    pub cond_iii: bool,
}

impl SchurReport {
    pub fn consistent(&self) -> bool {
        self.full_nd == self.cond_ii && self.full_nd == self.cond_iii
    }
}

pub fn schur_equivalence_check(s11: &SymMatrix, s12: &Matrix, s22: &SymMatrix) -> Result<SchurReport> {
    if s12.rows() != s11.order() || s12.cols() != s22.order() {
        return Err(Error::dim(
            "schur S12",
            format!("{}x{}", s11.order(), s22.order()),
            format!("{}x{}", s12.rows(), s12.cols()),
        ));
    }
    let mut layout = BlockLayout::symmetric(&[s11.order(), s22.order()]);
    layout.set(0, 0, s11.matrix().clone())?;
    layout.set(0, 1, s12.clone())?;
    layout.set(1, 1, s22.matrix().clone())?;
    let full = layout.assemble_symmetric()?;
    let nd = |m: &SymMatrix| -> Result<bool> { Ok(check_definiteness(m, Definiteness::ND, 0.0)?.holds) };

    let s11_inv = s11.inverse()?;
    let s22_inv = s22.inverse()?;
    let comp22 = SymMatrix::symmetrize(&(s22.matrix() - &(&(&s12.transpose() * &s11_inv) * s12)))?;
    let comp11 = SymMatrix::symmetrize(&(s11.matrix() - &(&(s12 * &s22_inv) * &s12.transpose())))?;
    Ok(SchurReport {
        full_nd: nd(&full)?,
        cond_ii: nd(s11)? && nd(&comp22)?,
        cond_iii: nd(s22)? && nd(&comp11)?,
    })
}

/// Tᵀ S T, symmetrized.
pub fn congruence(s: &SymMatrix, t: &Matrix) -> Result<SymMatrix> {
    if t.rows() != s.order() {
        return Err(Error::dim("congruence T rows", s.order(), t.rows()));
    }
    let prod = &(&t.transpose() * s.matrix()) * t;
    SymMatrix::symmetrize(&prod)
}
