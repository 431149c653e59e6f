use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::BlockVariables;
use crate::matrixcore::Matrix;

/// Which delay setting the decision variables belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Interval time-varying delays d_L ≤ d(t) ≤ d_H.
    #[default]
    TimeVarying,
    /// Constant delays d_L = d_H; Q2, W2, Y, N, S are absent (kept at zero).
    ConstantDelay,
}

/// Barred decision variables of one mode plus its scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    #[serde(flatten)]
    pub vars: BlockVariables,
    #[serde(rename = "Upsilon")]
    pub upsilon: Matrix,
    pub delta: f64,
    pub epsilon: f64,
    /// K = Υ Z⁻¹ once recovered.
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSolution {
    #[serde(default)]
    pub formulation: Formulation,
    pub alpha: f64,
    /// Shared Z = diag{Z_h, Z_v}.
    #[serde(rename = "Z")]
    pub z: Matrix,
    pub modes: Vec<ModeSolution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_star: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

const PAPER_SOLUTION: &str = include_str!("../../data/paper_solution.json");

impl SynthesisSolution {
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn n1(&self) -> usize {
        self.modes.first().map_or(0, |m| m.vars.n1())
    }

    pub fn n2(&self) -> usize {
        self.modes.first().map_or(0, |m| m.vars.n2())
    }

    /// Z_h, Z_v.
    pub fn z_parts(&self) -> (Matrix, Matrix) {
        let (n1, n2) = (self.n1(), self.n2());
        (self.z.block(0, 0, n1, n1), self.z.block(n1, n1, n2, n2))
    }

    /// Shape checks against plant dimensions.
    pub fn validate(&self, n1: usize, n2: usize, nu: usize, n_modes: usize) -> Result<()> {
        let n = n1 + n2;
        if self.modes.len() != n_modes {
            return Err(Error::dim("solution.modes", n_modes, self.modes.len()));
        }
        if self.z.shape() != (n, n) {
            return Err(Error::dim("solution.Z", format!("{n}x{n}"), format!("{}x{}", self.z.rows(), self.z.cols())));
        }
        if self.z.block(0, n1, n1, n2).max_abs() != 0.0 || self.z.block(n1, 0, n2, n1).max_abs() != 0.0 {
            return Err(Error::config("solution.Z", "Z must be block diagonal diag{Z_h, Z_v}"));
        }
        for (k, m) in self.modes.iter().enumerate() {
            let path = format!("solution.modes[{k}]");
            m.vars.validate(n1, n2, &path)?;
            if m.upsilon.shape() != (nu, n) {
                return Err(Error::dim(format!("{path}.Upsilon"), format!("{nu}x{n}"), format!("{}x{}", m.upsilon.rows(), m.upsilon.cols())));
            }
            if !(m.delta > 0.0 && m.epsilon > 0.0) {
                return Err(Error::config(path, "delta and epsilon must be positive"));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::config(format!("line {} column {}", e.line(), e.column()), e.to_string()))
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    /// The printed two-mode solution of the bundled example, read as barred variables.
    pub fn paper_printed() -> Self {
        Self::from_json_str(PAPER_SOLUTION).expect("bundled solution is valid")
    }
}
