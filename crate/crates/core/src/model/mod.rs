//! Plant data: per-mode matrices, uncertainty and fault realizations, delays, boundary
//! conditions and switching signals.

mod fault;
mod signals;
mod switching;

use serde::{Deserialize, Serialize};

pub use fault::{derive_fault_stats, sample_fault_matrix, FaultBounds, FaultSample, FaultStats};
pub use signals::{clip_spectral, DelayFunction, ScalarSignal, UncertaintyFamily, Wave};
pub use switching::{count_switches, generate_dwell_switching, SwitchPattern, SwitchingSignal};

use crate::error::{Error, Result};
use crate::matrixcore::Matrix;

/// Number of indices scanned when deriving delay bounds from a non-tabulated family.
pub const DELAY_SCAN_LEN: i64 = 4096;

const PAPER_EXAMPLE: &str = include_str!("../../data/paper_example.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    /// horizontal state dimension
    pub n1: usize,
    /// vertical state dimension
    pub n2: usize,
    /// inputs
    pub nu: usize,
    /// columns of H
    pub p: usize,
    /// rows of E and E_d
    pub q: usize,
}

impl Dims {
    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeMatrices {
    #[serde(rename = "A")]
    pub a: Matrix,
    #[serde(rename = "A_d")]
    pub a_d: Matrix,
    #[serde(rename = "B")]
    pub b: Matrix,
    #[serde(rename = "H")]
    pub h: Matrix,
    #[serde(rename = "E")]
    pub e: Matrix,
    #[serde(rename = "E_d")]
    pub e_d: Matrix,
}

impl ModeMatrices {
    pub fn validate(&self, dims: &Dims, path: &str) -> Result<()> {
        let n = dims.n();
        let checks = [
            ("A", &self.a, (n, n)),
            ("A_d", &self.a_d, (n, n)),
            ("B", &self.b, (n, dims.nu)),
            ("H", &self.h, (n, dims.p)),
            ("E", &self.e, (dims.q, n)),
            ("E_d", &self.e_d, (dims.q, n)),
        ];
        for (name, m, want) in checks {
            if m.shape() != want {
                return Err(Error::dim(
                    format!("{path}.{name}"),
                    format!("{}x{}", want.0, want.1),
                    format!("{}x{}", m.rows(), m.cols()),
                ));
            }
            if !m.is_finite() {
                return Err(Error::config(format!("{path}.{name}"), "non-finite entry"));
            }
        }
        Ok(())
    }

    /// (Â, Â_d) = (A + H F E, A_d + H F E_d) for a given F.
    pub fn uncertain(&self, f: &Matrix) -> (Matrix, Matrix) {
        let hf = &self.h * f;
        (&self.a + &(&hf * &self.e), &self.a_d + &(&hf * &self.e_d))
    }
}

/// Per-mode plant description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    #[serde(flatten)]
    pub matrices: ModeMatrices,
    pub fault_bounds: Vec<FaultBounds>,
    /// Per-channel effectiveness realization; defaults to the channel midpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault_realization: Option<Vec<ScalarSignal>>,
    #[serde(default)]
    pub uncertainty: UncertaintyFamily,
}

impl ModeSpec {
    pub fn fault_stats(&self) -> Result<FaultStats> {
        derive_fault_stats(&self.fault_bounds)
    }

    pub fn fault_signals(&self) -> Vec<ScalarSignal> {
        match &self.fault_realization {
            Some(v) => v.clone(),
            None => self
                .fault_bounds
                .iter()
                .map(|b| ScalarSignal::Constant { value: b.midpoint() })
                .collect(),
        }
    }
}

/// (Â, Â_d) for `mode` at lattice point (i, j).
pub fn sample_uncertain_matrices(mode: &ModeSpec, dims: &Dims, i: i64, j: i64) -> Result<(Matrix, Matrix)> {
    let f = mode.uncertainty.eval(dims.p, dims.q, i, j)?;
    Ok(mode.matrices.uncertain(&f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayBounds {
    pub h_lo: i64,
    pub h_hi: i64,
    pub v_lo: i64,
    pub v_hi: i64,
}

impl DelayBounds {
    pub fn new(h_lo: i64, h_hi: i64, v_lo: i64, v_hi: i64) -> Self {
        DelayBounds { h_lo, h_hi, v_lo, v_hi }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_lo < 0 || self.v_lo < 0 {
            return Err(Error::DelayOrder(format!("negative lower bound in {self:?}")));
        }
        if self.h_hi < self.h_lo || self.v_hi < self.v_lo {
            return Err(Error::DelayOrder(format!("upper below lower in {self:?}")));
        }
        Ok(())
    }

    pub fn is_constant(&self) -> bool {
        self.h_lo == self.h_hi && self.v_lo == self.v_hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySpec {
    pub horizontal: DelayFunction,
    pub vertical: DelayFunction,
    /// Declared bounds; derived by scanning the realizations when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<DelayBounds>,
}

impl DelaySpec {
    /// Bounds after validation. Panics if called on an unvalidated spec.
    pub fn bounds(&self) -> DelayBounds {
        self.bounds.expect("delay bounds resolved during validation")
    }

    fn resolve(&mut self) -> Result<()> {
        let (h_lo, h_hi) = self.horizontal.scan_bounds(DELAY_SCAN_LEN)?;
        let (v_lo, v_hi) = self.vertical.scan_bounds(DELAY_SCAN_LEN)?;
        let scanned = DelayBounds::new(h_lo, h_hi, v_lo, v_hi);
        scanned.validate()?;
        match self.bounds {
            None => self.bounds = Some(scanned),
            Some(b) => {
                b.validate()?;
                if h_lo < b.h_lo || h_hi > b.h_hi || v_lo < b.v_lo || v_hi > b.v_hi {
                    return Err(Error::config(
                        "delays.bounds",
                        format!("realizations span {scanned:?}, outside declared {b:?}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Boundary values on one edge window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryValues {
    /// `value` on the edge itself (i = 0 for x^h, j = 0 for x^v); zero history.
    Edge { value: Vec<f64> },
    /// `value` on the whole window including history.
    Uniform { value: Vec<f64> },
    /// Explicit entries; unlisted points are zero.
    Table { entries: Vec<BoundaryEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryEntry {
    pub i: i64,
    pub j: i64,
    pub value: Vec<f64>,
}

/// x^h on {−d_hH ≤ i ≤ 0, 0 ≤ j ≤ z1}, x^v on {0 ≤ i ≤ z2, −d_vH ≤ j ≤ 0}; zero beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConditions {
    pub z1: i64,
    pub z2: i64,
    pub horizontal: BoundaryValues,
    pub vertical: BoundaryValues,
}

impl BoundaryConditions {
    /// x^h(i, j) for i ≤ 0, j ≥ 0.
    pub fn horizontal_at(&self, i: i64, j: i64, n1: usize) -> Vec<f64> {
        if j > self.z1 || j < 0 || i > 0 {
            return vec![0.0; n1];
        }
        eval_window(&self.horizontal, i == 0, i, j, n1)
    }

    /// x^v(i, j) for i ≥ 0, j ≤ 0.
    pub fn vertical_at(&self, i: i64, j: i64, n2: usize) -> Vec<f64> {
        if i > self.z2 || i < 0 || j > 0 {
            return vec![0.0; n2];
        }
        eval_window(&self.vertical, j == 0, i, j, n2)
    }

    /// Largest boundary diagonal index carrying data: beyond it, V^h(0, D) = V^v(D, 0) = 0.
    pub fn support_end(&self) -> i64 {
        self.z1.max(self.z2)
    }

    fn validate(&self, dims: &Dims, bounds: &DelayBounds) -> Result<()> {
        if self.z1 < 1 || self.z2 < 1 {
            return Err(Error::config("boundary", "z1 and z2 must be positive"));
        }
        let check = |vals: &BoundaryValues, path: &str, dim: usize, horizontal: bool| -> Result<()> {
            let check_len = |v: &Vec<f64>, p: String| -> Result<()> {
                if v.len() != dim {
                    return Err(Error::dim(p, dim, v.len()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::config(p, "non-finite boundary value"));
                }
                Ok(())
            };
            match vals {
                BoundaryValues::Edge { value } | BoundaryValues::Uniform { value } => check_len(value, format!("{path}.value")),
                BoundaryValues::Table { entries } => {
                    for (k, e) in entries.iter().enumerate() {
                        let p = format!("{path}.entries[{k}]");
                        check_len(&e.value, format!("{p}.value"))?;
                        let inside = if horizontal {
                            (-bounds.h_hi..=0).contains(&e.i) && (0..=self.z1).contains(&e.j)
                        } else {
                            (0..=self.z2).contains(&e.i) && (-bounds.v_hi..=0).contains(&e.j)
                        };
                        if !inside {
                            return Err(Error::config(p, format!("point ({}, {}) outside the boundary window", e.i, e.j)));
                        }
                    }
                    Ok(())
                }
            }
        };
        check(&self.horizontal, "boundary.horizontal", dims.n1, true)?;
        check(&self.vertical, "boundary.vertical", dims.n2, false)
    }
}

fn eval_window(vals: &BoundaryValues, on_edge: bool, i: i64, j: i64, dim: usize) -> Vec<f64> {
    match vals {
        BoundaryValues::Edge { value } => {
            if on_edge {
                value.clone()
            } else {
                vec![0.0; dim]
            }
        }
        BoundaryValues::Uniform { value } => value.clone(),
        BoundaryValues::Table { entries } => entries
            .iter()
            .find(|e| e.i == i && e.j == j)
            .map(|e| e.value.clone())
            .unwrap_or_else(|| vec![0.0; dim]),
    }
}

/// Complete, validated switched plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchedModel {
    #[serde(default)]
    pub name: String,
    pub dims: Dims,
    pub modes: Vec<ModeSpec>,
    pub delays: DelaySpec,
    pub boundary: BoundaryConditions,
}

impl SwitchedModel {
    /// Enforce every model invariant and resolve derived data (delay bounds).
    pub fn validate(mut self) -> Result<Self> {
        if self.dims.n1 == 0 || self.dims.n2 == 0 {
            return Err(Error::config("dims", "n1 and n2 must be positive"));
        }
        if self.modes.is_empty() {
            return Err(Error::config("modes", "at least one mode is required"));
        }
        for (k, m) in self.modes.iter().enumerate() {
            let path = format!("modes[{k}]");
            m.matrices.validate(&self.dims, &path)?;
            if m.fault_bounds.len() != self.dims.nu {
                return Err(Error::dim(format!("{path}.fault_bounds"), self.dims.nu, m.fault_bounds.len()));
            }
            for (l, b) in m.fault_bounds.iter().enumerate() {
                b.validate()
                    .map_err(|e| Error::config(format!("{path}.fault_bounds[{l}]"), e.to_string()))?;
            }
            if let Some(r) = &m.fault_realization {
                if r.len() != self.dims.nu {
                    return Err(Error::dim(format!("{path}.fault_realization"), self.dims.nu, r.len()));
                }
            }
            if let UncertaintyFamily::Constant { matrix } = &m.uncertainty {
                if matrix.shape() != (self.dims.p, self.dims.q) {
                    return Err(Error::dim(
                        format!("{path}.uncertainty.matrix"),
                        format!("{}x{}", self.dims.p, self.dims.q),
                        format!("{}x{}", matrix.rows(), matrix.cols()),
                    ));
                }
            }
        }
        self.delays
            .resolve()
            .map_err(|e| match e {
                Error::Config { .. } | Error::DelayOrder(_) => e,
                other => Error::config("delays", other.to_string()),
            })?;
        self.boundary.validate(&self.dims, &self.delays.bounds())?;
        Ok(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: SwitchedModel = serde_json::from_str(s).map_err(|e| Error::config(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        raw.validate()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The bundled two-mode numerical example.
    pub fn paper_example() -> Self {
        SwitchedModel::from_json_str(PAPER_EXAMPLE).expect("bundled example is valid")
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn delay_bounds(&self) -> DelayBounds {
        self.delays.bounds()
    }

    pub fn fault_stats(&self) -> Result<Vec<FaultStats>> {
        self.modes.iter().map(ModeSpec::fault_stats).collect()
    }

    /// Same plant with its actuators removed (B = 0): the open loop.
    pub fn with_modes(&self, modes: Vec<ModeSpec>) -> Self {
        SwitchedModel { modes, ..self.clone() }
    }

    /// Same plant with seeded random delays, uncertainty and fault realizations, each
    /// drawn inside the declared bounds.
    pub fn random_scenario(&self, seed: u64) -> Result<Self> {
        let b = self.delay_bounds();
        let sub = |k: u64| seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k);
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let base = 16 * (k as u64 + 1);
                ModeSpec {
                    fault_realization: Some(
                        m.fault_bounds
                            .iter()
                            .enumerate()
                            .map(|(l, fb)| ScalarSignal::Random {
                                seed: sub(base + l as u64),
                                lo: fb.lo,
                                hi: fb.hi,
                            })
                            .collect(),
                    ),
                    uncertainty: UncertaintyFamily::Random { seed: sub(base + 15) },
                    ..m.clone()
                }
            })
            .collect();
        let out = SwitchedModel {
            modes,
            delays: DelaySpec {
                horizontal: DelayFunction::Random {
                    seed: sub(1),
                    lo: b.h_lo,
                    hi: b.h_hi,
                },
                vertical: DelayFunction::Random {
                    seed: sub(2),
                    lo: b.v_lo,
                    hi: b.v_hi,
                },
                bounds: Some(b),
            },
            ..self.clone()
        };
        out.validate()
    }

    /// Apply the state-space similarity x ↦ T x (T = diag{T_h, T_v} invertible).
    pub fn transformed(&self, t: &Matrix) -> Result<Self> {
        let tinv = t.inverse()?;
        let modes = self
            .modes
            .iter()
            .map(|m| {
                let mm = &m.matrices;
                ModeSpec {
                    matrices: ModeMatrices {
                        a: &(t * &mm.a) * &tinv,
                        a_d: &(t * &mm.a_d) * &tinv,
                        b: t * &mm.b,
                        h: t * &mm.h,
                        e: &mm.e * &tinv,
                        e_d: &mm.e_d * &tinv,
                    },
                    ..m.clone()
                }
            })
            .collect();
        Ok(self.with_modes(modes))
    }
}
