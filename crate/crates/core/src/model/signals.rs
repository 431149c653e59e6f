//! Named realization families: scalar signals over (i, j), integer delay functions and
//! uncertainty matrices. All are deterministic functions of their lattice arguments.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{Matrix, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wave {
    #[default]
    Sin,
    Cos,
}

impl Wave {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Wave::Sin => x.sin(),
            Wave::Cos => x.cos(),
        }
    }
}

fn lattice_rng(seed: u64, i: i64, j: i64) -> ChaCha8Rng {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for v in [i as u64, j as u64] {
        h = (h ^ v).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 31;
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Real-valued signal of the lattice point, used for actuator-effectiveness realizations.
/// Periodic families are functions of m = i + j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarSignal {
    Constant {
        value: f64,
    },
    /// offset + amplitude · wave(frequency · (i + j) + phase)
    Sinusoid {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        wave: Wave,
    },
    /// Uniform on [lo, hi], seeded per lattice point.
    Random { seed: u64, lo: f64, hi: f64 },
}

impl ScalarSignal {
    pub fn eval(&self, i: i64, j: i64) -> f64 {
        match self {
            ScalarSignal::Constant { value } => *value,
            ScalarSignal::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
                wave,
            } => offset + amplitude * wave.eval(frequency * (i + j) as f64 + phase),
            ScalarSignal::Random { seed, lo, hi } => {
                if hi <= lo {
                    return *lo;
                }
                lattice_rng(*seed, i, j).random_range(*lo..=*hi)
            }
        }
    }
}

/// Integer-valued delay realization d(t), t ≥ 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelayFunction {
    Constant {
        value: i64,
    },
    /// round(offset + amplitude · wave(frequency · t + phase))
    Sinusoid {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        wave: Wave,
    },
    /// Periodic table: d(t) = values[t mod len].
    Table { values: Vec<i64> },
    /// Uniform integer on [lo, hi], seeded per index.
    Random { seed: u64, lo: i64, hi: i64 },
}

impl DelayFunction {
    pub fn eval(&self, t: i64) -> i64 {
        match self {
            DelayFunction::Constant { value } => *value,
            DelayFunction::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
                wave,
            } => (offset + amplitude * wave.eval(frequency * t as f64 + phase)).round() as i64,
            DelayFunction::Table { values } => values[t.rem_euclid(values.len() as i64) as usize],
            DelayFunction::Random { seed, lo, hi } => {
                if hi <= lo {
                    return *lo;
                }
                lattice_rng(*seed, t, -1).random_range(*lo..=*hi)
            }
        }
    }

    /// (min, max) of d(t) over t in [0, len); exhaustive.
    pub fn scan_bounds(&self, len: i64) -> Result<(i64, i64)> {
        if let DelayFunction::Table { values } = self {
            if values.is_empty() {
                return Err(Error::config("delays", "empty delay table"));
            }
        }
        let len = match self {
            DelayFunction::Constant { .. } => 1,
            DelayFunction::Table { values } => values.len() as i64,
            _ => len.max(1),
        };
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        for t in 0..len {
            let d = self.eval(t);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        Ok((lo, hi))
    }
}

/// Generator of the norm-bounded uncertainty F(i, j) ∈ R^{p×q}.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum UncertaintyFamily {
    #[default]
    Zero,
    Constant { matrix: Matrix },
    /// wave(frequency · (i + j) + phase) times the rectangular identity.
    SinusoidalDiagonal {
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        wave: Wave,
    },
    /// Entries uniform on [−1, 1], seeded per lattice point, then spectrally clipped.
    Random { seed: u64 },
}

impl UncertaintyFamily {
    /// F(i, j), scaled down when needed so that ‖F‖₂ ≤ 1.
    pub fn eval(&self, p: usize, q: usize, i: i64, j: i64) -> Result<Matrix> {
        let f = match self {
            UncertaintyFamily::Zero => return Ok(Matrix::zeros(p, q)),
            UncertaintyFamily::Constant { matrix } => {
                if matrix.shape() != (p, q) {
                    return Err(Error::dim("uncertainty constant", format!("{p}x{q}"), format!("{}x{}", matrix.rows(), matrix.cols())));
                }
                matrix.clone()
            }
            UncertaintyFamily::SinusoidalDiagonal { frequency, phase, wave } => {
                Matrix::eye(p, q).scale(wave.eval(frequency * (i + j) as f64 + phase))
            }
            UncertaintyFamily::Random { seed } => {
                let mut rng = lattice_rng(*seed, i, j);
                Matrix::from_fn(p, q, |_, _| rng.random_range(-1.0..=1.0))
            }
        };
        clip_spectral(f)
    }
}

/// Scale F so that its spectral norm is at most one.
pub fn clip_spectral(f: Matrix) -> Result<Matrix> {
    if f.rows() == 0 || f.cols() == 0 {
        return Ok(f);
    }
    let ftf = SymMatrix::symmetrize(&(&f.transpose() * &f))?;
    let smax = ftf.eigvals()?.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    if smax > 1.0 {
        Ok(f.scale(1.0 / smax))
    } else {
        Ok(f)
    }
}
