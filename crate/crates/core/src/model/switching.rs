use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How switch instants are placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case")]
pub enum SwitchPattern {
    /// Switch every ⌈τ_a⌉ steps, cycling through the modes.
    RoundRobin,
    /// Given instants; modes cycle 1, 2, …, N, 1, …
    Explicit { instants: Vec<i64> },
}

/// Piecewise-constant mode schedule over the anti-diagonal index m = i + j.
/// `modes[κ]` is active on [m_κ, m_{κ+1}) with m_0 = −∞; modes are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingSignal {
    pub instants: Vec<i64>,
    pub modes: Vec<usize>,
    pub tau_a: f64,
    pub n0: f64,
    pub horizon: i64,
}

impl SwitchingSignal {
    /// A single mode for all m.
    pub fn constant(mode: usize, horizon: i64) -> Self {
        SwitchingSignal {
            instants: Vec::new(),
            modes: vec![mode],
            tau_a: f64::INFINITY,
            n0: 0.0,
            horizon,
        }
    }

    pub fn mode_at(&self, m: i64) -> usize {
        let k = self.instants.partition_point(|&s| s <= m);
        self.modes[k]
    }

    pub fn is_switch(&self, m: i64) -> bool {
        self.instants.binary_search(&m).is_ok()
    }

    /// Worst (count − bound) over all z ≤ D in [0, horizon]; nonpositive iff (14) holds.
    pub fn dwell_violation(&self) -> Option<Error> {
        for z in 0..=self.horizon {
            for d in z..=self.horizon {
                let count = count_switches(self, z, d);
                let bound = self.n0 + (d - z) as f64 / self.tau_a;
                if count as f64 > bound + 1e-12 {
                    return Some(Error::DwellTimeViolation { z, d, count, bound });
                }
            }
        }
        None
    }
}

/// N_σ(z, D): number of switch instants in the open interval (z, D).
pub fn count_switches(signal: &SwitchingSignal, z: i64, d: i64) -> usize {
    if d <= z + 1 {
        return 0;
    }
    let lo = signal.instants.partition_point(|&s| s <= z);
    let hi = signal.instants.partition_point(|&s| s < d);
    hi.saturating_sub(lo)
}

/// Build a switching signal and verify the average-dwell-time condition on [0, horizon].
pub fn generate_dwell_switching(
    n_modes: usize,
    tau_a: f64,
    n0: f64,
    horizon: i64,
    pattern: &SwitchPattern,
) -> Result<SwitchingSignal> {
    if n_modes == 0 {
        return Err(Error::IncompleteModel("no modes".into()));
    }
    if !(tau_a > 0.0) {
        return Err(Error::config("tau_a", format!("must be positive, got {tau_a}")));
    }
    if !(n0 >= 0.0) {
        return Err(Error::config("n0", format!("must be nonnegative, got {n0}")));
    }
    let instants: Vec<i64> = if n_modes == 1 {
        Vec::new()
    } else {
        match pattern {
            SwitchPattern::RoundRobin => {
                let period = tau_a.ceil().max(1.0);
                if period > horizon as f64 {
                    Vec::new()
                } else {
                    let p = period as i64;
                    (1..).map(|k| k * p).take_while(|&m| m < horizon).collect()
                }
            }
            SwitchPattern::Explicit { instants } => {
                if instants.windows(2).any(|w| w[0] >= w[1]) || instants.first().is_some_and(|&m| m < 1) {
                    return Err(Error::config("instants", "switch instants must be strictly increasing and positive"));
                }
                instants.clone()
            }
        }
    };
    let modes = (0..=instants.len()).map(|k| k % n_modes).collect();
    let signal = SwitchingSignal {
        instants,
        modes,
        tau_a,
        n0,
        horizon,
    };
    match signal.dwell_violation() {
        Some(e) => Err(e),
        None => Ok(signal),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_example() {
        let s = generate_dwell_switching(2, 7.5, 1.0, 40, &SwitchPattern::RoundRobin).unwrap();
        assert_eq!(s.instants, vec![8, 16, 24, 32]);
        assert_eq!(s.mode_at(0), 0);
        assert_eq!(s.mode_at(7), 0);
        assert_eq!(s.mode_at(8), 1);
        assert_eq!(s.mode_at(16), 0);
    }

    #[test]
    fn count_examples() {
        let s = generate_dwell_switching(2, 7.5, 1.0, 40, &SwitchPattern::RoundRobin).unwrap();
        assert_eq!(count_switches(&s, 0, 20), 2);
        assert_eq!(count_switches(&s, 8, 8), 0);
        assert_eq!(count_switches(&s, 7, 9), 1);
        assert_eq!(count_switches(&s, 8, 16), 0);
    }

    #[test]
    fn single_mode_never_switches() {
        let s = generate_dwell_switching(1, 0.5, 0.0, 40, &SwitchPattern::RoundRobin).unwrap();
        assert!(s.instants.is_empty());
    }

    #[test]
    fn chattering_explicit_instants_rejected() {
        let e = generate_dwell_switching(2, 7.5, 0.0, 10, &SwitchPattern::Explicit { instants: vec![1, 2, 3] });
        assert!(matches!(e, Err(Error::DwellTimeViolation { .. })));
        let e = generate_dwell_switching(2, 7.5, 0.0, 10, &SwitchPattern::Explicit { instants: vec![3, 2] });
        assert!(matches!(e, Err(Error::Config { .. })));
    }
}
