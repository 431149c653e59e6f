use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::Matrix;
use crate::model::signals::ScalarSignal;

/// Slack allowed when checking a realization against its bounds.
const BOUND_TOL: f64 = 1e-12;

/// Effectiveness bounds ω_L ≤ ω ≤ ω_H of one actuator channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultBounds {
    pub lo: f64,
    pub hi: f64,
}

impl FaultBounds {
    pub fn new(lo: f64, hi: f64) -> Self {
        FaultBounds { lo, hi }
    }

    /// ω̃ = (ω_L + ω_H)/2
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// ξ = (ω_H − ω_L)/(ω_H + ω_L); zero for a stuck-off channel.
    pub fn xi(&self) -> f64 {
        let s = self.lo + self.hi;
        if s == 0.0 {
            0.0
        } else {
            (self.hi - self.lo) / s
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo < 0.0 || self.lo > self.hi {
            return Err(Error::InvalidFaultBounds(format!("need 0 <= lo <= hi, got [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }
}

/// Ω0 = diag(ω̃_l) and Ξ = diag(ξ_l) for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultStats {
    pub omega0: Matrix,
    pub xi: Matrix,
}

pub fn derive_fault_stats(bounds: &[FaultBounds]) -> Result<FaultStats> {
    for b in bounds {
        b.validate()?;
    }
    Ok(FaultStats {
        omega0: Matrix::diag(&bounds.iter().map(FaultBounds::midpoint).collect::<Vec<_>>()),
        xi: Matrix::diag(&bounds.iter().map(FaultBounds::xi).collect::<Vec<_>>()),
    })
}

/// One sampled fault matrix Ω = Ω0 (I + Θ).
#[derive(Debug, Clone, PartialEq)]
pub struct FaultSample {
    pub omega: Matrix,
    pub theta: Matrix,
}

/// Evaluate the per-channel effectiveness realization at (i, j) and decompose it.
pub fn sample_fault_matrix(
    bounds: &[FaultBounds],
    realization: &[ScalarSignal],
    mode: usize,
    i: i64,
    j: i64,
) -> Result<FaultSample> {
    if realization.len() != bounds.len() {
        return Err(Error::dim(format!("fault realization of mode {}", mode + 1), bounds.len(), realization.len()));
    }
    let nu = bounds.len();
    let mut omega = Matrix::zeros(nu, nu);
    let mut theta = Matrix::zeros(nu, nu);
    for (l, (b, sig)) in bounds.iter().zip(realization).enumerate() {
        let w = sig.eval(i, j);
        if !w.is_finite() || w < b.lo - BOUND_TOL || w > b.hi + BOUND_TOL {
            return Err(Error::FaultOutOfRange {
                mode: mode + 1,
                channel: l + 1,
                value: w,
                lo: b.lo,
                hi: b.hi,
                i,
                j,
            });
        }
        let mid = b.midpoint();
        omega[(l, l)] = w;
        theta[(l, l)] = if mid == 0.0 { 0.0 } else { (w - mid) / mid };
    }
    Ok(FaultSample { omega, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn paper_channel_stats() {
        let s = derive_fault_stats(&[FaultBounds::new(0.4, 0.5), FaultBounds::new(0.5, 0.6), FaultBounds::new(1.0, 1.0)]).unwrap();
        assert!((s.omega0[(0, 0)] - 0.45).abs() < 1e-15);
        assert!((s.xi[(0, 0)] - 0.1 / 0.9).abs() < 1e-15);
        assert!((s.omega0[(1, 1)] - 0.55).abs() < 1e-15);
        assert!((s.xi[(1, 1)] - 0.1 / 1.1).abs() < 1e-15);
        assert_eq!((s.omega0[(2, 2)], s.xi[(2, 2)]), (1.0, 0.0));
    }

    #[test]
    fn stuck_off_channel_is_zero() {
        let s = derive_fault_stats(&[FaultBounds::new(0.0, 0.0)]).unwrap();
        assert_eq!((s.omega0[(0, 0)], s.xi[(0, 0)]), (0.0, 0.0));
        assert!(derive_fault_stats(&[FaultBounds::new(0.5, 0.4)]).is_err());
    }

    #[test]
    fn paper_realization_at_m1() {
        let b = [FaultBounds::new(0.4, 0.5)];
        let sig = [ScalarSignal::Sinusoid {
            offset: 0.45,
            amplitude: 0.05,
            frequency: FRAC_PI_2,
            phase: 0.0,
            wave: Default::default(),
        }];
        let s = sample_fault_matrix(&b, &sig, 0, 1, 0).unwrap();
        assert!((s.omega[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((s.theta[(0, 0)] - 0.1 / 0.9).abs() < 1e-12);
    }

    #[test]
    fn midpoint_gives_zero_theta_and_out_of_range_fails() {
        let b = [FaultBounds::new(0.4, 0.5)];
        let s = sample_fault_matrix(&b, &[ScalarSignal::Constant { value: 0.45 }], 0, 3, 3).unwrap();
        assert_eq!(s.theta[(0, 0)], 0.0);
        let e = sample_fault_matrix(&b, &[ScalarSignal::Constant { value: 0.39 }], 0, 0, 0);
        assert!(matches!(e, Err(Error::FaultOutOfRange { .. })));
    }
}
