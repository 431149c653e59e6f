use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lmi::{assemble_closed_loop_analysis, feasibility_report, mu_and_tau, recover_gains, unbar_certificate, FeasibilityReport, SynthesisSolution};
use crate::matrixcore::{check_definiteness, Definiteness, Matrix, ANALYSIS_MARGIN, SYNTHESIS_MARGIN};
use crate::model::SwitchedModel;

/// One closed-loop realization checked against the un-barred certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub mode: usize,
    pub realization: String,
    /// λ_max(Φ); must be < −margin.
    pub phi_max: f64,
    /// Smallest λ_min over the Ψ parts; must be ≥ −margin.
    pub psi_min: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifyReport {
    pub feasibility: FeasibilityReport,
    pub gains: Vec<Matrix>,
    pub analysis: Vec<AnalysisRecord>,
    /// Set when the certificate could not be formed (singular Z or W̄).
    pub analysis_error: Option<String>,
    pub mu: Option<f64>,
    pub tau_star: Option<f64>,
    pub pass: bool,
}

impl CertifyReport {
    pub fn analysis_pass(&self) -> bool {
        self.analysis_error.is_none() && !self.analysis.is_empty() && self.analysis.iter().all(|r| r.pass)
    }

    /// Largest λ_max(Φ) over all realizations.
    pub fn worst_phi(&self) -> f64 {
        self.analysis.iter().map(|r| r.phi_max).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Closed-loop (A, A_d) of mode k at the vertex realizations F ∈ {0, ±I}, Θ ∈ {0, ±Ξ sign patterns}.
pub fn analysis_vertices(model: &SwitchedModel, k: usize, gain: &Matrix) -> Result<Vec<(String, Matrix, Matrix)>> {
    let mode = &model.modes[k];
    let mm = &mode.matrices;
    let d = &model.dims;
    let stats = mode.fault_stats()?;
    let nu = d.nu;
    let e = Matrix::eye(d.p, d.q);
    let fs = [("F=0", Matrix::zeros(d.p, d.q)), ("F=+I", e.clone()), ("F=-I", -&e)];
    let live: Vec<usize> = (0..nu).filter(|&l| stats.xi[(l, l)] != 0.0).collect();
    let mut thetas = vec![("theta=0".to_string(), Matrix::zeros(nu, nu))];
    for mask in 0..(1usize << live.len()) {
        let mut th = Matrix::zeros(nu, nu);
        let mut label = String::from("theta=");
        for (b, &l) in live.iter().enumerate() {
            let s = if mask >> b & 1 == 1 { -1.0 } else { 1.0 };
            th[(l, l)] = s * stats.xi[(l, l)];
            label.push(if s > 0.0 { '+' } else { '-' });
        }
        if !live.is_empty() {
            thetas.push((label, th));
        }
    }
    let mut out = Vec::new();
    for (fl, f) in &fs {
        let (a, a_d) = mm.uncertain(f);
        for (tl, th) in &thetas {
            let omega = &stats.omega0 * &(&Matrix::identity(nu) + th);
            let a_cl = &a + &(&(&mm.b * &omega) * gain);
            out.push((format!("{fl},{tl}"), a_cl, a_d.clone()));
        }
    }
    Ok(out)
}

/// Synthesis feasibility, closed-loop analysis with the un-barred certificate at the
/// vertex realizations, and μ/τ_a*.
pub fn certify(solution: &SynthesisSolution, model: &SwitchedModel) -> Result<CertifyReport> {
    let feasibility = feasibility_report(solution, model, SYNTHESIS_MARGIN)?;
    let gains = match &solution.modes.iter().map(|m| m.gain.clone()).collect::<Option<Vec<_>>>() {
        Some(g) => g.clone(),
        None => recover_gains(solution).unwrap_or_default(),
    };
    let mut analysis = Vec::new();
    let mut analysis_error = None;
    match unbar_certificate(solution, &model.delay_bounds()) {
        Ok(cert) if gains.len() == model.n_modes() => {
            for (k, gain) in gains.iter().enumerate() {
                for (label, a_cl, a_d) in analysis_vertices(model, k, gain)? {
                    match assemble_closed_loop_analysis(&cert, k, &a_cl, &a_d) {
                        Ok(blocks) => {
                            let phi = check_definiteness(&blocks.phi.matrix, Definiteness::ND, ANALYSIS_MARGIN)?;
                            let mut psi_min = f64::INFINITY;
                            let mut psi_ok = true;
                            for p in &blocks.psi {
                                let r = check_definiteness(p, Definiteness::PSD, ANALYSIS_MARGIN)?;
                                psi_min = psi_min.min(r.lambda_min);
                                psi_ok &= r.holds;
                            }
                            analysis.push(AnalysisRecord {
                                mode: k + 1,
                                realization: label,
                                phi_max: phi.lambda_max,
                                psi_min,
                                pass: phi.holds && psi_ok,
                            });
                        }
                        Err(e) => {
                            analysis_error = Some(e.to_string());
                        }
                    }
                }
            }
        }
        Ok(_) => analysis_error = Some("gains could not be recovered".into()),
        Err(e) => analysis_error = Some(e.to_string()),
    }
    let (mu, tau_star) = match mu_and_tau(solution, solution.alpha) {
        Ok((m, t)) => (Some(m), Some(t)),
        Err(_) => (None, None),
    };
    let mut report = CertifyReport {
        feasibility,
        gains,
        analysis,
        analysis_error,
        mu,
        tau_star,
        pass: false,
    };
    report.pass = report.feasibility.pass && report.analysis_pass() && report.mu.is_some();
    Ok(report)
}
