use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmi::solution::SynthesisSolution;
use crate::lyapunov::{BlockVariables, LyapunovCertificate};
use crate::matrixcore::{eig_extremes, generalized_max_eig, Matrix, SymMatrix};
use crate::model::DelayBounds;

/// K^k = Υ^k Z⁻¹ for every mode.
pub fn recover_gains(solution: &SynthesisSolution) -> Result<Vec<Matrix>> {
    let zinv = solution.z.inverse()?;
    Ok(solution.modes.iter().map(|m| &m.upsilon * &zinv).collect())
}

/// Recover the gains and store them in the solution.
pub fn store_gains(solution: &mut SynthesisSolution) -> Result<()> {
    let gains = recover_gains(solution)?;
    for (m, k) in solution.modes.iter_mut().zip(gains) {
        m.gain = Some(k);
    }
    Ok(())
}

/// Inverse of a diag-split SPD variable, or zero when the variable is identically zero
/// (the constant-delay form carries no W2).
fn invert_or_zero(m: &Matrix) -> Result<Matrix> {
    if m.max_abs() == 0.0 {
        Ok(m.clone())
    } else {
        m.inverse()
    }
}

/// Apply the per-direction congruence X ↦ Tᵀ X T to every matrix family, with
/// `th`, `tv` acting on the h and v parts; W1, W2 are mapped by `w`.
fn map_vars(v: &BlockVariables, th: &Matrix, tv: &Matrix, w: impl Fn(&Matrix) -> Result<Matrix>) -> Result<BlockVariables> {
    let t = Matrix::block_diag(&[th, tv]);
    let t2h = Matrix::block_diag(&[th, th]);
    let t2v = Matrix::block_diag(&[tv, tv]);
    let sym = |x: &Matrix, t: &Matrix| (&t.transpose() * x) * t.clone();
    let col = |x: &Matrix, t2: &Matrix, t1: &Matrix| (&t2.transpose() * x) * t1.clone();
    Ok(BlockVariables {
        p: sym(&v.p, &t),
        q1: sym(&v.q1, &t),
        q2: sym(&v.q2, &t),
        w1: w(&v.w1)?,
        w2: w(&v.w2)?,
        xh: sym(&v.xh, &t2h),
        xv: sym(&v.xv, &t2v),
        yh: sym(&v.yh, &t2h),
        yv: sym(&v.yv, &t2v),
        mh: col(&v.mh, &t2h, th),
        mv: col(&v.mv, &t2v, tv),
        nh: col(&v.nh, &t2h, th),
        nv: col(&v.nv, &t2v, tv),
        sh: col(&v.sh, &t2h, th),
        sv: col(&v.sv, &t2v, tv),
    })
}

/// Un-barred certificate: P = Z⁻ᵀ P̄ Z⁻¹ (likewise Q, X, Y, M, N, S per direction), W = W̄⁻¹.
pub fn unbar_certificate(solution: &SynthesisSolution, bounds: &DelayBounds) -> Result<LyapunovCertificate> {
    let (zh, zv) = solution.z_parts();
    let (gh, gv) = (zh.inverse()?, zv.inverse()?);
    let modes = solution
        .modes
        .iter()
        .map(|m| map_vars(&m.vars, &gh, &gv, invert_or_zero))
        .collect::<Result<Vec<_>>>()?;
    Ok(LyapunovCertificate {
        alpha: solution.alpha,
        bounds: *bounds,
        modes,
    })
}

/// Barred variables of a certificate for a given Z: P̄ = Zᵀ P Z, W̄ = W⁻¹. Υ is not
/// part of the certificate and is left at zero.
pub fn bar_certificate(cert: &LyapunovCertificate, z: &Matrix, template: &SynthesisSolution) -> Result<SynthesisSolution> {
    let n1 = cert.modes.first().map_or(0, |m| m.n1());
    let n2 = cert.modes.first().map_or(0, |m| m.n2());
    let (zh, zv) = (z.block(0, 0, n1, n1), z.block(n1, n1, n2, n2));
    let mut out = template.clone();
    out.alpha = cert.alpha;
    out.z = z.clone();
    if out.modes.len() != cert.modes.len() {
        return Err(Error::dim("bar_certificate modes", cert.modes.len(), out.modes.len()));
    }
    for (m, v) in out.modes.iter_mut().zip(&cert.modes) {
        m.vars = map_vars(v, &zh, &zv, invert_or_zero)?;
        m.gain = None;
    }
    Ok(out)
}

/// Barred families compared across modes by the switching-jump condition.
fn families(v: &BlockVariables) -> [(&'static str, &Matrix); 5] {
    [("P", &v.p), ("Q1", &v.q1), ("Q2", &v.q2), ("W1", &v.w1), ("W2", &v.w2)]
}

/// Least μ ≥ 1 with M_k ⪯ μ M_l for all ordered mode pairs and all five families,
/// and the matching τ_a* = ln μ / (−ln α).
pub fn mu_and_tau(solution: &SynthesisSolution, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaRange(alpha));
    }
    let mut mu = 1.0f64;
    let modes = &solution.modes;
    for f in 0..5 {
        let all_zero = modes.iter().all(|m| families(&m.vars)[f].1.max_abs() == 0.0);
        if all_zero {
            continue;
        }
        for (k, mk) in modes.iter().enumerate() {
            for (l, ml) in modes.iter().enumerate() {
                if k == l {
                    continue;
                }
                let (name, a) = families(&mk.vars)[f];
                let b = families(&ml.vars)[f].1;
                let g = generalized_max_eig(a, b).map_err(|_| Error::SingularBlock(format!("{name} of mode {} is not positive definite", l + 1)))?;
                mu = mu.max(g);
            }
        }
    }
    // Equal matrices whiten to I only up to rounding.
    if mu - 1.0 < MU_SNAP {
        mu = 1.0;
    }
    Ok((mu, tau_star(mu, alpha)))
}

/// μ within this of 1 is reported as exactly 1.
const MU_SNAP: f64 = 1e-12;

/// τ_a* = ln μ / (−ln α).
pub fn tau_star(mu: f64, alpha: f64) -> f64 {
    mu.ln() / (-alpha.ln())
}

/// Constants of the exponential envelope on the anti-diagonal energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaEnvelope {
    pub zeta1: f64,
    pub zeta2: f64,
    pub mu: f64,
    pub tau_a: f64,
    pub n0: f64,
    pub alpha: f64,
    /// c = −(ln μ/τ_a + ln α) > 0.
    pub rate: f64,
}

impl ZetaEnvelope {
    /// Multiplier (ζ1/ζ2) μ^{N0} e^{−c(D−z)} applied to the boundary energy measure at z.
    pub fn factor(&self, d: i64, z: i64) -> f64 {
        self.zeta1 / self.zeta2 * self.mu.powf(self.n0) * (-self.rate * (d - z) as f64).exp()
    }

    /// Prefactor (ζ1/ζ2) μ^{N0}.
    pub fn prefactor(&self) -> f64 {
        self.zeta1 / self.zeta2 * self.mu.powf(self.n0)
    }
}

/// ζ1, ζ2 and the decay rate from un-barred certificates.
pub fn zeta_envelope(cert: &LyapunovCertificate, mu: f64, tau_a: f64, n0: f64, alpha: f64) -> Result<ZetaEnvelope> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaRange(alpha));
    }
    let ts = tau_star(mu, alpha);
    if !(tau_a > ts) {
        return Err(Error::EnvelopeUndefined { tau_a, tau_star: ts });
    }
    let b = cert.bounds;
    let dl = b.h_lo.max(b.v_lo) as f64;
    let dh = b.h_hi.max(b.v_hi) as f64;
    let dl2 = (b.h_lo * b.h_lo).max(b.v_lo * b.v_lo) as f64;
    let dd2 = ((b.h_hi - b.h_lo).pow(2)).max((b.v_hi - b.v_lo).pow(2)) as f64;
    let lmax = |m: &Matrix| -> Result<f64> { Ok(eig_extremes(&SymMatrix::symmetrize(m)?)?.1) };
    let mut zeta1 = f64::NEG_INFINITY;
    let mut zeta2 = f64::INFINITY;
    for v in &cert.modes {
        let z1 = lmax(&v.p)? + dl * lmax(&v.q1)? + dh * lmax(&v.q2)? + dl2 * lmax(&v.w1)? + dd2 * lmax(&v.w2)?;
        zeta1 = zeta1.max(z1);
        zeta2 = zeta2.min(eig_extremes(&SymMatrix::symmetrize(&v.p)?)?.0);
    }
    if !(zeta2 > 0.0) {
        return Err(Error::SingularBlock(format!("certificate P is not positive definite (min eigenvalue {zeta2})")));
    }
    Ok(ZetaEnvelope {
        zeta1,
        zeta2,
        mu,
        tau_a,
        n0,
        alpha,
        rate: -(mu.ln() / tau_a + alpha.ln()),
    })
}
