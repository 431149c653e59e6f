use crate::error::{Error, Result};
use crate::lmi::solution::{Formulation, SynthesisSolution};
use crate::lyapunov::{BlockVariables, LyapunovCertificate};
use crate::matrixcore::{BlockLayout, Matrix, SymMatrix};
use crate::model::{DelayBounds, FaultStats, ModeMatrices, SwitchedModel};

/// Λ1 = diag{d_hL I, d_vL I}, Λ2 = diag{(d_hH − d_hL) I, …}, Λ3 = diag{α^{d_hL} I, …},
/// Λ4 = diag{α^{d_hH} I, …}, kept as per-direction scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayWeights {
    pub l1: [f64; 2],
    pub l2: [f64; 2],
    pub l3: [f64; 2],
    pub l4: [f64; 2],
    n1: usize,
    n2: usize,
}

impl DelayWeights {
    pub fn new(bounds: &DelayBounds, alpha: f64, n1: usize, n2: usize) -> Result<Self> {
        bounds.validate()?;
        let (hl, hh, vl, vh) = (bounds.h_lo, bounds.h_hi, bounds.v_lo, bounds.v_hi);
        Ok(DelayWeights {
            l1: [hl as f64, vl as f64],
            l2: [(hh - hl) as f64, (vh - vl) as f64],
            l3: [alpha.powi(hl as i32), alpha.powi(vl as i32)],
            l4: [alpha.powi(hh as i32), alpha.powi(vh as i32)],
            n1,
            n2,
        })
    }

    fn diag(&self, w: [f64; 2]) -> Matrix {
        let mut v = vec![w[0]; self.n1];
        v.extend(std::iter::repeat_n(w[1], self.n2));
        Matrix::diag(&v)
    }

    pub fn lambda1(&self) -> Matrix {
        self.diag(self.l1)
    }
    pub fn lambda2(&self) -> Matrix {
        self.diag(self.l2)
    }
    pub fn lambda3(&self) -> Matrix {
        self.diag(self.l3)
    }
    pub fn lambda4(&self) -> Matrix {
        self.diag(self.l4)
    }

    /// Row indices (within an n-block) whose weight in `w` is nonzero.
    fn live(&self, w: [f64; 2]) -> Vec<bool> {
        let mut v = vec![w[0] != 0.0; self.n1];
        v.extend(std::iter::repeat_n(w[1] != 0.0, self.n2));
        v
    }

    /// diag{f(w_h) X_h, f(w_v) X_v} for a diag-split X, with zero where the weight vanishes.
    fn scaled_inverse(&self, w: [f64; 2], x: &Matrix, f: impl Fn(f64) -> f64) -> Result<Matrix> {
        let (n1, n2) = (self.n1, self.n2);
        let part = |wk: f64, blk: Matrix| -> Result<Matrix> {
            if wk == 0.0 {
                Ok(Matrix::zeros(blk.rows(), blk.cols()))
            } else {
                Ok(blk.inverse()?.scale(f(wk)))
            }
        };
        let h = part(w[0], x.block(0, 0, n1, n1))?;
        let v = part(w[1], x.block(n1, n1, n2, n2))?;
        Ok(Matrix::block_diag(&[&h, &v]))
    }
}

/// An assembled matrix inequality over the retained rows of its block layout.
#[derive(Debug, Clone)]
pub struct AssembledLmi {
    pub matrix: SymMatrix,
    pub layout: BlockLayout,
    /// Rows of the full layout kept in `matrix`; zero-width delay rows and ξ = 0 fault rows are dropped.
    pub kept: Vec<usize>,
}

impl AssembledLmi {
    fn from_layout(layout: BlockLayout, drop: &[usize]) -> Result<Self> {
        let full = layout.assemble_symmetric()?;
        let kept: Vec<usize> = (0..full.order()).filter(|r| !drop.contains(r)).collect();
        let matrix = if kept.len() == full.order() { full } else { full.principal_submatrix(&kept)? };
        Ok(AssembledLmi { matrix, layout, kept })
    }
}

/// The "< 0" block and the "≥ 0" blocks of one mode.
#[derive(Debug, Clone)]
pub struct LmiBlocks {
    pub phi: AssembledLmi,
    /// Ψ blocks in the order [1h, 2h, 3h, 1v, 2v, 3v] (constant-delay form: [1h, 1v]).
    pub psi: Vec<SymMatrix>,
}

impl LmiBlocks {
    /// Ψ as the block diagonal of its parts.
    pub fn psi_diag(&self) -> Result<SymMatrix> {
        let parts: Vec<&Matrix> = self.psi.iter().map(|p| p.matrix()).collect();
        SymMatrix::symmetrize(&Matrix::block_diag(&parts))
    }
}

/// Φ1 upper blocks (4x4 of n×n) shared by the analysis and synthesis forms.
fn phi1_blocks(v: &BlockVariables, w: &DelayWeights, alpha: f64) -> [[Option<Matrix>; 4]; 4] {
    let (l1, l2, l3, l4) = (w.lambda1(), w.lambda2(), w.lambda3(), w.lambda4());
    let (m1, m2) = (v.m1(), v.m2());
    let (nn1, nn2) = (v.n1_slack(), v.n2_slack());
    let (s1, s2) = (v.s1(), v.s2());
    let phi11 = &(&(&v.q1 + &v.q2) + &(&l3 * &(&(&m1 + &m1.transpose()) + &(&l1 * &v.x11())))) + &(&(&(&l2 * &l4) * &v.y11()) - &v.p.scale(alpha));
    let phi12 = &(&l3 * &(&(&l1 * &v.x12()) + &m2.transpose())) + &(&l4 * &(&(&nn1 - &s1) + &(&l2 * &v.y12())));
    let phi13 = &(&l4 * &s1) - &(&l3 * &m1);
    let phi14 = -(&l4 * &nn1);
    let inner22 = &(&(&nn2 + &nn2.transpose()) - &(&s2 + &s2.transpose())) + &(&l2 * &v.y22());
    let phi22 = &(&(&l1 * &l3) * &v.x22()) + &(&l4 * &inner22);
    let phi23 = &(&l4 * &s2) - &(&l3 * &m2);
    let phi24 = -(&l4 * &nn2);
    let phi33 = -(&l3 * &v.q1);
    let phi44 = -(&l4 * &v.q2);
    [
        [Some(phi11), Some(phi12), Some(phi13), Some(phi14)],
        [None, Some(phi22), Some(phi23), Some(phi24)],
        [None, None, Some(phi33), None],
        [None, None, None, Some(phi44)],
    ]
}

fn place_phi1(layout: &mut BlockLayout, blocks: [[Option<Matrix>; 4]; 4]) -> Result<()> {
    for (r, row) in blocks.into_iter().enumerate() {
        for (c, b) in row.into_iter().enumerate() {
            if let Some(b) = b {
                layout.set(r, c, b)?;
            }
        }
    }
    Ok(())
}

fn dropped_rows(offset: usize, live: &[bool]) -> Vec<usize> {
    live.iter().enumerate().filter(|(_, l)| !**l).map(|(k, _)| offset + k).collect()
}

/// One mode's closed loop together with the certificate matrices to test on it.
#[derive(Debug, Clone, Copy)]
pub struct AnalysisProblem<'a> {
    pub a: &'a Matrix,
    pub a_d: &'a Matrix,
    pub bounds: &'a DelayBounds,
    pub alpha: f64,
    pub vars: &'a BlockVariables,
}

/// Φ of the delay-dependent analysis condition and the six Ψ blocks.
pub fn assemble_analysis(problem: &AnalysisProblem) -> Result<LmiBlocks> {
    let AnalysisProblem { a, a_d, bounds, alpha, vars: v } = *problem;
    if !(alpha > 0.0) {
        return Err(Error::AlphaRange(alpha));
    }
    let (n1, n2) = (v.n1(), v.n2());
    let n = n1 + n2;
    v.validate(n1, n2, "certificate")?;
    if a.shape() != (n, n) || a_d.shape() != (n, n) {
        return Err(Error::dim("analysis A, A_d", format!("{n}x{n}"), format!("{}x{} and {}x{}", a.rows(), a.cols(), a_d.rows(), a_d.cols())));
    }
    let w = DelayWeights::new(bounds, alpha, n1, n2)?;
    let mut layout = BlockLayout::symmetric(&[n; 7]);
    place_phi1(&mut layout, phi1_blocks(v, &w, alpha))?;
    let a_minus_i = a - &Matrix::identity(n);
    for c in [4, 5] {
        layout.set(0, c, a_minus_i.transpose())?;
        layout.set(1, c, a_d.transpose())?;
    }
    layout.set(0, 6, &a.transpose() * &v.p)?;
    layout.set(1, 6, &a_d.transpose() * &v.p)?;
    layout.set(4, 4, -w.scaled_inverse(w.l1, &v.w1, |d| 1.0 / d)?)?;
    let w2_live = w.live(w.l2);
    if w2_live.iter().any(|l| *l) {
        layout.set(5, 5, -w.scaled_inverse(w.l2, &v.w2, |d| 1.0 / d)?)?;
    }
    layout.set(6, 6, -v.p.clone())?;
    let mut drop = dropped_rows(4 * n, &w.live(w.l1));
    drop.extend(dropped_rows(5 * n, &w2_live));
    let phi = AssembledLmi::from_layout(layout, &drop)?;

    let (w1h, w1v) = v.split(&v.w1);
    let (w2h, w2v) = v.split(&v.w2);
    let psi = vec![
        psi_block(&v.xh, &v.mh, &w1h)?,
        psi_block(&v.yh, &v.nh, &w2h)?,
        psi_block(&v.yh, &v.sh, &w2h)?,
        psi_block(&v.xv, &v.mv, &w1v)?,
        psi_block(&v.yv, &v.nv, &w2v)?,
        psi_block(&v.yv, &v.sv, &w2v)?,
    ];
    Ok(LmiBlocks { phi, psi })
}

/// [[X, M], [*, corner]]
fn psi_block(x: &Matrix, m: &Matrix, corner: &Matrix) -> Result<SymMatrix> {
    let mut l = BlockLayout::symmetric(&[x.rows(), corner.rows()]);
    l.set(0, 0, x.clone())?;
    l.set(0, 1, m.clone())?;
    l.set(1, 1, corner.clone())?;
    l.assemble_symmetric()
}

/// Everything the synthesis inequality of one mode depends on.
pub struct SynthesisInput<'a> {
    pub mats: &'a ModeMatrices,
    pub faults: &'a FaultStats,
    pub bounds: &'a DelayBounds,
    pub alpha: f64,
    pub z: &'a Matrix,
    pub vars: &'a BlockVariables,
    pub upsilon: &'a Matrix,
    pub delta: f64,
    pub epsilon: f64,
}

impl SynthesisInput<'_> {
    /// δ H Hᵀ + ε B Ω0 Ξ Ω0ᵀ Bᵀ
    fn coupling(&self) -> Matrix {
        let bo = &self.mats.b * &self.faults.omega0;
        let hh = &self.mats.h * &self.mats.h.transpose();
        &hh.scale(self.delta) + &(&(&bo * &self.faults.xi) * &bo.transpose()).scale(self.epsilon)
    }

    fn fault_live(&self) -> Vec<bool> {
        (0..self.faults.xi.rows()).map(|l| self.faults.xi[(l, l)] != 0.0).collect()
    }
}

/// Φ̄ with block layout [4n, n, n, n, q, n_u] (Φ̄1 split into four n-blocks) and the six Ψ̄ blocks.
pub fn synthesis_blocks(inp: &SynthesisInput) -> Result<LmiBlocks> {
    let v = inp.vars;
    let (n1, n2) = (v.n1(), v.n2());
    let n = n1 + n2;
    let q = inp.mats.e.rows();
    let nu = inp.mats.b.cols();
    let w = DelayWeights::new(inp.bounds, inp.alpha, n1, n2)?;
    let c = inp.coupling();
    let z = inp.z;
    let bou = &(&inp.mats.b * &inp.faults.omega0) * inp.upsilon;
    let az = &inp.mats.a * z;
    let phi2_x = &(&az - z) + &bou;
    let phi3_x = &az + &bou;
    let adz = &inp.mats.a_d * z;

    let mut layout = BlockLayout::symmetric(&[n, n, n, n, n, n, n, q, nu]);
    place_phi1(&mut layout, phi1_blocks(v, &w, inp.alpha))?;
    for col in [4, 5] {
        layout.set(0, col, phi2_x.transpose())?;
        layout.set(1, col, adz.transpose())?;
    }
    layout.set(0, 6, phi3_x.transpose())?;
    layout.set(1, 6, adz.transpose())?;
    layout.set(0, 7, (&inp.mats.e * z).transpose())?;
    layout.set(1, 7, (&inp.mats.e_d * z).transpose())?;
    layout.set(0, 8, (&inp.faults.xi * inp.upsilon).transpose())?;
    layout.set(4, 4, &(-w.inverse_weighted(w.l1, &v.w1)) + &c)?;
    layout.set(4, 5, c.clone())?;
    layout.set(4, 6, c.clone())?;
    layout.set(5, 5, &(-w.inverse_weighted(w.l2, &v.w2)) + &c)?;
    layout.set(5, 6, c.clone())?;
    layout.set(6, 6, &(&(&v.p - z) - &z.transpose()) + &c)?;
    layout.set(7, 7, Matrix::identity(q).scale(-inp.delta))?;
    layout.set(8, 8, inp.faults.xi.scale(-inp.epsilon))?;

    let mut drop = dropped_rows(4 * n, &w.live(w.l1));
    drop.extend(dropped_rows(5 * n, &w.live(w.l2)));
    drop.extend(dropped_rows(7 * n + q, &inp.fault_live()));
    let phi = AssembledLmi::from_layout(layout, &drop)?;

    let (zh, zv) = (z.block(0, 0, n1, n1), z.block(n1, n1, n2, n2));
    let zzh = &zh + &zh.transpose();
    let zzv = &zv + &zv.transpose();
    let (w1h, w1v) = v.split(&v.w1);
    let (w2h, w2v) = v.split(&v.w2);
    let psi = vec![
        psi_block(&v.xh, &v.mh, &(&zzh - &w1h))?,
        psi_block(&v.yh, &v.nh, &(&zzh - &w2h))?,
        psi_block(&v.yh, &v.sh, &(&zzh - &w2h))?,
        psi_block(&v.xv, &v.mv, &(&zzv - &w1v))?,
        psi_block(&v.yv, &v.nv, &(&zzv - &w2v))?,
        psi_block(&v.yv, &v.sv, &(&zzv - &w2v))?,
    ];
    Ok(LmiBlocks { phi, psi })
}

impl DelayWeights {
    /// diag{W_h / w_h, W_v / w_v}, zero where the weight vanishes (those rows are dropped).
    fn inverse_weighted(&self, w: [f64; 2], x: &Matrix) -> Matrix {
        let (n1, n2) = (self.n1, self.n2);
        let part = |wk: f64, blk: Matrix| if wk == 0.0 { Matrix::zeros(blk.rows(), blk.cols()) } else { blk.scale(1.0 / wk) };
        Matrix::block_diag(&[&part(w[0], x.block(0, 0, n1, n1)), &part(w[1], x.block(n1, n1, n2, n2))])
    }
}

/// Constant-delay synthesis blocks: Φ̃ with layout [2n, n, n, q, n_u] (Φ̃1 split in two) and Ψ̄1h, Ψ̄1v.
pub fn theorem2_blocks(inp: &SynthesisInput) -> Result<LmiBlocks> {
    if !inp.bounds.is_constant() {
        return Err(Error::DelayOrder(format!("constant-delay form needs d_L = d_H, got {:?}", inp.bounds)));
    }
    let v = inp.vars;
    let (n1, n2) = (v.n1(), v.n2());
    let n = n1 + n2;
    let q = inp.mats.e.rows();
    let nu = inp.mats.b.cols();
    let w = DelayWeights::new(inp.bounds, inp.alpha, n1, n2)?;
    let (l1, l3) = (w.lambda1(), w.lambda3());
    let c = inp.coupling();
    let z = inp.z;
    let (m1, m2) = (v.m1(), v.m2());
    let phi11 = &(&v.q1 + &(&l3 * &(&(&m1 + &m1.transpose()) + &(&l1 * &v.x11())))) - &v.p.scale(inp.alpha);
    let phi12 = &(&l3 * &(&(&l1 * &v.x12()) + &m2.transpose())) - &(&l3 * &m1);
    let l3m2 = &l3 * &m2;
    let phi22 = &(&(&(&l1 * &l3) * &v.x22()) - &l3m2) - &(&l3m2.transpose() + &(&l3 * &v.q1));
    let bou = &(&inp.mats.b * &inp.faults.omega0) * inp.upsilon;
    let az = &inp.mats.a * z;
    let adz = &inp.mats.a_d * z;

    let mut layout = BlockLayout::symmetric(&[n, n, n, n, q, nu]);
    layout.set(0, 0, phi11)?;
    layout.set(0, 1, phi12)?;
    layout.set(1, 1, phi22)?;
    layout.set(0, 2, (&(&(&az - z) + &bou)).transpose())?;
    layout.set(1, 2, adz.transpose())?;
    layout.set(0, 3, (&az + &bou).transpose())?;
    layout.set(1, 3, adz.transpose())?;
    layout.set(0, 4, (&inp.mats.e * z).transpose())?;
    layout.set(1, 4, (&inp.mats.e_d * z).transpose())?;
    layout.set(0, 5, &inp.upsilon.transpose() * &inp.faults.xi)?;
    layout.set(2, 2, &(-w.inverse_weighted(w.l1, &v.w1)) + &c)?;
    layout.set(2, 3, c.clone())?;
    layout.set(3, 3, &(&(&v.p - z) - &z.transpose()) + &c)?;
    layout.set(4, 4, Matrix::identity(q).scale(-inp.delta))?;
    layout.set(5, 5, inp.faults.xi.scale(-inp.epsilon))?;
    let mut drop = dropped_rows(2 * n, &w.live(w.l1));
    drop.extend(dropped_rows(4 * n + q, &inp.fault_live()));
    let phi = AssembledLmi::from_layout(layout, &drop)?;

    let (zh, zv) = (z.block(0, 0, n1, n1), z.block(n1, n1, n2, n2));
    let (w1h, w1v) = v.split(&v.w1);
    let psi = vec![
        psi_block(&v.xh, &v.mh, &(&(&zh + &zh.transpose()) - &w1h))?,
        psi_block(&v.xv, &v.mv, &(&(&zv + &zv.transpose()) - &w1v))?,
    ];
    Ok(LmiBlocks { phi, psi })
}

fn input<'a>(solution: &'a SynthesisSolution, model: &'a SwitchedModel, faults: &'a [FaultStats], bounds: &'a DelayBounds, k: usize) -> Result<SynthesisInput<'a>> {
    let ms = solution
        .modes
        .get(k)
        .ok_or_else(|| Error::IncompleteModel(format!("solution has no mode {}", k + 1)))?;
    let mm = model
        .modes
        .get(k)
        .ok_or_else(|| Error::IncompleteModel(format!("model has no mode {}", k + 1)))?;
    let fs = faults
        .get(k)
        .ok_or_else(|| Error::IncompleteModel(format!("fault statistics missing for mode {}", k + 1)))?;
    Ok(SynthesisInput {
        mats: &mm.matrices,
        faults: fs,
        bounds,
        alpha: solution.alpha,
        z: &solution.z,
        vars: &ms.vars,
        upsilon: &ms.upsilon,
        delta: ms.delta,
        epsilon: ms.epsilon,
    })
}

/// Φ̄ and Ψ̄ of mode k for a barred solution on the time-varying-delay model.
pub fn assemble_synthesis(solution: &SynthesisSolution, model: &SwitchedModel, k: usize) -> Result<LmiBlocks> {
    let faults = model.fault_stats()?;
    let bounds = model.delay_bounds();
    synthesis_blocks(&input(solution, model, &faults, &bounds, k)?)
}

/// Φ̃, Ψ̄1h, Ψ̄1v of mode k with constant delays (d_h, d_v).
pub fn assemble_theorem2(solution: &SynthesisSolution, model: &SwitchedModel, k: usize, d_h: i64, d_v: i64) -> Result<LmiBlocks> {
    let faults = model.fault_stats()?;
    let bounds = DelayBounds::new(d_h, d_h, d_v, d_v);
    theorem2_blocks(&input(solution, model, &faults, &bounds, k)?)
}

/// Synthesis blocks following the solution's formulation.
pub fn assemble_for(solution: &SynthesisSolution, model: &SwitchedModel, k: usize) -> Result<LmiBlocks> {
    match solution.formulation {
        Formulation::TimeVarying => assemble_synthesis(solution, model, k),
        Formulation::ConstantDelay => {
            let b = model.delay_bounds();
            assemble_theorem2(solution, model, k, b.h_lo, b.v_lo)
        }
    }
}

/// Certificate of one mode's closed loop in analysis form.
pub fn assemble_closed_loop_analysis(cert: &LyapunovCertificate, k: usize, a_cl: &Matrix, a_d: &Matrix) -> Result<LmiBlocks> {
    let v = cert
        .modes
        .get(k)
        .ok_or_else(|| Error::IncompleteModel(format!("certificate has no mode {}", k + 1)))?;
    assemble_analysis(&AnalysisProblem {
        a: a_cl,
        a_d,
        bounds: &cert.bounds,
        alpha: cert.alpha,
        vars: v,
    })
}
