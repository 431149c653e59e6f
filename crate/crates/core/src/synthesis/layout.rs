use crate::lmi::{Formulation, ModeSolution, SynthesisSolution};
use crate::lyapunov::BlockVariables;
use crate::matrixcore::Matrix;

/// How a matrix maps to coordinates of the decision vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Upper triangle, mirrored.
    Sym,
    /// Every entry, row-major.
    Full,
}

/// Vectorization of the structured decision variables.
///
/// Order: Z_h, Z_v, then per mode the diag-split SPD families (h then v parts), X, Y,
/// the slack columns and Υ. Families absent from the formulation stay zero and get no
/// coordinates.
#[derive(Debug, Clone)]
pub struct VariableLayout {
    pub n1: usize,
    pub n2: usize,
    pub nu: usize,
    pub n_modes: usize,
    pub formulation: Formulation,
    len: usize,
}

impl VariableLayout {
    pub fn new(n1: usize, n2: usize, nu: usize, n_modes: usize, formulation: Formulation) -> Self {
        let mut l = VariableLayout {
            n1,
            n2,
            nu,
            n_modes,
            formulation,
            len: 0,
        };
        let mut count = 0;
        let mut s = l.zero_solution(0.5);
        l.walk(&mut s, &mut |m, kind| count += coords(m, kind));
        l.len = count;
        l
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Solution with every structured variable at zero.
    pub fn zero_solution(&self, alpha: f64) -> SynthesisSolution {
        let n = self.n1 + self.n2;
        SynthesisSolution {
            formulation: self.formulation,
            alpha,
            z: Matrix::zeros(n, n),
            modes: (0..self.n_modes)
                .map(|_| ModeSolution {
                    vars: BlockVariables::zeros(self.n1, self.n2),
                    upsilon: Matrix::zeros(self.nu, n),
                    delta: 1.0,
                    epsilon: 1.0,
                    gain: None,
                })
                .collect(),
            mu: None,
            tau_star: None,
            note: String::new(),
        }
    }

    fn walk(&self, s: &mut SynthesisSolution, f: &mut dyn FnMut(&mut Matrix, Kind)) {
        let (n1, n2) = (self.n1, self.n2);
        let split = |m: &Matrix| (m.block(0, 0, n1, n1), m.block(n1, n1, n2, n2));
        let diag_split = |m: &mut Matrix, kind: Kind, f: &mut dyn FnMut(&mut Matrix, Kind)| {
            let (mut h, mut v) = split(m);
            f(&mut h, kind);
            f(&mut v, kind);
            *m = Matrix::block_diag(&[&h, &v]);
        };
        diag_split(&mut s.z, Kind::Full, f);
        let tv = self.formulation == Formulation::TimeVarying;
        for m in &mut s.modes {
            let v = &mut m.vars;
            diag_split(&mut v.p, Kind::Sym, f);
            diag_split(&mut v.q1, Kind::Sym, f);
            if tv {
                diag_split(&mut v.q2, Kind::Sym, f);
            }
            diag_split(&mut v.w1, Kind::Sym, f);
            if tv {
                diag_split(&mut v.w2, Kind::Sym, f);
            }
            f(&mut v.xh, Kind::Sym);
            f(&mut v.xv, Kind::Sym);
            if tv {
                f(&mut v.yh, Kind::Sym);
                f(&mut v.yv, Kind::Sym);
            }
            f(&mut v.mh, Kind::Full);
            f(&mut v.mv, Kind::Full);
            if tv {
                f(&mut v.nh, Kind::Full);
                f(&mut v.nv, Kind::Full);
                f(&mut v.sh, Kind::Full);
                f(&mut v.sv, Kind::Full);
            }
            f(&mut m.upsilon, Kind::Full);
        }
    }

    /// Fill `template`'s structured variables from `x`; scalars are kept.
    pub fn decode(&self, x: &[f64], template: &SynthesisSolution) -> SynthesisSolution {
        assert_eq!(x.len(), self.len, "decision vector length");
        let mut s = template.clone();
        let mut pos = 0;
        self.walk(&mut s, &mut |m, kind| {
            let (r, c) = m.shape();
            for i in 0..r {
                let j0 = if kind == Kind::Sym { i } else { 0 };
                for j in j0..c {
                    m[(i, j)] = x[pos];
                    if kind == Kind::Sym {
                        m[(j, i)] = x[pos];
                    }
                    pos += 1;
                }
            }
        });
        s
    }

    /// Coordinates of a solution; symmetric blocks are read from their upper triangle.
    pub fn encode(&self, s: &SynthesisSolution) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len);
        let mut s = s.clone();
        self.walk(&mut s, &mut |m, kind| {
            let (r, c) = m.shape();
            for i in 0..r {
                let j0 = if kind == Kind::Sym { i } else { 0 };
                for j in j0..c {
                    out.push(m[(i, j)]);
                }
            }
        });
        out
    }
}

fn coords(m: &Matrix, kind: Kind) -> usize {
    match kind {
        Kind::Sym => m.rows() * (m.rows() + 1) / 2,
        Kind::Full => m.rows() * m.cols(),
    }
}
