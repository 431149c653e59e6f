//! Minimize the worst eigenvalue t of a family of affine symmetric maps:
//! find x with G_c(x) + t I ≻ 0 for every c, t as small as possible.

use crate::error::{Error, InfeasibleReason, Result};
use crate::matrixcore::{forward_substitute, lower_inverse, sym_eigvals, Matrix, SymMatrix};

/// G(x) = G0 + Σ x_i A_i, with only the nonzero A_i stored.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub name: String,
    pub g0: Matrix,
    pub terms: Vec<(usize, Matrix)>,
}

impl AffineMap {
    pub fn order(&self) -> usize {
        self.g0.rows()
    }

    pub fn eval(&self, x: &[f64]) -> Matrix {
        let mut g = self.g0.clone();
        for (i, a) in &self.terms {
            if x[*i] != 0.0 {
                g += &a.scale(x[*i]);
            }
        }
        g
    }

    /// λ_max(−G(x)): how far the block is from positive definiteness.
    pub fn violation(&self, x: &[f64]) -> Result<f64> {
        let s = SymMatrix::symmetrize(&self.eval(x))?;
        Ok(-sym_eigvals(&s)?[0])
    }
}

/// Probe an affine matrix-valued function at 0 and at the unit vectors.
pub fn probe_affine(nvars: usize, f: impl Fn(&[f64]) -> Result<Vec<(String, Matrix)>>) -> Result<Vec<AffineMap>> {
    let mut x = vec![0.0; nvars];
    let base = f(&x)?;
    let mut maps: Vec<AffineMap> = base
        .into_iter()
        .map(|(name, g0)| AffineMap { name, g0, terms: Vec::new() })
        .collect();
    for i in 0..nvars {
        x[i] = 1.0;
        let gi = f(&x)?;
        x[i] = 0.0;
        for (map, (_, g)) in maps.iter_mut().zip(gi) {
            let a = &g - &map.g0;
            if a.max_abs() != 0.0 {
                map.terms.push((i, a));
            }
        }
    }
    Ok(maps)
}

#[derive(Debug, Clone)]
pub struct BarrierOptions {
    /// Success requires worst eigenvalue t < −margin.
    pub margin: f64,
    /// Stop as soon as t < −stop_margin (≥ margin, to land inside the feasible set).
    pub stop_margin: f64,
    pub max_iters: usize,
    /// Radius of the norm ball bounding x.
    pub radius: f64,
    pub ridge: f64,
    pub beta0: f64,
    pub beta_growth: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions {
            margin: 1e-6,
            stop_margin: 1e-5,
            max_iters: 500,
            radius: 1e3,
            ridge: 1e-10,
            beta0: 1.0,
            beta_growth: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    /// Best worst eigenvalue reached so far.
    pub t: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Feasible,
    Infeasible(InfeasibleReason),
}

#[derive(Debug, Clone)]
pub struct BarrierResult {
    pub x: Vec<f64>,
    pub t: f64,
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
    /// Lower bound on the optimal t from the last centered point.
    pub lower_bound: f64,
}

/// Worst violation over all maps.
pub fn worst_violation(maps: &[AffineMap], x: &[f64]) -> Result<f64> {
    let mut w = f64::NEG_INFINITY;
    for m in maps {
        w = w.max(m.violation(x)?);
    }
    Ok(w)
}

struct Barrier<'a> {
    maps: &'a [AffineMap],
    nv: usize,
    r2: f64,
}

impl Barrier<'_> {
    /// Cholesky factors of each G_c(x) + tI; None outside the domain.
    fn factors(&self, y: &[f64]) -> Option<Vec<Matrix>> {
        let (x, t) = (&y[..self.nv], y[self.nv]);
        if x.iter().map(|v| v * v).sum::<f64>() >= self.r2 {
            return None;
        }
        let mut out = Vec::with_capacity(self.maps.len());
        for m in self.maps {
            let mut g = m.eval(x);
            for k in 0..g.rows() {
                g[(k, k)] += t;
            }
            out.push(g.symmetric_part().cholesky()?);
        }
        Some(out)
    }

    fn value(&self, y: &[f64], beta: f64) -> Option<f64> {
        let ls = self.factors(y)?;
        let x = &y[..self.nv];
        let mut f = beta * y[self.nv];
        for l in &ls {
            for k in 0..l.rows() {
                f -= 2.0 * l[(k, k)].ln();
            }
        }
        f -= (self.r2 - x.iter().map(|v| v * v).sum::<f64>()).ln();
        Some(f)
    }

    /// Gradient and Hessian in y = (x, t).
    fn derivatives(&self, y: &[f64], beta: f64, ls: &[Matrix]) -> (Vec<f64>, Matrix) {
        let nv = self.nv;
        let dim = nv + 1;
        let mut g = vec![0.0; dim];
        let mut h = Matrix::zeros(dim, dim);
        g[nv] = beta;
        for (m, l) in self.maps.iter().zip(ls) {
            let li = lower_inverse(l);
            // C = L⁻¹ L⁻ᵀ, B_i = L⁻¹ A_i L⁻ᵀ
            let c = &li * &li.transpose();
            let bs: Vec<(usize, Matrix)> = m
                .terms
                .iter()
                .map(|(i, a)| {
                    let w = forward_substitute(l, a);
                    (*i, forward_substitute(l, &w.transpose()))
                })
                .collect();
            g[nv] -= c.trace();
            h[(nv, nv)] += frob_inner(&c, &c);
            for (p, (i, bi)) in bs.iter().enumerate() {
                g[*i] -= bi.trace();
                let hc = frob_inner(bi, &c);
                h[(*i, nv)] += hc;
                h[(nv, *i)] += hc;
                for (j, bj) in bs.iter().skip(p) {
                    let v = frob_inner(bi, bj);
                    h[(*i, *j)] += v;
                    if i != j {
                        h[(*j, *i)] += v;
                    }
                }
            }
        }
        let x = &y[..nv];
        let s = self.r2 - x.iter().map(|v| v * v).sum::<f64>();
        for i in 0..nv {
            g[i] += 2.0 * x[i] / s;
            h[(i, i)] += 2.0 / s;
            for j in 0..nv {
                h[(i, j)] += 4.0 * x[i] * x[j] / (s * s);
            }
        }
        (g, h)
    }
}

fn frob_inner(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

/// Solve (H + ρI) d = −g by Cholesky, raising ρ if the factorization fails.
fn newton_direction(h: &Matrix, g: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let n = g.len();
    let scale = (0..n).map(|k| h[(k, k)].abs()).fold(0.0, f64::max).max(1.0);
    let mut rho = ridge * scale;
    for _ in 0..12 {
        let mut hr = h.clone();
        for k in 0..n {
            hr[(k, k)] += rho;
        }
        if let Some(l) = hr.cholesky() {
            let rhs = Matrix::column(&g.iter().map(|v| -v).collect::<Vec<_>>());
            let w = forward_substitute(&l, &rhs);
            let d = back_substitute(&l, &w);
            if d.iter().all(|v| v.is_finite()) {
                return Ok(d);
            }
        }
        rho = (rho * 100.0).max(1e-12);
    }
    Err(Error::SolverBreakdown("Newton system not positive definite".into()))
}

/// Solve Lᵀ d = w.
fn back_substitute(l: &Matrix, w: &Matrix) -> Vec<f64> {
    let n = l.rows();
    let mut d = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = w[(i, 0)];
        for k in i + 1..n {
            s -= l[(k, i)] * d[k];
        }
        d[i] = s / l[(i, i)];
    }
    d
}

/// Damped Newton on the log-det barrier along the central path in β.
pub fn minimize_max_eigenvalue(maps: &[AffineMap], x0: &[f64], opts: &BarrierOptions) -> Result<BarrierResult> {
    let nv = x0.len();
    let bar = Barrier {
        maps,
        nv,
        r2: opts.radius * opts.radius,
    };
    let theta: f64 = maps.iter().map(|m| m.order() as f64).sum::<f64>() + 1.0;
    let t_true0 = worst_violation(maps, x0)?;
    let mut y: Vec<f64> = x0.to_vec();
    y.push(t_true0.max(0.0) + 1.0);
    let mut best_t = t_true0;
    let mut best_x = x0.to_vec();
    let mut records = vec![TraceRecord { iter: 0, t: best_t, step_norm: 0.0 }];
    let mut iters = 0;
    let mut beta = opts.beta0;
    let mut lower_bound = f64::NEG_INFINITY;
    let finish = |x: Vec<f64>, t: f64, records: Vec<TraceRecord>, reason: Option<InfeasibleReason>, lb: f64| {
        let termination = if t < -opts.margin {
            Termination::Feasible
        } else {
            Termination::Infeasible(reason.unwrap_or(InfeasibleReason::Converged))
        };
        Ok(BarrierResult {
            x,
            t,
            records,
            termination,
            lower_bound: lb,
        })
    };
    if best_t < -opts.stop_margin {
        return finish(best_x, best_t, records, None, lower_bound);
    }
    loop {
        // Centering at the current β.
        loop {
            if iters >= opts.max_iters {
                return finish(best_x, best_t, records, Some(InfeasibleReason::MaxIters), lower_bound);
            }
            let ls = bar
                .factors(&y)
                .ok_or_else(|| Error::SolverBreakdown("iterate left the barrier domain".into()))?;
            let (g, h) = bar.derivatives(&y, beta, &ls);
            let d = newton_direction(&h, &g, opts.ridge)?;
            let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            let dec2 = -slope;
            if dec2 / 2.0 < 1e-9 {
                break;
            }
            let f0 = bar.value(&y, beta).expect("current iterate inside domain");
            let mut s = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a + s * b).collect();
                if let Some(f1) = bar.value(&trial, beta) {
                    if f1 <= f0 + 0.25 * s * slope {
                        accepted = Some(trial);
                        break;
                    }
                }
                s *= 0.5;
            }
            let Some(next) = accepted else {
                // No progress possible at this β: treat as centered.
                break;
            };
            let step_norm = s * d.iter().map(|v| v * v).sum::<f64>().sqrt();
            y = next;
            iters += 1;
            let tt = worst_violation(maps, &y[..nv])?;
            if tt < best_t {
                best_t = tt;
                best_x = y[..nv].to_vec();
            }
            records.push(TraceRecord { iter: iters, t: best_t, step_norm });
            if best_t < -opts.stop_margin {
                return finish(best_x, best_t, records, None, lower_bound);
            }
        }
        let gap = theta / beta;
        let t = y[nv];
        lower_bound = lower_bound.max(t - gap);
        log::debug!("centered: beta {beta:.3e}, t {t:.6e}, lower bound {lower_bound:.6e}, best {best_t:.6e}, iters {iters}");
        if lower_bound > -opts.margin {
            return finish(best_x, best_t, records, Some(InfeasibleReason::Certified), lower_bound);
        }
        if gap < 1e-8 * (1.0 + t.abs()) {
            return finish(best_x, best_t, records, Some(InfeasibleReason::Converged), lower_bound);
        }
        beta *= opts.beta_growth;
    }
}
