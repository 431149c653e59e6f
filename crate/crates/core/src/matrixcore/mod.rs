//! Dense real matrix numerics: products, inverses, symmetric eigenvalues, definiteness
//! tests, Schur-complement equivalence, congruence and block assembly.

mod block;
mod checks;
mod eigen;
mod matrix;
mod sym;

pub use block::BlockLayout;
pub use checks::{
    check_definiteness, congruence, schur_equivalence_check, Definiteness, DefinitenessReport, SchurReport,
    ANALYSIS_MARGIN, SYNTHESIS_MARGIN,
};
pub use matrix::{forward_substitute, lower_inverse, Matrix, SINGULAR_CONDITION};
pub use sym::{eig_extremes, sym_eigvals, SymMatrix};

/// Smallest μ with `a ⪯ μ b` for SPD `b`: the largest generalized eigenvalue of (a, b),
/// computed through the Cholesky whitening `L⁻¹ a L⁻ᵀ` with `b = L Lᵀ`.
pub fn generalized_max_eig(a: &Matrix, b: &Matrix) -> crate::Result<f64> {
    let l = b
        .cholesky()
        .ok_or_else(|| crate::Error::SingularBlock("generalized eigenproblem: right matrix not positive definite".into()))?;
    let y = forward_substitute(&l, a);
    let w = forward_substitute(&l, &y.transpose());
    let s = SymMatrix::symmetrize(&w)?;
    Ok(*s.eigvals()?.last().expect("nonempty"))
}
