//! Assembly of the analysis, synthesis and constant-delay matrix inequalities, gain
//! recovery, the switching constant μ, the envelope constants and the barred/un-barred maps.

mod assembly;
mod report;
mod solution;
mod transforms;

pub use assembly::{
    assemble_analysis, assemble_closed_loop_analysis, assemble_for, assemble_synthesis, assemble_theorem2, synthesis_blocks,
    theorem2_blocks, AnalysisProblem, AssembledLmi, DelayWeights, LmiBlocks, SynthesisInput,
};
pub use report::{feasibility_report, mode_constraints, psi_names, spd_blocks, BlockRecord, FeasibilityReport, ModeFeasibility, PdBlock};
pub use solution::{Formulation, ModeSolution, SynthesisSolution};
pub use transforms::{bar_certificate, mu_and_tau, recover_gains, store_gains, tau_star, unbar_certificate, zeta_envelope, ZetaEnvelope};
