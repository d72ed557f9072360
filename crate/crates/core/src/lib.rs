//! Exactly solvable kicked infinite-range Ising chain.
//!
//! The Floquet operator `exp(-iJτ Σ σ^z σ^z) exp(-iτ Σ σ^y)` restricted to the
//! permutation-symmetric sector is diagonal in the parity basis whenever
//! `τ = mπ/2`. This crate builds those diagonal blocks with exact phase
//! arithmetic, evolves coherent states, and computes entanglement and
//! spectral diagnostics. A brute-force full-space simulator is included in
//! [`oracle`] for cross-checks at small sizes.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod dd;
pub mod dynamics;
pub mod eigenstate;
pub mod error;
pub mod floquet;
pub mod kicked_top;
pub mod oracle;
pub mod spectral;
pub mod symmetric;
pub mod wigner;

pub use coupling::CouplingSpec;
pub use dd::DoubleDouble;
pub use dynamics::{
    detect_period, entropy_series, evolve_parity, linear_entropy, single_qubit_rdm, von_neumann_entropy,
    EntropySeries, SingleQubitRdm,
};
pub use eigenstate::{
    average_ee_ratio, floquet_eigenstates, linear_fit, scaling_series, unitary_eigen, EigenstateEnsemble,
    LinearFit, PerturbParam, Perturbation, ScalingPoint, ScalingSeries,
};
pub use error::{Error, ErrorCategory, Result};
pub use floquet::{
    diagonal_blocks, general_tau_blocks, operator_period, predicted_period, predicted_projective_period, Block,
    FloquetBlocks, PhaseTable, Sector, Tau,
};
pub use kicked_top::{classical_step, lle_estimate, map_params, BlochPoint, LleMode, TopParams};
pub use spectral::{
    eigenphases, kth_ratios, kth_spacings, ks_distance, mean_adjacent_ratio, perturbed_rational_spectrum,
    reference_cdf, reference_pdf, unfold, PhaseSpectrum, SampleKind, SectorChoice, SpacingSamples, Unfolding,
};
pub use symmetric::{
    bipartite_schmidt, bipartite_schmidt_truncated, coherent_dicke, from_parity, log_binomial, to_parity,
    CoherentParams, ParityState, SchmidtSpectrum, SymmetricState, C64,
};
