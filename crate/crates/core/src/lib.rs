//! Simulation and statistics for generalized Anderson models whose random
//! potential couples iid variables to a family of rank-`m` projections.
//!
//! The crate is organized bottom-up:
//!
//! * [`lattice`], [`disorder`] and [`hamiltonian`] describe the random
//!   operator family and assemble finite-volume restrictions as
//!   [`SymBandMatrix`] values.
//! * [`spectral`] counts eigenvalues in windows through the Sylvester
//!   inertia of a banded `LDLᵀ` factorization, with a dense eigensolver as
//!   an independent oracle.
//! * [`engine`] runs reproducible Monte Carlo campaigns for the local
//!   counting statistics, block processes, density of states and
//!   Wegner/Minami scaling tables.
//! * [`levy`] fits and checks compound-Poisson laws with integer jumps.

pub mod band;
pub mod config;
pub mod disorder;
pub mod engine;
pub mod error;
pub mod hamiltonian;
pub mod lattice;
pub mod levy;
pub mod pmf;
pub mod spectral;
pub mod stats;

pub use band::SymBandMatrix;
pub use config::ModelConfig;
pub use disorder::{sample_disorder, DisorderLaw, DisorderSample};
pub use engine::{
    estimate_dos, BlockRun, BlockScheme, DosPoint, IdsPoint, McEngine, ScalingRow, ScalingTable,
};
pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, HamiltonianTemplate};
pub use lattice::{projection_blocks, LatticeBox, ModelSpec, Variant};
pub use levy::{
    block_sum_estimator, char_fn_distance, default_t_grid, fit_weights, panjer_pmf, poisson_index,
    BlockSumEstimate, LevyWeights,
};
pub use pmf::EmpiricalPmf;
pub use spectral::{count_in, count_leq, eigenvalues_dense, ldl_inertia, EnergyWindow, Inertia};
