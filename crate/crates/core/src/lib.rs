//! Low-rank tensor recovery from linear observations under l2, l1 and KL
//! losses.
//!
//! The solver alternates an ADMM splitting of the loss with a single
//! majorization-minimization step whose inner problem is a plain
//! least-squares fit of a decomposition model, so any model with an ALS
//! update plugs in unchanged. CP, Tucker, tensor-train and tensor-ring models
//! are provided, together with identity, mask, blur, downsampling and dense
//! observation operators.

pub mod config;
pub mod error;
pub mod experiment;
pub mod image_io;
pub mod linalg;
pub mod linops;
pub mod losses;
pub mod models;
pub mod solver;
pub mod tensor;

pub use error::{GtdError, Result};
pub use models::{als_sweep, init_params, project, reconstruct, ModelKind, ModelSpec, Ranks, TdParams};
pub use tensor::{khatri_rao, DenseTensor, Matrix};
pub use linops::{max_eigenvalue, Blur, DenseOperator, Downsample, Identity, LinearOperator, Mask, SpectralBound};
pub use losses::{eval_loss, loss_gradient, soft_threshold, y_update, LossKind};
pub use solver::{
    admm_mm_solve, bcd_solve, gamma_for, mm_x_step, objective, pg_solve, AdmmMm, Bcd, IterRecord, IterativeSolver,
    ProjectedGradient, Solution, SolverConfig, SolverState, SolverTrace,
};
pub use config::ExperimentConfig;
pub use experiment::{run_experiment, synthesize_problem, Problem, SummaryRow};
pub use image_io::{load_image_ppm, write_image_ppm};
