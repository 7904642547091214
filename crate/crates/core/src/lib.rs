//! Quantum estimation geometry of a quasi-free fermion chain with pair creation.
//!
//! The chain `H_J = -J sum (c_i^+ c_{i+1} + gamma c_i^+ c_{i+1}^+ + h.c.) - 2h sum n_i`
//! is treated as a one-parameter statistical model in the hopping `J`.
//! The crate computes its quantum Fisher information (QFI) and symmetric
//! logarithmic derivative (SLD) in ground and thermal states, runs
//! finite-size scaling analyses around the critical line `h = J`, and
//! simulates maximum-likelihood estimation with SLD measurements.
//!
//! Every numeric routine is generic over [`Real`] (`f32`, `f64`); the
//! aliases at the crate root fix the scalar to `f64`.
//!
//! ```
//! use qcrit::{qfi_zero_t, Params};
//!
//! let p = Params::ground(1.0, 1.0, 1.0, 4).unwrap();
//! let report = qfi_zero_t(&p).unwrap();
//! assert!((report.value - 0.25).abs() < 1e-12);
//! ```

pub mod densops;
pub mod error;
pub mod estimate;
pub mod model;
pub mod optimize;
pub mod qfi;
pub mod quadrature;
pub mod regression;
pub mod scalar;
pub mod scaling;
pub mod sld;

pub use densops::{
    bures_from_derivative, bures_metric, chernoff_distance, ed_oracle, lyapunov_residual,
    pure_qfi_sum, pure_sld, pure_sld_eigenvalue, qfi_from_sld, reparametrized_qfi,
    sld_from_spectral, CMatrix, DerivativeFamily, FdScheme, SpectralDensity,
};
pub use error::{Error, Result};
pub use estimate::{
    crb_report, ml_estimate, outcome_distribution, sample_run, two_stage_run, CrbSummary,
    EstimationRun, OutcomeTable, SampleCounts,
};
pub use model::{block_hamiltonian, block_state, momentum_grid, Beta, Mode, ModelParams};
pub use qfi::{
    qfi_critical_expansion, qfi_exact, qfi_low_t_leading, qfi_thermal_exact, qfi_thermal_integral,
    qfi_zero_t, specific_heat, IntegralForm, QfiMethod, QfiReport, CATALAN,
};
pub use scalar::Real;
pub use scaling::{
    extensivity_probe, pseudo_critical_point, scaling_collapse, shift_exponent, ScalingFit,
};
pub use sld::{
    decay_classify, sld_dense, sld_full, sld_momentum, sld_real_space, Decay, SldOperator,
};

pub type Params = ModelParams<f64>;
pub type Mode64 = model::Mode<f64>;
pub type Density = SpectralDensity<f64>;
pub type Report = QfiReport<f64>;
pub type Sld = SldOperator<f64>;
pub type Fit = ScalingFit<f64>;
pub type Run = EstimationRun<f64>;
