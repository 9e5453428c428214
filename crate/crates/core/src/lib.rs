//! Optimal control scheduling for discrete-time linear network dynamics
//! `x(k+1) = A x(k) + B(k) u(k)`.
//!
//! The kernels are generic over the floating-point [`Scalar`] (`f32` or
//! `f64`); the `*64` aliases below fix double precision, which the analysis
//! thresholds are calibrated for.

// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod communicability;
pub mod error;
pub mod gramian;
pub mod linalg;
pub mod manipulation;
pub mod netgen;
pub mod network;
pub mod scalar;
pub mod scheduling;

pub use communicability::{
    asymptotic_communicability, dominance, profile, scale_heterogeneity_test,
    AsymptoticCommunicability, CommunicabilityProfile, DominanceReport, GlobalScale,
};
pub use error::{Error, Result};
pub use gramian::{
    build_input_matrix, gramian, metric, min_energy_control, reachability_ellipsoid, simulate,
    Gramian, MetricKind, MinEnergyControl, ReachabilityEllipsoid,
};
pub use manipulation::{
    constrained_tvcs_trace, find_min_manipulation, manipulation_sweep, DirectionTemplates,
    ManifestProblem, ManipulationResult, ManipulationSweepConfig, ManipulationSweepRow,
};
pub use netgen::{
    generate, induction, normalize_spectral, transmission, Family, GeneratorConfig,
    RawConnectivity, WeightMode,
};
pub use network::{ControlSchedule, NetworkMatrix, PowerCache};
pub use scalar::Scalar;
pub use scheduling::{
    chi_report, chi_vs_horizon, exhaustive_schedule, greedy_schedule, tics_trace, tvcs_trace,
    ChiReport, ClassLabel, HorizonSweep, ScheduleSolution, Solver,
};

pub type NetworkMatrix64 = NetworkMatrix<f64>;
pub type NetworkMatrix32 = NetworkMatrix<f32>;
pub type Gramian64 = Gramian<f64>;
pub type CommunicabilityProfile64 = CommunicabilityProfile<f64>;
pub type ChiReport64 = ChiReport<f64>;
pub type ManipulationResult64 = ManipulationResult<f64>;
pub type RawConnectivity64 = RawConnectivity<f64>;
