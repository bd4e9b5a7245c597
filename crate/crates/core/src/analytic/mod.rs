//! Reflection factor, Laplace symbol, propagation kernel, the approximated
//! region-wise wavefunctions and the sub-packet delay times.

mod kernel;
mod reflection;
mod timing;
mod wave;

pub use kernel::{kernel_k, kernel_u0, KernelValue};
pub use reflection::{phase_linearization, reflection_factor, rho, PhaseLinearization, ReflectionFactor};
pub use timing::{
    conservation_check, delay_times, distinguishability_ratio, hartmann_time, Conservation, PacketTermSummary,
};
pub use wave::{
    centroid, evaluate_field, free_evolution, Direction, Evaluated, FieldSource, TransmittedMode, Truncation,
    TruncationRule, TunnelingModel, Warnings,
};
