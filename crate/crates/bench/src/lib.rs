//! Fixed workloads shared by the benchmarks.

use spinphase::geophase::{self, AaMeasurement};
use spinphase::pulse::{composite, aa_protocol};
use spinphase::{ParametricLoop, Result, Unitary2};

pub const G: f64 = 0.864;

/// Composite of the two-π-pulse protocol at `bx/bz = ratio`.
pub fn aa_composite(ratio: f64) -> Result<Unitary2> {
    Ok(composite(&aa_protocol(ratio, 1.0, G)?))
}

/// Full sampled run with phase decomposition.
pub fn aa_traced(ratio: f64, steps: usize) -> Result<AaMeasurement> {
    geophase::aa_phase_measured_with(ratio, 1.0, G, steps)
}

/// Cone loop at `π/3`, 1 T, g = 2.
pub fn cone_loop(steps: usize) -> Result<ParametricLoop> {
    ParametricLoop::cone(std::f64::consts::FRAC_PI_3, 1.0, 1.6e5, steps)
}
