//! Physical constants and shared numerical tolerances.
//!
//! Units: tesla, picoseconds, meV.

/// Bohr magneton in meV/T.
pub const MU_B: f64 = 5.7883818060e-2;

/// Reduced Planck constant in meV·ps.
pub const HBAR: f64 = 0.6582119569;

/// Default absolute tolerance for exact two-level algebra.
pub const EXACT_TOL: f64 = 1e-12;

/// Tolerance for quantities built from products of many propagators.
pub const PROPAGATOR_TOL: f64 = 1e-10;

/// Slack on `|r| ≤ 1` accepted when building a state from a Bloch vector.
pub const BLOCH_SLACK: f64 = 1e-9;

/// Hamiltonian convention attached to every reported phase.
pub const CONVENTION: &str =
    "H=+(g*mu_B/2)*sigma.B, g>0; basis (|1>,|0>); |+>=(|1>+i|0>)/sqrt2; phases=arg<psi0|psi(T)>";

/// Reduce an angle to the half-open interval (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = x.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Circular distance between two angles, in [0, π].
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}
