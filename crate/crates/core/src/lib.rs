//! Spin-1/2 geometric-phase simulator.
//!
//! The crate models a conduction-electron spin driven by magnetic-field
//! pulses (real or optically induced through the ac Stark effect), extracts
//! Aharonov–Anandan and Berry phases from the simulated evolution, and maps
//! the final spin state onto a Faraday-rotation observable.
//!
//! Modules, bottom-up:
//!
//! * [`qstate`]: density matrices, pure states, unitaries, Bloch vectors.
//! * [`pulse`]: Zeeman Hamiltonian, pulse propagators, the two-π-pulse protocol.
//! * [`geophase`]: phase decomposition, geometric gate, Berry loops, spin echo.
//! * [`stark`]: four-level ac Stark shifts and the equivalent effective field.
//! * [`faraday`]: probe-direction magnetization and interference sweeps.
//! * [`harness`]: configuration, feasibility checks, experiment runs, reports.
//!
//! All matrices use the ordered basis `(|1⟩, |0⟩)` = (spin-up, spin-down).
//! Units are tesla, picoseconds and meV throughout.

pub mod constants;
pub mod error;
pub mod faraday;
pub mod format;
pub mod geophase;
pub mod harness;
pub mod pulse;
pub mod qstate;
pub mod stark;

pub use constants::{HBAR, MU_B};
pub use error::{Error, Result};
pub use faraday::{InterferencePattern, ProbeGeometry};
pub use geophase::{GeometricGate, PhaseDecomposition, Trajectory};
pub use pulse::{FieldPulse, LoopPath, ParametricLoop, PulseSequence};
pub use qstate::{BlochVector, DensityMatrix, PureState, SpinOperator, Unitary2};
pub use stark::{LevelScheme, Polarization, StarkShifts, TippingPulse};
