//! Magnetic-field pulses and their propagators.
//!
//! The spin couples to the field through `H = +(g μ_B / 2) σ·B`. A constant
//! field applied for `t` rotates the spin by `φ = g μ_B |B| t / ħ` about
//! `B/|B|`, so the propagator is the exact axis-angle exponential. Fields
//! that vary along a closed loop are integrated as a product of such
//! exponentials, with the field sampled at step midpoints.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::constants::{HBAR, MU_B};
use crate::error::{Error, Result};
use crate::geophase::Trajectory;
use crate::qstate::{PureState, SpinOperator, Unitary2};

/// Zeeman Hamiltonian `(g μ_B / 2) σ·B` in meV.
pub fn hamiltonian(field: &Vector3<f64>, g_factor: f64) -> SpinOperator {
    SpinOperator::sigma_dot(field).scaled(0.5 * g_factor * MU_B)
}

/// Signed rotation angle `g μ_B |B| t / ħ` produced by a constant field.
pub fn rotation_angle(field_magnitude: f64, duration: f64, g_factor: f64) -> f64 {
    g_factor * MU_B * field_magnitude * duration / HBAR
}

/// `exp(−i H t / ħ)` for a constant field.
pub fn propagator_const(field: &Vector3<f64>, duration: f64, g_factor: f64) -> Unitary2 {
    let magnitude = field.norm();
    if magnitude == 0.0 || duration == 0.0 {
        return Unitary2::identity();
    }
    let axis = field / magnitude;
    Unitary2::rotation(&axis, rotation_angle(magnitude, duration, g_factor))
}

/// Shape of a closed path of field directions, parametrized by `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoopPath {
    /// Direction held fixed; encloses no solid angle.
    Fixed { direction: Vector3<f64> },
    /// Cone about `+z` at the given polar angle, azimuth `0 → 2π`.
    Cone { polar_angle: f64 },
    /// Out along the `x`–`z` meridian from `polar_angle` to
    /// `polar_angle + swing` and back again; encloses no solid angle.
    BackAndForth { polar_angle: f64, swing: f64 },
}

impl LoopPath {
    fn direction(&self, s: f64) -> Vector3<f64> {
        match *self {
            LoopPath::Fixed { direction } => direction.normalize(),
            LoopPath::Cone { polar_angle } => {
                let (st, ct) = polar_angle.sin_cos();
                let (sp, cp) = (TAU * s).sin_cos();
                Vector3::new(st * cp, st * sp, ct)
            }
            LoopPath::BackAndForth { polar_angle, swing } => {
                let theta = polar_angle + swing * (PI * s).sin().powi(2);
                let (st, ct) = theta.sin_cos();
                Vector3::new(st, 0.0, ct)
            }
        }
    }
}

/// A field of fixed magnitude whose direction traces a closed loop over
/// `total_time`, integrated in `steps` piecewise-constant steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricLoop {
    pub path: LoopPath,
    /// Field magnitude in tesla. Negative values point the field against
    /// the path direction.
    pub magnitude: f64,
    /// Picoseconds.
    pub total_time: f64,
    pub steps: usize,
    /// Traverse the path from `s = 1` back to `s = 0`.
    pub reversed: bool,
}

impl ParametricLoop {
    pub fn new(path: LoopPath, magnitude: f64, total_time: f64, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::StepCount { steps });
        }
        if !(total_time.is_finite() && total_time >= 0.0) {
            return Err(Error::Domain {
                name: "total_time",
                value: total_time,
                domain: "[0, inf)",
            });
        }
        if !magnitude.is_finite() {
            return Err(Error::Domain {
                name: "magnitude",
                value: magnitude,
                domain: "finite",
            });
        }
        if let LoopPath::Fixed { direction } = path {
            if !(direction.norm() > 0.0) {
                return Err(Error::ZeroField);
            }
        }
        Ok(Self {
            path,
            magnitude,
            total_time,
            steps,
            reversed: false,
        })
    }

    pub fn cone(polar_angle: f64, magnitude: f64, total_time: f64, steps: usize) -> Result<Self> {
        Self::new(LoopPath::Cone { polar_angle }, magnitude, total_time, steps)
    }

    /// Unit direction at loop parameter `s`.
    pub fn direction(&self, s: f64) -> Vector3<f64> {
        let s = if self.reversed { 1.0 - s } else { s };
        self.path.direction(s)
    }

    pub fn field(&self, s: f64) -> Vector3<f64> {
        self.direction(s) * self.magnitude
    }

    /// Same path traversed backwards.
    pub fn reversed(&self) -> Self {
        Self {
            reversed: !self.reversed,
            ..*self
        }
    }

    /// Backwards traversal with the field inverted: undoes `self` exactly.
    pub fn time_reversed(&self) -> Self {
        Self {
            magnitude: -self.magnitude,
            ..self.reversed()
        }
    }

    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::StepCount { steps });
        }
        Ok(Self { steps, ..*self })
    }

    pub fn with_total_time(&self, total_time: f64) -> Self {
        Self { total_time, ..*self }
    }

    pub fn with_magnitude(&self, magnitude: f64) -> Self {
        Self { magnitude, ..*self }
    }

    /// Largest deviation from closure and from unit length over the
    /// integration midpoints.
    pub fn closure_defect(&self) -> f64 {
        let ends = (self.direction(0.0) - self.direction(1.0)).norm();
        (0..self.steps)
            .map(|k| (self.direction(self.midpoint(k)).norm() - 1.0).abs())
            .fold(ends, f64::max)
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    fn midpoint(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.steps as f64
    }

    /// Field held constant during step `k`.
    pub fn step_field(&self, k: usize) -> Vector3<f64> {
        self.field(self.midpoint(k))
    }
}

/// One segment of a pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldPulse {
    /// Rectangular pulse: `field` in tesla for `duration` ps.
    Constant { field: Vector3<f64>, duration: f64 },
    Parametric(ParametricLoop),
}

impl FieldPulse {
    pub fn constant(field: Vector3<f64>, duration: f64) -> Result<Self> {
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::Domain {
                name: "duration",
                value: duration,
                domain: "[0, inf)",
            });
        }
        if !field.iter().all(|b| b.is_finite()) {
            return Err(Error::InvalidValue {
                what: "field",
                kind: "pulse field",
                reason: "non-finite component".into(),
            });
        }
        Ok(FieldPulse::Constant { field, duration })
    }

    pub fn duration(&self) -> f64 {
        match self {
            FieldPulse::Constant { duration, .. } => *duration,
            FieldPulse::Parametric(l) => l.total_time,
        }
    }

    pub fn propagator(&self, g_factor: f64) -> Unitary2 {
        match self {
            FieldPulse::Constant { field, duration } => {
                propagator_const(field, *duration, g_factor)
            }
            FieldPulse::Parametric(l) => parametric_propagator(l, g_factor),
        }
    }
}

/// Ordered list of pulses sharing one g-factor.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pulses: Vec<FieldPulse>,
    g_factor: f64,
}

impl PulseSequence {
    pub fn new(g_factor: f64) -> Self {
        Self {
            pulses: Vec::new(),
            g_factor,
        }
    }

    pub fn from_pulses(pulses: Vec<FieldPulse>, g_factor: f64) -> Self {
        Self { pulses, g_factor }
    }

    pub fn push(&mut self, pulse: FieldPulse) -> &mut Self {
        self.pulses.push(pulse);
        self
    }

    pub fn pulses(&self) -> &[FieldPulse] {
        &self.pulses
    }

    pub fn g_factor(&self) -> f64 {
        self.g_factor
    }

    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(FieldPulse::duration).sum()
    }
}

/// Rectangular pulse with field `(bx, 0, bz)` lasting exactly one π rotation.
pub fn pi_pulse(bx: f64, bz: f64, g_factor: f64) -> Result<FieldPulse> {
    if g_factor == 0.0 {
        return Err(Error::ZeroGFactor);
    }
    let field = Vector3::new(bx, 0.0, bz);
    let magnitude = field.norm();
    if magnitude == 0.0 {
        return Err(Error::ZeroField);
    }
    if !magnitude.is_finite() {
        return Err(Error::InvalidValue {
            what: "field",
            kind: "pi pulse",
            reason: format!("magnitude of ({bx}, 0, {bz}) is not finite"),
        });
    }
    let duration = PI * HBAR / (g_factor.abs() * MU_B * magnitude);
    FieldPulse::constant(field, duration)
}

/// Two π-pulses about the mirrored axes `(bx, 0, bz)` then `(−bx, 0, bz)`,
/// switched instantaneously.
pub fn aa_protocol(bx: f64, bz: f64, g_factor: f64) -> Result<PulseSequence> {
    let first = pi_pulse(bx, bz, g_factor)?;
    let second = pi_pulse(-bx, bz, g_factor)?;
    Ok(PulseSequence::from_pulses(vec![first, second], g_factor))
}

/// Time-ordered product `U_n ⋯ U_2 U_1`.
pub fn composite(seq: &PulseSequence) -> Unitary2 {
    seq.pulses()
        .iter()
        .fold(Unitary2::identity(), |acc, p| p.propagator(seq.g_factor()) * acc)
}

/// Product of the per-step propagators of a loop.
pub fn parametric_propagator(lp: &ParametricLoop, g_factor: f64) -> Unitary2 {
    let dt = lp.dt();
    (0..lp.steps).fold(Unitary2::identity(), |acc, k| {
        propagator_const(&lp.step_field(k), dt, g_factor) * acc
    })
}

/// Integrates a loop from `initial`, recording the state after every step.
pub fn propagate_parametric(
    lp: &ParametricLoop,
    g_factor: f64,
    initial: &PureState,
) -> Result<(Unitary2, Trajectory)> {
    if lp.steps < 2 {
        return Err(Error::StepCount { steps: lp.steps });
    }
    let mut tracer = Tracer::new(*initial, g_factor);
    tracer.run_loop(lp);
    Ok(tracer.finish())
}

/// Runs a sequence from `initial`, subdividing each rectangular pulse into
/// `steps_per_pulse` exact sub-steps so the trajectory is finely sampled.
/// Parametric pulses use their own step count.
pub fn trace_sequence(
    seq: &PulseSequence,
    initial: &PureState,
    steps_per_pulse: usize,
) -> Result<(Unitary2, Trajectory)> {
    if steps_per_pulse < 1 {
        return Err(Error::StepCount {
            steps: steps_per_pulse,
        });
    }
    let mut tracer = Tracer::new(*initial, seq.g_factor());
    for pulse in seq.pulses() {
        match pulse {
            FieldPulse::Constant { field, duration } => {
                tracer.run_constant(field, *duration, steps_per_pulse)
            }
            FieldPulse::Parametric(lp) => tracer.run_loop(lp),
        }
    }
    Ok(tracer.finish())
}

/// Accumulates the propagator and trajectory of piecewise-constant steps.
pub(crate) struct Tracer {
    g_factor: f64,
    time: f64,
    state: PureState,
    unitary: Unitary2,
    trajectory: Option<Trajectory>,
    initial: PureState,
}

impl Tracer {
    pub(crate) fn new(initial: PureState, g_factor: f64) -> Self {
        Self {
            g_factor,
            time: 0.0,
            state: initial,
            unitary: Unitary2::identity(),
            trajectory: None,
            initial,
        }
    }

    pub(crate) fn step(&mut self, field: &Vector3<f64>, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        let h = hamiltonian(field, self.g_factor);
        let u = propagator_const(field, dt, self.g_factor);
        self.advance(&u, h, dt);
    }

    fn advance(&mut self, u: &Unitary2, h: SpinOperator, dt: f64) {
        let traj = self
            .trajectory
            .get_or_insert_with(|| Trajectory::start(0.0, self.initial, h));
        self.time += dt;
        self.state = u.apply(&self.state);
        self.unitary = *u * self.unitary;
        traj.push_step(self.time, self.state, h);
    }

    pub(crate) fn run_constant(&mut self, field: &Vector3<f64>, duration: f64, steps: usize) {
        let dt = duration / steps as f64;
        if dt <= 0.0 {
            return;
        }
        let h = hamiltonian(field, self.g_factor);
        let u = propagator_const(field, dt, self.g_factor);
        for _ in 0..steps {
            self.advance(&u, h, dt);
        }
    }

    pub(crate) fn run_loop(&mut self, lp: &ParametricLoop) {
        let dt = lp.dt();
        for k in 0..lp.steps {
            self.step(&lp.step_field(k), dt);
        }
    }

    pub(crate) fn finish(self) -> (Unitary2, Trajectory) {
        let traj = self
            .trajectory
            .unwrap_or_else(|| Trajectory::start(0.0, self.initial, SpinOperator::zero()));
        (self.unitary, traj)
    }
}

/// `true` when `u` maps each of `a`, `b` onto itself up to phase, within `tol`.
pub fn is_diagonal_in(u: &Unitary2, a: &PureState, b: &PureState, tol: f64) -> bool {
    u.element(a, b).norm() < tol && u.element(b, a).norm() < tol
}
