//! Total, dynamic and geometric phases of cyclic spin evolutions.
//!
//! The total phase of a cyclic state is the Pancharatnam phase
//! `arg⟨ψ(0)|ψ(T)⟩`; the dynamic phase is `−(1/ħ)∫⟨ψ|H|ψ⟩dt`; the geometric
//! phase is their difference reduced to `(−π, π]`.

mod berry;
mod verify;

pub use berry::{berry_loop, spin_echo_sequence, spin_echo_with, Branch, EchoResult, LoopPhases};
pub use verify::{
    verify_aa_formula, verify_aa_formula_with, Verdict, VerificationReport, VerifyPoint,
};

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::constants::{wrap_phase, CONVENTION, HBAR, PROPAGATOR_TOL};
use crate::error::{Error, Result};
use crate::pulse::{aa_protocol, trace_sequence};
use crate::qstate::{sigma_y_eigenstates, Mat2, PureState, SpinOperator, Unitary2};

/// Default sub-steps per rectangular pulse when sampling a trajectory.
pub const DEFAULT_STEPS_PER_PULSE: usize = 2048;

/// Overlap magnitude below which an evolution is treated as non-cyclic.
pub const CYCLIC_OVERLAP_MIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDecomposition {
    /// Radians, in `(−π, π]`.
    pub total_phase: f64,
    /// Radians, unreduced.
    pub dynamic_phase: f64,
    /// `total − dynamic`, in `(−π, π]`.
    pub geometric_phase: f64,
    pub convention: String,
}

impl PhaseDecomposition {
    pub fn from_parts(total_phase: f64, dynamic_phase: f64) -> Self {
        Self {
            total_phase: wrap_phase(total_phase),
            dynamic_phase,
            geometric_phase: wrap_phase(total_phase - dynamic_phase),
            convention: CONVENTION.to_string(),
        }
    }
}

/// Sampled evolution record.
///
/// `hamiltonians[k]` is the Hamiltonian acting on the interval that ends at
/// `times[k]`; the first entry repeats the Hamiltonian of the first step.
/// With piecewise-constant fields this makes the dynamic-phase integral exact
/// across instantaneous field switches.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<PureState>,
    hamiltonians: Vec<SpinOperator>,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        states: Vec<PureState>,
        hamiltonians: Vec<SpinOperator>,
    ) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidValue {
            what: "sample lists",
            kind: "trajectory",
            reason,
        };
        if times.is_empty() || times.len() != states.len() || times.len() != hamiltonians.len() {
            return Err(invalid("lists must be nonempty and of equal length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("times must be strictly increasing".into()));
        }
        if let Some(psi) = states.iter().find(|s| (s.norm() - 1.0).abs() > PROPAGATOR_TOL) {
            return Err(invalid(format!("state norm {} differs from 1", psi.norm())));
        }
        Ok(Self {
            times,
            states,
            hamiltonians,
        })
    }

    pub(crate) fn start(t0: f64, state: PureState, hamiltonian: SpinOperator) -> Self {
        Self {
            times: vec![t0],
            states: vec![state],
            hamiltonians: vec![hamiltonian],
        }
    }

    pub(crate) fn push_step(&mut self, t: f64, state: PureState, step_hamiltonian: SpinOperator) {
        debug_assert!(t > *self.times.last().unwrap());
        self.times.push(t);
        self.states.push(state);
        self.hamiltonians.push(step_hamiltonian);
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn hamiltonians(&self) -> &[SpinOperator] {
        &self.hamiltonians
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial_state(&self) -> &PureState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &PureState {
        self.states.last().unwrap()
    }
}

/// `4·arctan(bx/bz)`, unreduced and reduced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AaFormula {
    pub unreduced: f64,
    pub reduced: f64,
    /// Set when `bz = 0` and the value is the `±2π` limit.
    pub limit_case: bool,
}

pub fn aa_phase_formula(bx: f64, bz: f64) -> Result<AaFormula> {
    if bz == 0.0 {
        if bx == 0.0 || !bx.is_finite() {
            return Err(Error::ZeroField);
        }
        let unreduced = 4.0 * FRAC_PI_2.copysign(bx);
        return Ok(AaFormula {
            unreduced,
            reduced: wrap_phase(unreduced),
            limit_case: true,
        });
    }
    let unreduced = 4.0 * (bx / bz).atan();
    Ok(AaFormula {
        unreduced,
        reduced: wrap_phase(unreduced),
        limit_case: false,
    })
}

/// Trapezoidal `−(1/ħ)∫⟨ψ|H|ψ⟩dt` over the trajectory.
pub fn dynamic_phase(traj: &Trajectory) -> f64 {
    let mut acc = 0.0;
    for k in 1..traj.len() {
        let h = &traj.hamiltonians[k];
        let dt = traj.times[k] - traj.times[k - 1];
        let e0 = h.expectation_pure(&traj.states[k - 1]);
        let e1 = h.expectation_pure(&traj.states[k]);
        acc += 0.5 * dt * (e0 + e1);
    }
    -acc / HBAR
}

/// Pancharatnam phase `arg⟨initial|final⟩`.
pub fn total_phase(initial: &PureState, fin: &PureState) -> Result<f64> {
    let overlap = initial.inner(fin);
    if overlap.norm() <= CYCLIC_OVERLAP_MIN {
        return Err(Error::NotCyclic {
            overlap: overlap.norm(),
        });
    }
    Ok(overlap.arg())
}

/// Phase decomposition of a finished trajectory.
pub fn decompose(traj: &Trajectory) -> Result<PhaseDecomposition> {
    let total = total_phase(traj.initial_state(), traj.final_state())?;
    Ok(PhaseDecomposition::from_parts(total, dynamic_phase(traj)))
}

/// Result of running the two-π-pulse protocol on `|+⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct AaMeasurement {
    pub phases: PhaseDecomposition,
    /// `arg` of the `|−⟩` diagonal element.
    pub minus_phase: f64,
    pub composite: Unitary2,
    /// Largest off-diagonal element in the `σ_y` eigenbasis.
    pub off_diagonal: f64,
    /// `bx = 0`: both pulses about the same axis.
    pub degenerate: bool,
    pub total_duration: f64,
}

pub fn aa_phase_measured(bx: f64, bz: f64, g_factor: f64) -> Result<AaMeasurement> {
    aa_phase_measured_with(bx, bz, g_factor, DEFAULT_STEPS_PER_PULSE)
}

pub fn aa_phase_measured_with(
    bx: f64,
    bz: f64,
    g_factor: f64,
    steps_per_pulse: usize,
) -> Result<AaMeasurement> {
    let seq = aa_protocol(bx, bz, g_factor)?;
    let (plus, minus) = sigma_y_eigenstates();
    let (u, traj) = trace_sequence(&seq, &plus, steps_per_pulse)?;
    let phases = decompose(&traj)?;
    let off_diagonal = u.element(&plus, &minus).norm().max(u.element(&minus, &plus).norm());
    Ok(AaMeasurement {
        phases,
        minus_phase: u.element(&minus, &minus).arg(),
        composite: u,
        off_diagonal,
        degenerate: bx == 0.0,
        total_duration: seq.total_duration(),
    })
}

/// Real rotation `[[cos γ, sin γ], [−sin γ, cos γ]]` in the `(|1⟩, |0⟩)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricGate {
    pub gamma: f64,
}

impl GeometricGate {
    pub fn unitary(&self) -> Unitary2 {
        let (s, c) = self.gamma.sin_cos();
        let m = Mat2::new(
            Complex64::from(c),
            Complex64::from(s),
            Complex64::from(-s),
            Complex64::from(c),
        );
        Unitary2::from_matrix_unchecked(m)
    }
}

pub fn geometric_gate(gamma: f64) -> Unitary2 {
    GeometricGate { gamma }.unitary()
}

/// Solid angle `2π(1 − cos θ_c)` enclosed by a cone of half-angle `θ_c`.
pub fn solid_angle_cone(theta_c: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta_c) {
        return Err(Error::Domain {
            name: "theta_c",
            value: theta_c,
            domain: "[0, pi]",
        });
    }
    Ok(TAU * (1.0 - theta_c.cos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{phase_distance, MU_B};
    use crate::faraday::{magnetization, mk_closed_form, ProbeGeometry};
    use crate::pulse::{hamiltonian, propagate_parametric, LoopPath, ParametricLoop};
    use crate::qstate::{evolve, mixed_initial};
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn formula_examples() {
        assert_eq!(aa_phase_formula(0.0, 1.0).unwrap().unreduced, 0.0);
        assert_abs_diff_eq!(aa_phase_formula(2.5, 2.5).unwrap().unreduced, PI, epsilon = 1e-15);
        let r = (PI / 8.0).tan();
        assert_abs_diff_eq!(aa_phase_formula(r, 1.0).unwrap().unreduced, PI / 2.0, epsilon = 1e-15);

        let lim = aa_phase_formula(1.0, 0.0).unwrap();
        assert!(lim.limit_case);
        assert_eq!(lim.unreduced, TAU);
        assert_eq!(aa_phase_formula(0.0, 0.0), Err(Error::ZeroField));
    }

    #[test]
    fn total_phase_examples() {
        let psi = PureState::along(&Vector3::new(0.2, 0.5, -0.3));
        assert_eq!(total_phase(&psi, &psi).unwrap(), 0.0);
        let shifted = PureState::normalized(psi.amplitudes() * Complex64::from_polar(1.0, PI / 3.0));
        assert_abs_diff_eq!(total_phase(&psi, &shifted).unwrap(), PI / 3.0, epsilon = 1e-14);
        let flipped = PureState::normalized(-psi.amplitudes());
        assert_abs_diff_eq!(total_phase(&psi, &flipped).unwrap().abs(), PI, epsilon = 1e-14);

        let err = total_phase(&PureState::up(), &PureState::down());
        assert!(matches!(err, Err(Error::NotCyclic { .. })));
    }

    #[test]
    fn dynamic_phase_examples() {
        // Stationary |1⟩ in a z field: −(g μ_B B / 2ħ) t.
        let (b, g, t) = (1.3, 2.0, 40.0);
        let lp = ParametricLoop::new(LoopPath::Fixed { direction: Vector3::z() }, b, t, 64).unwrap();
        let (_, traj) = propagate_parametric(&lp, g, &PureState::up()).unwrap();
        let expected = -(g * MU_B * b / (2.0 * HBAR)) * t;
        assert_abs_diff_eq!(dynamic_phase(&traj), expected, epsilon = 1e-12);

        let zero = ParametricLoop::new(LoopPath::Fixed { direction: Vector3::z() }, 0.0, t, 8).unwrap();
        let (_, traj) = propagate_parametric(&zero, g, &PureState::up()).unwrap();
        assert_eq!(dynamic_phase(&traj), 0.0);

        let m = aa_phase_measured(0.6, 1.1, 0.864).unwrap();
        assert!(m.phases.dynamic_phase.abs() < 1e-9);
    }

    #[test]
    fn trajectory_validation() {
        let psi = PureState::up();
        let h = SpinOperator::zero();
        assert!(Trajectory::new(vec![0.0, 0.0], vec![psi, psi], vec![h, h]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![psi], vec![h, h]).is_err());
        assert!(Trajectory::new(vec![], vec![], vec![]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![psi, psi], vec![h, h]).is_ok());
    }

    /// Analytic two-rotation product `−(cos2θ + i sin2θ σ_y)` on `|+⟩` gives
    /// the phase `arg(−e^{2iθ})`.
    fn analytic_plus_phase(bx: f64, bz: f64) -> f64 {
        let theta = bx.atan2(bz);
        (-Complex64::from_polar(1.0, 2.0 * theta)).arg()
    }

    #[test]
    fn measured_aa_phase_examples() {
        let m = aa_phase_measured(0.0, 1.0, 0.864).unwrap();
        assert!(m.degenerate);
        assert_abs_diff_eq!(m.phases.geometric_phase.abs(), PI, epsilon = 1e-9);
        assert!(m.phases.dynamic_phase.abs() < 1e-9);

        // bx = bz: −iσ_y, so ⟨+|U|+⟩ = −i and the phase is −π/2.
        let m = aa_phase_measured(1.0, 1.0, 0.864).unwrap();
        assert_abs_diff_eq!(m.phases.geometric_phase, -PI / 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.phases.geometric_phase, analytic_plus_phase(1.0, 1.0), epsilon = 1e-9);

        for (bx, bz) in [(0.3, 1.0), (2.0, 0.5), (-1.0, 0.7)] {
            let m = aa_phase_measured(bx, bz, 2.0).unwrap();
            assert!(phase_distance(m.phases.geometric_phase, analytic_plus_phase(bx, bz)) < 1e-9);
            // Diagonal entries are conjugate: relative phase is twice the |+⟩ phase.
            let rel = m.phases.total_phase - m.minus_phase;
            assert!(phase_distance(rel, 2.0 * m.phases.total_phase) < 1e-9);
        }
    }

    #[test]
    fn gate_examples() {
        assert!(geometric_gate(0.0).max_abs_diff(&Unitary2::identity()) < 1e-15);
        let out = geometric_gate(PI / 2.0).apply(&PureState::down());
        assert!((out.amplitudes() - PureState::up().amplitudes()).norm() < 1e-15);

        let rho = evolve(&mixed_initial(1.0, 0.0).unwrap(), &geometric_gate(FRAC_PI_4));
        for z in rho.entries().iter() {
            assert_abs_diff_eq!(z.re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0);
        }
        let u = geometric_gate(1.1);
        assert_abs_diff_eq!(u.determinant().re, 1.0, epsilon = 1e-15);
        assert!(u.unitarity_defect() < 1e-15);
    }

    #[test]
    fn gate_columns_reproduce_basis_rotation() {
        for gamma in [0.0, 0.3, 1.7, -2.4, 5.0] {
            let (s, c) = f64::sin_cos(gamma);
            let u = geometric_gate(gamma);
            // |0⟩ → cosγ|0⟩ + sinγ|1⟩
            let img0 = u.apply(&PureState::down());
            assert_eq!(img0.up_amplitude(), Complex64::from(s));
            assert_eq!(img0.down_amplitude(), Complex64::from(c));
            // |1⟩ → cosγ|1⟩ − sinγ|0⟩
            let img1 = u.apply(&PureState::up());
            assert_eq!(img1.up_amplitude(), Complex64::from(c));
            assert_eq!(img1.down_amplitude(), Complex64::from(-s));
        }
    }

    #[test]
    fn gate_acts_as_phase_on_sigma_y_states() {
        let (plus, minus) = sigma_y_eigenstates();
        let g = geometric_gate(0.7);
        assert_abs_diff_eq!(g.element(&plus, &plus).arg(), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(g.element(&minus, &minus).arg(), -0.7, epsilon = 1e-15);
    }

    #[test]
    fn solid_angle_examples() {
        assert_eq!(solid_angle_cone(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(solid_angle_cone(PI / 2.0).unwrap(), TAU, epsilon = 1e-15);
        assert_abs_diff_eq!(solid_angle_cone(PI).unwrap(), 2.0 * TAU);
        assert!(solid_angle_cone(-0.1).is_err());
        assert!(solid_angle_cone(3.2).is_err());
    }

    #[test]
    fn dynamic_phase_vanishes_on_field_grid() {
        for i in 0..20 {
            for j in 0..20 {
                let bx = -2.0 + 4.0 * i as f64 / 19.0;
                let bz = 0.05 + 3.0 * j as f64 / 19.0;
                let m = aa_phase_measured_with(bx, bz, 0.864, 256).unwrap();
                assert!(m.phases.dynamic_phase.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pure_profiles_average_to_mixture() {
        for (w0, gamma, alpha) in [(0.3, 0.4, 1.0), (0.9, 2.0, 0.2), (0.5, 1.0, 3.0)] {
            let geom = ProbeGeometry::new(alpha, 1.0).unwrap();
            let u = geometric_gate(gamma);
            let up = magnetization(&evolve(&PureState::up().projector(), &u), &geom);
            let down = magnetization(&evolve(&PureState::down().projector(), &u), &geom);
            assert_abs_diff_eq!(up, (alpha - 2.0 * gamma).cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(down, -(alpha - 2.0 * gamma).cos(), epsilon = 1e-12);
            let mixed = magnetization(&evolve(&mixed_initial(w0, 1.0 - w0).unwrap(), &u), &geom);
            assert_abs_diff_eq!(mixed, (1.0 - w0) * up + w0 * down, epsilon = 1e-12);
            assert_abs_diff_eq!(mixed, mk_closed_form(w0, 1.0 - w0, alpha, gamma).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn decomposition_reduces_geometric_part() {
        let d = PhaseDecomposition::from_parts(0.5, -100.0);
        assert_abs_diff_eq!(d.geometric_phase, wrap_phase(100.5), epsilon = 1e-12);
        assert!(d.geometric_phase > -PI && d.geometric_phase <= PI);
        assert_eq!(d.convention, CONVENTION);
    }

    #[test]
    fn hamiltonian_energy_of_aligned_state() {
        let n = Vector3::new(0.0, 0.6, 0.8);
        let e = hamiltonian(&(n * 2.0), 2.0).expectation_pure(&PureState::along(&n));
        assert_abs_diff_eq!(e, 2.0 * MU_B, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn gate_is_a_homomorphism(a in -10.0..10.0f64, b in -10.0..10.0f64) {
            let lhs = geometric_gate(a) * geometric_gate(b);
            prop_assert!(lhs.max_abs_diff(&geometric_gate(a + b)) < 1e-12);
        }
    }
}
