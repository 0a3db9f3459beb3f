//! Adiabatic loops and the spin-echo construction.

use nalgebra::Vector3;

use crate::constants::{wrap_phase, EXACT_TOL};
use crate::error::{Error, Result};
use crate::pulse::{hamiltonian, propagate_parametric, ParametricLoop};
use crate::qstate::{PureState, SpinOperator, Unitary2};

use super::{dynamic_phase, total_phase, PhaseDecomposition};

/// Largest tolerated population leakage out of the starting eigenstate.
pub const ADIABATIC_LEAKAGE_LIMIT: f64 = 1e-3;

/// Instantaneous eigenstate of `H(B)`: `Plus` is the higher-energy one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn other(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    /// Eigenstate of `H(field)` on this branch.
    pub fn eigenstate(self, field: &Vector3<f64>, g_factor: f64) -> Result<PureState> {
        let h = hamiltonian(field, g_factor);
        let scale = (0.5 * g_factor * crate::MU_B * field.norm()).abs();
        if scale == 0.0 {
            return Err(Error::ZeroField);
        }
        // H = (g μ_B/2) σ·B; the higher level is spin-up along sign(g)·B.
        let up = field.normalize() * g_factor.signum();
        let psi = match self {
            Branch::Plus => PureState::along(&up),
            Branch::Minus => PureState::along(&-up),
        };
        debug_assert!({
            let e = h.expectation_pure(&psi);
            let expected = if self == Branch::Plus { scale } else { -scale };
            (e - expected).abs() < 1e-9 * scale.max(1.0)
        });
        Ok(psi)
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

/// Outcome of one adiabatic loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPhases {
    pub branch: Branch,
    pub phases: PhaseDecomposition,
    /// `1 − |⟨branch(B(T))|ψ(T)⟩|²`.
    pub leakage: f64,
}

fn leakage(reference: &PureState, psi: &PureState) -> f64 {
    (1.0 - reference.inner(psi).norm_sqr()).max(0.0)
}

fn check_leakage(leak: f64) -> Result<()> {
    if leak > ADIABATIC_LEAKAGE_LIMIT {
        return Err(Error::Adiabaticity {
            leakage: leak,
            limit: ADIABATIC_LEAKAGE_LIMIT,
        });
    }
    Ok(())
}

/// Carries the instantaneous eigenstate around `lp` and splits the acquired
/// phase. For a cone loop the geometric part tends to `∓Ω/2` on the
/// `Plus`/`Minus` branch as the loop slows down.
pub fn berry_loop(lp: &ParametricLoop, g_factor: f64, branch: Branch) -> Result<LoopPhases> {
    let start = branch.eigenstate(&lp.field(0.0), g_factor)?;
    let (_, traj) = propagate_parametric(lp, g_factor, &start)?;
    let leak = leakage(&start, traj.final_state());
    check_leakage(leak)?;
    let total = total_phase(&start, traj.final_state())?;
    Ok(LoopPhases {
        branch,
        phases: PhaseDecomposition::from_parts(total, dynamic_phase(&traj)),
        leakage: leak,
    })
}

/// Per-branch and differential phases of a spin echo.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoResult {
    pub plus: PhaseDecomposition,
    pub minus: PhaseDecomposition,
    /// `plus − minus` for total, dynamic and geometric parts.
    pub difference: PhaseDecomposition,
    /// Dynamic-phase difference between the branches after the first pass
    /// alone, i.e. what the echo has to cancel.
    pub unechoed_dynamic_difference: f64,
    pub first_pass_time: f64,
    pub second_pass_time: f64,
    pub leakage: f64,
}

impl EchoResult {
    /// `|echoed dynamic difference| / |unechoed dynamic difference|`.
    pub fn dynamic_cancellation(&self) -> f64 {
        self.difference.dynamic_phase.abs() / self.unechoed_dynamic_difference.abs()
    }

    /// Smallest `k ∈ 1..=4` for which the `Plus` geometric phase matches
    /// `k·(−Ω/2)` modulo 2π, with the residual.
    pub fn multiple_of_half_solid_angle(&self, solid_angle: f64) -> (u32, f64) {
        (1..=4)
            .map(|k| {
                let target = -(k as f64) * 0.5 * solid_angle;
                (k, wrap_phase(self.plus.geometric_phase - target).abs())
            })
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }
}

/// Ideal π-transformation exchanging the two eigenstates of `σ·n`: the
/// reflection `σ·m` with `m ⊥ n` in the plane of `n` and `ẑ`.
pub fn swap_operator(n: &Vector3<f64>) -> Unitary2 {
    let n = n.normalize();
    let mut m = Vector3::z() - n * n.z;
    if m.norm() < 1e-8 {
        m = Vector3::x() - n * n.x;
    }
    let m = m.normalize();
    debug_assert!(m.dot(&n).abs() < EXACT_TOL);
    SpinOperator::sigma_dot(&m)
        .as_unitary()
        .expect("sigma.m is unitary for unit m")
}

/// Loop, swap, retrace in reverse, swap, with both passes of equal duration.
pub fn spin_echo_sequence(lp: &ParametricLoop, g_factor: f64) -> Result<EchoResult> {
    spin_echo_with(lp, g_factor, lp.total_time)
}

/// Echo whose reversed pass lasts `second_pass_time`.
///
/// The second pass keeps the field-time area of the first
/// (`|B₂| T₂ = |B₁| T₁`), which is what makes the dynamic phases cancel
/// when the two passes have different durations.
pub fn spin_echo_with(
    lp: &ParametricLoop,
    g_factor: f64,
    second_pass_time: f64,
) -> Result<EchoResult> {
    if !(second_pass_time.is_finite() && second_pass_time > 0.0) || !(lp.total_time > 0.0) {
        return Err(Error::Domain {
            name: "pass duration",
            value: second_pass_time.min(lp.total_time),
            domain: "(0, inf)",
        });
    }
    let retrace = lp
        .reversed()
        .with_total_time(second_pass_time)
        .with_magnitude(lp.magnitude * lp.total_time / second_pass_time);
    let swap = swap_operator(&lp.direction(0.0));

    let run = |branch: Branch| -> Result<(PhaseDecomposition, f64, f64)> {
        let start = branch.eigenstate(&lp.field(0.0), g_factor)?;
        let (_, first) = propagate_parametric(lp, g_factor, &start)?;
        let mut leak = leakage(&start, first.final_state());
        let swapped = swap.apply(first.final_state());
        let (_, second) = propagate_parametric(&retrace, g_factor, &swapped)?;
        let end = swap.apply(second.final_state());
        leak = leak.max(leakage(&start, &end));
        check_leakage(leak)?;
        let first_dyn = dynamic_phase(&first);
        let dynamic = first_dyn + dynamic_phase(&second);
        let total = total_phase(&start, &end)?;
        Ok((PhaseDecomposition::from_parts(total, dynamic), first_dyn, leak))
    };

    let (plus, plus_first, leak_p) = run(Branch::Plus)?;
    let (minus, minus_first, leak_m) = run(Branch::Minus)?;
    let difference = PhaseDecomposition::from_parts(
        plus.total_phase - minus.total_phase,
        plus.dynamic_phase - minus.dynamic_phase,
    );
    Ok(EchoResult {
        plus,
        minus,
        difference,
        unechoed_dynamic_difference: plus_first - minus_first,
        first_pass_time: lp.total_time,
        second_pass_time,
        leakage: leak_p.max(leak_m),
    })
}
