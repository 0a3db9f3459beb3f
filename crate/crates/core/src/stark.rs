//! ac Stark shifts of the four-level heavy-hole/conduction-band scheme and the
//! effective magnetic field they imitate.
//!
//! A below-gap circularly polarized pulse couples two VB/CB pairs. At second
//! order each CB member is pushed up by `|V|²/Δ` and its VB partner down by
//! the same amount. The resulting CB spin splitting `δ_cb` acts on the
//! electron like a Zeeman field `B_eff = δ_cb/(g μ_B)` along the propagation
//! direction of the pulse, for as long as the pulse lasts.

use std::fmt;

use nalgebra::Vector3;

use crate::constants::{HBAR, MU_B};
use crate::error::{Error, Result};
use crate::pulse::{rotation_angle, FieldPulse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarization {
    /// Couples VB `|−3/2⟩ ↔ CB |−1/2⟩` (`v1`) and VB `|−1/2⟩ ↔ CB |+1/2⟩` (`v2`).
    #[default]
    SigmaPlus,
    /// Mirror image: VB `|+3/2⟩ ↔ CB |+1/2⟩` (`v1`) and VB `|+1/2⟩ ↔ CB |−1/2⟩` (`v2`).
    SigmaMinus,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::SigmaPlus => "sigma-plus",
            Polarization::SigmaMinus => "sigma-minus",
        })
    }
}

/// Couplings and detunings in meV. Couplings enter only as `|V|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelScheme {
    pub v1: f64,
    pub v2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub polarization: Polarization,
}

impl LevelScheme {
    pub fn new(v1: f64, v2: f64, delta1: f64, delta2: f64, polarization: Polarization) -> Result<Self> {
        let s = Self {
            v1,
            v2,
            delta1,
            delta2,
            polarization,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v1", self.v1), ("v2", self.v2)] {
            if !v.is_finite() {
                return Err(Error::Domain {
                    name,
                    value: v,
                    domain: "finite",
                });
            }
        }
        for (name, d) in [("delta1", self.delta1), ("delta2", self.delta2)] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::DetuningDomain { name, value: d });
            }
        }
        Ok(())
    }
}

/// Level shifts in meV.
///
/// Under σ⁻ the two valence fields hold the mirror-image states `|+3/2⟩` and
/// `|+1/2⟩`; `vb_minus_three_half` is always the partner of the `v1` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkShifts {
    pub cb_minus_half: f64,
    pub cb_plus_half: f64,
    pub vb_minus_three_half: f64,
    pub vb_minus_half: f64,
    pub polarization: Polarization,
}

impl StarkShifts {
    /// `(cb, vb)` shift pairs for the `v1` and `v2` couplings.
    pub fn pairs(&self) -> [(f64, f64); 2] {
        match self.polarization {
            Polarization::SigmaPlus => [
                (self.cb_minus_half, self.vb_minus_three_half),
                (self.cb_plus_half, self.vb_minus_half),
            ],
            Polarization::SigmaMinus => [
                (self.cb_plus_half, self.vb_minus_three_half),
                (self.cb_minus_half, self.vb_minus_half),
            ],
        }
    }
}

pub fn stark_shifts(scheme: &LevelScheme) -> Result<StarkShifts> {
    scheme.validate()?;
    let p1 = scheme.v1 * scheme.v1 / scheme.delta1;
    let p2 = scheme.v2 * scheme.v2 / scheme.delta2;
    let (cb_minus_half, cb_plus_half) = match scheme.polarization {
        Polarization::SigmaPlus => (p1, p2),
        Polarization::SigmaMinus => (p2, p1),
    };
    Ok(StarkShifts {
        cb_minus_half,
        cb_plus_half,
        vb_minus_three_half: -p1,
        vb_minus_half: -p2,
        polarization: scheme.polarization,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperState {
    PlusHalf,
    MinusHalf,
    Degenerate,
}

impl fmt::Display for UpperState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpperState::PlusHalf => "+1/2",
            UpperState::MinusHalf => "-1/2",
            UpperState::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbSplitting {
    /// `|ΔE_{+1/2} − ΔE_{−1/2}|` in meV.
    pub magnitude: f64,
    /// Which CB spin state ends up higher.
    pub upper: UpperState,
}

impl CbSplitting {
    /// `ΔE_{+1/2} − ΔE_{−1/2}`.
    pub fn signed(&self) -> f64 {
        match self.upper {
            UpperState::MinusHalf => -self.magnitude,
            _ => self.magnitude,
        }
    }
}

pub fn cb_splitting(shifts: &StarkShifts) -> CbSplitting {
    let d = shifts.cb_plus_half - shifts.cb_minus_half;
    let upper = if d > 0.0 {
        UpperState::PlusHalf
    } else if d < 0.0 {
        UpperState::MinusHalf
    } else {
        UpperState::Degenerate
    };
    CbSplitting {
        magnitude: d.abs(),
        upper,
    }
}

/// `B_eff = δ_cb/(g μ_B)` in tesla.
pub fn effective_field(delta_cb: f64, g_factor: f64) -> Result<f64> {
    if g_factor == 0.0 {
        return Err(Error::ZeroGFactor);
    }
    Ok(delta_cb / (g_factor * MU_B))
}

/// Spin rotation angle `δ_cb·t/ħ`; the g-factor cancels between `B_eff` and
/// the Zeeman frequency.
pub fn rotation_angle_from_splitting(delta_cb: f64, duration: f64) -> f64 {
    delta_cb * duration / HBAR
}

/// Duration of a π rotation for a given splitting, in ps.
pub fn pi_duration(delta_cb: f64) -> f64 {
    std::f64::consts::PI * HBAR / delta_cb
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TippingPulse {
    pub scheme: LevelScheme,
    /// ps.
    pub duration: f64,
    /// Unit propagation direction of the laser.
    pub direction: Vector3<f64>,
}

impl TippingPulse {
    pub fn new(scheme: LevelScheme, duration: f64, direction: Vector3<f64>) -> Result<Self> {
        let tp = Self {
            scheme,
            duration,
            direction,
        };
        tp.validate()?;
        Ok(tp)
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::Domain {
                name: "duration",
                value: self.duration,
                domain: "(0, inf)",
            });
        }
        let n = self.direction.norm();
        if !((n - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidValue {
                what: "direction",
                kind: "tipping pulse",
                reason: format!("norm {n} is not 1"),
            });
        }
        Ok(())
    }
}

/// Constant pulse along the laser direction with magnitude `B_eff`.
///
/// The field points along the propagation direction whichever CB state is
/// pushed higher; the sign of the splitting only labels the levels.
pub fn to_field_pulse(tp: &TippingPulse, g_factor: f64) -> Result<FieldPulse> {
    tp.validate()?;
    let split = cb_splitting(&stark_shifts(&tp.scheme)?);
    let b = effective_field(split.magnitude, g_factor)?;
    FieldPulse::constant(tp.direction * b, tp.duration)
}

/// Rotation angle actually produced by the pulse under the Zeeman Hamiltonian.
pub fn pulse_rotation_angle(tp: &TippingPulse, g_factor: f64) -> Result<f64> {
    let split = cb_splitting(&stark_shifts(&tp.scheme)?);
    let b = effective_field(split.magnitude, g_factor)?;
    Ok(rotation_angle(b, tp.duration, g_factor))
}
