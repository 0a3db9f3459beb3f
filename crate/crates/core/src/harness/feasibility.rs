//! Pulse-sequence duration against the spin relaxation budget.

use std::fmt;

use crate::format::num;
use crate::pulse::PulseSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Below a tenth of the budget.
    Pass,
    /// Within the budget but not by an order of magnitude.
    Marginal,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Marginal => "MARGINAL",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub verdict: Verdict,
    /// Sequence duration over `t_relax`.
    pub ratio: f64,
    pub duration: f64,
    pub t_relax: f64,
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (duration {} ps, t_relax {} ps, ratio {})",
            self.verdict,
            num(self.duration),
            num(self.t_relax),
            num(self.ratio)
        )
    }
}

pub fn check_duration(duration: f64, t_relax: f64) -> Feasibility {
    let ratio = duration / t_relax;
    let verdict = if duration < t_relax / 10.0 {
        Verdict::Pass
    } else if duration < t_relax {
        Verdict::Marginal
    } else {
        Verdict::Fail
    };
    Feasibility {
        verdict,
        ratio,
        duration,
        t_relax,
    }
}

pub fn check_feasibility(seq: &PulseSequence, t_relax: f64) -> Feasibility {
    check_duration(seq.total_duration(), t_relax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{HBAR, MU_B};
    use crate::pulse::aa_protocol;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    #[test]
    fn aa_protocol_at_20_tesla() {
        let seq = aa_protocol(0.0, 20.0, 0.864).unwrap();
        let f = check_feasibility(&seq, 1e4);
        assert_eq!(f.verdict, Verdict::Pass);
        // Oracle: two π-pulses of πħ/(g μ_B B).
        let t = 2.0 * std::f64::consts::PI * HBAR / (0.864 * MU_B * 20.0);
        assert_relative_eq!(f.duration, t, max_relative = 1e-12);
        assert_relative_eq!(f.ratio, t / 1e4, max_relative = 1e-12);
        assert!((f.ratio - 4.1e-4).abs() < 0.1e-4);
    }

    #[test]
    fn thresholds() {
        assert_eq!(check_duration(2e4, 1e4).verdict, Verdict::Fail);
        assert_eq!(check_duration(1e4, 1e4).verdict, Verdict::Fail);
        assert_eq!(check_duration(5e3, 1e4).verdict, Verdict::Marginal);
        assert_eq!(check_duration(1e3, 1e4).verdict, Verdict::Marginal);
        assert_eq!(check_duration(999.0, 1e4).verdict, Verdict::Pass);
        assert_eq!(check_duration(5e3, 1e4).ratio, 0.5);
    }

    #[test]
    fn explicit_sequence() {
        let mut seq = PulseSequence::new(2.0);
        seq.push(crate::pulse::FieldPulse::constant(Vector3::z(), 2e4).unwrap());
        assert_eq!(check_feasibility(&seq, 1e4).verdict, Verdict::Fail);
        assert!(check_feasibility(&seq, 1e4).to_string().starts_with("FAIL"));
    }
}
