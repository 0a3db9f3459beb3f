//! Faraday-rotation observable: the spin magnetization projected on the probe
//! direction `e_k = (−sin α, 0, cos α)`, and sweeps of it.

use std::f64::consts::PI;
use std::fmt;
use std::io;

use crate::constants::EXACT_TOL;
use crate::error::{Error, Result};
use crate::format::num;
use crate::geophase::{aa_phase_formula, geometric_gate};
use crate::pulse::{aa_protocol, composite};
use crate::qstate::{check_weights, evolve, expectation, mixed_initial, DensityMatrix, SpinOperator};

/// Points in the default probe-angle grid over `[0, π]`.
pub const DEFAULT_ALPHA_POINTS: usize = 64;

pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn default_alpha_grid() -> Vec<f64> {
    linspace(0.0, PI, DEFAULT_ALPHA_POINTS)
}

/// Probe orientation and the `θ_F = κ M_k` calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeGeometry {
    /// Angle between pump and probe, radians in `[0, π]`.
    pub alpha: f64,
    /// Radians of rotation per unit normalized magnetization.
    pub kappa: f64,
}

impl ProbeGeometry {
    pub fn new(alpha: f64, kappa: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&alpha) {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                domain: "[0, pi]",
            });
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Domain {
                name: "kappa",
                value: kappa,
                domain: "(0, inf)",
            });
        }
        Ok(Self { alpha, kappa })
    }
}

/// `σ_k = cos α σ_z − sin α σ_x`.
pub fn sigma_k(alpha: f64) -> SpinOperator {
    let (s, c) = alpha.sin_cos();
    SpinOperator::sigma_dot(&nalgebra::Vector3::new(-s, 0.0, c))
}

/// Normalized `M_k = Tr(σ_k ρ)`.
pub fn magnetization(rho: &DensityMatrix, geom: &ProbeGeometry) -> f64 {
    expectation(&sigma_k(geom.alpha), rho)
}

/// `(w1 − w0) cos(α − 2γ)`.
pub fn mk_closed_form(w0: f64, w1: f64, alpha: f64, gamma: f64) -> Result<f64> {
    check_weights(w0, w1, EXACT_TOL)?;
    Ok((w1 - w0) * (alpha - 2.0 * gamma).cos())
}

pub fn theta_f(mk: f64, geom: &ProbeGeometry) -> f64 {
    geom.kappa * mk
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Alpha,
    Gamma,
    FieldRatio,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::Gamma => "gamma",
            SweepAxis::FieldRatio => "field-ratio",
        })
    }
}

/// What produces the geometric phase at each point.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepSource {
    /// Closed-form gate at each `γ`.
    Gamma(Vec<f64>),
    /// Two-π-pulse protocol with `bx/bz = ratio`, `bz = 1 T`; the closed form
    /// uses `γ = 4·arctan(ratio)`.
    FieldRatio { ratios: Vec<f64>, g_factor: f64 },
}

impl SweepSource {
    fn len(&self) -> usize {
        match self {
            SweepSource::Gamma(g) => g.len(),
            SweepSource::FieldRatio { ratios, .. } => ratios.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeSpec {
    Fixed(ProbeGeometry),
    AlphaGrid { alphas: Vec<f64>, kappa: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternSample {
    pub value: f64,
    pub alpha: f64,
    pub mk_closed_form: Option<f64>,
    pub mk_pulse_oracle: Option<f64>,
    /// `κ · mk_closed_form`.
    pub theta_f: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferencePattern {
    pub axis: SweepAxis,
    pub w0: f64,
    pub w1: f64,
    pub samples: Vec<PatternSample>,
}

impl InterferencePattern {
    pub fn has_pulse_oracle(&self) -> bool {
        self.samples.iter().any(|s| s.mk_pulse_oracle.is_some())
    }

    pub fn errors(&self) -> usize {
        self.samples.iter().filter(|s| s.error.is_some()).count()
    }

    /// `|M_k| ≤ |w1 − w0|` on every sample (both pipelines).
    pub fn within_amplitude_bound(&self) -> bool {
        let bound = (self.w1 - self.w0).abs() + EXACT_TOL;
        self.samples.iter().all(|s| {
            s.mk_closed_form.is_none_or(|m| m.abs() <= bound)
                && s.mk_pulse_oracle.is_none_or(|m| m.abs() <= bound)
        })
    }

    /// Columns: `sweep_value,mk_closed_form[,mk_pulse_oracle],theta_f,error`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let oracle = self.has_pulse_oracle();
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["sweep_value", "mk_closed_form"];
        if oracle {
            header.push("mk_pulse_oracle");
        }
        header.extend(["theta_f", "error"]);
        w.write_record(&header)?;
        for s in &self.samples {
            let mut row = vec![num(s.value), opt(s.mk_closed_form)];
            if oracle {
                row.push(opt(s.mk_pulse_oracle));
            }
            row.push(opt(s.theta_f));
            row.push(s.error.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Whitespace-separated `sweep_value mk_closed_form`, gnuplot style.
    pub fn write_plot_data<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# {} mk_closed_form (w0={}, w1={})", self.axis, num(self.w0), num(self.w1))?;
        for s in self.samples.iter() {
            if let Some(m) = s.mk_closed_form {
                writeln!(out, "{} {}", num(s.value), num(m))?;
            }
        }
        Ok(())
    }
}

/// Sweeps exactly one variable: the source grid under a fixed probe, or the
/// probe angle for a single-point source.
pub fn sweep(
    w0: f64,
    w1: f64,
    source: &SweepSource,
    probe: &ProbeSpec,
) -> Result<InterferencePattern> {
    let rho_i = mixed_initial(w0, w1)?;
    if source.len() == 0 {
        return Err(Error::InvalidSweep("empty source grid".into()));
    }
    let (axis, alphas, kappa): (SweepAxis, Vec<f64>, f64) = match probe {
        ProbeSpec::Fixed(g) => {
            let axis = match source {
                SweepSource::Gamma(_) => SweepAxis::Gamma,
                SweepSource::FieldRatio { .. } => SweepAxis::FieldRatio,
            };
            (axis, vec![g.alpha], g.kappa)
        }
        ProbeSpec::AlphaGrid { alphas, kappa } => {
            if alphas.is_empty() {
                return Err(Error::InvalidSweep("empty alpha grid".into()));
            }
            if source.len() != 1 {
                return Err(Error::InvalidSweep(
                    "an alpha sweep needs a single-point source".into(),
                ));
            }
            (SweepAxis::Alpha, alphas.clone(), *kappa)
        }
    };

    let mut samples = Vec::with_capacity(source.len() * alphas.len());
    for i in 0..source.len() {
        for &alpha in &alphas {
            let value = match (axis, source) {
                (SweepAxis::Alpha, _) => alpha,
                (_, SweepSource::Gamma(g)) => g[i],
                (_, SweepSource::FieldRatio { ratios, .. }) => ratios[i],
            };
            let point = ProbeGeometry::new(alpha, kappa).and_then(|geom| {
                sweep_point(&rho_i, w0, w1, source, i, &geom).map(|(mk, oracle)| {
                    (mk, oracle, theta_f(mk, &geom))
                })
            });
            samples.push(match point {
                Ok((mk, oracle, tf)) => PatternSample {
                    value,
                    alpha,
                    mk_closed_form: Some(mk),
                    mk_pulse_oracle: oracle,
                    theta_f: Some(tf),
                    error: None,
                },
                Err(e) => PatternSample {
                    value,
                    alpha,
                    mk_closed_form: None,
                    mk_pulse_oracle: None,
                    theta_f: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(InterferencePattern {
        axis,
        w0,
        w1,
        samples,
    })
}

fn sweep_point(
    rho_i: &DensityMatrix,
    w0: f64,
    w1: f64,
    source: &SweepSource,
    i: usize,
    geom: &ProbeGeometry,
) -> Result<(f64, Option<f64>)> {
    match source {
        SweepSource::Gamma(gammas) => {
            let gamma = gammas[i];
            if !gamma.is_finite() {
                return Err(Error::Domain {
                    name: "gamma",
                    value: gamma,
                    domain: "finite",
                });
            }
            Ok((mk_closed_form(w0, w1, geom.alpha, gamma)?, None))
        }
        SweepSource::FieldRatio { ratios, g_factor } => {
            let ratio = ratios[i];
            let gamma = aa_phase_formula(ratio, 1.0)?.unreduced;
            let u = composite(&aa_protocol(ratio, 1.0, *g_factor)?);
            let oracle = magnetization(&evolve(rho_i, &u), geom);
            Ok((mk_closed_form(w0, w1, geom.alpha, gamma)?, Some(oracle)))
        }
    }
}

/// Matrix route `mixed_initial → geometric_gate → evolve → magnetization`.
pub fn mk_matrix_pipeline(w0: f64, w1: f64, alpha: f64, gamma: f64) -> Result<f64> {
    let rho = evolve(&mixed_initial(w0, w1)?, &geometric_gate(gamma));
    Ok(expectation(&sigma_k(alpha), &rho))
}
