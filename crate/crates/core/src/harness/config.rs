//! Experiment configuration in TOML.
//!
//! See `docs/config.md` for the full key reference. Parsing applies defaults
//! and validates; the serialized form of a parsed config re-parses to an equal
//! value, which is what reports echo and hash.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::faraday::{linspace, DEFAULT_ALPHA_POINTS};
use crate::geophase::DEFAULT_STEPS_PER_PULSE;
use crate::stark::Polarization;

/// Default relaxation budget: 10 ns.
pub const DEFAULT_T_RELAX: f64 = 1e4;
pub const DEFAULT_STEPS_PER_LOOP: usize = 16384;
/// Tolerance on `w0 + w1 = 1` in configs.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    AaProtocol,
    BerryLoop,
    SpinEcho,
    StarkPipeline,
    VerifyAa,
    Sweep,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::AaProtocol => "aa-protocol",
            ExperimentKind::BerryLoop => "berry-loop",
            ExperimentKind::SpinEcho => "spin-echo",
            ExperimentKind::StarkPipeline => "stark-pipeline",
            ExperimentKind::VerifyAa => "verify-aa",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Either explicit values or an evenly spaced range including both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range(r) => linspace(r.start, r.end, r.points),
        }
    }

    fn check(&self, key: &str) -> Result<(), ConfigError> {
        match self {
            Grid::Values(v) => {
                if v.is_empty() {
                    return Err(ConfigError::invalid(key, "grid is empty"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(ConfigError::invalid(key, "grid values must be finite"));
                }
            }
            Grid::Range(r) => {
                if r.points == 0 {
                    return Err(ConfigError::invalid(format!("{key}.points"), "must be at least 1"));
                }
                finite(&format!("{key}.start"), r.start)?;
                finite(&format!("{key}.end"), r.end)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    pub w0: f64,
    pub w1: f64,
}

impl Default for Initial {
    fn default() -> Self {
        Self { w0: 0.0, w1: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    /// Single probe angle; when absent the `alphas` grid is swept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "default_alphas")]
    pub alphas: Grid,
    #[serde(default = "one")]
    pub kappa: f64,
}

impl Default for Probe {
    fn default() -> Self {
        Self {
            alpha: None,
            alphas: default_alphas(),
            kappa: 1.0,
        }
    }
}

fn default_alphas() -> Grid {
    Grid::Range(RangeSpec {
        start: 0.0,
        end: PI,
        points: DEFAULT_ALPHA_POINTS,
    })
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integrator {
    #[serde(default = "default_steps_per_pulse")]
    pub steps_per_pulse: usize,
    #[serde(default = "default_steps_per_loop")]
    pub steps_per_loop: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            steps_per_pulse: DEFAULT_STEPS_PER_PULSE,
            steps_per_loop: DEFAULT_STEPS_PER_LOOP,
        }
    }
}

fn default_steps_per_pulse() -> usize {
    DEFAULT_STEPS_PER_PULSE
}

fn default_steps_per_loop() -> usize {
    DEFAULT_STEPS_PER_LOOP
}

/// Field direction of the first π-pulse; the second mirrors `bx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub bx: f64,
    pub bz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopShape {
    Cone,
    BackAndForth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSection {
    #[serde(default = "default_shape")]
    pub shape: LoopShape,
    /// Cone half-angle, or the base tilt of a back-and-forth path.
    pub polar_angle: f64,
    /// Extra tilt reached mid-loop by a back-and-forth path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swing: Option<f64>,
    /// Field magnitude in tesla.
    pub magnitude: f64,
    /// Loop duration in ps.
    pub total_time: f64,
    /// Spin echo only: second-pass duration over first-pass duration.
    #[serde(default = "one")]
    pub dwell_ratio: f64,
}

fn default_shape() -> LoopShape {
    LoopShape::Cone
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub v1: f64,
    pub v2: f64,
    pub delta1: f64,
    pub delta2: f64,
    #[serde(default, with = "polarization_serde")]
    pub polarization: Polarization,
    /// Tipping-pulse propagation direction (normalized on parse).
    #[serde(default = "default_direction")]
    pub direction: [f64; 3],
    /// Pulse length in ps; defaults to a π rotation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
}

fn default_direction() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

mod polarization_serde {
    use super::Polarization;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &Polarization, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&p.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Polarization, D::Error> {
        match String::deserialize(d)?.as_str() {
            "sigma-plus" => Ok(Polarization::SigmaPlus),
            "sigma-minus" => Ok(Polarization::SigmaMinus),
            other => Err(serde::de::Error::custom(format!(
                "unknown polarization `{other}`, expected `sigma-plus` or `sigma-minus`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// `bx/bz` values (`bz = 1 T`).
    pub ratios: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepSourceKind {
    Gamma,
    FieldRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub source: SweepSourceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Grid>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// File-name stem; defaults to the experiment kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub g_factor: f64,
    /// Relaxation budget in ps.
    #[serde(default = "default_t_relax")]
    pub t_relax: f64,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub probe: Probe,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSection>,
    #[serde(default, rename = "loop", skip_serializing_if = "Option::is_none")]
    pub loop_: Option<LoopSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: Output,
}

fn default_t_relax() -> f64 {
    DEFAULT_T_RELAX
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { key, .. } => Some(key),
            ConfigError::Parse { .. } => None,
        }
    }
}

fn finite(key: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("{x} is not finite")))
    }
}

fn positive(key: &str, x: f64) -> Result<(), ConfigError> {
    finite(key, x)?;
    if x > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("{x} must be positive")))
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Folds an angle onto `[0, π]` via `|α| mod 2π` and `2π − α` above π.
pub fn fold_alpha(alpha: f64) -> f64 {
    let a = alpha.rem_euclid(TAU);
    if a > PI {
        TAU - a
    } else {
        a
    }
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_config(s)
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with_warnings(text).map(|(c, _)| c)
}

/// Parses, applies defaults and validates; also returns non-fatal warnings
/// (folded probe angles, ignored sections).
pub fn parse_config_with_warnings(
    text: &str,
) -> Result<(ExperimentConfig, Vec<String>), ConfigError> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let warnings = cfg.normalize()?;
    Ok((cfg, warnings))
}

impl ExperimentConfig {
    /// Canonical TOML form used for the report echo and the config hash.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn prefix(&self) -> String {
        self.output
            .prefix
            .clone()
            .unwrap_or_else(|| self.kind.as_str().replace('-', "_"))
    }

    /// Validates in place, folding out-of-range probe angles and normalizing
    /// the tipping direction.
    pub fn normalize(&mut self) -> Result<Vec<String>, ConfigError> {
        let mut warnings = Vec::new();
        finite("g_factor", self.g_factor)?;
        if self.g_factor == 0.0 {
            return Err(ConfigError::invalid("g_factor", "must be nonzero"));
        }
        positive("t_relax", self.t_relax)?;

        let Initial { w0, w1 } = self.initial;
        finite("initial.w0", w0)?;
        finite("initial.w1", w1)?;
        if !(0.0..=1.0).contains(&w0) || !(0.0..=1.0).contains(&w1) {
            return Err(ConfigError::invalid("initial", format!("weights ({w0}, {w1}) must lie in [0, 1]")));
        }
        if (w0 + w1 - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(ConfigError::invalid(
                "initial",
                format!("weights must sum to 1, got w0 + w1 = {}", w0 + w1),
            ));
        }

        positive("probe.kappa", self.probe.kappa)?;
        if let Some(a) = self.probe.alpha {
            finite("probe.alpha", a)?;
            if !(0.0..=PI).contains(&a) {
                let f = fold_alpha(a);
                warnings.push(format!("probe.alpha = {a} folded to {f}"));
                self.probe.alpha = Some(f);
            }
        }
        self.probe.alphas.check("probe.alphas")?;
        if let Grid::Values(v) = &mut self.probe.alphas {
            for a in v.iter_mut() {
                if !(0.0..=PI).contains(a) {
                    let f = fold_alpha(*a);
                    warnings.push(format!("probe.alphas entry {a} folded to {f}"));
                    *a = f;
                }
            }
        } else if self.probe.alphas.values().iter().any(|a| !(0.0..=PI).contains(a)) {
            return Err(ConfigError::invalid("probe.alphas", "range must lie within [0, pi]"));
        }

        if self.integrator.steps_per_pulse < 1 {
            return Err(ConfigError::invalid("integrator.steps_per_pulse", "must be at least 1"));
        }
        if self.integrator.steps_per_loop < 2 {
            return Err(ConfigError::invalid("integrator.steps_per_loop", "must be at least 2"));
        }

        if let Some(f) = &self.field {
            finite("field.bx", f.bx)?;
            finite("field.bz", f.bz)?;
            if f.bx == 0.0 && f.bz == 0.0 {
                return Err(ConfigError::invalid("field", "bx and bz are both zero"));
            }
        }
        if let Some(l) = &self.loop_ {
            finite("loop.polar_angle", l.polar_angle)?;
            if !(0.0..=PI).contains(&l.polar_angle) {
                return Err(ConfigError::invalid("loop.polar_angle", "must lie in [0, pi]"));
            }
            match (l.shape, l.swing) {
                (LoopShape::BackAndForth, None) => {
                    return Err(ConfigError::invalid("loop.swing", "required for shape = \"back-and-forth\""))
                }
                (LoopShape::Cone, Some(_)) => warnings.push("loop.swing ignored for a cone".into()),
                (_, Some(s)) => finite("loop.swing", s)?,
                _ => {}
            }
            positive("loop.magnitude", l.magnitude)?;
            positive("loop.total_time", l.total_time)?;
            positive("loop.dwell_ratio", l.dwell_ratio)?;
        }
        if let Some(s) = &mut self.scheme {
            finite("scheme.v1", s.v1)?;
            finite("scheme.v2", s.v2)?;
            positive("scheme.delta1", s.delta1)?;
            positive("scheme.delta2", s.delta2)?;
            for (i, c) in s.direction.iter().enumerate() {
                finite(&format!("scheme.direction[{i}]"), *c)?;
            }
            let n = s.direction.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n == 0.0 {
                return Err(ConfigError::invalid("scheme.direction", "zero vector"));
            }
            if (n - 1.0).abs() > 1e-12 {
                s.direction = s.direction.map(|c| c / n);
            }
            if let Some(d) = s.duration {
                positive("scheme.duration", d)?;
            }
        }
        if let Some(v) = &self.verify {
            v.ratios.check("verify.ratios")?;
        }
        if let Some(s) = &self.sweep {
            if let Some(g) = &s.gammas {
                g.check("sweep.gammas")?;
            }
            if let Some(r) = &s.ratios {
                r.check("sweep.ratios")?;
            }
        }

        let required: &[(&str, bool)] = match self.kind {
            ExperimentKind::AaProtocol => &[("field", self.field.is_some())],
            ExperimentKind::BerryLoop | ExperimentKind::SpinEcho => &[("loop", self.loop_.is_some())],
            ExperimentKind::StarkPipeline => &[("scheme", self.scheme.is_some())],
            ExperimentKind::VerifyAa => &[("verify", self.verify.is_some())],
            ExperimentKind::Sweep => &[("sweep", self.sweep.is_some())],
        };
        for (key, present) in required {
            if !present {
                return Err(ConfigError::invalid(*key, format!("section required for kind = \"{}\"", self.kind)));
            }
        }
        if let (ExperimentKind::Sweep, Some(s)) = (self.kind, &self.sweep) {
            let (need, grid) = match s.source {
                SweepSourceKind::Gamma => ("sweep.gammas", &s.gammas),
                SweepSourceKind::FieldRatio => ("sweep.ratios", &s.ratios),
            };
            let Some(grid) = grid else {
                return Err(ConfigError::invalid(need, "required by sweep.source"));
            };
            if self.probe.alpha.is_none() && grid.values().len() != 1 {
                return Err(ConfigError::invalid(
                    "probe.alpha",
                    "a sweep over several source values needs a fixed probe angle",
                ));
            }
        }
        if self.kind != ExperimentKind::SpinEcho {
            if let Some(l) = &self.loop_ {
                if l.dwell_ratio != 1.0 {
                    warnings.push("loop.dwell_ratio only applies to spin-echo".into());
                }
            }
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "aa-protocol"
g_factor = 0.864

[field]
bx = 1.0
bz = 1.0
"#;

    #[test]
    fn minimal_aa_protocol_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.kind, ExperimentKind::AaProtocol);
        assert_eq!(c.initial, Initial { w0: 0.0, w1: 1.0 });
        assert_eq!(c.probe.alphas.values().len(), 64);
        assert_eq!(c.probe.alphas.values()[63], PI);
        assert_eq!(c.t_relax, 1e4);
        assert_eq!(c.integrator.steps_per_pulse, 2048);
        assert_eq!(c.integrator.steps_per_loop, 16384);
        assert_eq!(c.prefix(), "aa_protocol");
    }

    #[test]
    fn weights_must_sum_to_one() {
        let text = format!("{MINIMAL}\n[initial]\nw0 = 0.5\nw1 = 1.0\n");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.key(), Some("initial"));
        assert!(e.to_string().contains("sum to 1"));
    }

    #[test]
    fn negative_duration_rejected() {
        let text = r#"
kind = "stark-pipeline"
g_factor = 0.864
[scheme]
v1 = 1.0
v2 = 0.0
delta1 = 1.0
delta2 = 1.0
duration = -2.0
"#;
        assert_eq!(parse_config(text).unwrap_err().key(), Some("scheme.duration"));
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        let text = format!("{MINIMAL}colour = \"blue\"\n");
        match parse_config(&text).unwrap_err() {
            ConfigError::Parse { line, message, .. } => {
                assert!(line > 0);
                assert!(message.contains("colour"), "{message}");
            }
            e => panic!("{e}"),
        }
        let e = parse_config("kind = \"aa-protocol\"\ng_factor = \n").unwrap_err();
        assert!(matches!(e, ConfigError::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn missing_section_names_it() {
        let e = parse_config("kind = \"verify-aa\"\ng_factor = 1.0\n").unwrap_err();
        assert_eq!(e.key(), Some("verify"));
    }

    #[test]
    fn alpha_folding_warns() {
        let text = format!("{MINIMAL}\n[probe]\nalpha = 4.0\n");
        let (c, w) = parse_config_with_warnings(&text).unwrap();
        assert_eq!(c.probe.alpha, Some(TAU - 4.0));
        assert_eq!(w.len(), 1);
        assert_eq!(fold_alpha(-1.0), 1.0);
    }

    #[test]
    fn round_trip_echo() {
        let text = r#"
kind = "sweep"
g_factor = 2.0
[initial]
w0 = 0.3
w1 = 0.7
[probe]
alpha = 0.0
kappa = 0.5
[sweep]
source = "gamma"
gammas = { start = 0.0, end = 3.0, points = 7 }
[output]
prefix = "demo"
"#;
        let c = parse_config(text).unwrap();
        let echo = c.to_toml();
        assert_eq!(parse_config(&echo).unwrap(), c);
        assert_eq!(c.hash(), parse_config(&echo).unwrap().hash());

        let s = r#"
kind = "stark-pipeline"
g_factor = 0.864
[scheme]
v1 = 1.0
v2 = 0.0
delta1 = 1.0
delta2 = 1.0
polarization = "sigma-minus"
direction = [0.0, 0.0, 2.0]
"#;
        let c = parse_config(s).unwrap();
        assert_eq!(c.scheme.unwrap().direction, [0.0, 0.0, 1.0]);
        assert_eq!(parse_config(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn sweep_needs_its_grid() {
        let text = "kind = \"sweep\"\ng_factor = 2.0\n[sweep]\nsource = \"field-ratio\"\ngammas = [0.0]\n";
        assert_eq!(parse_config(text).unwrap_err().key(), Some("sweep.ratios"));
        let text = "kind = \"sweep\"\ng_factor = 2.0\n[sweep]\nsource = \"gamma\"\ngammas = [0.0, 1.0]\n";
        assert_eq!(parse_config(text).unwrap_err().key(), Some("probe.alpha"));
        let text = "kind = \"sweep\"\ng_factor = 2.0\n[sweep]\nsource = \"gamma\"\ngammas = []\n";
        assert_eq!(parse_config(text).unwrap_err().key(), Some("sweep.gammas"));
    }
}
