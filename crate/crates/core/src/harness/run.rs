//! Experiment dispatch and report emission.
//!
//! Every run builds its output files in memory first, then writes them in a
//! fixed order. Files never contain timing information, so repeated runs of
//! one config produce byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::Vector3;

use crate::constants::{phase_distance, CONVENTION, HBAR};
use crate::error::Error;
use crate::faraday::{sweep, InterferencePattern, ProbeGeometry, ProbeSpec, SweepSource};
use crate::format::num;
use crate::geophase::{
    aa_phase_formula, aa_phase_measured_with, berry_loop, solid_angle_cone, spin_echo_with,
    verify_aa_formula_with, Branch,
};
use crate::pulse::{aa_protocol, LoopPath, ParametricLoop, PulseSequence};
use crate::stark::{
    cb_splitting, effective_field, pi_duration, pulse_rotation_angle, rotation_angle_from_splitting,
    stark_shifts, to_field_pulse, LevelScheme, TippingPulse,
};

use super::config::{ExperimentConfig, ExperimentKind, LoopShape, SweepSourceKind};
use super::feasibility::{check_duration, check_feasibility, Feasibility, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_POINT_ERRORS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "SPINPHASE_OUT";

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct RunError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub config_echo: String,
    pub config_hash: String,
    pub convention: &'static str,
    pub summary: String,
    pub feasibility: Option<Feasibility>,
    pub warnings: Vec<String>,
    pub point_errors: usize,
    pub files: Vec<PathBuf>,
    pub wall_time: Duration,
}

impl RunReport {
    /// Nonzero only under `strict`, when a point errored or feasibility failed.
    pub fn exit_code(&self, strict: bool) -> i32 {
        let failed = self.point_errors > 0
            || self.feasibility.is_some_and(|f| f.verdict == Verdict::Fail);
        if strict && failed {
            EXIT_POINT_ERRORS
        } else {
            EXIT_OK
        }
    }
}

/// Output directory precedence: explicit argument, environment, config, `.`.
pub fn resolve_out_dir(explicit: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|p| !p.is_empty()) {
        return PathBuf::from(p);
    }
    cfg.output
        .dir
        .as_ref()
        .map_or_else(|| PathBuf::from("."), PathBuf::from)
}

/// In-memory result of one experiment.
#[derive(Default)]
struct Outcome {
    summary: String,
    files: Vec<(String, Vec<u8>)>,
    feasibility: Option<Feasibility>,
    point_errors: usize,
}

impl Outcome {
    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.summary, "{key}: {value}");
    }

    fn error(&mut self, what: &str, e: &Error) {
        self.point_errors += 1;
        let _ = writeln!(self.summary, "error: {what}: {e}");
    }

    fn file(&mut self, name: String, bytes: Vec<u8>) {
        self.files.push((name, bytes));
    }
}

fn key_value_csv(rows: &[(&str, f64)]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "value"]).expect("in-memory write");
    for (k, v) in rows {
        w.write_record([k.to_string(), num(*v)]).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn pattern_files(out: &mut Outcome, stem: &str, p: &InterferencePattern) {
    let mut csv = Vec::new();
    p.write_csv(&mut csv).expect("in-memory write");
    let mut dat = Vec::new();
    p.write_plot_data(&mut dat).expect("in-memory write");
    out.file(format!("{stem}_pattern.csv"), csv);
    out.file(format!("{stem}_pattern.dat"), dat);
    out.point_errors += p.errors();
    for s in p.samples.iter().filter(|s| s.error.is_some()) {
        let _ = writeln!(out.summary, "error: sweep value {}: {}", num(s.value), s.error.as_deref().unwrap_or(""));
    }
    if !p.within_amplitude_bound() {
        let _ = writeln!(out.summary, "warning: |M_k| exceeds |w1 - w0| on some sample");
    }
}

fn probe_spec(cfg: &ExperimentConfig) -> ProbeSpec {
    match cfg.probe.alpha {
        Some(alpha) => ProbeSpec::Fixed(ProbeGeometry {
            alpha,
            kappa: cfg.probe.kappa,
        }),
        None => ProbeSpec::AlphaGrid {
            alphas: cfg.probe.alphas.values(),
            kappa: cfg.probe.kappa,
        },
    }
}

fn alpha_values(cfg: &ExperimentConfig) -> Vec<f64> {
    cfg.probe.alpha.map_or_else(|| cfg.probe.alphas.values(), |a| vec![a])
}

fn build_loop(cfg: &ExperimentConfig) -> crate::error::Result<ParametricLoop> {
    let l = cfg.loop_.as_ref().expect("validated");
    let path = match l.shape {
        LoopShape::Cone => LoopPath::Cone {
            polar_angle: l.polar_angle,
        },
        LoopShape::BackAndForth => LoopPath::BackAndForth {
            polar_angle: l.polar_angle,
            swing: l.swing.unwrap_or(0.0),
        },
    };
    ParametricLoop::new(path, l.magnitude, l.total_time, cfg.integrator.steps_per_loop)
}

/// `−Ω/2` for the state aligned with `B`, or 0 for loops enclosing no area.
fn berry_oracle(cfg: &ExperimentConfig, branch: Branch) -> f64 {
    let l = cfg.loop_.as_ref().expect("validated");
    let omega = match l.shape {
        LoopShape::Cone => solid_angle_cone(l.polar_angle).unwrap_or(f64::NAN),
        LoopShape::BackAndForth => 0.0,
    };
    let aligned = match branch {
        Branch::Plus => cfg.g_factor.signum(),
        Branch::Minus => -cfg.g_factor.signum(),
    };
    -aligned * 0.5 * omega
}

fn run_aa_protocol(cfg: &ExperimentConfig, out: &mut Outcome) {
    let f = cfg.field.expect("validated");
    let g = cfg.g_factor;
    let stem = cfg.prefix();
    match aa_protocol(f.bx, f.bz, g) {
        Ok(seq) => out.feasibility = Some(check_feasibility(&seq, cfg.t_relax)),
        Err(e) => return out.error("protocol", &e),
    }
    let formula = match aa_phase_formula(f.bx, f.bz) {
        Ok(v) => v,
        Err(e) => return out.error("formula", &e),
    };
    let m = match aa_phase_measured_with(f.bx, f.bz, g, cfg.integrator.steps_per_pulse) {
        Ok(m) => m,
        Err(e) => return out.error("simulation", &e),
    };
    let relative = m.phases.total_phase - m.minus_phase;
    let rows = [
        ("bx", f.bx),
        ("bz", f.bz),
        ("theta", f.bx.atan2(f.bz)),
        ("total_duration_ps", m.total_duration),
        ("gamma_formula", formula.unreduced),
        ("gamma_formula_reduced", formula.reduced),
        ("total_phase", m.phases.total_phase),
        ("dynamic_phase", m.phases.dynamic_phase),
        ("geometric_phase", m.phases.geometric_phase),
        ("minus_phase", m.minus_phase),
        ("relative_phase", relative),
        ("off_diagonal", m.off_diagonal),
    ];
    out.file(format!("{stem}_phases.csv"), key_value_csv(&rows));
    out.line("gamma_formula (4*atan(bx/bz))", num(formula.unreduced));
    out.line("gamma_measured (phase of |+>)", num(m.phases.geometric_phase));
    out.line("dynamic_phase", num(m.phases.dynamic_phase));
    out.line("relative phase |+>/|->", num(relative));
    out.line(
        "formula vs measured distance (mod 2pi)",
        num(phase_distance(formula.unreduced, m.phases.geometric_phase)),
    );
    out.line(
        "formula vs relative phase distance (mod 2pi)",
        num(phase_distance(formula.unreduced, relative)),
    );
    out.line("off-diagonal in sigma_y basis", num(m.off_diagonal));
    if formula.limit_case {
        out.line("note", "bz = 0 limit; formula taken as the limiting value");
    }

    if f.bz == 0.0 {
        out.line("note", "bz = 0: interference pattern skipped (field ratio undefined)");
        return;
    }
    let source = SweepSource::FieldRatio {
        ratios: vec![f.bx / f.bz],
        g_factor: g,
    };
    match sweep(cfg.initial.w0, cfg.initial.w1, &source, &probe_spec(cfg)) {
        Ok(p) => pattern_files(out, &stem, &p),
        Err(e) => out.error("pattern", &e),
    }
}

fn run_berry_loop(cfg: &ExperimentConfig, out: &mut Outcome) {
    let stem = cfg.prefix();
    let lp = match build_loop(cfg) {
        Ok(l) => l,
        Err(e) => return out.error("loop", &e),
    };
    out.feasibility = Some(check_duration(lp.total_time, cfg.t_relax));
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "branch",
        "total_phase",
        "dynamic_phase",
        "geometric_phase",
        "oracle",
        "deviation",
        "leakage",
    ];
    w.write_record(header).expect("in-memory write");
    for branch in [Branch::Plus, Branch::Minus] {
        match berry_loop(&lp, cfg.g_factor, branch) {
            Ok(r) => {
                let oracle = berry_oracle(cfg, branch);
                let dev = phase_distance(r.phases.geometric_phase, oracle);
                w.write_record([
                    branch.label().to_string(),
                    num(r.phases.total_phase),
                    num(r.phases.dynamic_phase),
                    num(r.phases.geometric_phase),
                    num(oracle),
                    num(dev),
                    num(r.leakage),
                ])
                .expect("in-memory write");
                out.line(&format!("{} geometric_phase", branch.label()), num(r.phases.geometric_phase));
                out.line(&format!("{} oracle (-/+ solid angle / 2)", branch.label()), num(oracle));
                out.line(&format!("{} deviation", branch.label()), num(dev));
                out.line(&format!("{} leakage", branch.label()), num(r.leakage));
            }
            Err(e) => out.error(&format!("{} branch", branch.label()), &e),
        }
    }
    out.file(format!("{stem}.csv"), w.into_inner().expect("in-memory flush"));
}

fn run_spin_echo(cfg: &ExperimentConfig, out: &mut Outcome) {
    let stem = cfg.prefix();
    let lp = match build_loop(cfg) {
        Ok(l) => l,
        Err(e) => return out.error("loop", &e),
    };
    let l = cfg.loop_.expect("validated");
    let second = lp.total_time * l.dwell_ratio;
    out.feasibility = Some(check_duration(lp.total_time + second, cfg.t_relax));
    let r = match spin_echo_with(&lp, cfg.g_factor, second) {
        Ok(r) => r,
        Err(e) => return out.error("echo", &e),
    };
    let omega = match l.shape {
        LoopShape::Cone => solid_angle_cone(l.polar_angle).unwrap_or(f64::NAN),
        LoopShape::BackAndForth => 0.0,
    };
    let (k, residual) = r.multiple_of_half_solid_angle(omega);
    let rows = [
        ("first_pass_time_ps", r.first_pass_time),
        ("second_pass_time_ps", r.second_pass_time),
        ("plus_total_phase", r.plus.total_phase),
        ("plus_dynamic_phase", r.plus.dynamic_phase),
        ("plus_geometric_phase", r.plus.geometric_phase),
        ("minus_total_phase", r.minus.total_phase),
        ("minus_dynamic_phase", r.minus.dynamic_phase),
        ("minus_geometric_phase", r.minus.geometric_phase),
        ("difference_total_phase", r.difference.total_phase),
        ("difference_dynamic_phase", r.difference.dynamic_phase),
        ("difference_geometric_phase", r.difference.geometric_phase),
        ("unechoed_dynamic_difference", r.unechoed_dynamic_difference),
        ("dynamic_cancellation", r.dynamic_cancellation()),
        ("solid_angle", omega),
        ("half_solid_angle_multiple", k as f64),
        ("half_solid_angle_residual", residual),
        ("leakage", r.leakage),
    ];
    out.file(format!("{stem}.csv"), key_value_csv(&rows));
    out.line("dynamic difference after echo", num(r.difference.dynamic_phase));
    out.line("dynamic difference without echo", num(r.unechoed_dynamic_difference));
    out.line("cancellation ratio", num(r.dynamic_cancellation()));
    out.line("plus geometric phase", num(r.plus.geometric_phase));
    out.line("branch geometric difference", num(r.difference.geometric_phase));
    out.line(
        "plus geometric phase / (-solid angle / 2)",
        format!("k = {k}, residual {}", num(residual)),
    );
}

fn run_stark(cfg: &ExperimentConfig, out: &mut Outcome) {
    let s = cfg.scheme.expect("validated");
    let g = cfg.g_factor;
    let stem = cfg.prefix();
    let scheme = LevelScheme {
        v1: s.v1,
        v2: s.v2,
        delta1: s.delta1,
        delta2: s.delta2,
        polarization: s.polarization,
    };
    let shifts = match stark_shifts(&scheme) {
        Ok(x) => x,
        Err(e) => return out.error("shifts", &e),
    };
    let split = cb_splitting(&shifts);
    let b_eff = match effective_field(split.magnitude, g) {
        Ok(b) => b,
        Err(e) => return out.error("effective field", &e),
    };
    let t_pi = pi_duration(split.magnitude);
    let duration = s.duration.unwrap_or(t_pi);
    let direction = Vector3::from(s.direction);
    let mut rows = vec![
        ("cb_minus_half_meV", shifts.cb_minus_half),
        ("cb_plus_half_meV", shifts.cb_plus_half),
        ("vb_minus_three_half_meV", shifts.vb_minus_three_half),
        ("vb_minus_half_meV", shifts.vb_minus_half),
        ("delta_cb_meV", split.magnitude),
        ("delta_cb_signed_meV", split.signed()),
        ("b_eff_T", b_eff),
        ("pi_duration_ps", t_pi),
        ("duration_ps", duration),
    ];
    out.line("polarization", s.polarization);
    out.line("delta_cb (meV)", num(split.magnitude));
    out.line("upper CB state", split.upper);
    out.line("B_eff (T)", num(b_eff));
    out.line("pi-pulse duration (ps)", num(t_pi));

    if !(duration.is_finite() && duration > 0.0) {
        out.error(
            "tipping pulse",
            &Error::InvalidValue {
                what: "duration",
                kind: "tipping pulse",
                reason: "zero splitting gives no pi duration; set scheme.duration".into(),
            },
        );
    } else {
        let tp = TippingPulse {
            scheme,
            duration,
            direction,
        };
        let g_free = rotation_angle_from_splitting(split.magnitude, duration);
        match pulse_rotation_angle(&tp, g) {
            Ok(angle) => {
                rows.push(("rotation_angle", angle));
                rows.push(("rotation_angle_g_free", g_free));
                rows.push(("g_cancellation_defect", (angle - g_free).abs()));
                out.line("rotation angle (g mu_B B_eff t / hbar)", num(angle));
                out.line("rotation angle (delta_cb t / hbar, g-free)", num(g_free));
                out.line(
                    "note",
                    "g cancels: the rotation angle depends only on delta_cb and duration",
                );
            }
            Err(e) => out.error("rotation angle", &e),
        }
        // Two tipping pulses with mirrored in-plane components, as in the
        // two-pulse protocol.
        let mirrored = Vector3::new(-direction.x, -direction.y, direction.z);
        let pulses: crate::error::Result<Vec<_>> = [direction, mirrored]
            .iter()
            .map(|d| to_field_pulse(&TippingPulse { direction: *d, ..tp }, g))
            .collect();
        match pulses {
            Ok(p) => {
                let seq = PulseSequence::from_pulses(p, g);
                rows.push(("protocol_duration_ps", seq.total_duration()));
                out.feasibility = Some(check_feasibility(&seq, cfg.t_relax));
            }
            Err(e) => out.error("protocol", &e),
        }
    }
    rows.push(("hbar_meV_ps", HBAR));
    out.file(format!("{stem}.csv"), key_value_csv(&rows));
}

fn run_verify(cfg: &ExperimentConfig, out: &mut Outcome) {
    let stem = cfg.prefix();
    let ratios = cfg.verify.as_ref().expect("validated").ratios.values();
    let g = cfg.g_factor;
    let report = verify_aa_formula_with(&ratios, g, cfg.integrator.steps_per_pulse, &alpha_values(cfg));
    let mut csv = Vec::new();
    report.write_csv(&mut csv).expect("in-memory write");
    let mut obs = Vec::new();
    report.write_observable_csv(&mut obs).expect("in-memory write");
    out.file(format!("{stem}.csv"), csv);
    out.file(format!("{stem}_observable.csv"), obs);
    out.summary.push_str(&report.summary());
    out.point_errors += report.errors();
    out.feasibility = longest_protocol(&ratios, g).map(|t| check_duration(t, cfg.t_relax));
}

/// Longest two-π-pulse protocol over a ratio grid at `bz = 1 T`.
fn longest_protocol(ratios: &[f64], g: f64) -> Option<f64> {
    ratios
        .iter()
        .filter_map(|r| aa_protocol(*r, 1.0, g).ok())
        .map(|s| s.total_duration())
        .reduce(f64::max)
}

fn run_sweep(cfg: &ExperimentConfig, out: &mut Outcome) {
    let s = cfg.sweep.as_ref().expect("validated");
    let source = match s.source {
        SweepSourceKind::Gamma => SweepSource::Gamma(s.gammas.as_ref().expect("validated").values()),
        SweepSourceKind::FieldRatio => {
            let ratios = s.ratios.as_ref().expect("validated").values();
            out.feasibility = longest_protocol(&ratios, cfg.g_factor).map(|t| check_duration(t, cfg.t_relax));
            SweepSource::FieldRatio {
                ratios,
                g_factor: cfg.g_factor,
            }
        }
    };
    match sweep(cfg.initial.w0, cfg.initial.w1, &source, &probe_spec(cfg)) {
        Ok(p) => {
            out.line("axis", p.axis);
            out.line("samples", p.samples.len());
            if p.has_pulse_oracle() {
                let gap = p
                    .samples
                    .iter()
                    .filter_map(|x| Some((x.mk_closed_form? - x.mk_pulse_oracle?).abs()))
                    .fold(0.0, f64::max);
                out.line("max |closed form - pulse oracle|", num(gap));
            }
            pattern_files(out, &cfg.prefix(), &p);
        }
        Err(e) => out.error("sweep", &e),
    }
}

fn render_report(cfg: &ExperimentConfig, hash: &str, echo: &str, warnings: &[String], o: &Outcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", cfg.kind);
    let _ = writeln!(s, "config_hash: sha256:{hash}");
    let _ = writeln!(s, "convention: {CONVENTION}");
    match &o.feasibility {
        Some(f) => {
            let _ = writeln!(s, "feasibility: {f}");
        }
        None => {
            let _ = writeln!(s, "feasibility: n/a");
        }
    }
    let _ = writeln!(s, "point_errors: {}", o.point_errors);
    for w in warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(s, "\n[results]");
    s.push_str(&o.summary);
    let _ = writeln!(s, "\n[files]");
    for (name, _) in &o.files {
        let _ = writeln!(s, "{name}");
    }
    let _ = writeln!(s, "\n[config]");
    s.push_str(echo);
    s
}

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport, RunError> {
    run_with_warnings(cfg, &[], out_dir)
}

/// Runs `cfg`, writing every output under `out_dir`.
pub fn run_with_warnings(
    cfg: &ExperimentConfig,
    warnings: &[String],
    out_dir: &Path,
) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let mut out = Outcome::default();
    match cfg.kind {
        ExperimentKind::AaProtocol => run_aa_protocol(cfg, &mut out),
        ExperimentKind::BerryLoop => run_berry_loop(cfg, &mut out),
        ExperimentKind::SpinEcho => run_spin_echo(cfg, &mut out),
        ExperimentKind::StarkPipeline => run_stark(cfg, &mut out),
        ExperimentKind::VerifyAa => run_verify(cfg, &mut out),
        ExperimentKind::Sweep => run_sweep(cfg, &mut out),
    }
    let echo = cfg.to_toml();
    let hash = cfg.hash();
    let report_text = render_report(cfg, &hash, &echo, warnings, &out);
    out.file(format!("{}_report.txt", cfg.prefix()), report_text.into_bytes());

    fs::create_dir_all(out_dir).map_err(|source| RunError {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::with_capacity(out.files.len());
    for (name, bytes) in &out.files {
        let path = out_dir.join(name);
        fs::write(&path, bytes).map_err(|source| RunError {
            path: path.clone(),
            source,
        })?;
        files.push(path);
    }
    Ok(RunReport {
        kind: cfg.kind,
        config_echo: echo,
        config_hash: hash,
        convention: CONVENTION,
        summary: out.summary,
        feasibility: out.feasibility,
        warnings: warnings.to_vec(),
        point_errors: out.point_errors,
        files,
        wall_time: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;

    fn run_text(text: &str) -> (RunReport, tempfile::TempDir) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(text).unwrap();
        (run(&cfg, dir.path()).unwrap(), dir)
    }

    #[test]
    fn stark_report_has_20_tesla() {
        let (r, dir) = run_text(
            "kind = \"stark-pipeline\"\ng_factor = 0.864\n[scheme]\nv1 = 1.0\nv2 = 0.0\ndelta1 = 1.0\ndelta2 = 1.0\n",
        );
        assert_eq!(r.point_errors, 0);
        assert_eq!(r.feasibility.unwrap().verdict, Verdict::Pass);
        let text = fs::read_to_string(dir.path().join("stark_pipeline_report.txt")).unwrap();
        let line = text.lines().find(|l| l.starts_with("B_eff (T)")).unwrap();
        let b: f64 = line.split(": ").nth(1).unwrap().parse().unwrap();
        assert!((b - 20.0).abs() < 0.02);
        assert!(text.contains("config_hash: sha256:"));
    }

    #[test]
    fn gamma_sweep_plot_file() {
        let (r, dir) = run_text(
            "kind = \"sweep\"\ng_factor = 2.0\n[probe]\nalpha = 0.0\n[sweep]\nsource = \"gamma\"\ngammas = { start = 0.0, end = 3.0, points = 31 }\n",
        );
        assert_eq!(r.point_errors, 0);
        let dat = fs::read_to_string(dir.path().join("sweep_pattern.dat")).unwrap();
        let rows: Vec<(f64, f64)> = dat
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| {
                let mut it = l.split_whitespace().map(|x| x.parse::<f64>().unwrap());
                (it.next().unwrap(), it.next().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 31);
        for (g, m) in rows {
            assert!((m - (2.0 * g).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn verify_csv_has_verdicts() {
        let (r, dir) = run_text(
            "kind = \"verify-aa\"\ng_factor = 0.864\n[integrator]\nsteps_per_pulse = 64\n[probe]\nalpha = 0.5\n[verify]\nratios = [0.0, 1.0, 2.0]\n",
        );
        assert_eq!(r.point_errors, 0);
        let text = fs::read_to_string(dir.path().join("verify_aa.csv")).unwrap();
        assert!(text.lines().next().unwrap().ends_with(",verdict"));
        assert_eq!(text.lines().count(), 4);
        assert!(dir.path().join("verify_aa_observable.csv").exists());
    }

    #[test]
    fn repeated_runs_are_identical() {
        let text = "kind = \"aa-protocol\"\ng_factor = 0.864\n[integrator]\nsteps_per_pulse = 128\n[field]\nbx = 0.3\nbz = 1.0\n";
        let (a, da) = run_text(text);
        let (b, db) = run_text(text);
        assert_eq!(a.files.len(), b.files.len());
        for (fa, fb) in a.files.iter().zip(&b.files) {
            assert_eq!(fa.file_name(), fb.file_name());
            assert_eq!(fs::read(fa).unwrap(), fs::read(fb).unwrap());
        }
        drop((da, db));
    }

    #[test]
    fn exit_codes() {
        let (r, _d) = run_text(
            "kind = \"sweep\"\ng_factor = 2.0\n[probe]\nalpha = 0.0\n[sweep]\nsource = \"field-ratio\"\nratios = [0.5, 1e308, 1.0]\n",
        );
        // |B| overflows at the middle point; the other two still run.
        assert_eq!(r.point_errors, 1);
        assert!(r.summary.contains("not finite"));
        assert_eq!(r.exit_code(false), EXIT_OK);
        assert_eq!(r.exit_code(true), EXIT_POINT_ERRORS);

        let (r, _d) = run_text(
            "kind = \"berry-loop\"\ng_factor = 2.0\n[loop]\npolar_angle = 1.0\nmagnitude = 1.0\ntotal_time = 10.0\n[integrator]\nsteps_per_loop = 256\n",
        );
        // Far from adiabatic: leakage error on both branches.
        assert_eq!(r.point_errors, 2);
        assert_eq!(r.exit_code(false), EXIT_OK);
        assert_eq!(r.exit_code(true), EXIT_POINT_ERRORS);
    }

    #[test]
    fn io_error_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let cfg = parse_config("kind = \"stark-pipeline\"\ng_factor = 1.0\n[scheme]\nv1 = 1.0\nv2 = 0.0\ndelta1 = 1.0\ndelta2 = 1.0\n").unwrap();
        assert!(run(&cfg, &blocker.join("sub")).is_err());
    }
}
