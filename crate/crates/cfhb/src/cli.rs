//! Configuration ingestion, command dispatch, and file emission.

use crate::metrics::numeric_metrics;
use crate::params::{
    derive, omega_tau_of, plan_interval, validate_soft_switching, zcs_margin_ratio,
    ConverterParams, DerivedParams, DeviceParams, ModulationScheme, SchemeTag,
};
use crate::sweep::{aggregate, compare, loss_report, power_balance, sweep_csv, sweep_half_cycle};
use crate::waveforms::{dump_csv, synth_interval};
use crate::{fmt_g9, CfhbError, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

/// Inductance override used by zero-ripple mode [H].
pub const ZERO_RIPPLE_L: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeakCurrentConfig {
    /// Commanded peak winding current [A].
    pub i_max: f64,
}

impl Default for PeakCurrentConfig {
    fn default() -> Self {
        PeakCurrentConfig { i_max: 10.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdcpsmConfig {
    /// Peak-tracking ratio `i_lk_pk / |ig|`. Defaults to `dcpsm.i_max / Im`
    /// so IDCPSM and DCPSM coincide at the grid peak.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

/// Full run configuration; every field has a hardware-prototype default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub converter: ConverterParams,
    pub device: DeviceParams,
    pub spsm: PeakCurrentConfig,
    pub dcpsm: PeakCurrentConfig,
    pub idcpsm: IdcpsmConfig,
    /// Uniform samples per switching interval in waveform CSV output.
    pub samples_per_interval: usize,
    /// Replace both boost inductances with 0.1 H to suppress ripple.
    pub zero_ripple: bool,
    /// Skip waveform synthesis; report closed-form metrics only.
    pub analytic_only: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            converter: ConverterParams::default(),
            device: DeviceParams::default(),
            spsm: PeakCurrentConfig::default(),
            dcpsm: PeakCurrentConfig::default(),
            idcpsm: IdcpsmConfig::default(),
            samples_per_interval: 200,
            zero_ripple: false,
            analytic_only: false,
        }
    }
}

impl RunConfig {
    /// Converter parameters with the zero-ripple override applied.
    pub fn effective_converter(&self) -> ConverterParams {
        let mut p = self.converter;
        if self.zero_ripple {
            p.l1 = ZERO_RIPPLE_L;
            p.l2 = ZERO_RIPPLE_L;
        }
        p
    }

    /// Resolves a scheme tag to a fully parameterized scheme.
    pub fn scheme(&self, tag: SchemeTag, d: &DerivedParams) -> ModulationScheme {
        match tag {
            SchemeTag::Spsm => ModulationScheme::Spsm {
                i_max: self.spsm.i_max,
            },
            SchemeTag::Dcpsm => ModulationScheme::Dcpsm {
                i_max: self.dcpsm.i_max,
            },
            SchemeTag::Idcpsm => ModulationScheme::Idcpsm {
                r: self.idcpsm.r.unwrap_or(self.dcpsm.i_max / d.im),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let p = self.effective_converter();
        let d = derive(&p).map_err(|e| match e {
            CfhbError::InvalidParams(m) if m.contains("d1 <= 0.5") => {
                CfhbError::Config("d1 <= 0.5 infeasible: n*Vm >= Vo/2".into())
            }
            other => other,
        })?;
        self.device.validate()?;
        if self.spsm.i_max <= 0.0 || self.dcpsm.i_max <= 0.0 {
            return Err(CfhbError::Config("i_max must be > 0".into()));
        }
        if self.samples_per_interval < 2 {
            return Err(CfhbError::Config("samples_per_interval must be >= 2".into()));
        }
        if let Some(r) = self.idcpsm.r {
            let floor = zcs_margin_ratio(&p, &d);
            if r <= floor {
                return Err(CfhbError::Config(format!(
                    "idcpsm r = {r} violates the ZCS margin rule (must exceed {})",
                    fmt_g9(floor)
                )));
            }
        }
        Ok(())
    }
}

/// Parses and validates a TOML config; omitted fields take the
/// hardware-prototype defaults, unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig =
        toml::from_str(text).map_err(|e| CfhbError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical TOML serialization; `parse_config(serialize_config(c)) == c`.
pub fn serialize_config(cfg: &RunConfig) -> String {
    toml::to_string_pretty(cfg).expect("config serializes")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Simulate {
        scheme: SchemeTag,
        omega_tau_deg: f64,
    },
    Sweep {
        scheme: SchemeTag,
    },
    Compare {
        schemes: Vec<SchemeTag>,
    },
    Validate {
        scheme: SchemeTag,
    },
}

/// Output of a dispatched command: the process exit code, paths written,
/// and the plain-text summary.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Dispatches one command against a validated config. Exit codes: 0 on
/// success, 2 when `validate` finds a non-degenerate infeasible interval;
/// hard errors are returned as `Err` (exit 1 at the binary boundary).
pub fn run(cfg: &RunConfig, cmd: &Command, out_dir: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let p = cfg.effective_converter();
    let d = derive(&p)?;
    match cmd {
        Command::Simulate {
            scheme,
            omega_tau_deg,
        } => run_simulate(cfg, &p, &d, *scheme, *omega_tau_deg, out_dir),
        Command::Sweep { scheme } => run_sweep(cfg, &p, &d, *scheme, out_dir),
        Command::Compare { schemes } => run_compare(cfg, &p, &d, schemes, out_dir),
        Command::Validate { scheme } => run_validate(cfg, &p, &d, *scheme, out_dir),
    }
}

fn run_simulate(
    cfg: &RunConfig,
    p: &ConverterParams,
    d: &DerivedParams,
    tag: SchemeTag,
    omega_tau_deg: f64,
    out_dir: &Path,
) -> Result<RunOutcome> {
    if tag == SchemeTag::Spsm {
        return Err(CfhbError::Usage(
            "spsm is analytics-only; waveform simulation supports dcpsm and idcpsm".into(),
        ));
    }
    if !(0.0..=180.0).contains(&omega_tau_deg) {
        return Err(CfhbError::Usage(
            "omega_tau must be within [0, 180] degrees".into(),
        ));
    }
    // Angle-addressed: map the requested angle to the nearest interval index.
    let kc = d.intervals_per_half_cycle;
    let k = ((omega_tau_deg / 180.0) * kc as f64).round() as usize;
    let k = k.min(kc - 1);
    let scheme = cfg.scheme(tag, d);
    let plan = plan_interval(p, d, &scheme, k)?;
    let nw = synth_interval(&plan, p, d)?;
    let m = numeric_metrics(&nw, &plan, d.ts)?;
    let path = out_dir.join(format!("waveform_{tag}_k{k}.csv"));
    dump_csv(&nw, d.ts, cfg.samples_per_interval, File::create(&path)?)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "simulate {tag}: omega_tau {} deg -> interval k = {k} ({} deg)",
        fmt_g9(omega_tau_deg),
        fmt_g9(omega_tau_of(d, k).to_degrees())
    );
    let _ = writeln!(
        s,
        "  vg = {} V  ig = {} A  d1 = {}  d2 = {}",
        fmt_g9(plan.vg),
        fmt_g9(plan.ig),
        fmt_g9(plan.d1),
        fmt_g9(plan.d2)
    );
    let _ = writeln!(
        s,
        "  i_lk_pk = {} A  alpha = {}  beta = {}  degenerate = {}",
        fmt_g9(plan.i_lk_pk),
        fmt_g9(plan.alpha),
        fmt_g9(plan.beta),
        plan.degenerate
    );
    let _ = writeln!(
        s,
        "  ilk_rms = {} A  s_ac_rms = {} A  d_ac_avg = {} A  s_dc_rms = {} A  d_dc_avg = {} A",
        fmt_g9(m.ilk_rms),
        fmt_g9(m.s_ac_rms),
        fmt_g9(m.d_ac_avg),
        fmt_g9(m.s_dc_rms),
        fmt_g9(m.d_dc_avg)
    );
    let _ = writeln!(s, "  wrote {}", path.display());
    Ok(RunOutcome {
        exit_code: 0,
        files: vec![path],
        summary: s,
    })
}

fn run_sweep(
    cfg: &RunConfig,
    p: &ConverterParams,
    d: &DerivedParams,
    tag: SchemeTag,
    out_dir: &Path,
) -> Result<RunOutcome> {
    let scheme = cfg.scheme(tag, d);
    let profile = sweep_half_cycle(p, d, &scheme, cfg.analytic_only)?;
    let path = out_dir.join(format!("sweep_{tag}.csv"));
    sweep_csv(&profile, File::create(&path)?)?;
    let cm = aggregate(&profile)?;
    let loss = loss_report(&cm, &cfg.device, p);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "sweep {tag}: {} intervals ({} used in aggregates)",
        profile.len(),
        cm.intervals_used
    );
    let _ = writeln!(
        s,
        "  cycle ilk_rms = {} A  s_ac_rms = {} A  s_dc_rms = {} A",
        fmt_g9(cm.ilk_rms),
        fmt_g9(cm.s_ac_rms),
        fmt_g9(cm.s_dc_rms)
    );
    let _ = writeln!(
        s,
        "  d_ac_avg = {} A  d_dc_avg = {} A  i_lk_pk = {} A  peak_ratio = {}",
        fmt_g9(cm.d_ac_avg),
        fmt_g9(cm.d_dc_avg),
        fmt_g9(cm.i_lk_pk),
        fmt_g9(cm.peak_ratio)
    );
    let _ = writeln!(
        s,
        "  model losses = {} W  efficiency = {}",
        fmt_g9(loss.total()),
        fmt_g9(loss.efficiency)
    );
    if let Some(pd) = power_balance(&profile, p, d)? {
        let _ = writeln!(s, "  delivered power (waveform model) = {} W", fmt_g9(pd));
    }
    let _ = writeln!(s, "  wrote {}", path.display());
    Ok(RunOutcome {
        exit_code: 0,
        files: vec![path],
        summary: s,
    })
}

fn run_compare(
    cfg: &RunConfig,
    p: &ConverterParams,
    d: &DerivedParams,
    tags: &[SchemeTag],
    out_dir: &Path,
) -> Result<RunOutcome> {
    let schemes: Vec<ModulationScheme> = tags.iter().map(|t| cfg.scheme(*t, d)).collect();
    let report = compare(p, d, &cfg.device, &schemes, cfg.analytic_only)?;
    let path = out_dir.join("compare.csv");
    report.write_csv(File::create(&path)?)?;
    let mut s = report.render_text();
    let _ = writeln!(s, "wrote {}", path.display());
    Ok(RunOutcome {
        exit_code: 0,
        files: vec![path],
        summary: s,
    })
}

fn run_validate(
    cfg: &RunConfig,
    p: &ConverterParams,
    d: &DerivedParams,
    tag: SchemeTag,
    out_dir: &Path,
) -> Result<RunOutcome> {
    let scheme = cfg.scheme(tag, d);
    scheme.validate()?;
    let path = out_dir.join(format!("validate_{tag}.csv"));
    let mut w = csv::Writer::from_writer(File::create(&path)?);
    w.write_record([
        "k",
        "omega_tau_deg",
        "degenerate",
        "zcs_margin",
        "circulating",
        "timing_budget",
        "d1_range",
        "pass",
    ])?;
    let mut failed = 0usize;
    let mut degenerate = 0usize;
    let kc = d.intervals_per_half_cycle;
    for k in 0..kc {
        let plan = plan_interval(p, d, &scheme, k)?;
        let r = validate_soft_switching(&plan);
        let pass = r.all_pass();
        w.write_record([
            k.to_string(),
            fmt_g9(plan.omega_tau.to_degrees()),
            r.degenerate.to_string(),
            r.zcs_margin.to_string(),
            r.circulating.to_string(),
            r.timing_budget.to_string(),
            r.d1_range.to_string(),
            pass.to_string(),
        ])?;
        if r.degenerate {
            degenerate += 1;
        } else if !pass {
            failed += 1;
        }
    }
    w.flush()?;
    drop(w);
    let exit_code = if failed > 0 { 2 } else { 0 };
    let mut s = String::new();
    let _ = writeln!(
        s,
        "validate {tag}: {} intervals, {} degenerate (near zero crossing), {} infeasible",
        kc, degenerate, failed
    );
    let _ = writeln!(
        s,
        "  verdict: {}",
        if failed > 0 {
            "INFEASIBLE (exit 2)"
        } else {
            "all non-degenerate intervals pass"
        }
    );
    let _ = writeln!(s, "  wrote {}", path.display());
    Ok(RunOutcome {
        exit_code,
        files: vec![path],
        summary: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parse_empty_is_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.converter.vg_rms, 230.0);
        assert_eq!(cfg.converter.fsw, 100e3);
        assert_eq!(cfg.samples_per_interval, 200);
        assert_eq!(cfg.idcpsm.r, None);
    }

    #[test]
    fn parse_rejects_unknown_keys() {
        assert!(parse_config("[converter]\nvoltage = 230.0\n").is_err());
        assert!(parse_config("turbo = true\n").is_err());
    }

    #[test]
    fn parse_rejects_infeasible_duty() {
        let err = parse_config("[converter]\nn = 0.8\n").unwrap_err();
        assert!(err.to_string().contains("d1 <= 0.5"));
    }

    #[test]
    fn parse_rejects_low_idcpsm_ratio() {
        let err = parse_config("[idcpsm]\nr = 0.4\n").unwrap_err();
        assert!(err.to_string().contains("ZCS margin"));
        // Just above the margin is accepted.
        assert!(parse_config("[idcpsm]\nr = 0.74\n").is_ok());
    }

    #[test]
    fn round_trip() {
        let doc =
            "zero_ripple = true\n\n[converter]\nvo = 400.0\n\n[dcpsm]\ni_max = 9.0\n\n[idcpsm]\nr = 1.2\n";
        let cfg = parse_config(doc).unwrap();
        let cfg2 = parse_config(&serialize_config(&cfg)).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(cfg2.converter.vo, 400.0);
        assert!(cfg2.zero_ripple);
    }

    #[test]
    fn zero_ripple_override() {
        let cfg = parse_config("zero_ripple = true\n").unwrap();
        let p = cfg.effective_converter();
        assert_eq!(p.l1, 0.1);
        assert_eq!(p.l2, 0.1);
    }

    #[test]
    fn default_idcpsm_ratio_matches_peak() {
        let cfg = RunConfig::default();
        let d = derive(&cfg.converter).unwrap();
        match cfg.scheme(SchemeTag::Idcpsm, &d) {
            ModulationScheme::Idcpsm { r } => {
                assert_relative_eq!(r * d.im, 10.2, max_relative = 1e-12)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn simulate_writes_waveform_csv() {
        let cfg = RunConfig::default();
        let dir = tempfile::tempdir().unwrap();
        let out = run(
            &cfg,
            &Command::Simulate {
                scheme: SchemeTag::Idcpsm,
                omega_tau_deg: 90.0,
            },
            dir.path(),
        )
        .unwrap();
        assert_eq!(out.exit_code, 0);
        assert!(out.summary.contains("k = 500"));
        let text = std::fs::read_to_string(&out.files[0]).unwrap();
        let max_ilk = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
            .fold(f64::MIN, f64::max);
        assert!((max_ilk - 10.2).abs() < 0.01);
    }

    #[test]
    fn simulate_rejects_spsm() {
        let cfg = RunConfig::default();
        let dir = tempfile::tempdir().unwrap();
        let cmd = Command::Simulate {
            scheme: SchemeTag::Spsm,
            omega_tau_deg: 90.0,
        };
        assert!(run(&cfg, &cmd, dir.path()).is_err());
    }

    #[test]
    fn validate_exit_codes() {
        let cfg = RunConfig::default();
        let dir = tempfile::tempdir().unwrap();
        let ok = run(
            &cfg,
            &Command::Validate {
                scheme: SchemeTag::Idcpsm,
            },
            dir.path(),
        )
        .unwrap();
        assert_eq!(ok.exit_code, 0);
        // A DCPSM peak below ig/2 over part of the cycle fails the
        // circulating-current criterion on non-degenerate intervals.
        let mut low = RunConfig::default();
        low.dcpsm.i_max = 2.0;
        let bad = run(
            &low,
            &Command::Validate {
                scheme: SchemeTag::Dcpsm,
            },
            dir.path(),
        )
        .unwrap();
        assert_eq!(bad.exit_code, 2);
    }

    #[test]
    fn compare_single_scheme_is_usage_error() {
        let cfg = RunConfig::default();
        let dir = tempfile::tempdir().unwrap();
        let cmd = Command::Compare {
            schemes: vec![SchemeTag::Idcpsm],
        };
        match run(&cfg, &cmd, dir.path()) {
            Err(CfhbError::Usage(_)) => {}
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn sweep_csv_byte_stable() {
        let cfg = RunConfig::default();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let cmd = Command::Sweep {
            scheme: SchemeTag::Idcpsm,
        };
        let a = run(&cfg, &cmd, d1.path()).unwrap();
        let b = run(&cfg, &cmd, d2.path()).unwrap();
        let fa = std::fs::read(&a.files[0]).unwrap();
        let fb = std::fs::read(&b.files[0]).unwrap();
        assert_eq!(fa, fb);
    }
}
