//! Converter configuration, derived quantities, and per-interval operating
//! points (duties, commutation angles, peak currents) for each modulation
//! scheme, plus soft-switching feasibility checks.

use crate::{CfhbError, Result};
use serde::{Deserialize, Serialize};

/// Electrical ratings and magnetics of the converter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConverterParams {
    /// Grid RMS voltage [V].
    pub vg_rms: f64,
    /// Grid frequency [Hz].
    pub fg: f64,
    /// Output DC voltage [V].
    pub vo: f64,
    /// Output power [W].
    pub po: f64,
    /// Switching frequency [Hz].
    pub fsw: f64,
    /// Transformer turns ratio Ns/Np.
    pub n: f64,
    /// Boost inductances [H].
    pub l1: f64,
    pub l2: f64,
    /// HFT leakage inductance referred to the AC side [H].
    pub llk: f64,
    /// DC-side external series inductance [H].
    pub ls: f64,
}

impl Default for ConverterParams {
    fn default() -> Self {
        ConverterParams {
            vg_rms: 230.0,
            fg: 50.0,
            vo: 345.0,
            po: 1500.0,
            fsw: 100e3,
            n: 0.38,
            l1: 740e-6,
            l2: 740e-6,
            llk: 600e-9,
            ls: 7.5e-6,
        }
    }
}

/// Quantities derived from [`ConverterParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// Grid peak voltage [V].
    pub vm: f64,
    /// Grid peak current [A].
    pub im: f64,
    /// Switching period [s].
    pub ts: f64,
    /// Total series inductance referred to the AC side [H].
    pub lt: f64,
    /// Switching intervals per half grid cycle.
    pub intervals_per_half_cycle: usize,
}

/// Modulation scheme selection with its control parameter.
///
/// SPSM carries the same `i_max` used by the default per-interval parameter
/// heuristic (`i_lk_pk = max(i_max, half the peak boost-inductor current)`);
/// callers needing different SPSM interval parameters can build plans via
/// [`plan_interval_spsm_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModulationScheme {
    Spsm { i_max: f64 },
    Dcpsm { i_max: f64 },
    Idcpsm { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeTag {
    Spsm,
    Dcpsm,
    Idcpsm,
}

impl ModulationScheme {
    pub fn tag(&self) -> SchemeTag {
        match self {
            ModulationScheme::Spsm { .. } => SchemeTag::Spsm,
            ModulationScheme::Dcpsm { .. } => SchemeTag::Dcpsm,
            ModulationScheme::Idcpsm { .. } => SchemeTag::Idcpsm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ModulationScheme::Spsm { i_max } | ModulationScheme::Dcpsm { i_max } => {
                if i_max <= 0.0 {
                    return Err(CfhbError::InvalidParams("i_max must be > 0".into()));
                }
            }
            ModulationScheme::Idcpsm { r } => {
                if r <= 0.5 {
                    return Err(CfhbError::InvalidParams(
                        "idcpsm r must be > 0.5 for positive circulating current".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SchemeTag::Spsm => "spsm",
            SchemeTag::Dcpsm => "dcpsm",
            SchemeTag::Idcpsm => "idcpsm",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for SchemeTag {
    type Err = CfhbError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spsm" => Ok(SchemeTag::Spsm),
            "dcpsm" => Ok(SchemeTag::Dcpsm),
            "idcpsm" => Ok(SchemeTag::Idcpsm),
            other => Err(CfhbError::Usage(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Device and copper parameters for the loss model. All resistances in
/// ohms, drops in volts, energies in joules, fixed losses in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceParams {
    pub rds_on_ac: f64,
    pub rds_on_dc: f64,
    pub vf_ac: f64,
    pub vf_dc: f64,
    pub r_winding_ac: f64,
    pub r_winding_dc: f64,
    pub r_series: f64,
    pub p_core_fixed: f64,
    pub e_hard_switch: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams {
            rds_on_ac: 0.08,
            rds_on_dc: 0.03,
            vf_ac: 3.3,
            vf_dc: 1.5,
            r_winding_ac: 0.05,
            r_winding_dc: 0.05,
            r_series: 0.05,
            p_core_fixed: 5.0,
            e_hard_switch: 0.0,
        }
    }
}

impl DeviceParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.rds_on_ac,
            self.rds_on_dc,
            self.vf_ac,
            self.vf_dc,
            self.r_winding_ac,
            self.r_winding_dc,
            self.r_series,
            self.p_core_fixed,
            self.e_hard_switch,
        ];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CfhbError::InvalidParams(
                "device parameters must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Per-switching-interval operating point for one scheme. Duties and
/// commutation angles are stored as fractions of the switching period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPlan {
    pub k: usize,
    /// Electrical angle [rad].
    pub omega_tau: f64,
    /// Sampled grid voltage [V] (magnitude; half-cycle symmetry).
    pub vg: f64,
    /// Sampled grid current [A] (magnitude).
    pub ig: f64,
    pub d1: f64,
    pub d2: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Peak winding current [A].
    pub i_lk_pk: f64,
    /// Winding current at the end of stage 1 [A].
    pub i_lk_t1: f64,
    /// Winding current at the ZCS hand-off after stage 5 [A].
    pub i_lk_t5: f64,
    /// Peak-to-peak boost inductor current ripple vg*d1*Ts/L [A], per leg.
    pub ripple_l1: f64,
    pub ripple_l2: f64,
    pub scheme: SchemeTag,
    pub degenerate: bool,
}

impl IntervalPlan {
    /// Circulating current, `i_lk_pk - ig/2`.
    pub fn i_cir(&self) -> f64 {
        self.i_lk_pk - self.ig / 2.0
    }

    /// Commutation timing budget that must fit in half a switching period.
    pub fn timing_budget(&self) -> f64 {
        self.alpha + self.d2 + self.beta + (1.0 - self.d1)
    }
}

/// Soft-switching feasibility verdicts for one interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityReport {
    /// (a) ZCS margin: `i_lk_pk > i_lk(t5)` (beta > 0).
    pub zcs_margin: bool,
    /// (b) positive circulating current: `i_lk_pk - ig/2 > 0`.
    pub circulating: bool,
    /// (c) timing budget `alpha + d2 + beta + (1 - d1) < 0.5`.
    pub timing_budget: bool,
    /// (d) `d1` in (0.5, 1).
    pub d1_range: bool,
    /// Interval flagged degenerate (near the grid zero crossing).
    pub degenerate: bool,
}

impl FeasibilityReport {
    pub fn all_pass(&self) -> bool {
        self.zcs_margin && self.circulating && self.timing_budget && self.d1_range
    }
}

/// Derives secondary quantities from the converter parameters.
pub fn derive(p: &ConverterParams) -> Result<DerivedParams> {
    let fields = [
        p.vg_rms, p.fg, p.vo, p.po, p.fsw, p.n, p.l1, p.l2, p.llk, p.ls,
    ];
    if fields.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(CfhbError::InvalidParams(
            "all converter parameters must be finite and > 0".into(),
        ));
    }
    let ratio = p.fsw / (2.0 * p.fg);
    if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
        return Err(CfhbError::InvalidParams(format!(
            "fsw/(2*fg) = {ratio} must be a positive integer"
        )));
    }
    let vm = p.vg_rms * std::f64::consts::SQRT_2;
    if p.n * vm >= p.vo / 2.0 {
        return Err(CfhbError::InvalidParams(
            "n*Vm >= Vo/2: d1 <= 0.5 infeasible at the grid peak".into(),
        ));
    }
    Ok(DerivedParams {
        vm,
        im: 2.0 * p.po / vm,
        ts: 1.0 / p.fsw,
        lt: p.llk + p.ls / (p.n * p.n),
        intervals_per_half_cycle: ratio.round() as usize,
    })
}

/// Samples grid voltage and current for interval `k` (unity power factor).
pub fn grid_sample(d: &DerivedParams, k: usize) -> (f64, f64) {
    let omega_tau = omega_tau_of(d, k);
    (d.vm * omega_tau.sin(), d.im * omega_tau.sin())
}

/// Electrical angle of interval `k` [rad].
pub fn omega_tau_of(d: &DerivedParams, k: usize) -> f64 {
    std::f64::consts::PI * k as f64 / d.intervals_per_half_cycle as f64
}

/// AC-side duty ratio.
pub fn duty_d1(vg: f64, vo: f64, n: f64) -> Result<f64> {
    if n * vg.abs() >= vo {
        return Err(CfhbError::Infeasible("n*|vg| >= vo".into()));
    }
    let d1 = (vo - n * vg.abs()) / vo;
    if d1 <= 0.5 {
        return Err(CfhbError::Infeasible(format!("d1 = {d1} <= 0.5")));
    }
    Ok(d1)
}

/// Peak winding current commanded by the scheme for this interval.
pub fn ilk_peak(scheme: &ModulationScheme, ig: f64, ripple_l1: f64) -> f64 {
    match *scheme {
        ModulationScheme::Dcpsm { i_max } => i_max,
        ModulationScheme::Idcpsm { r } => r * ig.abs(),
        ModulationScheme::Spsm { i_max } => {
            // Default SPSM heuristic: at least the DCPSM sizing current,
            // never below the boost-inductor peak the winding must carry.
            i_max.max(0.5 * (ig.abs() + ripple_l1.abs()))
        }
    }
}

/// DC-side duty controlling the winding-current ramp duration.
pub fn duty_d2(i_lk_pk: f64, p: &ConverterParams, d: &DerivedParams) -> f64 {
    p.n * d.lt * i_lk_pk / (p.vo * d.ts)
}

/// Duty per ampere of winding current, `n*Lt/(Vo*Ts)`.
pub fn duty_per_ampere(p: &ConverterParams, d: &DerivedParams) -> f64 {
    p.n * d.lt / (p.vo * d.ts)
}

/// Commutation-angle fractions for a partially built plan.
///
/// Returns `(alpha, beta, i_lk_t1, i_lk_t5)`. The ripple term uses L2 for
/// alpha (stage-1 boundary) and L1 for beta (stage-5 boundary).
pub fn commutation_angles(
    p: &ConverterParams,
    d: &DerivedParams,
    vg: f64,
    ig: f64,
    d1: f64,
    i_lk_pk: f64,
) -> (f64, f64, f64, f64) {
    let kf = duty_per_ampere(p, d);
    let r1 = vg * d1 * d.ts / p.l1;
    let r2 = vg * d1 * d.ts / p.l2;
    let i_lk_t1 = -0.5 * (ig - r2);
    let i_lk_t5 = 0.5 * (ig + r1);
    let alpha = kf * i_lk_t1.abs();
    let beta = kf * (i_lk_t5 - i_lk_pk).abs();
    (alpha, beta, i_lk_t1, i_lk_t5)
}

fn build_plan(
    p: &ConverterParams,
    d: &DerivedParams,
    tag: SchemeTag,
    k: usize,
    omega_tau: f64,
    vg: f64,
    ig: f64,
    i_lk_pk: f64,
) -> Result<IntervalPlan> {
    let d1 = duty_d1(vg, p.vo, p.n)?;
    let d2 = duty_d2(i_lk_pk, p, d);
    let (alpha, beta, i_lk_t1, i_lk_t5) = commutation_angles(p, d, vg, ig, d1, i_lk_pk);
    let ripple_l1 = vg * d1 * d.ts / p.l1;
    let ripple_l2 = vg * d1 * d.ts / p.l2;
    let degenerate = ig.abs() < 0.01 * d.im || (1.0 - d1) < 2.0 * (alpha + beta);
    Ok(IntervalPlan {
        k,
        omega_tau,
        vg,
        ig,
        d1,
        d2,
        alpha,
        beta,
        i_lk_pk,
        i_lk_t1,
        i_lk_t5,
        ripple_l1,
        ripple_l2,
        scheme: tag,
        degenerate,
    })
}

/// Builds the full operating point for interval `k`.
///
/// The negative half cycle is handled by symmetry: the plan stores |vg|, |ig|
/// and the switch roles are relabeled by the caller.
pub fn plan_interval(
    p: &ConverterParams,
    d: &DerivedParams,
    scheme: &ModulationScheme,
    k: usize,
) -> Result<IntervalPlan> {
    scheme.validate()?;
    let omega_tau = omega_tau_of(d, k);
    plan_at_angle(p, d, scheme, k, omega_tau)
}

/// Builds an operating point at an explicit electrical angle (used by the
/// angle-addressed `simulate` command and by tests).
pub fn plan_at_angle(
    p: &ConverterParams,
    d: &DerivedParams,
    scheme: &ModulationScheme,
    k: usize,
    omega_tau: f64,
) -> Result<IntervalPlan> {
    let vg = (d.vm * omega_tau.sin()).abs();
    let ig = (d.im * omega_tau.sin()).abs();
    let ripple_l1 = {
        let d1 = duty_d1(vg, p.vo, p.n)?;
        vg * d1 * d.ts / p.l1
    };
    let i_lk_pk = ilk_peak(scheme, ig, ripple_l1);
    build_plan(p, d, scheme.tag(), k, omega_tau, vg, ig, i_lk_pk)
}

/// Builds an SPSM plan with caller-supplied per-interval parameters
/// `(i_lk_pk, beta)`. `beta` overrides the stage-5 formula.
pub fn plan_interval_spsm_with(
    p: &ConverterParams,
    d: &DerivedParams,
    k: usize,
    i_lk_pk: f64,
    beta: f64,
) -> Result<IntervalPlan> {
    let omega_tau = omega_tau_of(d, k);
    let vg = (d.vm * omega_tau.sin()).abs();
    let ig = (d.im * omega_tau.sin()).abs();
    let mut plan = build_plan(p, d, SchemeTag::Spsm, k, omega_tau, vg, ig, i_lk_pk)?;
    plan.beta = beta;
    Ok(plan)
}

/// Worst-case ripple-aware lower bound on the IDCPSM ratio `r` for ZCS.
pub fn zcs_margin_ratio(p: &ConverterParams, d: &DerivedParams) -> f64 {
    0.5 * (1.0 + d.vm * d.ts / (p.l1 * d.im))
}

/// Per-interval soft-switching verdicts.
pub fn validate_soft_switching(plan: &IntervalPlan) -> FeasibilityReport {
    FeasibilityReport {
        zcs_margin: plan.i_lk_pk > plan.i_lk_t5,
        circulating: plan.i_cir() > 0.0,
        timing_budget: plan.timing_budget() < 0.5,
        d1_range: plan.d1 > 0.5 && plan.d1 < 1.0,
        degenerate: plan.degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table_defaults() -> (ConverterParams, DerivedParams) {
        let p = ConverterParams::default();
        let d = derive(&p).unwrap();
        (p, d)
    }

    const DEG: f64 = std::f64::consts::PI / 180.0;

    #[test]
    fn derive_defaults() {
        let (_, d) = table_defaults();
        assert_relative_eq!(d.vm, 325.2691193458119, max_relative = 1e-12);
        assert_relative_eq!(d.im, 9.223131928520185, max_relative = 1e-12);
        assert_relative_eq!(d.ts, 1e-5, max_relative = 1e-12);
        assert_relative_eq!(d.lt, 52.53905817174516e-6, max_relative = 1e-12);
        assert_eq!(d.intervals_per_half_cycle, 1000);
    }

    #[test]
    fn derive_rejects_bad_configs() {
        let mut p = ConverterParams::default();
        p.n = 0.6;
        assert!(derive(&p).is_err());
        let mut p = ConverterParams::default();
        p.fsw = 100e3 + 30.0;
        assert!(derive(&p).is_err());
        let mut p = ConverterParams::default();
        p.l1 = 0.0;
        assert!(derive(&p).is_err());
    }

    #[test]
    fn grid_sample_values() {
        let (_, d) = table_defaults();
        let (vg, ig) = grid_sample(&d, 500);
        assert_relative_eq!(vg, 325.2691193458119, max_relative = 1e-12);
        assert_relative_eq!(ig, 9.223131928520185, max_relative = 1e-12);
        let (vg0, ig0) = grid_sample(&d, 0);
        assert_eq!(vg0, 0.0);
        assert_eq!(ig0, 0.0);
        // 10 degrees is not on the k grid; check the nearest semantics via
        // the angle helper instead.
        let vg10 = d.vm * (10.0 * DEG).sin();
        assert_relative_eq!(vg10, 56.48238982572751, max_relative = 1e-10);
        let ig10 = d.im * (10.0 * DEG).sin();
        assert_relative_eq!(ig10, 1.601580051769211, max_relative = 1e-10);
    }

    #[test]
    fn duty_d1_values() {
        let (p, d) = table_defaults();
        let d1 = duty_d1(d.vm, p.vo, p.n).unwrap();
        assert_relative_eq!(d1, 0.641732564199, max_relative = 1e-10);
        assert_eq!(duty_d1(0.0, p.vo, p.n).unwrap(), 1.0);
        let d1_10 = duty_d1(d.vm * (10.0 * DEG).sin(), p.vo, p.n).unwrap();
        assert_relative_eq!(d1_10, 0.937787512656, max_relative = 1e-10);
        assert!(duty_d1(600.0, 345.0, 0.38).is_err());
    }

    #[test]
    fn ilk_peak_values() {
        let dcpsm = ModulationScheme::Dcpsm { i_max: 10.2 };
        assert_eq!(ilk_peak(&dcpsm, 3.0, 1.0), 10.2);
        let idcpsm = ModulationScheme::Idcpsm {
            r: 10.2 / 9.223131928520185,
        };
        assert_relative_eq!(
            ilk_peak(&idcpsm, 9.223131928520185, 0.0),
            10.2,
            max_relative = 1e-12
        );
        assert_eq!(ilk_peak(&idcpsm, 0.0, 0.0), 0.0);
    }

    #[test]
    fn duty_d2_values() {
        let (p, d) = table_defaults();
        assert_relative_eq!(duty_d2(10.2, &p, &d), 0.0590264897025, max_relative = 1e-10);
        assert_eq!(duty_d2(0.0, &p, &d), 0.0);
        // IDCPSM at 10 degrees with the rated-matching ratio.
        let r = 10.2 / d.im;
        let pk = r * d.im * (10.0 * DEG).sin();
        assert_relative_eq!(pk, 1.7712114122, max_relative = 1e-9);
        assert_relative_eq!(duty_d2(pk, &p, &d), 0.0102498423709, max_relative = 1e-9);
    }

    #[test]
    fn commutation_angle_values() {
        let (p, d) = table_defaults();
        // 90 degrees, rated, either scheme (peaks coincide).
        let (alpha, beta, t1, t5) = commutation_angles(&p, &d, d.vm, d.im, 0.641732564199, 10.2);
        assert_relative_eq!(alpha, 0.0185249952371, max_relative = 1e-9);
        assert_relative_eq!(beta, 0.0241780435863, max_relative = 1e-9);
        assert_relative_eq!(t1, -3.20118903174, max_relative = 1e-9);
        assert_relative_eq!(t5, 6.02194289678, max_relative = 1e-9);
        // DCPSM at 10 degrees.
        let vg = d.vm * (10.0 * DEG).sin();
        let ig = d.im * (10.0 * DEG).sin();
        let (_, beta10, _, t5_10) = commutation_angles(&p, &d, vg, ig, 0.937787512656, 10.2);
        assert_relative_eq!(t5_10, 1.1586851601, max_relative = 1e-9);
        assert_relative_eq!(beta10, 0.0523212820877, max_relative = 1e-9);
    }

    #[test]
    fn plan_interval_rated() {
        let (p, d) = table_defaults();
        let scheme = ModulationScheme::Idcpsm { r: 10.2 / d.im };
        let plan = plan_interval(&p, &d, &scheme, 500).unwrap();
        assert_relative_eq!(plan.d1, 0.641732564199, max_relative = 1e-9);
        assert_relative_eq!(plan.d2, 0.0590264897025, max_relative = 1e-9);
        assert_relative_eq!(plan.alpha, 0.0185249952371, max_relative = 1e-9);
        assert_relative_eq!(plan.beta, 0.0241780435863, max_relative = 1e-9);
        assert!(!plan.degenerate);
        // DCPSM coincides at the grid peak apart from the tag.
        let dcpsm = ModulationScheme::Dcpsm { i_max: 10.2 };
        let plan2 = plan_interval(&p, &d, &dcpsm, 500).unwrap();
        assert_relative_eq!(plan2.i_lk_pk, plan.i_lk_pk, max_relative = 1e-9);
        assert_relative_eq!(plan2.d2, plan.d2, max_relative = 1e-9);
        assert_eq!(plan2.scheme, SchemeTag::Dcpsm);
    }

    #[test]
    fn plan_interval_degenerate_at_zero() {
        let (p, d) = table_defaults();
        let scheme = ModulationScheme::Idcpsm { r: 1.106 };
        let plan = plan_interval(&p, &d, &scheme, 0).unwrap();
        assert!(plan.degenerate);
        assert_eq!(plan.ig, 0.0);
        assert_eq!(plan.i_lk_pk, 0.0);
    }

    #[test]
    fn validate_rated_passes() {
        let (p, d) = table_defaults();
        let scheme = ModulationScheme::Idcpsm { r: 10.2 / d.im };
        let plan = plan_interval(&p, &d, &scheme, 500).unwrap();
        let report = validate_soft_switching(&plan);
        assert!(report.all_pass());
        assert_relative_eq!(plan.timing_budget(), 0.459996964327, max_relative = 1e-9);
    }

    #[test]
    fn validate_low_ratio_fails_circulating() {
        let (p, d) = table_defaults();
        let scheme = ModulationScheme::Idcpsm { r: 0.6 };
        for k in [100, 500, 900] {
            let plan = plan_interval(&p, &d, &scheme, k).unwrap();
            let report = validate_soft_switching(&plan);
            assert!(report.circulating);
        }
        // Below 0.5 the scheme itself is invalid; the plan-level check is
        // exercised by constructing the plan directly.
        let mut plan = plan_interval(&p, &d, &scheme, 500).unwrap();
        plan.i_lk_pk = 0.4 * plan.ig;
        assert!(!validate_soft_switching(&plan).circulating);
    }

    #[test]
    fn zcs_margin_ratio_value() {
        let (p, d) = table_defaults();
        assert_relative_eq!(zcs_margin_ratio(&p, &d), 0.738285, max_relative = 1e-4);
    }

    #[test]
    fn d2_round_trip() {
        let (p, d) = table_defaults();
        let kf = duty_per_ampere(&p, &d);
        for pk in [0.5, 1.771, 10.2] {
            let d2 = duty_d2(pk, &p, &d);
            assert_relative_eq!(d2 / kf, pk, max_relative = 1e-12);
        }
    }
}
