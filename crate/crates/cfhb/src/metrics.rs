//! Per-interval RMS/average currents, computed two ways: exact closed-form
//! integration of the synthesized piecewise-linear waveforms (the oracle)
//! and the per-scheme closed-form expressions.

use crate::params::{ConverterParams, IntervalPlan, SchemeTag};
use crate::waveforms::{NodeWaveforms, PiecewiseLinearWaveform};
use crate::{CfhbError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Numeric,
    Analytic,
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Origin::Numeric => "numeric",
            Origin::Analytic => "analytic",
        })
    }
}

/// The five per-interval current quantities plus the circulating current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalMetrics {
    /// HFT winding RMS current [A].
    pub ilk_rms: f64,
    /// AC-side switch RMS current, per switch [A].
    pub s_ac_rms: f64,
    /// AC-side body-diode average current, per leg, over Ts [A].
    pub d_ac_avg: f64,
    /// DC-side switch RMS current, per switch [A].
    pub s_dc_rms: f64,
    /// DC-side body-diode average current, per device, over Ts [A].
    pub d_dc_avg: f64,
    /// Circulating current i_lk_pk - ig/2 [A].
    pub i_cir: f64,
    pub origin: Origin,
    pub scheme: SchemeTag,
    pub k: usize,
}

/// Exact RMS of a piecewise-linear waveform over `duration`:
/// sqrt((1/T) * sum d*(a^2 + a*b + b^2)/3) per linear segment.
pub fn rms_of(w: &PiecewiseLinearWaveform, duration: f64) -> Result<f64> {
    Ok((mean_square(w)? / duration).sqrt())
}

fn mean_square(w: &PiecewiseLinearWaveform) -> Result<f64> {
    if w.points.len() < 2 {
        return Err(CfhbError::Domain("waveform needs at least 2 points".into()));
    }
    let mut acc = 0.0;
    for seg in w.points.windows(2) {
        let (a, b) = (seg[0].1, seg[1].1);
        acc += (seg[1].0 - seg[0].0) * (a * a + a * b + b * b) / 3.0;
    }
    Ok(acc)
}

/// Exact trapezoidal mean of a piecewise-linear waveform over `duration`.
pub fn avg_of(w: &PiecewiseLinearWaveform, duration: f64) -> Result<f64> {
    if w.points.len() < 2 {
        return Err(CfhbError::Domain("waveform needs at least 2 points".into()));
    }
    let mut acc = 0.0;
    for seg in w.points.windows(2) {
        acc += (seg[1].0 - seg[0].0) * 0.5 * (seg[0].1 + seg[1].1);
    }
    Ok(acc / duration)
}

/// Circulating current per the plan's analytic peak.
pub fn circulating_current(plan: &IntervalPlan) -> f64 {
    plan.i_cir()
}

/// Oracle metrics from synthesized waveforms.
pub fn numeric_metrics(nw: &NodeWaveforms, plan: &IntervalPlan, ts: f64) -> Result<IntervalMetrics> {
    Ok(IntervalMetrics {
        ilk_rms: rms_of(&nw.i_lk, ts)?,
        s_ac_rms: rms_of(&nw.i_s1ag, ts)?,
        d_ac_avg: avg_of(&nw.i_d_body_ac[0], ts)?,
        s_dc_rms: rms_of(&nw.i_sa, ts)?,
        d_dc_avg: avg_of(&nw.i_d_body_dc[0], ts)?,
        i_cir: plan.i_cir(),
        origin: Origin::Numeric,
        scheme: plan.scheme,
        k: plan.k,
    })
}

/// Closed-form metrics for the plan's scheme.
///
/// The two-term DCPSM rows combine as root-sum-square (the reading validated
/// against the waveform oracle); the SPSM column, which has no oracle here,
/// is evaluated as the literal sum of its two terms.
pub fn analytic_metrics(p: &ConverterParams, plan: &IntervalPlan) -> IntervalMetrics {
    let ig = plan.ig;
    let d1 = plan.d1;
    let d2 = plan.d2;
    let al = plan.alpha;
    let be = plan.beta;
    let pk = plan.i_lk_pk;
    let n = p.n;
    let (ilk_rms, s_ac_rms, d_ac_avg, s_dc_rms, d_dc_avg) = match plan.scheme {
        SchemeTag::Idcpsm => {
            let rad = 1.0 - d1 + 4.0 * d2 / 3.0 + al / 3.0 + 7.0 * be / 3.0;
            (
                ig / 2f64.sqrt() * rad.max(0.0).sqrt(),
                ig / 2.0
                    * (11.0 / 3.0 - 10.0 * d1 / 3.0 + 4.0 * d2 + 7.0 * al / 3.0 + 17.0 * be / 3.0)
                        .max(0.0)
                        .sqrt(),
                ig / 2.0 * be / 2.0,
                ig / (2.0 * n) * rad.max(0.0).sqrt(),
                0.0,
            )
        }
        SchemeTag::Dcpsm => {
            let ig_pk = if pk > 0.0 { ig / pk } else { 0.0 };
            let ilk_a = ig / 2f64.sqrt() * (1.0 - d1 + al / 3.0 + be / 3.0).max(0.0).sqrt();
            let ilk_b = pk * (2.0 * d2 / 3.0 + 2.0 * be / 3.0 + ig_pk * be / 3.0).max(0.0).sqrt();
            let sac_a = ig / 2.0
                * (11.0 / 3.0 - 10.0 * d1 / 3.0 + 4.0 * d2 / 3.0 + 7.0 * al / 3.0 + 5.0 * be / 3.0)
                    .max(0.0)
                    .sqrt();
            let sac_b = pk * (2.0 * d2 / 3.0 + be / 3.0 + ig_pk * 2.0 * be / 3.0).max(0.0).sqrt();
            (
                ilk_a.hypot(ilk_b),
                sac_a.hypot(sac_b),
                (pk - ig / 2.0) * be / 2.0,
                pk / n * (d2 / 3.0).sqrt(),
                ig / (2.0 * n) * (1.0 - d1 + al / 2.0 + be / 2.0) + pk / n * be / 2.0,
            )
        }
        SchemeTag::Spsm => {
            let ig_pk = if pk > 0.0 { ig / pk } else { 0.0 };
            let base = ig / 2.0 * (5.0 / 3.0 - 4.0 * d1 / 3.0).max(0.0).sqrt();
            let ilk_b = pk
                * (2.0 * d1 / 3.0 - 1.0 / 3.0 + ig_pk * (1.0 / 6.0 - d1 / 3.0 + 2.0 * be / 3.0))
                    .max(0.0)
                    .sqrt();
            let sac_b = pk
                * (2.0 * d1 / 3.0 - 1.0 / 3.0 - be / 3.0
                    + ig_pk * (be / 3.0 - d1 / 3.0 - 1.0 / 6.0))
                    .max(0.0)
                    .sqrt();
            let sdc_a = ig / (2.0 * n) * (5.0 / 6.0 - 2.0 * d1 / 3.0).max(0.0).sqrt();
            let sdc_b = pk / n
                * (d1 / 3.0 - 1.0 / 6.0 + ig_pk * (1.0 / 12.0 - d1 / 6.0 + be / 3.0))
                    .max(0.0)
                    .sqrt();
            (
                base + ilk_b,
                base + sac_b,
                (pk - ig / 2.0) * be / 2.0,
                sdc_a + sdc_b,
                0.0,
            )
        }
    };
    IntervalMetrics {
        ilk_rms,
        s_ac_rms,
        d_ac_avg,
        s_dc_rms,
        d_dc_avg,
        i_cir: plan.i_cir(),
        origin: Origin::Analytic,
        scheme: plan.scheme,
        k: plan.k,
    }
}
