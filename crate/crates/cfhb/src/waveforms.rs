//! Exact piecewise-linear waveform synthesis for one switching interval.
//!
//! The interval is tiled by ten stage segments (two symmetric halves of five
//! commutation stages each); the zero-current plateau absorbs the timing
//! slack so that the first half ends exactly at Ts/2.

use crate::params::{ConverterParams, DerivedParams, IntervalPlan, SchemeTag};
use crate::{fmt_g9, CfhbError, Result};
use std::io::Write;

/// Stage boundaries for one switching interval, as fractions of Ts.
///
/// `t[0..=5]` bound the first half (stage 1, transfer alpha, plateau, d2
/// ramp, beta diode interval); `t[5..=10]` mirror them for the second half
/// with the leg roles exchanged. `t[10] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageTimeline {
    pub t: [f64; 11],
    /// Mirrored-half commutation fractions (leg roles exchanged).
    pub alpha2: f64,
    pub beta2: f64,
    /// Plateau lengths of each half.
    pub tp: f64,
    pub tp2: f64,
    /// Switching period [s].
    pub ts: f64,
}

impl StageTimeline {
    /// Boundary `i` in seconds.
    pub fn seconds(&self, i: usize) -> f64 {
        self.t[i] * self.ts
    }
}

/// Ordered breakpoints (time [s], value). Linear interpolation between
/// breakpoints; duplicated times encode jumps, with evaluation returning the
/// right-limit value at a duplicated breakpoint.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PiecewiseLinearWaveform {
    pub points: Vec<(f64, f64)>,
}

impl PiecewiseLinearWaveform {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[1].0 >= w[0].0));
        PiecewiseLinearWaveform { points }
    }

    pub fn constant(value: f64, duration: f64) -> Self {
        PiecewiseLinearWaveform {
            points: vec![(0.0, value), (duration, value)],
        }
    }

    pub fn domain(&self) -> Option<(f64, f64)> {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => Some((a.0, b.0)),
            _ => None,
        }
    }

    /// Exact evaluation at `t`; right-limit at duplicated breakpoints.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self
            .domain()
            .ok_or_else(|| CfhbError::Domain("empty waveform".into()))?;
        if t < lo || t > hi {
            return Err(CfhbError::Domain(format!(
                "t = {t} outside waveform domain [{lo}, {hi}]"
            )));
        }
        // Rightmost breakpoint with time <= t.
        let mut i = match self
            .points
            .binary_search_by(|p| p.0.partial_cmp(&t).unwrap())
        {
            Ok(idx) => idx,
            Err(idx) => idx - 1,
        };
        while i + 1 < self.points.len() && self.points[i + 1].0 <= t {
            i += 1;
        }
        if i + 1 == self.points.len() {
            return Ok(self.points[i].1);
        }
        let (t0, v0) = self.points[i];
        let (t1, v1) = self.points[i + 1];
        if t1 == t0 {
            return Ok(v1);
        }
        Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }
}

/// All node waveforms for one interval (positive-half-cycle roles).
///
/// AC-side body diodes are per leg; DC-side devices come in diagonal pairs
/// (A, D) and (B, C) with identical waveforms within a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeWaveforms {
    pub i_lk: PiecewiseLinearWaveform,
    pub i_l1: PiecewiseLinearWaveform,
    pub i_l2: PiecewiseLinearWaveform,
    pub i_s1ag: PiecewiseLinearWaveform,
    pub i_s2ag: PiecewiseLinearWaveform,
    pub i_sa: PiecewiseLinearWaveform,
    pub i_sb: PiecewiseLinearWaveform,
    pub i_sc: PiecewiseLinearWaveform,
    pub i_sd: PiecewiseLinearWaveform,
    /// Body-diode currents of AC legs 1 and 2.
    pub i_d_body_ac: [PiecewiseLinearWaveform; 2],
    /// Body-diode currents of the DC diagonal pairs (A,D) and (B,C).
    pub i_d_body_dc: [PiecewiseLinearWaveform; 2],
    pub v_pq: PiecewiseLinearWaveform,
    pub v_rs: PiecewiseLinearWaveform,
}

/// Places the stage boundaries for one interval.
pub fn build_timeline(
    plan: &IntervalPlan,
    p: &ConverterParams,
    d: &DerivedParams,
) -> Result<StageTimeline> {
    let kf = crate::params::duty_per_ampere(p, d);
    let t1m = 0.5 * (plan.ig - plan.ripple_l1);
    let t0m = 0.5 * (plan.ig + plan.ripple_l2);
    let alpha2 = kf * t1m.abs();
    let beta2 = kf * (plan.i_lk_pk - t0m).abs();
    let t_stage1 = 1.0 - plan.d1;
    let tp = 0.5 - t_stage1 - plan.alpha - plan.d2 - plan.beta;
    let tp2 = 0.5 - t_stage1 - alpha2 - plan.d2 - beta2;
    if tp < -1e-12 || tp2 < -1e-12 {
        return Err(CfhbError::Infeasible(format!(
            "commutation stages overflow the half period (plateau {tp:.4}/{tp2:.4})"
        )));
    }
    let durations = [
        t_stage1,
        plan.alpha,
        tp.max(0.0),
        plan.d2,
        plan.beta,
        t_stage1,
        alpha2,
        tp2.max(0.0),
        plan.d2,
        beta2,
    ];
    let mut t = [0.0; 11];
    for (i, dur) in durations.iter().enumerate() {
        t[i + 1] = t[i] + dur;
    }
    t[10] = 1.0;
    t[5] = 0.5;
    Ok(StageTimeline {
        t,
        alpha2,
        beta2,
        tp,
        tp2,
        ts: d.ts,
    })
}

/// Winding-current breakpoint values matched to the eleven boundaries.
fn ilk_values(plan: &IntervalPlan) -> [f64; 11] {
    let m_t0 = 0.5 * (plan.ig + plan.ripple_l1);
    let m_t1 = 0.5 * (plan.ig - plan.ripple_l1);
    let m_t5 = -0.5 * (plan.ig + plan.ripple_l2);
    let i_lk_t0 = -0.5 * (plan.ig + plan.ripple_l2);
    [
        i_lk_t0,
        plan.i_lk_t1,
        0.0,
        0.0,
        plan.i_lk_pk,
        m_t0,
        m_t1,
        0.0,
        0.0,
        -plan.i_lk_pk,
        m_t5,
    ]
}

fn ilk_at(tl: &StageTimeline, vals: &[f64; 11], x: f64) -> f64 {
    for i in 0..10 {
        if x <= tl.t[i + 1] || i == 9 {
            let span = tl.t[i + 1] - tl.t[i];
            if span <= 0.0 {
                return vals[i + 1];
            }
            return vals[i] + (vals[i + 1] - vals[i]) * (x - tl.t[i]) / span;
        }
    }
    vals[10]
}

struct LegCurrent {
    /// Turn-off instant (fraction) where the inductor current peaks.
    t_off: f64,
    peak: f64,
    valley: f64,
    /// Peak-to-valley fall duration (fraction).
    fall_len: f64,
    fall_slope: f64,
    rise_slope: f64,
}

impl LegCurrent {
    fn new(plan: &IntervalPlan, vo_over_n: f64, l: f64, ripple: f64, t_off: f64, ts: f64) -> Self {
        LegCurrent {
            t_off,
            peak: 0.5 * (plan.ig + ripple),
            valley: 0.5 * (plan.ig - ripple),
            fall_len: 1.0 - plan.d1,
            fall_slope: (plan.vg - vo_over_n) / l * ts,
            rise_slope: plan.vg / l * ts,
        }
    }

    fn at(&self, x: f64) -> f64 {
        let mut dx = (x - self.t_off) % 1.0;
        if dx < 0.0 {
            dx += 1.0;
        }
        if dx <= self.fall_len {
            self.peak + self.fall_slope * dx
        } else {
            self.valley + self.rise_slope * (dx - self.fall_len)
        }
    }

    fn kinks(&self) -> [f64; 2] {
        let mut k2 = (self.t_off + self.fall_len) % 1.0;
        if k2 < 0.0 {
            k2 += 1.0;
        }
        [self.t_off, k2]
    }
}

/// Builds a waveform equal to `f` on the listed windows and zero elsewhere,
/// with jump breakpoints at window edges. Windows must be non-overlapping,
/// sorted, and within [0, 1]. `cuts` lists interior breakpoints of `f`.
fn masked_pwl(
    windows: &[(f64, f64)],
    cuts: &[f64],
    ts: f64,
    f: impl Fn(f64) -> f64,
) -> PiecewiseLinearWaveform {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut cursor = 0.0;
    for &(a, b) in windows {
        if a > cursor {
            pts.push((cursor, 0.0));
            pts.push((a, 0.0));
        }
        if a > 0.0 || !pts.is_empty() {
            pts.push((a, f(a)));
        } else {
            pts.push((0.0, f(0.0)));
        }
        let mut inner: Vec<f64> = cuts.iter().copied().filter(|&c| c > a && c < b).collect();
        inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
        inner.dedup();
        for c in inner {
            pts.push((c, f(c)));
        }
        pts.push((b, f(b)));
        if b < 1.0 {
            pts.push((b, 0.0));
        }
        cursor = b;
    }
    if cursor < 1.0 {
        pts.push((cursor, 0.0));
        pts.push((1.0, 0.0));
    }
    // Deduplicate exactly repeated points (zero-length plateaus etc.).
    pts.dedup_by(|a, b| a == b);
    PiecewiseLinearWaveform::new(pts.into_iter().map(|(t, v)| (t * ts, v)).collect())
}

fn step_pwl(edges: &[(f64, f64)], ts: f64) -> PiecewiseLinearWaveform {
    // edges: (start_fraction, level) sorted; last level holds to 1.0.
    let mut pts = Vec::new();
    for (i, &(t0, v)) in edges.iter().enumerate() {
        let t_end = edges.get(i + 1).map(|e| e.0).unwrap_or(1.0);
        pts.push((t0, v));
        pts.push((t_end, v));
    }
    pts.dedup_by(|a, b| a == b);
    PiecewiseLinearWaveform::new(pts.into_iter().map(|(t, v)| (t * ts, v)).collect())
}

/// Synthesizes all node waveforms for one interval.
pub fn synth_interval(
    plan: &IntervalPlan,
    p: &ConverterParams,
    d: &DerivedParams,
) -> Result<NodeWaveforms> {
    let tl = build_timeline(plan, p, d)?;
    let vals = ilk_values(plan);
    let ts = d.ts;
    let vo_n = p.vo / p.n;

    let t = &tl.t;
    let ilk_pts: Vec<(f64, f64)> = (0..11).map(|i| (t[i] * ts, vals[i])).collect();
    let i_lk = PiecewiseLinearWaveform::new(ilk_pts);

    // Leg currents: leg 1 peaks at its turn-off t4, leg 2 at the mirrored t9.
    let leg1 = LegCurrent::new(plan, vo_n, p.l1, plan.ripple_l1, t[4], ts);
    let leg2 = LegCurrent::new(plan, vo_n, p.l2, plan.ripple_l2, t[9], ts);

    let mut cuts: Vec<f64> = t.to_vec();
    cuts.extend_from_slice(&leg1.kinks());
    cuts.extend_from_slice(&leg2.kinks());
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    let full = [(0.0, 1.0)];
    let i_l1 = masked_pwl(&full, &cuts, ts, |x| leg1.at(x));
    let i_l2 = masked_pwl(&full, &cuts, ts, |x| leg2.at(x));

    let ilk_f = |x: f64| ilk_at(&tl, &vals, x);

    // AC switches: S1ag channel conducts i_L1 - i_lk from its turn-on at t6
    // (wrapping) until turn-off at t4; its body diode then returns
    // i_lk - i_L1 until the ZCS instant t5. Leg 2 mirrors with i_L2 + i_lk.
    let i_s1ag = masked_pwl(&[(0.0, t[4]), (t[6], 1.0)], &cuts, ts, |x| {
        leg1.at(x) - ilk_f(x)
    });
    let i_d1ag = masked_pwl(&[(t[4], t[5])], &cuts, ts, |x| ilk_f(x) - leg1.at(x));
    let i_s2ag = masked_pwl(&[(t[1], t[9])], &cuts, ts, |x| leg2.at(x) + ilk_f(x));
    let i_d2ag = masked_pwl(&[(t[9], 1.0)], &cuts, ts, |x| -(leg2.at(x) + ilk_f(x)));

    // DC bridge. Diagonal pair (A, D) is forward when i_lk > 0; (B, C) when
    // i_lk < 0. DCPSM gates the incoming pair only for the d2 ramp and lets
    // the outgoing pair's body diodes carry the decaying current; IDCPSM
    // keeps each pair on synchronously for its full half.
    let n = p.n;
    let zero = PiecewiseLinearWaveform::constant(0.0, ts);
    let (i_sa, i_sc, d_dc_ad, d_dc_bc) = match plan.scheme {
        SchemeTag::Idcpsm => {
            let sa = masked_pwl(&[(t[4], t[9])], &cuts, ts, |x| ilk_f(x) / n);
            let sc = masked_pwl(&[(0.0, t[4]), (t[9], 1.0)], &cuts, ts, |x| -ilk_f(x) / n);
            (sa, sc, zero.clone(), zero.clone())
        }
        _ => {
            let sa = masked_pwl(&[(t[8], t[9])], &cuts, ts, |x| -ilk_f(x) / n);
            let sc = masked_pwl(&[(t[3], t[4])], &cuts, ts, |x| ilk_f(x) / n);
            let dad = masked_pwl(&[(t[4], t[7])], &cuts, ts, |x| ilk_f(x).abs() / n);
            let dbc = masked_pwl(&[(0.0, t[2]), (t[9], 1.0)], &cuts, ts, |x| {
                ilk_f(x).abs() / n
            });
            (sa, sc, dad, dbc)
        }
    };

    let v_pq = step_pwl(
        &[
            (0.0, -vo_n),
            (t[1], 0.0),
            (t[5], vo_n),
            (t[6], 0.0),
            (1.0, 0.0),
        ],
        ts,
    );
    let v_rs = step_pwl(
        &[
            (0.0, -p.vo),
            (t[2], 0.0),
            (t[3], -p.vo),
            (t[4], p.vo),
            (t[7], 0.0),
            (t[8], p.vo),
            (t[9], -p.vo),
            (1.0, -p.vo),
        ],
        ts,
    );

    Ok(NodeWaveforms {
        i_lk,
        i_l1,
        i_l2,
        i_s1ag,
        i_s2ag,
        i_sd: i_sa.clone(),
        i_sb: i_sc.clone(),
        i_sa,
        i_sc,
        i_d_body_ac: [i_d1ag, i_d2ag],
        i_d_body_dc: [d_dc_ad, d_dc_bc],
        v_pq,
        v_rs,
    })
}

/// Boundary residuals between two consecutive intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityResiduals {
    pub i_l1: f64,
    pub i_l2: f64,
    pub i_lk: f64,
}

/// Continuity of the inductor and winding currents across the interval
/// boundary between `prev` and `next`.
pub fn check_continuity(prev: &NodeWaveforms, next: &NodeWaveforms) -> Result<ContinuityResiduals> {
    let end = |w: &PiecewiseLinearWaveform| -> Result<f64> {
        let (_, hi) = w
            .domain()
            .ok_or_else(|| CfhbError::Domain("empty waveform".into()))?;
        w.eval(hi)
    };
    let start = |w: &PiecewiseLinearWaveform| -> Result<f64> {
        let (lo, _) = w
            .domain()
            .ok_or_else(|| CfhbError::Domain("empty waveform".into()))?;
        w.eval(lo)
    };
    Ok(ContinuityResiduals {
        i_l1: (end(&prev.i_l1)? - start(&next.i_l1)?).abs(),
        i_l2: (end(&prev.i_l2)? - start(&next.i_l2)?).abs(),
        i_lk: (end(&prev.i_lk)? - start(&next.i_lk)?).abs(),
    })
}

/// Writes the waveform dump CSV: breakpoints of `i_lk` plus a uniform grid.
pub fn dump_csv<W: Write>(nw: &NodeWaveforms, ts: f64, samples: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "t_s", "i_lk_A", "i_L1_A", "i_L2_A", "i_S1ag_A", "i_S2ag_A", "i_SA_A", "i_SC_A", "v_pq_V",
        "v_rs_V",
    ])?;
    let mut times: Vec<f64> = nw.i_lk.points.iter().map(|p| p.0).collect();
    for i in 0..=samples {
        times.push(ts * i as f64 / samples as f64);
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    for t in times {
        let row = [
            t,
            nw.i_lk.eval(t)?,
            nw.i_l1.eval(t)?,
            nw.i_l2.eval(t)?,
            nw.i_s1ag.eval(t)?,
            nw.i_s2ag.eval(t)?,
            nw.i_sa.eval(t)?,
            nw.i_sc.eval(t)?,
            nw.v_pq.eval(t)?,
            nw.v_rs.eval(t)?,
        ];
        w.write_record(row.iter().map(|v| fmt_g9(*v)))?;
    }
    w.flush()?;
    Ok(())
}
