//! Numerical flows of the Hamiltonian fields X1, X2 and X_G, plus the
//! level-set experiments built on them.

mod chart;
mod concavity;
mod niceloop;

pub use chart::{chart_translation, find_chart_base, flow_chart, translation_study, ChartBase, ChartOptions, TranslationStudy};
pub use concavity::{concavity_q, q_closed_form, q_direct, reversal_images, tangency_psi, ReversalImages};
pub use niceloop::{
    degenerate_lambda, degenerate_mu, gamma0, lift_a, n_poly, nice_loop_endpoints, trace_nice_loop, NiceLoop,
};

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hamiltonian::{x1, x2, TangentVec};
use crate::invariants::{f1, f2, gs_ab, gs_cd, membership};
use crate::octagon::CanonCoords;
use crate::scalar::{Rat, Scalar};

/// A level set of (F1, F2), stored exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSpec {
    pub f1: Rat,
    pub f2: Rat,
}

impl LevelSpec {
    pub fn from_f(f1: Rat, f2: Rat) -> Self {
        LevelSpec { f1, f2 }
    }

    /// From g = F2 - F1 and h = F1/F2.
    pub fn from_gh(g: Rat, h: Rat) -> Result<Self> {
        let one = Rat::one();
        if h == one {
            return Err(Error::Invalid("h = 1 has no finite level".into()));
        }
        let f2 = g / (one - h.clone());
        Ok(LevelSpec { f1: h * f2.clone(), f2 })
    }

    pub fn g(&self) -> Rat {
        self.f2.clone() - self.f1.clone()
    }

    pub fn h(&self) -> Result<Rat> {
        if self.f2.is_vanishing() {
            return Err(Error::Domain("F2".into()));
        }
        Ok(self.f1.clone() / self.f2.clone())
    }

    /// Levels usable for work in the positive component.
    pub fn check_positive(&self) -> Result<()> {
        if self.f1.sign() <= 0 || self.f2.sign() <= 0 || self.g().is_vanishing() {
            return Err(Error::Invalid(format!("level ({}, {}) needs F1, F2 > 0 and F1 != F2", self.f1, self.f2)));
        }
        Ok(())
    }

    pub fn gh_f64(&self) -> Result<(f64, f64)> {
        Ok((self.g().to_f64(), self.h()?.to_f64()))
    }

    /// |F1 - f1| + |F2 - f2| at `p`.
    pub fn residual(&self, p: &CanonCoords<f64>) -> Result<f64> {
        Ok((f1(p)? - self.f1.to_f64()).abs() + (f2(p)? - self.f2.to_f64()).abs())
    }
}

/// Which vector field to follow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldSpec {
    /// alpha1 X1 + alpha2 X2.
    Combo(f64, f64),
    /// X_G = X2 - X1.
    G,
}

impl FieldSpec {
    pub fn coefficients(self) -> (f64, f64) {
        match self {
            FieldSpec::Combo(u, v) => (u, v),
            FieldSpec::G => (-1.0, 1.0),
        }
    }

    pub fn eval(self, p: &CanonCoords<f64>) -> Result<TangentVec<f64>> {
        let (u, v) = self.coefficients();
        let (p1, p2) = (x1(p)?, x2(p)?);
        Ok(std::array::from_fn(|i| u * p1[i] + v * p2[i]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stop {
    Completed,
    /// A coordinate came within the guard distance of zero.
    Hyperplane { index: usize },
    /// The event function changed sign; the last sample sits on its zero.
    Event,
    /// The step size collapsed; the last sample is the last good state.
    StepUnderflow,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<(f64, CanonCoords<f64>)>,
    pub field: FieldSpec,
    /// max over samples of |F1 - F1(0)| + |F2 - F2(0)|.
    pub drift: f64,
    pub rejected: bool,
    pub stop: Stop,
}

impl Trajectory {
    pub fn last(&self) -> &CanonCoords<f64> {
        &self.samples.last().expect("trajectory has a sample").1
    }

    pub fn end_time(&self) -> f64 {
        self.samples.last().map(|s| s.0).unwrap_or(0.0)
    }

    /// CSV with columns t,a,b,c,d,F1,F2,G.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,a,b,c,d,F1,F2,G\n");
        for (t, p) in &self.samples {
            let (u, v) = (f1(p).unwrap_or(f64::NAN), f2(p).unwrap_or(f64::NAN));
            let row = [*t, p.a, p.b, p.c, p.d, u, v, v - u];
            let cells: Vec<String> = row.iter().map(|x| fmt17(*x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Allowed invariant drift before a trajectory is flagged.
    pub drift_tol: f64,
    /// Stop when a coordinate gets this close to zero.
    pub guard: f64,
    /// Newton-project each accepted state back onto the starting level.
    pub project: bool,
    pub max_steps: usize,
    pub min_step: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { rtol: 1e-10, atol: 1e-12, drift_tol: 1e-9, guard: 1e-10, project: false, max_steps: 200_000, min_step: 1e-14 }
    }
}

pub const EVENT_TOL: f64 = 1e-12;

/// Integrate `field` from `p0` for time `t_end` (negative runs backwards).
pub fn integrate(p0: &CanonCoords<f64>, field: FieldSpec, t_end: f64, tol: f64) -> Result<Trajectory> {
    let opts = FlowOptions { drift_tol: tol, ..FlowOptions::default() };
    integrate_with(p0, field, t_end, &opts, None)
}

type EventFn<'a> = &'a dyn Fn(&CanonCoords<f64>) -> f64;

// Dormand-Prince 5(4).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

struct Step {
    y: [f64; 4],
    err: f64,
}

fn dopri_step(field: FieldSpec, y: &[f64; 4], h: f64, opts: &FlowOptions) -> Result<Step> {
    let mut k: [[f64; 4]; 7] = [[0.0; 4]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..4 {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = field.eval(&CanonCoords::from_array(ys))?;
    }
    let mut y5 = *y;
    let mut err = 0.0;
    for i in 0..4 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
        err += (h * (d5 - d4) / scale).powi(2);
    }
    if y5.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite state".into()));
    }
    Ok(Step { y: y5, err: (err / 4.0).sqrt() })
}

fn level_values(p: &CanonCoords<f64>) -> Result<(f64, f64)> {
    Ok((f1(p)?, f2(p)?))
}

/// One Newton step (minimum-norm) back onto F1 = u, F2 = v.
fn project_to_level(p: &CanonCoords<f64>, u: f64, v: f64) -> Result<CanonCoords<f64>> {
    use crate::invariants::{F1Field, F2Field};
    use crate::scalar::gradient;
    let mut q = p.clone();
    for _ in 0..3 {
        let (r1, g1) = gradient(&F1Field, &q)?;
        let (r2, g2) = gradient(&F2Field, &q)?;
        let (r1, r2) = (r1 - u, r2 - v);
        let m11: f64 = g1.iter().map(|x| x * x).sum();
        let m22: f64 = g2.iter().map(|x| x * x).sum();
        let m12: f64 = g1.iter().zip(&g2).map(|(x, y)| x * y).sum();
        let det = m11 * m22 - m12 * m12;
        if det.abs() < 1e-300 {
            return Ok(q);
        }
        let l1 = (m22 * r1 - m12 * r2) / det;
        let l2 = (m11 * r2 - m12 * r1) / det;
        let arr = q.to_array();
        q = CanonCoords::from_array(std::array::from_fn(|i| arr[i] - l1 * g1[i] - l2 * g2[i]));
    }
    Ok(q)
}

/// General integrator. With an `event`, integration stops at the first sign
/// change of the event and the zero is refined by bisection to `EVENT_TOL`.
pub fn integrate_with(
    p0: &CanonCoords<f64>,
    field: FieldSpec,
    t_end: f64,
    opts: &FlowOptions,
    event: Option<EventFn<'_>>,
) -> Result<Trajectory> {
    if !membership(p0)?.in_x {
        return Err(Error::Invalid("start point is outside X".into()));
    }
    let (u0, v0) = level_values(p0)?;
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let span = t_end.abs();
    let mut traj = Trajectory { samples: vec![(0.0, p0.clone())], field, drift: 0.0, rejected: false, stop: Stop::Completed };
    if span == 0.0 {
        return Ok(traj);
    }
    let mut t = 0.0f64;
    let mut y = p0.to_array();
    let mut h = (span / 100.0).min(1e-2);
    let mut ev_prev = event.map(|e| e(p0));
    let mut steps = 0usize;
    while t < span {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Numerical(format!("step budget of {} exhausted at t = {}", opts.max_steps, dir * t)));
        }
        if h < opts.min_step {
            traj.stop = Stop::StepUnderflow;
            break;
        }
        let h_try = h.min(span - t);
        let step = match dopri_step(field, &y, dir * h_try, opts) {
            Ok(s) => s,
            Err(_) => {
                // A stage landed on a singular hyperplane.
                h = h_try / 4.0;
                continue;
            }
        };
        if step.err > 1.0 {
            h = h_try * (0.9 * step.err.powf(-0.2)).max(0.2);
            continue;
        }
        // Never step across a coordinate hyperplane: aim short of it instead.
        if let Some(i) = (0..4).find(|&i| y[i].signum() != step.y[i].signum()) {
            let frac = y[i] / (y[i] - step.y[i]);
            h = h_try * (0.9 * frac).max(1e-3);
            continue;
        }
        let mut p = CanonCoords::from_array(step.y);
        if opts.project {
            p = project_to_level(&p, u0, v0)?;
        }
        let grown = h_try * (0.9 * step.err.max(1e-10).powf(-0.2)).min(5.0);

        if let (Some(e), Some(prev)) = (event, ev_prev) {
            let now = e(&p);
            if prev == 0.0 || prev.signum() != now.signum() {
                let (tz, pz) = bisect_event(field, &y, t, h_try, dir, opts, e, prev)?;
                record(&mut traj, dir * tz, pz, u0, v0)?;
                traj.stop = Stop::Event;
                break;
            }
            ev_prev = Some(now);
        }
        t += h_try;
        y = p.to_array();
        record(&mut traj, dir * t, p, u0, v0)?;
        if let Some(i) = (0..4).find(|&i| y[i].abs() < opts.guard) {
            traj.stop = Stop::Hyperplane { index: i };
            break;
        }
        h = grown;
    }
    traj.rejected = traj.drift > opts.drift_tol;
    Ok(traj)
}

fn record(traj: &mut Trajectory, t: f64, p: CanonCoords<f64>, u0: f64, v0: f64) -> Result<()> {
    let (u, v) = level_values(&p)?;
    traj.drift = traj.drift.max((u - u0).abs() + (v - v0).abs());
    traj.samples.push((t, p));
    Ok(())
}

/// Bisect on the sub-step length from state `y` at time `t`.
#[allow(clippy::too_many_arguments)]
fn bisect_event(
    field: FieldSpec,
    y: &[f64; 4],
    t: f64,
    h: f64,
    dir: f64,
    opts: &FlowOptions,
    e: &dyn Fn(&CanonCoords<f64>) -> f64,
    e0: f64,
) -> Result<(f64, CanonCoords<f64>)> {
    let (mut lo, mut hi) = (0.0, h);
    let mut best = (t + h, CanonCoords::from_array(*y));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = sub_integrate(field, y, dir * mid, opts)?;
        let v = e(&p);
        best = (t + mid, p);
        if v.abs() < EVENT_TOL {
            return Ok(best);
        }
        if v.signum() == e0.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    Ok(best)
}

/// Integrate over a short interval, returning only the end state.
fn sub_integrate(field: FieldSpec, y: &[f64; 4], dt: f64, opts: &FlowOptions) -> Result<CanonCoords<f64>> {
    let mut state = *y;
    let span = dt.abs();
    let dir = dt.signum();
    let mut t = 0.0;
    let mut h = span;
    while t < span {
        let h_try = h.min(span - t);
        if h_try < opts.min_step {
            break;
        }
        let s = dopri_step(field, &state, dir * h_try, opts)?;
        if s.err > 1.0 {
            h = h_try * (0.9 * s.err.powf(-0.2)).max(0.2);
            continue;
        }
        state = s.y;
        t += h_try;
        h = h_try * (0.9 * s.err.max(1e-10).powf(-0.2)).min(5.0);
    }
    Ok(CanonCoords::from_array(state))
}

/// max(a+b, c+d) - 1, zero on the slice U.
pub fn u_event(p: &CanonCoords<f64>) -> f64 {
    (p.a + p.b).max(p.c + p.d) - 1.0
}

/// Longest time searched in each direction for a crossing.
pub const U_SEARCH_TIME: f64 = 1e3;

/// Where the G-curve through `p0` meets U. Tries forward first, then backward.
pub fn find_u_crossing(p0: &CanonCoords<f64>) -> Result<CanonCoords<f64>> {
    if !membership(p0)?.in_x_plus {
        return Err(Error::Invalid("start point is outside X+".into()));
    }
    if u_event(p0).abs() < EVENT_TOL {
        return Ok(p0.clone());
    }
    let opts = FlowOptions::default();
    for t_end in [U_SEARCH_TIME, -U_SEARCH_TIME] {
        let tr = integrate_with(p0, FieldSpec::G, t_end, &opts, Some(&u_event))?;
        if tr.stop == Stop::Event {
            return Ok(tr.last().clone());
        }
    }
    Err(Error::Numerical("no crossing with U bracketed in either direction".into()))
}

/// g*_ab + g*_cd, which increases along X_G in X+.
pub fn star_sum(p: &CanonCoords<f64>) -> f64 {
    gs_ab(p) + gs_cd(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn plus_point() -> CanonCoords<f64> {
        // a+b, c+d < 1, every factor positive.
        CanonCoords::new(0.4, 0.3, 0.35, 0.3)
    }

    #[test]
    fn level_spec_round_trip() {
        let l = LevelSpec::from_f(rat(3, 1), rat(4, 1));
        assert_eq!(l.g(), rat(1, 1));
        assert_eq!(l.h().unwrap(), rat(3, 4));
        assert_eq!(LevelSpec::from_gh(rat(1, 1), rat(3, 4)).unwrap(), l);
        assert!(l.check_positive().is_ok());
        assert!(LevelSpec::from_f(rat(2, 1), rat(2, 1)).check_positive().is_err());
    }

    #[test]
    fn zero_time_is_one_sample() {
        let p = plus_point();
        let tr = integrate(&p, FieldSpec::G, 0.0, 1e-9).unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert_eq!(tr.samples[0].1, p);
    }

    #[test]
    fn g_flow_keeps_level_and_star_sum_grows() {
        let p = plus_point();
        assert!(membership(&p).unwrap().in_x_plus);
        let tr = integrate(&p, FieldSpec::G, 0.1, 1e-9).unwrap();
        assert_eq!(tr.stop, Stop::Completed);
        assert!(!tr.rejected, "drift {}", tr.drift);
        assert!(tr.samples.windows(2).all(|w| w[1].0 > w[0].0));
        assert!(tr.samples.windows(2).all(|w| star_sum(&w[1].1) > star_sum(&w[0].1)));
    }

    #[test]
    fn g_flow_reaches_a_hyperplane() {
        let tr = integrate(&plus_point(), FieldSpec::G, 1.0, 1e-9).unwrap();
        assert_eq!(tr.stop, Stop::Hyperplane { index: 3 });
        assert!(tr.end_time() < 0.2);
    }

    #[test]
    fn flows_commute() {
        let p = plus_point();
        let tol = 1e-9;
        let go = |f: FieldSpec, q: &CanonCoords<f64>, t: f64| integrate(q, f, t, tol).unwrap().last().clone();
        let (x1f, x2f) = (FieldSpec::Combo(1.0, 0.0), FieldSpec::Combo(0.0, 1.0));
        let one = go(x2f, &go(x1f, &p, 0.01), 0.02);
        let two = go(x1f, &go(x2f, &p, 0.02), 0.01);
        assert!(one.max_abs_diff(&two) < 10.0 * tol);
    }

    #[test]
    fn outside_x_is_rejected() {
        let p = CanonCoords::new(0.5, 0.5, 0.5, 0.5);
        assert!(integrate(&p, FieldSpec::G, 1.0, 1e-9).is_err());
    }

    #[test]
    fn crossing_is_on_u() {
        let q = find_u_crossing(&plus_point()).unwrap();
        assert!(u_event(&q).abs() < 1e-12);
    }
}
