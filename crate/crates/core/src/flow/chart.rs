//! Flat charts on a level set from the commuting flows of X1 and X2, and
//! the translation a word induces in them.

use crate::error::{Error, Result};
use crate::hamiltonian::{x1, x2};
use crate::invariants::membership;
use crate::maps::{apply_word, GenWord};
use crate::octagon::CanonCoords;

use super::{integrate_with, niceloop::nice_loop_endpoints, niceloop::lift_a, FieldSpec, FlowOptions, LevelSpec, Stop};

/// How far a base or target may sit off the level.
pub const LEVEL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ChartOptions {
    pub guess: (f64, f64),
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Cap on the length of one Newton update.
    pub max_update: f64,
    pub flow: FlowOptions,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            guess: (0.0, 0.0),
            residual_tol: 1e-9,
            max_iter: 80,
            max_update: 0.2,
            flow: FlowOptions { rtol: 1e-12, atol: 1e-14, drift_tol: 1e-8, guard: 1e-6, ..FlowOptions::default() },
        }
    }
}

/// The point at chart coordinates (t1, t2) from `base`. The flows commute,
/// so this is the unit-time flow of t1 X1 + t2 X2.
pub fn flow_chart(base: &CanonCoords<f64>, t1: f64, t2: f64, opts: &FlowOptions) -> Result<CanonCoords<f64>> {
    if t1 == 0.0 && t2 == 0.0 {
        return Ok(base.clone());
    }
    let tr = integrate_with(base, FieldSpec::Combo(t1, t2), 1.0, opts, None)?;
    match tr.stop {
        Stop::Completed => Ok(tr.last().clone()),
        other => Err(Error::Numerical(format!("chart flow to ({t1}, {t2}) stopped early: {other:?}"))),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Chart translation (t1, t2) with flow(base; t1, t2) = word(base), by
/// Gauss-Newton shooting. Columns of the shooting Jacobian are X1 and X2 at
/// the endpoint.
pub fn chart_translation(
    level: &LevelSpec,
    base: &CanonCoords<f64>,
    word: &GenWord,
    opts: &ChartOptions,
) -> Result<(f64, f64)> {
    if !membership(base)?.in_x_plus {
        return Err(Error::Invalid("chart base is outside X+".into()));
    }
    if level.residual(base)? > LEVEL_TOL {
        return Err(Error::Invalid("chart base is off the level".into()));
    }
    let target = apply_word(word, base)?;
    if level.residual(&target)? > LEVEL_TOL {
        return Err(Error::Numerical("word image is off the level".into()));
    }
    let goal = target.to_array();
    let (mut t1, mut t2) = opts.guess;
    let mut last_res = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let y = flow_chart(base, t1, t2, &opts.flow)?;
        let ya = y.to_array();
        let r: [f64; 4] = std::array::from_fn(|i| ya[i] - goal[i]);
        last_res = norm(&r);
        let (u, v) = (x1(&y)?, x2(&y)?);
        let (uu, uv, vv) = (dot(&u, &u), dot(&u, &v), dot(&v, &v));
        let (ur, vr) = (dot(&u, &r), dot(&v, &r));
        let det = uu * vv - uv * uv;
        if det.abs() < 1e-300 {
            return Err(Error::Degenerate("X1 and X2 are dependent at the shooting endpoint".into()));
        }
        let mut d1 = -(vv * ur - uv * vr) / det;
        let mut d2 = -(uu * vr - uv * ur) / det;
        let len = (d1 * d1 + d2 * d2).sqrt();
        if len > opts.max_update {
            d1 *= opts.max_update / len;
            d2 *= opts.max_update / len;
        }
        t1 += d1;
        t2 += d2;
        if len < 1e-14 {
            break;
        }
    }
    let y = flow_chart(base, t1, t2, &opts.flow)?;
    let res = norm(&std::array::from_fn::<f64, 4, _>(|i| y.to_array()[i] - goal[i]));
    if res > opts.residual_tol {
        return Err(Error::Numerical(format!("shooting stalled at residual {res:e} (previous {last_res:e})")));
    }
    Ok((t1, t2))
}

fn dot(u: &[f64; 4], v: &[f64; 4]) -> f64 {
    u.iter().zip(v).map(|(x, y)| x * y).sum()
}

/// A point on the level for chart work, found by flowing from a nice-loop cusp.
#[derive(Clone, Debug)]
pub struct ChartBase {
    pub base: CanonCoords<f64>,
    /// Chart offset (s1, s2) of `base` from the cusp.
    pub offset: (f64, f64),
    pub cusp: CanonCoords<f64>,
}

/// Grid search over chart offsets around the first nice-loop cusp for a base
/// whose first `depth` images under `word` stay in X+. Offsets are tried
/// nearest first.
pub fn find_chart_base(level: &LevelSpec, word: &GenWord, depth: usize) -> Result<Vec<ChartBase>> {
    level.check_positive()?;
    let (g, h) = level.gh_f64()?;
    let (c1, _) = nice_loop_endpoints(g, h)?;
    let a = lift_a(&c1, &(1.0 - c1), &h);
    let cusp = CanonCoords::new(a, 1.0 - a, c1, 1.0 - c1);
    let opts = ChartOptions::default().flow;
    let mut offsets: Vec<(f64, f64)> = Vec::new();
    for i in -12..=12 {
        for j in -12..=12 {
            offsets.push((i as f64 * 0.05, j as f64 * 0.05));
        }
    }
    offsets.sort_by(|x, y| (x.0.hypot(x.1)).total_cmp(&y.0.hypot(y.1)));
    let mut out = Vec::new();
    for (s1, s2) in offsets {
        let Ok(base) = flow_chart(&cusp, s1, s2, &opts) else { continue };
        let positive = |p: &CanonCoords<f64>| membership(p).map(|m| m.in_x_plus).unwrap_or(false);
        if !positive(&base) {
            continue;
        }
        let mut q = base.clone();
        let mut ok = true;
        for _ in 0..depth {
            match apply_word(word, &q) {
                Ok(n) if positive(&n) => q = n,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.push(ChartBase { base, offset: (s1, s2), cusp: cusp.clone() });
        }
    }
    Ok(out)
}

/// T3 and T3^2 translations measured from one base on a level.
#[derive(Clone, Debug)]
pub struct TranslationStudy {
    pub base: ChartBase,
    pub t3: (f64, f64),
    pub t3_squared: (f64, f64),
}

impl TranslationStudy {
    /// Coefficient of X_G in t1 X1 + t2 X2 = ((t1 + t2)/2)(X1 + X2) + ((t2 - t1)/2) X_G.
    pub fn xg_component(&self) -> f64 {
        (self.t3.1 - self.t3.0) / 2.0
    }

    /// |T3^2 translation - 2 * T3 translation|.
    pub fn additivity_error(&self) -> f64 {
        (self.t3_squared.0 - 2.0 * self.t3.0).hypot(self.t3_squared.1 - 2.0 * self.t3.1)
    }
}

/// Find a base whose first two T3 images stay in X+, then shoot for the T3
/// and T3^2 translations. The T3^2 search starts from twice the T3 answer.
pub fn translation_study(level: &LevelSpec, opts: &ChartOptions) -> Result<TranslationStudy> {
    let t3 = GenWord::t3();
    let mut last = Error::Numerical("no chart base keeps two T3 images in X+".into());
    for base in find_chart_base(level, &t3, 2)? {
        let one = match chart_translation(level, &base.base, &t3, opts) {
            Ok(t) => t,
            Err(e) => {
                last = e;
                continue;
            }
        };
        let twice = ChartOptions { guess: (2.0 * one.0, 2.0 * one.1), ..opts.clone() };
        match chart_translation(level, &base.base, &t3.power(2), &twice) {
            Ok(two) => return Ok(TranslationStudy { base, t3: one, t3_squared: two }),
            Err(e) => last = e,
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn identity_has_zero_translation() {
        let level = LevelSpec::from_f(rat(3, 1), rat(4, 1));
        let bases = find_chart_base(&level, &GenWord::t3(), 1).unwrap();
        let b = &bases[0].base;
        let t = chart_translation(&level, b, &GenWord::identity(), &ChartOptions::default()).unwrap();
        assert_eq!(t, (0.0, 0.0));
    }

    #[test]
    fn t3_translation_on_level_3_4() {
        let level = LevelSpec::from_f(rat(3, 1), rat(4, 1));
        let s = translation_study(&level, &ChartOptions::default()).unwrap();
        assert!((s.t3.0 - 0.0397171955).abs() < 1e-8, "{:?}", s.t3);
        assert!((s.t3.1 - 0.3520517439).abs() < 1e-8, "{:?}", s.t3);
        assert!(s.xg_component().abs() > 0.15);
        assert!(s.additivity_error() < 2e-9);
    }
}
