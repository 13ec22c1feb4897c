//! The intersection of a positive level set with the slice U.
//!
//! On U_ab the level set is cut out by N(c, d) = 0 inside the triangle
//! c, d > 0, c + d < 1, with `a` recovered from H = h. The U_cd half is the
//! image under I.

use crate::error::{Error, Result};
use crate::invariants::{big_g, big_h};
use crate::maps::map_i;
use crate::octagon::CanonCoords;
use crate::scalar::{int, Dual4, Scalar};

use super::LevelSpec;

/// Gamma_0(c), whose roots are where the loop meets c + d = 1.
pub fn gamma0<S: Scalar>(c: &S, g: &S, h: &S) -> S {
    let i = int::<S>;
    let c2 = c.clone() * c.clone();
    i(16) * c.clone() - i(16) * c2.clone() - g.clone() + c.clone() * g.clone() - i(16) * c.clone() * h.clone()
        + i(16) * c2 * h.clone()
        - c.clone() * g.clone() * h.clone()
}

/// The two roots of Gamma_0 in (0, 1), ascending.
pub fn nice_loop_endpoints(g: f64, h: f64) -> Result<(f64, f64)> {
    if !(g > 0.0 && h > 0.0 && h < 1.0) {
        return Err(Error::Invalid(format!("level (g, h) = ({g}, {h}) needs g > 0 and 0 < h < 1")));
    }
    // Gamma_0 = qa c^2 + qb c + qc
    let qa = 16.0 * h - 16.0;
    let qb = 16.0 + g - 16.0 * h - g * h;
    let qc = -g;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return Err(Error::Degenerate(format!("Gamma_0 discriminant {disc} is not positive")));
    }
    let s = disc.sqrt();
    // Stable form of the quadratic formula.
    let q = -0.5 * (qb + qb.signum() * s);
    let (r1, r2) = (q / qa, qc / q);
    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    if !(lo > 0.0 && hi < 1.0) {
        return Err(Error::Degenerate(format!("Gamma_0 roots {lo}, {hi} leave (0, 1)")));
    }
    Ok((lo, hi))
}

/// a(c, d; h) solving H(a, 1-a, c, d) = h.
pub fn lift_a<S: Scalar>(c: &S, d: &S, h: &S) -> S {
    let two = int::<S>(2);
    let num = two * d.clone() + h.clone() - c.clone() * h.clone() - d.clone() * h.clone();
    let den = S::one() - c.clone() + d.clone() + h.clone() + c.clone() * h.clone() - d.clone() * h.clone();
    num / den
}

/// The numerator N(c, d; g, h); the level set on U_ab is N = 0.
pub fn n_poly<S: Scalar>(c: &S, d: &S, g: &S, h: &S) -> S {
    let i = int::<S>;
    let p = |x: &S, k: u32| (0..k).fold(S::one(), |acc, _| acc * x.clone());
    let (c1, d1, g1, h1) = (c.clone(), d.clone(), g.clone(), h.clone());
    let base = i(2) - i(4) * c1.clone() + i(4) * p(c, 3) - i(2) * p(c, 4) - i(4) * d1.clone()
        - i(4) * p(c, 2) * d1.clone()
        + i(8) * p(c, 3) * d1.clone()
        - i(4) * c1.clone() * p(d, 2)
        - i(12) * p(c, 2) * p(d, 2)
        + i(4) * p(d, 3)
        + i(8) * c1.clone() * p(d, 3)
        - i(2) * p(d, 4);
    let cd = c1.clone() * d1.clone();
    let g_part = cd.clone() * g1.clone() - p(c, 2) * d1.clone() * g1.clone() + c1.clone() * p(d, 2) * g1.clone();
    let gh_part = cd.clone() * g1.clone() * h1.clone() + p(c, 2) * d1.clone() * g1.clone() * h1.clone()
        - c1.clone() * p(d, 2) * g1.clone() * h1.clone();
    base.clone() - h1 * base + g_part + gh_part
}

/// lambda(c, d) of the degenerate family g = t, h = (4 - t)/4.
pub fn degenerate_lambda<S: Scalar>(c: &S, d: &S) -> S {
    let i = int::<S>;
    let p = |x: &S, k: u32| (0..k).fold(S::one(), |acc, _| acc * x.clone());
    i(2) - i(4) * c.clone() + i(4) * p(c, 3) - i(2) * p(c, 4) - i(4) * d.clone() + i(8) * c.clone() * d.clone()
        - i(4) * p(c, 2) * d.clone()
        + i(8) * p(c, 3) * d.clone()
        - i(4) * c.clone() * p(d, 2)
        - i(12) * p(c, 2) * p(d, 2)
        + i(4) * p(d, 3)
        + i(8) * c.clone() * p(d, 3)
        - i(2) * p(d, 4)
}

/// mu(c, d) = cd(1 + c - d).
pub fn degenerate_mu<S: Scalar>(c: &S, d: &S) -> S {
    c.clone() * d.clone() * (S::one() + c.clone() - d.clone())
}

#[derive(Clone, Debug)]
pub struct NiceLoop {
    /// Closed polyline; the last point joins back to the first.
    pub points: Vec<CanonCoords<f64>>,
    pub cusps: [CanonCoords<f64>; 2],
    /// Analytic roots of Gamma_0.
    pub endpoints: (f64, f64),
    /// Distance between where continuation lands on c + d = 1 and the analytic root.
    pub closure_error: f64,
    /// Points on the U_ab half, in tracing order.
    pub half: usize,
}

impl NiceLoop {
    pub fn cusp_count(&self, tol: f64) -> usize {
        self.points.iter().filter(|p| (p.a + p.b - 1.0).abs() < tol && (p.c + p.d - 1.0).abs() < tol).count()
    }

    /// Largest |G - g| + |H - h| over the loop.
    pub fn level_error(&self, level: &LevelSpec) -> Result<(f64, f64)> {
        let (g, h) = level.gh_f64()?;
        let mut worst = (0.0f64, 0.0f64);
        for p in &self.points {
            worst.0 = worst.0.max((big_g(p)? - g).abs());
            worst.1 = worst.1.max((big_h(p)? - h).abs());
        }
        Ok(worst)
    }

    /// Hausdorff distance between the vertex set and its image under I.
    pub fn i_asymmetry(&self) -> f64 {
        let imgs: Vec<CanonCoords<f64>> = self.points.iter().map(map_i).collect();
        let one_way = |xs: &[CanonCoords<f64>], ys: &[CanonCoords<f64>]| {
            xs.iter().map(|x| ys.iter().map(|y| x.dist(y)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        one_way(&self.points, &imgs).max(one_way(&imgs, &self.points))
    }

    pub fn gap(&self) -> f64 {
        self.points.last().unwrap().dist(&self.points[0])
    }
}

fn n_with_grad(x: [f64; 2], g: f64, h: f64) -> (f64, [f64; 2]) {
    let c = Dual4::variable(x[0], 0);
    let d = Dual4::variable(x[1], 1);
    let v = n_poly(&c, &d, &Dual4::constant(g), &Dual4::constant(h));
    (v.value, [v.partials[0], v.partials[1]])
}

/// Newton along the gradient back to N = 0.
fn correct(mut x: [f64; 2], g: f64, h: f64, max_move: f64) -> Option<[f64; 2]> {
    let start = x;
    for _ in 0..12 {
        let (v, gr) = n_with_grad(x, g, h);
        let n2 = gr[0] * gr[0] + gr[1] * gr[1];
        if n2 == 0.0 {
            return None;
        }
        let s = v / n2;
        x = [x[0] - s * gr[0], x[1] - s * gr[1]];
        if ((x[0] - start[0]).powi(2) + (x[1] - start[1]).powi(2)).sqrt() > max_move {
            return None;
        }
        if v.abs() < 1e-14 && (s * s * n2).sqrt() < 1e-15 {
            return Some(x);
        }
    }
    let (v, _) = n_with_grad(x, g, h);
    (v.abs() < 1e-12).then_some(x)
}

/// Newton for N(c, 1-c) = 0 on the segment.
fn segment_root(mut c: f64, g: f64, h: f64) -> f64 {
    for _ in 0..50 {
        let cd = Dual4::variable(c, 0);
        let d = Dual4::constant(1.0) - cd.clone();
        let v = n_poly(&cd, &d, &Dual4::constant(g), &Dual4::constant(h));
        if v.partials[0] == 0.0 {
            break;
        }
        let step = v.value / v.partials[0];
        c -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    c
}

pub const MIN_STEP: f64 = 1e-9;
const MAX_POINTS: usize = 1_000_000;

/// Trace the loop on the level by continuation of N = 0 from the first
/// Gamma_0 root back to the line c + d = 1.
pub fn trace_nice_loop(level: &LevelSpec, step: f64) -> Result<NiceLoop> {
    if step <= 0.0 {
        return Err(Error::Invalid("step must be positive".into()));
    }
    level.check_positive()?;
    let (g, h) = level.gh_f64()?;
    let (c1, c2) = nice_loop_endpoints(g, h)?;
    let start = [c1, 1.0 - c1];
    let (_, gr) = n_with_grad(start, g, h);
    let mut tangent = [-gr[1], gr[0]];
    // Head into the triangle.
    if tangent[0] + tangent[1] > 0.0 {
        tangent = [-tangent[0], -tangent[1]];
    }
    let norm = (tangent[0].powi(2) + tangent[1].powi(2)).sqrt();
    tangent = [tangent[0] / norm, tangent[1] / norm];

    let mut arc = vec![start];
    let mut ds = step;
    let end = loop {
        if arc.len() > MAX_POINTS {
            return Err(Error::Numerical("continuation did not return to c + d = 1".into()));
        }
        let x = *arc.last().unwrap();
        let pred = [x[0] + ds * tangent[0], x[1] + ds * tangent[1]];
        let Some(next) = correct(pred, g, h, ds) else {
            ds *= 0.5;
            if ds < MIN_STEP {
                return Err(Error::Numerical(format!("corrector diverged near c = {}, d = {}", x[0], x[1])));
            }
            continue;
        };
        if next[0] + next[1] >= 1.0 {
            // Back on the segment: refine the landing point there.
            let s = (1.0 - x[0] - x[1]) / ((next[0] + next[1]) - (x[0] + x[1]));
            let guess = x[0] + s * (next[0] - x[0]);
            break segment_root(guess, g, h);
        }
        if next[0] <= 0.0 || next[1] <= 0.0 {
            return Err(Error::Numerical("continuation left the triangle".into()));
        }
        // Secant predictor direction.
        let sec = [next[0] - x[0], next[1] - x[1]];
        let sn = (sec[0].powi(2) + sec[1].powi(2)).sqrt();
        tangent = [sec[0] / sn, sec[1] / sn];
        arc.push(next);
        ds = (ds * 2.0).min(step);
    };
    arc.push([end, 1.0 - end]);
    let closure_error = (end - c2).abs();

    let hh = h;
    let lift = |x: &[f64; 2]| {
        let a = lift_a(&x[0], &x[1], &hh);
        CanonCoords::new(a, 1.0 - a, x[0], x[1])
    };
    let half: Vec<CanonCoords<f64>> = arc.iter().map(lift).collect();
    let mut points = half.clone();
    points.extend(half.iter().skip(1).take(half.len() - 2).map(map_i));
    let cusps = [half[0].clone(), half[half.len() - 1].clone()];
    Ok(NiceLoop { points, cusps, endpoints: (c1, c2), closure_error, half: half.len() })
}
