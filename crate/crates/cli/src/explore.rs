//! `octagon explore`: nice loops, flat charts and Poncelet fixed points.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};

use octagon_core::flow::{fmt17, flow_chart, trace_nice_loop, translation_study, ChartOptions, NiceLoop};
use octagon_core::poncelet::{classify_lft, fixed_points, sweep_csv, sweep_grid, SweepRow, LftType};
use octagon_core::scalar::rat_to_string;
use octagon_core::{CanonCoords, Error, LevelSpec, LftLevel, Result, Scalar};

use crate::svg::{Canvas, Viewport, ACCENT, DARK};

fn arr(p: &CanonCoords<f64>) -> Value {
    json!(p.to_array())
}

fn level_json(level: &LevelSpec) -> Value {
    json!({"F1": rat_to_string(&level.f1), "F2": rat_to_string(&level.f2)})
}

pub struct LoopReport {
    pub level: LevelSpec,
    pub curve: NiceLoop,
    pub cusps: usize,
    pub asymmetry: f64,
    pub level_error: (f64, f64),
}

/// Cusps are the loop points on both c + d = 1 and a + b = 1.
pub const CUSP_TOL: f64 = 1e-9;

pub fn nice_loop(level: LevelSpec, step: f64) -> Result<LoopReport> {
    if !(step > 0.0 && step < 0.5) {
        return Err(Error::Invalid(format!("step must be in (0, 0.5), got {step}")));
    }
    let curve = trace_nice_loop(&level, step)?;
    let level_error = curve.level_error(&level)?;
    Ok(LoopReport { cusps: curve.cusp_count(CUSP_TOL), asymmetry: curve.i_asymmetry(), level_error, curve, level })
}

impl LoopReport {
    pub fn to_json(&self) -> Value {
        let c = &self.curve;
        json!({
            "level": level_json(&self.level),
            "endpoints": [c.endpoints.0, c.endpoints.1],
            "closure_error": c.closure_error,
            "cusp_count": self.cusps,
            "cusps": c.cusps.iter().map(arr).collect::<Vec<_>>(),
            "i_asymmetry": self.asymmetry,
            "level_error": {"G": self.level_error.0, "H": self.level_error.1},
            "closing_gap": c.gap(),
            "points": c.points.iter().map(arr).collect::<Vec<_>>(),
        })
    }

    /// One row per loop point: a,b,c,d,cusp.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,c,d,cusp\n");
        for p in &self.curve.points {
            let cusp = (p.a + p.b - 1.0).abs() < CUSP_TOL && (p.c + p.d - 1.0).abs() < CUSP_TOL;
            let _ = writeln!(out, "{},{},{},{},{}", fmt17(p.a), fmt17(p.b), fmt17(p.c), fmt17(p.d), u8::from(cusp));
        }
        out
    }

    pub fn to_svg(&self, proj: (usize, usize)) -> String {
        let pts: Vec<(f64, f64)> = self.curve.points.iter().map(|p| {
            let a = p.to_array();
            (a[proj.0], a[proj.1])
        }).collect();
        let mut canvas = Canvas::new(Viewport::fit(pts.iter().copied()));
        canvas.polyline(&pts, DARK, true);
        for c in &self.curve.cusps {
            let a = c.to_array();
            canvas.dot(a[proj.0], a[proj.1], 4.0, ACCENT);
        }
        let names = ["a", "b", "c", "d"];
        let title = format!("nice loop at (F1, F2) = ({}, {})", self.level.f1, self.level.f2);
        canvas.finish(&title, names[proj.0], names[proj.1])
    }
}

pub struct ChartReport {
    pub level: LevelSpec,
    pub study: octagon_core::flow::TranslationStudy,
    /// (t1, t2, point) samples of the chart around the base.
    pub cloud: Vec<(f64, f64, CanonCoords<f64>)>,
}

/// Translation of T3 on a level, plus an n x n cloud of chart points with
/// |t1|, |t2| <= span around the base (skipped points left the domain).
pub fn chart(level: LevelSpec, cloud_n: usize, span: f64) -> Result<ChartReport> {
    level.check_positive()?;
    if !(span.is_finite() && span > 0.0) {
        return Err(Error::Invalid(format!("span must be positive, got {span}")));
    }
    let opts = ChartOptions::default();
    let study = translation_study(&level, &opts)?;
    let grid: Vec<(f64, f64)> = (0..cloud_n)
        .flat_map(|i| (0..cloud_n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let s = |k: usize| if cloud_n == 1 { 0.0 } else { -span + 2.0 * span * k as f64 / (cloud_n - 1) as f64 };
            (s(i), s(j))
        })
        .collect();
    let base = study.base.base.clone();
    let cloud = grid
        .par_iter()
        .filter_map(|&(t1, t2)| flow_chart(&base, t1, t2, &opts.flow).ok().map(|p| (t1, t2, p)))
        .collect();
    Ok(ChartReport { level, study, cloud })
}

impl ChartReport {
    pub fn to_json(&self) -> Value {
        let s = &self.study;
        json!({
            "level": level_json(&self.level),
            "base": arr(&s.base.base),
            "base_offset_from_cusp": [s.base.offset.0, s.base.offset.1],
            "t3_translation": [s.t3.0, s.t3.1],
            "x_g_component": s.xg_component(),
            "t3_squared_translation": [s.t3_squared.0, s.t3_squared.1],
            "additivity_error": s.additivity_error(),
            "cloud": self.cloud.iter().map(|(t1, t2, p)| json!({"t": [t1, t2], "point": arr(p)})).collect::<Vec<_>>(),
        })
    }

    /// Chart cloud rows t1,t2,a,b,c,d.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t1,t2,a,b,c,d\n");
        for (t1, t2, p) in &self.cloud {
            let _ = writeln!(out, "{},{},{},{},{},{}", fmt17(*t1), fmt17(*t2), fmt17(p.a), fmt17(p.b), fmt17(p.c), fmt17(p.d));
        }
        out
    }
}

pub fn fixed_point_json(level: &LftLevel) -> Result<Value> {
    let fp = fixed_points(level)?;
    let class = classify_lft(level)?;
    let show = |p: &CanonCoords<octagon_core::QuadRat>| {
        json!({
            "exact": p.to_array().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "float": p.to_array().iter().map(|x| x.to_f64()).collect::<Vec<_>>(),
        })
    };
    Ok(json!({
        "k": rat_to_string(&level.k),
        "l": rat_to_string(&level.ell),
        "D": fp.d.to_string(),
        "x0": fp.x0.to_string(),
        "y0": fp.y0.to_string(),
        "attractor": show(&fp.attract),
        "repeller": show(&fp.repel),
        "multipliers": [fp.multipliers.0, fp.multipliers.1],
        "type": match class.kind { LftType::Hyperbolic => "hyperbolic", LftType::Elliptic => "elliptic" },
    }))
}

/// The n x n sweep over the region, computed in parallel.
pub fn sweep(n: usize) -> Result<Vec<SweepRow>> {
    if n == 0 {
        return Err(Error::Invalid("grid size must be positive".into()));
    }
    let grid = sweep_grid(n);
    let rows: Vec<Result<Vec<SweepRow>>> = grid
        .par_chunks(n)
        .map(|chunk| octagon_core::poncelet::fixed_point_sweep(chunk))
        .collect();
    let mut out = Vec::with_capacity(grid.len());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    sweep_csv(rows)
}

pub fn sweep_to_json(rows: &[SweepRow]) -> Value {
    json!(rows
        .iter()
        .map(|r| json!({"k": r.k, "l": r.ell, "D": r.d, "x0": r.x0, "y0": r.y0, "multiplier": r.multiplier}))
        .collect::<Vec<_>>())
}
