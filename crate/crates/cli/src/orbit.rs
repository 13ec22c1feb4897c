//! `octagon orbit`: T3 orbit tables on the exact, quadratic or float backend.

use std::fmt::Write as _;

use serde_json::{json, Value};

use octagon_core::maps::orbit_scan;
use octagon_core::octagon::coords_from_json;
use octagon_core::scalar::{rat_parse, rat_to_string};
use octagon_core::{CanonCoords, Error, QuadRat, Rat, Result, Scalar};

use crate::svg::{Canvas, Viewport, DARK, LIGHT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Backend {
    Exact,
    /// Exact arithmetic in one real quadratic field; entries may use `sqrt(r)`.
    Quadratic,
    Float,
}

pub const CSV_HEADER: &str = "index,a,b,c,d,convex,F1,F2,G,drift";

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRow {
    pub index: i64,
    /// Values as printed: fractions, `x+y*sqrt(r)`, or 17 significant digits.
    pub coords: [String; 4],
    pub convex: bool,
    pub f1: String,
    pub f2: String,
    pub g: String,
    /// |F1 - F1(P_0)| + |F2 - F2(P_0)|.
    pub drift: f64,
}

impl OrbitRow {
    pub fn coords_f64(&self) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (o, s) in out.iter_mut().zip(&self.coords) {
            *o = parse_value_f64(s)?;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct OrbitTable {
    pub backend: Backend,
    pub rows: Vec<OrbitRow>,
    pub stop_forward: Option<String>,
    pub stop_backward: Option<String>,
}

pub fn fmt_f64(x: f64) -> String {
    octagon_core::flow::fmt17(x)
}

/// Float value of a printed entry in any of the three backends' formats.
pub fn parse_value_f64(s: &str) -> Result<f64> {
    if let Ok(x) = s.trim().parse::<f64>() {
        return Ok(x);
    }
    Ok(QuadRat::parse(s)?.to_f64())
}

fn table<S: Scalar>(p: &CanonCoords<S>, forward: usize, backward: usize, backend: Backend, show: impl Fn(&S) -> String) -> Result<OrbitTable> {
    let scan = orbit_scan(p, forward, backward);
    if scan.samples.is_empty() {
        let e = scan.stop_forward.map(|(_, e)| e).unwrap_or_else(|| Error::Invalid("empty orbit".into()));
        return Err(e);
    }
    let start = scan.samples.iter().find(|s| s.index == 0).expect("start sample");
    let (f10, f20) = (start.f1.clone(), start.f2.clone());
    let rows = scan
        .samples
        .iter()
        .map(|s| OrbitRow {
            index: s.index,
            coords: s.point.to_array().map(|x| show(&x)),
            convex: s.convex,
            f1: show(&s.f1),
            f2: show(&s.f2),
            g: show(&s.g),
            drift: (s.f1.clone() - f10.clone()).to_f64().abs() + (s.f2.clone() - f20.clone()).to_f64().abs(),
        })
        .collect();
    let stop = |x: Option<(i64, Error)>| x.map(|(i, e)| format!("step {i}: {e}"));
    Ok(OrbitTable { backend, rows, stop_forward: stop(scan.stop_forward), stop_backward: stop(scan.stop_backward) })
}

/// Start coordinates as text: inline `"a,b,c,d"`, or the contents of an input
/// file holding either that line or a JSON coords/vertices object.
pub fn parse_start_text(text: &str) -> Result<Vec<String>> {
    let t = text.trim();
    if t.starts_with('{') {
        let v: Value = serde_json::from_str(t).map_err(|e| Error::Parse(format!("input JSON: {e}")))?;
        let p = coords_from_json(&v)?;
        return Ok(p.to_array().iter().map(rat_to_string).collect());
    }
    let parts: Vec<String> = t.split(',').map(|s| s.trim().to_string()).collect();
    if parts.len() != 4 {
        return Err(Error::Parse(format!("expected 4 comma-separated values, got {}", parts.len())));
    }
    Ok(parts)
}

pub fn run_orbit(entries: &[String], backend: Backend, forward: usize, backward: usize) -> Result<OrbitTable> {
    match backend {
        Backend::Exact => {
            let vals = entries
                .iter()
                .map(|s| {
                    rat_parse(s).map_err(|_| Error::Invalid(format!("exact backend needs rational entries, got {s:?}")))
                })
                .collect::<Result<Vec<Rat>>>()?;
            let p = CanonCoords::new(vals[0].clone(), vals[1].clone(), vals[2].clone(), vals[3].clone());
            table(&p, forward, backward, backend, rat_to_string)
        }
        Backend::Quadratic => {
            let vals = entries.iter().map(|s| QuadRat::parse(s)).collect::<Result<Vec<QuadRat>>>()?;
            for (i, u) in vals.iter().enumerate() {
                if let Some(v) = vals[i + 1..].iter().find(|v| !u.compatible(v)) {
                    return Err(Error::Invalid(format!("{u} and {v} lie in different quadratic fields")));
                }
            }
            let p = CanonCoords::new(vals[0].clone(), vals[1].clone(), vals[2].clone(), vals[3].clone());
            table(&p, forward, backward, backend, |x| x.to_string())
        }
        Backend::Float => {
            let vals = entries.iter().map(|s| parse_value_f64(s)).collect::<Result<Vec<f64>>>()?;
            if vals.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid("coordinates must be finite".into()));
            }
            let p = CanonCoords::new(vals[0], vals[1], vals[2], vals[3]);
            table(&p, forward, backward, backend, |x| fmt_f64(*x))
        }
    }
}

impl OrbitTable {
    pub fn max_drift(&self) -> f64 {
        self.rows.iter().map(|r| r.drift).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.index,
                r.coords[0],
                r.coords[1],
                r.coords[2],
                r.coords[3],
                u8::from(r.convex),
                r.f1,
                r.f2,
                r.g,
                fmt_f64(r.drift)
            );
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "backend": format!("{:?}", self.backend).to_lowercase(),
            "stop_forward": self.stop_forward,
            "stop_backward": self.stop_backward,
            "max_drift": self.max_drift(),
            "samples": self.rows.iter().map(|r| json!({
                "index": r.index,
                "coords": r.coords,
                "convex": r.convex,
                "F1": r.f1,
                "F2": r.f2,
                "G": r.g,
                "drift": r.drift,
            })).collect::<Vec<_>>(),
        })
    }

    /// Scatter of coordinates `proj`, convex samples drawn darker and on top.
    pub fn to_svg(&self, proj: (usize, usize)) -> Result<String> {
        let pts: Vec<([f64; 4], bool)> = self.rows.iter().map(|r| Ok((r.coords_f64()?, r.convex))).collect::<Result<_>>()?;
        let view = Viewport::fit(pts.iter().map(|(c, _)| (c[proj.0], c[proj.1])));
        let mut canvas = Canvas::new(view);
        for convex in [false, true] {
            for (c, _) in pts.iter().filter(|(_, cv)| *cv == convex) {
                canvas.dot(c[proj.0], c[proj.1], 1.5, if convex { DARK } else { LIGHT });
            }
        }
        let names = ["a", "b", "c", "d"];
        Ok(canvas.finish(&format!("T3 orbit, {} samples", self.rows.len()), names[proj.0], names[proj.1]))
    }
}

/// Parse one CSV table written by [`OrbitTable::to_csv`].
pub fn parse_orbit_csv(text: &str) -> Result<Vec<OrbitRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse("missing orbit CSV header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 10 {
                return Err(Error::Parse(format!("expected 10 fields, got {}", f.len())));
            }
            let bad = |what: &str| Error::Parse(format!("bad {what} in {l:?}"));
            Ok(OrbitRow {
                index: f[0].parse().map_err(|_| bad("index"))?,
                coords: std::array::from_fn(|i| f[1 + i].to_string()),
                convex: match f[5] {
                    "1" => true,
                    "0" => false,
                    _ => return Err(bad("convex flag")),
                },
                f1: f[6].into(),
                f2: f[7].into(),
                g: f[8].into(),
                drift: f[9].parse().map_err(|_| bad("drift"))?,
            })
        })
        .collect()
}

/// `"a,b"` style projection to coordinate indices.
pub fn parse_projection(text: &str) -> Result<(usize, usize)> {
    let idx = |s: &str| match s.trim() {
        "a" => Ok(0),
        "b" => Ok(1),
        "c" => Ok(2),
        "d" => Ok(3),
        other => Err(Error::Parse(format!("unknown coordinate {other:?} in projection"))),
    };
    let (x, y) = text.split_once(',').ok_or_else(|| Error::Parse(format!("projection must look like a,b: {text:?}")))?;
    let (i, j) = (idx(x)?, idx(y)?);
    if i == j {
        return Err(Error::Invalid("projection needs two different coordinates".into()));
    }
    Ok((i, j))
}
