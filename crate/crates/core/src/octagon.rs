//! Centrally symmetric octagons and their canonical coordinates.
//!
//! A point `(a,b,c,d)` stands for the octagon with vertices
//! `(1,0),(a,b),(0,1),(-d,c)` followed by their negatives.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::invariants::{g_ab, g_cd};
use crate::scalar::{div_checked, rat_parse, rat_to_string, Rat, Scalar};

/// Tolerance for central symmetry of float input.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Float threshold for parallel lines in homogeneous intersection.
pub const PARALLEL_TOL: f64 = 1e-12;
/// Index offset between the geometric construction and the coordinate formula.
/// Determined empirically; it turned out to be zero.
pub const GEOMETRIC_T3_SHIFT: usize = 0;

#[derive(Clone, Debug, PartialEq)]
pub struct CanonCoords<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

impl<S: Scalar> CanonCoords<S> {
    pub fn new(a: S, b: S, c: S, d: S) -> Self {
        CanonCoords { a, b, c, d }
    }

    pub fn from_array([a, b, c, d]: [S; 4]) -> Self {
        CanonCoords { a, b, c, d }
    }

    pub fn to_array(&self) -> [S; 4] {
        [self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone()]
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> CanonCoords<T> {
        CanonCoords::new(f(&self.a), f(&self.b), f(&self.c), f(&self.d))
    }

    pub fn to_f64(&self) -> CanonCoords<f64> {
        self.map(|x| x.to_f64())
    }

    pub fn splat(s: S) -> Self {
        CanonCoords::new(s.clone(), s.clone(), s.clone(), s)
    }

    pub fn e(&self) -> S {
        self.a.clone() * self.c.clone() + self.b.clone() * self.d.clone()
    }
}

impl CanonCoords<Rat> {
    pub fn from_strs(a: &str, b: &str, c: &str, d: &str) -> Result<Self> {
        Ok(CanonCoords::new(rat_parse(a)?, rat_parse(b)?, rat_parse(c)?, rat_parse(d)?))
    }

    /// Parse `"a,b,c,d"` with fraction or decimal entries.
    pub fn parse_list(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!("expected 4 comma-separated values, got {}", parts.len())));
        }
        Self::from_strs(parts[0], parts[1], parts[2], parts[3])
    }
}

impl CanonCoords<f64> {
    pub fn dist(&self, o: &Self) -> f64 {
        let u = self.to_array();
        let v = o.to_array();
        (0..4).map(|i| (u[i] - v[i]).powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let u = self.to_array();
        let v = o.to_array();
        (0..4).map(|i| (u[i] - v[i]).abs()).fold(0.0, f64::max)
    }
}

pub type Point<S> = [S; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct Octagon<S> {
    pub vertices: [Point<S>; 8],
}

impl<S: Scalar> Octagon<S> {
    pub fn new(vertices: [Point<S>; 8]) -> Self {
        Octagon { vertices }
    }

    pub fn vertex(&self, i: usize) -> &Point<S> {
        &self.vertices[i % 8]
    }

    pub fn to_f64(&self) -> Octagon<f64> {
        Octagon::new(std::array::from_fn(|i| {
            let [x, y] = &self.vertices[i];
            [x.to_f64(), y.to_f64()]
        }))
    }

    /// Relabel so that output vertex j is input vertex `sign*j + shift`.
    pub fn relabel(&self, shift: usize, reflect: bool) -> Self {
        Octagon::new(std::array::from_fn(|j| {
            let k = if reflect { (8 - j % 8) % 8 } else { j };
            self.vertices[(k + shift) % 8].clone()
        }))
    }

    /// The 16 dihedral relabelings (8 rotations, each with and without reflection).
    pub fn dihedral_relabelings(&self) -> Vec<Self> {
        let mut out = Vec::with_capacity(16);
        for reflect in [false, true] {
            for shift in 0..8 {
                out.push(self.relabel(shift, reflect));
            }
        }
        out
    }

    pub fn is_centrally_symmetric(&self, tol: f64) -> bool {
        (0..4).all(|i| {
            let [x, y] = &self.vertices[i];
            let [u, v] = &self.vertices[i + 4];
            (x.clone() + u.clone()).is_zero_within(tol) && (y.clone() + v.clone()).is_zero_within(tol)
        })
    }
}

pub fn vertices_from_coords<S: Scalar>(p: &CanonCoords<S>) -> Octagon<S> {
    let z = S::zero;
    let o = S::one;
    let [a, b, c, d] = p.to_array();
    let half: [Point<S>; 4] = [[o(), z()], [a, b], [z(), o()], [-d, c]];
    Octagon::new(std::array::from_fn(|i| {
        let [x, y] = half[i % 4].clone();
        if i < 4 {
            [x, y]
        } else {
            [-x, -y]
        }
    }))
}

/// Canonical coordinates of the affine class of `o`, checking central symmetry within `tol`.
pub fn normalize_with_tol<S: Scalar>(o: &Octagon<S>, tol: f64) -> Result<CanonCoords<S>> {
    if !o.is_centrally_symmetric(tol) {
        return Err(Error::Invalid("octagon is not centrally symmetric".into()));
    }
    let [x0, y0] = o.vertices[0].clone();
    let [x2, y2] = o.vertices[2].clone();
    let det = x0.clone() * y2.clone() - x2.clone() * y0.clone();
    if det.is_vanishing() {
        return Err(Error::Degenerate("v0 and v2 are collinear with the centre".into()));
    }
    let inv = |[x, y]: Point<S>| -> Result<Point<S>> {
        let u = div_checked(y2.clone() * x.clone() - x2.clone() * y.clone(), det.clone(), "det(v0,v2)")?;
        let v = div_checked(x0.clone() * y - y0.clone() * x, det.clone(), "det(v0,v2)")?;
        Ok([u, v])
    };
    let [a, b] = inv(o.vertices[1].clone())?;
    let [md, c] = inv(o.vertices[3].clone())?;
    Ok(CanonCoords::new(a, b, c, -md))
}

pub fn normalize<S: Scalar>(o: &Octagon<S>) -> Result<CanonCoords<S>> {
    normalize_with_tol(o, SYMMETRY_TOL)
}

fn cross<S: Scalar>(u: &Point<S>, v: &Point<S>) -> S {
    u[0].clone() * v[1].clone() - u[1].clone() * v[0].clone()
}

fn sub<S: Scalar>(u: &Point<S>, v: &Point<S>) -> Point<S> {
    [u[0].clone() - v[0].clone(), u[1].clone() - v[1].clone()]
}

/// Convex in the ordinary sense: every turn has the same strict sign and the
/// boundary winds exactly once (this excludes star octagons such as {8/3}).
pub fn is_convex<S: Scalar>(o: &Octagon<S>) -> bool {
    let edges: Vec<Point<S>> = (0..8).map(|i| sub(o.vertex(i + 1), o.vertex(i))).collect();
    let turns: Vec<i8> = (0..8).map(|i| cross(&edges[i], &edges[(i + 1) % 8]).sign()).collect();
    let orient = turns[0];
    if orient == 0 || turns.iter().any(|&t| t != orient) {
        return false;
    }
    // Count how often the edge direction sweeps past the positive x-axis.
    let ys: Vec<i8> = edges.iter().map(|e| e[1].sign() * orient).collect();
    let passes = (0..8).filter(|&i| ys[i] < 0 && ys[(i + 1) % 8] >= 0).count();
    passes == 1
}

pub fn is_convex_coords<S: Scalar>(p: &CanonCoords<S>) -> bool {
    is_convex(&vertices_from_coords(p))
}

/// The algebraic constraint list implied by convexity. Necessary, not sufficient.
pub fn convex_constraints<S: Scalar>(p: &CanonCoords<S>) -> bool {
    let one = S::one;
    let pos = |x: &S| x.sign() > 0;
    let abs_lt_one = |x: S| pos(&(one() - x.clone())) && pos(&(one() + x));
    pos(&p.a)
        && pos(&p.b)
        && pos(&p.c)
        && pos(&p.d)
        && abs_lt_one(p.a.clone() - p.b.clone())
        && abs_lt_one(p.c.clone() - p.d.clone())
        && pos(&(p.a.clone() + p.b.clone() - one()))
        && pos(&(p.c.clone() + p.d.clone() - one()))
}

/// (g_ab + g_cd, (a-b) + (c-d)): the inscribed and circumscribed defects.
pub fn defects<S: Scalar>(p: &CanonCoords<S>) -> Result<(S, S)> {
    let ins = g_ab(p)? + g_cd(p)?;
    let circ = p.a.clone() - p.b.clone() + p.c.clone() - p.d.clone();
    Ok((ins, circ))
}

/// Output vertex j is input vertex 3j mod 8.
pub fn star_reorder<S: Scalar>(o: &Octagon<S>) -> Octagon<S> {
    Octagon::new(std::array::from_fn(|j| o.vertices[(3 * j) % 8].clone()))
}

fn line_through<S: Scalar>(p: &Point<S>, q: &Point<S>) -> [S; 3] {
    // (p,1) x (q,1)
    [
        p[1].clone() - q[1].clone(),
        q[0].clone() - p[0].clone(),
        p[0].clone() * q[1].clone() - p[1].clone() * q[0].clone(),
    ]
}

fn meet<S: Scalar>(l: &[S; 3], m: &[S; 3]) -> Result<Point<S>> {
    let x = l[1].clone() * m[2].clone() - l[2].clone() * m[1].clone();
    let y = l[2].clone() * m[0].clone() - l[0].clone() * m[2].clone();
    let w = l[0].clone() * m[1].clone() - l[1].clone() * m[0].clone();
    if w.is_zero_within(PARALLEL_TOL) {
        return Err(Error::Degenerate("parallel diagonals".into()));
    }
    Ok([x / w.clone(), y / w])
}

/// v'_k is the meet of the diagonals v_{k+1}v_{k+4} and v_{k+2}v_{k+5}.
pub fn geometric_t3<S: Scalar>(o: &Octagon<S>) -> Result<Octagon<S>> {
    let mut out: Vec<Point<S>> = Vec::with_capacity(8);
    for k in 0..8 {
        let l1 = line_through(o.vertex(k + 1), o.vertex(k + 4));
        let l2 = line_through(o.vertex(k + 2), o.vertex(k + 5));
        out.push(meet(&l1, &l2).map_err(|_| {
            Error::Degenerate(format!("diagonals v{}v{} and v{}v{} are parallel", (k + 1) % 8, (k + 4) % 8, (k + 2) % 8, (k + 5) % 8))
        })?);
    }
    let shifted: [Point<S>; 8] = std::array::from_fn(|i| out[(i + GEOMETRIC_T3_SHIFT) % 8].clone());
    Ok(Octagon::new(shifted))
}

pub fn coords_to_json(p: &CanonCoords<Rat>) -> Value {
    json!({"coords": {
        "a": rat_to_string(&p.a),
        "b": rat_to_string(&p.b),
        "c": rat_to_string(&p.c),
        "d": rat_to_string(&p.d),
    }})
}

pub fn octagon_to_json(o: &Octagon<Rat>) -> Value {
    let verts: Vec<Value> = o
        .vertices
        .iter()
        .map(|[x, y]| json!([rat_to_string(x), rat_to_string(y)]))
        .collect();
    json!({ "vertices": verts })
}

fn json_rat(v: &Value) -> Result<Rat> {
    match v {
        Value::String(s) => rat_parse(s),
        Value::Number(n) => rat_parse(&n.to_string()),
        _ => Err(Error::Parse(format!("expected a number or fraction string, got {v}"))),
    }
}

/// Accepts either `{"coords": {...}}` or `{"vertices": [[x,y] x 8]}`; vertices are normalized exactly.
pub fn coords_from_json(v: &Value) -> Result<CanonCoords<Rat>> {
    if let Some(c) = v.get("coords") {
        let get = |k: &str| {
            c.get(k).ok_or_else(|| Error::Parse(format!("missing coordinate {k}"))).and_then(json_rat)
        };
        return Ok(CanonCoords::new(get("a")?, get("b")?, get("c")?, get("d")?));
    }
    if let Some(Value::Array(vs)) = v.get("vertices") {
        if vs.len() != 8 {
            return Err(Error::Parse(format!("expected 8 vertices, got {}", vs.len())));
        }
        let mut pts = Vec::with_capacity(8);
        for p in vs {
            match p {
                Value::Array(xy) if xy.len() == 2 => pts.push([json_rat(&xy[0])?, json_rat(&xy[1])?]),
                _ => return Err(Error::Parse("vertex must be [x, y]".into())),
            }
        }
        let arr: [Point<Rat>; 8] = std::array::from_fn(|i| pts[i].clone());
        return normalize(&Octagon::new(arr));
    }
    Err(Error::Parse("expected \"coords\" or \"vertices\"".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn s() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }

    fn regular() -> Octagon<f64> {
        Octagon::new(std::array::from_fn(|i| {
            let t = i as f64 * std::f64::consts::FRAC_PI_4;
            [t.cos(), t.sin()]
        }))
    }

    fn q(a: i64, b: i64) -> Rat {
        rat(a, b)
    }

    #[test]
    fn regular_normalizes_to_s() {
        let p = normalize(&regular()).unwrap();
        assert!(p.max_abs_diff(&CanonCoords::splat(s())) < 1e-15);
        assert!(is_convex(&regular()));
    }

    #[test]
    fn round_trip_exact() {
        let p = CanonCoords::new(q(1, 2), q(3, 4), q(2, 3), q(1, 3));
        assert_eq!(normalize(&vertices_from_coords(&p)).unwrap(), p);
    }

    #[test]
    fn vertex_substitution() {
        let p = CanonCoords::new(q(1, 2), q(1, 4), q(1, 2), q(1, 4));
        let o = vertices_from_coords(&p);
        assert_eq!(o.vertices[1], [q(1, 2), q(1, 4)]);
        assert_eq!(o.vertices[3], [q(-1, 4), q(1, 2)]);
        assert_eq!(o.vertices[5], [q(-1, 2), q(-1, 4)]);
    }

    #[test]
    fn asymmetric_rejected() {
        let mut o = vertices_from_coords(&CanonCoords::new(q(1, 2), q(3, 4), q(2, 3), q(1, 3)));
        o.vertices[4] = [q(-2, 1), q(0, 1)];
        assert!(normalize(&o).is_err());
    }

    #[test]
    fn convexity_examples() {
        let bad = CanonCoords::new(q(1, 2), q(1, 4), q(1, 2), q(1, 4));
        assert!(!is_convex_coords(&bad));
        assert!(!convex_constraints(&bad));
        let good = CanonCoords::new(0.9, 0.8, 0.9, 0.8);
        assert!(is_convex_coords(&good));
        assert!(convex_constraints(&good));
        assert!(convex_constraints(&CanonCoords::splat(s())));
    }

    #[test]
    fn star_octagon_is_not_convex() {
        let star = star_reorder(&regular());
        assert!(!is_convex(&star));
    }

    #[test]
    fn constraint_list_is_not_sufficient() {
        let p = CanonCoords::splat(q(19, 10));
        assert!(convex_constraints(&p));
        assert!(!is_convex_coords(&p));
    }

    #[test]
    fn defect_examples() {
        let (i, c) = defects(&CanonCoords::new(q(1, 2), q(1, 4), q(1, 2), q(1, 4))).unwrap();
        assert_eq!((i, c), (q(11, 1), q(1, 2)));
        let (i, c) = defects(&CanonCoords::new(0.9, 0.8, 0.9, 0.8)).unwrap();
        assert!((i + 1.25).abs() < 1e-12 && (c - 0.2).abs() < 1e-12);
        let (i, c) = defects(&CanonCoords::splat(s())).unwrap();
        assert!(i.abs() < 1e-15 && c.abs() < 1e-15);
    }

    #[test]
    fn star_order() {
        let labels: Octagon<f64> = Octagon::new(std::array::from_fn(|i| [i as f64, 0.0]));
        let order: Vec<usize> = star_reorder(&labels).vertices.iter().map(|v| v[0] as usize).collect();
        assert_eq!(order, vec![0, 3, 6, 1, 4, 7, 2, 5]);
        let twice: Vec<usize> = star_reorder(&star_reorder(&labels)).vertices.iter().map(|v| v[0] as usize).collect();
        assert_eq!(twice, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn geometric_t3_regular_fixed() {
        let img = geometric_t3(&regular()).unwrap();
        let p = normalize(&img).unwrap();
        assert!(p.max_abs_diff(&CanonCoords::splat(s())) < 1e-12);
    }

    #[test]
    fn geometric_t3_is_symmetric_exactly() {
        let p = CanonCoords::new(q(9, 10), q(4, 5), q(7, 8), q(3, 4));
        let img = geometric_t3(&vertices_from_coords(&p)).unwrap();
        assert!(img.is_centrally_symmetric(0.0));
    }

    #[test]
    fn shift_constant_matches_formula() {
        let p = CanonCoords::new(q(9, 10), q(4, 5), q(7, 8), q(3, 4));
        let geo = normalize(&geometric_t3(&vertices_from_coords(&p)).unwrap()).unwrap();
        assert_eq!(GEOMETRIC_T3_SHIFT, 0);
        assert_eq!(geo, crate::maps::t3(&p).unwrap());
    }

    #[test]
    fn parallel_diagonals_error() {
        // v1v4 is parallel to v2v5 exactly when 1 + a + b = 0.
        let p = CanonCoords::new(q(1, 1), q(-2, 1), q(1, 2), q(1, 3));
        assert!(matches!(geometric_t3(&vertices_from_coords(&p)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn json_round_trip() {
        let p = CanonCoords::new(q(1, 2), q(-3, 4), q(2, 3), q(1, 3));
        assert_eq!(coords_from_json(&coords_to_json(&p)).unwrap(), p);
        let o = vertices_from_coords(&p);
        assert_eq!(coords_from_json(&octagon_to_json(&o)).unwrap(), p);
    }
}
