//! The generators A, Δ, I, J and words in them.
//!
//! Words are written left to right and applied right to left, so `AΔ`
//! means "apply Δ, then A". `T3 = AΔAΔ`.

use std::fmt;

use crate::error::{Error, Result};
use crate::invariants::{f1, f2, membership};
use crate::octagon::{defects, is_convex_coords, CanonCoords};
use crate::scalar::{div_checked, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    A,
    Delta,
    I,
    J,
}

impl Generator {
    pub fn symbol(self) -> char {
        match self {
            Generator::A => 'A',
            Generator::Delta => 'D',
            Generator::I => 'I',
            Generator::J => 'J',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GenWord(pub Vec<Generator>);

impl GenWord {
    pub fn identity() -> Self {
        GenWord(Vec::new())
    }
    pub fn t3() -> Self {
        use Generator::*;
        GenWord(vec![A, Delta, A, Delta])
    }
    pub fn t3_inv() -> Self {
        use Generator::*;
        GenWord(vec![Delta, A, Delta, A])
    }
    pub fn iota3() -> Self {
        use Generator::*;
        GenWord(vec![A, Delta, A])
    }
    pub fn iota5() -> Self {
        use Generator::*;
        GenWord(vec![A, Delta, A, Delta, A])
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GenWord) -> GenWord {
        GenWord(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    pub fn power(&self, n: usize) -> GenWord {
        GenWord(self.0.iter().copied().cycle().take(self.0.len() * n).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Letters `A D I J` (or `Δ`), aliases `T3 T3i i3 i5`; `id` or empty is the identity.
    pub fn parse(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
        if t.is_empty() || t == "id" {
            return Ok(GenWord::identity());
        }
        let mut out = Vec::new();
        let mut rest = t.as_str();
        while !rest.is_empty() {
            let aliases = [("T3i", GenWord::t3_inv()), ("T3", GenWord::t3()), ("i3", GenWord::iota3()), ("i5", GenWord::iota5())];
            if let Some((name, w)) = aliases.iter().find(|(name, _)| rest.starts_with(name)) {
                out.extend(w.0.iter().copied());
                rest = &rest[name.len()..];
                continue;
            }
            let ch = rest.chars().next().unwrap();
            let g = match ch {
                'A' => Generator::A,
                'D' | 'Δ' => Generator::Delta,
                'I' => Generator::I,
                'J' => Generator::J,
                _ => return Err(Error::Parse(format!("unknown generator {ch:?} in word {text:?}"))),
            };
            out.push(g);
            rest = &rest[ch.len_utf8()..];
        }
        Ok(GenWord(out))
    }
}

impl fmt::Display for GenWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "id");
        }
        for g in &self.0 {
            write!(f, "{}", g.symbol())?;
        }
        Ok(())
    }
}

pub fn map_a<S: Scalar>(p: &CanonCoords<S>) -> CanonCoords<S> {
    CanonCoords::new(-p.b.clone(), -p.a.clone(), -p.d.clone(), -p.c.clone())
}

pub fn map_i<S: Scalar>(p: &CanonCoords<S>) -> CanonCoords<S> {
    CanonCoords::new(p.c.clone(), p.d.clone(), p.a.clone(), p.b.clone())
}

pub fn map_j<S: Scalar>(p: &CanonCoords<S>) -> CanonCoords<S> {
    CanonCoords::new(p.b.clone(), p.a.clone(), p.d.clone(), p.c.clone())
}

pub fn map_delta<S: Scalar>(p: &CanonCoords<S>) -> Result<CanonCoords<S>> {
    let [a, b, c, d] = p.to_array();
    let one = S::one;
    if a.is_vanishing() {
        return Err(Error::Domain("a".into()));
    }
    if c.is_vanishing() {
        return Err(Error::Domain("c".into()));
    }
    let e = p.e();
    let big_e = e.clone() + a.clone() + c.clone() + one();
    if big_e.is_vanishing() {
        return Err(Error::Domain("e+a+c+1".into()));
    }
    let ce = c.clone() * big_e.clone();
    let ae = a.clone() * big_e;
    Ok(CanonCoords::new(
        div_checked(b.clone() * (c.clone() + d.clone() + one()), ce.clone(), "cE")?,
        div_checked(d.clone() * (e.clone() + b.clone() + c.clone()), ce, "cE")?,
        div_checked(d * (a.clone() + b.clone() + one()), ae.clone(), "aE")?,
        div_checked(b * (e + a + p.d.clone()), ae, "aE")?,
    ))
}

pub fn apply_generator<S: Scalar>(g: Generator, p: &CanonCoords<S>) -> Result<CanonCoords<S>> {
    match g {
        Generator::A => Ok(map_a(p)),
        Generator::Delta => map_delta(p),
        Generator::I => Ok(map_i(p)),
        Generator::J => Ok(map_j(p)),
    }
}

/// Right-to-left evaluation; a failure reports the word position of the generator.
pub fn apply_word<S: Scalar>(w: &GenWord, p: &CanonCoords<S>) -> Result<CanonCoords<S>> {
    let mut cur = p.clone();
    for (index, g) in w.0.iter().enumerate().rev() {
        cur = apply_generator(*g, &cur).map_err(|e| Error::Word { index, source: Box::new(e) })?;
    }
    Ok(cur)
}

pub fn t3<S: Scalar>(p: &CanonCoords<S>) -> Result<CanonCoords<S>> {
    let q = map_a(&map_delta(p)?);
    Ok(map_a(&map_delta(&q)?))
}

pub fn t3_inv<S: Scalar>(p: &CanonCoords<S>) -> Result<CanonCoords<S>> {
    let q = map_delta(&map_a(p))?;
    map_delta(&map_a(&q))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSample<S> {
    pub index: i64,
    pub point: CanonCoords<S>,
    pub convex: bool,
    pub f1: S,
    pub f2: S,
    pub g: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitScan<S> {
    /// Samples ordered by index, from the most negative to the most positive.
    pub samples: Vec<OrbitSample<S>>,
    /// First index that could not be computed in each direction, with the reason.
    pub stop_forward: Option<(i64, Error)>,
    pub stop_backward: Option<(i64, Error)>,
}

fn sample<S: Scalar>(index: i64, point: CanonCoords<S>) -> Result<OrbitSample<S>> {
    let v1 = f1(&point)?;
    let v2 = f2(&point)?;
    Ok(OrbitSample { index, convex: is_convex_coords(&point), g: v2.clone() - v1.clone(), f1: v1, f2: v2, point })
}

fn scan_direction<S: Scalar>(
    p: &CanonCoords<S>,
    steps: usize,
    sign: i64,
    step: impl Fn(&CanonCoords<S>) -> Result<CanonCoords<S>>,
) -> (Vec<OrbitSample<S>>, Option<(i64, Error)>) {
    let mut out = Vec::with_capacity(steps);
    let mut cur = p.clone();
    for j in 1..=steps as i64 {
        match step(&cur).and_then(|q| sample(sign * j, q)) {
            Ok(s) => {
                cur = s.point.clone();
                out.push(s);
            }
            Err(e) => return (out, Some((sign * j, e))),
        }
    }
    (out, None)
}

/// `P_j = T3^j(p)` for `-backward <= j <= forward`, stopping early at domain errors.
pub fn orbit_scan<S: Scalar>(p: &CanonCoords<S>, forward: usize, backward: usize) -> OrbitScan<S> {
    let start = match sample(0, p.clone()) {
        Ok(s) => s,
        Err(e) => {
            return OrbitScan { samples: Vec::new(), stop_forward: Some((0, e.clone())), stop_backward: Some((0, e)) }
        }
    };
    let (fw, stop_forward) = scan_direction(p, forward, 1, t3);
    let (mut bw, stop_backward) = scan_direction(p, backward, -1, t3_inv);
    bw.reverse();
    bw.push(start);
    bw.extend(fw);
    OrbitScan { samples: bw, stop_forward, stop_backward }
}

/// The word moving a convex point into the all-positive chart, chosen by the signs of the two defects.
pub fn to_positive_chart<S: Scalar>(p: &CanonCoords<S>) -> Result<(GenWord, CanonCoords<S>)> {
    if !is_convex_coords(p) {
        return Err(Error::Invalid("point is not convex".into()));
    }
    let (ins, circ) = defects(p)?;
    let word = match (ins.sign(), circ.sign()) {
        (1, 1) => GenWord::identity(),
        (-1, -1) => GenWord(vec![Generator::J]),
        (-1, 1) => GenWord(vec![Generator::J, Generator::Delta]),
        (1, -1) => GenWord(vec![Generator::J, Generator::Delta, Generator::J]),
        _ => return Err(Error::Invalid("inscribed or circumscribed point has no chart word".into())),
    };
    let image = apply_word(&word, p)?;
    debug_assert!(membership(&image).map(|m| m.in_x_plus).unwrap_or(false));
    Ok((word, image))
}
