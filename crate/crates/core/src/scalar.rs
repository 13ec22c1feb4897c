//! Scalar backends: exact rationals, IEEE doubles and forward-mode dual
//! numbers carrying four partials. Every formula in the crate is written
//! once against [`Scalar`] and evaluated on whichever backend is needed.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::octagon::CanonCoords;

/// Arbitrary precision rational, always in lowest terms with positive denominator.
pub type Rat = BigRational;

/// Values below this magnitude count as zero denominators in the float backend.
pub const FLOAT_VANISH: f64 = 1e-14;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_rat(r: &Rat) -> Self;
    fn is_vanishing(&self) -> bool;
    /// Exact zero for rationals, `|x| < tol` for floats; duals look at the value.
    fn is_zero_within(&self, tol: f64) -> bool;
    fn to_f64(&self) -> f64;
    /// Sign of the value part, 0 when vanishing.
    fn sign(&self) -> i8;

    fn from_i64(n: i64) -> Self {
        Self::from_rat(&Rat::from_integer(BigInt::from(n)))
    }
    fn zero() -> Self {
        Self::from_i64(0)
    }
    fn one() -> Self {
        Self::from_i64(1)
    }
    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Scalar for Rat {
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn is_vanishing(&self) -> bool {
        self.is_zero()
    }
    fn is_zero_within(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn sign(&self) -> i8 {
        if self.is_zero() {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
    fn from_i64(n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }
}

impl Scalar for f64 {
    fn from_rat(r: &Rat) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn is_vanishing(&self) -> bool {
        self.abs() < FLOAT_VANISH
    }
    fn is_zero_within(&self, tol: f64) -> bool {
        self.abs() < tol
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sign(&self) -> i8 {
        if self.is_vanishing() {
            0
        } else if *self > 0.0 {
            1
        } else {
            -1
        }
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
}

/// Divide, failing with a domain error that names the denominator.
pub fn div_checked<S: Scalar>(num: S, den: S, label: &str) -> Result<S> {
    if den.is_vanishing() {
        Err(domain(label))
    } else {
        Ok(num / den)
    }
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int<S: Scalar>(n: i64) -> S {
    S::from_i64(n)
}

/// Parse `[-]digits`, `[-]digits/digits` or a plain decimal `[-]digits.digits`.
pub fn rat_parse(text: &str) -> Result<Rat> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational: {text:?}"));
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit());
    let value = if let Some((n, d)) = body.split_once('/') {
        if !digits(n) || !digits(d) {
            return Err(bad());
        }
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        Rat::new(n.parse().map_err(|_| bad())?, d)
    } else if let Some((i, f)) = body.split_once('.') {
        if !digits(i) || !digits(f) {
            return Err(bad());
        }
        let scale = BigInt::from(10).pow(f.len() as u32);
        let whole: BigInt = format!("{i}{f}").parse().map_err(|_| bad())?;
        Rat::new(whole, scale)
    } else {
        if !digits(body) {
            return Err(bad());
        }
        Rat::from_integer(body.parse().map_err(|_| bad())?)
    };
    Ok(if neg { -value } else { value })
}

/// Exact square root when `x` is the square of a rational.
pub fn rat_sqrt(x: &Rat) -> Option<Rat> {
    if Signed::is_negative(x) {
        return None;
    }
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| Rat::new(rn, rd))
}

/// Print as `p/q`, or `p` for integers. Inverse of [`rat_parse`].
pub fn rat_to_string(r: &Rat) -> String {
    r.to_string()
}

/// Uniform rational with numerator in `[-num_bound, num_bound]` and denominator in `[1, den_bound]`.
pub fn random_rat<R: Rng>(rng: &mut R, num_bound: i64, den_bound: i64) -> Rat {
    rat(rng.gen_range(-num_bound..=num_bound), rng.gen_range(1..=den_bound))
}

/// Rational in `[lo, hi]` on a grid of spacing `1/den`.
pub fn random_rat_in<R: Rng>(rng: &mut R, lo: &Rat, hi: &Rat, den: i64) -> Rat {
    let d = BigInt::from(den);
    let lo_n = (lo * Rat::from_integer(d.clone())).ceil().to_integer();
    let hi_n = (hi * Rat::from_integer(d.clone())).floor().to_integer();
    let span = (&hi_n - &lo_n).to_i64().unwrap_or(0).max(0);
    let k = rng.gen_range(0..=span);
    Rat::new(lo_n + BigInt::from(k), d)
}

/// Forward-mode dual number with partials in the directions a, b, c, d.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual4<S> {
    pub value: S,
    pub partials: [S; 4],
}

impl<S: Scalar> Dual4<S> {
    pub fn constant(value: S) -> Self {
        Dual4 { value, partials: [S::zero(), S::zero(), S::zero(), S::zero()] }
    }

    pub fn variable(value: S, index: usize) -> Self {
        let mut d = Self::constant(value);
        d.partials[index] = S::one();
        d
    }

    /// Seed with an arbitrary tangent direction instead of a coordinate axis.
    pub fn with_partials(value: S, partials: [S; 4]) -> Self {
        Dual4 { value, partials }
    }
}

impl<S: Scalar> Add for Dual4<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let [p0, p1, p2, p3] = self.partials;
        let [q0, q1, q2, q3] = o.partials;
        Dual4 { value: self.value + o.value, partials: [p0 + q0, p1 + q1, p2 + q2, p3 + q3] }
    }
}

impl<S: Scalar> Sub for Dual4<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let [p0, p1, p2, p3] = self.partials;
        let [q0, q1, q2, q3] = o.partials;
        Dual4 { value: self.value - o.value, partials: [p0 - q0, p1 - q1, p2 - q2, p3 - q3] }
    }
}

impl<S: Scalar> Mul for Dual4<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let partials = std::array::from_fn(|i| {
            self.partials[i].clone() * o.value.clone() + self.value.clone() * o.partials[i].clone()
        });
        Dual4 { value: self.value * o.value, partials }
    }
}

impl<S: Scalar> Div for Dual4<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let den = o.value.clone() * o.value.clone();
        let partials = std::array::from_fn(|i| {
            (self.partials[i].clone() * o.value.clone() - self.value.clone() * o.partials[i].clone())
                / den.clone()
        });
        Dual4 { value: self.value / o.value, partials }
    }
}

impl<S: Scalar> Neg for Dual4<S> {
    type Output = Self;
    fn neg(self) -> Self {
        let [p0, p1, p2, p3] = self.partials;
        Dual4 { value: -self.value, partials: [-p0, -p1, -p2, -p3] }
    }
}

impl<S: Scalar> Scalar for Dual4<S> {
    fn from_rat(r: &Rat) -> Self {
        Dual4::constant(S::from_rat(r))
    }
    fn is_vanishing(&self) -> bool {
        self.value.is_vanishing()
    }
    fn is_zero_within(&self, tol: f64) -> bool {
        self.value.is_zero_within(tol)
    }
    fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
    fn sign(&self) -> i8 {
        self.value.sign()
    }
}

/// Trial divisors used when making a radicand square-free.
const SQUARE_TRIAL_LIMIT: u32 = 10_000;

/// Exact element `x + y*sqrt(r)` of a real quadratic field. Rational constants
/// carry no radicand and combine with any field. Radicands whose ratio is not
/// a rational square cannot be mixed.
#[derive(Clone, Debug)]
pub struct QuadRat {
    pub x: Rat,
    pub y: Rat,
    pub r: Option<Rat>,
}

impl QuadRat {
    /// `x + y*sqrt(r)`, with `r` a positive non-square rational.
    pub fn new(x: Rat, y: Rat, r: Rat) -> Self {
        assert!(r.is_positive(), "radicand must be positive");
        // sqrt(n/d) = sqrt(n d)/d, then pull small square factors out of n d.
        let mut m = r.numer() * r.denom();
        let mut y = y / Rat::from_integer(r.denom().clone());
        let mut f = BigInt::from(2);
        let mut tries = 0u32;
        while &f * &f <= m && tries < SQUARE_TRIAL_LIMIT {
            let f2 = &f * &f;
            while (&m % &f2).is_zero() {
                m /= &f2;
                y *= Rat::from_integer(f.clone());
            }
            f += 1;
            tries += 1;
        }
        if m == BigInt::from(1) {
            return QuadRat { x: x + y, y: <Rat as Zero>::zero(), r: None };
        }
        QuadRat { x, y, r: Some(Rat::from_integer(m)) }.tidy()
    }

    pub fn sqrt_of(r: Rat) -> Self {
        Self::new(<Rat as Zero>::zero(), Rat::from_integer(BigInt::from(1)), r)
    }

    fn tidy(mut self) -> Self {
        if self.y.is_zero() {
            self.r = None;
        }
        self
    }

    /// Rewrite `o` over the radicand of `self` when both are present.
    fn aligned(&self, o: Self) -> (Option<Rat>, Self) {
        match (&self.r, &o.r) {
            (Some(a), Some(b)) if a != b => {
                let t = rat_sqrt(&(b.clone() / a.clone())).expect("mixed quadratic fields");
                let r = Some(a.clone());
                (r.clone(), QuadRat { x: o.x, y: o.y * t, r })
            }
            (Some(a), _) | (None, Some(a)) => (Some(a.clone()), o),
            (None, None) => (None, o),
        }
    }

    pub fn conjugate(&self) -> Self {
        QuadRat { x: self.x.clone(), y: -self.y.clone(), r: self.r.clone() }
    }

    fn norm(&self) -> Rat {
        let r = self.r.clone().unwrap_or_else(<Rat as Zero>::zero);
        &self.x * &self.x - &self.y * &self.y * r
    }

    /// Whether the two values can be combined without leaving one quadratic field.
    pub fn compatible(&self, o: &Self) -> bool {
        match (&self.r, &o.r) {
            (Some(a), Some(b)) => rat_sqrt(&(b.clone() / a.clone())).is_some(),
            _ => true,
        }
    }

    /// Parse a rational, or `[x+|x-][y*]sqrt(r)` with rational x, y, r.
    pub fn parse(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(open) = t.find("sqrt(") else { return Ok(QuadRat::from_rat(&rat_parse(&t)?)) };
        let bad = || Error::Parse(format!("not of the form x+y*sqrt(r): {text:?}"));
        let inner = t[open + 5..].strip_suffix(')').ok_or_else(bad)?;
        let r = rat_parse(inner)?;
        if !r.is_positive() {
            return Err(Error::Parse(format!("radicand must be positive in {text:?}")));
        }
        let head = &t[..open];
        let (head, starred) = match head.strip_suffix('*') {
            Some(h) => (h, true),
            None => (head, false),
        };
        let split = head.char_indices().skip(1).filter(|&(_, c)| c == '+' || c == '-').last().map(|(i, _)| i);
        let (x, y) = match split {
            Some(i) if !starred || i + 1 < head.len() => (rat_parse(&head[..i])?, &head[i..]),
            _ => (<Rat as Zero>::zero(), head),
        };
        let y = match y {
            "" | "+" if !starred => Rat::from_integer(BigInt::from(1)),
            "-" if !starred => Rat::from_integer(BigInt::from(-1)),
            s if starred => rat_parse(s.strip_prefix('+').unwrap_or(s))?,
            _ => return Err(bad()),
        };
        Ok(QuadRat::new(x, y, r))
    }
}

impl std::fmt::Display for QuadRat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.r {
            None => write!(f, "{}", self.x),
            Some(r) if self.x.is_zero() => write!(f, "{}*sqrt({})", self.y, r),
            Some(r) => write!(f, "{}{}{}*sqrt({})", self.x, if self.y.is_negative() { "" } else { "+" }, self.y, r),
        }
    }
}

impl PartialEq for QuadRat {
    fn eq(&self, o: &Self) -> bool {
        (self.clone() - o.clone()).is_vanishing()
    }
}

impl Add for QuadRat {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (r, o) = self.aligned(o);
        QuadRat { x: self.x + o.x, y: self.y + o.y, r }.tidy()
    }
}

impl Sub for QuadRat {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (r, o) = self.aligned(o);
        QuadRat { x: self.x - o.x, y: self.y - o.y, r }.tidy()
    }
}

impl Mul for QuadRat {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (r, o) = self.aligned(o);
        let rr = r.clone().unwrap_or_else(<Rat as Zero>::zero);
        let x = &self.x * &o.x + &self.y * &o.y * rr;
        let y = &self.x * &o.y + &self.y * &o.x;
        QuadRat { x, y, r }.tidy()
    }
}

impl Div for QuadRat {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let n = o.norm();
        let num = self * o.conjugate();
        QuadRat { x: num.x / n.clone(), y: num.y / n, r: num.r }.tidy()
    }
}

impl Neg for QuadRat {
    type Output = Self;
    fn neg(self) -> Self {
        QuadRat { x: -self.x, y: -self.y, r: self.r }
    }
}

impl Scalar for QuadRat {
    fn from_rat(r: &Rat) -> Self {
        QuadRat { x: r.clone(), y: <Rat as Zero>::zero(), r: None }
    }
    fn is_vanishing(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
    fn is_zero_within(&self, _tol: f64) -> bool {
        self.is_vanishing()
    }
    fn to_f64(&self) -> f64 {
        let r = self.r.as_ref().map(|r| Scalar::to_f64(r).sqrt()).unwrap_or(0.0);
        Scalar::to_f64(&self.x) + Scalar::to_f64(&self.y) * r
    }
    fn sign(&self) -> i8 {
        let sx = Scalar::sign(&self.x);
        let sy = Scalar::sign(&self.y);
        if sy == 0 || sx == sy {
            return if sx == 0 { sy } else { sx };
        }
        if sx == 0 {
            return sy;
        }
        // Opposite signs: compare x^2 with y^2 r.
        let n = self.norm();
        if n.is_positive() {
            sx
        } else {
            sy
        }
    }
}

/// A scalar field on the coordinate space that can be evaluated on any backend.
pub trait Field4: Sync {
    fn eval<S: Scalar>(&self, p: &CanonCoords<S>) -> Result<S>;
}

/// Lift a point to dual numbers seeded along the coordinate axes.
pub fn seed<S: Scalar>(p: &CanonCoords<S>) -> CanonCoords<Dual4<S>> {
    let [a, b, c, d] = p.to_array();
    CanonCoords::new(
        Dual4::variable(a, 0),
        Dual4::variable(b, 1),
        Dual4::variable(c, 2),
        Dual4::variable(d, 3),
    )
}

/// Lift a point to dual numbers carrying one directional derivative.
pub fn seed_direction<S: Scalar>(p: &CanonCoords<S>, v: &[S; 4]) -> CanonCoords<Dual4<S>> {
    let lift = |x: S, i: usize| {
        let mut d = Dual4::constant(x);
        d.partials[0] = v[i].clone();
        d
    };
    let [a, b, c, d] = p.to_array();
    CanonCoords::new(lift(a, 0), lift(b, 1), lift(c, 2), lift(d, 3))
}

/// Value and gradient of `f` at `p` on any backend.
pub fn gradient<S: Scalar, F: Field4 + ?Sized>(f: &F, p: &CanonCoords<S>) -> Result<(S, [S; 4])> {
    let out = f.eval(&seed(p))?;
    Ok((out.value, out.partials))
}

/// Exact value and gradient via dual-number evaluation over the rationals.
pub fn exact_gradient<F: Field4 + ?Sized>(f: &F, p: &CanonCoords<Rat>) -> Result<(Rat, [Rat; 4])> {
    gradient(f, p)
}

/// Jacobian (rows = outputs) of a map on the coordinate space, with its value.
pub fn jacobian<S: Scalar>(
    map: impl Fn(&CanonCoords<Dual4<S>>) -> Result<CanonCoords<Dual4<S>>>,
    p: &CanonCoords<S>,
) -> Result<(CanonCoords<S>, [[S; 4]; 4])> {
    let out = map(&seed(p))?.to_array();
    let value = CanonCoords::from_array(std::array::from_fn(|i| out[i].value.clone()));
    let jac = std::array::from_fn(|i| out[i].partials.clone());
    Ok((value, jac))
}

pub fn dot<S: Scalar>(u: &[S; 4], v: &[S; 4]) -> S {
    u.iter().zip(v).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn mat_vec<S: Scalar>(m: &[[S; 4]; 4], v: &[S; 4]) -> [S; 4] {
    std::array::from_fn(|i| dot(&m[i], v))
}
