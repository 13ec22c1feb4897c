//! Sparse multivariate Laurent polynomials over the rationals, Sylvester
//! resultants by fraction-free Bareiss elimination, and randomized
//! identity testing.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{div_checked, random_rat, rat_parse, Rat, Scalar};

/// Default cap on the number of terms in any intermediate polynomial.
pub const DEFAULT_TERM_BUDGET: usize = 1_000_000;

/// Terms keyed by exponent vectors (one entry per variable, negative allowed).
/// The map order is lexicographic, so the last entry is the lex-leading term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<i32>, Rat>,
}

fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly { vars: Vec::new(), terms: BTreeMap::new() }
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !Zero::is_zero(&c) {
            terms.insert(Vec::new(), c);
        }
        MPoly { vars: Vec::new(), terms }
    }

    pub fn one() -> Self {
        Self::constant(rat_int(1))
    }

    pub fn var(name: &str) -> Self {
        Self::monomial(rat_int(1), &[(name, 1)])
    }

    pub fn monomial(coeff: Rat, powers: &[(&str, i32)]) -> Self {
        let vars: Vec<String> = powers.iter().map(|(v, _)| v.to_string()).collect();
        let mut terms = BTreeMap::new();
        if !Zero::is_zero(&coeff) {
            terms.insert(powers.iter().map(|(_, e)| *e).collect(), coeff);
        }
        MPoly { vars, terms }.normalized()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &Rat)> {
        self.terms.iter()
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Drop variables that no term uses and merge duplicate names.
    fn normalized(mut self) -> Self {
        let mut merged: Vec<String> = Vec::new();
        for v in &self.vars {
            if !merged.contains(v) {
                merged.push(v.clone());
            }
        }
        if merged.len() != self.vars.len() {
            self = self.with_vars(&merged);
        }
        let used: Vec<bool> = (0..self.vars.len()).map(|i| self.terms.keys().any(|e| e[i] != 0)).collect();
        if used.iter().all(|&u| u) {
            return self;
        }
        let keep: Vec<usize> = (0..self.vars.len()).filter(|&i| used[i]).collect();
        let vars = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let terms = self
            .terms
            .into_iter()
            .map(|(e, c)| (keep.iter().map(|&i| e[i]).collect(), c))
            .collect();
        MPoly { vars, terms }
    }

    /// Re-express over `vars`, which must contain every variable used here.
    fn with_vars(&self, vars: &[String]) -> Self {
        let map: Vec<usize> = vars.iter().map(|_| usize::MAX).collect();
        let mut map = map;
        for (i, v) in vars.iter().enumerate() {
            if let Some(j) = self.vars.iter().position(|w| w == v) {
                map[i] = j;
            }
        }
        let mut terms: BTreeMap<Vec<i32>, Rat> = BTreeMap::new();
        for (e, c) in &self.terms {
            let ne: Vec<i32> = map.iter().map(|&j| if j == usize::MAX { 0 } else { e[j] }).collect();
            let slot = terms.entry(ne).or_insert_with(<Rat as Zero>::zero);
            *slot += c;
        }
        terms.retain(|_, c| !Zero::is_zero(c));
        MPoly { vars: vars.to_vec(), terms }
    }

    fn union_vars(&self, other: &MPoly) -> Vec<String> {
        let mut vars = self.vars.clone();
        for v in &other.vars {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        vars
    }

    fn aligned(&self, other: &MPoly) -> (MPoly, MPoly) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let vars = self.union_vars(other);
        (self.with_vars(&vars), other.with_vars(&vars))
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let (mut x, y) = self.aligned(other);
        for (e, c) in y.terms {
            let slot = x.terms.entry(e).or_insert_with(<Rat as Zero>::zero);
            *slot += c;
        }
        x.terms.retain(|_, c| !Zero::is_zero(c));
        x.normalized()
    }

    pub fn neg(&self) -> MPoly {
        MPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rat) -> MPoly {
        if Zero::is_zero(k) {
            return MPoly::zero();
        }
        MPoly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let (x, y) = self.aligned(other);
        let mut terms: BTreeMap<Vec<i32>, Rat> = BTreeMap::new();
        for (e1, c1) in &x.terms {
            for (e2, c2) in &y.terms {
                let e: Vec<i32> = e1.iter().zip(e2).map(|(p, q)| p + q).collect();
                let slot = terms.entry(e).or_insert_with(<Rat as Zero>::zero);
                *slot += c1 * c2;
            }
        }
        terms.retain(|_, c| !Zero::is_zero(c));
        MPoly { vars: x.vars, terms }.normalized()
    }

    pub fn pow(&self, n: u32) -> MPoly {
        (0..n).fold(MPoly::one(), |acc, _| acc.mul(self))
    }

    pub fn degree_in(&self, var: &str) -> i32 {
        match self.var_index(var) {
            Some(i) => self.terms.keys().map(|e| e[i]).max().unwrap_or(0),
            None => 0,
        }
    }

    pub fn min_degree_in(&self, var: &str) -> i32 {
        match self.var_index(var) {
            Some(i) => self.terms.keys().map(|e| e[i]).min().unwrap_or(0),
            None => 0,
        }
    }

    pub fn total_degree(&self) -> i32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Coefficients of `var^0 .. var^deg` as polynomials in the other variables.
    pub fn coefficients_in(&self, var: &str) -> Result<Vec<MPoly>> {
        let Some(i) = self.var_index(var) else { return Ok(vec![self.clone()]) };
        if self.min_degree_in(var) < 0 {
            return Err(Error::Invalid(format!("negative power of {var}")));
        }
        let deg = self.degree_in(var) as usize;
        let mut out = vec![BTreeMap::new(); deg + 1];
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            ne[i] = 0;
            out[e[i] as usize].insert(ne, c.clone());
        }
        Ok(out
            .into_iter()
            .map(|terms| MPoly { vars: self.vars.clone(), terms }.normalized())
            .collect())
    }

    pub fn derivative(&self, var: &str) -> MPoly {
        let Some(i) = self.var_index(var) else { return MPoly::zero() };
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] != 0 {
                let mut ne = e.clone();
                ne[i] -= 1;
                terms.insert(ne, c * rat_int(e[i] as i64));
            }
        }
        MPoly { vars: self.vars.clone(), terms }.normalized()
    }

    /// Substitute rational values for some variables.
    pub fn substitute(&self, values: &[(&str, Rat)]) -> Result<MPoly> {
        let mut out = MPoly::zero();
        for (e, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (i, v) in self.vars.iter().enumerate() {
                match values.iter().find(|(n, _)| n == v) {
                    Some((_, x)) => {
                        if e[i] < 0 && Zero::is_zero(x) {
                            return Err(Error::Domain(v.clone()));
                        }
                        coeff *= pow_rat(x, e[i]);
                    }
                    None => rest.push((v.as_str(), e[i])),
                }
            }
            out = out.add(&MPoly::monomial(coeff, &rest));
        }
        Ok(out)
    }

    /// Evaluate on any scalar backend; every variable must be bound by `lookup`.
    pub fn eval_with<S: Scalar>(&self, lookup: impl Fn(&str) -> Option<S>) -> Result<S> {
        let vals: Vec<S> = self
            .vars
            .iter()
            .map(|v| lookup(v).ok_or_else(|| Error::Invalid(format!("unbound variable {v}"))))
            .collect::<Result<_>>()?;
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut t = S::from_rat(c);
            for (x, &k) in vals.iter().zip(e) {
                for _ in 0..k.unsigned_abs() {
                    t = if k > 0 { t * x.clone() } else { div_checked(t, x.clone(), "variable")? };
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    pub fn eval(&self, values: &[(&str, Rat)]) -> Result<Rat> {
        self.eval_with(|v| values.iter().find(|(n, _)| *n == v).map(|(_, x)| x.clone()))
    }

    /// The value when no variables remain.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(<Rat as Zero>::zero()),
            1 if self.terms.keys().next().unwrap().iter().all(|&e| e == 0) => self.terms.values().next().cloned(),
            _ => None,
        }
    }

    /// Multiply by the monomial that makes every variable's minimum exponent zero.
    /// Clears monomial denominators and strips monomial content in one step.
    pub fn clear_monomials(&self) -> MPoly {
        if self.terms.is_empty() {
            return self.clone();
        }
        let mins: Vec<i32> = (0..self.vars.len()).map(|i| self.terms.keys().map(|e| e[i]).min().unwrap()).collect();
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.iter().zip(&mins).map(|(x, m)| x - m).collect(), c.clone()))
            .collect();
        MPoly { vars: self.vars.clone(), terms }.normalized()
    }

    /// The monomial removed by [`Self::clear_monomials`], as (variable, exponent) pairs.
    pub fn monomial_content(&self) -> Vec<(String, i32)> {
        (0..self.vars.len())
            .filter_map(|i| {
                let m = self.terms.keys().map(|e| e[i]).min()?;
                (m != 0).then(|| (self.vars[i].clone(), m))
            })
            .collect()
    }

    fn leading(&self) -> Option<(&Vec<i32>, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient `self / divisor` if the division leaves no remainder.
    pub fn exact_div(&self, divisor: &MPoly) -> Option<MPoly> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(MPoly::zero());
        }
        let (mut r, g) = self.aligned(divisor);
        if r.terms.keys().chain(g.terms.keys()).any(|e| e.iter().any(|&x| x < 0)) {
            return None;
        }
        let (ge, gc) = g.leading().map(|(e, c)| (e.clone(), c.clone()))?;
        let mut quotient: BTreeMap<Vec<i32>, Rat> = BTreeMap::new();
        while let Some((re, rc)) = r.leading().map(|(e, c)| (e.clone(), c.clone())) {
            let shift: Vec<i32> = re.iter().zip(&ge).map(|(a, b)| a - b).collect();
            if shift.iter().any(|&x| x < 0) {
                return None;
            }
            let coeff = rc / &gc;
            let term = MPoly { vars: r.vars.clone(), terms: BTreeMap::from([(shift.clone(), coeff.clone())]) };
            r = r.sub(&term.mul(&g)).with_vars(&g.vars);
            quotient.insert(shift, coeff);
        }
        Some(MPoly { vars: g.vars.clone(), terms: quotient }.normalized())
    }

    /// Divide out `factor` as many times as it divides exactly; returns the multiplicity.
    pub fn strip_factor(&self, factor: &MPoly) -> (MPoly, usize) {
        let mut cur = self.clone();
        let mut k = 0;
        while !cur.is_zero() {
            match cur.exact_div(factor) {
                Some(next) => {
                    cur = next;
                    k += 1;
                }
                None => break,
            }
        }
        (cur, k)
    }

    /// Parse the `coeff*a^i*b^j` sum format written by `Display`.
    pub fn parse(text: &str) -> Result<MPoly> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut terms_text = Vec::new();
        let mut cur = String::new();
        let mut prev: Option<char> = None;
        for ch in compact.chars() {
            if (ch == '+' || ch == '-') && !cur.is_empty() && prev != Some('^') && prev != Some('*') {
                terms_text.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
            prev = Some(ch);
        }
        terms_text.push(cur);
        let mut out = MPoly::zero();
        for t in terms_text {
            out = out.add(&parse_term(&t)?);
        }
        Ok(out)
    }
}

fn pow_rat(x: &Rat, e: i32) -> Rat {
    let mut r = rat_int(1);
    for _ in 0..e.unsigned_abs() {
        r *= x;
    }
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

fn parse_term(t: &str) -> Result<MPoly> {
    let bad = || Error::Parse(format!("malformed term {t:?}"));
    let (sign, body) = match t.as_bytes().first() {
        Some(b'-') => (-1, &t[1..]),
        Some(b'+') => (1, &t[1..]),
        _ => (1, t),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let mut coeff = rat_int(sign);
    let mut powers: Vec<(String, i32)> = Vec::new();
    for factor in body.split('*') {
        if factor.is_empty() {
            return Err(bad());
        }
        let first = factor.chars().next().unwrap();
        if first.is_ascii_digit() {
            coeff *= rat_parse(factor)?;
        } else if first.is_alphabetic() || first == '_' {
            let (name, exp) = match factor.split_once('^') {
                Some((n, e)) => (n, e.parse::<i32>().map_err(|_| bad())?),
                None => (factor, 1),
            };
            if !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(bad());
            }
            powers.push((name.to_string(), exp));
        } else {
            return Err(bad());
        }
    }
    let refs: Vec<(&str, i32)> = powers.iter().map(|(n, e)| (n.as_str(), *e)).collect();
    Ok(MPoly::monomial(coeff, &refs))
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c < &<Rat as Zero>::zero();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mag = if neg { -c.clone() } else { c.clone() };
            write!(f, "{mag}")?;
            for (v, &k) in self.vars.iter().zip(e) {
                match k {
                    0 => {}
                    1 => write!(f, "*{v}")?,
                    _ => write!(f, "*{v}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// Commutative ring with exact division, as needed by Bareiss elimination.
pub trait Ring: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn exact_div(&self, o: &Self) -> Option<Self>;
    /// Size measure checked against the term budget.
    fn size(&self) -> usize {
        1
    }
}

impl Ring for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn exact_div(&self, o: &Self) -> Option<Self> {
        (!Zero::is_zero(o)).then(|| self / o)
    }
}

impl Ring for MPoly {
    fn zero() -> Self {
        MPoly::zero()
    }
    fn one() -> Self {
        MPoly::one()
    }
    fn is_zero(&self) -> bool {
        MPoly::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        MPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        MPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        MPoly::mul(self, o)
    }
    fn neg(&self) -> Self {
        MPoly::neg(self)
    }
    fn exact_div(&self, o: &Self) -> Option<Self> {
        MPoly::exact_div(self, o)
    }
    fn size(&self) -> usize {
        self.num_terms()
    }
}

/// Fraction-free Bareiss determinant with row pivoting.
pub fn bareiss_det<R: Ring>(mut m: Vec<Vec<R>>, budget: usize) -> Result<R> {
    let n = m.len();
    if n == 0 {
        return Ok(R::one());
    }
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::Invalid("matrix is not square".into()));
    }
    let mut sign_flip = false;
    let mut prev = R::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign_flip = !sign_flip;
                }
                None => return Ok(R::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                let v = num
                    .exact_div(&prev)
                    .ok_or_else(|| Error::Numerical("Bareiss step was not exact".into()))?;
                if v.size() > budget {
                    return Err(Error::Budget(budget));
                }
                m[i][j] = v;
            }
            m[i][k] = R::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    Ok(if sign_flip { det.neg() } else { det })
}

/// Sylvester matrix with the rows of `p` first; coefficients are given highest degree first.
pub fn sylvester_matrix<R: Ring>(p: &[R], q: &[R]) -> Result<Vec<Vec<R>>> {
    let m = p.len().saturating_sub(1);
    let n = q.len().saturating_sub(1);
    if p.is_empty() || q.is_empty() {
        return Err(Error::Invalid("empty coefficient list".into()));
    }
    if m == 0 && n == 0 {
        return Err(Error::Invalid("both polynomials are constant".into()));
    }
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![R::zero(); size];
        for (j, c) in p.iter().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![R::zero(); size];
        for (j, c) in q.iter().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Determinant of the Sylvester matrix of two coefficient lists (highest degree first).
pub fn sylvester_resultant<R: Ring>(p: &[R], q: &[R]) -> Result<R> {
    sylvester_resultant_with_budget(p, q, DEFAULT_TERM_BUDGET)
}

pub fn sylvester_resultant_with_budget<R: Ring>(p: &[R], q: &[R], budget: usize) -> Result<R> {
    if p.first().is_some_and(|c| c.is_zero()) || q.first().is_some_and(|c| c.is_zero()) {
        return Err(Error::Invalid("leading coefficient is zero".into()));
    }
    bareiss_det(sylvester_matrix(p, q)?, budget)
}

fn descending_coefficients(p: &MPoly, var: &str) -> Result<Vec<MPoly>> {
    let mut c = p.coefficients_in(var)?;
    c.reverse();
    Ok(c)
}

/// Resultant with respect to `var`, a polynomial in the remaining variables.
pub fn eliminate(p: &MPoly, q: &MPoly, var: &str) -> Result<MPoly> {
    eliminate_with_budget(p, q, var, DEFAULT_TERM_BUDGET)
}

pub fn eliminate_with_budget(p: &MPoly, q: &MPoly, var: &str, budget: usize) -> Result<MPoly> {
    if p.degree_in(var) == 0 && q.degree_in(var) == 0 {
        return Err(Error::Invalid(format!("{var} does not occur in either polynomial")));
    }
    sylvester_resultant_with_budget(&descending_coefficients(p, var)?, &descending_coefficients(q, var)?, budget)
}

/// The resultant with respect to `var`, specialized at `point` for the other variables.
/// The Sylvester layout uses the generic degrees, so this equals `eliminate(..)` evaluated at `point`.
pub fn eliminate_at(p: &MPoly, q: &MPoly, var: &str, point: &[(&str, Rat)]) -> Result<Rat> {
    if p.degree_in(var) == 0 && q.degree_in(var) == 0 {
        return Err(Error::Invalid(format!("{var} does not occur in either polynomial")));
    }
    let spec = |poly: &MPoly| -> Result<Vec<Rat>> {
        descending_coefficients(poly, var)?.iter().map(|c| c.eval(point)).collect()
    };
    let (pc, qc) = (spec(p)?, spec(q)?);
    bareiss_det(sylvester_matrix(&pc, &qc)?, DEFAULT_TERM_BUDGET)
}

/// Bound on numerators and denominators of random sample coordinates.
pub const IDENTITY_SAMPLE_BOUND: i64 = 1_000_000;

pub type RatEvaluator<'a> = dyn Fn(&[Rat]) -> Result<Rat> + 'a;

/// Randomized exact comparison of two rational expressions in `nvars` variables.
/// Points where either side hits a vanishing denominator are skipped.
pub fn identity_check(lhs: &RatEvaluator<'_>, rhs: &RatEvaluator<'_>, nvars: usize, trials: usize, seed: u64) -> Result<bool> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut valid = 0;
    for _ in 0..100 * trials {
        let pt: Vec<Rat> = (0..nvars).map(|_| random_rat(&mut rng, IDENTITY_SAMPLE_BOUND, IDENTITY_SAMPLE_BOUND)).collect();
        let (Ok(l), Ok(r)) = (lhs(&pt), rhs(&pt)) else { continue };
        if l != r {
            return Ok(false);
        }
        valid += 1;
        if valid == trials {
            return Ok(true);
        }
    }
    Err(Error::Numerical(format!("only {valid} of {trials} sample points were inside the domain")))
}
