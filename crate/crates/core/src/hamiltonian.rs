//! The invariant symplectic form, Hamiltonian fields and the witnesses
//! used to show that X1 and X2 are independent away from the set Y.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::invariants::{g_ab, g_cd, gs_ab, gs_cd, membership, F1Field, F2Field, GabField, GcdField, GsAbField, GsCdField};
use crate::maps::{apply_word, GenWord};
use crate::octagon::CanonCoords;
use crate::polynomial::{eliminate, MPoly};
use crate::scalar::{div_checked, dot, gradient, int, jacobian, mat_vec, random_rat, rat, Field4, Rat, Scalar};

pub type TangentVec<S> = [S; 4];

/// (u1 v2 - u2 v1)/(ab) + (u3 v4 - u4 v3)/(cd).
pub fn omega<S: Scalar>(p: &CanonCoords<S>, u: &TangentVec<S>, v: &TangentVec<S>) -> Result<S> {
    let ab = p.a.clone() * p.b.clone();
    let cd = p.c.clone() * p.d.clone();
    let first = u[0].clone() * v[1].clone() - u[1].clone() * v[0].clone();
    let second = u[2].clone() * v[3].clone() - u[3].clone() * v[2].clone();
    Ok(div_checked(first, ab, "ab")? + div_checked(second, cd, "cd")?)
}

/// (-ab f_b, ab f_a, -cd f_d, cd f_c). With this sign convention
/// `omega(p, v, X_f) = grad f . v`.
pub fn hamiltonian_field<S: Scalar, F: Field4 + ?Sized>(f: &F, p: &CanonCoords<S>) -> Result<TangentVec<S>> {
    let (_, g) = gradient(f, p)?;
    let ab = p.a.clone() * p.b.clone();
    let cd = p.c.clone() * p.d.clone();
    let [fa, fb, fc, fd] = g;
    Ok([-(ab.clone() * fb), ab * fa, -(cd.clone() * fd), cd * fc])
}

pub fn x1<S: Scalar>(p: &CanonCoords<S>) -> Result<TangentVec<S>> {
    hamiltonian_field(&F1Field, p)
}

pub fn x2<S: Scalar>(p: &CanonCoords<S>) -> Result<TangentVec<S>> {
    hamiltonian_field(&F2Field, p)
}

/// X_G = X2 - X1.
pub fn x_g<S: Scalar>(p: &CanonCoords<S>) -> Result<TangentVec<S>> {
    let u = x1(p)?;
    let v = x2(p)?;
    Ok(std::array::from_fn(|i| v[i].clone() - u[i].clone()))
}

pub fn poisson_bracket<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    omega(p, &x1(p)?, &x2(p)?)
}

pub type FormFn<'a> = dyn Fn(&CanonCoords<Rat>, &TangentVec<Rat>, &TangentVec<Rat>) -> Result<Rat> + 'a;

fn random_vec(rng: &mut ChaCha8Rng) -> TangentVec<Rat> {
    std::array::from_fn(|_| random_rat(rng, 40, 12))
}

/// Checks `form(w(p); J u, J v) = sign * form(p; u, v)` at random exact points,
/// with `J` the exact Jacobian of the word.
pub fn pullback_check_form(w: &GenWord, sign: i64, trials: usize, seed: u64, form: &FormFn<'_>) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut valid = 0;
    for _ in 0..100 * trials.max(1) {
        let p = CanonCoords::from_array(std::array::from_fn(|_| random_rat(&mut rng, 30, 10)));
        let Ok((img, jac)) = jacobian(|q| apply_word(w, q), &p) else { continue };
        let (u, v) = (random_vec(&mut rng), random_vec(&mut rng));
        let (Ok(lhs), Ok(rhs)) = (form(&img, &mat_vec(&jac, &u), &mat_vec(&jac, &v)), form(&p, &u, &v)) else { continue };
        if lhs != rat(sign, 1) * rhs {
            return Ok(false);
        }
        valid += 1;
        if valid == trials {
            return Ok(true);
        }
    }
    Err(Error::Numerical(format!("word {w} was undefined at too many sample points")))
}

pub fn pullback_check(w: &GenWord, sign: i64, trials: usize, seed: u64) -> Result<bool> {
    pullback_check_form(w, sign, trials, seed, &|p, u, v| omega(p, u, v))
}

/// mu = (alpha, -alpha, -beta, beta); orthogonal to X_G.
pub fn mu_vector<S: Scalar>(p: &CanonCoords<S>) -> Result<TangentVec<S>> {
    let [a, b, c, d] = p.to_array();
    let one = S::one;
    let alpha = div_checked(
        int::<S>(4) * a.clone() * b.clone() * (c.clone() + d.clone()),
        (a.clone() - b.clone() + one()) * (-a.clone() + b.clone() + one()),
        "(a-b+1)(-a+b+1)",
    )?;
    let beta = div_checked(
        int::<S>(4) * c.clone() * d.clone() * (a + b),
        (c.clone() - d.clone() + one()) * (-c + d + one()),
        "(c-d+1)(-c+d+1)",
    )?;
    Ok([alpha.clone(), -alpha, -beta.clone(), beta])
}

pub const VARS: [&str; 4] = ["a", "b", "c", "d"];
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn sym(name: &str) -> MPoly {
    MPoly::var(name)
}

fn konst(n: i64) -> MPoly {
    MPoly::constant(rat(n, 1))
}

/// F1 and F2 as Laurent polynomials.
pub fn symbolic_invariants() -> (MPoly, MPoly) {
    let (a, b, c, d) = (sym("a"), sym("b"), sym("c"), sym("d"));
    let e = a.mul(&c).add(&b.mul(&d));
    let one = konst(1);
    let inv = MPoly::monomial(rat(1, 1), &[("a", -1), ("b", -1), ("c", -1), ("d", -1)]);
    let f1 = one.add(&a).sub(&b).mul(&one.add(&c).sub(&d)).mul(&e.add(&b).sub(&c)).mul(&e.add(&d).sub(&a)).mul(&inv);
    let f2 = one.sub(&a).add(&b).mul(&one.sub(&c).add(&d)).mul(&e.sub(&b).add(&c)).mul(&e.sub(&d).add(&a)).mul(&inv);
    (f1, f2)
}

pub fn symbolic_field(phi: &MPoly) -> [MPoly; 4] {
    let ab = sym("a").mul(&sym("b"));
    let cd = sym("c").mul(&sym("d"));
    [
        ab.mul(&phi.derivative("b")).neg(),
        ab.mul(&phi.derivative("a")),
        cd.mul(&phi.derivative("d")).neg(),
        cd.mul(&phi.derivative("c")),
    ]
}

/// The linear factors 1 +- (a-b), 1 +- (c-d); they are factors of F1, F2 and never vanish on X.
pub fn known_linear_factors() -> [MPoly; 4] {
    let one = konst(1);
    let ab = sym("a").sub(&sym("b"));
    let cd = sym("c").sub(&sym("d"));
    [one.add(&ab), one.sub(&ab), one.add(&cd), one.sub(&cd)]
}

fn strip_known(p: &MPoly) -> MPoly {
    known_linear_factors().iter().fold(p.clear_monomials(), |acc, f| acc.strip_factor(f).0)
}

#[derive(Clone, Debug)]
pub struct WitnessPolys {
    /// The 2-forms du^dv(X1,X2) as Laurent polynomials, in `PAIRS` order.
    pub two_forms: Vec<MPoly>,
    /// Numerators: monomial denominators cleared.
    pub f: Vec<MPoly>,
    /// Numerators with the nonvanishing linear factors also divided out.
    pub f_reduced: Vec<MPoly>,
    pub g: MPoly,
    pub g_reduced: MPoly,
}

fn build_witnesses() -> WitnessPolys {
    let (f1, f2) = symbolic_invariants();
    let x1 = symbolic_field(&f1);
    let x2 = symbolic_field(&f2);
    let two_forms: Vec<MPoly> = PAIRS.iter().map(|&(u, v)| x1[u].mul(&x2[v]).sub(&x1[v].mul(&x2[u]))).collect();
    let f: Vec<MPoly> = two_forms.iter().map(MPoly::clear_monomials).collect();
    let f_reduced = f.iter().map(strip_known).collect();
    let [pab, mab, pcd, mcd] = known_linear_factors();
    let (a, b, c, d) = (sym("a"), sym("b"), sym("c"), sym("d"));
    let alpha_num = konst(4).mul(&a).mul(&b).mul(&c.add(&d));
    let beta_num = konst(4).mul(&c).mul(&d).mul(&a.add(&b));
    let alpha_den = pab.mul(&mab);
    let beta_den = pcd.mul(&mcd);
    // X1 . mu over the common denominator alpha_den * beta_den.
    let g_full = x1[0]
        .sub(&x1[1])
        .mul(&alpha_num)
        .mul(&beta_den)
        .add(&x1[3].sub(&x1[2]).mul(&beta_num).mul(&alpha_den));
    let g = g_full.clear_monomials();
    let g_reduced = strip_known(&g);
    WitnessPolys { two_forms, f, f_reduced, g, g_reduced }
}

pub fn witness_polys() -> &'static WitnessPolys {
    static CELL: OnceLock<WitnessPolys> = OnceLock::new();
    CELL.get_or_init(build_witnesses)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DependenceWitnesses<S> {
    /// (pair label, f_uv value) in `PAIRS` order.
    pub f: Vec<(String, S)>,
    pub g: S,
}

impl<S: Scalar> DependenceWitnesses<S> {
    pub fn all_f_vanish(&self) -> bool {
        self.f.iter().all(|(_, v)| v.is_vanishing())
    }
}

fn lookup<S: Scalar>(p: &CanonCoords<S>) -> impl Fn(&str) -> Option<S> + '_ {
    move |v| match v {
        "a" => Some(p.a.clone()),
        "b" => Some(p.b.clone()),
        "c" => Some(p.c.clone()),
        "d" => Some(p.d.clone()),
        _ => None,
    }
}

/// Values of the numerator polynomials f_uv and g at `p`.
pub fn dependence_witnesses<S: Scalar>(p: &CanonCoords<S>) -> Result<DependenceWitnesses<S>> {
    mu_vector(p)?;
    let w = witness_polys();
    let f = PAIRS
        .iter()
        .zip(&w.f)
        .map(|(&(u, v), poly)| Ok((format!("f_{}{}", VARS[u], VARS[v]), poly.eval_with(lookup(p))?)))
        .collect::<Result<_>>()?;
    Ok(DependenceWitnesses { f, g: w.g.eval_with(lookup(p))? })
}

/// (b^2-1)(b-c)(b-d)(c+d)^2 phi1 phi2^2 phi3^2 phi4, the stated form of res(f_ab, g, a).
pub fn h_a_factored<S: Scalar>(p: &CanonCoords<S>) -> S {
    let [_, b, c, d] = p.to_array();
    let one = S::one;
    let phi1 = b.clone() * c.clone() - c.square() + b.clone() * d.clone() + c.clone() * d.clone();
    let phi2 = |b: S, c: S, d: S| b.clone() - c.clone() + b.clone() * c.clone() - c.square() - b * d.clone() - c * d;
    let phi4 = one() - c.square() + int::<S>(2) * b.clone() * d.clone() + b.square() * c.clone() * d.clone()
        - b.clone() * c.square() * d.clone()
        + b.square() * d.square()
        + b.clone() * c.clone() * d.square();
    let p2 = phi2(b.clone(), c.clone(), d.clone());
    let p3 = phi2(-b.clone(), -c.clone(), -d.clone());
    (b.clone() - one()) * (b.clone() + one()) * (b.clone() - c.clone()) * (b - d.clone()) * (c + d).square()
        * phi1
        * p2.square()
        * p3.square()
        * phi4
}

#[derive(Clone, Debug)]
pub struct Elimination {
    /// The resultant after removing its monomial content.
    pub poly: MPoly,
    /// The monomial content that was removed.
    pub monomial: Vec<(String, i32)>,
}

/// h_e = res(f_ab, g, e) computed symbolically from the reduced witnesses.
pub fn h_e(var: &str) -> Result<Elimination> {
    let w = witness_polys();
    let r = eliminate(&w.f_reduced[0], &w.g_reduced, var)?;
    Ok(Elimination { monomial: r.monomial_content(), poly: r.clear_monomials() })
}

pub fn h_a() -> &'static Elimination {
    static CELL: OnceLock<Elimination> = OnceLock::new();
    CELL.get_or_init(|| h_e("a").expect("resultant in a"))
}

/// Ratios h_a / stated product at the given points; proportionality means all are equal.
pub fn h_a_ratios(points: &[CanonCoords<Rat>]) -> Result<Vec<Rat>> {
    let h = h_a();
    points
        .iter()
        .map(|p| {
            let v = h.poly.eval_with(lookup(p))?;
            div_checked(v, h_a_factored(p), "stated h_a")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MirReport {
    pub mir1: bool,
    pub mir2: bool,
    pub mir11: bool,
    pub mir22: bool,
    pub mir3: bool,
}

impl MirReport {
    pub fn all(&self) -> bool {
        self.mir1 && self.mir2 && self.mir11 && self.mir22 && self.mir3
    }
}

/// The five directional derivatives of the g-functions and of log(ac/bd) along X_G,
/// each paired with its closed form.
pub fn mir_values<S: Scalar>(p: &CanonCoords<S>) -> Result<[(S, S); 5]> {
    let xg = x_g(p)?;
    let [a, b, c, d] = p.to_array();
    let one = S::one;
    let ab = a.clone() * b.clone();
    let cd = c.clone() * d.clone();
    let star = gs_ab(p) + gs_cd(p);
    let plain = g_ab(p)? + g_cd(p)?;
    let block_ab = div_checked((one() - a.clone() + b.clone()) * (one() + a.clone() - b.clone()) * (a.clone() + b.clone()), ab.clone(), "ab")?;
    let block_cd = div_checked((one() - c.clone() + d.clone()) * (one() + c.clone() - d.clone()) * (c.clone() + d.clone()), cd.clone(), "cd")?;
    let two = || int::<S>(2);
    let lhs_gs_ab = dot(&xg, &gradient(&GsAbField, p)?.1);
    let lhs_gs_cd = dot(&xg, &gradient(&GsCdField, p)?.1);
    let lhs_g_ab = dot(&xg, &gradient(&GabField, p)?.1);
    let lhs_g_cd = dot(&xg, &gradient(&GcdField, p)?.1);
    let grad_h = [
        div_checked(one(), a.clone(), "a")?,
        div_checked(-one(), b.clone(), "b")?,
        div_checked(one(), c.clone(), "c")?,
        div_checked(-one(), d.clone(), "d")?,
    ];
    let lhs_h = dot(&xg, &grad_h);
    let rhs_h = two()
        * star.clone()
        * (div_checked(one() + a.square() + b.square(), ab, "ab")? + div_checked(one() + c.square() + d.square(), cd, "cd")?);
    Ok([
        (lhs_gs_ab, two() * star.clone() * block_ab.clone()),
        (lhs_gs_cd, two() * star * block_cd.clone()),
        (lhs_g_ab, -(two() * plain.clone() * block_ab)),
        (lhs_g_cd, -(two() * plain * block_cd)),
        (lhs_h, rhs_h),
    ])
}

/// Exact check of the five identities at `trials` random points of X.
pub fn mir_identities_check(trials: usize, seed: u64) -> Result<MirReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ok = [true; 5];
    let mut valid = 0;
    for _ in 0..100 * trials.max(1) {
        let p = CanonCoords::from_array(std::array::from_fn(|_| random_rat(&mut rng, 40, 12)));
        if !membership(&p).map(|m| m.in_x).unwrap_or(false) {
            continue;
        }
        let Ok(vals) = mir_values(&p) else { continue };
        for (i, (l, r)) in vals.iter().enumerate() {
            ok[i] &= l == r;
        }
        valid += 1;
        if valid == trials {
            return Ok(MirReport { mir1: ok[0], mir2: ok[1], mir11: ok[2], mir22: ok[3], mir3: ok[4] });
        }
    }
    Err(Error::Numerical("too few sample points in X".into()))
}
