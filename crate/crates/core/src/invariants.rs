//! The invariants F1, F2, G, H, the g-functions and the sign bookkeeping
//! that defines the sets X and X+.

use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::octagon::{is_convex_coords, CanonCoords};
use crate::scalar::{div_checked, int, rat_sqrt, rat_to_string, Field4, Rat, Scalar};

/// Order of the factors in [`factors`] and [`InvariantReport::factor_signs`].
pub const FACTOR_NAMES: [&str; 12] = [
    "1+a-b", "1+c-d", "e+b-c", "e+d-a", "1-a+b", "1-c+d", "e-b+c", "e-d+a", "g_ab+g_cd", "g*_ab+g*_cd", "ab", "cd",
];

pub fn g_ab<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    let ab = p.a.clone() * p.b.clone();
    div_checked(S::one() - p.a.square() - p.b.square(), ab, "ab")
}

pub fn g_cd<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    let cd = p.c.clone() * p.d.clone();
    div_checked(S::one() - p.c.square() - p.d.square(), cd, "cd")
}

pub fn gs_ab<S: Scalar>(p: &CanonCoords<S>) -> S {
    p.a.clone() - p.b.clone()
}

pub fn gs_cd<S: Scalar>(p: &CanonCoords<S>) -> S {
    p.c.clone() - p.d.clone()
}

/// The eight linear-in-e factors of F1 (first four) and F2 (last four), then the
/// two factors of G and the monomials ab, cd.
pub fn factors<S: Scalar>(p: &CanonCoords<S>) -> Result<[S; 12]> {
    let [a, b, c, d] = p.to_array();
    let e = p.e();
    let one = S::one;
    Ok([
        one() + a.clone() - b.clone(),
        one() + c.clone() - d.clone(),
        e.clone() + b.clone() - c.clone(),
        e.clone() + d.clone() - a.clone(),
        one() - a.clone() + b.clone(),
        one() - c.clone() + d.clone(),
        e.clone() - b.clone() + c.clone(),
        e - d.clone() + a.clone(),
        g_ab(p)? + g_cd(p)?,
        gs_ab(p) + gs_cd(p),
        a * b,
        c * d,
    ])
}

fn abcd<S: Scalar>(p: &CanonCoords<S>) -> S {
    p.a.clone() * p.b.clone() * p.c.clone() * p.d.clone()
}

pub fn f1<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    let f = factors_f(p);
    div_checked(f[0].clone() * f[1].clone() * f[2].clone() * f[3].clone(), abcd(p), "abcd")
}

pub fn f2<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    let f = factors_f(p);
    div_checked(f[4].clone() * f[5].clone() * f[6].clone() * f[7].clone(), abcd(p), "abcd")
}

fn factors_f<S: Scalar>(p: &CanonCoords<S>) -> [S; 8] {
    let [a, b, c, d] = p.to_array();
    let e = p.e();
    let one = S::one;
    [
        one() + a.clone() - b.clone(),
        one() + c.clone() - d.clone(),
        e.clone() + b.clone() - c.clone(),
        e.clone() + d.clone() - a.clone(),
        one() - a.clone() + b.clone(),
        one() - c.clone() + d.clone(),
        e.clone() - b + c,
        e - d + a,
    ]
}

/// G = F2 - F1.
pub fn big_g<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    Ok(f2(p)? - f1(p)?)
}

/// The product form 2 (g_ab + g_cd)(g*_ab + g*_cd), equal to F2 - F1.
pub fn big_g_product<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    Ok(int::<S>(2) * (g_ab(p)? + g_cd(p)?) * (gs_ab(p) + gs_cd(p)))
}

/// H = F1 / F2.
pub fn big_h<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    div_checked(f1(p)?, f2(p)?, "F2")
}

macro_rules! field {
    ($name:ident, $f:expr) => {
        pub struct $name;
        impl Field4 for $name {
            fn eval<S: Scalar>(&self, p: &CanonCoords<S>) -> Result<S> {
                $f(p)
            }
        }
    };
}

field!(F1Field, f1);
field!(F2Field, f2);
field!(GField, big_g);
field!(HField, big_h);
field!(GabField, g_ab);
field!(GcdField, g_cd);
field!(GsAbField, |p: &CanonCoords<S>| Ok(gs_ab(p)));
field!(GsCdField, |p: &CanonCoords<S>| Ok(gs_cd(p)));

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport<S> {
    pub f1: S,
    pub f2: S,
    pub g: S,
    pub h: S,
    pub e: S,
    pub factor_signs: [i8; 12],
}

/// Relative tolerance used when re-verifying `G = 2(g+g)(g*+g*)` on the float backend.
pub const REPORT_TOL: f64 = 1e-9;

pub fn invariant_report<S: Scalar>(p: &CanonCoords<S>) -> Result<InvariantReport<S>> {
    if abcd(p).is_vanishing() {
        return Err(Error::Domain("abcd".into()));
    }
    let v1 = f1(p)?;
    let v2 = f2(p)?;
    let g = v2.clone() - v1.clone();
    let product = big_g_product(p)?;
    let scale = 1.0 + g.to_f64().abs();
    if !(g.clone() - product).is_zero_within(REPORT_TOL * scale) {
        return Err(Error::Numerical("F2 - F1 disagrees with 2(g_ab+g_cd)(g*_ab+g*_cd)".into()));
    }
    let h = div_checked(v1.clone(), v2.clone(), "F2")?;
    let factor_signs = factors(p)?.map(|f| f.sign());
    Ok(InvariantReport { f1: v1, f2: v2, g, h, e: p.e(), factor_signs })
}

impl InvariantReport<Rat> {
    pub fn to_json(&self) -> Value {
        json!({
            "F1": rat_to_string(&self.f1),
            "F2": rat_to_string(&self.f2),
            "G": rat_to_string(&self.g),
            "H": rat_to_string(&self.h),
            "e": rat_to_string(&self.e),
            "factor_signs": self.factor_signs.to_vec(),
            "factor_names": FACTOR_NAMES.to_vec(),
        })
    }
}

impl InvariantReport<f64> {
    pub fn to_json(&self) -> Value {
        json!({
            "F1": self.f1, "F2": self.f2, "G": self.g, "H": self.h, "e": self.e,
            "factor_signs": self.factor_signs.to_vec(),
            "factor_names": FACTOR_NAMES.to_vec(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Membership {
    pub in_x: bool,
    pub in_x_plus: bool,
    /// (sign(g_ab+g_cd), sign(g*_ab+g*_cd)) for convex points with both nonzero.
    pub component: Option<(i8, i8)>,
}

pub fn membership<S: Scalar>(p: &CanonCoords<S>) -> Result<Membership> {
    if abcd(p).is_vanishing() {
        return Err(Error::Domain("abcd".into()));
    }
    let signs = factors(p)?.map(|f| f.sign());
    let in_x = signs.iter().all(|&s| s != 0);
    let in_x_plus = signs.iter().all(|&s| s > 0);
    let component = if is_convex_coords(p) && signs[8] != 0 && signs[9] != 0 { Some((signs[8], signs[9])) } else { None };
    Ok(Membership { in_x, in_x_plus, component })
}

/// Y(F1,F2) = 512 + 216 F1F2 + 192(F1+F2) - 30(F1+F2)^2 + (F1+F2)^3.
pub fn y_polynomial<S: Scalar>(f1: &S, f2: &S) -> S {
    let s = f1.clone() + f2.clone();
    int::<S>(512) + int::<S>(216) * f1.clone() * f2.clone() + int::<S>(192) * s.clone() - int::<S>(30) * s.square()
        + s.square() * s
}

/// Float tolerance for the two defining equations of the set Y.
pub const Y_SET_TOL: f64 = 1e-10;

pub fn in_y_set<S: Scalar>(p: &CanonCoords<S>) -> bool {
    let [a, b, c, d] = p.to_array();
    let first = p.e() + S::one();
    let second = a.clone() * c.clone() * (a + c) + b.clone() * d.clone() * (b + d);
    first.is_zero_within(Y_SET_TOL) && second.is_zero_within(Y_SET_TOL)
}

/// Points of Y over the given (a, c): bd = -(1+ac), b+d = ac(a+c)/(1+ac).
/// Returns both orderings of the roots when the discriminant is a rational square.
pub fn y_set_points_exact(a: &Rat, c: &Rat) -> Vec<CanonCoords<Rat>> {
    let one = Rat::from_integer(BigInt::from(1));
    let k = &one + a * c;
    if k == Rat::from_integer(BigInt::from(0)) {
        return Vec::new();
    }
    let prod = -k.clone();
    let sum = a * c * (a + c) / k;
    let disc = &sum * &sum - Rat::from_integer(BigInt::from(4)) * &prod;
    let Some(r) = rat_sqrt(&disc) else { return Vec::new() };
    let two = Rat::from_integer(BigInt::from(2));
    let t1 = (&sum + &r) / &two;
    let t2 = (&sum - &r) / &two;
    vec![
        CanonCoords::new(a.clone(), t1.clone(), c.clone(), t2.clone()),
        CanonCoords::new(a.clone(), t2, c.clone(), t1),
    ]
}

pub fn y_set_points_f64(a: f64, c: f64) -> Vec<CanonCoords<f64>> {
    let k = 1.0 + a * c;
    if k.abs() < 1e-14 {
        return Vec::new();
    }
    let prod = -k;
    let sum = a * c * (a + c) / k;
    let disc = sum * sum - 4.0 * prod;
    if disc < 0.0 {
        return Vec::new();
    }
    let r = disc.sqrt();
    let (t1, t2) = ((sum + r) / 2.0, (sum - r) / 2.0);
    vec![CanonCoords::new(a, t1, c, t2), CanonCoords::new(a, t2, c, t1)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{map_a, map_delta, map_i, map_j, t3};
    use crate::octagon::convex_constraints;
    use crate::scalar::{random_rat_in, rat};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(a: i64, b: i64) -> Rat {
        rat(a, b)
    }

    fn arb_point() -> impl Strategy<Value = CanonCoords<Rat>> {
        let r = || (-300i64..300, 1i64..100).prop_map(|(n, d)| rat(n, d));
        (r(), r(), r(), r()).prop_map(|(a, b, c, d)| CanonCoords::new(a, b, c, d))
    }

    #[test]
    fn report_example() {
        let r = invariant_report(&CanonCoords::new(q(1, 2), q(1, 4), q(1, 2), q(1, 4))).unwrap();
        assert_eq!(r.f1, q(25, 64));
        assert_eq!(r.f2, q(729, 64));
        assert_eq!(r.g, q(11, 1));
        assert_eq!(r.e, q(5, 16));
    }

    #[test]
    fn regular_octagon_values() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = invariant_report(&CanonCoords::splat(s)).unwrap();
        assert!((r.f1 - 4.0).abs() < 1e-12 && (r.f2 - 4.0).abs() < 1e-12 && r.g.abs() < 1e-12);
        assert!(!membership(&CanonCoords::splat(s)).unwrap().in_x);
    }

    #[test]
    fn y_polynomial_examples() {
        assert_eq!(y_polynomial(&q(3, 1), &q(4, 1)), q(3321, 1));
        assert_eq!(y_polynomial(&q(0, 1), &q(-2, 1)), q(0, 1));
        for i in 1..=40 {
            for j in 1..=40 {
                assert!(y_polynomial(&(i as f64 * 2.5), &(j as f64 * 2.5)) > 0.0);
            }
        }
    }

    #[test]
    fn y_set_example() {
        let p = CanonCoords::new(q(1, 1), q(1, 2), q(-1, 2), q(-1, 1));
        assert!(in_y_set(&p));
        assert!(!in_y_set(&CanonCoords::splat(std::f64::consts::FRAC_1_SQRT_2)));
        let r = invariant_report(&p).unwrap();
        assert_eq!((r.f1.clone(), r.f2.clone()), (q(0, 1), q(-2, 1)));
        assert_eq!(y_polynomial(&r.f1, &r.f2), q(0, 1));
        assert!(y_set_points_exact(&q(1, 1), &q(-1, 2)).contains(&p));
    }

    #[test]
    fn constructed_y_points_satisfy_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut exact = 0;
        for _ in 0..400 {
            let a = random_rat_in(&mut rng, &q(-3, 1), &q(3, 1), 6);
            let c = random_rat_in(&mut rng, &q(-3, 1), &q(3, 1), 6);
            for p in y_set_points_exact(&a, &c) {
                if let Ok(r) = invariant_report(&p) {
                    assert!(in_y_set(&p));
                    assert_eq!(y_polynomial(&r.f1, &r.f2), q(0, 1));
                    exact += 1;
                }
            }
            let (af, cf) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            for p in y_set_points_f64(af, cf) {
                if let Ok(r) = invariant_report(&p) {
                    let scale = 1.0 + (r.f1.abs() + r.f2.abs()).powi(3);
                    assert!(y_polynomial(&r.f1, &r.f2).abs() / scale < 1e-9);
                }
            }
        }
        assert!(exact > 0);
    }

    #[test]
    fn membership_component_example() {
        let m = membership(&CanonCoords::new(0.9, 0.8, 0.9, 0.8)).unwrap();
        assert_eq!(m.component, Some((-1, 1)));
    }

    #[test]
    fn positivity_and_chart_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = 0;
        while seen < 1000 {
            let p = CanonCoords::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
            if convex_constraints(&p) {
                let f = factors(&p).unwrap();
                assert!(f[..8].iter().all(|x| *x > 0.0));
                seen += 1;
            }
        }
        let mut seen = 0;
        while seen < 1000 {
            let p = CanonCoords::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
            if is_convex_coords(&p) {
                for v in [g_ab(&p).unwrap(), g_cd(&p).unwrap(), gs_ab(&p), gs_cd(&p)] {
                    assert!(v > -2.0 && v < 2.0);
                }
                seen += 1;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn invariance_and_symmetries(p in arb_point()) {
            let Ok(v1) = f1(&p) else { return Ok(()) };
            let v2 = f2(&p).unwrap();
            prop_assert_eq!(f1(&map_a(&p)).unwrap(), v1.clone());
            prop_assert_eq!(f2(&map_a(&p)).unwrap(), v2.clone());
            if let Ok(d) = map_delta(&p) {
                if let (Ok(d1), Ok(d2)) = (f1(&d), f2(&d)) {
                    prop_assert_eq!(d1, v1.clone());
                    prop_assert_eq!(d2, v2.clone());
                }
            }
            prop_assert_eq!(f1(&map_i(&p)).unwrap(), v1.clone());
            prop_assert_eq!(f2(&map_i(&p)).unwrap(), v2.clone());
            prop_assert_eq!(f1(&map_j(&p)).unwrap(), v2.clone());
            if let Ok(r) = invariant_report(&p) {
                prop_assert_eq!(r.g.clone(), big_g_product(&p).unwrap());
                if let Ok(t) = t3(&p) {
                    if let Ok(rt) = invariant_report(&t) {
                        prop_assert_eq!((rt.f1, rt.f2, rt.g), (r.f1, r.f2, r.g));
                    }
                }
            }
        }
    }
}
