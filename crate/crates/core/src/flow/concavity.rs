//! Second-order behaviour of the level sets along U_ab and the reversing
//! involutions iota_3, iota_5.

use crate::error::{Error, Result};
use crate::hamiltonian::{x1, x2, x_g, TangentVec};
use crate::maps::{apply_word, GenWord};
use crate::octagon::CanonCoords;
use crate::scalar::{int, jacobian, mat_vec, seed_direction, Scalar};

fn on_u_ab<S: Scalar>(p: &CanonCoords<S>) -> Result<()> {
    let on = (p.a.clone() + p.b.clone() - S::one()).is_zero_within(1e-12);
    let inside = p.a.sign() > 0
        && p.b.sign() > 0
        && p.c.sign() > 0
        && p.d.sign() > 0
        && (S::one() - p.c.clone() - p.d.clone()).sign() > 0;
    if on && inside {
        Ok(())
    } else {
        Err(Error::Invalid("point is not of the form (a, 1-a, c, d) with c, d > 0, c + d < 1".into()))
    }
}

/// (alpha1, alpha2) = (1 + c - d, 1 - c + d), taken at `p` and then held fixed.
fn alphas<S: Scalar>(p: &CanonCoords<S>) -> (S, S) {
    let delta = p.c.clone() - p.d.clone();
    (S::one() + delta.clone(), S::one() - delta)
}

fn combo<S: Scalar>(p: &CanonCoords<S>, al: &(S, S)) -> Result<TangentVec<S>> {
    let (u, v) = (x1(p)?, x2(p)?);
    Ok(std::array::from_fn(|i| al.0.clone() * u[i].clone() + al.1.clone() * v[i].clone()))
}

/// psi = Y . grad(a + b), which vanishes along U_ab.
pub fn tangency_psi<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    let y = combo(p, &alphas(p))?;
    Ok(y[0].clone() + y[1].clone())
}

/// Y . grad(psi) by nested dual numbers, with alpha frozen at `p`.
pub fn q_direct<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    let al = alphas(p);
    let y = combo(p, &al)?;
    let lifted = seed_direction(p, &y);
    let al_lift = (crate::scalar::Dual4::constant(al.0), crate::scalar::Dual4::constant(al.1));
    let yy = combo(&lifted, &al_lift)?;
    let psi = yy[0].clone() + yy[1].clone();
    Ok(psi.partials[0].clone())
}

/// 8a(1-a)(1+c-d)^2(1-c+d)^2(c+d-1)(c+d-(c-d)^2) / (c^2 d^2).
pub fn q_closed_form<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    let (a, c, d) = (p.a.clone(), p.c.clone(), p.d.clone());
    let one = S::one;
    let s = c.clone() + d.clone();
    let m = c.clone() - d.clone();
    let num = int::<S>(8)
        * a.clone()
        * (one() - a)
        * (one() + m.clone()).square()
        * (one() - m.clone()).square()
        * (s.clone() - one())
        * (s - m.square());
    crate::scalar::div_checked(num, c.square() * d.square(), "cd")
}

/// (closed form, direct) for a point on U_ab.
pub fn concavity_q<S: Scalar>(p: &CanonCoords<S>) -> Result<(S, S)> {
    on_u_ab(p)?;
    Ok((q_closed_form(p)?, q_direct(p)?))
}

#[derive(Clone, Debug)]
pub struct ReversalImages<S> {
    pub i5_image: CanonCoords<S>,
    pub i3_image: CanonCoords<S>,
    /// d iota_5 (X_G).
    pub v: TangentVec<S>,
    /// d iota_3 (X_G).
    pub w: TangentVec<S>,
    /// (0, beta, beta, 0) with beta = (1-(c+d)) / ((c+d) - (c-d)^2); only on U_ab.
    pub i5_closed: Option<CanonCoords<S>>,
    /// Closed-form V1 on U_ab.
    pub v1_closed: Option<S>,
    /// 4c(2-c)/(1+c-d) on U_ab.
    pub w4_closed: Option<S>,
}

impl<S: Scalar> ReversalImages<S> {
    pub fn i5_matches(&self) -> Option<bool> {
        self.i5_closed.as_ref().map(|q| q.to_array().iter().zip(self.i5_image.to_array()).all(|(x, y)| (x.clone() - y).is_vanishing()))
    }

    pub fn v1_equals_v4(&self) -> bool {
        (self.v[0].clone() - self.v[3].clone()).is_vanishing()
    }

    pub fn v1_matches(&self) -> Option<bool> {
        self.v1_closed.as_ref().map(|x| (x.clone() - self.v[0].clone()).is_vanishing())
    }

    pub fn w4_matches(&self) -> Option<bool> {
        self.w4_closed.as_ref().map(|x| (x.clone() - self.w[3].clone()).is_vanishing())
    }

    /// iota_3 of a U_ab point ends in (1, 0).
    pub fn i3_tail_ok(&self) -> bool {
        (self.i3_image.c.clone() - S::one()).is_vanishing() && self.i3_image.d.is_vanishing()
    }
}

/// Push X_G through iota_5 and iota_3 with exact Jacobians; closed forms
/// are attached when `p` lies on U_ab.
pub fn reversal_images<S: Scalar>(p: &CanonCoords<S>) -> Result<ReversalImages<S>> {
    let xg = x_g(p)?;
    let (i5_image, j5) = jacobian(|q| apply_word(&GenWord::iota5(), q), p)?;
    let (i3_image, j3) = jacobian(|q| apply_word(&GenWord::iota3(), q), p)?;
    let v = mat_vec(&j5, &xg);
    let w = mat_vec(&j3, &xg);
    let (mut i5_closed, mut v1_closed, mut w4_closed) = (None, None, None);
    if on_u_ab(p).is_ok() {
        let (c, d) = (p.c.clone(), p.d.clone());
        let s = c.clone() + d.clone();
        let m = c.clone() - d.clone();
        let beta = crate::scalar::div_checked(S::one() - s.clone(), s.clone() - m.clone().square(), "beta")?;
        i5_closed = Some(CanonCoords::new(S::zero(), beta.clone(), beta, S::zero()));
        let two = int::<S>(2);
        let quad = S::one() - two.clone() * c.clone() + c.clone().square() - two.clone() * d.clone()
            - two.clone() * c.clone() * d.clone()
            + d.clone().square();
        let v1 = two * c.clone() * (c.clone() - int::<S>(2)) * quad;
        let den = (S::one() + m.clone()) * (m.square() - s);
        v1_closed = Some(crate::scalar::div_checked(v1, den, "V1")?);
        w4_closed = Some(crate::scalar::div_checked(
            int::<S>(4) * c.clone() * (int::<S>(2) - c),
            S::one() + p.c.clone() - d,
            "1+c-d",
        )?);
    }
    Ok(ReversalImages { i5_image, i3_image, v, w, i5_closed, v1_closed, w4_closed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};

    fn u_point(a: Rat, c: Rat, d: Rat) -> CanonCoords<Rat> {
        CanonCoords::new(a.clone(), Rat::from_i64(1) - a, c, d)
    }

    #[test]
    fn q_forms_agree_and_are_negative() {
        let p = u_point(rat(1, 2), rat(1, 4), rat(1, 4));
        let (closed, direct) = concavity_q(&p).unwrap();
        assert_eq!(closed, direct);
        assert!(closed.sign() < 0);
        assert_eq!(tangency_psi(&p).unwrap(), Rat::from_i64(0));
    }

    #[test]
    fn q_rejects_points_off_u() {
        assert!(concavity_q(&CanonCoords::new(rat(1, 2), rat(1, 3), rat(1, 4), rat(1, 4))).is_err());
    }

    #[test]
    fn iota5_hits_the_beta_point() {
        let r = reversal_images(&u_point(rat(1, 2), rat(1, 4), rat(1, 4))).unwrap();
        assert_eq!(r.i5_image, CanonCoords::new(rat(0, 1), rat(1, 1), rat(1, 1), rat(0, 1)));
        assert_eq!(r.i5_matches(), Some(true));
        assert!(r.i3_tail_ok());
    }

    #[test]
    fn pushforward_values() {
        // Frozen from an independent symbolic computation.
        let r = reversal_images(&u_point(rat(3, 10), rat(1, 5), rat(1, 3))).unwrap();
        assert_eq!(r.v, [rat(-187, 290), rat(-217379, 25230), rat(137059, 25230), rat(-143, 174)]);
        assert_eq!(r.w, [rat(32878, 4875), rat(-2822, 195), rat(2074, 75), rat(68, 5)]);
        assert_eq!(r.i5_image, CanonCoords::new(rat(0, 1), rat(105, 116), rat(105, 116), rat(0, 1)));
        assert_eq!(r.v1_closed, Some(rat(-297, 3770)));
        assert_eq!(r.w4_closed, Some(rat(108, 65)));
    }
}
