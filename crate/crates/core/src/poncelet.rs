//! The circumscribed locus, foliated by planes Pi_k, and the dynamics of
//! T3^4 on the level curves L(k, l) of h inside each plane.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::maps::{apply_word, t3, t3_inv, GenWord};
use crate::octagon::{defects, is_convex_coords, normalize, star_reorder, vertices_from_coords, CanonCoords};
use crate::scalar::{div_checked, int, Dual4, QuadRat, Rat, Scalar};

/// Tolerance for "circumscribed" on float input.
pub const CIRC_TOL: f64 = 1e-12;

/// (k, x, y) in the plane Pi_k.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanePoint<S> {
    pub k: S,
    pub x: S,
    pub y: S,
}

impl<S: Scalar> PlanePoint<S> {
    pub fn new(k: S, x: S, y: S) -> Self {
        PlanePoint { k, x, y }
    }
}

/// (x + k, x - k, y - k, y + k).
pub fn plane_embed<S: Scalar>(q: &PlanePoint<S>) -> CanonCoords<S> {
    let PlanePoint { k, x, y } = q.clone();
    CanonCoords::new(x.clone() + k.clone(), x - k.clone(), y.clone() - k.clone(), y + k)
}

pub fn plane_project<S: Scalar>(p: &CanonCoords<S>) -> Result<PlanePoint<S>> {
    let circ = p.a.clone() - p.b.clone() + p.c.clone() - p.d.clone();
    if !circ.is_zero_within(CIRC_TOL) {
        return Err(Error::Invalid("point is not circumscribed".into()));
    }
    let two = int::<S>(2);
    Ok(PlanePoint {
        k: (p.a.clone() - p.b.clone()) / two.clone(),
        x: (p.a.clone() + p.b.clone()) / two.clone(),
        y: (p.c.clone() + p.d.clone()) / two,
    })
}

/// h = (4k^3 - x + y - 4kxy) / ((k - x)(k + y)).
pub fn h_level<S: Scalar>(q: &PlanePoint<S>) -> Result<S> {
    let PlanePoint { k, x, y } = q.clone();
    let four = int::<S>(4);
    let num = four.clone() * k.clone() * k.clone() * k.clone() - x.clone() + y.clone() - four * k.clone() * x.clone() * y.clone();
    div_checked(num, (k.clone() - x) * (k + y), "(k-x)(k+y)")
}

/// h of a circumscribed point.
pub fn h_of<S: Scalar>(p: &CanonCoords<S>) -> Result<S> {
    h_level(&plane_project(p)?)
}

/// psi = h(a,b,c,d) + i h(b,a,d,c), as (re, im).
pub fn psi<S: Scalar>(p: &CanonCoords<S>) -> Result<(S, S)> {
    let swapped = CanonCoords::new(p.b.clone(), p.a.clone(), p.d.clone(), p.c.clone());
    Ok((h_of(p)?, h_of(&swapped)?))
}

/// (l - 4k)xy - (1 - kl)x + (1 - kl)y + (4k^3 - k^2 l), zero exactly on L(k, l).
pub fn level_relation<S: Scalar>(k: &S, ell: &S, x: &S, y: &S) -> S {
    let four = int::<S>(4);
    let one_kl = S::one() - k.clone() * ell.clone();
    (ell.clone() - four.clone() * k.clone()) * x.clone() * y.clone() - one_kl.clone() * x.clone()
        + one_kl * y.clone()
        + (four * k.clone() * k.clone() * k.clone() - k.clone() * k.clone() * ell.clone())
}

/// y on L(k, l) as a function of x.
pub fn level_y<S: Scalar>(k: &S, ell: &S, x: &S) -> Result<S> {
    let one_kl = S::one() - k.clone() * ell.clone();
    let four = int::<S>(4);
    let num = one_kl.clone() * x.clone() - (four.clone() * k.clone() * k.clone() * k.clone() - k.clone() * k.clone() * ell.clone());
    let den = (ell.clone() - four * k.clone()) * x.clone() + one_kl;
    div_checked(num, den, "level curve denominator")
}

#[derive(Clone, Debug, PartialEq)]
pub struct LftLevel {
    pub k: Rat,
    pub ell: Rat,
}

impl LftLevel {
    pub fn new(k: Rat, ell: Rat) -> Self {
        LftLevel { k, ell }
    }

    /// |k| < 1/2 and |l| < 2: the levels that contain convex points.
    pub fn in_region(&self) -> bool {
        in_region(self.k.to_f64(), self.ell.to_f64())
    }
}

pub fn in_region(k: f64, ell: f64) -> bool {
    k.abs() < 0.5 && ell.abs() < 2.0
}

/// D = 4(1 + 4k^2 - 2kl)((8 - l^2) - 8kl + 4(kl)^2).
pub fn discriminant<S: Scalar>(k: &S, ell: &S) -> S {
    let kl = k.clone() * ell.clone();
    int::<S>(4)
        * (S::one() + int::<S>(4) * k.clone() * k.clone() - int::<S>(2) * kl.clone())
        * ((int::<S>(8) - ell.clone() * ell.clone()) - int::<S>(8) * kl.clone() + int::<S>(4) * kl.square())
}

/// (x0 + y0, x0 y0).
pub fn root_sum_product<S: Scalar>(k: &S, ell: &S) -> Result<(S, S)> {
    let two = int::<S>(2);
    let den = (two.clone() + ell.clone()) * (two.clone() - ell.clone());
    let kl = k.clone() * ell.clone();
    let sum = div_checked(
        two.clone() * (int::<S>(4) * k.clone() - ell.clone()) * (kl.clone() - S::one()),
        den.clone(),
        "(2+l)(2-l)",
    )?;
    let prod = div_checked(
        -two - int::<S>(4) * k.clone() * k.clone() + int::<S>(4) * kl.clone() - kl.square(),
        den,
        "(2+l)(2-l)",
    )?;
    Ok((sum, prod))
}

/// The two formal solutions (x0, -y0) and (y0, -x0), embedded in Pi_k.
/// `sqrt_d` is a square root of the discriminant.
pub fn formal_solutions<S: Scalar>(k: &S, ell: &S, sqrt_d: S) -> Result<(S, S, [CanonCoords<S>; 2])> {
    let (sum, _) = root_sum_product(k, ell)?;
    let two = int::<S>(2);
    let den = (two.clone() + ell.clone()) * (two.clone() - ell.clone());
    let half_gap = sqrt_d / (two.clone() * den);
    let x0 = sum.clone() / two.clone() + half_gap.clone();
    let y0 = sum / two - half_gap;
    let p = plane_embed(&PlanePoint::new(k.clone(), x0.clone(), -y0.clone()));
    let q = plane_embed(&PlanePoint::new(k.clone(), y0.clone(), -x0.clone()));
    Ok((x0, y0, [p, q]))
}

/// Derivative of the T3^4 action on L(k, l), in the x parameter, at `x`.
pub fn multiplier(k: f64, ell: f64, x: f64) -> Result<f64> {
    let kd = Dual4::constant(k);
    let ld = Dual4::constant(ell);
    let xd = Dual4::variable(x, 0);
    let yd = level_y(&kd, &ld, &xd)?;
    let p = plane_embed(&PlanePoint::new(kd, xd, yd));
    let q = apply_word(&GenWord::t3().power(4), &p)?;
    let x_new = (q.a + q.b) / Dual4::constant(2.0);
    Ok(x_new.partials[0])
}

#[derive(Clone, Debug)]
pub struct FixedPoints<S> {
    pub attract: CanonCoords<S>,
    pub repel: CanonCoords<S>,
    pub d: S,
    pub x0: S,
    pub y0: S,
    /// T3^4 multipliers at (attract, repel).
    pub multipliers: (f64, f64),
}

fn order_by_multiplier<S: Scalar>(k: f64, ell: f64, pts: [CanonCoords<S>; 2]) -> Result<(CanonCoords<S>, CanonCoords<S>, (f64, f64))> {
    let m: Vec<f64> = pts
        .iter()
        .map(|p| multiplier(k, ell, (p.a.to_f64() + p.b.to_f64()) / 2.0))
        .collect::<Result<_>>()?;
    let [p, q] = pts;
    if m[0].abs() < m[1].abs() {
        Ok((p, q, (m[0], m[1])))
    } else {
        Ok((q, p, (m[1], m[0])))
    }
}

fn check_level(k: f64, ell: f64) -> Result<()> {
    if in_region(k, ell) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("(k, l) = ({k}, {ell}) is outside |k| < 1/2, |l| < 2")))
    }
}

/// Exact fixed points over Q(sqrt D); the attractor is the one whose
/// T3^4 multiplier is inside the unit circle.
pub fn fixed_points(level: &LftLevel) -> Result<FixedPoints<QuadRat>> {
    let (kf, lf) = (level.k.to_f64(), level.ell.to_f64());
    check_level(kf, lf)?;
    let d = discriminant(&level.k, &level.ell);
    if d.sign() <= 0 {
        return Err(Error::Degenerate(format!("discriminant {d} is not positive")));
    }
    let sqrt_d = QuadRat::sqrt_of(d.clone());
    let (k, ell) = (QuadRat::from_rat(&level.k), QuadRat::from_rat(&level.ell));
    let (x0, y0, pts) = formal_solutions(&k, &ell, sqrt_d)?;
    let (attract, repel, multipliers) = order_by_multiplier(kf, lf, pts)?;
    Ok(FixedPoints { attract, repel, d: QuadRat::from_rat(&d), x0, y0, multipliers })
}

pub fn fixed_points_f64(k: f64, ell: f64) -> Result<FixedPoints<f64>> {
    check_level(k, ell)?;
    let d = discriminant(&k, &ell);
    if d <= 0.0 {
        return Err(Error::Degenerate(format!("discriminant {d} is not positive")));
    }
    let (x0, y0, pts) = formal_solutions(&k, &ell, d.sqrt())?;
    let (attract, repel, multipliers) = order_by_multiplier(k, ell, pts)?;
    Ok(FixedPoints { attract, repel, d, x0, y0, multipliers })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LftType {
    Hyperbolic,
    /// Multiplier on the unit circle; never expected inside the region.
    Elliptic,
}

#[derive(Clone, Debug)]
pub struct LftClass {
    pub kind: LftType,
    /// Multiplier at the attractor.
    pub multiplier: f64,
    pub repel_multiplier: f64,
}

pub const UNIT_CIRCLE_TOL: f64 = 1e-6;

pub fn classify_lft(level: &LftLevel) -> Result<LftClass> {
    let fp = fixed_points_f64(level.k.to_f64(), level.ell.to_f64())?;
    let (m, r) = fp.multipliers;
    let kind = if (m.abs() - 1.0).abs() < UNIT_CIRCLE_TOL { LftType::Elliptic } else { LftType::Hyperbolic };
    Ok(LftClass { kind, multiplier: m, repel_multiplier: r })
}

/// Whether the star reordering of `attract` normalizes to `repel` under some
/// dihedral relabeling.
pub fn repeller_is_star_reorder<S: Scalar>(attract: &CanonCoords<S>, repel: &CanonCoords<S>, tol: f64) -> bool {
    let star = star_reorder(&vertices_from_coords(attract));
    star.dihedral_relabelings().iter().any(|o| match normalize(o) {
        Ok(q) => q.to_array().iter().zip(repel.to_array()).all(|(u, v)| (u.clone() - v).is_zero_within(tol)),
        Err(_) => false,
    })
}

#[derive(Clone, Debug)]
pub struct Convergence {
    pub limit: CanonCoords<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Distances from the limit to the level's attractor and repeller, when
    /// the start is circumscribed and its level lies in the region.
    pub to_attractor: Option<f64>,
    pub to_repeller: Option<f64>,
    /// First plain T3 step in the opposite direction that is not convex
    /// (or leaves the domain), within `4 * max_iter` steps.
    pub convexity_exit: Option<usize>,
}

/// Iterate T3^{4 direction} until successive iterates are within `tol`.
pub fn converge_to_poncelet(p: &CanonCoords<f64>, direction: i32, max_iter: usize, tol: f64) -> Result<Convergence> {
    if direction != 1 && direction != -1 {
        return Err(Error::Invalid("direction must be +1 or -1".into()));
    }
    if !is_convex_coords(p) {
        return Err(Error::Invalid("start is not convex".into()));
    }
    let (ins, circ) = defects(p)?;
    let circumscribed = circ.abs() < CIRC_TOL;
    if !circumscribed && ins.abs() > CIRC_TOL {
        return Err(Error::Invalid("start is neither circumscribed nor inscribed".into()));
    }
    let step = |q: &CanonCoords<f64>| -> Result<CanonCoords<f64>> {
        let mut r = q.clone();
        for _ in 0..4 {
            r = if direction > 0 { t3(&r)? } else { t3_inv(&r)? };
        }
        Ok(r)
    };
    // T3^4 keeps Pi_k exactly, but round-off off the plane grows several-fold
    // per T3 step, so circumscribed iterates are put back on Pi_k each time.
    let k0 = (p.a - p.b) / 2.0;
    let reproject = |q: CanonCoords<f64>| {
        if circumscribed {
            plane_embed(&PlanePoint::new(k0, (q.a + q.b) / 2.0, (q.c + q.d) / 2.0))
        } else {
            q
        }
    };
    let mut q = p.clone();
    let mut iterations = 0;
    let mut converged = circumscribed && ins.abs() < tol;
    while !converged && iterations < max_iter {
        let next = step(&q).map_err(|e| Error::Numerical(format!("iterate {} left the domain: {e}", iterations + 1)))?;
        let next = reproject(next);
        iterations += 1;
        converged = next.dist(&q) < tol;
        q = next;
    }
    let (mut to_attractor, mut to_repeller) = (None, None);
    if circumscribed {
        let pp = plane_project(p)?;
        if let Ok(ell) = h_level(&pp) {
            if let Ok(fp) = fixed_points_f64(pp.k, ell) {
                to_attractor = Some(q.dist(&fp.attract));
                to_repeller = Some(q.dist(&fp.repel));
            }
        }
    }
    let mut convexity_exit = None;
    let mut r = p.clone();
    for i in 1..=4 * max_iter {
        let next = if direction > 0 { t3_inv(&r) } else { t3(&r) };
        match next {
            Ok(n) if is_convex_coords(&n) => r = n,
            _ => {
                convexity_exit = Some(i);
                break;
            }
        }
    }
    Ok(Convergence { limit: q, iterations, converged, to_attractor, to_repeller, convexity_exit })
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub k: f64,
    pub ell: f64,
    pub d: f64,
    pub x0: f64,
    pub y0: f64,
    pub multiplier: f64,
}

/// An n x n grid strictly inside the region, rows in k-major order.
pub fn sweep_grid(n: usize) -> Vec<(Rat, Rat)> {
    let n = n.max(1) as i64;
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            // Midpoints of n equal cells in (-1/2, 1/2) and (-2, 2).
            let k = Rat::new((2 * i + 1 - n).into(), (2 * n).into());
            let ell = Rat::new((2 * (2 * j + 1 - n)).into(), n.into());
            out.push((k, ell));
        }
    }
    out
}

pub fn fixed_point_sweep(grid: &[(Rat, Rat)]) -> Result<Vec<SweepRow>> {
    grid.iter()
        .map(|(k, ell)| {
            let (kf, lf) = (k.to_f64(), ell.to_f64());
            let fp = fixed_points_f64(kf, lf)?;
            Ok(SweepRow { k: kf, ell: lf, d: fp.d, x0: fp.x0, y0: fp.y0, multiplier: fp.multipliers.0 })
        })
        .collect()
}

/// CSV with columns k,l,D,x0,y0,multiplier.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let f = crate::flow::fmt17;
    let mut out = String::from("k,l,D,x0,y0,multiplier\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{}", f(r.k), f(r.ell), f(r.d), f(r.x0), f(r.y0), f(r.multiplier));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::g_ab;
    use crate::maps::map_a;
    use crate::scalar::rat;

    fn s() -> QuadRat {
        QuadRat::sqrt_of(rat(1, 2))
    }

    #[test]
    fn embed_project_round_trip() {
        let q = PlanePoint::new(rat(1, 7), rat(3, 4), rat(5, 6));
        let p = plane_embed(&q);
        assert_eq!(defects(&p).unwrap().1, rat(0, 1));
        assert_eq!(plane_project(&p).unwrap(), q);
        assert!(plane_project(&CanonCoords::new(rat(1, 1), rat(1, 2), rat(1, 3), rat(1, 4))).is_err());
        assert_eq!(plane_embed(&PlanePoint::new(QuadRat::from_i64(0), s(), s())), CanonCoords::splat(s()));
    }

    #[test]
    fn h_values() {
        assert_eq!(h_level(&PlanePoint::new(rat(0, 1), rat(1, 1), rat(1, 2))).unwrap(), rat(1, 1));
        assert_eq!(h_level(&PlanePoint::new(QuadRat::from_i64(0), s(), s())).unwrap(), QuadRat::from_i64(0));
    }

    #[test]
    fn h_is_minus_g_ab_after_a_delta() {
        let q = PlanePoint::new(rat(1, 10), rat(4, 5), rat(9, 10));
        let p = plane_embed(&q);
        let ad = map_a(&crate::maps::map_delta(&p).unwrap());
        assert_eq!(h_level(&q).unwrap(), -g_ab(&ad).unwrap());
    }

    #[test]
    fn regular_level_fixed_points() {
        let fp = fixed_points(&LftLevel::new(rat(0, 1), rat(0, 1))).unwrap();
        assert_eq!(fp.d, QuadRat::from_i64(32));
        assert_eq!(fp.attract, CanonCoords::splat(s()));
        assert_eq!(fp.repel, CanonCoords::splat(-s()));
        assert!(fp.multipliers.0.abs() < 1.0);
        assert!((fp.multipliers.0 * fp.multipliers.1 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn attractor_is_poncelet_and_repeller_is_its_reflection() {
        for (k, ell) in [(rat(1, 10), rat(1, 2)), (rat(1, 5), rat(-1, 3)), (rat(-3, 10), rat(7, 5))] {
            let fp = fixed_points(&LftLevel::new(k.clone(), ell.clone())).unwrap();
            let (ins, circ) = defects(&fp.attract).unwrap();
            assert!(ins.is_vanishing() && circ.is_vanishing());
            let a = &fp.attract;
            assert_eq!(fp.repel, CanonCoords::new(-a.c.clone(), -a.d.clone(), -a.a.clone(), -a.b.clone()));
            let on_level = |p: &CanonCoords<QuadRat>| h_of(p).unwrap() == QuadRat::from_rat(&ell);
            assert!(on_level(&fp.attract) && on_level(&fp.repel));
            assert!(crate::octagon::convex_constraints(&fp.attract));
        }
    }

    #[test]
    fn sweep_grid_stays_inside() {
        let g = sweep_grid(20);
        assert_eq!(g.len(), 400);
        assert!(g.iter().all(|(k, l)| LftLevel::new(k.clone(), l.clone()).in_region()));
        let rows = fixed_point_sweep(&g).unwrap();
        assert!(rows.iter().all(|r| r.d > 0.0 && r.multiplier.abs() < 1.0 - UNIT_CIRCLE_TOL));
        assert!(sweep_csv(&rows[..2]).starts_with("k,l,D,x0,y0,multiplier\n"));
    }

    fn random_plane_points(n: usize, seed: u64) -> Vec<PlanePoint<Rat>> {
        use crate::scalar::random_rat_in;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let k = random_rat_in(&mut rng, &rat(-1, 5), &rat(1, 5), 97);
                let x = random_rat_in(&mut rng, &rat(3, 5), &rat(4, 5), 97);
                let y = random_rat_in(&mut rng, &rat(3, 5), &rat(4, 5), 97);
                PlanePoint::new(k, x, y)
            })
            .collect()
    }

    #[test]
    fn psi_rotates_and_planes_swap() {
        for q in random_plane_points(10, 3) {
            let p = plane_embed(&q);
            let image = t3(&p).unwrap();
            let (re, im) = psi(&p).unwrap();
            let (re1, im1) = psi(&image).unwrap();
            assert_eq!((re1, im1), (im, -re));
            let twice = t3(&image).unwrap();
            assert_eq!(plane_project(&twice).unwrap().k, -q.k.clone());
        }
    }

    #[test]
    fn level_relation_holds_along_t3_4() {
        for q in random_plane_points(3, 4) {
            let ell = h_level(&q).unwrap();
            let mut p = plane_embed(&q);
            for _ in 0..2 {
                p = apply_word(&GenWord::t3().power(4), &p).unwrap();
                let pp = plane_project(&p).unwrap();
                assert_eq!(pp.k, q.k);
                assert!(level_relation(&pp.k, &ell, &pp.x, &pp.y).is_vanishing());
            }
        }
    }

    #[test]
    fn regular_start_needs_no_iterations() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = converge_to_poncelet(&CanonCoords::splat(s), 1, 10, 1e-10).unwrap();
        assert_eq!(c.iterations, 0);
        assert!(c.converged);
    }
}
