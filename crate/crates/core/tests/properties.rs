use proptest::prelude::*;

use octagon_core::hamiltonian::{omega, x1, x2};
use octagon_core::invariants::{f1, f2, factors, g_ab, g_cd, gs_ab, gs_cd, F1Field, F2Field};
use octagon_core::maps::{apply_word, map_a, map_delta, map_i, map_j, t3, t3_inv, GenWord};
use octagon_core::octagon::{
    convex_constraints, defects, geometric_t3, is_convex_coords, normalize, vertices_from_coords,
};
use octagon_core::poncelet::{plane_embed, PlanePoint};
use octagon_core::scalar::{dot, exact_gradient, rat, Rat};
use octagon_core::{CanonCoords, Scalar};

fn arb_rat(lo: i64, hi: i64, den: i64) -> impl Strategy<Value = Rat> {
    (lo * den..=hi * den).prop_map(move |n| rat(n, den))
}

fn arb_point() -> impl Strategy<Value = CanonCoords<Rat>> {
    [arb_rat(-3, 3, 12), arb_rat(-3, 3, 12), arb_rat(-3, 3, 12), arb_rat(-3, 3, 12)].prop_map(CanonCoords::from_array)
}

/// Points of (0, 2)^4 on a 1/60 grid.
fn arb_open_box() -> impl Strategy<Value = CanonCoords<Rat>> {
    let c = || (1i64..120).prop_map(|n| rat(n, 60));
    [c(), c(), c(), c()].prop_map(CanonCoords::from_array)
}

fn arb_convex() -> impl Strategy<Value = CanonCoords<Rat>> {
    arb_open_box().prop_filter("convex", is_convex_coords)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generators_are_involutions(p in arb_point()) {
        prop_assert_eq!(map_a(&map_a(&p)), p.clone());
        prop_assert_eq!(map_i(&map_i(&p)), p.clone());
        prop_assert_eq!(map_j(&map_j(&p)), p.clone());
        if let Ok(q) = map_delta(&p) {
            if let Ok(back) = map_delta(&q) {
                prop_assert_eq!(back, p.clone());
            }
        }
    }

    #[test]
    fn word_symmetries(p in arb_point()) {
        let ad = GenWord::parse("AD").unwrap();
        if let (Ok(lhs), Ok(rhs)) = (apply_word(&GenWord::parse("IADI").unwrap(), &p), apply_word(&ad, &p)) {
            prop_assert_eq!(lhs, rhs);
        }
        if let (Ok(lhs), Ok(rhs)) = (apply_word(&GenWord::parse("JT3J").unwrap(), &p), apply_word(&GenWord::parse("IT3").unwrap(), &p)) {
            prop_assert_eq!(lhs, rhs);
        }
        if let Ok(q) = t3(&p) {
            if let Ok(back) = t3_inv(&q) {
                prop_assert_eq!(back, p.clone());
            }
        }
    }

    #[test]
    fn invariants_under_relabelings(p in arb_point()) {
        if let (Ok(v1), Ok(v2)) = (f1(&p), f2(&p)) {
            prop_assert_eq!(f1(&map_i(&p)).unwrap(), v1.clone());
            prop_assert_eq!(f2(&map_i(&p)).unwrap(), v2.clone());
            prop_assert_eq!(f1(&map_j(&p)).unwrap(), v2);
            prop_assert_eq!(f2(&map_j(&p)).unwrap(), v1);
        }
    }

    #[test]
    fn normalize_inverts_vertices(p in arb_open_box()) {
        prop_assert_eq!(normalize(&vertices_from_coords(&p)).unwrap(), p);
    }

    #[test]
    fn geometric_image_is_centrally_symmetric(p in arb_open_box()) {
        if let Ok(o) = geometric_t3(&vertices_from_coords(&p)) {
            prop_assert!(o.is_centrally_symmetric(0.0));
        }
    }

    #[test]
    fn convexity_implies_constraints(p in arb_open_box()) {
        // The algebraic list is necessary for convexity, not sufficient.
        if is_convex_coords(&p) {
            prop_assert!(convex_constraints(&p));
        }
    }

    #[test]
    fn defects_survive_i(p in arb_open_box()) {
        prop_assert_eq!(defects(&map_i(&p)).unwrap(), defects(&p).unwrap());
    }

    #[test]
    fn convex_points_are_positive(p in arb_convex()) {
        let fs = factors(&p).unwrap();
        prop_assert!(fs[..8].iter().all(|f| f.sign() > 0));
        let two = rat(2, 1);
        for g in [g_ab(&p).unwrap(), g_cd(&p).unwrap(), gs_ab(&p), gs_cd(&p)] {
            prop_assert!(g > -two.clone() && g < two.clone());
        }
    }

    #[test]
    fn fields_are_hamiltonian_and_commute(p in arb_point()) {
        let (Ok(u), Ok(v)) = (x1(&p), x2(&p)) else { return Ok(()) };
        prop_assert_eq!(omega(&p, &u, &u).unwrap(), rat(0, 1));
        prop_assert_eq!(omega(&p, &v, &v).unwrap(), rat(0, 1));
        let (_, g1) = exact_gradient(&F1Field, &p).unwrap();
        let (_, g2) = exact_gradient(&F2Field, &p).unwrap();
        for x in [&u, &v] {
            prop_assert_eq!(dot(x, &g1), rat(0, 1));
            prop_assert_eq!(dot(x, &g2), rat(0, 1));
        }
    }

    #[test]
    fn circumscribed_convex_points_stay_so(
        k in (-29i64..30).prop_map(|n| rat(n, 60)),
        x in (1i64..120).prop_map(|n| rat(n, 60)),
        y in (1i64..120).prop_map(|n| rat(n, 60)),
    ) {
        let p = plane_embed(&PlanePoint::new(k, x, y));
        prop_assume!(is_convex_coords(&p));
        let img = t3(&p).unwrap();
        prop_assert!(is_convex_coords(&img));
        prop_assert_eq!(defects(&img).unwrap().1, rat(0, 1));
    }
}

#[test]
fn float_gradients_match_finite_differences() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let p = CanonCoords::from_array(std::array::from_fn(|_| rat(rng.gen_range(-30..=30), rng.gen_range(1..=10))));
        let Ok((_, grad)) = exact_gradient(&F1Field, &p) else { continue };
        let pf = p.to_f64();
        let h = 1e-6;
        let mut ok = true;
        for i in 0..4 {
            let shift = |s: f64| {
                let mut a = pf.to_array();
                a[i] += s;
                f1(&CanonCoords::from_array(a))
            };
            let (Ok(up), Ok(down)) = (shift(h), shift(-h)) else {
                ok = false;
                break;
            };
            let fd = (up - down) / (2.0 * h);
            let exact = grad[i].to_f64();
            ok &= (fd - exact).abs() <= 1e-5 * exact.abs().max(1.0);
        }
        // Skip points so close to a pole that differencing is meaningless.
        if ok || f1(&pf).map(|v| v.abs() > 1e6).unwrap_or(true) {
            checked += ok as usize;
            continue;
        }
        panic!("gradient mismatch at {p:?}");
    }
}
