//! The identity suite behind `octagon verify`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use octagon_core::flow::{concavity_q, reversal_images};
use octagon_core::hamiltonian::{
    dependence_witnesses, h_a_ratios, mir_identities_check, mu_vector, omega, poisson_bracket, pullback_check_form, x1, x2,
    x_g, TangentVec,
};
use octagon_core::invariants::{f1, f2, membership, y_polynomial, y_set_points_exact};
use octagon_core::maps::{map_a, map_delta, t3, GenWord, Generator};
use octagon_core::poncelet::{plane_embed, plane_project, psi, PlanePoint};
use octagon_core::scalar::{dot, rat, rat_to_string, random_rat_in, Rat};
use octagon_core::{CanonCoords, Error, Result, Scalar};

/// Check names in suite order.
pub const CHECKS: [&str; 12] =
    ["invariance", "pullback", "poisson", "mir", "mu", "h_a", "q", "iota", "v", "w", "psi", "y_relation"];

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Empty means every check.
    pub only: Vec<String>,
    /// Negate the cd block of omega, to confirm the pullback check can fail.
    pub flip_omega: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { trials: 20, seed: 0, only: Vec::new(), flip_omega: false }
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.options.seed,
            "trials": self.options.trials,
            "omega_sign_flip": self.options.flip_omega,
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect::<Vec<_>>(),
        })
    }
}

fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Up to `trials` samples from `draw`, skipping draws that return None.
fn sample<T>(trials: usize, mut draw: impl FnMut() -> Option<T>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(trials);
    for _ in 0..200 * trials.max(1) {
        if let Some(x) = draw() {
            out.push(x);
            if out.len() == trials {
                return Ok(out);
            }
        }
    }
    Err(Error::Numerical(format!("only {} of {trials} sample points were usable", out.len())))
}

fn box_point(rng: &mut ChaCha8Rng, half_width: i64, den: i64) -> CanonCoords<Rat> {
    let (lo, hi) = (rat(-half_width, 1), rat(half_width, 1));
    CanonCoords::from_array(std::array::from_fn(|_| random_rat_in(rng, &lo, &hi, den)))
}

fn x_point(rng: &mut ChaCha8Rng) -> Option<CanonCoords<Rat>> {
    let p = box_point(rng, 3, 12);
    membership(&p).ok().filter(|m| m.in_x).map(|_| p)
}

/// (a, 1-a, c, d) with a in (0, 1), c, d > 0 and c + d < 1.
pub fn u_ab_point(rng: &mut ChaCha8Rng) -> Option<CanonCoords<Rat>> {
    let (zero, one) = (rat(0, 1), rat(1, 1));
    let a = random_rat_in(rng, &zero, &one, 24);
    let c = random_rat_in(rng, &zero, &one, 24);
    let d = random_rat_in(rng, &zero, &one, 24);
    let ok = a.sign() > 0 && a < one && c.sign() > 0 && d.sign() > 0 && &c + &d < one;
    ok.then(|| CanonCoords::new(a.clone(), &one - &a, c, d))
}

fn flipped_omega(p: &CanonCoords<Rat>, u: &TangentVec<Rat>, v: &TangentVec<Rat>) -> Result<Rat> {
    let ab = &p.a * &p.b;
    let cd = &p.c * &p.d;
    if ab.sign() == 0 || cd.sign() == 0 {
        return Err(Error::Domain("abcd".into()));
    }
    Ok((&u[0] * &v[1] - &u[1] * &v[0]) / ab - (&u[2] * &v[3] - &u[3] * &v[2]) / cd)
}

fn check(name: &'static str, run: impl FnOnce() -> Result<(bool, Value)>) -> CheckResult {
    match run() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: json!({"error": e.to_string()}) },
    }
}

fn invariance(o: &VerifyOptions) -> Result<(bool, Value)> {
    let mut rng = rng_for(o.seed, 1);
    let rows = sample(o.trials, || {
        let p = box_point(&mut rng, 3, 12);
        let v = (f1(&p).ok()?, f2(&p).ok()?);
        let q = map_delta(&p).ok()?;
        let w = (f1(&q).ok()?, f2(&q).ok()?);
        let r = map_a(&p);
        let u = (f1(&r).ok()?, f2(&r).ok()?);
        Some((u == v, w == v))
    })?;
    let a_ok = rows.iter().all(|r| r.0);
    let d_ok = rows.iter().all(|r| r.1);
    Ok((a_ok && d_ok, json!({"points": rows.len(), "A": a_ok, "Delta": d_ok})))
}

fn pullback(o: &VerifyOptions) -> Result<(bool, Value)> {
    let cases = [
        ("A", GenWord(vec![Generator::A]), -1),
        ("Delta", GenWord(vec![Generator::Delta]), -1),
        ("T3", GenWord::t3(), 1),
    ];
    let mut detail = serde_json::Map::new();
    let mut all = true;
    for (i, (label, word, sign)) in cases.into_iter().enumerate() {
        let seed = o.seed.wrapping_add(100 + i as u64);
        let ok = if o.flip_omega {
            pullback_check_form(&word, sign, o.trials, seed, &flipped_omega)?
        } else {
            pullback_check_form(&word, sign, o.trials, seed, &|p, u, v| omega(p, u, v))?
        };
        all &= ok;
        detail.insert(label.into(), json!({"sign": sign, "passed": ok}));
    }
    Ok((all, Value::Object(detail)))
}

fn poisson(o: &VerifyOptions) -> Result<(bool, Value)> {
    let mut rng = rng_for(o.seed, 3);
    let vals = sample(o.trials, || x_point(&mut rng).and_then(|p| poisson_bracket(&p).ok()))?;
    let ok = vals.iter().all(|v| v.sign() == 0);
    Ok((ok, json!({"points": vals.len()})))
}

fn mir(o: &VerifyOptions) -> Result<(bool, Value)> {
    let r = mir_identities_check(o.trials, o.seed.wrapping_add(4))?;
    Ok((r.all(), json!({"mir1": r.mir1, "mir2": r.mir2, "mir1_plain": r.mir11, "mir2_plain": r.mir22, "mir3": r.mir3})))
}

fn mu(o: &VerifyOptions) -> Result<(bool, Value)> {
    let mut rng = rng_for(o.seed, 5);
    let vals = sample(o.trials, || {
        let p = x_point(&mut rng)?;
        Some(dot(&x_g(&p).ok()?, &mu_vector(&p).ok()?))
    })?;
    let generic = vals.iter().all(|v| v.sign() == 0);
    // On Y the two fields are dependent and mu annihilates each of them.
    let y = CanonCoords::new(rat(1, 1), rat(1, 2), rat(-1, 2), rat(-1, 1));
    let m = mu_vector(&y)?;
    let on_y = dot(&x1(&y)?, &m).sign() == 0 && dot(&x2(&y)?, &m).sign() == 0;
    Ok((generic && on_y, json!({"points": vals.len(), "x_g_dot_mu": generic, "y_point_x1_x2_dot_mu": on_y})))
}

fn h_a(o: &VerifyOptions) -> Result<(bool, Value)> {
    let mut rng = rng_for(o.seed, 6);
    let pts = sample(3, || {
        let p = box_point(&mut rng, 3, 7);
        h_a_ratios(std::slice::from_ref(&p)).ok().filter(|r| r[0].sign() != 0).map(|_| p)
    })?;
    let ratios = h_a_ratios(&pts)?;
    let ok = ratios.windows(2).all(|w| w[0] == w[1]);
    Ok((ok, json!({"ratios": ratios.iter().map(rat_to_string).collect::<Vec<_>>()})))
}

fn q(o: &VerifyOptions) -> Result<(bool, Value)> {
    let mut rng = rng_for(o.seed, 7);
    let rows = sample(o.trials, || {
        let p = u_ab_point(&mut rng)?;
        let (closed, direct) = concavity_q(&p).ok()?;
        Some((closed == direct, closed.sign() < 0))
    })?;
    let agree = rows.iter().all(|r| r.0);
    let negative = rows.iter().all(|r| r.1);
    Ok((agree && negative, json!({"points": rows.len(), "closed_equals_direct": agree, "negative": negative})))
}

type Images = octagon_core::flow::ReversalImages<Rat>;

fn reversal_sample(o: &VerifyOptions) -> Result<Vec<(CanonCoords<Rat>, Images)>> {
    let mut rng = rng_for(o.seed, 8);
    sample(o.trials, || {
        let p = u_ab_point(&mut rng)?;
        let r = reversal_images(&p).ok()?;
        Some((p, r))
    })
}

fn first_counterexample(rows: &[(CanonCoords<Rat>, Images)], bad: impl Fn(&Images) -> bool) -> Value {
    rows.iter().find(|(_, r)| bad(r)).map(|(p, _)| json!(p.to_array().iter().map(rat_to_string).collect::<Vec<_>>())).unwrap_or(Value::Null)
}

fn iota(o: &VerifyOptions) -> Result<(bool, Value)> {
    let rows = reversal_sample(o)?;
    let i5 = rows.iter().all(|(_, r)| r.i5_matches() == Some(true));
    let i3 = rows.iter().all(|(_, r)| r.i3_tail_ok());
    Ok((i5 && i3, json!({"points": rows.len(), "iota5_beta_point": i5, "iota3_tail": i3})))
}

fn v(o: &VerifyOptions) -> Result<(bool, Value)> {
    let rows = reversal_sample(o)?;
    let eq = rows.iter().all(|(_, r)| r.v1_equals_v4());
    let closed = rows.iter().all(|(_, r)| r.v1_matches() == Some(true));
    let cx = first_counterexample(&rows, |r| !r.v1_equals_v4() || r.v1_matches() != Some(true));
    Ok((eq && closed, json!({"points": rows.len(), "v1_equals_v4": eq, "v1_closed_form": closed, "counterexample": cx})))
}

fn w(o: &VerifyOptions) -> Result<(bool, Value)> {
    let rows = reversal_sample(o)?;
    let ok = rows.iter().all(|(_, r)| r.w4_matches() == Some(true));
    let cx = first_counterexample(&rows, |r| r.w4_matches() != Some(true));
    Ok((ok, json!({"points": rows.len(), "w4_closed_form": ok, "counterexample": cx})))
}

fn psi_rotation(o: &VerifyOptions) -> Result<(bool, Value)> {
    let mut rng = rng_for(o.seed, 9);
    let rows = sample(o.trials, || {
        let (lo, hi) = (rat(-2, 1), rat(2, 1));
        let k = random_rat_in(&mut rng, &rat(-1, 2), &rat(1, 2), 24);
        let q = PlanePoint::new(k.clone(), random_rat_in(&mut rng, &lo, &hi, 12), random_rat_in(&mut rng, &lo, &hi, 12));
        let p = plane_embed(&q);
        let (re, im) = psi(&p).ok()?;
        let img = t3(&p).ok()?;
        let (re1, im1) = psi(&img).ok()?;
        let k2 = plane_project(&t3(&img).ok()?).ok()?.k;
        Some((re1 == im && im1 == -re, k2 == -k))
    })?;
    let rot = rows.iter().all(|r| r.0);
    let swap = rows.iter().all(|r| r.1);
    Ok((rot && swap, json!({"points": rows.len(), "psi_t3_is_minus_i_psi": rot, "t3_squared_maps_k_to_minus_k": swap})))
}

fn y_relation(_: &VerifyOptions) -> Result<(bool, Value)> {
    let mut pts = vec![CanonCoords::new(rat(1, 1), rat(1, 2), rat(-1, 2), rat(-1, 1))];
    for a in 1..=6 {
        for c in 1..=6 {
            pts.extend(y_set_points_exact(&rat(a, 2), &rat(-c, 3)));
        }
    }
    let mut ok = true;
    let mut used = 0;
    for p in &pts {
        let (Ok(w), Ok(v1), Ok(v2)) = (dependence_witnesses(p), f1(p), f2(p)) else { continue };
        ok &= w.all_f_vanish() && y_polynomial(&v1, &v2).sign() == 0;
        used += 1;
    }
    let y0 = y_polynomial(&rat(0, 1), &rat(-2, 1));
    let y34 = y_polynomial(&rat(3, 1), &rat(4, 1));
    let values = y0.sign() == 0 && y34 == rat(3321, 1);
    Ok((ok && used > 0 && values, json!({"points": used, "witnesses_and_relation": ok, "Y(0,-2)": rat_to_string(&y0), "Y(3,4)": rat_to_string(&y34)})))
}

/// Run the selected checks. Unknown names in `only` are an input error.
pub fn run_suite(o: &VerifyOptions) -> Result<VerifyReport> {
    for name in &o.only {
        if !CHECKS.contains(&name.as_str()) {
            return Err(Error::Invalid(format!("unknown check {name:?}; known checks: {}", CHECKS.join(", "))));
        }
    }
    let selected = |n: &str| o.only.is_empty() || o.only.iter().any(|x| x == n);
    let runners: [(&'static str, fn(&VerifyOptions) -> Result<(bool, Value)>); 12] = [
        ("invariance", invariance),
        ("pullback", pullback),
        ("poisson", poisson),
        ("mir", mir),
        ("mu", mu),
        ("h_a", h_a),
        ("q", q),
        ("iota", iota),
        ("v", v),
        ("w", w),
        ("psi", psi_rotation),
        ("y_relation", y_relation),
    ];
    let checks = runners.iter().filter(|(n, _)| selected(n)).map(|&(n, f)| check(n, || f(o))).collect();
    Ok(VerifyReport { options: o.clone(), checks })
}
