//! The acceptance suite. Each criterion prints one PASS/FAIL line with the
//! worst observed error against its stated tolerance. Runs without the test
//! harness so the lines are always shown.

use std::f64::consts::LN_2;
use std::io::Write;
use std::process::{Command, Stdio};

use quathyp::congruence::{
    congruent_quadruple_gram, congruent_quadruple_invariants, decide_triple, Verdict, CONGRUENCE_TOL,
};
use quathyp::hform::{
    bergman_distance, random_boundary_point, random_interior_point, random_isometry, random_quaternion,
};
use quathyp::invariants::{cartan, cross_ratio, cross_ratio_lifts, triple_product};
use quathyp::metric::{
    cosh2_point_geodesic, cosh2_point_geodesic_mixed, cosh2_point_qline, cosh2_point_qline_mixed, dist_point_geodesic,
    project_to_qline, rho_via_crossratio, Geodesic, QLine,
};
use quathyp::moduli::{
    d_of_g, normalize, random_boundary_quadruple, random_moduli_point, reconstruct, right_dependent, tau, D_TOL,
    RANK_TOL,
};
use quathyp::quat::{nu, sigma, similar, BRANCH_EPS};
use quathyp::{ClosurePoint, Isometry, Location, Quaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Worst observed error of one check against its tolerance.
struct Check {
    label: &'static str,
    worst: f64,
    tol: f64,
    failures: usize,
}

impl Check {
    fn new(label: &'static str, tol: f64) -> Self {
        Check { label, worst: 0.0, tol, failures: 0 }
    }

    fn observe(&mut self, err: f64) {
        if err.is_nan() || err > self.tol {
            self.failures += 1;
        }
        self.worst = self.worst.max(if err.is_nan() { f64::INFINITY } else { err });
    }

    fn require(&mut self, ok: bool) {
        self.observe(if ok { 0.0 } else { f64::INFINITY });
    }

    fn passed(&self) -> bool {
        self.failures == 0
    }

    fn summary(&self) -> String {
        format!("{} worst {:.2e} (tol {:.0e}, {} failures)", self.label, self.worst, self.tol, self.failures)
    }
}

struct Outcome {
    id: usize,
    title: &'static str,
    checks: Vec<Check>,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    fn failing(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.label).collect()
    }

    fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let details: Vec<String> = self.checks.iter().map(Check::summary).collect();
        format!("criterion {:>2} {verdict}: {} | {}", self.id, self.title, details.join("; "))
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_closure_point(n: usize, rng: &mut ChaCha8Rng) -> ClosurePoint {
    match rng.random_range(0..10) {
        0 => ClosurePoint::Infinity,
        1..=5 => random_boundary_point(n, rng),
        _ => random_interior_point(n, rng),
    }
}

/// `k` random closure points with at most one at infinity.
fn random_closure_points(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<ClosurePoint> {
    loop {
        let p: Vec<_> = (0..k).map(|_| random_closure_point(n, rng)).collect();
        if p.iter().filter(|x| x.is_infinity()).count() <= 1 {
            return p;
        }
    }
}

fn apply_all(g: &Isometry, p: &[ClosurePoint]) -> Vec<ClosurePoint> {
    p.iter().map(|x| g.apply(x).expect("isometries act on the closure")).collect()
}

fn quadruple(p: &[ClosurePoint]) -> [ClosurePoint; 4] {
    [p[0].clone(), p[1].clone(), p[2].clone(), p[3].clone()]
}

fn triple(p: &[ClosurePoint]) -> [ClosurePoint; 3] {
    [p[0].clone(), p[1].clone(), p[2].clone()]
}

fn quaternion_identities() -> Outcome {
    let mut r = rng(1);
    let mut swap = Check::new("Re(ab)=Re(ba)", 1e-12);
    let mut split = Check::new("Re(ab)=Re a Re b+Re(Im a Im b)", 1e-12);
    for _ in 0..10_000 {
        let (a, b) = (random_quaternion(&mut r, 10.0), random_quaternion(&mut r, 10.0));
        let scale = (a.norm() * b.norm()).max(f64::MIN_POSITIVE);
        let re = (a * b).re();
        swap.observe((re - (b * a).re()).abs() / scale);
        split.observe((re - (a.re() * b.re() + (a.im() * b.im()).re())).abs() / scale);
    }
    Outcome { id: 1, title: "quaternion identities", checks: vec![swap, split] }
}

/// A quaternion whose `(j, k)` part sits near the branch threshold about half the time.
fn branch_probe(r: &mut ChaCha8Rng) -> Quaternion {
    let a = random_quaternion(r, 5.0);
    if r.random_bool(0.5) {
        let s = 10f64.powf(r.random_range(-16.0..-8.0));
        let theta = r.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let zero_jk = r.random_bool(0.1);
        let (a2, a3) = if zero_jk { (0.0, 0.0) } else { (s * theta.cos(), s * theta.sin()) };
        Quaternion::new(a.a0, a.a1, a2, a3)
    } else {
        a
    }
}

/// `σ` is a complex unit; it brings `a` to `a₀ + a₁i + |a₂ + a₃i| j` when the
/// `(j, k)` part of `a` is above the branch threshold, else does so for `b`,
/// else is 1.
fn sigma_error(a: Quaternion, b: Quaternion) -> f64 {
    let s = sigma(a, b);
    let err = (s.norm() - 1.0).abs().max(s.a2.abs()).max(s.a3.abs());
    let form_err = |x: Quaternion| {
        let y = s.recip() * x * s;
        let target = Quaternion::new(x.a0, x.a1, x.j_part().norm(), 0.0);
        y.dist(target) / x.norm().max(1.0)
    };
    let branch = |x: Quaternion| x.a2 * x.a2 + x.a3 * x.a3 > BRANCH_EPS * BRANCH_EPS * x.norm_sqr().max(1.0);
    if branch(a) {
        err.max(form_err(a))
    } else if branch(b) {
        err.max(form_err(b))
    } else {
        err.max(s.dist(Quaternion::ONE))
    }
}

fn nu_sigma_contracts() -> Outcome {
    let mut r = rng(2);
    let mut nu_check = Check::new("nu^-1 a nu = a0+|Im a|i", 1e-10);
    let mut sigma_check = Check::new("sigma post-condition", 1e-10);
    for _ in 0..10_000 {
        let a = branch_probe(&mut r);
        let v = nu(a);
        let target = Quaternion::new(a.a0, a.im_norm(), 0.0, 0.0);
        let err = (v.recip() * a * v).dist(target) / a.norm().max(1.0);
        nu_check.observe(err.max((v.norm() - 1.0).abs()));
        let b = branch_probe(&mut r);
        sigma_check.observe(sigma_error(a, b));
    }
    Outcome { id: 2, title: "nu/sigma contracts", checks: vec![nu_check, sigma_check] }
}

fn triple_product_sign() -> Outcome {
    let mut r = rng(3);
    let mut check = Check::new("Re<p1,p2,p3> / |<p1,p2,p3>|", 1e-9);
    for i in 0..10_000 {
        let n = 2 + i % 2;
        let p = random_closure_points(n, 3, &mut r);
        let t = triple_product(&p[0], &p[1], &p[2]).expect("distinct points").value();
        check.observe((t.re() / t.norm()).max(0.0));
    }
    Outcome { id: 3, title: "triple product sign", checks: vec![check] }
}

fn cartan_invariance() -> Outcome {
    let mut r = rng(4);
    let mut iso = Check::new("isometry invariance", 1e-8);
    let mut perm = Check::new("permutation invariance", 1e-10);
    for i in 0..1_000 {
        let n = 2 + i % 2;
        let p = random_closure_points(n, 3, &mut r);
        let a = cartan(&p[0], &p[1], &p[2]).unwrap();
        for [x, y, z] in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            perm.observe((cartan(&p[x], &p[y], &p[z]).unwrap() - a).abs());
        }
        for _ in 0..10 {
            let gp = apply_all(&random_isometry(n, &mut r), &p);
            iso.observe((cartan(&gp[0], &gp[1], &gp[2]).unwrap() - a).abs());
        }
    }
    Outcome { id: 4, title: "Cartan invariance", checks: vec![iso, perm] }
}

fn cross_ratio_laws() -> Outcome {
    let mut r = rng(5);
    let mut rescale = Check::new("rescaling rule", 1e-10);
    let mut identities = Check::new("permutation identities (i)-(iv)", 1e-9);
    let mut modulus = Check::new("|cyclic product| = 1", 1e-9);
    let mut real_part = Check::new("Re(cyclic product) = cos 2A(p2,p3,p4)", 1e-8);
    for i in 0..1_000 {
        let n = 2 + i % 2;
        let p = random_closure_points(n, 4, &mut r);
        let l: Vec<_> = p.iter().map(|x| x.lift(n).unwrap()).collect();
        let s: Vec<_> = (0..4).map(|_| random_quaternion(&mut r, 1.0) + Quaternion::real(0.2)).collect();
        let x = cross_ratio_lifts(&l[0], &l[1], &l[2], &l[3]).unwrap();
        let scaled: Vec<_> = l.iter().zip(&s).map(|(v, k)| v.right_mul(*k)).collect();
        let xs = cross_ratio_lifts(&scaled[0], &scaled[1], &scaled[2], &scaled[3]).unwrap();
        let expect = s[0].conj() * x * s[0].conj().recip();
        rescale.observe(xs.dist(expect) / (1.0 + x.norm()));

        let cr = |a: usize, b: usize, c: usize, d: usize| cross_ratio(&p[a], &p[b], &p[c], &p[d]).unwrap();
        let x1 = cr(0, 1, 2, 3);
        identities.observe(x1.dist(cr(0, 1, 3, 2).recip()) / (1.0 + x1.norm()));
        identities.require(similar(x1, cr(1, 0, 2, 3).recip(), 1e-9));
        identities.require(similar(x1, cr(1, 0, 3, 2), 1e-9));
        identities.require(similar(cr(2, 3, 0, 1), x1.conj(), 1e-9));

        let y = x1 * cr(0, 3, 1, 2) * cr(0, 2, 3, 1);
        modulus.observe((y.norm() - 1.0).abs());
        let a = cartan(&p[1], &p[2], &p[3]).unwrap();
        real_part.observe((y.re() - (2.0 * a).cos()).abs());
    }
    Outcome { id: 5, title: "cross-ratio laws", checks: vec![rescale, identities, modulus, real_part] }
}

fn distance_consistency() -> Outcome {
    let mut worked = Check::new("log 2 example: Bergman, cross-ratio, arc length", 1e-9);
    let z = ClosurePoint::finite([-1.0, 0.0]);
    let w = ClosurePoint::finite([-2.0, 0.0]);
    let g = Geodesic::new(&ClosurePoint::Infinity, &ClosurePoint::origin(2)).unwrap();
    let values = [
        bergman_distance(&z, &w).unwrap(),
        rho_via_crossratio(&z, &w, &g).unwrap(),
        (g.parameter_of(&z).unwrap() - g.parameter_of(&w).unwrap()).abs(),
    ];
    for a in values {
        worked.observe((a - LN_2).abs());
        for b in values {
            worked.observe((a - b).abs());
        }
    }

    let mut r = rng(6);
    let mut mixed = Check::new("mixed formulas vs boundary pairs", 1e-8);
    for i in 0..1_000 {
        let n = 2 + i % 2;
        let (u, e) = (random_boundary_point(n, &mut r), random_boundary_point(n, &mut r));
        let geo = Geodesic::new(&u, &e).unwrap();
        let v = geo.point(r.random_range(-2.0..2.0)).unwrap();
        let z = random_interior_point(n, &mut r);
        let line = cosh2_point_qline(&QLine::new(&u, &e).unwrap(), &z).unwrap();
        let along = cosh2_point_geodesic(&geo, &z).unwrap();
        mixed.observe((cosh2_point_qline_mixed(&u, &v, &z).unwrap() - line).abs() / line);
        mixed.observe((cosh2_point_geodesic_mixed(&u, &v, &z).unwrap() - along).abs() / along);
    }
    Outcome { id: 6, title: "distance consistency", checks: vec![worked, mixed] }
}

fn projection_identities() -> Outcome {
    let mut r = rng(7);
    let mut tan = Check::new("tan A = sinh rho(geodesic, projection)", 1e-7);
    let mut cosh = Check::new("cosh factorization", 1e-7);
    for i in 0..1_000 {
        let n = 2 + i % 2;
        let (z, w) = (random_boundary_point(n, &mut r), random_boundary_point(n, &mut r));
        let p = if i % 4 == 0 { random_boundary_point(n, &mut r) } else { random_interior_point(n, &mut r) };
        let l = QLine::new(&z, &w).unwrap();
        let g = Geodesic::new(&z, &w).unwrap();
        let pr = project_to_qline(&l, &p).unwrap();
        let s = dist_point_geodesic(&g, &pr).unwrap().sinh();
        tan.observe((cartan(&z, &w, &p).unwrap().tan() - s).abs() / (1.0 + s));
        if p.is_interior() {
            let lhs = cosh2_point_geodesic(&g, &p).unwrap().sqrt();
            let rhs = cosh2_point_qline(&l, &p).unwrap().sqrt() * cosh2_point_geodesic(&g, &pr).unwrap().sqrt();
            cosh.observe((lhs - rhs).abs() / lhs);
        }
    }
    Outcome { id: 7, title: "projection identities", checks: vec![tan, cosh] }
}

fn moduli_round_trip() -> Outcome {
    let mut r = rng(8);
    let mut fixed = Check::new("tau(reconstruct(m)) = m", 1e-8);
    let mut congruent = Check::new("reconstruct(tau(p)) ~ p (Gram)", 0.0);
    let mut negative = Check::new("n = 3 samples have D < 0", 0.0);
    for n in [2, 3] {
        for _ in 0..1_000 {
            let m = random_moduli_point(n, &mut r);
            if n == 3 {
                negative.require(d_of_g(&m) < 0.0);
            }
            let back = tau(&reconstruct(&m, n).unwrap()).unwrap();
            fixed.observe(back.max_dist(&m));
        }
        for _ in 0..1_000 {
            let p = random_boundary_quadruple(n, &mut r);
            let q = reconstruct(&tau(&p).unwrap(), n).unwrap();
            congruent.require(congruent_quadruple_gram(&p, &q, CONGRUENCE_TOL).unwrap());
        }
    }
    Outcome { id: 8, title: "moduli round trip", checks: vec![fixed, congruent, negative] }
}

/// An `n = 2` quadruple placed in `n = 3`, then moved by a random isometry.
fn flat_quadruple(r: &mut ChaCha8Rng) -> [ClosurePoint; 4] {
    let g = random_isometry(3, r);
    let p = random_boundary_quadruple(2, r).map(|x| match x {
        ClosurePoint::Finite(mut c) => {
            c.push(Quaternion::ZERO);
            ClosurePoint::Finite(c)
        }
        inf => inf,
    });
    quadruple(&apply_all(&g, &p))
}

fn d_law() -> Outcome {
    let mut r = rng(9);
    let mut flat = Check::new("|D| for n = 2", 1e-8);
    let mut sign = Check::new("D for n = 3", 1e-8);
    let mut rank = Check::new("D ~ 0 iff right-dependent lifts", 0.0);
    for _ in 0..1_000 {
        flat.observe(d_of_g(&tau(&random_boundary_quadruple(2, &mut r)).unwrap()).abs());
        let p = if r.random_bool(0.5) { flat_quadruple(&mut r) } else { random_boundary_quadruple(3, &mut r) };
        let norm = normalize(&p).unwrap();
        let d = d_of_g(&norm.point);
        sign.observe(d.max(0.0));
        let zero = d.abs() <= D_TOL * (1.0 + norm.point.magnitude_sqr());
        rank.require(zero == right_dependent(&norm.lifts, RANK_TOL));
    }
    Outcome { id: 9, title: "D(G) law", checks: vec![flat, sign, rank] }
}

fn point_at(n: usize, loc: Location, r: &mut ChaCha8Rng) -> ClosurePoint {
    match loc {
        Location::Boundary => random_boundary_point(n, r),
        _ => random_interior_point(n, r),
    }
}

fn congruence_deciders() -> Outcome {
    use Location::{Boundary as B, Interior as H};
    let mut r = rng(10);
    let mut triples = Check::new("triples (p, g.p) in all 8 patterns", 0.0);
    for pattern in [[B, B, B], [B, B, H], [B, H, B], [H, B, B], [B, H, H], [H, B, H], [H, H, B], [H, H, H]] {
        for i in 0..1_000 {
            let n = 2 + i % 2;
            let p: Vec<_> = pattern.iter().map(|&loc| point_at(n, loc, &mut r)).collect();
            let gp = apply_all(&random_isometry(n, &mut r), &p);
            triples.require(decide_triple(&triple(&p), &triple(&gp), CONGRUENCE_TOL).unwrap() == Verdict::Congruent);
        }
    }
    let mut quads = Check::new("quadruples (p, g.p)", 0.0);
    let mut agree = Check::new("Gram and invariant verdicts agree", 0.0);
    for i in 0..1_000 {
        let n = 2 + i % 2;
        let p = random_boundary_quadruple(n, &mut r);
        let gp = quadruple(&apply_all(&random_isometry(n, &mut r), &p));
        quads.require(congruent_quadruple_gram(&p, &gp, CONGRUENCE_TOL).unwrap());
        quads.require(congruent_quadruple_invariants(&p, &gp, CONGRUENCE_TOL).unwrap());
        let q = if i % 2 == 0 { gp } else { random_boundary_quadruple(n, &mut r) };
        let gram = congruent_quadruple_gram(&p, &q, CONGRUENCE_TOL).unwrap();
        agree.require(gram == congruent_quadruple_invariants(&p, &q, CONGRUENCE_TOL).unwrap());
    }

    let mut counterexamples = Check::new("near-miss examples not congruent", 0.0);
    let (o, inf) = (ClosurePoint::origin(2), ClosurePoint::Infinity);
    let p = [o.clone(), inf.clone(), ClosurePoint::finite([-1.0, 6f64.sqrt() / 2.0])];
    let q =
        [o.clone(), inf, ClosurePoint::finite([Quaternion::real(-1.0), Quaternion::new(0.0, 2f64.sqrt(), 0.0, 0.0)])];
    counterexamples.require(decide_triple(&p, &q, CONGRUENCE_TOL).unwrap() == Verdict::PatternMismatch);
    let mid = ClosurePoint::finite([-1.0, 0.0]);
    let p = [
        o.clone(),
        mid.clone(),
        ClosurePoint::finite([Quaternion::new(-1.0, 1.0, 0.0, 0.0), Quaternion::real(6f64.sqrt() / 2.0)]),
    ];
    let q =
        [o, mid, ClosurePoint::finite([Quaternion::new(-0.4, 0.2, 0.0, 0.0), Quaternion::real(15f64.sqrt() / 5.0)])];
    counterexamples.require(decide_triple(&p, &q, CONGRUENCE_TOL).unwrap() == Verdict::InvariantMismatch);
    Outcome { id: 10, title: "congruence deciders", checks: vec![triples, quads, agree, counterexamples] }
}

fn cli(args: &[&str], input: &[u8]) -> Vec<u8> {
    let mut child = Command::new(env!("CARGO_BIN_EXE_quathyp"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("the quathyp binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "quathyp {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn cli_determinism() -> Outcome {
    let mut identical = Check::new("seeded runs byte-identical", 0.0);
    let mut fixed = Check::new("tau -> reconstruct -> tau through JSON", 1e-8);
    for n in ["2", "3"] {
        let args = ["random", "--kind", "quadruple", "--count", "50", "--seed", "2024", "--n", n];
        let corpus = cli(&args, b"");
        identical.require(corpus == cli(&args, b""));
        let m = cli(&["tau"], &corpus);
        identical.require(m == cli(&["tau"], &corpus));
        let points = cli(&["reconstruct", "--n", n], &m);
        identical.require(points == cli(&["reconstruct", "--n", n], &m));
        let back = cli(&["tau"], &points);
        let (a, b): (Vec<quathyp::moduli::ModuliPoint>, Vec<quathyp::moduli::ModuliPoint>) =
            (serde_json::from_slice(&m).unwrap(), serde_json::from_slice(&back).unwrap());
        identical.require(a.len() == 50 && b.len() == 50);
        for (x, y) in a.iter().zip(&b) {
            fixed.observe(x.max_dist(y));
        }
    }
    Outcome { id: 11, title: "CLI determinism", checks: vec![identical, fixed] }
}

/// The one check that is expected to fail: for quaternionic configurations
/// the real part of the cyclic product differs from `cos 2𝔸`.
const KNOWN_FAILURES: &[(usize, &str)] = &[(5, "Re(cyclic product) = cos 2A(p2,p3,p4)")];

fn main() {
    let outcomes = [
        quaternion_identities(),
        nu_sigma_contracts(),
        triple_product_sign(),
        cartan_invariance(),
        cross_ratio_laws(),
        distance_consistency(),
        projection_identities(),
        moduli_round_trip(),
        d_law(),
        congruence_deciders(),
        cli_determinism(),
    ];
    for o in &outcomes {
        println!("{}", o.line());
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    println!("acceptance: {passed}/{} criteria PASS", outcomes.len());

    let mut unexpected = Vec::new();
    for o in &outcomes {
        for label in o.failing() {
            if !KNOWN_FAILURES.contains(&(o.id, label)) {
                unexpected.push(format!("criterion {}: {label}", o.id));
            }
        }
    }
    for (id, label) in KNOWN_FAILURES {
        if !outcomes[id - 1].failing().contains(label) {
            unexpected.push(format!("criterion {id}: {label} now passes; update KNOWN_FAILURES"));
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance results: {unexpected:?}");
        std::process::exit(1);
    }
}
