//! Gram matrices of boundary quadruples, their normalization, the moduli
//! coordinates `(c₁, c₂, c₃, t; 𝔸)` and the inverse reconstruction.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::hform::{
    classify, configuration_lifts, form, project, random_boundary_point, ClosurePoint, HVector, Location, Sign,
};
use crate::invariants::cartan_lifts;
use crate::linalg;
use crate::quat::{nu, sigma, Quaternion, BRANCH_EPS, DEFAULT_EPS};

/// Relative tolerance of the `D(G) = 0` test.
pub const D_TOL: f64 = 1e-8;
/// Slack allowed on the sign restrictions.
pub const RESTRICTION_SLACK: f64 = 1e-10;
/// Relative singular-value threshold of the dependence test.
pub const RANK_TOL: f64 = 1e-8;
/// Below this `cos 𝔸`, reconstruction avoids dividing by `2 cos 𝔸`.
pub const COS_A_FLOOR: f64 = 1e-6;
/// At or below this Cartan angle `g₁₃` counts as real, so every unit
/// quaternion preserves the normal form.
pub const ZERO_ANGLE_EPS: f64 = 1e-9;

/// `g_ij = ⟨p_i, p_j⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GramMatrix(pub [[Quaternion; 4]; 4]);

impl GramMatrix {
    pub fn entry(&self, i: usize, j: usize) -> Quaternion {
        self.0[i][j]
    }

    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max(self.0[j][i].dist(self.0[i][j].conj()));
            }
        }
        worst
    }

    /// Gram matrix of the rescaled lifts `pᵢλᵢ`: entries `λ̄ⱼ gᵢⱼ λᵢ`.
    pub fn rescaled(&self, lambda: &[Quaternion; 4]) -> GramMatrix {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, g) in row.iter_mut().enumerate() {
                *g = lambda[j].conj() * *g * lambda[i];
            }
        }
        GramMatrix(out)
    }

    pub fn max_dist(&self, other: &GramMatrix) -> f64 {
        let mut worst = 0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max(self.0[i][j].dist(other.0[i][j]));
            }
        }
        worst
    }
}

/// The Gram matrix of four null lifts.
pub fn gram(lifts: &[HVector; 4]) -> Result<GramMatrix> {
    let n = lifts[0].n();
    let mut g = [[Quaternion::ZERO; 4]; 4];
    for (i, p) in lifts.iter().enumerate() {
        if p.n() != n {
            return Err(GeometryError::DimensionMismatch { expected: n, found: p.n() });
        }
        if classify(p, DEFAULT_EPS) != Sign::Null {
            return Err(GeometryError::NotBoundary);
        }
        for (j, q) in lifts.iter().enumerate() {
            g[i][j] = form(p, q);
        }
    }
    Ok(GramMatrix(g))
}

/// Moduli coordinates with `κ₁ = c₁ + t j`, `κ₂ = c₂ + c₃ j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuliPoint {
    pub c1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
    pub t: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

impl ModuliPoint {
    pub fn new(c1: Complex64, c2: Complex64, c3: Complex64, t: f64, a: f64) -> Self {
        ModuliPoint { c1, c2, c3, t, a }
    }

    /// Reads `c₁, t` off `κ₁` and `c₂, c₃` off `κ₂`; the `j`-part of `κ₁`
    /// is taken by modulus.
    pub fn from_kappas(kappa1: Quaternion, kappa2: Quaternion, a: f64) -> Self {
        ModuliPoint {
            c1: kappa1.complex_part(),
            c2: kappa2.complex_part(),
            c3: kappa2.j_part(),
            t: kappa1.j_part().norm(),
            a,
        }
    }

    pub fn kappa1(&self) -> Quaternion {
        Quaternion::from_parts(self.c1, Complex64::new(self.t, 0.0))
    }

    pub fn kappa2(&self) -> Quaternion {
        Quaternion::from_parts(self.c2, self.c3)
    }

    /// `|c₁|² + |c₂|² + |c₃|² + t²`.
    pub fn magnitude_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr() + self.c3.norm_sqr() + self.t * self.t
    }

    pub fn max_dist(&self, other: &ModuliPoint) -> f64 {
        [
            (self.c1 - other.c1).norm(),
            (self.c2 - other.c2).norm(),
            (self.c3 - other.c3).norm(),
            (self.t - other.t).abs(),
            (self.a - other.a).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn normalized_gram(&self) -> NormalizedGram {
        NormalizedGram { a: self.a, kappa1: self.kappa1(), kappa2: self.kappa2() }
    }
}

/// The normalized Gram matrix: `g₁₂ = g₂₃ = g₃₄ = 1`, `g₁₃ = −e^{i𝔸}`,
/// `g₁₄ = κ₁`, `g₂₄ = κ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedGram {
    #[serde(rename = "A")]
    pub a: f64,
    pub kappa1: Quaternion,
    pub kappa2: Quaternion,
}

impl NormalizedGram {
    pub fn matrix(&self) -> GramMatrix {
        let one = Quaternion::ONE;
        let z = Quaternion::ZERO;
        let g13 = -Quaternion::exp_i(self.a);
        let (k1, k2) = (self.kappa1, self.kappa2);
        GramMatrix([[z, one, g13, k1], [one, z, one, k2], [g13.conj(), one, z, one], [k1.conj(), k2.conj(), one, z]])
    }

    pub fn moduli_point(&self) -> ModuliPoint {
        ModuliPoint::from_kappas(self.kappa1, self.kappa2, self.a)
    }
}

/// Output of [`normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub gram: NormalizedGram,
    pub point: ModuliPoint,
    pub lifts: [HVector; 4],
}

fn inv(q: Quaternion) -> Result<Quaternion> {
    q.inv().map_err(|_| GeometryError::ZeroInnerProduct)
}

/// Standard lifts of four pairwise distinct boundary points.
pub fn boundary_quadruple_lifts(points: &[ClosurePoint; 4]) -> Result<[HVector; 4]> {
    for p in points {
        if p.location(DEFAULT_EPS) != Location::Boundary {
            return Err(GeometryError::NotBoundary);
        }
    }
    let l = configuration_lifts(points)?;
    Ok([l[0].clone(), l[1].clone(), l[2].clone(), l[3].clone()])
}

/// `λ₂, λ₃, λ₄` making `g₁₂ = g₂₃ = g₃₄ = 1`, and `x = ⟨p₁, p₃λ₃⟩`.
fn chain_scalars(p: &[HVector; 4]) -> Result<([Quaternion; 3], Quaternion)> {
    let g = |i: usize, j: usize| form(&p[i], &p[j]);
    let l2 = inv(g(1, 0))?;
    let l3 = inv(g(2, 1))? * g(0, 1);
    let l4 = inv(g(3, 2))? * g(1, 2) * inv(g(1, 0))?;
    let x = g(1, 0) * inv(g(1, 2))? * g(0, 2);
    Ok(([l2, l3, l4], x))
}

/// The unit `μ` fixing `κᵢ ↦ μ⁻¹κᵢμ`. For `𝔸 > 0` only complex `μ` keep
/// `g₁₃`, and `σ` is used. At `𝔸 = 0` any unit does: `ν` first turns `Im κ₁`
/// (or `Im κ₂` when `κ₁` is real) onto the positive `i`-axis, then `σ`
/// settles the remaining complex freedom on `κ₂`.
fn residual_rotation(kappa1: Quaternion, kappa2: Quaternion, a: f64) -> Quaternion {
    if a > ZERO_ANGLE_EPS {
        return sigma(kappa1, kappa2);
    }
    let anchor = if kappa1.im_norm() > BRANCH_EPS * kappa1.norm().max(1.0) { kappa1 } else { kappa2 };
    let r = nu(anchor);
    let ri = r.conj();
    r * sigma(ri * kappa1 * r, ri * kappa2 * r)
}

/// The normalized lift and Gram matrix of four null lifts of pairwise
/// distinct boundary points.
pub fn normalize_lifts(p: &[HVector; 4]) -> Result<Normalization> {
    gram(p)?;
    let ([l2, l3, l4], x) = chain_scalars(p)?;
    let l1 = nu(x.conj()) / x.norm().sqrt();
    let l1_bar_inv = inv(l1.conj())?;
    let m =
        [p[0].right_mul(l1), p[1].right_mul(l2 * l1_bar_inv), p[2].right_mul(l3 * l1), p[3].right_mul(l4 * l1_bar_inv)];
    let a = cartan_lifts(&p[0], &p[1], &p[2]);
    let mu = residual_rotation(form(&m[0], &m[3]), form(&m[1], &m[3]), a);
    let lifts = [m[0].right_mul(mu), m[1].right_mul(mu), m[2].right_mul(mu), m[3].right_mul(mu)];
    let kappa1 = form(&lifts[0], &lifts[3]);
    let kappa2 = form(&lifts[1], &lifts[3]);
    let gram = NormalizedGram { a, kappa1, kappa2 };
    Ok(Normalization { gram, point: gram.moduli_point(), lifts })
}

/// Normalization of a quadruple of pairwise distinct boundary points.
pub fn normalize(points: &[ClosurePoint; 4]) -> Result<Normalization> {
    normalize_lifts(&boundary_quadruple_lifts(points)?)
}

/// The moduli map `τ`.
pub fn tau(points: &[ClosurePoint; 4]) -> Result<ModuliPoint> {
    Ok(normalize(points)?.point)
}

/// `D(G)` in the coordinates `(c₁, c₂, c₃, t; 𝔸)`.
pub fn d_of_g(m: &ModuliPoint) -> f64 {
    let e = Complex64::from_polar(1.0, m.a);
    1.0 + m.magnitude_sqr() - 2.0 * m.c1.re
        + 2.0 * (m.c2 * e.conj()).re
        + 2.0 * ((m.c1.conj() * m.c2 + m.t * m.c3.conj()) * e).re
}

/// `D(G)` in the quaternionic form on `κ₁, κ₂`.
pub fn d_of_g_kappa(kappa1: Quaternion, kappa2: Quaternion, a: f64) -> f64 {
    let e = Quaternion::exp_i(a);
    1.0 + kappa1.norm_sqr() + kappa2.norm_sqr() - 2.0 * kappa1.re()
        + 2.0 * (kappa2 * e.conj()).re()
        + 2.0 * (kappa1.conj() * kappa2 * e).re()
}

/// Tolerances for [`check_membership`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipTol {
    /// Relative tolerance on `D`, scaled by `1 + |c₁|² + |c₂|² + |c₃|² + t²`.
    pub d_rel: f64,
    /// Slack on the sign restrictions, scaled by `1 + |κ₁||κ₂|`.
    pub slack: f64,
}

impl Default for MembershipTol {
    fn default() -> Self {
        MembershipTol { d_rel: D_TOL, slack: RESTRICTION_SLACK }
    }
}

fn reject(reason: &str) -> Result<()> {
    Err(GeometryError::NotInModuliSpace(reason.to_owned()))
}

/// Checks every restriction of `𝔅(n)`, including `c₃` real and `≥ 0` when
/// `t` vanishes.
pub fn check_membership(m: &ModuliPoint, n: usize, tol: MembershipTol) -> Result<()> {
    if n < 2 {
        return Err(GeometryError::DimensionTooSmall(n));
    }
    let vals = [m.c1.re, m.c1.im, m.c2.re, m.c2.im, m.c3.re, m.c3.im, m.t, m.a];
    if vals.iter().any(|v| !v.is_finite()) {
        return reject("non-finite coordinate");
    }
    let (k1, k2) = (m.kappa1(), m.kappa2());
    let slack = tol.slack * (1.0 + k1.norm() * k2.norm());
    if m.a < -tol.slack || m.a > std::f64::consts::FRAC_PI_2 + tol.slack {
        return reject("A outside [0, pi/2]");
    }
    if m.t < -tol.slack {
        return reject("t < 0");
    }
    if (m.c1 * m.c2.conj()).re + m.t * m.c3.re > slack {
        return reject("Re(c1 conj(c2)) + t Re(c3) > 0");
    }
    if m.c2.re > tol.slack * (1.0 + k2.norm()) {
        return reject("Re(c2) > 0");
    }
    if k1.norm() <= tol.slack {
        return reject("|c1|^2 + t^2 = 0");
    }
    if k2.norm() <= tol.slack {
        return reject("|c2|^2 + |c3|^2 = 0");
    }
    if m.t <= BRANCH_EPS * k1.norm().max(1.0) {
        let c3_tol = tol.d_rel * (1.0 + m.c3.norm());
        if m.c3.im.abs() > c3_tol || m.c3.re < -c3_tol {
            return reject("t = 0 but c3 is not a nonnegative real");
        }
    }
    let d = d_of_g(m);
    let d_tol = tol.d_rel * (1.0 + m.magnitude_sqr());
    if n == 2 && d.abs() > d_tol {
        return reject("D(G) != 0 for n = 2");
    }
    if d > d_tol {
        return reject("D(G) > 0");
    }
    Ok(())
}

pub fn is_in_moduli_space(m: &ModuliPoint, n: usize) -> bool {
    check_membership(m, n, MembershipTol::default()).is_ok()
}

/// Lifts `n₁ = (0,…,0,1)`, `n₂ = (1,0,…,0)`, `n₃ = (−e^{−i𝔸}, α, 1)`,
/// `n₄ = (κ̄₁, β, κ̄₂)` whose Gram matrix is the normalized one of `m`.
pub fn reconstruct_lifts(m: &ModuliPoint, n: usize) -> Result<[HVector; 4]> {
    check_membership(m, n, MembershipTol::default())?;
    let (k1, k2) = (m.kappa1(), m.kappa2());
    let cos_a = (std::f64::consts::FRAC_PI_2 - m.a).sin().max(0.0);
    let d = d_of_g(m);
    let w = Quaternion::ONE + k2 * Quaternion::exp_i(-m.a) - k1;
    let r = (-2.0 * (k1 * k2.conj()).re()).max(0.0);
    let mut alpha = vec![Quaternion::ZERO; n - 1];
    let mut beta = vec![Quaternion::ZERO; n - 1];
    alpha[0] = Quaternion::real((2.0 * cos_a).sqrt());
    if d < -D_TOL * (1.0 + m.magnitude_sqr()) {
        if n == 2 {
            return Err(GeometryError::NotInModuliSpace("D(G) < 0 needs n > 2".into()));
        }
        let s = (2.0 * cos_a).sqrt();
        beta[0] = w.conj() / s;
        beta[n - 2] = Quaternion::real((-d).sqrt() / s);
    } else {
        // β parallel to α with |β|² = R, so that β*α = w when D = 0
        let phase = if cos_a > COS_A_FLOOR || w.norm() > COS_A_FLOOR {
            w.conj().unit().unwrap_or(Quaternion::ONE)
        } else {
            Quaternion::ONE
        };
        beta[0] = phase * r.sqrt();
    }
    let last = |mid: Vec<Quaternion>, first: Quaternion, end: Quaternion| {
        let mut c = Vec::with_capacity(n + 1);
        c.push(first);
        c.extend(mid);
        c.push(end);
        HVector::new(c)
    };
    let n1 = last(vec![Quaternion::ZERO; n - 1], Quaternion::ZERO, Quaternion::ONE)?;
    let n2 = last(vec![Quaternion::ZERO; n - 1], Quaternion::ONE, Quaternion::ZERO)?;
    let n3 = last(alpha, -Quaternion::exp_i(-m.a), Quaternion::ONE)?;
    let n4 = last(beta, k1.conj(), k2.conj())?;
    Ok([n1, n2, n3, n4])
}

/// A boundary quadruple with `τ = m`.
pub fn reconstruct(m: &ModuliPoint, n: usize) -> Result<[ClosurePoint; 4]> {
    let l = reconstruct_lifts(m, n)?;
    Ok([project(&l[0])?, project(&l[1])?, project(&l[2])?, project(&l[3])?])
}

/// Whether four lifts are right-linearly dependent over `ℍ`.
pub fn right_dependent(lifts: &[HVector; 4], rel_tol: f64) -> bool {
    let cols: Vec<Vec<Quaternion>> = lifts.iter().map(|l| l.coords().to_vec()).collect();
    linalg::right_rank(&cols, rel_tol) < 4
}

/// Entries `(ω₁, ω₂, ω₃) = (g₁₄, g₂₄, g₁₃)` of the semi-normalized Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiNormalized {
    pub w1: Quaternion,
    pub w2: Quaternion,
    pub w3: Quaternion,
}

impl SemiNormalized {
    fn entries(&self) -> [Quaternion; 3] {
        [self.w1, self.w2, self.w3]
    }

    /// Whether `other = μ̄ (ω₁, ω₂, ω₃) μ` for one unit `μ`. Conjugation acts
    /// on imaginary parts as a rotation, so real parts, norms, pairwise
    /// inner products and the orientation of the imaginary parts must match.
    pub fn equivalent(&self, other: &SemiNormalized, tol: f64) -> bool {
        let (a, b) = (self.entries(), other.entries());
        let close = |x: f64, y: f64| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()));
        for i in 0..3 {
            if !close(a[i].re(), b[i].re()) || !close(a[i].norm(), b[i].norm()) {
                return false;
            }
            for j in i + 1..3 {
                if !close(dot(a[i], a[j]), dot(b[i], b[j])) {
                    return false;
                }
            }
        }
        let scale = 1.0 + a.iter().chain(&b).map(|q| q.norm()).fold(0.0, f64::max).powi(3);
        (det3(a) - det3(b)).abs() <= tol * scale
    }
}

fn dot(a: Quaternion, b: Quaternion) -> f64 {
    a.a1 * b.a1 + a.a2 * b.a2 + a.a3 * b.a3
}

fn det3(q: [Quaternion; 3]) -> f64 {
    let [u, v, w] = q.map(Quaternion::im_vec);
    u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0])
}

/// Semi-normalized lifts `(p₁λ₁, p₂λ₂λ₁⁻¹, p₃λ₃λ₁, p₄λ₄λ₁⁻¹)` with real `λ₁`.
pub fn semi_normalize_lifts(p: &[HVector; 4]) -> Result<([HVector; 4], SemiNormalized)> {
    gram(p)?;
    let ([l2, l3, l4], x) = chain_scalars(p)?;
    let l1 = 1.0 / x.norm().sqrt();
    let m = [p[0].scale(l1), p[1].right_mul(l2 / l1), p[2].right_mul(l3 * l1), p[3].right_mul(l4 / l1)];
    let s = SemiNormalized { w1: form(&m[0], &m[3]), w2: form(&m[1], &m[3]), w3: form(&m[0], &m[2]) };
    Ok((m, s))
}

pub fn semi_normalize(points: &[ClosurePoint; 4]) -> Result<SemiNormalized> {
    Ok(semi_normalize_lifts(&boundary_quadruple_lifts(points)?)?.1)
}

/// `n` random boundary points in general position.
pub fn random_boundary_quadruple<R: Rng + ?Sized>(n: usize, rng: &mut R) -> [ClosurePoint; 4] {
    loop {
        let q = [(); 4].map(|_| random_boundary_point(n, rng));
        if normalize(&q).is_ok() {
            return q;
        }
    }
}

/// A point of `𝔅(n)` obtained as `τ` of a random boundary quadruple.
pub fn random_moduli_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ModuliPoint {
    loop {
        let m = tau(&random_boundary_quadruple(n, rng)).expect("general position");
        if is_in_moduli_space(&m, n) {
            return m;
        }
    }
}
