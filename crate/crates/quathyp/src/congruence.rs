//! Congruence of ordered triples in the closure and of ordered boundary
//! quadruples under `Sp(n,1)`, with witness isometries.

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::hform::{common_dim, configuration_lifts, cosh2_half_distance, form, ClosurePoint, Isometry, Location};
use crate::invariants::{cartan, cross_ratios};
use crate::linalg::{self, QMatrix};
use crate::metric::{cosh2_point_qline, cosh2_point_qline_mixed, Geodesic, QLine};
use crate::moduli::{boundary_quadruple_lifts, tau};
use crate::quat::{aligning_rotation, similar, Quaternion, DEFAULT_EPS};

/// Default relative tolerance of the deciders.
pub const CONGRUENCE_TOL: f64 = 1e-7;
/// Accuracy required of a witness isometry on every point.
pub const WITNESS_TOL: f64 = 1e-7;

/// The four cases of the triple classification, by boundary/interior pattern after
/// moving boundary points to the front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleCase {
    /// `∂ × ∂ × ∂`: the Cartan invariant.
    AllBoundary,
    /// `∂ × ∂ × H`: the Cartan invariant and `ρ(L_{p₁p₂}, p₃)`.
    TwoBoundary,
    /// `∂ × H × H`: `ρ(L_{p₁p₂}, p₃)`, `ρ(L_{p₁p₃}, p₂)` and `ρ(p₂, p₃)`.
    OneBoundary,
    /// `H × H × H`: the Cartan invariant and the three distances.
    AllInterior,
}

/// Pattern and invariants of a triple. Distances enter as `cosh²(ρ/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleSignature {
    /// Locations in the given order.
    pub pattern: [Location; 3],
    pub case: TripleCase,
    /// `permutation[k]` is the index of the point placed `k`-th.
    pub permutation: [usize; 3],
    pub invariants: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Congruent,
    /// Boundary/interior patterns differ.
    PatternMismatch,
    /// Same pattern, different invariants.
    InvariantMismatch,
}

impl Verdict {
    pub fn is_congruent(self) -> bool {
        self == Verdict::Congruent
    }
}

fn locate(p: &ClosurePoint) -> Result<Location> {
    match p.location(DEFAULT_EPS) {
        Location::Exterior => Err(GeometryError::ExteriorPoint),
        loc => Ok(loc),
    }
}

fn pattern_of(p: &[ClosurePoint; 3]) -> Result<[Location; 3]> {
    Ok([locate(&p[0])?, locate(&p[1])?, locate(&p[2])?])
}

/// Stable order putting boundary points first.
pub fn canonical_permutation(pattern: &[Location; 3]) -> [usize; 3] {
    let mut idx = [0, 1, 2];
    idx.sort_by_key(|&i| pattern[i] != Location::Boundary);
    idx
}

fn permuted<T: Clone>(p: &[T; 3], perm: [usize; 3]) -> [T; 3] {
    perm.map(|i| p[i].clone())
}

fn case_of(pattern: &[Location; 3]) -> TripleCase {
    match pattern.iter().filter(|l| **l == Location::Boundary).count() {
        3 => TripleCase::AllBoundary,
        2 => TripleCase::TwoBoundary,
        1 => TripleCase::OneBoundary,
        _ => TripleCase::AllInterior,
    }
}

/// Invariants of a triple already in canonical order.
fn canonical_invariants(p: &[ClosurePoint; 3], case: TripleCase) -> Result<Vec<f64>> {
    let [p1, p2, p3] = p;
    Ok(match case {
        TripleCase::AllBoundary => vec![cartan(p1, p2, p3)?],
        TripleCase::TwoBoundary => vec![cartan(p1, p2, p3)?, cosh2_point_qline(&QLine::new(p1, p2)?, p3)?],
        TripleCase::OneBoundary => vec![
            cosh2_point_qline_mixed(p1, p2, p3)?,
            cosh2_point_qline_mixed(p1, p3, p2)?,
            cosh2_half_distance(p2, p3)?,
        ],
        TripleCase::AllInterior => vec![
            cartan(p1, p2, p3)?,
            cosh2_half_distance(p1, p2)?,
            cosh2_half_distance(p1, p3)?,
            cosh2_half_distance(p2, p3)?,
        ],
    })
}

fn check_triple(p: &[ClosurePoint; 3]) -> Result<()> {
    configuration_lifts(p)?;
    Ok(())
}

/// The signature of `p` computed after reordering by `permutation`.
pub fn triple_signature_under(p: &[ClosurePoint; 3], permutation: [usize; 3]) -> Result<TripleSignature> {
    check_triple(p)?;
    let pattern = pattern_of(p)?;
    let canon = permuted(&pattern, permutation);
    let case = case_of(&canon);
    if canon != canonical_pattern(case) {
        return Err(GeometryError::NotBoundary);
    }
    let invariants = canonical_invariants(&permuted(p, permutation), case)?;
    Ok(TripleSignature { pattern, case, permutation, invariants })
}

pub fn triple_signature(p: &[ClosurePoint; 3]) -> Result<TripleSignature> {
    triple_signature_under(p, canonical_permutation(&pattern_of(p)?))
}

fn canonical_pattern(case: TripleCase) -> [Location; 3] {
    use Location::{Boundary as B, Interior as H};
    match case {
        TripleCase::AllBoundary => [B, B, B],
        TripleCase::TwoBoundary => [B, B, H],
        TripleCase::OneBoundary => [B, H, H],
        TripleCase::AllInterior => [H, H, H],
    }
}

/// `|a − b| ≤ tol · (1 + max(|a|, |b|))`.
pub fn values_agree(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn all_agree(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| values_agree(*x, *y, tol))
}

/// The congruence verdict for ordered triples.
pub fn decide_triple(p: &[ClosurePoint; 3], q: &[ClosurePoint; 3], tol: f64) -> Result<Verdict> {
    check_triple(q)?;
    if pattern_of(p)? != pattern_of(q)? {
        check_triple(p)?;
        return Ok(Verdict::PatternMismatch);
    }
    let sp = triple_signature(p)?;
    let sq = triple_signature_under(q, sp.permutation)?;
    Ok(if all_agree(&sp.invariants, &sq.invariants, tol) { Verdict::Congruent } else { Verdict::InvariantMismatch })
}

pub fn congruent_triple(p: &[ClosurePoint; 3], q: &[ClosurePoint; 3], tol: f64) -> Result<bool> {
    Ok(decide_triple(p, q, tol)?.is_congruent())
}

/// The all-interior decider with the Cartan equality replaced by
/// `ρ(L_{p₁p₃}, p₂) = ρ(L_{q₁q₃}, q₂)`.
pub fn congruent_interior_triple_by_lines(p: &[ClosurePoint; 3], q: &[ClosurePoint; 3], tol: f64) -> Result<bool> {
    let values = |t: &[ClosurePoint; 3]| -> Result<Vec<f64>> {
        for x in t {
            if locate(x)? != Location::Interior {
                return Err(GeometryError::NotInterior);
            }
        }
        check_triple(t)?;
        let g = Geodesic::through(&t[0], &t[2])?;
        let (u, v) = g.endpoints();
        Ok(vec![
            cosh2_point_qline(&QLine::new(u, v)?, &t[1])?,
            cosh2_half_distance(&t[0], &t[1])?,
            cosh2_half_distance(&t[0], &t[2])?,
            cosh2_half_distance(&t[1], &t[2])?,
        ])
    };
    Ok(all_agree(&values(p)?, &values(q)?, tol))
}

// ── Maps fixing o and ∞ ──

fn finite(p: &ClosurePoint) -> Option<&[Quaternion]> {
    match p {
        ClosurePoint::Finite(c) => Some(c),
        ClosurePoint::Infinity => None,
    }
}

fn tail_sqr(c: &[Quaternion]) -> f64 {
    c[1..].iter().map(|q| q.norm_sqr()).sum()
}

/// `κ²` satisfying `Re w₁ = κ² Re z₁`, `|w₁| = κ²|z₁|`,
/// `Σ|wᵢ|² = κ² Σ|zᵢ|²`, if one exists.
fn dilation_factor(z: &[Quaternion], w: &[Quaternion], tol: f64) -> Option<f64> {
    let (zt, wt) = (tail_sqr(z), tail_sqr(w));
    let k2 = if z[0].norm() > tol {
        w[0].norm() / z[0].norm()
    } else if zt > tol {
        wt / zt
    } else {
        1.0
    };
    let ok = values_agree(w[0].re(), k2 * z[0].re(), tol)
        && values_agree(w[0].norm(), k2 * z[0].norm(), tol)
        && values_agree(wt, k2 * zt, tol)
        && k2 > 0.0;
    ok.then_some(k2)
}

fn witness_maps(h: &Isometry, from: &[ClosurePoint], to: &[ClosurePoint]) -> bool {
    from.iter().zip(to).all(|(a, b)| h.apply(a).is_ok_and(|x| x.approx_eq(b, WITNESS_TOL)))
}

/// `diag(κλ, A, λ/κ)` for unit `λ`.
fn o_infty_element(kappa: f64, lambda: Quaternion, a: &QMatrix) -> Option<Isometry> {
    Isometry::block_diag(lambda * kappa, a).ok()
}

fn map_o_infty_scaled(z: &ClosurePoint, w: &ClosurePoint, tol: f64, elliptic: bool) -> Option<Isometry> {
    let (zc, wc) = (finite(z)?, finite(w)?);
    if zc.len() != wc.len() {
        return None;
    }
    let k2 = if elliptic { 1.0 } else { dilation_factor(zc, wc, tol)? };
    if elliptic && dilation_factor(zc, wc, tol).is_none_or(|k| !values_agree(k, 1.0, tol)) {
        // κ = 1 must itself satisfy all three conditions
        let ok = values_agree(wc[0].re(), zc[0].re(), tol)
            && values_agree(wc[0].norm(), zc[0].norm(), tol)
            && values_agree(tail_sqr(wc), tail_sqr(zc), tol);
        if !ok {
            return None;
        }
    }
    let kappa = k2.sqrt();
    let lambda = aligning_rotation(zc[0], wc[0]);
    let target: Vec<Quaternion> = wc[1..].iter().map(|q| *q * lambda / kappa).collect();
    let a = linalg::householder_map(&zc[1..], &target);
    let h = o_infty_element(kappa, lambda, &a)?;
    witness_maps(&h, std::slice::from_ref(z), std::slice::from_ref(w)).then_some(h)
}

/// An `h ∈ G_{o,∞}` with `h(z) = w` for finite closure points, when the
/// dilation conditions admit a solution.
pub fn map_o_infty(z: &ClosurePoint, w: &ClosurePoint, tol: f64) -> Option<Isometry> {
    map_o_infty_scaled(z, w, tol, false)
}

/// As [`map_o_infty`] with `|μ| = 1`, i.e. fixing `γ_{o∞}` pointwise.
pub fn map_o_infty_elliptic(z: &ClosurePoint, w: &ClosurePoint, tol: f64) -> Option<Isometry> {
    map_o_infty_scaled(z, w, tol, true)
}

/// An isometry placing a canonical-order triple in standard position:
/// `p₁ = o, p₂ = ∞` for two boundary points, `p₁ = o, p₂ = (−1, 0, …)` for
/// one, `p₁ = (−1, 0, …)` on `γ_{o∞}` with `p₂` beyond it for none.
fn standard_position(p: &[ClosurePoint; 3], case: TripleCase) -> Result<Isometry> {
    let n = common_dim(p)?;
    let to_unit_height = |g: Isometry, x: &ClosurePoint| -> Result<Isometry> {
        let s = match g.apply(x)? {
            ClosurePoint::Finite(c) => -c[0].re(),
            ClosurePoint::Infinity => return Err(GeometryError::NotInterior),
        };
        Ok(Isometry::dilation(n, 1.0 / s.sqrt()).compose(&g))
    };
    match case {
        TripleCase::AllBoundary | TripleCase::TwoBoundary => Isometry::to_o_infty(&p[0], &p[1]),
        TripleCase::OneBoundary => {
            let g = Geodesic::from_boundary_through(&p[0], &p[1])?;
            let (u, v) = g.endpoints();
            to_unit_height(Isometry::to_o_infty(u, v)?, &p[1])
        }
        TripleCase::AllInterior => {
            let g = Geodesic::through(&p[0], &p[1])?;
            let (u, v) = g.endpoints();
            to_unit_height(Isometry::to_o_infty(u, v)?, &p[0])
        }
    }
}

/// An isometry with `h(pᵢ) = qᵢ`, built from standard positions and the
/// maps fixing `o` and `∞`; `None` when no such isometry exists.
pub fn triple_witness(p: &[ClosurePoint; 3], q: &[ClosurePoint; 3], tol: f64) -> Result<Option<Isometry>> {
    check_triple(p)?;
    check_triple(q)?;
    let pattern = pattern_of(p)?;
    if pattern != pattern_of(q)? {
        return Ok(None);
    }
    let perm = canonical_permutation(&pattern);
    let case = case_of(&permuted(&pattern, perm));
    let (pc, qc) = (permuted(p, perm), permuted(q, perm));
    let (fp, fq) = (standard_position(&pc, case)?, standard_position(&qc, case)?);
    let p_std: Vec<ClosurePoint> = pc.iter().map(|x| fp.apply(x)).collect::<Result<_>>()?;
    let q_std: Vec<ClosurePoint> = qc.iter().map(|x| fq.apply(x)).collect::<Result<_>>()?;
    let h = match case {
        TripleCase::AllBoundary | TripleCase::TwoBoundary => map_o_infty(&p_std[2], &q_std[2], tol),
        TripleCase::OneBoundary | TripleCase::AllInterior => {
            // the second point must already agree, and the map must fix it
            if !p_std[1].approx_eq(&q_std[1], tol.sqrt()) {
                return Ok(None);
            }
            map_o_infty_elliptic(&p_std[2], &q_std[2], tol)
        }
    };
    let Some(h) = h else { return Ok(None) };
    let w = fq.inverse().compose(&h).compose(&fp);
    Ok(witness_maps(&w, p, q).then_some(w))
}

// ── Quadruples ──

/// Agreement of the moduli coordinates `τ(p)` and `τ(q)`.
pub fn congruent_quadruple_gram(p: &[ClosurePoint; 4], q: &[ClosurePoint; 4], tol: f64) -> Result<bool> {
    let (a, b) = (tau(p)?, tau(q)?);
    let scale = 1.0 + a.magnitude_sqr().max(b.magnitude_sqr());
    Ok(a.max_dist(&b) <= tol * scale)
}

/// Similarity of `𝕏₁, 𝕏₂, 𝕏₃` and equality of `𝔸(p₁,p₂,p₃)`,
/// `𝔸(p₁,p₂,p₄)`, `𝔸(p₂,p₃,p₄)`.
pub fn congruent_quadruple_invariants(p: &[ClosurePoint; 4], q: &[ClosurePoint; 4], tol: f64) -> Result<bool> {
    boundary_quadruple_lifts(p)?;
    boundary_quadruple_lifts(q)?;
    let (xp, xq) = (cross_ratios(p)?, cross_ratios(q)?);
    let similar_all = [(xp.x1, xq.x1), (xp.x3, xq.x3), (xp.x2, xq.x2)].iter().all(|(a, b)| similar(*a, *b, tol));
    let angles = |t: &[ClosurePoint; 4]| -> Result<[f64; 3]> {
        Ok([cartan(&t[0], &t[1], &t[2])?, cartan(&t[0], &t[1], &t[3])?, cartan(&t[1], &t[2], &t[3])?])
    };
    let (ap, aq) = (angles(p)?, angles(q)?);
    Ok(similar_all && all_agree(&ap, &aq, tol))
}

/// A unit `λ` with `λ aᵢ λ⁻¹ = bᵢ` for every pair, if one exists. The pair
/// with the largest imaginary part fixes the axis; the first other pair with
/// a part off that axis fixes the angle about it.
fn joint_rotation(a: &[Quaternion], b: &[Quaternion], tol: f64) -> Option<Quaternion> {
    let first = (0..a.len()).max_by(|&i, &j| a[i].im_norm().total_cmp(&a[j].im_norm()))?;
    let l1 = aligning_rotation(a[first], b[first]);
    let lambda = match b[first].im().unit() {
        Some(axis) => {
            let off_axis = (0..a.len()).filter(|&i| i != first).find_map(|i| {
                let (pm, pb) = (reject_axis(l1.conjugate_by(a[i]).im(), axis), reject_axis(b[i].im(), axis));
                (pm.norm() > tol && pb.norm() > tol).then_some((pm, pb))
            });
            match off_axis {
                Some((pm, pb)) => {
                    let cross = pm * pb;
                    // for pure quaternions, p q = −p·q + p×q
                    let theta = dot(axis, cross.im()).atan2(-cross.re());
                    Quaternion::from_polar(theta / 2.0, crate::quat::UnitImaginary::new(axis.im_vec())?) * l1
                }
                None => l1,
            }
        }
        None => l1,
    };
    let ok = a.iter().zip(b).all(|(x, y)| lambda.conjugate_by(*x).dist(*y) <= tol * (1.0 + y.norm()));
    ok.then_some(lambda)
}

fn dot(u: Quaternion, v: Quaternion) -> f64 {
    u.a1 * v.a1 + u.a2 * v.a2 + u.a3 * v.a3
}

fn reject_axis(v: Quaternion, axis: Quaternion) -> Quaternion {
    v - axis * dot(v, axis)
}

/// Orthonormal basis of `ℍᵐ` whose leading vectors span `xs`, with the
/// coordinates of each `x` in it.
fn adapted_frame(xs: &[Vec<Quaternion>], m: usize, tol: f64) -> (Vec<Vec<Quaternion>>, Vec<Vec<Quaternion>>) {
    let mut basis: Vec<Vec<Quaternion>> = Vec::with_capacity(m);
    let mut coords = Vec::with_capacity(xs.len());
    let unit = |i: usize| (0..m).map(|j| if i == j { Quaternion::ONE } else { Quaternion::ZERO }).collect::<Vec<_>>();
    for (k, c) in xs.iter().cloned().chain((0..m).map(unit)).enumerate() {
        let mut v = c.clone();
        let mut coef = vec![Quaternion::ZERO; m];
        for _ in 0..2 {
            for (e, cf) in basis.iter().zip(coef.iter_mut()) {
                let h = linalg::herm(e, &v);
                *cf += h;
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= *ei * h;
                }
            }
        }
        let r = linalg::norm(&v);
        let fresh = basis.len() < m && r > tol * (1.0 + linalg::norm(&c));
        if fresh {
            coef[basis.len()] = Quaternion::real(r);
            basis.push(v.into_iter().map(|q| q / r).collect());
        }
        if k < xs.len() {
            coords.push(coef);
        }
    }
    (basis, coords)
}

/// A unitary `A` with `A xᵢ = yᵢ`, if the two families have the same
/// Hermitian Gram data.
fn unitary_mapping(xs: &[Vec<Quaternion>], ys: &[Vec<Quaternion>], tol: f64) -> Option<QMatrix> {
    let m = xs.first()?.len();
    let (bx, cx) = adapted_frame(xs, m, tol);
    let (by, cy) = adapted_frame(ys, m, tol);
    let same =
        cx.iter().zip(&cy).all(|(a, b)| a.iter().zip(b).all(|(s, t)| s.dist(*t) <= tol.sqrt() * (1.0 + s.norm())));
    if !same || bx.len() != m || by.len() != m {
        return None;
    }
    Some(linalg::mat_mul(&linalg::from_columns(&by), &linalg::adjoint(&linalg::from_columns(&bx))))
}

/// An isometry with `h(pᵢ) = qᵢ` for boundary quadruples, following the
/// standard position `p₁ = o`, `p₂ = ∞`; `None` when none exists.
pub fn quadruple_witness(p: &[ClosurePoint; 4], q: &[ClosurePoint; 4], tol: f64) -> Result<Option<Isometry>> {
    boundary_quadruple_lifts(p)?;
    boundary_quadruple_lifts(q)?;
    let (fp, fq) = (Isometry::to_o_infty(&p[0], &p[1])?, Isometry::to_o_infty(&q[0], &q[1])?);
    let std_of = |f: &Isometry, t: &[ClosurePoint; 4]| -> Result<[Vec<Quaternion>; 2]> {
        let a = f.apply(&t[2])?;
        let b = f.apply(&t[3])?;
        match (finite(&a), finite(&b)) {
            (Some(x), Some(y)) => Ok([x.to_vec(), y.to_vec()]),
            _ => Err(GeometryError::CoincidentPoints),
        }
    };
    let ([r, s], [z, w]) = (std_of(&fp, p)?, std_of(&fq, q)?);
    let k2 = if r[0].norm() > tol { z[0].norm() / r[0].norm() } else { 1.0 };
    let kappa = k2.sqrt();
    // λ also carries the tail product: ⟨z', w'⟩ = λ⁻¹⟨z, w⟩λ/κ² must equal ⟨r, s⟩
    let a = [r[0] * k2, s[0] * k2, linalg::herm(&r[1..], &s[1..]) * k2];
    let Some(lambda) = joint_rotation(&a, &[z[0], w[0], linalg::herm(&z[1..], &w[1..])], tol.sqrt()) else {
        return Ok(None);
    };
    let scaled = |v: &[Quaternion]| v[1..].iter().map(|x| *x * lambda / kappa).collect::<Vec<_>>();
    let Some(mat) = unitary_mapping(&[r[1..].to_vec(), s[1..].to_vec()], &[scaled(&z), scaled(&w)], tol) else {
        return Ok(None);
    };
    let Some(h) = o_infty_element(kappa, lambda, &mat) else { return Ok(None) };
    let h = fq.inverse().compose(&h).compose(&fp);
    Ok(witness_maps(&h, p, q).then_some(h))
}

/// `⟨p₃, p₄⟩` on standard lifts, used to set up mirrored configurations.
pub fn standard_pairing(p: &ClosurePoint, q: &ClosurePoint) -> Result<Quaternion> {
    let l = configuration_lifts(&[p.clone(), q.clone()])?;
    Ok(form(&l[0], &l[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hform::{random_boundary_point, random_interior_point, random_isometry, random_quaternion};
    use crate::moduli::random_boundary_quadruple;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(c: &[Quaternion]) -> ClosurePoint {
        ClosurePoint::Finite(c.to_vec())
    }

    fn q(a0: f64, a1: f64, a2: f64, a3: f64) -> Quaternion {
        Quaternion::new(a0, a1, a2, a3)
    }

    fn random_point(n: usize, loc: Location, rng: &mut ChaCha8Rng) -> ClosurePoint {
        match loc {
            Location::Boundary => random_boundary_point(n, rng),
            _ => random_interior_point(n, rng),
        }
    }

    fn apply3(g: &Isometry, p: &[ClosurePoint; 3]) -> [ClosurePoint; 3] {
        [0, 1, 2].map(|i| g.apply(&p[i]).unwrap())
    }

    fn all_patterns() -> Vec<[Location; 3]> {
        use Location::{Boundary as B, Interior as H};
        let mut out = Vec::new();
        for a in [B, H] {
            for b in [B, H] {
                for c in [B, H] {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }

    #[test]
    fn canonical_permutation_is_stable() {
        use Location::{Boundary as B, Interior as H};
        assert_eq!(canonical_permutation(&[H, B, H]), [1, 0, 2]);
        assert_eq!(canonical_permutation(&[H, B, B]), [1, 2, 0]);
        assert_eq!(canonical_permutation(&[B, H, B]), [0, 2, 1]);
        assert_eq!(case_of(&[H, H, B]), TripleCase::OneBoundary);
    }

    #[test]
    fn orbit_example_is_congruent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 3;
        let p = [
            ClosurePoint::origin(n),
            ClosurePoint::Infinity,
            pt(&[q(-1.0, 0.0, 0.0, 0.0), q(2f64.sqrt(), 0.0, 0.0, 0.0), Quaternion::ZERO]),
        ];
        for _ in 0..20 {
            let g = random_isometry(n, &mut rng);
            assert_eq!(decide_triple(&p, &apply3(&g, &p), CONGRUENCE_TOL).unwrap(), Verdict::Congruent);
        }
    }

    #[test]
    fn pattern_mismatch_example() {
        let n = 2;
        let p = [
            ClosurePoint::origin(n),
            ClosurePoint::Infinity,
            pt(&[q(-1.0, 0.0, 0.0, 0.0), q(6f64.sqrt() / 2.0, 0.0, 0.0, 0.0)]),
        ];
        let qq = [
            ClosurePoint::origin(n),
            ClosurePoint::Infinity,
            pt(&[q(-1.0, 0.0, 0.0, 0.0), q(0.0, 2f64.sqrt(), 0.0, 0.0)]),
        ];
        assert!(cartan(&p[0], &p[1], &p[2]).unwrap().abs() < 1e-12);
        assert!(cartan(&qq[0], &qq[1], &qq[2]).unwrap().abs() < 1e-12);
        assert_eq!(decide_triple(&p, &qq, CONGRUENCE_TOL).unwrap(), Verdict::PatternMismatch);
        assert!(triple_witness(&p, &qq, 1e-9).unwrap().is_none());
    }

    #[test]
    fn cartan_invariant_is_not_enough_in_one_boundary_case() {
        let n = 2;
        let mid = pt(&[q(-1.0, 0.0, 0.0, 0.0), Quaternion::ZERO]);
        let p =
            [ClosurePoint::origin(n), mid.clone(), pt(&[q(-1.0, 1.0, 0.0, 0.0), q(6f64.sqrt() / 2.0, 0.0, 0.0, 0.0)])];
        let qq = [ClosurePoint::origin(n), mid, pt(&[q(-0.4, 0.2, 0.0, 0.0), q(15f64.sqrt() / 5.0, 0.0, 0.0, 0.0)])];
        let sp = triple_signature(&p).unwrap();
        let sq = triple_signature(&qq).unwrap();
        // the distance to L_{p₁p₂} and to p₂ agree, as does the Cartan invariant
        assert!(values_agree(sp.invariants[0], sq.invariants[0], 1e-12));
        assert!(values_agree(sp.invariants[2], sq.invariants[2], 1e-12));
        let a = |t: &[ClosurePoint; 3]| cartan(&t[0], &t[1], &t[2]).unwrap();
        assert!((a(&p) - a(&qq)).abs() < 1e-12);
        assert_eq!(decide_triple(&p, &qq, CONGRUENCE_TOL).unwrap(), Verdict::InvariantMismatch);
        assert!(triple_witness(&p, &qq, 1e-9).unwrap().is_none());
    }

    #[test]
    fn map_o_infty_dilation_example() {
        let z = pt(&[q(-1.0, 0.0, 0.0, 0.0), q(1.0, 0.0, 0.0, 0.0), Quaternion::ZERO]);
        let w = pt(&[q(-4.0, 0.0, 0.0, 0.0), q(2.0, 0.0, 0.0, 0.0), Quaternion::ZERO]);
        let h = map_o_infty(&z, &w, 1e-9).unwrap();
        assert!(h.apply(&z).unwrap().approx_eq(&w, 1e-12));
        let expect = Isometry::dilation(3, 2.0);
        for (r, s) in h.rows().iter().zip(expect.rows()) {
            for (a, b) in r.iter().zip(s) {
                assert!(a.dist(*b) < 1e-12);
            }
        }
        let id = map_o_infty(&z, &z, 1e-9).unwrap();
        assert!(id
            .rows()
            .iter()
            .zip(Isometry::identity(3).rows())
            .all(|(r, s)| r.iter().zip(s).all(|(a, b)| a.dist(*b) < 1e-12)));
        assert!(map_o_infty_elliptic(&z, &w, 1e-9).is_none());
    }

    #[test]
    fn map_o_infty_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 2..5 {
            for _ in 0..30 {
                let z = random_point(n, Location::Interior, &mut rng);
                let g = Isometry::block_diag(
                    random_quaternion(&mut rng, 1.5),
                    &crate::hform::random_unitary(n - 1, &mut rng),
                )
                .unwrap();
                let w = g.apply(&z).unwrap();
                let h = map_o_infty(&z, &w, 1e-9).unwrap();
                assert!(h.defect() < 1e-9);
                assert!(h.apply(&ClosurePoint::origin(n)).unwrap().approx_eq(&ClosurePoint::origin(n), 1e-12));
                assert!(h.apply(&ClosurePoint::Infinity).unwrap().is_infinity());
                let u = crate::hform::random_unit_quaternion(&mut rng);
                let e = Isometry::block_diag(u, &crate::hform::random_unitary(n - 1, &mut rng)).unwrap();
                let we = e.apply(&z).unwrap();
                let he = map_o_infty_elliptic(&z, &we, 1e-9).unwrap();
                assert!(he.apply(&z).unwrap().approx_eq(&we, 1e-9));
                assert!((he.rows()[0][0].norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orbits_are_congruent_in_every_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3] {
            for pattern in all_patterns() {
                for _ in 0..15 {
                    let p = pattern.map(|l| random_point(n, l, &mut rng));
                    let g = random_isometry(n, &mut rng);
                    let gp = apply3(&g, &p);
                    assert_eq!(decide_triple(&p, &gp, CONGRUENCE_TOL).unwrap(), Verdict::Congruent, "{pattern:?}");
                    let w = triple_witness(&p, &gp, 1e-9).unwrap().expect("witness");
                    assert!(w.defect() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn decider_matches_witness_search_on_independent_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for pattern in all_patterns() {
            for _ in 0..20 {
                let p = pattern.map(|l| random_point(2, l, &mut rng));
                let qq = pattern.map(|l| random_point(2, l, &mut rng));
                let verdict = congruent_triple(&p, &qq, CONGRUENCE_TOL).unwrap();
                let witness = triple_witness(&p, &qq, 1e-9).unwrap().is_some();
                assert_eq!(verdict, witness, "{pattern:?}");
            }
        }
    }

    #[test]
    fn lines_replace_cartan_for_interior_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let p = [(); 3].map(|_| random_interior_point(3, &mut rng));
            let g = random_isometry(3, &mut rng);
            let gp = apply3(&g, &p);
            assert!(congruent_interior_triple_by_lines(&p, &gp, CONGRUENCE_TOL).unwrap());
            let qq = [(); 3].map(|_| random_interior_point(3, &mut rng));
            assert_eq!(
                congruent_interior_triple_by_lines(&p, &qq, CONGRUENCE_TOL).unwrap(),
                congruent_triple(&p, &qq, CONGRUENCE_TOL).unwrap()
            );
        }
    }

    #[test]
    fn quadruple_deciders_on_orbits_and_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [2, 3] {
            for _ in 0..30 {
                let p = random_boundary_quadruple(n, &mut rng);
                let g = random_isometry(n, &mut rng);
                let gp = [0, 1, 2, 3].map(|i| g.apply(&p[i]).unwrap());
                assert!(congruent_quadruple_gram(&p, &gp, CONGRUENCE_TOL).unwrap());
                assert!(congruent_quadruple_invariants(&p, &gp, CONGRUENCE_TOL).unwrap());
                let w = quadruple_witness(&p, &gp, 1e-9).unwrap().expect("witness");
                assert!(w.defect() < 1e-8);

                let mut swapped = gp.clone();
                swapped.swap(2, 3);
                assert!(!congruent_quadruple_gram(&p, &swapped, CONGRUENCE_TOL).unwrap());
                assert!(!congruent_quadruple_invariants(&p, &swapped, CONGRUENCE_TOL).unwrap());
                assert!(quadruple_witness(&p, &swapped, 1e-9).unwrap().is_none());
            }
        }
    }

    #[test]
    fn perturbed_fourth_point_is_separated() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_boundary_quadruple(2, &mut rng);
            let ClosurePoint::Finite(c) = &p[3] else { continue };
            let mut c = c.clone();
            c[0] += Quaternion::new(0.0, 1e-2, 0.0, 0.0);
            let mut moved = p.clone();
            moved[3] = ClosurePoint::Finite(c);
            assert!(moved[3].is_boundary());
            assert!(!congruent_quadruple_gram(&p, &moved, CONGRUENCE_TOL).unwrap());
        }
    }

    #[test]
    fn joint_rotation_recovers_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let a = [random_quaternion(&mut rng, 1.0), random_quaternion(&mut rng, 1.0)];
            let mu = crate::hform::random_unit_quaternion(&mut rng);
            let b = a.map(|x| mu.conjugate_by(x));
            let l = joint_rotation(&a, &b, 1e-9).unwrap();
            for i in 0..2 {
                assert!(l.conjugate_by(a[i]).dist(b[i]) < 1e-12);
            }
        }
        let a = [Quaternion::I, Quaternion::J];
        assert!(joint_rotation(&a, &[Quaternion::I, Quaternion::K * 2.0], 1e-9).is_none());
        let a = [Quaternion::I, Quaternion::real(2.0), Quaternion::J];
        let mu = Quaternion::new(1.0, 2.0, -1.0, 0.5).unit().unwrap();
        let b = a.map(|x| mu.conjugate_by(x));
        let l = joint_rotation(&a, &b, 1e-9).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| l.conjugate_by(*x).dist(*y) < 1e-12));
    }

    #[test]
    fn rejects_exterior_and_coincident_points() {
        let n = 2;
        let ext = pt(&[q(1.0, 0.0, 0.0, 0.0), Quaternion::ZERO]);
        let o = ClosurePoint::origin(n);
        let p = [o.clone(), ClosurePoint::Infinity, ext];
        assert_eq!(decide_triple(&p, &p, 1e-9), Err(GeometryError::ExteriorPoint));
        let d = [o.clone(), o, ClosurePoint::Infinity];
        assert_eq!(decide_triple(&d, &d, 1e-9), Err(GeometryError::CoincidentPoints));
    }
}
