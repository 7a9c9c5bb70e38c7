//! The right quaternionic vector space `ℍ^{n,1}`, its projectivization onto
//! the Siegel domain and its boundary, the Bergman metric, and `Sp(n,1)`.

use std::ops::{Add, Mul, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::linalg::{self, QMatrix};
use crate::quat::{Quaternion, DEFAULT_EPS};

/// A lift: an `(n+1)`-tuple of quaternions, `n ≥ 2`, not all zero.
/// Scalars act on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Quaternion>", into = "Vec<Quaternion>")]
pub struct HVector {
    coords: Vec<Quaternion>,
}

impl TryFrom<Vec<Quaternion>> for HVector {
    type Error = GeometryError;
    fn try_from(coords: Vec<Quaternion>) -> Result<Self> {
        HVector::new(coords)
    }
}

impl From<HVector> for Vec<Quaternion> {
    fn from(v: HVector) -> Self {
        v.coords
    }
}

impl HVector {
    pub fn new(coords: Vec<Quaternion>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(GeometryError::DimensionTooSmall(coords.len().saturating_sub(1)));
        }
        if coords.iter().all(|q| *q == Quaternion::ZERO) {
            return Err(GeometryError::ZeroVector);
        }
        Ok(HVector { coords })
    }

    /// Builds a vector without the nonzero check, for intermediate results.
    pub(crate) fn raw(coords: Vec<Quaternion>) -> Self {
        HVector { coords }
    }

    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[Quaternion] {
        &self.coords
    }

    pub fn first(&self) -> Quaternion {
        self.coords[0]
    }

    pub fn last(&self) -> Quaternion {
        self.coords[self.coords.len() - 1]
    }

    /// The middle coordinates `z₂, …, z_n`.
    pub fn middle(&self) -> &[Quaternion] {
        &self.coords[1..self.coords.len() - 1]
    }

    /// `z · λ`.
    pub fn right_mul(&self, lambda: Quaternion) -> HVector {
        HVector::raw(self.coords.iter().map(|z| *z * lambda).collect())
    }

    pub fn scale(&self, s: f64) -> HVector {
        HVector::raw(self.coords.iter().map(|z| *z * s).collect())
    }

    /// Euclidean length of the coordinate vector.
    pub fn euclid_norm(&self) -> f64 {
        linalg::norm(&self.coords)
    }

    /// `⟨z, w⟩ = w̄₁ z_{n+1} + Σ w̄ᵢ zᵢ + w̄_{n+1} z₁`.
    pub fn inner(&self, w: &HVector) -> Result<Quaternion> {
        if self.n() != w.n() {
            return Err(GeometryError::DimensionMismatch { expected: self.n(), found: w.n() });
        }
        Ok(form(self, w))
    }

    /// The real number `⟨z, z⟩ = 2 Re(z̄_{n+1} z₁) + Σ |zᵢ|²`.
    pub fn quadratic(&self) -> f64 {
        2.0 * (self.last().conj() * self.first()).re() + self.middle().iter().map(|q| q.norm_sqr()).sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|q| q.is_finite())
    }
}

impl Add for &HVector {
    type Output = HVector;
    fn add(self, w: &HVector) -> HVector {
        HVector::raw(self.coords.iter().zip(&w.coords).map(|(a, b)| *a + *b).collect())
    }
}

impl Sub for &HVector {
    type Output = HVector;
    fn sub(self, w: &HVector) -> HVector {
        HVector::raw(self.coords.iter().zip(&w.coords).map(|(a, b)| *a - *b).collect())
    }
}

/// The Hermitian form without the dimension check.
pub(crate) fn form(z: &HVector, w: &HVector) -> Quaternion {
    let (zc, wc) = (&z.coords, &w.coords);
    let last = zc.len() - 1;
    let mut acc = wc[0].conj() * zc[last] + wc[last].conj() * zc[0];
    for i in 1..last {
        acc += wc[i].conj() * zc[i];
    }
    acc
}

/// `⟨z, w⟩`.
pub fn inner(z: &HVector, w: &HVector) -> Result<Quaternion> {
    z.inner(w)
}

/// Sign of `⟨z, z⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Null,
    Positive,
}

/// Sign of `⟨z, z⟩` with dead band `eps · Σ|zᵢ|²` around zero.
pub fn classify(z: &HVector, eps: f64) -> Sign {
    let q = z.quadratic();
    let band = eps * z.euclid_norm().powi(2);
    if q < -band {
        Sign::Negative
    } else if q > band {
        Sign::Positive
    } else {
        Sign::Null
    }
}

/// Where a finite point or `∞` sits relative to the Siegel domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Interior,
    Boundary,
    Exterior,
}

/// A point of the closure `H_ℍⁿ ∪ ∂H_ℍⁿ`: finite coordinates in `ℍⁿ`, or `∞`.
///
/// JSON: `{"inf": true}` or `{"coords": [[a0,a1,a2,a3], …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub enum ClosurePoint {
    Finite(Vec<Quaternion>),
    Infinity,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum PointRepr {
    Inf { inf: bool },
    Finite { coords: Vec<Quaternion> },
}

impl TryFrom<PointRepr> for ClosurePoint {
    type Error = String;
    fn try_from(r: PointRepr) -> std::result::Result<Self, String> {
        match r {
            PointRepr::Inf { inf: true } => Ok(ClosurePoint::Infinity),
            PointRepr::Inf { inf: false } => Err("\"inf\" must be true".into()),
            PointRepr::Finite { coords } if coords.len() >= 2 => Ok(ClosurePoint::Finite(coords)),
            PointRepr::Finite { coords } => {
                Err(format!("a point needs at least 2 coordinates, found {}", coords.len()))
            }
        }
    }
}

impl From<ClosurePoint> for PointRepr {
    fn from(p: ClosurePoint) -> Self {
        match p {
            ClosurePoint::Infinity => PointRepr::Inf { inf: true },
            ClosurePoint::Finite(coords) => PointRepr::Finite { coords },
        }
    }
}

impl ClosurePoint {
    /// The origin `o = (0, …, 0)`.
    pub fn origin(n: usize) -> Self {
        ClosurePoint::Finite(vec![Quaternion::ZERO; n])
    }

    pub fn finite<Q: Into<Quaternion>, I: IntoIterator<Item = Q>>(coords: I) -> Self {
        ClosurePoint::Finite(coords.into_iter().map(Into::into).collect())
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            ClosurePoint::Finite(c) => Some(c.len()),
            ClosurePoint::Infinity => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ClosurePoint::Infinity)
    }

    /// `(z; 1)` for finite `z`, `(−1, 0, …, 0)` for `∞`.
    pub fn lift(&self, n: usize) -> Result<HVector> {
        match self {
            ClosurePoint::Infinity => {
                let mut c = vec![Quaternion::ZERO; n + 1];
                c[0] = -Quaternion::ONE;
                HVector::new(c)
            }
            ClosurePoint::Finite(z) if z.len() == n => {
                let mut c = z.clone();
                c.push(Quaternion::ONE);
                HVector::new(c)
            }
            ClosurePoint::Finite(z) => Err(GeometryError::DimensionMismatch { expected: n, found: z.len() }),
        }
    }

    /// Boundary test with dead band `eps · (1 + Σ|zᵢ|²)` on `2Re(z₁) + Σ_{i≥2}|zᵢ|²`.
    pub fn location(&self, eps: f64) -> Location {
        let ClosurePoint::Finite(z) = self else {
            return Location::Boundary;
        };
        let tail: f64 = z[1..].iter().map(|q| q.norm_sqr()).sum();
        let q = 2.0 * z[0].re() + tail;
        let band = eps * (1.0 + tail + z[0].norm_sqr());
        if q < -band {
            Location::Interior
        } else if q <= band {
            Location::Boundary
        } else {
            Location::Exterior
        }
    }

    pub fn is_boundary(&self) -> bool {
        self.location(DEFAULT_EPS) == Location::Boundary
    }

    pub fn is_interior(&self) -> bool {
        self.location(DEFAULT_EPS) == Location::Interior
    }

    /// Coordinatewise comparison relative to `1 + max(|z|, |w|)`.
    pub fn approx_eq(&self, other: &ClosurePoint, tol: f64) -> bool {
        match (self, other) {
            (ClosurePoint::Infinity, ClosurePoint::Infinity) => true,
            (ClosurePoint::Finite(a), ClosurePoint::Finite(b)) if a.len() == b.len() => {
                let scale = 1.0 + linalg::norm(a).max(linalg::norm(b));
                a.iter().zip(b).all(|(x, y)| x.dist(*y) <= tol * scale)
            }
            _ => false,
        }
    }
}

/// The standard lift of `p` in `ℍ^{n,1}`.
pub fn standard_lift(p: &ClosurePoint, n: usize) -> Result<HVector> {
    p.lift(n)
}

/// The common dimension of a configuration; at least one point must be finite.
pub fn common_dim(points: &[ClosurePoint]) -> Result<usize> {
    let mut dim = None;
    for p in points {
        if let Some(d) = p.dim() {
            match dim {
                None => dim = Some(d),
                Some(e) if e != d => return Err(GeometryError::DimensionMismatch { expected: e, found: d }),
                _ => {}
            }
        }
    }
    let n = dim.ok_or(GeometryError::CoincidentPoints)?;
    if n < 2 {
        return Err(GeometryError::DimensionTooSmall(n));
    }
    Ok(n)
}

/// Standard lifts of every point, after checking that they are pairwise
/// distinct and lie in the closure.
pub fn configuration_lifts(points: &[ClosurePoint]) -> Result<Vec<HVector>> {
    let n = common_dim(points)?;
    for (i, p) in points.iter().enumerate() {
        if p.location(DEFAULT_EPS) == Location::Exterior {
            return Err(GeometryError::ExteriorPoint);
        }
        if points[..i].iter().any(|q| q.approx_eq(p, DEFAULT_EPS)) {
            return Err(GeometryError::CoincidentPoints);
        }
    }
    points.iter().map(|p| p.lift(n)).collect()
}

/// `P(z) = (z₁ z_{n+1}⁻¹, …, z_n z_{n+1}⁻¹)`, or `∞` for `(z₁, 0, …, 0)`.
pub fn project(z: &HVector) -> Result<ClosurePoint> {
    project_with(z, DEFAULT_EPS)
}

pub fn project_with(z: &HVector, eps: f64) -> Result<ClosurePoint> {
    let scale = z.euclid_norm();
    if scale == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    if classify(z, eps) == Sign::Positive {
        return Err(GeometryError::PositiveVector);
    }
    let last = z.last();
    if last.norm() <= eps * scale {
        if z.middle().iter().all(|q| q.norm() <= eps * scale) {
            return Ok(ClosurePoint::Infinity);
        }
        return Err(GeometryError::IllDefinedProjection);
    }
    let inv = last.recip();
    Ok(ClosurePoint::Finite(z.coords()[..z.n()].iter().map(|q| *q * inv).collect()))
}

fn interior_lifts(z: &ClosurePoint, w: &ClosurePoint) -> Result<(HVector, HVector)> {
    for p in [z, w] {
        if p.location(DEFAULT_EPS) != Location::Interior {
            return Err(GeometryError::NotInterior);
        }
    }
    let n = common_dim(&[z.clone(), w.clone()])?;
    Ok((z.lift(n)?, w.lift(n)?))
}

/// Bergman distance `ρ(z, w)` between interior points.
pub fn bergman_distance(z: &ClosurePoint, w: &ClosurePoint) -> Result<f64> {
    let (a, b) = interior_lifts(z, w)?;
    bergman_distance_lifts(&a, &b)
}

/// `cosh²(ρ/2) = ⟨z,w⟩⟨w,z⟩ / (⟨z,z⟩⟨w,w⟩)`.
pub fn cosh2_half_distance(z: &ClosurePoint, w: &ClosurePoint) -> Result<f64> {
    let (a, b) = interior_lifts(z, w)?;
    Ok(form(&a, &b).norm_sqr() / (a.quadratic() * b.quadratic()))
}

/// Bergman distance between negative lifts.
///
/// With both lifts scaled to `⟨z,z⟩ = ⟨w,w⟩ = −1` and `w` rotated so that
/// `⟨z,w⟩ = −cosh(ρ/2)`, the difference `d = z − w` has
/// `⟨d,d⟩ = 4 sinh²(ρ/4)`, which stays accurate for nearby points.
pub fn bergman_distance_lifts(z: &HVector, w: &HVector) -> Result<f64> {
    if z.n() != w.n() {
        return Err(GeometryError::DimensionMismatch { expected: z.n(), found: w.n() });
    }
    let (qz, qw) = (z.quadratic(), w.quadratic());
    if qz >= 0.0 || qw >= 0.0 {
        return Err(GeometryError::NotInterior);
    }
    let zn = z.scale(1.0 / (-qz).sqrt());
    let wn = w.scale(1.0 / (-qw).sqrt());
    let ip = form(&zn, &wn);
    let mu = match ip.unit() {
        Some(u) => -u,
        None => return Err(GeometryError::ZeroInnerProduct),
    };
    let d = &zn - &wn.right_mul(mu);
    let dd = d.quadratic().max(0.0);
    Ok(4.0 * (dd.sqrt() / 2.0).asinh())
}

/// An element of `Sp(n,1)`: an `(n+1)×(n+1)` quaternion matrix with `g*Jg = J`.
///
/// JSON: row-major nested arrays of quaternions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QMatrix", into = "QMatrix")]
pub struct Isometry {
    rows: QMatrix,
}

impl TryFrom<QMatrix> for Isometry {
    type Error = GeometryError;
    fn try_from(rows: QMatrix) -> Result<Self> {
        Isometry::new(rows, DEFAULT_EPS)
    }
}

impl From<Isometry> for QMatrix {
    fn from(g: Isometry) -> Self {
        g.rows
    }
}

/// The matrix `J` of the form in dimension `n`.
pub fn form_matrix(n: usize) -> QMatrix {
    let mut j = linalg::identity(n + 1);
    j[0][0] = Quaternion::ZERO;
    j[n][n] = Quaternion::ZERO;
    j[0][n] = Quaternion::ONE;
    j[n][0] = Quaternion::ONE;
    j
}

fn is_square(rows: &QMatrix) -> bool {
    rows.iter().all(|r| r.len() == rows.len())
}

/// Largest entrywise deviation of `g*Jg` from `J`, or `None` if the matrix
/// is not square of size at least 3.
pub fn isometry_defect(rows: &QMatrix) -> Option<f64> {
    if rows.len() < 3 || !is_square(rows) {
        return None;
    }
    let n = rows.len() - 1;
    let j = form_matrix(n);
    let p = linalg::mat_mul(&linalg::adjoint(rows), &linalg::mat_mul(&j, rows));
    Some(p.iter().zip(&j).flat_map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.dist(*y))).fold(0.0, f64::max))
}

/// Entrywise `|g*Jg − J| ≤ tol`.
pub fn is_isometry(rows: &QMatrix, tol: f64) -> bool {
    isometry_defect(rows).is_some_and(|d| d <= tol)
}

impl Isometry {
    /// Accepts `rows` when `g*Jg = J` within `tol · max(1, max|gᵢⱼ|²)`.
    pub fn new(rows: QMatrix, tol: f64) -> Result<Self> {
        let defect = isometry_defect(&rows).ok_or(GeometryError::NotIsometry)?;
        let scale = rows.iter().flatten().map(|q| q.norm_sqr()).fold(1.0, f64::max);
        if defect > tol * scale {
            return Err(GeometryError::NotIsometry);
        }
        Ok(Isometry { rows })
    }

    fn unchecked(rows: QMatrix) -> Self {
        Isometry { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn rows(&self) -> &QMatrix {
        &self.rows
    }

    pub fn identity(n: usize) -> Self {
        Isometry::unchecked(linalg::identity(n + 1))
    }

    /// `J` itself, swapping `o` and `∞`.
    pub fn swap(n: usize) -> Self {
        Isometry::unchecked(form_matrix(n))
    }

    /// `diag(κ, I, 1/κ)`, acting as `z ↦ κ² z₁, κ z'` on finite points.
    pub fn dilation(n: usize, kappa: f64) -> Self {
        let mut m = linalg::identity(n + 1);
        m[0][0] = Quaternion::real(kappa);
        m[n][n] = Quaternion::real(1.0 / kappa);
        Isometry::unchecked(m)
    }

    /// `diag(μ, A, μ̄⁻¹)` with `A*A = I`. Fails unless `A` is unitary of size
    /// `n − 1` and `μ` is invertible.
    pub fn block_diag(mu: Quaternion, a: &QMatrix) -> Result<Self> {
        let n = a.len() + 1;
        if n < 2 {
            return Err(GeometryError::DimensionTooSmall(n));
        }
        if !is_square(a) || linalg::unitarity_defect(a) > 1e-9 {
            return Err(GeometryError::NotIsometry);
        }
        let mu_inv_bar = mu.conj().inv()?;
        let mut m = linalg::identity(n + 1);
        m[0][0] = mu;
        m[n][n] = mu_inv_bar;
        for (i, row) in a.iter().enumerate() {
            m[i + 1][1..n].copy_from_slice(row);
        }
        Ok(Isometry::unchecked(m))
    }

    /// The Heisenberg translation `[[1, −c*, b], [0, I, c], [0, 0, 1]]` taking
    /// `o` to the boundary point `(b, c)`; requires `2Re(b) + |c|² = 0`.
    pub fn translation(b: Quaternion, c: &[Quaternion]) -> Result<Self> {
        let n = c.len() + 1;
        if n < 2 {
            return Err(GeometryError::DimensionTooSmall(n));
        }
        let c2: f64 = c.iter().map(|q| q.norm_sqr()).sum();
        if (2.0 * b.re() + c2).abs() > DEFAULT_EPS * (1.0 + c2 + b.norm_sqr()) {
            return Err(GeometryError::NotBoundary);
        }
        let mut m = linalg::identity(n + 1);
        m[0][n] = b;
        for (i, ci) in c.iter().enumerate() {
            m[0][i + 1] = -ci.conj();
            m[i + 1][n] = *ci;
        }
        Ok(Isometry::unchecked(m))
    }

    /// The translation taking `o` to the finite boundary point `p`.
    pub fn translation_to(p: &ClosurePoint) -> Result<Self> {
        match p {
            ClosurePoint::Finite(z) if p.is_boundary() => {
                // put the point exactly on the boundary before building the matrix
                let c2: f64 = z[1..].iter().map(|q| q.norm_sqr()).sum();
                let b = Quaternion::new(-c2 / 2.0, z[0].a1, z[0].a2, z[0].a3);
                Isometry::translation(b, &z[1..])
            }
            _ => Err(GeometryError::NotBoundary),
        }
    }

    /// `g⁻¹ = J g* J`.
    pub fn inverse(&self) -> Self {
        let j = form_matrix(self.n());
        Isometry::unchecked(linalg::mat_mul(&j, &linalg::mat_mul(&linalg::adjoint(&self.rows), &j)))
    }

    pub fn compose(&self, other: &Isometry) -> Self {
        Isometry::unchecked(linalg::mat_mul(&self.rows, &other.rows))
    }

    /// `g z` on lifts.
    pub fn act(&self, z: &HVector) -> Result<HVector> {
        if z.n() != self.n() {
            return Err(GeometryError::DimensionMismatch { expected: self.n(), found: z.n() });
        }
        HVector::new(linalg::mat_vec(&self.rows, z.coords()))
    }

    /// `g(p) = P(g p̂)`.
    pub fn apply(&self, p: &ClosurePoint) -> Result<ClosurePoint> {
        let z = p.lift(self.n())?;
        let out = project(&self.act(&z)?)?;
        Ok(snap_to_location(out, p.location(DEFAULT_EPS)))
    }

    pub fn defect(&self) -> f64 {
        isometry_defect(&self.rows).unwrap_or(f64::INFINITY)
    }

    /// An isometry sending the distinct boundary points `p` to `o` and `q` to `∞`.
    pub fn to_o_infty(p: &ClosurePoint, q: &ClosurePoint) -> Result<Self> {
        let n = common_dim(&[p.clone(), q.clone()])?;
        for x in [p, q] {
            if x.location(DEFAULT_EPS) != Location::Boundary {
                return Err(GeometryError::NotBoundary);
            }
        }
        if p.approx_eq(q, DEFAULT_EPS) {
            return Err(GeometryError::CoincidentPoints);
        }
        let g1 = match p {
            ClosurePoint::Infinity => Isometry::swap(n),
            _ => Isometry::translation_to(p)?.inverse(),
        };
        let q1 = g1.apply(q)?;
        if q1.is_infinity() {
            return Ok(g1);
        }
        let swap = Isometry::swap(n);
        let q2 = swap.apply(&q1)?;
        let t = Isometry::translation_to(&q2)?.inverse();
        Ok(swap.compose(&t).compose(&swap).compose(&g1))
    }

    /// An isometry sending the interior point `z` to `(−1, 0, …, 0)`.
    pub fn to_basepoint(z: &ClosurePoint) -> Result<Self> {
        let ClosurePoint::Finite(c) = z else {
            return Err(GeometryError::NotInterior);
        };
        if z.location(DEFAULT_EPS) != Location::Interior {
            return Err(GeometryError::NotInterior);
        }
        let n = c.len();
        let tail: Vec<Quaternion> = c[1..].iter().map(|q| -*q).collect();
        let t2: f64 = tail.iter().map(|q| q.norm_sqr()).sum();
        let b = Quaternion::real(-t2 / 2.0) - c[0].im();
        let t = Isometry::translation(b, &tail)?;
        let u = -(c[0].re() + t2 / 2.0);
        Ok(Isometry::dilation(n, 1.0 / u.sqrt()).compose(&t))
    }
}

impl Mul for &Isometry {
    type Output = Isometry;
    fn mul(self, rhs: &Isometry) -> Isometry {
        self.compose(rhs)
    }
}

/// Re-projects a finite image onto the boundary when the source was a boundary
/// point, removing the drift introduced by the matrix product.
fn snap_to_location(p: ClosurePoint, loc: Location) -> ClosurePoint {
    match (p, loc) {
        (ClosurePoint::Finite(mut z), Location::Boundary) => {
            let tail: f64 = z[1..].iter().map(|q| q.norm_sqr()).sum();
            z[0].a0 = -tail / 2.0;
            ClosurePoint::Finite(z)
        }
        (p, _) => p,
    }
}

// ── Random sampling ──

/// Half-width of the coordinate box used by the samplers.
pub const SAMPLE_BOX: f64 = 1.0;

pub fn random_quaternion<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> Quaternion {
    let mut c = || rng.random_range(-half_width..half_width);
    Quaternion::new(c(), c(), c(), c())
}

/// Uniform on the unit 3-sphere.
pub fn random_unit_quaternion<R: Rng + ?Sized>(rng: &mut R) -> Quaternion {
    loop {
        let q = random_quaternion(rng, 1.0);
        let r = q.norm_sqr();
        if r > 1e-4 && r <= 1.0 {
            return q / r.sqrt();
        }
    }
}

fn random_tail<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Quaternion, Vec<Quaternion>) {
    let tail: Vec<Quaternion> = (1..n).map(|_| random_quaternion(rng, SAMPLE_BOX)).collect();
    let im = random_quaternion(rng, SAMPLE_BOX).im();
    (im, tail)
}

/// A boundary point with `z₂, …, z_n` and `Im z₁` uniform in a box.
pub fn random_boundary_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ClosurePoint {
    let (im, tail) = random_tail(n, rng);
    let t2: f64 = tail.iter().map(|q| q.norm_sqr()).sum();
    let mut c = vec![im + Quaternion::real(-t2 / 2.0)];
    c.extend(tail);
    ClosurePoint::Finite(c)
}

/// An interior point at height `u ∈ [0.05, 2)` below the boundary.
pub fn random_interior_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ClosurePoint {
    let (im, tail) = random_tail(n, rng);
    let t2: f64 = tail.iter().map(|q| q.norm_sqr()).sum();
    let u = rng.random_range(0.05..2.0);
    let mut c = vec![im + Quaternion::real(-t2 / 2.0 - u)];
    c.extend(tail);
    ClosurePoint::Finite(c)
}

/// A unitary `(n−1)×(n−1)` matrix from Gram–Schmidt on random columns.
pub fn random_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> QMatrix {
    loop {
        let cols: Vec<Vec<Quaternion>> =
            (0..m).map(|_| (0..m).map(|_| random_quaternion(rng, 1.0)).collect()).collect();
        if let Some(q) = linalg::gram_schmidt(&cols) {
            return linalg::from_columns(&q);
        }
    }
}

/// A product of exactly-symplectic generators: a rotation, a translation,
/// a dilation, optionally `J`, and another translation.
pub fn random_isometry<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Isometry {
    let rot = Isometry::block_diag(random_unit_quaternion(rng), &random_unitary(n - 1, rng)).expect("unitary block");
    let t1 = Isometry::translation_to(&random_boundary_point(n, rng)).expect("boundary point");
    let t2 = Isometry::translation_to(&random_boundary_point(n, rng)).expect("boundary point");
    let dil = Isometry::dilation(n, rng.random_range(0.5..2.0));
    let mut g = t1.compose(&dil).compose(&rot);
    if rng.random_bool(0.5) {
        g = g.compose(&Isometry::swap(n));
    }
    g.compose(&t2.inverse())
}
