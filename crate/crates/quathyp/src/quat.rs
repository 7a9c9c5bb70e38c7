//! Real quaternions `a0 + a1 i + a2 j + a3 k` with the Hamilton product,
//! similarity testing and the rotation-normalizing maps `nu` and `sigma`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative tolerance used throughout the crate.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Threshold below which the `(j, k)` part of a quaternion counts as zero
/// when `nu` and `sigma` pick their branch.
pub const BRANCH_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QuatError {
    #[error("cannot invert {0}: modulus below tolerance")]
    ZeroDivisor(Quaternion),
    #[error("{0} is not a unit quaternion")]
    NotUnit(Quaternion),
}

/// A quaternion `a0 + a1 i + a2 j + a3 k`.
///
/// Serializes as the JSON array `[a0, a1, a2, a3]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.a0, q.a1, q.a2, q.a3]
    }
}

impl From<f64> for Quaternion {
    fn from(x: f64) -> Self {
        Quaternion::real(x)
    }
}

impl From<Complex64> for Quaternion {
    fn from(z: Complex64) -> Self {
        Quaternion::new(z.re, z.im, 0.0, 0.0)
    }
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    // ── Constructors ──

    pub const fn new(a0: f64, a1: f64, a2: f64, a3: f64) -> Self {
        Quaternion { a0, a1, a2, a3 }
    }

    pub const fn real(x: f64) -> Self {
        Quaternion::new(x, 0.0, 0.0, 0.0)
    }

    /// `z1 + z2 j` for complex `z1`, `z2`.
    pub fn from_parts(z1: Complex64, z2: Complex64) -> Self {
        Quaternion::new(z1.re, z1.im, z2.re, z2.im)
    }

    /// `e^{iθ} = cos θ + i sin θ`.
    pub fn exp_i(theta: f64) -> Self {
        Quaternion::new(theta.cos(), theta.sin(), 0.0, 0.0)
    }

    /// `cos θ + I sin θ`.
    pub fn from_polar(theta: f64, axis: UnitImaginary) -> Self {
        let s = theta.sin();
        let [x, y, z] = axis.direction();
        Quaternion::new(theta.cos(), s * x, s * y, s * z)
    }

    // ── Parts ──

    pub fn re(self) -> f64 {
        self.a0
    }

    /// The imaginary part as a pure quaternion.
    pub fn im(self) -> Quaternion {
        Quaternion::new(0.0, self.a1, self.a2, self.a3)
    }

    pub fn im_vec(self) -> [f64; 3] {
        [self.a1, self.a2, self.a3]
    }

    /// `a0 + a1 i`, the first coordinate in `ℍ = ℂ ⊕ ℂj`.
    pub fn complex_part(self) -> Complex64 {
        Complex64::new(self.a0, self.a1)
    }

    /// `a2 + a3 i`, the coefficient of `j` in `ℍ = ℂ ⊕ ℂj`.
    pub fn j_part(self) -> Complex64 {
        Complex64::new(self.a2, self.a3)
    }

    // ── Algebra ──

    pub fn conj(self) -> Self {
        Quaternion::new(self.a0, -self.a1, -self.a2, -self.a3)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a0 * self.a0 + self.a1 * self.a1 + self.a2 * self.a2 + self.a3 * self.a3
    }

    pub fn norm(self) -> f64 {
        self.a0.hypot(self.a1).hypot(self.a2.hypot(self.a3))
    }

    pub fn im_norm(self) -> f64 {
        self.a1.hypot(self.a2).hypot(self.a3)
    }

    /// `conj(a) / |a|²` without a zero check.
    pub fn recip(self) -> Self {
        self.conj() / self.norm_sqr()
    }

    /// Inverse, failing when `|a| ≤ DEFAULT_EPS`.
    pub fn inv(self) -> Result<Self, QuatError> {
        self.inv_tol(DEFAULT_EPS)
    }

    pub fn inv_tol(self, eps: f64) -> Result<Self, QuatError> {
        if self.norm() <= eps {
            Err(QuatError::ZeroDivisor(self))
        } else {
            Ok(self.recip())
        }
    }

    /// `self / |self|`, or `None` for zero.
    pub fn unit(self) -> Option<Self> {
        let r = self.norm();
        (r > 0.0).then(|| self / r)
    }

    pub fn is_finite(self) -> bool {
        self.a0.is_finite() && self.a1.is_finite() && self.a2.is_finite() && self.a3.is_finite()
    }

    /// `self · q · self⁻¹`.
    pub fn conjugate_by(self, q: Quaternion) -> Quaternion {
        self * q * self.recip()
    }

    pub fn dist(self, other: Quaternion) -> f64 {
        (self - other).norm()
    }

    pub fn max_abs(self) -> f64 {
        self.a0.abs().max(self.a1.abs()).max(self.a2.abs()).max(self.a3.abs())
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.a0, self.a1, self.a2, self.a3)
    }
}

// ── Operators ──

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, b: Quaternion) -> Quaternion {
        Quaternion::new(self.a0 + b.a0, self.a1 + b.a1, self.a2 + b.a2, self.a3 + b.a3)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, b: Quaternion) -> Quaternion {
        Quaternion::new(self.a0 - b.a0, self.a1 - b.a1, self.a2 - b.a2, self.a3 - b.a3)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.a0, -self.a1, -self.a2, -self.a3)
    }
}

/// Hamilton product, `i² = j² = k² = ijk = −1`.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, b: Quaternion) -> Quaternion {
        let a = self;
        Quaternion::new(
            a.a0 * b.a0 - a.a1 * b.a1 - a.a2 * b.a2 - a.a3 * b.a3,
            a.a0 * b.a1 + a.a1 * b.a0 + a.a2 * b.a3 - a.a3 * b.a2,
            a.a0 * b.a2 - a.a1 * b.a3 + a.a2 * b.a0 + a.a3 * b.a1,
            a.a0 * b.a3 + a.a1 * b.a2 - a.a2 * b.a1 + a.a3 * b.a0,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.a0 * s, self.a1 * s, self.a2 * s, self.a3 * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.a0 / s, self.a1 / s, self.a2 / s, self.a3 / s)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, b: Quaternion) {
        *self = *self + b;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, b: Quaternion) {
        *self = *self - b;
    }
}

impl MulAssign for Quaternion {
    fn mul_assign(&mut self, b: Quaternion) {
        *self = *self * b;
    }
}

impl Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, Add::add)
    }
}

// ── Unit imaginary directions ──

/// A unit pure-imaginary quaternion, stored as its `(i, j, k)` direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitImaginary {
    direction: [f64; 3],
}

impl UnitImaginary {
    pub const I_AXIS: UnitImaginary = UnitImaginary { direction: [1.0, 0.0, 0.0] };
    pub const J_AXIS: UnitImaginary = UnitImaginary { direction: [0.0, 1.0, 0.0] };
    pub const K_AXIS: UnitImaginary = UnitImaginary { direction: [0.0, 0.0, 1.0] };

    /// Normalizes `v`; `None` if it is zero or not finite.
    pub fn new(v: [f64; 3]) -> Option<Self> {
        let r = v[0].hypot(v[1]).hypot(v[2]);
        (r > 0.0 && r.is_finite()).then(|| UnitImaginary { direction: [v[0] / r, v[1] / r, v[2] / r] })
    }

    pub fn direction(self) -> [f64; 3] {
        self.direction
    }

    pub fn as_quaternion(self) -> Quaternion {
        let [x, y, z] = self.direction;
        Quaternion::new(0.0, x, y, z)
    }
}

impl TryFrom<[f64; 3]> for UnitImaginary {
    type Error = String;
    fn try_from(v: [f64; 3]) -> Result<Self, String> {
        let r = v[0].hypot(v[1]).hypot(v[2]);
        if (r - 1.0).abs() > DEFAULT_EPS {
            return Err(format!("direction {v:?} does not have unit length"));
        }
        Ok(UnitImaginary { direction: v })
    }
}

impl From<UnitImaginary> for [f64; 3] {
    fn from(u: UnitImaginary) -> Self {
        u.direction
    }
}

// ── Similarity and normalizing rotations ──

/// `a ∼ b`: equal real parts and equal moduli, compared against
/// `tol · max(1, |a|, |b|)`.
pub fn similar(a: Quaternion, b: Quaternion, tol: f64) -> bool {
    let (na, nb) = (a.norm(), b.norm());
    let scale = 1f64.max(na).max(nb);
    (a.a0 - b.a0).abs() <= tol * scale && (na - nb).abs() <= tol * scale
}

fn jk_is_zero(q: Quaternion, eps: f64) -> bool {
    q.a2 * q.a2 + q.a3 * q.a3 <= eps * eps * q.norm_sqr().max(1.0)
}

/// Unit `ν` with `ν⁻¹ a ν = a0 + |Im a| i`.
pub fn nu(a: Quaternion) -> Quaternion {
    nu_with(a, BRANCH_EPS)
}

/// `nu` with an explicit branch threshold.
pub fn nu_with(a: Quaternion, eps: f64) -> Quaternion {
    if !jk_is_zero(a, eps) {
        let jk = a.a2 * a.a2 + a.a3 * a.a3;
        let s = (a.a1 * a.a1 + jk).sqrt();
        // s + a1 evaluated without cancellation when a1 < 0
        let s_plus = if a.a1 >= 0.0 { s + a.a1 } else { jk / (s - a.a1) };
        let d = (2.0 * s * s_plus).sqrt();
        Quaternion::new(s_plus / d, 0.0, -a.a3 / d, a.a2 / d)
    } else if a.a1 < 0.0 {
        Quaternion::J
    } else {
        Quaternion::ONE
    }
}

/// Complex unit `σ` with `σ⁻¹ a σ = a0 + a1 i + |a2 + a3 i| j`; falls back
/// to `b` when the `(j, k)` part of `a` vanishes, and to 1 when both do.
pub fn sigma(a: Quaternion, b: Quaternion) -> Quaternion {
    sigma_with(a, b, BRANCH_EPS)
}

/// `sigma` with an explicit branch threshold.
pub fn sigma_with(a: Quaternion, b: Quaternion, eps: f64) -> Quaternion {
    for q in [a, b] {
        if !jk_is_zero(q, eps) {
            // principal square root of the unit complex number (a2 + a3 i)/|·|
            let mut theta = q.a3.atan2(q.a2);
            if theta <= -std::f64::consts::PI {
                theta = std::f64::consts::PI;
            }
            return Quaternion::exp_i(theta / 2.0);
        }
    }
    Quaternion::ONE
}

/// Polar form of a unit quaternion: `q = cos θ + I sin θ` with `θ ∈ [0, π]`.
/// The axis is the i-axis whenever `sin θ ≤ eps`.
pub fn unit_polar(q: Quaternion) -> Result<(f64, UnitImaginary), QuatError> {
    unit_polar_with(q, DEFAULT_EPS)
}

pub fn unit_polar_with(q: Quaternion, eps: f64) -> Result<(f64, UnitImaginary), QuatError> {
    if (q.norm() - 1.0).abs() > eps {
        return Err(QuatError::NotUnit(q));
    }
    let s = q.im_norm();
    let theta = s.atan2(q.a0);
    if s <= eps {
        return Ok((theta, UnitImaginary::I_AXIS));
    }
    let axis = UnitImaginary::new(q.im_vec()).unwrap_or(UnitImaginary::I_AXIS);
    Ok((theta, axis))
}

/// A unit `λ` rotating the imaginary part of `a` onto the direction of the
/// imaginary part of `b`, so that `λ a λ⁻¹ = b` whenever `a ∼ b`.
/// Returns 1 if either imaginary part vanishes.
pub fn aligning_rotation(a: Quaternion, b: Quaternion) -> Quaternion {
    let (Some(u), Some(v)) = (a.im().unit(), b.im().unit()) else {
        return Quaternion::ONE;
    };
    if dot3(u, v) >= 0.0 {
        return half_way(u, v);
    }
    // half-turn about an axis orthogonal to u, then the short way from -u to v
    let trial = if u.a1.abs() < 0.9 { Quaternion::I } else { Quaternion::J };
    let w = (trial - u * dot3(trial, u)).unit().unwrap_or(Quaternion::K);
    half_way(-u, v) * w
}

fn dot3(u: Quaternion, v: Quaternion) -> f64 {
    u.a1 * v.a1 + u.a2 * v.a2 + u.a3 * v.a3
}

/// Unit quaternion rotating the unit imaginary `u` onto `v` when `u · v ≥ 0`.
fn half_way(u: Quaternion, v: Quaternion) -> Quaternion {
    let q = Quaternion::new(
        1.0 + dot3(u, v),
        u.a2 * v.a3 - u.a3 * v.a2,
        u.a3 * v.a1 - u.a1 * v.a3,
        u.a1 * v.a2 - u.a2 * v.a1,
    );
    q.unit().unwrap_or(Quaternion::ONE)
}
