//! Hermitian triple products, Cartan angular invariants, quaternionic
//! cross-ratios and `η`.
//!
//! Products are evaluated in exactly the written factor order. Only `Re`,
//! `|·|` and the similarity class of a cross-ratio are geometric; the raw
//! quaternion depends on the chosen lifts.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::hform::{configuration_lifts, form, ClosurePoint, HVector, Location};
use crate::quat::{Quaternion, DEFAULT_EPS};

/// `⟨p₁, p₂, p₃⟩ = ⟨p₂,p₁⟩⟨p₃,p₂⟩⟨p₁,p₃⟩` on standard lifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TripleProduct(pub Quaternion);

impl TripleProduct {
    pub fn value(self) -> Quaternion {
        self.0
    }

    /// `arccos(−Re T / |T|)` clamped to `[0, π/2]`, evaluated as
    /// `atan2(|Im T|, −Re T)`.
    pub fn cartan(self) -> f64 {
        let t = self.0;
        t.im_norm().atan2(-t.re()).clamp(0.0, FRAC_PI_2)
    }
}

pub fn triple_product_lifts(p1: &HVector, p2: &HVector, p3: &HVector) -> TripleProduct {
    TripleProduct(form(p2, p1) * form(p3, p2) * form(p1, p3))
}

pub fn triple_product(p1: &ClosurePoint, p2: &ClosurePoint, p3: &ClosurePoint) -> Result<TripleProduct> {
    let l = configuration_lifts(&[p1.clone(), p2.clone(), p3.clone()])?;
    Ok(triple_product_lifts(&l[0], &l[1], &l[2]))
}

/// The quaternionic Cartan angular invariant, in `[0, π/2]`.
pub fn cartan(p1: &ClosurePoint, p2: &ClosurePoint, p3: &ClosurePoint) -> Result<f64> {
    Ok(triple_product(p1, p2, p3)?.cartan())
}

pub fn cartan_lifts(p1: &HVector, p2: &HVector, p3: &HVector) -> f64 {
    triple_product_lifts(p1, p2, p3).cartan()
}

/// `a⁻¹`, failing when `|a|` is negligible against the lifts it came from.
fn inv_checked(a: Quaternion, x: &HVector, y: &HVector) -> Result<Quaternion> {
    if a.norm() <= DEFAULT_EPS * DEFAULT_EPS * x.euclid_norm() * y.euclid_norm() || a == Quaternion::ZERO {
        return Err(GeometryError::ZeroInnerProduct);
    }
    Ok(a.recip())
}

/// `𝕏(p₁,p₂,p₃,p₄) = ⟨p₃,p₁⟩⟨p₃,p₂⟩⁻¹⟨p₄,p₂⟩⟨p₄,p₁⟩⁻¹`.
pub fn cross_ratio_lifts(p1: &HVector, p2: &HVector, p3: &HVector, p4: &HVector) -> Result<Quaternion> {
    let n = p1.n();
    for p in [p2, p3, p4] {
        if p.n() != n {
            return Err(GeometryError::DimensionMismatch { expected: n, found: p.n() });
        }
    }
    Ok(form(p3, p1) * inv_checked(form(p3, p2), p3, p2)? * form(p4, p2) * inv_checked(form(p4, p1), p4, p1)?)
}

/// The cross-ratio of four pairwise distinct closure points on standard lifts.
pub fn cross_ratio(p1: &ClosurePoint, p2: &ClosurePoint, p3: &ClosurePoint, p4: &ClosurePoint) -> Result<Quaternion> {
    let l = configuration_lifts(&[p1.clone(), p2.clone(), p3.clone(), p4.clone()])?;
    cross_ratio_lifts(&l[0], &l[1], &l[2], &l[3])
}

/// `𝕏₁ = 𝕏(p₁,p₂,p₃,p₄)`, `𝕏₂ = 𝕏(p₂,p₄,p₃,p₁)`, `𝕏₃ = 𝕏(p₁,p₄,p₃,p₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossRatios {
    #[serde(rename = "X1")]
    pub x1: Quaternion,
    #[serde(rename = "X2")]
    pub x2: Quaternion,
    #[serde(rename = "X3")]
    pub x3: Quaternion,
}

pub fn cross_ratio_triple_123(lifts: &[HVector; 4]) -> Result<CrossRatios> {
    let [p1, p2, p3, p4] = lifts;
    Ok(CrossRatios {
        x1: cross_ratio_lifts(p1, p2, p3, p4)?,
        x2: cross_ratio_lifts(p2, p4, p3, p1)?,
        x3: cross_ratio_lifts(p1, p4, p3, p2)?,
    })
}

/// `𝕏₁, 𝕏₂, 𝕏₃` of four closure points on standard lifts.
pub fn cross_ratios(points: &[ClosurePoint; 4]) -> Result<CrossRatios> {
    let l = configuration_lifts(points)?;
    cross_ratio_triple_123(&[l[0].clone(), l[1].clone(), l[2].clone(), l[3].clone()])
}

/// `𝕏(z,v,u,z) = ⟨u,z⟩⟨u,v⟩⁻¹⟨z,v⟩⟨z,z⟩⁻¹` on arbitrary lifts.
pub fn eta_lifts(u: &HVector, v: &HVector, z: &HVector) -> Result<Quaternion> {
    cross_ratio_lifts(z, v, u, z)
}

/// `η(u, v, z)` for distinct boundary `u`, `v` and interior `z`, on standard
/// lifts. Only `Re η` and `|η|` are independent of the lifts.
pub fn eta(u: &ClosurePoint, v: &ClosurePoint, z: &ClosurePoint) -> Result<Quaternion> {
    for b in [u, v] {
        if b.location(DEFAULT_EPS) != Location::Boundary {
            return Err(GeometryError::NotBoundary);
        }
    }
    if z.location(DEFAULT_EPS) != Location::Interior {
        return Err(GeometryError::NotInterior);
    }
    let l = configuration_lifts(&[u.clone(), v.clone(), z.clone()])?;
    eta_lifts(&l[0], &l[1], &l[2])
}
