//! Geodesics, quaternionic lines, and distances from points to them.
//!
//! Every distance comes in two forms: `ρ` itself and `cosh²(ρ/2)`, which is
//! what the closed formulas produce and is better conditioned near zero.

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::hform::{common_dim, configuration_lifts, form, project, ClosurePoint, HVector, Isometry, Location};
use crate::invariants::{cross_ratio_lifts, eta_lifts};
use crate::quat::{Quaternion, DEFAULT_EPS};

/// `ρ` from `cosh²(ρ/2)`, clamping arguments below 1.
pub fn rho_from_cosh2(c: f64) -> f64 {
    2.0 * c.max(1.0).sqrt().acosh()
}

pub fn cosh2_from_rho(rho: f64) -> f64 {
    (rho / 2.0).cosh().powi(2)
}

fn require(p: &ClosurePoint, loc: Location) -> Result<()> {
    match (p.location(DEFAULT_EPS), loc) {
        (l, m) if l == m => Ok(()),
        (Location::Exterior, _) => Err(GeometryError::ExteriorPoint),
        (_, Location::Interior) => Err(GeometryError::NotInterior),
        _ => Err(GeometryError::NotBoundary),
    }
}

/// The geodesic with boundary endpoints `u`, `v`, parametrized by arc length
/// as `γ(t) = P(e^{t/2} u + e^{−t/2} v)` with lifts normalized to `⟨u,v⟩ = −1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[ClosurePoint; 2]", into = "[ClosurePoint; 2]")]
pub struct Geodesic {
    u: ClosurePoint,
    v: ClosurePoint,
    lu: HVector,
    lv: HVector,
}

impl TryFrom<[ClosurePoint; 2]> for Geodesic {
    type Error = GeometryError;
    fn try_from([u, v]: [ClosurePoint; 2]) -> Result<Self> {
        Geodesic::new(&u, &v)
    }
}

impl From<Geodesic> for [ClosurePoint; 2] {
    fn from(g: Geodesic) -> Self {
        [g.u, g.v]
    }
}

impl Geodesic {
    /// Keeps the standard lift of `u` and right-scales the lift of `v`.
    pub fn new(u: &ClosurePoint, v: &ClosurePoint) -> Result<Self> {
        require(u, Location::Boundary)?;
        require(v, Location::Boundary)?;
        let l = configuration_lifts(&[u.clone(), v.clone()])?;
        let mu = -form(&l[1], &l[0]).inv()?;
        Ok(Geodesic { u: u.clone(), v: v.clone(), lu: l[0].clone(), lv: l[1].right_mul(mu) })
    }

    /// The geodesic leaving the boundary point `u` through the interior point `z`.
    pub fn from_boundary_through(u: &ClosurePoint, z: &ClosurePoint) -> Result<Self> {
        require(u, Location::Boundary)?;
        require(z, Location::Interior)?;
        let l = configuration_lifts(&[u.clone(), z.clone()])?;
        let v = l[1].scale((2.0 / -l[1].quadratic()).sqrt());
        let uv = form(&l[0], &v);
        let r = uv.norm();
        let un = l[0].right_mul(-uv.inv()? * r);
        let w = &v.scale(1.0 / r) - &un.scale(1.0 / (r * r));
        Geodesic::new(u, &project(&w)?)
    }

    /// The geodesic through two distinct interior points; `z` lies on the
    /// side of the first endpoint.
    pub fn through(z: &ClosurePoint, w: &ClosurePoint) -> Result<Self> {
        require(z, Location::Interior)?;
        require(w, Location::Interior)?;
        let l = configuration_lifts(&[z.clone(), w.clone()])?;
        let zn = l[0].scale(1.0 / (-l[0].quadratic()).sqrt());
        let wn = l[1].scale(1.0 / (-l[1].quadratic()).sqrt());
        let ip = form(&zn, &wn);
        let c = ip.norm();
        let wr = wn.right_mul(-ip.unit().ok_or(GeometryError::ZeroInnerProduct)?);
        let s = (c * c - 1.0).max(0.0).sqrt();
        if s == 0.0 {
            return Err(GeometryError::CoincidentPoints);
        }
        // the root with smaller |α| gives the endpoint beyond w
        let near = &zn.scale(-1.0 / (c + s)) + &wr;
        let far = &zn.scale(-(c + s)) + &wr;
        Geodesic::new(&project(&far)?, &project(&near)?)
    }

    pub fn endpoints(&self) -> (&ClosurePoint, &ClosurePoint) {
        (&self.u, &self.v)
    }

    /// Lifts of the endpoints with `⟨u, v⟩ = −1`.
    pub fn lifts(&self) -> (&HVector, &HVector) {
        (&self.lu, &self.lv)
    }

    pub fn n(&self) -> usize {
        self.lu.n()
    }

    pub fn lift_at(&self, t: f64) -> HVector {
        &self.lu.scale((t / 2.0).exp()) + &self.lv.scale((-t / 2.0).exp())
    }

    /// `γ(t)`.
    pub fn point(&self, t: f64) -> Result<ClosurePoint> {
        project(&self.lift_at(t))
    }

    /// The parameter of the orthogonal projection of `z`: `e^t = |⟨v,z⟩ / ⟨u,z⟩|`.
    pub fn parameter_of(&self, z: &ClosurePoint) -> Result<f64> {
        require(z, Location::Interior)?;
        let lz = z.lift(self.n())?;
        Ok((form(&self.lv, &lz).norm() / form(&self.lu, &lz).norm()).ln())
    }
}

/// `γ(t)` on `g`.
pub fn geodesic_point(g: &Geodesic, t: f64) -> Result<ClosurePoint> {
    g.point(t)
}

/// The ρ-nearest point of `g` to the interior point `z`.
pub fn project_to_geodesic(g: &Geodesic, z: &ClosurePoint) -> Result<ClosurePoint> {
    g.point(g.parameter_of(z)?)
}

/// `cosh²(ρ(γ_uv, z)/2) = |η(u,v,z)| + Re η(u,v,z)`.
pub fn cosh2_point_geodesic(g: &Geodesic, z: &ClosurePoint) -> Result<f64> {
    require(z, Location::Interior)?;
    let e = eta_lifts(&g.lu, &g.lv, &z.lift(g.n())?)?;
    Ok(e.norm() + e.re())
}

pub fn dist_point_geodesic(g: &Geodesic, z: &ClosurePoint) -> Result<f64> {
    cosh2_point_geodesic(g, z).map(rho_from_cosh2)
}

/// `ρ(z, w) = |log|𝕏(z, u, w, v) − 1||` for interior `z`, `w` on `g`.
pub fn rho_via_crossratio(z: &ClosurePoint, w: &ClosurePoint, g: &Geodesic) -> Result<f64> {
    for p in [z, w] {
        if cosh2_point_geodesic(g, p)? - 1.0 > 1e-8 {
            return Err(GeometryError::NotOnGeodesic);
        }
    }
    let n = g.n();
    let x = cross_ratio_lifts(&z.lift(n)?, &g.lu, &w.lift(n)?, &g.lv)?;
    Ok((x - Quaternion::ONE).norm().ln().abs())
}

/// The quaternionic line spanned by two distinct points; `u` must be a
/// boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[ClosurePoint; 2]", into = "[ClosurePoint; 2]")]
pub struct QLine {
    u: ClosurePoint,
    v: ClosurePoint,
}

impl TryFrom<[ClosurePoint; 2]> for QLine {
    type Error = GeometryError;
    fn try_from([u, v]: [ClosurePoint; 2]) -> Result<Self> {
        QLine::new(&u, &v)
    }
}

impl From<QLine> for [ClosurePoint; 2] {
    fn from(l: QLine) -> Self {
        [l.u, l.v]
    }
}

impl QLine {
    pub fn new(u: &ClosurePoint, v: &ClosurePoint) -> Result<Self> {
        require(u, Location::Boundary)?;
        configuration_lifts(&[u.clone(), v.clone()])?;
        Ok(QLine { u: u.clone(), v: v.clone() })
    }

    pub fn spanning_points(&self) -> (&ClosurePoint, &ClosurePoint) {
        (&self.u, &self.v)
    }

    /// The second boundary point of the line on the geodesic from `u` through `v`.
    pub fn boundary_pair(&self) -> Result<(ClosurePoint, ClosurePoint)> {
        match self.v.location(DEFAULT_EPS) {
            Location::Boundary => Ok((self.u.clone(), self.v.clone())),
            _ => {
                let g = Geodesic::from_boundary_through(&self.u, &self.v)?;
                Ok((self.u.clone(), g.v))
            }
        }
    }

    /// An isometry taking the line to `L_{o∞} = {(z₁, 0, …, 0)}`, with `u ↦ o`.
    pub fn normal_form(&self) -> Result<Isometry> {
        let (a, b) = self.boundary_pair()?;
        Isometry::to_o_infty(&a, &b)
    }
}

/// `cosh²(ρ(L_uv, z)/2) = 2 Re η(u,v,z)` for a line spanned by boundary points.
pub fn cosh2_point_qline(l: &QLine, z: &ClosurePoint) -> Result<f64> {
    require(&l.v, Location::Boundary)?;
    require(z, Location::Interior)?;
    let n = common_dim(&[l.u.clone(), l.v.clone(), z.clone()])?;
    let e = eta_lifts(&l.u.lift(n)?, &l.v.lift(n)?, &z.lift(n)?)?;
    Ok(2.0 * e.re())
}

pub fn dist_point_qline(l: &QLine, z: &ClosurePoint) -> Result<f64> {
    cosh2_point_qline(l, z).map(rho_from_cosh2)
}

/// `X = 𝕏(z,v,u,z)` and `K = |⟨u,z⟩|²⟨v,v⟩ / (|⟨u,v⟩|²⟨z,z⟩)` for boundary `u`
/// and interior `v`, `z`.
fn mixed_terms(u: &ClosurePoint, v: &ClosurePoint, z: &ClosurePoint) -> Result<(Quaternion, f64)> {
    require(u, Location::Boundary)?;
    require(v, Location::Interior)?;
    require(z, Location::Interior)?;
    let n = common_dim(&[u.clone(), v.clone(), z.clone()])?;
    if u.approx_eq(v, DEFAULT_EPS) {
        return Err(GeometryError::CoincidentPoints);
    }
    let (lu, lv, lz) = (u.lift(n)?, v.lift(n)?, z.lift(n)?);
    let x = eta_lifts(&lu, &lv, &lz)?;
    let k = form(&lu, &lz).norm_sqr() * lv.quadratic() / (form(&lu, &lv).norm_sqr() * lz.quadratic());
    Ok((x, k))
}

/// `cosh²(ρ(L_uv, z)/2) = 2 Re X − K` with `u` boundary and `v` interior.
pub fn cosh2_point_qline_mixed(u: &ClosurePoint, v: &ClosurePoint, z: &ClosurePoint) -> Result<f64> {
    let (x, k) = mixed_terms(u, v, z)?;
    Ok(2.0 * x.re() - k)
}

/// `cosh²(ρ(γ, z)/2) = |X − K/2| + Re X − K/2` for the geodesic leaving `u`
/// through `v`.
pub fn cosh2_point_geodesic_mixed(u: &ClosurePoint, v: &ClosurePoint, z: &ClosurePoint) -> Result<f64> {
    let (x, k) = mixed_terms(u, v, z)?;
    let y = x - Quaternion::real(k / 2.0);
    Ok(y.norm() + y.re())
}

pub fn dist_point_qline_mixed(u: &ClosurePoint, v: &ClosurePoint, z: &ClosurePoint) -> Result<f64> {
    cosh2_point_qline_mixed(u, v, z).map(rho_from_cosh2)
}

pub fn dist_point_geodesic_mixed(u: &ClosurePoint, v: &ClosurePoint, z: &ClosurePoint) -> Result<f64> {
    cosh2_point_geodesic_mixed(u, v, z).map(rho_from_cosh2)
}

/// Orthogonal projection `Π r` of a closure point onto a quaternionic line.
/// In the normal form where the line is `L_{o∞}` it sends `r` to `(r₁, 0, …, 0)`.
pub fn project_to_qline(l: &QLine, r: &ClosurePoint) -> Result<ClosurePoint> {
    let g = l.normal_form()?;
    let gr = g.apply(r)?;
    match gr {
        ClosurePoint::Infinity => Ok(l.boundary_pair()?.1),
        ClosurePoint::Finite(c) => {
            let mut flat = vec![Quaternion::ZERO; c.len()];
            flat[0] = c[0];
            if flat[0].norm() == 0.0 {
                return Ok(l.u.clone());
            }
            g.inverse().apply(&ClosurePoint::Finite(flat))
        }
    }
}
