//! Analytic domain geometry: distance to the boundary, boundary projection,
//! outward normals, and the boundary cut-off profile.
//!
//! Supported shapes are analytic (periodic box, wall box, ball) so that the
//! distance function d, the projection m(x) and the normal n(m(x)) are exact.
//! For every x with 0 < d(x) < h0 the projection is unique (up to the
//! measure-zero edge/corner set of the box, which callers may exclude) and
//! the gradient of d satisfies grad d(x) = -n(m(x)).

use crate::error::{CgError, Result};
use crate::scalar::Real;

/// Domain shape with its analytic parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape<T: Real> {
    /// Torus; no boundary. `extent[k]` is the period along axis k.
    PeriodicBox { extent: [T; 3] },
    /// Axis-aligned box `[0, extent_k]` with solid walls.
    WallBox { extent: [T; 3] },
    /// Ball of given radius centered at the origin.
    Ball { radius: T },
}

/// Bounded (or periodic) domain with analytic distance/projection queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainGeometry<T: Real> {
    pub shape: Shape<T>,
    /// Reach of the boundary projection: projections are unique for d < h0.
    pub h0: T,
}

impl<T: Real> DomainGeometry<T> {
    pub fn periodic_box(extent: [T; 3]) -> Self {
        DomainGeometry {
            shape: Shape::PeriodicBox { extent },
            h0: T::infinity(),
        }
    }

    /// Wall box; h0 is half the shortest edge.
    pub fn wall_box(extent: [T; 3]) -> Self {
        let shortest = extent[0].min(extent[1]).min(extent[2]);
        DomainGeometry {
            shape: Shape::WallBox { extent },
            h0: shortest * T::of(0.5),
        }
    }

    /// Ball; h0 equals the radius (projection degenerates at the center).
    pub fn ball(radius: T) -> Self {
        DomainGeometry {
            shape: Shape::Ball { radius },
            h0: radius,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.shape, Shape::PeriodicBox { .. })
    }

    /// Bounding box [lo, hi] that a covering grid must span.
    pub fn bounding_box(&self) -> ([T; 3], [T; 3]) {
        match self.shape {
            Shape::PeriodicBox { extent } | Shape::WallBox { extent } => {
                ([T::zero(); 3], extent)
            }
            Shape::Ball { radius } => ([-radius, -radius, -radius], [radius; 3]),
        }
    }

    /// Strict interior test. Periodic boxes contain every point.
    pub fn contains(&self, x: [T; 3]) -> bool {
        match self.shape {
            Shape::PeriodicBox { .. } => true,
            Shape::WallBox { extent } => (0..3).all(|k| x[k] > T::zero() && x[k] < extent[k]),
            Shape::Ball { radius } => {
                (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() < radius
            }
        }
    }

    /// Distance to the boundary. Periodic boxes report the +infinity sentinel.
    ///
    /// Errors if `x` lies outside the closed domain.
    pub fn distance_to_boundary(&self, x: [T; 3]) -> Result<T> {
        match self.shape {
            Shape::PeriodicBox { .. } => Ok(T::infinity()),
            Shape::WallBox { extent } => {
                let mut d = T::infinity();
                for k in 0..3 {
                    if x[k] < T::zero() || x[k] > extent[k] {
                        return Err(CgError::Domain(format!(
                            "point component {} = {} outside [0, {}]",
                            k, x[k], extent[k]
                        )));
                    }
                    d = d.min(x[k]).min(extent[k] - x[k]);
                }
                Ok(d)
            }
            Shape::Ball { radius } => {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if r > radius {
                    return Err(CgError::Domain(format!(
                        "point at radius {} outside ball of radius {}",
                        r, radius
                    )));
                }
                Ok(radius - r)
            }
        }
    }

    /// Distance without the interiority check; returns -inf outside wall
    /// shapes so region predicates stay cheap on covering grids.
    pub fn distance_unchecked(&self, x: [T; 3]) -> T {
        match self.shape {
            Shape::PeriodicBox { .. } => T::infinity(),
            Shape::WallBox { extent } => {
                let mut d = T::infinity();
                for k in 0..3 {
                    d = d.min(x[k]).min(extent[k] - x[k]);
                }
                d
            }
            Shape::Ball { radius } => {
                radius - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
            }
        }
    }

    /// Boundary projection m(x) and unit outward normal n(m(x)).
    ///
    /// Requires 0 < d(x) < h0 and a unique nearest face; ties on the box
    /// edge/corner set and the ball center produce a range error.
    pub fn boundary_projection(&self, x: [T; 3]) -> Result<([T; 3], [T; 3])> {
        match self.shape {
            Shape::PeriodicBox { .. } => Err(CgError::UnsupportedShape(
                "periodic box has no boundary".into(),
            )),
            Shape::WallBox { extent } => {
                let d = self.distance_to_boundary(x)?;
                if d >= self.h0 {
                    return Err(CgError::Range(format!(
                        "d(x) = {} >= h0 = {}: projection not unique",
                        d, self.h0
                    )));
                }
                // Locate the nearest face; any exact tie is ambiguous.
                let mut face: Option<(usize, bool)> = None; // (axis, low side)
                let mut ties = 0usize;
                for k in 0..3 {
                    if x[k] == d {
                        ties += 1;
                        face = Some((k, true));
                    }
                    if extent[k] - x[k] == d {
                        ties += 1;
                        face = Some((k, false));
                    }
                }
                if ties != 1 {
                    return Err(CgError::Range(format!(
                        "point {:?} equidistant from {} faces",
                        x.map(|v| v.to_f64_lossy()),
                        ties
                    )));
                }
                let (k, low) = face.unwrap();
                let mut m = x;
                let mut n = [T::zero(); 3];
                if low {
                    m[k] = T::zero();
                    n[k] = -T::one();
                } else {
                    m[k] = extent[k];
                    n[k] = T::one();
                }
                Ok((m, n))
            }
            Shape::Ball { radius } => {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if r > radius {
                    return Err(CgError::Domain("point outside ball".into()));
                }
                let d = radius - r;
                if d >= self.h0 {
                    return Err(CgError::Range(
                        "ball center is equidistant from all boundary points".into(),
                    ));
                }
                let n = [x[0] / r, x[1] / r, x[2] / r];
                let m = [n[0] * radius, n[1] * radius, n[2] * radius];
                Ok((m, n))
            }
        }
    }

    /// True when the nearest-face projection at `x` is ambiguous (box edge
    /// diagonals, ball center). Used to exclude cells from shell masks.
    pub fn projection_is_ambiguous(&self, x: [T; 3]) -> bool {
        match self.shape {
            Shape::PeriodicBox { .. } => false,
            Shape::WallBox { extent } => {
                let d = self.distance_unchecked(x);
                let mut ties = 0usize;
                for k in 0..3 {
                    if x[k] == d {
                        ties += 1;
                    }
                    if extent[k] - x[k] == d {
                        ties += 1;
                    }
                }
                ties != 1
            }
            Shape::Ball { radius: _ } => {
                x[0] == T::zero() && x[1] == T::zero() && x[2] == T::zero()
            }
        }
    }
}

/// C^2 monotone ramp eta_{h,l}: 0 on (-inf, h-l], 1 on [h, +inf).
///
/// The ramp is the quintic smoothstep s^3 (10 - 15 s + 6 s^2) with
/// s = (z - (h-l)) / l, so |eta'| <= 15/(8 l) = 1.875/l pointwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile<T: Real> {
    /// Shell thickness: eta reaches 1 at distance h.
    pub h: T,
    /// Transition width; the ramp lives on [h-l, h].
    pub l: T,
}

impl<T: Real> CutoffProfile<T> {
    /// Profile with explicit transition width l < h.
    pub fn new(h: T, l: T) -> Result<Self> {
        if !(l > T::zero() && l < h) {
            return Err(CgError::Argument(format!(
                "cutoff profile requires 0 < l < h, got l = {}, h = {}",
                l, h
            )));
        }
        Ok(CutoffProfile { h, l })
    }

    /// Default pairing l = h/16.
    pub fn with_default_width(h: T) -> Result<Self> {
        Self::new(h, h / T::of(16.0))
    }

    /// Ramp value eta(z).
    pub fn eta(&self, z: T) -> T {
        let s = (z - (self.h - self.l)) / self.l;
        if s <= T::zero() {
            T::zero()
        } else if s >= T::one() {
            T::one()
        } else {
            s * s * s * (T::of(10.0) - T::of(15.0) * s + T::of(6.0) * s * s)
        }
    }

    /// Ramp derivative eta'(z); bounded by 1.875/l, attained at z = h - l/2.
    pub fn eta_prime(&self, z: T) -> T {
        let s = (z - (self.h - self.l)) / self.l;
        if s <= T::zero() || s >= T::one() {
            T::zero()
        } else {
            let one_minus = T::one() - s;
            T::of(30.0) * s * s * one_minus * one_minus / self.l
        }
    }

    /// theta_{h,l}(x) = eta(d(x)).
    pub fn theta(&self, geometry: &DomainGeometry<T>, x: [T; 3]) -> Result<T> {
        Ok(self.eta(geometry.distance_to_boundary(x)?))
    }

    /// (theta, grad theta) at x. grad theta = -eta'(d(x)) n(m(x)), zero
    /// outside the band; the projection is only consulted where the gradient
    /// is nonzero.
    pub fn evaluate(
        &self,
        geometry: &DomainGeometry<T>,
        x: [T; 3],
    ) -> Result<(T, [T; 3])> {
        let d = geometry.distance_to_boundary(x)?;
        let theta = self.eta(d);
        let dp = self.eta_prime(d);
        if dp == T::zero() {
            return Ok((theta, [T::zero(); 3]));
        }
        let (_, n) = geometry.boundary_projection(x)?;
        Ok((theta, [-dp * n[0], -dp * n[1], -dp * n[2]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn ball_center_distance_is_radius() {
        let g = DomainGeometry::ball(1.0f64);
        assert!((g.distance_to_boundary([0.0, 0.0, 0.0]).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn wall_box_distance_nearest_face() {
        let g = DomainGeometry::wall_box([1.0f64, 1.0, 1.0]);
        let d = g.distance_to_boundary([0.1, 0.5, 0.5]).unwrap();
        assert!((d - 0.1).abs() < TOL);
    }

    #[test]
    fn periodic_distance_is_sentinel() {
        let g = DomainGeometry::periodic_box([1.0f64, 1.0, 1.0]);
        assert!(g.distance_to_boundary([0.3, 0.3, 0.3]).unwrap().is_infinite());
    }

    #[test]
    fn outside_point_is_domain_error() {
        let g = DomainGeometry::wall_box([1.0f64, 1.0, 1.0]);
        assert!(matches!(
            g.distance_to_boundary([1.5, 0.5, 0.5]),
            Err(CgError::Domain(_))
        ));
    }

    #[test]
    fn box_projection_flat_face() {
        let g = DomainGeometry::wall_box([1.0f64, 1.0, 1.0]);
        let (m, n) = g.boundary_projection([0.1, 0.5, 0.5]).unwrap();
        assert_eq!(m, [0.0, 0.5, 0.5]);
        assert_eq!(n, [-1.0, 0.0, 0.0]);
    }

    #[test]
    fn ball_projection_radial() {
        let g = DomainGeometry::ball(1.0f64);
        let (m, n) = g.boundary_projection([0.5, 0.0, 0.0]).unwrap();
        assert!((m[0] - 1.0).abs() < TOL && m[1].abs() < TOL);
        assert!((n[0] - 1.0).abs() < TOL);
    }

    #[test]
    fn ball_center_projection_is_range_error() {
        let g = DomainGeometry::ball(1.0f64);
        assert!(matches!(
            g.boundary_projection([0.0, 0.0, 0.0]),
            Err(CgError::Range(_))
        ));
    }

    #[test]
    fn periodic_projection_unsupported() {
        let g = DomainGeometry::periodic_box([1.0f64, 1.0, 1.0]);
        assert!(matches!(
            g.boundary_projection([0.5, 0.5, 0.5]),
            Err(CgError::UnsupportedShape(_))
        ));
    }

    #[test]
    fn box_edge_diagonal_is_ambiguous() {
        let g = DomainGeometry::wall_box([1.0f64, 1.0, 1.0]);
        assert!(g.projection_is_ambiguous([0.25, 0.25, 0.5]));
        assert!(!g.projection_is_ambiguous([0.25, 0.3, 0.5]));
    }

    #[test]
    fn distance_gradient_matches_normal() {
        // grad d = -n(m(x)) checked by central differences at spacing
        // 1e-4 * extent, tolerance 1e-6.
        let step = 1e-4;
        let cases: Vec<(DomainGeometry<f64>, [f64; 3])> = vec![
            (DomainGeometry::wall_box([1.0, 1.0, 1.0]), [0.13, 0.52, 0.61]),
            (DomainGeometry::ball(1.0), [0.3, 0.4, 0.5]),
        ];
        for (g, x) in cases {
            let (_, n) = g.boundary_projection(x).unwrap();
            let mut grad = [0.0; 3];
            let mut norm2 = 0.0;
            for k in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[k] += step;
                xm[k] -= step;
                grad[k] = (g.distance_to_boundary(xp).unwrap()
                    - g.distance_to_boundary(xm).unwrap())
                    / (2.0 * step);
                norm2 += grad[k] * grad[k];
            }
            assert!((norm2.sqrt() - 1.0).abs() < 1e-6, "|grad d| = {}", norm2.sqrt());
            for k in 0..3 {
                assert!((grad[k] + n[k]).abs() < 1e-6, "grad d != -n at axis {k}");
            }
        }
    }

    #[test]
    fn cutoff_endpoints_and_bound() {
        let h = 0.25f64;
        let l = h / 16.0;
        let p = CutoffProfile::new(h, l).unwrap();
        assert_eq!(p.eta(h), 1.0);
        assert_eq!(p.eta(h - l), 0.0);
        assert_eq!(p.eta_prime(h), 0.0);
        assert_eq!(p.eta_prime(h - l), 0.0);
        // midpoint derivative is exactly 15/(8 l)
        let mid = p.eta_prime(h - l / 2.0);
        assert!((mid - 1.875 / l).abs() < 1e-9 / l);
        // monotone, in [0,1], derivative bounded
        let mut prev = -1.0;
        for i in 0..=1000 {
            let z = (h - l) + l * (i as f64) / 1000.0;
            let v = p.eta(z);
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev - 1e-15);
            assert!(p.eta_prime(z) <= 1.875 / l + 1e-9);
            prev = v;
        }
    }

    #[test]
    fn cutoff_gradient_direction_on_box_face() {
        // d(x) = h - l/2 near the x1 = 0 face: outward normal is -e1, so
        // grad theta = -eta' * n = +eta' * e1.
        let g = DomainGeometry::wall_box([1.0f64, 1.0, 1.0]);
        let h = 0.25;
        let l = h / 16.0;
        let p = CutoffProfile::new(h, l).unwrap();
        let x = [h - l / 2.0, 0.5, 0.5];
        let (theta, grad) = p.evaluate(&g, x).unwrap();
        assert!(theta > 0.0 && theta < 1.0);
        assert!(grad[0] > 0.0);
        assert!((grad[0] - 1.875 / l).abs() < 1e-9 / l);
        assert_eq!(grad[1], 0.0);
        assert_eq!(grad[2], 0.0);
    }
}
