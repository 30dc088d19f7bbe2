//! Geographic primitives.
//!
//! Distances are computed in a local equirectangular plane. That is accurate
//! to well under a metre over river-scale maps (tens of kilometres), which is
//! all the navigation code needs.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Mean Earth radius in metres.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

const DEG: f64 = core::f64::consts::PI / 180.0;

/// A WGS-84 position plus depth below the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoCoordinate {
    pub lat: f64,
    pub lon: f64,
    #[serde(default)]
    pub depth: f64,
}

impl GeoCoordinate {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon, depth: 0.0 }
    }

    pub const fn with_depth(lat: f64, lon: f64, depth: f64) -> Self {
        Self { lat, lon, depth }
    }

    /// True when lat/lon/depth are finite and inside their legal ranges.
    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && self.depth.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
            && self.depth >= 0.0
    }

    /// Horizontal distance in metres.
    pub fn distance_m(&self, other: &GeoCoordinate) -> f64 {
        let frame = LocalFrame::about(&[*self, *other]);
        (frame.to_plane(other) - frame.to_plane(self)).norm()
    }

    /// Moves the coordinate by a planar displacement (metres east, metres
    /// north) using the tangent plane at the current position.
    pub fn offset_m(&self, d: Vec2) -> GeoCoordinate {
        let frame = LocalFrame::at(self);
        let (lat, lon) = frame.from_plane(d);
        GeoCoordinate { lat, lon, depth: self.depth }
    }
}

/// A planar vector. For velocities this is (east, north) in m/s, for
/// positions in a [`LocalFrame`] it is metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub east: f64,
    pub north: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { east: 0.0, north: 0.0 };

    pub const fn new(east: f64, north: f64) -> Self {
        Self { east, north }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.east * other.east + self.north * other.north
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.east, self.north)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.east * k, self.north * k)
    }

    /// Linear interpolation `(1 - t)·self + t·other`.
    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        Vec2::new(
            (1.0 - t) * self.east + t * other.east,
            (1.0 - t) * self.north + t * other.north,
        )
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.east + rhs.east, self.north + rhs.north)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.east += rhs.east;
        self.north += rhs.north;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.east - rhs.east, self.north - rhs.north)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.east, -self.north)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        self.scale(k)
    }
}

/// Equirectangular projection about a reference point.
#[derive(Debug, Clone, Copy)]
pub struct LocalFrame {
    lat0: f64,
    lon0: f64,
    cos_lat0: f64,
}

impl LocalFrame {
    /// Frame centred on a single point.
    pub fn at(origin: &GeoCoordinate) -> Self {
        Self {
            lat0: origin.lat,
            lon0: origin.lon,
            cos_lat0: libm::cos(origin.lat * DEG),
        }
    }

    /// Frame centred on the centroid (mean lat/lon) of `points`.
    ///
    /// Panics if `points` is empty.
    pub fn about(points: &[GeoCoordinate]) -> Self {
        assert!(!points.is_empty(), "LocalFrame::about needs at least one point");
        let n = points.len() as f64;
        let lat = points.iter().map(|p| p.lat).sum::<f64>() / n;
        let lon = points.iter().map(|p| p.lon).sum::<f64>() / n;
        Self::at(&GeoCoordinate::new(lat, lon))
    }

    pub fn to_plane(&self, p: &GeoCoordinate) -> Vec2 {
        Vec2::new(
            EARTH_RADIUS_M * (p.lon - self.lon0) * DEG * self.cos_lat0,
            EARTH_RADIUS_M * (p.lat - self.lat0) * DEG,
        )
    }

    /// Inverse of [`LocalFrame::to_plane`], returning `(lat, lon)`.
    pub fn from_plane(&self, v: Vec2) -> (f64, f64) {
        let lat = self.lat0 + v.north / EARTH_RADIUS_M / DEG;
        let lon = self.lon0 + v.east / (EARTH_RADIUS_M * self.cos_lat0) / DEG;
        (lat, lon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_arc_minute_of_latitude_is_about_a_nautical_mile() {
        let a = GeoCoordinate::new(12.0, 77.0);
        let b = GeoCoordinate::new(12.0 + 1.0 / 60.0, 77.0);
        let d = a.distance_m(&b);
        assert!((d - 1853.25).abs() < 0.5, "{d}");
    }

    #[test]
    fn offset_round_trips_through_the_plane() {
        let a = GeoCoordinate::new(12.97, 77.59);
        let b = a.offset_m(Vec2::new(30.0, -40.0));
        assert!((a.distance_m(&b) - 50.0).abs() < 1e-3);
    }

    #[test]
    fn validity_ranges() {
        assert!(GeoCoordinate::new(90.0, -180.0).is_valid());
        assert!(!GeoCoordinate::new(90.5, 0.0).is_valid());
        assert!(!GeoCoordinate::new(0.0, 180.1).is_valid());
        assert!(!GeoCoordinate::with_depth(0.0, 0.0, -1.0).is_valid());
        assert!(!GeoCoordinate::new(f64::NAN, 0.0).is_valid());
    }
}
