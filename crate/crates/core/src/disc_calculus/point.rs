use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

/// Slack allowed beyond the unit circle before a point is rejected.
pub const DISC_SLACK: f64 = 1e-12;

/// A point of the closed unit disc in cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DiscPoint {
    pub x: f64,
    pub y: f64,
}

impl DiscPoint {
    pub const ORIGIN: DiscPoint = DiscPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        DiscPoint { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        DiscPoint { x: r * c, y: r * s }
    }

    pub fn r(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn r2(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn theta(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn in_disc(&self) -> bool {
        self.r() <= 1.0 + DISC_SLACK
    }

    pub fn dist(&self, o: DiscPoint) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        DiscPoint { x: a[0], y: a[1] }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotate counterclockwise about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        DiscPoint { x: c * self.x - s * self.y, y: s * self.x + c * self.y }
    }
}

impl Add for DiscPoint {
    type Output = DiscPoint;
    fn add(self, o: DiscPoint) -> DiscPoint {
        DiscPoint { x: self.x + o.x, y: self.y + o.y }
    }
}

impl Sub for DiscPoint {
    type Output = DiscPoint;
    fn sub(self, o: DiscPoint) -> DiscPoint {
        DiscPoint { x: self.x - o.x, y: self.y - o.y }
    }
}

impl Mul<DiscPoint> for f64 {
    type Output = DiscPoint;
    fn mul(self, p: DiscPoint) -> DiscPoint {
        DiscPoint { x: self * p.x, y: self * p.y }
    }
}

/// A point of the solid torus S¹ × D².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolidTorusPoint {
    pub s: f64,
    pub p: DiscPoint,
}

impl SolidTorusPoint {
    /// Builds the point with `s` reduced to [0, 2π).
    pub fn new(s: f64, p: DiscPoint) -> Self {
        SolidTorusPoint { s: normalize_angle(s), p }
    }

    pub fn from_polar(s: f64, r: f64, theta: f64) -> Self {
        Self::new(s, DiscPoint::from_polar(r, theta))
    }
}

/// Reduce an angle to [0, 2π).
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_round_trip() {
        for &(r, t) in &[(0.3, 1.0), (1.0, -2.5), (1e-6, 3.0), (0.999, 0.0)] {
            let p = DiscPoint::from_polar(r, t);
            assert!((p.r() - r).abs() <= 1e-12);
            assert!((p.theta() - t).abs() <= 1e-12);
        }
    }

    #[test]
    fn s_is_normalized() {
        let q = SolidTorusPoint::new(-0.5, DiscPoint::ORIGIN);
        assert!((q.s - (TAU - 0.5)).abs() < 1e-15);
        let q = SolidTorusPoint::new(4.0 * TAU + 0.25, DiscPoint::ORIGIN);
        assert!((q.s - 0.25).abs() < 1e-12);
        assert!(SolidTorusPoint::new(TAU, DiscPoint::ORIGIN).s < TAU);
    }
}
