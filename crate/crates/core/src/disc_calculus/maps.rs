use super::point::DiscPoint;
use crate::linalg::Mat2;

/// A smooth self-map of the closed disc with Jacobian and optional inverse.
pub trait DiscMap: Send + Sync {
    fn apply(&self, p: DiscPoint) -> DiscPoint;

    /// Image and Jacobian. The default uses centered differences.
    fn apply_with_jacobian(&self, p: DiscPoint) -> (DiscPoint, Mat2) {
        let h = 1e-6;
        let q = self.apply(p);
        let ex = DiscPoint::new(h, 0.0);
        let ey = DiscPoint::new(0.0, h);
        let dx = self.apply(p + ex) - self.apply(p - ex);
        let dy = self.apply(p + ey) - self.apply(p - ey);
        let k = 0.5 / h;
        (q, Mat2::new(k * dx.x, k * dy.x, k * dx.y, k * dy.y))
    }

    fn inverse(&self, _p: DiscPoint) -> Option<DiscPoint> {
        None
    }
}

/// Rigid rotation about the origin.
#[derive(Debug, Clone, Copy)]
pub struct RotationMap {
    pub angle: f64,
}

impl DiscMap for RotationMap {
    fn apply(&self, p: DiscPoint) -> DiscPoint {
        p.rotated(self.angle)
    }

    fn apply_with_jacobian(&self, p: DiscPoint) -> (DiscPoint, Mat2) {
        (p.rotated(self.angle), Mat2::rotation(self.angle))
    }

    fn inverse(&self, p: DiscPoint) -> Option<DiscPoint> {
        Some(p.rotated(-self.angle))
    }
}

/// Identity map of the disc.
#[derive(Debug, Clone, Copy)]
pub struct IdentityMap;

impl DiscMap for IdentityMap {
    fn apply(&self, p: DiscPoint) -> DiscPoint {
        p
    }

    fn apply_with_jacobian(&self, p: DiscPoint) -> (DiscPoint, Mat2) {
        (p, Mat2::IDENTITY)
    }

    fn inverse(&self, p: DiscPoint) -> Option<DiscPoint> {
        Some(p)
    }
}
