use serde::{Deserialize, Serialize};

use crate::geometry::PixelPoint;

/// Axis-aligned box in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelBox {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    #[serde(default = "one")]
    pub confidence: f64,
}

fn one() -> f64 {
    1.0
}

impl PixelBox {
    pub const fn new(left: f64, top: f64, width: f64, height: f64) -> Self {
        Self { left, top, width, height, confidence: 1.0 }
    }

    pub fn from_corners(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        Self::new(left, top, right - left, bottom - top)
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn area(&self) -> f64 {
        self.width.max(0.0) * self.height.max(0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.width > 0.0 && self.height > 0.0 && self.left.is_finite() && self.top.is_finite()
    }

    /// Bottom-center point, the box's ground contact.
    pub fn bottom_center(&self) -> PixelPoint {
        PixelPoint::new(self.left + 0.5 * self.width, self.bottom())
    }

    /// Same size, moved so that its bottom-center lands on `p`.
    pub fn with_bottom_center(&self, p: PixelPoint) -> PixelBox {
        PixelBox { left: p.u - 0.5 * self.width, top: p.v - self.height, ..*self }
    }

    pub fn intersection_area(&self, other: &PixelBox) -> f64 {
        let w = self.right().min(other.right()) - self.left.max(other.left);
        let h = self.bottom().min(other.bottom()) - self.top.max(other.top);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn iou(&self, other: &PixelBox) -> f64 {
        let inter = self.intersection_area(other);
        if inter == 0.0 {
            return 0.0;
        }
        inter / (self.area() + other.area() - inter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_basics() {
        let a = PixelBox::new(0.0, 0.0, 10.0, 10.0);
        assert_eq!(a.iou(&a), 1.0);
        let b = PixelBox::new(5.0, 0.0, 10.0, 10.0);
        assert!((a.iou(&b) - 50.0 / 150.0).abs() < 1e-15);
        assert_eq!(a.iou(&PixelBox::new(20.0, 20.0, 1.0, 1.0)), 0.0);
    }

    #[test]
    fn bottom_center_roundtrip() {
        let a = PixelBox::new(10.0, 20.0, 30.0, 60.0);
        assert_eq!(a.bottom_center(), PixelPoint::new(25.0, 80.0));
        assert_eq!(a.with_bottom_center(a.bottom_center()), a);
        let moved = a.with_bottom_center(PixelPoint::new(30.0, 80.0));
        assert_eq!(moved.left, 15.0);
        assert_eq!(moved.width, 30.0);
    }
}
