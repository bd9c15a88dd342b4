use alloc::vec::Vec;

use crate::error::Error;
use crate::geometry::{Point, Window};

/// Points observed inside a rectangular window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    window: Window,
    points: Vec<Point>,
}

impl PointPattern {
    pub fn new(window: Window, points: Vec<Point>) -> Result<Self, Error> {
        if let Some((index, p)) = points.iter().enumerate().find(|(_, p)| !window.contains(**p)) {
            return Err(Error::PointOutsideWindow { index, x: p.x, y: p.y });
        }
        Ok(Self { window, points })
    }

    pub fn empty(window: Window) -> Self {
        Self { window, points: Vec::new() }
    }

    #[inline]
    pub fn window(&self) -> &Window {
        &self.window
    }

    #[inline]
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_points_outside() {
        let w = Window::new(1.0, 1.0).unwrap();
        let err = PointPattern::new(w, vec![Point::new(0.5, 0.5), Point::new(1.5, 0.5)]).unwrap_err();
        assert_eq!(err, Error::PointOutsideWindow { index: 1, x: 1.5, y: 0.5 });
        assert_eq!(PointPattern::new(w, vec![Point::new(1.0, 0.0)]).unwrap().len(), 1);
    }
}
