//! Planar geometry: 2D vectors and axis-aligned boxes.
//!
//! Boxes carry an explicit [`Aabb::Empty`] value so that chains of
//! intersections short-circuit unambiguously instead of producing inverted
//! coordinates.

use std::ops::{Add, Mul, Sub};

/// A point or displacement in the plane, in meters.
#[derive(Clone, Copy, PartialEq, Debug, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn chebyshev_distance(self, other: Vec2) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    /// Rescale to the given length. The zero vector stays zero.
    pub fn scaled_to(self, len: f64) -> Vec2 {
        let n = self.norm();
        if n == 0.0 {
            Vec2::ZERO
        } else {
            self * (len / n)
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

/// Axis-aligned bounding box, in meters.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Aabb {
    Empty,
    Bounds { min: Vec2, max: Vec2 },
}

impl Aabb {
    /// Box from its two corners. Panics if any coordinate is inverted;
    /// callers that may produce inverted corners should use `intersect`,
    /// which yields `Empty` instead.
    pub fn new(min: Vec2, max: Vec2) -> Aabb {
        assert!(
            min.x <= max.x && min.y <= max.y,
            "inverted box corners: min={min:?} max={max:?}"
        );
        Aabb::Bounds { min, max }
    }

    /// Degenerate box containing exactly one point.
    pub fn point(p: Vec2) -> Aabb {
        Aabb::Bounds { min: p, max: p }
    }

    /// Closed square centered at `center` with side length `2 * half_side`,
    /// i.e. all points within Chebyshev distance `half_side` of the center.
    pub fn square(center: Vec2, half_side: f64) -> Aabb {
        assert!(half_side >= 0.0, "negative half side: {half_side}");
        let r = Vec2::new(half_side, half_side);
        Aabb::Bounds { min: center - r, max: center + r }
    }

    pub fn is_empty(self) -> bool {
        matches!(self, Aabb::Empty)
    }

    /// Componentwise max of mins and min of maxes; `Empty` when the boxes
    /// are disjoint or either input is `Empty`.
    pub fn intersect(self, other: Aabb) -> Aabb {
        match (self, other) {
            (Aabb::Bounds { min: a0, max: a1 }, Aabb::Bounds { min: b0, max: b1 }) => {
                let min = Vec2::new(a0.x.max(b0.x), a0.y.max(b0.y));
                let max = Vec2::new(a1.x.min(b1.x), a1.y.min(b1.y));
                if min.x <= max.x && min.y <= max.y {
                    Aabb::Bounds { min, max }
                } else {
                    Aabb::Empty
                }
            }
            _ => Aabb::Empty,
        }
    }

    /// Grow the box by `r` on every side. Dilating `Empty` is a contract
    /// violation.
    pub fn dilate(self, r: f64) -> Aabb {
        assert!(r >= 0.0, "negative dilation radius: {r}");
        match self {
            Aabb::Empty => panic!("cannot dilate the empty box"),
            Aabb::Bounds { min, max } => {
                let d = Vec2::new(r, r);
                Aabb::Bounds { min: min - d, max: max + d }
            }
        }
    }

    /// Midpoint of the corners. Taking the center of `Empty` is a contract
    /// violation.
    pub fn center(self) -> Vec2 {
        match self {
            Aabb::Empty => panic!("the empty box has no center"),
            Aabb::Bounds { min, max } => Vec2::new((min.x + max.x) / 2.0, (min.y + max.y) / 2.0),
        }
    }

    pub fn contains_point(self, p: Vec2) -> bool {
        match self {
            Aabb::Empty => false,
            Aabb::Bounds { min, max } => {
                min.x <= p.x && p.x <= max.x && min.y <= p.y && p.y <= max.y
            }
        }
    }

    /// Whether `inner` lies within this box, with `slack` of tolerance on
    /// every side. `Empty` is contained in everything.
    pub fn contains_box(self, inner: Aabb, slack: f64) -> bool {
        match (self, inner) {
            (_, Aabb::Empty) => true,
            (Aabb::Empty, _) => false,
            (Aabb::Bounds { min: o0, max: o1 }, Aabb::Bounds { min: i0, max: i1 }) => {
                o0.x - slack <= i0.x
                    && o0.y - slack <= i0.y
                    && i1.x <= o1.x + slack
                    && i1.y <= o1.y + slack
            }
        }
    }

    /// Corners of a non-empty box.
    pub fn corners(self) -> Option<(Vec2, Vec2)> {
        match self {
            Aabb::Empty => None,
            Aabb::Bounds { min, max } => Some((min, max)),
        }
    }
}
