//! Plane points, 2x2 matrices and reduction onto the unit torus.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

/// A point of the plane. Used both for lift coordinates in R² and for
/// torus points reduced into `[0, 1)²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotate(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Quarter turn counter-clockwise, `(x, y) -> (-y, x)`.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    /// Subtract the nearest integer vector, leaving components in `[-1/2, 1/2]`.
    pub fn wrap_centered(self) -> Point2 {
        Point2::new(self.x - self.x.round(), self.y - self.y.round())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, o: Point2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// An integer lattice vector, the deck transformations of the covering R² -> T².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Lattice {
    pub x: i64,
    pub y: i64,
}

impl Lattice {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn as_point(self) -> Point2 {
        Point2::new(self.x as f64, self.y as f64)
    }
}

/// Componentwise reduction mod 1 into `[0, 1)`.
pub fn project(p: Point2) -> Point2 {
    Point2::new(reduce_unit(p.x), reduce_unit(p.y))
}

/// `v mod 1` in `[0, 1)`. `rem_euclid` can round up to exactly 1.0 for tiny
/// negative inputs, which is folded back to 0.
pub fn reduce_unit(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance on the flat torus between the projections of `a` and `b`.
pub fn torus_distance(a: Point2, b: Point2) -> f64 {
    (a - b).wrap_centered().norm()
}

/// Row-major 2x2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        m: [[1.0, 0.0], [0.0, 1.0]],
    };

    /// The Poisson matrix `[[0, -1], [1, 0]]`.
    pub const POISSON: Mat2 = Mat2 {
        m: [[0.0, -1.0], [1.0, 0.0]],
    };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    /// `u vᵀ`
    pub fn outer(u: Point2, v: Point2) -> Self {
        Mat2::new(u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y)
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn apply(&self, v: Point2) -> Point2 {
        Point2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    pub fn sub_identity(&self) -> Mat2 {
        Mat2::new(
            self.m[0][0] - 1.0,
            self.m[0][1],
            self.m[1][0],
            self.m[1][1] - 1.0,
        )
    }

    /// Solve `self * x = rhs`. Returns `None` when `|det| <= min_det`.
    pub fn solve(&self, rhs: Point2, min_det: f64) -> Option<Point2> {
        let d = self.det();
        if !(d.abs() > min_det) {
            return None;
        }
        Some(Point2::new(
            (self.m[1][1] * rhs.x - self.m[0][1] * rhs.y) / d,
            (self.m[0][0] * rhs.y - self.m[1][0] * rhs.x) / d,
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Both eigenvalues, ordered by the sign of the discriminant root.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let half_tr = 0.5 * self.trace();
        let disc = Complex64::new(half_tr * half_tr - self.det(), 0.0).sqrt();
        let h = Complex64::new(half_tr, 0.0);
        [h + disc, h - disc]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.m;
        let b = &o.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + o.m[0][0],
            self.m[0][1] + o.m[0][1],
            self.m[1][0] + o.m[1][0],
            self.m[1][1] + o.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] - o.m[0][0],
            self.m[0][1] - o.m[0][1],
            self.m[1][0] - o.m[1][0],
            self.m[1][1] - o.m[1][1],
        )
    }
}
