//! Exactly area-preserving building blocks for torus maps.
//!
//! Every generator acts on lift coordinates in R², commutes with integer
//! translations, has Jacobian determinant 1 and a closed-form inverse.

use crate::bump::BumpProfile;
use crate::error::{Error, Result};
use crate::geometry::{Mat2, Point2};

/// A closed interval `[lo, hi] ⊂ [0, 1]` of one torus coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    lo: f64,
    hi: f64,
}

impl Band {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidBand { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    /// Periodic band profile `β(s) = b(|s - mid| / half_width)` and its derivative.
    pub fn profile(&self, profile: &BumpProfile, s: f64) -> (f64, f64) {
        let delta = s - self.mid();
        let delta = delta - delta.round();
        let half = self.half_width();
        let rho = delta.abs() / half;
        if rho >= 1.0 {
            return (0.0, 0.0);
        }
        let value = profile.value(rho);
        let slope = profile.derivative(rho) * delta.signum() / half;
        (value, slope)
    }

    /// `∫₀¹ β(s) ds`
    pub fn profile_integral(&self, profile: &BumpProfile) -> f64 {
        (self.hi - self.lo) * profile.integral()
    }

    /// Whether `s` (mod 1) lies in the band.
    pub fn contains(&self, s: f64) -> bool {
        let delta = s - self.mid();
        (delta - delta.round()).abs() <= self.half_width()
    }
}

/// An embedded round disk on the torus with radius in `(0, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    center: Point2,
    radius: f64,
}

impl Disk {
    pub fn new(center: Point2, radius: f64) -> Result<Self> {
        if !(center.is_finite() && radius.is_finite()) {
            return Err(Error::InvalidArgument("non-finite disk parameters".into()));
        }
        if !(radius > 0.0 && radius < 0.5) {
            return Err(Error::DiskTooLarge { radius });
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Disk::new(self.center, radius)
    }

    /// Offset from the center to the nearest lattice copy of `p`.
    pub fn offset(&self, p: Point2) -> Point2 {
        (p - self.center).wrap_centered()
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.offset(p).norm() <= self.radius
    }

    /// Unit-disk chart coordinates `(p - center) / radius` of the nearest copy of `p`.
    pub fn to_chart(&self, p: Point2) -> Point2 {
        self.offset(p) * (1.0 / self.radius)
    }

    pub fn from_chart(&self, u: Point2) -> Point2 {
        self.center + u * self.radius
    }
}

/// Shear `(x, y) -> (x + eps·β(y), y)` (or its transpose), supported in a band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shear {
    pub eps: f64,
    pub profile: BumpProfile,
    pub band: Band,
}

/// Rotation about a disk center by `t·b(|p - c| / r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskTwist {
    pub disk: Disk,
    pub t: f64,
    pub profile: BumpProfile,
}

impl DiskTwist {
    fn angle_and_gradient(&self, d: Point2) -> (f64, Point2) {
        let r = self.disk.radius();
        let dist = d.norm();
        let rho = dist / r;
        let angle = self.t * self.profile.value(rho);
        let slope = self.profile.derivative(rho);
        let grad = if slope == 0.0 || dist == 0.0 {
            Point2::ORIGIN
        } else {
            d * (self.t * slope / (r * dist))
        };
        (angle, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    Translation { a: f64, b: f64 },
    /// `x += eps·β(y)`
    HorizontalShear(Shear),
    /// `y += eps·β(x)`
    VerticalShear(Shear),
    DiskTwist(DiskTwist),
}

impl Generator {
    pub fn translation(a: f64, b: f64) -> Self {
        Generator::Translation { a, b }
    }

    pub fn horizontal_shear(eps: f64, profile: BumpProfile, band: Band) -> Self {
        Generator::HorizontalShear(Shear { eps, profile, band })
    }

    pub fn vertical_shear(eps: f64, profile: BumpProfile, band: Band) -> Self {
        Generator::VerticalShear(Shear { eps, profile, band })
    }

    pub fn disk_twist(disk: Disk, t: f64, profile: BumpProfile) -> Self {
        Generator::DiskTwist(DiskTwist { disk, t, profile })
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        match *self {
            Generator::Translation { a, b } => Point2::new(p.x + a, p.y + b),
            Generator::HorizontalShear(s) => {
                let (beta, _) = s.band.profile(&s.profile, p.y);
                Point2::new(p.x + s.eps * beta, p.y)
            }
            Generator::VerticalShear(s) => {
                let (beta, _) = s.band.profile(&s.profile, p.x);
                Point2::new(p.x, p.y + s.eps * beta)
            }
            Generator::DiskTwist(tw) => {
                let d = tw.disk.offset(p);
                if d.norm() >= tw.profile.outer() * tw.disk.radius() {
                    return p;
                }
                let (angle, _) = tw.angle_and_gradient(d);
                p + (d.rotate(angle) - d)
            }
        }
    }

    pub fn jacobian(&self, p: Point2) -> Mat2 {
        self.apply_with_jacobian(p).1
    }

    pub fn apply_with_jacobian(&self, p: Point2) -> (Point2, Mat2) {
        match *self {
            Generator::Translation { a, b } => (Point2::new(p.x + a, p.y + b), Mat2::IDENTITY),
            Generator::HorizontalShear(s) => {
                let (beta, dbeta) = s.band.profile(&s.profile, p.y);
                (
                    Point2::new(p.x + s.eps * beta, p.y),
                    Mat2::new(1.0, s.eps * dbeta, 0.0, 1.0),
                )
            }
            Generator::VerticalShear(s) => {
                let (beta, dbeta) = s.band.profile(&s.profile, p.x);
                (
                    Point2::new(p.x, p.y + s.eps * beta),
                    Mat2::new(1.0, 0.0, s.eps * dbeta, 1.0),
                )
            }
            Generator::DiskTwist(tw) => {
                let d = tw.disk.offset(p);
                if d.norm() >= tw.profile.outer() * tw.disk.radius() {
                    return (p, Mat2::IDENTITY);
                }
                let (angle, grad) = tw.angle_and_gradient(d);
                let rotated = d.rotate(angle);
                // D(R(φ(d)) d) = R(φ) + (J R(φ) d) ∇φᵀ
                let jac = Mat2::rotation(angle) + Mat2::outer(rotated.perp(), grad);
                (p + (rotated - d), jac)
            }
        }
    }

    pub fn inverse(&self) -> Generator {
        match *self {
            Generator::Translation { a, b } => Generator::Translation { a: -a, b: -b },
            Generator::HorizontalShear(s) => Generator::HorizontalShear(Shear { eps: -s.eps, ..s }),
            Generator::VerticalShear(s) => Generator::VerticalShear(Shear { eps: -s.eps, ..s }),
            Generator::DiskTwist(tw) => Generator::DiskTwist(DiskTwist { t: -tw.t, ..tw }),
        }
    }

    /// Whether `p` lies outside the closed support of the generator (the map
    /// is exactly the identity there). Translations are never supported away
    /// from anything unless trivial.
    pub fn fixes_neighbourhood_of(&self, p: Point2) -> bool {
        match *self {
            Generator::Translation { a, b } => a == 0.0 && b == 0.0,
            Generator::HorizontalShear(s) => s.eps == 0.0 || !s.band.contains(p.y),
            Generator::VerticalShear(s) => s.eps == 0.0 || !s.band.contains(p.x),
            Generator::DiskTwist(tw) => tw.t == 0.0 || !tw.disk.contains(p),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Generator::Translation { .. } => "translate",
            Generator::HorizontalShear(_) => "hshear",
            Generator::VerticalShear(_) => "vshear",
            Generator::DiskTwist(_) => "disktwist",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_generators() -> Vec<Generator> {
        let prof = BumpProfile::new(0.3, 0.7).unwrap();
        vec![
            Generator::translation(0.3, -0.4),
            Generator::horizontal_shear(0.15, prof, Band::new(0.2, 0.6).unwrap()),
            Generator::vertical_shear(-0.2, prof, Band::new(0.0, 0.3).unwrap()),
            Generator::disk_twist(
                Disk::new(Point2::new(0.4, 0.6), 0.3).unwrap(),
                1.3,
                BumpProfile::default(),
            ),
        ]
    }

    fn fd_jacobian(g: &Generator, p: Point2, h: f64) -> Mat2 {
        let dx = (g.apply(p + Point2::new(h, 0.0)) - g.apply(p - Point2::new(h, 0.0))) * (0.5 / h);
        let dy = (g.apply(p + Point2::new(0.0, h)) - g.apply(p - Point2::new(0.0, h))) * (0.5 / h);
        Mat2::new(dx.x, dy.x, dx.y, dy.y)
    }

    #[test]
    fn band_and_disk_validation() {
        assert!(Band::new(0.5, 0.5).is_err());
        assert!(Band::new(-0.1, 0.5).is_err());
        assert!(Band::new(0.0, 1.0).is_ok());
        assert!(matches!(
            Disk::new(Point2::ORIGIN, 0.5),
            Err(Error::DiskTooLarge { .. })
        ));
        assert!(Disk::new(Point2::ORIGIN, 0.0).is_err());
    }

    #[test]
    fn twist_fixes_disk_boundary() {
        let disk = Disk::new(Point2::new(0.5, 0.5), 0.25).unwrap();
        let g = Generator::disk_twist(disk, 1.0, BumpProfile::default());
        for k in 0..64 {
            let th = k as f64 * std::f64::consts::TAU / 64.0;
            let p = disk.center() + Point2::new(th.cos(), th.sin()) * 0.25;
            assert_eq!(g.apply(p), p);
        }
    }

    #[test]
    fn twist_rotates_plateau_rigidly() {
        let disk = Disk::new(Point2::new(0.5, 0.5), 0.3).unwrap();
        let g = Generator::disk_twist(disk, 0.8, BumpProfile::default());
        let p = Point2::new(0.55, 0.52);
        let expect = disk.center() + (p - disk.center()).rotate(0.8);
        assert!((g.apply(p) - expect).norm() < 1e-15);
    }

    #[test]
    fn twist_acts_on_every_lattice_copy() {
        let disk = Disk::new(Point2::new(0.05, 0.95), 0.2).unwrap();
        let g = Generator::disk_twist(disk, 0.6, BumpProfile::default());
        let p = Point2::new(0.98, 0.02);
        let q = g.apply(p);
        assert!((q - p).norm() > 1e-3);
        let shifted = g.apply(p + Point2::new(-3.0, 2.0));
        assert!((shifted - q - Point2::new(-3.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn shear_identity_outside_band() {
        let prof = BumpProfile::default();
        let g = Generator::horizontal_shear(0.3, prof, Band::new(0.2, 0.4).unwrap());
        let p = Point2::new(0.3, 0.7);
        assert_eq!(g.apply(p), p);
        assert_eq!(g.jacobian(p), Mat2::IDENTITY);
        assert!(g.fixes_neighbourhood_of(p));
        let inside = Point2::new(0.3, 0.3);
        assert!((g.apply(inside).x - 0.6).abs() < 1e-15);
    }

    #[test]
    fn band_profile_wraps_around_zero() {
        let prof = BumpProfile::default();
        let band = Band::new(0.0, 0.1).unwrap();
        let (a, _) = band.profile(&prof, 0.05);
        let (b, _) = band.profile(&prof, 1.05);
        let (c, _) = band.profile(&prof, 0.999);
        assert_eq!(a, 1.0);
        assert_eq!(a, b);
        assert_eq!(c, 0.0);
    }

    #[test]
    fn jacobians_are_unimodular_and_match_differences() {
        for g in sample_generators() {
            for i in 0..40 {
                for j in 0..40 {
                    let p = Point2::new(i as f64 / 40.0 + 0.0123, j as f64 / 40.0 + 0.0071);
                    let jac = g.jacobian(p);
                    assert!((jac.det() - 1.0).abs() < 1e-12, "{g:?} at {p:?}");
                    let fd = fd_jacobian(&g, p, 1e-6);
                    assert!((fd - jac).max_abs() < 1e-6, "{g:?} at {p:?}: {fd:?} vs {jac:?}");
                }
            }
        }
    }

    #[test]
    fn inverses_round_trip() {
        for g in sample_generators() {
            let inv = g.inverse();
            for i in 0..30 {
                let p = Point2::new(0.033 * i as f64, 0.71 - 0.021 * i as f64);
                assert!((inv.apply(g.apply(p)) - p).norm() < 1e-13);
                assert!((g.apply(inv.apply(p)) - p).norm() < 1e-13);
            }
        }
    }
}
