//! Action function and total action of disk-supported maps.
//!
//! Everything is computed in the unit-disk chart `u = (p − c) / r` of the
//! supporting disk, where the area form is `du ∧ dv` and the disk has area π.
//! For the polar primitive `(r²/2) dθ` the physical action is `r⁴` times the
//! chart value.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::Disk;
use crate::geometry::Point2;
use crate::map::TorusMap;
use crate::quadrature::{line_integral_pullback, pullback_density, DiskChart, DiskRule, Path, PrimitiveForm};

#[derive(Debug, Clone, Copy)]
pub struct ActionOptions {
    pub form: PrimitiveForm,
    pub path_nodes: usize,
    pub rule: DiskRule,
    /// Largest displacement tolerated near the boundary.
    pub support_tol: f64,
}

impl Default for ActionOptions {
    fn default() -> Self {
        Self {
            form: PrimitiveForm::default(),
            path_nodes: Path::DEFAULT_NODES,
            rule: DiskRule::default(),
            support_tol: 1e-10,
        }
    }
}

const SUPPORT_SAMPLES: usize = 256;
const SUPPORT_RADII: [f64; 3] = [0.999, 1.0, 1.001];

/// Largest displacement of `map` on circles just inside, on and just outside
/// the disk boundary; errors if it exceeds `tol`.
pub fn check_disk_support(map: &TorusMap, disk: &Disk, tol: f64) -> Result<f64> {
    let mut worst = 0.0_f64;
    for k in 0..SUPPORT_SAMPLES {
        let th = TAU * k as f64 / SUPPORT_SAMPLES as f64;
        let dir = Point2::new(th.cos(), th.sin());
        for rho in SUPPORT_RADII {
            let p = disk.from_chart(dir * rho);
            worst = worst.max(map.displacement(p).norm());
        }
    }
    if worst > tol {
        return Err(Error::NotDiskSupported {
            displacement: worst,
        });
    }
    Ok(worst)
}

/// Action function `g` (with `dg = h*λ − λ`, `g = 0` on the boundary) and
/// total action `A = ∫ g` of a disk-supported map.
#[derive(Debug, Clone)]
pub struct ActionProfile {
    disk: Disk,
    map: TorusMap,
    options: ActionOptions,
    total: f64,
    boundary_residual: f64,
}

impl ActionProfile {
    pub fn disk(&self) -> Disk {
        self.disk
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Total action in physical coordinates (`r⁴` times the chart value).
    pub fn physical_total(&self) -> f64 {
        self.total * self.disk.radius().powi(4)
    }

    /// Largest `|g|` at boundary points reached from the anchor `(1, 0)`
    /// through the disk interior.
    pub fn boundary_residual(&self) -> f64 {
        self.boundary_residual
    }

    pub fn options(&self) -> &ActionOptions {
        &self.options
    }

    /// `g(u)` at a chart point, integrated along the ray from `u/|u|`.
    pub fn g(&self, u: Point2) -> Result<f64> {
        let r = u.norm();
        if r > 1.0 + 1e-12 {
            return Err(Error::PathOutsideDisk { x: u.x, y: u.y });
        }
        let start = if r == 0.0 { Point2::new(1.0, 0.0) } else { u * (1.0 / r) };
        if start == u {
            return Ok(0.0);
        }
        let path = Path::segment(start, u, self.options.path_nodes)?;
        self.integrate_path(&path)
    }

    /// `g` at the physical torus point `p` (zero outside the disk).
    pub fn g_at(&self, p: Point2) -> Result<f64> {
        let u = self.disk.to_chart(p);
        if u.norm() >= 1.0 {
            return Ok(0.0);
        }
        self.g(u)
    }

    /// `∫_path (h*λ − λ)` for an arbitrary chart path.
    pub fn integrate_path(&self, path: &Path) -> Result<f64> {
        let chart = DiskChart {
            map: &self.map,
            disk: self.disk,
        };
        line_integral_pullback(&chart, &self.options.form, path)
    }
}

pub fn action_profile(map: &TorusMap, disk: &Disk, options: ActionOptions) -> Result<ActionProfile> {
    check_disk_support(map, disk, options.support_tol)?;
    let mut profile = ActionProfile {
        disk: *disk,
        map: map.clone(),
        options,
        total: 0.0,
        boundary_residual: 0.0,
    };
    // On each ray g(r) = −∫_r^1 ψ(s) ds with ψ the outward radial component
    // of h*λ − λ, so ∫ g r dr = −∫ ψ(s) s²/2 ds.
    let radial = options.rule.radial_nodes();
    let angular = options.rule.angular;
    let dtheta = TAU / angular as f64;
    let chart = DiskChart { map, disk: *disk };
    let per_ray: Vec<f64> = (0..angular)
        .into_par_iter()
        .map(|k| {
            let th = k as f64 * dtheta;
            let dir = Point2::new(th.cos(), th.sin());
            let acc: f64 = radial
                .iter()
                .map(|&(r, w)| w * 0.5 * r * pullback_density(&chart, &options.form, dir * r, dir))
                .sum();
            -acc * dtheta
        })
        .collect();
    profile.total = per_ray.iter().sum();

    let anchor = Point2::new(1.0, 0.0);
    let mut residual = 0.0_f64;
    for k in 1..64 {
        let th = TAU * k as f64 / 64.0;
        let end = Point2::new(th.cos(), th.sin());
        let path = Path::new(vec![anchor, Point2::ORIGIN, end], options.path_nodes)?;
        residual = residual.max(profile.integrate_path(&path)?.abs());
    }
    profile.boundary_residual = residual;
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdditivityReport {
    /// `A(f₂ ∘ f₁)`
    pub lhs: f64,
    /// `A(f₁) + A(f₂)`
    pub rhs: f64,
    pub residual: f64,
}

pub fn check_action_additivity(
    f1: &TorusMap,
    f2: &TorusMap,
    disk: &Disk,
    options: ActionOptions,
) -> Result<AdditivityReport> {
    let a1 = action_profile(f1, disk, options)?.total();
    let a2 = action_profile(f2, disk, options)?.total();
    let lhs = action_profile(&f2.compose(f1), disk, options)?.total();
    let rhs = a1 + a2;
    Ok(AdditivityReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::BumpProfile;
    use crate::generator::Generator;

    fn disk() -> Disk {
        Disk::new(Point2::new(0.5, 0.5), 0.25).unwrap()
    }

    fn twist(t: f64) -> TorusMap {
        Generator::disk_twist(disk(), t, BumpProfile::default()).into()
    }

    #[test]
    fn identity_has_zero_action() {
        let a = action_profile(&TorusMap::identity(), &disk(), ActionOptions::default()).unwrap();
        assert_eq!(a.total(), 0.0);
        assert_eq!(a.g(Point2::new(0.2, 0.1)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_maps_moving_the_boundary() {
        let f = TorusMap::from(Generator::translation(0.01, 0.0));
        assert!(matches!(
            action_profile(&f, &disk(), ActionOptions::default()),
            Err(Error::NotDiskSupported { .. })
        ));
        let big = Disk::new(Point2::new(0.5, 0.5), 0.3).unwrap();
        let f = TorusMap::from(Generator::disk_twist(big, 1.0, BumpProfile::new(0.5, 0.95).unwrap()));
        assert!(action_profile(&f, &disk(), ActionOptions::default()).is_err());
    }

    #[test]
    fn g_on_radial_path_matches_closed_form() {
        let a = action_profile(&twist(1.0), &disk(), ActionOptions::default()).unwrap();
        let b = BumpProfile::default();
        for r in [0.1, 0.4, 0.5, 0.6, 0.9] {
            // t ∫₁^r (s²/2) b'(s) ds by fine midpoint sums
            let n = 200_000;
            let h = (1.0 - r) / n as f64;
            let closed: f64 = -(0..n)
                .map(|i| {
                    let s = r + (i as f64 + 0.5) * h;
                    0.5 * s * s * b.derivative(s)
                })
                .sum::<f64>()
                * h;
            let g = a.g(Point2::new(0.0, r)).unwrap();
            assert!((g - closed).abs() < 1e-8, "r={r}: {g} vs {closed}");
        }
    }

    #[test]
    fn closed_loops_integrate_to_zero() {
        let a = action_profile(&twist(0.7), &disk(), ActionOptions::default()).unwrap();
        let path = Path::new(
            vec![
                Point2::new(0.1, 0.2),
                Point2::new(-0.6, 0.3),
                Point2::new(0.2, -0.7),
                Point2::new(0.1, 0.2),
            ],
            Path::DEFAULT_NODES,
        )
        .unwrap();
        let v = a.integrate_path(&path).unwrap();
        assert!(v.abs() < 1e-10, "{v}");
        assert!(a.boundary_residual() < 1e-9);
    }

    #[test]
    fn path_must_stay_in_disk() {
        let a = action_profile(&twist(0.7), &disk(), ActionOptions::default()).unwrap();
        let path = Path::segment(Point2::ORIGIN, Point2::new(1.2, 0.0), 64).unwrap();
        assert!(matches!(a.integrate_path(&path), Err(Error::PathOutsideDisk { .. })));
        assert!(a.g(Point2::new(0.9, 0.9)).is_err());
    }

    #[test]
    fn twist_action_is_positive_and_linear() {
        let opts = ActionOptions::default();
        let a1 = action_profile(&twist(1.0), &disk(), opts).unwrap().total();
        let a_half = action_profile(&twist(0.5), &disk(), opts).unwrap().total();
        assert!(a1 > 0.0);
        assert!((a_half - 0.5 * a1).abs() < 1e-9);
    }
}
