//! Perturbation families: the disk-twist family `h_t` with its linear
//! action, and band shears that move a map's flux onto a rational vector.

use crate::bump::BumpProfile;
use crate::error::{Error, Result};
use crate::generator::{Band, Disk, Generator};
use crate::geometry::{Mat2, Point2};
use crate::invariants::{action_profile, flux_vector, ActionOptions, FluxVector};
use crate::map::TorusMap;
use crate::quadrature::GridSpec;

/// `h_t`: rotation of a disk by `t·b(r)`, a flow in `t` with `A(h_t) = t·A(h₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistFamily {
    disk: Disk,
    profile: BumpProfile,
    action_slope: f64,
}

impl TwistFamily {
    pub fn new(disk: Disk, profile: BumpProfile) -> Result<Self> {
        Self::with_options(disk, profile, ActionOptions::default())
    }

    /// Build from raw center and radius; fails with `DiskTooLarge` unless `0 < radius < 1/2`.
    pub fn from_parts(center: Point2, radius: f64, profile: BumpProfile) -> Result<Self> {
        Self::new(Disk::new(center, radius)?, profile)
    }

    pub fn with_options(disk: Disk, profile: BumpProfile, options: ActionOptions) -> Result<Self> {
        let unit = TorusMap::from(Generator::disk_twist(disk, 1.0, profile));
        let action_slope = action_profile(&unit, &disk, options)?.total();
        Ok(Self {
            disk,
            profile,
            action_slope,
        })
    }

    pub fn disk(&self) -> Disk {
        self.disk
    }

    pub fn profile(&self) -> BumpProfile {
        self.profile
    }

    /// `A(h₁)` in the unit-disk chart.
    pub fn action_slope(&self) -> f64 {
        self.action_slope
    }

    pub fn generator(&self, t: f64) -> Generator {
        Generator::disk_twist(self.disk, t, self.profile)
    }

    pub fn member(&self, t: f64) -> TorusMap {
        TorusMap::from(self.generator(t))
    }

    /// `A(h_t) = t·A(h₁)`
    pub fn action(&self, t: f64) -> f64 {
        t * self.action_slope
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalizeOptions {
    /// Band (in `y`) of the horizontal shear that moves `vx`.
    pub horizontal_band: Band,
    /// Band (in `x`) of the vertical shear that moves `vy`.
    pub vertical_band: Band,
    pub profile: BumpProfile,
    pub grid: GridSpec,
    /// Points per axis of the grid on which `c0_size` and `c1_size` are measured.
    pub norm_grid: usize,
    /// Disks the shears should stay away from; overlaps produce warnings.
    pub avoid: Vec<Disk>,
}

impl Default for RationalizeOptions {
    fn default() -> Self {
        Self {
            horizontal_band: Band::new(0.0, 1.0).expect("valid band"),
            vertical_band: Band::new(0.0, 1.0).expect("valid band"),
            profile: BumpProfile::new(0.6, 0.9).expect("valid profile"),
            grid: GridSpec::default(),
            norm_grid: 256,
            avoid: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalizationResult {
    pub perturbed: TorusMap,
    pub q: u32,
    pub p: (i64, i64),
    /// `(eps_horizontal, eps_vertical)`
    pub eps_used: (f64, f64),
    /// Sup over the norm grid of `|perturbed(p) − map(p)|`.
    pub c0_size: f64,
    /// Sup over the norm grid of the largest Jacobian entry deviation.
    pub c1_size: f64,
    pub flux_before: FluxVector,
    pub flux_after: FluxVector,
    /// `max_i |p_i/q − v_i|` for the original flux.
    pub target_error: f64,
    pub warnings: Vec<String>,
}

impl RationalizationResult {
    pub fn target(&self) -> (f64, f64) {
        let q = self.q as f64;
        (self.p.0 as f64 / q, self.p.1 as f64 / q)
    }
}

/// Candidate rational target for a given denominator.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    q: u32,
    p: (i64, i64),
    eps: (f64, f64),
    error: f64,
}

const TIE_TOL: f64 = 1e-12;

/// Best rational flux `(p₁/q, p₂/q)`, `q ≤ q_max`, reachable with shear
/// amplitudes of Euclidean size at most `c0_bound`; ties go to the smaller `q`.
fn select_target(flux: FluxVector, response: Mat2, q_max: u32, c0_bound: f64) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for q in 1..=q_max {
        let qf = q as f64;
        let p = ((qf * flux.vx).round() as i64, (qf * flux.vy).round() as i64);
        let delta = Point2::new(p.0 as f64 / qf - flux.vx, p.1 as f64 / qf - flux.vy);
        let error = delta.x.abs().max(delta.y.abs());
        let eps = if error < TIE_TOL {
            Point2::ORIGIN
        } else {
            match response.solve(delta, 1e-300) {
                Some(e) => e,
                None => continue,
            }
        };
        if eps.norm() > c0_bound {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => error < b.error - TIE_TOL,
        };
        if better {
            best = Some(Candidate {
                q,
                p,
                eps: (eps.x, eps.y),
                error,
            });
        }
    }
    best
}

fn band_overlaps_disk(band: &Band, center: f64, radius: f64) -> bool {
    let d = center - band.mid();
    (d - d.round()).abs() < band.half_width() + radius
}

/// Compose `map` with a horizontal and a vertical band shear so that its flux
/// becomes rational with denominator at most `q_max`.
///
/// The flux response of each shear is measured by quadrature rather than
/// assumed, and the amplitudes solve `response · eps = target − flux`.
pub fn rationalize_flux(
    map: &TorusMap,
    q_max: u32,
    c0_bound: f64,
    options: &RationalizeOptions,
) -> Result<RationalizationResult> {
    if q_max < 1 {
        return Err(Error::InvalidArgument("q_max must be at least 1".into()));
    }
    if !(c0_bound > 0.0) {
        return Err(Error::InvalidArgument("c0_bound must be positive".into()));
    }
    let grid = options.grid;
    let flux_before = flux_vector(map, grid);

    let unit_h = Generator::horizontal_shear(1.0, options.profile, options.horizontal_band);
    let unit_v = Generator::vertical_shear(1.0, options.profile, options.vertical_band);
    let rh = flux_vector(&unit_h.into(), grid).raw();
    let rv = flux_vector(&unit_v.into(), grid).raw();
    let response = Mat2::new(rh.x, rv.x, rh.y, rv.y);

    let best = select_target(flux_before, response, q_max, c0_bound)
        .ok_or(Error::TargetUnreachable { q_max, c0_bound })?;

    let mut perturbed = map.clone();
    let mut warnings = Vec::new();
    let (eh, ev) = best.eps;
    if ev != 0.0 {
        perturbed = perturbed.then(Generator::vertical_shear(ev, options.profile, options.vertical_band));
    }
    if eh != 0.0 {
        perturbed = perturbed.then(Generator::horizontal_shear(eh, options.profile, options.horizontal_band));
    }
    for disk in &options.avoid {
        let c = disk.center();
        if eh != 0.0 && band_overlaps_disk(&options.horizontal_band, c.y, disk.radius()) {
            warnings.push(format!(
                "horizontal shear band [{}, {}] overlaps disk at ({}, {}) r={}",
                options.horizontal_band.lo(),
                options.horizontal_band.hi(),
                c.x,
                c.y,
                disk.radius()
            ));
        }
        if ev != 0.0 && band_overlaps_disk(&options.vertical_band, c.x, disk.radius()) {
            warnings.push(format!(
                "vertical shear band [{}, {}] overlaps disk at ({}, {}) r={}",
                options.vertical_band.lo(),
                options.vertical_band.hi(),
                c.x,
                c.y,
                disk.radius()
            ));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }

    let flux_after = flux_vector(&perturbed, grid);
    let qf = best.q as f64;
    let target = Point2::new(best.p.0 as f64 / qf, best.p.1 as f64 / qf);
    let miss = (flux_after.raw() - target).norm();
    if miss > 1e-10 {
        return Err(Error::Numeric(format!(
            "rationalized flux misses target {}/{}, {}/{} by {miss:e}",
            best.p.0, best.q, best.p.1, best.q
        )));
    }

    let (c0_size, c1_size) = perturbation_size(map, &perturbed, options.norm_grid);
    Ok(RationalizationResult {
        perturbed,
        q: best.q,
        p: best.p,
        eps_used: best.eps,
        c0_size,
        c1_size,
        flux_before,
        flux_after,
        target_error: best.error,
        warnings,
    })
}

/// Sup of `|g(p) − f(p)|` and of the Jacobian entry deviation on an `n × n` grid.
pub fn perturbation_size(f: &TorusMap, g: &TorusMap, n: usize) -> (f64, f64) {
    use rayon::prelude::*;
    let h = 1.0 / n as f64;
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n).fold((0.0_f64, 0.0_f64), |(c0, c1), j| {
                let p = Point2::new(i as f64 * h, j as f64 * h);
                let (fp, fj) = f.lift_with_jacobian(p);
                let (gp, gj) = g.lift_with_jacobian(p);
                (c0.max((gp - fp).norm()), c1.max((gj - fj).max_abs()))
            })
        })
        .collect();
    rows.iter()
        .fold((0.0, 0.0), |(a, b), &(c, d)| (f64::max(a, c), f64::max(b, d)))
}
