use std::f64::consts::TAU;

use crate::bump::BumpProfile;
use crate::error::{Error, Result};
use crate::generator::{Disk, Generator};
use crate::geometry::{project, Point2};
use crate::map::TorusMap;
use crate::perturb::{rationalize_flux, RationalizationResult, RationalizeOptions, TwistFamily};

use super::newton::{find_periodic_points, OrbitRecord, Region, SearchDiagnostics, SearchOptions};

/// Where the twist family acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TwistPlacement {
    /// One twist on `U₀`.
    #[default]
    SingleDisk,
    /// A product of equal twists on `U₀` and on disks centered at the
    /// backward orbit `f^{-i}(c)` of its center, `i = 1..q−1`.
    PulledBack,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub q_max: u32,
    pub c0_bound: f64,
    pub t_steps: usize,
    pub max_shrinks: u32,
    pub boundary_samples: usize,
    /// Subdivision rounds around each residual minimum when the grid fails.
    pub refine_levels: usize,
    /// Number of residual minima refined.
    pub refine_minima: usize,
    pub profile: BumpProfile,
    pub placement: TwistPlacement,
    pub search: SearchOptions,
    pub rationalize: RationalizeOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            q_max: 20,
            c0_bound: 0.05,
            t_steps: 200,
            max_shrinks: 6,
            boundary_samples: 256,
            refine_levels: 8,
            refine_minima: 3,
            profile: BumpProfile::default(),
            placement: TwistPlacement::SingleDisk,
            search: SearchOptions {
                seeds_per_axis: 32,
                ..SearchOptions::default()
            },
            rationalize: RationalizeOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub t_star: Option<f64>,
    pub orbit: Option<OrbitRecord>,
    /// `h_{t*} ∘ f'`, the map the orbit belongs to.
    pub witness_map: Option<TorusMap>,
    /// Every `t` searched, grid first, then refinement points.
    pub t_grid: Vec<f64>,
    /// Smallest Newton residual seen at each entry of `t_grid`.
    pub min_residuals: Vec<f64>,
    pub disjointness_ok: bool,
    /// The disk actually used after any shrinking.
    pub disk: Disk,
    pub shrinks: u32,
    /// `A(h₁)` on the final disk.
    pub action_slope: f64,
    pub q: u32,
    pub p: (i64, i64),
    pub rationalization: RationalizationResult,
    /// Diagnostics of the search that produced the orbit, or of the last one.
    pub diagnostics: SearchDiagnostics,
}

impl ScanReport {
    pub fn found(&self) -> bool {
        self.orbit.is_some()
    }

    /// `q·A(h₁)`
    pub fn action_certificate(&self) -> f64 {
        self.q as f64 * self.action_slope
    }
}

struct Polygon {
    vertices: Vec<Point2>,
    lo: Point2,
    hi: Point2,
    max_edge: f64,
}

impl Polygon {
    fn new(vertices: Vec<Point2>) -> Self {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut max_edge = 0.0_f64;
        for (k, v) in vertices.iter().enumerate() {
            lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
            let next = vertices[(k + 1) % vertices.len()];
            max_edge = max_edge.max((next - *v).norm());
        }
        Self {
            vertices,
            lo,
            hi,
            max_edge,
        }
    }

    fn centroid(&self) -> Point2 {
        let n = self.vertices.len() as f64;
        self.vertices.iter().fold(Point2::ORIGIN, |a, v| a + *v) * (1.0 / n)
    }

    fn contains(&self, p: Point2) -> bool {
        let v = &self.vertices;
        let mut inside = false;
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            let (a, b) = (v[i], v[j]);
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Whether `self` and `other + shift` come within `margin` of each other.
    fn overlaps(&self, other: &Polygon, shift: Point2, margin: f64) -> bool {
        let (olo, ohi) = (other.lo + shift, other.hi + shift);
        if olo.x > self.hi.x + margin
            || self.lo.x > ohi.x + margin
            || olo.y > self.hi.y + margin
            || self.lo.y > ohi.y + margin
        {
            return false;
        }
        let moved: Vec<Point2> = other.vertices.iter().map(|v| *v + shift).collect();
        if moved.iter().any(|v| self.contains(*v)) {
            return true;
        }
        if self.vertices.iter().any(|v| other.contains(*v - shift)) {
            return true;
        }
        self.vertices
            .iter()
            .any(|a| moved.iter().any(|b| (*a - *b).norm() < margin))
    }
}

/// Whether `U₀ = disk` and its preimages `f^{-i}(U₀)`, `i < q`, are pairwise
/// disjoint on the torus, judged on `samples` boundary points per disk with a
/// margin of twice the longest sampled edge.
pub fn preimage_disks_disjoint(f: &TorusMap, disk: &Disk, q: u32, samples: usize) -> bool {
    let inv = f.inverse();
    let c = disk.center();
    let r = disk.radius();
    let mut boundary: Vec<Point2> = (0..samples)
        .map(|k| {
            let th = TAU * k as f64 / samples as f64;
            c + Point2::new(th.cos(), th.sin()) * r
        })
        .collect();
    let mut polygons = Vec::with_capacity(q as usize);
    for i in 0..q {
        if i > 0 {
            boundary = boundary.iter().map(|p| inv.lift(*p)).collect();
        }
        polygons.push(Polygon::new(boundary.clone()));
    }
    let margin = 2.0 * polygons.iter().map(|p| p.max_edge).fold(0.0, f64::max);
    for i in 0..polygons.len() {
        for j in i..polygons.len() {
            let d = polygons[i].centroid() - polygons[j].centroid();
            let (bx, by) = (d.x.round(), d.y.round());
            for sx in -1..=1 {
                for sy in -1..=1 {
                    let shift = Point2::new(bx + sx as f64, by + sy as f64);
                    if i == j && shift == Point2::ORIGIN {
                        continue;
                    }
                    if polygons[i].overlaps(&polygons[j], shift, margin) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn perturbation(family: &TwistFamily, centers: &[Point2], t: f64) -> TorusMap {
    centers
        .iter()
        .map(|c| {
            let moved = Disk::new(*c, family.disk().radius()).expect("radius already valid");
            Generator::disk_twist(moved, t, family.profile())
        })
        .collect()
}

/// Search `(h_t ∘ f)^q` for a periodic point in `U₀`; returns the first orbit
/// (sorted order) and the search diagnostics.
fn probe(
    f: &TorusMap,
    family: &TwistFamily,
    centers: &[Point2],
    t: f64,
    q: u32,
    region: Region,
    opts: &SearchOptions,
) -> Result<(Option<(OrbitRecord, TorusMap)>, SearchDiagnostics)> {
    let g = perturbation(family, centers, t).compose(f);
    let search = find_periodic_points(&g, q, region, opts)?;
    Ok((search.orbits.first().map(|o| (*o, g)), search.diagnostics))
}

/// Closing scan: rationalize the flux of `f`, make the backward images of
/// `U₀` disjoint by shrinking it, then scan the twist family `h_t` on `U₀`
/// for the first `t ∈ [0, 1]` at which `h_t ∘ f'` has a period-`q` point in `U₀`.
///
/// Not finding an orbit is reported through [`ScanReport::found`]; only a
/// failure to separate the disks is an error.
pub fn closing_scan(f: &TorusMap, u0: Disk, options: &ScanOptions) -> Result<ScanReport> {
    if options.t_steps < 1 {
        return Err(Error::InvalidArgument("t_steps must be at least 1".into()));
    }
    let mut ropts = options.rationalize.clone();
    if !ropts.avoid.contains(&u0) {
        ropts.avoid.push(u0);
    }
    let rationalization = rationalize_flux(f, options.q_max, options.c0_bound, &ropts)?;
    let fp = rationalization.perturbed.clone();
    let q = rationalization.q;

    let mut disk = u0;
    let mut shrinks = 0;
    while !preimage_disks_disjoint(&fp, &disk, q, options.boundary_samples) {
        if shrinks == options.max_shrinks {
            return Err(Error::DisjointnessFailed {
                shrinks,
                radius: disk.radius(),
            });
        }
        shrinks += 1;
        disk = disk.with_radius(disk.radius() / 2.0)?;
    }
    log::debug!("disks disjoint at radius {} after {shrinks} shrinks", disk.radius());

    let family = TwistFamily::new(disk, options.profile)?;
    let centers: Vec<Point2> = match options.placement {
        TwistPlacement::SingleDisk => vec![disk.center()],
        TwistPlacement::PulledBack => {
            let inv = fp.inverse();
            let mut c = disk.center();
            let mut out = vec![c];
            for _ in 1..q {
                c = inv.lift(c);
                out.push(project(c));
            }
            out
        }
    };
    let region = Region::Disk(disk);

    let mut report = ScanReport {
        t_star: None,
        orbit: None,
        witness_map: None,
        t_grid: Vec::new(),
        min_residuals: Vec::new(),
        disjointness_ok: true,
        disk,
        shrinks,
        action_slope: family.action_slope(),
        q,
        p: rationalization.p,
        rationalization,
        diagnostics: SearchDiagnostics::default(),
    };

    let steps = options.t_steps;
    let grid: Vec<f64> = (0..steps)
        .map(|i| if steps == 1 { 0.0 } else { i as f64 / (steps - 1) as f64 })
        .collect();
    for &t in &grid {
        let (orbit, diag) = probe(&fp, &family, &centers, t, q, region, &options.search)?;
        report.t_grid.push(t);
        report.min_residuals.push(diag.min_residual);
        report.diagnostics = diag;
        if let Some((o, g)) = orbit {
            report.t_star = Some(t);
            report.orbit = Some(o);
            report.witness_map = Some(g);
            return Ok(report);
        }
    }

    // Refine around the smallest local minima of the residual curve.
    let res = report.min_residuals.clone();
    let mut minima: Vec<usize> = (0..res.len())
        .filter(|&i| (i == 0 || res[i] <= res[i - 1]) && (i + 1 == res.len() || res[i] <= res[i + 1]))
        .collect();
    minima.sort_by(|&a, &b| res[a].total_cmp(&res[b]).then(a.cmp(&b)));
    minima.truncate(options.refine_minima);
    let h = if steps > 1 { 1.0 / (steps - 1) as f64 } else { 0.0 };
    for &i in &minima {
        let (mut lo, mut hi) = ((grid[i] - h).max(0.0), (grid[i] + h).min(1.0));
        let mut best_t = grid[i];
        for _ in 0..options.refine_levels {
            if hi - lo <= 0.0 {
                break;
            }
            let mut best = f64::INFINITY;
            for t in [0.5 * (lo + best_t), 0.5 * (best_t + hi)] {
                let (orbit, diag) = probe(&fp, &family, &centers, t, q, region, &options.search)?;
                report.t_grid.push(t);
                report.min_residuals.push(diag.min_residual);
                let r = diag.min_residual;
                report.diagnostics = diag;
                if let Some((o, g)) = orbit {
                    report.t_star = Some(t);
                    report.orbit = Some(o);
                    report.witness_map = Some(g);
                    return Ok(report);
                }
                if r < best {
                    best = r;
                    if t < best_t {
                        hi = best_t;
                    } else {
                        lo = best_t;
                    }
                    best_t = t;
                }
            }
            let half = 0.5 * (hi - lo);
            lo = (best_t - half / 2.0).max(lo);
            hi = (best_t + half / 2.0).min(hi);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::torus_distance;
    use crate::orbits::verify_orbit;

    fn disk(x: f64, y: f64, r: f64) -> Disk {
        Disk::new(Point2::new(x, y), r).unwrap()
    }

    #[test]
    fn rational_translation_closes_at_zero() {
        let f = TorusMap::from(Generator::translation(1.0 / 3.0, 0.0));
        let u0 = disk(0.5, 0.5, 0.1);
        let rep = closing_scan(&f, u0, &ScanOptions::default()).unwrap();
        assert_eq!(rep.q, 3);
        assert_eq!(rep.t_star, Some(0.0));
        let o = rep.orbit.unwrap();
        assert!(u0.contains(o.point));
        assert!(verify_orbit(rep.witness_map.as_ref().unwrap(), &o) < 1e-10);
        assert!(rep.action_certificate() > 0.0);
    }

    #[test]
    fn disjointness_detects_overlap() {
        let f = TorusMap::from(Generator::translation(0.5, 0.0));
        assert!(preimage_disks_disjoint(&f, &disk(0.5, 0.5, 0.2), 2, 256));
        assert!(!preimage_disks_disjoint(&f, &disk(0.5, 0.5, 0.26), 2, 256));
        // self-overlap across the lattice
        let g = TorusMap::from(Generator::translation(0.25, 0.0));
        assert!(!preimage_disks_disjoint(&g, &disk(0.5, 0.5, 0.2), 4, 256));
    }

    #[test]
    fn overlapping_disks_are_shrunk() {
        let f = TorusMap::from(Generator::translation(0.25, 0.0));
        let rep = closing_scan(&f, disk(0.5, 0.5, 0.3), &ScanOptions::default()).unwrap();
        assert_eq!(rep.q, 4);
        assert!(rep.shrinks >= 1);
        assert!(rep.disk.radius() < 0.125);
    }

    #[test]
    fn perturbation_is_localized() {
        let f = TorusMap::from(Generator::translation(0.37, 0.18));
        let fam = TwistFamily::new(disk(0.5, 0.5, 0.1), BumpProfile::default()).unwrap();
        let g = perturbation(&fam, &[fam.disk().center()], 0.8).compose(&f);
        for i in 0..40 {
            for j in 0..40 {
                let p = Point2::new(i as f64 / 40.0, j as f64 / 40.0);
                let image = f.lift(p);
                if torus_distance(project(image), fam.disk().center()) > 0.1 {
                    assert_eq!(g.lift(p), image);
                }
            }
        }
    }
}
