use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::Disk;
use crate::geometry::{project, torus_distance, Lattice, Point2};
use crate::map::TorusMap;

/// Where periodic points are sought and accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Torus,
    Disk(Disk),
}

impl Region {
    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Region::Torus => true,
            Region::Disk(d) => d.contains(p),
        }
    }

    /// Uniform seed grid: the torus grid `i/n`, or the square grid over the
    /// disk's bounding box restricted to the disk.
    pub fn seeds(&self, per_axis: usize) -> Vec<Point2> {
        let n = per_axis.max(1);
        match self {
            Region::Torus => (0..n)
                .flat_map(|i| (0..n).map(move |j| Point2::new(i as f64 / n as f64, j as f64 / n as f64)))
                .collect(),
            Region::Disk(d) => {
                let r = d.radius();
                let c = d.center();
                let h = 2.0 * r / n as f64;
                (0..n)
                    .flat_map(|i| {
                        (0..n).map(move |j| {
                            c + Point2::new(-r + (i as f64 + 0.5) * h, -r + (j as f64 + 0.5) * h)
                        })
                    })
                    .filter(|p| (*p - c).norm() <= r)
                    .map(project)
                    .collect()
            }
        }
    }

    /// Whether a Newton iterate has wandered too far to be worth continuing.
    fn abandoned(&self, p: Point2) -> bool {
        match self {
            Region::Torus => false,
            Region::Disk(d) => d.offset(p).norm() > 3.0 * d.radius(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub seeds_per_axis: usize,
    /// Newton stops once `|f̃^q(x) − x − z| < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Newton steps longer than this are scaled back.
    pub max_step: f64,
    /// `|det(Df^q − I)|` below this counts as singular.
    pub min_det: f64,
    /// Torus distance under which two solutions are the same point.
    pub dedup_distance: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            seeds_per_axis: 64,
            tol: 1e-11,
            max_iter: 40,
            max_step: 0.1,
            min_det: 1e-14,
            dedup_distance: 1e-6,
        }
    }
}

/// A periodic point: `f̃^q(point) = point + lattice` up to `residual`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitRecord {
    pub point: Point2,
    pub period: u32,
    pub lattice: Lattice,
    pub residual: f64,
    /// Eigenvalues of `Df^q(point)`.
    pub multipliers: [Complex64; 2],
}

impl OrbitRecord {
    pub fn multiplier_product(&self) -> Complex64 {
        self.multipliers[0] * self.multipliers[1]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchDiagnostics {
    pub seeds: usize,
    pub lattice_candidates: Vec<Lattice>,
    pub converged: usize,
    pub singular: usize,
    pub diverged: usize,
    pub outside_region: usize,
    /// Smallest final residual over every Newton run, converged or not.
    pub min_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeriodicSearch {
    /// One canonical representative per orbit, sorted by `(x, y)`.
    pub orbits: Vec<OrbitRecord>,
    pub diagnostics: SearchDiagnostics,
}

enum Outcome {
    Converged(Point2),
    Singular(f64),
    Diverged(f64),
}

fn newton(fq: &TorusMap, seed: Point2, z: Point2, region: &Region, opts: &SearchOptions) -> Outcome {
    let mut x = seed;
    let mut last = f64::INFINITY;
    for _ in 0..=opts.max_iter {
        let (y, jac) = fq.lift_with_jacobian(x);
        let f = y - x - z;
        let res = f.norm();
        if !res.is_finite() {
            return Outcome::Diverged(last);
        }
        last = res;
        if res < opts.tol {
            return Outcome::Converged(x);
        }
        let Some(mut step) = jac.sub_identity().solve(f, opts.min_det) else {
            return Outcome::Singular(res);
        };
        let len = step.norm();
        if len > opts.max_step {
            step = step * (opts.max_step / len);
        }
        x = x - step;
        if region.abandoned(x) {
            return Outcome::Diverged(last);
        }
    }
    Outcome::Diverged(last)
}

/// Integer displacements of `f̃^q` worth trying: every lattice vector within
/// 1/2 of the range of displacements seen at the seeds.
fn lattice_candidates(fq: &TorusMap, seeds: &[Point2]) -> Vec<Lattice> {
    if seeds.is_empty() {
        return Vec::new();
    }
    let (lo, hi) = seeds.iter().fold(
        (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), &p| {
            let d = fq.displacement(p);
            (Point2::new(lo.x.min(d.x), lo.y.min(d.y)), Point2::new(hi.x.max(d.x), hi.y.max(d.y)))
        },
    );
    let mut out = Vec::new();
    for zx in ((lo.x - 0.5).ceil() as i64)..=((hi.x + 0.5).floor() as i64) {
        for zy in ((lo.y - 0.5).ceil() as i64)..=((hi.y + 0.5).floor() as i64) {
            out.push(Lattice::new(zx, zy));
        }
    }
    out
}

/// Independent check by plain forward iteration: `|f̃^q(p) − p − z|`.
pub fn verify_orbit(map: &TorusMap, record: &OrbitRecord) -> f64 {
    let end = map.lift_iterated(record.point, record.period as usize);
    (end - record.point - record.lattice.as_point()).norm()
}

fn lex_less(a: Point2, b: Point2) -> bool {
    a.x < b.x || (a.x == b.x && a.y < b.y)
}

/// Build the record for the orbit through `x`, represented by its
/// lexicographically smallest point inside `region`.
fn canonical_record(map: &TorusMap, fq: &TorusMap, x: Point2, q: u32, region: &Region) -> OrbitRecord {
    let mut rep = project(x);
    let mut p = x;
    for _ in 1..q {
        p = map.lift(p);
        let t = project(p);
        if region.contains(t) && lex_less(t, rep) {
            rep = t;
        }
    }
    let end = map.lift_iterated(rep, q as usize);
    let disp = end - rep;
    let lattice = Lattice::new(disp.x.round() as i64, disp.y.round() as i64);
    let residual = (disp - lattice.as_point()).norm();
    OrbitRecord {
        point: rep,
        period: q,
        lattice,
        residual,
        multipliers: fq.jacobian(rep).eigenvalues(),
    }
}

/// Newton search for points with `f̃^q(x) = x + z` from a uniform seed grid,
/// for every candidate lattice vector `z`.
///
/// Converged points are kept only if they lie in `region` and pass forward
/// iteration with residual below `max(10·tol, 1e-10)`; points on one orbit
/// collapse to a single representative.
pub fn find_periodic_points(
    map: &TorusMap,
    q: u32,
    region: Region,
    options: &SearchOptions,
) -> Result<PeriodicSearch> {
    if q < 1 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    let fq = map.iterate(q as usize);
    let seeds = region.seeds(options.seeds_per_axis);
    let candidates = lattice_candidates(&fq, &seeds);
    let accept = (10.0 * options.tol).max(1e-10);

    let jobs: Vec<(Point2, Lattice)> = candidates
        .iter()
        .flat_map(|&z| seeds.iter().map(move |&s| (s, z)))
        .collect();
    let outcomes: Vec<(Outcome, Lattice)> = jobs
        .par_iter()
        .map(|&(s, z)| (newton(&fq, s, z.as_point(), &region, options), z))
        .collect();

    let mut diag = SearchDiagnostics {
        seeds: seeds.len(),
        lattice_candidates: candidates,
        min_residual: f64::INFINITY,
        ..Default::default()
    };
    let mut found: Vec<OrbitRecord> = Vec::new();
    for (outcome, _z) in outcomes {
        let x = match outcome {
            Outcome::Converged(x) => x,
            Outcome::Singular(r) => {
                diag.singular += 1;
                diag.min_residual = diag.min_residual.min(r);
                continue;
            }
            Outcome::Diverged(r) => {
                diag.diverged += 1;
                diag.min_residual = diag.min_residual.min(r);
                continue;
            }
        };
        diag.converged += 1;
        if !region.contains(x) {
            diag.outside_region += 1;
            continue;
        }
        let record = canonical_record(map, &fq, x, q, &region);
        diag.min_residual = diag.min_residual.min(record.residual);
        if record.residual >= accept {
            continue;
        }
        if found
            .iter()
            .any(|o| torus_distance(o.point, record.point) < options.dedup_distance)
        {
            continue;
        }
        found.push(record);
    }
    found.sort_by(|a, b| a.point.x.total_cmp(&b.point.x).then(a.point.y.total_cmp(&b.point.y)));
    Ok(PeriodicSearch {
        orbits: found,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::BumpProfile;
    use crate::generator::{Band, Generator};

    #[test]
    fn half_translation_every_point_has_period_two() {
        let f = TorusMap::from(Generator::translation(0.5, 0.0));
        let opts = SearchOptions {
            seeds_per_axis: 16,
            ..Default::default()
        };
        let s = find_periodic_points(&f, 2, Region::Torus, &opts).unwrap();
        assert_eq!(s.diagnostics.lattice_candidates, vec![Lattice::new(1, 0)]);
        // x and x + 1/2 share an orbit
        assert_eq!(s.orbits.len(), 16 * 16 / 2);
        for o in &s.orbits {
            assert_eq!(o.residual, 0.0);
            assert_eq!(o.lattice, Lattice::new(1, 0));
            assert!(o.point.x < 0.5);
        }
    }

    #[test]
    fn irrational_translation_has_no_fixed_points() {
        let f = TorusMap::from(Generator::translation(0.3, 0.3));
        let s = find_periodic_points(&f, 1, Region::Torus, &SearchOptions::default()).unwrap();
        assert!(s.orbits.is_empty());
        assert_eq!(s.diagnostics.lattice_candidates, vec![Lattice::new(0, 0)]);
        assert_eq!(s.diagnostics.singular, s.diagnostics.seeds);
    }

    #[test]
    fn shear_translation_orbits_verify_forward() {
        let band = Band::new(0.2, 0.8).unwrap();
        let prof = BumpProfile::new(0.3, 0.7).unwrap();
        let f = TorusMap::new(vec![
            Generator::horizontal_shear(0.2, prof, band),
            Generator::translation(1.0 / 3.0, 0.0),
        ]);
        let region = Region::Disk(Disk::new(Point2::new(0.5, 0.5), 0.25).unwrap());
        let opts = SearchOptions {
            seeds_per_axis: 24,
            ..Default::default()
        };
        let s = find_periodic_points(&f, 3, region, &opts).unwrap();
        assert!(!s.orbits.is_empty());
        for o in &s.orbits {
            assert!(region.contains(o.point));
            let end = project(f.lift_iterated(o.point, 3));
            assert!(torus_distance(end, o.point) < 1e-9);
            assert!((o.multiplier_product().re - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_zero_period() {
        assert!(find_periodic_points(&TorusMap::identity(), 0, Region::Torus, &SearchOptions::default()).is_err());
    }

    #[test]
    fn disk_seeds_stay_in_disk() {
        let d = Disk::new(Point2::new(0.02, 0.98), 0.1).unwrap();
        let seeds = Region::Disk(d).seeds(10);
        assert!(!seeds.is_empty());
        assert!(seeds.iter().all(|s| d.contains(*s) && s.x < 1.0 && s.y < 1.0));
    }
}
