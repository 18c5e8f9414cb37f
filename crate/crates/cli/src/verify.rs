//! Seeded invariant suite behind `closing verify`.

use closing_core::invariants::{action_profile, flux_vector, loop_flux_raw, ActionOptions, Cycle};
use closing_core::perturb::TwistFamily;
use closing_core::quadrature::GridSpec;
use closing_core::{project, torus_distance, Band, BumpProfile, Disk, Generator, Lattice, Point2, TorusMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::commands::CliError;
use crate::mapfile::{self, MapFile};
use crate::report::{map_hash, num, Report};

const FD_STEP: f64 = 1e-6;
const MIN_FLUX_GRID: usize = 1024;
const MAX_FLUX_GRID: usize = 4096;
/// Grid nodes wanted across the narrowest bump transition.
const NODES_PER_TRANSITION: f64 = 40.0;

/// Width of the narrowest bump transition in the chain, in torus units.
pub fn narrowest_transition(f: &TorusMap) -> Option<f64> {
    f.chain()
        .iter()
        .filter_map(|g| match g {
            Generator::HorizontalShear(s) | Generator::VerticalShear(s) => {
                Some(s.band.half_width() * (s.profile.outer() - s.profile.inner()))
            }
            Generator::DiskTwist(d) => Some(d.disk.radius() * (d.profile.outer() - d.profile.inner())),
            Generator::Translation { .. } => None,
        })
        .reduce(f64::min)
}

/// Smallest power-of-two grid (within bounds) resolving every transition.
pub fn flux_grid_for(maps: &[&TorusMap], requested: usize) -> usize {
    let want = maps
        .iter()
        .filter_map(|m| narrowest_transition(m))
        .map(|w| (NODES_PER_TRANSITION / w).ceil() as usize)
        .max()
        .unwrap_or(0);
    let mut n = MIN_FLUX_GRID;
    while n < want && n < MAX_FLUX_GRID {
        n *= 2;
    }
    n.max(requested)
}

fn random_profile(rng: &mut ChaCha8Rng) -> BumpProfile {
    let inner: f64 = rng.random_range(0.2..0.4);
    let outer = (inner + rng.random_range(0.35..0.5)).min(1.0);
    BumpProfile::new(inner, outer).expect("inner < outer <= 1")
}

/// One random generator with transitions wide enough for the default grids.
pub fn random_generator(rng: &mut ChaCha8Rng) -> Generator {
    match rng.random_range(0..4) {
        0 => Generator::translation(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        k @ (1 | 2) => {
            let width = rng.random_range(0.3..0.6);
            let lo = rng.random_range(0.0..1.0 - width);
            let band = Band::new(lo, lo + width).expect("0 <= lo < hi <= 1");
            let eps = rng.random_range(-0.1..0.1);
            let profile = random_profile(rng);
            if k == 1 {
                Generator::horizontal_shear(eps, profile, band)
            } else {
                Generator::vertical_shear(eps, profile, band)
            }
        }
        _ => {
            let c = Point2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let disk = Disk::new(c, rng.random_range(0.15..0.3)).expect("radius < 1/2");
            Generator::disk_twist(disk, rng.random_range(-2.0..2.0), random_profile(rng))
        }
    }
}

pub fn random_chain(rng: &mut ChaCha8Rng, depth: usize) -> TorusMap {
    (0..depth).map(|_| random_generator(rng)).collect()
}

struct Check {
    name: String,
    residual: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.residual.is_finite() && self.residual <= self.tolerance
    }
}

fn fd_jacobian_det(f: &TorusMap, p: Point2) -> f64 {
    let h = FD_STEP;
    let dx = (f.lift(p + Point2::new(h, 0.0)) - f.lift(p - Point2::new(h, 0.0))) * (0.5 / h);
    let dy = (f.lift(p + Point2::new(0.0, h)) - f.lift(p - Point2::new(0.0, h))) * (0.5 / h);
    dx.x * dy.y - dx.y * dy.x
}

fn map_checks(label: &str, f: &TorusMap, pts: &[Point2], shifts: &[Lattice], grid: GridSpec, out: &mut Vec<Check>) {
    let mut det = 0.0_f64;
    let mut fd = 0.0_f64;
    let mut equi = 0.0_f64;
    let mut inv = 0.0_f64;
    let finv = f.inverse();
    for (p, z) in pts.iter().zip(shifts) {
        det = det.max((f.jacobian(*p).det() - 1.0).abs());
        fd = fd.max((fd_jacobian_det(f, *p) - 1.0).abs());
        let zp = z.as_point();
        equi = equi.max((f.lift(*p + zp) - f.lift(*p) - zp).norm());
        inv = inv.max(torus_distance(project(finv.lift(f.lift(*p))), *p));
    }
    out.push(Check {
        name: format!("{label}.jacobian_det"),
        residual: det,
        tolerance: 1e-12,
    });
    out.push(Check {
        name: format!("{label}.finite_difference_det"),
        residual: fd,
        tolerance: 1e-6,
    });
    out.push(Check {
        name: format!("{label}.lift_equivariance"),
        residual: equi,
        tolerance: 1e-12,
    });
    out.push(Check {
        name: format!("{label}.inverse_round_trip"),
        residual: inv,
        tolerance: 1e-11,
    });

    let v = flux_vector(f, grid);
    let mut iter_gap = 0.0_f64;
    for k in [2usize, 3] {
        let vk = flux_vector(&f.iterate(k), grid);
        iter_gap = iter_gap.max((vk.raw() - v.raw() * k as f64).norm() / k as f64);
    }
    out.push(Check {
        name: format!("{label}.flux_of_iterates"),
        residual: iter_gap,
        tolerance: 1e-10,
    });
    let mut loop_gap = 0.0_f64;
    for c in [0.0, 0.37] {
        let a = loop_flux_raw(f, Cycle::Horizontal { y0: c }, grid.n()) - v.vy;
        let b = loop_flux_raw(f, Cycle::Vertical { x0: c }, grid.n()) - v.vx;
        loop_gap = loop_gap.max((a - a.round()).abs()).max((b - b.round()).abs());
    }
    out.push(Check {
        name: format!("{label}.loop_flux_conventions"),
        residual: loop_gap,
        tolerance: 1e-8,
    });
}

pub struct VerifyOutcome {
    pub report: Report,
    pub passed: bool,
}

pub fn verify(
    file: Option<&MapFile>,
    seed: u64,
    depth: usize,
    points: usize,
    grid: GridSpec,
) -> Result<VerifyOutcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point2> = (0..points)
        .map(|_| Point2::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
        .collect();
    let shifts: Vec<Lattice> = (0..points)
        .map(|_| Lattice::new(rng.random_range(-3..=3), rng.random_range(-3..=3)))
        .collect();
    let chain = random_chain(&mut rng, depth);
    let user_map = file.map(MapFile::to_map);
    let mut maps = vec![&chain];
    maps.extend(user_map.as_ref());
    let flux_grid = GridSpec::new(flux_grid_for(&maps, grid.n()))?;

    let mut checks = Vec::new();
    map_checks("random_chain", &chain, &pts, &shifts, flux_grid, &mut checks);

    let mut report = Report::new("verify");
    if let (Some(file), Some(map)) = (file, user_map.as_ref()) {
        let canonical = file.to_string();
        report.map_hash = Some(map_hash(&canonical));
        let round_trip = match mapfile::parse(&canonical) {
            Ok(back) if back == *file => 0.0,
            _ => f64::INFINITY,
        };
        checks.push(Check {
            name: "map.file_round_trip".into(),
            residual: round_trip,
            tolerance: 0.0,
        });
        map_checks("map", map, &pts, &shifts, flux_grid, &mut checks);

        let sum = flux_vector(map, flux_grid).raw() + flux_vector(&chain, flux_grid).raw();
        let composed = flux_vector(&map.compose(&chain), flux_grid).raw();
        checks.push(Check {
            name: "map.flux_additivity".into(),
            residual: (composed - sum).norm(),
            tolerance: 1e-10,
        });

        for (i, disk) in file.twist_disks().iter().enumerate() {
            let family = TwistFamily::new(*disk, BumpProfile::default())?;
            let half = action_profile(&family.member(0.5), disk, ActionOptions::default())?;
            checks.push(Check {
                name: format!("twist{i}.action_linearity"),
                residual: (half.total() - 0.5 * family.action_slope()).abs(),
                tolerance: 1e-9,
            });
            checks.push(Check {
                name: format!("twist{i}.action_boundary"),
                residual: half.boundary_residual(),
                tolerance: 1e-9,
            });
        }
    }

    let passed = checks.iter().all(Check::passed);
    report.parameters.insert("depth".into(), Value::from(depth));
    report.parameters.insert("points".into(), Value::from(points));
    report.parameters.insert("flux_grid".into(), Value::from(flux_grid.n()));
    report.parameters.insert(
        "random_chain".into(),
        Value::from(MapFile::from_map(&chain).to_string()),
    );
    let list: Vec<Value> = checks
        .iter()
        .map(|c| {
            let mut m = Map::new();
            m.insert("name".into(), Value::from(c.name.clone()));
            m.insert("residual".into(), num(c.residual));
            m.insert("tolerance".into(), num(c.tolerance));
            m.insert("pass".into(), Value::from(c.passed()));
            Value::Object(m)
        })
        .collect();
    for c in &checks {
        report.residuals.insert(c.name.clone(), num(c.residual));
    }
    report.results.insert("checks".into(), Value::Array(list));
    report.results.insert("passed".into(), Value::from(passed));
    Ok(VerifyOutcome { report, passed })
}
