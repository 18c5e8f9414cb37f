use std::path::Path;
use std::time::Instant;

use closing_core::invariants::{
    action_profile, flux_vector, is_exact, loop_flux_raw, ActionOptions, Cycle, FluxVector, DEFAULT_EXACT_TOL,
};
use closing_core::orbits::{
    closing_scan, find_periodic_points, verify_orbit, Region, ScanOptions, SearchOptions, TwistPlacement,
};
use closing_core::perturb::{rationalize_flux, RationalizeOptions};
use closing_core::quadrature::{BaseForm, DiskRule, GridSpec, PrimitiveForm};
use closing_core::{Disk, Error, Point2};
use serde_json::{Map, Value};

use crate::mapfile::{self, MapFile, ParseError};
use crate::report::{int_pair, map_hash, num, orbit_value, pair, Report};
use crate::{Cli, Command, FormArg, PlacementArg};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Input(_) => 2,
            CliError::Core(e) => match e {
                Error::NotDiskSupported { .. } => 4,
                Error::DisjointnessFailed { .. } => 6,
                Error::InvalidProfile { .. }
                | Error::InvalidBand { .. }
                | Error::DiskTooLarge { .. }
                | Error::InvalidGrid(_)
                | Error::InvalidArgument(_) => 2,
                _ => 3,
            },
        }
    }
}

pub const EXIT_NO_ORBIT: u8 = 5;
pub const EXIT_VERIFY_FAILED: u8 = 7;

/// A finished command: the report plus its exit code (nonzero for
/// `NoOrbitFound` and failed verification, which still produce a full report).
#[derive(Debug)]
pub struct Run {
    pub report: Report,
    pub exit_code: u8,
    /// Extra file output (the rationalized map file).
    pub map_out: Option<(std::path::PathBuf, String)>,
}

fn load(path: &Path) -> Result<MapFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    mapfile::parse(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn resolve_disk(file: &MapFile, arg: Option<&str>) -> Result<Option<Disk>, CliError> {
    let Some(arg) = arg else { return Ok(None) };
    if let Some(d) = file.disk(arg) {
        return Ok(Some(d));
    }
    mapfile::parse_disk_arg(arg)
        .map(Some)
        .map_err(|source| CliError::Parse {
            path: "--disk".into(),
            source,
        })
}

fn disk_value(d: &Disk) -> Value {
    let c = d.center();
    Value::Array(vec![num(c.x), num(c.y), num(d.radius())])
}

fn flux_value(v: &FluxVector) -> Value {
    let mut m = Map::new();
    m.insert("raw".into(), pair(v.vx, v.vy));
    let (rx, ry) = v.reduced();
    m.insert("reduced".into(), pair(rx, ry));
    Value::Object(m)
}

fn mod1_gap(a: f64, b: f64) -> f64 {
    let d = a - b;
    (d - d.round()).abs()
}

pub fn run(cli: &Cli) -> Result<Run, CliError> {
    let started = Instant::now();
    let grid = GridSpec::new(cli.grid)?;
    let mut exit_code = 0;
    let mut map_out = None;
    let mut report;
    match &cli.command {
        Command::Flux { map } => {
            let file = load(map)?;
            let f = file.to_map();
            report = Report::new("flux");
            report.map_hash = Some(map_hash(&file.to_string()));
            report.parameters.insert("grid".into(), Value::from(grid.n()));
            let v = flux_vector(&f, grid);
            let (rx, ry) = v.reduced();
            let (a1, a2) = v.poisson_pairing();
            let la = loop_flux_raw(&f, Cycle::Horizontal { y0: 0.0 }, grid.n());
            let lb = loop_flux_raw(&f, Cycle::Vertical { x0: 0.0 }, grid.n());
            let r = &mut report.results;
            r.insert("vx".into(), num(v.vx));
            r.insert("vy".into(), num(v.vy));
            r.insert("reduced".into(), pair(rx, ry));
            r.insert("poisson_pairing".into(), pair(a1, a2));
            r.insert("loop_flux_a_cycle".into(), num(la.rem_euclid(1.0)));
            r.insert("loop_flux_b_cycle".into(), num(lb.rem_euclid(1.0)));
            r.insert("exact".into(), Value::from(is_exact(&f, grid, DEFAULT_EXACT_TOL)));
            report
                .residuals
                .insert("a_cycle_vs_vy".into(), num(mod1_gap(la, v.vy)));
            report
                .residuals
                .insert("b_cycle_vs_vx".into(), num(mod1_gap(lb, v.vx)));
        }
        Command::Action { map, disk, form } => {
            let file = load(map)?;
            let f = file.to_map();
            let disk = match resolve_disk(&file, disk.as_deref())? {
                Some(d) => d,
                None => *file
                    .twist_disks()
                    .first()
                    .ok_or_else(|| CliError::Input("no --disk given and the map has no twist".into()))?,
            };
            let base = match form {
                FormArg::Polar => BaseForm::Polar,
                FormArg::NegVDu => BaseForm::NegVDu,
            };
            let options = ActionOptions {
                form: PrimitiveForm {
                    base,
                    exact_gradient: None,
                },
                rule: DiskRule {
                    radial: grid.n().max(16),
                    angular: (2 * grid.n()).max(16),
                },
                ..ActionOptions::default()
            };
            let profile = action_profile(&f, &disk, options)?;
            let mut g_min = f64::INFINITY;
            for i in 1..20 {
                let rho = i as f64 / 20.0;
                for k in 0..16 {
                    let th = std::f64::consts::TAU * k as f64 / 16.0;
                    g_min = g_min.min(profile.g(Point2::new(th.cos(), th.sin()) * rho)?);
                }
            }
            report = Report::new("action");
            report.map_hash = Some(map_hash(&file.to_string()));
            let p = &mut report.parameters;
            p.insert("grid".into(), Value::from(grid.n()));
            p.insert("disk".into(), disk_value(&disk));
            p.insert(
                "form".into(),
                Value::from(match form {
                    FormArg::Polar => "polar",
                    FormArg::NegVDu => "neg-v-du",
                }),
            );
            let r = &mut report.results;
            r.insert("total".into(), num(profile.total()));
            r.insert("physical_total".into(), num(profile.physical_total()));
            r.insert("g_min_sampled".into(), num(g_min));
            report
                .residuals
                .insert("boundary".into(), num(profile.boundary_residual()));
        }
        Command::Orbits {
            map,
            period,
            disk,
            seeds,
        } => {
            let file = load(map)?;
            let f = file.to_map();
            let disk = resolve_disk(&file, disk.as_deref())?;
            let region = disk.map_or(Region::Torus, Region::Disk);
            let opts = SearchOptions {
                seeds_per_axis: *seeds,
                ..SearchOptions::default()
            };
            let search = find_periodic_points(&f, *period, region, &opts)?;
            report = Report::new("orbits");
            report.map_hash = Some(map_hash(&file.to_string()));
            let p = &mut report.parameters;
            p.insert("period".into(), Value::from(*period));
            p.insert("region".into(), disk.as_ref().map_or(Value::from("torus"), disk_value));
            p.insert("seeds_per_axis".into(), Value::from(*seeds));
            let d = &search.diagnostics;
            let r = &mut report.results;
            r.insert("count".into(), Value::from(search.orbits.len()));
            r.insert(
                "orbits".into(),
                Value::Array(search.orbits.iter().map(orbit_value).collect()),
            );
            r.insert("diagnostics".into(), diagnostics_value(d));
            let worst = search
                .orbits
                .iter()
                .map(|o| verify_orbit(&f, o))
                .fold(0.0, f64::max);
            report.residuals.insert("forward_iteration_max".into(), num(worst));
            report.orbits = search.orbits;
        }
        Command::Scan {
            map,
            disk,
            q_max,
            c0,
            t_steps,
            seeds,
            placement,
            max_shrinks,
        } => {
            let file = load(map)?;
            let f = file.to_map();
            let u0 = resolve_disk(&file, Some(disk))?.expect("disk given");
            let options = ScanOptions {
                q_max: *q_max,
                c0_bound: *c0,
                t_steps: *t_steps,
                max_shrinks: *max_shrinks,
                placement: match placement {
                    PlacementArg::Single => TwistPlacement::SingleDisk,
                    PlacementArg::PulledBack => TwistPlacement::PulledBack,
                },
                search: SearchOptions {
                    seeds_per_axis: *seeds,
                    ..SearchOptions::default()
                },
                rationalize: RationalizeOptions {
                    grid,
                    ..RationalizeOptions::default()
                },
                ..ScanOptions::default()
            };
            let scan = closing_scan(&f, u0, &options)?;
            report = Report::new("scan");
            report.map_hash = Some(map_hash(&file.to_string()));
            let p = &mut report.parameters;
            p.insert("disk".into(), disk_value(&u0));
            p.insert("q_max".into(), Value::from(*q_max));
            p.insert("c0_bound".into(), num(*c0));
            p.insert("t_steps".into(), Value::from(*t_steps));
            p.insert("seeds_per_axis".into(), Value::from(*seeds));
            p.insert("max_shrinks".into(), Value::from(*max_shrinks));
            p.insert("grid".into(), Value::from(grid.n()));
            let r = &mut report.results;
            r.insert("found".into(), Value::from(scan.found()));
            r.insert("t_star".into(), scan.t_star.map_or(Value::Null, num));
            r.insert("orbit".into(), scan.orbit.as_ref().map_or(Value::Null, orbit_value));
            r.insert("q".into(), Value::from(scan.q));
            r.insert("p".into(), int_pair(scan.p.0, scan.p.1));
            r.insert("disk_used".into(), disk_value(&scan.disk));
            r.insert("shrinks".into(), Value::from(scan.shrinks));
            r.insert("disjointness_ok".into(), Value::from(scan.disjointness_ok));
            r.insert("action_slope".into(), num(scan.action_slope));
            r.insert("action_certificate".into(), num(scan.action_certificate()));
            r.insert("eps_used".into(), pair(scan.rationalization.eps_used.0, scan.rationalization.eps_used.1));
            r.insert("c0_size".into(), num(scan.rationalization.c0_size));
            r.insert("t_grid".into(), Value::Array(scan.t_grid.iter().map(|t| num(*t)).collect()));
            r.insert(
                "min_residuals".into(),
                Value::Array(scan.min_residuals.iter().map(|t| num(*t)).collect()),
            );
            r.insert("diagnostics".into(), diagnostics_value(&scan.diagnostics));
            r.insert(
                "warnings".into(),
                Value::Array(scan.rationalization.warnings.iter().map(|w| Value::from(w.clone())).collect()),
            );
            if let Some(o) = &scan.orbit {
                let g = scan.witness_map.as_ref().expect("witness map accompanies the orbit");
                report
                    .residuals
                    .insert("forward_iteration".into(), num(verify_orbit(g, o)));
                report.orbits = vec![*o];
            } else {
                exit_code = EXIT_NO_ORBIT;
            }
        }
        Command::Rationalize {
            map,
            q_max,
            c0,
            hband,
            vband,
            map_out: out,
        } => {
            let file = load(map)?;
            let f = file.to_map();
            let mut options = RationalizeOptions {
                grid,
                avoid: file.twist_disks(),
                ..RationalizeOptions::default()
            };
            let band = |name: &str, s: &str| {
                mapfile::parse_band_arg(s).map_err(|source| CliError::Parse {
                    path: name.into(),
                    source,
                })
            };
            if let Some(s) = hband {
                options.horizontal_band = band("--hband", s)?;
            }
            if let Some(s) = vband {
                options.vertical_band = band("--vband", s)?;
            }
            let res = rationalize_flux(&f, *q_max, *c0, &options)?;
            let perturbed = MapFile::from_map(&res.perturbed).to_string();
            report = Report::new("rationalize");
            report.map_hash = Some(map_hash(&file.to_string()));
            let p = &mut report.parameters;
            p.insert("q_max".into(), Value::from(*q_max));
            p.insert("c0_bound".into(), num(*c0));
            p.insert("grid".into(), Value::from(grid.n()));
            p.insert(
                "hband".into(),
                pair(options.horizontal_band.lo(), options.horizontal_band.hi()),
            );
            p.insert("vband".into(), pair(options.vertical_band.lo(), options.vertical_band.hi()));
            let (tx, ty) = res.target();
            let r = &mut report.results;
            r.insert("q".into(), Value::from(res.q));
            r.insert("p".into(), int_pair(res.p.0, res.p.1));
            r.insert("target".into(), pair(tx, ty));
            r.insert("eps_used".into(), pair(res.eps_used.0, res.eps_used.1));
            r.insert("c0_size".into(), num(res.c0_size));
            r.insert("c1_size".into(), num(res.c1_size));
            r.insert("flux_before".into(), flux_value(&res.flux_before));
            r.insert("flux_after".into(), flux_value(&res.flux_after));
            r.insert("target_error".into(), num(res.target_error));
            r.insert(
                "warnings".into(),
                Value::Array(res.warnings.iter().map(|w| Value::from(w.clone())).collect()),
            );
            r.insert("perturbed_map".into(), Value::from(perturbed.clone()));
            report
                .residuals
                .insert("flux_vs_target".into(), num((res.flux_after.raw() - Point2::new(tx, ty)).norm()));
            map_out = out.clone().map(|p| (p, perturbed));
        }
        Command::Verify { map, depth, points } => {
            let file = match map {
                Some(p) => Some(load(p)?),
                None => None,
            };
            let outcome = crate::verify::verify(file.as_ref(), cli.seed, *depth, *points, grid)?;
            report = outcome.report;
            if !outcome.passed {
                exit_code = EXIT_VERIFY_FAILED;
            }
        }
    }
    report.parameters.insert("seed".into(), Value::from(cli.seed));
    if cli.timings {
        let mut t = Map::new();
        t.insert("total_ms".into(), num(started.elapsed().as_secs_f64() * 1e3));
        report.timings = Some(t);
    }
    Ok(Run {
        report,
        exit_code,
        map_out,
    })
}

fn diagnostics_value(d: &closing_core::orbits::SearchDiagnostics) -> Value {
    let mut m = Map::new();
    m.insert("seeds".into(), Value::from(d.seeds));
    m.insert(
        "lattice_candidates".into(),
        Value::Array(d.lattice_candidates.iter().map(|z| int_pair(z.x, z.y)).collect()),
    );
    m.insert("converged".into(), Value::from(d.converged));
    m.insert("singular".into(), Value::from(d.singular));
    m.insert("diverged".into(), Value::from(d.diverged));
    m.insert("outside_region".into(), Value::from(d.outside_region));
    m.insert("min_residual".into(), num(d.min_residual));
    Value::Object(m)
}
