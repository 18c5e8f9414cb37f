use rayon::prelude::*;

use crate::geometry::{reduce_unit, Mat2, Point2};
use crate::map::TorusMap;
use crate::quadrature::{integrate_periodic, integrate_torus_vec, GridSpec};

pub const DEFAULT_EXACT_TOL: f64 = 1e-9;

/// Displacement integral `∫_{T²} (f̃(p) − p) dp` of the chain's lift.
///
/// The lift is the one the generator chain defines, so integer parts carried
/// by translations are kept and the raw vector is additive under composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxVector {
    pub vx: f64,
    pub vy: f64,
}

impl FluxVector {
    pub fn new(vx: f64, vy: f64) -> Self {
        Self { vx, vy }
    }

    pub fn raw(&self) -> Point2 {
        Point2::new(self.vx, self.vy)
    }

    /// `(vx mod 1, vy mod 1)` in `[0, 1)²`.
    pub fn reduced(&self) -> (f64, f64) {
        (reduce_unit(self.vx), reduce_unit(self.vy))
    }

    /// Cohomology coefficients `(a₁, a₂) = J₀·(vx, vy)` of `a₁ dx + a₂ dy`,
    /// with `J₀` the Poisson matrix.
    pub fn poisson_pairing(&self) -> (f64, f64) {
        let a = Mat2::POISSON.apply(self.raw());
        (a.x, a.y)
    }

    /// Flux across the horizontal cycle (the `a` cycle), mod 1.
    pub fn across_a_cycle(&self) -> f64 {
        reduce_unit(self.vy)
    }

    /// Flux across the vertical cycle (the `b` cycle), mod 1.
    pub fn across_b_cycle(&self) -> f64 {
        reduce_unit(self.vx)
    }

    /// Distance of each reduced component from the nearest integer.
    pub fn distance_to_lattice(&self) -> (f64, f64) {
        ((self.vx - self.vx.round()).abs(), (self.vy - self.vy.round()).abs())
    }
}

pub fn flux_vector(map: &TorusMap, grid: GridSpec) -> FluxVector {
    let v = integrate_torus_vec(|p| map.displacement(p), grid);
    FluxVector::new(v.x, v.y)
}

/// Flux vectors of `f, f², …, f^k_max` from one orbit per grid node; equal to
/// calling [`flux_vector`] on each [`TorusMap::iterate`].
pub fn iterate_flux_vectors(map: &TorusMap, k_max: usize, grid: GridSpec) -> Vec<FluxVector> {
    let n = grid.n();
    let rows: Vec<Vec<Point2>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![Point2::ORIGIN; k_max];
            for j in 0..n {
                let p = grid.node(i, j);
                let mut q = p;
                for slot in acc.iter_mut() {
                    q = map.lift(q);
                    *slot = *slot + (q - p);
                }
            }
            acc
        })
        .collect();
    let scale = 1.0 / (n * n) as f64;
    (0..k_max)
        .map(|k| {
            let total = rows.iter().fold(Point2::ORIGIN, |acc, r| acc + r[k]);
            let v = total * scale;
            FluxVector::new(v.x, v.y)
        })
        .collect()
}

/// Exact iff the displacement integral is an integer vector within `tol`,
/// i.e. some lift has zero displacement integral.
pub fn is_exact(map: &TorusMap, grid: GridSpec, tol: f64) -> bool {
    let (dx, dy) = flux_vector(map, grid).distance_to_lattice();
    dx <= tol && dy <= tol
}

/// The two fundamental cycles of the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cycle {
    /// `s ↦ (s, y0)`
    Horizontal { y0: f64 },
    /// `s ↦ (x0, s)`
    Vertical { x0: f64 },
}

/// Signed area swept between the loop and its image, unreduced.
///
/// Uses the straight-line homotopy `γ + τ(f̃∘γ − γ)`; with displacement
/// `Δ(s)` along the loop the swept area across a horizontal cycle is
/// `∫ Δ_y + ½(Δ_x' Δ_y − Δ_y' Δ_x) ds`. Areas are oriented so that the
/// horizontal cycle measures upward motion and the vertical cycle rightward
/// motion, matching `vy` and `vx` respectively.
pub fn loop_flux_raw(map: &TorusMap, cycle: Cycle, nodes: usize) -> f64 {
    let (base, tangent, sign): (fn(f64, f64) -> Point2, Point2, f64) = match cycle {
        Cycle::Horizontal { .. } => (|s, c| Point2::new(s, c), Point2::new(1.0, 0.0), 1.0),
        Cycle::Vertical { .. } => (|s, c| Point2::new(c, s), Point2::new(0.0, 1.0), -1.0),
    };
    let c = match cycle {
        Cycle::Horizontal { y0 } => y0,
        Cycle::Vertical { x0 } => x0,
    };
    integrate_periodic(
        |s| {
            let p = base(s, c);
            let (image, jac) = map.lift_with_jacobian(p);
            let d = image - p;
            let dd = jac.sub_identity().apply(tangent);
            let transverse = if sign > 0.0 { d.y } else { -d.x };
            let twist = 0.5 * (dd.x * d.y - dd.y * d.x);
            sign * (transverse + twist)
        },
        nodes,
    )
}

/// [`loop_flux_raw`] reduced into `[0, 1)`.
pub fn loop_flux(map: &TorusMap, cycle: Cycle, nodes: usize) -> f64 {
    reduce_unit(loop_flux_raw(map, cycle, nodes))
}
