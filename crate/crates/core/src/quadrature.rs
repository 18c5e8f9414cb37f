//! Quadrature on the torus, on the unit disk, and along paths.
//!
//! All reductions run in a fixed order so results are bit-reproducible
//! regardless of how rayon schedules the node evaluations.

use std::f64::consts::TAU;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Point2};
use crate::map::TorusMap;

/// Points per axis of the equal-weight periodic trapezoid rule on `[0, 1)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub const DEFAULT_N: usize = 512;

    pub fn new(n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node(&self, i: usize, j: usize) -> Point2 {
        let h = 1.0 / self.n as f64;
        Point2::new(i as f64 * h, j as f64 * h)
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: Self::DEFAULT_N }
    }
}

/// `∫_{T²} f` by the periodic trapezoid rule.
pub fn integrate_torus<F>(f: F, grid: GridSpec) -> f64
where
    F: Fn(Point2) -> f64 + Sync,
{
    let n = grid.n();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| f(grid.node(i, j))).sum::<f64>())
        .collect();
    rows.iter().sum::<f64>() / (n * n) as f64
}

/// Vector-valued [`integrate_torus`].
pub fn integrate_torus_vec<F>(f: F, grid: GridSpec) -> Point2
where
    F: Fn(Point2) -> Point2 + Sync,
{
    let n = grid.n();
    let rows: Vec<Point2> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n).fold(Point2::ORIGIN, |acc, j| acc + f(grid.node(i, j)))
        })
        .collect();
    let total = rows.iter().fold(Point2::ORIGIN, |acc, r| acc + *r);
    total * (1.0 / (n * n) as f64)
}

/// Equal-weight rule on a closed loop `s ∈ [0, 1)`, exact for trigonometric
/// polynomials of degree below `nodes`.
pub fn integrate_periodic<F>(f: F, nodes: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let h = 1.0 / nodes as f64;
    (0..nodes).map(|k| f(k as f64 * h)).sum::<f64>() * h
}

const PANEL_ORDER: usize = 16;

/// 16-point Gauss–Legendre nodes and weights on `[-1, 1]`.
fn panel_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let order = NonZeroUsize::new(PANEL_ORDER).expect("nonzero");
        let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(order).into_iter().collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    })
}

/// Composite Gauss–Legendre on `[a, b]` with `panels` equal panels of 16 nodes.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let rule = panel_rule();
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * width;
        let panel: f64 = rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum();
        total += half * panel;
    }
    total
}

/// Node counts for [`integrate_disk`]: composite Gauss–Legendre in the radius
/// (with the `r dr` area element) times the trapezoid rule in the angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiskRule {
    pub radial: usize,
    pub angular: usize,
}

impl Default for DiskRule {
    fn default() -> Self {
        Self {
            radial: 512,
            angular: 1024,
        }
    }
}

impl DiskRule {
    /// Radii and `r dr` weights, ascending.
    pub fn radial_nodes(&self) -> Vec<(f64, f64)> {
        let panels = self.radial.div_ceil(PANEL_ORDER).max(1);
        let rule = panel_rule();
        let width = 1.0 / panels as f64;
        let half = 0.5 * width;
        let mut out = Vec::with_capacity(panels * PANEL_ORDER);
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * width;
            for &(x, w) in rule {
                let r = mid + half * x;
                out.push((r, half * w * r));
            }
        }
        out
    }

    /// All quadrature nodes in the unit disk with their weights.
    pub fn nodes(&self) -> Vec<(Point2, f64)> {
        let radial = self.radial_nodes();
        let dtheta = TAU / self.angular as f64;
        let mut out = Vec::with_capacity(radial.len() * self.angular);
        for &(r, w) in &radial {
            for k in 0..self.angular {
                let th = k as f64 * dtheta;
                out.push((Point2::new(r * th.cos(), r * th.sin()), w * dtheta));
            }
        }
        out
    }
}

/// `∫_{|u| ≤ 1} f(u) du` over the unit disk.
///
/// The radial rule is composite 16-point Gauss–Legendre with
/// `ceil(radial / 16)` panels.
pub fn integrate_disk<F>(f: F, rule: DiskRule) -> f64
where
    F: Fn(Point2) -> f64 + Sync,
{
    let radial = rule.radial_nodes();
    let dtheta = TAU / rule.angular as f64;
    let rings: Vec<f64> = radial
        .par_iter()
        .map(|&(r, w)| {
            let ring = compensated_sum((0..rule.angular).map(|k| {
                let th = k as f64 * dtheta;
                f(Point2::new(r * th.cos(), r * th.sin()))
            }));
            w * dtheta * ring
        })
        .collect();
    compensated_sum(rings.into_iter())
}

/// Neumaier summation.
pub fn compensated_sum<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A polygonal path with straight segments between consecutive vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    vertices: Vec<Point2>,
    nodes_per_segment: usize,
}

impl Path {
    pub const DEFAULT_NODES: usize = 256;

    pub fn new(vertices: Vec<Point2>, nodes_per_segment: usize) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidPath("need at least two vertices".into()));
        }
        if nodes_per_segment < 16 {
            return Err(Error::InvalidPath(format!(
                "need at least 16 nodes per segment, got {nodes_per_segment}"
            )));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPath("consecutive vertices coincide".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPath("non-finite vertex".into()));
        }
        Ok(Self {
            vertices,
            nodes_per_segment,
        })
    }

    pub fn segment(start: Point2, end: Point2, nodes: usize) -> Result<Self> {
        Self::new(vec![start, end], nodes)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }

    /// `∫_path ⟨w(γ), γ'⟩`, composite Gauss on each segment.
    pub fn integrate_one_form<F>(&self, w: F) -> f64
    where
        F: Fn(Point2, Point2) -> f64,
    {
        let panels = self.nodes_per_segment.div_ceil(PANEL_ORDER);
        self.vertices
            .windows(2)
            .map(|seg| {
                let (a, b) = (seg[0], seg[1]);
                let tangent = b - a;
                integrate_interval(|s| w(a + tangent * s, tangent), 0.0, 1.0, panels)
            })
            .sum()
    }
}

/// Primitive 1-forms λ with `dλ = du ∧ dv` on the unit-disk chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseForm {
    /// `(u dv − v du) / 2 = (r²/2) dθ`
    #[default]
    Polar,
    /// `−v du`
    NegVDu,
}

/// A primitive form, optionally shifted by an exact form `dS`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PrimitiveForm {
    pub base: BaseForm,
    /// Gradient of `S` for the exact shift `dS`.
    pub exact_gradient: Option<fn(Point2) -> Point2>,
}

impl PrimitiveForm {
    pub fn polar() -> Self {
        Self::default()
    }

    pub fn with_exact(self, grad: fn(Point2) -> Point2) -> Self {
        Self {
            exact_gradient: Some(grad),
            ..self
        }
    }

    /// Components `(λ_u, λ_v)` at `u`.
    pub fn covector(&self, u: Point2) -> Point2 {
        let base = match self.base {
            BaseForm::Polar => Point2::new(-0.5 * u.y, 0.5 * u.x),
            BaseForm::NegVDu => Point2::new(-u.y, 0.0),
        };
        match self.exact_gradient {
            Some(g) => base + g(u),
            None => base,
        }
    }
}

/// A map viewed in the unit-disk chart of an embedded disk.
pub trait ChartMap {
    /// Image and Jacobian of the chart point `u`.
    fn chart_lift_with_jacobian(&self, u: Point2) -> (Point2, Mat2);
}

/// `map` restricted to `disk` and rescaled to the unit disk.
#[derive(Debug, Clone, Copy)]
pub struct DiskChart<'a> {
    pub map: &'a TorusMap,
    pub disk: crate::generator::Disk,
}

impl ChartMap for DiskChart<'_> {
    fn chart_lift_with_jacobian(&self, u: Point2) -> (Point2, Mat2) {
        let p = self.disk.from_chart(u);
        let (image, jac) = self.map.lift_with_jacobian(p);
        (u + (image - p) * (1.0 / self.disk.radius()), jac)
    }
}

/// `∫_path (h*λ − λ)` in the unit-disk chart, using analytic Jacobians for
/// the pullback.
pub fn line_integral_pullback<M: ChartMap + ?Sized>(
    map: &M,
    form: &PrimitiveForm,
    path: &Path,
) -> Result<f64> {
    for v in path.vertices() {
        if v.norm() > 1.0 + 1e-12 {
            return Err(Error::PathOutsideDisk { x: v.x, y: v.y });
        }
    }
    Ok(path.integrate_one_form(|u, tangent| pullback_density(map, form, u, tangent)))
}

/// `(h*λ − λ)(u)` applied to `tangent`.
pub fn pullback_density<M: ChartMap + ?Sized>(
    map: &M,
    form: &PrimitiveForm,
    u: Point2,
    tangent: Point2,
) -> f64 {
    let (image, jac) = map.chart_lift_with_jacobian(u);
    form.covector(image).dot(jac.apply(tangent)) - form.covector(u).dot(tangent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(7).is_err());
        assert_eq!(GridSpec::new(8).unwrap().n(), 8);
        assert_eq!(GridSpec::default().n(), 512);
    }

    #[test]
    fn torus_constants_and_harmonics() {
        for n in [8, 32, 128] {
            assert_eq!(integrate_torus(|_| 1.0, GridSpec::new(n).unwrap()), 1.0);
        }
        let v = integrate_torus(|p| (TAU * p.x).sin(), GridSpec::new(32).unwrap());
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn torus_self_convergence() {
        let f = |p: Point2| ((TAU * p.x).sin() * (TAU * p.y).cos()).exp();
        let a = integrate_torus(f, GridSpec::new(64).unwrap());
        let b = integrate_torus(f, GridSpec::new(128).unwrap());
        assert!((a - b).abs() < 1e-12);
        let c = integrate_torus(f, GridSpec::new(256).unwrap());
        assert!((b - c).abs() < 1e-13);
    }

    #[test]
    fn disk_examples() {
        let one = integrate_disk(|_| 1.0, DiskRule::default());
        assert!((one - PI).abs() < 1e-12);
        let r2 = integrate_disk(|u| u.dot(u), DiskRule::default());
        assert!((r2 - PI / 2.0).abs() < 1e-10);
        let radial = |u: Point2| (-(u.dot(u))).exp() * (3.0 * u.norm()).cos();
        let a = integrate_disk(radial, DiskRule { radial: 64, angular: 64 });
        let b = integrate_disk(radial, DiskRule { radial: 64, angular: 128 });
        assert!((a - b).abs() < 1e-14, "{a} {b} {}", a - b);
    }

    #[test]
    fn interval_rule_is_exact_on_polynomials() {
        let v = integrate_interval(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1);
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
        let many = integrate_interval(|x| x.cos(), 0.0, 10.0, 5);
        assert!((many - 10f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn periodic_rule() {
        let v = integrate_periodic(|s| (TAU * s).cos().powi(2), 16);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn path_validation() {
        let a = Point2::ORIGIN;
        let b = Point2::new(0.5, 0.0);
        assert!(Path::segment(a, b, 8).is_err());
        assert!(Path::segment(a, a, 64).is_err());
        assert!(Path::new(vec![a], 64).is_err());
        assert!(Path::new(vec![a, b, a], 64).unwrap().is_closed());
    }

    #[test]
    fn exact_form_integrates_to_endpoint_difference() {
        // d(uv) along a polyline
        let path = Path::new(
            vec![Point2::new(0.1, 0.2), Point2::new(-0.4, 0.5), Point2::new(0.3, -0.6)],
            32,
        )
        .unwrap();
        let v = path.integrate_one_form(|u, t| Point2::new(u.y, u.x).dot(t));
        assert!((v - (0.3 * -0.6 - 0.1 * 0.2)).abs() < 1e-15);
    }

    #[test]
    fn base_forms_are_primitives_of_area() {
        // Stokes on the unit circle: ∮λ = area = π
        for base in [BaseForm::Polar, BaseForm::NegVDu] {
            let form = PrimitiveForm { base, exact_gradient: None };
            let n = 256;
            let circ: Vec<Point2> = (0..=n)
                .map(|k| {
                    let th = TAU * (k % n) as f64 / n as f64;
                    Point2::new(th.cos(), th.sin())
                })
                .collect();
            let path = Path::new(circ, 16).unwrap();
            let v = path.integrate_one_form(|u, t| form.covector(u).dot(t));
            // polygon area of the inscribed 256-gon
            let poly = 0.5 * n as f64 * (TAU / n as f64).sin();
            assert!((v - poly).abs() < 1e-12, "{base:?}: {v} vs {poly}");
        }
    }
}
