//! Error norms evaluated with the degree-5 rule.

use crate::fem::{edge_barycentric, CellGeometry, EdgeRule, Field, QuadratureRule};
use crate::mesh::{Marker, Mesh, Point};

/// Reference function for an error norm.
#[derive(Clone, Copy)]
pub enum Exact<'a> {
    Zero,
    Scalar(&'a dyn Fn(Point) -> f64),
    Vector(&'a dyn Fn(Point) -> [f64; 2]),
}

impl Exact<'_> {
    fn eval(&self, x: Point) -> [f64; 2] {
        match self {
            Exact::Zero => [0.0, 0.0],
            Exact::Scalar(f) => [f(x), 0.0],
            Exact::Vector(f) => f(x),
        }
    }
}

/// Gradient of the reference function; row `c` is the gradient of component `c`.
#[derive(Clone, Copy)]
pub enum ExactGrad<'a> {
    Zero,
    Scalar(&'a dyn Fn(Point) -> [f64; 2]),
    Vector(&'a dyn Fn(Point) -> [[f64; 2]; 2]),
}

impl ExactGrad<'_> {
    fn eval(&self, x: Point) -> [[f64; 2]; 2] {
        match self {
            ExactGrad::Zero => [[0.0; 2]; 2],
            ExactGrad::Scalar(f) => [f(x), [0.0, 0.0]],
            ExactGrad::Vector(f) => f(x),
        }
    }
}

/// Sums `w * det * integrand(t, geo, lam, x)` over all cells and points.
fn integrate(mesh: &Mesh, mut integrand: impl FnMut(usize, &CellGeometry, [f64; 3], Point) -> f64) -> f64 {
    let quad = QuadratureRule::degree5();
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let geo = CellGeometry::new(mesh, t);
        for (lam, w) in quad.iter() {
            total += w * geo.det * integrand(t, &geo, lam, geo.map(lam));
        }
    }
    total
}

/// `‖field - exact‖_{L²}`.
pub fn error_l2(field: &Field, exact: Exact<'_>) -> f64 {
    let nc = field.components();
    integrate(field.space().mesh(), |t, _, lam, x| {
        let (v, e) = (field.value(t, lam), exact.eval(x));
        (0..nc).map(|c| (v[c] - e[c]).powi(2)).sum()
    })
    .sqrt()
}

/// `‖∇(field - exact)‖_{L²}`.
pub fn error_h1_seminorm(field: &Field, grad_exact: ExactGrad<'_>) -> f64 {
    let nc = field.components();
    integrate(field.space().mesh(), |t, geo, lam, x| {
        let (g, e) = (field.gradient(t, geo, lam), grad_exact.eval(x));
        (0..nc)
            .map(|c| (g[c][0] - e[c][0]).powi(2) + (g[c][1] - e[c][1]).powi(2))
            .sum()
    })
    .sqrt()
}

/// Full `H¹` norm `sqrt(‖e‖² + ‖∇e‖²)` of `e = field - exact`.
pub fn error_h1(field: &Field, exact: Exact<'_>, grad_exact: ExactGrad<'_>) -> f64 {
    error_l2(field, exact).hypot(error_h1_seminorm(field, grad_exact))
}

/// `L²/R` norm of `field - exact`: the L² norm after removing the mean.
pub fn quotient_norm_l2(field: &Field, exact: Exact<'_>) -> f64 {
    let mesh = field.space().mesh();
    let diff = |t: usize, lam: [f64; 3], x: Point| field.value(t, lam)[0] - exact.eval(x)[0];
    let mean = integrate(mesh, |t, _, lam, x| diff(t, lam, x)) / mesh.area();
    integrate(mesh, |t, _, lam, x| (diff(t, lam, x) - mean).powi(2)).sqrt()
}

/// `‖div field‖_{L²}` for a vector field.
pub fn divergence_l2(field: &Field) -> f64 {
    integrate(field.space().mesh(), |t, geo, lam, _| {
        field.divergence(t, geo, lam).powi(2)
    })
    .sqrt()
}

/// `‖p_b - p_exact‖_{L²(Γ)}` by boundary edge quadrature.
pub fn trace_mismatch(p_b: impl Fn(Point, Marker) -> f64, p_exact: impl Fn(Point) -> f64, mesh: &Mesh) -> f64 {
    let rule = EdgeRule::gauss3();
    mesh.boundary_edges()
        .iter()
        .map(|be| {
            let [a, b] = be.vertices;
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            let len = be.length(mesh);
            rule.iter()
                .map(|(s, w)| {
                    let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                    w * len * (p_b(x, be.marker) - p_exact(x)).powi(2)
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// `∫ u·∇ω + ∫ (div u) ω - ∮ (u·ν) ω` for a vector field `u` and a scalar
/// field `ω`; zero up to rounding by the Gauss formula.
pub fn gauss_formula_residual(u: &Field, omega: &Field) -> f64 {
    let mesh = u.space().mesh();
    let volume = integrate(mesh, |t, geo, lam, _| {
        let uv = u.value(t, lam);
        let gw = omega.gradient(t, geo, lam)[0];
        uv[0] * gw[0] + uv[1] * gw[1] + u.divergence(t, geo, lam) * omega.value(t, lam)[0]
    });
    let rule = EdgeRule::gauss3();
    let boundary: f64 = mesh
        .boundary_edges()
        .iter()
        .map(|be| {
            let len = be.length(mesh);
            rule.iter()
                .map(|(s, w)| {
                    let lam = edge_barycentric(be.local_edge, s);
                    let uv = u.value(be.triangle, lam);
                    let wv = omega.value(be.triangle, lam)[0];
                    w * len * (uv[0] * be.normal[0] + uv[1] * be.normal[1]) * wv
                })
                .sum::<f64>()
        })
        .sum();
    volume - boundary
}
