use std::sync::Arc;

use super::space::{shape_gradients, shape_values, CellGeometry, Space};
use crate::error::{Error, Result};
use crate::mesh::Point;

/// Finite-element function: one coefficient per dof of `space`.
#[derive(Debug, Clone)]
pub struct Field {
    space: Arc<Space>,
    coeffs: Vec<f64>,
}

impl Field {
    pub fn new(space: Arc<Space>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.ndofs() {
            return Err(Error::ShapeMismatch {
                op: "Field::new",
                left: (space.ndofs(), 1),
                right: (coeffs.len(), 1),
            });
        }
        Ok(Field { space, coeffs })
    }

    pub fn zeros(space: Arc<Space>) -> Self {
        let n = space.ndofs();
        Field {
            space,
            coeffs: vec![0.0; n],
        }
    }

    /// Nodal interpolant of a scalar function.
    pub fn interpolate_scalar(space: Arc<Space>, f: impl Fn(Point) -> f64) -> Self {
        assert_eq!(space.components(), 1, "scalar interpolation into a vector space");
        let coeffs = space.support_points().iter().map(|&p| f(p)).collect();
        Field { space, coeffs }
    }

    /// Nodal interpolant of a vector function.
    pub fn interpolate_vector(space: Arc<Space>, f: impl Fn(Point) -> [f64; 2]) -> Self {
        assert_eq!(space.components(), 2, "vector interpolation into a scalar space");
        let ns = space.nscalar();
        let mut coeffs = vec![0.0; 2 * ns];
        for (s, &p) in space.support_points().iter().enumerate() {
            let v = f(p);
            coeffs[s] = v[0];
            coeffs[ns + s] = v[1];
        }
        Field { space, coeffs }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn components(&self) -> usize {
        self.space.components()
    }

    fn same_space(&self, other: &Field, op: &'static str) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                op,
                left: (self.coeffs.len(), 1),
                right: (other.coeffs.len(), 1),
            })
        }
    }

    /// `self - other`; both must live on the same space instance.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.same_space(other, "Field::sub")?;
        Ok(Field {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scaled(&self, alpha: f64) -> Field {
        Field {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
        }
    }

    pub fn add_constant(&self, value: f64) -> Field {
        Field {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c + value).collect(),
        }
    }

    /// Component values on triangle `t` at barycentric `lam`.
    /// Scalar fields fill index 0 only.
    pub fn value(&self, t: usize, lam: [f64; 3]) -> [f64; 2] {
        let phi = shape_values(self.space.degree(), lam);
        let dofs = self.space.cell_dofs(t);
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate().take(self.components()) {
            *o = dofs
                .iter()
                .zip(&phi)
                .map(|(&s, p)| p * self.coeffs[self.space.dof(c, s)])
                .sum();
        }
        out
    }

    /// Row `c` is the gradient of component `c`.
    pub fn gradient(&self, t: usize, geo: &CellGeometry, lam: [f64; 3]) -> [[f64; 2]; 2] {
        let dphi = shape_gradients(self.space.degree(), lam, &geo.grad_lambda);
        let dofs = self.space.cell_dofs(t);
        let mut out = [[0.0; 2]; 2];
        for (c, o) in out.iter_mut().enumerate().take(self.components()) {
            for (&s, g) in dofs.iter().zip(&dphi) {
                let v = self.coeffs[self.space.dof(c, s)];
                o[0] += v * g[0];
                o[1] += v * g[1];
            }
        }
        out
    }

    /// Divergence of a vector field on triangle `t`.
    pub fn divergence(&self, t: usize, geo: &CellGeometry, lam: [f64; 3]) -> f64 {
        let g = self.gradient(t, geo, lam);
        g[0][0] + g[1][1]
    }
}
