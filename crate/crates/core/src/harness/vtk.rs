use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::{CellGeometry, Field};

/// Writes a legacy ASCII VTK unstructured grid with vertex velocity,
/// pressure and divergence (averaged over the cells around each vertex).
pub fn export_vtk(u: &Field, p: &Field, path: &Path) -> Result<()> {
    std::fs::write(path, vtk_string(u, p)?)?;
    Ok(())
}

pub fn vtk_string(u: &Field, p: &Field) -> Result<String> {
    let mesh = u.space().mesh();
    if !std::sync::Arc::ptr_eq(mesh, p.space().mesh()) && **mesh != **p.space().mesh() {
        return Err(Error::InvalidArgument(
            "velocity and pressure live on different meshes".into(),
        ));
    }
    if u.components() != 2 || p.components() != 1 {
        return Err(Error::InvalidArgument(
            "expected a vector velocity and a scalar pressure".into(),
        ));
    }
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();

    let mut div = vec![0.0; nv];
    let mut count = vec![0usize; nv];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = CellGeometry::new(mesh, t);
        for (k, &v) in tri.iter().enumerate() {
            let mut lam = [0.0; 3];
            lam[k] = 1.0;
            div[v] += u.divergence(t, &geo, lam);
            count[v] += 1;
        }
    }

    let vs = u.space();
    let ps = p.space();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nestokes solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {nv} double");
    for x in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e} 0", x[0], x[1]);
    }
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for tri in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", tri[0], tri[1], tri[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {nv}");
    s.push_str("VECTORS velocity double\n");
    // vertex v is scalar dof v in both P1 and P2 numbering
    for v in 0..nv {
        let _ = writeln!(s, "{:e} {:e} 0", u.coeffs()[vs.dof(0, v)], u.coeffs()[vs.dof(1, v)]);
    }
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for v in 0..nv {
        let _ = writeln!(s, "{:e}", p.coeffs()[ps.dof(0, v)]);
    }
    s.push_str("SCALARS div_u double 1\nLOOKUP_TABLE default\n");
    for v in 0..nv {
        let d = if count[v] > 0 { div[v] / count[v] as f64 } else { 0.0 };
        let _ = writeln!(s, "{d:e}");
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{Degree, Space};
    use crate::mesh::build_structured_mesh;
    use std::sync::Arc;

    #[test]
    fn zero_solution_on_single_cell_mesh() {
        let mesh = Arc::new(build_structured_mesh(1).unwrap());
        let u = Field::zeros(Arc::new(Space::vector(mesh.clone(), Degree::P2)));
        let p = Field::zeros(Arc::new(Space::scalar(mesh, Degree::P1)));
        let text = vtk_string(&u, &p).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(text.contains("POINTS 4 double\n"));
        assert!(text.contains("CELLS 2 8\n"));
        assert!(text.contains("CELL_TYPES 2\n5\n5\n"));
        let data = text.split("POINT_DATA 4\n").nth(1).unwrap();
        let nums: Vec<f64> = data
            .split_whitespace()
            .filter_map(|w| w.parse::<f64>().ok())
            .filter(|&v| v != 1.0)
            .collect();
        assert_eq!(nums.len(), 4 * 3 + 4 + 4);
        assert!(nums.iter().all(|&v| v == 0.0));
    }
}
