//! Conforming triangulations of polygonal domains.
//!
//! A [`Mesh`] is validated on construction and immutable afterwards. Boundary
//! edges are stored oriented so that the domain lies to their left, which makes
//! `(dy, -dx) / len` the outward unit normal.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Integer tag attached to each boundary edge.
pub type Marker = i32;

pub const MARKER_BOTTOM: Marker = 1;
pub const MARKER_RIGHT: Marker = 2;
pub const MARKER_TOP: Marker = 3;
pub const MARKER_LEFT: Marker = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    /// Endpoints, ordered so the domain lies on the left.
    pub vertices: [usize; 2],
    pub marker: Marker,
    /// Unit outward normal.
    pub normal: Point,
    /// The unique triangle containing this edge.
    pub triangle: usize,
    /// Local edge index inside `triangle` (edge `k` joins local vertices `k` and `k + 1 mod 3`).
    pub local_edge: usize,
}

impl BoundaryEdge {
    pub fn length(&self, mesh: &Mesh) -> f64 {
        let [a, b] = self.vertices;
        distance(mesh.vertices[a], mesh.vertices[b])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    /// Unique undirected edges, stored as `(min, max)`.
    edges: Vec<[usize; 2]>,
    /// Global edge index of local edge `k` for each triangle.
    triangle_edges: Vec<[usize; 3]>,
    /// Boundary edge index for each global edge, if any.
    edge_boundary: Vec<Option<usize>>,
}

fn distance(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    /// Builds and validates a mesh from raw parts.
    ///
    /// `boundary` lists every boundary edge as `(endpoints, marker)`; the
    /// endpoint order in the input is irrelevant.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>, boundary: Vec<([usize; 2], Marker)>) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::Topology("mesh has no triangles".into()));
        }
        let mut used = vec![false; nv];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::Topology(format!(
                        "triangle {t} {tri:?} references vertex {v} but only {nv} vertices exist"
                    )));
                }
                used[v] = true;
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::Topology(format!(
                    "triangle {t} {tri:?} is clockwise or degenerate (signed area {area:e})"
                )));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Topology(format!("vertex {v} is not referenced by any triangle")));
        }

        // Directed occurrences of each undirected edge.
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut owners: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    owners.push(Vec::new());
                    edges.len() - 1
                });
                owners[e].push((t, k));
                local[k] = e;
            }
            triangle_edges.push(local);
        }
        for (e, own) in owners.iter().enumerate() {
            if own.len() > 2 {
                return Err(Error::Topology(format!(
                    "edge {:?} is shared by {} triangles",
                    edges[e],
                    own.len()
                )));
            }
            if own.len() == 2 {
                let (t0, k0) = own[0];
                let (t1, k1) = own[1];
                if triangles[t0][k0] == triangles[t1][k1] {
                    return Err(Error::Topology(format!(
                        "triangles {t0} and {t1} overlap across edge {:?}",
                        edges[e]
                    )));
                }
            }
        }

        let mut edge_boundary = vec![None; edges.len()];
        let mut oriented = Vec::with_capacity(boundary.len());
        for (b, &([i, j], marker)) in boundary.iter().enumerate() {
            if i >= nv || j >= nv || i == j {
                return Err(Error::Topology(format!(
                    "boundary edge {b} ({i}, {j}) has invalid endpoints"
                )));
            }
            let Some(&e) = edge_index.get(&(i.min(j), i.max(j))) else {
                return Err(Error::Topology(format!(
                    "dangling boundary edge {b} ({i}, {j}) is not an edge of any triangle"
                )));
            };
            if owners[e].len() != 1 {
                return Err(Error::Topology(format!(
                    "dangling boundary edge {b} ({i}, {j}) is interior, shared by triangles {} and {}",
                    owners[e][0].0, owners[e][1].0
                )));
            }
            if edge_boundary[e].is_some() {
                return Err(Error::Topology(format!("boundary edge {b} ({i}, {j}) is listed twice")));
            }
            edge_boundary[e] = Some(b);
            let (t, k) = owners[e][0];
            let (a, c) = (triangles[t][k], triangles[t][(k + 1) % 3]);
            let (pa, pc) = (vertices[a], vertices[c]);
            let len = distance(pa, pc);
            let normal = [(pc[1] - pa[1]) / len, -(pc[0] - pa[0]) / len];
            oriented.push(BoundaryEdge {
                vertices: [a, c],
                marker,
                normal,
                triangle: t,
                local_edge: k,
            });
        }
        for (e, own) in owners.iter().enumerate() {
            if own.len() == 1 && edge_boundary[e].is_none() {
                return Err(Error::Topology(format!(
                    "edge {:?} of triangle {} lies on the boundary but carries no marker",
                    edges[e], own[0].0
                )));
            }
        }

        // Closed loops: every boundary vertex has one incoming and one outgoing edge.
        let mut degree = vec![(0u32, 0u32); nv];
        for be in &oriented {
            degree[be.vertices[0]].0 += 1;
            degree[be.vertices[1]].1 += 1;
        }
        if let Some(v) = degree.iter().position(|&(o, i)| o != i || o > 1) {
            return Err(Error::Topology(format!(
                "boundary is not a set of simple closed loops at vertex {v}"
            )));
        }

        let mesh = Mesh {
            vertices,
            triangles,
            boundary: oriented,
            edges,
            triangle_edges,
            edge_boundary,
        };
        let enclosed: f64 = mesh
            .boundary
            .iter()
            .map(|be| {
                let (a, b) = (mesh.vertices[be.vertices[0]], mesh.vertices[be.vertices[1]]);
                0.5 * (a[0] * b[1] - b[0] * a[1])
            })
            .sum();
        let area = mesh.area();
        if (enclosed - area).abs() > 1e-12 * area {
            return Err(Error::Topology(format!(
                "triangles cover area {area} but the boundary encloses {enclosed}"
            )));
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn edge_boundary(&self, e: usize) -> Option<&BoundaryEdge> {
        self.edge_boundary[e].map(|b| &self.boundary[b])
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    /// Sum of triangle areas.
    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Total length of the boundary.
    pub fn perimeter(&self) -> f64 {
        self.boundary.iter().map(|be| be.length(self)).sum()
    }

    /// Serializes to the `mesh2d v1` ASCII format.
    pub fn to_ascii(&self) -> String {
        let mut s = String::from("mesh2d v1\n");
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{} {}", v[0], v[1]);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "boundary {}", self.boundary.len());
        for be in &self.boundary {
            let _ = writeln!(s, "{} {} {}", be.vertices[0], be.vertices[1], be.marker);
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_ascii())?;
        Ok(())
    }
}

/// Uniform `n x n` grid of the unit square, each cell cut along its SW-NE diagonal.
///
/// Markers: 1 bottom, 2 right, 3 top, 4 left.
pub fn build_structured_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "structured mesh needs n >= 1 subdivisions".into(),
        ));
    }
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // exact endpoints, so that x = 1 is represented exactly
            let x = if i == n { 1.0 } else { i as f64 * h };
            let y = if j == n { 1.0 } else { j as f64 * h };
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (sw, se, ne, nw) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([sw, se, ne]);
            triangles.push([sw, ne, nw]);
        }
    }
    let mut boundary = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary.push(([id(i, 0), id(i + 1, 0)], MARKER_BOTTOM));
    }
    for j in 0..n {
        boundary.push(([id(n, j), id(n, j + 1)], MARKER_RIGHT));
    }
    for i in (0..n).rev() {
        boundary.push(([id(i + 1, n), id(i, n)], MARKER_TOP));
    }
    for j in (0..n).rev() {
        boundary.push(([id(0, j + 1), id(0, j)], MARKER_LEFT));
    }
    Mesh::new(vertices, triangles, boundary)
}

/// Reads a mesh in the `mesh2d v1` ASCII format.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, path)
}

/// Parses `mesh2d v1` text; `origin` is only used in error messages.
pub fn parse_mesh(text: &str, origin: &Path) -> Result<Mesh> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut last_line = 0;
    let mut next = |what: &str| -> Result<(usize, &str)> {
        match lines.next() {
            Some((no, l)) => {
                last_line = no;
                Ok((no, l))
            }
            None => Err(err(last_line + 1, format!("unexpected end of file, expected {what}"))),
        }
    };

    let (no, header) = next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["mesh2d", "v1"] {
        return Err(err(no, format!("expected header `mesh2d v1`, found `{header}`")));
    }

    fn section(no: usize, line: &str, name: &str) -> std::result::Result<usize, (usize, String)> {
        let mut it = line.split_whitespace();
        match (it.next(), it.next(), it.next()) {
            (Some(k), Some(count), None) if k == name => count
                .parse()
                .map_err(|_| (no, format!("invalid {name} count `{count}`"))),
            _ => Err((no, format!("expected `{name} <count>`, found `{line}`"))),
        }
    }
    fn fields<T: std::str::FromStr, const N: usize>(
        no: usize,
        line: &str,
    ) -> std::result::Result<[T; N], (usize, String)> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != N {
            return Err((no, format!("expected {N} fields, found {}", parts.len())));
        }
        let mut out = Vec::with_capacity(N);
        for p in parts {
            out.push(p.parse::<T>().map_err(|_| (no, format!("cannot parse `{p}`")))?);
        }
        Ok(out.try_into().ok().expect("length checked"))
    }
    let lift = |r: (usize, String)| err(r.0, r.1);

    let (no, l) = next("vertices section")?;
    let nv = section(no, l, "vertices").map_err(lift)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, l) = next("vertex")?;
        let v: [f64; 2] = fields(no, l).map_err(lift)?;
        if !v.iter().all(|c| c.is_finite()) {
            return Err(err(no, "non-finite vertex coordinate".into()));
        }
        vertices.push(v);
    }
    let (no, l) = next("triangles section")?;
    let nt = section(no, l, "triangles").map_err(lift)?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (no, l) = next("triangle")?;
        triangles.push(fields::<usize, 3>(no, l).map_err(lift)?);
    }
    let (no, l) = next("boundary section")?;
    let nb = section(no, l, "boundary").map_err(lift)?;
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (no, l) = next("boundary edge")?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(err(no, format!("expected 3 fields, found {}", parts.len())));
        }
        let i: usize = parts[0]
            .parse()
            .map_err(|_| err(no, format!("cannot parse `{}`", parts[0])))?;
        let j: usize = parts[1]
            .parse()
            .map_err(|_| err(no, format!("cannot parse `{}`", parts[1])))?;
        let m: Marker = parts[2]
            .parse()
            .map_err(|_| err(no, format!("cannot parse `{}`", parts[2])))?;
        boundary.push(([i, j], m));
    }
    if let Ok((no, l)) = next("") {
        return Err(err(no, format!("trailing content `{l}`")));
    }
    Mesh::new(vertices, triangles, boundary)
}

/// Maximum edge length over all triangles.
pub fn mesh_size(mesh: &Mesh) -> f64 {
    mesh.edges
        .iter()
        .map(|&[a, b]| distance(mesh.vertices[a], mesh.vertices[b]))
        .fold(0.0, f64::max)
}
