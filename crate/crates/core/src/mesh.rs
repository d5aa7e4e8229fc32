//! Conforming 2D triangular meshes and the skeleton connectivity consumed by
//! the assembly: oriented edges with left/right elements, outward normals
//! and boundary flags.
//!
//! ASCII format:
//!
//! ```text
//! # comment
//! ntv <nv> <nt>
//! x y          (nv lines)
//! i j k        (nt lines, 0-based, counterclockwise)
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::MeshError;

pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    /// Counterclockwise vertex indices.
    pub vertices: [usize; 3],
    pub diameter: f64,
    pub area: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints, ordered counterclockwise with respect to `left`.
    pub endpoints: [usize; 2],
    pub left: usize,
    /// `None` on the domain boundary.
    pub right: Option<usize>,
    /// Unit normal pointing out of `left`.
    pub normal: Point,
    pub length: f64,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    /// Outward unit normal as seen from element `elem` (one of the sides).
    pub fn normal_from(&self, elem: usize) -> Point {
        if elem == self.left {
            self.normal
        } else {
            debug_assert_eq!(self.right, Some(elem));
            [-self.normal[0], -self.normal[1]]
        }
    }

    /// The element across this edge from `elem`.
    pub fn neighbor_of(&self, elem: usize) -> Option<usize> {
        if elem == self.left {
            self.right
        } else {
            Some(self.left)
        }
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    elem_edges: Vec<[usize; 3]>,
    boundary_edges: Vec<usize>,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Mesh {
    /// Validates the triangle list and derives the full connectivity.
    pub fn new(vertices: Vec<Point>, tris: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        for (i, v) in vertices.iter().enumerate() {
            if !(v[0].is_finite() && v[1].is_finite()) {
                return Err(MeshError::NonFinite(i));
            }
        }
        let mut triangles = Vec::with_capacity(tris.len());
        let mut seen = HashMap::new();
        for (t, ids) in tris.iter().enumerate() {
            if ids.iter().any(|&i| i >= vertices.len()) {
                return Err(MeshError::NonConforming(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            if ids[0] == ids[1] || ids[1] == ids[2] || ids[0] == ids[2] {
                return Err(MeshError::DegenerateTriangle(t));
            }
            let mut key = *ids;
            key.sort_unstable();
            if let Some(prev) = seen.insert(key, t) {
                return Err(MeshError::NonConforming(format!(
                    "triangle {t} repeats triangle {prev}"
                )));
            }
            let [a, b, c] = ids.map(|i| vertices[i]);
            let area = signed_area(a, b, c);
            if area == 0.0 {
                return Err(MeshError::DegenerateTriangle(t));
            }
            if area < 0.0 {
                return Err(MeshError::Orientation(format!(
                    "triangle {t} is clockwise"
                )));
            }
            let diameter = dist(a, b).max(dist(b, c)).max(dist(a, c));
            triangles.push(Triangle {
                vertices: *ids,
                diameter,
                area,
            });
        }

        // directed edge (v0 -> v1) of each triangle, keyed by sorted pair
        let mut edges: Vec<Edge> = Vec::new();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut elem_edges = vec![[usize::MAX; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            #[allow(clippy::needless_range_loop)]
            for k in 0..3 {
                let v0 = tri.vertices[k];
                let v1 = tri.vertices[(k + 1) % 3];
                let key = (v0.min(v1), v0.max(v1));
                match index.get(&key) {
                    None => {
                        let (p0, p1) = (vertices[v0], vertices[v1]);
                        let length = dist(p0, p1);
                        let normal = [(p1[1] - p0[1]) / length, -(p1[0] - p0[0]) / length];
                        index.insert(key, edges.len());
                        elem_edges[t][k] = edges.len();
                        edges.push(Edge {
                            endpoints: [v0, v1],
                            left: t,
                            right: None,
                            normal,
                            length,
                        });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() {
                            return Err(MeshError::NonConforming(format!(
                                "edge ({v0}, {v1}) shared by more than two triangles"
                            )));
                        }
                        if edge.endpoints == [v0, v1] {
                            return Err(MeshError::Orientation(format!(
                                "edge ({v0}, {v1}) traversed in the same direction by \
                                 triangles {} and {t}",
                                edge.left
                            )));
                        }
                        edge.right = Some(t);
                        elem_edges[t][k] = e;
                    }
                }
            }
        }
        let boundary_edges: Vec<usize> = (0..edges.len())
            .filter(|&e| edges[e].right.is_none())
            .collect();

        // a vertex strictly inside a boundary segment is a hanging node
        for &e in &boundary_edges {
            let [a, b] = edges[e].endpoints.map(|i| vertices[i]);
            let len = edges[e].length;
            for (vi, p) in vertices.iter().enumerate() {
                if edges[e].endpoints.contains(&vi) {
                    continue;
                }
                let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                if cross.abs() > 1e-12 * len * len {
                    continue;
                }
                let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]))
                    / (len * len);
                if t > 1e-12 && t < 1.0 - 1e-12 {
                    return Err(MeshError::NonConforming(format!(
                        "hanging node {vi} on edge ({}, {})",
                        edges[e].endpoints[0], edges[e].endpoints[1]
                    )));
                }
            }
        }

        Ok(Mesh {
            vertices,
            triangles,
            edges,
            elem_edges,
            boundary_edges,
        })
    }

    /// Structured `nx x ny` quad grid on a rectangle, each quad cut into two
    /// triangles along alternating diagonals. Interior vertices are displaced
    /// by up to `jitter` times the local cell size per coordinate using a
    /// generator seeded with `seed`; boundary vertices never move. Vertices
    /// of triangles left with less than a tenth of the nominal area have
    /// their displacement halved until every triangle passes.
    pub fn rectangle(
        lower: Point,
        upper: Point,
        nx: usize,
        ny: usize,
        jitter: f64,
        seed: u64,
    ) -> Result<Self, MeshError> {
        let degenerate = !(upper[0] > lower[0] && upper[1] > lower[1])
            || nx == 0
            || ny == 0
            || !(lower.iter().chain(upper.iter()).all(|v| v.is_finite()));
        if degenerate {
            return Err(MeshError::DegenerateRectangle {
                lower,
                upper,
                nx,
                ny,
            });
        }
        if !(0.0..0.5).contains(&jitter) {
            return Err(MeshError::InvalidJitter(jitter));
        }
        let hx = (upper[0] - lower[0]) / nx as f64;
        let hy = (upper[1] - lower[1]) / ny as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut grid = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut shift = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let mut p = [lower[0] + i as f64 * hx, lower[1] + j as f64 * hy];
                if i == nx {
                    p[0] = upper[0];
                }
                if j == ny {
                    p[1] = upper[1];
                }
                let interior = i > 0 && i < nx && j > 0 && j < ny;
                let mut s = [0.0, 0.0];
                if interior && jitter > 0.0 {
                    s = [
                        jitter * hx * rng.gen_range(-1.0..1.0),
                        jitter * hy * rng.gen_range(-1.0..1.0),
                    ];
                }
                grid.push(p);
                shift.push(s);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut tris = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if (i + j) % 2 == 0 {
                    tris.push([a, b, c]);
                    tris.push([a, c, d]);
                } else {
                    tris.push([a, b, d]);
                    tris.push([b, c, d]);
                }
            }
        }
        // Large displacements can flatten or fold a triangle; pull the
        // vertices of any triangle below a tenth of its nominal area back
        // toward the grid until none is left.
        let min_area = 0.05 * hx * hy;
        let vertices = loop {
            let vertices: Vec<Point> = grid
                .iter()
                .zip(&shift)
                .map(|(p, s)| [p[0] + s[0], p[1] + s[1]])
                .collect();
            let mut squeezed = false;
            for t in &tris {
                let [a, b, c] = t.map(|v| vertices[v]);
                if signed_area(a, b, c) < min_area {
                    for &v in t {
                        shift[v] = shift[v].map(|x| 0.5 * x);
                    }
                    squeezed = true;
                }
            }
            if !squeezed {
                break vertices;
            }
        };
        Self::new(vertices, tris)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MeshError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let perr = |line: usize, msg: &str| MeshError::Parse {
            line,
            msg: msg.to_string(),
        };
        let (hl, header) = lines.next().ok_or_else(|| perr(0, "empty file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 || fields[0] != "ntv" {
            return Err(perr(hl, "expected `ntv <nv> <nt>`"));
        }
        let nv: usize = fields[1].parse().map_err(|_| perr(hl, "bad vertex count"))?;
        let nt: usize = fields[2].parse().map_err(|_| perr(hl, "bad triangle count"))?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| perr(0, "missing vertex lines"))?;
            let xs: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| perr(ln, "bad coordinate"))?;
            if xs.len() != 2 {
                return Err(perr(ln, "vertex line needs 2 coordinates"));
            }
            vertices.push([xs[0], xs[1]]);
        }
        let mut tris = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, l) = lines.next().ok_or_else(|| perr(0, "missing triangle lines"))?;
            let ids: Vec<usize> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| perr(ln, "bad vertex index"))?;
            if ids.len() != 3 {
                return Err(perr(ln, "triangle line needs 3 indices"));
            }
            tris.push([ids[0], ids[1], ids[2]]);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(perr(ln, "trailing data after triangle list"));
        }
        Self::new(vertices, tris)
    }

    /// Serializes in the ASCII format; coordinates use shortest round-trip
    /// formatting so `parse(to_ascii())` reproduces them bit for bit.
    pub fn to_ascii(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ntv {} {}", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
        }
        for t in &self.triangles {
            let [a, b, c] = t.vertices;
            let _ = writeln!(s, "{a} {b} {c}");
        }
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MeshError> {
        std::fs::write(path, self.to_ascii())?;
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn num_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn interior_edge_count(&self) -> usize {
        self.edges.len() - self.boundary_edges.len()
    }

    /// Edge ids of element `t`, in the order of its local edges
    /// `(v0, v1), (v1, v2), (v2, v0)`.
    pub fn element_edges(&self, t: usize) -> [usize; 3] {
        self.elem_edges[t]
    }

    pub fn element_vertices(&self, t: usize) -> [Point; 3] {
        self.triangles[t].vertices.map(|i| self.vertices[i])
    }

    pub fn element_diameter(&self, t: usize) -> f64 {
        self.triangles[t].diameter
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.element_vertices(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn edge_points(&self, e: usize) -> [Point; 2] {
        self.edges[e].endpoints.map(|i| self.vertices[i])
    }

    /// Neighbors of each element across interior edges.
    pub fn element_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.triangles.len()];
        for e in &self.edges {
            if let Some(r) = e.right {
                nb[e.left].push(r);
                nb[r].push(e.left);
            }
        }
        nb
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Barycentric coordinates of `x` in element `t`.
    pub fn barycentric(&self, t: usize, x: Point) -> [f64; 3] {
        let [a, b, c] = self.element_vertices(t);
        let area = self.triangles[t].area;
        let l1 = signed_area(x, b, c) / area;
        let l2 = signed_area(a, x, c) / area;
        [l1, l2, 1.0 - l1 - l2]
    }

    /// Lowest-numbered element containing `x` (barycentric tolerance 1e-12).
    pub fn locate(&self, x: Point) -> Option<usize> {
        (0..self.triangles.len()).find(|&t| self.barycentric(t, x).iter().all(|&l| l >= -1e-12))
    }

    /// Mesh scaled by `s` about the origin.
    pub fn scaled(&self, s: f64) -> Result<Self, MeshError> {
        let verts = self.vertices.iter().map(|v| [v[0] * s, v[1] * s]).collect();
        Self::new(verts, self.triangles.iter().map(|t| t.vertices).collect())
    }
}
