//! Conforming P1 triangulations of the disk cross-section (and simple
//! rectangles for tests), with boundary-node identification and
//! per-element geometry.
//!
//! The disk mesher is a deterministic concentric-ring scheme: rings of
//! nodes at radii `i*r/R`, triangulated ring by ring, so that identical
//! parameters always produce the identical mesh.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Tolerance used when snapping boundary nodes onto the target curve.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Immutable P1 triangulation.
///
/// All elements are stored with positive signed area (counter-clockwise
/// vertex order).
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<[usize; 3]>,
    pub boundary_nodes: BTreeSet<usize>,
    pub h_max: f64,
}

/// Constant geometry of a single P1 element.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub area: f64,
    /// Gradients of the three barycentric shape functions.
    pub grad_shape: [[f64; 2]; 3],
    pub centroid: [f64; 2],
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    /// Build a mesh from raw node and element lists.
    ///
    /// Elements with negative orientation are flipped; degenerate elements
    /// are rejected. Boundary nodes are identified as nodes incident to an
    /// edge with exactly one adjacent element.
    pub fn from_parts(nodes: Vec<[f64; 2]>, mut elements: Vec<[usize; 3]>) -> Result<Mesh> {
        let n = nodes.len();
        for tri in elements.iter_mut() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::Usage(format!(
                    "element references node index out of range (n = {n})"
                )));
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if area == 0.0 {
                return Err(Error::Domain("degenerate element (zero area)".into()));
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
        }
        let boundary_nodes = detect_boundary_nodes(&elements);
        let h_max = elements
            .iter()
            .map(|tri| {
                let p = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
                (0..3)
                    .map(|i| {
                        let (a, b) = (p[i], p[(i + 1) % 3]);
                        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        Ok(Mesh {
            nodes,
            elements,
            boundary_nodes,
            h_max,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary_nodes.contains(&node)
    }

    /// Area, shape-function gradients and centroid of element `elem`.
    pub fn element_geometry(&self, elem: usize) -> Result<ElementGeometry> {
        let tri = *self
            .elements
            .get(elem)
            .ok_or_else(|| Error::Usage(format!("element index {elem} out of range")))?;
        let p = [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]];
        let area = signed_area(p[0], p[1], p[2]);
        let inv2a = 1.0 / (2.0 * area);
        // grad(lambda_i) = rot90(p_{i+2} - p_{i+1}) / (2A)
        let mut grad_shape = [[0.0; 2]; 3];
        for i in 0..3 {
            let a = p[(i + 1) % 3];
            let b = p[(i + 2) % 3];
            grad_shape[i] = [(a[1] - b[1]) * inv2a, (b[0] - a[0]) * inv2a];
        }
        let centroid = [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ];
        Ok(ElementGeometry {
            area,
            grad_shape,
            centroid,
        })
    }

    /// Sum of all element areas.
    pub fn total_area(&self) -> f64 {
        self.elements
            .iter()
            .map(|tri| signed_area(self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]))
            .sum()
    }

    /// Coordinates of the three vertices of element `elem`.
    pub fn element_coords(&self, elem: usize) -> [[f64; 2]; 3] {
        let tri = self.elements[elem];
        [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]]
    }

    /// Plain-text dump: header `nodes N elements M`, node lines, element
    /// lines (0-based), then one line with the boundary node indices.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "nodes {} elements {}",
            self.nodes.len(),
            self.elements.len()
        )
        .unwrap();
        for p in &self.nodes {
            writeln!(out, "{:.17e} {:.17e}", p[0], p[1]).unwrap();
        }
        for t in &self.elements {
            writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        let bnd: Vec<String> = self.boundary_nodes.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{}", bnd.join(" ")).unwrap();
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.dump())?;
        Ok(())
    }

    /// Parse a mesh written by [`Mesh::dump`].
    pub fn parse(text: &str) -> Result<Mesh> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty mesh file".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "nodes" || parts[2] != "elements" {
            return Err(Error::Config(format!("bad mesh header: {header:?}")));
        }
        let n: usize = parts[1]
            .parse()
            .map_err(|_| Error::Config("bad node count".into()))?;
        let m: usize = parts[3]
            .parse()
            .map_err(|_| Error::Config("bad element count".into()))?;
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Config(format!("missing node line {i}")))?;
            let mut it = line.split_whitespace();
            let x: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("bad node line {i}")))?;
            let y: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("bad node line {i}")))?;
            nodes.push([x, y]);
        }
        let mut elements = Vec::with_capacity(m);
        for i in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| Error::Config(format!("missing element line {i}")))?;
            let idx: Vec<usize> = line
                .split_whitespace()
                .map(|s| s.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Config(format!("bad element line {i}")))?;
            if idx.len() != 3 {
                return Err(Error::Config(format!("bad element line {i}")));
            }
            elements.push([idx[0], idx[1], idx[2]]);
        }
        Mesh::from_parts(nodes, elements)
    }

    pub fn load(path: &Path) -> Result<Mesh> {
        Mesh::parse(&std::fs::read_to_string(path)?)
    }
}

/// Nodes incident to an edge with exactly one adjacent element.
fn detect_boundary_nodes(elements: &[[usize; 3]]) -> BTreeSet<usize> {
    use std::collections::HashMap;
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in elements {
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            let key = (a.min(b), a.max(b));
            *edge_count.entry(key).or_insert(0) += 1;
        }
    }
    let mut bnd = BTreeSet::new();
    for (&(a, b), &count) in &edge_count {
        if count == 1 {
            bnd.insert(a);
            bnd.insert(b);
        }
    }
    bnd
}

/// Generate a disk mesh by concentric-ring triangulation.
///
/// Ring `i` of `rings` carries `6*i` nodes at radius `i*radius/rings`;
/// the resulting element count is `6*rings^2`, within 20% of
/// `target_elements`.
pub fn generate_disk_mesh(radius: f64, target_elements: usize) -> Result<Mesh> {
    if !(radius > 0.0) {
        return Err(Error::Config(format!("radius must be positive, got {radius}")));
    }
    if target_elements < 16 {
        return Err(Error::Config(format!(
            "target_elements must be at least 16, got {target_elements}"
        )));
    }
    let rings = ((target_elements as f64 / 6.0).sqrt().round() as usize).max(2);

    let mut nodes: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize; rings + 1]; // index of first node of each ring
    for i in 1..=rings {
        ring_start[i] = nodes.len();
        let r_i = radius * i as f64 / rings as f64;
        let count = 6 * i;
        for k in 0..count {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            nodes.push([r_i * theta.cos(), r_i * theta.sin()]);
        }
    }

    let mut elements: Vec<[usize; 3]> = Vec::with_capacity(6 * rings * rings);
    // innermost fan
    for k in 0..6 {
        elements.push([0, ring_start[1] + k, ring_start[1] + (k + 1) % 6]);
    }
    // annuli: merge inner ring (n nodes) and outer ring (m nodes) by angle
    for i in 2..=rings {
        let n = 6 * (i - 1);
        let m = 6 * i;
        let inner = ring_start[i - 1];
        let outer = ring_start[i];
        let (mut a, mut b) = (0usize, 0usize); // steps taken along inner/outer
        while a < n || b < m {
            let next_inner = (a + 1) as f64 / n as f64;
            let next_outer = (b + 1) as f64 / m as f64;
            if b < m && (a == n || next_outer <= next_inner) {
                elements.push([outer + b % m, outer + (b + 1) % m, inner + a % n]);
                b += 1;
            } else {
                elements.push([inner + a % n, outer + b % m, inner + (a + 1) % n]);
                a += 1;
            }
        }
    }

    Mesh::from_parts(nodes, elements)
}

/// Structured triangulation of the rectangle `[x0,x1] x [y0,y1]` with
/// `nx * ny` cells, each split into two triangles. Test-domain helper.
pub fn generate_rect_mesh(x0: f64, y0: f64, x1: f64, y1: f64, nx: usize, ny: usize) -> Result<Mesh> {
    if !(x1 > x0 && y1 > y0) || nx == 0 || ny == 0 {
        return Err(Error::Config("invalid rectangle parameters".into()));
    }
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([
                x0 + (x1 - x0) * i as f64 / nx as f64,
                y0 + (y1 - y0) * j as f64 / ny as f64,
            ]);
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elements.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            elements.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Mesh::from_parts(nodes, elements)
}

/// Quadrature rule on the reference triangle in barycentric coordinates.
/// Weights sum to one; multiply by the element area when integrating.
pub fn quadrature_points(order: usize) -> Result<Vec<([f64; 3], f64)>> {
    match order {
        1 => Ok(vec![([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1.0)]),
        2 => Ok(vec![
            ([0.5, 0.5, 0.0], 1.0 / 3.0),
            ([0.0, 0.5, 0.5], 1.0 / 3.0),
            ([0.5, 0.0, 0.5], 1.0 / 3.0),
        ]),
        4 => {
            // six-point rule, exact to degree 4
            let a = 0.445_948_490_915_965;
            let wa = 0.223_381_589_678_011;
            let b = 0.091_576_213_509_771;
            let wb = 0.109_951_743_655_322;
            let mut pts = Vec::with_capacity(6);
            for (c, w) in [(a, wa), (b, wb)] {
                pts.push(([1.0 - 2.0 * c, c, c], w));
                pts.push(([c, 1.0 - 2.0 * c, c], w));
                pts.push(([c, c, 1.0 - 2.0 * c], w));
            }
            Ok(pts)
        }
        _ => Err(Error::Usage(format!("unsupported quadrature order {order}"))),
    }
}
