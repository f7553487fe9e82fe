//! Structured triangulations of convex boundary-labelled domains.
//!
//! Quadrilaterals are meshed as a single transfinite-interpolation block.
//! Other polygons are split into one block per vertex, spanned by the vertex,
//! the two adjacent arc midpoints and the vertex centroid.

use crate::domain::{point_in_polygon, DomainSpec};
use crate::error::{invalid, Result};
use crate::hyperbolic::{HPoint, Model};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    /// Nodes in the counterclockwise boundary direction.
    pub a: usize,
    pub b: usize,
    pub arc: usize,
    pub triangle: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    model: Model,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    node_arc: Vec<Option<usize>>,
    corner: Vec<Option<usize>>,
    arc_nodes: Vec<Vec<usize>>,
    boundary_edges: Vec<BoundaryEdge>,
    locator: Locator,
}

struct Registry {
    nodes: Vec<[f64; 2]>,
    map: HashMap<(i64, i64), Vec<usize>>,
    scale: f64,
}

impl Registry {
    fn new(scale: f64) -> Self {
        Registry {
            nodes: Vec::new(),
            map: HashMap::new(),
            scale,
        }
    }

    fn key(&self, p: [f64; 2]) -> (i64, i64) {
        ((p[0] / self.scale).floor() as i64, (p[1] / self.scale).floor() as i64)
    }

    fn insert(&mut self, p: [f64; 2]) -> usize {
        let (kx, ky) = self.key(p);
        let tol = 1e-10;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.map.get(&(kx + dx, ky + dy)) {
                    for &i in ids {
                        let q = self.nodes[i];
                        if (q[0] - p[0]).hypot(q[1] - p[1]) < tol {
                            return i;
                        }
                    }
                }
            }
        }
        let id = self.nodes.len();
        self.nodes.push(p);
        self.map.entry((kx, ky)).or_default().push(id);
        id
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Side curve of a block, parametrized on [0, 1].
type Side<'a> = Box<dyn Fn(f64) -> [f64; 2] + 'a>;

/// Fills an (ns+1)×(nt+1) grid. Sides: bottom c0→c1, right c1→c2,
/// top c3→c2, left c0→c3.
fn tfi_block(
    reg: &mut Registry,
    bottom: &Side,
    right: &Side,
    top: &Side,
    left: &Side,
    ns: usize,
    nt: usize,
    tris: &mut Vec<[usize; 3]>,
) {
    let c0 = bottom(0.0);
    let c1 = bottom(1.0);
    let c2 = top(1.0);
    let c3 = top(0.0);
    let mut grid = vec![vec![0usize; nt + 1]; ns + 1];
    for i in 0..=ns {
        let s = i as f64 / ns as f64;
        for j in 0..=nt {
            let t = j as f64 / nt as f64;
            let p = if j == 0 {
                bottom(s)
            } else if j == nt {
                top(s)
            } else if i == 0 {
                left(t)
            } else if i == ns {
                right(t)
            } else {
                let b = bottom(s);
                let tp = top(s);
                let l = left(t);
                let r = right(t);
                let mut q = [0.0; 2];
                for k in 0..2 {
                    q[k] = (1.0 - t) * b[k] + t * tp[k] + (1.0 - s) * l[k] + s * r[k]
                        - ((1.0 - s) * (1.0 - t) * c0[k]
                            + s * (1.0 - t) * c1[k]
                            + s * t * c2[k]
                            + (1.0 - s) * t * c3[k]);
                }
                q
            };
            grid[i][j] = reg.insert(p);
        }
    }
    for i in 0..ns {
        for j in 0..nt {
            let p00 = grid[i][j];
            let p10 = grid[i + 1][j];
            let p11 = grid[i + 1][j + 1];
            let p01 = grid[i][j + 1];
            let d = |a: usize, b: usize| {
                let (pa, pb) = (reg.nodes[a], reg.nodes[b]);
                (pa[0] - pb[0]).hypot(pa[1] - pb[1])
            };
            if d(p00, p11) <= d(p10, p01) {
                tris.push([p00, p10, p11]);
                tris.push([p00, p11, p01]);
            } else {
                tris.push([p00, p10, p01]);
                tris.push([p10, p11, p01]);
            }
        }
    }
}

fn signed_area(n: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let [a, b, c] = [n[t[0]], n[t[1]], n[t[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn build(domain: &DomainSpec, n_div: usize, m_div: usize) -> Result<Mesh> {
    let arcs = domain.arcs();
    let nv = arcs.len();
    let mut reg = Registry::new(1e-6);
    let mut tris = Vec::new();
    // Boundary nodes first, so every block reuses them.
    let mut arc_nodes = Vec::with_capacity(nv);
    for (k, a) in arcs.iter().enumerate() {
        let per_arc = match (nv, k % 2) {
            (4, 0) => n_div,
            (4, _) => m_div,
            _ => 2 * n_div,
        };
        let ids: Vec<usize> = (0..=per_arc)
            .map(|k| reg.insert(a.curve.chart_point(k as f64 / per_arc as f64)))
            .collect();
        arc_nodes.push(ids);
    }
    let corners: Vec<[f64; 2]> = domain.vertices().iter().map(|v| v.xy()).collect();
    if nv == 4 {
        let [a0, a1, a2, a3] = [&arcs[0].curve, &arcs[1].curve, &arcs[2].curve, &arcs[3].curve];
        let bottom: Side = Box::new(move |s| a0.chart_point(s));
        let right: Side = Box::new(move |t| a1.chart_point(t));
        let top: Side = Box::new(move |s| a2.chart_point(1.0 - s));
        let left: Side = Box::new(move |t| a3.chart_point(1.0 - t));
        tfi_block(&mut reg, &bottom, &right, &top, &left, n_div, m_div, &mut tris);
    } else {
        let mut g = [0.0, 0.0];
        for c in &corners {
            g[0] += c[0] / nv as f64;
            g[1] += c[1] / nv as f64;
        }
        let poly = domain.boundary_polyline(32);
        if !point_in_polygon(&poly, g) {
            return invalid("vertex centroid lies outside the domain");
        }
        for i in 0..nv {
            let prev = &arcs[(i + nv - 1) % nv].curve;
            let cur = &arcs[i].curve;
            let mi = cur.chart_point(0.5);
            let mp = prev.chart_point(0.5);
            let bottom: Side = Box::new(move |s| cur.chart_point(0.5 * s));
            let right: Side = Box::new(move |t| lerp(mi, g, t));
            let top: Side = Box::new(move |s| lerp(mp, g, s));
            let left: Side = Box::new(move |t| prev.chart_point(1.0 - 0.5 * t));
            tfi_block(&mut reg, &bottom, &right, &top, &left, n_div, n_div, &mut tris);
        }
    }
    let nodes = reg.nodes;
    for t in tris.iter_mut() {
        let a = signed_area(&nodes, t);
        if a < 0.0 {
            t.swap(1, 2);
        }
        if a.abs() < 1e-16 {
            return invalid("degenerate triangle produced; domain is too thin");
        }
    }
    let mut node_arc = vec![None; nodes.len()];
    let mut corner = vec![None; nodes.len()];
    for (i, ids) in arc_nodes.iter().enumerate() {
        for &k in ids {
            if node_arc[k].is_none() {
                node_arc[k] = Some(i);
            }
        }
        corner[ids[0]] = Some(i);
        node_arc[ids[0]] = Some(i);
    }
    let mut edge_tri: HashMap<(usize, usize), usize> = HashMap::new();
    for (ti, t) in tris.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            edge_tri.insert((a.min(b), a.max(b)), ti);
        }
    }
    let mut boundary_edges = Vec::new();
    for (i, ids) in arc_nodes.iter().enumerate() {
        for w in ids.windows(2) {
            let key = (w[0].min(w[1]), w[0].max(w[1]));
            let triangle = *edge_tri
                .get(&key)
                .ok_or_else(|| crate::Error::Invalid("boundary edge without triangle".into()))?;
            boundary_edges.push(BoundaryEdge {
                a: w[0],
                b: w[1],
                arc: i,
                triangle,
            });
        }
    }
    let locator = Locator::new(&nodes, &tris);
    Ok(Mesh {
        model: domain.model(),
        nodes,
        triangles: tris,
        node_arc,
        corner,
        arc_nodes,
        boundary_edges,
        locator,
    })
}

/// Conforming triangulation whose Euclidean edges are all at most `h`.
pub fn generate_mesh(domain: &DomainSpec, h: f64) -> Result<Mesh> {
    if !(h > 0.0) || !h.is_finite() {
        return invalid("mesh size must be positive");
    }
    let len: Vec<f64> = domain.arcs().iter().map(|a| a.curve.chart_length()).collect();
    // Even counts keep the diagonal pattern symmetric across refinements.
    let even = |k: usize| k + k % 2;
    let (l0, l1, per) = if len.len() == 4 {
        (len[0].max(len[2]), len[1].max(len[3]), 1.0)
    } else {
        let l = len.iter().cloned().fold(0.0, f64::max);
        (l, l, 0.5)
    };
    // A single scale grows both counts together, so halving h doubles them.
    let mut scale = 1.0;
    for _ in 0..200 {
        let divs = |l: f64| even(((scale * per * l / h).ceil() as usize).max(2));
        let (n, m) = (divs(l0), divs(l1));
        if n.max(m) > 4000 {
            return invalid("mesh would exceed 4000 divisions per side");
        }
        let mesh = build(domain, n, m)?;
        if mesh.max_edge() <= h {
            return Ok(mesh);
        }
        scale *= 1.04;
    }
    invalid("mesh refinement did not reach the requested size")
}

impl Mesh {
    pub fn model(&self) -> Model {
        self.model
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn point(&self, i: usize) -> HPoint {
        let [x, y] = self.nodes[i];
        HPoint::unchecked(self.model, x, y)
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Arc tag of a boundary node; corners carry the arc that starts there.
    pub fn boundary_arc(&self, i: usize) -> Option<usize> {
        self.node_arc[i]
    }

    /// Domain vertex index when node `i` is a corner.
    pub fn corner(&self, i: usize) -> Option<usize> {
        self.corner[i]
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.node_arc[i].is_some()
    }

    /// Nodes of arc `k`, from its start vertex to its end vertex.
    pub fn arc_nodes(&self, k: usize) -> &[usize] {
        &self.arc_nodes[k]
    }

    pub fn arc_count(&self) -> usize {
        self.arc_nodes.len()
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| !self.is_boundary(i)).collect()
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.nodes, &self.triangles[t])
    }

    /// Gradients of the three barycentric basis functions on triangle `t`.
    pub fn basis_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [i, j, k] = self.triangles[t];
        let (a, b, c) = (self.nodes[i], self.nodes[j], self.nodes[k]);
        let two_a = 2.0 * self.area(t);
        [
            [(b[1] - c[1]) / two_a, (c[0] - b[0]) / two_a],
            [(c[1] - a[1]) / two_a, (a[0] - c[0]) / two_a],
            [(a[1] - b[1]) / two_a, (b[0] - a[0]) / two_a],
        ]
    }

    pub fn max_edge(&self) -> f64 {
        let mut m: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (self.nodes[t[k]], self.nodes[t[(k + 1) % 3]]);
                m = m.max((a[0] - b[0]).hypot(a[1] - b[1]));
            }
        }
        m
    }

    /// Smallest triangle angle, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut m = 180.0f64;
        for t in &self.triangles {
            for k in 0..3 {
                let p = self.nodes[t[k]];
                let a = self.nodes[t[(k + 1) % 3]];
                let b = self.nodes[t[(k + 2) % 3]];
                let u = [a[0] - p[0], a[1] - p[1]];
                let v = [b[0] - p[0], b[1] - p[1]];
                let ang = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]);
                m = m.min(ang.to_degrees());
            }
        }
        m
    }

    /// Node adjacency lists (sorted, without self).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for t in &self.triangles {
            for a in 0..3 {
                for b in 0..3 {
                    if a != b {
                        adj[t[a]].push(t[b]);
                    }
                }
            }
        }
        for l in adj.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    /// Triangle containing chart point `p` and its barycentric coordinates.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        self.locator.locate(&self.nodes, &self.triangles, p)
    }

    /// Total Euclidean area of the triangulation.
    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }
}

#[derive(Debug, Clone)]
struct Locator {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl Locator {
    fn new(nodes: &[[f64; 2]], tris: &[[usize; 3]]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let target = ((tris.len() as f64).sqrt()).max(1.0);
        let cell = span / target;
        let nx = (((hi[0] - lo[0]) / cell).floor() as usize) + 1;
        let ny = (((hi[1] - lo[1]) / cell).floor() as usize) + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for (ti, t) in tris.iter().enumerate() {
            let mut tlo = [f64::INFINITY; 2];
            let mut thi = [f64::NEG_INFINITY; 2];
            for &v in t {
                for k in 0..2 {
                    tlo[k] = tlo[k].min(nodes[v][k]);
                    thi[k] = thi[k].max(nodes[v][k]);
                }
            }
            let i0 = ((tlo[0] - lo[0]) / cell).floor() as usize;
            let i1 = (((thi[0] - lo[0]) / cell).floor() as usize).min(nx - 1);
            let j0 = ((tlo[1] - lo[1]) / cell).floor() as usize;
            let j1 = (((thi[1] - lo[1]) / cell).floor() as usize).min(ny - 1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * nx + i].push(ti);
                }
            }
        }
        Locator {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    fn locate(&self, nodes: &[[f64; 2]], tris: &[[usize; 3]], p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let fi = (p[0] - self.origin[0]) / self.cell;
        let fj = (p[1] - self.origin[1]) / self.cell;
        if fi < -1e-9 || fj < -1e-9 {
            return None;
        }
        let i = (fi.max(0.0).floor() as usize).min(self.nx - 1);
        let j = (fj.max(0.0).floor() as usize).min(self.ny - 1);
        if fi > self.nx as f64 + 1e-9 || fj > self.ny as f64 + 1e-9 {
            return None;
        }
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[j * self.nx + i] {
            let [a, b, c] = [nodes[tris[t][0]], nodes[tris[t][1]], nodes[tris[t][2]]];
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
            let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
            let bary = [1.0 - l1 - l2, l1, l2];
            let worst = bary.iter().cloned().fold(f64::INFINITY, f64::min);
            if best.map_or(true, |b| worst > b.2) {
                best = Some((t, bary, worst));
            }
        }
        match best {
            Some((t, bary, worst)) if worst >= -1e-9 => Some((t, bary)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ArcLabel, BoundaryData};

    fn square() -> DomainSpec {
        let v = vec![
            HPoint::half_plane(-1.0, 1.0).unwrap(),
            HPoint::half_plane(1.0, 1.0).unwrap(),
            HPoint::half_plane(1.0, 2.5).unwrap(),
            HPoint::half_plane(-1.0, 2.5).unwrap(),
        ];
        let l = (0..4)
            .map(|_| ArcLabel::Finite(BoundaryData::Constant(0.0)))
            .collect();
        DomainSpec::polygon(v, l).unwrap()
    }

    fn pentagon() -> DomainSpec {
        let v: Vec<HPoint> = (0..5)
            .map(|k| {
                let a = std::f64::consts::PI * (0.5 + 0.4 * k as f64);
                HPoint::disc(1.6 * a.cos(), 1.6 * a.sin()).unwrap()
            })
            .collect();
        let l = (0..5)
            .map(|_| ArcLabel::Finite(BoundaryData::Constant(0.0)))
            .collect();
        DomainSpec::polygon(v, l).unwrap()
    }

    #[test]
    fn square_mesh_quality() {
        let m = generate_mesh(&square(), 0.1).unwrap();
        assert!(m.max_edge() <= 0.1);
        assert!(m.min_angle_deg() >= 20.0, "{}", m.min_angle_deg());
        for t in 0..m.triangles().len() {
            assert!(m.area(t) > 0.0);
        }
        let m2 = generate_mesh(&square(), 0.05).unwrap();
        assert!(m2.node_count() >= 3 * m.node_count());
    }

    #[test]
    fn boundary_tags_follow_arc_order() {
        let d = pentagon();
        let m = generate_mesh(&d, 0.15).unwrap();
        assert!(m.min_angle_deg() >= 20.0, "{}", m.min_angle_deg());
        let mut last = 0;
        for e in m.boundary_edges() {
            assert!(e.arc >= last);
            last = e.arc;
        }
        for k in 0..5 {
            let ids = m.arc_nodes(k);
            assert_eq!(m.corner(ids[0]), Some(k));
            assert_eq!(ids[ids.len() - 1], m.arc_nodes((k + 1) % 5)[0]);
            let curve = &d.arcs()[k].curve;
            if let crate::hyperbolic::ArcShape::Circle { cx, cy, radius } = match curve {
                crate::domain::ArcCurve::Geodesic(g) => g.shape(),
                _ => unreachable!(),
            } {
                for &i in ids {
                    let p = m.nodes()[i];
                    assert!(((p[0] - cx).hypot(p[1] - cy) - radius).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn locate_finds_nodes_and_rejects_outside() {
        let m = generate_mesh(&square(), 0.2).unwrap();
        let p = m.nodes()[m.interior_nodes()[3]];
        let (t, b) = m.locate(p).unwrap();
        assert!(m.triangles()[t].iter().any(|&v| m.nodes()[v] == p));
        assert!(b.iter().all(|&x| x >= -1e-9));
        assert!(m.locate([5.0, 5.0]).is_none());
    }
}
