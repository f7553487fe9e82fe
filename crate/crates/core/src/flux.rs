//! The conjugate differential dψ = (−λβ/W) dx + (λα/W) dy and its line
//! integrals over polylines and domain boundaries.

use crate::domain::{ArcLabel, DomainSpec};
use crate::error::{invalid, Error, Result};
use crate::geometry::{flux_vector, gauge_from_gradient, GraphJet2, TiltedGauge};
use crate::hyperbolic::{ConformalFactor, HPoint, Model};
use crate::invariant::Family;
use crate::jenkins_serrin::{check_admissibility, Verdict};
use crate::mesh::generate_mesh;
use crate::quadrature::{GL5_NODES, GL5_WEIGHTS};
use crate::solver::{solve_monotone, MonotoneReport, SolutionField, SolverConfig};
use std::sync::Arc;

/// Longest hyperbolic length integrated by a single Gauss panel.
pub const MAX_PANEL_LENGTH: f64 = 0.05;

/// (P, Q) from a gauge and the conformal factor at the same point.
pub fn conjugate_coeffs_from_gauge(lambda: f64, g: &TiltedGauge) -> (f64, f64) {
    (-lambda * g.beta / g.w, lambda * g.alpha / g.w)
}

/// (P, Q) of dψ for a graph jet.
pub fn conjugate_coeffs(jet: &GraphJet2) -> (f64, f64) {
    let f = flux_vector(jet);
    (-f[1], f[0])
}

/// Anything that can supply dψ at chart points.
pub trait FluxSource: Sync {
    fn model(&self) -> Model;
    fn coeffs(&self, p: &HPoint) -> Result<(f64, f64)>;
    /// Parameters in (0, 1) where the segment a→b crosses a discontinuity.
    fn breakpoints(&self, _a: [f64; 2], _b: [f64; 2]) -> Vec<f64> {
        Vec::new()
    }
}

impl FluxSource for Family {
    fn model(&self) -> Model {
        Family::model(self)
    }

    fn coeffs(&self, p: &HPoint) -> Result<(f64, f64)> {
        Ok(conjugate_coeffs(&self.jet(p)?))
    }
}

impl FluxSource for SolutionField {
    fn model(&self) -> Model {
        self.mesh().model()
    }

    /// Uses the gradient of the containing triangle and λ at `p` itself.
    fn coeffs(&self, p: &HPoint) -> Result<(f64, f64)> {
        let q = p.to_model(self.mesh().model());
        let (t, _) = self
            .mesh()
            .locate(q.xy())
            .ok_or_else(|| Error::Invalid(format!("point ({}, {}) is outside the mesh", q.x(), q.y())))?;
        let g = self.gradient(t);
        let f = ConformalFactor::eval(q.model(), q.x(), q.y());
        Ok(conjugate_coeffs_from_gauge(f.lambda, &gauge_from_gradient(&f, g[0], g[1])))
    }

    fn breakpoints(&self, a: [f64; 2], b: [f64; 2]) -> Vec<f64> {
        let mesh = self.mesh();
        let d = [b[0] - a[0], b[1] - a[1]];
        let len = d[0].hypot(d[1]);
        let step = (0.25 * mesh.max_edge()).max(1e-12);
        let samples = ((len / step).ceil() as usize).max(1);
        let mut tris = Vec::new();
        for k in 0..=samples {
            let s = k as f64 / samples as f64;
            if let Some((t, _)) = mesh.locate([a[0] + s * d[0], a[1] + s * d[1]]) {
                tris.push(t);
            }
        }
        tris.sort_unstable();
        tris.dedup();
        let mut cuts = Vec::new();
        for t in tris {
            let tri = mesh.triangles()[t];
            for k in 0..3 {
                let p = mesh.nodes()[tri[k]];
                let q = mesh.nodes()[tri[(k + 1) % 3]];
                let e = [q[0] - p[0], q[1] - p[1]];
                let den = d[0] * e[1] - d[1] * e[0];
                if den.abs() < 1e-300 {
                    continue;
                }
                let w = [p[0] - a[0], p[1] - a[1]];
                let s = (w[0] * e[1] - w[1] * e[0]) / den;
                let r = (w[0] * d[1] - w[1] * d[0]) / den;
                if s > 1e-12 && s < 1.0 - 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&r) {
                    cuts.push(s);
                }
            }
        }
        cuts.sort_by(|x, y| x.total_cmp(y));
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        cuts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxPath {
    points: Vec<HPoint>,
    closed: bool,
}

impl FluxPath {
    pub fn new(points: Vec<HPoint>, closed: bool) -> Result<Self> {
        if points.len() < 2 {
            return invalid("a flux path needs at least two points");
        }
        let model = points[0].model();
        if points.iter().any(|p| p.model() != model) {
            return Err(Error::MixedModels);
        }
        let n = points.len();
        let segs = if closed { n } else { n - 1 };
        for k in 0..segs {
            let (a, b) = (points[k].xy(), points[(k + 1) % n].xy());
            if (a[0] - b[0]).hypot(a[1] - b[1]) < 1e-14 {
                return Err(Error::Coincident);
            }
        }
        Ok(FluxPath { points, closed })
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn reversed(&self) -> FluxPath {
        let mut points = self.points.clone();
        points.reverse();
        FluxPath {
            points,
            closed: self.closed,
        }
    }

    fn segments(&self) -> Vec<([f64; 2], [f64; 2])> {
        let n = self.points.len();
        let segs = if self.closed { n } else { n - 1 };
        (0..segs)
            .map(|k| (self.points[k].xy(), self.points[(k + 1) % n].xy()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxReport {
    /// ∫ dψ.
    pub value: f64,
    /// Hyperbolic length of the path.
    pub length: f64,
    /// |value| / length.
    pub ratio: f64,
}

impl FluxReport {
    fn new(value: f64, length: f64) -> Self {
        FluxReport {
            value,
            length,
            ratio: if length > 0.0 { value.abs() / length } else { 0.0 },
        }
    }
}

fn segment_integral<S: FluxSource + ?Sized>(src: &S, a: [f64; 2], b: [f64; 2]) -> Result<(f64, f64)> {
    let model = src.model();
    let mut cuts = vec![0.0];
    cuts.extend(src.breakpoints(a, b));
    cuts.push(1.0);
    let d = [b[0] - a[0], b[1] - a[1]];
    let (mut value, mut length) = (0.0, 0.0);
    for w in cuts.windows(2) {
        let pa = [a[0] + w[0] * d[0], a[1] + w[0] * d[1]];
        let pb = [a[0] + w[1] * d[0], a[1] + w[1] * d[1]];
        let hl = crate::domain::chart_segment_length(model, pa, pb);
        let panels = ((hl / MAX_PANEL_LENGTH).ceil() as usize).max(1);
        let span = w[1] - w[0];
        for k in 0..panels {
            let t0 = w[0] + span * k as f64 / panels as f64;
            let half = 0.5 * span / panels as f64;
            for j in 0..5 {
                let t = t0 + half * (1.0 + GL5_NODES[j]);
                let p = HPoint::new(model, a[0] + t * d[0], a[1] + t * d[1])?;
                let (pc, qc) = src.coeffs(&p)?;
                let lam = ConformalFactor::eval(model, p.x(), p.y()).lambda;
                let wt = GL5_WEIGHTS[j] * half;
                value += wt * (pc * d[0] + qc * d[1]);
                length += wt * lam * d[0].hypot(d[1]);
            }
        }
    }
    Ok((value, length))
}

fn lex_less(a: &[HPoint], b: &[HPoint]) -> bool {
    for (p, q) in a.iter().zip(b) {
        match p.x().total_cmp(&q.x()).then(p.y().total_cmp(&q.y())) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            _ => {}
        }
    }
    false
}

/// ∫ dψ along the chart polyline; each segment is split at triangle
/// crossings and into panels of hyperbolic length at most 0.05, each
/// integrated by five-point Gauss.
pub fn flux_integral<S: FluxSource + ?Sized>(src: &S, path: &FluxPath) -> Result<FluxReport> {
    if path.points[0].model() != src.model() {
        return Err(Error::MixedModels);
    }
    // Work in a canonical direction so that reversal negates bit for bit.
    let rev = path.reversed();
    let (canon, sign) = if lex_less(&rev.points, &path.points) {
        (&rev, -1.0)
    } else {
        (path, 1.0)
    };
    let (mut value, mut length) = (0.0, 0.0);
    for (a, b) in canon.segments() {
        let (v, l) = segment_integral(src, a, b)?;
        value += v;
        length += l;
    }
    Ok(FluxReport::new(sign * value, length))
}

/// Flux through every boundary arc of a solved domain.
///
/// Values use the clockwise traversal of ∂Ω, the orientation under which a
/// +∞ arc Γ has flux tending to +|Γ|. They come from the consistent nodal
/// boundary flux of the discrete weak form, so they sum to zero up to the
/// solver tolerance.
pub fn boundary_flux_per_arc(field: &SolutionField, domain: &DomainSpec) -> Result<Vec<FluxReport>> {
    sum_per_arc(field, domain, &boundary_edge_flux(field))
}

/// Trace integral of dψ along each arc, using the gradient of the triangle
/// on the inside of every boundary edge. Same orientation as
/// [`boundary_flux_per_arc`]; obeys |value| ≤ length exactly but the arcs
/// only balance up to discretization error.
pub fn boundary_trace_flux_per_arc(field: &SolutionField, domain: &DomainSpec) -> Result<Vec<FluxReport>> {
    let direct: Vec<f64> = edge_flux_parts(field).iter().map(|d| -(d[0] + d[1])).collect();
    sum_per_arc(field, domain, &direct)
}

fn sum_per_arc(field: &SolutionField, domain: &DomainSpec, edge: &[f64]) -> Result<Vec<FluxReport>> {
    if field.mesh().arc_count() != domain.arcs().len() {
        return invalid("field and domain have different arc counts");
    }
    let mut out = vec![0.0; domain.arcs().len()];
    for (e, v) in field.mesh().boundary_edges().iter().zip(edge) {
        out[e.arc] += v;
    }
    Ok(domain
        .arcs()
        .iter()
        .zip(out)
        .map(|(a, v)| FluxReport::new(v, a.curve.length()))
        .collect())
}

/// Outward flux through each boundary edge split between its two end nodes
/// (counterclockwise edge orientation).
fn edge_flux_parts(field: &SolutionField) -> Vec<[f64; 2]> {
    let mesh = field.mesh();
    let model = mesh.model();
    mesh.boundary_edges()
        .iter()
        .map(|e| {
            let a = mesh.nodes()[e.a];
            let b = mesh.nodes()[e.b];
            let d = [b[0] - a[0], b[1] - a[1]];
            let n = [d[1], -d[0]];
            let g = field.gradient(e.triangle);
            let mut part = [0.0; 2];
            for j in 0..5 {
                let s = 0.5 * (1.0 + GL5_NODES[j]);
                let q = [a[0] + s * d[0], a[1] + s * d[1]];
                let f = ConformalFactor::eval(model, q[0], q[1]);
                let l = f.lambda;
                let p = [g[0] - f.lambda_y / l, g[1] + f.lambda_x / l];
                let sq = (l * l + p[0] * p[0] + p[1] * p[1]).sqrt();
                let fl = [-l * p[0] / sq, -l * p[1] / sq];
                let w = 0.5 * GL5_WEIGHTS[j] * (fl[0] * n[0] + fl[1] * n[1]);
                part[0] += w * (1.0 - s);
                part[1] += w * s;
            }
            part
        })
        .collect()
}

/// Clockwise flux through each mesh boundary edge, in the order of
/// `Mesh::boundary_edges`. Each edge gets its own trace integral plus half
/// of the mismatch between the consistent nodal flux and those integrals at
/// each end, so the edges sum exactly to the discrete balance.
pub fn boundary_edge_flux(field: &SolutionField) -> Vec<f64> {
    let mesh = field.mesh();
    let phi = field.boundary_node_flux();
    let parts = edge_flux_parts(field);
    let mut taken = vec![0.0; mesh.node_count()];
    for (e, d) in mesh.boundary_edges().iter().zip(&parts) {
        taken[e.a] += d[0];
        taken[e.b] += d[1];
    }
    mesh.boundary_edges()
        .iter()
        .zip(&parts)
        .map(|(e, d)| {
            let ea = d[0] + 0.5 * (phi[e.a] - taken[e.a]);
            let eb = d[1] + 0.5 * (phi[e.b] - taken[e.b]);
            -(ea + eb)
        })
        .collect()
}

/// ∫ dψ along each boundary arc of an analytic field, clockwise as in
/// [`boundary_flux_per_arc`]. Arcs are sampled by `per_arc` chords.
pub fn analytic_boundary_flux<S: FluxSource + ?Sized>(src: &S, domain: &DomainSpec, per_arc: usize) -> Result<Vec<FluxReport>> {
    let n = per_arc.max(1);
    domain
        .arcs()
        .iter()
        .map(|a| {
            let pts: Vec<HPoint> = (0..=n).rev().map(|k| a.curve.point(k as f64 / n as f64)).collect();
            let r = flux_integral(src, &FluxPath::new(pts, false)?)?;
            Ok(FluxReport::new(r.value, a.curve.length()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScherkRow {
    pub cap: f64,
    pub arc: usize,
    pub label: &'static str,
    pub value: f64,
    pub length: f64,
    /// value / length, signed.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ScherkTable {
    pub rows: Vec<ScherkRow>,
    pub report: MonotoneReport,
}

impl ScherkTable {
    /// Ratios of one arc across the caps.
    pub fn ratios(&self, arc: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.arc == arc).map(|r| r.ratio).collect()
    }

    /// True when every +∞ arc has strictly increasing ratios ending at or
    /// above `threshold`, and every −∞ arc the mirror statement.
    pub fn approaches_limit(&self, domain: &DomainSpec, threshold: f64) -> bool {
        domain.infinite_arcs().iter().all(|&k| {
            let sign = if domain.arcs()[k].label == ArcLabel::PlusInf { 1.0 } else { -1.0 };
            let r: Vec<f64> = self.ratios(k).iter().map(|x| sign * x).collect();
            r.windows(2).all(|w| w[1] > w[0]) && r.last().is_some_and(|&x| x >= threshold)
        })
    }
}

/// Capped monotone solve followed by the per-arc trace flux table for each
/// cap. Refuses domains that fail the admissibility check.
pub fn scherk_flux_experiment(domain: &DomainSpec, h: f64, cfg: &SolverConfig) -> Result<ScherkTable> {
    let adm = check_admissibility(domain)?;
    if adm.verdict != Verdict::Admissible {
        return invalid("domain is not admissible");
    }
    let mesh = Arc::new(generate_mesh(domain, h)?);
    let report = solve_monotone(&mesh, domain, cfg)?;
    let mut rows = Vec::new();
    for (cap, field) in report.caps.iter().zip(&report.fields) {
        for (arc, r) in boundary_trace_flux_per_arc(field, domain)?.into_iter().enumerate() {
            rows.push(ScherkRow {
                cap: *cap,
                arc,
                label: domain.arcs()[arc].label.short(),
                value: r.value,
                length: r.length,
                ratio: r.value / r.length,
            });
        }
    }
    Ok(ScherkTable { rows, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoundaryData;
    use crate::invariant::{Branch, HelicoidFamily};
    use crate::solver::solve_dirichlet;

    struct Zero;
    impl FluxSource for Zero {
        fn model(&self) -> Model {
            Model::HalfPlane
        }
        fn coeffs(&self, p: &HPoint) -> Result<(f64, f64)> {
            Ok(conjugate_coeffs(&GraphJet2::first_order(*p, 0.0, 0.0, 0.0)))
        }
    }

    #[test]
    fn zero_graph_coefficients() {
        let p = HPoint::half_plane(0.3, 2.0).unwrap();
        let (pc, qc) = Zero.coeffs(&p).unwrap();
        assert_eq!(pc, 0.0);
        assert!((qc + 1.0 / (2f64.sqrt() * 2.0)).abs() < 1e-15);
        let g = TiltedGauge::from_alpha_beta(0.0, 0.0);
        assert_eq!(conjugate_coeffs_from_gauge(3.0, &g), (-0.0, 0.0));
    }

    #[test]
    fn vertical_segment() {
        let path = FluxPath::new(
            vec![
                HPoint::half_plane(0.0, 1.0).unwrap(),
                HPoint::half_plane(0.0, std::f64::consts::E).unwrap(),
            ],
            false,
        )
        .unwrap();
        let r = flux_integral(&Zero, &path).unwrap();
        assert!((r.value + 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((r.length - 1.0).abs() < 1e-12);
        let back = flux_integral(&Zero, &path.reversed()).unwrap();
        assert_eq!(back.value, -r.value);
    }

    #[test]
    fn trace_flux_matches_line_integral_of_the_field() {
        let v = vec![
            HPoint::half_plane(-1.0, 1.0).unwrap(),
            HPoint::half_plane(1.0, 1.0).unwrap(),
            HPoint::half_plane(1.0, 2.5).unwrap(),
            HPoint::half_plane(-1.0, 2.5).unwrap(),
        ];
        let c = ArcLabel::Finite(BoundaryData::Constant(0.0));
        let d = DomainSpec::polygon(v, vec![c.clone(), ArcLabel::PlusInf, c, ArcLabel::PlusInf]).unwrap();
        let mesh = Arc::new(generate_mesh(&d, 0.1).unwrap());
        let s = solve_dirichlet(&mesh, &d.capped(8.0), &SolverConfig::default()).unwrap();
        let trace = boundary_trace_flux_per_arc(&s, &d).unwrap();
        for (k, t) in trace.iter().enumerate() {
            // Clockwise: from the end vertex of the arc back to its start.
            let pts: Vec<HPoint> = mesh.arc_nodes(k).iter().rev().map(|&i| mesh.point(i)).collect();
            let r = flux_integral(&s, &FluxPath::new(pts, false).unwrap()).unwrap();
            assert!((r.value - t.value).abs() < 1e-12, "arc {k}: {} vs {}", r.value, t.value);
            assert!(t.value.abs() < t.length);
        }
        assert!(trace[1].value > 0.9 * trace[1].length && trace[3].value > 0.9 * trace[3].length);
    }

    #[test]
    fn discrete_boundary_fluxes_balance() {
        let v = vec![
            HPoint::half_plane(-1.0, 1.0).unwrap(),
            HPoint::half_plane(1.0, 1.0).unwrap(),
            HPoint::half_plane(1.0, 2.5).unwrap(),
            HPoint::half_plane(-1.0, 2.5).unwrap(),
        ];
        let fam = Family::Helicoid(HelicoidFamily::new(0.0, Branch::Plus).unwrap());
        let d = DomainSpec::polygon(v, vec![ArcLabel::Finite(BoundaryData::Family(fam.clone())); 4]).unwrap();
        let mesh = Arc::new(generate_mesh(&d, 0.1).unwrap());
        let s = solve_dirichlet(&mesh, &d, &SolverConfig::default()).unwrap();
        let arcs = boundary_flux_per_arc(&s, &d).unwrap();
        let sum: f64 = arcs.iter().map(|r| r.value).sum();
        assert!(sum.abs() < 1e-8, "{sum}");
        let exact = analytic_boundary_flux(&fam, &d, 64).unwrap();
        for (a, b) in arcs.iter().zip(&exact) {
            assert!((a.value - b.value).abs() < 1e-2, "{} {}", a.value, b.value);
            assert!(a.ratio < 1.0);
        }
    }
}
