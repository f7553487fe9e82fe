//! Piecewise-linear finite elements for the minimal graph equation, damped
//! Newton iteration and monotone capped sequences for infinite data.
//!
//! The weak form is taken in chart coordinates: for every interior hat
//! function φ, ∫ (F(∇u) − F(0))·∇φ dx dy = 0 with F the flux vector
//! (λα/W, λβ/W). F(0) is divergence free, so subtracting it changes nothing
//! in the continuum but makes constants exact discrete solutions.

use crate::domain::{ArcLabel, BoundaryData, DomainSpec};
use crate::error::{invalid, Error, Result, SolverFailure};
use crate::geometry::{gauge_from_gradient, TiltedGauge};
use crate::hyperbolic::{ConformalFactor, HPoint, Isometry, Model};
use crate::invariant::{Branch, Family, HelicoidFamily};
use crate::linalg::SkylineMatrix;
use crate::mesh::Mesh;
use crate::quadrature::{GL5_NODES, GL5_WEIGHTS};
use rayon::prelude::*;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop when the max-norm of the interior residual falls below this.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Step fractions tried in order by the line search.
    pub damping: Vec<f64>,
    pub picard_warmup: usize,
    /// Caps used for ±∞ arcs.
    pub cap_sequence: Vec<f64>,
    /// Increments must shrink by this factor to count as converging.
    pub decay_factor: f64,
    /// A vertex whose last increment is below this fraction of the last cap
    /// increment also counts as converging.
    pub escape_rate: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-10,
            max_newton: 50,
            damping: vec![1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625],
            picard_warmup: 5,
            cap_sequence: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            decay_factor: 1.5,
            escape_rate: 0.5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) || self.max_newton == 0 {
            return invalid("newton_tol and max_newton must be positive");
        }
        if self.damping.is_empty() || self.damping.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
            return invalid("damping factors must lie in (0, 1]");
        }
        if !(self.decay_factor > 1.0) {
            return invalid("decay factor must exceed 1");
        }
        if !(self.escape_rate > 0.0 && self.escape_rate <= 1.0) {
            return invalid("escape rate must lie in (0, 1]");
        }
        if self.cap_sequence.is_empty() {
            return invalid("cap sequence is empty");
        }
        // Repeated caps are allowed so that a constant sequence reduces to
        // repeated Dirichlet solves.
        if self.cap_sequence.windows(2).any(|w| w[1] < w[0]) {
            return invalid("cap sequence must be nondecreasing");
        }
        if self.cap_sequence.iter().any(|c| !c.is_finite()) {
            return invalid("caps must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub picard_iterations: usize,
    pub newton_iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

/// Degree-four Dunavant rule: barycentric point, weight (sums to 1).
const DUNAVANT: [([f64; 3], f64); 6] = [
    ([0.445948490915965, 0.445948490915965, 0.108103018168070], 0.223381589678011),
    ([0.445948490915965, 0.108103018168070, 0.445948490915965], 0.223381589678011),
    ([0.108103018168070, 0.445948490915965, 0.445948490915965], 0.223381589678011),
    ([0.091576213509771, 0.091576213509771, 0.816847572980459], 0.109951743655322),
    ([0.091576213509771, 0.816847572980459, 0.091576213509771], 0.109951743655322),
    ([0.816847572980459, 0.091576213509771, 0.091576213509771], 0.109951743655322),
];

#[derive(Debug, Clone)]
struct Element {
    nodes: [usize; 3],
    grads: [[f64; 2]; 3],
    weight: [f64; 6],
    lambda: [f64; 6],
    shift: [[f64; 2]; 6],
    f0: [[f64; 2]; 6],
}

/// F(p) = −λp/√(λ² + |p|²) where p = ∇u − c.
fn flux(lambda: f64, p: [f64; 2]) -> [f64; 2] {
    let s = (lambda * lambda + p[0] * p[0] + p[1] * p[1]).sqrt();
    [-lambda * p[0] / s, -lambda * p[1] / s]
}

/// λ and c = (λ_y/λ, −λ_x/λ) at a chart point.
fn shift_at(model: Model, q: [f64; 2]) -> (f64, [f64; 2]) {
    let f = ConformalFactor::eval(model, q[0], q[1]);
    (f.lambda, [f.lambda_y / f.lambda, -f.lambda_x / f.lambda])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Linearization {
    Newton,
    Picard,
}

struct Contribution {
    nodes: [usize; 3],
    r: [f64; 3],
    k: [[f64; 3]; 3],
    energy: f64,
}

/// Precomputed element data and the interior unknown numbering of a mesh.
pub(crate) struct Assembler {
    elements: Vec<Element>,
    dof: Vec<Option<usize>>,
    dof_adj: Vec<Vec<usize>>,
}

impl Assembler {
    pub(crate) fn new(mesh: Arc<Mesh>) -> Self {
        let model = mesh.model();
        let elements: Vec<Element> = (0..mesh.triangles().len())
            .map(|t| {
                let nodes = mesh.triangles()[t];
                let pts = nodes.map(|i| mesh.nodes()[i]);
                let area = mesh.area(t);
                let mut e = Element {
                    nodes,
                    grads: mesh.basis_gradients(t),
                    weight: [0.0; 6],
                    lambda: [0.0; 6],
                    shift: [[0.0; 2]; 6],
                    f0: [[0.0; 2]; 6],
                };
                for (q, (b, w)) in DUNAVANT.iter().enumerate() {
                    let x = b[0] * pts[0][0] + b[1] * pts[1][0] + b[2] * pts[2][0];
                    let y = b[0] * pts[0][1] + b[1] * pts[1][1] + b[2] * pts[2][1];
                    let (l, c) = shift_at(model, [x, y]);
                    e.weight[q] = w * area;
                    e.lambda[q] = l;
                    e.shift[q] = c;
                    e.f0[q] = flux(l, [-c[0], -c[1]]);
                }
                e
            })
            .collect();
        let mut dof = vec![None; mesh.node_count()];
        let mut n = 0;
        for i in 0..mesh.node_count() {
            if !mesh.is_boundary(i) {
                dof[i] = Some(n);
                n += 1;
            }
        }
        let adj = mesh.adjacency();
        let mut dof_adj = vec![Vec::new(); n];
        for i in 0..mesh.node_count() {
            if let Some(a) = dof[i] {
                dof_adj[a] = adj[i].iter().filter_map(|&j| dof[j]).collect();
            }
        }
        Assembler {
            elements,
            dof,
            dof_adj,
        }
    }

    fn unknowns(&self) -> usize {
        self.dof_adj.len()
    }

    fn element(&self, e: &Element, u: &[f64], lin: Option<Linearization>) -> Contribution {
        let uv = e.nodes.map(|i| u[i]);
        let g = [
            uv[0] * e.grads[0][0] + uv[1] * e.grads[1][0] + uv[2] * e.grads[2][0],
            uv[0] * e.grads[0][1] + uv[1] * e.grads[1][1] + uv[2] * e.grads[2][1],
        ];
        let mut c = Contribution {
            nodes: e.nodes,
            r: [0.0; 3],
            k: [[0.0; 3]; 3],
            energy: 0.0,
        };
        for q in 0..6 {
            let l = e.lambda[q];
            let p = [g[0] - e.shift[q][0], g[1] - e.shift[q][1]];
            let s2 = l * l + p[0] * p[0] + p[1] * p[1];
            let s = s2.sqrt();
            let f = [-l * p[0] / s, -l * p[1] / s];
            let w = e.weight[q];
            let d = [f[0] - e.f0[q][0], f[1] - e.f0[q][1]];
            for a in 0..3 {
                c.r[a] += w * (d[0] * e.grads[a][0] + d[1] * e.grads[a][1]);
            }
            c.energy += w * (l * s + e.f0[q][0] * g[0] + e.f0[q][1] * g[1]);
            let m = match lin {
                None => continue,
                Some(Linearization::Newton) => {
                    let k = l / s;
                    [
                        [k * (1.0 - p[0] * p[0] / s2), -k * p[0] * p[1] / s2],
                        [-k * p[0] * p[1] / s2, k * (1.0 - p[1] * p[1] / s2)],
                    ]
                }
                Some(Linearization::Picard) => [[l / s, 0.0], [0.0, l / s]],
            };
            for a in 0..3 {
                let ma = [
                    m[0][0] * e.grads[a][0] + m[0][1] * e.grads[a][1],
                    m[1][0] * e.grads[a][0] + m[1][1] * e.grads[a][1],
                ];
                for b in 0..3 {
                    c.k[a][b] += w * (ma[0] * e.grads[b][0] + ma[1] * e.grads[b][1]);
                }
            }
        }
        c
    }

    fn contributions(&self, u: &[f64], lin: Option<Linearization>) -> Vec<Contribution> {
        self.elements
            .par_iter()
            .map(|e| self.element(e, u, lin))
            .collect()
    }

    /// Interior residual vector and discrete energy.
    fn residual(&self, u: &[f64]) -> (Vec<f64>, f64) {
        let mut r = vec![0.0; self.unknowns()];
        let mut energy = 0.0;
        for c in self.contributions(u, None) {
            energy += c.energy;
            for a in 0..3 {
                if let Some(i) = self.dof[c.nodes[a]] {
                    r[i] += c.r[a];
                }
            }
        }
        (r, energy)
    }

    /// Residual at every node, boundary nodes included.
    pub(crate) fn nodal_residual(&self, u: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; u.len()];
        for c in self.contributions(u, None) {
            for a in 0..3 {
                r[c.nodes[a]] += c.r[a];
            }
        }
        r
    }

    fn system(&self, u: &[f64], lin: Linearization, mat: &mut SkylineMatrix) -> (Vec<f64>, f64) {
        mat.clear();
        let mut r = vec![0.0; self.unknowns()];
        let mut energy = 0.0;
        for c in self.contributions(u, Some(lin)) {
            energy += c.energy;
            for a in 0..3 {
                let Some(i) = self.dof[c.nodes[a]] else { continue };
                r[i] += c.r[a];
                for b in 0..=a {
                    if let Some(j) = self.dof[c.nodes[b]] {
                        if a == b {
                            mat.add(i, i, c.k[a][a]);
                        } else {
                            mat.add(i, j, 0.5 * (c.k[a][b] + c.k[b][a]));
                        }
                    }
                }
            }
        }
        (r, energy)
    }

    fn apply_step(&self, u: &[f64], step: &[f64], t: f64) -> Vec<f64> {
        let mut v = u.to_vec();
        for (i, d) in self.dof.iter().enumerate() {
            if let Some(k) = d {
                v[i] += t * step[*k];
            }
        }
        v
    }

    /// Solves with the boundary entries of `u` held fixed; interior entries
    /// are the initial iterate.
    fn solve(&self, mut u: Vec<f64>, cfg: &SolverConfig) -> Result<(Vec<f64>, ConvergenceReport)> {
        let fail = |iterations: usize, residual_norm: f64, message: &str| {
            Error::Solver(SolverFailure {
                cap_index: None,
                iterations,
                residual_norm,
                message: message.to_string(),
            })
        };
        let mut report = ConvergenceReport {
            picard_iterations: 0,
            newton_iterations: 0,
            residual_norm: f64::INFINITY,
            converged: false,
        };
        if self.unknowns() == 0 {
            report.residual_norm = 0.0;
            report.converged = true;
            return Ok((u, report));
        }
        let mut mat = SkylineMatrix::with_pattern(&self.dof_adj);
        for _ in 0..cfg.picard_warmup {
            let (r, _) = self.system(&u, Linearization::Picard, &mut mat);
            if max_norm(&r) <= cfg.newton_tol {
                break;
            }
            mat.factor()?;
            let step = mat.solve(&r)?;
            u = self.apply_step(&u, &step, 1.0);
            report.picard_iterations += 1;
        }
        for it in 0..=cfg.max_newton {
            let (r, energy) = self.system(&u, Linearization::Newton, &mut mat);
            let rn = max_norm(&r);
            report.residual_norm = rn;
            report.newton_iterations = it;
            if !rn.is_finite() {
                return Err(fail(it, rn, "residual is not finite"));
            }
            if rn <= cfg.newton_tol {
                report.converged = true;
                return Ok((u, report));
            }
            if it == cfg.max_newton {
                break;
            }
            mat.factor()?;
            let step = mat.solve(&r)?;
            let r2 = l2_norm(&r);
            let slope: f64 = step.iter().zip(&r).map(|(a, b)| a * b).sum();
            let mut accepted = None;
            for &t in &cfg.damping {
                let v = self.apply_step(&u, &step, t);
                let (rv, ev) = self.residual(&v);
                if l2_norm(&rv) < r2 || ev <= energy - 1e-4 * t * slope {
                    accepted = Some(v);
                    break;
                }
            }
            u = match accepted {
                Some(v) => v,
                None => {
                    let (rp, _) = self.system(&u, Linearization::Picard, &mut mat);
                    mat.factor()?;
                    let step = mat.solve(&rp)?;
                    report.picard_iterations += 1;
                    self.apply_step(&u, &step, 1.0)
                }
            };
        }
        Err(fail(
            cfg.max_newton,
            report.residual_norm,
            "Newton iteration did not reach the residual tolerance",
        ))
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dirichlet values at every node; interior entries are zero. Corner nodes
/// take the mean of the two incident arcs, which keeps capped sequences
/// nodally monotone where a capped arc meets a finite one.
pub fn boundary_values(mesh: &Mesh, domain: &DomainSpec) -> Result<Vec<f64>> {
    let arcs = domain.arcs();
    if mesh.arc_count() != arcs.len() {
        return invalid("mesh and domain have different arc counts");
    }
    let data: Vec<&BoundaryData> = arcs
        .iter()
        .map(|a| match &a.label {
            ArcLabel::Finite(d) => Ok(d),
            _ => invalid("Dirichlet solve requires finite labels on every arc"),
        })
        .collect::<Result<_>>()?;
    let mut vals = vec![0.0; mesh.node_count()];
    let n = arcs.len();
    for k in 0..n {
        let ids = mesh.arc_nodes(k);
        for &i in &ids[1..ids.len() - 1] {
            vals[i] = data[k].eval(&mesh.point(i))?;
        }
        let corner = ids[0];
        let p = mesh.point(corner);
        vals[corner] = 0.5 * (data[k].eval(&p)? + data[(k + n - 1) % n].eval(&p)?);
    }
    Ok(vals)
}

/// Discrete solution together with its per-triangle gauge.
#[derive(Debug, Clone)]
pub struct SolutionField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
    gauges: Vec<TiltedGauge>,
    report: ConvergenceReport,
}

impl SolutionField {
    pub(crate) fn new(mesh: Arc<Mesh>, values: Vec<f64>, report: ConvergenceReport) -> Self {
        let model = mesh.model();
        let gauges = (0..mesh.triangles().len())
            .map(|t| {
                let tri = mesh.triangles()[t];
                let c = tri.iter().fold([0.0; 2], |a, &i| {
                    [a[0] + mesh.nodes()[i][0] / 3.0, a[1] + mesh.nodes()[i][1] / 3.0]
                });
                let g = gradient_on(&mesh, &values, t);
                gauge_from_gradient(&ConformalFactor::eval(model, c[0], c[1]), g[0], g[1])
            })
            .collect();
        SolutionField {
            mesh,
            values,
            gauges,
            report,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Gauge at each triangle centroid.
    pub fn gauges(&self) -> &[TiltedGauge] {
        &self.gauges
    }

    pub fn report(&self) -> &ConvergenceReport {
        &self.report
    }

    pub fn gradient(&self, t: usize) -> [f64; 2] {
        gradient_on(&self.mesh, &self.values, t)
    }

    /// Linear interpolation at a point of the meshed region.
    pub fn value_at(&self, p: &HPoint) -> Result<f64> {
        let q = p.to_model(self.mesh.model());
        let (t, b) = self
            .mesh
            .locate(q.xy())
            .ok_or_else(|| Error::Invalid(format!("point ({}, {}) is outside the mesh", q.x(), q.y())))?;
        let tri = self.mesh.triangles()[t];
        Ok((0..3).map(|k| b[k] * self.values[tri[k]]).sum())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    }

    /// Nodal flux Φ_b ≈ ∮ φ_b F·n_out ds at every boundary node (zero inside).
    pub fn boundary_node_flux(&self) -> Vec<f64> {
        let asm = Assembler::new(self.mesh.clone());
        let mut phi = asm.nodal_residual(&self.values);
        for i in 0..phi.len() {
            if !self.mesh.is_boundary(i) {
                phi[i] = 0.0;
            }
        }
        let model = self.mesh.model();
        for e in self.mesh.boundary_edges() {
            let a = self.mesh.nodes()[e.a];
            let b = self.mesh.nodes()[e.b];
            let d = [b[0] - a[0], b[1] - a[1]];
            let n = [d[1], -d[0]];
            for j in 0..5 {
                let s = 0.5 * (1.0 + GL5_NODES[j]);
                let q = [a[0] + s * d[0], a[1] + s * d[1]];
                let (l, c) = shift_at(model, q);
                let f0 = flux(l, [-c[0], -c[1]]);
                let w = 0.5 * GL5_WEIGHTS[j] * (f0[0] * n[0] + f0[1] * n[1]);
                phi[e.a] += w * (1.0 - s);
                phi[e.b] += w * s;
            }
        }
        phi
    }
}

fn gradient_on(mesh: &Mesh, values: &[f64], t: usize) -> [f64; 2] {
    let g = mesh.basis_gradients(t);
    let tri = mesh.triangles()[t];
    [
        (0..3).map(|k| values[tri[k]] * g[k][0]).sum(),
        (0..3).map(|k| values[tri[k]] * g[k][1]).sum(),
    ]
}

/// Solves the Dirichlet problem with finite data on every arc.
pub fn solve_dirichlet(mesh: &Arc<Mesh>, domain: &DomainSpec, cfg: &SolverConfig) -> Result<SolutionField> {
    solve_dirichlet_from(mesh, domain, cfg, None)
}

/// As [`solve_dirichlet`], starting from the interior values of `initial`.
/// Without an initial iterate the interior starts at the mean boundary value.
pub fn solve_dirichlet_from(
    mesh: &Arc<Mesh>,
    domain: &DomainSpec,
    cfg: &SolverConfig,
    initial: Option<&[f64]>,
) -> Result<SolutionField> {
    cfg.validate()?;
    let asm = Assembler::new(mesh.clone());
    let u0 = starting_values(mesh, boundary_values(mesh, domain)?, initial)?;
    let (u, report) = asm.solve(u0, cfg)?;
    Ok(SolutionField::new(mesh.clone(), u, report))
}

fn starting_values(mesh: &Mesh, mut vals: Vec<f64>, initial: Option<&[f64]>) -> Result<Vec<f64>> {
    match initial {
        Some(init) => {
            if init.len() != vals.len() {
                return invalid("initial iterate has the wrong length");
            }
            for i in 0..vals.len() {
                if !mesh.is_boundary(i) {
                    vals[i] = init[i];
                }
            }
        }
        None => {
            let b: Vec<f64> = (0..vals.len())
                .filter(|&i| mesh.is_boundary(i))
                .map(|i| vals[i])
                .collect();
            let mean = b.iter().sum::<f64>() / b.len() as f64;
            for i in 0..vals.len() {
                if !mesh.is_boundary(i) {
                    vals[i] = mean;
                }
            }
        }
    }
    Ok(vals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexClass {
    Converged,
    Diverged,
}

#[derive(Debug, Clone)]
pub struct MonotoneReport {
    pub caps: Vec<f64>,
    pub fields: Vec<SolutionField>,
    /// Per node; `None` on boundary nodes.
    pub classification: Vec<Option<VertexClass>>,
    /// Midpoints of mesh edges joining converged and diverged interior nodes.
    pub divergence_boundary: Vec<[f64; 2]>,
}

impl MonotoneReport {
    pub fn last(&self) -> &SolutionField {
        self.fields.last().expect("at least one cap")
    }

    pub fn diverged_nodes(&self) -> Vec<usize> {
        (0..self.classification.len())
            .filter(|&i| self.classification[i] == Some(VertexClass::Diverged))
            .collect()
    }

    pub fn all_converged(&self) -> bool {
        self.diverged_nodes().is_empty()
    }

    /// Largest decrease of any nodal value between consecutive caps.
    pub fn monotonicity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.fields.windows(2) {
            for (a, b) in w[0].values().iter().zip(w[1].values()) {
                worst = worst.max(a - b);
            }
        }
        worst
    }
}

/// Solves the capped problems (+n on +∞ arcs, −n on −∞ arcs), each warm
/// started from the previous one, and classifies the interior vertices.
pub fn solve_monotone(mesh: &Arc<Mesh>, domain: &DomainSpec, cfg: &SolverConfig) -> Result<MonotoneReport> {
    cfg.validate()?;
    if domain.infinite_arcs().is_empty() {
        return invalid("monotone solve needs at least one infinite arc");
    }
    let asm = Assembler::new(mesh.clone());
    let mut fields: Vec<SolutionField> = Vec::new();
    for (k, &cap) in cfg.cap_sequence.iter().enumerate() {
        let bv = boundary_values(mesh, &domain.capped(cap))?;
        let prev = fields.last().map(|f| f.values());
        let u0 = starting_values(mesh, bv, prev)?;
        let (u, report) = asm.solve(u0, cfg).map_err(|e| match e {
            Error::Solver(mut f) => {
                f.cap_index = Some(k);
                Error::Solver(f)
            }
            other => other,
        })?;
        fields.push(SolutionField::new(mesh.clone(), u, report));
    }
    let classification = classify(mesh, &fields, &cfg.cap_sequence, cfg);
    let divergence_boundary = class_interface(mesh, &classification);
    Ok(MonotoneReport {
        caps: cfg.cap_sequence.clone(),
        fields,
        classification,
        divergence_boundary,
    })
}

/// With fewer than three caps there is no decay to measure and every
/// interior vertex is reported as converged.
fn classify(mesh: &Mesh, fields: &[SolutionField], caps: &[f64], cfg: &SolverConfig) -> Vec<Option<VertexClass>> {
    let n = fields.len();
    let step = if n >= 2 { caps[n - 1] - caps[n - 2] } else { 0.0 };
    (0..mesh.node_count())
        .map(|i| {
            if mesh.is_boundary(i) {
                return None;
            }
            if n < 3 {
                return Some(VertexClass::Converged);
            }
            let d_prev = (fields[n - 2].values()[i] - fields[n - 3].values()[i]).abs();
            let d_last = (fields[n - 1].values()[i] - fields[n - 2].values()[i]).abs();
            let decays = (d_prev <= 1e-9 && d_last <= 1e-9) || d_last * cfg.decay_factor <= d_prev;
            if decays || d_last < cfg.escape_rate * step.abs() {
                Some(VertexClass::Converged)
            } else {
                Some(VertexClass::Diverged)
            }
        })
        .collect()
}

fn class_interface(mesh: &Mesh, cls: &[Option<VertexClass>]) -> Vec<[f64; 2]> {
    let mut pts = Vec::new();
    for (i, nb) in mesh.adjacency().iter().enumerate() {
        for &j in nb {
            if j <= i {
                continue;
            }
            if let (Some(a), Some(b)) = (cls[i], cls[j]) {
                if a != b {
                    let (p, q) = (mesh.nodes()[i], mesh.nodes()[j]);
                    pts.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                }
            }
        }
    }
    pts
}

#[derive(Debug, Clone, PartialEq)]
pub struct StraightLineReport {
    pub holds: bool,
    /// Barrier bound N over the probe set.
    pub bound: f64,
    /// Range [m, M] of the data on the finite arcs.
    pub data_min: f64,
    pub data_max: f64,
    /// Largest excursion of any capped field outside [m, M] on the probes.
    pub worst_excursion: f64,
}

/// Checks m − N ≤ u ≤ M + N on the probes for every capped field, with N
/// taken from the C = 1 helicoid barriers carried onto the side γ. Only the
/// half-plane chart is supported.
pub fn straight_line_bound_check(report: &MonotoneReport, domain: &DomainSpec, probes: &[HPoint]) -> Result<StraightLineReport> {
    let inf = domain.infinite_arcs();
    if inf.is_empty() {
        return Ok(StraightLineReport {
            holds: true,
            bound: 0.0,
            data_min: 0.0,
            data_max: 0.0,
            worst_excursion: 0.0,
        });
    }
    if inf.len() > 1 {
        return invalid("straight-line check needs exactly one infinite arc");
    }
    if domain.model() != Model::HalfPlane {
        return invalid("straight-line check is implemented in the half-plane chart");
    }
    let gamma = match &domain.arcs()[inf[0]].curve {
        crate::domain::ArcCurve::Geodesic(g) => g.clone(),
        _ => return invalid("infinite arc is not geodesic"),
    };
    let probes: Vec<HPoint> = probes.iter().map(|p| p.to_model(Model::HalfPlane)).collect();
    for p in &probes {
        if gamma.distance_to_line(p)? < 1e-9 {
            return invalid("probe lies on the geodesic side");
        }
        if !domain.contains(p) {
            return invalid("probe lies outside the domain");
        }
    }
    let f = Isometry::geodesic_to_imaginary_axis(&gamma);
    let mesh = report.last().mesh();
    let centroid = domain.vertices().iter().fold([0.0; 2], |a, v| {
        let n = domain.vertices().len() as f64;
        [a[0] + v.x() / n, a[1] + v.y() / n]
    });
    let right = f.apply(&HPoint::half_plane(centroid[0], centroid[1])?).x() > 0.0;
    let (up, down) = if right {
        (Branch::Plus, Branch::Minus)
    } else {
        (Branch::Minus, Branch::Plus)
    };
    let barrier = |b: Branch| -> Result<BoundaryData> {
        Ok(BoundaryData::Pulled {
            inner: Arc::new(BoundaryData::Family(Family::Helicoid(HelicoidFamily::new(1.0, b)?))),
            map: f,
        })
    };
    let (v1, v2) = (barrier(up)?, barrier(down)?);
    // Normalize on the finite arcs: v1 ≥ 0 and v2 ≤ 0 there.
    let mut lo1 = f64::INFINITY;
    let mut hi2 = f64::NEG_INFINITY;
    let mut m = f64::INFINITY;
    let mut big_m = f64::NEG_INFINITY;
    for k in 0..domain.arcs().len() {
        if k == inf[0] {
            continue;
        }
        let ids = mesh.arc_nodes(k);
        let ArcLabel::Finite(data) = &domain.arcs()[k].label else { unreachable!() };
        for &i in ids {
            let p = mesh.point(i);
            let corner_on_gamma = gamma.distance_to_line(&p)? < 1e-9;
            if !corner_on_gamma {
                lo1 = lo1.min(v1.eval(&p)?);
                hi2 = hi2.max(v2.eval(&p)?);
            }
            let d = data.eval(&p)?;
            m = m.min(d);
            big_m = big_m.max(d);
        }
    }
    let mut bound: f64 = 0.0;
    for p in &probes {
        bound = bound.max(v1.eval(p)? - lo1).max(hi2 - v2.eval(p)?);
    }
    let mut worst: f64 = 0.0;
    for field in &report.fields {
        for p in &probes {
            let u = field.value_at(p)?;
            worst = worst.max(m - u).max(u - big_m);
        }
    }
    Ok(StraightLineReport {
        holds: worst <= bound,
        bound,
        data_min: m,
        data_max: big_m,
        worst_excursion: worst,
    })
}
