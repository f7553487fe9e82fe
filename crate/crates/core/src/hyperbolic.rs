//! Hyperbolic plane geometry in two conformal charts.
//!
//! The upper half-plane uses λ = 1/y. The disc has Euclidean radius 2 and
//! λ = 1/(1 − (x² + y²)/4). Geodesic arcs are stored as analytic descriptors.

use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Points closer than this (Euclidean, in the chart) are treated as equal.
pub const COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    HalfPlane,
    Disc,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::HalfPlane => f.write_str("half-plane"),
            Model::Disc => f.write_str("disc"),
        }
    }
}

impl Model {
    pub fn contains(self, x: f64, y: f64) -> bool {
        if !(x.is_finite() && y.is_finite()) {
            return false;
        }
        match self {
            Model::HalfPlane => y > 0.0,
            Model::Disc => x * x + y * y < 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    model: Model,
    x: f64,
    y: f64,
}

impl HPoint {
    pub fn new(model: Model, x: f64, y: f64) -> Result<Self> {
        if model.contains(x, y) {
            Ok(HPoint { model, x, y })
        } else {
            Err(Error::OutsideModel { model, x, y })
        }
    }

    pub fn half_plane(x: f64, y: f64) -> Result<Self> {
        Self::new(Model::HalfPlane, x, y)
    }

    pub fn disc(x: f64, y: f64) -> Result<Self> {
        Self::new(Model::Disc, x, y)
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// The same hyperbolic point expressed in another chart.
    pub fn to_model(&self, model: Model) -> HPoint {
        if model == self.model {
            return *self;
        }
        let w = match self.model {
            Model::HalfPlane => half_plane_to_unit_disc(Cx::new(self.x, self.y)),
            Model::Disc => Cx::new(self.x / 2.0, self.y / 2.0),
        };
        let z = match model {
            Model::HalfPlane => unit_disc_to_half_plane(w),
            Model::Disc => w.scale(2.0),
        };
        // Round-off can push a point onto the ideal boundary only for points
        // already at distance ~35 from the origin; clamp to stay valid.
        let (x, y) = match model {
            Model::HalfPlane => (z.re, z.im.max(f64::MIN_POSITIVE)),
            Model::Disc => {
                let r = z.abs();
                if r >= 2.0 {
                    let s = (2.0 - 1e-15) / r;
                    (z.re * s, z.im * s)
                } else {
                    (z.re, z.im)
                }
            }
        };
        HPoint { model, x, y }
    }

    /// Coordinates in the Poincaré unit disc.
    pub fn unit_disc(&self) -> [f64; 2] {
        match self.model {
            Model::HalfPlane => {
                let w = half_plane_to_unit_disc(Cx::new(self.x, self.y));
                [w.re, w.im]
            }
            Model::Disc => [self.x / 2.0, self.y / 2.0],
        }
    }

    /// Coordinates in the Klein model, where geodesics are straight chords.
    pub fn klein(&self) -> [f64; 2] {
        let [u, v] = self.unit_disc();
        let s = 2.0 / (1.0 + u * u + v * v);
        [s * u, s * v]
    }

    pub(crate) fn unchecked(model: Model, x: f64, y: f64) -> HPoint {
        HPoint { model, x, y }
    }
}

// Minimal complex arithmetic for Möbius maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cx {
    pub re: f64,
    pub im: f64,
}

impl Cx {
    pub fn new(re: f64, im: f64) -> Self {
        Cx { re, im }
    }
    pub fn add(self, o: Cx) -> Cx {
        Cx::new(self.re + o.re, self.im + o.im)
    }
    pub fn sub(self, o: Cx) -> Cx {
        Cx::new(self.re - o.re, self.im - o.im)
    }
    pub fn mul(self, o: Cx) -> Cx {
        Cx::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
    pub fn div(self, o: Cx) -> Cx {
        let d = o.re * o.re + o.im * o.im;
        Cx::new(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )
    }
    pub fn scale(self, s: f64) -> Cx {
        Cx::new(self.re * s, self.im * s)
    }
    pub fn conj(self) -> Cx {
        Cx::new(self.re, -self.im)
    }
    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
    pub fn arg(self) -> f64 {
        self.im.atan2(self.re)
    }
}

fn half_plane_to_unit_disc(z: Cx) -> Cx {
    let i = Cx::new(0.0, 1.0);
    z.sub(i).div(z.add(i))
}

fn unit_disc_to_half_plane(w: Cx) -> Cx {
    let one = Cx::new(1.0, 0.0);
    Cx::new(0.0, 1.0).mul(one.add(w)).div(one.sub(w))
}

/// λ and its partial derivatives up to second order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformalFactor {
    pub lambda: f64,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub lambda_xx: f64,
    pub lambda_xy: f64,
    pub lambda_yy: f64,
}

impl ConformalFactor {
    pub(crate) fn eval(model: Model, x: f64, y: f64) -> ConformalFactor {
        match model {
            Model::HalfPlane => {
                let l = 1.0 / y;
                ConformalFactor {
                    lambda: l,
                    lambda_x: 0.0,
                    lambda_y: -l * l,
                    lambda_xx: 0.0,
                    lambda_xy: 0.0,
                    lambda_yy: 2.0 * l * l * l,
                }
            }
            Model::Disc => {
                let q = 4.0 - x * x - y * y;
                let q2 = q * q;
                let q3 = q2 * q;
                ConformalFactor {
                    lambda: 4.0 / q,
                    lambda_x: 8.0 * x / q2,
                    lambda_y: 8.0 * y / q2,
                    lambda_xx: 8.0 / q2 + 32.0 * x * x / q3,
                    lambda_xy: 32.0 * x * y / q3,
                    lambda_yy: 8.0 / q2 + 32.0 * y * y / q3,
                }
            }
        }
    }

    /// Gaussian curvature −Δ log λ / λ²; equals −1 for both charts.
    pub fn curvature(&self) -> f64 {
        let l = self.lambda;
        let lap_log = (self.lambda_xx + self.lambda_yy) / l
            - (self.lambda_x * self.lambda_x + self.lambda_y * self.lambda_y) / (l * l);
        -lap_log / (l * l)
    }
}

pub fn conformal_factor(p: &HPoint) -> ConformalFactor {
    ConformalFactor::eval(p.model, p.x, p.y)
}

fn same_model(p: &HPoint, q: &HPoint) -> Result<Model> {
    if p.model != q.model {
        return Err(Error::MixedModels);
    }
    Ok(p.model)
}

pub fn distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    let model = same_model(p, q)?;
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let d2 = dx * dx + dy * dy;
    // sinh(d/2) forms stay accurate for nearby points.
    let s = match model {
        Model::HalfPlane => (d2 / (4.0 * p.y * q.y)).sqrt(),
        Model::Disc => {
            let a = 1.0 - (p.x * p.x + p.y * p.y) / 4.0;
            let b = 1.0 - (q.x * q.x + q.y * q.y) / 4.0;
            (d2 / 4.0 / (a * b)).sqrt()
        }
    };
    Ok(2.0 * s.asinh())
}

fn chart_gap(p: &HPoint, q: &HPoint) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcShape {
    /// Straight segment in the chart: a vertical line (half-plane) or a diameter (disc).
    Segment,
    /// Circular arc meeting the ideal boundary orthogonally.
    Circle { cx: f64, cy: f64, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicArc {
    start: HPoint,
    end: HPoint,
    shape: ArcShape,
    length: f64,
    angle0: f64,
    sweep: f64,
}

pub fn geodesic_between(p: &HPoint, q: &HPoint) -> Result<GeodesicArc> {
    let model = same_model(p, q)?;
    if chart_gap(p, q) <= COINCIDENCE_TOL {
        return Err(Error::Coincident);
    }
    let shape = match model {
        Model::HalfPlane => {
            if (p.x - q.x).abs() <= COINCIDENCE_TOL {
                ArcShape::Segment
            } else {
                let c = (q.x * q.x + q.y * q.y - p.x * p.x - p.y * p.y) / (2.0 * (q.x - p.x));
                ArcShape::Circle {
                    cx: c,
                    cy: 0.0,
                    radius: (p.x - c).hypot(p.y),
                }
            }
        }
        Model::Disc => {
            let cross = p.x * q.y - p.y * q.x;
            let scale = 1.0 + (p.x.hypot(p.y)) * (q.x.hypot(q.y));
            if cross.abs() <= COINCIDENCE_TOL * scale {
                ArcShape::Segment
            } else {
                // c·p = (|p|² + 4)/2 and c·q = (|q|² + 4)/2.
                let rp = (p.x * p.x + p.y * p.y + 4.0) / 2.0;
                let rq = (q.x * q.x + q.y * q.y + 4.0) / 2.0;
                let cx = (rp * q.y - rq * p.y) / cross;
                let cy = (p.x * rq - q.x * rp) / cross;
                ArcShape::Circle {
                    cx,
                    cy,
                    radius: (cx * cx + cy * cy - 4.0).sqrt(),
                }
            }
        }
    };
    let (angle0, sweep) = match shape {
        ArcShape::Segment => (0.0, 0.0),
        ArcShape::Circle { cx, cy, .. } => {
            let a0 = (p.y - cy).atan2(p.x - cx);
            let a1 = (q.y - cy).atan2(q.x - cx);
            (a0, wrap_angle(a1 - a0))
        }
    };
    Ok(GeodesicArc {
        start: *p,
        end: *q,
        shape,
        length: distance(p, q)?,
        angle0,
        sweep,
    })
}

/// Wraps an angle into (−π, π].
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

impl GeodesicArc {
    pub fn start(&self) -> HPoint {
        self.start
    }

    pub fn end(&self) -> HPoint {
        self.end
    }

    pub fn shape(&self) -> ArcShape {
        self.shape
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn model(&self) -> Model {
        self.start.model
    }

    pub fn reversed(&self) -> GeodesicArc {
        GeodesicArc {
            start: self.end,
            end: self.start,
            shape: self.shape,
            length: self.length,
            angle0: self.angle0 + self.sweep,
            sweep: -self.sweep,
        }
    }

    /// Point at hyperbolic arclength `s` from the start (unit-speed parametrization).
    pub fn point_at(&self, s: f64) -> HPoint {
        let s = s.clamp(0.0, self.length);
        let model = self.model();
        let a = self.start.to_model(Model::HalfPlane);
        let b = self.end.to_model(Model::HalfPlane);
        let z = if (a.x - b.x).abs() <= COINCIDENCE_TOL * (1.0 + a.x.abs()) {
            let sign = if b.y > a.y { 1.0 } else { -1.0 };
            Cx::new(a.x, a.y * (sign * s).exp())
        } else {
            let c = (b.x * b.x + b.y * b.y - a.x * a.x - a.y * a.y) / (2.0 * (b.x - a.x));
            let r = (a.x - c).hypot(a.y);
            let pa = a.y.atan2(a.x - c);
            let pb = b.y.atan2(b.x - c);
            let sign = if pb > pa { 1.0 } else { -1.0 };
            let s0 = (pa / 2.0).tan().ln();
            let phi = 2.0 * (s0 + sign * s).exp().atan();
            Cx::new(c + r * phi.cos(), r * phi.sin())
        };
        HPoint::unchecked(Model::HalfPlane, z.re, z.im).to_model(model)
    }

    pub fn midpoint(&self) -> HPoint {
        self.point_at(0.5 * self.length)
    }

    /// Point at chart parameter `t ∈ [0, 1]`: linear for segments, uniform in angle for circles.
    pub fn chart_point(&self, t: f64) -> [f64; 2] {
        if t <= 0.0 {
            return self.start.xy();
        }
        if t >= 1.0 {
            return self.end.xy();
        }
        match self.shape {
            ArcShape::Segment => [
                self.start.x + t * (self.end.x - self.start.x),
                self.start.y + t * (self.end.y - self.start.y),
            ],
            ArcShape::Circle { cx, cy, radius } => {
                let a = self.angle0 + t * self.sweep;
                [cx + radius * a.cos(), cy + radius * a.sin()]
            }
        }
    }

    /// Derivative of `chart_point` with respect to `t`.
    pub fn chart_velocity(&self, t: f64) -> [f64; 2] {
        match self.shape {
            ArcShape::Segment => [self.end.x - self.start.x, self.end.y - self.start.y],
            ArcShape::Circle { radius, .. } => {
                let a = self.angle0 + t * self.sweep;
                [-radius * self.sweep * a.sin(), radius * self.sweep * a.cos()]
            }
        }
    }

    /// Unit Euclidean tangent in the chart at parameter `t`.
    pub fn chart_tangent(&self, t: f64) -> [f64; 2] {
        let [vx, vy] = self.chart_velocity(t);
        let n = vx.hypot(vy);
        [vx / n, vy / n]
    }

    /// Euclidean length of the arc in the chart.
    pub fn chart_length(&self) -> f64 {
        match self.shape {
            ArcShape::Segment => chart_gap(&self.start, &self.end),
            ArcShape::Circle { radius, .. } => radius * self.sweep.abs(),
        }
    }

    /// Hyperbolic distance from `p` to the complete geodesic carrying this arc.
    pub fn distance_to_line(&self, p: &HPoint) -> Result<f64> {
        if p.model != self.model() {
            return Err(Error::MixedModels);
        }
        let t = Isometry::geodesic_to_imaginary_axis(self);
        let q = t.apply(&p.to_model(Model::HalfPlane));
        Ok((q.x.abs() / q.y).asinh())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsometryKind {
    MobiusOrientationPreserving,
    Reflection,
}

/// A plane isometry written in the half-plane chart as w ↦ (aw + b)/(cw + d)
/// or, for reflections, w ↦ (a w̄ + b)/(c w̄ + d). Disc points are conjugated
/// through the Cayley map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    kind: IsometryKind,
    m: [f64; 4],
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry {
            kind: IsometryKind::MobiusOrientationPreserving,
            m: [1.0, 0.0, 0.0, 1.0],
        }
    }

    pub fn mobius(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::from_matrix(IsometryKind::MobiusOrientationPreserving, [a, b, c, d])
    }

    pub fn anti_mobius(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::from_matrix(IsometryKind::Reflection, [a, b, c, d])
    }

    fn from_matrix(kind: IsometryKind, m: [f64; 4]) -> Result<Self> {
        let det = m[0] * m[3] - m[1] * m[2];
        if !m.iter().all(|v| v.is_finite()) {
            return invalid("non-finite isometry coefficients");
        }
        let ok = match kind {
            IsometryKind::MobiusOrientationPreserving => det > 0.0,
            IsometryKind::Reflection => det < 0.0,
        };
        if !ok {
            return invalid("determinant sign does not match the isometry kind");
        }
        let s = 1.0 / det.abs().sqrt();
        let mut m = [m[0] * s, m[1] * s, m[2] * s, m[3] * s];
        if m[2] < 0.0 || (m[2] == 0.0 && m[3] < 0.0) {
            m = [-m[0], -m[1], -m[2], -m[3]];
        }
        Ok(Isometry { kind, m })
    }

    /// (x, y) ↦ (εx, εy) in the half-plane chart.
    pub fn scaling(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return invalid("scaling factor must be positive");
        }
        Self::mobius(eps, 0.0, 0.0, 1.0)
    }

    /// (x, y) ↦ (x + a, y) in the half-plane chart.
    pub fn translation(a: f64) -> Self {
        Isometry {
            kind: IsometryKind::MobiusOrientationPreserving,
            m: [1.0, a, 0.0, 1.0],
        }
    }

    /// (x, y) ↦ (−x, y) in the half-plane chart.
    pub fn reflection_imaginary_axis() -> Self {
        Isometry {
            kind: IsometryKind::Reflection,
            m: [-1.0, 0.0, 0.0, 1.0],
        }
    }

    /// Counterclockwise rotation by `angle` about `center`.
    pub fn rotation_about(center: &HPoint, angle: f64) -> Self {
        let c = center.to_model(Model::HalfPlane);
        let (s, k) = (0.5 * angle).sin_cos();
        let rot = Isometry {
            kind: IsometryKind::MobiusOrientationPreserving,
            m: [k, s, -s, k],
        };
        // S(w) = (w − x)/y sends the center to i.
        let to_i = Isometry::mobius(1.0, -c.x, 0.0, c.y).expect("y > 0");
        to_i.inverse().compose(&rot).compose(&to_i)
    }

    /// Orientation-preserving map sending the complete geodesic through `arc`
    /// onto the imaginary axis of the half-plane chart.
    pub fn geodesic_to_imaginary_axis(arc: &GeodesicArc) -> Self {
        let a = arc.start.to_model(Model::HalfPlane);
        let b = arc.end.to_model(Model::HalfPlane);
        if (a.x - b.x).abs() <= COINCIDENCE_TOL * (1.0 + a.x.abs()) {
            return Isometry::translation(-a.x);
        }
        let c = (b.x * b.x + b.y * b.y - a.x * a.x - a.y * a.y) / (2.0 * (b.x - a.x));
        let r = (a.x - c).hypot(a.y);
        Isometry::mobius(-1.0, c - r, 1.0, -(c + r)).expect("positive determinant")
    }

    /// Reflection across the complete geodesic through `arc`.
    pub fn reflection_in(arc: &GeodesicArc) -> Self {
        let t = Isometry::geodesic_to_imaginary_axis(arc);
        t.inverse()
            .compose(&Isometry::reflection_imaginary_axis())
            .compose(&t)
    }

    pub fn kind(&self) -> IsometryKind {
        self.kind
    }

    /// Normalized coefficients (a, b, c, d) with |ad − bc| = 1.
    pub fn coefficients(&self) -> [f64; 4] {
        self.m
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = other.m;
        let kind = if self.kind == other.kind {
            IsometryKind::MobiusOrientationPreserving
        } else {
            IsometryKind::Reflection
        };
        Isometry::from_matrix(
            kind,
            [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h],
        )
        .expect("composition of isometries")
    }

    pub fn inverse(&self) -> Isometry {
        let [a, b, c, d] = self.m;
        Isometry::from_matrix(self.kind, [d, -b, -c, a]).expect("inverse of isometry")
    }

    fn apply_half_plane(&self, w: Cx) -> Cx {
        let [a, b, c, d] = self.m;
        let w = match self.kind {
            IsometryKind::MobiusOrientationPreserving => w,
            IsometryKind::Reflection => w.conj(),
        };
        w.scale(a)
            .add(Cx::new(b, 0.0))
            .div(w.scale(c).add(Cx::new(d, 0.0)))
    }

    pub fn apply(&self, p: &HPoint) -> HPoint {
        let h = p.to_model(Model::HalfPlane);
        let z = self.apply_half_plane(Cx::new(h.x, h.y));
        HPoint::unchecked(Model::HalfPlane, z.re, z.im.max(f64::MIN_POSITIVE)).to_model(p.model)
    }

    /// Vertical shift of the lift (w, z) ↦ (f(w), z + shift(w)) of an
    /// orientation-preserving map, in the half-plane chart.
    ///
    /// A graph v over the image pulls back to the graph v∘f − shift.
    pub fn lift_shift(&self, p: &HPoint) -> Result<f64> {
        if p.model != Model::HalfPlane {
            return invalid("lifts are provided in the half-plane chart only");
        }
        if self.kind != IsometryKind::MobiusOrientationPreserving {
            return invalid("reflections have no lift");
        }
        let [_, _, c, d] = self.m;
        Ok(-2.0 * Cx::new(c * p.x + d, c * p.y).arg())
    }
}

pub fn apply_isometry(f: &Isometry, p: &HPoint) -> HPoint {
    f.apply(p)
}

fn check_polygon(vertices: &[HPoint]) -> Result<Model> {
    if vertices.len() < 3 {
        return invalid("a polygon needs at least three vertices");
    }
    let model = vertices[0].model;
    if vertices.iter().any(|v| v.model != model) {
        return Err(Error::MixedModels);
    }
    let n = vertices.len();
    for i in 0..n {
        if chart_gap(&vertices[i], &vertices[(i + 1) % n]) <= COINCIDENCE_TOL {
            return Err(Error::Coincident);
        }
    }
    Ok(model)
}

fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn segments_meet(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let eps = 1e-14;
    let d1 = cross2(sub2(p2, p1), sub2(q1, p1));
    let d2 = cross2(sub2(p2, p1), sub2(q2, p1));
    let d3 = cross2(sub2(q2, q1), sub2(p1, q1));
    let d4 = cross2(sub2(q2, q1), sub2(p2, q1));
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    let on = |a: [f64; 2], b: [f64; 2], p: [f64; 2], d: f64| {
        d.abs() <= eps
            && p[0] >= a[0].min(b[0]) - eps
            && p[0] <= a[0].max(b[0]) + eps
            && p[1] >= a[1].min(b[1]) - eps
            && p[1] <= a[1].max(b[1]) + eps
    };
    on(p1, p2, q1, d1) || on(p1, p2, q2, d2) || on(q1, q2, p1, d3) || on(q1, q2, p2, d4)
}

/// Signed area of the vertex polygon in the Klein model (positive when counterclockwise).
pub fn klein_signed_area(vertices: &[HPoint]) -> f64 {
    let k: Vec<[f64; 2]> = vertices.iter().map(|v| v.klein()).collect();
    let n = k.len();
    (0..n).map(|i| cross2(k[i], k[(i + 1) % n])).sum::<f64>() * 0.5
}

fn check_simple(vertices: &[HPoint]) -> Result<()> {
    let k: Vec<[f64; 2]> = vertices.iter().map(|v| v.klein()).collect();
    let n = k.len();
    if klein_signed_area(vertices).abs() <= 1e-14 {
        return Err(Error::NotSimple);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_meet(k[i], k[(i + 1) % n], k[j], k[(j + 1) % n]) {
                return Err(Error::NotSimple);
            }
        }
    }
    // Adjacent edges that fold back onto each other.
    for i in 0..n {
        let a = k[(i + n - 1) % n];
        let b = k[i];
        let c = k[(i + 1) % n];
        let u = sub2(b, a);
        let v = sub2(c, b);
        let cr = cross2(u, v);
        let dot = u[0] * v[0] + u[1] * v[1];
        if cr.abs() <= 1e-14 * (1.0 + dot.abs()) && dot < 0.0 {
            return Err(Error::NotSimple);
        }
    }
    Ok(())
}

/// Signed turning angles at each vertex, measured between geodesic tangents
/// and made positive for turns toward the polygon's interior side.
fn turning_angles(vertices: &[HPoint]) -> Result<Vec<f64>> {
    let n = vertices.len();
    let orient = klein_signed_area(vertices).signum();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let prev = &vertices[(i + n - 1) % n];
        let cur = &vertices[i];
        let next = &vertices[(i + 1) % n];
        let t_in = geodesic_between(prev, cur)?.chart_tangent(1.0);
        let t_out = geodesic_between(cur, next)?.chart_tangent(0.0);
        let turn = cross2(t_in, t_out).atan2(t_in[0] * t_out[0] + t_in[1] * t_out[1]);
        out.push(orient * turn);
    }
    Ok(out)
}

/// Interior angles of a simple geodesic polygon, in either orientation.
pub fn interior_angles(vertices: &[HPoint]) -> Result<Vec<f64>> {
    check_polygon(vertices)?;
    check_simple(vertices)?;
    Ok(turning_angles(vertices)?
        .into_iter()
        .map(|t| PI - t)
        .collect())
}

/// True when the closed geodesic polygon is simple with all interior angles ≤ π.
///
/// Self-intersecting input yields `Error::NotSimple`.
pub fn is_convex_polygon(vertices: &[HPoint]) -> Result<bool> {
    let angles = interior_angles(vertices)?;
    Ok(angles.iter().all(|&a| a <= PI + 1e-12))
}

/// Whether `p` lies in the closed convex geodesic polygon (either orientation).
pub fn convex_polygon_contains(vertices: &[HPoint], p: &HPoint, tol: f64) -> bool {
    let orient = klein_signed_area(vertices).signum();
    let k = p.klein();
    let n = vertices.len();
    (0..n).all(|i| {
        let a = vertices[i].klein();
        let b = vertices[(i + 1) % n].klein();
        let e = sub2(b, a);
        orient * cross2(e, sub2(k, a)) >= -tol * (e[0].hypot(e[1]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn hp(x: f64, y: f64) -> HPoint {
        HPoint::half_plane(x, y).unwrap()
    }

    #[test]
    fn rejects_points_outside_model() {
        assert!(HPoint::half_plane(0.0, 0.0).is_err());
        assert!(HPoint::disc(2.0, 0.0).is_err());
        assert!(HPoint::disc(1.9, 0.0).is_ok());
    }

    #[test]
    fn conformal_factor_examples() {
        let f = conformal_factor(&hp(3.0, 2.0));
        assert_eq!((f.lambda, f.lambda_x, f.lambda_y), (0.5, 0.0, -0.25));
        let f = conformal_factor(&HPoint::disc(0.0, 0.0).unwrap());
        assert_eq!((f.lambda, f.lambda_x, f.lambda_y), (1.0, 0.0, 0.0));
        let f = conformal_factor(&HPoint::disc(1.0, 0.0).unwrap());
        assert_relative_eq!(f.lambda, 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(f.lambda_x, 8.0 / 9.0, epsilon = 1e-15);
        assert_eq!(f.lambda_y, 0.0);
    }

    #[test]
    fn distance_examples() {
        assert_relative_eq!(distance(&hp(0.0, 1.0), &hp(0.0, E)).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(distance(&hp(0.0, 1.0), &hp(0.0, 1.0)).unwrap(), 0.0);
        assert_relative_eq!(
            distance(&hp(-1.0, 1.0), &hp(1.0, 1.0)).unwrap(),
            3f64.acosh(),
            epsilon = 1e-14
        );
        assert_eq!(
            distance(&hp(0.0, 1.0), &HPoint::disc(0.0, 0.0).unwrap()),
            Err(Error::MixedModels)
        );
    }

    #[test]
    fn geodesic_examples() {
        let g = geodesic_between(&hp(0.0, 1.0), &hp(0.0, 4.0)).unwrap();
        assert_eq!(g.shape(), ArcShape::Segment);
        assert_relative_eq!(g.length(), 4f64.ln(), epsilon = 1e-15);

        let g = geodesic_between(&hp(-1.0, 1.0), &hp(1.0, 1.0)).unwrap();
        match g.shape() {
            ArcShape::Circle { cx, cy, radius } => {
                assert_relative_eq!(cx, 0.0);
                assert_eq!(cy, 0.0);
                assert_relative_eq!(radius, 2f64.sqrt(), epsilon = 1e-15);
            }
            _ => panic!("expected a circle"),
        }
        let d0 = HPoint::disc(0.0, 0.0).unwrap();
        let g = geodesic_between(&d0, &HPoint::disc(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(g.shape(), ArcShape::Segment);
        assert_eq!(geodesic_between(&d0, &d0), Err(Error::Coincident));
    }

    #[test]
    fn midpoint_is_equidistant() {
        let pts = [
            (hp(-1.0, 1.0), hp(2.0, 0.5)),
            (hp(0.3, 0.2), hp(0.3, 5.0)),
        ];
        for (p, q) in pts {
            let g = geodesic_between(&p, &q).unwrap();
            let m = g.midpoint();
            assert_relative_eq!(
                distance(&p, &m).unwrap(),
                distance(&m, &q).unwrap(),
                epsilon = 1e-9
            );
        }
        let p = HPoint::disc(-1.2, 0.4).unwrap();
        let q = HPoint::disc(0.5, 1.5).unwrap();
        let g = geodesic_between(&p, &q).unwrap();
        let m = g.midpoint();
        assert_eq!(m.model(), Model::Disc);
        assert_relative_eq!(distance(&p, &m).unwrap(), distance(&m, &q).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn disc_circle_passes_through_endpoints() {
        let p = HPoint::disc(-1.2, 0.4).unwrap();
        let q = HPoint::disc(0.5, 1.5).unwrap();
        let g = geodesic_between(&p, &q).unwrap();
        let [x0, y0] = g.chart_point(0.0);
        let [x1, y1] = g.chart_point(1.0);
        assert_eq!([x0, y0], p.xy());
        assert_eq!([x1, y1], q.xy());
        if let ArcShape::Circle { cx, cy, radius } = g.shape() {
            for t in [0.0, 1.0] {
                let [x, y] = g.chart_point(t);
                assert_relative_eq!((x - cx).hypot(y - cy), radius, epsilon = 1e-12);
            }
            // Orthogonal to the ideal circle of radius 2.
            assert_relative_eq!(cx * cx + cy * cy, radius * radius + 4.0, epsilon = 1e-12);
        } else {
            panic!("expected a circle");
        }
    }

    #[test]
    fn isometry_examples() {
        let p = hp(2.0, 3.0);
        assert_eq!(Isometry::identity().apply(&p), p);
        let s = Isometry::scaling(2.0).unwrap();
        let a = s.apply(&hp(0.0, 1.0));
        let b = s.apply(&hp(0.0, E));
        assert_relative_eq!(distance(&a, &b).unwrap(), 1.0, epsilon = 1e-14);
        let t = Isometry::translation(5.0).apply(&hp(1.0, 1.0));
        assert_eq!(t.xy(), [6.0, 1.0]);
    }

    #[test]
    fn rotation_about_disc_center_turns_counterclockwise() {
        let o = HPoint::disc(0.0, 0.0).unwrap();
        let r = Isometry::rotation_about(&o, PI / 2.0);
        let q = r.apply(&HPoint::disc(1.0, 0.0).unwrap());
        assert_relative_eq!(q.x(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(q.y(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reflection_fixes_its_geodesic() {
        let g = geodesic_between(&hp(-1.0, 1.0), &hp(1.0, 1.0)).unwrap();
        let r = Isometry::reflection_in(&g);
        assert_eq!(r.kind(), IsometryKind::Reflection);
        let m = g.midpoint();
        let rm = r.apply(&m);
        assert_relative_eq!(rm.x(), m.x(), epsilon = 1e-12);
        assert_relative_eq!(rm.y(), m.y(), epsilon = 1e-12);
        let p = hp(0.0, 3.0);
        let rr = r.apply(&r.apply(&p));
        assert_relative_eq!(rr.y(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn distance_to_line_of_imaginary_axis() {
        let g = geodesic_between(&hp(0.0, 1.0), &hp(0.0, 2.0)).unwrap();
        let p = hp(1.0, 1.0);
        assert_relative_eq!(g.distance_to_line(&p).unwrap(), 1f64.asinh(), epsilon = 1e-14);
    }

    #[test]
    fn convexity_examples() {
        let r = 1.9;
        let square: Vec<HPoint> = [45.0f64, 135.0, 225.0, 315.0]
            .iter()
            .map(|a| HPoint::disc(r * a.to_radians().cos(), r * a.to_radians().sin()).unwrap())
            .collect();
        assert_eq!(is_convex_polygon(&square), Ok(true));

        let reflex = vec![
            hp(0.0, 1.0),
            hp(2.0, 1.0),
            hp(1.0, 1.6),
            hp(2.0, 4.0),
            hp(0.0, 4.0),
        ];
        assert_eq!(is_convex_polygon(&reflex), Ok(false));

        let tri = vec![hp(0.0, 1.0), hp(3.0, 2.0), hp(-1.0, 5.0)];
        assert_eq!(is_convex_polygon(&tri), Ok(true));

        let bowtie = vec![hp(0.0, 1.0), hp(2.0, 3.0), hp(2.0, 1.0), hp(0.0, 3.0)];
        assert_eq!(is_convex_polygon(&bowtie), Err(Error::NotSimple));
    }

    #[test]
    fn interior_angles_of_disc_square_are_equal() {
        let r = 1.0;
        let square: Vec<HPoint> = [0.0f64, 90.0, 180.0, 270.0]
            .iter()
            .map(|a| HPoint::disc(r * a.to_radians().cos(), r * a.to_radians().sin()).unwrap())
            .collect();
        let ang = interior_angles(&square).unwrap();
        for a in &ang {
            assert_relative_eq!(*a, ang[0], epsilon = 1e-12);
        }
        // Hyperbolic angle sum is below 2π.
        assert!(ang.iter().sum::<f64>() < 2.0 * PI);
    }
}
