//! Convex domains bounded by geodesic and circular arcs, with boundary labels.

use crate::error::{invalid, Error, Result};
use crate::hyperbolic::{
    conformal_factor, geodesic_between, klein_signed_area, ArcShape, GeodesicArc, HPoint,
    Isometry, IsometryKind, Model, COINCIDENCE_TOL,
};
use crate::invariant::{Branch, CatenoidFamily, Family, HelicoidFamily, ParabolicFamily};
use crate::quadrature::integrate;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// A circular arc of the chart (not a geodesic), given by its endpoints and
/// one interior point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartArc {
    start: HPoint,
    end: HPoint,
    cx: f64,
    cy: f64,
    radius: f64,
    angle0: f64,
    sweep: f64,
}

impl ChartArc {
    pub fn through(start: &HPoint, mid: &HPoint, end: &HPoint) -> Result<Self> {
        if start.model() != mid.model() || start.model() != end.model() {
            return Err(Error::MixedModels);
        }
        let (ax, ay) = (start.x(), start.y());
        let (bx, by) = (mid.x(), mid.y());
        let (qx, qy) = (end.x(), end.y());
        let d = 2.0 * (ax * (by - qy) + bx * (qy - ay) + qx * (ay - by));
        if d.abs() < 1e-14 {
            return invalid("circular arc points are collinear");
        }
        let a2 = ax * ax + ay * ay;
        let b2 = bx * bx + by * by;
        let q2 = qx * qx + qy * qy;
        let cx = (a2 * (by - qy) + b2 * (qy - ay) + q2 * (ay - by)) / d;
        let cy = (a2 * (qx - bx) + b2 * (ax - qx) + q2 * (bx - ax)) / d;
        let radius = (ax - cx).hypot(ay - cy);
        let a0 = (ay - cy).atan2(ax - cx);
        let am = (by - cy).atan2(bx - cx);
        let a1 = (qy - cy).atan2(qx - cx);
        // Choose the sweep direction that passes through the middle point.
        let ccw = |from: f64, to: f64| (to - from).rem_euclid(2.0 * PI);
        let sweep = if ccw(a0, am) < ccw(a0, a1) {
            ccw(a0, a1)
        } else {
            -(2.0 * PI - ccw(a0, a1))
        };
        let arc = ChartArc {
            start: *start,
            end: *end,
            cx,
            cy,
            radius,
            angle0: a0,
            sweep,
        };
        for k in 1..64 {
            let [x, y] = arc.chart_point(k as f64 / 64.0);
            if !start.model().contains(x, y) {
                return invalid("circular arc leaves the model");
            }
        }
        Ok(arc)
    }

    pub fn chart_point(&self, t: f64) -> [f64; 2] {
        if t <= 0.0 {
            return self.start.xy();
        }
        if t >= 1.0 {
            return self.end.xy();
        }
        let a = self.angle0 + t * self.sweep;
        [self.cx + self.radius * a.cos(), self.cy + self.radius * a.sin()]
    }

    pub fn chart_velocity(&self, t: f64) -> [f64; 2] {
        let a = self.angle0 + t * self.sweep;
        [
            -self.radius * self.sweep * a.sin(),
            self.radius * self.sweep * a.cos(),
        ]
    }

    pub fn center(&self) -> [f64; 2] {
        [self.cx, self.cy]
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcCurve {
    Geodesic(GeodesicArc),
    Circular(ChartArc),
}

impl ArcCurve {
    pub fn start(&self) -> HPoint {
        match self {
            ArcCurve::Geodesic(g) => g.start(),
            ArcCurve::Circular(c) => c.start,
        }
    }

    pub fn end(&self) -> HPoint {
        match self {
            ArcCurve::Geodesic(g) => g.end(),
            ArcCurve::Circular(c) => c.end,
        }
    }

    pub fn is_geodesic(&self) -> bool {
        matches!(self, ArcCurve::Geodesic(_))
    }

    pub fn model(&self) -> Model {
        self.start().model()
    }

    /// Chart point at parameter t ∈ [0, 1] (uniform in chart angle or length).
    pub fn chart_point(&self, t: f64) -> [f64; 2] {
        match self {
            ArcCurve::Geodesic(g) => g.chart_point(t),
            ArcCurve::Circular(c) => c.chart_point(t),
        }
    }

    pub fn chart_velocity(&self, t: f64) -> [f64; 2] {
        match self {
            ArcCurve::Geodesic(g) => g.chart_velocity(t),
            ArcCurve::Circular(c) => c.chart_velocity(t),
        }
    }

    pub fn chart_tangent(&self, t: f64) -> [f64; 2] {
        let [vx, vy] = self.chart_velocity(t);
        let n = vx.hypot(vy);
        [vx / n, vy / n]
    }

    pub fn point(&self, t: f64) -> HPoint {
        let [x, y] = self.chart_point(t);
        HPoint::unchecked(self.model(), x, y)
    }

    pub fn chart_length(&self) -> f64 {
        match self {
            ArcCurve::Geodesic(g) => g.chart_length(),
            ArcCurve::Circular(c) => c.radius * c.sweep.abs(),
        }
    }

    /// Hyperbolic length: exact for geodesics, by quadrature otherwise.
    pub fn length(&self) -> f64 {
        match self {
            ArcCurve::Geodesic(g) => g.length(),
            ArcCurve::Circular(_) => {
                let model = self.model();
                let f = |t: f64| {
                    let [x, y] = self.chart_point(t);
                    let [vx, vy] = self.chart_velocity(t);
                    crate::hyperbolic::ConformalFactor::eval(model, x, y).lambda * vx.hypot(vy)
                };
                integrate(f, 0.0, 1.0, 1e-12, 1e-13)
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN)
            }
        }
    }

    /// Geodesic curvature at parameter t, signed positive when the curve bends
    /// to its left.
    pub fn geodesic_curvature_left(&self, t: f64) -> f64 {
        let [x, y] = self.chart_point(t);
        let [tx, ty] = self.chart_tangent(t);
        let n = [-ty, tx];
        let k0 = match self {
            ArcCurve::Geodesic(g) => match g.shape() {
                ArcShape::Segment => 0.0,
                ArcShape::Circle { cx, cy, radius } => {
                    let side = tx * (cy - y) - ty * (cx - x);
                    side.signum() / radius
                }
            },
            ArcCurve::Circular(c) => {
                let side = tx * (c.cy - y) - ty * (c.cx - x);
                side.signum() / c.radius
            }
        };
        let f = crate::hyperbolic::ConformalFactor::eval(self.model(), x, y);
        (k0 - (f.lambda_x * n[0] + f.lambda_y * n[1]) / f.lambda) / f.lambda
    }

    fn mapped(&self, f: &Isometry) -> Result<ArcCurve> {
        let a = f.apply(&self.start());
        let b = f.apply(&self.end());
        match self {
            ArcCurve::Geodesic(_) => Ok(ArcCurve::Geodesic(geodesic_between(&a, &b)?)),
            ArcCurve::Circular(_) => {
                let m = f.apply(&self.point(0.5));
                Ok(ArcCurve::Circular(ChartArc::through(&a, &m, &b)?))
            }
        }
    }

    fn reversed(&self) -> Result<ArcCurve> {
        match self {
            ArcCurve::Geodesic(g) => Ok(ArcCurve::Geodesic(g.reversed())),
            ArcCurve::Circular(c) => Ok(ArcCurve::Circular(ChartArc::through(
                &c.end,
                &self.point(0.5),
                &c.start,
            )?)),
        }
    }
}

/// Boundary values on a finite arc.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    Constant(f64),
    /// Σ coef·x^px·y^py in chart coordinates.
    Polynomial(Vec<(f64, u32, u32)>),
    Family(Family),
    /// v ↦ v∘g − shift_g, the pull-back of data through a lifted isometry g.
    Pulled { inner: Arc<BoundaryData>, map: Isometry },
}

impl BoundaryData {
    pub fn eval(&self, p: &HPoint) -> Result<f64> {
        match self {
            BoundaryData::Constant(c) => Ok(*c),
            BoundaryData::Polynomial(terms) => Ok(terms
                .iter()
                .map(|&(c, i, j)| c * p.x().powi(i as i32) * p.y().powi(j as i32))
                .sum()),
            BoundaryData::Family(f) => f.value(&p.to_model(f.model())),
            BoundaryData::Pulled { inner, map } => {
                let q = map.apply(p);
                let shift = if p.model() == Model::HalfPlane {
                    map.lift_shift(p)?
                } else {
                    0.0
                };
                Ok(inner.eval(&q)? - shift)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArcLabel {
    Finite(BoundaryData),
    PlusInf,
    MinusInf,
}

impl ArcLabel {
    pub fn is_finite(&self) -> bool {
        matches!(self, ArcLabel::Finite(_))
    }

    pub fn short(&self) -> &'static str {
        match self {
            ArcLabel::Finite(_) => "finite",
            ArcLabel::PlusInf => "plus-inf",
            ArcLabel::MinusInf => "minus-inf",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryArc {
    pub curve: ArcCurve,
    pub label: ArcLabel,
}

/// Arc `i` runs from vertex `i` to vertex `i + 1`; vertices are counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    model: Model,
    vertices: Vec<HPoint>,
    arcs: Vec<BoundaryArc>,
}

/// Arc description used to build a domain: optional interior point for a
/// non-geodesic circular arc, and the label.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcInput {
    pub through: Option<HPoint>,
    pub label: ArcLabel,
}

impl ArcInput {
    pub fn geodesic(label: ArcLabel) -> Self {
        ArcInput {
            through: None,
            label,
        }
    }
}

impl DomainSpec {
    pub fn new(vertices: Vec<HPoint>, arcs: Vec<ArcInput>) -> Result<Self> {
        if vertices.len() < 3 {
            return invalid("a domain needs at least three vertices");
        }
        if arcs.len() != vertices.len() {
            return invalid("one arc per vertex is required");
        }
        let model = vertices[0].model();
        if vertices.iter().any(|v| v.model() != model) {
            return Err(Error::MixedModels);
        }
        let n = vertices.len();
        let mut out = Vec::with_capacity(n);
        for (i, a) in arcs.into_iter().enumerate() {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            let curve = match a.through {
                None => ArcCurve::Geodesic(geodesic_between(&p, &q)?),
                Some(m) => ArcCurve::Circular(ChartArc::through(&p, &m, &q)?),
            };
            out.push(BoundaryArc {
                curve,
                label: a.label,
            });
        }
        let d = DomainSpec {
            model,
            vertices,
            arcs: out,
        };
        d.validate()?;
        Ok(d)
    }

    /// Geodesic polygon with the given labels.
    pub fn polygon(vertices: Vec<HPoint>, labels: Vec<ArcLabel>) -> Result<Self> {
        Self::new(vertices, labels.into_iter().map(ArcInput::geodesic).collect())
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        crate::hyperbolic::interior_angles(&self.vertices)?;
        if klein_signed_area(&self.vertices) <= 0.0 {
            return invalid("vertices must be listed counterclockwise");
        }
        for (i, a) in self.arcs.iter().enumerate() {
            if !a.label.is_finite() && !a.curve.is_geodesic() {
                return invalid(format!("arc {i}: infinite labels need a geodesic arc"));
            }
            // Local convexity along the arc.
            for k in 0..=32 {
                let t = k as f64 / 32.0;
                if a.curve.geodesic_curvature_left(t) < -1e-9 {
                    return invalid(format!("arc {i} is not convex toward the domain"));
                }
            }
            let next = &self.arcs[(i + 1) % n];
            let t_in = a.curve.chart_tangent(1.0);
            let t_out = next.curve.chart_tangent(0.0);
            let turn = (t_in[0] * t_out[1] - t_in[1] * t_out[0])
                .atan2(t_in[0] * t_out[0] + t_in[1] * t_out[1]);
            if turn < -1e-12 {
                return invalid(format!("reflex corner at vertex {}", (i + 1) % n));
            }
            let same = matches!(
                (&a.label, &next.label),
                (ArcLabel::PlusInf, ArcLabel::PlusInf) | (ArcLabel::MinusInf, ArcLabel::MinusInf)
            );
            if same {
                return invalid(format!(
                    "arcs {i} and {} carry the same infinite label and share an endpoint",
                    (i + 1) % n
                ));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn vertices(&self) -> &[HPoint] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[BoundaryArc] {
        &self.arcs
    }

    pub fn all_finite(&self) -> bool {
        self.arcs.iter().all(|a| a.label.is_finite())
    }

    pub fn all_geodesic(&self) -> bool {
        self.arcs.iter().all(|a| a.curve.is_geodesic())
    }

    /// Indices of arcs labelled ±∞.
    pub fn infinite_arcs(&self) -> Vec<usize> {
        (0..self.arcs.len())
            .filter(|&i| !self.arcs[i].label.is_finite())
            .collect()
    }

    /// Copy with each ±∞ arc replaced by the constant ±cap.
    pub fn capped(&self, cap: f64) -> DomainSpec {
        let mut d = self.clone();
        for a in &mut d.arcs {
            a.label = match &a.label {
                ArcLabel::PlusInf => ArcLabel::Finite(BoundaryData::Constant(cap)),
                ArcLabel::MinusInf => ArcLabel::Finite(BoundaryData::Constant(-cap)),
                other => other.clone(),
            };
        }
        d
    }

    /// Copy with new labels on the same arcs.
    pub fn relabeled(&self, labels: Vec<ArcLabel>) -> Result<DomainSpec> {
        if labels.len() != self.arcs.len() {
            return invalid("label count differs from arc count");
        }
        let mut d = self.clone();
        for (a, l) in d.arcs.iter_mut().zip(labels) {
            a.label = l;
        }
        d.validate()?;
        Ok(d)
    }

    /// Copy with +∞ and −∞ labels exchanged.
    pub fn swapped_infinities(&self) -> DomainSpec {
        let mut d = self.clone();
        for a in &mut d.arcs {
            a.label = match &a.label {
                ArcLabel::PlusInf => ArcLabel::MinusInf,
                ArcLabel::MinusInf => ArcLabel::PlusInf,
                other => other.clone(),
            };
        }
        d
    }

    /// Image of the domain under a plane isometry. Finite data is pulled back
    /// through the lifted inverse; reflections are accepted only when all
    /// finite data is constant. Orientation-reversing maps reverse the arc
    /// order, so arc `i` of the image corresponds to arc `map_index(i)`.
    pub fn transformed(&self, f: &Isometry) -> Result<(DomainSpec, Vec<usize>)> {
        let n = self.arcs.len();
        let inv = f.inverse();
        let reflect = f.kind() == IsometryKind::Reflection;
        let mut arcs = Vec::with_capacity(n);
        for a in &self.arcs {
            let curve = a.curve.mapped(f)?;
            let label = match &a.label {
                ArcLabel::Finite(BoundaryData::Constant(c)) => {
                    ArcLabel::Finite(BoundaryData::Constant(*c))
                }
                ArcLabel::Finite(d) => {
                    if reflect {
                        return invalid("reflections only transport constant data");
                    }
                    ArcLabel::Finite(BoundaryData::Pulled {
                        inner: Arc::new(d.clone()),
                        map: inv,
                    })
                }
                other => other.clone(),
            };
            arcs.push(BoundaryArc { curve, label });
        }
        let verts: Vec<HPoint> = self.vertices.iter().map(|v| f.apply(v)).collect();
        if !reflect {
            let d = DomainSpec {
                model: self.model,
                vertices: verts,
                arcs,
            };
            d.validate()?;
            return Ok((d, (0..n).collect()));
        }
        // Reverse: new vertex k is old vertex (n − k) mod n, and new arc k
        // (from new vertex k to k + 1) is old arc n − 1 − k reversed.
        let vertices: Vec<HPoint> = (0..n).map(|k| verts[(n - k) % n]).collect();
        let mut new_arcs = Vec::with_capacity(n);
        let mut index = vec![0; n];
        for k in 0..n {
            let old = n - 1 - k;
            index[k] = old;
            new_arcs.push(BoundaryArc {
                curve: arcs[old].curve.reversed()?,
                label: arcs[old].label.clone(),
            });
        }
        let d = DomainSpec {
            model: self.model,
            vertices,
            arcs: new_arcs,
        };
        d.validate()?;
        Ok((d, index))
    }

    /// Approximate containment test using a fine sampling of the boundary.
    pub fn contains(&self, p: &HPoint) -> bool {
        if p.model() != self.model {
            return false;
        }
        let poly = self.boundary_polyline(64);
        point_in_polygon(&poly, p.xy())
    }

    /// Closed chart polyline through `per_arc` samples of every arc.
    pub fn boundary_polyline(&self, per_arc: usize) -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        for a in &self.arcs {
            for k in 0..per_arc {
                out.push(a.curve.chart_point(k as f64 / per_arc as f64));
            }
        }
        out
    }

    pub fn perimeter(&self) -> f64 {
        self.arcs.iter().map(|a| a.curve.length()).sum()
    }
}

pub(crate) fn point_in_polygon(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

// ---------------------------------------------------------------------------
// Text format.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataFile {
    Constant { value: f64 },
    Polynomial { terms: Vec<[f64; 3]> },
    Helicoid { c: f64, branch: Branch },
    Parabolic { c: f64, branch: Branch },
    Catenoid { c: f64, branch: Branch },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelFile {
    Finite,
    PlusInf,
    MinusInf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcFile {
    pub label: LabelFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub through: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataFile>,
}

/// On-disk domain description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub model: Model,
    pub vertices: Vec<[f64; 2]>,
    pub arcs: Vec<ArcFile>,
    /// Exact solution, when the boundary data samples a known family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<DataFile>,
}

impl DataFile {
    pub fn to_data(&self) -> Result<BoundaryData> {
        Ok(match self {
            DataFile::Constant { value } => BoundaryData::Constant(*value),
            DataFile::Polynomial { terms } => {
                let mut out = Vec::with_capacity(terms.len());
                for &[c, i, j] in terms {
                    let ok = |e: f64| e >= 0.0 && e.fract() == 0.0 && e <= 64.0;
                    if !ok(i) || !ok(j) {
                        return invalid("polynomial exponents must be small non-negative integers");
                    }
                    out.push((c, i as u32, j as u32));
                }
                BoundaryData::Polynomial(out)
            }
            DataFile::Helicoid { c, branch } => {
                BoundaryData::Family(Family::Helicoid(HelicoidFamily::new(*c, *branch)?))
            }
            DataFile::Parabolic { c, branch } => {
                BoundaryData::Family(Family::Parabolic(ParabolicFamily::new(*c, *branch)?))
            }
            DataFile::Catenoid { c, branch } => {
                BoundaryData::Family(Family::Catenoid(CatenoidFamily::new(*c, *branch)?))
            }
        })
    }
}

impl DomainFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Invalid(format!("domain file: {e}")))
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("domain files serialize")
    }

    pub fn build(&self) -> Result<DomainSpec> {
        let model = self.model;
        let vertices = self
            .vertices
            .iter()
            .map(|&[x, y]| HPoint::new(model, x, y))
            .collect::<Result<Vec<_>>>()?;
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (i, a) in self.arcs.iter().enumerate() {
            let label = match (a.label, &a.data) {
                (LabelFile::Finite, Some(d)) => ArcLabel::Finite(d.to_data()?),
                (LabelFile::Finite, None) => {
                    return invalid(format!("arc {i}: finite arcs need data"));
                }
                (LabelFile::PlusInf, None) => ArcLabel::PlusInf,
                (LabelFile::MinusInf, None) => ArcLabel::MinusInf,
                (_, Some(_)) => return invalid(format!("arc {i}: infinite arcs take no data")),
            };
            let through = match a.through {
                Some([x, y]) => Some(HPoint::new(model, x, y)?),
                None => None,
            };
            arcs.push(ArcInput { through, label });
        }
        DomainSpec::new(vertices, arcs)
    }

    pub fn exact_solution(&self) -> Result<Option<BoundaryData>> {
        self.exact.as_ref().map(|d| d.to_data()).transpose()
    }
}

/// Distinct chart points closer than this are considered equal vertices.
pub const VERTEX_TOL: f64 = COINCIDENCE_TOL;

/// Hyperbolic length of the chart straight segment from `a` to `b`.
pub fn chart_segment_length(model: Model, a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let l = d[0].hypot(d[1]);
    crate::quadrature::gauss_legendre(
        |t| {
            let p = HPoint::unchecked(model, a[0] + t * d[0], a[1] + t * d[1]);
            conformal_factor(&p).lambda * l
        },
        0.0,
        1.0,
        4,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hp(x: f64, y: f64) -> HPoint {
        HPoint::half_plane(x, y).unwrap()
    }

    fn zero() -> ArcLabel {
        ArcLabel::Finite(BoundaryData::Constant(0.0))
    }

    fn quad() -> Vec<HPoint> {
        vec![hp(-1.0, 1.0), hp(1.0, 1.0), hp(1.0, 2.5), hp(-1.0, 2.5)]
    }

    #[test]
    fn builds_geodesic_quadrilateral() {
        let d = DomainSpec::polygon(quad(), vec![zero(), ArcLabel::PlusInf, zero(), ArcLabel::PlusInf])
            .unwrap();
        assert_eq!(d.infinite_arcs(), vec![1, 3]);
        assert!(d.all_geodesic());
        assert!(d.contains(&hp(0.0, 2.0)));
        assert!(!d.contains(&hp(0.0, 1.2)));
    }

    #[test]
    fn rejects_clockwise_and_adjacent_infinities() {
        let mut v = quad();
        v.reverse();
        assert!(DomainSpec::polygon(v, vec![zero(), zero(), zero(), zero()]).is_err());
        assert!(DomainSpec::polygon(
            quad(),
            vec![ArcLabel::PlusInf, ArcLabel::PlusInf, zero(), zero()]
        )
        .is_err());
    }

    #[test]
    fn circular_arcs_must_bulge_outward() {
        let mut arcs: Vec<ArcInput> = (0..4).map(|_| ArcInput::geodesic(zero())).collect();
        arcs[2].through = Some(hp(0.0, 3.2));
        assert!(DomainSpec::new(quad(), arcs.clone()).is_ok());
        arcs[2].through = Some(hp(0.0, 2.0));
        assert!(DomainSpec::new(quad(), arcs.clone()).is_err());
        arcs[2].through = Some(hp(0.0, 3.2));
        arcs[2].label = ArcLabel::PlusInf;
        assert!(DomainSpec::new(quad(), arcs).is_err());
    }

    #[test]
    fn circular_length_exceeds_geodesic_length() {
        let g = ArcCurve::Geodesic(geodesic_between(&hp(1.0, 2.5), &hp(-1.0, 2.5)).unwrap());
        let c = ArcCurve::Circular(
            ChartArc::through(&hp(1.0, 2.5), &hp(0.0, 3.2), &hp(-1.0, 2.5)).unwrap(),
        );
        assert!(c.length() > g.length());
        // Geodesic arcs have zero geodesic curvature.
        assert!(g.geodesic_curvature_left(0.3).abs() < 1e-12);
    }

    #[test]
    fn parses_domain_file() {
        let text = r#"
model = "half-plane"
vertices = [[-1.0, 1.0], [1.0, 1.0], [1.0, 2.5], [-1.0, 2.5]]

[[arcs]]
label = "finite"
data = { kind = "constant", value = 0.0 }

[[arcs]]
label = "plus-inf"

[[arcs]]
label = "finite"
through = [0.0, 3.2]
data = { kind = "polynomial", terms = [[2.0, 1, 0], [1.0, 0, 2]] }

[[arcs]]
label = "finite"
data = { kind = "helicoid", c = 0.0, branch = "plus" }
"#;
        let f = DomainFile::parse(text).unwrap();
        let d = f.build().unwrap();
        assert_eq!(d.arcs().len(), 4);
        match &d.arcs()[2].label {
            ArcLabel::Finite(data) => {
                assert_relative_eq!(data.eval(&hp(0.5, 2.0)).unwrap(), 1.0 + 4.0);
            }
            _ => panic!("expected finite data"),
        }
        let again = DomainFile::parse(&f.to_text()).unwrap();
        assert_eq!(again, f);
        assert!(DomainFile::parse("model = \"sphere\"").is_err());
    }

    #[test]
    fn transformed_domains_keep_lengths() {
        let d = DomainSpec::polygon(quad(), vec![zero(), ArcLabel::PlusInf, zero(), ArcLabel::MinusInf])
            .unwrap();
        let f = Isometry::mobius(1.0, 0.3, 0.4, 1.5).unwrap();
        let (e, idx) = d.transformed(&f).unwrap();
        for (k, a) in e.arcs().iter().enumerate() {
            assert_relative_eq!(a.curve.length(), d.arcs()[idx[k]].curve.length(), epsilon = 1e-9);
        }
        let (r, idx) = d.transformed(&Isometry::reflection_imaginary_axis()).unwrap();
        for (k, a) in r.arcs().iter().enumerate() {
            assert_eq!(a.label.short(), d.arcs()[idx[k]].label.short());
            assert_relative_eq!(a.curve.length(), d.arcs()[idx[k]].curve.length(), epsilon = 1e-9);
        }
    }

    #[test]
    fn pulled_data_matches_source_values() {
        let data = BoundaryData::Family(Family::Parabolic(
            ParabolicFamily::new(2.0, Branch::Plus).unwrap(),
        ));
        let g = Isometry::translation(3.0);
        let pulled = BoundaryData::Pulled {
            inner: Arc::new(data.clone()),
            map: g.inverse(),
        };
        let p = hp(3.5, 1.2);
        assert_relative_eq!(
            pulled.eval(&p).unwrap(),
            data.eval(&hp(0.5, 1.2)).unwrap(),
            epsilon = 1e-14
        );
    }
}
