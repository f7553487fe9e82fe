//! Minimal graphs invariant under one-parameter isometry groups: the
//! helicoid family (rotation-type, half-plane polar angle), the catenoid
//! family (radial, disc) and the parabolic family (horizontal translations,
//! half-plane).

use crate::error::{invalid, Result};
use crate::geometry::{mse_residual, GraphJet2};
use crate::hyperbolic::{HPoint, Model};
use crate::quadrature::integrate;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

/// Distance below which an evaluation counts as touching a singular line.
pub const SINGULAR_FLAG_TOL: f64 = 1e-9;
const PROFILE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Profile value with a flag raised when the argument sits within
/// `SINGULAR_FLAG_TOL` of a singular line of the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileValue {
    pub value: f64,
    pub near_singular: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelicoidFamily {
    c: f64,
    branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatenoidFamily {
    c: f64,
    branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicFamily {
    c: f64,
    branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Helicoid(HelicoidFamily),
    Catenoid(CatenoidFamily),
    Parabolic(ParabolicFamily),
}

/// θ₁ = arcsin(1/√C) and θ₂ = π − θ₁ for C > 1.
pub fn helicoid_theta_limits(c: f64) -> Result<(f64, f64)> {
    if !(c > 1.0) || !c.is_finite() {
        return invalid(format!("theta limits need C > 1, got {c}"));
    }
    let t1 = (1.0 / c.sqrt()).asin();
    Ok((t1, PI - t1))
}

fn sinc(s: f64) -> f64 {
    if s.abs() < 1e-4 {
        1.0 - s * s / 6.0
    } else {
        s.sin() / s
    }
}

impl HelicoidFamily {
    pub fn new(c: f64, branch: Branch) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return invalid(format!("helicoid parameter must be finite and ≥ 0, got {c}"));
        }
        Ok(HelicoidFamily { c, branch })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// Open θ-intervals on which the profile is defined.
    pub fn components(&self) -> Vec<(f64, f64)> {
        if self.c < 1.0 {
            vec![(0.0, PI)]
        } else if self.c == 1.0 {
            vec![(0.0, FRAC_PI_2), (FRAC_PI_2, PI)]
        } else {
            let (t1, t2) = helicoid_theta_limits(self.c).expect("C > 1");
            vec![(0.0, t1), (t2, PI)]
        }
    }

    /// g(θ) = √(1 + cos²θ) / √(1 − C sin²θ).
    pub fn integrand(&self, theta: f64) -> f64 {
        let (s, co) = theta.sin_cos();
        (1.0 + co * co).sqrt() / (1.0 - self.c * s * s).sqrt()
    }

    /// ∫₀^θ g for θ in the first component, θ ≤ π/2.
    fn integral_from_zero(&self, theta: f64, tol: f64) -> Result<f64> {
        let c = self.c;
        if c > 1.0 {
            let (t1, _) = helicoid_theta_limits(c)?;
            let split = 0.5 * t1;
            if theta <= split {
                return Ok(integrate(|t| self.integrand(t), 0.0, theta, tol, 0.0)?.value);
            }
            let head = integrate(|t| self.integrand(t), 0.0, split, tol, 0.0)?.value;
            // φ = θ₁ − t²; 1 − C sin²φ = C sin(2θ₁ − t²) sin(t²).
            let tail_fn = |t: f64| {
                let s2 = t * t;
                let phi = t1 - s2;
                let co = phi.cos();
                2.0 * (1.0 + co * co).sqrt() / (c * (2.0 * t1 - s2).sin() * sinc(s2)).sqrt()
            };
            let lo = (t1 - theta).max(0.0).sqrt();
            let tail = integrate(tail_fn, lo, split.sqrt(), tol, 0.0)?.value;
            Ok(head + tail)
        } else if c == 1.0 && theta > FRAC_PI_4 {
            // φ = π/2 − e^v turns the logarithmic blow-up into a smooth integrand.
            let head = integrate(|t| self.integrand(t), 0.0, FRAC_PI_4, tol, 0.0)?.value;
            let tail_fn = |v: f64| {
                let e = v.exp();
                let s = e.sin();
                (1.0 + s * s).sqrt() / sinc(e)
            };
            let lo = (FRAC_PI_2 - theta).ln();
            let tail = integrate(tail_fn, lo, FRAC_PI_4.ln(), tol, 0.0)?.value;
            Ok(head + tail)
        } else {
            Ok(integrate(|t| self.integrand(t), 0.0, theta, tol, 0.0)?.value)
        }
    }

    fn check_theta(&self, theta: f64) -> Result<bool> {
        if !(0.0..=PI).contains(&theta) {
            return invalid(format!("θ = {theta} is outside [0, π]"));
        }
        let c = self.c;
        if c == 1.0 {
            let gap = (theta - FRAC_PI_2).abs();
            if gap == 0.0 {
                return invalid("θ = π/2 is singular for C = 1");
            }
            return Ok(gap <= SINGULAR_FLAG_TOL);
        }
        if c > 1.0 {
            let (t1, t2) = helicoid_theta_limits(c)?;
            if theta > t1 + SINGULAR_FLAG_TOL && theta < t2 - SINGULAR_FLAG_TOL {
                return invalid(format!("θ = {theta} lies in the gap ({t1}, {t2})"));
            }
            return Ok((theta - t1).abs() <= SINGULAR_FLAG_TOL
                || (theta - t2).abs() <= SINGULAR_FLAG_TOL);
        }
        Ok(false)
    }

    /// Signed integral I with I' = g, anchored at 0 on components touching 0
    /// and at π on the components touching π.
    fn anchored_integral(&self, theta: f64, tol: f64) -> Result<f64> {
        if self.c < 1.0 {
            if theta <= FRAC_PI_2 {
                return self.integral_from_zero(theta, tol);
            }
            // g(π − θ) = g(θ), so ∫₀^θ = 2∫₀^{π/2} − ∫₀^{π−θ}.
            let half = self.integral_from_zero(FRAC_PI_2, tol)?;
            return Ok(2.0 * half - self.integral_from_zero(PI - theta, tol)?);
        }
        if theta > FRAC_PI_2 {
            Ok(-self.integral_from_zero((PI - theta).min(FRAC_PI_2), tol)?)
        } else {
            self.integral_from_zero(theta.min(FRAC_PI_2), tol)
        }
    }

    fn clamp_to_domain(&self, theta: f64) -> f64 {
        if self.c > 1.0 {
            let (t1, t2) = helicoid_theta_limits(self.c).expect("C > 1");
            if theta > t1 && theta <= FRAC_PI_2 {
                return t1;
            }
            if theta < t2 && theta > FRAC_PI_2 {
                return t2;
            }
        }
        theta
    }

    /// u(θ) = θ ± √C·I(θ).
    pub fn profile(&self, theta: f64) -> Result<ProfileValue> {
        let near_singular = self.check_theta(theta)?;
        let th = self.clamp_to_domain(theta);
        let i = if self.c == 0.0 {
            0.0
        } else {
            self.anchored_integral(th, PROFILE_TOL)?
        };
        Ok(ProfileValue {
            value: th + self.branch.sign() * self.c.sqrt() * i,
            near_singular,
        })
    }

    /// u_θ = 1 ± √C g(θ).
    pub fn slope(&self, theta: f64) -> f64 {
        1.0 + self.branch.sign() * self.c.sqrt() * self.integrand(theta)
    }

    /// u_θθ from differentiating the first integral.
    pub fn curvature(&self, theta: f64) -> f64 {
        let (s, co) = theta.sin_cos();
        let ut = self.slope(theta);
        s * co * (ut - 1.0) * (ut * ut - 2.0 * ut) / (2.0 - s * s)
    }

    pub fn jet(&self, p: &HPoint) -> Result<GraphJet2> {
        if p.model() != Model::HalfPlane {
            return invalid("helicoid profiles live in the half-plane chart");
        }
        let (x, y) = (p.x(), p.y());
        let theta = y.atan2(x);
        let r = x.hypot(y);
        let u = self.profile(theta)?.value;
        let ut = self.slope(theta);
        let utt = self.curvature(theta);
        let (s, c) = theta.sin_cos();
        let r2 = r * r;
        Ok(GraphJet2 {
            p: *p,
            u,
            u_x: -s / r * ut,
            u_y: c / r * ut,
            u_xx: (s * s * utt + 2.0 * s * c * ut) / r2,
            u_xy: (-s * c * utt + (s * s - c * c) * ut) / r2,
            u_yy: (c * c * utt - 2.0 * s * c * ut) / r2,
        })
    }
}

/// Residual of θ''(2 − sin²θ) + sinθ cosθ (θ' − 1)(2θ' − 1).
pub fn regularity_ode_residual(theta: f64, d1: f64, d2: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    d2 * (2.0 - s * s) + s * c * (d1 - 1.0) * (2.0 * d1 - 1.0)
}

/// Height of the doubled profile through the vertical-tangent line θ = θ₁:
/// the Plus sheet below and the Minus sheet above, both translated to pass
/// through (θ₁, θ₁).
struct DoubledProfile {
    plus: HelicoidFamily,
    minus: HelicoidFamily,
    t1: f64,
    shift_plus: f64,
    shift_minus: f64,
}

impl DoubledProfile {
    fn new(c: f64) -> Result<Self> {
        let (t1, _) = helicoid_theta_limits(c)?;
        let plus = HelicoidFamily::new(c, Branch::Plus)?;
        let minus = HelicoidFamily::new(c, Branch::Minus)?;
        let shift_plus = t1 - plus.profile(t1)?.value;
        let shift_minus = t1 - minus.profile(t1)?.value;
        Ok(DoubledProfile {
            plus,
            minus,
            t1,
            shift_plus,
            shift_minus,
        })
    }

    /// θ(z), obtained by inverting the appropriate sheet.
    fn theta(&self, z: f64) -> Result<f64> {
        if z == self.t1 {
            return Ok(self.t1);
        }
        let (fam, shift) = if z < self.t1 {
            (&self.plus, self.shift_plus)
        } else {
            (&self.minus, self.shift_minus)
        };
        let f = |th: f64| -> Result<f64> { Ok(fam.profile(th)?.value + shift - z) };
        // The sheet is monotone on (0, θ₁]; bracket and refine.
        let mut lo = 0.0;
        let mut hi = self.t1;
        let flo = f(lo)?;
        let fhi = f(hi)?;
        if flo.signum() == fhi.signum() {
            return invalid(format!("height {z} is outside the doubled profile"));
        }
        let increasing = fhi > flo;
        let mut th = 0.5 * (lo + hi);
        for _ in 0..200 {
            let v = f(th)?;
            let slope = fam.slope(th);
            let step = v / slope;
            if v == 0.0 || step.abs() <= 2.0 * f64::EPSILON * th || hi - lo <= f64::EPSILON * th {
                return Ok(th);
            }
            if (v > 0.0) == increasing {
                hi = th;
            } else {
                lo = th;
            }
            // Newton step with the analytic slope, kept inside the bracket.
            let cand = th - step;
            th = if slope.is_finite() && cand > lo && cand < hi {
                cand
            } else {
                0.5 * (lo + hi)
            };
        }
        Ok(th)
    }
}

/// Largest residual of the vertical-graph equation along the doubled profile, sampled at
/// `samples` heights with |z − θ₁| < `half_width`. Derivatives of θ(z) are
/// taken by fourth-order central differences of the inverted quadrature
/// profile.
pub fn helicoid_regularity_residual(c: f64, samples: usize, half_width: f64) -> Result<f64> {
    if samples < 10 {
        return invalid("at least 10 samples are needed");
    }
    if !(half_width > 0.0) {
        return invalid("half width must be positive");
    }
    let prof = DoubledProfile::new(c)?;
    let h = 2e-3;
    let span = half_width - 2.0 * h;
    if span <= 0.0 {
        return invalid("half width too small for the difference stencil");
    }
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let z = prof.t1 - span + 2.0 * span * k as f64 / (samples - 1) as f64;
        let t = |dz: f64| prof.theta(z + dz);
        let (m2, m1, c0, p1, p2) = (t(-2.0 * h)?, t(-h)?, t(0.0)?, t(h)?, t(2.0 * h)?);
        let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let d2 = (-m2 + 16.0 * m1 - 30.0 * c0 + 16.0 * p1 - p2) / (12.0 * h * h);
        worst = worst.max(regularity_ode_residual(c0, d1, d2).abs());
    }
    Ok(worst)
}

/// Waist radius r₀ = √((8 + C − √((8 + C)² − 64)) / 2).
pub fn catenoid_r0(c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return invalid(format!("catenoid parameter must be positive, got {c}"));
    }
    let a = 8.0 + c;
    // 8 + C − √((8+C)² − 64) = 64 / (8 + C + √(...)), free of cancellation.
    let disc = (a * a - 64.0).sqrt();
    Ok((32.0 / (a + disc)).sqrt())
}

impl CatenoidFamily {
    pub fn new(c: f64, branch: Branch) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return invalid(format!("catenoid parameter must be positive, got {c}"));
        }
        Ok(CatenoidFamily { c, branch })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn r0(&self) -> f64 {
        catenoid_r0(self.c).expect("validated")
    }

    /// D(r) = Cr² − (r² − 4)² in the factored form (r² − r₀²)(r₁² − r²).
    fn d_and_derivative(&self, r: f64) -> (f64, f64) {
        let r0 = self.r0();
        let r0s = r0 * r0;
        let r1s = 16.0 / r0s;
        let r2 = r * r;
        let lo = (r - r0) * (r + r0);
        let hi = r1s - r2;
        (lo * hi, 2.0 * r * hi - 2.0 * r * lo)
    }

    /// u_r = ±2√((r² + 4)/D).
    pub fn slope(&self, r: f64) -> f64 {
        let (d, _) = self.d_and_derivative(r);
        self.branch.sign() * 2.0 * ((r * r + 4.0) / d).sqrt()
    }

    pub fn curvature(&self, r: f64) -> f64 {
        let (d, dp) = self.d_and_derivative(r);
        self.slope(r) * (r / (r * r + 4.0) - dp / (2.0 * d))
    }

    /// u(r) = ∫_{r₀}^r u_r, with the substitution t = √(r − r₀).
    pub fn profile(&self, r: f64) -> Result<ProfileValue> {
        let r0 = self.r0();
        if !(r >= r0 && r < 2.0) {
            return invalid(format!("r = {r} is outside [r₀, 2) = [{r0}, 2)"));
        }
        let near_singular = r - r0 <= SINGULAR_FLAG_TOL;
        let r1s = 16.0 / (r0 * r0);
        let f = |t: f64| {
            let rr = r0 + t * t;
            4.0 * (rr * rr + 4.0).sqrt() / ((2.0 * r0 + t * t) * (r1s - rr * rr)).sqrt()
        };
        let v = integrate(f, 0.0, (r - r0).sqrt(), PROFILE_TOL, 0.0)?.value;
        Ok(ProfileValue {
            value: self.branch.sign() * v,
            near_singular,
        })
    }

    pub fn jet(&self, p: &HPoint) -> Result<GraphJet2> {
        if p.model() != Model::Disc {
            return invalid("catenoid profiles live in the disc chart");
        }
        let (x, y) = (p.x(), p.y());
        let r = x.hypot(y);
        let u = self.profile(r)?.value;
        let ur = self.slope(r);
        let urr = self.curvature(r);
        let r2 = r * r;
        let r3 = r2 * r;
        Ok(GraphJet2 {
            p: *p,
            u,
            u_x: x / r * ur,
            u_y: y / r * ur,
            u_xx: x * x / r2 * urr + y * y / r3 * ur,
            u_xy: x * y / r2 * urr - x * y / r3 * ur,
            u_yy: y * y / r2 * urr + x * x / r3 * ur,
        })
    }
}

impl ParabolicFamily {
    pub fn new(c: f64, branch: Branch) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return invalid(format!("parabolic parameter must be positive, got {c}"));
        }
        Ok(ParabolicFamily { c, branch })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// u = ±√2 arcsin(y/C) ∓ √2π/2, written as ∓√2 arccos(y/C).
    pub fn profile(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y <= self.c) {
            return invalid(format!("y = {y} is outside (0, {}]", self.c));
        }
        Ok(-self.branch.sign() * SQRT_2 * (y / self.c).acos())
    }

    pub fn slope(&self, y: f64) -> f64 {
        self.branch.sign() * SQRT_2 / ((self.c - y) * (self.c + y)).sqrt()
    }

    pub fn curvature(&self, y: f64) -> f64 {
        let q = (self.c - y) * (self.c + y);
        self.branch.sign() * SQRT_2 * y / (q * q.sqrt())
    }

    pub fn jet(&self, p: &HPoint) -> Result<GraphJet2> {
        if p.model() != Model::HalfPlane {
            return invalid("parabolic profiles live in the half-plane chart");
        }
        let y = p.y();
        Ok(GraphJet2 {
            p: *p,
            u: self.profile(y)?,
            u_x: 0.0,
            u_y: self.slope(y),
            u_xx: 0.0,
            u_xy: 0.0,
            u_yy: self.curvature(y),
        })
    }
}

impl Family {
    pub fn model(&self) -> Model {
        match self {
            Family::Helicoid(_) | Family::Parabolic(_) => Model::HalfPlane,
            Family::Catenoid(_) => Model::Disc,
        }
    }

    pub fn jet(&self, p: &HPoint) -> Result<GraphJet2> {
        match self {
            Family::Helicoid(f) => f.jet(p),
            Family::Catenoid(f) => f.jet(p),
            Family::Parabolic(f) => f.jet(p),
        }
    }

    pub fn value(&self, p: &HPoint) -> Result<f64> {
        match self {
            Family::Helicoid(f) => {
                if p.model() != Model::HalfPlane {
                    return invalid("helicoid profiles live in the half-plane chart");
                }
                Ok(f.profile(p.y().atan2(p.x()))?.value)
            }
            Family::Catenoid(f) => {
                if p.model() != Model::Disc {
                    return invalid("catenoid profiles live in the disc chart");
                }
                Ok(f.profile(p.x().hypot(p.y()))?.value)
            }
            Family::Parabolic(f) => {
                if p.model() != Model::HalfPlane {
                    return invalid("parabolic profiles live in the half-plane chart");
                }
                f.profile(p.y())
            }
        }
    }

    pub fn describe(&self) -> String {
        let b = |b: Branch| match b {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        };
        match self {
            Family::Helicoid(f) => format!("helicoid C={} branch={}", f.c, b(f.branch)),
            Family::Catenoid(f) => format!("catenoid C={} branch={}", f.c, b(f.branch)),
            Family::Parabolic(f) => format!("parabolic C={} branch={}", f.c, b(f.branch)),
        }
    }
}

/// Sampling grid: `samples` points along the family coordinate (θ, r or y),
/// `transverse` points across it, kept `delta` away from singular lines and
/// from the ideal boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub samples: usize,
    pub transverse: usize,
    pub delta: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            samples: 64,
            transverse: 5,
            delta: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub points: Vec<[f64; 3]>,
    pub family: Family,
    pub max_residual: f64,
}

fn lin(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
    if n <= 1 {
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * k as f64 / (n - 1) as f64
    }
}

fn grid_points(family: &Family, grid: &GridSpec) -> Result<Vec<HPoint>> {
    if grid.samples == 0 || grid.transverse == 0 || !(grid.delta > 0.0) {
        return invalid("grid needs positive sizes and offset");
    }
    let d = grid.delta;
    let mut pts = Vec::new();
    match family {
        Family::Helicoid(f) => {
            for (a, b) in f.components() {
                let (lo, hi) = (a + d, b - d);
                if lo >= hi {
                    continue;
                }
                for i in 0..grid.samples {
                    let th = lin(lo, hi, grid.samples, i);
                    for j in 0..grid.transverse {
                        let r = lin(0.5, 2.0, grid.transverse, j);
                        pts.push(HPoint::half_plane(r * th.cos(), r * th.sin())?);
                    }
                }
            }
        }
        Family::Catenoid(f) => {
            let (lo, hi) = (f.r0() + d, 2.0 - d);
            if lo >= hi {
                return invalid("offset leaves no room inside (r₀, 2)");
            }
            for i in 0..grid.samples {
                let r = lin(lo, hi, grid.samples, i);
                for j in 0..grid.transverse {
                    let a = 2.0 * PI * j as f64 / grid.transverse as f64;
                    pts.push(HPoint::disc(r * a.cos(), r * a.sin())?);
                }
            }
        }
        Family::Parabolic(f) => {
            let (lo, hi) = (d, f.c - d);
            if lo >= hi {
                return invalid("offset leaves no room inside (0, C)");
            }
            for i in 0..grid.samples {
                let y = lin(lo, hi, grid.samples, i);
                for j in 0..grid.transverse {
                    pts.push(HPoint::half_plane(lin(-1.0, 1.0, grid.transverse, j), y)?);
                }
            }
        }
    }
    Ok(pts)
}

/// Largest |MSE residual| of the family's analytic jets on the grid.
pub fn verify_family_residual(family: &Family, grid: &GridSpec) -> Result<f64> {
    Ok(sample_family(family, grid)?.max_residual)
}

pub fn sample_family(family: &Family, grid: &GridSpec) -> Result<SurfaceSample> {
    let pts = grid_points(family, grid)?;
    let mut out = Vec::with_capacity(pts.len());
    let mut worst: f64 = 0.0;
    for p in &pts {
        let jet = family.jet(p)?;
        worst = worst.max(mse_residual(&jet).abs());
        out.push([p.x(), p.y(), jet.u]);
    }
    Ok(SurfaceSample {
        points: out,
        family: *family,
        max_residual: worst,
    })
}
