//! Metric, orthonormal frame and Levi-Civita connection of the universal
//! cover of PSL₂(R) fibred over the hyperbolic plane, together with the
//! gauge of a graph z = u(x, y) and the pointwise minimal-surface residual.

use crate::error::{invalid, Result};
use crate::hyperbolic::{conformal_factor, ConformalFactor, HPoint};

/// Coordinate metric in (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor3 {
    pub g: [[f64; 3]; 3],
}

impl MetricTensor3 {
    pub fn det(&self) -> f64 {
        let g = &self.g;
        g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
            - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
    }

    pub fn inner(&self, u: &[f64; 3], v: &[f64; 3]) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += u[i] * self.g[i][j] * v[j];
            }
        }
        s
    }
}

pub fn metric_at(p: &HPoint) -> MetricTensor3 {
    let f = conformal_factor(p);
    let l = f.lambda;
    let w = [-f.lambda_y / l, f.lambda_x / l, 1.0];
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = w[i] * w[j];
        }
    }
    g[0][0] += l * l;
    g[1][1] += l * l;
    MetricTensor3 { g }
}

/// Coordinate components of E₁, E₂, E₃ (rows).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub e: [[f64; 3]; 3],
}

impl Frame {
    /// Coordinate vector with frame components `c`.
    pub fn to_coords(&self, c: &[f64; 3]) -> [f64; 3] {
        let mut v = [0.0; 3];
        for (k, ek) in self.e.iter().enumerate() {
            for i in 0..3 {
                v[i] += c[k] * ek[i];
            }
        }
        v
    }
}

pub fn frame_at(p: &HPoint) -> Frame {
    let f = conformal_factor(p);
    let l = f.lambda;
    Frame {
        e: [
            [1.0 / l, 0.0, f.lambda_y / (l * l)],
            [0.0, 1.0 / l, -f.lambda_x / (l * l)],
            [0.0, 0.0, 1.0],
        ],
    }
}

/// `table[i][j]` holds the frame components of ∇_{E_{i+1}} E_{j+1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConnection {
    pub table: [[[f64; 3]; 3]; 3],
}

impl FrameConnection {
    pub fn covariant(&self, i: usize, j: usize) -> [f64; 3] {
        self.table[i][j]
    }

    /// Frame components of [E_{i+1}, E_{j+1}] from the torsion-free identity.
    pub fn bracket(&self, i: usize, j: usize) -> [f64; 3] {
        let a = self.table[i][j];
        let b = self.table[j][i];
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }
}

pub fn connection_at(p: &HPoint) -> FrameConnection {
    let f = conformal_factor(p);
    let l2 = f.lambda * f.lambda;
    let a = f.lambda_x / l2;
    let b = f.lambda_y / l2;
    FrameConnection {
        table: [
            [[0.0, -b, 0.0], [b, 0.0, -0.5], [0.0, 0.5, 0.0]],
            [[0.0, a, 0.5], [-a, 0.0, 0.0], [-0.5, 0.0, 0.0]],
            [[0.0, 0.5, 0.0], [-0.5, 0.0, 0.0], [0.0, 0.0, 0.0]],
        ],
    }
}

/// Frame components of [E₁, E₂] computed directly from the frame fields.
pub fn frame_bracket_e1_e2(p: &HPoint) -> [f64; 3] {
    let f = conformal_factor(p);
    let l2 = f.lambda * f.lambda;
    [f.lambda_y / l2, -f.lambda_x / l2, -1.0]
}

/// Second-order jet of a height function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphJet2 {
    pub p: HPoint,
    pub u: f64,
    pub u_x: f64,
    pub u_y: f64,
    pub u_xx: f64,
    pub u_xy: f64,
    pub u_yy: f64,
}

impl GraphJet2 {
    pub fn first_order(p: HPoint, u: f64, u_x: f64, u_y: f64) -> Self {
        GraphJet2 {
            p,
            u,
            u_x,
            u_y,
            u_xx: 0.0,
            u_xy: 0.0,
            u_yy: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedGauge {
    pub alpha: f64,
    pub beta: f64,
    pub w: f64,
}

impl TiltedGauge {
    pub fn from_alpha_beta(alpha: f64, beta: f64) -> Self {
        TiltedGauge {
            alpha,
            beta,
            w: (1.0 + alpha * alpha + beta * beta).sqrt(),
        }
    }
}

pub(crate) fn gauge_from_gradient(f: &ConformalFactor, u_x: f64, u_y: f64) -> TiltedGauge {
    let l = f.lambda;
    TiltedGauge::from_alpha_beta(
        f.lambda_y / (l * l) - u_x / l,
        -f.lambda_x / (l * l) - u_y / l,
    )
}

pub fn gauge(jet: &GraphJet2) -> TiltedGauge {
    gauge_from_gradient(&conformal_factor(&jet.p), jet.u_x, jet.u_y)
}

/// Frame components (α/W, β/W, 1/W) of the upward unit normal.
pub fn unit_normal(g: &TiltedGauge) -> [f64; 3] {
    [g.alpha / g.w, g.beta / g.w, 1.0 / g.w]
}

/// Ric(η) = −3/2 + 2/W².
pub fn ricci_eta(w: f64) -> Result<f64> {
    if !(w >= 1.0 - 1e-12) {
        return invalid(format!("W = {w} is below 1"));
    }
    Ok(-1.5 + 2.0 / (w * w))
}

/// The vector field (λα/W, λβ/W) whose flat divergence vanishes on minimal graphs.
pub fn flux_vector(jet: &GraphJet2) -> [f64; 2] {
    let f = conformal_factor(&jet.p);
    let g = gauge_from_gradient(&f, jet.u_x, jet.u_y);
    [f.lambda * g.alpha / g.w, f.lambda * g.beta / g.w]
}

/// ω(∂x(λα) + ∂y(λβ)) − (λ/2)(α ω_x + β ω_y) with ω = W².
pub fn mse_residual(jet: &GraphJet2) -> f64 {
    let f = conformal_factor(&jet.p);
    let l = f.lambda;
    let l2 = l * l;
    // p = ∇u − c with c = (λ_y/λ, −λ_x/λ); then λα = −p_x and λβ = −p_y.
    let px = jet.u_x - f.lambda_y / l;
    let py = jet.u_y + f.lambda_x / l;
    let dcx_dx = (f.lambda_xy * l - f.lambda_y * f.lambda_x) / l2;
    let dcx_dy = (f.lambda_yy * l - f.lambda_y * f.lambda_y) / l2;
    let dcy_dx = -(f.lambda_xx * l - f.lambda_x * f.lambda_x) / l2;
    let dcy_dy = -(f.lambda_xy * l - f.lambda_x * f.lambda_y) / l2;
    let px_x = jet.u_xx - dcx_dx;
    let py_x = jet.u_xy - dcy_dx;
    let px_y = jet.u_xy - dcx_dy;
    let py_y = jet.u_yy - dcy_dy;
    let q = px * px + py * py;
    let omega = 1.0 + q / l2;
    let omega_x = 2.0 * (px * px_x + py * py_x) / l2 - 2.0 * q * f.lambda_x / (l2 * l);
    let omega_y = 2.0 * (px * px_y + py * py_y) / l2 - 2.0 * q * f.lambda_y / (l2 * l);
    let div = -(px_x + py_y);
    omega * div + 0.5 * (px * omega_x + py * omega_y)
}

/// Mean curvature of the graph: residual / (2λ²W³).
pub fn mean_curvature(jet: &GraphJet2) -> f64 {
    let f = conformal_factor(&jet.p);
    let g = gauge_from_gradient(&f, jet.u_x, jet.u_y);
    mse_residual(jet) / (2.0 * f.lambda * f.lambda * g.w.powi(3))
}
