#![allow(dead_code)]

use pslgraph_core::domain::{BoundaryData, DomainFile, DomainSpec};
use pslgraph_core::hyperbolic::{HPoint, Model};
use rand::Rng;
use std::path::Path;

pub fn fixture_file(name: &str) -> DomainFile {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    DomainFile::parse(&text).unwrap()
}

pub fn fixture(name: &str) -> DomainSpec {
    fixture_file(name).build().unwrap()
}

pub fn fixture_with_exact(name: &str) -> (DomainSpec, BoundaryData) {
    let f = fixture_file(name);
    (f.build().unwrap(), f.exact_solution().unwrap().expect("fixture has an exact solution"))
}

/// Point in a compact part of the chart where λ and its derivatives stay moderate.
pub fn random_point<R: Rng>(rng: &mut R, model: Model) -> HPoint {
    match model {
        Model::HalfPlane => HPoint::half_plane(rng.gen_range(-2.0..2.0), rng.gen_range(0.8..3.0)).unwrap(),
        Model::Disc => {
            let r = 1.4 * rng.gen::<f64>().sqrt();
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            HPoint::disc(r * a.cos(), r * a.sin()).unwrap()
        }
    }
}

/// Five-point central difference of `f` at `x` with step `h`.
pub fn d5<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn inverse3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    inv
}

const FD_STEP: f64 = 5e-4;

/// ∂_x and ∂_y of a chart quantity by five-point differences; ∂_z vanishes.
fn chart_derivs<const N: usize, F: Fn(&HPoint) -> [[f64; 3]; N]>(p: &HPoint, f: F) -> [[[f64; 3]; N]; 3] {
    let mut out = [[[0.0; 3]; N]; 3];
    for a in 0..2 {
        for i in 0..N {
            for j in 0..3 {
                let g = |t: f64| {
                    let (x, y) = if a == 0 { (p.x() + t, p.y()) } else { (p.x(), p.y() + t) };
                    f(&HPoint::new(p.model(), x, y).unwrap())[i][j]
                };
                out[a][i][j] = d5(g, 0.0, FD_STEP);
            }
        }
    }
    out
}

/// Frame components of ∇_{E_{i+1}} E_{j+1}, from the Christoffel symbols of
/// the coordinate metric and numerical derivatives of the frame fields.
pub fn koszul_connection(p: &HPoint) -> [[[f64; 3]; 3]; 3] {
    use pslgraph_core::geometry::{frame_at, metric_at};
    let g = metric_at(p).g;
    let ginv = inverse3(&g);
    let dg = chart_derivs(p, |q| metric_at(q).g);
    let e = frame_at(p).e;
    let de = chart_derivs(p, |q| frame_at(q).e);
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                gamma[k][a][b] = 0.5 * (0..3).map(|l| ginv[k][l] * (dg[a][l][b] + dg[b][l][a] - dg[l][a][b])).sum::<f64>();
            }
        }
    }
    // Frame components c of a coordinate vector v solve eᵀc = v.
    let mut et = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            et[i][j] = e[j][i];
        }
    }
    let et_inv = inverse3(&et);
    let mut table = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut v = [0.0; 3];
            for k in 0..3 {
                for a in 0..3 {
                    v[k] += e[i][a] * de[a][j][k];
                    for b in 0..3 {
                        v[k] += gamma[k][a][b] * e[i][a] * e[j][b];
                    }
                }
            }
            for m in 0..3 {
                table[i][j][m] = (0..3).map(|k| et_inv[m][k] * v[k]).sum();
            }
        }
    }
    table
}

/// Frame components of [E₁, E₂] from numerical derivatives of the frame.
pub fn fd_bracket_e1_e2(p: &HPoint) -> [f64; 3] {
    use pslgraph_core::geometry::frame_at;
    let e = frame_at(p).e;
    let de = chart_derivs(p, |q| frame_at(q).e);
    let mut v = [0.0; 3];
    for k in 0..3 {
        for a in 0..3 {
            v[k] += e[0][a] * de[a][1][k] - e[1][a] * de[a][0][k];
        }
    }
    // The third row of the frame is ∂z, so solve the triangular system.
    let c0 = v[0] / e[0][0];
    let c1 = v[1] / e[1][1];
    [c0, c1, v[2] - c0 * e[0][2] - c1 * e[1][2]]
}

/// Composite Simpson on n (even) panels, then one Richardson step with 2n.
pub fn simpson_richardson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let s = |n: usize| {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * k as f64);
        }
        acc * h / 3.0
    };
    let (s1, s2) = (s(n), s(2 * n));
    (16.0 * s2 - s1) / 15.0
}
