//! Inscribed-polygon enumeration and the 2α < γ, 2β < γ conditions for
//! domains with +∞ arcs (A), −∞ arcs (B) and finite arcs (C).

use crate::domain::{ArcLabel, DomainSpec};
use crate::error::{invalid, Error, Result};
use crate::flux::{boundary_flux_per_arc, FluxReport};
use crate::hyperbolic::{distance, interior_angles, HPoint};
use crate::mesh::generate_mesh;
use crate::solver::{solve_monotone, MonotoneReport, SolutionField, SolverConfig};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

pub const DEFAULT_ENDPOINT_LIMIT: usize = 16;
/// Margin on 2α < γ and on α = β.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct InscribedPolygon {
    /// Domain vertex indices, in boundary order.
    pub vertices: Vec<usize>,
    pub points: Vec<HPoint>,
    pub is_whole_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Admissible,
    Marginal,
    Inadmissible,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Admissible => "admissible",
            Verdict::Marginal => "marginal",
            Verdict::Inadmissible => "inadmissible",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonRecord {
    pub polygon: InscribedPolygon,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// True when the α = β rule applied instead of the strict inequalities.
    pub balance_rule: bool,
    pub status: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub records: Vec<PolygonRecord>,
    pub verdict: Verdict,
    /// Index into `records` of the first failing (or else marginal) polygon.
    pub witness: Option<usize>,
}

impl AdmissibilityReport {
    pub fn witness_record(&self) -> Option<&PolygonRecord> {
        self.witness.map(|i| &self.records[i])
    }
}

/// Domain vertices that end a ±∞ arc.
pub fn endpoints(domain: &DomainSpec) -> Vec<usize> {
    let n = domain.arcs().len();
    (0..n)
        .filter(|&k| {
            let prev = (k + n - 1) % n;
            !domain.arcs()[k].label.is_finite() || !domain.arcs()[prev].label.is_finite()
        })
        .collect()
}

fn strictly_convex(points: &[HPoint]) -> bool {
    match interior_angles(points) {
        Ok(a) => a.iter().all(|&x| x > 1e-12 && x < PI - 1e-12),
        Err(_) => false,
    }
}

pub fn enumerate_polygons(domain: &DomainSpec) -> Result<Vec<InscribedPolygon>> {
    enumerate_polygons_limited(domain, DEFAULT_ENDPOINT_LIMIT)
}

/// All subsets of at least three endpoints in strictly convex position,
/// in lexicographic order of their vertex lists.
pub fn enumerate_polygons_limited(domain: &DomainSpec, limit: usize) -> Result<Vec<InscribedPolygon>> {
    let ends = endpoints(domain);
    if ends.len() > limit {
        return Err(Error::TooManyEndpoints {
            count: ends.len(),
            limit,
        });
    }
    let m = ends.len();
    let nv = domain.vertices().len();
    let mut subsets: Vec<Vec<usize>> = (0u32..(1u32 << m))
        .filter(|s| s.count_ones() >= 3)
        .map(|s| (0..m).filter(|&i| s & (1 << i) != 0).map(|i| ends[i]).collect())
        .collect();
    subsets.sort();
    let all_geodesic = domain.all_geodesic();
    let polys = subsets
        .into_par_iter()
        .filter_map(|vs| {
            let points: Vec<HPoint> = vs.iter().map(|&i| domain.vertices()[i]).collect();
            if !strictly_convex(&points) {
                return None;
            }
            Some(InscribedPolygon {
                is_whole_boundary: all_geodesic && vs.len() == nv,
                vertices: vs,
                points,
            })
        })
        .collect();
    Ok(polys)
}

/// α and β sum the A and B arcs that are edges of the polygon; γ is its
/// perimeter.
pub fn alpha_beta_gamma(p: &InscribedPolygon, domain: &DomainSpec) -> Result<(f64, f64, f64)> {
    let n = domain.vertices().len();
    let k = p.vertices.len();
    let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
    for i in 0..k {
        let (a, b) = (p.vertices[i], p.vertices[(i + 1) % k]);
        let len = distance(&p.points[i], &p.points[(i + 1) % k])?;
        gamma += len;
        if (a + 1) % n == b {
            let arc = &domain.arcs()[a];
            if arc.curve.is_geodesic() {
                match arc.label {
                    ArcLabel::PlusInf => alpha += len,
                    ArcLabel::MinusInf => beta += len,
                    ArcLabel::Finite(_) => {}
                }
            }
        }
    }
    Ok((alpha, beta, gamma))
}

fn inequality_status(twice: f64, gamma: f64) -> Verdict {
    if twice < gamma - ADMISSIBILITY_MARGIN {
        Verdict::Admissible
    } else if twice <= gamma + ADMISSIBILITY_MARGIN {
        Verdict::Marginal
    } else {
        Verdict::Inadmissible
    }
}

fn worse(a: Verdict, b: Verdict) -> Verdict {
    use Verdict::*;
    match (a, b) {
        (Inadmissible, _) | (_, Inadmissible) => Inadmissible,
        (Marginal, _) | (_, Marginal) => Marginal,
        _ => Admissible,
    }
}

pub fn check_admissibility(domain: &DomainSpec) -> Result<AdmissibilityReport> {
    let polys = enumerate_polygons(domain)?;
    let no_finite = domain.arcs().iter().all(|a| !a.label.is_finite());
    let records: Vec<PolygonRecord> = polys
        .into_par_iter()
        .map(|p| {
            let (alpha, beta, gamma) = alpha_beta_gamma(&p, domain)?;
            let balance_rule = no_finite && p.is_whole_boundary;
            let status = if balance_rule {
                if (alpha - beta).abs() < ADMISSIBILITY_MARGIN {
                    Verdict::Admissible
                } else {
                    Verdict::Inadmissible
                }
            } else {
                worse(inequality_status(2.0 * alpha, gamma), inequality_status(2.0 * beta, gamma))
            };
            Ok(PolygonRecord {
                polygon: p,
                alpha,
                beta,
                gamma,
                balance_rule,
                status,
            })
        })
        .collect::<Result<_>>()?;
    let verdict = records.iter().fold(Verdict::Admissible, |v, r| worse(v, r.status));
    let witness = records.iter().position(|r| r.status == verdict && verdict != Verdict::Admissible);
    Ok(AdmissibilityReport {
        records,
        verdict,
        witness,
    })
}

#[derive(Debug, Clone)]
pub struct JsSolution {
    pub admissibility: AdmissibilityReport,
    pub monotone: MonotoneReport,
    /// Flux of each arc on the last cap, as in `boundary_flux_per_arc`.
    pub flux: Vec<FluxReport>,
}

impl JsSolution {
    pub fn field(&self) -> &SolutionField {
        self.monotone.last()
    }

    /// Signed flux ratio value/length for each arc.
    pub fn flux_ratios(&self) -> Vec<f64> {
        self.flux.iter().map(|r| r.value / r.length).collect()
    }
}

/// Runs the capped construction on an admissible domain and checks that no
/// interior vertex diverges.
pub fn construct_js_solution(domain: &DomainSpec, h: f64, cfg: &SolverConfig) -> Result<JsSolution> {
    let admissibility = check_admissibility(domain)?;
    if admissibility.verdict != Verdict::Admissible {
        return invalid(&format!("domain is {}; refusing to construct a solution", admissibility.verdict));
    }
    let mesh = Arc::new(generate_mesh(domain, h)?);
    let monotone = solve_monotone(&mesh, domain, cfg)?;
    let bad = monotone.diverged_nodes().len();
    if bad > 0 {
        return invalid(&format!(
            "{bad} interior vertices classified as diverging on an admissible domain; \
             this is a resolution failure, retry with a smaller h or larger caps"
        ));
    }
    let flux = boundary_flux_per_arc(monotone.last(), domain)?;
    Ok(JsSolution {
        admissibility,
        monotone,
        flux,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoundaryData;

    fn square(labels: [ArcLabel; 4]) -> DomainSpec {
        let v = (0..4)
            .map(|k| {
                let a = PI * (0.25 + 0.5 * k as f64);
                HPoint::disc(1.2 * a.cos(), 1.2 * a.sin()).unwrap()
            })
            .collect();
        DomainSpec::polygon(v, labels.to_vec()).unwrap()
    }

    #[test]
    fn four_endpoints_give_five_polygons() {
        let c = ArcLabel::Finite(BoundaryData::Constant(0.0));
        let d = square([ArcLabel::PlusInf, c.clone(), ArcLabel::PlusInf, c]);
        let p = enumerate_polygons(&d).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p[0].vertices, vec![0, 1, 2]);
        assert_eq!(p[1].vertices, vec![0, 1, 2, 3]);
        assert!(p[1].is_whole_boundary);
    }

    #[test]
    fn alternating_square_balances() {
        let d = square([ArcLabel::PlusInf, ArcLabel::MinusInf, ArcLabel::PlusInf, ArcLabel::MinusInf]);
        let r = check_admissibility(&d).unwrap();
        assert_eq!(r.verdict, Verdict::Admissible);
        let whole = r.records.iter().find(|x| x.polygon.is_whole_boundary).unwrap();
        assert!(whole.balance_rule);
        assert!((whole.alpha - whole.beta).abs() < 1e-12);
    }

    #[test]
    fn endpoint_limit_is_enforced() {
        let c = ArcLabel::Finite(BoundaryData::Constant(0.0));
        let d = square([ArcLabel::PlusInf, c.clone(), ArcLabel::PlusInf, c]);
        assert!(matches!(
            enumerate_polygons_limited(&d, 3),
            Err(Error::TooManyEndpoints { count: 4, limit: 3 })
        ));
    }
}
