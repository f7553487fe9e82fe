//! Acceptance run: one PASS/FAIL line per criterion, with the measured
//! values and timings. Exits non-zero if any criterion fails.

mod common;

use common::{fixture, fixture_with_exact, koszul_connection, random_point};
use pslgraph_core::domain::{ArcLabel, BoundaryData, DomainSpec};
use pslgraph_core::flux::{
    boundary_flux_per_arc, boundary_trace_flux_per_arc, conjugate_coeffs, flux_integral, scherk_flux_experiment, FluxPath, FluxSource,
};
use pslgraph_core::geometry::{connection_at, metric_at, GraphJet2};
use pslgraph_core::hyperbolic::{conformal_factor, HPoint, Isometry, Model};
use pslgraph_core::invariant::{verify_family_residual, Branch, CatenoidFamily, Family, GridSpec, HelicoidFamily, ParabolicFamily};
use pslgraph_core::jenkins_serrin::{check_admissibility, Verdict};
use pslgraph_core::mesh::generate_mesh;
use pslgraph_core::solver::{boundary_values, solve_dirichlet, solve_monotone, MonotoneReport, SolutionField, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: usize, name: &str, budget_s: f64, f: impl FnOnce() -> Outcome) -> (usize, bool, String) {
    let t = Instant::now();
    let o = f();
    let secs = t.elapsed().as_secs_f64();
    let pass = o.pass && secs < budget_s;
    let line = format!(
        "{} criterion {id} ({name}): {} [{secs:.2} s of {budget_s} s]",
        if pass { "PASS" } else { "FAIL" },
        o.detail
    );
    (id, pass, line)
}

fn criterion1() -> Outcome {
    let grid = GridSpec {
        samples: 64,
        transverse: 5,
        delta: 0.05,
    };
    let mut fams = Vec::new();
    for c in [0.0, 0.5, 1.0, 2.0] {
        for b in [Branch::Plus, Branch::Minus] {
            fams.push(Family::Helicoid(HelicoidFamily::new(c, b).unwrap()));
        }
    }
    for c in [2.0, 8.0] {
        for b in [Branch::Plus, Branch::Minus] {
            fams.push(Family::Catenoid(CatenoidFamily::new(c, b).unwrap()));
        }
    }
    for c in [1.0, 2.0] {
        for b in [Branch::Plus, Branch::Minus] {
            fams.push(Family::Parabolic(ParabolicFamily::new(c, b).unwrap()));
        }
    }
    let worst = fams.iter().map(|f| verify_family_residual(f, &grid).unwrap()).fold(0.0, f64::max);
    outcome(worst < 1e-8, format!("max residual {worst:.2e} over {} families, delta 0.05", fams.len()))
}

fn criterion2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut table_err, mut killing_err, mut det_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    // E_i × E_3 in the oriented frame, for i = 1, 2, 3.
    let cross_e3 = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
    for model in [Model::HalfPlane, Model::Disc] {
        for _ in 0..1000 {
            let p = random_point(&mut rng, model);
            let t = connection_at(&p).table;
            let k = koszul_connection(&p);
            for i in 0..3 {
                for j in 0..3 {
                    for m in 0..3 {
                        table_err = table_err.max((t[i][j][m] - k[i][j][m]).abs());
                    }
                }
                for m in 0..3 {
                    let want = -0.5 * cross_e3[i][m];
                    killing_err = killing_err.max((k[i][2][m] - want).abs()).max((t[i][2][m] - want).abs());
                }
            }
            let l4 = conformal_factor(&p).lambda.powi(4);
            det_err = det_err.max((metric_at(&p).det() - l4).abs() / l4);
        }
    }
    outcome(
        table_err < 1e-9 && killing_err < 1e-9 && det_err < 1e-9,
        format!("table vs Christoffel {table_err:.1e}, tau = -1/2 identities {killing_err:.1e}, det g / lambda^4 {det_err:.1e} (2000 points)"),
    )
}

fn max_error(u: &SolutionField, exact: &BoundaryData) -> f64 {
    let m = u.mesh();
    (0..m.node_count()).map(|i| (u.values()[i] - exact.eval(&m.point(i)).unwrap()).abs()).fold(0.0, f64::max)
}

fn solve_at(d: &DomainSpec, h: f64) -> SolutionField {
    let mesh = Arc::new(generate_mesh(d, h).unwrap());
    solve_dirichlet(&mesh, d, &SolverConfig::default()).unwrap()
}

fn criterion3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["helicoid_quad.toml", "parabolic_quad.toml"] {
        let (d, exact) = fixture_with_exact(name);
        let e: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&h| max_error(&solve_at(&d, h), &exact)).collect();
        let r = [e[0] / e[1], e[1] / e[2]];
        pass &= r.iter().all(|x| (3.0..=5.0).contains(x));
        parts.push(format!("{name} errors {:.2e} {:.2e} {:.2e} ratios {:.2} {:.2}", e[0], e[1], e[2], r[0], r[1]));
    }
    outcome(pass, parts.join("; "))
}

fn random_loop<R: Rng>(rng: &mut R, center: [f64; 2], radius: f64, model: Model) -> FluxPath {
    let n = rng.gen_range(3..7);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(|a, b| a.total_cmp(b));
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let pts = angles
        .iter()
        .map(|a| {
            let r = radius * rng.gen_range(0.3..1.0);
            HPoint::new(model, center[0] + r * a.cos(), center[1] + r * a.sin()).unwrap()
        })
        .collect();
    FluxPath::new(pts, true).unwrap()
}

struct Flat;

impl FluxSource for Flat {
    fn model(&self) -> Model {
        Model::HalfPlane
    }
    fn coeffs(&self, p: &HPoint) -> pslgraph_core::Result<(f64, f64)> {
        Ok(conjugate_coeffs(&GraphJet2::first_order(*p, 0.0, 0.0, 0.0)))
    }
}

fn criterion4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // (a) closed loops on exact fields, away from singular lines.
    let exact: Vec<(Family, [f64; 2], f64)> = vec![
        (Family::Helicoid(HelicoidFamily::new(0.0, Branch::Plus).unwrap()), [0.0, 1.5], 0.8),
        (Family::Helicoid(HelicoidFamily::new(0.5, Branch::Minus).unwrap()), [0.3, 1.2], 0.6),
        (Family::Helicoid(HelicoidFamily::new(2.0, Branch::Plus).unwrap()), [1.5, 0.5], 0.3),
        (Family::Catenoid(CatenoidFamily::new(8.0, Branch::Plus).unwrap()), [0.0, 1.45], 0.25),
        (Family::Parabolic(ParabolicFamily::new(2.0, Branch::Plus).unwrap()), [0.0, 1.0], 0.7),
    ];
    let (mut closed, mut leg): (f64, f64) = (0.0, 0.0);
    for (fam, c, r) in &exact {
        for _ in 0..10 {
            let lp = random_loop(&mut rng, *c, *r, fam.model());
            closed = closed.max(flux_integral(fam, &lp).unwrap().value.abs());
            let pts = lp.points();
            for k in 0..pts.len() {
                let seg = FluxPath::new(vec![pts[k], pts[(k + 1) % pts.len()]], false).unwrap();
                leg = leg.max(flux_integral(fam, &seg).unwrap().value.abs());
            }
        }
    }
    // (b) open paths on exact and discrete fields.
    let scherk = {
        let d = fixture("scherk_quad.toml").capped(32.0);
        solve_at(&d, 0.1)
    };
    let mut worst_ratio: f64 = 0.0;
    for k in 0..100 {
        let n = rng.gen_range(2..6);
        let pts: Vec<HPoint> =
            (0..n).map(|_| HPoint::half_plane(rng.gen_range(-0.8..0.8), rng.gen_range(1.5..2.3)).unwrap()).collect();
        let Ok(path) = FluxPath::new(pts, false) else { continue };
        let src: &dyn FluxSource = if k % 2 == 0 { &scherk } else { &exact[(k / 2) % 2].0 };
        worst_ratio = worst_ratio.max(flux_integral(src, &path).unwrap().ratio);
    }
    // (c) vertical segment from i to e·i over the zero graph.
    let seg = FluxPath::new(vec![HPoint::half_plane(0.0, 1.0).unwrap(), HPoint::half_plane(0.0, std::f64::consts::E).unwrap()], false).unwrap();
    let vertical = flux_integral(&Flat, &seg).unwrap().value;
    let vertical_err = (vertical + 1.0 / 2f64.sqrt()).abs();
    // (d) arc fluxes of solved fields at h = 0.05.
    let mut balance: f64 = 0.0;
    let mut trace_balance: f64 = 0.0;
    for name in ["helicoid_quad.toml", "parabolic_quad.toml", "scherk_quad.toml"] {
        let d = fixture(name);
        let d = if d.all_finite() { d } else { d.capped(32.0) };
        let u = solve_at(&d, 0.05);
        balance = balance.max(boundary_flux_per_arc(&u, &d).unwrap().iter().map(|r| r.value).sum::<f64>().abs());
        trace_balance = trace_balance.max(boundary_trace_flux_per_arc(&u, &d).unwrap().iter().map(|r| r.value).sum::<f64>().abs());
    }
    outcome(
        closed < 1e-6 && worst_ratio <= 1.0 && vertical_err < 1e-9 && balance < 1e-4,
        format!(
            "(a) max |closed loop| {closed:.1e} (largest leg {leg:.2}); (b) max ratio {worst_ratio:.4}; (c) vertical {vertical:.12} error {vertical_err:.1e}; \
             (d) max arc sum {balance:.1e} (trace integral {trace_balance:.1e}, reported)"
        ),
    )
}

fn criterion5() -> (Outcome, Option<MonotoneReport>) {
    let d = fixture("scherk_quad.toml");
    let table = scherk_flux_experiment(&d, 0.05, &SolverConfig::default()).unwrap();
    let pass = table.approaches_limit(&d, 0.9);
    let detail = d
        .infinite_arcs()
        .iter()
        .map(|&k| {
            let r: Vec<String> = table.ratios(k).iter().map(|x| format!("{x:.5}")).collect();
            format!("arc {k} ratios {}", r.join(" "))
        })
        .collect::<Vec<_>>()
        .join("; ");
    (outcome(pass, format!("h 0.05, caps 2..32: {detail}")), Some(table.report))
}

fn random_isometry(rng: &mut ChaCha8Rng) -> Isometry {
    let f = Isometry::translation(rng.gen_range(-1.0..1.0))
        .compose(&Isometry::scaling(rng.gen_range(0.5..2.0)).unwrap())
        .compose(&Isometry::rotation_about(
            &HPoint::half_plane(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0)).unwrap(),
            rng.gen_range(-3.0..3.0),
        ));
    if rng.gen_bool(0.5) {
        f.compose(&Isometry::reflection_imaginary_axis())
    } else {
        f
    }
}

fn criterion6() -> Outcome {
    let cases = [
        ("scherk_quad.toml", Verdict::Admissible),
        ("divergent_pentagon.toml", Verdict::Inadmissible),
        ("alternating_square.toml", Verdict::Admissible),
        ("perturbed_square.toml", Verdict::Inadmissible),
        ("marginal_quad.toml", Verdict::Marginal),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, want) in cases {
        let d = fixture(name);
        let rep = check_admissibility(&d).unwrap();
        pass &= rep.verdict == want;
        match name {
            "divergent_pentagon.toml" => {
                let w = rep.witness_record().unwrap();
                pass &= w.polygon.vertices == vec![0, 1, 2, 3];
                notes.push(format!("pentagon witness {:?} 2a {:.3} > g {:.3}", w.polygon.vertices, 2.0 * w.alpha, w.gamma));
            }
            "alternating_square.toml" => {
                pass &= rep.records.iter().any(|r| r.balance_rule && r.status == Verdict::Admissible);
            }
            "perturbed_square.toml" => {
                let w = rep.witness_record().unwrap();
                pass &= w.balance_rule;
                notes.push(format!("perturbed a {:.3} b {:.3}", w.alpha, w.beta));
            }
            _ => {}
        }
        for _ in 0..10 {
            let (img, _) = d.transformed(&random_isometry(&mut rng)).unwrap();
            pass &= check_admissibility(&img).unwrap().verdict == want;
        }
    }
    outcome(pass, format!("5 fixtures x 10 isometries; {}", notes.join("; ")))
}

fn poly(c: [f64; 6]) -> BoundaryData {
    BoundaryData::Polynomial(vec![(c[0], 0, 0), (c[1], 1, 0), (c[2], 0, 1), (c[3], 2, 0), (c[4], 1, 1), (c[5], 0, 2)])
}

fn criterion7(scherk: &MonotoneReport, pentagon: Option<&MonotoneReport>) -> Outcome {
    let base = fixture("helicoid_quad.toml");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data: Vec<[f64; 6]> = (0..4).map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))).collect();
    let hs = [0.2, 0.1, 0.05];
    let mut k_by_h = [0.0f64; 3];
    for c in &data {
        let d = base.relabeled(vec![ArcLabel::Finite(poly(*c)); 4]).unwrap();
        for (n, &h) in hs.iter().enumerate() {
            let mesh = Arc::new(generate_mesh(&d, h).unwrap());
            let u = solve_dirichlet(&mesh, &d, &SolverConfig::default()).unwrap();
            let bv = boundary_values(&mesh, &d).unwrap();
            let b: Vec<f64> = (0..mesh.node_count()).filter(|&i| mesh.is_boundary(i)).map(|i| bv[i]).collect();
            let (lo, hi) = (b.iter().cloned().fold(f64::INFINITY, f64::min), b.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            let (a, z) = u.min_max();
            k_by_h[n] = k_by_h[n].max((lo - a).max(z - hi).max(0.0) / (h * h));
        }
    }
    // Violations must stay within the constant measured on the coarsest mesh.
    let dmp = k_by_h.iter().all(|&k| k <= k_by_h[0] + 1e-12);
    let defect = scherk.monotonicity_defect();
    let pent = pentagon.map_or("not run".to_string(), |r| format!("{:.1e}", r.monotonicity_defect()));
    outcome(
        dmp && defect <= 0.0,
        format!(
            "max-principle constant K = violation/h^2: {:.1e} {:.1e} {:.1e} at h 0.2 0.1 0.05; \
             scherk quad nodal decrease {defect:.1e}; pentagon nodal decrease {pent} (reported)",
            k_by_h[0], k_by_h[1], k_by_h[2]
        ),
    )
}

/// Chart distance from `p` to the arc of |z| = √17 between (−1, 4) and (1, 4).
fn chord_distance(p: [f64; 2]) -> f64 {
    let r = 17f64.sqrt();
    let ends = [[-1.0, 4.0], [1.0, 4.0]];
    if p[1] > 0.0 && p[0].abs() <= p[1] / 4.0 {
        (p[0].hypot(p[1]) - r).abs()
    } else {
        ends.iter().map(|e| (p[0] - e[0]).hypot(p[1] - e[1])).fold(f64::INFINITY, f64::min)
    }
}

fn criterion8() -> (Outcome, Option<MonotoneReport>) {
    let d = fixture("divergent_pentagon.toml");
    let r = 17f64.sqrt();
    let chord: Vec<[f64; 2]> = (0..=200)
        .map(|k| {
            let a = (4.0f64).atan2(1.0) + (k as f64 / 200.0) * 2.0 * (1.0f64).atan2(4.0);
            [r * a.cos(), r * a.sin()]
        })
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut last = None;
    for h in [0.1, 0.05] {
        let mesh = Arc::new(generate_mesh(&d, h).unwrap());
        let rep = solve_monotone(&mesh, &d, &SolverConfig::default()).unwrap();
        let diverged = rep.diverged_nodes().len();
        let b = &rep.divergence_boundary;
        let forward = b.iter().map(|&p| chord_distance(p)).fold(0.0, f64::max);
        let back = chord
            .iter()
            .map(|c| b.iter().map(|p| (p[0] - c[0]).hypot(p[1] - c[1])).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        let hd = forward.max(back);
        pass &= diverged > 0 && !b.is_empty() && hd <= 2.0 * h;
        parts.push(format!("h {h}: {diverged} diverged, Hausdorff {hd:.3} (limit {:.2})", 2.0 * h));
        last = Some(rep);
    }
    (outcome(pass, parts.join("; ")), last)
}

fn main() {
    let mut results = vec![
        run(1, "exact-family residuals", 5.0, criterion1),
        run(2, "connection table", 1.0, criterion2),
        run(3, "solver convergence", 60.0, criterion3),
        run(4, "flux lemmas", 30.0, criterion4),
    ];
    let mut scherk = None;
    results.push(run(5, "Scherk limit", 300.0, || {
        let (o, r) = criterion5();
        scherk = r;
        o
    }));
    results.push(run(6, "admissibility checker", 1.0, criterion6));
    // Criterion 7 reuses the capped sequences of 5 and 8.
    let mut pentagon = None;
    results.push(run(8, "divergence detection", 120.0, || {
        let (o, r) = criterion8();
        pentagon = r;
        o
    }));
    results.push(run(7, "maximum principle and monotonicity", 60.0, || {
        criterion7(scherk.as_ref().unwrap(), pentagon.as_ref())
    }));
    results.sort_by_key(|r| r.0);
    for r in &results {
        println!("{}", r.2);
    }
    if results.iter().any(|r| !r.1) {
        std::process::exit(1);
    }
}
