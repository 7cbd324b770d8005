//! One PASS/FAIL line per acceptance criterion; exits nonzero if any criterion fails.

use std::fmt::Display;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ahmass::cli_pipeline::{build_corner, emit_report, run_pipeline, PipelineConfig, PipelineReport};
use ahmass::corner_smoothing::{make_corner, smooth_with, spike, CornerOptions, SmoothingGrid};
use ahmass::green_kernel::{flux, green0, ode_residual, KernelTable};
use ahmass::hyperboloid_core::{distance, translate, HyperboloidPoint};
use ahmass::numerics::grid::Grid;
use ahmass::radial_solver::{deformation_gap, solve, SolverInput, DEFORMATION_TOL};
use ahmass::representation::{represent, RepresentationConfig};
use ahmass::warped_geometry::{
    make_ads_schwarzschild, make_hyperbolic, riccati_residual, scalar_curvature, AdsSchwarzschildProfile, HyperbolicProfile,
    WarpedMetric,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

struct Ledger {
    failed: Vec<usize>,
}

impl Ledger {
    fn record(&mut self, id: usize, name: &str, ok: bool, detail: impl Display, elapsed: Duration) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {detail} ({:.2} s)", elapsed.as_secs_f64());
        if !ok {
            self.failed.push(id);
        }
    }
}

fn kernel_exactness() -> (bool, String) {
    let mut worst = 0.0f64;
    let mut flux_err = 0.0f64;
    for n in [3, 4, 5] {
        let t = KernelTable::for_dimension(n).unwrap();
        let pts = 400;
        for i in 0..pts {
            let s = 0.05 * (25.0f64 / 0.05).powf(i as f64 / (pts - 1) as f64);
            let r = ode_residual(&t, s).unwrap() / green0(&t, s).unwrap();
            worst = worst.max(r.abs());
        }
        flux_err = flux_err.max((flux(&t, 1e-3).unwrap() - 1.0).abs());
    }
    (worst <= 1e-7 && flux_err <= 1e-5, format!("max |residual|/G = {worst:.2e}, max |flux(1e-3) - 1| = {flux_err:.2e}"))
}

fn isometries() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    let mut passed = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=5);
        let mut pt = |scale: f64| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-scale..scale)).collect() };
        let b = pt(3.0);
        let x = HyperboloidPoint::from_spatial(pt(5.0));
        let y = HyperboloidPoint::from_spatial(pt(5.0));
        let d0 = distance(&x, &y).unwrap();
        let d1 = distance(&translate(&b, &x), &translate(&b, &y)).unwrap();
        let origin = HyperboloidPoint::origin(n);
        let to_b = translate(&b, &origin);
        let tb_err = to_b.x().iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let minus_b = HyperboloidPoint::from_spatial(b.iter().map(|v| -v).collect());
        let r = translate(&b, &x).x().iter().map(|v| v * v).sum::<f64>().sqrt();
        let d2 = distance(&x, &minus_b).unwrap();
        let err = ((d0 - d1).abs() / d0.max(1.0)).max(tb_err / 3.0).max((r.asinh() - d2).abs() / d2.max(1.0));
        worst = worst.max(err);
        if err <= 1e-10 {
            passed += 1;
        }
    }
    (passed == 1000, format!("{passed}/1000 checks, worst relative error {worst:.2e}"))
}

fn geometry_identities() -> (bool, String) {
    let (mut r_dev, mut ric) = (0.0f64, 0.0f64);
    for n in [3, 4, 5] {
        let nf = n as f64;
        let models = [make_hyperbolic(n, 12.0, 2000).unwrap(), make_ads_schwarzschild(n, 0.1, 1.0, 0.0, 12.0, 2000).unwrap()];
        for g in &models {
            let (lo, hi) = g.domain();
            for i in 1..200 {
                let s = lo + (hi - lo) * i as f64 / 200.0;
                r_dev = r_dev.max((scalar_curvature(g, s).unwrap() + nf * (nf - 1.0)).abs());
                ric = ric.max(riccati_residual(g, s).unwrap().abs());
            }
        }
    }
    (r_dev <= 1e-8 && ric <= 1e-8, format!("max |R + n(n-1)| = {r_dev:.2e}, max Riccati residual = {ric:.2e}"))
}

fn deformation(golden: &PipelineReport) -> (bool, String) {
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for n in 3..=12 {
        for i in 0..1000 {
            let v = if i == 0 { 0.0 } else { 1e-6 * 1e10f64.powf(i as f64 / 999.0) };
            worst = worst.min(deformation_gap(v, n).unwrap());
            count += 1;
        }
    }
    let margin = golden.records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    (
        count == 10_000 && worst >= 0.0 && margin >= -DEFORMATION_TOL,
        format!("min gap {worst:.2e} over {count} points, min golden margin {margin:.2e}"),
    )
}

fn manufactured_error(n: usize, cells: usize) -> f64 {
    let g = make_hyperbolic(n, 20.0, cells).unwrap();
    let w: Vec<f64> = g.s().iter().map(|&s| (n * (n + 1)) as f64 / s.cosh().powi(n as i32 + 2)).collect();
    let f = vec![0.0; w.len()];
    let r = solve(&SolverInput::new(&g, &f, &w)).unwrap();
    g.s().iter().zip(&r.v).map(|(&s, v)| (v - 1.0 / s.cosh().powi(n as i32)).abs()).fold(0.0, f64::max)
}

fn bump(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |s| if s > a && s < b { (-1.0 / ((s - a) * (b - s))).exp() } else { 0.0 }
}

fn solver_order() -> (bool, String) {
    let order = (manufactured_error(3, 4000) / manufactured_error(3, 8000)).log2();
    let n = 3;
    let g = make_hyperbolic(n, 20.0, 60000).unwrap();
    let b = bump(1.0, 2.0);
    let w: Vec<f64> = g.s().iter().map(|&s| b(s)).collect();
    let f = vec![0.0; w.len()];
    let r = solve(&SolverInput::new(&g, &f, &w)).unwrap();
    let t = KernelTable::for_dimension(n).unwrap();
    let ratios: Vec<f64> =
        g.s().iter().zip(&r.v).filter(|(&s, _)| s > 2.0 && s < 18.0).map(|(&s, v)| v / green0(&t, s).unwrap()).collect();
    let spread = ratios.iter().map(|q| (q / ratios[0] - 1.0).abs()).fold(0.0, f64::max);
    ((order - 2.0).abs() <= 0.1 && spread <= 1e-6, format!("observed order {order:.4}, exterior ratio spread {spread:.2e}"))
}

fn decay() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [3usize, 4, 5] {
        let g = make_hyperbolic(n, 20.0, 8000).unwrap();
        let w: Vec<f64> = g.s().iter().map(|&s| (n * (n + 1)) as f64 / s.cosh().powi(n as i32 + 2)).collect();
        let f: Vec<f64> = g.s().iter().map(|&s| -0.5 / s.cosh().powi(3)).collect();
        let r = solve(&SolverInput::new(&g, &f, &w)).unwrap();
        let nf = n as f64;
        let shift = (r.a_shifted() / r.a - 1.0).abs();
        ok &= r.sources_compliant && (r.fit_order - nf).abs() <= 0.02 * nf && shift <= 0.01;
        parts.push(format!("n={n}: order {:.4}, shift {shift:.1e}", r.fit_order));
        let weak: Vec<f64> = g.s().iter().map(|&s| 1.0 / s.cosh().powf(nf + 0.5)).collect();
        let zero = vec![0.0; weak.len()];
        let rw = solve(&SolverInput::new(&g, &zero, &weak)).unwrap();
        ok &= !rw.sources_compliant;
        parts.push(format!("eta={:.2} flagged {}", rw.w_rate, !rw.sources_compliant));
    }
    (ok, parts.join("; "))
}

fn representation() -> (bool, String) {
    let g = make_hyperbolic(3, 20.0, 40000).unwrap();
    let b = bump(2.5, 3.5);
    let w: Vec<f64> = g.s().iter().map(|&s| b(s)).collect();
    let f = vec![0.0; w.len()];
    let res = solve(&SolverInput::new(&g, &f, &w)).unwrap();
    let rep = represent(&g, &res, &f, &w, &RepresentationConfig::new(3, 2f64.sinh()), true).unwrap();
    let rel = rep.check.unwrap().relative_residual;

    let s0 = 1f64.asinh();
    let inside = WarpedMetric::from_profile(
        Arc::new(HyperbolicProfile { n: 3, k: 1.0, shift: 0.0, s_hi: s0 + 1.0 }),
        Grid::uniform(0.0, s0, 100).unwrap(),
    )
    .unwrap();
    let outside = WarpedMetric::from_profile(
        Arc::new(AdsSchwarzschildProfile::new(3, 0.4, 1.0, s0, 20.0).unwrap()),
        Grid::uniform(s0, 20.0, 2000).unwrap(),
    )
    .unwrap();
    let corner = make_corner(&inside, &outside, s0, CornerOptions::default()).unwrap();
    let sm = smooth_with(&corner, 0.2, &SmoothingGrid { core_points: 64, growth: 0.01, h_max: 0.0004 }).unwrap();
    let ga = &sm.metric;
    let bb = bump(1.2, 1.8);
    let wa: Vec<f64> = ga.s().iter().map(|&s| bb(s)).collect();
    let fa = vec![0.0; wa.len()];
    let ra = solve(&SolverInput::new(ga, &fa, &wa)).unwrap();
    let residuals: Vec<f64> = [2.0f64, 3.0, 4.0]
        .iter()
        .map(|k| represent(ga, &ra, &fa, &wa, &RepresentationConfig::new(3, k.sinh()), false).unwrap().residual.abs())
        .collect();
    let decreasing = residuals.windows(2).all(|p| p[1] < p[0]);
    (
        rel <= 1e-5 && decreasing,
        format!("hyperbolic exterior relative residual {rel:.2e}; AdS residuals at r0 = sinh 2,3,4: {}", sci(&residuals)),
    )
}

fn gauge_law(golden: &PipelineReport) -> (bool, String) {
    let law = golden.records.iter().map(|r| r.law_rel_error).fold(0.0, f64::max);
    let wexp = golden.records.iter().map(|r| r.w_expansion_rel_error).fold(0.0, f64::max);
    (law <= 1e-4 && wexp <= 0.02, format!("two-path relative error {law:.2e}, w-expansion relative error {wexp:.2e}"))
}

fn smoothing_structure(golden: &PipelineReport) -> (bool, String) {
    let cfg = &golden.config;
    let corner = build_corner(cfg).unwrap();
    let res = SmoothingGrid { core_points: cfg.grid.core_points, growth: cfg.grid.growth, h_max: cfg.grid.h_max };
    let mut exact = true;
    let mut peak_ratio = Vec::new();
    for &nu in &cfg.nu_list {
        let sm = smooth_with(&corner, nu, &res).unwrap();
        let (g, base) = (&sm.metric, &sm.glued);
        let mut peak = 0.0f64;
        for (i, &s) in g.s().iter().enumerate() {
            if s <= sm.collar.0 || s >= sm.collar.1 {
                exact &= g.w()[i].to_bits() == base.w()[i].to_bits()
                    && g.dw()[i].to_bits() == base.dw()[i].to_bits()
                    && g.excess()[i].to_bits() == base.excess()[i].to_bits();
            } else {
                peak = peak.max(spike(&corner, nu, s - corner.s0()));
            }
        }
        peak_ratio.push(peak);
    }
    let rem: Vec<f64> = golden.records.iter().map(|r| r.spike_remainder).collect();
    let (rmin, rmax) = rem.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let uniform_remainder = rmax.is_finite() && rmax <= 2.0 * rmin && rmax < 1e-3 * peak_ratio.iter().cloned().fold(f64::INFINITY, f64::min);
    let nb = golden.negative_norm_bound.as_ref().unwrap();
    let ok = exact && uniform_remainder && nb.c.is_finite() && nb.uniform;
    (
        ok,
        format!(
            "exact outside collar {exact}; spike remainder in [{rmin:.3e}, {rmax:.3e}] against spike peaks {}; \
             negative-part norm <= C nu with C = {:.3e} (nu = {}), C_nu non-increasing {}, C_nu spread {:.2e}, log-log exponent {:.3}",
            sci(&peak_ratio),
            nb.c, nb.c_at, nb.uniform, nb.spread, nb.exponent
        ),
    )
}

fn nu_bound(golden: &PipelineReport) -> (bool, String) {
    let b = golden.a_bound.as_ref().unwrap();
    let p = 1.0 / (golden.config.n as f64 + 1.0);
    (
        b.c.is_finite() && b.c > 0.0 && b.exponent >= p,
        format!(
            "C = {:.4e} at nu = {}, empirical exponent {:.4} >= {p:.4}; |A_nu|/nu^p spread {:.2e} (stable within 10: {})",
            b.c, b.c_at, b.exponent, b.spread, b.stable
        ),
    )
}

fn end_to_end(golden: &PipelineReport, elapsed: Duration) -> (bool, String) {
    let tol = -DEFORMATION_TOL;
    let positive = golden.records.iter().all(|r| r.positive);
    let margin = golden.records.iter().all(|r| r.margin >= tol);
    let wang = golden.records.iter().all(|r| r.wang_ok);
    let gaps: Vec<f64> = golden.records.iter().map(|r| (r.h_tilde_scalar - r.h_scalar).abs()).collect();
    let ok = positive && margin && wang && golden.h_tilde_monotone && golden.all_ok && elapsed < Duration::from_secs(300);
    (ok, format!("positive {positive}, margins ok {margin}, wang ok {wang}, |h_tilde - h| = {}", sci(&gaps)))
}

fn determinism(golden: &PipelineReport) -> (bool, String) {
    let again = run_pipeline(&PipelineConfig::golden()).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let pa = emit_report(golden, a.path()).unwrap();
    let pb = emit_report(&again, b.path()).unwrap();
    let csv = std::fs::read(&pa.csv).unwrap() == std::fs::read(&pb.csv).unwrap();
    let json = std::fs::read(&pa.json).unwrap() == std::fs::read(&pb.json).unwrap();
    (csv && json, format!("CSV identical {csv}, JSON identical {json}"))
}

fn main() {
    let mut ledger = Ledger { failed: Vec::new() };

    let t = Instant::now();
    let (ok, d) = kernel_exactness();
    let e = t.elapsed();
    ledger.record(1, "kernel exactness", ok && e < Duration::from_secs(10), d, e);

    let t = Instant::now();
    let (ok, d) = isometries();
    ledger.record(2, "isometry suite", ok, d, t.elapsed());

    let t = Instant::now();
    let (ok, d) = geometry_identities();
    let e = t.elapsed();
    ledger.record(3, "geometry identities", ok && e < Duration::from_secs(5), d, e);

    let t = Instant::now();
    let golden = run_pipeline(&PipelineConfig::golden()).unwrap();
    let golden_time = t.elapsed();

    let t = Instant::now();
    let (ok, d) = deformation(&golden);
    ledger.record(4, "deformation inequality", ok, d, t.elapsed());

    let t = Instant::now();
    let (ok, d) = solver_order();
    ledger.record(5, "solver order", ok, d, t.elapsed());

    let t = Instant::now();
    let (ok, d) = decay();
    ledger.record(6, "decay", ok, d, t.elapsed());

    let t = Instant::now();
    let (ok, d) = representation();
    ledger.record(7, "representation exactness", ok, d, t.elapsed());

    let t = Instant::now();
    let (ok, d) = gauge_law(&golden);
    ledger.record(8, "gauge shift law", ok, d, t.elapsed());

    let t = Instant::now();
    let (ok, d) = smoothing_structure(&golden);
    ledger.record(9, "smoothing structure", ok, d, t.elapsed());

    let t = Instant::now();
    let (ok, d) = nu_bound(&golden);
    ledger.record(10, "A_nu bound", ok, d, t.elapsed());

    let (ok, d) = end_to_end(&golden, golden_time);
    ledger.record(11, "end-to-end golden run", ok, d, golden_time);

    let t = Instant::now();
    let (ok, d) = determinism(&golden);
    ledger.record(12, "determinism", ok, d, t.elapsed());

    if ledger.failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
    } else {
        println!("acceptance: failed criteria {:?}", ledger.failed);
        std::process::exit(1);
    }
}
