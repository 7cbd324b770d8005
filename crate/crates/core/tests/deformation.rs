use ahmass::cli_pipeline::{build_corner, solve_nu, PipelineConfig};
use ahmass::radial_solver::{certify_deformation, SolveResult};

fn flip(r: &SolveResult) -> SolveResult {
    let neg = |x: &Vec<f64>| x.iter().map(|v| -v).collect::<Vec<f64>>();
    SolveResult { v: neg(&r.v), dv: neg(&r.dv), ddv: neg(&r.ddv), ..r.clone() }
}

#[test]
fn golden_corner_certified_and_corruption_detected() {
    let cfg = PipelineConfig::golden().normalized().unwrap();
    let corner = build_corner(&cfg).unwrap();
    for (nu, detect) in [(0.2, true), (0.1, true), (0.05, true), (0.025, false)] {
        let sol = solve_nu(&corner, &cfg, nu).unwrap();
        let g = &sol.smoothed.metric;
        let good = certify_deformation(g, &sol.result).unwrap();
        assert!(good.ok && good.min_margin >= -1e-6, "nu = {nu}: {:e}", good.min_margin);
        let bad = certify_deformation(g, &flip(&sol.result)).unwrap();
        assert!(bad.min_margin < 0.0);
        assert_eq!(!bad.ok, detect, "nu = {nu}: {:e}", bad.min_margin);
        assert!((bad.location - corner.s0()).abs() < nu);
    }
}
