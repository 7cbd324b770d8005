use std::fs;
use std::process::Command;

use ahmass::cli_pipeline::*;
use ahmass::Error;

fn short(nu: &[f64]) -> PipelineConfig {
    let mut c = PipelineConfig::golden();
    c.nu_list = nu.to_vec();
    c
}

#[test]
fn golden_records_and_bounds() {
    let r = run_pipeline(&PipelineConfig::golden()).unwrap();
    assert_eq!(r.records.len(), 4);
    assert!(r.all_ok && r.hypothesis_ok && r.mean_curvature_ok);
    assert!(r.h_minus > r.h_plus);
    for x in &r.records {
        assert!(x.error.is_none());
        assert!(x.positive && x.certified && x.wang_ok);
        assert!(x.h_unchanged);
        assert!((x.h_scalar - 0.2).abs() < 1e-6);
        assert!(x.law_rel_error < 1e-4);
        assert!(x.w_expansion_rel_error < 0.02);
        assert!((x.fit_order - 3.0).abs() < 0.06);
    }
    let nus: Vec<f64> = r.records.iter().map(|x| x.nu).collect();
    assert_eq!(nus, vec![0.2, 0.1, 0.05, 0.025]);
    assert!(r.h_tilde_monotone);
    let b = r.a_bound.unwrap();
    assert!(b.c.is_finite() && b.exponent >= 0.25);
    assert_eq!(b.c_at, 0.2);
    assert!(r.smallest_failing_nu.is_none());
}

#[test]
fn golden_values_frozen() {
    let frozen = [
        (0.2, 8.3245136290668295e-9, 1.9999997171662548e-1, 2.0000010487431236e-1),
        (0.1, 1.0645362529918076e-9, 1.9999997133581887e-1, 1.9999998837203625e-1),
        (0.05, 1.3465896065653821e-10, 1.9999997235357653e-1, 1.9999997450642559e-1),
        (0.025, 1.6935121537403185e-11, 1.9999997169975336e-1, 1.9999997203924433e-1),
    ];
    let r = run_pipeline(&PipelineConfig::golden()).unwrap();
    for (x, (nu, a, h, ht)) in r.records.iter().zip(frozen) {
        assert_eq!(x.nu, nu);
        assert!((x.a_nu / a - 1.0).abs() < 1e-9, "{nu}: {:e}", x.a_nu);
        assert!((x.h_scalar - h).abs() < 1e-12);
        assert!((x.h_tilde_scalar - ht).abs() < 1e-12);
    }
}

#[test]
fn zero_mass_has_no_corner() {
    let mut c = short(&[0.2, 0.1, 0.05]);
    c.outside = OutsideSpec::AdsSchwarzschild { m: 0.0 };
    let r = run_pipeline(&c).unwrap();
    assert!((r.h_minus - r.h_plus).abs() < 1e-12);
    for x in &r.records {
        assert!(x.a_nu.abs() < 1e-15, "{}", x.a_nu);
        assert!(x.h_scalar.abs() < 1e-9 && x.h_tilde_scalar.abs() < 1e-9);
        assert!(x.ok);
    }
}

#[test]
fn hypothesis_violation_is_reported() {
    let mut c = short(&[0.2, 0.1]);
    c.inside = InsideSpec::Hyperbolic { k: 1.1 };
    assert!(matches!(run_pipeline(&c), Err(Error::Hypothesis(_))));
    c.corner.allow_hypothesis_violation = true;
    let r = run_pipeline(&c).unwrap();
    assert!(!r.hypothesis_ok);
    assert!(!r.all_ok);
    assert_eq!(r.records.len(), 2);
}

#[test]
fn failing_nu_does_not_abort_the_sweep() {
    let mut c = short(&[5.0, 0.2]);
    c.grid.s_hi = 20.0;
    let r = run_pipeline(&c).unwrap();
    assert!(r.records[0].error.as_deref().unwrap().contains("outside"));
    assert!(r.records[0].a_nu.is_nan());
    assert!(r.records[1].ok);
    assert_eq!(r.smallest_failing_nu, Some(5.0));
    assert_eq!(report_exit_code(&r), 2);
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"a_nu\":null"));
    let back: PipelineReport = serde_json::from_str(&json).unwrap();
    assert!(back.records[0].a_nu.is_nan());
}

#[test]
fn mesh_halving_converges() {
    let mut c = short(&[0.2, 0.1, 0.05]);
    let mut levels = Vec::new();
    for _ in 0..3 {
        levels.push(run_pipeline(&c).unwrap().records.iter().map(|x| x.a_nu).collect::<Vec<_>>());
        c.grid.core_points *= 2;
        c.grid.h_max /= 2.0;
        c.grid.growth /= 2.0;
    }
    for i in 0..3 {
        let d1 = (levels[1][i] - levels[0][i]).abs();
        let d2 = (levels[2][i] - levels[1][i]).abs();
        assert!(d1 <= 1e-3 * levels[0][i].abs());
        assert!(d2 <= d1 / 4.0, "{d1:e} {d2:e}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = short(&[0.2, 0.1, 0.05]);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let pa = emit_report(&run_pipeline(&cfg).unwrap(), a.path()).unwrap();
    let pb = emit_report(&run_pipeline(&cfg).unwrap(), b.path()).unwrap();
    assert_eq!(fs::read(&pa.csv).unwrap(), fs::read(&pb.csv).unwrap());
    assert_eq!(fs::read(&pa.json).unwrap(), fs::read(&pb.json).unwrap());
    let text = fs::read_to_string(&pa.csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), NU_CSV_HEADER);
    assert_eq!(text.lines().count(), 4);
    let leftovers: Vec<_> = fs::read_dir(a.path()).unwrap().filter_map(|e| e.ok()).filter(|e| e.file_name().to_string_lossy().contains(".tmp")).collect();
    assert!(leftovers.is_empty());
}

#[test]
fn dumps_are_written() {
    let mut cfg = short(&[0.2]);
    cfg.output.dumps = true;
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_report(&run_pipeline(&cfg).unwrap(), dir.path()).unwrap();
    assert_eq!(paths.dumps.len(), 3);
    let heads: Vec<String> = paths.dumps.iter().map(|p| fs::read_to_string(p).unwrap().lines().next().unwrap().to_string()).collect();
    assert_eq!(heads, vec!["s,W,Wprime,R,H", "d,R,spike,f", "s,v,residual,rho"]);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ahmass"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "n = 3\n[corner]\ns0 = 1.0\n[outside]\nfamily = \"hyperbolic\"\n").unwrap();
    let out = bin().arg("pipeline").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nu_list"));

    let typo = dir.path().join("typo.toml");
    fs::write(&typo, "n = 3\nnu_list = [0.2]\n[corner]\ns0 = 1.0\nradius = 2\n[outside]\nfamily = \"hyperbolic\"\n").unwrap();
    let out = bin().arg("pipeline").arg(&typo).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));

    let good = dir.path().join("good.toml");
    fs::write(&good, "n = 3\nnu_list = [0.2, 0.1, 0.05]\n[corner]\narea_radius = 1.0\n[outside]\nfamily = \"ads_schwarzschild\"\nm = 0.1\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bin().arg("pipeline").arg(&good).env(OUTPUT_DIR_ENV, &out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = out_dir.join("ahmass_nu.csv");
    let first = fs::read(&csv).unwrap();
    let json = out_dir.join("ahmass_report.json");
    let out = bin().arg("report").arg(&json).arg("--csv").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("all ok: true"));
    assert_eq!(fs::read(&csv).unwrap(), first);

    let out = bin().args(["check-green", "--n", "4", "--points", "20"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("s,g,gprime,residual,flux"));
    let out = bin().args(["check-geometry", "--n", "3", "--points", "50"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let out = bin().arg("solve").arg(&good).args(["--nu", "0.1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fit order"));
    let rep = dir.path().join("rep.json");
    let out = bin().arg("represent").arg(&good).arg("--out").arg(&rep).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    for key in ["A0", "A1", "A2", "A_fit", "residual", "r0", "omega"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}
