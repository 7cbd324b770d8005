use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ahmass::cli_pipeline::{
    build_corner, emit_report, error_exit_code, load_config, output_dir, read_report, render_summary,
    report_exit_code, rows_csv, run_pipeline, solve_nu, write_atomic, PipelineConfig,
};
use ahmass::green_kernel::{sample, KernelTable, DEFAULT_I_MAX};
use ahmass::representation::{represent, RepresentationConfig};
use ahmass::warped_geometry::{make_ads_schwarzschild, make_hyperbolic, riccati_residual, scalar_curvature};
use ahmass::{Error, Result};

#[derive(Parser)]
#[command(name = "ahmass", version, about = "Mass of asymptotically hyperbolic metrics with a corner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the radial fundamental solution of −Δ + n with ODE residual and flux.
    CheckGreen {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
        #[arg(long, default_value_t = 0.05)]
        s_min: f64,
        #[arg(long, default_value_t = 25.0)]
        s_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scalar curvature and Riccati residuals of the hyperbolic and AdS-Schwarzschild models.
    CheckGeometry {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        m: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Solve for a single ν and report the decay fit.
    Solve(NuArgs),
    /// Boundary representation coefficients for a single ν.
    Represent {
        #[command(flatten)]
        nu: NuArgs,
        /// Chart radius of the boundary sphere.
        #[arg(long, default_value_t = 5.0)]
        r0: f64,
    },
    /// Run the full ν sweep and write the CSV and JSON reports.
    Pipeline {
        config: PathBuf,
    },
    /// Re-render a JSON report.
    Report {
        report: PathBuf,
        /// Also rewrite the per-ν CSV next to the report.
        #[arg(long)]
        csv: bool,
    },
}

#[derive(Args)]
struct NuArgs {
    config: PathBuf,
    /// Defaults to the first entry of nu_list.
    #[arg(long)]
    nu: Option<f64>,
    /// Write `s,v,residual,rho` to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn check_green(n: usize, tol: f64, s_min: f64, s_max: f64, points: usize, out: Option<&Path>) -> Result<i32> {
    if !(s_min > 0.0 && s_max > s_min && points >= 2) {
        return Err(Error::InvalidInput("need 0 < s_min < s_max and points ≥ 2".into()));
    }
    let table = KernelTable::new(n, tol, DEFAULT_I_MAX)?;
    let ratio = (s_max / s_min).powf(1.0 / (points - 1) as f64);
    let s: Vec<f64> = (0..points).map(|i| s_min * ratio.powi(i as i32)).collect();
    let rows: Vec<[f64; 5]> = sample(&table, &s)?.iter().map(|k| [k.s, k.g, k.gprime, k.residual, k.flux]).collect();
    let worst = rows.iter().map(|r| (r[3] / r[1]).abs()).fold(0.0, f64::max);
    println!("n = {n}, kappa = {:.16e}, theta(1) = {:.16e}", table.kappa(), table.theta0());
    println!("max |residual/G| = {worst:.3e}");
    let text = rows_csv("s,g,gprime,residual,flux", &rows);
    match out {
        Some(p) => write_atomic(p, &text)?,
        None => print!("{text}"),
    }
    Ok(if worst <= 1e-7 { 0 } else { 2 })
}

fn check_geometry(n: usize, m: f64, points: usize) -> Result<i32> {
    let nf = n as f64;
    let hyp = make_hyperbolic(n, 12.0, 4000)?;
    let ads = make_ads_schwarzschild(n, m, 1.0, 0.0, 12.0, 4000)?;
    let mut ok = true;
    for (name, g) in [("hyperbolic", &hyp), ("ads_schwarzschild", &ads)] {
        let (lo, hi) = g.domain();
        let (mut r_dev, mut ric) = (0.0f64, 0.0f64);
        for i in 1..points {
            let s = lo + (hi - lo) * i as f64 / points as f64;
            r_dev = r_dev.max((scalar_curvature(g, s)? + nf * (nf - 1.0)).abs());
            ric = ric.max(riccati_residual(g, s)?.abs());
        }
        println!("{name}: max |R + n(n-1)| = {r_dev:.3e}, max riccati residual = {ric:.3e}");
        ok &= r_dev <= 1e-8 && ric <= 1e-8;
    }
    Ok(if ok { 0 } else { 2 })
}

fn single_nu(args: &NuArgs) -> Result<(PipelineConfig, f64)> {
    let cfg = load_config(&args.config)?;
    let nu = args.nu.unwrap_or(cfg.nu_list[0]);
    Ok((cfg, nu))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::CheckGreen { n, tol, s_min, s_max, points, out } => check_green(n, tol, s_min, s_max, points, out.as_deref()),
        Cmd::CheckGeometry { n, m, points } => check_geometry(n, m, points),
        Cmd::Solve(args) => {
            let (cfg, nu) = single_nu(&args)?;
            let corner = build_corner(&cfg)?;
            let sol = solve_nu(&corner, &cfg, nu)?;
            let r = &sol.result;
            println!("nu = {nu}, nodes = {}", r.s.len());
            println!("A = {:.16e}, fit order = {:.6}, compliant = {}", r.a, r.fit_order, r.decay.compliant);
            println!("positive = {}, residual = {:.3e}", r.positive, r.residual_norm);
            if let Some(p) = &args.out {
                write_atomic(p, &rows_csv("s,v,residual,rho", &ahmass::radial_solver::dump_rows(r)))?;
            }
            Ok(if r.positive { 0 } else { 2 })
        }
        Cmd::Represent { nu: args, r0 } => {
            let (cfg, nu) = single_nu(&args)?;
            let corner = build_corner(&cfg)?;
            let sol = solve_nu(&corner, &cfg, nu)?;
            let g = &sol.smoothed.metric;
            let rep = represent(g, &sol.result, &sol.f, &sol.w, &RepresentationConfig::new(cfg.n, r0), false)?;
            let text = serde_json::to_string_pretty(&rep).map_err(|e| Error::Numerical(e.to_string()))?;
            match &args.out {
                Some(p) => write_atomic(p, &(text + "\n"))?,
                None => println!("{text}"),
            }
            Ok(0)
        }
        Cmd::Pipeline { config } => {
            let cfg = load_config(&config)?;
            let report = run_pipeline(&cfg)?;
            let paths = emit_report(&report, &output_dir(&cfg))?;
            print!("{}", render_summary(&report));
            println!("wrote {} and {}", paths.csv.display(), paths.json.display());
            Ok(report_exit_code(&report))
        }
        Cmd::Report { report, csv } => {
            let rep = read_report(&report)?;
            print!("{}", render_summary(&rep));
            if csv {
                let dir = report.parent().unwrap_or(Path::new("."));
                emit_report(&rep, dir)?;
            }
            Ok(report_exit_code(&rep))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
