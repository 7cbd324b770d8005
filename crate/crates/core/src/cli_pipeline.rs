//! Configuration, the end-to-end corner pipeline, ν-sweep bounds and report files.
//!
//! Per ν the pipeline runs: smooth → f_source → solve with w = −f → positivity →
//! decay fit (A_ν) → deformation certificate → mass aspect of the deformed metric, both
//! directly and through the gauge shift law → Wang inequality.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corner_smoothing::{
    f_source, make_corner, negative_part_norm, smooth_with, smoothed_scalar_profile, spike, CornerManifold,
    CornerOptions, SmoothedMetric, SmoothingGrid,
};
use crate::error::{Error, Result};
use crate::green_kernel::DEFAULT_TOL;
use crate::mass_aspect::{extract_mass_aspect, gauge_shift_law, geodesic_gauge, w_expansion_check, wang_inequality};
use crate::numerics::fit::linear_fit;
use crate::numerics::grid::Grid;
use crate::radial_solver::{certify_deformation, solve, SolveResult, SolverInput, DEFORMATION_TOL};
use crate::warped_geometry::{dump_rows, AdsSchwarzschildProfile, HyperbolicProfile, Profile, WarpedMetric};

/// Environment variable that overrides the output directory.
pub const OUTPUT_DIR_ENV: &str = "AHMASS_OUTPUT_DIR";

/// Header of the per-ν CSV table.
pub const NU_CSV_HEADER: &str = "nu,H_minus,H_plus,f_norm,A_nu,h_scalar,h_tilde_scalar,mass_lhs,mass_rhs,ok";

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CornerSpec {
    /// Arclength position of the corner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<f64>,
    /// Area radius W(s₀) of the corner; used when s0 is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_radius: Option<f64>,
    #[serde(default)]
    pub allow_hypothesis_violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InsideSpec {
    /// W = sinh(k s)/k, scalar curvature −n(n−1)k².
    Hyperbolic {
        #[serde(default = "one")]
        k: f64,
    },
}

impl Default for InsideSpec {
    fn default() -> Self {
        InsideSpec::Hyperbolic { k: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum OutsideSpec {
    /// V(r) = 1 + r² − 2m r^{2−n}, matched to the inside area radius at s₀.
    AdsSchwarzschild { m: f64 },
    Hyperbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "GridSpec::default_s_hi")]
    pub s_hi: f64,
    /// Nodes across the smoothing core [s₀ − ν²/100, s₀ + ν²/100].
    #[serde(default = "GridSpec::default_core_points")]
    pub core_points: usize,
    #[serde(default = "GridSpec::default_growth")]
    pub growth: f64,
    #[serde(default = "GridSpec::default_h_max")]
    pub h_max: f64,
}

impl GridSpec {
    fn default_s_hi() -> f64 {
        20.0
    }
    fn default_core_points() -> usize {
        64
    }
    fn default_growth() -> f64 {
        0.02
    }
    fn default_h_max() -> f64 {
        0.01
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { s_hi: 20.0, core_points: 64, growth: 0.02, h_max: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "Tolerances::default_series")]
    pub series: f64,
    #[serde(default = "Tolerances::default_solver")]
    pub solver: f64,
    /// Decay-fit window in s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default = "Tolerances::default_deformation")]
    pub deformation: f64,
}

impl Tolerances {
    fn default_series() -> f64 {
        DEFAULT_TOL
    }
    fn default_solver() -> f64 {
        1e-9
    }
    fn default_deformation() -> f64 {
        DEFORMATION_TOL
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { series: DEFAULT_TOL, solver: 1e-9, fit_window: None, deformation: DEFORMATION_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "OutputSpec::default_dir")]
    pub dir: PathBuf,
    #[serde(default = "OutputSpec::default_prefix")]
    pub prefix: String,
    /// Also write per-ν metric, curvature-profile and solution CSVs.
    #[serde(default)]
    pub dumps: bool,
}

impl OutputSpec {
    fn default_dir() -> PathBuf {
        PathBuf::from("out")
    }
    fn default_prefix() -> String {
        "ahmass".into()
    }
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: Self::default_dir(), prefix: Self::default_prefix(), dumps: false }
    }
}

/// Pipeline configuration, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub n: usize,
    pub nu_list: Vec<f64>,
    pub corner: CornerSpec,
    #[serde(default)]
    pub inside: InsideSpec,
    pub outside: OutsideSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

impl PipelineConfig {
    /// The reference run: hyperbolic inside, AdS-Schwarzschild (m = 0.1) outside, sinh s₀ = 1.
    pub fn golden() -> Self {
        PipelineConfig {
            n: 3,
            nu_list: vec![0.2, 0.1, 0.05, 0.025],
            corner: CornerSpec { s0: None, area_radius: Some(1.0), allow_hypothesis_violation: false },
            inside: InsideSpec::default(),
            outside: OutsideSpec::AdsSchwarzschild { m: 0.1 },
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
            output: OutputSpec::default(),
        }
    }

    fn inside_k(&self) -> f64 {
        match self.inside {
            InsideSpec::Hyperbolic { k } => k,
        }
    }

    /// Corner position s₀.
    pub fn s0(&self) -> Result<f64> {
        let k = self.inside_k();
        match (self.corner.s0, self.corner.area_radius) {
            (Some(s), _) => Ok(s),
            (None, Some(r)) => Ok((k * r).asinh() / k),
            (None, None) => Err(Error::Config("corner: one of `s0` or `area_radius` is required".into())),
        }
    }

    /// Check field ranges and fill derived values.
    pub fn normalized(&self) -> Result<PipelineConfig> {
        let mut c = self.clone();
        if c.n < 3 {
            return Err(Error::Config(format!("n: dimension must be at least 3, got {}", c.n)));
        }
        if c.nu_list.is_empty() {
            return Err(Error::Config("nu_list: must not be empty".into()));
        }
        if c.nu_list.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Config("nu_list: entries must be positive".into()));
        }
        if c.nu_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("nu_list: entries must be strictly decreasing".into()));
        }
        let k = c.inside_k();
        if !(k > 0.0) {
            return Err(Error::Config("inside.k: must be positive".into()));
        }
        let s0 = c.s0()?;
        if !(s0 > 0.0) {
            return Err(Error::Config("corner: s0 must be positive".into()));
        }
        c.corner.s0 = Some(s0);
        c.corner.area_radius = Some((k * s0).sinh() / k);
        if c.grid.core_points < 32 {
            return Err(Error::Config(format!("grid.core_points: need at least 32 points in the core, got {}", c.grid.core_points)));
        }
        if !(c.grid.s_hi >= s0 + 12.0) {
            return Err(Error::Config(format!("grid.s_hi: must exceed s0 + 12 = {}", s0 + 12.0)));
        }
        if !(c.grid.growth > 0.0 && c.grid.h_max > 0.0) {
            return Err(Error::Config("grid: growth and h_max must be positive".into()));
        }
        if let OutsideSpec::AdsSchwarzschild { m } = c.outside {
            if !m.is_finite() {
                return Err(Error::Config("outside.m: must be finite".into()));
            }
        }
        if let Some([a, b]) = c.tolerances.fit_window {
            if !(a < b && b <= c.grid.s_hi) {
                return Err(Error::Config("tolerances.fit_window: need lo < hi ≤ s_hi".into()));
            }
        }
        Ok(c)
    }

    fn smoothing_grid(&self) -> SmoothingGrid {
        SmoothingGrid { core_points: self.grid.core_points, growth: self.grid.growth, h_max: self.grid.h_max }
    }
}

/// Parse a TOML configuration.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.normalized()
}

/// Read and validate a TOML configuration file.
pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Output directory after the environment override.
pub fn output_dir(cfg: &PipelineConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| cfg.output.dir.clone())
}

/// Build the corner manifold described by a configuration.
pub fn build_corner(cfg: &PipelineConfig) -> Result<CornerManifold> {
    let n = cfg.n;
    let s0 = cfg.s0()?;
    let k = cfg.inside_k();
    let inside_profile = HyperbolicProfile { n, k, shift: 0.0, s_hi: s0 + 1.0 };
    let r0 = inside_profile.jet(s0).w;
    let inside = WarpedMetric::from_profile(Arc::new(inside_profile), Grid::uniform(0.0, s0, 200)?)?;
    let m = match cfg.outside {
        OutsideSpec::AdsSchwarzschild { m } => m,
        OutsideSpec::Hyperbolic => 0.0,
    };
    let outside_profile: Arc<dyn Profile> = Arc::new(AdsSchwarzschildProfile::new(n, m, r0, s0, cfg.grid.s_hi)?);
    let outside = WarpedMetric::from_profile(outside_profile, Grid::uniform(s0, cfg.grid.s_hi, 4000)?)?;
    make_corner(&inside, &outside, s0, CornerOptions { allow_hypothesis_violation: cfg.corner.allow_hypothesis_violation })
}

mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Mass report of one metric: `h_scalar,trace_integral,moment,ok`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    #[serde(with = "nullable")]
    pub h_scalar: f64,
    #[serde(with = "nullable")]
    pub trace_integral: f64,
    pub moment: Vec<f64>,
    pub ok: bool,
}

/// Everything measured for one ν.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuRecord {
    pub nu: f64,
    #[serde(with = "nullable")]
    pub h_minus: f64,
    #[serde(with = "nullable")]
    pub h_plus: f64,
    /// ∫ |f|^{n/2} dvol.
    #[serde(with = "nullable")]
    pub f_norm: f64,
    /// ∫ ((R_ν + n(n−1))⁻)^{n/2} dvol.
    #[serde(with = "nullable")]
    pub negative_norm: f64,
    /// max over the collar of |R_ν − R − spike|.
    #[serde(with = "nullable")]
    pub spike_remainder: f64,
    #[serde(with = "nullable")]
    pub a_nu: f64,
    #[serde(with = "nullable")]
    pub fit_order: f64,
    #[serde(with = "nullable")]
    pub a_shifted: f64,
    pub positive: bool,
    pub m_matrix: bool,
    #[serde(with = "nullable")]
    pub residual_norm: f64,
    #[serde(with = "nullable")]
    pub margin: f64,
    #[serde(with = "nullable")]
    pub margin_location: f64,
    pub certified: bool,
    /// Mass aspect of the smoothed metric.
    #[serde(with = "nullable")]
    pub h_scalar: f64,
    /// Mass aspect of the unsmoothed corner metric on the same grid.
    #[serde(with = "nullable")]
    pub h_glued: f64,
    /// The two agree bit for bit.
    pub h_unchanged: bool,
    /// Mass aspect of the deformed metric, extracted directly.
    #[serde(with = "nullable")]
    pub h_tilde_scalar: f64,
    /// Mass aspect of the deformed metric from the gauge shift law.
    #[serde(with = "nullable")]
    pub h_tilde_law: f64,
    #[serde(with = "nullable")]
    pub law_rel_error: f64,
    #[serde(with = "nullable")]
    pub w_expansion_rel_error: f64,
    #[serde(with = "nullable")]
    pub mass_lhs: f64,
    #[serde(with = "nullable")]
    pub mass_rhs: f64,
    pub wang_ok: bool,
    pub mass: MassReport,
    /// Positivity, deformation certificate and Wang inequality all hold.
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl NuRecord {
    fn failed(nu: f64, corner: &CornerManifold, msg: String) -> Self {
        let nan = f64::NAN;
        NuRecord {
            nu,
            h_minus: corner.h_minus(),
            h_plus: corner.h_plus(),
            f_norm: nan,
            negative_norm: nan,
            spike_remainder: nan,
            a_nu: nan,
            fit_order: nan,
            a_shifted: nan,
            positive: false,
            m_matrix: false,
            residual_norm: nan,
            margin: nan,
            margin_location: nan,
            certified: false,
            h_scalar: nan,
            h_glued: nan,
            h_unchanged: false,
            h_tilde_scalar: nan,
            h_tilde_law: nan,
            law_rel_error: nan,
            w_expansion_rel_error: nan,
            mass_lhs: nan,
            mass_rhs: nan,
            wang_ok: false,
            mass: MassReport { h_scalar: nan, trace_integral: nan, moment: vec![], ok: false },
            ok: false,
            error: Some(msg),
        }
    }
}

/// Uniform bound |value| ≤ C ν^p over a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuBound {
    /// The exponent p of the bound.
    pub power: f64,
    /// C = max |value|/ν^p.
    #[serde(with = "nullable")]
    pub c: f64,
    #[serde(with = "nullable")]
    pub c_min: f64,
    /// ν at which C is attained.
    #[serde(with = "nullable")]
    pub c_at: f64,
    /// max/min of |value|/ν^p.
    #[serde(with = "nullable")]
    pub spread: f64,
    /// spread ≤ 10.
    pub stable: bool,
    /// |value|/ν^p does not increase as ν decreases.
    pub uniform: bool,
    /// Log–log slope of |value| against ν.
    #[serde(with = "nullable")]
    pub exponent: f64,
}

/// Fit |value| ≤ C ν^p over (ν, value) pairs.
pub fn fit_power_bound(points: &[(f64, f64)], power: f64) -> Result<NuBound> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|(nu, v)| *nu > 0.0 && *v != 0.0 && v.is_finite()).collect();
    if pts.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 nonzero records, got {}", pts.len())));
    }
    let mut sorted = pts.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let ratios: Vec<f64> = sorted.iter().map(|(nu, v)| v.abs() / nu.powf(power)).collect();
    let (mut c, mut c_at) = (0.0, f64::NAN);
    for (r, (nu, _)) in ratios.iter().zip(&sorted) {
        if *r > c {
            c = *r;
            c_at = *nu;
        }
    }
    let c_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = c / c_min;
    let uniform = ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let x: Vec<f64> = sorted.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = sorted.iter().map(|p| p.1.abs().ln()).collect();
    let (exponent, _) = linear_fit(&x, &y)?;
    Ok(NuBound { power, c, c_min, c_at, spread, stable: spread <= 10.0, uniform, exponent })
}

/// |A_ν| ≤ C ν^{1/(n+1)}.
pub fn fit_nu_bound(records: &[NuRecord], n: usize) -> Result<NuBound> {
    let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.nu, r.a_nu)).collect();
    fit_power_bound(&pts, 1.0 / (n as f64 + 1.0))
}

/// Per-ν CSV dumps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NuDumps {
    pub metric: Vec<[f64; 5]>,
    pub profile: Vec<[f64; 4]>,
    pub solution: Vec<[f64; 4]>,
}

/// Pipeline result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    /// Effective configuration after defaults and normalisation.
    pub config: PipelineConfig,
    pub h_minus: f64,
    pub h_plus: f64,
    pub hypothesis_ok: bool,
    pub mean_curvature_ok: bool,
    pub records: Vec<NuRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_bound: Option<NuBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_norm_bound: Option<NuBound>,
    /// |h̃_ν − h| decreases along the sweep.
    pub h_tilde_monotone: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smallest_failing_nu: Option<f64>,
    pub all_ok: bool,
    #[serde(skip)]
    pub dumps: Vec<NuDumps>,
}

/// Smoothed metric, source terms and solution for one ν.
#[derive(Debug, Clone)]
pub struct NuSolve {
    pub smoothed: SmoothedMetric,
    pub f: Vec<f64>,
    pub w: Vec<f64>,
    pub result: SolveResult,
}

/// Smooth the corner at scale ν and solve with f = f_source, w = −f.
pub fn solve_nu(corner: &CornerManifold, cfg: &PipelineConfig, nu: f64) -> Result<NuSolve> {
    let smoothed = smooth_with(corner, nu, &cfg.smoothing_grid())?;
    let g = &smoothed.metric;
    let f = f_source(g);
    let w: Vec<f64> = f.iter().map(|x| -x).collect();
    let mut input = SolverInput::new(g, &f, &w);
    input.tol = cfg.tolerances.solver;
    input.series_tol = cfg.tolerances.series;
    input.fit_window = cfg.tolerances.fit_window.map(|[a, b]| (a, b));
    let result = solve(&input)?;
    Ok(NuSolve { smoothed, f, w, result })
}

fn run_nu(corner: &CornerManifold, cfg: &PipelineConfig, nu: f64, with_dumps: bool) -> Result<(NuRecord, NuDumps)> {
    let n = cfg.n;
    let NuSolve { smoothed: sm, result: res, .. } = solve_nu(corner, cfg, nu)?;
    let g = &sm.metric;
    let cert = certify_deformation(g, &res)?;
    let certified = cert.min_margin >= -cfg.tolerances.deformation;
    let h = extract_mass_aspect(&res.gauge, g)?;
    let h_glued = extract_mass_aspect(&geodesic_gauge(&sm.glued)?, &sm.glued)?;
    let deformed_gauge = geodesic_gauge(&cert.metric)?;
    let ht = extract_mass_aspect(&deformed_gauge, &cert.metric)?;
    let law = gauge_shift_law(res.a, &h, n);
    let wexp = w_expansion_check(g, &res.gauge, &res.v, res.a)?;
    let (lhs, rhs, wang_ok) = wang_inequality(&ht);
    let profile = smoothed_scalar_profile(&sm);
    let mut spike_remainder = 0.0f64;
    for (i, &s) in g.s().iter().enumerate() {
        if s > sm.collar.0 && s < sm.collar.1 {
            let d = s - corner.s0();
            let rem = g.excess()[i] - sm.glued.excess()[i] - spike(corner, nu, d);
            spike_remainder = spike_remainder.max(rem.abs());
        }
    }
    let record = NuRecord {
        nu,
        h_minus: corner.h_minus(),
        h_plus: corner.h_plus(),
        f_norm: res.f_norm,
        negative_norm: negative_part_norm(g),
        spike_remainder,
        a_nu: res.a,
        fit_order: res.fit_order,
        a_shifted: res.a_shifted(),
        positive: res.positive,
        m_matrix: res.m_matrix,
        residual_norm: res.residual_norm,
        margin: cert.min_margin,
        margin_location: cert.location,
        certified,
        h_scalar: h.h_scalar,
        h_glued: h_glued.h_scalar,
        h_unchanged: h.h_scalar.to_bits() == h_glued.h_scalar.to_bits(),
        h_tilde_scalar: ht.h_scalar,
        h_tilde_law: law.h_scalar,
        law_rel_error: ((ht.h_scalar - law.h_scalar) / law.h_scalar.abs().max(1e-300)).abs(),
        w_expansion_rel_error: wexp.rel_error,
        mass_lhs: lhs,
        mass_rhs: rhs,
        wang_ok,
        mass: MassReport { h_scalar: ht.h_scalar, trace_integral: ht.trace_integral, moment: ht.moment.clone(), ok: wang_ok },
        ok: res.positive && certified && wang_ok,
        error: None,
    };
    let dumps = if with_dumps {
        NuDumps {
            metric: dump_rows(g),
            profile: profile.iter().map(|p| [p.d, p.r, p.spike, p.f]).collect(),
            solution: crate::radial_solver::dump_rows(&res),
        }
    } else {
        NuDumps::default()
    };
    Ok((record, dumps))
}

/// Run the full computation for every ν in the configuration.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport> {
    let cfg = cfg.normalized()?;
    let corner = build_corner(&cfg)?;
    let with_dumps = cfg.output.dumps;
    let mut results: Vec<(NuRecord, NuDumps)> = cfg
        .nu_list
        .par_iter()
        .map(|&nu| match run_nu(&corner, &cfg, nu, with_dumps) {
            Ok(r) => r,
            Err(e) => (NuRecord::failed(nu, &corner, e.to_string()), NuDumps::default()),
        })
        .collect();
    results.sort_by(|a, b| b.0.nu.total_cmp(&a.0.nu));
    let (records, dumps): (Vec<NuRecord>, Vec<NuDumps>) = results.into_iter().unzip();
    let a_bound = fit_nu_bound(&records, cfg.n).ok();
    let neg: Vec<(f64, f64)> = records.iter().map(|r| (r.nu, r.negative_norm)).collect();
    let negative_norm_bound = fit_power_bound(&neg, 1.0).ok();
    let gaps: Vec<f64> = records.iter().map(|r| (r.h_tilde_scalar - r.h_scalar).abs()).collect();
    let h_tilde_monotone = gaps.iter().all(|g| g.is_finite()) && gaps.windows(2).all(|w| w[1] <= w[0]);
    let smallest_failing_nu = records.iter().filter(|r| !r.ok).map(|r| r.nu).fold(None, |a: Option<f64>, b| Some(a.map_or(b, |x| x.min(b))));
    let all_ok = records.iter().all(|r| r.ok) && corner.hypothesis_ok();
    Ok(PipelineReport {
        h_minus: corner.h_minus(),
        h_plus: corner.h_plus(),
        hypothesis_ok: corner.hypothesis_ok(),
        mean_curvature_ok: corner.mean_curvature_condition(),
        config: cfg,
        records,
        a_bound,
        negative_norm_bound,
        h_tilde_monotone,
        smallest_failing_nu,
        all_ok,
        dumps,
    })
}

/// Exit status for a finished report: 0 fine, 2 a stage failed, 3 a mass inequality failed.
pub fn report_exit_code(report: &PipelineReport) -> i32 {
    if report.records.iter().any(|r| r.error.is_some()) {
        2
    } else if report.records.iter().any(|r| !r.wang_ok) {
        3
    } else {
        0
    }
}

/// Exit status for an error.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) => 1,
        _ => 2,
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Per-ν CSV table.
pub fn nu_table_csv(report: &PipelineReport) -> String {
    let mut out = String::from(NU_CSV_HEADER);
    out.push('\n');
    for r in &report.records {
        let cells = [r.nu, r.h_minus, r.h_plus, r.f_norm, r.a_nu, r.h_scalar, r.h_tilde_scalar, r.mass_lhs, r.mass_rhs];
        for c in cells {
            out.push_str(&fmt_f(c));
            out.push(',');
        }
        out.push_str(if r.ok { "true" } else { "false" });
        out.push('\n');
    }
    out
}

/// CSV text from a header and numeric rows.
pub fn rows_csv<const K: usize>(header: &str, rows: &[[f64; K]]) -> String {
    let mut out = String::with_capacity(rows.len() * K * 24 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f(*v));
        }
        out.push('\n');
    }
    out
}

/// Write a file by writing a sibling temporary file and renaming it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::InvalidInput(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Files written by [`emit_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub dumps: Vec<PathBuf>,
}

fn nu_tag(nu: f64) -> String {
    format!("{nu}").replace('.', "p")
}

/// Write the per-ν CSV, the JSON report and, if collected, the per-ν dumps.
pub fn emit_report(report: &PipelineReport, dir: &Path) -> Result<ReportPaths> {
    let prefix = &report.config.output.prefix;
    let csv = dir.join(format!("{prefix}_nu.csv"));
    let json = dir.join(format!("{prefix}_report.json"));
    write_atomic(&csv, &nu_table_csv(report))?;
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Numerical(format!("report serialisation: {e}")))?;
    write_atomic(&json, &(text + "\n"))?;
    let mut dumps = Vec::new();
    for (rec, d) in report.records.iter().zip(&report.dumps) {
        if d.metric.is_empty() {
            continue;
        }
        let tag = nu_tag(rec.nu);
        for (name, body) in [
            ("metric", rows_csv("s,W,Wprime,R,H", &d.metric)),
            ("profile", rows_csv("d,R,spike,f", &d.profile)),
            ("solution", rows_csv("s,v,residual,rho", &d.solution)),
        ] {
            let p = dir.join(format!("{prefix}_{name}_nu{tag}.csv"));
            write_atomic(&p, &body)?;
            dumps.push(p);
        }
    }
    Ok(ReportPaths { csv, json, dumps })
}

/// Read a JSON report written by [`emit_report`].
pub fn read_report(path: &Path) -> Result<PipelineReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Human-readable summary.
pub fn render_summary(report: &PipelineReport) -> String {
    let c = &report.config;
    let mut s = String::new();
    let _ = writeln!(s, "n = {}, s0 = {:.12}, area radius = {:.12}", c.n, c.corner.s0.unwrap_or(f64::NAN), c.corner.area_radius.unwrap_or(f64::NAN));
    let _ = writeln!(s, "H- = {:.12}, H+ = {:.12}, hypothesis {}, H- >= H+ {}", report.h_minus, report.h_plus, report.hypothesis_ok, report.mean_curvature_ok);
    let _ = writeln!(s, "{:>8} {:>13} {:>7} {:>11} {:>13} {:>15} {:>15} {:>5}", "nu", "A_nu", "order", "margin", "neg_norm", "h", "h_tilde", "ok");
    for r in &report.records {
        let _ = writeln!(
            s,
            "{:>8} {:>13.5e} {:>7.4} {:>11.3e} {:>13.5e} {:>15.10} {:>15.10} {:>5}",
            r.nu, r.a_nu, r.fit_order, r.margin, r.negative_norm, r.h_scalar, r.h_tilde_scalar, r.ok
        );
        if let Some(e) = &r.error {
            let _ = writeln!(s, "         error: {e}");
        }
    }
    if let Some(b) = &report.a_bound {
        let _ = writeln!(s, "|A_nu| <= C nu^{:.4}: C = {:.6e} (at nu = {}), exponent {:.4}, spread {:.3e}", b.power, b.c, b.c_at, b.exponent, b.spread);
    }
    if let Some(b) = &report.negative_norm_bound {
        let _ = writeln!(s, "negative-part norm <= C nu: C = {:.6e}, exponent {:.4}, spread {:.3e}", b.c, b.exponent, b.spread);
    }
    let _ = writeln!(s, "h_tilde -> h monotone: {}", report.h_tilde_monotone);
    if let Some(nu) = report.smallest_failing_nu {
        let _ = writeln!(s, "smallest failing nu: {nu}");
    }
    let _ = writeln!(s, "all ok: {}", report.all_ok);
    s
}
