//! Command-line front end: builds a surface and runs one check suite,
//! producing a JSON report and CSV field dumps.
//!
//! Exit codes: 0 when every check passes, 2 when a check fails, 1 on usage,
//! configuration or computation errors.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::bryant::{
    bryant_transform, closure_residual, completeness_bound_check, ellipticity_check, flat_metric,
    recover_pair, recover_pair_from_forms, PhiTable, WeingartenProfile,
};
use crate::chart::{fixture, Chart};
use crate::codazzi::{
    christoffel, codazzi_residual, codazzi_tensor_general, gauss_curvature, gradient_norm_sq,
    hopf_defect_residual, traceless_codazzi_function, OperatorField, VectorField,
};
use crate::error::GeomError;
use crate::grid::ScalarField;
use crate::hopf::{
    conformal_factor, cr_residual, grove_decompose, grove_f1_residual, hopf_coefficient,
    modulus_identity_residual, winding_index, HopfField, DEFAULT_TOL_ISO,
};
use crate::pair::{
    curvatures, mean_curvature, third_form, CurvatureData, FundamentalPair, DEFAULT_TOL_UMB,
};
use crate::rotgen::{
    as_chart, default_step, integrate_profile, umbilic_sphere_radius, ChartKind, ProfileState,
    RotationalSurface,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{check}: {source}")]
    Check {
        check: String,
        #[source]
        source: GeomError,
    },
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

type CliResult<T> = std::result::Result<T, CliError>;

fn at<T>(check: &str, r: crate::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::Check {
        check: check.to_string(),
        source,
    })
}

#[derive(Parser, Debug)]
#[command(
    name = "codazzi",
    version,
    about = "Checks for Codazzi pairs, Hopf differentials and special Weingarten surfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Fixture name, or `rotgen` for a generated rotational band.
    #[arg(long, global = true)]
    pub surface: Option<String>,

    /// Comma-separated numeric parameters of the surface or generator.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub params: Vec<f64>,

    /// `const:<H0>`, `linear:<c>,<eps>`, `table:<path>`, `sqrt` or `constk:<K0>`.
    #[arg(long, global = true)]
    pub profile: Option<String>,

    /// Grid resolution `NUxNV`.
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,

    /// Tolerance override `name=value`; `*` applies to every check.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,

    /// Directory receiving `report.json` and CSV files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Codazzi, Hopf and Grove identities on a surface.
    Verify,
    /// Special Weingarten transform, recovery and flat metric.
    Transform,
    /// Integrate a rotational meridian.
    Generate,
    /// Grove decomposition in a chart conformal for the second form.
    Grove,
    /// Winding index of the Hopf differential around the grid centre.
    Index,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Transform => "transform",
            Command::Generate => "generate",
            Command::Grove => "grove",
            Command::Index => "index",
        }
    }
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid `{s}` is not of the form NUxNV"))?;
    let n = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("grid `{s}`: {e}"))
    };
    Ok((n(a)?, n(b)?))
}

fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, val) = s
        .split_once('=')
        .ok_or_else(|| format!("tolerance `{s}` is not of the form name=value"))?;
    let v: f64 = val
        .trim()
        .parse()
        .map_err(|e| format!("tolerance `{s}`: {e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("tolerance `{s}` must be positive"));
    }
    Ok((name.trim().to_string(), v))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Meta {
    pub command: String,
    pub surface: String,
    pub params: Vec<f64>,
    pub profile: Option<String>,
    pub grid: [usize; 2],
    pub steps: [f64; 2],
    pub version: String,
    pub values: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub meta: Meta,
    pub checks: Vec<CheckRecord>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// A report plus the CSV files to write next to it.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<(String, String)>,
}

struct Suite<'a> {
    overrides: &'a BTreeMap<String, f64>,
    used: BTreeSet<String>,
    checks: Vec<CheckRecord>,
}

impl<'a> Suite<'a> {
    fn new(overrides: &'a BTreeMap<String, f64>) -> Self {
        Suite {
            overrides,
            used: BTreeSet::new(),
            checks: Vec::new(),
        }
    }

    fn record(&mut self, name: &str, residual: f64, default_tol: f64) {
        let tolerance = if let Some(&t) = self.overrides.get(name) {
            self.used.insert(name.to_string());
            t
        } else if let Some(&t) = self.overrides.get("*") {
            self.used.insert("*".to_string());
            t
        } else {
            default_tol
        };
        self.checks.push(CheckRecord {
            name: name.to_string(),
            max_residual: residual,
            tolerance,
            pass: residual <= tolerance,
        });
    }

    fn finish(self) -> CliResult<Vec<CheckRecord>> {
        let unknown: Vec<&String> = self
            .overrides
            .keys()
            .filter(|k| !self.used.contains(*k))
            .collect();
        if !unknown.is_empty() {
            let names: Vec<&str> = self.checks.iter().map(|c| c.name.as_str()).collect();
            return Err(CliError::Usage(format!(
                "tolerance override for unknown check(s) {unknown:?}; this run has {names:?}"
            )));
        }
        Ok(self.checks)
    }
}

/// Parses `args` (program name first), runs the command and writes the
/// outputs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli).and_then(|o| emit(&cli, &o).map(|_| o)) {
        Ok(outcome) => {
            for c in outcome.report.checks.iter().filter(|c| !c.pass) {
                eprintln!(
                    "check failed: {} (max residual {:e} > tolerance {:e})",
                    c.name, c.max_residual, c.tolerance
                );
            }
            if outcome.report.passed() {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> CliResult<()> {
    let json = report_json(&outcome.report);
    println!("{json}");
    if let Some(dir) = &cli.out {
        let io = |p: &std::path::Path, e: std::io::Error| CliError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let path = dir.join("report.json");
        fs::write(&path, format!("{json}\n")).map_err(|e| io(&path, e))?;
        for (name, body) in &outcome.files {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| io(&path, e))?;
        }
    }
    Ok(())
}

pub fn report_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serialisation")
}

/// Runs the command without touching the file system.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let overrides: BTreeMap<String, f64> = cli.tol.iter().cloned().collect();
    let mut suite = Suite::new(&overrides);
    let mut values = BTreeMap::new();
    let mut files = Vec::new();
    let (surface, domain) = match cli.command {
        Command::Verify => verify(cli, &mut suite, &mut values, &mut files)?,
        Command::Transform => transform(cli, &mut suite, &mut values)?,
        Command::Generate => generate(cli, &mut suite, &mut values, &mut files)?,
        Command::Grove => grove(cli, &mut suite, &mut files)?,
        Command::Index => index(cli, &mut suite, &mut values, &mut files)?,
    };
    let checks = suite.finish()?;
    let (grid, steps) = match domain {
        Some(d) => ([d.nu, d.nv], [d.du(), d.dv()]),
        None => ([0, 0], [0.0, 0.0]),
    };
    Ok(Outcome {
        report: Report {
            meta: Meta {
                command: cli.command.name().to_string(),
                surface,
                params: cli.params.clone(),
                profile: cli.profile.clone(),
                grid,
                steps,
                version: env!("CARGO_PKG_VERSION").to_string(),
                values,
            },
            checks,
        },
        files,
    })
}

type Values = BTreeMap<String, Value>;
type Files = Vec<(String, String)>;
type Ran = (String, Option<crate::grid::Domain2D>);

fn profile_of(cli: &Cli) -> CliResult<WeingartenProfile> {
    let spec = cli
        .profile
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("`{}` needs --profile", cli.command.name())))?;
    at("profile", WeingartenProfile::parse(spec))
}

/// Parameters of a generated band: `r0, s_lo, s_hi`.
const BAND_DEFAULTS: [f64; 3] = [0.6, 0.1, 1.0];
const BAND_GRID: (usize, usize) = (64, 64);

fn band_surface(
    cli: &Cli,
    profile: &WeingartenProfile,
) -> CliResult<(RotationalSurface, (f64, f64))> {
    if cli.params.len() > 3 {
        return Err(CliError::Usage(
            "rotgen takes at most 3 parameters: r0,s_lo,s_hi".into(),
        ));
    }
    let mut p = BAND_DEFAULTS;
    p[..cli.params.len()].copy_from_slice(&cli.params);
    let [r0, s_lo, s_hi] = p;
    if !(r0 > 0.0 && 0.0 <= s_lo && s_lo < s_hi) {
        return Err(CliError::Usage(
            "rotgen needs r0 > 0 and 0 <= s_lo < s_hi".into(),
        ));
    }
    let ds = umbilic_sphere_radius(profile).map_or(1e-3, |r| 1e-3 * r.min(1.0));
    let init = ProfileState {
        s: 0.0,
        r: r0,
        z: 0.0,
        theta: std::f64::consts::FRAC_PI_2,
    };
    let surf = at("rotgen", integrate_profile(profile, init, s_hi + 0.1, ds))?;
    Ok((surf, (s_lo, s_hi)))
}

fn fixture_chart(cli: &Cli, name: &str) -> CliResult<Chart> {
    at("surface", fixture(name, &cli.params, cli.grid))
}

fn surface_name(cli: &Cli, default: &str) -> String {
    cli.surface.clone().unwrap_or_else(|| default.to_string())
}

fn max_abs_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.zip_map(b, |x, y| (x - y).abs()).max_abs()
}

const FD_JET_BUDGET: f64 = 100.0;

fn verify(
    cli: &Cli,
    suite: &mut Suite<'_>,
    values: &mut Values,
    files: &mut Files,
) -> CliResult<Ran> {
    let name = surface_name(cli, "sphere");
    let chart = if name == "rotgen" {
        let profile = profile_of(cli)?;
        let (surf, range) = band_surface(cli, &profile)?;
        at(
            "surface",
            as_chart(
                &surf,
                &ChartKind::ArcLength,
                range,
                cli.grid.unwrap_or(BAND_GRID),
            ),
        )?
    } else {
        fixture_chart(cli, &name)?
    };
    let pair = at("forms", FundamentalPair::from_chart(&chart))?;
    let curv = at("curvatures", curvatures(&pair, DEFAULT_TOL_UMB))?;
    values.insert("isothermal".into(), json!(chart.isothermal));
    values.insert("analytic_jets".into(), json!(chart.analytic_jets.is_some()));
    // Derivative-based checks lose about two digits on charts whose jets are
    // themselves finite differences.
    let budget = if chart.analytic_jets.is_some() {
        1.0
    } else {
        FD_JET_BUDGET
    };

    suite.record(
        "codazzi_residual",
        at("codazzi_residual", codazzi_residual(&pair, None))?,
        1e-6 * budget,
    );

    let tc = at("traceless_gradient", traceless_codazzi_function(&pair))?;
    let grad = gradient_norm_sq(&pair.first, &curv.h);
    suite.record(
        "traceless_gradient",
        max_abs_diff(&tc, &grad),
        1e-5 * budget,
    );

    let d = *pair.domain();
    let gamma = at("codazzi_tensor", christoffel(&pair.first))?;
    let shape = at("codazzi_tensor", OperatorField::shape(&pair))?;
    let (eu, ev) = (VectorField::coordinate(d, 0), VectorField::coordinate(d, 1));
    let x = eu.add(&ev);
    let skew = codazzi_tensor_general(&gamma, &shape, &x, &ev)
        .add(&codazzi_tensor_general(&gamma, &shape, &ev, &x))
        .max_norm();
    suite.record("codazzi_tensor_skew", skew, 1e-12);
    // T_{HS}(∂u, ∂v) = H T_S(∂u, ∂v) + H_u S∂v - H_v S∂u
    let h = &curv.h;
    let lhs = codazzi_tensor_general(&gamma, &shape.scaled(h), &eu, &ev);
    let rhs = codazzi_tensor_general(&gamma, &shape, &eu, &ev)
        .scaled(h)
        .add(&shape.apply(&ev).scaled(&h.d_u()))
        .sub(&shape.apply(&eu).scaled(&h.d_v()));
    suite.record(
        "codazzi_tensor_scaling",
        lhs.sub(&rhs).max_norm(),
        1e-5 * budget,
    );

    let brioschi = at("gauss_equation", gauss_curvature(&pair.first))?;
    suite.record("gauss_equation", max_abs_diff(&brioschi, &curv.k), 1e-3);

    let k_min = curv
        .k
        .values
        .iter()
        .fold(f64::INFINITY, |m, k| m.min(k.abs()));
    if k_min > 1e-6 {
        let p3 = at(
            "third_form",
            FundamentalPair::from_forms(third_form(&pair), pair.second.clone()),
        )?;
        suite.record(
            "third_form_codazzi",
            at("third_form_codazzi", codazzi_residual(&p3, None))?,
            1e-5 * budget,
        );
        let expected = curv.h.zip_map(&curv.k, |h, k| h / k);
        suite.record(
            "third_form_mean",
            max_abs_diff(&mean_curvature(&p3), &expected),
            1e-6,
        );
    }

    // |Q| / λ = sqrt(H² - K) in any conformal chart, so it is reported
    // whether or not this chart is one.
    let q_over_lambda = curv.t.max_abs();
    values.insert("max_q_over_lambda".into(), json!(q_over_lambda));
    if curv.umbilic_mask(DEFAULT_TOL_UMB).iter().all(|&u| u) {
        suite.record("q_vanishes", q_over_lambda, 1e-6);
    }

    if chart.isothermal {
        let hf = at("hopf", hopf_coefficient(&pair, DEFAULT_TOL_ISO))?;
        let cr = cr_residual(&hf);
        suite.record("cr_residual", cr.max_norm(), 1e-5 * budget);
        suite.record(
            "modulus_identity",
            modulus_identity_residual(&hf, &curv.k).max_abs(),
            1e-8,
        );
        let (res, mask) = at(
            "hopf_defect",
            hopf_defect_residual(&pair, &hf, DEFAULT_TOL_UMB),
        )?;
        suite.record("hopf_defect", res.max_abs_masked(&mask), 1e-5 * budget);
        values.insert("max_abs_q".into(), json!(hf.q.max_norm()));
        files.push(("hopf.csv".into(), hopf_csv(&hf, &curv, &cr)));
    }

    match grove_decompose(&pair, DEFAULT_TOL_ISO) {
        Ok(_) => grove_checks(&pair, &curv, suite, None)?,
        Err(GeomError::NotIiIsothermal { .. } | GeomError::IiNotDefinite { .. }) => {}
        Err(e) => {
            return Err(CliError::Check {
                check: "grove".into(),
                source: e,
            })
        }
    }
    Ok((name, Some(d)))
}

fn grove_checks(
    pair: &FundamentalPair,
    curv: &CurvatureData,
    suite: &mut Suite<'_>,
    files: Option<&mut Files>,
) -> CliResult<()> {
    let dec = at("grove", grove_decompose(pair, DEFAULT_TOL_ISO))?;
    let hres = dec.mean_curvature().zip_map(&curv.h, |a, b| a - b);
    let kres = dec.extrinsic_curvature().zip_map(&curv.k, |a, b| a - b);
    let f1 = grove_f1_residual(&dec, &curv.k);
    suite.record("grove_hk_mean", hres.max_abs(), 1e-6);
    suite.record("grove_hk_extrinsic", kres.max_abs(), 1e-6);
    suite.record("grove_f1", f1.max_norm(), 1e-4);
    if let Some(files) = files {
        let d = *pair.domain();
        let mut s = String::from(
            "u,v,rho,lambda,re_p,im_p,hk_mean_res,hk_extrinsic_res,f1_res_re,f1_res_im\n",
        );
        for k in 0..d.len() {
            let (u, v) = d.point(k);
            let p = dec.p.values[k];
            let f = f1.values[k];
            csv_row(
                &mut s,
                &[
                    u,
                    v,
                    dec.rho.values[k],
                    dec.lambda.values[k],
                    p.re,
                    p.im,
                    hres.values[k],
                    kres.values[k],
                    f.re,
                    f.im,
                ],
            );
        }
        files.push(("grove.csv".into(), s));
    }
    Ok(())
}

fn csv_row(out: &mut String, vals: &[f64]) {
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

fn hopf_csv(hf: &HopfField, curv: &CurvatureData, cr: &crate::grid::ComplexField) -> String {
    let d = *hf.domain();
    let mut s = String::from("u,v,re_q,im_q,lambda,h,k,cr_res_re,cr_res_im\n");
    for k in 0..d.len() {
        let (u, v) = d.point(k);
        let q = hf.q.values[k];
        let c = cr.values[k];
        csv_row(
            &mut s,
            &[
                u,
                v,
                q.re,
                q.im,
                hf.lambda.values[k],
                hf.h.values[k],
                curv.k.values[k],
                c.re,
                c.im,
            ],
        );
    }
    s
}

fn transform(cli: &Cli, suite: &mut Suite<'_>, values: &mut Values) -> CliResult<Ran> {
    let profile = profile_of(cli)?;
    let name = surface_name(cli, "rotgen");
    let (chart, band) = if name == "rotgen" {
        let (surf, range) = band_surface(cli, &profile)?;
        let grid = cli.grid.unwrap_or(BAND_GRID);
        let chart = at(
            "surface",
            as_chart(&surf, &ChartKind::ArcLength, range, grid),
        )?;
        (chart, Some((surf, range, grid)))
    } else {
        (fixture_chart(cli, &name)?, None)
    };
    let pair = at("forms", FundamentalPair::from_chart(&chart))?;
    let curv = at("curvatures", curvatures(&pair, DEFAULT_TOL_UMB))?;
    let t_max = curv.t.max_abs();
    // The recovery chart of a generated band samples slightly past the
    // requested range, so the table has to cover the whole meridian.
    let t_cover = band
        .as_ref()
        .map_or(t_max, |(surf, _, _)| surf.max_t().max(t_max));

    let x_max = (t_cover * t_cover).max(1.0);
    let ell = ellipticity_check(&profile, x_max, 1000);
    values.insert("ellipticity_margin".into(), json!(ell.margin));
    if !ell.elliptic {
        return Err(CliError::Check {
            check: "ellipticity".into(),
            source: GeomError::NotElliptic {
                t_max: x_max.sqrt(),
                margin: ell.margin,
            },
        });
    }
    let table_max = (1.05 * t_cover + 1e-3).min(0.999 * profile.extent().sqrt());
    let table = at(
        "phi_table",
        PhiTable::with_default_nodes(&profile, table_max),
    )?;
    values.insert("t_max".into(), json!(t_max));

    let wres = (0..curv.h.values.len())
        .map(|k| (curv.h.values[k] - profile.f(curv.t.values[k].powi(2))).abs())
        .fold(0.0, f64::max);
    suite.record("weingarten_relation", wres, 1e-8);

    let phi = at("phi_table", table.evaluate(&curv.t))?;
    let bp = at("bryant_transform", bryant_transform(&pair, &phi))?;
    let ab_pair = at("bryant_transform", bp.as_pair())?;
    let ab = at("bryant_transform", curvatures(&ab_pair, 1e-8))?;
    suite.record("transform_mean", ab.h.max_abs(), 1e-8);
    let kres = ab.k.zip_map(&curv.t, |k, t| (k + t * t).abs()).max_abs();
    suite.record("transform_extrinsic", kres, 1e-6);
    if profile.is_constant() {
        let exact =
            bp.a.max_abs_diff(&pair.first)
                .max(bp.b.max_abs_diff(&crate::pair::traceless_part(&pair)));
        suite.record("transform_identity", exact, 0.0);
    }
    suite.record(
        "closure_residual",
        closure_residual(&curv, &phi.phi).max_norm(),
        1e-5,
    );
    suite.record(
        "transform_codazzi",
        at("transform_codazzi", codazzi_residual(&ab_pair, None))?,
        1e-5,
    );

    let umbilic_free = !curv.umbilic_mask(DEFAULT_TOL_UMB).iter().any(|&u| u);
    if umbilic_free {
        let g0 = at(
            "flat_metric",
            flat_metric(&curv, &bp.a, DEFAULT_TOL_UMB, None),
        )?;
        let kg = at("flat_metric", gauss_curvature(&g0))?;
        suite.record("flat_metric", kg.max_abs(), 1e-3);
    }
    let comp = at(
        "completeness",
        completeness_bound_check(&pair, &bp.a, &phi, 0.09),
    )?;
    suite.record("completeness_psd", (-comp.min_eigenvalue).max(0.0), 1e-10);
    values.insert("c2".into(), json!(comp.c2));

    let roundtrip = match band {
        Some((surf, range, grid)) => {
            let iso = at(
                "recovery",
                as_chart(&surf, &ChartKind::AIsothermal(table.clone()), range, grid),
            )?;
            let p_iso = at("recovery", FundamentalPair::from_chart(&iso))?;
            let c_iso = at("recovery", curvatures(&p_iso, DEFAULT_TOL_UMB))?;
            let phi_iso = at("recovery", table.evaluate(&c_iso.t))?;
            let bp_iso = at("recovery", bryant_transform(&p_iso, &phi_iso))?;
            let hf = at(
                "recovery",
                hopf_coefficient(&at("recovery", bp_iso.as_pair())?, DEFAULT_TOL_ISO),
            )?;
            let back = at(
                "recovery",
                recover_pair(&bp_iso.a, &hf.q, &table, DEFAULT_TOL_ISO),
            )?;
            rel_diff(&p_iso, &back)
        }
        None => {
            let back = if conformal_factor(&bp.a, DEFAULT_TOL_ISO).is_ok() {
                let hf = at("recovery", hopf_coefficient(&ab_pair, DEFAULT_TOL_ISO))?;
                at(
                    "recovery",
                    recover_pair(&bp.a, &hf.q, &table, DEFAULT_TOL_ISO),
                )?
            } else {
                at(
                    "recovery",
                    recover_pair_from_forms(&bp, &table, DEFAULT_TOL_UMB),
                )?
            };
            rel_diff(&pair, &back)
        }
    };
    suite.record("recovery_roundtrip", roundtrip, 1e-6);
    Ok((name, Some(*pair.domain())))
}

fn rel_diff(a: &FundamentalPair, b: &FundamentalPair) -> f64 {
    a.first
        .max_rel_diff(&b.first)
        .max(a.second.max_rel_diff(&b.second))
}

fn generate(
    cli: &Cli,
    suite: &mut Suite<'_>,
    values: &mut Values,
    files: &mut Files,
) -> CliResult<Ran> {
    let profile = profile_of(cli)?;
    if cli.params.len() > 4 {
        return Err(CliError::Usage(
            "generate takes at most 4 parameters: r0,theta0,s_max,ds".into(),
        ));
    }
    let r_a = umbilic_sphere_radius(&profile).ok();
    let scale = r_a.unwrap_or(1.0);
    let mut p = [0.0, 0.0, 4.0 * std::f64::consts::PI * scale, 1e-3 * scale];
    if let Ok(ds) = default_step(&profile) {
        p[3] = ds;
    }
    p[..cli.params.len()].copy_from_slice(&cli.params);
    let [r0, theta, s_max, ds] = p;
    let init = ProfileState {
        s: 0.0,
        r: r0,
        z: 0.0,
        theta,
    };
    let surf = at("generate", integrate_profile(&profile, init, s_max, ds))?;
    suite.record("weingarten_residual", surf.weingarten_residual(), 1e-8);
    suite.record("richardson_error", surf.error_estimate, 1e-6);
    values.insert("closed".into(), json!(surf.closed));
    values.insert("height".into(), json!(surf.height()));
    values.insert("samples".into(), json!(surf.len()));
    values.insert("s_end".into(), json!(surf.s_range().1));
    values.insert("r_a".into(), json!(r_a));
    if let (true, Some(r)) = (surf.closed, r_a) {
        suite.record("height_bound_4r", (surf.height() - 4.0 * r).max(0.0), 1e-9);
    }
    let mut buf = Vec::new();
    surf.write_csv(&mut buf).map_err(|e| CliError::Io {
        path: "profile.csv".into(),
        message: e.to_string(),
    })?;
    files.push((
        "profile.csv".into(),
        String::from_utf8(buf).expect("ascii csv"),
    ));
    Ok(("rotgen".into(), None))
}

fn grove(cli: &Cli, suite: &mut Suite<'_>, files: &mut Files) -> CliResult<Ran> {
    let mut name = surface_name(cli, "ellipsoid_rev_ii_iso");
    if name == "ellipsoid_rev" {
        name = "ellipsoid_rev_ii_iso".into();
    }
    let chart = fixture_chart(cli, &name)?;
    let pair = at("forms", FundamentalPair::from_chart(&chart))?;
    let curv = at("curvatures", curvatures(&pair, DEFAULT_TOL_UMB))?;
    grove_checks(&pair, &curv, suite, Some(files))?;
    Ok((name, Some(*pair.domain())))
}

/// Loop half-widths (in grid steps) around the centre of the chart.
const INDEX_LOOPS: [usize; 2] = [8, 20];

fn index(
    cli: &Cli,
    suite: &mut Suite<'_>,
    values: &mut Values,
    files: &mut Files,
) -> CliResult<Ran> {
    let mut name = surface_name(cli, "ellipsoid_rev_pole");
    if name == "ellipsoid_rev" {
        name = "ellipsoid_rev_pole".into();
    }
    let grid = cli.grid.or(Some((64, 64)));
    let chart = at("surface", fixture(&name, &cli.params, grid))?;
    let pair = at("forms", FundamentalPair::from_chart(&chart))?;
    let curv = at("curvatures", curvatures(&pair, DEFAULT_TOL_UMB))?;
    let hf = at("hopf", hopf_coefficient(&pair, DEFAULT_TOL_ISO))?;
    let d = *pair.domain();
    let centre = (d.nu / 2, d.nv / 2);
    let mut indices = Vec::new();
    for k in INDEX_LOOPS {
        if centre.0 < k || centre.1 < k || centre.0 + k >= d.nu || centre.1 + k >= d.nv {
            return Err(CliError::Usage(format!(
                "grid too small for a loop of half-width {k}"
            )));
        }
        let rep = at(
            "index",
            winding_index(&hf, &d.square_loop(centre, k), 1e-12),
        )?;
        values.insert(format!("winding_k{k}"), json!(rep.winding));
        values.insert(format!("foliation_index_k{k}"), json!(rep.foliation_index));
        indices.push(rep.foliation_index);
    }
    suite.record("index_invariance", (indices[0] - indices[1]).abs(), 1e-12);
    files.push(("hopf.csv".into(), hopf_csv(&hf, &curv, &cr_residual(&hf))));
    Ok((name, Some(d)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> CliResult<Outcome> {
        let cli =
            Cli::try_parse_from(std::iter::once("codazzi").chain(args.iter().copied())).unwrap();
        execute(&cli)
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_grid("64x32").unwrap(), (64, 32));
        assert!(parse_grid("64").is_err());
        assert_eq!(
            parse_tol("cr_residual=1e-3").unwrap(),
            ("cr_residual".into(), 1e-3)
        );
        assert!(parse_tol("x=-1").is_err());
        assert!(parse_tol("x=0").is_err());
    }

    #[test]
    fn verify_sphere_passes_with_zero_q() {
        let o = exec(&["verify", "--surface", "sphere_stereo", "--grid", "64x64"]).unwrap();
        assert!(o.report.passed(), "{:#?}", o.report.checks);
        assert!(o.report.meta.values["max_abs_q"].as_f64().unwrap() < 1e-12);
        assert!(o.files.iter().any(|(n, _)| n == "hopf.csv"));
    }

    #[test]
    fn unattainable_tolerance_fails() {
        let o = exec(&[
            "verify",
            "--surface",
            "catenoid",
            "--grid",
            "48x48",
            "--tol",
            "*=1e-30",
        ])
        .unwrap();
        assert!(!o.report.passed());
        let err = exec(&["verify", "--surface", "plane", "--tol", "nonsense=1"]);
        assert!(matches!(err, Err(CliError::Usage(_))));
    }

    #[test]
    fn transform_cylinder_with_constant_profile() {
        let o = exec(&[
            "transform",
            "--surface",
            "cylinder",
            "--params",
            "1",
            "--profile",
            "const:0.5",
            "--grid",
            "32x32",
        ])
        .unwrap();
        assert!(o.report.passed(), "{:#?}", o.report.checks);
        assert!(o
            .report
            .checks
            .iter()
            .any(|c| c.name == "transform_identity" && c.max_residual == 0.0));
    }

    #[test]
    fn sqrt_profile_aborts() {
        let err = exec(&[
            "transform",
            "--surface",
            "cylinder",
            "--profile",
            "sqrt",
            "--grid",
            "16x16",
        ]);
        assert!(matches!(err, Err(CliError::Check { ref check, .. }) if check == "ellipticity"));
    }

    #[test]
    fn generate_sphere_profile() {
        let o = exec(&["generate", "--profile", "const:0.5"]).unwrap();
        assert!(o.report.passed());
        let h = o.report.meta.values["height"].as_f64().unwrap();
        assert!((h - 4.0).abs() < 1e-6);
        assert!(o.files[0].1.starts_with("s,r,z,theta,kappa1,kappa2,H,K\n"));
    }
}
