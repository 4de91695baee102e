//! Validation and dispatch of experiments.

use std::collections::BTreeMap;

use hypocauchy::cauchy::{
    apply_tz, calibrate_normalization, cauchy_formula_check, characteristic_distance, interior_test_points,
    kernel_sup_experiment, verify_solution, Grid, ScalarFunction,
};
use hypocauchy::charset::{classify_point, compare_stated_orders, decompose_example, CharKind};
use hypocauchy::loj::{charts_from_decomposition, check_inequality_arc_in, estimate_mu, least_squares, loj_number_region};
use hypocauchy::polyalg::{FactoredPolynomial, Order};
use hypocauchy::quad::{integrate_quasihomogeneous, QuadratureSpec, SingularLine};
use hypocauchy::similarity::{factor_solution, fixed_point_solve, SimilarityOptions};
use hypocauchy::structures::{
    AnalyticField, ChartKind, ComplexPolynomial, FirstIntegral, HolomorphicComposite, Point, Region,
};
use hypocauchy::Complex64;

use crate::config::{
    complex_polynomial, CauchyCheckParams, ExperimentConfig, ExperimentKind, KernelNormParams, LojParams, ScalingParams,
    SimilarityParams, SolveParams, TestFieldConfig,
};
use crate::error::CliError;

/// A CSV table with a mandatory header row.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, headers: &[&str]) -> Self {
        Self { name: name.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    /// Ordered key/value pairs written to `summary.csv`.
    pub summary: Vec<(String, String)>,
    /// Human-readable report printed to standard output.
    pub text: String,
    pub convergence: BTreeMap<String, bool>,
}

impl RunOutput {
    pub fn converged(&self) -> bool {
        self.convergence.values().all(|c| *c)
    }

    pub fn value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.value(key).and_then(|v| v.parse().ok())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    fn put(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.summary.push((key.into(), value.into()));
    }

    fn flag(&mut self, key: impl Into<String>, ok: bool) {
        self.convergence.insert(key.into(), ok);
    }
}

/// Deterministic float formatting: plain for moderate magnitudes, scientific otherwise.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e6).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn order_str(o: Option<Order>) -> String {
    o.map(|o| o.to_string()).unwrap_or_default()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Fully validated experiment, ready to run.
pub enum Plan {
    Charset { factors: FactoredPolynomial, region: Region, stated: Vec<(String, u32)> },
    Loj { z: FirstIntegral, params: LojParams, seed: u64 },
    KernelNorm { z: FirstIntegral, omega: Region, points: Vec<Point>, params: KernelNormParams, spec: QuadratureSpec },
    Scaling { params: ScalingParams, spec: QuadratureSpec },
    Solve { z: FirstIntegral, omega: Region, f: ScalarFunction, grid: Grid, params: SolveParams, spec: QuadratureSpec },
    CauchyCheck { z: FirstIntegral, omega: Region, points: Vec<Point>, params: CauchyCheckParams, spec: QuadratureSpec },
    Similarity {
        z: FirstIntegral,
        omega: Region,
        h: ComplexPolynomial,
        a: ScalarFunction,
        b: ScalarFunction,
        grid: Grid,
        params: SimilarityParams,
        spec: QuadratureSpec,
    },
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn inside(z: &FirstIntegral, points: &[Point]) -> Result<(), CliError> {
    match points.iter().find(|p| !z.contains(**p)) {
        Some(p) => Err(CliError::Config(format!("point {p} lies outside the chart domain"))),
        None => Ok(()),
    }
}

/// Checks every parameter and builds the objects of the run.
pub fn validate(cfg: &ExperimentConfig) -> Result<Plan, CliError> {
    cfg.check_blocks()?;
    let spec = cfg.spec()?;
    let plan = match cfg.experiment {
        ExperimentKind::Charset => {
            let p = cfg.charset.as_ref().expect("checked");
            let region = cfg.region()?;
            if !matches!(region, Region::Rectangle { .. }) {
                return Err(CliError::Config("charset needs a rectangular region".into()));
            }
            Plan::Charset { factors: p.build()?, region, stated: p.stated_orders.clone().into_iter().collect() }
        }
        ExperimentKind::LojEstimate => {
            let p = cfg.loj.clone().expect("checked");
            let z = cfg.first_integral()?;
            positive("rho", p.rho)?;
            if p.samples == 0 {
                return Err(CliError::Config("samples must be positive".into()));
            }
            inside(&z, &[Point::new(p.point[0], p.point[1])])?;
            if p.inequality_samples.is_some() && z.kind() != ChartKind::ArcNormal {
                return Err(CliError::Config("inequality_samples needs an arc_normal chart".into()));
            }
            Plan::Loj { z, params: p, seed: cfg.seed }
        }
        ExperimentKind::KernelNorm => {
            let p = cfg.kernel_norm.clone().expect("checked");
            let z = cfg.first_integral()?;
            let omega = cfg.region()?;
            if p.q.is_empty() {
                return Err(CliError::Config("q list is empty".into()));
            }
            for q in &p.q {
                if !(*q >= 1.0 && q.is_finite()) {
                    return Err(CliError::Config(format!("q = {q} must be at least 1")));
                }
            }
            positive("coarse_floor", p.coarse_floor)?;
            positive("fine_floor", p.fine_floor)?;
            let points = match (&p.grid, &p.points) {
                (Some(g), None) => g.build()?.points(),
                (None, Some(list)) if !list.is_empty() => list.iter().map(|c| Point::new(c[0], c[1])).collect(),
                _ => return Err(CliError::Config("[kernel_norm] needs exactly one of `grid` or non-empty `points`".into())),
            };
            inside(&z, &points)?;
            Plan::KernelNorm { z, omega, points, params: p, spec }
        }
        ExperimentKind::Scaling => {
            let p = cfg.scaling.clone().expect("checked");
            if !(p.tau > 0.0 && p.tau <= 1.0) {
                return Err(CliError::Config(format!("tau = {} must lie in (0, 1]", p.tau)));
            }
            if !(p.q > 0.0 && p.q < 1.0 + p.tau) {
                return Err(CliError::Config(format!("q = {} must lie in (0, 1 + tau)", p.q)));
            }
            if p.rho.len() < 2 {
                return Err(CliError::Config("at least two radii are needed".into()));
            }
            for r in &p.rho {
                positive("rho", *r)?;
            }
            Plan::Scaling { params: p, spec }
        }
        ExperimentKind::Solve => {
            let p = cfg.solve.clone().expect("checked");
            let z = cfg.first_integral()?;
            let omega = cfg.region()?;
            let grid = p.grid.build()?;
            inside(&z, &grid.points())?;
            positive("fd_step", p.fd_step)?;
            if !(p.band >= 0.0) {
                return Err(CliError::Config("band must be non-negative".into()));
            }
            if let Some(pp) = p.p {
                if !(pp >= 1.0 && pp.is_finite()) {
                    return Err(CliError::Config(format!("p = {pp} must be at least 1")));
                }
            }
            Plan::Solve { z, omega, f: p.f.build()?, grid, params: p, spec }
        }
        ExperimentKind::CauchyCheck => {
            let p = cfg.cauchy_check.clone().expect("checked");
            let z = cfg.first_integral()?;
            let omega = cfg.region()?;
            if p.n_points == 0 {
                return Err(CliError::Config("n_points must be positive".into()));
            }
            positive("margin", p.margin)?;
            if let TestFieldConfig::Holomorphic { coeffs } = &p.w {
                complex_polynomial(coeffs)?;
            }
            let points = interior_test_points(&omega, p.n_points, p.margin, cfg.seed);
            if points.len() < p.n_points {
                return Err(CliError::Config("margin leaves too little room for test points".into()));
            }
            Plan::CauchyCheck { z, omega, points, params: p, spec }
        }
        ExperimentKind::Similarity => {
            let p = cfg.similarity.clone().expect("checked");
            let z = cfg.first_integral()?;
            let omega = cfg.region()?;
            let grid = p.grid.build()?;
            inside(&z, &grid.points())?;
            positive("tol", p.tol)?;
            positive("fd_step", p.fd_step)?;
            if p.max_iter == 0 {
                return Err(CliError::Config("max_iter must be positive".into()));
            }
            Plan::Similarity {
                h: complex_polynomial(&p.h)?,
                a: p.a.build()?,
                b: p.b.build()?,
                z,
                omega,
                grid,
                params: p,
                spec,
            }
        }
    };
    Ok(plan)
}

/// Validates and runs one experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let plan = validate(cfg)?;
    execute(plan)
}

pub fn execute(plan: Plan) -> Result<RunOutput, CliError> {
    match plan {
        Plan::Charset { factors, region, stated } => run_charset(&factors, region, &stated),
        Plan::Loj { z, params, seed } => run_loj(&z, &params, seed),
        Plan::KernelNorm { z, omega, points, params, spec } => run_kernel_norm(&z, &omega, &points, &params, &spec),
        Plan::Scaling { params, spec } => run_scaling(&params, &spec),
        Plan::Solve { z, omega, f, grid, params, spec } => run_solve(&z, &omega, &f, &grid, &params, &spec),
        Plan::CauchyCheck { z, omega, points, params, spec } => run_cauchy(&z, &omega, &points, &params, &spec),
        Plan::Similarity { z, omega, h, a, b, grid, params, spec } => {
            run_similarity(&z, &omega, &h, &a, &b, &grid, &params, &spec)
        }
    }
}

fn run_charset(factors: &FactoredPolynomial, region: Region, stated: &[(String, u32)]) -> Result<RunOutput, CliError> {
    let d = decompose_example(factors, region)?;
    let mut out = RunOutput::default();
    let mut t = Table::new("strata", &["stratum", "curve", "x", "y", "order"]);
    for p in &d.isolated_points {
        t.push(vec!["sigma0".into(), String::new(), num(p.point.x), num(p.point.y), order_str(p.order)]);
    }
    for p in &d.singular_points {
        t.push(vec!["singular".into(), String::new(), num(p.point.x), num(p.point.y), order_str(p.order)]);
    }
    for c in &d.regular_components {
        let curve = c.curve.to_string();
        let s = &c.sample;
        t.push(vec!["regular".into(), curve.clone(), num(s.point.x), num(s.point.y), order_str(c.order)]);
        for p in &c.tangent_points {
            t.push(vec!["tangent".into(), curve.clone(), num(p.point.x), num(p.point.y), order_str(p.order)]);
        }
    }
    out.tables.push(t);
    out.put("isolated_points", d.isolated_points.len().to_string());
    out.put("singular_points", d.singular_points.len().to_string());
    out.put("regular_components", d.regular_components.len().to_string());
    let mut text = d.to_string();
    for (family, order) in stated {
        let found = compare_stated_orders(&d, &[(family.clone(), *order)]);
        let matched = d.curves().iter().any(|(c, _)| c.family() == family || &c.to_string() == family);
        let key = format!("stated_order[{family}]");
        if !matched {
            out.put(key, "no such curve");
        } else if found.is_empty() {
            out.put(key, format!("consistent {order}"));
        } else {
            for f in found {
                let line = format!("derived {} vs stated {}", order_str(f.derived), f.stated);
                text.push_str(&format!("discrepancy: {} {line}\n", f.curve));
                out.put(format!("discrepancy[{}]", f.curve), line);
            }
            out.put(key, "discrepancy");
        }
    }
    let charts = charts_from_decomposition(&d);
    if let Ok(n) = loj_number_region(&charts) {
        out.put("loj_number", num(n.mu));
        out.put("loj_number_argmax", n.argmax);
    }
    out.text = text;
    out.flag("decomposition", true);
    Ok(out)
}

fn run_loj(z: &FirstIntegral, p: &LojParams, seed: u64) -> Result<RunOutput, CliError> {
    let point = Point::new(p.point[0], p.point[1]);
    let est = estimate_mu(z, point, p.rho, p.samples, seed)?;
    let mut out = RunOutput::default();
    let mut t = Table::new("ladder", &["j", "t", "abs_dz", "local_slope"]);
    for r in &est.ladder {
        t.push(vec![r.j.to_string(), num(r.t), num(r.abs_dz), opt(r.local_slope)]);
    }
    out.tables.push(t);
    out.put("mu_hat", num(est.mu_hat));
    out.put("mu_axis_raw", num(est.mu_axis_raw));
    out.put("mu_pair", num(est.mu_pair));
    out.put("c_hat", num(est.c_hat));
    out.put("n_samples", est.n_samples.to_string());
    out.put("max_violation", num(est.max_violation));
    out.put("fit_residual", num(est.fit_residual));
    out.flag("fit", est.mu_hat.is_finite());
    if let Some(n) = p.inequality_samples {
        let k = z.exponent().unwrap_or(1);
        let v = check_inequality_arc_in(k, z.domain(), n, seed)?;
        out.put("inequality_samples", n.to_string());
        out.put("inequality_max_violation", num(v));
    }
    out.text = format!("mu_hat = {} (pairs {}), fit residual {}\n", num(est.mu_hat), num(est.mu_pair), num(est.fit_residual));
    Ok(out)
}

fn run_kernel_norm(
    z: &FirstIntegral,
    omega: &Region,
    points: &[Point],
    p: &KernelNormParams,
    spec: &QuadratureSpec,
) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    let mut t = Table::new(
        "kernel_norm",
        &["x", "y", "q", "norm", "converged", "coarse_norm", "coarse_converged", "characteristic"],
    );
    let characteristic: Vec<bool> = points.iter().map(|x| classify_point(z, *x).kind == CharKind::Characteristic).collect();
    let coarse = spec.clone().with_floor(p.coarse_floor);
    let fine = spec.clone().with_floor(p.fine_floor);
    for &q in &p.q {
        let r = kernel_sup_experiment(z, omega, q, points, &coarse, &fine)?;
        for (i, x) in points.iter().enumerate() {
            t.push(vec![
                num(x.x),
                num(x.y),
                num(q),
                num(r.norms[i]),
                r.converged[i].to_string(),
                num(r.coarse_norms[i]),
                r.coarse_converged[i].to_string(),
                characteristic[i].to_string(),
            ]);
        }
        let tag = format!("[q={}]", num(q));
        out.put(format!("sup_norm{tag}"), num(r.sup_norm));
        out.put(format!("coarse_sup_norm{tag}"), num(r.coarse_sup_norm));
        out.put(format!("refinement_ratio{tag}"), num(r.refinement_ratio));
        let am = r.eval_points[r.argmax];
        out.put(format!("argmax{tag}"), format!("{} {}", num(am.x), num(am.y)));
        let char_ratio = (0..points.len())
            .filter(|i| characteristic[*i])
            .map(|i| r.norms[i] / r.coarse_norms[i])
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        out.put(format!("characteristic_ratio{tag}"), opt(char_ratio));
        // the coarse pass is a truncation; only the fine pass must converge
        let fine_ok = r.converged.iter().all(|c| *c);
        out.put(format!("converged{tag}"), fine_ok.to_string());
        out.flag(format!("kernel_norm{tag}"), fine_ok);
        out.text.push_str(&format!(
            "q = {}: sup {} (coarse {}), ratio {}\n",
            num(q),
            num(r.sup_norm),
            num(r.coarse_sup_norm),
            num(r.refinement_ratio)
        ));
    }
    out.tables.push(t);
    Ok(out)
}

fn run_scaling(p: &ScalingParams, spec: &QuadratureSpec) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    let predicted = 1.0 + p.tau - p.q;
    let mut t = Table::new(
        "scaling",
        &["rho", "integral", "error_estimate", "converged", "majorant", "ratio", "majorant_ratio"],
    );
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ms = Vec::new();
    let mut ratios = Vec::new();
    let mut ok = true;
    for &rho in &p.rho {
        let r = integrate_quasihomogeneous(p.tau, p.q, rho, spec)?;
        let scale = rho.powf(predicted);
        t.push(vec![
            num(rho),
            num(r.value),
            num(r.error_estimate),
            r.converged.to_string(),
            num(r.majorant),
            num(r.value / scale),
            num(r.majorant / scale),
        ]);
        ok &= r.converged;
        xs.push(rho.ln());
        ys.push(r.value.ln());
        ms.push(r.majorant.ln());
        ratios.push(r.value / scale);
    }
    out.tables.push(t);
    let (slope, _, resid) = least_squares(&xs, &ys)?;
    let (mslope, _, _) = least_squares(&xs, &ms)?;
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    out.put("predicted_exponent", num(predicted));
    out.put("fitted_exponent", num(slope));
    out.put("fit_residual", num(resid));
    out.put("majorant_exponent", num(mslope));
    out.put("ratio_variation", num(hi / lo));
    out.flag("integrals", ok);
    out.text = format!("fitted exponent {} (predicted {}), majorant {}\n", num(slope), num(predicted), num(mslope));
    Ok(out)
}

fn normalization_for(omega: &Region, given: Option<[f64; 2]>, spec: &QuadratureSpec, out: &mut RunOutput) -> Result<Complex64, CliError> {
    if let Some(c) = given {
        return Ok(Complex64::new(c[0], c[1]));
    }
    let cal = calibrate_normalization(&FirstIntegral::elliptic(*omega), omega, spec)?;
    out.put("calibration_re", num(cal.constant.re));
    out.put("calibration_im", num(cal.constant.im));
    out.put("calibration_residual", num(cal.residual));
    Ok(cal.constant)
}

fn run_solve(
    z: &FirstIntegral,
    omega: &Region,
    f: &ScalarFunction,
    grid: &Grid,
    p: &SolveParams,
    spec: &QuadratureSpec,
) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    let c = normalization_for(omega, p.normalization, spec, &mut out)?;
    let lines = f.singular_lines();
    let func = |x: Point| f.eval(x);
    let field = apply_tz(z, omega, &func, &lines, grid, spec, c, p.p)?;
    let residuals = if p.residuals {
        Some(verify_solution(z, omega, &func, &lines, &field, p.fd_step, p.band, spec)?)
    } else {
        None
    };
    let mut t = Table::new("solve", &["x", "y", "re_u", "im_u", "error_estimate", "converged", "residual"]);
    for i in 0..grid.len() {
        let x = grid.point(i);
        let r = residuals.as_ref().and_then(|r| r.residuals[i]);
        t.push(vec![
            num(x.x),
            num(x.y),
            num(field.values[i].re),
            num(field.values[i].im),
            num(field.error_estimates[i]),
            field.converged[i].to_string(),
            opt(r),
        ]);
    }
    out.tables.push(t);
    let sup = field.sup_abs();
    out.put("sup_abs", num(sup));
    if let Some((pp, norm)) = field.f_norm_p {
        out.put("p", num(pp));
        out.put("f_norm_p", num(norm));
        out.put("sup_over_norm", num(sup / norm));
    }
    let on_sigma = (0..grid.len()).filter(|i| characteristic_distance(z, grid.point(*i)) == 0.0).count();
    out.put("nodes_on_sigma", on_sigma.to_string());
    if let Some(r) = &residuals {
        out.put("residual_max", num(r.max_relative));
        out.put("residual_median", num(r.median_relative));
        out.put("residual_points", r.points_checked.to_string());
    }
    out.flag("operator", field.all_converged());
    out.text = format!("sup |T f| = {} over {} nodes\n", num(sup), grid.len());
    Ok(out)
}

fn run_cauchy(
    z: &FirstIntegral,
    omega: &Region,
    points: &[Point],
    p: &CauchyCheckParams,
    spec: &QuadratureSpec,
) -> Result<RunOutput, CliError> {
    let report = match &p.w {
        TestFieldConfig::Holomorphic { coeffs } => {
            let w = HolomorphicComposite::new(z, complex_polynomial(coeffs)?);
            cauchy_formula_check(z, omega, &w, points, spec, p.measure.build())?
        }
        TestFieldConfig::Polynomial { terms } => {
            let terms: Vec<(u32, u32, Complex64)> = terms.iter().map(|(i, j, re, im)| (*i, *j, Complex64::new(*re, *im))).collect();
            let w = polynomial_field(terms);
            cauchy_formula_check(z, omega, &w, points, spec, p.measure.build())?
        }
    };
    let mut out = RunOutput::default();
    let mut t = Table::new(
        "cauchy_check",
        &["x", "y", "re_lhs", "im_lhs", "re_boundary", "im_boundary", "re_area", "im_area", "relative_error"],
    );
    for fp in &report.points {
        t.push(vec![
            num(fp.point.x),
            num(fp.point.y),
            num(fp.lhs.re),
            num(fp.lhs.im),
            num(fp.boundary.re),
            num(fp.boundary.im),
            num(fp.area.re),
            num(fp.area.im),
            num(fp.relative_error),
        ]);
    }
    out.tables.push(t);
    out.put("max_relative_error", num(report.max_relative_error));
    out.put("points", report.points.len().to_string());
    out.put("skipped", report.skipped.len().to_string());
    out.flag("formula", report.converged);
    out.text = format!("max relative error {} at {} points\n", num(report.max_relative_error), report.points.len());
    Ok(out)
}

/// `Σ c x^i y^j` with exact partial derivatives.
pub fn polynomial_field(
    terms: Vec<(u32, u32, Complex64)>,
) -> AnalyticField<impl Fn(Point) -> Complex64 + Sync, impl Fn(Point) -> (Complex64, Complex64) + Sync> {
    let t2 = terms.clone();
    let pw = |v: f64, n: u32| if n == 0 { 1.0 } else { v.powi(n as i32) };
    AnalyticField {
        value: move |p: Point| terms.iter().map(|(i, j, c)| c * (pw(p.x, *i) * pw(p.y, *j))).sum(),
        partials: move |p: Point| {
            let mut dx = Complex64::new(0.0, 0.0);
            let mut dy = Complex64::new(0.0, 0.0);
            for (i, j, c) in &t2 {
                if *i > 0 {
                    dx += c * (*i as f64 * pw(p.x, i - 1) * pw(p.y, *j));
                }
                if *j > 0 {
                    dy += c * (*j as f64 * pw(p.x, *i) * pw(p.y, j - 1));
                }
            }
            (dx, dy)
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn run_similarity(
    z: &FirstIntegral,
    omega: &Region,
    h: &ComplexPolynomial,
    a: &ScalarFunction,
    b: &ScalarFunction,
    grid: &Grid,
    p: &SimilarityParams,
    spec: &QuadratureSpec,
) -> Result<RunOutput, CliError> {
    let mut out = RunOutput::default();
    let c = normalization_for(omega, p.normalization, spec, &mut out)?;
    let mut lines: Vec<SingularLine> = a.singular_lines();
    lines.extend(b.singular_lines());
    let fa = |x: Point| a.eval(x);
    let fb = |x: Point| b.eval(x);
    let opts = SimilarityOptions {
        max_iter: p.max_iter,
        tol: p.tol,
        band: p.band,
        fd_step: p.fd_step,
        p: p.p,
        ..SimilarityOptions::default()
    };
    let sol = fixed_point_solve(z, omega, h, &fa, &fb, &lines, grid, spec, c, &opts)?;
    let factor = if p.round_trip {
        Some(factor_solution(z, omega, &sol.u.values, &fa, &fb, &lines, grid, spec, c, p.band)?)
    } else {
        None
    };
    let mut headers = vec!["x", "y", "re_u", "im_u", "re_s", "im_s", "residual"];
    if factor.is_some() {
        headers.extend(["re_v", "im_v"]);
    }
    let mut t = Table::new("similarity", &headers);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..grid.len() {
        let x = grid.point(i);
        let (u, s) = (sol.u.values[i], sol.s.values[i]);
        let mut row = vec![num(x.x), num(x.y), num(u.re), num(u.im), num(s.re), num(s.im), opt(sol.residuals[i])];
        if let Some(f) = &factor {
            let v = f.v[i];
            row.extend([num(v.re), num(v.im)]);
            let hz = h.eval(z.eval_unchecked(x));
            scale = scale.max(hz.norm());
            if characteristic_distance(z, x) > p.band {
                worst = worst.max((v - hz).norm());
            }
        }
        t.push(row);
    }
    out.tables.push(t);
    let mut it = Table::new("iterations", &["iteration", "change", "ratio"]);
    for (k, ch) in sol.changes.iter().enumerate() {
        let ratio = if k == 0 { None } else { sol.contraction_ratios.get(k - 1).copied() };
        it.push(vec![(k + 1).to_string(), num(*ch), opt(ratio)]);
    }
    out.tables.push(it);
    let max_ratio = sol.contraction_ratios.iter().copied().fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    out.put("converged", sol.converged.to_string());
    out.put("iterations", sol.iterations.to_string());
    out.put("max_contraction_ratio", opt(max_ratio));
    out.put("residual_max", num(sol.residual_max));
    out.put("residual_median", num(sol.residual_median));
    out.put("residual_points", sol.residual_points.to_string());
    out.put("chi_max", num(sol.chi_max));
    out.put("min_abs_u", num(sol.min_abs_u));
    out.put("s_sup", num(sol.s_sup));
    out.put("integrand_norm_p", opt(sol.integrand_norm_p));
    if let Some(f) = &factor {
        out.put("round_trip_error", num(worst / scale));
        out.put("holo_residual", num(f.holo_residual));
        out.put("cr_residual", num(f.cr_residual));
        out.flag("factorization", f.s.all_converged());
    }
    out.flag("fixed_point", sol.converged);
    out.flag("operator", sol.s.all_converged());
    out.text = format!(
        "{} after {} iterations, residual {}\n",
        if sol.converged { "converged" } else { "not converged" },
        sol.iterations,
        num(sol.residual_max)
    );
    Ok(out)
}

