//! Python module `pyhypocauchy`.

use hypocauchy::cauchy::{
    apply_tz, calibrate_normalization, eval_kernel, kernel_lq_integral, Grid, ScalarFunction,
};
use hypocauchy::charset::{classify_point, decompose_example, CharKind};
use hypocauchy::loj::{check_inequality_arc_in, estimate_mu};
use hypocauchy::polyalg::{rational_from_f64, BivariatePolynomial, FactoredPolynomial, Order};
use hypocauchy::quad::{integrate_quasihomogeneous, QuadratureSpec};
use hypocauchy::similarity::{chi as chi_core, factor_solution, fixed_point_solve, SimilarityOptions};
use hypocauchy::structures::{Chart, ComplexPolynomial, FirstIntegral as CoreZ, Point, Region as CoreRegion};
use hypocauchy::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: hypocauchy::Error) -> PyErr {
    match e {
        hypocauchy::Error::NotConverged { .. } | hypocauchy::Error::CalibrationFailed { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn order(o: Option<Order>) -> Option<String> {
    o.map(|o| o.to_string())
}

#[pyclass(name = "Region", module = "pyhypocauchy", skip_from_py_object)]
#[derive(Clone)]
struct Region(CoreRegion);

#[pymethods]
impl Region {
    #[staticmethod]
    fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> PyResult<Self> {
        CoreRegion::rectangle(x0, x1, y0, y1).map(Region).map_err(err)
    }

    #[staticmethod]
    fn square(h: f64) -> Self {
        Region(CoreRegion::square(h))
    }

    #[staticmethod]
    #[pyo3(signature = (x=0.0, y=0.0, radius=1.0))]
    fn disc(x: f64, y: f64, radius: f64) -> PyResult<Self> {
        CoreRegion::disc(Point::new(x, y), radius).map(Region).map_err(err)
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.0.contains(Point::new(x, y))
    }

    #[getter]
    fn area(&self) -> f64 {
        self.0.area()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// A first integral `Z` on a region.
#[pyclass(name = "FirstIntegral", module = "pyhypocauchy")]
struct FirstIntegral(CoreZ);

#[pymethods]
impl FirstIntegral {
    #[staticmethod]
    fn elliptic(region: &Region) -> Self {
        FirstIntegral(CoreZ::elliptic(region.0))
    }

    #[staticmethod]
    fn arc_normal(k: u32, region: &Region) -> PyResult<Self> {
        CoreZ::arc_normal(k, region.0).map(FirstIntegral).map_err(err)
    }

    #[staticmethod]
    fn circle_normal(k: u32, region: &Region) -> PyResult<Self> {
        CoreZ::new(Chart::CircleNormal { k }, region.0).map(FirstIntegral).map_err(err)
    }

    /// `Z = x + i ∫_0^y P(x, τ) dτ` with `P` given by `(i, j, coefficient)` terms.
    #[staticmethod]
    fn polynomial_integral(terms: Vec<(u32, u32, f64)>, region: &Region) -> PyResult<Self> {
        let p = BivariatePolynomial::from_terms(terms.into_iter().map(|(i, j, c)| (i, j, rational_from_f64(c))));
        CoreZ::new(Chart::PolynomialIntegral { p }, region.0).map(FirstIntegral).map_err(err)
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.kind().to_string()
    }

    #[getter]
    fn exponent(&self) -> Option<u32> {
        self.0.exponent()
    }

    fn __call__(&self, x: f64, y: f64) -> PyResult<Complex64> {
        self.0.eval(Point::new(x, y)).map_err(err)
    }

    /// `(Z_x, Z_y)`.
    fn grad(&self, x: f64, y: f64) -> PyResult<(Complex64, Complex64)> {
        self.0.grad(Point::new(x, y)).map_err(err)
    }

    /// `1 / (Z(var) − Z(at))`.
    fn kernel(&self, at: (f64, f64), var: (f64, f64)) -> PyResult<Complex64> {
        eval_kernel(&self.0, Point::new(at.0, at.1), Point::new(var.0, var.1)).map_err(err)
    }

    /// `(kind, order)` where kind is "elliptic" or "characteristic".
    fn classify(&self, x: f64, y: f64) -> (String, Option<String>) {
        let c = classify_point(&self.0, Point::new(x, y));
        let kind = if c.kind == CharKind::Characteristic { "characteristic" } else { "elliptic" };
        (kind.into(), order(c.order))
    }

    fn __repr__(&self) -> String {
        format!("FirstIntegral({}, {:?})", self.0.kind(), self.0.domain())
    }
}

/// Scalar right-hand sides and coefficients.
#[pyclass(name = "Function", module = "pyhypocauchy")]
struct Function(ScalarFunction);

#[pymethods]
impl Function {
    #[staticmethod]
    fn constant(c: Complex64) -> Self {
        Function(ScalarFunction::Constant(c))
    }

    /// `|x − center|^exponent` for axis "x", `|y − center|^exponent` for "y".
    #[staticmethod]
    #[pyo3(signature = (axis, exponent, center=0.0))]
    fn abs_power(axis: &str, exponent: f64, center: f64) -> PyResult<Self> {
        let axis = match axis {
            "x" => 0,
            "y" => 1,
            _ => return Err(PyValueError::new_err("axis must be 'x' or 'y'")),
        };
        Ok(Function(ScalarFunction::AbsPower { axis, center, exponent }))
    }

    #[staticmethod]
    fn cos_sin() -> Self {
        Function(ScalarFunction::CosSin)
    }

    /// `Σ c x^i y^j` from `(i, j, c)` terms.
    #[staticmethod]
    fn polynomial(terms: Vec<(u32, u32, Complex64)>) -> Self {
        Function(ScalarFunction::Polynomial(terms))
    }

    fn __call__(&self, x: f64, y: f64) -> Complex64 {
        self.0.eval(Point::new(x, y))
    }
}

/// Adaptive quadrature settings.
#[pyclass(name = "Quadrature", module = "pyhypocauchy", skip_from_py_object)]
#[derive(Clone)]
struct Quadrature(QuadratureSpec);

#[pymethods]
impl Quadrature {
    #[new]
    #[pyo3(signature = (rel_tol=1e-6, abs_tol=1e-12, magnitude_tol=0.0, floor=1e-7, max_cells=400_000))]
    fn new(rel_tol: f64, abs_tol: f64, magnitude_tol: f64, floor: f64, max_cells: usize) -> PyResult<Self> {
        let mut s = QuadratureSpec::default().with_tolerances(rel_tol, abs_tol).with_magnitude_tol(magnitude_tol).with_floor(floor);
        s.max_cells = max_cells;
        s.validate().map_err(err)?;
        Ok(Quadrature(s))
    }

    fn __repr__(&self) -> String {
        format!(
            "Quadrature(rel_tol={}, abs_tol={}, magnitude_tol={}, floor={}, max_cells={})",
            self.0.rel_tol, self.0.abs_tol, self.0.magnitude_tol, self.0.exclusion_radius_floor, self.0.max_cells
        )
    }
}

fn spec_of(q: Option<&Quadrature>) -> QuadratureSpec {
    q.map(|q| q.0.clone()).unwrap_or_default()
}

fn grid_of(grid: ((f64, f64), (f64, f64), usize, usize)) -> PyResult<Grid> {
    Grid::new(grid.0, grid.1, grid.2, grid.3).map_err(err)
}

/// Largest relative violation of the arc inequality over random pairs in `region`.
#[pyfunction]
#[pyo3(signature = (k, n_samples, seed=0, region=None))]
fn check_inequality_arc(py: Python<'_>, k: u32, n_samples: usize, seed: u64, region: Option<&Region>) -> PyResult<f64> {
    let r = region.map(|r| r.0).unwrap_or(CoreRegion::square(1.0));
    py.detach(|| check_inequality_arc_in(k, r, n_samples, seed)).map_err(err)
}

/// Łojasiewicz exponent estimate at `(x, y)`.
#[pyfunction]
#[pyo3(signature = (z, x, y, rho=0.5, n_samples=2000, seed=0))]
fn loj_estimate<'py>(
    py: Python<'py>,
    z: &FirstIntegral,
    x: f64,
    y: f64,
    rho: f64,
    n_samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let est = estimate_mu(&z.0, Point::new(x, y), rho, n_samples, seed).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mu_hat", est.mu_hat)?;
    d.set_item("mu_pair", est.mu_pair)?;
    d.set_item("c_hat", est.c_hat)?;
    d.set_item("max_violation", est.max_violation)?;
    d.set_item("fit_residual", est.fit_residual)?;
    let ladder: Vec<(u32, f64, f64)> = est.ladder.iter().map(|r| (r.j, r.t, r.abs_dz)).collect();
    d.set_item("ladder", ladder)?;
    Ok(d)
}

/// Strata of the characteristic set of the built-in stratification example.
#[pyfunction]
#[pyo3(signature = (region=None))]
fn stratification_example<'py>(py: Python<'py>, region: Option<&Region>) -> PyResult<Bound<'py, PyDict>> {
    let r = region.map(|r| r.0).unwrap_or(CoreRegion::square(4.0));
    let dec = decompose_example(&FactoredPolynomial::stratification_example(), r).map_err(err)?;
    let pts = |v: &[hypocauchy::charset::StratumPoint]| -> Vec<(f64, f64, Option<String>)> {
        v.iter().map(|p| (p.point.x, p.point.y, order(p.order))).collect()
    };
    let d = PyDict::new(py);
    d.set_item("isolated", pts(&dec.isolated_points))?;
    d.set_item("singular", pts(&dec.singular_points))?;
    let regular: Vec<(String, f64, f64, Option<String>)> = dec
        .regular_components
        .iter()
        .map(|c| (c.curve.to_string(), c.sample.point.x, c.sample.point.y, order(c.order)))
        .collect();
    d.set_item("regular", regular)?;
    Ok(d)
}

/// `(‖K_at‖_q, converged)` on `region`.
#[pyfunction]
#[pyo3(signature = (z, region, q, x, y, quadrature=None))]
fn kernel_norm(
    py: Python<'_>,
    z: &FirstIntegral,
    region: &Region,
    q: f64,
    x: f64,
    y: f64,
    quadrature: Option<&Quadrature>,
) -> PyResult<(f64, bool)> {
    let spec = spec_of(quadrature);
    let r = py.detach(|| kernel_lq_integral(&z.0, &region.0, q, Point::new(x, y), &spec)).map_err(err)?;
    Ok((r.value.re.max(0.0).powf(1.0 / q), r.converged))
}

/// `(value, majorant, converged)` of the quasi-homogeneous model integral.
#[pyfunction]
#[pyo3(signature = (tau, q, rho, quadrature=None))]
fn quasihomogeneous(py: Python<'_>, tau: f64, q: f64, rho: f64, quadrature: Option<&Quadrature>) -> PyResult<(f64, f64, bool)> {
    let spec = spec_of(quadrature);
    let r = py.detach(|| integrate_quasihomogeneous(tau, q, rho, &spec)).map_err(err)?;
    Ok((r.value, r.majorant, r.converged))
}

/// Normalization constant `c` with `L(c·T1) = 1` for the planar structure on `region`.
#[pyfunction]
#[pyo3(signature = (region, quadrature=None))]
fn calibrate(py: Python<'_>, region: &Region, quadrature: Option<&Quadrature>) -> PyResult<(Complex64, f64)> {
    let spec = spec_of(quadrature);
    let c = py.detach(|| calibrate_normalization(&CoreZ::elliptic(region.0), &region.0, &spec)).map_err(err)?;
    Ok((c.constant, c.residual))
}

/// `T_Z f` on a grid `((x0, x1), (y0, y1), nx, ny)`; nodes are ordered with `x` fastest.
#[pyfunction]
#[pyo3(signature = (z, region, f, grid, normalization=Complex64::new(0.0, 0.5), quadrature=None, p=None))]
#[allow(clippy::too_many_arguments)]
fn apply_operator<'py>(
    py: Python<'py>,
    z: &FirstIntegral,
    region: &Region,
    f: &Function,
    grid: ((f64, f64), (f64, f64), usize, usize),
    normalization: Complex64,
    quadrature: Option<&Quadrature>,
    p: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = grid_of(grid)?;
    let spec = spec_of(quadrature);
    let func = &f.0;
    let lines = func.singular_lines();
    let field = py
        .detach(|| apply_tz(&z.0, &region.0, &|x: Point| func.eval(x), &lines, &grid, &spec, normalization, p))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("points", grid.points().iter().map(|q| (q.x, q.y)).collect::<Vec<_>>())?;
    d.set_item("values", field.values.clone())?;
    d.set_item("error_estimates", field.error_estimates.clone())?;
    d.set_item("converged", field.all_converged())?;
    d.set_item("f_norm_p", field.f_norm_p.map(|v| v.1))?;
    Ok(d)
}

/// `chi(u) = conj(u)/u`, zero below the threshold.
#[pyfunction]
#[pyo3(signature = (u, threshold=0.0))]
fn chi(u: Complex64, threshold: f64) -> Complex64 {
    chi_core(u, threshold)
}

/// Fixed-point solution of `Lu = Au + B conj(u)` with `u = H(Z) e^s`, then the
/// factorization `v = u e^{−s}`.
#[pyfunction]
#[pyo3(signature = (z, region, h, a, b, grid, normalization=Complex64::new(0.0, 0.5), quadrature=None, max_iter=30, tol=1e-6, fd_step=1e-3, band=0.1))]
#[allow(clippy::too_many_arguments)]
fn similarity_solve<'py>(
    py: Python<'py>,
    z: &FirstIntegral,
    region: &Region,
    h: Vec<Complex64>,
    a: &Function,
    b: &Function,
    grid: ((f64, f64), (f64, f64), usize, usize),
    normalization: Complex64,
    quadrature: Option<&Quadrature>,
    max_iter: usize,
    tol: f64,
    fd_step: f64,
    band: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = grid_of(grid)?;
    let spec = spec_of(quadrature);
    let h = ComplexPolynomial::new(h);
    let opts = SimilarityOptions { max_iter, tol, fd_step, band, ..Default::default() };
    let (fa, fb) = (&a.0, &b.0);
    let af = |p: Point| fa.eval(p);
    let bf = |p: Point| fb.eval(p);
    let (sol, fac) = py
        .detach(|| -> hypocauchy::Result<_> {
            let sol = fixed_point_solve(&z.0, &region.0, &h, &af, &bf, &[], &grid, &spec, normalization, &opts)?;
            let fac = factor_solution(&z.0, &region.0, &sol.u.values, &af, &bf, &[], &grid, &spec, normalization, band)?;
            Ok((sol, fac))
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("points", grid.points().iter().map(|q| (q.x, q.y)).collect::<Vec<_>>())?;
    d.set_item("u", sol.u.values.clone())?;
    d.set_item("s", sol.s.values.clone())?;
    d.set_item("v", fac.v.clone())?;
    d.set_item("converged", sol.converged)?;
    d.set_item("iterations", sol.iterations)?;
    d.set_item("contraction_ratios", sol.contraction_ratios.clone())?;
    d.set_item("residual_max", sol.residual_max)?;
    d.set_item("chi_max", sol.chi_max)?;
    d.set_item("holo_residual", fac.holo_residual)?;
    Ok(d)
}

#[pymodule]
fn pyhypocauchy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Region>()?;
    m.add_class::<FirstIntegral>()?;
    m.add_class::<Function>()?;
    m.add_class::<Quadrature>()?;
    m.add_function(wrap_pyfunction!(check_inequality_arc, m)?)?;
    m.add_function(wrap_pyfunction!(loj_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(stratification_example, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_norm, m)?)?;
    m.add_function(wrap_pyfunction!(quasihomogeneous, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(apply_operator, m)?)?;
    m.add_function(wrap_pyfunction!(chi, m)?)?;
    m.add_function(wrap_pyfunction!(similarity_solve, m)?)?;
    Ok(())
}
