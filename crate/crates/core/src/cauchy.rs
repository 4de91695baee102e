//! The generalized Cauchy kernel `1/(Z(ζ) − Z(z))` and the operator `T_Z`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_1d, integrate_power_substituted, IntegralResult, QuadratureSpec, SingularLine};
use crate::structures::{apply_l, ChartKind, ComplexField, FdOrder, FdStencil, FirstIntegral, FnField, Point, Region, I};

/// `1/(Z(var) − Z(at))`.
pub fn eval_kernel(z: &FirstIntegral, at: Point, var: Point) -> Result<Complex64> {
    let d = z.difference(var, at);
    if d.is_zero() {
        return Err(Error::Singular { x: var.x, y: var.y });
    }
    Ok(d.inv())
}

/// Integrates `g` over `omega` with a possible singularity at `at`.
///
/// Power-type charts on rectangles are integrated in `η = t^k`, where the
/// kernel is isotropic.
pub fn integrate_with_chart<G>(
    z: &FirstIntegral,
    omega: &Region,
    g: G,
    at: Option<Point>,
    lines: &[SingularLine],
    spec: &QuadratureSpec,
) -> Result<IntegralResult>
where
    G: Fn(Point) -> Complex64,
{
    let mut s = spec.clone();
    if let Some(p) = at {
        if omega.contains(p) {
            s.singular_points.push(p);
        }
    }
    s.singular_lines.extend_from_slice(lines);
    let power = match z.kind() {
        ChartKind::ArcNormal | ChartKind::CircleNormal => z.exponent().filter(|k| *k > 1),
        _ => None,
    };
    match (power, omega) {
        (Some(k), Region::Rectangle { .. }) => integrate_power_substituted(g, 1.0 / f64::from(k), omega, &s),
        _ => integrate(g, omega, &s),
    }
}

/// `∫_Ω |K_at|^q` as a raw integral result.
pub fn kernel_lq_integral(z: &FirstIntegral, omega: &Region, q: f64, at: Point, spec: &QuadratureSpec) -> Result<IntegralResult> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q = {q} must exceed 1")));
    }
    integrate_with_chart(
        z,
        omega,
        |p| {
            let d = z.difference(p, at).norm();
            if d == 0.0 {
                Complex64::zero()
            } else {
                Complex64::new(d.powf(-q), 0.0)
            }
        },
        Some(at),
        &[],
        spec,
    )
}

/// `‖K_at‖_{L^q(Ω)}`.
pub fn kernel_lq_norm(z: &FirstIntegral, omega: &Region, q: f64, at: Point, spec: &QuadratureSpec) -> Result<f64> {
    let r = kernel_lq_integral(z, omega, q, at, spec)?.require_converged()?;
    Ok(r.value.re.max(0.0).powf(1.0 / q))
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelNormReport {
    pub q: f64,
    pub eval_points: Vec<Point>,
    /// Norms under the fine spec.
    pub norms: Vec<f64>,
    pub coarse_norms: Vec<f64>,
    pub converged: Vec<bool>,
    pub coarse_converged: Vec<bool>,
    pub sup_norm: f64,
    pub coarse_sup_norm: f64,
    /// `sup_norm / coarse_sup_norm`.
    pub refinement_ratio: f64,
    /// Index of the point attaining the fine sup.
    pub argmax: usize,
}

impl KernelNormReport {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().chain(&self.coarse_converged).all(|c| *c)
    }
}

/// Kernel norms over a point set under a coarse and a fine spec.
///
/// Non-converged integrals keep their partial value and are flagged.
pub fn kernel_sup_experiment(
    z: &FirstIntegral,
    omega: &Region,
    q: f64,
    points: &[Point],
    coarse: &QuadratureSpec,
    fine: &QuadratureSpec,
) -> Result<KernelNormReport> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no evaluation points".into()));
    }
    let run = |spec: &QuadratureSpec| -> Result<Vec<(f64, bool)>> {
        points
            .par_iter()
            .map(|p| {
                let r = kernel_lq_integral(z, omega, q, *p, spec)?;
                Ok((r.value.re.max(0.0).powf(1.0 / q), r.converged))
            })
            .collect()
    };
    let c = run(coarse)?;
    let f = run(fine)?;
    let sup = |v: &[(f64, bool)]| {
        v.iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |best, (i, x)| if x.0 > best.1 { (i, x.0) } else { best })
    };
    let (argmax, sup_norm) = sup(&f);
    let (_, coarse_sup) = sup(&c);
    Ok(KernelNormReport {
        q,
        eval_points: points.to_vec(),
        norms: f.iter().map(|x| x.0).collect(),
        coarse_norms: c.iter().map(|x| x.0).collect(),
        converged: f.iter().map(|x| x.1).collect(),
        coarse_converged: c.iter().map(|x| x.1).collect(),
        sup_norm,
        coarse_sup_norm: coarse_sup,
        refinement_ratio: sup_norm / coarse_sup,
        argmax,
    })
}

/// Rectangular lattice; nodes are ordered with `x` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Grid {
    pub fn new(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidParameter("a grid needs at least 2 nodes per axis".into()));
        }
        if !(x.1 > x.0 && y.1 > y.0) {
            return Err(Error::InvalidParameter("grid ranges must be increasing".into()));
        }
        let lin = |a: f64, b: f64, n: usize| (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
        Ok(Self { xs: lin(x.0, x.1, nx), ys: lin(y.0, y.1, ny) })
    }

    /// Uniform grid spanning the bounding box of `region`.
    pub fn covering(region: &Region, nx: usize, ny: usize) -> Result<Self> {
        let (a, b, c, d) = region.bounding_box();
        Self::new((a, b), (c, d), nx, ny)
    }

    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, idx: usize) -> Point {
        let nx = self.xs.len();
        Point::new(self.xs[idx % nx], self.ys[idx / nx])
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn spacing(&self) -> f64 {
        let d = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        d(&self.xs).min(d(&self.ys))
    }

    /// Bilinear interpolation of nodal `values`, clamped to the lattice.
    pub fn interpolate(&self, values: &[Complex64], p: Point) -> Complex64 {
        let locate = |v: &[f64], x: f64| -> (usize, f64) {
            let n = v.len();
            if x <= v[0] {
                return (0, 0.0);
            }
            if x >= v[n - 1] {
                return (n - 2, 1.0);
            }
            let i = v.partition_point(|a| *a <= x).saturating_sub(1).min(n - 2);
            (i, (x - v[i]) / (v[i + 1] - v[i]))
        };
        let (i, a) = locate(&self.xs, p.x);
        let (j, b) = locate(&self.ys, p.y);
        let nx = self.xs.len();
        let v = |i: usize, j: usize| values[j * nx + i];
        v(i, j) * ((1.0 - a) * (1.0 - b)) + v(i + 1, j) * (a * (1.0 - b)) + v(i, j + 1) * ((1.0 - a) * b) + v(i + 1, j + 1) * (a * b)
    }
}

/// `u = c·(−1/π)∫_Ω f K` sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
    pub error_estimates: Vec<f64>,
    pub converged: Vec<bool>,
    /// `(p, ‖f‖_p)` when requested.
    pub f_norm_p: Option<(f64, f64)>,
    pub normalization: Complex64,
}

impl OperatorField {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|c| *c)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `c·(−1/π)∫_Ω f(ζ) K_at(ζ) dA(ζ)`.
pub fn tz_at<F>(
    z: &FirstIntegral,
    omega: &Region,
    f: &F,
    lines: &[SingularLine],
    at: Point,
    spec: &QuadratureSpec,
    normalization: Complex64,
) -> Result<IntegralResult>
where
    F: Fn(Point) -> Complex64 + ?Sized,
{
    let r = integrate_with_chart(
        z,
        omega,
        |p| {
            let d = z.difference(p, at);
            if d.is_zero() {
                Complex64::zero()
            } else {
                f(p) / d
            }
        },
        Some(at),
        lines,
        spec,
    )?;
    let scale = normalization * (-1.0 / PI);
    Ok(IntegralResult { value: r.value * scale, error_estimate: r.error_estimate * scale.norm(), ..r })
}

/// `‖f‖_{L^p(Ω)}` with the same engine and singularity declarations.
pub fn lp_norm<F>(z: &FirstIntegral, omega: &Region, f: &F, lines: &[SingularLine], p: f64, spec: &QuadratureSpec) -> Result<(f64, IntegralResult)>
where
    F: Fn(Point) -> Complex64 + ?Sized,
{
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must be at least 1")));
    }
    let r = integrate_with_chart(z, omega, |x| Complex64::new(f(x).norm().powf(p), 0.0), None, lines, spec)?;
    Ok((r.value.re.max(0.0).powf(1.0 / p), r))
}

/// `T_Z f` on every node of `grid`.
#[allow(clippy::too_many_arguments)]
pub fn apply_tz<F>(
    z: &FirstIntegral,
    omega: &Region,
    f: &F,
    lines: &[SingularLine],
    grid: &Grid,
    spec: &QuadratureSpec,
    normalization: Complex64,
    p: Option<f64>,
) -> Result<OperatorField>
where
    F: Fn(Point) -> Complex64 + Sync + ?Sized,
{
    for q in grid.points() {
        if !z.contains(q) {
            return Err(Error::OutsideDomain { x: q.x, y: q.y });
        }
    }
    let results: Vec<IntegralResult> = (0..grid.len())
        .into_par_iter()
        .map(|i| tz_at(z, omega, f, lines, grid.point(i), spec, normalization))
        .collect::<Result<_>>()?;
    let f_norm_p = match p {
        Some(p) => Some((p, lp_norm(z, omega, f, lines, p, spec)?.0)),
        None => None,
    };
    Ok(OperatorField {
        grid: grid.clone(),
        values: results.iter().map(|r| r.value).collect(),
        error_estimates: results.iter().map(|r| r.error_estimate).collect(),
        converged: results.iter().map(|r| r.converged).collect(),
        f_norm_p,
        normalization,
    })
}

/// Hölder bound `|c|/π · ‖K‖_q · ‖f‖_p` for one node.
pub fn holder_bound(kernel_norm_q: f64, f_norm_p: f64, normalization: Complex64) -> f64 {
    normalization.norm() / PI * kernel_norm_q * f_norm_p
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    pub constant: Complex64,
    /// `|L(c·T1) − 1|` at a second interior point.
    pub residual: f64,
}

/// The constant `c` with `L(c·T_Z 1) = 1`, measured at the centre of `omega`.
pub fn calibrate_normalization(z: &FirstIntegral, omega: &Region, spec: &QuadratureSpec) -> Result<Calibration> {
    calibrate_with(z, omega, &|_| Complex64::new(1.0, 0.0), spec)
}

/// Calibration against an arbitrary smooth `f`; `c` should not depend on it.
pub fn calibrate_with<F>(z: &FirstIntegral, omega: &Region, f: &F, spec: &QuadratureSpec) -> Result<Calibration>
where
    F: Fn(Point) -> Complex64 + Sync + ?Sized,
{
    if z.kind() != ChartKind::Elliptic {
        return Err(Error::InvalidParameter("calibration requires the elliptic structure".into()));
    }
    let tight = QuadratureSpec { rel_tol: spec.rel_tol.min(1e-8), abs_tol: 1e-9 * omega.area(), ..spec.clone() };
    let fd = FdStencil::new(1e-3 * omega.diameter(), FdOrder::Fourth);
    let l_of_t = |p: Point| -> Result<Complex64> {
        let field = FnField(|q: Point| {
            tz_at(z, omega, f, &[], q, &tight, Complex64::new(1.0, 0.0)).map(|r| r.value).unwrap_or(Complex64::new(f64::NAN, 0.0))
        });
        apply_l(z, &field, p, Some(fd))
    };
    let c0 = omega.center();
    let lt = l_of_t(c0)?;
    let fc = f(c0);
    if !(lt.is_finite() && lt.norm() > 0.0) {
        return Err(Error::CalibrationFailed { residual: f64::INFINITY });
    }
    let constant = fc / lt;
    let d = 0.15 * omega.diameter();
    let p1 = Point::new(c0.x + d, c0.y - 0.5 * d);
    let residual = ((constant * l_of_t(p1)? - f(p1)) / f(p1)).norm();
    if !(residual <= 1e-2) {
        return Err(Error::CalibrationFailed { residual });
    }
    Ok(Calibration { constant, residual })
}

/// Distance-like measure of how far `p` is from the characteristic set.
///
/// Exact for the normal forms; first-order `ψ/|∇ψ|` for polynomial charts.
pub fn characteristic_distance(z: &FirstIntegral, p: Point) -> f64 {
    match z.kind() {
        ChartKind::Elliptic => f64::INFINITY,
        ChartKind::ArcNormal | ChartKind::CircleNormal => {
            if z.exponent() == Some(1) {
                f64::INFINITY
            } else {
                p.y.abs()
            }
        }
        _ => match z.polynomials() {
            Some((psi, _)) => {
                let v = psi.to_float().eval(p.x, p.y);
                if v == 0.0 {
                    return 0.0;
                }
                let gx = psi.partial_x().to_float().eval(p.x, p.y);
                let gy = psi.partial_y().to_float().eval(p.x, p.y);
                let g = gx.hypot(gy);
                if g == 0.0 {
                    f64::INFINITY
                } else {
                    v.abs() / g
                }
            }
            None => f64::INFINITY,
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub max_relative: f64,
    pub median_relative: f64,
    pub points_checked: usize,
    /// Per-node residuals, `None` where the node was skipped.
    pub residuals: Vec<Option<f64>>,
}

/// `|L(u) − f|` at interior grid nodes off the band around the characteristic set.
///
/// `u` is re-evaluated by quadrature on the finite-difference stencil.
#[allow(clippy::too_many_arguments)]
pub fn verify_solution<F>(
    z: &FirstIntegral,
    omega: &Region,
    f: &F,
    lines: &[SingularLine],
    field: &OperatorField,
    fd_step: f64,
    exclusion_band: f64,
    spec: &QuadratureSpec,
) -> Result<ResidualReport>
where
    F: Fn(Point) -> Complex64 + Sync + ?Sized,
{
    if !(fd_step > 0.0) {
        return Err(Error::InvalidParameter("fd_step must be positive".into()));
    }
    if field.grid.spacing() < 4.0 * fd_step {
        return Err(Error::InvalidParameter("grid spacing must be at least 4 fd steps".into()));
    }
    let fd = FdStencil::new(fd_step, FdOrder::Second);
    let residuals: Vec<Option<f64>> = (0..field.grid.len())
        .into_par_iter()
        .map(|i| {
            let p = field.grid.point(i);
            if omega.margin(p) <= fd.reach() || z.margin(p) <= fd.reach() || characteristic_distance(z, p) <= exclusion_band {
                return Ok(None);
            }
            let u = FnField(|q: Point| {
                tz_at(z, omega, f, lines, q, spec, field.normalization)
                    .map(|r| r.value)
                    .unwrap_or(Complex64::new(f64::NAN, 0.0))
            });
            let lu = apply_l(z, &u, p, Some(fd))?;
            let fp = f(p);
            let r = (lu - fp).norm();
            let scale = fp.norm();
            Ok(Some(if scale > 0.0 { r / scale } else { r }))
        })
        .collect::<Result<_>>()?;
    let mut checked: Vec<f64> = residuals.iter().flatten().copied().collect();
    checked.sort_by(f64::total_cmp);
    let n = checked.len();
    let (max_relative, median_relative) = if n == 0 {
        (0.0, 0.0)
    } else {
        let med = if n % 2 == 1 { checked[n / 2] } else { 0.5 * (checked[n / 2 - 1] + checked[n / 2]) };
        (checked[n - 1], med)
    };
    Ok(ResidualReport { max_relative, median_relative, points_checked: n, residuals })
}

/// Convention for the area term of the integral formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AreaMeasure {
    /// `o·2πi w = ∮ w K dZ + ∫ Lw K dA`, `o` the orientation of `Z`.
    #[default]
    Lebesgue,
    /// `2πi w = ∮ w K dZ + ∫ Lw K (−2i) dA` read literally.
    WedgeLiteral,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulaPoint {
    pub point: Point,
    pub lhs: Complex64,
    pub boundary: Complex64,
    pub area: Complex64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulaReport {
    pub max_relative_error: f64,
    pub points: Vec<FormulaPoint>,
    pub skipped: Vec<Point>,
    pub converged: bool,
}

/// Orientation sign of `Z` at `p`: `+1` where `Z` preserves orientation.
pub fn orientation(z: &FirstIntegral, p: Point) -> f64 {
    let (zx, zy) = z.grad_unchecked(p);
    let d = (zx.conj() * zy).im;
    if d < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Counter-clockwise boundary pieces `(γ, γ', τ0, τ1)`.
fn boundary_pieces(omega: &Region) -> Vec<(Point, Point, f64)> {
    match *omega {
        Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => vec![
            (Point::new(x_lo, y_lo), Point::new(x_hi, y_lo), 0.0),
            (Point::new(x_hi, y_lo), Point::new(x_hi, y_hi), 0.0),
            (Point::new(x_hi, y_hi), Point::new(x_lo, y_hi), 0.0),
            (Point::new(x_lo, y_hi), Point::new(x_lo, y_lo), 0.0),
        ],
        Region::Disc { center, radius } => vec![(center, Point::new(radius, 0.0), 1.0)],
    }
}

/// Checks the generalized Cauchy–Pompeiu formula at each test point.
pub fn cauchy_formula_check<W>(
    z: &FirstIntegral,
    omega: &Region,
    w: &W,
    test_points: &[Point],
    spec: &QuadratureSpec,
    measure: AreaMeasure,
) -> Result<FormulaReport>
where
    W: ComplexField + ?Sized,
{
    if test_points.is_empty() {
        return Err(Error::EmptyInput("no test points".into()));
    }
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    let mut converged = true;
    for &p in test_points {
        if omega.margin(p) < 10.0 * spec.exclusion_radius_floor {
            skipped.push(p);
            continue;
        }
        let mut boundary = Complex64::zero();
        for (a, b, kind) in boundary_pieces(omega) {
            let r = if kind == 0.0 {
                let d = Point::new(b.x - a.x, b.y - a.y);
                integrate_1d(
                    |s: f64| {
                        let q = Point::new(a.x + s * d.x, a.y + s * d.y);
                        let (zx, zy) = z.grad_unchecked(q);
                        w.value(q) * (zx * d.x + zy * d.y) / z.difference(q, p)
                    },
                    0.0,
                    1.0,
                    spec.rel_tol * 1e-2,
                    spec.abs_tol,
                    20_000,
                )
            } else {
                let (c, rad) = (a, b.x);
                integrate_1d(
                    |th: f64| {
                        let (s, co) = th.sin_cos();
                        let q = Point::new(c.x + rad * co, c.y + rad * s);
                        let (zx, zy) = z.grad_unchecked(q);
                        w.value(q) * (zx * (-rad * s) + zy * (rad * co)) / z.difference(q, p)
                    },
                    0.0,
                    2.0 * PI,
                    spec.rel_tol * 1e-2,
                    spec.abs_tol,
                    20_000,
                )
            };
            converged &= r.converged;
            boundary += r.value;
        }
        let lw = |q: Point| -> Complex64 {
            let (zx, zy) = z.grad_unchecked(q);
            let (ux, uy) = w.partials(q).unwrap_or((Complex64::new(f64::NAN, 0.0), Complex64::new(f64::NAN, 0.0)));
            zx * uy - zy * ux
        };
        if w.partials(p).is_none() {
            return Err(Error::MissingPartials);
        }
        let r = integrate_with_chart(
            z,
            omega,
            |q| {
                let d = z.difference(q, p);
                if d.is_zero() {
                    Complex64::zero()
                } else {
                    lw(q) / d
                }
            },
            Some(p),
            &[],
            spec,
        )?;
        converged &= r.converged;
        let (lhs, area) = match measure {
            AreaMeasure::Lebesgue => (orientation(z, p) * 2.0 * PI * I * w.value(p), r.value),
            AreaMeasure::WedgeLiteral => (2.0 * PI * I * w.value(p), r.value * (-2.0 * I)),
        };
        let rhs = boundary + area;
        let relative_error = (lhs - rhs).norm() / lhs.norm();
        points.push(FormulaPoint { point: p, lhs, boundary, area, relative_error });
    }
    let max_relative_error = points.iter().map(|p| p.relative_error).fold(0.0, f64::max);
    Ok(FormulaReport { max_relative_error, points, skipped, converged })
}

/// Interior test points drawn uniformly with a margin.
pub fn interior_test_points(omega: &Region, n: usize, margin: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n && tries < 1000 * n.max(1) {
        tries += 1;
        let p = omega.sample(&mut rng);
        if omega.margin(p) >= margin {
            out.push(p);
        }
        let _ = rng.random::<u8>();
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct L1Report {
    pub q: f64,
    pub n: usize,
    pub norm_coarse: f64,
    pub norm_fine: f64,
    pub relative_change: f64,
    /// Relative change above the stability tolerance.
    pub unstable: bool,
    pub converged: bool,
}

/// `‖T_Z f‖_{L^q}` by midpoint sums on `n×n` and `2n×2n` cells.
#[allow(clippy::too_many_arguments)]
pub fn tz_of_l1_function<F>(
    z: &FirstIntegral,
    omega: &Region,
    f: &F,
    lines: &[SingularLine],
    q: f64,
    n: usize,
    spec: &QuadratureSpec,
    normalization: Complex64,
    tolerance: f64,
) -> Result<L1Report>
where
    F: Fn(Point) -> Complex64 + Sync + ?Sized,
{
    if !(q >= 1.0) || n < 1 {
        return Err(Error::InvalidParameter("need q >= 1 and n >= 1".into()));
    }
    let (x0, x1, y0, y1) = omega.bounding_box();
    let sum = |m: usize| -> Result<(f64, bool)> {
        let hx = (x1 - x0) / m as f64;
        let hy = (y1 - y0) / m as f64;
        let cells: Vec<Point> = (0..m * m)
            .map(|i| Point::new(x0 + hx * ((i % m) as f64 + 0.5), y0 + hy * ((i / m) as f64 + 0.5)))
            .filter(|p| omega.contains(*p))
            .collect();
        let vals: Vec<(f64, bool)> = cells
            .par_iter()
            .map(|p| {
                let r = tz_at(z, omega, f, lines, *p, spec, normalization)?;
                Ok((r.value.norm().powf(q), r.converged))
            })
            .collect::<Result<_>>()?;
        let s: f64 = vals.iter().map(|v| v.0).sum::<f64>() * hx * hy;
        Ok((s.powf(1.0 / q), vals.iter().all(|v| v.1)))
    };
    let (a, ca) = sum(n)?;
    let (b, cb) = sum(2 * n)?;
    let relative_change = (b - a).abs() / b.abs().max(f64::MIN_POSITIVE);
    Ok(L1Report {
        q,
        n,
        norm_coarse: a,
        norm_fine: b,
        relative_change,
        unstable: relative_change > tolerance || !b.is_finite(),
        converged: ca && cb,
    })
}

/// Scalar test functions with known integrability.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFunction {
    Constant(Complex64),
    /// `|x − c|^a` (`axis = 0`) or `|y − c|^a` (`axis = 1`).
    AbsPower { axis: u8, center: f64, exponent: f64 },
    /// `cos(x) sin(y)`.
    CosSin,
    /// `Σ c x^i y^j`.
    Polynomial(Vec<(u32, u32, Complex64)>),
    /// `exp(−1/(1 − r²/R²))` inside the disc of radius `R`.
    Bump { center: Point, radius: f64 },
}

impl ScalarFunction {
    pub fn eval(&self, p: Point) -> Complex64 {
        match self {
            ScalarFunction::Constant(c) => *c,
            ScalarFunction::AbsPower { axis, center, exponent } => {
                let v = if *axis == 0 { p.x } else { p.y };
                Complex64::new((v - center).abs().powf(*exponent), 0.0)
            }
            ScalarFunction::CosSin => Complex64::new(p.x.cos() * p.y.sin(), 0.0),
            ScalarFunction::Polynomial(terms) => terms
                .iter()
                .map(|(i, j, c)| c * (p.x.powi(*i as i32) * p.y.powi(*j as i32)))
                .sum(),
            ScalarFunction::Bump { center, radius } => {
                let r2 = (p.dist(*center) / radius).powi(2);
                if r2 >= 1.0 {
                    Complex64::zero()
                } else {
                    Complex64::new((-1.0 / (1.0 - r2)).exp(), 0.0)
                }
            }
        }
    }

    pub fn singular_lines(&self) -> Vec<SingularLine> {
        match self {
            ScalarFunction::AbsPower { axis, center, exponent } if *exponent < 0.0 => {
                vec![if *axis == 0 { SingularLine::Vertical(*center) } else { SingularLine::Horizontal(*center) }]
            }
            _ => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Region {
        Region::square(1.0)
    }

    #[test]
    fn kernel_examples() {
        let e = FirstIntegral::elliptic(square());
        let o = Point::new(0.0, 0.0);
        assert_eq!(eval_kernel(&e, o, Point::new(1.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(eval_kernel(&e, o, Point::new(0.0, 1.0)).unwrap(), Complex64::new(0.0, -1.0));
        let a = FirstIntegral::arc_normal(3, square()).unwrap();
        let k = eval_kernel(&a, o, Point::new(0.0, 0.1)).unwrap();
        assert!((k - Complex64::new(0.0, -1000.0)).norm() < 1e-9);
        assert!(matches!(eval_kernel(&a, o, o), Err(Error::Singular { .. })));
    }

    #[test]
    fn elliptic_kernel_norm_closed_form() {
        let e = FirstIntegral::elliptic(Region::square(2.0));
        let n = kernel_lq_norm(&e, &Region::unit_disc(), 1.5, Point::new(0.0, 0.0), &QuadratureSpec::default()).unwrap();
        let exact = (2.0 * PI / 0.5f64).powf(1.0 / 1.5);
        assert!((n - exact).abs() < 1e-5 * exact, "{n} {exact}");
    }

    #[test]
    fn far_point_kernel_norm_is_small() {
        let e = FirstIntegral::elliptic(Region::square(200.0));
        let d = 100.0;
        let n = kernel_lq_norm(&e, &Region::unit_disc(), 1.5, Point::new(d, 0.0), &QuadratureSpec::default()).unwrap();
        assert!(n <= PI.powf(1.0 / 1.5) / (d - 1.0));
    }

    #[test]
    fn arc_kernel_norm_on_characteristic_line_is_stable() {
        let a = FirstIntegral::arc_normal(3, Region::square(1.5)).unwrap();
        let at = Point::new(0.2, 0.0);
        let coarse = QuadratureSpec::default().with_tolerances(1e-5, 1e-12).with_floor(1e-4);
        let fine = coarse.clone().with_floor(1e-7);
        let n1 = kernel_lq_norm(&a, &square(), 1.25, at, &coarse).unwrap();
        let n2 = kernel_lq_norm(&a, &square(), 1.25, at, &fine).unwrap();
        assert!((n2 / n1 - 1.0).abs() < 0.05, "{n1} {n2}");
    }

    #[test]
    fn elliptic_transform_of_one() {
        let e = FirstIntegral::elliptic(Region::square(2.0));
        let d = Region::unit_disc();
        let spec = QuadratureSpec::default();
        for p in [Point::new(0.0, 0.0), Point::new(0.3, -0.4), Point::new(-0.5, 0.1)] {
            let r = tz_at(&e, &d, &|_| Complex64::new(1.0, 0.0), &[], p, &spec, Complex64::new(1.0, 0.0)).unwrap();
            // −1/π ∫_{|ζ|<1} dA/(ζ − z) = conj(z)
            assert!((r.value - Complex64::new(p.x, -p.y)).norm() < 1e-6, "{p}: {}", r.value);
        }
    }

    #[test]
    fn zero_function_gives_zero_field() {
        let a = FirstIntegral::arc_normal(3, Region::square(1.5)).unwrap();
        let g = Grid::new((-0.5, 0.5), (-0.5, 0.5), 3, 3).unwrap();
        let f = apply_tz(&a, &square(), &|_| Complex64::zero(), &[], &g, &QuadratureSpec::default(), Complex64::new(1.0, 0.0), None).unwrap();
        assert!(f.values.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn calibration_gives_half_i() {
        let e = FirstIntegral::elliptic(Region::square(2.0));
        let spec = QuadratureSpec::default();
        let c = calibrate_normalization(&e, &Region::unit_disc(), &spec).unwrap();
        assert!((c.constant - Complex64::new(0.0, 0.5)).norm() < 5e-3, "{c:?}");
        let c2 = calibrate_with(&e, &Region::unit_disc(), &|p: Point| Complex64::new(p.x + 2.0, 0.0), &spec).unwrap();
        assert!((c.constant - c2.constant).norm() < 1e-3);
        let a = FirstIntegral::arc_normal(3, Region::square(2.0)).unwrap();
        assert!(calibrate_normalization(&a, &square(), &spec).is_err());
    }

    #[test]
    fn cauchy_formula_elliptic_and_arc() {
        let e = FirstIntegral::elliptic(Region::square(2.0));
        let sq = crate::structures::HolomorphicComposite::new(&e, crate::structures::ComplexPolynomial::new(vec![Complex64::zero(), Complex64::zero(), Complex64::new(1.0, 0.0)]));
        let pts = interior_test_points(&square(), 4, 0.1, 5);
        let spec = QuadratureSpec::default();
        let r = cauchy_formula_check(&e, &square(), &sq, &pts, &spec, AreaMeasure::Lebesgue).unwrap();
        assert!(r.max_relative_error < 1e-6, "{r:?}");
        let a = FirstIntegral::arc_normal(3, Region::square(2.0)).unwrap();
        let s = crate::structures::AnalyticField {
            value: |p: Point| Complex64::new(p.x, 0.0),
            partials: |_p: Point| (Complex64::new(1.0, 0.0), Complex64::zero()),
        };
        let r = cauchy_formula_check(&a, &square(), &s, &pts, &spec, AreaMeasure::Lebesgue).unwrap();
        assert!(r.max_relative_error < 1e-3, "{r:?}");
    }

    #[test]
    fn grid_interpolation_is_exact_for_bilinear() {
        let g = Grid::new((0.0, 1.0), (-1.0, 1.0), 4, 5).unwrap();
        let f = |p: Point| Complex64::new(1.0 + 2.0 * p.x - p.y + 0.5 * p.x * p.y, p.y);
        let vals: Vec<Complex64> = g.points().into_iter().map(f).collect();
        for p in [Point::new(0.1, 0.3), Point::new(0.77, -0.95), Point::new(1.0, 1.0)] {
            assert!((g.interpolate(&vals, p) - f(p)).norm() < 1e-14);
        }
    }
}
