//! Solutions of `Lu = Au + B ū` in the form `u = H(Z) e^s`.

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use crate::cauchy::{apply_tz, characteristic_distance, lp_norm, tz_at, Grid, OperatorField};
use crate::error::{Error, Result};
use crate::quad::{QuadratureSpec, SingularLine};
use crate::structures::{apply_l, ComplexPolynomial, FdOrder, FdStencil, FirstIntegral, FnField, Point, Region};

/// `conj(u)/u`, or 0 when `|u| ≤ zero_threshold`; never exceeds 1 in modulus.
pub fn chi(u: Complex64, zero_threshold: f64) -> Complex64 {
    let r = u.norm();
    if !(r > zero_threshold) || r == 0.0 {
        return Complex64::zero();
    }
    let w = u / r;
    let mut c = w.conj() * w.conj();
    while c.norm() > 1.0 {
        c *= 1.0 - f64::EPSILON;
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityOptions {
    pub max_iter: usize,
    /// Stop when the largest nodal change of `s` falls below this.
    pub tol: f64,
    /// Threshold for `chi`, relative to the largest `|u|` on the grid.
    pub zero_threshold_rel: f64,
    /// Width of the excluded band around the characteristic set.
    pub band: f64,
    pub fd_step: f64,
    /// Exponent for the reported `‖A + Bχ‖_p`.
    pub p: Option<f64>,
}

impl Default for SimilarityOptions {
    fn default() -> Self {
        Self { max_iter: 30, tol: 1e-6, zero_threshold_rel: 1e-10, band: 0.1, fd_step: 1e-3, p: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilaritySolution {
    pub u: OperatorField,
    pub s: OperatorField,
    pub h: ComplexPolynomial,
    /// Largest off-band relative residual of `Lu − Au − Bū`.
    pub residual_max: f64,
    pub residual_median: f64,
    pub residual_points: usize,
    /// Per-node residuals; `None` inside the band or near the boundary.
    pub residuals: Vec<Option<f64>>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest nodal change of `s` per iteration.
    pub changes: Vec<f64>,
    /// Ratios of successive changes.
    pub contraction_ratios: Vec<f64>,
    /// Largest `|χ(u)|` over the grid.
    pub chi_max: f64,
    pub min_abs_u: f64,
    pub s_sup: f64,
    pub integrand_norm_p: Option<f64>,
}

struct Iterate<'a> {
    z: &'a FirstIntegral,
    h: &'a ComplexPolynomial,
    grid: &'a Grid,
    s: Vec<Complex64>,
    threshold: f64,
}

impl Iterate<'_> {
    fn u_at(&self, p: Point) -> Complex64 {
        self.h.eval(self.z.eval_unchecked(p)) * self.grid.interpolate(&self.s, p).exp()
    }
}

fn u_on_grid(z: &FirstIntegral, h: &ComplexPolynomial, grid: &Grid, s: &[Complex64]) -> Vec<Complex64> {
    (0..grid.len()).map(|i| h.eval(z.eval_unchecked(grid.point(i))) * s[i].exp()).collect()
}

/// `spec` split along the grid lines, where interpolants have kinks.
fn with_grid_cuts(spec: &QuadratureSpec, grid: &Grid) -> QuadratureSpec {
    let mut s = spec.clone();
    s.cuts.extend(grid.xs.iter().map(|x| SingularLine::Vertical(*x)));
    s.cuts.extend(grid.ys.iter().map(|y| SingularLine::Horizontal(*y)));
    s
}

fn threshold_for(u: &[Complex64], rel: f64) -> f64 {
    rel * u.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Runs `s ← T_Z(A + B χ(H(Z) e^s))` from `s = 0` on `grid`.
#[allow(clippy::too_many_arguments)]
pub fn fixed_point_solve<A, B>(
    z: &FirstIntegral,
    omega: &Region,
    h: &ComplexPolynomial,
    a: &A,
    b: &B,
    lines: &[SingularLine],
    grid: &Grid,
    spec: &QuadratureSpec,
    normalization: Complex64,
    opts: &SimilarityOptions,
) -> Result<SimilaritySolution>
where
    A: Fn(Point) -> Complex64 + Sync,
    B: Fn(Point) -> Complex64 + Sync,
{
    if opts.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be positive".into()));
    }
    let spec = &with_grid_cuts(spec, grid);
    let mut s = vec![Complex64::zero(); grid.len()];
    let mut changes = Vec::new();
    let mut converged = false;
    let mut last_field: Option<OperatorField> = None;
    let mut prev_s = s.clone();
    let mut prev_threshold = 0.0;
    for _ in 0..opts.max_iter {
        let u = u_on_grid(z, h, grid, &s);
        let threshold = threshold_for(&u, opts.zero_threshold_rel);
        let it = Iterate { z, h, grid, s: s.clone(), threshold };
        let g = |p: Point| a(p) + b(p) * chi(it.u_at(p), it.threshold);
        let field = apply_tz(z, omega, &g, lines, grid, spec, normalization, None)?;
        let change = field.values.iter().zip(&s).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prev_s = std::mem::replace(&mut s, field.values.clone());
        prev_threshold = threshold;
        last_field = Some(field);
        changes.push(change);
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    let s_field = last_field.expect("at least one iteration ran");
    let contraction_ratios = changes.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect();

    // the last integrand used χ of the previous iterate
    let prev = Iterate { z, h, grid, s: prev_s, threshold: prev_threshold };
    let g_last = |p: Point| a(p) + b(p) * chi(prev.u_at(p), prev.threshold);
    let u_vals = u_on_grid(z, h, grid, &s);
    let threshold = threshold_for(&u_vals, opts.zero_threshold_rel);
    let chi_max = u_vals.iter().map(|v| chi(*v, threshold).norm()).fold(0.0, f64::max);
    let min_abs_u = u_vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let s_sup = s.iter().map(|v| v.norm()).fold(0.0, f64::max);

    let fd = FdStencil::new(opts.fd_step, FdOrder::Second);
    let residuals: Vec<Option<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = grid.point(i);
            if omega.margin(p) <= fd.reach() || z.margin(p) <= fd.reach() || characteristic_distance(z, p) <= opts.band {
                return Ok(None);
            }
            let u = FnField(|q: Point| {
                let sq = tz_at(z, omega, &g_last, lines, q, spec, normalization)
                    .map(|r| r.value)
                    .unwrap_or(Complex64::new(f64::NAN, 0.0));
                h.eval(z.eval_unchecked(q)) * sq.exp()
            });
            let lu = apply_l(z, &u, p, Some(fd))?;
            let up = u_vals[i];
            let rhs = a(p) * up + b(p) * up.conj();
            let scale = rhs.norm();
            let r = (lu - rhs).norm();
            Ok(Some(if scale > 0.0 { r / scale } else { r / up.norm().max(f64::MIN_POSITIVE) }))
        })
        .collect::<Result<_>>()?;
    let mut checked: Vec<f64> = residuals.iter().flatten().copied().collect();
    checked.sort_by(f64::total_cmp);
    let n = checked.len();
    let (residual_max, residual_median) = if n == 0 { (0.0, 0.0) } else { (checked[n - 1], checked[n / 2]) };
    let integrand_norm_p = match opts.p {
        Some(p) => Some(lp_norm(z, omega, &g_last, lines, p, spec)?.0),
        None => None,
    };
    let u_field = OperatorField { values: u_vals, ..s_field.clone() };
    Ok(SimilaritySolution {
        u: u_field,
        s: s_field,
        h: h.clone(),
        residual_max,
        residual_median,
        residual_points: n,
        residuals,
        iterations: changes.len(),
        converged,
        changes,
        contraction_ratios,
        chi_max,
        min_abs_u,
        s_sup,
        integrand_norm_p,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub s: OperatorField,
    /// `v = u e^{−s}` on the grid.
    pub v: Vec<Complex64>,
    /// Largest off-band `|Lv| / (|Z_x v_y| + |Z_y v_x|)` with grid differences.
    pub holo_residual: f64,
    /// Largest off-band `|∂v/∂w̄| / |∂v/∂w|` in the `w = Z` plane.
    pub cr_residual: f64,
}

/// Recovers `v = u e^{−s}` with `s = T_Z(A + Bχ(u))` from nodal values of `u`.
#[allow(clippy::too_many_arguments)]
pub fn factor_solution<A, B>(
    z: &FirstIntegral,
    omega: &Region,
    u: &[Complex64],
    a: &A,
    b: &B,
    lines: &[SingularLine],
    grid: &Grid,
    spec: &QuadratureSpec,
    normalization: Complex64,
    band: f64,
) -> Result<Factorization>
where
    A: Fn(Point) -> Complex64 + Sync,
    B: Fn(Point) -> Complex64 + Sync,
{
    if u.len() != grid.len() {
        return Err(Error::InvalidParameter(format!("{} values for {} grid nodes", u.len(), grid.len())));
    }
    let spec = &with_grid_cuts(spec, grid);
    let threshold = threshold_for(u, SimilarityOptions::default().zero_threshold_rel);
    let g = |p: Point| a(p) + b(p) * chi(grid.interpolate(u, p), threshold);
    let s = apply_tz(z, omega, &g, lines, grid, spec, normalization, None)?;
    let v: Vec<Complex64> = u.iter().zip(&s.values).map(|(x, y)| x * (-y).exp()).collect();
    let (holo_residual, cr_residual) = grid_holomorphy(z, omega, grid, &v, band);
    Ok(Factorization { s, v, holo_residual, cr_residual })
}

/// Grid-difference checks of `Lv = 0` at interior off-band nodes.
pub fn grid_holomorphy(z: &FirstIntegral, omega: &Region, grid: &Grid, v: &[Complex64], band: f64) -> (f64, f64) {
    let (nx, ny) = (grid.xs.len(), grid.ys.len());
    let mut holo: f64 = 0.0;
    let mut cr: f64 = 0.0;
    for j in 1..ny.saturating_sub(1) {
        for i in 1..nx.saturating_sub(1) {
            let p = Point::new(grid.xs[i], grid.ys[j]);
            if !omega.contains(p) || characteristic_distance(z, p) <= band {
                continue;
            }
            let vx = (v[j * nx + i + 1] - v[j * nx + i - 1]) / (grid.xs[i + 1] - grid.xs[i - 1]);
            let vy = (v[(j + 1) * nx + i] - v[(j - 1) * nx + i]) / (grid.ys[j + 1] - grid.ys[j - 1]);
            let (zx, zy) = z.grad_unchecked(p);
            let lv = zx * vy - zy * vx;
            let scale = (zx * vy).norm() + (zy * vx).norm();
            if scale > 0.0 {
                holo = holo.max(lv.norm() / scale);
            }
            // v_x = v_w Z_x + v_w̄ conj(Z_x), v_y = v_w Z_y + v_w̄ conj(Z_y)
            let det = zx * zy.conj() - zy * zx.conj();
            if det.norm() > 0.0 {
                let vw = (vx * zy.conj() - vy * zx.conj()) / det;
                let vwb = (vy * zx - vx * zy) / det;
                if vw.norm() > 0.0 {
                    cr = cr.max(vwb.norm() / vw.norm());
                }
            }
        }
    }
    (holo, cr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn chi_examples() {
        let c = chi(Complex64::new(3.0, 4.0), 1e-12);
        assert!((c - Complex64::new(3.0, -4.0) / Complex64::new(3.0, 4.0)).norm() < 1e-15);
        assert!(c.norm() <= 1.0 && (c.norm() - 1.0).abs() < 1e-15);
        assert_eq!(chi(Complex64::zero(), 1e-12), Complex64::zero());
        assert_eq!(chi(Complex64::new(0.5e-3, 0.0), 1e-3), Complex64::zero());
    }

    fn setup() -> (FirstIntegral, Region, Grid, QuadratureSpec) {
        let z = FirstIntegral::elliptic(Region::square(2.0));
        let omega = Region::square(1.0);
        let grid = Grid::new((-0.8, 0.8), (-0.8, 0.8), 5, 5).unwrap();
        let spec = QuadratureSpec::default().with_tolerances(1e-6, 1e-12);
        (z, omega, grid, spec)
    }

    #[test]
    fn zero_coefficients_converge_immediately() {
        let (z, omega, grid, spec) = setup();
        let h = ComplexPolynomial::new(vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]);
        let zero = |_: Point| Complex64::zero();
        let sol = fixed_point_solve(&z, &omega, &h, &zero, &zero, &[], &grid, &spec, Complex64::new(0.0, 0.5), &SimilarityOptions::default()).unwrap();
        assert!(sol.converged && sol.iterations == 1);
        assert!(sol.s.values.iter().all(|v| v.is_zero()));
        let f = factor_solution(&z, &omega, &sol.u.values, &zero, &zero, &[], &grid, &spec, Complex64::new(0.0, 0.5), 0.1).unwrap();
        for (v, u) in f.v.iter().zip(&sol.u.values) {
            assert_eq!(v, u);
        }
        // multiplying by a unimodular constant scales v
        let rot = Complex64::from_polar(1.0, PI / 4.0);
        let ur: Vec<Complex64> = sol.u.values.iter().map(|u| u * rot).collect();
        let fr = factor_solution(&z, &omega, &ur, &zero, &zero, &[], &grid, &spec, Complex64::new(0.0, 0.5), 0.1).unwrap();
        assert!((fr.holo_residual - f.holo_residual).abs() < 1e-12);
    }

    #[test]
    fn constant_a_solves_in_one_step() {
        let (z, omega, grid, spec) = setup();
        let h = ComplexPolynomial::new(vec![Complex64::new(1.0, 0.0)]);
        let a = |_: Point| Complex64::new(0.2, 0.1);
        let b = |_: Point| Complex64::zero();
        let opts = SimilarityOptions { band: 0.0, ..Default::default() };
        let sol = fixed_point_solve(&z, &omega, &h, &a, &b, &[], &grid, &spec, Complex64::new(0.0, 0.5), &opts).unwrap();
        assert!(sol.converged && sol.iterations == 2, "{:?}", sol.changes);
        assert!(sol.residual_max < 5e-2, "{}", sol.residual_max);
    }
}
