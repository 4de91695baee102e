//! Łojasiewicz inequalities and empirical exponents of first integrals.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charset::SigmaDecomposition;
use crate::error::{Error, Result};
use crate::polyalg::{rational_to_f64, Order, Rational};
use crate::structures::{FirstIntegral, Point, Region};

/// Largest value of `(t−b)^{2k} − (t^k − b^k)²` over random pairs.
///
/// The `(s−a)²` terms of both sides cancel identically and are not sampled.
pub fn check_inequality_arc(k: u32, n_samples: usize, rng_seed: u64) -> Result<f64> {
    check_inequality_arc_in(k, Region::square(1.0), n_samples, rng_seed)
}

pub fn check_inequality_arc_in(k: u32, region: Region, n_samples: usize, rng_seed: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        let t = region.sample(&mut rng).y;
        let b = region.sample(&mut rng).y;
        let v = arc_violation(t, b, k);
        if v > worst {
            worst = v;
        }
    }
    Ok(worst)
}

fn arc_violation(t: f64, b: f64, k: u32) -> f64 {
    let d = t - b;
    let lhs = d.powi(2 * k as i32);
    let diff = crate::structures::power_difference(t, b, k);
    lhs - diff * diff
}

/// One rung of the axis ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderRow {
    pub j: u32,
    pub t: f64,
    pub abs_dz: f64,
    /// Slope between this rung and the previous one.
    pub local_slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LojEstimate {
    /// Axis estimate, clamped below at 1.
    pub mu_hat: f64,
    /// Unclamped slope of the axis fit.
    pub mu_axis_raw: f64,
    /// Lower-envelope estimate from random pairs.
    pub mu_pair: f64,
    /// Constant `C` with `F ≥ C |t−b|^{2 mu_hat}` on the sampled pairs (halved for safety).
    pub c_hat: f64,
    pub n_samples: usize,
    /// Largest relative violation of `F ≥ c_hat |t−b|^{2 mu_hat}` on fresh pairs.
    pub max_violation: f64,
    /// RMS residual of the axis fit in log space.
    pub fit_residual: f64,
    pub ladder: Vec<LadderRow>,
}

const LADDER_DEPTH: u32 = 20;
const LADDER_MIN_T: f64 = 1e-8;
const UNDERFLOW_GUARD: f64 = 1e-280;

/// Estimates the Łojasiewicz exponent of `z` at `p` on the disc of radius `rho`.
pub fn estimate_mu(z: &FirstIntegral, p: Point, rho: f64, n_samples: usize, rng_seed: u64) -> Result<LojEstimate> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must be positive")));
    }
    if !z.contains(p) {
        return Err(Error::OutsideDomain { x: p.x, y: p.y });
    }
    if z.margin(p) < rho {
        return Err(Error::InvalidParameter(format!(
            "disc of radius {rho} about {p} leaves the domain"
        )));
    }
    let ladder = axis_ladder(z, p, rho);
    if ladder.len() < 3 {
        return Err(Error::FitFailed(format!("only {} usable ladder rungs", ladder.len())));
    }
    let xs: Vec<f64> = ladder.iter().map(|r| r.t.ln()).collect();
    let ys: Vec<f64> = ladder.iter().map(|r| r.abs_dz.ln()).collect();
    let (slope, _intercept, resid) = least_squares(&xs, &ys)?;
    let mu_hat = slope.max(1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let pairs: Vec<(f64, f64)> = (0..n_samples).filter_map(|_| sample_pair(z, p, rho, &mut rng)).collect();
    let mu_pair = envelope_slope(&pairs)?;
    let c_min = pairs
        .iter()
        .map(|&(f, g)| f / g.powf(mu_hat))
        .fold(f64::INFINITY, f64::min);
    if !(c_min.is_finite() && c_min > 0.0) {
        return Err(Error::FitFailed("no positive constant fits the sampled pairs".into()));
    }
    let c_hat = 0.5 * c_min;
    let mut max_violation = f64::NEG_INFINITY;
    for _ in 0..n_samples {
        if let Some((f, g)) = sample_pair(z, p, rho, &mut rng) {
            let bound = c_hat * g.powf(mu_hat);
            let v = (bound - f) / (bound + f);
            max_violation = max_violation.max(v);
        }
    }
    Ok(LojEstimate {
        mu_hat,
        mu_axis_raw: slope,
        mu_pair,
        c_hat,
        n_samples,
        max_violation,
        fit_residual: resid,
        ladder,
    })
}

fn abs_difference(z: &FirstIntegral, a: Point, b: Point) -> f64 {
    match z.difference_exact(a, b) {
        Some((re, im)) => exact_norm(&re, &im) * z.scale().norm(),
        None => z.difference(a, b).norm(),
    }
}

fn exact_norm(re: &Rational, im: &Rational) -> f64 {
    if re.is_zero() {
        return rational_to_f64(im).abs();
    }
    if im.is_zero() {
        return rational_to_f64(re).abs();
    }
    rational_to_f64(re).hypot(rational_to_f64(im))
}

/// `|Z(p + t e_y) − Z(p)|` for `t = rho 2^{-j}`.
pub fn axis_ladder(z: &FirstIntegral, p: Point, rho: f64) -> Vec<LadderRow> {
    let mut out: Vec<LadderRow> = Vec::new();
    for j in 1..=LADDER_DEPTH {
        let t = rho * 0.5f64.powi(j as i32);
        if t < LADDER_MIN_T {
            break;
        }
        let d = abs_difference(z, Point::new(p.x, p.y + t), p);
        if !(d > UNDERFLOW_GUARD) || !d.is_finite() {
            break;
        }
        let local_slope = out.last().map(|prev| (prev.abs_dz.ln() - d.ln()) / (prev.t.ln() - t.ln()));
        out.push(LadderRow { j, t, abs_dz: d, local_slope });
    }
    out
}

/// `(F, G)` with `F = (s−a)²/2 + (Im ΔZ)²` and `G = (t−b)²`, scale-adjusted.
fn sample_pair<R: Rng>(z: &FirstIntegral, p: Point, rho: f64, rng: &mut R) -> Option<(f64, f64)> {
    let delta = rho * 10f64.powf(-4.0 * rng.random::<f64>());
    let a = p.x + 0.5 * rho * rng.random_range(-1.0..=1.0);
    let b = p.y + delta * rng.random_range(-2.0..=2.0) * 0.5;
    let ds = if rng.random::<bool>() { 0.0 } else { delta * rng.random_range(-1.0..=1.0) * 1e-3 };
    let dt = delta * rng.random_range(-1.0..=1.0);
    let x = Point::new(a + ds, b + dt);
    let y = Point::new(a, b);
    if x.dist(p) > rho || y.dist(p) > rho || dt == 0.0 {
        return None;
    }
    let d = z.difference(x, y) / z.scale();
    let s = z.scale().norm();
    let f = (0.5 * d.re * d.re + d.im * d.im) * s * s;
    Some((f, dt * dt))
}

/// Slope of the lowest-decile envelope of `log F` against `log G`.
fn envelope_slope(pairs: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(f, g)| *f > 0.0 && *g > 0.0)
        .map(|&(f, g)| (g.ln(), f.ln()))
        .collect();
    if pts.len() < 20 {
        return Err(Error::FitFailed(format!("only {} usable pairs", pts.len())));
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return Err(Error::FitFailed("all pairs have the same separation".into()));
    }
    const BINS: usize = 10;
    let mut bins: Vec<Vec<(f64, f64)>> = vec![Vec::new(); BINS];
    for &(x, y) in &pts {
        let k = (((x - lo) / (hi - lo)) * BINS as f64).floor().min((BINS - 1) as f64) as usize;
        bins[k].push((x, y));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for mut b in bins.into_iter().filter(|b| b.len() >= 10) {
        b.sort_by(|p, q| p.1.total_cmp(&q.1));
        let n = (b.len() / 10).max(1);
        let sel = &b[..n];
        xs.push(sel.iter().map(|p| p.0).sum::<f64>() / n as f64);
        ys.push(sel.iter().map(|p| p.1).sum::<f64>() / n as f64);
    }
    let (slope, _, _) = least_squares(&xs, &ys)?;
    Ok(slope)
}

/// Ordinary least squares `y ≈ slope x + intercept`, with RMS residual.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(Error::FitFailed(format!("{n} points are too few to fit a line")));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::FitFailed("degenerate abscissae".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok((slope, intercept, (rss / n as f64).sqrt()))
}

/// `μ(L, Ω)` with the chart that attains it.
#[derive(Clone, Debug, PartialEq)]
pub struct LojRegionNumber {
    pub mu: f64,
    pub argmax: String,
    pub per_chart: Vec<(String, f64)>,
}

pub fn loj_number_region(charts: &[(String, f64)]) -> Result<LojRegionNumber> {
    let (id, mu) = charts
        .iter()
        .fold(None::<&(String, f64)>, |best, c| match best {
            Some(b) if b.1 >= c.1 => Some(b),
            _ => Some(c),
        })
        .ok_or_else(|| Error::EmptyInput("no charts given".into()))?;
    Ok(LojRegionNumber { mu: *mu, argmax: id.clone(), per_chart: charts.to_vec() })
}

/// One chart per stratum point and per regular component, with its exact order.
pub fn charts_from_decomposition(d: &SigmaDecomposition) -> Vec<(String, f64)> {
    let finite = |o: Option<Order>| o.and_then(Order::finite).map(f64::from);
    let mut out = Vec::new();
    for p in &d.isolated_points {
        if let Some(m) = finite(p.order) {
            out.push((format!("isolated {}", p.point), m));
        }
    }
    for p in &d.singular_points {
        if let Some(m) = finite(p.order) {
            out.push((format!("singular {}", p.point), m));
        }
    }
    for (i, c) in d.regular_components.iter().enumerate() {
        if let Some(m) = finite(c.order) {
            out.push((format!("component {i} of {}", c.curve), m));
        }
        for t in &c.tangent_points {
            if let Some(m) = finite(t.order) {
                out.push((format!("tangent {} of {}", t.point, c.curve), m));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::FactoredPolynomial;
    use crate::structures::Chart;

    #[test]
    fn elliptic_inequality_is_an_identity() {
        assert_eq!(check_inequality_arc(1, 100_000, 1).unwrap(), 0.0);
    }

    #[test]
    fn even_exponent_violates() {
        assert!(check_inequality_arc(2, 10_000, 3).unwrap() > 0.1);
        assert!(arc_violation(0.5, -0.5, 2) == 1.0);
    }

    #[test]
    fn sharp_constant_for_odd_exponents() {
        // |t^k − b^k| ≥ 2^{1−k} |t−b|^k, attained at t = −b
        for k in [3u32, 5, 7] {
            let c = 2f64.powi(1 - k as i32);
            let d = crate::structures::power_difference(0.5, -0.5, k);
            assert!((d - c).abs() < 1e-15);
        }
    }

    #[test]
    fn exponents_of_normal_forms() {
        let e = FirstIntegral::elliptic(Region::square(1.0));
        let est = estimate_mu(&e, Point::new(0.1, -0.2), 0.5, 2000, 7).unwrap();
        assert!((est.mu_hat - 1.0).abs() < 0.05);
        for k in [3u32, 5] {
            let z = FirstIntegral::arc_normal(k, Region::square(1.0)).unwrap();
            let est = estimate_mu(&z, Point::new(0.0, 0.0), 0.5, 2000, 7).unwrap();
            assert!((est.mu_hat - k as f64).abs() < 0.05 * k as f64, "{k}: {est:?}");
            assert!(est.max_violation <= 0.0);
            assert!((est.mu_pair - k as f64).abs() < 0.5, "{k}: {}", est.mu_pair);
        }
    }

    #[test]
    fn exponent_at_singular_point_of_example() {
        let z = FirstIntegral::new(
            Chart::PolynomialIntegral { p: FactoredPolynomial::stratification_example().expand() },
            Region::square(4.0),
        )
        .unwrap();
        let est = estimate_mu(&z, Point::new(1.0, 0.0), 0.1, 2000, 11).unwrap();
        assert!((est.mu_hat - 9.0).abs() < 0.5, "{est:?}");
    }

    #[test]
    fn region_number_is_the_max() {
        let charts = vec![("U1".to_string(), 3.0), ("U2".to_string(), 7.0), ("U3".to_string(), 5.0)];
        let r = loj_number_region(&charts).unwrap();
        assert_eq!((r.mu, r.argmax.as_str()), (7.0, "U2"));
        assert!(loj_number_region(&[]).is_err());
        let d = crate::charset::decompose_example(&FactoredPolynomial::stratification_example(), Region::square(4.0)).unwrap();
        assert_eq!(loj_number_region(&charts_from_decomposition(&d)).unwrap().mu, 9.0);
    }
}
