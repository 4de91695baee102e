//! First integrals `Z`, their gradients and the vector field `L = Z_x ∂_y − Z_y ∂_x`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::polyalg::{
    rational_from_f64, Axis, BivariatePolynomial, DyadicEvaluator, FloatPolynomial, Order,
    Rational,
};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Closed rectangle or disc in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Rectangle { x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64 },
    Disc { center: Point, radius: f64 },
}

impl Region {
    pub fn rectangle(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Result<Self> {
        let ok = [x_lo, x_hi, y_lo, y_hi].iter().all(|v| v.is_finite()) && x_lo < x_hi && y_lo < y_hi;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "rectangle [{x_lo}, {x_hi}] x [{y_lo}, {y_hi}] has empty interior"
            )));
        }
        Ok(Region::Rectangle { x_lo, x_hi, y_lo, y_hi })
    }

    pub fn disc(center: Point, radius: f64) -> Result<Self> {
        if !(center.is_finite() && radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "disc of radius {radius} at {center} is degenerate"
            )));
        }
        Ok(Region::Disc { center, radius })
    }

    pub fn unit_disc() -> Self {
        Region::Disc { center: Point::new(0.0, 0.0), radius: 1.0 }
    }

    pub fn square(h: f64) -> Self {
        Region::Rectangle { x_lo: -h, x_hi: h, y_lo: -h, y_hi: h }
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => {
                p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi
            }
            Region::Disc { center, radius } => p.dist(center) <= radius,
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn margin(&self, p: Point) -> f64 {
        match *self {
            Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => {
                (p.x - x_lo).min(x_hi - p.x).min(p.y - y_lo).min(y_hi - p.y)
            }
            Region::Disc { center, radius } => radius - p.dist(center),
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => (x_hi - x_lo) * (y_hi - y_lo),
            Region::Disc { radius, .. } => PI * radius * radius,
        }
    }

    pub fn center(&self) -> Point {
        match *self {
            Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => {
                Point::new(0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi))
            }
            Region::Disc { center, .. } => center,
        }
    }

    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match *self {
            Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => (x_lo, x_hi, y_lo, y_hi),
            Region::Disc { center, radius } => (
                center.x - radius,
                center.x + radius,
                center.y - radius,
                center.y + radius,
            ),
        }
    }

    pub fn diameter(&self) -> f64 {
        let (a, b, c, d) = self.bounding_box();
        (b - a).hypot(d - c)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        match *self {
            Region::Rectangle { x_lo, x_hi, y_lo, y_hi } => {
                Point::new(rng.random_range(x_lo..=x_hi), rng.random_range(y_lo..=y_hi))
            }
            Region::Disc { center, radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let th = rng.random_range(0.0..2.0 * PI);
                Point::new(center.x + r * th.cos(), center.y + r * th.sin())
            }
        }
    }
}

/// Chart variants accepted by [`FirstIntegral::new`].
#[derive(Clone, Debug, PartialEq)]
pub enum Chart {
    /// `Z = x + iy`.
    Elliptic,
    /// `Z = s + i t^k`, `k` odd.
    ArcNormal { k: u32 },
    /// `Z = s + i ∫_0^t ψ(s, τ) dτ` with `ψ ≥ 0`.
    PointNormal { psi: BivariatePolynomial },
    /// `Z = exp(t^k + iθ)` in coordinates `(θ, t)`.
    CircleNormal { k: u32 },
    /// `Z = x + i Q(x, y)` with `Q = ∫_0^y P(x, τ) dτ`.
    PolynomialIntegral { p: BivariatePolynomial },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartKind {
    Elliptic,
    ArcNormal,
    PointNormal,
    CircleNormal,
    PolynomialIntegral,
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChartKind::Elliptic => "elliptic",
            ChartKind::ArcNormal => "arc_normal",
            ChartKind::PointNormal => "point_normal",
            ChartKind::CircleNormal => "circle_normal",
            ChartKind::PolynomialIntegral => "polynomial_integral",
        };
        f.write_str(s)
    }
}

/// `φ = ∫ψ dt` together with its evaluators.
#[derive(Debug)]
pub(crate) struct PolyChart {
    pub psi: BivariatePolynomial,
    pub phi: BivariatePolynomial,
    psi_f: FloatPolynomial,
    phi_f: FloatPolynomial,
    phi_s_f: FloatPolynomial,
    phi_exact: DyadicEvaluator,
    psi_exact: DyadicEvaluator,
}

impl PolyChart {
    fn new(psi: BivariatePolynomial) -> Self {
        let phi = psi.antiderivative_y();
        let phi_s = phi.partial_x();
        Self {
            psi_f: psi.to_float(),
            phi_f: phi.to_float(),
            phi_s_f: phi_s.to_float(),
            phi_exact: phi.dyadic_evaluator(),
            psi_exact: psi.dyadic_evaluator(),
            psi,
            phi,
        }
    }
}

#[derive(Debug, Clone)]
enum Variant {
    Elliptic,
    Arc { k: u32 },
    Poly { kind: ChartKind, data: Arc<PolyChart> },
    Circle { k: u32 },
}

/// Injective map `Z: domain → ℂ` with `LZ = 0`.
#[derive(Debug, Clone)]
pub struct FirstIntegral {
    variant: Variant,
    domain: Region,
    scale: Complex64,
}

const VALIDATION_SAMPLES: usize = 10_000;

impl FirstIntegral {
    /// Builds and validates a first integral on `domain`.
    pub fn new(chart: Chart, domain: Region) -> Result<Self> {
        let z = Self::new_unchecked(chart, domain)?;
        z.validate(VALIDATION_SAMPLES, 0x5eed)?;
        Ok(z)
    }

    /// Builds without the sampling checks (parameter checks still apply).
    pub fn new_unchecked(chart: Chart, domain: Region) -> Result<Self> {
        let variant = match chart {
            Chart::Elliptic => Variant::Elliptic,
            Chart::ArcNormal { k } => {
                if k == 0 || k % 2 == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "arc normal form needs odd positive k, got {k}"
                    )));
                }
                Variant::Arc { k }
            }
            Chart::CircleNormal { k } => {
                if k == 0 || k % 2 == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "circle normal form needs odd positive k, got {k}"
                    )));
                }
                if !matches!(domain, Region::Rectangle { .. }) {
                    return Err(Error::InvalidParameter(
                        "circle normal form lives on a (theta, t) rectangle".into(),
                    ));
                }
                Variant::Circle { k }
            }
            Chart::PointNormal { psi } => {
                if psi.is_zero() {
                    return Err(Error::InvalidParameter("psi must not vanish identically".into()));
                }
                Variant::Poly { kind: ChartKind::PointNormal, data: Arc::new(PolyChart::new(psi)) }
            }
            Chart::PolynomialIntegral { p } => {
                if p.is_zero() {
                    return Err(Error::InvalidParameter("P must not vanish identically".into()));
                }
                Variant::Poly {
                    kind: ChartKind::PolynomialIntegral,
                    data: Arc::new(PolyChart::new(p)),
                }
            }
        };
        Ok(Self { variant, domain, scale: Complex64::new(1.0, 0.0) })
    }

    pub fn elliptic(domain: Region) -> Self {
        Self { variant: Variant::Elliptic, domain, scale: Complex64::new(1.0, 0.0) }
    }

    pub fn arc_normal(k: u32, domain: Region) -> Result<Self> {
        Self::new(Chart::ArcNormal { k }, domain)
    }

    /// The map `λZ`; it has the same structure and characteristic set.
    pub fn scaled(&self, lambda: Complex64) -> Result<Self> {
        if lambda.norm() == 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidParameter("scale must be finite and nonzero".into()));
        }
        let mut out = self.clone();
        out.scale *= lambda;
        Ok(out)
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn domain(&self) -> Region {
        self.domain
    }

    pub fn with_domain(&self, domain: Region) -> Self {
        let mut out = self.clone();
        out.domain = domain;
        out
    }

    pub fn kind(&self) -> ChartKind {
        match &self.variant {
            Variant::Elliptic => ChartKind::Elliptic,
            Variant::Arc { .. } => ChartKind::ArcNormal,
            Variant::Poly { kind, .. } => *kind,
            Variant::Circle { .. } => ChartKind::CircleNormal,
        }
    }

    /// `k` for the arc and circle normal forms.
    pub fn exponent(&self) -> Option<u32> {
        match self.variant {
            Variant::Arc { k } | Variant::Circle { k } => Some(k),
            _ => None,
        }
    }

    /// `(ψ, φ)` (equivalently `(P, Q)`) for polynomial variants.
    pub fn polynomials(&self) -> Option<(&BivariatePolynomial, &BivariatePolynomial)> {
        match &self.variant {
            Variant::Poly { data, .. } => Some((&data.psi, &data.phi)),
            _ => None,
        }
    }

    pub(crate) fn poly_chart(&self) -> Option<&PolyChart> {
        match &self.variant {
            Variant::Poly { data, .. } => Some(data),
            _ => None,
        }
    }

    /// Order of the normal form at the origin (`r` of `φ = t^r φ₁`).
    pub fn order_at_origin(&self) -> Order {
        match &self.variant {
            Variant::Elliptic => Order::Finite(1),
            Variant::Arc { k } | Variant::Circle { k } => Order::Finite(*k),
            Variant::Poly { data, .. } => {
                let zero = Rational::zero();
                data.phi.vanishing_order(&zero, &zero, Axis::Y)
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self.variant {
            Variant::Circle { .. } => match self.domain {
                Region::Rectangle { y_lo, y_hi, .. } => {
                    p.x.is_finite() && p.y >= y_lo && p.y <= y_hi
                }
                Region::Disc { .. } => false,
            },
            _ => self.domain.contains(p),
        }
    }

    /// Distance to the boundary of the chart domain (periodic directions ignored).
    pub fn margin(&self, p: Point) -> f64 {
        match (&self.variant, self.domain) {
            (Variant::Circle { .. }, Region::Rectangle { y_lo, y_hi, .. }) => {
                (p.y - y_lo).min(y_hi - p.y)
            }
            _ => self.domain.margin(p),
        }
    }

    fn check(&self, p: Point) -> Result<()> {
        if p.is_finite() && self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { x: p.x, y: p.y })
        }
    }

    pub fn eval(&self, p: Point) -> Result<Complex64> {
        self.check(p)?;
        Ok(self.eval_unchecked(p))
    }

    /// `Z(p)` without the domain check; defined on all of ℝ² for every variant.
    pub fn eval_unchecked(&self, p: Point) -> Complex64 {
        let raw = match &self.variant {
            Variant::Elliptic => Complex64::new(p.x, p.y),
            Variant::Arc { k } => Complex64::new(p.x, p.y.powi(*k as i32)),
            Variant::Poly { data, .. } => Complex64::new(p.x, data.phi_f.eval(p.x, p.y)),
            Variant::Circle { k } => {
                let th = p.x.rem_euclid(2.0 * PI);
                Complex64::from_polar(p.y.powi(*k as i32).exp(), th)
            }
        };
        raw * self.scale
    }

    pub fn grad(&self, p: Point) -> Result<(Complex64, Complex64)> {
        self.check(p)?;
        Ok(self.grad_unchecked(p))
    }

    /// Analytic `(Z_x, Z_y)`.
    pub fn grad_unchecked(&self, p: Point) -> (Complex64, Complex64) {
        let (zx, zy) = match &self.variant {
            Variant::Elliptic => (Complex64::new(1.0, 0.0), I),
            Variant::Arc { k } => {
                let k = *k as i32;
                (Complex64::new(1.0, 0.0), I * (f64::from(k) * p.y.powi(k - 1)))
            }
            Variant::Poly { data, .. } => (
                Complex64::new(1.0, data.phi_s_f.eval(p.x, p.y)),
                Complex64::new(0.0, data.psi_f.eval(p.x, p.y)),
            ),
            Variant::Circle { k } => {
                let z = self.eval_unchecked(p) / self.scale;
                let k = *k as i32;
                (I * z, z * (f64::from(k) * p.y.powi(k - 1)))
            }
        };
        (zx * self.scale, zy * self.scale)
    }

    /// `Z(a) − Z(b)`, accurate when `a` and `b` are close and exactly antisymmetric.
    pub fn difference(&self, a: Point, b: Point) -> Complex64 {
        if (a.x, a.y) < (b.x, b.y) {
            self.difference_ordered(a, b)
        } else if a == b {
            Complex64::zero()
        } else {
            -self.difference_ordered(b, a)
        }
    }

    fn difference_ordered(&self, a: Point, b: Point) -> Complex64 {
        let raw = match &self.variant {
            Variant::Elliptic => Complex64::new(a.x - b.x, a.y - b.y),
            Variant::Arc { k } => Complex64::new(a.x - b.x, power_difference(a.y, b.y, *k)),
            Variant::Poly { data, .. } => {
                let d = data.phi_f.eval_dd(a.x, a.y).sub(data.phi_f.eval_dd(b.x, b.y));
                Complex64::new(a.x - b.x, d.to_f64())
            }
            Variant::Circle { k } => {
                let dr = power_difference(a.y, b.y, *k);
                let dth = a.x - b.x;
                let zb = Complex64::from_polar(b.y.powi(*k as i32).exp(), b.x.rem_euclid(2.0 * PI));
                zb * expm1_complex(dr, dth)
            }
        };
        raw * self.scale
    }

    /// Exact `(Re, Im)` of `(Z(a) − Z(b))/λ` for the rational variants.
    pub fn difference_exact(&self, a: Point, b: Point) -> Option<(Rational, Rational)> {
        let re = rational_from_f64(a.x) - rational_from_f64(b.x);
        let im = match &self.variant {
            Variant::Elliptic => rational_from_f64(a.y) - rational_from_f64(b.y),
            Variant::Arc { k } => {
                crate::polyalg::pow_rational(&rational_from_f64(a.y), *k)
                    - crate::polyalg::pow_rational(&rational_from_f64(b.y), *k)
            }
            Variant::Poly { data, .. } => data.phi_exact.eval(a.x, a.y) - data.phi_exact.eval(b.x, b.y),
            Variant::Circle { .. } => return None,
        };
        Some((re, im))
    }

    /// Exact `ψ` (or `P`) at a point, for polynomial variants.
    pub fn psi_exact(&self, p: Point) -> Option<Rational> {
        self.poly_chart().map(|d| d.psi_exact.eval(p.x, p.y))
    }

    /// Checks injectivity, `dZ ≠ 0` and `ψ ≥ 0` on `n` random domain points.
    pub fn validate(&self, n: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample_region = match (&self.variant, self.domain) {
            (Variant::Circle { .. }, Region::Rectangle { y_lo, y_hi, .. }) => {
                Region::Rectangle { x_lo: 0.0, x_hi: 2.0 * PI, y_lo, y_hi }
            }
            _ => self.domain,
        };
        let mut pts = Vec::with_capacity(n);
        for _ in 0..n {
            let p = sample_region.sample(&mut rng);
            if let Some(d) = self.poly_chart() {
                if d.psi_exact.eval(p.x, p.y).is_negative() {
                    return Err(Error::NegativePsi { x: p.x, y: p.y });
                }
            }
            let (zx, zy) = self.grad_unchecked(p);
            if zx.norm() + zy.norm() == 0.0 {
                return Err(Error::DegenerateDifferential { x: p.x, y: p.y });
            }
            pts.push((self.eval_unchecked(p), p));
        }
        pts.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
        let tol = 1e-12;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if pts[j].0.re - pts[i].0.re > tol {
                    break;
                }
                let (zi, pi) = pts[i];
                let (zj, pj) = pts[j];
                if (zi - zj).norm() <= tol && self.chart_distance(pi, pj) > 1e-3 {
                    return Err(Error::NotInjective(format!(
                        "{pi} and {pj} both map to {zi}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn chart_distance(&self, a: Point, b: Point) -> f64 {
        match self.variant {
            Variant::Circle { .. } => {
                let d = (a.x - b.x).rem_euclid(2.0 * PI);
                d.min(2.0 * PI - d).hypot(a.y - b.y)
            }
            _ => a.dist(b),
        }
    }
}

/// `t^k − b^k` computed as `(t − b) Σ t^m b^{k−1−m}`.
pub(crate) fn power_difference(t: f64, b: f64, k: u32) -> f64 {
    let mut sum = 0.0;
    let mut tp = 1.0;
    for m in 0..k {
        sum += tp * b.powi((k - 1 - m) as i32);
        tp *= t;
    }
    (t - b) * sum
}

/// `exp(x + iy) − 1` without cancellation.
pub(crate) fn expm1_complex(x: f64, y: f64) -> Complex64 {
    let s = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

// ---------------------------------------------------------------------------
// Functions and the operator L

/// A complex-valued function of the plane, optionally with analytic partials.
pub trait ComplexField: Sync {
    fn value(&self, p: Point) -> Complex64;

    /// `(∂u/∂x, ∂u/∂y)` when known in closed form.
    fn partials(&self, _p: Point) -> Option<(Complex64, Complex64)> {
        None
    }
}

/// Closure without partials.
pub struct FnField<F>(pub F);

impl<F: Fn(Point) -> Complex64 + Sync> ComplexField for FnField<F> {
    fn value(&self, p: Point) -> Complex64 {
        (self.0)(p)
    }
}

/// Closure with closed-form partials.
pub struct AnalyticField<F, G> {
    pub value: F,
    pub partials: G,
}

impl<F, G> ComplexField for AnalyticField<F, G>
where
    F: Fn(Point) -> Complex64 + Sync,
    G: Fn(Point) -> (Complex64, Complex64) + Sync,
{
    fn value(&self, p: Point) -> Complex64 {
        (self.value)(p)
    }
    fn partials(&self, p: Point) -> Option<(Complex64, Complex64)> {
        Some((self.partials)(p))
    }
}

impl ComplexField for FirstIntegral {
    fn value(&self, p: Point) -> Complex64 {
        self.eval_unchecked(p)
    }
    fn partials(&self, p: Point) -> Option<(Complex64, Complex64)> {
        Some(self.grad_unchecked(p))
    }
}

/// Polynomial `H(w) = Σ c_n w^n` with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPolynomial {
    pub coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::zero(), |acc, c| acc * w + c)
    }

    pub fn derivative(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, c)| c * n as f64)
                .collect(),
        }
    }
}

/// `H ∘ Z`, annihilated by `L`.
pub struct HolomorphicComposite<'a> {
    pub z: &'a FirstIntegral,
    pub h: ComplexPolynomial,
    dh: ComplexPolynomial,
}

impl<'a> HolomorphicComposite<'a> {
    pub fn new(z: &'a FirstIntegral, h: ComplexPolynomial) -> Self {
        let dh = h.derivative();
        Self { z, h, dh }
    }
}

impl ComplexField for HolomorphicComposite<'_> {
    fn value(&self, p: Point) -> Complex64 {
        self.h.eval(self.z.eval_unchecked(p))
    }
    fn partials(&self, p: Point) -> Option<(Complex64, Complex64)> {
        let d = self.dh.eval(self.z.eval_unchecked(p));
        let (zx, zy) = self.z.grad_unchecked(p);
        Some((d * zx, d * zy))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdOrder {
    Second,
    Fourth,
}

/// Central finite-difference stencil.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdStencil {
    pub step: f64,
    pub order: FdOrder,
}

impl Default for FdStencil {
    fn default() -> Self {
        Self { step: 1e-4, order: FdOrder::Second }
    }
}

impl FdStencil {
    pub fn new(step: f64, order: FdOrder) -> Self {
        Self { step, order }
    }

    pub fn reach(&self) -> f64 {
        match self.order {
            FdOrder::Second => self.step,
            FdOrder::Fourth => 2.0 * self.step,
        }
    }

    /// Central-difference partials of `f` at `p`.
    pub fn partials<F: Fn(Point) -> Complex64>(&self, f: F, p: Point) -> (Complex64, Complex64) {
        let h = self.step;
        let d = |dx: f64, dy: f64| -> Complex64 {
            let at = |m: f64| f(Point::new(p.x + m * dx, p.y + m * dy));
            match self.order {
                FdOrder::Second => (at(h) - at(-h)) / (2.0 * h),
                FdOrder::Fourth => {
                    (at(-2.0 * h) - at(2.0 * h) + (at(h) - at(-h)) * 8.0) / (12.0 * h)
                }
            }
        };
        (d(1.0, 0.0), d(0.0, 1.0))
    }
}

/// `Lu(p) = Z_x ∂u/∂y − Z_y ∂u/∂x`.
///
/// With `fd = None` the partials of `u` must be analytic.
pub fn apply_l<U: ComplexField + ?Sized>(
    z: &FirstIntegral,
    u: &U,
    p: Point,
    fd: Option<FdStencil>,
) -> Result<Complex64> {
    let (zx, zy) = z.grad(p)?;
    let (ux, uy) = match fd {
        None => u.partials(p).ok_or(Error::MissingPartials)?,
        Some(st) => {
            if !(st.step > 0.0 && st.step.is_finite()) {
                return Err(Error::InvalidParameter(format!("fd step {} must be positive", st.step)));
            }
            let margin = z.margin(p);
            if margin < st.reach() {
                return Err(Error::InsufficientMargin {
                    x: p.x,
                    y: p.y,
                    margin,
                    needed: st.reach(),
                });
            }
            st.partials(|q| u.value(q), p)
        }
    };
    Ok(zx * uy - zy * ux)
}
