//! Characteristic set: classification, orders and the stratification
//! `Σ = Σ⁰ ∪ Σ¹_R ∪ S` of factored polynomial structures.

mod roots;

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::polyalg::{
    int, rational_from_f64, rational_to_f64, Axis, BivariatePolynomial, FactoredPolynomial, Order,
    Rational,
};
use crate::structures::{ChartKind, FirstIntegral, Point, Region};

pub use roots::{real_roots_in, Root};
use roots::{convergents, rational_sqrt, simple_rational_between, UPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharKind {
    Elliptic,
    Characteristic,
}

/// Classification of a point; `order` is the transversal order of `Im Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CharClassification {
    pub kind: CharKind,
    pub order: Option<Order>,
}

impl CharClassification {
    fn elliptic() -> Self {
        Self { kind: CharKind::Elliptic, order: Some(Order::Finite(1)) }
    }

    fn from_order(order: Order) -> Self {
        let kind = if order == Order::Finite(1) { CharKind::Elliptic } else { CharKind::Characteristic };
        Self { kind, order: Some(order) }
    }
}

const RELATIVE_TOL: f64 = 1e-12;

/// Elliptic or characteristic, with the order where it is exactly computable.
pub fn classify_point(z: &FirstIntegral, p: Point) -> CharClassification {
    match z.kind() {
        ChartKind::Elliptic => CharClassification::elliptic(),
        ChartKind::ArcNormal => {
            let k = z.exponent().unwrap_or(1);
            if p.y == 0.0 {
                CharClassification::from_order(Order::Finite(k))
            } else {
                CharClassification::elliptic()
            }
        }
        ChartKind::CircleNormal => {
            let k = z.exponent().unwrap_or(1);
            let (zx, zy) = z.grad_unchecked(p);
            let im = (zx * zy.conj()).im;
            if im.abs() < RELATIVE_TOL * zx.norm() * zy.norm() || im == 0.0 {
                CharClassification::from_order(Order::Finite(k))
            } else {
                CharClassification::elliptic()
            }
        }
        ChartKind::PointNormal | ChartKind::PolynomialIntegral => {
            let (psi, _) = z.polynomials().expect("polynomial chart");
            // Im(Z_x conj Z_y) = -ψ
            let x = rational_from_f64(p.x);
            let y = rational_from_f64(p.y);
            CharClassification::from_order(order_from_psi(psi, &x, &y))
        }
    }
}

/// `ord_y(φ − φ(p)) = 1 + ord_y ψ` at an exact point.
pub fn order_from_psi(psi: &BivariatePolynomial, x: &Rational, y: &Rational) -> Order {
    match psi.vanishing_order(x, y, Axis::Y) {
        Order::Finite(m) => Order::Finite(m + 1),
        Order::Infinite => Order::Infinite,
    }
}

// ---------------------------------------------------------------------------
// Curves

/// One-dimensional zero set of a recognized factor.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveDescription {
    /// `y = Σ c_i x^i`.
    Graph { coeffs: Vec<Rational> },
    VerticalLine { x: Rational },
    Circle { cx: Rational, cy: Rational, r2: Rational },
}

impl CurveDescription {
    /// `line`, `graph` or `circle`.
    pub fn family(&self) -> &'static str {
        match self {
            CurveDescription::Graph { coeffs } if coeffs.len() <= 2 => "line",
            CurveDescription::Graph { .. } => "graph",
            CurveDescription::VerticalLine { .. } => "line",
            CurveDescription::Circle { .. } => "circle",
        }
    }

    pub fn contains_exact(&self, x: &Rational, y: &Rational) -> bool {
        match self {
            CurveDescription::Graph { coeffs } => &roots::eval(coeffs, x) == y,
            CurveDescription::VerticalLine { x: c } => c == x,
            CurveDescription::Circle { cx, cy, r2 } => {
                let dx = x - cx;
                let dy = y - cy;
                &(&dx * &dx + &dy * &dy) == r2
            }
        }
    }

    fn polynomial(&self) -> BivariatePolynomial {
        match self {
            CurveDescription::Graph { coeffs } => {
                let g = BivariatePolynomial::from_terms(
                    coeffs.iter().enumerate().map(|(i, c)| (i as u32, 0, c.clone())),
                );
                &BivariatePolynomial::y() - &g
            }
            CurveDescription::VerticalLine { x } => {
                &BivariatePolynomial::x() - &BivariatePolynomial::constant(x.clone())
            }
            CurveDescription::Circle { cx, cy, r2 } => {
                let dx = &BivariatePolynomial::x() - &BivariatePolynomial::constant(cx.clone());
                let dy = &BivariatePolynomial::y() - &BivariatePolynomial::constant(cy.clone());
                &(&(&dx * &dx) + &(&dy * &dy)) - &BivariatePolynomial::constant(r2.clone())
            }
        }
    }
}

impl fmt::Display for CurveDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveDescription::Graph { coeffs } => {
                let g = BivariatePolynomial::from_terms(
                    coeffs.iter().enumerate().map(|(i, c)| (i as u32, 0, c.clone())),
                );
                write!(f, "y = {g}")
            }
            CurveDescription::VerticalLine { x } => write!(f, "x = {x}"),
            CurveDescription::Circle { cx, cy, r2 } => {
                let shifted = |v: &str, c: &Rational| {
                    if c.is_zero() {
                        format!("{v}^2")
                    } else if c.is_negative() {
                        format!("({v} + {})^2", -c)
                    } else {
                        format!("({v} - {c})^2")
                    }
                };
                write!(f, "{} + {} = {r2}", shifted("x", cx), shifted("y", cy))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    NoRealZeros,
    Point(Rational, Rational),
    Curve(CurveDescription, u32),
}

/// Recognizes the zero set of a single factor from its exponents and coefficients.
fn recognize(f: &BivariatePolynomial) -> Result<Shape> {
    let unsupported = || Error::UnsupportedFactor(f.to_string());
    let Some(deg) = f.degree() else {
        return Err(Error::UnsupportedFactor("0".into()));
    };
    if deg == 0 {
        return Ok(Shape::NoRealZeros);
    }
    // c·(v − v0)^m in a single variable
    for axis in [Axis::Y, Axis::X] {
        if let Some(u) = f.as_univariate_in(axis) {
            let m = u.len() - 1;
            let lead = u[m].clone();
            let v0 = -(&u[m - 1]) / (&lead * int(m as i64));
            let expected = roots::scale(&power_of_linear(&v0, m), &lead);
            if expected != u {
                return Err(unsupported());
            }
            let curve = match axis {
                Axis::Y => CurveDescription::Graph { coeffs: vec![v0] },
                Axis::X => CurveDescription::VerticalLine { x: v0 },
            };
            return Ok(Shape::Curve(curve, m as u32));
        }
    }
    // a·y + g(x)
    if f.degree_y() == Some(1) && f.terms().all(|(i, j, _)| j == 0 || i == 0) {
        let a = f.coeff(0, 1);
        let dx = f.degree_x().unwrap_or(0) as usize;
        let mut coeffs = vec![Rational::zero(); dx + 1];
        for (i, j, c) in f.terms() {
            if j == 0 {
                coeffs[i as usize] = -c / &a;
            }
        }
        return Ok(Shape::Curve(CurveDescription::Graph { coeffs: roots::trim(coeffs) }, 1));
    }
    // c·((x−a)² + (y−b)² − r²)
    let allowed = [(2, 0), (0, 2), (1, 0), (0, 1), (0, 0)];
    if deg == 2 && f.terms().all(|(i, j, _)| allowed.contains(&(i, j))) {
        let c = f.coeff(2, 0);
        if !c.is_zero() && c == f.coeff(0, 2) {
            let two = int(2);
            let cx = -f.coeff(1, 0) / (&two * &c);
            let cy = -f.coeff(0, 1) / (&two * &c);
            let r2 = &cx * &cx + &cy * &cy - f.coeff(0, 0) / &c;
            return Ok(if r2.is_negative() {
                Shape::NoRealZeros
            } else if r2.is_zero() {
                Shape::Point(cx, cy)
            } else {
                Shape::Curve(CurveDescription::Circle { cx, cy, r2 }, 1)
            });
        }
    }
    Err(unsupported())
}

/// Coefficients of `(v − v0)^m`.
fn power_of_linear(v0: &Rational, m: usize) -> UPoly {
    let lin = vec![-v0.clone(), Rational::one()];
    (0..m).fold(vec![Rational::one()], |acc, _| roots::mul(&acc, &lin))
}

// ---------------------------------------------------------------------------
// Stratification

/// A point of the characteristic set.
#[derive(Clone, Debug, PartialEq)]
pub struct StratumPoint {
    pub point: Point,
    /// Exact coordinates when the point is rational.
    pub exact: Option<(Rational, Rational)>,
    pub order: Option<Order>,
}

impl StratumPoint {
    fn exact(x: Rational, y: Rational, psi: &BivariatePolynomial) -> Self {
        let order = Some(order_from_psi(psi, &x, &y));
        Self {
            point: Point::new(rational_to_f64(&x), rational_to_f64(&y)),
            exact: Some((x, y)),
            order,
        }
    }

    fn approximate(p: Point) -> Self {
        Self { point: p, exact: None, order: None }
    }
}

/// A connected piece of a curve of `Σ¹_R`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularComponent {
    pub curve: CurveDescription,
    /// Parameter interval: `x` for graphs, `y` for vertical lines, angle for circles.
    pub range: (f64, f64),
    pub closed: bool,
    pub sample: StratumPoint,
    pub order: Option<Order>,
    /// Points where the component is tangent to the `y`-direction, with their orders.
    pub tangent_points: Vec<StratumPoint>,
    /// The whole component is tangent to the `y`-direction.
    pub vertical: bool,
    psi: BivariatePolynomial,
}

impl RegularComponent {
    /// `n` exact sample points spread over the interior of the component.
    pub fn sample_points(&self, n: usize) -> Vec<StratumPoint> {
        let (a, b) = self.range;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut lo = a + (b - a) * (k as f64 + 0.25) / n as f64;
            let mut hi = a + (b - a) * (k as f64 + 0.75) / n as f64;
            if matches!(self.curve, CurveDescription::Circle { .. }) {
                // keep away from the vertical tangents at multiples of π
                let m = (lo / PI).ceil() * PI;
                if m <= hi {
                    let pad = 0.1 * (hi - lo);
                    if m - lo > hi - m {
                        hi = m - pad;
                    } else {
                        lo = m + pad;
                    }
                }
            }
            if let Some(p) = self.point_near(lo, hi) {
                out.push(p);
            }
        }
        out
    }

    fn point_near(&self, lo: f64, hi: f64) -> Option<StratumPoint> {
        let t = simple_rational_between(&rational_from_f64(lo), &rational_from_f64(hi));
        match &self.curve {
            CurveDescription::Graph { coeffs } => {
                let y = roots::eval(coeffs, &t);
                Some(StratumPoint::exact(t, y, &self.psi))
            }
            CurveDescription::VerticalLine { x } => {
                Some(StratumPoint::exact(x.clone(), t, &self.psi))
            }
            CurveDescription::Circle { cx, cy, r2 } => {
                let phi = 0.5 * (lo + hi);
                match rational_sqrt(r2) {
                    Some(r) => {
                        let (x, y) = rational_circle_point(cx, cy, &r, phi, (hi - lo) * 0.25);
                        Some(StratumPoint::exact(x, y, &self.psi))
                    }
                    None => {
                        let r = rational_to_f64(r2).sqrt();
                        let p = Point::new(
                            rational_to_f64(cx) + r * phi.cos(),
                            rational_to_f64(cy) + r * phi.sin(),
                        );
                        Some(StratumPoint::approximate(p))
                    }
                }
            }
        }
    }
}

/// Exact point of a circle with rational radius near angle `phi`.
fn rational_circle_point(cx: &Rational, cy: &Rational, r: &Rational, phi: f64, slack: f64) -> (Rational, Rational) {
    // (1 − m², 2m)/(1 + m²) with m ≈ tan(φ/2); rotate by π when |m| > 1
    let flip = (0.5 * phi).cos().abs() < std::f64::consts::FRAC_1_SQRT_2;
    let angle = if flip { phi - PI } else { phi };
    let m_f = (0.5 * angle).tan();
    let tol = (0.5 * slack).tan().abs().max(1e-12);
    let m = simple_rational_between(&rational_from_f64(m_f - tol), &rational_from_f64(m_f + tol));
    let one = Rational::one();
    let den = &one + &m * &m;
    let cos = (&one - &m * &m) / &den;
    let sin = (int(2) * &m) / &den;
    let sign = if flip { -one } else { one };
    (cx + &sign * r * cos, cy + &sign * r * sin)
}

/// `Σ⁰`, `S` and the regular components `Σ¹_R` inside a rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaDecomposition {
    pub isolated_points: Vec<StratumPoint>,
    pub singular_points: Vec<StratumPoint>,
    pub regular_components: Vec<RegularComponent>,
    pub region: Region,
}

impl SigmaDecomposition {
    /// Whether an exact point lies in one of the strata.
    pub fn contains_exact(&self, x: &Rational, y: &Rational) -> bool {
        let on_point = |s: &StratumPoint| s.exact.as_ref().is_some_and(|(a, b)| a == x && b == y);
        if !self.region.contains(Point::new(rational_to_f64(x), rational_to_f64(y))) {
            return false;
        }
        self.isolated_points.iter().any(on_point)
            || self.singular_points.iter().any(on_point)
            || self.regular_components.iter().any(|c| c.curve.contains_exact(x, y))
    }

    /// Components grouped by curve, in first-seen order.
    pub fn curves(&self) -> Vec<(&CurveDescription, Vec<&RegularComponent>)> {
        let mut out: Vec<(&CurveDescription, Vec<&RegularComponent>)> = Vec::new();
        for c in &self.regular_components {
            match out.iter_mut().find(|(d, _)| *d == &c.curve) {
                Some((_, v)) => v.push(c),
                None => out.push((&c.curve, vec![c])),
            }
        }
        out
    }
}

fn fmt_order(o: Option<Order>) -> String {
    o.map_or_else(|| "?".to_string(), |o| o.to_string())
}

fn fmt_points(pts: &[StratumPoint]) -> String {
    let inner: Vec<String> = pts.iter().map(|p| p.point.to_string()).collect();
    format!("{{{}}}", inner.join(", "))
}

impl fmt::Display for SigmaDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let orders = |pts: &[StratumPoint]| -> String {
            pts.iter().map(|p| fmt_order(p.order)).collect::<Vec<_>>().join(", ")
        };
        writeln!(f, "Sigma^0 = {}  orders [{}]", fmt_points(&self.isolated_points), orders(&self.isolated_points))?;
        writeln!(f, "S = {}  orders [{}]", fmt_points(&self.singular_points), orders(&self.singular_points))?;
        writeln!(f, "Sigma^1_R:")?;
        for (curve, comps) in self.curves() {
            let mut ords: Vec<String> = comps.iter().map(|c| fmt_order(c.order)).collect();
            ords.dedup();
            write!(
                f,
                "  {} component(s) of {} {curve}: order {}",
                comps.len(),
                curve.family(),
                ords.join("/")
            )?;
            let tangents: Vec<&StratumPoint> = comps.iter().flat_map(|c| c.tangent_points.iter()).collect();
            if !tangents.is_empty() {
                let t: Vec<String> = tangents
                    .iter()
                    .map(|p| format!("{} (order {})", p.point, fmt_order(p.order)))
                    .collect();
                write!(f, "; tangent to the y-direction at {}", t.join(", "))?;
            }
            if comps.iter().any(|c| c.vertical) {
                write!(f, "; tangent to the y-direction along the whole component")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct ExactPt {
    approx: Point,
    exact: Option<(Rational, Rational)>,
}

impl ExactPt {
    fn same(&self, o: &ExactPt) -> bool {
        match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => a == b,
            _ => self.approx.dist(o.approx) <= 1e-12 * (1.0 + self.approx.x.abs() + self.approx.y.abs()),
        }
    }
}

fn intersect(a: &CurveDescription, b: &CurveDescription, lo: &Rational, hi: &Rational) -> Vec<ExactPt> {
    use CurveDescription::*;
    let mk = |x: Rational, y: Rational| ExactPt {
        approx: Point::new(rational_to_f64(&x), rational_to_f64(&y)),
        exact: Some((x, y)),
    };
    let from_root = |r: &Root, y_of: &dyn Fn(&Rational) -> Rational, y_f: &dyn Fn(f64) -> f64| match &r.exact {
        Some(x) => mk(x.clone(), y_of(x)),
        None => ExactPt { approx: Point::new(r.approx, y_f(r.approx)), exact: None },
    };
    match (a, b) {
        (Graph { coeffs: g1 }, Graph { coeffs: g2 }) => {
            let d = roots::sub(g1, g2);
            let gf = |x: f64| eval_f64(g1, x);
            real_roots_in(&d, lo, hi)
                .iter()
                .map(|r| from_root(r, &|x| roots::eval(g1, x), &gf))
                .collect()
        }
        (Graph { coeffs }, VerticalLine { x }) | (VerticalLine { x }, Graph { coeffs }) => {
            vec![mk(x.clone(), roots::eval(coeffs, x))]
        }
        (VerticalLine { .. }, VerticalLine { .. }) => Vec::new(),
        (Circle { cx, cy, r2 }, Graph { coeffs }) | (Graph { coeffs }, Circle { cx, cy, r2 }) => {
            let dx = vec![-cx.clone(), Rational::one()];
            let dy = roots::sub(coeffs, std::slice::from_ref(cy));
            let e = roots::sub(&roots::add(&roots::mul(&dx, &dx), &roots::mul(&dy, &dy)), std::slice::from_ref(r2));
            let gf = |x: f64| eval_f64(coeffs, x);
            real_roots_in(&e, lo, hi)
                .iter()
                .map(|r| from_root(r, &|x| roots::eval(coeffs, x), &gf))
                .collect()
        }
        (Circle { cx, cy, r2 }, VerticalLine { x }) | (VerticalLine { x }, Circle { cx, cy, r2 }) => {
            let dx = x - cx;
            let rest = r2 - &dx * &dx;
            // (y − cy)² = rest
            let e = vec![cy * cy - &rest, -(int(2) * cy), Rational::one()];
            real_roots_in(&e, lo, hi)
                .iter()
                .map(|r| match &r.exact {
                    Some(y) => mk(x.clone(), y.clone()),
                    None => ExactPt { approx: Point::new(rational_to_f64(x), r.approx), exact: None },
                })
                .collect()
        }
        (Circle { cx: ax, cy: ay, r2: ar }, Circle { cx: bx, cy: by, r2: br }) => {
            // radical line: 2(bx−ax)x + 2(by−ay)y = (bx²+by²−br) − (ax²+ay²−ar)
            let u = int(2) * (bx - ax);
            let v = int(2) * (by - ay);
            let w = (bx * bx + by * by - br) - (ax * ax + ay * ay - ar);
            if u.is_zero() && v.is_zero() {
                return Vec::new();
            }
            let line = if v.is_zero() {
                VerticalLine { x: &w / &u }
            } else {
                Graph { coeffs: roots::trim(vec![&w / &v, -(&u / &v)]) }
            };
            intersect(a, &line, lo, hi)
        }
    }
}

fn eval_f64(coeffs: &[Rational], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + rational_to_f64(c))
}

/// Stratifies the zero set of a factored `P` inside a rectangle.
pub fn decompose_example(factors: &FactoredPolynomial, region: Region) -> Result<SigmaDecomposition> {
    let Region::Rectangle { x_lo, x_hi, y_lo, y_hi } = region else {
        return Err(Error::UnsupportedRegion("stratification needs a rectangle".into()));
    };
    let psi = factors.expand();
    if psi.is_zero() {
        return Err(Error::UnsupportedFactor("P vanishes identically".into()));
    }
    let mut points: Vec<(Rational, Rational)> = Vec::new();
    let mut curves: Vec<CurveDescription> = Vec::new();
    for (f, power) in &factors.factors {
        if *power == 0 {
            continue;
        }
        match recognize(f)? {
            Shape::NoRealZeros => {}
            Shape::Point(x, y) => {
                if !points.contains(&(x.clone(), y.clone())) {
                    points.push((x, y));
                }
            }
            Shape::Curve(c, _) => {
                if !curves.contains(&c) {
                    curves.push(c);
                }
            }
        }
    }
    let inside = |p: Point| region.contains(p);
    let (rx_lo, rx_hi) = (rational_from_f64(x_lo), rational_from_f64(x_hi));
    let (ry_lo, ry_hi) = (rational_from_f64(y_lo), rational_from_f64(y_hi));
    let big = int(1 << 20);
    let (wide_lo, wide_hi) = (-big.clone() + &rx_lo.clone().min(ry_lo.clone()), big + &rx_hi.clone().max(ry_hi.clone()));

    // singular points: pairwise intersections and point zeros lying on curves
    let mut singular: Vec<ExactPt> = Vec::new();
    let push_unique = |list: &mut Vec<ExactPt>, p: ExactPt| {
        if !list.iter().any(|q| q.same(&p)) {
            list.push(p);
        }
    };
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            for p in intersect(&curves[i], &curves[j], &wide_lo, &wide_hi) {
                if inside(p.approx) {
                    push_unique(&mut singular, p);
                }
            }
        }
    }
    let mut isolated = Vec::new();
    for (x, y) in &points {
        let p = ExactPt {
            approx: Point::new(rational_to_f64(x), rational_to_f64(y)),
            exact: Some((x.clone(), y.clone())),
        };
        if !inside(p.approx) {
            continue;
        }
        if curves.iter().any(|c| c.contains_exact(x, y)) {
            push_unique(&mut singular, p);
        } else {
            isolated.push(p);
        }
    }
    singular.sort_by(|a, b| (a.approx.x, a.approx.y).partial_cmp(&(b.approx.x, b.approx.y)).unwrap());

    let to_stratum = |p: &ExactPt| match &p.exact {
        Some((x, y)) => StratumPoint::exact(x.clone(), y.clone(), &psi),
        None => StratumPoint::approximate(p.approx),
    };

    let mut components = Vec::new();
    for curve in &curves {
        let on_curve: Vec<&ExactPt> = singular
            .iter()
            .filter(|p| match &p.exact {
                Some((x, y)) => curve.contains_exact(x, y),
                None => {
                    let v = curve.polynomial().to_float().eval(p.approx.x, p.approx.y);
                    v.abs() < 1e-9
                }
            })
            .collect();
        let template = RegularComponent {
            curve: curve.clone(),
            range: (0.0, 0.0),
            closed: false,
            sample: StratumPoint::approximate(Point::default()),
            order: None,
            tangent_points: Vec::new(),
            vertical: false,
            psi: psi.clone(),
        };
        match curve {
            CurveDescription::Graph { coeffs } => {
                let mut cuts: Vec<(f64, bool)> = vec![(x_lo, false), (x_hi, false)];
                for bound in [&ry_lo, &ry_hi] {
                    let d = roots::sub(coeffs, std::slice::from_ref(bound));
                    for r in real_roots_in(&d, &rx_lo, &rx_hi) {
                        cuts.push((r.approx, false));
                    }
                }
                for p in &on_curve {
                    cuts.push((p.approx.x, true));
                }
                let pieces = split_pieces(cuts, |m| {
                    let y = eval_f64(coeffs, m);
                    y >= y_lo && y <= y_hi
                });
                for (a, b) in pieces {
                    components.push(finish_component(&template, (a, b), false));
                }
            }
            CurveDescription::VerticalLine { x } => {
                let xf = rational_to_f64(x);
                if xf < x_lo || xf > x_hi {
                    continue;
                }
                let mut cuts: Vec<(f64, bool)> = vec![(y_lo, false), (y_hi, false)];
                for p in &on_curve {
                    cuts.push((p.approx.y, true));
                }
                for (a, b) in split_pieces(cuts, |_| true) {
                    let mut c = finish_component(&template, (a, b), false);
                    c.vertical = true;
                    components.push(c);
                }
            }
            CurveDescription::Circle { cx, cy, r2 } => {
                let (cxf, cyf) = (rational_to_f64(cx), rational_to_f64(cy));
                let r = rational_to_f64(r2).sqrt();
                let angle = |x: f64, y: f64| (y - cyf).atan2(x - cxf).rem_euclid(2.0 * PI);
                let mut cuts: Vec<(f64, bool)> = Vec::new();
                for &xb in &[x_lo, x_hi] {
                    let h = r * r - (xb - cxf).powi(2);
                    if h > 0.0 {
                        cuts.push((angle(xb, cyf + h.sqrt()), false));
                        cuts.push((angle(xb, cyf - h.sqrt()), false));
                    }
                }
                for &yb in &[y_lo, y_hi] {
                    let h = r * r - (yb - cyf).powi(2);
                    if h > 0.0 {
                        cuts.push((angle(cxf + h.sqrt(), yb), false));
                        cuts.push((angle(cxf - h.sqrt(), yb), false));
                    }
                }
                for p in &on_curve {
                    cuts.push((angle(p.approx.x, p.approx.y), true));
                }
                let on_circle_inside = |phi: f64| inside(Point::new(cxf + r * phi.cos(), cyf + r * phi.sin()));
                if cuts.is_empty() {
                    if on_circle_inside(0.0) {
                        let mut c = finish_component(&template, (0.0, 2.0 * PI), true);
                        c.closed = true;
                        components.push(c);
                    }
                    continue;
                }
                cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
                let first = cuts[0];
                cuts.push((first.0 + 2.0 * PI, first.1));
                let pieces = split_pieces(cuts, |m| on_circle_inside(m));
                for (a, b) in pieces {
                    components.push(finish_component(&template, (a, b), false));
                }
            }
        }
    }
    for c in &mut components {
        add_tangent_points(c, &psi, &region);
    }

    Ok(SigmaDecomposition {
        isolated_points: isolated.iter().map(to_stratum).collect(),
        singular_points: singular.iter().map(to_stratum).collect(),
        regular_components: components,
        region,
    })
}

/// Maximal parameter intervals between `cuts` whose midpoints satisfy `keep`.
///
/// Adjacent kept pieces are merged unless the cut between them is singular.
fn split_pieces(mut cuts: Vec<(f64, bool)>, keep: impl Fn(f64) -> bool) -> Vec<(f64, f64)> {
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    cuts.dedup_by(|b, a| {
        if (a.0 - b.0).abs() <= 1e-14 * (1.0 + a.0.abs()) {
            a.1 |= b.1;
            true
        } else {
            false
        }
    });
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut open = false;
    for w in cuts.windows(2) {
        let (a, sa) = w[0];
        let (b, _) = w[1];
        if b - a <= 0.0 || !keep(0.5 * (a + b)) {
            open = false;
            continue;
        }
        if open && !sa {
            out.last_mut().unwrap().1 = b;
        } else {
            out.push((a, b));
        }
        open = true;
    }
    out
}

fn finish_component(template: &RegularComponent, range: (f64, f64), closed: bool) -> RegularComponent {
    let mut c = template.clone();
    c.range = range;
    c.closed = closed;
    let (a, b) = range;
    // avoid the vertical tangents of circles when picking the sample
    let (lo, hi) = match &c.curve {
        CurveDescription::Circle { .. } if closed => (0.4 * PI, 0.6 * PI),
        _ => (a + 0.4 * (b - a), a + 0.6 * (b - a)),
    };
    if let Some(s) = c.point_near(lo, hi) {
        c.order = s.order;
        c.sample = s;
    }
    if c.vertical {
        c.order = Some(Order::Infinite);
    }
    c
}

fn add_tangent_points(c: &mut RegularComponent, psi: &BivariatePolynomial, region: &Region) {
    let CurveDescription::Circle { cx, cy, r2 } = &c.curve else {
        return;
    };
    let (a, b) = c.range;
    for phi in [0.0, PI, 2.0 * PI, 3.0 * PI] {
        if !(c.closed && phi < 2.0 * PI || phi > a && phi < b) {
            continue;
        }
        let sp = match rational_sqrt(r2) {
            Some(r) => {
                let x = if phi.cos() > 0.0 { cx + &r } else { cx - &r };
                StratumPoint::exact(x, cy.clone(), psi)
            }
            None => {
                let r = rational_to_f64(r2).sqrt();
                StratumPoint::approximate(Point::new(rational_to_f64(cx) + r * phi.cos(), rational_to_f64(cy)))
            }
        };
        if region.contains(sp.point) && !c.tangent_points.contains(&sp) {
            c.tangent_points.push(sp);
        }
    }
    c.tangent_points.sort_by(|p, q| p.point.x.total_cmp(&q.point.x));
}

/// Derived order that differs from a stated one.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderDiscrepancy {
    pub curve: String,
    pub derived: Option<Order>,
    pub stated: u32,
}

/// Compares component orders with stated types per curve family.
pub fn compare_stated_orders(decomp: &SigmaDecomposition, stated: &[(String, u32)]) -> Vec<OrderDiscrepancy> {
    let mut out = Vec::new();
    for (curve, comps) in decomp.curves() {
        for (family, order) in stated {
            if family != curve.family() && family != &curve.to_string() {
                continue;
            }
            for c in &comps {
                if c.order != Some(Order::Finite(*order)) {
                    out.push(OrderDiscrepancy { curve: curve.to_string(), derived: c.order, stated: *order });
                    break;
                }
            }
        }
    }
    out
}

/// Rational with small denominator close to `v` (used for tidy sample points).
pub fn tidy_rational(v: f64) -> Rational {
    let r = rational_from_f64(v);
    convergents(&r, &BigInt::from(1_000_000u64))
        .into_iter()
        .rev()
        .find(|c| (rational_to_f64(c) - v).abs() <= 1e-12 * (1.0 + v.abs()))
        .unwrap_or(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Chart;

    fn example_decomposition() -> SigmaDecomposition {
        decompose_example(&FactoredPolynomial::stratification_example(), Region::square(4.0)).unwrap()
    }

    fn pts(list: &[StratumPoint]) -> Vec<(f64, f64, Option<Order>)> {
        list.iter().map(|p| (p.point.x, p.point.y, p.order)).collect()
    }

    #[test]
    fn example_strata() {
        let d = example_decomposition();
        assert_eq!(pts(&d.isolated_points), vec![(0.0, -1.0, Some(Order::Finite(3)))]);
        assert_eq!(
            pts(&d.singular_points),
            vec![
                (-1.0, 0.0, Some(Order::Finite(9))),
                (0.0, 0.0, Some(Order::Finite(5))),
                (1.0, 0.0, Some(Order::Finite(9)))
            ]
        );
        let curves = d.curves();
        assert_eq!(curves.len(), 3);
        let by_family = |f: &str| curves.iter().find(|(c, _)| c.family() == f).unwrap();
        assert_eq!(by_family("line").1.len(), 4);
        assert_eq!(by_family("graph").1.len(), 3);
        let circle = &by_family("circle").1;
        assert_eq!(circle.len(), 1);
        assert!(circle[0].closed);
        assert_eq!(circle[0].order, Some(Order::Finite(3)));
        let tangent: Vec<_> = pts(&circle[0].tangent_points);
        assert_eq!(tangent, vec![(-1.0, 3.0, Some(Order::Finite(5))), (1.0, 3.0, Some(Order::Finite(5)))]);
        for c in by_family("line").1.iter() {
            assert_eq!(c.order, Some(Order::Finite(3)));
        }
        for c in by_family("graph").1.iter() {
            assert_eq!(c.order, Some(Order::Finite(7)));
        }
    }

    #[test]
    fn every_reported_point_is_a_zero() {
        let d = example_decomposition();
        let psi = FactoredPolynomial::stratification_example().expand();
        let mut all: Vec<StratumPoint> = d.isolated_points.clone();
        all.extend(d.singular_points.iter().cloned());
        for c in &d.regular_components {
            all.extend(c.sample_points(10));
            all.extend(c.tangent_points.iter().cloned());
        }
        for p in all {
            let (x, y) = p.exact.expect("example points are rational");
            assert!(psi.eval(&x, &y).is_zero(), "{}", p.point);
        }
    }

    #[test]
    fn orders_constant_along_components() {
        let d = example_decomposition();
        for c in &d.regular_components {
            let orders: Vec<_> = c.sample_points(10).iter().map(|p| p.order).collect();
            assert_eq!(orders.len(), 10);
            assert!(orders.iter().all(|o| *o == c.order), "{} {:?}", c.curve, orders);
        }
    }

    #[test]
    fn single_factor_examples() {
        let r = Region::square(4.0);
        let y2 = FactoredPolynomial::new(vec![(BivariatePolynomial::from_integer_terms(&[(0, 2, 1)]), 1)]);
        let d = decompose_example(&y2, r).unwrap();
        assert!(d.isolated_points.is_empty() && d.singular_points.is_empty());
        assert_eq!(d.regular_components.len(), 1);
        assert_eq!(d.regular_components[0].order, Some(Order::Finite(3)));

        let disc = FactoredPolynomial::new(vec![(BivariatePolynomial::from_integer_terms(&[(2, 0, 1), (0, 2, 1)]), 1)]);
        let d = decompose_example(&disc, r).unwrap();
        assert_eq!(pts(&d.isolated_points), vec![(0.0, 0.0, Some(Order::Finite(3)))]);
        assert!(d.singular_points.is_empty() && d.regular_components.is_empty());
    }

    #[test]
    fn unsupported_factor_is_echoed() {
        let f = BivariatePolynomial::from_integer_terms(&[(3, 0, 1), (0, 3, 1), (1, 1, -1)]);
        let err = decompose_example(&FactoredPolynomial::new(vec![(f.clone(), 1)]), Region::square(1.0)).unwrap_err();
        assert_eq!(err, Error::UnsupportedFactor(f.to_string()));
    }

    #[test]
    fn classification_examples() {
        let e = FirstIntegral::elliptic(Region::square(1.0));
        assert_eq!(classify_point(&e, Point::new(0.3, 0.0)).kind, CharKind::Elliptic);
        let z = FirstIntegral::new(
            Chart::PolynomialIntegral { p: FactoredPolynomial::stratification_example().expand() },
            Region::square(4.0),
        )
        .unwrap();
        assert_eq!(classify_point(&z, Point::new(0.5, 0.5)).kind, CharKind::Elliptic);
        let c = classify_point(&z, Point::new(0.0, 0.0));
        assert_eq!(c, CharClassification { kind: CharKind::Characteristic, order: Some(Order::Finite(5)) });
        let arc = FirstIntegral::arc_normal(3, Region::square(1.0)).unwrap();
        assert_eq!(classify_point(&arc, Point::new(0.2, 0.0)).order, Some(Order::Finite(3)));
        assert_eq!(classify_point(&arc, Point::new(0.2, 0.1)).kind, CharKind::Elliptic);
    }

    #[test]
    fn circles_crossing_lines_and_clipping() {
        // circle of radius 2 about the origin and the line y = 1, clipped to [-1.5, 3]x[-3, 3]
        let circle = BivariatePolynomial::from_integer_terms(&[(2, 0, 1), (0, 2, 1), (0, 0, -4)]);
        let line = BivariatePolynomial::from_integer_terms(&[(0, 1, 1), (0, 0, -1)]);
        let f = FactoredPolynomial::new(vec![(circle, 1), (line, 1)]);
        let d = decompose_example(&f, Region::rectangle(-1.5, 3.0, -3.0, 3.0).unwrap()).unwrap();
        // x = ±√3 at y = 1; only +√3 is inside
        assert_eq!(d.singular_points.len(), 1);
        assert!((d.singular_points[0].point.x - 3f64.sqrt()).abs() < 1e-14);
        assert!(d.singular_points[0].exact.is_none());
        let curves = d.curves();
        let circle_comps = &curves.iter().find(|(c, _)| c.family() == "circle").unwrap().1;
        assert_eq!(circle_comps.len(), 2);
        let line_comps = &curves.iter().find(|(c, _)| c.family() == "line").unwrap().1;
        assert_eq!(line_comps.len(), 2);
    }
}
