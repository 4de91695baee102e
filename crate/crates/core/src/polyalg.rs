//! Exact bivariate polynomials over the rationals.
//!
//! Coefficients are `BigRational`, so products of large factored forms never
//! overflow. A compensated floating-point evaluator ([`FloatPolynomial`]) and an
//! exact evaluator for binary floating-point points ([`DyadicEvaluator`]) are
//! derived from a polynomial once and reused in inner loops.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Coordinate axis used for directional queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Vanishing order of a function along a line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(m) => Some(m),
            Order::Infinite => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(m) => write!(f, "{m}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

/// Convert an `f64` to the exact rational it represents.
pub fn rational_from_f64(v: f64) -> Rational {
    Rational::from_float(v).expect("finite coordinate")
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Polynomial in two real variables with exact rational coefficients.
///
/// Keys are `(i, j)` for the monomial `x^i y^j`; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BivariatePolynomial {
    terms: BTreeMap<(u32, u32), Rational>,
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(i: u32, j: u32, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        Self { terms }
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, Rational::one())
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, Rational::one())
    }

    /// Builds a polynomial from `(i, j, c)` terms; repeated exponents are summed.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, Rational)>,
    {
        let mut out = Self::zero();
        for (i, j, c) in terms {
            out.add_term(i, j, c);
        }
        out
    }

    pub fn from_integer_terms(terms: &[(u32, u32, i64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(i, j, c)| (i, j, int(c))))
    }

    fn add_term(&mut self, i: u32, j: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let key = (i, j);
        let remove = match self.terms.get_mut(&key) {
            Some(existing) => {
                *existing += c;
                existing.is_zero()
            }
            None => {
                self.terms.insert(key, c);
                false
            }
        };
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &Rational)> {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    pub fn degree_x(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    pub fn degree_y(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(&k, v)| (k, v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn partial_x(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|&(i, _, _)| i > 0)
                .map(|(i, j, c)| (i - 1, j, c * int(i64::from(i)))),
        )
    }

    pub fn partial_y(&self) -> Self {
        Self::from_terms(
            self.terms()
                .filter(|&(_, j, _)| j > 0)
                .map(|(i, j, c)| (i, j - 1, c * int(i64::from(j)))),
        )
    }

    pub fn partial(&self, axis: Axis) -> Self {
        match axis {
            Axis::X => self.partial_x(),
            Axis::Y => self.partial_y(),
        }
    }

    /// `∫_0^y p(x, τ) dτ`.
    pub fn antiderivative_y(&self) -> Self {
        Self::from_terms(
            self.terms()
                .map(|(i, j, c)| (i, j + 1, c / int(i64::from(j) + 1))),
        )
    }

    /// Exact value at a rational point.
    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        let Some(dx) = self.degree_x() else {
            return Rational::zero();
        };
        // Horner in x over rows that are themselves Horner in y.
        let mut rows: Vec<BTreeMap<u32, &Rational>> = vec![BTreeMap::new(); dx as usize + 1];
        for (i, j, c) in self.terms() {
            rows[i as usize].insert(j, c);
        }
        let mut acc = Rational::zero();
        for row in rows.iter().rev() {
            acc *= x;
            acc += horner_sparse(row, y);
        }
        acc
    }

    /// Exact value at the rational point represented by two `f64`s.
    pub fn eval_at_f64(&self, x: f64, y: f64) -> Rational {
        self.eval(&rational_from_f64(x), &rational_from_f64(y))
    }

    /// Coefficients `c_m` of `t ↦ p(at + t·e_axis) = Σ c_m t^m`.
    pub fn restrict_to_line(&self, x: &Rational, y: &Rational, axis: Axis) -> Vec<Rational> {
        // Collect the polynomial in the free variable with the other fixed.
        let mut by_power: BTreeMap<u32, Rational> = BTreeMap::new();
        for (i, j, c) in self.terms() {
            let (free, fixed_pow, fixed_val) = match axis {
                Axis::X => (i, j, y),
                Axis::Y => (j, i, x),
            };
            let v = c * pow_rational(fixed_val, fixed_pow);
            *by_power.entry(free).or_insert_with(Rational::zero) += v;
        }
        let base = match axis {
            Axis::X => x,
            Axis::Y => y,
        };
        let dense: Vec<Rational> = match by_power.keys().max() {
            None => return Vec::new(),
            Some(&deg) => (0..=deg)
                .map(|k| by_power.get(&k).cloned().unwrap_or_else(Rational::zero))
                .collect(),
        };
        taylor_shift(&dense, base)
    }

    /// Smallest `m` with a nonzero `m`-th derivative along `axis` at the point.
    pub fn vanishing_order(&self, x: &Rational, y: &Rational, axis: Axis) -> Order {
        let coeffs = self.restrict_to_line(x, y, axis);
        match coeffs.iter().position(|c| !c.is_zero()) {
            Some(m) => Order::Finite(m as u32),
            None => Order::Infinite,
        }
    }

    pub fn vanishing_order_at_f64(&self, x: f64, y: f64, axis: Axis) -> Order {
        self.vanishing_order(&rational_from_f64(x), &rational_from_f64(y), axis)
    }

    /// Univariate polynomial obtained by fixing `x` (if `axis == Y`, the free variable is `y`).
    pub fn as_univariate_in(&self, axis: Axis) -> Option<Vec<Rational>> {
        let deg = match axis {
            Axis::X => {
                if self.degree_y().unwrap_or(0) > 0 {
                    return None;
                }
                self.degree_x()
            }
            Axis::Y => {
                if self.degree_x().unwrap_or(0) > 0 {
                    return None;
                }
                self.degree_y()
            }
        };
        let Some(deg) = deg else {
            return Some(Vec::new());
        };
        let mut out = vec![Rational::zero(); deg as usize + 1];
        for (i, j, c) in self.terms() {
            let k = match axis {
                Axis::X => i,
                Axis::Y => j,
            };
            out[k as usize] = c.clone();
        }
        Some(out)
    }

    pub fn to_float(&self) -> FloatPolynomial {
        FloatPolynomial::new(self)
    }

    pub fn dyadic_evaluator(&self) -> DyadicEvaluator {
        DyadicEvaluator::new(self)
    }
}

fn horner_sparse(row: &BTreeMap<u32, &Rational>, y: &Rational) -> Rational {
    let Some(&top) = row.keys().next_back() else {
        return Rational::zero();
    };
    let mut acc = Rational::zero();
    for j in (0..=top).rev() {
        acc *= y;
        if let Some(c) = row.get(&j) {
            acc += *c;
        }
    }
    acc
}

pub(crate) fn pow_rational(v: &Rational, n: u32) -> Rational {
    let mut r = Rational::one();
    for _ in 0..n {
        r *= v;
    }
    r
}

/// Coefficients of `p(a + t)` given the coefficients of `p(t)`.
pub fn taylor_shift(coeffs: &[Rational], a: &Rational) -> Vec<Rational> {
    let mut c = coeffs.to_vec();
    let n = c.len();
    if a.is_zero() {
        return c;
    }
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            let t = &c[k + 1] * a;
            c[k] += t;
        }
    }
    c
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let a = c.abs();
            let unit = a.is_one();
            if !unit || (i == 0 && j == 0) {
                write!(f, "{a}")?;
            }
            let mut sep = !unit;
            for (name, e) in [("x", i), ("y", j)] {
                if e == 0 {
                    continue;
                }
                if sep {
                    write!(f, "*")?;
                }
                if e == 1 {
                    write!(f, "{name}")?;
                } else {
                    write!(f, "{name}^{e}")?;
                }
                sep = true;
            }
        }
        Ok(())
    }
}

impl Add for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn add(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        let mut out = self.clone();
        for (i, j, c) in rhs.terms() {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Sub for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn sub(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        let mut out = self.clone();
        for (i, j, c) in rhs.terms() {
            out.add_term(i, j, -c.clone());
        }
        out
    }
}

impl Neg for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn neg(self) -> BivariatePolynomial {
        BivariatePolynomial {
            terms: self.terms.iter().map(|(&k, v)| (k, -v.clone())).collect(),
        }
    }
}

impl Mul for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn mul(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        let mut out = BivariatePolynomial::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for BivariatePolynomial {
            type Output = BivariatePolynomial;
            fn $m(self, rhs: BivariatePolynomial) -> BivariatePolynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

// ---------------------------------------------------------------------------
// Double-double evaluation

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    pub fn from_rational(r: &Rational) -> Self {
        let hi = rational_to_f64(r);
        let rest = r - rational_from_f64(hi);
        Self { hi, lo: rational_to_f64(&rest) }
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + o.lo);
        Self { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Self) -> Self {
        self.add(Self { hi: -o.hi, lo: -o.lo })
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Self {
        let p = self.hi * x;
        let e = self.hi.mul_add(x, -p);
        let (hi, lo) = quick_two_sum(p, e + self.lo * x);
        Self { hi, lo }
    }

    #[inline]
    pub fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let (hi, lo) = quick_two_sum(p, e + self.hi * o.lo + self.lo * o.hi);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Dense double-double copy of a polynomial for fast compensated evaluation.
#[derive(Clone, Debug)]
pub struct FloatPolynomial {
    // rows[i][j] is the coefficient of x^i y^j
    rows: Vec<Vec<DoubleDouble>>,
}

impl FloatPolynomial {
    pub fn new(p: &BivariatePolynomial) -> Self {
        let dx = p.degree_x().map_or(0, |d| d as usize + 1);
        let mut rows: Vec<Vec<DoubleDouble>> = vec![Vec::new(); dx];
        for (i, j, c) in p.terms() {
            let row = &mut rows[i as usize];
            if row.len() <= j as usize {
                row.resize(j as usize + 1, DoubleDouble::ZERO);
            }
            row[j as usize] = DoubleDouble::from_rational(c);
        }
        Self { rows }
    }

    pub fn eval_dd(&self, x: f64, y: f64) -> DoubleDouble {
        let mut acc = DoubleDouble::ZERO;
        for row in self.rows.iter().rev() {
            let mut r = DoubleDouble::ZERO;
            for c in row.iter().rev() {
                r = r.mul_f64(y).add(*c);
            }
            acc = acc.mul_f64(x).add(r);
        }
        acc
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_dd(x, y).to_f64()
    }
}

/// Exact evaluation at points with `f64` coordinates using integer arithmetic.
///
/// The polynomial is scaled to integer coefficients once; a point `(X 2^a, Y 2^b)`
/// is then evaluated with a homogenized Horner scheme and a single final division.
#[derive(Clone, Debug)]
pub struct DyadicEvaluator {
    rows: Vec<Vec<BigInt>>,
    denom: BigInt,
    dx: usize,
    dy: usize,
}

fn decode(v: f64) -> (BigInt, i64) {
    if v == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & 0xf_ffff_ffff_ffff;
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | 0x10_0000_0000_0000, exp - 1075)
    };
    let tz = mant.trailing_zeros() as i64;
    (BigInt::from(sign) * BigInt::from(mant >> tz), e + tz)
}

impl DyadicEvaluator {
    pub fn new(p: &BivariatePolynomial) -> Self {
        let mut denom = BigInt::one();
        for (_, _, c) in p.terms() {
            denom = num_integer::Integer::lcm(&denom, c.denom());
        }
        let dx = p.degree_x().unwrap_or(0) as usize;
        let dy = p.degree_y().unwrap_or(0) as usize;
        let mut rows = vec![vec![BigInt::zero(); dy + 1]; dx + 1];
        for (i, j, c) in p.terms() {
            rows[i as usize][j as usize] = c.numer() * (&denom / c.denom());
        }
        Self { rows, denom, dx, dy }
    }

    pub fn eval(&self, x: f64, y: f64) -> Rational {
        let (xm, xe) = decode(x);
        let (ym, ye) = decode(y);
        // x = xm·2^xe. With a = max(0, -xe) the scaled value x·2^a is an integer.
        let ax = (-xe).max(0) as usize;
        let ay = (-ye).max(0) as usize;
        let xi = if xe > 0 { xm << (xe as usize) } else { xm };
        let yi = if ye > 0 { ym << (ye as usize) } else { ym };
        let mut acc = BigInt::zero();
        for (i, row) in self.rows.iter().enumerate().rev() {
            let mut r = BigInt::zero();
            for (j, c) in row.iter().enumerate().rev() {
                r *= &yi;
                if !c.is_zero() {
                    r += c << (ay * (self.dy - j));
                }
            }
            acc *= &xi;
            acc += r << (ax * (self.dx - i));
        }
        let den = &self.denom << (ax * self.dx + ay * self.dy);
        Rational::new(acc, den)
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        rational_to_f64(&self.eval(x, y))
    }
}

/// Example polynomial in factored form: factors with powers.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredPolynomial {
    pub factors: Vec<(BivariatePolynomial, u32)>,
}

impl FactoredPolynomial {
    pub fn new(factors: Vec<(BivariatePolynomial, u32)>) -> Self {
        Self { factors }
    }

    pub fn expand(&self) -> BivariatePolynomial {
        self.factors
            .iter()
            .fold(BivariatePolynomial::one(), |acc, (f, n)| &acc * &f.pow(*n))
    }

    /// `P = y²(x²+y²)(y−1+x²)⁶(x²+(y+1)²)(x²+(y−3)²−1)²`.
    pub fn stratification_example() -> Self {
        let f = BivariatePolynomial::from_integer_terms;
        Self::new(vec![
            (f(&[(0, 2, 1)]), 1),
            (f(&[(2, 0, 1), (0, 2, 1)]), 1),
            (f(&[(0, 1, 1), (0, 0, -1), (2, 0, 1)]), 6),
            (f(&[(2, 0, 1), (0, 2, 1), (0, 1, 2), (0, 0, 1)]), 1),
            (f(&[(2, 0, 1), (0, 2, 1), (0, 1, -6), (0, 0, 8)]), 2),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn product_of_small_factors() {
        let a = BivariatePolynomial::from_integer_terms(&[(0, 2, 1)]);
        let b = BivariatePolynomial::from_integer_terms(&[(2, 0, 1), (0, 2, 1)]);
        let p = &a * &b;
        assert_eq!(
            p,
            BivariatePolynomial::from_integer_terms(&[(2, 2, 1), (0, 4, 1)])
        );
        assert_eq!(&a * &BivariatePolynomial::one(), a);
    }

    #[test]
    fn example_polynomial_degree_and_value() {
        let p = FactoredPolynomial::stratification_example().expand();
        assert_eq!(p.degree(), Some(22));
        assert_eq!(p.eval(&int(1), &int(1)), int(160));
        let direct = FactoredPolynomial::stratification_example()
            .factors
            .iter()
            .fold(int(1), |acc, (f, n)| acc * pow_rational(&f.eval(&int(1), &int(1)), *n));
        assert_eq!(direct, int(160));
    }

    #[test]
    fn antiderivative_basics() {
        let y2 = BivariatePolynomial::from_integer_terms(&[(0, 2, 1)]);
        assert_eq!(
            y2.antiderivative_y(),
            BivariatePolynomial::monomial(0, 3, r(1, 3))
        );
        assert!(BivariatePolynomial::zero().antiderivative_y().is_zero());
        let p = FactoredPolynomial::stratification_example().expand();
        let q = p.antiderivative_y();
        assert!((&q.partial_y() - &p).is_zero());
        assert!(q.eval(&r(7, 3), &int(0)).is_zero());
    }

    #[test]
    fn orders_of_example() {
        let p = FactoredPolynomial::stratification_example().expand();
        let q = p.antiderivative_y();
        let y3 = BivariatePolynomial::from_integer_terms(&[(0, 3, 1)]);
        assert_eq!(y3.vanishing_order(&int(0), &int(0), Axis::Y), Order::Finite(3));
        let shifted = |x: i64, y: i64| {
            let c = q.eval(&int(x), &int(y));
            &q - &BivariatePolynomial::constant(c)
        };
        assert_eq!(shifted(2, 0).vanishing_order(&int(2), &int(0), Axis::Y), Order::Finite(3));
        assert_eq!(shifted(1, 0).vanishing_order(&int(1), &int(0), Axis::Y), Order::Finite(9));
        assert_eq!(shifted(-1, 0).vanishing_order(&int(-1), &int(0), Axis::Y), Order::Finite(9));
        assert_eq!(shifted(0, 0).vanishing_order(&int(0), &int(0), Axis::Y), Order::Finite(5));
        assert_eq!(shifted(0, -1).vanishing_order(&int(0), &int(-1), Axis::Y), Order::Finite(3));
        assert_eq!(
            BivariatePolynomial::x().vanishing_order(&int(0), &int(5), Axis::Y),
            Order::Infinite
        );
    }

    #[test]
    fn taylor_shift_matches_expansion() {
        // (t+2)^2 = t^2 + 4t + 4
        let c = taylor_shift(&[int(0), int(0), int(1)], &int(2));
        assert_eq!(c, vec![int(4), int(4), int(1)]);
    }

    #[test]
    fn float_paths_agree_with_exact() {
        let p = FactoredPolynomial::stratification_example().expand();
        let q = p.antiderivative_y();
        let fp = q.to_float();
        let de = q.dyadic_evaluator();
        for &(x, y) in &[(0.3, -0.7), (1.25, 0.5), (-2.0, 3.5), (1e-3, 2.0), (0.1, 0.1)] {
            let exact = q.eval_at_f64(x, y);
            assert_eq!(de.eval(x, y), exact);
            let e = rational_to_f64(&exact);
            assert!((fp.eval(x, y) - e).abs() <= 1e-14 * e.abs().max(1e-300) + 1e-300, "{x} {y}");
        }
        assert_eq!(de.eval(0.0, 0.0), int(0));
        assert_eq!(
            BivariatePolynomial::from_integer_terms(&[(0, 0, 3), (1, 1, 2)])
                .dyadic_evaluator()
                .eval(1024.0, -0.25),
            int(3 - 512)
        );
    }

    #[test]
    fn display_is_readable() {
        let p = BivariatePolynomial::from_integer_terms(&[(2, 0, 1), (0, 1, -6), (0, 0, 8)]);
        assert_eq!(p.to_string(), "x^2 - 6*y + 8");
    }
}
