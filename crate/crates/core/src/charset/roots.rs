//! Real roots of univariate rational polynomials (Sturm isolation + bisection).

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::polyalg::{rational_to_f64, Rational};

/// Ascending coefficients, no trailing zeros.
pub type UPoly = Vec<Rational>;

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub approx: f64,
    pub exact: Option<Rational>,
}

pub fn trim(mut p: UPoly) -> UPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

pub fn eval(p: &[Rational], x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub fn sub(a: &[Rational], b: &[Rational]) -> UPoly {
    let n = a.len().max(b.len());
    let z = Rational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

pub fn add(a: &[Rational], b: &[Rational]) -> UPoly {
    let n = a.len().max(b.len());
    let z = Rational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
}

pub fn mul(a: &[Rational], b: &[Rational]) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

pub fn scale(a: &[Rational], c: &Rational) -> UPoly {
    trim(a.iter().map(|x| x * c).collect())
}

fn derivative(p: &[Rational]) -> UPoly {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
            .collect(),
    )
}

fn divrem(a: &[Rational], b: &[Rational]) -> (UPoly, UPoly) {
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap() / &lead;
        for (i, c) in b.iter().enumerate() {
            let t = c * &f;
            r[i + shift] -= t;
        }
        q[shift] = f;
        r.pop();
        r = trim(r);
    }
    (trim(q), r)
}

fn normalize_positive(p: UPoly) -> UPoly {
    match p.last() {
        Some(l) => {
            let s = l.abs();
            p.iter().map(|c| c / &s).collect()
        }
        None => p,
    }
}

fn gcd(a: &[Rational], b: &[Rational]) -> UPoly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let (_, r) = divrem(&x, &y);
        x = y;
        y = normalize_positive(r);
    }
    normalize_positive(x)
}

fn sturm_sequence(p: &[Rational]) -> Vec<UPoly> {
    let mut seq = vec![p.to_vec(), normalize_positive(derivative(p))];
    loop {
        let n = seq.len();
        if seq[n - 1].is_empty() {
            seq.pop();
            break;
        }
        let (_, r) = divrem(&seq[n - 2], &seq[n - 1]);
        let r = normalize_positive(r.iter().map(|c| -c.clone()).collect());
        if r.is_empty() {
            break;
        }
        seq.push(r);
    }
    seq
}

fn sign_changes(seq: &[UPoly], x: &Rational) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for p in seq {
        let v = eval(p, x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Best rational approximations of `x` with denominators up to `max_den`.
pub fn convergents(x: &Rational, max_den: &BigInt) -> Vec<Rational> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rem = x.clone();
    for _ in 0..64 {
        let a = rem.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if &k2 > max_den {
            break;
        }
        out.push(Rational::new(h2.clone(), k2.clone()));
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = &rem - Rational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rem = frac.recip();
    }
    out
}

/// A rational with small denominator strictly inside `(a, b)`.
pub fn simple_rational_between(a: &Rational, b: &Rational) -> Rational {
    let mid = (a + b) / Rational::from_integer(BigInt::from(2));
    let third = (b - a) / Rational::from_integer(BigInt::from(3));
    let lo = a + &third;
    let hi = b - &third;
    for c in convergents(&mid, &BigInt::from(1_000_000_000u64)) {
        if c >= lo && c <= hi {
            return c;
        }
    }
    mid
}

/// Distinct real roots of `p` in the closed interval `[lo, hi]`, ascending.
pub fn real_roots_in(p: &[Rational], lo: &Rational, hi: &Rational) -> Vec<Root> {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return Vec::new();
    }
    let g = gcd(&p, &derivative(&p));
    let s = if g.len() > 1 { divrem(&p, &g).0 } else { p };
    let seq = sturm_sequence(&s);
    let mut roots = Vec::new();
    let tiny = (hi - lo) * Rational::new(BigInt::one(), BigInt::one() << 64);
    let mut a = lo.clone();
    let mut b = hi.clone();
    if eval(&s, lo).is_zero() {
        roots.push(exact_root(lo.clone()));
        a = lo + &tiny;
    }
    if eval(&s, hi).is_zero() && hi != lo {
        roots.push(exact_root(hi.clone()));
        b = hi - &tiny;
    }
    let mut stack = vec![(a, b)];
    while let Some((a, b)) = stack.pop() {
        let n = sign_changes(&seq, &a) - sign_changes(&seq, &b);
        if n == 0 {
            continue;
        }
        if n == 1 {
            roots.push(refine(&s, a, b));
            continue;
        }
        let mid = simple_rational_between(&a, &b);
        if eval(&s, &mid).is_zero() {
            roots.push(exact_root(mid.clone()));
            let mut h = (&b - &a) / Rational::from_integer(BigInt::from(1024));
            loop {
                let l = &mid - &h;
                let r = &mid + &h;
                if sign_changes(&seq, &l) - sign_changes(&seq, &r) == 1 {
                    stack.push((a.clone(), l));
                    stack.push((r, b.clone()));
                    break;
                }
                h /= Rational::from_integer(BigInt::from(2));
            }
        } else {
            stack.push((a, mid.clone()));
            stack.push((mid, b));
        }
    }
    roots.sort_by(|x, y| x.approx.total_cmp(&y.approx));
    roots
}

fn exact_root(r: Rational) -> Root {
    Root { approx: rational_to_f64(&r), exact: Some(r) }
}

fn refine(s: &[Rational], mut a: Rational, mut b: Rational) -> Root {
    let mut sa = eval(s, &a).is_positive();
    let two = Rational::from_integer(BigInt::from(2));
    for _ in 0..200 {
        // try a simple rational first; it is exact for rational roots
        let c = simple_rational_between(&a, &b);
        let v = eval(s, &c);
        if v.is_zero() {
            return exact_root(c);
        }
        if v.is_positive() == sa {
            a = c;
            sa = v.is_positive();
        } else {
            b = c;
        }
        let width = rational_to_f64(&(&b - &a));
        let scale = rational_to_f64(&a).abs().max(1.0);
        if width < 1e-18 * scale {
            break;
        }
        if width.is_nan() {
            let mid = (&a + &b) / &two;
            return Root { approx: rational_to_f64(&mid), exact: None };
        }
    }
    let mid = (&a + &b) / &two;
    Root { approx: rational_to_f64(&mid), exact: None }
}

/// Square root of a rational when it is a perfect square.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::int;

    #[test]
    fn finds_rational_and_irrational_roots() {
        // (x-1)(x+1)(x^2-5)
        let p = mul(&mul(&[int(-1), int(1)], &[int(1), int(1)]), &[int(-5), int(0), int(1)]);
        let r = real_roots_in(&p, &int(-4), &int(4));
        assert_eq!(r.len(), 4);
        assert_eq!(r[1].exact, Some(int(-1)));
        assert_eq!(r[2].exact, Some(int(1)));
        assert!(r[0].exact.is_none() && (r[0].approx + 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn repeated_and_endpoint_roots() {
        // x^2 (x-2)^3
        let p = mul(&[int(0), int(0), int(1)], &mul(&[int(-2), int(1)], &mul(&[int(-2), int(1)], &[int(-2), int(1)])));
        let r = real_roots_in(&p, &int(0), &int(2));
        assert_eq!(r.iter().map(|x| x.exact.clone().unwrap()).collect::<Vec<_>>(), vec![int(0), int(2)]);
        assert!(real_roots_in(&[int(1), int(0), int(1)], &int(-9), &int(9)).is_empty());
    }

    #[test]
    fn sqrt_of_squares() {
        assert_eq!(rational_sqrt(&Rational::new(9.into(), 4.into())), Some(Rational::new(3.into(), 2.into())));
        assert_eq!(rational_sqrt(&int(2)), None);
    }
}
