use hypocauchy::cauchy::{eval_kernel, holder_bound, kernel_lq_norm, lp_norm, tz_at, Grid};
use hypocauchy::loj::check_inequality_arc;
use hypocauchy::polyalg::{int, Axis, BivariatePolynomial, Order};
use hypocauchy::quad::{integrate, QuadratureSpec};
use hypocauchy::similarity::chi;
use hypocauchy::structures::{FirstIntegral, Point, Region};
use hypocauchy::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn small_poly() -> impl Strategy<Value = BivariatePolynomial> {
    prop::collection::vec((0u32..4, 0u32..4, -5i64..6), 1..6)
        .prop_map(|terms| BivariatePolynomial::from_integer_terms(&terms))
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b))
}

fn interior() -> impl Strategy<Value = Point> {
    (-0.7f64..0.7, -0.7f64..0.7).prop_map(|(x, y)| Point::new(x, y))
}

proptest! {
    #[test]
    fn product_evaluates_to_product(p in small_poly(), q in small_poly(), x in -6i64..7, y in -6i64..7) {
        let (x, y) = (int(x), int(y));
        prop_assert_eq!((&p * &q).eval(&x, &y), p.eval(&x, &y) * q.eval(&x, &y));
        prop_assert_eq!((&p + &q).eval(&x, &y), p.eval(&x, &y) + q.eval(&x, &y));
    }

    #[test]
    fn antiderivative_inverts_partial(p in small_poly()) {
        prop_assert_eq!(p.antiderivative_y().partial_y(), p);
    }

    #[test]
    fn vanishing_orders_add(p in small_poly(), q in small_poly(), x in -3i64..4, y in -3i64..4) {
        let (x, y) = (int(x), int(y));
        for axis in [Axis::X, Axis::Y] {
            let (a, b) = (p.vanishing_order(&x, &y, axis), q.vanishing_order(&x, &y, axis));
            let expected = match (a, b) {
                (Order::Finite(m), Order::Finite(n)) => Order::Finite(m + n),
                _ => Order::Infinite,
            };
            prop_assert_eq!((&p * &q).vanishing_order(&x, &y, axis), expected);
        }
    }

    #[test]
    fn kernel_is_antisymmetric(k in prop::sample::select(vec![1u32, 3, 5]), a in interior(), b in interior()) {
        prop_assume!(a != b);
        let z = FirstIntegral::arc_normal(k, Region::square(1.0)).unwrap();
        let (kab, kba) = (eval_kernel(&z, a, b), eval_kernel(&z, b, a));
        if let (Ok(kab), Ok(kba)) = (kab, kba) {
            prop_assert_eq!(kab, -kba);
        }
    }

    #[test]
    fn chi_never_exceeds_one(re in -1e6f64..1e6, im in -1e6f64..1e6, thr in 0.0f64..1.0) {
        let u = Complex64::new(re, im);
        let c = chi(u, thr);
        prop_assert!(c.norm() <= 1.0);
        if u.norm() > thr {
            prop_assert!((c * u - u.conj()).norm() <= 1e-12 * u.norm());
        } else {
            prop_assert_eq!(c, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn arc_inequality_holds_for_k_one(seed in any::<u64>()) {
        prop_assert!(check_inequality_arc(1, 2000, seed).unwrap() <= 1e-12);
    }

    #[test]
    fn bilinear_functions_interpolate_exactly(a in complex(), b in complex(), c in complex(), d in complex(), p in interior()) {
        let grid = Grid::new((-1.0, 1.0), (-1.0, 1.0), 5, 7).unwrap();
        let f = |q: Point| a + b * q.x + c * q.y + d * q.x * q.y;
        let values: Vec<Complex64> = grid.points().into_iter().map(f).collect();
        prop_assert!((grid.interpolate(&values, p) - f(p)).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn operator_is_linear(alpha in complex(), beta in complex(), p in interior()) {
        let z = FirstIntegral::elliptic(Region::square(1.0));
        let omega = Region::square(1.0);
        let spec = QuadratureSpec::default().with_tolerances(1e-9, 1e-12);
        let c = Complex64::new(0.0, 0.5);
        let f = |q: Point| Complex64::new(q.x * q.y, 1.0);
        let g = |q: Point| Complex64::new(q.x.cos(), q.y);
        let h = |q: Point| alpha * f(q) + beta * g(q);
        let tf = tz_at(&z, &omega, &f, &[], p, &spec, c).unwrap().value;
        let tg = tz_at(&z, &omega, &g, &[], p, &spec, c).unwrap().value;
        let th = tz_at(&z, &omega, &h, &[], p, &spec, c).unwrap().value;
        prop_assert!((th - (alpha * tf + beta * tg)).norm() < 1e-6 * (1.0 + th.norm()));
    }

    #[test]
    fn holder_bound_dominates(a in -1.0f64..1.0, b in -1.0f64..1.0, p in interior()) {
        let z = FirstIntegral::arc_normal(3, Region::square(1.0)).unwrap();
        let omega = Region::square(1.0);
        let spec = QuadratureSpec::default().with_tolerances(1e-6, 1e-10);
        let c = Complex64::new(0.0, 0.5);
        let f = |q: Point| Complex64::new(1.0 + a * q.x, b * q.y);
        let t = tz_at(&z, &omega, &f, &[], p, &spec, c).unwrap();
        let (fp, _) = lp_norm(&z, &omega, &f, &[], 3.0, &spec).unwrap();
        let kq = kernel_lq_norm(&z, &omega, 1.5, p, &spec).unwrap();
        prop_assert!(t.value.norm() <= holder_bound(kq, fp, c) * (1.0 + 1e-6));
    }

    #[test]
    fn error_estimates_are_honest(r in 0.2f64..2.0, x in -0.5f64..0.5, y in -0.5f64..0.5) {
        // ∫ over the disc of radius r of |ζ − c|^{-1} is 2πr
        let c = Point::new(x, y);
        let disc = Region::disc(c, r).unwrap();
        let exact = 2.0 * PI * r;
        let mut last = f64::INFINITY;
        for tol in [1e-3, 1e-6] {
            let spec = QuadratureSpec::default().with_tolerances(tol, 1e-14).with_singular_point(c);
            let res = integrate(|q: Point| Complex64::new(1.0 / q.dist(c), 0.0), &disc, &spec).unwrap();
            prop_assert!(res.converged);
            let err = (res.value.re - exact).abs();
            prop_assert!(err <= 10.0 * res.error_estimate.max(tol * exact));
            prop_assert!(err <= last.max(1e-12));
            last = err.max(1e-12);
        }
    }
}
