use hypocauchy::cauchy::{characteristic_distance, Grid};
use hypocauchy::quad::QuadratureSpec;
use hypocauchy::similarity::{factor_solution, fixed_point_solve, SimilarityOptions};
use hypocauchy::structures::{ComplexPolynomial, FirstIntegral, Point, Region};
use hypocauchy::Complex64;

#[test]
fn arc_round_trip() {
    let omega = Region::square(1.0);
    let z = FirstIntegral::arc_normal(3, omega).unwrap();
    let h = ComplexPolynomial::new(vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]);
    let a = |p: Point| Complex64::new(0.1, 0.05 * p.x);
    let b = |p: Point| Complex64::new(0.1 * p.y.cos(), 0.0);
    let grid = Grid::new((-0.8, 0.8), (-0.8, 0.8), 9, 9).unwrap();
    let spec = QuadratureSpec::default().with_tolerances(1e-5, 1e-12).with_magnitude_tol(1e-5);
    let c = Complex64::new(0.0, 0.5);
    let opts = SimilarityOptions { tol: 1e-4, fd_step: 1e-2, p: Some(4.0), ..Default::default() };
    let sol = fixed_point_solve(&z, &omega, &h, &a, &b, &[], &grid, &spec, c, &opts).unwrap();
    assert!(sol.converged);
    assert!(sol.contraction_ratios.iter().all(|r| *r < 0.9));
    assert!(sol.residual_max < 5e-2);
    assert!(sol.chi_max <= 1.0);
    // |u| ≥ min|H(Z)| e^{−‖s‖∞}
    assert!(sol.min_abs_u >= (2.0 - 2f64.sqrt()) * (-sol.s_sup).exp());

    let f = factor_solution(&z, &omega, &sol.u.values, &a, &b, &[], &grid, &spec, c, opts.band).unwrap();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, v) in f.v.iter().enumerate() {
        let p = grid.point(i);
        let hz = h.eval(z.eval_unchecked(p));
        scale = scale.max(hz.norm());
        if characteristic_distance(&z, p) > opts.band {
            worst = worst.max((v - hz).norm());
        }
    }
    assert!(worst / scale < 1e-2);
}
