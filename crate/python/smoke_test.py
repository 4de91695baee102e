"""Smoke test for the pyhypocauchy extension module."""

import cmath
import math

import pyhypocauchy as hc


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    square = hc.Region.square(1.0)
    z = hc.FirstIntegral.arc_normal(3, square)
    assert z.kind == "arc_normal" and z.exponent == 3
    assert close(z(0.5, 0.5), complex(0.5, 0.125), 1e-15)
    assert z.classify(0.3, 0.0) == ("characteristic", "3")
    assert z.classify(0.3, 0.2)[0] == "elliptic"

    assert hc.check_inequality_arc(1, 10_000, seed=3) <= 1e-12
    for k in (1, 3, 5):
        mu = hc.loj_estimate(z if k == 3 else hc.FirstIntegral.arc_normal(k, square), 0.0, 0.0)["mu_hat"]
        assert close(mu, k, 0.05), (k, mu)

    strata = hc.stratification_example()
    assert strata["isolated"] == [(0.0, -1.0, "3")]
    assert sorted(strata["singular"]) == [(-1.0, 0.0, "9"), (0.0, 0.0, "5"), (1.0, 0.0, "9")]

    disc = hc.Region.disc()
    norm, ok = hc.kernel_norm(hc.FirstIntegral.elliptic(disc), disc, 1.5, 0.0, 0.0, hc.Quadrature(rel_tol=1e-9))
    assert ok and close(norm, (2 * math.pi / 0.5) ** (1 / 1.5), 1e-6), norm

    c, residual = hc.calibrate(square, hc.Quadrature(rel_tol=1e-8, magnitude_tol=1e-10))
    assert close(c, 0.5j, 1e-6) and residual < 1e-2, (c, residual)

    out = hc.apply_operator(
        z, square, hc.Function.cos_sin(), ((-0.5, 0.5), (-0.5, 0.5), 3, 3),
        quadrature=hc.Quadrature(rel_tol=1e-6, magnitude_tol=1e-8),
    )
    assert out["converged"] and len(out["values"]) == 9
    assert all(cmath.isfinite(v) for v in out["values"])

    assert hc.chi(2j, 0.0) == -1.0 + 0j
    assert hc.chi(1e-20, 1e-10) == 0j

    print("pyhypocauchy smoke test passed")


if __name__ == "__main__":
    main()
