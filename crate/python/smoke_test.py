"""Smoke test for the gek extension module."""

import math

import gek


def close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    spec = gek.EnsembleSpec(2, 8, 0.5)
    assert (spec.beta, spec.n, spec.tau) == (2, 8, 0.5)

    # The kernel is symmetric and real on conjugated arguments.
    z1, z2 = complex(0.3, 0.4), complex(-0.5, 0.2)
    k12, k21 = gek.kernel(spec, z1, z2), gek.kernel(spec, z2, z1)
    kc = gek.kernel(spec, z1.conjugate(), z2.conjugate())
    assert abs(k12 - k21) <= 1e-14 and abs(k12 - kc.conjugate()) <= 1e-14
    assert gek.density(spec, 0.1 + 0.2j) > 0.0

    b4 = gek.EnsembleSpec(4, 8, 0.5)
    assert gek.density(b4, 0.7 + 0.0j) == 0.0

    b1 = gek.EnsembleSpec(1, 6, 0.5)
    assert close(gek.density(b1, 0.3, real=True), -gek.g_real_b1(b1, 0.3, 0.3).real, 1e-14)

    # Airy identity: K_H(x, x) = Ai'(x)^2 - x Ai(x)^2 at x = 0.
    ai0 = 1.0 / (3 ** (2 / 3) * math.gamma(2 / 3))
    aip0 = -1.0 / (3 ** (1 / 3) * math.gamma(1 / 3))
    assert close(gek.airy_ai(0j).real, ai0, 1e-14)
    assert close(gek.hermitian_airy_kernel(0.0, 0.0), aip0**2, 1e-10)

    d = gek.density_ai(2, -1.0 + 0.0j, 1.0)
    assert d > 0.0
    assert gek.density_ai(4, -1.0 + 0.0j, 1.0) == 0.0

    # Pf^2 = det on a 4x4 antisymmetric matrix.
    a, b, c, d_, e, f = 1.0, 2.0, 3.0, 4.0, 5.0, 6.0
    m = [[0, a, b, c], [-a, 0, d_, e], [-b, -d_, 0, f], [-c, -e, -f, 0]]
    pf = gek.pfaffian([[complex(v) for v in row] for row in m])
    assert close(pf.real, a * f - b * e + c * d_, 1e-14)

    eigs = gek.sample_eigenvalues(gek.EnsembleSpec.weak(2, 20, 1.0), 3, seed=5)
    assert len(eigs) == 3 and all(len(t) == 20 for t in eigs)
    assert eigs == gek.sample_eigenvalues(gek.EnsembleSpec.weak(2, 20, 1.0), 3, seed=5)

    try:
        gek.EnsembleSpec(3, 4, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("beta = 3 accepted")

    print("gek", gek.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
