"""Smoke test for the semiriem extension module.

Build and install first:  pip install --no-build-isolation ./crates/python
Then run:                 python python/smoke_test.py
"""

import math

import semiriem as sr


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def test_minkowski_dot_and_classify():
    close(sr.minkowski_dot(1, [2.0, 1.0], [2.0, 1.0]), -3.0, 1e-15)
    assert sr.classify([1.0, 1.0], 1, 1) == "null"
    assert sr.classify([2.0, 1.0], 1, 1) == "timelike"
    assert sr.classify([1.0, 2.0], 1, 1) == "spacelike"


def test_orthonormal_basis_and_plus_map():
    p, q = 2, 3
    basis, signs = sr.find_on_basis(p, q, 5)
    assert len(basis) == p + q and sorted(signs) == [-1.0] * p + [1.0] * q
    for i, u in enumerate(basis):
        for j, v in enumerate(basis):
            want = signs[i] if i == j else 0.0
            close(sr.minkowski_dot(p, u, v), want, 1e-10)
    x = [0.3, -1.2, 0.7, 2.0, -0.1]
    y = sr.plus_map(x, basis, signs, p, q)
    want = sum(sr.minkowski_dot(p, x, e) ** 2 for e in basis)
    close(sr.induced_inner(x, x, basis, signs, p, q), want, 1e-9 * want)
    close(sr.minkowski_dot(p, x, y), want, 1e-9 * want)
    std = [[float(i == j) for j in range(p + q)] for i in range(p + q)]
    close(sr.induced_inner(x, x, std, [-1.0] * p + [1.0] * q, p, q), sum(t * t for t in x), 1e-12)


def test_congruence_factor():
    h = [[2.0, 1.0, 0.0], [1.0, -3.0, 0.5], [0.0, 0.5, 1.0]]
    u, (neg, pos) = sr.congruence_factor(h)
    assert (neg, pos) == (1, 2)
    n = len(h)
    uthu = [[sum(u[k][i] * h[k][l] * u[l][j] for k in range(n) for l in range(n)) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            want = (-1.0 if i < neg else 1.0) if i == j else 0.0
            close(uthu[i][j], want, 1e-10)


def test_expm():
    r = sr.expm([[0.0, -math.pi / 2], [math.pi / 2, 0.0]])
    close(r[0][0], 0.0, 1e-14)
    close(r[1][0], 1.0, 1e-14)


def test_pseudosphere_distance():
    p, q = 3, 12
    m = sr.Manifold.pseudosphere(p, q)
    assert m.intrinsic_dim == p + q - 1
    xi = [0.1 * (i + 1) * (-1) ** i for i in range(p + q)]
    ref = sr.pseudosphere_distance_reference(p, q, xi)
    cost = sr.Cost.squared_distance(xi)
    x0 = m.random_point(3)
    assert m.constraint_residual(x0) < 1e-12
    res = sr.optimize(m, cost, x0, method="cg", grad_tol=1e-7, reference=ref)
    assert res.converged, res
    assert res.values == sorted(res.values, reverse=True)
    assert res.err_sq[-1] < 1e-12
    assert len(res.stationarities) == res.iterations + 1


def test_sphere_rayleigh():
    n = 6
    a = [[float(min(i, j) + 1) for j in range(n)] for i in range(n)]
    ref = sr.rayleigh_reference(a)
    m = sr.Manifold.sphere(2, 4)
    res = sr.optimize(m, sr.Cost.neg_rayleigh(a), m.random_point(0), method="sd", grad_tol=1e-7, reference=ref["vector"], antipodal=True)
    assert res.converged, res
    close(-res.f, ref["value"], 1e-9 * ref["value"])


def test_gradient_check_and_errors():
    m = sr.Manifold.pseudosphere(1, 3)
    cost = sr.Cost.quadratic([[1.0, 0.2, 0.0, 0.0], [0.2, 2.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.3], [0.0, 0.0, 0.3, 0.5]], [0.1, 0.0, -0.2, 0.3])
    assert sr.fd_gradient_check(m, cost, m.random_point(1)) < 1e-5
    try:
        sr.optimize(m, cost, m.random_point(1), method="bogus")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown method accepted")
    try:
        sr.Manifold.sphere(1, 0).tangent_project([1.0, 0.0], [0.0, 1.0])
    except (sr.SemiriemError, ValueError):
        pass


def main():
    tests = [(name, fn) for name, fn in globals().items() if name.startswith("test_")]
    for name, fn in tests:
        fn()
        print(f"ok {name}")
    print(f"{len(tests)} passed")


if __name__ == "__main__":
    main()
