"""Smoke test for the nlevp_contour extension module.

Build and install first:
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/nlevp_contour-*.whl
"""

import cmath
import json
import math

import nlevp_contour as nc


def nearest(values, z):
    return min(abs(v - z) for v in values)


def planted():
    want = [0.3 + 0.1j, -0.2 - 0.4j]
    p = nc.Problem.planted(8, 2, seed=3, eigenvalues=want)
    assert p.dim == 8
    for method in ["hankel", "loewner1", "loewnerN"]:
        sol = nc.solve(p, 0j, 1.0, n=128, method=method, k=2, ell=2, r=2, seed=1)
        assert len(sol) == 2, sol
        assert all(nearest(sol.eigenvalues, w) < 1e-8 for w in want), sol.eigenvalues
        assert sol.max_residual < 1e-8
    print("planted:", sol)


def delay():
    p = nc.Problem.delay()
    center, radius = nc.delay_contour()
    oracle = nc.delay_oracle(p)
    assert len(oracle) == 11
    sol = nc.solve(p, center, radius, n=64, method="hankel", ell=11, r=11, seed=7)
    assert len(sol) == 11
    assert all(nearest(oracle, l) < 1e-10 for l in sol.eigenvalues)
    print("delay:", sol)


def polynomial():
    # T(z) = z^2 I - diag(0.25, 4): eigenvalues ±0.5 inside the unit circle, ±2 outside.
    a0 = [[-0.25, 0], [0, -4]]
    a2 = [[1, 0], [0, 1]]
    p = nc.Problem.polynomial([a0, [[0, 0], [0, 0]], a2])
    sol = nc.solve(p, 0j, 1.0, n=64, method="hankel", k=2, ell=2, r=2)
    assert sorted(round(l.real, 10) for l in sol.eigenvalues) == [-0.5, 0.5]
    t = p.matrix(0.5)
    assert abs(t[0][0]) < 1e-15


def manifest():
    text = json.dumps({
        "problem": {"type": "planted", "n": 6, "m": 2,
                    "spectrum": {"type": "given", "values": [[0.1, 0.2], [-0.4, 0.0]]},
                    "dependency": {"type": "independent"},
                    "remainder": {"type": "polynomial", "degree": 1, "scale": 1.0},
                    "seed": 5},
        "contour": {"type": "circle", "center": [0.0, 0.0], "radius": 1.0},
        "n": 96,
        "probing": {"ell": 2, "r": 2, "seed": 2},
        "method": "hankel",
    })
    sol = nc.solve_config(text)
    assert nearest(sol.eigenvalues, 0.1 + 0.2j) < 1e-9
    assert nearest(sol.eigenvalues, -0.4) < 1e-9


def filters():
    n, k = 16, 3
    pts = [0.2 + 0.1j, 0.5j, 2.0]
    nodes = [cmath.exp(2j * math.pi * j / n) for j in range(n)]
    got = nc.filter_values(0j, 1.0, n, k, pts)
    # Trapezoid sum of (1/2πi)∮ s^k / (s − z) ds on the unit circle.
    for z, b in zip(pts, got):
        direct = sum(s * s**k / (s - z) for s in nodes) / n
        assert abs(b - direct) < 1e-12, (z, b, direct)
    sigma = 1.5 + 0.5j
    got = nc.filter_values(0j, 1.0, n, k, pts, sigma=sigma)
    for z, b in zip(pts, got):
        direct = sum(s / ((s - z) * (sigma - s) ** (k + 1)) for s in nodes) / n
        assert abs(b - direct) < 1e-12, (z, b, direct)


def modal():
    a = [[-0.5, 0], [0, -3]]
    rom = nc.modal_truncate(a, [[1], [1]], [[1, 1]], -0.5 + 0j, 1.0, n=128, points=3, directions=1)
    assert rom.rank == 1
    assert abs(rom.poles[0] + 0.5) < 1e-8
    z = 1.0 + 1.0j
    assert abs(rom.eval(z)[0][0] - 1 / (z + 0.5)) < 1e-8


def errors():
    try:
        nc.solve(nc.Problem.planted(4, 1), 0j, 1.0, method="bogus")
    except ValueError as e:
        assert "unknown method" in str(e)
    else:
        raise AssertionError("expected ValueError")


if __name__ == "__main__":
    for case in [planted, delay, polynomial, manifest, filters, modal, errors]:
        case()
        print(f"ok {case.__name__}")
    print("smoke test passed")
