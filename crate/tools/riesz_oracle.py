"""Generate crates/core/tests/data/golden_riesz.csv with mpmath.

Kernels of R_N, R_D and their y-derivatives, integrated over λ at 30 digits.
For d = 3 the radial functions are the elementary closed forms
l(z) = sqrt(2/π) sinh z / z and k(z) = sqrt(π/2) e^{-z} / z; other
dimensions use besseli/besselk. Columns: bc, shape, d, x, y, expected.
"""

import csv
import pathlib

import mpmath as mp

mp.mp.dps = 30


def radial(d, z):
    if d == 3:
        c, s = mp.cosh(z), mp.sinh(z)
        e = mp.exp(-z)
        return (
            mp.sqrt(2 / mp.pi) * s / z,
            mp.sqrt(2 / mp.pi) * (z * c - s) / z**2,
            mp.sqrt(mp.pi / 2) * e / z,
            -mp.sqrt(mp.pi / 2) * e * (z + 1) / z**2,
        )
    n = mp.mpf(d) / 2 - 1
    p = z ** (-n)
    return (
        p * mp.besseli(n, z),
        p * mp.besseli(n + 1, z),
        p * mp.besselk(n, z),
        -p * mp.besselk(n + 1, z),
    )


def phi(bc, d, lam, a, slope):
    l1, lp1, k1, kp1 = radial(d, lam)
    la, lpa, ka, kpa = radial(d, lam * a)
    r = l1 / k1 if bc == "D" else lp1 / kp1
    return lam * (lpa - r * kpa) if slope else la - r * ka


def kernel(bc, shape, d, x, y):
    x, y = mp.mpf(x), mp.mpf(y)
    a, b = min(x, y), max(x, y)
    if shape == "kernel" and x < y:
        f = lambda t: t ** (d - 2) * phi(bc, d, t, a, True) * radial(d, t * b)[2]
    elif shape == "kernel":
        f = lambda t: t ** (d - 1) * phi(bc, d, t, a, False) * radial(d, t * b)[3]
    else:
        f = lambda t: t ** (d - 1) * phi(bc, d, t, a, True) * radial(d, t * b)[3]
    top = 1 / a + 80 / abs(x - y)
    pts = [mp.mpf(0), 1 / b, 1 / a, 1 / a + 4 / abs(x - y), 1 / a + 20 / abs(x - y), top]
    return 2 / mp.pi * mp.quad(f, pts)


CASES = [
    (3, "2", "3"), (3, "3", "2"), (3, "1.5", "10"), (3, "10", "1.5"), (3, "5", "5.2"),
    (3, "1", "4"), (3, "40", "2.5"), (4, "2", "3"), (4, "7", "1.2"), ("2.5", "2", "3"),
    ("2.5", "3", "12"), (5, "1.1", "1.6"),
]


def main():
    out = pathlib.Path(__file__).resolve().parents[1] / "crates/core/tests/data/golden_riesz.csv"
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bc", "shape", "d", "x", "y", "expected"])
        for d, x, y in CASES:
            dd = mp.mpf(d)
            for bc in ["N", "D"]:
                for shape in ["kernel", "dy"]:
                    v = kernel(bc, shape, dd if d != 3 else 3, x, y)
                    w.writerow([bc, shape, d, x, y, mp.nstr(v, 25)])


if __name__ == "__main__":
    main()
