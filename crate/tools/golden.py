"""Generate crates/core/tests/data/golden_specfun.csv with mpmath.

Every value is computed at 50 significant digits from mpmath's besseli and
besselk. Columns: d, function, argument, expected, tolerance. For tau/psi
families the argument is "lambda:z". Bessel rows use order d/2 - 1.
"""

import csv
import pathlib

import mpmath as mp

mp.mp.dps = 50
TOL = "1e-10"


def radial(d, z):
    n = mp.mpf(d) / 2 - 1
    z = mp.mpf(z)
    p = z ** (-n)
    return {
        "l": p * mp.besseli(n, z),
        "lp": p * mp.besseli(n + 1, z),
        "k": p * mp.besselk(n, z),
        "kp": -p * mp.besselk(n + 1, z),
    }


def rows():
    out = []
    for d in ["3", "3.5", "4", "5", "6", "7", "8"]:
        n = mp.mpf(d) / 2 - 1
        for z in ["1e-4", "0.01", "0.5", "1", "1.99", "2.5", "10", "29", "31", "100", "500"]:
            out.append((d, "I", z, mp.besseli(n, mp.mpf(z))))
            out.append((d, "K", z, mp.besselk(n, mp.mpf(z))))
    for d in ["2.5", "3", "4", "5.5"]:
        for z in ["1e-4", "0.3", "1", "7", "60", "500"]:
            r = radial(d, z)
            for name in ["l", "lp", "k", "kp"]:
                out.append((d, name, z, r[name]))
            out.append((d, "A", z, r["l"] / r["k"]))
            out.append((d, "B", z, r["lp"] / r["kp"]))
    for d in ["2.5", "3", "4"]:
        for lam, z in [("0.5", "2"), ("1e-3", "1.5"), ("0.1", "1.000001"), ("3", "1.01"), ("20", "3"), ("0.7", "40")]:
            lam_m, z_m = mp.mpf(lam), mp.mpf(z)
            rl = radial(d, lam_m)
            rz = radial(d, lam_m * z_m)
            a = rl["l"] / rl["k"]
            b = rl["lp"] / rl["kp"]
            arg = f"{lam}:{z}"
            out.append((d, "tau", arg, rz["l"] - a * rz["k"]))
            out.append((d, "tau_prime", arg, lam_m * (rz["lp"] - a * rz["kp"])))
            out.append((d, "psi", arg, rz["l"] - b * rz["k"]))
            out.append((d, "psi_prime", arg, lam_m * (rz["lp"] - b * rz["kp"])))
    return out


def main():
    root = pathlib.Path(__file__).resolve().parents[1]
    path = root / "crates" / "core" / "tests" / "data" / "golden_specfun.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "function", "argument", "expected", "tolerance"])
        for d, name, arg, val in rows():
            w.writerow([d, name, arg, mp.nstr(val, 25, min_fixed=1, max_fixed=0), TOL])
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
