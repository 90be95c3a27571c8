#!/usr/bin/env python3
"""Smoke test for the cmtk Python extension.

Builds nothing itself: run `cargo build -p cm-python` (or --release) first.
The script locates the compiled cdylib, exposes it as an importable module,
and exercises the main entry points against known values.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path


def locate_cdylib() -> Path:
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libcmtk.so",
        root / "target" / "debug" / "libcmtk.so",
        root / "target" / "release" / "libcmtk.dylib",
        root / "target" / "debug" / "libcmtk.dylib",
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit(
            "cmtk cdylib not found; run `cargo build -p cm-python` first "
            f"(searched {', '.join(str(c) for c in candidates)})"
        )
    return max(built, key=lambda p: p.stat().st_mtime)


def import_cmtk():
    lib = locate_cdylib()
    staging = Path(tempfile.mkdtemp(prefix="cmtk_smoke_"))
    suffix = ".so" if lib.suffix == ".so" else ".so"  # CPython loads .so on mac too
    shutil.copy2(lib, staging / f"cmtk{suffix}")
    sys.path.insert(0, str(staging))
    import cmtk  # noqa: E402

    return cmtk


def approx(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    cmtk = import_cmtk()

    # Special functions.
    approx(cmtk.polygamma(1, 1.0), math.pi**2 / 6, 1e-12)
    approx(cmtk.polygamma(0, 1.0), -0.5772156649015329, 1e-13)
    approx(cmtk.exp_integral_e1(1.0), 0.21938393439552029, 1e-12)
    approx(cmtk.bessel_i1(2.0), 1.590636854637329, 1e-12)
    approx(cmtk.lgamma(5.0), math.log(24.0), 1e-13)

    # Expressions and jets: (-1)^k f^(k) > 0 for e^{-x}.
    f = cmtk.Expr("exp(-x)")
    derivs = f.derivatives(1.0, 4)
    for k, d in enumerate(derivs):
        expected = (-1) ** k * math.exp(-1.0)
        approx(d, expected, 1e-14)
    approx(f.eval(2.0), math.exp(-2.0), 1e-15)
    z = f.eval_complex(complex(0.0, -1.0))
    approx(z.real, math.cos(1.0), 1e-14)
    approx(z.imag, math.sin(1.0), 1e-14)

    # CM verdicts.
    report = json.loads(cmtk.cm_check("exp(-x)", order=8))
    assert report["verdict"] == "consistent", report
    report = json.loads(cmtk.cm_check("exp(-x^2)", order=4))
    assert report["verdict"] == "refuted", report
    assert report["witnesses"], "refutation must carry witnesses"

    # Measures and transforms.
    mu = cmtk.Measure.dirac(1.0)
    approx(mu.transform(2.0), math.exp(-2.0), 1e-12)
    conv = mu.convolve(cmtk.Measure.dirac(2.0))
    approx(conv.transform(1.0), math.exp(-3.0), 1e-12)
    m = cmtk.Measure.from_json(
        '{"atoms": [], "density": "exp(-t)", "support_hint": null}'
    )
    approx(m.transform(1.0), 0.5, 1e-8)  # L(e^{-t})(1) = 1/(1+1)

    # Catalog pair verification.
    pair = json.loads(cmtk.catalog_pair("milsam4", {}))
    for row in pair["checks"]:
        approx(row["transform"], row["function"], 1e-6)

    # Gil-Pelaez inversion: Dirac at 1 from f = e^{-x}.
    est = json.loads(cmtk.invert("exp(-x)", [0.5, 1.5]))
    approx(est["points"][0]["f_estimate"], 0.0, 2e-3)
    approx(est["points"][1]["f_estimate"], 1.0, 2e-3)

    # Krull series: g''(1) = pi^2/6 for f = log.
    approx(cmtk.krull_gderiv("log(x)", 2, 1.0), math.pi**2 / 6, 1e-9)

    # Gamma examples.
    approx(cmtk.w_value(1.0), 2.0 - math.pi**2 / 6, 1e-12)
    approx(cmtk.small_t_coefficient(0.5 + 1.0 / math.sqrt(12.0)), 0.0, 1e-14)
    exa = json.loads(cmtk.example("exa200", 0.5, [1.0]))
    lo, hi = exa["threshold"]["numeric_bracket"]
    assert lo <= 0.5 <= hi, exa["threshold"]

    # Majorization.
    assert cmtk.majorization_leq([1.0, 1.0, 1.0], [2.0, 1.0, 0.0])
    assert not cmtk.majorization_leq([3.0, 0.0], [2.0, 1.0])

    print("cmtk smoke test: all checks passed")


if __name__ == "__main__":
    main()
