"""Acceptance criteria 1-10.

Each check returns (ok, detail) and prints one PASS/FAIL line.  Runs under pytest
or directly with ``python tests/test_acceptance.py``.
"""
import math
import random
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from freelab.cauchy import BranchedDensity, boundary_density, g_inverse_closed, g_sheet
from freelab.contour import domain_scan, lemma_pdf0_probe, ui_check, ui_s_check
from freelab.cumulants import (
    cumulants_by_partitions,
    free_cumulants,
    hankel_functional,
    moments_mp_power,
    negative_intervals,
    scan_sign,
    scan_values,
)
from freelab.measures import (
    Beta,
    DistributionSpec,
    FreePoisson,
    Power,
    Semicircle,
    SubHCM,
    Symmetrize,
    density_array,
    support,
)
from freelab.quadrature import integrate


def _report(n, ok, detail, elapsed):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({elapsed:.1f} s)  {detail}"
    print(line, flush=True)
    return line


def _lower_points(rng, k):
    return [complex(rng.uniform(-3, 3), rng.uniform(-3, -0.05)) for _ in range(k)]


def criterion_1():
    rng = random.Random(1)
    worst = 0.0
    formula_err = 0.0
    cases = [
        (DistributionSpec(Semicircle(0.3, 1.7)), lambda w: 0.3 + 1.7 * w + 1 / w),
        (DistributionSpec(FreePoisson(2.5, 0.8)), lambda w: 1 / w + 2.5 * 0.8 / (1 - 0.8 * w)),
    ]
    for spec, formula in cases:
        for w in _lower_points(rng, 20):
            z = g_inverse_closed(spec, w)
            formula_err = max(formula_err, abs(z - formula(w)))
            # z may sit on either half-plane; the sheet evaluator continues G across the support
            worst = max(worst, abs(g_sheet(spec, z) - w))
    return worst < 1e-10 and formula_err < 1e-12, f"max |G(G^-1(w)) - w| = {worst:.2e}", 1.0


def criterion_2():
    mp11 = DistributionSpec(FreePoisson(1.0, 1.0))
    worst = 0.0
    for r in (0.5, 1.0, 2.0):
        closed = moments_mp_power(r, 6).values
        for n in range(1, 7):
            direct, _ = integrate(lambda x: x ** (r * n) * density_array(mp11, x), 0.0, 4.0)
            worst = max(worst, abs(direct - closed[n - 1]) / max(1.0, closed[n - 1]))
    exact = moments_mp_power(1, 6, precision="exact").values
    catalan = tuple(Fraction(math.comb(2 * n, n), n + 1) for n in range(1, 7))
    ok = worst < 1e-8 and exact == catalan and all(isinstance(v, Fraction) for v in exact)
    return ok, f"max rel deviation {worst:.2e}; exact r=1 gives {tuple(int(v) for v in exact)}", 10.0


def criterion_3():
    rng = random.Random(3)
    mismatches = 0
    for _ in range(100):
        n = rng.randint(1, 8)
        m = tuple(Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(n))
        if free_cumulants(m).values != cumulants_by_partitions(m).values:
            mismatches += 1
    return mismatches == 0, f"{mismatches} mismatches over 100 sequences", 60.0


def criterion_4():
    rs, vals = scan_values("h22", 0.2, 1.5, 0.005)
    runs = negative_intervals(rs, vals)
    brackets = scan_sign("h22", 0.2, 1.5, step=0.005)
    roots = [b.refined_root for b in brackets]
    exact_zero = hankel_functional(free_cumulants(moments_mp_power(1, 4, precision="exact")), "h22") == 0
    ok = (len(roots) == 2 and abs(roots[0] - 0.35) <= 0.02 and abs(roots[1] - 1.0) <= 1e-5
          and len(runs) == 1 and runs[0][1] >= 0.995 and exact_zero)
    return ok, f"negative on ({roots[0]:.6f}, {roots[-1]:.6f}); h22(1) == 0 exactly: {exact_zero}", 30.0


def criterion_5():
    rs, vals = scan_values("k6", 0.3, 0.5, 0.005)
    runs = negative_intervals(rs, vals)
    roots = [b.refined_root for b in scan_sign("k6", 0.3, 0.5, step=0.005)]
    ok = len(runs) == 1 and len(roots) == 2 and abs(roots[0] - 0.335) <= 0.02 and abs(roots[1] - 0.42) <= 0.02
    return ok, f"negative on ({roots[0]:.6f}, {roots[-1]:.6f})", 30.0


def criterion_6():
    out = []
    ok = True
    for fid, lo, hi, want, tol in (("sym_h", 0.9, 2.0, (1.0, 1.8), 0.05), ("sym_det4", 1.5, 2.0, (1.68, 1.94), 0.03)):
        rs, vals = scan_values(fid, lo, hi, 0.005)
        runs = negative_intervals(rs, vals)
        roots = [b.refined_root for b in scan_sign(fid, lo, hi, step=0.005)]
        good = (len(runs) == 1 and len(roots) == 2
                and abs(roots[0] - want[0]) <= tol and abs(roots[1] - want[1]) <= tol)
        ok &= good
        out.append(f"{fid} negative on ({roots[0]:.6f}, {roots[-1]:.6f})")
    return ok, "; ".join(out) + " at 50 digits", 60.0


UI_CASES = [
    ("lemma4", DistributionSpec(SubHCM(0.5, ((1.0, 1.0),)), (Power(2.0),))),
    ("lemma4", DistributionSpec(SubHCM(0.5, ((1.0, 1.0),)), (Power(-2.0),))),
    ("beta_power", DistributionSpec(Beta(0.5, 1.5), (Power(2.0),))),
    ("mp_a", DistributionSpec(FreePoisson(2.0, 1.0), (Power(2.0),))),
    ("mp_c", DistributionSpec(FreePoisson(2.0, 1.0), (Power(-2.0),))),
    ("mp_d", DistributionSpec(FreePoisson(2.0, 1.0), (Power(-0.5),))),
    ("mp_b", DistributionSpec(FreePoisson(0.25, 1.0), (Power(2.0),))),
]


def criterion_7():
    bad = []
    for case, spec in UI_CASES:
        rep = ui_check(spec, case, n_probes=200)
        fine = ui_check(spec, case, n_probes=200, eta=2 * rep.eta, delta=rep.delta / 2, auto=False)
        r = spec.transforms[0].r
        if not (rep.passed and set(rep.winding) == {1} and fine.winding == rep.winding
                and fine.passed == rep.passed):
            bad.append(f"{case}(r={r:g})")
    return not bad, f"{len(UI_CASES) - len(bad)}/{len(UI_CASES)} cases wind once and are stable" + (
        f"; failing {bad}" if bad else ""), 300.0


def criterion_8():
    parts = []
    ok = True
    for r in (2.0, 3.0):
        rep = ui_s_check(DistributionSpec(Beta(0.5, 1.5), (Power(r), Symmetrize())), n_probes=200)
        ok &= rep.status == "pass"
        parts.append(f"sym Beta(1/2,3/2)^{r:g}: {rep.status}")
    for label, spec in (
        ("sym Beta(3,2)", DistributionSpec(Beta(3.0, 2.0), (Power(1.0), Symmetrize()))),
        ("sym Beta(1/2,3/2)^(1/2)", DistributionSpec(Beta(0.5, 1.5), (Power(0.5), Symmetrize()))),
    ):
        res = lemma_pdf0_probe(spec)
        ok &= res["verdict"] == "not_fid_consistent"
        parts.append(f"{label}: {res['verdict']} (density at 0 = {res['density_at_0']:.4g})")
    return ok, "; ".join(parts), 180.0


def criterion_9():
    spec = DistributionSpec(FreePoisson(2.0, 1.0), (Power(2.0),))
    (a, b), = support(spec).intervals
    bd = BranchedDensity(spec)
    xs = np.concatenate([np.linspace(a / 51, a * 50 / 51, 25), b * np.geomspace(1.001, 100.0, 25)])
    worst = max(abs(boundary_density(bd, x, "minus").real) for x in xs)
    return worst < 1e-14, f"max |Re f(x - i0)| = {worst:.1e} over 50 points", None


DOMAINS = {
    "dom1": (0.5, 1.501, 1.5),
    "dom2": (0.5, 2.0, 1.5),
    "dom3": (1 / 3, 1.8, 4.0),
    "dom4": (1 / 3, 2.4, 4.0),
}


def criterion_10():
    ok = True
    parts = []
    for name, (p, q, r) in DOMAINS.items():
        t = time.perf_counter()
        grid = domain_scan(DistributionSpec(Beta(p, q), (Power(r), Symmetrize())), resolution=(400, 400))
        dt = time.perf_counter() - t
        s = grid.summary()
        ok &= dt < 120 and s["area_fraction"] > 0 and "min_re" in s
        parts.append(f"{name} area {s['area_fraction']:.4f} min Re {s['min_re']:.4g} in {dt:.1f} s")
    return ok, "; ".join(parts), None


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def run_criterion(n):
    t = time.perf_counter()
    ok, detail, limit = CRITERIA[n - 1]()
    elapsed = time.perf_counter() - t
    if limit is not None and elapsed >= limit:
        ok = False
        detail += f"; over the {limit:g} s budget"
    return ok, _report(n, ok, detail, elapsed)


@pytest.mark.slow
@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n, capsys):
    with capsys.disabled():
        ok, line = run_criterion(n)
    assert ok, line


if __name__ == "__main__":
    results = [run_criterion(n)[0] for n in range(1, 11)]
    sys.exit(0 if all(results) else 1)
