"""Moments, free cumulants, Hankel functionals of cumulants and their sign changes in r.

Arithmetic follows the input: ``Fraction``/int moments give exact cumulants,
``mpmath.mpf`` moments stay in the working precision, floats use compensated
sums.  Scans run in mpmath at ``SCAN_DPS`` digits because the order-14
determinant loses most of double precision to cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np
import sympy
from sympy.utilities.iterables import multiset_partitions

from .errors import ConfigError, DomainError

SCAN_DPS = 50
MAX_N = 40


@dataclass(frozen=True)
class MomentSequence:
    """m_1..m_N (m_0 = 1 implicitly)."""

    values: tuple
    source: str = "closed_form"

    @property
    def N(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CumulantSequence:
    values: tuple

    @property
    def N(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int):
        """1-based access: K[n] is K_n."""
        if not 1 <= n <= len(self.values):
            raise ConfigError(f"cumulant K_{n} not available (have {len(self.values)})")
        return self.values[n - 1]


@dataclass(frozen=True)
class HankelReport:
    functional: str
    value: float
    r: float
    condition: float | None = None


@dataclass(frozen=True)
class SignChangeBracket:
    functional: str
    interval: tuple
    refined_root: float
    tol: float


# ---------------------------------------------------------------------------
# moment / cumulant conversion


def _kind(values):
    if any(isinstance(v, mpmath.mpf) for v in values):
        return "mp"
    if all(isinstance(v, (int, Fraction)) for v in values):
        return "exact"
    return "float"


def _sum(terms, kind):
    if kind == "float":
        return math.fsum(terms)
    if kind == "mp":
        return mpmath.fsum(terms)
    return sum(terms, Fraction(0))


def _as_values(m) -> tuple:
    vals = m.values if isinstance(m, MomentSequence) else tuple(m)
    if not vals:
        raise ConfigError("need at least one moment")
    return vals


def free_cumulants(m) -> CumulantSequence:
    """Free cumulants from moments.

    With M(x) = sum_i m_i x^i the moment-cumulant relation reads
    m_n = sum_{s=1}^n K_s [x^(n-s)] M(x)^s, solved forward for K_n.
    """
    vals = _as_values(m)
    kind = _kind(vals)
    if kind == "float":
        vals = tuple(float(v) for v in vals)
    N = len(vals)
    one = Fraction(1) if kind == "exact" else (mpmath.mpf(1) if kind == "mp" else 1.0)
    zero = one * 0
    M = [one] + list(vals)
    # powers[s][j] = [x^j] M(x)^s for j <= N
    powers = [[one] + [zero] * N]
    K = []
    for n in range(1, N + 1):
        prev = powers[-1]
        nxt = [_sum([prev[i] * M[j - i] for i in range(j + 1)], kind) for j in range(N + 1)]
        powers.append(nxt)
        terms = [K[s - 1] * powers[s][n - s] for s in range(1, n)]
        K.append(vals[n - 1] - _sum(terms, kind) if terms else vals[n - 1])
    return CumulantSequence(tuple(K))


def moments_from_cumulants(K) -> MomentSequence:
    """Inverse map, same recursion read the other way."""
    ks = K.values if isinstance(K, CumulantSequence) else tuple(K)
    kind = _kind(ks)
    N = len(ks)
    one = Fraction(1) if kind == "exact" else (mpmath.mpf(1) if kind == "mp" else 1.0)
    m = []
    for n in range(1, N + 1):
        M = [one] + m + [one * 0] * (N - len(m))
        powers = [[one] + [one * 0] * N]
        for s in range(1, n + 1):
            prev = powers[-1]
            powers.append([_sum([prev[i] * M[j - i] for i in range(j + 1)], kind) for j in range(N + 1)])
        m.append(_sum([ks[s - 1] * powers[s][n - s] for s in range(1, n + 1)], kind))
    return MomentSequence(tuple(m), "derived")


# ---------------------------------------------------------------------------
# non-crossing partition oracle


@lru_cache(maxsize=None)
def noncrossing_partitions(n: int) -> tuple:
    """All non-crossing partitions of {0..n-1} as tuples of sorted blocks."""
    out = []
    for part in multiset_partitions(list(range(n))):
        owner = {}
        for k, block in enumerate(part):
            for x in block:
                owner[x] = k
        ok = True
        for a in range(n):
            for b in range(a + 1, n):
                if owner[a] == owner[b]:
                    continue
                for c in range(b + 1, n):
                    if owner[c] != owner[a]:
                        continue
                    if any(owner[d] == owner[b] for d in range(c + 1, n)):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            out.append(tuple(tuple(sorted(b)) for b in part))
    return tuple(out)


def _kreweras_sizes(blocks, n):
    """Cycle lengths of pi^-1 gamma (the Kreweras complement), gamma = (0 1 ... n-1)."""
    nxt = {}
    for b in blocks:
        for i, x in enumerate(b):
            nxt[x] = b[(i + 1) % len(b)]
    inv = {v: k for k, v in nxt.items()}
    perm = {x: inv[(x + 1) % n] for x in range(n)}
    seen, sizes = set(), []
    for x in range(n):
        if x in seen:
            continue
        L, y = 0, x
        while y not in seen:
            seen.add(y)
            y = perm[y]
            L += 1
        sizes.append(L)
    return sizes


def _catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


def nc_mobius(blocks, n: int) -> int:
    """Moebius function mu(pi, 1_n) on the non-crossing partition lattice."""
    out = 1
    for L in _kreweras_sizes(blocks, n):
        out *= (-1) ** (L - 1) * _catalan(L - 1)
    return out


def cumulants_by_partitions(m) -> CumulantSequence:
    """Oracle: K_n = sum over NC(n) of mu(pi, 1_n) prod_{B in pi} m_|B|."""
    vals = _as_values(m)
    kind = _kind(vals)
    K = []
    for n in range(1, len(vals) + 1):
        terms = []
        for blocks in noncrossing_partitions(n):
            prod = nc_mobius(blocks, n)
            for b in blocks:
                prod = prod * vals[len(b) - 1]
            terms.append(prod)
        K.append(_sum(terms, kind) if kind != "exact" else sum(terms, Fraction(0)))
    return CumulantSequence(tuple(K))


def moments_by_partitions(K) -> MomentSequence:
    ks = K.values if isinstance(K, CumulantSequence) else tuple(K)
    out = []
    for n in range(1, len(ks) + 1):
        tot = 0
        for blocks in noncrossing_partitions(n):
            prod = 1
            for b in blocks:
                prod = prod * ks[len(b) - 1]
            tot = tot + prod
        out.append(tot)
    return MomentSequence(tuple(out), "derived")


# ---------------------------------------------------------------------------
# closed-form moments


def mp_power_moment(rho, precision="double"):
    """Gamma(1+2 rho) / (Gamma(1+rho) Gamma(2+rho)), the rho-th moment of MP(1,1)."""
    if precision == "exact":
        rho = Fraction(rho)
        if rho.denominator != 1:
            raise ConfigError("exact moments need integer r*n")
        k = int(rho)
        return Fraction(_catalan(k))
    if precision == "double":
        # log-gamma in 30 digits, rounded once; a double lgamma loses ~1e-15 * log(value)
        return float(mp_power_moment(rho, 30))
    with mpmath.workdps(int(precision)):
        rho = mpmath.mpf(rho)
        return +mpmath.exp(mpmath.loggamma(1 + 2 * rho) - mpmath.loggamma(1 + rho) - mpmath.loggamma(2 + rho))


def moments_mp_power(r, N: int, symmetrized: bool = False, precision="double",
                     source: str = "closed_form") -> MomentSequence:
    """Moments of X^r, X ~ MP(1,1); symmetrized: odd entries 0, entry 2n = moment n above.

    ``precision``: 'double', 'exact' (needs r*n integral) or an mpmath digit count.
    ``source='quadrature'`` integrates x^(r n) against the density instead.
    """
    if not r > 0:
        raise DomainError("moments_mp_power needs r > 0")
    if not 1 <= N <= MAX_N:
        raise ConfigError(f"N must be in 1..{MAX_N}")
    if source == "quadrature":
        from .measures import DistributionSpec, FreePoisson, Power, moment

        spec = DistributionSpec(FreePoisson(1.0, 1.0), (Power(float(r)),))

        def mom(n):
            return moment(spec, n, method="quad")
    elif source == "closed_form":
        def mom(n):
            rr = Fraction(r) * n if precision == "exact" else r * n
            return mp_power_moment(rr, precision)
    else:
        raise ConfigError(f"unknown source {source!r}")
    zero = Fraction(0) if precision == "exact" else (0.0 if precision == "double" else mpmath.mpf(0))
    vals = []
    for k in range(1, N + 1):
        if symmetrized:
            vals.append(mom(k // 2) if k % 2 == 0 else zero)
        else:
            vals.append(mom(k))
    return MomentSequence(tuple(vals), source)


def is_moment_sequence(m, floor: float = 1e-9) -> bool:
    """Hankel matrix (m_{i+j}) is PSD up to an eigenvalue floor of -floor * trace."""
    vals = [1.0] + [float(v) for v in _as_values(m)]
    k = (len(vals) - 1) // 2
    H = np.array([[vals[i + j] for j in range(k + 1)] for i in range(k + 1)])
    ev = np.linalg.eigvalsh(H)
    return bool(ev.min() >= -floor * np.trace(H))


# ---------------------------------------------------------------------------
# Hankel functionals


FUNCTIONALS = ("h22", "k6", "sym_h", "sym_det4")


def _parse_id(fid: str):
    if fid in FUNCTIONALS:
        return fid, None
    if fid.startswith("minor(") and fid.endswith(")"):
        try:
            k = int(fid[6:-1])
        except ValueError:
            raise ConfigError(f"bad functional id {fid!r}") from None
        if k < 0:
            raise ConfigError("minor order must be >= 0")
        return "minor", k
    raise ConfigError(f"unknown functional {fid!r}; use one of {FUNCTIONALS} or minor(k)")


def required_order(fid: str) -> int:
    name, k = _parse_id(fid)
    return {"h22": 4, "k6": 6, "sym_h": 6, "sym_det4": 14}.get(name, 2 * (k or 0) + 2)


def default_symmetrized(fid: str) -> bool:
    return fid.startswith("sym_")


def _det(rows):
    kind = _kind([v for row in rows for v in row])
    if kind == "exact":
        return Fraction(str(sympy.Matrix(rows).applyfunc(sympy.Rational).det()))
    if kind == "mp":
        return mpmath.det(mpmath.matrix(rows))
    return float(np.linalg.det(np.array(rows, dtype=float)))


def hankel_matrix(K: CumulantSequence, fid: str):
    name, k = _parse_id(fid)
    if name == "sym_det4":
        return [[K[2 * i + 2 * j - 2] for j in range(1, 5)] for i in range(1, 5)]
    if name == "minor":
        return [[K[i + j + 2] for j in range(k + 1)] for i in range(k + 1)]
    raise ConfigError(f"{fid} is not a determinant functional")


def hankel_functional(K: CumulantSequence, fid: str):
    name, k = _parse_id(fid)
    need = required_order(fid)
    if K.N < need:
        raise ConfigError(f"{fid} needs cumulants up to order {need}, got {K.N}")
    if name == "h22":
        return K[4] * K[2] - K[3] ** 2
    if name == "k6":
        return K[6]
    if name == "sym_h":
        return K[2] * K[6] - K[4] ** 2
    return _det(hankel_matrix(K, fid))


def condition_number(K: CumulantSequence, fid: str) -> float | None:
    name, _ = _parse_id(fid)
    if name not in ("sym_det4", "minor"):
        return None
    H = np.array([[float(v) for v in row] for row in hankel_matrix(K, fid)])
    return float(np.linalg.cond(H))


def functional_at(fid: str, r, symmetrized: bool | None = None, dps: int = SCAN_DPS):
    """Evaluate a functional at r through moments -> cumulants -> functional."""
    if symmetrized is None:
        symmetrized = default_symmetrized(fid)
    N = required_order(fid)
    with mpmath.workdps(dps):
        m = moments_mp_power(mpmath.mpf(r), N, symmetrized, precision=dps)
        K = free_cumulants(m)
        return hankel_functional(K, fid)


def hankel_report(fid: str, r: float, symmetrized: bool | None = None, dps: int = SCAN_DPS) -> HankelReport:
    if symmetrized is None:
        symmetrized = default_symmetrized(fid)
    with mpmath.workdps(dps):
        m = moments_mp_power(mpmath.mpf(r), required_order(fid), symmetrized, precision=dps)
        K = free_cumulants(m)
        v = hankel_functional(K, fid)
        cond = condition_number(K, fid)
    return HankelReport(fid, float(v), float(r), cond)


def _sign(v) -> int:
    return 0 if v == 0 else (1 if v > 0 else -1)


def scan_values(fid: str, r_lo: float, r_hi: float, step: float = 0.005,
                symmetrized: bool | None = None, dps: int = SCAN_DPS, workers: int | None = 1):
    """Grid of (r, value); the grid includes both ends."""
    n = int(math.floor((r_hi - r_lo) / step + 1e-9))
    rs = [round(r_lo + i * step, 12) for i in range(n + 1)]
    if rs[-1] < r_hi - 1e-12:
        rs.append(r_hi)
    args = [(fid, r, symmetrized, dps) for r in rs]
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(_eval_float, args))
    else:
        vals = [_eval_float(a) for a in args]
    return rs, vals


def _eval_float(args):
    fid, r, sym, dps = args
    with mpmath.workdps(dps):
        v = functional_at(fid, r, sym, dps)
        return float(v)


def scan_sign(fid: str, r_lo: float, r_hi: float, step: float = 0.005, symmetrized: bool | None = None,
              width: float = 1e-6, dps: int = SCAN_DPS, workers: int | None = 1) -> list[SignChangeBracket]:
    if not 0 < r_lo < r_hi:
        raise ConfigError("need 0 < r_lo < r_hi")
    if not 0 < step <= 0.01:
        raise ConfigError("step must be in (0, 0.01]")
    _parse_id(fid)
    rs, vals = scan_values(fid, r_lo, r_hi, step, symmetrized, dps, workers)
    out = []
    for i in range(len(rs) - 1):
        s0, s1 = _sign(vals[i]), _sign(vals[i + 1])
        if s0 == 0 and i > 0:
            continue  # root exactly on a grid point, reported with the previous interval
        if s0 * s1 < 0 or (s1 == 0 and s0 != 0):
            lo, hi = rs[i], rs[i + 1]
            if s1 == 0:
                out.append(SignChangeBracket(fid, (lo, hi), hi, 0.0))
                continue
            flo = s0
            while hi - lo > width:
                mid = 0.5 * (lo + hi)
                sm = _sign(functional_at(fid, mid, symmetrized, dps))
                if sm == 0:
                    lo = hi = mid
                    break
                if sm == flo:
                    lo = mid
                else:
                    hi = mid
            out.append(SignChangeBracket(fid, (rs[i], rs[i + 1]), 0.5 * (lo + hi), 0.5 * (hi - lo)))
    return out


def negative_intervals(rs: Sequence[float], vals: Sequence[float]):
    """Maximal runs of grid points where the value is negative, as (first r, last r)."""
    runs, start = [], None
    for r, v in zip(rs, vals):
        if v < 0 and start is None:
            start = r
        if not v < 0 and start is not None:
            runs.append((start, prev))
            start = None
        prev = r
    if start is not None:
        runs.append((start, prev))
    return runs
