"""Double-exponential quadrature rules.

Finite intervals use the tanh-sinh map, half-lines the exp-sinh map.  Both
cluster nodes doubly exponentially at the endpoints, so algebraic endpoint
singularities such as x**(a-1) or (b-x)**(c-1) need no special handling.

Nodes are stored together with their exact distances to the endpoints.  A
Cauchy kernel 1/(z - x) evaluated close to an endpoint is then formed from
(z - lo) - off_lo instead of z - x, which keeps full relative accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import NumericalError

FINITE_TMAX = 6.0
HALFLINE_TMAX = 6.7
DEFAULT_TOL = 1e-12
MAX_NODES = 200_000


@dataclass(frozen=True)
class Rule:
    """Quadrature nodes on [lo, hi] (hi may be +inf).

    ``off_lo`` and ``off_hi`` are x - lo and hi - x computed without
    cancellation; ``off_hi`` is +inf on a half-line.
    """

    lo: float
    hi: float
    x: np.ndarray
    off_lo: np.ndarray
    off_hi: np.ndarray
    w: np.ndarray

    @property
    def size(self) -> int:
        return int(self.x.size)

    def kernel_denominator(self, z: np.ndarray) -> np.ndarray:
        """Return z[:, None] - x[None, :] formed from the nearer endpoint."""
        z = np.asarray(z, dtype=complex).reshape(-1, 1)
        left = (z - self.lo) - self.off_lo[None, :]
        if math.isinf(self.hi):
            return left
        right = (z - self.hi) + self.off_hi[None, :]
        use_left = (self.off_lo <= self.off_hi)[None, :]
        return np.where(use_left, left, right)


def _tanh_sinh_unit(level: int):
    h = 2.0 ** (-level)
    k = np.arange(-int(math.ceil(FINITE_TMAX / h)), int(math.ceil(FINITE_TMAX / h)) + 1)
    t = k * h
    u = 0.5 * math.pi * np.sinh(t)
    e = np.exp(-2.0 * np.abs(u))
    # distance from the nearer endpoint of [-1, 1], and from the farther one
    near = 2.0 * e / (1.0 + e)
    far = 2.0 - near
    sech2 = 4.0 * e / (1.0 + e) ** 2
    w = h * 0.5 * math.pi * np.cosh(t) * sech2
    off_lo = np.where(t < 0, near, far)
    off_hi = np.where(t < 0, far, near)
    return off_lo, off_hi, w


@lru_cache(maxsize=256)
def finite_rule(lo: float, hi: float, level: int) -> Rule:
    if not hi > lo:
        raise ValueError("empty interval")
    d = 0.5 * (hi - lo)
    ol, oh, w = _tanh_sinh_unit(level)
    off_lo = d * ol
    off_hi = d * oh
    x = np.where(off_lo <= off_hi, lo + off_lo, hi - off_hi)
    keep = (off_lo > 0) & (off_hi > 0) & (x > lo) & (x < hi) & (w > 0)
    return Rule(lo, hi, x[keep], off_lo[keep], off_hi[keep], d * w[keep])


@lru_cache(maxsize=256)
def halfline_rule(lo: float, level: int) -> Rule:
    h = 2.0 ** (-level)
    n = int(math.ceil(HALFLINE_TMAX / h))
    t = np.arange(-n, n + 1) * h
    off = np.exp(0.5 * math.pi * np.sinh(t))
    w = h * 0.5 * math.pi * np.cosh(t) * off
    x = lo + off
    keep = (off > 0) & np.isfinite(w) & (x > lo)
    return Rule(lo, math.inf, x[keep], off[keep], np.full(int(keep.sum()), math.inf), w[keep])


def rule(lo: float, hi: float, level: int) -> Rule:
    if math.isinf(hi):
        return halfline_rule(float(lo), level)
    return finite_rule(float(lo), float(hi), level)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
    max_nodes: int = MAX_NODES,
    min_level: int = 3,
) -> tuple[float | complex, float]:
    """Integrate a vectorised ``f`` over [lo, hi]; returns (value, error estimate).

    The level is increased (step halved) until two successive levels agree to
    ``tol`` in absolute terms or relative to the result, whichever is looser.
    """
    prev = None
    level = min_level
    while True:
        r = rule(lo, hi, level)
        if r.size > max_nodes:
            raise NumericalError(
                f"quadrature on [{lo}, {hi}] did not reach tol {tol} within {max_nodes} nodes"
            )
        vals = np.asarray(f(r.x))
        val = np.sum(r.w * vals)
        if not np.isfinite(val):
            raise NumericalError(f"non-finite integrand on [{lo}, {hi}]")
        if prev is not None:
            err = abs(val - prev)
            if err <= max(tol, tol * abs(val)):
                return (val.item() if hasattr(val, "item") else val), float(err)
        prev = val
        level += 1


def integrate_algebraic_tail(
    f: Callable[[np.ndarray], np.ndarray],
    c: float,
    alpha: float,
    tol: float = DEFAULT_TOL,
    max_nodes: int = MAX_NODES,
    growth: float = 0.0,
) -> tuple[float, float]:
    """Integrate f over [c, inf) when f(x) decays like x**(-1 - alpha).

    ``growth`` bounds the power of any factor of f that grows (x**n in moments);
    it only lowers the overflow cap.

    With x = c * v**(-1/alpha) the integrand becomes f(x) x**(1+alpha) c**(-alpha) / alpha,
    bounded on (0, 1], so the tanh-sinh rule converges however small alpha is.
    Beyond log x = 600/(1+alpha+growth) (where f or the power would leave double range)
    the integrand is frozen at its value there; those nodes have v < exp(-600 alpha/(1+alpha)).
    """
    if not (c > 0 and alpha > 0):
        raise ValueError("need c > 0 and alpha > 0")
    lcap = 600.0 / (1.0 + alpha + growth)
    scale = c ** (-alpha) / alpha

    def g(v):
        lx = np.minimum(math.log(c) - np.log(v) / alpha, max(lcap, math.log(c)))
        x = np.exp(lx)
        return np.asarray(f(x), dtype=float) * np.exp((1.0 + alpha) * lx) * scale

    val, err = integrate(g, 0.0, 1.0, tol=tol, max_nodes=max_nodes)
    return float(np.real(val)), err
