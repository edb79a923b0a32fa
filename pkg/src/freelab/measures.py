"""Distribution families and their power, symmetrization and scale-mixture transforms.

A :class:`DistributionSpec` is a base law plus an ordered transform list.  For
evaluation it is resolved into a *core* law (base law with one collapsed
power), an optional finite scale mixture and an optional symmetrization.
Every core has a closed-form density; the transforms act on it by the usual
pushforward formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import quadrature
from .errors import ConfigError, DivergentMomentError, DomainError

# ---------------------------------------------------------------------------
# base laws and transforms


@dataclass(frozen=True)
class Semicircle:
    m: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self):
        _finite(self.m, "m")
        _positive(self.sigma2, "sigma2")


@dataclass(frozen=True)
class FreePoisson:
    p: float = 1.0
    theta: float = 1.0

    def __post_init__(self):
        _positive(self.p, "p")
        _positive(self.theta, "theta")


@dataclass(frozen=True)
class Beta:
    p: float
    q: float

    def __post_init__(self):
        _positive(self.p, "p")
        _positive(self.q, "q")


@dataclass(frozen=True)
class BooleanStable:
    alpha: float

    def __post_init__(self):
        _finite(self.alpha, "alpha")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("BooleanStable needs 0 < alpha < 1")


@dataclass(frozen=True)
class SubHCM:
    """Density C x^(p-1) prod_k (t_k + x)^(-gamma_k) on (0, inf).

    ``norm`` is C; pass None to have it computed.
    """

    p: float
    sites: tuple
    norm: float | None = None

    def __post_init__(self):
        _positive(self.p, "p")
        sites = tuple((float(t), float(g)) for t, g in self.sites)
        if not sites:
            raise ConfigError("SubHCM needs at least one site")
        for t, g in sites:
            _positive(t, "site t_k")
            _positive(g, "site gamma_k")
        object.__setattr__(self, "sites", sites)
        if not self.p < self.total_gamma:
            raise ConfigError("SubHCM needs 0 < p < sum(gamma_k) for integrability")
        if self.norm is None:
            object.__setattr__(self, "norm", subhcm_normalize(self.p, sites))
        else:
            _positive(self.norm, "norm")

    @property
    def total_gamma(self) -> float:
        return math.fsum(g for _, g in self.sites)

    def inverse(self) -> "SubHCM":
        """Law of 1/X, which stays in the family."""
        p2 = -self.p + self.total_gamma
        c2 = self.norm * math.prod(t ** (-g) for t, g in self.sites)
        return SubHCM(p2, tuple((1.0 / t, g) for t, g in self.sites), c2)


@dataclass(frozen=True)
class Power:
    r: float

    def __post_init__(self):
        _finite(self.r, "r")
        if self.r == 0:
            raise ConfigError("Power(r) needs r != 0")


@dataclass(frozen=True)
class Symmetrize:
    pass


@dataclass(frozen=True)
class ScaleMixture:
    weights: tuple
    scales: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        s = tuple(float(v) for v in self.scales)
        if len(w) != len(s) or not w:
            raise ConfigError("ScaleMixture weights and scales must be non-empty and of equal length")
        for v in w:
            _positive(v, "mixture weight")
        for v in s:
            _positive(v, "mixture scale")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ConfigError("ScaleMixture weights must sum to 1 within 1e-12")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "scales", s)


Kind = Union[Semicircle, FreePoisson, Beta, BooleanStable, SubHCM]
Transform = Union[Power, Symmetrize, ScaleMixture]


@dataclass(frozen=True)
class DistributionSpec:
    kind: Kind
    transforms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.kind, (Semicircle, FreePoisson, Beta, BooleanStable, SubHCM)):
            raise ConfigError(f"unknown base law {self.kind!r}")
        ts = tuple(self.transforms)
        object.__setattr__(self, "transforms", ts)
        atom = _base_atom(self.kind)
        on_half_line = not isinstance(self.kind, Semicircle)
        for i, t in enumerate(ts):
            if not isinstance(t, (Power, Symmetrize, ScaleMixture)):
                raise ConfigError(f"unknown transform {t!r}")
            if isinstance(t, Symmetrize):
                if i != len(ts) - 1:
                    raise ConfigError("Symmetrize must be the last transform")
                if not on_half_line:
                    raise ConfigError("Symmetrize needs a law supported in [0, inf)")
            if isinstance(t, Power):
                if t.r < 0 and atom > 0:
                    raise ConfigError("negative power of a law with an atom at 0")
                on_half_line = True
        self.resolved  # validates the combination eagerly

    @property
    def resolved(self) -> "Resolved":
        return _resolve(self)

    @property
    def is_symmetric(self) -> bool:
        return bool(self.transforms) and isinstance(self.transforms[-1], Symmetrize)


@dataclass(frozen=True)
class SupportInfo:
    intervals: tuple
    atom_at_zero: float


# ---------------------------------------------------------------------------
# helpers


def _finite(v, name):
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise ConfigError(f"{name} must be a finite real number")


def _positive(v, name):
    _finite(v, name)
    if not v > 0:
        raise ConfigError(f"{name} must be positive")


def _base_atom(kind) -> float:
    if isinstance(kind, FreePoisson):
        return max(1.0 - kind.p, 0.0)
    return 0.0


def log_beta(p: float, q: float) -> float:
    return math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q)


def mp_moment_closed(rho: float) -> float:
    """E[X^rho] for X ~ MP(1,1): Gamma(1+2rho)/(Gamma(1+rho)Gamma(2+rho))."""
    return math.exp(math.lgamma(1 + 2 * rho) - math.lgamma(1 + rho) - math.lgamma(2 + rho))


# ---------------------------------------------------------------------------
# core laws: one base family with one power applied


class Core:
    """A law on the real line with closed-form density.

    Attributes: ``intervals`` (continuous support), ``atom`` (mass at 0),
    ``tail_index`` (beta with density ~ x^(-1-beta) at infinity; inf if
    compact), ``zero_law`` ((c, e) with density ~ c x^e as x -> 0+, or None
    if 0 is not an endpoint of the support).
    """

    intervals: tuple = ()
    atom: float = 0.0
    tail_index: float = math.inf
    zero_law: tuple | None = None

    def pdf(self, x):
        raise NotImplementedError

    def _inside(self, x):
        x = np.asarray(x, dtype=float)
        ok = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.intervals:
            ok |= (x > lo) & (x < hi)
        return x, ok


class SemicircleCore(Core):
    def __init__(self, m: float, sigma2: float):
        self.m, self.sigma2 = m, sigma2
        self.sigma = math.sqrt(sigma2)
        self.intervals = ((m - 2 * self.sigma, m + 2 * self.sigma),)

    def pdf(self, x):
        x, ok = self._inside(x)
        d = x - self.m
        with np.errstate(invalid="ignore"):
            v = np.sqrt(np.maximum(4 * self.sigma2 - d * d, 0.0)) / (2 * math.pi * self.sigma2)
        return np.where(ok, v, 0.0)


class MPPowerCore(Core):
    """X^r with X ~ MP(p, theta); r < 0 requires p > 1."""

    def __init__(self, p: float, theta: float, r: float):
        self.p, self.theta, self.r = p, theta, r
        self.s = 1.0 / r
        sp = math.sqrt(p)
        self.alpha = theta * (1 - sp) ** 2  # support endpoints of X
        self.beta = theta * (1 + sp) ** 2
        if r > 0:
            self.atom = max(1.0 - p, 0.0)
            lo = self.alpha ** r if self.alpha > 0 else 0.0
            self.intervals = ((lo, self.beta ** r),)
            if p == 1:
                s = self.s
                self.zero_law = (s * math.sqrt(self.beta) / (2 * math.pi * theta), s / 2 - 1)
        else:
            if not p > 1:
                raise ConfigError("closed-form negative power of MP needs p > 1")
            self.t = -self.s
            self.At = 1.0 / self.beta  # A^t
            self.Bt = 1.0 / self.alpha  # B^t
            self.intervals = ((self.beta ** r, self.alpha ** r),)

    def pdf(self, x):
        x, ok = self._inside(x)
        xs = np.where(ok, x, 1.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            if self.r > 0:
                y = xs ** self.s
                rad = (self.beta - y) * (y - self.alpha)
                v = self.s / (2 * math.pi * self.theta) * np.sqrt(np.maximum(rad, 0.0)) / xs
            else:
                t = self.t
                y = xs ** t
                rad = (self.Bt - y) * (y - self.At)
                v = t * abs(self.p - 1) / (2 * math.pi) * np.sqrt(np.maximum(rad, 0.0)) / xs ** (t + 1)
        return np.where(ok, v, 0.0)


class BetaPowerCore(Core):
    def __init__(self, p: float, q: float, r: float):
        self.p, self.q, self.r = p, q, r
        self.s = 1.0 / r
        self.logB = log_beta(p, q)
        self.const = abs(self.s) * math.exp(-self.logB)
        if r > 0:
            self.intervals = ((0.0, 1.0),)
            self.zero_law = (self.const, p * self.s - 1)
        else:
            self.intervals = ((1.0, math.inf),)
            self.tail_index = -p * self.s

    def pdf(self, x):
        x, ok = self._inside(x)
        xs = np.where(ok, x, 0.5 if self.r > 0 else 2.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            y = xs ** self.s
            v = self.const * xs ** (self.p * self.s - 1) * np.abs(1 - y) ** (self.q - 1)
        return np.where(ok, v, 0.0)


class SubHCMPowerCore(Core):
    """X^r for X sub-HCM and r > 0 (negative powers go through X^-1 first)."""

    def __init__(self, base: SubHCM, r: float):
        if r < 0:
            base, r = base.inverse(), -r
        self.base, self.r = base, r
        self.s = 1.0 / r
        self.intervals = ((0.0, math.inf),)
        self.tail_index = self.s * (base.total_gamma - base.p)
        c0 = self.s * base.norm * math.prod(t ** (-g) for t, g in base.sites)
        self.zero_law = (c0, base.p * self.s - 1)

    def pdf(self, x):
        x, ok = self._inside(x)
        xs = np.where(ok, x, 1.0)
        b = self.base
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            y = xs ** self.s
            logv = math.log(self.s * b.norm) + (b.p * self.s - 1) * np.log(xs)
            for t, g in b.sites:
                logv = logv - g * np.log(t + y)
            v = np.exp(logv)
        return np.where(ok, v, 0.0)


class BooleanStablePowerCore(Core):
    def __init__(self, alpha: float, r: float):
        self.alpha, self.r = alpha, r
        self.s = 1.0 / r
        self.intervals = ((0.0, math.inf),)
        self.k = math.sin(math.pi * alpha) / math.pi
        self.tail_index = alpha * abs(self.s)
        self.zero_law = (abs(self.s) * self.k, alpha * abs(self.s) - 1)

    def pdf(self, x):
        x, ok = self._inside(x)
        xs = np.where(ok, x, 1.0)
        a = self.alpha
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            y = xs ** (a * abs(self.s))  # b_alpha is invariant under x -> 1/x
            v = abs(self.s) * self.k * y / xs / (y * y + 2 * math.cos(math.pi * a) * y + 1)
        return np.where(ok, v, 0.0)


class PushforwardCore(Core):
    """Generic X^r for an inner core on [0, inf); density |s| x^(s-1) f(x^s)."""

    def __init__(self, inner: Core, r: float):
        if inner.atom > 0 and r < 0:
            raise ConfigError("negative power of a law with an atom at 0")
        self.inner, self.r = inner, r
        self.s = 1.0 / r
        self.atom = inner.atom
        ivs = []
        for lo, hi in inner.intervals:
            a = _pow_end(lo, r)
            b = _pow_end(hi, r)
            ivs.append((min(a, b), max(a, b)))
        self.intervals = tuple(sorted(ivs))
        if r > 0:
            self.tail_index = inner.tail_index * self.s
            if inner.zero_law is not None:
                c, e = inner.zero_law
                self.zero_law = (self.s * c, self.s - 1 + self.s * e)
        else:
            if inner.zero_law is not None:
                _, e = inner.zero_law
                self.tail_index = -self.s * (e + 1)

    def pdf(self, x):
        x, ok = self._inside(x)
        xs = np.where(ok, x, 1.0)
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            v = abs(self.s) * xs ** (self.s - 1) * self.inner.pdf(xs ** self.s)
        return np.where(ok, v, 0.0)


class FoldedSemicircleCore(Core):
    """|S|^r for a semicircle with nonzero mean (real density only)."""

    def __init__(self, m: float, sigma2: float, r: float):
        self.sc = SemicircleCore(m, sigma2)
        lo, hi = self.sc.intervals[0]
        if lo >= 0:
            ab = (lo, hi)
        elif hi <= 0:
            ab = (-hi, -lo)
        else:
            ab = (0.0, max(-lo, hi))
        self.folded = ab
        self.r, self.s = r, 1.0 / r
        a, b = _pow_end(ab[0], r), _pow_end(ab[1], r)
        self.intervals = ((min(a, b), max(a, b)),)
        if r < 0 and ab[0] == 0:
            raise ConfigError("negative power of a folded semicircle charging 0")

    def pdf(self, x):
        x, ok = self._inside(x)
        xs = np.where(ok, x, 1.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            y = xs ** self.s
            g = self.sc.pdf(y) + self.sc.pdf(-y)
            v = abs(self.s) * xs ** (self.s - 1) * g
        return np.where(ok, v, 0.0)


def _pow_end(v: float, r: float) -> float:
    if v == 0:
        return 0.0 if r > 0 else math.inf
    if math.isinf(v):
        return math.inf if r > 0 else 0.0
    return v ** r


def make_core(kind: Kind, r: float) -> Core:
    if isinstance(kind, Semicircle):
        if r == 1:
            return SemicircleCore(kind.m, kind.sigma2)
        if kind.m == 0:
            # |S|^r = (S^2)^(r/2) and S^2 ~ MP(1, sigma2)
            return make_core(FreePoisson(1.0, kind.sigma2), r / 2)
        return FoldedSemicircleCore(kind.m, kind.sigma2, r)
    if isinstance(kind, FreePoisson):
        if r > 0 or kind.p > 1:
            return MPPowerCore(kind.p, kind.theta, r)
        if kind.p < 1:
            raise ConfigError("negative power of a law with an atom at 0")
        return PushforwardCore(MPPowerCore(kind.p, kind.theta, 1.0), r)
    if isinstance(kind, Beta):
        return BetaPowerCore(kind.p, kind.q, r)
    if isinstance(kind, SubHCM):
        return SubHCMPowerCore(kind, r)
    if isinstance(kind, BooleanStable):
        return BooleanStablePowerCore(kind.alpha, r)
    raise ConfigError(f"unknown base law {kind!r}")


@dataclass(frozen=True)
class Resolved:
    core: Core
    weights: tuple
    scales: tuple
    symmetric: bool
    r: float

    @property
    def trivial_mixture(self) -> bool:
        return self.weights == (1.0,) and self.scales == (1.0,)


def _resolve(spec: DistributionSpec) -> Resolved:
    r = 1.0
    mix = [(1.0, 1.0)]
    sym = False
    for t in spec.transforms:
        if isinstance(t, Power):
            r *= t.r
            # (tX)^r = t^r X^r: move the mixture behind the power
            mix = [(lam, sc ** t.r) for lam, sc in mix]
        elif isinstance(t, ScaleMixture):
            mix = [(l1 * l2, s1 * s2) for l1, s1 in mix for l2, s2 in zip(t.weights, t.scales)]
        else:
            sym = True
    core = make_core(spec.kind, r)
    if sym and core.intervals[0][0] < 0:
        raise ConfigError("Symmetrize needs a law supported in [0, inf)")
    weights = tuple(l for l, _ in mix)
    scales = tuple(s for _, s in mix)
    return Resolved(core, weights, scales, sym, r)


# ---------------------------------------------------------------------------
# public operations


def apply_power(spec: DistributionSpec, r: float) -> DistributionSpec:
    if not isinstance(r, (int, float)) or r == 0:
        raise ConfigError("Power(r) needs r != 0")
    if r < 0 and support(spec).atom_at_zero > 0:
        raise ConfigError("negative power of a law with an atom at 0")
    return DistributionSpec(spec.kind, spec.transforms + (Power(float(r)),))


def apply_symmetrize(spec: DistributionSpec) -> DistributionSpec:
    return DistributionSpec(spec.kind, spec.transforms + (Symmetrize(),))


def apply_scale_mixture(spec: DistributionSpec, weights: Sequence[float], scales: Sequence[float]) -> DistributionSpec:
    return DistributionSpec(spec.kind, spec.transforms + (ScaleMixture(tuple(weights), tuple(scales)),))


def support(spec: DistributionSpec) -> SupportInfo:
    res = spec.resolved
    ivs = []
    for lo, hi in res.core.intervals:
        for sc in res.scales:
            ivs.append((lo * sc, hi * sc))
    if res.symmetric:
        ivs = ivs + [(-hi, -lo) for lo, hi in ivs]
    return SupportInfo(_merge(ivs), res.core.atom)


def _merge(ivs):
    out = []
    for lo, hi in sorted(ivs):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


def density_eval(spec: DistributionSpec, x: float) -> float:
    """Density of the fully transformed law at a real point x."""
    x = float(x)
    res = spec.resolved
    if x == 0.0:
        lim = zero_limit(spec)
        if res.core.atom > 0:
            raise DomainError("x = 0 carries an atom; the density is not evaluated there")
        if lim is not None:
            if math.isinf(lim):
                raise DomainError("density is unbounded at x = 0")
            return lim
    return float(density_array(spec, np.array([x]))[0])


def density_array(spec: DistributionSpec, x) -> np.ndarray:
    """Vectorised density (0 outside the continuous support, no x = 0 checks)."""
    res = spec.resolved
    x = np.asarray(x, dtype=float)
    if res.symmetric:
        x = np.abs(x)
    out = np.zeros(x.shape)
    for lam, sc in zip(res.weights, res.scales):
        out = out + lam / sc * res.core.pdf(x / sc)
    if res.symmetric:
        out = 0.5 * out
    return out


def zero_limit(spec: DistributionSpec) -> float | None:
    """lim_{x->0} density (inf if unbounded); None if 0 is not an endpoint."""
    res = spec.resolved
    zl = res.core.zero_law
    if zl is None:
        return None
    c, e = zl
    if e < 0:
        return math.inf
    if e > 0:
        return 0.0
    val = math.fsum(lam / sc * c * sc ** (-e) for lam, sc in zip(res.weights, res.scales))
    return 0.5 * val if res.symmetric else val


def subhcm_normalize(p: float, sites) -> float:
    sites = tuple((float(t), float(g)) for t, g in sites)
    tot = math.fsum(g for _, g in sites)
    if not 0 < p < tot:
        raise ConfigError("integrability needs 0 < p < sum(gamma_k)")

    def h(x):
        lv = np.zeros_like(x)
        for t, g in sites:
            lv = lv - g * np.log(t + x)
        return np.exp(lv)

    # x = u^(1/p) on (0, 1] removes the x^(p-1) singularity
    head, _ = quadrature.integrate(lambda u: h(u ** (1.0 / p)) / p, 0.0, 1.0, tol=1e-14)
    tail, _ = quadrature.integrate_algebraic_tail(lambda x: x ** (p - 1) * h(x), 1.0, tot - p, tol=1e-14)
    return 1.0 / (float(np.real(head)) + tail)


def _core_integral(core: Core, g, tol=1e-13, growth: float = 0.0) -> float:
    """Integral of g * pdf over the core's intervals; g grows at most like x**growth."""
    tot = 0.0
    for lo, hi in core.intervals:
        def fn(x):
            return g(x) * core.pdf(x)

        if math.isinf(hi) and math.isfinite(core.tail_index):
            c = max(lo, 0.0) + 1.0
            val, _ = quadrature.integrate(fn, lo, c, tol=tol)
            tail, _ = quadrature.integrate_algebraic_tail(fn, c, core.tail_index - growth, tol=tol, growth=growth)
            tot += float(np.real(val)) + tail
        else:
            val, _ = quadrature.integrate(fn, lo, hi, tol=tol)
            tot += float(np.real(val))
    return tot


def total_mass(spec: DistributionSpec) -> float:
    res = spec.resolved
    return res.core.atom + _core_integral(res.core, lambda x: np.ones_like(x))


def moment(spec: DistributionSpec, n: int, method: str = "auto") -> float:
    """n-th moment; closed form for powers of MP(1,1), quadrature otherwise."""
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ConfigError("moment order must be a nonnegative integer")
    n = int(n)
    if n == 0:
        return 1.0
    res = spec.resolved
    core = res.core
    if res.symmetric and n % 2 == 1:
        return 0.0
    if n >= core.tail_index:
        raise DivergentMomentError(f"moment {n} diverges (tail index {core.tail_index:.6g})")
    mix = math.fsum(lam * sc ** n for lam, sc in zip(res.weights, res.scales))
    is_mp11 = isinstance(core, MPPowerCore) and core.p == 1 and core.theta == 1 and core.r > 0
    if method == "closed" or (method == "auto" and is_mp11):
        if not is_mp11:
            raise ConfigError("closed-form moments exist only for powers of MP(1,1)")
        return mix * mp_moment_closed(core.r * n)
    body = _core_integral(core, lambda x: x ** n, growth=n)
    return mix * body


# ---------------------------------------------------------------------------
# JSON (de)serialisation

_KIND_FIELDS = {
    "Semicircle": (Semicircle, ("m", "sigma2")),
    "FreePoisson": (FreePoisson, ("p", "theta")),
    "Beta": (Beta, ("p", "q")),
    "BooleanStable": (BooleanStable, ("alpha",)),
    "SubHCM": (SubHCM, ("p", "sites", "norm")),
}


def spec_to_dict(spec: DistributionSpec) -> dict:
    k = spec.kind
    name = type(k).__name__
    kd = {"type": name}
    for f in _KIND_FIELDS[name][1]:
        v = getattr(k, f)
        kd[f] = [list(s) for s in v] if f == "sites" else v
    ts = []
    for t in spec.transforms:
        if isinstance(t, Power):
            ts.append({"type": "Power", "r": t.r})
        elif isinstance(t, Symmetrize):
            ts.append({"type": "Symmetrize"})
        else:
            ts.append({"type": "ScaleMixture", "weights": list(t.weights), "scales": list(t.scales)})
    return {"kind": kd, "transforms": ts}


def spec_from_dict(d) -> DistributionSpec:
    if not isinstance(d, dict):
        raise ConfigError("spec must be a JSON object")
    _no_extra(d, {"kind", "transforms"}, "spec")
    kd = d.get("kind")
    if not isinstance(kd, dict) or "type" not in kd:
        raise ConfigError("spec.kind must be an object with a 'type'")
    name = kd["type"]
    if name not in _KIND_FIELDS:
        raise ConfigError(f"unknown base law type {name!r}")
    cls, fields = _KIND_FIELDS[name]
    _no_extra(kd, set(fields) | {"type"}, f"spec.kind ({name})")
    args = {f: kd[f] for f in fields if f in kd}
    if "sites" in args:
        try:
            args["sites"] = tuple(tuple(s) for s in args["sites"])
            if any(len(s) != 2 for s in args["sites"]):
                raise TypeError
        except TypeError:
            raise ConfigError("SubHCM sites must be a list of [t, gamma] pairs") from None
    try:
        kind = cls(**args)
    except TypeError as exc:
        raise ConfigError(f"bad fields for {name}: {exc}") from None
    ts = []
    for td in d.get("transforms", []) or []:
        if not isinstance(td, dict) or "type" not in td:
            raise ConfigError("each transform must be an object with a 'type'")
        tname = td["type"]
        if tname == "Power":
            _no_extra(td, {"type", "r"}, "Power")
            if "r" not in td:
                raise ConfigError("Power needs 'r'")
            ts.append(Power(td["r"]))
        elif tname == "Symmetrize":
            _no_extra(td, {"type"}, "Symmetrize")
            ts.append(Symmetrize())
        elif tname == "ScaleMixture":
            _no_extra(td, {"type", "weights", "scales"}, "ScaleMixture")
            ts.append(ScaleMixture(tuple(td.get("weights", ())), tuple(td.get("scales", ()))))
        else:
            raise ConfigError(f"unknown transform type {tname!r}")
    return DistributionSpec(kind, tuple(ts))


def _no_extra(d: dict, allowed: set, where: str):
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"unknown field(s) in {where}: {sorted(extra)}")
