"""Verification contours, their images under G, winding counts and domain scans.

A contour lives on the Riemann surface of the continued Cauchy transform:
segments running along the real axis carry a side tag, so ``(x, 'plus')``
means x + i0 and ``(x, 'minus')`` means x - i0.  The tag ``'ray'`` marks the
boundary ray arg z = -pi/t used for negative powers with t > 1.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.stats import qmc

from .cauchy import CauchyEvaluator, g_inverse_numeric
from .errors import ConfigError, DomainError, NumericalError
from .measures import (
    Beta,
    BetaPowerCore,
    BooleanStable,
    DistributionSpec,
    FreePoisson,
    MPPowerCore,
    PushforwardCore,
    Semicircle,
    SubHCM,
    SubHCMPowerCore,
    density_array,
    support,
    zero_limit,
)

CASES = ("lemma4", "beta_power", "mp_a", "mp_b", "mp_c", "mp_d", "sym")
MAX_STEP = math.pi / 8
MAX_SAMPLES = 1_000_000
EDGE = 1e-13  # relative offset keeping line ends off support endpoints

SIDE_CODE = {"auto": 0, "plus": 1, "minus": -1, "ray": 2}
CODE_SIDE = {v: k for k, v in SIDE_CODE.items()}


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class Segment:
    """One parametric piece, t in [0, 1].

    kind 'line': z0 -> z1; with ``anchor`` set the points are spaced
    geometrically in distance from the anchor.
    kind 'arc': center + radius*exp(i theta), theta0 -> theta1.
    ``side`` applies to points on the real axis (and 'ray' to the whole
    segment); ``end_sides`` overrides the side at t = 0 and t = 1.
    """

    name: str
    kind: str
    side: str
    z0: complex = 0j
    z1: complex = 0j
    anchor: complex | None = None
    center: float = 0.0
    radius: float = 0.0
    theta0: float = 0.0
    theta1: float = 0.0
    end_sides: tuple = ("auto", "auto")

    def points(self, t: np.ndarray):
        t = np.asarray(t, dtype=float)
        if self.kind == "line":
            if self.anchor is not None:
                u0, u1 = self.z0 - self.anchor, self.z1 - self.anchor
                z = self.anchor + u0 * (u1 / u0) ** t
            else:
                z = self.z0 + (self.z1 - self.z0) * t
            z = np.asarray(z, dtype=complex)
            if self.z0.imag == 0 and self.z1.imag == 0:
                z = z.real.astype(complex)
            z[t == 0] = self.z0
            z[t == 1] = self.z1
        else:
            th = self.theta0 + (self.theta1 - self.theta0) * t
            s, c = np.sin(th), np.cos(th)
            on_axis = np.isclose(np.abs(c), 1.0, rtol=0, atol=1e-15) | (np.abs(s) < 1e-15)
            s = np.where(on_axis, 0.0, s)
            c = np.where(on_axis, np.sign(c), c)
            z = self.center + self.radius * (c + 1j * s)
        codes = np.full(t.shape, SIDE_CODE[self.side], dtype=int)
        if self.side == "auto":
            codes[:] = 0
        codes[t == 0] = SIDE_CODE[self.end_sides[0]] if self.end_sides[0] != "auto" else codes[t == 0]
        codes[t == 1] = SIDE_CODE[self.end_sides[1]] if self.end_sides[1] != "auto" else codes[t == 1]
        return z, codes

    def start(self):
        return self.points(np.array([0.0]))[0][0]

    def end(self):
        return self.points(np.array([1.0]))[0][0]

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "side": self.side}
        if self.kind == "line":
            d.update(z0=[self.z0.real, self.z0.imag], z1=[self.z1.real, self.z1.imag])
        else:
            d.update(center=self.center, radius=self.radius, theta0=self.theta0, theta1=self.theta1)
        return d


@dataclass(frozen=True)
class Contour:
    case: str
    eta: float
    delta: float
    segments: tuple

    def is_closed(self, tol: float = 1e-9) -> bool:
        segs = self.segments
        for a, b in zip(segs, segs[1:] + segs[:1]):
            za, zb = a.end(), b.start()
            if abs(za - zb) > tol * max(1.0, abs(za)):
                return False
        return True


def _line(name, x0, x1, side, anchor=None):
    return Segment(name, "line", side, complex(x0), complex(x1), None if anchor is None else complex(anchor))


def _arc(name, center, radius, th0, th1, end_sides, side="auto"):
    return Segment(name, "arc", side, center=center, radius=radius, theta0=th0, theta1=th1, end_sides=end_sides)


def _outer_radius(spec) -> float:
    info = support(spec)
    hi = max(max(abs(lo), abs(h)) for lo, h in info.intervals)
    return hi if math.isfinite(hi) else 1.0


def _mp_core(spec):
    core = spec.resolved.core
    if isinstance(core, MPPowerCore):
        return core
    raise ConfigError("case requires a FreePoisson power without transforms other than Power")


def build_contour(case: str, spec: DistributionSpec, eta: float, delta: float) -> Contour:
    if case not in CASES:
        raise ConfigError(f"unknown case {case!r}; choose from {CASES}")
    if not (eta > 0 and delta > 0 and delta < 1 < eta):
        raise ConfigError("need 0 < delta < 1 < eta")
    res = spec.resolved
    if case != "sym" and res.symmetric:
        raise ConfigError(f"case {case} needs a law on [0, inf); use 'sym' for symmetrized laws")
    if case == "sym" and not res.symmetric:
        raise ConfigError("case 'sym' needs a symmetrized spec")
    if case in ("lemma4", "beta_power"):
        if min(lo for lo, _ in support(spec).intervals) != 0:
            raise ConfigError(f"case {case} needs support starting at 0")
    if eta < 10 * _outer_radius(spec) and case not in ("lemma4",):
        raise ConfigError("eta must exceed 10x the outer support radius")

    pi = math.pi
    if case == "lemma4":
        segs = (
            _line("c1", -eta, -delta, "plus", anchor=0),
            _arc("c2", 0.0, delta, pi, -pi, ("plus", "minus")),
            _line("c3", -delta, -eta, "minus", anchor=0),
            _arc("c4", 0.0, eta, -pi, pi, ("minus", "plus")),
        )
    elif case in ("beta_power", "sym"):
        one = max(h for _, h in support(spec).intervals)
        if not math.isfinite(one):
            raise ConfigError(f"case {case} needs a compact support")
        e1 = one * (1 + EDGE)
        c = 0.5 * one
        R = eta + 0.5 * one
        big_end = one + eta
        if case == "beta_power":
            segs = (
                _line("c1", -eta, -delta, "plus", anchor=0),
                _arc("c2", 0.0, delta, pi, -pi, ("plus", "minus")),
                _line("c3", -delta, -eta, "minus", anchor=0),
                _arc("c4", c, R, -pi, 0.0, ("minus", "minus")),
                _line("c5", big_end, e1, "minus", anchor=one),
                _line("c6", e1, big_end, "plus", anchor=one),
                _arc("c7", c, R, 0.0, pi, ("plus", "plus")),
            )
        else:
            top = math.acos(-c / R)  # arc meets the imaginary axis here
            segs = (
                None,
                _arc("c2", 0.0, delta, pi / 2, -pi, ("auto", "minus")),
                _line("c3", -delta, -eta, "minus", anchor=0),
                _arc("c4", c, R, -pi, 0.0, ("minus", "minus")),
                _line("c5", big_end, e1, "minus", anchor=one),
                _line("c6", e1, big_end, "plus", anchor=one),
                _arc("c7", c, R, 0.0, top, ("plus", "auto")),
            )
    else:
        core = _mp_core(spec)
        a, b = core.intervals[0]
        want = {"mp_a": (lambda: core.p > 1 and core.r > 0), "mp_b": (lambda: core.p < 1 and core.r > 0),
                "mp_c": (lambda: core.p > 1 and core.r <= -1), "mp_d": (lambda: core.p > 1 and -1 < core.r < 0)}[case]
        if not want():
            raise ConfigError(f"case {case} does not match FreePoisson(p={core.p}) with power r={core.r}")
        if not spec.resolved.trivial_mixture:
            raise ConfigError("FreePoisson cases do not take scale mixtures")
        if delta >= 0.5 * a:
            raise ConfigError("delta must be below half the lower support endpoint")
        a_in = a * (1 - EDGE)
        b_out = b * (1 + EDGE)
        if case in ("mp_a", "mp_c"):
            segs = (
                _line("c1", -eta, a_in, "plus"),
                _line("c2", a_in, delta, "minus", anchor=0),
                _arc("c3", 0.0, delta, 0.0, -pi, ("minus", "minus")),
                _line("c4", -delta, -eta, "minus", anchor=0),
                _arc("c5", 0.0, eta, -pi, 0.0, ("minus", "minus")),
                _line("c6", eta, b_out, "minus", anchor=b),
                _line("c7", b_out, eta, "plus", anchor=b),
                _arc("c8", 0.0, eta, 0.0, pi, ("plus", "plus")),
            )
        elif case == "mp_b":
            segs = (
                _line("c1", -eta, -delta, "plus", anchor=0),
                _arc("c2", 0.0, delta, pi, 0.0, ("plus", "plus")),
                _line("c3", delta, a_in, "plus", anchor=0),
                _line("c4", a_in, delta, "minus", anchor=0),
                _arc("c5", 0.0, delta, 0.0, -pi, ("minus", "minus")),
                _line("c6", -delta, -eta, "minus", anchor=0),
                _arc("c7", 0.0, eta, -pi, 0.0, ("minus", "minus")),
                _line("c8", eta, b_out, "minus", anchor=b),
                _line("c9", b_out, eta, "plus", anchor=b),
                _arc("c10", 0.0, eta, 0.0, pi, ("plus", "plus")),
            )
        else:  # mp_d
            ang = -pi / core.t
            u = complex(math.cos(ang), math.sin(ang))
            segs = (
                _line("c1", -eta, a_in, "plus"),
                _line("c2", a_in, delta, "minus", anchor=0),
                _arc("c3", 0.0, delta, 0.0, ang, ("minus", "ray")),
                Segment("c4", "line", "ray", delta * u, eta * u, 0j),
                _arc("c5", 0.0, eta, ang, 0.0, ("ray", "minus")),
                _line("c6", eta, b_out, "minus", anchor=b),
                _line("c7", b_out, eta, "plus", anchor=b),
                _arc("c8", 0.0, eta, 0.0, pi, ("plus", "plus")),
            )
    if case == "sym":
        # start c1 exactly where c7 ends
        zt = segs[6].end()
        segs = (_line("c1", 1j * zt.imag, 1j * delta, "auto", anchor=0),) + segs[1:]
    return Contour(case, float(eta), float(delta), tuple(segs))


# ---------------------------------------------------------------------------
# images and winding


@dataclass
class ImageCurve:
    """Samples (segment index + t, z, G(z)) in traversal order."""

    t: np.ndarray
    z: np.ndarray
    g: np.ndarray
    segment_names: tuple = ()
    seg_index: np.ndarray | None = None

    def to_csv_rows(self):
        for t, z, g in zip(self.t, self.z, self.g):
            yield (float(t), z.real, z.imag, g.real, g.imag)

    def segment(self, name):
        k = self.segment_names.index(name)
        m = self.seg_index == k
        return self.z[m], self.g[m]


def _evaluate(ev: CauchyEvaluator, z: np.ndarray, codes: np.ndarray) -> np.ndarray:
    out = np.empty(z.shape, dtype=complex)
    for code in np.unique(codes):
        m = codes == code
        side = CODE_SIDE[int(code)]
        out[m] = ev.sheet(z[m], None if side == "auto" else side)
    return out


def _max_increment(g: np.ndarray, probes: np.ndarray) -> np.ndarray:
    if probes.size == 0:
        return np.zeros(max(g.size - 1, 0))
    d0 = g[:-1, None] - probes[None, :]
    d1 = g[1:, None] - probes[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        inc = np.abs(np.angle(d1 / d0))
    inc = np.where(np.isfinite(inc), inc, np.inf)
    return inc.max(axis=1)


def _trace_segment(ev, seg: Segment, probes, budget, n0=65):
    t = np.linspace(0.0, 1.0, n0)
    z, codes = seg.points(t)
    g = _evaluate(ev, z, codes)
    while True:
        bad = _max_increment(g, probes) >= MAX_STEP
        if not bad.any():
            return t, z, g
        if t.size + bad.sum() > budget:
            raise NumericalError(f"image refinement exceeded {MAX_SAMPLES} samples on segment {seg.name}")
        idx = np.nonzero(bad)[0]
        tm = 0.5 * (t[idx] + t[idx + 1])
        if np.any(tm <= t[idx]) or np.any(tm >= t[idx + 1]):
            raise NumericalError(f"image refinement stalled on segment {seg.name} (discontinuous image?)")
        zm, cm = seg.points(tm)
        gm = _evaluate(ev, zm, cm)
        t = np.insert(t, idx + 1, tm)
        z = np.insert(z, idx + 1, zm)
        g = np.insert(g, idx + 1, gm)


def trace_image(spec: DistributionSpec, contour: Contour, probes=(), evaluator: CauchyEvaluator | None = None) -> ImageCurve:
    ev = evaluator or CauchyEvaluator(spec)
    probes = np.asarray(list(probes), dtype=complex)
    ts, zs, gs, ks = [], [], [], []
    used = 0
    for k, seg in enumerate(contour.segments):
        t, z, g = _trace_segment(ev, seg, probes, MAX_SAMPLES - used)
        used += t.size
        ts.append(k + t)
        zs.append(z)
        gs.append(g)
        ks.append(np.full(t.size, k))
    curve = ImageCurve(np.concatenate(ts), np.concatenate(zs), np.concatenate(gs),
                       tuple(s.name for s in contour.segments), np.concatenate(ks))
    # junctions between segments must also respect the step bound
    if probes.size:
        jumps = _max_increment(np.append(curve.g, curve.g[:1]), probes)
        if np.any(jumps >= MAX_STEP):
            worst = int(np.argmax(jumps))
            raise NumericalError(
                f"image jumps at sample {worst} (segment {curve.segment_names[curve.seg_index[worst]]}); "
                "contour pieces do not join continuously"
            )
    return curve


def winding_number(curve, point) -> int:
    """Winding of a closed sampled curve about ``point`` from summed argument increments."""
    g = curve.g if isinstance(curve, ImageCurve) else np.asarray(curve, dtype=complex)
    w = complex(point)
    d = g - w
    if np.min(np.abs(d)) <= 1e-6:
        raise DomainError("point lies on the curve")
    closed = np.append(d, d[:1])
    total = np.sum(np.angle(closed[1:] / closed[:-1])) / (2 * math.pi)
    n = int(round(total))
    if abs(total - n) > 1e-3:
        raise NumericalError(f"winding sum {total:.6f} is not near an integer; refine the curve")
    return n


def _winding_many(g, probes):
    d = g[:, None] - probes[None, :]
    closed = np.vstack([d, d[:1]])
    tot = np.sum(np.angle(closed[1:] / closed[:-1]), axis=0) / (2 * math.pi)
    return tot


# ---------------------------------------------------------------------------
# checks


@dataclass
class WindingReport:
    case: str
    epsilon: float
    eta: float
    delta: float
    probe_points: list
    winding: list
    sign_checks: list
    hypotheses_ok: bool
    hypothesis_notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def windings_ok(self) -> bool:
        return all(w == 1 for w in self.winding)

    @property
    def signs_ok(self) -> bool:
        return all(ok for _, _, ok in self.sign_checks)

    @property
    def passed(self) -> bool:
        return self.windings_ok and self.signs_ok and self.extra.get("unimodal", True)

    @property
    def status(self) -> str:
        if not self.hypotheses_ok:
            return "hypothesis_violation"
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "status": self.status,
            "passed": self.passed,
            "epsilon": self.epsilon,
            "eta": self.eta,
            "delta": self.delta,
            "hypotheses_ok": self.hypotheses_ok,
            "hypothesis_notes": list(self.hypothesis_notes),
            "probe_points": [[p.real, p.imag] for p in self.probe_points],
            "winding": [int(w) for w in self.winding],
            "sign_checks": [{"ray": r, "max_re": float(m), "pass": bool(ok)} for r, m, ok in self.sign_checks],
            "extra": self.extra,
        }


def probe_points(epsilon: float, n: int, quadrant: bool = False) -> np.ndarray:
    """Quasi-uniform points of {w in C^-: eps < |w| < 1/eps} (fourth quadrant if ``quadrant``)."""
    if n <= 0:
        return np.zeros(0, dtype=complex)
    h = qmc.Halton(d=2, scramble=False).random(n + 1)[1:]
    lr = math.log(epsilon) + (-2 * math.log(epsilon)) * h[:, 0]
    lo = -math.pi / 2 if quadrant else -math.pi
    # keep off the boundary rays where |G| images run
    th = lo + (0 - lo) * (0.02 + 0.96 * h[:, 1])
    return np.exp(lr) * np.exp(1j * th)


def _close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def check_hypotheses(spec: DistributionSpec, case: str) -> tuple[bool, list]:
    """Theorem hypotheses for each case (advisory)."""
    notes = []
    kind = spec.kind
    res = spec.resolved
    r = res.r
    core = res.core
    mixture = not res.trivial_mixture

    def hcm_ok():
        base = kind if isinstance(kind, SubHCM) else (
            SubHCM(0.5, ((1.0, 1.0),)) if isinstance(kind, BooleanStable) and _close(kind.alpha, 0.5) else None)
        if base is None:
            notes.append("base law is not sub-HCM (nor the Boolean 1/2-stable law)")
            return False
        ok = True
        if not (0 < base.p <= 0.5):
            notes.append("needs 0 < p <= 1/2")
            ok = False
        if not (0 < base.total_gamma - base.p <= 0.5):
            notes.append("needs 0 < sum(gamma) - p <= 1/2")
            ok = False
        if abs(r) < 1:
            notes.append("needs |r| >= 1")
            ok = False
        return ok

    def beta_ok():
        if not isinstance(kind, Beta):
            notes.append("base law is not Beta")
            return False
        p, q = kind.p, kind.q
        ok = True
        if r < 1:
            notes.append("needs r >= 1")
            ok = False
        if not (1.5 <= q <= 2.5):
            notes.append("needs q in [3/2, 5/2]")
            ok = False
        if not (0 < 2 * p <= r):
            notes.append("needs 0 < 2p <= r")
            ok = False
        if not ((q - 1.5) * r <= p + q - 1 <= r):
            notes.append("needs (q - 3/2) r <= p + q - 1 <= r")
            ok = False
        if mixture:
            notes.append("beta laws do not take scale mixtures here")
            ok = False
        return ok

    if case == "lemma4":
        return hcm_ok(), notes
    if case == "beta_power":
        return beta_ok(), notes
    if case in ("mp_a", "mp_b", "mp_c", "mp_d"):
        # the case constructor already checks the parameter region
        return True, notes
    # symmetrized laws
    if isinstance(kind, Beta):
        ok = beta_ok()
        if isinstance(kind, Beta) and (kind.p > r > 0 or r <= 0):
            notes.append("p > r > 0 or r <= 0: density vanishes at 0, law is not FID")
        return ok, notes
    if isinstance(kind, (SubHCM, BooleanStable)):
        return hcm_ok(), notes
    if isinstance(core, MPPowerCore) and core.p == 1 and not mixture:
        # Beta(1/2, 3/2) up to scale; Semicircle powers act on |S| (S^2 ~ MP(1, sigma2))
        if core.r >= 1:
            return True, notes
        notes.append("needs power >= 1 of MP(1, theta) (>= 2 for |S|)")
        return False, notes
    notes.append("no theorem covers this symmetrized law")
    return False, notes


def _sign_rays(ev: CauchyEvaluator, contour: Contour):
    """(ray id, real sample points or ray radii) pairs the case requires."""
    case, eta, delta = contour.case, contour.eta, contour.delta
    neg = -np.geomspace(delta, eta, 400)
    rays = []
    core = ev.engine.core
    if case in ("lemma4", "beta_power", "mp_a", "mp_b", "mp_c", "sym"):
        rays.append(("x<0", neg))
    if case in ("beta_power", "sym"):
        one = max(h for _, h in support(ev.spec).intervals)
        rays.append(("x>1", one + np.geomspace(1e-9 * one, eta, 400)))
    if case in ("mp_a", "mp_b", "mp_c", "mp_d"):
        a, b = core.intervals[0]
        rays.append(("0<x<a", np.geomspace(a * 1e-6, a * (1 - 1e-9), 200)))
        rays.append(("x>b", b + np.geomspace(b * 1e-9, eta, 200)))
    if case == "mp_d":
        rays.append(("arg=-pi/t", np.geomspace(delta, eta, 400)))
    return rays


def _sign_checks(ev: CauchyEvaluator, contour: Contour):
    out = []
    for rid, xs in _sign_rays(ev, contour):
        if rid == "arg=-pi/t":
            vals = ev.engine.branch.ray_value(xs)
        else:
            vals = ev.density_side(xs, -1)
        m = float(np.max(vals.real))
        out.append((rid, m, bool(m <= 1e-10)))
    return out


def default_parameters(spec: DistributionSpec, case: str, epsilon: float = 1e-3):
    eta = max(1e3, 1e2 * _outer_radius(spec))
    delta = 1e-4
    if case in ("mp_a", "mp_b", "mp_c", "mp_d"):
        a = spec.resolved.core.intervals[0][0]
        delta = min(delta, 0.1 * a)
    return eta, delta


def _small_and_big(contour: Contour):
    """Names of the segments that must map near infinity / near zero."""
    small = {"lemma4": ("c2",), "beta_power": ("c2",), "mp_a": ("c3",), "mp_c": ("c3",),
             "mp_b": ("c2", "c5"), "mp_d": ("c3",), "sym": ("c2",)}[contour.case]
    big = {"lemma4": ("c4",), "beta_power": ("c4", "c7"), "mp_a": ("c5", "c8"), "mp_c": ("c5", "c8"),
           "mp_b": ("c7", "c10"), "mp_d": ("c5", "c8"), "sym": ("c4", "c7")}[contour.case]
    return small, big


def _fit_parameters(ev, spec, case, epsilon, eta, delta, auto):
    """Grow eta / shrink delta until |G| < eps/2 on the big arcs and > 2/eps on the small ones."""
    for _ in range(12):
        contour = build_contour(case, spec, eta, delta)
        if not auto:
            return contour
        small, big = _small_and_big(contour)
        t = np.linspace(0, 1, 257)
        ok_small = ok_big = True
        for seg in contour.segments:
            if seg.name in small or seg.name in big:
                z, codes = seg.points(t)
                g = np.abs(_evaluate(ev, z, codes))
                if seg.name in small and g.min() <= 2 / epsilon:
                    ok_small = False
                if seg.name in big and g.max() >= epsilon / 2:
                    ok_big = False
        if ok_small and ok_big:
            return contour
        if not ok_small:
            delta /= 10.0
        if not ok_big:
            eta *= 10.0
        if delta < 1e-14 or eta > 1e14:
            break
    return build_contour(case, spec, eta, delta)


def _run_check(spec, case, epsilon, n_probes, eta, delta, auto, quadrant):
    hyp_ok, notes = check_hypotheses(spec, case)
    ev = CauchyEvaluator(spec)
    e0, d0 = default_parameters(spec, case, epsilon)
    eta = e0 if eta is None else eta
    delta = d0 if delta is None else delta
    contour = _fit_parameters(ev, spec, case, epsilon, eta, delta, auto)
    probes = probe_points(epsilon, n_probes, quadrant=quadrant)
    curve = trace_image(spec, contour, probes, evaluator=ev)
    tot = _winding_many(curve.g, probes)
    wind = [int(round(v)) for v in tot]
    resid = float(np.max(np.abs(tot - np.round(tot)))) if tot.size else 0.0
    signs = _sign_checks(ev, contour)
    rep = WindingReport(case, epsilon, contour.eta, contour.delta, list(probes), wind, signs, hyp_ok, notes,
                        {"samples": int(curve.t.size), "winding_residual": resid})
    return rep, curve


def ui_check(spec: DistributionSpec, case: str, epsilon: float = 1e-3, n_probes: int = 200,
             eta: float | None = None, delta: float | None = None, auto: bool = True) -> WindingReport:
    if case == "sym":
        raise ConfigError("use ui_s_check for symmetrized laws")
    return _run_check(spec, case, epsilon, n_probes, eta, delta, auto, quadrant=False)[0]


def unimodality_scan(spec: DistributionSpec, n: int = 2000):
    """Sign changes of the density slope on (0, sup support) and whether it only decreases."""
    hi = max(h for _, h in support(spec).intervals)
    top = hi if math.isfinite(hi) else 1e3
    x = np.geomspace(top * 1e-8, top * (1 - 1e-6), n)
    f = density_array(spec, x)
    d = np.diff(f)
    scale = np.max(np.abs(f)) + 1e-300
    s = np.sign(np.where(np.abs(d) < 1e-12 * scale, 0.0, d))
    s = s[s != 0]
    changes = int(np.sum(s[1:] != s[:-1])) if s.size else 0
    decreasing = bool(np.all(s <= 0))
    return changes, decreasing


def ui_s_check(spec: DistributionSpec, epsilon: float = 1e-3, n_probes: int = 200,
               eta: float | None = None, delta: float | None = None, auto: bool = True) -> WindingReport:
    if not spec.is_symmetric:
        raise ConfigError("ui_s_check needs a symmetrized spec")
    rep, _ = _run_check(spec, "sym", epsilon, n_probes, eta, delta, auto, quadrant=True)
    changes, decreasing = unimodality_scan(spec)
    rep.extra.update(slope_sign_changes=changes, decreasing_on_positive_axis=decreasing,
                     unimodal=bool(decreasing))
    return rep


def lemma_pdf0_probe(spec: DistributionSpec) -> dict:
    """G(iy) for small y; a vanishing density at 0 forces G(i0) = 0, incompatible with FID."""
    if not spec.is_symmetric and not (isinstance(spec.kind, Semicircle) and spec.kind.m == 0 and not spec.transforms):
        raise ConfigError("lemma_pdf0_probe needs a symmetric law")
    ev = CauchyEvaluator(spec)
    ys = np.geomspace(1e-1, 1e-5, 9)
    g = ev.gtilde(1j * ys)
    try:
        p0 = zero_limit(spec)
    except DomainError:
        p0 = math.inf
    if p0 is None:
        p0 = float(density_array(spec, np.array([1e-12]))[0])
    mags = np.abs(g)
    decreasing = bool(np.all(np.diff(mags) <= 1e-15))
    verdict = "not_fid_consistent" if (p0 == 0 and decreasing and mags[-1] < 1e-3) else "inconclusive"
    return {"y": ys.tolist(), "g_at_small_iy": [[v.real, v.imag] for v in g], "density_at_0": p0,
            "verdict": verdict}


# ---------------------------------------------------------------------------
# domain scans


@dataclass
class DomainGrid:
    box: tuple
    resolution: tuple
    mask: np.ndarray
    component: np.ndarray
    seed: complex
    seed_cell: tuple

    @property
    def area_fraction(self) -> float:
        return float(self.component.mean())

    @property
    def min_re(self) -> float:
        xs = np.linspace(self.box[0], self.box[1], self.resolution[0])
        cols = np.nonzero(self.component.any(axis=0))[0]
        return float(xs[cols.min()]) if cols.size else float("nan")

    def summary(self) -> dict:
        mr = self.min_re
        return {
            "box": list(self.box),
            "resolution": list(self.resolution),
            "seed": [self.seed.real, self.seed.imag],
            "seed_cell": list(self.seed_cell),
            "mask_fraction": float(self.mask.mean()),
            "area_fraction": self.area_fraction,
            "min_re": mr,
            "right_half_plane": bool(mr > -1e-3) if math.isfinite(mr) else None,
        }


def _grid(box, resolution):
    x0, x1, y0, y1 = box
    nx, ny = resolution
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y1, y0, ny)  # row 0 at the top
    return xs, ys


def _admissible(z, cut, margin):
    x, y = z.real, z.imag
    region = (y < 0) | ((x > 0) & (y >= 0))
    region &= ~((y == 0) & (x <= 0))
    near_cut = (np.abs(y) <= margin) & (x >= cut - margin)
    return region & ~near_cut


def _mask_chunk(args):
    spec, z = args
    ev = CauchyEvaluator(spec)
    return ev.sheet(z).imag < 0


def domain_scan(spec: DistributionSpec, box=(-0.2, 1.6, -1.2, 0.4), resolution=(800, 800),
                workers: int | None = 1, margin: float = 1e-3) -> DomainGrid:
    if not spec.is_symmetric:
        raise ConfigError("domain_scan needs a symmetrized spec")
    x0, x1, y0, y1 = map(float, box)
    nx, ny = map(int, resolution)
    if nx < 1 or ny < 1 or x1 < x0 or y1 < y0:
        raise ConfigError("invalid box or resolution")
    cut = max(h for _, h in support(spec).intervals)
    xs, ys = _grid((x0, x1, y0, y1), (nx, ny))
    Z = xs[None, :] + 1j * ys[:, None]
    adm = _admissible(Z, cut, margin)
    flat = Z[adm]
    ev = CauchyEvaluator(spec)
    vals = np.zeros(flat.size, dtype=bool)
    if flat.size:
        n_chunks = max(1, (workers or 1) * 4)
        parts = np.array_split(np.arange(flat.size), n_chunks)
        if workers and workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                res = list(pool.map(_mask_chunk, [(spec, flat[p]) for p in parts]))
        else:
            res = [ev.sheet(flat[p]).imag < 0 for p in parts]
        for p, r in zip(parts, res):
            vals[p] = r
    mask = np.zeros(Z.shape, dtype=bool)
    mask[adm] = vals

    seed, cell = _seed_cell(spec, ev, xs, ys, mask, (x0, x1, y0, y1))
    labels, _ = ndimage.label(mask)  # default structure: 4-connectivity
    lab = labels[cell]
    component = labels == lab if lab > 0 else np.zeros_like(mask)
    return DomainGrid((x0, x1, y0, y1), (nx, ny), mask, component, seed, cell)


def _cell_of(z, xs, ys):
    dx = xs[1] - xs[0] if xs.size > 1 else 1.0
    dy = ys[0] - ys[1] if ys.size > 1 else 1.0
    j = int(round((z.real - xs[0]) / dx)) if xs.size > 1 else 0
    i = int(round((ys[0] - z.imag) / dy)) if ys.size > 1 else 0
    return i, j


def _seed_cell(spec, ev, xs, ys, mask, box):
    """Seed z0 = G^{-1}(w0) with w0 = (1-i)/100, continued along w = tau*w0 until it enters the box."""
    w0 = (1 - 1j) * 1e-2
    x0, x1, y0, y1 = box
    pad_x = 0.5 * ((xs[1] - xs[0]) if xs.size > 1 else 1.0)
    pad_y = 0.5 * ((ys[0] - ys[1]) if ys.size > 1 else 1.0)

    def inside(z):
        return x0 - pad_x <= z.real <= x1 + pad_x and y0 - pad_y <= z.imag <= y1 + pad_y

    try:
        z = g_inverse_numeric(spec, w0, 1 / w0, evaluator=ev)
    except (NumericalError, DomainError) as exc:
        raise NumericalError(f"inversion of the seed failed: {exc}") from None
    tau = 1.0
    steps = 0
    while not inside(z):
        tau *= 1.25
        steps += 1
        if steps > 400:
            raise NumericalError("seed continuation never entered the scan box")
        try:
            z = g_inverse_numeric(spec, tau * w0, z, evaluator=ev)
        except (NumericalError, DomainError) as exc:
            raise NumericalError(f"seed continuation failed at |w| = {abs(tau * w0):.3g}: {exc}") from None
    i, j = _cell_of(z, xs, ys)
    i = min(max(i, 0), ys.size - 1)
    j = min(max(j, 0), xs.size - 1)
    if not mask[i, j]:
        # step to the nearest masked neighbour (seed sits on a cell boundary)
        best = None
        for di in range(-2, 3):
            for dj in range(-2, 3):
                a, b = i + di, j + dj
                if 0 <= a < ys.size and 0 <= b < xs.size and mask[a, b]:
                    d = abs(di) + abs(dj)
                    if best is None or d < best[0]:
                        best = (d, a, b)
        if best is None:
            raise NumericalError("seed cell is outside the mask")
        i, j = best[1], best[2]
    return z, (i, j)


def write_pgm(path, array: np.ndarray) -> None:
    """Binary portable graymap; True/nonzero cells are white."""
    a = np.asarray(array)
    img = np.where(a > 0, 255, 0).astype(np.uint8) if a.dtype == bool else np.clip(a, 0, 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
