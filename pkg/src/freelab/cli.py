"""Command-line front end.

Every subcommand reads an optional JSON config file (``--config``) and then
applies command-line flags on top of it.  Exit codes: 0 ok, 1 check failed,
2 bad configuration or input, 3 numerical failure, 4 hypothesis violation
under ``--strict``.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cauchy, contour, cumulants, measures
from .errors import ConfigError, DomainError, NumericalError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC, EXIT_STRICT = 0, 1, 2, 3, 4
COMMANDS = ("density", "cauchy-eval", "ui-check", "domain-scan", "cumulant-scan", "moments")


def fmt(v) -> str:
    return format(float(v), ".17g")


@dataclass
class RunConfig:
    """All run parameters; ``None`` means the command default."""

    command: str
    spec: dict | None = None
    # density
    x_lo: float | None = None
    x_hi: float | None = None
    n: int | None = None
    # cauchy-eval
    points: list | None = None
    mode: str | None = None
    # ui-check
    case: str | None = None
    epsilon: float | None = None
    eta: float | None = None
    delta: float | None = None
    n_probes: int | None = None
    strict: bool | None = None
    pdf0_probe: bool | None = None
    # domain-scan
    box: list | None = None
    resolution: list | None = None
    # cumulant-scan / moments
    functional: str | None = None
    r_lo: float | None = None
    r_hi: float | None = None
    step: float | None = None
    symmetrized: bool | None = None
    r: float | None = None
    N: int | None = None
    precision: str | None = None
    # common
    output: str | None = None
    workers: int | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        if "command" not in d:
            raise ConfigError("config needs 'command'")
        if d["command"] not in COMMANDS:
            raise ConfigError(f"unknown command {d['command']!r}")
        allowed = ALLOWED[d["command"]] | {"command"}
        extra = set(d) - allowed
        if extra:
            raise ConfigError(f"unknown field(s) for {d['command']}: {sorted(extra)}")
        cfg = cls(**d)
        cfg.validate_types()
        return cfg

    def validate_types(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None or f.name == "command":
                continue
            want = _TYPES[f.name]
            if want is float and isinstance(v, int) and not isinstance(v, bool):
                setattr(self, f.name, float(v))
            elif want is float and isinstance(v, str):
                # lets the file hold "inf"/"1e3" strings as well
                try:
                    setattr(self, f.name, float(v))
                except ValueError:
                    raise ConfigError(f"{f.name} must be a number") from None
            elif not isinstance(v, want) or (want is int and isinstance(v, bool)):
                raise ConfigError(f"{f.name} must be of type {want.__name__}")


_TYPES = {
    "spec": dict, "x_lo": float, "x_hi": float, "n": int, "points": list, "mode": str,
    "case": str, "epsilon": float, "eta": float, "delta": float, "n_probes": int, "strict": bool,
    "pdf0_probe": bool, "box": list, "resolution": list, "functional": str, "r_lo": float,
    "r_hi": float, "step": float, "symmetrized": bool, "r": float, "N": int, "precision": str,
    "output": str, "workers": int,
}

ALLOWED = {
    "density": {"spec", "x_lo", "x_hi", "n", "output"},
    "cauchy-eval": {"spec", "points", "mode", "output"},
    "ui-check": {"spec", "case", "epsilon", "eta", "delta", "n_probes", "strict", "pdf0_probe", "output"},
    "domain-scan": {"spec", "box", "resolution", "workers", "output"},
    "cumulant-scan": {"functional", "r_lo", "r_hi", "step", "symmetrized", "workers", "output"},
    "moments": {"spec", "r", "N", "symmetrized", "precision", "output"},
}


# ---------------------------------------------------------------------------
# argument parsing


def _complex_arg(s: str) -> complex:
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {s!r}") from None


def _bool_flag(p, name, help_):
    p.add_argument(f"--{name}", dest=name.replace("-", "_"), action=argparse.BooleanOptionalAction,
                   default=None, help=help_)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="freelab", description="Numerical free-probability lab.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, spec=True, output_help="output file (default: stdout)"):
        p.add_argument("--config", help="JSON config file; flags override its fields")
        if spec:
            p.add_argument("--spec", help="distribution spec as a JSON string or @file")
        p.add_argument("--output", "-o", help=output_help)

    p = sub.add_parser("density", help="density on a grid, as CSV")
    common(p)
    p.add_argument("--x-lo", type=float)
    p.add_argument("--x-hi", type=float)
    p.add_argument("--n", type=int)

    p = sub.add_parser("cauchy-eval", help="Cauchy transform and its inverse at points")
    common(p)
    p.add_argument("--points", nargs="+", type=_complex_arg)
    p.add_argument("--mode", choices=("gtilde", "sheet", "inverse", "voiculescu"))

    p = sub.add_parser("ui-check", help="winding and sign checks; JSON report")
    common(p)
    p.add_argument("--case", choices=contour.CASES)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n-probes", type=int)
    _bool_flag(p, "strict", "exit 4 when the theorem hypotheses fail")
    _bool_flag(p, "pdf0-probe", "add the G(iy) probe for symmetric laws")

    p = sub.add_parser("domain-scan", help="component of the preimage of the lower half-plane")
    common(p, output_help="output prefix (default: domain)")
    p.add_argument("--box", nargs=4, type=float, metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--resolution", nargs=2, type=int, metavar=("NX", "NY"))
    p.add_argument("--workers", type=int)

    p = sub.add_parser("cumulant-scan", help="Hankel functional of cumulants over r")
    common(p, spec=False, output_help="output prefix (default: stdout CSV, brackets on stderr)")
    p.add_argument("--functional")
    p.add_argument("--r-lo", type=float)
    p.add_argument("--r-hi", type=float)
    p.add_argument("--step", type=float)
    _bool_flag(p, "symmetrized", "use moments of |S|^r sign S (default: on for sym_* ids)")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("moments", help="moments and free cumulants, as CSV")
    common(p)
    p.add_argument("--r", type=float, help="power of MP(1,1) (instead of --spec)")
    p.add_argument("--N", type=int)
    _bool_flag(p, "symmetrized", "symmetrized moment sequence")
    p.add_argument("--precision", help="double, exact or a digit count")
    return ap


def _load_spec_arg(s: str) -> dict:
    text = Path(s[1:]).read_text() if s.startswith("@") else s
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--spec is not valid JSON: {exc}") from None


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    base = {"command": ns.command}
    if getattr(ns, "config", None):
        try:
            d = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        if d.get("command", ns.command) != ns.command:
            raise ConfigError(f"config is for {d['command']!r}, not {ns.command!r}")
        base.update(d)
    for k, v in vars(ns).items():
        if k in ("command", "config") or v is None:
            continue
        if k == "spec":
            v = _load_spec_arg(v)
        elif k == "points":
            v = [[c.real, c.imag] for c in v]
        elif k in ("box", "resolution"):
            v = list(v)
        base[k] = v
    return RunConfig.from_dict(base)


# ---------------------------------------------------------------------------
# commands


def _spec(cfg: RunConfig) -> measures.DistributionSpec:
    if cfg.spec is None:
        raise ConfigError("a distribution spec is required (--spec)")
    return measures.spec_from_dict(cfg.spec)


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_text(path, text: str):
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def _csv_text(header, rows, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_density(cfg: RunConfig) -> int:
    spec = _spec(cfg)
    info = measures.support(spec)
    lo = cfg.x_lo if cfg.x_lo is not None else info.intervals[0][0]
    hi = cfg.x_hi if cfg.x_hi is not None else info.intervals[-1][1]
    n = cfg.n if cfg.n is not None else 201
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo or n < 1:
        raise ConfigError("density grid needs finite x_lo <= x_hi and n >= 1")
    xs = np.linspace(lo, hi, n)
    ends = {e for iv in info.intervals for e in iv if math.isfinite(e)}
    with np.errstate(all="ignore"):
        f = measures.density_array(spec, xs)
    rows = []
    for x, v in zip(xs, f):
        # support endpoints and the atom location carry no density value
        if x in ends or (x == 0 and info.atom_at_zero > 0) or not math.isfinite(v):
            continue
        rows.append((float(x), float(v)))
    comments = [f"atom_at_zero {fmt(info.atom_at_zero)}"]
    _write_text(cfg.output, _csv_text(["x", "density"], rows, comments))
    return EXIT_OK


def cmd_cauchy_eval(cfg: RunConfig) -> int:
    spec = _spec(cfg)
    mode = cfg.mode or "gtilde"
    if not cfg.points:
        raise ConfigError("no points given")
    try:
        pts = [complex(p[0], p[1]) for p in cfg.points]
    except (TypeError, IndexError):
        raise ConfigError("points must be [re, im] pairs") from None
    rows = []
    for z in pts:
        if mode == "gtilde":
            v = cauchy.gtilde(spec, z)
        elif mode == "sheet":
            v = cauchy.g_lower(spec, z) if z.imag < 0 else cauchy.gtilde(spec, z)
        elif mode == "inverse":
            if not spec.transforms and isinstance(spec.kind, (measures.Semicircle, measures.FreePoisson)):
                v = cauchy.g_inverse_closed(spec, z)
            else:
                v = cauchy.g_inverse_numeric(spec, z, 1 / z)
        elif mode == "voiculescu":
            v = cauchy.voiculescu(spec, z)
        else:
            raise ConfigError(f"unknown mode {mode!r}")
        rows.append((z.real, z.imag, v.real, v.imag))
    _write_text(cfg.output, _csv_text(["re", "im", "value_re", "value_im"], rows, [f"mode {mode}"]))
    return EXIT_OK


def cmd_ui_check(cfg: RunConfig) -> int:
    spec = _spec(cfg)
    case = cfg.case or ("sym" if spec.is_symmetric else None)
    if case is None:
        raise ConfigError("--case is required for non-symmetric laws")
    kw = dict(epsilon=cfg.epsilon if cfg.epsilon is not None else 1e-3,
              n_probes=cfg.n_probes if cfg.n_probes is not None else 200,
              eta=cfg.eta, delta=cfg.delta)
    if case == "sym":
        rep = contour.ui_s_check(spec, **kw)
    else:
        rep = contour.ui_check(spec, case, **kw)
    out = rep.to_dict()
    if cfg.pdf0_probe:
        out["extra"]["pdf0_probe"] = contour.lemma_pdf0_probe(spec)
    _write_text(cfg.output, _json_text(_jsonable(out)))
    if cfg.strict and rep.status == "hypothesis_violation":
        return EXIT_STRICT
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_domain_scan(cfg: RunConfig) -> int:
    spec = _spec(cfg)
    box = tuple(cfg.box) if cfg.box is not None else (-0.2, 1.6, -1.2, 0.4)
    res = tuple(cfg.resolution) if cfg.resolution is not None else (400, 400)
    if len(box) != 4 or len(res) != 2:
        raise ConfigError("box needs 4 numbers and resolution 2")
    grid = contour.domain_scan(spec, box, res, workers=_workers(cfg))
    prefix = cfg.output or "domain"
    code = grid.mask.astype(np.uint8) + grid.component.astype(np.uint8)
    buf = io.StringIO()
    buf.write("# rows: Im from top to bottom; cols: Re from left to right; 0 outside, 1 mask, 2 component\n")
    np.savetxt(buf, code, fmt="%d", delimiter=",")
    Path(f"{prefix}_mask.csv").write_text(buf.getvalue())
    contour.write_pgm(f"{prefix}.pgm", np.where(grid.component, 255, np.where(grid.mask, 128, 0)))
    Path(f"{prefix}_summary.json").write_text(_json_text(_jsonable(grid.summary())))
    return EXIT_OK


def cmd_cumulant_scan(cfg: RunConfig) -> int:
    fid = cfg.functional or "h22"
    r_lo = cfg.r_lo if cfg.r_lo is not None else 0.2
    r_hi = cfg.r_hi if cfg.r_hi is not None else 1.5
    step = cfg.step if cfg.step is not None else 0.005
    workers = _workers(cfg)
    brackets = cumulants.scan_sign(fid, r_lo, r_hi, step, cfg.symmetrized, workers=workers)
    rs, vals = cumulants.scan_values(fid, r_lo, r_hi, step, cfg.symmetrized, workers=workers)
    sym = cumulants.default_symmetrized(fid) if cfg.symmetrized is None else cfg.symmetrized
    csv_text = _csv_text(["r", fid], zip(rs, vals))
    doc = {
        "functional": fid,
        "symmetrized": sym,
        "r_lo": r_lo,
        "r_hi": r_hi,
        "step": step,
        "brackets": [{"interval": list(b.interval), "refined_root": b.refined_root, "tol": b.tol}
                     for b in brackets],
        "negative_runs": [list(iv) for iv in cumulants.negative_intervals(rs, vals)],
    }
    if cfg.output:
        Path(f"{cfg.output}.csv").write_text(csv_text)
        Path(f"{cfg.output}_brackets.json").write_text(_json_text(doc))
    else:
        sys.stdout.write(csv_text)
        sys.stderr.write(_json_text(doc))
    return EXIT_OK


def cmd_moments(cfg: RunConfig) -> int:
    N = cfg.N if cfg.N is not None else 8
    prec = cfg.precision or "double"
    if prec not in ("double", "exact"):
        try:
            prec = int(prec)
        except ValueError:
            raise ConfigError("precision must be double, exact or an integer digit count") from None
    if cfg.spec is not None and cfg.r is not None:
        raise ConfigError("give either --spec or --r, not both")
    if cfg.spec is not None:
        spec = _spec(cfg)
        vals = []
        for n in range(1, N + 1):
            try:
                vals.append(measures.moment(spec, n))
            except measures.DivergentMomentError:
                break
        m = cumulants.MomentSequence(tuple(vals), "quadrature")
        if not vals:
            raise DomainError("the first moment already diverges")
    else:
        r = cfg.r if cfg.r is not None else 1.0
        m = cumulants.moments_mp_power(r, N, bool(cfg.symmetrized), precision=prec)
    K = cumulants.free_cumulants(m)
    rows = [(n, _num(mv), _num(kv)) for n, (mv, kv) in enumerate(zip(m.values, K.values), start=1)]
    _write_text(cfg.output, _csv_text(["n", "moment", "free_cumulant"], rows))
    return EXIT_OK


def _num(v):
    from fractions import Fraction

    if isinstance(v, Fraction):
        return str(v)
    return fmt(v)


def _workers(cfg: RunConfig) -> int:
    w = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    if w < 1:
        raise ConfigError("workers must be >= 1")
    return w


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


HANDLERS = {
    "density": cmd_density,
    "cauchy-eval": cmd_cauchy_eval,
    "ui-check": cmd_ui_check,
    "domain-scan": cmd_domain_scan,
    "cumulant-scan": cmd_cumulant_scan,
    "moments": cmd_moments,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = config_from_args(ns)
        return HANDLERS[cfg.command](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"freelab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, ZeroDivisionError, OverflowError) as exc:
        print(f"freelab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"freelab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
