"""Command-line front end.

    lifshits constants --alpha 4 --beta 4 --gamma 4 --g 1 --rho 1 --B 1
    lifshits report --out run1 --svg
    lifshits --config run.json

Every run writes ``report.json`` (resolved config, version, results and
errors) into the output directory, plus the command's CSV files.  Exit
codes: 0 success, 2 usage error, 3 validation or certificate failure,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from typing import Optional

from . import __version__
from .errors import (
    CertificateError,
    ConvergenceError,
    DomainError,
    FitError,
    ParameterError,
    ResolutionWarning,
    ResourceError,
)
from .params_model import (
    DecayParams,
    derive,
    isotropic_constant,
    laplace_constant_closed,
    lifshits_constant_legendre,
    lifshits_constant_paper,
    theorem_bracket,
    validate,
)

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3, 4

COMMANDS = ("constants", "verify-integral", "bounds-curve", "mc-campbell", "mc-idos",
            "lemma1", "tauberian-oracle", "report")
PARAM_KEYS = ("g", "alpha", "beta", "gamma", "rho", "B", "epsilon")
DEFAULT_PARAMS = {"g": 1.0, "alpha": 4.0, "beta": 4.0, "gamma": 4.0, "rho": 1.0,
                  "B": 1.0, "epsilon": 1.0}
CONFIG_SCHEMA = {
    "params": set(PARAM_KEYS) | {"C", "mu"},
    "command": None,
    "mc": {"seed", "n_samples", "radius", "workers", "t"},
    "grids": {"t_grid", "E_grid", "x", "sweep"},
    "output": {"dir", "svg"},
}
# (alpha, beta, gamma) spanning the admissible window
SWEEP = ((4.0, 4.0, 4.0), (4.0, 2.0, 5.0), (4.0, 0.0, 4.0), (6.0, 1.0, 3.0), (3.5, 3.5, 3.5))
DEFAULT_BOUNDS_GRID = (1e3, 1e4, 1e5, 1e6)
DEFAULT_E_GRID = (1.0, 2.0, 3.0, 5.0)
DEFAULT_CAMPBELL_T = 0.01


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    params: DecayParams
    command: str
    seed: int = 0
    n_samples: int = 1000
    radius: Optional[float] = None
    workers: int = 1
    t: Optional[float] = None
    t_grid: Optional[list] = None
    E_grid: Optional[list] = None
    x: list = field(default_factory=lambda: [1.0, 0.0, 0.0])
    sweep: bool = False
    C: Optional[float] = None
    mu: Optional[float] = None
    output_dir: str = "out"
    emit_svg: bool = False

    def to_dict(self) -> dict:
        params = self.params.to_dict()
        params.update({"C": self.C, "mu": self.mu})
        return {
            "params": params,
            "command": self.command,
            "mc": {"seed": self.seed, "n_samples": self.n_samples, "radius": self.radius,
                   "workers": self.workers, "t": self.t},
            "grids": {"t_grid": self.t_grid, "E_grid": self.E_grid, "x": self.x,
                      "sweep": self.sweep},
            "output": {"dir": self.output_dir, "svg": self.emit_svg},
        }


def _grid(text: str):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lifshits", description="Lifshits-tail constants, bounds and checks.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with keys params, command, mc, grids, output")
    for k in PARAM_KEYS:
        p.add_argument(f"--{k}", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n", dest="n_samples", type=int, default=None, help="Monte Carlo samples")
    p.add_argument("--radius", type=float, default=None, help="sampling ball radius")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--t-grid", dest="t_grid", type=_grid, default=None)
    p.add_argument("--E-grid", dest="E_grid", type=_grid, default=None)
    p.add_argument("--x", type=_grid, default=None, help="point for lemma1, e.g. 1,0,0")
    p.add_argument("--sweep", action="store_true", default=None,
                   help="verify-integral over the built-in parameter sweep")
    p.add_argument("--C", type=float, default=None, help="tauberian-oracle constant")
    p.add_argument("--mu", type=float, default=None, help="tauberian-oracle exponent")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--svg", action="store_true", default=None, help="also write SVG plots")
    return p


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}")
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    for key, value in doc.items():
        if key not in CONFIG_SCHEMA:
            raise UsageError(f"unknown config key {key!r}")
        allowed = CONFIG_SCHEMA[key]
        if allowed is None:
            continue
        if not isinstance(value, dict):
            raise UsageError(f"config key {key!r} must be an object")
        for sub in value:
            if sub not in allowed:
                raise UsageError(f"unknown config key {key}.{sub!r}")
    return doc


def _check_grid(name, vals):
    if vals is None:
        return None
    vals = [float(v) for v in vals]
    if not vals or any(not math.isfinite(v) or v <= 0 for v in vals):
        raise UsageError(f"{name} must be a non-empty list of positive numbers")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise UsageError(f"{name} must be strictly increasing")
    return vals


def parse_config(argv=None) -> RunConfig:
    """Merge the optional config file with the flags; flags win."""
    ns = build_parser().parse_args(argv)
    doc = _load_config(ns.config) if ns.config else {}
    fparams = doc.get("params", {})
    mc = doc.get("mc", {})
    grids = doc.get("grids", {})
    out = doc.get("output", {})

    def pick(flag, file_value, default):
        return flag if flag is not None else (file_value if file_value is not None else default)

    command = pick(ns.command, doc.get("command"), None)
    if command is None:
        raise UsageError("no command given")
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    values = {k: pick(getattr(ns, k), fparams.get(k), DEFAULT_PARAMS[k]) for k in PARAM_KEYS}
    for k, v in values.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise UsageError(f"parameter {k} must be a number, got {v!r}")
    try:
        params = DecayParams(**values)
    except ParameterError as exc:
        raise UsageError(str(exc))
    cfg = RunConfig(
        params=params,
        command=command,
        seed=int(pick(ns.seed, mc.get("seed"), 0)),
        n_samples=int(pick(ns.n_samples, mc.get("n_samples"), 1000)),
        radius=pick(ns.radius, mc.get("radius"), None),
        workers=int(pick(ns.workers, mc.get("workers"), 1)),
        t=pick(ns.t, mc.get("t"), None),
        t_grid=_check_grid("t_grid", pick(ns.t_grid, grids.get("t_grid"), None)),
        E_grid=_check_grid("E_grid", pick(ns.E_grid, grids.get("E_grid"), None)),
        x=[float(v) for v in pick(ns.x, grids.get("x"), [1.0, 0.0, 0.0])],
        sweep=bool(pick(ns.sweep, grids.get("sweep"), False)),
        C=pick(ns.C, fparams.get("C"), None),
        mu=pick(ns.mu, fparams.get("mu"), None),
        output_dir=str(pick(ns.out, out.get("dir"), "out")),
        emit_svg=bool(pick(ns.svg, out.get("svg"), False)),
    )
    if cfg.n_samples < 1:
        raise UsageError("--n must be >= 1")
    if cfg.workers < 1:
        raise UsageError("--workers must be >= 1")
    if cfg.radius is not None and not cfg.radius > 0:
        raise UsageError("--radius must be > 0")
    if cfg.t is not None and not (math.isfinite(cfg.t) and cfg.t > 0):
        raise UsageError("--t must be > 0")
    if len(cfg.x) != 3:
        raise UsageError("--x needs three comma-separated coordinates")
    for name in ("C", "mu"):
        v = getattr(cfg, name)
        if v is not None and not v > 0:
            raise UsageError(f"--{name} must be > 0")
    return cfg


# --------------------------------------------------------------------------
# output helpers


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def write_csv(path: str, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(float(v)) if hasattr(v, "dtype") else _fmt(v) for v in row])
    _atomic_write(path, buf.getvalue())


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "dtype"):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


class _Run:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.results: dict = {}
        self.outputs: list[str] = []
        self.warnings: list[str] = []

    def path(self, name: str) -> str:
        self.outputs.append(name)
        return os.path.join(self.cfg.output_dir, name)

    def csv(self, name, header, rows):
        write_csv(self.path(name), header, rows)


def _require(params: DecayParams, run: _Run, strict: bool = True):
    rep = validate(params)
    run.results["validity"] = {"integrable": rep.integrable, "theorem_applies": rep.theorem_applies,
                               "zero_field_ok": rep.zero_field_ok, "messages": rep.messages}
    if strict and not rep.theorem_applies:
        raise ValidationFailure("; ".join(rep.messages) or "parameters outside the theorem's hypotheses")
    if not rep.integrable:
        raise ValidationFailure("; ".join(rep.messages))


# --------------------------------------------------------------------------
# commands


def _constants(run: _Run):
    p = run.cfg.params
    _require(p, run)
    d = derive(p)
    a = laplace_constant_closed(p)
    res = {"eta": d.eta, "mu": d.mu, "nu": d.nu, "sigma": d.sigma, "bracket": theorem_bracket(p),
           "a_closed": a, "C_paper": lifshits_constant_paper(p),
           "C_legendre": lifshits_constant_legendre(a, d.mu)}
    if p.isotropic and 3.0 < p.alpha < 5.0:
        res["C_isotropic"] = isotropic_constant(p.alpha, p.g, p.rho)
    run.results.update(res)
    run.csv("constants.csv", ("quantity", "value"), list(res.items()))


def _verify_integral(run: _Run):
    from .numerics.integrals import I_infinity

    base = run.cfg.params
    sets = ([DecayParams(base.g, a, b, c, base.rho, base.B, base.epsilon) for a, b, c in SWEEP]
            if run.cfg.sweep else [base])
    rows = []
    for p in sets:
        _require(p, run)
        a = laplace_constant_closed(p)
        q = p.rho * I_infinity(p).require("I_infinity").value
        rows.append((p.alpha, p.beta, p.gamma, p.g, a, q, abs(q - a) / a))
    run.results["rows"] = [dict(zip(("alpha", "beta", "gamma", "g", "a_closed", "a_quadrature",
                                     "rel_dev"), r)) for r in rows]
    run.results["max_rel_dev"] = max(r[6] for r in rows)
    run.results["all_below_1e-6"] = all(r[6] < 1e-6 for r in rows)
    run.csv("verify_integral.csv", ("alpha", "beta", "gamma", "g", "a_closed", "a_quadrature",
                                   "rel_dev"), rows)


def _t_grid(run: _Run, default):
    if run.cfg.t_grid is not None:
        return run.cfg.t_grid
    if run.cfg.t is not None:
        return [run.cfg.t]
    return list(default)


def _bounds_curve(run: _Run, name: str = "bounds_curve"):
    from .asymptotics import extrapolate_limit
    from .bounds import sandwich_curve
    from .numerics.integrals import I_infinity

    p = run.cfg.params
    _require(p, run)
    ts = _t_grid(run, DEFAULT_BOUNDS_GRID)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionWarning)
        pts = sandwich_curve(p, ts, workers=run.cfg.workers)
    run.warnings.extend(str(w.message) for w in caught if issubclass(w.category, ResolutionWarning))
    limit = -p.rho * I_infinity(p).require("I_infinity").value
    out = {"limit": limit, "ordered": all(pt.ordered for pt in pts),
           "points": [{"t": pt.t, "J": pt.J, "J_error": pt.J_error, "I_t": pt.I_t} for pt in pts]}
    if len(pts) >= 3 and ts[-1] / ts[0] >= 100.0:
        eta = derive(p).eta
        for side in ("lower", "upper"):
            est = extrapolate_limit([(pt.t, getattr(pt, f"scaled_{side}")) for pt in pts], eta)
            out[f"extrapolated_{side}"] = {"value": est.value, "error": est.error_estimate,
                                           "exponent": est.exponent}
    run.results[name] = out
    run.csv(f"{name}.csv", ("t", "lower_log", "upper_log", "scaled_lower", "scaled_upper"),
            [(pt.t, pt.lower_log, pt.upper_log, pt.scaled_lower, pt.scaled_upper) for pt in pts])
    if run.cfg.emit_svg:
        from .plotting import plot_bounds_curve
        plot_bounds_curve(pts, limit, run.path(f"{name}.svg"))


def _mc_campbell(run: _Run, name: str = "mc_campbell"):
    from .montecarlo import CAMPBELL_CERT, MCConfig, campbell_laplace_mc
    from .potential import certified_radius

    p = run.cfg.params
    _require(p, run, strict=False)
    t = run.cfg.t if run.cfg.t is not None else DEFAULT_CAMPBELL_T
    R = run.cfg.radius
    if R is None:
        R = certified_radius(p, 0.9 * CAMPBELL_CERT / t)
    mc = MCConfig(run.cfg.seed, run.cfg.n_samples, R, run.cfg.workers)
    res = campbell_laplace_mc(None, p, t, mc)
    run.results[name] = {"t": t, "radius": R, "n": res.n, "mean": res.mean, "std_err": res.std_err,
                         "reference": res.reference, "z_score": res.z_score,
                         "tail_bound": res.tail_bound, "within_3_sigma": abs(res.z_score) <= 3.0}
    run.csv(f"{name}.csv", ("t", "mc_mean", "std_err", "reference", "z_score"),
            [(t, res.mean, res.std_err, res.reference, res.z_score)])


def _mc_idos(run: _Run):
    from .montecarlo import IDOS_CERT, MCConfig, classical_idos_curve
    from .potential import certified_radius

    p = run.cfg.params
    _require(p, run, strict=False)
    Es = run.cfg.E_grid or list(DEFAULT_E_GRID)
    R = run.cfg.radius
    if R is None:
        R = certified_radius(p, IDOS_CERT * min(Es))
    mc = MCConfig(run.cfg.seed, run.cfg.n_samples, R, run.cfg.workers)
    res = classical_idos_curve(None, p, Es, mc)
    run.results["mc_idos"] = {"radius": R, "tail_bound": res[0].tail_bound, "rows": [
        {"E": E, "mean": r.mean, "std_err": r.std_err, "free_value": r.reference} for E, r in zip(Es, res)]}
    run.csv("mc_idos.csv", ("E", "mean", "std_err", "free_value"),
            [(E, r.mean, r.std_err, r.reference) for E, r in zip(Es, res)])


def _lemma1(run: _Run):
    from .bounds import lemma1_envelope, lemma1_ratio

    p = run.cfg.params
    _require(p, run)
    ts = _t_grid(run, DEFAULT_BOUNDS_GRID)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionWarning)
        ratios = [lemma1_ratio(run.cfg.x, t, p) for t in ts]
    run.warnings.extend(str(w.message) for w in caught if issubclass(w.category, ResolutionWarning))
    env = [lemma1_envelope(run.cfg.x, t, p) for t in ts]
    run.results["lemma1"] = {"x": run.cfg.x, "rows": [
        {"t": t, "ratio": r, "envelope": e} for t, r, e in zip(ts, ratios, env)]}
    run.csv("lemma1.csv", ("t", "ratio"), list(zip(ts, ratios)))


def _oracle_rows(run: _Run, C: float, mu: float, name: str, ts):
    from .asymptotics import extrapolate_limit, tauberian_forward_oracle
    from .params_model import saddle_forward

    rows = tauberian_forward_oracle(C, mu, ts)
    info = {"C": C, "mu": mu, "saddle_value": saddle_forward(C, mu), "last_scaled": rows[-1][2]}
    if len(rows) >= 3 and ts[-1] / ts[0] >= 100.0:
        est = extrapolate_limit([(t, s) for t, _, s in rows])
        info["extrapolated"] = {"value": est.value, "error": est.error_estimate}
    run.csv(f"{name}.csv", ("t", "neg_log_L", "scaled"), rows)
    return rows, info


def _tauberian(run: _Run):
    from .asymptotics import DEFAULT_ORACLE_GRID

    C, mu = run.cfg.C, run.cfg.mu
    source = "flags"
    if C is None or mu is None:
        p = run.cfg.params
        _require(p, run)
        d = derive(p)
        mu = d.mu if mu is None else mu
        C = lifshits_constant_legendre(laplace_constant_closed(p), d.mu) if C is None else C
        source = "params (C_legendre)"
    ts = _t_grid(run, DEFAULT_ORACLE_GRID)
    rows, info = _oracle_rows(run, C, mu, "tauberian_oracle", ts)
    info["source"] = source
    run.results["tauberian_oracle"] = info
    if run.cfg.emit_svg:
        from .plotting import plot_oracle
        plot_oracle({f"C={C:.4g}, mu={mu:.4g}": rows}, run.path("tauberian_oracle.svg"),
                    info["saddle_value"])


def _report(run: _Run):
    from .asymptotics import DEFAULT_ORACLE_GRID, consistency_report

    p = run.cfg.params
    _require(p, run)
    rep = consistency_report(p, DEFAULT_ORACLE_GRID)
    run.results["consistency"] = rep.to_dict()
    curves = {}
    for label, C in (("C_paper", rep.C_paper), ("C_legendre", rep.C_legendre)):
        rows, info = _oracle_rows(run, C, rep.mu, f"tauberian_oracle_{label}", list(DEFAULT_ORACLE_GRID))
        run.results[f"tauberian_oracle_{label}"] = info
        curves[label] = rows
    _bounds_curve(run)
    _mc_campbell(run)
    if run.cfg.emit_svg:
        from .plotting import plot_oracle
        plot_oracle(curves, run.path("tauberian_oracle.svg"), rep.a_closed)


HANDLERS = {
    "constants": _constants,
    "verify-integral": _verify_integral,
    "bounds-curve": _bounds_curve,
    "mc-campbell": _mc_campbell,
    "mc-idos": _mc_idos,
    "lemma1": _lemma1,
    "tauberian-oracle": _tauberian,
    "report": _report,
}


def run(cfg: RunConfig) -> int:
    """Dispatch ``cfg.command``; always writes ``report.json``."""
    os.makedirs(cfg.output_dir, exist_ok=True)
    r = _Run(cfg)
    errors = []
    try:
        HANDLERS[cfg.command](r)
        code = EXIT_OK
    except (ValidationFailure, DomainError, CertificateError) as exc:
        code = EXIT_INVALID
        errors.append({"type": type(exc).__name__, "message": str(exc)})
    except (ConvergenceError, FitError, ResourceError, ArithmeticError) as exc:
        code = EXIT_NUMERIC
        errors.append({"type": type(exc).__name__, "message": str(exc)})
    doc = {
        "version": __version__,
        "command": cfg.command,
        "exit_code": code,
        "config": cfg.to_dict(),
        "results": r.results,
        "warnings": r.warnings,
        "errors": errors,
        "outputs": sorted(r.outputs),
    }
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"
    _atomic_write(os.path.join(cfg.output_dir, "report.json"), text)
    for e in errors:
        print(f"error: {e['type']}: {e['message']}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
