"""Scenario files, output writers and the batch runner.

A scenario is a JSON document, for example::

    {"game": "simple_motion", "rho": 2, "sigma": 1, "l": 0,
     "z0": [3, 0], "evader": {"kind": "zero"}}

Pontryagin scenarios carry ``alpha, beta, b, c, rho, sigma`` and
``z0 = {"z1": [...], "z2": [...], "z3": [...]}``.  General games carry the
matrices ``A, B, C``, the exponent ``p``, ``M0_basis``, ``l`` and a kernel
``F`` (a constant matrix or ``"solve"``); they can be verified but not
simulated.
"""
from __future__ import annotations

import concurrent.futures
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import pontryagin as pg
from . import simple_motion as sm
from .errors import AssumptionViolated, BadSpec, ConfigError, ParseError, PursuitError, ValidationError
from .evaders import EvaderSpec
from .game import GameSpec, TerminalSet, make_projector
from .simulate import RunReport, Trajectory, run_pontryagin, run_simple_motion

GAMES = ("simple_motion", "pontryagin", "general")
EMIT_ALL = ("trajectory_csv", "summary_json", "plot_data")
DT_DIVISOR = 5000
THREADS_ENV = "PURSUIT_RF_THREADS"

_PARAM_FIELDS = {
    "simple_motion": ("rho", "sigma", "l"),
    "pontryagin": ("alpha", "beta", "b", "c", "rho", "sigma"),
    "general": ("A", "B", "C", "p", "rho", "sigma", "M0_basis", "l", "F"),
}


@dataclass
class ScenarioConfig:
    game: str
    params: dict
    z0: object
    evader: EvaderSpec = field(default_factory=EvaderSpec)
    dt: Optional[float] = None
    output_dir: Optional[str] = None
    seed: Optional[int] = None
    emit: tuple = EMIT_ALL
    name: str = "scenario"
    y0: Optional[list] = None

    # derived objects, rebuilt from the fields above
    def simple_params(self) -> sm.SimpleMotionParams:
        return sm.SimpleMotionParams(self.params["rho"], self.params["sigma"],
                                     self.params["l"], n=len(self.z0))

    def pontryagin_params(self) -> pg.PontryaginParams:
        P = self.params
        return pg.PontryaginParams(P["alpha"], P["beta"], P["b"], P["c"], P["rho"], P["sigma"],
                                   n=len(self.z0["z1"]))

    def pontryagin_state(self) -> pg.PontryaginState:
        return pg.PontryaginState(self.z0["z1"], self.z0["z2"], self.z0["z3"])

    def general_game(self) -> GameSpec:
        P = self.params
        return GameSpec(P["A"], P["B"], P["C"], P["p"], P["rho"], P["sigma"],
                        TerminalSet(P["M0_basis"], P["l"]))

    def bound(self) -> float:
        if self.game == "simple_motion":
            return sm.capture_bound(self.z0, self.params["rho"], self.params["sigma"], self.params["l"])
        if self.game == "pontryagin":
            return pg.guaranteed_time_theta(self.pontryagin_state(), self.pontryagin_params())
        raise ConfigError("general games have no capture-time bound")

    def step(self) -> float:
        return self.dt if self.dt is not None else self.bound() / DT_DIVISOR

    def to_dict(self) -> dict:
        d = {"game": self.game, "name": self.name}
        d.update(self.params)
        d["z0"] = self.z0
        if self.y0 is not None:
            d["y0"] = self.y0
        d["evader"] = self.evader.to_dict()
        d["dt"] = self.dt
        d["output_dir"] = self.output_dir
        d["seed"] = self.seed
        d["emit"] = list(self.emit)
        return d


def _number(doc, key, *, positive=False, nonneg=False, default=None):
    if key not in doc:
        if default is not None:
            return default
        raise ValidationError(key, "missing required field")
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValidationError(key, f"expected a number, got {val!r}")
    val = float(val)
    if not np.isfinite(val):
        raise ValidationError(key, "must be finite")
    if positive and not val > 0:
        raise ValidationError(key, f"must be positive, got {val}")
    if nonneg and not val >= 0:
        raise ValidationError(key, f"must be nonnegative, got {val}")
    return val


def _vector(doc, key, n=None):
    if key not in doc:
        raise ValidationError(key, "missing required field")
    val = doc[key]
    if not isinstance(val, list) or not val or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in val
    ):
        raise ValidationError(key, f"expected a nonempty array of numbers, got {val!r}")
    if n is not None and len(val) != n:
        raise ValidationError(key, f"expected length {n}, got {len(val)}")
    return [float(x) for x in val]


def _matrix(doc, key):
    val = doc.get(key)
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(key, "expected a matrix (array of arrays)") from None
    if arr.ndim != 2:
        raise ValidationError(key, f"expected a 2-d array, got {np.ndim(arr)}-d")
    return arr.tolist()


def _parse_evader(doc):
    ev = doc.get("evader", {"kind": "zero"})
    if not isinstance(ev, dict):
        raise ValidationError("evader", "expected an object")
    params = dict(ev.get("params", {}))
    for k, v in ev.items():
        if k not in ("kind", "params", "budget_fraction"):
            params[k] = v
    try:
        return EvaderSpec(ev.get("kind", "zero"), params, float(ev.get("budget_fraction", 1.0)))
    except BadSpec as exc:
        raise ValidationError("evader", str(exc)) from None


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Validate a decoded scenario document."""
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "scenario must be a JSON object")
    game = doc.get("game")
    if game not in GAMES:
        raise ValidationError("game", f"expected one of {GAMES}, got {game!r}")
    emit = doc.get("emit") or list(EMIT_ALL)
    bad = set(emit) - set(EMIT_ALL)
    if bad:
        raise ValidationError("emit", f"unknown outputs {sorted(bad)}")
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ValidationError("seed", f"expected an integer, got {seed!r}")
    dt = doc.get("dt")
    if dt is not None:
        dt = _number(doc, "dt", positive=True)
    common = dict(
        evader=_parse_evader(doc), dt=dt, output_dir=doc.get("output_dir"), seed=seed,
        emit=tuple(e for e in EMIT_ALL if e in emit), name=str(doc.get("name", "scenario")),
    )
    if common["evader"].kind == "seeded_random" and "seed" not in common["evader"].params:
        if seed is None:
            raise ValidationError("evader.params.seed", "seeded_random evader needs a seed")
        common["evader"] = EvaderSpec("seeded_random", {**common["evader"].params, "seed": seed},
                                      common["evader"].budget_fraction)

    if game == "simple_motion":
        rho = _number(doc, "rho", positive=True)
        sigma = _number(doc, "sigma", nonneg=True)
        l = _number(doc, "l", nonneg=True, default=0.0)
        if not rho > sigma:
            raise ValidationError("rho", f"rho must exceed sigma: {rho} <= {sigma}")
        z0 = _vector(doc, "z0")
        y0 = _vector(doc, "y0", len(z0)) if "y0" in doc else None
        if not np.linalg.norm(z0) > l:
            raise ValidationError("z0", f"initial state inside terminal set: |z0| = {np.linalg.norm(z0):.6g} <= l = {l}")
        cfg = ScenarioConfig(game, {"rho": rho, "sigma": sigma, "l": l}, z0, y0=y0, **common)
    elif game == "pontryagin":
        P = {k: _number(doc, k, positive=True) for k in ("alpha", "beta", "b", "c", "rho")}
        P["sigma"] = _number(doc, "sigma", nonneg=True)
        zd = doc.get("z0")
        if not isinstance(zd, dict):
            raise ValidationError("z0", 'expected {"z1": [...], "z2": [...], "z3": [...]}')
        z1 = _vector(zd, "z1")
        z0 = {"z1": z1, "z2": _vector(zd, "z2", len(z1)), "z3": _vector(zd, "z3", len(z1))}
        if np.linalg.norm(z1) == 0:
            raise ValidationError("z0.z1", "initial state inside terminal set: z1 = 0")
        nu = (P["c"] / P["b"]) * max(P["alpha"] / P["beta"], 1.0)
        if not P["rho"] > P["sigma"] * nu:
            raise ValidationError("rho", f"rho must exceed sigma * nu: {P['rho']} <= {P['sigma'] * nu:.6g}")
        cfg = ScenarioConfig(game, P, z0, **common)
    else:
        P = {k: _matrix(doc, k) for k in ("A", "B", "C")}
        P["p"] = _number(doc, "p", default=2.0)
        if not P["p"] > 1:
            raise ValidationError("p", f"must exceed 1, got {P['p']}")
        P["rho"] = _number(doc, "rho", positive=True)
        P["sigma"] = _number(doc, "sigma", nonneg=True)
        P["l"] = _number(doc, "l", nonneg=True, default=0.0)
        P["M0_basis"] = [list(map(float, b)) for b in doc.get("M0_basis", [])]
        F = doc.get("F", "solve")
        P["F"] = F if F == "solve" else _matrix(doc, "F")
        z0 = _vector(doc, "z0", len(P["A"]))
        cfg = ScenarioConfig(game, P, z0, **common)
        try:
            cfg.general_game()
            make_projector(P["M0_basis"], n=len(z0))
        except (ValueError, PursuitError) as exc:
            raise ValidationError("A/B/C/M0_basis", str(exc)) from None
    try:
        if game == "simple_motion":
            cfg.simple_params()
        elif game == "pontryagin":
            cfg.pontryagin_params()
    except (ValueError, AssumptionViolated) as exc:
        raise ValidationError("parameters", str(exc)) from None
    return cfg


def parse_scenario(path) -> ScenarioConfig:
    """Read and validate a scenario file.

    Raises
    ------
    ParseError
        Malformed JSON (message carries line and column).
    ValidationError
        A precondition of the game is violated.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read scenario: {exc}", path) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno, exc.colno) from None
    cfg = config_from_dict(doc)
    if "name" not in doc:
        cfg.name = path.stem
    return cfg


def serialize_config(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2)


# running ---------------------------------------------------------------------


def run_scenario(cfg: ScenarioConfig, monitors: bool = True):
    if cfg.game == "simple_motion":
        return run_simple_motion(cfg.simple_params(), cfg.z0, cfg.evader, cfg.step(),
                                 monitors=monitors, y0=cfg.y0)
    if cfg.game == "pontryagin":
        return run_pontryagin(cfg.pontryagin_params(), cfg.pontryagin_state(), cfg.evader,
                              cfg.step(), monitors=monitors)
    raise ConfigError("general games cannot be simulated; use 'verify' instead")


def _fmt(x) -> str:
    return repr(float(x))


def trajectory_header(traj: Trajectory) -> list:
    dz, du, dv = traj.z.shape[1], traj.u.shape[1], traj.v.shape[1]
    return (["t"] + [f"z{i}" for i in range(dz)] + ["|z|"] + [f"u{i}" for i in range(du)]
            + [f"v{i}" for i in range(dv)] + ["lambda", "r", "u_spent", "v_spent"])


def write_trajectory_csv(traj: Trajectory, path) -> None:
    miss = traj.miss() + (0.0 if traj.meta.get("game") == "pontryagin" else traj.meta.get("l", 0.0))
    cols = np.column_stack([traj.times, traj.z, miss, traj.u, traj.v, traj.lam, traj.r,
                            traj.u_spent, traj.v_spent])
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(trajectory_header(traj)) + "\n")
        for row in cols:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def read_trajectory_csv(path):
    """Return ``(header, array)`` of a trajectory CSV."""
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def _write_series(path, x, y):
    with open(path, "w", newline="\n") as fh:
        for a, b in zip(x, y):
            fh.write(f"{_fmt(a)} {_fmt(b)}\n")


def summary_dict(report: RunReport, cfg: ScenarioConfig, traj: Optional[Trajectory] = None) -> dict:
    d = {"report": report.to_dict(), "config": cfg.to_dict(), "version": __version__}
    if traj is not None:
        d["events"] = [[float(t), tag] for t, tag in traj.events]
    return d


def write_outputs(traj: Trajectory, report: RunReport, cfg: ScenarioConfig, output_dir=None) -> list:
    """Write the requested files; returns their paths."""
    out = Path(output_dir or cfg.output_dir or "runs")
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if "trajectory_csv" in cfg.emit:
            p = out / f"{cfg.name}_trajectory.csv"
            write_trajectory_csv(traj, p)
            written.append(p)
        if "summary_json" in cfg.emit:
            p = out / f"{cfg.name}_summary.json"
            p.write_text(json.dumps(summary_dict(report, cfg, traj), indent=2))
            written.append(p)
        if "plot_data" in cfg.emit:
            for suffix, y in (("miss", traj.miss()), ("resource", traj.r),
                              ("u_budget", traj.u_spent), ("v_budget", traj.v_spent)):
                p = out / f"{cfg.name}_{suffix}.dat"
                _write_series(p, traj.times, y)
                written.append(p)
    except OSError as exc:
        raise IOError(f"cannot write outputs to {out}: {exc}") from exc
    return written


def load_summary(path):
    """Inverse of the summary JSON writer: ``(RunReport, ScenarioConfig)``."""
    d = json.loads(Path(path).read_text())
    return RunReport.from_dict(d["report"]), config_from_dict(d["config"])


def _run_one(path, output_dir):
    cfg = parse_scenario(path)
    traj, report = run_scenario(cfg)
    write_outputs(traj, report, cfg, output_dir)
    return cfg.name, report.to_dict()


def thread_count() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_batch(directory, output_dir=None) -> dict:
    """Run every ``*.json`` scenario in ``directory`` concurrently.

    Each scenario writes its own files; the aggregate report is written once
    all runs are finished.
    """
    directory = Path(directory)
    paths = sorted(directory.glob("*.json"))
    out = Path(output_dir) if output_dir else directory / "runs"
    results = {}
    with concurrent.futures.ProcessPoolExecutor(max_workers=thread_count()) as pool:
        futures = {pool.submit(_run_one, p, out): p for p in paths}
        for fut in concurrent.futures.as_completed(futures):
            path = futures[fut]
            try:
                name, rep = fut.result()
                results[name] = rep
            except (PursuitError, ValueError) as exc:
                results[path.stem] = {"error": f"{type(exc).__name__}: {exc}"}
    aggregate = {
        "version": __version__,
        "runs": [
            {
                "name": name,
                "captured": rep.get("captured"),
                "capture_time": rep.get("capture_time"),
                "bound": rep.get("bound_theta"),
                "violations": rep.get("invariant_violations", []),
                **({"error": rep["error"]} if "error" in rep else {}),
            }
            for name, rep in sorted(results.items())
        ],
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "batch_report.json").write_text(json.dumps(aggregate, indent=2))
    return aggregate
