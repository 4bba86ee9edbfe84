"""Command-line front end: figure data as CSV, the acceptance suite as JSON.

    fockmetrology qfi-curve  [--config run.json] [--out qfi.csv] [--dim 80]
    fockmetrology loss-curve [--config run.json] [--out loss.csv]
    fockmetrology wigner     [--config run.json] [--out wigner.csv]
    fockmetrology bayes      [--config run.json] [--out bayes.csv] [--seed 1]
    fockmetrology report     [--config run.json] [--out report.json]

The config is a JSON object whose keys are :class:`RunConfig` fields.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import acceptance
from .errors import ConfigError, FockMetrologyError
from .estimation import Merit, bayes_ensemble, contour_points, optimize_at_nbar
from .fock import FockSpace
from .loss import LossSpec
from .metrology import qfi_pure
from .phase_space import wigner
from .states import Family, StateSpec, healthy_space
from .tables import BAYES_HEADER, bayes_rows, cell, write_csv

log = logging.getLogger("fockmetrology")

QFI_CURVE_HEADER = ("state_family", "nbar_target", "alpha", "z", "N", "nbar", "qfi")
LOSS_CURVE_HEADER = (
    "state_family", "merit", "nbar_target", "eta", "alpha", "z", "N", "figure_of_merit", "phi", "sqrt_mu_dphi",
)
WIGNER_HEADER = ("panel", "state_family", "alpha", "z", "x", "p", "w")

CURVE_FAMILIES = {Family.SES, Family.SQUEEZED_CAT, Family.SVCS, Family.SSV, Family.NOON}
WIGNER_PANELS = [
    {"name": "squeezed_vacuum_r1", "family": "SqueezedVacuum", "z": 1.0},
    {"name": "cat_a2", "family": "Cat", "alpha": 2.0},
    {"name": "scs_z1.3_a2", "family": "SCS", "alpha": 2.0, "z": 1.3},
    {"name": "scs_z0.5_a2", "family": "SCS", "alpha": 2.0, "z": 0.5},
]

_DEFAULTS = {
    "qfi-curve": {"states": ["SES", "SCS", "SVCS", "SSV", "NOON"], "nbar": [0.5, 1.0, 2.0, 3.0], "out": "qfi_curve.csv"},
    "loss-curve": {
        "states": ["SCS", "SSV", "SVCS", "NOON"],
        "nbar": [1.0],
        "eta": [round(1.0 - 0.05 * i, 12) for i in range(11)],
        "out": "loss_curve.csv",
    },
    "wigner": {"panels": WIGNER_PANELS, "x_range": [-9.0, 9.0], "p_range": [-9.0, 9.0], "resolution": 241,
               "out": "wigner.csv"},
    "bayes": {"nbar": [1.0], "out": "bayes.csv"},
    "report": {"out": None},
}


@dataclass
class RunConfig:
    """Parameters of one command; fields a command does not use are ignored."""

    states: list = field(default_factory=list)
    nbar: list = field(default_factory=lambda: [1.0])
    eta: list = field(default_factory=lambda: [1.0])
    panels: list = field(default_factory=list)
    state: dict | None = None
    phi_true: float = 0.6
    mu: int = 100
    trials: int = 200
    grid_size: int = 1024
    seed: int = 0
    out: str | None = None
    dim: int | None = None
    tail_tol: float = 1e-8
    alpha_max: float = 3.0
    z_max: float = 2.0
    x_range: list = field(default_factory=lambda: [-6.0, 6.0])
    p_range: list = field(default_factory=lambda: [-6.0, 6.0])
    resolution: int = 201
    checks: list = field(default_factory=lambda: list(range(1, 11)))
    tolerances: dict = field(default_factory=dict)

    def space(self, specs=()) -> FockSpace:
        """The configured space, or the smallest healthy one for ``specs``."""
        if self.dim is not None:
            return FockSpace(self.dim, self.tail_tol)
        return healthy_space(list(specs), tail_tol=self.tail_tol)


# -- config loading and validation ------------------------------------------------------


def _line_of(text: str, key: str) -> int:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _validate_field(name: str, v, command: str) -> str | None:
    """Error message for one field, or None if it is acceptable."""
    if name == "states":
        if not isinstance(v, list) or not v:
            return "states must be a non-empty list of family names"
        for s in v:
            try:
                fam = Family.parse(s)
            except FockMetrologyError:
                return f"unknown state family {s!r}"
            if command in ("qfi-curve", "loss-curve") and fam not in CURVE_FAMILIES:
                return f"state {s!r} not supported by {command}; use SES, SCS, SVCS, SSV or NOON"
    elif name == "nbar":
        if not isinstance(v, list) or not v or not all(_is_num(x) and x > 0 for x in v):
            return "nbar must be a non-empty list of positive numbers"
    elif name == "eta":
        if not isinstance(v, list) or not v or not all(_is_num(x) and 0 <= x <= 1 for x in v):
            return "eta must be a non-empty list of numbers in [0, 1]"
    elif name == "panels":
        if not isinstance(v, list) or not v:
            return "panels must be a non-empty list of objects"
        for p in v:
            if not isinstance(p, dict) or "family" not in p:
                return "each panel needs at least a 'family'"
            extra = set(p) - {"name", "family", "alpha", "z"}
            if extra:
                return f"unknown panel fields {sorted(extra)}"
            try:
                fam = Family.parse(p["family"])
            except FockMetrologyError:
                return f"unknown state family {p['family']!r}"
            if not fam.single_mode:
                return f"panel family {p['family']!r} is not a single-mode state"
            if not _is_num(p.get("alpha", 0.0)) or p.get("alpha", 0.0) < 0 or not _is_num(p.get("z", 0.0)):
                return "panel alpha must be >= 0 and z a finite number"
    elif name == "state":
        if v is not None:
            if not isinstance(v, dict):
                return "state must be an object with family/alpha/z/N"
            try:
                StateSpec.from_dict(v)
            except (FockMetrologyError, KeyError, TypeError) as e:
                return f"invalid state: {e}"
    elif name == "phi_true":
        if not _is_num(v) or not 0 <= v <= np.pi / 2:
            return "phi_true must lie in the prior support [0, pi/2]"
    elif name == "mu":
        if not _is_int(v) or v < 0:
            return "mu must be a non-negative integer"
    elif name in ("trials", "resolution"):
        if not _is_int(v) or v < (1 if name == "trials" else 3):
            return f"{name} must be a positive integer" + (" >= 3" if name == "resolution" else "")
    elif name == "grid_size":
        if not _is_int(v) or v < 200:
            return "grid_size must be an integer >= 200"
    elif name == "seed":
        if not _is_int(v) or v < 0:
            return "seed must be a non-negative integer"
    elif name == "out":
        if v is not None and not isinstance(v, str):
            return "out must be a path string"
    elif name == "dim":
        if v is not None and (not _is_int(v) or v < 2):
            return "dim must be an integer >= 2"
    elif name == "tail_tol":
        if not _is_num(v) or not 0 < v <= 1e-4:
            return "tail_tol must lie in (0, 1e-4]"
    elif name in ("alpha_max", "z_max"):
        if not _is_num(v) or v <= 0:
            return f"{name} must be positive"
    elif name in ("x_range", "p_range"):
        if not isinstance(v, list) or len(v) != 2 or not all(_is_num(x) for x in v) or v[0] >= v[1]:
            return f"{name} must be [low, high] with low < high"
    elif name == "checks":
        if not isinstance(v, list) or not v or not all(_is_int(x) and x in acceptance.CHECKS for x in v):
            return "checks must be a non-empty list of criterion numbers 1..10"
    elif name == "tolerances":
        if not isinstance(v, dict):
            return "tolerances must be an object"
        for k, x in v.items():
            if k not in acceptance.DEFAULT_TOLERANCES:
                return f"unknown tolerance {k!r}"
            if not _is_num(x):
                return f"tolerance {k!r} must be a number"
    return None


def load_config(command: str, path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge command defaults, the JSON file and command-line overrides, validating everything."""
    values = dict(_DEFAULTS[command])
    text, where = "", "<defaults>"
    if path is not None:
        where = str(path)
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"{where}: cannot read config: {e.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{where}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{where}:1: config must be a JSON object")
        known = {f.name for f in fields(RunConfig)}
        for k in data:
            if k not in known:
                raise ConfigError(f"{where}:{_line_of(text, k)}: unknown field {k!r}")
        values.update(data)
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    for k, v in values.items():
        msg = _validate_field(k, v, command)
        if msg:
            line = _line_of(text, k) if text and k in json.loads(text) else 0
            loc = f"{where}:{line}" if line else f"{where} (command line or default)"
            raise ConfigError(f"{loc}: {k}: {msg}")
    return RunConfig(**values)


# -- commands -----------------------------------------------------------------------------


def _curve_space(cfg: RunConfig, fam: Family, n: float) -> FockSpace:
    pts = contour_points(fam, n, cfg.alpha_max, cfg.z_max)
    return cfg.space([StateSpec(fam, *p) for p in pts])


def cmd_qfi_curve(cfg: RunConfig) -> list[dict]:
    rows = []
    for name in cfg.states:
        fam = Family.parse(name)
        for n in cfg.nbar:
            if fam is Family.NOON and abs(n - round(n)) > 1e-12:
                log.info("NOON skipped at non-integer nbar=%g", n)
                continue
            space = _curve_space(cfg, fam, n)
            res = optimize_at_nbar(fam, n, space=space, alpha_max=cfg.alpha_max, z_max=cfg.z_max)
            rows.append(dict(zip(QFI_CURVE_HEADER, (
                fam.short, n, res.best_alpha, res.best_z, res.N, res.nbar_achieved, res.figure_of_merit))))
    write_csv(cfg.out, QFI_CURVE_HEADER, rows)
    return rows


def cmd_loss_curve(cfg: RunConfig) -> list[dict]:
    rows = []
    n = cfg.nbar[0]
    for name in cfg.states:
        fam = Family.parse(name)
        merits = [Merit.QFI, Merit.CFI_BEST_PHI] if fam is Family.SQUEEZED_CAT else [Merit.QFI]
        space = _curve_space(cfg, fam, n)
        for merit in merits:
            for eta in cfg.eta:
                if eta == 0.0:
                    # no photon survives: zero information, infinite sqrt(mu)*dphi left as an empty cell
                    rows.append(dict(zip(LOSS_CURVE_HEADER, (fam.short, merit.value, n, eta, None, None, None,
                                                             0.0, None, None))))
                    continue
                res = optimize_at_nbar(fam, n, LossSpec.symmetric(eta), merit, space, cfg.alpha_max, cfg.z_max)
                f = res.figure_of_merit
                prec = 1.0 / math.sqrt(f) if f > 0 else None
                rows.append(dict(zip(LOSS_CURVE_HEADER, (fam.short, merit.value, n, eta, res.best_alpha, res.best_z,
                                                         res.N, f, res.best_phi, prec))))
    write_csv(cfg.out, LOSS_CURVE_HEADER, rows)
    return rows


def cmd_wigner(cfg: RunConfig) -> list[dict]:
    rows = []
    for i, p in enumerate(cfg.panels):
        spec = StateSpec(p["family"], p.get("alpha", 0.0), p.get("z", 0.0))
        state = spec.single(cfg.space([spec]))
        grid = wigner(state, tuple(cfg.x_range), tuple(cfg.p_range), cfg.resolution)
        label = p.get("name", f"panel{i}")
        xs, ps = grid.xs, grid.ps
        for ix, x in enumerate(xs):
            for ip, pv in enumerate(ps):
                rows.append(dict(zip(WIGNER_HEADER, (label, spec.family.short, spec.alpha, spec.z, x, pv,
                                                     grid.values[ix, ip]))))
    write_csv(cfg.out, WIGNER_HEADER, rows)
    return rows


def cmd_bayes(cfg: RunConfig) -> list[dict]:
    if cfg.state is not None:
        spec = StateSpec.from_dict(cfg.state)
        space = cfg.space([spec])
    else:
        space = _curve_space(cfg, Family.SQUEEZED_CAT, cfg.nbar[0])
        spec = optimize_at_nbar(Family.SQUEEZED_CAT, cfg.nbar[0], space=space,
                                alpha_max=cfg.alpha_max, z_max=cfg.z_max).spec
    psi = spec.probe(space)
    report = bayes_ensemble(psi, cfg.phi_true, cfg.mu, cfg.trials, cfg.grid_size, cfg.seed, qfi=qfi_pure(psi))
    rows = bayes_rows(report, spec)
    write_csv(cfg.out, BAYES_HEADER, rows)
    log.info("mean sigma %s vs CRB %s", cell(report.mean_sigma), cell(report.crb_reference))
    return rows


def cmd_report(cfg: RunConfig) -> dict:
    results = acceptance.run_all(cfg.checks, cfg.tolerances)
    summary = {
        "passed": all(r.passed for r in results),
        "tolerances": acceptance.resolve_tolerances(cfg.tolerances),
        "checks": [r.to_dict() for r in results],
    }
    for r in results:
        log.info(r.line())
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return summary


COMMANDS = {
    "qfi-curve": cmd_qfi_curve,
    "loss-curve": cmd_loss_curve,
    "wigner": cmd_wigner,
    "bayes": cmd_bayes,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockmetrology", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with RunConfig fields")
        p.add_argument("--out", help="output path (CSV, or JSON for report)")
        p.add_argument("--seed", type=int, help="master RNG seed")
        p.add_argument("--dim", type=int, help="Fock cutoff; default is the smallest healthy one")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose or args.command == "report" else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.command, args.config, {"out": args.out, "seed": args.seed, "dim": args.dim})
        result = COMMANDS[args.command](cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except FockMetrologyError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    if args.command == "report" and not result["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
