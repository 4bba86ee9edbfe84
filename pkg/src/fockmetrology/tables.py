"""CSV rows for reports and results.

Floats are written with ``repr`` so they round-trip exactly; infinite or
undefined values become empty cells.
"""

from __future__ import annotations

import csv
import math
import numbers
from pathlib import Path

from .estimation import BayesReport, OptimizationResult
from .metrology import FisherReport
from .states import StateSpec

FISHER_HEADER = ("state_family", "alpha", "z", "N", "nbar", "eta", "phi", "qfi", "cfi", "crb", "mu")
OPTIMUM_HEADER = ("state_family", "nbar_target", "alpha", "z", "N", "nbar", "eta", "merit", "figure_of_merit", "phi")
BAYES_HEADER = (
    "state_family", "alpha", "z", "N", "phi_true", "mu", "trial", "seed",
    "sigma", "posterior_mean", "mean_sigma", "crb_reference",
)


def cell(value) -> str:
    """Full-precision text for one CSV cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        v = float(value)
        return repr(v) if math.isfinite(v) else ""
    return str(getattr(value, "value", value))


def fisher_row(report: FisherReport, spec: StateSpec, nbar: float, eta: float) -> dict:
    return dict(zip(FISHER_HEADER, (
        spec.family.short, spec.alpha, spec.z, spec.N, nbar, eta,
        report.phi, report.qfi, report.cfi_at_phi, report.crb, report.mu,
    )))


def optimum_row(res: OptimizationResult, nbar_target: float) -> dict:
    return dict(zip(OPTIMUM_HEADER, (
        res.family.short, nbar_target, res.best_alpha, res.best_z, res.N, res.nbar_achieved,
        res.eta, res.merit.value, res.figure_of_merit, res.best_phi,
    )))


def bayes_rows(report: BayesReport, spec: StateSpec) -> list[dict]:
    return [
        dict(zip(BAYES_HEADER, (
            spec.family.short, spec.alpha, spec.z, spec.N, report.phi_true, report.mu, i, report.seed,
            sigma, mean, report.mean_sigma, report.crb_reference,
        )))
        for i, (sigma, mean) in enumerate(zip(report.sigmas, report.means))
    ]


def write_csv(path, header, rows) -> Path:
    """Write rows (dicts keyed by ``header``) as UTF-8 CSV with a header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([cell(row.get(h)) for h in header])
    return path
