"""Reproduction checks for the headline numbers, shared by the test suite and ``report``.

Each check returns a :class:`CheckResult` with the measured values next to the
tolerances it was judged against.  Tolerances can be overridden by name.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import TruncationError
from .estimation import Merit, bayes_ensemble, contour_points, optimize_at_nbar
from .fock import FockSpace, SingleModeState, TwoModeDensity
from .loss import LossSpec, apply_loss, apply_loss_single, kraus_set
from .metrology import (
    MeasurementModel,
    qfi_beam_split_product,
    qfi_product,
    qfi_pure,
    scs_qfi_closed,
    ses_qfi_closed,
)
from .phase_space import amplitude_fidelity, qfi_from_fidelity, wigner, wigner_overlap_fidelity
from .states import (
    Family,
    StateSpec,
    cat,
    coherent,
    healthy_space,
    mean_photons,
    noon,
    ses,
    squeezed_cat,
    squeezed_vacuum_amplitudes,
)

DEFAULT_TOLERANCES = {
    "ses_closed_rtol": 1e-6,
    "scs_closed_rtol": 1e-6,
    "noon_atol": 1e-10,
    "ssv_rtol": 1e-6,
    "ses_nbar1_target": 6.854,
    "ses_nbar1_atol": 0.01,
    "factor3_low": 2.85,
    "factor3_high": 3.00,
    "saturation_rtol": 0.005,
    "qfi_crossover_target": 0.27,
    "qfi_crossover_atol": 0.04,
    "cfi_crossover_target": 0.10,
    "cfi_crossover_atol": 0.03,
    "bayes_crb_factor": 1.25,
    "bayes_scaling_rtol": 0.15,
    "wigner_norm_atol": 1e-4,
    "wigner_fidelity_atol": 1e-3,
    "fidelity_qfi_rtol": 0.01,
    "kraus_atol": 1e-10,
    "trace_atol": 1e-9,
    "semigroup_atol": 1e-8,
}

# Closed-form oracle comparisons need the truncation error well below 1e-6.
ORACLE_TAIL = 1e-12
SES_Z = (0.2, 0.5, 0.8, 1.0612, 1.3)
SCS_GRID = [(z, a) for z in (0.2, 0.6, 1.0) for a in (0.5, 1.0, 2.0)]
PANEL_RANGE = (-9.0, 9.0)
PANEL_RESOLUTION = 241
BAYES_SEED = 20160901
ETA_GRID = tuple(np.round(np.linspace(1.0, 0.0, 11), 12))


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    measured: dict
    tolerance: dict
    seconds: float = 0.0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        meas = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items() if not isinstance(v, dict))
        return f"{status} criterion {self.id} ({self.name}): {meas} [{self.seconds:.1f}s]"

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b else abs(a - b)


# -- shared, expensive inputs ----------------------------------------------------------


@lru_cache(maxsize=None)
def optimized_scs(nbar: float = 1.0):
    """QFI-optimal lossless SCS at ``nbar`` and the space it was optimised in."""
    res = optimize_at_nbar(Family.SQUEEZED_CAT, nbar)
    space = healthy_space([StateSpec(Family.SQUEEZED_CAT, *p) for p in contour_points(Family.SQUEEZED_CAT, nbar)])
    return res, space


@lru_cache(maxsize=None)
def _merit_at_loss(family: str, loss: float, merit: str) -> float:
    eta = 1.0 - loss
    return optimize_at_nbar(family, 1.0, LossSpec.symmetric(eta), Merit(merit)).figure_of_merit


def _best_gaussian_qfi(loss: float) -> float:
    return max(_merit_at_loss("SSV", loss, "QFI"), _merit_at_loss("SVCS", loss, "QFI"))


def loss_crossover(merit: Merit, step: float = 0.05, resolution: float = 0.0025, max_loss: float = 0.6) -> float:
    """Smallest loss at which the optimised SCS no longer beats the better of SSV and SVCS (QFI).

    Both sides are re-optimised at every loss.  A coarse scan brackets the
    first loss where the SCS stops winning; bisection narrows it to
    ``resolution``.
    """
    merit = Merit(merit)

    def beats(loss: float) -> bool:
        return _merit_at_loss("SCS", loss, merit.value) > _best_gaussian_qfi(loss) * (1 + 1e-6)

    lo = 0.0
    if not beats(lo):
        return 0.0
    hi = None
    for loss in np.arange(step, max_loss + 1e-12, step):
        loss = round(float(loss), 12)
        if not beats(loss):
            hi = loss
            break
        lo = loss
    if hi is None:
        return math.inf
    while hi - lo > resolution:
        mid = round(0.5 * (lo + hi), 12)
        lo, hi = (mid, hi) if beats(mid) else (lo, mid)
    return 0.5 * (lo + hi)


# -- the checks ------------------------------------------------------------------------


def check_1(tol) -> CheckResult:
    """SES numeric QFI against its closed form at dim 60."""
    space = FockSpace(60, tail_tol=1e-4)  # loosest tail check, so every z can be built at dim 60
    errs = []
    for z in SES_Z:
        try:
            errs.append(_rel(qfi_pure(ses(space, z)), ses_qfi_closed(z).qfi))
        except TruncationError:
            errs.append(math.inf)
    worst = max(errs)
    return CheckResult(1, "SES closed form, dim=60", worst <= tol["ses_closed_rtol"],
                       {"rel_err_per_z": errs, "max_rel_err": worst}, {"rtol": tol["ses_closed_rtol"]})


def check_2(tol) -> CheckResult:
    """SCS numeric QFI and mean photon number against the closed forms, both z signs tried."""
    per_sign = {}
    for sign in (1, -1):
        worst_q = worst_n = 0.0
        for z, a in SCS_GRID:
            spec = StateSpec(Family.SQUEEZED_CAT, a, z)
            psi = spec.probe(healthy_space(spec, tail_tol=ORACLE_TAIL))
            closed = scs_qfi_closed(sign * z, a)
            worst_q = max(worst_q, _rel(qfi_pure(psi), closed.qfi))
            worst_n = max(worst_n, _rel(mean_photons(psi), closed.nbar))
        per_sign[sign] = (worst_q, worst_n)
    sign = min(per_sign, key=lambda s: max(per_sign[s]))
    worst_q, worst_n = per_sign[sign]
    ok = max(worst_q, worst_n) <= tol["scs_closed_rtol"]
    return CheckResult(2, "SCS closed form", ok,
                       {"z_sign": sign, "max_rel_err_qfi": worst_q, "max_rel_err_nbar": worst_n},
                       {"rtol": tol["scs_closed_rtol"]})


def check_3(tol) -> CheckResult:
    """NOON, SSV and alpha=0 SCS anchors."""
    space = FockSpace(20)
    noon_err = max(abs(qfi_pure(noon(space, N)) - N * N) for N in range(1, 6))
    ssv_err = 0.0
    scs0_err = 0.0
    for z in (0.3, 0.7, 1.0):
        spec = StateSpec(Family.SSV, z=z)
        psi = spec.probe(healthy_space(spec, tail_tol=ORACLE_TAIL))
        n = 2 * np.sinh(z) ** 2
        ssv_err = max(ssv_err, _rel(qfi_pure(psi), n * n + 2 * n))
        spec0 = StateSpec(Family.SQUEEZED_CAT, 0.0, z)
        psi0 = spec0.probe(healthy_space(spec0, tail_tol=ORACLE_TAIL))
        scs0_err = max(scs0_err, _rel(qfi_pure(psi0), n * n + 2 * n), _rel(scs_qfi_closed(z, 0.0).qfi, n * n + 2 * n))
    ok = noon_err < tol["noon_atol"] and max(ssv_err, scs0_err) <= tol["ssv_rtol"]
    return CheckResult(3, "known-state anchors", ok,
                       {"noon_max_abs_err": noon_err, "ssv_max_rel_err": ssv_err, "scs_alpha0_max_rel_err": scs0_err},
                       {"noon_atol": tol["noon_atol"], "rtol": tol["ssv_rtol"]})


def check_4(tol) -> CheckResult:
    """Optimised SES and SCS at nbar = 1."""
    ses_q = optimize_at_nbar(Family.SES, 1.0).figure_of_merit
    scs_q = optimized_scs(1.0)[0].figure_of_merit
    ok = abs(ses_q - tol["ses_nbar1_target"]) <= tol["ses_nbar1_atol"] and scs_q >= ses_q
    return CheckResult(4, "seven-fold gain at nbar=1", ok, {"ses_qfi": ses_q, "scs_qfi": scs_q},
                       {"ses_target": tol["ses_nbar1_target"], "ses_atol": tol["ses_nbar1_atol"]})


def check_5(tol) -> CheckResult:
    """Closed-form SES QFI over the SSV value at nbar = 50."""
    z = brentq(lambda z: ses_qfi_closed(z).nbar - 50.0, 0.1, 20.0, xtol=1e-14)
    f = ses_qfi_closed(z)
    ratio = f.qfi / (f.nbar**2 + 2 * f.nbar)
    ok = tol["factor3_low"] <= ratio <= tol["factor3_high"]
    return CheckResult(5, "factor-3 asymptotics", ok, {"z": z, "ratio": ratio},
                       {"low": tol["factor3_low"], "high": tol["factor3_high"]})


def check_6(tol) -> CheckResult:
    """Photon counting after the beam splitter reaches the QFI of the optimised SCS."""
    res, space = optimized_scs(1.0)
    psi = res.spec.probe(space)
    q = qfi_pure(psi)
    grid = np.linspace(0.0, 2 * np.pi, 200, endpoint=False)
    cfis = MeasurementModel(psi).cfi(grid)
    best = float(cfis.max())
    err = _rel(best, q)
    return CheckResult(6, "measurement saturation", err <= tol["saturation_rtol"],
                       {"qfi": q, "max_cfi": best, "phi": float(grid[int(np.argmax(cfis))]), "rel_gap": err},
                       {"rtol": tol["saturation_rtol"]})


def check_7(tol) -> CheckResult:
    """Loss fractions where the SCS stops beating the best Gaussian probe."""
    q_cross = loss_crossover(Merit.QFI)
    c_cross = loss_crossover(Merit.CFI_BEST_PHI)
    ok_q = abs(q_cross - tol["qfi_crossover_target"]) <= tol["qfi_crossover_atol"]
    ok_c = abs(c_cross - tol["cfi_crossover_target"]) <= tol["cfi_crossover_atol"]
    return CheckResult(7, "loss crossovers", ok_q and ok_c,
                       {"qfi_crossover": q_cross, "cfi_crossover": c_cross, "qfi_ok": ok_q, "cfi_ok": ok_c},
                       {"qfi_target": tol["qfi_crossover_target"], "qfi_atol": tol["qfi_crossover_atol"],
                        "cfi_target": tol["cfi_crossover_target"], "cfi_atol": tol["cfi_crossover_atol"]})


def check_8(tol) -> CheckResult:
    """Bayesian posterior width of the optimised SCS against the CRB."""
    res, space = optimized_scs(1.0)
    psi = res.spec.probe(space)
    q = qfi_pure(psi)
    r100 = bayes_ensemble(psi, 0.6, 100, 200, seed=BAYES_SEED, qfi=q)
    r400 = bayes_ensemble(psi, 0.6, 400, 200, seed=BAYES_SEED + 1, qfi=q)
    factor = r100.mean_sigma / r100.crb_reference
    shrink = r100.mean_sigma / r400.mean_sigma
    ok_crb = factor <= tol["bayes_crb_factor"]
    ok_scale = abs(shrink / 2.0 - 1.0) <= tol["bayes_scaling_rtol"]
    return CheckResult(8, "Bayesian consistency", ok_crb and ok_scale,
                       {"sigma_mu100": r100.mean_sigma, "crb_mu100": r100.crb_reference, "sigma_over_crb": factor,
                        "sigma_mu400": r400.mean_sigma, "shrink_100_to_400": shrink},
                       {"crb_factor": tol["bayes_crb_factor"], "scaling_rtol": tol["bayes_scaling_rtol"]})


def wigner_panel_states() -> dict:
    """The four reference panels: a squeezed vacuum, a cat and two squeezed cats."""
    specs = {
        "squeezed_vacuum_r1": StateSpec(Family.SQUEEZED_VACUUM, z=1.0),
        "cat_a2": StateSpec(Family.CAT, alpha=2.0),
        "scs_z1.3_a2": StateSpec(Family.SQUEEZED_CAT, alpha=2.0, z=1.3),
        "scs_z0.5_a2": StateSpec(Family.SQUEEZED_CAT, alpha=2.0, z=0.5),
    }
    return {k: s.single(healthy_space(s)) for k, s in specs.items()}


def random_single_mode_states(n: int, seed: int = 7) -> list[SingleModeState]:
    """A mix of named states and random low-photon superpositions."""
    rng = np.random.default_rng(seed)
    space = FockSpace(60)
    out = []
    for i in range(n):
        kind = i % 5
        if kind == 0:
            out.append(coherent(space, rng.uniform(0.0, 2.0)))
        elif kind == 1:
            out.append(cat(space, rng.uniform(0.3, 2.0)))
        elif kind == 2:
            out.append(squeezed_vacuum_amplitudes(space, rng.uniform(-0.8, 0.8)))
        elif kind == 3:
            out.append(squeezed_cat(space, rng.uniform(-0.5, 0.5), rng.uniform(0.3, 1.5)))
        else:
            amp = np.zeros(space.dim, dtype=complex)
            amp[:6] = rng.normal(size=6) + 1j * rng.normal(size=6)
            out.append(SingleModeState(space, amp / np.linalg.norm(amp)))
    return out


def check_9(tol) -> CheckResult:
    """Wigner normalisation, Wigner-overlap fidelity and fidelity-based QFI."""
    norms = {k: wigner(s, PANEL_RANGE, PANEL_RANGE, PANEL_RESOLUTION).normalization for k, s in wigner_panel_states().items()}
    norm_err = max(abs(v - 1.0) for v in norms.values())
    states = random_single_mode_states(20)
    grids = [wigner(s) for s in states]
    fid_err = max(
        abs(wigner_overlap_fidelity(grids[2 * i], grids[2 * i + 1]) - amplitude_fidelity(states[2 * i], states[2 * i + 1]))
        for i in range(10)
    )
    noon_q = qfi_from_fidelity(noon(FockSpace(10), 2), 1e-3)
    res, space = optimized_scs(1.0)
    psi = res.spec.probe(space)
    scs_err = _rel(qfi_from_fidelity(psi, 1e-3), qfi_pure(psi))
    noon_err = _rel(noon_q, 4.0)
    ok = (norm_err <= tol["wigner_norm_atol"] and fid_err <= tol["wigner_fidelity_atol"]
          and max(noon_err, scs_err) <= tol["fidelity_qfi_rtol"])
    return CheckResult(9, "Wigner suite", ok,
                       {"max_norm_err": norm_err, "max_fidelity_err": fid_err,
                        "noon2_rel_err": noon_err, "scs_rel_err": scs_err},
                       {"norm_atol": tol["wigner_norm_atol"], "fidelity_atol": tol["wigner_fidelity_atol"],
                        "qfi_rtol": tol["fidelity_qfi_rtol"]})


def _random_density(space: FockSpace, rank: int, rng, levels: int = 6) -> np.ndarray:
    v = np.zeros((rank, space.dim * space.dim), dtype=complex)
    idx = np.array([m * space.dim + n for m in range(levels) for n in range(levels)])
    v[:, idx] = rng.normal(size=(rank, idx.size)) + 1j * rng.normal(size=(rank, idx.size))
    rho = v.T @ v.conj()
    return rho / np.trace(rho).real


def check_10(tol) -> CheckResult:
    """Kraus completeness, trace preservation, semigroup law and QFI monotonicity."""
    space = FockSpace(30)
    kraus_err = 0.0
    for eta in ETA_GRID:
        s = sum(k.mat.conj().T @ k.mat for k in kraus_set(space, eta))
        kraus_err = max(kraus_err, float(np.abs(s - np.eye(space.dim)).max()))
    rng = np.random.default_rng(3)
    rho = TwoModeDensity(space, _random_density(space, 3, rng))
    trace_err = max(abs(np.trace(apply_loss(rho, LossSpec(ea, eb)).mat).real - 1.0)
                    for ea, eb in [(0.9, 0.9), (0.3, 0.8), (0.0, 1.0), (0.55, 0.0)])
    sigma = rho.mat.reshape(space.dim, space.dim, space.dim, space.dim).trace(axis1=1, axis2=3)
    semi_err = 0.0
    for e1, e2 in [(0.9, 0.8), (0.5, 0.5), (0.7, 0.25)]:
        twice = apply_loss_single(apply_loss_single(sigma, e1), e2)
        semi_err = max(semi_err, float(np.abs(twice - apply_loss_single(sigma, e1 * e2)).max()))
        both = apply_loss(apply_loss(rho, LossSpec(e1, e2)), LossSpec(e2, e1))
        semi_err = max(semi_err, float(np.abs(both.mat - apply_loss(rho, LossSpec(e1 * e2, e1 * e2)).mat).max()))

    curves = _loss_qfi_curves()
    violations = {k: max(0.0, max(np.diff(v) / np.maximum(np.abs(v[:-1]), 1e-300))) for k, v in curves.items()}
    mono_ok = all(v <= 1e-9 for v in violations.values())
    ok = (kraus_err <= tol["kraus_atol"] and trace_err <= tol["trace_atol"]
          and semi_err <= tol["semigroup_atol"] and mono_ok)
    return CheckResult(10, "channel properties", ok,
                       {"kraus_err": kraus_err, "trace_err": trace_err, "semigroup_err": semi_err,
                        "max_qfi_increase": max(violations.values()),
                        "qfi_curves": {k: [float(x) for x in v] for k, v in curves.items()}},
                       {"kraus_atol": tol["kraus_atol"], "trace_atol": tol["trace_atol"],
                        "semigroup_atol": tol["semigroup_atol"], "monotone_rtol": 1e-9})


def _loss_qfi_curves() -> dict:
    """QFI of the lossless n=1 optima of SCS, SSV and SVCS as the loss grows (eta from 1 to 0)."""
    scs, scs_space = optimized_scs(1.0)
    s = scs.spec.single(scs_space)
    z_ssv = float(np.arcsinh(np.sqrt(0.5)))
    ssv_spec = StateSpec(Family.SSV, z=z_ssv)
    sv = squeezed_vacuum_amplitudes(healthy_space(ssv_spec), z_ssv)
    svcs = optimize_at_nbar(Family.SVCS, 1.0)
    svcs_space = healthy_space(svcs.spec)
    coh = coherent(svcs_space, svcs.best_alpha)
    sq = squeezed_vacuum_amplitudes(svcs_space, svcs.best_z)
    curves = {"SCS": [], "SSV": [], "SVCS": []}
    for eta in ETA_GRID:
        ls, lv = apply_loss_single(s, eta), apply_loss_single(sv, eta)
        curves["SCS"].append(qfi_product(ls, ls))
        curves["SSV"].append(qfi_product(lv, lv))
        curves["SVCS"].append(qfi_beam_split_product(apply_loss_single(coh, eta), apply_loss_single(sq, eta)))
    return {k: np.array(v) for k, v in curves.items()}


CHECKS = {i: globals()[f"check_{i}"] for i in range(1, 11)}


def resolve_tolerances(overrides: dict | None = None) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    for k, v in (overrides or {}).items():
        if k not in tol:
            raise KeyError(f"unknown tolerance {k!r}")
        tol[k] = float(v)
    return tol


def run_check(i: int, tolerances: dict | None = None) -> CheckResult:
    tol = resolve_tolerances(tolerances)
    t0 = time.perf_counter()
    res = CHECKS[i](tol)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(ids=None, tolerances: dict | None = None) -> list[CheckResult]:
    return [run_check(i, tolerances) for i in (ids or sorted(CHECKS))]
