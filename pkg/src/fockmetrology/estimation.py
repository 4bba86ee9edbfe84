"""Parameter optimisation at fixed mean photon number, and Bayesian phase estimation."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import OutOfRange, TruncationError, Unachievable, ZeroLikelihood
from .fock import FockSpace, TwoModeState
from .loss import LossSpec, apply_loss, apply_loss_single
from .metrology import (
    MeasurementModel,
    crb,
    product_blocks,
    qfi_beam_split_product,
    qfi_mixed,
    qfi_product,
    qfi_pure,
)
from .states import (
    Family,
    StateSpec,
    coherent,
    healthy_space,
    mean_photons,
    scs_nbar,
    ses_norm,
    squeezed_vacuum_amplitudes,
)

log = logging.getLogger(__name__)

ALPHA_MAX = 3.0
Z_MAX = 2.0


class Merit(str, enum.Enum):
    QFI = "QFI"
    CFI_BEST_PHI = "CFI_best_phi"


@dataclass(frozen=True)
class OptimizationResult:
    family: Family
    best_alpha: float
    best_z: float
    nbar_achieved: float
    figure_of_merit: float
    eta: float
    merit: Merit = Merit.QFI
    N: int = 0
    best_phi: float = float("nan")

    @property
    def spec(self) -> StateSpec:
        return StateSpec(self.family, self.best_alpha, self.best_z, self.N)


# -- merit evaluation ----------------------------------------------------------------


def evaluate_merit(spec: StateSpec, space: FockSpace, loss: LossSpec = LossSpec(), merit=Merit.QFI):
    """QFI, or the CFI maximised over the phase, of a probe after loss.

    Returns ``(value, phi)``; ``phi`` is NaN for the QFI.  Product probes and
    the beam-split coherent/squeezed pair under symmetric loss use factorised
    shortcuts; everything else goes through the joint density matrix.
    """
    merit = Merit(merit)
    fam = spec.family
    if merit is Merit.QFI:
        if loss.lossless:
            return qfi_pure(spec.probe(space)), math.nan
        if fam.product:
            sa, sb = _lossy_factors(spec, space, loss)
            return qfi_product(sa, sb), math.nan
        if fam is Family.SVCS and loss.is_symmetric:
            # symmetric loss commutes with the beam splitter
            sa = apply_loss_single(coherent(space, spec.alpha), loss.eta_a)
            sb = apply_loss_single(squeezed_vacuum_amplitudes(space, spec.z), loss.eta_b)
            return qfi_beam_split_product(sa, sb), math.nan
        return qfi_mixed(apply_loss(spec.probe(space), loss), check_phase=False), math.nan

    if loss.lossless:
        model = MeasurementModel(spec.probe(space))
    elif fam.product:
        sa, sb = _lossy_factors(spec, space, loss)
        model = MeasurementModel(blocks=product_blocks(sa, sb), space=space)
    else:
        model = MeasurementModel(apply_loss(spec.probe(space), loss))
    phi, value = model.best_phase()
    return value, phi


def _lossy_factors(spec: StateSpec, space: FockSpace, loss: LossSpec):
    if spec.family is Family.SSV:
        s = squeezed_vacuum_amplitudes(space, spec.z)
    else:
        s = spec.single(space)
    return apply_loss_single(s, loss.eta_a), apply_loss_single(s, loss.eta_b)


# -- constraint contour --------------------------------------------------------------


def _alpha_roots(nbar_fn, target: float, alpha_max: float, n_grid: int = 241) -> list[float]:
    """All ``alpha`` in ``[0, alpha_max]`` with ``nbar_fn(alpha) == target``."""
    grid = np.linspace(0.0, alpha_max, n_grid)
    vals = np.array([nbar_fn(a) for a in grid]) - target
    roots = []
    if abs(vals[0]) < 1e-13:
        roots.append(0.0)
    for i in range(n_grid - 1):
        if vals[i] == 0.0 and i > 0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(lambda a: nbar_fn(a) - target, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15))
    return roots


def _solve_monotone(fn, target: float, hi: float, what: str) -> float:
    if fn(hi) < target:
        raise Unachievable(f"{what}: nbar={target} not reachable below parameter bound {hi}")
    return brentq(lambda x: fn(x) - target, 0.0, hi, xtol=1e-15, rtol=1e-15)


def contour_points(family, nbar_target: float, alpha_max=ALPHA_MAX, z_max=Z_MAX, n_z: int = 81):
    """Parameter points ``(alpha, z, N)`` on the constraint ``nbar = nbar_target``.

    One-parameter families give a single point.  SCS and SVCS give a scan in
    ``z`` with every admissible ``alpha``; ``z = +-asinh(sqrt(nbar/2))`` (the
    ``alpha = 0`` squeezed-vacuum limit of the SCS) is always included.
    """
    fam = Family.parse(family)
    n = float(nbar_target)
    if not n > 0:
        raise OutOfRange(f"nbar_target must be > 0, got {nbar_target}")
    if fam in (Family.SSV, Family.SQUEEZED_VACUUM):
        z = float(np.arcsinh(np.sqrt(n / 2)))
        if z > z_max:
            raise Unachievable(f"SSV needs z={z:.3f} > z_max={z_max}")
        return [(0.0, z, 0)]
    if fam is Family.NOON:
        if abs(n - round(n)) > 1e-12:
            raise Unachievable(f"NOON states exist only at integer nbar, got {n}")
        return [(0.0, 0.0, int(round(n)))]
    if fam is Family.SES:
        z = _solve_monotone(lambda z: 2 * ses_norm(z) ** 2 * np.sinh(z) ** 2, n, z_max, "SES")
        return [(0.0, float(z), 0)]
    if fam is Family.COHERENT:
        a = np.sqrt(n / 2)
        if a > alpha_max:
            raise Unachievable(f"coherent pair needs alpha={a:.3f} > alpha_max={alpha_max}")
        return [(float(a), 0.0, 0)]
    if fam is Family.CAT:
        a = _solve_monotone(lambda a: 2 * a * a * np.tanh(a * a), n, alpha_max, "cat")
        return [(float(a), 0.0, 0)]

    zs = np.linspace(-z_max, z_max, n_z)
    z0 = float(np.arcsinh(np.sqrt(n / 2)))
    if fam is Family.SVCS:
        z0 = float(np.arcsinh(np.sqrt(n)))
    zs = np.unique(np.concatenate([zs, [z0, -z0]] if z0 <= z_max else zs))
    pts = []
    for z in zs:
        if fam is Family.SVCS:
            rest = n - np.sinh(z) ** 2
            if rest >= -1e-13 and np.sqrt(max(rest, 0.0)) <= alpha_max:
                pts.append((float(np.sqrt(max(rest, 0.0))), float(z), 0))
        else:
            for a in _alpha_roots(lambda a, z=z: scs_nbar(z, a), n, alpha_max):
                pts.append((float(a), float(z), 0))
    if not pts:
        raise Unachievable(f"{fam.value}: no parameters reach nbar={n}")
    return pts


def _nearest_root(fam: Family, z: float, n: float, alpha_ref: float, alpha_max: float):
    if fam is Family.SVCS:
        rest = n - np.sinh(z) ** 2
        return float(np.sqrt(rest)) if rest >= 0 else None
    roots = _alpha_roots(lambda a: scs_nbar(z, a), n, alpha_max)
    if not roots:
        return None
    return min(roots, key=lambda a: abs(a - alpha_ref))


# -- optimiser ---------------------------------------------------------------------


def optimize_at_nbar(
    family,
    nbar_target: float,
    loss: LossSpec = LossSpec(),
    merit=Merit.QFI,
    space: FockSpace | None = None,
    alpha_max: float = ALPHA_MAX,
    z_max: float = Z_MAX,
    n_z: int = 81,
) -> OptimizationResult:
    """Maximise the merit over the family's parameters at fixed mean photon number.

    Stage one evaluates every point of :func:`contour_points`; stage two
    refines the best one with a bounded scalar search in ``z`` between its grid
    neighbours, following the ``alpha`` branch it started on.  Without an
    explicit ``space`` the smallest dim holding every contour state is used;
    with one, points failing the truncation check are skipped with a warning.
    """
    fam = Family.parse(family)
    merit = Merit(merit)
    n = float(nbar_target)
    pts = contour_points(fam, n, alpha_max, z_max, n_z)
    if space is None:
        space = healthy_space([StateSpec(fam, *p) for p in pts])

    def score(a, z, N):
        try:
            return evaluate_merit(StateSpec(fam, a, z, N), space, loss, merit)
        except TruncationError:
            return -math.inf, math.nan

    scored = [(score(*p), p) for p in pts]
    skipped = sum(not math.isfinite(v[0]) for v, _ in scored)
    if skipped:
        log.warning("%s nbar=%g: %d of %d contour points fail truncation at dim=%d", fam.value, n, skipped, len(pts), space.dim)
    (best_val, best_phi), best_pt = max(scored, key=lambda s: s[0][0])
    if not math.isfinite(best_val):
        raise TruncationError(f"{fam.value}: every contour point fails truncation at dim={space.dim}")

    if len(pts) > 1:
        zs = sorted({p[1] for p in pts})
        i = zs.index(best_pt[1])
        lo, hi = zs[max(i - 1, 0)], zs[min(i + 1, len(zs) - 1)]
        alpha_ref = best_pt[0]
        cache = {}

        def neg(z):
            a = _nearest_root(fam, z, n, alpha_ref, alpha_max)
            if a is None:
                return math.inf
            val, phi = score(a, z, 0)
            cache[z] = (val, phi, a)
            return -val

        if hi > lo:
            minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-7})
            z_best = max(cache, key=lambda z: cache[z][0])
            val, phi, a = cache[z_best]
            if val > best_val:
                best_val, best_phi, best_pt = val, phi, (a, float(z_best), 0)

    a, z, N = best_pt
    spec = StateSpec(fam, a, z, N)
    achieved = mean_photons(spec.probe(space))
    if abs(achieved - n) > 1e-4:
        raise TruncationError(f"{fam.value}: numeric nbar {achieved:.6g} misses target {n} at dim={space.dim}")
    return OptimizationResult(fam, a, z, achieved, float(best_val), loss.eta_a, merit, N, best_phi)


# -- Bayesian estimation -------------------------------------------------------------

DEFAULT_SUPPORT = (0.0, np.pi / 2)


@dataclass(frozen=True, eq=False)
class PhasePosterior:
    """Posterior density of the phase on a uniform midpoint grid."""

    grid: np.ndarray
    density: np.ndarray
    support: tuple = DEFAULT_SUPPORT

    def __post_init__(self):
        if self.grid.size < 200:
            raise OutOfRange(f"phase grid needs at least 200 points, got {self.grid.size}")
        if np.any(self.density < 0):
            raise ValueError("posterior density must be non-negative")
        total = float(np.sum(self.density) * self.step)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"posterior integrates to {total!r}")

    @property
    def step(self) -> float:
        return (self.support[1] - self.support[0]) / self.grid.size

    @property
    def mean(self) -> float:
        return float(np.sum(self.grid * self.density) * self.step)

    @property
    def std(self) -> float:
        var = np.sum((self.grid - self.mean) ** 2 * self.density) * self.step
        return float(np.sqrt(max(var, 0.0)))


def phase_grid(grid_size: int = 1024, support=DEFAULT_SUPPORT) -> np.ndarray:
    lo, hi = support
    return lo + (np.arange(grid_size) + 0.5) * (hi - lo) / grid_size


class Likelihood:
    """``P(m, n | phi)`` tabulated on the phase grid, plus the sampler at the true phase."""

    def __init__(self, x, grid_size: int = 1024, support=DEFAULT_SUPPORT, model: MeasurementModel | None = None):
        self.model = model or MeasurementModel(x)
        self.support = tuple(support)
        self.grid = phase_grid(grid_size, support)
        self.table = np.clip(self.model.probs(self.grid), 0.0, None)

    def outcome_probs(self, phi: float) -> np.ndarray:
        p = np.clip(self.model.probs([phi])[0], 0.0, None)
        return p / p.sum()


def bayes_trial(
    x,
    phi_true: float,
    mu: int,
    grid_size: int = 1024,
    seed=None,
    support=DEFAULT_SUPPORT,
    likelihood: Likelihood | None = None,
) -> PhasePosterior:
    """Flat prior, ``mu`` simulated photon-count outcomes, pointwise Bayes updates."""
    lo, hi = support
    if not lo <= phi_true <= hi:
        raise OutOfRange(f"phi_true={phi_true} outside the prior support {support}")
    if int(mu) != mu or mu < 0:
        raise OutOfRange(f"mu must be a non-negative integer, got {mu}")
    lik = likelihood or Likelihood(x, grid_size, support)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    step = (hi - lo) / lik.grid.size
    density = np.full(lik.grid.size, 1.0 / (hi - lo))
    p_true = lik.outcome_probs(phi_true)
    outcomes = rng.choice(p_true.size, size=int(mu), p=p_true)
    for o in outcomes:
        density = density * lik.table[:, o]
        total = density.sum() * step
        if not total > 0:
            raise ZeroLikelihood(f"outcome {divmod(int(o), int(np.sqrt(p_true.size)))} has zero likelihood on the grid")
        density /= total
        assert abs(density.sum() * step - 1.0) < 1e-9
    return PhasePosterior(lik.grid, density, tuple(support))


@dataclass(frozen=True)
class BayesReport:
    phi_true: float
    mu: int
    trials: int
    mean_sigma: float
    crb_reference: float
    seed: int
    sigmas: tuple = field(default=(), repr=False)
    means: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.trials < 1:
            raise OutOfRange("trials must be >= 1")
        if not self.mean_sigma > 0:
            raise ValueError(f"mean posterior sigma must be positive, got {self.mean_sigma}")


def bayes_ensemble(
    x,
    phi_true: float,
    mu: int,
    trials: int,
    grid_size: int = 1024,
    seed: int = 0,
    support=DEFAULT_SUPPORT,
    qfi: float | None = None,
) -> BayesReport:
    """Average posterior standard deviation over independent trials.

    Trial ``i`` draws from ``SeedSequence(seed).spawn(trials)[i]``, so the
    report depends only on the inputs and ``seed``.
    """
    if int(trials) != trials or trials < 1:
        raise OutOfRange(f"trials must be a positive integer, got {trials}")
    lik = Likelihood(x, grid_size, support)
    children = np.random.SeedSequence(seed).spawn(int(trials))
    posts = [
        bayes_trial(x, phi_true, mu, grid_size, np.random.default_rng(c), support, lik) for c in children
    ]
    sigmas = tuple(p.std for p in posts)
    if qfi is None:
        qfi = qfi_pure(x) if isinstance(x, TwoModeState) else qfi_mixed(x)
    ref = crb(qfi, mu) if mu >= 1 and qfi > 0 else math.inf
    return BayesReport(
        float(phi_true), int(mu), int(trials), float(np.mean(sigmas)), ref, int(seed),
        sigmas, tuple(p.mean for p in posts),
    )


__all__ = [
    "ALPHA_MAX",
    "Z_MAX",
    "Merit",
    "OptimizationResult",
    "evaluate_merit",
    "contour_points",
    "optimize_at_nbar",
    "PhasePosterior",
    "phase_grid",
    "Likelihood",
    "bayes_trial",
    "BayesReport",
    "bayes_ensemble",
]
