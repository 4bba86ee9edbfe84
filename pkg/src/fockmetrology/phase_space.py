"""Single-mode Wigner functions, Wigner-overlap fidelity and fidelity-based QFI.

Phase-space coordinates are ``beta = x + i p`` with ``a = x + i p`` (so
``[x, p] = i/2``).  In this convention the vacuum Wigner function is
``(2/pi) exp(-2 (x^2 + p^2))``, it integrates to one, and the overlap of two
pure states is ``pi * integral(W1 W2)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import GridMismatch, GridTooSmall, OutOfRange
from .fock import SingleModeState, TwoModeState, relative_phase_shift, tensor

NORM_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """``values[i, j] = W(xs[i], ps[j])`` on a uniform rectangular grid."""

    x_range: tuple
    p_range: tuple
    resolution: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.resolution, self.resolution):
            raise ValueError(f"values shape {self.values.shape} does not match resolution {self.resolution}")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(*self.x_range, self.resolution)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(*self.p_range, self.resolution)

    def integrate(self, f: np.ndarray | None = None) -> float:
        f = self.values if f is None else f
        return float(trapezoid(trapezoid(f, self.ps, axis=1), self.xs))

    @property
    def normalization(self) -> float:
        return self.integrate()

    def same_grid(self, other: "WignerGrid") -> bool:
        return (
            self.resolution == other.resolution
            and np.allclose(self.x_range, other.x_range, rtol=0, atol=0)
            and np.allclose(self.p_range, other.p_range, rtol=0, atol=0)
        )

    def to_csv(self) -> str:
        """Columns ``x, p, w``; one row per grid point, x-major."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "p", "w"])
        for i, x in enumerate(self.xs):
            for j, p in enumerate(self.ps):
                w.writerow([repr(float(x)), repr(float(p)), repr(float(self.values[i, j]))])
        return buf.getvalue()


def _density_of(state) -> np.ndarray:
    if isinstance(state, SingleModeState):
        return state.density()
    rho = np.asarray(state, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise TypeError("expected a SingleModeState or a square single-mode density matrix")
    return rho


def _effective_levels(rho: np.ndarray, tail: float = 1e-20) -> int:
    """Number of leading levels carrying all but ``tail`` of the population."""
    p = np.clip(np.real(np.diag(rho)), 0.0, None)
    above = np.cumsum(p[::-1])[::-1]  # above[n] = population of levels >= n
    keep = np.nonzero(above > tail * max(p.sum(), 1e-300))[0]
    return int(keep[-1]) + 1 if keep.size else 1


def _displaced_parity(beta: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``(2/pi) Tr[rho D(beta) P D(beta)^dag]`` for a flat array of ``beta``.

    Along the ``k``-th diagonal of ``rho`` the displaced-parity elements are
    ``(-1)^m (2 beta)^k sqrt(m!/(m+k)!) L_m^{(k)}(4|beta|^2) e^{-2|beta|^2}``.
    The Laguerre factors come from their three-term recurrence in ``m``
    (normalised so nothing overflows), all diagonals at once.
    """
    d = rho.shape[0]
    x = 4.0 * np.abs(beta) ** 2
    k = np.arange(d, dtype=float)[:, None]
    diag = np.zeros((d, d), dtype=complex)  # diag[m, k] = rho[m, m + k]
    for kk in range(d):
        diag[: d - kk, kk] = np.diagonal(rho, kk)
    sums = np.zeros((d, beta.size), dtype=complex)
    prev2 = np.zeros((d, beta.size))
    prev = np.ones((d, beta.size))
    for m in range(d):
        if m == 0:
            cur = prev
        else:
            cur = ((2 * m - 1 + k - x) * prev - np.sqrt((m - 1) * (m - 1 + k)) * prev2) / np.sqrt(m * (m + k))
            prev2, prev = prev, cur
        n_k = d - m
        sums[:n_k] += ((-1) ** m * diag[m, :n_k])[:, None] * cur[:n_k]
    # (2 beta)^k / sqrt(k!) pairs with the sqrt(k!) taken out of the Laguerre recurrence
    total = sums[0].copy()
    g = np.ones(beta.size, dtype=complex)
    for kk in range(1, d):
        g = g * 2.0 * beta / np.sqrt(kk)
        total += 2.0 * g * sums[kk]
    return (2.0 / np.pi) * np.real(total) * np.exp(-0.5 * x)


def wigner(state, x_range=(-6.0, 6.0), p_range=(-6.0, 6.0), resolution: int = 201, check: bool = True) -> WignerGrid:
    """Wigner function as displaced parity, ``W(beta) = (2/pi) <D(beta) P D(beta)^dag>``.

    Raises :class:`GridTooSmall` if the grid integral misses one by more than
    1e-3, i.e. the state leaks out of the window.
    """
    if resolution < 3:
        raise OutOfRange("resolution must be at least 3")
    rho = _density_of(state)
    d = _effective_levels(rho)
    xs = np.linspace(*x_range, resolution)
    ps = np.linspace(*p_range, resolution)
    beta = (xs[:, None] + 1j * ps[None, :]).ravel()
    vals = np.empty(beta.size)
    step = max(256, 2**22 // max(d, 1))
    for s in range(0, beta.size, step):
        vals[s : s + step] = _displaced_parity(beta[s : s + step], rho[:d, :d])
    grid = WignerGrid(tuple(map(float, x_range)), tuple(map(float, p_range)), resolution,
                      vals.reshape(resolution, resolution))
    if check:
        norm = grid.normalization
        if abs(norm - 1.0) > NORM_TOL:
            raise GridTooSmall(f"Wigner function integrates to {norm:.6f} on x{x_range} p{p_range}; widen the grid")
    return grid


def wigner_overlap_fidelity(w1: WignerGrid, w2: WignerGrid) -> float:
    """``pi * integral(W1 W2 dx dp)``; equals ``|<psi1|psi2>|^2`` for pure states."""
    if not w1.same_grid(w2):
        raise GridMismatch("Wigner grids differ in range or resolution")
    return float(np.pi * w1.integrate(w1.values * w2.values))


def amplitude_fidelity(a: SingleModeState, b: SingleModeState) -> float:
    return float(abs(np.vdot(a.amp, b.amp)) ** 2)


def qfi_from_fidelity(state, dphi: float = 1e-3) -> float:
    """``8 (1 - sqrt(F)) / dphi^2`` with ``F = |<psi| exp(i dphi (n_a - n_b)/2) |psi>|^2``.

    ``state`` is a :class:`TwoModeState` or a pair of single-mode states.
    """
    if not dphi > 0:
        raise OutOfRange(f"dphi must be positive, got {dphi}")
    if isinstance(state, tuple):
        state = tensor(*state)
    if not isinstance(state, TwoModeState):
        raise TypeError("expected a TwoModeState or a (SingleModeState, SingleModeState) pair")
    shifted = relative_phase_shift(state, dphi)
    fid = min(abs(np.vdot(state.amp, shifted.amp)) ** 2, 1.0)
    return float(8.0 * (1.0 - np.sqrt(fid)) / dphi**2)
