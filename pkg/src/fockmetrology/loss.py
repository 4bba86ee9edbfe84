"""Photon loss: a beam splitter of transmissivity eta on each arm, traced out.

The channel is applied through its Kraus operators
``<n-k| K_k |n> = sqrt(C(n, k)) eta^{(n-k)/2} (1-eta)^{k/2}``.  Each ``K_k``
has a single shifted diagonal, so the channel is evaluated as ``dim`` shifted
element-wise products instead of dense matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import OutOfRange
from .fock import FockSpace, ModeOperator, SingleModeState, TwoModeDensity, TwoModeState


@dataclass(frozen=True)
class LossSpec:
    """Transmission probabilities of arms a and b."""

    eta_a: float = 1.0
    eta_b: float = 1.0

    def __post_init__(self):
        for name in ("eta_a", "eta_b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise OutOfRange(f"{name}={v!r} must lie in [0, 1]")
            object.__setattr__(self, name, float(v))

    @classmethod
    def symmetric(cls, eta: float) -> "LossSpec":
        return cls(eta, eta)

    @property
    def is_symmetric(self) -> bool:
        return self.eta_a == self.eta_b

    @property
    def lossless(self) -> bool:
        return self.eta_a == 1.0 and self.eta_b == 1.0

    def to_dict(self) -> dict:
        return {"eta_a": self.eta_a, "eta_b": self.eta_b}

    @classmethod
    def from_dict(cls, d: dict) -> "LossSpec":
        unknown = set(d) - {"eta_a", "eta_b"}
        if unknown:
            raise OutOfRange(f"unknown LossSpec fields: {sorted(unknown)}")
        return cls(d.get("eta_a", 1.0), d.get("eta_b", 1.0))


@lru_cache(maxsize=256)
def _kraus_weights(dim: int, eta: float) -> np.ndarray:
    """``w[k, n] = <n-k| K_k |n>`` (zero for ``k > n``)."""
    if not 0.0 <= eta <= 1.0:
        raise OutOfRange(f"eta={eta!r} must lie in [0, 1]")
    n = np.arange(dim)[None, :]
    k = np.arange(dim)[:, None]
    valid = k <= n
    nk = np.where(valid, n - k, 0)
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(nk + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_t = np.where(nk > 0, nk * np.log(eta), 0.0) if eta > 0 else np.where(nk > 0, -np.inf, 0.0)
        log_r = np.where(k > 0, k * np.log1p(-eta), 0.0) if eta < 1 else np.where(k > 0, -np.inf, 0.0)
        w = np.exp(0.5 * (log_binom + log_t + log_r))
    w = np.where(valid, w, 0.0)
    w.setflags(write=False)
    return w


def kraus_set(space: FockSpace, eta: float) -> list[ModeOperator]:
    """Kraus operators ``K_0 .. K_{dim-1}`` of single-arm loss with transmissivity ``eta``."""
    w = _kraus_weights(space.dim, float(eta))
    ops = []
    for k in range(space.dim):
        mat = np.zeros((space.dim, space.dim), dtype=complex)
        n = np.arange(k, space.dim)
        mat[n - k, n] = w[k, n]
        ops.append(ModeOperator(space, mat))
    return ops


def _lossy_axes(r: np.ndarray, w: np.ndarray, ax_row: int, ax_col: int) -> np.ndarray:
    """Apply the channel on the index pair (ax_row, ax_col) of tensor ``r``."""
    d = w.shape[0]
    out = np.zeros_like(r)
    for k in range(d):
        wk = w[k, k:]
        if not np.any(wk):
            continue
        src = [slice(None)] * r.ndim
        dst = [slice(None)] * r.ndim
        src[ax_row] = src[ax_col] = slice(k, d)
        dst[ax_row] = dst[ax_col] = slice(0, d - k)
        shape_row = [1] * r.ndim
        shape_col = [1] * r.ndim
        shape_row[ax_row] = shape_col[ax_col] = d - k
        out[tuple(dst)] += wk.reshape(shape_row) * r[tuple(src)] * wk.reshape(shape_col)
    return out


def apply_loss_single(x, eta: float) -> np.ndarray:
    """Lossy single-mode density from a :class:`SingleModeState` or density matrix."""
    sigma = x.density() if isinstance(x, SingleModeState) else np.asarray(x, dtype=complex)
    if float(eta) == 1.0:
        return sigma.copy()
    return _lossy_axes(sigma, _kraus_weights(sigma.shape[0], float(eta)), 0, 1)


def apply_loss(x, loss: LossSpec) -> TwoModeDensity:
    """``sum_{k,l} (K_k (x) K_l) rho (K_k (x) K_l)^dag`` for a state or density."""
    d = x.space.dim
    if isinstance(x, TwoModeState):
        mat = np.outer(x.amp, x.amp.conj())
    elif isinstance(x, TwoModeDensity):
        mat = np.array(x.mat)
    else:
        raise TypeError(f"expected a two-mode state or density, got {type(x).__name__}")
    r = mat.reshape(d, d, d, d)  # r[m, n, m', n']
    if loss.eta_a != 1.0:
        r = _lossy_axes(r, _kraus_weights(d, loss.eta_a), 0, 2)
    if loss.eta_b != 1.0:
        r = _lossy_axes(r, _kraus_weights(d, loss.eta_b), 1, 3)
    return TwoModeDensity.hermitized(x.space, r.reshape(d * d, d * d))
