"""Fisher information for two-mode phase estimation.

The relative phase enters as ``exp(i phi n_a)``; for the QFI the symmetric
generator ``G = (n_a - n_b) / 2`` is used so that the pure-state limit equals
``Var(n_a - n_b)``.  The measurement is a 50:50 beam splitter followed by
photon counting in both outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.optimize import minimize_scalar

from .errors import (
    DegenerateState,
    DerivativeInconsistent,
    NotPathSymmetric,
    NotPositive,
    ZeroInformation,
)
from .fock import (
    FockSpace,
    TwoModeDensity,
    TwoModeState,
    _lowering,
    bs_blocks,
    relative_phase_shift,
)
from .states import cat_tau, ses_norm

#: Outcomes with smaller probability are left out of the CFI sum.
P_MIN = 1e-14


# -- photon-number moments -------------------------------------------------------


class PhotonMoments(NamedTuple):
    var_a: float
    var_b: float
    cov: float


def _joint_probs(x) -> np.ndarray:
    if isinstance(x, TwoModeState):
        return x.probs
    if isinstance(x, TwoModeDensity):
        return x.diagonal
    raise TypeError(f"expected a two-mode state or density, got {type(x).__name__}")


def _means(p: np.ndarray) -> tuple[float, float]:
    n = np.arange(p.shape[0])
    return float(p.sum(axis=1) @ n), float(p.sum(axis=0) @ n)


def photon_moments(x) -> PhotonMoments:
    """Variances of ``n_a``, ``n_b`` and their covariance."""
    p = _joint_probs(x)
    n = np.arange(p.shape[0], dtype=float)
    pa, pb = p.sum(axis=1), p.sum(axis=0)
    ma, mb = pa @ n, pb @ n
    var_a = pa @ n**2 - ma**2
    var_b = pb @ n**2 - mb**2
    cov = n @ p @ n - ma * mb
    return PhotonMoments(float(var_a), float(var_b), float(cov))


# -- path symmetry ---------------------------------------------------------------


def path_symmetry_overlap(psi: TwoModeState) -> tuple[float, float]:
    """Largest ``|<psi| SWAP exp(i theta (n_a - n_b)) |psi>|`` over ``theta``.

    Returns ``(overlap, theta)``.  A fixed relative phase offset does not change
    the photon statistics or the QFI, so states that are mode-swap symmetric
    only up to such an offset (e.g. a beam-splitter output) still count.
    """
    c = psi.matrix
    d = c.shape[0]
    prod = np.conj(c) * c.T  # conj(c_mn) c_nm, weight of frequency n - m
    k = np.subtract.outer(np.arange(d), np.arange(d)).T  # k[m, n] = n - m
    w = np.bincount((k + d - 1).ravel(), weights=prod.real.ravel(), minlength=2 * d - 1) + 1j * np.bincount(
        (k + d - 1).ravel(), weights=prod.imag.ravel(), minlength=2 * d - 1
    )
    freqs = np.arange(-(d - 1), d)

    def overlap(theta):
        return abs(np.sum(w * np.exp(1j * theta * freqs)))

    grid = np.linspace(0.0, 2 * np.pi, 8 * d + 1)[:-1]
    vals = np.abs(np.exp(1j * np.outer(grid, freqs)) @ w)
    i = int(np.argmax(vals))
    step = grid[1] - grid[0]
    res = minimize_scalar(
        lambda t: -overlap(t),
        bounds=(grid[i] - step, grid[i] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    best = max((vals[i], grid[i]), (-res.fun, float(res.x)))
    return float(best[0]), float(best[1] % (2 * np.pi))


def check_path_symmetry(psi: TwoModeState, tol: float = 1e-8) -> bool:
    return path_symmetry_overlap(psi)[0] >= 1.0 - tol


# -- QFI -------------------------------------------------------------------------


def _rel_close(a: float, b: float, rtol: float, atol: float = 1e-12) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b)) + atol


def qfi_pure(psi: TwoModeState) -> float:
    """``F_Q = 2 (Var - Cov)`` for a pure path-symmetric state.

    Raises :class:`NotPathSymmetric` otherwise: the variance formula would then
    overstate the information available without a phase reference.
    """
    if not check_path_symmetry(psi):
        raise NotPathSymmetric("state is not path-symmetric; use qfi_mixed on its phase average")
    var_a, var_b, cov = photon_moments(psi)
    f = 2.0 * (var_a - cov)
    f_diff = var_a + var_b - 2.0 * cov  # Var(n_a - n_b)
    # the two agree up to the path-symmetry tolerance (truncation leaves a ~1e-8 mismatch)
    if not _rel_close(f, f_diff, 1e-6, 1e-10):
        raise AssertionError(f"2(Var-Cov)={f!r} disagrees with Var(n_a-n_b)={f_diff!r}")
    return max(f, 0.0)


def _qfi_from_eig(lam: np.ndarray, gen: np.ndarray, eig_tol: float) -> float:
    """``2 sum (l_i - l_j)^2 / (l_i + l_j) |G_ij|^2`` with ``G`` in the eigenbasis."""
    lam = np.clip(lam, 0.0, None)
    s = lam[:, None] + lam[None, :]
    dl = lam[:, None] - lam[None, :]
    cut = eig_tol * max(lam.max(), 0.0)
    keep = s > cut
    weight = np.zeros_like(s)
    weight[keep] = dl[keep] ** 2 / s[keep]
    return float(2.0 * np.sum(weight * np.abs(gen) ** 2))


def _rel_generator(d: int) -> np.ndarray:
    m = np.repeat(np.arange(d), d)
    n = np.tile(np.arange(d), d)
    return 0.5 * (m - n)


def qfi_mixed(
    rho: TwoModeDensity,
    eig_tol: float = 1e-12,
    phi: float = 0.0,
    check_phase: bool = True,
) -> float:
    """QFI of ``rho`` for the phase generated by ``(n_a - n_b) / 2``.

    Uses the eigendecomposition ``rho = sum l_i |l_i><l_i|`` and
    ``d rho / d phi = i [G, rho]``; eigenpairs with ``l_i + l_j`` below
    ``eig_tol * l_max`` are skipped.  With ``check_phase`` the value is
    recomputed after a phase shift of 0.7 rad and must agree to 1e-8.
    """
    if phi:
        rho = relative_phase_shift(rho, phi)
    f = _qfi_dense(rho, eig_tol)
    if check_phase:
        f2 = _qfi_dense(relative_phase_shift(rho, 0.7), eig_tol)
        if not _rel_close(f, f2, 1e-8, 1e-10):
            raise AssertionError(f"QFI depends on phi: {f!r} vs {f2!r}")
    return f


def _qfi_dense(rho: TwoModeDensity, eig_tol: float) -> float:
    lam, vec = np.linalg.eigh(rho.mat)
    if lam[0] < -1e-10:
        raise NotPositive(f"density matrix has eigenvalue {lam[0]:.3e}")
    g = _rel_generator(rho.space.dim)
    gen = vec.conj().T @ (g[:, None] * vec)
    return _qfi_from_eig(lam, gen, eig_tol)


def qfi_single_mode(sigma: np.ndarray, eig_tol: float = 1e-12) -> float:
    """QFI of a single-mode density for the generator ``n``."""
    lam, vec = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    if lam[0] < -1e-10:
        raise NotPositive(f"density matrix has eigenvalue {lam[0]:.3e}")
    n = np.arange(sigma.shape[0])
    gen = vec.conj().T @ (n[:, None] * vec)
    return _qfi_from_eig(lam, gen, eig_tol)


def qfi_product(sigma_a: np.ndarray, sigma_b: np.ndarray, eig_tol: float = 1e-12) -> float:
    """QFI of ``sigma_a (x) sigma_b`` for ``G = (n_a - n_b)/2``.

    The QFI is additive over a product with a local generator, so this costs
    two single-mode eigendecompositions instead of one on the joint space.
    """
    return 0.25 * (qfi_single_mode(sigma_a, eig_tol) + qfi_single_mode(sigma_b, eig_tol))


def qfi_beam_split_product(sigma_a: np.ndarray, sigma_b: np.ndarray, eig_tol: float = 1e-12) -> float:
    """QFI of ``U_BS (sigma_a (x) sigma_b) U_BS^dag`` for ``G = (n_a - n_b)/2``.

    In the frame before the beam splitter the generator becomes
    ``(i/2)(a^dag b - a b^dag)`` and the eigenvectors factorise, so no joint
    eigendecomposition is needed.
    """
    la, ea = np.linalg.eigh(0.5 * (sigma_a + sigma_a.conj().T))
    lb, eb = np.linalg.eigh(0.5 * (sigma_b + sigma_b.conj().T))
    if min(la[0], lb[0]) < -1e-10:
        raise NotPositive("single-mode factor is not positive")
    a = _lowering(sigma_a.shape[0])
    at = ea.conj().T @ a @ ea  # a in the eigenbasis of sigma_a
    bt = eb.conj().T @ a @ eb
    gen = 0.5j * (np.kron(at.conj().T, bt) - np.kron(at, bt.conj().T))
    return _qfi_from_eig(np.kron(la, lb), gen, eig_tol)


# -- Mandel decomposition ----------------------------------------------------------


class MandelDecomposition(NamedTuple):
    q: float
    j: float
    qfi: float

    @property
    def boundary(self) -> bool:
        """``J`` sits at -1 or +1 (NOON-like states); the decomposition still holds."""
        return abs(abs(self.j) - 1.0) < 1e-9


def mandel_decomposition(psi: TwoModeState) -> MandelDecomposition:
    """``F_Q = nbar (1 + Q)(1 - J)`` with Mandel ``Q`` of mode a and ``J = Cov/Var``."""
    var_a, _, cov = photon_moments(psi)
    mean_a, mean_b = _means(psi.probs)
    if mean_a <= 0:
        raise DegenerateState("<n_a> = 0: Mandel Q undefined")
    if var_a <= 1e-15:
        raise DegenerateState("Var(n_a) = 0: J undefined")
    q = (var_a - mean_a) / mean_a
    j = cov / var_a
    if not -1.0 - 1e-9 <= j < 1.0:
        raise AssertionError(f"J={j!r} outside [-1, 1)")
    f = (mean_a + mean_b) * (1.0 + q) * (1.0 - j)
    ref = qfi_pure(psi)
    if not _rel_close(f, ref, 1e-9, 1e-10):
        raise AssertionError(f"Mandel form {f!r} disagrees with qfi_pure {ref!r}")
    return MandelDecomposition(float(q), float(j), float(f))


# -- closed forms ------------------------------------------------------------------


class ClosedForm(NamedTuple):
    qfi: float
    nbar: float


def ses_qfi_closed(z: float) -> ClosedForm:
    """``F_Q = 3 nbar^2 / (2 N^2) + 2 nbar`` with ``nbar = 2 N^2 sinh^2 |z|``."""
    n2 = ses_norm(z) ** 2
    nbar = 2.0 * n2 * np.sinh(abs(z)) ** 2
    return ClosedForm(float(3.0 * nbar**2 / (2.0 * n2) + 2.0 * nbar), float(nbar))


def scs_qfi_closed(z: float, alpha: float) -> ClosedForm:
    """QFI and mean photon number of the two-mode squeezed cat in closed form."""
    s1, s2, s4 = np.sinh(z), np.sinh(2 * z), np.sinh(4 * z)
    c2, c4 = np.cosh(2 * z), np.cosh(4 * z)
    tau = cat_tau(alpha)
    a2 = alpha * alpha
    f = 4 * (s1**4 + s1**2) + 2 * a2 * (tau * c4 - s4) + 2 * a2**2 * (c4 - tau * s4 - (tau * c2 - s2) ** 2)
    nbar = 2 * s1**2 + 2 * a2 * (tau * c2 - s2)
    return ClosedForm(float(f), float(nbar))


def crb(qfi: float, mu: int = 1) -> float:
    """Cramér-Rao bound ``1 / sqrt(mu F)``."""
    if int(mu) != mu or mu < 1:
        raise ValueError(f"mu must be a positive integer, got {mu!r}")
    if not qfi > 0:
        raise ZeroInformation("Fisher information is zero; the phase cannot be estimated")
    return float(1.0 / np.sqrt(mu * qfi))


# -- measurement -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MeasurementDistribution:
    """``P(m, n)`` of photon counts behind the beam splitter at phase ``phi``."""

    space: FockSpace
    probs: np.ndarray
    phi: float

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.min() < -1e-14:
            raise ValueError(f"negative probability {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        total = p.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total!r}; raise dim")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


def _output_amplitudes(psi: TwoModeState, phi: float, deriv: bool = False):
    d = psi.space.dim
    m = np.repeat(np.arange(d), d)
    v = np.exp(1j * phi * m) * psi.amp
    out = np.zeros(d * d, dtype=complex)
    dout = np.zeros(d * d, dtype=complex) if deriv else None
    for idx, u, _ in bs_blocks(d):
        out[idx] = u @ v[idx]
        if deriv:
            dout[idx] = u @ (1j * m[idx] * v[idx])
    return out, dout


class MeasurementModel:
    """Outcome probabilities as a trigonometric polynomial in ``phi``.

    ``P_j(phi) = sum_k exp(i k phi) C_k[j]``: after the beam splitter only the
    blocks of the density with equal total photon number on both sides reach
    the diagonal, and the phase multiplies entry ``(m, m')`` by
    ``exp(i (m - m') phi)``.  Building the coefficients once makes repeated
    evaluation over phase grids cheap.
    """

    def __init__(self, x=None, *, blocks=None, space: FockSpace | None = None):
        if x is not None:
            space = x.space
            blocks = _blocks_of(x)
        d = space.dim
        self.space = space
        self.pure = isinstance(x, TwoModeState)
        self.freqs = np.arange(-(d - 1), d)
        coeffs = np.zeros((2 * d - 1, d * d), dtype=complex)
        for (idx, u, _), rho_n in zip(bs_blocks(d), blocks):
            k = idx.size
            if rho_n is None:
                continue
            # M[j, p, q] = U[j, p] rho[p, q] conj(U[j, q]), summed along p - q
            mats = u[:, :, None] * rho_n[None, :, :] * u.conj()[:, None, :]
            coeffs[:, idx] = (mats.reshape(k, k * k) @ _diagonal_sums(k, d)).T
        self.coeffs = coeffs

    def probs(self, phis) -> np.ndarray:
        """Outcome probabilities, shape ``(len(phis), dim**2)``."""
        phis = np.atleast_1d(np.asarray(phis, dtype=float))
        return np.real(np.exp(1j * np.outer(phis, self.freqs)) @ self.coeffs)

    def dprobs(self, phis) -> np.ndarray:
        """Exact ``dP/dphi`` from the trigonometric form."""
        phis = np.atleast_1d(np.asarray(phis, dtype=float))
        return np.real((1j * self.freqs) * np.exp(1j * np.outer(phis, self.freqs)) @ self.coeffs)

    def cfi(self, phis, h: float = 1e-4, check: bool = True) -> np.ndarray:
        """CFI at each phase.

        Pure inputs use exact derivatives.  Mixed inputs use central
        differences with step ``h`` and ``h/2``; disagreement beyond 1e-4
        relative raises :class:`DerivativeInconsistent`.
        """
        phis = np.atleast_1d(np.asarray(phis, dtype=float))
        p = self.probs(phis)
        if self.pure:
            return _fisher_sum(p, self.dprobs(phis))
        f_h = _fisher_sum(p, (self.probs(phis + h) - self.probs(phis - h)) / (2 * h))
        f_h2 = _fisher_sum(p, (self.probs(phis + h / 2) - self.probs(phis - h / 2)) / h)
        if check:
            bad = np.abs(f_h - f_h2) > 1e-4 * np.maximum(np.abs(f_h2), 1e-8)
            if np.any(bad):
                i = int(np.argmax(bad))
                raise DerivativeInconsistent(f"CFI {f_h[i]!r} (h) vs {f_h2[i]!r} (h/2) at phi={phis[i]!r}")
        return f_h2

    def best_phase(self, n_grid: int = 200, refine: bool = True) -> tuple[float, float]:
        """Phase in ``[0, 2 pi)`` maximising the CFI; returns ``(phi, cfi)``."""
        grid = np.linspace(0.0, 2 * np.pi, n_grid, endpoint=False)
        # rank the grid with the exact trigonometric derivative, report via cfi()
        i = int(np.argmax(_fisher_sum(self.probs(grid), self.dprobs(grid))))
        best = (float(grid[i]), float(self.cfi([grid[i]])[0]))
        if refine:
            step = grid[1] - grid[0]
            res = minimize_scalar(
                lambda t: -float(self.cfi([t])[0]),
                bounds=(grid[i] - step, grid[i] + step),
                method="bounded",
                options={"xatol": 1e-7},
            )
            if -res.fun > best[1]:
                best = (float(res.x % (2 * np.pi)), float(-res.fun))
        return best


@lru_cache(maxsize=None)
def _diagonal_sums(k: int, d: int) -> sparse.csr_matrix:
    """Sparse ``(k*k, 2d-1)`` map sending entry ``(p, q)`` to frequency ``p - q``."""
    diff = np.subtract.outer(np.arange(k), np.arange(k)).ravel() + d - 1
    return sparse.csr_matrix((np.ones(k * k), (np.arange(k * k), diff)), shape=(k * k, 2 * d - 1))


def _fisher_sum(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    keep = p >= P_MIN
    safe = np.where(keep, p, 1.0)
    return np.sum(np.where(keep, dp * dp / safe, 0.0), axis=-1)


def _blocks_of(x) -> list:
    d = x.space.dim
    blocks = []
    if isinstance(x, TwoModeState):
        for idx, _, _ in bs_blocks(d):
            v = x.amp[idx]
            blocks.append(np.outer(v, v.conj()))
    elif isinstance(x, TwoModeDensity):
        for idx, _, _ in bs_blocks(d):
            blocks.append(x.mat[np.ix_(idx, idx)])
    else:
        raise TypeError(f"expected a two-mode state or density, got {type(x).__name__}")
    return blocks


def product_blocks(sigma_a: np.ndarray, sigma_b: np.ndarray) -> list:
    """Equal-total-photon blocks of ``sigma_a (x) sigma_b`` without forming the product."""
    d = sigma_a.shape[0]
    blocks = []
    for idx, _, m in bs_blocks(d):
        n = idx - m * d
        blocks.append(sigma_a[np.ix_(m, m)] * sigma_b[np.ix_(n, n)])
    return blocks


def measurement_distribution(x, phi: float) -> MeasurementDistribution:
    """Photon-count distribution behind the beam splitter at phase ``phi``."""
    d = x.space.dim
    if isinstance(x, TwoModeState):
        out, _ = _output_amplitudes(x, phi)
        p = np.abs(out) ** 2
    else:
        p = MeasurementModel(x).probs([phi])[0]
    return MeasurementDistribution(x.space, p.reshape(d, d), float(phi))


def cfi(x, phi: float) -> float:
    """Classical Fisher information of beam splitter + photon counting at ``phi``."""
    if isinstance(x, TwoModeState):
        out, dout = _output_amplitudes(x, phi, deriv=True)
        p = np.abs(out) ** 2
        dp = 2.0 * np.real(np.conj(out) * dout)
        return float(_fisher_sum(p, dp))
    return float(MeasurementModel(x).cfi([phi])[0])


# -- reports -----------------------------------------------------------------------


@dataclass(frozen=True)
class FisherReport:
    qfi: float
    cfi_at_phi: float
    phi: float
    mu: int = 1
    crb: float = float("inf")

    def __post_init__(self):
        if self.qfi < 0 or self.cfi_at_phi < 0:
            raise ValueError("Fisher information must be non-negative")
        if self.cfi_at_phi > self.qfi * (1 + 1e-6) + 1e-12:
            raise ValueError(f"CFI {self.cfi_at_phi!r} exceeds QFI {self.qfi!r}")
        object.__setattr__(self, "crb", crb(self.qfi, self.mu) if self.qfi > 0 else float("inf"))
