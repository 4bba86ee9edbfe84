"""Truncated Fock-space states, ladder operators and the basic unitaries.

Single-mode vectors are indexed by photon number ``n = 0 .. dim-1``.  Two-mode
vectors are stored row-major in ``(m, n)`` = (photons in mode a, photons in
mode b), so the flat index is ``m * dim + n``.

Every state constructor checks that the probability in the top three Fock
levels stays below ``tail_tol`` and raises :class:`TruncationError` otherwise.
Renormalisation after that check only removes mass below the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NotPositive, OutOfRange, SpaceMismatch, TruncationError

#: Fock levels examined by the truncation-health check.
EDGE_LEVELS = 3


@dataclass(frozen=True)
class FockSpace:
    """Fock basis ``|0>, ..., |dim-1>`` shared by every mode of a computation."""

    dim: int
    tail_tol: float = 1e-8

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise OutOfRange(f"dim must be an integer >= 2, got {self.dim!r}")
        if not (0.0 < self.tail_tol <= 1e-4):
            raise OutOfRange(f"tail_tol must lie in (0, 1e-4], got {self.tail_tol!r}")
        object.__setattr__(self, "dim", int(self.dim))

    def padded(self, extra: int | None = None) -> "FockSpace":
        """Larger working space used to build states away from the cutoff."""
        extra = self.dim if extra is None else extra
        return FockSpace(self.dim + extra, self.tail_tol)

    def vacuum(self) -> "SingleModeState":
        return fock_state(self, 0)


def _frozen(arr, dtype=complex) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _edge_mass(probs: np.ndarray, dim: int) -> float:
    """Probability in levels ``>= dim - EDGE_LEVELS`` (including any beyond ``dim``)."""
    return float(np.sum(probs[dim - EDGE_LEVELS:]))


def check_tail(probs, space: FockSpace, what: str = "state") -> None:
    """Raise :class:`TruncationError` if ``probs`` leaks into the cutoff region."""
    mass = _edge_mass(np.asarray(probs), space.dim)
    if not mass < space.tail_tol:
        raise TruncationError(
            f"{what}: probability {mass:.3e} in the top {EDGE_LEVELS} Fock levels "
            f"exceeds tail_tol={space.tail_tol:.1e} at dim={space.dim}; increase dim"
        )


@dataclass(frozen=True, eq=False)
class SingleModeState:
    """Normalised pure state of one optical mode."""

    space: FockSpace
    amp: np.ndarray

    def __post_init__(self):
        amp = _frozen(self.amp)
        if amp.shape != (self.space.dim,):
            raise SpaceMismatch(f"expected {self.space.dim} amplitudes, got shape {amp.shape}")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalised (norm^2 = {norm!r})")
        check_tail(np.abs(amp) ** 2, self.space)
        object.__setattr__(self, "amp", amp)

    @classmethod
    def from_amplitudes(cls, space: FockSpace, amp, what: str = "state") -> "SingleModeState":
        """Check the tail of ``amp``, drop anything beyond ``space.dim`` and normalise.

        ``amp`` may be longer than ``space.dim`` (built in a padded space); the
        mass beyond the cutoff counts towards the tail check.
        """
        amp = np.asarray(amp, dtype=complex)
        probs = np.abs(amp) ** 2
        total = probs.sum()
        if total <= 0:
            raise ValueError(f"{what}: zero vector")
        check_tail(probs / total, space, what)
        amp = amp[: space.dim]
        return cls(space, amp / np.sqrt(np.vdot(amp, amp).real))

    @property
    def probs(self) -> np.ndarray:
        return np.abs(self.amp) ** 2

    def mean_photons(self) -> float:
        return float(self.probs @ np.arange(self.space.dim))

    def density(self) -> np.ndarray:
        return np.outer(self.amp, self.amp.conj())


@dataclass(frozen=True, eq=False)
class TwoModeState:
    """Normalised pure state of modes a and b (row-major ``(m, n)`` amplitudes)."""

    space: FockSpace
    amp: np.ndarray

    def __post_init__(self):
        d = self.space.dim
        amp = _frozen(self.amp)
        if amp.shape == (d, d):
            amp = _frozen(amp.reshape(d * d))
        if amp.shape != (d * d,):
            raise SpaceMismatch(f"expected {d * d} amplitudes, got shape {amp.shape}")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalised (norm^2 = {norm!r})")
        pa, pb = _marginals(np.abs(amp.reshape(d, d)) ** 2)
        check_tail(pa, self.space, "mode a")
        check_tail(pb, self.space, "mode b")
        object.__setattr__(self, "amp", amp)

    @classmethod
    def normalized(cls, space: FockSpace, amp) -> "TwoModeState":
        amp = np.asarray(amp, dtype=complex).reshape(-1)
        return cls(space, amp / np.sqrt(np.vdot(amp, amp).real))

    @property
    def matrix(self) -> np.ndarray:
        """Amplitudes as a ``dim x dim`` array ``c[m, n]``."""
        d = self.space.dim
        return self.amp.reshape(d, d)

    @property
    def probs(self) -> np.ndarray:
        return np.abs(self.matrix) ** 2

    def density(self) -> "TwoModeDensity":
        return TwoModeDensity(self.space, np.outer(self.amp, self.amp.conj()))


@dataclass(frozen=True, eq=False)
class TwoModeDensity:
    """Density matrix on the two-mode space, shape ``(dim**2, dim**2)``.

    Hermiticity and trace are checked on construction.  Positivity needs an
    eigendecomposition; call :meth:`validate` (``qfi_mixed`` checks it anyway).
    """

    space: FockSpace
    mat: np.ndarray

    def __post_init__(self):
        n = self.space.dim ** 2
        mat = _frozen(self.mat)
        if mat.shape != (n, n):
            raise SpaceMismatch(f"expected a {n}x{n} matrix, got shape {mat.shape}")
        herm = float(np.max(np.abs(mat - mat.conj().T)))
        if herm >= 1e-12:
            raise ValueError(f"density matrix is not Hermitian (deviation {herm:.2e})")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        object.__setattr__(self, "mat", mat)

    @classmethod
    def hermitized(cls, space: FockSpace, mat) -> "TwoModeDensity":
        """Wrap a numerically evolved matrix, removing round-off anti-Hermitian parts."""
        mat = np.asarray(mat, dtype=complex)
        return cls(space, 0.5 * (mat + mat.conj().T))

    def validate(self, tol: float = 1e-10) -> "TwoModeDensity":
        lam_min = float(np.linalg.eigvalsh(self.mat)[0])
        if lam_min < -tol:
            raise NotPositive(f"smallest eigenvalue {lam_min:.3e} < -{tol:g}")
        return self

    @property
    def diagonal(self) -> np.ndarray:
        """Photon-number distribution ``P[m, n]``."""
        d = self.space.dim
        return np.real(np.diag(self.mat)).reshape(d, d)


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Single-mode operator as a ``dim x dim`` matrix."""

    space: FockSpace
    mat: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.mat)
        if mat.shape != (self.space.dim, self.space.dim):
            raise SpaceMismatch(f"operator shape {mat.shape} does not match dim={self.space.dim}")
        object.__setattr__(self, "mat", mat)

    def __matmul__(self, other):
        if isinstance(other, ModeOperator):
            _same_space(self.space, other.space)
            return ModeOperator(self.space, self.mat @ other.mat)
        if isinstance(other, SingleModeState):
            _same_space(self.space, other.space)
            return self.mat @ other.amp
        return self.mat @ other

    @property
    def H(self) -> "ModeOperator":
        return ModeOperator(self.space, self.mat.conj().T)


def _same_space(s1: FockSpace, s2: FockSpace) -> None:
    if s1 != s2:
        raise SpaceMismatch(f"Fock spaces differ: {s1} vs {s2}")


def _marginals(p2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return p2.sum(axis=1), p2.sum(axis=0)


# -- ladder operators ------------------------------------------------------------


def _lowering(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def annihilation(space: FockSpace) -> ModeOperator:
    return ModeOperator(space, _lowering(space.dim))


def creation(space: FockSpace) -> ModeOperator:
    return ModeOperator(space, _lowering(space.dim).T.copy())


def number_op(space: FockSpace) -> ModeOperator:
    return ModeOperator(space, np.diag(np.arange(space.dim, dtype=float)).astype(complex))


def fock_state(space: FockSpace, n: int) -> SingleModeState:
    if not 0 <= n < space.dim:
        raise OutOfRange(f"Fock level {n} outside 0..{space.dim - 1}")
    amp = np.zeros(space.dim, dtype=complex)
    amp[n] = 1.0
    return SingleModeState(space, amp)


# -- exponentials ----------------------------------------------------------------


def expm_antihermitian(gen: np.ndarray) -> np.ndarray:
    """``exp(gen)`` for anti-Hermitian ``gen`` via eigh of the Hermitian ``i*gen``."""
    h = 1j * gen
    h = 0.5 * (h + h.conj().T)
    lam, vec = np.linalg.eigh(h)
    return (vec * np.exp(-1j * lam)) @ vec.conj().T


def _displacement_generator(dim: int, alpha: complex) -> np.ndarray:
    a = _lowering(dim)
    return alpha * a.T - np.conj(alpha) * a


def _squeeze_generator(dim: int, z: complex) -> np.ndarray:
    a = _lowering(dim)
    a2 = a @ a
    return 0.5 * (np.conj(z) * a2 - z * a2.T)


def _exp_on(space: FockSpace, gen_fn, pad: bool, what: str) -> np.ndarray:
    if not pad:
        u = expm_antihermitian(gen_fn(space.dim))
    else:
        # exponentiate in a doubled space and keep the dim x dim block
        u = expm_antihermitian(gen_fn(space.padded().dim))[: space.dim, : space.dim]
    check_tail(np.abs(u[:, 0]) ** 2, space, what)
    return u


def displacement(space: FockSpace, alpha: complex, pad: bool = False) -> ModeOperator:
    """``D(alpha) = exp(alpha a^dag - alpha^* a)``.

    By default the truncated generator is exponentiated, which is exactly
    unitary on ``space``.  ``pad=True`` instead exponentiates in a doubled
    space and keeps the leading block: accurate matrix elements, but columns
    pushed through the cutoff lose norm.
    """
    u = _exp_on(space, lambda d: _displacement_generator(d, alpha), pad, f"D({alpha})|0>")
    return ModeOperator(space, u)


def squeeze(space: FockSpace, z: complex, pad: bool = False) -> ModeOperator:
    """``S(z) = exp((z^* a^2 - z a^dag^2) / 2)``; ``pad`` as in :func:`displacement`."""
    u = _exp_on(space, lambda d: _squeeze_generator(d, z), pad, f"S({z})|0>")
    return ModeOperator(space, u)


def healthy_columns(op: ModeOperator) -> int:
    """Number of leading columns whose images keep the top levels below ``tail_tol``.

    Columns past this count are pushed through the cutoff by the operator, so
    the truncated matrix cannot be unitary there.
    """
    space = op.space
    edge = np.sum(np.abs(op.mat[space.dim - EDGE_LEVELS:, :]) ** 2, axis=0)
    lost = 1.0 - np.sum(np.abs(op.mat) ** 2, axis=0)
    bad = np.nonzero((edge + np.maximum(lost, 0.0)) >= space.tail_tol)[0]
    return int(bad[0]) if bad.size else space.dim


def apply_squeeze(space: FockSpace, z: complex, amp) -> SingleModeState:
    """Apply ``S(z)`` to amplitudes, evolving in a padded space to keep the cutoff exact.

    The result is tail-checked in ``space`` before truncation.
    """
    work = space.padded()
    vec = np.zeros(work.dim, dtype=complex)
    amp = np.asarray(amp, dtype=complex)
    vec[: amp.size] = amp
    u = expm_antihermitian(_squeeze_generator(work.dim, z))
    return SingleModeState.from_amplitudes(space, u @ vec, f"S({z}) state")


def squeezed_vacuum_amplitudes(space: FockSpace, z: complex) -> SingleModeState:
    """Closed-form ``S(z)|0>``.

    ``c_2m = (-e^{i theta} tanh r)^m sqrt((2m)!) / (2^m m! sqrt(cosh r))`` with
    ``z = r e^{i theta}``; odd amplitudes vanish.
    """
    r, theta = abs(z), np.angle(z)
    # evaluated on a padded range so mass beyond the cutoff is seen by the tail check
    amp = np.zeros(space.padded().dim, dtype=complex)
    amp[0] = 1.0 / np.sqrt(np.cosh(r))
    ratio = -np.exp(1j * theta) * np.tanh(r)
    for n in range(2, amp.size, 2):
        amp[n] = amp[n - 2] * ratio * np.sqrt((n - 1) / n)
    return SingleModeState.from_amplitudes(space, amp, f"squeezed vacuum z={z}")


# -- two-mode operations ---------------------------------------------------------


@lru_cache(maxsize=16)
def bs_blocks(dim: int, theta: float = np.pi / 4) -> tuple:
    """Blocks of ``exp(i theta (a^dag b + a b^dag))`` per total photon number.

    Returns a tuple of ``(flat_indices, unitary_block, m_values)``; within a block
    the basis is ``|m, N-m>`` ordered by increasing ``m``.
    """
    blocks = []
    for total in range(2 * dim - 1):
        m = np.arange(max(0, total - dim + 1), min(total, dim - 1) + 1)
        k = m.size
        # <m+1, N-m-1| a^dag b |m, N-m> = sqrt((m+1)(N-m))
        off = np.sqrt((m[:-1] + 1.0) * (total - m[:-1]))
        gen = np.diag(off, 1) + np.diag(off, -1)
        if k == 1:
            u = np.ones((1, 1), dtype=complex)
        else:
            lam, vec = np.linalg.eigh(gen)
            u = (vec * np.exp(1j * theta * lam)) @ vec.T
        idx = m * dim + (total - m)
        blocks.append((idx, u, m))
    return tuple(blocks)


def beam_splitter_5050(space: FockSpace) -> np.ndarray:
    """Dense 50:50 beam-splitter unitary ``exp(i pi/4 (a^dag b + a b^dag))``."""
    d = space.dim
    u = np.zeros((d * d, d * d), dtype=complex)
    for idx, block, _ in bs_blocks(d):
        u[np.ix_(idx, idx)] = block
    return u


def apply_beam_splitter(x, inverse: bool = False):
    """Apply the 50:50 beam splitter block by block (cheaper than the dense matrix)."""
    d = x.space.dim
    blocks = bs_blocks(d)
    if isinstance(x, TwoModeState):
        out = np.zeros(d * d, dtype=complex)
        for idx, u, _ in blocks:
            u = u.conj().T if inverse else u
            out[idx] = u @ x.amp[idx]
        return TwoModeState.normalized(x.space, out)
    if isinstance(x, TwoModeDensity):
        full = beam_splitter_5050(x.space)
        if inverse:
            full = full.conj().T
        return TwoModeDensity.hermitized(x.space, full @ x.mat @ full.conj().T)
    raise TypeError(f"cannot apply a beam splitter to {type(x).__name__}")


def _phase_diag(d: int, phi: float, rel: bool) -> np.ndarray:
    m = np.repeat(np.arange(d), d)
    n = np.tile(np.arange(d), d)
    gen = 0.5 * (m - n) if rel else m
    return np.exp(1j * phi * gen)


def phase_shift(x, phi: float):
    """Apply ``exp(i phi n_a)``: only the relative phase is physical, so mode b is untouched."""
    return _apply_diag(x, _phase_diag(x.space.dim, phi, rel=False))


def relative_phase_shift(x, phi: float):
    """Apply ``exp(i phi (n_a - n_b) / 2)``, the symmetric split of the relative phase."""
    return _apply_diag(x, _phase_diag(x.space.dim, phi, rel=True))


def _apply_diag(x, diag: np.ndarray):
    if isinstance(x, TwoModeState):
        return TwoModeState.normalized(x.space, diag * x.amp)
    if isinstance(x, TwoModeDensity):
        return TwoModeDensity.hermitized(x.space, diag[:, None] * x.mat * diag.conj()[None, :])
    raise TypeError(f"expected a two-mode state or density, got {type(x).__name__}")


def tensor(a: SingleModeState, b: SingleModeState) -> TwoModeState:
    if a.space != b.space:
        raise SpaceMismatch(f"cannot tensor states from {a.space} and {b.space}")
    return TwoModeState.normalized(a.space, np.outer(a.amp, b.amp))


def apply_two_mode(u: np.ndarray, x):
    """``U psi`` for a pure state or ``U rho U^dag`` for a density."""
    u = np.asarray(u)
    n = x.space.dim ** 2
    if u.shape != (n, n):
        raise SpaceMismatch(f"unitary shape {u.shape} does not match two-mode dimension {n}")
    if isinstance(x, TwoModeState):
        return TwoModeState.normalized(x.space, u @ x.amp)
    if isinstance(x, TwoModeDensity):
        return TwoModeDensity.hermitized(x.space, u @ x.mat @ u.conj().T)
    raise TypeError(f"expected a two-mode state or density, got {type(x).__name__}")


def swap_modes(psi: TwoModeState) -> TwoModeState:
    return TwoModeState(psi.space, psi.matrix.T.copy())


def as_density(x) -> TwoModeDensity:
    return x.density() if isinstance(x, TwoModeState) else x
