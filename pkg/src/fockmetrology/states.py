"""Named probe states: coherent, cat, squeezed cat, SES, NOON, SVCS, SSV.

All builders take real, non-negative displacement ``alpha`` and real squeezing
``z`` (either sign).  Single-mode families are used as probes by taking two
identical copies, one per interferometer arm.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from .errors import OutOfRange, TruncationError
from .fock import (
    FockSpace,
    SingleModeState,
    TwoModeDensity,
    TwoModeState,
    apply_beam_splitter,
    apply_squeeze,
    squeezed_vacuum_amplitudes,
    tensor,
)


class Family(str, enum.Enum):
    COHERENT = "Coherent"
    SQUEEZED_VACUUM = "SqueezedVacuum"
    CAT = "Cat"
    SQUEEZED_CAT = "SqueezedCat"
    SES = "SES"
    NOON = "NOON"
    SVCS = "SVCS"
    SSV = "SSV"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, Family):
            return name
        key = str(name).strip()
        if key.upper() == "SCS":
            return cls.SQUEEZED_CAT
        for fam in cls:
            if key.lower() in (fam.value.lower(), fam.name.lower()):
                return fam
        raise OutOfRange(f"unknown state family {name!r}")

    @property
    def short(self) -> str:
        """Label used in output tables (``SCS`` for the squeezed cat)."""
        return "SCS" if self is Family.SQUEEZED_CAT else self.value

    @property
    def single_mode(self) -> bool:
        return self in _SINGLE_MODE

    @property
    def product(self) -> bool:
        """Whether the two-mode probe factorises into identical single-mode states."""
        return self in _SINGLE_MODE or self is Family.SSV


_SINGLE_MODE = {Family.COHERENT, Family.SQUEEZED_VACUUM, Family.CAT, Family.SQUEEZED_CAT}


@dataclass(frozen=True)
class StateSpec:
    """Family plus parameters; fields the family does not use are ignored."""

    family: Family
    alpha: float = 0.0
    z: float = 0.0
    N: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.alpha < 0:
            raise OutOfRange(f"alpha must be >= 0, got {self.alpha}")
        if int(self.N) != self.N or self.N < 0:
            raise OutOfRange(f"N must be a non-negative integer, got {self.N}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "z", float(self.z))
        object.__setattr__(self, "N", int(self.N))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpec":
        unknown = set(d) - {"family", "alpha", "z", "N"}
        if unknown:
            raise OutOfRange(f"unknown StateSpec fields: {sorted(unknown)}")
        return cls(d["family"], d.get("alpha", 0.0), d.get("z", 0.0), d.get("N", 0))

    def single(self, space: FockSpace) -> SingleModeState:
        """The single-mode state of a single-mode family."""
        fam = self.family
        if fam is Family.COHERENT:
            return coherent(space, self.alpha)
        if fam is Family.SQUEEZED_VACUUM:
            return squeezed_vacuum_amplitudes(space, self.z)
        if fam is Family.CAT:
            return cat(space, self.alpha)
        if fam is Family.SQUEEZED_CAT:
            return squeezed_cat(space, self.z, self.alpha)
        raise OutOfRange(f"{fam.value} is a two-mode family")

    def probe(self, space: FockSpace) -> TwoModeState:
        """Two-mode probe entering the interferometer."""
        fam = self.family
        if fam.single_mode:
            s = self.single(space)
            return tensor(s, s)
        if fam is Family.SES:
            return ses(space, self.z)
        if fam is Family.NOON:
            return noon(space, self.N)
        if fam is Family.SVCS:
            return svcs(space, self.alpha, self.z)
        return ssv(space, self.z)

    def nbar(self) -> float:
        """Closed-form mean total photon number of :meth:`probe`."""
        return analytic_nbar(self)


def _check_alpha(alpha: float) -> float:
    if np.iscomplexobj(alpha) or alpha < 0:
        raise OutOfRange(f"alpha must be real and >= 0, got {alpha}")
    return float(alpha)


def _coherent_amplitudes(n_levels: int, alpha: float) -> np.ndarray:
    amp = np.empty(n_levels, dtype=complex)
    amp[0] = np.exp(-0.5 * alpha * alpha)
    for n in range(1, n_levels):
        amp[n] = amp[n - 1] * alpha / np.sqrt(n)
    return amp


def coherent(space: FockSpace, alpha: float) -> SingleModeState:
    """``|alpha>`` with ``c_n = exp(-alpha^2/2) alpha^n / sqrt(n!)``."""
    alpha = _check_alpha(alpha)
    amp = _coherent_amplitudes(space.padded().dim, alpha)
    return SingleModeState.from_amplitudes(space, amp, f"coherent alpha={alpha}")


def cat_norm(alpha: float) -> float:
    return (2.0 + 2.0 * np.exp(-2.0 * alpha * alpha)) ** -0.5


def _cat_amplitudes(n_levels: int, alpha: float) -> np.ndarray:
    amp = _coherent_amplitudes(n_levels, alpha)
    amp[1::2] = 0.0
    return 2.0 * cat_norm(alpha) * amp


def cat(space: FockSpace, alpha: float) -> SingleModeState:
    """Even cat ``N (|alpha> + |-alpha>)``; odd Fock amplitudes are exactly zero."""
    alpha = _check_alpha(alpha)
    amp = _cat_amplitudes(space.padded().dim, alpha)
    return SingleModeState.from_amplitudes(space, amp, f"cat alpha={alpha}")


def squeezed_cat(space: FockSpace, z: float, alpha: float) -> SingleModeState:
    """``N S(z) (|alpha> + |-alpha>)``: the cat is built first and then squeezed."""
    alpha = _check_alpha(alpha)
    base = _cat_amplitudes(space.padded().dim, alpha)
    state = apply_squeeze(space, z, base)
    amp = np.array(state.amp)
    amp[1::2] = 0.0  # odd levels stay empty; clear round-off
    return SingleModeState(space, amp / np.linalg.norm(amp))


def two_mode_scs(space: FockSpace, z: float, alpha: float) -> TwoModeState:
    s = squeezed_cat(space, z, alpha)
    return tensor(s, s)


def ses_norm(z: float) -> float:
    return (2.0 + 2.0 / np.cosh(abs(z))) ** -0.5


def ses(space: FockSpace, z: float) -> TwoModeState:
    """Squeezed-entangled state ``N (|z,0> + |0,z>)``."""
    sv = squeezed_vacuum_amplitudes(space, z).amp
    amp = np.zeros((space.dim, space.dim), dtype=complex)
    amp[:, 0] += sv
    amp[0, :] += sv
    return TwoModeState.normalized(space, amp)


def noon(space: FockSpace, N: int) -> TwoModeState:
    """``(|N,0> + |0,N>) / sqrt(2)``; ``N = 0`` gives the vacuum."""
    if int(N) != N or not 0 <= N < space.dim:
        raise OutOfRange(f"NOON photon number N={N} must satisfy 0 <= N < dim={space.dim}")
    amp = np.zeros((space.dim, space.dim), dtype=complex)
    amp[N, 0] += 1.0
    amp[0, N] += 1.0
    return TwoModeState.normalized(space, amp)


def svcs(space: FockSpace, alpha: float, z: float) -> TwoModeState:
    """Coherent state in a, squeezed vacuum in b, mixed on the 50:50 beam splitter."""
    inp = tensor(coherent(space, alpha), squeezed_vacuum_amplitudes(space, z))
    return apply_beam_splitter(inp)


def ssv(space: FockSpace, z: float) -> TwoModeState:
    sv = squeezed_vacuum_amplitudes(space, z)
    return tensor(sv, sv)


def mean_photons(x) -> float:
    """``<n_a + n_b>`` of a two-mode state or density."""
    if isinstance(x, TwoModeState):
        p = x.probs
    elif isinstance(x, TwoModeDensity):
        p = x.diagonal
    else:
        raise TypeError(f"expected a two-mode state or density, got {type(x).__name__}")
    n = np.arange(x.space.dim)
    return float(np.sum(p * (n[:, None] + n[None, :])))


def cat_tau(alpha: float) -> float:
    """``(2 - 2e^{-2 alpha^2}) / (2 + 2e^{-2 alpha^2})``, i.e. ``tanh(alpha^2)``."""
    return float(np.tanh(alpha * alpha))


def scs_nbar(z: float, alpha: float) -> float:
    """Mean total photons of the two-mode squeezed cat: ``2 s1^2 + 2 alpha^2 (tau c2 - s2)``."""
    tau = cat_tau(alpha)
    return float(2 * np.sinh(z) ** 2 + 2 * alpha**2 * (tau * np.cosh(2 * z) - np.sinh(2 * z)))


def analytic_nbar(spec: StateSpec) -> float:
    fam, a, z = spec.family, spec.alpha, spec.z
    if fam is Family.COHERENT:
        return 2 * a * a
    if fam in (Family.SQUEEZED_VACUUM, Family.SSV):
        return float(2 * np.sinh(z) ** 2)
    if fam is Family.CAT:
        return 2 * a * a * cat_tau(a)
    if fam is Family.SQUEEZED_CAT:
        return scs_nbar(z, a)
    if fam is Family.SES:
        return float(2 * ses_norm(z) ** 2 * np.sinh(abs(z)) ** 2)
    if fam is Family.NOON:
        return float(spec.N)
    return float(a * a + np.sinh(z) ** 2)


def healthy_space(specs, start: int = 20, step: int = 10, max_dim: int = 400, tail_tol: float = 1e-8) -> FockSpace:
    """Smallest ``FockSpace`` (in steps of ``step``) in which every probe passes the tail check."""
    specs = [specs] if isinstance(specs, StateSpec) else list(specs)
    for dim in range(start, max_dim + 1, step):
        space = FockSpace(dim, tail_tol)
        try:
            for spec in specs:
                if spec.family.product:
                    spec.single(space) if spec.family.single_mode else squeezed_vacuum_amplitudes(space, spec.z)
                else:
                    spec.probe(space)
        except (TruncationError, OutOfRange):
            continue
        return space
    raise TruncationError(f"no dim <= {max_dim} holds {len(specs)} probe state(s) within tail_tol={tail_tol}")
