import math

import numpy as np
import pytest
from scipy.linalg import expm

from fockmetrology.acceptance import wigner_panel_states, random_single_mode_states
from fockmetrology.errors import GridMismatch, GridTooSmall, OutOfRange
from fockmetrology.fock import FockSpace, squeezed_vacuum_amplitudes
from fockmetrology.metrology import qfi_pure
from fockmetrology.phase_space import (
    WignerGrid,
    amplitude_fidelity,
    qfi_from_fidelity,
    wigner,
    wigner_overlap_fidelity,
)
from fockmetrology.states import StateSpec, cat, coherent, noon, squeezed_cat, two_mode_scs


def brute_wigner(rho, x, p):
    """(2/pi) Tr[rho D P D^dag] with D from scipy expm in a padded space."""
    d = rho.shape[0]
    big = 3 * d + 40
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    beta = x + 1j * p
    disp = expm(beta * a.T - np.conj(beta) * a)
    parity = np.diag((-1.0) ** np.arange(big))
    full = np.zeros((big, big), dtype=complex)
    full[:d, :d] = rho
    return float(2 / np.pi * np.real(np.trace(full @ disp @ parity @ disp.conj().T)))


def test_vacuum_peak():
    w = wigner(FockSpace(10).vacuum())
    i = np.argmax(w.values)
    assert w.values.flat[i] == pytest.approx(2 / np.pi, rel=1e-12)
    assert w.xs[i // 201] == 0.0 and w.ps[i % 201] == 0.0
    assert w.normalization == pytest.approx(1.0, abs=1e-4)


def test_cat_has_negative_fringes():
    w = wigner(cat(FockSpace(40), 2.0))
    assert w.values.min() < 0
    assert w.values.min() == pytest.approx(-2 / np.pi * 0.746, abs=0.02)


def test_squeezed_vacuum_variances():
    r = 1.0
    w = wigner(StateSpec("SqueezedVacuum", z=r).single(FockSpace(120)), (-8, 8), (-8, 8), 321)
    x2 = w.integrate(w.values * w.xs[:, None] ** 2)
    p2 = w.integrate(w.values * w.ps[None, :] ** 2)
    assert x2 / 0.25 == pytest.approx(math.exp(-2 * r), rel=1e-4)
    assert p2 / 0.25 == pytest.approx(math.exp(2 * r), rel=1e-4)
    assert p2 / x2 == pytest.approx(math.exp(4 * r), rel=1e-4)


def test_coherent_state_centre():
    w = wigner(coherent(FockSpace(40), 1.5))
    i = np.unravel_index(np.argmax(w.values), w.values.shape)
    assert w.xs[i[0]] == pytest.approx(1.5) and w.ps[i[1]] == pytest.approx(0.0)


@pytest.mark.parametrize("state", [
    squeezed_cat(FockSpace(50), 0.4, 1.2),
    cat(FockSpace(40), 1.7),
    squeezed_vacuum_amplitudes(FockSpace(50), 0.5 + 0.3j),
])
def test_matches_brute_force_displaced_parity(state):
    rho = state.density()
    w = wigner(state, (-3, 3), (-3, 3), 7, check=False)
    for i, x in enumerate(w.xs[::2]):
        for j, p in enumerate(w.ps[::3]):
            assert w.values[2 * i, 3 * j] == pytest.approx(brute_wigner(rho, x, p), abs=1e-10)


def test_accepts_density_matrix():
    s = cat(FockSpace(30), 1.0)
    a = wigner(s, resolution=41)
    b = wigner(s.density(), resolution=41)
    assert np.array_equal(a.values, b.values)
    with pytest.raises(TypeError):
        wigner(np.ones((3, 4)))


def test_grid_too_small():
    with pytest.raises(GridTooSmall):
        wigner(coherent(FockSpace(60), 4.0), (-2, 2), (-2, 2), 81)
    with pytest.raises(OutOfRange):
        wigner(FockSpace(5).vacuum(), resolution=2)


def test_self_overlap_is_one():
    s = squeezed_cat(FockSpace(50), 0.3, 1.5)
    w = wigner(s)
    assert wigner_overlap_fidelity(w, w) == pytest.approx(1.0, abs=1e-3)


def test_vacuum_cat_overlap():
    sp = FockSpace(40)
    alpha = 2.0
    # |<0|cat>|^2 = 4 e^{-alpha^2} / (2 + 2 e^{-2 alpha^2})
    direct = 4 / (2 + 2 * math.exp(-2 * alpha**2)) * math.exp(-alpha**2)
    w0, wc = wigner(sp.vacuum()), wigner(cat(sp, alpha))
    assert wigner_overlap_fidelity(w0, wc) == pytest.approx(direct, abs=1e-3)
    assert direct == pytest.approx(amplitude_fidelity(sp.vacuum(), cat(sp, alpha)), rel=1e-12)


def test_vacuum_coherent_overlap():
    sp = FockSpace(60)
    w0, w3 = wigner(sp.vacuum(), (-3, 7), (-5, 5), 201), wigner(coherent(sp, 3.0), (-3, 7), (-5, 5), 201)
    assert wigner_overlap_fidelity(w0, w3) == pytest.approx(math.exp(-9), abs=5e-4)


def test_grid_mismatch():
    v = FockSpace(5).vacuum()
    with pytest.raises(GridMismatch):
        wigner_overlap_fidelity(wigner(v, resolution=51), wigner(v, resolution=53))


def test_random_pair_overlaps():
    states = random_single_mode_states(20)
    for a, b in zip(states[::2], states[1::2]):
        wa, wb = wigner(a), wigner(b)
        assert wigner_overlap_fidelity(wa, wb) == pytest.approx(amplitude_fidelity(a, b), abs=1e-3)


def test_default_grid_normalization():
    states = [FockSpace(10).vacuum(), coherent(FockSpace(40), 1.0), cat(FockSpace(40), 2.0),
              StateSpec("SqueezedVacuum", z=0.5).single(FockSpace(60)), squeezed_cat(FockSpace(60), 0.5, 2.0)]
    for s in states:
        assert wigner(s).normalization == pytest.approx(1.0, abs=1e-4)


def test_wigner_panel_states_normalize_on_wide_grid():
    for name, s in wigner_panel_states().items():
        assert wigner(s, (-9, 9), (-9, 9), 241).normalization == pytest.approx(1.0, abs=1e-4), name


def test_panel_strong_squeezing_leaks_out_of_default_grid():
    # anti-squeezed width ~ e^{1.3}/2 puts visible weight beyond |p| = 6
    s = wigner_panel_states()["scs_z1.3_a2"]
    assert abs(wigner(s, check=False).normalization - 1.0) > 1e-4


def test_to_csv():
    g = WignerGrid((-1.0, 1.0), (-1.0, 1.0), 3, np.arange(9.0).reshape(3, 3))
    lines = g.to_csv().splitlines()
    assert lines[0] == "x,p,w"
    assert lines[1] == "-1.0,-1.0,0.0"
    assert lines[2] == "-1.0,0.0,1.0"
    assert len(lines) == 10


def test_qfi_from_fidelity_examples():
    vac = two_mode_scs(FockSpace(10), 0.0, 0.0)
    assert qfi_from_fidelity(vac) == pytest.approx(0.0, abs=1e-9)
    assert qfi_from_fidelity(noon(FockSpace(8), 2)) == pytest.approx(4.0, rel=1e-3)
    spec = StateSpec("SCS", 0.929, 0.988)
    psi = spec.probe(FockSpace(70))
    assert qfi_from_fidelity(psi) == pytest.approx(qfi_pure(psi), rel=1e-2)
    single = spec.single(FockSpace(70))
    assert qfi_from_fidelity((single, single)) == pytest.approx(qfi_from_fidelity(psi), rel=1e-12)
    with pytest.raises(OutOfRange):
        qfi_from_fidelity(psi, 0.0)


def test_qfi_from_fidelity_converges_quadratically():
    psi = two_mode_scs(FockSpace(50), 0.5, 1.0)
    f = qfi_pure(psi)
    errs = [abs(qfi_from_fidelity(psi, d) - f) for d in (0.04, 0.02, 0.01)]
    for big, small in zip(errs, errs[1:]):
        assert big / small == pytest.approx(4.0, rel=0.05)
