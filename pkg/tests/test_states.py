import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.special import factorial

from fockmetrology.errors import OutOfRange, TruncationError
from fockmetrology.fock import FockSpace, squeezed_vacuum_amplitudes, swap_modes
from fockmetrology.metrology import photon_moments, qfi_pure
from fockmetrology.states import (
    Family,
    StateSpec,
    analytic_nbar,
    cat,
    coherent,
    healthy_space,
    mean_photons,
    noon,
    scs_nbar,
    ses,
    squeezed_cat,
    ssv,
    svcs,
    two_mode_scs,
)

# tighter tail for comparisons against closed forms
ORACLE_TAIL = 1e-12
GOLDEN_Z = math.acosh((1 + math.sqrt(5)) / 2)


def coherent_oracle(dim, alpha):
    n = np.arange(dim)
    return np.exp(-alpha**2 / 2) * alpha**n / np.sqrt(factorial(n))


def squeezed_cat_oracle(dim, z, alpha):
    # S(z) applied by scipy expm in a padded space to the analytic cat
    big = 4 * dim
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    s = expm(0.5 * (z * a @ a - z * a.T @ a.T))
    c = coherent_oracle(big, alpha) + coherent_oracle(big, -alpha)
    v = (s @ (c / np.linalg.norm(c)))[:dim]
    return v / np.linalg.norm(v)


def test_family_parsing():
    assert Family.parse("SCS") is Family.SQUEEZED_CAT
    assert Family.parse("squeezedcat") is Family.SQUEEZED_CAT
    assert Family.parse("noon") is Family.NOON
    assert Family.SQUEEZED_CAT.short == "SCS"
    with pytest.raises(OutOfRange):
        Family.parse("GHZ")


def test_state_spec_round_trip():
    spec = StateSpec("SCS", 0.9, -0.4)
    assert spec.to_dict() == {"family": "SqueezedCat", "alpha": 0.9, "z": -0.4, "N": 0}
    assert StateSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(OutOfRange):
        StateSpec.from_dict({"family": "SES", "r": 1})
    with pytest.raises(OutOfRange):
        StateSpec("Cat", alpha=-1)
    with pytest.raises(OutOfRange):
        StateSpec("NOON", N=1.5)


def test_coherent_examples():
    sp = FockSpace(40)
    assert np.allclose(coherent(sp, 0).amp, sp.vacuum().amp)
    one = coherent(sp, 1.0)
    assert one.mean_photons() == pytest.approx(1.0, rel=1e-12)
    n = np.arange(40)
    var = one.probs @ n**2 - one.mean_photons() ** 2
    assert var == pytest.approx(1.0, rel=1e-10)
    assert np.allclose(coherent(sp, 1.7).amp, coherent_oracle(40, 1.7), atol=1e-14)
    with pytest.raises(OutOfRange):
        coherent(sp, -0.5)


def test_cat_examples():
    sp = FockSpace(40)
    assert np.allclose(cat(sp, 0).amp, sp.vacuum().amp)
    c2 = cat(sp, 2.0)
    assert np.vdot(c2.amp, c2.amp).real == pytest.approx(1.0, abs=1e-12)
    expected = 4 * (2 - 2 * math.exp(-8)) / (2 + 2 * math.exp(-8))
    assert c2.mean_photons() == pytest.approx(expected, rel=1e-12)
    # alpha^2 tanh(alpha^2) = 3.99732...
    assert expected == pytest.approx(4 * math.tanh(4), rel=1e-14)
    brute = coherent_oracle(40, 2.0) + coherent_oracle(40, -2.0)
    assert np.allclose(c2.amp, brute / np.linalg.norm(brute), atol=1e-14)


def test_squeezed_cat_examples():
    sp = FockSpace(80)
    assert np.allclose(squeezed_cat(sp, 0.0, 1.3).amp, cat(sp, 1.3).amp, atol=1e-12)
    assert np.allclose(squeezed_cat(sp, 0.6, 0.0).amp, squeezed_vacuum_amplitudes(sp, 0.6).amp, atol=1e-12)
    for z, alpha in [(0.6, 1.0), (-0.4, 1.5), (1.0, 0.5)]:
        s = squeezed_cat(sp, z, alpha)
        assert 2 * s.mean_photons() == pytest.approx(scs_nbar(z, alpha), rel=1e-8)
        assert np.allclose(s.amp, squeezed_cat_oracle(80, z, alpha), atol=1e-9)


def test_two_mode_scs_examples():
    sp = FockSpace(40)
    vac = two_mode_scs(sp, 0.0, 0.0)
    assert vac.matrix[0, 0] == pytest.approx(1.0)
    psi = two_mode_scs(sp, 0.5, 1.2)
    assert np.allclose(swap_modes(psi).amp, psi.amp)
    assert abs(photon_moments(psi).cov) < 1e-10


def test_ses_examples():
    sp = FockSpace(90)
    assert ses(sp, 0.0).matrix[0, 0] == pytest.approx(1.0)
    psi = ses(sp, 0.8)
    assert np.allclose(swap_modes(psi).amp, psi.amp)
    for z in (0.3, 0.8, GOLDEN_Z):
        psi = ses(sp, z)
        n2 = 1.0 / (2 + 2 / math.cosh(z))
        assert mean_photons(psi) == pytest.approx(2 * n2 * math.sinh(z) ** 2, rel=1e-8)
    assert mean_photons(ses(sp, GOLDEN_Z)) == pytest.approx(1.0, rel=1e-8)


def test_noon_examples():
    sp = FockSpace(12)
    assert noon(sp, 0).matrix[0, 0] == pytest.approx(1.0)
    one = noon(sp, 1)
    assert one.matrix[1, 0] == pytest.approx(1 / math.sqrt(2))
    assert one.matrix[0, 1] == pytest.approx(1 / math.sqrt(2))
    assert mean_photons(one) == pytest.approx(1.0)
    assert qfi_pure(noon(sp, 3)) == pytest.approx(9.0, abs=1e-12)
    assert mean_photons(noon(sp, 4)) == pytest.approx(4.0)
    with pytest.raises(OutOfRange):
        noon(FockSpace(5), 5)


def test_svcs_examples():
    sp = FockSpace(50)
    assert svcs(sp, 0.0, 0.0).matrix[0, 0] == pytest.approx(1.0)
    psi = svcs(sp, 0.9, 0.5)
    assert mean_photons(psi) == pytest.approx(0.81 + math.sinh(0.5) ** 2, rel=1e-9)
    assert qfi_pure(svcs(sp, 1.0, 0.0)) == pytest.approx(1.0, rel=1e-9)


def test_ssv_examples():
    sp = FockSpace(60)
    assert ssv(sp, 0.0).matrix[0, 0] == pytest.approx(1.0)
    psi = ssv(sp, 0.7)
    n = 2 * math.sinh(0.7) ** 2
    assert qfi_pure(psi) == pytest.approx(n * n + 2 * n, rel=1e-6)
    assert abs(photon_moments(psi).cov) < 1e-12


def test_mean_photons_of_vacuum():
    assert mean_photons(ssv(FockSpace(10), 0.0)) == 0.0


def test_truncation_guard():
    with pytest.raises(TruncationError):
        ses(FockSpace(20), 1.2)
    with pytest.raises(TruncationError):
        two_mode_scs(FockSpace(20), 1.0, 2.0)


def test_healthy_space_is_minimal():
    spec = StateSpec("SSV", z=0.8)
    sp = healthy_space(spec)
    spec.probe(sp)
    with pytest.raises(TruncationError):
        spec.probe(FockSpace(sp.dim - 10))
    with pytest.raises(TruncationError):
        healthy_space(StateSpec("SqueezedVacuum", z=3.0), max_dim=100)


@given(st.floats(0.0, 2.5))
def test_cat_is_even(alpha):
    c = cat(FockSpace(60), alpha)
    assert np.max(np.abs(c.amp[1::2])) < 1e-14


@given(st.floats(-1.0, 1.0), st.floats(0.0, 2.0))
def test_squeezed_cat_is_even_and_matches_nbar(z, alpha):
    spec = StateSpec("SCS", alpha, z)
    sp = healthy_space(spec, start=40, tail_tol=ORACLE_TAIL)
    s = spec.single(sp)
    assert np.max(np.abs(s.amp[1::2])) < 1e-14
    assert 2 * s.mean_photons() == pytest.approx(scs_nbar(z, alpha), rel=1e-8, abs=1e-12)


@given(st.sampled_from(["SES", "NOON", "SVCS", "SSV", "SCS", "Coherent", "Cat"]),
       st.floats(0.0, 1.5), st.floats(-0.9, 0.9), st.integers(0, 6))
def test_mean_photons_matches_analytic(family, alpha, z, n):
    spec = StateSpec(family, alpha, z, n)
    psi = spec.probe(healthy_space(spec, tail_tol=ORACLE_TAIL))
    assert mean_photons(psi) == pytest.approx(analytic_nbar(spec), rel=1e-8, abs=1e-12)


@given(st.floats(0.0, 1.2), st.integers(0, 8))
def test_ses_and_noon_swap_symmetric(z, n):
    for psi in (ses(healthy_space(StateSpec("SES", z=z)), z), noon(FockSpace(12), n)):
        assert abs(np.vdot(psi.amp, swap_modes(psi).amp)) == pytest.approx(1.0, abs=1e-10)
