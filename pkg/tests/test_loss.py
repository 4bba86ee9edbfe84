import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fockmetrology.errors import OutOfRange
from fockmetrology.fock import FockSpace, TwoModeDensity, tensor
from fockmetrology.loss import LossSpec, apply_loss, apply_loss_single, kraus_set
from fockmetrology.states import coherent, mean_photons, squeezed_cat, two_mode_scs


def kraus_oracle(dim, eta, k):
    # <n-k| K_k |n> = sqrt(C(n, k) eta^(n-k) (1-eta)^k)
    mat = np.zeros((dim, dim))
    for n in range(k, dim):
        mat[n - k, n] = math.sqrt(math.comb(n, k) * eta ** (n - k) * (1 - eta) ** k)
    return mat


def scs_probe():
    return two_mode_scs(FockSpace(16, 1e-4), 0.5, 0.7)


def test_loss_spec():
    assert LossSpec().lossless
    spec = LossSpec.symmetric(0.8)
    assert spec.is_symmetric and spec.to_dict() == {"eta_a": 0.8, "eta_b": 0.8}
    assert LossSpec.from_dict({"eta_a": 0.5}) == LossSpec(0.5, 1.0)
    with pytest.raises(OutOfRange):
        LossSpec(1.2, 1.0)
    with pytest.raises(OutOfRange):
        LossSpec.from_dict({"eta": 0.5})


def test_kraus_examples():
    sp = FockSpace(10)
    ks = kraus_set(sp, 1.0)
    assert np.allclose(ks[0].mat, np.eye(10))
    assert all(np.all(k.mat == 0) for k in ks[1:])
    for k, op in enumerate(kraus_set(sp, 0.37)):
        assert np.allclose(op.mat, kraus_oracle(10, 0.37, k), atol=1e-15)


def test_kraus_completeness():
    sp = FockSpace(30)
    total = sum((k.H @ k).mat for k in kraus_set(sp, 0.73))
    assert np.max(np.abs(total - np.eye(30))) < 1e-10


def test_full_loss_gives_vacuum():
    rho = apply_loss(scs_probe(), LossSpec.symmetric(0.0))
    assert rho.mat[0, 0].real == pytest.approx(1.0, abs=1e-12)
    assert np.sum(np.abs(rho.mat)) == pytest.approx(1.0, abs=1e-12)


def test_apply_loss_examples():
    psi = scs_probe()
    rho = apply_loss(psi, LossSpec())
    assert np.allclose(rho.mat, np.outer(psi.amp, psi.amp.conj()))
    sp = FockSpace(40)
    alpha, eta = 1.4, 0.6
    lossy = apply_loss(tensor(coherent(sp, alpha), sp.vacuum()), LossSpec(eta, 1.0))
    target = tensor(coherent(sp, math.sqrt(eta) * alpha), sp.vacuum()).amp
    fid = np.vdot(target, lossy.mat @ target).real
    assert fid > 1 - 1e-9
    assert mean_photons(apply_loss(psi, LossSpec.symmetric(eta))) == pytest.approx(eta * mean_photons(psi), rel=1e-10)


def test_single_mode_matches_two_mode():
    sp = FockSpace(16, 1e-4)
    psi = scs_probe()
    single = apply_loss_single(squeezed_cat(sp, 0.5, 0.7), 0.55)
    two = apply_loss(psi, LossSpec.symmetric(0.55)).mat
    assert np.allclose(np.kron(single, single), two, atol=1e-14)


def test_kraus_sum_matches_fast_path():
    psi = scs_probe()
    sp = psi.space
    eta_a, eta_b = 0.8, 0.45
    rho = np.outer(psi.amp, psi.amp.conj())
    out = np.zeros_like(rho)
    for ka in kraus_set(sp, eta_a):
        for kb in kraus_set(sp, eta_b):
            k = np.kron(ka.mat, kb.mat)
            out += k @ rho @ k.conj().T
    assert np.allclose(apply_loss(psi, LossSpec(eta_a, eta_b)).mat, out, atol=1e-14)


@pytest.mark.parametrize("eta", np.linspace(0.0, 1.0, 11))
def test_trace_and_positivity(eta):
    rho = apply_loss(scs_probe(), LossSpec.symmetric(eta))
    assert np.trace(rho.mat).real == pytest.approx(1.0, abs=1e-9)
    rho.validate()


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_semigroup(eta1, eta2):
    psi = scs_probe()
    twice = apply_loss(apply_loss(psi, LossSpec.symmetric(eta1)), LossSpec.symmetric(eta2))
    once = apply_loss(psi, LossSpec.symmetric(eta1 * eta2))
    assert np.max(np.abs(twice.mat - once.mat)) < 1e-8


@given(st.floats(0.0, 1.0))
def test_completeness_property(eta):
    sp = FockSpace(25)
    total = sum((k.H @ k).mat for k in kraus_set(sp, eta))
    assert np.max(np.abs(total - np.eye(25))) < 1e-10


def test_density_input():
    psi = scs_probe()
    rho = apply_loss(psi.density(), LossSpec(0.9, 0.7))
    assert isinstance(rho, TwoModeDensity)
    assert np.allclose(rho.mat, apply_loss(psi, LossSpec(0.9, 0.7)).mat)
