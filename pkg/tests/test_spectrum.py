import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopblockade.fock import TruncationSpec
from loopblockade.model import ModelParams, build_h_sys
from loopblockade.spectrum import (
    _cubic_roots,
    _two_photon_vector,
    level_table,
    resonance_detunings,
    resonant_couplings,
    sector_matrix,
    single_photon_eigs,
    two_photon_eigs,
    zero_photon_level,
)

P = ModelParams()


def test_reference_splittings():
    m, p = single_photon_eigs(0, P)
    assert p.value - m.value == pytest.approx(0.1, abs=1e-12)
    lo, mid, hi = two_photon_eigs(0, P)
    assert hi.value - mid.value == pytest.approx(0.1, abs=1e-12)
    assert mid.value - lo.value == pytest.approx(0.1, abs=1e-12)


def test_sideband_spacing():
    for k in range(3):
        assert single_photon_eigs(k + 1, P)[1].value - single_photon_eigs(k, P)[1].value == pytest.approx(1.0)


def test_known_values():
    # E_{1,0,0} = -g^2 = -0.04 so eps_1-,0 = -0.09 and eps_2-,0 = -0.16 - 0.1
    assert single_photon_eigs(0, P)[0].value == pytest.approx(-0.09)
    assert two_photon_eigs(0, P)[0].value == pytest.approx(-0.26)
    assert zero_photon_level(2, P).value == 2.0


def test_sector_blocks_against_eigvalsh():
    for sector, fn in ((1, single_photon_eigs), (2, two_photon_eigs)):
        dense = np.linalg.eigvalsh(sector_matrix(sector, P, 3))
        mine = sorted(lev.value for k in range(4) for lev in fn(k, P))
        assert np.allclose(dense, mine, atol=1e-12)


def test_against_full_hamiltonian():
    # for g_L = g_R the displaced-basis levels are exact eigenvalues of H_sys
    t = TruncationSpec(2, 2, 30, max_dim=5000)
    h = build_h_sys(P, t).toarray()
    n_tot = np.array([m + n for m in range(3) for n in range(3) for _ in range(31)])
    for sector, fn in ((1, single_photon_eigs), (2, two_photon_eigs)):
        idx = np.where(n_tot == sector)[0]
        ev = np.sort(np.linalg.eigvalsh(h[np.ix_(idx, idx)]))
        mine = sorted(lev.value for k in range(3) for lev in fn(k, P))
        assert np.allclose(ev[: len(mine)], mine, atol=1e-8)


def test_eigenvectors():
    for k in range(3):
        for lev in two_photon_eigs(k, P):
            block = sector_matrix(2, P, k)[3 * k:, 3 * k:]
            v = np.array(lev.coeffs)
            assert np.allclose(block @ v, lev.value * v, atol=1e-12)
            assert np.dot(v, v) == pytest.approx(1.0)
        for lev in single_photon_eigs(k, P):
            block = sector_matrix(1, P, k)[2 * k:, 2 * k:]
            v = np.array(lev.coeffs)
            assert np.allclose(block @ v, lev.value * v, atol=1e-12)


def test_two_photon_vector_sign_of_middle_component():
    # the (1,1) component is sqrt(2) J (E02 - eps) up to normalization
    e20, e11, e02, J = -0.16, 0.0, -0.12, 0.05
    for eps in _cubic_roots(e20, e11, e02, J):
        v = _two_photon_vector(e20, e11, e02, J, eps)
        ratio = v[1] / v[0]
        assert ratio == pytest.approx(-(e20 - eps) / (math.sqrt(2) * J), rel=1e-9)


def test_decoupled_limit():
    p = ModelParams(J=0.0, delta_L=0.02)
    m, pl = single_photon_eigs(0, p)
    assert m.coeffs == (0.0, 1.0) and pl.coeffs == (1.0, 0.0)
    levels = two_photon_eigs(0, p)
    assert [lev.value for lev in levels] == sorted(lev.value for lev in levels)


def test_triple_root_guard():
    r = _cubic_roots(0.3, 0.3, 0.3, 0.0)
    assert r == (0.3, 0.3, 0.3)


@settings(max_examples=60, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(1e-3, 0.5))
def test_cubic_roots_match_eigvalsh(e20, e11, e02, J):
    c = math.sqrt(2) * J
    m = np.array([[e20, c, 0], [c, e11, c], [0, c, e02]])
    ref = np.linalg.eigvalsh(m)
    assert np.allclose(_cubic_roots(e20, e11, e02, J), ref, atol=1e-9)


def test_unequal_couplings_flagged_approximate():
    assert all(lev.approximate for lev in level_table(ModelParams(g_L=-0.2), 1) if lev.sector > 0)
    assert not any(lev.approximate for lev in level_table(P, 1))


def test_resonance_detunings():
    res = {r.level: r for r in resonance_detunings(0, P)}
    assert res["eps_1+,0"].delta == pytest.approx(-0.01)
    assert res["eps_1-,0"].delta == pytest.approx(0.09)
    assert res["eps_2+,0"].delta == pytest.approx(0.03)
    assert res["eps_1+,0"].kind == "dip" and res["eps_2-,0"].kind == "peak"


def test_opposite_coupling_zero_order_resonances():
    p = ModelParams(g_L=-0.2, g_R=0.2)
    res = resonance_detunings(0, p)
    peaks = sorted(r.delta for r in res if r.kind == "peak")
    dips = sorted(r.delta for r in res if r.kind == "dip")
    assert np.allclose(peaks, [-0.02403, 0.08, 0.10403], atol=1e-5)
    assert np.allclose(dips, [-0.01, 0.09], atol=1e-12)


def test_resonant_couplings():
    assert np.allclose(resonant_couplings(1, "+", P), [0.6325, 0.6708, 0.7071], atol=1e-4)
    assert np.allclose(resonant_couplings(1, "-", P), [0.7071, 0.7416, 0.7746], atol=1e-4)
    assert resonant_couplings(0, "+", P) == [0.0]
    with pytest.raises(ValueError):
        resonant_couplings(1, "x", P)


def test_resonant_couplings_coincide():
    # at g = g^[1+] the two-photon level sits at twice the upper one-photon level
    for g in resonant_couplings(1, "+", P):
        p = ModelParams(g_L=g, g_R=g).with_detuning(g * g - 0.05)
        one = single_photon_eigs(0, p)[1].value
        two = [lev.value for lev in two_photon_eigs(1, p)]
        assert abs(one) < 1e-12
        assert min(abs(t) for t in two) < 1e-12
