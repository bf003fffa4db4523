import warnings

import numpy as np
import pytest

from loopblockade.fock import TruncationSpec
from loopblockade.model import (
    ModelParams,
    WeakDrivingWarning,
    build_h_eff,
    build_h_I,
    build_h_sys,
    photon_number_operator,
    validate_params,
)
from loopblockade.spectrum import bare_eigenvalue

T = TruncationSpec(2, 2, 30, max_dim=5000)


def test_defaults_match_reference_set():
    p = ModelParams()
    assert (p.g_L, p.g_R, p.J, p.kappa_L, p.kappa_b, p.Omega) == (0.2, 0.2, 0.05, 0.01, 0.001, 0.002)


def test_hermitian():
    p = ModelParams(delta_L=0.1, delta_R=-0.3, g_R=0.1)
    h = build_h_I(p, TruncationSpec())
    assert abs(h - h.conj().T).max() < 1e-15


def test_h_eff_antihermitian_part():
    p = ModelParams(kappa_R=0.02)
    t = TruncationSpec()
    h = build_h_eff(p, t)
    anti = (h - h.conj().T) / 2j
    a = np.real(anti.diagonal())
    assert a.min() == pytest.approx(-0.5 * (3 * 0.01 + 3 * 0.02))


def test_photon_number_conserved_without_drive():
    p = ModelParams(Omega=0.0)
    h = build_h_sys(p, T)
    n = photon_number_operator(T)
    assert abs(h @ n - n @ h).max() < 1e-14


def test_bare_energies_from_full_diagonalization():
    # polaron energies are exact eigenvalues for J = 0
    p = ModelParams(J=0.0, g_L=0.2, g_R=0.3, delta_L=0.05, delta_R=-0.02)
    h = build_h_sys(p, T).toarray()
    db = T.n_max_b + 1
    for m, n in ((1, 0), (0, 1), (1, 1), (2, 0)):
        sl = slice(T.index(m, n, 0), T.index(m, n, 0) + db)
        ev = np.sort(np.linalg.eigvalsh(h[sl, sl]))[:4]
        exact = [bare_eigenvalue(m, n, k, p) for k in range(4)]
        assert np.allclose(ev, exact, atol=1e-9)


def test_negative_hopping_rejected():
    with pytest.raises(ValueError, match="a_R"):
        ModelParams(J=-0.05)


@pytest.mark.parametrize("name", ["kappa_L", "kappa_b", "n_bar_b"])
def test_negative_rates_rejected(name):
    with pytest.raises(ValueError):
        ModelParams(**{name: -1.0})


def test_weak_drive_warning():
    with pytest.warns(WeakDrivingWarning):
        ModelParams(Omega=0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ModelParams(Omega=0.005)


def test_swapped_and_detuning():
    p = ModelParams(g_L=0.1, kappa_R=0.03).with_detuning(0.2)
    q = p.swapped()
    assert (q.g_L, q.g_R, q.kappa_L, q.kappa_R) == (0.2, 0.1, 0.03, 0.01)
    assert q.delta_L == q.delta_R == 0.2
    assert p.swapped().swapped() == p


def test_degenerate_flag():
    assert ModelParams().degenerate
    assert not ModelParams(g_L=-0.2).degenerate


def test_validate_params_flags():
    diags = {d.name: d.ok for d in validate_params(ModelParams())}
    assert diags == {"resolved_sideband": True, "normal_mode_resolvable": True, "weak_driving": True}
    diags = {d.name: d.ok for d in validate_params(ModelParams(kappa_L=0.2, kappa_R=0.2, Omega=0.01))}
    assert not diags["resolved_sideband"] and not diags["normal_mode_resolvable"]
