import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import multivariate_normal

from optomech.errors import IndexOutOfRange, SingularCovariance, UnphysicalState
from optomech.gaussian import (
    SqueezedThermalFit,
    block,
    check_physical,
    fit_squeezed_thermal,
    log_negativity,
    purity,
    symplectic_eigenvalues,
    symplectic_form,
    symplectic_squeeze,
    wigner_axes,
    wigner_grid,
    wigner_value,
)

from helpers import random_physical_cov


def angle_gap(a, b):
    return abs(math.remainder(a - b, 2 * math.pi))


def two_mode_squeezed(r, nu=0.5):
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    Z = np.diag([1.0, -1.0])
    return nu * np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])


def test_squeeze_matrix_is_symplectic():
    S = symplectic_squeeze(0.7, 1.1)
    Om = symplectic_form(1)
    np.testing.assert_allclose(S @ Om @ S.T, Om, atol=1e-14)
    np.testing.assert_allclose(S, S.T)
    assert np.linalg.det(S) == pytest.approx(1.0)


def test_squeeze_phi_zero_squeezes_q():
    J = SqueezedThermalFit(0.0, 0.5, 0.0).covariance()
    np.testing.assert_allclose(J, 0.5 * np.diag([math.exp(-1.0), math.exp(1.0)]), rtol=1e-14)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 50), st.floats(1e-4, 3.0), st.floats(-math.pi + 1e-6, math.pi))
def test_fit_round_trip(n, s, phi):
    J = SqueezedThermalFit(n, s, phi).covariance()
    fit = fit_squeezed_thermal(J)
    assert fit.n_bar == pytest.approx(n, abs=1e-9 * max(1, n) * math.cosh(2 * s))
    assert fit.s == pytest.approx(s, abs=1e-9)
    assert angle_gap(fit.phi, phi) < 1e-9 / math.tanh(s) * max(1.0, 1e-4 / s)


def test_fit_unsqueezed_state():
    fit = fit_squeezed_thermal(3.5 * np.eye(2))
    assert (fit.n_bar, fit.s, fit.phi) == (3.0, 0.0, 0.0)


def test_fit_diagonal_q_wide_gives_pi():
    fit = fit_squeezed_thermal(np.array([[4.0, 1e-16], [1e-16, 1.0]]))
    assert fit.phi == math.pi
    fit = fit_squeezed_thermal(np.array([[4.0, -1e-16], [-1e-16, 1.0]]))
    assert fit.phi == math.pi


def test_fit_rejects_singular():
    with pytest.raises(SingularCovariance):
        fit_squeezed_thermal(np.diag([1.0, 0.0]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_symplectic_eigenvalues_invariant_under_local_symplectic(seed, n):
    rng = np.random.default_rng(seed)
    V = random_physical_cov(rng, n)
    S = np.eye(2 * n)
    for m in range(n):
        S[2 * m : 2 * m + 2, 2 * m : 2 * m + 2] = symplectic_squeeze(rng.uniform(0, 2), rng.uniform(-3, 3))
    np.testing.assert_allclose(symplectic_eigenvalues(S @ V @ S.T), symplectic_eigenvalues(V), rtol=1e-8)
    check_physical(V)
    if n == 2:
        assert log_negativity(S @ V @ S.T) == pytest.approx(log_negativity(V), abs=1e-8)


def test_thermal_symplectic_spectrum():
    V = np.diag([0.5, 0.5, 2.0, 2.0, 1.0, 1.0])
    np.testing.assert_allclose(symplectic_eigenvalues(V), [0.5, 1.0, 2.0])


def test_check_physical_rejects():
    with pytest.raises(UnphysicalState):
        check_physical(0.4 * np.eye(2))
    with pytest.raises(UnphysicalState):
        check_physical(np.array([[1.0, 0.3], [0.0, 1.0]]))
    with pytest.raises(UnphysicalState):
        # |eig(i Omega V)| = 1 but V is not positive definite
        check_physical(-np.eye(2))


def test_block_selection_and_errors():
    V = np.arange(36, dtype=float).reshape(6, 6)
    np.testing.assert_array_equal(block(V, [2, 0]), V[np.ix_([4, 5, 0, 1], [4, 5, 0, 1])])
    for bad in ([3], [-1], [], [0, 0]):
        with pytest.raises(IndexOutOfRange):
            block(V, bad)


def test_log_negativity_two_mode_squeezed_vacuum():
    for r in (0.0, 0.2, 0.9):
        assert log_negativity(two_mode_squeezed(r)) == pytest.approx(2 * r, abs=1e-12)
    assert log_negativity(np.eye(4) * 0.5) == 0.0
    # product of local squeezed states is separable
    V = np.zeros((4, 4))
    V[:2, :2] = SqueezedThermalFit(0, 1.0, 0.3).covariance()
    V[2:, 2:] = SqueezedThermalFit(0, 0.5, 1.3).covariance()
    assert log_negativity(V) == pytest.approx(0.0, abs=1e-12)


def test_purity():
    assert purity(0.5 * np.eye(4)) == pytest.approx(1.0)
    assert purity(2.5 * np.eye(2)) == pytest.approx(0.2)


def test_wigner_matches_gaussian_density():
    J = SqueezedThermalFit(1.3, 0.6, 0.8).covariance()
    pts = np.random.default_rng(1).normal(size=(20, 2))
    # alpha has covariance J / 2 and W is its probability density
    ref = multivariate_normal(mean=[0, 0], cov=J / 2).pdf(pts)
    np.testing.assert_allclose(wigner_value(J, pts[:, 0], pts[:, 1]), ref, rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 100), st.floats(0, 2.5), st.floats(-math.pi, math.pi))
def test_wigner_grid_normalisation_and_moments(n, s, phi):
    J = SqueezedThermalFit(n, s, phi).covariance()
    g = wigner_grid(J, *wigner_axes(J))
    assert g.integral() == pytest.approx(1.0, abs=1e-3)
    np.testing.assert_allclose(g.covariance(), J, rtol=2e-3, atol=2e-3 * np.abs(J).max())


def test_wigner_axes_odd_and_symmetric():
    ar, ai = wigner_axes(np.diag([2.0, 0.5]))
    assert len(ar) % 2 == 1 and len(ai) % 2 == 1
    assert ar[len(ar) // 2] == 0.0
    assert ar[-1] == pytest.approx(6 * 1.0)


def test_wigner_grid_rejects_bad_axes():
    with pytest.raises(ValueError):
        wigner_grid(np.eye(2), [0.0, 0.0, 1.0], [0.0, 1.0])


def test_wigner_csv_and_matrix(tmp_path):
    J = np.eye(2)
    g = wigner_grid(J, np.linspace(-1, 1, 3), np.linspace(-1, 1, 5))
    g.write_csv(tmp_path / "w.csv", header="a\nb")
    lines = (tmp_path / "w.csv").read_text().splitlines()
    assert lines[:3] == ["# a", "# b", "alpha_r,alpha_i,w"]
    assert len(lines) == 3 + 15
    g.write_matrix(tmp_path / "w.dat")
    blocks = (tmp_path / "w.dat").read_text().strip().split("\n\n")
    assert len(blocks) == 3 and all(len(b.splitlines()) == 5 for b in blocks)
