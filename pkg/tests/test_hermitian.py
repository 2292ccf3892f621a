"""Gram matrices against integral oracles, ON transforms, samplers, dumps."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from bergman_lab.errors import BasisMismatchError, CapacityError
from bergman_lab.geometry import MetricPotential
from bergman_lab.hermitian import (HILB_ONB, MONOMIAL, DeltaMatrix,
                                   HermitianForm, delta_from, haar_unitary,
                                   hilb_gram, hs_norm, load_matrix,
                                   orthonormalize, sample_pair, save_matrix,
                                   trace_split)
from bergman_lab.sections import monomial_basis

from conftest import get_grid, get_setup


# -- Gram matrices ------------------------------------------------------------

@pytest.mark.parametrize("k", range(1, 9))
def test_fs_gram_matches_beta_integrals(k):
    _, _, H, _, _ = get_setup(0.0, k)
    want = np.array([math.factorial(a) * math.factorial(k - a) / math.factorial(k)
                     for a in range(k + 1)])
    np.testing.assert_allclose(np.diag(H.M).real, want, rtol=1e-12)
    off = H.M - np.diag(np.diag(H.M))
    assert np.max(np.abs(off)) < 1e-13
    assert H.positive and H.basis_tag == MONOMIAL


@pytest.mark.parametrize("k", [2, 5, 8])
@pytest.mark.parametrize("eps", [0.05, -0.1])
def test_perturbed_gram_matches_quad_oracle(k, eps):
    # radial reduction of the Gram integral, derived by hand:
    #   phi = log(1+t) + eps t/(1+t)^2,  t = |z|^2
    #   g   = phi' + t phi'' = 1/(1+t)^2 + eps (t^2 - 4t + 1)/(1+t)^4
    #   H_aa = (k+1) int_0^inf t^a e^(-k phi) g dt
    _, _, H, _, _ = get_setup(eps, k)

    def integrand(t, a):
        phi = math.log1p(t) + eps * t / (1 + t) ** 2
        g = 1 / (1 + t) ** 2 + eps * (t * t - 4 * t + 1) / (1 + t) ** 4
        return t ** a * math.exp(-k * phi) * g

    for a in range(k + 1):
        want, err = quad(integrand, 0.0, np.inf, args=(a,),
                         epsabs=1e-13, epsrel=1e-13, limit=200)
        np.testing.assert_allclose(H.M[a, a].real, (k + 1) * want,
                                   rtol=1e-10 + 10 * err)
    off = H.M - np.diag(np.diag(H.M))
    assert np.max(np.abs(off)) < 1e-13


def test_gram_above_capacity_raises():
    grid = get_grid(0.0, (8, 8))
    with pytest.raises(CapacityError):
        hilb_gram(MetricPotential(0.0), grid.k_max + 1,
                  monomial_basis(grid.k_max + 1), grid)


@pytest.mark.parametrize("eps,k", [(0.0, 6), (0.05, 6)])
def test_gram_refinement_stability(eps, k):
    _, _, H32, _, _ = get_setup(eps, k, (32, 32))
    _, _, H64, _, _ = get_setup(eps, k, (64, 64))
    np.testing.assert_allclose(H32.M, H64.M, rtol=1e-12, atol=1e-14)


# -- orthonormalization -------------------------------------------------------

def test_orthonormalize_golden_k2():
    _, _, H, T, _ = get_setup(0.0, 2)
    np.testing.assert_allclose(np.diag(H.M).real, [1.0, 0.5, 1.0], rtol=1e-13)
    np.testing.assert_allclose(np.diag(T).real, [1.0, math.sqrt(2.0), 1.0],
                               rtol=1e-13)
    np.testing.assert_allclose(T.conj().T @ H.M @ T, np.eye(3), atol=1e-13)


@pytest.mark.parametrize("seed", [0, 7])
def test_orthonormalize_random_forms(seed):
    A, _ = sample_pair(seed, 6, 1.5)
    T = orthonormalize(A)
    np.testing.assert_allclose(T.conj().T @ A.M @ T, np.eye(6), atol=1e-12)
    # upper triangular with positive diagonal: the convention the frame code
    # relies on for chart-stable contractions
    assert np.max(np.abs(np.tril(T, -1))) == 0.0
    assert np.min(np.diag(T).real) > 0.0


# -- HS norm and trace split --------------------------------------------------

def test_hs_norm_requires_onb_basis():
    d = DeltaMatrix(L=np.eye(3, dtype=complex), basis_tag=MONOMIAL)
    with pytest.raises(BasisMismatchError):
        hs_norm(d)


def test_hs_norm_value():
    L = np.array([[1.0, 2.0j], [-2.0j, 3.0]])
    d = DeltaMatrix(L=L, basis_tag=HILB_ONB)
    np.testing.assert_allclose(hs_norm(d), np.linalg.norm(L, "fro"), rtol=1e-15)


@given(st.integers(0, 1000))
@settings(max_examples=40, deadline=None)
def test_trace_split_properties(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    d = DeltaMatrix(L=(X + X.conj().T) / 2, basis_tag=HILB_ONB)
    d0, c = trace_split(d)
    assert abs(np.trace(d0.L)) < 1e-12
    np.testing.assert_allclose(d0.L + c * np.eye(5), d.L, atol=1e-14)
    d00, c0 = trace_split(d0)
    assert abs(c0) < 1e-14
    np.testing.assert_allclose(hs_norm(d) ** 2, hs_norm(d0) ** 2 + c ** 2 * 5,
                               rtol=1e-12)


# -- samplers -----------------------------------------------------------------

def test_sampler_deterministic():
    A1, B1 = sample_pair(42, 5, 1.0)
    A2, B2 = sample_pair(42, 5, 1.0)
    np.testing.assert_array_equal(A1.M, A2.M)
    np.testing.assert_array_equal(B1.M, B2.M)
    A3, _ = sample_pair(43, 5, 1.0)
    assert np.max(np.abs(A3.M - A1.M)) > 1e-3


@pytest.mark.parametrize("sigma", [1.0, 3.0])
def test_sampler_spectrum_range(sigma):
    lo, hi = math.exp(-sigma), math.exp(sigma)
    for seed in range(60):
        A, B = sample_pair(seed, 6, sigma)
        for F in (A, B):
            np.testing.assert_allclose(F.M, F.M.conj().T, atol=1e-14)
            ev = np.linalg.eigvalsh(F.M)
            assert ev.min() > lo * (1 - 1e-12) and ev.max() < hi * (1 + 1e-12)
            assert F.positive and F.basis_tag == HILB_ONB


def test_haar_unitary_is_unitary():
    rng = np.random.default_rng(3)
    U = haar_unitary(rng, 7)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(7), atol=1e-13)


def test_delta_from_inverse_difference():
    A, B = sample_pair(11, 4, 1.0)
    d = delta_from(A, B)
    want = np.linalg.inv(A.M) - np.linalg.inv(B.M)
    np.testing.assert_allclose(d.L, want, atol=1e-12)


# -- persistence --------------------------------------------------------------

@pytest.mark.parametrize("fmt", ["bin", "csv"])
def test_matrix_round_trip(tmp_path, fmt):
    rng = np.random.default_rng(0)
    M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    path = tmp_path / f"m.{fmt}"
    save_matrix(path, M, fmt=fmt)
    np.testing.assert_array_equal(load_matrix(path, fmt=fmt), M)
