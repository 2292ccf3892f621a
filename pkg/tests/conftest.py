"""Shared fixtures: cached grids and (H, T, context) setups.

Building a Gram matrix plus frame context is the expensive step in most
tests, and it is deterministic, so setups are memoized per
(epsilon, k, resolution) for the whole session.
"""

import numpy as np
import pytest

from bergman_lab.geometry import MetricPotential, build_grid
from bergman_lab.hermitian import hilb_gram, orthonormalize
from bergman_lab.sections import monomial_basis
from bergman_lab.fsmap import make_context

_GRIDS = {}
_SETUPS = {}


def get_grid(eps, resolution=(32, 32)):
    key = (float(eps), tuple(resolution))
    if key not in _GRIDS:
        _GRIDS[key] = build_grid("P1", tuple(resolution), MetricPotential(eps))
    return _GRIDS[key]


def get_setup(eps, k, resolution=(32, 32)):
    """(potential, grid, H, T, ctx), cached."""
    key = (float(eps), int(k), tuple(resolution))
    if key not in _SETUPS:
        pot = MetricPotential(eps)
        grid = get_grid(eps, resolution)
        H = hilb_gram(pot, k, monomial_basis(k), grid)
        T = orthonormalize(H)
        ctx = make_context(pot, k, grid, T)
        _SETUPS[key] = (pot, grid, H, T, ctx)
    return _SETUPS[key]


@pytest.fixture(scope="session")
def fs_grid():
    return get_grid(0.0)


@pytest.fixture(scope="session")
def perturbed_grid():
    return get_grid(0.05)


def random_delta(rng, N, scale=1.0):
    """Random hermitian DeltaMatrix in the H_k-orthonormal basis."""
    from bergman_lab.hermitian import DeltaMatrix, HILB_ONB
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return DeltaMatrix(L=scale * (X + X.conj().T) / 2.0, basis_tag=HILB_ONB)
