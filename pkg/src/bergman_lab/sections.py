"""Monomial bases of H^0(P^1, O(k)) and their pointwise derivative frames.

Frames stay in monomial coordinates; the change to a Gram-orthonormal
frame lives in the hermitian module so there is exactly one raw basis and
every basis-dependent matrix carries an explicit tag.

In the z chart the section z^a is represented by the monomial z^a; seen
from the w = 1/z chart the same section is represented by w^(k-a), which
is what `eval_frame` returns for chart_id 1 and what the batched stacks
use to evaluate far points without catastrophic cancellation.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import ChartPoint


@dataclass(frozen=True)
class SectionBasis:
    """The monomial basis z^0..z^k of H^0(P^1, O(k))."""
    k: int

    @property
    def N(self):
        return self.k + 1

    @property
    def exponents(self):
        return tuple(range(self.k + 1))


def monomial_basis(k: int) -> SectionBasis:
    if k < 1:
        raise ValueError("k must be >= 1; the k = 0 bundle has no room for "
                         "the comparison construction")
    return SectionBasis(int(k))


@dataclass(frozen=True)
class SectionFrame:
    """Values and first two holomorphic derivatives of the basis at a point."""
    Z: np.ndarray
    dZ: np.ndarray
    d2Z: np.ndarray

    def __post_init__(self):
        if not np.any(self.Z != 0):
            raise ValueError("section frame vanished; O(k) is base-point free, "
                             "this indicates an evaluation bug")


def monomial_stack(z, k, orders=3):
    """Derivative stacks of the monomials at an array of points.

    Returns shape (orders, k+1, M) with stack[d, a] = (d/dz)^d z^a.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    a = np.arange(k + 1)
    out = np.zeros((orders, k + 1, z.size), dtype=complex)
    # z^a with 0^0 = 1
    with np.errstate(divide="ignore", invalid="ignore"):
        for d in range(orders):
            coeff = np.ones(k + 1)
            for j in range(d):
                coeff = coeff * (a - j)
            expo = np.maximum(a - d, 0)
            vals = z[None, :] ** expo[:, None]
            vals[coeff == 0, :] = 1.0  # value irrelevant, coefficient kills it
            out[d] = coeff[:, None] * vals
    return out


def chart_stack(z_local, k, chart_id, orders=3):
    """Monomial stacks in the chart trivialization.

    chart 0: section z^a is the monomial (z_local)^a.
    chart 1: section z^a is the monomial (z_local)^(k-a); equivalently the
    chart-0 stack evaluated at z_local with the basis order reversed.
    """
    stack = monomial_stack(z_local, k, orders=orders)
    if chart_id == 1:
        stack = stack[:, ::-1, :]
    return stack


def eval_frame(basis: SectionBasis, x: ChartPoint) -> SectionFrame:
    stack = chart_stack(np.array([x.z]), basis.k, x.chart_id)
    return SectionFrame(Z=stack[0, :, 0], dZ=stack[1, :, 0], d2Z=stack[2, :, 0])
