"""Jet algebra against an independent polynomial-differentiation oracle.

The oracle differentiates p(z, zbar) = sum c[a, b] z^a zbar^b directly from
the coefficient array, so it shares no code with the binomial-Leibniz /
recursion implementations under test.
"""

import math

import numpy as np
from hypothesis import given, settings, strategies as st

from bergman_lab.jets import (conjugate_symmetry_defect, jet_div, jet_exp,
                              jet_log, jet_mul)


def poly_jets(coeffs, z, A, B):
    """(A+1, B+1, 1) jet table of the polynomial at z, by brute force."""
    na, nb = coeffs.shape
    zb = np.conj(z)
    out = np.zeros((A + 1, B + 1, 1), dtype=complex)
    for da in range(A + 1):
        for db in range(B + 1):
            val = 0.0j
            for a in range(da, na):
                for b in range(db, nb):
                    fall = (math.factorial(a) // math.factorial(a - da)) \
                        * (math.factorial(b) // math.factorial(b - db))
                    val += coeffs[a, b] * fall * z ** (a - da) * zb ** (b - db)
            out[da, db, 0] = val
    return out


def poly_mul(c1, c2):
    n1, m1 = c1.shape
    n2, m2 = c2.shape
    out = np.zeros((n1 + n2 - 1, m1 + m2 - 1), dtype=complex)
    for a in range(n1):
        for b in range(m1):
            out[a:a + n2, b:b + m2] += c1[a, b] * c2
    return out


coeff_arrays = st.builds(
    lambda re, im: np.array(re, dtype=float) + 1j * np.array(im, dtype=float),
    st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3),
             min_size=3, max_size=3),
    st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3),
             min_size=3, max_size=3))

points = st.builds(complex,
                   st.floats(-1.25, 1.25, allow_nan=False),
                   st.floats(-1.25, 1.25, allow_nan=False))


@given(coeff_arrays, coeff_arrays, points)
@settings(max_examples=80, deadline=None)
def test_jet_mul_matches_polynomial_product(c1, c2, z):
    f = poly_jets(c1, z, 3, 3)
    g = poly_jets(c2, z, 3, 3)
    direct = poly_jets(poly_mul(c1, c2), z, 3, 3)
    scale = 1.0 + np.max(np.abs(direct))
    np.testing.assert_allclose(jet_mul(f, g), direct, atol=1e-10 * scale)


@given(coeff_arrays, coeff_arrays, points)
@settings(max_examples=80, deadline=None)
def test_jet_div_inverts_mul(c1, c2, z):
    c2 = c2.copy()
    c2[0, 0] = 4.0   # keep the divisor away from zero
    f = poly_jets(c1, z, 3, 3)
    g = poly_jets(c2, z, 3, 3)
    prod = jet_mul(f, g)
    scale = 1.0 + np.max(np.abs(f))
    np.testing.assert_allclose(jet_div(prod, g), f, atol=1e-9 * scale)


@given(coeff_arrays, points)
@settings(max_examples=80, deadline=None)
def test_jet_exp_log_round_trip(c, z):
    c = c.copy()
    c = (c + c.conj().T) / 2.0            # real-valued polynomial
    c[0, 0] = 5.0                         # positive at the base point
    f = poly_jets(c, z, 3, 3)
    if not f[0, 0, 0].real > 0.1:
        return
    lg = jet_log(f)
    back = jet_exp(lg)
    # roundoff grows with the log-jet magnitudes (divisions by f[0,0])
    scale = (1.0 + np.max(np.abs(lg))) ** 3 * (1.0 + np.max(np.abs(f)))
    np.testing.assert_allclose(back, f, atol=1e-13 * scale)
    assert abs(lg[0, 0, 0] - np.log(f[0, 0, 0].real)) < 1e-12 * scale


def test_jet_log_closed_form():
    # log(1 + z zbar): the (1,1) entry is the FS metric 1/(1+t)^2
    z = 0.7 - 0.4j
    t = abs(z) ** 2
    c = np.zeros((2, 2), dtype=complex)
    c[0, 0] = 1.0
    c[1, 1] = 1.0
    lg = jet_log(poly_jets(c, z, 2, 2))
    np.testing.assert_allclose(lg[0, 0, 0], np.log(1 + t), rtol=1e-14)
    np.testing.assert_allclose(lg[1, 0, 0], np.conj(z) / (1 + t), rtol=1e-13)
    np.testing.assert_allclose(lg[1, 1, 0].real, 1.0 / (1 + t) ** 2, rtol=1e-12)


@given(coeff_arrays, points)
@settings(max_examples=50, deadline=None)
def test_conjugate_symmetry_of_real_polynomials(c, z):
    c = (c + c.conj().T) / 2.0
    f = poly_jets(c, z, 3, 3)
    assert conjugate_symmetry_defect(f) < 1e-10 * (1.0 + np.max(np.abs(f)))
