"""Arithmetic on truncated Wirtinger jets.

A jet is an array J of shape (A+1, B+1) + tail, with J[a, b] holding the
mixed derivative d^a dbar^b F evaluated at one point (tail = ()) or at a
batch of points (tail = (M,)).  Products, quotients, logs and exponentials
of smooth functions then become finite recursions through the Leibniz rule,
which is all the derivative bookkeeping this package ever needs: no symbolic
algebra, no global finite differencing.
"""

import numpy as np
from math import comb


def jet_mul(f, g):
    """Jet of the product f*g, truncated to the common shape."""
    A = min(f.shape[0], g.shape[0])
    B = min(f.shape[1], g.shape[1])
    out = np.zeros((A, B) + np.broadcast_shapes(f.shape[2:], g.shape[2:]),
                   dtype=np.result_type(f, g, np.complex128))
    for a in range(A):
        for b in range(B):
            acc = 0.0
            for i in range(a + 1):
                for j in range(b + 1):
                    acc = acc + comb(a, i) * comb(b, j) * f[i, j] * g[a - i, b - j]
            out[a, b] = acc
    return out


def jet_div(f, g):
    """Jet of f/g.  Requires g[0, 0] != 0; solves the Leibniz triangle
    for the quotient in lexicographic order."""
    A = min(f.shape[0], g.shape[0])
    B = min(f.shape[1], g.shape[1])
    out = np.zeros((A, B) + np.broadcast_shapes(f.shape[2:], g.shape[2:]),
                   dtype=np.result_type(f, g, np.complex128))
    for a in range(A):
        for b in range(B):
            acc = f[a, b].astype(out.dtype) if hasattr(f[a, b], "astype") else f[a, b]
            for i in range(a + 1):
                for j in range(b + 1):
                    if i == a and j == b:
                        continue
                    acc = acc - comb(a, i) * comb(b, j) * out[i, j] * g[a - i, b - j]
            out[a, b] = acc / g[0, 0]
    return out


def jet_log(f):
    """Jet of log(f) for f[0, 0] real positive.

    Every derivative of log f of positive order equals the matching
    derivative of (d f)/f shifted down by one, so one jet division does
    all the work.
    """
    out = np.zeros_like(f, dtype=np.result_type(f, np.complex128))
    out[0, 0] = np.log(f[0, 0].real)
    if f.shape[0] > 1:
        out[1:, :] = jet_div(f[1:, :], f[: f.shape[0] - 1, :])
    if f.shape[1] > 1:
        out[:1, 1:] = jet_div(f[:1, 1:], f[:1, : f.shape[1] - 1])
    return out


def jet_exp(f):
    """Jet of exp(f), by the recursion (e^f)' = f' e^f."""
    out = np.zeros_like(f, dtype=np.result_type(f, np.complex128))
    out[0, 0] = np.exp(f[0, 0])
    A, B = f.shape[0], f.shape[1]
    for a in range(A):
        for b in range(B):
            if a == 0 and b == 0:
                continue
            acc = 0.0
            if a > 0:
                for i in range(a):
                    for j in range(b + 1):
                        acc = acc + comb(a - 1, i) * comb(b, j) * f[a - i, b - j] * out[i, j]
            else:
                for j in range(b):
                    acc = acc + comb(b - 1, j) * f[0, b - j] * out[0, j]
            out[a, b] = acc
    return out


def conjugate_symmetry_defect(f):
    """max |f[a,b] - conj(f[b,a])| over the square part of the jet.

    Zero for jets of real-valued functions; used as a cheap health check.
    """
    n = min(f.shape[0], f.shape[1])
    sq = f[:n, :n]
    return float(np.max(np.abs(sq - np.conj(np.swapaxes(sq, 0, 1)))))
