"""Ambient projective-space diagnostics for the embedded curve.

The curve sits in P^(N-1) through its orthonormal section frame.  A
hermitian matrix Lambda generates a holomorphic vector field xi on the
ambient space whose Hamiltonian is ftilde; this module computes |xi|^2 in
the ambient Fubini-Study metric, splits it into parts tangent and normal
to the curve, measures dbar of the tangent part, and evaluates the
second-fundamental-form eigenvalue (a scalar at n = 1).

Realization notes, kept in one place because sign conventions bite:
  * homogeneous coordinates are taken conjugate to the frame values,
    v = conj(W); the Hamiltonian v* Lambda v / |v|^2 then pulls back to
    the comparison function f with no conjugations in f's own formula;
  * the tangent field dual to df is xi^z = g_hk^{-1} dbar f, the
    convention under which Hamiltonian fields of holomorphic isometries
    are holomorphic (and dbar of them vanishes, which the sl(2) tests
    check);
  * everything reported is a chart scalar, evaluated per chart block.
"""

from dataclasses import dataclass

import numpy as np

from .errors import KTooSmallError
from .fsmap import FsContext, _point_context, _require_onb
from .geometry import ChartPoint, MetricPotential
from .hermitian import DeltaMatrix
from .jets import jet_div


@dataclass(frozen=True)
class XiDecomposition:
    """|xi|^2 and its tangent/normal split at a point (or grid of points)."""
    xi_sq: np.ndarray
    tangent_sq: np.ndarray
    normal_sq: np.ndarray

    def pythagoras_defect(self):
        return float(np.max(np.abs(self.xi_sq - self.tangent_sq - self.normal_sq)))


@dataclass(frozen=True)
class SffSample:
    """Minimum eigenvalue of -A* ^ A at a point; scalar for a curve."""
    lam: float


def ambient_hamiltonian(delta: DeltaMatrix, W) -> float:
    """ftilde = sum_ij Lambda_ij W_i Wbar_j / sum_l |W_l|^2 at a frame vector."""
    _require_onb(delta.basis_tag)
    W = np.asarray(W, dtype=complex)
    s = float(np.sum(np.abs(W) ** 2))
    if s == 0.0:
        raise ValueError("zero frame vector has no projective image")
    return float(np.einsum("i,ij,j->", W, delta.L, W.conj()).real / s)


def _fs_pair(x, y, v, s):
    """Ambient FS pairing of tangent representatives x, y at the point v.

    Shapes (N, M); returns (M,) complex.
    """
    return (np.einsum("im,im->m", np.conj(y), x) * s
            - np.einsum("im,im->m", np.conj(y), v) * np.einsum("im,im->m", np.conj(v), x)) / s ** 2


def xi_decompositions(ctx: FsContext, delta: DeltaMatrix) -> XiDecomposition:
    """Grid-wide decomposition |xi|^2 = |tangent|^2 + |normal|^2."""
    _require_onb(delta.basis_tag)
    ctx.assert_positive_metric()
    M = ctx.grid.size
    xi_sq = np.empty(M)
    tangent_sq = np.empty(M)
    normal_sq = np.empty(M)
    for blk in ctx._blocks:
        idx = blk["idx"]
        v = np.conj(blk["What"][0])
        tau = np.conj(blk["What"][1])
        s = blk["Sc"][0, 0].real
        a = delta.L @ v
        g_tau = _fs_pair(tau, tau, v, s).real      # equals g_hk identically
        pair_at = _fs_pair(a, tau, v, s)
        xi = _fs_pair(a, a, v, s).real
        tan = np.abs(pair_at) ** 2 / g_tau
        r = a - (pair_at / g_tau)[None, :] * tau
        nor = _fs_pair(r, r, v, s).real
        xi_sq[idx] = xi
        tangent_sq[idx] = tan
        normal_sq[idx] = nor
    return XiDecomposition(xi_sq=xi_sq, tangent_sq=tangent_sq, normal_sq=normal_sq)


def xi_decompose(delta: DeltaMatrix, ctx: FsContext, x: ChartPoint) -> XiDecomposition:
    """Single-point version; evaluates in the chart of x."""
    _require_onb(delta.basis_tag)
    pj, What, Sc, lr = _point_context(ctx.potential, ctx.k, ctx.T, x)
    psi = ctx.k * pj + lr
    if not psi[1, 1, 0].real > 0.0:
        raise KTooSmallError(f"induced metric not positive at z = {x.z}")
    v = np.conj(What[0])
    tau = np.conj(What[1])
    s = Sc[0, 0].real
    a = delta.L @ v
    g_tau = _fs_pair(tau, tau, v, s).real
    pair_at = _fs_pair(a, tau, v, s)
    xi = _fs_pair(a, a, v, s).real
    tan = np.abs(pair_at) ** 2 / g_tau
    r = a - (pair_at / g_tau)[None, :] * tau
    nor = _fs_pair(r, r, v, s).real
    return XiDecomposition(xi_sq=float(xi[0]), tangent_sq=float(tan[0]),
                           normal_sq=float(nor[0]))


def dbar_tangent_density(ctx: FsContext, f_jets: np.ndarray) -> np.ndarray:
    """Pointwise |dbar(pi_T xi)|^2 for the tangent field xi^z = g_hk^{-1} dbar f.

    dbar applied to the coefficient: (f_zbarzbar g - f_zbar dbar g)/g^2;
    the (0,1)-form-with-(1,0)-vector tensor has unit frame norm, so the
    squared modulus is already the g_hk norm.
    """
    g = ctx.psi[1, 1].real
    val = (f_jets[0, 2] * g - f_jets[0, 1] * ctx.psi[1, 2]) / g ** 2
    return np.abs(val) ** 2


def dbar_tangent_norm(delta: DeltaMatrix, ctx: FsContext, x: ChartPoint) -> float:
    """Single-point |dbar(pi_T xi_Lambda)|^2 with respect to g_hk."""
    _require_onb(delta.basis_tag)
    pj, What, Sc, lr = _point_context(ctx.potential, ctx.k, ctx.T, x)
    q = np.einsum("aim,ij,bjm->abm", What, delta.L, What.conj())
    fj = jet_div(q, Sc)
    psi = ctx.k * pj + lr
    g = psi[1, 1, 0].real
    if not g > 0.0:
        raise KTooSmallError(f"induced metric not positive at z = {x.z}")
    val = (fj[0, 2, 0] * g - fj[0, 1, 0] * psi[1, 2, 0]) / g ** 2
    return float(np.abs(val) ** 2)


def sff_lambdas(ctx: FsContext) -> np.ndarray:
    """Grid-wide second-fundamental-form eigenvalue lambda = 2 - R_hk.

    R_hk is the holomorphic sectional curvature of the induced metric in a
    unit frame; the ambient Fubini-Study curvature tensor contributes the
    constant 2 at n = 1.
    """
    ctx.assert_positive_metric()
    g = ctx.psi[1, 1].real
    R = (-ctx.psi[2, 2].real + (ctx.psi[2, 1] * ctx.psi[1, 2]).real / g) / g ** 2
    return 2.0 - R


def sff_lambda(potential: MetricPotential, k: int, T: np.ndarray,
               x: ChartPoint) -> SffSample:
    pj, _, _, lr = _point_context(potential, k, T, x)
    psi = (k * pj + lr)[:, :, 0]
    g = psi[1, 1].real
    if not g > 0.0:
        raise KTooSmallError(f"induced metric degenerate at z = {x.z}; k too small")
    R = (-psi[2, 2].real + (psi[2, 1] * psi[1, 2]).real / g) / g ** 2
    return SffSample(lam=float(2.0 - R))


def lemma_diagnostics(ctx: FsContext, delta: DeltaMatrix, f_jets=None):
    """Monitored (not asserted) lemma-level ratios for one Lambda.

    Returns a dict with the L^2(omega_hk) masses of the normal part and of
    dbar(tangent part), their ratio (None below denominator 1e-8), and the
    ratio ||Lambda||_HS^2 / (k ||xi||^2): the quantities whose boundedness
    the lemmas predict.  omega_hk weights are w * g_hk/g_h per point.
    """
    if f_jets is None:
        f_jets = ctx.f_jets(delta)
    w_hk = ctx.grid.w * (ctx.g_hk / ctx.g_h)
    dec = xi_decompositions(ctx, delta)
    dbar_sq = dbar_tangent_density(ctx, f_jets)
    normal_mass = float(np.sum(w_hk * dec.normal_sq))
    dbar_mass = float(np.sum(w_hk * dbar_sq))
    xi_mass = float(np.sum(w_hk * dec.xi_sq))
    hs_sq = float(np.sum(np.abs(delta.L) ** 2))
    return {
        "normal_mass": normal_mass,
        "dbar_tangent_mass": dbar_mass,
        "normal_over_dbar": (normal_mass / dbar_mass) if dbar_mass > 1e-8 else None,
        "hs_over_k_xi": hs_sq / (ctx.k * xi_mass) if xi_mass > 0 else None,
    }
