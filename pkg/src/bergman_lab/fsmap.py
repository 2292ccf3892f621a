"""Bergman density, Fubini-Study weights, the comparison function f and
its Sobolev norms.

Everything here is driven by one object, FsContext, which fixes a
potential, a tensor power k, a quadrature grid and an orthonormalizing
transform T, and precomputes the scaled orthonormal frame stacks

    What[d, i, m] = (d/dz)^d (sum_a stack[d, a] T[a, i]) * e^{-k phi / 2}

per chart block.  The exponential factor is treated as a per-point
constant: it cancels identically in every quotient this module forms, and
it keeps all intermediates bounded (no e^{+k phi} blowups at far nodes).

Grid points with |z| > 1 are evaluated in the inverted chart, where the
local coordinate is again bounded by 1.  All quantities this module
reports (density, metric ratios, curvature scalars, Sobolev integrands)
are chart scalars, so the block split is invisible downstream; per-point
jet tables are expressed in the chart the point was evaluated in.

Single-point operations (`bergman_jet`, `f_jet`, ...) honor the chart the
caller put the point in; they do not flip it behind the caller's back.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular, LinAlgError

from .errors import KTooSmallError, NonPositiveFormError
from .geometry import ChartPoint, MetricPotential, QuadratureGrid, VOLUME
from .hermitian import DeltaMatrix, HermitianForm, HILB_ONB, orthonormalize, _chart_blocks
from .jets import jet_div, jet_log
from .sections import chart_stack


@dataclass(frozen=True)
class BergmanJet:
    """Value of rho_bar and the (2,2) jet table of log rho_bar."""
    rho_bar: float
    log_jet: np.ndarray  # shape (3, 3), entry [a, b] = d^a dbar^b log rho_bar

    @property
    def d_log(self):
        return complex(self.log_jet[1, 0])

    @property
    def ddbar_log(self):
        return float(self.log_jet[1, 1].real)


@dataclass(frozen=True)
class ScalarFieldJet:
    """Jet table of a real scalar field to second order in each variable."""
    jet: np.ndarray  # shape (3, 3), entry [a, b] = d^a dbar^b f

    @property
    def f(self):
        return float(self.jet[0, 0].real)

    @property
    def df(self):
        return complex(self.jet[1, 0])

    @property
    def dbar_f(self):
        return complex(self.jet[0, 1])

    @property
    def ddf(self):
        return complex(self.jet[2, 0])

    @property
    def ddbar_f(self):
        return float(self.jet[1, 1].real)


@dataclass(frozen=True)
class InducedMetricJet:
    """g_hk = k g_h + d dbar(-log rho_bar) and its derivatives."""
    g_hk: float
    dg: complex        # d g_hk
    dbar_g: complex    # dbar g_hk (= conj(dg), f real)
    ddbar_g: float     # d dbar g_hk, the curvature input


class FsContext:
    """Precomputed frame data for one (potential, k, grid, T) quadruple."""

    def __init__(self, potential: MetricPotential, k: int, grid: QuadratureGrid,
                 T: np.ndarray):
        self.potential = potential
        self.k = int(k)
        self.grid = grid
        self.T = T
        M = grid.size
        self.rho = np.empty(M)
        self.g_h = np.empty(M)
        self.g_hk = np.empty(M)
        self.psi = np.empty((3, 3, M), dtype=complex)   # jets of k phi + log rho_bar
        self.log_rho = np.empty((3, 3, M), dtype=complex)
        self.phi_jets = np.empty((3, 3, M), dtype=complex)
        self._blocks = []
        for idx, z_loc, chart in _chart_blocks(grid.z):
            if idx.size == 0:
                continue
            pj = potential.jet_batch(z_loc, orders=(2, 2))
            stack = chart_stack(z_loc, k, chart, orders=3)
            scale = np.exp(-0.5 * k * pj[0, 0].real)
            What = np.einsum("dam,ai->dim", stack, T) * scale[None, None, :]
            Sc = np.einsum("aim,bim->abm", What, What.conj())
            lr = jet_log(Sc) - k * pj
            lr[0, 0] += k * pj[0, 0]
            psi = k * pj + lr
            self._blocks.append({"idx": idx, "chart": chart, "What": What,
                                 "Sc": Sc, "pj": pj})
            self.rho[idx] = Sc[0, 0].real
            self.g_h[idx] = pj[1, 1].real
            self.g_hk[idx] = psi[1, 1].real
            self.psi[:, :, idx] = psi
            self.log_rho[:, :, idx] = lr
            self.phi_jets[:, :, idx] = pj

    def assert_positive_metric(self):
        if np.min(self.g_hk) <= 0.0:
            raise KTooSmallError(
                f"induced metric not positive at k = {self.k} "
                f"(min g_hk = {np.min(self.g_hk):.3e}); increase k")

    # -- frame contractions -------------------------------------------------

    def f_jets(self, delta: DeltaMatrix) -> np.ndarray:
        """(3, 3, M) jet table of f = sum_ij Lambda_ij W_i Wbar_j / sum |W|^2."""
        _require_onb(delta.basis_tag)
        out = np.empty((3, 3, self.grid.size), dtype=complex)
        for blk in self._blocks:
            q = np.einsum("aim,ij,bjm->abm", blk["What"], delta.L, blk["What"].conj())
            out[:, :, blk["idx"]] = jet_div(q, blk["Sc"])
        return out

    def fs_weights(self, A: HermitianForm) -> np.ndarray:
        """FS_k(A)/h^k as a positive function over the grid points."""
        _require_onb(A.basis_tag)
        try:
            fac = cho_factor(A.M, lower=True)
        except LinAlgError as exc:
            raise NonPositiveFormError("FS map needs a positive form") from exc
        out = np.empty(self.grid.size)
        for blk in self._blocks:
            W0 = blk["What"][0]
            y = cho_solve(fac, W0.conj())
            out[blk["idx"]] = np.einsum("im,im->m", W0, y).real
        return 1.0 / out

    def reference_values(self, delta: DeltaMatrix, Href: HermitianForm) -> np.ndarray:
        """f evaluated through an alternative reference form Href.

        Re-expresses Lambda in the Href-orthonormal frame, contracts it
        against FS(Href), and multiplies by the weight ratio
        FS(H_k)/FS(Href).  Must reproduce `f_jets(...)[0, 0]`.
        """
        _require_onb(delta.basis_tag)
        Tp = orthonormalize(Href)
        X = solve_triangular(Tp, delta.L)
        Lpp = solve_triangular(Tp, X.conj().T).conj().T
        try:
            fac = cho_factor(Href.M, lower=True)
        except LinAlgError as exc:
            raise NonPositiveFormError("reference form must be positive") from exc
        out = np.empty(self.grid.size)
        for blk in self._blocks:
            W0 = blk["What"][0]
            Wp = np.einsum("im,ia->am", W0, Tp)
            fprime = np.einsum("am,ab,bm->m", Wp, Lpp, Wp.conj()).real
            quad = np.einsum("im,im->m", W0, cho_solve(fac, W0.conj())).real
            w_href = 1.0 / quad
            ratio = quad / blk["Sc"][0, 0].real    # FS(H_k)/FS(Href)
            out[blk["idx"]] = (fprime * w_href) * ratio
        return out


def make_context(potential: MetricPotential, k: int, grid: QuadratureGrid,
                 T: np.ndarray) -> FsContext:
    return FsContext(potential, k, grid, T)


def _require_onb(tag):
    if tag != HILB_ONB:
        from .errors import BasisMismatchError
        raise BasisMismatchError(
            f"FS-map operations are defined in the {HILB_ONB!r} frame, got {tag!r}")


def _point_context(potential, k, T, x: ChartPoint):
    """One-point context in the chart the caller specified."""
    pj = potential.jet_batch(np.array([x.z]), orders=(2, 2))
    stack = chart_stack(np.array([x.z]), k, x.chart_id, orders=3)
    scale = np.exp(-0.5 * k * pj[0, 0].real)
    What = np.einsum("dam,ai->dim", stack, T) * scale[None, None, :]
    Sc = np.einsum("aim,bim->abm", What, What.conj())
    lr = jet_log(Sc) - k * pj
    lr[0, 0] += k * pj[0, 0]
    return pj, What, Sc, lr


def bergman_jet(potential: MetricPotential, k: int, T: np.ndarray,
                x: ChartPoint) -> BergmanJet:
    _, _, Sc, lr = _point_context(potential, k, T, x)
    return BergmanJet(rho_bar=float(Sc[0, 0, 0].real), log_jet=lr[:, :, 0])


def fs_weight(A: HermitianForm, T: np.ndarray, potential: MetricPotential,
              k: int, x: ChartPoint) -> float:
    _require_onb(A.basis_tag)
    try:
        fac = cho_factor(A.M, lower=True)
    except LinAlgError as exc:
        raise NonPositiveFormError("FS map needs a positive form") from exc
    _, What, _, _ = _point_context(potential, k, T, x)
    W0 = What[0]
    quad = np.einsum("im,im->m", W0, cho_solve(fac, W0.conj()))[0].real
    return 1.0 / quad


def f_jet(delta: DeltaMatrix, T: np.ndarray, potential: MetricPotential,
          k: int, x: ChartPoint) -> ScalarFieldJet:
    _require_onb(delta.basis_tag)
    _, What, Sc, _ = _point_context(potential, k, T, x)
    q = np.einsum("aim,ij,bjm->abm", What, delta.L, What.conj())
    return ScalarFieldJet(jet=jet_div(q, Sc)[:, :, 0])


def induced_metric_jet(potential: MetricPotential, k: int, T: np.ndarray,
                       x: ChartPoint) -> InducedMetricJet:
    pj, _, _, lr = _point_context(potential, k, T, x)
    psi = (k * pj + lr)[:, :, 0]
    if not psi[1, 1].real > 0.0:
        raise KTooSmallError(
            f"g_hk = {psi[1, 1].real:.3e} <= 0 at z = {x.z}; k = {k} too small")
    return InducedMetricJet(g_hk=float(psi[1, 1].real), dg=complex(psi[2, 1]),
                            dbar_g=complex(psi[1, 2]), ddbar_g=float(psi[2, 2].real))


# -- norms -------------------------------------------------------------------

def w22_parts(field_jet, phi_jet):
    """(f^2, |grad f|^2, |Hess f|^2) pointwise, with respect to g_h.

    Conventions (absorbed into the constant of the theorem, recorded here
    and in the README): real gradient normalization |grad f|^2 =
    2 g^-1 |df|^2, and the full covariant Hessian with all type
    components, |Hess f|^2 = 2 g^-2 (|f_zz - Gamma f_z|^2 + f_zzbar^2)
    with the Kahler Christoffel symbol Gamma = g^-1 dg = phi_zzzbar/phi_zzbar.
    """
    g = phi_jet[1, 1].real
    gamma = phi_jet[2, 1] / phi_jet[1, 1]
    f0 = field_jet[0, 0].real
    grad_sq = 2.0 * np.abs(field_jet[1, 0]) ** 2 / g
    h20 = field_jet[2, 0] - gamma * field_jet[1, 0]
    h11 = field_jet[1, 1].real
    hess_sq = 2.0 * (np.abs(h20) ** 2 + h11 ** 2) / g ** 2
    return f0 ** 2, grad_sq, hess_sq


def w22_density(field_jet, phi_jet):
    """Pointwise W^{2,2} integrand (sum of the three parts)."""
    f_sq, grad_sq, hess_sq = w22_parts(field_jet, phi_jet)
    return f_sq + grad_sq + hess_sq


def w22_norm(field_jets, phi_jets, weights) -> float:
    """W^{2,2}(omega_h) norm of a field given its jets over a grid."""
    return float(np.sqrt(np.sum(weights * w22_density(field_jets, phi_jets))))


def l2_norm(values, weights) -> float:
    return float(np.sqrt(np.sum(weights * np.asarray(values) ** 2)))


def reference_change(delta: DeltaMatrix, Href: HermitianForm, ctx: FsContext,
                     x: ChartPoint | None = None):
    """f computed through the Href reference route.

    Re-expresses the difference matrix in the Href-orthonormal frame,
    contracts against FS(Href), and compensates by the weight ratio
    FS(H_k)/FS(Href); the result must match the direct f route pointwise.
    Returns the full grid array, or the single value at x if given.
    """
    if x is None:
        return ctx.reference_values(delta, Href)
    _require_onb(delta.basis_tag)
    Tp = orthonormalize(Href)
    X = solve_triangular(Tp, delta.L)
    Lpp = solve_triangular(Tp, X.conj().T).conj().T
    fac = cho_factor(Href.M, lower=True)
    _, What, Sc, _ = _point_context(ctx.potential, ctx.k, ctx.T, x)
    W0 = What[0]
    Wp = np.einsum("im,ia->am", W0, Tp)
    fprime = np.einsum("am,ab,bm->m", Wp, Lpp, Wp.conj())[0].real
    quad = np.einsum("im,im->m", W0, cho_solve(fac, W0.conj()))[0].real
    return float(fprime * (1.0 / quad) * (quad / Sc[0, 0, 0].real))
