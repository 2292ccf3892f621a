"""Hermitian-form linear algebra for section spaces.

Matrices carry a basis tag ({monomial, hilb_onb, custom}) because the
Hilbert-Schmidt norm of A^-1 - B^-1 is only meaningful in a Gram-
orthonormal frame; the norm refuses to evaluate anything else rather than
silently converting.

Inverses are always applied through Cholesky solves against the stored
factorization, never formed explicitly: the stress sampler runs at spread
sigma = 3 (condition number about e^6) where explicit inverses shed digits.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, solve_triangular, LinAlgError

from .errors import BasisMismatchError, NonPositiveFormError
from .geometry import MetricPotential, QuadratureGrid, VOLUME, require_capacity
from .sections import SectionBasis, chart_stack

MONOMIAL = "monomial"
HILB_ONB = "hilb_onb"
CUSTOM = "custom"
_TAGS = (MONOMIAL, HILB_ONB, CUSTOM)


@dataclass(frozen=True)
class HermitianForm:
    """N x N hermitian matrix with provenance tag and positivity certificate."""
    M: np.ndarray
    basis_tag: str
    positive: bool = field(default=False)

    def __post_init__(self):
        if self.basis_tag not in _TAGS:
            raise BasisMismatchError(f"unknown basis tag {self.basis_tag!r}")
        defect = np.max(np.abs(self.M - self.M.conj().T)) if self.M.size else 0.0
        if defect > 1e-12 * max(1.0, float(np.max(np.abs(self.M)))):
            raise ValueError(f"matrix not hermitian (defect {defect:.2e})")

    @property
    def N(self):
        return self.M.shape[0]


@dataclass(frozen=True)
class DeltaMatrix:
    """Hermitian but not necessarily definite difference matrix."""
    L: np.ndarray
    basis_tag: str

    def __post_init__(self):
        if self.basis_tag not in _TAGS:
            raise BasisMismatchError(f"unknown basis tag {self.basis_tag!r}")

    @property
    def N(self):
        return self.L.shape[0]


def hermitize(M):
    return 0.5 * (M + M.conj().T)


def scaled_frame_values(potential: MetricPotential, k: int, z, chart_id=0):
    """Section values times e^{-k phi / 2} at an array of local coordinates.

    The scaling keeps every entry bounded by 1 in modulus on the Fubini-
    Study background, so Gram assembly at large |z| neither overflows nor
    loses digits.  Shape (k+1, M), rows in section order.
    """
    stack = chart_stack(z, k, chart_id, orders=1)
    phi = potential.jet_batch(z, orders=(0, 0))[0, 0].real
    return stack[0] * np.exp(-0.5 * k * phi)[None, :]


def _chart_blocks(z):
    """Indices of points kept in chart 0 and of those moved to chart 1.

    Points with |z| > 1 are evaluated in the inverted chart, where the
    local coordinate is bounded and high-order jets stay conditioned.
    """
    far = np.abs(z) > 1.0
    idx0 = np.nonzero(~far)[0]
    idx1 = np.nonzero(far)[0]
    return (idx0, z[idx0], 0), (idx1, 1.0 / z[idx1], 1)


def hilb_gram(potential: MetricPotential, k: int, basis: SectionBasis,
              grid: QuadratureGrid) -> HermitianForm:
    """Gram matrix (N_k/V) * integral of s_a sbar_b e^{-k phi} d mu.

    Assembled per chart block so far points use the inverted coordinate.
    """
    require_capacity(grid, k)
    if basis.k != k:
        raise ValueError(f"basis is for k = {basis.k}, requested k = {k}")
    N = basis.N
    H = np.zeros((N, N), dtype=complex)
    for idx, z_loc, chart in _chart_blocks(grid.z):
        if idx.size == 0:
            continue
        S = scaled_frame_values(potential, k, z_loc, chart)
        H += np.einsum("am,m,bm->ab", S, grid.w[idx], S.conj())
    H = hermitize(H) * (N / VOLUME)
    try:
        cholesky(H, lower=True)
    except LinAlgError as exc:
        raise NonPositiveFormError(
            "Gram matrix failed Cholesky; grid and potential are inconsistent") from exc
    return HermitianForm(M=H, basis_tag=MONOMIAL, positive=True)


def orthonormalize(H: HermitianForm) -> np.ndarray:
    """Transform T with T* H T = I, Gram-Schmidt in basis order.

    T is upper triangular with positive diagonal (inverse adjoint of the
    lower Cholesky factor), so golden values are reproducible.
    """
    try:
        L = cholesky(H.M, lower=True)
    except LinAlgError as exc:
        raise NonPositiveFormError("cannot orthonormalize a non-positive form") from exc
    return solve_triangular(L, np.eye(H.N), lower=True).conj().T


def hs_norm(delta: DeltaMatrix) -> float:
    """Hilbert-Schmidt (Frobenius) norm; only defined in the hilb_onb frame."""
    if delta.basis_tag != HILB_ONB:
        raise BasisMismatchError(
            f"HS norm is reference-dependent; need basis {HILB_ONB!r}, "
            f"got {delta.basis_tag!r}")
    return float(np.linalg.norm(delta.L))


def trace_split(delta: DeltaMatrix):
    """Split off the identity component: delta = delta0 + c I, tr(delta0) = 0."""
    c = float(np.trace(delta.L).real) / delta.N
    return DeltaMatrix(L=delta.L - c * np.eye(delta.N), basis_tag=delta.basis_tag), c


def haar_unitary(rng, N):
    """Haar-distributed unitary via QR of a complex Ginibre matrix with the
    R-diagonal phase fix (otherwise QR is not Haar)."""
    Z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / math.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))[None, :]


def sample_pair(seed, N: int, sigma: float):
    """Random positive pair (A, B) in the ON frame, eigenvalues in
    [e^-sigma, e^sigma] (log-uniform spectra, Haar eigenframes).

    `seed` may be an int or a numpy SeedSequence; the latter is how the
    experiment driver hands out independent, reproducible per-sample
    streams.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)

    def one():
        eigs = np.exp(rng.uniform(-sigma, sigma, size=N))
        U = haar_unitary(rng, N)
        return HermitianForm(M=hermitize((U * eigs[None, :]) @ U.conj().T),
                             basis_tag=HILB_ONB, positive=True)

    return one(), one()


def delta_from(A: HermitianForm, B: HermitianForm) -> DeltaMatrix:
    """Lambda = A^-1 - B^-1 via Cholesky solves (no explicit inverses)."""
    if A.basis_tag != B.basis_tag:
        raise BasisMismatchError("A and B live in different bases")
    I = np.eye(A.N)
    try:
        Ainv = cho_solve(cho_factor(A.M, lower=True), I)
        Binv = cho_solve(cho_factor(B.M, lower=True), I)
    except LinAlgError as exc:
        raise NonPositiveFormError("sample matrix not positive definite") from exc
    return DeltaMatrix(L=hermitize(Ainv - Binv), basis_tag=A.basis_tag)


def save_matrix(path, M, fmt=None):
    """Dump a complex matrix for regression fixtures.

    bin: row-major little-endian float64 (re, im) pairs, shape inferred
    from size on load (square matrices only).  csv: one row per line,
    're<tab>im' pairs as repr floats.
    """
    fmt = fmt or ("csv" if str(path).endswith(".csv") else "bin")
    M = np.asarray(M, dtype=complex)
    if fmt == "bin":
        flat = np.empty(M.size * 2, dtype="<f8")
        flat[0::2] = M.real.ravel()
        flat[1::2] = M.imag.ravel()
        with open(path, "wb") as fh:
            fh.write(flat.tobytes())
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in M:
                cells = []
                for v in row:
                    cells.extend((repr(float(v.real)), repr(float(v.imag))))
                writer.writerow(cells)
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def load_matrix(path, fmt=None):
    fmt = fmt or ("csv" if str(path).endswith(".csv") else "bin")
    if fmt == "bin":
        with open(path, "rb") as fh:
            flat = np.frombuffer(fh.read(), dtype="<f8")
        vals = flat[0::2] + 1j * flat[1::2]
        N = math.isqrt(vals.size)
        if N * N != vals.size:
            raise ValueError("binary dump does not hold a square matrix")
        return vals.reshape(N, N)
    if fmt == "csv":
        rows = []
        with open(path, newline="") as fh:
            for cells in csv.reader(fh):
                vals = [float(c) for c in cells]
                rows.append([complex(re, im) for re, im in zip(vals[0::2], vals[1::2])])
        return np.array(rows, dtype=complex)
    raise ValueError(f"unknown matrix format {fmt!r}")
