"""Charts, Kahler potentials with jets, and quadrature grids on P^1.

The sphere is covered by two affine charts, z and w = 1/z.  Nodes are
generated in the z chart from the spherical parametrization
z = tan(theta/2) e^{i alpha}; the point at infinity is never a node.  The
shipped potential family is

    phi_eps = log(1 + |z|^2) + eps * |z|^2 / (1 + |z|^2)^2,

smooth on all of P^1 and, conveniently, given by the same formula in both
charts (the perturbation profile t/(1+t)^2 is invariant under t -> 1/t).

Each grid point carries two weights.  `w_flat` realizes the chart
functional integral (1/pi) dx dy, which is what the Gram-matrix integrands
are naturally written against and is exact for integrands of the form
z^a zbar^b (1+|z|^2)^(-k-2).  `w = w_flat * g_phi` realizes the measure
omega_phi / pi dx dy (= omega^n/n! at n=1), whose total mass is the
volume V = 1.
"""

import io
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import CapacityError, ConfigError, DegenerateMetricError
from .jets import jet_div, jet_log, jet_mul

VOLUME = 1.0  # integral of c_1(O(1)) over P^1
JET_ORDER = 4


@dataclass(frozen=True)
class ChartPoint:
    """A point of P^1 in one of the two affine charts (0: z, 1: w=1/z)."""
    z: complex
    chart_id: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.z.real) and np.isfinite(self.z.imag)):
            raise ValueError("chart coordinate must be finite")
        if self.chart_id not in (0, 1):
            raise ValueError(f"chart_id {self.chart_id} not valid for P1")

    def invert(self):
        """The same point seen from the other chart."""
        if self.z == 0:
            raise ValueError("origin of one chart is the infinity of the other")
        return ChartPoint(1.0 / self.z, 1 - self.chart_id)


@dataclass(frozen=True)
class MetricJet:
    """Derivatives d^a dbar^b phi at a point, a, b <= JET_ORDER.

    `table[a, b]` is the mixed Wirtinger derivative; conjugate symmetry
    table[a, b] = conj(table[b, a]) holds because phi is real.
    """
    table: np.ndarray

    @property
    def phi(self):
        return float(self.table[0, 0].real)

    @property
    def d_phi(self):
        return complex(self.table[1, 0])

    @property
    def dbar_phi(self):
        return complex(self.table[0, 1])

    @property
    def g(self):
        """Metric density d dbar phi (n = 1)."""
        return float(self.table[1, 1].real)


@dataclass(frozen=True)
class MetricPotential:
    """Descriptor of the shipped potential family phi_eps (see module doc)."""
    epsilon: float = 0.0

    def __post_init__(self):
        if abs(self.epsilon) > 0.1:
            raise ValueError("perturbation amplitude capped at |eps| <= 0.1 "
                             "(positivity of the metric is only certified there)")

    @property
    def name(self):
        return "fs" if self.epsilon == 0.0 else "perturbed"

    def jet_batch(self, z, orders=(JET_ORDER, JET_ORDER)):
        """Jet table of phi at an array of chart coordinates.

        Returns shape (orders[0]+1, orders[1]+1, M).  Valid in either
        chart: the potential has the same coordinate expression in both.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        A, B = orders[0] + 1, orders[1] + 1
        # jet of t = |z|^2 = z * zbar
        t = np.zeros((A, B, z.size), dtype=complex)
        t[0, 0] = z * np.conj(z)
        if A > 1:
            t[1, 0] = np.conj(z)
        if B > 1:
            t[0, 1] = z
        if A > 1 and B > 1:
            t[1, 1] = 1.0
        one = np.zeros_like(t)
        one[0, 0] = 1.0
        base = jet_log(one + t)
        if self.epsilon != 0.0:
            opt = one + t
            base = base + self.epsilon * jet_div(t, jet_mul(opt, opt))
        return base

    def jet(self, x: ChartPoint) -> MetricJet:
        table = self.jet_batch(np.array([x.z]))[:, :, 0]
        return MetricJet(table)


def metric_jet(potential: MetricPotential, x: ChartPoint) -> MetricJet:
    """Evaluate the potential jet at a point, checking metric positivity."""
    mj = potential.jet(x)
    if not mj.g > 0.0:
        raise DegenerateMetricError(
            f"d dbar phi = {mj.g:.3e} <= 0 at z = {x.z} (chart {x.chart_id})")
    return mj


@dataclass(frozen=True)
class QuadratureGrid:
    """Product Gauss-Legendre (polar) x uniform (angular) nodes on P^1.

    z, w, w_flat are flat arrays of length n_theta * n_angle.  `w` sums
    to the volume V; `w_flat` is the chart Lebesgue functional (see module
    doc).  k_max is the largest tensor power whose Gram and density
    integrands this grid integrates exactly.
    """
    z: np.ndarray
    w: np.ndarray
    w_flat: np.ndarray
    n_theta: int
    n_angle: int
    epsilon: float

    @property
    def size(self):
        return self.z.size

    @property
    def k_max(self):
        return min(self.n_theta - 3, (self.n_angle - 1) // 2)

    def points(self):
        """Iterate (ChartPoint, weight) pairs, point-by-point view of the grid."""
        for zi, wi in zip(self.z, self.w):
            yield ChartPoint(complex(zi)), float(wi)

    def integrate(self, values):
        """Integral against the omega_phi measure (total mass V)."""
        return float(np.real(np.sum(self.w * values)))

    def integrate_flat(self, values):
        """Integral against the chart functional (1/pi) dx dy."""
        return float(np.real(np.sum(self.w_flat * values)))


def build_grid(manifold="P1", resolution=(64, 64),
               potential: MetricPotential | None = None) -> QuadratureGrid:
    """Quadrature grid for P^1 with the given potential's volume weights.

    Gauss-Legendre nodes in u = cos(theta) give radial exactness for
    polynomial integrands in u; the uniform angular grid integrates
    trigonometric polynomials exactly up to frequency n_angle - 1.
    """
    if manifold != "P1":
        raise ConfigError(f"unknown manifold {manifold!r}; shipped charts cover P1 only")
    n_theta, n_angle = int(resolution[0]), int(resolution[1])
    if n_theta < 8 or n_angle < 8:
        raise CapacityError(f"resolution {resolution} below the (8, 8) minimum")
    if potential is None:
        potential = MetricPotential(0.0)

    u, gl_w = np.polynomial.legendre.leggauss(n_theta)
    t = (1.0 - u) / (1.0 + u)              # |z|^2 along the polar direction
    radial_flat = gl_w * 2.0 / (1.0 + u) ** 2
    alpha = 2.0 * np.pi * np.arange(n_angle) / n_angle
    z = np.sqrt(t)[:, None] * np.exp(1j * alpha)[None, :]
    z = z.ravel()
    w_flat = np.repeat(radial_flat / n_angle, n_angle)

    g = potential.jet_batch(z, orders=(1, 1))[1, 1].real
    if np.any(g <= 0.0):
        bad = z[int(np.argmin(g))]
        raise DegenerateMetricError(f"metric density non-positive near z = {bad}")
    w = w_flat * g
    return QuadratureGrid(z=z, w=w, w_flat=w_flat, n_theta=n_theta,
                          n_angle=n_angle, epsilon=potential.epsilon)


def require_capacity(grid: QuadratureGrid, k: int):
    """Raise unless the grid integrates degree-k section pairs exactly."""
    if k > grid.k_max:
        raise CapacityError(
            f"grid ({grid.n_theta}, {grid.n_angle}) supports k <= {grid.k_max}, "
            f"got k = {k}; raise the resolution")


@dataclass(frozen=True)
class RunDescriptor:
    """The TOML-serializable description of one run setup."""
    manifold: str = "P1"
    k: int = 8
    epsilon: float = 0.0
    grid: tuple = (64, 64)

    def to_toml(self) -> str:
        g = ", ".join(str(int(v)) for v in self.grid)
        return (f'manifold = "{self.manifold}"\n'
                f"k = {int(self.k)}\n"
                f"epsilon = {float(self.epsilon)!r}\n"
                f"grid = [{g}]\n")

    @classmethod
    def from_toml(cls, text: str) -> "RunDescriptor":
        try:
            data = tomllib.load(io.BytesIO(text.encode("utf-8")))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad TOML descriptor: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "RunDescriptor":
        known = {"manifold", "k", "epsilon", "grid"}
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown descriptor key {key!r}")
        out = cls(manifold=data.get("manifold", "P1"),
                  k=int(data.get("k", 8)),
                  epsilon=float(data.get("epsilon", 0.0)),
                  grid=tuple(int(v) for v in data.get("grid", (64, 64))))
        if out.k < 1:
            raise ConfigError("descriptor key 'k' must be >= 1")
        if len(out.grid) != 2:
            raise ConfigError("descriptor key 'grid' must be a pair")
        return out
