"""Two-ball gap geometry and the bispherical map of the meridian half-plane.

The meridian half-plane uses coordinates ``r = |x'| >= 0`` and ``z = x_n``.
Bispherical coordinates ``(xi, eta)`` are related to it by::

    r = a sin(eta) / (cosh(xi) - cos(eta))
    z = a sinh(xi) / (cosh(xi) - cos(eta))

with foci at ``(0, +-a)``.  The surfaces ``xi = +-xi0`` are the two unit
spheres centred at ``(0, +-(1 + eps))``; ``eta = pi`` is the symmetry axis
between them and ``eta -> 0`` is the point at infinity.  The region exterior
to both balls becomes the rectangle ``[-xi0, xi0] x (0, pi]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count, check_open_interval, check_positive
from .errors import ConfigurationError, DomainError

DEFAULT_C_GAP = 0.3
DEFAULT_OUTER_RADIUS = 2.5
STRETCHINGS = ("asinh", "uniform")


@dataclass(frozen=True)
class GapGeometry:
    """Gap half-width and the derived bispherical constants.

    ``eta_min`` is the coordinate of the outer (Dirichlet) arc.  The arc
    crosses the midplane ``z = 0`` at ``r = a cot(eta_min / 2)``, reported as
    :attr:`outer_radius`.
    """

    eps: float
    xi0: float
    a: float
    eta_min: float
    c_gap: float = DEFAULT_C_GAP

    @property
    def outer_radius(self) -> float:
        return self.a / math.tan(0.5 * self.eta_min)

    @property
    def sphere_centre(self) -> float:
        return 1.0 + self.eps


def geometry_from_eps(eps, eta_min=None, c_gap=DEFAULT_C_GAP, *, outer_radius=DEFAULT_OUTER_RADIUS):
    """Build a :class:`GapGeometry` for gap half-width ``eps``.

    Parameters
    ----------
    eps : float
        Half the distance between the two unit balls, ``eps > 0``.
    eta_min : float, optional
        Outer truncation coordinate in ``(0, pi)``.  When omitted it is chosen
        so that the outer arc crosses the midplane at ``outer_radius``; this
        keeps the physical domain essentially independent of ``eps``.
    c_gap : float
        Radius of the ball ``B_c`` that defines the narrow region ``V``.
    outer_radius : float
        Midplane radius of the outer arc, used only when ``eta_min`` is None.
    """
    eps = check_positive(eps, "eps")
    c_gap = check_open_interval(c_gap, "c_gap", 0.0, 0.5)
    xi0 = math.acosh(1.0 + eps)
    # sqrt(eps (2 + eps)) is sinh(xi0) without cancellation for tiny eps
    a = math.sqrt(eps * (2.0 + eps))
    if eta_min is None:
        outer_radius = check_positive(outer_radius, "outer_radius")
        if outer_radius <= 2.0 * c_gap:
            raise DomainError("outer_radius must exceed 2 * c_gap so that V lies inside the domain")
        eta_min = 2.0 * math.atan2(a, outer_radius)
    else:
        eta_min = check_open_interval(eta_min, "eta_min", 0.0, math.pi)
    return GapGeometry(eps=eps, xi0=xi0, a=a, eta_min=eta_min, c_gap=c_gap)


def _denominator(xi, eta):
    d = np.cosh(xi) - np.cos(eta)
    if np.any(d <= 0.0):
        raise DomainError("(xi, eta) = (0, 0) is the point at infinity")
    return d


def bispherical_to_physical(xi, eta, geom: GapGeometry):
    """Map bispherical ``(xi, eta)`` to meridian ``(r, z)``; accepts arrays."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    d = _denominator(xi, eta)
    r = geom.a * np.sin(eta) / d
    z = geom.a * np.sinh(xi) / d
    if r.ndim == 0:
        return float(r), float(z)
    return r, z


def conformal_factor(xi, eta, geom: GapGeometry):
    """Scale factor ``h`` with ``dr^2 + dz^2 = h^2 (dxi^2 + deta^2)``."""
    h = geom.a / _denominator(np.asarray(xi, dtype=float), np.asarray(eta, dtype=float))
    return float(h) if np.ndim(h) == 0 else h


def metric_derivatives(xi, eta, geom: GapGeometry):
    """Analytic ``(r_xi, r_eta, z_xi, z_eta)``.

    The map satisfies ``r_xi = z_eta`` and ``r_eta = -z_xi``.
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    d2 = _denominator(xi, eta) ** 2
    a = geom.a
    r_xi = -a * np.sin(eta) * np.sinh(xi) / d2
    r_eta = a * (np.cos(eta) * np.cosh(xi) - 1.0) / d2
    return r_xi, r_eta, -r_eta, r_xi


# Stretched eta coordinate.  With s(eta) = asinh(cot(eta / 2)) the midplane
# radius is r = a sinh(s), so a uniform grid in t = s(eta_min) - s(eta) is
# uniform in eta near the axis and logarithmic in r far from the gap.
def _t_max(eta_min, stretch):
    if stretch == "uniform":
        return math.pi - eta_min
    return math.asinh(1.0 / math.tan(0.5 * eta_min))


def eta_of_t(t, eta_min, stretch="asinh"):
    t = np.asarray(t, dtype=float)
    if stretch == "uniform":
        return eta_min + t
    return 2.0 * np.arctan2(1.0, np.sinh(_t_max(eta_min, stretch) - t))


def deta_dt(eta, stretch="asinh"):
    eta = np.asarray(eta, dtype=float)
    if stretch == "uniform":
        return np.ones_like(eta)
    return 2.0 * np.sin(0.5 * eta)


@dataclass(frozen=True, eq=False)
class MeridianGrid:
    """Tensor grid on ``[-xi0, xi0] x [eta_min, pi]``.

    Nodes are uniform in ``xi`` and in the computational coordinate ``t``;
    ``eta = eta(t)`` follows :func:`eta_of_t`.  Two-dimensional arrays have
    shape ``(n_eta, n_xi)``: row ``j`` is ``eta[j]`` (``j = 0`` on the outer
    arc, ``j = n_eta - 1`` on the axis) and column ``i`` is ``xi[i]``.  Flat
    node numbering is row-major, ``index = j * n_xi + i``.
    """

    geom: GapGeometry
    n_xi: int
    n_eta: int
    stretch: str
    xi: np.ndarray
    t: np.ndarray
    eta: np.ndarray
    dxi: float
    dt: float
    r: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    h: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return (self.n_eta, self.n_xi)

    @property
    def size(self):
        return self.n_eta * self.n_xi

    @property
    def deta(self):
        """Spacing of the computational eta coordinate (``eta`` itself when uniform)."""
        return self.dt

    @property
    def jac(self):
        """``d eta / d t`` at each eta row."""
        return deta_dt(self.eta, self.stretch)

    def refined(self):
        """Grid with every interval halved; the old nodes are a subset of the new ones."""
        return build_grid(self.geom, 2 * self.n_xi - 1, 2 * self.n_eta - 1, stretch=self.stretch)

    def in_V(self):
        """Boolean mask of nodes in the narrow region ``r^2 + z^2 <= c_gap^2``."""
        return self.r**2 + self.z**2 <= self.geom.c_gap**2


def build_grid(geom: GapGeometry, n_xi, n_eta, *, stretch="asinh"):
    """Uniform tensor grid in ``(xi, t)`` with precomputed ``r``, ``z``, ``h``.

    ``n_xi`` and ``n_eta`` are node counts (at least 8 each).
    """
    n_xi = check_count(n_xi, "n_xi", 8)
    n_eta = check_count(n_eta, "n_eta", 8)
    if stretch not in STRETCHINGS:
        raise ConfigurationError(f"stretch must be one of {STRETCHINGS}, got {stretch!r}")
    xi = np.linspace(-geom.xi0, geom.xi0, n_xi)
    t = np.linspace(0.0, _t_max(geom.eta_min, stretch), n_eta)
    eta = eta_of_t(t, geom.eta_min, stretch)
    eta[0] = geom.eta_min
    eta[-1] = math.pi
    XI, ETA = np.meshgrid(xi, eta)
    r, z = bispherical_to_physical(XI, ETA, geom)
    r[-1, :] = 0.0
    h = conformal_factor(XI, ETA, geom)
    for arr in (xi, t, eta, r, z, h):
        arr.setflags(write=False)
    return MeridianGrid(
        geom=geom,
        n_xi=n_xi,
        n_eta=n_eta,
        stretch=stretch,
        xi=xi,
        t=t,
        eta=eta,
        dxi=float(xi[1] - xi[0]),
        dt=float(t[1] - t[0]),
        r=r,
        z=z,
        h=h,
    )
