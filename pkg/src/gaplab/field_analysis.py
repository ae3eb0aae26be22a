"""Post-processing of solved meridian fields.

A solved field ``w`` represents ``u = Y_k(omega) w(r, z)``.  For mode 0,
``|grad u|^2 = w_r^2 + w_z^2``.  For mode 1 with ``Y_1 = omega_1``::

    |grad u|^2 = omega_1^2 (w_r^2 + w_z^2) + (1 - omega_1^2) (w / r)^2,

so the maximum over sphere directions is ``max(sqrt(w_r^2 + w_z^2), |w| / r)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .geometry import GapGeometry, MeridianGrid, metric_derivatives
from .meridian_pde import ModeSpec

AXIS_REGION_RADIUS = 0.05


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values ``w`` of shape ``grid.shape`` for one angular mode."""

    values: np.ndarray
    mode: ModeSpec
    grid: MeridianGrid

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            if values.size == self.grid.size:
                values = values.reshape(self.grid.shape)
            else:
                raise ConfigurationError(f"field has {values.size} values, grid has {self.grid.size} nodes")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("field contains non-finite values (unsolved?)")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, fn, mode, grid):
        """Sample ``fn(r, z)`` at the grid nodes (used for manufactured fields)."""
        return cls(np.asarray(fn(grid.r, grid.z), dtype=float), mode, grid)


@dataclass(frozen=True, eq=False)
class GradEnvelope:
    """Pointwise maximum over sphere directions of ``|grad u|`` and its ingredients."""

    M: np.ndarray
    w_r: np.ndarray
    w_z: np.ndarray
    w_over_r: np.ndarray | None
    field: Field

    @property
    def meridian_gradsq(self):
        return self.w_r**2 + self.w_z**2


def _computational_derivatives(values, grid):
    w_t, w_xi = np.gradient(values, grid.dt, grid.dxi, edge_order=2)
    return w_xi, w_t


def gradient_components(field: Field):
    """Physical ``(w_r, w_z)`` from second-order differences in ``(xi, t)``.

    ``w_r = (r_xi w_xi + r_eta w_eta) / h^2`` and likewise for ``w_z``, with the
    analytic metric terms of the bispherical map.
    """
    grid = field.grid
    w_xi, w_t = _computational_derivatives(field.values, grid)
    w_eta = w_t / grid.jac[:, None]
    XI, ETA = np.meshgrid(grid.xi, grid.eta)
    r_xi, r_eta, z_xi, z_eta = metric_derivatives(XI, ETA, grid.geom)
    h2 = grid.h**2
    w_r = (r_xi * w_xi + r_eta * w_eta) / h2
    w_z = (z_xi * w_xi + z_eta * w_eta) / h2
    return w_r, w_z


def grad_envelope(field: Field) -> GradEnvelope:
    w_r, w_z = gradient_components(field)
    meridian = np.sqrt(w_r**2 + w_z**2)
    if field.mode.k == 0:
        return GradEnvelope(M=meridian, w_r=w_r, w_z=w_z, w_over_r=None, field=field)
    grid = field.grid
    ratio = np.empty(grid.shape)
    off = grid.r > 0
    ratio[off] = np.abs(field.values[off]) / grid.r[off]
    # w / r -> w_r on the axis
    ratio[~off] = np.abs(w_r[~off])
    return GradEnvelope(M=np.maximum(meridian, ratio), w_r=w_r, w_z=w_z, w_over_r=ratio, field=field)


def _argmax_tiebreak(values, r, z):
    """Index of the maximum; ties broken by smallest ``r`` then smallest ``|z|``."""
    order = np.lexsort((np.abs(z), r, -values))
    return order[0]


def max_in_V(env: GradEnvelope, geom: GapGeometry):
    """Largest envelope value over nodes with ``r^2 + z^2 <= c_gap^2`` and its ``(r, z)``."""
    grid = env.field.grid
    mask = (grid.r**2 + grid.z**2 <= geom.c_gap**2).ravel()
    if np.count_nonzero(mask) < 4:
        raise DomainError("the narrow region V contains fewer than 4 grid nodes; refine the grid or enlarge c_gap")
    r = grid.r.ravel()[mask]
    z = grid.z.ravel()[mask]
    vals = env.M.ravel()[mask]
    best = _argmax_tiebreak(vals, r, z)
    return float(vals[best]), (float(r[best]), float(z[best]))


def max_outside(env: GradEnvelope, radius):
    """Largest envelope value over nodes with ``r^2 + z^2 >= radius^2`` (away from the gap)."""
    grid = env.field.grid
    mask = grid.r**2 + grid.z**2 >= radius**2
    if not mask.any():
        raise DomainError(f"no grid nodes at distance >= {radius} from the origin")
    return float(np.max(env.M[mask]))


def axis_normal_gradient(field: Field, *, radius=AXIS_REGION_RADIUS):
    """``max |w_z|`` over the gap-axis region ``r <= radius, |z| <= c_gap``.

    ``|u_n| = |Y_k| |w_z| <= |w_z|``, so this bounds the derivative in the
    direction joining the centres.
    """
    grid = field.grid
    _, w_z = gradient_components(field)
    mask = (grid.r <= radius) & (np.abs(grid.z) <= grid.geom.c_gap)
    if not mask.any():
        raise DomainError("no grid nodes in the gap-axis region")
    return float(np.max(np.abs(w_z[mask])))


def gradsq_components(field: Field):
    """The two direction-independent pieces of ``|grad u|^2``.

    Returns ``(G, H)`` with ``G = w_r^2 + w_z^2`` and ``H = (w / r)^2`` (None
    for mode 0).  For mode 1, ``|grad u|^2 = omega_1^2 G + (1 - omega_1^2) H``.
    """
    env = grad_envelope(field)
    G = env.meridian_gradsq
    H = None if env.w_over_r is None else env.w_over_r**2
    return G, H


def neumann_defect(field: Field, *, radius=None):
    """Discrete normal derivative on the sphere arcs relative to the gradient there.

    Returns ``max |h^{-1} w_xi| / max |grad w|`` over arc nodes with
    ``r <= radius`` (default ``c_gap``), a measure of how well a field
    satisfies the insulating condition near the gap.
    """
    grid = field.grid
    radius = grid.geom.c_gap if radius is None else radius
    w_xi, _ = _computational_derivatives(field.values, grid)
    w_r, w_z = gradient_components(field)
    cols = [0, -1]
    near = grid.r[:, cols] <= radius
    normal = (np.abs(w_xi[:, cols]) / grid.h[:, cols])[near]
    scale = max(float(np.max(np.hypot(w_r[:, cols], w_z[:, cols])[near])), 1e-300)
    return float(np.max(normal) / scale)


def boundary_normal_derivative_check(field: Field, geom: GapGeometry | None = None, *, floor_rel=1e-3, neumann_tol=0.05):
    """Maximum relative defect of ``d_nu |grad u|^2 = 2 |grad u|^2`` on the upper sphere arc.

    ``nu`` points from the boundary towards the centre of ``B^+``, i.e. along
    increasing ``xi``, with unit speed ``d_nu = h^{-1} d_xi``.  The check is
    made for each direction-independent piece of ``|grad u|^2`` (see
    :func:`gradsq_components`) at arc nodes with ``r <= c_gap``.  The normal
    derivative is the one-sided second-order difference from inside the
    domain.  Where a piece drops below ``floor_rel`` times its maximum on the
    arc the defect is measured against that floor, since the relative error
    of a vanishing gradient carries no information.  Fields that do not
    satisfy the insulating condition are rejected.

    The check differentiates the field twice; solve with a tight tolerance
    (1e-13) when the gradient on the arc is small compared with the data.
    """
    grid = field.grid
    geom = grid.geom if geom is None else geom
    defect = neumann_defect(field)
    if defect > neumann_tol:
        raise DomainError(f"field violates the zero-flux sphere condition (relative defect {defect:.3g})")
    G, H = gradsq_components(field)
    on_arc = grid.r[:, -1] <= geom.c_gap
    pieces = [(G, on_arc)]
    if H is not None:
        # the axis value of H is the limit w_r^2, not a sample of (w/r)^2
        pieces.append((H, on_arc & (grid.r[:, -1] > 0)))
    h_arc = grid.h[:, -1]
    worst = 0.0
    for piece, keep in pieces:
        arc = piece[:, -1]
        floor = floor_rel * max(float(np.max(arc[keep])), 1e-300)
        dnu = (3.0 * arc - 4.0 * piece[:, -2] + piece[:, -3]) / (2.0 * grid.dxi) / h_arc
        rel = np.abs(dnu - 2.0 * arc) / np.maximum(arc, floor)
        worst = max(worst, float(np.max(rel[keep])))
    return worst
