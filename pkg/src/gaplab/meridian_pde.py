"""Finite-volume assembly of the meridian equation.

For data of the form ``u = Y_k(omega) w(r, z)`` with ``Y_k`` a spherical
harmonic of degree ``k`` on ``S^{n-2}``, ``Delta u = 0`` is equivalent to::

    d_r(r^{n-2} w_r) + d_z(r^{n-2} w_z) - lambda_k r^{n-4} w = 0,
    lambda_k = k (k + n - 3).

In the stretched bispherical coordinates ``(xi, t)`` of
:class:`~gaplab.geometry.MeridianGrid` (with ``J = d eta / d t``) this reads::

    d_xi(c J w_xi) + d_t(c / J w_t) - lambda_k r^{n-4} h^2 J w = 0,  c = r^{n-2}.

It is discretised on the vertex-centred dual cells with a five-point flux
stencil.  The assembled matrix ``K`` is the *negative* of that operator, so it
is symmetric positive semidefinite; Dirichlet rows are eliminated to give an
SPD reduced system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._validation import check_dimension
from .errors import ConfigurationError, DomainError
from .geometry import MeridianGrid, deta_dt, eta_of_t

INTERIOR, NEUMANN_SPHERE, DIRICHLET_OUTER, AXIS = 0, 1, 2, 3
BC_NAMES = {INTERIOR: "interior", NEUMANN_SPHERE: "neumann_sphere", DIRICHLET_OUTER: "dirichlet_outer", AXIS: "axis"}

PHI_CHOICES = {"linear_axis": 0, "linear_transverse": 1}


@dataclass(frozen=True)
class ModeSpec:
    """Dimension ``n`` and angular mode ``k`` of the separated solution."""

    n: float
    k: int

    def __post_init__(self):
        object.__setattr__(self, "n", check_dimension(self.n))
        if self.k not in (0, 1) or isinstance(self.k, bool):
            raise ConfigurationError(f"angular mode k must be 0 or 1, got {self.k!r}")

    @property
    def lambda_k(self):
        return self.k * (self.k + self.n - 3)


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Reduced SPD system ``matrix @ x = rhs`` plus the bookkeeping to undo the reduction.

    ``full_matrix`` acts on all grid nodes; ``dof_map[m]`` is the flat node
    index of unknown ``m``.  ``cell_area`` holds the dual-cell areas in the
    computational ``(xi, t)`` plane, used to turn row residuals into
    pointwise truncation errors.
    """

    grid: MeridianGrid
    mode: ModeSpec
    matrix: sp.csr_matrix
    rhs: np.ndarray
    full_matrix: sp.csr_matrix
    dof_map: np.ndarray
    dirichlet_nodes: np.ndarray
    dirichlet_values: np.ndarray
    bc_tags: np.ndarray
    cell_area: np.ndarray

    @property
    def n_unknowns(self):
        return self.dof_map.size

    def expand(self, x):
        """Scatter reduced unknowns and Dirichlet values into a full nodal array."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_unknowns,):
            raise ConfigurationError(f"expected {self.n_unknowns} unknowns, got shape {x.shape}")
        full = np.empty(self.grid.size)
        full[self.dof_map] = x
        full[self.dirichlet_nodes] = self.dirichlet_values
        return full.reshape(self.grid.shape)

    def restrict(self, w):
        """Unknown values of a full nodal field."""
        w = np.asarray(w, dtype=float).reshape(-1)
        if w.size != self.grid.size:
            raise ConfigurationError(f"expected {self.grid.size} nodal values, got {w.size}")
        return w[self.dof_map]


def dirichlet_mode_data(mode: ModeSpec, choice):
    """Meridian trace ``w(r, z)`` of a linear boundary function.

    ``linear_axis`` is ``phi = x_n`` (mode 0, ``w = z``); ``linear_transverse``
    is ``phi = x_1`` (mode 1, ``w = r``).
    """
    if choice not in PHI_CHOICES:
        raise ConfigurationError(f"unknown boundary data {choice!r}; choose from {sorted(PHI_CHOICES)}")
    if PHI_CHOICES[choice] != mode.k:
        raise ConfigurationError(f"boundary data {choice!r} does not belong to mode k={mode.k}")
    if choice == "linear_axis":
        return lambda r, z: np.asarray(z, dtype=float)
    return lambda r, z: np.asarray(r, dtype=float)


def _power(r, p):
    # 0 ** 0 == 1 keeps n = 2 regular on the axis
    with np.errstate(divide="ignore"):
        return np.power(r, p)


def bc_tags(grid: MeridianGrid, mode: ModeSpec):
    tags = np.full(grid.shape, INTERIOR, dtype=np.int8)
    tags[:, 0] = NEUMANN_SPHERE
    tags[:, -1] = NEUMANN_SPHERE
    tags[-1, :] = AXIS
    tags[0, :] = DIRICHLET_OUTER
    return tags


def _edge_weights(grid: MeridianGrid, mode: ModeSpec):
    """Symmetric edge weights for xi-edges ``(n_eta, n_xi-1)`` and t-edges ``(n_eta-1, n_xi)``."""
    p = mode.n - 2
    coef = _power(grid.r, p)
    jac = deta_dt(grid.eta, grid.stretch)

    dual_t = np.full(grid.n_eta, grid.dt)
    dual_t[[0, -1]] *= 0.5
    dual_xi = np.full(grid.n_xi, grid.dxi)
    dual_xi[[0, -1]] *= 0.5

    c_x = np.sqrt(coef[:, :-1] * coef[:, 1:])
    # the axis row has r = 0 at every edge midpoint
    c_x[-1, :] = _power(0.0, p)
    w_x = c_x * (jac * dual_t)[:, None] / grid.dxi

    c_t = np.sqrt(coef[:-1, :] * coef[1:, :])
    t_mid = 0.5 * (grid.t[:-1] + grid.t[1:])
    eta_mid = eta_of_t(t_mid, grid.geom.eta_min, grid.stretch)
    xi = grid.xi
    d_last = np.cosh(xi) - np.cos(eta_mid[-1])
    r_axis_mid = grid.geom.a * np.sin(eta_mid[-1]) / d_last
    c_t[-1, :] = _power(r_axis_mid, p)
    jac_mid = deta_dt(eta_mid, grid.stretch)
    w_t = c_t * dual_xi[None, :] / (grid.dt * jac_mid[:, None])

    area = dual_t[:, None] * dual_xi[None, :]
    reaction = np.zeros(grid.shape)
    lam = mode.lambda_k
    if lam != 0:
        off_axis = grid.r > 0
        reaction[off_axis] = (
            lam * _power(grid.r[off_axis], mode.n - 4) * grid.h[off_axis] ** 2
            * np.broadcast_to(jac[:, None], grid.shape)[off_axis] * area[off_axis]
        )
    return w_x, w_t, reaction, area


def full_operator(grid: MeridianGrid, mode: ModeSpec):
    """Symmetric positive semidefinite operator on all nodes, and the dual-cell areas."""
    w_x, w_t, reaction, area = _edge_weights(grid, mode)
    idx = np.arange(grid.size).reshape(grid.shape)
    rows = [idx[:, :-1].ravel(), idx[:-1, :].ravel()]
    cols = [idx[:, 1:].ravel(), idx[1:, :].ravel()]
    vals = [w_x.ravel(), w_t.ravel()]
    i = np.concatenate(rows)
    j = np.concatenate(cols)
    v = np.concatenate(vals)
    diag = reaction.ravel().copy()
    np.add.at(diag, i, v)
    np.add.at(diag, j, v)
    mat = sp.coo_matrix(
        (np.concatenate([-v, -v, diag]), (np.concatenate([i, j, idx.ravel()]), np.concatenate([j, i, idx.ravel()]))),
        shape=(grid.size, grid.size),
    ).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat, area


def assemble(grid: MeridianGrid, mode: ModeSpec, outer_data) -> DiscreteSystem:
    """Assemble the reduced system for one mode.

    Sphere arcs ``xi = +-xi0`` are zero-flux faces.  The outer arc carries
    ``w = outer_data(r, z)``.  On the axis ``eta = pi`` the mode-0 field has
    zero flux (regularity) and the mode-1 field vanishes.
    """
    if not isinstance(grid, MeridianGrid):
        raise ConfigurationError("grid must be a MeridianGrid")
    if not isinstance(mode, ModeSpec):
        raise ConfigurationError("mode must be a ModeSpec")
    tags = bc_tags(grid, mode)
    full, area = full_operator(grid, mode)

    dirichlet = np.zeros(grid.shape, dtype=bool)
    dirichlet[0, :] = True
    if mode.k == 1:
        dirichlet[-1, :] = True
    values = np.zeros(grid.shape)
    outer = np.asarray(outer_data(grid.r[0, :], grid.z[0, :]), dtype=float)
    if outer.shape != (grid.n_xi,) or not np.all(np.isfinite(outer)):
        raise DomainError("outer_data must return finite values on every outer-arc node")
    values[0, :] = outer

    flat_dir = np.flatnonzero(dirichlet.ravel())
    dof_map = np.flatnonzero(~dirichlet.ravel())
    dir_values = values.ravel()[flat_dir]
    matrix = full[dof_map][:, dof_map].tocsr()
    matrix.sort_indices()
    rhs = -(full[dof_map][:, flat_dir] @ dir_values)
    for arr in (dof_map, flat_dir, dir_values, rhs, tags, area):
        arr.setflags(write=False)
    return DiscreteSystem(
        grid=grid,
        mode=mode,
        matrix=matrix,
        rhs=rhs,
        full_matrix=full,
        dof_map=dof_map,
        dirichlet_nodes=flat_dir,
        dirichlet_values=dir_values,
        bc_tags=tags,
        cell_area=area,
    )


def apply_operator(system: DiscreteSystem, w):
    """``matrix @ w`` on the reduced unknowns."""
    w = np.asarray(w, dtype=float)
    if w.shape != (system.n_unknowns,):
        raise ConfigurationError(f"expected vector of length {system.n_unknowns}, got shape {w.shape}")
    return system.matrix @ w


def interior_residual(system: DiscreteSystem, w_full):
    """Pointwise truncation error of a nodal field on strictly interior nodes.

    Returns ``(K w) / cell_area`` as a ``(n_eta, n_xi)`` array with NaN on
    boundary nodes (sphere arcs, axis, outer arc).
    """
    w_full = np.asarray(w_full, dtype=float).reshape(-1)
    if w_full.size != system.grid.size:
        raise ConfigurationError("field size does not match the grid")
    res = (system.full_matrix @ w_full).reshape(system.grid.shape) / system.cell_area
    out = np.full(system.grid.shape, np.nan)
    out[1:-1, 1:-1] = res[1:-1, 1:-1]
    return out
