"""Closed-form exponents, the constant recipe, and the auxiliary quantities evaluated on solved fields.

Notation: ``gamma`` is the improvement over the ``(eps + r^2)^(-1/2)`` gradient
bound; the gradient bound reads ``|grad u| <= C (eps + r^2)^(-(1 - gamma)/2)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_dimension, check_open_interval, check_positive
from .errors import DomainError
from .field_analysis import Field, GradEnvelope, gradsq_components, grad_envelope
from .geometry import GapGeometry

DEFAULT_DELTA = 1e-3
B_MARGIN = 0.99
SHELL_SPACINGS = 2.0
A_TERM_FRACTION = 0.25


class ResolutionWarning(UserWarning):
    """An argmax landed where the grid cannot resolve the neighbourhood."""


class ParameterWarning(UserWarning):
    """A constant lies outside the range required by the maximum-principle argument."""


def _quadratic_coefficients(n):
    """``(n - 2, n^2 - 4n + 5, n^2 - 5n + 5)`` for ``lead g^2 + lin g - const = 0``."""
    return n - 2.0, n * n - 4.0 * n + 5.0, n * n - 5.0 * n + 5.0


def gamma_star(n):
    """Positive root of ``(n-2) g^2 + (n^2-4n+5) g - (n^2-5n+5) = 0``, or None.

    The root is evaluated as ``2 C / (B + sqrt(B^2 + 4 (n-2) C))``, which has
    no cancellation for large ``n``.  Dimensions 2 and 3 have no positive root.
    """
    n = check_dimension(n)
    lead, lin, const = _quadratic_coefficients(float(n))
    if lead == 0.0:
        root = const / lin
        return root if root > 0.0 else None
    if const <= 0.0:
        # product of the roots is -const/lead >= 0 and their sum is negative
        return None
    return 2.0 * const / (lin + math.sqrt(lin * lin + 4.0 * lead * const))


def gamma_star_closed_form(n):
    """Exact expression for ``gamma_star(n)`` as text, e.g. ``(sqrt(33) - 5)/4``."""
    n = check_dimension(n)
    if not isinstance(n, int) or gamma_star(n) is None:
        return None
    lead, lin, const = (int(v) for v in _quadratic_coefficients(n))
    disc = lin * lin + 4 * lead * const
    square, free = 1, disc
    f = 2
    while f * f <= free:
        while free % (f * f) == 0:
            free //= f * f
            square *= f
        f += 1
    denom = 2 * lead
    g = math.gcd(math.gcd(square, lin), denom)
    square, lin, denom = square // g, lin // g, denom // g
    root = f"sqrt({free})" if square == 1 else f"{square}*sqrt({free})"
    if free == 1:
        return f"{(square - lin)}/{denom}" if denom != 1 else f"{square - lin}"
    return f"({root} - {lin})/{denom}" if denom != 1 else f"{root} - {lin}"


def rho(n, gamma):
    """``-(n-2) g^2 - (n^2-4n+5) g + (n^2-5n+5)``; positive exactly for ``0 <= g < gamma_star``."""
    lead, lin, const = _quadratic_coefficients(float(n))
    gamma = np.asarray(gamma, dtype=float)
    out = -lead * gamma**2 - lin * gamma + const
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EstimateParams:
    n: float
    gamma: float
    b: float
    A: float
    rho: float
    delta: float = DEFAULT_DELTA
    sigma: float = 0.0

    def check_sigma(self, eps):
        """Regularisation must satisfy ``sigma^(1 - gamma) < eps^3`` when positive."""
        if self.sigma < 0.0:
            raise DomainError("sigma must be nonnegative")
        if self.sigma > 0.0 and not self.sigma ** (1.0 - self.gamma) < eps**3:
            raise DomainError(
                f"sigma={self.sigma:g} violates sigma^(1-gamma) < eps^3 for eps={eps:g}"
            )

    def sandwich(self):
        """The three members of the constant inequality ``low < A b (2 - g) < high``."""
        g = self.gamma
        low = 4.0 * g * (1.0 + self.b / 4.0) ** (g / 2.0)
        mid = self.A * self.b * (2.0 - g)
        high = 4.0 * g + 2.0 * self.rho / (self.n - 1.0)
        return low, mid, high


def choose_constants(n, gamma, *, delta=DEFAULT_DELTA, sigma=0.0, max_halvings=1100):
    """Pick ``b`` from ``1/2, 1/4, ...`` and set ``A = (4g + rho/(n-1)) / (b (2-g))``.

    ``b`` is the first value with ``4 g (1 + b/4)^(g/2) < 4 g + 0.99 rho/(n-1)``;
    the margin sits on the ``rho`` excess so that the choice succeeds for every
    ``gamma < gamma_star``.
    """
    n = check_dimension(n)
    gamma = check_open_interval(gamma, "gamma", 0.0, 1.0)
    delta = check_positive(delta, "delta")
    sigma = check_positive(sigma, "sigma", allow_zero=True)
    r = rho(n, gamma)
    if not r > 0.0:
        gs = gamma_star(n)
        limit = "no admissible gamma exists" if gs is None else f"need gamma < gamma_star = {gs:.6f}"
        raise DomainError(f"rho(n={n}, gamma={gamma}) = {r:.3e} <= 0; {limit}")
    target = 4.0 * gamma + r / (n - 1.0)
    bound = 4.0 * gamma + B_MARGIN * r / (n - 1.0)
    b = 0.5
    for _ in range(max_halvings):
        if 4.0 * gamma * (1.0 + b / 4.0) ** (gamma / 2.0) < bound:
            break
        b *= 0.5
    else:
        raise DomainError(f"no admissible b found for n={n}, gamma={gamma} (rho={r:.3e})")
    A = target / (b * (2.0 - gamma))
    params = EstimateParams(n=n, gamma=gamma, b=b, A=A, rho=r, delta=delta, sigma=sigma)
    low, mid, high = params.sandwich()
    if not (low < mid < high):
        raise DomainError(f"constant inequality failed in floating point: {low!r} < {mid!r} < {high!r}")
    return params


def q_admissible_radius(params: EstimateParams, c_gap=0.3, *, fraction=A_TERM_FRACTION):
    """Largest ``c <= c_gap`` on which the ``A`` term of ``Q`` stays a perturbation.

    On the midplane the bracket of ``Q`` is ``r^(2-2g) - A r^(4-2g)`` (plus a
    constant).  The radial growth of the ``A`` term is at most ``fraction``
    of that of the leading term when ``c^2 <= fraction (1-g) / (A (2-g))``.
    The maximum-principle argument for ``Q`` works on balls small enough for
    this to hold.
    """
    check_open_interval(fraction, "fraction", 0.0, 1.0)
    g = params.gamma
    c = math.sqrt(fraction * (1.0 - g) / (params.A * (2.0 - g)))
    return min(float(c_gap), c)


def q_coefficient(r, z, eps, params: EstimateParams):
    """The bracket multiplying ``|grad u|^2`` in ``Q``."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    g, s = params.gamma, params.sigma
    out = (
        (r**2 + s) ** (1.0 - g)
        + eps ** (1.0 - g * (1.0 - params.delta))
        - params.A * (params.b * z**2 + r**4 + s) ** (1.0 - g / 2.0)
    )
    return float(out) if out.ndim == 0 else out


def q_value(r, z, eps, params: EstimateParams, gradsq):
    """``Q = ((r^2+s)^(1-g) + eps^(1-g(1-d)) - A (b z^2 + r^4 + s)^(1-g/2)) |grad u|^2``."""
    gradsq = np.asarray(gradsq, dtype=float)
    if np.any(gradsq < 0.0):
        raise DomainError("gradsq must be nonnegative")
    out = q_coefficient(r, z, eps, params) * gradsq
    return float(out) if np.ndim(out) == 0 else out


def bly_coefficient(r, z, eps):
    return np.asarray(r, dtype=float) ** 2 + eps - 2.0 * np.asarray(z, dtype=float) ** 2


def q_bly(r, z, eps, A, u, gradsq, *, n=None):
    """``(r^2 + eps - 2 z^2) |grad u|^2 + A u^2``.

    When ``n`` is given and ``A <= 15 - n`` a :class:`ParameterWarning` is issued.
    """
    if n is not None and not A > 15 - n:
        warnings.warn(f"A={A} does not exceed 15 - n = {15 - n}", ParameterWarning, stacklevel=2)
    out = bly_coefficient(r, z, eps) * np.asarray(gradsq, dtype=float) + A * np.asarray(u, dtype=float) ** 2
    return float(out) if np.ndim(out) == 0 else out


def default_bly_constant(n):
    return max(16.0 - float(n), 1.0)


def bound_ratio_LY(env: GradEnvelope, eps=None, gamma=0.0):
    """``max over V of (eps + r^2)^((1-g)/2) M``; ``gamma = 0`` gives the classical ratio."""
    grid = env.field.grid
    eps = grid.geom.eps if eps is None else eps
    mask = grid.in_V()
    weight = (eps + grid.r[mask] ** 2) ** ((1.0 - gamma) / 2.0)
    return float(np.max(weight * env.M[mask]))


@dataclass(frozen=True)
class ArgmaxResult:
    location: tuple
    on_outer_shell: bool
    value: float
    shell_tol: float
    radius: float


def _local_spacing(grid, j, i):
    jac = grid.jac[j]
    return float(grid.h[j, i] * max(grid.dxi, jac * grid.dt))


def _argmax_on_V(values, grid, geom):
    mask = grid.r**2 + grid.z**2 <= geom.c_gap**2
    if np.count_nonzero(mask) < 4:
        raise DomainError("the narrow region V contains fewer than 4 grid nodes")
    masked = np.where(mask, values, -np.inf)
    flat = int(np.argmax(masked))
    j, i = np.unravel_index(flat, grid.shape)
    radius = math.hypot(grid.r[j, i], grid.z[j, i])
    tol = SHELL_SPACINGS * _local_spacing(grid, j, i)
    on_shell = radius >= geom.c_gap - tol
    neighbours = 0
    for dj, di in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        jj, ii = j + dj, i + di
        if 0 <= jj < grid.n_eta and 0 <= ii < grid.n_xi and mask[jj, ii]:
            neighbours += 1
    if neighbours < 4 and not on_shell:
        warnings.warn(
            f"argmax at (r, z) = ({grid.r[j, i]:.3g}, {grid.z[j, i]:.3g}) has only {neighbours} neighbours in V",
            ResolutionWarning,
            stacklevel=3,
        )
    return ArgmaxResult(
        location=(float(grid.r[j, i]), float(grid.z[j, i])),
        on_outer_shell=bool(on_shell),
        value=float(values[j, i]),
        shell_tol=tol,
        radius=radius,
    )


def q_argmax_location(field: Field, params: EstimateParams, geom: GapGeometry | None = None):
    """Where ``Q`` (with the direction-maximised ``|grad u|^2``) peaks on ``V``.

    ``on_outer_shell`` is true when the argmax lies within two local grid
    spacings of the sphere ``|x| = c_gap``.
    """
    geom = field.grid.geom if geom is None else geom
    params.check_sigma(geom.eps)
    gs = gamma_star(params.n)
    if gs is None or not params.gamma < gs:
        raise DomainError(f"Q is only defined for n >= 4 and gamma < gamma_star (n={params.n})")
    grid = field.grid
    env = grad_envelope(field)
    q = q_value(grid.r, grid.z, geom.eps, params, env.M**2)
    return _argmax_on_V(q, grid, geom)


def q_bly_field(field: Field, A=None):
    """``Q_BLY`` maximised over sphere directions at every node.

    For mode 1, ``u = omega_1 w`` and ``Q_BLY`` is affine in ``omega_1^2``, so the
    maximum is ``max(c G + A w^2, c H)`` with ``G``, ``H`` from
    :func:`~gaplab.field_analysis.gradsq_components`.
    """
    grid = field.grid
    n = field.mode.n
    A = default_bly_constant(n) if A is None else A
    if not A > 15 - n:
        warnings.warn(f"A={A} does not exceed 15 - n = {15 - n}", ParameterWarning, stacklevel=2)
    coeff = bly_coefficient(grid.r, grid.z, grid.geom.eps)
    G, H = gradsq_components(field)
    along = coeff * G + A * field.values**2
    if H is None:
        return along
    return np.maximum(along, coeff * H)


def q_bly_argmax_location(field: Field, A=None, geom: GapGeometry | None = None):
    geom = field.grid.geom if geom is None else geom
    return _argmax_on_V(q_bly_field(field, A), field.grid, geom)


def main_inequality_constant(field: Field, params: EstimateParams, geom: GapGeometry | None = None):
    """``max over V of ((r^2 + s)^(1-g) + eps^(1-g(1-d))) |grad u|^2``, the quantity bounded uniformly in eps.

    ``V`` is taken with the radius of ``geom`` (default: the field's geometry).
    """
    grid = field.grid
    geom = grid.geom if geom is None else geom
    env = grad_envelope(field)
    mask = grid.r**2 + grid.z**2 <= geom.c_gap**2
    g = params.gamma
    weight = (grid.r[mask] ** 2 + params.sigma) ** (1.0 - g) + geom.eps ** (1.0 - g * (1.0 - params.delta))
    return float(np.max(weight * env.M[mask] ** 2))
