"""Property oracles for the self-contained inequalities behind the estimates.

Nothing here solves a PDE; each oracle checks an algebraic or elementary
analytic fact by direct evaluation, dense scans or random sampling.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_count, check_open_interval, check_positive
from .errors import ConfigurationError, DomainError
from .estimates import gamma_star
from .geometry import GapGeometry

logger = logging.getLogger(__name__)

DEFAULT_SCAN_DENSITY = 200
DEFAULT_SAMPLES = 100_000
DEFAULT_SEED = 20240917
SCAN_B_VALUES = (0.01, 0.1, 0.5)
SCAN_GAMMAS = (0.1, 0.5, 0.9)


@dataclass(frozen=True)
class OracleReport:
    """Outcome of one oracle: a verdict, a one-line summary and the numbers behind it."""

    name: str
    passed: bool
    summary: str
    data: dict = field(default_factory=dict)

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.summary}"


@dataclass(frozen=True, eq=False)
class TraceFreeSymmetricMatrix:
    """Symmetric ``n x n`` matrix with zero trace, e.g. the Hessian of a harmonic function."""

    entries: np.ndarray

    def __post_init__(self):
        h = np.array(self.entries, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {h.shape}")
        if not np.array_equal(h, h.T):
            raise DomainError("matrix is not symmetric")
        norm = float(np.linalg.norm(h))
        if abs(np.trace(h)) > 1e-12 * max(norm, 1.0):
            raise DomainError(f"trace {np.trace(h):.3e} is not zero")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    @property
    def n(self):
        return self.entries.shape[0]

    @classmethod
    def random(cls, n, rng=None):
        return cls(random_trace_free(n, 1, rng)[0])


def random_trace_free(n, size, rng=None):
    """``size`` random trace-free symmetric matrices, shape ``(size, n, n)``.

    A matrix with entries uniform in ``[-1, 1]`` is symmetrised and
    ``trace / n`` is removed from the diagonal.
    """
    n = check_count(n, "n", 1)
    size = check_count(size, "size", 1)
    rng = np.random.default_rng(rng)
    m = rng.uniform(-1.0, 1.0, size=(size, n, n))
    h = 0.5 * (m + np.swapaxes(m, 1, 2))
    tr = np.trace(h, axis1=1, axis2=2) / n
    h -= tr[:, None, None] * np.eye(n)
    return h


def hessian_row_inequality(H):
    """``(sum_j H_1j^2, (n-1)/n sum_ij H_ij^2)``; the first never exceeds the second.

    Accepts a :class:`TraceFreeSymmetricMatrix`, a square array, or a stack
    of square arrays (then both sides are arrays).
    """
    h = H.entries if isinstance(H, TraceFreeSymmetricMatrix) else np.asarray(H, dtype=float)
    if h.ndim < 2 or h.shape[-1] != h.shape[-2]:
        raise DomainError(f"expected square matrices, got shape {h.shape}")
    n = h.shape[-1]
    lhs = np.sum(h[..., 0, :] ** 2, axis=-1)
    rhs = (n - 1.0) / n * np.sum(h**2, axis=(-2, -1))
    if lhs.ndim == 0:
        return float(lhs), float(rhs)
    return lhs, rhs


def hessian_row_scan(n_values=range(2, 9), samples=DEFAULT_SAMPLES, seed=DEFAULT_SEED):
    """Random-sampling oracle for :func:`hessian_row_inequality`.

    A violation is ``lhs > rhs (1 + 1e-12)``.  The largest observed
    ``lhs / rhs`` is reported per dimension.
    """
    samples = check_count(samples, "samples", 1)
    logger.info("hessian row scan: seed=%d samples=%d", seed, samples)
    rng = np.random.default_rng(seed)
    worst = {}
    violations = 0
    for n in n_values:
        lhs, rhs = hessian_row_inequality(random_trace_free(n, samples, rng))
        violations += int(np.count_nonzero(lhs > rhs * (1.0 + 1e-12)))
        worst[int(n)] = float(np.max(lhs / rhs))
    passed = violations == 0
    summary = f"{violations} violations in {samples} matrices per n; max lhs/rhs {max(worst.values()):.6f} (seed {seed})"
    return OracleReport("hessian-row", passed, summary, {"violations": violations, "max_ratio": worst, "seed": seed})


def elementary_inequality_check(y, eps, b, gamma):
    """Both sides of the elementary inequality used for the boundary term.

    ``lhs = (b (eps + y/2)^2 + y^2)^(-gamma/2) (eps + y/2)`` and
    ``rhs = (1/2) (1 + b/4)^(-gamma/2) y^(1 - gamma)``, with ``lhs >= rhs``
    and equality at ``eps = 0``.  By convention ``y = eps = 0`` gives
    ``(0, 0)``.  Array arguments broadcast.
    """
    b = check_positive(b, "b")
    gamma = check_open_interval(gamma, "gamma", 0.0, 1.0)
    y = np.asarray(y, dtype=float)
    eps = np.asarray(eps, dtype=float)
    if np.any(y < 0.0) or np.any(eps < 0.0):
        raise DomainError("y and eps must be nonnegative")
    y, eps = np.broadcast_arrays(y, eps)
    s = eps + 0.5 * y
    # hypot avoids underflow of b s^2 + y^2 for tiny y
    norm = np.hypot(math.sqrt(b) * s, y)
    zero = norm == 0.0
    lhs = np.where(zero, 0.0, np.power(np.where(zero, 1.0, norm), -gamma) * s)
    rhs = 0.5 * (1.0 + 0.25 * b) ** (-0.5 * gamma) * np.power(y, 1.0 - gamma)
    if lhs.ndim == 0:
        return float(lhs), float(rhs)
    return lhs, rhs


def elementary_inequality_scan(density=DEFAULT_SCAN_DENSITY, b_values=SCAN_B_VALUES, gammas=SCAN_GAMMAS):
    """Dense scan of the elementary inequality on ``y in (0, 1], eps in [0, 1]``.

    Checks ``lhs >= rhs``, equality at ``eps = 0`` (relative 1e-12) and that
    ``lhs`` is nondecreasing in ``eps`` along each grid line.
    """
    density = check_count(density, "density", 2)
    y = np.linspace(1.0 / density, 1.0, density)
    eps = np.linspace(0.0, 1.0, density)
    Y, E = np.meshgrid(y, eps, indexing="ij")
    violations = 0
    monotone_violations = 0
    equality_defect = 0.0
    min_margin = np.inf
    for b in b_values:
        for g in gammas:
            lhs, rhs = elementary_inequality_check(Y, E, b, g)
            violations += int(np.count_nonzero(lhs < rhs * (1.0 - 1e-12)))
            equality_defect = max(equality_defect, float(np.max(np.abs(lhs[:, 0] - rhs[:, 0]) / rhs[:, 0])))
            margin = (lhs[:, 1:] - rhs[:, 1:]) / rhs[:, 1:]
            min_margin = min(min_margin, float(np.min(margin)))
            steps = np.diff(lhs, axis=1)
            monotone_violations += int(np.count_nonzero(steps < -1e-12 * lhs[:, 1:]))
    passed = violations == 0 and monotone_violations == 0 and equality_defect <= 1e-12
    summary = (
        f"{violations} violations, {monotone_violations} monotonicity violations, "
        f"equality defect at eps=0 {equality_defect:.1e} ({density}x{density} points per (b, gamma))"
    )
    data = {
        "violations": violations,
        "monotone_violations": monotone_violations,
        "equality_defect": equality_defect,
        "min_relative_margin_eps_positive": min_margin,
        "density": density,
    }
    return OracleReport("elementary-inequality", passed, summary, data)


def gap_profile_defect(r):
    """``|f(r) - (eps + r^2/2)| / r^3`` for the sphere profile ``f(r) = 1 + eps - sqrt(1 - r^2)``.

    ``eps`` cancels exactly.  Evaluated as ``r / (2 (1 + sqrt(1 - r^2))^2)``,
    the same quantity without cancellation; requires ``0 < r < 1``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r >= 1.0) or np.any(r <= 0.0):
        raise DomainError("r must lie in (0, 1)")
    q = np.sqrt(1.0 - r * r)
    out = r / (2.0 * (1.0 + q) ** 2)
    return float(out) if out.ndim == 0 else out


def gap_profile(r, eps):
    """Height ``1 + eps - sqrt(1 - r^2)`` of the upper sphere above the midplane."""
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) >= 1.0):
        raise DomainError("the sphere profile needs |r| < 1")
    out = eps + r * r / (1.0 + np.sqrt(1.0 - r * r))
    return float(out) if out.ndim == 0 else out


def gap_expansion_check(geom: GapGeometry, density=DEFAULT_SCAN_DENSITY):
    """Largest observed constant in ``f(r) = eps + r^2/2 + O(r^3)`` over ``r in (0, c_gap]``."""
    density = check_count(density, "density", 2)
    if not geom.c_gap < 1.0:
        raise DomainError("c_gap must be below 1")
    r = np.linspace(geom.c_gap / density, geom.c_gap, density)
    return float(np.max(gap_profile_defect(r)))


def gamma_star_properties(n_max=200):
    """Presence, range, strict monotonicity and the root property of ``gamma_star`` on ``4..n_max``."""
    n_max = check_count(n_max, "n_max", 5)
    ns = np.arange(4, n_max + 1)
    values = []
    for n in ns:
        g = gamma_star(int(n))
        if g is None:
            raise ConfigurationError(f"gamma_star({n}) unexpectedly absent")
        values.append(g)
    values = np.array(values)
    absent_low = [n for n in (2, 3) if gamma_star(n) is None]
    in_range = bool(np.all((values > 0.0) & (values < 1.0)))
    increasing = bool(np.all(np.diff(values) > 0.0))
    lead = ns - 2.0
    lin = ns**2 - 4.0 * ns + 5.0
    const = ns**2 - 5.0 * ns + 5.0
    residual = float(np.max(np.abs(lead * values**2 + lin * values - const) / const))
    passed = in_range and increasing and absent_low == [2, 3] and residual <= 1e-12
    summary = (
        f"n=4..{n_max}: in (0,1) {in_range}, increasing {increasing}, "
        f"gamma*({n_max}) = {values[-1]:.4f}; none for n=2,3: {absent_low == [2, 3]}; "
        f"relative root residual {residual:.1e}"
    )
    data = {
        "values": dict(zip(ns.tolist(), values.tolist())),
        "in_range": in_range,
        "increasing": increasing,
        "absent_for": absent_low,
        "max_relative_root_residual": residual,
    }
    return OracleReport("gamma-star", passed, summary, data)


def run_lemma_suite(*, samples=DEFAULT_SAMPLES, density=DEFAULT_SCAN_DENSITY, seed=DEFAULT_SEED):
    """All standalone oracles, in a fixed order."""
    from .geometry import geometry_from_eps

    defect = gap_expansion_check(geometry_from_eps(1e-2), density)
    return [
        hessian_row_scan(samples=samples, seed=seed),
        elementary_inequality_scan(density),
        OracleReport(
            "gap-expansion",
            defect <= 1.0,
            f"max |f - (eps + r^2/2)| / r^3 on (0, 0.3] is {defect:.4f} (contract <= 1)",
            {"max_defect": defect},
        ),
        gamma_star_properties(),
    ]
