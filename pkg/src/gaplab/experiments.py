"""Gap sweeps, exponent fits, refinement studies and the verification campaigns.

A sweep solves the same boundary-value problem for a decreasing sequence of
gap widths and fits ``M_max ~ eps^(-beta)``.  Sweep output is a CSV with
one row per gap width plus a JSON sidecar; the CSV is byte-for-byte
reproducible, the sidecar differs between runs only in ``timestamp``.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy import stats

from ._validation import check_count, check_eps_array, check_positive
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    IndefiniteMatrixError,
    SweepFailure,
)
from .estimates import (
    bound_ratio_LY,
    choose_constants,
    gamma_star,
    main_inequality_constant,
    q_admissible_radius,
    q_argmax_location,
    q_bly_argmax_location,
    rho,
)
from .field_analysis import axis_normal_gradient, grad_envelope, max_in_V, max_outside
from .geometry import DEFAULT_C_GAP, DEFAULT_OUTER_RADIUS, build_grid, geometry_from_eps
from .linsolve import DEFAULT_TOLERANCE, solve
from .meridian_pde import ModeSpec, assemble, dirichlet_mode_data, interior_residual

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "eps",
    "M_max",
    "r_at_max",
    "z_at_max",
    "axis_grad",
    "ratio_gamma0",
    "ratio_gamma_ref",
    "iters",
    "residual",
    "n_xi",
    "n_eta",
)
DEFAULT_EPS_LIST = tuple(float(e) for e in np.geomspace(1e-2, 1e-5, 7))
DEFAULT_N_XI = 33
FIT_POINTS = 5
JOBS_ENV = "GAPLAB_JOBS"


def _version():
    from . import __version__

    return __version__


def default_n_eta(eps):
    """Node count along eta: ``max(128, round(128 log10(1/eps))) + 1``.

    With the stretched eta coordinate this keeps the computational spacing
    roughly fixed while the gap region grows in ``t``.
    """
    eps = check_positive(eps, "eps")
    return max(128, round(128.0 * math.log10(1.0 / eps))) + 1


def phi_for_mode(k):
    """Linear boundary data belonging to mode ``k``: ``x_n`` for 0, ``x_1`` for 1."""
    return "linear_transverse" if k == 1 else "linear_axis"


def reference_gamma(n):
    """The improvement exponent a sweep compares against.

    ``gamma_star(n)`` for ``n >= 4``; ``sqrt(2) - 1`` for ``n = 3`` (the
    rate ``eps^((sqrt(2)-2)/2)``); ``0`` for ``n = 2`` (rate ``eps^(-1/2)``).
    """
    g = gamma_star(n)
    if g is not None:
        return g
    if n == 3:
        return math.sqrt(2.0) - 1.0
    return 0.0


def rate_bound(n):
    """``(1 - gamma_ref) / 2``: the exponent of the known upper bound (sharp for n = 2, 3)."""
    return (1.0 - reference_gamma(n)) / 2.0


@dataclass(frozen=True)
class SweepConfig:
    """Everything that determines a sweep's output.

    ``n_eta = None`` scales the eta node count with eps (see
    :func:`default_n_eta`); ``gamma_ref = None`` uses :func:`reference_gamma`.
    """

    n: float = 3
    k: int = 1
    eps_list: tuple = DEFAULT_EPS_LIST
    n_xi: int = DEFAULT_N_XI
    n_eta: int | None = None
    tolerance: float = DEFAULT_TOLERANCE
    eta_min: float | None = None
    outer_radius: float = DEFAULT_OUTER_RADIUS
    c_gap: float = DEFAULT_C_GAP
    gamma_ref: float | None = None
    fit_points: int = FIT_POINTS
    output: str | None = None
    seed: int = 0

    def __post_init__(self):
        ModeSpec(self.n, self.k)
        eps = check_eps_array(self.eps_list, min_points=4, strictly_decreasing=True)
        object.__setattr__(self, "eps_list", tuple(float(e) for e in eps))
        check_count(self.n_xi, "n_xi", 8)
        if self.n_eta is not None:
            check_count(self.n_eta, "n_eta", 8)
        if not (0.0 < self.tolerance < 1.0):
            raise DomainError(f"tolerance must lie in (0, 1), got {self.tolerance!r}")
        check_count(self.fit_points, "fit_points", 3)
        if self.fit_points > len(self.eps_list):
            raise ConfigurationError(f"fit_points={self.fit_points} exceeds the {len(self.eps_list)} eps values")
        check_count(self.seed, "seed", 0)
        # validates eta_min, c_gap and outer_radius together
        geometry_from_eps(self.eps_list[0], self.eta_min, self.c_gap, outer_radius=self.outer_radius)

    @property
    def gamma_reference(self):
        return reference_gamma(self.n) if self.gamma_ref is None else float(self.gamma_ref)

    def grid_size(self, eps):
        return self.n_xi, (default_n_eta(eps) if self.n_eta is None else self.n_eta)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["eps_list"] = list(self.eps_list)
        return d

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigurationError("sweep config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigurationError(f"unknown sweep config keys: {', '.join(unknown)}")
        data = dict(data)
        if "eps_list" in data:
            if not isinstance(data["eps_list"], list):
                raise ConfigurationError("eps_list must be a list of numbers")
            data["eps_list"] = tuple(data["eps_list"])
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"malformed JSON in {path}: {exc}") from exc
        try:
            return cls.from_dict(data)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc


@dataclass(frozen=True)
class SweepRow:
    eps: float
    M_max: float
    r_at_max: float
    z_at_max: float
    axis_grad: float
    ratio_gamma0: float
    ratio_gamma_ref: float
    iters: int
    residual: float
    n_xi: int
    n_eta: int
    M_outer: float = float("nan")

    def csv_values(self):
        return [getattr(self, c) for c in CSV_COLUMNS]


@dataclass(frozen=True)
class SweepResult:
    """Per-eps rows (decreasing eps) and the power-law fit ``M_max ~ eps^(-beta)``.

    ``beta`` uses the ``fit_points`` smallest eps; ``beta_all`` uses every
    row.  ``local_slopes[i]`` is the exponent between rows ``i`` and ``i+1``.
    """

    config: SweepConfig
    rows: tuple
    beta: float = float("nan")
    fit_stderr: float = float("nan")
    r_squared: float = float("nan")
    beta_all: float = float("nan")
    stderr_all: float = float("nan")
    local_slopes: tuple = ()
    failed: bool = False
    error: str | None = None

    @property
    def eps(self):
        return np.array([r.eps for r in self.rows])

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def ratio_spread(self, name="ratio_gamma0"):
        """``max / min`` of a per-eps column."""
        v = self.column(name)
        return float(v.max() / v.min())

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([repr(v) if isinstance(v, float) else str(v) for v in row.csv_values()])
        return buf.getvalue()

    def metadata(self, timestamp=None):
        ts = datetime.now(timezone.utc).isoformat() if timestamp is None else timestamp
        return {
            "config": self.config.to_dict(),
            "beta": self.beta,
            "fit_stderr": self.fit_stderr,
            "r_squared": self.r_squared,
            "fit_points": self.config.fit_points,
            "beta_all_points": self.beta_all,
            "stderr_all_points": self.stderr_all,
            "local_slopes": list(self.local_slopes),
            "gamma_ref": self.config.gamma_reference,
            "rate_bound": rate_bound(self.config.n),
            "M_outer": [r.M_outer for r in self.rows],
            "failed": self.failed,
            "error": self.error,
            "version": _version(),
            "seed": self.config.seed,
            "timestamp": ts,
        }

    def write(self, path):
        """Write ``path`` (CSV) and ``<stem>.meta.json`` (metadata); returns both paths."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        meta = path.with_suffix(".meta.json")
        meta.write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n")
        return path, meta


def fit_exponent(rows):
    """Least-squares fit of ``log value = -beta log eps + const``.

    ``rows`` is a sequence of ``(eps, value)`` pairs.  Returns
    ``(beta, stderr, r_squared)`` where ``stderr`` is the standard error of
    the slope.
    """
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ConfigurationError("rows must be (eps, value) pairs")
    if data.shape[0] < 3:
        raise ConfigurationError(f"need at least 3 rows to fit, got {data.shape[0]}")
    eps, value = data[:, 0], data[:, 1]
    if np.any(eps <= 0.0) or np.any(value <= 0.0) or not np.all(np.isfinite(data)):
        raise DomainError("eps and values must be positive and finite")
    x = np.log(eps)
    if np.ptp(x) == 0.0:
        raise DomainError("all eps values are equal; the exponent is undetermined")
    y = np.log(value)
    if np.ptp(y) == 0.0:
        return 0.0, 0.0, 1.0
    fit = stats.linregress(x, y)
    r2 = min(max(float(fit.rvalue) ** 2, 0.0), 1.0)
    return float(-fit.slope), float(fit.stderr), r2


def local_slopes(eps, values):
    le = np.log(np.asarray(eps, dtype=float))
    lv = np.log(np.asarray(values, dtype=float))
    return tuple(float(s) for s in -np.diff(lv) / np.diff(le))


def solve_instance(n, k, eps, n_xi, n_eta, *, tolerance=DEFAULT_TOLERANCE, eta_min=None, c_gap=DEFAULT_C_GAP, outer_radius=DEFAULT_OUTER_RADIUS):
    """Build, assemble and solve one gap problem with linear boundary data; returns ``(Field, SolveReport)``."""
    geom = geometry_from_eps(eps, eta_min, c_gap, outer_radius=outer_radius)
    grid = build_grid(geom, n_xi, n_eta)
    mode = ModeSpec(n, k)
    system = assemble(grid, mode, dirichlet_mode_data(mode, phi_for_mode(k)))
    return solve(system, tolerance)


def _sweep_point(config: SweepConfig, eps):
    n_xi, n_eta = config.grid_size(eps)
    field, report = solve_instance(
        config.n,
        config.k,
        eps,
        n_xi,
        n_eta,
        tolerance=config.tolerance,
        eta_min=config.eta_min,
        c_gap=config.c_gap,
        outer_radius=config.outer_radius,
    )
    geom = field.grid.geom
    env = grad_envelope(field)
    m_max, (r, z) = max_in_V(env, geom)
    return SweepRow(
        eps=float(eps),
        M_max=m_max,
        r_at_max=r,
        z_at_max=z,
        axis_grad=axis_normal_gradient(field),
        ratio_gamma0=bound_ratio_LY(env, eps, 0.0),
        ratio_gamma_ref=bound_ratio_LY(env, eps, config.gamma_reference),
        iters=report.iterations,
        residual=report.final_relative_residual,
        n_xi=n_xi,
        n_eta=n_eta,
        M_outer=max_outside(env, 2.0 * geom.c_gap),
    )


def resolve_jobs(jobs=None):
    """``jobs`` if given, else ``$GAPLAB_JOBS``, else 1."""
    if jobs is None:
        raw = os.environ.get(JOBS_ENV, "1")
        try:
            jobs = int(raw)
        except ValueError as exc:
            raise ConfigurationError(f"{JOBS_ENV} must be an integer, got {raw!r}") from exc
    return check_count(jobs, "jobs", 1)


def _map_points(fn, config, eps_values, jobs):
    """Evaluate ``fn(config, eps)`` for each eps; results in input order, failures as exceptions."""
    if jobs == 1:
        out = []
        for eps in eps_values:
            try:
                out.append(fn(config, eps))
            except (ConvergenceError, IndefiniteMatrixError) as exc:
                out.append(exc)
                break
        return out
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, config, eps) for eps in eps_values]
        out = []
        for fut in futures:
            try:
                out.append(fut.result())
            except (ConvergenceError, IndefiniteMatrixError) as exc:
                out.append(exc)
        return out


def run_sweep(config: SweepConfig, *, jobs=None, write=True):
    """Solve every eps of ``config`` and fit the blow-up exponent of ``M_max``.

    Rows come back ordered by decreasing eps whatever the completion order.
    A failed solve stops the sweep: the rows computed so far are written
    (flagged ``failed`` in the metadata) and :class:`SweepFailure` is raised
    with the partial result attached.
    """
    jobs = resolve_jobs(jobs)
    results = _map_points(_sweep_point, config, config.eps_list, jobs)
    rows = []
    error = None
    for res in results:
        if isinstance(res, Exception):
            error = f"eps={config.eps_list[len(rows)]:g}: {res}"
            break
        rows.append(res)
        logger.info("eps=%.3e M_max=%.6g iters=%d", res.eps, res.M_max, res.iters)
    if error is not None:
        result = SweepResult(config=config, rows=tuple(rows), failed=True, error=error)
        if write and config.output:
            result.write(config.output)
        raise SweepFailure(f"sweep aborted at {error}", result)

    eps = np.array([r.eps for r in rows])
    m = np.array([r.M_max for r in rows])
    tail = slice(len(rows) - config.fit_points, None)
    beta, stderr, r2 = fit_exponent(np.column_stack([eps[tail], m[tail]]))
    beta_all, stderr_all, _ = fit_exponent(np.column_stack([eps, m]))
    result = SweepResult(
        config=config,
        rows=tuple(rows),
        beta=beta,
        fit_stderr=stderr,
        r_squared=r2,
        beta_all=beta_all,
        stderr_all=stderr_all,
        local_slopes=local_slopes(eps, m),
    )
    if write and config.output:
        result.write(config.output)
    return result


AXIS_GRAD_FLOOR = 1e-6


def axis_gradient_growth(result: SweepResult, floor_rel=AXIS_GRAD_FLOOR):
    """``axis_grad`` at the smallest eps over its value at the largest.

    Values below ``floor_rel`` times the gradient scale away from the gap
    (``max M_outer``) are below solver resolution and are raised to that
    floor; for mode 0 the true value is many orders smaller still.
    """
    axis = result.column("axis_grad")
    floor = floor_rel * float(np.nanmax(result.column("M_outer")))
    return float(max(axis[-1], floor) / max(axis[0], floor))


def outer_growth(result: SweepResult):
    """``max / min`` over the sweep of the largest ``M`` outside ``B_(2 c_gap)``."""
    return result.ratio_spread("M_outer")


# --- refinement studies -------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    """Values on nested grids and the observed order from the last three."""

    eps: float
    grids: tuple
    values: tuple
    order: float
    inconclusive: bool
    min_order: float = 1.5

    @property
    def passed(self):
        return (not self.inconclusive) and self.order >= self.min_order


def observed_order(values):
    """Richardson order ``log2(|v0 - v1| / |v1 - v2|)`` from the last three values.

    Returns ``(order, inconclusive)``; the study is inconclusive when the
    successive differences do not shrink or change sign.
    """
    v = np.asarray(values, dtype=float)[-3:]
    d1, d2 = v[1] - v[0], v[2] - v[1]
    if d1 == 0.0 or d2 == 0.0 or np.sign(d1) != np.sign(d2) or abs(d2) >= abs(d1):
        return float("nan"), True
    return float(math.log2(abs(d1) / abs(d2))), False


def refinement_grids(n_xi, n_eta, refinements):
    """``refinements`` nested grid sizes starting at ``(n_xi, n_eta)``, halving the spacing each time."""
    refinements = check_count(refinements, "refinements", 3)
    sizes = [(n_xi, n_eta)]
    for _ in range(refinements - 1):
        a, b = sizes[-1]
        sizes.append((2 * a - 1, 2 * b - 1))
    return tuple(sizes)


def convergence_study(config: SweepConfig, refinements=3, *, eps=None, n_xi=17, n_eta=129):
    """Grid-refinement study of ``M_max`` at one gap width.

    Solves on ``refinements`` nested grids starting at ``(n_xi, n_eta)``
    (default eps: the last of ``config.eps_list``) and estimates the order
    from the finest three.  Non-monotone differences mark the study
    inconclusive instead of failing it.
    """
    if isinstance(refinements, bool) or not isinstance(refinements, int) or refinements < 3:
        raise ConfigurationError(f"a refinement study needs at least 3 grids, got {refinements!r}")
    eps = config.eps_list[-1] if eps is None else check_positive(eps, "eps")
    grids = refinement_grids(n_xi, n_eta, refinements)
    values = []
    for nx, ne in grids:
        field, _ = solve_instance(
            config.n,
            config.k,
            eps,
            nx,
            ne,
            tolerance=config.tolerance,
            eta_min=config.eta_min,
            c_gap=config.c_gap,
            outer_radius=config.outer_radius,
        )
        values.append(max_in_V(grad_envelope(field), field.grid.geom)[0])
    order, inconclusive = observed_order(values)
    return ConvergenceReport(eps=float(eps), grids=grids, values=tuple(values), order=order, inconclusive=inconclusive)


MANUFACTURED = {
    "r": (1, lambda r, z: np.asarray(r, dtype=float)),
    "z": (0, lambda r, z: np.asarray(z, dtype=float)),
    "rz": (1, lambda r, z: np.asarray(r, dtype=float) * np.asarray(z, dtype=float)),
}


@dataclass(frozen=True)
class ManufacturedReport:
    n: float
    solution: str
    grids: tuple
    rms: tuple
    max_abs: tuple
    orders: tuple

    @property
    def min_order(self):
        return min(self.orders)


def manufactured_study(n, solution, *, eps=1e-2, grids=((33, 129), (65, 257), (129, 513))):
    """Truncation error of an exact harmonic field under refinement.

    ``solution`` is ``"r"`` (mode 1, ``u = x_1``), ``"z"`` (mode 0,
    ``u = x_n``) or ``"rz"`` (mode 1, ``u = x_1 x_n``).  The discrete
    operator is applied to the sampled field; the RMS over interior nodes
    of ``(K w) / cell_area`` is reported for each grid, with the orders
    between successive grids.
    """
    if solution not in MANUFACTURED:
        raise ConfigurationError(f"unknown manufactured solution {solution!r}; choose from {sorted(MANUFACTURED)}")
    k, fn = MANUFACTURED[solution]
    mode = ModeSpec(n, k)
    geom = geometry_from_eps(eps)
    rms, mx = [], []
    for nx, ne in grids:
        grid = build_grid(geom, nx, ne)
        system = assemble(grid, mode, fn)
        res = interior_residual(system, fn(grid.r, grid.z))
        inner = res[np.isfinite(res)]
        rms.append(float(np.sqrt(np.mean(inner**2))))
        mx.append(float(np.max(np.abs(inner))))
    orders = tuple(float(math.log2(a / b)) for a, b in zip(rms[:-1], rms[1:]))
    return ManufacturedReport(n=n, solution=solution, grids=tuple(grids), rms=tuple(rms), max_abs=tuple(mx), orders=orders)


# --- verification campaigns ---------------------------------------------------


@dataclass(frozen=True)
class CampaignCase:
    n: float
    k: int
    eps: float
    on_outer_shell: bool
    location: tuple
    radius: float
    c: float
    value: float
    gamma: float = float("nan")
    fraction: float = float("nan")
    main_constant: float = float("nan")


@dataclass(frozen=True)
class CampaignReport:
    name: str
    cases: tuple
    skipped: tuple = ()
    bounded: dict = field(default_factory=dict)
    bound_factor: float = 3.0

    @property
    def fraction_on_shell(self):
        return sum(c.on_outer_shell for c in self.cases) / len(self.cases) if self.cases else float("nan")

    @property
    def passed(self):
        return bool(self.cases) and all(c.on_outer_shell for c in self.cases) and all(
            spread <= self.bound_factor for spread in self.bounded.values()
        )

    def failures(self):
        out = [
            f"n={c.n} k={c.k} eps={c.eps:g}: argmax at radius {c.radius:.4f} < c={c.c:.4f}"
            for c in self.cases
            if not c.on_outer_shell
        ]
        out += [
            f"{key}: spread {spread:.3f} exceeds factor {self.bound_factor:g}"
            for key, spread in self.bounded.items()
            if spread > self.bound_factor
        ]
        return out


def _default_grid(eps):
    return DEFAULT_N_XI, default_n_eta(eps)


def verify_q_campaign(n_list=(4, 5, 6), gamma_fractions=(0.9,), eps_list=(1e-2, 1e-3, 1e-4), *, c_gap=DEFAULT_C_GAP, grid=None):
    """Where ``Q`` peaks on solved mode-1 fields, for each ``(n, gamma, eps)``.

    ``Q`` is evaluated on the ball of radius ``q_admissible_radius`` (at most
    ``c_gap``).  Dimensions without an admissible ``gamma`` are skipped with
    the reason ``rho <= 0``.  ``bounded`` maps ``(n, fraction)`` to the
    spread (max / min over eps) of :func:`main_inequality_constant`.
    """
    grid = _default_grid if grid is None else grid
    cases, skipped, bounded = [], [], {}
    fields = {}
    for n in n_list:
        if gamma_star(n) is None or rho(n, 0.0) <= 0.0:
            skipped.append((n, "rho <= 0"))
            continue
        for frac in gamma_fractions:
            params = choose_constants(n, frac * gamma_star(n))
            c = q_admissible_radius(params, c_gap)
            constants = []
            for eps in eps_list:
                key = (n, eps)
                if key not in fields:
                    fields[key] = solve_instance(n, 1, eps, *grid(eps), c_gap=c_gap)[0]
                fld = fields[key]
                geom = dataclasses.replace(fld.grid.geom, c_gap=c)
                res = q_argmax_location(fld, params, geom)
                const = main_inequality_constant(fld, params, geom)
                constants.append(const)
                cases.append(
                    CampaignCase(
                        n=n,
                        k=1,
                        eps=float(eps),
                        on_outer_shell=res.on_outer_shell,
                        location=res.location,
                        radius=res.radius,
                        c=c,
                        value=res.value,
                        gamma=params.gamma,
                        fraction=float(frac),
                        main_constant=const,
                    )
                )
            bounded[f"n={n} fraction={frac:g}"] = max(constants) / min(constants)
    return CampaignReport(name="q-max", cases=tuple(cases), skipped=tuple(skipped), bounded=bounded, bound_factor=3.0)


def verify_bly_campaign(n_list=(2, 3, 4, 5, 6), eps_list=(1e-2, 1e-3, 1e-4), modes=(0, 1), *, c_gap=DEFAULT_C_GAP, A=None, grid=None):
    """Where ``Q_BLY`` peaks on ``V``, and the spread of the gamma = 0 bound ratio across eps.

    The ratio ``max_V (eps + r^2)^(1/2) M`` is required to vary by at most a
    factor 2 for mode 1, where the field blows up.
    """
    grid = _default_grid if grid is None else grid
    cases, bounded = [], {}
    for n in n_list:
        for k in modes:
            ratios = []
            for eps in eps_list:
                fld, _ = solve_instance(n, k, eps, *grid(eps), c_gap=c_gap)
                res = q_bly_argmax_location(fld, A)
                cases.append(
                    CampaignCase(
                        n=n,
                        k=k,
                        eps=float(eps),
                        on_outer_shell=res.on_outer_shell,
                        location=res.location,
                        radius=res.radius,
                        c=fld.grid.geom.c_gap,
                        value=res.value,
                    )
                )
                ratios.append(bound_ratio_LY(grad_envelope(fld), eps, 0.0))
            if k == 1:
                bounded[f"n={n} k=1 ratio"] = max(ratios) / min(ratios)
    return CampaignReport(name="bly", cases=tuple(cases), bounded=bounded, bound_factor=2.0)
