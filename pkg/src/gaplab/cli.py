"""Command-line interface: ``gaplab <command> [options]``.

Exit codes: 0 success, 2 bad configuration or arguments, 3 solver failure,
4 a checked mathematical property did not hold.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    IndefiniteMatrixError,
    SweepFailure,
    VerificationError,
)
from .estimates import gamma_star, gamma_star_closed_form
from .experiments import (
    SweepConfig,
    convergence_study,
    default_n_eta,
    phi_for_mode,
    rate_bound,
    resolve_jobs,
    run_sweep,
    verify_bly_campaign,
    verify_q_campaign,
)
from .field_analysis import (
    boundary_normal_derivative_check,
    grad_envelope,
    gradient_components,
    max_in_V,
    neumann_defect,
)
from .geometry import DEFAULT_C_GAP, build_grid, geometry_from_eps
from .lemmas import run_lemma_suite
from .linsolve import DEFAULT_TOLERANCE, solve
from .meridian_pde import PHI_CHOICES, ModeSpec, assemble, dirichlet_mode_data

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4
BETA_TOLERANCE = 0.02


def _parse_grid(text):
    try:
        nx, ne = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like 33x257, got {text!r}") from exc
    return nx, ne


def _dimension(text):
    value = float(text)
    return int(value) if value.is_integer() else value


def _fmt(v):
    return repr(float(v))


# --- gamma-table ----------------------------------------------------------------


def cmd_gamma_table(args):
    if args.n_max < 4:
        raise ConfigurationError(f"--n-max must be at least 4, got {args.n_max}")
    rows = []
    for n in range(4, args.n_max + 1):
        g = gamma_star(n)
        rows.append((n, gamma_star_closed_form(n), g, (1.0 - g) / 2.0))
    if args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["n", "closed_form", "gamma_star", "rate_bound"])
        for n, form, g, b in rows:
            writer.writerow([n, form, f"{g:.12f}", f"{b:.12f}"])
    else:
        width = max(len(r[1]) for r in rows)
        print(f"{'n':>4}  {'closed form':<{width}}  {'gamma*':>8}  {'(1-gamma*)/2':>12}")
        for n, form, g, b in rows:
            print(f"{n:>4}  {form:<{width}}  {g:>8.4f}  {b:>12.4f}")
    return EXIT_OK


# --- solve ----------------------------------------------------------------------


def cmd_solve(args):
    geom = geometry_from_eps(args.eps, c_gap=args.c_gap)
    n_xi, n_eta = args.grid if args.grid else (33, default_n_eta(args.eps))
    grid = build_grid(geom, n_xi, n_eta)
    mode = ModeSpec(args.n, args.k)
    phi = args.phi or phi_for_mode(args.k)
    system = assemble(grid, mode, dirichlet_mode_data(mode, phi))
    field, report = solve(system, args.tolerance)
    env = grad_envelope(field)
    m_max, loc = max_in_V(env, geom)
    try:
        lemma = {"max_relative_error": boundary_normal_derivative_check(field), "rejected": None}
    except DomainError as exc:
        lemma = {"max_relative_error": None, "rejected": str(exc)}
    diagnostics = {
        "eps": args.eps,
        "n": args.n,
        "k": args.k,
        "phi": phi,
        "grid": [n_xi, n_eta],
        "max_in_V": m_max,
        "location": list(loc),
        "M_on_shell": float(np.max(env.M[np.abs(np.hypot(grid.r, grid.z) - geom.c_gap) <= 0.01])),
        "boundary_identity": lemma,
        "neumann_defect": neumann_defect(field),
        "residual": report.final_relative_residual,
        "iterations": report.iterations,
        "tolerance": args.tolerance,
        "version": __version__,
    }
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out.with_suffix(".csv")
    w_r, w_z = gradient_components(field)
    XI, ETA = np.meshgrid(grid.xi, grid.eta)
    columns = [XI, ETA, grid.r, grid.z, field.values, w_r, w_z, env.M]
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["xi", "eta", "r", "z", "w", "w_r", "w_z", "M"])
        for values in zip(*(c.ravel() for c in columns)):
            writer.writerow([_fmt(v) for v in values])
    json_path = out.with_suffix(".json")
    json_path.write_text(json.dumps(diagnostics, indent=2, sort_keys=True) + "\n")
    print(f"max |grad u| on V = {m_max:.6g} at (r, z) = ({loc[0]:.4g}, {loc[1]:.4g})")
    print(f"residual {report.final_relative_residual:.2e} after {report.iterations} iterations")
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


# --- sweep ----------------------------------------------------------------------


def _bound_label(n):
    g = gamma_star(n)
    if n == 2:
        return "optimal rate 0.5 for n=2"
    if n == 3:
        return f"optimal rate {rate_bound(3):.4f} for n=3"
    if g is None:
        return "no known bound"
    return f"upper bound (1-gamma*)/2 = {rate_bound(n):.4f} for n={n}"


def cmd_sweep(args):
    config = SweepConfig.from_json(args.config)
    if args.out:
        config = SweepConfig.from_dict({**config.to_dict(), "output": args.out})
    result = run_sweep(config, jobs=resolve_jobs(args.jobs))
    for row in result.rows:
        print(f"eps={row.eps:.3e}  M_max={row.M_max:.6g}  iters={row.iters}")
    print(f"beta = {result.beta:.4f} +- {result.fit_stderr:.4f} (R^2 {result.r_squared:.5f}, last {config.fit_points} points)")
    print(f"beta (all points) = {result.beta_all:.4f}; local slopes {', '.join(f'{s:.3f}' for s in result.local_slopes)}")
    print(f"compare: {_bound_label(config.n)}")
    if config.output:
        print(f"wrote {config.output}")
    if config.k == 1 and gamma_star(config.n) is not None and result.beta > rate_bound(config.n) + BETA_TOLERANCE:
        raise VerificationError(
            f"beta = {result.beta:.4f} exceeds the upper bound {rate_bound(config.n):.4f} by more than {BETA_TOLERANCE}"
        )
    return EXIT_OK


# --- verify ---------------------------------------------------------------------


def _print_campaign(report):
    for c in report.cases:
        mark = "on shell" if c.on_outer_shell else "INTERIOR"
        extra = f" gamma={c.gamma:.4f}" if c.gamma == c.gamma else ""
        print(f"  n={c.n} k={c.k} eps={c.eps:.0e}{extra} c={c.c:.3f}: argmax radius {c.radius:.4f} ({mark})")
    for n, reason in report.skipped:
        print(f"  n={n}: skipped ({reason})")
    for key, spread in report.bounded.items():
        print(f"  {key}: spread across eps {spread:.3f} (limit {report.bound_factor:g})")


def cmd_verify(args):
    failures = []
    suites = ["lemmas", "q-max", "bly"] if args.suite == "all" else [args.suite]
    for suite in suites:
        print(f"== {suite}")
        if suite == "lemmas":
            for rep in run_lemma_suite(samples=args.samples, seed=args.seed):
                print("  " + rep.line())
                if not rep.passed:
                    failures.append(rep.line())
        elif suite == "q-max":
            rep = verify_q_campaign()
            _print_campaign(rep)
            failures += rep.failures()
        else:
            rep = verify_bly_campaign()
            _print_campaign(rep)
            failures += rep.failures()
    if failures:
        raise VerificationError("property violations:\n" + "\n".join(f"  - {f}" for f in failures))
    print("all checks passed")
    return EXIT_OK


# --- convergence ----------------------------------------------------------------


def cmd_convergence(args):
    config = SweepConfig(n=args.n, k=args.k)
    nx, ne = args.grid
    rep = convergence_study(config, args.refinements, eps=args.eps, n_xi=nx, n_eta=ne)
    for (a, b), v in zip(rep.grids, rep.values):
        print(f"grid {a}x{b}: M_max = {v:.10g}")
    if rep.inconclusive:
        print("observed order: inconclusive (differences not monotone)")
        return EXIT_OK
    print(f"observed order {rep.order:.3f} (required >= {rep.min_order})")
    if not rep.passed:
        raise VerificationError(f"observed order {rep.order:.3f} below {rep.min_order}")
    return EXIT_OK


# --- parser ---------------------------------------------------------------------


def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="gaplab",
        description="Gradient blow-up between two nearly touching insulating balls.",
        formatter_class=fmt,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "gamma-table",
        help="table of the improvement exponent gamma*(n)",
        description="Print gamma*(n), its closed form and the rate (1 - gamma*)/2 for n = 4..n-max.",
        formatter_class=fmt,
    )
    p.add_argument("--n-max", type=int, default=7, help="largest dimension (at least 4)")
    p.add_argument("--format", choices=("text", "csv"), default="text", help="output format")
    p.set_defaults(func=cmd_gamma_table)

    p = sub.add_parser(
        "solve",
        help="solve one gap problem and write the field",
        description=(
            "Solve one mode of the insulated two-ball problem with linear far-field data. "
            "Writes OUT.csv (xi, eta, r, z, w, w_r, w_z, M) and OUT.json with the maximum of "
            "|grad u| on the gap region, the boundary identity d_nu|grad u|^2 = 2|grad u|^2 on "
            "the upper ball, and the solver residual."
        ),
        formatter_class=fmt,
    )
    p.add_argument("--eps", type=float, required=True, help="gap half-width (> 0)")
    p.add_argument("--n", type=_dimension, default=3, help="space dimension (>= 2)")
    p.add_argument("--k", type=int, choices=(0, 1), default=1, help="angular mode")
    p.add_argument("--grid", type=_parse_grid, default=None, help="NXIxNETA nodes (default 33 x eps-scaled)")
    p.add_argument("--phi", choices=sorted(PHI_CHOICES), default=None, help="boundary data (default: the one of mode k)")
    p.add_argument("--c-gap", type=float, default=DEFAULT_C_GAP, help="radius of the gap region V")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE, help="relative residual tolerance")
    p.add_argument("--out", default="gaplab_solve", help="output path prefix")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser(
        "sweep",
        help="eps-sweep and blow-up exponent fit",
        description=(
            "Run the sweep described by a JSON config (keys: the SweepConfig fields; unknown keys "
            "are rejected) and fit M_max ~ eps^-beta. For n >= 4 and k = 1, exits with 4 if beta "
            f"exceeds (1 - gamma*)/2 by more than {BETA_TOLERANCE}."
        ),
        formatter_class=fmt,
    )
    p.add_argument("--config", required=True, help="path to the JSON sweep config")
    p.add_argument("--out", default=None, help="CSV output path (overrides the config)")
    p.add_argument("--jobs", type=int, default=None, help="concurrent solves (default $GAPLAB_JOBS or 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "verify",
        help="run verification oracles and campaigns",
        description=(
            "lemmas: the Hessian row inequality for trace-free symmetric matrices, the elementary "
            "inequality behind the boundary term, the expansion of the sphere profile near the gap "
            "and the properties of gamma*(n). "
            "q-max: the auxiliary quantity Q attains its maximum over the gap region on the outer "
            "sphere |x| = c (n = 4, 5, 6; gamma = 0.9 gamma*). "
            "bly: the same for the simpler quantity (r^2 + eps - 2 z^2)|grad u|^2 + A u^2 "
            "(n = 2..6), and uniformity of max (eps + r^2)^(1/2) |grad u| across eps. "
            "Exits with 4 on any violation."
        ),
        formatter_class=fmt,
    )
    p.add_argument("--suite", choices=("lemmas", "q-max", "bly", "all"), default="all", help="which checks")
    p.add_argument("--samples", type=int, default=100_000, help="random matrices per dimension (lemmas)")
    p.add_argument("--seed", type=int, default=20240917, help="seed for the random matrices (lemmas)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser(
        "convergence",
        help="grid-refinement study of max |grad u|",
        description=(
            "Solve on nested grids (spacing halved each time) and report the Richardson order of "
            "M_max from the finest three; exits with 4 if the order is below 1.5."
        ),
        formatter_class=fmt,
    )
    p.add_argument("--eps", type=float, default=1e-3, help="gap half-width")
    p.add_argument("--n", type=_dimension, default=3, help="space dimension")
    p.add_argument("--k", type=int, choices=(0, 1), default=1, help="angular mode")
    p.add_argument("--grid", type=_parse_grid, default=(17, 129), help="coarsest grid NXIxNETA")
    p.add_argument("--refinements", type=int, default=3, help="number of grids (at least 3)")
    p.set_defaults(func=cmd_convergence)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, IndefiniteMatrixError, SweepFailure) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
