import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaplab import experiments
from gaplab.errors import ConfigurationError, ConvergenceError, DomainError, SweepFailure
from gaplab.experiments import (
    CSV_COLUMNS,
    SweepConfig,
    axis_gradient_growth,
    convergence_study,
    default_n_eta,
    fit_exponent,
    local_slopes,
    observed_order,
    rate_bound,
    reference_gamma,
    refinement_grids,
    resolve_jobs,
    run_sweep,
)

SMALL = dict(n=3, k=1, eps_list=[1e-2, 3e-3, 1e-3, 3e-4], n_xi=17, n_eta=129, fit_points=3)


@pytest.fixture(scope="module")
def small_result():
    return run_sweep(SweepConfig.from_dict(SMALL), write=False)


@given(st.floats(0.05, 2.0), st.floats(1e-3, 1e3))
def test_fit_recovers_exact_power_law(beta, c):
    eps = np.geomspace(1e-2, 1e-5, 6)
    beta_hat, stderr, r2 = fit_exponent(np.column_stack([eps, c * eps ** (-beta)]))
    assert beta_hat == pytest.approx(beta, rel=1e-9)
    # linregress derives stderr from sqrt(1 - r^2), good to about 1e-8 here
    assert stderr <= 1e-6 and r2 == pytest.approx(1.0)


def test_fit_constant_and_noisy_data():
    eps = np.geomspace(1e-2, 1e-4, 5)
    assert fit_exponent(np.column_stack([eps, np.full(5, 2.0)])) == (0.0, 0.0, 1.0)
    noise = np.exp(np.random.default_rng(0).normal(scale=0.01, size=5))
    beta, stderr, r2 = fit_exponent(np.column_stack([eps, eps**-0.3 * noise]))
    assert abs(beta - 0.3) < 5 * stderr + 1e-3
    assert 0.9 < r2 <= 1.0


@pytest.mark.parametrize(
    "rows, exc",
    [
        ([[1e-2, 1.0], [1e-3, 2.0]], ConfigurationError),
        ([[1e-2, 1.0], [1e-2, 2.0], [1e-2, 3.0]], DomainError),
        ([[1e-2, 1.0], [1e-3, -2.0], [1e-4, 3.0]], DomainError),
        ([1.0, 2.0, 3.0], ConfigurationError),
    ],
)
def test_fit_rejects_bad_rows(rows, exc):
    with pytest.raises(exc):
        fit_exponent(rows)


def test_local_slopes():
    eps = [1e-2, 1e-3, 1e-4]
    np.testing.assert_allclose(local_slopes(eps, [1.0, 10.0, 100.0]), [1.0, 1.0])


def test_default_grid_and_references():
    assert default_n_eta(1e-2) == 257
    assert default_n_eta(1e-5) == 641
    assert default_n_eta(0.5) == 129
    assert rate_bound(2) == 0.5
    assert rate_bound(3) == pytest.approx((2 - math.sqrt(2)) / 2)
    assert reference_gamma(5) == pytest.approx(0.441518, abs=1e-6)


@pytest.mark.parametrize(
    "patch",
    [
        {"n": 1},
        {"k": 2},
        {"eps_list": [1e-2, 1e-3]},
        {"eps_list": [1e-3, 1e-2, 1e-4, 1e-5]},
        {"eps_list": "1e-2"},
        {"n_xi": 4},
        {"tolerance": 0.0},
        {"fit_points": 9},
        {"seed": -1},
        {"c_gap": 0.9},
        {"bogus": 1},
    ],
)
def test_config_validation(patch):
    with pytest.raises((ConfigurationError, DomainError)):
        SweepConfig.from_dict({**SMALL, **patch})


def test_config_json_round_trip(tmp_path):
    cfg = SweepConfig.from_dict(SMALL)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert SweepConfig.from_json(path) == cfg
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError):
        SweepConfig.from_json(bad)
    with pytest.raises(ConfigurationError):
        SweepConfig.from_json(tmp_path / "missing.json")
    path.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        SweepConfig.from_json(path)


def test_sweep_rows_and_fit(small_result):
    res = small_result
    np.testing.assert_array_equal(res.eps, SMALL["eps_list"])
    m = res.column("M_max")
    assert np.all(np.diff(m) > 0)
    beta, _, _ = fit_exponent(np.column_stack([res.eps[-3:], m[-3:]]))
    assert res.beta == beta
    assert 0.2 < res.beta < 0.4
    assert len(res.local_slopes) == 3
    assert all(r.residual <= 1e-10 for r in res.rows)


def test_csv_format(small_result):
    lines = small_result.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 5
    first = lines[1].split(",")
    # floats are written with repr, so they round-trip exactly
    assert float(first[0]) == 1e-2
    assert float(first[1]) == small_result.rows[0].M_max


def test_write_creates_csv_and_metadata(tmp_path, small_result):
    csv_path, meta_path = small_result.write(tmp_path / "out" / "sweep.csv")
    assert csv_path.read_text() == small_result.to_csv()
    assert meta_path.name == "sweep.meta.json"
    meta = json.loads(meta_path.read_text())
    assert meta["beta"] == small_result.beta
    assert meta["config"]["n"] == 3 and meta["failed"] is False
    assert "timestamp" in meta and "version" in meta


def test_sweep_is_byte_identical(tmp_path):
    a = run_sweep(SweepConfig.from_dict({**SMALL, "output": str(tmp_path / "a.csv")}))
    b = run_sweep(SweepConfig.from_dict({**SMALL, "output": str(tmp_path / "b.csv")}), jobs=2)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    ma = json.loads((tmp_path / "a.meta.json").read_text())
    mb = json.loads((tmp_path / "b.meta.json").read_text())
    for m in (ma, mb):
        m.pop("timestamp")
        m["config"].pop("output")
    assert ma == mb
    assert a.beta == b.beta


def test_failed_point_keeps_partial_rows(tmp_path, monkeypatch):
    real = experiments._sweep_point

    def flaky(config, eps):
        if eps < 2e-3:
            raise ConvergenceError("forced failure")
        return real(config, eps)

    monkeypatch.setattr(experiments, "_sweep_point", flaky)
    cfg = SweepConfig.from_dict({**SMALL, "output": str(tmp_path / "part.csv")})
    with pytest.raises(SweepFailure) as info:
        run_sweep(cfg, jobs=1)
    assert len(info.value.result.rows) == 2
    meta = json.loads((tmp_path / "part.meta.json").read_text())
    assert meta["failed"] is True and "forced failure" in meta["error"]
    assert len((tmp_path / "part.csv").read_text().splitlines()) == 3


def test_resolve_jobs(monkeypatch):
    monkeypatch.delenv(experiments.JOBS_ENV, raising=False)
    assert resolve_jobs() == 1
    monkeypatch.setenv(experiments.JOBS_ENV, "3")
    assert resolve_jobs() == 3
    assert resolve_jobs(2) == 2
    monkeypatch.setenv(experiments.JOBS_ENV, "many")
    with pytest.raises(ConfigurationError):
        resolve_jobs()
    with pytest.raises(ConfigurationError):
        resolve_jobs(0)


def test_axis_gradient_growth_floor(small_result):
    growth = axis_gradient_growth(small_result)
    assert 0.0 < growth <= 2.0
    # everything below the floor counts as equal
    assert axis_gradient_growth(small_result, floor_rel=1e6) == 1.0


def test_observed_order():
    h = np.array([1.0, 0.5, 0.25])
    order, inconclusive = observed_order(1.0 + 3.0 * h**2)
    assert order == pytest.approx(2.0) and not inconclusive
    assert observed_order([1.0, 1.1, 1.0])[1]
    assert observed_order([1.0, 1.1, 1.3])[1]


def test_refinement_grids():
    assert refinement_grids(17, 129, 3) == ((17, 129), (33, 257), (65, 513))
    with pytest.raises(ConfigurationError):
        refinement_grids(17, 129, 2)


def test_convergence_study():
    rep = convergence_study(SweepConfig.from_dict(SMALL), 3, eps=1e-2, n_xi=9, n_eta=65)
    assert len(rep.values) == 3
    assert rep.passed
    with pytest.raises(ConfigurationError):
        convergence_study(SweepConfig.from_dict(SMALL), 2)
