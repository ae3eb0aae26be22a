import dataclasses
import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaplab.errors import DomainError
from gaplab.estimates import (
    ParameterWarning,
    bound_ratio_LY,
    choose_constants,
    gamma_star,
    gamma_star_closed_form,
    q_admissible_radius,
    q_argmax_location,
    q_bly,
    q_bly_argmax_location,
    q_coefficient,
    q_value,
    rho,
)
from gaplab.field_analysis import Field, grad_envelope
from gaplab.meridian_pde import ModeSpec

dims = st.integers(min_value=4, max_value=60)
fractions = st.floats(min_value=0.01, max_value=0.99)


def eval_closed_form(text):
    return eval(text, {"sqrt": math.sqrt})  # noqa: S307


@given(dims)
def test_gamma_star_is_the_positive_root(n):
    g = gamma_star(n)
    assert 0.0 < g < 1.0
    assert rho(n, g) == pytest.approx(0.0, abs=1e-12 * (n * n))
    # independent oracle: numpy's polynomial roots
    roots = np.roots([n - 2.0, n * n - 4.0 * n + 5.0, -(n * n - 5.0 * n + 5.0)])
    assert g == pytest.approx(max(roots.real), rel=1e-12)


@given(dims)
def test_closed_form_matches(n):
    assert eval_closed_form(gamma_star_closed_form(n)) == pytest.approx(gamma_star(n), rel=1e-13)


@pytest.mark.parametrize("n", [2, 3])
def test_no_root_in_low_dimensions(n):
    assert gamma_star(n) is None
    assert gamma_star_closed_form(n) is None
    assert rho(n, 0.0) <= 0.0


@given(dims, fractions)
def test_rho_sign(n, frac):
    g = gamma_star(n)
    assert rho(n, frac * g) > 0.0
    assert rho(n, g + frac * (1.0 - g)) < 0.0


@given(st.integers(4, 12), fractions)
def test_constants_satisfy_sandwich(n, frac):
    params = choose_constants(n, frac * gamma_star(n))
    low, mid, high = params.sandwich()
    assert low < mid < high
    assert 0.0 < params.b <= 0.5 and params.A > 0.0


def test_first_b_is_kept_when_admissible():
    params = choose_constants(5, 0.25 * gamma_star(5))
    assert params.b == 0.5


@pytest.mark.parametrize("n, gamma", [(3, 0.1), (2, 0.1), (5, 0.5), (4, 0.0), (4, 1.0)])
def test_inadmissible_gamma(n, gamma):
    with pytest.raises(DomainError):
        choose_constants(n, gamma)


def test_sigma_condition():
    params = choose_constants(5, 0.2)
    params.check_sigma(1e-2)
    small = dataclasses.replace(params, sigma=1e-12)
    small.check_sigma(1e-2)
    big = dataclasses.replace(params, sigma=1e-3)
    with pytest.raises(DomainError):
        big.check_sigma(1e-2)


@given(st.floats(0.0, 0.3), st.floats(-0.3, 0.3), st.floats(0.0, 10.0))
def test_q_is_linear_in_gradsq(r, z, gradsq):
    params = choose_constants(5, 0.4)
    assert q_value(r, z, 1e-3, params, gradsq) == pytest.approx(q_coefficient(r, z, 1e-3, params) * gradsq)


def test_q_rejects_negative_gradsq():
    with pytest.raises(DomainError):
        q_value(0.1, 0.0, 1e-3, choose_constants(5, 0.4), -1.0)


def test_q_bly_warning():
    with pytest.warns(ParameterWarning):
        q_bly(0.1, 0.0, 1e-3, 1.0, 0.5, 1.0, n=4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        value = q_bly(0.1, 0.0, 1e-3, 12.0, 0.5, 1.0, n=4)
    assert value == pytest.approx((0.01 + 1e-3) * 1.0 + 12.0 * 0.25)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_admissible_radius(n):
    params = choose_constants(n, 0.9 * gamma_star(n))
    c = q_admissible_radius(params)
    g = params.gamma
    assert 0.0 < c <= 0.3
    if c < 0.3:
        # growth of the A term is a quarter of the leading term's at r = c
        lead = (2 - 2 * g) * c ** (1 - 2 * g)
        a_term = params.A * (4 - 2 * g) * c ** (3 - 2 * g)
        assert a_term / lead == pytest.approx(0.25, rel=1e-12)


def test_bound_ratio_of_linear_field(small_grid):
    fld = Field.from_function(lambda r, z: r, ModeSpec(3, 1), small_grid)
    env = grad_envelope(fld)
    eps = small_grid.geom.eps
    r_max = np.max(small_grid.r[small_grid.in_V()])
    assert bound_ratio_LY(env) == pytest.approx(math.sqrt(eps + r_max**2), rel=1e-3)
    assert bound_ratio_LY(env, gamma=0.5) == pytest.approx((eps + r_max**2) ** 0.25, rel=1e-3)


def test_q_argmax_needs_admissible_dimension(solve_cached):
    fld, _ = solve_cached(3, 1, 1e-2)
    params = choose_constants(4, 0.1)
    params3 = dataclasses.replace(params, n=3)
    with pytest.raises(DomainError):
        q_argmax_location(fld, params3)


def test_q_argmax_on_solved_field(solve_cached):
    fld, _ = solve_cached(5, 1, 1e-3, 33, 385)
    params = choose_constants(5, 0.9 * gamma_star(5))
    geom = dataclasses.replace(fld.grid.geom, c_gap=q_admissible_radius(params))
    res = q_argmax_location(fld, params, geom)
    assert res.on_outer_shell
    assert res.radius <= geom.c_gap


def test_q_bly_argmax_on_solved_field(solve_cached):
    fld, _ = solve_cached(3, 1, 1e-3, 33, 385)
    res = q_bly_argmax_location(fld)
    assert res.on_outer_shell
    assert res.shell_tol > 0.0
