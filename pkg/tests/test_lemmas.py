import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaplab.errors import ConfigurationError, DomainError
from gaplab.geometry import geometry_from_eps
from gaplab.lemmas import (
    TraceFreeSymmetricMatrix,
    elementary_inequality_check,
    elementary_inequality_scan,
    gamma_star_properties,
    gap_expansion_check,
    gap_profile,
    gap_profile_defect,
    hessian_row_inequality,
    hessian_row_scan,
    random_trace_free,
    run_lemma_suite,
)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_random_matrices_are_trace_free_and_symmetric(n, seed):
    h = random_trace_free(n, 5, seed)
    np.testing.assert_allclose(np.trace(h, axis1=1, axis2=2), 0.0, atol=1e-14)
    np.testing.assert_array_equal(h, np.swapaxes(h, 1, 2))
    lhs, rhs = hessian_row_inequality(h)
    assert np.all(lhs <= rhs * (1 + 1e-12))


def test_row_inequality_is_sharp():
    # diag(n-1, -1, ..., -1) attains equality
    n = 5
    H = TraceFreeSymmetricMatrix(np.diag([n - 1.0] + [-1.0] * (n - 1)))
    lhs, rhs = hessian_row_inequality(H)
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_trace_free_validation():
    with pytest.raises(DomainError):
        TraceFreeSymmetricMatrix(np.eye(3))
    with pytest.raises(DomainError):
        TraceFreeSymmetricMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(DomainError):
        TraceFreeSymmetricMatrix(np.zeros((2, 3)))
    m = TraceFreeSymmetricMatrix.random(4, 0)
    assert m.n == 4
    with pytest.raises(ValueError):
        m.entries[0, 0] = 1.0


def test_hessian_scan_small():
    rep = hessian_row_scan(samples=2000, seed=1)
    assert rep.passed and rep.data["violations"] == 0
    # every trace-free 2 x 2 matrix attains equality, so allow rounding
    assert max(rep.data["max_ratio"].values()) <= 1.0 + 1e-12
    assert rep.line().startswith("[PASS] hessian-row")


# normal floats only: subnormal y carries too few significant bits
@given(st.one_of(st.just(0.0), st.floats(1e-300, 1.0)), st.floats(0.001, 2.0), st.floats(0.01, 0.99))
def test_elementary_equality_at_zero_gap(y, b, gamma):
    lhs, rhs = elementary_inequality_check(y, 0.0, b, gamma)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@given(st.floats(1e-6, 1.0), st.floats(0.0, 1.0), st.floats(0.001, 2.0), st.floats(0.01, 0.99))
def test_elementary_inequality_holds(y, eps, b, gamma):
    lhs, rhs = elementary_inequality_check(y, eps, b, gamma)
    assert lhs >= rhs * (1 - 1e-12)


def test_elementary_origin_convention_and_validation():
    assert elementary_inequality_check(0.0, 0.0, 0.1, 0.5) == (0.0, 0.0)
    with pytest.raises(DomainError):
        elementary_inequality_check(-0.1, 0.0, 0.1, 0.5)
    with pytest.raises(DomainError):
        elementary_inequality_check(0.1, 0.0, 0.1, 1.0)


def test_elementary_scan():
    rep = elementary_inequality_scan(density=50)
    assert rep.passed
    assert rep.data["equality_defect"] <= 1e-12
    assert rep.data["min_relative_margin_eps_positive"] > 0.0


@given(st.floats(1e-3, 0.9))
def test_gap_profile_defect_matches_direct_formula(r):
    # direct evaluation in extended precision
    r_ld = np.longdouble(r)
    f = 1 - np.sqrt(1 - r_ld * r_ld)
    direct = float(abs(f - r_ld * r_ld / 2) / r_ld**3)
    assert gap_profile_defect(r) == pytest.approx(direct, rel=1e-6)


def test_gap_profile():
    eps = 1e-3
    assert gap_profile(0.0, eps) == eps
    assert gap_profile(0.3, eps) == pytest.approx(1 + eps - np.sqrt(1 - 0.09), rel=1e-12)
    with pytest.raises(DomainError):
        gap_profile(1.0, eps)


def test_gap_expansion_constant():
    defect = gap_expansion_check(geometry_from_eps(1e-3), density=500)
    # the supremum on (0, 0.3] is attained at r = 0.3
    assert defect == pytest.approx(gap_profile_defect(0.3), rel=1e-12)
    assert defect <= 1.0


def test_gamma_star_properties():
    rep = gamma_star_properties(60)
    assert rep.passed
    assert rep.data["absent_for"] == [2, 3]
    with pytest.raises(ConfigurationError):
        gamma_star_properties(4)


def test_suite_is_deterministic():
    a = run_lemma_suite(samples=500, density=20, seed=3)
    b = run_lemma_suite(samples=500, density=20, seed=3)
    assert [r.line() for r in a] == [r.line() for r in b]
    assert all(r.passed for r in a)
