from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from stablereg.params import (ParameterError, SizeSequence, make_params, size_constants, stable_regularity_bound,
                              theorem_bound)

F = Fraction


def test_cliques_benchmark_constants():
    p, sizes = make_params(30000, F(1, 5), 2)
    assert (p.alpha, p.beta, p.q, p.c) == (F(1, 20), F(1, 15), 20, 37)
    assert sizes.sizes == (740, 37)


def test_three_level_constants():
    q, c, sizes = size_constants(10**6, F(1, 5), 3)
    assert (q, c) == (20, 62)
    assert sizes.sizes == (24800, 1240, 62)
    # 1/5 is not below 1/2^3, so the pipeline itself refuses these inputs
    with pytest.raises(ParameterError, match="epsilon too large"):
        make_params(10**6, F(1, 5), 3)


def test_small_n_rejected_with_arithmetic():
    with pytest.raises(ParameterError, match="insufficient n"):
        make_params(1000, F(1, 5), 2)


def test_epsilon_must_fit_tree_bound():
    with pytest.raises(ParameterError, match="epsilon too large"):
        make_params(10**6, F(1, 4), 2)


def test_theorem_bounds():
    assert theorem_bound(F(1, 5), 2) == (1600, 4)
    assert theorem_bound(F(1, 10), 3)[1] == 320
    assert theorem_bound(F(1, 32), 4)[1] == 4 * 256**2


def test_stable_regularity_exponent():
    assert stable_regularity_bound(F(1, 5), 1) == 20**9


def test_violations_reported():
    assert SizeSequence((740, 37)).violations(F(1, 20), 2) == []
    assert SizeSequence((740, 38)).violations(F(1, 20), 2)
    assert SizeSequence((12, 3)).violations(F(1, 2), 2) == []
    assert SizeSequence((4, 2)).violations(F(1, 2), 2)  # base not above t


@given(st.integers(2, 6), st.integers(1, 3), st.integers(10**4, 10**8))
def test_make_params_invariants(den, t, n):
    eps = F(1, 2**t * den)
    try:
        p, sizes = make_params(n, eps, t)
    except ParameterError as exc:
        _, c, _ = size_constants(n, eps, t)
        assert p_alpha_condition_fails(n, eps, t) or ("size sequence" in str(exc) and c <= t)
        return
    assert sizes.violations(p.alpha, t) == []
    Q = p.q ** (t - 1)
    assert p.alpha * n / 2 - Q < sizes[0] <= p.alpha * n / 2


def p_alpha_condition_fails(n, eps, t):
    alpha = eps / 4
    return not alpha * alpha * n / 4 - 1 > max(t, 3 / eps)
