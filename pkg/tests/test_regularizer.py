import math

import numpy as np
import pytest

from cmlab import Grid, l1_norm, l2_norm, make_regularizer
from cmlab.regularizer import L1Regularizer, ZeroRegularizer


def test_make_regularizer():
    assert isinstance(make_regularizer("l1"), L1Regularizer)
    assert isinstance(make_regularizer("zero"), ZeroRegularizer)
    with pytest.raises(ValueError):
        make_regularizer("tv")


def test_evaluate_zero_everywhere(rng):
    g = Grid(1, (1.0,), (100,), "dirichlet")
    J = make_regularizer("zero")
    assert J.evaluate(g.function(rng.standard_normal(100))) == 0.0


def test_evaluate_l1_constant_and_delegation(rng):
    g = Grid(1, (1.0,), (400,), "periodic")
    J = make_regularizer("l1")
    assert J.evaluate(g.function(np.ones(400))) == pytest.approx(1.0, abs=1e-12)
    u = g.function(rng.standard_normal(400))
    assert J.evaluate(u) == l1_norm(u)


def test_prox_soft_threshold_arithmetic():
    g = Grid(1, (1.0,), (3,), "dirichlet")
    J = make_regularizer("l1")
    out = J.prox(g.function([1.5, -0.3, 0.0]), 1.0)
    np.testing.assert_allclose(out.values, [0.5, 0.0, 0.0])


def test_prox_zero_is_identity(rng):
    g = Grid(1, (1.0,), (50,), "dirichlet")
    J = make_regularizer("zero")
    u = g.function(rng.standard_normal(50))
    for step in (0.1, 1.0, 37.0):
        np.testing.assert_array_equal(J.prox(u, step).values, u.values)
    with pytest.raises(ValueError):
        J.prox(u, 0.0)


def test_prox_nodewise_optimality_against_scan(rng):
    # the prox output must minimize step*|v| + 0.5*(v - u)^2 at every node
    J = make_regularizer("l1")
    for _ in range(20):
        u = float(rng.uniform(-3, 3))
        step = float(rng.uniform(0.05, 2.0))
        v_star = float(J.prox_array(np.array([u]), step)[0])
        best = v_star
        obj_star = step * abs(v_star) + 0.5 * (v_star - u) ** 2
        for v in np.linspace(u - 4, u + 4, 20001):
            obj = step * abs(v) + 0.5 * (v - u) ** 2
            if obj < obj_star - 1e-8:
                best = v
        assert best == v_star


def test_prox_nonexpansive(rng):
    g = Grid(1, (1.0,), (200,), "dirichlet")
    J = make_regularizer("l1")
    for _ in range(100):
        u = g.function(rng.standard_normal(200))
        v = g.function(rng.standard_normal(200))
        du = J.prox(u, 0.3)
        dv = J.prox(v, 0.3)
        lhs = l2_norm(g.function(du.values - dv.values))
        rhs = l2_norm(g.function(u.values - v.values))
        assert lhs <= rhs + 1e-12


def test_boundedness_contract(rng):
    g = Grid(1, (2.0,), (333,), "dirichlet")
    for kind in ("l1", "zero"):
        J = make_regularizer(kind)
        c = J.bound_constant(g)
        assert c <= math.sqrt(2.0) + 1e-12
        for _ in range(100):
            u = g.function(rng.standard_normal(333))
            val = J.evaluate(u)
            assert val >= 0.0
            assert val <= c * l2_norm(u) + 1e-12
