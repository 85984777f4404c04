from math import comb, factorial

import numpy as np
import pytest
import scipy.special as sp

from radial_itp import _series as S

N = 16


def taylor(f, n=N):
    return np.array([f(j) for j in range(n)], dtype=float)


def test_mul_and_reciprocal():
    a = np.zeros(N)
    a[:2] = [1.0, -1.0]
    inv = S.reciprocal(a)  # 1 / (1 - x) = sum x^j
    assert np.allclose(inv, 1.0)
    assert np.allclose(S.mul(a, inv), np.eye(N)[0])


def test_power_matches_binomial():
    a = np.zeros(N)
    a[:2] = [1.0, 1.0]
    got = S.power(a, 0.5)
    want = np.array([sp.binom(0.5, j) for j in range(N)])
    assert np.allclose(got, want, atol=1e-15)
    assert np.allclose(S.power(a, 3)[:4], [comb(3, j) for j in range(4)])
    with pytest.raises(ValueError):
        S.power(np.zeros(N), 0.5)


def test_exp_and_calculus():
    x = np.eye(N)[1]
    e = S.exp(x)
    assert np.allclose(e, [1 / factorial(j) for j in range(N)])
    assert np.allclose(S.derivative(e)[:-1], e[:-1])
    assert np.allclose(S.integral(S.derivative(e)) + np.eye(N)[0], e)


def test_compose_and_reversion():
    g = np.zeros(N)
    g[1:] = [(-1) ** (j + 1) / j for j in range(1, N)]  # log(1 + x)
    inv = S.reversion(g)  # exp(x) - 1
    assert np.allclose(inv[1:], [1 / factorial(j) for j in range(1, N)])
    ident = S.compose(g, inv)
    assert np.allclose(ident, np.eye(N)[1], atol=1e-14)
    with pytest.raises(ValueError):
        S.compose(g, np.ones(N))


def test_evaluate():
    a = np.array([1.0, 2.0, 3.0])
    assert S.evaluate(a, 2.0) == pytest.approx(17.0)
