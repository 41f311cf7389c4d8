"""emd_1d against an independent minimum-cost-transport oracle."""

import numpy as np
import pytest
from scipy.optimize import linprog

from respviz.measures import emd_1d


def transport_lp(p, q) -> float:
    """Exact EMD via the transportation LP: mass 1/m per source point,
    1/n per sink point, |p_i - q_j| unit costs."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m, n = len(p), len(q)
    cost = np.abs(p[:, None] - q[None, :]).ravel()
    a_eq = []
    b_eq = []
    for i in range(m):  # row sums: each source ships its mass
        row = np.zeros(m * n)
        row[i * n : (i + 1) * n] = 1.0
        a_eq.append(row)
        b_eq.append(1.0 / m)
    for j in range(n):  # column sums: each sink receives its mass
        col = np.zeros(m * n)
        col[j::n] = 1.0
        a_eq.append(col)
        b_eq.append(1.0 / n)
    result = linprog(cost, A_eq=np.array(a_eq), b_eq=np.array(b_eq), bounds=(0, None), method="highs")
    assert result.success
    return float(result.fun)


def test_simple_cases():
    assert emd_1d([0, 1], [0, 1]) == 0.0
    assert emd_1d([0], [1]) == pytest.approx(1.0)
    # brute-force minimal transport on 4 points: shift 0.25 mass from 0 to 1
    assert emd_1d([0, 0, 1, 1], [0, 1, 1, 1]) == pytest.approx(0.25)


def test_different_sizes():
    assert emd_1d([0.0], [0.0, 1.0]) == pytest.approx(0.5)


def test_oracle_corpus_200_cases():
    rng = np.random.default_rng(42)
    for case in range(200):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, 7))
        p = np.round(rng.uniform(-10, 10, size=m), 3)
        q = np.round(rng.uniform(-10, 10, size=n), 3)
        mine = emd_1d(p, q)
        oracle = transport_lp(p, q)
        assert abs(mine - oracle) < 1e-9, (case, p.tolist(), q.tolist(), mine, oracle)
