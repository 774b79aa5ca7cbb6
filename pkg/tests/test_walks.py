import itertools
import json
import math
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from prudentwalk import lattice
from prudentwalk.errors import BudgetExceeded, ContractError
from prudentwalk.walks import (
    CoeffTable,
    Walk,
    build_coeff_table,
    endpoint_statistics,
    enumerate_walks,
    is_prudent,
    phi_weight,
    seeing_pair_count,
)

PRUDENT_2D = [1, 4, 12, 36, 100, 276, 748, 2012, 5356]


def brute_table(n_max, d, lam):
    """Every step sequence, weights from the Walk class alone."""
    rows = []
    for n in range(n_max + 1):
        row = Counter()
        for steps in itertools.product(lattice.unit_steps(d), repeat=n):
            w = Walk.from_steps(steps, d)
            wt = phi_weight(w, lam)
            if wt:
                row[w.sites[-1]] += wt
        rows.append(dict(row))
    return rows


def test_seeing_examples():
    w = Walk([(0, 0), (1, 0), (0, 0)])
    assert seeing_pair_count(w) == 1
    assert phi_weight(w, Fraction(1, 2)) == Fraction(1, 2)
    assert phi_weight(w, 1) == 0
    u_turn = Walk([(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)])
    assert not is_prudent(u_turn)  # last step points back at the origin
    straight = Walk.from_steps([(0, 1)] * 4, 2)
    assert is_prudent(straight) and phi_weight(straight, 1) == 1


def test_lambda_zero_weight_is_one():
    w = Walk([(0, 0), (1, 0), (0, 0), (1, 0)])
    assert phi_weight(w, 0) == 1


def test_multiple_visits_each_count():
    # (0,0) visited twice; the final step sees both visits
    w = Walk.from_steps([(0, 1), (0, -1), (0, 1), (0, -1), (0, -1)], 1)
    assert seeing_pair_count(w) == sum(len(w.seen_indices(t)) for t in range(1, 6))
    assert w.seen_indices(4) == [0, 2]


def test_U_matches_ray_scan():
    w = Walk.from_steps([(0, 1), (1, 1), (0, -1), (1, -1), (0, 1)], 2)
    pairs = {(s, t) for t in range(1, 6) for s in range(t) if w.U(s, t) == -1}
    assert pairs == w.seeing_pairs()


def test_prudent_totals_2d(tables):
    assert list(tables(8, 2, 1).totals) == PRUDENT_2D


def test_prudent_totals_3d(tables):
    assert list(tables(6, 3, 1).totals) == [1, 6, 30, 150, 726, 3510, 16734]


@pytest.mark.parametrize("d,lam", [(2, 1), (2, Fraction(1, 2)), (3, Fraction(1, 3)), (1, 1), (2, 0)])
def test_table_matches_brute_force(d, lam):
    n_max = 5 if d <= 2 else 4
    assert [dict(r) for r in build_coeff_table(n_max, d, lam).rows] == brute_table(n_max, d, lam)


def test_enumerate_walks_order_and_weights():
    seen = []
    enumerate_walks(3, 2, 1, lambda w, wt: seen.append((w.steps, wt)))
    assert len(seen) == 36
    codes = [tuple((axis, -sign) for axis, sign in s) for s, _ in seen]
    assert codes == sorted(codes)  # axis first, + before -
    assert all(wt == 1 for _, wt in seen)
    total = []
    enumerate_walks(4, 2, Fraction(1, 2), lambda w, wt: total.append(wt))
    assert sum(total) == build_coeff_table(4, 2, Fraction(1, 2)).totals[4]


def test_lambda_zero_is_srw(tables):
    for d in (1, 2, 3):
        t = tables(5, d, 0)
        assert list(t.totals) == [(2 * d) ** n for n in range(6)]


def test_monotone_in_lambda():
    grid = [Fraction(k, 4) for k in range(5)]
    for d in (2, 3):
        totals = [build_coeff_table(5, d, lam).totals for lam in grid]
        for n in range(6):
            col = [t[n] for t in totals]
            assert col == sorted(col, reverse=True)


def test_root_bounds(tables):
    for d, n_max in ((2, 8), (3, 6)):
        t = tables(n_max, d, 1)
        for n in range(1, n_max + 1):
            root = float(t.totals[n]) ** (1 / n)
            assert d - 1 <= root <= 2 * d + 1


def test_parallel_matches_serial():
    a = build_coeff_table(6, 2, Fraction(1, 2), workers=1)
    b = build_coeff_table(6, 2, Fraction(1, 2), workers=3)
    assert a.to_json() == b.to_json()


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        build_coeff_table(8, 2, 0, budget=1000)


def test_float_lambda_rejected():
    with pytest.raises(ContractError):
        build_coeff_table(3, 2, 0.5)
    with pytest.raises(ContractError):
        build_coeff_table(3, 2, Fraction(3, 2))


def test_json_round_trip(tables):
    t = tables(5, 2, Fraction(1, 2))
    text = t.to_json()
    back = CoeffTable.from_json(text)
    assert back.to_json() == text
    doc = json.loads(text)
    assert doc["header"]["lambda"] == "1/2"
    assert all(isinstance(r[-1], str) and "/" in r[-1] for r in doc["rows"])


def test_csv_rows_sorted(tables):
    header, rows = tables(4, 2, 1).csv_rows()
    assert header == ["n", "x1", "x2", "value"]
    keys = [(r[0], tuple(r[1:3])) for r in rows]
    assert keys == sorted(keys)


def test_endpoint_statistics_lambda_zero(tables):
    t = tables(8, 2, 0)
    for n in range(1, 9):
        st_ = endpoint_statistics(t, n, k=[1.0, 0.5])
        assert st_.moment_power == n
        dhat = (math.cos(1 / n**0.5) + math.cos(0.5 / n**0.5)) / 2
        assert st_.char_ratio == pytest.approx(dhat**n, abs=1e-12)


def test_endpoint_statistics_zero_walk():
    t = build_coeff_table(0, 2, 1)
    assert endpoint_statistics(t, 0).moment == 0.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from([(0, 1), (0, -1), (1, 1), (1, -1)]), max_size=8))
def test_prudent_implies_self_avoiding(steps):
    w = Walk.from_steps(steps, 2)
    if is_prudent(w):
        assert len(set(w.sites)) == len(w.sites)
