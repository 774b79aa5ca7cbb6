import math
from fractions import Fraction

import numpy as np
import pytest

from prudentwalk import lattice
from prudentwalk.errors import ContractError
from prudentwalk.laces import pi_table_via_inversion
from prudentwalk.series import (
    SeriesQuery,
    bound_audit,
    bubble_truncated,
    displacement_diagram,
    green_truncated,
    k_constant_estimate,
    line_supremum,
    mu_estimate,
    susceptibility_truncated,
    two_point_convolution,
)
from prudentwalk.walks import build_coeff_table, enumerate_walks


def exact_convolution(table, z, n_max):
    H = {}
    for n in range(n_max + 1):
        for m in range(n + 1):
            for x, v in table.row(m).items():
                for y, w in table.row(n - m).items():
                    s = tuple(a + b for a, b in zip(x, y))
                    H[s] = H.get(s, 0) + v * w * z**n
    return H


def brute_sup(H, d, radius):
    """sup over every y with |y|_inf <= radius, scanning the d lines through y."""
    best = Fraction(0)
    for y in lattice.box(d, radius):
        total = 0
        for j in range(d):
            for c in range(-radius - 1, radius + 2):
                if c == y[j]:
                    continue
                x = y[:j] + (c,) + y[j + 1:]
                total += H.get(x, 0)
        best = max(best, total / d)
    return best


def test_safe_region(tables):
    t = tables(4, 2, 1)
    SeriesQuery(t, 0.3)
    with pytest.raises(ContractError):
        SeriesQuery(t, 0.31)
    with pytest.raises(ContractError):
        SeriesQuery(tables(4, 2, Fraction(1, 2)), 0.3)  # lam < 1 allows only 0.9/(2d)
    with pytest.raises(ContractError):
        SeriesQuery(t, 0.1, n_max=5)


def test_z_zero(tables):
    q = SeriesQuery(tables(6, 3, 1), 0.0)
    assert green_truncated(q, (0, 0, 0)).value == 1
    assert green_truncated(q, (1, 0, 0)).value == 0
    assert susceptibility_truncated(q).value == 1


@pytest.mark.parametrize("d", [2, 3])
def test_srw_susceptibility_within_tail(tables, d):
    t = tables(8, d, 0)
    for z in np.linspace(0.01, 0.9 / (2 * d), 7):
        s = susceptibility_truncated(SeriesQuery(t, float(z)))
        # the bound is attained for simple random walk; allow rounding at ulp scale
        assert -1e-14 <= 1 / (1 - 2 * d * z) - s.value <= s.tail + 1e-14


def test_green_matches_direct_walk_sum(tables):
    z = 0.2
    t = tables(10, 2, 1)
    direct = {}

    def visit(w, wt):
        direct[w.sites[-1]] = direct.get(w.sites[-1], 0.0) + float(wt) * z ** len(w)

    for n in range(11):
        enumerate_walks(n, 2, 1, visit)
    q = SeriesQuery(t, z)
    for x in [(0, 0), (1, 0), (3, -2), (0, 5)]:
        assert green_truncated(q, x).value == pytest.approx(direct.get(x, 0.0), rel=1e-13)


def test_monotone_in_horizon_and_z(tables):
    t = tables(8, 2, 1)
    chis = [susceptibility_truncated(SeriesQuery(t, 0.2, n)).value for n in range(9)]
    assert chis == sorted(chis)
    bubbles = [bubble_truncated(SeriesQuery(t, z)).value for z in np.arange(0.02, 0.19, 0.02)]
    assert all(b2 >= b1 for b1, b2 in zip(bubbles, bubbles[1:]))


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_bubble_at_zero_is_one_over_d(tables, d):
    assert bubble_truncated(SeriesQuery(tables(3, d, 1), 0.0)).value == 1 / d


def test_bubble_matches_exact_brute_force(tables):
    t = tables(8, 2, 1)
    z = Fraction(1, 10)
    exact = brute_sup(exact_convolution(t, z, 8), 2, 9)
    B = bubble_truncated(SeriesQuery(t, 0.1))
    assert B.value == pytest.approx(float(exact), rel=1e-13)


@pytest.mark.parametrize("d,n_max,lam", [(3, 6, 1), (3, 5, Fraction(1, 2)), (1, 8, 1)])
def test_bubble_matches_brute_force_float(tables, d, n_max, lam):
    t = tables(n_max, d, lam)
    z = 0.08
    H = two_point_convolution(SeriesQuery(t, z))
    N = n_max
    Hd = {tuple(int(i) - N for i in idx): float(H[idx]) for idx in zip(*np.nonzero(H))}
    B = bubble_truncated(SeriesQuery(t, z))
    assert B.value == pytest.approx(brute_sup(Hd, d, N + 1), rel=1e-13)
    y = B.y_witness
    at_y = sum(Hd.get(y[:j] + (c,) + y[j + 1:], 0.0) for j in range(d) for c in range(-N - 3, N + 4) if c != y[j]) / d
    assert at_y == pytest.approx(B.value, rel=1e-13)


def test_line_supremum_of_zero_and_point_mass():
    assert line_supremum(np.zeros((5, 5)))[0] == 0.0
    f = np.zeros((5, 5, 5))
    f[2, 2, 2] = 3.0
    assert line_supremum(f)[0] == 1.0


def test_bubble_tail_covers_longer_horizon(tables):
    short = bubble_truncated(SeriesQuery(tables(6, 2, 1), 0.12))
    long = bubble_truncated(SeriesQuery(tables(10, 2, 1), 0.12))
    assert short.value <= long.value <= short.value + short.tail_allowance


def test_displacement_basics(tables):
    q = SeriesQuery(tables(8, 2, 1), 0.1)
    assert displacement_diagram(q, [0.0, 0.0]).value == 0.0
    a = displacement_diagram(q, [0.3, -0.2]).value
    b = displacement_diagram(q, [-0.3, 0.2]).value
    assert a == pytest.approx(b, rel=1e-13)
    with pytest.raises(ContractError):
        displacement_diagram(q, [0.1])


def test_displacement_small_k(tables):
    q = SeriesQuery(tables(10, 2, 1), 0.1)
    ratios = [displacement_diagram(q, [k, 0.0]).value / k**2 for k in (0.2, 0.1, 0.05)]
    assert max(ratios) / min(ratios) < 2


def test_mu_ratios(tables):
    e2 = mu_estimate(tables(10, 2, 1))
    assert all(1 <= r <= 3 for r in e2.ratios)
    e3 = mu_estimate(tables(8, 3, 1))
    assert all(2 <= r <= 5 for r in e3.ratios)
    assert list(e3.ratios) == sorted(e3.ratios, reverse=True)
    assert 2 <= e3.extrapolated <= 5
    e0 = mu_estimate(tables(6, 2, 0))
    assert all(r == 4 for r in e0.ratios)
    with pytest.raises(ContractError):
        mu_estimate(tables(3, 2, 1))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_k_constant_srw(tables, d):
    pi = pi_table_via_inversion(tables(5, d, 0))
    assert k_constant_estimate(pi, Fraction(1, 10), d).K == Fraction(1, 2 * d)


def test_k_constant_at_zero(tables):
    pi = pi_table_via_inversion(tables(6, 2, 1))
    est = k_constant_estimate(pi, Fraction(0), 2)
    assert est.K == Fraction(1, 4) and est.A0 == 1 and est.Kz == 0


def test_k_constant_float_matches_exact(tables):
    pi = pi_table_via_inversion(tables(6, 2, 1))
    a = k_constant_estimate(pi, Fraction(1, 8), 2)
    b = k_constant_estimate(pi, 0.125, 2)
    assert float(a.K) == pytest.approx(b.K, rel=1e-12)


@pytest.mark.xfail(strict=True, reason="truncated A0 is negative at z = 1/mu for n <= 8; see decisions ledger")
def test_k_constant_window_at_estimated_critical_point(tables):
    t = tables(8, 2, 1)
    z = 1 / mu_estimate(t).extrapolated
    K = k_constant_estimate(pi_table_via_inversion(t), z, 2).K
    assert math.isfinite(K)
    assert 0 < K < 1


def test_audit_lambda_zero(tables, pis):
    from prudentwalk.laces import PiTable

    q = SeriesQuery(tables(6, 2, 0), 1 / 8)
    empty = PiTable(2, Fraction(0), 6, 2, {})
    for N in (1, 2):
        rep = bound_audit(q, empty, N)
        assert rep.passed
        assert all(c["lhs"] == 0 for c in rep.values["checks"])


def test_audit_examples(tables, pis):
    assert bound_audit(SeriesQuery(tables(8, 2, 1), 1 / 8), pis(8, 2, 2, 1), 1).passed
    lam = Fraction(1, 2)
    assert bound_audit(SeriesQuery(tables(6, 3, lam), 1 / 12), pis(6, 2, 3, lam), 2).passed


def test_audit_refuses_large_z(tables, pis):
    with pytest.raises(ContractError, match="1/\\(4d\\)"):
        bound_audit(SeriesQuery(tables(6, 2, 1), 0.2), pis(6, 2, 2, 1), 1)
    with pytest.raises(ContractError):
        bound_audit(SeriesQuery(tables(6, 2, 1), 0.1), pis(6, 2, 2, 1), 3)
