import math
from fractions import Fraction

import numpy as np
import pytest

from prudentwalk import lattice
from prudentwalk.errors import BudgetExceeded, ContractError
from prudentwalk.fourier import (
    FourierGrid,
    axis_mass,
    axis_mass_scaling,
    bootstrap_functions,
    c_hat,
    d_hat,
    g_hat_truncated,
    smoothed_axis_closed_forms,
    smoothed_axis_transform,
    smoothed_star_transform,
)
from prudentwalk.series import SeriesQuery, green_truncated, susceptibility_truncated


def test_d_hat_values():
    assert d_hat([0.0, 0.0]) == 1.0
    assert d_hat([math.pi] * 3) == pytest.approx(-1.0, abs=1e-15)
    n = 10**4
    k = np.array([1.0, 0.0])
    assert n * (1 - d_hat(k / math.sqrt(n))) == pytest.approx(0.25, abs=1e-4)


def test_c_hat_values_and_bounds():
    assert c_hat(0.1, [0.0, 0.0]) == pytest.approx(1 / (1 - 0.4))
    with pytest.raises(ContractError):
        c_hat(0.25, [0.0, 0.0])
    for d, z in ((2, 0.2), (3, 0.1), (3, -0.1)):
        for k in FourierGrid(d, 8).points():
            v = c_hat(z, k)
            assert 1 / (1 + 2 * d * abs(z)) - 1e-15 <= v <= 1 / (1 - 2 * d * abs(z)) + 1e-15


def test_grid_symmetric():
    g = FourierGrid(2, 8)
    pts = {tuple(np.round(p, 12)) for p in g.points()}
    wrapped = {tuple(np.round((-p + math.pi) % (2 * math.pi) - math.pi, 12)) for p in g.points()}
    assert pts == wrapped
    with pytest.raises(ContractError):
        FourierGrid(2, 7)


def test_grid_csv_header():
    g = FourierGrid(2, 4)
    text = g.to_csv({"v": np.zeros(16)})
    lines = text.splitlines()
    assert lines[0] == "k1,k2,v" and len(lines) == 17


def test_g_hat_at_zero_is_chi(tables):
    t = tables(8, 2, 1)
    assert g_hat_truncated(t, 0.2, [0.0, 0.0]) == pytest.approx(susceptibility_truncated(SeriesQuery(t, 0.2)).value, rel=1e-13)


def test_g_hat_srw_geometric(tables):
    d, z, n_max = 3, 0.1, 6
    t = tables(n_max, d, 0)
    for k in ([0.3, -1.0, 2.0], [math.pi, 0.0, 0.5]):
        r = 2 * d * z * d_hat(k)
        assert g_hat_truncated(t, z, k) == pytest.approx(sum(r**n for n in range(n_max + 1)), rel=1e-12, abs=1e-14)


def test_g_hat_matches_space_sum(tables):
    t = tables(8, 2, 1)
    z, k = 0.15, (math.pi / 4, 0.0)
    q = SeriesQuery(t, z)
    re = im = 0.0
    for x in lattice.box(2, 8):
        g = green_truncated(q, x).value
        re += g * math.cos(k[0] * x[0] + k[1] * x[1])
        im += g * math.sin(k[0] * x[0] + k[1] * x[1])
    assert abs(im) < 1e-12
    assert g_hat_truncated(t, z, k) == pytest.approx(re, rel=1e-13)


def test_parseval(tables):
    t = tables(6, 2, 1)
    g = FourierGrid(2, 16)
    vals = g_hat_truncated(t, 0.2, g.points())
    assert vals.mean() == pytest.approx(green_truncated(SeriesQuery(t, 0.2), (0, 0)).value, abs=1e-12)


def poisson_sum(R, k, images=4):
    return math.sqrt(math.pi * R) * sum(math.exp(-R * (k + 2 * math.pi * m) ** 2 / 4) for m in range(-images, images + 1))


@pytest.mark.parametrize("R", [0.5, 1.0, 4.0, 16.0, 100.0])
def test_smoothed_axis_direct_sum(R):
    d = 3
    for kx in (0.0, 0.4, 1.7, math.pi):
        k = [0.2, kx, -1.0]
        full = smoothed_axis_transform(R, 1, k) + 1 / d  # add the w = 0 term back
        assert full == pytest.approx(poisson_sum(R, kx) / d, rel=1e-12)
        assert smoothed_axis_transform(R, 1, k) == smoothed_axis_transform(R, 1, [-v for v in k])


def test_smoothed_axis_growth():
    vals = [smoothed_axis_transform(R, 0, [0.0, 0.0]) for R in (1, 10, 100, 1000)]
    assert all(v > 0 for v in vals) and vals == sorted(vals)
    assert vals[-1] / (math.sqrt(math.pi * 1000) / 2) == pytest.approx(1, rel=0.02)
    with pytest.raises(ContractError):
        smoothed_axis_transform(0.0, 0, [0.0])


def test_closed_forms_reported():
    forms = smoothed_axis_closed_forms(4.0, 0.5, 2)
    assert forms["direct"] == pytest.approx(forms["poisson"], rel=1e-9)
    assert forms["printed"] != pytest.approx(forms["direct"], rel=1e-3)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("R", [1.0, 4.0, 16.0])
def test_smoothed_star_positive(d, R):
    M = {1: 64, 2: 32, 3: 16, 4: 8}[d]
    for k in FourierGrid(d, M).points():
        assert smoothed_star_transform(R, k) > 0


def test_bootstrap_f1_and_zero(tables):
    t = tables(6, 2, 1)
    b = bootstrap_functions(t, 1 / 8, FourierGrid(2, 16), FourierGrid(2, 8))
    assert b.f1 == 0.5
    b0 = bootstrap_functions(t, 0.0, FourierGrid(2, 16), FourierGrid(2, 8))
    assert (b0.p_of_z, b0.chi, b0.f2, b0.f3) == (0.0, 1.0, 1.0, 0.0)
    assert b.f == max(b.f1, b.f2, b.f3)


def test_bootstrap_p_closed_form(tables):
    t = tables(6, 3, 1)
    b = bootstrap_functions(t, 0.05, FourierGrid(3, 8), FourierGrid(3, 4))
    assert c_hat(b.p_of_z, [0.0] * 3) == pytest.approx(b.chi, rel=1e-13)


def test_bootstrap_srw_self_consistent(tables):
    d, z = 2, 0.05
    t = tables(10, d, 0)
    b = bootstrap_functions(t, z, FourierGrid(2, 32), FourierGrid(2, 16))
    tail = (2 * d * z) ** 11 / (1 - 2 * d * z)
    assert b.p_of_z == pytest.approx(z, rel=10 * tail)
    assert b.f2 == pytest.approx(1.0, abs=10 * tail)


def test_bootstrap_f3_symmetric_witness(tables):
    t = tables(6, 2, 1)
    b = bootstrap_functions(t, 0.1, FourierGrid(2, 16), FourierGrid(2, 16))
    assert b.f3 > 0 and len(b.f3_witness) == 2


def srw_axis_mass(n, d):
    dist = {lattice.origin(d): Fraction(1)}
    for _ in range(n):
        nxt = {}
        for x, p in dist.items():
            for s in lattice.unit_steps(d):
                y = tuple(a + b for a, b in zip(x, lattice.unit_vector(s, d)))
                nxt[y] = nxt.get(y, 0) + p / (2 * d)
        dist = nxt
    return sum(p * lattice.indicator_bot(x, lattice.origin(d)) for x, p in dist.items())


def test_axis_mass_spot_values():
    for d in range(1, 6):
        assert axis_mass(1, d) == Fraction(1, d)
    assert axis_mass(2, 2) == Fraction(1, 8)
    assert axis_mass(0, 3) == 0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_axis_mass_matches_convolution(d):
    for n in range(0, 9 if d < 3 else 7):
        assert axis_mass(n, d) == srw_axis_mass(n, d)


def test_axis_mass_range_and_monotone_in_d():
    for n in range(2, 40):
        vals = [axis_mass(n, d) for d in range(1, 7)]
        assert all(0 <= v <= 1 for v in vals)
        assert vals == sorted(vals, reverse=True)


@pytest.mark.parametrize("d", [3, 4])
def test_axis_mass_ratio(d):
    r = float(axis_mass(256, d) / axis_mass(64, d))
    target = 4 ** (-(d - 1) / 2)
    assert 0.5 * target <= r <= 2 * target


def test_axis_mass_scaling_report():
    rep = axis_mass_scaling([16, 32, 64], 3)
    assert rep.passed and rep.values["spread"] < 4
    with pytest.raises(ContractError):
        axis_mass_scaling([0, 4], 3)
    with pytest.raises(BudgetExceeded):
        axis_mass(10**6, 3)
