import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prudentwalk.errors import BudgetExceeded, ContractError
from prudentwalk.montecarlo import (
    SamplerConfig,
    diffusive_exponent,
    estimates_csv,
    mutual_seeing_exact,
    mutual_seeing_mc,
    paths_from_codes,
    rosenbluth_estimate,
    rosenbluth_exhaustive,
    seeing_counts,
    ucd_heuristic,
)
from prudentwalk.walks import Walk, seeing_pair_count


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda d: st.tuples(st.just(d), st.lists(st.integers(0, 2 * d - 1), max_size=9))))
def test_seeing_counts_match_walk(case):
    d, codes = case
    arr = np.array([codes], dtype=np.int64).reshape(1, len(codes))
    pos, axes, signs = paths_from_codes(arr, d)
    w = Walk.from_steps([(c // 2, 1 - 2 * (c % 2)) for c in codes], d)
    assert [tuple(p) for p in pos[0]] == list(w.sites)
    assert seeing_counts(pos, axes, signs)[0] == seeing_pair_count(w)


def test_config_validation():
    with pytest.raises(ContractError):
        SamplerConfig(2, 1.5, 4, 10, 0)
    with pytest.raises(ContractError):
        SamplerConfig(2, 0.5, 4, 0, 0)
    with pytest.raises(ContractError):
        SamplerConfig(2, 0.5, 4, 10, -1)
    assert SamplerConfig(2, 0.5, 4, 10, 0, batches=4).n_batches == 16


def test_lambda_zero_is_exact():
    r = rosenbluth_estimate(SamplerConfig(3, 0.0, 7, 5000, 11))
    assert r.c_n_hat.value == 6.0**7 and r.c_n_hat.stderr == 0.0
    assert r.c_n_hat.ess == pytest.approx(5000)


def test_lambda_zero_msd():
    n = 12
    r = rosenbluth_estimate(SamplerConfig(2, 0.0, n, 40000, 3))
    assert abs(r.mean_sq_displacement.value - n) <= 3 * r.mean_sq_displacement.stderr
    target = (0.5 * (math.cos(1 / math.sqrt(n)) + 1)) ** n
    assert abs(r.char_ratio.value - target) <= 3 * r.char_ratio.stderr


def test_prudent_c2():
    r = rosenbluth_estimate(SamplerConfig(2, 1.0, 2, 100000, 2024))
    assert abs(r.c_n_hat.value - 12) <= 3 * r.c_n_hat.stderr


@pytest.mark.parametrize("lam", [0, Fraction(1, 2), 1])
def test_exhaustive_equals_table(tables, lam):
    t = tables(4, 2, lam)
    for n in range(5):
        assert rosenbluth_exhaustive(2, lam, n) == t.totals[n]
    t3 = tables(3, 3, lam)
    assert rosenbluth_exhaustive(3, lam, 3) == t3.totals[3]


def test_exhaustive_budget():
    with pytest.raises(BudgetExceeded):
        rosenbluth_exhaustive(3, 1, 12)


def test_deterministic_across_runs_and_workers():
    cfg = SamplerConfig(2, 0.3, 10, 3000, 99)
    a = rosenbluth_estimate(cfg).to_json_line()
    assert rosenbluth_estimate(cfg).to_json_line() == a
    assert rosenbluth_estimate(SamplerConfig(2, 0.3, 10, 3000, 99, workers=2)).to_json_line() == a
    assert rosenbluth_estimate(SamplerConfig(2, 0.3, 10, 3000, 100)).to_json_line() != a


def test_zero_weight_is_flagged():
    r = rosenbluth_estimate(SamplerConfig(2, 1.0, 40, 200, 1))
    assert r.zero_weight and math.isnan(r.mean_sq_displacement.value)
    line = json.loads(r.to_json_line())
    assert line["zero_weight"] is True and line["mean_sq_displacement"]["value"] == "nan"


def test_csv_export():
    r = rosenbluth_estimate(SamplerConfig(2, 0.0, 4, 1000, 1))
    lines = estimates_csv([r]).splitlines()
    assert lines[0] == "n,moment,stderr" and lines[1].startswith("4,")


def test_mutual_seeing_small():
    assert mutual_seeing_exact(2, 1) == [Fraction(1, 4)]
    for d in range(1, 7):
        assert mutual_seeing_exact(d, 1)[0] == Fraction(1, 2 * d)
    S = mutual_seeing_exact(3, 20)
    assert all(b >= a for a, b in zip(S, S[1:]))
    with pytest.raises(ContractError):
        mutual_seeing_exact(3, 0)


@pytest.mark.parametrize("d,T", [(2, 16), (2, 64), (3, 32), (3, 64)])
def test_mutual_seeing_against_simulation(d, T):
    exact = float(mutual_seeing_exact(d, T)[-1])
    mc = mutual_seeing_mc(d, T, 8000, seed=d * 1000 + T)
    assert abs(mc.value - exact) <= 3 * mc.stderr


def test_ucd_small_horizon_runs():
    rep = ucd_heuristic(64, (4, 6))
    assert set(rep.values["checks"]) == {"4", "6"}


def test_diffusive_exponent_srw():
    rep = diffusive_exponent([8, 16, 32, 64], d=2, lam=0.0, samples=8000, seed=5)
    lo, hi = rep.values["ci95"]
    assert rep.passed and lo <= 1.0 <= hi


def test_diffusive_exponent_exact_prudent(tables):
    rep = diffusive_exponent(list(range(6, 13)), d=2, lam=1, table=tables(12, 2, 1), band=None)
    assert rep.passed is None and rep.values["source"] == "exact"
    assert rep.values["slope"] > 1.0  # superdiffusive at small n


def test_diffusive_exponent_degenerate():
    with pytest.raises(ContractError):
        diffusive_exponent([4, 8, 16], d=2, lam=0.0)
    with pytest.raises(ContractError):
        diffusive_exponent([20, 30, 40, 50], d=2, lam=1.0, samples=50)
