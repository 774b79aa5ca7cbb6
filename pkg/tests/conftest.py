from fractions import Fraction

import pytest

from prudentwalk.laces import pi_table_direct
from prudentwalk.walks import build_coeff_table

_tables = {}
_pis = {}


def coeff(n_max, d, lam):
    key = (n_max, d, Fraction(lam))
    if key not in _tables:
        _tables[key] = build_coeff_table(n_max, d, lam)
    return _tables[key]


def pi_direct(n_max, N_max, d, lam):
    key = (n_max, N_max, d, Fraction(lam))
    if key not in _pis:
        _pis[key] = pi_table_direct(n_max, N_max, d, lam)
    return _pis[key]


@pytest.fixture(scope="session")
def tables():
    return coeff


@pytest.fixture(scope="session")
def pis():
    return pi_direct


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
