"""Fourier-side diagnostics on the torus [-pi, pi)^d.

Transforms use ``f_hat(k) = sum_x f(x) exp(i k.x)``; everything here is the
transform of a reflection-symmetric function, so only cosines appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, ContractError
from .reports import Report, csv_text
from .series import SeriesQuery, susceptibility_truncated
from .walks import CoeffTable

DEFAULT_RESOLUTION = {1: 256, 2: 64, 3: 64, 4: 16}
# f3 scans all pairs of grid points; these per-axis sizes keep M^(2d) near 2e7.
DEFAULT_PAIR_RESOLUTION = {1: 1024, 2: 64, 3: 16, 4: 8}


def d_hat(k: Sequence[float]) -> float:
    """Step-law transform (1/d) sum_i cos(k_i)."""
    k = np.asarray(k, dtype=float)
    return float(np.cos(k).mean())


def c_hat(z: float, k: Sequence[float]) -> float:
    """Simple random walk two-point transform 1 / (1 - 2dz D_hat(k))."""
    d = len(k)
    if abs(z) >= 1 / (2 * d):
        raise ContractError(f"|z|={abs(z)} is not below 1/(2d)={1 / (2 * d)}")
    return 1.0 / (1.0 - 2 * d * z * d_hat(k))


@dataclass(frozen=True)
class FourierGrid:
    """Regular grid k_j = -pi + 2 pi m / M, m = 0..M-1, on each axis."""

    d: int
    M: int

    def __post_init__(self):
        if self.d < 1 or self.M < 2 or self.M % 2:
            raise ContractError("FourierGrid needs d >= 1 and an even M >= 2")

    @classmethod
    def default(cls, d: int) -> "FourierGrid":
        return cls(d, DEFAULT_RESOLUTION.get(d, 8))

    @property
    def axis(self) -> np.ndarray:
        return -math.pi + 2 * math.pi * np.arange(self.M) / self.M

    def points(self) -> np.ndarray:
        """All grid points, shape (M^d, d), last axis varying fastest."""
        mesh = np.meshgrid(*([self.axis] * self.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def shape(self) -> tuple:
        return (self.M,) * self.d

    def to_csv(self, columns: dict) -> str:
        pts = self.points()
        names = list(columns)
        arrays = [np.asarray(columns[c]).ravel() for c in names]
        header = [f"k{i + 1}" for i in range(self.d)] + names
        rows = [[repr(float(v)) for v in p] + [repr(float(a[i])) for a in arrays] for i, p in enumerate(pts)]
        return csv_text(header, rows)


def _support_weights(table: CoeffTable, z: float, n_max: int):
    pts, wts = [], []
    acc: dict = {}
    for n in range(n_max + 1):
        zn = z**n
        for x, v in table.row(n).items():
            acc[x] = acc.get(x, 0.0) + float(v) * zn
    for x in sorted(acc):
        pts.append(x)
        wts.append(acc[x])
    return np.array(pts, dtype=float).reshape(-1, table.d), np.array(wts)


def g_hat_truncated(table: CoeffTable, z: float, k, n_max: int | None = None):
    """Sum_{n <= n_max} z^n sum_x cos(k.x) c_n(x) at one k or an array of k's."""
    q = SeriesQuery(table, z, n_max)
    X, w = _support_weights(table, z, q.n_max)
    K = np.asarray(k, dtype=float)
    single = K.ndim == 1
    K = np.atleast_2d(K)
    if K.shape[1] != table.d:
        raise ContractError("k has the wrong dimension")
    out = np.empty(len(K))
    chunk = max(1, 2_000_000 // max(1, len(X)))
    for start in range(0, len(K), chunk):
        out[start:start + chunk] = np.cos(K[start:start + chunk] @ X.T) @ w
    return float(out[0]) if single else out


# --------------------------------------------------------------------------
# smoothed axis indicator


def smoothed_axis_transform(R: float, axis: int, k: Sequence[float]) -> float:
    """Transform of exp(-|x|^2/R)/d restricted to the axis ``axis`` (x != 0 kept).

    Computed as (1/d) sum_{0 < |w| <= W} exp(-w^2/R) cos(w k_axis) with
    W = ceil(6 sqrt(R)), which leaves a remainder below 1e-12 relative.
    The w = 0 term belongs to the delta part of the starred indicator and is
    excluded here.
    """
    if not R > 0:
        raise ContractError(f"R must be positive, got {R}")
    d = len(k)
    if not 0 <= axis < d:
        raise ContractError(f"axis {axis} out of range for dimension {d}")
    W = math.ceil(6 * math.sqrt(R)) + 1
    w = np.arange(1, W + 1, dtype=float)
    return float(2 * np.sum(np.exp(-w * w / R) * np.cos(w * k[axis])) / d)


def smoothed_star_transform(R: float, k: Sequence[float]) -> float:
    """Transform of the smoothed axis indicator plus a unit mass at 0."""
    return 1.0 + sum(smoothed_axis_transform(R, i, k) for i in range(len(k)))


def smoothed_axis_closed_forms(R: float, k_i: float, d: int) -> dict:
    """Two candidate closed forms of (1/d) sum_{w in Z} exp(-w^2/R) cos(w k_i).

    ``printed`` uses exponent pi^2 R k^2, ``poisson`` the leading term of
    Poisson summation, exponent R k^2 / 4. Neither is asserted.
    """
    W = math.ceil(6 * math.sqrt(R)) + 1
    w = np.arange(-W, W + 1, dtype=float)
    direct = float(np.sum(np.exp(-w * w / R) * np.cos(w * k_i)) / d)
    root = math.sqrt(math.pi * R) / d
    return {
        "direct": direct,
        "printed": root * math.exp(-math.pi**2 * R * k_i**2),
        "poisson": root * math.exp(-R * k_i**2 / 4),
    }


# --------------------------------------------------------------------------
# bootstrap functions


@dataclass(frozen=True)
class Bootstrap:
    f1: float
    f2: float
    f3: float
    p_of_z: float
    chi: float
    f2_witness: tuple
    f3_witness: tuple

    @property
    def f(self) -> float:
        return max(self.f1, self.f2, self.f3)


def _c_hat_array(p: float, d: int, K: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 - 2 * d * p * np.cos(K).mean(axis=1))


def bootstrap_functions(
    table: CoeffTable, z: float, grid: FourierGrid | None = None, pair_grid: FourierGrid | None = None
) -> Bootstrap:
    """f1 = 2dz, f2 = sup |G_hat|/C_hat_p, f3 = sup |Delta_k G_hat(l)|/2 / U_p(k, l).

    p = p(z) matches the simple random walk susceptibility to the truncated
    one: C_hat_p(0) = chi. f2 runs over ``grid``; f3 over all pairs of the
    (coarser) ``pair_grid``. Grid suprema are lower bounds for the continuum
    suprema.
    """
    d = table.d
    grid = grid or FourierGrid.default(d)
    pair_grid = pair_grid or FourierGrid(d, DEFAULT_PAIR_RESOLUTION.get(d, 4))
    if grid.d != d or pair_grid.d != d:
        raise ContractError("grid dimension differs from table dimension")
    chi = susceptibility_truncated(SeriesQuery(table, z)).value
    if chi < 1:
        raise ContractError(f"truncated susceptibility {chi} < 1: corrupt table")
    p = (1 - 1 / chi) / (2 * d)

    K = grid.points()
    G = g_hat_truncated(table, z, K)
    C = _c_hat_array(p, d, K)
    ratio = np.abs(G) / C
    i2 = int(np.argmax(ratio))
    f2 = float(ratio[i2])

    f3, w3 = _f3(table, z, p, pair_grid)
    return Bootstrap(2 * d * z, f2, f3, p, chi, tuple(float(v) for v in K[i2]), w3)


def _f3(table: CoeffTable, z: float, p: float, grid: FourierGrid) -> tuple[float, tuple]:
    d, M = table.d, grid.M
    K = grid.points()
    G = g_hat_truncated(table, z, K).reshape(grid.shape())
    C = _c_hat_array(p, d, K).reshape(grid.shape())
    axes = tuple(range(d))
    best, witness = 0.0, ((0.0,) * d, (0.0,) * d)
    for idx in np.ndindex(*grid.shape()):
        shift = tuple(i - M // 2 for i in idx)  # k = 2 pi shift / M
        if not any(shift):
            continue
        G_plus = np.roll(G, tuple(-s for s in shift), axis=axes)
        G_minus = np.roll(G, shift, axis=axes)
        C_plus = np.roll(C, tuple(-s for s in shift), axis=axes)
        C_minus = np.roll(C, shift, axis=axes)
        U = (C_minus * C + C_plus * C + C_minus * C_plus) / C[idx]
        val = np.abs(G - 0.5 * (G_plus + G_minus)) / U
        j = int(np.argmax(val))
        if val.flat[j] > best:
            best = float(val.flat[j])
            witness = (tuple(float(v) for v in K[np.ravel_multi_index(idx, grid.shape())]), tuple(float(v) for v in K[j]))
    return best, witness


# --------------------------------------------------------------------------
# axis mass of the simple random walk

AXIS_MASS_BUDGET = 1 << 14


class _ReturnCounts:
    """R_d(m): closed m-step walks on Z^d, extended on demand."""

    def __init__(self):
        self._rows: dict[int, list[int]] = {}

    def __call__(self, d: int, m_max: int) -> list[int]:
        row = self._rows.get(d)
        if row is not None and len(row) > m_max:
            return row
        n = max(m_max, 2 * len(row) if row else 0)
        if d == 0:
            row = [1] + [0] * n
        elif d == 1:
            row = [math.comb(m, m // 2) if m % 2 == 0 else 0 for m in range(n + 1)]
        else:
            one = self(1, n)
            lower = self(d - 1, n)
            row = [0] * (n + 1)
            for m in range(0, n + 1, 2):
                total = 0
                comb = 1  # binom(m, j), advanced two rows at a time
                for j in range(0, m + 1, 2):
                    total += comb * one[j] * lower[m - j]
                    comb = comb * (m - j) * (m - j - 1) // ((j + 1) * (j + 2))
                row[m] = total
        self._rows[d] = row
        return row


    def prepare(self, d: int, n_max: int) -> None:
        """Extend every level up to d exactly to n_max, avoiding doubling overshoot."""
        for level in range(d + 1):
            row = self._rows.get(level)
            if row is None or len(row) <= n_max:
                self._rows.pop(level, None)
                self(level, n_max)


_returns = _ReturnCounts()


@lru_cache(maxsize=None)
def _binomial_row(n: int) -> tuple:
    row = [1]
    for j in range(n):
        row.append(row[-1] * (n - j) // (j + 1))
    return tuple(row)


def axis_count(n: int, d: int) -> int:
    """Number of n-step walks ending on the last coordinate axis, away from 0."""
    lower = _returns(d - 1, n)
    binom = _binomial_row(n)
    total = sum(binom[m] * lower[m] << (n - m) for m in range(0, n + 1, 2))
    return total - _returns(d, n)[n]


def axis_mass(n: int, d: int) -> Fraction:
    """Exact sum_x D^{*n}(x) 1_bot(x): mass on the punctured axes, weighted 1/d."""
    if n < 0 or d < 1:
        raise ContractError("axis_mass needs n >= 0 and d >= 1")
    if n > AXIS_MASS_BUDGET:
        raise BudgetExceeded(AXIS_MASS_BUDGET, "axis_mass step count")
    # By symmetry each axis carries the same mass; 1/d per axis cancels d axes.
    return Fraction(axis_count(n, d), (2 * d) ** n)


def axis_mass_scaling(n_list: Sequence[int], d: int, band: float = 4.0) -> Report:
    """Checks that axis_mass(n, d) * n^((d-1)/2) stays within a factor ``band``."""
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list or n_list[0] < 1:
        raise ContractError("n_list must hold positive step counts")
    _returns.prepare(d, n_list[-1])
    exact = {n: axis_mass(n, d) for n in n_list}
    scaled = {n: float(exact[n]) * n ** ((d - 1) / 2) for n in n_list}
    spread = max(scaled.values()) / min(scaled.values())
    return Report(
        operation="axis-mass",
        inputs={"d": d, "n": n_list, "band": band},
        values={
            "axis_mass": {str(n): exact[n] for n in n_list},
            "axis_mass_float": {str(n): float(exact[n]) for n in n_list},
            "scaled": {str(n): scaled[n] for n in n_list},
            "spread": spread,
        },
        passed=spread <= band,
    )
