"""Truncated generating-function analysis of exact walk tables.

Every series here is a finite partial sum of a power series in ``z`` with
nonnegative coefficients, evaluated in double precision from exact
coefficients. Where the full series is needed an explicit geometric tail
allowance is reported, based on ``c_n <= A * mu_up**n`` with
``mu_up = 2d - 1, A = 2d/(2d-1)`` at ``lam = 1`` (no immediate reversals) and
``mu_up = 2d, A = 1`` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import signal

from . import lattice
from .errors import ContractError
from .laces import PiTable
from .reports import Report
from .walks import CoeffTable, fraction_str

SAFE_FRACTION = 0.9


def growth_bound(d: int, lam) -> tuple[int, Fraction]:
    """(mu_up, A) with c_n^lam <= A * mu_up**n for every n."""
    if Fraction(lam) == 1:
        return 2 * d - 1, Fraction(2 * d, 2 * d - 1)
    return 2 * d, Fraction(1)


@dataclass(frozen=True)
class SeriesQuery:
    table: CoeffTable
    z: float
    n_max: int | None = None

    def __post_init__(self):
        if self.n_max is None:
            object.__setattr__(self, "n_max", self.table.n_max)
        if not 0 <= self.n_max <= self.table.n_max:
            raise ContractError(f"n_max={self.n_max} beyond table horizon {self.table.n_max}")
        mu_up, _ = growth_bound(self.table.d, self.table.lam)
        if not 0 <= self.z <= SAFE_FRACTION / mu_up:
            raise ContractError(
                f"z={self.z} outside the safe region [0, {SAFE_FRACTION}/{mu_up}] "
                "where truncation tails have geometric bounds"
            )

    @property
    def d(self) -> int:
        return self.table.d

    @property
    def ratio(self) -> float:
        """mu_up * z, the geometric rate of the tail bounds (<= 0.9)."""
        return growth_bound(self.d, self.table.lam)[0] * self.z

    @property
    def prefactor(self) -> float:
        return float(growth_bound(self.d, self.table.lam)[1])


@dataclass(frozen=True)
class SeriesValue:
    value: float
    tail: float


def _geometric_tail(r: float, n_max: int) -> float:
    """sum_{n > n_max} r^n."""
    return r ** (n_max + 1) / (1 - r)


def _weighted_tail(r: float, n_max: int, weight) -> float:
    total = 0.0
    n = n_max + 1
    while True:
        term = weight(n) * r**n
        total += term
        if r**n < 1e-18 * max(total, 1e-300) or n > n_max + 20000:
            return total
        n += 1


def green_truncated(q: SeriesQuery, x: Sequence[int]) -> SeriesValue:
    x = tuple(x)
    if len(x) != q.d:
        raise ContractError("x has the wrong dimension")
    value = math.fsum(float(q.table(n, x)) * q.z**n for n in range(q.n_max + 1))
    return SeriesValue(value, q.prefactor * _geometric_tail(q.ratio, q.n_max))


def susceptibility_truncated(q: SeriesQuery) -> SeriesValue:
    value = math.fsum(float(q.table.totals[n]) * q.z**n for n in range(q.n_max + 1))
    return SeriesValue(value, q.prefactor * _geometric_tail(q.ratio, q.n_max))


# --------------------------------------------------------------------------
# dense arrays and the axis-line supremum


def _dense_orders(q: SeriesQuery) -> np.ndarray:
    """Array a[n, x + N] = c_n(x) z^n on the box |x|_inf <= N."""
    N, d = q.n_max, q.d
    a = np.zeros((N + 1,) + (2 * N + 1,) * d)
    for n in range(N + 1):
        zn = q.z**n
        for x, v in q.table.row(n).items():
            a[(n,) + tuple(c + N for c in x)] = float(v) * zn
    return a


def green_array(q: SeriesQuery) -> np.ndarray:
    """Truncated two-point function on the box |x|_inf <= n_max."""
    return _dense_orders(q).sum(axis=0)


def two_point_convolution(q: SeriesQuery) -> np.ndarray:
    """Order-truncated ``G * G``: sum_{n <= N} z^n sum_m (c_m * c_{n-m})(x).

    Returned on the box |x|_inf <= N, which contains its whole support.
    """
    a = _dense_orders(q)
    N = q.n_max
    partial = np.cumsum(a, axis=0)
    side = 2 * N + 1
    out = np.zeros(a.shape[1:])
    nnz = int(np.count_nonzero(a))
    if nnz * side**q.d <= 3e8:
        # shift-and-add over the support of each order: plain float sums
        padded = np.pad(partial, [(0, 0)] + [(N, N)] * q.d)
        for m in range(N + 1):
            for idx in zip(*np.nonzero(a[m])):
                window = tuple(slice(side - 1 - i, 2 * side - 1 - i) for i in idx)
                out += a[m][idx] * padded[(N - m,) + window]
    else:
        centre = tuple(slice(N, 3 * N + 1) for _ in range(q.d))
        for m in range(N + 1):
            if a[m].any():
                out += signal.fftconvolve(a[m], partial[N - m])[centre]
    # FFT round-off may leave dust off the support |x|_1 <= N.
    grids = np.meshgrid(*([np.abs(np.arange(-N, N + 1))] * q.d), indexing="ij")
    return np.where(sum(grids) <= N, np.maximum(out, 0.0), 0.0)


def axis_line_values(f: np.ndarray) -> np.ndarray:
    """``(f * 1_bot)(y)`` for every y in the box padded by one site.

    ``f`` lives on a centred box of side 2N+1. The result has side 2N+3 and
    holds ``(1/d) * (sum_j line_j(y) - d f(y))`` where ``line_j(y)`` sums f
    over the line through y parallel to axis j.
    """
    d = f.ndim
    g = np.pad(f, 1)
    total = -d * g
    for j in range(d):
        total = total + g.sum(axis=j, keepdims=True)
    return total / d


def line_supremum(f: np.ndarray) -> tuple[float, tuple[int, ...]]:
    """Exact ``sup_y (f * 1_bot)(y)`` over Z^d for nonnegative finitely supported f.

    Only the axis lines through the support matter: a y whose d lines all
    miss the support gives 0, and moving y along a support line beyond the
    box changes nothing. So the candidates are the points of the padded box
    lying on at least one support line, plus one far point of value 0.
    """
    d = f.ndim
    N = (f.shape[0] - 1) // 2
    vals = axis_line_values(f)
    g = np.pad(f, 1)
    on_line = np.zeros(g.shape, dtype=bool)
    for j in range(d):
        on_line |= np.broadcast_to(g.sum(axis=j, keepdims=True) > 0, g.shape)
    if not on_line.any():
        return 0.0, (2 * N + 5,) * d
    masked = np.where(on_line, vals, -np.inf)
    idx = int(np.argmax(masked))
    best = float(masked.flat[idx])
    if best <= 0.0:
        return 0.0, (2 * N + 5,) * d
    y = tuple(int(c) - (N + 1) for c in np.unravel_index(idx, g.shape))
    return best, y


@dataclass(frozen=True)
class BubbleEstimate:
    value: float
    y_witness: tuple
    tail_allowance: float


def bubble_truncated(q: SeriesQuery) -> BubbleEstimate:
    """Truncated bubble ``sup_y (G * G * 1_bot)(y)`` with its tail allowance."""
    H = two_point_convolution(q)
    value, y = line_supremum(H)
    r, A = q.ratio, q.prefactor
    N = q.n_max
    # sum_x (c*c)_n <= (n+1) A^2 mu_up^n; each x weighs at most 1/d.
    tail = A * A * r ** (N + 1) * ((N + 2) - (N + 1) * r) / (1 - r) ** 2 / q.d
    return BubbleEstimate(value, y, tail)


def displacement_array(q: SeriesQuery, k: Sequence[float]) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.shape != (q.d,):
        raise ContractError("k has the wrong dimension")
    G = green_array(q)
    N = q.n_max
    grids = np.meshgrid(*([np.arange(-N, N + 1)] * q.d), indexing="ij")
    phase = sum(kj * gj for kj, gj in zip(k, grids))
    return (1.0 - np.cos(phase)) * G


@dataclass(frozen=True)
class DisplacementEstimate:
    value: float
    y_witness: tuple
    tail_allowance: float


def displacement_diagram(q: SeriesQuery, k: Sequence[float]) -> DisplacementEstimate:
    """``|| Y_{z,k} * 1_bot ||_inf`` with ``Y(x) = (1 - cos(k.x)) G(x)``."""
    Y = displacement_array(q, k)
    value, y = line_supremum(Y)
    k2 = float(np.dot(k, k))
    tail = q.prefactor * _weighted_tail(q.ratio, q.n_max, lambda n: min(2.0, 0.5 * k2 * n * n)) / q.d
    return DisplacementEstimate(value, y, tail)


# --------------------------------------------------------------------------
# connective constant and diffusion constant


@dataclass(frozen=True)
class MuEstimate:
    ratios: tuple  # exact c_n / c_{n-1} for n >= 2
    aitken: tuple
    extrapolated: float


def mu_estimate(table: CoeffTable) -> MuEstimate:
    """Ratio estimates of the growth constant with Aitken acceleration.

    Ratios start at n = 2: c_1/c_0 = 2d is the unconstrained first step and
    is not an estimate of the growth rate. The one-step ratios alternate with
    the parity of n, which defeats Aitken's method, so the acceleration runs
    on the two-step geometric ratios sqrt(c_n / c_{n-2}).
    """
    if table.n_max < 4:
        raise ContractError("mu_estimate needs a table horizon of at least 4")
    c = table.totals
    if any(v == 0 for v in c):
        raise ContractError("zero total in table")
    ratios = tuple(c[n] / c[n - 1] for n in range(2, table.n_max + 1))
    two_step = [math.sqrt(c[n] / c[n - 2]) for n in range(2, table.n_max + 1)]
    aitken = []
    for i in range(2, len(two_step)):
        r0, r1, r2 = two_step[i - 2], two_step[i - 1], two_step[i]
        denom = r2 - 2 * r1 + r0
        aitken.append(r2 if abs(denom) < 1e-15 * r2 else r2 - (r2 - r1) ** 2 / denom)
    return MuEstimate(ratios, tuple(aitken), aitken[-1])


@dataclass(frozen=True)
class KEstimate:
    K: object
    A0: object
    Kz: object
    Kz_over_z: object


def k_constant_estimate(pi: dict, z, d: int) -> KEstimate:
    """Truncated diffusion constant.

    K = (1/2d) * (1 + sum_{x,m} m pi_m(x) z^(m-1)) * (1 + K_z / z),
    K_z = sum_{x,n} |x|^2 pi_n(x) z^n. Exact when z is rational.
    """
    exact = isinstance(z, (int, Fraction))
    zz = Fraction(z) if exact else float(z)
    one = Fraction(1) if exact else 1.0
    A0 = one
    Kz = 0 * one
    Kz_over_z = 0 * one
    for (n, x), p in sorted(pi.items()):
        p = p if exact else float(p)
        if n >= 2:
            A0 += n * p * zz ** (n - 1)
        x2 = lattice.sq_norm(x)
        Kz += x2 * p * zz**n
        if n >= 1:
            Kz_over_z += x2 * p * zz ** (n - 1)
    K = (one / (2 * d)) * A0 * (1 + Kz_over_z)
    return KEstimate(K, A0, Kz, Kz_over_z)


# --------------------------------------------------------------------------
# diagram-bound audit

AUDIT_K_GRID = (1.0, 0.5, 0.25, 0.1)


def _pi_moment(q: SeriesQuery, pi: PiTable, N: int, k=None) -> float:
    n_top = min(q.n_max, pi.n_max)
    terms = []
    for (n, NN, x), v in pi.entries.items():
        if NN != N or n > n_top:
            continue
        w = 1.0 if k is None else 1.0 - math.cos(sum(ki * xi for ki, xi in zip(k, x)))
        terms.append(w * float(v) * q.z**n)
    return math.fsum(terms)


def bound_audit(q: SeriesQuery, pi: PiTable, N: int) -> Report:
    """Falsification audit of the N = 1, 2 diagram bounds.

    Both sides are truncated. The left sides are partial sums of nonnegative
    series, hence lower bounds; the right sides are evaluated with the bubble
    and displacement diagrams inflated by their tail allowances, hence upper
    bounds. A FAIL therefore refutes the inequality; a PASS means the computed
    terms are consistent with it.
    """
    if N not in (1, 2):
        raise ContractError("bound_audit supports N in {1, 2}")
    d = q.d
    lam = float(q.table.lam)
    if q.z > 1 / (4 * d):
        raise ContractError(
            f"z={q.z} exceeds 1/(4d)={1 / (4 * d)}: tails are not rigorously dominated there"
        )
    if (pi.d, pi.lam) != (q.table.d, q.table.lam):
        raise ContractError("pi table and walk table disagree on (d, lambda)")
    if pi.N_max < N:
        raise ContractError(f"pi table lacks N={N}")
    B = bubble_truncated(q)
    B_up = B.value + B.tail_allowance
    pref = (d * q.z * lam) ** N
    lhs = _pi_moment(q, pi, N)
    rhs_up = pref * B_up**N
    rhs_trunc = pref * B.value**N
    checks = [{"k": None, "lhs": lhs, "rhs_upper": rhs_up, "rhs_truncated": rhs_trunc, "pass": lhs <= rhs_up}]
    for kappa in AUDIT_K_GRID:
        k = [kappa] + [0.0] * (d - 1)
        Y = displacement_diagram(q, k)
        Y_up = Y.value + Y.tail_allowance
        dhat = sum(math.cos(c) for c in k) / d
        lhs_k = _pi_moment(q, pi, N, k)
        rhs_k = pref * (3 * N - 1) * (2 * N - 1) * Y_up * B_up ** (N - 1) + pref * (3 * N - 1) * N * B_up**N * (1 - dhat)
        rhs_k_trunc = pref * (3 * N - 1) * (2 * N - 1) * Y.value * B.value ** (N - 1) + pref * (3 * N - 1) * N * B.value**N * (1 - dhat)
        checks.append({"k": k, "lhs": lhs_k, "rhs_upper": rhs_k, "rhs_truncated": rhs_k_trunc, "pass": lhs_k <= rhs_k})
    return Report(
        operation="bound-audit",
        inputs={"d": d, "lambda": fraction_str(q.table.lam), "z": q.z, "n_max": q.n_max, "N": N},
        values={"bubble": B.value, "checks": checks},
        witness=list(B.y_witness),
        tail_allowance={"bubble": B.tail_allowance},
        passed=all(c["pass"] for c in checks),
    )
