"""Graphs and laces on integer intervals, and the lace-expansion coefficients.

Edges are pairs ``(s, t)`` with ``s < t``. A graph on ``[a, b]`` is connected
when ``a`` and ``b`` are endpoints and every integer strictly between them is
straddled by some edge; a lace is a minimally connected graph. The
coefficients ``pi_n^(N)(x)`` are produced two ways: directly as a sum over
all n-step walks and all N-edge laces, and by solving the expansion identity
for ``pi`` given an exact walk table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

from . import lattice
from ._version import CODE_VERSION
from .errors import ContractError
from .reports import Report
from .walks import (
    DEFAULT_BUDGET,
    CoeffTable,
    Walk,
    as_lambda,
    expand_orbits,
    fraction_str,
    pair_bit,
    run_tally,
)

Edge = tuple[int, int]


@dataclass(frozen=True)
class EdgeGraph:
    a: int
    b: int
    edges: frozenset

    def __post_init__(self):
        if not self.a < self.b:
            raise ContractError(f"need a < b, got [{self.a}, {self.b}]")
        for s, t in self.edges:
            if not self.a <= s < t <= self.b:
                raise ContractError(f"edge {(s, t)} does not lie in [{self.a}, {self.b}]")

    @classmethod
    def of(cls, a: int, b: int, edges: Iterable[Sequence[int]]) -> "EdgeGraph":
        return cls(a, b, frozenset((min(e), max(e)) for e in edges))


def is_connected(g: EdgeGraph) -> bool:
    ends = {v for e in g.edges for v in e}
    if g.a not in ends or g.b not in ends:
        return False
    for c in range(g.a + 1, g.b):
        if not any(s < c < t for s, t in g.edges):
            return False
    return True


def lace_of_graph(g: EdgeGraph) -> tuple[Edge, ...]:
    """The lace picked out of a connected graph by the greedy construction.

    Start with the longest edge leaving ``a``; then repeatedly take the
    furthest-reaching edge that starts strictly before the current right end,
    using its leftmost possible start.
    """
    if not is_connected(g):
        raise ContractError("lace_of_graph needs a connected graph")
    t = max(t for s, t in g.edges if s == g.a)
    lace = [(g.a, t)]
    while t != g.b:
        t_next = max(tt for s, tt in g.edges if s < t)
        s_next = min(s for s, tt in g.edges if tt == t_next)
        lace.append((s_next, t_next))
        t = t_next
    return tuple(lace)


def is_lace(g: EdgeGraph) -> bool:
    if not is_connected(g):
        return False
    return all(
        not is_connected(EdgeGraph(g.a, g.b, g.edges - {e})) for e in g.edges
    )


def compatible_edges(lace: Sequence[Edge], a: int | None = None, b: int | None = None) -> frozenset:
    """All edges ``st`` not in the lace whose addition leaves the lace unchanged."""
    lace = tuple(sorted(lace))
    a = lace[0][0] if a is None else a
    b = max(t for _, t in lace) if b is None else b
    return _compatible(lace, a, b)


@lru_cache(maxsize=None)
def _compatible(lace, a, b):
    base = frozenset(lace)
    target = tuple(sorted(lace))
    out = set()
    for e in itertools.combinations(range(a, b + 1), 2):
        if e in base:
            continue
        if tuple(sorted(lace_of_graph(EdgeGraph(a, b, base | {e})))) == target:
            out.add(e)
    return frozenset(out)


def _laces(a: int, b: int, N: int) -> Iterator[tuple[Edge, ...]]:
    """Laces with N edges on [a, b] from their interlacing characterisation.

    ``s_1 = a < s_2``, ``t_{N-1} < t_N = b``, ``s_{i+1} < t_i`` and
    ``t_i <= s_{i+2}``.
    """
    if N == 1:
        yield ((a, b),)
        return

    def rec(edges):
        i = len(edges)
        s_prev, t_prev = edges[-1]
        lo = s_prev + 1
        if i >= 2:
            lo = max(lo, edges[-2][1])
        for s in range(lo, t_prev):
            if i + 1 == N:
                if t_prev < b:
                    yield tuple(edges) + ((s, b),)
            else:
                for t in range(t_prev + 1, b):
                    yield from rec(edges + [(s, t)])

    for t1 in range(a + 1, b):
        yield from rec([(a, t1)])


def enumerate_laces(N: int, a: int, b: int, visitor: Callable[[tuple[Edge, ...]], None]) -> None:
    if N < 1 or not a < b:
        raise ContractError("need N >= 1 and a < b")
    for lace in _laces(a, b, N):
        visitor(lace)


def laces_by_filtering(N: int, a: int, b: int) -> set:
    """Brute-force oracle: laces of all connected graphs on [a, b] with N edges."""
    edges = list(itertools.combinations(range(a, b + 1), 2))
    out = set()
    for r in range(1, len(edges) + 1):
        for sub in itertools.combinations(edges, r):
            g = EdgeGraph(a, b, frozenset(sub))
            if is_connected(g):
                lace = tuple(sorted(lace_of_graph(g)))
                if len(lace) == N:
                    out.add(lace)
    return out


def _mask(edges) -> int:
    m = 0
    for s, t in edges:
        m |= 1 << pair_bit(s, t)
    return m


@lru_cache(maxsize=None)
def lace_catalogue(n_max: int):
    """Per n, the list ``[(N, lace_mask, compat_mask), ...]`` of laces on [0, n].

    Masks use the global pair numbering of :func:`prudentwalk.walks.pair_bit`.
    """
    cat = {}
    for n in range(1, n_max + 1):
        entries = []
        for N in range(1, n + 1):
            for lace in _laces(0, n, N):
                entries.append((N, _mask(lace), _mask(_compatible(tuple(sorted(lace)), 0, n))))
        cat[n] = entries
    return cat


def laces_within(mask: int, n: int, N_max: int, catalogue) -> Iterator[tuple[int, int]]:
    """(N, compatible mask) for every lace on [0, n] whose edges all lie in ``mask``."""
    for N, lmask, cmask in catalogue[n]:
        if N <= N_max and lmask & mask == lmask:
            yield N, cmask


# --------------------------------------------------------------------------
# interval weights


def _seeing_set(w: Walk) -> set:
    return w.seeing_pairs()


def interval_K(w: Walk, a: int, b: int, lam) -> Fraction:
    lam = as_lambda(lam)
    if not 0 <= a <= b <= len(w):
        raise ContractError(f"invalid interval [{a}, {b}] for a walk of length {len(w)}")
    S = _seeing_set(w)
    v = sum(1 for s, t in S if a <= s and t <= b)
    return (1 - lam) ** v


def interval_J(w: Walk, a: int, b: int, lam) -> Fraction:
    """Connected-graph weight of [a, b], computed by lace resummation."""
    lam = as_lambda(lam)
    if not 0 <= a <= b <= len(w):
        raise ContractError(f"invalid interval [{a}, {b}] for a walk of length {len(w)}")
    if a == b:
        return Fraction(1)
    S = _seeing_set(w)
    total = Fraction(0)
    for N in range(1, b - a + 1):
        for lace in _laces(a, b, N):
            if all(e in S for e in lace):
                compat = _compatible(tuple(sorted(lace)), a, b)
                total += (-lam) ** N * (1 - lam) ** sum(1 for e in compat if e in S)
    return total


def interval_J_direct(w: Walk, a: int, b: int, lam) -> Fraction:
    """Oracle: sum over connected graphs of the product of ``lam * U_st``."""
    lam = as_lambda(lam)
    if a == b:
        return Fraction(1)
    S = sorted(e for e in _seeing_set(w) if a <= e[0] and e[1] <= b)
    total = Fraction(0)
    for r in range(1, len(S) + 1):
        for sub in itertools.combinations(S, r):
            if is_connected(EdgeGraph(a, b, frozenset(sub))):
                total += (-lam) ** r
    return total


def interval_weights(w: Walk, a: int, b: int, lam) -> dict:
    return {"K": interval_K(w, a, b, lam), "J": interval_J(w, a, b, lam)}


# --------------------------------------------------------------------------
# pi tables


@dataclass(frozen=True)
class PiTable:
    """Exact ``pi_n^(N)(x)`` for 1 <= n <= n_max, 1 <= N <= N_max."""

    d: int
    lam: Fraction
    n_max: int
    N_max: int
    entries: dict  # (n, N, x) -> Fraction, nonzero entries only

    def __call__(self, n: int, N: int, x: Sequence[int]) -> Fraction:
        return self.entries.get((n, N, tuple(x)), Fraction(0))

    @property
    def complete(self) -> bool:
        # an N-edge lace on [0, n] needs N <= n - 1 once n >= 2
        return self.N_max >= self.n_max - 1

    def signed(self) -> dict:
        """``pi_n(x) = sum_N (-1)^N pi_n^(N)(x)`` over the computed N."""
        out: dict = {}
        for (n, N, x), v in self.entries.items():
            key = (n, x)
            out[key] = out.get(key, Fraction(0)) + (-1) ** N * v
        return {k: v for k, v in sorted(out.items()) if v != 0}

    def to_json(self) -> str:
        import json

        rows = [[n, N, *x, fraction_str(v)] for (n, N, x), v in sorted(self.entries.items())]
        doc = {
            "schema": 1,
            "kind": "PiTable",
            "header": {
                "d": self.d,
                "lambda": fraction_str(self.lam),
                "n_max": self.n_max,
                "N_max": self.N_max,
                "code_version": CODE_VERSION,
            },
            "rows": rows,
        }
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "PiTable":
        import json

        doc = json.loads(text)
        if doc.get("kind") != "PiTable":
            raise ContractError("not a PiTable document")
        h = doc["header"]
        d = h["d"]
        entries = {(r[0], r[1], tuple(r[2 : 2 + d])): Fraction(r[2 + d]) for r in doc["rows"]}
        return cls(d, Fraction(h["lambda"]), h["n_max"], h["N_max"], entries)


def pi_table_direct(n_max: int, N_max: int, d: int, lam, *, workers: int = 1, budget: int = DEFAULT_BUDGET) -> PiTable:
    """``pi_n^(N)(x)`` by summing over every walk (prudent or not) and every lace."""
    lam = as_lambda(lam)
    if n_max < 0 or N_max < 1:
        raise ContractError("need n_max >= 0 and N_max >= 1")
    tally = run_tally(d, n_max, "pi", prune=False, N_max=N_max, workers=workers, budget=budget)
    keyed: dict = {}
    for (n, N, tip, k, c), cnt in tally.items():
        w = cnt * lam**N * (1 - lam) ** c
        if w:
            keyed[((n, N), tip, k)] = keyed.get(((n, N), tip, k), 0) + w
    expanded = expand_orbits(d, keyed)
    entries = {(n, N, x): Fraction(v) for ((n, N), x), v in sorted(expanded.items())}
    return PiTable(d, lam, n_max, N_max, entries)


def _neighbours(d):
    return [lattice.unit_vector(s, d) for s in lattice.unit_steps(d)]


def _shift(x, v):
    return tuple(a - b for a, b in zip(x, v))


def pi_table_via_inversion(table: CoeffTable) -> dict:
    """Solve the expansion identity coefficient-wise for ``pi_n(x)``.

    c_n(x) = [n=0][x=0] + sum_{u~0} c_{n-1}(x-u) + sum_{m=2}^{n} sum_v pi_m(v) c_{n-m}(x-v);
    the m = n term is pi_n(x) itself, so the system is triangular in n.
    """
    d = table.d
    nbrs = _neighbours(d)
    pi_rows: list[dict] = [dict() for _ in range(table.n_max + 1)]
    for n in range(1, table.n_max + 1):
        acc: dict = {}
        for x, v in table.rows[n].items():
            acc[x] = acc.get(x, 0) + v
        for y, v in table.rows[n - 1].items():
            for u in nbrs:
                x = tuple(a + b for a, b in zip(y, u))
                acc[x] = acc.get(x, 0) - v
        for m in range(2, n):
            for v_site, p in pi_rows[m].items():
                for y, c in table.rows[n - m].items():
                    x = tuple(a + b for a, b in zip(v_site, y))
                    acc[x] = acc.get(x, 0) - p * c
        pi_rows[n] = {x: Fraction(v) for x, v in sorted(acc.items()) if v != 0}
    return {(n, x): v for n in range(table.n_max + 1) for x, v in pi_rows[n].items()}


def expansion_residuals(table: CoeffTable, pi: dict) -> dict:
    """Residuals ``r_n(x)`` of the expansion identity for a signed ``pi`` map."""
    d = table.d
    nbrs = _neighbours(d)
    by_n: dict = {}
    for (m, v), p in pi.items():
        by_n.setdefault(m, {})[v] = p
    residuals = {}
    origin = lattice.origin(d)
    for n in range(table.n_max + 1):
        acc: dict = {}
        for x, v in table.rows[n].items():
            acc[x] = acc.get(x, 0) + v
        if n == 0:
            acc[origin] = acc.get(origin, 0) - 1
        else:
            for y, v in table.rows[n - 1].items():
                for u in nbrs:
                    x = tuple(a + b for a, b in zip(y, u))
                    acc[x] = acc.get(x, 0) - v
        for m in range(2, n + 1):
            for v_site, p in by_n.get(m, {}).items():
                for y, c in table.rows[n - m].items():
                    x = tuple(a + b for a, b in zip(v_site, y))
                    acc[x] = acc.get(x, 0) - p * c
        for x, r in acc.items():
            residuals[(n, x)] = Fraction(r)
    return residuals


def count_laces(N: int, n: int) -> int:
    return sum(1 for _ in _laces(0, n, N))


def verify_expansion_identity(table: CoeffTable, pi: PiTable) -> Report:
    """Check the coefficient identity exactly; PASS iff every residual is 0.

    With a pi table truncated in N the missing lace classes are bounded by
    ``lam^N (2d)^m |L_N[0, m]|`` per coefficient and the check becomes
    ``|r_n(x)| <= bound_n``.
    """
    if (table.d, table.lam) != (pi.d, pi.lam):
        raise ContractError("walk table and pi table disagree on (d, lambda)")
    n_max = min(table.n_max, pi.n_max)
    trimmed = CoeffTable(table.d, table.lam, n_max, table.rows[: n_max + 1])
    res = expansion_residuals(trimmed, pi.signed())
    worst = max((abs(r) for r in res.values()), default=Fraction(0))
    nonzero = sorted((k for k, r in res.items() if r != 0))
    warnings = []
    if pi.complete:
        passed = not nonzero
        bound = Fraction(0)
    else:
        warnings.append("truncation in N: identity checked against a residual bound")
        lam, d = pi.lam, pi.d
        max_c = [max(r.values(), default=Fraction(0)) for r in trimmed.rows]
        passed = True
        bound = Fraction(0)
        for n in range(n_max + 1):
            b_n = Fraction(0)
            for m in range(2, n + 1):
                for N in range(pi.N_max + 1, m):
                    b_n += lam**N * (2 * d) ** m * count_laces(N, m) * max_c[n - m]
            worst_n = max((abs(r) for (nn, _), r in res.items() if nn == n), default=Fraction(0))
            passed = passed and worst_n <= b_n
            bound = max(bound, b_n)
    return Report(
        operation="verify-identity",
        inputs={"d": table.d, "lambda": fraction_str(table.lam), "n_max": n_max, "N_max": pi.N_max},
        values={
            "max_abs_residual": fraction_str(worst),
            "nonzero_residuals": len(nonzero),
            "checked_coefficients": len(res),
            "residual_bound": fraction_str(bound),
        },
        passed=passed,
        warnings=warnings,
    )
