"""Weakly prudent walks: weights, exact enumeration and coefficient tables.

A walk's weight is ``(1 - lam) ** V(w)`` where ``V(w)`` counts the pairs
``s < t`` for which the t-th step sees ``w(s)``. At ``lam = 1`` this is the
indicator of prudence; at ``lam = 0`` every walk has weight one.

Enumeration is a depth-first search that maintains a multiset of visited
sites and the bounding box of the walk, so the number of new seeing pairs
created by a step is found by walking the ray from the new tip to the edge of
the box. Tables are built from *canonical* walks only (first use of every
axis is in the positive direction, axes introduced in increasing order) and
expanded over the hyperoctahedral group afterwards, which saves a factor of
up to ``2^d d!``.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from . import lattice
from ._version import CODE_VERSION
from .errors import BudgetExceeded, ContractError
from .lattice import Point, Step

DEFAULT_BUDGET = 10**9
TABLE_SCHEMA = 1


def as_lambda(lam) -> Fraction:
    """Coerce an exact interaction strength; floats are rejected."""
    if isinstance(lam, float):
        raise ContractError("exact tables need a rational lambda (int, Fraction or 'p/q')")
    lam = Fraction(lam)
    if not 0 <= lam <= 1:
        raise ContractError(f"lambda must lie in [0, 1], got {lam}")
    return lam


def pair_bit(s: int, t: int) -> int:
    """Bit index of the pair (s, t), s < t, in a seeing-pair mask."""
    return t * (t - 1) // 2 + s


class Walk:
    """A nearest-neighbour path, anchored at ``sites[0]``."""

    def __init__(self, sites: Sequence[Sequence[int]]):
        if len(sites) == 0:
            raise ContractError("a walk needs at least one site")
        self.sites: tuple[Point, ...] = tuple(tuple(int(c) for c in s) for s in sites)
        self.d = len(self.sites[0])
        self.steps: tuple[Step, ...] = tuple(
            lattice.step_between(a, b) for a, b in zip(self.sites, self.sites[1:])
        )
        self._visits: dict[Point, list[int]] = {}
        for i, s in enumerate(self.sites):
            self._visits.setdefault(s, []).append(i)

    @classmethod
    def from_steps(cls, steps: Iterable[Step], d: int, start: Sequence[int] | None = None) -> "Walk":
        pos = list(start) if start is not None else [0] * d
        sites = [tuple(pos)]
        for axis, sign in steps:
            lattice.unit_vector((axis, sign), d)
            pos[axis] += sign
            sites.append(tuple(pos))
        return cls(sites)

    def __len__(self) -> int:
        return len(self.sites) - 1

    def __repr__(self) -> str:
        return f"Walk({list(self.sites)!r})"

    def visits(self, site: Sequence[int]) -> list[int]:
        """Time indices at which ``site`` is occupied."""
        return self._visits.get(tuple(site), [])

    def seen_indices(self, t: int) -> list[int]:
        """All s < t with w(t) seeing w(s), by scanning the ray from w(t)."""
        if t == 0:
            return []
        axis, sign = self.steps[t - 1]
        tip = list(self.sites[t])
        coords = [s[axis] for s in self.sites]
        limit = max(coords) if sign > 0 else min(coords)
        out = []
        while (tip[axis] - limit) * sign <= 0:
            out.extend(s for s in self._visits.get(tuple(tip), ()) if s < t)
            tip[axis] += sign
        return sorted(out)

    def seeing_pairs(self) -> set[tuple[int, int]]:
        return {(s, t) for t in range(1, len(self) + 1) for s in self.seen_indices(t)}

    def U(self, s: int, t: int) -> int:
        """-1 if the t-th step sees w(s), else 0."""
        if not 0 <= s < t <= len(self):
            raise ContractError(f"need 0 <= s < t <= {len(self)}, got ({s}, {t})")
        return -1 if lattice.sees(self.sites[t], self.steps[t - 1], self.sites[s]) else 0


def seeing_pair_count(w: Walk) -> int:
    return sum(len(w.seen_indices(t)) for t in range(1, len(w) + 1))


def is_prudent(w: Walk) -> bool:
    return all(not w.seen_indices(t) for t in range(1, len(w) + 1))


def phi_weight(w: Walk, lam) -> Fraction:
    lam = as_lambda(lam)
    return (1 - lam) ** seeing_pair_count(w)


# --------------------------------------------------------------------------
# depth-first engine


class _Search:
    """Mutable DFS state; one instance per (sub)tree traversal.

    Sites are encoded as single ints (mixed radix with offset) so that ray
    scans are integer strides and dictionary lookups avoid tuple hashing.
    """

    def __init__(self, d, n_max, *, prune, canonical, track_pairs, budget):
        self.d = d
        self.n_max = n_max
        self.prune = prune
        self.canonical = canonical
        self.track_pairs = track_pairs
        self.budget = budget
        self.nodes = 0
        self.offset = n_max + 1
        self.base = 2 * n_max + 3
        self.strides = [self.base**i for i in range(d)]
        self.pos = [0] * d
        self.code = self.encode(self.pos)
        self.visits: dict[int, list[int]] = {self.code: [0]}
        self.lo = [0] * d
        self.hi = [0] * d
        self.steps = lattice.unit_steps(d)
        self._allowed = [
            [(a, s) for (a, s) in self.steps if a < k or (a == k and s > 0)] for k in range(d + 1)
        ]

    def encode(self, x):
        return sum((xi + self.offset) * st for xi, st in zip(x, self.strides))

    def decode(self, code):
        out = []
        for _ in range(self.d):
            code, r = divmod(code, self.base)
            out.append(r - self.offset)
        return tuple(out)

    def probe(self, axis, sign, t):
        """Seeing data for step ``t`` along (axis, sign) without moving.

        Returns (dV, dmask), or None when pruning removes the step.
        """
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded(self.budget)
        stride = self.strides[axis] * sign
        p = self.pos[axis] + sign
        reach = (self.hi[axis] - p) if sign > 0 else (p - self.lo[axis])
        visits = self.visits
        dv = 0
        dmask = 0
        c = self.code + stride
        for _ in range(reach + 1):
            hit = visits.get(c)
            if hit:
                if self.prune:
                    return None
                dv += len(hit)
                if self.track_pairs:
                    base = t * (t - 1) // 2
                    for s in hit:
                        dmask |= 1 << (base + s)
            c += stride
        return dv, dmask

    def push(self, axis, sign, t):
        """Apply step number ``t``; returns (dV, dmask, undo) or None if pruned."""
        res = self.probe(axis, sign, t)
        if res is None:
            return None
        pos = self.pos
        pos[axis] += sign
        self.code += self.strides[axis] * sign
        code = self.code
        lst = self.visits.get(code)
        if lst is None:
            self.visits[code] = [t]
        else:
            lst.append(t)
        undo = (self.lo[axis], self.hi[axis])
        if pos[axis] < self.lo[axis]:
            self.lo[axis] = pos[axis]
        elif pos[axis] > self.hi[axis]:
            self.hi[axis] = pos[axis]
        return res[0], res[1], undo

    def pop(self, axis, sign, undo):
        lst = self.visits[self.code]
        lst.pop()
        if not lst:
            del self.visits[self.code]
        self.lo[axis], self.hi[axis] = undo
        self.pos[axis] -= sign
        self.code -= self.strides[axis] * sign

    def allowed(self, k):
        """Steps allowed after a prefix that uses axes 0..k-1."""
        if not self.canonical:
            return self.steps
        return self._allowed[k]

    def walk(self, n, k, V, mask, on_node, depth_limit=None, on_frontier=None):
        """Visit the current node and its subtree.

        ``on_node(n, code, k, V, mask)`` is called for every node. With a
        ``depth_limit`` the nodes at that depth are handed to ``on_frontier``
        instead of being visited.
        """
        on_node(n, self.code, k, V, mask)
        if n == self.n_max:
            return
        canonical = self.canonical
        if n + 1 == self.n_max and depth_limit is None:
            for axis, sign in self.allowed(k):
                res = self.probe(axis, sign, n + 1)
                if res is not None:
                    nk = k + 1 if (canonical and axis == k) else k
                    on_node(n + 1, self.code + self.strides[axis] * sign, nk, V + res[0], mask | res[1])
            return
        for axis, sign in self.allowed(k):
            res = self.push(axis, sign, n + 1)
            if res is None:
                continue
            dv, dmask, undo = res
            nk = k + 1 if (canonical and axis == k) else k
            if depth_limit is not None and n + 1 == depth_limit:
                on_frontier(n + 1, nk, V + dv, mask | dmask)
            else:
                self.walk(n + 1, nk, V + dv, mask | dmask, on_node, depth_limit, on_frontier)
            self.pop(axis, sign, undo)

    def replay(self, prefix):
        """Rebuild the state for a step prefix; returns (n, k, V, mask)."""
        k = V = mask = 0
        for t, (axis, sign) in enumerate(prefix, start=1):
            res = self.push(axis, sign, t)
            if res is None:
                raise ContractError(f"prefix {prefix} is pruned")
            if self.canonical and axis == k:
                k += 1
            V += res[0]
            mask |= res[1]
        return len(prefix), k, V, mask


def _split_prefixes(d, n_max, *, prune, canonical, depth, budget):
    """Frontier step-prefixes at ``depth`` plus the search for nodes above it."""
    search = _Search(d, n_max, prune=prune, canonical=canonical, track_pairs=False, budget=budget)
    prefixes = []
    stack = []

    def descend(n, k):
        if n == depth:
            prefixes.append(tuple(stack))
            return
        for axis, sign in search.allowed(k):
            res = search.push(axis, sign, n + 1)
            if res is None:
                continue
            stack.append((axis, sign))
            descend(n + 1, k + 1 if (canonical and axis == k) else k)
            stack.pop()
            search.pop(axis, sign, res[2])

    descend(0, 0)
    return prefixes


def _node_tallier(mode, lace_data, N_max):
    tally: Counter = Counter()
    if mode == "coeff":
        def on_node(n, tip, k, V, mask):
            tally[(n, tip, k, V)] += 1
    else:
        from .laces import laces_within

        def on_node(n, tip, k, V, mask):
            if n < 2 or not mask:
                return
            for N, compat in laces_within(mask, n, N_max, lace_data):
                tally[(n, N, tip, k, (compat & mask).bit_count())] += 1
    return tally, on_node


def _tally_subtree(args):
    """Worker entry point: tally every node of the subtree below ``prefix``."""
    d, n_max, mode, prune, canonical, prefix, budget, N_max, depth_limit = args
    lace_data = None
    if mode == "pi":
        from .laces import lace_catalogue

        lace_data = lace_catalogue(n_max)
    search = _Search(d, n_max, prune=prune, canonical=canonical, track_pairs=(mode == "pi"), budget=budget)
    tally, on_node = _node_tallier(mode, lace_data, N_max)
    n, k, V, mask = search.replay(prefix)
    if depth_limit is None:
        search.walk(n, k, V, mask, on_node)
    else:
        # master pass: nodes strictly above the split depth only
        search.walk(n, k, V, mask, on_node, depth_limit, lambda *a: None)
    decoded: Counter = Counter()
    for key, cnt in tally.items():
        decoded[key[:-3] + (search.decode(key[-3]),) + key[-2:]] += cnt
    return decoded, search.nodes


def run_tally(d, n_max, mode, *, prune, canonical=True, N_max=0, workers=1, budget=DEFAULT_BUDGET):
    """Tally all nodes of the walk tree, optionally over a process pool.

    The tree is split on fixed-depth prefixes and partial tallies are merged
    by exact addition, so the result does not depend on ``workers``.
    """
    if n_max < 0 or d < 1:
        raise ContractError("need n_max >= 0 and d >= 1")
    if workers <= 1 or n_max <= 2:
        tally, nodes = _tally_subtree((d, n_max, mode, prune, canonical, (), budget, N_max, None))
        return tally
    depth = 1
    prefixes = _split_prefixes(d, n_max, prune=prune, canonical=canonical, depth=depth, budget=budget)
    while len(prefixes) < 4 * workers and depth < n_max:
        depth += 1
        prefixes = _split_prefixes(d, n_max, prune=prune, canonical=canonical, depth=depth, budget=budget)
    jobs = [(d, n_max, mode, prune, canonical, (), budget, N_max, depth)]
    jobs += [(d, n_max, mode, prune, canonical, p, budget, N_max, None) for p in prefixes]
    total: Counter = Counter()
    used = 0
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for tally, nodes in pool.map(_tally_subtree, jobs):
            total.update(tally)
            used += nodes
    if used > budget:
        raise BudgetExceeded(budget)
    return total


def _stabilizer_order(d, k):
    return 2 ** (d - k) * math.factorial(d - k)


def expand_orbits(d, keyed_counts):
    """Expand canonical tallies over the symmetry group.

    ``keyed_counts`` maps ``(label, tip, k) -> value``; returns
    ``{(label, x): value * multiplicity}`` summed over all images x of tip.
    """
    group = lattice.signed_permutations(d)
    out: dict = {}
    images_cache: dict = {}
    for (label, tip, k), value in keyed_counts.items():
        key = (tip, k)
        if key not in images_cache:
            images = Counter(lattice.apply_symmetry(g, tip) for g in group)
            stab = _stabilizer_order(d, k)
            images_cache[key] = [(x, m // stab) for x, m in images.items()]
        for x, mult in images_cache[key]:
            out[(label, x)] = out.get((label, x), 0) + value * mult
    return out


# --------------------------------------------------------------------------
# coefficient tables


@dataclass(frozen=True)
class CoeffTable:
    """Exact table ``(n, x) -> c_n^lam(x)`` for ``0 <= n <= n_max``."""

    d: int
    lam: Fraction
    n_max: int
    rows: tuple  # rows[n] is a dict {x: Fraction}
    totals: tuple = field(default=())

    def __post_init__(self):
        if not self.totals:
            object.__setattr__(self, "totals", tuple(sum(r.values(), Fraction(0)) for r in self.rows))

    def __call__(self, n: int, x: Sequence[int]) -> Fraction:
        if not 0 <= n <= self.n_max:
            return Fraction(0)
        return self.rows[n].get(tuple(x), Fraction(0))

    def row(self, n: int) -> Mapping[Point, Fraction]:
        if not 0 <= n <= self.n_max:
            raise ContractError(f"n={n} outside table horizon {self.n_max}")
        return self.rows[n]

    def items(self):
        """(n, x, value) in (n, lexicographic x) order."""
        for n, row in enumerate(self.rows):
            for x in sorted(row):
                yield n, x, row[x]

    def to_json(self) -> str:
        doc = {
            "schema": TABLE_SCHEMA,
            "kind": "CoeffTable",
            "header": {
                "d": self.d,
                "lambda": fraction_str(self.lam),
                "n_max": self.n_max,
                "code_version": CODE_VERSION,
            },
            "rows": [[n, *x, fraction_str(v)] for n, x, v in self.items()],
        }
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "CoeffTable":
        doc = json.loads(text)
        if doc.get("kind") != "CoeffTable":
            raise ContractError("not a CoeffTable document")
        h = doc["header"]
        d, n_max = h["d"], h["n_max"]
        rows = [dict() for _ in range(n_max + 1)]
        for rec in doc["rows"]:
            rows[rec[0]][tuple(rec[1 : 1 + d])] = Fraction(rec[1 + d])
        return cls(d, Fraction(h["lambda"]), n_max, tuple(rows))

    def csv_rows(self):
        header = ["n"] + [f"x{i + 1}" for i in range(self.d)] + ["value"]
        return header, [[n, *x, fraction_str(v)] for n, x, v in self.items()]


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def build_coeff_table(n_max: int, d: int, lam, *, workers: int = 1, budget: int = DEFAULT_BUDGET) -> CoeffTable:
    """Exact weighted walk counts ``c_n^lam(x)`` for all n <= n_max."""
    lam = as_lambda(lam)
    if n_max < 0:
        raise ContractError("n_max must be >= 0")
    tally = run_tally(d, n_max, "coeff", prune=(lam == 1), workers=workers, budget=budget)
    factor = 1 - lam
    keyed: dict = {}
    for (n, tip, k, V), cnt in tally.items():
        w = cnt * factor**V if V else Fraction(cnt)
        if w:
            keyed[(n, tip, k)] = keyed.get((n, tip, k), 0) + w
    expanded = expand_orbits(d, keyed)
    rows = [dict() for _ in range(n_max + 1)]
    for (n, x), v in sorted(expanded.items()):
        rows[n][x] = Fraction(v)
    return CoeffTable(d, lam, n_max, tuple(rows))


def enumerate_walks(n: int, d: int, lam, visitor: Callable[[Walk, Fraction], None], *, budget: int = DEFAULT_BUDGET) -> None:
    """Call ``visitor(walk, weight)`` for every n-step walk of nonzero weight.

    Walks arrive in lexicographic order of their step codes (axis, then
    ``+`` before ``-``). At ``lam = 1`` non-prudent prefixes are pruned.
    """
    lam = as_lambda(lam)
    if n < 0 or d < 1:
        raise ContractError("need n >= 0 and d >= 1")
    search = _Search(d, n, prune=(lam == 1), canonical=False, track_pairs=False, budget=budget)
    trail: list = [tuple(search.pos)]
    factor = 1 - lam

    def rec(t, V):
        if t == n:
            weight = factor**V if V else Fraction(1)
            if weight:
                visitor(Walk(trail), weight)
            return
        for axis, sign in search.steps:
            res = search.push(axis, sign, t + 1)
            if res is None:
                continue
            trail.append(tuple(search.pos))
            rec(t + 1, V + res[0])
            trail.pop()
            search.pop(axis, sign, res[2])

    rec(0, 0)


# --------------------------------------------------------------------------
# endpoint statistics


@dataclass(frozen=True)
class EndpointStats:
    moment: float
    moment_power: object  # exact Fraction when r is an even integer
    char_ratio: float


def endpoint_statistics(table: CoeffTable, n: int, r: float = 2.0, k: Sequence[float] | None = None) -> EndpointStats:
    """Moment ``(sum |x|^r c_n(x) / c_n)^(1/r)`` and ``c_n^(k/sqrt n) / c_n^(0)``."""
    if not 0 <= n <= table.n_max:
        raise ContractError(f"n={n} outside table horizon {table.n_max}")
    if not 0 < r <= 2:
        raise ContractError("r must lie in (0, 2]")
    row = table.row(n)
    total = table.totals[n]
    if total == 0:
        raise ContractError(f"c_{n} is zero")
    if r == 2:
        power = sum((lattice.sq_norm(x) * v for x, v in row.items()), Fraction(0)) / total
        moment = math.sqrt(power)
    else:
        power = math.fsum(math.sqrt(lattice.sq_norm(x)) ** r * float(v) for x, v in row.items()) / float(total)
        moment = power ** (1.0 / r)
    if k is None:
        k = [0.0] * table.d
    if len(k) != table.d:
        raise ContractError("k has the wrong dimension")
    scale = 1.0 / math.sqrt(n) if n > 0 else 0.0
    re = math.fsum(math.cos(scale * sum(ki * xi for ki, xi in zip(k, x))) * float(v) for x, v in row.items())
    im = math.fsum(math.sin(scale * sum(ki * xi for ki, xi in zip(k, x))) * float(v) for x, v in row.items())
    if abs(im) > 1e-9 * max(1.0, float(total)):
        raise AssertionError(f"imaginary part {im} should vanish by symmetry")
    return EndpointStats(moment, power, re / float(total))
