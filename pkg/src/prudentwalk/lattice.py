"""Geometry of the hypercubic lattice Z^d.

Points are plain tuples of ints; a unit step is the pair ``(axis, sign)`` with
a zero-based axis. All indicator values are exact :class:`~fractions.Fraction`
objects, except for the Gaussian-smoothed axis indicator.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterator, Sequence, Tuple

from .errors import ContractError, DimensionMismatch

Point = Tuple[int, ...]
Step = Tuple[int, int]


def _check_dims(*points: Sequence[int]) -> int:
    d = len(points[0])
    if d < 1:
        raise ContractError("dimension must be at least 1")
    for p in points[1:]:
        if len(p) != d:
            raise DimensionMismatch(f"points of dimension {d} and {len(p)} combined")
    return d


def origin(d: int) -> Point:
    return (0,) * d


def unit_vector(step: Step, d: int) -> Point:
    axis, sign = step
    if not 0 <= axis < d or sign not in (1, -1):
        raise ContractError(f"invalid unit step {step!r} in dimension {d}")
    v = [0] * d
    v[axis] = sign
    return tuple(v)


def unit_steps(d: int) -> list[Step]:
    """All 2d unit steps in the fixed enumeration order (axis, then +/-)."""
    return [(axis, sign) for axis in range(d) for sign in (1, -1)]


def step_between(a: Sequence[int], b: Sequence[int]) -> Step:
    """The unit step taking ``a`` to ``b``; raises if they are not neighbours."""
    _check_dims(a, b)
    diff = [bi - ai for ai, bi in zip(a, b)]
    nonzero = [(i, v) for i, v in enumerate(diff) if v != 0]
    if len(nonzero) != 1 or abs(nonzero[0][1]) != 1:
        raise ContractError(f"{tuple(a)} and {tuple(b)} are not nearest neighbours")
    return nonzero[0]


def l1_norm(x: Sequence[int]) -> int:
    return sum(abs(c) for c in x)


def sq_norm(x: Sequence[int]) -> int:
    return sum(c * c for c in x)


def sees(tip: Sequence[int], last_step: Step, a: Sequence[int]) -> bool:
    """True iff ``a`` lies on the ray ``tip + k * last_step`` for some k >= 0.

    ``a == tip`` counts as seen.
    """
    d = _check_dims(tip, a)
    axis, sign = last_step
    if not 0 <= axis < d or sign not in (1, -1):
        raise ContractError(f"invalid unit step {last_step!r}")
    for i in range(d):
        if i != axis and a[i] != tip[i]:
            return False
    return (a[axis] - tip[axis]) * sign >= 0


def bot(x: Sequence[int], a: Sequence[int]) -> bool:
    """True iff x and a differ in at most one coordinate."""
    _check_dims(x, a)
    return sum(1 for xi, ai in zip(x, a) if xi != ai) <= 1


def indicator_bot(x: Sequence[int], a: Sequence[int]) -> Fraction:
    """Axis indicator centred at ``a``: 1/d on the punctured axes through a."""
    d = _check_dims(x, a)
    ndiff = sum(1 for xi, ai in zip(x, a) if xi != ai)
    return Fraction(1, d) if ndiff == 1 else Fraction(0)


def indicator_bot_smoothed(x: Sequence[int], R: float) -> float:
    """Gaussian-damped axis indicator ``exp(-|x|^2 / R) / d`` centred at 0."""
    if not R > 0:
        raise ContractError(f"R must be positive, got {R}")
    d = _check_dims(x)
    if sum(1 for c in x if c != 0) != 1:
        return 0.0
    return math.exp(-sq_norm(x) / R) / d


def segment_indicator(a: Sequence[int], b: Sequence[int], x: Sequence[int]) -> Fraction:
    """1/d at the neighbour of ``a`` on the segment towards ``b`` (a ⊥ b, a != b)."""
    d = _check_dims(a, b, x)
    diffs = [i for i in range(d) if a[i] != b[i]]
    if len(diffs) != 1:
        return Fraction(0)
    j = diffs[0]
    sign = 1 if b[j] > a[j] else -1
    for i in range(d):
        if i != j and x[i] != a[i]:
            return Fraction(0)
    return Fraction(1, d) if x[j] - a[j] == sign else Fraction(0)


def step_distribution(x: Sequence[int]) -> Fraction:
    """Simple random walk step law: 1/(2d) on the 2d nearest neighbours of 0."""
    d = _check_dims(x)
    return Fraction(1, 2 * d) if l1_norm(x) == 1 else Fraction(0)


def box(d: int, radius: int) -> Iterator[Point]:
    """All points with sup-norm at most ``radius``."""
    rng = range(-radius, radius + 1)
    if d == 1:
        for v in rng:
            yield (v,)
        return
    for head in rng:
        for tail in box(d - 1, radius):
            yield (head,) + tail


def signed_permutations(d: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """The 2^d d! lattice symmetries as (perm, signs): x -> y, y[perm[i]] = signs[i] x[i]."""
    out = []
    for perm in itertools.permutations(range(d)):
        for mask in range(1 << d):
            signs = tuple(-1 if mask >> i & 1 else 1 for i in range(d))
            out.append((perm, signs))
    return out


def apply_symmetry(g, x: Sequence[int]) -> Point:
    perm, signs = g
    y = [0] * len(x)
    for i, xi in enumerate(x):
        y[perm[i]] = signs[i] * xi
    return tuple(y)
