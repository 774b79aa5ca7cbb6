"""Monte Carlo estimators for weakly prudent walks and mutual seeing of random walks.

Walks are drawn as uniform step sequences and reweighted by ``(1 - lam)^V``
with V the number of seeing pairs, so ``(2d)^n E[(1 - lam)^V]`` is an
unbiased estimate of c_n^lam. Samples are split into a fixed number of
batches; batch b draws from its own Philox stream keyed by (b, seed), so the
output does not depend on how batches are spread over workers.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._version import CODE_VERSION
from .errors import BudgetExceeded, ContractError
from .fourier import _returns, axis_mass
from .reports import Report, csv_text
from .walks import CoeffTable, as_lambda, endpoint_statistics

MIN_BATCHES = 16
EXHAUSTIVE_BUDGET = 1 << 22


@dataclass(frozen=True)
class SamplerConfig:
    d: int
    lam: float
    n: int
    samples: int
    seed: int
    workers: int = 1
    batches: int = MIN_BATCHES
    k: tuple | None = None

    def __post_init__(self):
        if self.d < 1 or self.n < 0:
            raise ContractError("need d >= 1 and n >= 0")
        if not 0.0 <= float(self.lam) <= 1.0:
            raise ContractError(f"lambda={self.lam} outside [0, 1]")
        if self.samples < 1:
            raise ContractError("samples must be at least 1")
        if not 0 <= self.seed < 1 << 64:
            raise ContractError("seed must be a 64-bit unsigned integer")
        if self.k is not None and len(self.k) != self.d:
            raise ContractError("k has the wrong dimension")

    @property
    def n_batches(self) -> int:
        return max(MIN_BATCHES, self.batches)

    def wave(self) -> np.ndarray:
        return np.array(self.k if self.k is not None else (1.0,) + (0.0,) * (self.d - 1))

    def config_hash(self) -> str:
        """Hash of everything that determines the output (workers excluded)."""
        doc = {"d": self.d, "lam": float(self.lam), "n": self.n, "samples": self.samples,
               "seed": self.seed, "batches": self.n_batches, "k": list(map(float, self.wave()))}
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class EstimateRecord:
    value: float
    stderr: float
    ess: float
    seed: int
    config_hash: str


@dataclass(frozen=True)
class RosenbluthResult:
    config: SamplerConfig
    c_n_hat: EstimateRecord
    mean_sq_displacement: EstimateRecord
    char_ratio: EstimateRecord
    zero_weight: bool = False
    warnings: tuple = field(default_factory=tuple)

    def _config_echo(self) -> dict:
        # workers is scheduling, not content: leaving it out keeps lines identical across pools
        doc = asdict(self.config)
        doc.pop("workers")
        doc["k"] = list(map(float, self.config.wave()))
        doc["batches"] = self.config.n_batches
        return doc

    def to_json_line(self) -> str:
        doc = {
            "config": self._config_echo(),
            "c_n_hat": asdict(self.c_n_hat),
            "mean_sq_displacement": asdict(self.mean_sq_displacement),
            "char_ratio": asdict(self.char_ratio),
            "zero_weight": self.zero_weight,
            "warnings": list(self.warnings),
            "code_version": CODE_VERSION,
        }
        return json.dumps(_finite(doc), sort_keys=True) + "\n"


def _finite(doc):
    if isinstance(doc, dict):
        return {k: _finite(v) for k, v in doc.items()}
    if isinstance(doc, list):
        return [_finite(v) for v in doc]
    if isinstance(doc, float) and not math.isfinite(doc):
        return repr(doc)
    return doc


# --------------------------------------------------------------------------
# paths and seeing counts


def paths_from_codes(codes: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Step codes 0..2d-1 (axis = code // 2, sign + for even) to positions."""
    axes = codes // 2
    signs = 1 - 2 * (codes % 2)
    steps = np.zeros(codes.shape + (d,), dtype=np.int64)
    np.put_along_axis(steps, axes[..., None], signs[..., None], axis=-1)
    pos = np.zeros((codes.shape[0], codes.shape[1] + 1, d), dtype=np.int64)
    np.cumsum(steps, axis=1, out=pos[:, 1:])
    return pos, axes, signs


def seeing_counts(pos: np.ndarray, axes: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """V for each path: pairs s < t with w(s) on the ray from w(t) along step t."""
    S, n1, d = pos.shape
    V = np.zeros(S, dtype=np.int64)
    for t in range(1, n1):
        diff = pos[:, :t, :] - pos[:, t:t + 1, :]
        a = axes[:, t - 1]
        along = np.take_along_axis(diff, a[:, None, None], axis=2)[:, :, 0] * signs[:, t - 1][:, None]
        off = np.abs(diff).sum(axis=2) - np.abs(along)
        V += np.count_nonzero((off == 0) & (along >= 0), axis=1)
    return V


def _stream(seed: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(batch << 64) | seed))


def _batch_sizes(samples: int, batches: int) -> list[int]:
    base, extra = divmod(samples, batches)
    return [base + (1 if b < extra else 0) for b in range(batches)]


def _run_batch(args):
    d, lam, n, size, seed, batch, k = args
    rng = _stream(seed, batch)
    codes = rng.integers(0, 2 * d, size=(size, n), dtype=np.int64)
    pos, axes, signs = paths_from_codes(codes, d)
    V = seeing_counts(pos, axes, signs)
    w = np.power(1.0 - lam, V.astype(float)) * float(2 * d) ** n
    end = pos[:, -1, :].astype(float)
    sq = (end**2).sum(axis=1)
    cosk = np.cos(end @ np.asarray(k) / math.sqrt(n)) if n > 0 else np.ones(size)
    return np.array([size, w.sum(), (w * w).sum(), (w * sq).sum(), (w * cosk).sum()])


def _batch_sums(cfg: SamplerConfig) -> np.ndarray:
    k = cfg.wave()
    jobs = [(cfg.d, float(cfg.lam), cfg.n, size, cfg.seed, b, k)
            for b, size in enumerate(_batch_sizes(cfg.samples, cfg.n_batches)) if size > 0]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_batch, jobs))
    else:
        rows = [_run_batch(j) for j in jobs]
    return np.array(rows)


def _batch_stderr(values: np.ndarray) -> float:
    if len(values) < 2:
        return math.nan
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def rosenbluth_estimate(cfg: SamplerConfig) -> RosenbluthResult:
    """Estimate c_n^lam, the weighted E|w(n)|^2 and c_n(k/sqrt n)/c_n(0).

    Standard errors come from the spread of independent batch estimates.
    """
    sums = _batch_sums(cfg)
    size, w, w2, wsq, wcos = sums.T
    total_w = float(w.sum())
    h = cfg.config_hash()
    ess = total_w**2 / float(w2.sum()) if w2.sum() > 0 else 0.0
    c_rec = EstimateRecord(total_w / cfg.samples, _batch_stderr(w / size), ess, cfg.seed, h)
    if total_w == 0:
        nan = EstimateRecord(math.nan, math.nan, 0.0, cfg.seed, h)
        return RosenbluthResult(cfg, c_rec, nan, nan, True, ("all sampled weights are zero",))
    live = w > 0
    msd = EstimateRecord(float(wsq.sum()) / total_w, _batch_stderr(wsq[live] / w[live]), ess, cfg.seed, h)
    chr_ = EstimateRecord(float(wcos.sum()) / total_w, _batch_stderr(wcos[live] / w[live]), ess, cfg.seed, h)
    warnings = () if live.all() else (f"{int((~live).sum())} batches carry zero weight",)
    return RosenbluthResult(cfg, c_rec, msd, chr_, False, warnings)


def rosenbluth_exhaustive(d: int, lam, n: int) -> Fraction:
    """The estimator averaged over all (2d)^n step sequences, in exact arithmetic.

    Equals c_n^lam exactly; ``lam`` must be rational.
    """
    lam = as_lambda(lam)
    if (2 * d) ** n > EXHAUSTIVE_BUDGET:
        raise BudgetExceeded(EXHAUSTIVE_BUDGET, "exhaustive step-sequence scan")
    if n == 0:
        return Fraction(1)
    codes = np.indices((2 * d,) * n).reshape(n, -1).T
    V = seeing_counts(*paths_from_codes(codes, d))
    counts = np.bincount(V)
    mean = sum(Fraction(int(c)) * (1 - lam) ** v for v, c in enumerate(counts)) / (2 * d) ** n
    return (2 * d) ** n * mean


def estimates_csv(results: Sequence[RosenbluthResult]) -> str:
    rows = [[r.config.n, r.mean_sq_displacement.value, r.mean_sq_displacement.stderr] for r in results]
    return csv_text(["n", "moment", "stderr"], rows)


# --------------------------------------------------------------------------
# mutual seeing of two independent simple random walks

MUTUAL_SEEING_BUDGET = 1 << 14


def mutual_seeing_exact(d: int, T: int) -> list[Fraction]:
    """Partial sums S(1..T) of (1/2) sum_t t P(X(t) on the last axis, X(t) != 0).

    S(T) is the expected number of pairs (s, t), s, t >= 1, s + t <= T + 1,
    at which the tip of one walk sees a site of the other.
    """
    if T < 1 or d < 1:
        raise ContractError("mutual_seeing_exact needs T >= 1 and d >= 1")
    if T > MUTUAL_SEEING_BUDGET:
        raise BudgetExceeded(MUTUAL_SEEING_BUDGET, "mutual seeing horizon")
    _returns.prepare(d, T)
    out, acc = [], Fraction(0)
    for t in range(1, T + 1):
        acc += t * axis_mass(t, d) / 2
        out.append(acc)
    return out


def mutual_seeing_mc(d: int, T: int, samples: int, seed: int, batches: int = MIN_BATCHES) -> EstimateRecord:
    """Direct simulation of the pair count behind :func:`mutual_seeing_exact`."""
    if T < 1 or samples < 1:
        raise ContractError("need T >= 1 and samples >= 1")
    means = []
    total = 0.0
    for b, size in enumerate(_batch_sizes(samples, max(MIN_BATCHES, batches))):
        if size == 0:
            continue
        rng = _stream(seed, b)
        pos1, ax1, sg1 = paths_from_codes(rng.integers(0, 2 * d, size=(size, T)), d)
        pos2, _, _ = paths_from_codes(rng.integers(0, 2 * d, size=(size, T)), d)
        count = np.zeros(size)
        for t in range(1, T + 1):
            diff = pos2[:, 1:T + 2 - t, :] - pos1[:, t:t + 1, :]
            a = ax1[:, t - 1]
            along = np.take_along_axis(diff, a[:, None, None], axis=2)[:, :, 0] * sg1[:, t - 1][:, None]
            off = np.abs(diff).sum(axis=2) - np.abs(along)
            count += np.count_nonzero((off == 0) & (along >= 0), axis=1)
        means.append(count.mean())
        total += count.sum()
    return EstimateRecord(float(total / samples), _batch_stderr(np.array(means)), float(samples), seed, "")


def ucd_heuristic(T: int = 2048, dims: Sequence[int] = (4, 5, 6)) -> Report:
    """Growth of S(T) under doubling: bounded for d = 6, logarithmic at 5, power-like at 4."""
    values: dict = {}
    checks: dict = {}
    for d in dims:
        S = mutual_seeing_exact(d, T)
        marks = []
        t = T
        while t >= 1 and len(marks) < 4:
            marks.append(t)
            t //= 2
        marks.reverse()
        at = {m: float(S[m - 1]) for m in marks}
        increments = [at[marks[i + 1]] - at[marks[i]] for i in range(len(marks) - 1)]
        values[str(d)] = {"S": {str(m): S[m - 1] for m in marks}, "S_float": {str(m): at[m] for m in marks},
                          "increments": increments}
        half = T // 2
        if d >= 6:
            checks[str(d)] = float(S[T - 1] - S[half - 1]) < 0.02 * float(S[half - 1])
        elif d == 5:
            checks[str(d)] = len(increments) == 3 and max(increments) <= 1.3 * min(increments)
        elif d == 4:
            checks[str(d)] = float(S[T - 1] / S[half - 1]) > 1.25
    return Report(
        operation="ucd-heuristic",
        inputs={"T": T, "dims": list(dims)},
        values={"dimensions": values, "checks": checks},
        passed=all(checks.values()) if checks else None,
    )


# --------------------------------------------------------------------------
# diffusive scaling


def _fit_slope(n: np.ndarray, m: np.ndarray, se: np.ndarray | None):
    x, y = np.log(n), np.log(m)
    if se is None or not np.all(np.isfinite(se)) or np.any(se <= 0):
        A = np.vstack([x, np.ones_like(x)]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - A @ coef
        dof = len(x) - 2
        s2 = float(resid @ resid) / dof if dof > 0 else 0.0
        cov = s2 * np.linalg.inv(A.T @ A)
    else:
        sig = se / m  # standard error of log m
        W = 1.0 / sig**2
        A = np.vstack([x, np.ones_like(x)]).T
        cov = np.linalg.inv(A.T @ (A * W[:, None]))
        coef = cov @ (A.T @ (W * y))
    return float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0)))


def diffusive_exponent(
    n_list: Sequence[int],
    *,
    d: int,
    lam,
    samples: int = 20000,
    seed: int = 0,
    workers: int = 1,
    table: CoeffTable | None = None,
    band: tuple | None = (0.9, 1.1),
) -> Report:
    """Slope of log E|w(n)|^2 against log n with a 95% interval.

    With ``table`` the moments are exact (enumeration); otherwise they are
    Rosenbluth estimates, one independent run per n.
    """
    n_list = sorted(set(int(n) for n in n_list))
    if len(n_list) < 4 or n_list[0] < 1:
        raise ContractError("diffusive_exponent needs at least four positive n")
    if table is not None:
        if table.d != d or table.lam != as_lambda(lam):
            raise ContractError("table does not match (d, lambda)")
        moments = np.array([float(endpoint_statistics(table, n).moment_power) for n in n_list])
        se = None
        source = "exact"
    else:
        results = [rosenbluth_estimate(SamplerConfig(d, float(lam), n, samples, seed, workers)) for n in n_list]
        moments = np.array([r.mean_sq_displacement.value for r in results])
        se = np.array([r.mean_sq_displacement.stderr for r in results])
        source = "monte-carlo"
    if not np.all(np.isfinite(moments)) or np.any(moments <= 0):
        raise ContractError("degenerate fit: nonpositive or undefined moments")
    slope, slope_se = _fit_slope(np.array(n_list, dtype=float), moments, se)
    ci = (slope - 1.96 * slope_se, slope + 1.96 * slope_se)
    values = {"slope": slope, "slope_stderr": slope_se, "ci95": list(ci), "n": n_list,
              "moments": moments.tolist(), "source": source}
    if se is not None:
        values["moment_stderr"] = se.tolist()
    passed = None if band is None else bool(band[0] <= slope <= band[1])
    return Report(
        operation="moments",
        inputs={"d": d, "lambda": str(lam), "samples": samples if table is None else None, "band": band},
        values=values,
        passed=passed,
        seed=seed if table is None else None,
    )
