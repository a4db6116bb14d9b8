"""Truncated weighted direct sums of mean-computation problems.

Level k hosts an N_k x N_k mixed-norm space with N_k = 2^k. An element is a
finite collection of level matrices; its integral is the weighted sum of the
level means with weights 2^(-alpha*k), alpha > 1, and its norm is the plain
l_p1 norm of the per-level mixed norms.

``level_allocation`` produces the sample schedule driven by a base level k0:
levels below k0 are read out completely (2^(2k) entries, zero error), levels
k0 .. k1 = floor(beta*k0) with beta = (alpha+1)/alpha receive geometrically
decaying budgets ceil(c0 * 2^(2*k0 - delta*(k - k0))) - 1, and levels above
k1 are dropped. The schedule's total is at most
(1/3 + c0/(1 - 2^-delta)) * 2^(2*k0), reported alongside the levels.

``ds_estimate`` runs the composite estimator: exact readout below k0, then
per-level mean estimation (adaptive two-stage or plain Monte Carlo) at the
scheduled budgets, all through counting tapes. Each level draws from its own
child stream, so enlarging the truncation level of the input never perturbs
the estimates of existing levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters, PreconditionViolated
from .estimators import (
    EstimateReport,
    adaptive_mean_a3,
    default_probe_count,
    draw_indices,
    mc_mean_a2,
)
from .oracle import Mode, open_adaptive, open_nonadaptive
from .rng import RngStream
from .spaces import INF, MixedMatrix, ProblemSpec, as_exponent, mixed_norm

__all__ = [
    "MAX_LEVEL",
    "DirectSumSpec",
    "DirectSumElement",
    "ds_norm",
    "ds_integral",
    "LevelAllocation",
    "level_allocation",
    "ds_estimate",
]

#: Largest representable truncation level (4096 x 4096 top matrix).
MAX_LEVEL = 12


def level_size(k: int) -> int:
    """Side length N_k = 2^k of the level-k matrices."""
    return 1 << k


@dataclass(frozen=True)
class DirectSumSpec:
    """Weight exponent, inner space exponents, outer norm exponent, truncation."""

    alpha: float
    p: float
    u: float
    p1: float
    k_max: int

    def __post_init__(self) -> None:
        if not self.alpha > 1.0:
            raise InvalidParameters(f"alpha must exceed 1, got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "p", as_exponent(self.p))
        object.__setattr__(self, "u", as_exponent(self.u))
        object.__setattr__(self, "p1", as_exponent(self.p1))
        if int(self.k_max) != self.k_max or not 0 <= self.k_max <= MAX_LEVEL:
            raise InvalidParameters(
                f"k_max must be an integer in [0, {MAX_LEVEL}], got {self.k_max}"
            )
        object.__setattr__(self, "k_max", int(self.k_max))

    def level_spec(self, k: int) -> ProblemSpec:
        n = level_size(k)
        return ProblemSpec(n, n, self.p, self.u)


class DirectSumElement:
    """A finite family of level matrices, at most one per level."""

    def __init__(self, spec: DirectSumSpec, levels) -> None:
        self.spec = spec
        table: dict[int, MixedMatrix] = {}
        for k, f_k in levels:
            k = int(k)
            if not 0 <= k <= spec.k_max:
                raise InvalidParameters(
                    f"level {k} outside [0, {spec.k_max}]"
                )
            if k in table:
                raise InvalidParameters(f"duplicate level {k}")
            expected = spec.level_spec(k)
            if f_k.spec != expected:
                raise InvalidParameters(
                    f"level {k} matrix has spec {f_k.spec}, expected {expected}"
                )
            table[k] = f_k
        self._levels = dict(sorted(table.items()))

    def level(self, k: int) -> MixedMatrix | None:
        return self._levels.get(k)

    def items(self):
        return self._levels.items()


def ds_norm(x: DirectSumElement) -> float:
    """l_p1 norm of the per-level mixed norms; missing levels contribute 0."""
    norms = [mixed_norm(f_k) for _, f_k in x.items()]
    if not norms:
        return 0.0
    p1 = x.spec.p1
    arr = np.asarray(norms)
    if p1 == INF:
        return float(arr.max())
    return float((arr**p1).sum() ** (1.0 / p1))


def ds_integral(x: DirectSumElement) -> float:
    """Exact weighted sum of level means (the estimation target)."""
    total = 0.0
    for k, f_k in x.items():
        total += 2.0 ** (-x.spec.alpha * k) * float(f_k.entries.mean())
    return total


@dataclass(frozen=True)
class LevelAllocation:
    """Schedule of per-level budgets plus the certified total bound."""

    k0: int
    k1: int
    levels: tuple[tuple[int, int], ...]
    total: int
    budget_constant: float

    def budget(self, k: int) -> int:
        return dict(self.levels)[k]


def level_allocation(
    k0: int, alpha: float, delta: float, c0: float
) -> LevelAllocation:
    """Per-level sample budgets for base level k0; see module docstring.

    Requires alpha > 1, 0 < delta < alpha - 1, and 0 < c0 < 1. The reported
    ``budget_constant`` certifies total <= budget_constant * 2^(2*k0).
    """
    if not alpha > 1.0:
        raise InvalidParameters(f"alpha must exceed 1, got {alpha}")
    if not 0.0 < delta < alpha - 1.0:
        raise InvalidParameters(
            f"delta must lie strictly inside (0, alpha - 1), got {delta}"
        )
    if not 0.0 < c0 < 1.0:
        raise InvalidParameters(f"c0 must lie in (0, 1), got {c0}")
    k0 = int(k0)
    if k0 < 1:
        raise InvalidParameters(f"k0 must be a positive integer, got {k0}")
    beta = (alpha + 1.0) / alpha
    k1 = math.floor(beta * k0)
    levels = []
    for k in range(k1 + 1):
        if k < k0:
            n_k = 1 << (2 * k)
        else:
            n_k = math.ceil(c0 * 2.0 ** (2 * k0 - delta * (k - k0))) - 1
        levels.append((k, int(n_k)))
    total = sum(n for _, n in levels)
    constant = 1.0 / 3.0 + c0 / (1.0 - 2.0 ** (-delta))
    return LevelAllocation(
        k0=k0,
        k1=k1,
        levels=tuple(levels),
        total=total,
        budget_constant=constant,
    )


def _full_readout_indices(n: int) -> np.ndarray:
    side = np.arange(1, n + 1, dtype=np.int64)
    rows = np.repeat(side, n)
    cols = np.tile(side, n)
    return np.stack([rows, cols], axis=1)


def ds_estimate(
    x: DirectSumElement,
    k0: int,
    delta: float,
    mode: Mode,
    m: int | None,
    rng: RngStream,
    *,
    c0: float = 0.5,
) -> EstimateReport:
    """Composite estimate of ``ds_integral(x)`` under the k0 schedule.

    Levels below k0 are read in full (exact), levels k0 .. k1 are estimated
    with the adaptive two-stage estimator (ADAPTIVE mode; requires
    p < 2 < u and a schedule budget of at least N_k at every estimated
    level) or plain Monte Carlo (NONADAPTIVE mode), and levels above k1 are
    dropped. ``m`` is the stage-one repetition count per level; ``None``
    selects max(1, ceil(log2(N_k + 1))) per level.
    """
    spec = x.spec
    schedule = level_allocation(k0, spec.alpha, delta, c0)
    if mode is Mode.ADAPTIVE and not (spec.p < 2.0 < spec.u):
        raise PreconditionViolated(
            f"adaptive mode requires p < 2 < u, got p={spec.p}, u={spec.u}"
        )
    value = 0.0
    cards = 0
    for k, n_k in schedule.levels:
        f_k = x.level(k)
        if f_k is None:
            continue
        weight = 2.0 ** (-spec.alpha * k)
        side = level_size(k)
        if k < k0:
            idx = _full_readout_indices(side)
            tape = open_nonadaptive(f_k, idx)
            vals = tape.query_many(idx[:, 0], idx[:, 1])
            value += weight * float(vals.mean())
            cards += tape.card()
            continue
        level_rng = rng.child(k)
        if mode is Mode.NONADAPTIVE:
            idx = draw_indices(f_k.spec, n_k, level_rng)
            tape = open_nonadaptive(f_k, idx)
            report = mc_mean_a2(tape, n_k, level_rng)
        else:
            if n_k < side:
                raise PreconditionViolated(
                    f"level {k}: scheduled budget {n_k} is below N_k = {side}; "
                    "increase k0 or decrease delta"
                )
            m_k = default_probe_count(side) if m is None else int(m)
            tape = open_adaptive(f_k, budget=6 * m_k * n_k)
            report = adaptive_mean_a3(tape, n_k, m_k, spec.p, level_rng)
        value += weight * report.value
        cards += report.cards
    return EstimateReport(value=value, cards=cards)
