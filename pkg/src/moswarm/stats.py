"""Two-sided Wilcoxon signed-rank test for paired series.

Zero differences are dropped and tied absolute differences share their mean
rank. Up to :data:`EXACT_MAX_N` nonzero pairs the p-value is exact: the
null distribution of the positive rank sum is counted over all ``2**n``
equally likely sign assignments (by dynamic programming on doubled ranks,
which keeps tied half-ranks integral). Above that a normal approximation
with tie and continuity corrections is used.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import UsageError

EXACT_MAX_N = 25


class WilcoxonResult(NamedTuple):
    w_plus: float
    w_minus: float
    statistic: float       # min(w_plus, w_minus)
    n_effective: int
    p_value: float
    method: str            # "exact", "normal" or "degenerate"
    alpha: float

    @property
    def significant(self) -> bool:
        return self.p_value < self.alpha


def mean_ranks(values) -> np.ndarray:
    """1-based ranks of ``values`` with ties given their average rank."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def exact_lower_tail(doubled_ranks, t2: int) -> float:
    """P(sum of doubled ranks over a random sign subset <= t2)."""
    counts = np.zeros(int(sum(doubled_ranks)) + 1, dtype=object)
    counts[0] = 1
    top = 0
    for r in doubled_ranks:
        r = int(r)
        counts[r:top + r + 1] = counts[r:top + r + 1] + counts[:top + 1].copy()
        top += r
    n = len(doubled_ranks)
    return float(sum(counts[:t2 + 1]) / 2**n)


def wilcoxon_signed_rank(a, b, alpha: float = 0.01) -> WilcoxonResult:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise UsageError(f"paired series must have equal length, got {a.shape} and {b.shape}")
    if a.size == 0:
        raise UsageError("paired series are empty")
    d = a - b
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        return WilcoxonResult(0.0, 0.0, 0.0, 0, 1.0, "degenerate", alpha)

    ranks = mean_ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    stat = min(w_plus, w_minus)

    if n <= EXACT_MAX_N:
        doubled = np.rint(2 * ranks).astype(int)
        p = 2.0 * exact_lower_tail(doubled, int(round(2 * stat)))
        method = "exact"
    else:
        mean = n * (n + 1) / 4
        _, tie_counts = np.unique(np.abs(d), return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24 - float(np.sum(tie_counts**3 - tie_counts)) / 48
        z = max(0.0, abs(w_plus - mean) - 0.5) / math.sqrt(var)
        p = math.erfc(z / math.sqrt(2))
        method = "normal"
    return WilcoxonResult(w_plus, w_minus, stat, n, min(1.0, p), method, alpha)


def format_report(res: WilcoxonResult, column: str = "") -> str:
    lines = []
    if column:
        lines.append(f"column: {column}")
    if res.method == "degenerate":
        lines.append("no nonzero differences")
    lines += [
        f"n_effective: {res.n_effective}",
        f"W+: {res.w_plus!r}",
        f"W-: {res.w_minus!r}",
        f"W: {res.statistic!r}",
        f"method: {res.method}",
        f"p_value: {res.p_value!r}",
        f"alpha: {res.alpha!r}",
        f"significant: {'yes' if res.significant else 'no'}",
    ]
    return "\n".join(lines) + "\n"
